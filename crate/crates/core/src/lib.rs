//! Characteristic classes at desk scale.
//!
//! * [`weil`]: the Weil algebra of `gl_n(C)` relative to `u_n` and the exact
//!   transgression `dT_p = Q_p`.
//! * [`regulator`]: geodesic-simplex integration of `T_p` on `GL_n(C)/U(n)`,
//!   giving the Cheeger–Simons and Borel cocycles on matrix tuples.
//! * [`simforms`] and [`cwchar`]: polynomial forms on semi-simplicial sets and
//!   Chern–Weil theory on them, all in exact rational arithmetic.
//! * [`filtration`]: logarithmic forms and the `F`/`Q` filtrations.

pub mod cwchar;
pub mod error;
pub mod filtration;
pub mod invpoly;
pub mod linalg;
pub mod matlie;
pub mod quadrature;
pub mod regulator;
pub mod scalar;
pub mod simforms;
pub mod verify;
pub mod weil;

pub use error::{Error, Result};

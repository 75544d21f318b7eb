//! Chern–Weil calculus on semi-simplicial sets with exact coefficients.
//!
//! Bundles are described by local connection data: a `gl_n`-valued compatible
//! 1-form on each cell of the base. Curvature, Chern forms, the transgression
//! form between two connections, and the representatives built from them are
//! all computed cellwise.
//!
//! A character representative stores `(α, y)` with `δy = ∫α`; its cone pair is
//! `(α, -y)`, which is a cocycle for `D(α, β) = (-dα, δβ + ∫α)`.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::invpoly::mixed_polarize;
use crate::linalg::SqMat;
use crate::scalar::{ratio, QC};
use crate::simforms::{face_pullback, vertex_inclusion, Cochain, CoeffLattice, DiffForm, MatForm, PolyForm, SSet};

/// Cellwise family of form-valued `n×n` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPolyForm {
  sset:  Arc<SSet>,
  n:     usize,
  cells: Vec<Vec<MatForm>>,
}

impl MatPolyForm {
  pub fn from_fn(sset: Arc<SSet>, n: usize, mut f: impl FnMut(usize, usize) -> MatForm) -> Self {
    let cells = (0..=sset.dim()).map(|m| (0..sset.count(m)).map(|i| f(m, i)).collect()).collect();
    Self { sset, n, cells }
  }

  pub fn n(&self) -> usize { self.n }

  pub fn sset(&self) -> &Arc<SSet> { &self.sset }

  pub fn cell(&self, m: usize, idx: usize) -> &MatForm { &self.cells[m][idx] }

  pub fn entry(&self, i: usize, j: usize) -> PolyForm { PolyForm::from_fn(self.sset.clone(), |m, idx| self.cells[m][idx][(i, j)].clone()) }

  pub fn is_zero(&self) -> bool { self.cells.iter().flatten().all(SqMat::is_zero) }

  pub fn is_compatible(&self) -> bool {
    (0..self.n).all(|i| (0..self.n).all(|j| self.entry(i, j).is_compatible()))
  }

  fn map(&self, f: impl Fn(&MatForm) -> MatForm) -> Self {
    Self { sset: self.sset.clone(), n: self.n, cells: self.cells.iter().map(|l| l.iter().map(&f).collect()).collect() }
  }
}

/// A connection given by its local `gl_n`-valued 1-form on every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpConnection {
  omega: MatPolyForm,
}

impl SimpConnection {
  /// Checked constructor: entries must be compatible 1-forms.
  pub fn new(omega: MatPolyForm) -> Result<Self> {
    for l in &omega.cells {
      for m in l {
        if m.n() != omega.n {
          return Err(Error::Incompatible("connection matrices must all be n×n".into()));
        }
        if m.entries().iter().any(|e| !e.is_zero() && e.degree() != Some(1)) {
          return Err(Error::InvalidArgument("connection entries must be 1-forms".into()));
        }
      }
    }
    if !omega.is_compatible() {
      return Err(Error::Incompatible("connection is not compatible across faces".into()));
    }
    Ok(Self { omega })
  }

  pub fn trivial(sset: Arc<SSet>, n: usize) -> Self { Self { omega: MatPolyForm::from_fn(sset, n, |_, _| SqMat::zeros(n)) } }

  /// Random compatible connection with entries from [`PolyForm::random`].
  pub fn random<R: Rng>(sset: Arc<SSet>, n: usize, rng: &mut R) -> Self {
    let entries: Vec<PolyForm> = (0..n * n).map(|_| PolyForm::random(sset.clone(), rng, 1)).collect();
    let omega = MatPolyForm::from_fn(sset, n, |m, idx| SqMat::from_fn(n, |i, j| entries[i * n + j].cell(m, idx).clone()));
    Self { omega }
  }

  pub fn n(&self) -> usize { self.omega.n }

  pub fn sset(&self) -> &Arc<SSet> { &self.omega.sset }

  pub fn form(&self) -> &MatPolyForm { &self.omega }

  fn check_pair(&self, other: &Self) -> Result<()> {
    if self.n() != other.n() {
      return Err(Error::Incompatible("connections on bundles of different rank".into()));
    }
    if !Arc::ptr_eq(self.sset(), other.sset()) && **self.sset() != **other.sset() {
      return Err(Error::Incompatible("connections live on different simplicial sets".into()));
    }
    Ok(())
  }

  /// Restriction to a vertex-labelled subcomplex.
  pub fn restrict(&self, sub: Arc<SSet>) -> Result<Self> {
    let inc = vertex_inclusion(&sub, self.sset())?;
    Ok(Self { omega: MatPolyForm::from_fn(sub, self.n(), |m, idx| self.omega.cells[m][inc[m][idx]].clone()) })
  }
}

fn mat_d(a: &MatForm) -> MatForm { a.map(DiffForm::d) }

/// `dω + ω∧ω` for one cell.
pub fn mat_curvature(omega: &MatForm) -> MatForm { &mat_d(omega) + &(omega * omega) }

/// `Θ = dω + ω∧ω` cellwise.
pub fn curvature(conn: &SimpConnection) -> MatPolyForm { conn.omega.map(mat_curvature) }

/// `C_k(Θ)` cellwise via the mixed-discriminant polarization.
pub fn chern_form(conn: &SimpConnection, k: usize) -> Result<PolyForm> {
  if k > conn.n() {
    return Err(Error::InvalidArgument(format!("degree k={k} exceeds n={}", conn.n())));
  }
  let theta = curvature(conn);
  Ok(PolyForm::from_fn(conn.sset().clone(), |m, idx| {
    let t = theta.cell(m, idx);
    mixed_polarize(&vec![t.clone(); k])
  }))
}

/// `η_p` on one cell from `ω_0` and `ω_1`.
fn eta_cell(w0: &MatForm, w1: &MatForm, p: usize) -> DiffForm {
  let w = w1 - w0;
  // Θ_t = A + tB + t²C for the path ω_0 + tω.
  let a = mat_curvature(w0);
  let b = &(&mat_d(&w) + &(w0 * &w)) + &(&w * w0);
  let c = &w * &w;
  let parts = [a, b, c];
  let mut acc = DiffForm::default();
  let slots = p - 1;
  for code in 0..3usize.pow(slots as u32) {
    let mut args = vec![w.clone()];
    let mut e = 0;
    let mut rem = code;
    for _ in 0..slots {
      let k = rem % 3;
      rem /= 3;
      e += k;
      args.push(parts[k].clone());
    }
    if args.iter().any(SqMat::is_zero) {
      continue;
    }
    let term = mixed_polarize(&args);
    acc = acc.add_ref(&term.scale(&QC::new(ratio(p as i64, e as i64 + 1), Zero::zero())));
  }
  acc
}

/// `η_p = p ∫_0^1 μ(ω, Θ_t, …, Θ_t) dt` with `ω = ∇_1 - ∇_0`, integrated
/// exactly in `t`. Satisfies `dη_p = c_p(∇_1) - c_p(∇_0)`.
pub fn eta_p(c0: &SimpConnection, c1: &SimpConnection, p: usize) -> Result<PolyForm> {
  c0.check_pair(c1)?;
  if p == 0 || p > c0.n() {
    return Err(Error::InvalidArgument(format!("need 1 <= p <= n, got p={p}")));
  }
  Ok(PolyForm::from_fn(c0.sset().clone(), |m, idx| eta_cell(c0.omega.cell(m, idx), c1.omega.cell(m, idx), p)))
}

fn shift_vars(f: &DiffForm, m: usize, by: usize) -> DiffForm { f.pullback(&(0..m).map(|i| DiffForm::var(i + by)).collect::<Vec<_>>()) }

fn unshift_vars(f: &DiffForm, m: usize) -> DiffForm {
  let mut images = vec![DiffForm::default()];
  images.extend((0..m).map(DiffForm::var));
  f.pullback(&images)
}

/// Connection `ω_0 + sω` on `I × cell`, with `s` at variable 0 and the cell's
/// coordinates shifted up by one.
fn prism_connection(w0: &MatForm, w1: &MatForm, m: usize) -> (MatForm, MatForm, MatForm) {
  let w0s = w0.map(|f| shift_vars(f, m, 1));
  let ws = (w1 - w0).map(|f| shift_vars(f, m, 1));
  let s = SqMat::from_fn(w0.n(), |i, j| if i == j { DiffForm::var(0) } else { DiffForm::default() });
  let path = &w0s + &(&s * &ws);
  (path, ws, s)
}

/// `η_p` by the prism route: `B(C_p(Θ̄))` for the connection `d_s + ∇_s` on `I × M`.
pub fn eta_p_via_prism(c0: &SimpConnection, c1: &SimpConnection, p: usize) -> Result<PolyForm> {
  c0.check_pair(c1)?;
  if p == 0 || p > c0.n() {
    return Err(Error::InvalidArgument(format!("need 1 <= p <= n, got p={p}")));
  }
  Ok(PolyForm::from_fn(c0.sset().clone(), |m, idx| {
    let (path, _, _) = prism_connection(c0.omega.cell(m, idx), c1.omega.cell(m, idx), m);
    let theta = mat_curvature(&path);
    let cp = mixed_polarize(&vec![theta; p]);
    unshift_vars(&cp.fiber_integrate(0), m)
  }))
}

/// Outcome of checking `Θ̄ = Θ_s + ds∧ω` on the prism over every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingReport {
  pub cells:          usize,
  /// Number of nonzero monomials in all residual matrices; zero when the identity holds.
  pub residual_terms: usize,
  pub max_residual:   f64,
}

/// Verifies that the curvature of `d_s + ∇_s` on `I × cell` is `Θ_s + ds∧ω`,
/// where `Θ_s` is the curvature of `∇_s` in the cell directions only.
pub fn curvature_splitting_check(c0: &SimpConnection, c1: &SimpConnection) -> Result<SplittingReport> {
  c0.check_pair(c1)?;
  let mut report = SplittingReport { cells: 0, residual_terms: 0, max_residual: 0.0 };
  for m in 0..=c0.sset().dim() {
    for idx in 0..c0.sset().count(m) {
      let (path, ws, _) = prism_connection(c0.omega.cell(m, idx), c1.omega.cell(m, idx), m);
      let full = mat_curvature(&path);
      // Cell-direction derivative: drop the ds component of d.
      let d_cell = path.map(|f| {
        let df = f.d();
        df.sub_ref(&DiffForm::dvar(0).mul_ref(&df.fiber_integrate_raw0()))
      });
      let theta_s = &d_cell + &(&path * &path);
      let ds_w = ws.map(|f| DiffForm::dvar(0).mul_ref(f));
      let residual = &full - &(&theta_s + &ds_w);
      report.cells += 1;
      for e in residual.entries() {
        report.residual_terms += e.len();
        for (_, c) in e.terms() {
          report.max_residual = report.max_residual.max(crate::scalar::Field::to_c64(c).norm());
        }
      }
    }
  }
  Ok(report)
}

/// Differential-character representative `(α, y)` with `δy = ∫α` modulo `Z(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CSRep {
  pub p:        usize,
  pub top_form: PolyForm,
  pub cochain:  Cochain,
  /// Marks the top form as lying in `F^p`; required by [`db_image`].
  pub fp:       bool,
}

impl CSRep {
  /// The zero representative, which represents the class of a trivial connection.
  pub fn zero(sset: Arc<SSet>, p: usize) -> Self {
    let cochain = Cochain::zero(&sset, 2 * p - 1, CoeffLattice::Z(p));
    Self { p, top_form: PolyForm::zero(sset), cochain, fp: false }
  }

  /// Representative of a flat class given by a cocycle `y`.
  pub fn flat(sset: Arc<SSet>, p: usize, y: Cochain) -> Result<Self> {
    if y.degree != 2 * p - 1 {
      return Err(Error::InvalidArgument(format!("flat representative needs a {}-cochain", 2 * p - 1)));
    }
    let rep = Self { p, top_form: PolyForm::zero(sset), cochain: y.with_lattice(CoeffLattice::Z(p)), fp: false };
    rep.check()?;
    Ok(rep)
  }

  /// Representative for `∇` obtained from the zero representative of the trivial connection.
  pub fn from_connection(conn: &SimpConnection, p: usize) -> Result<Self> {
    let triv = SimpConnection::trivial(conn.sset().clone(), conn.n());
    connection_change(&Self::zero(conn.sset().clone(), p), &triv, conn)
  }

  pub fn with_fp(mut self, fp: bool) -> Self {
    self.fp = fp;
    self
  }

  /// `δy - ∫α` on the `2p`-cells; zero for a valid representative.
  pub fn defect(&self) -> Cochain {
    let sset = self.top_form.sset();
    let lhs = self.cochain.coboundary(sset);
    let rhs = self.top_form.integrate_to_cochain(2 * self.p).with_lattice(self.cochain.lattice);
    lhs.sub(&rhs).expect("same shape")
  }

  pub fn is_valid(&self) -> bool { self.defect().is_zero() }

  pub fn check(&self) -> Result<()> {
    if self.is_valid() { Ok(()) } else { Err(Error::NotACycle("δy differs from the integrated form".into())) }
  }

  /// The cone pair `(α, -y)`.
  pub fn cone_pair(&self) -> (PolyForm, Cochain) { (self.top_form.clone(), self.cochain.neg()) }

  pub fn to_json(&self) -> Value {
    let sset = self.top_form.sset();
    json!({
      "p": self.p,
      "lattice": CoeffLattice::Z(self.p).tag(),
      "form": self.top_form.to_json(),
      "cochain": self.cochain.to_json(sset),
    })
  }
}

/// `(c_p(∇_1), y + ∫η_p)` from a representative `(c_p(∇_0), y)`; in cone
/// notation the second component moves from `-y` to `-(y + ∫η_p)`.
pub fn connection_change(rep: &CSRep, c0: &SimpConnection, c1: &SimpConnection) -> Result<CSRep> {
  c0.check_pair(c1)?;
  if !Arc::ptr_eq(rep.top_form.sset(), c0.sset()) && **rep.top_form.sset() != **c0.sset() {
    return Err(Error::Incompatible("representative and connections live on different simplicial sets".into()));
  }
  if rep.top_form != chern_form(c0, rep.p)? {
    return Err(Error::Incompatible("representative's form is not c_p of the initial connection".into()));
  }
  let eta = eta_p(c0, c1, rep.p)?;
  let shift = eta.integrate_to_cochain(2 * rep.p - 1).with_lattice(rep.cochain.lattice);
  Ok(CSRep { p: rep.p, top_form: chern_form(c1, rep.p)?, cochain: rep.cochain.add(&shift)?, fp: rep.fp })
}

/// Checks `(α_0, -y_0) - (α_1, -y_1) = D(η, 0) = (-dη, ∫η)` exactly.
pub fn d_difference_holds(input: &CSRep, output: &CSRep, eta: &PolyForm) -> Result<bool> {
  let (a0, b0) = input.cone_pair();
  let (a1, b1) = output.cone_pair();
  let form_ok = a0.sub(&a1)?.add(&eta.d())?.is_zero();
  let ieta = eta.integrate_to_cochain(2 * input.p - 1).with_lattice(b0.lattice);
  let cochain_ok = b0.sub(&b1)?.sub(&ieta)?.is_zero();
  Ok(form_ok && cochain_ok)
}

/// Cone-complex representative `(α, β)` with `D(α, β) = (-dα, δβ + ∫α) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DBRep {
  pub p:       usize,
  pub form:    PolyForm,
  pub cochain: Cochain,
}

impl DBRep {
  /// Both components of `D(α, β)`.
  pub fn cone_differential(&self) -> (PolyForm, Cochain) {
    let sset = self.form.sset();
    let da = self.form.d().scale(&-QC::one());
    let db = self.cochain.coboundary(sset).add(&self.form.integrate_to_cochain(2 * self.p).with_lattice(self.cochain.lattice)).expect("same shape");
    (da, db)
  }

  pub fn is_cocycle(&self) -> bool {
    let (a, b) = self.cone_differential();
    a.is_zero() && b.is_zero()
  }

  pub fn to_json(&self) -> Value {
    json!({
      "p": self.p,
      "lattice": CoeffLattice::Z(self.p).tag(),
      "form": self.form.to_json(),
      "cochain": self.cochain.to_json(self.form.sset()),
    })
  }
}

/// Repackages a representative as the cone pair `(α, -y)` after checking the
/// `F^p` flag and the cone cocycle condition.
pub fn db_image(rep: &CSRep) -> Result<DBRep> {
  if !rep.fp {
    return Err(Error::InvalidArgument("top form is not flagged as lying in F^p".into()));
  }
  let (form, cochain) = rep.cone_pair();
  let out = DBRep { p: rep.p, form, cochain };
  if !out.is_cocycle() {
    return Err(Error::NotACycle("D(α, -y) is not zero".into()));
  }
  Ok(out)
}

/// `ω_U = Σ_j t_j π_j^*ω` on `Δ^m × (base cell)`: variables `0..m` are the
/// simplex coordinates `t_1..t_m`, the base cell's coordinates follow.
/// `tuple[j]` selects which connection of `family` is pulled back by `π_j`.
pub fn universal_connection_eval(family: &[SimpConnection], tuple: &[usize], dim: usize, cell: usize) -> Result<MatForm> {
  let first = family.first().ok_or_else(|| Error::InvalidArgument("empty connection family".into()))?;
  for c in family {
    first.check_pair(c)?;
  }
  if tuple.is_empty() {
    return Err(Error::InvalidArgument("tuple must have at least one entry".into()));
  }
  if let Some(&bad) = tuple.iter().find(|&&j| j >= family.len()) {
    return Err(Error::Incompatible(format!("label {bad} has no connection")));
  }
  if cell >= first.sset().count(dim) {
    return Err(Error::InvalidArgument(format!("no {dim}-cell with index {cell}")));
  }
  let m = tuple.len() - 1;
  let mut out = SqMat::zeros(first.n());
  for (j, &label) in tuple.iter().enumerate() {
    let w = family[label].omega.cell(dim, cell).map(|f| shift_vars(f, dim, m));
    let tj = crate::simforms::barycentric(m, j);
    let scaled = w.map(|f| tj.mul_ref(f));
    out = &out + &scaled;
  }
  Ok(out)
}

impl DiffForm {
  /// Coefficient form `α` in `φ = dt_0∧α + β`, without integrating.
  fn fiber_integrate_raw0(&self) -> DiffForm {
    DiffForm::from_terms(self.terms().filter(|((m, _), _)| m & 1 == 1).map(|((m, e), c)| ((m & !1, e.clone()), c.clone())))
  }
}

/// Face-map pullback applied entrywise.
pub fn mat_face_pullback(a: &MatForm, m: usize, i: usize) -> MatForm { a.map(|f| face_pullback(f, m, i)) }

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::qc_int;
  use rand::SeedableRng;
  use rand_chacha::ChaCha8Rng;

  fn sphere() -> Arc<SSet> { Arc::new(SSet::simplex_boundary(3)) }

  #[test]
  fn curvature_by_hand() {
    // ω = A t_1 dt_1 with A nilpotent: ω∧ω = 0 and dω = 0 in one variable.
    let a = |i, j| if (i, j) == (0, 1) { DiffForm::monomial(&[1], &[0], QC::one()) } else { DiffForm::default() };
    let w: MatForm = SqMat::from_fn(2, a);
    assert!(mat_curvature(&w).is_zero());
    // Two variables: ω = A t_2 dt_1 gives dω = -A dt_1∧dt_2 (dt_2∧dt_1 reordered).
    let w2: MatForm = SqMat::from_fn(2, |i, j| if (i, j) == (0, 1) { DiffForm::monomial(&[0, 1], &[0], QC::one()) } else { DiffForm::default() });
    let th = mat_curvature(&w2);
    assert_eq!(th[(0, 1)], DiffForm::monomial(&[], &[0, 1], qc_int(-1, 0)));
    assert!(th[(1, 0)].is_zero());
  }

  #[test]
  fn bianchi_and_closed_chern_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = Arc::new(SSet::simplex(4));
    let conn = SimpConnection::random(s.clone(), 2, &mut rng);
    assert!(conn.form().is_compatible());
    let theta = curvature(&conn);
    for m in 0..=4 {
      for idx in 0..s.count(m) {
        let w = conn.form().cell(m, idx);
        let t = theta.cell(m, idx);
        assert_eq!(mat_d(t), &(t * w) - &(w * t));
      }
    }
    for k in 1..=2 {
      let c = chern_form(&conn, k).unwrap();
      assert!(c.d().is_zero());
      for m in 0..=4 {
        for idx in 0..s.count(m) {
          assert_eq!(c.cell(m, idx), &crate::invpoly::chern_poly_minors(k, theta.cell(m, idx)));
        }
      }
    }
    let c1 = chern_form(&conn, 1).unwrap();
    let tr = PolyForm::from_fn(s.clone(), |m, idx| theta.cell(m, idx).trace());
    assert_eq!(c1, tr.scale(&qc_int(-1, 0)));
    assert!(chern_form(&SimpConnection::trivial(s, 2), 1).unwrap().is_zero());
  }

  #[test]
  fn eta_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = Arc::new(SSet::simplex(4));
    let c0 = SimpConnection::random(s.clone(), 2, &mut rng);
    let c1 = SimpConnection::random(s.clone(), 2, &mut rng);
    assert!(eta_p(&c0, &c0, 2).unwrap().is_zero());
    for p in 1..=2 {
      let eta = eta_p(&c0, &c1, p).unwrap();
      let diff = chern_form(&c1, p).unwrap().sub(&chern_form(&c0, p).unwrap()).unwrap();
      assert_eq!(eta.d(), diff, "p={p}");
      assert_eq!(eta, eta_p_via_prism(&c0, &c1, p).unwrap(), "p={p}");
    }
    let r = curvature_splitting_check(&c0, &c1).unwrap();
    assert_eq!(r.residual_terms, 0);
    assert_eq!(r.cells, s.num_cells());
  }

  #[test]
  fn abelian_eta() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let s = sphere();
    let c0 = SimpConnection::random(s.clone(), 1, &mut rng);
    let c1 = SimpConnection::random(s.clone(), 1, &mut rng);
    let eta = eta_p(&c0, &c1, 1).unwrap();
    let w = c1.form().entry(0, 0).sub(&c0.form().entry(0, 0)).unwrap();
    assert_eq!(eta, w.scale(&qc_int(-1, 0)));
    let r = curvature_splitting_check(&c0, &c1).unwrap();
    assert_eq!(r.residual_terms, 0);
  }

  #[test]
  fn representatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let s = sphere();
    let c0 = SimpConnection::random(s.clone(), 1, &mut rng);
    let c1 = SimpConnection::random(s.clone(), 1, &mut rng);
    let r0 = CSRep::from_connection(&c0, 1).unwrap();
    assert!(r0.is_valid());
    assert_eq!(connection_change(&r0, &c0, &c0).unwrap(), r0);
    let r1 = connection_change(&r0, &c0, &c1).unwrap();
    assert!(r1.is_valid());
    let eta = eta_p(&c0, &c1, 1).unwrap();
    assert!(d_difference_holds(&r0, &r1, &eta).unwrap());
    // Cone component shifts by -∫η_1.
    let shift = r1.cone_pair().1.sub(&r0.cone_pair().1).unwrap();
    assert_eq!(shift, eta.integrate_to_cochain(1).with_lattice(CoeffLattice::Z(1)).neg());
    assert!(connection_change(&r1, &c0, &c1).is_err());
    assert!(db_image(&r1).is_err());
    let db = db_image(&r1.clone().with_fp(true)).unwrap();
    assert!(db.is_cocycle());
    let z = db_image(&CSRep::zero(s.clone(), 1).with_fp(true)).unwrap();
    assert!(z.form.is_zero() && z.cochain.is_zero());
  }

  #[test]
  fn flat_representatives() {
    let s = sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let f = Cochain::random(&s, 0, &mut rng);
    let y = f.coboundary(&s);
    let rep = CSRep::flat(s.clone(), 1, y).unwrap();
    assert!(db_image(&rep.with_fp(true)).unwrap().is_cocycle());
    let mut bad = Cochain::zero(&s, 1, CoeffLattice::None);
    bad.values[0] = qc_int(1, 0);
    assert!(CSRep::flat(s, 1, bad).is_err());
  }

  #[test]
  fn change_commutes_with_restriction() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let big = Arc::new(SSet::simplex(3));
    let small = Arc::new(SSet::from_simplices(&[vec![0, 1, 3]]).unwrap());
    let c0 = SimpConnection::random(big.clone(), 1, &mut rng);
    let c1 = SimpConnection::random(big.clone(), 1, &mut rng);
    let r = connection_change(&CSRep::from_connection(&c0, 1).unwrap(), &c0, &c1).unwrap();
    let c0s = c0.restrict(small.clone()).unwrap();
    let c1s = c1.restrict(small.clone()).unwrap();
    let rs = connection_change(&CSRep::from_connection(&c0s, 1).unwrap(), &c0s, &c1s).unwrap();
    assert_eq!(r.top_form.restrict(small.clone()).unwrap(), rs.top_form);
    assert_eq!(r.cochain.restrict(&big, &small).unwrap(), rs.cochain);
  }

  #[test]
  fn universal_connection() {
    let s = Arc::new(SSet::simplex(1));
    let mk = |c: i64| {
      let om = MatPolyForm::from_fn(s.clone(), 1, |m, _| {
        SqMat::from_fn(1, |_, _| if m == 1 { DiffForm::monomial(&[], &[0], qc_int(c, 0)) } else { DiffForm::default() })
      });
      SimpConnection::new(om).unwrap()
    };
    let fam = [mk(2), mk(5)];
    let u0 = universal_connection_eval(&fam, &[1], 1, 0).unwrap();
    assert_eq!(u0, fam[1].form().cell(1, 0).clone());
    // m = 1: ω_U = (1-t)·2 ds + t·5 ds, so dω_U = 3 dt∧ds.
    let u1 = universal_connection_eval(&fam, &[0, 1], 1, 0).unwrap();
    let expect = DiffForm::monomial(&[], &[1], qc_int(2, 0)).add_ref(&DiffForm::monomial(&[1], &[1], qc_int(3, 0)));
    assert_eq!(u1[(0, 0)], expect);
    assert_eq!(u1[(0, 0)].d(), DiffForm::monomial(&[], &[0, 1], qc_int(3, 0)));
    let same = universal_connection_eval(&fam, &[0, 0, 0], 1, 0).unwrap();
    assert!(mat_curvature(&same).is_zero());
    assert!(universal_connection_eval(&fam, &[0, 2], 1, 0).is_err());
  }
}

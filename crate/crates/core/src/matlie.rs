//! Complex matrices, the Cartan decomposition `gl_n(C) = u_n ⊕ herm_n`, and the
//! positive-definite model of `GL_n(C)/U(n)`.
//!
//! Matrix functions of Hermitian arguments go through a unitary
//! eigendecomposition. Two models of the symmetric space appear in this crate:
//! the polar model `gK ↦ (g g*)^{1/2}` used by [`to_base_point`], and the
//! congruence model `gK ↦ g g*` on which [`geodesic`] is equivariant. See
//! `SIGN-LEDGER.md` for how the regulator combines them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;

pub fn c64(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

pub fn identity(n: usize) -> CMat { CMat::identity(n, n) }

pub fn diag(values: &[Complex64]) -> CMat { CMat::from_diagonal(&nalgebra::DVector::from_column_slice(values)) }

pub fn real_diag(values: &[f64]) -> CMat { diag(&values.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>()) }

pub fn from_rows(rows: &[&[Complex64]]) -> CMat {
  let n = rows.len();
  CMat::from_fn(n, n, |i, j| rows[i][j])
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 { m.iter().fold(0.0, |acc, z| acc.max(z.norm())) }

pub fn is_hermitian(m: &CMat, tol: f64) -> bool { m.is_square() && max_abs(&(m - m.adjoint())) <= tol }

pub fn hermitian_part(m: &CMat) -> CMat { (m + m.adjoint()).unscale(2.0) }

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
  let eig = SymmetricEigen::new(hermitian_part(h));
  let fl: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| c64(f(l), 0.0)).collect();
  let u = &eig.eigenvectors;
  u * diag(&fl) * u.adjoint()
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn herm_eigenvalues(h: &CMat) -> Vec<f64> {
  let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(h)).eigenvalues.iter().copied().collect();
  v.sort_by(|a, b| a.total_cmp(b));
  v
}

/// Fréchet derivative of `H ↦ f(H)` at Hermitian `h` in the Hermitian
/// direction `e`, via divided differences of `f` on the spectrum.
pub fn herm_fn_derivative(h: &CMat, e: &CMat, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> CMat {
  let eig = SymmetricEigen::new(hermitian_part(h));
  let u = &eig.eigenvectors;
  let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
  let n = lam.len();
  let mut w = u.adjoint() * e * u;
  for i in 0..n {
    for j in 0..n {
      let (a, b) = (lam[i], lam[j]);
      let scale = a.abs().max(b.abs()).max(1.0);
      let g = if (a - b).abs() <= 1e-5 * scale { df(0.5 * (a + b)) } else { (f(a) - f(b)) / (a - b) };
      w[(i, j)] *= g;
    }
  }
  u * w * u.adjoint()
}

/// A Hermitian positive-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSpacePoint(CMat);

impl SymSpacePoint {
  pub fn new(y: CMat) -> Result<Self> { Self::with_tol(y, DEFAULT_HERMITIAN_TOL) }

  pub fn with_tol(y: CMat, tol: f64) -> Result<Self> {
    if !is_hermitian(&y, tol * max_abs(&y).max(1.0)) {
      return Err(Error::Domain("matrix is not Hermitian".into()));
    }
    let y = hermitian_part(&y);
    let min = herm_eigenvalues(&y).first().copied().unwrap_or(1.0);
    if !(min > 0.0) {
      return Err(Error::Domain(format!("matrix is not positive definite (smallest eigenvalue {min:e})")));
    }
    Ok(Self(y))
  }

  pub fn identity(n: usize) -> Self { Self(identity(n)) }

  pub fn matrix(&self) -> &CMat { &self.0 }

  pub fn into_matrix(self) -> CMat { self.0 }

  pub fn n(&self) -> usize { self.0.nrows() }

  pub fn sqrt(&self) -> CMat { herm_fn(&self.0, f64::sqrt) }

  pub fn inv_sqrt(&self) -> CMat { herm_fn(&self.0, |l| 1.0 / l.sqrt()) }

  pub fn powf(&self, t: f64) -> CMat { herm_fn(&self.0, |l| l.powf(t)) }
}

/// `X = k + p` with `k` skew-Hermitian and `p` Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanVector {
  pub k_part: CMat,
  pub p_part: CMat,
}

impl CartanVector {
  pub fn reconstruct(&self) -> CMat { &self.k_part + &self.p_part }
}

pub fn cartan_split(x: &CMat) -> CartanVector {
  let xs = x.adjoint();
  CartanVector { k_part: (x - &xs).unscale(2.0), p_part: (x + &xs).unscale(2.0) }
}

pub fn pd_exp(h: &CMat) -> Result<SymSpacePoint> { pd_exp_with_tol(h, DEFAULT_HERMITIAN_TOL) }

pub fn pd_exp_with_tol(h: &CMat, tol: f64) -> Result<SymSpacePoint> {
  if !is_hermitian(h, tol * max_abs(h).max(1.0)) {
    return Err(Error::Domain("pd_exp needs a Hermitian argument".into()));
  }
  Ok(SymSpacePoint(hermitian_part(&herm_fn(h, f64::exp))))
}

pub fn pd_log(y: &SymSpacePoint) -> CMat { hermitian_part(&herm_fn(&y.0, f64::ln)) }

/// Checked logarithm of a raw matrix.
pub fn pd_log_checked(y: &CMat) -> Result<CMat> { Ok(pd_log(&SymSpacePoint::new(y.clone())?)) }

/// `A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`, with exact endpoints.
pub fn geodesic(a: &SymSpacePoint, b: &SymSpacePoint, t: f64) -> SymSpacePoint {
  if t == 0.0 {
    return a.clone();
  }
  if t == 1.0 {
    return b.clone();
  }
  let ah = a.sqrt();
  let aih = a.inv_sqrt();
  let inner = &aih * b.matrix() * &aih;
  let pt = herm_fn(&inner, |l| l.powf(t));
  SymSpacePoint(hermitian_part(&(&ah * pt * &ah)))
}

pub fn inverse(g: &CMat) -> Result<CMat> {
  let scale = max_abs(g).max(f64::MIN_POSITIVE);
  let inv = g.clone().try_inverse().ok_or_else(|| Error::Domain("matrix is singular".into()))?;
  if !inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || max_abs(&inv) * scale > 1e14 {
    return Err(Error::Domain("matrix is singular to working precision".into()));
  }
  Ok(inv)
}

pub fn check_invertible(g: &CMat) -> Result<()> { inverse(g).map(|_| ()) }

/// Polar representative `(g g*)^{1/2}` of the coset `gK`.
pub fn to_base_point(g: &CMat) -> Result<SymSpacePoint> {
  check_invertible(g)?;
  let z = SymSpacePoint::new(hermitian_part(&(g * g.adjoint())))?;
  Ok(SymSpacePoint(hermitian_part(&z.sqrt())))
}

/// Congruence representative `g g*` of the coset `gK`.
pub fn to_congruence_point(g: &CMat) -> Result<SymSpacePoint> {
  check_invertible(g)?;
  SymSpacePoint::new(hermitian_part(&(g * g.adjoint())))
}

/// Action of `g` on the polar model: `Y ↦ (g Y² g*)^{1/2}`.
pub fn act_polar(g: &CMat, y: &SymSpacePoint) -> Result<SymSpacePoint> {
  let y2 = y.matrix() * y.matrix();
  let z = SymSpacePoint::new(hermitian_part(&(g * y2 * g.adjoint())))?;
  Ok(SymSpacePoint(hermitian_part(&z.sqrt())))
}

/// Left trivialization of a tangent vector of the positive-definite cone.
pub fn tangent_to_p(y: &SymSpacePoint, v: &CMat) -> CMat {
  let yi = y.inv_sqrt();
  hermitian_part(&(&yi * v * &yi))
}

/// Row-major JSON matrix encoding `{"n": .., "entries": [[[re, im], ..], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
  pub n:       usize,
  pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&CMat> for MatrixJson {
  fn from(m: &CMat) -> Self {
    let n = m.nrows();
    MatrixJson { n, entries: (0..n).map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect() }
  }
}

impl TryFrom<&MatrixJson> for CMat {
  type Error = Error;

  fn try_from(j: &MatrixJson) -> Result<CMat> {
    if j.n == 0 || j.entries.len() != j.n || j.entries.iter().any(|r| r.len() != j.n) {
      return Err(Error::Format(format!("matrix entries do not form a {0}x{0} array", j.n)));
    }
    let m = CMat::from_fn(j.n, j.n, |r, c| c64(j.entries[r][c][0], j.entries[r][c][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
      return Err(Error::Format("non-finite matrix entry".into()));
    }
    Ok(m)
  }
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
  CMat::from_fn(n, n, |_, _| c64(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat { hermitian_part(&random_matrix(rng, n, scale)) }

/// A well-conditioned random invertible matrix: identity plus a small perturbation,
/// times a random positive scalar phase.
pub fn random_gl<R: Rng>(rng: &mut R, n: usize) -> CMat {
  loop {
    let m = identity(n) + random_matrix(rng, n, 0.6);
    let det = m.determinant().norm();
    if det > 0.2 {
      return m;
    }
  }
}

/// Random unitary matrix `exp(iH)`.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
  let h = random_hermitian(rng, n, 2.0);
  let eig = SymmetricEigen::new(h);
  let phases: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
  &eig.eigenvectors * diag(&phases) * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
  use super::*;
  use rand::SeedableRng;
  use rand_chacha::ChaCha8Rng;

  #[test]
  fn cartan_split_hand_example() {
    let x = from_rows(&[&[c64(0.0, 1.0), c64(1.0, 0.0)], &[c64(0.0, 0.0), c64(0.0, 0.0)]]);
    let cv = cartan_split(&x);
    let k = from_rows(&[&[c64(0.0, 1.0), c64(0.5, 0.0)], &[c64(-0.5, 0.0), c64(0.0, 0.0)]]);
    let p = from_rows(&[&[c64(0.0, 0.0), c64(0.5, 0.0)], &[c64(0.5, 0.0), c64(0.0, 0.0)]]);
    assert_eq!(cv.k_part, k);
    assert_eq!(cv.p_part, p);
    assert_eq!(cv.reconstruct(), x);
  }

  #[test]
  fn exp_log_basics() {
    assert!(max_abs(&(pd_exp(&CMat::zeros(3, 3)).unwrap().into_matrix() - identity(3))) < 1e-15);
    let e = std::f64::consts::E;
    let y = SymSpacePoint::new(real_diag(&[e, e * e])).unwrap();
    assert!(max_abs(&(pd_log(&y) - real_diag(&[1.0, 2.0]))) < 1e-14);
    assert!(pd_exp(&from_rows(&[&[c64(0.0, 0.0), c64(1.0, 0.0)], &[c64(0.0, 0.0), c64(0.0, 0.0)]])).is_err());
    assert!(SymSpacePoint::new(real_diag(&[1.0, -1.0])).is_err());
  }

  #[test]
  fn exp_log_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
      let n = rng.gen_range(1..=4);
      let mut h = random_hermitian(&mut rng, n, 1.0);
      let norm = h.norm();
      if norm > 2.0 {
        h *= c64(2.0 / norm, 0.0);
      }
      let back = pd_log(&pd_exp(&h).unwrap());
      assert!(max_abs(&(back - &h)) < 1e-12);
    }
  }

  #[test]
  fn geodesic_examples() {
    let i2 = SymSpacePoint::identity(2);
    let b = SymSpacePoint::new(real_diag(&[4.0, 4.0])).unwrap();
    assert_eq!(geodesic(&i2, &b, 0.0), i2);
    assert_eq!(geodesic(&i2, &b, 1.0), b);
    let mid = geodesic(&i2, &b, 0.5);
    assert!(max_abs(&(mid.into_matrix() - real_diag(&[2.0, 2.0]))) < 1e-14);
  }

  #[test]
  fn geodesic_congruence_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
      let a = pd_exp(&random_hermitian(&mut rng, 2, 1.0)).unwrap();
      let b = pd_exp(&random_hermitian(&mut rng, 2, 1.0)).unwrap();
      let g = random_gl(&mut rng, 2);
      let t: f64 = rng.gen_range(0.0..1.0);
      let ga = SymSpacePoint::new(&g * a.matrix() * g.adjoint()).unwrap();
      let gb = SymSpacePoint::new(&g * b.matrix() * g.adjoint()).unwrap();
      let lhs = geodesic(&ga, &gb, t).into_matrix();
      let rhs = &g * geodesic(&a, &b, t).matrix() * g.adjoint();
      assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }
  }

  #[test]
  fn base_point_of_unitary_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(to_base_point(&identity(2)).unwrap().into_matrix(), identity(2));
    for _ in 0..10 {
      let u = random_unitary(&mut rng, 3);
      assert!(max_abs(&(to_base_point(&u).unwrap().into_matrix() - identity(3))) < 1e-12);
    }
    assert!(to_base_point(&CMat::zeros(2, 2)).is_err());
  }

  #[test]
  fn base_point_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
      let g = random_gl(&mut rng, 2);
      let h = random_gl(&mut rng, 2);
      let lhs = to_base_point(&(&g * &h)).unwrap();
      let rhs = act_polar(&g, &to_base_point(&h).unwrap()).unwrap();
      assert!(max_abs(&(lhs.into_matrix() - rhs.into_matrix())) < 1e-9);
    }
  }

  #[test]
  fn tangent_at_identity_is_identity_map() {
    let v = random_hermitian(&mut ChaCha8Rng::seed_from_u64(1), 3, 1.0);
    assert!(max_abs(&(tangent_to_p(&SymSpacePoint::identity(3), &v) - &v)) < 1e-15);
  }

  #[test]
  fn frechet_derivative_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = pd_exp(&random_hermitian(&mut rng, 3, 1.0)).unwrap().into_matrix();
    let e = random_hermitian(&mut rng, 3, 1.0);
    let t = 0.37;
    let analytic = herm_fn_derivative(&a, &e, |l| l.powf(t), |l| t * l.powf(t - 1.0));
    let h = 1e-6;
    let fd = (herm_fn(&(&a + &e * c64(h, 0.0)), |l| l.powf(t)) - herm_fn(&(&a - &e * c64(h, 0.0)), |l| l.powf(t)))
      / c64(2.0 * h, 0.0);
    assert!(max_abs(&(analytic - fd)) < 1e-8);
  }

  #[test]
  fn json_round_trip() {
    let m = random_matrix(&mut ChaCha8Rng::seed_from_u64(2), 2, 1.0);
    let j = MatrixJson::from(&m);
    let s = serde_json::to_string(&j).unwrap();
    let back = CMat::try_from(&serde_json::from_str::<MatrixJson>(&s).unwrap()).unwrap();
    assert_eq!(back, m);
  }
}

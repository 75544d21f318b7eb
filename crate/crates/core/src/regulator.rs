//! Geodesic simplices in `GL_n(C)/U(n)` and the cocycles obtained by
//! integrating the transgression form `T_p` over them.
//!
//! Points are handled in the congruence model `Z = g g*`, on which
//! [`geodesic`] is `GL_n(C)`-equivariant. A tangent vector `V` at `Z` is
//! identified with `X = ½ Z^{-1/2} V Z^{-1/2} ∈ herm_n`, the generator of
//! the one-parameter group `exp(sX)` moving the base point. With these
//! choices the degree-one value on `(1, g)` is `log|g|`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlie::{
  c64, geodesic, herm_fn, herm_fn_derivative, hermitian_part, max_abs, to_congruence_point, CMat, SymSpacePoint,
};
use crate::quadrature::tensor_nodes;
use crate::scalar::QC;
use crate::weil::{herm_coords_f64, transgress_gl, LieData, TransgressionForm, WeilAlgebra, WeilElement};

/// Quadrature settings for geodesic-simplex integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
  /// Gauss points per cube axis.
  pub order:                usize,
  /// Central finite-difference step for tangent vectors.
  pub diff_step:            f64,
  pub max_m:                usize,
  /// Use closed-form derivatives of the geodesic instead of finite differences.
  pub analytic_derivatives: bool,
}

impl Default for QuadratureConfig {
  fn default() -> Self { Self { order: 16, diff_step: 1e-6, max_m: 4, analytic_derivatives: false } }
}

impl QuadratureConfig {
  pub fn with_order(order: usize) -> Self { Self { order, ..Self::default() } }

  pub fn validate(&self) -> Result<()> {
    if self.order < 2 {
      return Err(Error::InvalidArgument("quadrature order must be at least 2".into()));
    }
    if !(self.diff_step > 0.0) {
      return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    Ok(())
  }
}

/// Ordered vertices `(g_0, …, g_m)` of a geodesic simplex; the base point is
/// the identity coset.
#[derive(Clone, Debug)]
pub struct GeodesicSimplexSpec {
  pub n:        usize,
  pub vertices: Vec<CMat>,
  points:       Vec<SymSpacePoint>,
}

impl GeodesicSimplexSpec {
  pub fn new(vertices: Vec<CMat>) -> Result<Self> {
    let n = vertices.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidArgument("simplex needs a vertex".into()))?;
    if vertices.iter().any(|g| g.nrows() != n || g.ncols() != n) {
      return Err(Error::InvalidArgument("vertices must all be n x n".into()));
    }
    let points = vertices.iter().map(to_congruence_point).collect::<Result<Vec<_>>>()?;
    Ok(Self { n, vertices, points })
  }

  pub fn dim(&self) -> usize { self.vertices.len() - 1 }

  /// Translate every vertex by `g` on the left.
  pub fn translate(&self, g: &CMat) -> Result<Self> { Self::new(self.vertices.iter().map(|v| g * v).collect()) }

  /// Simplex spanned by all vertices except the `i`-th.
  pub fn face(&self, i: usize) -> Result<Self> {
    let mut v = self.vertices.clone();
    v.remove(i);
    Self::new(v)
  }
}

/// Congruence-model cone point `Δ(Z_0..Z_m)(t, u) = geo(Z_0, Δ(Z_1..Z_m)(u), t)`.
fn cone_point(points: &[SymSpacePoint], coords: &[f64]) -> SymSpacePoint {
  if points.len() == 1 {
    return points[0].clone();
  }
  let inner = cone_point(&points[1..], &coords[1..]);
  geodesic(&points[0], &inner, coords[0])
}

/// Cone point together with its partial derivatives, by forward-mode
/// differentiation of the closed-form geodesic.
fn cone_point_with_tangents(points: &[SymSpacePoint], coords: &[f64]) -> (CMat, Vec<CMat>) {
  if points.len() == 1 {
    return (points[0].matrix().clone(), vec![]);
  }
  let (b, db) = cone_point_with_tangents(&points[1..], &coords[1..]);
  let t = coords[0];
  let a = &points[0];
  let ah = a.sqrt();
  let aih = a.inv_sqrt();
  let m = hermitian_part(&(&aih * &b * &aih));
  let z = hermitian_part(&(&ah * herm_fn(&m, |l| l.powf(t)) * &ah));
  let mut tangents = Vec::with_capacity(coords.len());
  tangents.push(hermitian_part(&(&ah * herm_fn(&m, |l| l.powf(t) * l.ln()) * &ah)));
  for dbj in db {
    let e = hermitian_part(&(&aih * dbj * &aih));
    let d = herm_fn_derivative(&m, &e, |l| l.powf(t), |l| t * l.powf(t - 1.0));
    tangents.push(hermitian_part(&(&ah * d * &ah)));
  }
  (z, tangents)
}

fn check_dim(spec: &GeodesicSimplexSpec, cfg: &QuadratureConfig) -> Result<()> {
  if spec.dim() > cfg.max_m {
    return Err(Error::InvalidArgument(format!("simplex dimension {} exceeds max_m = {}", spec.dim(), cfg.max_m)));
  }
  Ok(())
}

/// Point of `Δ_e(g_0..g_m)` at cone coordinates `(t, u_1..u_{m-1})`, returned
/// as the polar representative `(g g*)^{1/2}`.
pub fn geodesic_simplex_point(spec: &GeodesicSimplexSpec, coords: &[f64], cfg: &QuadratureConfig) -> Result<SymSpacePoint> {
  check_dim(spec, cfg)?;
  if coords.len() != spec.dim() {
    return Err(Error::InvalidArgument(format!("expected {} cone coordinates, got {}", spec.dim(), coords.len())));
  }
  let z = cone_point(&spec.points, coords);
  SymSpacePoint::new(hermitian_part(&z.sqrt()))
}

/// `herm_n` coordinates of the pushed-forward coordinate vectors at a node.
fn node_vectors(spec: &GeodesicSimplexSpec, x: &[f64], cfg: &QuadratureConfig) -> Vec<Vec<f64>> {
  let (z, tangents) = if cfg.analytic_derivatives {
    cone_point_with_tangents(&spec.points, x)
  } else {
    let z = cone_point(&spec.points, x).into_matrix();
    let h = cfg.diff_step;
    let tangents = (0..x.len())
      .map(|j| {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let zp = cone_point(&spec.points, &plus).into_matrix();
        let zm = cone_point(&spec.points, &minus).into_matrix();
        (zp - zm).unscale(2.0 * h)
      })
      .collect();
    (z, tangents)
  };
  let zih = herm_fn(&z, |l| 1.0 / l.sqrt());
  tangents.iter().map(|v| herm_coords_f64(&hermitian_part(&(&zih * v * &zih)).scale(0.5))).collect()
}

/// `∫_{Δ_e(g_0..g_m)} ω` for an invariant `m`-form on `herm_n`, by tensor
/// Gauss–Legendre quadrature over the cone cube.
pub fn integrate_invariant_form(form: &TransgressionForm, spec: &GeodesicSimplexSpec, cfg: &QuadratureConfig) -> Result<Complex64> {
  cfg.validate()?;
  check_dim(spec, cfg)?;
  if form.n != spec.n {
    return Err(Error::InvalidArgument(format!("form lives on gl_{} but simplex on gl_{}", form.n, spec.n)));
  }
  let m = spec.dim();
  if form.is_zero() {
    return Ok(Complex64::new(0.0, 0.0));
  }
  if form.degree() != m {
    return Err(Error::InvalidArgument(format!("form degree {} differs from simplex dimension {m}", form.degree())));
  }
  if m == 0 {
    return Ok(form.evaluate_f64_coords(&[]));
  }
  let nodes = tensor_nodes(m, cfg.order);
  let values: Vec<Complex64> =
    nodes.par_iter().map(|(x, w)| form.evaluate_f64_coords(&node_vectors(spec, x, cfg)) * *w).collect();
  Ok(values.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b))
}

/// A cocycle value in `C` together with its class modulo `R(p) = i^p R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegulatorValue {
  pub raw:     Complex64,
  pub p:       usize,
  /// Coordinate along `i^{p-1}`: `raw = a·i^p + reduced·i^{p-1}`.
  pub reduced: f64,
}

/// `i^k` for small `k`.
pub fn i_pow(k: usize) -> Complex64 {
  match k % 4 {
    0 => c64(1.0, 0.0),
    1 => c64(0.0, 1.0),
    2 => c64(-1.0, 0.0),
    _ => c64(0.0, -1.0),
  }
}

/// Class of `z` in `C/R(p)`, as the real coefficient of `i^{p-1}`.
pub fn reduce_mod_rp(z: Complex64, p: usize) -> f64 { (z * i_pow(p + 3).conj()).re }

impl RegulatorValue {
  pub fn new(raw: Complex64, p: usize) -> Self { Self { raw, p, reduced: reduce_mod_rp(raw, p) } }

  /// Component of `raw` along `R(p)`.
  pub fn lattice_part(&self) -> f64 { (self.raw * i_pow(4 - self.p % 4)).re }

  pub fn scale(&self, s: f64) -> Self { Self::new(self.raw * s, self.p) }
}

fn form_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<TransgressionForm>>> {
  static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TransgressionForm>>>> = OnceLock::new();
  CACHE.get_or_init(Default::default)
}

/// The θ-only part of `T_p` for `(gl_n, u_n)`, computed once per `(n, p)`.
pub fn transgression_form(n: usize, p: usize) -> Result<Arc<TransgressionForm>> {
  if let Some(f) = form_cache().lock().unwrap().get(&(n, p)) {
    return Ok(f.clone());
  }
  let f = Arc::new(transgress_gl(n, p)?.form);
  form_cache().lock().unwrap().insert((n, p), f.clone());
  Ok(f)
}

fn check_tuple(n: usize, p: usize, tuple: &[CMat]) -> Result<()> {
  if p == 0 || p > n {
    return Err(Error::InvalidArgument(format!("need 1 <= p <= n, got n={n}, p={p}")));
  }
  if tuple.len() != 2 * p {
    return Err(Error::InvalidArgument(format!("degree {p} cocycle takes {} matrices, got {}", 2 * p, tuple.len())));
  }
  if tuple.iter().any(|g| g.nrows() != n || g.ncols() != n) {
    return Err(Error::InvalidArgument(format!("tuple entries must be {n}x{n}")));
  }
  Ok(())
}

/// `-(∫_{Δ_e(tuple)} T)` for a given invariant form `T`.
pub fn cs_cocycle_with_form(form: &TransgressionForm, tuple: &[CMat], cfg: &QuadratureConfig) -> Result<RegulatorValue> {
  check_tuple(form.n, form.p, tuple)?;
  let spec = GeodesicSimplexSpec::new(tuple.to_vec())?;
  Ok(RegulatorValue::new(-integrate_invariant_form(form, &spec, cfg)?, form.p))
}

/// The Cheeger–Simons cocycle on a homogeneous `2p`-tuple.
pub fn cs_cocycle(n: usize, p: usize, tuple: &[CMat], cfg: &QuadratureConfig) -> Result<RegulatorValue> {
  check_tuple(n, p, tuple)?;
  let form = transgression_form(n, p)?;
  cs_cocycle_with_form(&form, tuple, cfg)
}

/// The Borel cocycle, `-2∫T_p`, i.e. twice [`cs_cocycle`].
pub fn borel_cocycle(n: usize, p: usize, tuple: &[CMat], cfg: &QuadratureConfig) -> Result<RegulatorValue> {
  Ok(cs_cocycle(n, p, tuple, cfg)?.scale(2.0))
}

/// Value and error estimate `|I(order) - I(order/2)|`.
pub fn cs_cocycle_with_estimate(n: usize, p: usize, tuple: &[CMat], cfg: &QuadratureConfig) -> Result<(RegulatorValue, f64)> {
  let fine = cs_cocycle(n, p, tuple, cfg)?;
  let coarse_cfg = QuadratureConfig { order: (cfg.order / 2).max(1), ..cfg.clone() };
  let coarse = cs_cocycle(n, p, tuple, &coarse_cfg)?;
  Ok((fine, (fine.raw - coarse.raw).norm()))
}

/// `(δf)(g_0..g_{m+1}) = Σ (-1)^i f(g_0..ĝ_i..g_{m+1})` for the cochain
/// `f = ∫_{Δ_e} ω`.
pub fn coboundary_of_integral(form: &TransgressionForm, tuple: &[CMat], cfg: &QuadratureConfig) -> Result<Complex64> {
  let spec = GeodesicSimplexSpec::new(tuple.to_vec())?;
  let mut acc = Complex64::new(0.0, 0.0);
  for i in 0..tuple.len() {
    let v = integrate_invariant_form(form, &spec.face(i)?, cfg)?;
    acc += if i % 2 == 0 { v } else { -v };
  }
  Ok(acc)
}

/// Max over tuples of `|δf_ω - f_{dω}|`, where `dω` is the relative Lie
/// algebra differential of `ω ∈ ∧^m herm_n*`.
pub fn vanest_chainmap_check(form: &TransgressionForm, tuples: &[Vec<CMat>], cfg: &QuadratureConfig) -> Result<f64> {
  let m = form.degree();
  if m + 1 > cfg.max_m {
    return Err(Error::InvalidArgument(format!("form degree {m} needs simplices above max_m = {}", cfg.max_m)));
  }
  let weil = WeilAlgebra::new(LieData::gl(form.n));
  for &xi in &weil.lie.k_indices {
    if !weil.coadjoint(&form.form, xi)?.is_zero() {
      return Err(Error::InvalidArgument("form is not invariant under u_n".into()));
    }
  }
  let d_form = weil.d(&form.form).theta_only();
  if d_form.terms().any(|(mono, _)| mono.theta.iter().any(|&a| weil.lie.is_k(a as usize))) {
    return Err(Error::InvalidArgument("differential leaves the horizontal subcomplex".into()));
  }
  let d_form = TransgressionForm::new(form.n, form.p, d_form)?;
  let mut worst: f64 = 0.0;
  for tuple in tuples {
    if tuple.len() != m + 2 {
      return Err(Error::InvalidArgument(format!("chain-map check on {m}-forms takes {} matrices", m + 2)));
    }
    let lhs = coboundary_of_integral(form, tuple, cfg)?;
    let rhs = if d_form.is_zero() {
      Complex64::new(0.0, 0.0)
    } else {
      integrate_invariant_form(&d_form, &GeodesicSimplexSpec::new(tuple.clone())?, cfg)?
    };
    worst = worst.max((lhs - rhs).norm());
  }
  Ok(worst)
}

/// Invariant forms on `herm_n` of the given degree (basis of `(∧^m herm_n*)^{U(n)}`).
pub fn invariant_forms(n: usize, m: usize) -> Vec<TransgressionForm> {
  let weil = WeilAlgebra::new(LieData::gl(n));
  weil
    .basic_basis(m)
    .into_iter()
    .map(|b| b.theta_only())
    .filter(|b| !b.is_zero())
    .map(|b| TransgressionForm::new(n, m.div_ceil(2).max(1), b).unwrap())
    .collect()
}

/// `T_p` shifted by the θ-only part of a closed basic element with the given
/// coefficients; the shift lies in the space of alternative solutions.
pub fn shifted_transgression(n: usize, p: usize, coeffs: &[QC]) -> Result<TransgressionForm> {
  let r = transgress_gl(n, p)?;
  let mut shifted: WeilElement = r.t.clone();
  for (e, c) in r.alternates.iter().zip(coeffs) {
    shifted = shifted.add(&e.scale(c));
  }
  TransgressionForm::new(n, p, shifted.theta_only())
}

/// Integer combination of inhomogeneous bar cells `[h_1|…|h_m]`, each `h_j`
/// a word in the generators.
#[derive(Clone, Debug)]
pub struct BarCycle {
  pub generators: Vec<CMat>,
  /// `(coefficient, words)`; a word lists generator indices, multiplied left to right.
  pub terms:      Vec<(i64, Vec<Vec<usize>>)>,
}

/// Matrices compared entrywise up to this tolerance when identifying bar cells.
const CELL_TOL: f64 = 1e-9;

impl BarCycle {
  pub fn new(generators: Vec<CMat>, terms: Vec<(i64, Vec<Vec<usize>>)>) -> Result<Self> {
    let n = generators.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
    for g in &generators {
      if g.nrows() != n || g.ncols() != n {
        return Err(Error::InvalidArgument("generators must share one size".into()));
      }
      crate::matlie::check_invertible(g)?;
    }
    for (_, words) in &terms {
      if words.iter().flatten().any(|&i| i >= generators.len()) {
        return Err(Error::InvalidArgument("word refers to a missing generator".into()));
      }
    }
    Ok(Self { generators, terms })
  }

  pub fn n(&self) -> usize { self.generators[0].nrows() }

  pub fn word(&self, w: &[usize]) -> CMat {
    w.iter().fold(CMat::identity(self.n(), self.n()), |acc, &i| acc * &self.generators[i])
  }

  fn cells(&self) -> Vec<(i64, Vec<CMat>)> {
    self.terms.iter().map(|(c, words)| (*c, words.iter().map(|w| self.word(w)).collect())).collect()
  }

  /// Bar boundary, merging numerically equal cells; returns cells with
  /// nonzero coefficient.
  pub fn boundary(&self) -> Vec<(i64, Vec<CMat>)> {
    let mut acc: Vec<(i64, Vec<CMat>)> = Vec::new();
    let mut push = |c: i64, cell: Vec<CMat>| {
      if let Some(e) =
        acc.iter_mut().find(|(_, other)| other.len() == cell.len() && other.iter().zip(&cell).all(|(a, b)| max_abs(&(a - b)) < CELL_TOL))
      {
        e.0 += c;
      } else {
        acc.push((c, cell));
      }
    };
    for (c, hs) in self.cells() {
      let m = hs.len();
      if m == 0 {
        continue;
      }
      push(c, hs[1..].to_vec());
      for i in 1..m {
        let mut merged = hs[..i - 1].to_vec();
        merged.push(&hs[i - 1] * &hs[i]);
        merged.extend_from_slice(&hs[i + 1..]);
        push(if i % 2 == 0 { c } else { -c }, merged);
      }
      push(if m % 2 == 0 { c } else { -c }, hs[..m - 1].to_vec());
    }
    acc.into_iter().filter(|(c, _)| *c != 0).collect()
  }
}

/// Homogeneous tuple `(e, h_1, h_1h_2, …)` of an inhomogeneous cell.
pub fn homogeneous_tuple(hs: &[CMat]) -> Vec<CMat> {
  let n = hs.first().map(|h| h.nrows()).unwrap_or(1);
  let mut out = vec![CMat::identity(n, n)];
  for h in hs {
    let next = out.last().unwrap() * h;
    out.push(next);
  }
  out
}

/// Pairing of the Cheeger–Simons cocycle with a bar cycle of degree `2p - 1`.
pub fn evaluate_on_cycle(cycle: &BarCycle, p: usize, cfg: &QuadratureConfig) -> Result<RegulatorValue> {
  let bad = cycle.boundary();
  if !bad.is_empty() {
    let listed: Vec<String> = bad.iter().map(|(c, cell)| format!("{c}·[{} entries]", cell.len())).collect();
    return Err(Error::NotACycle(listed.join(", ")));
  }
  let n = cycle.n();
  let mut total = Complex64::new(0.0, 0.0);
  for (c, hs) in cycle.cells() {
    if hs.len() != 2 * p - 1 {
      return Err(Error::InvalidArgument(format!("cells must have length {}", 2 * p - 1)));
    }
    total += cs_cocycle(n, p, &homogeneous_tuple(&hs), cfg)?.raw * c as f64;
  }
  Ok(RegulatorValue::new(total, p))
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::matlie::{identity, random_gl, random_unitary, real_diag};
  use rand::{Rng, SeedableRng};
  use rand_chacha::ChaCha8Rng;

  fn scalar(z: Complex64) -> CMat { CMat::from_element(1, 1, z) }

  #[test]
  fn simplex_points() {
    let cfg = QuadratureConfig::default();
    let g0 = real_diag(&[1.5, 0.5]);
    let spec0 = GeodesicSimplexSpec::new(vec![g0.clone()]).unwrap();
    let p0 = geodesic_simplex_point(&spec0, &[], &cfg).unwrap();
    assert!(max_abs(&(p0.into_matrix() - crate::matlie::to_base_point(&g0).unwrap().into_matrix())) < 1e-12);
    let spec = GeodesicSimplexSpec::new(vec![identity(2), real_diag(&[2.0, 2.0])]).unwrap();
    let mid = geodesic_simplex_point(&spec, &[0.5], &cfg).unwrap();
    assert!(max_abs(&(mid.into_matrix() - real_diag(&[2f64.sqrt(), 2f64.sqrt()]))) < 1e-12);
  }

  #[test]
  fn cube_corners_hit_vertices() {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gs: Vec<CMat> = (0..3).map(|_| random_gl(&mut rng, 2)).collect();
    let spec = GeodesicSimplexSpec::new(gs.clone()).unwrap();
    let target = |i: usize| crate::matlie::to_base_point(&gs[i]).unwrap().into_matrix();
    for (coords, v) in [([0.0, 0.0], 0), ([0.0, 1.0], 0), ([1.0, 0.0], 1), ([1.0, 1.0], 2)] {
      let pt = geodesic_simplex_point(&spec, &coords, &cfg).unwrap();
      assert!(max_abs(&(pt.into_matrix() - target(v))) < 1e-10);
    }
    assert!(geodesic_simplex_point(&spec, &[0.5], &cfg).is_err());
  }

  #[test]
  fn degree_one_anchor() {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
      let g = Complex64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(-3.0..3.0));
      let v = cs_cocycle(1, 1, &[scalar(c64(1.0, 0.0)), scalar(g)], &cfg).unwrap();
      assert!((v.reduced - g.norm().ln()).abs() < 1e-8);
      let b = borel_cocycle(1, 1, &[scalar(c64(1.0, 0.0)), scalar(g)], &cfg).unwrap();
      assert_eq!(b.raw, v.raw * 2.0);
    }
  }

  #[test]
  fn analytic_and_finite_difference_tangents_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gs: Vec<CMat> = (0..4).map(|_| random_gl(&mut rng, 2)).collect();
    let fd = cs_cocycle(2, 2, &gs, &QuadratureConfig::with_order(6)).unwrap();
    let an =
      cs_cocycle(2, 2, &gs, &QuadratureConfig { analytic_derivatives: true, ..QuadratureConfig::with_order(6) }).unwrap();
    assert!((fd.raw - an.raw).norm() < 1e-7, "{:?} vs {:?}", fd.raw, an.raw);
  }

  #[test]
  fn degenerate_and_unitary_tuples_vanish() {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_gl(&mut rng, 2);
    assert!(cs_cocycle(2, 1, &[g.clone(), g.clone()], &cfg).unwrap().raw.norm() < 1e-10);
    let us: Vec<CMat> = (0..4).map(|_| random_unitary(&mut rng, 2)).collect();
    assert!(cs_cocycle(2, 2, &us, &cfg).unwrap().raw.norm() < 1e-8);
  }

  #[test]
  fn left_translation_invariance() {
    let cfg = QuadratureConfig::with_order(8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gs: Vec<CMat> = (0..4).map(|_| random_gl(&mut rng, 2)).collect();
    let h = random_gl(&mut rng, 2);
    let moved: Vec<CMat> = gs.iter().map(|g| &h * g).collect();
    let a = cs_cocycle(2, 2, &gs, &cfg).unwrap();
    let b = cs_cocycle(2, 2, &moved, &cfg).unwrap();
    assert!((a.raw - b.raw).norm() < 1e-6);
  }

  #[test]
  fn reduction_is_idempotent_and_linear() {
    for p in 1..=4 {
      let z = c64(0.3, -1.7);
      let r = reduce_mod_rp(z, p);
      assert!((reduce_mod_rp(i_pow(p + 3) * r, p) - r).abs() < 1e-15);
      assert!((reduce_mod_rp(z * 2.5, p) - 2.5 * r).abs() < 1e-15);
      assert!(reduce_mod_rp(i_pow(p) * 3.0, p).abs() < 1e-15);
    }
  }

  #[test]
  fn bar_cycles() {
    let cfg = QuadratureConfig::default();
    let g = scalar(c64(2.0, 1.0));
    let h = scalar(c64(0.5, -3.0));
    let single = BarCycle::new(vec![g.clone()], vec![(1, vec![vec![0]])]).unwrap();
    assert!((evaluate_on_cycle(&single, 1, &cfg).unwrap().reduced - 5f64.sqrt().ln()).abs() < 1e-8);
    let additivity =
      BarCycle::new(vec![g.clone(), h.clone()], vec![(1, vec![vec![0]]), (1, vec![vec![1]]), (-1, vec![vec![0, 1]])]).unwrap();
    assert!(evaluate_on_cycle(&additivity, 1, &cfg).unwrap().reduced.abs() < 1e-9);
    let not_cycle = BarCycle::new(vec![g, h], vec![(1, vec![vec![0], vec![1]])]).unwrap();
    assert!(matches!(evaluate_on_cycle(&not_cycle, 1, &cfg), Err(Error::NotACycle(_))));
  }
}

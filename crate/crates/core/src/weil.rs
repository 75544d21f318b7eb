//! The Weil algebra `W(g) = ∧g* ⊗ S(g*)` with generators `θ^a` (odd, degree 1)
//! and `Ω^a` (even, degree 2), its Cartan differential, contractions and
//! coadjoint derivatives, the basic subcomplex relative to `k`, and the exact
//! transgression solver.
//!
//! Conventions:
//! * `dθ^a = Ω^a - ½ c^a_{bc} θ^b θ^c`, `dΩ^a = -c^a_{bc} θ^b Ω^c`;
//! * `ι_ξ θ^a = δ^a_ξ`, `ι_ξ Ω^a = 0`, so horizontal means "no `θ^k` factor";
//! * `L_ξ = d ι_ξ + ι_ξ d`, which acts on generators by `L_ξ θ^a = -c^a_{ξb} θ^b`
//!   and `L_ξ Ω^a = -c^a_{ξb} Ω^b`.
//!
//! The real basis of `gl_n(C)` is adapted to `u_n ⊕ herm_n`. For each pair
//! `j < k` (lexicographic) `u_n` gets `E_jk - E_kj, i(E_jk + E_kj)`, followed
//! by `iE_jj`; the Hermitian part then gets `E_jk + E_kj, i(E_jk - E_kj)`
//! per pair, followed by `E_jj`. Indices in exported data are 0-based
//! positions in this list.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invpoly::InvariantPolynomial;
use crate::linalg::{null_space, project_out, solve_particular, SqMat};
use crate::scalar::{factorial, parse_rat, qc_int, qc_real, rat_string, rat_to_f64, ratio, Field, Rational, QC};

/// Matrix realization of a Lie algebra basis, used for coordinates and for
/// evaluating invariant polynomials.
#[derive(Clone, Debug, PartialEq)]
enum Realization {
  /// `gl_n(C)` as a real Lie algebra in the adapted basis.
  Gl(usize),
  /// `u_n` with the `u_n` half of the adapted basis.
  U(usize),
  Abstract,
}

/// Structure constants `[e_b, e_c] = Σ_a c^a_{bc} e_a` plus a distinguished
/// subalgebra `k` spanned by some basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LieData {
  pub dim:                 usize,
  pub structure_constants: Vec<Vec<Vec<Rational>>>,
  pub k_indices:           Vec<usize>,
  pub basis_labels:        Vec<String>,
  realization:             Realization,
}

fn unit(i: usize, j: usize, n: usize, v: QC) -> SqMat<QC> {
  let mut m = SqMat::zeros(n);
  m[(i, j)] = v;
  m
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
  let mut out = Vec::new();
  for j in 0..n {
    for k in (j + 1)..n {
      out.push((j, k));
    }
  }
  out
}

/// Basis matrices and labels of `u_n` (first) and `herm_n` (second).
fn adapted_basis(n: usize) -> (Vec<(SqMat<QC>, String)>, Vec<(SqMat<QC>, String)>) {
  let one = qc_int(1, 0);
  let i = qc_int(0, 1);
  let mut k = Vec::new();
  let mut p = Vec::new();
  for (a, b) in pairs(n) {
    let (a1, b1) = (a + 1, b + 1);
    k.push((&unit(a, b, n, one.clone()) - &unit(b, a, n, one.clone()), format!("E{a1}{b1}-E{b1}{a1}")));
    k.push((&unit(a, b, n, i.clone()) + &unit(b, a, n, i.clone()), format!("i(E{a1}{b1}+E{b1}{a1})")));
    p.push((&unit(a, b, n, one.clone()) + &unit(b, a, n, one.clone()), format!("E{a1}{b1}+E{b1}{a1}")));
    p.push((&unit(a, b, n, i.clone()) - &unit(b, a, n, i.clone()), format!("i(E{a1}{b1}-E{b1}{a1})")));
  }
  for a in 0..n {
    k.push((unit(a, a, n, i.clone()), format!("iE{0}{0}", a + 1)));
    p.push((unit(a, a, n, one.clone()), format!("E{0}{0}", a + 1)));
  }
  (k, p)
}

/// Coordinates of a matrix in the adapted basis, generic over the scalar.
/// Returns the `u_n` coordinates followed by the `herm_n` coordinates.
fn adapted_coords<F: Field>(x: &SqMat<F>) -> (Vec<F>, Vec<F>) {
  let n = x.n();
  let half = F::from_ratio(1, 2);
  let xs = x.conj_transpose();
  let kpart = (x - &xs).scale(&half);
  let ppart = (x + &xs).scale(&half);
  let re = |z: &F| (z.clone() + z.conj()) * F::from_ratio(1, 2);
  let im = |z: &F| (z.clone() - z.conj()) * F::from_ratio(1, 2) / F::i();
  let mut k = Vec::new();
  let mut p = Vec::new();
  for (a, b) in pairs(n) {
    k.push(re(&kpart[(a, b)]));
    k.push(im(&kpart[(a, b)]));
    p.push(re(&ppart[(a, b)]));
    p.push(im(&ppart[(a, b)]));
  }
  for a in 0..n {
    k.push(im(&kpart[(a, a)]));
    p.push(re(&ppart[(a, a)]));
  }
  (k, p)
}

fn bracket(x: &SqMat<QC>, y: &SqMat<QC>) -> SqMat<QC> { &(x * y) - &(y * x) }

impl LieData {
  /// Validated abstract Lie algebra data.
  pub fn new(structure_constants: Vec<Vec<Vec<Rational>>>, k_indices: Vec<usize>, basis_labels: Vec<String>) -> Result<Self> {
    let dim = structure_constants.len();
    let data = LieData { dim, structure_constants, k_indices, basis_labels, realization: Realization::Abstract };
    data.validate()?;
    Ok(data)
  }

  fn from_basis(basis: &[SqMat<QC>], labels: Vec<String>, k_indices: Vec<usize>, realization: Realization) -> Self {
    let dim = basis.len();
    let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
    let probe = LieData { dim, structure_constants: c.clone(), k_indices: vec![], basis_labels: vec![], realization };
    for b in 0..dim {
      for cc in 0..dim {
        let coords = probe.coords(&bracket(&basis[b], &basis[cc])).expect("bracket stays in the algebra");
        for (a, v) in coords.into_iter().enumerate() {
          debug_assert!(v.im.is_zero());
          c[a][b][cc] = v.re;
        }
      }
    }
    LieData { dim, structure_constants: c, k_indices, basis_labels: labels, realization: probe.realization }
  }

  /// `gl_n(C)` as a real Lie algebra with `k = u_n`.
  pub fn gl(n: usize) -> Self {
    let (k, p) = adapted_basis(n);
    let nk = k.len();
    let (mats, labels): (Vec<_>, Vec<_>) = k.into_iter().chain(p).unzip();
    Self::from_basis(&mats, labels, (0..nk).collect(), Realization::Gl(n))
  }

  /// `u_n` with trivial `k`.
  pub fn u(n: usize) -> Self {
    let (k, _) = adapted_basis(n);
    let (mats, labels): (Vec<_>, Vec<_>) = k.into_iter().unzip();
    Self::from_basis(&mats, labels, vec![], Realization::U(n))
  }

  pub fn matrix_size(&self) -> Option<usize> {
    match self.realization {
      Realization::Gl(n) | Realization::U(n) => Some(n),
      Realization::Abstract => None,
    }
  }

  /// Basis matrices, when the algebra is realized by matrices.
  pub fn basis_matrices(&self) -> Option<Vec<SqMat<QC>>> {
    match self.realization {
      Realization::Gl(n) => {
        let (k, p) = adapted_basis(n);
        Some(k.into_iter().chain(p).map(|v| v.0).collect())
      },
      Realization::U(n) => Some(adapted_basis(n).0.into_iter().map(|v| v.0).collect()),
      Realization::Abstract => None,
    }
  }

  /// Exact coordinates of a matrix in the basis (real, stored as `QC`).
  pub fn coords(&self, x: &SqMat<QC>) -> Result<Vec<QC>> {
    match self.realization {
      Realization::Gl(_) => {
        let (mut k, p) = adapted_coords(x);
        k.extend(p);
        Ok(k)
      },
      Realization::U(_) => {
        let (k, p) = adapted_coords(x);
        if p.iter().any(|v| !v.is_zero()) {
          return Err(Error::InvalidArgument("matrix is not skew-Hermitian".into()));
        }
        Ok(k)
      },
      Realization::Abstract => Err(Error::InvalidArgument("abstract Lie algebra has no matrix coordinates".into())),
    }
  }

  pub fn p_indices(&self) -> Vec<usize> { (0..self.dim).filter(|i| !self.k_indices.contains(i)).collect() }

  pub fn is_k(&self, a: usize) -> bool { self.k_indices.contains(&a) }

  pub fn c(&self, a: usize, b: usize, c: usize) -> &Rational { &self.structure_constants[a][b][c] }

  /// Antisymmetry, Jacobi identity and closure of `k`, all exact.
  pub fn validate(&self) -> Result<()> {
    let d = self.dim;
    let sc = &self.structure_constants;
    if sc.iter().any(|m| m.len() != d || m.iter().any(|r| r.len() != d)) {
      return Err(Error::InvalidArgument("structure constants must be dim x dim x dim".into()));
    }
    if self.basis_labels.len() != d {
      return Err(Error::InvalidArgument("one label per basis vector required".into()));
    }
    if self.k_indices.iter().any(|&i| i >= d) {
      return Err(Error::InvalidArgument("k index out of range".into()));
    }
    for a in 0..d {
      for b in 0..d {
        for c in 0..d {
          if sc[a][b][c] != -sc[a][c][b].clone() {
            return Err(Error::InvalidArgument(format!("antisymmetry fails at c^{a}_{{{b}{c}}}")));
          }
        }
      }
    }
    // Σ_e c^e_{bc} c^a_{ee'} + cyclic in (b, c, e') = 0
    for a in 0..d {
      for b in 0..d {
        for c in 0..d {
          for f in 0..d {
            let mut s = Rational::zero();
            for e in 0..d {
              s += &sc[e][b][c] * &sc[a][e][f] + &sc[e][c][f] * &sc[a][e][b] + &sc[e][f][b] * &sc[a][e][c];
            }
            if !s.is_zero() {
              return Err(Error::InvalidArgument(format!("Jacobi identity fails on ({b}, {c}, {f})")));
            }
          }
        }
      }
    }
    for &b in &self.k_indices {
      for &c in &self.k_indices {
        for a in 0..d {
          if !self.is_k(a) && !sc[a][b][c].is_zero() {
            return Err(Error::InvalidArgument("k is not closed under the bracket".into()));
          }
        }
      }
    }
    Ok(())
  }
}

/// A monomial `θ^{i_1}…θ^{i_r} Ω^{j_1}…Ω^{j_s}` with `i` strictly and `j`
/// weakly increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
  pub theta: Vec<u16>,
  pub omega: Vec<u16>,
}

impl Mono {
  pub fn one() -> Self { Mono { theta: vec![], omega: vec![] } }

  pub fn degree(&self) -> usize { self.theta.len() + 2 * self.omega.len() }
}

/// Sort a θ-word, returning the sign of the sorting permutation, or `None`
/// when an index repeats.
fn sort_theta(mut w: Vec<u16>) -> Option<(Vec<u16>, bool)> {
  let mut odd = false;
  for i in 1..w.len() {
    let mut j = i;
    while j > 0 && w[j - 1] > w[j] {
      w.swap(j - 1, j);
      odd = !odd;
      j -= 1;
    }
  }
  if w.windows(2).any(|p| p[0] == p[1]) {
    return None;
  }
  Some((w, odd))
}

fn mono_mul(a: &Mono, b: &Mono) -> Option<(Mono, bool)> {
  let (theta, odd) = sort_theta(a.theta.iter().chain(&b.theta).copied().collect())?;
  let mut omega: Vec<u16> = a.omega.iter().chain(&b.omega).copied().collect();
  omega.sort_unstable();
  Some((Mono { theta, omega }, odd))
}

/// An element of the Weil algebra with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeilElement {
  terms: BTreeMap<Mono, QC>,
}

impl WeilElement {
  pub fn zero() -> Self { Self::default() }

  pub fn constant(c: QC) -> Self { Self::from_terms([(Mono::one(), c)]) }

  pub fn theta(a: usize) -> Self { Self::from_terms([(Mono { theta: vec![a as u16], omega: vec![] }, QC::one())]) }

  pub fn omega(a: usize) -> Self { Self::from_terms([(Mono { theta: vec![], omega: vec![a as u16] }, QC::one())]) }

  /// Builds a canonical element from possibly unsorted index words.
  pub fn monomial(theta: &[usize], omega: &[usize], coeff: QC) -> Self {
    match sort_theta(theta.iter().map(|&v| v as u16).collect()) {
      None => Self::zero(),
      Some((theta, odd)) => {
        let mut omega: Vec<u16> = omega.iter().map(|&v| v as u16).collect();
        omega.sort_unstable();
        Self::from_terms([(Mono { theta, omega }, if odd { -coeff } else { coeff })])
      },
    }
  }

  pub fn from_terms(terms: impl IntoIterator<Item = (Mono, QC)>) -> Self {
    let mut out = Self::zero();
    for (m, c) in terms {
      out.add_term(m, c);
    }
    out
  }

  fn add_term(&mut self, m: Mono, c: QC) {
    if c.is_zero() {
      return;
    }
    match self.terms.entry(m) {
      Entry::Vacant(e) => {
        e.insert(c);
      },
      Entry::Occupied(mut e) => {
        let v = e.get().clone() + c;
        if v.is_zero() {
          e.remove();
        } else {
          *e.get_mut() = v;
        }
      },
    }
  }

  pub fn terms(&self) -> impl Iterator<Item = (&Mono, &QC)> { self.terms.iter() }

  pub fn coeff(&self, m: &Mono) -> QC { self.terms.get(m).cloned().unwrap_or_else(QC::zero) }

  pub fn len(&self) -> usize { self.terms.len() }

  pub fn is_empty(&self) -> bool { self.terms.is_empty() }

  pub fn is_zero(&self) -> bool { self.terms.is_empty() }

  /// `Some(d)` when every term has total degree `d` (or the element is zero, giving `None`).
  pub fn degree(&self) -> Option<usize> {
    let degs: BTreeSet<usize> = self.terms.keys().map(Mono::degree).collect();
    if degs.len() == 1 { degs.into_iter().next() } else { None }
  }

  pub fn scale(&self, s: &QC) -> Self { Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * s))) }

  pub fn add(&self, other: &Self) -> Self {
    let mut out = self.clone();
    for (m, c) in &other.terms {
      out.add_term(m.clone(), c.clone());
    }
    out
  }

  pub fn sub(&self, other: &Self) -> Self { self.add(&other.scale(&qc_int(-1, 0))) }

  pub fn mul(&self, other: &Self) -> Self {
    let mut out = Self::zero();
    for (ma, ca) in &self.terms {
      for (mb, cb) in &other.terms {
        if let Some((m, odd)) = mono_mul(ma, mb) {
          let c = ca * cb;
          out.add_term(m, if odd { -c } else { c });
        }
      }
    }
    out
  }

  /// Part with no `Ω` factors.
  pub fn theta_only(&self) -> Self { Self::from_terms(self.terms.iter().filter(|(m, _)| m.omega.is_empty()).map(|(m, c)| (m.clone(), c.clone()))) }

  /// Applies a (graded) derivation given by its values on generators.
  /// `odd` selects the sign rule for odd derivations.
  fn derivation(&self, odd: bool, on_theta: &dyn Fn(usize) -> Self, on_omega: &dyn Fn(usize) -> Self) -> Self {
    let mut out = Self::zero();
    for (m, c) in &self.terms {
      // Factors in order: θ's then Ω's.
      let r = m.theta.len();
      for t in 0..r {
        let prefix = Self::from_terms([(Mono { theta: m.theta[..t].to_vec(), omega: vec![] }, QC::one())]);
        let suffix = Self::from_terms([(Mono { theta: m.theta[t + 1..].to_vec(), omega: m.omega.clone() }, QC::one())]);
        let mut piece = prefix.mul(&on_theta(m.theta[t] as usize)).mul(&suffix);
        if odd && t % 2 == 1 {
          piece = piece.scale(&qc_int(-1, 0));
        }
        out = out.add(&piece.scale(c));
      }
      for s in 0..m.omega.len() {
        let mut rest = m.omega.clone();
        let g = rest.remove(s) as usize;
        let prefix = Self::from_terms([(Mono { theta: m.theta.clone(), omega: rest }, QC::one())]);
        let mut piece = prefix.mul(&on_omega(g));
        if odd && r % 2 == 1 {
          piece = piece.scale(&qc_int(-1, 0));
        }
        out = out.add(&piece.scale(c));
      }
    }
    out
  }

  /// Replaces `θ^a ↦ Σ_b M[a][b] θ'^b` and `Ω^a ↦ Σ_b M[a][b] Ω'^b`.
  pub fn linear_substitution(&self, m: &[Vec<QC>]) -> Self {
    let image = |a: usize, theta: bool| -> Self {
      let mut e = Self::zero();
      for (b, v) in m[a].iter().enumerate() {
        if !v.is_zero() {
          let g = if theta { Self::theta(b) } else { Self::omega(b) };
          e = e.add(&g.scale(v));
        }
      }
      e
    };
    let mut out = Self::zero();
    for (mono, c) in &self.terms {
      let mut prod = Self::constant(c.clone());
      for &a in &mono.theta {
        prod = prod.mul(&image(a as usize, true));
      }
      for &a in &mono.omega {
        prod = prod.mul(&image(a as usize, false));
      }
      out = out.add(&prod);
    }
    out
  }

  pub fn max_index(&self) -> Option<usize> {
    self.terms.keys().flat_map(|m| m.theta.iter().chain(&m.omega)).max().map(|&v| v as usize)
  }

  /// Coefficient list in a fixed monomial order.
  pub fn coords_in(&self, monos: &[Mono]) -> Vec<QC> { monos.iter().map(|m| self.coeff(m)).collect() }

  pub fn to_export(&self) -> Vec<ExportTerm> {
    self
      .terms
      .iter()
      .map(|(m, c)| ExportTerm {
        theta_indices: m.theta.iter().map(|&v| v as usize).collect(),
        omega_indices: m.omega.iter().map(|&v| v as usize).collect(),
        coeff:         [rat_string(&c.re), rat_string(&c.im)],
      })
      .collect()
  }

  pub fn from_export(terms: &[ExportTerm]) -> Result<Self> {
    let mut out = Self::zero();
    for t in terms {
      let re = parse_rat(&t.coeff[0]).ok_or_else(|| Error::Format(format!("bad rational `{}`", t.coeff[0])))?;
      let im = parse_rat(&t.coeff[1]).ok_or_else(|| Error::Format(format!("bad rational `{}`", t.coeff[1])))?;
      out = out.add(&Self::monomial(&t.theta_indices, &t.omega_indices, QC::new(re, im)));
    }
    Ok(out)
  }

  /// Random element with small Gaussian-rational coefficients and degree ≤ `max_degree`.
  pub fn random<R: Rng>(rng: &mut R, dim: usize, max_degree: usize, terms: usize) -> Self {
    let mut out = Self::zero();
    for _ in 0..terms {
      let deg = rng.gen_range(0..=max_degree);
      let s = rng.gen_range(0..=deg / 2);
      let r = deg - 2 * s;
      if r > dim {
        continue;
      }
      let theta: Vec<usize> = rand::seq::index::sample(rng, dim, r).into_vec();
      let omega: Vec<usize> = (0..s).map(|_| rng.gen_range(0..dim)).collect();
      out = out.add(&Self::monomial(&theta, &omega, crate::scalar::random_qc(rng, 3)));
    }
    out
  }
}

/// One term of the JSON export format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExportTerm {
  pub theta_indices: Vec<usize>,
  pub omega_indices: Vec<usize>,
  pub coeff:         [String; 2],
}

/// The Weil algebra of a [`LieData`], with cached images of generators.
#[derive(Clone, Debug)]
pub struct WeilAlgebra {
  pub lie: LieData,
  d_theta: Vec<WeilElement>,
  d_omega: Vec<WeilElement>,
}

impl WeilAlgebra {
  pub fn new(lie: LieData) -> Self {
    let dim = lie.dim;
    let half = qc_real(ratio(-1, 2));
    let mut d_theta = Vec::with_capacity(dim);
    let mut d_omega = Vec::with_capacity(dim);
    for a in 0..dim {
      let mut dt = WeilElement::omega(a);
      let mut dw = WeilElement::zero();
      for b in 0..dim {
        for c in 0..dim {
          let v = lie.c(a, b, c);
          if v.is_zero() {
            continue;
          }
          let v = qc_real(v.clone());
          dt = dt.add(&WeilElement::monomial(&[b, c], &[], half.clone() * v.clone()));
          dw = dw.add(&WeilElement::monomial(&[b], &[c], -v));
        }
      }
      d_theta.push(dt);
      d_omega.push(dw);
    }
    Self { lie, d_theta, d_omega }
  }

  pub fn dim(&self) -> usize { self.lie.dim }

  /// The Cartan differential.
  pub fn d(&self, w: &WeilElement) -> WeilElement { w.derivation(true, &|a| self.d_theta[a].clone(), &|a| self.d_omega[a].clone()) }

  /// Interior product `ι_ξ`.
  pub fn contract(&self, w: &WeilElement, xi: usize) -> Result<WeilElement> {
    self.check_index(xi)?;
    Ok(w.derivation(
      true,
      &|a| if a == xi { WeilElement::constant(QC::one()) } else { WeilElement::zero() },
      &|_| WeilElement::zero(),
    ))
  }

  /// Coadjoint derivative `L_ξ`, computed from its values on generators.
  pub fn coadjoint(&self, w: &WeilElement, xi: usize) -> Result<WeilElement> {
    self.check_index(xi)?;
    let lie = &self.lie;
    let image = |a: usize, theta: bool| {
      let mut e = WeilElement::zero();
      for b in 0..lie.dim {
        let v = lie.c(a, xi, b);
        if !v.is_zero() {
          let g = if theta { WeilElement::theta(b) } else { WeilElement::omega(b) };
          e = e.add(&g.scale(&qc_real(-v.clone())));
        }
      }
      e
    };
    Ok(w.derivation(false, &|a| image(a, true), &|a| image(a, false)))
  }

  fn check_index(&self, xi: usize) -> Result<()> {
    if xi >= self.lie.dim {
      return Err(Error::InvalidArgument(format!("basis index {xi} out of range 0..{}", self.lie.dim)));
    }
    Ok(())
  }

  /// True when `ι_ξ w = 0` and `L_ξ w = 0` for every `ξ ∈ k`.
  pub fn is_basic(&self, w: &WeilElement) -> bool {
    self.lie.k_indices.iter().all(|&xi| self.contract(w, xi).unwrap().is_zero() && self.coadjoint(w, xi).unwrap().is_zero())
  }

  /// All monomials of the given degree, optionally restricted to θ-indices
  /// outside `k` (the horizontal ones).
  pub fn monomials(&self, degree: usize, horizontal: bool) -> Vec<Mono> {
    let theta_pool: Vec<u16> =
      (0..self.lie.dim).filter(|&a| !horizontal || !self.lie.is_k(a)).map(|a| a as u16).collect();
    let mut out = Vec::new();
    for s in 0..=degree / 2 {
      let r = degree - 2 * s;
      if r > theta_pool.len() {
        continue;
      }
      for theta in crate::scalar::subsets(theta_pool.len(), r) {
        let theta: Vec<u16> = theta.iter().map(|&i| theta_pool[i]).collect();
        for omega in multisets(self.lie.dim, s) {
          out.push(Mono { theta: theta.clone(), omega });
        }
      }
    }
    out.sort();
    out
  }

  /// Basis of basic elements of the given degree: exact null space of the
  /// stacked constraints `ι_ξ`, `L_ξ` (`ξ ∈ k`) over the horizontal monomials.
  pub fn basic_basis(&self, degree: usize) -> Vec<WeilElement> {
    let ambient = self.monomials(degree, true);
    self.constrained_basis(&ambient)
  }

  /// Same computation over every monomial of the degree; used to cross-check
  /// that horizontality was imposed correctly.
  pub fn basic_basis_full(&self, degree: usize) -> Vec<WeilElement> {
    let ambient = self.monomials(degree, false);
    self.constrained_basis(&ambient)
  }

  /// Null space of the `ι_ξ`, `L_ξ` constraints. Both maps preserve the
  /// (θ-degree, Ω-degree) bigrading, so each bigraded piece is solved on its
  /// own, and constraint blocks are row-reduced as they arrive.
  fn constrained_basis(&self, ambient: &[Mono]) -> Vec<WeilElement> {
    let mut pieces: BTreeMap<(usize, usize), Vec<Mono>> = BTreeMap::new();
    for m in ambient {
      pieces.entry((m.theta.len(), m.omega.len())).or_default().push(m.clone());
    }
    let mut out = Vec::new();
    for piece in pieces.values() {
      let mut reduced: Vec<Vec<QC>> = Vec::new();
      for &xi in &self.lie.k_indices {
        for contraction in [true, false] {
          let mut index: BTreeMap<Mono, usize> = BTreeMap::new();
          let mut entries = Vec::new();
          for (col, m) in piece.iter().enumerate() {
            let e = WeilElement::from_terms([(m.clone(), QC::one())]);
            let img = if contraction { self.contract(&e, xi).unwrap() } else { self.coadjoint(&e, xi).unwrap() };
            for (mm, c) in img.terms() {
              let len = index.len();
              let row = *index.entry(mm.clone()).or_insert(len);
              entries.push((row, col, c.clone()));
            }
          }
          if index.is_empty() {
            continue;
          }
          let mut rows = vec![vec![QC::zero(); piece.len()]; index.len()];
          for (r, c, v) in entries {
            rows[r][c] = v;
          }
          reduced.extend(rows);
          crate::linalg::rref(&mut reduced, piece.len());
        }
      }
      out.extend(
        null_space(&reduced, piece.len()).into_iter().map(|v| WeilElement::from_terms(piece.iter().cloned().zip(v))),
      );
    }
    out
  }

  /// The θ-free element `Σ μ_Φ(e_{a_1},…,e_{a_p}) Ω^{a_1}…Ω^{a_p}`.
  pub fn embed_invariant(&self, phi: &InvariantPolynomial) -> Result<WeilElement> {
    let basis = self.lie.basis_matrices().ok_or_else(|| Error::InvalidArgument("embedding needs a matrix realization".into()))?;
    if self.lie.matrix_size() != Some(phi.n) {
      return Err(Error::InvalidArgument("polynomial size does not match the Lie algebra".into()));
    }
    let mut out = WeilElement::zero();
    for j in multisets(self.lie.dim, phi.p) {
      let args: Vec<SqMat<QC>> = j.iter().map(|&a| basis[a as usize].clone()).collect();
      let mu = phi.polarize(&args)?;
      if mu.is_zero() {
        continue;
      }
      let mut mult = factorial(phi.p);
      let mut i = 0;
      while i < j.len() {
        let run = j[i..].iter().take_while(|&&v| v == j[i]).count();
        mult /= factorial(run);
        i += run;
      }
      out = out.add(&WeilElement::from_terms([(Mono { theta: vec![], omega: j.clone() }, mu * qc_int(mult, 0))]));
    }
    Ok(out)
  }

  /// Image in `S(k*)`: terms without θ whose Ω-indices all lie in `k`.
  pub fn restrict_to_k(&self, w: &WeilElement) -> WeilElement {
    WeilElement::from_terms(
      w.terms()
        .filter(|(m, _)| m.theta.is_empty() && m.omega.iter().all(|&a| self.lie.is_k(a as usize)))
        .map(|(m, c)| (m.clone(), c.clone())),
    )
  }

  /// Solves `dT = Q` in the basic subcomplex, returning the solution of
  /// minimal coordinate norm.
  pub fn transgress(&self, p: usize, q: &WeilElement) -> Result<Transgression> {
    if p == 0 {
      return Err(Error::InvalidArgument("degree p must be positive".into()));
    }
    if !q.is_zero() {
      if q.degree() != Some(2 * p) {
        return Err(Error::InvalidArgument(format!("Q must be homogeneous of degree {}", 2 * p)));
      }
      if !self.is_basic(q) {
        return Err(Error::InvalidArgument("Q is not basic".into()));
      }
      if !self.d(q).is_zero() {
        return Err(Error::InvalidArgument("Q is not closed".into()));
      }
      if !self.restrict_to_k(q).is_zero() {
        return Err(Error::InvalidArgument("Q has nonzero image in I(K)".into()));
      }
    }
    let basis = self.basic_basis(2 * p - 1);
    let images: Vec<WeilElement> = basis.iter().map(|b| self.d(b)).collect();
    let mut index: BTreeMap<Mono, usize> = BTreeMap::new();
    for e in images.iter().chain(std::iter::once(q)) {
      for (m, _) in e.terms() {
        let len = index.len();
        index.entry(m.clone()).or_insert(len);
      }
    }
    let mut rows = vec![vec![QC::zero(); basis.len()]; index.len()];
    for (col, e) in images.iter().enumerate() {
      for (m, c) in e.terms() {
        rows[index[m]][col] = c.clone();
      }
    }
    let mut rhs = vec![QC::zero(); index.len()];
    for (m, c) in q.terms() {
      rhs[index[m]] = c.clone();
    }
    let x = solve_particular(&rows, &rhs, basis.len())
      .ok_or_else(|| Error::NotExact(format!("dT = Q has no basic solution in degree {}", 2 * p - 1)))?;
    let kernel: Vec<WeilElement> = null_space(&rows, basis.len())
      .into_iter()
      .map(|v| combine(&basis, &v))
      .collect();
    let particular = combine(&basis, &x);
    // Minimum norm in monomial coordinates: remove the closed basic component.
    let mut monos: BTreeSet<Mono> = particular.terms().map(|(m, _)| m.clone()).collect();
    for k in &kernel {
      monos.extend(k.terms().map(|(m, _)| m.clone()));
    }
    let monos: Vec<Mono> = monos.into_iter().collect();
    let kernel_vecs: Vec<Vec<QC>> = kernel.iter().map(|k| k.coords_in(&monos)).collect();
    let t = project_out(&particular.coords_in(&monos), &kernel_vecs);
    let t = WeilElement::from_terms(monos.iter().cloned().zip(t));
    let residual = self.d(&t).sub(q);
    if !residual.is_zero() {
      return Err(Error::NotExact("nonzero residual after solve".into()));
    }
    Ok(Transgression { p, t, closed_basic: kernel })
  }

  /// `Q_p` of `gl_n` embedded in the Weil algebra.
  pub fn q_p(&self, p: usize) -> Result<WeilElement> {
    let n = self.lie.matrix_size().ok_or_else(|| Error::InvalidArgument("Q_p needs gl_n".into()))?;
    self.embed_invariant(&InvariantPolynomial::new(n, p, crate::invpoly::PolyKind::Q)?)
  }
}

fn combine(basis: &[WeilElement], x: &[QC]) -> WeilElement {
  basis.iter().zip(x).filter(|(_, c)| !c.is_zero()).fold(WeilElement::zero(), |acc, (b, c)| acc.add(&b.scale(c)))
}

/// Weakly increasing index words of length `s` over `0..dim`.
fn multisets(dim: usize, s: usize) -> Vec<Vec<u16>> {
  fn rec(start: usize, dim: usize, s: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if cur.len() == s {
      out.push(cur.clone());
      return;
    }
    for v in start..dim {
      cur.push(v as u16);
      rec(v, dim, s, cur, out);
      cur.pop();
    }
  }
  let mut out = Vec::new();
  rec(0, dim, s, &mut Vec::new(), &mut out);
  out
}

/// Output of [`WeilAlgebra::transgress`].
#[derive(Clone, Debug)]
pub struct Transgression {
  pub p:            usize,
  /// The minimal-norm basic solution of `dT = Q`.
  pub t:            WeilElement,
  /// Basis of closed basic elements of degree `2p - 1`, i.e. the directions
  /// along which solutions can be changed.
  pub closed_basic: Vec<WeilElement>,
}

/// Coefficient lattice observed on the θ-only part of a transgression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lattice {
  /// All coefficients real.
  Real,
  /// All coefficients purely imaginary.
  Imaginary,
  Complex,
}

impl Lattice {
  pub fn of(w: &WeilElement) -> Self {
    let real = w.terms().all(|(_, c)| c.im.is_zero());
    let imag = w.terms().all(|(_, c)| c.re.is_zero());
    match (real, imag) {
      (true, _) => Lattice::Real,
      (false, true) => Lattice::Imaginary,
      _ => Lattice::Complex,
    }
  }
}

/// An invariant `(2p-1)`-form on `herm_n ≅ gl_n/u_n`, in the `θ^a` with `a`
/// running over the Hermitian part of the basis.
#[derive(Clone, Debug)]
pub struct TransgressionForm {
  pub n:       usize,
  pub p:       usize,
  pub form:    WeilElement,
  pub lattice: Lattice,
  /// Float copy of the terms: Hermitian-part positions (0-based within
  /// `herm_n`) and coefficient.
  terms_f64:   Vec<(Vec<usize>, Complex64)>,
}

impl TransgressionForm {
  /// Wraps a θ-only element supported on the Hermitian directions of `gl_n`.
  pub fn new(n: usize, p: usize, form: WeilElement) -> Result<Self> {
    let nk = n * n;
    let mut terms_f64 = Vec::new();
    let mut degree = None;
    for (m, c) in form.terms() {
      if !m.omega.is_empty() || m.theta.iter().any(|&a| (a as usize) < nk || (a as usize) >= 2 * nk) {
        return Err(Error::InvalidArgument("form must be θ-only on Hermitian directions".into()));
      }
      if *degree.get_or_insert(m.theta.len()) != m.theta.len() {
        return Err(Error::InvalidArgument("form must be homogeneous".into()));
      }
      terms_f64.push((m.theta.iter().map(|&a| a as usize - nk).collect(), c.to_c64()));
    }
    let lattice = Lattice::of(&form);
    Ok(Self { n, p, form, lattice, terms_f64 })
  }

  /// The zero form of degree `2p - 1`.
  pub fn zero(n: usize, p: usize) -> Self { Self::new(n, p, WeilElement::zero()).unwrap() }

  pub fn degree(&self) -> usize { self.terms_f64.first().map(|t| t.0.len()).unwrap_or(2 * self.p - 1) }

  pub fn is_zero(&self) -> bool { self.terms_f64.is_empty() }

  /// `Σ_I c_I det[θ^{i_a}(X_b)]` for Hermitian `X_1..X_m`.
  pub fn evaluate(&self, xs: &[crate::matlie::CMat]) -> Complex64 {
    let coords: Vec<Vec<f64>> = xs.iter().map(herm_coords_f64).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (idx, c) in &self.terms_f64 {
      let m = idx.len();
      let mat = nalgebra::DMatrix::<f64>::from_fn(m, m, |a, b| coords[b][idx[a]]);
      total += c * mat.determinant();
    }
    total
  }

  pub fn evaluate_f64_coords(&self, coords: &[Vec<f64>]) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (idx, c) in &self.terms_f64 {
      let m = idx.len();
      let mat = nalgebra::DMatrix::<f64>::from_fn(m, m, |a, b| coords[b][idx[a]]);
      total += c * mat.determinant();
    }
    total
  }

  pub fn scale(&self, s: &QC) -> Self { Self::new(self.n, self.p, self.form.scale(s)).unwrap() }

  pub fn add(&self, other: &Self) -> Result<Self> { Self::new(self.n, self.p, self.form.add(&other.form)) }
}

/// Float coordinates of a Hermitian matrix in the Hermitian half of the adapted basis.
pub fn herm_coords_f64(x: &crate::matlie::CMat) -> Vec<f64> {
  let n = x.nrows();
  let mut out = Vec::with_capacity(n * n);
  for (a, b) in pairs(n) {
    let z = (x[(a, b)] + x[(b, a)].conj()) * 0.5;
    out.push(z.re);
    out.push(z.im);
  }
  for a in 0..n {
    out.push(x[(a, a)].re);
  }
  out
}

/// Transgression data for `(gl_n, u_n)` in degree `p`.
#[derive(Clone, Debug)]
pub struct TransgressionResult {
  pub n:          usize,
  pub p:          usize,
  pub q:          WeilElement,
  pub t:          WeilElement,
  pub closed_dim: usize,
  pub form:       TransgressionForm,
  pub alternates: Vec<WeilElement>,
}

/// Computes `T_p` for `(gl_n(C), u_n)` with all exact checks.
pub fn transgress_gl(n: usize, p: usize) -> Result<TransgressionResult> {
  if n == 0 || p == 0 || p > n {
    return Err(Error::InvalidArgument(format!("need 1 <= p <= n, got n={n}, p={p}")));
  }
  let w = WeilAlgebra::new(LieData::gl(n));
  let q = w.q_p(p)?;
  let tr = w.transgress(p, &q)?;
  let form = TransgressionForm::new(n, p, tr.t.theta_only())?;
  Ok(TransgressionResult { n, p, q, closed_dim: tr.closed_basic.len(), t: tr.t, form, alternates: tr.closed_basic })
}

/// The substitution `(X, Y) ↦ (X, 0)` pulled back to `W_C(u_n)`: a functional
/// `λ` on `gl_n(C)_R` goes to `Z ↦ ½[λ(Z) + iλ(-iZ)]` on `u_n`.
pub fn restrict_to_un(t: &WeilElement, n: usize) -> WeilElement {
  let u_basis = adapted_basis(n).0;
  let gl = LieData::gl(n);
  let dim = gl.dim;
  let half = qc_real(ratio(1, 2));
  let minus_i = qc_int(0, -1);
  let i = qc_int(0, 1);
  let mut m = vec![vec![QC::zero(); u_basis.len()]; dim];
  for (b, (f, _)) in u_basis.iter().enumerate() {
    let direct = gl.coords(f).unwrap();
    let rotated = gl.coords(&f.scale(&minus_i)).unwrap();
    for a in 0..dim {
      m[a][b] = half.clone() * (direct[a].clone() + i.clone() * rotated[a].clone());
    }
  }
  t.linear_substitution(&m)
}

pub fn f64_of(r: &Rational) -> f64 { rat_to_f64(r) }

#[cfg(test)]
mod tests {
  use super::*;
  use crate::invpoly::PolyKind;
  use rand::SeedableRng;
  use rand_chacha::ChaCha8Rng;

  fn abelian(dim: usize) -> LieData {
    LieData::new(vec![vec![vec![Rational::zero(); dim]; dim]; dim], vec![], (0..dim).map(|i| format!("e{i}")).collect())
      .unwrap()
  }

  #[test]
  fn gl_and_u_structure_constants_are_valid() {
    for n in 1..=3 {
      LieData::gl(n).validate().unwrap();
      LieData::u(n).validate().unwrap();
    }
    assert_eq!(LieData::gl(2).dim, 8);
    assert_eq!(LieData::gl(2).k_indices, vec![0, 1, 2, 3]);
  }

  #[test]
  fn invalid_structure_constants_are_rejected() {
    let mut c = vec![vec![vec![Rational::zero(); 2]; 2]; 2];
    c[0][0][1] = ratio(1, 1);
    assert!(LieData::new(c, vec![], vec!["a".into(), "b".into()]).is_err());
  }

  #[test]
  fn abelian_generators() {
    let w = WeilAlgebra::new(abelian(3));
    assert_eq!(w.d(&WeilElement::theta(1)), WeilElement::omega(1));
    assert!(w.d(&WeilElement::omega(2)).is_zero());
  }

  #[test]
  fn d_squared_vanishes() {
    let w = WeilAlgebra::new(LieData::gl(2));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
      let e = WeilElement::random(&mut rng, 8, 5, 4);
      assert!(w.d(&w.d(&e)).is_zero());
    }
  }

  #[test]
  fn d_on_omega_product() {
    let lie = LieData::gl(2);
    let w = WeilAlgebra::new(lie.clone());
    let (a, b) = (4, 6);
    let prod = WeilElement::omega(a).mul(&WeilElement::omega(b));
    let mut expect = WeilElement::zero();
    for c in 0..8 {
      for e in 0..8 {
        let ca = lie.c(a, c, e);
        if !ca.is_zero() {
          expect = expect.add(&WeilElement::monomial(&[c], &[e, b], qc_real(-ca.clone())));
        }
        let cb = lie.c(b, c, e);
        if !cb.is_zero() {
          expect = expect.add(&WeilElement::monomial(&[c], &[a, e], qc_real(-cb.clone())));
        }
      }
    }
    assert_eq!(w.d(&prod), expect);
  }

  #[test]
  fn contraction_and_cartan_homotopy() {
    let w = WeilAlgebra::new(LieData::gl(2));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert_eq!(w.contract(&WeilElement::theta(3), 3).unwrap(), WeilElement::constant(QC::one()));
    assert!(w.contract(&WeilElement::theta(3), 8).is_err());
    for _ in 0..20 {
      let e = WeilElement::random(&mut rng, 8, 4, 4);
      for xi in 0..8 {
        let i1 = w.contract(&e, xi).unwrap();
        assert!(w.contract(&i1, xi).unwrap().is_zero());
        let cartan = w.d(&i1).add(&w.contract(&w.d(&e), xi).unwrap());
        assert_eq!(w.coadjoint(&e, xi).unwrap(), cartan);
      }
    }
  }

  #[test]
  fn basic_basis_small_cases() {
    let w1 = WeilAlgebra::new(LieData::gl(1));
    let b1 = w1.basic_basis(1);
    assert_eq!(b1.len(), 1);
    assert_eq!(b1[0], WeilElement::theta(1));
    assert_eq!(w1.basic_basis(0).len(), 1);
    let w2 = WeilAlgebra::new(LieData::gl(2));
    assert_eq!(w2.monomials(3, true).len(), 36);
    let horizontal = w2.basic_basis(3);
    let full = w2.basic_basis_full(3);
    assert_eq!(horizontal.len(), full.len());
    for b in &horizontal {
      assert!(w2.is_basic(b));
    }
  }

  #[test]
  fn embedding_of_first_chern_polynomial() {
    let w = WeilAlgebra::new(LieData::gl(1));
    let c1 = w.embed_invariant(&InvariantPolynomial::new(1, 1, PolyKind::C).unwrap()).unwrap();
    let expect = WeilElement::omega(0).scale(&qc_int(0, -1)).add(&WeilElement::omega(1).scale(&qc_int(-1, 0)));
    assert_eq!(c1, expect);
    for n in 1..=2 {
      let w = WeilAlgebra::new(LieData::gl(n));
      for p in 1..=n {
        let q = w.q_p(p).unwrap();
        assert!(w.is_basic(&q));
        assert!(w.d(&q).is_zero());
      }
    }
  }

  #[test]
  fn transgression_degree_one() {
    let r = transgress_gl(1, 1).unwrap();
    assert_eq!(r.t, WeilElement::theta(1).scale(&qc_int(-1, 0)));
    let w = WeilAlgebra::new(LieData::gl(1));
    assert!(w.transgress(1, &WeilElement::zero()).unwrap().t.is_zero());
  }

  #[test]
  fn transgression_rank_two() {
    for p in 1..=2 {
      let r = transgress_gl(2, p).unwrap();
      let w = WeilAlgebra::new(LieData::gl(2));
      assert_eq!(w.d(&r.t), r.q);
      assert!(w.is_basic(&r.t));
      assert_eq!(r.form.degree(), 2 * p - 1);
    }
  }

  #[test]
  fn transgression_coefficients_lie_in_i_pow_p_minus_one_r() {
    assert_eq!(transgress_gl(1, 1).unwrap().form.lattice, Lattice::Real);
    assert_eq!(transgress_gl(2, 1).unwrap().form.lattice, Lattice::Real);
    assert_eq!(transgress_gl(2, 2).unwrap().form.lattice, Lattice::Imaginary);
  }

  #[test]
  fn restriction_to_unitary_algebra() {
    let r = restrict_to_un(&WeilElement::theta(1).scale(&qc_int(-1, 0)), 1);
    assert_eq!(r, WeilElement::theta(0).scale(&qc_ratio_i(-1, 2)));
    assert!(restrict_to_un(&WeilElement::zero(), 2).is_zero());
    for (n, p) in [(1, 1), (2, 1), (2, 2)] {
      let t = transgress_gl(n, p).unwrap().t;
      let u = WeilAlgebra::new(LieData::u(n));
      let lhs = u.d(&restrict_to_un(&t, n)).scale(&qc_int(2, 0));
      let rhs = u.embed_invariant(&InvariantPolynomial::new(n, p, PolyKind::C).unwrap()).unwrap();
      assert_eq!(lhs, rhs, "n={n} p={p}");
    }
  }

  fn qc_ratio_i(num: i64, den: i64) -> QC { QC::new(Rational::zero(), ratio(num, den)) }

  #[test]
  fn export_round_trip() {
    let t = transgress_gl(2, 2).unwrap().t;
    let json = serde_json::to_string(&t.to_export()).unwrap();
    let back: Vec<ExportTerm> = serde_json::from_str(&json).unwrap();
    assert_eq!(WeilElement::from_export(&back).unwrap(), t);
  }
}

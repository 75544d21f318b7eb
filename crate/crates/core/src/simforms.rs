//! Finite semi-simplicial sets, compatible polynomial differential forms on
//! them, integration to cochains, fiber integration over an interval, and the
//! prism operator on cochains.
//!
//! On an `m`-cell the barycentric coordinate `t_0` is eliminated and forms are
//! polynomials in `t_1..t_m` (variable indices `0..m`) with differentials
//! `dt_1..dt_m`. The standard simplex is `{t_i ≥ 0, Σ t_i ≤ 1}` oriented by
//! `dt_1∧…∧dt_m`, so `∫_{Δ^m} dt_1∧…∧dt_m = 1/m!`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::SqMat;
use crate::matlie::{max_abs, CMat};
use crate::scalar::{factorial, qc_int, random_qc, rat_string, ratio, Field, Ring, QC};

/// Key of a monomial `t^e dt_I`: bitmask of `I` and trailing-zero-free exponents.
type FormKey = (u32, Vec<u16>);

/// A polynomial differential form with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiffForm {
  terms: BTreeMap<FormKey, QC>,
}

fn trim(mut e: Vec<u16>) -> Vec<u16> {
  while e.last() == Some(&0) {
    e.pop();
  }
  e
}

/// Sign of `dt_A ∧ dt_B` relative to `dt_{A∪B}`; `None` if they overlap.
fn wedge_sign(a: u32, b: u32) -> Option<bool> {
  if a & b != 0 {
    return None;
  }
  let mut odd = false;
  let mut bb = b;
  while bb != 0 {
    let bit = bb.trailing_zeros();
    let above = (a >> bit) >> 1;
    if above.count_ones() % 2 == 1 {
      odd = !odd;
    }
    bb &= bb - 1;
  }
  Some(odd)
}

impl DiffForm {
  pub fn constant(c: QC) -> Self { Self::from_terms([((0, vec![]), c)]) }

  /// The coordinate function `t_{i+1}` (variable index `i`).
  pub fn var(i: usize) -> Self {
    let mut e = vec![0; i + 1];
    e[i] = 1;
    Self::from_terms([((0, e), QC::one())])
  }

  pub fn dvar(i: usize) -> Self { Self::from_terms([((1 << i, vec![]), QC::one())]) }

  /// `c · Π t^{exps} · dt_{d_0} ∧ dt_{d_1} ∧ …` with the `d`'s in any order.
  pub fn monomial(exps: &[u16], dts: &[usize], c: QC) -> Self {
    let mut out = Self::constant(c).mul_ref(&Self::from_terms([((0, exps.to_vec()), QC::one())]));
    for &d in dts {
      out = out.mul_ref(&Self::dvar(d));
    }
    out
  }

  pub fn from_terms(terms: impl IntoIterator<Item = (FormKey, QC)>) -> Self {
    let mut out = Self::default();
    for ((mask, e), c) in terms {
      out.add_term(mask, trim(e), c);
    }
    out
  }

  fn add_term(&mut self, mask: u32, exps: Vec<u16>, c: QC) {
    if c.is_zero() {
      return;
    }
    match self.terms.entry((mask, exps)) {
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

  pub fn terms(&self) -> impl Iterator<Item = (&FormKey, &QC)> { self.terms.iter() }

  pub fn len(&self) -> usize { self.terms.len() }

  pub fn is_empty(&self) -> bool { self.terms.is_empty() }

  /// Form degree when homogeneous; `None` for zero or mixed forms.
  pub fn degree(&self) -> Option<usize> {
    let mut it = self.terms.keys().map(|(m, _)| m.count_ones() as usize);
    let first = it.next()?;
    if it.all(|d| d == first) { Some(first) } else { None }
  }

  pub fn homogeneous_part(&self, k: usize) -> Self {
    Self::from_terms(self.terms.iter().filter(|((m, _), _)| m.count_ones() as usize == k).map(|(k, c)| (k.clone(), c.clone())))
  }

  /// One more than the largest variable index used.
  pub fn num_vars(&self) -> usize {
    self.terms.keys().map(|(m, e)| e.len().max(32 - m.leading_zeros() as usize)).max().unwrap_or(0)
  }

  pub fn scale(&self, s: &QC) -> Self {
    if s.is_zero() {
      return Self::default();
    }
    Self { terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect() }
  }

  pub fn add_ref(&self, other: &Self) -> Self {
    let mut out = self.clone();
    for ((m, e), c) in &other.terms {
      out.add_term(*m, e.clone(), c.clone());
    }
    out
  }

  pub fn sub_ref(&self, other: &Self) -> Self { self.add_ref(&other.scale(&qc_int(-1, 0))) }

  /// Wedge product.
  pub fn mul_ref(&self, other: &Self) -> Self {
    let mut out = Self::default();
    for ((ma, ea), ca) in &self.terms {
      for ((mb, eb), cb) in &other.terms {
        let Some(odd) = wedge_sign(*ma, *mb) else { continue };
        let len = ea.len().max(eb.len());
        let e: Vec<u16> = (0..len).map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0)).collect();
        let c = ca * cb;
        out.add_term(ma | mb, e, if odd { -c } else { c });
      }
    }
    out
  }

  pub fn wedge(&self, other: &Self) -> Self { self.mul_ref(other) }

  /// Exterior derivative.
  pub fn d(&self) -> Self {
    let mut out = Self::default();
    for ((m, e), c) in &self.terms {
      for (i, &a) in e.iter().enumerate() {
        if a == 0 || m & (1 << i) != 0 {
          continue;
        }
        let mut ne = e.clone();
        ne[i] -= 1;
        // dt_i ∧ dt_I: move dt_i past the differentials below it.
        let below = (m & ((1u32 << i) - 1)).count_ones();
        let coeff = c * qc_int(a as i64, 0);
        out.add_term(m | (1 << i), trim(ne), if below % 2 == 1 { -coeff } else { coeff });
      }
    }
    out
  }

  /// Pullback along the polynomial map `t_i ↦ images[i]` (0-forms).
  pub fn pullback(&self, images: &[DiffForm]) -> Self {
    let d_images: Vec<DiffForm> = images.iter().map(DiffForm::d).collect();
    let mut powers: HashMap<(usize, u16), DiffForm> = HashMap::new();
    let mut out = Self::default();
    for ((m, e), c) in &self.terms {
      let mut term = Self::constant(c.clone());
      for (i, &a) in e.iter().enumerate() {
        if a == 0 {
          continue;
        }
        let pw = powers
          .entry((i, a))
          .or_insert_with(|| (0..a).fold(Self::constant(QC::one()), |acc, _| acc.mul_ref(&images[i])))
          .clone();
        term = term.mul_ref(&pw);
      }
      let mut mm = *m;
      while mm != 0 {
        let i = mm.trailing_zeros() as usize;
        term = term.mul_ref(&d_images[i]);
        mm &= mm - 1;
      }
      out = out.add_ref(&term);
    }
    out
  }

  /// Sets variable `var` to `value` and `dt_var` to zero, keeping other indices.
  pub fn evaluate_var(&self, var: usize, value: &QC) -> Self {
    let mut out = Self::default();
    for ((m, e), c) in &self.terms {
      if m & (1 << var) != 0 {
        continue;
      }
      let a = e.get(var).copied().unwrap_or(0);
      let mut ne = e.clone();
      if var < ne.len() {
        ne[var] = 0;
      }
      let mut coeff = c.clone();
      for _ in 0..a {
        coeff = coeff * value.clone();
      }
      out.add_term(*m, trim(ne), coeff);
    }
    out
  }

  /// `∫_{Δ^m}` of the `dt_1∧…∧dt_m` component, using
  /// `∫ t^a = Π a_i! / (Σa + m)!`.
  pub fn integrate_simplex(&self, m: usize) -> QC {
    let top = if m == 0 { 0 } else { (1u32 << m) - 1 };
    let mut acc = QC::zero();
    for ((mask, e), c) in &self.terms {
      if *mask != top || e.len() > m {
        continue;
      }
      let num: i64 = e.iter().map(|&a| factorial(a as usize)).product();
      let total: usize = e.iter().map(|&a| a as usize).sum::<usize>() + m;
      acc = acc + c.clone() * crate::scalar::qc_real(big_ratio(num, total));
    }
    acc
  }

  /// Fiber integration over `var ∈ [0, 1]`: writing `φ = dt_var ∧ α + β` with
  /// `α, β` free of `dt_var`, returns `∫_0^1 α dt_var`.
  pub fn fiber_integrate(&self, var: usize) -> Self {
    let mut out = Self::default();
    for ((m, e), c) in &self.terms {
      if m & (1 << var) == 0 {
        continue;
      }
      let below = (m & ((1u32 << var) - 1)).count_ones();
      let a = e.get(var).copied().unwrap_or(0) as i64;
      let mut ne = e.clone();
      ne[var..].iter_mut().take(1).for_each(|v| *v = 0);
      let coeff = c * QC::new(ratio(1, a + 1), Zero::zero());
      out.add_term(m & !(1 << var), trim(ne), if below % 2 == 1 { -coeff } else { coeff });
    }
    out
  }

  /// Numerical value of the coefficient of `dt_mask` at a point.
  pub fn eval_coeff(&self, mask: u32, point: &[f64]) -> Complex64 {
    self
      .terms
      .iter()
      .filter(|((m, _), _)| *m == mask)
      .map(|((_, e), c)| {
        let mono: f64 = e.iter().enumerate().map(|(i, &a)| point[i].powi(a as i32)).product();
        c.to_c64() * mono
      })
      .sum()
  }

  /// Random form of the given degree in `nvars` variables.
  pub fn random<R: Rng>(rng: &mut R, nvars: usize, degree: usize, max_exp: u16, terms: usize) -> Self {
    let mut out = Self::default();
    if degree > nvars {
      return out;
    }
    for _ in 0..terms {
      let dts: Vec<usize> = rand::seq::index::sample(rng, nvars, degree).into_vec();
      let exps: Vec<u16> = (0..nvars).map(|_| rng.gen_range(0..=max_exp)).collect();
      out = out.add_ref(&Self::monomial(&exps, &dts, random_qc(rng, 3)));
    }
    out
  }

  pub fn to_json(&self) -> Value {
    Value::Array(
      self
        .terms
        .iter()
        .map(|((m, e), c)| {
          let dts: Vec<usize> = (0..32).filter(|i| m & (1 << i) != 0).collect();
          json!({"exps": e, "dt": dts, "coeff": [rat_string(&c.re), rat_string(&c.im)]})
        })
        .collect(),
    )
  }
}

fn big_ratio(num: i64, total: usize) -> crate::scalar::Rational {
  use num_bigint::BigInt;
  let den: BigInt = (1..=total as u64).map(BigInt::from).product();
  crate::scalar::Rational::new(BigInt::from(num), den)
}

impl fmt::Display for DiffForm {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let parts: Vec<String> = self
      .terms
      .iter()
      .map(|((m, e), c)| {
        let mut s = format!("({}+{}i)", c.re, c.im);
        for (i, &a) in e.iter().enumerate() {
          if a > 0 {
            s.push_str(&format!("·t{}^{}", i + 1, a));
          }
        }
        for i in 0..32 {
          if m & (1 << i) != 0 {
            s.push_str(&format!("·dt{}", i + 1));
          }
        }
        s
      })
      .collect();
    write!(f, "{}", parts.join(" + "))
  }
}

impl Add for DiffForm {
  type Output = Self;

  fn add(self, rhs: Self) -> Self { self.add_ref(&rhs) }
}

impl Sub for DiffForm {
  type Output = Self;

  fn sub(self, rhs: Self) -> Self { self.sub_ref(&rhs) }
}

impl Mul for DiffForm {
  type Output = Self;

  fn mul(self, rhs: Self) -> Self { self.mul_ref(&rhs) }
}

impl Neg for DiffForm {
  type Output = Self;

  fn neg(self) -> Self { self.scale(&qc_int(-1, 0)) }
}

impl Zero for DiffForm {
  fn zero() -> Self { Self::default() }

  fn is_zero(&self) -> bool { self.terms.is_empty() }
}

impl One for DiffForm {
  fn one() -> Self { Self::constant(QC::one()) }
}

impl Ring for DiffForm {
  fn from_ratio(num: i64, den: i64) -> Self { Self::constant(QC::new(ratio(num, den), Zero::zero())) }
}

/// Pullback of a form on an `m`-cell along the coface map that omits vertex `i`.
pub fn face_pullback(form: &DiffForm, m: usize, i: usize) -> DiffForm {
  if m == 0 {
    return DiffForm::default();
  }
  // Images of t_1..t_m in terms of s_1..s_{m-1} (variable indices 0..m-1).
  let images: Vec<DiffForm> = (1..=m)
    .map(|j| {
      if i == 0 {
        if j == 1 {
          (0..m - 1).fold(DiffForm::constant(QC::one()), |acc, k| acc.sub_ref(&DiffForm::var(k)))
        } else {
          DiffForm::var(j - 2)
        }
      } else if j < i {
        DiffForm::var(j - 1)
      } else if j == i {
        DiffForm::default()
      } else {
        DiffForm::var(j - 2)
      }
    })
    .collect();
  form.pullback(&images)
}

/// One cell of a semi-simplicial set.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
  pub name:     String,
  /// Indices of `d_0, …, d_m` among the cells of one dimension lower.
  pub faces:    Vec<usize>,
  /// Vertex list when the set comes from an ordered simplicial complex.
  pub vertices: Option<Vec<usize>>,
  pub label:    Option<Value>,
}

/// A finite semi-simplicial set.
#[derive(Clone, Debug, PartialEq)]
pub struct SSet {
  cells:      Vec<Vec<Cell>>,
  lookup:     HashMap<Vec<usize>, usize>,
  prism_base: Option<Arc<SSet>>,
}

impl SSet {
  /// Validated constructor; checks face ranges and `d_i d_j = d_{j-1} d_i` for `i < j`.
  pub fn new(cells: Vec<Vec<Cell>>) -> Result<Self> {
    for (m, layer) in cells.iter().enumerate() {
      for c in layer {
        let expect = if m == 0 { 0 } else { m + 1 };
        if c.faces.len() != expect {
          return Err(Error::Incompatible(format!("cell {} of dimension {m} needs {expect} faces", c.name)));
        }
        if m > 0 && c.faces.iter().any(|&f| f >= cells[m - 1].len()) {
          return Err(Error::Incompatible(format!("cell {} has a face out of range", c.name)));
        }
      }
    }
    let mut lookup = HashMap::new();
    for layer in &cells {
      for (idx, c) in layer.iter().enumerate() {
        if let Some(v) = &c.vertices {
          lookup.insert(v.clone(), idx);
        }
      }
    }
    let s = Self { cells, lookup, prism_base: None };
    if let Some((m, idx, i, j)) = s.simplicial_identity_failure() {
      return Err(Error::Incompatible(format!(
        "simplicial identity d_{i} d_{j} = d_{} d_{i} fails on cell {} (dimension {m})",
        j - 1,
        s.cells[m][idx].name
      )));
    }
    Ok(s)
  }

  pub fn simplicial_identity_failure(&self) -> Option<(usize, usize, usize, usize)> {
    for m in 2..self.cells.len() {
      for (idx, c) in self.cells[m].iter().enumerate() {
        for j in 1..=m {
          for i in 0..j {
            let lhs = self.cells[m - 1][c.faces[j]].faces[i];
            let rhs = self.cells[m - 1][c.faces[i]].faces[j - 1];
            if lhs != rhs {
              return Some((m, idx, i, j));
            }
          }
        }
      }
    }
    None
  }

  /// Ordered simplicial complex generated by the given simplices (vertex
  /// lists, strictly increasing), closed under taking faces.
  pub fn from_simplices(simplices: &[Vec<usize>]) -> Result<Self> {
    let mut all: Vec<std::collections::BTreeSet<Vec<usize>>> = Vec::new();
    for s in simplices {
      if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("simplex {s:?} is not a strictly increasing vertex list")));
      }
      for k in 1..=s.len() {
        for sub in crate::scalar::subsets(s.len(), k) {
          let v: Vec<usize> = sub.iter().map(|&i| s[i]).collect();
          if all.len() < k {
            all.resize_with(k, Default::default);
          }
          all[k - 1].insert(v);
        }
      }
    }
    let mut cells: Vec<Vec<Cell>> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for (m, layer) in all.iter().enumerate() {
      let mut out = Vec::new();
      for v in layer {
        let faces = if m == 0 {
          vec![]
        } else {
          (0..=m)
            .map(|i| {
              let mut f = v.clone();
              f.remove(i);
              index[&f]
            })
            .collect()
        };
        let name = format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        out.push(Cell { name, faces, vertices: Some(v.clone()), label: None });
      }
      for (i, c) in out.iter().enumerate() {
        index.insert(c.vertices.clone().unwrap(), i);
      }
      cells.push(out);
    }
    Self::new(cells)
  }

  /// The standard `m`-simplex with all its faces.
  pub fn simplex(m: usize) -> Self { Self::from_simplices(&[(0..=m).collect()]).unwrap() }

  /// Boundary of the standard `m`-simplex (an `(m-1)`-sphere).
  pub fn simplex_boundary(m: usize) -> Self {
    let facets: Vec<Vec<usize>> = (0..=m)
      .map(|i| {
        let mut f: Vec<usize> = (0..=m).collect();
        f.remove(i);
        f
      })
      .collect();
    Self::from_simplices(&facets).unwrap()
  }

  /// Triangulated `I × base` for an ordered simplicial complex `base`: vertex
  /// `(v, ε)` becomes `2v + ε`, and each base simplex `[v_0..v_m]` contributes
  /// the `(m+1)`-simplices `[2v_0..2v_i, 2v_i+1..2v_m+1]`.
  pub fn prism(base: &SSet) -> Result<Self> {
    let mut simplices = Vec::new();
    for layer in &base.cells {
      for c in layer {
        let v = c.vertices.as_ref().ok_or_else(|| Error::InvalidArgument("prism needs a vertex-labelled base".into()))?;
        simplices.extend(prism_simplices(v));
      }
    }
    let mut total = Self::from_simplices(&simplices)?;
    total.prism_base = Some(Arc::new(base.clone()));
    Ok(total)
  }

  pub fn prism_base(&self) -> Option<&SSet> { self.prism_base.as_deref() }

  pub fn dim(&self) -> usize { self.cells.len().saturating_sub(1) }

  pub fn cells(&self, m: usize) -> &[Cell] { self.cells.get(m).map(|v| v.as_slice()).unwrap_or(&[]) }

  pub fn count(&self, m: usize) -> usize { self.cells(m).len() }

  pub fn num_cells(&self) -> usize { self.cells.iter().map(Vec::len).sum() }

  pub fn face(&self, m: usize, idx: usize, i: usize) -> usize { self.cells[m][idx].faces[i] }

  /// Cell with the given vertex list, for simplicial complexes.
  pub fn find(&self, vertices: &[usize]) -> Option<usize> { self.lookup.get(vertices).copied() }

  /// Index of vertex `j` of an `m`-cell among the 0-cells.
  pub fn vertex(&self, m: usize, idx: usize, j: usize) -> usize {
    let (mut dim, mut cur) = (m, idx);
    // Drop the vertices after j, then the ones before it.
    while dim > j {
      cur = self.cells[dim][cur].faces[dim];
      dim -= 1;
    }
    while dim > 0 {
      cur = self.cells[dim][cur].faces[0];
      dim -= 1;
    }
    cur
  }

  /// Cells that are not a face of any other cell.
  pub fn maximal_cells(&self) -> Vec<(usize, usize)> {
    let mut is_face: Vec<Vec<bool>> = self.cells.iter().map(|l| vec![false; l.len()]).collect();
    for m in 1..self.cells.len() {
      for c in &self.cells[m] {
        for &f in &c.faces {
          is_face[m - 1][f] = true;
        }
      }
    }
    let mut out = Vec::new();
    for (m, layer) in is_face.iter().enumerate() {
      for (idx, &f) in layer.iter().enumerate() {
        if !f {
          out.push((m, idx));
        }
      }
    }
    out
  }

  pub fn to_json(&self) -> Value {
    let mut cells = serde_json::Map::new();
    let mut faces = serde_json::Map::new();
    let mut labels = serde_json::Map::new();
    for (m, layer) in self.cells.iter().enumerate() {
      cells.insert(m.to_string(), Value::Array(layer.iter().map(|c| Value::String(c.name.clone())).collect()));
      for c in layer {
        let names: Vec<Value> = c.faces.iter().map(|&f| Value::String(self.cells[m - 1][f].name.clone())).collect();
        faces.insert(c.name.clone(), Value::Array(names));
        if let Some(l) = &c.label {
          labels.insert(c.name.clone(), l.clone());
        }
      }
    }
    json!({"cells": cells, "faces": faces, "labels": labels})
  }

  pub fn from_json(v: &Value) -> Result<Self> {
    let bad = |msg: &str| Error::Format(msg.to_string());
    let cells_v = v.get("cells").and_then(Value::as_object).ok_or_else(|| bad("missing `cells` object"))?;
    let faces_v = v.get("faces").and_then(Value::as_object).ok_or_else(|| bad("missing `faces` object"))?;
    let labels_v = v.get("labels").and_then(Value::as_object);
    let dims: usize = cells_v.keys().map(|k| k.parse::<usize>().map_err(|_| bad("dimension keys must be integers"))).sum::<Result<usize>>().map(|_| cells_v.len())?;
    let mut names: Vec<Vec<String>> = Vec::with_capacity(dims);
    for m in 0..dims {
      let layer = cells_v.get(&m.to_string()).and_then(Value::as_array).ok_or_else(|| bad("cell dimensions must be contiguous from 0"))?;
      names.push(layer.iter().map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad("cell ids must be strings"))).collect::<Result<_>>()?);
    }
    let mut cells = Vec::with_capacity(dims);
    for m in 0..dims {
      let prev: HashMap<&str, usize> = if m == 0 { HashMap::new() } else { names[m - 1].iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect() };
      let mut layer = Vec::new();
      for name in &names[m] {
        let faces = if m == 0 {
          vec![]
        } else {
          let fl = faces_v.get(name).and_then(Value::as_array).ok_or_else(|| bad(&format!("no faces for `{name}`")))?;
          fl.iter()
            .map(|f| f.as_str().and_then(|s| prev.get(s).copied()).ok_or_else(|| bad(&format!("unknown face of `{name}`"))))
            .collect::<Result<Vec<_>>>()?
        };
        let label = labels_v.and_then(|l| l.get(name)).cloned();
        layer.push(Cell { name: name.clone(), faces, vertices: None, label });
      }
      cells.push(layer);
    }
    Self::new(cells)
  }
}

/// Top simplices of the standard triangulation of `I × [v_0..v_m]`.
pub fn prism_simplices(v: &[usize]) -> Vec<Vec<usize>> {
  (0..v.len())
    .map(|i| v[..=i].iter().map(|&x| 2 * x).chain(v[i..].iter().map(|&x| 2 * x + 1)).collect())
    .collect()
}

/// Closure of a generating set of matrices under multiplication, capped.
fn closure(generators: &[CMat], cap: usize) -> Result<Vec<CMat>> {
  let same = |a: &CMat, b: &CMat| max_abs(&(a - b)) < 1e-9;
  let mut elems: Vec<CMat> = Vec::new();
  for g in generators {
    if !elems.iter().any(|e| same(e, g)) {
      elems.push(g.clone());
    }
  }
  let mut i = 0;
  while i < elems.len() {
    for j in 0..elems.len() {
      for prod in [&elems[i] * &elems[j], &elems[j] * &elems[i]] {
        if !elems.iter().any(|e| same(e, &prod)) {
          elems.push(prod);
          if elems.len() > cap {
            return Err(Error::InvalidArgument(format!(
              "generators do not close up under multiplication within {cap} elements; depth >= 2 needs a finite set"
            )));
          }
        }
      }
    }
    i += 1;
  }
  Ok(elems)
}

/// Cells of the bar construction up to dimension `depth`: an `m`-cell is a
/// tuple `(h_1, …, h_m)`; `d_0` drops `h_1`, `d_i` merges `h_i h_{i+1}`, `d_m`
/// drops `h_m`. For `depth ≥ 2` the entries run over the multiplicative closure
/// of the generators, which must be finite.
pub fn bar_sset(generators: &[CMat], depth: usize) -> Result<SSet> {
  if depth > 4 {
    return Err(Error::InvalidArgument("bar depth is capped at 4".into()));
  }
  if generators.is_empty() {
    return Err(Error::InvalidArgument("at least one generator required".into()));
  }
  for g in generators {
    crate::matlie::check_invertible(g)?;
  }
  let elems = if depth >= 2 { closure(generators, 64)? } else { generators.to_vec() };
  let find = |m: &CMat| elems.iter().position(|e| max_abs(&(e - m)) < 1e-9);
  let mut cells: Vec<Vec<Cell>> = vec![vec![Cell { name: "()".into(), faces: vec![], vertices: None, label: Some(json!([])) }]];
  let mut index: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::from([(vec![], 0)])];
  for m in 1..=depth {
    let mut layer = Vec::new();
    let mut idx_map = HashMap::new();
    let count = elems.len().pow(m as u32);
    for code in 0..count {
      let mut rem = code;
      let mut tuple = vec![0usize; m];
      for k in (0..m).rev() {
        tuple[k] = rem % elems.len();
        rem /= elems.len();
      }
      let mut faces = Vec::with_capacity(m + 1);
      faces.push(index[m - 1][&tuple[1..].to_vec()]);
      for i in 1..m {
        let prod = &elems[tuple[i - 1]] * &elems[tuple[i]];
        let p = find(&prod).expect("closure contains all products");
        let mut merged = tuple[..i - 1].to_vec();
        merged.push(p);
        merged.extend_from_slice(&tuple[i + 1..]);
        faces.push(index[m - 1][&merged]);
      }
      faces.push(index[m - 1][&tuple[..m - 1].to_vec()]);
      let name = format!("({})", tuple.iter().map(|x| format!("h{x}")).collect::<Vec<_>>().join("|"));
      idx_map.insert(tuple.clone(), layer.len());
      layer.push(Cell { name, faces, vertices: None, label: Some(json!(tuple)) });
    }
    cells.push(layer);
    index.push(idx_map);
  }
  SSet::new(cells)
}

/// A compatible family of forms on the cells of a semi-simplicial set.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
  sset:  Arc<SSet>,
  forms: Vec<Vec<DiffForm>>,
}

impl PolyForm {
  /// Checked constructor.
  pub fn new(sset: Arc<SSet>, forms: Vec<Vec<DiffForm>>) -> Result<Self> {
    let f = Self::new_unchecked(sset, forms)?;
    if let Some((m, idx, i)) = f.compatibility_defect() {
      return Err(Error::Incompatible(format!("face d_{i} of cell {} does not match", f.sset.cells(m)[idx].name)));
    }
    Ok(f)
  }

  pub fn new_unchecked(sset: Arc<SSet>, forms: Vec<Vec<DiffForm>>) -> Result<Self> {
    if forms.len() != sset.dim() + 1 || forms.iter().enumerate().any(|(m, l)| l.len() != sset.count(m)) {
      return Err(Error::Incompatible("one form per cell required".into()));
    }
    Ok(Self { sset, forms })
  }

  pub fn from_fn(sset: Arc<SSet>, mut f: impl FnMut(usize, usize) -> DiffForm) -> Self {
    let forms = (0..=sset.dim()).map(|m| (0..sset.count(m)).map(|i| f(m, i)).collect()).collect();
    Self { sset, forms }
  }

  pub fn zero(sset: Arc<SSet>) -> Self { Self::from_fn(sset, |_, _| DiffForm::default()) }

  pub fn sset(&self) -> &Arc<SSet> { &self.sset }

  pub fn cell(&self, m: usize, idx: usize) -> &DiffForm { &self.forms[m][idx] }

  /// First `(dim, cell, face)` whose restriction disagrees with the face's form.
  pub fn compatibility_defect(&self) -> Option<(usize, usize, usize)> {
    for m in 1..self.forms.len() {
      for (idx, form) in self.forms[m].iter().enumerate() {
        for i in 0..=m {
          let face = self.sset.face(m, idx, i);
          if face_pullback(form, m, i) != self.forms[m - 1][face] {
            return Some((m, idx, i));
          }
        }
      }
    }
    None
  }

  pub fn is_compatible(&self) -> bool { self.compatibility_defect().is_none() }

  fn same_base(&self, other: &Self) -> Result<()> {
    if !Arc::ptr_eq(&self.sset, &other.sset) && *self.sset != *other.sset {
      return Err(Error::Incompatible("forms live on different simplicial sets".into()));
    }
    Ok(())
  }

  fn map(&self, f: impl Fn(&DiffForm) -> DiffForm) -> Self {
    Self { sset: self.sset.clone(), forms: self.forms.iter().map(|l| l.iter().map(&f).collect()).collect() }
  }

  fn zip(&self, other: &Self, f: impl Fn(&DiffForm, &DiffForm) -> DiffForm) -> Result<Self> {
    self.same_base(other)?;
    Ok(Self {
      sset:  self.sset.clone(),
      forms: self.forms.iter().zip(&other.forms).map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect()).collect(),
    })
  }

  pub fn d(&self) -> Self {
    let out = self.map(DiffForm::d);
    debug_assert!(out.is_compatible());
    out
  }

  pub fn wedge(&self, other: &Self) -> Result<Self> {
    let out = self.zip(other, DiffForm::mul_ref)?;
    debug_assert!(out.is_compatible());
    Ok(out)
  }

  pub fn add(&self, other: &Self) -> Result<Self> { self.zip(other, DiffForm::add_ref) }

  pub fn sub(&self, other: &Self) -> Result<Self> { self.zip(other, DiffForm::sub_ref) }

  pub fn scale(&self, s: &QC) -> Self { self.map(|f| f.scale(s)) }

  pub fn is_zero(&self) -> bool { self.forms.iter().flatten().all(|f| f.is_zero()) }

  /// Cochain of degree `s` whose value on an `s`-cell is the integral of its form.
  pub fn integrate_to_cochain(&self, s: usize) -> Cochain {
    let values = if s < self.forms.len() { self.forms[s].iter().map(|f| f.integrate_simplex(s)).collect() } else { vec![] };
    Cochain::new(s, values, CoeffLattice::None)
  }

  /// Random compatible form of degree `k`: a global polynomial form in vertex
  /// coordinates plus bump forms supported on maximal cells.
  pub fn random<R: Rng>(sset: Arc<SSet>, rng: &mut R, k: usize) -> Self {
    let nv = sset.count(0);
    let global = DiffForm::random(rng, nv, k, 1, 2);
    let bumps: HashMap<(usize, usize), DiffForm> = sset
      .maximal_cells()
      .into_iter()
      .filter(|&(m, _)| m >= k && m > 0)
      .map(|(m, idx)| {
        // Π_{j=0}^{m} t_j vanishes on every face.
        let mut bump = (0..m).fold(DiffForm::constant(QC::one()), |acc, j| acc.sub_ref(&DiffForm::var(j)));
        for j in 0..m {
          bump = bump.mul_ref(&DiffForm::var(j));
        }
        ((m, idx), bump.mul_ref(&DiffForm::random(rng, m, k, 0, 1)))
      })
      .collect();
    Self::from_fn(sset.clone(), |m, idx| {
      let images: Vec<DiffForm> = (0..nv)
        .map(|v| {
          let mut img = DiffForm::default();
          for j in 0..=m {
            if sset.vertex(m, idx, j) == v {
              img = img.add_ref(&barycentric(m, j));
            }
          }
          img
        })
        .collect();
      let base = global.pullback(&images);
      match bumps.get(&(m, idx)) {
        Some(b) => base.add_ref(b),
        None => base,
      }
    })
  }

  pub fn to_json(&self) -> Value {
    let mut out = serde_json::Map::new();
    for (m, layer) in self.forms.iter().enumerate() {
      for (idx, f) in layer.iter().enumerate() {
        if !f.is_zero() {
          out.insert(self.sset.cells(m)[idx].name.clone(), f.to_json());
        }
      }
    }
    Value::Object(out)
  }
}

/// For vertex-labelled sets with `sub ⊆ sup`, the index in `sup` of each cell of `sub`.
pub fn vertex_inclusion(sub: &SSet, sup: &SSet) -> Result<Vec<Vec<usize>>> {
  (0..=sub.dim())
    .map(|m| {
      sub
        .cells(m)
        .iter()
        .map(|c| {
          let v = c.vertices.as_ref().ok_or_else(|| Error::InvalidArgument("inclusion needs vertex labels".into()))?;
          sup.find(v).ok_or_else(|| Error::Incompatible(format!("cell {} is missing from the target", c.name)))
        })
        .collect()
    })
    .collect()
}

impl PolyForm {
  /// Restriction to a vertex-labelled subcomplex.
  pub fn restrict(&self, sub: Arc<SSet>) -> Result<Self> {
    let inc = vertex_inclusion(&sub, &self.sset)?;
    Ok(Self::from_fn(sub, |m, idx| self.forms[m][inc[m][idx]].clone()))
  }
}

impl Cochain {
  /// Restriction to a vertex-labelled subcomplex of `sup`.
  pub fn restrict(&self, sup: &SSet, sub: &SSet) -> Result<Self> {
    let inc = vertex_inclusion(sub, sup)?;
    let idx = inc.get(self.degree).cloned().unwrap_or_default();
    Ok(Cochain {
      degree:   self.degree,
      values:   idx.iter().map(|&i| self.values[i].clone()).collect(),
      windings: idx.iter().map(|&i| self.windings[i]).collect(),
      lattice:  self.lattice,
    })
  }
}

/// Barycentric coordinate `t_j` on `Δ^m` in eliminated form.
pub fn barycentric(m: usize, j: usize) -> DiffForm {
  if j == 0 {
    (0..m).fold(DiffForm::constant(QC::one()), |acc, k| acc.sub_ref(&DiffForm::var(k)))
  } else {
    DiffForm::var(j - 1)
  }
}

/// Which lattice cochain values are taken modulo.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffLattice {
  /// Plain complex values.
  None,
  /// `Z(p) = (2πi)^p Z`.
  Z(usize),
  /// `R(p) = i^p R`.
  R(usize),
}

impl CoeffLattice {
  pub fn tag(&self) -> String {
    match self {
      CoeffLattice::None => "C".into(),
      CoeffLattice::Z(p) => format!("Z({p})"),
      CoeffLattice::R(p) => format!("R({p})"),
    }
  }
}

/// Cochain of one degree. Each value is `values[i] + windings[i]·(2πi)^p`
/// when the lattice is `Z(p)`; exact values never differ by a nonzero lattice
/// element, so equality modulo `Z(p)` reduces to equality of `values`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
  pub degree:   usize,
  pub values:   Vec<QC>,
  pub windings: Vec<i64>,
  pub lattice:  CoeffLattice,
}

impl Cochain {
  pub fn new(degree: usize, values: Vec<QC>, lattice: CoeffLattice) -> Self {
    let windings = vec![0; values.len()];
    Self { degree, values, windings, lattice }
  }

  pub fn zero(sset: &SSet, degree: usize, lattice: CoeffLattice) -> Self { Self::new(degree, vec![QC::zero(); sset.count(degree)], lattice) }

  pub fn random<R: Rng>(sset: &SSet, degree: usize, rng: &mut R) -> Self {
    Self::new(degree, (0..sset.count(degree)).map(|_| qc_int(rng.gen_range(-5..=5), rng.gen_range(-5..=5))).collect(), CoeffLattice::None)
  }

  pub fn with_lattice(mut self, lattice: CoeffLattice) -> Self {
    self.lattice = lattice;
    self
  }

  /// `(δc)(σ) = Σ_i (-1)^i c(d_i σ)`.
  pub fn coboundary(&self, sset: &SSet) -> Cochain {
    let m = self.degree + 1;
    let mut values = Vec::with_capacity(sset.count(m));
    let mut windings = Vec::with_capacity(sset.count(m));
    for idx in 0..sset.count(m) {
      let mut v = QC::zero();
      let mut w = 0i64;
      for i in 0..=m {
        let f = sset.face(m, idx, i);
        if i % 2 == 0 {
          v = v + self.values[f].clone();
          w += self.windings[f];
        } else {
          v = v - self.values[f].clone();
          w -= self.windings[f];
        }
      }
      values.push(v);
      windings.push(w);
    }
    Cochain { degree: m, values, windings, lattice: self.lattice }
  }

  fn zip(&self, other: &Self, sign: i64) -> Result<Cochain> {
    if self.degree != other.degree || self.values.len() != other.values.len() {
      return Err(Error::Incompatible("cochains of different shape".into()));
    }
    let s = qc_int(sign, 0);
    Ok(Cochain {
      degree:   self.degree,
      values:   self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + s.clone() * b.clone()).collect(),
      windings: self.windings.iter().zip(&other.windings).map(|(a, b)| a + sign * b).collect(),
      lattice:  self.lattice,
    })
  }

  pub fn add(&self, other: &Self) -> Result<Cochain> { self.zip(other, 1) }

  pub fn sub(&self, other: &Self) -> Result<Cochain> { self.zip(other, -1) }

  pub fn neg(&self) -> Cochain {
    Cochain {
      degree:   self.degree,
      values:   self.values.iter().map(|v| -v.clone()).collect(),
      windings: self.windings.iter().map(|w| -w).collect(),
      lattice:  self.lattice,
    }
  }

  pub fn is_zero(&self) -> bool { self.values.iter().all(|v| v.is_zero()) }

  /// Exact equality modulo the cochain's lattice.
  pub fn equal_mod_lattice(&self, other: &Self) -> bool {
    self.degree == other.degree
      && match self.lattice {
        CoeffLattice::R(p) => self.values.iter().zip(&other.values).all(|(a, b)| {
          let d = a.clone() - b.clone();
          if p % 2 == 0 { d.im.is_zero() } else { d.re.is_zero() }
        }),
        _ => self.values == other.values,
      }
  }

  /// Restriction to one end of a prism: the base cochain `σ ↦ c(σ × {ε})`.
  pub fn prism_end(&self, prism: &SSet, end: usize) -> Result<Cochain> {
    let base = prism.prism_base().ok_or_else(|| Error::Incompatible("missing prism structure".into()))?;
    let m = self.degree;
    let mut values = Vec::with_capacity(base.count(m));
    let mut windings = Vec::with_capacity(base.count(m));
    for c in base.cells(m) {
      let v: Vec<usize> = c.vertices.as_ref().unwrap().iter().map(|x| 2 * x + end).collect();
      let idx = prism.find(&v).ok_or_else(|| Error::Incompatible("prism cell missing".into()))?;
      values.push(self.values[idx].clone());
      windings.push(self.windings[idx]);
    }
    Ok(Cochain { degree: m, values, windings, lattice: self.lattice })
  }

  pub fn to_json(&self, sset: &SSet) -> Value {
    let mut out = serde_json::Map::new();
    for (idx, v) in self.values.iter().enumerate() {
      out.insert(sset.cells(self.degree)[idx].name.clone(), json!([rat_string(&v.re), rat_string(&v.im)]));
    }
    Value::Object(out)
  }
}

/// `(Bf)(σ) = f(P σ)` with `P[v_0..v_m] = Σ_i (-1)^i [2v_0..2v_i, 2v_i+1..2v_m+1]`.
pub fn cochain_b(prism: &SSet, f: &Cochain) -> Result<Cochain> {
  let base = prism.prism_base().ok_or_else(|| Error::Incompatible("missing prism structure".into()))?;
  if f.degree == 0 {
    return Err(Error::InvalidArgument("B lowers degree; 0-cochains have no image".into()));
  }
  let m = f.degree - 1;
  let mut values = Vec::with_capacity(base.count(m));
  let mut windings = Vec::with_capacity(base.count(m));
  for c in base.cells(m) {
    let mut v = QC::zero();
    let mut w = 0i64;
    for (i, s) in prism_simplices(c.vertices.as_ref().unwrap()).iter().enumerate() {
      let idx = prism.find(s).ok_or_else(|| Error::Incompatible("prism cell missing".into()))?;
      if i % 2 == 0 {
        v = v + f.values[idx].clone();
        w += f.windings[idx];
      } else {
        v = v - f.values[idx].clone();
        w -= f.windings[idx];
      }
    }
    values.push(v);
    windings.push(w);
  }
  Ok(Cochain { degree: m, values, windings, lattice: f.lattice })
}

/// `B(φ)` for a form on `I × patch` with the interval coordinate at `var`.
pub fn fiber_integrate_b(phi: &DiffForm, var: usize) -> DiffForm { phi.fiber_integrate(var) }

/// Distance from `z` to the nearest point of `(2πi)^p Z`.
pub fn distance_to_zp(z: Complex64, p: usize) -> f64 {
  let unit = Complex64::new(0.0, 2.0 * std::f64::consts::PI).powu(p as u32);
  let k = (z / unit).re.round();
  (z - unit * k).norm()
}

/// Matrix of forms, e.g. a connection on one cell.
pub type MatForm = SqMat<DiffForm>;

//! Small dense matrices over an arbitrary [`Ring`] and exact Gauss-Jordan
//! elimination over a [`Field`].

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::{signed_permutations, Field, Ring};

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SqMat<T> {
  n:    usize,
  data: Vec<T>,
}

impl<T: Ring> SqMat<T> {
  pub fn zeros(n: usize) -> Self { Self { n, data: vec![T::zero(); n * n] } }

  pub fn identity(n: usize) -> Self {
    let mut m = Self::zeros(n);
    for i in 0..n {
      m[(i, i)] = T::one();
    }
    m
  }

  pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
      for j in 0..n {
        data.push(f(i, j));
      }
    }
    Self { n, data }
  }

  pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    Self { n, data: rows.into_iter().flatten().collect() }
  }

  pub fn n(&self) -> usize { self.n }

  pub fn entries(&self) -> &[T] { &self.data }

  pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> SqMat<U> {
    SqMat { n: self.n, data: self.data.iter().map(f).collect() }
  }

  pub fn scale(&self, s: &T) -> Self { self.map(|x| s.clone() * x.clone()) }

  pub fn trace(&self) -> T { (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)].clone()) }

  pub fn is_zero(&self) -> bool { self.data.iter().all(|x| x.is_zero()) }

  /// Principal submatrix on the given (sorted) index set.
  pub fn principal(&self, idx: &[usize]) -> Self { SqMat::from_fn(idx.len(), |a, b| self[(idx[a], idx[b])].clone()) }

  /// Leibniz determinant; entries are multiplied in row order, so the result
  /// is meaningful for graded rings whenever at most one entry is odd.
  pub fn det(&self) -> T {
    let mut acc = T::zero();
    for (perm, sign) in signed_permutations(self.n) {
      let mut term = T::one();
      for (row, &col) in perm.iter().enumerate() {
        term = term * self[(row, col)].clone();
      }
      acc = if sign > 0 { acc + term } else { acc - term };
    }
    acc
  }
}

impl<T: Field> SqMat<T> {
  pub fn conj(&self) -> Self { self.map(|x| x.conj()) }

  pub fn conj_transpose(&self) -> Self { SqMat::from_fn(self.n, |i, j| self[(j, i)].conj()) }
}

impl<T> Index<(usize, usize)> for SqMat<T> {
  type Output = T;

  fn index(&self, (i, j): (usize, usize)) -> &T { &self.data[i * self.n + j] }
}

impl<T> IndexMut<(usize, usize)> for SqMat<T> {
  fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T { &mut self.data[i * self.n + j] }
}

impl<T: Ring> Add for &SqMat<T> {
  type Output = SqMat<T>;

  fn add(self, rhs: Self) -> SqMat<T> {
    assert_eq!(self.n, rhs.n);
    SqMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect() }
  }
}

impl<T: Ring> Sub for &SqMat<T> {
  type Output = SqMat<T>;

  fn sub(self, rhs: Self) -> SqMat<T> {
    assert_eq!(self.n, rhs.n);
    SqMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect() }
  }
}

impl<T: Ring> Neg for &SqMat<T> {
  type Output = SqMat<T>;

  fn neg(self) -> SqMat<T> { self.map(|x| -x.clone()) }
}

impl<T: Ring> Mul for &SqMat<T> {
  type Output = SqMat<T>;

  fn mul(self, rhs: Self) -> SqMat<T> {
    assert_eq!(self.n, rhs.n);
    let n = self.n;
    SqMat::from_fn(n, |i, j| {
      let mut acc = T::zero();
      for k in 0..n {
        let a = &self[(i, k)];
        let b = &rhs[(k, j)];
        if a.is_zero() || b.is_zero() {
          continue;
        }
        acc = acc + a.clone() * b.clone();
      }
      acc
    })
  }
}

/// Reduced row echelon form computed in place; returns the pivot columns.
pub fn rref<F: Field>(rows: &mut Vec<Vec<F>>, ncols: usize) -> Vec<usize> {
  let mut pivots = Vec::new();
  let mut r = 0;
  for c in 0..ncols {
    if r == rows.len() {
      break;
    }
    let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
    rows.swap(r, p);
    let inv = F::one() / rows[r][c].clone();
    for v in rows[r].iter_mut() {
      if !v.is_zero() {
        *v = v.clone() * inv.clone();
      }
    }
    let pivot_row = rows[r].clone();
    for (i, row) in rows.iter_mut().enumerate() {
      if i == r || row[c].is_zero() {
        continue;
      }
      let f = row[c].clone();
      for (v, pv) in row.iter_mut().zip(&pivot_row) {
        if !pv.is_zero() {
          *v = v.clone() - f.clone() * pv.clone();
        }
      }
    }
    pivots.push(c);
    r += 1;
  }
  rows.truncate(r.max(0));
  pivots
}

/// Basis of `{x : A x = 0}` for `A` given by rows with `ncols` columns.
pub fn null_space<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
  let mut m: Vec<Vec<F>> = rows.iter().filter(|r| r.iter().any(|v| !v.is_zero())).cloned().collect();
  let pivots = rref(&mut m, ncols);
  let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
  free
    .iter()
    .map(|&f| {
      let mut v = vec![F::zero(); ncols];
      v[f] = F::one();
      for (row, &pc) in m.iter().zip(&pivots) {
        v[pc] = -row[f].clone();
      }
      v
    })
    .collect()
}

/// One solution of `A x = b`, or `None` when the system is inconsistent.
pub fn solve_particular<F: Field>(rows: &[Vec<F>], b: &[F], ncols: usize) -> Option<Vec<F>> {
  let mut aug: Vec<Vec<F>> = rows
    .iter()
    .zip(b)
    .map(|(r, bi)| {
      let mut r = r.clone();
      r.push(bi.clone());
      r
    })
    .collect();
  let pivots = rref(&mut aug, ncols + 1);
  if pivots.last() == Some(&ncols) {
    return None;
  }
  let mut x = vec![F::zero(); ncols];
  for (row, &pc) in aug.iter().zip(&pivots) {
    x[pc] = row[ncols].clone();
  }
  Some(x)
}

/// Rank of the matrix given by rows.
pub fn rank<F: Field>(rows: &[Vec<F>], ncols: usize) -> usize {
  let mut m = rows.to_vec();
  rref(&mut m, ncols).len()
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn hdot<F: Field>(a: &[F], b: &[F]) -> F {
  a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + x.conj() * y.clone())
}

/// Orthogonal projection of `v` onto the complement of `span(basis)` under [`hdot`].
pub fn project_out<F: Field>(v: &[F], basis: &[Vec<F>]) -> Vec<F> {
  if basis.is_empty() {
    return v.to_vec();
  }
  let k = basis.len();
  let gram: Vec<Vec<F>> = (0..k).map(|i| (0..k).map(|j| hdot(&basis[i], &basis[j])).collect()).collect();
  let rhs: Vec<F> = basis.iter().map(|b| hdot(b, v)).collect();
  let y = solve_particular(&gram, &rhs, k).expect("Gram matrix of a basis is invertible");
  let mut out = v.to_vec();
  for (yi, b) in y.iter().zip(basis) {
    for (o, bj) in out.iter_mut().zip(b) {
      *o = o.clone() - yi.clone() * bj.clone();
    }
  }
  out
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{qc_int, QC};
  use num_traits::Zero;

  fn mat(rows: &[&[i64]]) -> Vec<Vec<QC>> { rows.iter().map(|r| r.iter().map(|&v| qc_int(v, 0)).collect()).collect() }

  #[test]
  fn null_space_of_rank_one() {
    let a = mat(&[&[1, 2, 3], &[2, 4, 6]]);
    let ns = null_space(&a, 3);
    assert_eq!(ns.len(), 2);
    for v in &ns {
      for row in &a {
        let s = row.iter().zip(v).fold(QC::zero(), |acc, (x, y)| acc + x * y);
        assert!(s.is_zero());
      }
    }
  }

  #[test]
  fn inconsistent_system() {
    let a = mat(&[&[1, 1], &[1, 1]]);
    let b = vec![qc_int(1, 0), qc_int(2, 0)];
    assert!(solve_particular(&a, &b, 2).is_none());
  }

  #[test]
  fn determinant_matches_hand_value() {
    let m = SqMat::from_rows(mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]));
    assert_eq!(m.det(), qc_int(18, 0));
  }

  #[test]
  fn projection_is_orthogonal() {
    let basis = vec![vec![qc_int(1, 0), qc_int(1, 0), qc_int(0, 0)]];
    let v = vec![qc_int(3, 0), qc_int(1, 0), qc_int(5, 0)];
    let p = project_out(&v, &basis);
    assert!(hdot(&basis[0], &p).is_zero());
    assert_eq!(p, vec![qc_int(1, 0), qc_int(-1, 0), qc_int(5, 0)]);
  }
}

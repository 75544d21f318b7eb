//! Scalar backends shared by the exact and floating-point layers.
//!
//! Exact computations run over [`QC`], complex numbers with arbitrary-precision
//! rational parts. Numerical computations run over `Complex64`. Both implement
//! [`Field`], so characteristic-polynomial and polarization code is written once.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// Exact rational number.
pub type Rational = BigRational;

/// Exact complex number with rational real and imaginary parts.
pub type QC = Complex<BigRational>;

/// Commutative (or graded-commutative, for even elements) coefficient ring.
pub trait Ring:
  Clone
  + Debug
  + PartialEq
  + Zero
  + One
  + Add<Output = Self>
  + Sub<Output = Self>
  + Mul<Output = Self>
  + Neg<Output = Self>
  + Send
  + Sync
{
  /// Embeds the rational `num/den`.
  fn from_ratio(num: i64, den: i64) -> Self;

  fn from_int(v: i64) -> Self { Self::from_ratio(v, 1) }
}

/// A field with complex conjugation.
pub trait Field: Ring + Div<Output = Self> {
  fn conj(&self) -> Self;

  /// True when arithmetic is exact and comparisons can be strict.
  fn is_exact() -> bool;

  fn to_c64(&self) -> Complex64;

  /// Magnitude used for tolerance tests. For exact fields only zero-ness matters.
  fn modulus(&self) -> f64 { self.to_c64().norm() }

  fn i() -> Self;
}

impl Ring for Complex64 {
  fn from_ratio(num: i64, den: i64) -> Self { Complex64::new(num as f64 / den as f64, 0.0) }
}

impl Field for Complex64 {
  fn conj(&self) -> Self { Complex::conj(self) }

  fn is_exact() -> bool { false }

  fn to_c64(&self) -> Complex64 { *self }

  fn i() -> Self { Complex64::new(0.0, 1.0) }
}

impl Ring for QC {
  fn from_ratio(num: i64, den: i64) -> Self { QC::new(ratio(num, den), Rational::zero()) }
}

impl Field for QC {
  fn conj(&self) -> Self { QC::new(self.re.clone(), -self.im.clone()) }

  fn is_exact() -> bool { true }

  fn to_c64(&self) -> Complex64 { Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im)) }

  fn i() -> Self { QC::new(Rational::zero(), Rational::one()) }
}

pub fn ratio(num: i64, den: i64) -> Rational { Rational::new(BigInt::from(num), BigInt::from(den)) }

pub fn rat_to_f64(r: &Rational) -> f64 { r.to_f64().unwrap_or(f64::NAN) }

/// `re + i·im` with integer parts.
pub fn qc_int(re: i64, im: i64) -> QC { QC::new(ratio(re, 1), ratio(im, 1)) }

pub fn qc_ratio(re: (i64, i64), im: (i64, i64)) -> QC { QC::new(ratio(re.0, re.1), ratio(im.0, im.1)) }

pub fn qc_real(r: Rational) -> QC { QC::new(r, Rational::zero()) }

/// `num/den` rendering that always includes a denominator.
pub fn rat_string(r: &Rational) -> String { format!("{}/{}", r.numer(), r.denom()) }

pub fn parse_rat(s: &str) -> Option<Rational> {
  let s = s.trim();
  match s.split_once('/') {
    Some((n, d)) => {
      let n: BigInt = n.trim().parse().ok()?;
      let d: BigInt = d.trim().parse().ok()?;
      if d.is_zero() {
        return None;
      }
      Some(Rational::new(n, d))
    },
    None => Some(Rational::from_integer(s.parse().ok()?)),
  }
}

/// Squared modulus in exact arithmetic.
pub fn qc_norm_sqr(z: &QC) -> Rational { &z.re * &z.re + &z.im * &z.im }

/// A random Gaussian-rational with small numerators, used by seeded audits.
pub fn random_qc<R: Rng>(rng: &mut R, bound: i64) -> QC {
  let den = rng.gen_range(1..=3);
  qc_ratio((rng.gen_range(-bound..=bound), den), (rng.gen_range(-bound..=bound), den))
}

pub fn max_abs_rational(values: impl IntoIterator<Item = Rational>) -> Rational {
  values.into_iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// `n!` as i64; callers stay well below overflow.
pub fn factorial(n: usize) -> i64 { (1..=n as i64).product::<i64>().max(1) }

/// Permutations of `0..k` paired with their signs (+1 / -1), in lexicographic order.
pub fn signed_permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
  fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i64)>) {
    let k = used.len();
    if prefix.len() == k {
      let mut inv = 0usize;
      for a in 0..k {
        for b in (a + 1)..k {
          if prefix[a] > prefix[b] {
            inv += 1;
          }
        }
      }
      out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
      return;
    }
    for v in 0..k {
      if !used[v] {
        used[v] = true;
        prefix.push(v);
        rec(prefix, used, out);
        prefix.pop();
        used[v] = false;
      }
    }
  }
  let mut out = Vec::new();
  rec(&mut Vec::new(), &mut vec![false; k], &mut out);
  out
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
  fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
      out.push(cur.clone());
      return;
    }
    for v in start..n {
      cur.push(v);
      rec(v + 1, n, k, cur, out);
      cur.pop();
    }
  }
  let mut out = Vec::new();
  rec(0, n, k, &mut Vec::new(), &mut out);
  out
}

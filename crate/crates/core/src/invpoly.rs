//! Invariant polynomials on `gl_n(C)`: the coefficients `C_k` of
//! `det(tI - A) = Σ C_k(A) t^{n-k}`, their polarizations, and the split
//! `C_p = P_p + Q_p` into the parts that are even and odd under
//! `X ↦ (-1)^p C_p(conj X)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SqMat;
use crate::scalar::{factorial, signed_permutations, subsets, Field, Ring};

/// All coefficients `C_0, …, C_n` of the characteristic polynomial, by the
/// Faddeev–LeVerrier recursion `M_k = A M_{k-1} + C_{k-1} I`, `C_k = -tr(A M_k)/k`.
pub fn char_poly_coeffs<F: Field>(a: &SqMat<F>) -> Vec<F> {
  let n = a.n();
  let mut coeffs = vec![F::one()];
  let mut m = SqMat::<F>::zeros(n);
  for k in 1..=n {
    let mut next = a * &m;
    for i in 0..n {
      next[(i, i)] = next[(i, i)].clone() + coeffs[k - 1].clone();
    }
    m = next;
    let c = -(a * &m).trace() / F::from_int(k as i64);
    coeffs.push(c);
  }
  coeffs
}

fn check_size<T: Ring>(n: usize, a: &SqMat<T>) -> Result<()> {
  if a.n() != n {
    return Err(Error::InvalidArgument(format!("expected a {n}x{n} matrix, got {0}x{0}", a.n())));
  }
  Ok(())
}

/// `C_k(A)`, the coefficient of `t^{n-k}` in `det(tI - A)`.
pub fn chern_poly<F: Field>(n: usize, k: usize, a: &SqMat<F>) -> Result<F> {
  check_size(n, a)?;
  if k > n {
    return Err(Error::InvalidArgument(format!("degree k={k} exceeds n={n}")));
  }
  Ok(char_poly_coeffs(a).swap_remove(k))
}

/// `(-1)^k` times the sum of the `k×k` principal minors. Works over any ring in
/// which the entries commute, e.g. even-degree differential forms.
pub fn chern_poly_minors<T: Ring>(k: usize, a: &SqMat<T>) -> T {
  let sum = subsets(a.n(), k).iter().fold(T::zero(), |acc, s| acc + a.principal(s).det());
  if k % 2 == 0 { sum } else { -sum }
}

/// Symmetric polarization of `C_p` by inclusion–exclusion,
/// `μ(X_1..X_p) = (1/p!) Σ_{∅≠S} (-1)^{p-|S|} C_p(Σ_{i∈S} X_i)`.
pub fn polarize<F: Field>(n: usize, p: usize, xs: &[SqMat<F>]) -> Result<F> {
  if xs.len() != p {
    return Err(Error::InvalidArgument(format!("polarization of C_{p} takes {p} arguments, got {}", xs.len())));
  }
  if p > n {
    return Err(Error::InvalidArgument(format!("degree p={p} exceeds n={n}")));
  }
  for x in xs {
    check_size(n, x)?;
  }
  let mut acc = F::zero();
  for mask in 1u32..(1 << p) {
    let mut sum = SqMat::<F>::zeros(n);
    for (i, x) in xs.iter().enumerate() {
      if mask & (1 << i) != 0 {
        sum = &sum + x;
      }
    }
    let c = char_poly_coeffs(&sum).swap_remove(p);
    acc = if (p - mask.count_ones() as usize) % 2 == 0 { acc + c } else { acc - c };
  }
  Ok(acc / F::from_int(factorial(p)))
}

/// The same polarization written as a mixed discriminant:
/// `μ = ((-1)^p/p!) Σ_{|S|=p} Σ_{β:S→[p]} Σ_σ sgn σ Π_s (X_{β(s)})_{s,σ(s)}`.
///
/// Each product is formed in increasing row order, so the result is valid
/// for form-valued matrices as long as at most one argument has odd degree.
pub fn mixed_polarize<T: Ring>(xs: &[SqMat<T>]) -> T {
  let p = xs.len();
  if p == 0 {
    return T::one();
  }
  let n = xs[0].n();
  let perms_p = signed_permutations(p);
  let mut acc = T::zero();
  for s in subsets(n, p) {
    for (beta, _) in &perms_p {
      for (sigma, sign) in &perms_p {
        let mut term = T::one();
        let mut zero = false;
        for a in 0..p {
          let e = &xs[beta[a]][(s[a], s[sigma[a]])];
          if e.is_zero() {
            zero = true;
            break;
          }
          term = term * e.clone();
        }
        if zero {
          continue;
        }
        acc = if *sign > 0 { acc + term } else { acc - term };
      }
    }
  }
  let scale = T::from_ratio(if p % 2 == 0 { 1 } else { -1 }, factorial(p));
  scale * acc
}

fn sign_p<F: Field>(p: usize) -> F { if p % 2 == 0 { F::one() } else { -F::one() } }

/// `(P_p(X), Q_p(X))` with `P_p = ½[C_p(X) + (-1)^p C_p(X̄)]` and `Q_p = C_p - P_p`.
pub fn pq_split<F: Field>(n: usize, p: usize, x: &SqMat<F>) -> Result<(F, F)> {
  let c = chern_poly(n, p, x)?;
  let cbar = chern_poly(n, p, &x.conj())?;
  let half = F::from_ratio(1, 2);
  let twisted = sign_p::<F>(p) * cbar;
  Ok((half.clone() * (c.clone() + twisted.clone()), half * (c - twisted)))
}

/// `Q_p(X, Y) = ½[C_p(X) - (-1)^p C_p(Y)]` on `gl_n ⊕ gl_n`.
pub fn qp_pair<F: Field>(n: usize, p: usize, x: &SqMat<F>, y: &SqMat<F>) -> Result<F> {
  let cx = chern_poly(n, p, x)?;
  let cy = chern_poly(n, p, y)?;
  Ok(F::from_ratio(1, 2) * (cx - sign_p::<F>(p) * cy))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolyKind {
  C,
  P,
  Q,
}

/// One of `C_p`, `P_p`, `Q_p` on `gl_n(C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantPolynomial {
  pub n:    usize,
  pub p:    usize,
  pub kind: PolyKind,
}

impl InvariantPolynomial {
  pub fn new(n: usize, p: usize, kind: PolyKind) -> Result<Self> {
    if n == 0 || p == 0 || p > n {
      return Err(Error::InvalidArgument(format!("need 1 <= p <= n, got n={n}, p={p}")));
    }
    Ok(Self { n, p, kind })
  }

  pub fn eval<F: Field>(&self, x: &SqMat<F>) -> Result<F> {
    match self.kind {
      PolyKind::C => chern_poly(self.n, self.p, x),
      PolyKind::P => pq_split(self.n, self.p, x).map(|v| v.0),
      PolyKind::Q => pq_split(self.n, self.p, x).map(|v| v.1),
    }
  }

  /// The real-multilinear symmetric form with `μ(X, …, X) = eval(X)`.
  pub fn polarize<F: Field>(&self, xs: &[SqMat<F>]) -> Result<F> {
    let mu = polarize(self.n, self.p, xs)?;
    if self.kind == PolyKind::C {
      return Ok(mu);
    }
    let conj: Vec<SqMat<F>> = xs.iter().map(|x| x.conj()).collect();
    let twisted = sign_p::<F>(self.p) * polarize(self.n, self.p, &conj)?;
    let half = F::from_ratio(1, 2);
    Ok(match self.kind {
      PolyKind::P => half * (mu + twisted),
      _ => half * (mu - twisted),
    })
  }
}

//! Gauss–Legendre rules on `[0, 1]` and their tensor products on cubes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
  pub nodes:   Vec<f64>,
  pub weights: Vec<f64>,
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
  let (mut p0, mut p1) = (1.0, x);
  if n == 0 {
    return (1.0, 0.0);
  }
  for k in 2..=n {
    let k = k as f64;
    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
  (p1, dp)
}

fn compute_rule(order: usize) -> GaussRule {
  let mut nodes = Vec::with_capacity(order);
  let mut weights = Vec::with_capacity(order);
  for i in 0..order {
    // Chebyshev-like initial guess, then Newton on P_n.
    let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
    for _ in 0..100 {
      let (p, dp) = legendre(order, x);
      let dx = p / dp;
      x -= dx;
      if dx.abs() < 1e-16 {
        break;
      }
    }
    let (_, dp) = legendre(order, x);
    let w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes.push(0.5 * (1.0 - x));
    weights.push(0.5 * w);
  }
  GaussRule { nodes, weights }
}

/// Cached rule of the given order (≥ 1).
pub fn gauss_legendre(order: usize) -> Arc<GaussRule> {
  static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
  let cache = CACHE.get_or_init(Default::default);
  let mut guard = cache.lock().unwrap();
  guard.entry(order).or_insert_with(|| Arc::new(compute_rule(order.max(1)))).clone()
}

/// Tensor-product nodes on `[0, 1]^m` in lexicographic order, with weights.
pub fn tensor_nodes(m: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
  let rule = gauss_legendre(order);
  let total = order.pow(m as u32);
  let mut out = Vec::with_capacity(total);
  for idx in 0..total {
    let mut rem = idx;
    let mut x = vec![0.0; m];
    let mut w = 1.0;
    for k in (0..m).rev() {
      let j = rem % order;
      rem /= order;
      x[k] = rule.nodes[j];
      w *= rule.weights[j];
    }
    out.push((x, w));
  }
  out
}

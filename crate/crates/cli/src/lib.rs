//! Command implementations behind the `charclass` binary. Each returns the
//! exact text the binary prints or writes, so library and CLI output match.

use std::sync::Arc;

use charclass::filtration::{parse_form, CoordSystem};
use charclass::matlie::{c64, CMat, MatrixJson};
use charclass::regulator::{self, BarCycle, QuadratureConfig};
use charclass::weil::{transgress_gl, LieData, WeilAlgebra};
use charclass::{Error, Result};
use serde_json::{json, Value};

/// Largest matrix size accepted by the commands.
pub const MAX_N: usize = 4;

pub fn check_np(n: usize, p: usize) -> Result<()> {
  if !(1 <= p && p <= n && n <= MAX_N) {
    return Err(Error::InvalidArgument(format!("need 1 <= p <= n <= {MAX_N}, got n={n}, p={p}")));
  }
  Ok(())
}

pub fn check_order(order: usize) -> Result<()> {
  if !(2..=64).contains(&order) {
    return Err(Error::InvalidArgument(format!("quadrature order must lie in [2, 64], got {order}")));
  }
  Ok(())
}

/// `T_p` as JSON plus a one-line residual report.
pub fn transgress(n: usize, p: usize) -> Result<(String, String)> {
  check_np(n, p)?;
  let r = transgress_gl(n, p)?;
  let w = WeilAlgebra::new(LieData::gl(n));
  let residual = w.d(&r.t).sub(&r.q);
  let line = if residual.is_zero() { "residual dT - Q: exact zero".to_string() } else { format!("residual dT - Q: {} nonzero terms", residual.len()) };
  let doc = json!({
    "n": n,
    "p": p,
    "basis": w.lie.basis_labels,
    "t": r.t.to_export(),
    "q": r.q.to_export(),
    "closed_basic_dimension": r.closed_dim,
    "residual": if residual.is_zero() { "exact zero" } else { "nonzero" },
  });
  Ok((serde_json::to_string_pretty(&doc).expect("plain data"), line))
}

fn entry(v: &Value) -> Result<[f64; 2]> {
  match v {
    Value::Number(x) => Ok([x.as_f64().unwrap_or(f64::NAN), 0.0]),
    Value::Array(a) if a.len() == 2 => Ok([a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN)]),
    _ => Err(Error::Format(format!("matrix entry must be a number or [re, im], got {v}"))),
  }
}

/// A matrix given as `{"n", "entries"}`, a bare number (1×1), or rows of
/// numbers / `[re, im]` pairs.
pub fn parse_matrix(v: &Value) -> Result<CMat> {
  match v {
    Value::Object(_) => {
      let j: MatrixJson = serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
      CMat::try_from(&j)
    },
    Value::Number(_) => {
      let [re, im] = entry(v)?;
      Ok(CMat::from_element(1, 1, c64(re, im)))
    },
    Value::Array(rows) => {
      let rows: Vec<Vec<[f64; 2]>> = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| Error::Format("matrix rows must be arrays".into()))?.iter().map(entry).collect())
        .collect::<Result<_>>()?;
      CMat::try_from(&MatrixJson { n: rows.len(), entries: rows })
    },
    _ => Err(Error::Format(format!("cannot read a matrix from {v}"))),
  }
}

/// Reads `[[M, M, ...], ...]`: one list of matrices per tuple.
pub fn parse_tuples(text: &str) -> Result<Vec<Vec<Value>>> {
  let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
  let outer = v.as_array().ok_or_else(|| Error::Format("expected a JSON array of tuples".into()))?;
  outer.iter().map(|t| t.as_array().cloned().ok_or_else(|| Error::Format("each tuple must be an array".into()))).collect()
}

/// 15 significant digits.
fn g15(x: f64) -> String { format!("{x:.14e}") }

/// CSV with one row per tuple: raw value, reduced value, and the estimate
/// `|I(order) - I(order/2)|`. Rows that fail leave the numbers empty and
/// report the error in the trailing status column.
pub fn cocycle_csv(n: usize, p: usize, tuples: &[Vec<Value>], cfg: &QuadratureConfig) -> Result<String> {
  check_np(n, p)?;
  check_order(cfg.order)?;
  let mut out = String::from("tuple_id,p,n,raw_re,raw_im,reduced,est_error,status\n");
  for (row, t) in tuples.iter().enumerate() {
    let result = t.iter().map(parse_matrix).collect::<Result<Vec<_>>>().and_then(|ms| {
      for m in &ms {
        charclass::matlie::check_invertible(m)?;
      }
      regulator::cs_cocycle_with_estimate(n, p, &ms, cfg)
    });
    match result {
      Ok((v, est)) => out.push_str(&format!("{row},{p},{n},{},{},{},{},ok\n", g15(v.raw.re), g15(v.raw.im), g15(v.reduced), g15(est))),
      Err(e) => out.push_str(&format!("{row},{p},{n},,,,,\"error: {}\"\n", e.to_string().replace('"', "'"))),
    }
  }
  Ok(out)
}

/// Reads `{"generators": [M, ...], "terms": [[coeff, [[i, j, ...], ...]], ...]}`.
pub fn parse_cycle(text: &str) -> Result<BarCycle> {
  let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
  let gens = v.get("generators").and_then(Value::as_array).ok_or_else(|| Error::Format("missing `generators`".into()))?;
  let gens = gens.iter().map(parse_matrix).collect::<Result<Vec<_>>>()?;
  let terms: Vec<(i64, Vec<Vec<usize>>)> =
    serde_json::from_value(v.get("terms").cloned().unwrap_or(Value::Null)).map_err(|e| Error::Format(format!("bad `terms`: {e}")))?;
  BarCycle::new(gens, terms)
}

pub fn cs_flat(cycle: &BarCycle, p: usize, cfg: &QuadratureConfig) -> Result<String> {
  check_np(cycle.n(), p)?;
  check_order(cfg.order)?;
  let v = regulator::evaluate_on_cycle(cycle, p, cfg)?;
  Ok(format!("raw = {} + {}i\nreduced mod R({p}) = {}\n", g15(v.raw.re), g15(v.raw.im), g15(v.reduced)))
}

/// Variables named in an expression, in order of first appearance.
pub fn infer_variables(expr: &str) -> Vec<String> {
  let mut out: Vec<String> = Vec::new();
  let mut cur = String::new();
  let flush = |cur: &mut String, out: &mut Vec<String>| {
    if !cur.is_empty() {
      let name = if cur.len() > 1 && cur.starts_with('d') { cur[1..].to_string() } else { cur.clone() };
      if name != "i" && !out.contains(&name) && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
        out.push(name);
      }
      cur.clear();
    }
  };
  for ch in expr.chars() {
    if ch.is_ascii_alphanumeric() || ch == '_' {
      if cur.is_empty() && ch.is_ascii_digit() {
        continue;
      }
      cur.push(ch);
    } else {
      flush(&mut cur, &mut out);
    }
  }
  flush(&mut cur, &mut out);
  out
}

/// Classification line for an expression; boundary variables default to all
/// variables in the expression.
pub fn filt(expr: &str, boundary: Option<Vec<String>>, interior: Vec<String>) -> Result<String> {
  let boundary = boundary.unwrap_or_else(|| infer_variables(expr).into_iter().filter(|v| !interior.contains(v)).collect());
  let b: Vec<&str> = boundary.iter().map(String::as_str).collect();
  let i: Vec<&str> = interior.iter().map(String::as_str).collect();
  let coords = Arc::new(CoordSystem::new(&b, &i)?);
  Ok(parse_form(expr, &coords)?.classify())
}

/// `expr` with a caret under byte position `pos`.
pub fn caret(expr: &str, pos: usize) -> String {
  let col = expr[..pos.min(expr.len())].chars().count();
  format!("  {expr}\n  {}^", " ".repeat(col))
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn matrices_in_all_shapes() {
    let a = parse_matrix(&json!(2.0)).unwrap();
    assert_eq!(a[(0, 0)], c64(2.0, 0.0));
    let b = parse_matrix(&json!([[1, [0, 1]], [0, 1]])).unwrap();
    assert_eq!(b[(0, 1)], c64(0.0, 1.0));
    let c = parse_matrix(&json!({"n": 1, "entries": [[[3.0, -1.0]]]})).unwrap();
    assert_eq!(c[(0, 0)], c64(3.0, -1.0));
    assert!(parse_matrix(&json!("x")).is_err());
  }

  #[test]
  fn cocycle_rows() {
    let cfg = QuadratureConfig::default();
    let tuples = parse_tuples("[[1, 2.0], [1, 0]]").unwrap();
    let csv = cocycle_csv(1, 1, &tuples, &cfg).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    let reduced: f64 = lines[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!((reduced - 2f64.ln()).abs() < 1e-8);
    assert!(lines[2].starts_with("1,1,1,,,,,\"error"));
    assert_eq!(cocycle_csv(1, 1, &[], &cfg).unwrap(), "tuple_id,p,n,raw_re,raw_im,reduced,est_error,status\n");
    let unitary = parse_tuples("[[1, [[[0.6, 0.8]]]]]").unwrap();
    let csv = cocycle_csv(1, 1, &unitary, &cfg).unwrap();
    let reduced: f64 = csv.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!(reduced.abs() < 1e-8);
  }

  #[test]
  fn filtration_lines() {
    assert_eq!(filt("dz/w^2", Some(vec!["z".into(), "w".into()]), vec![]).unwrap(), "dz/w^2 ∈ Q^1 \\ Q^2, F-level -1, log: no");
    assert_eq!(filt("dz/z", None, vec![]).unwrap(), "dz/z ∈ Q^1 \\ Q^2, F-level 1, log: yes");
    assert_eq!(filt("dz/z^3", None, vec![]).unwrap(), "dz/z^3 ∈ Q^0 \\ Q^1, F-level -1, log: no");
    assert_eq!(infer_variables("3 dz^dw/w^2 + i z"), vec!["z", "w"]);
    assert!(matches!(filt("dz +", None, vec![]), Err(Error::Syntax { pos: 4, .. })));
  }

  #[test]
  fn transgress_output() {
    let (doc, line) = transgress(1, 1).unwrap();
    assert_eq!(line, "residual dT - Q: exact zero");
    let v: Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(v["t"].as_array().unwrap().len(), 1);
    assert!(transgress(1, 2).is_err());
  }

  #[test]
  fn flat_cycle() {
    let cycle = parse_cycle(r#"{"generators": [[[[2.0, 0.0]]]], "terms": [[1, [[0]]]]}"#).unwrap();
    let out = cs_flat(&cycle, 1, &QuadratureConfig::default()).unwrap();
    assert!(out.contains("reduced mod R(1) = 6.93147180"));
  }
}

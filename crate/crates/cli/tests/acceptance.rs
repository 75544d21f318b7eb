//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use charclass::cwchar::{self, CSRep, SimpConnection};
use charclass::filtration::{parse_form, CoordSystem};
use charclass::invpoly::{chern_poly, chern_poly_minors, pq_split, qp_pair, InvariantPolynomial, PolyKind};
use charclass::linalg::SqMat;
use charclass::matlie::{c64, identity, random_gl, CMat};
use charclass::regulator::{self, QuadratureConfig};
use charclass::scalar::{qc_int, random_qc, Ring, QC};
use charclass::simforms::{self, Cochain, DiffForm, PolyForm, SSet};
use charclass::verify::{converges, monomial_corpus};
use charclass::weil::{restrict_to_un, transgress_gl, LieData, WeilAlgebra, WeilElement};
use charclass::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
  passed: bool,
  detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome { Outcome { passed, detail: detail.into() } }

fn rng(salt: u64) -> ChaCha8Rng { ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt) }

fn zero() -> QC { qc_int(0, 0) }

fn criterion_1() -> Result<Outcome> {
  let mut rng = rng(1);
  let mut failures = Vec::new();
  for n in 1..=2 {
    let w = WeilAlgebra::new(LieData::gl(n));
    for _ in 0..20 {
      let e = WeilElement::random(&mut rng, w.dim(), 5, 4);
      if !w.d(&w.d(&e)).is_zero() {
        failures.push(format!("d^2 on W(gl_{n})"));
        break;
      }
    }
  }
  for (n, p) in [(1, 1), (2, 1), (2, 2)] {
    let r = transgress_gl(n, p)?;
    let w = WeilAlgebra::new(LieData::gl(n));
    if !w.d(&r.t).sub(&r.q).is_zero() {
      failures.push(format!("dT - Q at ({n},{p})"));
    }
    if !w.is_basic(&r.t) {
      failures.push(format!("T not basic at ({n},{p})"));
    }
    let u = WeilAlgebra::new(LieData::u(n));
    let lhs = u.d(&restrict_to_un(&r.t, n)).scale(&qc_int(2, 0));
    let rhs = u.embed_invariant(&InvariantPolynomial::new(n, p, PolyKind::C)?)?;
    if !lhs.sub(&rhs).is_zero() {
      failures.push(format!("2dT - C at ({n},{p})"));
    }
  }
  Ok(outcome(failures.is_empty(), if failures.is_empty() { "all residuals identically zero".into() } else { failures.join("; ") }))
}

fn criterion_2() -> Result<Outcome> {
  let mut rng = rng(2);
  let mut failures = Vec::new();
  for n in 1..=3 {
    for p in 1..=n {
      for _ in 0..100 {
        let x: SqMat<QC> = SqMat::from_fn(n, |_, _| random_qc(&mut rng, 5));
        // Oracle: C_p as signed sums of principal minors, independent of the
        // Faddeev-LeVerrier recursion used by the library.
        let c = chern_poly_minors(p, &x);
        let c_bar = chern_poly_minors(p, &x.conj());
        let sign = if p % 2 == 0 { qc_int(1, 0) } else { qc_int(-1, 0) };
        let half = QC::from_ratio(1, 2);
        let q_oracle = half.clone() * (c.clone() - sign.clone() * c_bar.clone());
        let p_oracle = half * (c.clone() + sign * c_bar);
        let (pp, qq) = pq_split(n, p, &x)?;
        if pp != p_oracle || qq != q_oracle || chern_poly(n, p, &x)? != c {
          failures.push(format!("P/Q split at ({n},{p})"));
        }
        let skew = &x - &x.conj_transpose();
        if pq_split(n, p, &skew)?.1 != zero() {
          failures.push(format!("Q on u_{n} at p={p}"));
        }
        if c.clone() != qc_int(2, 0) * qp_pair(n, p, &x, &SqMat::zeros(n))? {
          failures.push(format!("C - 2Q(X,0) at ({n},{p})"));
        }
        let (p_ok, q_ok) = if p % 2 == 0 { (pp.im == zero().im, qq.re == zero().re) } else { (pp.re == zero().re, qq.im == zero().im) };
        if !(p_ok && q_ok) {
          failures.push(format!("lattice membership at ({n},{p})"));
        }
      }
    }
  }
  failures.dedup();
  Ok(outcome(failures.is_empty(), if failures.is_empty() { "exact on 100 matrices per (n, p)".into() } else { failures.join("; ") }))
}

fn scalar(re: f64, im: f64) -> CMat { CMat::from_element(1, 1, c64(re, im)) }

fn criterion_3() -> Result<Outcome> {
  let mut rng = rng(3);
  let cfg = QuadratureConfig::default();
  let (mut anchor, mut borel, mut block) = (0.0f64, true, 0.0f64);
  for _ in 0..100 {
    let r: f64 = rng.gen_range(0.05..20.0);
    let th: f64 = rng.gen_range(-3.1..3.1);
    let (re, im) = (r * th.cos(), r * th.sin());
    let tuple = [scalar(1.0, 0.0), scalar(re, im)];
    let v = regulator::cs_cocycle(1, 1, &tuple, &cfg)?;
    anchor = anchor.max((v.reduced - r.ln()).abs());
    borel &= regulator::borel_cocycle(1, 1, &tuple, &cfg)?.raw == v.raw * 2.0;
    let mut d = identity(2);
    d[(0, 0)] = c64(re, im);
    let big = regulator::cs_cocycle(2, 1, &[identity(2), d], &cfg)?;
    block = block.max((big.reduced - v.reduced).abs());
  }
  let ok = anchor < 1e-8 && borel && block < 1e-7;
  Ok(outcome(ok, format!("max |cs - log|g|| = {anchor:.2e}, borel = 2 cs exactly: {borel}, block stability {block:.2e}")))
}

fn criterion_4() -> Result<Outcome> {
  let mut rng = rng(4);
  let mut ok = true;
  let mut parts = Vec::new();
  for (n, p, count) in [(1usize, 1usize, 5usize), (2, 1, 5), (2, 2, 5)] {
    let form = regulator::transgression_form(n, p)?;
    let (mut r16, mut r32) = (0.0f64, 0.0f64);
    for _ in 0..count {
      let tuple: Vec<CMat> = (0..2 * p + 1).map(|_| random_gl(&mut rng, n)).collect();
      r16 = r16.max(regulator::coboundary_of_integral(&form, &tuple, &QuadratureConfig::with_order(16))?.norm());
      r32 = r32.max(regulator::coboundary_of_integral(&form, &tuple, &QuadratureConfig::with_order(32))?.norm());
    }
    let bound = if p == 2 { 5e-4 } else { 5e-5 };
    let good = r16 < bound && converges(r16, r32);
    ok &= good;
    parts.push(format!("delta({n},{p}) {r16:.1e}->{r32:.1e}"));
  }

  let cfg = QuadratureConfig::default();
  let mut invariance = 0.0f64;
  for (n, p) in [(1usize, 1usize), (2, 1), (2, 2)] {
    let gs: Vec<CMat> = (0..2 * p).map(|_| random_gl(&mut rng, n)).collect();
    let h = random_gl(&mut rng, n);
    let moved: Vec<CMat> = gs.iter().map(|g| &h * g).collect();
    let a = regulator::cs_cocycle(n, p, &gs, &cfg)?;
    let b = regulator::cs_cocycle(n, p, &moved, &cfg)?;
    invariance = invariance.max((a.raw - b.raw).norm());
  }
  ok &= invariance < 1e-6;
  parts.push(format!("invariance {invariance:.1e}"));

  // Min-norm T_p against T_p plus a random closed basic element.
  let mut spread = 0.0f64;
  for (n, p) in [(1usize, 1usize), (2, 1), (2, 2)] {
    let base = regulator::transgression_form(n, p)?;
    let dim = transgress_gl(n, p)?.closed_dim;
    let coeffs: Vec<QC> = (0..dim).map(|_| random_qc(&mut rng, 7)).collect();
    let shifted = regulator::shifted_transgression(n, p, &coeffs)?;
    for _ in 0..3 {
      let tuple: Vec<CMat> = (0..2 * p).map(|_| random_gl(&mut rng, n)).collect();
      let a = regulator::cs_cocycle_with_form(&base, &tuple, &cfg)?;
      let b = regulator::cs_cocycle_with_form(&shifted, &tuple, &cfg)?;
      spread = spread.max((a.reduced - b.reduced).abs());
    }
  }
  // dT = Q has a unique solution for n <= 2; (3,3) is the first case with
  // alternatives, and their θ-only parts (what gets integrated) must vanish.
  let r33 = transgress_gl(3, 3)?;
  let audit = r33.alternates.iter().all(|e| e.theta_only().is_zero());
  ok &= spread < 2e-6 && audit;
  parts.push(format!("solution spread {spread:.1e}, (3,3) alternates {} with zero form part: {audit}", r33.closed_dim));
  Ok(outcome(ok, parts.join(", ")))
}

fn criterion_5() -> Result<Outcome> {
  let mut rng = rng(5);
  let mut failures: Vec<String> = Vec::new();

  for _ in 0..20 {
    let k = rng.gen_range(0..=3);
    let phi = DiffForm::random(&mut rng, 3, k, 3, 4);
    let lhs = phi.d().fiber_integrate(0).add_ref(&phi.fiber_integrate(0).d());
    let rhs = phi.evaluate_var(0, &qc_int(1, 0)).sub_ref(&phi.evaluate_var(0, &zero()));
    if lhs != rhs {
      failures.push("fiber homotopy on forms".into());
      break;
    }
  }

  let sphere = Arc::new(SSet::simplex_boundary(3));
  let prism = SSet::prism(&sphere)?;
  for k in 0..=3 {
    let f = Cochain::random(&prism, k, &mut rng);
    let mut lhs = simforms::cochain_b(&prism, &f.coboundary(&prism))?;
    if k >= 1 {
      lhs = lhs.add(&simforms::cochain_b(&prism, &f)?.coboundary(&sphere))?;
    }
    if lhs != f.prism_end(&prism, 1)?.sub(&f.prism_end(&prism, 0)?)? {
      failures.push(format!("prism cochain homotopy in degree {k}"));
    }
  }
  for k in 0..=1 {
    let f = PolyForm::random(sphere.clone(), &mut rng, k);
    if f.integrate_to_cochain(k).coboundary(&sphere) != f.d().integrate_to_cochain(k + 1) {
      failures.push(format!("integration chain map in degree {k}"));
    }
  }

  // ∂Δ³ has 14 cells and Δ³ 15; the degree-4 identities for p = 2 are empty
  // there, so Δ⁴ (31 cells) is added to exercise them.
  let cases: [(usize, usize, Arc<SSet>); 5] = [
    (1, 1, sphere.clone()),
    (2, 1, sphere.clone()),
    (2, 1, Arc::new(SSet::simplex(2))),
    (2, 2, Arc::new(SSet::simplex(3))),
    (2, 2, Arc::new(SSet::simplex(4))),
  ];
  let mut cells = Vec::new();
  for (n, p, sset) in cases {
    let tag = format!("({n},{p}) on {} cells", sset.num_cells());
    cells.push(sset.num_cells());
    let c0 = SimpConnection::random(sset.clone(), n, &mut rng);
    let c1 = SimpConnection::random(sset.clone(), n, &mut rng);
    let ch0 = cwchar::chern_form(&c0, p)?;
    let ch1 = cwchar::chern_form(&c1, p)?;
    if !(ch0.d().is_zero() && ch1.d().is_zero()) {
      failures.push(format!("Chern form closedness {tag}"));
    }
    let eta = cwchar::eta_p(&c0, &c1, p)?;
    if eta.d() != ch1.sub(&ch0)? {
      failures.push(format!("d eta {tag}"));
    }
    if eta != cwchar::eta_p_via_prism(&c0, &c1, p)? {
      failures.push(format!("eta via prism {tag}"));
    }
    if cwchar::curvature_splitting_check(&c0, &c1)?.residual_terms != 0 {
      failures.push(format!("curvature splitting {tag}"));
    }
    let r0 = CSRep::from_connection(&c0, p)?;
    let r1 = cwchar::connection_change(&r0, &c0, &c1)?;
    if !(r0.is_valid() && r1.is_valid() && cwchar::d_difference_holds(&r0, &r1, &eta)?) {
      failures.push(format!("difference = D(eta, 0) {tag}"));
    }
    if !cwchar::db_image(&r1.with_fp(true))?.is_cocycle() {
      failures.push(format!("cone cocycle {tag}"));
    }
  }
  Ok(outcome(
    failures.is_empty(),
    if failures.is_empty() { format!("all residuals identically zero; cell counts {cells:?}") } else { failures.join("; ") },
  ))
}

fn criterion_6() -> Result<Outcome> {
  let mut failures = Vec::new();
  let expected = [
    ("dz/w^2", "z,w", "dz/w^2 ∈ Q^1 \\ Q^2, F-level -1, log: no"),
    ("dz/z^2", "z", "dz/z^2 ∈ Q^0 \\ Q^1, F-level -1, log: no"),
    ("dw^dz/w^2", "z,w", "-dz^dw/w^2 ∈ Q^1 \\ Q^2, F-level -1, log: no"),
    ("dw", "z,w", "dw ∈ Q^1 \\ Q^2, F-level 1, log: yes"),
    ("dz/z", "z", "dz/z ∈ Q^1 \\ Q^2, F-level 1, log: yes"),
    ("z^2", "z", "z^2 ∈ Q^0 \\ Q^1, F-level 0, log: yes"),
    ("dz/z^3", "z", "dz/z^3 ∈ Q^0 \\ Q^1, F-level -1, log: no"),
  ];
  for (expr, boundary, line) in expected {
    let b = boundary.split(',').map(String::from).collect();
    let got = charclass_cli::filt(expr, Some(b), vec![])?;
    if got != line {
      failures.push(format!("{expr}: got `{got}`"));
    }
  }
  let zw = Arc::new(CoordSystem::new(&["z", "w"], &[])?);
  if parse_form("dz/w^2", &zw)?.restrict_diagonal("z", "w", "z")?.q_level() != Some(0) {
    failures.push("diagonal restriction".into());
  }

  let systems: [(&[&str], &[&str]); 5] = [(&["z"], &[]), (&["z", "w"], &[]), (&["z"], &["u"]), (&["z", "w"], &["u"]), (&["x", "y", "z"], &[])];
  let mut total = 0;
  for (b, i) in systems {
    let coords = Arc::new(CoordSystem::new(b, i)?);
    for f in monomial_corpus(&coords) {
      total += 1;
      let df = f.d();
      if let (Some(q0), Some(q1)) = (f.q_level(), df.q_level()) {
        if q1 < q0 {
          failures.push(format!("d lowers Q-level of {f}"));
        }
      }
    }
  }
  Ok(outcome(failures.is_empty(), if failures.is_empty() { format!("classifications exact; {total} corpus monomials") } else { failures.join("; ") }))
}

fn criterion_7() -> Result<Outcome> {
  let run = || {
    Command::new(env!("CARGO_BIN_EXE_charclass"))
      .args(["verify", "--suite", "all", "--seed", "11"])
      .output()
      .expect("binary runs")
  };
  let a = run();
  let b = run();
  let same = a.stdout == b.stdout && !a.stdout.is_empty();
  Ok(outcome(same && a.status.success(), format!("{} bytes, identical: {same}, exit {:?}", a.stdout.len(), a.status.code())))
}

fn main() {
  type Criterion = fn() -> Result<Outcome>;
  let criteria: [(Criterion, Duration); 7] = [
    (criterion_1, Duration::from_secs(10)),
    (criterion_2, Duration::from_secs(5)),
    (criterion_3, Duration::from_secs(30)),
    (criterion_4, Duration::from_secs(600)),
    (criterion_5, Duration::from_secs(60)),
    (criterion_6, Duration::from_secs(5)),
    (criterion_7, Duration::from_secs(120)),
  ];
  let mut all = true;
  for (i, (f, budget)) in criteria.iter().enumerate() {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let (passed, detail) = match result {
      Ok(o) => (o.passed && took <= *budget, o.detail),
      Err(e) => (false, format!("error: {e}")),
    };
    all &= passed;
    let status = if passed { "PASS" } else { "FAIL" };
    println!("criterion {}: {status} ({:.1}s of {}s) {detail}", i + 1, took.as_secs_f64(), budget.as_secs());
  }
  if !all {
    std::process::exit(1);
  }
}

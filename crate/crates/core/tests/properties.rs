use std::sync::Arc;

use charclass::filtration::{parse_form, CoordSystem, LogMeroForm};
use charclass::matlie::{c64, pd_exp, pd_log, random_hermitian, CMat};
use charclass::regulator::{self, reduce_mod_rp, QuadratureConfig};
use charclass::scalar::qc_int;
use charclass::simforms::{DiffForm, PolyForm, SSet};
use charclass::weil::{LieData, WeilAlgebra, WeilElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sign(k: usize) -> charclass::scalar::QC { if k % 2 == 0 { qc_int(1, 0) } else { qc_int(-1, 0) } }

proptest! {
  #![proptest_config(ProptestConfig::with_cases(32))]

  #[test]
  fn forms_d_squared_and_leibniz(seed in any::<u64>(), ka in 0usize..=2, kb in 0usize..=2) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DiffForm::random(&mut rng, 3, ka, 2, 3);
    let b = DiffForm::random(&mut rng, 3, kb, 2, 3);
    prop_assert!(a.d().d().is_empty());
    prop_assert_eq!(a.wedge(&b).d(), a.d().wedge(&b).add_ref(&a.wedge(&b.d()).scale(&sign(ka))));
    // Graded commutativity.
    prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale(&sign(ka * kb)));
  }

  #[test]
  fn stokes_on_a_triangle(seed in any::<u64>()) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tri = Arc::new(SSet::simplex(2));
    let f = PolyForm::random(tri.clone(), &mut rng, 1);
    prop_assert_eq!(f.integrate_to_cochain(1).coboundary(&tri), f.d().integrate_to_cochain(2));
  }

  #[test]
  fn weil_d_squared(seed in any::<u64>(), n in 1usize..=2) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = WeilAlgebra::new(LieData::gl(n));
    let e = WeilElement::random(&mut rng, w.dim(), 4, 3);
    prop_assert!(w.d(&w.d(&e)).is_zero());
  }

  #[test]
  fn exp_log_round_trip(seed in any::<u64>(), n in 1usize..=3) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_hermitian(&mut rng, n, 1.0);
    let back = pd_log(&pd_exp(&h).unwrap());
    prop_assert!((back - &h).norm() < 1e-10);
  }

  #[test]
  fn degree_one_anchor(r in 0.05f64..20.0, th in -3.1f64..3.1) {
    let g = CMat::from_element(1, 1, c64(r * th.cos(), r * th.sin()));
    let one = CMat::from_element(1, 1, c64(1.0, 0.0));
    let v = regulator::cs_cocycle(1, 1, &[one, g], &QuadratureConfig::with_order(8)).unwrap();
    prop_assert!((v.reduced - r.ln()).abs() < 1e-8);
  }

  #[test]
  fn reduction_kills_the_lattice(re in -10f64..10.0, im in -10f64..10.0, p in 1usize..=4, t in -5f64..5.0) {
    let z = c64(re, im);
    // R(p) = i^p R is the kernel; the i^{p-1} coefficient survives.
    prop_assert!((reduce_mod_rp(z + regulator::i_pow(p) * t, p) - reduce_mod_rp(z, p)).abs() < 1e-9);
    prop_assert!((reduce_mod_rp(z + regulator::i_pow(p - 1) * t, p) - reduce_mod_rp(z, p) - t).abs() < 1e-9);
  }

  #[test]
  fn filtration_monomials(a in -3i32..=3, b in -3i32..=3, mask in 0u32..4) {
    let coords = Arc::new(CoordSystem::new(&["z", "w"], &[]).unwrap());
    let wedge: Vec<usize> = (0..2).filter(|i| mask & (1 << i) != 0).collect();
    let f = LogMeroForm::monomial(coords.clone(), qc_int(2, -1), vec![a, b], &wedge).unwrap();
    prop_assert_eq!(parse_form(&f.to_string(), &coords).unwrap(), f.clone());
    if let (Some(q0), Some(q1)) = (f.q_level(), f.d().q_level()) {
      prop_assert!(q1 >= q0);
    }
    if f.is_log() {
      prop_assert!(f.q_level().unwrap() as i64 >= f.f_level().unwrap());
    }
  }
}

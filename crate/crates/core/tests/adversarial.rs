use std::sync::Arc;

use ballquad::adversarial::{build_bump_system, certify_norm, fool_rule, BumpSystem, FoolingFunction};
use ballquad::cubature::build_rule;
use ballquad::domain::probe_grid;
use ballquad::randomized::largest_level;
use ballquad::WeightConfig;

fn single(system: &Arc<BumpSystem>, j: usize, sign: i8) -> FoolingFunction {
    let mut signs = vec![0; system.len()];
    signs[j] = sign;
    FoolingFunction::new(Arc::clone(system), signs, 1.0).unwrap()
}

#[test]
fn bumps_peak_at_centers_and_are_disjoint() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let system = build_bump_system(&cfg, 16).unwrap();
    for (j, c) in system.centers.iter().enumerate() {
        assert_eq!(system.bump(j, c), 1.0);
    }
    for x in probe_grid::<f64>(2, 120) {
        let live = (0..system.len()).filter(|&j| system.bump(j, x.coords()) > 0.0).count();
        assert!(live <= 1, "{x:?}");
        if live == 1 {
            assert!(system.locate(x.coords()).is_some());
        }
    }
}

#[test]
fn l1_norm_scales_like_the_support_volume() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let scaled: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&m| {
            let system = Arc::new(BumpSystem::with_scale(2, m, 1).unwrap());
            single(&system, 0, 1).integral(&cfg) * (m * m) as f64
        })
        .collect();
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 2.0, "{scaled:?}");
}

#[test]
fn smoothness_norm_scales_like_m_to_the_r() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let r = 2.0;
    let scaled: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&m| {
            let system = Arc::new(BumpSystem::with_scale(2, m, 1).unwrap());
            certify_norm(&cfg, &single(&system, 0, 1), r, f64::INFINITY).unwrap() / (m as f64).powf(r)
        })
        .collect();
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 3.0, "{scaled:?}");
}

#[test]
fn norm_of_zero_and_sign_flips() {
    let cfg = WeightConfig::new(2, 1.5).unwrap();
    let system = Arc::new(build_bump_system(&cfg, 4).unwrap());
    let zero = FoolingFunction::new(Arc::clone(&system), vec![0; system.len()], 1.0).unwrap();
    assert_eq!(certify_norm(&cfg, &zero, 2.0, 2.0).unwrap(), 0.0);
    let signs: Vec<i8> = (0..system.len()).map(|j| [1, -1, 0][j % 3]).collect();
    let flipped: Vec<i8> = signs.iter().map(|s| -s).collect();
    for p in [1.0, 2.0, f64::INFINITY] {
        let a = certify_norm(&cfg, &FoolingFunction::new(Arc::clone(&system), signs.clone(), 1.0).unwrap(), 2.0, p).unwrap();
        let b = certify_norm(&cfg, &FoolingFunction::new(Arc::clone(&system), flipped.clone(), 1.0).unwrap(), 2.0, p).unwrap();
        assert!(a > 0.0 && (a - b).abs() <= 1e-12 * a, "p={p}: {a} {b}");
    }
    assert!(FoolingFunction::new(Arc::clone(&system), vec![2; system.len()], 1.0).is_err());
    assert!(FoolingFunction::new(system, vec![1; 3], 1.0).is_err());
}

#[test]
fn fooling_functions_vanish_on_the_rule() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let mut witnesses = Vec::new();
    for n in [16, 32, 64, 128] {
        let rule = build_rule(&cfg, 3 * largest_level(2, n).unwrap()).unwrap();
        let out = fool_rule(&cfg, &rule.nodes, n, 2.0, f64::INFINITY).unwrap();
        assert!(rule.nodes.iter().all(|x| out.function.eval(x.coords()) == 0.0));
        assert_eq!(rule.integrate(&|x: &[f64]| out.function.eval(x)), 0.0);
        assert!(out.witness > 0.0);
        assert!(out.function.active().count() >= 3 * n);
        witnesses.push(out.witness);
    }
    // doubling n scales the witness by about 2^{-r/d} = 1/2
    for w in witnesses.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.25..=1.0).contains(&ratio), "{witnesses:?}");
    }
}

#[test]
fn rules_larger_than_the_budget_are_rejected() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let rule = build_rule(&cfg, 12).unwrap();
    assert!(fool_rule(&cfg, &rule.nodes, rule.len() - 1, 2.0, 2.0).is_err());
}

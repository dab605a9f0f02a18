mod common;

use ballquad::cubature::build_rule;
use ballquad::domain::probe_grid;
use ballquad::filtering::{filtered_kernel_eval, v_l_apply};
use ballquad::harness::{certify_lacunary_decay, lacunary, ridge_direction};
use ballquad::orthopoly::chebyshev_t;
use ballquad::{BandlimitedFunction, Filter, FilteredKernel, WeightConfig};
use common::{ball_probes, oracle_kernel, sup_norm, RandomPoly};

#[test]
fn level_two_kernel_on_the_interval_matches_oracle() {
    let cfg = WeightConfig::new(1, 0.5).unwrap();
    let k = FilteredKernel::new(&cfg, 2, Filter).unwrap();
    let pts = ball_probes(1, 9);
    for x in &pts {
        for y in pts.iter().step_by(2) {
            let oracle: f64 = (0..4).map(|n| Filter.eval(n as f64 / 2.0) * oracle_kernel(1, 0.5, n, x, y)).sum();
            let got = filtered_kernel_eval(&k, x, y);
            assert!((got - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{x:?} {y:?}");
        }
    }
}

#[test]
fn v_l_reproduces_random_polynomials() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let probes = ball_probes(2, 30);
    for level in [2, 8] {
        let rule = build_rule(&cfg, 3 * level).unwrap();
        for seed in 0..100 {
            let p = RandomPoly::new(2, level, seed);
            let q = p.clone();
            let f = BandlimitedFunction::new(level, "P", move |x: &[f64]| q.eval(x));
            let v = v_l_apply(&f, level, &Filter, &rule).unwrap();
            assert!(sup_norm(|x| v.eval(x) - p.eval(x), &probes) <= 1e-9 * sup_norm(|x| p.eval(x), &probes).max(1.0));
        }
    }
    let rule = build_rule(&cfg, 7).unwrap();
    let one = v_l_apply(&BandlimitedFunction::constant(1.0), 4, &Filter, &rule).unwrap();
    assert!((one.eval(&[0.3, -0.3]) - 1.0).abs() < 1e-13);
}

#[test]
fn v_l_is_uniformly_bounded_on_a_stress_family() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let probes: Vec<Vec<f64>> = probe_grid::<f64>(2, 40).into_iter().map(|p| p.into_coords()).collect();
    let mut ratios = Vec::new();
    for level in [2, 4, 8, 16] {
        let degree = 3 * level;
        let rule = build_rule(&cfg, degree + 2 * level - 1).unwrap();
        let mut worst = 0.0_f64;
        for j in 0..4 {
            let a = ridge_direction(2, j);
            let m = degree - j;
            let f = BandlimitedFunction::new(degree, "ridge", move |x: &[f64]| chebyshev_t(m, a[0] * x[0] + a[1] * x[1]));
            let v = v_l_apply(&f, level, &Filter, &rule).unwrap();
            worst = worst.max(sup_norm(|x| v.eval(x), &probes) / sup_norm(|x| f.eval(x), &probes));
        }
        ratios.push(worst);
    }
    assert!(ratios.iter().all(|&c| c < 3.0), "{ratios:?}");
}

#[test]
fn kernel_l1_norm_is_bounded() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let mut norms = Vec::new();
    for level in [2, 4, 8, 16] {
        let k = FilteredKernel::new(&cfg, level, Filter).unwrap();
        let rule = build_rule(&cfg, 8 * level + 24).unwrap();
        let worst = [[0.0, 0.0], [0.5, 0.2], [0.0, 0.99], [1.0, 0.0]]
            .iter()
            .map(|x| rule.integrate(&|y: &[f64]| k.eval(x, y).abs()))
            .fold(0.0, f64::max);
        assert!(worst >= 1.0 - 1e-9);
        norms.push(worst);
    }
    let hi = norms.iter().copied().fold(0.0, f64::max);
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 2.0, "{norms:?}");
}

#[test]
fn lacunary_approximation_errors_decay_at_the_nominal_rate() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    for r in [2.0, 3.0] {
        let cert = certify_lacunary_decay(&cfg, &lacunary(2, r), 5, 40).unwrap();
        assert!((r - 0.3..=r + 0.3).contains(&cert.exponent), "r={r}: {}", cert.exponent);
    }
}

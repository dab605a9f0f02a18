mod common;

use std::sync::Arc;

use ballquad::cubature::build_rule;
use ballquad::hyperinterp::HyperinterpOperator as Operator;
use ballquad::orthopoly::WeightConfig as Config;
use ballquad::{Filter, HyperinterpOperator, Route, WeightConfig};
use common::{ball_probes, sup_norm, RandomPoly};

#[test]
fn reproduces_polynomials_on_both_routes() {
    for (d, mu) in [(1, 0.0), (2, 0.5), (2, 1.5)] {
        let cfg = WeightConfig::new(d, mu).unwrap();
        let probes = ball_probes(d, 30);
        let level = 5;
        let rule = Arc::new(build_rule(&cfg, 3 * level).unwrap());
        for route in [Route::Basis, Route::Kernel] {
            let op = HyperinterpOperator::with_rule(Arc::clone(&rule), level, Filter, route).unwrap();
            for seed in 0..20 {
                let p = RandomPoly::new(d, level, seed);
                let g = op.g_l_apply(&|x: &[f64]| p.eval(x));
                let norm = sup_norm(|x| p.eval(x), &probes);
                assert!(sup_norm(|x| g.eval(x) - p.eval(x), &probes) <= 1e-8 * norm, "{route:?} d={d}");
                assert!((op.int_of_g_l(&|x: &[f64]| p.eval(x)) - p.integral(d, mu)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn three_dimensional_operator_uses_the_kernel_route() {
    let cfg = WeightConfig::new(3, 0.5).unwrap();
    let op = HyperinterpOperator::new(&cfg, 3, Filter).unwrap();
    let p = |x: &[f64]| 1.0 + x[0] * x[1] - x[2].powi(3) + 0.5 * x[0] * x[0];
    let g = op.g_l_apply(&p);
    for x in [[0.0, 0.0, 0.0], [0.3, -0.4, 0.5], [0.0, 0.0, 1.0]] {
        assert!((g.eval(&x) - p(&x)).abs() < 1e-10);
    }
}

#[test]
fn single_precision_instantiation() {
    let cfg = Config::<f32>::new(2, 0.5).unwrap();
    let op = Operator::<f32>::new(&cfg, 3, Filter).unwrap();
    let g = op.g_l_apply(&|x: &[f32]| 2.0 + x[0] - x[1] * x[1]);
    let x = [0.25f32, -0.5];
    assert!((g.eval(&x) - (2.0 + 0.25 - 0.25)).abs() < 1e-5);
}

#[test]
fn integral_of_surrogate_agrees_with_a_fine_rule() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let op = HyperinterpOperator::new(&cfg, 6, Filter).unwrap();
    let fine = build_rule(&cfg, 40).unwrap();
    let family: Vec<Box<dyn Fn(&[f64]) -> f64>> = vec![
        Box::new(|x| x[0].exp()),
        Box::new(|x| (3.0 * x[1]).sin()),
        Box::new(|x| 1.0 / (1.5 + x[0] + 0.3 * x[1])),
        Box::new(|x| (x[0] * x[0] + x[1] * x[1]).sqrt()),
        Box::new(|x| (x[0] - x[1]).abs()),
        Box::new(|x| (2.0 * x[0] * x[1]).cos()),
        Box::new(|x| x[0].powi(9)),
        Box::new(|x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt()),
        Box::new(|x| (x[0] + 0.2).tanh()),
        Box::new(|x| if x[1] > 0.1 { 1.0 } else { -0.5 }),
    ];
    for f in &family {
        let g = op.g_l_apply(&|x: &[f64]| f(x));
        let direct = op.int_of_g_l(&|x: &[f64]| f(x));
        let via_fine = fine.integrate(&|x: &[f64]| g.eval(x));
        assert!((direct - via_fine).abs() <= 1e-8, "{direct} vs {via_fine}");
    }
}

#[test]
fn lebesgue_estimate_saturates_in_probe_count() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    for level in [4, 8] {
        let op = HyperinterpOperator::new(&cfg, level, Filter).unwrap();
        let a = op.lebesgue_estimate(100).unwrap();
        let b = op.lebesgue_estimate(200).unwrap();
        assert!(a >= 1.0 && b >= 1.0);
        assert!((b - a).abs() / a < 0.05, "L={level}: {a} vs {b}");
    }
}

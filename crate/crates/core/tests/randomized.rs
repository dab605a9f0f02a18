mod common;

use std::sync::atomic::{AtomicUsize, Ordering};

use ballquad::cubature::build_rule;
use ballquad::randomized::{cv_integrate, mc_integrate, replicate_errors, replicate_estimates, CvBudget, Estimator};
use ballquad::{Filter, HyperinterpOperator, SeededStream, WeightConfig};
use common::RandomPoly;

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn mc_of_an_odd_function_is_centered() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let est = replicate_estimates(&cfg, &|x: &[f64]| x[0], Estimator::Mc, 64, 500, 3).unwrap();
    let (mean, se) = mean_and_se(&est);
    assert!(mean.abs() <= 4.0 * se, "{mean} ± {se}");
}

#[test]
fn cv_is_exact_on_low_degree_polynomials_for_every_stream() {
    for (d, mu) in [(1, 0.0), (2, 0.5), (2, 1.5)] {
        let cfg = WeightConfig::new(d, mu).unwrap();
        let budget = CvBudget::new(d, 256).unwrap();
        let p = RandomPoly::new(d, budget.level, 8);
        let stats =
            replicate_errors(&cfg, &|x: &[f64]| p.eval(x), p.integral(d, mu), Estimator::Cv, 256, 50, 1).unwrap();
        assert!(stats.per_replication_abs_errors.iter().all(|&e| e <= 1e-9), "d={d} mu={mu}: {stats:?}");
    }
}

#[test]
fn cv_is_unbiased() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let truth = build_rule(&cfg, 80).unwrap().integrate(&|x: &[f64]| x[0].exp());
    let est = replicate_estimates(&cfg, &|x: &[f64]| x[0].exp(), Estimator::Cv, 256, 2000, 17).unwrap();
    let (mean, se) = mean_and_se(&est);
    assert!((mean - truth).abs() <= 4.0 * se, "{mean} vs {truth} ± {se}");
}

#[test]
fn budget_accounting_is_exact() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    for n in [64, 100, 512, 1000] {
        let budget = CvBudget::new(2, n).unwrap();
        let op = HyperinterpOperator::new(&cfg, budget.level, Filter).unwrap();
        let calls = AtomicUsize::new(0);
        let f = |x: &[f64]| {
            calls.fetch_add(1, Ordering::Relaxed);
            (x[0] - x[1]).sin()
        };
        let est = cv_integrate(&cfg, &f, &budget, &op, SeededStream::new(2, 0)).unwrap();
        let used = calls.load(Ordering::Relaxed);
        assert_eq!(used, est.node_evaluations + est.sample_evaluations);
        assert_eq!(est.node_evaluations, op.node_count());
        assert_eq!(est.sample_evaluations, budget.n_samples);
        assert!(used <= n);
    }
}

#[test]
fn cv_beats_mc_on_smooth_integrands() {
    let cfg = WeightConfig::new(2, 0.5).unwrap();
    let f = |x: &[f64]| (x[0] + 0.5 * x[1]).exp();
    let truth = build_rule(&cfg, 80).unwrap().integrate(&f);
    let mc = replicate_errors(&cfg, &f, truth, Estimator::Mc, 1024, 100, 5).unwrap();
    let cv = replicate_errors(&cfg, &f, truth, Estimator::Cv, 1024, 100, 5).unwrap();
    assert!(mc.mean_abs_error >= 3.0 * cv.mean_abs_error, "{} vs {}", mc.mean_abs_error, cv.mean_abs_error);
}

#[test]
fn estimates_do_not_depend_on_the_thread_count() {
    let cfg = WeightConfig::new(2, 1.5).unwrap();
    let f = |x: &[f64]| (2.0 * x[0]).cos() + x[1];
    let run = |threads: usize, method| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| replicate_estimates(&cfg, &f, method, 300, 64, 99).unwrap())
    };
    for method in [Estimator::Mc, Estimator::Cv] {
        let one = run(1, method);
        assert_eq!(one, run(4, method));
        let single = mc_integrate(&cfg, &f, 300, SeededStream::new(99, 5)).unwrap().value;
        if method == Estimator::Mc {
            assert_eq!(one[5], single);
        }
    }
}

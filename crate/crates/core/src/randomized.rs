//! Monte Carlo `Q_N` and the control-variate algorithm
//! `A_n f = Q_N(f - G_L f) + INT(G_L f)`, with replicated error statistics.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubature::node_count;
use crate::error::{Error, Result};
use crate::filtering::Filter;
use crate::hyperinterp::HyperinterpOperator;
use crate::orthopoly::WeightConfig;
use crate::random::{MuSampler, SeededStream};
use crate::scalar::CompensatedSum;
use crate::spectral::BandlimitedFunction;

/// Result of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub n_samples: usize,
    pub stream: SeededStream,
}

/// Mean of `h` at `n` independent draws from `w_mu` on `stream`.
pub fn mc_integrate<F>(cfg: &WeightConfig<f64>, h: &F, n: usize, stream: SeededStream) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    if n == 0 {
        return Err(Error::arg("Monte Carlo needs at least one sample"));
    }
    let sampler = MuSampler::new(cfg);
    let mut rng = stream.rng();
    let mut x = vec![0.0; cfg.d];
    let mut acc = CompensatedSum::new();
    for _ in 0..n {
        sampler.sample_into(&mut rng, &mut x);
        acc.add(h(&x));
    }
    Ok(McEstimate { value: acc.value() / n as f64, n_samples: n, stream })
}

/// Split of a budget of `n` function values between the rule nodes of
/// `G_L` and fresh Monte Carlo samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvBudget {
    pub n: usize,
    pub level: usize,
    pub n_samples: usize,
    pub node_count: usize,
}

impl CvBudget {
    /// Half the budget for nodes, `⌊n/2⌋` samples.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_split(d, n, 0.5)
    }

    /// `⌊share · n⌋` values for nodes and `⌊(1 - share) n⌋` for samples. The
    /// level is the largest `L` whose degree-`3L` rule fits the node share.
    pub fn with_split(d: usize, n: usize, node_share: f64) -> Result<Self> {
        if !(node_share > 0.0 && node_share < 1.0) {
            return Err(Error::arg(format!("node share must lie in (0, 1), got {node_share}")));
        }
        let cap = (n as f64 * node_share).floor() as usize;
        let n_samples = (n as f64 * (1.0 - node_share)).floor() as usize;
        let level = largest_level(d, cap)
            .ok_or_else(|| Error::arg(format!("budget n = {n} is too small for any rule in d = {d}")))?;
        if n_samples == 0 {
            return Err(Error::arg(format!("budget n = {n} leaves no Monte Carlo samples")));
        }
        Ok(Self { n, level, n_samples, node_count: node_count(d, 3 * level) })
    }
}

/// Largest `L >= 1` with `node_count(d, 3L) <= cap`.
pub fn largest_level(d: usize, cap: usize) -> Option<usize> {
    if node_count(d, 3) > cap {
        return None;
    }
    let mut level = 1;
    while node_count(d, 3 * (level + 1)) <= cap {
        level += 1;
    }
    Some(level)
}

/// Result of one control-variate run, with its evaluation accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvEstimate {
    pub value: f64,
    pub node_evaluations: usize,
    pub sample_evaluations: usize,
    pub stream: SeededStream,
}

/// `A_n f`: evaluates `f` once per rule node, builds `G_L f` and its exact
/// integral, then adds the Monte Carlo mean of `f - G_L f` on `stream`.
pub fn cv_integrate<F>(
    cfg: &WeightConfig<f64>,
    f: &F,
    budget: &CvBudget,
    op: &HyperinterpOperator<f64>,
    stream: SeededStream,
) -> Result<CvEstimate>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    if op.level != budget.level {
        return Err(Error::arg(format!("operator level {} does not match budget level {}", op.level, budget.level)));
    }
    if op.cfg().d != cfg.d || op.cfg().mu != cfg.mu {
        return Err(Error::arg("operator built for a different weight"));
    }
    let calls = AtomicUsize::new(0);
    let counted = |x: &[f64]| {
        calls.fetch_add(1, Ordering::Relaxed);
        f(x)
    };
    let values = op.sample(&counted);
    let node_evaluations = calls.load(Ordering::Relaxed);
    let surrogate = op.from_node_values(&values);
    let integral = op.rule().integrate_values(&values);
    let residual = residual_mean(cfg, &counted, &surrogate, budget.n_samples, stream)?;
    let total = calls.load(Ordering::Relaxed);
    if total > budget.n {
        return Err(Error::Budget { used: total, allowed: budget.n });
    }
    Ok(CvEstimate {
        value: integral + residual,
        node_evaluations,
        sample_evaluations: total - node_evaluations,
        stream,
    })
}

fn residual_mean<F>(
    cfg: &WeightConfig<f64>,
    f: &F,
    surrogate: &BandlimitedFunction<f64>,
    n_samples: usize,
    stream: SeededStream,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    Ok(mc_integrate(cfg, &|x: &[f64]| f(x) - surrogate.eval(x), n_samples, stream)?.value)
}

/// The two randomized estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mc,
    Cv,
}

/// Absolute errors of independent replications and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub per_replication_abs_errors: Vec<f64>,
    pub mean_abs_error: f64,
    pub std_error: f64,
    pub replication_count: usize,
}

impl ErrorStats {
    /// Summary in list order with compensated sums.
    pub fn from_errors(errors: Vec<f64>) -> Result<Self> {
        let n = errors.len();
        if n < 2 {
            return Err(Error::arg("error statistics need at least two replications"));
        }
        let mut acc = CompensatedSum::new();
        errors.iter().for_each(|&e| acc.add(e));
        let mean = acc.value() / n as f64;
        let mut sq = CompensatedSum::new();
        errors.iter().for_each(|&e| sq.add((e - mean) * (e - mean)));
        let std = (sq.value() / (n - 1) as f64).sqrt();
        Ok(Self {
            mean_abs_error: mean,
            std_error: std / (n as f64).sqrt(),
            replication_count: n,
            per_replication_abs_errors: errors,
        })
    }
}

/// Signed estimates of replications `0..reps` on streams `(master_seed, i)`.
///
/// Replications run in parallel; results are returned in stream order, so
/// the output does not depend on the thread count. For `Cv` the node values
/// and `G_L f` are deterministic and computed once for all replications.
pub fn replicate_estimates<F>(
    cfg: &WeightConfig<f64>,
    f: &F,
    method: Estimator,
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    match method {
        Estimator::Mc => (0..reps)
            .into_par_iter()
            .map(|i| Ok(mc_integrate(cfg, f, n, SeededStream::new(master_seed, i as u64))?.value))
            .collect(),
        Estimator::Cv => {
            let budget = CvBudget::new(cfg.d, n)?;
            let op = HyperinterpOperator::new(cfg, budget.level, Filter)?;
            let values = op.sample(f);
            let surrogate = op.from_node_values(&values);
            let integral = op.rule().integrate_values(&values);
            (0..reps)
                .into_par_iter()
                .map(|i| {
                    let stream = SeededStream::new(master_seed, i as u64);
                    Ok(integral + residual_mean(cfg, f, &surrogate, budget.n_samples, stream)?)
                })
                .collect()
        }
    }
}

/// `|true_value - estimate|` over `reps` replications.
pub fn replicate_errors<F>(
    cfg: &WeightConfig<f64>,
    f: &F,
    true_value: f64,
    method: Estimator,
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<ErrorStats>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if reps < 2 {
        return Err(Error::arg("replicate_errors needs reps >= 2"));
    }
    let estimates = replicate_estimates(cfg, f, method, n, reps, master_seed)?;
    ErrorStats::from_errors(estimates.into_iter().map(|e| (true_value - e).abs()).collect())
}

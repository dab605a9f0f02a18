use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use ballquad::adversarial::fool_rule;
use ballquad::cubature::{build_rule, cert_tolerance};
use ballquad::harness::{
    self, build_corpus, default_n_grid, emit_report, reference_integral, report_to_csv, report_to_json,
    run_convergence, ClassTag, CorpusFunction, Method, ReportFormat,
};
use ballquad::hyperinterp::spread_points;
use ballquad::randomized::{cv_integrate, largest_level, mc_integrate, CvBudget};
use ballquad::spectral::{dim_v, kernel_eval};
use ballquad::{CubatureRule, Error, Filter, HyperinterpOperator, SeededStream, WeightConfig};

use crate::output::{deliver, render, Record};
use crate::Common;

const DEFAULT_LEVEL: usize = 8;
const DEFAULT_BUDGET: usize = 1024;
const DEFAULT_SMOOTHNESS: f64 = 2.0;
const KERNEL_TOL: f64 = 1e-9;

fn certification(msg: String) -> anyhow::Error {
    Error::Certification(msg).into()
}

fn weight(c: &Common) -> Result<WeightConfig> {
    Ok(WeightConfig::new(c.d, c.mu)?)
}

/// `--L`, else the largest level whose rule fits `--n`, else the default.
fn level(c: &Common) -> Result<usize> {
    match (c.level, c.n) {
        (Some(0), _) => Err(anyhow!("--L must be positive")),
        (Some(l), _) => Ok(l),
        (None, Some(n)) => {
            largest_level(c.d, n).ok_or_else(|| anyhow!("budget --n {n} is too small for any rule in d = {}", c.d))
        }
        (None, None) => Ok(DEFAULT_LEVEL),
    }
}

fn test_function(c: &Common, cfg: &WeightConfig) -> Result<CorpusFunction> {
    let tag = match (&c.function, c.r) {
        (Some(name), _) => name.parse::<ClassTag>()?,
        (None, Some(r)) => ClassTag::Lacunary { r },
        (None, None) => ClassTag::Analytic,
    };
    Ok(build_corpus(cfg, &[tag], c.seed).remove(0))
}

fn header(rec: &mut Record, cfg: &WeightConfig) {
    rec.push("d", cfg.d).num("mu", cfg.mu);
}

fn certificate_record(rule: &CubatureRule) -> Result<Record> {
    let report = rule.certify(rule.exactness_degree, rule.dim() > 3)?;
    let mut rec = Record::new();
    header(&mut rec, &rule.cfg);
    rec.push("exactness", rule.exactness_degree)
        .push("nodes", rule.len())
        .num("min_weight", rule.min_weight())
        .num("weight_sum", rule.weights.iter().sum())
        .push("monomials_checked", report.checked)
        .num("worst_error", report.worst_error)
        .push("worst_monomial", format!("{:?}", report.worst_monomial).replace(", ", " "));
    if !(report.worst_error <= cert_tolerance::<f64>()) {
        return Err(certification(format!(
            "monomial {:?} has error {:.3e}",
            report.worst_monomial, report.worst_error
        )));
    }
    Ok(rec)
}

pub fn rule_build(c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let rule = build_rule(&cfg, 3 * level(c)?)?;
    if let Some(path) = &c.out {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        rule.write_to(std::io::BufWriter::new(file))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    deliver(&render(&[certificate_record(&rule)?], c.format())?, None)
}

pub fn rule_check(path: &Path, c: &Common) -> Result<()> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let rule = CubatureRule::read_from(BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
    if !(rule.min_weight() > 0.0) {
        return Err(certification(format!("{} has a non-positive weight", path.display())));
    }
    let sum: f64 = rule.weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(certification(format!("weights of {} sum to {sum}", path.display())));
    }
    deliver(&render(&[certificate_record(&rule)?], c.format())?, c.out.as_deref())
}

pub fn rule_export(c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let rule = build_rule(&cfg, 3 * level(c)?)?;
    let text = match c.format() {
        ReportFormat::Csv => rule.to_flat_string(),
        ReportFormat::Json => serde_json::to_string_pretty(&rule)? + "\n",
    };
    deliver(&text, c.out.as_deref())
}

/// For each `n <= L`: `Σ λ_ω P_n(x, ω) P_n(ω, y) = P_n(x, y)` at spread
/// points and `Σ λ_ω P_n(ω, ω) = dim V_n`, on a rule of degree `2L`.
pub fn kernel_check(c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let top = level(c)?;
    let rule = build_rule(&cfg, (2 * top).max(1))?;
    let points = spread_points(&cfg, 6)?;
    let mut records = Vec::new();
    let mut worst = 0.0_f64;
    for n in 0..=top {
        let dim = dim_v(cfg.d, n) as f64;
        let trace = rule.integrate(&|w: &[f64]| kernel_eval(&cfg, n, w, w).unwrap_or(f64::NAN));
        let trace_err = ((trace - dim) / dim).abs();
        let mut repro_err = 0.0_f64;
        for x in &points {
            for y in &points {
                let (x, y) = (x.coords(), y.coords());
                let direct = kernel_eval(&cfg, n, x, y)?;
                let kx: Vec<f64> = rule.nodes.iter().map(|w| kernel_eval(&cfg, n, x, w.coords())).collect::<ballquad::Result<_>>()?;
                let ky: Vec<f64> = rule.nodes.iter().map(|w| kernel_eval(&cfg, n, w.coords(), y)).collect::<ballquad::Result<_>>()?;
                let values: Vec<f64> = kx.iter().zip(&ky).map(|(a, b)| a * b).collect();
                let reproduced = rule.integrate_values(&values);
                repro_err = repro_err.max((reproduced - direct).abs() / dim);
            }
        }
        worst = worst.max(trace_err).max(repro_err);
        let mut rec = Record::new();
        header(&mut rec, &cfg);
        rec.push("n", n).push("dim", dim as usize).num("trace", trace).num("trace_rel_error", trace_err).num("reproduction_error", repro_err);
        records.push(rec);
    }
    deliver(&render(&records, c.format())?, c.out.as_deref())?;
    if !(worst <= KERNEL_TOL) {
        return Err(certification(format!("kernel identities fail: worst error {worst:.3e}")));
    }
    Ok(())
}

pub fn approx_sweep(c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let f = test_function(c, &cfg)?;
    let top = c.level.unwrap_or(16);
    let levels: Vec<usize> = std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(|&l| l <= top).collect();
    if levels.is_empty() {
        return Err(anyhow!("--L must be positive"));
    }
    let resolution = if cfg.d <= 2 { 40 } else { 12 };
    let sweep = harness::approx_sweep(&cfg, &f, &levels, resolution)?;
    let slope = sweep.fit.map(|s| s.slope).unwrap_or(f64::NAN);
    let records: Vec<Record> = sweep
        .levels
        .iter()
        .zip(&sweep.sup_errors)
        .map(|(&l, &e)| {
            let mut rec = Record::new();
            header(&mut rec, &cfg);
            rec.push("function", f.name.clone()).push("level", l).num("sup_error", e).num("fitted_slope", slope);
            rec
        })
        .collect();
    deliver(&render(&records, c.format())?, c.out.as_deref())
}

pub fn integrate(method: Method, c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let f = test_function(c, &cfg)?;
    let n = c.n.unwrap_or(DEFAULT_BUDGET);
    let h = |x: &[f64]| f.eval(x);
    let stream = SeededStream::new(c.seed, 0);
    let (value, evaluations) = match method {
        Method::Det => {
            let l = largest_level(cfg.d, n).ok_or_else(|| anyhow!("budget --n {n} is too small for any rule"))?;
            let rule = build_rule(&cfg, 3 * l)?;
            (rule.integrate(&h), rule.len())
        }
        Method::Mc => {
            let est = mc_integrate(&cfg, &h, n, stream)?;
            (est.value, est.n_samples)
        }
        Method::Cv => {
            let budget = CvBudget::new(cfg.d, n)?;
            let op = HyperinterpOperator::new(&cfg, budget.level, Filter)?;
            let est = cv_integrate(&cfg, &h, &budget, &op, stream)?;
            (est.value, est.node_evaluations + est.sample_evaluations)
        }
    };
    let reference = reference_integral(&cfg, &f)?;
    let mut rec = Record::new();
    header(&mut rec, &cfg);
    rec.push("method", method.to_string())
        .push("function", f.name.clone())
        .push("n", n)
        .push("evaluations", evaluations)
        .num("value", value)
        .num("reference", reference)
        .num("abs_error", (value - reference).abs())
        .push("seed", c.seed);
    deliver(&render(&[rec], c.format())?, c.out.as_deref())
}

pub fn converge(method: Method, c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let f = test_function(c, &cfg)?;
    let grid = c.n_grid.clone().unwrap_or_else(default_n_grid);
    let mut report = run_convergence(&cfg, &f, method, &grid, c.reps, c.seed)?;
    report.p = c.p;
    match &c.out {
        Some(path) => Ok(emit_report(&report, path, c.format())?),
        None => {
            let text = match c.format() {
                ReportFormat::Csv => report_to_csv(&report),
                ReportFormat::Json => report_to_json(&report)?,
            };
            deliver(&text, None)
        }
    }
}

pub fn fool(c: &Common) -> Result<()> {
    let cfg = weight(c)?;
    let n = c.n.unwrap_or(256);
    let r = c.r.unwrap_or(DEFAULT_SMOOTHNESS);
    let l = match c.level {
        Some(l) => l,
        None => largest_level(cfg.d, n).ok_or_else(|| anyhow!("budget --n {n} is too small for any rule"))?,
    };
    let rule = build_rule(&cfg, 3 * l)?;
    let outcome = fool_rule(&cfg, &rule.nodes, n, r, c.p)?;
    let seen = rule.integrate(&|x: &[f64]| outcome.function.eval(x));
    if seen != 0.0 {
        return Err(certification(format!("fooling function is nonzero on the rule: {seen:e}")));
    }
    let mut rec = Record::new();
    header(&mut rec, &cfg);
    rec.push("n", n)
        .push("level", l)
        .push("rule_nodes", rule.len())
        .num("r", r)
        .num("p", c.p)
        .push("active_bumps", outcome.function.active().count())
        .num("raw_norm", outcome.raw_norm)
        .num("witness", outcome.witness)
        .num("rule_value", seen);
    deliver(&render(&[rec], c.format())?, c.out.as_deref())
}

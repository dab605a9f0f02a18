//! Test-function corpus, convergence experiments and report files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::bump_profile;
use crate::cubature::{build_rule, monomial_exponents, monomial_moment};
use crate::domain::probe_grid;
use crate::error::{Error, Result};
use crate::filtering::{v_l_apply, Filter};
use crate::hyperinterp::HyperinterpOperator;
use crate::orthopoly::{chebyshev_t, gauss_jacobi, WeightConfig};
use crate::randomized::{largest_level, replicate_errors, Estimator};
use crate::scalar::CompensatedSum;
use crate::spectral::{BandlimitedFunction, Evaluator};
use crate::special::sphere_area;

/// Number of dyadic blocks beyond the first in the lacunary members.
pub const LACUNARY_BLOCKS: usize = 7;

/// Golden angle; successive ridge directions rotate by it.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Kind of corpus member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "class")]
pub enum ClassTag {
    Analytic,
    Lacunary { r: f64 },
    Bump { m: usize },
    Polynomial { degree: usize },
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassTag::Analytic => write!(f, "analytic"),
            ClassTag::Lacunary { r } => write!(f, "lacunary({r})"),
            ClassTag::Bump { m } => write!(f, "bump({m})"),
            ClassTag::Polynomial { degree } => write!(f, "polynomial({degree})"),
        }
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "analytic" {
            return Ok(ClassTag::Analytic);
        }
        let (head, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::arg(format!("unknown corpus member '{s}'")))?;
        let arg = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::arg(format!("missing ')' in '{s}'")))?;
        let bad = || Error::arg(format!("bad argument in '{s}'"));
        match head {
            "lacunary" => Ok(ClassTag::Lacunary { r: arg.parse().map_err(|_| bad())? }),
            "bump" => Ok(ClassTag::Bump { m: arg.parse().map_err(|_| bad())? }),
            "polynomial" => Ok(ClassTag::Polynomial { degree: arg.parse().map_err(|_| bad())? }),
            _ => Err(Error::arg(format!("unknown corpus member '{s}'"))),
        }
    }
}

/// A test function with a known smoothness class.
#[derive(Clone)]
pub struct CorpusFunction {
    pub name: String,
    pub class: ClassTag,
    /// `None` for infinitely smooth members.
    pub nominal_smoothness: Option<f64>,
    /// Polynomial degree, when the member is a polynomial.
    pub degree: Option<usize>,
    evaluator: Evaluator<f64>,
    exact_integral: Option<f64>,
}

impl fmt::Debug for CorpusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusFunction")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("degree", &self.degree)
            .finish_non_exhaustive()
    }
}

impl CorpusFunction {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn evaluator(&self) -> Evaluator<f64> {
        Arc::clone(&self.evaluator)
    }

    /// The member as a band-limited function, when it is a polynomial.
    pub fn as_bandlimited(&self) -> Option<BandlimitedFunction<f64>> {
        self.degree
            .map(|deg| BandlimitedFunction::from_evaluator(deg, self.name.clone(), self.evaluator()))
    }
}

/// Unit ridge directions `a_j`, rotating by the golden angle in the
/// `(x1, x2)` plane and starting at `e1`.
pub fn ridge_direction(d: usize, j: usize) -> Vec<f64> {
    let mut a = vec![0.0; d];
    if d == 1 {
        a[0] = 1.0;
    } else {
        let t = j as f64 * GOLDEN_ANGLE;
        a[0] = t.cos();
        a[1] = t.sin();
    }
    a
}

/// `exp(x1)`.
pub fn analytic(_d: usize) -> CorpusFunction {
    CorpusFunction {
        name: "analytic".into(),
        class: ClassTag::Analytic,
        nominal_smoothness: None,
        degree: None,
        evaluator: Arc::new(|x: &[f64]| x[0].exp()),
        exact_integral: None,
    }
}

/// `Σ_{j=0}^{J} 2^{-jr} T_{2^j}(a_j · x)`: one ridge Chebyshev polynomial of
/// degree `2^j` and sup norm one per dyadic block.
pub fn lacunary_truncated(d: usize, r: f64, blocks: usize) -> CorpusFunction {
    let dirs: Vec<Vec<f64>> = (0..=blocks).map(|j| ridge_direction(d, j)).collect();
    let amps: Vec<f64> = (0..=blocks).map(|j| (-(j as f64) * r).exp2()).collect();
    CorpusFunction {
        name: format!("lacunary({r})"),
        class: ClassTag::Lacunary { r },
        nominal_smoothness: Some(r),
        degree: Some(1 << blocks),
        evaluator: Arc::new(move |x: &[f64]| {
            let mut acc = 0.0;
            for (j, (a, &amp)) in dirs.iter().zip(&amps).enumerate() {
                let t: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
                acc += amp * chebyshev_t(1 << j, t.clamp(-1.0, 1.0));
            }
            acc
        }),
        exact_integral: None,
    }
}

pub fn lacunary(d: usize, r: f64) -> CorpusFunction {
    lacunary_truncated(d, r, LACUNARY_BLOCKS)
}

/// Random polynomial of the given degree with seeded coefficients in
/// `[-1, 1]` on the monomials.
pub fn polynomial(cfg: &WeightConfig<f64>, degree: usize, seed: u64) -> CorpusFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = monomial_exponents(cfg.d, degree);
    let coeffs: Vec<f64> = exps.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let exact = exps
        .iter()
        .zip(&coeffs)
        .fold(CompensatedSum::new(), |mut acc, (e, &c)| {
            acc.add(c * monomial_moment(cfg, e));
            acc
        })
        .value();
    CorpusFunction {
        name: format!("polynomial({degree})"),
        class: ClassTag::Polynomial { degree },
        nominal_smoothness: None,
        degree: Some(degree),
        evaluator: Arc::new(move |x: &[f64]| {
            exps.iter()
                .zip(&coeffs)
                .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
                .sum()
        }),
        exact_integral: Some(exact),
    }
}

/// `φ(m x)`: one bump of radius `1/m` at the origin.
pub fn bump(cfg: &WeightConfig<f64>, m: usize) -> CorpusFunction {
    let mf = m.max(1) as f64;
    let exact = radial_bump_integral(cfg, mf, 64);
    CorpusFunction {
        name: format!("bump({m})"),
        class: ClassTag::Bump { m },
        nominal_smoothness: None,
        degree: None,
        evaluator: Arc::new(move |x: &[f64]| {
            let u: Vec<f64> = x.iter().map(|v| v * mf).collect();
            bump_profile(&u)
        }),
        exact_integral: Some(exact),
    }
}

// b σ_{d-1} ∫_0^{1/m} η(2 m ρ) ρ^{d-1} (1 - ρ²)^{mu - 1/2} dρ by composite Gauss-Legendre
fn radial_bump_integral(cfg: &WeightConfig<f64>, m: f64, panels: usize) -> f64 {
    let gl = gauss_jacobi::<f64>(10, 0.0, 0.0).expect("Gauss-Legendre rule");
    let top = 1.0 / m;
    let h = top / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let mid = h * (p as f64 + 0.5);
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let rho = mid + 0.5 * h * t;
            let f = Filter.eval(2.0 * m * rho) * rho.powi(cfg.d as i32 - 1) * (1.0 - rho * rho).powf(cfg.mu - 0.5);
            acc.add(0.5 * h * w * f);
        }
    }
    cfg.b_d_mu * sphere_area::<f64>(cfg.d) * acc.value()
}

/// Builds the members named by `tags`, in order.
pub fn build_corpus(cfg: &WeightConfig<f64>, tags: &[ClassTag], seed: u64) -> Vec<CorpusFunction> {
    tags.iter()
        .map(|tag| match *tag {
            ClassTag::Analytic => analytic(cfg.d),
            ClassTag::Lacunary { r } => lacunary(cfg.d, r),
            ClassTag::Bump { m } => bump(cfg, m),
            ClassTag::Polynomial { degree } => polynomial(cfg, degree, seed),
        })
        .collect()
}

/// Largest change tolerated between a reference integral and its value at
/// doubled cubature degree.
pub const REFERENCE_SELF_CHECK: f64 = 1e-12;

/// `∫ f w_mu` for a corpus member.
///
/// Polynomials and bumps use closed or radial forms. Lacunary members use a
/// rule of twice their degree (exact). The analytic member compares degrees
/// 40 and 80 and fails when they differ by more than [`REFERENCE_SELF_CHECK`].
pub fn reference_integral(cfg: &WeightConfig<f64>, f: &CorpusFunction) -> Result<f64> {
    if let ClassTag::Bump { m } = f.class {
        let coarse = radial_bump_integral(cfg, m.max(1) as f64, 64);
        let fine = radial_bump_integral(cfg, m.max(1) as f64, 128);
        return check_reference(coarse, fine, "bump");
    }
    if let Some(v) = f.exact_integral {
        return Ok(v);
    }
    if let (ClassTag::Lacunary { r }, Some(deg)) = (f.class, f.degree) {
        let key = (cfg.d, cfg.mu.to_bits(), r.to_bits(), deg);
        if let Some(&v) = lacunary_cache().lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = build_rule(cfg, 2 * deg)?.integrate(&|x: &[f64]| f.eval(x));
        lacunary_cache().lock().unwrap().insert(key, v);
        return Ok(v);
    }
    if let Some(deg) = f.degree {
        let rule = build_rule(cfg, (2 * deg).max(2))?;
        return Ok(rule.integrate(&|x: &[f64]| f.eval(x)));
    }
    let coarse = build_rule(cfg, 40)?.integrate(&|x: &[f64]| f.eval(x));
    let fine = build_rule(cfg, 80)?.integrate(&|x: &[f64]| f.eval(x));
    check_reference(coarse, fine, &f.name)
}

type LacunaryKey = (usize, u64, u64, usize);

/// Certifying the degree-`2 deg` rule dominates an experiment, so lacunary
/// references are computed once per process.
fn lacunary_cache() -> &'static Mutex<HashMap<LacunaryKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<LacunaryKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn check_reference(coarse: f64, fine: f64, what: &str) -> Result<f64> {
    if (coarse - fine).abs() > REFERENCE_SELF_CHECK * fine.abs().max(1.0) {
        return Err(Error::cert(format!("reference integral of {what} unstable: {coarse:e} vs {fine:e}")));
    }
    Ok(fine)
}

/// Least-squares line through `(ln x, ln y)` with the standard error of
/// its slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Fits points with `x, y > 0`; others are ignored. Needs two points, and
/// three for a finite standard error.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len();
    if k < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if k > 2 {
        let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (ssr / (k - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(SlopeFit { slope, stderr, intercept })
}

/// Integration methods compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// `INT(G_L f)`, the product rule of degree `3L` with at most `n` nodes.
    Det,
    Mc,
    Cv,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Det => "det",
            Method::Mc => "mc",
            Method::Cv => "cv",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Method::Det),
            "mc" => Ok(Method::Mc),
            "cv" => Ok(Method::Cv),
            _ => Err(Error::arg(format!("unknown method '{s}' (expected det, mc or cv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub method: Method,
    pub mean_abs_error: f64,
    pub std_error: f64,
    pub reps: usize,
}

/// Rows of a convergence experiment with the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub d: usize,
    pub mu: f64,
    pub r: Option<f64>,
    #[serde(with = "extended_f64")]
    pub p: f64,
    pub method: Method,
    pub seed: u64,
    pub function: String,
    pub rows: Vec<ReportRow>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
}

impl ExperimentReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_abs_error).collect()
    }

    pub fn budgets(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }
}

// JSON has no infinity; `p = ∞` travels as the string "inf".
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Num(*v).serialize(s)
        } else {
            Repr::Text(super::fmt_num(*v)).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Seed of one budget cell, so cells draw independent streams.
pub fn cell_seed(master_seed: u64, n: usize) -> u64 {
    master_seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// `n = 2^6 .. 2^12`.
pub fn default_n_grid() -> Vec<usize> {
    (6..=12).map(|k| 1usize << k).collect()
}

/// Error of one method across a geometric budget grid.
///
/// `det` runs once per budget; `mc` and `cv` replicate `reps` times on
/// streams seeded by [`cell_seed`]. Errors are against
/// [`reference_integral`].
pub fn run_convergence(
    cfg: &WeightConfig<f64>,
    f: &CorpusFunction,
    method: Method,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_grid(n_grid)?;
    if method != Method::Det && reps < 50 {
        return Err(Error::arg(format!("randomized methods need reps >= 50, got {reps}")));
    }
    let truth = reference_integral(cfg, f)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let row = match method {
            Method::Det => {
                let level = largest_level(cfg.d, n)
                    .ok_or_else(|| Error::arg(format!("budget n = {n} is too small for any rule")))?;
                let rule = build_rule(cfg, 3 * level)?;
                let value = rule.integrate(&|x: &[f64]| f.eval(x));
                ReportRow { n, method, mean_abs_error: (truth - value).abs(), std_error: 0.0, reps: 1 }
            }
            Method::Mc | Method::Cv => {
                let est = if method == Method::Mc { Estimator::Mc } else { Estimator::Cv };
                let stats = replicate_errors(cfg, &|x: &[f64]| f.eval(x), truth, est, n, reps, cell_seed(seed, n))?;
                ReportRow { n, method, mean_abs_error: stats.mean_abs_error, std_error: stats.std_error, reps }
            }
        };
        rows.push(row);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.mean_abs_error).collect();
    let fit = fit_loglog(&ns, &errs);
    Ok(ExperimentReport {
        d: cfg.d,
        mu: cfg.mu,
        r: f.nominal_smoothness,
        p: f64::INFINITY,
        method,
        seed,
        function: f.name.clone(),
        rows,
        fitted_slope: fit.map(|s| s.slope),
        slope_stderr: fit.map(|s| s.stderr).filter(|s| s.is_finite()),
    })
}

fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.len() < 4 {
        return Err(Error::arg(format!("budget grid needs at least 4 points, got {}", n_grid.len())));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("budget grid must be strictly increasing"));
    }
    let ratio = n_grid[1] as f64 / n_grid[0] as f64;
    let geometric = n_grid.windows(2).all(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() < 0.05);
    if !geometric {
        return Err(Error::arg("budget grid must be geometric"));
    }
    Ok(())
}

/// Sup-norm error of `G_L f` at each level, measured on a probe grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSweep {
    pub levels: Vec<usize>,
    pub sup_errors: Vec<f64>,
    pub fit: Option<SlopeFit>,
}

pub fn approx_sweep(
    cfg: &WeightConfig<f64>,
    f: &CorpusFunction,
    levels: &[usize],
    probe_resolution: usize,
) -> Result<ApproxSweep> {
    let probes = probe_grid::<f64>(cfg.d, probe_resolution);
    let mut sup_errors = Vec::with_capacity(levels.len());
    for &level in levels {
        let op = HyperinterpOperator::new(cfg, level, Filter)?;
        let g = op.g_l_apply(&|x: &[f64]| f.eval(x));
        let err = probes
            .iter()
            .map(|x| (f.eval(x.coords()) - g.eval(x.coords())).abs())
            .fold(0.0, f64::max);
        sup_errors.push(err);
    }
    let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let fit = fit_loglog(&xs, &sup_errors);
    Ok(ApproxSweep { levels: levels.to_vec(), sup_errors, fit })
}

/// `‖f - V_{2^i} f‖_∞ 2^{i r}` for `i = 0 ..= top`, with the fitted
/// decay exponent of `‖f - V_{2^i} f‖_∞` in `2^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub errors: Vec<f64>,
    pub scaled: Vec<f64>,
    pub exponent: f64,
    /// `max / min` of the scaled errors.
    pub spread: f64,
}

pub fn certify_lacunary_decay(
    cfg: &WeightConfig<f64>,
    f: &CorpusFunction,
    top: usize,
    probe_resolution: usize,
) -> Result<DecayCertificate> {
    let (r, poly) = match (f.class, f.as_bandlimited()) {
        (ClassTag::Lacunary { r }, Some(p)) => (r, p),
        _ => return Err(Error::arg(format!("{} is not a lacunary member", f.name))),
    };
    let rule = build_rule(cfg, poly.degree + (2usize << top) - 1)?;
    let probes = probe_grid::<f64>(cfg.d, probe_resolution);
    let mut errors = Vec::with_capacity(top + 1);
    for i in 0..=top {
        let v = v_l_apply(&poly, 1 << i, &Filter, &rule)?;
        let err = probes
            .iter()
            .map(|x| (poly.eval(x.coords()) - v.eval(x.coords())).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let scaled: Vec<f64> = errors.iter().enumerate().map(|(i, e)| e * (i as f64 * r).exp2()).collect();
    let levels: Vec<f64> = (0..=top).map(|i| (i as f64).exp2()).collect();
    let exponent = -fit_loglog(&levels, &errors).map(|s| s.slope).unwrap_or(f64::NAN);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    if !(spread <= 4.0) {
        return Err(Error::cert(format!("{}: scaled approximation errors spread by {spread:.2}", f.name)));
    }
    Ok(DecayCertificate { errors, scaled, exponent, spread })
}

/// File format of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::arg(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

pub const CSV_HEADER: &str = "n,method,mean_abs_error,std_error,reps";

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "nan".into())
}

fn parse_num(s: &str) -> std::result::Result<f64, std::num::ParseFloatError> {
    s.parse::<f64>()
}

/// Report as CSV: header, one row per budget, then `#` footer lines.
pub fn report_to_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            row.method,
            fmt_num(row.mean_abs_error),
            fmt_num(row.std_error),
            row.reps
        ));
    }
    out.push_str(&format!(
        "# slope={} stderr={} seed={}\n",
        fmt_opt(report.fitted_slope),
        fmt_opt(report.slope_stderr),
        report.seed
    ));
    out.push_str(&format!(
        "# d={} mu={} r={} p={} method={} function={}\n",
        report.d,
        fmt_num(report.mu),
        fmt_opt(report.r),
        fmt_num(report.p),
        report.method,
        report.function
    ));
    out
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::arg(format!("cannot encode report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses the output of [`report_to_csv`].
pub fn parse_report_csv(text: &str) -> Result<ExperimentReport> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header '{CSV_HEADER}'") }),
    }
    let mut rows = Vec::new();
    let mut footer = std::collections::BTreeMap::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let perr = |msg: String| Error::Parse { line: lineno, msg };
        if let Some(rest) = line.strip_prefix('#') {
            for pair in rest.split_whitespace() {
                let (k, v) = pair.split_once('=').ok_or_else(|| perr(format!("bad footer entry '{pair}'")))?;
                footer.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(perr(format!("expected 5 columns, found {}", cols.len())));
        }
        rows.push(ReportRow {
            n: cols[0].parse().map_err(|e| perr(format!("n: {e}")))?,
            method: cols[1].parse().map_err(|e: Error| perr(e.to_string()))?,
            mean_abs_error: parse_num(cols[2]).map_err(|e| perr(format!("mean_abs_error: {e}")))?,
            std_error: parse_num(cols[3]).map_err(|e| perr(format!("std_error: {e}")))?,
            reps: cols[4].parse().map_err(|e| perr(format!("reps: {e}")))?,
        });
    }
    let get = |k: &str| {
        footer
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("footer lacks '{k}'") })
    };
    let num = |k: &str| -> Result<f64> {
        parse_num(&get(k)?).map_err(|e| Error::Parse { line: 0, msg: format!("{k}: {e}") })
    };
    let opt = |k: &str| -> Result<Option<f64>> { num(k).map(|v| Some(v).filter(|v| !v.is_nan())) };
    Ok(ExperimentReport {
        d: get("d")?.parse().map_err(|e| Error::Parse { line: 0, msg: format!("d: {e}") })?,
        mu: num("mu")?,
        r: opt("r")?,
        p: num("p")?,
        method: get("method")?.parse()?,
        seed: get("seed")?.parse().map_err(|e| Error::Parse { line: 0, msg: format!("seed: {e}") })?,
        function: get("function")?,
        rows,
        fitted_slope: opt("slope")?,
        slope_stderr: opt("stderr")?,
    })
}

pub fn parse_report_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}

/// Writes the report to `path`.
pub fn emit_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => report_to_json(report)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

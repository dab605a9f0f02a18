//! Positive product cubature on `(B^d, w_mu(x) dx)`.
//!
//! A rule of target degree `D` is the product of a radial Gauss-Jacobi rule
//! in `s = 2r^2 - 1` (weight `(1-s)^(mu-1/2) (1+s)^(d/2-1)`) and a rule on
//! `S^{d-1}` that is itself a product of Gauss-Gegenbauer rules in the polar
//! angles and an equal-weight rule in the azimuth. All weights are positive
//! and sum to one. Exactness is certified against closed-form moments.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::BallPoint;
use crate::error::{Error, Result};
use crate::orthopoly::{gauss_jacobi, WeightConfig};
use crate::scalar::{CompensatedSum, Real};
use crate::special::ln_gamma;

const FORMAT_TAG: &str = "# ballquad cubature rule v1";

/// Relative tolerance of the exactness certificate.
pub const CERT_REL_TOL: f64 = 1e-10;
/// Absolute tolerance for monomials whose moment vanishes.
pub const CERT_ZERO_TOL: f64 = 1e-12;

/// Positive cubature rule for the probability measure `w_mu(x) dx`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubatureRule<T> {
    pub cfg: WeightConfig<T>,
    pub nodes: Vec<BallPoint<T>>,
    pub weights: Vec<T>,
    /// Certified degree of polynomial exactness.
    pub exactness_degree: usize,
}

/// How much of the monomial family to check when building a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Every monomial up to the target degree (default for `d <= 3`).
    Full,
    /// All monomials of degree `<= 4` plus a seeded random subset of 500.
    Sampled,
    /// Skip the check; the rule is trusted at its target degree.
    Skip,
}

/// Outcome of checking a rule against the closed-form moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub checked: usize,
    pub worst_error: f64,
    pub worst_monomial: Vec<usize>,
}

/// [`CERT_REL_TOL`], widened to `1000 ε` for scalars coarser than `f64`.
pub fn cert_tolerance<T: Real>() -> f64 {
    CERT_REL_TOL.max(1e3 * T::epsilon().to_f64_lossy())
}

fn radial_node_count(target_degree: usize) -> usize {
    // the sphere average of a degree-D polynomial is a polynomial of
    // degree floor(D/2) in s
    target_degree / 4 + 1
}

fn sphere_node_count(d: usize, target_degree: usize) -> usize {
    match d {
        1 => 2,
        2 => target_degree + 1,
        _ => (target_degree / 2 + 1) * sphere_node_count(d - 1, target_degree),
    }
}

/// Number of nodes of the product rule of the given degree, without building it.
pub fn node_count(d: usize, target_degree: usize) -> usize {
    radial_node_count(target_degree) * sphere_node_count(d, target_degree)
}

/// Equal-weight (normalized) rule on `S^{k}` in `R^{k+1}`, exact to `degree`.
fn sphere_rule<T: Real>(k: usize, degree: usize) -> Result<Vec<(Vec<T>, T)>> {
    match k {
        0 => Ok(vec![(vec![T::one()], T::lit(0.5)), (vec![-T::one()], T::lit(0.5))]),
        1 => {
            let m = degree + 1;
            let w = T::one() / T::of(m);
            Ok((0..m)
                .map(|i| {
                    let a = T::lit(2.0) * T::PI() * T::of(i) / T::of(m);
                    (vec![a.cos(), a.sin()], w)
                })
                .collect())
        }
        _ => {
            // dσ_k = (1 - t^2)^{(k-2)/2} dt dσ_{k-1}
            let expo = T::of(k - 2) * T::lit(0.5);
            let polar = gauss_jacobi(degree / 2 + 1, expo, expo)?;
            let total: T = polar.weights.iter().copied().sum();
            let sub = sphere_rule::<T>(k - 1, degree)?;
            let mut out = Vec::with_capacity(polar.len() * sub.len());
            for (&t, &wt) in polar.nodes.iter().zip(&polar.weights) {
                let s = (T::one() - t * t).max(T::zero()).sqrt();
                for (eta, we) in &sub {
                    let mut v = Vec::with_capacity(k + 1);
                    v.push(t);
                    v.extend(eta.iter().map(|&u| u * s));
                    out.push((v, wt / total * *we));
                }
            }
            Ok(out)
        }
    }
}

/// Builds the product rule of the given target degree and certifies it.
///
/// `d <= 3` checks every monomial; larger dimensions check a sample.
pub fn build_rule<T: Real>(cfg: &WeightConfig<T>, target_degree: usize) -> Result<CubatureRule<T>> {
    let level = if cfg.d <= 3 { Certification::Full } else { Certification::Sampled };
    build_rule_with(cfg, target_degree, level)
}

pub fn build_rule_with<T: Real>(
    cfg: &WeightConfig<T>,
    target_degree: usize,
    certification: Certification,
) -> Result<CubatureRule<T>> {
    if target_degree == 0 {
        return Err(Error::arg("target degree must be positive"));
    }
    let d = cfg.d;
    let half = T::lit(0.5);
    let radial = gauss_jacobi(
        radial_node_count(target_degree),
        cfg.mu - half,
        T::of(d) * half - T::one(),
    )?;
    let radial_total: T = radial.weights.iter().copied().sum();
    let sphere = sphere_rule::<T>(d - 1, target_degree)?;

    let mut nodes = Vec::with_capacity(radial.len() * sphere.len());
    let mut weights = Vec::with_capacity(radial.len() * sphere.len());
    for (&s, &ws) in radial.nodes.iter().zip(&radial.weights) {
        let r = ((T::one() + s) * half).sqrt();
        for (xi, wx) in &sphere {
            nodes.push(BallPoint::new(xi.iter().map(|&u| u * r).collect()));
            weights.push(ws / radial_total * *wx);
        }
    }
    let rule = CubatureRule { cfg: *cfg, nodes, weights, exactness_degree: target_degree };
    let report = match certification {
        Certification::Skip => None,
        Certification::Sampled => Some(rule.certify(target_degree, true)?),
        Certification::Full => {
            let radii: Vec<T> = radial.nodes.iter().map(|&s| ((T::one() + s) * half).sqrt()).collect();
            let rw: Vec<T> = radial.weights.iter().map(|&w| w / radial_total).collect();
            Some(certify_product(cfg, &radii, &rw, &sphere, target_degree))
        }
    };
    if let Some(report) = report {
        if report.worst_error > cert_tolerance::<T>() {
            return Err(Error::cert(format!(
                "degree-{target_degree} rule (d = {d}, mu = {}) fails exactness: monomial {:?} has error {:.3e}",
                cfg.mu, report.worst_monomial, report.worst_error
            )));
        }
    }
    Ok(rule)
}

/// Closed-form moment `∫ x^γ w_mu(x) dx` of the normalized measure.
///
/// Zero when any exponent is odd; otherwise `E[r^{|γ|}] · E_σ[ξ^γ]` with
/// `r^2 ~ Beta(d/2, mu + 1/2)` and the standard sphere moment formula.
pub fn monomial_moment<T: Real>(cfg: &WeightConfig<T>, exps: &[usize]) -> T {
    if exps.iter().any(|&e| e % 2 == 1) {
        return T::zero();
    }
    let half = T::lit(0.5);
    let d = T::of(cfg.d);
    let total: usize = exps.iter().sum();
    let m = T::of(total / 2);
    let a = d * half;
    let b = cfg.mu + half;
    let ln_radial = ln_gamma(a + m) - ln_gamma(a + b + m) - ln_gamma(a) + ln_gamma(a + b);
    let mut ln_sphere = ln_gamma(a) - ln_gamma(T::of(total) * half + a) - a * T::PI().ln();
    for &e in exps {
        ln_sphere = ln_sphere + ln_gamma((T::of(e) + T::one()) * half);
    }
    (ln_radial + ln_sphere).exp()
}

/// All exponent vectors of total degree `<= degree` in `d` variables.
pub fn monomial_exponents(d: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(d, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, degree, &mut Vec::with_capacity(d), &mut out);
    out
}

impl<T: Real> CubatureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cfg.d
    }

    /// `Σ_ω λ_ω f(ω)` with compensated summation in node order.
    pub fn integrate<F: Fn(&[T]) -> T + ?Sized>(&self, f: &F) -> T {
        let mut acc = CompensatedSum::new();
        for (x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x.coords()));
        }
        acc.value()
    }

    /// Weighted sum of precomputed node values.
    pub fn integrate_values(&self, values: &[T]) -> T {
        let mut acc = CompensatedSum::new();
        for (&w, &v) in self.weights.iter().zip(values) {
            acc.add(w * v);
        }
        acc.value()
    }

    /// Discrete inner product `<f, g>_Q = Q(f g)`.
    pub fn discrete_inner<F, G>(&self, f: &F, g: &G) -> T
    where
        F: Fn(&[T]) -> T + ?Sized,
        G: Fn(&[T]) -> T + ?Sized,
    {
        self.integrate(&|x: &[T]| f(x) * g(x))
    }

    pub fn min_weight(&self) -> T {
        self.weights.iter().copied().fold(T::infinity(), T::min)
    }

    /// Compares the rule with [`monomial_moment`] on monomials up to `degree`.
    ///
    /// The error is relative for nonzero moments and absolute (scaled by
    /// `CERT_REL_TOL / CERT_ZERO_TOL`) for vanishing ones, so a single
    /// threshold of [`cert_tolerance`] applies to both.
    pub fn certify(&self, degree: usize, sampled: bool) -> Result<CertificateReport> {
        let d = self.cfg.d;
        let mut report = Grader::new(&self.cfg);
        if sampled {
            let powers = node_powers(&self.nodes, d, degree);
            for exps in sampled_family(d, degree) {
                let mut acc = CompensatedSum::new();
                for (n, &w) in self.weights.iter().enumerate() {
                    let mut term = w;
                    for (axis, &e) in exps.iter().enumerate() {
                        term = term * powers[(n * d + axis) * (degree + 1) + e];
                    }
                    acc.add(term);
                }
                report.grade(&exps, acc.value());
            }
        } else {
            let coords: Vec<&[T]> = self.nodes.iter().map(|x| x.coords()).collect();
            monomial_sums(&coords, &self.weights, degree, &mut |exps, got| report.grade(exps, got));
        }
        Ok(report.finish())
    }
}

fn sampled_family(d: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut fam = monomial_exponents(d, degree.min(4));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    for _ in 0..500 {
        let total = rng.random_range(0..=degree);
        let mut e = vec![0usize; d];
        for _ in 0..total {
            e[rng.random_range(0..d)] += 1;
        }
        fam.push(e);
    }
    fam
}

// powers[node][axis][k] = x_axis^k
fn node_powers<T: Real>(nodes: &[BallPoint<T>], d: usize, degree: usize) -> Vec<T> {
    let mut powers = vec![T::one(); nodes.len() * d * (degree + 1)];
    for (n, x) in nodes.iter().enumerate() {
        for (axis, &v) in x.coords().iter().enumerate() {
            let base = (n * d + axis) * (degree + 1);
            for k in 1..=degree {
                powers[base + k] = powers[base + k - 1] * v;
            }
        }
    }
    powers
}

/// Calls `visit(γ, Σ_n w_n x_n^γ)` for every `|γ| <= degree`, in the order
/// of [`monomial_exponents`]. Partial products over leading axes are shared.
fn monomial_sums<T: Real>(points: &[&[T]], weights: &[T], degree: usize, visit: &mut dyn FnMut(&[usize], T)) {
    fn rec<T: Real>(
        points: &[&[T]],
        axis: usize,
        left: usize,
        cur: &mut Vec<usize>,
        mut v: Vec<T>,
        visit: &mut dyn FnMut(&[usize], T),
    ) {
        let d = cur.len();
        for e in 0..=left {
            cur[axis] = e;
            if axis + 1 == d {
                let mut acc = CompensatedSum::new();
                for &t in &v {
                    acc.add(t);
                }
                visit(cur, acc.value());
            } else {
                rec(points, axis + 1, left - e, cur, v.clone(), visit);
            }
            if e < left {
                for (t, x) in v.iter_mut().zip(points) {
                    *t = *t * x[axis];
                }
            }
        }
        cur[axis] = 0;
    }
    let Some(first) = points.first() else { return };
    let mut cur = vec![0; first.len()];
    rec(points, 0, degree, &mut cur, weights.to_vec(), visit);
}

/// Running worst error of a certificate.
struct Grader<'a, T> {
    cfg: &'a WeightConfig<T>,
    scale_zero: T,
    report: CertificateReport,
}

impl<'a, T: Real> Grader<'a, T> {
    fn new(cfg: &'a WeightConfig<T>) -> Self {
        Self {
            cfg,
            scale_zero: T::lit(CERT_REL_TOL / CERT_ZERO_TOL),
            report: CertificateReport { checked: 0, worst_error: 0.0, worst_monomial: Vec::new() },
        }
    }

    fn grade(&mut self, exps: &[usize], got: T) {
        let exact = monomial_moment(self.cfg, exps);
        let err = if exact == T::zero() {
            (got.abs() * self.scale_zero).to_f64_lossy()
        } else {
            ((got - exact) / exact).abs().to_f64_lossy()
        };
        self.report.checked += 1;
        if !(err <= self.report.worst_error) {
            self.report.worst_error = err;
            self.report.worst_monomial = exps.to_vec();
        }
    }

    fn finish(self) -> CertificateReport {
        self.report
    }
}

/// Full certificate of a product rule `x = r ξ`: each monomial sum
/// factors as `(Σ w_r r^{|γ|}) (Σ w_ξ ξ^γ)`.
fn certify_product<T: Real>(
    cfg: &WeightConfig<T>,
    radii: &[T],
    radial_weights: &[T],
    sphere: &[(Vec<T>, T)],
    degree: usize,
) -> CertificateReport {
    let radial: Vec<T> = (0..=degree)
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (&r, &w) in radii.iter().zip(radial_weights) {
                acc.add(w * r.powi(k as i32));
            }
            acc.value()
        })
        .collect();
    let points: Vec<&[T]> = sphere.iter().map(|(xi, _)| xi.as_slice()).collect();
    let weights: Vec<T> = sphere.iter().map(|(_, w)| *w).collect();
    let mut grader = Grader::new(cfg);
    monomial_sums(&points, &weights, degree, &mut |exps, s| {
        grader.grade(exps, s * radial[exps.iter().sum::<usize>()]);
    });
    grader.finish()
}

impl CubatureRule<f64> {
    /// Writes the versioned flat format: a tag line, a header line
    /// `d=<d> mu=<mu> exactness=<D> nodes=<N>`, then one row per node with
    /// the coordinates and the weight in 17 significant digits.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FORMAT_TAG}")?;
        writeln!(
            out,
            "d={} mu={:.16e} exactness={} nodes={}",
            self.cfg.d,
            self.cfg.mu,
            self.exactness_degree,
            self.len()
        )?;
        let mut line = String::new();
        for (x, &w) in self.nodes.iter().zip(&self.weights) {
            line.clear();
            for &c in x.coords() {
                let _ = write!(line, "{c:.16e} ");
            }
            let _ = write!(line, "{w:.16e}");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_flat_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the flat format written by [`CubatureRule::write_to`].
    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse { line: i + 1, msg: e.to_string() }),
                None => Err(Error::Parse { line: 0, msg: format!("missing {what}") }),
            }
        };
        let (ln, tag) = next_line("format tag")?;
        if tag.trim() != FORMAT_TAG {
            return Err(Error::Parse { line: ln, msg: format!("unknown format tag {tag:?}") });
        }
        let (ln, header) = next_line("header")?;
        let mut d = None;
        let mut mu = None;
        let mut exactness = None;
        let mut count = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: ln, msg: format!("bad header field {field:?}") })?;
            let bad = |_| Error::Parse { line: ln, msg: format!("bad value in {field:?}") };
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "mu" => mu = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "exactness" => exactness = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "nodes" => count = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(Error::Parse { line: ln, msg: format!("unknown header key {key:?}") }),
            }
        }
        let missing = |k: &str| Error::Parse { line: ln, msg: format!("header lacks {k}") };
        let d = d.ok_or_else(|| missing("d"))?;
        let mu = mu.ok_or_else(|| missing("mu"))?;
        let exactness_degree = exactness.ok_or_else(|| missing("exactness"))?;
        let count = count.ok_or_else(|| missing("nodes"))?;
        let cfg = WeightConfig::new(d, mu)?;

        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, row) = next_line("node row")?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            if vals.len() != d + 1 {
                return Err(Error::Parse { line: ln, msg: format!("expected {} fields, found {}", d + 1, vals.len()) });
            }
            if !(vals[d] > 0.0) {
                return Err(Error::Parse { line: ln, msg: "weights must be positive".into() });
            }
            nodes.push(BallPoint::new(vals[..d].to_vec()));
            weights.push(vals[d]);
        }
        Ok(CubatureRule { cfg, nodes, weights, exactness_degree })
    }
}

//! Reproducing kernels, projections and spectral operators of `L_2(w_mu)`.
//!
//! Every operator here is a finite series `Σ_k c_k P_k(x, y)` in the
//! reproducing kernels of the spaces `V_k`. The kernels have the closed form
//!
//! ```text
//! P_k(x, y) = c_mu ∫ Z_k(x·y + t √(1-|x|²) √(1-|y|²)) (1 - t²)^(mu-1) dt
//! ```
//!
//! with `Z_k = ((k + λ)/λ) C_k^λ`, `λ = mu + (d-1)/2`, and `c_mu` making
//! `(1 - t²)^(mu-1) dt` a probability measure. At `mu = 0` the measure
//! degenerates to the two endpoints `t = ±1`.
//!
//! Applying a series to function values at the nodes of a cubature rule
//! goes through an explicit orthonormal basis when `d <= 2` and through the
//! kernel closed form otherwise.

use std::fmt;
use std::sync::Arc;

use crate::basis::{dot, OrthonormalBasis};
use crate::cubature::{build_rule, CubatureRule};
use crate::domain::{probe_grid, BallPoint};
use crate::error::{Error, Result};
use crate::filtering::{v_l_apply, Filter};
use crate::orthopoly::{gauss_jacobi, WeightConfig};
use crate::scalar::Real;

/// Shared, thread-safe function on the ball.
pub type Evaluator<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// A polynomial of known degree bound, represented by an evaluator.
#[derive(Clone)]
pub struct BandlimitedFunction<T> {
    pub degree: usize,
    pub label: String,
    evaluator: Evaluator<T>,
}

impl<T> fmt::Debug for BandlimitedFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandlimitedFunction")
            .field("degree", &self.degree)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl<T: Real> BandlimitedFunction<T> {
    pub fn new<F>(degree: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Send + Sync + 'static,
    {
        Self { degree, label: label.into(), evaluator: Arc::new(f) }
    }

    pub fn from_evaluator(degree: usize, label: impl Into<String>, evaluator: Evaluator<T>) -> Self {
        Self { degree, label: label.into(), evaluator }
    }

    pub fn constant(c: T) -> Self {
        Self::new(0, "constant", move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        (self.evaluator)(x)
    }

    pub fn evaluator(&self) -> Evaluator<T> {
        Arc::clone(&self.evaluator)
    }
}

/// Which representation to use when applying a kernel series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Basis for `d <= 2`, kernel otherwise.
    #[default]
    Auto,
    Basis,
    Kernel,
}

impl Route {
    pub(crate) fn use_basis(self, d: usize) -> Result<bool> {
        match self {
            Route::Auto => Ok(d <= 2),
            Route::Kernel => Ok(false),
            Route::Basis if d <= 2 => Ok(true),
            Route::Basis => Err(Error::arg(format!("basis route needs d <= 2, got d = {d}"))),
        }
    }
}

/// The kernel `Σ_k c_k P_k(x, y)` of a finite coefficient sequence, evaluated
/// through the closed form.
#[derive(Debug, Clone)]
pub struct ZonalSeries<T> {
    cfg: WeightConfig<T>,
    coeffs: Vec<T>,
    // C_{k+1} = rec_a[k] u C_k - rec_b[k] C_{k-1}
    rec_a: Vec<T>,
    rec_b: Vec<T>,
    // c_k times the zonal factor (k + λ)/λ
    weighted: Vec<T>,
    t_nodes: Vec<T>,
    t_weights: Vec<T>,
}

impl<T: Real> ZonalSeries<T> {
    pub fn new(cfg: &WeightConfig<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::arg("kernel series needs at least one coefficient"));
        }
        let top = coeffs.len() - 1;
        let lambda = cfg.lambda();
        let two = T::lit(2.0);
        let mut rec_a = Vec::with_capacity(top);
        let mut rec_b = Vec::with_capacity(top);
        let mut weighted = Vec::with_capacity(coeffs.len());
        if lambda == T::zero() {
            // Chebyshev limit: Z_k = 2 T_k for k >= 1
            for k in 0..top {
                rec_a.push(if k == 0 { T::one() } else { two });
                rec_b.push(if k == 0 { T::zero() } else { T::one() });
            }
            for (k, &c) in coeffs.iter().enumerate() {
                weighted.push(if k == 0 { c } else { two * c });
            }
        } else {
            for k in 0..top {
                let kf = T::of(k);
                rec_a.push(two * (kf + lambda) / (kf + T::one()));
                rec_b.push((kf + two * lambda - T::one()) / (kf + T::one()));
            }
            for (k, &c) in coeffs.iter().enumerate() {
                weighted.push(c * (T::of(k) + lambda) / lambda);
            }
        }
        let (t_nodes, t_weights) = if cfg.mu == T::zero() {
            (vec![-T::one(), T::one()], vec![T::lit(0.5), T::lit(0.5)])
        } else {
            let m1 = cfg.mu - T::one();
            let rule = gauss_jacobi((top + 1).div_ceil(2).max(1), m1, m1)?;
            let total: T = rule.weights.iter().copied().sum();
            let w = rule.weights.iter().map(|&w| w / total).collect();
            (rule.nodes, w)
        };
        Ok(Self { cfg: *cfg, coeffs, rec_a, rec_b, weighted, t_nodes, t_weights })
    }

    /// The single kernel `P_n`.
    pub fn single(cfg: &WeightConfig<T>, n: usize) -> Result<Self> {
        let mut c = vec![T::zero(); n + 1];
        c[n] = T::one();
        Self::new(cfg, c)
    }

    pub fn cfg(&self) -> &WeightConfig<T> {
        &self.cfg
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ_k c_k Z_k(u)`.
    #[inline]
    pub fn profile(&self, u: T) -> T {
        let mut prev = T::zero();
        let mut cur = T::one();
        let mut acc = self.weighted[0];
        for k in 0..self.rec_a.len() {
            let next = self.rec_a[k] * u * cur - self.rec_b[k] * prev;
            prev = cur;
            cur = next;
            acc = acc + self.weighted[k + 1] * cur;
        }
        acc
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        let mut xy = T::zero();
        let (mut xx, mut yy) = (T::zero(), T::zero());
        for (&a, &b) in x.iter().zip(y) {
            xy = xy + a * b;
            xx = xx + a * a;
            yy = yy + b * b;
        }
        let hxy = ((T::one() - xx).max(T::zero()) * (T::one() - yy).max(T::zero())).sqrt();
        let one = T::one();
        let mut acc = T::zero();
        for (&t, &w) in self.t_nodes.iter().zip(&self.t_weights) {
            let u = (xy + t * hxy).max(-one).min(one);
            acc = acc + w * self.profile(u);
        }
        acc
    }
}

/// `P_n(w_mu; x, y)` by the closed form.
pub fn kernel_eval<T: Real>(cfg: &WeightConfig<T>, n: usize, x: &[T], y: &[T]) -> Result<T> {
    Ok(ZonalSeries::single(cfg, n)?.eval(x, y))
}

/// `dim V_n = C(n + d - 1, d - 1)`.
pub fn dim_v(d: usize, n: usize) -> usize {
    let mut out: u128 = 1;
    for i in 1..d {
        out = out * (n + i) as u128 / i as u128;
    }
    out as usize
}

/// `y ↦ P_n(x, y)` for a fixed base point.
#[derive(Debug, Clone)]
pub struct KernelSlice<T> {
    pub n: usize,
    pub base_point: BallPoint<T>,
    series: ZonalSeries<T>,
}

impl<T: Real> KernelSlice<T> {
    pub fn new(cfg: &WeightConfig<T>, n: usize, base_point: BallPoint<T>) -> Result<Self> {
        Ok(Self { n, base_point, series: ZonalSeries::single(cfg, n)? })
    }

    pub fn cfg(&self) -> &WeightConfig<T> {
        self.series.cfg()
    }

    pub fn eval(&self, y: &[T]) -> T {
        self.series.eval(self.base_point.coords(), y)
    }

    pub fn to_function(&self) -> BandlimitedFunction<T> {
        let slice = self.clone();
        BandlimitedFunction::new(self.n, format!("P_{} slice", self.n), move |y| slice.eval(y))
    }
}

/// Eigenvalue weights `(k (k + 2mu + d - 1))^(r/2)` of `(-D_mu)^(r/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumWeights<T> {
    pub r: T,
    pub cfg: WeightConfig<T>,
}

impl<T: Real> SpectrumWeights<T> {
    pub fn new(cfg: &WeightConfig<T>, r: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::arg(format!("smoothness r must be positive, got {r}")));
        }
        Ok(Self { r, cfg: *cfg })
    }

    pub fn entry(&self, k: usize) -> T {
        let kf = T::of(k);
        let ev = kf * (kf + T::lit(2.0) * self.cfg.mu + T::of(self.cfg.d) - T::one());
        ev.powf(self.r * T::lit(0.5))
    }

    pub fn upto(&self, n: usize) -> Vec<T> {
        (0..=n).map(|k| self.entry(k)).collect()
    }
}

/// A kernel series applied to function values at cubature nodes:
/// `x ↦ Σ_ω λ_ω v_ω Σ_k c_k P_k(x, ω)`.
pub fn apply_series<T: Real>(
    rule: &CubatureRule<T>,
    values: &[T],
    coeffs: &[T],
    route: Route,
    label: impl Into<String>,
) -> Result<BandlimitedFunction<T>> {
    if values.len() != rule.len() {
        return Err(Error::arg(format!("{} node values for a rule with {} nodes", values.len(), rule.len())));
    }
    if coeffs.is_empty() {
        return Err(Error::arg("kernel series needs at least one coefficient"));
    }
    let degree = coeffs.len() - 1;
    let cfg = rule.cfg;
    if route.use_basis(cfg.d)? {
        let basis = OrthonormalBasis::new(&cfg, degree)?;
        let mut acc = vec![T::zero(); basis.len()];
        let mut buf = vec![T::zero(); basis.len()];
        for ((x, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(values) {
            basis.eval_into(x.coords(), &mut buf);
            let wv = w * v;
            for (a, &b) in acc.iter_mut().zip(&buf) {
                *a = *a + wv * b;
            }
        }
        for (a, t) in acc.iter_mut().zip(basis.terms()) {
            *a = *a * coeffs[t.degree];
        }
        Ok(basis_expansion(basis, acc, label))
    } else {
        let series = ZonalSeries::new(&cfg, coeffs.to_vec())?;
        let nodes: Vec<Vec<T>> = rule.nodes.iter().map(|p| p.coords().to_vec()).collect();
        let wv: Vec<T> = rule.weights.iter().zip(values).map(|(&w, &v)| w * v).collect();
        Ok(BandlimitedFunction::new(degree, label, move |x| {
            let mut acc = T::zero();
            for (node, &c) in nodes.iter().zip(&wv) {
                if c != T::zero() {
                    acc = acc + c * series.eval(x, node);
                }
            }
            acc
        }))
    }
}

pub(crate) fn basis_expansion<T: Real>(
    basis: OrthonormalBasis<T>,
    coeffs: Vec<T>,
    label: impl Into<String>,
) -> BandlimitedFunction<T> {
    let degree = basis.terms().iter().zip(&coeffs).filter(|(_, &c)| c != T::zero()).map(|(t, _)| t.degree).max();
    let basis = Arc::new(basis);
    BandlimitedFunction::new(degree.unwrap_or(0), label, move |x| {
        let mut buf = vec![T::zero(); basis.len()];
        basis.eval_into(x, &mut buf);
        dot(&buf, &coeffs)
    })
}

fn check_exactness<T: Real>(rule: &CubatureRule<T>, needed: usize, what: &str) -> Result<()> {
    if rule.exactness_degree < needed {
        return Err(Error::arg(format!(
            "{what} needs a rule exact to degree {needed}, got degree {}",
            rule.exactness_degree
        )));
    }
    Ok(())
}

fn node_values<T: Real, F: Fn(&[T]) -> T + ?Sized>(rule: &CubatureRule<T>, f: &F) -> Vec<T> {
    rule.nodes.iter().map(|x| f(x.coords())).collect()
}

/// `(Proj_k f)(x)` as the cubature value of `y ↦ f(y) P_k(x, y)`.
pub fn proj_eval<T: Real>(
    f: &BandlimitedFunction<T>,
    k: usize,
    x: &[T],
    rule: &CubatureRule<T>,
) -> Result<T> {
    check_exactness(rule, f.degree + k, "projection")?;
    let series = ZonalSeries::single(&rule.cfg, k)?;
    Ok(rule.integrate(&|y: &[T]| f.eval(y) * series.eval(x, y)))
}

/// `Proj_k f` as a band-limited function.
pub fn projection<T: Real>(f: &BandlimitedFunction<T>, k: usize, rule: &CubatureRule<T>) -> Result<BandlimitedFunction<T>> {
    check_exactness(rule, f.degree + k, "projection")?;
    let mut coeffs = vec![T::zero(); k + 1];
    coeffs[k] = T::one();
    apply_series(rule, &node_values(rule, &|x: &[T]| f.eval(x)), &coeffs, Route::Auto, format!("Proj_{k}"))
}

/// `(-D_mu)^(r/2) f = Σ_k (k (k + 2mu + d - 1))^(r/2) Proj_k f`.
pub fn frac_dmu_apply<T: Real>(
    f: &BandlimitedFunction<T>,
    r: T,
    rule: &CubatureRule<T>,
) -> Result<BandlimitedFunction<T>> {
    frac_dmu_apply_with(f, r, rule, Route::Auto)
}

pub fn frac_dmu_apply_with<T: Real>(
    f: &BandlimitedFunction<T>,
    r: T,
    rule: &CubatureRule<T>,
    route: Route,
) -> Result<BandlimitedFunction<T>> {
    check_exactness(rule, 2 * f.degree, "fractional operator")?;
    let weights = SpectrumWeights::new(&rule.cfg, r)?.upto(f.degree);
    let values = node_values(rule, &|x: &[T]| f.eval(x));
    let mut out = apply_series(rule, &values, &weights, route, format!("(-D)^{r}/2 {}", f.label))?;
    out.degree = f.degree;
    Ok(out)
}

/// Relative change allowed between a norm and its value at doubled degree.
pub const NORM_SELF_CHECK: f64 = 1e-3;

/// `‖f‖_{p,mu}` by cubature, with `p = ∞` handled as a maximum over rule
/// nodes and a dense probe grid.
///
/// For finite `p` the value at `quad_degree` is compared with the value at
/// `2 quad_degree`; a relative change above [`NORM_SELF_CHECK`] is reported
/// as a certification error unless `|f| <= 64 ε` on a dense probe grid,
/// which covers functions that vanish up to rounding. The doubled value is
/// returned.
pub fn lp_norm<T: Real, F: Fn(&[T]) -> T + ?Sized>(
    cfg: &WeightConfig<T>,
    f: &F,
    p: T,
    quad_degree: usize,
) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::arg(format!("p must be >= 1, got {p}")));
    }
    let quad_degree = quad_degree.max(1);
    if p.is_infinite() {
        let rule = build_rule(cfg, quad_degree)?;
        let resolution = if cfg.d <= 2 { quad_degree.max(48) } else { quad_degree.clamp(8, 16) };
        let probes = probe_grid::<T>(cfg.d, resolution);
        let m = rule
            .nodes
            .iter()
            .chain(&probes)
            .map(|x| f(x.coords()).abs())
            .fold(T::zero(), T::max);
        return Ok(m);
    }
    let at = |degree: usize| -> Result<T> {
        let rule = build_rule(cfg, degree)?;
        Ok(rule.integrate(&|x: &[T]| f(x).abs().powf(p)).max(T::zero()).powf(p.recip()))
    };
    let coarse = at(quad_degree)?;
    let fine = at(2 * quad_degree)?;
    let scale = fine.abs().max(coarse.abs());
    if (fine - coarse).abs() > T::lit(NORM_SELF_CHECK) * scale && !numerically_zero(cfg, f, quad_degree) {
        return Err(Error::cert(format!(
            "L_p norm (p = {p}) not resolved at degree {quad_degree}: {coarse:e} vs {fine:e} at double degree"
        )));
    }
    Ok(fine)
}

// Both rules can straddle a narrow feature, so tiny norms count as zero
// only when a probe grid agrees.
fn numerically_zero<T: Real, F: Fn(&[T]) -> T + ?Sized>(cfg: &WeightConfig<T>, f: &F, quad_degree: usize) -> bool {
    let floor = T::lit(64.0) * T::epsilon();
    let resolution = if cfg.d <= 2 { quad_degree.max(48) } else { quad_degree.clamp(8, 16) };
    probe_grid::<T>(cfg.d, resolution).iter().all(|x| f(x.coords()).abs() <= floor)
}

/// `‖f‖_{p,mu} + ‖(-D_mu)^(r/2) f‖_{p,mu}` for a band-limited `f`.
pub fn sobolev_norm<T: Real>(f: &BandlimitedFunction<T>, r: T, p: T, rule: &CubatureRule<T>) -> Result<T> {
    let g = frac_dmu_apply(f, r, rule)?;
    let quad = rule.exactness_degree;
    Ok(lp_norm(&rule.cfg, &|x: &[T]| f.eval(x), p, quad)? + lp_norm(&rule.cfg, &|x: &[T]| g.eval(x), p, quad)?)
}

/// Besov-norm estimate `‖f‖ + (Σ_j 2^{j r τ} ‖f - V_{2^j} f‖^τ)^{1/τ}` over
/// `2^j <= deg f`, with `‖f - V_L f‖` standing in for the best
/// approximation error. `τ = ∞` takes the supremum.
pub fn besov_norm_estimate<T: Real>(
    f: &BandlimitedFunction<T>,
    r: T,
    tau: T,
    p: T,
    filter: &Filter,
    rule: &CubatureRule<T>,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::arg(format!("tau must be positive, got {tau}")));
    }
    let cfg = rule.cfg;
    let quad = rule.exactness_degree;
    let base = lp_norm(&cfg, &|x: &[T]| f.eval(x), p, quad)?;
    let mut terms = Vec::new();
    let mut j = 0u32;
    while 1usize << j <= f.degree {
        let level = 1usize << j;
        let v = v_l_apply(f, level, filter, rule)?;
        let err = lp_norm(&cfg, &|x: &[T]| f.eval(x) - v.eval(x), p, quad)?;
        terms.push(T::lit(2.0).powf(T::of(j as usize) * r) * err);
        j += 1;
    }
    let tail = if tau.is_infinite() {
        terms.iter().copied().fold(T::zero(), T::max)
    } else {
        terms.iter().map(|&t| t.powf(tau)).sum::<T>().powf(tau.recip())
    };
    Ok(base + tail)
}

//! The smooth cutoff `η`, the filtered kernel `K_{L,η}` and the operator
//! `V_L f = Σ_k η(k/L) Proj_k f`.

use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::orthopoly::WeightConfig;
use crate::scalar::Real;
use crate::spectral::{apply_series, BandlimitedFunction, Route, ZonalSeries};

/// Smooth cutoff with `η = 1` on `[0, 1]` and `η = 0` on `[2, ∞)`.
///
/// On `(1, 2)` it is `g(2 - t) / (g(2 - t) + g(t - 1))` with
/// `g(s) = exp(-1/s)`, which is `C^∞` and symmetric about `t = 3/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Filter;

impl Filter {
    /// Right end of the support.
    pub const SUPPORT_HI: f64 = 2.0;

    pub fn eval<T: Real>(&self, t: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        if t <= one {
            return one;
        }
        if t >= two {
            return T::zero();
        }
        let g = |s: T| if s > T::zero() { (-s.recip()).exp() } else { T::zero() };
        let a = g(two - t);
        let b = g(t - one);
        a / (a + b)
    }

    /// `η(k/L)` for `k = 0 .. 2L - 1`; all later values vanish.
    pub fn coefficients<T: Real>(&self, level: usize) -> Vec<T> {
        let l = T::of(level);
        (0..2 * level).map(|k| self.eval(T::of(k) / l)).collect()
    }
}

pub fn eta_eval<T: Real>(filter: &Filter, t: T) -> T {
    filter.eval(t)
}

/// `K_{L,η}(x, y) = Σ_{k < 2L} η(k/L) P_k(x, y)`.
#[derive(Debug, Clone)]
pub struct FilteredKernel<T> {
    pub level: usize,
    pub filter: Filter,
    series: ZonalSeries<T>,
}

impl<T: Real> FilteredKernel<T> {
    pub fn new(cfg: &WeightConfig<T>, level: usize, filter: Filter) -> Result<Self> {
        if level == 0 {
            return Err(Error::arg("filter level L must be positive"));
        }
        let series = ZonalSeries::new(cfg, filter.coefficients(level))?;
        Ok(Self { level, filter, series })
    }

    pub fn cfg(&self) -> &WeightConfig<T> {
        self.series.cfg()
    }

    pub fn coefficients(&self) -> &[T] {
        self.series.coefficients()
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        self.series.eval(x, y)
    }
}

pub fn filtered_kernel_eval<T: Real>(kernel: &FilteredKernel<T>, x: &[T], y: &[T]) -> T {
    kernel.eval(x, y)
}

/// `V_L f` for a band-limited `f`, exact when the rule integrates
/// `Π_{deg f + 2L - 1}`.
pub fn v_l_apply<T: Real>(
    f: &BandlimitedFunction<T>,
    level: usize,
    filter: &Filter,
    rule: &CubatureRule<T>,
) -> Result<BandlimitedFunction<T>> {
    v_l_apply_with(f, level, filter, rule, Route::Auto)
}

pub fn v_l_apply_with<T: Real>(
    f: &BandlimitedFunction<T>,
    level: usize,
    filter: &Filter,
    rule: &CubatureRule<T>,
    route: Route,
) -> Result<BandlimitedFunction<T>> {
    if level == 0 {
        return Err(Error::arg("filter level L must be positive"));
    }
    let needed = f.degree + 2 * level - 1;
    if rule.exactness_degree < needed {
        return Err(Error::arg(format!(
            "V_{level} of a degree-{} function needs a rule exact to degree {needed}, got {}",
            f.degree, rule.exactness_degree
        )));
    }
    let values: Vec<T> = rule.nodes.iter().map(|x| f.eval(x.coords())).collect();
    let mut out = apply_series(rule, &values, &filter.coefficients(level), route, format!("V_{level} {}", f.label))?;
    out.degree = 2 * level - 1;
    Ok(out)
}

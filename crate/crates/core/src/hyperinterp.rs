//! Filtered hyperinterpolation `G_L f(x) = Σ_ω λ_ω f(ω) K_{L,η}(x, ω)` over
//! a positive rule exact on `Π_{3L}`.

use std::sync::Arc;

use crate::basis::{dot, OrthonormalBasis};
use crate::cubature::{build_rule, CubatureRule};
use crate::domain::{separated_set, BallPoint};
use crate::error::{Error, Result};
use crate::filtering::{Filter, FilteredKernel};
use crate::orthopoly::WeightConfig;
use crate::scalar::Real;
use crate::spectral::{basis_expansion, BandlimitedFunction, Route};

/// Orthonormal basis values at every rule node, row per node.
#[derive(Debug)]
struct NodeTable<T> {
    basis: OrthonormalBasis<T>,
    rows: Vec<T>,
    width: usize,
}

impl<T: Real> NodeTable<T> {
    fn row(&self, i: usize) -> &[T] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }
}

/// The operator `G_L` bound to one cubature rule.
#[derive(Debug, Clone)]
pub struct HyperinterpOperator<T> {
    pub level: usize,
    pub kernel: FilteredKernel<T>,
    rule: Arc<CubatureRule<T>>,
    table: Option<Arc<NodeTable<T>>>,
}

impl<T: Real> HyperinterpOperator<T> {
    /// Builds the product rule of degree `3L` and the operator on it.
    pub fn new(cfg: &WeightConfig<T>, level: usize, filter: Filter) -> Result<Self> {
        let rule = build_rule(cfg, 3 * level.max(1))?;
        Self::with_rule(Arc::new(rule), level, filter, Route::Auto)
    }

    pub fn with_rule(rule: Arc<CubatureRule<T>>, level: usize, filter: Filter, route: Route) -> Result<Self> {
        if level == 0 {
            return Err(Error::arg("hyperinterpolation level L must be positive"));
        }
        if rule.exactness_degree < 3 * level {
            return Err(Error::arg(format!(
                "G_{level} needs a rule exact to degree {}, got {}",
                3 * level,
                rule.exactness_degree
            )));
        }
        let cfg = rule.cfg;
        let kernel = FilteredKernel::new(&cfg, level, filter)?;
        let table = if route.use_basis(cfg.d)? {
            let basis = OrthonormalBasis::new(&cfg, 2 * level - 1)?;
            let width = basis.len();
            let mut rows = vec![T::zero(); width * rule.len()];
            for (chunk, x) in rows.chunks_exact_mut(width).zip(&rule.nodes) {
                basis.eval_into(x.coords(), chunk);
            }
            Some(Arc::new(NodeTable { basis, rows, width }))
        } else {
            None
        };
        Ok(Self { level, kernel, rule, table })
    }

    pub fn rule(&self) -> &CubatureRule<T> {
        &self.rule
    }

    pub fn cfg(&self) -> &WeightConfig<T> {
        &self.rule.cfg
    }

    pub fn node_count(&self) -> usize {
        self.rule.len()
    }

    /// Values of `f` at the rule nodes, in node order.
    pub fn sample<F: Fn(&[T]) -> T + ?Sized>(&self, f: &F) -> Vec<T> {
        self.rule.nodes.iter().map(|x| f(x.coords())).collect()
    }

    /// `G_L f`, evaluating `f` only at the rule nodes.
    pub fn g_l_apply<F: Fn(&[T]) -> T + ?Sized>(&self, f: &F) -> BandlimitedFunction<T> {
        self.from_node_values(&self.sample(f))
    }

    /// `G_L f` from precomputed node values.
    pub fn from_node_values(&self, values: &[T]) -> BandlimitedFunction<T> {
        assert_eq!(values.len(), self.rule.len(), "one value per rule node");
        let label = format!("G_{}", self.level);
        match &self.table {
            Some(table) => {
                let mut acc = vec![T::zero(); table.width];
                for (i, (&w, &v)) in self.rule.weights.iter().zip(values).enumerate() {
                    let wv = w * v;
                    for (a, &b) in acc.iter_mut().zip(table.row(i)) {
                        *a = *a + wv * b;
                    }
                }
                let eta = self.kernel.coefficients();
                for (a, t) in acc.iter_mut().zip(table.basis.terms()) {
                    *a = *a * eta[t.degree];
                }
                let mut out = basis_expansion(table.basis.clone(), acc, label);
                out.degree = 2 * self.level - 1;
                out
            }
            None => {
                let kernel = self.kernel.clone();
                let rule = Arc::clone(&self.rule);
                let wv: Vec<T> = rule.weights.iter().zip(values).map(|(&w, &v)| w * v).collect();
                BandlimitedFunction::new(2 * self.level - 1, label, move |x| {
                    let mut acc = T::zero();
                    for (node, &c) in rule.nodes.iter().zip(&wv) {
                        acc = acc + c * kernel.eval(x, node.coords());
                    }
                    acc
                })
            }
        }
    }

    /// `∫ G_L f w_mu = Σ_ω λ_ω f(ω)`.
    pub fn int_of_g_l<F: Fn(&[T]) -> T + ?Sized>(&self, f: &F) -> T {
        self.rule.integrate(f)
    }

    /// `Σ_ω λ_ω |K_{L,η}(x, ω)|` at one point.
    pub fn lebesgue_function(&self, x: &[T]) -> T {
        match &self.table {
            Some(table) => {
                let eta = self.kernel.coefficients();
                let mut phi = table.basis.eval(x);
                for (v, t) in phi.iter_mut().zip(table.basis.terms()) {
                    *v = *v * eta[t.degree];
                }
                let mut acc = T::zero();
                for (i, &w) in self.rule.weights.iter().enumerate() {
                    acc = acc + w * dot(&phi, table.row(i)).abs();
                }
                acc
            }
            None => {
                let mut acc = T::zero();
                for (node, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                    acc = acc + w * self.kernel.eval(x, node.coords()).abs();
                }
                acc
            }
        }
    }

    /// Maximum of [`Self::lebesgue_function`] over `probe_count` spread
    /// points and all rule nodes. A lower bound on the true supremum.
    pub fn lebesgue_estimate(&self, probe_count: usize) -> Result<T> {
        let mut probes = spread_points(self.cfg(), probe_count)?;
        probes.extend(self.rule.nodes.iter().cloned());
        Ok(probes.iter().map(|x| self.lebesgue_function(x.coords())).fold(T::zero(), T::max))
    }
}

/// The first `count` points of a greedy farthest-point sequence in the
/// metric `ρ`, refining the separation until enough points exist.
pub fn spread_points<T: Real>(cfg: &WeightConfig<T>, count: usize) -> Result<Vec<BallPoint<T>>> {
    if count == 0 {
        return Err(Error::arg("probe count must be positive"));
    }
    let mut eps = T::FRAC_PI_2();
    loop {
        let resolution = (T::PI() * T::of(cfg.d).sqrt() / eps).ceil().to_f64_lossy() as usize + 1;
        let set = separated_set(cfg, eps, resolution)?;
        if set.len() >= count {
            return Ok(set.points.into_iter().take(count).collect());
        }
        eps = eps * T::lit(0.75);
    }
}

//! Disjointly supported bumps that a given node set cannot see.
//!
//! A [`BumpSystem`] places `4n` centers on a square lattice of spacing `4/m`
//! inside `B(0, 2/3)` and attaches to each the scaled profile
//! `φ(m(x - x_j))`, where `φ(u) = η(2|u|)` with the smooth cutoff `η` of
//! [`Filter`]: `φ = 1` on `|u| <= 1/2`, `φ = 0` for `|u| >= 1`, and `φ` is
//! `C^∞`. Supports have radius `1/m`, so distinct bumps are at least `2/m`
//! apart.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::BallPoint;
use crate::error::{Error, Result};
use crate::filtering::Filter;
use crate::orthopoly::{gauss_jacobi, WeightConfig};

/// Smallest admissible scale.
pub const MIN_SCALE: usize = 6;

/// Relative size of the Richardson correction tolerated by [`certify_norm`].
pub const RICHARDSON_TOL: f64 = 1e-3;

/// The bump profile `φ(u) = η(2|u|)`.
pub fn bump_profile(u: &[f64]) -> f64 {
    let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    Filter.eval(2.0 * r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpSystem {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub centers: Vec<Vec<f64>>,
    lattice: Vec<Vec<i64>>,
    #[serde(skip)]
    index: HashMap<Vec<i64>, usize>,
}

fn lattice_points(d: usize, m: usize) -> Vec<Vec<i64>> {
    // k h in B(0, 2/3) with h = 4/m  <=>  36 |k|^2 <= m^2
    let bound = (m / 6) as i64;
    let limit = (m * m) as i64;
    let mut out = Vec::new();
    let mut cur = vec![-bound; d];
    loop {
        if 36 * cur.iter().map(|k| k * k).sum::<i64>() <= limit {
            out.push(cur.clone());
        }
        let mut axis = 0;
        loop {
            if axis == d {
                out.sort_by_key(|k| (k.iter().map(|v| v * v).sum::<i64>(), k.clone()));
                return out;
            }
            cur[axis] += 1;
            if cur[axis] > bound {
                cur[axis] = -bound;
                axis += 1;
            } else {
                break;
            }
        }
    }
}

impl BumpSystem {
    /// Lattice capacity of `B(0, 2/3)` at scale `m`.
    pub fn capacity(d: usize, m: usize) -> usize {
        lattice_points(d, m).len()
    }

    /// `4n` bumps at scale `m`, innermost lattice points first.
    pub fn with_scale(d: usize, m: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::arg("bump systems need d >= 1 and n >= 1"));
        }
        if m < MIN_SCALE {
            return Err(Error::arg(format!("scale m must be at least {MIN_SCALE}, got {m}")));
        }
        let mut lattice = lattice_points(d, m);
        if lattice.len() < 4 * n {
            return Err(Error::arg(format!(
                "scale m = {m} hosts {} centers, {} needed",
                lattice.len(),
                4 * n
            )));
        }
        lattice.truncate(4 * n);
        let h = 4.0 / m as f64;
        let centers = lattice.iter().map(|k| k.iter().map(|&v| v as f64 * h).collect()).collect();
        let index = lattice.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Self { d, m, n, centers, lattice, index })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Support radius `1/m`.
    pub fn radius(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `φ(m(x - x_j))`.
    pub fn bump(&self, j: usize, x: &[f64]) -> f64 {
        let m = self.m as f64;
        let u: Vec<f64> = x.iter().zip(&self.centers[j]).map(|(a, c)| m * (a - c)).collect();
        bump_profile(&u)
    }

    /// Index of the only bump whose support can contain `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let scale = self.m as f64 / 4.0;
        let key: Vec<i64> = x.iter().map(|&v| (v * scale).round() as i64).collect();
        let j = *self.index.get(&key)?;
        let dist2: f64 = x.iter().zip(&self.centers[j]).map(|(a, c)| (a - c) * (a - c)).sum();
        (dist2 < self.radius() * self.radius()).then_some(j)
    }

    fn rebuild_index(&mut self) {
        if self.index.is_empty() {
            self.index = self.lattice.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        }
    }
}

/// The bump system for budget `n`: smallest `m >= 6` hosting `4n` centers.
pub fn build_bump_system(cfg: &WeightConfig<f64>, n: usize) -> Result<BumpSystem> {
    if n == 0 {
        return Err(Error::arg("bump systems need n >= 1"));
    }
    let mut m = MIN_SCALE;
    while BumpSystem::capacity(cfg.d, m) < 4 * n {
        m += 1;
    }
    BumpSystem::with_scale(cfg.d, m, n)
}

/// `normalization · Σ_j α_j φ_j(x)` with `α_j ∈ {-1, 0, 1}`.
#[derive(Debug, Clone)]
pub struct FoolingFunction {
    pub system: Arc<BumpSystem>,
    pub signs: Vec<i8>,
    pub normalization: f64,
}

impl FoolingFunction {
    pub fn new(system: Arc<BumpSystem>, signs: Vec<i8>, normalization: f64) -> Result<Self> {
        if signs.len() != system.len() {
            return Err(Error::arg(format!("{} signs for {} bumps", signs.len(), system.len())));
        }
        if signs.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::arg("signs must lie in {-1, 0, 1}"));
        }
        let mut system = system;
        Arc::make_mut(&mut system).rebuild_index();
        Ok(Self { system, signs, normalization })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.system.locate(x) {
            Some(j) if self.signs[j] != 0 => self.normalization * f64::from(self.signs[j]) * self.system.bump(j, x),
            _ => 0.0,
        }
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.signs.iter().enumerate().filter(|(_, &s)| s != 0).map(|(j, _)| j)
    }

    /// `∫ f w_mu`, summed bump by bump.
    pub fn integral(&self, cfg: &WeightConfig<f64>) -> f64 {
        let quad = LocalQuadrature::new(cfg.d, 12, 8);
        self.active()
            .map(|j| {
                let s = f64::from(self.signs[j]);
                s * quad.integrate(&self.system, j, cfg, &|x| self.system.bump(j, x))
            })
            .sum::<f64>()
            * self.normalization
    }
}

/// Composite Gauss-Legendre rule on the support box of a bump.
struct LocalQuadrature {
    d: usize,
    // points and weights on [-1, 1]
    t: Vec<f64>,
    w: Vec<f64>,
}

impl LocalQuadrature {
    fn new(d: usize, panels: usize, order: usize) -> Self {
        let gl = gauss_jacobi::<f64>(order, 0.0, 0.0).expect("Gauss-Legendre rule");
        let h = 2.0 / panels as f64;
        let mut t = Vec::with_capacity(panels * order);
        let mut w = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = -1.0 + h * (p as f64 + 0.5);
            for (&x, &wx) in gl.nodes.iter().zip(&gl.weights) {
                t.push(mid + 0.5 * h * x);
                w.push(0.5 * h * wx);
            }
        }
        Self { d, t, w }
    }

    /// `∫_{B(x_j, 1/m)} g w_mu`.
    fn integrate(&self, system: &BumpSystem, j: usize, cfg: &WeightConfig<f64>, g: &dyn Fn(&[f64]) -> f64) -> f64 {
        let radius = system.radius();
        let center = &system.centers[j];
        let k = self.t.len();
        let mut idx = vec![0usize; self.d];
        let mut x = vec![0.0; self.d];
        let mut total = 0.0;
        loop {
            let mut u2 = 0.0;
            let mut weight = 1.0;
            for (a, &i) in idx.iter().enumerate() {
                u2 += self.t[i] * self.t[i];
                weight *= self.w[i];
                x[a] = center[a] + radius * self.t[i];
            }
            if u2 < 1.0 {
                total += weight * g(&x) * cfg.density(&x);
            }
            let mut a = 0;
            loop {
                if a == self.d {
                    return total * radius.powi(self.d as i32);
                }
                idx[a] += 1;
                if idx[a] == k {
                    idx[a] = 0;
                    a += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// `D_mu g(x) = Δg - Σ x_i x_k ∂_ik g - (2mu + d) x·∇g` by central
/// differences with step `h`.
fn d_mu_fd(cfg: &WeightConfig<f64>, g: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let d = x.len();
    let c = 2.0 * cfg.mu + d as f64;
    let g0 = g(x);
    let mut y = x.to_vec();
    let mut out = 0.0;
    for i in 0..d {
        y[i] = x[i] + h;
        let gp = g(&y);
        y[i] = x[i] - h;
        let gm = g(&y);
        y[i] = x[i];
        let second = (gp - 2.0 * g0 + gm) / (h * h);
        let first = (gp - gm) / (2.0 * h);
        out += (1.0 - x[i] * x[i]) * second - c * x[i] * first;
        for k in i + 1..d {
            let mut corner = |si: f64, sk: f64| {
                y[i] = x[i] + si * h;
                y[k] = x[k] + sk * h;
                let v = g(&y);
                y[i] = x[i];
                y[k] = x[k];
                v
            };
            let mixed = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
            out -= 2.0 * x[i] * x[k] * mixed;
        }
    }
    out
}

/// Richardson-extrapolated `D_mu g(x)` and the size of the correction.
fn d_mu_richardson(cfg: &WeightConfig<f64>, g: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> (f64, f64) {
    let coarse = d_mu_fd(cfg, g, x, h);
    let fine = d_mu_fd(cfg, g, x, 0.5 * h);
    let value = (4.0 * fine - coarse) / 3.0;
    (value, (value - fine).abs())
}

/// `D_mu^v g(x)` by nested extrapolated differences.
fn d_mu_power(cfg: &WeightConfig<f64>, g: &dyn Fn(&[f64]) -> f64, x: &[f64], v: usize, h: f64) -> (f64, f64) {
    if v == 1 {
        return d_mu_richardson(cfg, g, x, h);
    }
    let inner = |y: &[f64]| d_mu_power(cfg, g, y, v - 1, h).0;
    d_mu_richardson(cfg, &inner, x, h)
}

/// Norm surrogate `‖f‖_p + ‖D_mu^v f‖_p^θ ‖f‖_p^{1-θ}` with `v = ⌈r/2⌉` and
/// `θ = r/(2v)`, which interpolates between `‖f‖_p` and `‖(-D_mu)^v f‖_p`
/// as `‖(-D_mu)^{r/2} f‖_p` does.
///
/// `D_mu` is applied by central differences with Richardson
/// extrapolation at step `h = 0.005/m`; a correction larger than
/// [`RICHARDSON_TOL`] relative to the result is reported as a
/// certification error. `p = ∞` takes maxima over a grid on each support.
pub fn certify_norm(cfg: &WeightConfig<f64>, f: &FoolingFunction, r: f64, p: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::arg(format!("smoothness r must be positive, got {r}")));
    }
    if !(p >= 1.0) {
        return Err(Error::arg(format!("p must be >= 1, got {p}")));
    }
    let active: Vec<usize> = f.active().collect();
    if active.is_empty() || f.normalization == 0.0 {
        return Ok(0.0);
    }
    let system = &f.system;
    let v = (r / 2.0).ceil().max(1.0) as usize;
    let theta = r / (2.0 * v as f64);
    let h = 0.005 / system.m as f64;
    let scale = f.normalization.abs();

    let (base, deriv, correction) = if p.is_infinite() {
        let grid = if cfg.d <= 2 { 25 } else { 9 };
        let mut deriv = 0.0_f64;
        let mut corr = 0.0_f64;
        for &j in &active {
            let g = |x: &[f64]| system.bump(j, x);
            for_each_grid_point(system, j, grid, |x| {
                let (val, c) = d_mu_power(cfg, &g, x, v, h);
                deriv = deriv.max(val.abs());
                corr = corr.max(c);
            });
        }
        // φ_j(x_j) = 1 is the maximum of every bump
        (scale, scale * deriv, scale * corr)
    } else {
        let quad = LocalQuadrature::new(cfg.d, 12, 8);
        let coarse = if cfg.d <= 2 { LocalQuadrature::new(cfg.d, 6, 4) } else { LocalQuadrature::new(cfg.d, 2, 3) };
        let mut base = 0.0;
        let mut deriv = 0.0;
        let mut corr = 0.0;
        for &j in &active {
            let g = |x: &[f64]| system.bump(j, x);
            base += quad.integrate(system, j, cfg, &|x| g(x).abs().powf(p));
            deriv += coarse.integrate(system, j, cfg, &|x| d_mu_power(cfg, &g, x, v, h).0.abs().powf(p));
            corr += coarse.integrate(system, j, cfg, &|x| d_mu_power(cfg, &g, x, v, h).1.powf(p));
        }
        (scale * base.powf(1.0 / p), scale * deriv.powf(1.0 / p), scale * corr.powf(1.0 / p))
    };
    if correction > RICHARDSON_TOL * deriv.max(f64::MIN_POSITIVE) {
        return Err(Error::cert(format!(
            "finite differences unresolved at m = {}: correction {correction:.3e} against {deriv:.3e}",
            system.m
        )));
    }
    Ok(base + deriv.powf(theta) * base.powf(1.0 - theta))
}

fn for_each_grid_point(system: &BumpSystem, j: usize, per_axis: usize, mut visit: impl FnMut(&[f64])) {
    let d = system.d;
    let radius = system.radius();
    let center = &system.centers[j];
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut u2 = 0.0;
        for a in 0..d {
            let t = -1.0 + 2.0 * idx[a] as f64 / (per_axis - 1) as f64;
            u2 += t * t;
            x[a] = center[a] + radius * t;
        }
        if u2 <= 1.0 {
            visit(&x);
        }
        let mut a = 0;
        loop {
            if a == d {
                return;
            }
            idx[a] += 1;
            if idx[a] == per_axis {
                idx[a] = 0;
                a += 1;
            } else {
                break;
            }
        }
    }
}

/// A fooling function for one rule and its true integral.
#[derive(Debug, Clone)]
pub struct FoolOutcome {
    pub function: FoolingFunction,
    /// `∫ f w_mu > 0` while the rule sees only zeros.
    pub witness: f64,
    /// Value of the unnormalized surrogate norm used for scaling.
    pub raw_norm: f64,
}

/// Builds `4n` bumps, keeps those whose support avoids every node, scales
/// the sum into the unit ball of the norm surrogate and returns it with its
/// integral.
pub fn fool_rule(
    cfg: &WeightConfig<f64>,
    rule_nodes: &[BallPoint<f64>],
    n: usize,
    r: f64,
    p: f64,
) -> Result<FoolOutcome> {
    if rule_nodes.len() > n {
        return Err(Error::arg(format!("{} nodes exceed the budget n = {n}", rule_nodes.len())));
    }
    let system = Arc::new(build_bump_system(cfg, n)?);
    let mut signs = vec![1i8; system.len()];
    for node in rule_nodes {
        if let Some(j) = system.locate(node.coords()) {
            signs[j] = 0;
        }
    }
    let raw = FoolingFunction::new(Arc::clone(&system), signs.clone(), 1.0)?;
    let raw_norm = certify_norm(cfg, &raw, r, p)?;
    if raw_norm == 0.0 {
        return Err(Error::cert("every bump was hit by a node"));
    }
    let function = FoolingFunction::new(system, signs, 1.0 / raw_norm)?;
    let witness = function.integral(cfg);
    Ok(FoolOutcome { function, witness, raw_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        assert_eq!(bump_profile(&[0.0, 0.0]), 1.0);
        assert_eq!(bump_profile(&[0.3, 0.35]), 1.0);
        assert_eq!(bump_profile(&[1.0, 0.0]), 0.0);
        let v = bump_profile(&[0.75, 0.0]);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn centers_fit_and_separate() {
        let cfg = WeightConfig::new(2, 0.5).unwrap();
        let sys = build_bump_system(&cfg, 16).unwrap();
        assert!(sys.m >= MIN_SCALE);
        assert_eq!(sys.len(), 64);
        let h = 4.0 / sys.m as f64;
        for (i, a) in sys.centers.iter().enumerate() {
            assert!(a.iter().map(|v| v * v).sum::<f64>().sqrt() <= 2.0 / 3.0 + 1e-12);
            for b in &sys.centers[i + 1..] {
                let dist = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                assert!(dist >= h - 1e-12);
            }
            assert_eq!(sys.bump(i, a), 1.0);
        }
        assert!(BumpSystem::capacity(2, sys.m - 1) < 64 || sys.m == MIN_SCALE);
    }

    #[test]
    fn locate_finds_owning_bump() {
        let sys = BumpSystem::with_scale(1, 30, 1).unwrap();
        let j = 2;
        let mut x = sys.centers[j].clone();
        x[0] += 0.5 / 30.0;
        assert_eq!(sys.locate(&x), Some(j));
        x[0] += 1.0 / 30.0;
        assert_eq!(sys.locate(&x), None);
    }

    #[test]
    fn zero_signs_have_zero_norm() {
        let cfg = WeightConfig::new(2, 0.5).unwrap();
        let sys = Arc::new(build_bump_system(&cfg, 4).unwrap());
        let f = FoolingFunction::new(Arc::clone(&sys), vec![0; sys.len()], 1.0).unwrap();
        assert_eq!(certify_norm(&cfg, &f, 2.0, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn sign_flip_keeps_norm() {
        let cfg = WeightConfig::new(2, 0.5).unwrap();
        let sys = Arc::new(build_bump_system(&cfg, 2).unwrap());
        let plus: Vec<i8> = (0..sys.len()).map(|j| if j % 3 == 0 { 0 } else { 1 }).collect();
        let minus: Vec<i8> = plus.iter().map(|s| -s).collect();
        for p in [2.0, f64::INFINITY] {
            let a = certify_norm(&cfg, &FoolingFunction::new(Arc::clone(&sys), plus.clone(), 1.0).unwrap(), 2.0, p).unwrap();
            let b = certify_norm(&cfg, &FoolingFunction::new(Arc::clone(&sys), minus.clone(), 1.0).unwrap(), 2.0, p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn finite_differences_match_analytic_operator() {
        // D_mu x1^2 = 2(1 - x1^2) - 2 x1^2 ... computed by hand for d = 2
        let cfg = WeightConfig::new(2, 0.5).unwrap();
        let g = |x: &[f64]| x[0] * x[0] + x[0] * x[1];
        let x = [0.3, -0.2];
        // Δg = 2; Σ x_i x_k ∂_ik g = x1^2·2 + 2 x1 x2·1; x·∇g = 2 g
        let exact = 2.0 - (2.0 * x[0] * x[0] + 2.0 * x[0] * x[1]) - 3.0 * 2.0 * g(&x);
        let (v, _) = d_mu_richardson(&cfg, &g, &x, 1e-2);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        // eigenfunction: x1 has eigenvalue -(2mu + d - 1 + 1)·1 = -3
        let (e, _) = d_mu_power(&cfg, &|x: &[f64]| x[0], &x, 2, 1e-2);
        assert!((e - 9.0 * x[0]).abs() < 1e-6);
    }
}

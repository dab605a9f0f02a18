//! One-dimensional orthogonal polynomials: Jacobi recurrences, Gauss-Jacobi
//! rules (Golub-Welsch), Gegenbauer evaluation and the normalization of the
//! ball weight `(1 - |x|^2)^(mu - 1/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{ln_beta, sphere_area};

/// Dimension and Jacobi parameter fixing the probability measure
/// `w_mu(x) dx = b (1 - |x|^2)^(mu - 1/2) dx` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig<T> {
    pub d: usize,
    pub mu: T,
    /// Normalization constant making the measure a probability measure.
    pub b_d_mu: T,
}

impl<T: Real> WeightConfig<T> {
    pub fn new(d: usize, mu: T) -> Result<Self> {
        if d == 0 {
            return Err(Error::arg("dimension must be at least 1"));
        }
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::arg(format!("Jacobi parameter mu must be >= 0, got {mu}")));
        }
        Ok(Self { d, mu, b_d_mu: normalization_b(d, mu) })
    }

    /// `lambda = mu + (d - 1)/2`, the Gegenbauer index of the reproducing kernels.
    pub fn lambda(&self) -> T {
        self.mu + T::of(self.d - 1) * T::lit(0.5)
    }

    /// Unnormalized weight `(1 - |x|^2)^(mu - 1/2)` times `b`.
    pub fn density(&self, x: &[T]) -> T {
        let r2: T = x.iter().map(|&v| v * v).sum();
        let one_minus = (T::one() - r2).max(T::zero());
        self.b_d_mu * one_minus.powf(self.mu - T::lit(0.5))
    }
}

/// `b_d^mu = (∫_{B^d} (1 - |x|^2)^(mu - 1/2) dx)^(-1)`, via the radial reduction
/// `σ_{d-1} · B(d/2, mu + 1/2) / 2`.
pub fn normalization_b<T: Real>(d: usize, mu: T) -> T {
    let half = T::lit(0.5);
    let integral = sphere_area::<T>(d) * half * ln_beta(T::of(d) * half, mu + half).exp();
    integral.recip()
}

/// Coefficients of the three-term recurrence of the orthonormal Jacobi
/// polynomials for `(1 - t)^alpha (1 + t)^beta` on `[-1, 1]`:
/// `t p_k = off[k] p_{k+1} + diag[k] p_k + off[k-1] p_{k-1}`.
#[derive(Debug, Clone)]
pub struct JacobiRecurrence<T> {
    pub alpha: T,
    pub beta: T,
    pub diag: Vec<T>,
    pub off: Vec<T>,
    /// Zeroth moment `∫ (1-t)^alpha (1+t)^beta dt`.
    pub mass: T,
}

impl<T: Real> JacobiRecurrence<T> {
    /// Recurrence coefficients for degrees `0..n`.
    pub fn new(n: usize, alpha: T, beta: T) -> Result<Self> {
        check_exponents(alpha, beta)?;
        let two = T::lit(2.0);
        let ab = alpha + beta;
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        for k in 0..n {
            let kf = T::of(k);
            let a = if k == 0 {
                (beta - alpha) / (ab + two)
            } else {
                let s = two * kf + ab;
                (beta * beta - alpha * alpha) / (s * (s + two))
            };
            diag.push(a);
            // off[k] couples degree k and k+1
            let k1 = kf + T::one();
            let s = two * k1 + ab;
            let b2 = if k == 0 {
                T::lit(4.0) * (T::one() + alpha) * (T::one() + beta)
                    / ((ab + two) * (ab + two) * (ab + T::lit(3.0)))
            } else {
                T::lit(4.0) * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab)
                    / (s * s * (s + T::one()) * (s - T::one()))
            };
            off.push(b2.sqrt());
        }
        let mass = (ab + T::one()) * two.ln() + ln_beta(alpha + T::one(), beta + T::one());
        Ok(Self { alpha, beta, diag, off, mass: mass.exp() })
    }

    /// Orthonormal polynomial values `scale * p_k(t)` for `k = 0..out.len()`.
    pub fn eval_all_scaled(&self, t: T, scale: T, out: &mut [T]) {
        if out.is_empty() {
            return;
        }
        debug_assert!(out.len() <= self.diag.len() + 1);
        out[0] = scale / self.mass.sqrt();
        if out.len() > 1 {
            out[1] = (t - self.diag[0]) * out[0] / self.off[0];
        }
        for k in 1..out.len().saturating_sub(1) {
            out[k + 1] = ((t - self.diag[k]) * out[k] - self.off[k - 1] * out[k - 1]) / self.off[k];
        }
    }
}

fn check_exponents<T: Real>(alpha: T, beta: T) -> Result<()> {
    let m1 = -T::one();
    if !(alpha > m1) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must exceed -1, got {alpha}")));
    }
    if !(beta > m1) || !beta.is_finite() {
        return Err(Error::arg(format!("beta must exceed -1, got {beta}")));
    }
    Ok(())
}

/// Gauss rule for `∫_{-1}^{1} f(t) (1 - t)^alpha (1 + t)^beta dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussJacobiRule<T> {
    pub alpha: T,
    pub beta: T,
    /// Strictly increasing, inside `(-1, 1)`.
    pub nodes: Vec<T>,
    /// Positive.
    pub weights: Vec<T>,
}

impl<T: Real> GaussJacobiRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Gauss-Jacobi rule with `n_nodes` nodes, exact for polynomials of degree
/// `2 n_nodes - 1`.
///
/// Nodes are the eigenvalues of the Jacobi matrix and weights the squared
/// first eigenvector components times the zeroth moment (Golub-Welsch).
pub fn gauss_jacobi<T: Real>(n_nodes: usize, alpha: T, beta: T) -> Result<GaussJacobiRule<T>> {
    if n_nodes == 0 {
        return Err(Error::arg("a Gauss rule needs at least one node"));
    }
    let rec = JacobiRecurrence::new(n_nodes, alpha, beta)?;
    let mut diag = rec.diag.clone();
    let mut off = rec.off[..n_nodes - 1].to_vec();
    off.push(T::zero());
    let first = tridiagonal_ql(&mut diag, &mut off)?;

    let mut pairs: Vec<(T, T)> = diag
        .into_iter()
        .zip(first)
        .map(|(x, v)| (x, rec.mass * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(GaussJacobiRule { alpha, beta, nodes, weights })
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts.
///
/// On entry `d` holds the diagonal and `e[i]` the element coupling rows `i`
/// and `i + 1` (`e[n-1]` is ignored). On exit `d` holds the eigenvalues and
/// the returned vector the first component of each normalized eigenvector.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<Vec<T>> {
    const MAX_SWEEPS: usize = 60;
    let n = d.len();
    let mut z = vec![T::zero(); n];
    z[0] = T::one();
    if n == 1 {
        return Ok(z);
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence(MAX_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed_r = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(z)
}

/// Gegenbauer polynomial `C_n^lambda(t)` by the forward three-term recurrence.
pub fn gegenbauer_eval<T: Real>(n: usize, lambda: T, t: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * lambda * t;
    for k in 1..n {
        let kf = T::of(k);
        let next = (two * (kf + lambda) * t * cur - (kf + two * lambda - T::one()) * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = ((k + lambda)/lambda) C_k^lambda(t)` for `k = 0..out.len()`.
///
/// These are the zonal profiles of the ball reproducing kernels. At
/// `lambda = 0` the limit `2 T_k(t)` (`k >= 1`) is used.
pub fn zonal_profiles<T: Real>(lambda: T, t: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let two = T::lit(2.0);
    out[0] = T::one();
    if out.len() == 1 {
        return;
    }
    if lambda == T::zero() {
        let (mut prev, mut cur) = (T::one(), t);
        out[1] = two * cur;
        for slot in out.iter_mut().skip(2) {
            let next = two * t * cur - prev;
            prev = cur;
            cur = next;
            *slot = two * cur;
        }
        return;
    }
    let (mut prev, mut cur) = (T::one(), two * lambda * t);
    out[1] = (T::one() + lambda) / lambda * cur;
    for k in 1..out.len() - 1 {
        let kf = T::of(k);
        let next = (two * (kf + lambda) * t * cur - (kf + two * lambda - T::one()) * prev) / (kf + T::one());
        prev = cur;
        cur = next;
        out[k + 1] = (kf + T::one() + lambda) / lambda * cur;
    }
}

/// Chebyshev polynomial of the first kind by recurrence (stable on `[-1, 1]`).
pub fn chebyshev_t<T: Real>(n: usize, t: T) -> T {
    match n {
        0 => T::one(),
        1 => t,
        _ => {
            let two_t = T::lit(2.0) * t;
            let (mut prev, mut cur) = (T::one(), t);
            for _ in 1..n {
                let next = two_t * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;
    use approx::assert_relative_eq;

    /// Moments `∫ t^k (1 - t)^a (1 + t)^b dt` for `k = 0..n` from the
    /// integration-by-parts recurrence
    /// `(k + 2 + a + b) m_{k+1} = k m_{k-1} + (b - a) m_k`.
    fn moments_by_parts(n: usize, a: f64, b: f64) -> Vec<f64> {
        let mut m = vec![2f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0)];
        m.push((b - a) * m[0] / (2.0 + a + b));
        for k in 1..n {
            let next = (k as f64 * m[k - 1] + (b - a) * m[k]) / (k as f64 + 2.0 + a + b);
            m.push(next);
        }
        m
    }

    #[test]
    fn midpoint_rule() {
        let r = gauss_jacobi(1, 0.0_f64, 0.0).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!(r.nodes[0].abs() < 1e-15);
        assert_relative_eq!(r.weights[0], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn two_point_legendre() {
        let r = gauss_jacobi(2, 0.0_f64, 0.0).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -x, max_relative = 1e-14);
        assert_relative_eq!(r.nodes[1], x, max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_non_integrable_weights() {
        assert!(gauss_jacobi(3, -1.0_f64, 0.0).is_err());
        assert!(gauss_jacobi(3, 0.0_f64, -1.5).is_err());
        assert!(gauss_jacobi(0, 0.0_f64, 0.0).is_err());
    }

    #[test]
    fn asymmetric_exactness_against_recurrence_moments() {
        for &(a, b) in &[(0.5, -0.5), (1.5, 0.0), (-0.5, 1.0), (0.0, 0.5), (2.0, -0.25)] {
            let moments = moments_by_parts(64, a, b);
            for n in 1..=24 {
                let r = gauss_jacobi(n, a, b).unwrap();
                for k in 0..(2 * n) {
                    let exact = moments[k];
                    let got = r.integrate(|t| t.powi(k as i32));
                    assert!(
                        (got - exact).abs() <= 1e-10 * exact.abs().max(1e-3),
                        "a={a} b={b} n={n} k={k}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn chebyshev_closed_form_nodes() {
        // alpha = beta = -1/2: nodes cos((2i-1)π/(2n)), weights π/n
        let n = 17;
        let r = gauss_jacobi(n, -0.5_f64, -0.5).unwrap();
        for (i, (&x, &w)) in r.nodes.iter().zip(&r.weights).enumerate() {
            let expect = -((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            assert!((x - expect).abs() < 1e-14);
            assert_relative_eq!(w, std::f64::consts::PI / n as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn gegenbauer_base_cases() {
        assert_eq!(gegenbauer_eval(0, 2.5_f64, 0.3), 1.0);
        assert_relative_eq!(gegenbauer_eval(1, 1.7_f64, 0.5), 1.7, max_relative = 1e-15);
    }

    #[test]
    fn zonal_profiles_chebyshev_limit() {
        let mut out = [0.0_f64; 8];
        zonal_profiles(0.0, 0.3, &mut out);
        assert_eq!(out[0], 1.0);
        for (k, &v) in out.iter().enumerate().skip(1) {
            assert_relative_eq!(v, 2.0 * (k as f64 * 0.3_f64.acos()).cos(), max_relative = 1e-13);
        }
        // small lambda approaches the limit
        let mut near = [0.0_f64; 8];
        zonal_profiles(1e-9, 0.3, &mut near);
        for k in 0..8 {
            assert!((near[k] - out[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn orthonormal_jacobi_values() {
        let rec = JacobiRecurrence::new(6, 0.0_f64, 0.0).unwrap();
        let mut p = [0.0; 6];
        rec.eval_all_scaled(0.4, 1.0, &mut p);
        // normalized Legendre: sqrt((2k+1)/2) P_k
        let legendre = [1.0, 0.4, 0.5 * (3.0 * 0.16 - 1.0)];
        for k in 0..3 {
            assert_relative_eq!(p[k], ((2 * k + 1) as f64 / 2.0).sqrt() * legendre[k], max_relative = 1e-14);
        }
    }

    #[test]
    fn weight_normalization_closed_forms() {
        assert_relative_eq!(normalization_b(1, 0.0_f64), 1.0 / std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(normalization_b(1, 0.5_f64), 0.5, max_relative = 1e-14);
        assert_relative_eq!(normalization_b(2, 0.5_f64), 1.0 / std::f64::consts::PI, max_relative = 1e-14);
        assert!(WeightConfig::new(0, 0.5_f64).is_err());
        assert!(WeightConfig::new(2, -0.1_f64).is_err());
    }

    #[test]
    fn single_precision_rule() {
        let r = gauss_jacobi(6, 0.5_f32, 0.5).unwrap();
        let exact = std::f32::consts::PI / 2.0;
        assert!((r.weights.iter().sum::<f32>() - exact).abs() < 1e-5);
    }
}

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Multi-indices of total degree `<= n` in `d` variables, graded.
pub fn exponents(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=n {
        let mut cur = vec![0; d];
        push_exact(d, total, 0, &mut cur, &mut out);
    }
    out
}

fn push_exact(d: usize, left: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i + 1 == d {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[i] = a;
        push_exact(d, left - a, i + 1, cur, out);
    }
}

/// `E[x^alpha]` under the normalized weight `(1 - |x|^2)^(mu - 1/2)`.
///
/// Dirichlet moments as rising products: for `alpha = 2k`,
/// `prod_i (1/2)_{k_i} / (d/2 + mu + 1/2)_{|k|}`; zero if any entry is odd.
pub fn moment(d: usize, mu: f64, alpha: &[usize]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let mut num = 1.0;
    let mut total = 0;
    for &a in alpha {
        let k = a / 2;
        for i in 0..k {
            num *= i as f64 + 0.5;
        }
        total += k;
    }
    let c = d as f64 / 2.0 + mu + 0.5;
    let mut den = 1.0;
    for i in 0..total {
        den *= c + i as f64;
    }
    num / den
}

pub fn monomial(x: &[f64], alpha: &[usize]) -> f64 {
    x.iter().zip(alpha).map(|(v, &a)| v.powi(a as i32)).product()
}

/// Reproducing kernel of `Π_n` from the monomial Gram matrix.
pub struct GramKernel {
    exps: Vec<Vec<usize>>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl GramKernel {
    pub fn new(d: usize, mu: f64, n: usize) -> Self {
        let exps = exponents(d, n);
        let m = exps.len();
        let gram = DMatrix::from_fn(m, m, |i, j| {
            let s: Vec<usize> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
            moment(d, mu, &s)
        });
        let chol = gram.cholesky().expect("Gram matrix is positive definite");
        Self { exps, chol }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mx = DVector::from_iterator(self.exps.len(), self.exps.iter().map(|a| monomial(x, a)));
        let my = DVector::from_iterator(self.exps.len(), self.exps.iter().map(|a| monomial(y, a)));
        mx.dot(&self.chol.solve(&my))
    }
}

/// `‖Proj_k P‖²_{2,mu}` for `k = 0 ..= deg P`.
///
/// With `G = L Lᵀ`, the functions `L⁻¹ m` are the graded Gram-Schmidt
/// basis, so `P = aᵀ m` has coefficients `Lᵀ a` in it and each basis
/// function of exact degree `k` lies in `V_k`.
pub fn degree_energies(d: usize, mu: f64, p: &RandomPoly) -> Vec<f64> {
    let kernel = GramKernel::new(d, mu, p.degree);
    let a = DVector::from_vec(p.coefficients());
    let c = kernel.chol.l().transpose() * a;
    let mut out = vec![0.0; p.degree + 1];
    for (alpha, v) in kernel.exps.iter().zip(c.iter()) {
        out[alpha.iter().sum::<usize>()] += v * v;
    }
    out
}

/// `P_n(x, y)` as the difference of the kernels of `Π_n` and `Π_{n-1}`.
pub fn oracle_kernel(d: usize, mu: f64, n: usize, x: &[f64], y: &[f64]) -> f64 {
    let hi = GramKernel::new(d, mu, n).eval(x, y);
    if n == 0 {
        hi
    } else {
        hi - GramKernel::new(d, mu, n - 1).eval(x, y)
    }
}

/// A polynomial with coefficients uniform in `[-1, 1]` on all monomials of
/// degree `<= n`.
#[derive(Debug, Clone)]
pub struct RandomPoly {
    pub degree: usize,
    terms: Vec<(Vec<usize>, f64)>,
}

impl RandomPoly {
    pub fn new(d: usize, degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = exponents(d, degree).into_iter().map(|a| (a, rng.random_range(-1.0..1.0))).collect();
        Self { degree, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, c)| c * monomial(x, a)).sum()
    }

    /// Coefficients in the graded order of [`exponents`].
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, c)| *c).collect()
    }

    pub fn integral(&self, d: usize, mu: f64) -> f64 {
        self.terms.iter().map(|(a, c)| c * moment(d, mu, a)).sum()
    }
}

/// Points in the closed ball: a polar grid plus the boundary.
pub fn ball_probes(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (0..=count).map(|i| vec![-1.0 + 2.0 * i as f64 / count as f64]).collect(),
        2 => {
            let rings = (count as f64).sqrt().ceil() as usize;
            let mut out = vec![vec![0.0, 0.0]];
            for i in 1..=rings {
                let r = i as f64 / rings as f64;
                let k = 4 * i + 3;
                for j in 0..k {
                    let t = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / k as f64;
                    out.push(vec![r * t.cos(), r * t.sin()]);
                }
            }
            out
        }
        _ => panic!("probes only for d <= 2"),
    }
}

pub fn sup_norm<F: Fn(&[f64]) -> f64>(f: F, probes: &[Vec<f64>]) -> f64 {
    probes.iter().map(|x| f(x).abs()).fold(0.0, f64::max)
}

/// One-sample t statistic of `values` against zero.
pub fn t_statistic(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    mean / (var / n).sqrt()
}

/// Two-sided 0.1% critical value of the standard normal.
pub const Z_999: f64 = 3.2905;

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

//! Explicit orthonormal bases of `L_2(w_mu)` for `d = 1` and `d = 2`.
//!
//! Basis functions are `p_j(2|x|^2 - 1) · r^m Y_m(x/|x|)` where `p_j` is an
//! orthonormal Jacobi polynomial with parameters `(mu - 1/2, m + d/2 - 1)`
//! and `Y_m` is a real spherical harmonic of degree `m` orthonormal on the
//! sphere (`1`, `x` on `S^0`; `1`, `√2 cos mθ`, `√2 sin mθ` on `S^1`). The
//! total degree of such a function is `m + 2j`, and the functions of total
//! degree `n` span `V_n`.

use crate::error::{Error, Result};
use crate::orthopoly::{JacobiRecurrence, WeightConfig};
use crate::scalar::Real;

/// Label of one basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTerm {
    pub degree: usize,
    pub harmonic: usize,
    pub radial: usize,
    /// Sine part of the harmonic pair (only in `d = 2`, `m >= 1`).
    pub odd: bool,
}

#[derive(Debug, Clone)]
struct HarmonicBlock<T> {
    m: usize,
    recurrence: JacobiRecurrence<T>,
    scale: T,
    radial_len: usize,
    parts: usize,
}

/// Orthonormal basis of `Π_N` for `d <= 2`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis<T> {
    d: usize,
    max_degree: usize,
    blocks: Vec<HarmonicBlock<T>>,
    terms: Vec<BasisTerm>,
}

impl<T: Real> OrthonormalBasis<T> {
    pub fn new(cfg: &WeightConfig<T>, max_degree: usize) -> Result<Self> {
        let d = cfg.d;
        if d > 2 {
            return Err(Error::arg(format!("explicit bases are available for d <= 2, got d = {d}")));
        }
        let half = T::lit(0.5);
        let alpha = cfg.mu - half;
        let beta0 = T::of(d) * half - T::one();
        let mass0 = JacobiRecurrence::new(0, alpha, beta0)?.mass;
        let top_harmonic = if d == 1 { max_degree.min(1) } else { max_degree };

        let mut blocks = Vec::with_capacity(top_harmonic + 1);
        let mut terms = Vec::new();
        for m in 0..=top_harmonic {
            let radial_len = (max_degree - m) / 2 + 1;
            let beta = beta0 + T::of(m);
            let recurrence = JacobiRecurrence::new(radial_len, alpha, beta)?;
            // radial measure is (1-s)^alpha (1+s)^beta0 ds / mass0 and r^{2m} = ((1+s)/2)^m
            let scale = (mass0 * T::lit(2.0).powi(m as i32)).sqrt();
            let parts = if d == 2 && m > 0 { 2 } else { 1 };
            for part in 0..parts {
                for j in 0..radial_len {
                    terms.push(BasisTerm { degree: m + 2 * j, harmonic: m, radial: j, odd: part == 1 });
                }
            }
            blocks.push(HarmonicBlock { m, recurrence, scale, radial_len, parts });
        }
        Ok(Self { d, max_degree, blocks, terms })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    /// Total degree of every basis function, in evaluation order.
    pub fn degrees(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.degree).collect()
    }

    /// Writes all basis values at `x` into `out` (length [`Self::len`]).
    pub fn eval_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.terms.len());
        let r2: T = x.iter().map(|&v| v * v).sum();
        let s = (T::lit(2.0) * r2 - T::one()).min(T::one());
        let sqrt2 = T::SQRT_2();
        // (re, im) of (x1 + i x2)^m, advanced block by block
        let (zx, zy) = if self.d == 2 { (x[0], x[1]) } else { (x[0], T::zero()) };
        let (mut re, mut im) = (T::one(), T::zero());
        let mut at = 0;
        for block in &self.blocks {
            if block.m > 0 {
                let next_re = re * zx - im * zy;
                im = re * zy + im * zx;
                re = next_re;
            }
            let len = block.radial_len;
            let first = &mut out[at..at + len];
            block.recurrence.eval_all_scaled(s, block.scale, first);
            if block.parts == 2 {
                let (head, tail) = out[at..at + 2 * len].split_at_mut(len);
                for (c, sn) in head.iter_mut().zip(tail.iter_mut()) {
                    let p = *c * sqrt2;
                    *c = p * re;
                    *sn = p * im;
                }
            } else if block.m > 0 {
                for v in first.iter_mut() {
                    *v = *v * re;
                }
            }
            at += block.parts * len;
        }
    }

    pub fn eval(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.terms.len()];
        self.eval_into(x, &mut out);
        out
    }
}

/// Inner product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] = acc[0] + a[i] * b[i];
        acc[1] = acc[1] + a[i + 1] * b[i + 1];
        acc[2] = acc[2] + a[i + 2] * b[i + 2];
        acc[3] = acc[3] + a[i + 3] * b[i + 3];
    }
    let mut tail = T::zero();
    for i in 4 * chunks..n {
        tail = tail + a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

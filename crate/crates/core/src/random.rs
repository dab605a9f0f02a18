//! Reproducible random streams and exact sampling from `w_mu(x) dx`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domain::BallPoint;
use crate::orthopoly::WeightConfig;

/// Identity of an independent random stream.
///
/// Backed by ChaCha8, a counter-based generator: the key comes from
/// `master_seed`, the stream id from `stream_index`, and the block counter
/// advances with use. Replication `i` of an experiment owns stream `i`, so
/// replications can run in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Sampler for the probability measure `w_mu(x) dx` on `B^d`.
///
/// `x = sqrt(u) ξ` with `ξ` uniform on the sphere (a normalized Gaussian
/// vector) and `u ~ Beta(d/2, mu + 1/2)` realized as `X / (X + Y)` for
/// independent Gamma variates.
#[derive(Debug, Clone)]
pub struct MuSampler {
    d: usize,
    radial_num: Gamma<f64>,
    radial_den: Gamma<f64>,
}

impl MuSampler {
    pub fn new(cfg: &WeightConfig<f64>) -> Self {
        let a = 0.5 * cfg.d as f64;
        let b = cfg.mu + 0.5;
        Self {
            d: cfg.d,
            radial_num: Gamma::new(a, 1.0).expect("positive shape"),
            radial_den: Gamma::new(b, 1.0).expect("positive shape"),
        }
    }

    /// Draws one point into `out` (length `d`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.d);
        let r2 = loop {
            let x = self.radial_num.sample(rng);
            let y = self.radial_den.sample(rng);
            let s = x + y;
            if s > 0.0 {
                break x / s;
            }
        };
        let norm = loop {
            let mut n2 = 0.0;
            for v in out.iter_mut() {
                *v = StandardNormal.sample(rng);
                n2 += *v * *v;
            }
            if n2 > 0.0 {
                break n2.sqrt();
            }
        };
        let scale = r2.sqrt() / norm;
        for v in out.iter_mut() {
            *v *= scale;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BallPoint<f64> {
        let mut out = vec![0.0; self.d];
        self.sample_into(rng, &mut out);
        BallPoint::new(out)
    }
}

/// Draws one point distributed according to `w_mu(x) dx`.
pub fn sample_mu<R: Rng + ?Sized>(cfg: &WeightConfig<f64>, rng: &mut R) -> BallPoint<f64> {
    MuSampler::new(cfg).sample(rng)
}

//! Geometry of the unit ball: points, the metric `rho` and maximal
//! `epsilon`-separated sets.
//!
//! `rho(x, y)` is the geodesic distance between the lifts
//! `(x, sqrt(1 - |x|^2))` and `(y, sqrt(1 - |y|^2))` on the upper hemisphere of
//! `S^d`, so all constructions below work with unit vectors in `R^{d+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::WeightConfig;
use crate::scalar::Real;

/// A point of the closed unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> BallPoint<T> {
    /// Builds a point, radially clamping anything outside the closed ball.
    pub fn new(mut coords: Vec<T>) -> Self {
        let norm = coords.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::one() {
            for v in &mut coords {
                *v = *v / norm;
            }
        }
        Self { coords }
    }

    pub fn origin(d: usize) -> Self {
        Self { coords: vec![T::zero(); d] }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> T {
        self.coords.iter().map(|&v| v * v).sum()
    }

    /// `sqrt(1 - |x|^2)`, the height of the hemisphere lift.
    pub fn height(&self) -> T {
        (T::one() - self.norm_sq()).max(T::zero()).sqrt()
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

impl<T> AsRef<[T]> for BallPoint<T> {
    fn as_ref(&self) -> &[T] {
        &self.coords
    }
}

/// `cos rho(x, y) = x·y + sqrt(1 - |x|^2) sqrt(1 - |y|^2)`, clamped to `[-1, 1]`.
pub fn cos_rho<T: Real>(x: &[T], y: &[T]) -> T {
    let mut dot = T::zero();
    let mut nx = T::zero();
    let mut ny = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        dot = dot + a * b;
        nx = nx + a * a;
        ny = ny + b * b;
    }
    let hx = (T::one() - nx).max(T::zero()).sqrt();
    let hy = (T::one() - ny).max(T::zero()).sqrt();
    (dot + hx * hy).max(-T::one()).min(T::one())
}

/// The metric `rho` on the ball, with values in `[0, π]`.
///
/// Computed as `2 asin(c / 2)` from the chord `c` between the lifted points
/// `(x, sqrt(1 - |x|^2))`, which stays accurate for nearby points where
/// `acos` of [`cos_rho`] loses half the digits.
pub fn rho<T: Real>(x: &[T], y: &[T]) -> T {
    let lift = |v: &[T]| (T::one() - v.iter().map(|&a| a * a).sum::<T>()).max(T::zero()).sqrt();
    let dh = lift(x) - lift(y);
    let chord2 = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() + dh * dh;
    let two = T::lit(2.0);
    two * (chord2.sqrt() / two).min(T::one()).asin()
}

/// A maximal `epsilon`-separated subset of the ball in the metric `rho`,
/// certified against the probe grid it was extracted from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparatedSet<T> {
    pub epsilon: T,
    pub points: Vec<BallPoint<T>>,
    /// Smallest pairwise `rho` distance (`π` for a single point).
    pub min_separation: T,
    /// Largest distance from a probe point to the set.
    pub covering_radius: T,
    pub probe_count: usize,
}

impl<T: Real> SeparatedSet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Unit vectors on `S^{k}` (living in `R^{k+1}`) with geodesic spacing about `h`.
fn sphere_grid<T: Real>(k: usize, h: T) -> Vec<Vec<T>> {
    let pi = T::PI();
    match k {
        0 => vec![vec![T::one()], vec![-T::one()]],
        1 => {
            let m = (T::lit(2.0) * pi / h).ceil().to_usize().unwrap_or(1).max(3);
            (0..m)
                .map(|i| {
                    let a = T::lit(2.0) * pi * T::of(i) / T::of(m);
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        _ => {
            let steps = (pi / h).ceil().to_usize().unwrap_or(1).max(2);
            let mut out = Vec::new();
            for j in 0..=steps {
                let phi = pi * T::of(j) / T::of(steps);
                let (s, c) = (phi.sin(), phi.cos());
                if j == 0 || j == steps {
                    let mut v = vec![T::zero(); k + 1];
                    v[0] = c;
                    out.push(v);
                    continue;
                }
                for sub in sphere_grid(k - 1, h / s) {
                    let mut v = Vec::with_capacity(k + 1);
                    v.push(c);
                    v.extend(sub.into_iter().map(|u| u * s));
                    out.push(v);
                }
            }
            out
        }
    }
}

/// Deterministic probe grid of the ball, uniform in the hemisphere lift.
///
/// `resolution` is the number of steps in the polar angle between the pole
/// (the origin) and the equator (the boundary sphere). Returned points carry
/// their lift as the last coordinate.
pub fn lifted_probe_grid<T: Real>(d: usize, resolution: usize) -> Vec<Vec<T>> {
    let half_pi = T::FRAC_PI_2();
    let h = half_pi / T::of(resolution.max(1));
    let mut out = Vec::new();
    for i in 0..=resolution.max(1) {
        let theta = half_pi * T::of(i) / T::of(resolution.max(1));
        let (s, c) = (theta.sin(), theta.cos());
        if i == 0 {
            let mut v = vec![T::zero(); d];
            v.push(T::one());
            out.push(v);
            continue;
        }
        for dir in sphere_grid(d - 1, h / s) {
            let mut v: Vec<T> = dir.into_iter().map(|u| u * s).collect();
            v.push(c);
            out.push(v);
        }
    }
    out
}

/// Probe grid of ball points (lift dropped).
pub fn probe_grid<T: Real>(d: usize, resolution: usize) -> Vec<BallPoint<T>> {
    lifted_probe_grid::<T>(d, resolution)
        .into_iter()
        .map(|mut v| {
            v.pop();
            BallPoint::new(v)
        })
        .collect()
}

/// Greedy farthest-point construction of a maximal `epsilon`-separated set
/// over the lifted probe grid of the given resolution.
///
/// The first point is the origin; each step adds the probe point farthest
/// from the current set until every probe point is closer than `epsilon`.
/// Pairwise separation `>= epsilon` holds by construction. Fails when the
/// grid mesh is too coarse (more than `epsilon / 2`) for the covering
/// certificate to mean anything.
pub fn separated_set<T: Real>(
    cfg: &WeightConfig<T>,
    epsilon: T,
    probe_resolution: usize,
) -> Result<SeparatedSet<T>> {
    let d = cfg.d;
    if !(epsilon > T::zero()) || epsilon > T::PI() {
        return Err(Error::arg(format!("epsilon must lie in (0, π], got {epsilon}")));
    }
    if probe_resolution == 0 {
        return Err(Error::arg("probe resolution must be positive"));
    }
    let mesh = T::FRAC_PI_2() / T::of(probe_resolution) * T::of(d).sqrt();
    if mesh > epsilon * T::lit(0.5) {
        return Err(Error::cert(format!(
            "probe resolution {probe_resolution} has mesh {mesh:.3e}, too coarse to certify an epsilon = {epsilon} cover"
        )));
    }
    let grid = lifted_probe_grid::<T>(d, probe_resolution);
    let cos_eps = epsilon.cos();
    let dot = |a: &[T], b: &[T]| -> T { a.iter().zip(b).map(|(&u, &v)| u * v).sum() };

    // nearest[c] = max cos(rho) from candidate c to the chosen set
    let mut nearest = vec![-T::lit(2.0); grid.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut next = 0usize;
    loop {
        chosen.push(next);
        let p = &grid[next];
        for (slot, q) in nearest.iter_mut().zip(&grid) {
            let c = dot(p, q);
            if c > *slot {
                *slot = c;
            }
        }
        let (idx, worst) = nearest
            .iter()
            .enumerate()
            .fold((0usize, T::lit(2.0)), |acc, (i, &c)| if c < acc.1 { (i, c) } else { acc });
        if worst > cos_eps {
            break;
        }
        next = idx;
    }

    let worst_cover = nearest.iter().copied().fold(T::lit(2.0), T::min);
    let covering_radius = worst_cover.max(-T::one()).min(T::one()).acos();
    let mut min_sep = T::PI();
    for (i, &a) in chosen.iter().enumerate() {
        for &b in &chosen[i + 1..] {
            let c = dot(&grid[a], &grid[b]).max(-T::one()).min(T::one());
            min_sep = min_sep.min(c.acos());
        }
    }
    let points = chosen
        .iter()
        .map(|&i| BallPoint::new(grid[i][..d].to_vec()))
        .collect();
    Ok(SeparatedSet {
        epsilon,
        points,
        min_separation: min_sep,
        covering_radius,
        probe_count: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                return v;
            }
        }
    }

    #[test]
    fn rho_basic_values() {
        let x = [0.3_f64, -0.4];
        assert!(rho(&x, &x).abs() < 1e-7);
        assert!((rho(&[1.0, 0.0], &[-1.0, 0.0]) - PI).abs() < 1e-15);
        assert!((rho(&[0.0, 0.0], &[1.0, 0.0]) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rho_symmetric_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 2);
            let y = random_point(&mut rng, 2);
            assert_eq!(rho(&x, &y), rho(&y, &x));
        }
        for _ in 0..10_000 {
            let x = random_point(&mut rng, 3);
            let y = random_point(&mut rng, 3);
            let z = random_point(&mut rng, 3);
            assert!(rho(&x, &z) <= rho(&x, &y) + rho(&y, &z) + 1e-12);
        }
    }

    #[test]
    fn points_are_clamped() {
        let p = BallPoint::new(vec![3.0_f64, 4.0]);
        assert!((p.norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(p.height(), 0.0);
    }

    #[test]
    fn full_diameter_gives_single_point() {
        let cfg = WeightConfig::new(1, 0.5_f64).unwrap();
        let set = separated_set(&cfg, PI, 64).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn separation_and_covering_in_the_disk() {
        let cfg = WeightConfig::new(2, 0.5_f64).unwrap();
        let set = separated_set(&cfg, 0.5, 48).unwrap();
        // brute-force pairwise oracle
        for (i, a) in set.points.iter().enumerate() {
            for b in &set.points[i + 1..] {
                assert!(rho(a.coords(), b.coords()) >= 0.5 - 1e-12);
            }
        }
        let probes = probe_grid::<f64>(2, 48);
        for p in &probes {
            let best = set
                .points
                .iter()
                .map(|q| rho(p.coords(), q.coords()))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.5 + 1e-12);
        }
        assert!(set.covering_radius < 0.5);
    }

    #[test]
    fn cardinality_follows_epsilon_power_law() {
        let cfg = WeightConfig::new(2, 0.5_f64).unwrap();
        for eps in [0.4, 0.2, 0.1] {
            let coarse = separated_set(&cfg, eps, 160).unwrap().len() as f64;
            let fine = separated_set(&cfg, eps / 2.0, 160).unwrap().len() as f64;
            let ratio = fine / coarse;
            assert!((1.0..=16.0).contains(&ratio), "eps={eps}: ratio {ratio}");
        }
    }

    #[test]
    fn coarse_probe_grid_is_reported() {
        let cfg = WeightConfig::new(2, 0.5_f64).unwrap();
        let err = separated_set(&cfg, 0.1, 4).unwrap_err();
        assert!(err.is_certification());
    }

    #[test]
    fn deterministic_output() {
        let cfg = WeightConfig::new(2, 0.0_f64).unwrap();
        let a = separated_set(&cfg, 0.3, 40).unwrap();
        let b = separated_set(&cfg, 0.3, 40).unwrap();
        assert_eq!(a.points, b.points);
    }
}

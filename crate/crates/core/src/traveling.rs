//! Checks that geodesics with nearby endpoints stay close: segments of equal
//! length whose endpoints are `ρ`-close, and rays converging to one end.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::plane::{self, Mobius, PlaneEnd, PlaneGeodesic};
use crate::space::{BoundaryPoint, SpacePoint};
use crate::tree::{self, Letter, TreeEnd, TreeGeodesic, Word};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TravelWitness {
    pub starts: [SpacePoint; 2],
    /// Endpoints for segments; for rays the common end is reported separately.
    pub ends: Option<[SpacePoint; 2]>,
    pub end: Option<BoundaryPoint>,
    pub length: f64,
    pub rho: f64,
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TravelReport {
    pub pairs: u64,
    pub violations: u64,
    /// Largest `deviation - bound` seen; negative when every pair passes.
    pub worst_excess: f64,
    pub worst: Option<TravelWitness>,
}

impl TravelReport {
    fn empty() -> Self {
        TravelReport { pairs: 0, violations: 0, worst_excess: f64::NEG_INFINITY, worst: None }
    }

    fn record(&mut self, excess: f64, witness: impl FnOnce() -> TravelWitness) {
        self.pairs += 1;
        if excess > 0.0 {
            self.violations += 1;
        }
        if excess > self.worst_excess {
            self.worst_excess = excess;
            self.worst = Some(witness());
        }
    }

    fn merge(mut self, other: TravelReport) -> TravelReport {
        self.pairs += other.pairs;
        self.violations += other.violations;
        if other.worst_excess > self.worst_excess {
            self.worst_excess = other.worst_excess;
            self.worst = other.worst;
        }
        self
    }
}

/// Every pair of tree segments of common length `T <= max_len` with the first
/// starting at the identity and both endpoint gaps at most `rho_max`, checked
/// against `3ρ` (`δ = 0`) with `ρ` the larger endpoint gap.
pub fn tree_segments(rank: usize, max_len: usize, rho_max: usize) -> TravelReport {
    let shifts: Vec<Word> = tree::ball_enumerate(rank, rho_max).collect();
    let firsts: Vec<Word> = tree::ball_enumerate(rank, max_len).collect();
    firsts
        .par_iter()
        .map(|q1| {
            let t_len = q1.len();
            let mut rep = TravelReport::empty();
            for p2 in &shifts {
                for g in &shifts {
                    let q2 = q1.mul(g);
                    let path = p2.inverse().mul(&q2);
                    if path.len() != t_len {
                        continue;
                    }
                    let rho = p2.len().max(g.len()) as f64;
                    let dev = (0..=t_len).map(|t| q1.prefix(t).dist(&p2.mul(&path.prefix(t)))).max().unwrap_or(0) as f64;
                    let bound = 3.0 * rho;
                    rep.record(dev - bound, || TravelWitness {
                        starts: [SpacePoint::Tree(Word::identity()), SpacePoint::Tree(p2.clone())],
                        ends: Some([SpacePoint::Tree(q1.clone()), SpacePoint::Tree(q2.clone())]),
                        end: None,
                        length: t_len as f64,
                        rho,
                        deviation: dev,
                        bound,
                    });
                }
            }
            rep
        })
        .reduce(TravelReport::empty, TravelReport::merge)
}

/// Rays from every pair of vertices within `radius` of the identity to each
/// given end, checked over `[0, horizon]` against `3 d(p1, p2)`.
pub fn tree_rays(rank: usize, radius: usize, ends: &[TreeEnd], horizon: usize) -> TravelReport {
    let starts: Vec<Word> = tree::ball_enumerate(rank, radius).collect();
    ends.par_iter()
        .flat_map_iter(|xi| starts.iter().map(move |p| (xi, p)))
        .map(|(xi, p1)| {
            let mut rep = TravelReport::empty();
            let c1 = TreeGeodesic::ray(p1, xi);
            for p2 in &starts {
                let c2 = TreeGeodesic::ray(p2, xi);
                let dev = (0..=horizon as i64)
                    .map(|t| c1.at(t).expect("rays are unbounded").dist(&c2.at(t).expect("rays are unbounded")))
                    .max()
                    .unwrap_or(0) as f64;
                let rho = p1.dist(p2) as f64;
                let bound = 3.0 * rho;
                rep.record(dev - bound, || TravelWitness {
                    starts: [SpacePoint::Tree(p1.clone()), SpacePoint::Tree(p2.clone())],
                    ends: None,
                    end: Some(BoundaryPoint::Tree(xi.clone())),
                    length: horizon as f64,
                    rho,
                    deviation: dev,
                    bound,
                });
            }
            rep
        })
        .reduce(TravelReport::empty, TravelReport::merge)
}

/// A handful of ends of the rank-`rank` tree: each generator and inverse
/// repeated, and a period-2 end.
pub fn sample_tree_ends(rank: usize) -> Vec<TreeEnd> {
    let mut out: Vec<TreeEnd> = Letter::all(rank).map(|l| TreeEnd::new(vec![], vec![l]).expect("one-letter cycle")).collect();
    if rank >= 2 {
        let (a, b) = (Letter::generator(0), Letter::generator(1));
        out.push(TreeEnd::new(vec![b.inverse()], vec![a, b]).expect("reduced"));
    }
    out
}

const CHUNK: usize = 1024;

/// Monte-Carlo segment pairs in the plane: `c1` joins two uniform points of
/// the ball of `radius` about `i`; `c2` starts within `rho_max` of `c1(0)` and
/// heads for a point within `rho_max` of `c1(T)`, run for the same length
/// `T`. Each pair is checked against `4δ + 3ρ` by sampling every `step`.
pub fn plane_segments(pairs: usize, radius: f64, rho_max: f64, delta: f64, step: f64, seed: u64) -> Result<TravelReport> {
    if !(step > 0.0) || !(rho_max > 0.0) || !(radius > 0.0) {
        return Err(GeomError::Precondition("radius, rho and step must be positive".into()));
    }
    let chunks = pairs.div_ceil(CHUNK);
    let reports = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut rep = TravelReport::empty();
            for _ in 0..CHUNK.min(pairs - ci * CHUNK) {
                let a = plane::sample_in_ball(&mut rng, radius);
                let b = plane::sample_in_ball(&mut rng, radius);
                let a2 = Mobius::base_at(&a).apply(&plane::sample_in_ball(&mut rng, rho_max));
                let aim = Mobius::base_at(&b).apply(&plane::sample_in_ball(&mut rng, rho_max));
                let (Ok(c1), Ok(c2)) = (PlaneGeodesic::segment(&a, &b, 1e-12), PlaneGeodesic::segment(&a2, &aim, 1e-12))
                else {
                    rep.pairs += 1;
                    continue;
                };
                let t_len = a.dist(&b);
                let b2 = c2.point_unchecked(t_len);
                let rho = a.dist(&a2).max(b.dist(&b2));
                let n = (t_len / step).ceil() as usize;
                let dev = (0..=n)
                    .map(|k| {
                        let t = (k as f64 * step).min(t_len);
                        c1.point_unchecked(t).dist(&c2.point_unchecked(t))
                    })
                    .fold(0.0, f64::max);
                let bound = 4.0 * delta + 3.0 * rho;
                rep.record(dev - bound, || TravelWitness {
                    starts: [SpacePoint::Plane(a), SpacePoint::Plane(a2)],
                    ends: Some([SpacePoint::Plane(b), SpacePoint::Plane(b2)]),
                    end: None,
                    length: t_len,
                    rho,
                    deviation: dev,
                    bound,
                });
            }
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports.into_iter().fold(TravelReport::empty(), TravelReport::merge))
}

/// Monte-Carlo rays in the plane from two points of the ball of `radius` to a
/// common finite end, checked over `[0, horizon]` against `19δ + 3 d(p1, p2)`.
pub fn plane_rays(pairs: usize, radius: f64, delta: f64, horizon: f64, step: f64, seed: u64) -> Result<TravelReport> {
    if !(step > 0.0) || !(horizon >= 0.0) {
        return Err(GeomError::Precondition("step must be positive and horizon non-negative".into()));
    }
    let chunks = pairs.div_ceil(CHUNK);
    let reports = (0..chunks)
        .into_par_iter()
        .map(|ci| -> Result<TravelReport> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut rep = TravelReport::empty();
            for _ in 0..CHUNK.min(pairs - ci * CHUNK) {
                let p1 = plane::sample_in_ball(&mut rng, radius);
                let p2 = plane::sample_in_ball(&mut rng, radius);
                let far = plane::sample_in_ball(&mut rng, radius + 5.0);
                let xi = PlaneEnd::Finite(far.x);
                let (c1, c2) = (PlaneGeodesic::ray(&p1, &xi)?, PlaneGeodesic::ray(&p2, &xi)?);
                let n = (horizon / step).ceil() as usize;
                let dev = (0..=n)
                    .map(|k| {
                        let t = (k as f64 * step).min(horizon);
                        c1.point_unchecked(t).dist(&c2.point_unchecked(t))
                    })
                    .fold(0.0, f64::max);
                let rho = p1.dist(&p2);
                let bound = 19.0 * delta + 3.0 * rho;
                rep.record(dev - bound, || TravelWitness {
                    starts: [SpacePoint::Plane(p1), SpacePoint::Plane(p2)],
                    ends: None,
                    end: Some(BoundaryPoint::Plane(xi)),
                    length: horizon,
                    rho,
                    deviation: dev,
                    bound,
                });
            }
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports.into_iter().fold(TravelReport::empty(), TravelReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_segments_small_exhaustive() {
        let r = tree_segments(2, 4, 2);
        assert_eq!(r.violations, 0);
        assert!(r.worst_excess <= 0.0);
        // oracle: count pairs directly from the definition for T <= 1, ρ <= 1
        let small = tree_segments(2, 1, 1);
        let ball1: Vec<Word> = tree::ball_enumerate(2, 1).collect();
        let mut count = 0;
        for q1 in &ball1 {
            for p2 in &ball1 {
                for g in &ball1 {
                    if p2.dist(&q1.mul(g)) == q1.len() as u64 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(small.pairs, count);
    }

    #[test]
    fn tree_rays_converge() {
        let r = tree_rays(2, 2, &sample_tree_ends(2), 12);
        assert_eq!(r.violations, 0);
        assert_eq!(r.pairs, 5 * 17 * 17);
    }

    #[test]
    fn plane_pairs_respect_bounds() {
        let r = plane_segments(2000, 6.0, 1.0, 0.8814, 0.05, 3).unwrap();
        assert_eq!(r.violations, 0);
        // distance between geodesics is convex, so even δ = 0 passes
        let r0 = plane_segments(2000, 6.0, 1.0, 0.0, 0.05, 3).unwrap();
        assert_eq!(r0.violations, 0);
        let rays = plane_rays(500, 3.0, 0.8814, 20.0, 0.05, 4).unwrap();
        assert_eq!(rays.violations, 0);
        let again = plane_segments(2000, 6.0, 1.0, 0.8814, 0.05, 3).unwrap();
        assert_eq!(again.worst_excess, r.worst_excess);
    }
}

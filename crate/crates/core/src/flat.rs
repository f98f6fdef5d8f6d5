//! Euclidean plane with the integer lattice acting by translations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FlatPoint {
    pub x: f64,
    pub y: f64,
}

impl FlatPoint {
    pub fn new(x: f64, y: f64) -> Self {
        FlatPoint { x, y }
    }

    pub fn dist(&self, o: &FlatPoint) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Distance in the unit-square torus `ℝ² / ℤ²`.
    pub fn torus_dist(&self, o: &FlatPoint) -> f64 {
        let wrap = |d: f64| {
            let r = d - d.round();
            r.abs()
        };
        wrap(self.x - o.x).hypot(wrap(self.y - o.y))
    }

    pub fn translate(&self, v: (i64, i64)) -> FlatPoint {
        FlatPoint { x: self.x + v.0 as f64, y: self.y + v.1 as f64 }
    }
}

fn unit(theta: f64) -> (f64, f64) {
    (theta.cos(), theta.sin())
}

fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-12 || 2.0 * PI - d < 1e-12
}

/// Straight line `t ↦ origin + t u_θ` on `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FlatGeodesic {
    pub origin: FlatPoint,
    pub theta: f64,
    pub lo: f64,
    pub hi: f64,
}

impl FlatGeodesic {
    pub fn segment(p: &FlatPoint, q: &FlatPoint) -> Result<FlatGeodesic> {
        let d = p.dist(q);
        if d == 0.0 {
            return Err(GeomError::Degenerate("zero-length segment".into()));
        }
        Ok(FlatGeodesic { origin: *p, theta: (q.y - p.y).atan2(q.x - p.x), lo: 0.0, hi: d })
    }

    pub fn ray(p: &FlatPoint, theta: f64) -> FlatGeodesic {
        FlatGeodesic { origin: *p, theta, lo: 0.0, hi: f64::INFINITY }
    }

    /// The line through the origin from direction `xi` to direction `eta`;
    /// only antipodal directions are joined by a line, and it is not unique.
    pub fn line(xi: f64, eta: f64) -> Result<FlatGeodesic> {
        if same_angle(xi, eta) {
            return Err(GeomError::SameEndpoints);
        }
        if !same_angle(xi + PI, eta) {
            return Err(GeomError::Precondition("flat lines join antipodal directions only".into()));
        }
        Ok(FlatGeodesic { origin: FlatPoint::new(0.0, 0.0), theta: eta, lo: f64::NEG_INFINITY, hi: f64::INFINITY })
    }

    pub fn point_unchecked(&self, t: f64) -> FlatPoint {
        let (c, s) = unit(self.theta);
        FlatPoint::new(self.origin.x + t * c, self.origin.y + t * s)
    }

    pub fn point(&self, t: f64) -> Result<FlatPoint> {
        if t < self.lo - 1e-12 || t > self.hi + 1e-12 {
            return Err(GeomError::OutsideDomain { t, lo: self.lo, hi: self.hi });
        }
        Ok(self.point_unchecked(t))
    }

    /// Parallel translate by `offset` to the left of the direction of travel.
    pub fn parallel(&self, offset: f64) -> FlatGeodesic {
        let (c, s) = unit(self.theta);
        FlatGeodesic { origin: FlatPoint::new(self.origin.x - offset * s, self.origin.y + offset * c), ..*self }
    }
}

/// `b_p(q, θ) = -⟨q - p, u_θ⟩`.
pub fn busemann(q: &FlatPoint, p: &FlatPoint, theta: f64) -> f64 {
    let (c, s) = unit(theta);
    -((q.x - p.x) * c + (q.y - p.y) * s)
}

/// Equilateral triangle with the given circumradius centred at the origin,
/// whose thinness is `3r/4`: flat space is not hyperbolic.
pub fn equilateral_witness(circumradius: f64) -> ([FlatPoint; 3], f64) {
    let v = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]
        .map(|a: f64| FlatPoint::new(circumradius * a.cos(), circumradius * a.sin()));
    let side_mid = FlatPoint::new(0.5 * (v[0].x + v[1].x), 0.5 * (v[0].y + v[1].y));
    let defect = [(&v[1], &v[2]), (&v[2], &v[0])]
        .iter()
        .map(|(a, b)| point_segment_dist(&side_mid, a, b))
        .fold(f64::INFINITY, f64::min);
    (v, defect)
}

pub fn point_segment_dist(z: &FlatPoint, a: &FlatPoint, b: &FlatPoint) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((z.x - a.x) * dx + (z.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    z.dist(&FlatPoint::new(a.x + t * dx, a.y + t * dy))
}

/// `#{v ∈ ℤ² : |v| ≤ r}`.
pub fn lattice_ball_count(r: f64) -> u64 {
    let m = r.floor() as i64;
    (-m..=m)
        .map(|x| {
            let rest = r * r - (x * x) as f64;
            if rest < 0.0 {
                0
            } else {
                2 * (rest.sqrt().floor() as u64) + 1
            }
        })
        .sum()
}

//! The upper half-plane model of the hyperbolic plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub const DEFAULT_EPS_PT: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(GeomError::OffPlane(y));
        }
        Ok(PlanePoint { x, y })
    }

    pub fn i() -> Self {
        PlanePoint { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub(crate) fn from_complex(z: Complex64) -> Self {
        PlanePoint { x: z.re, y: z.im.max(f64::MIN_POSITIVE) }
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (self.y * other.y).sqrt())).asinh()
    }

    pub fn approx_eq(&self, other: &PlanePoint, eps: f64) -> bool {
        self.dist(other) <= eps
    }
}

/// A point of `ℝ ∪ {∞}`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum PlaneEnd {
    Finite(f64),
    Infinity,
}

impl PlaneEnd {
    pub fn approx_eq(&self, other: &PlaneEnd, eps: f64) -> bool {
        match (self, other) {
            (PlaneEnd::Infinity, PlaneEnd::Infinity) => true,
            (PlaneEnd::Finite(a), PlaneEnd::Finite(b)) => (a - b).abs() <= eps * (1.0 + a.abs().max(b.abs())),
            _ => false,
        }
    }

    /// Angle of the point on the unit circle under the Cayley map `(z - i)/(z + i)`.
    pub fn disk_angle(&self) -> f64 {
        match self {
            PlaneEnd::Infinity => 0.0,
            PlaneEnd::Finite(x) => {
                let z = Complex64::new(*x, 0.0);
                ((z - Complex64::i()) / (z + Complex64::i())).arg()
            }
        }
    }

    pub fn from_disk_angle(theta: f64) -> PlaneEnd {
        let w = Complex64::from_polar(1.0, theta);
        if (w - 1.0).norm() < 1e-15 {
            return PlaneEnd::Infinity;
        }
        PlaneEnd::Finite((Complex64::i() * (w + 1.0) / (Complex64::new(1.0, 0.0) - w)).re)
    }
}

/// An element of PSL(2, ℝ), normalised to determinant 1 with the first
/// non-negligible entry positive.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(GeomError::Degenerate(format!("matrix determinant {det} is not positive")));
        }
        let s = det.sqrt();
        Ok(Mobius { a: a / s, b: b / s, c: c / s, d: d / s }.canonical())
    }

    fn canonical(self) -> Self {
        let first = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|v| v.abs() > 1e-12)
            .unwrap_or(1.0);
        if first < 0.0 {
            Mobius { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &Mobius) -> Mobius {
        let m = Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        };
        let s = m.det().sqrt();
        Mobius { a: m.a / s, b: m.b / s, c: m.c / s, d: m.d / s }.canonical()
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn apply(&self, p: &PlanePoint) -> PlanePoint {
        PlanePoint::from_complex(self.apply_complex(p.to_complex()))
    }

    pub fn apply_end(&self, e: &PlaneEnd) -> PlaneEnd {
        match e {
            PlaneEnd::Infinity => {
                if self.c == 0.0 {
                    PlaneEnd::Infinity
                } else {
                    PlaneEnd::Finite(self.a / self.c)
                }
            }
            PlaneEnd::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    PlaneEnd::Infinity
                } else {
                    PlaneEnd::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// `A_z` with `A_z(i) = z`, mapping the upward tangent at `i` to the
    /// upward tangent at `z`.
    pub fn base_at(p: &PlanePoint) -> Mobius {
        let s = p.y.sqrt();
        Mobius { a: s, b: p.x / s, c: 0.0, d: 1.0 / s }
    }

    /// Rotation about `i` turning tangent vectors at `i` by `phi`.
    pub fn rotation(phi: f64) -> Mobius {
        let (s, c) = (phi / 2.0).sin_cos();
        Mobius { a: c, b: s, c: -s, d: c }.canonical()
    }

    /// `z ↦ e^t z`, the time-`t` flow along the imaginary axis.
    pub fn dilation(t: f64) -> Mobius {
        Mobius { a: (t / 2.0).exp(), b: 0.0, c: 0.0, d: (-t / 2.0).exp() }
    }

    /// Fixed points `(repelling, attracting)` of a hyperbolic element.
    pub fn hyperbolic_fixed_points(&self) -> Result<(PlaneEnd, PlaneEnd)> {
        let t = self.trace().abs();
        if t <= 2.0 {
            return Err(GeomError::Precondition(format!("trace {t} is not hyperbolic")));
        }
        let disc = (t * t - 4.0).sqrt();
        let attracting_first = |z1: PlaneEnd, z2: PlaneEnd| -> (PlaneEnd, PlaneEnd) {
            let probe = PlanePoint { x: 0.1234, y: 0.7 };
            let mut z = probe.to_complex();
            for _ in 0..200 {
                z = self.apply_complex(z);
            }
            let near = |e: &PlaneEnd| match e {
                PlaneEnd::Infinity => 1.0 / z.norm(),
                PlaneEnd::Finite(x) => (z - Complex64::new(*x, 0.0)).norm(),
            };
            if near(&z1) < near(&z2) {
                (z2, z1)
            } else {
                (z1, z2)
            }
        };
        if self.c.abs() < 1e-14 {
            let x = self.b / (self.d - self.a);
            return Ok(attracting_first(PlaneEnd::Finite(x), PlaneEnd::Infinity));
        }
        let sign = self.trace().signum();
        let z1 = ((self.a - self.d) + sign * disc) / (2.0 * self.c);
        let z2 = ((self.a - self.d) - sign * disc) / (2.0 * self.c);
        Ok(attracting_first(PlaneEnd::Finite(z1), PlaneEnd::Finite(z2)))
    }
}

/// Unit-speed geodesic `t ↦ M(i e^t)` on the domain `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct PlaneGeodesic {
    pub m: Mobius,
    pub lo: f64,
    pub hi: f64,
}

impl PlaneGeodesic {
    /// Line with `c(-∞) = xi`, `c(+∞) = eta`.
    pub fn line(xi: &PlaneEnd, eta: &PlaneEnd) -> Result<PlaneGeodesic> {
        if xi.approx_eq(eta, 1e-14) {
            return Err(GeomError::SameEndpoints);
        }
        let m = match (xi, eta) {
            (PlaneEnd::Infinity, PlaneEnd::Finite(e)) => Mobius::new(*e, -1.0, 1.0, 0.0)?,
            (PlaneEnd::Finite(x), PlaneEnd::Infinity) => Mobius::new(1.0, *x, 0.0, 1.0)?,
            (PlaneEnd::Finite(x), PlaneEnd::Finite(e)) if e > x => Mobius::new(*e, *x, 1.0, 1.0)?,
            (PlaneEnd::Finite(x), PlaneEnd::Finite(e)) => Mobius::new(*e, -*x, 1.0, -1.0)?,
            (PlaneEnd::Infinity, PlaneEnd::Infinity) => unreachable!(),
        };
        Ok(PlaneGeodesic { m, lo: f64::NEG_INFINITY, hi: f64::INFINITY })
    }

    /// Line through `ends` reparametrised so that `p` (assumed on it) is at time 0.
    fn line_through(xi: &PlaneEnd, eta: &PlaneEnd, p: &PlanePoint) -> Result<PlaneGeodesic> {
        let g = PlaneGeodesic::line(xi, eta)?;
        let w = g.m.inverse().apply_complex(p.to_complex());
        Ok(g.shifted(w.norm().ln()))
    }

    pub fn segment(p: &PlanePoint, q: &PlanePoint, eps: f64) -> Result<PlaneGeodesic> {
        let d = p.dist(q);
        if d <= eps {
            return Err(GeomError::Degenerate("zero-length segment".into()));
        }
        let (xi, eta) = if (p.x - q.x).abs() <= 1e-12 * (1.0 + p.x.abs()) {
            if q.y > p.y {
                (PlaneEnd::Finite(p.x), PlaneEnd::Infinity)
            } else {
                (PlaneEnd::Infinity, PlaneEnd::Finite(p.x))
            }
        } else {
            let c = (p.x * p.x + p.y * p.y - q.x * q.x - q.y * q.y) / (2.0 * (p.x - q.x));
            let r = ((p.x - c).powi(2) + p.y * p.y).sqrt();
            if q.x > p.x {
                (PlaneEnd::Finite(c - r), PlaneEnd::Finite(c + r))
            } else {
                (PlaneEnd::Finite(c + r), PlaneEnd::Finite(c - r))
            }
        };
        let mut g = PlaneGeodesic::line_through(&xi, &eta, p)?;
        g.lo = 0.0;
        g.hi = d;
        Ok(g)
    }

    pub fn ray(p: &PlanePoint, xi: &PlaneEnd) -> Result<PlaneGeodesic> {
        let start = match xi {
            PlaneEnd::Infinity => PlaneEnd::Finite(p.x),
            PlaneEnd::Finite(e) if (p.x - e).abs() <= 1e-15 * (1.0 + e.abs()) => PlaneEnd::Infinity,
            PlaneEnd::Finite(e) => {
                let c = (p.x * p.x + p.y * p.y - e * e) / (2.0 * (p.x - e));
                PlaneEnd::Finite(2.0 * c - e)
            }
        };
        let mut g = PlaneGeodesic::line_through(&start, xi, p)?;
        g.lo = 0.0;
        Ok(g)
    }

    /// Geodesic through `p` leaving in direction `theta` (measured from the
    /// positive real axis), unit speed, time 0 at `p`.
    pub fn from_tangent(p: &PlanePoint, theta: f64) -> PlaneGeodesic {
        PlaneGeodesic {
            m: Mobius::base_at(p).mul(&Mobius::rotation(theta - PI / 2.0)),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn shifted(&self, s: f64) -> PlaneGeodesic {
        PlaneGeodesic { m: self.m.mul(&Mobius::dilation(s)), lo: self.lo - s, hi: self.hi - s }
    }

    pub fn point_unchecked(&self, t: f64) -> PlanePoint {
        let z = Complex64::new(0.0, t.exp());
        PlanePoint::from_complex(self.m.apply_complex(z))
    }

    pub fn point(&self, t: f64) -> Result<PlanePoint> {
        let tol = 1e-9;
        if t < self.lo - tol || t > self.hi + tol {
            return Err(GeomError::OutsideDomain { t, lo: self.lo, hi: self.hi });
        }
        Ok(self.point_unchecked(t))
    }

    pub fn start_end(&self) -> PlaneEnd {
        self.m.apply_end(&PlaneEnd::Finite(0.0))
    }

    pub fn end_end(&self) -> PlaneEnd {
        self.m.apply_end(&PlaneEnd::Infinity)
    }

    /// Distance from `z` to the geodesic restricted to its domain.
    pub fn distance_to(&self, z: &PlanePoint) -> f64 {
        let w = self.m.inverse().apply_complex(z.to_complex());
        let tau = w.norm().ln().clamp(self.lo, self.hi);
        let foot = Complex64::new(0.0, tau.exp());
        PlanePoint::from_complex(w).dist(&PlanePoint::from_complex(foot))
    }

    /// Direction angle of the unit tangent at time `t`.
    pub fn tangent_angle(&self, t: f64) -> f64 {
        let z = Complex64::new(0.0, t.exp());
        let den = self.m.c * z + self.m.d;
        // derivative of M at z is 1/den^2; the upward tangent at i e^t has angle π/2
        PI / 2.0 - 2.0 * den.arg()
    }
}

/// `b_p(q, ξ)`, in closed form after moving `ξ` to `∞`.
pub fn busemann(q: &PlanePoint, p: &PlanePoint, xi: &PlaneEnd) -> f64 {
    match xi {
        PlaneEnd::Infinity => p.y.ln() - q.y.ln(),
        PlaneEnd::Finite(e) => {
            let g = Mobius { a: 0.0, b: -1.0, c: 1.0, d: -e };
            busemann(&g.apply(q), &g.apply(p), &PlaneEnd::Infinity)
        }
    }
}

/// `lim d(q, c(t)) - t` along the ray from `p` to `ξ`, stopping once
/// successive doublings of `t` change the value by less than `tol`.
pub fn busemann_numeric(q: &PlanePoint, p: &PlanePoint, xi: &PlaneEnd, tol: f64, horizon: f64) -> Result<f64> {
    let ray = PlaneGeodesic::ray(p, xi)?;
    let eval = |t: f64| -> f64 {
        let z = ray.point_unchecked(t);
        z.dist(q) - t
    };
    let mut t = 1.0;
    let mut prev = eval(t);
    let mut change = f64::INFINITY;
    while t < horizon {
        t *= 2.0;
        let cur = eval(t);
        change = (cur - prev).abs();
        if change < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(GeomError::NonConvergent { horizon, last_change: change })
}

/// Point at distance `r` from `i` in direction `phi`.
pub fn polar_from_i(r: f64, phi: f64) -> PlanePoint {
    PlaneGeodesic::from_tangent(&PlanePoint::i(), phi).point_unchecked(r)
}

/// Largest distance from a point on one side of the triangle to the union of
/// the other two, over all three sides.
pub fn triangle_thinness(a: &PlanePoint, b: &PlanePoint, c: &PlanePoint) -> f64 {
    let verts = [*a, *b, *c];
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let (u, v, w) = (verts[k], verts[(k + 1) % 3], verts[(k + 2) % 3]);
        let Ok(side) = PlaneGeodesic::segment(&u, &v, 1e-12) else { continue };
        let to_start = PlaneGeodesic::segment(&w, &u, 1e-12).ok();
        let to_end = PlaneGeodesic::segment(&v, &w, 1e-12).ok();
        let f = |t: f64| to_start.map_or(u.dist(&side.point_unchecked(t)), |g| g.distance_to(&side.point_unchecked(t)));
        let g = |t: f64| to_end.map_or(v.dist(&side.point_unchecked(t)), |g| g.distance_to(&side.point_unchecked(t)));
        // f grows from 0 and g shrinks to 0 along the side (distance to a
        // geodesic segment is convex), so min(f, g) peaks at their crossing
        let (mut lo, mut hi) = (side.lo, side.hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < g(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        worst = worst.max(f(t).min(g(t)));
    }
    worst
}

const DELTA_CHUNK: usize = 4096;

/// Monte-Carlo thinness over triangles with vertices uniform (by area) in the
/// ball of the given radius about `i`. Samples are drawn in fixed chunks with
/// one RNG stream per chunk, so the result is independent of thread count and
/// nondecreasing in `samples`.
pub fn estimate_delta(samples: usize, radius: f64, seed: u64) -> (f64, [PlanePoint; 3]) {
    let chunks = samples.div_ceil(DELTA_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let n = DELTA_CHUNK.min(samples - ci * DELTA_CHUNK);
            let mut best = (0.0f64, [PlanePoint::i(); 3]);
            for _ in 0..n {
                let tri = [0, 1, 2].map(|_| sample_in_ball(&mut rng, radius));
                let d = triangle_thinness(&tri[0], &tri[1], &tri[2]);
                if d > best.0 {
                    best = (d, tri);
                }
            }
            best
        })
        .reduce(|| (0.0, [PlanePoint::i(); 3]), |a, b| if b.0 > a.0 { b } else { a })
}

pub fn sample_in_ball<R: Rng>(rng: &mut R, radius: f64) -> PlanePoint {
    let u: f64 = rng.gen();
    let r = (1.0 + u * (radius.cosh() - 1.0)).acosh();
    let phi = rng.gen::<f64>() * 2.0 * PI;
    polar_from_i(r, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(x: f64, y: f64) -> PlanePoint {
        PlanePoint::new(x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(pt(0.0, 1.0).dist(&pt(0.0, 2.0)), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(pt(0.0, 1.0).dist(&pt(1.0, 1.0)), 1.5f64.acosh(), epsilon = 1e-14);
        assert!(PlanePoint::new(0.0, 0.0).is_err());
    }

    /// Length of the straight Euclidean path is an upper bound, and the
    /// length of the constructed geodesic arc, integrated numerically,
    /// matches the closed form.
    #[test]
    fn distance_matches_arc_length_integration() {
        let (p, q) = (pt(0.0, 1.0), pt(1.0, 1.0));
        let g = PlaneGeodesic::segment(&p, &q, 1e-12).unwrap();
        let n = 20000;
        let mut len = 0.0;
        for k in 0..n {
            let a = g.point_unchecked(g.hi * k as f64 / n as f64);
            let b = g.point_unchecked(g.hi * (k + 1) as f64 / n as f64);
            let ymid = 0.5 * (a.y + b.y);
            len += ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt() / ymid;
        }
        assert_abs_diff_eq!(len, 1.5f64.acosh(), epsilon = 1e-8);
    }

    #[test]
    fn segment_examples() {
        let g = PlaneGeodesic::segment(&pt(-1.0, 1.0), &pt(1.0, 1.0), 1e-12).unwrap();
        for k in 0..=10 {
            let z = g.point(g.hi * k as f64 / 10.0).unwrap();
            assert_abs_diff_eq!(z.x * z.x + z.y * z.y, 2.0, epsilon = 1e-12);
        }
        assert!(g.point(0.0).unwrap().approx_eq(&pt(-1.0, 1.0), 1e-12));
        assert!(g.point(g.hi).unwrap().approx_eq(&pt(1.0, 1.0), 1e-12));
        let v = PlaneGeodesic::segment(&pt(0.0, 1.0), &pt(0.0, 3.0), 1e-12).unwrap();
        assert_abs_diff_eq!(v.hi, 3f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(v.point(0.5).unwrap().x, 0.0, epsilon = 1e-14);
        assert!(v.point(5.0).is_err());
    }

    #[test]
    fn ray_and_line_examples() {
        let r = PlaneGeodesic::ray(&pt(0.0, 1.0), &PlaneEnd::Infinity).unwrap();
        assert!(r.point(2.0).unwrap().approx_eq(&pt(0.0, 2f64.exp()), 1e-12));
        let l = PlaneGeodesic::line(&PlaneEnd::Finite(0.0), &PlaneEnd::Infinity).unwrap();
        assert_abs_diff_eq!(l.point(0.3).unwrap().x, 0.0, epsilon = 1e-15);
        let l = PlaneGeodesic::line(&PlaneEnd::Finite(-1.0), &PlaneEnd::Finite(1.0)).unwrap();
        for t in [-3.0, 0.0, 2.0] {
            let z = l.point(t).unwrap();
            assert_abs_diff_eq!(z.x * z.x + z.y * z.y, 1.0, epsilon = 1e-12);
        }
        assert!(l.start_end().approx_eq(&PlaneEnd::Finite(-1.0), 1e-12));
        assert!(l.end_end().approx_eq(&PlaneEnd::Finite(1.0), 1e-12));
        assert!(PlaneGeodesic::line(&PlaneEnd::Infinity, &PlaneEnd::Infinity).is_err());
    }

    #[test]
    fn rays_reach_their_endpoint() {
        let p = pt(0.3, 0.7);
        for xi in [PlaneEnd::Finite(-2.0), PlaneEnd::Finite(0.3), PlaneEnd::Finite(5.0), PlaneEnd::Infinity] {
            let r = PlaneGeodesic::ray(&p, &xi).unwrap();
            assert!(r.point(0.0).unwrap().approx_eq(&p, 1e-10));
            assert!(r.end_end().approx_eq(&xi, 1e-9), "{xi:?} vs {:?}", r.end_end());
        }
    }

    #[test]
    fn tangent_direction_matches_theta() {
        let p = pt(0.4, 1.7);
        for theta in [0.0, 0.7, 2.0, -1.2, 3.0] {
            let g = PlaneGeodesic::from_tangent(&p, theta);
            let h = 1e-6;
            let z = g.point_unchecked(h);
            let (dx, dy) = ((z.x - p.x) / (h * p.y), (z.y - p.y) / (h * p.y));
            assert_abs_diff_eq!(dx, theta.cos(), epsilon = 1e-5);
            assert_abs_diff_eq!(dy, theta.sin(), epsilon = 1e-5);
            let a = g.tangent_angle(0.0);
            assert_abs_diff_eq!((a - theta).sin(), 0.0, epsilon = 1e-12);
            assert!((a - theta).cos() > 0.0);
        }
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(Mobius::IDENTITY.apply(&pt(0.0, 1.0)), pt(0.0, 1.0));
        let t = Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(t.apply(&pt(0.0, 1.0)).approx_eq(&pt(1.0, 1.0), 1e-15));
        let s = Mobius::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!(s.apply(&pt(0.0, 2.0)).approx_eq(&pt(0.0, 0.5), 1e-15));
        let neg = Mobius::new(-2.0, -1.0, -1.0, -1.0).unwrap();
        assert!(neg.a > 0.0);
        assert_abs_diff_eq!(neg.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fixed_points_of_rl() {
        let m = Mobius::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let (rep, att) = m.hyperbolic_fixed_points().unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(att.approx_eq(&PlaneEnd::Finite(phi), 1e-12));
        assert!(rep.approx_eq(&PlaneEnd::Finite(1.0 - phi), 1e-12));
    }

    #[test]
    fn busemann_examples() {
        let e = PlaneEnd::Infinity;
        assert_abs_diff_eq!(busemann(&pt(0.0, 1f64.exp()), &pt(0.0, 1.0), &e), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(busemann(&pt(3.0, 1.0), &pt(0.0, 1.0), &e), 0.0, epsilon = 1e-15);
        let numeric = busemann_numeric(&pt(3.0, 1.0), &pt(0.0, 1.0), &e, 1e-10, 1e3).unwrap();
        assert_abs_diff_eq!(numeric, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn busemann_closed_form_matches_numeric_limit_at_finite_ends() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = sample_in_ball(&mut rng, 3.0);
            let q = sample_in_ball(&mut rng, 3.0);
            let xi = PlaneEnd::Finite(rng.gen_range(-3.0..3.0));
            let exact = busemann(&q, &p, &xi);
            let numeric = busemann_numeric(&q, &p, &xi, 1e-10, 200.0).unwrap();
            assert_abs_diff_eq!(exact, numeric, epsilon = 1e-7);
        }
    }

    #[test]
    fn disk_angle_round_trip() {
        for x in [-5.0, -1.0, 0.0, 0.3, 10.0] {
            let e = PlaneEnd::Finite(x);
            assert!(PlaneEnd::from_disk_angle(e.disk_angle()).approx_eq(&e, 1e-12));
        }
        assert_eq!(PlaneEnd::from_disk_angle(0.0), PlaneEnd::Infinity);
    }

    #[test]
    fn distance_to_segment_is_exact_on_axis() {
        let g = PlaneGeodesic::segment(&pt(0.0, 1.0), &pt(0.0, 4.0), 1e-12).unwrap();
        assert_abs_diff_eq!(g.distance_to(&pt(0.0, 8.0)), 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(g.distance_to(&pt(0.0, 2.0)), 0.0, epsilon = 1e-12);
        let off = pt(2.0, 2.0);
        let brute = (0..=4000)
            .map(|k| g.point_unchecked(g.hi * k as f64 / 4000.0).dist(&off))
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(g.distance_to(&off), brute, epsilon = 1e-6);
    }

    /// Ideal-triangle limit: thinness of large triangles approaches ln(1 + √2).
    #[test]
    fn delta_estimate_is_bounded_and_monotone() {
        let (small, _) = estimate_delta(4096, 20.0, 11);
        let (large, _) = estimate_delta(3 * 4096, 20.0, 11);
        assert!(large >= small);
        assert!(large <= (1.0 + 2f64.sqrt()).ln() + 1e-6, "{large}");
        assert!(large > 0.7, "{large}");
    }
}

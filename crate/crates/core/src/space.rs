//! Backend-agnostic geometry: points, boundary points, geodesics, Busemann
//! functions and thin-triangle constants over the three model spaces.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::flat::{self, FlatGeodesic, FlatPoint};
use crate::plane::{self, PlaneEnd, PlaneGeodesic, PlanePoint, DEFAULT_EPS_PT};
use crate::tree::{self, TreeEnd, TreeGeodesic, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Backend {
    Tree,
    Plane,
    Flat,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Tree => "tree",
            Backend::Plane => "plane",
            Backend::Flat => "flat",
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum SpacePoint {
    Tree(Word),
    Plane(PlanePoint),
    Flat(FlatPoint),
}

impl SpacePoint {
    pub fn backend(&self) -> Backend {
        match self {
            SpacePoint::Tree(_) => Backend::Tree,
            SpacePoint::Plane(_) => Backend::Plane,
            SpacePoint::Flat(_) => Backend::Flat,
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Tree(TreeEnd),
    /// A neighbourhood: every end beginning with the prefix.
    TreeCylinder(Word),
    Plane(PlaneEnd),
    /// Direction angle.
    Flat(f64),
}

impl BoundaryPoint {
    pub fn backend(&self) -> Backend {
        match self {
            BoundaryPoint::Tree(_) | BoundaryPoint::TreeCylinder(_) => Backend::Tree,
            BoundaryPoint::Plane(_) => Backend::Plane,
            BoundaryPoint::Flat(_) => Backend::Flat,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum PathKind {
    Segment,
    Ray,
    Line,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum PathCurve {
    Tree(TreeGeodesic),
    Plane(PlaneGeodesic),
    Flat(FlatGeodesic),
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub kind: PathKind,
    /// Set for the zero-length segment returned by `connect(p, p)`.
    pub degenerate: bool,
    pub curve: PathCurve,
}

impl GeodesicPath {
    pub fn domain(&self) -> (f64, f64) {
        if self.degenerate {
            return (0.0, 0.0);
        }
        match &self.curve {
            PathCurve::Tree(g) => g.domain(),
            PathCurve::Plane(g) => (g.lo, g.hi),
            PathCurve::Flat(g) => (g.lo, g.hi),
        }
    }

    pub fn point(&self, t: f64) -> Result<SpacePoint> {
        let (lo, hi) = self.domain();
        if t < lo - 1e-9 || t > hi + 1e-9 {
            return Err(GeomError::OutsideDomain { t, lo, hi });
        }
        Ok(match &self.curve {
            PathCurve::Tree(g) => SpacePoint::Tree(g.point(t)?),
            PathCurve::Plane(g) => SpacePoint::Plane(g.point_unchecked(t)),
            PathCurve::Flat(g) => SpacePoint::Flat(g.point_unchecked(t)),
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum DeltaProvenance {
    Exact,
    Estimated,
    UnboundedWitness,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct HyperbolicityConstant {
    pub delta: f64,
    pub provenance: DeltaProvenance,
    /// Worst triangle found (plane) or the witness triangle (flat).
    pub witness: Vec<SpacePoint>,
}

/// One of the model spaces together with its tolerances.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum Space {
    Tree { rank: usize },
    Plane { eps_pt: f64 },
    Flat,
}

impl Space {
    pub fn tree(rank: usize) -> Self {
        Space::Tree { rank }
    }

    pub fn plane() -> Self {
        Space::Plane { eps_pt: DEFAULT_EPS_PT }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Space::Tree { .. } => Backend::Tree,
            Space::Plane { .. } => Backend::Plane,
            Space::Flat => Backend::Flat,
        }
    }

    fn eps(&self) -> f64 {
        match self {
            Space::Plane { eps_pt } => *eps_pt,
            _ => 0.0,
        }
    }

    fn check(&self, b: Backend) -> Result<()> {
        if b == self.backend() {
            Ok(())
        } else {
            Err(GeomError::BackendMismatch(self.backend().name(), b.name()))
        }
    }

    pub fn distance(&self, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
        self.check(p.backend())?;
        self.check(q.backend())?;
        Ok(match (p, q) {
            (SpacePoint::Tree(a), SpacePoint::Tree(b)) => a.dist(b) as f64,
            (SpacePoint::Plane(a), SpacePoint::Plane(b)) => a.dist(b),
            (SpacePoint::Flat(a), SpacePoint::Flat(b)) => a.dist(b),
            _ => unreachable!(),
        })
    }

    pub fn points_equal(&self, p: &SpacePoint, q: &SpacePoint) -> Result<bool> {
        Ok(self.distance(p, q)? <= self.eps())
    }

    pub fn connect(&self, p: &SpacePoint, q: &SpacePoint) -> Result<GeodesicPath> {
        let degenerate = self.points_equal(p, q)?;
        let curve = match (p, q) {
            (SpacePoint::Tree(a), SpacePoint::Tree(b)) => PathCurve::Tree(TreeGeodesic::segment(a, b)),
            (SpacePoint::Plane(a), SpacePoint::Plane(_)) if degenerate => {
                PathCurve::Plane(PlaneGeodesic { hi: 0.0, lo: 0.0, ..PlaneGeodesic::from_tangent(a, 0.0) })
            }
            (SpacePoint::Plane(a), SpacePoint::Plane(b)) => PathCurve::Plane(PlaneGeodesic::segment(a, b, self.eps())?),
            (SpacePoint::Flat(a), SpacePoint::Flat(_)) if degenerate => {
                PathCurve::Flat(FlatGeodesic { hi: 0.0, ..FlatGeodesic::ray(a, 0.0) })
            }
            (SpacePoint::Flat(a), SpacePoint::Flat(b)) => PathCurve::Flat(FlatGeodesic::segment(a, b)?),
            _ => unreachable!(),
        };
        Ok(GeodesicPath { kind: PathKind::Segment, degenerate, curve })
    }

    fn check_end(&self, xi: &BoundaryPoint) -> Result<()> {
        self.check(xi.backend())?;
        if let BoundaryPoint::TreeCylinder(_) = xi {
            return Err(GeomError::Precondition("a cylinder is a neighbourhood, not a boundary point".into()));
        }
        Ok(())
    }

    pub fn ray(&self, p: &SpacePoint, xi: &BoundaryPoint) -> Result<GeodesicPath> {
        self.check(p.backend())?;
        self.check_end(xi)?;
        let curve = match (p, xi) {
            (SpacePoint::Tree(a), BoundaryPoint::Tree(e)) => PathCurve::Tree(TreeGeodesic::ray(a, e)),
            (SpacePoint::Plane(a), BoundaryPoint::Plane(e)) => PathCurve::Plane(PlaneGeodesic::ray(a, e)?),
            (SpacePoint::Flat(a), BoundaryPoint::Flat(th)) => PathCurve::Flat(FlatGeodesic::ray(a, *th)),
            _ => unreachable!(),
        };
        Ok(GeodesicPath { kind: PathKind::Ray, degenerate: false, curve })
    }

    pub fn line(&self, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<GeodesicPath> {
        self.check_end(xi)?;
        self.check_end(eta)?;
        let curve = match (xi, eta) {
            (BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => PathCurve::Tree(TreeGeodesic::line(a, b)?),
            (BoundaryPoint::Plane(a), BoundaryPoint::Plane(b)) => PathCurve::Plane(PlaneGeodesic::line(a, b)?),
            (BoundaryPoint::Flat(a), BoundaryPoint::Flat(b)) => PathCurve::Flat(FlatGeodesic::line(*a, *b)?),
            _ => unreachable!(),
        };
        Ok(GeodesicPath { kind: PathKind::Line, degenerate: false, curve })
    }

    /// `b_p(q, ξ)`: the limit of `d(q, c(t)) - t` along the ray `c` from `p` to `ξ`.
    pub fn busemann(&self, q: &SpacePoint, p: &SpacePoint, xi: &BoundaryPoint) -> Result<f64> {
        self.check(q.backend())?;
        self.check(p.backend())?;
        self.check_end(xi)?;
        Ok(match (q, p, xi) {
            (SpacePoint::Tree(a), SpacePoint::Tree(b), BoundaryPoint::Tree(e)) => tree::busemann(a, b, e) as f64,
            (SpacePoint::Plane(a), SpacePoint::Plane(b), BoundaryPoint::Plane(e)) => plane::busemann(a, b, e),
            (SpacePoint::Flat(a), SpacePoint::Flat(b), BoundaryPoint::Flat(th)) => flat::busemann(a, b, *th),
            _ => unreachable!(),
        })
    }

    /// `β_p(ξ, η) = -(b_p(q, ξ) + b_p(q, η))` for `q` on the line from `ξ` to `η`,
    /// together with the spread of the value over several choices of `q`.
    pub fn gromov_beta(&self, p: &SpacePoint, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<(f64, f64)> {
        let line = self.line(xi, eta)?;
        let eval = |t: f64| -> Result<f64> {
            let q = line.point(t)?;
            Ok(-(self.busemann(&q, p, xi)? + self.busemann(&q, p, eta)?))
        };
        let beta = eval(0.0)?;
        let mut spread: f64 = 0.0;
        for t in [-3.0, -1.0, 2.0, 5.0] {
            spread = spread.max((eval(t)? - beta).abs());
        }
        Ok((beta, spread))
    }

    /// `|b_q(z, ξ) - b_p(z, ξ) + b_p(q, ξ)|`.
    pub fn busemann_cocycle_check(&self, p: &SpacePoint, q: &SpacePoint, z: &SpacePoint, xi: &BoundaryPoint) -> Result<f64> {
        Ok((self.busemann(z, q, xi)? - self.busemann(z, p, xi)? + self.busemann(q, p, xi)?).abs())
    }

    /// Largest `d(c1(t), c2(t))` over `t ∈ [0, t_max]` sampled every `step`
    /// (integer steps on the tree).
    pub fn fellow_traveling_deviation(&self, c1: &GeodesicPath, c2: &GeodesicPath, t_max: f64, step: f64) -> Result<f64> {
        for c in [c1, c2] {
            let (lo, hi) = c.domain();
            if lo > 1e-9 || hi < t_max - 1e-9 {
                return Err(GeomError::OutsideDomain { t: t_max, lo, hi });
            }
        }
        let step = if self.backend() == Backend::Tree { 1.0 } else { step };
        let n = (t_max / step).ceil() as usize;
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            let t = (k as f64 * step).min(t_max);
            let t = if self.backend() == Backend::Tree { t.floor() } else { t };
            worst = worst.max(self.distance(&c1.point(t)?, &c2.point(t)?)?);
        }
        Ok(worst)
    }

    pub fn estimate_delta(&self, samples: usize, radius: f64, seed: u64) -> HyperbolicityConstant {
        match self {
            Space::Tree { .. } => {
                HyperbolicityConstant { delta: 0.0, provenance: DeltaProvenance::Exact, witness: Vec::new() }
            }
            Space::Plane { .. } => {
                let (delta, tri) = plane::estimate_delta(samples, radius, seed);
                HyperbolicityConstant {
                    delta,
                    provenance: DeltaProvenance::Estimated,
                    witness: tri.iter().map(|p| SpacePoint::Plane(*p)).collect(),
                }
            }
            Space::Flat => {
                let (tri, delta) = flat::equilateral_witness(radius);
                HyperbolicityConstant {
                    delta,
                    provenance: DeltaProvenance::UnboundedWitness,
                    witness: tri.iter().map(|p| SpacePoint::Flat(*p)).collect(),
                }
            }
        }
    }
}

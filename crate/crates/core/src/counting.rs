//! Orbit growth, entropy fits, closed-geodesic censuses and Margulis ratios.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::flat;
use crate::fuchsian::{self, IntMat};
use crate::group::Group;
use crate::plane::{Mobius, PlanePoint};
use crate::space::SpacePoint;
use crate::stats::least_squares;
use crate::tree::{self, Word};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusRow {
    pub radius: f64,
    pub count: u64,
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitCensus {
    pub group: String,
    pub base: String,
    pub rows: Vec<CensusRow>,
    pub certificate: String,
}

impl OrbitCensus {
    pub fn complete(&self) -> bool {
        self.rows.iter().all(|r| r.complete)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(GeomError::Precondition("radius grid must be non-empty, non-negative and strictly increasing".into()));
    }
    Ok(())
}

/// `card {γ : d(x, γ x) <= R}` for each `R` of the grid.
pub fn orbit_count(group: &Group, base: &SpacePoint, grid: &[f64]) -> Result<OrbitCensus> {
    check_grid(grid)?;
    match (group, base) {
        (Group::Free { rank }, SpacePoint::Tree(_)) => {
            // the orbit of any vertex is the full vertex set, counted by word length
            let r_max = grid.last().unwrap().floor() as usize;
            let spheres = tree::sphere_counts_streamed(*rank, r_max);
            let rows = grid
                .iter()
                .map(|r| CensusRow { radius: *r, count: spheres[..=r.floor() as usize].iter().sum(), complete: true })
                .collect();
            Ok(OrbitCensus {
                group: group.label(),
                base: "e".into(),
                rows,
                certificate: "exact streamed enumeration".into(),
            })
        }
        (Group::Lattice, SpacePoint::Flat(_)) => Ok(OrbitCensus {
            group: group.label(),
            base: "origin".into(),
            rows: grid.iter().map(|r| CensusRow { radius: *r, count: flat::lattice_ball_count(*r), complete: true }).collect(),
            certificate: "exact lattice-point count".into(),
        }),
        (Group::Fuchsian(g), SpacePoint::Plane(p)) => {
            let r_max = *grid.last().unwrap();
            if g.name == "modular" {
                let mut disp: Vec<f64> = fuchsian::lattice_ball(p, r_max).into_iter().map(|x| x.1).collect();
                disp.sort_by(f64::total_cmp);
                let rows = grid
                    .iter()
                    .map(|r| CensusRow { radius: *r, count: disp.partition_point(|d| *d <= *r) as u64, complete: true })
                    .collect();
                Ok(OrbitCensus {
                    group: group.label(),
                    base: format!("({}, {})", p.x, p.y),
                    rows,
                    certificate: "exact integer lattice enumeration".into(),
                })
            } else {
                let ball = fuchsian::group_ball(g, p, r_max, 14)?;
                let mut disp = ball.displacements.clone();
                disp.sort_by(f64::total_cmp);
                let rows = grid
                    .iter()
                    .map(|r| CensusRow { radius: *r, count: disp.partition_point(|d| *d <= *r) as u64, complete: ball.complete })
                    .collect();
                Ok(OrbitCensus { group: group.label(), base: format!("({}, {})", p.x, p.y), rows, certificate: ball.certificate })
            }
        }
        _ => Err(GeomError::BackendMismatch(group.backend().name(), base.backend().name())),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub h: f64,
    pub window: (f64, f64),
    pub residual: f64,
    /// `min count · e^{-hR}` over the window.
    pub c1: f64,
    /// `max count · e^{-hR}` over the window.
    pub c2: f64,
}

/// Slope of `log count` against `R` on the upper half of the census window.
pub fn fit_entropy(census: &OrbitCensus) -> Result<EntropyEstimate> {
    let rows: Vec<&CensusRow> = census.rows.iter().filter(|r| r.count > 0).collect();
    if rows.len() < 4 {
        return Err(GeomError::Precondition("entropy fit needs at least 4 census points".into()));
    }
    let lo = rows[0].radius;
    let hi = rows.last().unwrap().radius;
    let mid = 0.5 * (lo + hi);
    let window: Vec<&&CensusRow> = rows.iter().filter(|r| r.radius >= mid).collect();
    let xs: Vec<f64> = window.iter().map(|r| r.radius).collect();
    let ys: Vec<f64> = window.iter().map(|r| (r.count as f64).ln()).collect();
    let fit = least_squares(&xs, &ys)?;
    let h = fit.slope;
    let (c1, c2) = growth_constants(census, h, mid, hi);
    Ok(EntropyEstimate { h, window: (xs[0], *xs.last().unwrap()), residual: fit.residual, c1, c2 })
}

/// `(min, max)` of `count · e^{-hR}` over rows with `R ∈ [lo, hi]`.
pub fn growth_constants(census: &OrbitCensus, h: f64, lo: f64, hi: f64) -> (f64, f64) {
    census
        .rows
        .iter()
        .filter(|r| r.radius >= lo && r.radius <= hi)
        .map(|r| r.count as f64 * (-h * r.radius).exp())
        .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusEntry {
    pub length: f64,
    pub label: String,
}

/// Primitive closed geodesics sorted by length, complete up to `complete_to`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicCensus {
    pub group: String,
    pub entries: Vec<CensusEntry>,
    pub complete_to: f64,
    /// False for float groups, whose class dedup is heuristic.
    pub exact: bool,
}

impl GeodesicCensus {
    /// `P(t)`: number of classes with `ℓ <= t`.
    pub fn count(&self, t: f64) -> usize {
        self.entries.partition_point(|e| e.length <= t + 1e-12)
    }
}

pub fn geodesic_census(group: &Group, t_max: f64) -> Result<GeodesicCensus> {
    if !(t_max > 0.0) {
        return Err(GeomError::Precondition("census length must be positive".into()));
    }
    match group {
        Group::Free { rank } => {
            let classes = tree::primitive_classes(*rank, t_max.floor() as usize);
            Ok(GeodesicCensus {
                group: group.label(),
                entries: classes.iter().map(|c| CensusEntry { length: c.len() as f64, label: c.to_string() }).collect(),
                complete_to: t_max,
                exact: true,
            })
        }
        Group::Fuchsian(g) if g.name == "modular" => {
            let classes = fuchsian::enumerate_conj_classes_modular(t_max);
            let mut entries: Vec<CensusEntry> =
                classes.into_iter().map(|c| CensusEntry { length: c.length, label: c.word }).collect();
            entries.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.label.cmp(&b.label)));
            Ok(GeodesicCensus { group: group.label(), entries, complete_to: t_max, exact: true })
        }
        Group::Fuchsian(_) => Err(GeomError::Unsupported("generic fuchsian census")),
        Group::Lattice => Err(GeomError::Unsupported("flat")),
    }
}

/// `P(t) h t / e^{h t}`.
pub fn margulis_ratio(census: &GeodesicCensus, h: f64, t: f64) -> Result<f64> {
    if t > census.complete_to + 1e-12 {
        return Err(GeomError::Incomplete(format!("t = {t} exceeds census completeness {}", census.complete_to)));
    }
    if !(h > 0.0) {
        return Err(GeomError::Precondition("h must be positive".into()));
    }
    Ok(census.count(t) as f64 * h * t / (h * t).exp())
}

/// Smallest `A` with `(1/A) e^{ht}/t <= P(t) <= A e^{ht}` at every `t` given.
pub fn counting_constant(census: &GeodesicCensus, h: f64, ts: &[f64]) -> f64 {
    ts.iter()
        .map(|&t| {
            let p = census.count(t) as f64;
            let lower = (h * t).exp() / (t * p);
            let upper = p / (h * t).exp();
            lower.max(upper)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub enum PrimitiveInput {
    Tree(Word),
    Modular(IntMat),
    Float(Mobius),
}

/// Whether the element is not a proper power, and whether that answer is
/// only heuristic.
pub fn primitive_test(element: &PrimitiveInput) -> Result<(bool, bool)> {
    match element {
        PrimitiveInput::Tree(w) => {
            let (c, _) = tree::cyclic_reduce(w)?;
            Ok((c.is_primitive(), false))
        }
        PrimitiveInput::Modular(m) => Ok((fuchsian::is_primitive_modular(m)?, false)),
        PrimitiveInput::Float(m) => {
            // a k-th root shares the axis; flag a root whose trace is an integer
            let (len, kind) = fuchsian::translation_length(m, 1e-9)?;
            if kind != fuchsian::ElementType::Hyperbolic {
                return Err(GeomError::Precondition(format!("{kind:?} element")));
            }
            let has_integral_root = (2..=8).any(|k| {
                let tr = 2.0 * (len / (2.0 * k as f64)).cosh();
                tr > 2.5 && (tr - tr.round()).abs() < 1e-9
            });
            Ok((!has_integral_root, true))
        }
    }
}

/// Default base point for modular orbit counts: a point with trivial stabiliser.
pub fn modular_base() -> PlanePoint {
    PlanePoint { x: 0.0, y: 2.0 }
}

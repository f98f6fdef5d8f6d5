//! Patterson–Sullivan measures of the modular group, discretised on arcs of
//! the boundary circle seen from a fixed partition centre.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{ConformalReport, PairInvarianceReport};
use crate::error::{GeomError, Result};
use crate::plane::{self, Mobius, PlaneEnd, PlanePoint};
use crate::stats::extrapolate_to_zero;

/// Critical exponent of a lattice in the hyperbolic plane.
pub const H_PLANE: f64 = 1.0;

/// Orbit points `γ x0` of the modular group inside a ball, each tagged with
/// the boundary end of the ray from the centre through it.
#[derive(Clone, Debug)]
pub struct OrbitAtoms {
    pub centre: PlanePoint,
    pub radius: f64,
    pub points: Vec<PlanePoint>,
    /// Distance from the centre.
    pub radii: Vec<f64>,
    /// Visual angle from the centre, in `[0, 2π)`.
    pub angles: Vec<f64>,
}

fn to_disk(centre: &PlanePoint, z: Complex64) -> Complex64 {
    let w = Mobius::base_at(centre).inverse().apply_complex(z);
    (w - Complex64::i()) / (w + Complex64::i())
}

/// Angle at which `z` is seen from `centre`, in `[0, 2π)`.
pub fn visual_angle(centre: &PlanePoint, z: &PlanePoint) -> f64 {
    to_disk(centre, z.to_complex()).arg().rem_euclid(TAU)
}

pub fn visual_angle_end(centre: &PlanePoint, e: &PlaneEnd) -> f64 {
    Mobius::base_at(centre).inverse().apply_end(e).disk_angle().rem_euclid(TAU)
}

/// Boundary point seen from `centre` at angle `theta`.
pub fn end_at_angle(centre: &PlanePoint, theta: f64) -> PlaneEnd {
    Mobius::base_at(centre).apply_end(&PlaneEnd::from_disk_angle(theta))
}

pub fn orbit_atoms(centre: &PlanePoint, radius: f64) -> OrbitAtoms {
    let orbit = super::modular_orbit(centre, radius);
    let points: Vec<PlanePoint> = orbit.iter().map(|(_, z, _)| *z).collect();
    let radii = orbit.iter().map(|(_, _, d)| *d).collect();
    let angles = points.par_iter().map(|z| visual_angle(centre, z)).collect();
    OrbitAtoms { centre: *centre, radius, points, radii, angles }
}

pub fn cell_of(theta: f64, n_cells: usize) -> usize {
    ((theta.rem_euclid(TAU) / TAU * n_cells as f64) as usize).min(n_cells - 1)
}

pub fn cell_centre(i: usize, n_cells: usize) -> f64 {
    (i as f64 + 0.5) * TAU / n_cells as f64
}

/// Settings for pushing atoms to the boundary and extrapolating in `s`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitSettings {
    pub s_grid: Vec<f64>,
    /// Only atoms with centre distance in this range are used.
    pub annulus: (f64, f64),
}

impl LimitSettings {
    pub fn for_atoms(atoms: &OrbitAtoms) -> Self {
        LimitSettings {
            s_grid: vec![H_PLANE + 0.2, H_PLANE + 0.1, H_PLANE + 0.05, H_PLANE + 0.025],
            annulus: (0.75 * atoms.radius, atoms.radius),
        }
    }

    fn check(&self) -> Result<()> {
        if self.s_grid.len() < 2 || self.s_grid.iter().any(|s| *s <= H_PLANE) {
            return Err(GeomError::Precondition("s grid needs >= 2 values above h".into()));
        }
        if self.s_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(GeomError::Precondition("s grid must decrease toward h".into()));
        }
        Ok(())
    }
}

const CHUNK: usize = 8192;

/// Unnormalised weights `Σ e^{-s d(p, γx0)}` of annulus atoms per cell, one
/// row per `s`. Reduction order is fixed so results do not depend on the
/// thread count.
fn weighted_cells(atoms: &OrbitAtoms, p: &PlanePoint, bins: &[usize], n: usize, settings: &LimitSettings) -> Vec<Vec<f64>> {
    let (lo, hi) = settings.annulus;
    let partials: Vec<Vec<Vec<f64>>> = (0..atoms.points.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut acc = vec![vec![0.0; n]; settings.s_grid.len()];
            for &i in idx {
                let r = atoms.radii[i];
                if r < lo || r > hi {
                    continue;
                }
                let d = p.dist(&atoms.points[i]);
                for (k, s) in settings.s_grid.iter().enumerate() {
                    acc[k][bins[i]] += (-s * d).exp();
                }
            }
            acc
        })
        .collect();
    let mut out = vec![vec![0.0; n]; settings.s_grid.len()];
    for part in partials {
        for (row, prow) in out.iter_mut().zip(part) {
            for (a, b) in row.iter_mut().zip(prow) {
                *a += b;
            }
        }
    }
    out
}

/// Cell masses of `ν_p` on `n` uniform arcs, extrapolated to `s = h` and
/// normalised so that `ν_{centre}` has mass 1.
pub fn limit_cell_masses(atoms: &OrbitAtoms, p: &PlanePoint, n: usize, settings: &LimitSettings) -> Result<Vec<f64>> {
    settings.check()?;
    let bins: Vec<usize> = atoms.angles.iter().map(|a| cell_of(*a, n)).collect();
    limit_masses_on_bins(atoms, p, &bins, n, settings)
}

fn limit_masses_on_bins(atoms: &OrbitAtoms, p: &PlanePoint, bins: &[usize], n: usize, settings: &LimitSettings) -> Result<Vec<f64>> {
    let rows = weighted_cells(atoms, p, bins, n, settings);
    let norm_rows = if *p == atoms.centre { rows.clone() } else { weighted_cells(atoms, &atoms.centre, bins, n, settings) };
    let eps: Vec<f64> = settings.s_grid.iter().map(|s| s - H_PLANE).collect();
    let order = settings.s_grid.len() - 2;
    let mut out = vec![0.0; n];
    for (c, o) in out.iter_mut().enumerate() {
        let ys: Vec<f64> = rows
            .iter()
            .zip(&norm_rows)
            .map(|(r, nr)| r[c] / nr.iter().sum::<f64>())
            .collect();
        *o = extrapolate_to_zero(&eps, &ys, order)?.0.max(0.0);
    }
    Ok(out)
}

/// `max |log(ν_q(C)/ν_p(C)) + h b_p(q, ξ_C)|` over `n` arcs, with `ξ_C`
/// the arc's mid-direction from the centre.
pub fn conformal_check(atoms: &OrbitAtoms, p: &PlanePoint, q: &PlanePoint, n: usize, settings: &LimitSettings) -> Result<ConformalReport> {
    if p.approx_eq(q, 1e-12) {
        return Ok(ConformalReport { max_defect: 0.0, mean_defect: 0.0, cells: n, empty_cells: 0, exact: true });
    }
    let mp = limit_cell_masses(atoms, p, n, settings)?;
    let mq = limit_cell_masses(atoms, q, n, settings)?;
    let (mut worst, mut sum, mut used, mut empty) = (0.0f64, 0.0, 0usize, 0usize);
    for c in 0..n {
        if mp[c] <= 0.0 || mq[c] <= 0.0 {
            empty += 1;
            continue;
        }
        let xi = end_at_angle(&atoms.centre, cell_centre(c, n));
        let defect = ((mq[c] / mp[c]).ln() + H_PLANE * plane::busemann(q, p, &xi)).abs();
        worst = worst.max(defect);
        sum += defect;
        used += 1;
    }
    Ok(ConformalReport { max_defect: worst, mean_defect: sum / used.max(1) as f64, cells: used, empty_cells: empty, exact: false })
}

/// Shadow seen from `viewpoint` of the ball `B(centre, rho)`: the arc of
/// directions within `half_width` of `direction`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlaneShadow {
    pub viewpoint: PlanePoint,
    pub direction: f64,
    pub half_width: f64,
}

impl PlaneShadow {
    pub fn contains(&self, e: &PlaneEnd) -> bool {
        let a = visual_angle_end(&self.viewpoint, e);
        let diff = (a - self.direction + PI).rem_euclid(TAU) - PI;
        diff.abs() < self.half_width
    }

    /// The two boundary endpoints of the arc.
    pub fn endpoints(&self) -> (PlaneEnd, PlaneEnd) {
        (
            end_at_angle(&self.viewpoint, self.direction - self.half_width),
            end_at_angle(&self.viewpoint, self.direction + self.half_width),
        )
    }
}

pub fn shadow(viewpoint: &PlanePoint, centre: &PlanePoint, rho: f64) -> Result<PlaneShadow> {
    let d = viewpoint.dist(centre);
    if !(rho > 0.0) || d <= rho {
        return Err(GeomError::Precondition(format!("viewpoint lies within the ball (d = {d}, rho = {rho})")));
    }
    // right triangle with hypotenuse d and opposite side rho
    let half_width = (rho.sinh() / d.sinh()).asin();
    Ok(PlaneShadow { viewpoint: *viewpoint, direction: visual_angle(viewpoint, centre), half_width })
}

/// Fewest annulus atoms a shadow must hold for its mass to count as resolved.
pub const MIN_SHADOW_ATOMS: usize = 50;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowMass {
    pub mass: f64,
    /// Annulus atoms whose boundary direction falls in the shadow.
    pub atoms: usize,
    pub resolved: bool,
}

/// `ν_p(shadow)` from the atoms, extrapolated to `s = h` and normalised so
/// that `ν_{centre}` has mass 1.
pub fn shadow_mass(atoms: &OrbitAtoms, p: &PlanePoint, sh: &PlaneShadow, settings: &LimitSettings) -> Result<ShadowMass> {
    settings.check()?;
    let bins: Vec<usize> = atoms
        .angles
        .par_iter()
        .map(|a| usize::from(!sh.contains(&end_at_angle(&atoms.centre, *a))))
        .collect();
    let (lo, hi) = settings.annulus;
    let count = bins.iter().zip(&atoms.radii).filter(|(b, r)| **b == 0 && **r >= lo && **r <= hi).count();
    let mass = limit_masses_on_bins(atoms, p, &bins, 2, settings)?[0];
    Ok(ShadowMass { mass, atoms: count, resolved: count >= MIN_SHADOW_ATOMS })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowRow {
    pub distance: f64,
    pub mass: ShadowMass,
    /// `ν_p(shadow) · e^{h d(p, x)}`.
    pub ratio: f64,
}

/// `ν_p(pr_p B(x, rho))` and its ratio to `e^{-h d(p, x)}` for each `x`.
pub fn shadow_ratios(atoms: &OrbitAtoms, p: &PlanePoint, rho: f64, xs: &[PlanePoint], settings: &LimitSettings) -> Result<Vec<ShadowRow>> {
    xs.iter()
        .map(|x| {
            let sh = shadow(p, x, rho)?;
            let mass = shadow_mass(atoms, p, &sh, settings)?;
            let distance = p.dist(x);
            let ratio = mass.mass * (H_PLANE * distance).exp();
            Ok(ShadowRow { distance, mass, ratio })
        })
        .collect()
}

/// `β_c(ξ, η) = -2 log sin(θ/2)` for ends seen from the centre at angle `θ` apart.
pub fn gromov_beta_angles(a: f64, b: f64) -> f64 {
    let theta = (a - b).rem_euclid(TAU);
    -2.0 * (theta / 2.0).sin().abs().ln()
}

/// `∫∫ e^{β_c(θ, φ)} dθ dφ` over `[a0, a1] × [b0, b1]` for disjoint arcs,
/// using the antiderivative `-4 log|sin(u/2)|` of `-2 cot(u/2)`.
fn csc2_rectangle(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let g = |u: f64| -4.0 * (u / 2.0).sin().abs().ln();
    g(a1 - b0) - g(a0 - b0) - g(a1 - b1) + g(a0 - b1)
}

/// Smallest circular distance between two arcs given by raw endpoints.
fn arc_gap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let d = |x: f64| {
        let r = x.rem_euclid(TAU);
        r.min(TAU - r)
    };
    let ca = 0.5 * (a0 + a1);
    let cb = 0.5 * (b0 + b1);
    (d(ca - cb) - 0.5 * (a1 - a0) - 0.5 * (b1 - b0)).max(0.0)
}

/// Pair measure on arcs with base point the partition centre. Cell masses
/// of `ν` are spread uniformly over sub-arcs and the density
/// `e^{hβ} = 1 / sin²(θ/2)` is integrated exactly on each product.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairMeasure {
    pub n_cells: usize,
    /// Sub-arcs per cell.
    pub micro: usize,
    pub micro_masses: Vec<f64>,
    pub weight_cap: f64,
}

/// A piece `[lo, hi]` of sub-arc `idx`, in raw (unwrapped) angle.
type Piece = (usize, f64, f64);

impl PairMeasure {
    pub fn build(atoms: &OrbitAtoms, n_cells: usize, micro: usize, settings: &LimitSettings, weight_cap: f64) -> Result<Self> {
        let micro_masses = limit_cell_masses(atoms, &atoms.centre, n_cells * micro, settings)?;
        Ok(PairMeasure { n_cells, micro, micro_masses, weight_cap })
    }

    fn width(&self) -> f64 {
        TAU / (self.n_cells * self.micro) as f64
    }

    /// `μ̄` of a product of two sets of pieces, or `None` when the density
    /// exceeds the cap somewhere on the product.
    fn product_mass(&self, a: &[Piece], b: &[Piece]) -> Option<f64> {
        let w2 = self.width().powi(2);
        let mut acc = 0.0;
        for &(i, a0, a1) in a {
            for &(j, b0, b1) in b {
                let gap = arc_gap(a0, a1, b0, b1);
                if gap <= 0.0 || 1.0 / (gap / 2.0).sin().powi(2) > self.weight_cap {
                    return None;
                }
                acc += self.micro_masses[i] * self.micro_masses[j] / w2 * csc2_rectangle(a0, a1, b0, b1);
            }
        }
        Some(acc)
    }

    /// Weight of the cell pair `(A, B)`, `None` on the excluded band.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        if a == b {
            return None;
        }
        let (a, b) = (a.min(b), a.max(b));
        self.product_mass(&self.cell_parts(a), &self.cell_parts(b))
    }

    fn cell_parts(&self, a: usize) -> Vec<Piece> {
        let w = self.width();
        (a * self.micro..(a + 1) * self.micro).map(|i| (i, i as f64 * w, (i + 1) as f64 * w)).collect()
    }

    /// Sub-arc pieces covering the arc `[lo, lo + len)`.
    fn arc_parts(&self, lo: f64, len: f64) -> Vec<Piece> {
        let m = (self.n_cells * self.micro) as i64;
        let w = self.width();
        let start = (lo / w).floor() as i64;
        let end = ((lo + len) / w).ceil() as i64;
        (start..end)
            .filter_map(|k| {
                let a = (k as f64 * w).max(lo);
                let b = ((k + 1) as f64 * w).min(lo + len);
                (b > a).then(|| (k.rem_euclid(m) as usize, a, b))
            })
            .collect()
    }

    /// Image under `g` of cell `a`.
    fn image_parts(&self, centre: &PlanePoint, g: &Mobius, a: usize) -> Vec<Piece> {
        let w = TAU / self.n_cells as f64;
        let lo = visual_angle_end(centre, &g.apply_end(&end_at_angle(centre, a as f64 * w)));
        let hi = visual_angle_end(centre, &g.apply_end(&end_at_angle(centre, (a + 1) as f64 * w)));
        self.arc_parts(lo, (hi - lo).rem_euclid(TAU))
    }
}

/// Relative total-variation defect `Σ |μ̄(γA × γB) - μ̄(A × B)| / Σ μ̄(A × B)`
/// over non-adjacent cell pairs outside the excluded band.
pub fn pair_invariance_check(pm: &PairMeasure, centre: &PlanePoint, g: &Mobius) -> PairInvarianceReport {
    let n = pm.n_cells;
    let images: Vec<Vec<Piece>> = (0..n).map(|a| pm.image_parts(centre, g, a)).collect();
    let rows: Vec<(f64, f64, usize)> = (0..n)
        .into_par_iter()
        .map(|a| {
            let (mut diff, mut base, mut pairs) = (0.0, 0.0, 0usize);
            for b in 0..n {
                let gap = (a as i64 - b as i64).rem_euclid(n as i64);
                if gap <= 1 || gap >= n as i64 - 1 {
                    continue;
                }
                let (Some(before), Some(after)) = (pm.weight(a, b), pm.product_mass(&images[a], &images[b])) else {
                    continue;
                };
                diff += (after - before).abs();
                base += before;
                pairs += 1;
            }
            (diff, base, pairs)
        })
        .collect();
    let (diff, base, pairs) = rows.iter().fold((0.0, 0.0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2));
    PairInvarianceReport { max_relative_defect: if base > 0.0 { diff / base } else { 0.0 }, pairs, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::modular_base;
    use crate::space::{BoundaryPoint, Space, SpacePoint};
    use approx::assert_abs_diff_eq;

    #[test]
    fn visual_angles_round_trip() {
        let c = PlanePoint::new(0.3, 1.7).unwrap();
        for k in 0..12 {
            let th = 0.1 + k as f64 * 0.5;
            let e = end_at_angle(&c, th);
            assert_abs_diff_eq!(visual_angle_end(&c, &e), th.rem_euclid(TAU), epsilon = 1e-9);
            // a point far along the ray is seen at the same angle
            let ray = plane::PlaneGeodesic::ray(&c, &e).unwrap();
            assert_abs_diff_eq!(visual_angle(&c, &ray.point_unchecked(5.0)), th.rem_euclid(TAU), epsilon = 1e-9);
        }
    }

    #[test]
    fn beta_matches_space_gromov_product() {
        let c = PlanePoint::new(-0.2, 1.3).unwrap();
        let sp = Space::plane();
        for (a, b) in [(0.3, 2.0), (1.0, 4.5), (5.0, 5.3)] {
            let (xi, eta) = (end_at_angle(&c, a), end_at_angle(&c, b));
            let (beta, _) = sp.gromov_beta(&SpacePoint::Plane(c), &BoundaryPoint::Plane(xi), &BoundaryPoint::Plane(eta)).unwrap();
            assert_abs_diff_eq!(gromov_beta_angles(a, b), beta, epsilon = 1e-6);
        }
    }

    fn boundary_distance_to_ball(v: &PlanePoint, e: f64, p: &PlanePoint) -> f64 {
        plane::PlaneGeodesic::ray(v, &PlaneEnd::Finite(e)).unwrap().distance_to(p)
    }

    #[test]
    fn shadow_endpoints_match_tangency_oracle() {
        let v = PlanePoint::new(0.0, 8.0).unwrap();
        let p = PlanePoint::new(0.0, 1.0).unwrap();
        let sh = shadow(&v, &p, 1.0).unwrap();
        // oracle: bisect for the boundary point whose ray from v is tangent to the ball
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if boundary_distance_to_ball(&v, mid, &p) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = sh.endpoints();
        let xs = match (a, b) {
            (PlaneEnd::Finite(a), PlaneEnd::Finite(b)) => (a.min(b), a.max(b)),
            _ => panic!("shadow should be a bounded arc"),
        };
        assert_abs_diff_eq!(xs.1, lo, epsilon = 1e-7);
        assert_abs_diff_eq!(xs.0, -lo, epsilon = 1e-7);
        assert!(sh.contains(&PlaneEnd::Finite(0.0)));
        assert!(!sh.contains(&PlaneEnd::Infinity));
        let wider = shadow(&v, &p, 1.5).unwrap();
        for k in 0..200 {
            let e = PlaneEnd::Finite(-10.0 + 0.1 * k as f64);
            assert!(!sh.contains(&e) || wider.contains(&e));
        }
    }

    #[test]
    fn centre_measure_is_normalised_and_roughly_uniform() {
        let atoms = orbit_atoms(&modular_base(), 9.0);
        let set = LimitSettings::for_atoms(&atoms);
        let m = limit_cell_masses(&atoms, &modular_base(), 16, &set).unwrap();
        assert_abs_diff_eq!(m.iter().sum::<f64>(), 1.0, epsilon = 1e-6);
        for v in &m {
            assert!((v * 16.0 - 1.0).abs() < 0.25, "{m:?}");
        }
    }

    #[test]
    fn conformal_defect_is_small() {
        let atoms = orbit_atoms(&modular_base(), 10.0);
        let set = LimitSettings::for_atoms(&atoms);
        let q = PlanePoint::new(0.4, 1.1).unwrap();
        let r = conformal_check(&atoms, &modular_base(), &q, 64, &set).unwrap();
        assert_eq!(r.empty_cells, 0);
        assert!(r.max_defect < 0.15, "{r:?}");
    }

    #[test]
    fn rectangle_integral_matches_quadrature() {
        let (a0, a1, b0, b1) = (0.3, 0.5, 1.1, 1.4);
        let n = 400;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                let t = a0 + (i as f64 + 0.5) * (a1 - a0) / n as f64;
                let f = b0 + (j as f64 + 0.5) * (b1 - b0) / n as f64;
                q += 1.0 / ((t - f) / 2.0).sin().powi(2);
            }
        }
        q *= (a1 - a0) * (b1 - b0) / (n * n) as f64;
        assert_abs_diff_eq!(csc2_rectangle(a0, a1, b0, b1), q, epsilon = 1e-5 * q);
        // wrapped representation of the same arcs
        assert_abs_diff_eq!(csc2_rectangle(a0 + TAU, a1 + TAU, b0, b1), q, epsilon = 1e-5 * q);
    }

    #[test]
    fn identity_pair_defect_is_zero() {
        let atoms = orbit_atoms(&modular_base(), 8.0);
        let set = LimitSettings::for_atoms(&atoms);
        let pm = PairMeasure::build(&atoms, 32, 4, &set, 1e6).unwrap();
        let r = pair_invariance_check(&pm, &atoms.centre, &Mobius::IDENTITY);
        assert!(r.max_relative_defect < 1e-9, "{r:?}");
        assert_eq!(pm.weight(3, 9).unwrap(), pm.weight(9, 3).unwrap());
    }
}

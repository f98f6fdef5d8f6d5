//! Poincaré series, Patterson–Sullivan measures and their checks.

pub mod equidist;
pub mod plane;
pub mod tree;
pub mod validators;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::fuchsian::{self, IntMat};
use crate::group::Group;
use crate::plane::PlanePoint;
use crate::space::SpacePoint;

/// Critical exponent of the group: `log(2k - 1)` for a free group, `1` for a
/// lattice in the hyperbolic plane, `0` for ℤ².
pub fn critical_exponent(group: &Group) -> f64 {
    match group {
        Group::Free { rank } => ((2 * rank - 1) as f64).ln(),
        Group::Fuchsian(_) => 1.0,
        Group::Lattice => 0.0,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareSum {
    pub s: f64,
    pub cap: f64,
    /// Sum over orbit points within distance `cap`.
    pub partial: f64,
    /// Bound on the omitted part of the series.
    pub tail_bound: f64,
    /// False when the tail bound rests on a growth constant measured from
    /// the enumeration rather than proven.
    pub tail_rigorous: bool,
    pub closed_form: Option<f64>,
}

/// Distances `d(p, γ q)` for orbit points within `cap` of `p`, unsorted.
fn plane_orbit_distances(group: &Group, p: &PlanePoint, q: &PlanePoint, cap: f64) -> Result<Vec<f64>> {
    let reach = cap + p.dist(q);
    let pts: Vec<PlanePoint> = match group {
        Group::Fuchsian(g) if g.name == "modular" => {
            fuchsian::lattice_ball(q, reach).into_iter().map(|(m, _)| m.to_mobius().apply(q)).collect()
        }
        Group::Fuchsian(g) => {
            let ball = fuchsian::group_ball(g, q, reach, 14)?;
            if !ball.complete {
                return Err(GeomError::Incomplete(format!("orbit ball of radius {reach} not certified complete")));
            }
            ball.elements.iter().map(|m| m.apply(q)).collect()
        }
        _ => unreachable!(),
    };
    Ok(pts.iter().map(|z| p.dist(z)).filter(|d| *d <= cap).collect())
}

/// `Σ_{d(p, γq) <= cap} e^{-s d(p, γ q)}` with a tail bound.
pub fn poincare_series(group: &Group, s: f64, p: &SpacePoint, q: &SpacePoint, cap: f64) -> Result<PoincareSum> {
    let h = critical_exponent(group);
    if s <= h {
        return Err(GeomError::Divergent { s, h });
    }
    if !(cap >= 0.0) {
        return Err(GeomError::Precondition("cap must be non-negative".into()));
    }
    match (group, p, q) {
        (Group::Free { rank }, SpacePoint::Tree(_), SpacePoint::Tree(_)) => {
            // the orbit of q is every vertex, so distances from p follow the sphere sizes
            let n = cap.floor() as usize;
            let qb = (2 * rank - 1) as f64;
            let x = (-s).exp();
            let c2 = 2.0 * *rank as f64 / qb;
            let partial: f64 = 1.0 + (1..=n).map(|k| c2 * (qb * x).powi(k as i32)).sum::<f64>();
            let r = (-(s - h)).exp();
            let tail_bound = c2 * r.powi(n as i32 + 1) / (1.0 - r);
            Ok(PoincareSum {
                s,
                cap,
                partial,
                tail_bound,
                tail_rigorous: true,
                closed_form: Some(tree::series_closed_form(*rank, s)),
            })
        }
        (Group::Fuchsian(_), SpacePoint::Plane(a), SpacePoint::Plane(b)) => {
            let mut ds = plane_orbit_distances(group, a, b, cap)?;
            ds.sort_by(f64::total_cmp);
            let partial: f64 = ds.iter().map(|d| (-s * d).exp()).sum();
            // growth constant sup N(r) e^{-hr} over the outer half of the ball
            let c2 = ds
                .iter()
                .enumerate()
                .filter(|(_, d)| **d >= cap / 2.0)
                .map(|(i, d)| (i + 1) as f64 * (-h * d).exp())
                .fold(0.0, f64::max);
            let tail_bound = c2 * s / (s - h) * (-(s - h) * cap).exp();
            Ok(PoincareSum { s, cap, partial, tail_bound, tail_rigorous: false, closed_form: None })
        }
        (Group::Lattice, SpacePoint::Flat(a), SpacePoint::Flat(b)) => {
            let r = cap + 2.0;
            let (ox, oy) = (b.x - a.x, b.y - a.y);
            let mut partial = 0.0;
            let n = r.ceil() as i64 + 1;
            for i in -n..=n {
                for j in -n..=n {
                    let d = ((ox + i as f64).powi(2) + (oy + j as f64).powi(2)).sqrt();
                    if d <= cap {
                        partial += (-s * d).exp();
                    }
                }
            }
            // N(r) <= π (r + 2)^2, integrated by parts against e^{-sr}
            let tail_bound =
                std::f64::consts::PI * (-s * cap).exp() * ((cap + 2.0).powi(2) + 2.0 * (cap + 2.0) / s + 2.0 / (s * s));
            Ok(PoincareSum { s, cap, partial, tail_bound, tail_rigorous: true, closed_form: None })
        }
        _ => Err(GeomError::BackendMismatch(group.backend().name(), p.backend().name())),
    }
}

/// Finite atomic approximation of `ν_{p,x,s}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub base: SpacePoint,
    pub reference: SpacePoint,
    pub s: f64,
    pub cap: f64,
    pub atoms: Vec<(SpacePoint, f64)>,
    /// `P(s, x, x)` used to normalise.
    pub normaliser: f64,
    /// Bound on the mass carried by omitted atoms.
    pub tail_bound: f64,
}

impl AtomicMeasure {
    pub fn total_mass(&self) -> f64 {
        crate::stats::compensated_sum(self.atoms.iter().map(|(_, w)| *w))
    }
}

/// Atoms `e^{-s d(p, γx)} / P(s, x, x)` at every orbit point `γ x` within
/// `cap` of `p`.
pub fn ps_measure(group: &Group, p: &SpacePoint, x: &SpacePoint, s: f64, cap: f64) -> Result<AtomicMeasure> {
    let norm = poincare_series(group, s, x, x, cap)?;
    let num = poincare_series(group, s, p, x, cap)?;
    let normaliser = norm.closed_form.unwrap_or(norm.partial);
    let atoms: Vec<(SpacePoint, f64)> = match (group, p, x) {
        (Group::Free { rank }, SpacePoint::Tree(pw), SpacePoint::Tree(_)) => {
            let n = cap.floor() as usize;
            if crate::tree::ball_size(*rank, n) > 20_000_000 {
                return Err(GeomError::Precondition(format!("ball of radius {n} too large to list as atoms")));
            }
            crate::tree::ball_enumerate(*rank, n)
                .map(|g| {
                    let d = g.len() as f64;
                    (SpacePoint::Tree(pw.mul(&g)), (-s * d).exp() / normaliser)
                })
                .collect()
        }
        (Group::Fuchsian(g), SpacePoint::Plane(a), SpacePoint::Plane(b)) => {
            let reach = cap + a.dist(b);
            let mats: Vec<crate::plane::Mobius> = if g.name == "modular" {
                fuchsian::lattice_ball(b, reach).into_iter().map(|(m, _)| m.to_mobius()).collect()
            } else {
                fuchsian::group_ball(g, b, reach, 14)?.elements
            };
            mats.iter()
                .map(|m| m.apply(b))
                .filter_map(|z| {
                    let d = a.dist(&z);
                    (d <= cap).then(|| (SpacePoint::Plane(z), (-s * d).exp() / normaliser))
                })
                .collect()
        }
        (Group::Lattice, SpacePoint::Flat(a), SpacePoint::Flat(b)) => {
            let n = cap.ceil() as i64 + 1;
            let mut out = Vec::new();
            for i in -n..=n {
                for j in -n..=n {
                    let z = b.translate((i, j));
                    let d = a.dist(&z);
                    if d <= cap {
                        out.push((SpacePoint::Flat(z), (-s * d).exp() / normaliser));
                    }
                }
            }
            out
        }
        _ => return Err(GeomError::BackendMismatch(group.backend().name(), p.backend().name())),
    };
    Ok(AtomicMeasure {
        base: p.clone(),
        reference: x.clone(),
        s,
        cap,
        atoms,
        normaliser,
        tail_bound: num.tail_bound / normaliser,
    })
}

/// Whether the total mass respects `e^{-s d(p,x)} <= ‖ν‖ <= e^{s d(p,x)}`
/// once the omitted tail is allowed for.
pub fn mass_within_bounds(m: &AtomicMeasure, d_px: f64) -> (bool, f64, f64) {
    let total = m.total_mass();
    let lo = (-m.s * d_px).exp();
    let hi = (m.s * d_px).exp();
    (total + m.tail_bound >= lo * (1.0 - 1e-12) && total <= hi * (1.0 + 1e-12), lo, hi)
}

pub(crate) fn modular_orbit(x0: &PlanePoint, radius: f64) -> Vec<(IntMat, PlanePoint, f64)> {
    fuchsian::lattice_ball(x0, radius).into_iter().map(|(m, d)| (m, m.to_mobius().apply(x0), d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::modular_base;
    use crate::flat::FlatPoint;
    use crate::tree::Word;
    use approx::assert_abs_diff_eq;

    fn e() -> SpacePoint {
        SpacePoint::Tree(Word::identity())
    }

    #[test]
    fn tree_series_agrees_with_closed_form() {
        let g = Group::Free { rank: 2 };
        let s = 6f64.ln();
        let r = poincare_series(&g, s, &e(), &e(), 30.0).unwrap();
        assert_abs_diff_eq!(r.closed_form.unwrap(), 7.0 / 3.0, epsilon = 1e-12);
        assert!(r.tail_bound < 1e-8);
        assert!((r.closed_form.unwrap() - r.partial).abs() <= r.tail_bound * (1.0 + 1e-9) + 1e-14);
        assert!(matches!(poincare_series(&g, 3f64.ln(), &e(), &e(), 10.0), Err(GeomError::Divergent { .. })));
    }

    #[test]
    fn tree_measure_atoms() {
        let g = Group::Free { rank: 2 };
        let m = ps_measure(&g, &e(), &e(), 6f64.ln(), 8.0).unwrap();
        let (_, w0) = &m.atoms[0];
        assert_abs_diff_eq!(*w0, 3.0 / 7.0, epsilon = 1e-12);
        assert!((m.total_mass() - 1.0).abs() <= m.tail_bound + 1e-12);
        let a = SpacePoint::Tree(Word::parse("ab", 2).unwrap());
        let m = ps_measure(&g, &a, &e(), 1.5, 10.0).unwrap();
        assert!(mass_within_bounds(&m, 2.0).0);
    }

    #[test]
    fn modular_measure_mass() {
        let g = Group::modular();
        let x = SpacePoint::Plane(modular_base());
        let m = ps_measure(&g, &x, &x, 1.2, 8.0).unwrap();
        assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-9);
        let p = SpacePoint::Plane(PlanePoint::new(0.3, 1.5).unwrap());
        let m = ps_measure(&g, &p, &x, 1.2, 8.0).unwrap();
        let d = modular_base().dist(&PlanePoint::new(0.3, 1.5).unwrap());
        assert!(mass_within_bounds(&m, d).0);
    }

    #[test]
    fn flat_series_tail_is_honest() {
        let g = Group::Lattice;
        let o = SpacePoint::Flat(FlatPoint::new(0.0, 0.0));
        let near = poincare_series(&g, 1.0, &o, &o, 10.0).unwrap();
        let far = poincare_series(&g, 1.0, &o, &o, 40.0).unwrap();
        assert!(far.partial - near.partial <= near.tail_bound);
        assert!(far.tail_bound < near.tail_bound);
    }
}

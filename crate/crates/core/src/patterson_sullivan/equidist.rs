//! Closed-geodesic equidistribution on the modular surface.
//!
//! Each primitive class is lifted to its axis, sampled over one period,
//! folded into the standard fundamental domain together with its tangent
//! direction, and binned. The length-weighted average over classes of
//! length at most `T` is compared with the Liouville measure.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::fuchsian::{self, ConjClass};

/// Height splitting the fundamental domain into two halves of equal area.
pub const SPLIT_HEIGHT: f64 = 6.0 / PI;

/// Indicator of a box in (x, y, tangent angle) over the fundamental domain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Observable {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub angle: (f64, f64),
}

impl Observable {
    pub fn contains(&self, z: Complex64, theta: f64) -> bool {
        let a = theta.rem_euclid(TAU);
        z.re >= self.x.0 && z.re < self.x.1 && z.im >= self.y.0 && z.im < self.y.1 && a >= self.angle.0 && a < self.angle.1
    }

    /// Liouville mass, normalised to 1 on the whole unit tangent bundle.
    pub fn liouville(&self) -> f64 {
        domain_area(self.x, self.y) / (PI / 3.0) * ((self.angle.1.min(TAU) - self.angle.0.max(0.0)).max(0.0) / TAU)
    }
}

/// `∫∫ dx dy / y²` over the part of the fundamental domain inside the box.
pub fn domain_area(xr: (f64, f64), yr: (f64, f64)) -> f64 {
    let (x0, x1) = (xr.0.max(-0.5), xr.1.min(0.5));
    if x1 <= x0 {
        return 0.0;
    }
    // for fixed x the domain starts at sqrt(1 - x²); integrate 1/max(floor, y0) - 1/y1 in x
    let inner = |x: f64| -> f64 {
        let floor = (1.0 - x * x).sqrt();
        let lo = floor.max(yr.0);
        if yr.1 <= lo {
            0.0
        } else if yr.1.is_infinite() {
            1.0 / lo
        } else {
            1.0 / lo - 1.0 / yr.1
        }
    };
    // composite Simpson; the integrand is smooth on the x-range
    let n = 2000;
    let h = (x1 - x0) / n as f64;
    let mut acc = inner(x0) + inner(x1);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * inner(x0 + i as f64 * h);
    }
    acc * h / 3.0
}

/// The 16 cells: sign of x, y below or above the area-halving height, and
/// four tangent-angle quadrants.
pub fn standard_cells() -> Vec<Observable> {
    let mut out = Vec::with_capacity(16);
    for xs in [(-0.5, 0.0), (0.0, 0.5 + 1e-12)] {
        for ys in [(0.0, SPLIT_HEIGHT), (SPLIT_HEIGHT, f64::INFINITY)] {
            for k in 0..4 {
                out.push(Observable { x: xs, y: ys, angle: (k as f64 * FRAC_PI_2, (k + 1) as f64 * FRAC_PI_2) });
            }
        }
    }
    out
}

/// Angle sectors of width `2π / n` over the whole domain.
pub fn angle_sectors(n: usize) -> Vec<Observable> {
    (0..n)
        .map(|k| Observable {
            x: (-0.5, 0.5 + 1e-12),
            y: (0.0, f64::INFINITY),
            angle: (k as f64 * TAU / n as f64, (k + 1) as f64 * TAU / n as f64),
        })
        .collect()
}

/// Moves `(z, θ)` into `|Re z| <= 1/2, |z| >= 1` by translations and
/// `z ↦ -1/z`, carrying the tangent angle along.
pub fn fold(mut z: Complex64, mut theta: f64) -> (Complex64, f64) {
    for _ in 0..10_000 {
        let k = z.re.round();
        z.re -= k;
        if z.norm_sqr() < 1.0 - 1e-13 {
            // derivative of -1/z is 1/z², turning tangents by -2 arg z
            theta -= 2.0 * z.arg();
            z = -1.0 / z;
        } else {
            break;
        }
    }
    (z, theta.rem_euclid(TAU))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquidistRow {
    pub observable: Observable,
    pub measured: f64,
    pub reference: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquidistReport {
    pub t: f64,
    pub classes: usize,
    pub total_length: f64,
    pub rows: Vec<EquidistRow>,
}

impl EquidistReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap.abs()).fold(0.0, f64::max)
    }
}

/// Time each observable's box receives along one period of the class.
fn class_occupation(c: &ConjClass, observables: &[Observable], step: f64) -> Result<(f64, Vec<f64>)> {
    let (geo, period) = fuchsian::closed_geodesic(&c.matrix.to_mobius())?;
    let n = (period / step).ceil().max(1.0) as usize;
    let dt = period / n as f64;
    let mut occ = vec![0.0; observables.len()];
    for k in 0..n {
        let t = (k as f64 + 0.5) * dt;
        let z = geo.point_unchecked(t).to_complex();
        let (w, th) = fold(z, geo.tangent_angle(t));
        for (o, obs) in occ.iter_mut().zip(observables) {
            if obs.contains(w, th) {
                *o += dt;
            }
        }
    }
    Ok((period, occ))
}

/// `∫ f dμ_T` for every observable, with `μ_T` the length-weighted average
/// of the classes of length at most `t`, normalised to mass 1.
pub fn equidistribution_test(t: f64, observables: &[Observable], step: f64) -> Result<EquidistReport> {
    if !(step > 0.0) {
        return Err(GeomError::Precondition("sampling step must be positive".into()));
    }
    let classes = fuchsian::enumerate_conj_classes_modular(t);
    if classes.is_empty() {
        return Err(GeomError::Incomplete(format!("no closed geodesics of length <= {t}")));
    }
    let per_class: Vec<(f64, Vec<f64>)> =
        classes.par_iter().map(|c| class_occupation(c, observables, step)).collect::<Result<Vec<_>>>()?;
    let total_length: f64 = per_class.iter().map(|(l, _)| l).sum();
    let mut sums = vec![0.0; observables.len()];
    for (_, occ) in &per_class {
        for (s, o) in sums.iter_mut().zip(occ) {
            *s += o;
        }
    }
    let rows = observables
        .iter()
        .zip(sums)
        .map(|(obs, s)| {
            let measured = s / total_length;
            let reference = obs.liouville();
            EquidistRow { observable: *obs, measured, reference, gap: measured - reference }
        })
        .collect();
    Ok(EquidistReport { t, classes: classes.len(), total_length, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn liouville_cells_are_sixteenths() {
        // oracle: crude 2-d midpoint quadrature of dx dy / y² over the domain
        let mut lower = 0.0;
        let (nx, ny) = (400, 4000);
        for i in 0..nx {
            let x = -0.5 + (i as f64 + 0.5) / nx as f64;
            let floor = (1.0 - x * x).sqrt();
            let dy = (SPLIT_HEIGHT - floor) / ny as f64;
            for j in 0..ny {
                let y = floor + (j as f64 + 0.5) * dy;
                lower += dy / (y * y) / nx as f64;
            }
        }
        assert_abs_diff_eq!(lower, PI / 6.0, epsilon = 1e-5);
        for c in standard_cells() {
            assert_abs_diff_eq!(c.liouville(), 1.0 / 16.0, epsilon = 1e-9);
        }
        let total: f64 = angle_sectors(8).iter().map(Observable::liouville).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fold_lands_in_domain() {
        for (x, y, th) in [(3.7, 0.01, 0.3), (-12.2, 0.3, 2.0), (0.1, 0.5, 4.0)] {
            let (w, _) = fold(Complex64::new(x, y), th);
            assert!(w.re.abs() <= 0.5 + 1e-12 && w.norm() >= 1.0 - 1e-12, "{w}");
        }
    }

    #[test]
    fn fold_preserves_angle_under_translation() {
        let (_, a) = fold(Complex64::new(5.2, 3.0), 1.0);
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        // z = 0.5i maps to 2i with the tangent turned by -π
        let (w, a) = fold(Complex64::new(0.0, 0.5), 0.0);
        assert_abs_diff_eq!(w.im, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a, PI, epsilon = 1e-12);
    }

    #[test]
    fn constant_observable_has_mass_one() {
        let all = [Observable { x: (-0.5, 0.5 + 1e-12), y: (0.0, f64::INFINITY), angle: (0.0, TAU) }];
        let r = equidistribution_test(5.0, &all, 0.01).unwrap();
        assert_abs_diff_eq!(r.rows[0].measured, 1.0, epsilon = 1e-9);
        let sectors = equidistribution_test(6.0, &angle_sectors(8), 0.01).unwrap();
        assert_abs_diff_eq!(sectors.rows.iter().map(|r| r.measured).sum::<f64>(), 1.0, epsilon = 1e-9);
    }
}

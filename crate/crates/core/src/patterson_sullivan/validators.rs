//! Mass and cardinality checks for the flow-space sets
//! `D(x, R', R)`: vectors based within `R'` of the root whose forward
//! geodesic enters `B(x, R)` at some positive time. Tree backend only.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::tree::limit_cylinder_mass;
use crate::error::{GeomError, Result};
use crate::tree::{Letter, Rational, Word};

/// One side of a line leaving the meeting vertex: a set of ends given as a
/// cylinder difference, and where `x` projects if the end lies in it.
struct Side {
    mass: Rational,
    /// `(depth along this side where x leaves the line, x's distance to the line)`
    projection: Option<(usize, usize)>,
}

fn side_categories(rank: usize, w: &Word, alpha: Letter, x: &Word) -> Result<Vec<Side>> {
    let e = Word::identity();
    let k = w.len();
    let a = w.push(alpha);
    if !x.starts_with(&a) {
        return Ok(vec![Side { mass: limit_cylinder_mass(rank, &e, &a)?, projection: None }]);
    }
    let mut out = Vec::new();
    for i in k + 1..=x.len() {
        let here = limit_cylinder_mass(rank, &e, &x.prefix(i))?;
        let mass = if i < x.len() { here - limit_cylinder_mass(rank, &e, &x.prefix(i + 1))? } else { here };
        out.push(Side { mass, projection: Some((i - k, x.len() - i)) });
    }
    Ok(out)
}

fn continuations(rank: usize, w: &Word) -> Vec<Letter> {
    Letter::all(rank).filter(|l| w.last().map_or(true, |t| t.inverse() != *l)).collect()
}

/// `μ̃(D(x, R', R))` around the root, summed exactly over meeting vertices,
/// branch pairs and the depth at which each end leaves the path to `x`.
pub fn d_mass(rank: usize, x: &Word, r_prime: f64, r: f64) -> Result<f64> {
    if (x.len() as f64) <= r {
        return Err(GeomError::Precondition(format!("need d(p, x) > R, got d = {} and R = {r}", x.len())));
    }
    if !(r_prime > 0.0) {
        return Err(GeomError::Precondition("R' must be positive".into()));
    }
    let q = (2 * rank - 1) as i128;
    let mut total = 0.0;
    let k_max = (r_prime.ceil() as usize).saturating_sub(1);
    for k in 0..=k_max {
        let half = r_prime - k as f64;
        if half <= 0.0 {
            continue;
        }
        let density = Rational::from_integer(q.pow(2 * k as u32));
        for w in crate::tree::ball_enumerate(rank, k).filter(|w| w.len() == k) {
            let letters = continuations(rank, &w);
            for &alpha in &letters {
                let back = side_categories(rank, &w, alpha, x)?;
                for &beta in &letters {
                    if alpha == beta {
                        continue;
                    }
                    let fwd = side_categories(rank, &w, beta, x)?;
                    for sb in &back {
                        for sf in &fwd {
                            let (t_proj, dist) = match (sb.projection, sf.projection) {
                                (Some((j, d)), None) => (-(j as f64), d as f64),
                                (None, Some((j, d))) => (j as f64, d as f64),
                                (None, None) => (0.0, w.dist(x) as f64),
                                (Some(_), Some(_)) => unreachable!("x cannot leave along both sides"),
                            };
                            if dist >= r {
                                continue;
                            }
                            let sup = t_proj + (r - dist);
                            let leb = (sup.min(half) + half).max(0.0);
                            if leb > 0.0 {
                                total += (density * sb.mass * sf.mass).to_f64().unwrap() * leb;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DMassRow {
    pub x: String,
    pub distance: usize,
    pub mass: f64,
    /// `mass · e^{h d(p, x)}`.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DMassReport {
    pub r_prime: f64,
    pub r: f64,
    pub rows: Vec<DMassRow>,
    /// Infimum of the scaled masses over the family.
    pub c_prime: f64,
    /// Largest over smallest scaled mass.
    pub spread: f64,
}

pub fn validate_d_mass(rank: usize, xs: &[Word], r_prime: f64, r: f64) -> Result<DMassReport> {
    if xs.len() < 2 {
        return Err(GeomError::Precondition("family too small: need at least two points".into()));
    }
    let q = (2 * rank - 1) as f64;
    let rows = xs
        .iter()
        .map(|x| {
            let mass = d_mass(rank, x, r_prime, r)?;
            Ok(DMassRow { x: x.to_string(), distance: x.len(), mass, scaled: mass * q.powi(x.len() as i32) })
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    Ok(DMassReport { r_prime, r, rows, c_prime: lo, spread: hi / lo })
}

/// A flow vector restricted to times `[0, n]`: its base vertex and the
/// vertices it passes at integer times.
type Window = Vec<Word>;

fn enumerate_windows(rank: usize, x: &Word, n: usize, r_prime: f64, r: f64, budget: usize) -> Result<(Vec<Window>, bool)> {
    let mut out = Vec::new();
    let mut complete = true;
    let bases: Vec<Word> = crate::tree::ball_enumerate(rank, (r_prime.ceil() as usize).saturating_sub(1))
        .filter(|b| (b.len() as f64) < r_prime)
        .collect();
    for b in bases {
        let mut stack: Vec<(Window, Option<Letter>, bool)> = vec![(vec![b.clone()], None, (b.dist(x) as f64) < r)];
        while let Some((path, last, hit)) = stack.pop() {
            let y = path.last().unwrap().clone();
            if path.len() == n + 1 {
                // the ray can still reach x unless x lies behind the last step
                let toward_x = y.inverse().mul(x).first();
                let ahead = match (toward_x, last) {
                    (None, _) => true,
                    (Some(l), Some(prev)) => l != prev.inverse(),
                    (Some(_), None) => true,
                };
                if hit || ahead {
                    out.push(path);
                    if out.len() > budget {
                        complete = false;
                        return Ok((out, complete));
                    }
                }
                continue;
            }
            for l in Letter::all(rank).collect::<Vec<_>>().into_iter().rev() {
                if last.map_or(false, |p| p.inverse() == l) {
                    continue;
                }
                let z = y.mul(&Word::identity().push(l));
                let hit_now = hit || (z.dist(x) as f64) < r;
                // prune paths that turned away from x without meeting the ball
                if !hit_now {
                    let toward = y.inverse().mul(x).first();
                    if toward.is_some_and(|t| t != l) {
                        continue;
                    }
                }
                let mut next = path.clone();
                next.push(z);
                stack.push((next, Some(l), hit_now));
            }
        }
    }
    Ok((out, complete))
}

fn dn(a: &Window, b: &Window) -> u64 {
    // distance between two geodesics is convex in time, so integer times suffice
    a.iter().zip(b).map(|(u, v)| u.dist(v)).max().unwrap_or(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatedReport {
    pub n: usize,
    pub windows: usize,
    pub cardinality: usize,
    /// False when the window budget ran out before enumeration finished.
    pub maximal: bool,
}

/// Greedy maximal `(d_n, 2r₀)`-separated subset of `D(x, R', R)`, with
/// `r₀ = 4δ + 3ρ` and `δ = 0` on the tree.
pub fn validate_separated_bound(rank: usize, x: &Word, n: usize, rho: f64, r_prime: f64, r: f64) -> Result<SeparatedReport> {
    if (x.len() as f64) < n as f64 + r + r_prime {
        return Err(GeomError::Precondition(format!("need d(x, p) >= n + R + R' = {}, got {}", n as f64 + r + r_prime, x.len())));
    }
    let r0 = 3.0 * rho;
    let (windows, maximal) = enumerate_windows(rank, x, n, r_prime, r, 2_000_000)?;
    let mut kept: Vec<&Window> = Vec::new();
    for w in &windows {
        if kept.iter().all(|k| dn(k, w) as f64 > 2.0 * r0) {
            kept.push(w);
        }
    }
    Ok(SeparatedReport { n, windows: windows.len(), cardinality: kept.len(), maximal })
}

//! Exact Patterson–Sullivan quantities for a free group on its Cayley tree.
//!
//! With `q = 2k - 1` and `x = e^{-s}` every orbit sum over a cylinder is a
//! rational function of `x` with a simple pole at `x = 1/q`, so limits as
//! `s ↓ log q` are ratios of residues and come out as exact rationals.

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::tree::{self, Letter, Rational, TreeEnd, Word};

fn branching(rank: usize) -> i128 {
    2 * rank as i128 - 1
}

fn rat_pow(q: i128, e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(q.pow(e as u32))
    } else {
        Rational::new(1, q.pow((-e) as u32))
    }
}

fn check_rank(rank: usize) -> Result<()> {
    if rank < 2 {
        return Err(GeomError::Precondition(format!("free group rank must be >= 2, got {rank}")));
    }
    Ok(())
}

/// `Σ_γ e^{-s d(p, γ q)} = 1 + 2k x / (1 - q x)`, for any pair of vertices.
pub fn series_closed_form(rank: usize, s: f64) -> f64 {
    let q = branching(rank) as f64;
    let x = (-s).exp();
    1.0 + 2.0 * rank as f64 * x / (1.0 - q * x)
}

/// Orbit sum over the vertices inside cylinder `u` seen from `p`, split as
/// `(regular part, coefficient of 1/(1 - q x))`.
fn cylinder_sum_parts(rank: usize, p: &Word, u: &Word, x: f64) -> (f64, f64) {
    let q = branching(rank) as f64;
    let m = p.lcp(u);
    if m < u.len() {
        let d = p.dist(u) as i32;
        return (0.0, x.powi(d));
    }
    // u is a prefix of p: the p-subtree plus the side branches hanging off
    // the path from u to p
    let (pl, ul) = (p.len(), u.len());
    let mut regular = 1.0;
    let mut polar = q * x;
    for i in ul..pl {
        let j = (pl - i) as i32;
        regular += x.powi(j);
        polar += (q - 1.0) * x.powi(j + 1);
    }
    (regular, polar)
}

/// Mass that `ν_{p,x,s}` gives to the cylinder `C_u`, from the full series.
pub fn cylinder_mass_at(rank: usize, p: &Word, u: &Word, s: f64) -> Result<f64> {
    check_rank(rank)?;
    let h = (branching(rank) as f64).ln();
    if s <= h {
        return Err(GeomError::Divergent { s, h });
    }
    if u.is_empty() {
        return Err(GeomError::Precondition("cylinder prefix must be non-empty".into()));
    }
    let q = branching(rank) as f64;
    let x = (-s).exp();
    let (reg, pol) = cylinder_sum_parts(rank, p, u, x);
    Ok((reg + pol / (1.0 - q * x)) / series_closed_form(rank, s))
}

/// `ν_p(C_u)` for the limit measure, as a ratio of residues at `x = 1/q`.
pub fn limit_cylinder_mass(rank: usize, p: &Word, u: &Word) -> Result<Rational> {
    check_rank(rank)?;
    if u.is_empty() {
        return limit_total_mass(rank, p);
    }
    let q = branching(rank);
    let res_p = Rational::new(2 * rank as i128, q);
    let m = p.lcp(u);
    let num = if m < u.len() {
        rat_pow(q, -(p.dist(u) as i64))
    } else {
        let (pl, ul) = (p.len(), u.len());
        let mut acc = Rational::one();
        for i in ul..pl {
            acc += Rational::from_integer(q - 1) * rat_pow(q, -((pl - i + 1) as i64));
        }
        acc
    };
    Ok(num / res_p)
}

pub fn limit_total_mass(rank: usize, p: &Word) -> Result<Rational> {
    let mut acc = Rational::zero();
    for l in Letter::all(rank) {
        acc += limit_cylinder_mass(rank, p, &Word::identity().push(l))?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// Change against the next-lower extrapolation order.
    pub err: f64,
    /// Residue value where a closed form exists.
    pub exact: Option<f64>,
}

/// Extrapolates `ν_{p,x,s}(C_u)` over `s_grid` to `s = log q`.
pub fn ps_limit_cylinder(rank: usize, p: &Word, u: &Word, s_grid: &[f64]) -> Result<LimitEstimate> {
    let h = (branching(rank) as f64).ln();
    let eps: Vec<f64> = s_grid.iter().map(|s| s - h).collect();
    let vals = s_grid.iter().map(|&s| cylinder_mass_at(rank, p, u, s)).collect::<Result<Vec<f64>>>()?;
    let order = s_grid.len().saturating_sub(2);
    let (value, err) = crate::stats::extrapolate_to_zero(&eps, &vals, order)?;
    let exact = limit_cylinder_mass(rank, p, u)?.to_f64();
    Ok(LimitEstimate { value, err, exact })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConformalReport {
    pub max_defect: f64,
    pub mean_defect: f64,
    pub cells: usize,
    /// Cells dropped for carrying no mass under either measure.
    pub empty_cells: usize,
    /// True when every cell satisfied the identity in exact arithmetic.
    pub exact: bool,
}

/// Checks `ν_q(C) = e^{-h b_p(q, ξ)} ν_p(C)` on every depth-`depth` cylinder
/// for every ordered pair of the given vertices.
pub fn conformal_check(rank: usize, points: &[Word], depth: usize) -> Result<ConformalReport> {
    check_rank(rank)?;
    let longest = points.iter().map(Word::len).max().unwrap_or(0);
    if depth <= longest {
        return Err(GeomError::Precondition(format!(
            "cylinder depth {depth} must exceed the longest base point ({longest}) so the Busemann function is constant on cells"
        )));
    }
    let q = branching(rank);
    let h = (q as f64).ln();
    let cells = tree::cylinders(rank, depth);
    let masses: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| cells.iter().map(|u| limit_cylinder_mass(rank, p, u)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut exact = true;
    let (mut max_defect, mut sum, mut n) = (0.0f64, 0.0, 0usize);
    for (i, p) in points.iter().enumerate() {
        for (j, qv) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            for (c, u) in cells.iter().enumerate() {
                let xi = TreeEnd::continuing(u, rank);
                let b = tree::busemann(qv, p, &xi);
                let (mp, mq) = (masses[i][c], masses[j][c]);
                let holds = mq * rat_pow(q, b) == mp;
                exact &= holds;
                let defect = if holds { 0.0 } else { ((mq / mp).to_f64().unwrap().ln() + h * b as f64).abs() };
                max_defect = max_defect.max(defect);
                sum += defect;
                n += 1;
            }
        }
    }
    Ok(ConformalReport { max_defect, mean_defect: if n > 0 { sum / n as f64 } else { 0.0 }, cells: n, empty_cells: 0, exact })
}

/// Shadow of a ball on the tree boundary: either one cylinder or the
/// complement of one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeShadow {
    Cylinder(Word),
    Complement(Word),
}

impl TreeShadow {
    pub fn contains(&self, xi: &TreeEnd) -> bool {
        match self {
            TreeShadow::Cylinder(w) => xi.in_cylinder(w),
            TreeShadow::Complement(w) => !xi.in_cylinder(w),
        }
    }

    /// Exact `ν_base` mass.
    pub fn mass(&self, rank: usize, base: &Word) -> Result<Rational> {
        match self {
            TreeShadow::Cylinder(w) => limit_cylinder_mass(rank, base, w),
            TreeShadow::Complement(w) => Ok(limit_total_mass(rank, base)? - limit_cylinder_mass(rank, base, w)?),
        }
    }
}

/// Ends whose ray from `viewpoint` meets the open ball `B(centre, rho)`.
pub fn shadow(viewpoint: &Word, centre: &Word, rho: f64) -> Result<TreeShadow> {
    if !(rho > 0.0) {
        return Err(GeomError::Precondition("shadow radius must be positive".into()));
    }
    let d = viewpoint.dist(centre) as f64;
    if d <= rho {
        return Err(GeomError::Precondition(format!("viewpoint lies within the ball (d = {d}, rho = {rho})")));
    }
    // vertices within the open ball along [centre, viewpoint] reach distance r
    let r = (rho.ceil() as usize).saturating_sub(1);
    let m = centre.lcp(viewpoint);
    let up = centre.len() - m;
    if r < up {
        // z sits on the centre's branch; its neighbour toward the viewpoint is its parent
        Ok(TreeShadow::Cylinder(centre.prefix(centre.len() - r)))
    } else {
        let z_len = m + (r - up);
        Ok(TreeShadow::Complement(viewpoint.prefix(z_len + 1)))
    }
}

/// `min` over `viewpoints` of `ν_p(pr_x B(p, rho))`.
pub fn shadow_lower_bound(rank: usize, p: &Word, rho: f64, viewpoints: &[Word]) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for x in viewpoints {
        let m = shadow(x, p, rho)?.mass(rank, p)?;
        best = Some(best.map_or(m, |b| b.min(m)));
    }
    best.ok_or_else(|| GeomError::Precondition("no viewpoints".into()))
}

/// `ν_p(pr_p B(x, rho)) · e^{h d(p, x)}` for each `x`.
pub fn shadow_ratios(rank: usize, p: &Word, rho: f64, xs: &[Word]) -> Result<Vec<f64>> {
    let h = (branching(rank) as f64).ln();
    xs.iter()
        .map(|x| {
            let m = shadow(p, x, rho)?.mass(rank, p)?;
            Ok(m.to_f64().unwrap() * (h * p.dist(x) as f64).exp())
        })
        .collect()
}

/// `μ̄(C_u × C_v) = q^{2 lcp(u, v)} ν(C_u) ν(C_v)` for disjoint cylinders,
/// with `ν = ν_e`.
pub fn pair_mass(rank: usize, u: &Word, v: &Word) -> Result<Rational> {
    let l = u.lcp(v);
    if l == u.len() || l == v.len() {
        return Err(GeomError::Precondition(format!("cylinders {u} and {v} are not disjoint")));
    }
    let e = Word::identity();
    let q = branching(rank);
    Ok(rat_pow(q, 2 * l as i64) * limit_cylinder_mass(rank, &e, u)? * limit_cylinder_mass(rank, &e, v)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairInvarianceReport {
    pub max_relative_defect: f64,
    pub pairs: usize,
    pub exact: bool,
}

/// Compares `μ̄(γA × γB)` with `μ̄(A × B)` over all pairs of distinct
/// depth-`depth` cylinders.
pub fn pair_invariance_check(rank: usize, depth: usize, gamma: &Word) -> Result<PairInvarianceReport> {
    if depth <= gamma.len() {
        return Err(GeomError::Precondition(format!(
            "cylinder depth {depth} must exceed |γ| = {} so images are cylinders",
            gamma.len()
        )));
    }
    let cells = tree::cylinders(rank, depth);
    let images: Vec<Word> = cells.iter().map(|u| gamma.mul(u)).collect();
    let mut exact = true;
    let (mut worst, mut pairs) = (0.0f64, 0usize);
    for i in 0..cells.len() {
        for j in 0..cells.len() {
            if i == j {
                continue;
            }
            let before = pair_mass(rank, &cells[i], &cells[j])?;
            let after = pair_mass(rank, &images[i], &images[j])?;
            exact &= before == after;
            worst = worst.max(((after - before) / before).to_f64().unwrap().abs());
            pairs += 1;
        }
    }
    Ok(PairInvarianceReport { max_relative_defect: worst, pairs, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn closed_form_matches_sphere_sums() {
        let s = 6f64.ln();
        let direct: f64 = (0..38).map(|n| tree::sphere_size(2, n) as f64 * (-s * n as f64).exp()).sum();
        assert_abs_diff_eq!(series_closed_form(2, s), direct, epsilon = 1e-10);
        assert_abs_diff_eq!(series_closed_form(2, s), 7.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn base_cylinder_masses() {
        let e = Word::identity();
        assert_eq!(limit_cylinder_mass(2, &e, &w("a")).unwrap(), Rational::new(1, 4));
        assert_eq!(limit_cylinder_mass(2, &e, &w("ab")).unwrap(), Rational::new(1, 12));
        assert_eq!(limit_total_mass(2, &e).unwrap(), Rational::one());
        assert_eq!(limit_cylinder_mass(2, &w("a"), &w("a")).unwrap(), Rational::new(3, 4));
        assert_eq!(limit_total_mass(3, &e).unwrap(), Rational::one());
    }

    #[test]
    fn cylinder_mass_at_matches_ball_enumeration() {
        // oracle: sum e^{-s d(p, v)} over enumerated vertices v ⊇ u plus the exact geometric tail
        let s: f64 = 2.0;
        let q = 3.0f64;
        let x = (-s).exp();
        for (p, u) in [("", "a"), ("ab", "a"), ("ab", "ab"), ("abA", "a"), ("B", "ab")] {
            let (p, u) = (w(p), w(u));
            let cap = 12;
            let mut num = 0.0;
            let mut shell = vec![0u64; cap + 1];
            for g in tree::ball_enumerate(2, cap) {
                if p.mul(&g).starts_with(&u) {
                    shell[g.len()] += 1;
                }
            }
            for (d, c) in shell.iter().enumerate() {
                num += *c as f64 * x.powi(d as i32);
            }
            // beyond the enumerated ball every shell of the cylinder grows by q
            let last = shell[cap] as f64 * x.powi(cap as i32);
            num += last * (q * x) / (1.0 - q * x);
            let full = num / series_closed_form(2, s);
            assert_abs_diff_eq!(cylinder_mass_at(2, &p, &u, s).unwrap(), full, epsilon = 1e-6);
        }
    }

    #[test]
    fn richardson_reaches_residue() {
        let h = 3f64.ln();
        let grid = [h + 0.4, h + 0.2, h + 0.1, h + 0.05];
        for (p, u) in [("", "a"), ("ab", "a"), ("a", "bA")] {
            let est = ps_limit_cylinder(2, &w(p), &w(u), &grid).unwrap();
            assert!((est.value - est.exact.unwrap()).abs() < 1e-4, "{p} {u}: {est:?}");
        }
        assert!(matches!(cylinder_mass_at(2, &w(""), &w("a"), h), Err(GeomError::Divergent { .. })));
    }

    #[test]
    fn conformality_is_exact() {
        let pts: Vec<Word> = tree::ball_enumerate(2, 2).collect();
        let r = conformal_check(2, &pts, 4).unwrap();
        assert!(r.exact);
        assert_eq!(r.max_defect, 0.0);
        assert!(conformal_check(2, &pts, 2).is_err());
    }

    #[test]
    fn shadow_cases() {
        assert_eq!(shadow(&w("aaaa"), &w(""), 0.5).unwrap(), TreeShadow::Complement(w("a")));
        assert_eq!(shadow(&w(""), &w("aaaa"), 0.5).unwrap(), TreeShadow::Cylinder(w("aaaa")));
        assert_eq!(shadow(&w(""), &w("aaaa"), 2.0).unwrap(), TreeShadow::Cylinder(w("aaa")));
        assert_eq!(shadow(&w("ab"), &w("aB"), 1.5).unwrap(), TreeShadow::Complement(w("ab")));
        assert!(shadow(&w("a"), &w(""), 1.0).is_err());
    }

    fn ray_meets_ball(x: &Word, xi: &TreeEnd, p: &Word, rho: f64) -> bool {
        // walk the ray from x toward xi vertex by vertex
        let m = xi.lcp_word(x);
        let mut path: Vec<Word> = (m..=x.len()).rev().map(|i| x.prefix(i)).collect();
        for i in m + 1..m + x.len() + p.len() + 8 {
            path.push(xi.take(i));
        }
        path.iter().any(|v| (v.dist(p) as f64) < rho)
    }

    #[test]
    fn shadows_agree_with_ray_tests() {
        let cells = tree::cylinders(2, 6);
        let cases = [("aab", "", 0.5), ("", "abab", 1.5), ("Ab", "ba", 2.0), ("bb", "BBa", 3.5)];
        for (x, p, rho) in cases {
            let sh = shadow(&w(x), &w(p), rho).unwrap();
            for u in &cells {
                let xi = TreeEnd::continuing(u, 2);
                assert_eq!(sh.contains(&xi), ray_meets_ball(&w(x), &xi, &w(p), rho), "{x} {p} {rho} {u}");
            }
        }
    }

    #[test]
    fn shadow_ratio_family_is_constant() {
        let xs: Vec<Word> = (2..=8).map(|n| w("b").mul(&w("a").pow(n))).collect();
        let r = shadow_ratios(2, &Word::identity(), 0.5, &xs).unwrap();
        for v in &r {
            assert_abs_diff_eq!(*v, 0.75, epsilon = 1e-9);
        }
        let views: Vec<Word> = tree::ball_enumerate(2, 5).filter(|v| !v.is_empty()).collect();
        assert_eq!(shadow_lower_bound(2, &Word::identity(), 0.5, &views).unwrap(), Rational::new(3, 4));
    }

    #[test]
    fn pair_measure_is_invariant() {
        let r = pair_invariance_check(2, 4, &w("a")).unwrap();
        assert!(r.exact);
        assert_eq!(r.pairs, 108 * 107);
        let r = pair_invariance_check(2, 4, &w("bA")).unwrap();
        assert!(r.exact);
        assert_eq!(pair_mass(2, &w("ab"), &w("aB")).unwrap(), Rational::new(9, 144));
    }
}

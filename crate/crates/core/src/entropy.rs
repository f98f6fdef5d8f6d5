//! Dynamical metrics along the geodesic flow, spanning counts, topological
//! entropy estimates and expansivity probes.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::flat::{FlatGeodesic, FlatPoint};
use crate::plane::{self, Mobius, PlaneGeodesic, PlanePoint};
use crate::space::{Backend, BoundaryPoint, SpacePoint};
use crate::stats::least_squares;
use crate::tree::{self, is_reduced, Letter, TreeGeodesic, Word};

/// Default number of letters stored on each side of a tree flow point.
pub const DEFAULT_WINDOW: usize = 32;

/// A tree geodesic through `origin` at time 0. The forward and backward
/// letter windows have equal length and continue periodically beyond it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TreeFlow {
    pub rank: usize,
    pub origin: Word,
    forward: Vec<Letter>,
    backward: Vec<Letter>,
}

fn check_letters(rank: usize, letters: &[Letter]) -> Result<()> {
    match letters.iter().find(|l| l.code() >= 2 * rank) {
        Some(l) => Err(GeomError::InvalidLetter(l.to_char(), rank)),
        None => Ok(()),
    }
}

/// Extends `seq` to `window` letters so that the result stays reduced when
/// read cyclically; `avoid` forbids a first letter.
fn pad(rank: usize, seq: &[Letter], window: usize, avoid: Option<Letter>) -> Result<Vec<Letter>> {
    let mut out = seq.to_vec();
    while out.len() < window {
        let i = out.len();
        let prev = out.last().copied();
        let next = Letter::all(rank).find(|l| {
            prev != Some(l.inverse())
                && !(i == 0 && avoid == Some(*l))
                && !(i + 1 == window && i > 0 && *l == out[0].inverse())
        });
        out.push(next.ok_or_else(|| GeomError::Degenerate("no letter continues the window".into()))?);
    }
    if window > 1 && out[window - 1] == out[0].inverse() {
        return Err(GeomError::Unreduced("window does not close up cyclically".into()));
    }
    Ok(out)
}

impl TreeFlow {
    /// Pads the given forward and backward letters to `window` each.
    pub fn new(rank: usize, origin: Word, forward: &[Letter], backward: &[Letter], window: usize) -> Result<Self> {
        if rank == 0 || window == 0 {
            return Err(GeomError::Precondition("rank and window must be positive".into()));
        }
        check_letters(rank, forward)?;
        check_letters(rank, backward)?;
        if forward.len() > window || backward.len() > window {
            return Err(GeomError::Precondition(format!("more letters than the window of {window}")));
        }
        if !is_reduced(forward) || !is_reduced(backward) {
            return Err(GeomError::Unreduced("flow window".into()));
        }
        if let (Some(f), Some(b)) = (forward.first(), backward.first()) {
            if f == b {
                return Err(GeomError::Unreduced("forward and backward leave along the same edge".into()));
            }
        }
        let forward = pad(rank, forward, window, backward.first().copied())?;
        let backward = pad(rank, backward, window, Some(forward[0]))?;
        Ok(TreeFlow { rank, origin, forward, backward })
    }

    /// Samples a tree geodesic on `[-window, window]`; finite headings are
    /// padded.
    pub fn from_geodesic(g: &TreeGeodesic, rank: usize, window: usize) -> Result<Self> {
        let take = |f: &dyn Fn(usize) -> Option<Letter>| -> Vec<Letter> { (0..window).map_while(f).collect() };
        let fwd = take(&|i| g.forward_letter(i));
        let bwd = take(&|i| g.backward_letter(i));
        TreeFlow::new(rank, g.origin.clone(), &fwd, &bwd, window)
    }

    pub fn window(&self) -> usize {
        self.forward.len()
    }

    pub fn forward_letters(&self) -> &[Letter] {
        &self.forward
    }

    pub fn backward_letters(&self) -> &[Letter] {
        &self.backward
    }

    /// Vertex at integer time `t`.
    pub fn position(&self, t: i64) -> Word {
        let seq = if t >= 0 { &self.forward } else { &self.backward };
        let w = seq.len();
        let letters: Vec<Letter> = (0..t.unsigned_abs() as usize).map(|i| seq[i % w]).collect();
        self.origin.mul(&tree::reduce(&letters))
    }

    /// Vertices at the integer times `t0..=t1`.
    fn path(&self, t0: i64, t1: i64) -> Vec<Word> {
        let mut out = Vec::with_capacity((t1 - t0 + 1) as usize);
        let mut cur = self.position(t0);
        out.push(cur.clone());
        for t in t0..t1 {
            let step = if t >= 0 {
                self.forward[t as usize % self.window()]
            } else {
                // walking from time t to t + 1 undoes the backward letter at -t - 1
                self.backward[(-t - 1) as usize % self.window()].inverse()
            };
            cur = cur.push(step);
            out.push(cur.clone());
        }
        out
    }
}

/// A unit tangent vector with its geodesic; the flat position is taken mod ℤ².
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum FlowPoint {
    Tree(TreeFlow),
    Plane { base: PlanePoint, angle: f64 },
    Flat { base: FlatPoint, angle: f64 },
}

impl FlowPoint {
    pub fn flat(x: f64, y: f64, angle: f64) -> FlowPoint {
        FlowPoint::Flat { base: FlatPoint::new(x.rem_euclid(1.0), y.rem_euclid(1.0)), angle: angle.rem_euclid(TAU) }
    }

    pub fn plane(base: PlanePoint, angle: f64) -> FlowPoint {
        FlowPoint::Plane { base, angle: angle.rem_euclid(TAU) }
    }

    pub fn backend(&self) -> Backend {
        match self {
            FlowPoint::Tree(_) => Backend::Tree,
            FlowPoint::Plane { .. } => Backend::Plane,
            FlowPoint::Flat { .. } => Backend::Flat,
        }
    }

    /// Largest `|t|` at which the stored data determines the geodesic.
    pub fn window(&self) -> f64 {
        match self {
            FlowPoint::Tree(f) => f.window() as f64,
            _ => f64::INFINITY,
        }
    }

    pub fn position(&self, t: f64) -> Result<SpacePoint> {
        match self {
            FlowPoint::Tree(f) => {
                if t.fract() != 0.0 {
                    return Err(GeomError::NonIntegerTime(t));
                }
                Ok(SpacePoint::Tree(f.position(t as i64)))
            }
            FlowPoint::Plane { base, angle } => {
                Ok(SpacePoint::Plane(PlaneGeodesic::from_tangent(base, *angle).point_unchecked(t)))
            }
            FlowPoint::Flat { base, angle } => {
                let p = FlatGeodesic::ray(base, *angle).point_unchecked(t);
                Ok(SpacePoint::Flat(FlatPoint::new(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0))))
            }
        }
    }

    fn plane_geodesic(&self) -> Option<PlaneGeodesic> {
        match self {
            FlowPoint::Plane { base, angle } => Some(PlaneGeodesic::from_tangent(base, *angle)),
            _ => None,
        }
    }
}

/// `max_t dist(dp + t du, ℤ²)` over `[t0, t1]`. Inside one Voronoi square the
/// distance to its lattice point is convex along the segment, so the maximum
/// sits at an endpoint or where the segment crosses a half-integer line.
fn torus_segment_max(dp: (f64, f64), du: (f64, f64), t0: f64, t1: f64) -> f64 {
    let at = |t: f64| {
        let x = dp.0 + t * du.0;
        let y = dp.1 + t * du.1;
        (x - x.round()).hypot(y - y.round())
    };
    let mut best = at(t0).max(at(t1));
    for (p, u) in [(dp.0, du.0), (dp.1, du.1)] {
        if u == 0.0 {
            continue;
        }
        let (a, b) = (p + t0 * u, p + t1 * u);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut m = (lo - 0.5).ceil();
        while m + 0.5 <= hi {
            best = best.max(at((m + 0.5 - p) / u));
            m += 1.0;
        }
    }
    best
}

/// `max_{t ∈ [t0, t1]} d(c_v(t), c_w(t))`.
pub fn dyn_metric_on(v: &FlowPoint, w: &FlowPoint, t0: f64, t1: f64) -> Result<f64> {
    if !(t0 <= t1) || !t0.is_finite() || !t1.is_finite() {
        return Err(GeomError::Precondition(format!("bad time window [{t0}, {t1}]")));
    }
    let reach = v.window().min(w.window());
    if t0 < -reach || t1 > reach {
        return Err(GeomError::OutsideDomain { t: if t1 > reach { t1 } else { t0 }, lo: -reach, hi: reach });
    }
    match (v, w) {
        (FlowPoint::Tree(a), FlowPoint::Tree(b)) => {
            for t in [t0, t1] {
                if t.fract() != 0.0 {
                    return Err(GeomError::NonIntegerTime(t));
                }
            }
            let (pa, pb) = (a.path(t0 as i64, t1 as i64), b.path(t0 as i64, t1 as i64));
            Ok(pa.iter().zip(&pb).map(|(x, y)| x.dist(y)).max().unwrap_or(0) as f64)
        }
        (FlowPoint::Plane { .. }, FlowPoint::Plane { .. }) => {
            // distance between two geodesics is convex in t
            let (ga, gb) = (v.plane_geodesic().unwrap(), w.plane_geodesic().unwrap());
            let d = |t: f64| ga.point_unchecked(t).dist(&gb.point_unchecked(t));
            Ok(d(t0).max(d(t1)))
        }
        (FlowPoint::Flat { base: p, angle: a }, FlowPoint::Flat { base: q, angle: b }) => {
            let dp = (q.x - p.x, q.y - p.y);
            let du = (b.cos() - a.cos(), b.sin() - a.sin());
            Ok(torus_segment_max(dp, du, t0, t1))
        }
        _ => Err(GeomError::BackendMismatch(v.backend().name(), w.backend().name())),
    }
}

/// Bowen's `d_k(v, w)`: the largest distance between the two geodesics over
/// `[0, k]`, at integer times on the tree.
pub fn dyn_metric(v: &FlowPoint, w: &FlowPoint, k: f64) -> Result<f64> {
    dyn_metric_on(v, w, 0.0, k)
}

/// Finite sample of flow points standing in for a compact set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Universe {
    pub points: Vec<FlowPoint>,
    pub description: String,
}

/// One tree flow point through the identity per reduced forward word of
/// length `depth`.
pub fn tree_universe(rank: usize, depth: usize, window: usize) -> Result<Universe> {
    if depth > window {
        return Err(GeomError::Precondition(format!("depth {depth} exceeds window {window}")));
    }
    if tree::sphere_size(rank, depth) > 5_000_000 {
        return Err(GeomError::Precondition(format!("{} words of length {depth} is too many", tree::sphere_size(rank, depth))));
    }
    let mut words: Vec<Vec<Letter>> = Vec::new();
    tree::visit_extensions(rank, &[], depth, &mut |w| {
        if w.len() == depth {
            words.push(w.to_vec());
        }
    });
    let points = words
        .par_iter()
        .map(|w| TreeFlow::new(rank, Word::identity(), w, &[], window).map(FlowPoint::Tree))
        .collect::<Result<Vec<_>>>()?;
    let description = format!("tree rank {rank}: {} forward words of length {depth} from the identity", points.len());
    Ok(Universe { points, description })
}

/// `grid × grid` base points of the unit torus times `directions` angles.
pub fn flat_universe(grid: usize, directions: usize) -> Universe {
    let mut points = Vec::with_capacity(grid * grid * directions);
    for i in 0..grid {
        for j in 0..grid {
            for d in 0..directions {
                let x = (i as f64 + 0.5) / grid as f64;
                let y = (j as f64 + 0.5) / grid as f64;
                points.push(FlowPoint::flat(x, y, TAU * d as f64 / directions as f64));
            }
        }
    }
    let description = format!("flat torus: {grid}x{grid} base points, {directions} directions");
    Universe { points, description }
}

/// Polar grid of base points within `radius` of `i` (ring `k` carries `6k`
/// points) times `directions` angles.
pub fn plane_universe(radius: f64, rings: usize, directions: usize) -> Universe {
    let mut points = Vec::new();
    for k in 0..=rings {
        let r = if rings == 0 { 0.0 } else { radius * k as f64 / rings as f64 };
        let spokes = (6 * k).max(1);
        for s in 0..spokes {
            let base = plane::polar_from_i(r, TAU * s as f64 / spokes as f64);
            for d in 0..directions {
                points.push(FlowPoint::plane(base, TAU * d as f64 / directions as f64));
            }
        }
    }
    let description = format!("plane: {rings} rings to radius {radius} around i, {directions} directions");
    Universe { points, description }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanMethod {
    GreedyCover,
    SeparatedLower,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanningReport {
    pub n: usize,
    pub delta: f64,
    pub count: usize,
    pub method: SpanMethod,
    pub universe: String,
    pub sample_size: usize,
    /// More than half the sample needed its own ball; the sample is too
    /// coarse to resolve `r_n` at this scale.
    pub saturated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanningBounds {
    pub lower: SpanningReport,
    pub upper: SpanningReport,
}

fn check_universe(u: &Universe, n: usize) -> Result<()> {
    let first = u.points.first().ok_or_else(|| GeomError::Precondition("empty universe".into()))?;
    for p in &u.points {
        if p.backend() != first.backend() {
            return Err(GeomError::BackendMismatch(first.backend().name(), p.backend().name()));
        }
        if (n as f64) > p.window() {
            return Err(GeomError::OutsideDomain { t: n as f64, lo: 0.0, hi: p.window() });
        }
    }
    Ok(())
}

/// Buckets such that points within `threshold` in `d_n` always share one.
/// On the tree, `d_n < 1` forces equal vertices at times 0 and `n`; with all
/// origins of one parity, distances are even and `< 2` suffices.
fn buckets(u: &Universe, n: usize, threshold: f64) -> Vec<Vec<usize>> {
    let flows: Option<Vec<&TreeFlow>> = u
        .points
        .iter()
        .map(|p| match p {
            FlowPoint::Tree(f) => Some(f),
            _ => None,
        })
        .collect();
    let all = || vec![(0..u.points.len()).collect()];
    let Some(flows) = flows else { return all() };
    let parity = flows[0].origin.len() % 2;
    let same_parity = flows.iter().all(|f| f.origin.len() % 2 == parity);
    if !(threshold < 1.0 || (threshold < 2.0 && same_parity)) {
        return all();
    }
    let keys: Vec<(Word, Word)> = flows.par_iter().map(|f| (f.origin.clone(), f.position(n as i64))).collect();
    let mut index: HashMap<&(Word, Word), usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        let b = *index.entry(k).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[b].push(i);
    }
    out
}

/// Greedy net: repeatedly take the first remaining point and drop everything
/// within `threshold` of it. The chosen points are `threshold`-separated and
/// their `threshold`-balls cover the sample.
fn greedy_net(u: &Universe, n: usize, threshold: f64) -> usize {
    let k = n as f64;
    let d = |i: usize, j: usize| dyn_metric(&u.points[i], &u.points[j], k).expect("universe validated");
    let net_in = |idx: &[usize], parallel: bool| -> usize {
        let mut remaining = idx.to_vec();
        let mut count = 0;
        while let Some(&c) = remaining.first() {
            count += 1;
            remaining = if parallel {
                remaining[1..].par_iter().copied().filter(|&j| d(c, j) > threshold).collect()
            } else {
                remaining[1..].iter().copied().filter(|&j| d(c, j) > threshold).collect()
            };
        }
        count
    };
    let bs = buckets(u, n, threshold);
    if bs.len() == 1 {
        net_in(&bs[0], true)
    } else {
        bs.par_iter().map(|b| net_in(b, false)).sum()
    }
}

/// Upper bound on `r_n(F, δ)` from a greedy `δ`-cover and lower bound from a
/// maximal `(n, 2δ)`-separated subset: each `δ`-ball holds at most one point
/// of a `2δ`-separated set.
pub fn spanning_count(u: &Universe, n: usize, delta: f64) -> Result<SpanningBounds> {
    if !(delta > 0.0) {
        return Err(GeomError::Precondition("delta must be positive".into()));
    }
    check_universe(u, n)?;
    let report = |count: usize, method: SpanMethod| SpanningReport {
        n,
        delta,
        count,
        method,
        universe: u.description.clone(),
        sample_size: u.points.len(),
        saturated: 2 * count > u.points.len(),
    };
    let upper = report(greedy_net(u, n, delta), SpanMethod::GreedyCover);
    let lower = report(greedy_net(u, n, 2.0 * delta), SpanMethod::SeparatedLower);
    Ok(SpanningBounds { lower, upper })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeRow {
    pub delta: f64,
    pub slope_upper: f64,
    pub slope_lower: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HtopEstimate {
    pub h: f64,
    pub slopes: Vec<SlopeRow>,
    /// Range of the upper slopes across the `δ` grid.
    pub spread: f64,
    pub stable: bool,
    /// Counts nondecreasing in `n` and as `δ` shrinks.
    pub monotone: bool,
    pub reports: Vec<SpanningBounds>,
    pub reference: Option<f64>,
    pub gap: Option<f64>,
}

/// Slope of `log r_n` against `n` over the upper half of the `n` grid, for
/// each `δ`. The estimate is the larger of the cover and separated slopes at
/// the smallest `δ`; a cover that has saturated the sample flattens out, the
/// separated count less so.
pub fn estimate_htop(u: &Universe, n_grid: &[usize], delta_grid: &[f64], reference: Option<f64>) -> Result<HtopEstimate> {
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();
    if ns.len() < 2 || deltas.is_empty() {
        return Err(GeomError::Precondition("need at least two n values and one delta".into()));
    }
    let mid = 0.5 * (ns[0] + ns[ns.len() - 1]) as f64;
    let mut top: Vec<usize> = ns.iter().copied().filter(|&n| n as f64 >= mid).collect();
    if top.len() < 2 {
        top = ns[ns.len() - 2..].to_vec();
    }
    let mut reports = Vec::new();
    let mut slopes = Vec::new();
    for &delta in &deltas {
        let rows = ns.iter().map(|&n| spanning_count(u, n, delta)).collect::<Result<Vec<_>>>()?;
        let fit = |pick: &dyn Fn(&SpanningBounds) -> usize| -> Result<f64> {
            let sel: Vec<&SpanningBounds> = rows.iter().filter(|r| top.contains(&r.upper.n)).collect();
            let xs: Vec<f64> = sel.iter().map(|r| r.upper.n as f64).collect();
            let ys: Vec<f64> = sel.iter().map(|r| (pick(r) as f64).ln()).collect();
            Ok(least_squares(&xs, &ys)?.slope)
        };
        slopes.push(SlopeRow { delta, slope_upper: fit(&|r| r.upper.count)?, slope_lower: fit(&|r| r.lower.count)? });
        reports.extend(rows);
    }
    let last = slopes.last().unwrap();
    let h = last.slope_upper.max(last.slope_lower);
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.slope_upper), hi.max(r.slope_upper))
    });
    let spread = hi - lo;
    let per_delta = ns.len();
    let in_n = reports.chunks(per_delta).all(|c| c.windows(2).all(|w| w[0].upper.count <= w[1].upper.count));
    let in_delta = (0..per_delta).all(|i| {
        reports.iter().skip(i).step_by(per_delta).collect::<Vec<_>>().windows(2).all(|w| w[0].upper.count <= w[1].upper.count)
    });
    Ok(HtopEstimate {
        h,
        slopes,
        spread,
        stable: spread <= 0.1 * h.abs().max(0.1),
        monotone: in_n && in_delta,
        reports,
        reference,
        gap: reference.map(|r| h - r),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZClass {
    #[serde(rename = "EXPANSIVE-AT-SCALE")]
    ExpansiveAtScale,
    #[serde(rename = "NON-EXPANSIVE-WITNESS")]
    NonExpansiveWitness,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub point: FlowPoint,
    /// `max_{|t| <= horizon} d(c_v(t), c_w(t))`.
    pub max_distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZSetReport {
    pub rho: f64,
    pub horizon: f64,
    pub class: ZClass,
    pub certificate: Option<String>,
    pub witnesses: Vec<Witness>,
    pub samples: usize,
    /// Smallest window distance seen among sampled candidates.
    pub closest: Option<f64>,
}

/// Looks for `w`, not a time shift of `v`, with `d(c_v(t), c_w(t)) <= rho`
/// for all `|t| <= horizon`.
pub fn z_set_probe(v: &FlowPoint, rho: f64, horizon: f64, budget: usize, seed: u64) -> Result<ZSetReport> {
    if !(rho > 0.0) || !(horizon >= 0.0) {
        return Err(GeomError::Precondition("rho must be positive and horizon non-negative".into()));
    }
    if horizon > v.window() {
        return Err(GeomError::OutsideDomain { t: horizon, lo: 0.0, hi: v.window() });
    }
    let report = |class, certificate: Option<&str>, witnesses, samples, closest| ZSetReport {
        rho,
        horizon,
        class,
        certificate: certificate.map(str::to_string),
        witnesses,
        samples,
        closest,
    };
    match v {
        FlowPoint::Tree(_) => {
            let cert = if rho < 1.0 {
                "distinct tree vertices are at distance >= 1, so d(c_v(t), c_w(t)) <= rho < 1 at every integer t forces w = v"
            } else {
                "geodesics at bounded distance for all time share both ends and tree lines are unique, so w is a time shift of v"
            };
            Ok(report(ZClass::ExpansiveAtScale, Some(cert), vec![], 0, None))
        }
        FlowPoint::Flat { base, angle } => {
            let w = flat_parallel(*base, *angle, 0.75 * rho);
            let d = dyn_metric_on(v, &w, -horizon, horizon)?;
            let class = if d <= rho { ZClass::NonExpansiveWitness } else { ZClass::Unknown };
            Ok(report(class, None, vec![Witness { point: w, max_distance: d }], 1, Some(d)))
        }
        FlowPoint::Plane { base, angle } => {
            let gv = v.plane_geodesic().unwrap();
            let (sv, ev) = (gv.start_end(), gv.end_end());
            let to_base = Mobius::base_at(base);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut closest = f64::INFINITY;
            let mut witnesses = Vec::new();
            for _ in 0..budget {
                let z = to_base.apply(&plane::sample_in_ball(&mut rng, rho));
                let a = angle + rng.gen_range(-rho..=rho);
                let w = FlowPoint::plane(z, a);
                let gw = w.plane_geodesic().unwrap();
                if gw.start_end().approx_eq(&sv, 1e-9) && gw.end_end().approx_eq(&ev, 1e-9) {
                    continue;
                }
                let d = dyn_metric_on(v, &w, -horizon, horizon)?;
                closest = closest.min(d);
                if d <= rho {
                    witnesses.push(Witness { point: w, max_distance: d });
                    break;
                }
            }
            let class = if witnesses.is_empty() { ZClass::Unknown } else { ZClass::NonExpansiveWitness };
            Ok(report(class, None, witnesses, budget, closest.is_finite().then_some(closest)))
        }
    }
}

/// The flow point on the parallel line `offset` to the left of travel.
fn flat_parallel(base: FlatPoint, angle: f64, offset: f64) -> FlowPoint {
    let g = FlatGeodesic::ray(&base, angle).parallel(offset);
    FlowPoint::flat(g.origin.x, g.origin.y, angle)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberReport {
    /// Distinct geodesics found joining the two ends.
    pub count: usize,
    pub representatives: Vec<FlowPoint>,
    /// The count is proven, not sampled.
    pub exact: bool,
    /// The connecting geodesics form a continuous family.
    pub continuum: bool,
}

/// Geodesics from `xi` to `eta`: unique on the tree and the plane, a family
/// of parallels on the flat plane of which `max(budget, 2)` are returned.
pub fn endpoint_fiber_probe(xi: &BoundaryPoint, eta: &BoundaryPoint, budget: usize) -> Result<FiberReport> {
    match (xi, eta) {
        (BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
            let g = TreeGeodesic::line(a, b)?;
            let rank = a
                .prefix_letters()
                .iter()
                .chain(a.cycle_letters())
                .chain(b.prefix_letters())
                .chain(b.cycle_letters())
                .chain(g.origin.letters())
                .map(|l| l.generator_index() + 1)
                .max()
                .unwrap_or(1);
            let rep = FlowPoint::Tree(TreeFlow::from_geodesic(&g, rank, DEFAULT_WINDOW)?);
            Ok(FiberReport { count: 1, representatives: vec![rep], exact: true, continuum: false })
        }
        (BoundaryPoint::Plane(a), BoundaryPoint::Plane(b)) => {
            let g = PlaneGeodesic::line(a, b)?;
            let rep = FlowPoint::plane(g.point_unchecked(0.0), g.tangent_angle(0.0));
            Ok(FiberReport { count: 1, representatives: vec![rep], exact: true, continuum: false })
        }
        (BoundaryPoint::Flat(a), BoundaryPoint::Flat(b)) => {
            let g = FlatGeodesic::line(*a, *b)?;
            let m = budget.max(2);
            let representatives: Vec<FlowPoint> =
                (0..m).map(|j| flat_parallel(g.origin, g.theta, j as f64 / m as f64)).collect();
            Ok(FiberReport { count: m, representatives, exact: true, continuum: true })
        }
        _ => Err(GeomError::BackendMismatch(xi.backend().name(), eta.backend().name())),
    }
}

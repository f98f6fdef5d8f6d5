use std::f64::consts::PI;

use hypgeo::counting::{self, modular_base};
use hypgeo::entropy::{self, FlowPoint, TreeFlow, Universe, DEFAULT_WINDOW};
use hypgeo::flat::FlatPoint;
use hypgeo::plane::{PlaneEnd, PlanePoint};
use hypgeo::tree::{Letter, TreeEnd, Word};
use hypgeo::{BoundaryPoint, Group, SpacePoint};
use serde_json::json;

use super::tree_rank;
use crate::config::{parse_n_grid, BackendKind, RunConfig};
use crate::report::Output;
use crate::CliError;

const IDS: &[&str] = &["entropy-consistency"];

pub fn run(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    match cfg.entropy.probe.as_deref() {
        None => spanning(cfg, out),
        Some("z-set") => z_set(cfg, out),
        Some("fiber") => fiber(cfg, out),
        Some(other) => Err(CliError::Usage(format!("unknown probe {other:?} (expected z-set or fiber)"))),
    }
}

/// Volume-entropy fit from an orbit census, the reference for `h_top`.
pub fn volume_entropy_fit(kind: BackendKind, rank: usize) -> Result<f64, CliError> {
    let (group, base, grid): (Group, SpacePoint, Vec<f64>) = match kind {
        BackendKind::Tree => (Group::Free { rank }, SpacePoint::Tree(Word::identity()), (0..=12).map(f64::from).collect()),
        BackendKind::Modular => (Group::modular(), SpacePoint::Plane(modular_base()), (1..=10).map(f64::from).collect()),
        BackendKind::Flat => {
            (Group::Lattice, SpacePoint::Flat(FlatPoint::new(0.0, 0.0)), (0..=20).map(|k| 10.0 * k as f64).collect())
        }
    };
    Ok(counting::fit_entropy(&counting::orbit_count(&group, &base, &grid)?)?.h)
}

fn spanning(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let kind = cfg.backend_kind()?;
    let (default_n, default_delta) = match kind {
        BackendKind::Tree => ("1..10", 0.5),
        BackendKind::Modular => ("1..4", 0.5),
        BackendKind::Flat => ("5,10,20,40", 0.3),
    };
    let ns = parse_n_grid(cfg.entropy.n.as_deref().unwrap_or(default_n))?;
    let deltas = if cfg.entropy.deltas.is_empty() { vec![default_delta] } else { cfg.entropy.deltas.clone() };
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(CliError::Usage("delta must be positive".into()));
    }
    let n_max = *ns.last().ok_or_else(|| CliError::Usage("empty n grid".into()))?;
    let (universe, rank): (Universe, usize) = match kind {
        BackendKind::Tree => {
            let rank = tree_rank(cfg)?;
            (entropy::tree_universe(rank, n_max + 1, DEFAULT_WINDOW.max(n_max + 1))?, rank)
        }
        BackendKind::Modular => (entropy::plane_universe(1.0, 3, 16), 0),
        BackendKind::Flat => (entropy::flat_universe(2, 128), 0),
    };
    let reference = volume_entropy_fit(kind, rank)?;
    let est = entropy::estimate_htop(&universe, &ns, &deltas, Some(reference))?;
    let exact = match kind {
        BackendKind::Tree => ((2 * rank - 1) as f64).ln(),
        BackendKind::Modular => 1.0,
        BackendKind::Flat => 0.0,
    };
    out.csv(
        "spanning.csv",
        IDS,
        &["n", "delta", "lower", "upper", "slope", "lower_saturated", "upper_saturated"],
        est.reports
            .iter()
            .map(|r| {
                let slope = est.slopes.iter().find(|s| s.delta == r.upper.delta).map_or(f64::NAN, |s| s.slope_upper.max(s.slope_lower));
                vec![
                    r.upper.n.into(),
                    r.upper.delta.into(),
                    r.lower.count.into(),
                    r.upper.count.into(),
                    slope.into(),
                    r.lower.saturated.into(),
                    r.upper.saturated.into(),
                ]
            })
            .collect(),
    )?;
    out.json(
        "htop.json",
        IDS,
        &json!({
            "universe": universe.description,
            "sample_size": universe.points.len(),
            "n_grid": ns,
            "deltas": deltas,
            "h_top": est.h,
            "slopes": est.slopes,
            "spread": est.spread,
            "stable": est.stable,
            "monotone": est.monotone,
            "h_vol_fit": reference,
            "gap_to_h_vol": est.gap,
            "h_vol_exact": exact,
            "gap_to_exact": est.h - exact,
        }),
    )?;
    Ok(format!("h_top ≈ {:.6} over {} points; volume entropy fit {:.6}, gap {:.6}", est.h, universe.points.len(), reference, est.h - reference))
}

fn default_flow(kind: BackendKind, rank: usize) -> Result<FlowPoint, CliError> {
    Ok(match kind {
        BackendKind::Tree => {
            let fwd: Vec<Letter> = (0..rank.min(2)).map(Letter::generator).collect();
            FlowPoint::Tree(TreeFlow::new(rank, Word::identity(), &fwd, &[], DEFAULT_WINDOW)?)
        }
        BackendKind::Modular => FlowPoint::plane(PlanePoint { x: 0.1, y: 1.3 }, 1.0),
        BackendKind::Flat => FlowPoint::flat(0.2, 0.3, 0.0),
    })
}

fn z_set(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let kind = cfg.backend_kind()?;
    let rank = if kind == BackendKind::Tree { tree_rank(cfg)? } else { 0 };
    let v = default_flow(kind, rank)?;
    let e = &cfg.entropy;
    let horizon = if kind == BackendKind::Tree { e.horizon.min(DEFAULT_WINDOW as f64) } else { e.horizon };
    let r = entropy::z_set_probe(&v, e.rho, horizon, e.budget, cfg.seed)?;
    out.json("probes.json", &["expansivity"], &json!({ "probe": "z-set", "flow_point": v, "report": r }))?;
    let class = serde_json::to_value(r.class).unwrap_or_default();
    Ok(format!("z-set probe at rho = {}: {}", e.rho, class.as_str().unwrap_or("?")))
}

fn parse_end(kind: BackendKind, rank: usize, s: &str) -> Result<BoundaryPoint, CliError> {
    let bad = |m: String| CliError::Usage(format!("boundary point {s:?}: {m}"));
    match kind {
        BackendKind::Tree => TreeEnd::parse(s, rank).map(BoundaryPoint::Tree).map_err(|e| bad(e.to_string())),
        BackendKind::Modular => match s {
            "inf" | "∞" => Ok(BoundaryPoint::Plane(PlaneEnd::Infinity)),
            _ => s.parse::<f64>().map(|x| BoundaryPoint::Plane(PlaneEnd::Finite(x))).map_err(|e| bad(e.to_string())),
        },
        BackendKind::Flat => match s {
            "pi" | "π" => Ok(BoundaryPoint::Flat(PI)),
            _ => s.parse::<f64>().map(BoundaryPoint::Flat).map_err(|e| bad(e.to_string())),
        },
    }
}

fn fiber(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let kind = cfg.backend_kind()?;
    let rank = if kind == BackendKind::Tree { tree_rank(cfg)? } else { 0 };
    let (dx, de) = match kind {
        BackendKind::Tree => ("(A)", "(a)"),
        BackendKind::Modular => ("0", "inf"),
        BackendKind::Flat => ("pi", "0"),
    };
    let xi = parse_end(kind, rank, cfg.entropy.xi.as_deref().unwrap_or(dx))?;
    let eta = parse_end(kind, rank, cfg.entropy.eta.as_deref().unwrap_or(de))?;
    // a flat fiber is a continuum; list a bounded number of its parallels
    let r = entropy::endpoint_fiber_probe(&xi, &eta, cfg.entropy.budget.min(16))?;
    out.json("probes.json", &["endpoint-fiber"], &json!({ "probe": "fiber", "xi": xi, "eta": eta, "report": r }))?;
    Ok(format!("fiber probe: {} geodesic(s) (continuum: {})", r.count, r.continuum))
}

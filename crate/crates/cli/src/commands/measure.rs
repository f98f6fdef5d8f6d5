use hypgeo::counting::modular_base;
use hypgeo::flat::FlatPoint;
use hypgeo::patterson_sullivan::{self as ps, equidist, plane as psp, tree as pst, validators};
use hypgeo::plane::{Mobius, PlanePoint};
use hypgeo::tree::{self, Word};
use hypgeo::{Group, SpacePoint};
use serde_json::{json, Value};

use super::{rational, tree_rank, word};
use crate::config::{parse_cells, BackendKind, CellSpec, RunConfig};
use crate::report::{Cell, Output};
use crate::CliError;

pub const TREE_CHECKS: &[&str] = &["conformal", "mass", "shadow", "pair-invariance", "validators"];
pub const MODULAR_CHECKS: &[&str] = &["conformal", "mass", "shadow", "pair-invariance"];

/// Scale ρ for the separated-set check; at ρ = 1 the separation 2r₀ = 6
/// exceeds every window spread and each set collapses to one point.
pub const SEPARATION_RHO: f64 = 0.25;

/// Viewpoints `b a^n`, `n = 2..=8`, whose shadows from the identity shrink
/// geometrically.
pub fn tree_shadow_family(rank: usize) -> Result<Vec<Word>, CliError> {
    let b = word("b", rank)?;
    let a = word("a", rank)?;
    Ok((2..=8).map(|n| b.mul(&a.pow(n))).collect())
}

/// Points climbing toward the cusp-free end `φ - 1` of the real line.
pub fn modular_shadow_family() -> Vec<PlanePoint> {
    let x = (5f64.sqrt() - 1.0) / 2.0;
    (1..=5).map(|n| PlanePoint { x, y: 2.0 * (-(n as f64)).exp() }).collect()
}

/// Two base points at distance about 3 from the modular base point, on
/// opposite sides.
pub fn modular_conformal_points() -> Vec<PlanePoint> {
    vec![PlanePoint { x: 0.3, y: 2.0 * 3f64.exp() }, PlanePoint { x: -0.7, y: 0.1 }]
}

/// `z ↦ z + 1`.
pub fn translation() -> Mobius {
    Mobius::new(1.0, 1.0, 0.0, 1.0).expect("unimodular")
}

pub fn a_powers(rank: usize, ns: std::ops::RangeInclusive<usize>) -> Result<Vec<Word>, CliError> {
    let a = word("a", rank)?;
    Ok(ns.map(|n| a.pow(n)).collect())
}

fn selected(cfg: &RunConfig, defaults: &[&str], allowed: &[&str]) -> Result<Vec<String>, CliError> {
    let checks: Vec<String> = if cfg.measure.checks.is_empty() {
        if cfg.measure.equidist {
            Vec::new()
        } else {
            defaults.iter().map(|s| s.to_string()).collect()
        }
    } else {
        cfg.measure.checks.clone()
    };
    for c in &checks {
        if !allowed.contains(&c.as_str()) {
            return Err(CliError::Usage(format!("check {c:?} is not available here (choose from {})", allowed.join(", "))));
        }
    }
    Ok(checks)
}

pub fn run(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    match cfg.backend_kind()? {
        BackendKind::Tree => run_tree(cfg, out),
        BackendKind::Modular => run_modular(cfg, out),
        BackendKind::Flat => run_flat(cfg, out),
    }
}

fn run_tree(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let rank = tree_rank(cfg)?;
    if cfg.measure.equidist {
        return Err(CliError::Usage("equidistribution runs on the modular backend".into()));
    }
    let depth = match cfg.measure.cells.as_deref().map(parse_cells).transpose()? {
        None => 4,
        Some(CellSpec::Depth(d)) => d,
        Some(other) => return Err(CliError::Usage(format!("tree cells are given as depth=N, got {other:?}"))),
    };
    if depth == 0 || depth > 8 {
        return Err(CliError::Usage("tree cylinder depth must lie in 1..=8".into()));
    }
    let checks = selected(cfg, TREE_CHECKS, TREE_CHECKS)?;
    let h = ((2 * rank - 1) as f64).ln();
    let e = Word::identity();
    let group = Group::Free { rank };
    let mut lines = Vec::new();

    // limit cylinder masses and the series behind them
    let cells = tree::cylinders(rank, depth);
    let masses = cells
        .iter()
        .map(|u| Ok(json!({ "cylinder": u.to_string(), "mass": rational(&pst::limit_cylinder_mass(rank, &e, u)?) })))
        .collect::<Result<Vec<Value>, CliError>>()?;
    let mut s_grid = vec![h + 0.1, h + 2f64.ln(), 2.0 * h];
    if let Some(s) = cfg.measure.s {
        s_grid.push(s);
    }
    let series = s_grid
        .iter()
        .map(|&s| {
            let r = ps::poincare_series(&group, s, &SpacePoint::Tree(e.clone()), &SpacePoint::Tree(e.clone()), 40.0)?;
            Ok(json!({ "s": s, "cap": r.cap, "partial": r.partial, "tail_bound": r.tail_bound, "closed_form": r.closed_form }))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;
    out.json(
        "measure.json",
        &["conformal-density", "mass-bounds"],
        &json!({
            "backend": "tree",
            "rank": rank,
            "critical_exponent": h,
            "base": "e",
            "depth": depth,
            "total": rational(&pst::limit_total_mass(rank, &e)?),
            "cylinders": masses,
            "series": series,
        }),
    )?;

    for check in &checks {
        match check.as_str() {
            "conformal" => {
                let radius = 3.min(depth - 1);
                let points: Vec<Word> = tree::ball_enumerate(rank, radius).collect();
                let r = pst::conformal_check(rank, &points, depth)?;
                out.csv(
                    "conformal.csv",
                    &["conformal-density"],
                    &["points", "depth", "comparisons", "max_defect", "mean_defect", "exact"],
                    vec![vec![points.len().into(), depth.into(), r.cells.into(), r.max_defect.into(), r.mean_defect.into(), r.exact.into()]],
                )?;
                lines.push(format!("conformal: max defect {} over {} comparisons (exact: {})", r.max_defect, r.cells, r.exact));
            }
            "mass" => {
                let s = cfg.measure.s.unwrap_or(h + 0.5);
                let mut rows = Vec::new();
                let mut all = true;
                for p in tree::ball_enumerate(rank, 2) {
                    let m = ps::ps_measure(&group, &SpacePoint::Tree(p.clone()), &SpacePoint::Tree(e.clone()), s, 10.0)?;
                    let (ok, lo, hi) = ps::mass_within_bounds(&m, p.len() as f64);
                    all &= ok;
                    rows.push(vec![p.to_string().into(), Cell::F(p.len() as f64), m.total_mass().into(), m.tail_bound.into(), lo.into(), hi.into(), ok.into()]);
                }
                out.csv("mass.csv", &["mass-bounds"], &["p", "distance", "total", "tail_bound", "lower", "upper", "pass"], rows)?;
                lines.push(format!("mass: all within bounds at s = {s}: {all}"));
            }
            "shadow" => {
                let xs = tree_shadow_family(rank)?;
                let ratios = pst::shadow_ratios(rank, &e, 0.5, &xs)?;
                let rows = xs.iter().zip(&ratios).map(|(x, r)| vec![x.to_string().into(), x.len().into(), Cell::F(*r)]).collect();
                out.csv("shadow.csv", &["shadow-lemma"], &["x", "distance", "ratio"], rows)?;
                let (lo, hi) = min_max(&ratios);
                lines.push(format!("shadow: ratios in [{lo}, {hi}]"));
            }
            "pair-invariance" => {
                let gamma = word(&cfg.measure.gamma, rank)?;
                let d = depth.max(gamma.len() + 1);
                let r = pst::pair_invariance_check(rank, d, &gamma)?;
                out.csv(
                    "pair_invariance.csv",
                    &["pair-invariance"],
                    &["gamma", "depth", "pairs", "max_relative_defect", "exact"],
                    vec![vec![gamma.to_string().into(), d.into(), r.pairs.into(), r.max_relative_defect.into(), r.exact.into()]],
                )?;
                lines.push(format!("pair-invariance: defect {} over {} pairs", r.max_relative_defect, r.pairs));
            }
            "validators" => {
                let dm = validators::validate_d_mass(rank, &a_powers(rank, 3..=8)?, 4.5, 1.0)?;
                let x = word("a", rank)?.pow(20);
                let sep = (5..=8)
                    .map(|n| validators::validate_separated_bound(rank, &x, n, SEPARATION_RHO, 4.5, 1.0))
                    .collect::<Result<Vec<_>, _>>()?;
                out.csv(
                    "dmass.csv",
                    &["dmass-lower"],
                    &["x", "distance", "mass", "scaled"],
                    dm.rows.iter().map(|r| vec![r.x.clone().into(), r.distance.into(), r.mass.into(), r.scaled.into()]).collect(),
                )?;
                out.csv(
                    "separated.csv",
                    &["separated-bound"],
                    &["n", "windows", "cardinality", "maximal"],
                    sep.iter().map(|r| vec![r.n.into(), r.windows.into(), r.cardinality.into(), r.maximal.into()]).collect(),
                )?;
                let card: Vec<f64> = sep.iter().map(|r| r.cardinality as f64).collect();
                let (lo, hi) = min_max(&card);
                lines.push(format!("validators: c' = {}, spread {}; separated max/min = {}", dm.c_prime, dm.spread, hi / lo));
            }
            _ => unreachable!(),
        }
    }
    Ok(lines.join("\n"))
}

fn run_modular(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let mut allowed = MODULAR_CHECKS.to_vec();
    allowed.push("equidist");
    let mut checks = selected(cfg, MODULAR_CHECKS, &allowed)?;
    if cfg.measure.equidist && !checks.iter().any(|c| c == "equidist") {
        checks.push("equidist".into());
    }
    let spec = cfg.measure.cells.as_deref().map(parse_cells).transpose()?;
    let arcs = match spec {
        Some(CellSpec::Arcs(n)) => n,
        Some(CellSpec::Depth(_)) => return Err(CliError::Usage("depth=N cells are for the tree backend".into())),
        _ => 256,
    };
    if arcs < 8 {
        return Err(CliError::Usage("use at least 8 arcs".into()));
    }
    let base = modular_base();
    let group = Group::modular();
    let mut lines = Vec::new();
    let needs_atoms = checks.iter().any(|c| c != "equidist" && c != "mass");
    let atoms = needs_atoms.then(|| psp::orbit_atoms(&base, cfg.measure.radius));
    let settings = atoms.as_ref().map(psp::LimitSettings::for_atoms);
    if let Some(a) = &atoms {
        let masses = psp::limit_cell_masses(a, &base, arcs, settings.as_ref().unwrap())?;
        out.json(
            "measure.json",
            &["conformal-density", "mass-bounds"],
            &json!({
                "backend": "modular",
                "critical_exponent": psp::H_PLANE,
                "base": [base.x, base.y],
                "atoms": a.points.len(),
                "radius": a.radius,
                "settings": settings,
                "arcs": arcs,
                "cell_masses": masses,
            }),
        )?;
    }

    for check in &checks {
        match check.as_str() {
            "conformal" => {
                let (a, set) = (atoms.as_ref().unwrap(), settings.as_ref().unwrap());
                let mut rows = Vec::new();
                for q in modular_conformal_points() {
                    for n in [arcs / 4, arcs / 2, arcs, 2 * arcs] {
                        let r = psp::conformal_check(a, &base, &q, n, set)?;
                        rows.push(vec![q.x.into(), q.y.into(), base.dist(&q).into(), n.into(), r.max_defect.into(), r.mean_defect.into(), r.empty_cells.into()]);
                    }
                    lines.push(format!("conformal: q = ({}, {}) defects recorded at {}..{} arcs", q.x, q.y, arcs / 4, 2 * arcs));
                }
                out.csv("conformal.csv", &["conformal-density"], &["qx", "qy", "distance", "arcs", "max_defect", "mean_defect", "empty_cells"], rows)?;
            }
            "mass" => {
                let s = cfg.measure.s.unwrap_or(1.2);
                let mut rows = Vec::new();
                for p in [base, PlanePoint { x: 0.3, y: 1.5 }] {
                    let m = ps::ps_measure(&group, &SpacePoint::Plane(p), &SpacePoint::Plane(base), s, 8.0)?;
                    let d = p.dist(&base);
                    let (ok, lo, hi) = ps::mass_within_bounds(&m, d);
                    rows.push(vec![p.x.into(), p.y.into(), d.into(), m.total_mass().into(), m.tail_bound.into(), lo.into(), hi.into(), ok.into()]);
                }
                out.csv("mass.csv", &["mass-bounds"], &["px", "py", "distance", "total", "tail_bound", "lower", "upper", "pass"], rows)?;
                lines.push(format!("mass: checked at s = {s}"));
            }
            "shadow" => {
                let (a, set) = (atoms.as_ref().unwrap(), settings.as_ref().unwrap());
                let xs = modular_shadow_family();
                let rows = psp::shadow_ratios(a, &base, 1.0, &xs, set)?;
                let b = rows.iter().map(|r| r.ratio.max(1.0 / r.ratio)).fold(1.0, f64::max);
                out.csv(
                    "shadow.csv",
                    &["shadow-lemma"],
                    &["x", "y", "distance", "mass", "atoms", "resolved", "ratio"],
                    xs.iter()
                        .zip(&rows)
                        .map(|(x, r)| vec![x.x.into(), x.y.into(), r.distance.into(), r.mass.mass.into(), r.mass.atoms.into(), r.mass.resolved.into(), r.ratio.into()])
                        .collect(),
                )?;
                lines.push(format!("shadow: ratios within [1/b, b] with b = {b}"));
            }
            "pair-invariance" => {
                let (a, set) = (atoms.as_ref().unwrap(), settings.as_ref().unwrap());
                let pm = psp::PairMeasure::build(a, arcs, 8, set, 1e6)?;
                let r = psp::pair_invariance_check(&pm, &base, &translation());
                out.csv(
                    "pair_invariance.csv",
                    &["pair-invariance"],
                    &["gamma", "arcs", "micro", "weight_cap", "pairs", "relative_defect"],
                    vec![vec!["z+1".into(), arcs.into(), 8usize.into(), 1e6.into(), r.pairs.into(), r.max_relative_defect.into()]],
                )?;
                lines.push(format!("pair-invariance: relative defect {} over {} pairs", r.max_relative_defect, r.pairs));
            }
            "equidist" => {
                let obs = match spec {
                    Some(CellSpec::Count(16)) | None | Some(CellSpec::Arcs(_)) => equidist::standard_cells(),
                    Some(CellSpec::Count(n)) if n >= 2 => equidist::angle_sectors(n),
                    _ => return Err(CliError::Usage("equidistribution needs at least 2 cells".into())),
                };
                let r = equidist::equidistribution_test(cfg.measure.t, &obs, 0.01)?;
                out.csv(
                    "equidist.csv",
                    &["equidistribution"],
                    &["x0", "x1", "y0", "y1", "angle0", "angle1", "measured", "liouville", "gap"],
                    r.rows
                        .iter()
                        .map(|row| {
                            let o = row.observable;
                            vec![o.x.0.into(), o.x.1.into(), o.y.0.into(), o.y.1.into(), o.angle.0.into(), o.angle.1.into(), row.measured.into(), row.reference.into(), row.gap.into()]
                        })
                        .collect(),
                )?;
                lines.push(format!("equidist: {} classes to T = {}, max gap {}", r.classes, r.t, r.max_gap()));
            }
            _ => unreachable!(),
        }
    }
    Ok(lines.join("\n"))
}

fn run_flat(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    selected(cfg, &["mass"], &["mass"])?;
    if cfg.measure.equidist {
        return Err(CliError::Usage("equidistribution runs on the modular backend".into()));
    }
    let s = cfg.measure.s.unwrap_or(2.0);
    let o = FlatPoint::new(0.0, 0.0);
    let p = FlatPoint::new(0.3, 0.4);
    let m = ps::ps_measure(&Group::Lattice, &SpacePoint::Flat(p), &SpacePoint::Flat(o), s, 30.0)?;
    let (ok, lo, hi) = ps::mass_within_bounds(&m, p.dist(&o));
    out.csv(
        "mass.csv",
        &["mass-bounds"],
        &["px", "py", "distance", "total", "tail_bound", "lower", "upper", "pass"],
        vec![vec![p.x.into(), p.y.into(), p.dist(&o).into(), m.total_mass().into(), m.tail_bound.into(), lo.into(), hi.into(), ok.into()]],
    )?;
    Ok(format!("mass: total {} within [{lo}, {hi}]: {ok}", m.total_mass()))
}

pub(crate) fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

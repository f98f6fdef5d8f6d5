use hypgeo::counting::{self, GeodesicCensus};
use hypgeo::flat::FlatPoint;
use hypgeo::tree::Word;
use hypgeo::{Group, SpacePoint};
use serde_json::json;

use super::tree_rank;
use crate::config::{BackendKind, RunConfig};
use crate::report::{Cell, Output};
use crate::CliError;

const GROWTH: &[&str] = &["orbit-growth"];
const COUNTING: &[&str] = &["counting-bounds", "margulis-band"];

pub fn run(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let kind = cfg.backend_kind()?;
    let (group, base, h_exact, grid, t_max) = match kind {
        BackendKind::Tree => {
            let rank = tree_rank(cfg)?;
            let r = cfg.count.r_max.unwrap_or(12.0).floor();
            let grid: Vec<f64> = (0..=r as usize).map(|k| k as f64).collect();
            let h = ((2 * rank - 1) as f64).ln();
            (Group::Free { rank }, SpacePoint::Tree(Word::identity()), h, grid, Some(cfg.count.t_max.unwrap_or(12.0)))
        }
        BackendKind::Modular => {
            let r = cfg.count.r_max.unwrap_or(10.0);
            let grid: Vec<f64> = (1..=r.floor() as usize).map(|k| k as f64).collect();
            (Group::modular(), SpacePoint::Plane(counting::modular_base()), 1.0, grid, Some(cfg.count.t_max.unwrap_or(10.0)))
        }
        BackendKind::Flat => {
            let r = cfg.count.r_max.unwrap_or(200.0);
            let grid: Vec<f64> = (0..=20).map(|k| r * k as f64 / 20.0).collect();
            (Group::Lattice, SpacePoint::Flat(FlatPoint::new(0.0, 0.0)), 0.0, grid, None)
        }
    };
    if grid.len() < 4 || grid.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(CliError::Usage("Rmax too small for an entropy fit".into()));
    }

    let census = counting::orbit_count(&group, &base, &grid)?;
    if !census.complete() {
        return Err(CliError::Incomplete(format!("orbit census for {} is not certified complete", census.group)));
    }
    let fit = counting::fit_entropy(&census)?;
    // growth constants under the exact exponent over the upper part of the grid
    let lo = if kind == BackendKind::Tree { 4.0f64.min(grid[grid.len() / 2]) } else { fit.window.0 };
    let (c1, c2) = counting::growth_constants(&census, h_exact, lo, *grid.last().unwrap());
    let backend = match kind {
        BackendKind::Tree => "tree",
        BackendKind::Modular => "modular",
        BackendKind::Flat => "flat",
    };
    out.csv(
        "orbit_census.csv",
        GROWTH,
        &["backend", "R_or_T", "count", "h_fit", "C1", "C2", "ratio", "complete_flag"],
        census
            .rows
            .iter()
            .map(|r| vec![backend.into(), Cell::F(r.radius), r.count.into(), fit.h.into(), c1.into(), c2.into(), (c2 / c1).into(), r.complete.into()])
            .collect(),
    )?;
    let mut summary = format!("h_fit = {:.6} (exact {:.6}), C2/C1 = {:.4}", fit.h, h_exact, c2 / c1);

    let mut counting_json = serde_json::Value::Null;
    if let Some(t_max) = t_max {
        let gc = counting::geodesic_census(&group, t_max)?;
        write_census(out, &gc)?;
        let h = h_exact;
        let ts: Vec<f64> = (1..=t_max.floor() as usize).map(|t| t as f64).filter(|t| *t >= gc.entries.first().map_or(0.0, |e| e.length)).collect();
        let rows = ts
            .iter()
            .map(|&t| Ok(vec![Cell::F(t), gc.count(t).into(), Cell::F(counting::margulis_ratio(&gc, h, t)?)]))
            .collect::<Result<Vec<_>, CliError>>()?;
        out.csv("margulis.csv", COUNTING, &["t", "count", "ratio"], rows)?;
        let band: Vec<f64> = ts.iter().copied().filter(|t| *t >= 4.0).collect();
        let a = counting::counting_constant(&gc, h, &band);
        counting_json = json!({ "ts": band, "constant": a, "classes": gc.entries.len(), "complete_to": gc.complete_to });
        summary.push_str(&format!(", {} primitive classes to T = {t_max}, A = {a:.4}", gc.entries.len()));
        if let Some(first) = gc.entries.first() {
            summary.push_str(&format!(", shortest {} with length {:.6}", first.label, first.length));
        }
    }

    out.json(
        "entropy_fit.json",
        &["orbit-growth", "counting-bounds"],
        &json!({
            "group": census.group,
            "base": census.base,
            "h_fit": fit.h,
            "h_exact": h_exact,
            "window": [fit.window.0, fit.window.1],
            "residual": fit.residual,
            "fit_constants": { "c1": fit.c1, "c2": fit.c2 },
            "growth_constants": { "h": h_exact, "from": lo, "c1": c1, "c2": c2, "ratio": c2 / c1 },
            "counting": counting_json,
            "certificate": census.certificate,
        }),
    )?;
    Ok(summary)
}

fn write_census(out: &mut Output, gc: &GeodesicCensus) -> Result<(), CliError> {
    out.csv(
        "geodesic_census.csv",
        COUNTING,
        &["index", "length", "label"],
        gc.entries.iter().enumerate().map(|(i, e)| vec![i.into(), Cell::F(e.length), e.label.clone().into()]).collect(),
    )
}

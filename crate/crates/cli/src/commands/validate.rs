use hypgeo::counting::{self, modular_base};
use hypgeo::entropy::{self, DEFAULT_WINDOW};
use hypgeo::patterson_sullivan::{self as ps, equidist, plane as psp, tree as pst, validators};
use hypgeo::plane::{self, PlaneEnd, PlanePoint};
use hypgeo::space::Space;
use hypgeo::traveling::{self, TravelReport};
use hypgeo::tree::{self, Word};
use hypgeo::{BoundaryPoint, Group, SpacePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::entropy::volume_entropy_fit;
use super::measure::{a_powers, SEPARATION_RHO, min_max, modular_conformal_points, modular_shadow_family, translation, tree_shadow_family};
use super::{tree_rank, word};
use crate::config::{BackendKind, RunConfig};
use crate::report::{fmt_f64, Output};
use crate::CliError;

/// One checked inequality: the measured constant against its bound.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub id: &'static str,
    pub backend: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
    pub witness: Option<Value>,
}

impl Record {
    fn new(id: &'static str, backend: &'static str, measured: f64, bound: f64, pass: bool, detail: String) -> Self {
        Record { id, backend, measured, bound, pass, detail, witness: None }
    }

    fn at_most(id: &'static str, backend: &'static str, measured: f64, bound: f64, detail: String) -> Self {
        Record::new(id, backend, measured, bound, measured <= bound, detail)
    }

    fn with_witness<T: Serialize>(mut self, w: Option<&T>) -> Self {
        if !self.pass {
            self.witness = w.and_then(|w| serde_json::to_value(w).ok());
        }
        self
    }
}

pub fn run(cfg: &RunConfig, out: &mut Output) -> Result<String, CliError> {
    let suite = match cfg.validate.suite.as_deref() {
        Some(s) => s.to_string(),
        None => match cfg.backend_kind()? {
            BackendKind::Tree => "tree".into(),
            BackendKind::Modular => "plane".into(),
            BackendKind::Flat => return Err(CliError::Usage("the flat model has no inequality suite; use --suite tree|plane|all".into())),
        },
    };
    let mut records = Vec::new();
    match suite.as_str() {
        "tree" => records.extend(tree_suite(cfg)?),
        "plane" => records.extend(plane_suite(cfg)?),
        "all" => {
            records.extend(tree_suite(cfg)?);
            records.extend(plane_suite(cfg)?);
        }
        other => return Err(CliError::Usage(format!("unknown suite {other:?} (expected tree, plane or all)"))),
    }
    emit(out, &records)?;
    let failed: Vec<&Record> = records.iter().filter(|r| !r.pass).collect();
    let lines: Vec<String> = records
        .iter()
        .map(|r| format!("{} {:<20} {:<6} measured {} bound {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.backend, fmt_f64(r.measured), fmt_f64(r.bound)))
        .collect();
    if failed.is_empty() {
        Ok(lines.join("\n"))
    } else {
        println!("{}", lines.join("\n"));
        Err(CliError::Violation {
            summary: failed.iter().map(|r| r.id).collect::<Vec<_>>().join(", "),
            witness: serde_json::to_value(&failed).unwrap_or(Value::Null),
        })
    }
}

fn emit(out: &mut Output, records: &[Record]) -> Result<(), CliError> {
    let ids: Vec<&str> = records.iter().map(|r| r.id).collect();
    out.csv(
        "validate.csv",
        &ids,
        &["id", "backend", "measured", "bound", "pass", "detail"],
        records
            .iter()
            .map(|r| vec![r.id.into(), r.backend.into(), r.measured.into(), r.bound.into(), r.pass.into(), r.detail.clone().into()])
            .collect(),
    )?;
    out.json("validate.json", &ids, &json!({ "pass": records.iter().all(|r| r.pass), "records": records }))
}

fn travel_record(id: &'static str, backend: &'static str, r: &TravelReport) -> Record {
    let (dev, bound) = r.worst.as_ref().map_or((0.0, 0.0), |w| (w.deviation, w.bound));
    Record::new(
        id,
        backend,
        r.violations as f64,
        0.0,
        r.violations == 0,
        format!("{} pairs, worst deviation {dev:.6} against bound {bound:.6}", r.pairs),
    )
    .with_witness(r.worst.as_ref())
}

pub fn tree_suite(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let rank = tree_rank(cfg)?;
    let b = "tree";
    let h = ((2 * rank - 1) as f64).ln();
    let e = Word::identity();
    let group = Group::Free { rank };
    let mut out = Vec::new();

    // orbit growth: exact counts and C2/C1 over R in [4, 14]
    let grid: Vec<f64> = (0..=14).map(f64::from).collect();
    let census = counting::orbit_count(&group, &SpacePoint::Tree(e.clone()), &grid)?;
    let exact_ok = census.rows.iter().all(|r| r.count == tree::ball_size(rank, r.radius as usize));
    let (c1, c2) = counting::growth_constants(&census, h, 4.0, 14.0);
    out.push(Record::new("orbit-growth", b, c2 / c1, 50.0, exact_ok && c2 / c1 <= 50.0, format!("C1 = {c1:.6}, C2 = {c2:.6}, counts exact: {exact_ok}")));

    out.push(travel_record("fellow-traveling", b, &traveling::tree_segments(rank, 8, 2)));
    out.push(travel_record("asymptotic-rays", b, &traveling::tree_rays(rank, 2, &traveling::sample_tree_ends(rank), 12)));

    let sp = Space::tree(rank);
    let pts: Vec<Word> = tree::ball_enumerate(rank, 2).collect();
    let mut worst = (0.0f64, None);
    for xi in traveling::sample_tree_ends(rank) {
        let xi = BoundaryPoint::Tree(xi);
        for p in &pts {
            for q in &pts {
                for z in pts.iter().step_by(3) {
                    let d = sp.busemann_cocycle_check(&SpacePoint::Tree(p.clone()), &SpacePoint::Tree(q.clone()), &SpacePoint::Tree(z.clone()), &xi)?;
                    if d > worst.0 {
                        worst = (d, Some(json!({ "p": p.to_string(), "q": q.to_string(), "z": z.to_string(), "end": xi })));
                    }
                }
            }
        }
    }
    out.push(Record::at_most("busemann-cocycle", b, worst.0, 0.0, "cocycle defect over a ball of radius 2".into()).with_witness(worst.1.as_ref()));

    let s = h + 0.5;
    let mut mass_ok = true;
    for p in &pts {
        let m = ps::ps_measure(&group, &SpacePoint::Tree(p.clone()), &SpacePoint::Tree(e.clone()), s, 10.0)?;
        mass_ok &= ps::mass_within_bounds(&m, p.len() as f64).0;
    }
    out.push(Record::new("mass-bounds", b, if mass_ok { 1.0 } else { 0.0 }, 1.0, mass_ok, format!("total mass within exp(±s d) at s = {s:.6} for every base in a ball of radius 2")));

    for s in [h + 0.1, h + 2f64.ln(), 2.0 * h] {
        let r = ps::poincare_series(&group, s, &SpacePoint::Tree(e.clone()), &SpacePoint::Tree(e.clone()), 40.0)?;
        let gap = (r.closed_form.unwrap_or(f64::NAN) - r.partial).abs();
        out.push(Record::new("poincare-series", b, gap, r.tail_bound, gap <= r.tail_bound * (1.0 + 1e-9) + 1e-12, format!("s = {s:.6}, cap 40")));
    }

    let ball3: Vec<Word> = tree::ball_enumerate(rank, 3).collect();
    let conf = pst::conformal_check(rank, &ball3, 5)?;
    out.push(Record::new("conformal-density", b, conf.max_defect, 0.0, conf.exact, format!("{} comparisons on depth-5 cylinders, exact: {}", conf.cells, conf.exact)));

    let ratios = pst::shadow_ratios(rank, &e, 0.5, &tree_shadow_family(rank)?)?;
    let (lo, hi) = min_max(&ratios);
    out.push(Record::at_most("shadow-lemma", b, hi / lo, 2.0, format!("ratios in [{lo:.6}, {hi:.6}] for x = b a^n, n = 2..8")));

    let mut pair_worst = 0.0f64;
    let mut pair_exact = true;
    for g in (0..rank).map(|i| Word::identity().push(tree::Letter::generator(i))) {
        let r = pst::pair_invariance_check(rank, 4, &g)?;
        pair_worst = pair_worst.max(r.max_relative_defect);
        pair_exact &= r.exact;
    }
    out.push(Record::new("pair-invariance", b, pair_worst, 0.0, pair_exact, "generator pushforwards on depth-4 cylinders".into()));

    let gc = counting::geodesic_census(&group, 12.0)?;
    let ts: Vec<f64> = (4..=12).map(f64::from).collect();
    let a = counting::counting_constant(&gc, h, &ts);
    out.push(Record::at_most("counting-bounds", b, a, 5.0, format!("{} primitive classes to length 12", gc.entries.len())));

    let dm = validators::validate_d_mass(rank, &a_powers(rank, 3..=8)?, 4.5, 1.0)?;
    out.push(Record::new("dmass-lower", b, dm.spread, 2.0, dm.c_prime > 0.0 && dm.spread <= 2.0, format!("c' = {:.6} over x = a^3..a^8", dm.c_prime)));

    let x = word("a", rank)?.pow(20);
    let card: Vec<f64> = (5..=8)
        .map(|n| validators::validate_separated_bound(rank, &x, n, SEPARATION_RHO, 4.5, 1.0).map(|r| r.cardinality as f64))
        .collect::<Result<_, _>>()?;
    let (lo, hi) = min_max(&card);
    out.push(Record::at_most("separated-bound", b, hi / lo, 2.0, format!("cardinalities {card:?} for n = 5..8 at rho = {SEPARATION_RHO}")));

    let u = entropy::tree_universe(rank, 9, DEFAULT_WINDOW)?;
    let est = entropy::estimate_htop(&u, &(1..=8).collect::<Vec<_>>(), &[0.5], None)?;
    let fit = volume_entropy_fit(BackendKind::Tree, rank)?;
    out.push(Record::at_most("entropy-consistency", b, (est.h - fit).abs(), 0.1 * h, format!("h_top {:.6}, volume fit {fit:.6}", est.h)));
    Ok(out)
}

pub fn plane_suite(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let b = "plane";
    let v = &cfg.validate;
    let mut out = Vec::new();

    let (delta_hat, _) = plane::estimate_delta(v.delta_samples, 20.0, cfg.seed);
    let delta = if v.corrupt_delta { 0.0 } else { delta_hat };
    let (fresh, tri) = plane::estimate_delta(v.delta_samples / 2, 20.0, cfg.seed ^ 0x5eed);
    out.push(
        Record::at_most("thin-triangles", b, fresh, delta + 0.05, format!("fresh triangles against delta = {delta:.6} (estimated {delta_hat:.6}) plus 0.05"))
            .with_witness(Some(&tri)),
    );

    let seg = traveling::plane_segments(v.pairs, 6.0, 1.0, delta, 0.05, cfg.seed.wrapping_add(1))?;
    out.push(travel_record("fellow-traveling", b, &seg));
    let rays = traveling::plane_rays(v.pairs / 4, 3.0, delta, 20.0, 0.05, cfg.seed.wrapping_add(2))?;
    out.push(travel_record("asymptotic-rays", b, &rays));

    let sp = Space::plane();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let mut worst = (0.0f64, None);
    for _ in 0..2000 {
        let [p, q, z] = [0, 1, 2].map(|_| plane::sample_in_ball(&mut rng, 4.0));
        let xi = if rng.gen_bool(0.1) { PlaneEnd::Infinity } else { PlaneEnd::Finite(rng.gen_range(-5.0..5.0)) };
        let d = sp.busemann_cocycle_check(&SpacePoint::Plane(p), &SpacePoint::Plane(q), &SpacePoint::Plane(z), &BoundaryPoint::Plane(xi))?;
        if d > worst.0 {
            worst = (d, Some(json!({ "p": p, "q": q, "z": z, "end": xi })));
        }
    }
    out.push(Record::at_most("busemann-cocycle", b, worst.0, 1e-9, "2000 random triples and ends".into()).with_witness(worst.1.as_ref()));

    let base = modular_base();
    let group = Group::modular();
    let mut mass_ok = true;
    for p in [base, PlanePoint { x: 0.3, y: 1.5 }] {
        let m = ps::ps_measure(&group, &SpacePoint::Plane(p), &SpacePoint::Plane(base), 1.2, 8.0)?;
        mass_ok &= ps::mass_within_bounds(&m, p.dist(&base)).0;
    }
    out.push(Record::new("mass-bounds", b, if mass_ok { 1.0 } else { 0.0 }, 1.0, mass_ok, "total mass within exp(±s d) at s = 1.2, cap 8".into()));

    let atoms = psp::orbit_atoms(&base, 12.0);
    let set = psp::LimitSettings::for_atoms(&atoms);
    for q in modular_conformal_points() {
        let d256 = psp::conformal_check(&atoms, &base, &q, 256, &set)?.max_defect;
        let d512 = psp::conformal_check(&atoms, &base, &q, 512, &set)?.max_defect;
        out.push(Record::new(
            "conformal-density",
            b,
            d256,
            0.1,
            d256 < 0.1 && d512 <= d256,
            format!("q = ({}, {:.6}); defect {d256:.6} at 256 arcs, {d512:.6} at 512", q.x, q.y),
        ));
    }

    let rows = psp::shadow_ratios(&atoms, &base, 1.0, &modular_shadow_family(), &set)?;
    let bb = rows.iter().map(|r| r.ratio.max(1.0 / r.ratio)).fold(1.0, f64::max);
    let resolved = rows.iter().all(|r| r.mass.resolved);
    out.push(Record::new("shadow-lemma", b, bb, 20.0, bb <= 20.0 && resolved, format!("ratios within [1/b, b]; every shadow resolved: {resolved}")));

    let pm = psp::PairMeasure::build(&atoms, 256, 8, &set, 1e6)?;
    let pi = psp::pair_invariance_check(&pm, &base, &translation());
    out.push(Record::at_most("pair-invariance", b, pi.max_relative_defect, 0.05, format!("z -> z+1 on 256 arcs, {} pairs", pi.pairs)));

    let gc = counting::geodesic_census(&group, 10.0)?;
    for t in [8.0, 9.0, 10.0] {
        let r = counting::margulis_ratio(&gc, 1.0, t)?;
        out.push(Record::new("margulis-band", b, r, 1.5, (0.6..=1.5).contains(&r), format!("P(T) T / e^T at T = {t} in [0.6, 1.5]")));
    }

    let eq = equidist::equidistribution_test(10.0, &equidist::standard_cells(), 0.01)?;
    out.push(Record::at_most("equidistribution", b, eq.max_gap(), 0.08, format!("{} classes to T = 10, 16 cells", eq.classes)));
    Ok(out)
}

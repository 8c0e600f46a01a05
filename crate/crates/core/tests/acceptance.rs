//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Built without the libtest harness so the report is always printed.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use common::{brute_force_front, published_record, PUBLISHED};
use loadsim_core::analysis::{pareto_indices, select_poi, trend_tests};
use loadsim_core::config::{
    build_parameter_grid, enumerate_campaign, subsample_grid, reference_alpha_values, ActionParams, CampaignManifest,
    ControlConstants, MachineSpec, PileSpec, SoilSpec,
};
use loadsim_core::controller::{EventKind, Phase};
use loadsim_core::sim::{run_loading_cycle, run_loading_cycle_with, LoadingRecord, RunOptions};
use loadsim_core::sweep::{execute_campaign, throughput_report, ExecOptions, ResultStore};
use loadsim_core::terrain::{n_c_at, n_gamma_at, passive_wedge_coefficients};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criteria that fail with the current model; see the project notes.
const KNOWN_FAILURES: &[u32] = &[5];
const SUBSAMPLE: usize = 1000;
const SUBSAMPLE_SEED: u64 = 1;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, title: &str, pass: bool, detail: String) -> Outcome {
    println!("criterion {id:>2} [{}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn grid() -> Vec<ActionParams> {
    build_parameter_grid(&reference_alpha_values()).unwrap()
}

fn grid_fidelity() -> Outcome {
    let t = Instant::now();
    let g = grid();
    let manifest = enumerate_campaign(&PileSpec::reference_piles(), &g, &MachineSpec::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    report(
        1,
        "grid fidelity",
        g.len() == 45_000 && manifest.len() == 270_000 && secs < 1.0,
        format!("{} actions, {} manifest rows in {secs:.2} s (want 45000, 270000, < 1 s)", g.len(), manifest.len()),
    )
}

fn metric_arithmetic() -> Outcome {
    let worst = PUBLISHED
        .iter()
        .map(|r| {
            let rec = published_record(r);
            let p_p = rec.m_load / rec.t_load;
            (p_p - r.p_p).abs() / r.p_p
        })
        .fold(0.0, f64::max);
    report(
        2,
        "metric arithmetic vs published rows",
        worst <= 0.015,
        format!("12 rows, worst relative P_p deviation {:.3}% (tolerance 1.5%)", worst * 100.0),
    )
}

fn conservation() -> Outcome {
    let pile = PileSpec::new(SoilSpec::gravel(), 30.0).unwrap();
    let actions = subsample_grid(&grid(), 100, 3);
    let (machine, control) = (MachineSpec::default(), ControlConstants::default());
    let (mass, work) = actions
        .par_iter()
        .map(|a| {
            let out = run_loading_cycle_with(&pile, &machine, a, &control, 0, RunOptions { log_series: true });
            let w = out.series.as_ref().unwrap().reintegrate_work();
            let rel = if out.record.work > 0.0 { (w - out.record.work).abs() / out.record.work } else { w.abs() };
            (out.max_conservation_error, rel)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    report(
        3,
        "conservation",
        mass <= 1e-9 && work <= 1e-6,
        format!("100 actions on gravel-30: worst per-step mass error {mass:.2e} (<= 1e-9), worst work error {work:.2e} (<= 1e-6)"),
    )
}

fn campaign_csv(manifest: &CampaignManifest, options: ExecOptions, resume_dir: Option<&std::path::Path>) -> (String, f64) {
    let dir = tempfile::tempdir().unwrap();
    let path = resume_dir.unwrap_or(dir.path());
    let (machine, control) = (MachineSpec::default(), ControlConstants::default());
    let mut store = ResultStore::open(path, manifest, resume_dir.is_some()).unwrap();
    let summary = execute_campaign(manifest, &machine, &control, options, &mut store).unwrap();
    let rate = throughput_report(&summary).runs_per_core_hour;
    (summary.results.map(|p| fs::read_to_string(p).unwrap()).unwrap_or_default(), rate)
}

fn determinism() -> (Outcome, f64) {
    let piles = PileSpec::reference_piles();
    let actions = subsample_grid(&grid(), 50, 5);
    let manifest = enumerate_campaign(&piles[..4], &actions, &MachineSpec::default()).unwrap();
    let (one, rate) = campaign_csv(&manifest, ExecOptions::workers(1), None);
    let (two, _) = campaign_csv(&manifest, ExecOptions::workers(2), None);
    let (eight, _) = campaign_csv(&manifest, ExecOptions::workers(8), None);

    let dir = tempfile::tempdir().unwrap();
    let (partial, _) = campaign_csv(&manifest, ExecOptions { workers: 2, limit: Some(77) }, Some(dir.path()));
    let (resumed, _) = campaign_csv(&manifest, ExecOptions::workers(3), Some(dir.path()));

    let rows = one.lines().count() - 1;
    let pass = rows == 200 && one == two && one == eight && partial.is_empty() && one == resumed;
    let outcome = report(
        4,
        "determinism and scheduling independence",
        pass,
        format!(
            "{rows} runs; workers 1/2/8 identical: {}; kill after 77 + resume identical: {}",
            one == two && one == eight,
            one == resumed
        ),
    );
    (outcome, rate)
}

fn slope_subsample() -> Vec<LoadingRecord> {
    let actions = subsample_grid(&grid(), SUBSAMPLE, SUBSAMPLE_SEED);
    let (machine, control) = (MachineSpec::default(), ControlConstants::default());
    let piles: Vec<PileSpec> = [10.0, 20.0, 30.0, 40.0]
        .into_iter()
        .map(|s| PileSpec::new(SoilSpec::gravel(), s).unwrap())
        .collect();
    let jobs: Vec<(&PileSpec, &ActionParams)> = piles.iter().flat_map(|p| actions.iter().map(move |a| (p, a))).collect();
    jobs.par_iter().map(|(p, a)| run_loading_cycle(p, &machine, a, &control, 0)).collect()
}

fn trend_slope(records: &[LoadingRecord], secs: f64) -> Outcome {
    let report_ = trend_tests(records);
    let medians: Vec<String> = report_
        .slope_medians
        .iter()
        .filter(|m| m.soil == "gravel")
        .map(|m| format!("{}°: {:.1} kg", m.slope_deg, m.median_m_load))
        .collect();
    report(
        5,
        "trend A, median load strictly increasing with slope",
        report_.mass_increases_with_slope("gravel") == Some(true),
        format!("{SUBSAMPLE} actions per slope in {secs:.0} s; {}", medians.join(", ")),
    )
}

fn trend_speed(records: &[LoadingRecord]) -> Outcome {
    let gravel30: Vec<LoadingRecord> = records.iter().filter(|r| r.pile == "gravel-30").cloned().collect();
    let report_ = trend_tests(&gravel30);
    let s = report_.speed_for("gravel-30").unwrap();
    report(
        6,
        "trend B, dig speed vs efficiency and productivity",
        s.rho_pe < 0.0 && s.rho_pp > 0.0,
        format!(
            "gravel-30, {} finished runs: rho(alpha2, P_e) = {:+.3} (want < 0), rho(alpha2, P_p) = {:+.3} (want > 0)",
            s.runs, s.rho_pe, s.rho_pp
        ),
    )
}

fn pareto_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=1000);
        let coarse = rng.gen_bool(0.5);
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                if coarse {
                    (rng.gen_range(0..40) as f64 * 10.0, rng.gen_range(0..40) as f64 * 0.5)
                } else {
                    (rng.gen_range(0.0..700.0), rng.gen_range(0.0..15.0))
                }
            })
            .collect();
        let mut got = pareto_indices(&points);
        got.sort_unstable();
        if got != brute_force_front(&points) {
            mismatches += 1;
        }
    }
    let gravel: Vec<LoadingRecord> = PUBLISHED.iter().filter(|r| r.soil == "gravel").map(published_record).collect();
    let poi = select_poi(&gravel).unwrap();
    let marks = [
        poi.best_efficiency.run_id.as_str(),
        poi.best_productivity.run_id.as_str(),
        poi.pareto_choice.run_id.as_str(),
        poi.best_mass.run_id.as_str(),
    ];
    let recovered = marks == ["efficiency", "productivity", "pareto", "mass"];
    report(
        7,
        "Pareto correctness",
        mismatches == 0 && recovered,
        format!("100 random instances (<= 1000 points), {mismatches} oracle mismatches; published gravel marks recovered: {recovered}"),
    )
}

fn wedge_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for phi in [25.0, 30.0, 35.0, 40.0, 45.0] {
        for rake in [20.0, 35.0, 50.0, 65.0, 85.0] {
            let delta = phi * 2.0 / 3.0;
            let fast = passive_wedge_coefficients(phi, delta, rake).unwrap();
            let (mut ng, mut nc) = (f64::INFINITY, f64::INFINITY);
            for k in 1..90_000 {
                let rho = k as f64 * 0.001;
                if let Some(v) = n_gamma_at(phi, delta, rake, rho) {
                    ng = ng.min(v);
                }
                if let Some(v) = n_c_at(phi, delta, rake, rho) {
                    nc = nc.min(v);
                }
            }
            worst = worst.max((fast.n_gamma - ng).abs() / ng).max((fast.n_c - nc).abs() / nc);
        }
    }
    report(
        8,
        "wedge coefficient oracle",
        worst <= 1e-3,
        format!("5x5 (phi, rake) grid vs 0.001° scan: worst relative deviation {worst:.2e} (<= 1e-3)"),
    )
}

fn controller_conformance() -> Outcome {
    let pile = PileSpec::new(SoilSpec::gravel(), 30.0).unwrap();
    let action = ActionParams::from_f64([0.6, 0.4, 0.0, 0.0, 0.6, 0.6, -20.0, 45.0]).unwrap();
    let (machine, control) = (MachineSpec::default(), ControlConstants::default());
    let out = run_loading_cycle_with(&pile, &machine, &action, &control, 0, RunOptions { log_series: true });
    let at = |kind: EventKind| out.events.iter().find(|e| e.kind == kind).map(|e| e.t);
    let contact = at(EventKind::Contact);
    let latched = contact.is_some() && at(EventKind::LiftLatched) == contact && at(EventKind::TiltLatched) == contact;
    let series = out.series.as_ref().unwrap();
    let brake_rows = series.rows.iter().filter(|r| r.phase == Phase::Brake).count();
    let final_x = series.rows.last().unwrap().x;
    let reversed = out.controller.entry_x.unwrap() - final_x;
    let done = at(EventKind::Enter(Phase::Done)).is_some();
    report(
        9,
        "controller conformance",
        latched && brake_rows == 100 && done && (5.0..=5.05).contains(&reversed),
        format!("both latches at first contact: {latched}; brake {brake_rows} steps (want 100); reversed {reversed:.4} m (want 5 to 5.05)"),
    )
}

fn throughput(rate: f64) -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut detail = format!("{rate:.0} runs per core-hour on 1 worker (floor 2000)");
    let mut pass = rate >= 2000.0;
    if cores >= 4 {
        let actions = subsample_grid(&grid(), 200, 9);
        let pile = vec![PileSpec::new(SoilSpec::gravel(), 30.0).unwrap()];
        let manifest = enumerate_campaign(&pile, &actions, &MachineSpec::default()).unwrap();
        let wall = |workers| {
            let dir = tempfile::tempdir().unwrap();
            let mut store = ResultStore::create(dir.path(), &manifest).unwrap();
            let s = execute_campaign(
                &manifest,
                &MachineSpec::default(),
                &ControlConstants::default(),
                ExecOptions::workers(workers),
                &mut store,
            )
            .unwrap();
            s.wall.as_secs_f64()
        };
        let speedup = wall(1) / wall(4);
        pass &= speedup >= 3.0;
        detail += &format!("; 1->4 worker speed-up {speedup:.2} (want >= 3)");
    } else {
        detail += &format!("; scaling check skipped on a {cores}-core host");
    }
    report(10, "throughput", pass, detail)
}

fn main() {
    let mut outcomes = vec![grid_fidelity(), metric_arithmetic(), conservation()];
    let (det, rate) = determinism();
    outcomes.push(det);
    let t = Instant::now();
    let records = slope_subsample();
    let secs = t.elapsed().as_secs_f64();
    outcomes.push(trend_slope(&records, secs));
    outcomes.push(trend_speed(&records));
    outcomes.push(pareto_correctness());
    outcomes.push(wedge_oracle());
    outcomes.push(controller_conformance());
    outcomes.push(throughput(rate));

    let failed: BTreeMap<u32, &str> = outcomes.iter().filter(|o| !o.pass).map(|o| (o.id, o.detail.as_str())).collect();
    let passed = outcomes.len() - failed.len();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    for id in KNOWN_FAILURES {
        if failed.contains_key(id) {
            println!("criterion {id:>2} is a known failure of the current model");
        } else {
            println!("criterion {id:>2} is listed as a known failure but now passes");
        }
    }
    let unexpected: Vec<_> = failed.iter().filter(|(id, _)| !KNOWN_FAILURES.contains(id)).collect();
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}

use loadsim_core::config::{
    build_parameter_grid, subsample_grid, reference_alpha_values, ActionParams, ControlConstants, MachineSpec, PileSpec,
    SoilSpec,
};
use loadsim_core::controller::EventKind;
use loadsim_core::sim::{run_loading_cycle, run_loading_cycle_with, Flag, RunOptions, RunOutput};

fn gravel(slope: f64) -> PileSpec {
    PileSpec::new(SoilSpec::gravel(), slope).unwrap()
}

fn aggressive() -> ActionParams {
    ActionParams::from_f64([0.8, 0.6, 0.0, 0.0, 1.0, 1.0, -10.0, 45.0]).unwrap()
}

fn logged(pile: &PileSpec, action: &ActionParams) -> RunOutput {
    run_loading_cycle_with(
        pile,
        &MachineSpec::default(),
        action,
        &ControlConstants::default(),
        0,
        RunOptions { log_series: true },
    )
}

#[test]
fn aggressive_action_loads_gravel() {
    let out = logged(&gravel(30.0), &aggressive());
    let r = &out.record;
    assert!(r.m_load > 0.0);
    assert!((5.0..=40.0).contains(&r.t_load), "t_load {}", r.t_load);
    assert!(out.max_conservation_error <= 1e-9);
    assert!(r.flag.is_finished());
    assert!(out.pile.conservation_error() <= 1e-9);
}

#[test]
fn identical_inputs_give_identical_logs() {
    let a = logged(&gravel(30.0), &aggressive());
    let b = logged(&gravel(30.0), &aggressive());
    assert_eq!(a.record, b.record);
    assert_eq!(a.series.unwrap().to_csv(), b.series.unwrap().to_csv());
    let plain = run_loading_cycle(&gravel(30.0), &MachineSpec::default(), &aggressive(), &ControlConstants::default(), 0);
    assert_eq!(plain, a.record);
}

#[test]
fn logged_forces_and_speeds_respect_limits() {
    let m = MachineSpec::default();
    let out = logged(&gravel(40.0), &aggressive());
    let (drive, lift, tilt) = (m.drive_limits(), m.lift_limits(), m.tilt_limits());
    for row in &out.series.unwrap().rows {
        assert!(row.f_drive.abs() <= m.traction_limit());
        assert!(row.f_lift.abs() <= lift.force_limit);
        assert!(row.f_tilt.abs() <= tilt.force_limit);
        assert!(row.v >= drive.speed_min && row.v <= drive.speed_max);
        assert!(row.omega_boom >= lift.speed_min && row.omega_boom <= lift.speed_max);
        assert!(row.omega_bucket >= tilt.speed_min && row.omega_bucket <= tilt.speed_max);
    }
}

#[test]
fn work_matches_reintegrated_power() {
    let out = logged(&gravel(30.0), &aggressive());
    let series = out.series.unwrap();
    let w = series.reintegrate_work();
    assert!((w - out.record.work).abs() <= 1e-6 * out.record.work, "{w} vs {}", out.record.work);
    assert!(series.to_csv().starts_with("t,x,v,theta_boom,theta_bucket,F_drive,F_lift,F_tilt,F_dig,W_accum,load_mass,phase\n"));
}

#[test]
fn empty_pile_loads_nothing_and_reverses_out() {
    let mut pile = gravel(30.0);
    pile.crest_height = 0.0;
    let out = logged(&pile, &aggressive());
    assert_eq!(out.record.m_load, 0.0);
    assert_eq!(out.record.p_p, 0.0);
    assert!(out.record.flag.is_finished(), "{:?}", out.record.flag);
    assert!(out.events.iter().any(|e| e.kind == EventKind::Enter(loadsim_core::controller::Phase::Done)));
}

#[test]
fn sampled_actions_terminate_with_consistent_metrics() {
    let grid = build_parameter_grid(&reference_alpha_values()).unwrap();
    for action in subsample_grid(&grid, 12, 99) {
        for slope in [10.0, 40.0] {
            let out = logged(&gravel(slope), &action);
            let r = &out.record;
            assert!(out.end_time <= 120.0 + 1e-9);
            assert!(r.flag != Flag::NumericError);
            assert!(r.t_load < out.end_time, "t_load {} vs cycle {}", r.t_load, out.end_time);
            assert!(out.max_conservation_error <= 1e-9);
            if r.m_load > 0.0 {
                assert!((r.p_e * r.work - r.m_load).abs() <= 1e-12 * r.m_load);
                assert!((r.p_p * r.t_load - r.m_load).abs() <= 1e-12 * r.m_load);
            }
            for v in [r.m_load, r.t_load, r.work, r.s_load, r.p_e, r.p_p, r.p_b] {
                assert!(v.is_finite() && v >= 0.0);
            }
        }
    }
}

//! End-to-end checks across the integrator, contact model and harness.

use std::fs;
use std::path::Path;

use softsnake::gaits::{GaitKind, GaitSpec};
use softsnake::harness::output::{self, read_table};
use softsnake::harness::{
    export_plots, run_drop_test, run_gait, run_gait_from, DropRun, ExperimentConfig,
};
use softsnake::integrator::{integrate, rhs, Model};
use softsnake::RobotParams;

fn settled() -> DropRun {
    let cfg = ExperimentConfig {
        settle_time: 1.0,
        ..Default::default()
    };
    let run = run_drop_test(&cfg, None).unwrap();
    assert!(run.report.settled, "{:?}", run.report);
    run
}

#[test]
fn settled_state_stays_put() {
    let run = settled();
    let cfg = ExperimentConfig::default();
    let model = Model {
        params: cfg.robot.clone(),
        grid: cfg.skin_grid().unwrap(),
        contact: true,
    };
    let start = &run.trajectory.final_state;
    let tr = integrate(start, &|_| [0.0; 9], 1.0, &cfg.integrator, &model).unwrap();
    let drift = (tr.final_state.q - start.q).rows(0, 3).amax();
    assert!(drift < 1e-4, "base drifted {drift} m");
    assert!(tr.final_state.qdot.amax() < 1e-3);
    // residual accelerations at rest are tiny
    let f = rhs(&tr.final_state, &[0.0; 9], &model).unwrap();
    assert!(f.rows(15, 15).amax() < 1e-2, "{}", f.rows(15, 15).amax());
}

#[test]
fn stiffer_ground_penetrates_less() {
    let soft = settled().report.final_min_z;
    let mut cfg = ExperimentConfig {
        settle_time: 1.0,
        ..Default::default()
    };
    cfg.robot.ground_stiffness *= 10.0;
    let hard = run_drop_test(&cfg, None).unwrap().report.final_min_z;
    assert!(soft < 0.0 && hard < 0.0);
    let ratio = soft / hard;
    assert!((5.0..20.0).contains(&ratio), "soft {soft}, hard {hard}");
}

#[test]
fn no_contact_means_free_fall() {
    let cfg = ExperimentConfig {
        contact: false,
        settle_time: 0.3,
        ..Default::default()
    };
    let r = run_drop_test(&cfg, None).unwrap().report;
    assert!(r.free_fall && !r.settled);
    // z = 0.6 - g t^2 / 2 at the base origin; the rolled ring puts its two
    // lowest samples r_s cos(π / n_radial) below the axis
    let half_gap = std::f64::consts::PI / cfg.grid.n_radial as f64;
    let want = 0.6 - 0.5 * 9.81 * 0.09 - cfg.robot.r_s * half_gap.cos();
    assert!((r.final_min_z - want).abs() < 1e-3, "{}", r.final_min_z);
}

#[test]
fn zero_amplitude_gait_does_not_move() {
    let run = settled();
    let mut spec = GaitSpec::planar();
    spec.amplitude = 0.0;
    spec.frequency = 1.0;
    spec.duration = 4.0;
    let cfg = ExperimentConfig {
        gait: Some(spec),
        ..Default::default()
    };
    let tr = run_gait_from(&cfg, &run.trajectory.final_state).unwrap();
    let m = softsnake::harness::compute_metrics(&tr, cfg.gait.as_ref().unwrap()).unwrap();
    assert!(m.vx_cm_s.abs() < 1e-3 && m.vy_cm_s.abs() < 1e-3, "{m:?}");
    assert!(m.net_displacement_m < 1e-4);
}

fn short_gait_config(dir: &Path) -> ExperimentConfig {
    let mut spec = GaitSpec::new(GaitKind::SpatialRolling);
    spec.frequency = 2.0;
    spec.duration = 2.0;
    ExperimentConfig {
        settle_time: 0.5,
        output_dir: dir.to_path_buf(),
        gait: Some(spec),
        ..Default::default()
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn gait_outputs_are_complete_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = short_gait_config(a.path());
    let run = run_gait(&cfg, Some(a.path())).unwrap();
    run_gait(&short_gait_config(b.path()), Some(b.path())).unwrap();

    for name in [
        output::BASE_POSE,
        output::JOINTS,
        output::CONTACTS,
        output::XY_PROJECTION,
        output::DROP_Z,
        output::METRICS,
        output::DROP_REPORT,
    ] {
        assert!(a.path().join(name).exists(), "{name} missing");
    }

    let (header, rows) = read_table(&a.path().join(output::BASE_POSE)).unwrap();
    assert_eq!(rows.len(), 61);
    assert!(header.iter().all(|h| h.contains('[')), "{header:?}");
    assert!((rows[60][0] - rows[0][0] - 2.0).abs() < 1e-12);
    let (header, rows) = read_table(&a.path().join(output::JOINTS)).unwrap();
    assert_eq!(header.len(), 19);
    assert_eq!(header[18], "P_33 [bar]");
    assert!(rows.iter().all(|r| r[10..].iter().all(|p| (0.0..=3.0 + 1e-12).contains(p))));
    let (_, rows) = read_table(&a.path().join(output::XY_PROJECTION)).unwrap();
    assert_eq!(rows.len(), 61 * output::XY_POINTS);
    let (_, rows) = read_table(&a.path().join(output::CONTACTS)).unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r[3] >= 0.0));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join(output::METRICS)).unwrap()).unwrap();
    assert_eq!(json["kind"], "spatial_rolling");
    assert_eq!(json["vx_cm_s"].as_f64().unwrap(), run.metrics.vx_cm_s);

    // the robot never sinks through the floor while rolling
    let (_, pts) = softsnake::contact::contact_wrench(
        &run.gait.final_state.joint_state(),
        &run.gait.final_state.qdot,
        &cfg.skin_grid().unwrap(),
        &cfg.robot,
    )
    .unwrap();
    assert!(pts.iter().all(|c| c.p.z > -0.02));

    assert_eq!(read_all(a.path()), read_all(b.path()));

    let svgs = export_plots(a.path()).unwrap();
    assert_eq!(svgs.len(), 7);
    export_plots(b.path()).unwrap();
    assert_eq!(read_all(a.path()), read_all(b.path()));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let cfg = short_gait_config(Path::new("results"));
    fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
    fs::write(&path, "[robot]\nm_total = -1.0\n").unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
}

#[test]
fn drop_without_gait_rejects_gait_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        robot: RobotParams::default(),
        ..Default::default()
    };
    assert!(run_gait(&cfg, Some(dir.path())).is_err());
}

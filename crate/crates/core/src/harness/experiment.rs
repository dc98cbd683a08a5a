use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::contact_wrench;
use crate::error::{domain, Result};
use crate::gaits::{gait_pressures, GaitSpec};
use crate::integrator::{integrate, IntegratorStats, Model, SimState, Trajectory};
use crate::kinematics::{JointState, SkinGrid};
use crate::params::RobotParams;

use super::config::ExperimentConfig;
use super::metrics::{compute_metrics, GaitMetrics};
use super::output;

/// Skin velocity below which the robot counts as settled, m/s.
pub const SETTLE_SPEED: f64 = 1e-3;

/// Extremes of the skin grid at one output sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinSample {
    pub t: f64,
    pub z_base: f64,
    pub min_z: f64,
    pub max_abs_zdot: f64,
}

pub fn skin_sample(s: &SimState, grid: &SkinGrid, params: &RobotParams) -> Result<SkinSample> {
    let (_, pts) = contact_wrench(&s.joint_state(), &s.qdot, grid, params)?;
    Ok(SkinSample {
        t: s.t,
        z_base: s.q[2],
        min_z: pts.iter().map(|c| c.p.z).fold(f64::INFINITY, f64::min),
        max_abs_zdot: pts.iter().map(|c| c.v.z.abs()).fold(0.0, f64::max),
    })
}

/// Release pose: body axis along world X, lengths at rest.
///
/// The roll angle puts two neighbouring skin rows level at the bottom, so the
/// sampled skin lands on a flat face instead of balancing on one row.
pub fn drop_pose(cfg: &ExperimentConfig) -> SimState {
    let roll = PI / cfg.grid.n_radial as f64;
    let q = JointState::new([0.0, 0.0, cfg.drop_height, roll, FRAC_PI_2, 0.0], [0.0; 9]);
    SimState::at_rest(0.0, q)
}

pub fn model(cfg: &ExperimentConfig) -> Result<Model> {
    Ok(Model {
        params: cfg.robot.clone(),
        grid: cfg.skin_grid()?,
        contact: cfg.contact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub settled: bool,
    /// No skin point ever touched the ground.
    pub free_fall: bool,
    /// First sample time after which every skin point stays below the settle speed, s.
    pub settle_time: Option<f64>,
    pub final_min_z: f64,
    /// Lowest skin point at or after the settle time, m.
    pub min_z_after_settle: Option<f64>,
    /// Penetration if the whole weight rested on one ground spring, m.
    pub static_penetration: f64,
    pub final_max_abs_zdot: f64,
    pub duration: f64,
    pub stats: IntegratorStats,
}

#[derive(Clone, Debug)]
pub struct DropRun {
    pub report: DropReport,
    pub trajectory: Trajectory,
    pub series: Vec<SkinSample>,
}

/// Release from `drop_height` with zero pressure for `settle_time` seconds.
///
/// Writes `drop_z.csv` and `drop_report.json` when `out` is given.
pub fn run_drop_test(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<DropRun> {
    cfg.validate()?;
    let model = model(cfg)?;
    let tr = integrate(&drop_pose(cfg), &|_| [0.0; 9], cfg.settle_time, &cfg.integrator, &model)?;
    let series = tr
        .samples
        .iter()
        .map(|s| skin_sample(s, &model.grid, &cfg.robot))
        .collect::<Result<Vec<_>>>()?;
    let touched = series.iter().any(|s| s.min_z < 0.0);
    let mut settle_idx = None;
    for k in (0..series.len()).rev() {
        if series[k].max_abs_zdot < SETTLE_SPEED && touched {
            settle_idx = Some(k);
        } else {
            break;
        }
    }
    let last = series.last().expect("at least one sample");
    let report = DropReport {
        settled: settle_idx.is_some(),
        free_fall: !touched,
        settle_time: settle_idx.map(|k| series[k].t),
        final_min_z: last.min_z,
        min_z_after_settle: settle_idx
            .map(|k| series[k..].iter().map(|s| s.min_z).fold(f64::INFINITY, f64::min)),
        static_penetration: cfg.robot.static_penetration(),
        final_max_abs_zdot: last.max_abs_zdot,
        duration: cfg.settle_time,
        stats: tr.stats,
    };
    if let Some(dir) = out {
        output::write_drop_series(&dir.join(output::DROP_Z), &series)?;
        output::write_json(&dir.join(output::DROP_REPORT), &report)?;
    }
    Ok(DropRun {
        report,
        trajectory: tr,
        series,
    })
}

#[derive(Clone, Debug)]
pub struct GaitRun {
    pub spec: GaitSpec,
    /// Drop and settle segment; empty when started from a given state.
    pub settle: Option<Trajectory>,
    pub gait: Trajectory,
    pub metrics: GaitMetrics,
}

fn gait_spec(cfg: &ExperimentConfig) -> Result<&GaitSpec> {
    cfg.gait
        .as_ref()
        .ok_or_else(|| domain("config has no [gait] table"))
}

/// Run the configured gait from `start`; gait time zero is `start.t`.
pub fn run_gait_from(cfg: &ExperimentConfig, start: &SimState) -> Result<Trajectory> {
    cfg.validate()?;
    let spec = gait_spec(cfg)?;
    let model = model(cfg)?;
    let t0 = start.t;
    let params = &cfg.robot;
    let control = |t: f64| {
        gait_pressures(spec, (t - t0).max(0.0), params).expect("validated gait lengths lie in [0, dl_max]")
    };
    integrate(start, &control, spec.duration, &cfg.integrator, &model)
}

/// Drop, settle for `settle_time`, then run the gait.
///
/// Writes the series CSVs and `metrics.json` when `out` is given.
pub fn run_gait(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<GaitRun> {
    let spec = gait_spec(cfg)?.clone();
    let drop = run_drop_test(cfg, out)?;
    let gait = run_gait_from(cfg, &drop.trajectory.final_state)?;
    finish_gait(cfg, spec, Some(drop.trajectory), gait, out)
}

/// Metrics and outputs for a gait trajectory.
pub fn finish_gait(
    cfg: &ExperimentConfig,
    spec: GaitSpec,
    settle: Option<Trajectory>,
    gait: Trajectory,
    out: Option<&Path>,
) -> Result<GaitRun> {
    let metrics = compute_metrics(&gait, &spec)?;
    if let Some(dir) = out {
        let t0 = gait.samples[0].t;
        output::write_base_pose(&dir.join(output::BASE_POSE), &gait.samples)?;
        output::write_joints(&dir.join(output::JOINTS), &gait.samples, Some((&spec, t0)), &cfg.robot)?;
        output::write_contacts(&dir.join(output::CONTACTS), &gait)?;
        output::write_xy_projection(&dir.join(output::XY_PROJECTION), &gait.samples, &cfg.robot)?;
        output::write_json(&dir.join(output::METRICS), &metrics)?;
    }
    Ok(GaitRun {
        spec,
        settle,
        gait,
        metrics,
    })
}

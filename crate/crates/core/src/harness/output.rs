//! Series CSV files. Rows are time-major and every header cell carries its
//! unit in brackets.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gaits::{gait_pressures, GaitSpec};
use crate::integrator::{SimState, Trajectory};
use crate::kinematics::backbone_points;
use crate::params::RobotParams;

use super::experiment::SkinSample;

pub const BASE_POSE: &str = "base_pose.csv";
pub const JOINTS: &str = "joints.csv";
pub const CONTACTS: &str = "contacts.csv";
pub const XY_PROJECTION: &str = "xy_projection.csv";
pub const DROP_Z: &str = "drop_z.csv";
pub const METRICS: &str = "metrics.json";
pub const DROP_REPORT: &str = "drop_report.json";

/// Backbone points per sample in the X-Y projection.
pub const XY_POINTS: usize = 31;

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

pub fn write_table<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Header and numeric rows of a CSV written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn names(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn pma_columns(prefix: &str, unit: &str) -> Vec<String> {
    (0..9)
        .map(|k| format!("{prefix}_{}{} [{unit}]", k / 3 + 1, k % 3 + 1))
        .collect()
}

pub fn write_base_pose(path: &Path, samples: &[SimState]) -> Result<()> {
    let header = names(&[
        "t [s]",
        "x [m]",
        "y [m]",
        "z [m]",
        "alpha [rad]",
        "beta [rad]",
        "gamma [rad]",
    ]);
    write_table(
        path,
        &header,
        samples
            .iter()
            .map(|s| std::iter::once(s.t).chain(s.q.iter().take(6).copied()).collect()),
    )
}

/// Simulated length changes, plus commanded pressures when a gait is given.
pub fn write_joints(
    path: &Path,
    samples: &[SimState],
    gait: Option<(&GaitSpec, f64)>,
    params: &RobotParams,
) -> Result<()> {
    let mut header = vec!["t [s]".to_string()];
    header.extend(pma_columns("l", "m"));
    if gait.is_some() {
        header.extend(pma_columns("P", "bar"));
    }
    let mut rows = Vec::with_capacity(samples.len());
    for s in samples {
        let mut row: Vec<f64> = std::iter::once(s.t).chain(s.q.iter().skip(6).copied()).collect();
        if let Some((spec, t0)) = gait {
            row.extend(gait_pressures(spec, s.t - t0, params)?);
        }
        rows.push(row);
    }
    write_table(path, &header, rows)
}

pub fn write_contacts(path: &Path, traj: &Trajectory) -> Result<()> {
    let header = names(&["t [s]", "xi [-]", "sigma [rad]", "F_z [N]"]);
    let rows = traj
        .samples
        .iter()
        .zip(&traj.contacts)
        .flat_map(|(s, cs)| cs.iter().map(move |c| vec![s.t, c.xi, c.sigma, c.fz]));
    write_table(path, &header, rows)
}

pub fn write_xy_projection(path: &Path, samples: &[SimState], params: &RobotParams) -> Result<()> {
    let header = names(&["t [s]", "xi [-]", "x [m]", "y [m]"]);
    let mut rows = Vec::with_capacity(samples.len() * XY_POINTS);
    for s in samples {
        let pts = backbone_points(&s.joint_state(), XY_POINTS, params)?;
        for (k, p) in pts.iter().enumerate() {
            let xi = 3.0 * k as f64 / (XY_POINTS - 1) as f64;
            rows.push(vec![s.t, xi, p[0], p[1]]);
        }
    }
    write_table(path, &header, rows)
}

pub fn write_drop_series(path: &Path, series: &[SkinSample]) -> Result<()> {
    let header = names(&["t [s]", "z_base [m]", "min_z [m]", "max_abs_zdot [m/s]"]);
    write_table(
        path,
        &header,
        series.iter().map(|s| vec![s.t, s.z_base, s.min_z, s.max_abs_zdot]),
    )
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}


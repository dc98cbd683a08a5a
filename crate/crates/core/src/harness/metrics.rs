use serde::{Deserialize, Serialize};

use crate::contact::ContactSample;
use crate::error::{domain, Result};
use crate::gaits::{GaitKind, GaitSpec};
use crate::integrator::Trajectory;

/// Locomotion summary of one gait run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitMetrics {
    pub kind: GaitKind,
    pub amplitude_m: f64,
    pub frequency_hz: f64,
    pub phase_shift_rad: f64,
    /// Mean base-origin velocity along world X, cm/s.
    pub vx_cm_s: f64,
    /// Mean base-origin velocity along world Y, cm/s.
    pub vy_cm_s: f64,
    /// Straight-line base displacement from gait start to end, m.
    pub net_displacement_m: f64,
    /// Whole cycles inside the fit window.
    pub cycles: usize,
    /// Fit window relative to gait start, s.
    pub window_s: [f64; 2],
    /// Per-sample contact maps. Written separately as `contacts.csv`.
    #[serde(skip)]
    pub contact_history: Vec<Vec<ContactSample>>,
}

/// Least-squares base velocity over whole cycles after the first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityFit {
    pub vx: f64,
    pub vy: f64,
    pub cycles: usize,
    pub window: [f64; 2],
}

fn slope(t: &[f64], v: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let vm = v.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in t.iter().zip(v) {
        num += (a - tm) * (b - vm);
        den += (a - tm) * (a - tm);
    }
    num / den
}

/// Fit `x(t)`, `y(t)` (m) over the retained window; velocities in m/s.
///
/// `t` is measured from gait start. The first cycle is discarded as a
/// transient and the window spans the largest whole number of remaining
/// cycles, which must be at least two.
pub fn velocity_fit(t: &[f64], x: &[f64], y: &[f64], gait: &GaitSpec) -> Result<VelocityFit> {
    if t.len() != x.len() || t.len() != y.len() || t.len() < 2 {
        return Err(domain("velocity fit needs matching series of at least two samples"));
    }
    let period = gait.period();
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    let total = (span / period + 1e-9).floor() as usize;
    if total < 3 {
        return Err(domain(format!(
            "trajectory spans {span:.3} s, fewer than 3 gait cycles of {period} s"
        )));
    }
    let cycles = total - 1;
    let (a, b) = (period, period * total as f64);
    let slack = 1e-9 * period;
    let idx: Vec<usize> = (0..t.len())
        .filter(|&k| t[k] - t0 >= a - slack && t[k] - t0 <= b + slack)
        .collect();
    if idx.len() < 2 {
        return Err(domain("velocity fit window holds fewer than two samples"));
    }
    let tw: Vec<f64> = idx.iter().map(|&k| t[k]).collect();
    let xw: Vec<f64> = idx.iter().map(|&k| x[k]).collect();
    let yw: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
    Ok(VelocityFit {
        vx: slope(&tw, &xw),
        vy: slope(&tw, &yw),
        cycles,
        window: [a, b],
    })
}

/// Velocities (cm/s), displacement and contact history of a gait trajectory.
pub fn compute_metrics(traj: &Trajectory, gait: &GaitSpec) -> Result<GaitMetrics> {
    let s = &traj.samples;
    let t: Vec<f64> = s.iter().map(|s| s.t).collect();
    let x: Vec<f64> = s.iter().map(|s| s.q[0]).collect();
    let y: Vec<f64> = s.iter().map(|s| s.q[1]).collect();
    let fit = velocity_fit(&t, &x, &y, gait)?;
    let (first, last) = (&s[0], &s[s.len() - 1]);
    let net = ((last.q[0] - first.q[0]).powi(2) + (last.q[1] - first.q[1]).powi(2)).sqrt();
    Ok(GaitMetrics {
        kind: gait.kind,
        amplitude_m: gait.amplitude,
        frequency_hz: gait.frequency,
        phase_shift_rad: gait.phase(),
        vx_cm_s: 100.0 * fit.vx,
        vy_cm_s: 100.0 * fit.vy,
        net_displacement_m: net,
        cycles: fit.cycles,
        window_s: fit.window,
        contact_history: traj.contacts.clone(),
    })
}

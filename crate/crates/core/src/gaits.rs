//! Rolling gaits, length-to-pressure mapping and inverse kinematics.
//!
//! The rolling waveform drives the three PMAs of each section with sines
//! `2π/3` apart, which rotates the bending plane at constant curvature.
//! Sections are either in phase (planar rolling) or staggered by a constant
//! phase shift (spatial rolling).

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::ad::Dual;
use crate::error::{domain, Error, Result};
use crate::kinematics::{locate, Chain, N_DOF};
use crate::params::RobotParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitKind {
    PlanarRolling,
    SpatialRolling,
}

impl GaitKind {
    pub fn default_phase_shift(self) -> f64 {
        match self {
            GaitKind::PlanarRolling => 0.0,
            GaitKind::SpatialRolling => PI / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitSpec {
    pub kind: GaitKind,
    /// Peak PMA length change, m.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Hz.
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    /// Phase lag between consecutive sections, rad. Defaults by kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_shift: Option<f64>,
    /// s.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// bar.
    #[serde(default = "default_max_pressure")]
    pub max_pressure: f64,
}

fn default_amplitude() -> f64 {
    0.75 * RobotParams::default().dl_max
}
fn default_frequency() -> f64 {
    0.5
}
fn default_duration() -> f64 {
    15.0
}
fn default_max_pressure() -> f64 {
    3.0
}

impl GaitSpec {
    pub fn new(kind: GaitKind) -> Self {
        Self {
            kind,
            amplitude: default_amplitude(),
            frequency: default_frequency(),
            phase_shift: None,
            duration: default_duration(),
            max_pressure: default_max_pressure(),
        }
    }

    pub fn planar() -> Self {
        Self::new(GaitKind::PlanarRolling)
    }

    pub fn spatial() -> Self {
        Self::new(GaitKind::SpatialRolling)
    }

    pub fn phase(&self) -> f64 {
        self.phase_shift
            .unwrap_or_else(|| self.kind.default_phase_shift())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn validate(&self, params: &RobotParams) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude <= params.dl_max) {
            return Err(domain(format!(
                "gait amplitude {} m outside [0, {}]",
                self.amplitude, params.dl_max
            )));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(domain(format!("gait frequency {} must be positive", self.frequency)));
        }
        let phi = self.phase();
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(domain(format!("phase shift {phi} outside [0, 2π)")));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(domain(format!("gait duration {} must be positive", self.duration)));
        }
        if !(self.max_pressure > 0.0 && self.max_pressure <= params.p_max) {
            return Err(domain(format!(
                "max_pressure {} bar outside (0, {}]",
                self.max_pressure, params.p_max
            )));
        }
        let peak = length_to_pressure_raw(self.amplitude, params);
        if peak > self.max_pressure * (1.0 + 1e-9) {
            return Err(domain(format!(
                "amplitude needs {peak:.4} bar, above the {} bar ceiling",
                self.max_pressure
            )));
        }
        Ok(())
    }
}

/// PMA length changes `l_ij(t)`, ordered `l_11, l_12, .., l_33`.
pub fn rolling_lengths(spec: &GaitSpec, t: f64, _params: &RobotParams) -> [f64; 9] {
    let w = 2.0 * PI * spec.frequency * t;
    let phi = spec.phase();
    std::array::from_fn(|k| {
        let (i, j) = (k / 3, k % 3);
        let arg = w + j as f64 * 2.0 * PI / 3.0 + i as f64 * phi;
        0.5 * spec.amplitude * (1.0 + arg.sin())
    })
}

fn length_to_pressure_raw(l: f64, params: &RobotParams) -> f64 {
    match &params.pressure_calibration {
        None => l * params.p_max / params.dl_max,
        Some(table) => {
            let n = table.len();
            let seg = table
                .windows(2)
                .position(|w| l <= w[1][0])
                .unwrap_or(n - 2);
            let (a, b) = (table[seg], table[seg + 1]);
            a[1] + (l - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
        }
    }
}

/// Supply pressures (bar) that produce the given length changes.
///
/// Linear `l / c` with `c = dl_max / p_max` unless a calibration table is
/// configured, in which case the table is interpolated piecewise linearly
/// (and extrapolated from its end segments).
pub fn length_to_pressure(lengths: &[f64; 9], params: &RobotParams) -> Result<[f64; 9]> {
    let mut out = [0.0; 9];
    for (k, (&l, p)) in lengths.iter().zip(out.iter_mut()).enumerate() {
        if !(l >= 0.0 && l <= params.dl_max) {
            return Err(domain(format!(
                "PMA l_{}{} length change {l} m outside [0, {}]",
                k / 3 + 1,
                k % 3 + 1,
                params.dl_max
            )));
        }
        *p = length_to_pressure_raw(l, params).clamp(0.0, params.p_max);
    }
    Ok(out)
}

/// Pressures commanded by a gait at time `t` (relative to gait start).
pub fn gait_pressures(spec: &GaitSpec, t: f64, params: &RobotParams) -> Result<[f64; 9]> {
    let mut p = length_to_pressure(&rolling_lengths(spec, t, params), params)?;
    for v in &mut p {
        *v = v.min(spec.max_pressure);
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitSample {
    pub t: f64,
    pub lengths: [f64; 9],
    pub pressures: [f64; 9],
}

/// Sampled length and pressure trajectory.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct JointTrajectory {
    pub samples: Vec<GaitSample>,
}

fn pma_names(prefix: &'static str, unit: &'static str) -> impl Iterator<Item = String> {
    (0..9).map(move |k| format!("{prefix}_{}{} [{unit}]", k / 3 + 1, k % 3 + 1))
}

impl JointTrajectory {
    /// Sample a gait at `rate` Hz over its duration, endpoints included.
    pub fn from_gait(spec: &GaitSpec, rate: f64, params: &RobotParams) -> Result<Self> {
        spec.validate(params)?;
        if !(rate > 0.0) {
            return Err(domain(format!("sampling rate {rate} must be positive")));
        }
        let n = (spec.duration * rate + 1e-9).floor() as usize;
        let samples = (0..=n)
            .map(|k| {
                let t = k as f64 / rate;
                Ok(GaitSample {
                    t,
                    lengths: rolling_lengths(spec, t, params),
                    pressures: gait_pressures(spec, t, params)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { samples })
    }

    pub fn header() -> Vec<String> {
        std::iter::once("t [s]".to_string())
            .chain(pma_names("l", "m"))
            .chain(pma_names("P", "bar"))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::header()).map_err(csv_err)?;
        for s in &self.samples {
            let row = std::iter::once(s.t)
                .chain(s.lengths)
                .chain(s.pressures)
                .map(|v| v.to_string());
            wr.write_record(row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err)?.clone();
        if header.len() != 19 {
            return Err(domain(format!(
                "joint trajectory CSV needs 19 columns, found {}",
                header.len()
            )));
        }
        let mut samples = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let vals = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| domain(format!("row {}: {e}", row + 1)))?;
            if vals.len() != 19 {
                return Err(domain(format!("row {} has {} fields", row + 1, vals.len())));
            }
            samples.push(GaitSample {
                t: vals[0],
                lengths: std::array::from_fn(|k| vals[1 + k]),
                pressures: std::array::from_fn(|k| vals[10 + k]),
            });
        }
        Ok(Self { samples })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

// ---------------------------------------------------------------------------
// Inverse kinematics

#[derive(Clone, Debug, PartialEq)]
pub struct IkFit {
    pub lengths: [f64; 9],
    /// Sum of squared point distances, m².
    pub residual: f64,
    pub iterations: usize,
    /// Residual at the start and after every accepted step.
    pub history: Vec<f64>,
}

pub const IK_MAX_ITERATIONS: usize = 200;

type D9 = Dual<f64, 9>;

/// Target stations `ξ_k = 3k/(n-1)` matching `n` backbone samples.
pub fn ik_stations(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if k + 1 == n { 3.0 } else { 3.0 * k as f64 / (n - 1) as f64 })
        .collect()
}

/// Base-relative backbone at the stations of [`ik_stations`].
pub fn backbone_relative(lengths: &[f64; 9], n: usize, params: &RobotParams) -> Vec<[f64; 3]> {
    let mut q = [0.0; N_DOF];
    q[6..].copy_from_slice(lengths);
    let chain = Chain::new(&q, params);
    ik_stations(n)
        .into_iter()
        .map(|xi| chain.point(locate(xi).expect("station in range"), 0.0, 0.0, params))
        .collect()
}

fn residual_and_jacobian(
    x: &[f64; 9],
    targets: &[[f64; 3]],
    params: &RobotParams,
) -> (DVector<f64>, nalgebra::DMatrix<f64>) {
    let q: [D9; N_DOF] = std::array::from_fn(|k| {
        if k < 6 {
            D9::constant(0.0)
        } else {
            D9::variable(x[k - 6], k - 6)
        }
    });
    let chain = Chain::new(&q, params);
    let n = targets.len();
    let mut r = DVector::zeros(3 * n);
    let mut j = nalgebra::DMatrix::zeros(3 * n, 9);
    for (k, xi) in ik_stations(n).into_iter().enumerate() {
        let p = chain.point(locate(xi).expect("station in range"), 0.0, 0.0, params);
        for a in 0..3 {
            r[3 * k + a] = p[a].v - targets[k][a];
            for c in 0..9 {
                j[(3 * k + a, c)] = p[a].d[c];
            }
        }
    }
    (r, j)
}

/// Bounded least-squares fit of PMA length changes to a backbone curve.
///
/// `targets` are base-relative backbone points at evenly spaced `ξ` over
/// `[0, 3]`. Projected Levenberg-Marquardt: variables held at a bound by the
/// gradient are frozen for the step, trial points are clipped to
/// `[0, dl_max]`, and only cost-decreasing steps are accepted.
pub fn ik_fit(targets: &[[f64; 3]], initial: &[f64; 9], params: &RobotParams) -> Result<IkFit> {
    if targets.len() < 4 {
        return Err(domain(format!(
            "inverse kinematics needs at least 4 target samples, got {}",
            targets.len()
        )));
    }
    if targets.iter().flatten().any(|v| !v.is_finite()) {
        return Err(domain("inverse kinematics targets must be finite"));
    }
    let hi = params.dl_max;
    if let Some(k) = initial.iter().position(|l| !(*l >= 0.0 && *l <= hi)) {
        return Err(domain(format!(
            "initial guess l_{}{} = {} outside [0, {hi}]",
            k / 3 + 1,
            k % 3 + 1,
            initial[k]
        )));
    }

    let mut x = *initial;
    let (mut r, mut jac) = residual_and_jacobian(&x, targets, params);
    let mut cost = r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    for iter in 0..IK_MAX_ITERATIONS {
        let g: SVector<f64, 9> = SVector::from_iterator((jac.transpose() * &r).iter().copied());
        // projected gradient
        let pg = SVector::<f64, 9>::from_fn(|k, _| x[k] - (x[k] - g[k]).clamp(0.0, hi));
        if pg.norm() < 1e-8 || cost == 0.0 {
            return Ok(IkFit {
                lengths: x,
                residual: cost,
                iterations: iter,
                history,
            });
        }
        let free: [bool; 9] =
            std::array::from_fn(|k| !((x[k] <= 0.0 && g[k] > 0.0) || (x[k] >= hi && g[k] < 0.0)));
        let jtj: SMatrix<f64, 9, 9> = SMatrix::from_iterator((jac.transpose() * &jac).iter().copied());
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj;
            let mut b = -g;
            for k in 0..9 {
                if free[k] {
                    a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
                } else {
                    a.row_mut(k).fill(0.0);
                    a.column_mut(k).fill(0.0);
                    a[(k, k)] = 1.0;
                    b[k] = 0.0;
                }
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&b)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: [f64; 9] = std::array::from_fn(|k| (x[k] + step[k]).clamp(0.0, hi));
            let (rt, jt) = residual_and_jacobian(&trial, targets, params);
            let ct = rt.norm_squared();
            if ct < cost {
                let improvement = cost - ct;
                x = trial;
                r = rt;
                jac = jt;
                cost = ct;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if improvement < 1e-12 * cost.max(1e-12) || cost < 1e-28 {
                    return Ok(IkFit {
                        lengths: x,
                        residual: cost,
                        iterations: iter + 1,
                        history,
                    });
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            return Ok(IkFit {
                lengths: x,
                residual: cost,
                iterations: iter + 1,
                history,
            });
        }
    }
    Err(Error::IkNoConvergence {
        iterations: IK_MAX_ITERATIONS,
        residual: cost,
        best: x,
    })
}

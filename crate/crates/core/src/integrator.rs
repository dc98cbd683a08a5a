//! Time integration of the 30-dimensional state `(q, q̇)`.
//!
//! Two methods are provided:
//!
//! - `implicit-adaptive`: a six-stage, stiffly accurate, L-stable ESDIRK
//!   scheme of order 4 with an embedded order-3 error estimate
//!   (Kennedy & Carpenter's ARK4(3)6L[2]SA implicit tableau). All implicit
//!   stages share one iteration matrix `I − γ h J`; the right-hand-side
//!   Jacobian `J` is a forward-difference approximation that is reused
//!   across steps and refreshed when Newton iterations stall.
//! - `semi-implicit-fixed`: fixed-step symplectic Euler with the velocity
//!   update implicit in PMA damping and in the linearized contact damping.
//!
//! Output is resampled at `output_rate` with cubic Hermite interpolation
//! between accepted steps.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::contact::{contact_map, sweep, ContactSample, Sweep};
use crate::dynamics::{actuation_vector, damping_matrix, mass_terms, solve_spd, Mat15};
use crate::error::{domain, Error, Result};
use crate::kinematics::{default_grid, Coords, JointState, SkinGrid, N_BASE, N_DOF};
use crate::params::RobotParams;

const N_STATE: usize = 2 * N_DOF;
type StateVec = SVector<f64, N_STATE>;
type StateMat = SMatrix<f64, N_STATE, N_STATE>;

/// Smallest step the adaptive method may take before giving up, s.
pub const MIN_STEP: f64 = 1e-12;

/// Time-stamped configuration and velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub q: Coords,
    pub qdot: Coords,
}

impl SimState {
    pub fn at_rest(t: f64, q: JointState) -> Self {
        Self {
            t,
            q: q.q,
            qdot: Coords::zeros(),
        }
    }

    pub fn joint_state(&self) -> JointState {
        JointState::from_coords(self.q)
    }

    fn pack(&self) -> StateVec {
        let mut y = StateVec::zeros();
        y.fixed_rows_mut::<N_DOF>(0).copy_from(&self.q);
        y.fixed_rows_mut::<N_DOF>(N_DOF).copy_from(&self.qdot);
        y
    }

    fn unpack(t: f64, y: &StateVec) -> Self {
        Self {
            t,
            q: y.fixed_rows::<N_DOF>(0).into_owned(),
            qdot: y.fixed_rows::<N_DOF>(N_DOF).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ImplicitAdaptive,
    SemiImplicitFixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step of the adaptive method, s.
    pub max_step: f64,
    pub method: Method,
    /// Step of the fixed-step method, s.
    pub fixed_step: f64,
    /// Output sampling rate, Hz.
    pub output_rate: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            max_step: 1e-2,
            method: Method::ImplicitAdaptive,
            fixed_step: 1e-4,
            output_rate: 30.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("fixed_step", self.fixed_step),
            ("output_rate", self.output_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Robot parameters plus the contact set-up used by the right-hand side.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: RobotParams,
    pub grid: SkinGrid,
    pub contact: bool,
}

impl Model {
    pub fn new(params: RobotParams) -> Self {
        let grid = default_grid(&params);
        Self {
            params,
            grid,
            contact: true,
        }
    }

    pub fn without_contact(params: RobotParams) -> Self {
        Self {
            contact: false,
            ..Self::new(params)
        }
    }

    /// Accelerations for generalized actuation forces `tau`.
    pub fn accelerations(&self, q: &Coords, qdot: &Coords, tau: &Coords) -> Result<Coords> {
        let p = &self.params;
        let mt = mass_terms(q, Some(qdot), p);
        let mut rhs = tau - mt.bias - mt.gravity - damping_matrix(p) * qdot;
        for k in N_BASE..N_DOF {
            rhs[k] -= p.pma_stiffness * q[k];
        }
        if self.contact {
            rhs += sweep(q, qdot, &self.grid, p, Sweep::default());
        }
        solve_spd(&mt.mass, &rhs)
    }

    fn deriv(&self, t: f64, y: &StateVec, tau: &Coords) -> Result<StateVec> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t });
        }
        let q = y.fixed_rows::<N_DOF>(0).into_owned();
        let qd = y.fixed_rows::<N_DOF>(N_DOF).into_owned();
        let a = self.accelerations(&q, &qd, tau)?;
        let mut f = StateVec::zeros();
        f.fixed_rows_mut::<N_DOF>(0).copy_from(&qd);
        f.fixed_rows_mut::<N_DOF>(N_DOF).copy_from(&a);
        Ok(f)
    }

    /// In-contact samples at a state, empty when contact is disabled.
    pub fn contact_samples(&self, s: &SimState) -> Vec<ContactSample> {
        if !self.contact {
            return Vec::new();
        }
        let mut recs = Vec::with_capacity(self.grid.len());
        sweep(
            &s.q,
            &s.qdot,
            &self.grid,
            &self.params,
            Sweep {
                records: Some(&mut recs),
                damping: None,
            },
        );
        contact_map(&recs)
    }
}

/// State derivative `[q̇; q̈]` under the given PMA pressures (bar).
pub fn rhs(state: &SimState, pressures: &[f64; 9], model: &Model) -> Result<SVector<f64, 30>> {
    let tau = actuation_vector(pressures, &model.params)?;
    model.deriv(state.t, &state.pack(), &tau)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobians: usize,
    pub newton_failures: usize,
}

/// Resampled trajectory and per-sample contact maps.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<SimState>,
    pub contacts: Vec<Vec<ContactSample>>,
    pub final_state: SimState,
    pub stats: IntegratorStats,
}

/// Control law: time (s) to PMA pressures (bar).
pub type Control<'a> = &'a dyn Fn(f64) -> [f64; 9];

/// Integrate from `initial` for `duration` seconds.
pub fn integrate(
    initial: &SimState,
    control: Control<'_>,
    duration: f64,
    cfg: &IntegratorConfig,
    model: &Model,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(domain(format!("duration must be positive, got {duration}")));
    }
    if !initial.is_finite() {
        return Err(Error::Divergence { t: initial.t });
    }
    let mut out = Sampler::new(initial, duration, cfg.output_rate);
    let stats = match cfg.method {
        Method::ImplicitAdaptive => esdirk(initial, control, duration, cfg, model, &mut out)?,
        Method::SemiImplicitFixed => semi_implicit(initial, control, duration, cfg, model, &mut out)?,
    };
    let contacts = out.samples.iter().map(|s| model.contact_samples(s)).collect();
    Ok(Trajectory {
        samples: out.samples,
        contacts,
        final_state: out.last,
        stats,
    })
}

/// Collects output samples at a fixed rate from accepted steps.
struct Sampler {
    t0: f64,
    t_end: f64,
    rate: f64,
    next: usize,
    count: usize,
    samples: Vec<SimState>,
    last: SimState,
}

impl Sampler {
    fn new(initial: &SimState, duration: f64, rate: f64) -> Self {
        let count = (duration * rate + 1e-9).floor() as usize + 1;
        let mut s = Self {
            t0: initial.t,
            t_end: initial.t + duration,
            rate,
            next: 1,
            count,
            samples: Vec::with_capacity(count),
            last: initial.clone(),
        };
        s.samples.push(initial.clone());
        s
    }

    fn time(&self, k: usize) -> f64 {
        (self.t0 + k as f64 / self.rate).min(self.t_end)
    }

    /// Emit samples in `(ta, tb]` using `interp(t)`.
    fn step(&mut self, tb: f64, interp: impl Fn(f64) -> StateVec) {
        let slack = 1e-12 * tb.abs().max(1.0);
        while self.next < self.count && self.time(self.next) <= tb + slack {
            let t = self.time(self.next);
            self.samples.push(SimState::unpack(t, &interp(t)));
            self.next += 1;
        }
    }
}

fn hermite(t: f64, ta: f64, h: f64, ya: &StateVec, fa: &StateVec, yb: &StateVec, fb: &StateVec) -> StateVec {
    let s = ((t - ta) / h).clamp(0.0, 1.0);
    let s2 = s * s;
    let s3 = s2 * s;
    ya * (2.0 * s3 - 3.0 * s2 + 1.0)
        + fa * (h * (s3 - 2.0 * s2 + s))
        + yb * (3.0 * s2 - 2.0 * s3)
        + fb * (h * (s3 - s2))
}

// ---------------------------------------------------------------------------
// ESDIRK4(3)6L[2]SA

pub(crate) struct Tableau {
    pub gamma: f64,
    pub c: [f64; 6],
    pub a: [[f64; 6]; 6],
    pub b: [f64; 6],
    pub b_hat: [f64; 6],
}

pub(crate) fn esdirk436() -> Tableau {
    let g = 0.25;
    let a = [
        [0.0; 6],
        [g, g, 0.0, 0.0, 0.0, 0.0],
        [8611.0 / 62500.0, -1743.0 / 31250.0, g, 0.0, 0.0, 0.0],
        [
            5012029.0 / 34652500.0,
            -654441.0 / 2922500.0,
            174375.0 / 388108.0,
            g,
            0.0,
            0.0,
        ],
        [
            15267082809.0 / 155376265600.0,
            -71443401.0 / 120774400.0,
            730878875.0 / 902184768.0,
            2285395.0 / 8070912.0,
            g,
            0.0,
        ],
        [
            82889.0 / 524892.0,
            0.0,
            15625.0 / 83664.0,
            69875.0 / 102672.0,
            -2260.0 / 8211.0,
            g,
        ],
    ];
    Tableau {
        gamma: g,
        c: [0.0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0],
        a,
        b: a[5],
        b_hat: [
            4586570599.0 / 29645900160.0,
            0.0,
            178811875.0 / 945068544.0,
            814220225.0 / 1159782912.0,
            -3700637.0 / 11593932.0,
            61727.0 / 225920.0,
        ],
    }
}

struct Weights {
    atol: f64,
    rtol: f64,
}

impl Weights {
    fn norm(&self, e: &StateVec, ya: &StateVec, yb: &StateVec) -> f64 {
        let mut s = 0.0;
        for i in 0..N_STATE {
            let sc = self.atol + self.rtol * ya[i].abs().max(yb[i].abs());
            let r = e[i] / sc;
            s += r * r;
        }
        (s / N_STATE as f64).sqrt()
    }
}

struct Rhs<'a> {
    model: &'a Model,
    control: Control<'a>,
    evals: usize,
}

impl Rhs<'_> {
    fn tau(&self, t: f64) -> Result<Coords> {
        actuation_vector(&(self.control)(t), &self.model.params)
    }

    fn eval(&mut self, t: f64, y: &StateVec) -> Result<StateVec> {
        self.evals += 1;
        let tau = self.tau(t)?;
        self.model.deriv(t, y, &tau)
    }

    /// Forward-difference Jacobian; the top half is `[0 I]` exactly.
    fn jacobian(&mut self, t: f64, y: &StateVec, fy: &StateVec) -> Result<StateMat> {
        let tau = self.tau(t)?;
        let mut j = StateMat::zeros();
        for k in 0..N_DOF {
            j[(k, N_DOF + k)] = 1.0;
        }
        for k in 0..N_STATE {
            let h = 1.5e-8 * y[k].abs().max(1e-2);
            let mut yp = *y;
            yp[k] += h;
            let h = yp[k] - y[k];
            self.evals += 1;
            let fp = self.model.deriv(t, &yp, &tau)?;
            for i in N_DOF..N_STATE {
                j[(i, k)] = (fp[i] - fy[i]) / h;
            }
        }
        Ok(j)
    }
}

enum StepOutcome {
    Accepted { y: StateVec, err: f64 },
    Rejected { err: f64 },
    NewtonFailed,
}

fn esdirk(
    initial: &SimState,
    control: Control<'_>,
    duration: f64,
    cfg: &IntegratorConfig,
    model: &Model,
    out: &mut Sampler,
) -> Result<IntegratorStats> {
    let tab = esdirk436();
    let w = Weights {
        atol: cfg.abs_tol,
        rtol: cfg.rel_tol,
    };
    let mut f = Rhs {
        model,
        control,
        evals: 0,
    };
    let mut stats = IntegratorStats::default();
    let t_end = initial.t + duration;
    let mut t = initial.t;
    let mut y = initial.pack();
    let mut fy = f.eval(t, &y)?;
    let mut jac = f.jacobian(t, &y, &fy)?;
    stats.jacobians += 1;
    let mut jac_fresh = true;
    let mut h = cfg.max_step.min(1e-4).min(duration);
    let mut after_reject = false;

    while t < t_end {
        let last = t + h >= t_end * (1.0 - 4.0 * f64::EPSILON) || t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < MIN_STEP {
            return Err(Error::StepUnderflow {
                t,
                step: h,
                last_state: Box::new(SimState::unpack(t, &y)),
            });
        }
        match esdirk_step(&tab, &mut f, &w, t, h, &y, &fy, &jac)? {
            StepOutcome::Accepted { y: yn, err } => {
                let tn = if last { t_end } else { t + h };
                let fyn = f.eval(tn, &yn)?;
                out.step(tn, |ts| hermite(ts, t, tn - t, &y, &fy, &yn, &fyn));
                stats.accepted += 1;
                t = tn;
                y = yn;
                fy = fyn;
                jac_fresh = false;
                let mut fac = 0.9 * err.max(1e-10).powf(-0.25);
                fac = fac.clamp(0.2, if after_reject { 1.0 } else { 5.0 });
                h = (h * fac).min(cfg.max_step);
                after_reject = false;
            }
            StepOutcome::Rejected { err } => {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                h *= fac;
                after_reject = true;
            }
            StepOutcome::NewtonFailed => {
                stats.newton_failures += 1;
                if jac_fresh {
                    h *= 0.25;
                } else {
                    jac = f.jacobian(t, &y, &fy)?;
                    stats.jacobians += 1;
                    jac_fresh = true;
                }
                after_reject = true;
            }
        }
    }
    out.last = SimState::unpack(t_end, &y);
    stats.rhs_evals = f.evals;
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn esdirk_step(
    tab: &Tableau,
    f: &mut Rhs<'_>,
    w: &Weights,
    t: f64,
    h: f64,
    y: &StateVec,
    fy: &StateVec,
    jac: &StateMat,
) -> Result<StepOutcome> {
    let hg = h * tab.gamma;
    let iter = StateMat::identity() - jac * hg;
    let lu = iter.lu();
    let mut k = [StateVec::zeros(); 6];
    k[0] = *fy;
    let mut z = *y;
    let mut eta: f64 = 1.0;
    for i in 1..6 {
        let mut psi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            if tab.a[i][j] != 0.0 {
                psi += kj * (h * tab.a[i][j]);
            }
        }
        let ti = t + tab.c[i] * h;
        z = psi + k[i - 1] * hg;
        let mut converged = false;
        let mut prev = f64::INFINITY;
        eta = eta.max(f64::EPSILON).powf(0.8);
        for it in 0..10 {
            let fz = match f.eval(ti, &z) {
                Ok(v) => v,
                Err(Error::Divergence { .. }) | Err(Error::Degenerate { .. }) => {
                    return Ok(StepOutcome::NewtonFailed)
                }
                Err(e) => return Err(e),
            };
            let r = z - psi - fz * hg;
            let delta = match lu.solve(&(-r)) {
                Some(d) => d,
                None => return Ok(StepOutcome::NewtonFailed),
            };
            z += delta;
            let nrm = w.norm(&delta, y, &z);
            if !nrm.is_finite() {
                return Ok(StepOutcome::NewtonFailed);
            }
            if it > 0 {
                let theta = nrm / prev;
                if theta >= 1.0 {
                    return Ok(StepOutcome::NewtonFailed);
                }
                eta = theta / (1.0 - theta);
            }
            if eta * nrm <= 0.03 || nrm < 1e-12 {
                converged = true;
                break;
            }
            prev = nrm;
        }
        if !converged {
            return Ok(StepOutcome::NewtonFailed);
        }
        k[i] = (z - psi) / hg;
    }
    let mut e = StateVec::zeros();
    for i in 0..6 {
        let d = tab.b[i] - tab.b_hat[i];
        if d != 0.0 {
            e += k[i] * (h * d);
        }
    }
    let err = w.norm(&e, y, &z);
    if !err.is_finite() {
        return Ok(StepOutcome::NewtonFailed);
    }
    if err <= 1.0 {
        Ok(StepOutcome::Accepted { y: z, err })
    } else {
        Ok(StepOutcome::Rejected { err })
    }
}

// ---------------------------------------------------------------------------
// Fixed-step semi-implicit Euler

fn semi_implicit(
    initial: &SimState,
    control: Control<'_>,
    duration: f64,
    cfg: &IntegratorConfig,
    model: &Model,
    out: &mut Sampler,
) -> Result<IntegratorStats> {
    let p = &model.params;
    let n = (duration / cfg.fixed_step).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let mut s = initial.clone();
    let mut stats = IntegratorStats::default();
    let damping = damping_matrix(p);
    for step in 0..n {
        let tau = actuation_vector(&control(s.t), p)?;
        let mt = mass_terms(&s.q, Some(&s.qdot), p);
        let mut force = tau - mt.bias - mt.gravity - damping * s.qdot;
        for k in N_BASE..N_DOF {
            force[k] -= p.pma_stiffness * s.q[k];
        }
        let mut implicit = damping;
        if model.contact {
            let mut bc = Mat15::zeros();
            force += sweep(
                &s.q,
                &s.qdot,
                &model.grid,
                p,
                Sweep {
                    records: None,
                    damping: Some(&mut bc),
                },
            );
            implicit += bc;
        }
        stats.rhs_evals += 1;
        let lhs = mt.mass + implicit * h;
        let dv = lhs.lu().solve(&(force * h)).ok_or(Error::Degenerate {
            min_eigenvalue: f64::NAN,
        })?;
        let t_next = if step + 1 == n {
            initial.t + duration
        } else {
            initial.t + (step + 1) as f64 * h
        };
        let next = SimState {
            t: t_next,
            qdot: s.qdot + dv,
            q: s.q + (s.qdot + dv) * h,
        };
        if !next.is_finite() {
            return Err(Error::Divergence { t: t_next });
        }
        let (ya, yb) = (s.pack(), next.pack());
        let ta = s.t;
        out.step(t_next, |t| {
            let a = ((t - ta) / h).clamp(0.0, 1.0);
            ya * (1.0 - a) + yb * a
        });
        stats.accepted += 1;
        s = next;
    }
    out.last = s;
    Ok(stats)
}

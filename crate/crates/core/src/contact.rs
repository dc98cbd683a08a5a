//! Distributed spring-damper ground contact with anisotropic friction.
//!
//! A skin point is in contact when its world `z < 0`. The normal force is a
//! one-sided spring-damper clamped to be non-adhesive; the tangential force
//! opposes the sliding velocity with separate coefficients along world X and
//! Y, using `tanh(v / v_eps)` as a smooth sign.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::ad::Dual;
use crate::dynamics::Mat15;
use crate::error::{domain, Result};
use crate::kinematics::{jacobian_of, locate, seeded, Chain, Coords, JointState, SkinGrid, N_DOF};
use crate::params::RobotParams;

/// One skin sample with its kinematic state and ground reaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPoint {
    pub xi: f64,
    pub sigma: f64,
    pub p: Vector3<f64>,
    pub v: Vector3<f64>,
    pub force: Vector3<f64>,
    pub in_contact: bool,
}

/// Compact record of an in-contact point for contact maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSample {
    pub xi: f64,
    pub sigma: f64,
    pub fz: f64,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Vertical ground reaction at penetration `z` (negative below ground).
pub fn normal_force(z: f64, zdot: f64, params: &RobotParams) -> f64 {
    let raw = -0.5
        * (1.0 - sign(z))
        * (params.ground_stiffness * z + params.ground_damping * zdot);
    raw.max(0.0)
}

/// Full reaction `F_z [-μx σ(vx), -μy σ(vy), 1]` with `σ = tanh(·/v_eps)`.
pub fn reaction_force(fz: f64, vx: f64, vy: f64, params: &RobotParams) -> Result<Vector3<f64>> {
    if !(fz >= 0.0) {
        return Err(domain(format!("normal force {fz} N must be non-negative")));
    }
    Ok(friction(fz, vx, vy, params))
}

#[inline]
fn friction(fz: f64, vx: f64, vy: f64, params: &RobotParams) -> Vector3<f64> {
    Vector3::new(
        -params.mu_x * (vx / params.v_eps).tanh() * fz,
        -params.mu_y * (vy / params.v_eps).tanh() * fz,
        fz,
    )
}

/// `-∂F/∂v` at a contact point: the local damping the contact adds.
fn force_velocity_damping(z: f64, v: &Vector3<f64>, params: &RobotParams) -> Matrix3<f64> {
    let fz = normal_force(z, v.z, params);
    if fz <= 0.0 {
        return Matrix3::zeros();
    }
    let dfz = -params.ground_damping;
    let (tx, ty) = ((v.x / params.v_eps).tanh(), (v.y / params.v_eps).tanh());
    let sx = (1.0 - tx * tx) / params.v_eps;
    let sy = (1.0 - ty * ty) / params.v_eps;
    -Matrix3::new(
        -params.mu_x * fz * sx,
        0.0,
        -params.mu_x * tx * dfz,
        0.0,
        -params.mu_y * fz * sy,
        -params.mu_y * ty * dfz,
        0.0,
        0.0,
        dfz,
    )
}

/// Options for the internal contact sweep.
#[derive(Default)]
pub(crate) struct Sweep<'a> {
    /// Record every grid point (with velocity) here.
    pub records: Option<&'a mut Vec<ContactPoint>>,
    /// Accumulate `Σ Jᵀ (-∂F/∂v) J` here.
    pub damping: Option<&'a mut Mat15>,
}

/// Generalized contact force `Σ Jᵀ F` over the grid, in fixed grid order.
pub(crate) fn sweep(
    q: &Coords,
    qdot: &Coords,
    grid: &SkinGrid,
    params: &RobotParams,
    mut opts: Sweep<'_>,
) -> Coords {
    let arr: [f64; N_DOF] = (*q).into();
    let chain = Chain::new(&arr, params);
    let vel_chain = opts.records.as_ref().map(|_| {
        let a: [Dual<f64, 1>; N_DOF] = std::array::from_fn(|k| Dual::with_tangent(q[k], [qdot[k]]));
        Chain::new(&a, params)
    });
    let mut jac_chain = None;
    let mut total = Coords::zeros();
    for (st, sigma) in grid.points() {
        let loc = locate(st.xi).expect("grid stations lie in [0, 3]");
        let p = chain.point(loc, sigma, grid.radius, params);
        let mut rec = ContactPoint {
            xi: st.xi,
            sigma,
            p: Vector3::from(p),
            v: Vector3::zeros(),
            force: Vector3::zeros(),
            in_contact: p[2] < 0.0,
        };
        if let Some(vc) = &vel_chain {
            let pd = vc.point(loc, sigma, grid.radius, params);
            rec.v = Vector3::new(pd[0].d[0], pd[1].d[0], pd[2].d[0]);
        }
        if rec.in_contact {
            let jc = jac_chain.get_or_insert_with(|| Chain::new(&seeded(q), params));
            let j = jacobian_of(&jc.point(loc, sigma, grid.radius, params));
            let v = j * qdot;
            rec.v = v;
            let fz = normal_force(p[2], v.z, params);
            rec.force = friction(fz, v.x, v.y, params);
            total += j.transpose() * rec.force;
            if let Some(d) = opts.damping.as_deref_mut() {
                let b = force_velocity_damping(p[2], &v, params);
                *d += j.transpose() * b * j;
            }
        }
        if let Some(r) = opts.records.as_deref_mut() {
            r.push(rec);
        }
    }
    total
}

/// Generalized contact force and the per-point record over `grid`.
pub fn contact_wrench(
    q: &JointState,
    qdot: &Coords,
    grid: &SkinGrid,
    params: &RobotParams,
) -> Result<(Coords, Vec<ContactPoint>)> {
    q.check(params)?;
    let mut records = Vec::with_capacity(grid.len());
    let w = sweep(
        &q.q,
        qdot,
        grid,
        params,
        Sweep {
            records: Some(&mut records),
            damping: None,
        },
    );
    Ok((w, records))
}

/// In-contact entries `(xi, sigma, F_z)` for a contact map.
pub fn contact_map(points: &[ContactPoint]) -> Vec<ContactSample> {
    points
        .iter()
        .filter(|c| c.in_contact)
        .map(|c| ContactSample {
            xi: c.xi,
            sigma: c.sigma,
            fz: c.force.z,
        })
        .collect()
}

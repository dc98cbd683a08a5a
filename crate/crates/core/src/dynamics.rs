//! Terms of the Lagrangian equations of motion
//!
//! `M q̈ + (C + D) q̇ + G = [0; τ_e] + Σ Jᵀ F`.
//!
//! Section mass is spread uniformly along the arc. Each slice is a thin ring
//! of radius `mass_ring_radius` sampled at three points `2π/3` apart, which
//! reproduces the planar second moment of a rigid ring while keeping every
//! term expressible through point position Jacobians. Integrals over a
//! section use Gauss-Legendre quadrature in the local axial coordinate.

use nalgebra::{SMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::ad::Dual;
use crate::error::{domain, Error, Result};
use crate::kinematics::{
    jacobian_of, seeded, Chain, Coords, JointState, Location, N_BASE, N_DOF, N_SECTIONS,
};
use crate::params::{RobotParams, PA_PER_BAR};
use crate::quadrature::gauss_legendre_unit;

pub type Mat15 = SMatrix<f64, N_DOF, N_DOF>;

/// All terms of the equations of motion at one state.
#[derive(Clone, Debug)]
pub struct EomTerms {
    pub mass: Mat15,
    pub coriolis: Mat15,
    pub damping: Mat15,
    pub conservative: Coords,
    pub tau: Coords,
}

/// A weighted mass sample: section, local coordinate, ring angle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MassPoint {
    pub loc: Location,
    pub sigma: f64,
    pub weight: f64,
}

pub(crate) fn mass_points(params: &RobotParams) -> Vec<MassPoint> {
    let rule = gauss_legendre_unit(params.quad_nodes);
    let ring: &[f64] = if params.ring_radius() > 0.0 {
        &[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]
    } else {
        &[0.0]
    };
    let m = params.section_mass() / ring.len() as f64;
    let mut pts = Vec::with_capacity(N_SECTIONS * rule.len() * ring.len());
    for index in 0..N_SECTIONS {
        for &(local, w) in &rule {
            for &sigma in ring {
                pts.push(MassPoint {
                    loc: Location::Section { index, local },
                    sigma,
                    weight: m * w,
                });
            }
        }
    }
    pts
}

type DD = Dual<Dual<f64, 1>, 1>;

/// Inertia, gravity and Coriolis bias `C(q, q̇) q̇` from one sweep over the
/// mass samples.
pub(crate) struct MassTerms {
    pub mass: Mat15,
    pub gravity: Coords,
    pub bias: Coords,
}

pub(crate) fn mass_terms(q: &Coords, qdot: Option<&Coords>, params: &RobotParams) -> MassTerms {
    let pts = mass_points(params);
    let rho = params.ring_radius();
    let chain = Chain::new(&seeded(q), params);
    let dir_chain = qdot.map(|v| {
        let arr: [DD; N_DOF] = std::array::from_fn(|k| DD {
            v: Dual::with_tangent(q[k], [v[k]]),
            d: [Dual::with_tangent(v[k], [0.0])],
        });
        Chain::new(&arr, params)
    });

    let mut mass = Mat15::zeros();
    let mut gravity = Coords::zeros();
    let mut bias = Coords::zeros();
    for mp in &pts {
        let j = jacobian_of(&chain.point(mp.loc, mp.sigma, rho, params));
        mass += (j.transpose() * j) * mp.weight;
        gravity += j.row(2).transpose() * (mp.weight * params.g);
        if let Some(dc) = &dir_chain {
            let p = dc.point(mp.loc, mp.sigma, rho, params);
            let acc = nalgebra::Vector3::new(p[0].d[0].d[0], p[1].d[0].d[0], p[2].d[0].d[0]);
            bias += j.transpose() * acc * mp.weight;
        }
    }
    MassTerms {
        mass: symmetrize(&mass),
        gravity,
        bias,
    }
}

fn symmetrize(m: &Mat15) -> Mat15 {
    (m + m.transpose()) * 0.5
}

/// Generalized inertia matrix `Σᵢ mᵢ ∫ Jᵢᵀ Jᵢ dξ`.
pub fn inertia_matrix(q: &JointState, params: &RobotParams) -> Result<Mat15> {
    q.check(params)?;
    Ok(mass_terms(&q.q, None, params).mass)
}

type HD = Dual<Dual<f64, N_DOF>, N_DOF>;

/// Partial derivatives `∂M/∂q_h` for every coordinate `h`, differentiated
/// through the quadrature integrand with nested forward-mode duals.
pub fn inertia_partials(q: &JointState, params: &RobotParams) -> Result<Vec<Mat15>> {
    q.check(params)?;
    let pts = mass_points(params);
    let rho = params.ring_radius();
    let arr: [HD; N_DOF] = std::array::from_fn(|k| {
        let mut d = [Dual::<f64, N_DOF>::constant(0.0); N_DOF];
        d[k] = Dual::constant(1.0);
        HD {
            v: Dual::variable(q.q[k], k),
            d,
        }
    });
    let chain = Chain::new(&arr, params);
    // a[h][v][u] = Σ w J[:, v] · H[:, u, h]
    let mut a = vec![Mat15::zeros(); N_DOF];
    for mp in &pts {
        let p = chain.point(mp.loc, mp.sigma, rho, params);
        for (h, ah) in a.iter_mut().enumerate() {
            for v in 0..N_DOF {
                for u in 0..N_DOF {
                    let mut s = 0.0;
                    for pi in &p {
                        s += pi.v.d[v] * pi.d[h].d[u];
                    }
                    ah[(v, u)] += mp.weight * s;
                }
            }
        }
    }
    Ok(a.iter().map(|ah| ah + ah.transpose()).collect())
}

/// Christoffel symbols of the first kind, `Γ[h][(v, u)] = Γ_vuh`.
pub fn christoffel_symbols(q: &JointState, params: &RobotParams) -> Result<Vec<Mat15>> {
    let dm = inertia_partials(q, params)?;
    Ok((0..N_DOF)
        .map(|h| {
            Mat15::from_fn(|v, u| 0.5 * (dm[h][(v, u)] + dm[u][(v, h)] - dm[v][(h, u)]))
        })
        .collect())
}

/// Centrifugal and Coriolis matrix `C_vu = Σ_h Γ_vuh q̇_h`.
pub fn coriolis_matrix(q: &JointState, qdot: &Coords, params: &RobotParams) -> Result<Mat15> {
    let gamma = christoffel_symbols(q, params)?;
    let mut c = Mat15::zeros();
    for (h, g) in gamma.iter().enumerate() {
        c += g * qdot[h];
    }
    Ok(c)
}

/// Coriolis force `C(q, q̇) q̇` computed as `Σ m ∫ Jᵀ (J̇ q̇)`.
///
/// Equal to `coriolis_matrix(q, q̇) * q̇` but needs only a single
/// second-order directional derivative per mass sample.
pub fn coriolis_force(q: &JointState, qdot: &Coords, params: &RobotParams) -> Result<Coords> {
    q.check(params)?;
    Ok(mass_terms(&q.q, Some(qdot), params).bias)
}

/// Diagonal PMA damping; the floating base is undamped.
pub fn damping_matrix(params: &RobotParams) -> Mat15 {
    let mut d = Mat15::zeros();
    for k in N_BASE..N_DOF {
        d[(k, k)] = params.pma_damping;
    }
    d
}

fn elastic(q: &Coords, params: &RobotParams) -> Coords {
    let mut e = Coords::zeros();
    for k in N_BASE..N_DOF {
        e[k] = params.pma_stiffness * q[k];
    }
    e
}

/// Elastic plus gravitational generalized forces (left-hand side of the EoM).
pub fn conservative_forces(q: &JointState, params: &RobotParams) -> Result<Coords> {
    q.check(params)?;
    Ok(elastic(&q.q, params) + mass_terms(&q.q, None, params).gravity)
}

/// Elastic energy `½ Σ K l²` plus gravitational energy `Σ m g z`.
pub fn potential_energy(q: &JointState, params: &RobotParams) -> Result<f64> {
    q.check(params)?;
    let arr: [f64; N_DOF] = q.q.into();
    let chain = Chain::new(&arr, params);
    let grav: f64 = mass_points(params)
        .iter()
        .map(|mp| mp.weight * params.g * chain.point(mp.loc, mp.sigma, params.ring_radius(), params)[2])
        .sum();
    let el: f64 = q.lengths().iter().map(|l| 0.5 * params.pma_stiffness * l * l).sum();
    Ok(grav + el)
}

/// `½ q̇ᵀ M q̇`.
pub fn kinetic_energy(q: &JointState, qdot: &Coords, params: &RobotParams) -> Result<f64> {
    let m = inertia_matrix(q, params)?;
    Ok(0.5 * qdot.dot(&(m * qdot)))
}

/// Generalized PMA forces from pressures in bar: zero on the base.
pub fn actuation_vector(pressures: &[f64; 9], params: &RobotParams) -> Result<Coords> {
    let area = params.pma_area();
    let mut tau = Coords::zeros();
    for (j, &p) in pressures.iter().enumerate() {
        if !(p.is_finite() && (0.0..=params.p_max).contains(&p)) {
            return Err(domain(format!(
                "pressure {p} bar on PMA {} outside [0, {}]",
                j + 1,
                params.p_max
            )));
        }
        tau[N_BASE + j] = p * PA_PER_BAR * area;
    }
    Ok(tau)
}

/// Solve `M q̈ = rhs` by Cholesky; report the smallest eigenvalue on failure.
pub(crate) fn solve_spd(mass: &Mat15, rhs: &Coords) -> Result<Coords> {
    match mass.cholesky() {
        Some(ch) => Ok(ch.solve(rhs)),
        None => {
            let eig = SymmetricEigen::new(*mass);
            Err(Error::Degenerate {
                min_eigenvalue: eig.eigenvalues.min(),
            })
        }
    }
}

/// Accelerations from `M q̈ = τ + Q_contact − (C + D) q̇ − G`.
pub fn forward_dynamics(
    q: &JointState,
    qdot: &Coords,
    tau: &Coords,
    contact: &Coords,
    params: &RobotParams,
) -> Result<Coords> {
    q.check(params)?;
    let mt = mass_terms(&q.q, Some(qdot), params);
    let rhs = tau + contact
        - mt.bias
        - damping_matrix(params) * qdot
        - elastic(&q.q, params)
        - mt.gravity;
    solve_spd(&mt.mass, &rhs)
}

/// Every EoM term at a state, for inspection and tests.
pub fn eom_terms(
    q: &JointState,
    qdot: &Coords,
    pressures: &[f64; 9],
    params: &RobotParams,
) -> Result<EomTerms> {
    Ok(EomTerms {
        mass: inertia_matrix(q, params)?,
        coriolis: coriolis_matrix(q, qdot, params)?,
        damping: damping_matrix(params),
        conservative: conservative_forces(q, params)?,
        tau: actuation_vector(pressures, params)?,
    })
}

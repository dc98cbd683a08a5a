//! Seeded random states and model self-checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{coriolis_matrix, inertia_matrix, inertia_partials, Mat15};
use crate::error::Result;
use crate::kinematics::{full_htm, position_jacobian, Coords, JointState, PositionJacobian, N_DOF};
use crate::params::RobotParams;

/// Configuration, velocity and one skin point `(xi, sigma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomState {
    pub q: JointState,
    pub qdot: Coords,
    pub xi: f64,
    pub sigma: f64,
}

/// Reproducible states with lengths in `[0, dl_max]` and tilt kept away
/// from the `β ∈ {0, π}` singularities.
pub fn random_states(seed: u64, n: usize, params: &RobotParams) -> Vec<RandomState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let base = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(-PI..PI),
                rng.gen_range(0.3..PI - 0.3),
                rng.gen_range(-PI..PI),
            ];
            let lengths: [f64; 9] = std::array::from_fn(|_| rng.gen_range(0.0..=params.dl_max));
            let qdot = Coords::from_fn(|k, _| {
                if k < 6 {
                    rng.gen_range(-1.0..1.0)
                } else {
                    rng.gen_range(-0.1..0.1)
                }
            });
            RandomState {
                q: JointState::new(base, lengths),
                qdot,
                xi: rng.gen_range(0.0..=3.0),
                sigma: rng.gen_range(0.0..2.0 * PI),
            }
        })
        .collect()
}

fn point(q: &JointState, s: &RandomState, params: &RobotParams) -> Result<nalgebra::Vector3<f64>> {
    Ok(full_htm(q, s.xi, s.sigma, params.r_s, params)?.position)
}

/// Central differences of the skin point position with step `h`.
pub fn jacobian_central(s: &RandomState, h: f64, params: &RobotParams) -> Result<PositionJacobian> {
    let mut j = PositionJacobian::zeros();
    for k in 0..N_DOF {
        let mut up = s.q;
        up.q[k] += h;
        let mut dn = s.q;
        dn.q[k] -= h;
        j.set_column(k, &((point(&up, s, params)? - point(&dn, s, params)?) / (2.0 * h)));
    }
    Ok(j)
}

/// Five-point differences, accurate to `O(h^4)`.
pub fn jacobian_five_point(s: &RandomState, h: f64, params: &RobotParams) -> Result<PositionJacobian> {
    let mut j = PositionJacobian::zeros();
    for k in 0..N_DOF {
        let at = |d: f64| {
            let mut q = s.q;
            q.q[k] += d;
            point(&q, s, params)
        };
        let col = (at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h);
        j.set_column(k, &col);
    }
    Ok(j)
}

/// Largest entrywise `|a - b| / max(|b|, floor)`.
pub fn max_rel_err(a: &PositionJacobian, b: &PositionJacobian, floor: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
        .fold(0.0, f64::max)
}

/// `|q̇ᵀ (Ṁ - 2C) q̇| / ‖q̇‖²`.
pub fn passivity_residual(q: &JointState, qdot: &Coords, params: &RobotParams) -> Result<f64> {
    let dm = inertia_partials(q, params)?;
    let mut mdot = Mat15::zeros();
    for (h, d) in dm.iter().enumerate() {
        mdot += d * qdot[h];
    }
    let c = coriolis_matrix(q, qdot, params)?;
    let v = qdot.dot(&((mdot - c * 2.0) * qdot));
    Ok(v.abs() / qdot.norm_squared())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub states: usize,
    /// AD vs central differences (h = 1e-6).
    pub jacobian_rel_err_central: f64,
    /// AD vs five-point differences (h = 5e-5).
    pub jacobian_rel_err_five_point: f64,
    pub inertia_asymmetry: f64,
    pub min_inertia_eigenvalue: f64,
    pub translation_block_err: f64,
    pub passivity_residual: f64,
}

/// Denominator floor for relative Jacobian errors, in m per unit coordinate.
pub const JACOBIAN_FLOOR: f64 = 1e-3;

pub fn self_check(params: &RobotParams, seed: u64, n: usize) -> Result<SelfCheck> {
    let mut out = SelfCheck {
        states: n,
        jacobian_rel_err_central: 0.0,
        jacobian_rel_err_five_point: 0.0,
        inertia_asymmetry: 0.0,
        min_inertia_eigenvalue: f64::INFINITY,
        translation_block_err: 0.0,
        passivity_residual: 0.0,
    };
    let m_total = params.m_total;
    for s in random_states(seed, n, params) {
        let ad = position_jacobian(&s.q, s.xi, s.sigma, params.r_s, params)?;
        let c = jacobian_central(&s, 1e-6, params)?;
        let f = jacobian_five_point(&s, 5e-5, params)?;
        out.jacobian_rel_err_central = out.jacobian_rel_err_central.max(max_rel_err(&ad, &c, JACOBIAN_FLOOR));
        out.jacobian_rel_err_five_point =
            out.jacobian_rel_err_five_point.max(max_rel_err(&ad, &f, JACOBIAN_FLOOR));
        let m = inertia_matrix(&s.q, params)?;
        out.inertia_asymmetry = out.inertia_asymmetry.max((m - m.transpose()).amax());
        out.min_inertia_eigenvalue = out
            .min_inertia_eigenvalue
            .min(m.symmetric_eigenvalues().min());
        let tb = m.fixed_view::<3, 3>(0, 0) - nalgebra::Matrix3::identity() * m_total;
        out.translation_block_err = out.translation_block_err.max(tb.amax());
        out.passivity_residual = out
            .passivity_residual
            .max(passivity_residual(&s.q, &s.qdot, params)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_are_reproducible_and_in_bounds() {
        let p = RobotParams::default();
        let a = random_states(7, 20, &p);
        assert_eq!(a, random_states(7, 20, &p));
        assert_ne!(a, random_states(8, 20, &p));
        for s in &a {
            assert!(s.q.lengths().iter().all(|l| (0.0..=p.dl_max).contains(l)));
            assert!((0.0..=3.0).contains(&s.xi));
        }
    }

    #[test]
    fn small_self_check_passes() {
        let r = self_check(&RobotParams::default(), 3, 4).unwrap();
        assert!(r.jacobian_rel_err_central < 1e-4, "{r:?}");
        assert!(r.jacobian_rel_err_five_point < 1e-8, "{r:?}");
        assert!(r.inertia_asymmetry < 1e-10);
        assert!(r.min_inertia_eigenvalue > 0.0);
        assert!(r.passivity_residual < 1e-8, "{r:?}");
    }
}

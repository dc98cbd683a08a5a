use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

use softsnake::contact::{contact_wrench, normal_force, reaction_force};
use softsnake::dynamics::{
    actuation_vector, conservative_forces, coriolis_matrix, inertia_matrix, kinetic_energy,
};
use softsnake::gaits::{
    backbone_relative, ik_fit, length_to_pressure, rolling_lengths, GaitKind, GaitSpec,
};
use softsnake::harness::velocity_fit;
use softsnake::kinematics::{
    arc_params, default_grid, full_htm, junction_angle, position_jacobian, section_htm, skin_grid,
    Coords, JointState,
};
use softsnake::params::PA_PER_BAR;
use softsnake::RobotParams;

fn p() -> RobotParams {
    RobotParams::default()
}

fn lengths3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0.0..=0.075f64)
}

fn lengths9() -> impl Strategy<Value = [f64; 9]> {
    prop::array::uniform9(0.0..=0.075f64)
}

fn base() -> impl Strategy<Value = [f64; 6]> {
    (
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.0..1.0f64,
        -PI..PI,
        0.3..(PI - 0.3),
        -PI..PI,
    )
        .prop_map(|(x, y, z, a, b, g)| [x, y, z, a, b, g])
}

fn state() -> impl Strategy<Value = JointState> {
    (base(), lengths9()).prop_map(|(b, l)| JointState::new(b, l))
}

fn velocity() -> impl Strategy<Value = Coords> {
    prop::collection::vec(-1.0..1.0f64, 15).prop_map(|v| Coords::from_vec(v))
}

fn orthonormal_err(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn section_poses_are_orthonormal(l in lengths3(), xi in 0.0..=1.0f64, sigma in 0.0..(2.0 * PI), r in 0.0..0.05f64) {
        let t = section_htm(l, xi, &p()).unwrap();
        prop_assert!(orthonormal_err(&t.rotation) < 1e-10);
        prop_assert!((t.rotation.determinant() - 1.0).abs() < 1e-10);
        let s = softsnake::kinematics::skin_htm(l, xi, sigma, r, &p()).unwrap();
        prop_assert!(orthonormal_err(&s.rotation) < 1e-10);
        // the skin point is r away from the backbone, in the cross-section
        let d = s.position - t.position;
        prop_assert!((d.norm() - r).abs() < 1e-12);
        prop_assert!(d.dot(&t.rotation.column(2)).abs() < 1e-12);
    }

    #[test]
    fn full_poses_are_orthonormal(q in state(), xi in 0.0..=3.0f64, sigma in 0.0..(2.0 * PI)) {
        let t = full_htm(&q, xi, sigma, 0.03, &p()).unwrap();
        prop_assert!(orthonormal_err(&t.rotation) < 1e-10);
    }

    #[test]
    fn cyclic_permutation_rotates_bending_plane(l in lengths3()) {
        let a = arc_params(l, &p()).unwrap();
        let b = arc_params([l[2], l[0], l[1]], &p()).unwrap();
        prop_assert!((a.kappa - b.kappa).abs() < 1e-9 * a.kappa.max(1.0));
        prop_assert!((a.s - b.s).abs() < 1e-15);
        if a.kappa > 1e-3 {
            prop_assert!(wrap(b.phi - a.phi - 2.0 * PI / 3.0).abs() < 1e-9);
        }
        // the pose rotates the same way about the section axis
        let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), 2.0 * PI / 3.0);
        let ta = section_htm(l, 1.0, &p()).unwrap();
        let tb = section_htm([l[2], l[0], l[1]], 1.0, &p()).unwrap();
        prop_assert!((rz * ta.position - tb.position).amax() < 1e-12);
    }

    #[test]
    fn straight_limit_is_continuous(l0 in 0.0..0.07f64, dir in 0..3usize, xi in 0.0..=1.0f64) {
        let eps = p().eps_straight;
        // one PMA extended by dl bends with kappa = 2 dl / (3 r_p s)
        let dl = |kappa: f64| 1.5 * kappa * p().r_p * (p().pma_length + l0);
        let mut lo = [l0; 3];
        let mut hi = [l0; 3];
        lo[dir] += dl(0.999 * eps);
        hi[dir] += dl(1.001 * eps);
        let (ka, kb) = (arc_params(lo, &p()).unwrap().kappa, arc_params(hi, &p()).unwrap().kappa);
        prop_assert!(ka == 0.0 && kb > eps, "{ka} {kb}");
        let a = section_htm(lo, xi, &p()).unwrap();
        let b = section_htm(hi, xi, &p()).unwrap();
        let s = section_htm([l0; 3], xi, &p()).unwrap();
        prop_assert!((a.rotation - b.rotation).amax() < 1e-9);
        prop_assert!((a.position - b.position).amax() < 1e-9);
        prop_assert!((s.rotation - Matrix3::identity()).amax() < 1e-15);
        prop_assert!((s.position - Vector3::new(0.0, 0.0, xi * (0.15 + l0))).amax() < 1e-15);
    }

    #[test]
    fn junction_composition(q in state(), i in 1..3usize) {
        let params = p();
        let before = full_htm(&q, i as f64 - 1e-13, 0.0, 0.0, &params).unwrap();
        let after = full_htm(&q, i as f64, 0.0, 0.0, &params).unwrap();
        let spacer = softsnake::Pose {
            rotation: *Rotation3::from_axis_angle(&Vector3::z_axis(), junction_angle(&params)).matrix(),
            position: Vector3::new(0.0, 0.0, params.d_rigid),
        };
        let composed = before.compose(&spacer);
        prop_assert!((composed.rotation - after.rotation).amax() < 1e-9);
        prop_assert!((composed.position - after.position).amax() < 1e-9);
    }

    #[test]
    fn jacobian_matches_central_differences(q in state(), xi in 0.0..=3.0f64, sigma in 0.0..(2.0 * PI)) {
        let params = p();
        let j = position_jacobian(&q, xi, sigma, params.r_s, &params).unwrap();
        let h = 1e-6;
        for k in 0..15 {
            let mut up = q;
            up.q[k] += h;
            let mut dn = q;
            dn.q[k] -= h;
            let fd = (full_htm(&up, xi, sigma, params.r_s, &params).unwrap().position
                - full_htm(&dn, xi, sigma, params.r_s, &params).unwrap().position)
                / (2.0 * h);
            for a in 0..3 {
                let err = (j[(a, k)] - fd[a]).abs() / fd[a].abs().max(1e-3);
                prop_assert!(err < 1e-4, "column {k} row {a}: {} vs {}", j[(a, k)], fd[a]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inertia_is_symmetric_positive_definite(q in state(), v in velocity()) {
        let params = p();
        let m = inertia_matrix(&q, &params).unwrap();
        prop_assert!((m - m.transpose()).amax() < 1e-10);
        prop_assert!(m.symmetric_eigenvalues().min() > 0.0);
        prop_assert!((m.fixed_view::<3, 3>(0, 0) - Matrix3::identity() * 0.35).amax() < 1e-12);
        prop_assert!(kinetic_energy(&q, &v, &params).unwrap() > 0.0);
    }

    #[test]
    fn base_translation_invariance(q in state(), v in velocity(), shift in prop::array::uniform3(-2.0..2.0f64)) {
        let params = p();
        let mut moved = q;
        for a in 0..3 {
            moved.q[a] += shift[a];
        }
        let scale = |m: f64| 1e-12 * m.max(1.0);
        let (m0, m1) = (inertia_matrix(&q, &params).unwrap(), inertia_matrix(&moved, &params).unwrap());
        prop_assert!((m0 - m1).amax() < scale(m0.amax()));
        let (c0, c1) = (coriolis_matrix(&q, &v, &params).unwrap(), coriolis_matrix(&moved, &v, &params).unwrap());
        prop_assert!((c0 - c1).amax() < scale(c0.amax()));
        let (g0, g1) = (conservative_forces(&q, &params).unwrap(), conservative_forces(&moved, &params).unwrap());
        prop_assert!((g0 - g1).amax() < scale(g0.amax()));
    }

    #[test]
    fn quadrature_doubling_agrees(q in state()) {
        let params = p();
        let fine = RobotParams { quad_nodes: 22, ..params.clone() };
        let (m0, m1) = (inertia_matrix(&q, &params).unwrap(), inertia_matrix(&q, &fine).unwrap());
        prop_assert!((m0 - m1).amax() < 1e-6 * m1.amax());
        let (g0, g1) = (conservative_forces(&q, &params).unwrap(), conservative_forces(&q, &fine).unwrap());
        prop_assert!((g0 - g1).amax() < 1e-6 * g1.amax());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normal_force_is_non_adhesive(z in -0.01..0.01f64, zd in -2.0..2.0f64) {
        let f = normal_force(z, zd, &p());
        prop_assert!(f >= 0.0);
        if z >= 0.0 {
            prop_assert_eq!(f, 0.0);
        }
    }

    #[test]
    fn friction_opposes_sliding(fz in 0.0..10.0f64, vx in -1.0..1.0f64, vy in -1.0..1.0f64) {
        let params = p();
        let f = reaction_force(fz, vx, vy, &params).unwrap();
        prop_assert!(f.x * vx <= 0.0 && f.y * vy <= 0.0);
        prop_assert!(f.x.abs() <= params.mu_x * fz + 1e-15);
        prop_assert!(f.y.abs() <= params.mu_y * fz + 1e-15);
        prop_assert_eq!(f.z, fz);
    }

    #[test]
    fn saturated_friction_magnitude(fz in 0.0..10.0f64, vx in 0.02..1.0f64) {
        let params = p();
        let f = reaction_force(fz, vx, 0.0, &params).unwrap();
        prop_assert!(f.x <= 0.0);
        prop_assert!((f.x.abs() - params.mu_x * fz).abs() < 1e-9);
        prop_assert_eq!(f.y, 0.0);
    }

    #[test]
    fn gait_lengths_stay_in_range(t in 0.0..30.0f64, spatial in any::<bool>(), amp in 0.001..=0.05625f64) {
        let mut spec = GaitSpec::new(if spatial { GaitKind::SpatialRolling } else { GaitKind::PlanarRolling });
        spec.amplitude = amp;
        let l = rolling_lengths(&spec, t, &p());
        prop_assert!(l.iter().all(|v| (0.0..=amp).contains(v)));
        let a = rolling_lengths(&spec, t + spec.period(), &p());
        for k in 0..9 {
            prop_assert!((a[k] - l[k]).abs() < 1e-9);
        }
        // spatial = planar with per-section time shifts
        let planar = GaitSpec { kind: GaitKind::PlanarRolling, ..spec.clone() };
        let dt = spec.phase() / (2.0 * PI * spec.frequency);
        for i in 0..3 {
            let shifted = rolling_lengths(&planar, t + i as f64 * dt, &p());
            for j in 0..3 {
                prop_assert!((l[3 * i + j] - shifted[3 * i + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pressure_round_trip_balances_elasticity(l in lengths9()) {
        let params = p();
        let pr = length_to_pressure(&l, &params).unwrap();
        let tau = actuation_vector(&pr, &params).unwrap();
        for k in 0..9 {
            let back = tau[6 + k] / params.pma_stiffness;
            prop_assert!((back - l[k]).abs() < 1e-15);
            prop_assert!((pr[k] * PA_PER_BAR * params.pma_area() - params.pma_stiffness * l[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn velocity_fit_recovers_linear_motion(vx in -0.2..0.2f64, vy in -0.2..0.2f64, x0 in -1.0..1.0f64) {
        let spec = GaitSpec::planar();
        let t: Vec<f64> = (0..=450).map(|k| k as f64 / 30.0).collect();
        let x: Vec<f64> = t.iter().map(|t| x0 + vx * t).collect();
        let y: Vec<f64> = t.iter().map(|t| vy * t).collect();
        let fit = velocity_fit(&t, &x, &y, &spec).unwrap();
        prop_assert!((fit.vx - vx).abs() < 1e-12 && (fit.vy - vy).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn contact_only_where_penetrating(q in state(), v in velocity(), z in 0.0..0.05f64) {
        let params = p();
        let mut q = q;
        q.q[2] = z;
        let (_, pts) = contact_wrench(&q, &v, &default_grid(&params), &params).unwrap();
        for c in pts {
            prop_assert!(c.force.z >= 0.0);
            if c.p.z >= 0.0 {
                prop_assert_eq!(c.force, Vector3::zeros());
            }
        }
    }

    #[test]
    fn contact_grid_sum_is_linear(q in state(), v in velocity(), z in 0.0..0.05f64) {
        let params = p();
        let mut q = q;
        q.q[2] = z;
        let full = skin_grid(&params, 21, 8).unwrap();
        let mut a = full.clone();
        a.xi_samples.truncate(9);
        let mut b = full.clone();
        b.xi_samples.drain(..9);
        let (wf, _) = contact_wrench(&q, &v, &full, &params).unwrap();
        let (wa, _) = contact_wrench(&q, &v, &a, &params).unwrap();
        let (wb, _) = contact_wrench(&q, &v, &b, &params).unwrap();
        prop_assert!((wf - wa - wb).amax() <= 1e-12 * wf.amax().max(1.0));
    }

    #[test]
    fn ik_residual_is_monotone(l in prop::array::uniform9(0.005..0.07f64), d in prop::array::uniform9(-0.003..0.003f64)) {
        let params = p();
        let targets = backbone_relative(&l, 13, &params);
        let start: [f64; 9] = std::array::from_fn(|k| (l[k] + d[k]).clamp(0.0, params.dl_max));
        let fit = ik_fit(&targets, &start, &params).unwrap();
        prop_assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(fit.residual < 1e-12);
    }
}

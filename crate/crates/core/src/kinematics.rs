//! Floating-base constant-curvature kinematics of the backbone and skin.
//!
//! Each section is a circular arc driven by three PMAs spaced `2π/3` apart
//! at radius `r_p`. The arc is parameterized by its bend vector
//! `(bx, by) = κ s (cos φ, sin φ)`, which is linear in the PMA length
//! changes, so poses are analytic everywhere including the straight
//! configuration. Sections are chained through rigid spacers of length
//! `d_rigid` with a rotation about the local Z axis at every junction.
//!
//! Global axial coordinate `xi ∈ [0, 3]`: integer `i` denotes the frame just
//! after the spacer of section `i`, so `xi = 3` is the tail end of the robot
//! (the far face of the last spacer).

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ad::{sinc_of_square, versine_of_square, Dual, Scalar};
use crate::error::{domain, Result};
use crate::params::RobotParams;

/// Number of generalized coordinates: 6 floating-base plus 9 PMA length changes.
pub const N_DOF: usize = 15;
pub const N_BASE: usize = 6;
pub const N_SECTIONS: usize = 3;

pub type Coords = SVector<f64, N_DOF>;
pub type PositionJacobian = SMatrix<f64, 3, N_DOF>;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Full floating-base configuration `q = [x, y, z, α, β, γ, l11, .., l33]`.
///
/// Base orientation is `Rz(γ) · Ry(β) · Rz(α)`: `γ` is heading, `β` tilts the
/// body axis away from world +Z, and `α` spins about the body axis. A robot
/// lying on the ground sits at `β = π/2`, far from the `β ∈ {0, π}`
/// singularities, so continuous rolling about the body axis stays regular.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointState {
    pub q: Coords,
}

impl JointState {
    pub fn new(base: [f64; 6], lengths: [f64; 9]) -> Self {
        let mut q = Coords::zeros();
        q.as_mut_slice()[..6].copy_from_slice(&base);
        q.as_mut_slice()[6..].copy_from_slice(&lengths);
        Self { q }
    }

    pub fn from_coords(q: Coords) -> Self {
        Self { q }
    }

    pub fn zeros() -> Self {
        Self { q: Coords::zeros() }
    }

    pub fn base(&self) -> [f64; 6] {
        let mut b = [0.0; 6];
        b.copy_from_slice(&self.q.as_slice()[..6]);
        b
    }

    pub fn lengths(&self) -> [f64; 9] {
        let mut l = [0.0; 9];
        l.copy_from_slice(&self.q.as_slice()[6..]);
        l
    }

    pub fn section_lengths(&self, section: usize) -> [f64; 3] {
        let o = N_BASE + 3 * section;
        [self.q[o], self.q[o + 1], self.q[o + 2]]
    }

    pub(crate) fn check(&self, params: &RobotParams) -> Result<()> {
        if self.q.iter().any(|v| !v.is_finite()) {
            return Err(domain("joint state contains non-finite entries"));
        }
        // Arc length must stay positive; slight compression below zero
        // length change is physical under load.
        if let Some((k, l)) = self
            .lengths()
            .iter()
            .enumerate()
            .find(|(_, l)| **l <= -0.5 * params.pma_length)
        {
            return Err(domain(format!(
                "PMA {} length change {l} m collapses the section",
                pma_label(k)
            )));
        }
        Ok(())
    }
}

fn pma_label(k: usize) -> String {
    format!("l_{}{}", k / 3 + 1, k % 3 + 1)
}

/// Constant-curvature descriptors of one section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcParameters {
    /// Curvature, 1/m.
    pub kappa: f64,
    /// Bending-plane angle in (-π, π], rad.
    pub phi: f64,
    /// Arc length, m.
    pub s: f64,
}

/// Rigid pose of a frame on the backbone or skin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub position: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            position: Vector3::zeros(),
        }
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            position: self.position + self.rotation * other.position,
        }
    }
}

/// One axial sampling station of the skin grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxialStation {
    /// Global axial coordinate in [0, 3].
    pub xi: f64,
    /// Zero-based section index.
    pub section: usize,
    /// Local coordinate within the section, in [0, 1].
    pub local: f64,
}

/// Discretized skin surface where contact is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinGrid {
    pub xi_samples: Vec<AxialStation>,
    pub sigma_samples: Vec<f64>,
    pub radius: f64,
}

impl SkinGrid {
    pub fn len(&self) -> usize {
        self.xi_samples.len() * self.sigma_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `(station, sigma)` pairs in axial-major order.
    pub fn points(&self) -> impl Iterator<Item = (AxialStation, f64)> + '_ {
        self.xi_samples
            .iter()
            .flat_map(move |st| self.sigma_samples.iter().map(move |&s| (*st, s)))
    }
}

// ---------------------------------------------------------------------------
// Generic frame algebra

#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame<T> {
    pub rot: [[T; 3]; 3],
    pub pos: [T; 3],
}

impl<T: Scalar> Frame<T> {
    pub fn identity() -> Self {
        let z = T::zero();
        let o = T::one();
        Self {
            rot: [[o, z, z], [z, o, z], [z, z, o]],
            pos: [z, z, z],
        }
    }

    pub fn compose(&self, other: &Frame<T>) -> Frame<T> {
        let mut rot = [[T::zero(); 3]; 3];
        let mut pos = self.pos;
        for i in 0..3 {
            for j in 0..3 {
                rot[i][j] = self.rot[i][0] * other.rot[0][j]
                    + self.rot[i][1] * other.rot[1][j]
                    + self.rot[i][2] * other.rot[2][j];
            }
            pos[i] = pos[i]
                + self.rot[i][0] * other.pos[0]
                + self.rot[i][1] * other.pos[1]
                + self.rot[i][2] * other.pos[2];
        }
        Frame { rot, pos }
    }

    /// `self · Trans(0, 0, dz) · Rz(angle)`.
    pub fn then_spacer(&self, dz: f64, angle: f64) -> Frame<T> {
        let (s, c) = angle.sin_cos();
        let mut out = *self;
        for i in 0..3 {
            out.pos[i] = self.pos[i] + self.rot[i][2] * dz;
            let x = self.rot[i][0];
            let y = self.rot[i][1];
            out.rot[i][0] = x * c + y * s;
            out.rot[i][1] = y * c - x * s;
        }
        out
    }

    /// Skin point at angle `sigma` and radius `r` about the local Z axis.
    pub fn skin_point(&self, sigma: f64, r: f64) -> [T; 3] {
        let (s, c) = sigma.sin_cos();
        let (ox, oy) = (r * c, r * s);
        let mut p = self.pos;
        for (i, pi) in p.iter_mut().enumerate() {
            *pi = *pi + self.rot[i][0] * ox + self.rot[i][1] * oy;
        }
        p
    }

    pub fn skin_frame(&self, sigma: f64, r: f64) -> Frame<T> {
        let mut out = self.then_spacer(0.0, sigma);
        out.pos = self.skin_point(sigma, r);
        out
    }
}

impl Frame<f64> {
    pub fn to_pose(&self) -> Pose {
        Pose {
            rotation: Matrix3::from_fn(|i, j| self.rot[i][j]),
            position: Vector3::new(self.pos[0], self.pos[1], self.pos[2]),
        }
    }
}

/// Bend vector `(κ s cos φ, κ s sin φ)` and arc length of a section.
fn bend_vector<T: Scalar>(l: [T; 3], params: &RobotParams) -> (T, T, T) {
    let k = 1.0 / (3.0 * params.r_p);
    let bx = (l[1] + l[2] - l[0] * 2.0) * k;
    let by = (l[2] - l[1]) * (SQRT_3 * k);
    let s = (l[0] + l[1] + l[2]) / 3.0 + params.pma_length;
    (bx, by, s)
}

/// Backbone frame at local coordinate `xi` of a section (no spacer).
pub(crate) fn section_frame<T: Scalar>(l: [T; 3], xi: f64, params: &RobotParams) -> Frame<T> {
    let (bx, by, s) = bend_vector(l, params);
    let a = bx * xi;
    let b = by * xi;
    let x = a * a + b * b;
    let f = sinc_of_square(x);
    let g = versine_of_square(x);
    let arc = s * xi;
    let ga = g * a;
    let gb = g * b;
    let fa = f * a;
    let fb = f * b;
    let o = T::one();
    Frame {
        rot: [
            [o - ga * a, -(ga * b), fa],
            [-(ga * b), o - gb * b, fb],
            [-fa, -fb, o - g * x],
        ],
        pos: [arc * ga, arc * gb, arc * f],
    }
}

/// Floating-base frame from `[x, y, z, α, β, γ]`, rotation `Rz(γ)Ry(β)Rz(α)`.
pub(crate) fn base_frame<T: Scalar>(qb: &[T]) -> Frame<T> {
    let (sa, ca) = (qb[3].sin(), qb[3].cos());
    let (sb, cb) = (qb[4].sin(), qb[4].cos());
    let (sg, cg) = (qb[5].sin(), qb[5].cos());
    Frame {
        rot: [
            [cg * cb * ca - sg * sa, -(cg * cb * sa) - sg * ca, cg * sb],
            [sg * cb * ca + cg * sa, cg * ca - sg * cb * sa, sg * sb],
            [-(sb * ca), sb * sa, cb],
        ],
        pos: [qb[0], qb[1], qb[2]],
    }
}

/// Rotation about local Z applied at every section junction.
///
/// The physical mounting offset is composed with a one-PMA relabeling
/// (`2π/3`), so with the default `π/3` offset consecutive sections are
/// flipped by `π` and equal joint values bend every section in one plane.
pub fn junction_angle(params: &RobotParams) -> f64 {
    params.mount_offset + 2.0 * PI / 3.0
}

/// Where a global axial coordinate lands on the robot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Location {
    Section { index: usize, local: f64 },
    Tail,
}

pub(crate) fn locate(xi: f64) -> Result<Location> {
    if !(0.0..=3.0).contains(&xi) {
        return Err(domain(format!("xi = {xi} outside [0, 3]")));
    }
    if xi == 3.0 {
        return Ok(Location::Tail);
    }
    let index = (xi.floor() as usize).min(N_SECTIONS - 1);
    Ok(Location::Section {
        index,
        local: xi - index as f64,
    })
}

/// Precomputed section start frames for one configuration.
pub(crate) struct Chain<T> {
    starts: [Frame<T>; N_SECTIONS],
    tail: Frame<T>,
    lengths: [[T; 3]; N_SECTIONS],
}

impl<T: Scalar> Chain<T> {
    pub fn new(q: &[T; N_DOF], params: &RobotParams) -> Self {
        let lengths = [
            [q[6], q[7], q[8]],
            [q[9], q[10], q[11]],
            [q[12], q[13], q[14]],
        ];
        let turn = junction_angle(params);
        let mut starts = [Frame::identity(); N_SECTIONS];
        starts[0] = base_frame(&q[..6]);
        let mut tail = starts[0];
        for i in 0..N_SECTIONS {
            let tip = starts[i]
                .compose(&section_frame(lengths[i], 1.0, params))
                .then_spacer(params.d_rigid, turn);
            if i + 1 < N_SECTIONS {
                starts[i + 1] = tip;
            } else {
                tail = tip;
            }
        }
        Self {
            starts,
            tail,
            lengths,
        }
    }

    pub fn backbone(&self, section: usize, local: f64, params: &RobotParams) -> Frame<T> {
        self.starts[section].compose(&section_frame(self.lengths[section], local, params))
    }

    pub fn frame_at(&self, loc: Location, params: &RobotParams) -> Frame<T> {
        match loc {
            Location::Section { index, local } => self.backbone(index, local, params),
            Location::Tail => self.tail,
        }
    }

    pub fn point(&self, loc: Location, sigma: f64, r: f64, params: &RobotParams) -> [T; 3] {
        self.frame_at(loc, params).skin_point(sigma, r)
    }
}

pub(crate) type D15 = Dual<f64, N_DOF>;

pub(crate) fn seeded(q: &Coords) -> [D15; N_DOF] {
    std::array::from_fn(|k| D15::variable(q[k], k))
}

pub(crate) fn jacobian_of(p: &[D15; 3]) -> PositionJacobian {
    PositionJacobian::from_fn(|i, j| p[i].d[j])
}

// ---------------------------------------------------------------------------
// Public operations

fn check_lengths(lengths: [f64; 3], params: &RobotParams) -> Result<()> {
    for (j, l) in lengths.iter().enumerate() {
        if !(l.is_finite() && *l >= 0.0 && *l <= params.dl_max) {
            return Err(domain(format!(
                "PMA {} length change {l} m outside [0, {}]",
                j + 1,
                params.dl_max
            )));
        }
    }
    Ok(())
}

fn check_unit(xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(domain(format!("local xi = {xi} outside [0, 1]")));
    }
    Ok(())
}

/// Curvature, bending-plane angle and arc length of one section.
pub fn arc_params(lengths: [f64; 3], params: &RobotParams) -> Result<ArcParameters> {
    check_lengths(lengths, params)?;
    let [l1, l2, l3] = lengths;
    let sum = l1 + l2 + l3;
    let s = params.pma_length + sum / 3.0;
    let disc = 0.5 * ((l1 - l2).powi(2) + (l2 - l3).powi(2) + (l3 - l1).powi(2));
    let kappa = 2.0 * disc.sqrt() / (params.r_p * (3.0 * params.pma_length + sum));
    if kappa < params.eps_straight {
        return Ok(ArcParameters {
            kappa: 0.0,
            phi: 0.0,
            s,
        });
    }
    let mut phi = f64::atan2(SQRT_3 * (l3 - l2), l2 + l3 - 2.0 * l1);
    if phi <= -PI {
        phi += 2.0 * PI;
    }
    Ok(ArcParameters { kappa, phi, s })
}

/// Backbone pose at local coordinate `xi` of a single section.
pub fn section_htm(lengths: [f64; 3], xi: f64, params: &RobotParams) -> Result<Pose> {
    check_lengths(lengths, params)?;
    check_unit(xi)?;
    Ok(section_frame(lengths, xi, params).to_pose())
}

/// Skin pose: section pose, then `Rz(sigma)`, then a translation `r` along +X.
pub fn skin_htm(
    lengths: [f64; 3],
    xi: f64,
    sigma: f64,
    r: f64,
    params: &RobotParams,
) -> Result<Pose> {
    check_lengths(lengths, params)?;
    check_unit(xi)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain(format!("skin radius {r} must be non-negative")));
    }
    Ok(section_frame(lengths, xi, params)
        .skin_frame(sigma, r)
        .to_pose())
}

/// World pose of the skin point `(xi, sigma, r)` for the full robot.
pub fn full_htm(
    q: &JointState,
    xi: f64,
    sigma: f64,
    r: f64,
    params: &RobotParams,
) -> Result<Pose> {
    q.check(params)?;
    let loc = locate(xi)?;
    let arr: [f64; N_DOF] = q.q.into();
    let chain = Chain::new(&arr, params);
    Ok(chain.frame_at(loc, params).skin_frame(sigma, r).to_pose())
}

/// `∂p/∂q` of the `full_htm` position, by forward-mode differentiation.
pub fn position_jacobian(
    q: &JointState,
    xi: f64,
    sigma: f64,
    r: f64,
    params: &RobotParams,
) -> Result<PositionJacobian> {
    q.check(params)?;
    let loc = locate(xi)?;
    let chain = Chain::new(&seeded(&q.q), params);
    Ok(jacobian_of(&chain.point(loc, sigma, r, params)))
}

/// Uniform `n_axial × n_radial` skin grid over `xi ∈ [0, 3]`.
pub fn skin_grid(params: &RobotParams, n_axial: usize, n_radial: usize) -> Result<SkinGrid> {
    if n_axial < 2 || n_radial < 1 {
        return Err(domain(format!(
            "skin grid needs n_axial >= 2 and n_radial >= 1, got {n_axial} x {n_radial}"
        )));
    }
    let span = N_SECTIONS as f64;
    let xi_samples = (0..n_axial)
        .map(|k| {
            let xi = if k + 1 == n_axial {
                span
            } else {
                span * k as f64 / (n_axial - 1) as f64
            };
            let (section, local) = match locate(xi).expect("grid inside [0,3]") {
                Location::Section { index, local } => (index, local),
                Location::Tail => (N_SECTIONS - 1, 1.0),
            };
            AxialStation { xi, section, local }
        })
        .collect();
    let sigma_samples = (0..n_radial)
        .map(|k| 2.0 * PI * k as f64 / n_radial as f64)
        .collect();
    Ok(SkinGrid {
        xi_samples,
        sigma_samples,
        radius: params.r_s,
    })
}

/// Default 31 × 10 contact grid.
pub fn default_grid(params: &RobotParams) -> SkinGrid {
    skin_grid(params, 31, 10).expect("default grid dimensions are valid")
}

/// World positions of `n` backbone points evenly spaced over `xi ∈ [0, 3]`.
pub fn backbone_points(q: &JointState, n: usize, params: &RobotParams) -> Result<Vec<[f64; 3]>> {
    q.check(params)?;
    let arr: [f64; N_DOF] = q.q.into();
    let chain = Chain::new(&arr, params);
    (0..n.max(2))
        .map(|k| {
            let xi = 3.0 * k as f64 / (n.max(2) - 1) as f64;
            Ok(chain.point(locate(xi.min(3.0))?, 0.0, 0.0, params))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RobotParams {
        RobotParams::default()
    }

    #[test]
    fn straight_section_arc_parameters() {
        let p = params();
        let a = arc_params([0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!((a.kappa, a.phi), (0.0, 0.0));
        assert!((a.s - 0.15).abs() < 1e-15);
        let a = arc_params([0.03, 0.03, 0.03], &p).unwrap();
        assert_eq!(a.kappa, 0.0);
        assert!((a.s - 0.18).abs() < 1e-15);
    }

    #[test]
    fn single_pma_extension_curvature() {
        let a = arc_params([0.03, 0.0, 0.0], &params()).unwrap();
        assert!((a.kappa - 10.0).abs() < 1e-12);
        assert!((a.s - 0.16).abs() < 1e-15);
        assert!((a.phi - PI).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_length_names_pma() {
        let err = arc_params([0.0, 0.08, 0.0], &params()).unwrap_err();
        assert!(err.to_string().contains("PMA 2"), "{err}");
        assert!(arc_params([-1e-3, 0.0, 0.0], &params()).is_err());
    }

    #[test]
    fn straight_section_tip() {
        let p = params();
        let t = section_htm([0.0; 3], 1.0, &p).unwrap();
        assert!((t.rotation - Matrix3::identity()).amax() < 1e-15);
        assert!((t.position - Vector3::new(0.0, 0.0, 0.15)).norm() < 1e-15);
        let t = section_htm([0.0; 3], 0.0, &p).unwrap();
        assert_eq!(t, Pose::identity());
    }

    #[test]
    fn bent_tip_chord_length() {
        let t = section_htm([0.03, 0.0, 0.0], 1.0, &params()).unwrap();
        let chord = 2.0 / 10.0 * (10.0f64 * 0.16 / 2.0).sin();
        assert!((t.position.norm() - chord).abs() < 1e-12);
        assert!((t.position.norm() - 0.143471).abs() < 1e-6);
        // bends away from the extended PMA at +X
        assert!(t.position.x < 0.0);
    }

    #[test]
    fn skin_offsets() {
        let p = params();
        let t = skin_htm([0.0; 3], 0.0, 0.0, 0.03, &p).unwrap();
        assert!((t.position - Vector3::new(0.03, 0.0, 0.0)).norm() < 1e-15);
        let t = skin_htm([0.0; 3], 0.0, PI / 2.0, 0.03, &p).unwrap();
        assert!((t.position - Vector3::new(0.0, 0.03, 0.0)).norm() < 1e-15);
        let l = [0.01, 0.04, 0.02];
        let a = skin_htm(l, 0.4, 1.1, 0.0, &p).unwrap();
        let b = section_htm(l, 0.4, &p).unwrap();
        assert!((a.position - b.position).norm() < 1e-15);
    }

    #[test]
    fn full_robot_length_and_base_translation() {
        let p = params();
        let t = full_htm(&JointState::zeros(), 3.0, 0.0, 0.0, &p).unwrap();
        assert!((t.position - Vector3::new(0.0, 0.0, 0.60)).norm() < 1e-14);

        let q = JointState::new([1.0, 2.0, 3.0, 0.0, 0.0, 0.0], [0.0; 9]);
        let t = full_htm(&q, 0.0, 0.0, 0.0, &p).unwrap();
        assert!((t.position - Vector3::new(1.0, 2.0, 3.0)).norm() < 1e-15);

        let q = JointState::new([0.0, 0.0, 0.0, 0.0, 0.0, PI], [0.0; 9]);
        let t = full_htm(&q, 3.0, 0.0, 0.0, &p).unwrap();
        assert!((t.position - Vector3::new(0.0, 0.0, 0.60)).norm() < 1e-14);
    }

    #[test]
    fn xi_out_of_range_is_rejected() {
        let p = params();
        assert!(full_htm(&JointState::zeros(), 3.1, 0.0, 0.0, &p).is_err());
        assert!(full_htm(&JointState::zeros(), -0.1, 0.0, 0.0, &p).is_err());
    }

    #[test]
    fn equal_joint_values_bend_sections_in_one_plane() {
        let p = params();
        let q = JointState::new([0.0; 6], [0.03, 0.0, 0.0, 0.03, 0.0, 0.0, 0.03, 0.0, 0.0]);
        for k in 0..=30 {
            let t = full_htm(&q, 0.1 * k as f64, 0.0, 0.0, &p).unwrap();
            assert!(t.position.y.abs() < 1e-12, "xi {}", 0.1 * k as f64);
        }
    }

    #[test]
    fn grid_shapes() {
        let p = params();
        let g = default_grid(&p);
        assert_eq!(g.len(), 310);
        assert_eq!(g.xi_samples.first().unwrap().xi, 0.0);
        assert_eq!(g.xi_samples.last().unwrap().xi, 3.0);
        let g = skin_grid(&p, 2, 1).unwrap();
        let xs: Vec<f64> = g.xi_samples.iter().map(|s| s.xi).collect();
        assert_eq!(xs, vec![0.0, 3.0]);
        assert_eq!(g.sigma_samples, vec![0.0]);
        assert!(skin_grid(&p, 1, 3).is_err());
        assert!(skin_grid(&p, 3, 0).is_err());
    }

    #[test]
    fn grid_points_on_cylinder_when_straight() {
        let p = params();
        let g = default_grid(&p);
        for (st, sigma) in g.points() {
            let t = full_htm(&JointState::zeros(), st.xi, sigma, g.radius, &p).unwrap();
            let rho = t.position.x.hypot(t.position.y);
            assert!((rho - p.r_s).abs() < 1e-14);
        }
    }

    #[test]
    fn base_translation_columns_are_identity() {
        let p = params();
        let q = JointState::new(
            [0.1, -0.2, 0.3, 0.4, 1.2, -0.7],
            [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.0, 0.02],
        );
        let j = position_jacobian(&q, 2.35, 0.8, 0.03, &p).unwrap();
        let block = j.fixed_view::<3, 3>(0, 0);
        assert!((block - Matrix3::identity()).amax() < 1e-15);
        let j0 = position_jacobian(&JointState::zeros(), 0.0, 0.0, 0.0, &p).unwrap();
        assert!(j0.fixed_view::<3, 9>(0, 6).amax() == 0.0);
    }
}

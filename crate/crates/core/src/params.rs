//! Physical constants of the three-section snake and its ground model.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Pascals per bar.
pub const PA_PER_BAR: f64 = 1.0e5;

/// Every physical constant of the robot, the PMAs and the ground.
///
/// Config files use the short symbolic names (`L0`, `K_g`, ...) given in the
/// `serde` renames below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotParams {
    pub n_sections: usize,
    /// Unactuated PMA length, m.
    #[serde(rename = "L0")]
    pub pma_length: f64,
    /// PMA mounting radius from the section centerline, m.
    pub r_p: f64,
    /// Skin radius where contact points live, m.
    pub r_s: f64,
    /// Rigid spacer (mounting frame) length at each section tip, m.
    pub d_rigid: f64,
    /// Total mass, kg. Split evenly between sections.
    pub m_total: f64,
    /// Angular offset between consecutive sections' mounting frames, rad.
    pub mount_offset: f64,
    /// Maximum PMA extension, m.
    pub dl_max: f64,
    /// Per-PMA elastic stiffness, N/m.
    #[serde(rename = "K_elastic")]
    pub pma_stiffness: f64,
    /// Per-PMA damping, N s/m.
    #[serde(rename = "D_damp")]
    pub pma_damping: f64,
    /// Ground stiffness per contact point, N/m.
    #[serde(rename = "K_g")]
    pub ground_stiffness: f64,
    /// Ground damping per contact point, N s/m.
    #[serde(rename = "B_g")]
    pub ground_damping: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    /// Gravitational acceleration magnitude, m/s^2 (acts along -Z).
    pub g: f64,
    /// PMA cross-sectional area, m^2. Defaults to the value that makes the
    /// maximum pressure statically produce `dl_max` against `K_elastic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_pma: Option<f64>,
    /// Maximum admissible PMA pressure, bar.
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    /// Velocity scale of the tanh friction regularization, m/s.
    #[serde(default = "default_v_eps")]
    pub v_eps: f64,
    /// Radius of the mass ring representing each slice, m.
    /// Defaults to `r_s / sqrt(2)` (solid-cylinder gyration radius).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_ring_radius: Option<f64>,
    /// Gauss-Legendre nodes per section for mass integrals.
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    /// Curvature below which a section is reported as straight, 1/m.
    #[serde(default = "default_eps_straight")]
    pub eps_straight: f64,
    /// Optional length-to-pressure calibration table, `[length m, pressure bar]`
    /// pairs with strictly increasing lengths. Linear `l / (dl_max / p_max)`
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_calibration: Option<Vec<[f64; 2]>>,
}

fn default_p_max() -> f64 {
    4.0
}
fn default_v_eps() -> f64 {
    1.0e-3
}
fn default_quad_nodes() -> usize {
    11
}
fn default_eps_straight() -> f64 {
    1.0e-6
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            n_sections: 3,
            pma_length: 0.15,
            r_p: 0.0125,
            r_s: 0.03,
            d_rigid: 0.05,
            m_total: 0.35,
            mount_offset: PI / 3.0,
            dl_max: 0.075,
            pma_stiffness: 1900.0,
            pma_damping: 90.0,
            ground_stiffness: 1000.0,
            ground_damping: 130.0,
            mu_x: 0.6,
            mu_y: 0.2,
            g: 9.81,
            a_pma: None,
            p_max: default_p_max(),
            v_eps: default_v_eps(),
            mass_ring_radius: None,
            quad_nodes: default_quad_nodes(),
            eps_straight: default_eps_straight(),
            pressure_calibration: None,
        }
    }
}

impl RobotParams {
    /// Mass of one section, kg.
    pub fn section_mass(&self) -> f64 {
        self.m_total / self.n_sections as f64
    }

    /// Unactuated end-to-end length including spacers, m.
    pub fn total_length(&self) -> f64 {
        self.n_sections as f64 * (self.pma_length + self.d_rigid)
    }

    pub fn pma_area(&self) -> f64 {
        self.a_pma
            .unwrap_or(self.pma_stiffness * self.dl_max / (self.p_max * PA_PER_BAR))
    }

    pub fn ring_radius(&self) -> f64 {
        self.mass_ring_radius
            .unwrap_or(self.r_s / std::f64::consts::SQRT_2)
    }

    /// Static penetration of a rigid body of the robot's weight on one ground spring, m.
    pub fn static_penetration(&self) -> f64 {
        self.m_total * self.g / self.ground_stiffness
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sections != 3 {
            return Err(domain(format!(
                "n_sections must be 3, got {}",
                self.n_sections
            )));
        }
        let positive = [
            ("L0", self.pma_length),
            ("r_p", self.r_p),
            ("r_s", self.r_s),
            ("m_total", self.m_total),
            ("dl_max", self.dl_max),
            ("K_elastic", self.pma_stiffness),
            ("K_g", self.ground_stiffness),
            ("p_max", self.p_max),
            ("v_eps", self.v_eps),
            ("pma_area", self.pma_area()),
            ("eps_straight", self.eps_straight),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let non_negative = [
            ("d_rigid", self.d_rigid),
            ("D_damp", self.pma_damping),
            ("B_g", self.ground_damping),
            ("mu_x", self.mu_x),
            ("mu_y", self.mu_y),
            ("g", self.g),
            ("mass_ring_radius", self.ring_radius()),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !self.mount_offset.is_finite() {
            return Err(domain("mount_offset must be finite"));
        }
        if self.dl_max >= self.pma_length {
            return Err(domain("dl_max must be smaller than L0"));
        }
        if self.r_p >= self.r_s {
            return Err(domain("r_p must be smaller than r_s"));
        }
        if self.quad_nodes == 0 {
            return Err(domain("quad_nodes must be at least 1"));
        }
        if let Some(table) = &self.pressure_calibration {
            if table.len() < 2 {
                return Err(domain("pressure_calibration needs at least two points"));
            }
            if table.windows(2).any(|w| w[1][0] <= w[0][0]) {
                return Err(domain(
                    "pressure_calibration lengths must be strictly increasing",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = RobotParams::default();
        p.validate().unwrap();
        assert!((p.total_length() - 0.60).abs() < 1e-15);
        assert!((p.pma_area() - 3.5625e-4).abs() < 1e-18);
        assert!((p.section_mass() * 3.0 - 0.35).abs() < 1e-15);
    }

    #[test]
    fn rejects_inverted_radii() {
        let p = RobotParams {
            r_s: 0.01,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_extension_beyond_length() {
        let p = RobotParams {
            dl_max: 0.2,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}

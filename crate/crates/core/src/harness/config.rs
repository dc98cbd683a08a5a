use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaits::GaitSpec;
use crate::integrator::IntegratorConfig;
use crate::kinematics::{skin_grid, SkinGrid};
use crate::params::RobotParams;

/// Skin sampling used for contact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_axial: usize,
    pub n_radial: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_axial: 31,
            n_radial: 10,
        }
    }
}

/// One experiment: a drop test when `gait` is absent, a gait run otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub robot: RobotParams,
    pub integrator: IntegratorConfig,
    pub grid: GridConfig,
    /// Release height of the base origin, m.
    pub drop_height: f64,
    /// Settling time before a gait starts, s. Also the drop-test duration.
    pub settle_time: f64,
    /// Ground contact on or off.
    pub contact: bool,
    pub output_dir: PathBuf,
    /// Seed for randomized self-checks; dynamics are deterministic.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gait: Option<GaitSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            robot: RobotParams::default(),
            integrator: IntegratorConfig::default(),
            grid: GridConfig::default(),
            drop_height: 0.6,
            settle_time: 2.0,
            contact: true,
            output_dir: PathBuf::from("out"),
            seed: 0,
            gait: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.integrator.validate()?;
        self.skin_grid()?;
        if !(self.drop_height.is_finite() && self.drop_height >= self.robot.r_s) {
            return Err(domain(format!(
                "drop_height {} m must be at least the skin radius {} m",
                self.drop_height, self.robot.r_s
            )));
        }
        if !(self.settle_time.is_finite() && self.settle_time > 0.0) {
            return Err(domain(format!("settle_time {} must be positive", self.settle_time)));
        }
        if let Some(g) = &self.gait {
            g.validate(&self.robot)?;
        }
        Ok(())
    }

    pub fn skin_grid(&self) -> Result<SkinGrid> {
        skin_grid(&self.robot, self.grid.n_axial, self.grid.n_radial)
    }

    /// Ensure the output directory exists and is writable.
    pub fn prepare_output_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.output_dir)?;
        let probe = self.output_dir.join(".write-probe");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        Ok(&self.output_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaits::GaitKind;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = ExperimentConfig {
            gait: Some(GaitSpec::spatial()),
            seed: 42,
            ..Default::default()
        };
        cfg.robot.ground_stiffness = 2500.0;
        cfg.robot.pressure_calibration = Some(vec![[0.0, 0.0], [0.075, 4.0]]);
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn symbolic_names_and_partial_tables() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            drop_height = 0.4
            [robot]
            K_g = 10000.0
            [gait]
            kind = "planar_rolling"
            frequency = 0.25
            "#,
        )
        .unwrap();
        assert_eq!(cfg.robot.ground_stiffness, 10000.0);
        assert_eq!(cfg.robot.pma_length, 0.15);
        let g = cfg.gait.unwrap();
        assert_eq!(g.kind, GaitKind::PlanarRolling);
        assert_eq!(g.frequency, 0.25);
        assert_eq!(g.duration, 15.0);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("[robot]\nmu_z = 0.1").is_err());
        assert!(ExperimentConfig::from_toml_str("drop_height = -1.0").is_err());
        let err = ExperimentConfig::from_toml_str("[gait]\nkind = \"planar_rolling\"\namplitude = 0.2")
            .unwrap_err();
        assert_eq!(err.kind(), "input_domain");
    }
}

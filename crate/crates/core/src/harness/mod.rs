//! Experiment layer: configs, drop and gait runs, metrics and file export.

pub mod check;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod plot;

pub use check::{random_states, self_check, RandomState, SelfCheck};
pub use config::{ExperimentConfig, GridConfig};
pub use experiment::{
    drop_pose, finish_gait, run_drop_test, run_gait, run_gait_from, DropReport, DropRun, GaitRun,
    SkinSample,
};
pub use metrics::{compute_metrics, velocity_fit, GaitMetrics, VelocityFit};
pub use plot::export_plots;

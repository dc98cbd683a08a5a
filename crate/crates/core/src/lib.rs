//! Spatial dynamics of a three-section pneumatic soft robotic snake.
//!
//! The crate is organized bottom-up:
//!
//! - [`kinematics`]: floating-base constant-curvature poses and exact
//!   position Jacobians of backbone and skin points.
//! - [`dynamics`]: inertia, Coriolis, damping, conservative and actuation
//!   terms of the Lagrangian equations of motion, and the forward solve.
//! - [`contact`]: spring-damper ground contact with anisotropic regularized
//!   friction over a 31 × 10 skin grid.
//! - [`integrator`]: a stiff adaptive ESDIRK integrator and a fixed-step
//!   semi-implicit fallback with 30 Hz dense output.
//! - [`gaits`]: planar and spatial rolling trajectories, length-to-pressure
//!   mapping and a bounded least-squares inverse kinematics fit.
//! - [`harness`]: experiment configs, drop and gait experiments, locomotion
//!   metrics and CSV/SVG export.

pub mod ad;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod gaits;
pub mod harness;
pub mod integrator;
pub mod kinematics;
pub mod params;
pub mod quadrature;

pub use error::{Error, Result};
pub use kinematics::{JointState, Pose, SkinGrid};
pub use params::RobotParams;

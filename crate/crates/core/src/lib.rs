//! Simulation of a multi-RIS assisted massive-MIMO downlink serving several
//! single-antenna UAVs.
//!
//! The crate covers the propagation model ([`scene`], [`channel`]), the
//! fairness metrics ([`metrics`]) and the closed-form parts of the
//! optimizers ([`solvers`]). Learning-based search lives in `ris-ddpg`.

pub mod channel;
pub mod linalg;
pub mod metrics;
pub mod scene;
pub mod solvers;

pub use channel::{assemble_channels, cascaded_channel, ChannelSet, PhaseConfig};
pub use linalg::{CMatrix, LinalgError};
pub use metrics::{sinr_report, SinrReport};
pub use scene::{build_geometry, GeometrySet, LinkGeometry, SceneError, SystemConfig};
pub use solvers::{AssociationMatrix, BeamformingMatrix, IcScaling, SolverError};

pub use num_complex::Complex64;

//! Design calculations for a tabletop test of gravity-induced entanglement
//! between two levitated microdiamonds separated by a conducting plate.
//!
//! Everything is generic over the scalar type through [`scalar::Real`]. The
//! aliases below fix it to `f64`, which is what the searches and the command
//! line use. `f32` is fine for the closed-form scalings but too coarse for
//! phases built from differences of nearly equal inverse distances.

pub mod casimir;
pub mod constants;
pub mod decoherence;
pub mod designer;
pub mod error;
pub mod kinematics;
pub mod ode;
pub mod phase;
pub mod plate;
pub mod quadrature;
pub mod scalar;
pub mod witness;

pub use decoherence::Channel;
pub use error::{Error, Result};
pub use kinematics::{Step, StepMarkers};
pub use scalar::Real;
pub use witness::{DephasingModel, Pauli};

pub type PhysicalConstants = constants::PhysicalConstants<f64>;
pub type MaterialPreset = constants::MaterialPreset<f64>;
pub type TestMassSpec = casimir::TestMassSpec<f64>;
pub type DriveSpec = kinematics::DriveSpec<f64>;
pub type GeometrySpec = kinematics::GeometrySpec<f64>;
pub type TrajectoryProfile = kinematics::TrajectoryProfile<f64>;
pub type PhaseBreakdown = phase::PhaseBreakdown<f64>;
pub type PairPhases = phase::PairPhases<f64>;
pub type EnvironmentSpec = decoherence::EnvironmentSpec<f64>;
pub type DecoherenceBudget = decoherence::DecoherenceBudget<f64>;
pub type SpinState = witness::SpinState<f64>;
pub type DensityMatrix = witness::DensityMatrix<f64>;
pub type WitnessOperator = witness::WitnessOperator<f64>;
pub type PlateSpec = plate::PlateSpec<f64>;
pub type PlateAssessment = plate::PlateAssessment<f64>;
pub type ExperimentConfig = designer::ExperimentConfig<f64>;
pub type FeasibilityReport = designer::FeasibilityReport<f64>;
pub type SweepResult = designer::SweepResult<f64>;

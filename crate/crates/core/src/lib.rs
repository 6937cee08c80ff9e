//! Pseudo-spectral solver for the time relaxation regularization of the
//! incompressible Navier-Stokes equations on a triply periodic box, with
//! energy diagnostics and the dissipation-bound check.
//!
//! Numerics are generic over [`Real`] (implemented for `f32` and `f64`); the
//! `*64` and `*32` aliases below fix the scalar.

pub mod diagnostics;
pub mod error;
pub mod filter;
pub mod planner;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::ConfigError;
pub use scalar::Real;

pub type GridSpec64 = spectral::GridSpec<f64>;
pub type GridSpec32 = spectral::GridSpec<f32>;
pub type SpectralField64 = spectral::SpectralField<f64>;
pub type SpectralField32 = spectral::SpectralField<f32>;
pub type PhysicalField64 = spectral::PhysicalField<f64>;
pub type PhysicalField32 = spectral::PhysicalField<f32>;
pub type FilterSpec64 = filter::FilterSpec<f64>;
pub type FilterSpec32 = filter::FilterSpec<f32>;
pub type FlowConfig64 = solver::FlowConfig<f64>;
pub type FlowConfig32 = solver::FlowConfig<f32>;
pub type Solver64 = solver::Solver<f64>;
pub type Solver32 = solver::Solver<f32>;
pub type SolverState64 = solver::SolverState<f64>;
pub type EnergyRecord64 = diagnostics::EnergyRecord<f64>;
pub type ScaleStats64 = diagnostics::ScaleStats<f64>;

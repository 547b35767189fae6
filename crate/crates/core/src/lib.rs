//! Timoshenko analysis of round shafts on two bearings, at three levels of
//! detail (deflection, static stress, fatigue), together with an independent
//! quadrature oracle and the verification gate used by the dataset factory.
//!
//! The numerics are generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the data pipeline
//! uses; `*F32` aliases are provided for the single-precision variant.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod fatigue;
pub mod oracle;
pub mod scalar;
mod serde_ext;
pub mod solver;
pub mod stress;
pub mod verification;

pub use analysis::{analyze, registered_unit, Level, Quantity, SolverKind, QUANTITY_REGISTRY};
pub use domain::{section_properties, SurfaceFinish, SPEC_SCHEMA_VERSION};
pub use error::{Error, Result};
pub use fatigue::{endurance_limit, goodman_safety, marin_factors, Reliability};
pub use oracle::numerical_oracle;
pub use scalar::Scalar;
pub use solver::{build_grid, internal_forces, reactions, solve, solve_on_grid, DEFAULT_GRID};
pub use stress::{bending_stress, torsional_stress, von_mises, yield_analysis};
pub use verification::{verify_all, LevelId, LevelResult, VerificationConfig, VerificationReport};

pub type ShaftSpec = domain::ShaftSpec<f64>;
pub type Material = domain::Material<f64>;
pub type PointLoad = domain::PointLoad<f64>;
pub type PointTorque = domain::PointTorque<f64>;
pub type TorquePair = domain::TorquePair<f64>;
pub type SectionProperties = domain::SectionProperties<f64>;
pub type BeamFields = domain::BeamFields<f64>;
pub type Reactions = solver::Reactions<f64>;
pub type StressReport = stress::StressReport<f64>;
pub type MarinFactors = fatigue::MarinFactors<f64>;
pub type FatigueReport = fatigue::FatigueReport<f64>;
pub type AnalysisOptions = analysis::AnalysisOptions<f64>;
pub type Analysis = analysis::Analysis<f64>;
pub type Reports = verification::Reports<f64>;

pub type ShaftSpecF32 = domain::ShaftSpec<f32>;
pub type BeamFieldsF32 = domain::BeamFields<f32>;
pub type AnalysisF32 = analysis::Analysis<f32>;

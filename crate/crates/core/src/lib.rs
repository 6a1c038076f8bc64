//! Vibration-assisted excitation transport along a driven two-level chain.

pub mod bessel;
pub mod chain;
pub mod density;
pub mod error;
pub mod experiments;
pub mod full;
pub mod linalg;
pub mod num;
pub mod ode;
pub mod presets;
pub mod reduced;
pub mod resonance;

pub use error::{Error, Result};

pub type ChainParams64 = chain::ChainParams<f64>;
pub type ChainConfig64 = chain::ChainConfig<f64>;
pub type DensityMatrix64 = density::DensityMatrix<f64>;
pub type InitialState64 = density::InitialState<f64>;
pub type IntegrationOptions64 = reduced::IntegrationOptions<f64>;
pub type Trajectory64 = reduced::Trajectory<f64>;
pub type FullModelConfig64 = full::FullModelConfig<f64>;
pub type ResonanceReport64 = resonance::ResonanceReport<f64>;
pub type SweepResult64 = experiments::SweepResult<f64>;
pub type DisorderSpec64 = experiments::DisorderSpec<f64>;
pub type BetaGrid64 = experiments::BetaGrid<f64>;


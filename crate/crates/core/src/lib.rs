//! Full counting statistics of the heat exchanged between a two-level system
//! and a harmonic bath, computed with a counting-field extension of the
//! time-evolving matrix product operator (TEMPO) method.
//!
//! The engines are generic over the floating point type through
//! [`scalar::Real`]; the aliases below fix it to `f64`, which is what every
//! documented tolerance assumes.

pub mod bathcorr;
pub mod error;
pub mod heatstats;
pub mod ibm;
pub mod influence;
pub mod quad;
pub mod quapi;
pub mod scalar;
pub mod spinsys;
pub mod tempo;
pub mod tensornet;
pub mod varpol;

pub use error::{Error, Result};

/// Complex `f64`.
pub type C64 = scalar::Cplx<f64>;
pub type SpectralDensity = bathcorr::SpectralDensity<f64>;
pub type BathParams = bathcorr::BathParams<f64>;
pub type EtaTable = bathcorr::EtaTable<f64>;
pub type EtaOptions = bathcorr::EtaOptions<f64>;
pub type SpinParams = spinsys::SpinParams<f64>;
pub type SpinState = spinsys::SpinState<f64>;
pub type Mat2 = spinsys::Mat2<f64>;
pub type PairWeight = influence::PairWeight<f64>;
pub type TruncationPolicy = tensornet::TruncationPolicy<f64>;
pub type TensorTrain = tensornet::TensorTrain<f64>;
pub type DenseTensor = tensornet::DenseTensor<f64>;
pub type RunConfig = tempo::RunConfig<f64>;
pub type CharSeries = tempo::CharSeries<f64>;
pub type TempoOutput = tempo::TempoOutput<f64>;
pub type HeatCumulants = heatstats::HeatCumulants<f64>;
pub type ThermoLedger = heatstats::ThermoLedger<f64>;
pub type VariationalSolution = varpol::VariationalSolution<f64>;
pub type EquilibriumPrediction = varpol::EquilibriumPrediction<f64>;

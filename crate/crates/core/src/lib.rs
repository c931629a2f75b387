//! Embedding-based weighted multivariate fuzzy time series forecasting.
//!
//! High-dimensional series are projected to a few latent dimensions (PCA, an
//! autoencoder or a self-organizing map), each latent dimension and the
//! target are partitioned into triangular fuzzy sets, and a weighted
//! first-order rule base forecasts the target one step ahead.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod backtest;
pub mod dataio;
pub mod embedding;
pub mod error;
pub mod fuzzy;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod wmvfts;

pub use backtest::{BacktestOutput, BacktestReport, ExperimentConfig, ModelKind};
pub use error::{Error, Result};
pub use fuzzy::PartitionConfig;
pub use embedding::{EmbeddingConfig, EmbeddingKind};
pub use metrics::MetricReport;
pub use model::ModelConfig;
pub use scalar::Scalar;

pub type Series = dataio::MultivariateSeries<f64>;
pub type Embedding = embedding::EmbeddingModel<f64>;
pub type LinguisticVariable = fuzzy::LinguisticVariable<f64>;
pub type RuleBase = wmvfts::WeightedRuleBase<f64>;
pub type Forecaster = model::GammaFts<f64>;

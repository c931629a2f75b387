//! Embedding functions mapping `M` raw variables to `K` latent dimensions.
//!
//! Three projections are available: principal components, an autoencoder's
//! encoder, and the grid coordinates of a self-organizing map's
//! best-matching cell. All are fitted on training rows only.

pub mod ae;
pub mod pca;
pub mod som;

use serde::{Deserialize, Serialize};

pub use ae::{Activation, AeHyperparams, AeModel, DenseLayer};
pub use pca::PcaModel;
pub use som::{Neighborhood, SomHyperparams, SomModel};

use crate::dataio::{MinMaxScaler, MultivariateSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Pca,
    #[serde(alias = "autoencoder")]
    Ae,
    Som,
}

impl EmbeddingKind {
    pub fn label(self) -> &'static str {
        match self {
            EmbeddingKind::Pca => "PCA",
            EmbeddingKind::Ae => "AE",
            EmbeddingKind::Som => "SOM",
        }
    }

    pub fn needs_seed(self) -> bool {
        !matches!(self, EmbeddingKind::Pca)
    }
}

/// Everything needed to fit one embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub kind: EmbeddingKind,
    pub k: usize,
    /// Min-max scale inputs before projecting. Always on for the autoencoder.
    pub scale: bool,
    /// Include the target among the embedded inputs.
    pub embed_target: bool,
    pub seed: Option<u64>,
    pub ae: AeHyperparams,
    pub som: SomHyperparams,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            kind: EmbeddingKind::Pca,
            k: 2,
            scale: true,
            embed_target: false,
            seed: None,
            ae: AeHyperparams::default(),
            som: SomHyperparams::default(),
        }
    }
}

/// The fitted projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", bound = "")]
pub enum Projection<F: Scalar> {
    Pca(PcaModel<F>),
    Autoencoder(AeModel<F>),
    Som(SomModel<F>),
}

/// A fitted embedding `R^M -> R^K` with its input variable order and the
/// optional input scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EmbeddingModel<F: Scalar> {
    pub inputs: Vec<String>,
    pub scaler: Option<MinMaxScaler<F>>,
    pub projection: Projection<F>,
}

/// Name of the `i`-th embedded column.
pub fn dim_name(i: usize) -> String {
    format!("dim_{i}")
}

impl<F: Scalar> EmbeddingModel<F> {
    /// Fits on the training series, choosing inputs according to
    /// `config.embed_target`.
    pub fn fit(train: &MultivariateSeries<F>, config: &EmbeddingConfig) -> Result<Self> {
        let inputs = if config.embed_target {
            train.names().to_vec()
        } else {
            train.exogenous_names()
        };
        if inputs.is_empty() {
            return Err(Error::Argument("no input variables to embed".into()));
        }
        let raw = train.matrix_of(&inputs)?;
        let scale = config.scale || config.kind == EmbeddingKind::Ae;
        let scaler = if scale {
            Some(MinMaxScaler::fit_rows(&inputs, &raw)?)
        } else {
            None
        };
        let rows: Vec<Vec<F>> = match &scaler {
            Some(s) => raw.iter().map(|r| s.apply_row(r)).collect::<Result<_>>()?,
            None => raw,
        };
        let seed = || {
            config.seed.ok_or_else(|| {
                Error::Config(format!("{} embedding requires an explicit seed", config.kind.label()))
            })
        };
        let projection = match config.kind {
            EmbeddingKind::Pca => Projection::Pca(PcaModel::fit(&rows, config.k)?),
            EmbeddingKind::Ae => {
                let hp = AeHyperparams {
                    seed: seed()?,
                    ..config.ae.clone()
                };
                Projection::Autoencoder(AeModel::fit(&rows, config.k, &hp)?)
            }
            EmbeddingKind::Som => {
                let hp = SomHyperparams {
                    seed: seed()?,
                    ..config.som.clone()
                };
                Projection::Som(SomModel::fit(&rows, config.k, &hp)?)
            }
        };
        Ok(Self {
            inputs,
            scaler,
            projection,
        })
    }

    pub fn kind(&self) -> EmbeddingKind {
        match self.projection {
            Projection::Pca(_) => EmbeddingKind::Pca,
            Projection::Autoencoder(_) => EmbeddingKind::Ae,
            Projection::Som(_) => EmbeddingKind::Som,
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.projection {
            Projection::Pca(p) => p.k,
            Projection::Autoencoder(a) => a.code_dim(),
            Projection::Som(s) => s.k,
        }
    }

    /// Embeds one raw input vector laid out in `self.inputs` order.
    pub fn embed(&self, raw: &[F]) -> Result<Vec<F>> {
        let scaled;
        let y = match &self.scaler {
            Some(s) => {
                scaled = s.apply_row(raw)?;
                &scaled[..]
            }
            None => raw,
        };
        match &self.projection {
            Projection::Pca(p) => p.embed(y),
            Projection::Autoencoder(a) => a.embed(y),
            Projection::Som(s) => s.embed(y),
        }
    }

    /// Column indices of the model inputs within `series`.
    pub fn input_indices(&self, series: &MultivariateSeries<F>) -> Result<Vec<usize>> {
        self.inputs
            .iter()
            .map(|n| {
                series
                    .column_index(n)
                    .map_err(|_| Error::Schema(format!("embedding input `{n}` missing from series")))
            })
            .collect()
    }

    /// Row-wise embedding. The output holds `dim_0 .. dim_{K-1}` followed by
    /// the unchanged target column.
    pub fn embed_series(&self, series: &MultivariateSeries<F>) -> Result<MultivariateSeries<F>> {
        let idx = self.input_indices(series)?;
        let tgt = series.target_index();
        let k = self.output_dim();
        let mut names: Vec<String> = (0..k).map(dim_name).collect();
        if names.iter().any(|n| n == series.target()) {
            return Err(Error::Schema(format!("target name `{}` collides with an embedded column", series.target())));
        }
        names.push(series.target().to_string());
        let mut values = Vec::with_capacity(series.len() * (k + 1));
        let mut raw = vec![F::zero(); idx.len()];
        for row in series.rows() {
            for (r, &j) in raw.iter_mut().zip(&idx) {
                *r = row[j];
            }
            values.extend(self.embed(&raw)?);
            values.push(row[tgt]);
        }
        MultivariateSeries::new(series.timestamps().to_vec(), names, values, series.target())
    }
}

//! The full forecaster: embedding, per-dimension partitions and rule base,
//! fitted together on one training series.

use serde::{Deserialize, Serialize};

use crate::dataio::MultivariateSeries;
use crate::embedding::{EmbeddingConfig, EmbeddingModel};
use crate::error::{Error, Result};
use crate::fuzzy::{LinguisticVariable, PartitionConfig};
use crate::scalar::Scalar;
use crate::wmvfts::{Forecast, WeightedRuleBase};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub embedding: EmbeddingConfig,
    pub partition: PartitionConfig,
}

/// Serializable snapshot of a trained forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GammaFts<F: Scalar> {
    /// Raw column layout expected by [`GammaFts::forecast_one`].
    pub columns: Vec<String>,
    pub target: String,
    pub embedding: EmbeddingModel<F>,
    pub rulebase: WeightedRuleBase<F>,
}

/// Partitions every column of an (embedded) series.
pub fn partition_series<F: Scalar>(
    series: &MultivariateSeries<F>,
    config: &PartitionConfig,
) -> Result<Vec<LinguisticVariable<F>>> {
    (0..series.width())
        .map(|j| LinguisticVariable::partition(&series.names()[j], &series.column_at(j), config))
        .collect()
}

impl<F: Scalar> GammaFts<F> {
    pub fn fit(train: &MultivariateSeries<F>, config: &ModelConfig) -> Result<Self> {
        let embedding = EmbeddingModel::fit(train, &config.embedding)?;
        Self::fit_with_embedding(train, embedding, &config.partition)
    }

    /// Fits partitions and rules on `train` around an already fitted
    /// embedding.
    pub fn fit_with_embedding(
        train: &MultivariateSeries<F>,
        embedding: EmbeddingModel<F>,
        partition: &PartitionConfig,
    ) -> Result<Self> {
        let embedded = embedding.embed_series(train)?;
        let variables = partition_series(&embedded, partition)?;
        let rulebase = WeightedRuleBase::train(&embedded, variables, train.target())?;
        Ok(Self {
            columns: train.names().to_vec(),
            target: train.target().to_string(),
            embedding,
            rulebase,
        })
    }

    fn check_layout(&self, series: &MultivariateSeries<F>) -> Result<()> {
        if series.target() != self.target {
            return Err(Error::Schema(format!(
                "series target `{}` differs from model target `{}`",
                series.target(),
                self.target
            )));
        }
        self.embedding.input_indices(series).map(|_| ())
    }

    /// Forecast for `t + 1` from one raw row laid out as `self.columns`.
    pub fn forecast_one(&self, row: &[F]) -> Result<Forecast<F>> {
        if row.len() != self.columns.len() {
            return Err(Error::Schema(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.columns.len()
            )));
        }
        let pick = |name: &str| self.columns.iter().position(|c| c == name).expect("model columns are consistent");
        let raw: Vec<F> = self.embedding.inputs.iter().map(|n| row[pick(n)]).collect();
        let mut y = self.embedding.embed(&raw)?;
        y.push(row[pick(&self.target)]);
        self.rulebase.forecast(&y)
    }

    /// One forecast per row but the last; entry `t` predicts row `t + 1`.
    pub fn forecast_series(&self, series: &MultivariateSeries<F>) -> Result<Vec<Forecast<F>>> {
        self.check_layout(series)?;
        let embedded = self.embedding.embed_series(series)?;
        self.rulebase.forecast_series(&embedded)
    }

    pub fn rule_count(&self) -> usize {
        self.rulebase.rule_count()
    }

    pub fn rules_text(&self) -> String {
        self.rulebase.to_text()
    }
}

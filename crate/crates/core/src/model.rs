//! A trained classifier of either kind, as stored on disk.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, TimeSeries};
use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::tree::ShapeletTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum Model {
    Tree(ShapeletTree),
    Ensemble(Ensemble),
}

impl Model {
    pub fn predict(&self, series: &TimeSeries) -> Result<Label> {
        match self {
            Model::Tree(t) => t.predict(series),
            Model::Ensemble(e) => e.classify(series),
        }
    }

    /// Fraction of `d` predicted correctly (unweighted).
    pub fn accuracy(&self, d: &Dataset) -> Result<f64> {
        let mut correct = 0usize;
        for t in d.instances() {
            if self.predict(t)? == t.label() {
                correct += 1;
            }
        }
        Ok(correct as f64 / d.len().max(1) as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Model = serde_json::from_str(text)?;
        match &m {
            Model::Tree(t) => {
                ShapeletTree::from_nodes(t.nodes().to_vec())?;
            }
            Model::Ensemble(e) => {
                Ensemble::new(e.variant(), *e.config(), e.members().to_vec(), e.alphas().to_vec())?;
            }
        }
        Ok(m)
    }
}

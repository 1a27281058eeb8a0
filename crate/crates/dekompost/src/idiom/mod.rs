//! Idiomaticity classification: 900-dimensional features built from the
//! embeddings of a compound and its two components, a logistic regression
//! and a gradient-boosted tree classifier, plus the always-idiomatic dummy
//! baseline. The binary target folds categories 1, 2 and 3 (partially or
//! fully idiomatic) into the positive class.

mod gbdt;
mod logreg;

pub use gbdt::{load_gbdt, predict_gbdt, save_gbdt, train_gbdt, GbdtHyper, GbdtModel, Tree, TreeNode};
pub use logreg::{
    load_logreg, logreg_loss_and_gradient, predict_logreg, save_logreg, train_logreg, LogRegModel,
};

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::embeddings::{EmbedError, EmbeddingTable};

#[derive(Debug, Error)]
pub enum IdiomError {
    #[error("category {0} out of range 0..=3")]
    CategoryOutOfRange(u8),
    #[error("training needs both classes present")]
    SingleClass,
    #[error("too few examples: {0}")]
    TooFewExamples(usize),
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Container(#[from] crate::container::ContainerError),
    #[error("bad model file: {0}")]
    InvalidModel(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("feature file line {line}: {msg}")]
    FeatureFile { line: usize, msg: String },
}

/// 0 stays non-idiomatic; 1, 2 and 3 are (at least borderline) idiomatic.
pub fn binarize_category(category: u8) -> Result<u8, IdiomError> {
    match category {
        0 => Ok(0),
        1..=3 => Ok(1),
        other => Err(IdiomError::CategoryOutOfRange(other)),
    }
}

/// Where the component words of a feature vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Gold,
    Neural,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Gold => "gold",
            Provenance::Neural => "neural",
        }
    }
}

/// Concatenated compound ‖ modifier ‖ head embedding, 3·dim values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// Fixed feature order: compound embedding, then left/modifier, then
/// right/head. The component strings come either from the gold fields or
/// from a splitter's surface parts, per `provenance`.
pub fn build_features(
    surface: &str,
    left: &str,
    right: &str,
    table: &EmbeddingTable,
    provenance: Provenance,
) -> Result<FeatureVector, IdiomError> {
    let mut values = table.embed(surface)?;
    values.extend(table.embed(left)?);
    values.extend(table.embed(right)?);
    debug_assert_eq!(values.len(), 3 * table.dim);
    Ok(FeatureVector { values, provenance })
}

/// The baseline that calls everything idiomatic.
pub fn dummy_predict(n: usize) -> Vec<u8> {
    vec![1; n]
}

/// One line of a feature file: the surface form, the raw annotation
/// category, and the feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub surface: String,
    pub category: u8,
    pub values: Vec<f64>,
}

/// Feature file: `surface<TAB>category<TAB>v1 v2 ... v_k` per line.
pub fn write_feature_file(path: &Path, rows: &[FeatureRow]) -> Result<(), IdiomError> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.surface);
        out.push('\t');
        out.push_str(&r.category.to_string());
        out.push('\t');
        let mut first = true;
        for v in &r.values {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| IdiomError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_feature_file(path: &Path) -> Result<Vec<FeatureRow>, IdiomError> {
    let text = fs::read_to_string(path).map_err(|source| IdiomError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows: Vec<FeatureRow> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (surface, category, values) = match (cols.next(), cols.next(), cols.next()) {
            (Some(s), Some(c), Some(v)) => (s, c, v),
            _ => {
                return Err(IdiomError::FeatureFile {
                    line: line_no,
                    msg: "expected surface<TAB>category<TAB>values".to_string(),
                })
            }
        };
        let category: u8 = category.parse().map_err(|_| IdiomError::FeatureFile {
            line: line_no,
            msg: format!("bad category: {category}"),
        })?;
        binarize_category(category).map_err(|_| IdiomError::FeatureFile {
            line: line_no,
            msg: format!("category out of range: {category}"),
        })?;
        let values: Result<Vec<f64>, _> = values.split(' ').map(|v| v.parse::<f64>()).collect();
        let values = values.map_err(|_| IdiomError::FeatureFile {
            line: line_no,
            msg: "bad float value".to_string(),
        })?;
        if let Some(first) = rows.first() {
            if values.len() != first.values.len() {
                return Err(IdiomError::FeatureFile {
                    line: line_no,
                    msg: format!(
                        "inconsistent dimension: expected {}, found {}",
                        first.values.len(),
                        values.len()
                    ),
                });
            }
        }
        rows.push(FeatureRow {
            surface: surface.to_string(),
            category,
            values,
        });
    }
    Ok(rows)
}

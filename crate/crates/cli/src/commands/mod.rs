//! Command implementations and shared plumbing.

pub mod bpe;
pub mod corpus;
pub mod idiom;
pub mod report;
pub mod split;

use std::fmt;
use std::path::Path;

use dekompost::corpus::{parse_frequency_file, Lexicon};
use dekompost::neural::{load_params, LoadedModel};
use dekompost::splitters::TransformTable;
use dekompost::tokenize::{BpeModel, Tokenizer};

/// Usage errors exit with 1, data/runtime errors with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn data(err: impl fmt::Display) -> CliError {
        CliError::Data(err.to_string())
    }
}

/// Lexicon from a `word<TAB>count` frequency file.
pub fn load_lexicon(path: &Path) -> Result<Lexicon, CliError> {
    let mut lexicon = Lexicon::new();
    for (word, count) in parse_frequency_file(path).map_err(CliError::data)? {
        lexicon.add(&word, count);
    }
    Ok(lexicon)
}

pub fn load_transforms(path: Option<&Path>) -> Result<TransformTable, CliError> {
    match path {
        Some(p) => TransformTable::from_file(p).map_err(CliError::data),
        None => Ok(TransformTable::default()),
    }
}

/// A labeler model file plus the tokenizer reconstructed from its manifest
/// extras (`tokenizer=` kind and `merge=` rules).
pub struct LabelerBundle {
    pub model: LoadedModel,
    pub tokenizer: Tokenizer,
}

pub fn load_labeler(path: &Path) -> Result<LabelerBundle, CliError> {
    let model = load_params(path).map_err(CliError::data)?;
    let kind = model
        .extras
        .iter()
        .find(|(k, _)| k == "tokenizer")
        .map(|(_, v)| v.as_str())
        .unwrap_or("char");
    let tokenizer = match kind {
        "char" => Tokenizer::Char,
        "bpe" => {
            let merges: Vec<(String, String)> = model
                .extras
                .iter()
                .filter(|(k, _)| k == "merge")
                .filter_map(|(_, v)| {
                    v.split_once(' ')
                        .map(|(l, r)| (l.to_string(), r.to_string()))
                })
                .collect();
            Tokenizer::Bpe(BpeModel::from_merges(merges))
        }
        other => {
            return Err(CliError::Data(format!(
                "model declares unknown tokenizer kind {other:?}"
            )))
        }
    };
    Ok(LabelerBundle { model, tokenizer })
}

/// Extras to store in a labeler model so it is self-contained.
pub fn tokenizer_extras(tokenizer: &Tokenizer) -> Vec<(String, String)> {
    let mut extras = vec![("tokenizer".to_string(), tokenizer.kind().to_string())];
    if let Tokenizer::Bpe(model) = tokenizer {
        for (l, r) in &model.merges {
            extras.push(("merge".to_string(), format!("{l} {r}")));
        }
    }
    extras
}

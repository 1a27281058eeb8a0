//! Labeler model serialization on top of the shared container format.
//!
//! The manifest stores the config fields, the vocabulary as repeated `tok`
//! keys in index order, and any caller-supplied extras (the CLI stores the
//! tokenizer kind and BPE merges there so model files are self-contained).

use std::collections::HashSet;
use std::path::Path;

use crate::container::Container;

use super::{CellKind, LabelerConfig, LabelerParams, NeuralError, Vocab};

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "cell",
    "hidden_dim",
    "embed_dim",
    "embeddings_trainable",
    "epochs",
    "learning_rate",
    "batch_size",
    "grad_clip",
    "seed",
    "tok",
];

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub params: LabelerParams,
    pub config: LabelerConfig,
    pub extras: Vec<(String, String)>,
}

pub fn save_params(
    path: &Path,
    params: &LabelerParams,
    config: &LabelerConfig,
) -> Result<(), NeuralError> {
    save_params_with_extras(path, params, config, &[])
}

pub fn save_params_with_extras(
    path: &Path,
    params: &LabelerParams,
    config: &LabelerConfig,
    extras: &[(String, String)],
) -> Result<(), NeuralError> {
    let mut c = Container::new();
    c.push_entry("kind", "labeler");
    c.push_entry("cell", config.cell.as_str());
    c.push_entry("hidden_dim", config.hidden_dim);
    c.push_entry("embed_dim", config.embed_dim);
    c.push_entry("embeddings_trainable", config.embeddings_trainable);
    c.push_entry("epochs", config.epochs);
    c.push_entry("learning_rate", config.learning_rate);
    c.push_entry("batch_size", config.batch_size);
    match config.grad_clip {
        Some(v) => c.push_entry("grad_clip", v),
        None => c.push_entry("grad_clip", "none"),
    }
    c.push_entry("seed", config.seed);
    for (k, v) in extras {
        c.push_entry(k, v);
    }
    for tok in config.vocab.tokens() {
        c.push_entry("tok", tok);
    }
    for (name, m) in params.blocks() {
        c.push_block(&name, m.clone());
    }
    c.write(path)?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<LoadedModel, NeuralError> {
    let c = Container::read(path)?;
    if c.require("kind")? != "labeler" {
        return Err(NeuralError::InvalidConfig(format!(
            "expected a labeler model, found kind={}",
            c.require("kind")?
        )));
    }
    let cell = CellKind::parse(c.require("cell")?)?;
    let vocab = Vocab::from_ordered(c.get_all("tok").into_iter().map(String::from).collect());
    let grad_clip = match c.require("grad_clip")? {
        "none" => None,
        v => Some(v.parse::<f64>().map_err(|_| {
            NeuralError::InvalidConfig(format!("bad grad_clip value: {v}"))
        })?),
    };
    let config = LabelerConfig {
        cell,
        hidden_dim: c.parse("hidden_dim")?,
        embed_dim: c.parse("embed_dim")?,
        vocab,
        embeddings_trainable: c.parse("embeddings_trainable")?,
        epochs: c.parse("epochs")?,
        learning_rate: c.parse("learning_rate")?,
        batch_size: c.parse("batch_size")?,
        grad_clip,
        seed: c.parse("seed")?,
    };
    config.validate()?;

    let mut params = LabelerParams::zeros(&config);
    for (name, dst) in params.blocks_mut() {
        let src = c.block(&name)?;
        if !src.same_shape(dst) {
            return Err(NeuralError::ShapeMismatch);
        }
        dst.data_mut().copy_from_slice(src.data());
    }

    let known: HashSet<&str> = KNOWN_KEYS.iter().copied().collect();
    let extras = c
        .entries
        .iter()
        .filter(|(k, _)| !known.contains(k.as_str()))
        .cloned()
        .collect();
    Ok(LoadedModel {
        params,
        config,
        extras,
    })
}

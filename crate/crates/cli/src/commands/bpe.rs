use std::path::PathBuf;

use dekompost::corpus::parse_split_file;
use dekompost::tokenize::bpe_train;

use crate::config::{print_result, RunConfig};

use super::CliError;

pub fn train(
    config_path: Option<PathBuf>,
    data: Option<PathBuf>,
    vocab_size: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config_path.as_deref(), &["data", "vocab_size", "out", "seed"])?;
    let data = cfg
        .resolve_opt("data", data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("bpe train needs --data".into()))?;
    let vocab_size = cfg
        .resolve_opt("vocab_size", vocab_size)?
        .ok_or_else(|| CliError::Usage("bpe train needs --vocab-size".into()))?;
    let out = cfg
        .resolve_opt("out", out.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("bpe train needs --out".into()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("bpe.train");

    let entries = parse_split_file(data.as_ref()).map_err(CliError::data)?;
    let surfaces: Vec<String> = entries.into_iter().map(|e| e.surface).collect();
    let model = bpe_train(&surfaces, vocab_size).map_err(CliError::data)?;
    model
        .write_merge_file(out.as_ref())
        .map_err(CliError::data)?;
    print_result(&[
        ("merges", model.merges.len().to_string()),
        ("vocab", model.vocab.len().to_string()),
        ("out", out),
    ]);
    Ok(())
}

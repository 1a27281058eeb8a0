use std::path::PathBuf;

use dekompost::corpus::{
    build_lexicon, corpus_stats, parse_annotated_file, parse_split_file, partition,
    write_annotated_file, write_split_file,
};

use crate::config::{print_result, RunConfig};

use super::CliError;

pub fn stats(
    config_path: Option<PathBuf>,
    data: Option<PathBuf>,
    freq: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config_path.as_deref(), &["data", "freq", "seed"])?;
    let data = cfg
        .resolve_opt("data", data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("corpus stats needs --data".into()))?;
    let freq = cfg.resolve_opt("freq", freq.map(|p| p.display().to_string()))?;
    let seed = cfg.resolve_seed(None)?;
    let _ = seed;
    cfg.print("corpus.stats");

    let entries = parse_split_file(data.as_ref()).map_err(CliError::data)?;
    let st = corpus_stats(&entries);
    let lexicon =
        build_lexicon(&entries, freq.as_deref().map(std::path::Path::new)).map_err(CliError::data)?;
    print_result(&[
        ("entries", st.entries.to_string()),
        ("modifiers", st.distinct_modifiers.to_string()),
        ("heads", st.distinct_heads.to_string()),
        ("modifier_hapaxes", st.modifier_hapaxes.to_string()),
        ("head_hapaxes", st.head_hapaxes.to_string()),
        ("unalignable", st.unalignable.to_string()),
        ("lexicon_size", lexicon.len().to_string()),
    ]);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn partition_cmd(
    config_path: Option<PathBuf>,
    data: Option<PathBuf>,
    format: Option<String>,
    ratios: Option<String>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(
        config_path.as_deref(),
        &["data", "format", "ratios", "seed", "out_dir"],
    )?;
    let data = cfg
        .resolve_opt("data", data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("corpus partition needs --data".into()))?;
    let format = cfg.resolve("format", format, "split".to_string())?;
    let ratios_raw = cfg.resolve("ratios", ratios, "0.8,0.1,0.1".to_string())?;
    let seed = cfg.resolve_seed(seed)?;
    let out_dir = cfg
        .resolve_opt("out_dir", out_dir.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("corpus partition needs --out-dir".into()))?;
    cfg.print("corpus.partition");

    let parts: Vec<f64> = ratios_raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad --ratios value: {ratios_raw}")))?;
    if parts.len() != 3 {
        return Err(CliError::Usage(
            "--ratios needs three comma-separated fractions".into(),
        ));
    }
    let ratios = (parts[0], parts[1], parts[2]);

    let out_dir = PathBuf::from(out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;

    let sizes = match format.as_str() {
        "split" => {
            let entries = parse_split_file(data.as_ref()).map_err(CliError::data)?;
            let ds = partition(&entries, ratios, seed).map_err(CliError::data)?;
            write_split_file(&out_dir.join("train.tsv"), &ds.train).map_err(CliError::data)?;
            write_split_file(&out_dir.join("dev.tsv"), &ds.dev).map_err(CliError::data)?;
            write_split_file(&out_dir.join("test.tsv"), &ds.test).map_err(CliError::data)?;
            (ds.train.len(), ds.dev.len(), ds.test.len())
        }
        "annotated" => {
            let rows = parse_annotated_file(data.as_ref()).map_err(CliError::data)?;
            let ds = partition(&rows, ratios, seed).map_err(CliError::data)?;
            write_annotated_file(&out_dir.join("train.tsv"), &ds.train)
                .map_err(CliError::data)?;
            write_annotated_file(&out_dir.join("dev.tsv"), &ds.dev).map_err(CliError::data)?;
            write_annotated_file(&out_dir.join("test.tsv"), &ds.test).map_err(CliError::data)?;
            (ds.train.len(), ds.dev.len(), ds.test.len())
        }
        other => {
            return Err(CliError::Usage(format!(
                "--format must be split or annotated, got {other}"
            )))
        }
    };
    print_result(&[
        ("train", sizes.0.to_string()),
        ("dev", sizes.1.to_string()),
        ("test", sizes.2.to_string()),
        ("out_dir", out_dir.display().to_string()),
    ]);
    Ok(())
}

use std::io::BufRead;
use std::path::{Path, PathBuf};

use dekompost::corpus::{derive_boundary, parse_split_file, partition, CompoundEntry};
use dekompost::metrics::split_accuracy;
use dekompost::neural::{
    build_vocab, load_subword_embeddings, prepare_examples, save_params_with_extras, train_from,
    CellKind, LabelerConfig, LabelerParams, TrainOutcome,
};
use dekompost::splitters::{
    collect_ngram_stats, frequency_split, neural_split, ngram_split, NgramStats, SplitResult,
    TransformTable,
};
use dekompost::tokenize::{bpe_train, BpeModel, Tokenizer};

use crate::config::{print_result, RunConfig};

use super::{load_labeler, load_lexicon, load_transforms, tokenizer_extras, CliError};

pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub tokenizer: Option<String>,
    pub merges: Option<PathBuf>,
    pub vocab_size: Option<usize>,
    pub cell: Option<String>,
    pub hidden: Option<usize>,
    pub embed_dim: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub grad_clip: Option<f64>,
    pub embeddings: Option<PathBuf>,
    pub freeze_embeddings: bool,
    pub seed: Option<u64>,
    pub seeds: Option<String>,
    pub out: Option<PathBuf>,
}

const TRAIN_KEYS: &[&str] = &[
    "data",
    "dev",
    "tokenizer",
    "merges",
    "vocab_size",
    "cell",
    "hidden",
    "embed_dim",
    "epochs",
    "lr",
    "batch_size",
    "grad_clip",
    "embeddings",
    "freeze_embeddings",
    "seed",
    "seeds",
    "out",
];

/// Insert a suffix before the `.dkmp` extension (or append).
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("dkmp");
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), TRAIN_KEYS)?;
    let data = cfg
        .resolve_opt("data", args.data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("split train needs --data".into()))?;
    let dev = cfg.resolve_opt("dev", args.dev.map(|p| p.display().to_string()))?;
    let tokenizer_kind = cfg.resolve("tokenizer", args.tokenizer, "char".to_string())?;
    let merges = cfg.resolve_opt("merges", args.merges.map(|p| p.display().to_string()))?;
    let vocab_size = cfg.resolve_opt("vocab_size", args.vocab_size)?;
    let cell_name = cfg.resolve("cell", args.cell, "gru".to_string())?;
    let hidden = cfg.resolve("hidden", args.hidden, 256usize)?;
    let epochs = cfg.resolve("epochs", args.epochs, 30usize)?;
    let lr = cfg.resolve("lr", args.lr, 1e-3)?;
    let batch_size = cfg.resolve("batch_size", args.batch_size, 64usize)?;
    let grad_clip = cfg.resolve_opt("grad_clip", args.grad_clip)?;
    let embeddings = cfg.resolve_opt(
        "embeddings",
        args.embeddings.map(|p| p.display().to_string()),
    )?;
    let freeze = cfg.resolve(
        "freeze_embeddings",
        args.freeze_embeddings.then_some(true),
        false,
    )?;
    let seed = cfg.resolve_seed(args.seed)?;
    let seeds_raw = cfg.resolve_opt("seeds", args.seeds)?;
    let out = cfg
        .resolve_opt("out", args.out.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("split train needs --out".into()))?;
    // Character embeddings default to 64; pretrained sub-word vectors are
    // commonly 100-dimensional.
    let embed_default = if embeddings.is_some() { 100 } else { 64 };
    let embed_dim = cfg.resolve("embed_dim", args.embed_dim, embed_default)?;
    cfg.print("split.train");

    let cell = CellKind::parse(&cell_name).map_err(|e| CliError::Usage(e.to_string()))?;
    let entries = parse_split_file(data.as_ref()).map_err(CliError::data)?;
    let (train_entries, dev_entries): (Vec<CompoundEntry>, Vec<CompoundEntry>) = match dev {
        Some(path) => (
            entries,
            parse_split_file(path.as_ref()).map_err(CliError::data)?,
        ),
        None => {
            // No dev file: hold out a tenth of the data, deterministically.
            let ds = partition(&entries, (0.9, 0.1, 0.0), seed).map_err(CliError::data)?;
            eprintln!(
                "note: no --dev given, holding out {} of {} entries",
                ds.dev.len(),
                ds.dev.len() + ds.train.len()
            );
            (ds.train, ds.dev)
        }
    };

    let tokenizer = match tokenizer_kind.as_str() {
        "char" => Tokenizer::Char,
        "bpe" => {
            let model = match (&merges, vocab_size) {
                (Some(path), _) => BpeModel::read_merge_file(path.as_ref()).map_err(CliError::data)?,
                (None, Some(size)) => {
                    let surfaces: Vec<String> =
                        train_entries.iter().map(|e| e.surface.clone()).collect();
                    bpe_train(&surfaces, size).map_err(CliError::data)?
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "--tokenizer bpe needs --merges or --vocab-size".into(),
                    ))
                }
            };
            Tokenizer::Bpe(model)
        }
        other => {
            return Err(CliError::Usage(format!(
                "--tokenizer must be char or bpe, got {other}"
            )))
        }
    };

    let vocab = build_vocab(&train_entries, &tokenizer);
    let (train_set, train_stats) = prepare_examples(&train_entries, &tokenizer, &vocab);
    let (dev_set, _) = prepare_examples(&dev_entries, &tokenizer, &vocab);

    let seeds: Vec<u64> = match seeds_raw {
        Some(raw) => raw
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("bad --seeds list: {raw}")))?,
        None => vec![seed],
    };
    let multi = seeds.len() > 1;

    let mut dev_accuracies = Vec::new();
    for s in &seeds {
        let mut config = LabelerConfig::new(cell, vocab.clone());
        config.hidden_dim = hidden;
        config.embed_dim = embed_dim;
        config.embeddings_trainable = !freeze;
        config.epochs = epochs;
        config.learning_rate = lr;
        config.batch_size = batch_size;
        config.grad_clip = grad_clip;
        config.seed = *s;

        let mut initial = LabelerParams::init(&config);
        if let Some(path) = &embeddings {
            let (matrix, report) =
                load_subword_embeddings(path.as_ref(), &config.vocab, embed_dim, *s)
                    .map_err(CliError::data)?;
            eprintln!(
                "note: pretrained vectors cover {} of {} tokens ({} randomly initialized)",
                report.found,
                config.vocab.len(),
                report.missing
            );
            initial.embedding = matrix;
        }

        let outcome: TrainOutcome =
            train_from(&config, &train_set, &dev_set, initial).map_err(CliError::data)?;
        for m in &outcome.log {
            println!(
                "epoch={} train_loss={:.6} dev_accuracy={:.4}",
                m.epoch, m.train_loss, m.dev_accuracy
            );
        }

        let out_path = if multi {
            suffixed(out.as_ref(), &format!("seed{s}"))
        } else {
            PathBuf::from(&out)
        };
        let extras = tokenizer_extras(&tokenizer);
        save_params_with_extras(&out_path, &outcome.params, &config, &extras)
            .map_err(CliError::data)?;
        save_params_with_extras(
            &suffixed(&out_path, "best"),
            &outcome.best_params,
            &config,
            &extras,
        )
        .map_err(CliError::data)?;

        let final_acc = outcome.log.last().map(|m| m.dev_accuracy).unwrap_or(0.0);
        dev_accuracies.push(final_acc);
        print_result(&[
            ("seed", s.to_string()),
            ("dev_accuracy", format!("{final_acc:.4}")),
            ("best_epoch", outcome.best_epoch.to_string()),
            ("kept", train_stats.kept.to_string()),
            ("unalignable", train_stats.unalignable.to_string()),
            ("single_token", train_stats.single_token.to_string()),
            ("lossy", train_stats.lossy.to_string()),
            ("model", out_path.display().to_string()),
        ]);
    }
    if multi {
        let (mean, std) = mean_std(&dev_accuracies);
        print_result(&[
            ("runs", seeds.len().to_string()),
            ("dev_accuracy_mean", format!("{mean:.4}")),
            ("dev_accuracy_std", format!("{std:.4}")),
        ]);
    }
    Ok(())
}

pub enum MethodResources {
    Frequency {
        lexicon: dekompost::corpus::Lexicon,
        transforms: TransformTable,
    },
    Ngram {
        stats: NgramStats,
    },
    Neural {
        bundle: Box<super::LabelerBundle>,
    },
}

impl MethodResources {
    pub fn split_word(&self, word: &str) -> Result<SplitResult, CliError> {
        Ok(match self {
            MethodResources::Frequency { lexicon, transforms } => {
                frequency_split(word, lexicon, transforms)
            }
            MethodResources::Ngram { stats } => ngram_split(word, stats),
            MethodResources::Neural { bundle } => neural_split(
                &bundle.model.params,
                &bundle.model.config,
                word,
                &bundle.tokenizer,
            )
            .map_err(CliError::data)?,
        })
    }
}

pub fn load_method_resources(
    method: &str,
    lexicon: Option<&Path>,
    model: Option<&Path>,
    transforms: Option<&Path>,
) -> Result<MethodResources, CliError> {
    match method {
        "frequency" => {
            let lexicon_path = lexicon.ok_or_else(|| {
                CliError::Usage("--method frequency needs --lexicon".into())
            })?;
            Ok(MethodResources::Frequency {
                lexicon: load_lexicon(lexicon_path)?,
                transforms: load_transforms(transforms)?,
            })
        }
        "ngram" => {
            let lexicon_path = lexicon
                .ok_or_else(|| CliError::Usage("--method ngram needs --lexicon".into()))?;
            let lex = load_lexicon(lexicon_path)?;
            Ok(MethodResources::Ngram {
                stats: collect_ngram_stats(&lex),
            })
        }
        "neural" => {
            let model_path = model
                .ok_or_else(|| CliError::Usage("--method neural needs --model".into()))?;
            Ok(MethodResources::Neural {
                bundle: Box::new(load_labeler(model_path)?),
            })
        }
        other => Err(CliError::Usage(format!(
            "--method must be frequency, ngram or neural, got {other}"
        ))),
    }
}

pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub method: Option<String>,
    pub lexicon: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub transforms: Option<PathBuf>,
    pub words: Vec<String>,
    pub input: Option<PathBuf>,
}

const RUN_KEYS: &[&str] = &["method", "lexicon", "model", "transforms", "input", "seed"];

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), RUN_KEYS)?;
    let method = cfg.resolve("method", args.method, "frequency".to_string())?;
    let lexicon = cfg.resolve_opt("lexicon", args.lexicon.map(|p| p.display().to_string()))?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let transforms =
        cfg.resolve_opt("transforms", args.transforms.map(|p| p.display().to_string()))?;
    let input = cfg.resolve_opt("input", args.input.map(|p| p.display().to_string()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("split.run");

    let resources = load_method_resources(
        &method,
        lexicon.as_deref().map(Path::new),
        model.as_deref().map(Path::new),
        transforms.as_deref().map(Path::new),
    )?;

    let mut words = args.words;
    if let Some(path) = input {
        let file = std::fs::File::open(Path::new(&path))
            .map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(CliError::data)?;
            let word = line.trim();
            if !word.is_empty() {
                words.push(word.to_string());
            }
        }
    }
    if words.is_empty() {
        return Err(CliError::Usage(
            "split run needs --word or --input with at least one word".into(),
        ));
    }
    for word in &words {
        let r = resources.split_word(word)?;
        println!(
            "{word}\t{}|{}\t{:.6}\t{}",
            r.left,
            r.right,
            r.score,
            r.method.as_str()
        );
    }
    Ok(())
}

pub struct EvalArgs {
    pub config: Option<PathBuf>,
    pub method: Option<String>,
    pub data: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub transforms: Option<PathBuf>,
}

const EVAL_KEYS: &[&str] = &["method", "data", "lexicon", "model", "transforms", "seed"];

/// Aligned gold entries, predictions, and the count of unalignable
/// entries that were dropped.
pub type GoldPredictions = (
    Vec<(CompoundEntry, dekompost::corpus::BoundaryLabel)>,
    Vec<SplitResult>,
    usize,
);

/// Shared by `split eval` and `report errors`: gold boundaries (dropping
/// unalignable entries) plus predictions.
pub fn predictions_against_gold(
    method: &str,
    data: &Path,
    resources: &MethodResources,
) -> Result<GoldPredictions, CliError> {
    let entries = parse_split_file(data).map_err(CliError::data)?;
    let mut aligned = Vec::new();
    let mut preds = Vec::new();
    let mut dropped = 0usize;
    for e in &entries {
        match derive_boundary(e) {
            Ok(b) => {
                preds.push(resources.split_word(&e.surface)?);
                aligned.push((e.clone(), b));
            }
            Err(_) => dropped += 1,
        }
    }
    let _ = method;
    Ok((aligned, preds, dropped))
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), EVAL_KEYS)?;
    let method = cfg.resolve("method", args.method, "frequency".to_string())?;
    let data = cfg
        .resolve_opt("data", args.data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("split eval needs --data".into()))?;
    let lexicon = cfg.resolve_opt("lexicon", args.lexicon.map(|p| p.display().to_string()))?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let transforms =
        cfg.resolve_opt("transforms", args.transforms.map(|p| p.display().to_string()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("split.eval");

    let resources = load_method_resources(
        &method,
        lexicon.as_deref().map(Path::new),
        model.as_deref().map(Path::new),
        transforms.as_deref().map(Path::new),
    )?;
    let (aligned, preds, dropped) =
        predictions_against_gold(&method, data.as_ref(), &resources)?;
    let gold: Vec<_> = aligned.iter().map(|(_, b)| *b).collect();
    let metrics = split_accuracy(&preds, &gold, dropped).map_err(CliError::data)?;
    print_result(&[
        ("accuracy", format!("{:.4}", metrics.accuracy)),
        ("n", metrics.n.to_string()),
        ("correct", metrics.correct.to_string()),
        ("dropped", metrics.unalignable_dropped.to_string()),
        ("method", method),
    ]);
    Ok(())
}

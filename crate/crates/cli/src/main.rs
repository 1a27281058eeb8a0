//! `dekompost` — German compound splitting and idiomatic-compound
//! detection from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::CliError;

const FILE_FORMATS: &str = "\
File formats (all UTF-8, tab-separated, '#' starts a comment line):
  split file      surface<TAB>modifier<TAB>head[<TAB>frequency]
                  modifier alternatives separated by '|'
  annotated file  frequency<TAB>surface<TAB>modifier<TAB>head<TAB>category
                  category 0 = compositional .. 3 = fully idiomatic
  frequency file  word<TAB>count
  vector file     first line `count dim`, then `word v1 ... v_dim`
  merge file      one `left right` pair per line, in application order
  transform file  lines `strip:<suffix>`, `add:<suffix>` or `deumlaut`
  config file     `key = value` lines; command-line flags win

The environment variable DEKOMPOST_SEED overrides the default seed (13)
when neither --seed nor a config entry sets one.

Exit codes: 0 success, 1 usage error, 2 data error.";

#[derive(Parser)]
#[command(
    name = "dekompost",
    version,
    about = "Split German compounds and detect idiomatic ones",
    after_help = FILE_FORMATS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` defaults for this command.
    #[arg(long, global = false)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and partition compound datasets.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Train byte-pair-encoding merges.
    #[command(subcommand)]
    Bpe(BpeCmd),
    /// Train, run and evaluate compound splitters.
    #[command(subcommand)]
    Split(SplitCmd),
    /// Featurize, train and evaluate idiomaticity classifiers.
    #[command(subcommand)]
    Idiom(IdiomCmd),
    /// Error-analysis reports.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Counts over a split file: entries, distinct parts, hapaxes,
    /// unalignable entries.
    #[command(after_help = FILE_FORMATS)]
    Stats {
        #[command(flatten)]
        common: Common,
        /// Split file to inspect.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Extra word<TAB>count frequency file merged into the lexicon.
        #[arg(long)]
        freq: Option<PathBuf>,
    },
    /// Deterministic train/dev/test partition written to a directory.
    #[command(after_help = FILE_FORMATS)]
    Partition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Input layout: split or annotated.
        #[arg(long)]
        format: Option<String>,
        /// Three comma-separated fractions, e.g. 0.8,0.1,0.1.
        #[arg(long)]
        ratios: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BpeCmd {
    /// Learn merges from the surface forms of a split file.
    #[command(after_help = FILE_FORMATS)]
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Target vocabulary size (characters plus merge results).
        #[arg(long)]
        vocab_size: Option<usize>,
        /// Output merge file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SplitCmd {
    /// Train the recurrent sequence labeler on gold boundaries.
    #[command(after_help = FILE_FORMATS)]
    Train {
        #[command(flatten)]
        common: Common,
        /// Training split file.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Dev split file; a tenth of --data is held out when absent.
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Sub-word units: char or bpe.
        #[arg(long)]
        tokenizer: Option<String>,
        /// Merge file for --tokenizer bpe.
        #[arg(long)]
        merges: Option<PathBuf>,
        /// Train merges on the fly with this vocab size (bpe only).
        #[arg(long)]
        vocab_size: Option<usize>,
        /// Cell kind: vanilla, gru or lstm.
        #[arg(long)]
        cell: Option<String>,
        /// Hidden units per direction.
        #[arg(long)]
        hidden: Option<usize>,
        /// Embedding dimension (default 64, or 100 with --embeddings).
        #[arg(long)]
        embed_dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Adam learning rate.
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Optional global-norm gradient clip.
        #[arg(long)]
        grad_clip: Option<f64>,
        /// Pretrained sub-word vectors (text format) for the embedding
        /// layer.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Keep the embedding layer fixed during training.
        #[arg(long)]
        freeze_embeddings: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated seed list; trains one model per seed and
        /// reports mean±std dev accuracy.
        #[arg(long)]
        seeds: Option<String>,
        /// Output model file; a `.best` sibling stores the best-dev epoch.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split words from the command line or a file.
    #[command(after_help = FILE_FORMATS)]
    Run {
        #[command(flatten)]
        common: Common,
        /// frequency, ngram or neural.
        #[arg(long)]
        method: Option<String>,
        /// Frequency file backing the frequency/ngram methods.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Labeler model for the neural method.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Transform config file (frequency method).
        #[arg(long)]
        transforms: Option<PathBuf>,
        /// Words to split.
        #[arg(long = "word")]
        words: Vec<String>,
        /// File with one word per line.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Exact-boundary accuracy against gold boundaries.
    #[command(after_help = FILE_FORMATS)]
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<String>,
        /// Split file with gold modifier/head columns.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        transforms: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IdiomCmd {
    /// Build compound‖modifier‖head feature vectors from embeddings.
    #[command(after_help = FILE_FORMATS)]
    Featurize {
        #[command(flatten)]
        common: Common,
        /// Annotated file.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Word vector file (`count dim` text format).
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Optional character n-gram vector file for the ngram OOV policy.
        #[arg(long)]
        ngram_vectors: Option<PathBuf>,
        /// OOV policy: unk, zero or ngram.
        #[arg(long)]
        oov_policy: Option<String>,
        /// Component source: gold fields or the neural splitter.
        #[arg(long)]
        split: Option<String>,
        /// Labeler model for --split neural.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output feature file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a classifier on a feature file.
    #[command(after_help = FILE_FORMATS)]
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: Option<PathBuf>,
        /// logreg or gbdt.
        #[arg(long)]
        classifier: Option<String>,
        /// Inverse regularization strength (logreg).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n_estimators: Option<usize>,
        /// Minimum weighted examples per leaf (gbdt).
        #[arg(long)]
        min_leaf: Option<f64>,
        #[arg(long)]
        shrinkage: Option<f64>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Class weight for label 0 (gbdt).
        #[arg(long)]
        w0: Option<f64>,
        /// Class weight for label 1 (gbdt).
        #[arg(long)]
        w1: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision/recall/F1 of a classifier (or the dummy baseline).
    #[command(after_help = FILE_FORMATS)]
    Eval {
        #[command(flatten)]
        common: Common,
        /// dummy, logreg or gbdt.
        #[arg(long)]
        classifier: Option<String>,
        /// Classifier model file (logreg/gbdt).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Prebuilt feature file.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Annotated file; enough on its own for the dummy baseline,
        /// combined with --vectors for trained classifiers.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        ngram_vectors: Option<PathBuf>,
        #[arg(long)]
        oov_policy: Option<String>,
        /// gold or neural component source when featurizing on the fly.
        #[arg(long)]
        split: Option<String>,
        /// Labeler model for --split neural.
        #[arg(long)]
        labeler: Option<PathBuf>,
    },
    /// Per-compound labels and probabilities from a trained model.
    #[command(after_help = FILE_FORMATS)]
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        classifier: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Error listing plus aggregations: linking-element confusions for
    /// splitting, most frequent components for idiomaticity.
    #[command(after_help = FILE_FORMATS)]
    Errors {
        #[command(flatten)]
        common: Common,
        /// split or idiom.
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        method: Option<String>,
        /// Split file (task split) or annotated file (task idiom).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Splitter model (task split) or classifier model (task idiom).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        transforms: Option<PathBuf>,
        #[arg(long)]
        classifier: Option<String>,
        #[arg(long)]
        features: Option<PathBuf>,
        /// How many top components to list (task idiom).
        #[arg(long)]
        top_k: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Corpus(CorpusCmd::Stats { common, data, freq }) => {
            commands::corpus::stats(common.config, data, freq)
        }
        Command::Corpus(CorpusCmd::Partition {
            common,
            data,
            format,
            ratios,
            seed,
            out_dir,
        }) => commands::corpus::partition_cmd(common.config, data, format, ratios, seed, out_dir),
        Command::Bpe(BpeCmd::Train {
            common,
            data,
            vocab_size,
            out,
        }) => commands::bpe::train(common.config, data, vocab_size, out),
        Command::Split(SplitCmd::Train {
            common,
            data,
            dev,
            tokenizer,
            merges,
            vocab_size,
            cell,
            hidden,
            embed_dim,
            epochs,
            lr,
            batch_size,
            grad_clip,
            embeddings,
            freeze_embeddings,
            seed,
            seeds,
            out,
        }) => commands::split::train(commands::split::TrainArgs {
            config: common.config,
            data,
            dev,
            tokenizer,
            merges,
            vocab_size,
            cell,
            hidden,
            embed_dim,
            epochs,
            lr,
            batch_size,
            grad_clip,
            embeddings,
            freeze_embeddings,
            seed,
            seeds,
            out,
        }),
        Command::Split(SplitCmd::Run {
            common,
            method,
            lexicon,
            model,
            transforms,
            words,
            input,
        }) => commands::split::run(commands::split::RunArgs {
            config: common.config,
            method,
            lexicon,
            model,
            transforms,
            words,
            input,
        }),
        Command::Split(SplitCmd::Eval {
            common,
            method,
            data,
            lexicon,
            model,
            transforms,
        }) => commands::split::eval(commands::split::EvalArgs {
            config: common.config,
            method,
            data,
            lexicon,
            model,
            transforms,
        }),
        Command::Idiom(IdiomCmd::Featurize {
            common,
            data,
            vectors,
            ngram_vectors,
            oov_policy,
            split,
            model,
            out,
        }) => commands::idiom::featurize(commands::idiom::FeaturizeArgs {
            config: common.config,
            data,
            vectors,
            ngram_vectors,
            oov_policy,
            split,
            model,
            out,
        }),
        Command::Idiom(IdiomCmd::Train {
            common,
            features,
            classifier,
            c,
            n_estimators,
            min_leaf,
            shrinkage,
            max_depth,
            w0,
            w1,
            out,
        }) => commands::idiom::train(commands::idiom::TrainArgs {
            config: common.config,
            features,
            classifier,
            c,
            n_estimators,
            min_leaf,
            shrinkage,
            max_depth,
            w0,
            w1,
            out,
        }),
        Command::Idiom(IdiomCmd::Eval {
            common,
            classifier,
            model,
            features,
            data,
            vectors,
            ngram_vectors,
            oov_policy,
            split,
            labeler,
        }) => commands::idiom::eval(commands::idiom::EvalArgs {
            config: common.config,
            classifier,
            model,
            features,
            data,
            vectors,
            ngram_vectors,
            oov_policy,
            split,
            labeler,
        }),
        Command::Idiom(IdiomCmd::Predict {
            common,
            classifier,
            model,
            features,
        }) => commands::idiom::predict(commands::idiom::PredictArgs {
            config: common.config,
            classifier,
            model,
            features,
        }),
        Command::Report(ReportCmd::Errors {
            common,
            task,
            method,
            data,
            lexicon,
            model,
            transforms,
            classifier,
            features,
            top_k,
            out,
        }) => commands::report::errors(commands::report::ErrorsArgs {
            config: common.config,
            task,
            method,
            data,
            lexicon,
            model,
            transforms,
            classifier,
            features,
            top_k,
            out,
        }),
    }
}

fn main() -> ExitCode {
    // Die quietly on closed pipes like other line-oriented tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

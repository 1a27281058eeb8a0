use std::path::{Path, PathBuf};

use dekompost::corpus::{parse_annotated_file, AnnotatedCompound};
use dekompost::embeddings::{load_text_vectors, EmbeddingTable, OovPolicy};
use dekompost::idiom::{
    binarize_category, build_features, dummy_predict, load_gbdt, load_logreg, predict_gbdt,
    predict_logreg, read_feature_file, save_gbdt, save_logreg, train_gbdt, train_logreg,
    write_feature_file, FeatureRow, GbdtHyper, Provenance,
};
use dekompost::metrics::binary_prf1;

use crate::config::{print_result, RunConfig};

use super::{load_labeler, CliError};

pub struct FeaturizeArgs {
    pub config: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub ngram_vectors: Option<PathBuf>,
    pub oov_policy: Option<String>,
    pub split: Option<String>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

const FEATURIZE_KEYS: &[&str] = &[
    "data",
    "vectors",
    "ngram_vectors",
    "oov_policy",
    "split",
    "model",
    "out",
    "seed",
];

fn load_table(
    vectors: &Path,
    ngram_vectors: Option<&Path>,
    policy: &str,
) -> Result<EmbeddingTable, CliError> {
    let policy = OovPolicy::parse(policy)
        .ok_or_else(|| CliError::Usage(format!("unknown --oov-policy: {policy}")))?;
    let mut table = load_text_vectors(vectors)
        .map_err(CliError::data)?
        .with_policy(policy);
    if let Some(path) = ngram_vectors {
        table = table.load_ngrams(path).map_err(CliError::data)?;
    }
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    Ok(table)
}

/// Feature rows for annotated compounds, components taken from the gold
/// fields or from the neural splitter's surface parts.
pub fn featurize_rows(
    rows: &[AnnotatedCompound],
    table: &EmbeddingTable,
    split: &str,
    model: Option<&Path>,
) -> Result<Vec<FeatureRow>, CliError> {
    let labeler = match split {
        "gold" => None,
        "neural" => {
            let path = model.ok_or_else(|| {
                CliError::Usage("--split neural needs --model (a labeler model)".into())
            })?;
            Some(load_labeler(path)?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "--split must be gold or neural, got {other}"
            )))
        }
    };
    let mut out = Vec::with_capacity(rows.len());
    for a in rows {
        let (left, right, provenance) = match &labeler {
            None => (
                a.entry.modifier.clone(),
                a.entry.head.clone(),
                Provenance::Gold,
            ),
            Some(bundle) => {
                let r = dekompost::splitters::neural_split(
                    &bundle.model.params,
                    &bundle.model.config,
                    &a.entry.surface,
                    &bundle.tokenizer,
                )
                .map_err(CliError::data)?;
                (r.left, r.right, Provenance::Neural)
            }
        };
        let f = build_features(&a.entry.surface, &left, &right, table, provenance)
            .map_err(CliError::data)?;
        out.push(FeatureRow {
            surface: a.entry.surface.clone(),
            category: a.category,
            values: f.values,
        });
    }
    Ok(out)
}

pub fn featurize(args: FeaturizeArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), FEATURIZE_KEYS)?;
    let data = cfg
        .resolve_opt("data", args.data.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom featurize needs --data".into()))?;
    let vectors = cfg
        .resolve_opt("vectors", args.vectors.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom featurize needs --vectors".into()))?;
    let ngram_vectors = cfg.resolve_opt(
        "ngram_vectors",
        args.ngram_vectors.map(|p| p.display().to_string()),
    )?;
    let policy = cfg.resolve("oov_policy", args.oov_policy, "zero".to_string())?;
    let split = cfg.resolve("split", args.split, "gold".to_string())?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let out = cfg
        .resolve_opt("out", args.out.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom featurize needs --out".into()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("idiom.featurize");

    let rows = parse_annotated_file(data.as_ref()).map_err(CliError::data)?;
    let table = load_table(
        vectors.as_ref(),
        ngram_vectors.as_deref().map(Path::new),
        &policy,
    )?;
    let feature_rows = featurize_rows(&rows, &table, &split, model.as_deref().map(Path::new))?;
    write_feature_file(out.as_ref(), &feature_rows).map_err(CliError::data)?;
    print_result(&[
        ("rows", feature_rows.len().to_string()),
        ("dim", (3 * table.dim).to_string()),
        ("split", split),
        ("out", out),
    ]);
    Ok(())
}

fn labels_of(rows: &[FeatureRow]) -> Result<Vec<u8>, CliError> {
    rows.iter()
        .map(|r| binarize_category(r.category).map_err(CliError::data))
        .collect()
}

pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub classifier: Option<String>,
    pub c: Option<f64>,
    pub n_estimators: Option<usize>,
    pub min_leaf: Option<f64>,
    pub shrinkage: Option<f64>,
    pub max_depth: Option<usize>,
    pub w0: Option<f64>,
    pub w1: Option<f64>,
    pub out: Option<PathBuf>,
}

const TRAIN_KEYS: &[&str] = &[
    "features",
    "classifier",
    "c",
    "n_estimators",
    "min_leaf",
    "shrinkage",
    "max_depth",
    "w0",
    "w1",
    "out",
    "seed",
];

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), TRAIN_KEYS)?;
    let features = cfg
        .resolve_opt("features", args.features.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom train needs --features".into()))?;
    let classifier = cfg.resolve("classifier", args.classifier, "gbdt".to_string())?;
    let c = cfg.resolve("c", args.c, 1.0)?;
    let n_estimators = cfg.resolve("n_estimators", args.n_estimators, 200usize)?;
    let min_leaf = cfg.resolve("min_leaf", args.min_leaf, 25.0)?;
    let shrinkage = cfg.resolve("shrinkage", args.shrinkage, 0.1)?;
    let max_depth = cfg.resolve("max_depth", args.max_depth, 3usize)?;
    let w0 = cfg.resolve("w0", args.w0, 1.0)?;
    let w1 = cfg.resolve("w1", args.w1, 10.0)?;
    let out = cfg
        .resolve_opt("out", args.out.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom train needs --out".into()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("idiom.train");

    let rows = read_feature_file(features.as_ref()).map_err(CliError::data)?;
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    let y = labels_of(&rows)?;

    let train_preds: Vec<u8> = match classifier.as_str() {
        "logreg" => {
            let model = train_logreg(&x, &y, c).map_err(CliError::data)?;
            save_logreg(out.as_ref(), &model).map_err(CliError::data)?;
            x.iter()
                .map(|xi| predict_logreg(&model, xi).map(|(l, _)| l))
                .collect::<Result<_, _>>()
                .map_err(CliError::data)?
        }
        "gbdt" => {
            let hyper = GbdtHyper {
                n_estimators,
                min_leaf,
                shrinkage,
                max_depth,
                class_weights: [w0, w1],
            };
            let (model, losses) = train_gbdt(&x, &y, &hyper).map_err(CliError::data)?;
            save_gbdt(out.as_ref(), &model).map_err(CliError::data)?;
            println!(
                "train_loss first={:.6} last={:.6} rounds={}",
                losses.first().unwrap_or(&f64::NAN),
                losses.last().unwrap_or(&f64::NAN),
                losses.len()
            );
            x.iter()
                .map(|xi| predict_gbdt(&model, xi).map(|(l, _)| l))
                .collect::<Result<_, _>>()
                .map_err(CliError::data)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "--classifier must be logreg or gbdt, got {other}"
            )))
        }
    };
    let m = binary_prf1(&train_preds, &y, 1).map_err(CliError::data)?;
    print_result(&[
        ("classifier", classifier),
        ("n", rows.len().to_string()),
        ("train_f1", format!("{:.4}", m.f1)),
        ("model", out),
    ]);
    Ok(())
}

pub struct EvalArgs {
    pub config: Option<PathBuf>,
    pub classifier: Option<String>,
    pub model: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub ngram_vectors: Option<PathBuf>,
    pub oov_policy: Option<String>,
    pub split: Option<String>,
    pub labeler: Option<PathBuf>,
}

const EVAL_KEYS: &[&str] = &[
    "classifier",
    "model",
    "features",
    "data",
    "vectors",
    "ngram_vectors",
    "oov_policy",
    "split",
    "labeler",
    "seed",
];

/// Feature rows from either a prebuilt feature file or an annotated file
/// plus vectors. The dummy baseline only needs labels, so an annotated
/// file alone suffices for it.
#[allow(clippy::too_many_arguments)]
fn eval_rows(
    classifier: &str,
    features: Option<&Path>,
    data: Option<&Path>,
    vectors: Option<&Path>,
    ngram_vectors: Option<&Path>,
    policy: &str,
    split: &str,
    labeler: Option<&Path>,
) -> Result<Vec<FeatureRow>, CliError> {
    if let Some(path) = features {
        return read_feature_file(path).map_err(CliError::data);
    }
    let Some(data) = data else {
        return Err(CliError::Usage(
            "idiom eval needs --features or --data".into(),
        ));
    };
    let rows = parse_annotated_file(data).map_err(CliError::data)?;
    match vectors {
        Some(vectors) => {
            let table = load_table(vectors, ngram_vectors, policy)?;
            featurize_rows(&rows, &table, split, labeler)
        }
        None if classifier == "dummy" => Ok(rows
            .iter()
            .map(|a| FeatureRow {
                surface: a.entry.surface.clone(),
                category: a.category,
                values: Vec::new(),
            })
            .collect()),
        None => Err(CliError::Usage(
            "idiom eval with a trained classifier needs --features, or --data with --vectors"
                .into(),
        )),
    }
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), EVAL_KEYS)?;
    let classifier = cfg.resolve("classifier", args.classifier, "dummy".to_string())?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let features = cfg.resolve_opt("features", args.features.map(|p| p.display().to_string()))?;
    let data = cfg.resolve_opt("data", args.data.map(|p| p.display().to_string()))?;
    let vectors = cfg.resolve_opt("vectors", args.vectors.map(|p| p.display().to_string()))?;
    let ngram_vectors = cfg.resolve_opt(
        "ngram_vectors",
        args.ngram_vectors.map(|p| p.display().to_string()),
    )?;
    let policy = cfg.resolve("oov_policy", args.oov_policy, "zero".to_string())?;
    let split = cfg.resolve("split", args.split, "gold".to_string())?;
    let labeler = cfg.resolve_opt("labeler", args.labeler.map(|p| p.display().to_string()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("idiom.eval");

    let rows = eval_rows(
        &classifier,
        features.as_deref().map(Path::new),
        data.as_deref().map(Path::new),
        vectors.as_deref().map(Path::new),
        ngram_vectors.as_deref().map(Path::new),
        &policy,
        &split,
        labeler.as_deref().map(Path::new),
    )?;
    let y = labels_of(&rows)?;
    let preds = predictions(&classifier, model.as_deref().map(Path::new), &rows)?;
    let m = binary_prf1(&preds, &y, 1).map_err(CliError::data)?;
    print_result(&[
        ("classifier", classifier),
        ("n", y.len().to_string()),
        ("precision", format!("{:.4}", m.precision)),
        ("recall", format!("{:.4}", m.recall)),
        ("f1", format!("{:.4}", m.f1)),
    ]);
    Ok(())
}

pub fn predictions(
    classifier: &str,
    model: Option<&Path>,
    rows: &[FeatureRow],
) -> Result<Vec<u8>, CliError> {
    if classifier == "dummy" {
        return Ok(dummy_predict(rows.len()));
    }
    let loaded = LoadedClassifier::open(classifier, model)?;
    rows.iter()
        .map(|r| loaded.predict(&r.values).map(|(l, _)| l))
        .collect()
}

pub struct PredictArgs {
    pub config: Option<PathBuf>,
    pub classifier: Option<String>,
    pub model: Option<PathBuf>,
    pub features: Option<PathBuf>,
}

pub fn predict(args: PredictArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(
        args.config.as_deref(),
        &["classifier", "model", "features", "seed"],
    )?;
    let classifier = cfg.resolve("classifier", args.classifier, "gbdt".to_string())?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let features = cfg
        .resolve_opt("features", args.features.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("idiom predict needs --features".into()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("idiom.predict");

    let rows = read_feature_file(features.as_ref()).map_err(CliError::data)?;
    let loaded = LoadedClassifier::open(&classifier, model.as_deref().map(Path::new))?;
    for r in &rows {
        let (label, prob) = loaded.predict(&r.values)?;
        println!("{}\t{}\t{:.6}", r.surface, label, prob);
    }
    Ok(())
}

/// A classifier resolved from its model file once, reusable per row.
enum LoadedClassifier {
    Dummy,
    LogReg(dekompost::idiom::LogRegModel),
    Gbdt(dekompost::idiom::GbdtModel),
}

impl LoadedClassifier {
    fn open(classifier: &str, model: Option<&Path>) -> Result<LoadedClassifier, CliError> {
        match classifier {
            "dummy" => Ok(LoadedClassifier::Dummy),
            "logreg" => {
                let path = model
                    .ok_or_else(|| CliError::Usage("--classifier logreg needs --model".into()))?;
                Ok(LoadedClassifier::LogReg(
                    load_logreg(path).map_err(CliError::data)?,
                ))
            }
            "gbdt" => {
                let path = model
                    .ok_or_else(|| CliError::Usage("--classifier gbdt needs --model".into()))?;
                Ok(LoadedClassifier::Gbdt(
                    load_gbdt(path).map_err(CliError::data)?,
                ))
            }
            other => Err(CliError::Usage(format!(
                "--classifier must be dummy, logreg or gbdt, got {other}"
            ))),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<(u8, f64), CliError> {
        match self {
            LoadedClassifier::Dummy => Ok((1, 1.0)),
            LoadedClassifier::LogReg(m) => predict_logreg(m, x).map_err(CliError::data),
            LoadedClassifier::Gbdt(m) => predict_gbdt(m, x).map_err(CliError::data),
        }
    }
}

use std::path::{Path, PathBuf};

use dekompost::corpus::parse_annotated_file;
use dekompost::idiom::binarize_category;
use dekompost::metrics::{error_report, idiom_error_components};

use crate::config::{print_result, RunConfig};

use super::{idiom, split, CliError};

pub struct ErrorsArgs {
    pub config: Option<PathBuf>,
    pub task: Option<String>,
    pub method: Option<String>,
    pub data: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub transforms: Option<PathBuf>,
    pub classifier: Option<String>,
    pub features: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "task",
    "method",
    "data",
    "lexicon",
    "model",
    "transforms",
    "classifier",
    "features",
    "top_k",
    "out",
    "seed",
];

pub fn errors(args: ErrorsArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), KEYS)?;
    let task = cfg.resolve("task", args.task, "split".to_string())?;
    let method = cfg.resolve("method", args.method, "frequency".to_string())?;
    let data = cfg.resolve_opt("data", args.data.map(|p| p.display().to_string()))?;
    let lexicon = cfg.resolve_opt("lexicon", args.lexicon.map(|p| p.display().to_string()))?;
    let model = cfg.resolve_opt("model", args.model.map(|p| p.display().to_string()))?;
    let transforms =
        cfg.resolve_opt("transforms", args.transforms.map(|p| p.display().to_string()))?;
    let classifier = cfg.resolve("classifier", args.classifier, "gbdt".to_string())?;
    let features = cfg.resolve_opt("features", args.features.map(|p| p.display().to_string()))?;
    let top_k = cfg.resolve("top_k", args.top_k, 10usize)?;
    let out = cfg.resolve_opt("out", args.out.map(|p| p.display().to_string()))?;
    let _ = cfg.resolve_seed(None)?;
    cfg.print("report.errors");

    match task.as_str() {
        "split" => {
            let data = data
                .ok_or_else(|| CliError::Usage("report errors --task split needs --data".into()))?;
            let resources = split::load_method_resources(
                &method,
                lexicon.as_deref().map(Path::new),
                model.as_deref().map(Path::new),
                transforms.as_deref().map(Path::new),
            )?;
            let (aligned, preds, dropped) =
                split::predictions_against_gold(&method, data.as_ref(), &resources)?;
            let suffixes = super::load_transforms(transforms.as_deref().map(Path::new))?
                .strip_suffixes();
            let report = error_report(&preds, &aligned, &suffixes).map_err(CliError::data)?;
            match &out {
                Some(path) => report.write_tsv(path.as_ref()).map_err(CliError::data)?,
                None => print!("{}", report.to_tsv()),
            }
            print!("{}", report.summary(aligned.len()));
            print_result(&[
                ("task", task),
                ("errors", report.records.len().to_string()),
                ("linking_confusions", report.linking_confusions.to_string()),
                ("n", aligned.len().to_string()),
                ("dropped", dropped.to_string()),
            ]);
        }
        "idiom" => {
            let features_path = features.ok_or_else(|| {
                CliError::Usage("report errors --task idiom needs --features".into())
            })?;
            let data_path = data.ok_or_else(|| {
                CliError::Usage(
                    "report errors --task idiom needs --data (the annotated file)".into(),
                )
            })?;
            let rows =
                dekompost::idiom::read_feature_file(features_path.as_ref()).map_err(CliError::data)?;
            let preds =
                idiom::predictions(&classifier, model.as_deref().map(Path::new), &rows)?;
            let annotated = parse_annotated_file(data_path.as_ref()).map_err(CliError::data)?;

            // Collect the misclassified compounds by surface form.
            let mut misclassified = Vec::new();
            for (row, &pred) in rows.iter().zip(preds.iter()) {
                let gold = binarize_category(row.category).map_err(CliError::data)?;
                if pred != gold {
                    if let Some(a) = annotated.iter().find(|a| a.entry.surface == row.surface) {
                        misclassified.push(a.clone());
                    }
                }
            }
            let (top_modifiers, top_heads) = idiom_error_components(&misclassified, top_k);
            let mut text = String::new();
            text.push_str(&format!(
                "{} misclassified of {}\n",
                misclassified.len(),
                rows.len()
            ));
            text.push_str("component\trole\tcount\n");
            for (w, c) in &top_modifiers {
                text.push_str(&format!("{w}\tmodifier\t{c}\n"));
            }
            for (w, c) in &top_heads {
                text.push_str(&format!("{w}\thead\t{c}\n"));
            }
            match &out {
                Some(path) => std::fs::write(Path::new(path), &text)
                    .map_err(|e| CliError::Data(format!("cannot write {path}: {e}")))?,
                None => print!("{text}"),
            }
            print_result(&[
                ("task", task),
                ("misclassified", misclassified.len().to_string()),
                ("n", rows.len().to_string()),
            ]);
        }
        other => {
            return Err(CliError::Usage(format!(
                "--task must be split or idiom, got {other}"
            )))
        }
    }
    Ok(())
}

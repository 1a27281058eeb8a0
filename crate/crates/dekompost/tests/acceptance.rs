//! Acceptance suite. Each test covers one release criterion and prints a
//! `ACCEPTANCE <id> <name>: pass` line (run with `--nocapture` to see them).
//!
//! Criterion 7 (full-data reference reproduction) needs the licensed
//! GermaNet v14 compound list and pretrained 300-d vectors; it activates
//! when `DEKOMPOST_GERMANET`, `DEKOMPOST_ANNOTATED` and `DEKOMPOST_VECTORS`
//! point at the data and reports itself as skipped otherwise.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dekompost::corpus::{derive_boundary, BoundaryLabel, Lexicon};
use dekompost::idiom::{
    binarize_category, dummy_predict, logreg_loss_and_gradient, predict_gbdt, predict_logreg,
    train_gbdt, train_logreg, GbdtHyper,
};
use dekompost::metrics::{binary_prf1, split_accuracy};
use dekompost::neural::{
    loss_and_gradients, train, Batch, CellKind, LabelerConfig, LabelerParams, TrainExample, Vocab,
};
use dekompost::splitters::{
    frequency_split, ngram_split, collect_ngram_stats, neural_split, SplitMethod, SplitResult,
    TransformTable,
};
use dekompost::tokenize::{bpe_train, char_tokenize, project_labels, Tokenizer};

const GRADCHECK_EPS: f64 = 1e-4;
const GRADCHECK_MAX_REL: f64 = 1e-4;
const GRADCHECK_INSTANCES: usize = 20;
const GRADCHECK_BUDGET_SECS: u64 = 120;

const OVERFIT_HIDDEN: usize = 64;
const OVERFIT_COMPOUNDS: usize = 100;
const OVERFIT_MAX_EPOCHS: usize = 200;
const OVERFIT_BUDGET_SECS: u64 = 180;

const FREQ_ORACLE_CASES: usize = 500;
const BPE_WORDS: usize = 1000;

const DUMMY_PREVALENCE: f64 = 0.117;
const DUMMY_F1_EXPECTED: f64 = 0.2095;
const DUMMY_F1_TOL: f64 = 0.0005;

/// Weighted-loss curves may wiggle at f64 rounding scale once converged.
const LOSS_MONOTONE_SLACK: f64 = 1e-12;

// --- 1. gradient correctness ------------------------------------------------

#[test]
fn acceptance_1_gradient_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for cell in [CellKind::Vanilla, CellKind::Gru, CellKind::Lstm] {
        let mut worst = 0.0f64;
        for instance in 0..GRADCHECK_INSTANCES {
            let tokens: Vec<String> = (0..11).map(|i| format!("t{i}")).collect();
            let vocab = Vocab::with_unk(tokens);
            assert_eq!(vocab.len(), 12);
            let mut config = LabelerConfig::new(cell, vocab);
            config.hidden_dim = 8;
            config.embed_dim = 6;
            config.seed = 1000 + instance as u64;
            let params = LabelerParams::init(&config);

            // Two random short sequences per instance.
            let examples: Vec<TrainExample> = (0..2)
                .map(|_| {
                    let len = rng.gen_range(1..=5usize);
                    let token_ids = (0..len).map(|_| rng.gen_range(0..12usize)).collect();
                    let split_pos = rng.gen_range(0..len);
                    TrainExample {
                        token_ids,
                        split_pos,
                    }
                })
                .collect();
            let refs: Vec<&TrainExample> = examples.iter().collect();
            let batch = Batch::from_examples(&refs);
            let (_, grads) = loss_and_gradients(&params, &config, &batch).unwrap();

            let n_blocks = params.blocks().len();
            for bi in 0..n_blocks {
                let n = params.blocks()[bi].1.data().len();
                for k in 0..n {
                    let mut plus = params.clone();
                    plus.blocks_mut()[bi].1.data_mut()[k] += GRADCHECK_EPS;
                    let mut minus = params.clone();
                    minus.blocks_mut()[bi].1.data_mut()[k] -= GRADCHECK_EPS;
                    let (lp, _) = loss_and_gradients(&plus, &config, &batch).unwrap();
                    let (lm, _) = loss_and_gradients(&minus, &config, &batch).unwrap();
                    let numeric = (lp - lm) / (2.0 * GRADCHECK_EPS);
                    let analytic = grads.blocks()[bi].1.data()[k];
                    let denom = numeric.abs().max(analytic.abs()).max(1e-6);
                    worst = worst.max((numeric - analytic).abs() / denom);
                }
            }
        }
        assert!(
            worst < GRADCHECK_MAX_REL,
            "{}: max relative gradient error {worst}",
            cell.as_str()
        );
    }
    let elapsed = start.elapsed().as_secs();
    assert!(elapsed < GRADCHECK_BUDGET_SECS, "took {elapsed}s");
    println!("ACCEPTANCE 1 gradient-correctness: pass ({elapsed}s)");
}

// --- 2. overfit smoke --------------------------------------------------------

fn synthetic_compounds(n: usize, seed: u64) -> Vec<(String, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<char> = "abdefgiklmnorstu".chars().collect();
    let mut roots: Vec<String> = Vec::new();
    while roots.len() < 24 {
        let len = rng.gen_range(3..=6usize);
        let root: String = (0..len)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect();
        if !roots.contains(&root) {
            roots.push(root);
        }
    }
    // Sample pairs; keep one label per surface so the task stays
    // consistent even if two pairs collide on the same string.
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    while out.len() < n {
        let l = &roots[rng.gen_range(0..roots.len())];
        let r = &roots[rng.gen_range(0..roots.len())];
        let word = format!("{l}{r}");
        if seen.contains_key(&word) {
            continue;
        }
        seen.insert(word.clone(), l.chars().count());
        out.push((word, l.chars().count()));
    }
    out
}

#[test]
fn acceptance_2_overfit_smoke() {
    let start = Instant::now();
    let data = synthetic_compounds(OVERFIT_COMPOUNDS, 7);
    let vocab = Vocab::with_unk(
        data.iter()
            .flat_map(|(w, _)| w.chars().map(String::from))
            .collect::<Vec<_>>(),
    );
    let examples: Vec<TrainExample> = data
        .iter()
        .map(|(w, b)| TrainExample {
            token_ids: w
                .chars()
                .map(|c| vocab.id(&c.to_string()).unwrap())
                .collect(),
            split_pos: b - 1,
        })
        .collect();
    let mut config = LabelerConfig::new(CellKind::Gru, vocab);
    config.hidden_dim = OVERFIT_HIDDEN;
    config.embed_dim = 32;
    config.epochs = OVERFIT_MAX_EPOCHS;
    config.batch_size = 10;
    config.learning_rate = 3e-3;
    config.seed = 17;
    let out = train(&config, &examples, &examples).unwrap();
    let best = out
        .log
        .iter()
        .map(|m| m.dev_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let first_perfect = out.log.iter().find(|m| m.dev_accuracy == 1.0);
    assert_eq!(
        best, 1.0,
        "never reached 100% train split accuracy; final epoch: {:?}",
        out.log.last()
    );
    let elapsed = start.elapsed().as_secs();
    assert!(elapsed < OVERFIT_BUDGET_SECS, "took {elapsed}s");
    println!(
        "ACCEPTANCE 2 overfit-smoke: pass (100% at epoch {}, {elapsed}s)",
        first_perfect.unwrap().epoch
    );
}

// --- 3. frequency-splitter oracle ---------------------------------------------

/// Independent exhaustive oracle: enumerates every boundary and transform
/// straight from the contract, with its own transform implementations.
mod freq_oracle {
    pub fn deumlaut(s: &str) -> String {
        s.replace("äu", "au")
            .replace('ä', "a")
            .replace('ö', "o")
            .replace('ü', "u")
    }

    /// Lemma candidates for a left part, identity first, then the default
    /// table order: strip s/es/n/en/nen/e/er, add e, de-umlaut.
    pub fn left_candidates(left: &str) -> Vec<String> {
        let mut out = vec![left.to_string()];
        for suffix in ["s", "es", "n", "en", "nen", "e", "er"] {
            if let Some(stem) = left.strip_suffix(suffix) {
                if !stem.is_empty() {
                    out.push(stem.to_string());
                }
            }
        }
        out.push(format!("{left}e"));
        let d = deumlaut(left);
        if d != left {
            out.push(d);
        }
        out
    }

    /// (boundary, score) of the best split, or None when no split beats
    /// the whole word's own frequency.
    pub fn best_split(
        word: &str,
        lexicon: &std::collections::HashMap<String, u64>,
        min_part: usize,
    ) -> Option<(usize, f64)> {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let whole = lexicon.get(word).copied().unwrap_or(0) as f64;
        let mut best: Option<(usize, f64)> = None;
        if n >= 2 * min_part {
            for b in min_part..=(n - min_part) {
                let left: String = chars[..b].iter().collect();
                let right: String = chars[b..].iter().collect();
                let right_freq = lexicon.get(&right).copied().unwrap_or(0);
                if right_freq == 0 {
                    continue;
                }
                for lemma in left_candidates(&left) {
                    let left_freq = lexicon.get(&lemma).copied().unwrap_or(0);
                    if left_freq == 0 {
                        continue;
                    }
                    let score = ((left_freq as f64) * (right_freq as f64)).sqrt();
                    if best.map(|(_, s)| score > s).unwrap_or(true) {
                        best = Some((b, score));
                    }
                }
            }
        }
        best.filter(|&(_, s)| s > whole)
    }
}

#[test]
fn acceptance_3_frequency_splitter_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let letters: Vec<char> = "abdeghiklmnorstuä".chars().collect();
    let transforms = TransformTable::default();
    let rand_word = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> String {
        let len = rng.gen_range(lo..=hi);
        (0..len)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect()
    };

    for case in 0..FREQ_ORACLE_CASES {
        let n_words = rng.gen_range(1..=50usize);
        let mut lex = Lexicon::new();
        let mut map: HashMap<String, u64> = HashMap::new();
        let mut vocabulary: Vec<String> = Vec::new();
        for _ in 0..n_words {
            let w = rand_word(&mut rng, 3, 8);
            let c = rng.gen_range(1..=100u64);
            lex.add(&w, c);
            *map.entry(w.clone()).or_insert(0) += c;
            vocabulary.push(w);
        }
        // Mix plain random words with plausible compounds built from the
        // lexicon (with and without a linking element).
        let word: String = match case % 3 {
            0 => rand_word(&mut rng, 3, 15),
            1 => {
                let l = &vocabulary[rng.gen_range(0..vocabulary.len())];
                let r = &vocabulary[rng.gen_range(0..vocabulary.len())];
                format!("{l}{r}")
            }
            _ => {
                let l = &vocabulary[rng.gen_range(0..vocabulary.len())];
                let r = &vocabulary[rng.gen_range(0..vocabulary.len())];
                let link = ["s", "n", "e", "es", "en"][rng.gen_range(0..5)];
                format!("{l}{link}{r}")
            }
        };
        let word: String = word.chars().take(15).collect();
        if word.chars().count() < 2 {
            continue;
        }

        let got = frequency_split(&word, &lex, &transforms);
        let expect = freq_oracle::best_split(&word, &map, 3);
        match expect {
            Some((boundary, score)) => {
                assert_eq!(
                    got.method,
                    SplitMethod::Frequency,
                    "case {case}: word {word} expected split at {boundary}"
                );
                assert_eq!(got.boundary(), Some(boundary), "case {case}: word {word}");
                assert_eq!(got.score, score, "case {case}: word {word}");
            }
            None => {
                assert_eq!(
                    got.method,
                    SplitMethod::None,
                    "case {case}: word {word} must not split (got {got:?})"
                );
            }
        }
    }
    println!("ACCEPTANCE 3 frequency-splitter-oracle: pass ({FREQ_ORACLE_CASES} cases)");
}

// --- 4. BPE invariants --------------------------------------------------------

#[test]
fn acceptance_4_bpe_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let letters: Vec<char> = "abcdefgäöüß".chars().collect();
    let words: Vec<String> = (0..BPE_WORDS)
        .map(|_| {
            let len = rng.gen_range(2..=14usize);
            (0..len)
                .map(|_| letters[rng.gen_range(0..letters.len())])
                .collect()
        })
        .collect();

    let corpus: Vec<String> = words.iter().take(300).cloned().collect();
    let model_a = bpe_train(&corpus, 60).unwrap();
    let model_b = bpe_train(&corpus, 60).unwrap();
    assert_eq!(model_a.merges, model_b.merges, "training must be deterministic");

    let mut lossy_char = 0usize;
    for w in &words {
        // Concatenation reproduces the word under BPE.
        let toks = model_a.encode(w).unwrap();
        assert_eq!(toks.tokens.concat(), *w);

        // Character-level projection of a random valid boundary: exactly
        // one positive label, never lossy.
        let chars = w.chars().count();
        let boundary = BoundaryLabel {
            split_index: rng.gen_range(1..chars),
        };
        let char_toks = char_tokenize(w).unwrap();
        let labels = project_labels(boundary, &char_toks).unwrap();
        assert_eq!(labels.labels.iter().filter(|&&l| l == 1).count(), 1);
        if labels.lossy {
            lossy_char += 1;
        }

        // The same boundary on the BPE tokenization still yields exactly
        // one positive label whenever a label is possible at all.
        if toks.len() >= 2 {
            let labels = project_labels(boundary, &toks).unwrap();
            assert_eq!(labels.labels.iter().filter(|&&l| l == 1).count(), 1);
        }
    }
    assert_eq!(lossy_char, 0, "character-level projection is never lossy");
    println!("ACCEPTANCE 4 bpe-invariants: pass ({BPE_WORDS} words)");
}

// --- 5. classifier sanity -------------------------------------------------------

#[test]
fn acceptance_5_classifier_sanity() {
    // Logistic regression reaches 100% on separable 2-D data.
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut x2: Vec<Vec<f64>> = Vec::new();
    let mut y2: Vec<u8> = Vec::new();
    for _ in 0..40 {
        let label = rng.gen_bool(0.5);
        let cx = if label { 2.0 } else { -2.0 };
        x2.push(vec![cx + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        y2.push(u8::from(label));
    }
    let model = train_logreg(&x2, &y2, 1.0).unwrap();
    for (xi, &yi) in x2.iter().zip(y2.iter()) {
        assert_eq!(predict_logreg(&model, xi).unwrap().0, yi);
    }

    // Loss gradient matches central finite differences at 1e-6 relative.
    let w: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let b = rng.gen_range(-0.5..0.5);
    let (_, grad_w, grad_b) = logreg_loss_and_gradient(&w, b, &x2, &y2, 1.0);
    let eps = 1e-6;
    for k in 0..w.len() {
        let mut wp = w.clone();
        wp[k] += eps;
        let mut wm = w.clone();
        wm[k] -= eps;
        let (lp, _, _) = logreg_loss_and_gradient(&wp, b, &x2, &y2, 1.0);
        let (lm, _, _) = logreg_loss_and_gradient(&wm, b, &x2, &y2, 1.0);
        let numeric = (lp - lm) / (2.0 * eps);
        let rel = (grad_w[k] - numeric).abs() / numeric.abs().max(1e-12);
        assert!(rel < 1e-6, "weight {k}: relative error {rel}");
    }
    let (lp, _, _) = logreg_loss_and_gradient(&w, b + eps, &x2, &y2, 1.0);
    let (lm, _, _) = logreg_loss_and_gradient(&w, b - eps, &x2, &y2, 1.0);
    let numeric = (lp - lm) / (2.0 * eps);
    assert!((grad_b - numeric).abs() / numeric.abs().max(1e-12) < 1e-6);

    // GBDT: weighted training loss is non-increasing over all 200 rounds
    // on a fixed synthetic 900-d set.
    let n = 60usize;
    let dim = 900usize;
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut y: Vec<u8> = Vec::with_capacity(n);
    for i in 0..n {
        let label = u8::from(i % 5 == 0);
        let mut row: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        row[0] += if label == 1 { 0.8 } else { -0.2 };
        x.push(row);
        y.push(label);
    }
    let hyper = GbdtHyper::default();
    assert_eq!(hyper.n_estimators, 200);
    let (gbdt, losses) = train_gbdt(&x, &y, &hyper).unwrap();
    assert_eq!(losses.len(), 200);
    for (i, pair) in losses.windows(2).enumerate() {
        assert!(
            pair[1] <= pair[0] + LOSS_MONOTONE_SLACK,
            "round {}: {} -> {}",
            i + 1,
            pair[0],
            pair[1]
        );
    }
    // The ensemble actually predicts.
    let (_, p) = predict_gbdt(&gbdt, &x[0]).unwrap();
    assert!(p.is_finite());
    println!("ACCEPTANCE 5 classifier-sanity: pass");
}

// --- 6. dummy-F1 identity -------------------------------------------------------

#[test]
fn acceptance_6_dummy_f1_identity() {
    let n = 1000usize;
    let positives = (DUMMY_PREVALENCE * n as f64).round() as usize;
    assert_eq!(positives, 117);
    let gold: Vec<u8> = (0..n).map(|i| u8::from(i < positives)).collect();
    let preds = dummy_predict(n);
    let m = binary_prf1(&preds, &gold, 1).unwrap();
    let p = positives as f64 / n as f64;
    let identity = 2.0 * p / (1.0 + p);
    assert!((m.f1 - identity).abs() < 1e-12);
    assert!(
        (m.f1 - DUMMY_F1_EXPECTED).abs() <= DUMMY_F1_TOL,
        "dummy F1 {} not within {DUMMY_F1_TOL} of {DUMMY_F1_EXPECTED}",
        m.f1
    );
    // Two-decimal agreement with the published baseline number.
    assert!((m.f1 - dekompost::metrics::REFERENCE_DUMMY_F1).abs() < 0.005);
    println!("ACCEPTANCE 6 dummy-f1-identity: pass (F1 = {:.4})", m.f1);
}

// --- 7. reference reproduction (data-gated) ---------------------------------------

#[test]
fn acceptance_7_reference_reproduction() {
    let germanet = std::env::var("DEKOMPOST_GERMANET").ok();
    let annotated = std::env::var("DEKOMPOST_ANNOTATED").ok();
    let vectors = std::env::var("DEKOMPOST_VECTORS").ok();
    let (Some(germanet), Some(annotated), Some(vectors)) = (germanet, annotated, vectors) else {
        println!(
            "ACCEPTANCE 7 reference-reproduction: skipped (set DEKOMPOST_GERMANET, \
             DEKOMPOST_ANNOTATED and DEKOMPOST_VECTORS to run; see scripts/reproduce.sh)"
        );
        return;
    };

    use dekompost::corpus;
    use dekompost::embeddings::{load_text_vectors, OovPolicy};
    use dekompost::idiom::{build_features, Provenance};
    use dekompost::neural::{build_vocab, prepare_examples};

    let entries = corpus::parse_split_file(std::path::Path::new(&germanet)).unwrap();
    let split = corpus::partition(&entries, (0.8, 0.1, 0.1), 13).unwrap();
    let lexicon = corpus::build_lexicon(&split.train, None).unwrap();

    // Char-GRU trained with the published configuration.
    let tokenizer = Tokenizer::Char;
    let vocab = build_vocab(&split.train, &tokenizer);
    let (train_set, _) = prepare_examples(&split.train, &tokenizer, &vocab);
    let (dev_set, _) = prepare_examples(&split.dev, &tokenizer, &vocab);
    let mut config = LabelerConfig::new(CellKind::Gru, vocab);
    config.seed = 13;
    let outcome = train(&config, &train_set, &dev_set).unwrap();

    // Evaluate all three splitters on the test partition.
    let stats = collect_ngram_stats(&lexicon);
    let transforms = TransformTable::default();
    let mut gold = Vec::new();
    let mut neural_preds: Vec<SplitResult> = Vec::new();
    let mut freq_preds: Vec<SplitResult> = Vec::new();
    let mut ngram_preds: Vec<SplitResult> = Vec::new();
    let mut dropped = 0usize;
    for e in &split.test {
        match derive_boundary(e) {
            Ok(b) => {
                gold.push(b);
                neural_preds
                    .push(neural_split(&outcome.params, &config, &e.surface, &tokenizer).unwrap());
                freq_preds.push(frequency_split(&e.surface, &lexicon, &transforms));
                ngram_preds.push(ngram_split(&e.surface, &stats));
            }
            Err(_) => dropped += 1,
        }
    }
    let acc_neural = split_accuracy(&neural_preds, &gold, dropped).unwrap().accuracy;
    let acc_freq = split_accuracy(&freq_preds, &gold, dropped).unwrap().accuracy;
    let acc_ngram = split_accuracy(&ngram_preds, &gold, dropped).unwrap().accuracy;
    println!(
        "reproduction: char-gru={acc_neural:.4} frequency={acc_freq:.4} ngram={acc_ngram:.4} \
         (reference char-gru {} ± {})",
        dekompost::metrics::REFERENCE_CHAR_GRU_ACCURACY,
        dekompost::metrics::REFERENCE_SPLIT_TOLERANCE,
    );
    assert!(acc_neural > acc_freq, "char-GRU must beat the frequency baseline");
    assert!(acc_neural > acc_ngram, "char-GRU must beat the n-gram baseline");

    // Idiomaticity: every classifier must beat the dummy baseline.
    let rows = corpus::parse_annotated_file(std::path::Path::new(&annotated)).unwrap();
    let table = load_text_vectors(std::path::Path::new(&vectors))
        .unwrap()
        .with_policy(OovPolicy::Zero);
    let split = corpus::partition(&rows, (0.8, 0.0, 0.2), 13).unwrap();
    let feats = |set: &[corpus::AnnotatedCompound]| -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for a in set {
            let f = build_features(
                &a.entry.surface,
                &a.entry.modifier,
                &a.entry.head,
                &table,
                Provenance::Gold,
            )
            .unwrap();
            x.push(f.values);
            y.push(binarize_category(a.category).unwrap());
        }
        (x, y)
    };
    let (x_train, y_train) = feats(&split.train);
    let (x_test, y_test) = feats(&split.test);
    let dummy_f1 = binary_prf1(&dummy_predict(y_test.len()), &y_test, 1)
        .unwrap()
        .f1;

    let logreg = train_logreg(&x_train, &y_train, 1.0).unwrap();
    let logreg_preds: Vec<u8> = x_test
        .iter()
        .map(|x| predict_logreg(&logreg, x).unwrap().0)
        .collect();
    let logreg_f1 = binary_prf1(&logreg_preds, &y_test, 1).unwrap().f1;

    let (gbdt, _) = train_gbdt(&x_train, &y_train, &GbdtHyper::default()).unwrap();
    let gbdt_preds: Vec<u8> = x_test
        .iter()
        .map(|x| predict_gbdt(&gbdt, x).unwrap().0)
        .collect();
    let gbdt_f1 = binary_prf1(&gbdt_preds, &y_test, 1).unwrap().f1;

    println!(
        "reproduction: dummy={dummy_f1:.3} logreg={logreg_f1:.3} gbdt={gbdt_f1:.3} \
         (reference best {} ± {})",
        dekompost::metrics::REFERENCE_BEST_GOLD_F1,
        dekompost::metrics::REFERENCE_F1_TOLERANCE,
    );
    assert!(logreg_f1 > dummy_f1, "logreg must beat the dummy baseline");
    assert!(gbdt_f1 > dummy_f1, "gbdt must beat the dummy baseline");
    println!("ACCEPTANCE 7 reference-reproduction: pass");
}

// --- 8. determinism ---------------------------------------------------------------

#[test]
fn acceptance_8_determinism() {
    let dir = tempfile::tempdir().unwrap();

    // Labeler training: identical seed, bitwise-identical model file.
    let data = synthetic_compounds(24, 88);
    let vocab = Vocab::with_unk(
        data.iter()
            .flat_map(|(w, _)| w.chars().map(String::from))
            .collect::<Vec<_>>(),
    );
    let examples: Vec<TrainExample> = data
        .iter()
        .map(|(w, b)| TrainExample {
            token_ids: w
                .chars()
                .map(|c| vocab.id(&c.to_string()).unwrap())
                .collect(),
            split_pos: b - 1,
        })
        .collect();
    let mut config = LabelerConfig::new(CellKind::Lstm, vocab);
    config.hidden_dim = 8;
    config.embed_dim = 6;
    config.epochs = 3;
    config.batch_size = 4;
    config.seed = 99;

    let mut model_bytes = Vec::new();
    for run in 0..2 {
        let out = train(&config, &examples, &examples).unwrap();
        let path = dir.path().join(format!("labeler-{run}.dkmp"));
        dekompost::neural::save_params(&path, &out.params, &config).unwrap();
        model_bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(model_bytes[0], model_bytes[1]);

    // Classifier training: same data, identical files.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut x: Vec<Vec<f64>> = Vec::new();
    let mut y: Vec<u8> = Vec::new();
    for i in 0..40 {
        x.push((0..12).map(|_| rng.gen_range(-1.0..1.0)).collect());
        y.push(u8::from(i % 4 == 0));
    }
    let mut logreg_bytes = Vec::new();
    let mut gbdt_bytes = Vec::new();
    for run in 0..2 {
        let lr = train_logreg(&x, &y, 1.0).unwrap();
        let p = dir.path().join(format!("logreg-{run}.dkmp"));
        dekompost::idiom::save_logreg(&p, &lr).unwrap();
        logreg_bytes.push(std::fs::read(&p).unwrap());

        let hyper = GbdtHyper {
            n_estimators: 20,
            min_leaf: 2.0,
            ..GbdtHyper::default()
        };
        let (gb, _) = train_gbdt(&x, &y, &hyper).unwrap();
        let p = dir.path().join(format!("gbdt-{run}.dkmp"));
        dekompost::idiom::save_gbdt(&p, &gb).unwrap();
        gbdt_bytes.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(logreg_bytes[0], logreg_bytes[1]);
    assert_eq!(gbdt_bytes[0], gbdt_bytes[1]);
    println!("ACCEPTANCE 8 determinism: pass");
}

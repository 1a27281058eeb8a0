//! Batching, loss/gradient computation and the training loop.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use std::path::Path;

use crate::corpus::{derive_boundary, CompoundEntry};
use crate::mat::Matrix;
use crate::splitters::argmax_split_position;
use crate::tokenize::{project_labels, TokenizeError, Tokenizer};

use super::adam::{adam_step, AdamState};
use super::{forward_full, LabelerConfig, LabelerParams, NeuralError, Vocab};

/// One training word: token ids plus the index of the token after which the
/// gold split occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainExample {
    pub token_ids: Vec<usize>,
    pub split_pos: usize,
}

/// Padded batch. Loss and gradients are exactly invariant to the padded
/// positions: computation never reads past `lengths[i]`.
#[derive(Debug, Clone)]
pub struct Batch {
    pub token_ids: Vec<Vec<usize>>,
    pub labels: Vec<Vec<u8>>,
    pub lengths: Vec<usize>,
    pub mask: Vec<Vec<u8>>,
}

impl Batch {
    pub fn from_examples(examples: &[&TrainExample]) -> Batch {
        let width = examples
            .iter()
            .map(|e| e.token_ids.len())
            .max()
            .unwrap_or(0);
        Batch::from_examples_padded(examples, width)
    }

    /// Pad to at least `width` columns (used to check padding invariance).
    pub fn from_examples_padded(examples: &[&TrainExample], width: usize) -> Batch {
        let width = width.max(
            examples
                .iter()
                .map(|e| e.token_ids.len())
                .max()
                .unwrap_or(0),
        );
        let mut token_ids = Vec::with_capacity(examples.len());
        let mut labels = Vec::with_capacity(examples.len());
        let mut lengths = Vec::with_capacity(examples.len());
        let mut mask = Vec::with_capacity(examples.len());
        for e in examples {
            let len = e.token_ids.len();
            let mut ids = e.token_ids.clone();
            ids.resize(width, 0);
            let mut lab = vec![0u8; width];
            lab[e.split_pos] = 1;
            let mut m = vec![0u8; width];
            m[..len].fill(1);
            token_ids.push(ids);
            labels.push(lab);
            lengths.push(len);
            mask.push(m);
        }
        Batch {
            token_ids,
            labels,
            lengths,
            mask,
        }
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }
}

/// Mean cross-entropy over unmasked positions plus gradients for every
/// parameter block. Embedding gradients stay zero when the embeddings are
/// frozen.
pub fn loss_and_gradients(
    params: &LabelerParams,
    config: &LabelerConfig,
    batch: &Batch,
) -> Result<(f64, LabelerParams), NeuralError> {
    let mut grads = LabelerParams::zeros(config);
    let total_positions: usize = batch.lengths.iter().sum();
    if total_positions == 0 {
        return Ok((0.0, grads));
    }
    let scale = 1.0 / total_positions as f64;
    let hidden = config.hidden_dim;
    let mut loss = 0.0;

    for row in 0..batch.len() {
        let len = batch.lengths[row];
        let ids = &batch.token_ids[row][..len];
        let labels = &batch.labels[row][..len];
        let full = forward_full(params, config, ids)?;

        let mut dh_fwd = vec![vec![0.0; hidden]; len];
        let mut dh_bwd_rev = vec![vec![0.0; hidden]; len];
        for t in 0..len {
            let p = full.probs[t];
            let y = labels[t] as usize;
            loss -= p[y].ln() * scale;

            let mut dlogit = [p[0] * scale, p[1] * scale];
            dlogit[y] -= scale;
            let feat = full.feature(t);
            grads.out_w.add_outer(&dlogit, &feat);
            grads.out_b.add_to_row(0, &dlogit);
            let dfeat = params.out_w.matvec_t(&dlogit);
            dh_fwd[t] = dfeat[..hidden].to_vec();
            dh_bwd_rev[len - 1 - t] = dfeat[hidden..].to_vec();
        }
        if !loss.is_finite() {
            let block = params
                .first_non_finite()
                .unwrap_or_else(|| "logits".to_string());
            return Err(NeuralError::NonFinite(block));
        }

        let dxs_f = super::cells::run_backward(
            &params.forward,
            &full.xs,
            &full.fwd,
            &dh_fwd,
            &mut grads.forward,
        );
        let xs_rev: Vec<Vec<f64>> = full.xs.iter().rev().cloned().collect();
        let dxs_b_rev = super::cells::run_backward(
            &params.backward,
            &xs_rev,
            &full.bwd,
            &dh_bwd_rev,
            &mut grads.backward,
        );
        if config.embeddings_trainable {
            for t in 0..len {
                let mut dx = dxs_f[t].clone();
                for (a, b) in dx.iter_mut().zip(dxs_b_rev[len - 1 - t].iter()) {
                    *a += b;
                }
                grads.embedding.add_to_row(ids[t], &dx);
            }
        }
    }
    Ok((loss, grads))
}

fn clip_global_norm(grads: &mut LabelerParams, max_norm: f64) {
    let mut sq = 0.0;
    for (_, b) in grads.blocks() {
        for &x in b.data() {
            sq += x * x;
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for (_, b) in grads.blocks_mut() {
            for x in b.data_mut() {
                *x *= s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the final epoch.
    pub params: LabelerParams,
    /// Parameters of the epoch with the highest dev accuracy.
    pub best_params: LabelerParams,
    pub best_epoch: usize,
    pub log: Vec<EpochMetrics>,
}

/// Fraction of examples whose argmax split position matches the gold one.
pub fn split_position_accuracy(
    params: &LabelerParams,
    config: &LabelerConfig,
    set: &[TrainExample],
) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for e in set {
        if let Ok(probs) = super::predict_split_probs(params, config, &e.token_ids) {
            if argmax_split_position(&probs) == Some(e.split_pos) {
                correct += 1;
            }
        }
    }
    correct as f64 / set.len() as f64
}

/// Epoch loop: shuffle by seed, bucket by length, batch, Adam step. Records
/// the position-weighted mean training loss and the dev split accuracy per
/// epoch. Returns the final-epoch parameters along with the best-dev ones.
pub fn train(
    config: &LabelerConfig,
    train_set: &[TrainExample],
    dev_set: &[TrainExample],
) -> Result<TrainOutcome, NeuralError> {
    train_from(config, train_set, dev_set, LabelerParams::init(config))
}

/// As [`train`], but starting from the given parameters (e.g. with the
/// embedding block preloaded from pretrained sub-word vectors).
pub fn train_from(
    config: &LabelerConfig,
    train_set: &[TrainExample],
    dev_set: &[TrainExample],
    initial: LabelerParams,
) -> Result<TrainOutcome, NeuralError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(NeuralError::EmptyTrainingSet);
    }
    let mut params = initial;
    let mut adam = AdamState::new(&params);
    // Decorrelate the shuffle stream from the init stream.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9E37_79B9));

    let mut log = Vec::with_capacity(config.epochs);
    let mut best_params = params.clone();
    let mut best_epoch = 0usize;
    let mut best_acc = f64::NEG_INFINITY;

    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);
        // Stable sort buckets by length while keeping the shuffled order
        // within each length.
        order.sort_by_key(|&i| train_set[i].token_ids.len());
        let mut batches: Vec<Vec<usize>> = order
            .chunks(config.batch_size)
            .map(|c| c.to_vec())
            .collect();
        batches.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut position_sum = 0usize;
        for batch_ids in &batches {
            let refs: Vec<&TrainExample> = batch_ids.iter().map(|&i| &train_set[i]).collect();
            let batch = Batch::from_examples(&refs);
            let (loss, mut grads) = loss_and_gradients(&params, config, &batch)?;
            if let Some(max_norm) = config.grad_clip {
                clip_global_norm(&mut grads, max_norm);
            }
            adam_step(&mut params, &grads, &mut adam, config.learning_rate)?;
            if let Some(block) = params.first_non_finite() {
                return Err(NeuralError::NonFinite(block));
            }
            let positions: usize = batch.lengths.iter().sum();
            loss_sum += loss * positions as f64;
            position_sum += positions;
        }
        let train_loss = loss_sum / position_sum.max(1) as f64;
        let dev_accuracy = split_position_accuracy(&params, config, dev_set);
        if dev_accuracy > best_acc {
            best_acc = dev_accuracy;
            best_epoch = epoch;
            best_params = params.clone();
        }
        log.push(EpochMetrics {
            epoch,
            train_loss,
            dev_accuracy,
        });
    }
    Ok(TrainOutcome {
        params,
        best_params,
        best_epoch,
        log,
    })
}

/// Counters from dataset preparation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrepStats {
    pub kept: usize,
    pub unalignable: usize,
    pub single_token: usize,
    pub lossy: usize,
}

/// Vocabulary over all tokens the tokenizer produces on the given surfaces.
pub fn build_vocab(entries: &[CompoundEntry], tokenizer: &Tokenizer) -> Vocab {
    let mut tokens: Vec<String> = Vec::new();
    for e in entries {
        if let Ok(seq) = tokenizer.tokenize(&e.surface) {
            tokens.extend(seq.tokens);
        }
    }
    Vocab::with_unk(tokens)
}

/// Derive gold boundaries, tokenize, and project labels. Unalignable
/// entries and words that tokenize to a single token are dropped and
/// counted; lossy projections are kept and counted.
pub fn prepare_examples(
    entries: &[CompoundEntry],
    tokenizer: &Tokenizer,
    vocab: &Vocab,
) -> (Vec<TrainExample>, PrepStats) {
    let mut stats = PrepStats::default();
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let boundary = match derive_boundary(entry) {
            Ok(b) => b,
            Err(_) => {
                stats.unalignable += 1;
                continue;
            }
        };
        let seq = match tokenizer.tokenize(&entry.surface) {
            Ok(s) => s,
            Err(_) => {
                stats.unalignable += 1;
                continue;
            }
        };
        let labels = match project_labels(boundary, &seq) {
            Ok(l) => l,
            Err(TokenizeError::SingleToken) => {
                stats.single_token += 1;
                continue;
            }
            Err(_) => {
                stats.unalignable += 1;
                continue;
            }
        };
        if labels.lossy {
            stats.lossy += 1;
        }
        stats.kept += 1;
        out.push(TrainExample {
            token_ids: vocab.encode(&seq),
            split_pos: labels.split_position(),
        });
    }
    (out, stats)
}

/// Report from loading pretrained sub-word vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordLoadReport {
    pub found: usize,
    pub missing: usize,
}

/// Embedding matrix rows come from the text vector file where the token is
/// present; missing tokens are initialized from seeded uniform(-0.1, 0.1).
pub fn load_subword_embeddings(
    path: &Path,
    vocab: &Vocab,
    embed_dim: usize,
    seed: u64,
) -> Result<(Matrix, SubwordLoadReport), NeuralError> {
    let table = crate::embeddings::load_text_vectors(path)
        .map_err(|e| NeuralError::EmbeddingFile(e.to_string()))?;
    if table.dim != embed_dim {
        return Err(NeuralError::DimensionConflict {
            expected: embed_dim,
            found: table.dim,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let mut m = Matrix::zeros(vocab.len(), embed_dim);
    let mut report = SubwordLoadReport {
        found: 0,
        missing: 0,
    };
    for (i, token) in vocab.tokens().iter().enumerate() {
        match table.vector(token) {
            Some(v) => {
                m.row_mut(i).copy_from_slice(v);
                report.found += 1;
            }
            None => {
                for x in m.row_mut(i) {
                    *x = rng.gen_range(-0.1..0.1);
                }
                report.missing += 1;
            }
        }
    }
    Ok((m, report))
}

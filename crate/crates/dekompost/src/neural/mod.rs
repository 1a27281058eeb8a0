//! Sequence-labeling engine for split detection.
//!
//! A bidirectional recurrent encoder (vanilla RNN, GRU or LSTM cells) reads
//! a word as sub-word tokens. The forward and backward hidden states at each
//! position are concatenated and fed through a fully connected layer with a
//! two-way softmax that yields the probability of a split after that token.
//!
//! Everything is computed in `f64` on the CPU with explicit backpropagation;
//! model files store parameters as 32-bit floats (see [`crate::container`]).

mod adam;
mod cells;
mod io;
mod train;

pub use adam::{adam_step, AdamState};
pub use io::{load_params, save_params, save_params_with_extras, LoadedModel};
pub use train::{
    build_vocab, load_subword_embeddings, loss_and_gradients, prepare_examples,
    split_position_accuracy, train, train_from, Batch, EpochMetrics, PrepStats,
    SubwordLoadReport, TrainExample, TrainOutcome,
};

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::container::ContainerError;
use crate::mat::Matrix;
use crate::tokenize::TokenSequence;
use cells::{run_forward, StepState};

pub const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("token id {id} out of range for vocab of {vocab}")]
    TokenOutOfRange { id: usize, vocab: usize },
    #[error("non-finite values in block {0}")]
    NonFinite(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("shape mismatch between parameters and gradients")]
    ShapeMismatch,
    #[error("embedding file has dimension {found}, config expects {expected}")]
    DimensionConflict { expected: usize, found: usize },
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("embedding file: {0}")]
    EmbeddingFile(String),
}

/// Token-to-index map with a reserved unknown token at index 0.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Build from an arbitrary token collection: deduplicate, sort, and
    /// reserve index 0 for the unknown token.
    pub fn with_unk<I, S>(tokens: I) -> Vocab
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut uniq: Vec<String> = tokens
            .into_iter()
            .map(Into::into)
            .filter(|t| t != UNK_TOKEN)
            .collect();
        uniq.sort();
        uniq.dedup();
        let mut all = Vec::with_capacity(uniq.len() + 1);
        all.push(UNK_TOKEN.to_string());
        all.extend(uniq);
        Vocab::from_ordered(all)
    }

    /// Rebuild from an already-ordered token list (model deserialization).
    pub fn from_ordered(tokens: Vec<String>) -> Vocab {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab { tokens, index }
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(0)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Map a token sequence to ids, sending unknown tokens to the reserved
    /// unknown index.
    pub fn encode(&self, seq: &TokenSequence) -> Vec<usize> {
        seq.tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Vanilla,
    Gru,
    Lstm,
}

impl CellKind {
    pub fn gate_names(self) -> &'static [&'static str] {
        match self {
            CellKind::Vanilla => &["h"],
            CellKind::Gru => &["z", "r", "n"],
            CellKind::Lstm => &["i", "f", "g", "o"],
        }
    }

    pub fn n_gates(self) -> usize {
        self.gate_names().len()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Vanilla => "vanilla",
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
        }
    }

    pub fn parse(s: &str) -> Result<CellKind, NeuralError> {
        match s {
            "vanilla" => Ok(CellKind::Vanilla),
            "gru" => Ok(CellKind::Gru),
            "lstm" => Ok(CellKind::Lstm),
            other => Err(NeuralError::InvalidConfig(format!(
                "unknown cell kind: {other}"
            ))),
        }
    }
}

/// Hyperparameters plus the token vocabulary the model is bound to.
#[derive(Debug, Clone)]
pub struct LabelerConfig {
    pub cell: CellKind,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub vocab: Vocab,
    pub embeddings_trainable: bool,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Optional global-norm gradient clip, mainly for vanilla RNN stability.
    pub grad_clip: Option<f64>,
    pub seed: u64,
}

impl LabelerConfig {
    pub fn new(cell: CellKind, vocab: Vocab) -> LabelerConfig {
        LabelerConfig {
            cell,
            hidden_dim: 256,
            embed_dim: 64,
            vocab,
            embeddings_trainable: true,
            epochs: 30,
            learning_rate: 1e-3,
            batch_size: 64,
            grad_clip: None,
            seed: 13,
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.hidden_dim == 0 || self.embed_dim == 0 {
            return Err(NeuralError::InvalidConfig(
                "hidden_dim and embed_dim must be at least 1".into(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(NeuralError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.vocab.is_empty() {
            return Err(NeuralError::InvalidConfig("vocab is empty".into()));
        }
        Ok(())
    }
}

/// Weight blocks of one recurrent cell: per gate an input matrix
/// (hidden × embed), a recurrent matrix (hidden × hidden) and a bias row.
#[derive(Debug, Clone)]
pub struct CellWeights {
    pub kind: CellKind,
    pub w_in: Vec<Matrix>,
    pub w_rec: Vec<Matrix>,
    pub bias: Vec<Matrix>,
}

impl CellWeights {
    fn zeros(kind: CellKind, hidden: usize, embed: usize) -> CellWeights {
        let n = kind.n_gates();
        CellWeights {
            kind,
            w_in: (0..n).map(|_| Matrix::zeros(hidden, embed)).collect(),
            w_rec: (0..n).map(|_| Matrix::zeros(hidden, hidden)).collect(),
            bias: (0..n).map(|_| Matrix::zeros(1, hidden)).collect(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_rec[0].rows()
    }
}

/// All trainable parameters of the labeler.
#[derive(Debug, Clone)]
pub struct LabelerParams {
    pub embedding: Matrix,
    pub forward: CellWeights,
    pub backward: CellWeights,
    pub out_w: Matrix,
    pub out_b: Matrix,
}

impl LabelerParams {
    /// All parameters zero. Also serves as the gradient container.
    pub fn zeros(config: &LabelerConfig) -> LabelerParams {
        LabelerParams {
            embedding: Matrix::zeros(config.vocab.len(), config.embed_dim),
            forward: CellWeights::zeros(config.cell, config.hidden_dim, config.embed_dim),
            backward: CellWeights::zeros(config.cell, config.hidden_dim, config.embed_dim),
            out_w: Matrix::zeros(2, 2 * config.hidden_dim),
            out_b: Matrix::zeros(1, 2),
        }
    }

    /// Seeded initialization: embeddings uniform(-0.1, 0.1), weight blocks
    /// uniform(-k, k) with k = 1/sqrt(fan_in), biases zero.
    pub fn init(config: &LabelerConfig) -> LabelerParams {
        let mut params = LabelerParams::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut fill = |m: &mut Matrix, k: f64| {
            for v in m.data_mut() {
                *v = rng.gen_range(-k..k);
            }
        };

        fill(&mut params.embedding, 0.1);
        let k_in = 1.0 / (config.embed_dim as f64).sqrt();
        let k_rec = 1.0 / (config.hidden_dim as f64).sqrt();
        for cell in [&mut params.forward, &mut params.backward] {
            for m in &mut cell.w_in {
                fill(m, k_in);
            }
            for m in &mut cell.w_rec {
                fill(m, k_rec);
            }
        }
        fill(&mut params.out_w, 1.0 / (2.0 * config.hidden_dim as f64).sqrt());
        params
    }

    /// Named parameter blocks in a fixed order. Serialization, Adam state
    /// and gradient checking all walk this order.
    pub fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut out: Vec<(String, &Matrix)> = vec![("embed".to_string(), &self.embedding)];
        for (dir, cell) in [("fwd", &self.forward), ("bwd", &self.backward)] {
            for (g, name) in cell.kind.gate_names().iter().enumerate() {
                out.push((format!("{dir}.{name}.w_in"), &cell.w_in[g]));
                out.push((format!("{dir}.{name}.w_rec"), &cell.w_rec[g]));
                out.push((format!("{dir}.{name}.bias"), &cell.bias[g]));
            }
        }
        out.push(("out.w".to_string(), &self.out_w));
        out.push(("out.b".to_string(), &self.out_b));
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out: Vec<(String, &mut Matrix)> =
            vec![("embed".to_string(), &mut self.embedding)];
        for (dir, cell) in [("fwd", &mut self.forward), ("bwd", &mut self.backward)] {
            let names = cell.kind.gate_names();
            let gates = cell
                .w_in
                .iter_mut()
                .zip(cell.w_rec.iter_mut())
                .zip(cell.bias.iter_mut());
            for (name, ((wi, wr), b)) in names.iter().zip(gates) {
                out.push((format!("{dir}.{name}.w_in"), wi));
                out.push((format!("{dir}.{name}.w_rec"), wr));
                out.push((format!("{dir}.{name}.bias"), b));
            }
        }
        out.push(("out.w".to_string(), &mut self.out_w));
        out.push(("out.b".to_string(), &mut self.out_b));
        out
    }

    /// Name of the first block containing a non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        self.blocks()
            .into_iter()
            .find(|(_, m)| !m.is_finite())
            .map(|(n, _)| n)
    }
}

pub(crate) struct FullForward {
    pub xs: Vec<Vec<f64>>,
    pub fwd: Vec<StepState>,
    /// States of the right-to-left pass, indexed by reversed position.
    pub bwd: Vec<StepState>,
    pub probs: Vec<[f64; 2]>,
}

impl FullForward {
    /// Feature vector `[h_fwd(t) ; h_bwd(t)]` at position `t`.
    pub fn feature(&self, t: usize) -> Vec<f64> {
        let len = self.fwd.len();
        let mut f = self.fwd[t].h.clone();
        f.extend_from_slice(&self.bwd[len - 1 - t].h);
        f
    }
}

fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}

pub(crate) fn forward_full(
    params: &LabelerParams,
    config: &LabelerConfig,
    token_ids: &[usize],
) -> Result<FullForward, NeuralError> {
    let vocab = config.vocab.len();
    for &id in token_ids {
        if id >= vocab {
            return Err(NeuralError::TokenOutOfRange { id, vocab });
        }
    }
    let xs: Vec<Vec<f64>> = token_ids
        .iter()
        .map(|&id| params.embedding.row(id).to_vec())
        .collect();
    let xs_rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();

    let fwd = run_forward(&params.forward, &xs);
    let bwd = run_forward(&params.backward, &xs_rev);

    let len = xs.len();
    let mut probs = Vec::with_capacity(len);
    for t in 0..len {
        let mut feat = fwd[t].h.clone();
        feat.extend_from_slice(&bwd[len - 1 - t].h);
        let z = params.out_w.matvec(&feat);
        let logits = [z[0] + params.out_b.at(0, 0), z[1] + params.out_b.at(0, 1)];
        probs.push(softmax2(logits));
    }
    Ok(FullForward {
        xs,
        fwd,
        bwd,
        probs,
    })
}

/// Per-position features: row `t` is the concatenation of the forward
/// hidden state at `t` and the backward hidden state at `t`.
pub fn encode_sequence(
    params: &LabelerParams,
    config: &LabelerConfig,
    token_ids: &[usize],
) -> Result<Matrix, NeuralError> {
    let full = forward_full(params, config, token_ids)?;
    let h2 = 2 * config.hidden_dim;
    let mut out = Matrix::zeros(token_ids.len(), h2);
    for t in 0..token_ids.len() {
        out.row_mut(t).copy_from_slice(&full.feature(t));
    }
    Ok(out)
}

/// Probability of a split after each token.
pub fn predict_split_probs(
    params: &LabelerParams,
    config: &LabelerConfig,
    token_ids: &[usize],
) -> Result<Vec<f64>, NeuralError> {
    let full = forward_full(params, config, token_ids)?;
    Ok(full.probs.iter().map(|p| p[1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(cell: CellKind) -> LabelerConfig {
        let vocab = Vocab::with_unk(["a", "b", "c", "d"].map(String::from));
        let mut c = LabelerConfig::new(cell, vocab);
        c.hidden_dim = 4;
        c.embed_dim = 3;
        c.seed = 7;
        c
    }

    #[test]
    fn vocab_reserves_unk_at_zero() {
        let v = Vocab::with_unk(["b", "a", "b"].map(String::from));
        assert_eq!(v.token(0), UNK_TOKEN);
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("a"), Some(1));
        assert_eq!(v.id_or_unk("zz"), 0);
    }

    #[test]
    fn zero_params_give_zero_features_and_uniform_probs() {
        for cell in [CellKind::Vanilla, CellKind::Gru, CellKind::Lstm] {
            let config = tiny_config(cell);
            let params = LabelerParams::zeros(&config);
            let feats = encode_sequence(&params, &config, &[1, 2, 3]).unwrap();
            assert!(feats.data().iter().all(|&x| x == 0.0));
            let probs = predict_split_probs(&params, &config, &[1, 2, 3]).unwrap();
            for p in probs {
                assert!((p - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_normalize_and_stay_open_interval() {
        for cell in [CellKind::Vanilla, CellKind::Gru, CellKind::Lstm] {
            let config = tiny_config(cell);
            let params = LabelerParams::init(&config);
            let full = forward_full(&params, &config, &[1, 2, 3, 4]).unwrap();
            for p in &full.probs {
                assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
                assert!(p[1] > 0.0 && p[1] < 1.0);
            }
        }
    }

    #[test]
    fn length_one_input_works() {
        let config = tiny_config(CellKind::Gru);
        let params = LabelerParams::init(&config);
        let probs = predict_split_probs(&params, &config, &[2]).unwrap();
        assert_eq!(probs.len(), 1);
    }

    #[test]
    fn out_of_range_token_is_an_error() {
        let config = tiny_config(CellKind::Gru);
        let params = LabelerParams::init(&config);
        assert!(matches!(
            predict_split_probs(&params, &config, &[99]),
            Err(NeuralError::TokenOutOfRange { id: 99, .. })
        ));
    }

    #[test]
    fn reversal_symmetry_of_bidirectional_encoding() {
        // Swapping the direction cells and reversing the input must produce
        // the row-reversed feature matrix with halves swapped.
        for cell in [CellKind::Vanilla, CellKind::Gru, CellKind::Lstm] {
            let config = tiny_config(cell);
            let params = LabelerParams::init(&config);
            let mut swapped = params.clone();
            std::mem::swap(&mut swapped.forward, &mut swapped.backward);

            let ids = [1usize, 2, 3, 4, 2];
            let rev: Vec<usize> = ids.iter().rev().copied().collect();
            let a = encode_sequence(&params, &config, &ids).unwrap();
            let b = encode_sequence(&swapped, &config, &rev).unwrap();

            let h = config.hidden_dim;
            let t_max = ids.len();
            for t in 0..t_max {
                let orig = a.row(t);
                let mirrored = b.row(t_max - 1 - t);
                for j in 0..h {
                    assert!((orig[j] - mirrored[h + j]).abs() < 1e-12);
                    assert!((orig[h + j] - mirrored[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let config = tiny_config(CellKind::Lstm);
        let a = LabelerParams::init(&config);
        let b = LabelerParams::init(&config);
        for ((_, ma), (_, mb)) in a.blocks().into_iter().zip(b.blocks()) {
            assert_eq!(ma.data(), mb.data());
        }
    }
}

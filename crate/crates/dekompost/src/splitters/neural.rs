//! Argmax decoding of the sequence labeler into a split.

use crate::neural::{predict_split_probs, LabelerConfig, LabelerParams};
use crate::tokenize::Tokenizer;

use super::{argmax_split_position, SplitError, SplitMethod, SplitResult};

/// Tokenize the word with the tokenizer the model was trained with, predict
/// per-token split probabilities, and split after the most probable token.
/// Exactly one split is emitted (the dataset's gold structure is binary);
/// the position after the last token is never a split. Out-of-vocabulary
/// tokens map to the reserved unknown index.
pub fn neural_split(
    params: &LabelerParams,
    config: &LabelerConfig,
    word: &str,
    tokenizer: &Tokenizer,
) -> Result<SplitResult, SplitError> {
    let seq = tokenizer.tokenize(word)?;
    if seq.len() < 2 {
        return Ok(SplitResult::no_split(word, 0.0));
    }
    let ids = config.vocab.encode(&seq);
    let probs = predict_split_probs(params, config, &ids)?;
    let pos = argmax_split_position(&probs).expect("at least two tokens");
    let boundary = seq.char_spans[pos].1;
    Ok(SplitResult::at_boundary(
        word,
        boundary,
        probs[pos],
        SplitMethod::Neural,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{train, CellKind, LabelerConfig, TrainExample, Vocab};

    /// Overfit a toy set and check that decoding reproduces every training
    /// boundary on the surface strings.
    #[test]
    fn overfit_model_reproduces_training_boundaries() {
        let words = [
            ("abcde", 2usize),
            ("abde", 2),
            ("cdeab", 3),
            ("deab", 2),
            ("eadbc", 2),
            ("bcade", 3),
        ];
        let vocab = Vocab::with_unk(["a", "b", "c", "d", "e"].map(String::from));
        let examples: Vec<TrainExample> = words
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
        config.hidden_dim = 24;
        config.embed_dim = 8;
        config.epochs = 150;
        config.batch_size = 3;
        config.learning_rate = 1e-2;
        config.seed = 5;
        let out = train(&config, &examples, &examples).unwrap();

        for (w, b) in words {
            let r = neural_split(&out.params, &config, w, &Tokenizer::Char).unwrap();
            assert_eq!(r.method, SplitMethod::Neural);
            assert_eq!(r.boundary(), Some(b), "word {w}");
            assert_eq!(format!("{}{}", r.left, r.right), w);
        }
    }

    #[test]
    fn single_token_word_is_not_split() {
        let vocab = Vocab::with_unk(["a"].map(String::from));
        let mut config = LabelerConfig::new(CellKind::Gru, vocab);
        config.hidden_dim = 4;
        config.embed_dim = 3;
        let params = crate::neural::LabelerParams::init(&config);
        let r = neural_split(&params, &config, "a", &Tokenizer::Char).unwrap();
        assert_eq!(r.method, SplitMethod::None);
    }

    #[test]
    fn unknown_characters_map_to_unk_and_proceed() {
        let vocab = Vocab::with_unk(["a", "b"].map(String::from));
        let mut config = LabelerConfig::new(CellKind::Gru, vocab);
        config.hidden_dim = 4;
        config.embed_dim = 3;
        let params = crate::neural::LabelerParams::init(&config);
        let r = neural_split(&params, &config, "aqqb", &Tokenizer::Char).unwrap();
        assert_eq!(format!("{}{}", r.left, r.right), "aqqb");
        assert_eq!(r.method, SplitMethod::Neural);
    }
}

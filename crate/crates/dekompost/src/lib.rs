//! Decompounding toolkit for German noun compounds.
//!
//! The crate provides three compound-splitter families behind one result
//! type, and a binary idiomaticity classifier over word embeddings:
//!
//! * [`corpus`] — compound-list ingestion, gold boundary derivation,
//!   frequency lexicons, deterministic dataset partitioning.
//! * [`tokenize`] — character and byte-pair-encoding tokenizers, plus
//!   projection of character boundaries onto token-level labels.
//! * [`neural`] — a self-contained sequence-labeling engine: RNN/GRU/LSTM
//!   cells, bidirectional encoding, softmax split classifier, Adam, and
//!   model serialization.
//! * [`splitters`] — frequency geometric-mean splitting with morphological
//!   transformations, n-gram positional scoring, and neural argmax decoding.
//! * [`embeddings`] — text-format word vector loading with configurable
//!   out-of-vocabulary policies.
//! * [`idiom`] — 900-dimensional compound features, logistic regression,
//!   gradient-boosted trees, and the always-idiomatic dummy baseline.
//! * [`metrics`] — split accuracy, precision/recall/F1, and error reports.

pub mod container;
pub mod corpus;
pub mod embeddings;
pub mod idiom;
pub mod mat;
pub mod metrics;
pub mod neural;
pub mod splitters;
pub mod tokenize;

pub(crate) mod chars;

//! Relative polarization of a topical wordset across two aligned
//! word-embedding spaces.
//!
//! The crate is organized around the pipeline a study runs through:
//!
//! * [`embeddings`] loads word2vec text spaces and provides the cosine kernel;
//! * [`alignment`] rotates one space onto another and tests round-trip stability;
//! * [`lexicon`] refines candidate pole lexica with stability and Zipf filters;
//! * [`association`] computes WEAT/SWEAT scores, effect sizes and permutation p-values;
//! * [`viz`] derives chart data and renders the cumulative and detail SVG charts;
//! * [`config`], [`report`] and [`commands`] back the `sweatkit` command-line tool.

pub mod alignment;
pub mod association;
pub mod commands;
pub mod config;
pub mod embeddings;
pub mod error;
pub mod lexicon;
pub mod report;
pub mod viz;

pub use association::{
    effect_size, permutation_test, run_sweat, run_weat, single_word_association, sweat_score,
    weat_score, PermutationConfig, PermutationMode, PoleWordsets, SweatResult, Tail, TopicWordset,
    WeatResult,
};
pub use embeddings::{cosine, load_word2vec_text, nearest_neighbor, EmbeddingSpace};
pub use error::{Error, ErrorClass, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

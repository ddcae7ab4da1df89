//! Single-word associations, WEAT and SWEAT scores, effect sizes, and the
//! full test procedures that bundle them with a permutation p-value.

mod permutation;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use permutation::{
    binomial, permutation_test, Method, PermutationConfig, PermutationMode, PermutationOutcome,
    Tail, TailUsed, DEFAULT_EXACT_LIMIT, DEFAULT_SAMPLES, MIN_MONTE_CARLO_SAMPLES,
};

use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};

fn check_words(what: &str, words: &[String]) -> Result<()> {
    if words.is_empty() {
        return Err(Error::InvalidWordset(format!("{what} is empty")));
    }
    let mut seen = HashSet::new();
    for w in words {
        if !seen.insert(w.as_str()) {
            return Err(Error::InvalidWordset(format!("{what} lists {w:?} twice")));
        }
    }
    Ok(())
}

/// Two attribute wordsets (poles), e.g. positive and negative sentiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPoles")]
pub struct PoleWordsets {
    label_a: String,
    words_a: Vec<String>,
    label_b: String,
    words_b: Vec<String>,
}

#[derive(Deserialize)]
struct RawPoles {
    label_a: String,
    words_a: Vec<String>,
    label_b: String,
    words_b: Vec<String>,
}

impl TryFrom<RawPoles> for PoleWordsets {
    type Error = Error;
    fn try_from(r: RawPoles) -> Result<Self> {
        PoleWordsets::new(r.label_a, r.words_a, r.label_b, r.words_b)
    }
}

impl PoleWordsets {
    pub fn new(
        label_a: impl Into<String>,
        words_a: Vec<String>,
        label_b: impl Into<String>,
        words_b: Vec<String>,
    ) -> Result<Self> {
        let label_a = label_a.into();
        let label_b = label_b.into();
        check_words(&format!("pole {label_a:?}"), &words_a)?;
        check_words(&format!("pole {label_b:?}"), &words_b)?;
        let a: HashSet<&str> = words_a.iter().map(String::as_str).collect();
        let overlap: Vec<&str> = words_b
            .iter()
            .map(String::as_str)
            .filter(|w| a.contains(w))
            .collect();
        if !overlap.is_empty() {
            return Err(Error::InvalidWordset(format!(
                "poles overlap on {}",
                overlap.join(", ")
            )));
        }
        Ok(PoleWordsets {
            label_a,
            words_a,
            label_b,
            words_b,
        })
    }

    pub fn label_a(&self) -> &str {
        &self.label_a
    }
    pub fn label_b(&self) -> &str {
        &self.label_b
    }
    pub fn words_a(&self) -> &[String] {
        &self.words_a
    }
    pub fn words_b(&self) -> &[String] {
        &self.words_b
    }

    /// The same poles with A and B exchanged.
    pub fn swapped(&self) -> Self {
        PoleWordsets {
            label_a: self.label_b.clone(),
            words_a: self.words_b.clone(),
            label_b: self.label_a.clone(),
            words_b: self.words_a.clone(),
        }
    }

    fn all_words(&self) -> impl Iterator<Item = &str> {
        self.words_a.iter().chain(&self.words_b).map(String::as_str)
    }
}

/// A labeled list of topic (target) words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTopic")]
pub struct TopicWordset {
    label: String,
    words: Vec<String>,
}

#[derive(Deserialize)]
struct RawTopic {
    label: String,
    words: Vec<String>,
}

impl TryFrom<RawTopic> for TopicWordset {
    type Error = Error;
    fn try_from(r: RawTopic) -> Result<Self> {
        TopicWordset::new(r.label, r.words)
    }
}

impl TopicWordset {
    pub fn new(label: impl Into<String>, words: Vec<String>) -> Result<Self> {
        let label = label.into();
        check_words(&format!("topic {label:?}"), &words)?;
        Ok(TopicWordset { label, words })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Verifies that `words` plus all pole words are present in every space,
/// reporting every missing word per space.
pub(crate) fn require_vocabulary<'a>(
    spaces: &[&EmbeddingSpace],
    words: impl Iterator<Item = &'a str> + Clone,
    poles: &'a PoleWordsets,
) -> Result<()> {
    let errors = spaces
        .iter()
        .filter_map(|s| s.require(words.clone().chain(poles.all_words())).err())
        .collect();
    Error::collect(errors)
}

/// Cosines of `word` to every word of pole A and of pole B, in pole order.
pub fn pole_cosines(
    word: &str,
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let to = |pole: &[String]| -> Result<Vec<f64>> {
        pole.iter().map(|p| space.cosine_words(word, p)).collect()
    };
    Ok((to(&poles.words_a)?, to(&poles.words_b)?))
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean cosine to pole A minus mean cosine to pole B.
pub fn single_word_association(
    word: &str,
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<f64> {
    require_vocabulary(&[space], std::iter::once(word), poles)?;
    let (a, b) = pole_cosines(word, space, poles)?;
    Ok(mean(&a) - mean(&b))
}

fn associations(
    words: &[String],
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| {
            let (a, b) = pole_cosines(w, space, poles)?;
            Ok(mean(&a) - mean(&b))
        })
        .collect()
}

fn check_disjoint(x: &TopicWordset, y: &TopicWordset) -> Result<()> {
    let xs: HashSet<&str> = x.words.iter().map(String::as_str).collect();
    let shared: Vec<&str> = y
        .words
        .iter()
        .map(String::as_str)
        .filter(|w| xs.contains(w))
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidWordset(format!(
            "target sets {:?} and {:?} share {}",
            x.label,
            y.label,
            shared.join(", ")
        )))
    }
}

/// WEAT score `Σ_x s(x) − Σ_y s(y)` for disjoint target sets in one space.
pub fn weat_score(
    x: &TopicWordset,
    y: &TopicWordset,
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<f64> {
    check_disjoint(x, y)?;
    weat_score_unchecked(x, y, space, poles)
}

fn weat_score_unchecked(
    x: &TopicWordset,
    y: &TopicWordset,
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<f64> {
    let words = x.words.iter().chain(&y.words).map(String::as_str);
    require_vocabulary(&[space], words, poles)?;
    let sx = associations(&x.words, space, poles)?;
    let sy = associations(&y.words, space, poles)?;
    Ok(sx.iter().sum::<f64>() - sy.iter().sum::<f64>())
}

/// SWEAT score: summed associations of the topic in `space1` minus those in
/// `space2`. Positive means the topic leans toward pole A in `space1`
/// relative to `space2`.
pub fn sweat_score(
    topic: &TopicWordset,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<f64> {
    let words = topic.words.iter().map(String::as_str);
    require_vocabulary(&[space1, space2], words, poles)?;
    let s1 = associations(&topic.words, space1, poles)?;
    let s2 = associations(&topic.words, space2, poles)?;
    Ok(s1.iter().sum::<f64>() - s2.iter().sum::<f64>())
}

/// Standardized mean difference: `(mean₁ − mean₂)` over the population
/// standard deviation of both lists pooled together.
pub fn effect_size(values1: &[f64], values2: &[f64]) -> Result<f64> {
    if values1.is_empty() || values2.is_empty() {
        return Err(Error::InvalidWordset(
            "effect size needs two nonempty groups".into(),
        ));
    }
    let first = values1[0];
    if values1.iter().chain(values2).all(|&v| v == first) {
        return Err(Error::DegenerateDistribution);
    }
    let pooled: Vec<f64> = values1.iter().chain(values2).copied().collect();
    let m = mean(&pooled);
    let var = pooled.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / pooled.len() as f64;
    let std = var.sqrt();
    if std == 0.0 || !std.is_finite() {
        return Err(Error::DegenerateDistribution);
    }
    Ok((mean(values1) - mean(values2)) / std)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordAssociation {
    pub word: String,
    /// `s(w)` in the first space.
    pub space1: f64,
    /// `s(w)` in the second space.
    pub space2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweatResult {
    pub score: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub tail: TailUsed,
    pub n_permutations: u64,
    pub method: Method,
    pub per_word: Vec<WordAssociation>,
    pub associations: [String; 2],
}

impl SweatResult {
    pub fn per_word_difference_sum(&self) -> f64 {
        self.per_word.iter().map(|w| w.space1).sum::<f64>()
            - self.per_word.iter().map(|w| w.space2).sum::<f64>()
    }
}

/// `["<first> ~ <A>", "<second> ~ <B>"]` for a non-negative score (zero
/// included), the crossed pairing otherwise.
pub fn association_labels(
    score: f64,
    first: &str,
    second: &str,
    poles: &PoleWordsets,
) -> [String; 2] {
    let (l1, l2) = if score >= 0.0 {
        (poles.label_a(), poles.label_b())
    } else {
        (poles.label_b(), poles.label_a())
    };
    [format!("{first} ~ {l1}"), format!("{second} ~ {l2}")]
}

/// Full SWEAT: per-word associations in both spaces (computed once), score,
/// effect size, permutation p-value, and sign-derived association labels.
pub fn run_sweat(
    topic: &TopicWordset,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    poles: &PoleWordsets,
    cfg: &PermutationConfig,
    tail: Tail,
) -> Result<SweatResult> {
    cfg.validate()?;
    let words = topic.words.iter().map(String::as_str);
    require_vocabulary(&[space1, space2], words, poles)?;
    let s1 = associations(&topic.words, space1, poles)?;
    let s2 = associations(&topic.words, space2, poles)?;
    let score = s1.iter().sum::<f64>() - s2.iter().sum::<f64>();
    let d = effect_size(&s1, &s2)?;
    let perm = permutation_test(&s1, &s2, cfg, tail)?;
    let per_word = topic
        .words
        .iter()
        .zip(s1.iter().zip(&s2))
        .map(|(w, (&a, &b))| WordAssociation {
            word: w.clone(),
            space1: a,
            space2: b,
        })
        .collect();
    Ok(SweatResult {
        score,
        effect_size: d,
        p_value: perm.p_value,
        tail: perm.tail,
        n_permutations: perm.n_permutations,
        method: perm.method,
        per_word,
        associations: association_labels(score, space1.label(), space2.label(), poles),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub word: String,
    pub association: f64,
}

/// WEAT counterpart of [`SweatResult`]: two target sets in one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatResult {
    pub score: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub tail: TailUsed,
    pub n_permutations: u64,
    pub method: Method,
    pub per_word_x: Vec<WordScore>,
    pub per_word_y: Vec<WordScore>,
    pub associations: [String; 2],
}

pub fn run_weat(
    x: &TopicWordset,
    y: &TopicWordset,
    space: &EmbeddingSpace,
    poles: &PoleWordsets,
    cfg: &PermutationConfig,
    tail: Tail,
) -> Result<WeatResult> {
    cfg.validate()?;
    check_disjoint(x, y)?;
    if x.words.len() != y.words.len() {
        return Err(Error::InvalidWordset(format!(
            "target sets must have equal size for the permutation test, got {} and {}",
            x.words.len(),
            y.words.len()
        )));
    }
    let words = x.words.iter().chain(&y.words).map(String::as_str);
    require_vocabulary(&[space], words, poles)?;
    let sx = associations(&x.words, space, poles)?;
    let sy = associations(&y.words, space, poles)?;
    let score = sx.iter().sum::<f64>() - sy.iter().sum::<f64>();
    let d = effect_size(&sx, &sy)?;
    let perm = permutation_test(&sx, &sy, cfg, tail)?;
    let scores = |words: &[String], vals: &[f64]| {
        words
            .iter()
            .zip(vals)
            .map(|(w, &v)| WordScore {
                word: w.clone(),
                association: v,
            })
            .collect()
    };
    Ok(WeatResult {
        score,
        effect_size: d,
        p_value: perm.p_value,
        tail: perm.tail,
        n_permutations: perm.n_permutations,
        method: perm.method,
        per_word_x: scores(&x.words, &sx),
        per_word_y: scores(&y.words, &sy),
        associations: association_labels(score, &x.label, &y.label, poles),
    })
}

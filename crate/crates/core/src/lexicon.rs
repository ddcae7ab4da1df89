//! Pole-lexicon refinement: the cross-space round-trip filter and the Zipf
//! frequency filter, plus frequency-table I/O and topic candidate ranking.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::round_trip_stable;
use crate::association::PoleWordsets;
use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};

pub const DEFAULT_ZIPF_THRESHOLD: f64 = 5.0;

/// Word counts plus the corpus size they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn new<I, W>(counts: I, total_tokens: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (W, u64)>,
        W: Into<String>,
    {
        if total_tokens == 0 {
            return Err(Error::Frequency(
                "total token count must be positive".into(),
            ));
        }
        let mut map = HashMap::new();
        for (word, count) in counts {
            let word = word.into();
            if count == 0 {
                return Err(Error::Frequency(format!("zero count for {word:?}")));
            }
            if count > total_tokens {
                return Err(Error::Frequency(format!(
                    "count {count} for {word:?} exceeds total {total_tokens}"
                )));
            }
            if map.insert(word.clone(), count).is_some() {
                return Err(Error::Frequency(format!("duplicate word {word:?}")));
            }
        }
        Ok(FrequencyTable {
            counts: map,
            total_tokens,
        })
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Zipf score, or `None` for absent words.
    pub fn zipf(&self, word: &str) -> Option<f64> {
        self.count(word)
            .map(|c| (c as f64 / self.total_tokens as f64 * 1e9).log10())
    }

    /// Entries sorted by descending count, then word.
    pub fn entries(&self) -> Vec<(&str, u64)> {
        let mut out: Vec<(&str, u64)> = self.counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        out
    }

    /// Parses `#total<TAB>n` followed by `word<TAB>count` lines.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut total = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| err(lineno, format!("expected `word<TAB>count`, got {line:?}")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| err(lineno, format!("invalid count {value:?}")))?;
            if key == "#total" {
                if total.replace(value).is_some() {
                    return Err(err(lineno, "repeated #total header".into()));
                }
            } else {
                rows.push((key.to_string(), value));
            }
        }
        let total = total.ok_or_else(|| err(1, "missing `#total<TAB><tokens>` header".into()))?;
        FrequencyTable::new(rows, total).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#total\t{}\n", self.total_tokens);
        for (w, c) in self.entries() {
            out.push_str(&format!("{w}\t{c}\n"));
        }
        out
    }
}

/// `log10` of the word's frequency per billion tokens. No smoothing: absent
/// words are an error.
pub fn zipf_score(word: &str, table: &FrequencyTable) -> Result<f64> {
    table
        .zipf(word)
        .ok_or_else(|| Error::Frequency(format!("word {word:?} not in frequency table")))
}

/// A candidate pole lexicon as read from a lexicon JSON file.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub poles: PoleWordsets,
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    label_a: String,
    label_b: String,
    words_a: Vec<String>,
    words_b: Vec<String>,
    #[serde(default)]
    provenance: String,
}

impl Lexicon {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: LexiconFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidWordset(format!("lexicon JSON: {e}")))?;
        Ok(Lexicon {
            poles: PoleWordsets::new(raw.label_a, raw.words_a, raw.label_b, raw.words_b)?,
            provenance: raw.provenance,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw = LexiconFile {
            label_a: self.poles.label_a().to_string(),
            label_b: self.poles.label_b().to_string(),
            words_a: self.poles.words_a().to_vec(),
            words_b: self.poles.words_b().to_vec(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("lexicon serializes")
    }
}

/// Why a candidate pole word was dropped. Variants are declared in the order
/// the filters run; a rejection carries the first failing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    OovSpace1,
    OovSpace2,
    OovFrequency,
    UnstableRoundtrip,
    LowZipf1,
    LowZipf2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub word: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub label_a: String,
    pub label_b: String,
    pub zipf_threshold: f64,
    pub kept_a: Vec<String>,
    pub kept_b: Vec<String>,
    pub rejected: Vec<Rejection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RefinementReport {
    /// The refined pole wordsets; fails if either pole was emptied.
    pub fn poles(&self) -> Result<PoleWordsets> {
        PoleWordsets::new(
            self.label_a.clone(),
            self.kept_a.clone(),
            self.label_b.clone(),
            self.kept_b.clone(),
        )
    }
}

fn verdict(
    word: &str,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    table1: &FrequencyTable,
    table2: &FrequencyTable,
    zipf_threshold: f64,
) -> Result<Option<RejectReason>> {
    if !space1.contains(word) {
        return Ok(Some(RejectReason::OovSpace1));
    }
    if !space2.contains(word) {
        return Ok(Some(RejectReason::OovSpace2));
    }
    let (Some(z1), Some(z2)) = (table1.zipf(word), table2.zipf(word)) else {
        return Ok(Some(RejectReason::OovFrequency));
    };
    if !round_trip_stable(word, space1, space2)? {
        return Ok(Some(RejectReason::UnstableRoundtrip));
    }
    if z1 <= zipf_threshold {
        return Ok(Some(RejectReason::LowZipf1));
    }
    if z2 <= zipf_threshold {
        return Ok(Some(RejectReason::LowZipf2));
    }
    Ok(None)
}

/// Keeps a candidate pole word iff it is in both vocabularies and both
/// frequency tables, maps back to itself across the aligned spaces in both
/// directions, and has a Zipf score strictly above `zipf_threshold` in both
/// tables. Input order is preserved in every output list.
pub fn refine(
    lexicon: &Lexicon,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    table1: &FrequencyTable,
    table2: &FrequencyTable,
    zipf_threshold: f64,
) -> Result<RefinementReport> {
    let poles = &lexicon.poles;
    let candidates: Vec<(bool, &String)> = poles
        .words_a()
        .iter()
        .map(|w| (true, w))
        .chain(poles.words_b().iter().map(|w| (false, w)))
        .collect();

    let verdicts: Vec<Option<RejectReason>> = candidates
        .par_iter()
        .map(|(_, w)| verdict(w, space1, space2, table1, table2, zipf_threshold))
        .collect::<Result<_>>()?;

    let mut report = RefinementReport {
        label_a: poles.label_a().to_string(),
        label_b: poles.label_b().to_string(),
        zipf_threshold,
        kept_a: Vec::new(),
        kept_b: Vec::new(),
        rejected: Vec::new(),
        warnings: Vec::new(),
    };
    for ((is_a, word), v) in candidates.into_iter().zip(verdicts) {
        match v {
            None if is_a => report.kept_a.push(word.clone()),
            None => report.kept_b.push(word.clone()),
            Some(reason) => report.rejected.push(Rejection {
                word: word.clone(),
                reason,
            }),
        }
    }
    for (kept, label) in [
        (&report.kept_a, poles.label_a()),
        (&report.kept_b, poles.label_b()),
    ] {
        if kept.is_empty() {
            let msg = format!("refinement removed every word of pole {label:?}");
            log::warn!("{msg}");
            report.warnings.push(msg);
        }
    }
    Ok(report)
}

/// Small English stopword list used by [`topic_candidates`] when the caller
/// supplies none.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "even",
    "ever",
    "few",
    "for",
    "from",
    "further",
    "get",
    "got",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "let",
    "like",
    "may",
    "me",
    "might",
    "more",
    "most",
    "much",
    "must",
    "my",
    "myself",
    "never",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "really",
    "same",
    "shall",
    "she",
    "should",
    "so",
    "some",
    "still",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "us",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCandidate {
    pub word: String,
    pub mean_zipf: f64,
}

/// Words shared by both spaces and both tables, minus stopwords, ranked by
/// mean Zipf score across the two tables (ties by word), truncated to `limit`.
pub fn topic_candidates(
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    table1: &FrequencyTable,
    table2: &FrequencyTable,
    stopwords: &HashSet<String>,
    limit: usize,
) -> Vec<TopicCandidate> {
    let mut out: Vec<TopicCandidate> = space1
        .words()
        .iter()
        .filter(|w| space2.contains(w) && !stopwords.contains(*w))
        .filter_map(|w| {
            let (z1, z2) = (table1.zipf(w)?, table2.zipf(w)?);
            Some(TopicCandidate {
                word: w.clone(),
                mean_zipf: (z1 + z2) / 2.0,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean_zipf
            .total_cmp(&a.mean_zipf)
            .then_with(|| a.word.cmp(&b.word))
    });
    out.truncate(limit);
    out
}

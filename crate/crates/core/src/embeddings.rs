//! Word-embedding spaces: loading, validation, lookup, and the cosine kernel.
//!
//! Vectors are kept as `f64` rows in one contiguous buffer regardless of the
//! precision of the source file. Each row's L2 norm is cached at construction
//! so cosine evaluations and vocabulary scans only need a dot product.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Overshoot beyond `[-1, 1]` that `cosine` silently clamps.
pub const COSINE_CLAMP_TOLERANCE: f64 = 1e-9;

/// An immutable, labeled map from words to fixed-dimension real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    label: String,
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl EmbeddingSpace {
    /// Builds a space from `(word, vector)` rows, enforcing every invariant:
    /// equal dimensions, finite components, nonzero norms and unique words.
    pub fn new<I, W>(label: impl Into<String>, dimension: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (W, Vec<f64>)>,
        W: Into<String>,
    {
        let mut builder = SpaceBuilder::new(label, dimension)?;
        for (word, vector) in rows {
            builder.push(word.into(), &vector)?;
        }
        Ok(builder.finish())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Vocabulary in file (insertion) order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    /// Like [`vector`](Self::vector) but absent words are an error naming the space.
    pub fn get(&self, word: &str) -> Result<&[f64]> {
        self.vector(word).ok_or_else(|| Error::MissingWords {
            space: self.label.clone(),
            words: vec![word.to_string()],
        })
    }

    pub fn norm(&self, word: &str) -> Option<f64> {
        self.index.get(word).map(|&i| self.norms[i])
    }

    /// Checks that every word is in the vocabulary, reporting all absent ones at once.
    pub fn require<'a, I>(&self, words: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let missing: Vec<String> = words
            .into_iter()
            .filter(|w| !self.contains(w))
            .map(str::to_string)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingWords {
                space: self.label.clone(),
                words: missing,
            })
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), self.row(i)))
    }

    /// A copy of this space under a different display label.
    pub fn relabeled(&self, label: impl Into<String>) -> Self {
        EmbeddingSpace {
            label: label.into(),
            ..self.clone()
        }
    }

    /// Applies `f` to every vector, producing a new validated space.
    pub fn map_vectors<F>(&self, label: impl Into<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut builder = SpaceBuilder::new(label, self.dimension)?;
        for (word, row) in self.iter() {
            builder.push(word.to_string(), &f(row))?;
        }
        Ok(builder.finish())
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }
}

struct SpaceBuilder {
    label: String,
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl SpaceBuilder {
    fn new(label: impl Into<String>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        Ok(SpaceBuilder {
            label: label.into(),
            dimension,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
        })
    }

    fn with_capacity(mut self, rows: usize) -> Self {
        self.words.reserve(rows);
        self.index.reserve(rows);
        self.data.reserve(rows.saturating_mul(self.dimension));
        self.norms.reserve(rows);
        self
    }

    fn push(&mut self, word: String, vector: &[f64]) -> Result<()> {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::InvalidWord { word });
        }
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { word });
        }
        let norm = l2_norm(vector);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm { word });
        }
        if self.index.contains_key(&word) {
            return Err(Error::DuplicateWord { word });
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        self.norms.push(norm);
        Ok(())
    }

    fn finish(self) -> EmbeddingSpace {
        EmbeddingSpace {
            label: self.label,
            dimension: self.dimension,
            words: self.words,
            index: self.index,
            data: self.data,
            norms: self.norms,
        }
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`.
///
/// Floating-point overshoot up to [`COSINE_CLAMP_TOLERANCE`] past ±1 is
/// clamped; anything larger is reported as an error.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm {
            word: "<query>".to_string(),
        });
    }
    clamp_cosine(dot(u, v) / (nu * nv))
}

fn clamp_cosine(c: f64) -> Result<f64> {
    if !c.is_finite() || c.abs() > 1.0 + COSINE_CLAMP_TOLERANCE {
        return Err(Error::CosineOutOfRange(c));
    }
    Ok(c.clamp(-1.0, 1.0))
}

impl EmbeddingSpace {
    /// Cosine between two in-vocabulary words, using the cached norms.
    pub fn cosine_words(&self, a: &str, b: &str) -> Result<f64> {
        let ia = *self.index.get(a).ok_or_else(|| self.missing(a))?;
        let ib = *self.index.get(b).ok_or_else(|| self.missing(b))?;
        clamp_cosine(dot(self.row(ia), self.row(ib)) / (self.norms[ia] * self.norms[ib]))
    }

    /// Cosine between an arbitrary query vector and an in-vocabulary word.
    pub fn cosine_to(&self, query: &[f64], word: &str) -> Result<f64> {
        let i = *self.index.get(word).ok_or_else(|| self.missing(word))?;
        if query.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: query.len(),
            });
        }
        let nq = l2_norm(query);
        if nq == 0.0 {
            return Err(Error::ZeroNorm {
                word: "<query>".to_string(),
            });
        }
        clamp_cosine(dot(query, self.row(i)) / (nq * self.norms[i]))
    }

    fn missing(&self, word: &str) -> Error {
        Error::MissingWords {
            space: self.label.clone(),
            words: vec![word.to_string()],
        }
    }
}

/// Exact vocabulary scan for the word with the highest cosine to `query`.
/// Ties go to the lexicographically smallest word.
pub fn nearest_neighbor<'a>(space: &'a EmbeddingSpace, query: &[f64]) -> Result<&'a str> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    if query.len() != space.dimension {
        return Err(Error::DimensionMismatch {
            expected: space.dimension,
            actual: query.len(),
        });
    }
    let nq = l2_norm(query);
    if nq == 0.0 || !nq.is_finite() {
        return Err(Error::ZeroNorm {
            word: "<query>".to_string(),
        });
    }
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..space.len() {
        let score = dot(query, space.row(i)) / space.norms[i];
        if score > best_score || (score == best_score && space.words[i] < space.words[best]) {
            best = i;
            best_score = score;
        }
    }
    Ok(&space.words[best])
}

/// Loads a word2vec text file: a `<vocab_size> <dimension>` header followed by
/// one `<word> <c1> ... <cn>` row per word.
pub fn load_word2vec_text(
    path: impl AsRef<Path>,
    label: impl Into<String>,
) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec_text(BufReader::new(file), label, path)
}

/// Reader form of [`load_word2vec_text`]; `origin` only labels error messages.
pub fn read_word2vec_text<R: BufRead>(
    reader: R,
    label: impl Into<String>,
    origin: &Path,
) -> Result<EmbeddingSpace> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut lines = reader.lines().enumerate();
    let (declared, dimension) =
        loop {
            match lines.next() {
                None => return Err(parse_err(1, "missing header line".into())),
                Some((i, line)) => {
                    let line = line.map_err(|e| Error::io(origin, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let mut parts = line.split_ascii_whitespace();
                    let vocab = parts.next().and_then(|s| s.parse::<usize>().ok());
                    let dim = parts.next().and_then(|s| s.parse::<usize>().ok());
                    match (vocab, dim, parts.next()) {
                        (Some(v), Some(d), None) if d > 0 => break (v, d),
                        _ => return Err(parse_err(
                            i + 1,
                            format!(
                                "malformed header {line:?}, expected `<vocab_size> <dimension>`"
                            ),
                        )),
                    }
                }
            }
        };

    let mut builder = SpaceBuilder::new(label, dimension)?.with_capacity(declared.min(1 << 22));
    let mut vector = Vec::with_capacity(dimension);
    let mut found = 0usize;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let word = parts.next().unwrap_or_default().to_string();
        vector.clear();
        for tok in parts {
            let x: f64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("unparsable component {tok:?}")))?;
            vector.push(x);
        }
        builder.push(word, &vector).map_err(|e| match e {
            Error::DimensionMismatch { expected, actual } => parse_err(
                lineno,
                format!("dimension mismatch: expected {expected} components, got {actual}"),
            ),
            other => parse_err(lineno, other.to_string()),
        })?;
        found += 1;
    }
    if found != declared {
        return Err(Error::RowCountMismatch { declared, found });
    }
    Ok(builder.finish())
}

/// Writes a space in word2vec text format. Components use Rust's shortest
/// round-trip float representation, so a reload is bit-identical.
pub fn write_word2vec_text<W: Write>(space: &EmbeddingSpace, writer: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", space.len(), space.dimension())?;
    for (word, row) in space.iter() {
        w.write_all(word.as_bytes())?;
        for x in row {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_word2vec_text(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_word2vec_text(space, file).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<EmbeddingSpace> {
        read_word2vec_text(text.as_bytes(), "T", Path::new("mem"))
    }

    fn toy(rows: &[(&str, &[f64])]) -> EmbeddingSpace {
        EmbeddingSpace::new(
            "toy",
            rows[0].1.len(),
            rows.iter().map(|(w, v)| (*w, v.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn loads_small_file() {
        let space = parse("2 3\ncat 1 0 0\ndog 0 1 0\n").unwrap();
        assert_eq!(space.dimension(), 3);
        assert_eq!(space.words(), ["cat", "dog"]);
        assert_eq!(space.vector("dog").unwrap(), [0.0, 1.0, 0.0]);
        assert!(space.vector("bird").is_none());
    }

    #[test]
    fn tolerates_trailing_space_and_crlf() {
        let space = parse("1 2\r\nx 0.5 -1.5 \r\n").unwrap();
        assert_eq!(space.vector("x").unwrap(), [0.5, -1.5]);
    }

    #[test]
    fn row_count_mismatch() {
        let err = parse("3 3\ncat 1 0 0\ndog 0 1 0\n").unwrap_err();
        assert!(err.to_string().contains("row count mismatch"), "{err}");
    }

    #[test]
    fn zero_norm_rejected_with_line() {
        let err = parse("2 3\ncat 1 0 0\nbad 0 0 0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("zero-norm vector"), "{msg}");
        assert!(msg.contains("mem:3"), "{msg}");
    }

    #[test]
    fn dimension_mismatch_and_duplicates() {
        let err = parse("2 3\ncat 1 0 0\ndog 0 1\n").unwrap_err();
        assert!(
            err.to_string().contains("mem:3: dimension mismatch"),
            "{err}"
        );
        let err = parse("2 2\ncat 1 0\ncat 0 1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate word"), "{err}");
        let err = parse("1 2\ncat 1 NaN\n").unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
        let err = parse("1 2\ncat 1 x\n").unwrap_err();
        assert!(err.to_string().contains("unparsable"), "{err}");
        assert!(parse("").is_err());
        assert!(parse("2\n").is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_word2vec_text("/definitely/not/here.vec", "x").unwrap_err();
        assert_eq!(err.class(), crate::error::ErrorClass::Io);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-15);
        let u = [0.3, -2.0, 7.5];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(cosine(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nearest_neighbor_examples() {
        let space = toy(&[("x", &[1.0, 0.0]), ("y", &[0.0, 1.0])]);
        assert_eq!(nearest_neighbor(&space, &[0.9, 0.1]).unwrap(), "x");
        assert_eq!(nearest_neighbor(&space, &[0.0, 3.0]).unwrap(), "y");

        let tied = toy(&[("b", &[1.0, 0.0]), ("a", &[1.0, 0.0])]);
        assert_eq!(nearest_neighbor(&tied, &[1.0, 0.0]).unwrap(), "a");

        let cat = parse("3 2\ndog 0 1\ncat 0.6 0.8\nfish -1 0\n").unwrap();
        let q = cat.vector("cat").unwrap().to_vec();
        assert_eq!(nearest_neighbor(&cat, &q).unwrap(), "cat");

        assert!(nearest_neighbor(&space, &[1.0]).is_err());
        let empty = EmbeddingSpace::new("e", 2, Vec::<(String, Vec<f64>)>::new()).unwrap();
        assert!(matches!(
            nearest_neighbor(&empty, &[1.0, 0.0]),
            Err(Error::EmptySpace)
        ));
    }

    #[test]
    fn require_lists_every_missing_word() {
        let space = toy(&[("x", &[1.0, 0.0])]);
        match space.require(["x", "p", "q"]) {
            Err(Error::MissingWords { space, words }) => {
                assert_eq!(space, "toy");
                assert_eq!(words, ["p", "q"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, dim).prop_filter("nonzero", |v| l2_norm(v) > 1e-3)
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            u in vec_strategy(5), v in vec_strategy(5), alpha in 1e-3f64..1e3
        ) {
            let c = cosine(&u, &v).unwrap();
            prop_assert!((c - cosine(&v, &u).unwrap()).abs() <= 1e-12);
            let scaled: Vec<f64> = u.iter().map(|x| x * alpha).collect();
            prop_assert!((c - cosine(&scaled, &v).unwrap()).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&c));
        }

        #[test]
        fn write_then_load_round_trips(rows in prop::collection::vec(vec_strategy(4), 1..20)) {
            let space = EmbeddingSpace::new(
                "rt",
                4,
                rows.iter().enumerate().map(|(i, v)| (format!("w{i}"), v.clone())),
            ).unwrap();
            let mut buf = Vec::new();
            write_word2vec_text(&space, &mut buf).unwrap();
            let back = read_word2vec_text(buf.as_slice(), "rt", Path::new("mem")).unwrap();
            prop_assert_eq!(back, space);
        }

        #[test]
        fn nine_digit_text_round_trips(rows in prop::collection::vec(vec_strategy(3), 1..10)) {
            let mut text = format!("{} 3\n", rows.len());
            for (i, v) in rows.iter().enumerate() {
                text.push_str(&format!("w{i}"));
                for x in v {
                    text.push_str(&format!(" {x:.8e}"));
                }
                text.push('\n');
            }
            let first = parse(&text).unwrap();
            let mut buf = Vec::new();
            write_word2vec_text(&first, &mut buf).unwrap();
            let second = read_word2vec_text(buf.as_slice(), "T", Path::new("mem")).unwrap();
            for (w, v) in first.iter() {
                let again = second.vector(w).unwrap();
                prop_assert!(v.iter().zip(again).all(|(a, b)| a.to_bits() == b.to_bits()));
            }
        }

        #[test]
        fn self_is_nearest_neighbor(rows in prop::collection::vec(vec_strategy(3), 1..30)) {
            let space = EmbeddingSpace::new(
                "nn",
                3,
                rows.iter().enumerate().map(|(i, v)| (format!("w{i:02}"), v.clone())),
            ).unwrap();
            for (w, v) in space.iter() {
                let dup_smaller = space.iter().any(|(o, ov)| o < w && ov == v);
                if !dup_smaller {
                    prop_assert_eq!(nearest_neighbor(&space, v).unwrap(), w);
                }
            }
        }
    }
}

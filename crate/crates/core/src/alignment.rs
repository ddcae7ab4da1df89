//! Orthogonal Procrustes alignment of two independently trained spaces and
//! the cross-space round-trip stability test.

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{nearest_neighbor, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::lexicon::FrequencyTable;

const SVD_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    /// Mean-center anchors in both spaces before solving; the offsets are
    /// folded back into the returned mapping as a translation.
    pub center: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions { center: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub source_label: String,
    pub target_label: String,
    /// Row-major `dimension × dimension` orthogonal matrix; source rows are
    /// mapped as `x · rotation + translation`.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub anchors_used: Vec<String>,
    /// Mean squared distance between mapped anchors and their targets.
    pub residual: f64,
    pub centered: bool,
    /// Fewer anchors than dimensions: the rotation is not uniquely determined.
    pub underdetermined: bool,
}

impl AlignmentReport {
    /// `max |RᵀR − I|` over all entries.
    pub fn orthogonality_error(&self) -> f64 {
        let r = to_matrix(&self.rotation);
        let gram = r.transpose() * &r;
        let identity = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
        (gram - identity).amax()
    }

    /// The subset of this report that goes into run reports.
    pub fn summary(&self) -> AlignmentSummary {
        AlignmentSummary {
            source_label: self.source_label.clone(),
            target_label: self.target_label.clone(),
            anchor_count: self.anchors_used.len(),
            residual: self.residual,
            centered: self.centered,
            underdetermined: self.underdetermined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub source_label: String,
    pub target_label: String,
    pub anchor_count: usize,
    pub residual: f64,
    pub centered: bool,
    pub underdetermined: bool,
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

fn gather(space: &EmbeddingSpace, words: &[String]) -> Result<DMatrix<f64>> {
    let d = space.dimension();
    let mut flat = Vec::with_capacity(words.len() * d);
    for w in words {
        flat.extend_from_slice(space.get(w)?);
    }
    Ok(DMatrix::from_row_slice(words.len(), d, &flat))
}

/// Aligns `source` onto `target` with the orthogonal map minimizing the summed
/// squared anchor distances, solved through the SVD of the anchor
/// cross-covariance. Returns the mapped copy of `source` (same label) and a
/// report with the rotation and residual.
pub fn procrustes_align(
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    anchors: &[String],
    options: AlignOptions,
) -> Result<(EmbeddingSpace, AlignmentReport)> {
    let d = source.dimension();
    if target.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: target.dimension(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    let anchors: Vec<String> = anchors
        .iter()
        .filter(|w| seen.insert(w.as_str()))
        .cloned()
        .collect();
    if anchors.is_empty() {
        return Err(Error::NoAnchors {
            source_label: source.label().to_string(),
            target_label: target.label().to_string(),
        });
    }
    source.require(anchors.iter().map(String::as_str))?;
    target.require(anchors.iter().map(String::as_str))?;

    let xs = gather(source, &anchors)?;
    let ys = gather(target, &anchors)?;
    let n = anchors.len();

    let (mu_s, mu_t) = if options.center {
        (xs.row_mean(), ys.row_mean())
    } else {
        (
            nalgebra::RowDVector::zeros(d),
            nalgebra::RowDVector::zeros(d),
        )
    };
    let mut xc = xs.clone();
    let mut yc = ys.clone();
    for mut row in xc.row_iter_mut() {
        row -= &mu_s;
    }
    for mut row in yc.row_iter_mut() {
        row -= &mu_t;
    }

    let cross = xc.transpose() * &yc;
    let svd = cross
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdFailed)?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SvdFailed),
    };
    let rotation = u * v_t;
    let translation = &mu_t - &mu_s * &rotation;

    let mut mapped_anchors = &xs * &rotation;
    for mut row in mapped_anchors.row_iter_mut() {
        row += &translation;
    }
    let residual = (mapped_anchors - &ys).norm_squared() / n as f64;

    let underdetermined = n < d;
    if underdetermined {
        warn!(
            "aligning {} onto {} with {n} anchors in dimension {d}: rotation is underdetermined",
            source.label(),
            target.label()
        );
    }

    let aligned = apply_map(source, &rotation, translation.as_slice())?;

    let report = AlignmentReport {
        source_label: source.label().to_string(),
        target_label: target.label().to_string(),
        rotation: rotation
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        translation: translation.iter().copied().collect(),
        anchors_used: anchors,
        residual,
        centered: options.center,
        underdetermined,
    };
    Ok((aligned, report))
}

/// Maps every row as `x · rotation + translation`, rows in parallel.
fn apply_map(
    source: &EmbeddingSpace,
    rotation: &DMatrix<f64>,
    translation: &[f64],
) -> Result<EmbeddingSpace> {
    let d = source.dimension();
    let flat: Vec<f64> = rotation.transpose().as_slice().to_vec();
    let rows: Vec<Vec<f64>> = source
        .words()
        .par_iter()
        .map(|w| {
            let x = source.vector(w).expect("own vocabulary");
            let mut out = translation.to_vec();
            for (xi, r) in x.iter().zip(flat.chunks_exact(d)) {
                for (o, rij) in out.iter_mut().zip(r) {
                    *o += xi * rij;
                }
            }
            out
        })
        .collect();
    EmbeddingSpace::new(source.label(), d, source.words().iter().cloned().zip(rows))
}

/// Shared vocabulary of the two spaces, in `a`'s order.
pub fn shared_vocabulary(a: &EmbeddingSpace, b: &EmbeddingSpace) -> Vec<String> {
    a.words()
        .iter()
        .filter(|w| b.contains(w))
        .cloned()
        .collect()
}

/// Default anchor set: shared words whose Zipf score exceeds `zipf_threshold`
/// in both tables when tables are given, otherwise the whole shared vocabulary.
pub fn default_anchors(
    a: &EmbeddingSpace,
    b: &EmbeddingSpace,
    tables: Option<(&FrequencyTable, &FrequencyTable)>,
    zipf_threshold: f64,
) -> Vec<String> {
    let shared = shared_vocabulary(a, b);
    match tables {
        None => shared,
        Some((ta, tb)) => shared
            .into_iter()
            .filter(|w| {
                matches!(
                    (ta.zipf(w), tb.zipf(w)),
                    (Some(za), Some(zb)) if za > zipf_threshold && zb > zipf_threshold
                )
            })
            .collect(),
    }
}

/// True iff `word`'s vector in either space has `word` itself as nearest
/// neighbor in the other space. The spaces must already share coordinates.
pub fn round_trip_stable(
    word: &str,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
) -> Result<bool> {
    let (v1, v2) = match (space1.vector(word), space2.vector(word)) {
        (Some(v1), Some(v2)) => (v1, v2),
        (None, _) => return Err(missing(space1, word)),
        (_, None) => return Err(missing(space2, word)),
    };
    Ok(nearest_neighbor(space2, v1)? == word && nearest_neighbor(space1, v2)? == word)
}

fn missing(space: &EmbeddingSpace, word: &str) -> Error {
    Error::MissingWords {
        space: space.label().to_string(),
        words: vec![word.to_string()],
    }
}

//! Chart data for the cumulative polarization bars and the per-word
//! association-distribution boxplots, and their SVG renderers.

mod svg;

use serde::{Deserialize, Serialize};

pub use svg::{cumulative_svg, detail_svg, render_cumulative, render_detail, SvgStyle};

use crate::association::{mean, pole_cosines, require_vocabulary, PoleWordsets, TopicWordset};
use crate::embeddings::EmbeddingSpace;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    A,
    B,
}

/// One horizontal stacked bar: the summed mean associations of the topic to
/// each pole in one space, and their difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeBar {
    pub label: String,
    pub beta_a: f64,
    pub beta_b: f64,
    /// `Σ_w s(w)` in this space, equal to `beta_a − beta_b` up to rounding.
    pub cumulate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativePlotData {
    pub topic_label: String,
    pub label_a: String,
    pub label_b: String,
    /// Drawn top to bottom.
    pub bars: Vec<CumulativeBar>,
}

impl CumulativePlotData {
    /// Difference between the first and second cumulate dots: the SWEAT score.
    pub fn score(&self) -> f64 {
        self.bars[0].cumulate - self.bars[1].cumulate
    }
}

/// Distributions of one topic word's cosines to each pole in one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDistribution {
    pub delta_a: Vec<f64>,
    pub delta_b: Vec<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub dominant_pole: Pole,
}

impl WordDistribution {
    fn new(delta_a: Vec<f64>, delta_b: Vec<f64>) -> Self {
        let mean_a = mean(&delta_a);
        let mean_b = mean(&delta_b);
        WordDistribution {
            dominant_pole: if mean_a >= mean_b { Pole::A } else { Pole::B },
            delta_a,
            delta_b,
            mean_a,
            mean_b,
        }
    }

    /// `mean_a − mean_b`, the word's association value.
    pub fn association(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub word: String,
    /// One entry per space, in the same order as `space_labels`.
    pub spaces: Vec<WordDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailPlotData {
    pub topic_label: String,
    pub label_a: String,
    pub label_b: String,
    pub space_labels: Vec<String>,
    pub rows: Vec<DetailRow>,
}

/// Both chart payloads; this is what `--plot-json` writes and what reports embed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub cumulative: CumulativePlotData,
    pub detail: DetailPlotData,
}

/// Per-word pole distributions in both spaces.
pub fn detail_data(
    topic: &TopicWordset,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<DetailPlotData> {
    let words = topic.words().iter().map(String::as_str);
    require_vocabulary(&[space1, space2], words, poles)?;
    let rows = topic
        .words()
        .iter()
        .map(|w| {
            let spaces = [space1, space2]
                .iter()
                .map(|s| {
                    let (a, b) = pole_cosines(w, s, poles)?;
                    Ok(WordDistribution::new(a, b))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DetailRow {
                word: w.clone(),
                spaces,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetailPlotData {
        topic_label: topic.label().to_string(),
        label_a: poles.label_a().to_string(),
        label_b: poles.label_b().to_string(),
        space_labels: vec![space1.label().to_string(), space2.label().to_string()],
        rows,
    })
}

impl DetailPlotData {
    /// Collapses the per-word distributions into the stacked-bar totals.
    pub fn cumulative(&self) -> CumulativePlotData {
        let bars = self
            .space_labels
            .iter()
            .enumerate()
            .map(|(k, label)| {
                let dists = || self.rows.iter().map(move |r| &r.spaces[k]);
                CumulativeBar {
                    label: label.clone(),
                    beta_a: dists().map(|d| d.mean_a).sum(),
                    beta_b: dists().map(|d| d.mean_b).sum(),
                    cumulate: dists().map(WordDistribution::association).sum(),
                }
            })
            .collect();
        CumulativePlotData {
            topic_label: self.topic_label.clone(),
            label_a: self.label_a.clone(),
            label_b: self.label_b.clone(),
            bars,
        }
    }
}

pub fn cumulative_data(
    topic: &TopicWordset,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<CumulativePlotData> {
    Ok(detail_data(topic, space1, space2, poles)?.cumulative())
}

pub fn plot_data(
    topic: &TopicWordset,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    poles: &PoleWordsets,
) -> Result<PlotData> {
    let detail = detail_data(topic, space1, space2, poles)?;
    Ok(PlotData {
        cumulative: detail.cumulative(),
        detail,
    })
}

/// Five-number summary drawn by the detail chart; the belt is the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        BoxStats {
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            mean: mean(values),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::single_word_association;

    fn toy() -> (EmbeddingSpace, EmbeddingSpace, PoleWordsets, TopicWordset) {
        let rows = |w: [f64; 2]| {
            vec![
                ("w", w.to_vec()),
                ("a", vec![1.0, 0.0]),
                ("b", vec![0.0, 1.0]),
            ]
        };
        (
            EmbeddingSpace::new("E1", 2, rows([1.0, 0.0])).unwrap(),
            EmbeddingSpace::new("E2", 2, rows([0.0, 1.0])).unwrap(),
            PoleWordsets::new("A", vec!["a".into()], "B", vec!["b".into()]).unwrap(),
            TopicWordset::new("T", vec!["w".into()]).unwrap(),
        )
    }

    #[test]
    fn cumulative_toy() {
        let (e1, e2, p, t) = toy();
        let c = cumulative_data(&t, &e1, &e2, &p).unwrap();
        let got: Vec<(f64, f64, f64)> = c
            .bars
            .iter()
            .map(|b| (b.beta_a, b.beta_b, b.cumulate))
            .collect();
        assert_eq!(got, [(1.0, 0.0, 1.0), (0.0, 1.0, -1.0)]);
        assert_eq!(
            c.score(),
            crate::association::sweat_score(&t, &e1, &e2, &p).unwrap()
        );

        let same = cumulative_data(&t, &e1, &e1.relabeled("E1b"), &p).unwrap();
        assert_eq!(same.bars[0].cumulate, same.bars[1].cumulate);
    }

    #[test]
    fn detail_toy() {
        let (e1, e2, p, t) = toy();
        let d = detail_data(&t, &e1, &e2, &p).unwrap();
        let row = &d.rows[0];
        assert_eq!(row.spaces[0].dominant_pole, Pole::A);
        assert_eq!(row.spaces[1].dominant_pole, Pole::B);
        assert_eq!(row.spaces[0].delta_a, [1.0]);
        assert_eq!(row.spaces[0].mean_a, 1.0);
        for (k, s) in [&e1, &e2].iter().enumerate() {
            assert_eq!(
                row.spaces[k].association(),
                single_word_association("w", s, &p).unwrap()
            );
        }
    }

    #[test]
    fn ties_go_to_a() {
        let d = WordDistribution::new(vec![0.2], vec![0.2]);
        assert_eq!(d.dominant_pole, Pole::A);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.25), 1.75);
        assert_eq!(quantile(&s, 0.75), 3.25);
        assert_eq!(quantile(&[5.0], 0.25), 5.0);
        let b = BoxStats::new(&[3.0, 1.0, 2.0]);
        assert_eq!(
            (b.min, b.q1, b.mean, b.q3, b.max),
            (1.0, 1.5, 2.0, 2.5, 3.0)
        );
    }

    #[test]
    fn plot_json_round_trips() {
        let (e1, e2, p, t) = toy();
        let data = plot_data(&t, &e1, &e2, &p).unwrap();
        let text = serde_json::to_string(&data).unwrap();
        let back: PlotData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, data);
    }
}

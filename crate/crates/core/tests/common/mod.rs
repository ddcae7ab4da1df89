#![allow(dead_code)]

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sweatkit::embeddings::write_word2vec_text;
use sweatkit::{EmbeddingSpace, PoleWordsets, TopicWordset};

pub fn words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:02}")).collect()
}

/// Unit vector near basis axis `axis`: Gaussian jitter of scale `sigma`, renormalized.
pub fn near_axis(rng: &mut ChaCha8Rng, dim: usize, axis: usize, sigma: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut v: Vec<f64> = (0..dim).map(|_| noise.sample(rng)).collect();
    v[axis] += 1.0;
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Two spaces sharing stable poles (A near e1, B near e2). The polarized
/// topic sits near e1 in the first space and near e2 in the second; the
/// control topic is placed identically near e3 in both.
pub struct PolarizedFixture {
    pub space1: EmbeddingSpace,
    pub space2: EmbeddingSpace,
    pub poles: PoleWordsets,
    pub topic: TopicWordset,
    pub control: TopicWordset,
}

pub fn polarized_fixture(seed: u64) -> PolarizedFixture {
    let dim = 10;
    let sigma = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pole_a = words("pos", 8);
    let pole_b = words("neg", 8);
    let topic = words("topic", 12);
    let control = words("ctrl", 12);

    let mut shared = Vec::new();
    for w in &pole_a {
        shared.push((w.clone(), near_axis(&mut rng, dim, 0, sigma)));
    }
    for w in &pole_b {
        shared.push((w.clone(), near_axis(&mut rng, dim, 1, sigma)));
    }
    for w in &control {
        shared.push((w.clone(), near_axis(&mut rng, dim, 2, sigma)));
    }
    let mut rows1 = shared.clone();
    let mut rows2 = shared;
    for w in &topic {
        rows1.push((w.clone(), near_axis(&mut rng, dim, 0, sigma)));
        rows2.push((w.clone(), near_axis(&mut rng, dim, 1, sigma)));
    }
    PolarizedFixture {
        space1: EmbeddingSpace::new("S1", dim, rows1).unwrap(),
        space2: EmbeddingSpace::new("S2", dim, rows2).unwrap(),
        poles: PoleWordsets::new("positive", pole_a, "negative", pole_b).unwrap(),
        topic: TopicWordset::new("polarized", topic).unwrap(),
        control: TopicWordset::new("control", control).unwrap(),
    }
}

/// Independent random spaces over one vocabulary of `n_topic` topic words
/// and `n_pole` words per pole.
pub fn random_fixture(
    seed: u64,
    dim: usize,
    n_topic: usize,
    n_pole: usize,
) -> (EmbeddingSpace, EmbeddingSpace, PoleWordsets, TopicWordset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topic = words("t", n_topic);
    let a = words("a", n_pole);
    let b = words("b", n_pole);
    let vocab: Vec<String> = topic.iter().chain(&a).chain(&b).cloned().collect();
    let mut make = |label: &str| {
        EmbeddingSpace::new(
            label,
            dim,
            vocab.iter().map(|w| {
                (
                    w.clone(),
                    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            }),
        )
        .unwrap()
    };
    let s1 = make("E1");
    let s2 = make("E2");
    (
        s1,
        s2,
        PoleWordsets::new("A", a, "B", b).unwrap(),
        TopicWordset::new("T", topic).unwrap(),
    )
}

pub fn write_space(space: &EmbeddingSpace, path: &Path) {
    let file = fs::File::create(path).unwrap();
    write_word2vec_text(space, file).unwrap();
}

/// Frequency table giving every word of `space` the same count, chosen so
/// its Zipf score is `zipf` against a 10⁹-token corpus.
pub fn write_flat_frequencies(space: &EmbeddingSpace, zipf: f64, path: &Path) {
    let count = 10f64.powf(zipf).round() as u64;
    let mut text = "#total\t1000000000\n".to_string();
    for w in space.words() {
        text.push_str(&format!("{w}\t{count}\n"));
    }
    fs::write(path, text).unwrap();
}

/// Writes a complete `sweat` configuration for the polarized fixture into `dir`.
pub fn write_polarized_config(dir: &Path, seed: u64) -> std::path::PathBuf {
    let fx = polarized_fixture(seed);
    write_space(&fx.space1, &dir.join("s1.vec"));
    write_space(&fx.space2, &dir.join("s2.vec"));
    let config = serde_json::json!({
        "embeddings": [
            {"label": "S1", "path": "s1.vec"},
            {"label": "S2", "path": "s2.vec"}
        ],
        "topic": {"label": "polarized", "words": fx.topic.words()},
        "poles": {
            "label_a": "positive", "words_a": fx.poles.words_a(),
            "label_b": "negative", "words_b": fx.poles.words_b()
        },
        "permutations": {"mode": "montecarlo", "samples": 10000, "seed": 7},
        "outputs": {
            "report": "report.json",
            "cumulative_svg": "cumulative.svg",
            "detail_svg": "detail.svg",
            "plot_json": true
        },
        "notes": "synthetic polarized fixture"
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

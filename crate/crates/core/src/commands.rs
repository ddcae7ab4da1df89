//! Command implementations behind the `sweatkit` binary. Each function takes
//! validated inputs and returns a value; writing to stdout is left to `main`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::alignment::{default_anchors, procrustes_align, AlignOptions, AlignmentReport};
use crate::association::{run_sweat, run_weat, PoleWordsets};
use crate::config::{read_word_list, AlignmentMode, AnchorSpec, RunConfig};
use crate::embeddings::{load_word2vec_text, save_word2vec_text, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::lexicon::{
    refine, topic_candidates, FrequencyTable, Lexicon, RefinementReport, TopicCandidate,
    DEFAULT_STOPWORDS, DEFAULT_ZIPF_THRESHOLD,
};
use crate::report::{write_json, Meta, SweatReport, WeatReport, SCHEMA_VERSION};
use crate::viz::{cumulative_svg, detail_svg, plot_data};

/// Spaces and tables loaded from a configuration, aligned when requested.
pub struct Inputs {
    pub spaces: Vec<EmbeddingSpace>,
    pub tables: Vec<Option<FrequencyTable>>,
    pub alignment: Option<AlignmentReport>,
}

impl Inputs {
    pub fn table_pair(&self) -> Option<(&FrequencyTable, &FrequencyTable)> {
        match self.tables.as_slice() {
            [Some(a), Some(b)] => Some((a, b)),
            _ => None,
        }
    }

    fn require_tables(&self) -> Result<(&FrequencyTable, &FrequencyTable)> {
        self.table_pair()
            .ok_or_else(|| Error::Frequency("both embeddings need frequency tables".into()))
    }
}

pub fn load_inputs(cfg: &RunConfig, meta: &mut Meta) -> Result<Inputs> {
    let spaces = meta.time("load_embeddings", || {
        cfg.embeddings
            .iter()
            .map(|e| load_word2vec_text(&e.path, e.label.clone()))
            .collect::<Result<Vec<_>>>()
    })?;
    let tables = meta.time("load_frequencies", || {
        cfg.embeddings
            .iter()
            .map(|e| e.frequencies.as_ref().map(FrequencyTable::load).transpose())
            .collect::<Result<Vec<_>>>()
    })?;
    let mut inputs = Inputs {
        spaces,
        tables,
        alignment: None,
    };
    if cfg.alignment.mode == AlignmentMode::Procrustes {
        let anchors = match &cfg.alignment.anchors {
            AnchorSpec::Words(w) => w.clone(),
            AnchorSpec::File { file } => read_word_list(file)?,
            AnchorSpec::Keyword(_) => default_anchors(
                &inputs.spaces[0],
                &inputs.spaces[1],
                inputs.table_pair(),
                cfg.refinement.zipf_threshold,
            ),
        };
        let (aligned, report) = meta.time("align", || {
            procrustes_align(
                &inputs.spaces[0],
                &inputs.spaces[1],
                &anchors,
                AlignOptions {
                    center: cfg.alignment.center,
                },
            )
        })?;
        info!(
            "aligned {} onto {} with {} anchors, residual {:.3e}",
            report.source_label,
            report.target_label,
            report.anchors_used.len(),
            report.residual
        );
        inputs.spaces[0] = aligned;
        inputs.alignment = Some(report);
    }
    Ok(inputs)
}

/// Candidate poles from the configuration, before any refinement.
pub fn configured_poles(cfg: &RunConfig) -> Result<Lexicon> {
    let p = &cfg.poles;
    match &p.lexicon {
        Some(path) => Lexicon::load(path),
        None => Ok(Lexicon {
            poles: PoleWordsets::new(
                p.label_a.clone().unwrap_or_default(),
                p.words_a.clone().unwrap_or_default(),
                p.label_b.clone().unwrap_or_default(),
                p.words_b.clone().unwrap_or_default(),
            )?,
            provenance: String::new(),
        }),
    }
}

fn refine_inputs(cfg: &RunConfig, inputs: &Inputs, meta: &mut Meta) -> Result<RefinementReport> {
    let lexicon = configured_poles(cfg)?;
    let (t1, t2) = inputs.require_tables()?;
    meta.time("refine", || {
        refine(
            &lexicon,
            &inputs.spaces[0],
            &inputs.spaces[1],
            t1,
            t2,
            cfg.refinement.zipf_threshold,
        )
    })
}

/// Alignment, refinement, SWEAT, and chart data for a validated configuration.
/// Output files are not written here; see [`write_sweat_outputs`].
pub fn sweat(cfg: &RunConfig) -> Result<SweatReport> {
    cfg.require_for("sweat")?;
    let mut meta = Meta::start();
    let inputs = load_inputs(cfg, &mut meta)?;
    let topic = cfg.topic.as_ref().expect("checked by require_for").load()?;

    let (poles, refinement) = if cfg.refinement.enabled {
        let report = refine_inputs(cfg, &inputs, &mut meta)?;
        (report.poles()?, Some(report))
    } else {
        (configured_poles(cfg)?.poles, None)
    };

    let (s1, s2) = (&inputs.spaces[0], &inputs.spaces[1]);
    let result = meta.time("sweat", || {
        run_sweat(&topic, s1, s2, &poles, &cfg.permutations, cfg.tail)
    })?;
    let plots = meta.time("plot_data", || plot_data(&topic, s1, s2, &poles))?;

    Ok(SweatReport {
        schema_version: SCHEMA_VERSION,
        toolkit_version: crate::VERSION.to_string(),
        command: "sweat".to_string(),
        config: cfg.clone(),
        topic,
        poles,
        alignment: inputs.alignment.as_ref().map(AlignmentReport::summary),
        refinement,
        result,
        plots,
        meta,
    })
}

/// Path the chart JSON goes to when `outputs.plot_json` is set.
pub fn plot_json_path(cfg: &RunConfig) -> PathBuf {
    match &cfg.outputs.report {
        Some(report) => report.with_extension("plot.json"),
        None => PathBuf::from("plot.json"),
    }
}

/// Writes the report (if a path is configured), SVGs, and chart JSON.
pub fn write_sweat_outputs(report: &SweatReport) -> Result<()> {
    let out = &report.config.outputs;
    if let Some(path) = &out.report {
        write_json(report, path)?;
    }
    write_charts(
        report,
        out.cumulative_svg.as_deref(),
        out.detail_svg.as_deref(),
    )?;
    if out.plot_json {
        write_json(&report.plots, &plot_json_path(&report.config))?;
    }
    Ok(())
}

fn write_charts(
    report: &SweatReport,
    cumulative: Option<&Path>,
    detail: Option<&Path>,
) -> Result<()> {
    let style = &report.config.outputs.style;
    if let Some(path) = cumulative {
        write_text(path, &cumulative_svg(&report.plots.cumulative, style))?;
    }
    if let Some(path) = detail {
        write_text(path, &detail_svg(&report.plots.detail, style))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn weat(cfg: &RunConfig) -> Result<WeatReport> {
    cfg.require_for("weat")?;
    let mut meta = Meta::start();
    let inputs = load_inputs(cfg, &mut meta)?;
    let targets = cfg.targets.as_ref().expect("checked by require_for");
    let (x, y) = (targets.x.load()?, targets.y.load()?);
    let poles = configured_poles(cfg)?.poles;
    let space = &inputs.spaces[0];
    let result = meta.time("weat", || {
        run_weat(&x, &y, space, &poles, &cfg.permutations, cfg.tail)
    })?;
    Ok(WeatReport {
        schema_version: SCHEMA_VERSION,
        toolkit_version: crate::VERSION.to_string(),
        command: "weat".to_string(),
        config: cfg.clone(),
        space: space.label().to_string(),
        x,
        y,
        poles,
        result,
        meta,
    })
}

pub fn refine_command(cfg: &RunConfig) -> Result<RefinementReport> {
    cfg.require_for("refine")?;
    let mut meta = Meta::start();
    let inputs = load_inputs(cfg, &mut meta)?;
    refine_inputs(cfg, &inputs, &mut meta)
}

pub fn candidates_command(
    cfg: &RunConfig,
    stopwords: Option<&Path>,
    limit: usize,
) -> Result<Vec<TopicCandidate>> {
    cfg.require_for("candidates")?;
    let mut meta = Meta::start();
    let inputs = load_inputs(cfg, &mut meta)?;
    let stop: HashSet<String> = match stopwords {
        Some(path) => read_word_list(path)?.into_iter().collect(),
        None => DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
    };
    let (t1, t2) = inputs.require_tables()?;
    Ok(topic_candidates(
        &inputs.spaces[0],
        &inputs.spaces[1],
        t1,
        t2,
        &stop,
        limit,
    ))
}

#[derive(Debug, Clone)]
pub struct AlignRequest {
    pub source: PathBuf,
    pub target: PathBuf,
    pub source_label: String,
    pub target_label: String,
    /// `None` selects the default anchor set.
    pub anchors: Option<PathBuf>,
    pub source_frequencies: Option<PathBuf>,
    pub target_frequencies: Option<PathBuf>,
    pub center: bool,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

pub fn align_command(req: &AlignRequest) -> Result<AlignmentReport> {
    let source = load_word2vec_text(&req.source, req.source_label.clone())?;
    let target = load_word2vec_text(&req.target, req.target_label.clone())?;
    let anchors = match &req.anchors {
        Some(file) => read_word_list(file)?,
        None => {
            let tables = match (&req.source_frequencies, &req.target_frequencies) {
                (Some(a), Some(b)) => Some((FrequencyTable::load(a)?, FrequencyTable::load(b)?)),
                _ => None,
            };
            default_anchors(
                &source,
                &target,
                tables.as_ref().map(|(a, b)| (a, b)),
                DEFAULT_ZIPF_THRESHOLD,
            )
        }
    };
    let (aligned, report) = procrustes_align(
        &source,
        &target,
        &anchors,
        AlignOptions { center: req.center },
    )?;
    save_word2vec_text(&aligned, &req.out)?;
    if let Some(path) = &req.report {
        write_json(&report, path)?;
    }
    Ok(report)
}

/// Re-renders the charts stored in a saved report; no embeddings needed.
pub fn plot_command(
    report_path: &Path,
    cumulative: Option<&Path>,
    detail: Option<&Path>,
) -> Result<()> {
    let report = crate::report::load_sweat_report(report_path)?;
    write_charts(&report, cumulative, detail)
}

/// `word<TAB>norm` per vocabulary entry, in file order.
pub fn inspect_embeddings(path: &Path) -> Result<String> {
    let space = load_word2vec_text(path, "inspect")?;
    let mut out = String::new();
    for w in space.words() {
        let _ = writeln!(out, "{w}\t{}", space.norm(w).expect("in vocabulary"));
    }
    Ok(out)
}

/// `word<TAB>count<TAB>zipf` per entry, most frequent first.
pub fn inspect_frequencies(path: &Path) -> Result<String> {
    let table = FrequencyTable::load(path)?;
    let mut out = format!("#total\t{}\n", table.total_tokens());
    for (w, c) in table.entries() {
        let _ = writeln!(out, "{w}\t{c}\t{:.4}", table.zipf(w).expect("in table"));
    }
    Ok(out)
}

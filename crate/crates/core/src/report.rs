//! Report documents written by the `sweat` and `weat` commands.
//!
//! Everything run-dependent but not result-dependent (start time, step
//! timings) lives under `meta`, so two runs of one configuration produce
//! identical documents once `meta` is removed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentSummary;
use crate::association::{PoleWordsets, SweatResult, TopicWordset, WeatResult};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::lexicon::RefinementReport;
use crate::viz::PlotData;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub started_unix_ms: u64,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Meta {
    pub fn start() -> Self {
        let started_unix_ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or_default();
        Meta {
            started_unix_ms,
            timings_ms: BTreeMap::new(),
        }
    }

    /// Runs `f`, recording its wall-clock duration under `step`.
    pub fn time<T>(&mut self, step: &str, f: impl FnOnce() -> T) -> T {
        let t = std::time::Instant::now();
        let out = f();
        self.timings_ms
            .insert(step.to_string(), t.elapsed().as_secs_f64() * 1e3);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweatReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: String,
    pub config: RunConfig,
    pub topic: TopicWordset,
    /// Poles actually used, after refinement when it ran.
    pub poles: PoleWordsets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<AlignmentSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementReport>,
    pub result: SweatResult,
    pub plots: PlotData,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: String,
    pub config: RunConfig,
    pub space: String,
    pub x: TopicWordset,
    pub y: TopicWordset,
    pub poles: PoleWordsets,
    pub result: WeatResult,
    pub meta: Meta,
}

/// Written in place of a report when a command fails after validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: String,
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub class: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_words: Vec<MissingIn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingIn {
    pub space: String,
    pub words: Vec<String>,
}

impl ErrorReport {
    pub fn new(command: &str, err: &Error) -> Self {
        let mut missing_words = Vec::new();
        collect_missing(err, &mut missing_words);
        ErrorReport {
            schema_version: SCHEMA_VERSION,
            toolkit_version: crate::VERSION.to_string(),
            command: command.to_string(),
            error: ErrorDetail {
                class: format!("{:?}", err.class()).to_lowercase(),
                message: err.to_string(),
                missing_words,
            },
        }
    }
}

fn collect_missing(err: &Error, out: &mut Vec<MissingIn>) {
    match err {
        Error::MissingWords { space, words } => out.push(MissingIn {
            space: space.clone(),
            words: words.clone(),
        }),
        Error::Aggregate(errors) => errors.iter().for_each(|e| collect_missing(e, out)),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

pub fn load_sweat_report(path: impl AsRef<Path>) -> Result<SweatReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

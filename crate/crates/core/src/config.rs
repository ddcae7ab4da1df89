//! JSON run configuration: parsing, override application, and validation.
//!
//! Relative input paths resolve against the configuration file's directory;
//! relative output paths resolve against `--out-dir` when given, otherwise
//! against the same directory. Validation reports every problem it finds,
//! each tagged with the dotted path of the offending field.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::association::{PermutationConfig, PoleWordsets, Tail, TopicWordset};
use crate::error::{ConfigIssue, Error, Result};
use crate::lexicon::DEFAULT_ZIPF_THRESHOLD;
use crate::viz::SvgStyle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingEntry {
    pub label: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    #[default]
    PreAligned,
    Procrustes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorSpec {
    /// Only `"auto"` is accepted.
    Keyword(String),
    Words(Vec<String>),
    File {
        file: PathBuf,
    },
}

impl Default for AnchorSpec {
    fn default() -> Self {
        AnchorSpec::Keyword("auto".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    pub mode: AlignmentMode,
    pub anchors: AnchorSpec,
    pub center: bool,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            mode: AlignmentMode::PreAligned,
            anchors: AnchorSpec::default(),
            center: true,
        }
    }
}

/// A topic given inline (`words`) or as a one-word-per-line file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsSpec {
    pub x: TopicSpec,
    pub y: TopicSpec,
}

/// Poles given inline or through a lexicon JSON file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words_a: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words_b: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefinementConfig {
    pub enabled: bool,
    pub zipf_threshold: f64,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            enabled: false,
            zipf_threshold: DEFAULT_ZIPF_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Report JSON path; printed to stdout when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail_svg: Option<PathBuf>,
    /// Also write the chart data as JSON next to the report (or to `plot.json`).
    pub plot_json: bool,
    pub style: SvgStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub embeddings: Vec<EmbeddingEntry>,
    #[serde(default)]
    pub alignment: AlignmentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<TopicSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsSpec>,
    pub poles: PoleSpec,
    #[serde(default)]
    pub refinement: RefinementConfig,
    #[serde(default)]
    pub permutations: PermutationConfig,
    #[serde(default)]
    pub tail: Tail,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Free-text provenance (corpus, training settings, ...), echoed into reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Command-line overrides applied on top of the file before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tail: Option<Tail>,
    pub out_dir: Option<PathBuf>,
}

/// Parses, applies overrides, resolves paths, and validates a configuration.
pub fn validate_config(path: impl AsRef<Path>, overrides: &Overrides) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, overrides)
}

/// [`validate_config`] over already-read text; `base` anchors relative paths.
pub fn parse_config(text: &str, base: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        Error::Config(vec![ConfigIssue::new(
            "",
            format!("line {}, column {}: {e}", e.line(), e.column()),
        )])
    })?;
    if let Some(seed) = overrides.seed {
        cfg.permutations.seed = seed;
    }
    if let Some(samples) = overrides.samples {
        cfg.permutations.samples = samples;
    }
    if let Some(tail) = overrides.tail {
        cfg.tail = tail;
    }
    cfg.resolve_paths(base, overrides.out_dir.as_deref().unwrap_or(base));
    let issues = cfg.issues();
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(issues))
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() && !p.as_os_str().is_empty() {
        *p = base.join(&*p);
    }
}

fn check_readable(issues: &mut Vec<ConfigIssue>, field: &str, path: &Path) {
    if path.as_os_str().is_empty() {
        issues.push(ConfigIssue::new(field, "path must not be empty"));
    } else if !path.is_file() {
        issues.push(ConfigIssue::new(
            field,
            format!("file not found or unreadable: {}", path.display()),
        ));
    } else if let Err(e) = fs::File::open(path) {
        issues.push(ConfigIssue::new(field, format!("{}: {e}", path.display())));
    }
}

fn check_word_list(issues: &mut Vec<ConfigIssue>, field: &str, words: &[String]) {
    if words.is_empty() {
        issues.push(ConfigIssue::new(field, "word list must not be empty"));
    }
    let mut seen = HashSet::new();
    for w in words {
        if !seen.insert(w) {
            issues.push(ConfigIssue::new(field, format!("duplicate word {w:?}")));
        }
    }
}

impl TopicSpec {
    fn resolve_paths(&mut self, base: &Path) {
        if let Some(f) = &mut self.file {
            resolve(base, f);
        }
    }

    fn issues(&self, field: &str, issues: &mut Vec<ConfigIssue>) {
        if self.label.trim().is_empty() {
            issues.push(ConfigIssue::new(
                format!("{field}.label"),
                "label must not be empty",
            ));
        }
        match (&self.words, &self.file) {
            (Some(words), None) => check_word_list(issues, &format!("{field}.words"), words),
            (None, Some(file)) => check_readable(issues, &format!("{field}.file"), file),
            _ => issues.push(ConfigIssue::new(
                field,
                "give exactly one of `words` or `file`",
            )),
        }
    }

    /// Materializes the wordset, reading the word file if needed.
    pub fn load(&self) -> Result<TopicWordset> {
        let words = match (&self.words, &self.file) {
            (Some(words), _) => words.clone(),
            (None, Some(file)) => read_word_list(file)?,
            (None, None) => Vec::new(),
        };
        TopicWordset::new(self.label.clone(), words)
    }
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

impl PoleSpec {
    fn issues(&self, issues: &mut Vec<ConfigIssue>) {
        let inline = [
            self.label_a.is_some(),
            self.words_a.is_some(),
            self.label_b.is_some(),
            self.words_b.is_some(),
        ];
        match (&self.lexicon, inline.iter().any(|&x| x)) {
            (Some(path), false) => check_readable(issues, "poles.lexicon", path),
            (Some(_), true) => issues.push(ConfigIssue::new(
                "poles",
                "give either `lexicon` or inline `label_a`/`words_a`/`label_b`/`words_b`, not both",
            )),
            (None, _) => {
                for (name, present) in ["label_a", "words_a", "label_b", "words_b"]
                    .iter()
                    .zip(inline)
                {
                    if !present {
                        issues.push(ConfigIssue::new(format!("poles.{name}"), "missing"));
                    }
                }
                if let (Some(la), Some(wa), Some(lb), Some(wb)) =
                    (&self.label_a, &self.words_a, &self.label_b, &self.words_b)
                {
                    if let Err(e) =
                        PoleWordsets::new(la.clone(), wa.clone(), lb.clone(), wb.clone())
                    {
                        issues.push(ConfigIssue::new("poles", e.to_string()));
                    }
                }
            }
        }
    }
}

impl RunConfig {
    fn resolve_paths(&mut self, base: &Path, out_base: &Path) {
        for e in &mut self.embeddings {
            resolve(base, &mut e.path);
            if let Some(f) = &mut e.frequencies {
                resolve(base, f);
            }
        }
        if let AnchorSpec::File { file } = &mut self.alignment.anchors {
            resolve(base, file);
        }
        if let Some(t) = &mut self.topic {
            t.resolve_paths(base);
        }
        if let Some(t) = &mut self.targets {
            t.x.resolve_paths(base);
            t.y.resolve_paths(base);
        }
        if let Some(l) = &mut self.poles.lexicon {
            resolve(base, l);
        }
        let out = &mut self.outputs;
        for p in [
            &mut out.report,
            &mut out.cumulative_svg,
            &mut out.detail_svg,
        ]
        .into_iter()
        .flatten()
        {
            resolve(out_base, p);
        }
    }

    fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();

        match self.embeddings.len() {
            1 | 2 => {}
            n => issues.push(ConfigIssue::new(
                "embeddings",
                format!("expected one or two entries, got {n}"),
            )),
        }
        let mut labels = HashSet::new();
        for (i, e) in self.embeddings.iter().enumerate() {
            if e.label.trim().is_empty() {
                issues.push(ConfigIssue::new(
                    format!("embeddings[{i}].label"),
                    "label must not be empty",
                ));
            } else if !labels.insert(e.label.as_str()) {
                issues.push(ConfigIssue::new(
                    format!("embeddings[{i}].label"),
                    format!("labels must be distinct ({:?} repeats)", e.label),
                ));
            }
            check_readable(&mut issues, &format!("embeddings[{i}].path"), &e.path);
            if let Some(f) = &e.frequencies {
                check_readable(&mut issues, &format!("embeddings[{i}].frequencies"), f);
            }
        }

        if self.alignment.mode == AlignmentMode::Procrustes && self.embeddings.len() != 2 {
            issues.push(ConfigIssue::new(
                "alignment.mode",
                "procrustes alignment needs two embeddings",
            ));
        }
        match &self.alignment.anchors {
            AnchorSpec::Keyword(k) if k != "auto" => issues.push(ConfigIssue::new(
                "alignment.anchors",
                format!("expected \"auto\", a word list, or {{\"file\": ...}}, got {k:?}"),
            )),
            AnchorSpec::Words(w) => check_word_list(&mut issues, "alignment.anchors", w),
            AnchorSpec::File { file } => {
                check_readable(&mut issues, "alignment.anchors.file", file)
            }
            AnchorSpec::Keyword(_) => {}
        }

        if let Some(t) = &self.topic {
            t.issues("topic", &mut issues);
        }
        if let Some(t) = &self.targets {
            t.x.issues("targets.x", &mut issues);
            t.y.issues("targets.y", &mut issues);
        }
        if self.topic.is_none() && self.targets.is_none() {
            issues.push(ConfigIssue::new(
                "topic",
                "either `topic` or `targets` is required",
            ));
        }

        self.poles.issues(&mut issues);

        if !self.refinement.zipf_threshold.is_finite() {
            issues.push(ConfigIssue::new(
                "refinement.zipf_threshold",
                "must be a finite number",
            ));
        }
        if self.refinement.enabled {
            if self.embeddings.len() != 2 {
                issues.push(ConfigIssue::new(
                    "refinement.enabled",
                    "refinement needs two embeddings",
                ));
            }
            for (i, e) in self.embeddings.iter().enumerate() {
                if e.frequencies.is_none() {
                    issues.push(ConfigIssue::new(
                        format!("embeddings[{i}].frequencies"),
                        "required when refinement is enabled",
                    ));
                }
            }
        }

        if let Err(e) = self.permutations.validate() {
            issues.push(ConfigIssue::new("permutations", e.to_string()));
        }
        issues
    }

    /// Checks the parts of the configuration a specific command depends on.
    pub fn require_for(&self, command: &str) -> Result<()> {
        let mut issues = Vec::new();
        match command {
            "sweat" | "refine" | "candidates" => {
                if self.embeddings.len() != 2 {
                    issues.push(ConfigIssue::new(
                        "embeddings",
                        format!("`{command}` needs two embeddings"),
                    ));
                }
                if command == "sweat" && self.topic.is_none() {
                    issues.push(ConfigIssue::new("topic", "`sweat` needs a topic"));
                }
                if command == "candidates" {
                    for (i, e) in self.embeddings.iter().enumerate() {
                        if e.frequencies.is_none() {
                            issues.push(ConfigIssue::new(
                                format!("embeddings[{i}].frequencies"),
                                "`candidates` needs frequency tables",
                            ));
                        }
                    }
                }
                if command == "refine" {
                    for (i, e) in self.embeddings.iter().enumerate() {
                        if e.frequencies.is_none() {
                            issues.push(ConfigIssue::new(
                                format!("embeddings[{i}].frequencies"),
                                "`refine` needs frequency tables",
                            ));
                        }
                    }
                }
            }
            "weat" if self.targets.is_none() => {
                issues.push(ConfigIssue::new(
                    "targets",
                    "`weat` needs `targets.x` and `targets.y`",
                ));
            }
            _ => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::PermutationMode;

    struct Fixture {
        dir: tempfile::TempDir,
    }

    impl Fixture {
        fn new() -> Self {
            let dir = tempfile::tempdir().unwrap();
            fs::write(dir.path().join("a.vec"), "1 2\nx 1 0\n").unwrap();
            fs::write(dir.path().join("b.vec"), "1 2\nx 0 1\n").unwrap();
            Fixture { dir }
        }

        fn parse(&self, json: &str) -> Result<RunConfig> {
            parse_config(json, self.dir.path(), &Overrides::default())
        }
    }

    const MINIMAL: &str = r#"{
        "embeddings": [{"label": "A", "path": "a.vec"}, {"label": "B", "path": "b.vec"}],
        "topic": {"label": "t", "words": ["x"]},
        "poles": {"label_a": "pos", "words_a": ["p"], "label_b": "neg", "words_b": ["n"]}
    }"#;

    fn issues(err: Error) -> Vec<ConfigIssue> {
        match err {
            Error::Config(issues) => issues,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let fx = Fixture::new();
        let cfg = fx.parse(MINIMAL).unwrap();
        assert_eq!(cfg.permutations.mode, PermutationMode::Auto);
        assert_eq!(cfg.permutations.samples, 10_000);
        assert_eq!(cfg.permutations.exact_limit, 500_000);
        assert_eq!(cfg.refinement.zipf_threshold, 5.0);
        assert!(!cfg.refinement.enabled);
        assert_eq!(cfg.tail, Tail::Directional);
        assert_eq!(cfg.alignment.mode, AlignmentMode::PreAligned);
        assert_eq!(cfg.embeddings[0].path, fx.dir.path().join("a.vec"));
        cfg.require_for("sweat").unwrap();
        assert!(cfg.require_for("weat").is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let fx = Fixture::new();
        let json = MINIMAL.replace(r#""label": "B""#, r#""label": "A""#);
        let issues = issues(fx.parse(&json).unwrap_err());
        assert!(
            issues
                .iter()
                .any(|i| i.message.contains("labels must be distinct")),
            "{issues:?}"
        );
    }

    #[test]
    fn missing_lexicon_names_field_and_path() {
        let fx = Fixture::new();
        let json = MINIMAL.replace(
            r#""poles": {"label_a": "pos", "words_a": ["p"], "label_b": "neg", "words_b": ["n"]}"#,
            r#""poles": {"lexicon": "nowhere.json"}"#,
        );
        let issues = issues(fx.parse(&json).unwrap_err());
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].field, "poles.lexicon");
        assert!(issues[0].message.contains("nowhere.json"));
    }

    #[test]
    fn reports_all_issues_at_once() {
        let fx = Fixture::new();
        let json = r#"{
            "embeddings": [{"label": "A", "path": "missing.vec"}, {"label": "A", "path": "b.vec"}],
            "topic": {"label": "t", "words": []},
            "poles": {"label_a": "pos", "words_a": ["p"], "label_b": "neg", "words_b": ["p"]},
            "refinement": {"enabled": true},
            "permutations": {"mode": "montecarlo", "samples": 10}
        }"#;
        let fields: Vec<String> = issues(fx.parse(json).unwrap_err())
            .into_iter()
            .map(|i| i.field)
            .collect();
        for expected in [
            "embeddings[0].path",
            "embeddings[1].label",
            "topic.words",
            "poles",
            "embeddings[0].frequencies",
            "permutations",
        ] {
            assert!(
                fields.iter().any(|f| f == expected),
                "missing {expected} in {fields:?}"
            );
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let fx = Fixture::new();
        let err = fx.parse("{\n  \"embeddings\": [,]\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = fx
            .parse(&MINIMAL.replace("\"topic\"", "\"topik\""))
            .unwrap_err();
        assert!(err.to_string().contains("topik"), "{err}");
    }

    #[test]
    fn overrides_apply() {
        let fx = Fixture::new();
        let out = fx.dir.path().join("out");
        let json = MINIMAL.replace("\"topic\"", r#""outputs": {"report": "r.json"}, "topic""#);
        let cfg = parse_config(
            &json,
            fx.dir.path(),
            &Overrides {
                seed: Some(9),
                samples: Some(500),
                tail: Some(Tail::TwoSided),
                out_dir: Some(out.clone()),
            },
        )
        .unwrap();
        assert_eq!(cfg.permutations.seed, 9);
        assert_eq!(cfg.permutations.samples, 500);
        assert_eq!(cfg.tail, Tail::TwoSided);
        assert_eq!(cfg.outputs.report, Some(out.join("r.json")));
    }

    #[test]
    fn anchors_forms() {
        let fx = Fixture::new();
        for (anchors, ok) in [
            (r#""auto""#, true),
            (r#"["x"]"#, true),
            (r#""everything""#, false),
            (r#"{"file": "none.txt"}"#, false),
        ] {
            let json = MINIMAL.replace(
                "\"topic\"",
                &format!(r#""alignment": {{"mode": "procrustes", "anchors": {anchors}}}, "topic""#),
            );
            assert_eq!(fx.parse(&json).is_ok(), ok, "{anchors}");
        }
    }
}

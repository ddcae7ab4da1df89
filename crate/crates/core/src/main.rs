use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sweatkit::commands::{self, AlignRequest};
use sweatkit::config::{validate_config, Overrides, RunConfig};
use sweatkit::report::{to_json, write_json, ErrorReport};
use sweatkit::{Error, ErrorClass, Tail};

#[derive(Parser)]
#[command(
    name = "sweatkit",
    version,
    about = "Measure relative polarization of a topic across two aligned embedding spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the SWEAT test described by a configuration file.
    Sweat(RunArgs),
    /// Run a WEAT test on `targets.x` / `targets.y` in the first embedding space.
    Weat(RunArgs),
    /// Rotate one word2vec space onto another.
    Align(AlignArgs),
    /// Filter the configured pole lexicon and print the refinement report.
    Refine(RunArgs),
    /// List topic-word candidates ranked by mean Zipf score.
    Candidates(CandidateArgs),
    /// Re-render charts from a saved sweat report.
    Plot(PlotArgs),
    /// Print vocabulary norms or frequency-table Zipf scores.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Directional,
    TwoSided,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    tail: Option<TailArg>,
    /// Directory that relative output paths resolve against.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the report here instead of the configured path or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Anchor word file (one per line) or `auto`.
    #[arg(long, default_value = "auto")]
    anchors: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "source")]
    source_label: String,
    #[arg(long, default_value = "target")]
    target_label: String,
    /// Frequency tables used to pick `auto` anchors.
    #[arg(long, requires = "target_freq")]
    source_freq: Option<PathBuf>,
    #[arg(long, requires = "source_freq")]
    target_freq: Option<PathBuf>,
    /// Skip mean-centering of anchors.
    #[arg(long)]
    no_center: bool,
}

#[derive(Args)]
struct CandidateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// Stopword file, one word per line; a small built-in English list otherwise.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    cumulative: Option<PathBuf>,
    #[arg(long)]
    detail: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(
        long,
        conflicts_with = "frequencies",
        required_unless_present = "frequencies"
    )]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    frequencies: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> sweatkit::Result<RunConfig> {
        let overrides = Overrides {
            seed: self.seed,
            samples: self.samples,
            tail: self.tail.map(|t| match t {
                TailArg::Directional => Tail::Directional,
                TailArg::TwoSided => Tail::TwoSided,
            }),
            out_dir: self.out_dir.clone(),
        };
        let mut cfg = validate_config(&self.config, &overrides)?;
        if let Some(out) = &self.out {
            cfg.outputs.report = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn emit<T: Serialize>(value: &T, path: Option<&PathBuf>) -> sweatkit::Result<()> {
    match path {
        Some(p) => write_json(value, p),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

fn run(command: Command) -> sweatkit::Result<()> {
    match command {
        Command::Sweat(args) => {
            let cfg = args.load()?;
            let report =
                commands::sweat(&cfg).inspect_err(|e| write_error_report(&cfg, "sweat", e))?;
            commands::write_sweat_outputs(&report)?;
            if cfg.outputs.report.is_none() {
                print!("{}", to_json(&report));
            }
            Ok(())
        }
        Command::Weat(args) => {
            let cfg = args.load()?;
            let report =
                commands::weat(&cfg).inspect_err(|e| write_error_report(&cfg, "weat", e))?;
            emit(&report, cfg.outputs.report.as_ref())
        }
        Command::Refine(args) => {
            let cfg = args.load()?;
            let report = commands::refine_command(&cfg)?;
            emit(&report, args.out.as_ref())
        }
        Command::Candidates(args) => {
            let cfg = validate_config(&args.config, &Overrides::default())?;
            for c in commands::candidates_command(&cfg, args.stopwords.as_deref(), args.limit)? {
                println!("{}\t{:.4}", c.word, c.mean_zipf);
            }
            Ok(())
        }
        Command::Align(args) => {
            let req = AlignRequest {
                source: args.source,
                target: args.target,
                source_label: args.source_label,
                target_label: args.target_label,
                anchors: (args.anchors != "auto").then(|| PathBuf::from(&args.anchors)),
                source_frequencies: args.source_freq,
                target_frequencies: args.target_freq,
                center: !args.no_center,
                out: args.out,
                report: args.report,
            };
            let report = commands::align_command(&req)?;
            eprintln!(
                "aligned with {} anchors, residual {:e}{}",
                report.anchors_used.len(),
                report.residual,
                if report.underdetermined {
                    " (underdetermined)"
                } else {
                    ""
                }
            );
            Ok(())
        }
        Command::Plot(args) => {
            let dir = args.out_dir.unwrap_or_else(|| PathBuf::from("."));
            let cumulative = args
                .cumulative
                .unwrap_or_else(|| dir.join("cumulative.svg"));
            let detail = args.detail.unwrap_or_else(|| dir.join("detail.svg"));
            commands::plot_command(&args.report, Some(&cumulative), Some(&detail))
        }
        Command::Inspect(args) => {
            let text = match (args.embeddings, args.frequencies) {
                (Some(p), _) => commands::inspect_embeddings(&p)?,
                (None, Some(p)) => commands::inspect_frequencies(&p)?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            print!("{text}");
            Ok(())
        }
    }
}

fn write_error_report(cfg: &RunConfig, command: &str, err: &Error) {
    if let Some(path) = &cfg.outputs.report {
        if let Err(e) = write_json(&ErrorReport::new(command, err), path) {
            eprintln!("sweatkit: could not write error report: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sweatkit: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Data => 2,
                ErrorClass::Io => 3,
            })
        }
    }
}

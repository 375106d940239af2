//! Flags, the optional JSON config file, and their merge into a validated run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qre_core::conjecture::SearchConfig;
use qre_core::omd::{builtins, OmdFunction};
use qre_core::sweep::PairFamily;
use qre_core::LogBase;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qre",
    version,
    about = "Quasi-relative entropies, continuity bounds and conjecture searches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// All evaluation routes for one pair, with their agreement.
    Divergence,
    /// Full lower/upper bound report for one pair.
    Bounds,
    /// Bound checks over seeded random pairs; exits 1 on any violation.
    Sweep,
    /// Counterexample search for the weighted-overlap bound.
    Conjecture,
    /// Integral-representation round trip on a log grid.
    ReprCheck,
    /// New versus prior relative-entropy bound on the mixed-vs-rank-two pairs.
    PaperExample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Divergence => "divergence",
            Command::Bounds => "bounds",
            Command::Sweep => "sweep",
            Command::Conjecture => "conjecture",
            Command::ReprCheck => "repr-check",
            Command::PaperExample => "paper-example",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Dimensions: `3`, `2,4,8`, `2..8` (inclusive) or a mix.
    #[arg(long, global = true)]
    pub dims: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Function spec (`neg-log`, `neg-power:0.5`, `tsallis:q=0.3`); repeatable.
    #[arg(long = "f", global = true)]
    pub f: Vec<String>,
    /// Parameter for `--f neg-power` / `--f tsallis` given without one; repeatable.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, global = true)]
    pub log_base: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Pair family for sweeps: `random` or `commuting`.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// State-pair JSON document for `divergence` and `bounds`.
    #[arg(long, global = true)]
    pub pair: Option<PathBuf>,
    /// Tsallis parameters checked only for bound orderings in sweeps; repeatable.
    #[arg(long = "chain-q", global = true)]
    pub chain_q: Vec<f64>,
    /// Hill-climb restarts for `conjecture`.
    #[arg(long, global = true)]
    pub restarts: Option<u64>,
    /// Hill-climb steps per restart for `conjecture`.
    #[arg(long, global = true)]
    pub steps: Option<u64>,
}

/// Contents of `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub dims: Option<DimsValue>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub f: Option<Vec<String>>,
    pub q: Option<Vec<f64>>,
    pub log_base: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub jobs: Option<usize>,
    pub family: Option<String>,
    pub pair: Option<PathBuf>,
    pub chain_q: Option<Vec<f64>>,
    pub restarts: Option<u64>,
    pub steps: Option<u64>,
    /// Extra search settings (step size, plateau, families, strategies).
    pub search: Option<SearchConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DimsValue {
    List(Vec<usize>),
    Text(String),
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub functions: Vec<OmdFunction>,
    pub log_base: LogBase,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub jobs: Option<usize>,
    pub family: PairFamily,
    pub pair: Option<PathBuf>,
    pub chain_qs: Vec<f64>,
    pub search: SearchConfig,
}

/// Parses `3`, `2,4`, `2..8`, `2..=8` and combinations.
pub fn parse_dims(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Parse(format!(
            "invalid --dims {text:?} (examples: 3, 2,4,8, 2..8)"
        ))
    };
    let mut dims = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            dims.extend(a..=b);
        } else {
            dims.push(part.parse().map_err(|_| bad())?);
        }
    }
    if dims.is_empty() {
        return Err(bad());
    }
    Ok(dims)
}

fn parse_functions(specs: &[String], qs: &[f64]) -> Result<Vec<OmdFunction>, CliError> {
    let mut out = Vec::new();
    for spec in specs {
        let bare = !spec.contains(':') && spec.trim() != "neg-log";
        if bare && !qs.is_empty() {
            for q in qs {
                out.push(OmdFunction::parse(&format!("{}:{q}", spec.trim()))?);
            }
        } else {
            out.push(OmdFunction::parse(spec)?);
        }
    }
    Ok(out)
}

fn parse_family(text: &str) -> Result<PairFamily, CliError> {
    text.parse().map_err(CliError::Parse)
}

fn default_dims(command: Command) -> Vec<usize> {
    match command {
        Command::Divergence | Command::Bounds => vec![3],
        Command::Sweep => vec![2, 3, 4],
        Command::Conjecture => vec![3, 4, 5, 6],
        Command::ReprCheck => vec![],
        Command::PaperExample => (3..=16).collect(),
    }
}

fn default_trials(command: Command) -> u64 {
    match command {
        Command::Sweep => 1000,
        Command::Conjecture => 100_000,
        _ => 1,
    }
}

fn default_functions(command: Command) -> Vec<OmdFunction> {
    match command {
        Command::ReprCheck => {
            let mut v = vec![OmdFunction::neg_log()];
            v.extend([0.25, 0.5, 0.75].map(|p| OmdFunction::neg_power(p).expect("valid p")));
            v
        }
        _ => builtins(),
    }
}

pub fn read_config(path: &std::path::Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the config file over defaults, then validates.
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let command = cli.command;
        let a = cli.common;
        let file = match &a.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        if let Some(c) = &file.command {
            if c != command.name() {
                return Err(CliError::Validation(format!(
                    "config file is for command {c:?} but {:?} was requested",
                    command.name()
                )));
            }
        }

        let dims = match (a.dims, file.dims) {
            (Some(t), _) => parse_dims(&t)?,
            (None, Some(DimsValue::Text(t))) => parse_dims(&t)?,
            (None, Some(DimsValue::List(v))) => v,
            (None, None) => default_dims(command),
        };
        let trials = a
            .trials
            .or(file.trials)
            .unwrap_or_else(|| default_trials(command));
        let seed = a.seed.or(file.seed).unwrap_or(0);
        let specs = if a.f.is_empty() {
            file.f.unwrap_or_default()
        } else {
            a.f
        };
        let qs = if a.q.is_empty() {
            file.q.unwrap_or_default()
        } else {
            a.q
        };
        let functions = if specs.is_empty() {
            default_functions(command)
        } else {
            parse_functions(&specs, &qs)?
        };
        let log_base = match a.log_base.or(file.log_base) {
            Some(t) => t.parse::<LogBase>().map_err(CliError::Parse)?,
            None => LogBase::E,
        };
        let family = match a.family.or(file.family) {
            Some(t) => parse_family(&t)?,
            None => PairFamily::Random,
        };
        let chain_qs = if a.chain_q.is_empty() {
            file.chain_q.unwrap_or_default()
        } else {
            a.chain_q
        };

        let mut search = file.search.unwrap_or_default();
        search.dims = dims.clone();
        search.trials = trials;
        search.seed = seed;
        if let Some(r) = a.restarts.or(file.restarts) {
            search.restarts = r;
        }
        if let Some(s) = a.steps.or(file.steps) {
            search.steps = s;
        }

        let run = Self {
            command,
            dims,
            trials,
            seed,
            functions,
            log_base,
            out: a.out.or(file.out),
            format: a.format.or(file.format).unwrap_or(OutputFormat::Csv),
            jobs: a.jobs.or(file.jobs),
            family,
            pair: a.pair.or(file.pair),
            chain_qs,
            search,
        };
        run.validate()?;
        Ok(run)
    }

    fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::Validation(m));
        if self.trials == 0 {
            return invalid("--trials must be at least 1".into());
        }
        if self.command != Command::ReprCheck && self.dims.is_empty() {
            return invalid("--dims must list at least one dimension".into());
        }
        if let Some(d) = self.dims.iter().find(|&&d| d == 0) {
            return invalid(format!("dimension {d} is not allowed"));
        }
        if self.jobs == Some(0) {
            return invalid("--jobs must be at least 1".into());
        }
        if self.command == Command::PaperExample {
            if let Some(d) = self.dims.iter().find(|&&d| d < 3) {
                return invalid(format!("paper-example needs d >= 3, got {d}"));
            }
        }
        if self.command == Command::Conjecture {
            self.search
                .validate()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        if let Some(q) = self.chain_qs.iter().find(|&&q| !(q > 0.0) || q == 1.0) {
            return invalid(format!(
                "--chain-q {q} must be positive and different from 1"
            ));
        }
        Ok(())
    }
}

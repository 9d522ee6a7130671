//! Command-line arguments, JSON config files and the resolved run manifest.

use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::BuildHasher;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::methods::{demo_methods, resolve_spec, MethodChoice, SpecSource};
use specsim::spectra::builtin::{self, NoiseForm};
use specsim::Method;

#[derive(Parser, Debug)]
#[command(name = "specsim", version, about = "Simulate functional time series from spectral density operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Simulate one sample and write sample.csv.
    Simulate(RunArgs),
    /// Monte-Carlo accuracy of averaged autocovariances; writes accuracy.csv.
    Validate(RunArgs),
    /// Median wall time over a grid of T and M; writes bench.csv.
    Bench(RunArgs),
    /// Accuracy and timing comparison for a builtin example.
    Demo(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a) | Command::Validate(a) | Command::Bench(a) | Command::Demo(a) => a,
        }
    }

    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Simulate(_) => CommandKind::Simulate,
            Command::Validate(_) => CommandKind::Validate,
            Command::Bench(_) => CommandKind::Bench,
            Command::Demo(_) => CommandKind::Demo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Simulate,
    Validate,
    Bench,
    Demo,
}

/// Which exact autocovariance `validate` compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TargetChoice {
    /// Finite-T target for spectral-domain methods, stationary for time-domain ones.
    Auto,
    /// Covariance of the length-T spectral construction.
    Finite,
    /// Stationary autocovariance by frequency integration.
    Stationary,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Builtin spec name.
    #[arg(long)]
    pub spec: Option<String>,
    /// JSON spec file.
    #[arg(long, value_name = "PATH")]
    pub spec_file: Option<PathBuf>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Time horizon (even). A comma-separated list for bench and demo.
    #[arg(long = "T", alias = "t", value_delimiter = ',')]
    pub t: Option<Vec<usize>>,
    /// Grid resolution. A comma-separated list for bench and demo.
    #[arg(long = "M", alias = "m", value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Truncation rank.
    #[arg(long = "N", alias = "n")]
    pub n: Option<usize>,
    /// Random seed; drawn from the system when absent and echoed in manifest.json.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo replicates (validate, demo) or timing repeats (bench).
    #[arg(long = "I", alias = "i")]
    pub replicates: Option<usize>,
    /// Autocovariance lags.
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<usize>>,
    /// Simulation method(s), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<String>>,
    /// Simulate k·T values and keep a random block of T.
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Burn-in length for time-domain methods.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Accuracy target for validate and demo.
    #[arg(long, value_enum)]
    pub target: Option<TargetChoice>,
    /// Timing repeats in demo.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Keys of a JSON config file; same meaning as the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    spec: Option<String>,
    spec_file: Option<PathBuf>,
    #[serde(rename = "T")]
    t: Option<OneOrMany<usize>>,
    #[serde(rename = "M")]
    m: Option<OneOrMany<usize>>,
    #[serde(rename = "N")]
    n: Option<usize>,
    seed: Option<u64>,
    #[serde(rename = "I")]
    replicates: Option<usize>,
    lags: Option<Vec<usize>>,
    method: Option<OneOrMany<String>>,
    oversample: Option<usize>,
    burnin: Option<usize>,
    target: Option<TargetChoice>,
    repeats: Option<usize>,
    out: Option<PathBuf>,
}

impl ConfigFile {
    fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
    }

    /// Overlay explicitly given flags; relative paths in the file resolve against its directory.
    fn merge(self, args: &RunArgs, base: &Path) -> RunArgs {
        let rel = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        RunArgs {
            spec: args.spec.clone().or(self.spec),
            spec_file: args.spec_file.clone().or(self.spec_file.map(rel)),
            config: args.config.clone(),
            t: args.t.clone().or(self.t.map(Into::into)),
            m: args.m.clone().or(self.m.map(Into::into)),
            n: args.n.or(self.n),
            seed: args.seed.or(self.seed),
            replicates: args.replicates.or(self.replicates),
            lags: args.lags.clone().or(self.lags),
            method: args.method.clone().or(self.method.map(Into::into)),
            oversample: args.oversample.or(self.oversample),
            burnin: args.burnin.or(self.burnin),
            target: args.target.or(self.target),
            repeats: args.repeats.or(self.repeats),
            out: args.out.clone().or(self.out.map(rel)),
        }
    }
}

/// Fully resolved run description; echoed to manifest.json.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: CommandKind,
    pub spec: SpecSource,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "I")]
    pub replicates: usize,
    pub lags: Vec<usize>,
    #[serde(serialize_with = "labels")]
    pub methods: Vec<MethodChoice>,
    pub oversample: usize,
    pub burnin: Option<usize>,
    pub target: TargetChoice,
    pub repeats: usize,
    pub out: PathBuf,
}

fn labels<S: serde::Serializer>(methods: &[MethodChoice], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(methods.iter().map(|m| m.label.as_str()))
}

pub const DEFAULT_T: usize = 256;
pub const DEFAULT_M: usize = 51;
pub const DEFAULT_N: usize = 50;
pub const DEFAULT_LAGS: [usize; 6] = [0, 1, 2, 3, 5, 10];
pub const DEFAULT_REPLICATES: usize = 100;
pub const DEFAULT_REPEATS: usize = 3;

fn system_seed() -> u64 {
    RandomState::new().hash_one(std::process::id())
}

fn ascending(name: &str, values: &[usize]) -> Result<(), String> {
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("{name} values must be strictly ascending"));
    }
    Ok(())
}

/// Merge flags with the optional config file and check everything that can be
/// checked before running. Errors are usage errors.
pub fn parse_manifest(command: &Command) -> Result<RunManifest, String> {
    let kind = command.kind();
    let mut args = command.args().clone();
    if let Some(path) = &args.config {
        let file = ConfigFile::load(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        args = file.merge(&args, &base);
    }

    let spec = match (args.spec, args.spec_file) {
        (Some(_), Some(_)) => return Err("give either --spec or --spec-file, not both".into()),
        (Some(name), None) => {
            if builtin::by_name(&name).is_none() {
                return Err(format!("unknown spec {name:?}; builtin specs: {}", builtin::NAMES.join(", ")));
            }
            SpecSource::Builtin(name)
        }
        (None, Some(path)) => {
            if !path.is_file() {
                return Err(format!("spec file {} does not exist", path.display()));
            }
            SpecSource::File(path)
        }
        (None, None) => return Err("missing spec: give --spec NAME or --spec-file PATH".into()),
    };

    let t = args.t.unwrap_or_else(|| vec![DEFAULT_T]);
    let m = args.m.unwrap_or_else(|| vec![DEFAULT_M]);
    if t.is_empty() || m.is_empty() {
        return Err("T and M need at least one value".into());
    }
    if let Some(bad) = t.iter().find(|&&t| t == 0 || t % 2 == 1) {
        return Err(format!("T must be even, got {bad}"));
    }
    if let Some(bad) = m.iter().find(|&&m| m < 2) {
        return Err(format!("M must be at least 2, got {bad}"));
    }
    ascending("T", &t)?;
    ascending("M", &m)?;
    if matches!(kind, CommandKind::Simulate | CommandKind::Validate) && (t.len() > 1 || m.len() > 1) {
        return Err("simulate and validate take a single T and M".into());
    }
    let n = args.n.unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err("N must be at least 1".into());
    }
    let default_i = if kind == CommandKind::Bench { DEFAULT_REPEATS } else { DEFAULT_REPLICATES };
    let replicates = args.replicates.unwrap_or(default_i);
    if replicates == 0 {
        return Err("I must be at least 1".into());
    }
    let repeats = args.repeats.unwrap_or(DEFAULT_REPEATS);
    if repeats == 0 {
        return Err("repeats must be at least 1".into());
    }
    let oversample = args.oversample.unwrap_or(1);
    if oversample == 0 {
        return Err("oversample must be at least 1".into());
    }

    let mut lags = match args.lags {
        Some(lags) => {
            if let Some(&h) = lags.iter().find(|&&h| h >= t[0]) {
                return Err(format!("lag {h} must be smaller than T = {}", t[0]));
            }
            lags
        }
        None => DEFAULT_LAGS.iter().copied().filter(|&h| h < t[0]).collect(),
    };
    lags.sort_unstable();
    lags.dedup();

    let methods = match args.method {
        Some(names) => names.iter().map(|s| MethodChoice::parse(s)).collect::<Result<Vec<_>, _>>()?,
        None if kind == CommandKind::Demo => {
            let example = spec.example().unwrap_or_default();
            demo_methods(example).ok_or("demo needs --spec example1, example2 or example3")?
        }
        None => {
            let spec = resolve_spec(&spec, &MethodChoice::plain(Method::Ckl))?;
            vec![MethodChoice::plain(Method::default_for(&spec))]
        }
    };
    if methods.is_empty() {
        return Err("at least one method is required".into());
    }
    if kind == CommandKind::Simulate && methods.len() > 1 {
        return Err("simulate takes a single method".into());
    }
    if kind == CommandKind::Demo && !matches!(spec.example(), Some("example1" | "example2" | "example3")) {
        return Err("demo needs --spec example1, example2 or example3".into());
    }
    for choice in &methods {
        resolve_spec(&spec, choice)?;
        if choice.noise == Some(NoiseForm::Kernel) && n > m[0] {
            return Err(format!("method {} decomposes the noise on the grid and needs N <= M", choice.label));
        }
    }

    Ok(RunManifest {
        command: kind,
        spec,
        t,
        m,
        n,
        seed: args.seed.unwrap_or_else(system_seed),
        replicates,
        lags,
        methods,
        oversample,
        burnin: args.burnin,
        // Demos report error against the true stationary autocovariance.
        target: args.target.unwrap_or(if kind == CommandKind::Demo {
            TargetChoice::Stationary
        } else {
            TargetChoice::Auto
        }),
        repeats,
        out: args.out.unwrap_or_else(|| PathBuf::from("specsim-out")),
    })
}

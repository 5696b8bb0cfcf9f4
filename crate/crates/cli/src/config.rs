use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use subdom_core::stats::DEFAULT_DISPERSION;
use subdom_core::Epsilon;

pub const SEED_ENV: &str = "SUBDOM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Simulate,
    Rank,
    Diversity,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Fig5 => "fig5",
            Command::Simulate => "simulate",
            Command::Rank => "rank",
            Command::Diversity => "diversity",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    Absolute,
    #[default]
    Relative,
}

/// Matrices analysed by `rank`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RankModel {
    /// i.i.d. complex Gaussian entries
    #[default]
    Gaussian,
    /// Subcarrier-domain matrices of random path channels
    Paths,
}

/// Emit figure data and run experiments on the subcarrier-domain model.
#[derive(Debug, Parser)]
#[command(name = "subdom", version, allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with the same keys as the flags (snake_case); flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

/// Every tunable, unset unless given. Used both for flags and TOML files.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Number of Gaussian sub-channels
    #[arg(long)]
    pub l: Option<usize>,
    /// Transmitting users (defaults to l)
    #[arg(long)]
    pub k_in: Option<usize>,
    /// Receiving users (defaults to l, or 2l for fig5)
    #[arg(long)]
    pub k_out: Option<usize>,
    /// Transmitted direction theta* in radians
    #[arg(long, conflicts_with = "theta_star_deg")]
    pub theta_star: Option<f64>,
    /// Transmitted direction theta* in degrees
    #[arg(long)]
    pub theta_star_deg: Option<f64>,
    /// Modulation variance per quadrature
    #[arg(long)]
    pub sigma_sq: Option<f64>,
    /// Noise variance per quadrature
    #[arg(long)]
    pub sigma_n_sq: Option<f64>,
    /// Zero threshold
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub epsilon_mode: Option<EpsilonMode>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed; falls back to $SUBDOM_SEED, then 42
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid resolution (intervals across the plotted range)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output file (stdout if absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for Monte-Carlo trials
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fixed sub-channel index C for fig4/sweep (defaults to l/2)
    #[arg(long)]
    pub c_index: Option<usize>,
    /// Number of omega increments from 0 to pi in sweep
    #[arg(long)]
    pub omega_steps: Option<usize>,
    /// Angular jitter (radians) of an opposed path
    #[arg(long)]
    pub dispersion: Option<f64>,
    /// Comma-separated sub-channel counts for diversity
    #[arg(long, value_delimiter = ',')]
    pub l_list: Option<Vec<usize>>,
    /// Random paths per channel for diversity and path-based rank
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, value_enum)]
    pub rank_model: Option<RankModel>,
}

impl Options {
    /// Fields set in `self` win over `other`.
    pub fn or(self, other: Options) -> Options {
        // the two angle flags are one setting
        let (theta_star, theta_star_deg) = if self.theta_star.is_some() || self.theta_star_deg.is_some() {
            (self.theta_star, self.theta_star_deg)
        } else {
            (other.theta_star, other.theta_star_deg)
        };
        Options {
            l: self.l.or(other.l),
            k_in: self.k_in.or(other.k_in),
            k_out: self.k_out.or(other.k_out),
            theta_star,
            theta_star_deg,
            sigma_sq: self.sigma_sq.or(other.sigma_sq),
            sigma_n_sq: self.sigma_n_sq.or(other.sigma_n_sq),
            epsilon: self.epsilon.or(other.epsilon),
            epsilon_mode: self.epsilon_mode.or(other.epsilon_mode),
            trials: self.trials.or(other.trials),
            seed: self.seed.or(other.seed),
            grid: self.grid.or(other.grid),
            output: self.output.or(other.output),
            format: self.format.or(other.format),
            threads: self.threads.or(other.threads),
            c_index: self.c_index.or(other.c_index),
            omega_steps: self.omega_steps.or(other.omega_steps),
            dispersion: self.dispersion.or(other.dispersion),
            l_list: self.l_list.or(other.l_list),
            paths: self.paths.or(other.paths),
            rank_model: self.rank_model.or(other.rank_model),
        }
    }

    pub fn from_toml(text: &str) -> Result<Options, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_toml_file(path: &Path) -> Result<Options, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Options::from_toml(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(Vec<Violation>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(msg) => write!(f, "cannot read config: {msg}"),
            ConfigError::Parse(msg) => write!(f, "invalid config file: {msg}"),
            ConfigError::Invalid(v) => {
                let lines: Vec<String> = v.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", lines.join("\n"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub value: String,
    pub constraint: String,
}

impl Violation {
    fn new(field: &'static str, value: impl fmt::Display, constraint: impl Into<String>) -> Self {
        Self {
            field,
            value: value.to_string(),
            constraint: constraint.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {} = {}: {}", self.field, self.value, self.constraint)
    }
}

/// Fully resolved run configuration. `output` and `threads` do not affect
/// the emitted data and are left out of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub l: usize,
    pub k_in: usize,
    pub k_out: usize,
    pub theta_star: f64,
    pub sigma_sq: f64,
    pub sigma_n_sq: f64,
    pub epsilon: f64,
    pub epsilon_mode: EpsilonMode,
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    pub format: Format,
    pub c_index: usize,
    pub omega_steps: usize,
    pub dispersion: f64,
    pub l_list: Vec<usize>,
    pub paths: usize,
    pub rank_model: RankModel,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub mod defaults {
    pub const L: usize = 2;
    pub const EPSILON: f64 = 1e-6;
    pub const TRIALS: usize = 1000;
    pub const GRID: usize = 1000;
    pub const SEED: u64 = 42;
    pub const SIGMA_SQ: f64 = 1.0;
    pub const SIGMA_N_SQ: f64 = 0.1;
    pub const OMEGA_STEPS: usize = 8;
    pub const PATHS: usize = 3;
    pub const L_LIST: [usize; 4] = [4, 8, 16, 32];
}

impl RunConfig {
    pub fn default_for(command: Command) -> Self {
        RunConfig::resolve(command, Options::default(), None).expect("defaults resolve")
    }

    /// Applies defaults to merged options. `env_seed` is the raw value of
    /// the seed environment variable, consulted only when no seed was given.
    pub fn resolve(command: Command, opts: Options, env_seed: Option<&str>) -> Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        let seed = match (opts.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(raw)) => raw.trim().parse().unwrap_or_else(|_| {
                violations.push(Violation::new("seed", raw, format!("{SEED_ENV} must be an unsigned integer")));
                defaults::SEED
            }),
            (None, None) => defaults::SEED,
        };
        let l = opts.l.unwrap_or(defaults::L);
        let theta_star = match (opts.theta_star, opts.theta_star_deg) {
            (Some(r), _) => r,
            (None, Some(d)) => d.to_radians(),
            (None, None) => FRAC_PI_2,
        };
        let k_out_default = if command == Command::Fig5 { 2 * l } else { l };
        let config = RunConfig {
            command,
            l,
            k_in: opts.k_in.unwrap_or(l),
            k_out: opts.k_out.unwrap_or(k_out_default),
            theta_star,
            sigma_sq: opts.sigma_sq.unwrap_or(defaults::SIGMA_SQ),
            sigma_n_sq: opts.sigma_n_sq.unwrap_or(defaults::SIGMA_N_SQ),
            epsilon: opts.epsilon.unwrap_or(defaults::EPSILON),
            epsilon_mode: opts.epsilon_mode.unwrap_or_default(),
            trials: opts.trials.unwrap_or(defaults::TRIALS),
            seed,
            grid: opts.grid.unwrap_or(defaults::GRID),
            format: opts.format.unwrap_or_default(),
            c_index: opts.c_index.unwrap_or((l / 2).max(1)),
            omega_steps: opts.omega_steps.unwrap_or(defaults::OMEGA_STEPS),
            dispersion: opts.dispersion.unwrap_or(DEFAULT_DISPERSION),
            l_list: opts.l_list.unwrap_or_else(|| defaults::L_LIST.to_vec()),
            paths: opts.paths.unwrap_or(defaults::PATHS),
            rank_model: opts.rank_model.unwrap_or_default(),
            output: opts.output,
            threads: opts.threads,
        };
        if violations.is_empty() {
            Ok(config)
        } else {
            Err(violations)
        }
    }

    pub fn epsilon(&self) -> Epsilon {
        match self.epsilon_mode {
            EpsilonMode::Absolute => Epsilon::Absolute(self.epsilon),
            EpsilonMode::Relative => Epsilon::Relative(self.epsilon),
        }
    }

    /// Every constraint the configuration breaks; empty when runnable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let positive = |v: &mut Vec<Violation>, field: &'static str, value: usize| {
            if value == 0 {
                v.push(Violation::new(field, value, format!("{field} must be ≥ 1")));
            }
        };
        positive(&mut v, "l", self.l);
        positive(&mut v, "k_in", self.k_in);
        positive(&mut v, "k_out", self.k_out);
        positive(&mut v, "trials", self.trials);
        positive(&mut v, "paths", self.paths);
        if let Some(t) = self.threads {
            positive(&mut v, "threads", t);
        }
        if self.command == Command::Fig5 && self.k_out <= self.l {
            v.push(Violation::new("k_out", self.k_out, "fig5 requires k_out > l"));
        }
        if !(self.theta_star.is_finite() && (0.0..=TAU).contains(&self.theta_star)) {
            v.push(Violation::new("theta_star", self.theta_star, "theta_star must lie in [0, 2π]"));
        }
        if !(self.sigma_sq.is_finite() && self.sigma_sq > 0.0) {
            v.push(Violation::new("sigma_sq", self.sigma_sq, "sigma_sq must be > 0"));
        }
        if !(self.sigma_n_sq.is_finite() && self.sigma_n_sq >= 0.0) {
            v.push(Violation::new("sigma_n_sq", self.sigma_n_sq, "sigma_n_sq must be ≥ 0"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            v.push(Violation::new("epsilon", self.epsilon, "epsilon must be > 0"));
        }
        if self.grid < 2 {
            v.push(Violation::new("grid", self.grid, "grid must be ≥ 2"));
        }
        if matches!(self.command, Command::Fig4 | Command::Sweep) {
            if self.c_index == 0 || self.c_index > self.l {
                v.push(Violation::new("c_index", self.c_index, format!("c_index must lie in 1..={}", self.l)));
            }
            if !(self.dispersion.is_finite() && self.dispersion >= 0.0) {
                v.push(Violation::new("dispersion", self.dispersion, "dispersion must be ≥ 0"));
            }
        }
        if self.command == Command::Sweep && self.omega_steps == 0 {
            v.push(Violation::new("omega_steps", self.omega_steps, "omega_steps must be ≥ 1"));
        }
        if self.command == Command::Diversity {
            let list = self.l_list.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
            if self.l_list.is_empty() || self.l_list.contains(&0) {
                v.push(Violation::new("l_list", &list, "l_list must be non-empty with every l ≥ 1"));
            } else if self.l_list.windows(2).any(|w| w[0] >= w[1]) {
                v.push(Violation::new("l_list", &list, "l_list must be strictly increasing"));
            }
        }
        v
    }
}

/// Merges flags, the optional TOML file and the seed environment variable,
/// then validates.
pub fn load(cli: Cli, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
    let file = match &cli.config {
        Some(path) => Options::from_toml_file(path)?,
        None => Options::default(),
    };
    let merged = cli.options.or(file);
    let config = RunConfig::resolve(cli.command, merged, env_seed).map_err(ConfigError::Invalid)?;
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

//! Command-line and config-file parsing into a validated
//! [`ExperimentConfig`].
//!
//! Every key can be given as a flag (`--a-grid`) or in the TOML file passed
//! with `--config` (`a_grid = "0:0.5:0.01"`). Flags win over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use coordcap::coord_sim::SimScheme;
use coordcap::dsbs_examples::{
    dsbs, key_dist_factorization, rd_d1_factorization, rd_d2_factorization,
};
use coordcap::finite_prob::{Alphabet, JointPmf, Kernel, PmfDocument};
use coordcap::rate_region::vars::{ALL, X, Y, Z};
use coordcap::rate_region::{AuxSizes, Sampler};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ErrorKind, Result};
use crate::grid::parse_grid;

#[derive(Debug, Parser)]
#[command(name = "coordctl", version, about = "Coordination rate regions and coding simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Args)]
pub struct WithConfig<K: Args> {
    /// TOML file with default values for any key of this command.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub keys: K,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Sample the inner bound for a target distribution.
    #[command(allow_negative_numbers = true)]
    Region(WithConfig<RegionKeys>),
    /// Sample outer-bound corners for a target distribution.
    #[command(allow_negative_numbers = true)]
    Outer(WithConfig<OuterKeys>),
    /// Minimal `r1 + r3` of the key-distribution corners over `a`.
    #[command(allow_negative_numbers = true)]
    Sumrate(WithConfig<SumRateKeys>),
    /// Rate-distortion corners of the `D1` and `D2` families.
    #[command(allow_negative_numbers = true)]
    Rd(WithConfig<RdKeys>),
    /// Monte Carlo runs of the coding scheme.
    #[command(allow_negative_numbers = true)]
    Simulate(WithConfig<SimulateKeys>),
    /// Closed-form corners against the generic evaluators.
    #[command(allow_negative_numbers = true)]
    Check(WithConfig<CheckKeys>),
}

/// Flag values take precedence over file values.
pub trait Overlay {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! keys {
    ($name:ident { $($(#[$m:meta])* $field:ident : $ty:ty,)* }) => {
        #[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$m])* pub $field: Option<$ty>,)*
        }

        impl Overlay for $name {
            fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

keys!(RegionKeys {
    /// Directory for output files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Target p(x,y,z): inline JSON or a file path.
    #[arg(long)]
    target: String,
    /// Built-in target when no `target` is given: `key` (Z = X).
    #[arg(long)]
    preset: String,
    /// Pr(X = Y) of the preset source.
    #[arg(long)]
    agreement: f64,
    /// DSBS parameter of the preset source, in [0, 1/2].
    #[arg(long)]
    a: f64,
    /// Alphabet sizes of U, V, W.
    #[arg(long, value_delimiter = ',')]
    aux_sizes: Vec<usize>,
    /// `random` or `grid`.
    #[arg(long)]
    sampler: String,
    /// Random draws per scheme.
    #[arg(long)]
    samples: usize,
    /// Grid spacing of every kernel row.
    #[arg(long)]
    step: f64,
    #[arg(long)]
    seed: u64,
    /// Largest accepted L1 distance between induced and target p(z|x,y).
    #[arg(long)]
    tolerance: f64,
});

keys!(OuterKeys {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long)]
    preset: String,
    #[arg(long)]
    agreement: f64,
    #[arg(long)]
    a: f64,
    #[arg(long, value_delimiter = ',')]
    aux_sizes: Vec<usize>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
});

keys!(SumRateKeys {
    #[arg(long)]
    out_dir: PathBuf,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    a_grid: String,
    #[arg(long)]
    alpha_grid: String,
});

keys!(RdKeys {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    a: f64,
    /// Distortion budget.
    #[arg(long = "D")]
    #[serde(rename = "D")]
    distortion: f64,
    #[arg(long)]
    alpha_grid: String,
    #[arg(long)]
    d_grid: String,
});

keys!(SimulateKeys {
    #[arg(long)]
    out_dir: PathBuf,
    /// Six-variable joint over (X, Y, U, V, W, Z): inline JSON or a path.
    #[arg(long)]
    joint: String,
    /// Target p(x,y,z); defaults to the joint's marginal.
    #[arg(long)]
    target: String,
    /// Built-in joint when no `joint` is given: `key`, `rd1` or `rd2`.
    #[arg(long)]
    preset: String,
    #[arg(long)]
    agreement: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    d: f64,
    /// `SCHEME_1` or `SCHEME_2` (or `1`, `2`).
    #[arg(long)]
    scheme: String,
    /// Block lengths.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    trials: usize,
    /// Seed of the first trial; trial `i` uses `seed + i`.
    #[arg(long)]
    seed: u64,
});

keys!(CheckKeys {
    #[arg(long)]
    out_dir: PathBuf,
    /// Values used for every parameter of the suite.
    #[arg(long)]
    grid: String,
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Region,
    Outer,
    Sumrate,
    Rd,
    Simulate,
    Check,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Region => "region",
            CommandName::Outer => "outer",
            CommandName::Sumrate => "sumrate",
            CommandName::Rd => "rd",
            CommandName::Simulate => "simulate",
            CommandName::Check => "check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "sampler", rename_all = "lowercase")]
pub enum SamplerConfig {
    Random { samples: usize, seed: u64 },
    Grid { step: f64 },
}

impl SamplerConfig {
    pub fn sampler(&self) -> Sampler {
        match *self {
            SamplerConfig::Random { samples, seed } => Sampler::Random {
                count: samples,
                seed,
            },
            SamplerConfig::Grid { step } => Sampler::Grid { step },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionConfig {
    pub target: PmfDocument,
    pub aux_sizes: AuxSizes,
    #[serde(flatten)]
    pub sampler: SamplerConfig,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterConfig {
    pub target: PmfDocument,
    pub aux_sizes: AuxSizes,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateConfig {
    pub a_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdConfig {
    pub a: f64,
    #[serde(rename = "D")]
    pub distortion: f64,
    pub alpha_grid: Vec<f64>,
    pub d_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub joint: PmfDocument,
    pub target: PmfDocument,
    pub scheme: SimScheme,
    pub n: Vec<usize>,
    pub delta: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckConfig {
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Region(RegionConfig),
    Outer(OuterConfig),
    Sumrate(SumRateConfig),
    Rd(RdConfig),
    Simulate(SimulateConfig),
    Check(CheckConfig),
}

/// A fully resolved and validated command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: CommandName,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub params: Params,
}

pub const DEFAULT_AGREEMENT: f64 = 0.7;
pub const DEFAULT_ALPHA: f64 = 0.2;
pub const DEFAULT_D: f64 = 0.1;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// 101 points on [0, 1/2].
const DEFAULT_CURVE_GRID: &str = "0:0.5:0.005";
/// 21 points per parameter keep the 21^3 consistency sweep quick.
const DEFAULT_CHECK_GRID: &str = "0:0.5:0.025";

fn read_config_file<K: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<K> {
    let Some(path) = path else {
        return Ok(K::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(ErrorKind::Config, Some("config"), format!("{}: {e}", path.display()))
    })?;
    toml::from_str(&text).map_err(|e| {
        let message = e.message().to_string();
        // toml reports unknown keys as "unknown field `name`, expected ...".
        let key = message
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
            .map(str::to_string);
        CliError {
            kind: ErrorKind::Config,
            key,
            message: format!("{}: {message}", path.display()),
        }
    })
}

fn in_range(key: &str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(value)
    } else {
        Err(CliError::range(key, value, &format!("[{lo}, {hi}]")))
    }
}

fn grid(key: &str, spec: &str, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let values = parse_grid(key, spec)?;
    for &v in &values {
        in_range(key, v, lo, hi)?;
    }
    Ok(values)
}

fn aux_sizes(values: Option<Vec<usize>>) -> Result<AuxSizes> {
    match values.as_deref() {
        None => Ok(AuxSizes::default()),
        Some(&[u, v, w]) if u > 0 && v > 0 && w > 0 => Ok(AuxSizes { u, v, w }),
        Some(_) => Err(CliError::validation(
            "aux_sizes",
            "expected three positive sizes for U, V, W",
        )),
    }
}

/// Reads a pmf given inline (`{...}`) or as a path to a JSON file.
fn load_pmf(key: &str, source: &str) -> Result<JointPmf> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source).map_err(|e| {
            CliError::validation(key, format!("cannot read `{source}`: {e}"))
        })?
    };
    JointPmf::from_json(&text).map_err(|e| CliError::validation(key, e.to_string()))
}

/// The `(X, Y)` source of a preset.
fn preset_source(agreement: Option<f64>, a: Option<f64>) -> Result<JointPmf> {
    let built = match (agreement, a) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation("a", "`a` and `agreement` are mutually exclusive"))
        }
        (None, Some(a)) => dsbs(in_range("a", a, 0.0, 0.5)?),
        (agreement, None) => {
            let p = in_range("agreement", agreement.unwrap_or(DEFAULT_AGREEMENT), 0.0, 1.0)?;
            JointPmf::doubly_symmetric(X, Y, p).map_err(Into::into)
        }
    };
    built.map_err(|e| CliError::module("building the preset source", e))
}

fn check_preset(preset: Option<String>, allowed: &[&str]) -> Result<String> {
    let preset = preset.unwrap_or_else(|| allowed[0].to_string());
    if !allowed.contains(&preset.as_str()) {
        return Err(CliError::validation(
            "preset",
            format!("unknown preset `{preset}` (expected one of {allowed:?})"),
        ));
    }
    Ok(preset)
}

fn key_target(source: &JointPmf) -> Result<JointPmf> {
    let x: &Alphabet = source.alphabet(X).expect("preset source has X");
    let copy = Kernel::copy(x, Z).map_err(|e| CliError::module("building the target", e))?;
    source
        .compose(&[copy])
        .map_err(|e| CliError::module("building the target", e))
}

fn target_or_preset(
    target: Option<String>,
    preset: Option<String>,
    agreement: Option<f64>,
    a: Option<f64>,
) -> Result<JointPmf> {
    match target {
        Some(t) => {
            if preset.is_some() || agreement.is_some() || a.is_some() {
                return Err(CliError::validation(
                    "target",
                    "`target` cannot be combined with preset keys",
                ));
            }
            load_pmf("target", &t)
        }
        None => {
            check_preset(preset, &["key"])?;
            key_target(&preset_source(agreement, a)?)
        }
    }
}

fn positive(key: &str, value: usize) -> Result<usize> {
    if value == 0 {
        return Err(CliError::validation(key, format!("{key} must be at least 1")));
    }
    Ok(value)
}

fn resolve_region(k: RegionKeys) -> Result<(Option<PathBuf>, Params)> {
    let target = target_or_preset(k.target, k.preset, k.agreement, k.a)?;
    let sampler = match k.sampler.as_deref().unwrap_or("random") {
        "random" => {
            if k.step.is_some() {
                return Err(CliError::validation("step", "`step` requires sampler = \"grid\""));
            }
            SamplerConfig::Random {
                samples: positive("samples", k.samples.unwrap_or(DEFAULT_SAMPLES))?,
                seed: k.seed.unwrap_or(1),
            }
        }
        "grid" => {
            if k.samples.is_some() || k.seed.is_some() {
                return Err(CliError::validation(
                    "sampler",
                    "`samples` and `seed` apply only to sampler = \"random\"",
                ));
            }
            let step = k
                .step
                .ok_or_else(|| CliError::validation("step", "grid sampling needs `step`"))?;
            SamplerConfig::Grid {
                step: in_range("step", step, f64::MIN_POSITIVE, 1.0)?,
            }
        }
        other => {
            return Err(CliError::validation(
                "sampler",
                format!("unknown sampler `{other}` (expected random or grid)"),
            ))
        }
    };
    let tolerance = k.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CliError::range("tolerance", tolerance, "(0, inf)"));
    }
    Ok((
        k.out_dir,
        Params::Region(RegionConfig {
            target: PmfDocument::from_pmf(&target),
            aux_sizes: aux_sizes(k.aux_sizes)?,
            sampler,
            tolerance,
        }),
    ))
}

fn resolve_outer(k: OuterKeys) -> Result<(Option<PathBuf>, Params)> {
    let target = target_or_preset(k.target, k.preset, k.agreement, k.a)?;
    Ok((
        k.out_dir,
        Params::Outer(OuterConfig {
            target: PmfDocument::from_pmf(&target),
            aux_sizes: aux_sizes(k.aux_sizes)?,
            samples: positive("samples", k.samples.unwrap_or(DEFAULT_SAMPLES))?,
            seed: k.seed.unwrap_or(1),
        }),
    ))
}

fn resolve_sumrate(k: SumRateKeys) -> Result<(Option<PathBuf>, Params)> {
    let a_grid = k.a_grid.as_deref().unwrap_or(DEFAULT_CURVE_GRID);
    let alpha_grid = k.alpha_grid.as_deref().unwrap_or(DEFAULT_CURVE_GRID);
    Ok((
        k.out_dir,
        Params::Sumrate(SumRateConfig {
            a_grid: grid("a_grid", a_grid, 0.0, 0.5)?,
            alpha_grid: grid("alpha_grid", alpha_grid, 0.0, 0.5)?,
        }),
    ))
}

fn resolve_rd(k: RdKeys) -> Result<(Option<PathBuf>, Params)> {
    let alpha_grid = k.alpha_grid.as_deref().unwrap_or(DEFAULT_CURVE_GRID);
    let d_grid = k.d_grid.as_deref().unwrap_or(DEFAULT_CURVE_GRID);
    Ok((
        k.out_dir,
        Params::Rd(RdConfig {
            a: in_range("a", k.a.unwrap_or(0.25), 0.0, 0.5)?,
            distortion: in_range("D", k.distortion.unwrap_or(0.25), 0.0, 0.5)?,
            alpha_grid: grid("alpha_grid", alpha_grid, 0.0, 0.5)?,
            d_grid: grid("d_grid", d_grid, 0.0, 0.5)?,
        }),
    ))
}

fn resolve_simulate(k: SimulateKeys) -> Result<(Option<PathBuf>, Params)> {
    let preset_keys = k.preset.is_some()
        || k.agreement.is_some()
        || k.a.is_some()
        || k.alpha.is_some()
        || k.d.is_some();
    let (joint, default_scheme) = match k.joint {
        Some(j) => {
            if preset_keys {
                return Err(CliError::validation(
                    "joint",
                    "`joint` cannot be combined with preset keys",
                ));
            }
            let joint = load_pmf("joint", &j)?
                .reorder(&ALL)
                .map_err(|e| CliError::validation("joint", e.to_string()))?;
            (joint, None)
        }
        None => {
            let preset = check_preset(k.preset, &["key", "rd1", "rd2"])?;
            let source = preset_source(k.agreement, k.a)?;
            let alpha = in_range("alpha", k.alpha.unwrap_or(DEFAULT_ALPHA), 0.0, 0.5)?;
            if preset == "key" && k.d.is_some() {
                return Err(CliError::validation("d", "the key preset has no `d`"));
            }
            let d = in_range("d", k.d.unwrap_or(DEFAULT_D), 0.0, 0.5)?;
            let (fact, scheme) = match preset.as_str() {
                "key" => (key_dist_factorization(alpha), SimScheme::Two),
                "rd1" => (rd_d1_factorization(alpha, d), SimScheme::One),
                _ => (rd_d2_factorization(alpha, d), SimScheme::Two),
            };
            let joint = fact
                .map_err(|e| CliError::module("building the preset joint", e))?
                .compose(&source)
                .map_err(|e| CliError::module("building the preset joint", e))?;
            (joint, Some(scheme))
        }
    };
    let scheme = match k.scheme {
        Some(s) => SimScheme::parse(&s).ok_or_else(|| {
            CliError::validation("scheme", format!("unknown scheme `{s}` (expected SCHEME_1 or SCHEME_2)"))
        })?,
        None => default_scheme
            .ok_or_else(|| CliError::validation("scheme", "`scheme` is required with `joint`"))?,
    };
    let target = match k.target {
        Some(t) => load_pmf("target", &t)?,
        None => joint
            .marginalize(&[X, Y, Z])
            .map_err(|e| CliError::module("marginalizing the joint", e))?,
    };
    let n = k.n.unwrap_or_else(|| vec![8, 12, 16]);
    if n.is_empty() || n.contains(&0) {
        return Err(CliError::validation("n", "block lengths must be positive"));
    }
    let delta = k.delta.unwrap_or(0.25);
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(CliError::range("delta", delta, "[0, inf)"));
    }
    Ok((
        k.out_dir,
        Params::Simulate(SimulateConfig {
            joint: PmfDocument::from_pmf(&joint),
            target: PmfDocument::from_pmf(&target),
            scheme,
            n,
            delta,
            epsilon: in_range("epsilon", k.epsilon.unwrap_or(0.35), 0.0, 2.0)?,
            trials: positive("trials", k.trials.unwrap_or(500))?,
            seed: k.seed.unwrap_or(1),
        }),
    ))
}

fn resolve_check(k: CheckKeys) -> Result<(Option<PathBuf>, Params)> {
    let g = k.grid.as_deref().unwrap_or(DEFAULT_CHECK_GRID);
    Ok((
        k.out_dir,
        Params::Check(CheckConfig {
            grid: grid("grid", g, 0.0, 0.5)?,
        }),
    ))
}

fn layer<K>(args: WithConfig<K>) -> Result<K>
where
    K: Args + for<'de> Deserialize<'de> + Default + Overlay,
{
    let file = read_config_file::<K>(args.config.as_deref())?;
    Ok(args.keys.overlay(file))
}

/// Parses and validates a full command line (program name first).
pub fn parse_config<I, T>(args: I) -> Result<ExperimentConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)
        .map_err(|e| CliError::new(ErrorKind::Usage, None, e.to_string().trim_end()))?;
    resolve(cli.command)
}

pub fn resolve(command: CommandArgs) -> Result<ExperimentConfig> {
    let (name, (out_dir, params)) = match command {
        CommandArgs::Region(a) => (CommandName::Region, resolve_region(layer(a)?)?),
        CommandArgs::Outer(a) => (CommandName::Outer, resolve_outer(layer(a)?)?),
        CommandArgs::Sumrate(a) => (CommandName::Sumrate, resolve_sumrate(layer(a)?)?),
        CommandArgs::Rd(a) => (CommandName::Rd, resolve_rd(layer(a)?)?),
        CommandArgs::Simulate(a) => (CommandName::Simulate, resolve_simulate(layer(a)?)?),
        CommandArgs::Check(a) => (CommandName::Check, resolve_check(layer(a)?)?),
    };
    Ok(ExperimentConfig {
        command: name,
        out_dir: out_dir.unwrap_or_else(|| PathBuf::from(".")),
        params,
    })
}

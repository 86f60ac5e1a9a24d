//! Run configuration: flags, `key = value` files and their resolution.

use std::fmt;
use std::path::{Path, PathBuf};

use ch_parareal::{
    AlgorithmVariant, FineSolver, InitialCondition, NnConfig, NnParams, ParerealConfig, SpatialGrid, TimePartition,
};
use clap::{Args, Parser, ValueEnum};

use crate::error::{CliError, Result};
use crate::trace::format_f64;

/// Every key accepted in a config file or trace header, in header order.
pub const KEYS: [&str; 16] = [
    "algorithm",
    "dim",
    "T",
    "N",
    "J",
    "h-den",
    "eps",
    "tol",
    "max-iter",
    "ic",
    "fine",
    "nn-sub",
    "theta",
    "nn-tol",
    "workers",
    "j-downscale",
];

/// Keys that only matter with `fine = nn`.
const NN_KEYS: [&str; 3] = ["nn-sub", "theta", "nn-tol"];

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FineKind {
    Direct,
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FineChoice {
    Direct,
    NeumannNeumann { subdomains: usize, theta: f64, nn_tol: f64 },
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmVariant,
    pub dim: usize,
    pub t_final: f64,
    pub slices: usize,
    pub fine_steps: usize,
    /// Mesh width is `1 / h_den`.
    pub h_den: usize,
    pub eps: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub ic: InitialCondition,
    pub fine: FineChoice,
    pub workers: usize,
    /// `fine_steps` was divided by this factor from the published value.
    pub j_downscale: usize,
    pub output: Option<PathBuf>,
}

/// A partial configuration. Layers are merged field by field, later ones
/// winning, and [`Overrides::resolve`] fills in the defaults.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Overrides {
    /// pa1, pa2, pa3, npa1 or npa2 (also PA-I, NPA-II, ...)
    #[arg(long)]
    pub algorithm: Option<AlgorithmVariant>,
    /// Spatial dimension, 1 or 2
    #[arg(long)]
    pub dim: Option<usize>,
    /// Final time
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Number of time slices
    #[arg(long = "N")]
    pub slices: Option<usize>,
    /// Fine steps per slice
    #[arg(long = "J")]
    pub fine_steps: Option<usize>,
    /// Denominator of the mesh width h
    #[arg(long = "h-den")]
    pub h_den: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stopping tolerance on the error [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap [default: N + 2]
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// random[:seed[:amplitude]] or sine[:amplitude[:mode]]
    #[arg(long)]
    pub ic: Option<InitialCondition>,
    #[arg(long, value_enum)]
    pub fine: Option<FineKind>,
    /// Neumann-Neumann subdomain count
    #[arg(long = "nn-sub")]
    pub nn_sub: Option<usize>,
    /// Neumann-Neumann relaxation parameter
    #[arg(long)]
    pub theta: Option<f64>,
    /// Neumann-Neumann interface tolerance
    #[arg(long = "nn-tol")]
    pub nn_tol: Option<f64>,
    /// Worker threads for the fine sweeps [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "j-downscale", hide = true)]
    pub j_downscale: Option<usize>,
    /// Trace file to write; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Where a configuration comes from. Layers apply in order: preset, config
/// file, flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigSource {
    /// Start from a named preset (see `ch-parareal presets`)
    #[arg(long)]
    pub preset: Option<String>,
    /// `key = value` file with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl ConfigSource {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut layers = Overrides::default();
        if let Some(name) = &self.preset {
            layers = crate::presets::preset_overrides(name)?;
        }
        if let Some(path) = &self.config {
            layers = layers.merge(Overrides::from_config_file(path)?);
        }
        layers.merge(self.overrides.clone()).resolve()
    }
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct FlagArgs {
    #[command(flatten)]
    source: ConfigSource,
}

/// Parse command-line flags (without the program name) into a validated
/// configuration.
///
/// ```
/// use ch_parareal_cli::parse_config;
///
/// let c = parse_config(["--algorithm", "pa1", "--fine", "nn", "--nn-sub", "8", "--theta", "0.25"])?;
/// assert_eq!(c.max_iter, 22);
/// # Ok::<(), ch_parareal_cli::CliError>(())
/// ```
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = FlagArgs::try_parse_from(args)
        .map_err(|e| CliError::Config(e.to_string().trim_start_matches("error: ").trim().to_owned()))?;
    flags.source.resolve()
}

#[derive(Parser)]
#[command(no_binary_name = true, disable_help_flag = true)]
struct KeyValueArgs {
    #[command(flatten)]
    overrides: Overrides,
}

macro_rules! merge_fields {
    ($self:ident, $other:ident, $($field:ident),*) => {
        Overrides { $($field: $other.$field.or($self.$field)),* }
    };
}

impl Overrides {
    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: Overrides) -> Overrides {
        merge_fields!(
            self,
            other,
            algorithm,
            dim,
            t_final,
            slices,
            fine_steps,
            h_den,
            eps,
            tol,
            max_iter,
            ic,
            fine,
            nn_sub,
            theta,
            nn_tol,
            workers,
            j_downscale,
            output
        )
    }

    /// Parse `key = value` pairs with the same names and value syntax as the
    /// command-line flags.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Overrides> {
        let mut args = Vec::new();
        for (key, value) in pairs {
            if key != "output" && !KEYS.contains(&key) {
                return Err(CliError::Config(format!(
                    "unknown key `{key}` (expected one of: {}, output)",
                    KEYS.join(", ")
                )));
            }
            args.push(format!("--{key}={value}"));
        }
        KeyValueArgs::try_parse_from(args)
            .map(|a| a.overrides)
            .map_err(|e| CliError::Config(e.to_string().trim_start_matches("error: ").trim().to_owned()))
    }

    /// Parse a config file: one `key = value` per line, `#` comments and
    /// blank lines ignored.
    pub fn from_config_text(text: &str) -> Result<Overrides> {
        let mut merged = Overrides::default();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`, got `{line}`", number + 1))
            })?;
            let layer = Overrides::from_pairs([(key.trim(), value.trim())])
                .map_err(|e| CliError::Config(format!("line {}: {e}", number + 1)))?;
            merged = merged.merge(layer);
        }
        Ok(merged)
    }

    pub fn from_config_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Overrides::from_config_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Apply defaults and validate.
    pub fn resolve(self) -> Result<RunConfig> {
        let algorithm = self.algorithm.ok_or_else(|| {
            CliError::Config("missing required field `algorithm` (pa1, pa2, pa3, npa1 or npa2)".into())
        })?;
        let slices = self.slices.unwrap_or(20);
        let fine = match self.fine.unwrap_or(FineKind::Direct) {
            FineKind::Direct => FineChoice::Direct,
            FineKind::Nn => {
                let defaults = NnParams::default();
                FineChoice::NeumannNeumann {
                    subdomains: self.nn_sub.unwrap_or(8),
                    theta: self.theta.unwrap_or(defaults.theta),
                    nn_tol: self.nn_tol.unwrap_or(defaults.nn_tol),
                }
            }
        };
        let config = RunConfig {
            algorithm,
            dim: self.dim.unwrap_or(1),
            t_final: self.t_final.unwrap_or(1.0),
            slices,
            fine_steps: self.fine_steps.unwrap_or(200),
            h_den: self.h_den.unwrap_or(64),
            eps: self.eps.unwrap_or(0.0725),
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            max_iter: self.max_iter.unwrap_or(slices + 2),
            ic: self.ic.unwrap_or_default(),
            fine,
            workers: self.workers.unwrap_or_else(default_workers),
            j_downscale: self.j_downscale.unwrap_or(1),
            output: self.output,
        };
        config.validate()?;
        Ok(config)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn invalid(field: &str, reason: impl fmt::Display) -> CliError {
    CliError::Config(format!("invalid `{field}`: {reason}"))
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {value}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(invalid("dim", format!("must be 1 or 2, got {}", self.dim)));
        }
        positive("T", self.t_final)?;
        positive("eps", self.eps)?;
        positive("tol", self.tol)?;
        for (field, value) in [
            ("N", self.slices),
            ("J", self.fine_steps),
            ("workers", self.workers),
            ("j-downscale", self.j_downscale),
        ] {
            if value == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        if self.h_den < 3 {
            return Err(invalid("h-den", format!("must be at least 3, got {}", self.h_den)));
        }
        match self.ic {
            InitialCondition::SeededRandom { amplitude, .. } | InitialCondition::Sine { amplitude, .. }
                if !amplitude.is_finite() =>
            {
                return Err(invalid("ic", "amplitude must be finite"))
            }
            _ => {}
        }
        if let FineChoice::NeumannNeumann {
            subdomains,
            theta,
            nn_tol,
        } = self.fine
        {
            if self.dim != 1 {
                return Err(invalid("fine", "the Neumann-Neumann fine solver is 1D only"));
            }
            if !matches!(self.algorithm, AlgorithmVariant::Pa1 | AlgorithmVariant::Pa3) {
                return Err(invalid(
                    "fine",
                    format!(
                        "the Neumann-Neumann fine solver needs pa1 or pa3, not {}",
                        self.algorithm
                    ),
                ));
            }
            if subdomains < 2 || self.h_den < 2 * subdomains {
                return Err(invalid(
                    "nn-sub",
                    format!(
                        "need 2 <= nn-sub <= h-den / 2, got {subdomains} with h-den {}",
                        self.h_den
                    ),
                ));
            }
            if !(theta > 0.0 && theta < 1.0) {
                return Err(invalid("theta", format!("must lie in (0, 1), got {theta}")));
            }
            positive("nn-tol", nn_tol)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        Ok(SpatialGrid::from_h_denominator(self.dim, self.h_den)?)
    }

    pub fn partition(&self) -> Result<TimePartition> {
        Ok(TimePartition::new(self.t_final, self.slices, self.fine_steps)?)
    }

    pub fn parareal_config(&self) -> Result<ParerealConfig> {
        let fine = match self.fine {
            FineChoice::Direct => FineSolver::Direct,
            FineChoice::NeumannNeumann {
                subdomains,
                theta,
                nn_tol,
            } => FineSolver::NeumannNeumann(NnConfig {
                subdomains,
                params: NnParams {
                    theta,
                    nn_tol,
                    ..NnParams::default()
                },
            }),
        };
        Ok(ParerealConfig::new(self.algorithm, self.partition()?, self.eps)
            .with_workers(self.workers)
            .with_fine_solver(fine))
    }

    /// `(key, value)` pairs that [`Overrides::from_pairs`] maps back to this
    /// configuration.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("algorithm", self.algorithm.name().to_owned()),
            ("dim", self.dim.to_string()),
            ("T", format_f64(self.t_final)),
            ("N", self.slices.to_string()),
            ("J", self.fine_steps.to_string()),
            ("h-den", self.h_den.to_string()),
            ("eps", format_f64(self.eps)),
            ("tol", format_f64(self.tol)),
            ("max-iter", self.max_iter.to_string()),
            ("ic", self.ic.to_string()),
        ];
        match self.fine {
            FineChoice::Direct => pairs.push(("fine", "direct".into())),
            FineChoice::NeumannNeumann {
                subdomains,
                theta,
                nn_tol,
            } => {
                pairs.push(("fine", "nn".into()));
                pairs.push(("nn-sub", subdomains.to_string()));
                pairs.push(("theta", format_f64(theta)));
                pairs.push(("nn-tol", format_f64(nn_tol)));
            }
        }
        pairs.push(("workers", self.workers.to_string()));
        pairs.push(("j-downscale", self.j_downscale.to_string()));
        if let Some(path) = &self.output {
            pairs.push(("output", path.display().to_string()));
        }
        pairs
    }

    /// Inverse of [`RunConfig::to_pairs`].
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<RunConfig> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let direct = pairs.iter().any(|&(k, v)| k == "fine" && v == "direct");
        if direct {
            if let Some((key, _)) = pairs.iter().find(|(k, _)| NN_KEYS.contains(k)) {
                return Err(CliError::Config(format!("`{key}` is only meaningful with `fine = nn`")));
            }
        }
        Overrides::from_pairs(pairs)?.resolve()
    }

    /// Fine steps per slice of the published configuration.
    pub fn published_fine_steps(&self) -> usize {
        self.fine_steps * self.j_downscale
    }
}

impl From<&RunConfig> for Overrides {
    fn from(c: &RunConfig) -> Self {
        let (fine, nn_sub, theta, nn_tol) = match c.fine {
            FineChoice::Direct => (FineKind::Direct, None, None, None),
            FineChoice::NeumannNeumann {
                subdomains,
                theta,
                nn_tol,
            } => (FineKind::Nn, Some(subdomains), Some(theta), Some(nn_tol)),
        };
        Overrides {
            algorithm: Some(c.algorithm),
            dim: Some(c.dim),
            t_final: Some(c.t_final),
            slices: Some(c.slices),
            fine_steps: Some(c.fine_steps),
            h_den: Some(c.h_den),
            eps: Some(c.eps),
            tol: Some(c.tol),
            max_iter: Some(c.max_iter),
            ic: Some(c.ic),
            fine: Some(fine),
            nn_sub,
            theta,
            nn_tol,
            workers: Some(c.workers),
            j_downscale: Some(c.j_downscale),
            output: c.output.clone(),
        }
    }
}

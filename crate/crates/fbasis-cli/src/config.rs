//! Suite configuration, tolerances and the error type of the runner.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

/// Largest lattice length the suites accept.
pub const MAX_LMAX: usize = 6;

/// Verification suite to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Scalar weight relations, three-state invariants and operator-level R-matrix identities.
    WeightsCheck,
    /// Factorization of `R^σ` by the F-matrix and its companion identities.
    Factorization,
    /// Twisted monodromy blocks against their closed forms.
    TwistCompare,
    /// Agreement of the partition-function routes and the operator exchange relations.
    DwpfAgree,
    /// Every suite above on one model.
    All,
}

impl Suite {
    /// Command-line name of the suite.
    pub fn name(self) -> &'static str {
        match self {
            Suite::WeightsCheck => "weights-check",
            Suite::Factorization => "factorization",
            Suite::TwistCompare => "twist-compare",
            Suite::DwpfAgree => "dwpf-agree",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the weight table comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelSource {
    /// Seeded random point of the three-state del Pezzo family.
    DelPezzo,
    /// Seeded Perk-Schultz model.
    PerkSchultz,
    /// Weight-table document read from a file.
    Custom(PathBuf),
}

impl ModelSource {
    /// Name recorded in reports.
    pub fn name(&self) -> &'static str {
        match self {
            ModelSource::DelPezzo => "del-pezzo",
            ModelSource::PerkSchultz => "perk-schultz",
            ModelSource::Custom(_) => "custom",
        }
    }
}

/// Model selector accepted by `--model`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// Random del Pezzo point.
    DelPezzo,
    /// Perk-Schultz model.
    PerkSchultz,
    /// Table given by `--custom-table`.
    Custom,
}

/// Report file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Pretty-printed JSON document.
    Json,
    /// One row per residual.
    Csv,
}

/// Pass thresholds of the individual check families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Scalar weight relations and invariants.
    pub weights: f64,
    /// Operator-level R-matrix identities.
    pub matrix: f64,
    /// Factorization and exchange identities.
    pub factorization: f64,
    /// Twisted blocks against closed forms.
    pub twist: f64,
    /// Magnitude of twisted entries that vanish identically.
    pub vanishing: f64,
    /// Relative gap between partition-function routes.
    pub dwpf: f64,
    /// Operator exchange relations.
    pub commute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            weights: 1e-9,
            matrix: 1e-9,
            factorization: 1e-9,
            twist: 1e-9,
            vanishing: 1e-10,
            dwpf: 1e-8,
            commute: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every family set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self {
            weights: tol,
            matrix: tol,
            factorization: tol,
            twist: tol,
            vanishing: tol,
            dwpf: tol,
            commute: tol,
        }
    }
}

/// Full configuration of one suite run.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Suite to run.
    pub suite: Suite,
    /// Source of the weight table.
    pub model: ModelSource,
    /// Seed of the ChaCha8 generator for sampled models.
    pub seed: u64,
    /// Largest lattice length L.
    pub lmax: usize,
    /// Pass thresholds.
    pub tolerances: Tolerances,
}

impl SuiteConfig {
    /// Configuration with seed 0, `lmax = 4` and default tolerances.
    pub fn new(suite: Suite, model: ModelSource) -> Self {
        Self {
            suite,
            model,
            seed: 0,
            lmax: 4,
            tolerances: Tolerances::default(),
        }
    }

    /// Checks ranges of the numeric options.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lmax == 0 || self.lmax > MAX_LMAX {
            return Err(ConfigError::InvalidOption {
                option: "--lmax",
                reason: format!("{} is outside 1..={MAX_LMAX}", self.lmax),
            });
        }
        let t = &self.tolerances;
        for v in [
            t.weights,
            t.matrix,
            t.factorization,
            t.twist,
            t.vanishing,
            t.dwpf,
            t.commute,
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::InvalidOption {
                    option: "--tol",
                    reason: format!("{v} is not a positive finite number"),
                });
            }
        }
        Ok(())
    }
}

/// Invalid configuration; the binary exits with status 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// An option value is outside its allowed range.
    #[error("invalid value for {option}: {reason}")]
    InvalidOption {
        /// Option name.
        option: &'static str,
        /// What is wrong with the value.
        reason: String,
    },
    /// `--model custom` was selected without a table path.
    #[error("--model custom requires --custom-table")]
    MissingCustomTable,
    /// A file named on the command line could not be read.
    #[error("cannot read {path}: {source}")]
    Unreadable {
        /// File path.
        path: PathBuf,
        /// Underlying I/O error.
        source: std::io::Error,
    },
    /// The custom weight table is not a valid document.
    #[error("malformed custom table {path}: {reason}")]
    MalformedTable {
        /// File path.
        path: PathBuf,
        /// Parse or validation failure.
        reason: String,
    },
    /// The partition-function instance is malformed or incomplete.
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    /// `FBASIS_THREADS` is not a positive integer.
    #[error("FBASIS_THREADS must be a positive integer, got {0:?}")]
    Threads(String),
}

/// Failure of a run.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Invalid configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A numerical module reported an error.
    #[error(transparent)]
    Model(#[from] fbasis_core::Error),
    /// Writing the report failed.
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    /// Serializing the report failed.
    #[error("cannot serialize report: {0}")]
    Serialize(String),
}

impl RunError {
    /// Process exit status: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

//! Argument parsing and dispatch for the `fbasis` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ModelArg, ModelSource, OutputFormat, RunError, Suite, SuiteConfig, Tolerances};
use crate::instance::{compute_dwpf, InstanceDocument};
use crate::suites::run_suite;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "FBASIS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fbasis",
    version,
    about = "Verification suites for factorized F-matrices of U(1)^(N-1) vertex models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weight relations, three-state invariants and R-matrix operator identities.
    WeightsCheck(SuiteArgs),
    /// Factorization of R^σ over the symmetric group.
    Factorization(SuiteArgs),
    /// Twisted monodromy blocks against their closed forms.
    TwistCompare(SuiteArgs),
    /// Agreement of partition-function routes and exchange relations.
    DwpfAgree(SuiteArgs),
    /// Every suite.
    All(SuiteArgs),
    /// Evaluate one domain-wall partition function along every route.
    Dwpf(DwpfArgs),
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Weight-table source.
    #[arg(long, value_enum, default_value = "del-pezzo")]
    model: ModelArg,
    /// Seed of the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest lattice length.
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    /// Single threshold replacing every default tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Weight-table document used with `--model custom`.
    #[arg(long)]
    custom_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DwpfArgs {
    /// Instance document; replaces `--kind`, `--L`, `--q` and `--seed`.
    #[arg(long, conflicts_with_all = ["kind", "l", "q"])]
    instance: Option<PathBuf>,
    /// Kind: C2, B2, C1, B1, mixedC or mixedB.
    #[arg(long)]
    kind: Option<String>,
    /// Number of sites.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Comma-separated 1-based positions of state 1 for mixed kinds.
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
    /// Seed of the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight-table source.
    #[arg(long, value_enum, default_value = "del-pezzo")]
    model: ModelArg,
    /// Weight-table document used with `--model custom`.
    #[arg(long)]
    custom_table: Option<PathBuf>,
    /// Agreement threshold between routes.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Result path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn model_source(model: ModelArg, custom: Option<PathBuf>) -> Result<ModelSource, ConfigError> {
    match (model, custom) {
        (ModelArg::Custom, Some(p)) => Ok(ModelSource::Custom(p)),
        (ModelArg::Custom, None) => Err(ConfigError::MissingCustomTable),
        (_, Some(_)) => Err(ConfigError::InvalidOption {
            option: "--custom-table",
            reason: "only valid with --model custom".to_string(),
        }),
        (ModelArg::DelPezzo, None) => Ok(ModelSource::DelPezzo),
        (ModelArg::PerkSchultz, None) => Ok(ModelSource::PerkSchultz),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn run_suite_command(
    suite: Suite,
    a: SuiteArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool, RunError> {
    let mut config = SuiteConfig::new(suite, model_source(a.model, a.custom_table)?);
    config.seed = a.seed;
    config.lmax = a.lmax;
    if let Some(t) = a.tol {
        config.tolerances = Tolerances::uniform(t);
    }
    let report = run_suite(&config)?;
    let mut buf = Vec::new();
    report.write(a.format, &mut buf)?;
    emit(&a.out, &buf, stdout)?;
    for e in report.failing() {
        writeln!(
            stderr,
            "FAIL {} [{}] relative residual {:e}",
            e.report.relation,
            e.report.arguments.join(" "),
            e.report.relative
        )?;
    }
    writeln!(
        stderr,
        "{}: {} checks, {} failures",
        report.suite, report.checks, report.failures
    )?;
    Ok(report.passed())
}

fn run_dwpf_command(a: DwpfArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, RunError> {
    let custom = match model_source(a.model, a.custom_table)? {
        ModelSource::Custom(p) => Some(p),
        _ => None,
    };
    let doc = match a.instance {
        Some(path) => {
            let raw = std::fs::read_to_string(&path).map_err(|source| ConfigError::Unreadable { path, source })?;
            serde_json::from_str(&raw).map_err(|e| ConfigError::MalformedInstance(e.to_string()))?
        }
        None => InstanceDocument {
            kind: a
                .kind
                .ok_or_else(|| ConfigError::MalformedInstance("--kind is required".to_string()))?,
            l: a.l
                .ok_or_else(|| ConfigError::MalformedInstance("--L is required".to_string()))?,
            m: None,
            q: a.q,
            seed: a.seed,
            model: (a.model == ModelArg::PerkSchultz).then(|| "perk-schultz".to_string()),
            xi: None,
            nu: None,
            anisotropy: None,
        },
    };
    let result = compute_dwpf(&doc, custom, a.tol)?;
    let mut text = serde_json::to_string_pretty(&result).map_err(|e| RunError::Serialize(e.to_string()))?;
    text.push('\n');
    emit(&a.out, text.as_bytes(), stdout)?;
    for r in &result.residuals {
        writeln!(
            stderr,
            "{} relative gap {:e} {}",
            r.relation,
            r.relative,
            if r.pass { "ok" } else { "FAIL" }
        )?;
    }
    Ok(result.pass)
}

fn thread_count() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Threads(v)),
        },
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, RunError> {
    match command {
        Command::WeightsCheck(a) => run_suite_command(Suite::WeightsCheck, a, stdout, stderr),
        Command::Factorization(a) => run_suite_command(Suite::Factorization, a, stdout, stderr),
        Command::TwistCompare(a) => run_suite_command(Suite::TwistCompare, a, stdout, stderr),
        Command::DwpfAgree(a) => run_suite_command(Suite::DwpfAgree, a, stdout, stderr),
        Command::All(a) => run_suite_command(Suite::All, a, stdout, stderr),
        Command::Dwpf(a) => run_dwpf_command(a, stdout, stderr),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
///
/// Status 0 means every check passed, 1 a failing check or numerical error, and 2 a usage
/// or configuration error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let pool = thread_count().and_then(|n| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| ConfigError::Threads(e.to_string()))
    });
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = match pool {
        Ok(pool) => pool.install(|| dispatch(cli.command, &mut out, &mut err)),
        Err(e) => Err(e.into()),
    };
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

//! Command-line front end for the `hartogs` library.
//!
//! Exit codes: 0 success, 1 internal error or failed verification,
//! 2 usage or validation error, 3 result divergent by design.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
pub mod expr;
pub mod output;

use config::{load_config, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

const POINTS_HELP: &str = "\
Points are comma-separated real and imaginary parts in coordinate order:
  re,im              for planar kernels (disc, punctured-disc, weighted-punctured-disc)
  z1re,z1im,z2re,z2im for hartogs and product-model
Expressions are polynomials in z1, z2, zb1, zb2 (conjugates) with exact
decimal coefficients and the unit i, e.g. '2*z1*zb2^2 - 0.5*i'. Planar
expressions use w and wb. Division is allowed by single monomials.

Environment: HARTOGS_THREADS sets the worker thread count.";

#[derive(Parser, Debug)]
#[command(name = "hartogs", version, about = "Bergman projection on the Hartogs triangle", after_help = POINTS_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Kernel evaluation.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Bergman projections.
    #[command(subcommand)]
    Project(ProjectCmd),
    /// Weighted Sobolev norm on the Hartogs triangle by quadrature.
    Norm(NormArgs),
    /// Identity checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Boundedness and divergence probes.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Full verification run.
    Report,
}

#[derive(Subcommand, Debug)]
enum KernelCmd {
    /// Evaluate B(z, ζ).
    Eval {
        #[arg(long)]
        id: String,
        #[arg(long, visible_alias = "w", allow_hyphen_values = true)]
        z: String,
        #[arg(long, visible_alias = "eta", allow_hyphen_values = true)]
        zeta: String,
    },
}

#[derive(Subcommand, Debug)]
enum ProjectCmd {
    /// Exact projection of z1^a z2^b zb1^c zb2^d.
    Monomial {
        #[arg(long, allow_hyphen_values = true)]
        a: i32,
        #[arg(long, allow_hyphen_values = true)]
        b: i32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        c: i32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        d: i32,
        /// Project the truncation to |z2| > eps (exact decimal).
        #[arg(long)]
        eps: Option<String>,
    },
    /// Projection by quadrature at one point.
    Numeric {
        #[arg(long)]
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    p: f64,
    /// Weight exponent of |z2|^s.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    s: String,
    #[arg(long, allow_hyphen_values = true)]
    f: String,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Operator transfer through the product model, exact.
    LemmaTransfer {
        #[arg(long, default_value_t = 4)]
        beta_max: u32,
        #[arg(long, default_value_t = 20)]
        monomials: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Tangential-power constants, exact.
    Tangential {
        #[arg(long, default_value_t = 8)]
        b: usize,
        #[arg(long, default_value_t = 12)]
        m_max: i64,
    },
    /// Derivative identity of the weighted kernel.
    KernelIdentity {
        #[arg(long, default_value_t = 4)]
        b_max: u32,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Sample on |w η̄| = modulus instead of the default annulus.
        #[arg(long)]
        modulus: Option<f64>,
    },
    /// Integration by parts on the punctured disc.
    Ibp {
        #[arg(long)]
        b: u32,
        /// Expression in w, wb.
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        w2: String,
    },
    /// Weighted boundedness of B2 on the punctured disc.
    B2 {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        cutoffs: String,
        #[arg(long, default_value_t = 50)]
        family_size: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ProbeCmd {
    /// Main-estimate ratios over the seeded family.
    Estimate {
        #[arg(long, default_value = "0")]
        k: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 50)]
        family_size: usize,
    },
    /// L^p boundedness window.
    Window {
        #[arg(long, default_value = "2,3,4")]
        p: String,
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        cutoffs: String,
        #[arg(long, default_value_t = 50)]
        family_size: usize,
    },
    /// Truncated norms of the counterexample image.
    Counterexample {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        cutoffs: String,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<hartogs::Error> for Failure {
    fn from(e: hartogs::Error) -> Self {
        use hartogs::Error as E;
        let code = match e {
            E::Evaluation { .. } => EXIT_INTERNAL,
            E::Domain(_) | E::Divergence(_) | E::SingularPoint(_) | E::Config(_) | E::FamilyMembership(_) => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("HARTOGS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::usage(format!("HARTOGS_THREADS = {v:?} is not a positive integer")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p).map_err(|e| Failure::usage(e.0))?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.output {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    configure_threads()?;
    let cfg = resolve_config(&cli)?;
    let (name, report) = commands::dispatch(cli.cmd, &cfg)?;
    let text = report.render(cfg.format, name, &cfg.fingerprint(), cfg.seed).map_err(Failure::internal)?;
    match &cfg.output {
        Some(path) => output::write_atomic(path, &text)
            .map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if report.failed {
        EXIT_INTERNAL
    } else if report.divergent {
        EXIT_DIVERGENT
    } else {
        EXIT_OK
    })
}

/// Run the CLI on `argv` (including the program name) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["hartogs", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["hartogs", "kernel", "eval", "--id", "hartogs"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["hartogs", "--help"]), EXIT_OK);
    }
}

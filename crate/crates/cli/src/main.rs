use std::path::PathBuf;
use std::process::ExitCode;

use bergman_cli::{
    config_from_report, emit_report, exit_code, run, write_report, CliError, Command, Format, RunConfig, Tolerances,
    USAGE_EXIT,
};
use bergman_core::{MCConfig, Params, RadialScheme};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bergman", version, about = "Operator norms of weighted Bergman projections on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Closed-form operator norms.
    Norm(Common),
    /// Monte Carlo check of the monomial integrals over the ball.
    VerifyLemma6(Common),
    /// Truncated series of the radial profile against its hypergeometric form.
    MzProfile(Common),
    /// Extremal test functions pushed towards the boundary.
    ExtremalSweep(Common),
    /// Besov semi-norms of z1^k approaching the Bloch semi-norm.
    BesovLimit(Common),
    /// Seeded identity and finite-difference checks.
    IdentitySuite(Common),
    /// Re-run the configuration embedded in a JSON report.
    Replay {
        report: PathBuf,
        /// Write here instead of the original output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Radial {
    ImportanceWeight,
    BetaRadius,
}

impl From<Radial> for RadialScheme {
    fn from(r: Radial) -> Self {
        match r {
            Radial::ImportanceWeight => RadialScheme::ImportanceWeight,
            Radial::BetaRadius => RadialScheme::BetaRadius,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Complex dimension n.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Derivative order N.
    #[arg(long = "N", default_value_t = 1)]
    order: u32,
    /// Weight exponent alpha > -1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "BERGMAN_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Radial::ImportanceWeight)]
    radial: Radial,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Select the as-stated first term of the Bloch norm.
    #[arg(long)]
    as_stated: bool,
    /// Inner radius parameter of the modified extremal function.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,10,50,200")]
    p_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
    r_list: Vec<f64>,
    /// Series truncation for mz-profile; chosen per radius when absent.
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_order: u32,
    /// Exponent k of the Besov test function z1^k; defaults to N.
    #[arg(long)]
    power: Option<u32>,
    /// Random inputs per dimension for identity-suite.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    #[arg(long, default_value_t = Tolerances::default().sigma)]
    sigma_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().rel)]
    rel_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().closed_rel)]
    closed_rel_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().series_rel)]
    series_rel_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().sweep_fraction)]
    sweep_fraction: f64,
    #[arg(long, default_value_t = Tolerances::default().low_order_rel)]
    low_order_rel_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().besov_rel)]
    besov_rel_tol: f64,
}

impl Common {
    fn resolve(self, command: Command) -> Result<RunConfig, CliError> {
        let params = Params::new(self.n, self.order, self.alpha)?;
        let mut mc = MCConfig::new(self.samples, self.seed).with_radial(self.radial.into());
        if let Some(w) = self.workers {
            mc = mc.with_workers(w);
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(CliError::Usage(format!("--delta must lie in (0, 1), got {d}")));
            }
        }
        Ok(RunConfig {
            command,
            params,
            mc,
            output: self.output,
            format: self.format,
            as_stated: self.as_stated,
            delta: self.delta,
            p_list: self.p_list,
            r_list: self.r_list,
            kmax: self.kmax,
            max_order: self.max_order,
            power: self.power,
            cases: self.cases,
            tolerances: Tolerances {
                sigma: self.sigma_tol,
                rel: self.rel_tol,
                closed_rel: self.closed_rel_tol,
                series_rel: self.series_rel_tol,
                sweep_fraction: self.sweep_fraction,
                low_order_rel: self.low_order_rel_tol,
                besov_rel: self.besov_rel_tol,
            },
        })
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, common) = match cli.command {
        Sub::Norm(c) => (Command::Norm, c),
        Sub::VerifyLemma6(c) => (Command::VerifyLemma6, c),
        Sub::MzProfile(c) => (Command::MzProfile, c),
        Sub::ExtremalSweep(c) => (Command::ExtremalSweep, c),
        Sub::BesovLimit(c) => (Command::BesovLimit, c),
        Sub::IdentitySuite(c) => (Command::IdentitySuite, c),
        Sub::Replay { report, output } => {
            let mut cfg = config_from_report(&std::fs::read_to_string(report)?)?;
            if output.is_some() {
                cfg.output = output;
            }
            return Ok(cfg);
        }
    };
    common.resolve(command)
}

fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let report = run(cfg)?;
    match &cfg.output {
        Some(path) => write_report(&report, cfg.format, path)?,
        None => print!("{}", emit_report(&report, cfg.format)?),
    }
    for row in report.rows.iter().filter(|r| !r.pass) {
        log::warn!("failed: {} (estimate {}, target {})", row.label, row.estimate, row.target);
    }
    Ok(exit_code(&report))
}

fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { USAGE_EXIT } else { 0 };
        }
    };
    match resolve(cli).and_then(|cfg| execute(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            USAGE_EXIT
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run_cli(std::env::args_os()) as u8)
}

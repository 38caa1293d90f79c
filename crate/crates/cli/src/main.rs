use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecs_core::bridge::KMode;
use ecs_core::selectors::Condition;
use ecs_core::suite::{self, Report, RunConfig, Status, Suite};

#[derive(Parser, Debug)]
#[command(name = "verify", version, about = "Run the ECS verification suites and write a JSON report")]
struct Cli {
    /// PRNG seed recorded in the report.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Write the JSON report here; `-` prints it to stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Start from a JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "VERIFY_THREADS", default_value_t = 0)]
    threads: usize,

    /// Only print the final summary line.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive selector search, positive controls and label identities.
    Selectors(SelectorArgs),
    /// GL(Z)-polynomial census and identities.
    Glz(GlzArgs),
    /// Group law, action and isometry checks on the model manifold.
    Group(GroupArgs),
    /// Solution space, Omega, monodromy and the triangular basis.
    Solspace(SolspaceArgs),
    /// Canonical-basis roundtrips and scaling isometries.
    Canonical(CanonicalArgs),
    /// Exponent dictionary, Pi operator and the contradiction replay.
    Bridge(BridgeArgs),
    /// Every suite with default parameters.
    All,
}

#[derive(Args, Debug)]
struct SelectorArgs {
    #[arg(long)]
    m_min: Option<u32>,
    #[arg(long)]
    m_max: Option<u32>,
    /// Sweep |k| up to this bound instead of m - 1.
    #[arg(long)]
    k_abs_max: Option<u32>,
    /// Also report a relaxed sweep with this condition removed.
    #[arg(long, value_parser = clap::value_parser!(Condition))]
    drop: Option<Condition>,
    #[arg(long)]
    control_m_max: Option<u32>,
    #[arg(long)]
    identity_m_max: Option<u32>,
}

#[derive(Args, Debug)]
struct GlzArgs {
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    coeff_bound: Option<i64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    sample_coeff_bound: Option<i64>,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Isometry tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SolspaceArgs {
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct CanonicalArgs {
    #[arg(long)]
    m_min: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    scrambles: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KModeArg {
    ProofRange,
    Full,
}

#[derive(Args, Debug)]
struct BridgeArgs {
    #[arg(long)]
    m_max: Option<u32>,
    #[arg(long)]
    exponent_m_max: Option<u32>,
    #[arg(long, value_enum)]
    k_mode: Option<KModeArg>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let suite = match cli.command {
        Command::Selectors(_) => Suite::Selectors,
        Command::Glz(_) => Suite::Glz,
        Command::Group(_) => Suite::Group,
        Command::Solspace(_) => Suite::Solspace,
        Command::Canonical(_) => Suite::Canonical,
        Command::Bridge(_) => Suite::Bridge,
        Command::All => Suite::All,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::new(suite),
    };
    cfg.suite = suite;
    cfg.seed = cli.seed;
    match &cli.command {
        Command::Selectors(a) => {
            let p = &mut cfg.selectors;
            set(&mut p.m_min, a.m_min);
            set(&mut p.m_max, a.m_max);
            set(&mut p.control_m_max, a.control_m_max);
            set(&mut p.identity_m_max, a.identity_m_max);
            p.k_abs_max = a.k_abs_max.or(p.k_abs_max);
            p.drop = a.drop.or(p.drop);
        }
        Command::Glz(a) => {
            let p = &mut cfg.glz;
            set(&mut p.degree, a.degree);
            set(&mut p.coeff_bound, a.coeff_bound);
            set(&mut p.samples, a.samples);
            set(&mut p.sample_coeff_bound, a.sample_coeff_bound);
        }
        Command::Group(a) => {
            let p = &mut cfg.group;
            set(&mut p.n, a.n);
            set(&mut p.q, a.q);
            set(&mut p.c, a.c);
            set(&mut p.samples, a.samples);
            set(&mut cfg.tolerances.isometry, a.tol);
        }
        Command::Solspace(a) => {
            let p = &mut cfg.solspace;
            set(&mut p.m_max, a.m_max);
            set(&mut p.c_values, a.c.clone());
            set(&mut p.q_values, a.q.clone());
            set(&mut p.points, a.points);
            set(&mut cfg.tolerances.residual, a.tol);
        }
        Command::Canonical(a) => {
            let p = &mut cfg.canonical;
            set(&mut p.m_min, a.m_min);
            set(&mut p.m_max, a.m_max);
            set(&mut p.scrambles, a.scrambles);
        }
        Command::Bridge(a) => {
            let p = &mut cfg.bridge;
            set(&mut p.m_max, a.m_max);
            set(&mut p.exponent_m_max, a.exponent_m_max);
            set(
                &mut p.k_mode,
                a.k_mode.map(|k| match k {
                    KModeArg::ProofRange => KMode::ProofRange,
                    KModeArg::Full => KMode::Full,
                }),
            );
        }
        Command::All => {}
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn print_summary(report: &Report, quiet: bool, to_stderr: bool) {
    let mut lines = Vec::new();
    if !quiet {
        for c in &report.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Warn => "WARN",
            };
            let mut line = format!("{tag}  {}", c.name);
            if let (Some(d), Some(t)) = (c.defect, c.tolerance) {
                line.push_str(&format!("  defect={d:.3e} tol={t:.0e}"));
            }
            if let Some(detail) = &c.detail {
                line.push_str(&format!("  ({detail})"));
            }
            lines.push(line);
        }
    }
    let s = &report.summary;
    let elapsed = report.timestamp.as_ref().map_or(0.0, |t| t.elapsed_ms / 1e3);
    lines.push(format!(
        "{}: {} checks, {} passed, {} failed, {} warnings in {elapsed:.2}s (seed {})",
        report.suite, s.total, s.passed, s.failed, s.warnings, report.seed
    ));
    for line in lines {
        if to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = match suite::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let to_stdout = cli.output.as_deref().is_some_and(|p| p.as_os_str() == "-");
    print_summary(&report, cli.quiet, to_stdout);
    match &cli.output {
        Some(_) if to_stdout => println!("{}", report.to_json()),
        Some(path) => {
            if let Err(e) = fs::write(path, report.to_json() + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {}
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

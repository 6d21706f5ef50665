use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greedy_sparse::experiment::{
    emit_trace, run_experiment, write_csv, ExperimentConfig, ExperimentKind, ExperimentReport, OutputFormat, Summary,
    SEED_ENV,
};
use greedy_sparse::{Algorithm, Error, TieBreakPolicy, WeaknessSequence};

const EXIT_BAD_CONFIG: u8 = 4;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "greedy-sparse", version, about = "Greedy m-term approximation experiments in l_q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best m-term error of the two-coordinate dictionary against its closed form.
    Bt1(Overrides),
    /// The l_q analogue of bt1: projection errors against the symmetric optimum.
    Btq(Overrides),
    /// Orthogonal greedy algorithm on the adversarial dictionary.
    Bt3(Overrides),
    /// Relaxed greedy algorithm on the adversarial dictionary.
    Bt4(Overrides),
    /// Orthogonal greedy algorithm on the perturbed adversarial dictionary.
    Br1(Overrides),
    /// Two-stage approximant rate against the greedy lower bound.
    Obound(Overrides),
    /// A-priori and a-posteriori bounds on a random instance.
    Posteriori(Overrides),
    /// A greedy run on a user dictionary and signal.
    Custom(Overrides),
    /// Run the experiment named in the `--config` file.
    Run(Overrides),
}

#[derive(clap::Args, Default)]
struct Overrides {
    /// JSON config file; command-line flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long = "N", short = 'N', visible_alias = "n")]
    n: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "A-eps", visible_alias = "a-eps")]
    a_eps: Option<f64>,
    /// Weakness parameters: one value or a comma-separated list.
    #[arg(long)]
    tau: Option<WeaknessSequence>,
    /// lowest-index, prefer-g-ascending or v-minimizing.
    #[arg(long)]
    policy: Option<TieBreakPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// `random` or a CSV dictionary file.
    #[arg(long)]
    dict: Option<String>,
    /// Size of a random dictionary.
    #[arg(long)]
    atoms: Option<usize>,
    /// Number of atoms combined into a random target.
    #[arg(long)]
    terms: Option<usize>,
    /// wcga, oga, rga or wgafr.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// CSV file with the target vector (custom runs).
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Trace file; without it the trace goes to stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
}

fn split(command: Command) -> (Option<ExperimentKind>, Overrides) {
    use ExperimentKind as K;
    match command {
        Command::Bt1(o) => (Some(K::Bt1), o),
        Command::Btq(o) => (Some(K::Btq), o),
        Command::Bt3(o) => (Some(K::Bt3), o),
        Command::Bt4(o) => (Some(K::Bt4), o),
        Command::Br1(o) => (Some(K::Br1), o),
        Command::Obound(o) => (Some(K::Obound), o),
        Command::Posteriori(o) => (Some(K::Posteriori), o),
        Command::Custom(o) => (Some(K::Custom), o),
        Command::Run(o) => (None, o),
    }
}

fn build_config(kind: Option<ExperimentKind>, o: Overrides) -> Result<ExperimentConfig, Error> {
    let mut config = match (&o.config, kind) {
        (Some(path), kind) => {
            let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if let (Some(kind), Some(obj)) = (kind, value.as_object_mut()) {
                obj.insert("experiment".into(), serde_json::to_value(kind)?);
            }
            ExperimentConfig::from_json(&value.to_string())?
        }
        (None, Some(kind)) => ExperimentConfig::new(kind),
        (None, None) => {
            return Err(Error::InvalidParameter {
                name: "config",
                reason: "`run` needs --config".into(),
            })
        }
    };
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = o.$field { config.$field = v; })*};
    }
    set!(n, m_max, q, delta, epsilon, a_eps, tau, policy, seed, dict, atoms, terms, algorithm, format);
    if o.gamma.is_some() {
        config.gamma = o.gamma;
    }
    if o.signal.is_some() {
        config.signal = o.signal;
    }
    if o.output.is_some() {
        config.output = o.output;
    }
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config.seed = seed.trim().parse().map_err(|_| Error::InvalidParameter {
            name: "seed",
            reason: format!("{SEED_ENV}=`{seed}` is not an unsigned integer"),
        })?;
    }
    Ok(config)
}

fn summary_text(summary: &Summary) -> String {
    let mut out = format!(
        "experiment {}: {}\n",
        summary.experiment,
        if summary.passed { "PASS" } else { "FAIL" }
    );
    if let (Some(dev), Some(tol)) = (summary.max_deviation, summary.tolerance) {
        out += &format!("  max deviation {dev:e} (tolerance {tol:e})\n");
    }
    for c in &summary.checks {
        out += &format!("  [{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &summary.notes {
        out += &format!("  note: {n}\n");
    }
    if let Some(f) = &summary.numerical_failure {
        out += &format!("  numerical failure: {f} (trace is partial)\n");
    }
    out
}

fn write_stdout(report: &ExperimentReport, format: OutputFormat) -> Result<(), Error> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match format {
        OutputFormat::Csv => write_csv(&report.rows, &mut lock)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut lock, report)?;
            writeln!(lock)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_BAD_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (kind, overrides) = split(cli.command);
    let config = match build_config(kind, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_BAD_CONFIG);
        }
    };
    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_BAD_CONFIG };
            return ExitCode::from(code);
        }
    };
    let written = match &config.output {
        Some(path) => emit_trace(&report, config.format, path).map(|()| {
            print!("{}", summary_text(&report.summary));
        }),
        None => write_stdout(&report, config.format).map(|()| {
            eprint!("{}", summary_text(&report.summary));
        }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_BAD_CONFIG);
    }
    ExitCode::from(report.summary.exit_code() as u8)
}

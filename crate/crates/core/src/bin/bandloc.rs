use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bandloc::harness::{self, acceptance, ExperimentConfig, RunError, ValidationErrors};

/// Random band matrices: resolvents, fractional moments and spectral statistics.
#[derive(Parser)]
#[command(name = "bandloc", version)]
struct Cli {
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sample count; overrides `samples`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (JSON).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Dump sampled matrices.
    Sample(ConfigArg),
    /// Resolvent entries with the dense oracle.
    Resolvent(ConfigArg),
    /// Fractional moment or tail probability of a resolvent entry.
    Moments(ConfigArg),
    /// Tail probability of a resolvent entry.
    Tail(ConfigArg),
    /// Fractional moment decay profile and fit.
    Decay(ConfigArg),
    /// Localization length over band widths.
    Scan(ConfigArg),
    /// Density of states against the semicircle.
    Dos(ConfigArg),
    /// Level spacing distribution.
    Spacing(ConfigArg),
    /// Pair probability scaling in short intervals.
    Minami(ConfigArg),
    /// Eigenvector correlator decay.
    Eigvec(ConfigArg),
    /// Smallest level gaps.
    Simplicity(ConfigArg),
    /// Tail of the inverse distance to the spectrum of a block.
    Wegner(ConfigArg),
    /// Operator norm of diagonal blocks.
    Norm(ConfigArg),
    /// Hölder gap of exponential moments.
    Holder(ConfigArg),
    /// Conditional domination check.
    Domination(ConfigArg),
    /// Run the acceptance suite.
    Acceptance {
        /// Optional config of kind `acceptance`.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Skip the rerun that checks worker-count independence.
        #[arg(long)]
        skip_determinism: bool,
    },
}

impl Command {
    fn accepts(&self) -> &'static [&'static str] {
        match self {
            Command::Sample(_) => &["sample"],
            Command::Resolvent(_) => &["resolvent"],
            Command::Moments(_) => &["moment", "tail"],
            Command::Tail(_) => &["tail"],
            Command::Decay(_) => &["decay"],
            Command::Scan(_) => &["scan"],
            Command::Dos(_) => &["dos"],
            Command::Spacing(_) => &["spacing"],
            Command::Minami(_) => &["minami"],
            Command::Eigvec(_) => &["eigvec"],
            Command::Simplicity(_) => &["simplicity"],
            Command::Wegner(_) => &["wegner"],
            Command::Norm(_) => &["norm"],
            Command::Holder(_) => &["holder"],
            Command::Domination(_) => &["domination"],
            Command::Acceptance { .. } => &["acceptance"],
        }
    }

    fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Sample(a)
            | Command::Resolvent(a)
            | Command::Moments(a)
            | Command::Tail(a)
            | Command::Decay(a)
            | Command::Scan(a)
            | Command::Dos(a)
            | Command::Spacing(a)
            | Command::Minami(a)
            | Command::Eigvec(a)
            | Command::Simplicity(a)
            | Command::Wegner(a)
            | Command::Norm(a)
            | Command::Holder(a)
            | Command::Domination(a) => Some(&a.config),
            Command::Acceptance { config, .. } => config.as_ref(),
        }
    }
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ValidationErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ValidationErrors(vec![harness::ValidationError {
            path: "$".into(),
            message: format!("{}: {e}", path.display()),
        }])
    })?;
    ExperimentConfig::from_json(&text)
}

fn default_acceptance() -> ExperimentConfig {
    ExperimentConfig {
        name: "acceptance".into(),
        ensemble: None,
        estimator: harness::Estimator::Acceptance,
        samples: 1,
        workers: 1,
        output_dir: "out".into(),
        seed: Some(acceptance::DEFAULT_SEED),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match cli.command.config_path() {
        Some(path) => match load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("invalid configuration:\n{e}");
                return ExitCode::from(1);
            }
        },
        None => default_acceptance(),
    };
    let kind = config.estimator.kind();
    if !cli.command.accepts().contains(&kind) {
        eprintln!(
            "estimator.kind: {kind} does not match this subcommand (expected {})",
            cli.command.accepts().join(" or ")
        );
        return ExitCode::from(1);
    }
    let out = cli.out.as_ref().map(|p| p.to_string_lossy().into_owned());
    config.apply_overrides(cli.seed, cli.workers, out.as_deref(), cli.samples);

    if let Command::Acceptance { skip_determinism, .. } = cli.command {
        return run_acceptance(&config, !skip_determinism);
    }
    match harness::run(&config) {
        Ok((manifest, _)) => {
            for f in &manifest.files {
                println!("{}/{}", config.output_dir, f.name);
            }
            println!("{}/{}", config.output_dir, harness::RunManifest::file_name(&config.name));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// The suite prints one line per criterion as it goes, then writes its
/// tables and manifest like any other run.
fn run_acceptance(config: &ExperimentConfig, check_determinism: bool) -> ExitCode {
    if let Err(e) = config.validate() {
        eprintln!("{}", RunError::from(e));
        return ExitCode::from(1);
    }
    if let Err(e) = harness::output::remove_manifest(std::path::Path::new(&config.output_dir), &config.name) {
        eprintln!("output: {e}");
        return ExitCode::from(2);
    }
    let start = std::time::Instant::now();
    let report = acceptance::run_suite_with_progress(config.workers, config.effective_seed(), check_determinism, |c| {
        println!("{}", c.line())
    });
    let output = harness::RunOutput {
        tables: report.tables(),
        failures: [(
            "failed_criteria".to_string(),
            report.criteria.iter().filter(|c| !c.passed).count() as u64,
        )]
        .into(),
        passed: Some(report.passed()),
    };
    match harness::write_run(config, &output, start.elapsed()) {
        Ok(_) => {}
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    }
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} criteria passed",
        report.criteria.len() - failed,
        report.criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

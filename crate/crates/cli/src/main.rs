use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use rydphon_cli::commands;
use rydphon_cli::config::{parse_config, ExperimentConfig, ModelChoice};
use rydphon_cli::output::{self, writer};
use rydphon_cli::presets::{preset, PRESETS};
use rydphon_cli::run::{run_experiment, run_sweep};
use rydphon_cli::verify::{verify_suite, Level};
use rydphon_cli::CliError;
use rydphon_core::momentum::f_coeff_closed;

/// Facilitated Rydberg chain with trap phonons: build operators, propagate, and fit transport exponents.
#[derive(Parser, Debug)]
#[command(name = "rydphon", version)]
struct Cli {
    /// TOML experiment configuration (defaults apply to every omitted key).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; inspection commands print CSV to stdout without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps and matrix-vector products.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lists the single-domain basis (c, r, parity, exc_count, spin_string).
    Basis {
        #[arg(long)]
        n: usize,
    },
    /// Builds the configured Hamiltonian and prints its size; --dump writes (row, col, re, im).
    Hamiltonian {
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long)]
        dump: bool,
    },
    /// Closed-form scattering coefficients next to the oracle sums.
    Coeffs {
        #[arg(long)]
        n: usize,
    },
    /// Effective Hamiltonian of one block on a fixed phonon number.
    Sw {
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        nph: Option<u32>,
    },
    /// Propagates the configured initial state and writes the observables.
    Evolve {
        /// Print the resolved configuration and stop.
        #[arg(long)]
        dry_run: bool,
    },
    /// Runs a named preset (fig2-small, fig3-small) with all its sweep points.
    Experiment { preset: String },
    /// Runs every point of the configuration's [sweep] table.
    Sweep,
    /// Oracle, unitarity, spectral, Schrieffer-Wolff and symmetry checks.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Full,
    Constrained,
    Momentum,
    Effective,
}

impl From<ModelArg> for ModelChoice {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => ModelChoice::Full,
            ModelArg::Constrained => ModelChoice::Constrained,
            ModelArg::Momentum => ModelChoice::Momentum,
            ModelArg::Effective => ModelChoice::Effective,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Result<&Path, CliError> {
    cli.out.as_deref().ok_or_else(|| CliError::Config("--out DIR is required for this command".into()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Basis { n } => commands::basis(&mut writer(out, "basis.csv")?, *n),
        Command::Coeffs { n } => {
            let worst = commands::coeffs(&mut writer(out, "coeffs.csv")?, *n)?;
            eprintln!("max |f_closed - f_oracle| = {worst:e}");
            Ok(())
        }
        Command::Hamiltonian { model, dump } => {
            let cfg = load(cli)?;
            let kind = model.map_or(cfg.model.kind, ModelChoice::from);
            let h = commands::operator(&cfg, kind)?;
            eprintln!("{}", commands::summary(&h));
            if *dump {
                output::triplets(&mut writer(out, "hamiltonian.csv")?, &h)?;
            }
            Ok(())
        }
        Command::Sw { q, nph } => {
            let cfg = load(cli)?;
            let (h, residual) = commands::sw(&cfg, q.unwrap_or(cfg.model.q), nph.unwrap_or(cfg.model.n_phonons))?;
            output::triplets(&mut writer(out, "sw.csv")?, &h)?;
            eprintln!("residual max |V + [S, H0]| = {residual:e}");
            Ok(())
        }
        Command::Evolve { dry_run } => {
            let cfg = load(cli)?;
            cfg.validate()?;
            if *dry_run {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let r = run_experiment(&cfg, "", out_dir(cli)?, None)?;
            eprintln!("wrote {} ({} states, {})", r.dir.display(), r.manifest.dimension, r.manifest.method);
            Ok(())
        }
        Command::Experiment { preset: name } => {
            if cli.config.is_some() {
                return Err(CliError::Config("experiment takes its configuration from the preset".into()));
            }
            let mut p = preset(name)
                .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}; available: {}", PRESETS.join(", "))))?;
            if let Some(seed) = cli.seed {
                p.config.seed = seed;
            }
            let runs = run_sweep(&p.config, out_dir(cli)?, Some(&p))?;
            for r in runs {
                eprintln!("wrote {} ({} states, {})", r.dir.display(), r.manifest.dimension, r.manifest.method);
            }
            Ok(())
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            for r in run_sweep(&cfg, out_dir(cli)?, None)? {
                eprintln!("wrote {} ({} states, {})", r.dir.display(), r.manifest.dimension, r.manifest.method);
            }
            Ok(())
        }
        Command::Verify { level } => {
            let report = verify_suite(*level, &f_coeff_closed);
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                let names: Vec<_> = report.failures().map(|c| c.name).collect();
                Err(CliError::Verification(names.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let defaults = format!("Configuration keys and defaults:\n\n{}", ExperimentConfig::default().to_toml());
    let matches = Cli::command().after_long_help(defaults).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

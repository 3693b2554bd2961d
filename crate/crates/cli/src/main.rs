use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdg_cli::{
    format_csv, format_markdown, run_checks, run_study, solve_level, CheckOptions, CliError,
    OutputFormat, StudyConfig,
};
use hdg_core::analysis::{LevelErrors, Variable};

#[derive(Parser)]
#[command(name = "hdg", version, about = "HDG solver for convection-diffusion optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on one mesh and print the errors.
    Solve {
        #[command(flatten)]
        study: StudyArgs,
        /// Squares per side.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a refinement study and print the convergence table.
    Study(StudyArgs),
    /// Run the invariant check suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        tau2: f64,
        /// Use tau1 = tau2, which breaks the adjoint identity.
        #[arg(long)]
        break_a1: bool,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated mesh levels, e.g. 8,16,32.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau2: Option<f64>,
    /// csv or markdown.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl StudyArgs {
    fn resolve(&self) -> Result<StudyConfig, CliError> {
        let mut config = StudyConfig::default();
        if let Some(path) = &self.config {
            config.merge_file(path)?;
        }
        let overrides = [
            ("problem", self.problem.clone()),
            ("k", self.k.map(|v| v.to_string())),
            ("levels", self.levels.clone()),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("tau2", self.tau2.map(|v| v.to_string())),
            ("output_format", self.format.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, &value)?;
            }
        }
        if let Some(path) = &self.output {
            config.output_path = Some(path.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(config: &StudyConfig, text: &str) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve { study, n } => {
            let mut config = study.resolve()?;
            if let Some(n) = n {
                config.levels = vec![n];
                config.validate()?;
            }
            let n = *config.levels.last().expect("validated levels are non-empty");
            let problem = config.problem.build(config.gamma);
            let out = solve_level(&problem, n, config.k, config.tau2)?;
            let errors = LevelErrors::measure(&out.solution, &problem)
                .map_err(|source| CliError::Level { n, k: config.k, source })?;
            let mut text = format!(
                "problem {} k={} n={n} h={:.5e} trace unknowns {}\n",
                config.problem, config.k, out.space.h, out.system_dim
            );
            for v in Variable::ALL {
                text.push_str(&format!("err_{v} = {:.5e}\n", errors.get(v)));
            }
            emit(&config, &text)?;
            Ok(true)
        }
        Command::Study(study) => {
            let config = study.resolve()?;
            let report = run_study(&config)?;
            let text = match config.output_format {
                OutputFormat::Csv => format_csv(&report),
                OutputFormat::Markdown => format_markdown(&report),
            };
            emit(&config, &text)?;
            Ok(true)
        }
        Command::Check { seed, tau2, break_a1 } => {
            let outcomes = run_checks(&CheckOptions { seed, tau2, break_a1 });
            for o in &outcomes {
                println!("{o}");
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dirsense::config::load_scenario;
use dirsense::error::Error;
use dirsense::experiments::{emit_csv, run_sweep, Baseline, Preset, SweepMode, SweepSpec, SweepTable, SweepVariable};
use dirsense::optimizer::{self, SearchConfig};
use dirsense::oracle::RngSeed;
use dirsense::scenario::Scenario;
use dirsense::sensing::ThresholdRule;
use dirsense::validation;

#[derive(Parser)]
#[command(version, about = "Sensing time, power and antenna orientation optimization for a cognitive radio link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-check the closed forms against Monte Carlo and finite differences.
    Validate(Common),
    /// Optimize a single scenario and print the result as JSON.
    Optimize(Common),
    /// Sweep one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Capacity versus sensing time for P_p in {0.1, 5, 15} W.
    Fig2a(Common),
    /// Optimal capacity versus the outage limit.
    Fig2b(Common),
    /// Optimal capacity versus theta for P_p in {0.4, 1.2} W.
    Fig3a(Common),
    /// Optimal capacity versus theta for beam-widths of 30 and 45 degrees.
    Fig3b(Common),
    /// Directional, line-of-sight and omni-directional optima versus theta.
    Fig3c(Common),
    /// Directional-to-omni capacity ratio versus theta for P_pk in {6, 8} dB.
    Fig3d(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (JSON); the built-in reference scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file (CSV for sweeps, JSON for optimize).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo samples per check.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    /// Position of the threshold inside its concavity window, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    xi_kappa: f64,
    /// Outer search grid over phi_t and tau.
    #[arg(long, default_value = "33x33", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Refinement tolerance relative to each search range.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Maximum coordinate refinement sweeps.
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// One of tau (s), epsilon, theta (deg), p_p (W), phi_3db (deg), p_pk (dB).
    #[arg(long)]
    variable: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    values: Vec<f64>,
    /// evaluate-only or full-reoptimize.
    #[arg(long, default_value = "full-reoptimize")]
    mode: String,
    /// Comma-separated subset of dir, omni, los.
    #[arg(long, value_delimiter = ',', default_value = "dir")]
    baselines: Vec<String>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <n>x<n>, got {s:?}"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((n(a)?, n(b)?))
}

impl Common {
    fn scenario(&self) -> Result<Scenario, Error> {
        match &self.scenario {
            Some(p) => load_scenario(p),
            None => Ok(Scenario::default()),
        }
    }

    fn search(&self) -> Result<SearchConfig, Error> {
        let config = SearchConfig {
            grid_phi_t: self.grid.0,
            grid_tau: self.grid.1,
            tol: self.tol,
            max_iter: self.max_iter,
            threshold: ThresholdRule::Window { kappa: self.xi_kappa },
            ..SearchConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

enum Failure {
    Error(Error),
    NotConverged,
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn finish_table(table: &SweepTable, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => emit_csv(table, path)?,
        None => {
            let bytes = dirsense::experiments::csv_bytes(table)?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    if table.all_converged() {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(c) => {
            let scenario = c.scenario()?;
            let config = c.search()?;
            let report = validation::run_checks(&scenario, &config, c.mc_samples, RngSeed(c.seed))?;
            let text = report.to_string();
            print!("{text}");
            if let Some(out) = &c.out {
                write_text(out, &text)?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::ChecksFailed)
            }
        }
        Command::Optimize(c) => {
            let scenario = c.scenario()?;
            let config = c.search()?;
            let dir = optimizer::optimize(&scenario, &config)?;
            let los = optimizer::optimize_los(&scenario, &config)?;
            let omni = optimizer::optimize_omni(&scenario, &config)?;
            let report = serde_json::json!({
                "dir": dir,
                "los": los,
                "omni": omni,
                "gamma_d2o": if omni.c_opt > 0.0 { Some(dir.c_opt / omni.c_opt) } else { None },
            });
            let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            match &c.out {
                Some(out) => write_text(out, &text)?,
                None => print!("{text}"),
            }
            if dir.converged && los.converged && omni.converged {
                Ok(())
            } else {
                Err(Failure::NotConverged)
            }
        }
        Command::Sweep { common, sweep } => {
            let scenario = common.scenario()?;
            let config = common.search()?;
            let spec = SweepSpec {
                variable: sweep.variable.parse::<SweepVariable>()?,
                values: sweep.values,
                mode: sweep.mode.parse::<SweepMode>()?,
                baselines: sweep
                    .baselines
                    .iter()
                    .map(|b| b.parse::<Baseline>())
                    .collect::<Result<_, _>>()?,
            };
            let table = run_sweep(&scenario, &spec, &config)?;
            finish_table(&table, common.out.as_deref())
        }
        Command::Fig2a(c) => preset(Preset::Fig2a, &c),
        Command::Fig2b(c) => preset(Preset::Fig2b, &c),
        Command::Fig3a(c) => preset(Preset::Fig3a, &c),
        Command::Fig3b(c) => preset(Preset::Fig3b, &c),
        Command::Fig3c(c) => preset(Preset::Fig3c, &c),
        Command::Fig3d(c) => preset(Preset::Fig3d, &c),
    }
}

fn preset(p: Preset, c: &Common) -> Result<(), Failure> {
    let scenario = c.scenario()?;
    let config = c.search()?;
    let table = p.run(&scenario, &config)?;
    finish_table(&table, c.out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => {
            eprintln!("error: the search did not converge for at least one row");
            ExitCode::from(3)
        }
        Err(Failure::ChecksFailed) => {
            eprintln!("error: at least one cross-check failed");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

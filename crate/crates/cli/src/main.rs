//! `spares`: analyze, simulate, compare, and optimize constellation
//! spare-management policies from a JSON scenario config.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 analysis did not
//! converge (or no feasible design was found).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spares_core::config::ScenarioConfig;
use spares_core::error::Error;
use spares_core::optimize::{self, DirectBounds};
use spares_core::policy::{self, DirectParams, Scenario};
use spares_core::report::{self, AnalysisReport};
use spares_core::sim::{self, SimConfig};

#[derive(Parser)]
#[command(name = "spares", version, about = "Spare-satellite policy analysis for Walker-Delta constellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Indirect,
    Direct,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the stationary chains and report costs, metrics, and
    /// distributions.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "indirect")]
        strategy: Strategy,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo simulator and write stats plus histogram CSVs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        years: Option<f64>,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default `sim_out`).
        #[arg(long, default_value = "sim_out")]
        out: PathBuf,
    },
    /// Analyze and simulate the same scenario, then report the errors.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        years: Option<f64>,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default `compare_out`).
        #[arg(long, default_value = "compare_out")]
        out: PathBuf,
    },
    /// Search for the cheapest design meeting the resilience constraints.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "indirect")]
        strategy: Strategy,
        /// Output directory (default `opt_out`).
        #[arg(long, default_value = "opt_out")]
        out: PathBuf,
    },
    /// Re-optimize both strategies over a grid of failure rates.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated failure rates, failures/satellite/year.
        #[arg(long)]
        rates: String,
        /// Output directory (default `sweep_out`).
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. }
        | Error::NoDemand
        | Error::Singular(_)
        | Error::InvalidAvailability(_)
        | Error::InvalidDistribution(_) => 2,
        _ => 1,
    }
}

fn load(config_path: &Path) -> Result<(ScenarioConfig, Scenario), Error> {
    let config = ScenarioConfig::from_path(config_path)?;
    let scenario = config.scenario()?;
    Ok((config, scenario))
}

fn require_direct(config: &ScenarioConfig) -> Result<DirectParams, Error> {
    config
        .direct_params()?
        .ok_or_else(|| Error::Config("this command needs a \"direct\" block in the config".into()))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Analyze {
            config,
            strategy,
            out,
        } => {
            let (config, scenario) = load(&config)?;
            match strategy {
                Strategy::Indirect => {
                    let solution =
                        policy::solve_indirect(&scenario, &config.fixed_point_params())?;
                    let report = AnalysisReport::for_indirect(&solution, &scenario)?;
                    write_or_print(&out, &report.to_json()?)?;
                    if !solution.converged {
                        eprintln!(
                            "analysis did not converge: residual {:.3e} after {} iterations \
                             (validity warning: {})",
                            solution.residual, solution.iterations, solution.validity_warning
                        );
                        return Ok(ExitCode::from(2));
                    }
                    if solution.validity_warning {
                        eprintln!(
                            "warning: stockout probability {:.4} breaches the i.i.d. validity \
                             threshold {:.4}; treat results with care",
                            report.metrics.stockout_p,
                            solution.validity_threshold()
                        );
                    }
                }
                Strategy::Direct => {
                    let direct = require_direct(&config)?;
                    let solution = policy::solve_direct(&scenario, &direct)?;
                    let report = AnalysisReport::for_direct(&solution, &scenario, &direct);
                    write_or_print(&out, &report.to_json()?)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            config,
            years,
            reps,
            seed,
            out,
        } => {
            let (config, scenario) = load(&config)?;
            let sim_config = override_sim(config.sim_config(), years, reps, seed);
            let stats = sim::run_monte_carlo(&scenario, &sim_config)?;
            report::write_sim_outputs(&out, &stats)?;
            println!(
                "simulated {} replications x {:.1} years: mean_c {:.4} (+/-{:.4}), \
                 mean_p {:.4} (+/-{:.4}), shortage_c {:.5}, stockout_p {:.5}",
                sim_config.n_replications,
                sim_config.horizon_years,
                stats.mean_c.value,
                stats.mean_c.std_error,
                stats.mean_p.value,
                stats.mean_p.std_error,
                stats.shortage_c.value,
                stats.stockout_p.value,
            );
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Compare {
            config,
            years,
            reps,
            seed,
            out,
        } => {
            let (config, scenario) = load(&config)?;
            let solution = policy::solve_indirect(&scenario, &config.fixed_point_params())?;
            let sim_config = override_sim(config.sim_config(), years, reps, seed);
            let stats = sim::run_monte_carlo(&scenario, &sim_config)?;
            let errors = sim::compare(&solution, &stats, &scenario);
            std::fs::create_dir_all(&out)?;
            std::fs::write(
                out.join("comparison.json"),
                serde_json::to_string_pretty(&errors)?,
            )?;
            report::write_sim_outputs(&out.join("sim"), &stats)?;
            println!("metric          analysis      simulation    error");
            println!(
                "mean_c          {:<13.6} {:<13.6} {:.4} %",
                errors.analysis_mean_c,
                errors.sim_mean_c,
                errors.rel_mean_c * 100.0
            );
            println!(
                "mean_p          {:<13.6} {:<13.6} {:.4} %",
                errors.analysis_mean_p,
                errors.sim_mean_p,
                errors.rel_mean_p * 100.0
            );
            println!(
                "shortage_c      {:<13.6} {:<13.6} {:.4} %",
                errors.analysis_shortage_c,
                errors.sim_shortage_c,
                errors.rel_shortage_c * 100.0
            );
            println!(
                "stockout_p      {:<13.6} {:<13.6} {:.4} p.p.",
                errors.analysis_stockout_p, errors.sim_stockout_p, errors.stockout_diff_pp
            );
            println!("wrote {}", out.display());
            if !solution.converged {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Optimize {
            config,
            strategy,
            out,
        } => {
            let (config, scenario) = load(&config)?;
            std::fs::create_dir_all(&out)?;
            match strategy {
                Strategy::Indirect => {
                    let params = config.optimizer_params()?;
                    let (best, history) = optimize::optimize(&scenario, &params)?;
                    std::fs::write(
                        out.join("best_design.json"),
                        serde_json::to_string_pretty(&best)?,
                    )?;
                    report::write_history_csv(&out.join("history.csv"), &history)?;
                    let cost = best.cost.map(|c| c.total).unwrap_or(f64::NAN);
                    println!(
                        "best design: q_c={} r_c={} q_p={} r_p={} n_orbit_p={} h_p={} km, \
                         c_total={:.4} M$/day, feasible={}",
                        best.design.q_c,
                        best.design.r_c,
                        best.design.q_p,
                        best.design.r_p,
                        best.design.n_orbit_p,
                        best.design.h_p_km,
                        cost,
                        best.feasible
                    );
                    println!("wrote {}", out.display());
                    if !best.feasible {
                        eprintln!("no feasible design found within the bounds");
                        return Ok(ExitCode::from(2));
                    }
                }
                Strategy::Direct => {
                    let direct = require_direct(&config)?;
                    let bounds: DirectBounds = config.direct_bounds()?;
                    let params = config.optimizer_params()?;
                    let best = optimize::optimize_direct(
                        &scenario,
                        &direct,
                        &bounds,
                        params.epsilon_shortage,
                        &params.ga,
                        Default::default(),
                    )?;
                    std::fs::write(
                        out.join("best_direct.json"),
                        serde_json::to_string_pretty(&best)?,
                    )?;
                    println!(
                        "best direct policy: q={} r={}, c_total={:.4} M$/day, shortage={:.4}",
                        best.q, best.r, best.cost.total, best.shortage_c
                    );
                    println!("wrote {}", out.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep { config, rates, out } => {
            let (config, scenario) = load(&config)?;
            let rates = parse_rates(&rates)?;
            let direct = require_direct(&config)?;
            let bounds = config.direct_bounds()?;
            let params = config.optimizer_params()?;
            let rows = optimize::sweep_failure_rate(
                &scenario,
                &direct,
                &bounds,
                &params,
                &rates,
                Default::default(),
            )?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&rows)?)?;
            let mut csv = std::fs::File::create(out.join("sweep.csv"))?;
            writeln!(
                csv,
                "lambda_per_year,indirect_cost_musd_per_day,direct_cost_musd_per_day,savings_fraction"
            )?;
            for row in &rows {
                let indirect_cost = row.indirect.cost.map(|c| c.total).unwrap_or(f64::NAN);
                writeln!(
                    csv,
                    "{},{},{},{}",
                    row.lambda_per_year, indirect_cost, row.direct.cost.total, row.savings_fraction
                )?;
                println!(
                    "lambda {:>5.3}: indirect {:.4}, direct {:.4}, savings {:.1} %",
                    row.lambda_per_year,
                    indirect_cost,
                    row.direct.cost.total,
                    row.savings_fraction * 100.0
                );
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn override_sim(
    mut sim: SimConfig,
    years: Option<f64>,
    reps: Option<u32>,
    seed: Option<u64>,
) -> SimConfig {
    if let Some(y) = years {
        sim.horizon_years = y;
    }
    if let Some(r) = reps {
        sim.n_replications = r;
    }
    if let Some(s) = seed {
        sim.seed = s;
    }
    sim
}

fn parse_rates(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad rate \"{t}\"")))
        })
        .collect()
}

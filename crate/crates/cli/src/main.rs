//! `se2-rigidity`: analyze directed bearing frameworks and run the
//! gradient-flow relative-pose estimator from scenario files.
//!
//! Exit codes, shared by all subcommands:
//! - `0` — positive verdict (rigid / converged / all checks passed)
//! - `2` — the run succeeded but the verdict is negative
//! - `1` — the command itself failed (bad file, invalid scenario, ...)

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use se2_rigidity::scenario::{builtin_demo, run_analysis, run_estimation, DemoKind, Scenario};
use se2_rigidity::selftest;
use se2_rigidity::Result;

#[derive(Parser)]
#[command(name = "se2-rigidity", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide infinitesimal rigidity of a scenario's framework.
    Analyze {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Override the scenario's relative rank tolerance.
        #[arg(long, value_name = "TOL")]
        tol: Option<f64>,
    },
    /// Integrate the estimator and write trace.csv, report.txt and plots.
    Estimate {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override the scenario's perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the integration step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the integration horizon.
        #[arg(long = "t-final")]
        t_final: Option<f64>,
        /// Convergence threshold on the final cumulative position error.
        #[arg(long, default_value_t = 1e-3, value_name = "EP")]
        ep_threshold: f64,
    },
    /// Write a built-in demo scenario, then analyze it and run estimation.
    Demo {
        /// Which demo to run.
        kind: DemoArg,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override the demo's perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in diagnostic battery.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoArg {
    /// Six agents, complete sensing graph; rigid and recoverable.
    Rigid,
    /// Two agents never measure; non-rigid, estimation stalls.
    RotoFlexible,
}

impl From<DemoArg> for DemoKind {
    fn from(arg: DemoArg) -> Self {
        match arg {
            DemoArg::Rigid => DemoKind::Rigid,
            DemoArg::RotoFlexible => DemoKind::RotoFlexible,
        }
    }
}

/// `Ok(true)` — positive verdict, `Ok(false)` — negative verdict.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Analyze {
            scenario,
            json,
            tol,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(tol) = tol {
                s.analysis.rank_tolerance = tol;
            }
            let run = run_analysis(&s)?;
            if json {
                println!("{:#}", run.json);
            } else {
                print!("{}", run.text);
            }
            Ok(run.report.rigid_by_theorem)
        }
        Command::Estimate {
            scenario,
            out,
            seed,
            dt,
            t_final,
            ep_threshold,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(seed) = seed {
                s.sim.seed = seed;
            }
            if let Some(dt) = dt {
                s.sim.dt = dt;
            }
            if let Some(t_final) = t_final {
                s.sim.t_final = t_final;
            }
            s.validate()?;
            let summary = run_estimation(&s, &out)?;
            print!(
                "{}",
                std::fs::read_to_string(out.join("report.txt")).unwrap_or_default()
            );
            println!("\nartifacts written to {}", out.display());
            let converged = summary.converged(ep_threshold);
            println!(
                "converged (e_p <= {ep_threshold:e}): {}",
                if converged { "yes" } else { "no" }
            );
            Ok(converged)
        }
        Command::Demo { kind, out, seed } => {
            let mut s = builtin_demo(kind.into());
            if let Some(seed) = seed {
                s.sim.seed = seed;
            }
            std::fs::create_dir_all(&out)?;
            s.save(&out.join("scenario.toml"))?;

            let analysis = run_analysis(&s)?;
            std::fs::write(out.join("analysis.txt"), &analysis.text)?;
            std::fs::write(
                out.join("analysis.json"),
                format!("{:#}\n", analysis.json),
            )?;
            print!("{}", analysis.text);
            println!();

            let summary = run_estimation(&s, &out)?;
            print!(
                "{}",
                std::fs::read_to_string(out.join("report.txt")).unwrap_or_default()
            );
            println!("\nartifacts written to {}", out.display());

            let rigid = analysis.report.rigid_by_theorem;
            let converged = summary.converged(1e-3);
            println!(
                "rigid: {}, converged (e_p <= 1e-3): {}",
                if rigid { "yes" } else { "no" },
                if converged { "yes" } else { "no" }
            );
            Ok(rigid && converged)
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!(
                    "[{}] {} — {}",
                    if r.passed { "ok" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            let passed = selftest::all_passed(&results);
            println!(
                "selftest: {}/{} checks passed",
                results.iter().filter(|r| r.passed).count(),
                results.len()
            );
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slowsfg::analytical::gamma_crit;
use slowsfg::dispersion::ProcessSpec;

use slowsfg_cli::checks::validate_all;
use slowsfg_cli::error::{CliError, CliResult};
use slowsfg_cli::output::Sink;
use slowsfg_cli::phasematch::{phasematch, MapFormat};
use slowsfg_cli::run::{provenance, simulate, sweep, RunOptions};
use slowsfg_cli::scenario::{self, PhaseMapSection, Resolved, ResolvedSweep, Solver, SweepParam};

#[derive(Parser)]
#[command(name = "slowsfg", version, about = "Sum-frequency generation with a slow-light SFG pulse")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum)]
    solver: Option<Solver>,
    /// Fixed number of split-step steps instead of the automatic choice.
    #[arg(long, global = true)]
    nz: Option<usize>,
    /// Include group-delay dispersion in the split-step solver.
    #[arg(long, global = true, value_parser = on_off)]
    gdd: Option<bool>,
    #[command(subcommand)]
    command: Command,
}

fn on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Phase-matching map for a bulk periodically poled crystal.
    Phasematch(PhaseArgs),
    /// Propagate every case of a scenario file.
    Simulate { scenario: PathBuf },
    /// Efficiency against coupling or length.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        /// End of the range; `crit` means the critical coupling.
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Regenerate the data behind one of the bundled presets.
    Figure { id: String },
    /// Run every validation check and write a report.
    Validate,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value_t = 27.0)]
    length: f64,
    /// Force equal signal and pump group slowness.
    #[arg(long)]
    ssgvm: bool,
    #[arg(long, default_value_t = 512)]
    rows: usize,
    #[arg(long, default_value_t = 512)]
    cols: usize,
    #[arg(long, default_value_t = 1560.0)]
    lambda_s: f64,
    #[arg(long, default_value_t = 907.0)]
    lambda_p: f64,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_enum, default_value_t = MapFormat::Csv)]
    format: MapFormat,
    #[arg(long, default_value = "phasematch")]
    name: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let options = RunOptions {
        solver: cli.solver,
        n_z: cli.nz,
        gdd: cli.gdd,
    };
    match cli.command {
        Command::Phasematch(a) => {
            let section = PhaseMapSection {
                length_mm: a.length,
                ssgvm_override: a.ssgvm,
                rows: a.rows,
                cols: a.cols,
                sfg_nm: (573.0, 575.0),
                signal_nm: (1514.0, 1614.0),
            };
            let sink = Sink::new(&cli.out, format!("phasematch length={} ssgvm={}", a.length, a.ssgvm))?;
            let s = phasematch(&a.name, &ProcessSpec::new(a.lambda_s, a.lambda_p), a.temperature, &section, a.format, &sink)?;
            println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
        }
        Command::Simulate { scenario } => {
            let s = prepared(scenario::load(&scenario)?, &options);
            run_scenario(&s, &cli.out)?;
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            points,
        } => {
            let s = prepared(scenario::load(&scenario)?, &options);
            let to = match to.as_str() {
                "crit" => gamma_crit(&s.medium()?)?,
                v => v.parse().map_err(|_| CliError::BadInput(format!("bad --to value {v:?}")))?,
            };
            let range = ResolvedSweep::new(param, from, to, points)?;
            let sink = Sink::new(&cli.out, provenance(&s))?;
            let summary = sweep(&s, &range, &sink)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        }
        Command::Figure { id } => {
            let s = prepared(scenario::preset(&id)?, &options);
            run_scenario(&s, &cli.out)?;
        }
        Command::Validate => {
            let report = validate_all();
            for c in &report.checks {
                println!("{}", c.line());
            }
            let sink = Sink::new(&cli.out, format!("validate version={}", report.version))?;
            sink.json("validation_report.json", &report)?;
            if !report.passed {
                let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
                return Err(CliError::Validation(format!("checks {} failed", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn prepared(mut s: Resolved, options: &RunOptions) -> Resolved {
    options.apply(&mut s);
    s
}

/// Runs whatever sections the scenario has: phase map, cases and sweep.
fn run_scenario(s: &Resolved, out: &std::path::Path) -> CliResult<()> {
    let sink = Sink::new(out, provenance(s))?;
    if let (Some(map), Some(process)) = (&s.phase_map, &s.process) {
        phasematch(&s.name, process, s.temperature_c, map, MapFormat::Both, &sink)?;
    }
    if s.medium.is_some() {
        let summary = simulate(s, &sink)?;
        for c in &summary.cases {
            println!(
                "{} L={} gamma={:.4} {}: eta={:.4}",
                s.name, c.length_mm, c.gamma, c.solver.name(), c.metrics.eta
            );
        }
        if let Some(range) = &s.sweep {
            sweep(s, range, &sink)?;
        }
    }
    Ok(())
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use indilab::cli::{
    cmd_compare, cmd_gainmap, cmd_run, cmd_sweep, preset, CliError, CompareConfig, RunConfig,
    SweepKind, OUT_DIR_ENV, PRESETS,
};

/// INDI / TDC / incremental PI(D) simulation lab.
///
/// SCENARIO is a JSON file or the name of a shipped preset (see `presets`).
#[derive(Parser)]
#[command(name = "indilab", version)]
struct Cli {
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Override a scenario value, e.g. `controller.k_p=[20]` or `controller=NDI`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Noise seed, replacing the scenario's.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write log.csv, log.json and metrics.json.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run two scenarios and report per-signal deviations.
    Compare {
        a: String,
        b: String,
        /// Override applied to the first scenario only.
        #[arg(long = "set-a", value_name = "KEY=VALUE")]
        set_a: Vec<String>,
        /// Override applied to the second scenario only.
        #[arg(long = "set-b", value_name = "KEY=VALUE")]
        set_b: Vec<String>,
        /// Override applied to both.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Map desired error dynamics and gbar to PI(D) gains.
    Gainmap {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        kp: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        kd: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        gbar: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        ts: f64,
        #[arg(long)]
        json: bool,
    },
    /// Sample-period or model-mismatch sweeps, written as CSV.
    Sweep {
        #[command(subcommand)]
        kind: SweepCommand,
    },
    /// List presets, or print one as JSON.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Max TDE error for each sample period.
    Tde {
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.01,0.005")]
        periods: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Tracking error per controller under scaled truth-plant drift.
    Mismatch {
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "0.7,1.0,1.3")]
        f_scales: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        g_scale: f64,
        #[arg(long, value_delimiter = ',', default_value = "NDI,INDI_GBAR,PI_INCR")]
        controllers: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn run_config(scenario: String, common: Common, verbosity: u8) -> RunConfig {
    RunConfig {
        scenario,
        out_dir: common.out,
        overrides: common.overrides,
        seed: common.seed,
        verbosity,
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let v = cli.verbose;
    match cli.command {
        Command::Run { scenario, common } => {
            let report = cmd_run(&run_config(scenario, common, v))?;
            let m = &report.metrics;
            println!("scenario {} ({}), seed {}", report.scenario, report.config_hash, report.seed);
            println!(
                "{}: rms error {:.6e}, peak error {:.6e}, max eps_tdc {:.6e}",
                m.controller, m.rms_error, m.peak_error, m.max_eps_tdc
            );
            if let Some(eq) = &report.equivalence {
                println!(
                    "{} vs {}: max command deviation {:.3e}, max state deviation {:.3e}: {}",
                    eq.controller_a,
                    eq.controller_b,
                    eq.command_deviation,
                    eq.state_deviation,
                    if eq.pass { "PASS" } else { "FAIL" }
                );
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compare {
            a,
            b,
            set_a,
            set_b,
            set,
            seed,
            json,
        } => {
            let cfg = CompareConfig {
                a,
                b,
                overrides_a: set.iter().chain(&set_a).cloned().collect(),
                overrides_b: set.iter().chain(&set_b).cloned().collect(),
                seed,
            };
            let c = cmd_compare(&cfg)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&c).expect("serializable"));
            } else {
                print!("{}", c.to_text());
            }
        }
        Command::Gainmap {
            kp,
            kd,
            gbar,
            ts,
            json,
        } => {
            let kd = (!kd.is_empty()).then_some(kd.as_slice());
            let t = cmd_gainmap(&kp, kd, &gbar, ts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&t).expect("serializable"));
            } else {
                print!("{}", t.to_text());
            }
        }
        Command::Sweep { kind } => {
            let (cfg, kind) = match kind {
                SweepCommand::Tde {
                    scenario,
                    periods,
                    common,
                } => (
                    run_config(scenario, common, v),
                    SweepKind::Tde {
                        sample_periods: periods,
                    },
                ),
                SweepCommand::Mismatch {
                    scenario,
                    f_scales,
                    g_scale,
                    controllers,
                    common,
                } => (
                    run_config(scenario, common, v),
                    SweepKind::Mismatch {
                        f_scales,
                        g_scale,
                        controllers,
                    },
                ),
            };
            let report = cmd_sweep(&cfg, &kind)?;
            print!("{}", report.csv);
            eprintln!("wrote {}", report.path.display());
        }
        Command::Presets { show: Some(name) } => match preset(&name) {
            Some(text) => print!("{text}"),
            None => return Err(CliError::Config(format!("no preset named `{name}`"))),
        },
        Command::Presets { show: None } => {
            for (name, description, _) in PRESETS {
                println!("{name:<16} {description}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("indilab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

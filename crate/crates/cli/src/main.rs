use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fdgroup_conic::write_program;
use fdgroup_core::algorithms::RunOptions;
use fdgroup_core::experiments::{run_scenario, Method, Scenario, ScenarioName};
use fdgroup_core::system::{parse_config, ConfigFormat, ScenarioSection, SystemConfig};
use fdgroup_core::CoreError;

const THREADS_ENV: &str = "FDGROUPER_THREADS";
const DEFAULT_TRIALS: usize = 20;

#[derive(Parser)]
#[command(name = "fdgrouper", version, about = "Full-duplex user grouping simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// convergence, sweep-rho, sweep-rbar, sweep-users or grouping-table.
    #[arg(long)]
    scenario: String,
    /// TOML or JSON file (by extension) with system parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "G")]
    g: Option<usize>,
    /// Comma-separated sweep values replacing the default grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
    /// Comma-separated subset of alg1, alg2, fd_g1, hd.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Write the first subproblem of the run in the text dump format.
    #[arg(long)]
    dump_program: Option<PathBuf>,
}

fn threads() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n.min(avail),
        _ => avail,
    }
}

fn load(args: &RunArgs) -> Result<(SystemConfig, ScenarioSection), String> {
    let (mut cfg, section) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let (cfg, section) = parse_config(&text, ConfigFormat::from_path(path)).map_err(|e| e.to_string())?;
            (cfg, section.unwrap_or_default())
        }
        None => (SystemConfig::default(), ScenarioSection::default()),
    };
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(l) = args.l {
        cfg.l = l;
    }
    if let Some(g) = args.g {
        cfg.g = g;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok((cfg, section))
}

fn run(args: RunArgs) -> Result<usize, String> {
    let name: ScenarioName = args.scenario.parse().map_err(|e: CoreError| e.to_string())?;
    let (cfg, section) = load(&args)?;
    let mut scenario = Scenario::new(name, args.trials.or(section.trials).unwrap_or(DEFAULT_TRIALS));
    if let Some(grid) = args.grid.clone().or(section.grid) {
        scenario.grid = grid;
    }
    if let Some(methods) = args.methods.clone().or(section.methods) {
        scenario.methods = methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
    }
    let out = run_scenario(
        &scenario,
        &cfg,
        threads(),
        &RunOptions::default(),
        args.dump_program.is_some(),
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(&args.out, &out.csv).map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    if let Some(path) = &args.dump_program {
        let prog = out
            .first_program
            .as_ref()
            .ok_or("no subproblem was built on the first draw, nothing to dump")?;
        std::fs::write(path, write_program(prog)).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    if out.exclusions > 0 {
        eprintln!("{} (trial, method) runs excluded: rate thresholds unattainable", out.exclusions);
    }
    Ok(out.exclusions)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for runs with excluded trials
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(0) => ExitCode::SUCCESS,
            Ok(_) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

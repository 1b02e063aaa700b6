use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subdet::detector::evaluate;
use subdet::harness::{self, io, summary_table, Experiment, ExperimentConfig};
use subdet::{Error, Result};

#[derive(Parser)]
#[command(name = "subdet", version, about = "Adaptive subspace GLRT detectors and Monte-Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the detection threshold on simulated H0 data.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Calibrate, sweep the SNR grid and write the CSV.
    Roc {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `harness.snr_grid_db`, e.g. `--snr-db 0,5,10`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr_db: Option<Vec<f64>>,
    },
    /// Evaluate the configured detector on a binary data dump.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Subspace basis in the single-matrix dump format; defaults to the
        /// basis derived from the scenario seed.
        #[arg(long)]
        subspace: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SUBDET_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subdet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Calibrate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let rep = harness::calibrate_threshold(&cfg)?;
            println!("detector   {}", cfg.detector);
            println!("pfa_target {}", cfg.pfa_target);
            println!("trials     {}", rep.trials);
            println!("threshold  {}", rep.threshold);
            if rep.unconverged > 0 {
                println!("unconverged {}", rep.unconverged);
            }
            Ok(())
        }
        Command::Roc { config, snr_db } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(grid) = snr_db {
                cfg.snr_grid_db = grid;
                cfg.validate()?;
            }
            if cfg.snr_grid_db.is_empty() {
                return Err(Error::Config("empty SNR grid: set harness.snr_grid_db or pass --snr-db".into()));
            }
            let summary = harness::run(&cfg)?;
            print!("{}", summary_table(&summary.rows));
            println!("wrote {}", cfg.output_path.display());
            Ok(())
        }
        Command::Detect { config, data, subspace } => {
            let cfg = ExperimentConfig::load(&config)?;
            let data = io::read_dataset(&data)?;
            let h = match subspace {
                Some(p) => io::read_matrix(&p)?,
                None => Experiment::new(&cfg)?.h,
            };
            let out = evaluate(cfg.detector, &data, Some(&h), cfg.scenario.r, &cfg.alt_max)?;
            println!("detector  {}", cfg.detector);
            println!("statistic {}", out.statistic);
            if let Some(g) = out.gamma_hat_h0 {
                println!("gamma_h0  {g}");
            }
            if let Some(g) = out.gamma_hat_h1 {
                println!("gamma_h1  {g}");
            }
            println!("branch    {:?}", out.branch);
            if let Some(eta) = cfg.threshold {
                println!("decision  {}", if out.statistic > eta { "H1" } else { "H0" });
            }
            Ok(())
        }
    }
}

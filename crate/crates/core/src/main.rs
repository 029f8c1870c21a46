use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rrhsim::bounds::{lattice_bound, m_max, BoundParams};
use rrhsim::harness::{emit_csv, run_experiment, write_csv, ExperimentConfig, ResultRow, Scenario};
use rrhsim::pilotcode::{
    decode, efficiency, enumerate_codewords, min_ell, or_channel, Codeword, ProximityVector,
};
use rrhsim::serving::geometric_grid;

#[derive(Debug, Parser)]
#[command(
    name = "rrhsim",
    version,
    about = "Multiplexing-gain sweeps for dense RRH massive MIMO"
)]
struct Cli {
    /// Master seed (overrides the config file and RRHSIM_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo trials per grid point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Upper bound m_max and the lattice-scheduling bound over N.
    Bound {
        #[arg(long)]
        area_ratio: f64,
        /// Site counts for the lattice bound table.
        #[arg(long = "N", value_delimiter = ',', default_values_t = [1u64, 10, 100, 1000, 10_000, 100_000, 1_000_000])]
        sites: Vec<u64>,
    },
    /// Code length and efficiency; a table over K when K is omitted.
    Code {
        #[arg(long = "L", value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32, 64])]
        ones: Vec<usize>,
        #[arg(long = "K")]
        users: Option<u64>,
    },
    /// OR-channel agreement of the energy detector versus antenna count.
    Phy {
        #[arg(long = "M", value_delimiter = ',', default_values_t = [1usize, 4, 16, 64, 256, 1024])]
        antennas: Vec<usize>,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long = "L", default_value_t = 4)]
        ones: usize,
        #[arg(long = "K", default_value_t = 10)]
        users: usize,
    },
    /// Decode one observed pattern, or the OR of the given users' codewords.
    Decode {
        #[arg(long = "L")]
        ones: usize,
        #[arg(long = "K")]
        users: u64,
        /// Zeros per codeword; smallest feasible when absent.
        #[arg(long)]
        ell: Option<usize>,
        /// Observed pattern as a 0/1 string, RE 1 first.
        #[arg(long, conflicts_with = "proximate")]
        eps: Option<String>,
        /// Proximate user indices (0-based).
        #[arg(long, value_delimiter = ',')]
        proximate: Vec<usize>,
    },
}

fn output_rows(
    rows: &[ResultRow],
    out: Option<&PathBuf>,
) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(p) => emit_csv(rows, p)?,
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Sweep { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply_env()?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            let rows = run_experiment(&cfg)?;
            let out = cli.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
            drop(stdout);
            output_rows(&rows, out.as_ref())?;
        }
        Command::Bound { area_ratio, sites } => {
            if !(area_ratio > 0.0 && area_ratio.is_finite()) {
                return Err(format!("--area-ratio must be positive, got {area_ratio}").into());
            }
            writeln!(stdout, "m_max = {}", m_max(area_ratio))?;
            writeln!(stdout, "N,lattice_bound,beta")?;
            for n in sites {
                let b = lattice_bound(&BoundParams::new(area_ratio, n))?;
                writeln!(stdout, "{n},{},{}", b.gain, b.beta)?;
            }
        }
        Command::Code { ones, users } => {
            if ones.contains(&0) {
                return Err("--L must be at least 1".into());
            }
            match users {
                Some(k) => {
                    for l in ones {
                        writeln!(
                            stdout,
                            "L={l} K={k} ell={} eta={:.6}",
                            min_ell(k, l),
                            efficiency(k, l)
                        )?;
                    }
                }
                None => {
                    let mut cfg = ExperimentConfig::parse(
                        "scenario = \"code_efficiency\"\nL = [1]\nK = [1]\n",
                    )?;
                    cfg.ones = ones;
                    cfg.users = Some(geometric_grid(1, 10_000, 41));
                    let rows = run_experiment(&cfg)?;
                    drop(stdout);
                    output_rows(&rows, cli.out.as_ref())?;
                }
            }
        }
        Command::Phy {
            antennas,
            snr_db,
            ones,
            users,
        } => {
            let mut cfg = ExperimentConfig::parse(
                "scenario = \"phy_validation\"\nL = [1]\nK = [1]\nM = [1]\n",
            )?;
            cfg.antennas = antennas;
            cfg.snr_db = snr_db;
            cfg.ones = vec![ones];
            cfg.users = Some(vec![users]);
            cfg.trials = cli.trials.unwrap_or(10_000);
            cfg.apply_env()?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            debug_assert_eq!(cfg.scenario, Scenario::PhyValidation);
            let rows = run_experiment(&cfg)?;
            drop(stdout);
            output_rows(&rows, cli.out.as_ref())?;
        }
        Command::Decode {
            ones,
            users,
            ell,
            eps,
            proximate,
        } => {
            let ell = ell.unwrap_or_else(|| min_ell(users, ones));
            let code = enumerate_codewords(ones, ell, users)?;
            let observed: Vec<bool> = match eps {
                Some(s) => s.parse::<Codeword>()?.bits().to_vec(),
                None => {
                    if let Some(&bad) = proximate.iter().find(|&&k| k >= code.users()) {
                        return Err(format!("user {bad} out of range for K={users}").into());
                    }
                    for &k in &proximate {
                        writeln!(stdout, "user {k}: {}", code.codeword(k))?;
                    }
                    or_channel(
                        &code,
                        &ProximityVector::from_indices(code.users(), &proximate),
                    )?
                }
            };
            writeln!(stdout, "eps: {}", Codeword::from_bits(observed.clone()))?;
            writeln!(stdout, "{:?}", decode(&code, &observed)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

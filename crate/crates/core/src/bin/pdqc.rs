use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pdqc::adversary::ServerBehavior;
use pdqc::circuit::CapabilityProfile;
use pdqc::protocol::ProtocolKind;
use pdqc::rng::Streams;
use pdqc::runner::{run_scenario, CircuitSource, RunConfig};
use pdqc::verification::{run_verification_experiment, write_csv, ExperimentConfig, ExperimentMode};

#[derive(Parser)]
#[command(name = "pdqc", version, about = "Private delegated quantum computation simulator")]
struct Cli {
    /// Worker threads for shots and trials (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    P2,
    P3,
    P4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Simulated,
    Schedule,
}

#[derive(Subcommand)]
enum Command {
    /// Run grover3, qaoa3, qnn3 or a circuit JSON file under a protocol.
    Run {
        scenario: String,
        #[arg(long, value_enum, default_value = "p2")]
        protocol: Protocol,
        /// Client qubit capacity.
        #[arg(long = "M")]
        m: Option<usize>,
        /// Capability profile JSON.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measured shots; 0 returns the decrypted state and its fidelity.
        #[arg(long, default_value_t = 0)]
        shots: usize,
        #[arg(long, default_value_t = 0.0)]
        trap_density: f64,
        /// Interleave a verifier circuit and report detection.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        verifier_qubits: Option<usize>,
        /// honest, drop:N[:all|original|verifier] or measure:W1,W2
        #[arg(long, default_value = "honest")]
        adversary: String,
        /// Comma-separated angle overrides for qaoa3 / qnn3.
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-detection experiment for a single-gate-dropping server; prints CSV.
    VerifyExperiment {
        /// Original qubit counts.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Verifier qubit counts, paired with `--N`.
        #[arg(long = "N-prime", value_delimiter = ',', required = true)]
        n_prime: Vec<usize>,
        /// Shots per trial.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        shots: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// CSV output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> pdqc::Result<bool> {
    match command {
        Command::Run {
            scenario,
            protocol,
            m,
            profile,
            seed,
            shots,
            trap_density,
            verify,
            verifier_qubits,
            adversary,
            angles,
            out,
        } => {
            let profile = match profile {
                Some(path) => Some(CapabilityProfile::from_json(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            let cfg = RunConfig {
                source: CircuitSource::parse(&scenario),
                protocol: match protocol {
                    Protocol::P2 => ProtocolKind::P2,
                    Protocol::P3 => ProtocolKind::P3,
                    Protocol::P4 => ProtocolKind::P4,
                },
                m,
                profile,
                seed,
                shots,
                trap_density,
                verify,
                verifier_qubits,
                adversary: ServerBehavior::parse(&adversary)?,
                angles,
                out,
            };
            let report = run_scenario(&cfg)?;
            if let Some(f) = report.fidelity {
                println!("fidelity {f:.12}");
            }
            for (bits, count) in &report.counts {
                let p = report.reference.get(bits).copied().unwrap_or(0.0);
                println!("{bits} {count} (reference {p:.4})");
            }
            if let Some(d) = &report.detection {
                println!(
                    "verification: {:?}, {} of {} shots mismatched, analytic non-detection {:.3e}",
                    d.verdict, d.mismatches, d.shots, d.analytic_nondetection
                );
            }
            let s = &report.summary;
            println!(
                "sends {} rounds {} max holdings {} server instructions {}",
                s.sends, s.rounds, s.max_client_holdings, s.server_instructions
            );
            println!("{}", if report.passed { "PASS" } else { "FAIL" });
            Ok(report.passed)
        }
        Command::VerifyExperiment { n, n_prime, shots, trials, seed, mode, out } => {
            if n.len() != n_prime.len() {
                return Err(pdqc::Error::BadArgument("--N and --N-prime need the same number of values".into()));
            }
            let streams = Streams::new(seed);
            let mut rows = Vec::new();
            for (i, (&n, &n_prime)) in n.iter().zip(&n_prime).enumerate() {
                for &shots in &shots {
                    let mode = match mode {
                        Mode::Simulated => ExperimentMode::Simulated,
                        Mode::Schedule => ExperimentMode::Schedule,
                        Mode::Auto if n + n_prime <= 8 && shots * trials <= 200_000 => ExperimentMode::Simulated,
                        Mode::Auto => ExperimentMode::Schedule,
                    };
                    let cfg = ExperimentConfig { n, n_prime, shots, trials, mode };
                    rows.push(run_verification_experiment(&cfg, streams.child(i as u64))?);
                }
            }
            match out {
                Some(path) => write_csv(&rows, std::fs::File::create(path)?)?,
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(true)
        }
    }
}

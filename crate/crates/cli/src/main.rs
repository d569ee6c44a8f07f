use std::path::PathBuf;
use std::process::ExitCode;

use adiabat_cli::config::parse_config;
use adiabat_cli::oracle_cmd::oracle_query;
use adiabat_cli::records::LogWriter;
use adiabat_cli::run::{run_file, EXIT_BREACH, EXIT_OK, EXIT_USAGE};
use adiabat_cli::suites::{run_suite, SuiteError, VerifyOptions};
use adiabat_cli::THREADS_ENV;
use adiabat_core::model::ModelSpec;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adiabat",
    version,
    about = "Adiabatic ground-state tracking with matrix product states"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tracking loop for a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact ground-state energy and gap at one or more s.
    Oracle {
        /// Model family; ignored with --config.
        #[arg(long, default_value = "tfim-para")]
        model: String,
        #[arg(long, default_value_t = 8)]
        n_sites: usize,
        #[arg(long, default_value_t = 0.5)]
        s_max: f64,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        #[arg(long, default_value_t = 1.0)]
        field: f64,
        #[arg(long, default_value_t = 1.0)]
        zz: f64,
        /// Take the model from a run config instead.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Path parameter; repeat for several points.
        #[arg(long = "s", required_unless_present = "scan")]
        s: Vec<f64>,
        /// Uniform grid of this many points on [0, s_max].
        #[arg(long)]
        scan: Option<usize>,
        /// Observable like "Z3 X4" or "Z*"; repeatable.
        #[arg(long = "observable")]
        observables: Vec<String>,
    },
    /// Run a property suite.
    Verify {
        suite: String,
        /// Filter sharpness for the filter suite; repeatable.
        #[arg(long)]
        q: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn init_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        // a second initialization only happens in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    init_threads(cli.threads);
    let code = match cli.command {
        Command::Run { config } => run_file(&config),
        Command::Oracle {
            model,
            n_sites,
            s_max,
            gap,
            field,
            zz,
            config,
            s,
            scan,
            observables,
        } => {
            let spec = match config {
                Some(p) => match std::fs::read_to_string(&p)
                    .map_err(|e| e.to_string())
                    .and_then(|t| parse_config(&t).map_err(|e| e.to_string()))
                {
                    Ok(cfg) => cfg.model,
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::from(EXIT_USAGE as u8);
                    }
                },
                None => ModelSpec {
                    family: model,
                    field,
                    zz,
                    ..ModelSpec::tfim_para(n_sites, s_max, gap)
                },
            };
            let mut points = s;
            if let Some(k) = scan {
                let k = k.max(2);
                points.extend((0..k).map(|i| spec.s_max * i as f64 / (k - 1) as f64));
            }
            oracle_query(&spec, &points, &observables, &mut LogWriter::stdout())
        }
        Command::Verify { suite, q, seed } => {
            let mut opts = VerifyOptions {
                seed,
                ..VerifyOptions::default()
            };
            if !q.is_empty() {
                opts.q = q;
            }
            match run_suite(&suite, &opts, &mut LogWriter::stdout()) {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_BREACH,
                Err(SuiteError::Unknown(name)) => {
                    eprintln!("{}", SuiteError::Unknown(name));
                    EXIT_USAGE
                }
                Err(e) => {
                    eprintln!("{e}");
                    adiabat_cli::run::exit_code_for_suite(&e)
                }
            }
        }
    };
    ExitCode::from(code as u8)
}

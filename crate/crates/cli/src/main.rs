use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfregions_cli::commands::{
    cmd_gaussian, cmd_member, cmd_region, cmd_simulate, CliError, RegionOptions, SimulateOptions,
};
use cfregions_core::regions;

/// Compute-forward achievable rate regions for K-user discrete
/// memoryless multiple-access channels with nested linear codes.
#[derive(Parser)]
#[command(name = "cfregions", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a rate region from a channel spec file.
    Region {
        /// Channel spec file (TOML).
        spec: PathBuf,
        /// Restrict the union to these B matrices (row-major literal,
        /// e.g. "1,0,0;0,1,1"); repeatable.
        #[arg(long = "fixed-b")]
        fixed_b: Vec<String>,
        /// Cap the L_B sweep of the full enumeration.
        #[arg(long = "max-lb")]
        max_lb: Option<usize>,
        /// Sequential decoding instead of joint decoding.
        #[arg(long)]
        seq: bool,
        /// Write the region here (plus a vertices CSV for K <= 3);
        /// without it the region is printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test membership of a rate tuple in the spec's region.
    Member {
        spec: PathBuf,
        /// Comma-separated rate tuple in bits.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        /// Added to every rate before the test: positive asks for
        /// strict interior membership, negative grants slack.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        margin: f64,
        #[arg(long = "fixed-b")]
        fixed_b: Vec<String>,
        #[arg(long = "max-lb")]
        max_lb: Option<usize>,
    },
    /// Two-user Gaussian compute-forward closed form.
    Gaussian {
        h1: f64,
        h2: f64,
        p1: f64,
        p2: f64,
        a1: i64,
        a2: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo simulation of the nested linear coding scheme.
    Simulate {
        spec: PathBuf,
        /// Block length.
        #[arg(long)]
        n: usize,
        /// Comma-separated message rates in bits.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        /// Comma-separated auxiliary (multicoding) rates in bits.
        #[arg(long = "aux-rates", value_delimiter = ',', required = true)]
        aux_rates: Vec<f64>,
        /// Decoder typicality parameter.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Encoder typicality parameter (default eps / 2).
        #[arg(long = "eps-prime")]
        eps_prime: Option<f64>,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append one CSV row here (created with a header).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Region {
            spec,
            fixed_b,
            max_lb,
            seq,
            out,
        } => {
            let opts = RegionOptions {
                fixed_b,
                max_lb,
                seq,
                out,
            };
            let report = cmd_region(&spec, &opts)?;
            println!(
                "polytopes {} constraints {}",
                report.polytope_count, report.constraint_count
            );
            match (&report.region_path, &report.vertices_path) {
                (Some(rp), Some(vp)) => {
                    println!("wrote {} and {}", rp.display(), vp.display())
                }
                (Some(rp), None) => println!("wrote {}", rp.display()),
                _ => print!("{}", regions::to_text(&report.region)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Member {
            spec,
            rates,
            margin,
            fixed_b,
            max_lb,
        } => {
            let opts = RegionOptions {
                fixed_b,
                max_lb,
                seq: false,
                out: None,
            };
            let report = cmd_member(&spec, &rates, margin, &opts)?;
            if report.inside {
                println!("inside");
                println!("{}", report.detail);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("outside");
                println!("{}", report.detail);
                Ok(ExitCode::from(1))
            }
        }
        Command::Gaussian {
            h1,
            h2,
            p1,
            p2,
            a1,
            a2,
            out,
        } => {
            let report = cmd_gaussian([h1, h2], [p1, p2], [a1, a2], out.as_deref())?;
            for line in &report.lines {
                println!("{line}");
            }
            if let Some(path) = out {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            spec,
            n,
            rates,
            aux_rates,
            eps,
            eps_prime,
            trials,
            seed,
            out,
        } => {
            let opts = SimulateOptions {
                n,
                rates,
                aux_rates,
                eps,
                eps_prime,
                trials,
                seed,
                out: out.clone(),
            };
            let report = cmd_simulate(&spec, &opts)?;
            println!("{}", report.csv_row);
            println!("{}", report.summary);
            if let Some(path) = out {
                println!("appended to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

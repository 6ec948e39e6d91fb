use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use slproj::bisection::scan_roots;
use slproj::cli::{
    bench_specs, exit_code, format_matrix, format_number, parse_matrix, run_bench, summary_path, EXIT_OK,
    EXIT_SOLVER,
};
use slproj::derivative::projection_derivative;
use slproj::linalg::svd;
use slproj::projector::project;
use slproj::solver::{Algorithm, SolveOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use slproj::spectrum::Spectrum;
use slproj::testgen::{generate_set, Family, TestSetSpec, DEFAULT_EPSILON};
use slproj::{Error, Result};

#[derive(Parser)]
#[command(name = "slproj", version, about = "Closest-point projection onto SL(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a matrix onto SL(n).
    Project {
        /// Matrix file (JSON or CSV); `-` reads stdin.
        #[arg(long)]
        input: PathBuf,
        /// Solver for the diagonal problem. Default: Newton with bisection fallback.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Write the full result as JSON to this file.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Derivative of the projection in a given direction.
    Derivative {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        direction: PathBuf,
    },
    /// Generate a random test set.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "ge1")]
        family: Family,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run every algorithm on generated test sets and write a CSV report.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,8,16,32,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "ge1,lt1,singular,cone_boundary")]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',', default_value = "bisection,composite,newton-hyp,newton-log")]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
    /// List all stationary points on the solution path of a matrix's spectrum.
    PathScan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
}

fn read_matrix(path: &Path) -> Result<slproj::linalg::MatrixN> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        fs::read_to_string(path)?
    };
    parse_matrix(&text)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Project {
            input,
            algorithm,
            tol,
            max_iter,
            json_out,
        } => {
            let a = read_matrix(&input)?;
            let opts = SolveOptions {
                tol,
                max_iter,
                record_iterates: false,
            };
            let r = project(&a, algorithm, &opts)?;
            println!("{}", format_matrix(&r.p_matrix));
            eprintln!(
                "algorithm={} status={} iterations={} lambda={} distance={} residual={}",
                r.algorithm,
                r.report.status,
                r.report.iterations,
                format_number(r.lambda),
                format_number(r.distance),
                format_number(r.report.residual)
            );
            if let Some(path) = json_out {
                let text = serde_json::to_string_pretty(&r).map_err(|e| Error::Parse(e.to_string()))?;
                fs::write(path, text)?;
            }
            Ok(if r.is_converged() { EXIT_OK } else { EXIT_SOLVER })
        }
        Command::Derivative { input, direction } => {
            let a = read_matrix(&input)?;
            let da = read_matrix(&direction)?;
            let r = project(&a, None, &SolveOptions::default())?;
            if !r.is_converged() {
                return Ok(EXIT_SOLVER);
            }
            let d = projection_derivative(&a, &da, &r)?;
            println!(
                "{}",
                json!({
                    "delta_p": serde_json::from_str::<serde_json::Value>(&format_matrix(&d.delta_p))
                        .map_err(|e| Error::Parse(e.to_string()))?,
                    "delta_lambda": d.delta_lambda,
                })
            );
            Ok(EXIT_OK)
        }
        Command::Gen {
            n,
            family,
            count,
            seed,
            epsilon,
            out_dir,
        } => {
            let spec = TestSetSpec {
                n,
                count,
                epsilon,
                seed,
                family,
            };
            fs::create_dir_all(&out_dir)?;
            for (k, m) in generate_set(&spec)?.iter().enumerate() {
                let path = out_dir.join(format!("{family}_n{n}_{k:04}.json"));
                fs::write(&path, format_matrix(m) + "\n")?;
                println!("{}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Bench {
            sizes,
            count,
            seed,
            families,
            algorithms,
            out,
        } => {
            let specs = bench_specs(&sizes, count, seed, &families);
            let records = run_bench(&specs, &algorithms, &out)?;
            eprintln!(
                "{} records written to {} (summary: {})",
                records.len(),
                out.display(),
                summary_path(&out).display()
            );
            Ok(EXIT_OK)
        }
        Command::PathScan { input, grid } => {
            let a = read_matrix(&input)?;
            let f = svd(&a)?;
            if f.sign < 0 {
                return Err(Error::InvalidArgument("path scan requires det A >= 0".into()));
            }
            let roots = scan_roots(&Spectrum::new(f.sigma)?, grid)?;
            println!("{}", serde_json::to_string_pretty(&roots).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

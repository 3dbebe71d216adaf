//! `fm`: density evaluation, trajectory sampling, and the verification
//! harness for the free-Meixner kernel library.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use free_meixner::kernel::{marginal, transition_measure, ProcessParams};
use free_meixner::simulate::{empirical_stats, sample_paths};
use free_meixner::verify;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "fm",
    version,
    about = "Free-Meixner Markov kernels: densities, sampling, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputOpts {
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the transition density P_{s,t}(x, .) on a grid
    Density {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        tau: f64,
        /// Conditioning time s
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Target time t
        #[arg(long)]
        t: f64,
        /// State at time s
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 512)]
        grid_n: usize,
        /// Quadrature tolerance for the mass check echoed in the header
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run a verification suite; exit 0 iff every check passes
    Verify {
        /// Suite: aw | nu | ck | martingale | generator
        which: String,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        /// Real part of a transform-variable override (martingale suite)
        #[arg(long, allow_negative_numbers = true)]
        z_re: Option<f64>,
        /// Imaginary part of the transform-variable override
        #[arg(long, allow_negative_numbers = true)]
        z_im: Option<f64>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Sample trajectories on a time grid
    Sample {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        tau: f64,
        /// Explicit comma-separated time grid, e.g. "0.1,0.2,0.5"
        #[arg(long)]
        grid: Option<String>,
        /// Uniform-grid horizon (with --grid-n)
        #[arg(long = "grid-T")]
        grid_t: Option<f64>,
        /// Uniform-grid step count
        #[arg(long, default_value_t = 10)]
        grid_n: usize,
        /// Number of paths
        #[arg(long, default_value_t = 1)]
        paths: usize,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append per-time moment and KS statistics as JSON
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fm: error: {e}");
            ExitCode::from(2)
        }
    }
}

fn write_out(output: &OutputOpts, content: &str) -> Result<(), free_meixner::Error> {
    match &output.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, free_meixner::Error> {
    match cli.command {
        Command::Density {
            theta,
            tau,
            s,
            t,
            x,
            grid_n,
            tol,
            output,
        } => {
            if !(tol > 0.0) {
                return Err(free_meixner::Error::InvalidParams("--tol must be positive".into()));
            }
            let p = ProcessParams::new(theta, tau)?;
            let kern = if s == 0.0 && x == 0.0 {
                marginal(&p, t)?
            } else {
                transition_measure(&p, s, t, x)?
            };
            let mass = kern.measure().mass(tol)?;
            let snapshot = kern.measure().to_json(grid_n);
            let content = match output.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "meta": {
                            "version": VERSION,
                            "theta": theta, "tau": tau, "s": s, "t": t, "x": x,
                            "tol": tol, "mass": mass,
                        },
                        "measure": snapshot,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
                }
                Format::Csv => {
                    let mut buf = String::new();
                    let _ = writeln!(
                        buf,
                        "# fm density version={VERSION} theta={theta} tau={tau} s={s} t={t} x={x} tol={tol:e} mass={mass}"
                    );
                    let _ = writeln!(
                        buf,
                        "# atoms={}",
                        serde_json::to_string(&snapshot.atoms).expect("serializable")
                    );
                    let _ = writeln!(buf, "y,density");
                    for (y, d) in snapshot.grid.iter().zip(&snapshot.density) {
                        let _ = writeln!(buf, "{y},{d}");
                    }
                    buf
                }
            };
            write_out(&output, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            which,
            theta,
            tau,
            z_re,
            z_im,
            output,
        } => {
            let grid: Vec<(f64, f64)> = match (theta, tau) {
                (Some(th), Some(ta)) => vec![(th, ta)],
                (Some(th), None) => vec![(th, 0.0)],
                (None, Some(ta)) => vec![(0.0, ta)],
                (None, None) => verify::DEFAULT_PROCESS_GRID.to_vec(),
            };
            let z_override = match (z_re, z_im) {
                (None, None) => None,
                (re, im) => Some(Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0))),
            };
            let reports = match which.as_str() {
                "aw" => verify::verify_aw()?,
                "nu" => verify::verify_nu()?,
                "ck" => {
                    let mut r = verify::verify_nu_convolution()?;
                    r.extend(verify::verify_fm_kernels(&grid)?);
                    r
                }
                "martingale" => verify::verify_martingale(&grid, z_override)?,
                "generator" => verify::verify_generator(&grid)?,
                other => {
                    return Err(free_meixner::Error::InvalidParams(format!(
                        "unknown suite '{other}' (expected aw | nu | ck | martingale | generator)"
                    )))
                }
            };
            let all_pass = reports.iter().all(|r| r.pass);
            let doc = serde_json::json!({
                "meta": { "version": VERSION, "suite": which, "grid": grid },
                "reports": reports,
                "pass": all_pass,
            });
            write_out(
                &output,
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")),
            )?;
            for r in &reports {
                eprintln!(
                    "{}: {} (max deviation {:.3e}, tolerance {:.1e}, {} cases, {} ms)",
                    r.check,
                    if r.pass { "pass" } else { "FAIL" },
                    r.max_deviation,
                    r.tolerance,
                    r.cases,
                    r.runtime_ms,
                );
                if !r.pass {
                    eprintln!("  worst case: {}", r.worst_case);
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sample {
            theta,
            tau,
            grid,
            grid_t,
            grid_n,
            paths,
            seed,
            stats,
            output,
        } => {
            let p = ProcessParams::new(theta, tau)?;
            let times: Vec<f64> = match (grid, grid_t) {
                (Some(list), _) => list
                    .split(',')
                    .map(|tok| {
                        tok.trim().parse::<f64>().map_err(|_| {
                            free_meixner::Error::InvalidParams(format!(
                                "cannot parse grid entry '{tok}'"
                            ))
                        })
                    })
                    .collect::<Result<_, _>>()?,
                (None, Some(horizon)) => {
                    if grid_n == 0 {
                        return Err(free_meixner::Error::InvalidParams(
                            "--grid-n must be positive".into(),
                        ));
                    }
                    (1..=grid_n)
                        .map(|i| horizon * i as f64 / grid_n as f64)
                        .collect()
                }
                (None, None) => {
                    return Err(free_meixner::Error::InvalidParams(
                        "provide --grid or --grid-T".into(),
                    ))
                }
            };
            let ensemble = sample_paths(&p, &times, paths, seed)?;
            let mut buf = String::new();
            let _ = writeln!(
                buf,
                "# fm sample version={VERSION} theta={theta} tau={tau} paths={paths} seed={seed}"
            );
            let _ = writeln!(buf, "time,value,atom_flag");
            for (i, path) in ensemble.iter().enumerate() {
                if ensemble.len() > 1 {
                    let _ = writeln!(buf, "# path {i}");
                }
                for j in 0..path.times.len() {
                    let _ = writeln!(
                        buf,
                        "{},{},{}",
                        path.times[j],
                        path.values[j],
                        u8::from(path.atom_flags[j])
                    );
                }
            }
            write_out(&output, &buf)?;
            if stats {
                let table = empirical_stats(&p, &ensemble)?;
                let doc = serde_json::json!({
                    "meta": { "version": VERSION, "theta": theta, "tau": tau,
                              "paths": paths, "seed": seed },
                    "stats": table,
                });
                let rendered =
                    format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"));
                match &output.out {
                    Some(path) => {
                        let stats_path = path.with_extension("stats.json");
                        std::fs::write(&stats_path, rendered)?;
                        eprintln!("stats written to {}", stats_path.display());
                    }
                    None => print!("{rendered}"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 on success (and when every verification row passes),
//! 1 on verification failure or runtime error, 2 on usage errors.

use clap::{Parser, Subcommand, ValueEnum};
use power_spherical::harness::{self, grid, OutputFormat};
use power_spherical::Error;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "psphere",
    version,
    about = "Power Spherical distribution toolkit: stability and timing experiments, \
             Monte-Carlo verification, sampling, and density evaluation"
)]
struct Cli {
    /// Master seed; every command is deterministic given this value
    /// (timing measurements excepted).
    #[arg(long, global = true, default_value_t = 20_200_605)]
    seed: u64,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Jsonl => OutputFormat::Jsonl,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Numerical-stability sweep: 10 samples + gradients per (d, kappa)
    /// cell for both distributions, non-finite values flagged.
    StabilitySweep {
        /// Dimension grid (entries below 2 are skipped).
        #[arg(long, default_value = grid::STABILITY_GRID)]
        d_grid: String,
        /// Concentration grid.
        #[arg(long, default_value = grid::STABILITY_GRID)]
        kappa_grid: String,
        #[arg(long, default_value_t = 10)]
        samples_per_cell: usize,
    },
    /// Wall-clock batch-sampling benchmark over a concentration grid.
    BenchTiming {
        #[arg(long, default_value_t = 64)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        batch: usize,
        #[arg(long, default_value = grid::TIMING_KAPPA_GRID)]
        kappa_grid: String,
        #[arg(long, default_value_t = 7)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
    },
    /// Closed-form vs Monte-Carlo verification suite; exits 1 if any row
    /// fails.
    McVerify {
        /// Override the moment cells as `d:kappa,d:kappa,...`
        /// (kl_vmf and gradient cells keep their defaults).
        #[arg(long)]
        cells: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        n_samples: usize,
    },
    /// Draw unit vectors from the Power Spherical distribution.
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        n: usize,
    },
    /// Evaluate log densities for rows of comma-separated coordinates.
    Logprob {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        kappa: f64,
        /// Also emit von Mises-Fisher log densities.
        #[arg(long)]
        vmf: bool,
        /// Skip the first input line (e.g. a CSV header).
        #[arg(long)]
        skip_header: bool,
        /// Input path (stdin when omitted).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Closed-form KL divergences from uniform and (optionally) from a vMF.
    Kl {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        kappa_q: Option<f64>,
        /// Cosine between the vMF mean direction and mu (1 aligned,
        /// -1 anti-aligned).
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        mu_dot: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::GridSpec(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let mut out: BufWriter<Box<dyn Write>> = BufWriter::new(match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout()),
    });
    let format: OutputFormat = cli.format.into();
    let seed = cli.seed;

    let code = match cli.command {
        Command::StabilitySweep {
            d_grid,
            kappa_grid,
            samples_per_cell,
        } => {
            let cfg = harness::StabilityConfig {
                d_grid: grid::parse_dimension_grid(&d_grid)?,
                kappa_grid: grid::parse_grid_spec(&kappa_grid)?,
                samples_per_cell,
                seed,
            };
            let rows = harness::stability_sweep(&cfg);
            harness::write_stability(&mut out, &rows, format)?;
            ExitCode::SUCCESS
        }
        Command::BenchTiming {
            d,
            batch,
            kappa_grid,
            trials,
            reps,
        } => {
            let cfg = harness::TimingConfig {
                d,
                batch,
                kappa_grid: grid::parse_grid_spec(&kappa_grid)?,
                trials,
                reps,
                seed,
            };
            let rows = harness::bench_timing(&cfg)?;
            harness::write_timing(&mut out, &rows, format)?;
            ExitCode::SUCCESS
        }
        Command::McVerify { cells, n_samples } => {
            let mut cfg = harness::VerifyConfig::defaults(seed);
            cfg.n_samples = n_samples;
            if let Some(spec) = cells {
                cfg.moment_cells = parse_cells(&spec)?;
            }
            let rows = harness::mc_verify(&cfg)?;
            harness::write_verify(&mut out, &rows, format)?;
            let failing: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            if failing.is_empty() {
                ExitCode::SUCCESS
            } else {
                for r in &failing {
                    eprintln!(
                        "FAIL {} d={} kappa={}: closed {} vs mc {} (se {})",
                        r.quantity.as_str(),
                        r.d,
                        r.kappa,
                        r.closed_form,
                        r.mc_estimate,
                        r.mc_se
                    );
                }
                ExitCode::from(1)
            }
        }
        Command::Sample { d, kappa, n } => {
            let rows = harness::sample_rows(&harness::SampleConfig { d, kappa, n, seed })?;
            harness::write_samples(&mut out, d, &rows, format)?;
            ExitCode::SUCCESS
        }
        Command::Logprob {
            d,
            kappa,
            vmf,
            skip_header,
            input,
        } => {
            let reader: Box<dyn BufRead> = match &input {
                Some(path) => Box::new(BufReader::new(File::open(path)?)),
                None => Box::new(BufReader::new(io::stdin())),
            };
            let (rows, any_error) =
                harness::logprob_rows(d, kappa, vmf, skip_header, reader, seed)?;
            harness::write_logprob(&mut out, &rows, format)?;
            if any_error {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Kl {
            d,
            kappa,
            kappa_q,
            mu_dot,
        } => {
            let rows = harness::kl_rows(d, kappa, kappa_q, mu_dot, seed)?;
            harness::write_kl(&mut out, &rows, format)?;
            ExitCode::SUCCESS
        }
    };
    out.flush()?;
    Ok(code)
}

fn parse_cells(spec: &str) -> Result<Vec<(usize, f64)>, Error> {
    spec.split(',')
        .map(|cell| {
            let (d, k) = cell
                .split_once(':')
                .ok_or_else(|| Error::Usage(format!("bad cell `{cell}`, expected d:kappa")))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad dimension in `{cell}`")))?;
            let k: f64 = k
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad kappa in `{cell}`")))?;
            Ok((d, k))
        })
        .collect()
}

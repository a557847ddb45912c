//! `eqdist`: command-line front end for the Monte Carlo harness.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use eqdist_core::bases::condition_ii_count;
use eqdist_core::ensembles::PolynomialSample;
use eqdist_core::harness::{
    self, parse_complex, trial_stream, ArrayLabel, EnsembleLabel, ExperimentConfig, Format,
    HarnessError, Prepared,
};
use eqdist_core::rngdist::{classify_conditions, empirical_tail_report, sample, DistributionSpec};
use eqdist_core::roots::find_roots_default;
use eqdist_core::stats::{
    covering_number, normalized_coefficient_points, potential_l1_error, potential_l1_error_2, Grid,
    Grid2,
};

#[derive(Parser, Debug)]
#[command(name = "eqdist", version, about = "Zeros of random polynomials against their limit measures")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "EQDIST_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sweep described by a JSON config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Draw one polynomial and print its roots as CSV.
    Roots {
        #[arg(long)]
        ensemble: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "gaussian")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a coefficient law against the tail conditions.
    TailCheck {
        #[arg(long)]
        dist: String,
        /// Dimension in the tail conditions.
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Draws for the empirical tail table; 0 skips it.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count dominant coefficients and cover the normalized coefficient points.
    CoverCheck {
        #[arg(long)]
        array: String,
        #[arg(long)]
        n: usize,
        /// Evaluation point `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        eps: f64,
    },
    /// Mean potential error of one draw on the default grid.
    PotentialGrid {
        #[arg(long)]
        ensemble: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "gaussian")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

/// Failure classes and their exit codes.
enum Failure {
    Config(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn parse_dist(s: &str) -> Result<DistributionSpec, Failure> {
    s.parse().map_err(|e| config_err(format!("--dist: {e}")))
}

fn one_variable(label: &str, n: usize) -> Result<(EnsembleLabel, Prepared), Failure> {
    let ensemble: EnsembleLabel = label.parse().map_err(|e| config_err(format!("--ensemble: {e}")))?;
    if n == 0 {
        return Err(config_err("--n must be at least 1"));
    }
    let prepared = Prepared::new(&ensemble, n).map_err(config_err)?;
    Ok((ensemble, prepared))
}

fn draw_one(prepared: &Prepared, n: usize, dist: &DistributionSpec, seed: u64, trial: usize) -> Result<PolynomialSample, Failure> {
    match prepared.draw(n, dist, seed, trial_stream(n, trial)) {
        None => Err(config_err("the two-variable ensemble has no one-variable draw")),
        Some(r) => r.map_err(config_err),
    }
}

fn write_out(out: &mut impl Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("standard output: {e}")))
}

fn execute(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, output_dir } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Failure::Io(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::from_json(&text).map_err(config_err)?;
            let mut result = harness::run(&cfg, cli.threads)?;
            if let Some(dir) = output_dir.or_else(|| cfg.output_dir.clone()) {
                harness::emit(&mut result, &dir, &[Format::Csv, Format::Json])?;
            }
            write_out(out, &result.summary_json())
        }
        Command::Roots {
            ensemble,
            n,
            dist,
            seed,
            trial,
            out: path,
        } => {
            let dist = parse_dist(&dist)?;
            let (_, prepared) = one_variable(&ensemble, n)?;
            let p = draw_one(&prepared, n, &dist, seed, trial)?;
            let rs = find_roots_default(&p).map_err(config_err)?;
            let csv = harness::roots_csv(&rs.roots);
            match path {
                Some(path) => fs::write(&path, csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
                None => write_out(out, &csv),
            }
        }
        Command::TailCheck { dist, d, samples, seed } => {
            let spec = parse_dist(&dist)?;
            let report = classify_conditions(&spec, d);
            let mut text = format!(
                "dist={}\nd={d}\nmeas_holds={}\nelog_power_finite={}\n",
                spec.label(),
                report.meas_holds,
                report.elog_power_finite
            );
            if samples > 0 {
                let draws = sample(&spec, seed, samples);
                let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
                text.push_str("t,empirical,exact\n");
                for row in empirical_tail_report(&spec, &draws, &grid) {
                    text.push_str(&format!("{},{:.6},{:.6}\n", row.t, row.empirical, row.exact));
                }
            }
            write_out(out, &text)
        }
        Command::CoverCheck { array, n, z, eps } => {
            let label: ArrayLabel = array.parse().map_err(|e| config_err(format!("--array: {e}")))?;
            let z: Complex64 = parse_complex(&z).map_err(|e| config_err(format!("--z: {e}")))?;
            if n == 0 || !(eps > 0.0) {
                return Err(config_err("--n must be at least 1 and --eps positive"));
            }
            let arr = label.build(n).map_err(config_err)?;
            let v = label.limit().value(z);
            let count = condition_ii_count(&arr, z, eps, v);
            let p = PolynomialSample::from_coeffs(format!("array:{label}"), arr.to_ext()).map_err(config_err)?;
            let points = normalized_coefficient_points(&p, z);
            let radius = (-eps * n as f64).exp();
            let cover = covering_number(&points, radius);
            write_out(
                out,
                &format!(
                    "array={label}\nn={n}\nz={},{}\neps={eps}\nlimit_potential={v:.12}\ncondition_ii_count={count}\ncover_radius={radius:e}\ncovering_number={cover}\n",
                    z.re, z.im
                ),
            )
        }
        Command::PotentialGrid {
            ensemble,
            n,
            dist,
            seed,
            trial,
        } => {
            let dist = parse_dist(&dist)?;
            let (label, prepared) = one_variable(&ensemble, n)?;
            let err = if label.is_two_variable() {
                let p = prepared
                    .draw2(n, &dist, seed, trial_stream(n, trial))
                    .map_err(config_err)?;
                potential_l1_error_2(&p, &Grid2::default_two_variable())
            } else {
                let p = draw_one(&prepared, n, &dist, seed, trial)?;
                potential_l1_error(&p, &label.limit(), &Grid::default_one_variable())
            };
            write_out(
                out,
                &format!(
                    "ensemble={label}\nn={n}\npotential_l1={:.12}\nclip_bias={:.12}\n",
                    err.value, err.clip_bias
                ),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("eqdist: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

//! Config-driven Monte Carlo sweeps: draw, solve, measure, aggregate, emit.

mod config;
mod labels;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, Plan};
pub use labels::{
    parse_complex, ArrayLabel, BasisLabel, EnsembleLabel, LabelError, StatLabel,
};

use crate::bases::{BasisError, CoefficientArray, OrthoBasis};
use crate::ensembles::{
    draw_array, draw_kac, draw_kac2, draw_ortho, EnsembleError, PolynomialSample,
    PolynomialSample2,
};
use crate::potential::LimitPotential;
use crate::roots::{find_roots_default, RootError};
use crate::rngdist::DistributionSpec;
use crate::stats::{
    annulus_mass, potential_l1_error, potential_l1_error_2, radial_ks, weyl_sums, BlEstimator,
    DiscrepancyReport, EmpiricalMeasure, Grid, Grid2,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot prepare degree {n}: {source}")]
    Basis { n: usize, source: BasisError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// RNG substream of a trial. Keyed by the degree value, not its position in
/// the sweep, so adding degrees never changes existing trials.
pub fn trial_stream(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) | trial as u64
}

/// Per-degree data shared by all trials.
#[derive(Clone, Debug)]
pub enum Prepared {
    Kac,
    Ortho(OrthoBasis),
    Array(CoefficientArray),
    Kac2,
}

impl Prepared {
    pub fn new(ensemble: &EnsembleLabel, n: usize) -> Result<Self, BasisError> {
        Ok(match ensemble {
            EnsembleLabel::Kac => Prepared::Kac,
            EnsembleLabel::Kac2 => Prepared::Kac2,
            EnsembleLabel::Ortho(b) => Prepared::Ortho(b.build(n)?),
            EnsembleLabel::Array(a) => Prepared::Array(a.build(n)?),
        })
    }

    /// One-variable draw; `None` for the two-variable ensemble.
    pub fn draw(
        &self,
        n: usize,
        dist: &DistributionSpec,
        seed: u64,
        stream: u64,
    ) -> Option<Result<PolynomialSample, EnsembleError>> {
        Some(match self {
            Prepared::Kac => draw_kac(n, dist, seed, stream),
            Prepared::Ortho(b) => draw_ortho(n, b, dist, seed, stream),
            Prepared::Array(a) => draw_array(n, a, dist, seed, stream),
            Prepared::Kac2 => return None,
        })
    }

    pub fn draw2(
        &self,
        n: usize,
        dist: &DistributionSpec,
        seed: u64,
        stream: u64,
    ) -> Result<PolynomialSample2, EnsembleError> {
        draw_kac2(n, dist, seed, stream)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    NoConvergence,
    IdenticallyZero,
}

/// Everything recorded about one `(degree, trial)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub status: TrialStatus,
    /// Roots found, when the ensemble has them.
    #[serde(skip)]
    pub roots: Option<Vec<Complex64>>,
    pub realized_degree: Option<usize>,
    pub report: DiscrepancyReport,
    pub values: BTreeMap<String, f64>,
    pub root_file: Option<String>,
    pub message: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Failures {
    pub no_convergence: usize,
    pub identically_zero: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

impl Aggregate {
    /// Linear-interpolation quantiles of the sorted values.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Aggregate {
            mean: crate::stats::pairwise_sum(&v) / v.len() as f64,
            median: q(0.5),
            q10: q(0.1),
            q90: q(0.9),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub n: usize,
    pub stats: BTreeMap<String, Aggregate>,
    pub failures: Failures,
    pub successes: usize,
    /// Successful trials whose realized degree fell below `n`.
    pub degree_deficient: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_echo: ExperimentConfig,
    pub per_degree: Vec<DegreeSummary>,
    pub version: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub summary: Summary,
    /// Ordered by degree, then trial.
    pub trials: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn degree(&self, n: usize) -> Option<&DegreeSummary> {
        self.summary.per_degree.iter().find(|d| d.n == n)
    }

    /// Values of one statistic over the successful trials of a degree.
    pub fn values(&self, n: usize, name: &str) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.n == n && t.status == TrialStatus::Ok)
            .filter_map(|t| t.values.get(name).copied())
            .collect()
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn trials_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.trials).expect("trials serialize");
        s.push('\n');
        s
    }
}

/// Read-only context of a sweep.
struct Context<'a> {
    plan: &'a Plan,
    limit: LimitPotential,
    bl: Option<BlEstimator>,
    grid: Grid,
    grid2: Grid2,
}

fn run_trial(ctx: &Context<'_>, prepared: &Prepared, n: usize, trial: usize) -> TrialRecord {
    let cfg = &ctx.plan.config;
    let stream = trial_stream(n, trial);
    let mut rec = TrialRecord {
        n,
        trial,
        status: TrialStatus::Ok,
        roots: None,
        realized_degree: None,
        report: DiscrepancyReport::default(),
        values: BTreeMap::new(),
        root_file: None,
        message: None,
    };
    let fail = |mut rec: TrialRecord, status, msg: String| {
        rec.status = status;
        rec.message = Some(msg);
        rec
    };

    let Some(drawn) = prepared.draw(n, &cfg.dist, cfg.seed, stream) else {
        return match prepared.draw2(n, &cfg.dist, cfg.seed, stream) {
            Err(e) => fail(rec, TrialStatus::IdenticallyZero, e.to_string()),
            Ok(p2) => {
                for st in &ctx.plan.statistics {
                    if let StatLabel::PotentialL1 = st {
                        let e = potential_l1_error_2(&p2, &ctx.grid2);
                        rec.report.potential_l1 = Some(e.value);
                        rec.report.clip_bias = Some(e.clip_bias);
                        rec.values.insert(st.to_string(), e.value);
                    }
                }
                rec
            }
        };
    };
    let p = match drawn {
        Ok(p) => p,
        Err(e) => return fail(rec, TrialStatus::IdenticallyZero, e.to_string()),
    };
    let needs_roots = ctx.plan.statistics.iter().any(|s| s.needs_roots());
    let emp = if needs_roots || ctx.plan.statistics.is_empty() {
        match find_roots_default(&p) {
            Ok(rs) => {
                rec.realized_degree = Some(rs.realized_degree);
                let emp = EmpiricalMeasure::from_roots(&rs, n);
                rec.roots = Some(rs.roots);
                Some(emp)
            }
            Err(RootError::IdenticallyZero) => {
                return fail(rec, TrialStatus::IdenticallyZero, "identically zero".into())
            }
            Err(e) => return fail(rec, TrialStatus::NoConvergence, e.to_string()),
        }
    } else {
        None
    };
    for st in &ctx.plan.statistics {
        let name = st.to_string();
        match (st, &emp) {
            (StatLabel::RadialKs, Some(emp)) => {
                let v = radial_ks(emp, &ctx.limit);
                rec.report.radial_ks = Some(v);
                rec.values.insert(name, v);
            }
            (StatLabel::Weyl(k), Some(emp)) => {
                let w = weyl_sums(emp, *k);
                for (j, v) in w.iter().enumerate() {
                    rec.values.insert(format!("weyl_{}", j + 1), *v);
                }
                rec.report.weyl = w;
            }
            (StatLabel::AnnulusMass(lo, hi), Some(emp)) => {
                let v = annulus_mass(emp, *lo, *hi);
                rec.report.annulus_mass.get_or_insert(v);
                rec.values.insert(name, v);
            }
            (StatLabel::NoRootsEvent(lo, hi), Some(emp)) => {
                let v = if annulus_mass(emp, *lo, *hi) == 0.0 { 1.0 } else { 0.0 };
                rec.values.insert(name, v);
            }
            (StatLabel::BlEstimate, Some(emp)) => {
                let v = ctx.bl.as_ref().expect("built when requested").estimate(emp);
                rec.report.bl_estimate = Some(v);
                rec.values.insert(name, v);
            }
            (StatLabel::Mass, Some(emp)) => {
                rec.values.insert(name, emp.mass());
            }
            (StatLabel::PotentialL1, _) => {
                let e = potential_l1_error(&p, &ctx.limit, &ctx.grid);
                rec.report.potential_l1 = Some(e.value);
                rec.report.clip_bias = Some(e.clip_bias);
                rec.values.insert(name, e.value);
            }
            (_, None) => unreachable!("roots are computed whenever a statistic needs them"),
        }
    }
    rec
}

fn summarize(plan: &Plan, trials: &[TrialRecord]) -> Summary {
    let names: Vec<String> = plan.statistics.iter().flat_map(|s| s.value_names()).collect();
    let per_degree = plan
        .config
        .degrees
        .iter()
        .map(|&n| {
            let mine: Vec<&TrialRecord> = trials.iter().filter(|t| t.n == n).collect();
            let mut failures = Failures::default();
            let mut successes = 0;
            let mut degree_deficient = 0;
            for t in &mine {
                match t.status {
                    TrialStatus::Ok => {
                        successes += 1;
                        if t.realized_degree.is_some_and(|d| d < n) {
                            degree_deficient += 1;
                        }
                    }
                    TrialStatus::NoConvergence => failures.no_convergence += 1,
                    TrialStatus::IdenticallyZero => failures.identically_zero += 1,
                }
            }
            let stats = names
                .iter()
                .filter_map(|name| {
                    let vals: Vec<f64> = mine
                        .iter()
                        .filter(|t| t.status == TrialStatus::Ok)
                        .filter_map(|t| t.values.get(name).copied())
                        .collect();
                    Aggregate::of(&vals).map(|a| (name.clone(), a))
                })
                .collect();
            DegreeSummary {
                n,
                stats,
                failures,
                successes,
                degree_deficient,
            }
        })
        .collect();
    Summary {
        config_echo: plan.config.clone(),
        per_degree,
        version: VERSION.to_string(),
    }
}

/// Runs a sweep on `threads` workers (all cores when `None`). Results do not
/// depend on the worker count.
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult, HarnessError> {
    let plan = config.plan()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let limit = plan.ensemble.limit();
    let ctx = Context {
        bl: plan
            .statistics
            .contains(&StatLabel::BlEstimate)
            .then(|| BlEstimator::new(&limit)),
        limit,
        plan: &plan,
        grid: Grid::default_one_variable(),
        grid2: Grid2::default_two_variable(),
    };
    let prepared: Vec<Prepared> = pool.install(|| {
        config
            .degrees
            .par_iter()
            .map(|&n| Prepared::new(&plan.ensemble, n).map_err(|source| HarnessError::Basis { n, source }))
            .collect::<Result<_, _>>()
    })?;
    let jobs: Vec<(usize, usize)> = (0..config.degrees.len())
        .flat_map(|d| (0..config.trials).map(move |t| (d, t)))
        .collect();
    let trials: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, t)| run_trial(&ctx, &prepared[d], config.degrees[d], t))
            .collect()
    });
    let summary = summarize(&plan, &trials);
    Ok(ExperimentResult { summary, trials })
}

/// Output formats of [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `summary.json` and `trials.json`.
    Json,
    /// One `roots/n<n>_t<trial>.csv` per trial with roots.
    Csv,
}

/// Roots sorted by argument in `[0, 2pi)`, then by modulus.
pub fn sorted_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let key = |z: &Complex64| {
        let a = z.im.atan2(z.re);
        let a = if a < 0.0 { a + std::f64::consts::TAU } else { a };
        (if a >= std::f64::consts::TAU { 0.0 } else { a }, z.norm())
    };
    let mut v = roots.to_vec();
    v.sort_by(|x, y| {
        let (ax, rx) = key(x);
        let (ay, ry) = key(y);
        ax.total_cmp(&ay).then(rx.total_cmp(&ry))
    });
    v
}

/// CSV text with header `re,im` and 17 significant digits per value.
pub fn roots_csv(roots: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in sorted_roots(roots) {
        out.push_str(&format!("{:.16e},{:.16e}\n", z.re, z.im));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))
}

/// Writes the result under `dir` and returns the paths written. Root file
/// names are recorded in `trials.json` when both formats are emitted.
pub fn emit(result: &mut ExperimentResult, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        let roots_dir = dir.join("roots");
        fs::create_dir_all(&roots_dir).map_err(io_err(&roots_dir))?;
        for t in result.trials.iter_mut() {
            if let Some(roots) = &t.roots {
                let name = format!("roots/n{}_t{}.csv", t.n, t.trial);
                let path = dir.join(&name);
                write_file(&path, &roots_csv(roots))?;
                t.root_file = Some(name);
                written.push(path);
            }
        }
    }
    if formats.contains(&Format::Json) {
        let path = dir.join("summary.json");
        write_file(&path, &result.summary_json())?;
        written.push(path);
        let path = dir.join("trials.json");
        write_file(&path, &result.trials_json())?;
        written.push(path);
    }
    Ok(written)
}

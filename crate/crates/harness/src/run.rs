//! Seeded replications and file emission.
//!
//! Replication `r` draws from `RngStream::split(seed, r)` and renders its
//! rounds into a private buffer; buffers are written in replication order,
//! so the output bytes do not depend on `jobs`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use mints_core::cutting_plane::{cog_record, cog_run, ellipsoid_record, ellipsoid_run};
use mints_core::lipschitz::run_continuum_episode;
use mints_core::mab::{run_episode, run_ts_episode};
use mints_core::model::EpisodeRecord;
use mints_core::pricing::run_pricing_episode;
use mints_core::RngStream;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ExperimentConfig, Params, Policy};

pub const SCHEMA_VERSION: u32 = 1;
pub const ROUNDS_FILE: &str = "rounds.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("replication {rep}: {source}")]
    Replication {
        rep: u64,
        #[source]
        source: mints_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One replication, rendered.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    /// JSONL round records, one per line.
    pub jsonl: Vec<u8>,
    /// Cumulative regret after each executed round. Cutting-plane runs may
    /// stop before the horizon.
    pub cumulative: Vec<f64>,
    /// Pulls per arm for the finite-armed families.
    pub pulls: Option<Vec<u64>>,
}

impl RepOutcome {
    /// `R(t)`, holding the last value once a run has stopped early.
    pub fn regret_at(&self, t: usize) -> f64 {
        let n = t.min(self.cumulative.len());
        if n == 0 {
            0.0
        } else {
            self.cumulative[n - 1]
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub family: String,
    pub policy: String,
    pub config_hash: String,
    pub env_hash: String,
    pub rounds: usize,
    pub checkpoints: Vec<usize>,
    pub final_regret: Vec<f64>,
    /// Per replication, `R(t)` at each checkpoint.
    pub traces: Vec<Vec<f64>>,
    pub mean_trace: Vec<f64>,
    pub stderr_trace: Vec<f64>,
    /// Per replication, when the family has arms.
    pub pulls: Vec<Option<Vec<u64>>>,
    /// Not written to any file, so outputs stay deterministic.
    pub wall_clock: Duration,
}

/// `{T/8, T/4, T/2, T}`, each at least 1, deduplicated.
pub fn checkpoints(rounds: usize) -> Vec<usize> {
    let mut c: Vec<usize> = [rounds / 8, rounds / 4, rounds / 2, rounds]
        .iter()
        .map(|&t| t.max(1))
        .collect();
    c.dedup();
    c
}

/// Sample mean and standard error of the mean (zero for one sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Serialize)]
struct Header<'a> {
    schema_version: u32,
    family: &'a str,
    policy: &'a str,
    config_hash: &'a str,
    env_hash: &'a str,
    seed: u64,
    replications: u64,
    rounds: usize,
}

#[derive(Serialize)]
struct RoundLine<'a, X, P> {
    rep: u64,
    t: usize,
    x: &'a X,
    phi: &'a P,
    regret: f64,
    cum_regret: f64,
    posterior_entropy: Option<f64>,
}

fn render<X: Serialize, P: Serialize>(rep: u64, rec: &EpisodeRecord<X, f64, P>) -> Vec<u8> {
    let mut out = Vec::with_capacity(rec.len() * 96);
    for (r, &cum) in rec.rounds().iter().zip(rec.cumulative_regret()) {
        let line = RoundLine {
            rep,
            t: r.t,
            x: &r.decision,
            phi: &r.feedback,
            regret: r.regret,
            cum_regret: cum,
            posterior_entropy: r.entropy,
        };
        serde_json::to_writer(&mut out, &line).expect("round records serialize");
        out.push(b'\n');
    }
    out
}

fn outcome<X: Serialize, P: Serialize>(
    rep: u64,
    rec: &EpisodeRecord<X, f64, P>,
    pulls: Option<Vec<u64>>,
) -> RepOutcome {
    RepOutcome {
        jsonl: render(rep, rec),
        cumulative: rec.cumulative_regret().to_vec(),
        pulls,
    }
}

fn count_pulls(rec: &EpisodeRecord<usize, f64>, k: usize) -> Vec<u64> {
    let mut n = vec![0u64; k];
    for r in rec.rounds() {
        n[r.decision] += 1;
    }
    n
}

/// Runs replication `rep` of `cfg` on its own substream.
pub fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<RepOutcome, RunError> {
    let mut rng = RngStream::split(cfg.seed, rep);
    let t = cfg.rounds;
    let annotate = |source| RunError::Replication { rep, source };
    Ok(match &cfg.params {
        Params::Mab {
            env,
            model,
            prior,
            policy,
        } => {
            let rec = match policy {
                Policy::Mints => run_episode(t, prior, model, env, &mut rng),
                Policy::Ts => run_ts_episode(t, model.sigma(), env, &mut rng),
            }
            .map_err(annotate)?;
            outcome(rep, &rec, Some(count_pulls(&rec, env.k())))
        }
        Params::Pricing {
            grid,
            valuation,
            prior,
            hypothesis,
        } => {
            let rec = run_pricing_episode(grid, valuation, prior, t, *hypothesis, &mut rng).map_err(annotate)?;
            outcome(rep, &rec, Some(count_pulls(&rec, grid.k())))
        }
        Params::Continuum {
            objective,
            spec,
            noise_sd,
            max_attempts,
        } => {
            let rec =
                run_continuum_episode(objective, spec, *noise_sd, t, *max_attempts, &mut rng).map_err(annotate)?;
            outcome(rep, &rec, None)
        }
        Params::Cog { objective, region } => {
            let steps = cog_run(|x| Ok(objective.eval2(x)), region, t).map_err(annotate)?;
            outcome(rep, &cog_record(region, &steps, 0.0), None)
        }
        Params::Ellipsoid { objective, region } => {
            let steps = ellipsoid_run(|x| Ok(objective.eval(x)), region, t).map_err(annotate)?;
            outcome(rep, &ellipsoid_record(region, &steps, 0.0), None)
        }
    })
}

/// Runs every replication with at most `jobs` in flight and returns them in
/// replication order.
pub fn run_replications(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RepOutcome>, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(cfg, r))
            .collect()
    })
}

/// Runs the experiment and writes `rounds.jsonl`, `summary.csv` and
/// `trace.csv` under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let reps = run_replications(cfg, jobs)?;
    let summary = summarize(cfg, &reps, start.elapsed());
    write_outputs(cfg, &reps, &summary)?;
    Ok(summary)
}

pub fn summarize(cfg: &ExperimentConfig, reps: &[RepOutcome], wall_clock: Duration) -> RunSummary {
    let checkpoints = checkpoints(cfg.rounds);
    let traces: Vec<Vec<f64>> = reps
        .iter()
        .map(|r| checkpoints.iter().map(|&t| r.regret_at(t)).collect())
        .collect();
    let (mean_trace, stderr_trace) = (0..checkpoints.len())
        .map(|c| mean_stderr(&traces.iter().map(|tr| tr[c]).collect::<Vec<_>>()))
        .unzip();
    RunSummary {
        family: cfg.family.to_string(),
        policy: cfg.policy().to_string(),
        config_hash: cfg.config_hash(),
        env_hash: cfg.env_hash(),
        rounds: cfg.rounds,
        final_regret: reps.iter().map(|r| r.regret_at(cfg.rounds)).collect(),
        traces,
        mean_trace,
        stderr_trace,
        pulls: reps.iter().map(|r| r.pulls.clone()).collect(),
        checkpoints,
        wall_clock,
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub family: String,
    pub policy: String,
    pub env_hash: String,
    pub config_hash: String,
    pub rep: u64,
    pub rounds: usize,
    pub rounds_run: usize,
    pub final_regret: f64,
    /// Checkpoint horizons joined by `;`.
    pub checkpoints: String,
    /// `R(t)` at each checkpoint, joined by `;`.
    pub checkpoint_regret: String,
    /// Pulls per arm joined by `;`; empty for continuous decisions.
    pub pulls: String,
}

/// One row of `trace.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TraceRow {
    pub schema_version: u32,
    pub t: usize,
    pub replications: usize,
    pub mean_regret: f64,
    pub stderr_regret: f64,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub fn summary_rows(summary: &RunSummary, reps: &[RepOutcome]) -> Vec<SummaryRow> {
    reps.iter()
        .enumerate()
        .map(|(r, rep)| SummaryRow {
            schema_version: SCHEMA_VERSION,
            family: summary.family.clone(),
            policy: summary.policy.clone(),
            env_hash: summary.env_hash.clone(),
            config_hash: summary.config_hash.clone(),
            rep: r as u64,
            rounds: summary.rounds,
            rounds_run: rep.cumulative.len(),
            final_regret: summary.final_regret[r],
            checkpoints: join(&summary.checkpoints),
            checkpoint_regret: join(&summary.traces[r]),
            pulls: rep.pulls.as_deref().map(join).unwrap_or_default(),
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_outputs(cfg: &ExperimentConfig, reps: &[RepOutcome], summary: &RunSummary) -> Result<(), RunError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let path = dir.join(ROUNDS_FILE);
    let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    let header = Header {
        schema_version: SCHEMA_VERSION,
        family: &summary.family,
        policy: &summary.policy,
        config_hash: &summary.config_hash,
        env_hash: &summary.env_hash,
        seed: cfg.seed,
        replications: cfg.replications,
        rounds: cfg.rounds,
    };
    serde_json::to_writer(&mut w, &header).map_err(|e| io_err(&path)(e.into()))?;
    w.write_all(b"\n").map_err(io_err(&path))?;
    for rep in reps {
        w.write_all(&rep.jsonl).map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join(SUMMARY_FILE);
    let csv_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| RunError::Csv { path: p, source }
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for row in summary_rows(summary, reps) {
        w.serialize(row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join(TRACE_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for (c, &t) in summary.checkpoints.iter().enumerate() {
        w.serialize(TraceRow {
            schema_version: SCHEMA_VERSION,
            t,
            replications: reps.len(),
            mean_regret: summary.mean_trace[c],
            stderr_regret: summary.stderr_trace[c],
        })
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}

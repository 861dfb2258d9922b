//! Comparison tables across runs, keyed by environment hash and policy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::run::{mean_stderr, SummaryRow, SCHEMA_VERSION, SUMMARY_FILE};

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

/// One row of the comparison table: mean ± 2·stderr of `R(t)` over every
/// replication sharing `(env_hash, policy)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub env_hash: String,
    pub family: String,
    pub policy: String,
    pub replications: usize,
    pub t: usize,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Reads `summary.csv` from a run directory.
pub fn read_summary(dir: &Path) -> Result<Vec<SummaryRow>, AggregateError> {
    let path = dir.join(SUMMARY_FILE);
    let err = |source| AggregateError::Csv {
        path: path.clone(),
        source,
    };
    let mut r = csv::Reader::from_path(&path).map_err(err)?;
    let rows = r.deserialize().collect::<Result<Vec<SummaryRow>, _>>().map_err(err)?;
    if let Some(row) = rows.iter().find(|row| row.schema_version != SCHEMA_VERSION) {
        return Err(AggregateError::Invalid {
            path,
            message: format!("schema version {} is not {SCHEMA_VERSION}", row.schema_version),
        });
    }
    Ok(rows)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(';').map(|x| x.parse().ok()).collect()
}

/// Groups rows by `(env_hash, policy)`, sorted by that key.
pub fn aggregate(rows: &[SummaryRow]) -> Result<Vec<AggregateRow>, String> {
    let mut groups: BTreeMap<(&str, &str), Vec<&SummaryRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((&row.env_hash, &row.policy)).or_default().push(row);
    }
    let mut out = Vec::new();
    for ((env, policy), members) in groups {
        let ts: Vec<usize> =
            parse_list(&members[0].checkpoints).ok_or_else(|| format!("bad checkpoint list for {env}/{policy}"))?;
        let mut values = vec![Vec::with_capacity(members.len()); ts.len()];
        for m in &members {
            if m.checkpoints != members[0].checkpoints {
                return Err(format!("checkpoints differ within {env}/{policy}"));
            }
            let r: Vec<f64> =
                parse_list(&m.checkpoint_regret).ok_or_else(|| format!("bad regret list for {env}/{policy}"))?;
            if r.len() != ts.len() {
                return Err(format!("regret list length differs within {env}/{policy}"));
            }
            for (c, v) in r.into_iter().enumerate() {
                values[c].push(v);
            }
        }
        for (c, &t) in ts.iter().enumerate() {
            let (mean, se) = mean_stderr(&values[c]);
            out.push(AggregateRow {
                env_hash: env.to_string(),
                family: members[0].family.clone(),
                policy: policy.to_string(),
                replications: members.len(),
                t,
                mean_regret: mean,
                stderr_regret: se,
                lo: mean - 2.0 * se,
                hi: mean + 2.0 * se,
            });
        }
    }
    Ok(out)
}

pub fn aggregate_dirs(dirs: &[PathBuf]) -> Result<Vec<AggregateRow>, AggregateError> {
    let mut rows = Vec::new();
    for d in dirs {
        rows.extend(read_summary(d)?);
    }
    aggregate(&rows).map_err(|message| AggregateError::Invalid {
        path: dirs.first().cloned().unwrap_or_default(),
        message,
    })
}

/// Least-squares fit `y ≈ a + b ln t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl LogFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.a + self.b * t.ln()
    }
}

/// Needs at least two distinct `t`. `r_squared` is 1 when `y` is constant
/// and fitted exactly.
pub fn log_fit(ts: &[f64], ys: &[f64]) -> Option<LogFit> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return None;
    }
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Some(LogFit { a, b, r_squared })
}

//! Relative-regret estimator.
//!
//! For each cell and policy the per-run ratio `100 · R(ALG) / R(TS)` is taken
//! against the TS run with the same run id (hence the same environment
//! seed), and the ratios are averaged. Runs whose TS regret is zero are left
//! out and counted in `n_skipped`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CellKey, RunRecord};
use crate::error::{Error, Result};
use crate::policies::PolicyKind;

/// Normal quantile for a two-sided 95% interval.
pub const CI_Z: f64 = 1.96;

/// One row of `cells.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRegretCell {
    pub env_kind: String,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub policy: PolicyKind,
    pub m: usize,
    /// NaN when every run was skipped.
    pub mean_pct_of_ts: f64,
    /// `1.96 · sd / sqrt(n)`; 0 when fewer than two ratios.
    pub ci95_halfwidth: f64,
    pub n_runs: u64,
    pub n_skipped: u64,
}

fn mean_and_halfwidth(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, CI_Z * var.sqrt() / n.sqrt())
}

type PolicyRuns = BTreeMap<u64, (f64, u8)>;

/// Per-cell, per-policy relative regret, in canonical order.
///
/// Errors when a cell lacks TS, when a policy's run ids differ from TS's,
/// when a `(cell, policy, run)` triple repeats, or when a skip flag disagrees
/// with the TS regret.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<RelativeRegretCell>> {
    let mut cells: BTreeMap<CellKey, BTreeMap<(PolicyKind, usize), PolicyRuns>> = BTreeMap::new();
    for r in records {
        let runs = cells.entry(r.cell()).or_default().entry((r.policy, r.m)).or_default();
        if runs.insert(r.run_id, (r.final_regret, r.skipped_flag)).is_some() {
            return Err(Error::Aggregation(format!(
                "duplicate run {} of policy {}(m={}) in cell {}",
                r.run_id,
                r.policy.as_str(),
                r.m,
                describe(&r.cell())
            )));
        }
    }

    let mut out = Vec::new();
    for (cell, policies) in &cells {
        let mut ts_iter = policies.iter().filter(|((k, _), _)| *k == PolicyKind::Ts);
        let ts = match (ts_iter.next(), ts_iter.next()) {
            (Some((_, runs)), None) => runs,
            (None, _) => {
                return Err(Error::Aggregation(format!("cell {} has no TS baseline", describe(cell))))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Aggregation(format!(
                    "cell {} has more than one TS baseline",
                    describe(cell)
                )))
            }
        };
        for (&(kind, m), runs) in policies {
            if runs.keys().ne(ts.keys()) {
                return Err(Error::Aggregation(format!(
                    "policy {}(m={m}) in cell {} is not paired run-for-run with TS",
                    kind.as_str(),
                    describe(cell)
                )));
            }
            let mut ratios = Vec::with_capacity(runs.len());
            let mut skipped = 0;
            for ((run_id, &(regret, flag)), (_, &(base, _))) in runs.iter().zip(ts.iter()) {
                let zero = base == 0.0;
                if flag != zero as u8 {
                    return Err(Error::Aggregation(format!(
                        "run {run_id} of {}(m={m}) in cell {}: skipped_flag {flag} but TS regret {base}",
                        kind.as_str(),
                        describe(cell)
                    )));
                }
                if zero {
                    skipped += 1;
                } else {
                    ratios.push(100.0 * regret / base);
                }
            }
            let (mean, half) = mean_and_halfwidth(&ratios);
            out.push(RelativeRegretCell {
                env_kind: cell.env_kind.clone(),
                d: cell.d,
                k: cell.k,
                sigma: cell.sigma,
                horizon: cell.horizon,
                policy: kind,
                m,
                mean_pct_of_ts: mean,
                ci95_halfwidth: half,
                n_runs: ratios.len() as u64,
                n_skipped: skipped,
            });
        }
    }
    Ok(out)
}

fn describe(c: &CellKey) -> String {
    format!("{} d={} K={} sigma={} T={}", c.env_kind, c.d, c.k, c.sigma, c.horizon)
}

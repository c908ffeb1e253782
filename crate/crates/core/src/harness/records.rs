//! Result files: `runs.csv`, `cells.csv` and the optional `traces.csv`.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! and re-aggregating reproduces `cells.csv` byte for byte.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::{RelativeRegretCell, RunResult};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};

/// Identity of an environment cell in result files.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKey {
    pub env_kind: String,
    pub d: usize,
    pub k: usize,
    pub sigma: f64,
    pub horizon: u64,
}

impl Eq for CellKey {}

impl Ord for CellKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.env_kind
            .cmp(&other.env_kind)
            .then(self.d.cmp(&other.d))
            .then(self.k.cmp(&other.k))
            .then(self.sigma.total_cmp(&other.sigma))
            .then(self.horizon.cmp(&other.horizon))
    }
}

impl PartialOrd for CellKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env_kind: String,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub policy: PolicyKind,
    /// Posterior draws per step; see [`PolicyConfig::sample_count`].
    pub m: usize,
    pub run_id: u64,
    pub final_regret: f64,
    /// 1 when the paired TS run has zero regret.
    pub skipped_flag: u8,
}

impl RunRecord {
    pub fn cell(&self) -> CellKey {
        CellKey {
            env_kind: self.env_kind.clone(),
            d: self.d,
            k: self.k,
            sigma: self.sigma,
            horizon: self.horizon,
        }
    }

    pub fn policy_config(&self) -> Result<PolicyConfig> {
        PolicyConfig::from_kind_and_samples(self.policy, self.m)
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.cell()
            .cmp(&b.cell())
            .then((a.policy, a.m).cmp(&(b.policy, b.m)))
            .then(a.run_id.cmp(&b.run_id))
    });
}

/// Flattens results into canonically ordered rows, flagging runs whose
/// paired TS run has zero regret.
pub fn records_from_results(results: &[RunResult]) -> Vec<RunRecord> {
    let mut ts_zero: HashMap<(CellKey, u64), bool> = HashMap::new();
    for r in results.iter().filter(|r| r.policy.kind == PolicyKind::Ts) {
        ts_zero.insert((r.cell.key(), r.run_id), r.final_regret == 0.0);
    }
    let mut out: Vec<RunRecord> = results
        .iter()
        .map(|r| {
            let key = r.cell.key();
            let skipped = ts_zero.get(&(key.clone(), r.run_id)).copied().unwrap_or(false);
            RunRecord {
                env_kind: key.env_kind,
                d: key.d,
                k: key.k,
                sigma: key.sigma,
                horizon: key.horizon,
                policy: r.policy.kind,
                m: r.policy.sample_count(),
                run_id: r.run_id,
                final_regret: r.final_regret,
                skipped_flag: skipped as u8,
            }
        })
        .collect();
    sort_records(&mut out);
    out
}

impl std::hash::Hash for CellKey {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.env_kind.hash(state);
        self.d.hash(state);
        self.k.hash(state);
        self.sigma.to_bits().hash(state);
        self.horizon.hash(state);
    }
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn write_all<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = create(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const RUNS_HEADER: [&str; 10] = [
    "env_kind", "d", "K", "sigma", "T", "policy", "m", "run_id", "final_regret", "skipped_flag",
];

const CELLS_HEADER: [&str; 11] = [
    "env_kind", "d", "K", "sigma", "T", "policy", "m", "mean_pct_of_ts", "ci95_halfwidth", "n_runs",
    "n_skipped",
];

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_all(path, records, &RUNS_HEADER)
}

pub fn write_cells_csv(path: &Path, cells: &[RelativeRegretCell]) -> Result<()> {
    write_all(path, cells, &CELLS_HEADER)
}

fn read_all<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Malformed {
            row: 1,
            message: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let row: T = row.map_err(|e| Error::Malformed {
            row: e.position().map_or(i as u64 + 2, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

/// Reads `runs.csv`; rows are returned in file order.
pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let rows: Vec<RunRecord> = read_all(path, &RUNS_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        let row = i as u64 + 2;
        let bad = |message: String| Error::Malformed { row, message };
        r.policy_config().map_err(|e| bad(e.to_string()))?;
        if r.skipped_flag > 1 {
            return Err(bad(format!("skipped_flag must be 0 or 1, got {}", r.skipped_flag)));
        }
        if !r.final_regret.is_finite() || !r.sigma.is_finite() {
            return Err(bad("non-finite value".into()));
        }
    }
    Ok(rows)
}

pub fn read_cells_csv(path: &Path) -> Result<Vec<RelativeRegretCell>> {
    read_all(path, &CELLS_HEADER)
}

/// Writes `env_kind,d,K,sigma,T,policy,m,run_id,t,cumulative_regret` for
/// every result that carries a trace.
pub fn write_traces_csv(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "env_kind", "d", "K", "sigma", "T", "policy", "m", "run_id", "t", "cumulative_regret",
    ])?;
    for r in results {
        let Some(trace) = &r.trace else { continue };
        let key = r.cell.key();
        for p in trace {
            w.serialize((
                &key.env_kind,
                key.d,
                key.k,
                key.sigma,
                key.horizon,
                r.policy.kind,
                r.policy.sample_count(),
                r.run_id,
                p.t,
                p.cumulative_regret,
            ))?;
        }
    }
    let mut inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvParams;
    use crate::harness::{run_grid, CellSpec, GridSpec};

    fn small_results() -> Vec<RunResult> {
        run_grid(
            &GridSpec {
                cells: vec![
                    CellSpec::new(EnvParams::linear_contextual(2, 3, 1.0), 40),
                    CellSpec::new(EnvParams::karmed(3), 40),
                ],
                policies: vec![PolicyConfig::ts(), PolicyConfig::tsucb(4)],
                runs: 3,
                master_seed: 1,
                trace_stride: Some(10),
            },
            Some(1),
        )
        .unwrap()
    }

    #[test]
    fn runs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let records = records_from_results(&small_results());
        write_runs_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("env_kind,d,K,sigma,T,policy,m,run_id,final_regret,skipped_flag\n"));
        assert_eq!(read_runs_csv(&path).unwrap(), records);
    }

    #[test]
    fn karmed_sorts_before_linear() {
        let records = records_from_results(&small_results());
        assert_eq!(records[0].env_kind, "karmed");
        assert_eq!(records[0].sigma, 0.0);
        assert_eq!(records[0].d, 3);
        assert_eq!(records.last().unwrap().policy, PolicyKind::Tsucb);
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        std::fs::write(
            &path,
            "env_kind,d,K,sigma,T,policy,m,run_id,final_regret,skipped_flag\n\
             karmed,3,3,0,40,ts,1,0,2.5,0\n\
             karmed,3,3,0,40,ts,1,1,oops,0\n",
        )
        .unwrap();
        match read_runs_csv(&path) {
            Err(Error::Malformed { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(
            &path,
            "env_kind,d,K,sigma,T,policy,m,run_id,final_regret,skipped_flag\n\
             karmed,3,3,0,40,greedy,5,0,2.5,0\n",
        )
        .unwrap();
        assert!(matches!(read_runs_csv(&path), Err(Error::Malformed { row: 2, .. })));
    }

    #[test]
    fn traces_file_has_one_row_per_point() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.csv");
        let results = small_results();
        write_traces_csv(&path, &results).unwrap();
        let lines = std::fs::read_to_string(&path).unwrap().lines().count();
        assert_eq!(lines, 1 + results.len() * 4);
    }
}

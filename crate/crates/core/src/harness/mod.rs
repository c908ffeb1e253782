//! Deterministic experiment runner.
//!
//! A grid is the Cartesian product of environment cells, policies and run
//! ids. Each run is a pure function of `(master seed, cell, policy, run id)`:
//! the environment is seeded from the cell and run id only, so every policy
//! in a cell faces the same instance and the same potential rewards, and the
//! policy's own randomness is seeded from the environment seed and the
//! policy label.

mod aggregate;
mod records;

use std::fmt;

use rand::SeedableRng;
use rayon::prelude::*;

use crate::envs::{env_draw, EnvKind, EnvParams, Environment};
use crate::error::{Error, Result};
use crate::policies::agent::{
    Agent, BeliefModel, BoundsSource, KArmedModel, LinearContextualModel, PolicyAgent, PosteriorFamily,
};
use crate::policies::PolicyConfig;
use crate::streams::{self, SimRng};

pub use aggregate::{aggregate, RelativeRegretCell, CI_Z};
pub use records::{
    read_cells_csv, read_runs_csv, records_from_results, sort_records, write_cells_csv,
    write_runs_csv, write_traces_csv, CellKey, RunRecord,
};

/// Number of trace points recorded by default.
pub const DEFAULT_TRACE_POINTS: u64 = 200;

/// `⌈T / 200⌉`.
pub fn default_trace_stride(horizon: u64) -> u64 {
    horizon.div_ceil(DEFAULT_TRACE_POINTS).max(1)
}

/// One environment cell at a fixed horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub env: EnvParams,
    /// Posterior family of the Bayesian policies; ignored for K-armed cells.
    pub posterior: PosteriorFamily,
    /// Confidence bounds for TS-UCB and UCB; ignored for K-armed cells.
    pub bounds: BoundsSource,
    pub horizon: u64,
}

impl CellSpec {
    pub fn new(env: EnvParams, horizon: u64) -> Self {
        CellSpec { env, posterior: PosteriorFamily::Known, bounds: BoundsSource::Posterior, horizon }
    }

    /// The `env_kind` column value: the environment kind, suffixed with
    /// `_nig` and/or `_ridge` when those non-default model options are set.
    pub fn label(&self) -> String {
        let mut label = self.env.kind.as_str().to_string();
        if self.env.kind == EnvKind::LinearContextual {
            if self.posterior == PosteriorFamily::Nig {
                label.push_str("_nig");
            }
            if self.bounds == BoundsSource::Ridge {
                label.push_str("_ridge");
            }
        }
        label
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.horizon < 2 {
            return Err(Error::config("T", "horizon must be at least 2"));
        }
        if self.env.kind == EnvKind::Karmed && self.horizon < self.env.arms as u64 {
            return Err(Error::config(
                "T",
                format!("horizon {} is shorter than the {} forced-exploration steps", self.horizon, self.env.arms),
            ));
        }
        Ok(())
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            env_kind: self.label(),
            d: self.env.d,
            k: self.env.arms,
            sigma: self.env.sigma,
            horizon: self.horizon,
        }
    }
}

impl fmt::Display for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} d={} K={} sigma={} T={}",
            self.label(),
            self.env.d,
            self.env.arms,
            self.env.sigma,
            self.horizon
        )
    }
}

/// Cumulative regret after step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: u64,
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub final_regret: f64,
    /// Points at `t = stride, 2·stride, …` plus the final step.
    pub trace: Option<Vec<TracePoint>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub cell: CellSpec,
    pub policy: PolicyConfig,
    pub run_id: u64,
    pub env_seed: u64,
    pub final_regret: f64,
    pub trace: Option<Vec<TracePoint>>,
}

/// Plays one episode of `horizon` steps.
///
/// With `forced_exploration` the arms `0..K` are played in order at steps
/// `1..=K` before the agent takes over; the agent still observes them.
pub fn run_episode(
    env: &Environment,
    agent: &mut dyn Agent,
    horizon: u64,
    forced_exploration: bool,
    trace_stride: Option<u64>,
    rng: &mut SimRng,
) -> Result<Episode> {
    if trace_stride == Some(0) {
        return Err(Error::config("trace_stride", "must be positive"));
    }
    let arms = env.arms() as u64;
    let mut trace = trace_stride.map(|s| Vec::with_capacity((horizon / s + 1) as usize));
    let mut total = 0.0;
    for t in 1..=horizon {
        let round = env.round(t);
        let arm = if forced_exploration && t <= arms {
            (t - 1) as usize
        } else {
            agent.choose(&round.context, rng)?
        };
        let outcome = env.step_round(&round, arm)?;
        agent.observe(arm, &round.context, outcome.reward)?;
        total += outcome.regret;
        if let (Some(points), Some(stride)) = (trace.as_mut(), trace_stride) {
            if t % stride == 0 || t == horizon {
                points.push(TracePoint { t, cumulative_regret: total });
            }
        }
    }
    Ok(Episode { final_regret: total, trace })
}

/// Belief model a policy uses in a cell.
pub fn build_model(cell: &CellSpec) -> Result<Box<dyn BeliefModel>> {
    let env = &cell.env;
    Ok(match env.kind {
        EnvKind::Karmed => Box::new(KArmedModel::new(env.arms, cell.horizon)?),
        EnvKind::LinearContextual => Box::new(LinearContextualModel::new(
            env.d,
            env.arms,
            env.sigma,
            cell.horizon,
            cell.posterior,
        )?
        .with_bounds(cell.bounds)),
    })
}

/// Label hashed into the policy seed.
pub fn policy_label(policy: &PolicyConfig) -> String {
    format!("{}:{}", policy.kind.as_str(), policy.sample_count())
}

/// Runs one `(cell, policy, run id)` triple.
pub fn run_one(
    cell: &CellSpec,
    policy: &PolicyConfig,
    master_seed: u64,
    run_id: u64,
    trace_stride: Option<u64>,
) -> Result<RunResult> {
    cell.validate()?;
    policy.validate()?;
    let env_seed = streams::env_seed(master_seed, cell.env.cell_key(), run_id);
    let env = env_draw(&cell.env, env_seed)?;
    let mut agent = PolicyAgent::new(*policy, build_model(cell)?)?;
    let mut rng = SimRng::seed_from_u64(streams::policy_seed(env_seed, &policy_label(policy)));
    let forced = cell.env.kind == EnvKind::Karmed;
    let episode = run_episode(&env, &mut agent, cell.horizon, forced, trace_stride, &mut rng)?;
    Ok(RunResult {
        cell: *cell,
        policy: *policy,
        run_id,
        env_seed,
        final_regret: episode.final_regret,
        trace: episode.trace,
    })
}

/// Everything needed to execute a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<CellSpec>,
    pub policies: Vec<PolicyConfig>,
    pub runs: u64,
    pub master_seed: u64,
    pub trace_stride: Option<u64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::config("env", "grid has no cells"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "grid has no policies"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be positive"));
        }
        for c in &self.cells {
            c.validate()?;
        }
        for p in &self.policies {
            p.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len() * self.policies.len() * self.runs as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Runs every `(cell, policy, run)` triple on up to `threads` workers
/// (`None`: one per core) and returns results in canonical order.
pub fn run_grid(grid: &GridSpec, threads: Option<usize>) -> Result<Vec<RunResult>> {
    grid.validate()?;
    let jobs: Vec<(&CellSpec, &PolicyConfig, u64)> = grid
        .cells
        .iter()
        .flat_map(|c| {
            grid.policies
                .iter()
                .flat_map(move |p| (0..grid.runs).map(move |r| (c, p, r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let mut results = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, policy, run_id)| {
                run_one(cell, policy, grid.master_seed, run_id, grid.trace_stride).map_err(|e| {
                    Error::Run {
                        cell: format!("{cell} policy={policy} run={run_id}"),
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    sort_results(&mut results);
    Ok(results)
}

/// Canonical order: cell, then policy, then run id.
pub fn sort_results(results: &mut [RunResult]) {
    results.sort_by(|a, b| {
        a.cell
            .key()
            .cmp(&b.cell.key())
            .then(a.policy.sort_key().cmp(&b.policy.sort_key()))
            .then(a.run_id.cmp(&b.run_id))
    });
}

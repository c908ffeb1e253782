//! Command-line front end.
//!
//! ```text
//! ratio-bandits run --config PATH|PRESET [--out DIR] [--seed U64] [--threads N] [--set KEY=VALUE]...
//! ratio-bandits report RUNS_CSV [--cells PATH]
//! ratio-bandits presets [NAME]
//! ```
//!
//! Exit status is 0 on success, 2 for invalid configs or input files, and 1
//! for any other failure. The output directory is `--out`, else the config's
//! `out`, else `$RATIO_BANDITS_OUT`, else `results`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{preset, preset_names, ExperimentConfig};
use crate::error::{Error, Result};
use crate::harness::{
    aggregate, read_runs_csv, records_from_results, run_grid, write_cells_csv, write_runs_csv,
    write_traces_csv, RelativeRegretCell,
};
use crate::policies::PolicyConfig;

pub const OUT_ENV: &str = "RATIO_BANDITS_OUT";
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "ratio-bandits", version, about = "Run and summarize bandit regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment grid and write runs.csv, cells.csv and config.toml.
    Run {
        /// Config file, or the name of a preset.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed; overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: one per core).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
        /// Config override, e.g. `--set runs=5` or `--set env.K=[10]`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Recompute cells.csv from runs.csv and print the relative-regret table.
    Report {
        runs: PathBuf,
        /// Where to write cells.csv (default: next to RUNS).
        #[arg(long)]
        cells: Option<PathBuf>,
    },
    /// List the built-in configs, or print one.
    Presets { name: Option<String> },
}

/// Failure tagged with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl Failure {
    fn input(error: Error) -> Self {
        Failure { code: 2, error }
    }

    fn runtime(error: Error) -> Self {
        let code = match error {
            Error::Config { .. } | Error::Malformed { .. } => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Diagnostics go to stderr, reports to `stdout`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn std::io::Write) -> Result<(), Failure> {
    match command {
        Command::Run { config, out, seed, threads, overrides } => {
            let mut cfg = ExperimentConfig::load(&config, &overrides).map_err(Failure::input)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let out = resolve_out(out, &cfg);
            cfg.out = Some(out.clone());
            let summary = cmd_run(&cfg, &out, threads.map(|t| t as usize))?;
            emit(stdout, &summary)
        }
        Command::Report { runs, cells } => {
            let cells_path = cells.unwrap_or_else(|| {
                runs.parent().unwrap_or(Path::new("")).join("cells.csv")
            });
            let table = cmd_report(&runs, &cells_path)?;
            emit(stdout, &table)
        }
        Command::Presets { name } => match name {
            None => emit(stdout, &format!("{}\n", preset_names().replace(", ", "\n"))),
            Some(n) => match preset(&n) {
                Some(text) => emit(stdout, text),
                None => Err(Failure::input(Error::config(
                    "preset",
                    format!("unknown preset `{n}` ({})", preset_names()),
                ))),
            },
        },
    }
}

fn emit(stdout: &mut dyn std::io::Write, text: &str) -> Result<(), Failure> {
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::runtime(Error::io("<stdout>", e)))
}

fn resolve_out(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs the grid described by `cfg` and writes its outputs into `out`.
/// Returns the printed summary.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<String, Failure> {
    let grid = cfg.grid().map_err(Failure::input)?;
    let echo = cfg.to_toml().map_err(Failure::input)?;
    let results = run_grid(&grid, threads).map_err(Failure::runtime)?;
    let records = records_from_results(&results);
    let cells = aggregate(&records).map_err(Failure::runtime)?;

    let io = |p: &Path, e| Failure::runtime(Error::io(p, e));
    std::fs::create_dir_all(out).map_err(|e| io(out, e))?;
    write_runs_csv(&out.join("runs.csv"), &records).map_err(Failure::runtime)?;
    write_cells_csv(&out.join("cells.csv"), &cells).map_err(Failure::runtime)?;
    let echo_path = out.join("config.toml");
    std::fs::write(&echo_path, echo).map_err(|e| io(&echo_path, e))?;
    if grid.trace_stride.is_some() {
        write_traces_csv(&out.join("traces.csv"), &results).map_err(Failure::runtime)?;
    }

    let mut summary = format_table(&cells);
    let _ = writeln!(
        summary,
        "{}: {} runs over {} cells written to {}",
        cfg.name,
        records.len(),
        grid.cells.len(),
        out.display()
    );
    Ok(summary)
}

/// Re-aggregates `runs` into `cells_out` and returns the text table.
pub fn cmd_report(runs: &Path, cells_out: &Path) -> Result<String, Failure> {
    let records = read_runs_csv(runs).map_err(|e| match e {
        Error::Io { .. } | Error::Csv(_) | Error::Malformed { .. } => Failure::input(e),
        other => Failure::runtime(other),
    })?;
    let cells = aggregate(&records).map_err(Failure::input)?;
    write_cells_csv(cells_out, &cells).map_err(Failure::runtime)?;
    Ok(format_table(&cells))
}

fn fmt_cell(c: &RelativeRegretCell) -> String {
    if c.mean_pct_of_ts.is_nan() {
        "n/a".into()
    } else {
        format!("{:.1} ± {:.1}", c.mean_pct_of_ts, c.ci95_halfwidth)
    }
}

/// Relative-regret blocks, one per (environment family, policy): rows are
/// arm counts, columns noise levels.
pub fn format_table(cells: &[RelativeRegretCell]) -> String {
    let mut out = String::new();
    let groups: BTreeSet<(String, usize, u64)> =
        cells.iter().map(|c| (c.env_kind.clone(), c.d, c.horizon)).collect();
    for (kind, d, horizon) in &groups {
        let in_group: Vec<&RelativeRegretCell> = cells
            .iter()
            .filter(|c| (&c.env_kind, c.d, c.horizon) == (kind, *d, *horizon))
            .collect();
        let mut sigmas: Vec<f64> = in_group.iter().map(|c| c.sigma).collect();
        sigmas.sort_by(f64::total_cmp);
        sigmas.dedup();
        let ks: BTreeSet<usize> = in_group.iter().map(|c| c.k).collect();
        let policies: BTreeSet<_> = in_group.iter().map(|c| (c.policy, c.m)).collect();
        for &(policy, m) in &policies {
            let name = PolicyConfig::from_kind_and_samples(policy, m)
                .map(|p| p.to_string())
                .unwrap_or_else(|_| format!("{}(m={m})", policy.as_str()));
            let dim = if kind.starts_with("karmed") { String::new() } else { format!(" d={d}") };
            let _ = writeln!(out, "{name}: % of TS regret, {kind}{dim} T={horizon}");
            let mut rows = vec![std::iter::once("K \\ sigma".to_string())
                .chain(sigmas.iter().map(|s| s.to_string()))
                .collect::<Vec<_>>()];
            for &k in &ks {
                let mut row = vec![k.to_string()];
                for &s in &sigmas {
                    let cell = in_group
                        .iter()
                        .find(|c| c.k == k && c.sigma == s && (c.policy, c.m) == (policy, m));
                    row.push(cell.map_or_else(|| "-".into(), |c| fmt_cell(c)));
                }
                rows.push(row);
            }
            let widths: Vec<usize> = (0..rows[0].len())
                .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
                .collect();
            for row in rows {
                let line: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(v, w)| format!("{v:>w$}", w = *w))
                    .collect();
                let _ = writeln!(out, "  {}", line.join("  "));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::PolicyKind;

    fn cell(policy: PolicyKind, m: usize, k: usize, sigma: f64, mean: f64) -> RelativeRegretCell {
        RelativeRegretCell {
            env_kind: "linear_contextual".into(),
            d: 10,
            k,
            sigma,
            horizon: 100,
            policy,
            m,
            mean_pct_of_ts: mean,
            ci95_halfwidth: 1.26,
            n_runs: 4,
            n_skipped: 0,
        }
    }

    #[test]
    fn table_layout() {
        let cells = vec![
            cell(PolicyKind::Ts, 1, 3, 0.5, 100.0),
            cell(PolicyKind::Tsucb, 1, 3, 0.5, 71.23),
            cell(PolicyKind::Tsucb, 1, 10, 2.0, 64.0),
        ];
        let t = format_table(&cells);
        assert!(t.contains("TS-UCB(1): % of TS regret, linear_contextual d=10 T=100"));
        assert!(t.contains("71.2 ± 1.3"));
        let block: Vec<&str> = t.split("\n\n").collect();
        assert_eq!(block.len(), 3);
        let lines: Vec<&str> = block[1].lines().collect();
        assert!(lines[1].trim_start().starts_with("K \\ sigma"));
        assert!(lines[2].trim_start().starts_with("3 "));
        assert!(lines[2].trim_end().ends_with('-'));
    }

    #[test]
    fn parse_errors_exit_two() {
        let mut sink = Vec::new();
        assert_eq!(run_cli(["ratio-bandits", "run"], &mut sink), 2);
        assert_eq!(run_cli(["ratio-bandits", "run", "--config", "desk_grid", "--threads", "0"], &mut sink), 2);
    }

    #[test]
    fn presets_listing() {
        let mut sink = Vec::new();
        assert_eq!(run_cli(["ratio-bandits", "presets"], &mut sink), 0);
        assert_eq!(String::from_utf8(sink).unwrap(), "paper_grid\ndesk_grid\n");
        let mut sink = Vec::new();
        assert_eq!(run_cli(["ratio-bandits", "presets", "nope"], &mut sink), 2);
    }
}

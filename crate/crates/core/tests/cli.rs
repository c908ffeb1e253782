use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratio-bandits"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RATIO_BANDITS_OUT")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn preset_run_writes_every_cell_and_report_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smoke");
    let o = bin(
        &[
            "run", "--config", "paper_grid", "--set", "runs=5", "--set", "T=500",
            "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("TS-UCB(1): % of TS regret"));

    let cells = std::fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 25 * 6);
    assert_eq!(cells.lines().filter(|l| l.contains(",tsucb,1,")).count(), 25);
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 25 * 6 * 5);
    let echo = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.contains("seed = 20200101") && echo.contains("runs = 5"));
    assert!(!out.join("traces.csv").exists());

    let again = dir.path().join("again.csv");
    let o = bin(&["report", out.join("runs.csv").to_str().unwrap(), "--cells", again.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(again).unwrap(), cells);
}

#[test]
fn traces_and_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("k.toml"),
        "seed = 1\nT = 40\nruns = 2\ntraces = true\ntrace_stride = 10\n[env]\nkind = \"karmed\"\nK = [3]\n[[policies]]\nkind = \"ts\"\n",
    )
    .unwrap();
    let o = bin(&["run", "--config", "k.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let traces = std::fs::read_to_string(dir.path().join("results/traces.csv")).unwrap();
    let mut lines = traces.lines();
    assert_eq!(lines.next().unwrap(), "env_kind,d,K,sigma,T,policy,m,run_id,t,cumulative_regret");
    assert_eq!(lines.count(), 2 * 4);
}

#[test]
fn missing_seed_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "T = 100\nruns = 1\n[env]\nkind = \"karmed\"\nK = [3]\n[[policies]]\nkind = \"ts\"\n",
    )
    .unwrap();
    let o = bin(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    // A seed on the command line fills the gap.
    let o = bin(&["run", "--config", "c.toml", "--seed", "3", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn malformed_runs_file_exits_two_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = bin(
        &["run", "--config", "desk_grid", "--set", "runs=2", "--set", "T=30", "--set", "env.K=[3]",
          "--set", "env.sigma=[1.0]", "--set", "policies=[{kind=\"ts\"},{kind=\"greedy\"}]",
          "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3] = lines[3].replacen("linear_contextual", "linear_contextual,extra", 1);
    std::fs::write(out.join("runs.csv"), lines.join("\n") + "\n").unwrap();

    let o = bin(&["report", out.join("runs.csv").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 4"), "{}", stderr(&o));
}

#[test]
fn bad_invocations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["run", "--config", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["report", "missing.csv"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"], dir.path()).status.code(), Some(2));
    let o = bin(&["run", "--config", "desk_grid", "--set", "env.K=[1]"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn hetsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetsched")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schedule(taskset: &str, platform: &str, algorithm: &str, out: &Path) -> Output {
    hetsched(&[
        "schedule",
        "--taskset",
        arg(&repo(taskset)),
        "--platform",
        arg(&repo(platform)),
        "--algorithm",
        algorithm,
        "--out",
        arg(out),
    ])
}

fn report_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("report.csv")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .to_string()
}

#[test]
fn schedule_lightest_implicit_taskset() {
    let dir = tempfile::tempdir().unwrap();
    let out = schedule("fixtures/tasksets/implicit/D0.50.json", "fixtures/platforms/big_little_2b6l.json", "lp-dvfs", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_value(dir.path(), "deadline_misses"), "0");
    assert_eq!(report_value(dir.path(), "passed"), "true");
    for f in ["events.csv", "partition.csv", "gantt.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn undersized_platform_exits_2_naming_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let out = schedule("fixtures/tasksets/implicit/D4.25.json", "fixtures/platforms/big_little_1b1l.json", "lp-dvfs", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = schedule("fixtures/tasksets/implicit/D0.50.json", "fixtures/platforms/big_little_2b6l.json", "edf", dir.path());
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(hetsched(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(hetsched(&["schedule", "--taskset", "/nonexistent.json", "--platform", "x"]).status.code(), Some(64));
    assert_eq!(hetsched(&["--help"]).status.code(), Some(0));
}

#[test]
fn gwa_partition_export_uses_hyperperiod_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = schedule("fixtures/tasksets/constrained/D0.500.json", "fixtures/platforms/big_little_1b1l.json", "gwa-ddiscrete", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("partition.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("interval_index,t_start,t_end,job_id,type,speed_level,omega"));
    assert!(lines.all(|l| l.starts_with("hyperperiod,0.0,10.0,")));
}

#[test]
fn dumped_lp_is_fixed_mps() {
    let dir = tempfile::tempdir().unwrap();
    let out = hetsched(&[
        "schedule",
        "--taskset",
        arg(&repo("fixtures/tasksets/constrained/D0.250.json")),
        "--platform",
        arg(&repo("fixtures/platforms/big_little_1b1l.json")),
        "--out",
        arg(dir.path()),
        "--dump-lp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mps = fs::read_to_string(dir.path().join("lp.mps")).unwrap();
    let sections: Vec<&str> = mps.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(sections.first(), Some(&"NAME          LPDVFS"));
    assert_eq!(sections.last(), Some(&"ENDATA"));
    for s in ["ROWS", "COLUMNS", "RHS", "BOUNDS"] {
        assert!(sections.contains(&s), "{s}");
    }
}

fn sweep(dir: &str, platform: &str, out: &Path) -> Vec<Vec<String>> {
    let o = hetsched(&["sweep", "--taskset", arg(&repo(dir)), "--platform", arg(&repo(platform)), "--out", arg(out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn implicit_sweep_never_exceeds_nodvfs() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep("fixtures/tasksets/implicit", "fixtures/platforms/big_little_2b6l.json", &dir.path().join("s.csv"));
    let lp: Vec<_> = rows.iter().filter(|r| r[2] == "lp-dvfs").collect();
    assert_eq!(lp.len(), 16);
    for r in lp {
        assert!(r[5].is_empty(), "{r:?}");
        assert!(r[4].parse::<f64>().unwrap() <= 1.0 + 1e-12, "{r:?}");
    }
}

#[test]
fn constrained_sweep_lp_beats_gwa_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let rows = sweep("fixtures/tasksets/constrained", "fixtures/platforms/big_little_1b1l.json", &a);
    sweep("fixtures/tasksets/constrained", "fixtures/platforms/big_little_1b1l.json", &b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(rows.len(), 40);
    for set in rows.chunks(4) {
        let norm = |alg: &str| set.iter().find(|r| r[2] == alg).unwrap()[4].parse::<f64>().unwrap();
        assert!(norm("lp-dvfs") <= norm("gwa-ddiscrete") * (1.0 + 1e-9), "{set:?}");
        assert_eq!(norm("gwa-nodvfs"), 1.0);
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = dir.path().join("s.csv");
    let o = hetsched(&[
        "sweep",
        "--taskset",
        arg(&empty),
        "--platform",
        arg(&repo("fixtures/platforms/big_little_1b1l.json")),
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out).unwrap(), "taskset,D,algorithm,energy_mj,normalized_energy,error\n");
}

#[test]
fn validate_accepts_own_events_and_rejects_tampered_ones() {
    let dir = tempfile::tempdir().unwrap();
    let ts = repo("fixtures/tasksets/constrained/D0.750.json");
    let pf = repo("fixtures/platforms/big_little_1b1l.json");
    let out = schedule("fixtures/tasksets/constrained/D0.750.json", "fixtures/platforms/big_little_1b1l.json", "lp-dvfs", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let events = dir.path().join("events.csv");
    let ok = hetsched(&["validate", "--taskset", arg(&ts), "--platform", arg(&pf), "--schedule", arg(&events)]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    // drop the last event: some job loses work
    let text = fs::read_to_string(&events).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let report = dir.path().join("bad_report.csv");
    let v = hetsched(&[
        "validate",
        "--taskset",
        arg(&ts),
        "--platform",
        arg(&pf),
        "--schedule",
        arg(&bad),
        "--out",
        arg(&report),
    ]);
    assert_eq!(v.status.code(), Some(1));
    assert!(fs::read_to_string(report).unwrap().contains("passed,false"));
}

#[test]
fn gantt_from_events_is_svg() {
    let dir = tempfile::tempdir().unwrap();
    schedule("fixtures/tasksets/constrained/D0.250.json", "fixtures/platforms/big_little_1b1l.json", "lp-dvfs", dir.path());
    let svg = dir.path().join("g.svg");
    let o = hetsched(&[
        "gantt",
        "--taskset",
        arg(&repo("fixtures/tasksets/constrained/D0.250.json")),
        "--platform",
        arg(&repo("fixtures/platforms/big_little_1b1l.json")),
        "--schedule",
        arg(&dir.path().join("events.csv")),
        "--out",
        arg(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(svg).unwrap();
    assert_eq!(text, fs::read_to_string(dir.path().join("gantt.svg")).unwrap());
    assert!(text.starts_with("<svg"));
}

#[test]
fn oracle_check_agrees_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = hetsched(&["oracle-check", "--seed", "11", "--count", "60", "--out", arg(p)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 61);
}

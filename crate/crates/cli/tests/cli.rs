use std::process::Command;

use freechaos::ineq::{reports_from_csv, reports_from_jsonl};
use freechaos_cli::config::Experiment;
use freechaos_cli::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freechaos"))
}

#[test]
fn haagerup_flags_form_a_valid_config() {
    let c = parse_config([
        "freechaos",
        "haagerup",
        "--n",
        "2",
        "--d",
        "2",
        "--trials",
        "20",
        "--seed",
        "7",
        "--out",
        "r.csv",
    ])
    .unwrap();
    assert_eq!(c.experiment, Experiment::Haagerup);
    assert_eq!(
        (c.params.n, c.params.d, c.params.trials, c.params.seed),
        (2, 2, 20, 7)
    );
}

#[test]
fn circular_rejects_p_three() {
    let e = parse_config(["freechaos", "gen-circular", "--p", "3"]).unwrap_err();
    assert!(e.contains("p must be 2 or inf"), "{e}");
    let out = bin().args(["gen-circular", "--p", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"experiment": "khintchine", "seed": 3, "d": 2}"#).unwrap();
    let c = parse_config([
        "freechaos",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "9",
    ])
    .unwrap();
    assert_eq!(c.params.seed, 9);
    assert_eq!(c.params.d, 2);
    std::fs::write(&path, "experiment = khintchine\nbogus = 1\n").unwrap();
    assert!(parse_config(["freechaos", "--config", path.to_str().unwrap()]).is_err());
}

#[test]
fn qfock_selftest_passes() {
    let out = bin()
        .args(["qfock-selftest", "--n", "2", "--depth", "3"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports = reports_from_jsonl(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(reports.iter().any(|r| r.name == "semicircular_moment"));
    assert!(reports.iter().all(|r| r.passed()));
}

#[test]
fn theorem_d_writes_one_row_per_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("td.csv");
    let status = bin()
        .args([
            "theorem-d",
            "--n",
            "4",
            "--method",
            "moments",
            "--pmax",
            "8",
            "--format",
            "csv",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = reports_from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(dir.path().join("td.meta.json").exists());
}

#[test]
fn sweep_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let status = bin()
        .args([
            "sweep",
            "--family",
            "khintchine",
            "--ns",
            "2",
            "--ds",
            "1..2",
            "--ps",
            "2,4,inf",
            "--trials",
            "2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("s.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);
    assert!(summary.starts_with("family,n,d,p,trials,ratio_median,ratio_max,certified_frac"));
}

#[test]
fn same_seed_gives_identical_json() {
    let run = || {
        bin()
            .args([
                "reduction",
                "--n",
                "3",
                "--d",
                "1",
                "--trials",
                "3",
                "--seed",
                "5",
            ])
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.jsonl");
    let status = bin()
        .args([
            "khintchine",
            "--n",
            "2",
            "--d",
            "2",
            "--p",
            "4",
            "--trials",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let json = reports_from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let csv =
        reports_from_csv(&std::fs::read_to_string(dir.path().join("k.csv")).unwrap()).unwrap();
    assert_eq!(json.len(), csv.len());
    for (j, c) in json.iter().zip(&csv) {
        assert_eq!(j.lhs, c.lhs);
        assert_eq!(j.rhs_combined, c.rhs_combined);
        assert_eq!(
            j.rhs_terms.iter().map(|t| t.value).collect::<Vec<_>>(),
            c.rhs
        );
    }
}

#[test]
fn capacity_abort_exits_three() {
    let out = bin()
        .args(["rosenthal", "--n", "3", "--trials", "2", "--depth", "6"])
        .env("FREECHAOS_CAPACITY", "50")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

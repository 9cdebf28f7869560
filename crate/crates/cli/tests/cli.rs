use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sgwave::shooting::find_kink_mu;
use sgwave::unperturbed::kink_profile;
use sgwave::Params;
use sgwave_cli::emit::{parse_profile_csv, parse_profile_json};
use sgwave_cli::manifest;

fn sgwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgwave"))
        .current_dir(dir)
        .env_remove(sgwave_cli::OUT_DIR_ENV)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = sgwave(dir, args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest_of(dir: &Path, artifact: &str) -> Value {
    serde_json::from_str(&read(dir, &format!("{artifact}.manifest.json"))).unwrap()
}

#[test]
fn equilibria_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["equilibria", "--gamma", "0.5", "--k", "0"]);
    let text = read(dir.path(), "equilibria.csv");
    let row: Vec<f64> = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // asin(1/2) = pi/6 and pi - pi/6
    assert_eq!(format!("{:.7}", row[0]), "0.5235988");
    assert_eq!(format!("{:.7}", row[1]), "2.6179939");
    assert_eq!(row[4], 0.0);
}

#[test]
fn negative_tilt_is_a_reflection() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["equilibria", "--gamma", "-0.5", "--out", "neg.csv"],
    );
    let row: Vec<f64> = read(dir.path(), "neg.csv")
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // sin g = -0.5 at the well; the barrier sits at pi + pi/6
    assert!((row[0].sin() + 0.5).abs() < 1e-15);
    assert!((row[1] - 7.0 * std::f64::consts::PI / 6.0).abs() < 1e-15);

    ok(
        dir.path(),
        &[
            "kink-profile",
            "--gamma",
            "-0.05",
            "--alpha",
            "0.1",
            "--out",
            "m.csv",
        ],
    );
    ok(
        dir.path(),
        &[
            "kink-profile",
            "--gamma",
            "0.05",
            "--alpha",
            "0.1",
            "--out",
            "p.csv",
        ],
    );
    let m = parse_profile_csv(&read(dir.path(), "m.csv")).unwrap();
    let p = parse_profile_csv(&read(dir.path(), "p.csv")).unwrap();
    assert_eq!(m, p.reflected());
    assert_eq!(m.kind.name(), "antikink");
    assert_eq!(manifest_of(dir.path(), "m.csv")["reflected"], true);
}

#[test]
fn out_of_range_tilt_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["equilibria", "kink-mu", "kink-profile", "pair"] {
        let out = sgwave(dir.path(), &[cmd, "--gamma", "1.5"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("[0, 1)"),
            "{cmd}"
        );
    }
    assert!(
        std::fs::read_dir(dir.path()).unwrap().next().is_none(),
        "nothing written"
    );
}

#[test]
fn malformed_command_lines_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["kink-mu"][..],
        &["kink-mu", "--gamma", "abc"],
        &["array", "--gamma", "0.1"],
        &["array", "--gamma", "0.1", "--gp0", "1", "--period", "5"],
        &["frobnicate"],
        &["kink-mu", "--gamma", "0", "--alpha", "0.1"],
        &["pde-run", "--gamma", "0", "--dt", "0.2"],
    ] {
        assert_eq!(sgwave(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(sgwave(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn kink_mu_matches_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(
        dir.path(),
        &[
            "kink-mu", "--gamma", "0.01", "--alpha", "0.05", "--format", "json",
        ],
    );
    let (mu, _) = find_kink_mu(Params::new(0.01, 0.05).unwrap(), 1e-12).unwrap();
    let doc: Value = serde_json::from_str(&read(dir.path(), "kink-mu.json")).unwrap();
    for v in [&s, &doc] {
        assert_eq!(v["mu_hat"].as_f64().unwrap(), mu);
        let (v_hat, v_inf) = (v["v_hat"].as_f64().unwrap(), v["v_inf"].as_f64().unwrap());
        assert!((v_hat - v_inf).abs() / v_hat < 0.02);
        assert!(v["iterations"].as_u64().unwrap() > 0);
    }
    let m = manifest_of(dir.path(), "kink-mu.json");
    assert_eq!(m["derived"]["mu_hat"].as_f64().unwrap(), mu);
    assert_eq!(m["solver_version"], sgwave::VERSION);
    assert!(m["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn free_speed_profile_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["kink-profile", "--gamma", "0"]);
    ok(
        dir.path(),
        &["kink-profile", "--gamma", "0", "--format", "json"],
    );
    let csv = read(dir.path(), "kink-profile.csv");
    assert!(csv.contains("# v: free parameter\n"));
    let expected = kink_profile(0.0, 20.0, 0.01).unwrap();
    assert_eq!(parse_profile_csv(&csv).unwrap(), expected);
    assert_eq!(
        parse_profile_json(&read(dir.path(), "kink-profile.json")).unwrap(),
        expected
    );
}

#[test]
fn array_header_carries_the_ring() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(
        dir.path(),
        &["array", "--gamma", "0.1", "--alpha", "0.1", "--gp0", "1"],
    );
    let csv = read(dir.path(), "array.csv");
    let p = parse_profile_csv(&csv).unwrap();
    let (xi, v) = (p.period.unwrap(), p.velocity.unwrap());
    let ring = xi * (1.0 - v * v).sqrt();
    let header = csv
        .lines()
        .find_map(|l| l.strip_prefix("# circumference: "))
        .unwrap();
    assert_eq!(header.parse::<f64>().unwrap(), ring);
    assert_eq!(s["circumference"].as_f64().unwrap(), ring);
    assert!(csv.contains("# period: "));
    // the mirror carries the same samples
    ok(
        dir.path(),
        &[
            "array", "--gamma", "0.1", "--alpha", "0.1", "--gp0", "1", "--format", "json",
        ],
    );
    assert_eq!(
        parse_profile_json(&read(dir.path(), "array.json")).unwrap(),
        p
    );
}

#[test]
fn array_by_period() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(
        dir.path(),
        &["array", "--gamma", "0.1", "--alpha", "0.1", "--period", "5"],
    );
    assert!((s["period"].as_f64().unwrap() - 5.0).abs() < 1e-8);
}

#[test]
fn half_array_is_flagged_as_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(
        dir.path(),
        &["half-array", "--gamma", "0.1", "--alpha", "0.05"],
    );
    assert_eq!(s["below_threshold"], true);
    let m = manifest_of(dir.path(), "half-array.csv");
    assert_eq!(m["evidence_grade"], true);
    assert!(m["derived"]["final_distance"].as_f64().unwrap() < 1e-4);
    assert_eq!(m["command"], "half-array");
}

#[test]
fn periods_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["periods", "--energy", "-0.5,0,1,3"]);
    let text = read(dir.path(), "periods.csv");
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows[1][1], "libration");
    assert!((rows[1][2].parse::<f64>().unwrap() - 7.416_298_7).abs() < 1e-7);
    assert_eq!(rows[2], ["1.0000000000000000e0", "separatrix", ""]);
    assert_eq!(rows[3][1], "rotation");
    assert_eq!(
        sgwave(dir.path(), &["periods", "--energy", "-2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_keeps_input_order_and_reports_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(dir.path(), &["sweep", "--gammas", "0.01,0.02,0.005"]);
    let r = s["extrapolated_ratio"].as_f64().unwrap();
    assert!((r - std::f64::consts::FRAC_PI_4).abs() < 1e-4, "{r}");
    let text = read(dir.path(), "sweep.csv");
    let gammas: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        gammas,
        [
            "1.0000000000000000e-2",
            "2.0000000000000000e-2",
            "5.0000000000000001e-3"
        ]
    );

    let out = sgwave(
        dir.path(),
        &["sweep", "--gammas", "0.01,0", "--out", "bad.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(read(dir.path(), "bad.csv").contains("kink viscosity undefined"));
    assert_ne!(manifest_of(dir.path(), "bad.csv")["status"], "ok");
}

#[test]
fn pde_run_measures_the_kink() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(
        dir.path(),
        &[
            "pde-run",
            "--gamma",
            "0",
            "--alpha",
            "0",
            "--velocity",
            "0.5",
            "--center",
            "-20",
            "--t-end",
            "40",
        ],
    );
    let v = s["measured_velocity"].as_f64().unwrap();
    assert!((v - 0.5).abs() < 2.5e-3, "{v}");
    let csv = read(dir.path(), "pde-run.csv");
    assert!(csv.lines().any(|l| l == "x,phi,phi_t,h"));
    let d: Value = serde_json::from_str(&read(dir.path(), "pde-run.csv.diagnostics.json")).unwrap();
    assert_eq!(d["completed"], true);
    assert_eq!(d["winding_constant"], true);
    assert!(d["records"].as_array().unwrap().len() > 10);
}

#[test]
fn pde_run_stopping_early_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgwave(
        dir.path(),
        &[
            "pde-run",
            "--gamma",
            "0",
            "--velocity",
            "0.8",
            "--left",
            "-40",
            "--right",
            "40",
            "--t-end",
            "60",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d: Value = serde_json::from_str(&read(dir.path(), "pde-run.csv.diagnostics.json")).unwrap();
    assert_eq!(d["completed"], false);
    assert!(d["failure"].as_str().unwrap().contains("pinned end"));
}

#[test]
fn config_file_sits_under_the_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# shared settings\nmodel.gamma = 0.2\nmodel.alpha = 0.1\npde.dx = 0.1\n",
    )
    .unwrap();
    let a = ok(
        dir.path(),
        &["--config", "run.cfg", "kink-mu", "--out", "a.csv"],
    );
    let b = ok(
        dir.path(),
        &[
            "kink-mu", "--config", "run.cfg", "--gamma", "0.1", "--out", "b.csv",
        ],
    );
    let m = manifest_of(dir.path(), "b.csv");
    assert_eq!(m["inputs"]["gamma"], 0.1);
    assert_eq!(m["inputs"]["alpha"], 0.1);
    assert_ne!(a["mu_hat"], b["mu_hat"]);

    for bad in ["model.beta = 1\n", "gamma = 0.1\n", "model.gamma\n"] {
        std::fs::write(dir.path().join("bad.cfg"), bad).unwrap();
        let out = sgwave(dir.path(), &["kink-mu", "--config", "bad.cfg"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("bad.cfg:1"),
            "{bad}"
        );
    }
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_sgwave"))
        .current_dir(dir.path())
        .env(sgwave_cli::OUT_DIR_ENV, "results")
        .args(["periods", "--energy", "0.5"])
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("results/periods.csv").exists());
    assert!(dir
        .path()
        .join("results/periods.csv.manifest.json")
        .exists());
}

#[test]
fn same_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        ok(
            dir.path(),
            &[
                "kink-profile",
                "--gamma",
                "0.05",
                "--alpha",
                "0.1",
                "--out",
                name,
            ],
        );
    }
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
    for name in ["a.json", "b.json"] {
        ok(
            dir.path(),
            &[
                "sweep",
                "--gammas",
                "0.05,0.1,0.2",
                "--format",
                "json",
                "--out",
                name,
            ],
        );
    }
    assert_eq!(read(dir.path(), "a.json"), read(dir.path(), "b.json"));
}

#[test]
fn manifests_replay_to_the_same_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[(&[&str], &str)] = &[
        (
            &["equilibria", "--gamma", "-0.3", "--k", "2"],
            "equilibria.csv",
        ),
        (
            &[
                "kink-mu", "--gamma", "0.05", "--alpha", "0.2", "--delta", "1e-9",
            ],
            "kink-mu.csv",
        ),
        (
            &[
                "kink-profile",
                "--gamma",
                "0.1",
                "--alpha",
                "0.3",
                "--spacing",
                "0.05",
            ],
            "kink-profile.csv",
        ),
        (
            &[
                "array",
                "--gamma",
                "0.2",
                "--alpha",
                "0.1",
                "--period",
                "6",
                "--periods",
                "3",
            ],
            "array.csv",
        ),
        (
            &[
                "half-array",
                "--gamma",
                "0.1",
                "--alpha",
                "0.05",
                "--horizon",
                "100",
            ],
            "half-array.csv",
        ),
        (
            &[
                "pair",
                "--gamma",
                "-0.2",
                "--samples",
                "201",
                "--format",
                "json",
            ],
            "pair.json",
        ),
        (&["periods", "--energy", "-0.9,0.2,4"], "periods.csv"),
        (
            &["sweep", "--gammas", "0.1,0.05", "--alpha", "0.05"],
            "sweep.csv",
        ),
        (
            &[
                "pde-run", "--wave", "array", "--gamma", "0.1", "--alpha", "0.1", "--t-end", "5",
            ],
            "pde-run.csv",
        ),
    ];
    for (args, artifact) in runs {
        ok(dir.path(), args);
        let m = dir.path().join(format!("{artifact}.manifest.json"));
        let recorded = manifest::read(&m).unwrap();
        for path in &recorded.artifacts {
            assert!(dir.path().join(path).exists(), "{path:?}");
        }
        let again = format!("replay/{artifact}");
        ok(
            dir.path(),
            &["replay", m.to_str().unwrap(), "--out", &again],
        );
        assert_eq!(
            read(dir.path(), artifact),
            read(dir.path(), &again),
            "{args:?}"
        );
        let replayed = manifest::read(&dir.path().join(format!("{again}.manifest.json"))).unwrap();
        assert_eq!(replayed.derived, recorded.derived, "{args:?}");
        assert_eq!(replayed.command, recorded.command);
    }
}

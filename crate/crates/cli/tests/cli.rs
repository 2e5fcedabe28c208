//! End-to-end tests of the `trapctl` binary: file round-trips,
//! deterministic outputs, and the exit-code contract
//! (0 ok, 1 verification failure, 2 input/parse error, 3 numeric).

use std::path::Path;
use std::process::{Command, Output};

use trapctl_cli::protocol_file;

fn trapctl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trapctl"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRAPCTL_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn design_output_parses_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("dkc-free", vec!["--b-f", "1.4142135623730951"]),
        ("dkc-free-longtime", vec!["--b-f", "1.4142135623730951"]),
        ("dkc-inverted", vec!["--b-f", "2.5", "--omega-i", "4"]),
        ("bangbang-positive", vec!["--omega-f", "0.25"]),
        ("constant-mu", vec!["--omega-f", "0.5", "--t-f", "9.0"]),
        ("delta-sta", vec!["--omega-f", "0.25", "--t-k", "2", "--n", "2"]),
        ("finite-dkc-free", vec!["--omega-f", "0.5", "--omega-k", "4"]),
        (
            "finite-dkc-inverted",
            vec!["--omega-f", "0.5", "--omega-i", "2", "--omega-k", "10"],
        ),
    ];
    for (family, extra) in cases {
        let mut args = vec!["design", "--family", family];
        args.extend(extra.iter());
        let out = trapctl(dir.path(), &args);
        assert_exit(&out, 0);

        let path = dir.path().join(format!("{family}.protocol"));
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = protocol_file::from_text(&text).unwrap();
        assert_eq!(parsed.family.name(), family);
        // Field-by-field round trip: re-serialize and compare bytes.
        assert_eq!(protocol_file::to_text(&parsed), text, "{family}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        assert_exit(
            &trapctl(dir, &["design", "--family", "dkc-free", "--b-f", "2.0"]),
            0,
        );
        assert_exit(
            &trapctl(dir, &["simulate", "--protocol", "dkc-free.protocol"]),
            0,
        );
        assert_exit(&trapctl(dir, &["table", "--figure", "fig2"]), 0);
        assert_exit(
            &trapctl(
                dir,
                &[
                    "sweep",
                    "--family",
                    "finite-dkc-free",
                    "--param",
                    "omega-k",
                    "--from",
                    "1",
                    "--to",
                    "16",
                    "--points",
                    "8",
                    "--omega-f",
                    "0.5",
                ],
            ),
            0,
        );
    }
    for name in [
        "dkc-free.protocol",
        "dkc-free.trajectory.csv",
        "fig2.table.csv",
        "finite-dkc-free.sweep.csv",
    ] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across runs");
    }
}

#[test]
fn trajectory_csv_flags_kicks() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &trapctl(
            dir.path(),
            &["design", "--family", "dkc-free", "--b-f", "1.4142135623730951"],
        ),
        0,
    );
    assert_exit(
        &trapctl(dir.path(), &["simulate", "--protocol", "dkc-free.protocol"]),
        0,
    );
    let csv = std::fs::read_to_string(dir.path().join("dkc-free.trajectory.csv")).unwrap();
    let kick_rows: Vec<&str> = csv.lines().filter(|l| l.contains("kick")).collect();
    assert_eq!(kick_rows.len(), 1);
    let cells: Vec<&str> = kick_rows[0].split(',').collect();
    assert!((cells[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    // Post-kick rate is zero.
    assert!(cells[3].parse::<f64>().unwrap().abs() < 1e-12);
}

#[test]
fn fig3_trajectory_follows_tof_then_freezes() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &trapctl(
            dir.path(),
            &["simulate", "--paper-defaults", "fig3", "--out", "fig3.csv"],
        ),
        0,
    );
    let csv = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let b_f = 2.0f64.sqrt();
    let t_kick = b_f.mul_add(b_f, -1.0).sqrt();
    let mut checked_rise = 0;
    let mut checked_flat = 0;
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let t: f64 = cells[0].parse().unwrap();
        let b: f64 = cells[2].parse().unwrap();
        if t < t_kick {
            let tof = (1.0 + t * t).sqrt();
            assert!((b - tof).abs() < 1e-8 * tof, "t = {t}: b = {b} vs TOF {tof}");
            checked_rise += 1;
        } else {
            assert!((b - b_f).abs() < 1e-7, "t = {t}: b = {b} after the kick");
            checked_flat += 1;
        }
    }
    assert!(checked_rise > 100 && checked_flat > 100);
}

#[test]
fn fig6_trajectory_expands_until_the_pulse_stops_it() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &trapctl(
            dir.path(),
            &["simulate", "--paper-defaults", "fig6", "--out", "fig6.csv"],
        ),
        0,
    );
    let csv = std::fs::read_to_string(dir.path().join("fig6.csv")).unwrap();
    let rows: Vec<(f64, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (
                c[0].parse().unwrap(),
                c[1].parse().unwrap(),
                c[2].parse().unwrap(),
            )
        })
        .collect();
    // Monotone growth while the trap is inverted, then the pulse stops
    // the expansion at b_F = √2 and the hold keeps it there.
    let mut prev_b = 0.0;
    for &(_t, omega_sq, b) in &rows {
        if omega_sq < 0.0 {
            assert!(b >= prev_b);
            prev_b = b;
        }
    }
    let (_, _, b_end) = rows[rows.len() - 1];
    assert!((b_end - 2.0f64.sqrt()).abs() < 1e-6);
    // The pulse segment is visible in the ω² column.
    assert!(rows.iter().any(|&(_, w2, _)| w2 > 100.0));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Good protocol: exit 0.
    assert_exit(
        &trapctl(
            dir.path(),
            &["design", "--family", "bangbang-positive", "--omega-f", "0.25"],
        ),
        0,
    );
    assert_exit(
        &trapctl(
            dir.path(),
            &["verify", "--protocol", "bangbang-positive.protocol"],
        ),
        0,
    );

    // Long-time kick misses the target: exit 1 with a reported residual.
    assert_exit(
        &trapctl(
            dir.path(),
            &[
                "design",
                "--family",
                "dkc-free-longtime",
                "--b-f",
                "1.4142135623730951",
            ],
        ),
        0,
    );
    let out = trapctl(
        dir.path(),
        &["verify", "--protocol", "dkc-free-longtime.protocol"],
    );
    assert_exit(&out, 1);
    let report = std::fs::read_to_string(dir.path().join("dkc-free-longtime.report.txt")).unwrap();
    assert!(report.contains("overall: fail"));

    // Corrupted protocol file: exit 2.
    std::fs::write(dir.path().join("broken.protocol"), "not a protocol\n").unwrap();
    assert_exit(
        &trapctl(dir.path(), &["verify", "--protocol", "broken.protocol"]),
        2,
    );

    // Unknown flag: clap usage error, exit 2.
    assert_exit(
        &trapctl(dir.path(), &["design", "--family", "dkc-free", "--bogus", "1"]),
        2,
    );

    // Missing required family parameter: exit 2 naming the key.
    let out = trapctl(dir.path(), &["design", "--family", "dkc-inverted", "--b-f", "2"]);
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--omega-i"));

    // Infeasible pulse frequency: exit 2 with the violated bound.
    let out = trapctl(
        dir.path(),
        &[
            "design",
            "--family",
            "finite-dkc-free",
            "--omega-f",
            "0.5",
            "--omega-k",
            "0.5",
        ],
    );
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega_k >= omega0/b_F"));
}

#[test]
fn wigner_grids_for_fig1_and_fig7() {
    let dir = tempfile::tempdir().unwrap();
    for (fig, prefix) in [("fig1", "free"), ("fig7", "inverted")] {
        let out = trapctl(
            dir.path(),
            &[
                "wigner",
                "--paper-defaults",
                fig,
                "--resolution",
                "61",
                "--out-prefix",
                prefix,
            ],
        );
        assert_exit(&out, 0);
        for i in 0..3 {
            let text =
                std::fs::read_to_string(dir.path().join(format!("{prefix}.{i}.grid"))).unwrap();
            assert!(text.starts_with("trapctl-wigner-grid v1\n"));
            let rows = text.lines().skip_while(|l| *l != "data:").skip(1).count();
            assert_eq!(rows, 61);
        }
        // Post-kick snapshot is un-tilted: σ_rp ≈ 0.
        let post = std::fs::read_to_string(dir.path().join(format!("{prefix}.2.grid"))).unwrap();
        let sigma_rp: f64 = post
            .lines()
            .find_map(|l| l.strip_prefix("sigma_rp: "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(sigma_rp.abs() < 1e-9, "{fig}: sigma_rp = {sigma_rp}");
    }

    // The inverted-trap expansion spreads momentum more than free
    // flight at the same expansion time, needing a stronger kick.
    let read_sigma = |prefix: &str, idx: usize, key: &str| -> f64 {
        std::fs::read_to_string(dir.path().join(format!("{prefix}.{idx}.grid")))
            .unwrap()
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}: ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    let free_pp = read_sigma("free", 1, "sigma_pp");
    let inv_pp = read_sigma("inverted", 1, "sigma_pp");
    assert!(
        inv_pp > 2.0 * free_pp,
        "pre-kick momentum spread: inverted {inv_pp} vs free {free_pp}"
    );
}

#[test]
fn out_dir_env_var_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let outroot = dir.path().join("nested/results");
    let out = Command::new(env!("CARGO_BIN_EXE_trapctl"))
        .args(["design", "--family", "dkc-free", "--b-f", "2.0"])
        .current_dir(dir.path())
        .env("TRAPCTL_OUT_DIR", &outroot)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(outroot.join("dkc-free.protocol").is_file());
}

#[test]
fn table_rows_flag_infeasible_points_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = trapctl(
        dir.path(),
        &[
            "table",
            "--figure",
            "fig9",
            "--from",
            "0.3",
            "--to",
            "2.0",
            "--points",
            "12",
        ],
    );
    assert_exit(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("fig9.table.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("infeasible")));
    assert!(csv.lines().any(|l| l.contains(",ok,")));
    // Rectangular: every row has the header's column count.
    let cols = csv.lines().next().unwrap().split(',').count();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), cols, "{line}");
    }
}

#[test]
fn identity_protocol_gives_identical_circular_grids() {
    // Stay at ω₀ from a near-vacuum state: every snapshot is the same
    // circle.
    let dir = tempfile::tempdir().unwrap();
    let protocol = "\
trapctl-protocol v1
family: dkc-free
omega0: 1.0000000000000000e0
omega_final_sq: 1.0000000000000000e0
predicted_b: 1.0000000000000000e0
predicted_b_dot: 0.0000000000000000e0
predicted_t: 3.0000000000000000e0
segment constant: omega_sq=1.0000000000000000e0 duration=3.0000000000000000e0
end
";
    std::fs::write(dir.path().join("identity.protocol"), protocol).unwrap();
    let out = trapctl(
        dir.path(),
        &[
            "wigner",
            "--protocol",
            "identity.protocol",
            "--beta0",
            "1e6",
            "--resolution",
            "41",
            "--out-prefix",
            "id",
        ],
    );
    assert_exit(&out, 0);
    let strip_label = |s: String| -> String {
        s.lines()
            .filter(|l| !l.starts_with("snapshot") )
            .collect::<Vec<_>>()
            .join("\n")
    };
    let g0 = strip_label(std::fs::read_to_string(dir.path().join("id.0.grid")).unwrap());
    let g1 = strip_label(std::fs::read_to_string(dir.path().join("id.1.grid")).unwrap());
    let g2 = strip_label(std::fs::read_to_string(dir.path().join("id.2.grid")).unwrap());
    assert_eq!(g0, g1);
    assert_eq!(g0, g2);
}

#[test]
fn simulate_accepts_paper_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for fig in ["fig3", "fig4", "fig6"] {
        let out = trapctl(dir.path(), &["simulate", "--paper-defaults", fig]);
        assert_exit(&out, 0);
    }
    // A table figure is not a protocol.
    let out = trapctl(dir.path(), &["simulate", "--paper-defaults", "fig5"]);
    assert_exit(&out, 2);
}

#[test]
fn smooth_schedules_survive_the_file_round_trip_into_simulate() {
    let dir = tempfile::tempdir().unwrap();
    for (family, args) in [
        (
            "constant-mu",
            vec!["--omega-f", "0.5", "--t-f", "9.0"],
        ),
        (
            "delta-sta",
            vec!["--omega-f", "0.25", "--t-k", "2", "--n", "3"],
        ),
    ] {
        let mut design = vec!["design", "--family", family];
        design.extend(args.iter());
        assert_exit(&trapctl(dir.path(), &design), 0);
        let protocol = format!("{family}.protocol");
        assert_exit(
            &trapctl(dir.path(), &["simulate", "--protocol", &protocol]),
            0,
        );
        assert!(dir.path().join(format!("{family}.trajectory.csv")).is_file());
    }
}

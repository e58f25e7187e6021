use std::path::Path;
use std::process::{Command, Output};

fn leo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leo-nlos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn zenith_delay_closure_pins_a_to_height() {
    let o = leo(&[
        "geometry",
        "--elevation",
        "90",
        "--height",
        "65",
        "--max-delay-ns",
        "433.6",
    ]);
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "65");
    assert_eq!(rows[0][3], "129.99001");
    // The schedule's 30 ns cannot be met with c = 130 m, so b is reported
    // as missing and the run fails numerically.
    assert_eq!(rows[0][2], "nan");
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("# error: elevation 90"));
}

#[test]
fn solved_geometry_matches_target() {
    let o = leo(&["geometry", "--elevation", "45"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &data_rows(&stdout(&o))[0];
    let a: f64 = row[1].parse().unwrap();
    let b: f64 = row[2].parse().unwrap();
    let sigma: f64 = row[4].parse().unwrap();
    assert!((b / a - 0.6).abs() < 1e-8);
    assert!((sigma / 56.87855 - 1.0).abs() < 5e-3);
}

fn density_around_zero(support: &str) -> (f64, f64) {
    let o = leo(&["psd", "--elevation", "45", "--support", support]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    let zero = rows.iter().position(|r| r[0] == "0").expect("centre cell");
    let d = |i: usize| rows[i][2].parse::<f64>().unwrap();
    (d(zero - 1), d(zero + 1))
}

#[test]
fn truncated_support_opens_a_gap_at_zero() {
    let (below_full, above_full) = density_around_zero("0,360");
    let (below, above) = density_around_zero("0,270");
    // The full-circle PSD only changes by its slope across the centre cell.
    assert!((below_full - above_full).abs() < 0.05 * (below - above));
    assert!(above < below, "{above} vs {below}");
}

#[test]
fn monte_carlo_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = leo(&[
            "mc",
            "--elevation",
            "30",
            "--samples",
            "1000",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

fn reproduce(args: &[&str], dir: &Path) {
    let first = dir.join("first.csv");
    let second = dir.join("second.csv");
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", first.to_str().unwrap()]);
    assert_eq!(leo(&full).status.code(), Some(0));
    let again = leo(&[
        args[0],
        "--config",
        first.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(
        again.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "{args:?}"
    );
}

#[test]
fn embedded_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    reproduce(
        &["psd", "--elevation", "60", "--support", "0,270", "--bins", "51"],
        dir.path(),
    );
    reproduce(
        &["pdf", "--elevation", "15", "--marginal-elevation", "--grid", "19"],
        dir.path(),
    );
    reproduce(
        &[
            "compose",
            "--elevation",
            "30",
            "--k-factor",
            "9",
            "--f-los",
            "-0.25",
            "--bins",
            "21",
        ],
        dir.path(),
    );
    reproduce(
        &[
            "mc",
            "--elevation",
            "75",
            "--samples",
            "500",
            "--seed",
            "3",
            "--table",
            "rays",
        ],
        dir.path(),
    );
    reproduce(
        &[
            "synth",
            "--elevation",
            "30",
            "--rays",
            "50",
            "--duration",
            "4",
            "--table",
            "waveform",
        ],
        dir.path(),
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# plain key=value file\nelevation=30\nbins=11\n").unwrap();
    let o = leo(&["psd", "--config", cfg.to_str().unwrap(), "--bins", "21"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# config elevation=30\n"));
    assert!(text.contains("# config bins=21\n"));
    assert_eq!(data_rows(&text).len(), 21);
}

#[test]
fn exit_codes() {
    for bad in [
        vec!["psd", "--elevation", "45", "--frobnicate"],
        vec!["psd", "--elevation", "200"],
        vec!["psd", "--elevation", "45", "--bins", "3"],
        vec!["psd", "--elevation", "45", "--method", "delta", "--support", "0,270"],
        vec!["mc", "--elevation", "30", "--samples", "0"],
        vec!["synth", "--elevation", "30", "--rate", "2"],
        vec!["sweep", "--start", "50", "--end", "40"],
        vec!["geometry", "--elevation", "30", "--out", "/nonexistent/dir/x.csv"],
    ] {
        let o = leo(&bad);
        assert_eq!(o.status.code(), Some(2), "{bad:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{bad:?}: {err}");
    }
    let o = leo(&["sweep", "--start", "20", "--end", "24", "--step", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(data_rows(&text).len(), 3);
    assert_eq!(text.matches("# error:").count(), 2);
    assert_eq!(leo(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_rows_follow_ratio_closure() {
    let o = leo(&[
        "sweep", "--start", "30", "--end", "90", "--step", "30", "--points", "400",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for r in rows {
        let a: f64 = r[1].parse().unwrap();
        let b: f64 = r[2].parse().unwrap();
        assert!((b - 0.6 * a).abs() < 1e-7 * a);
    }
}

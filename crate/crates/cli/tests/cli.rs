use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn retrowpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retrowpt"))
        .args(args)
        .output()
        .expect("spawn")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert!(retrowpt(&["--help"]).status.success());
    assert!(retrowpt(&["sweep", "--help"]).status.success());
    assert!(!retrowpt(&["frobnicate"]).status.success());
    assert!(!retrowpt(&[]).status.success());
    assert!(!retrowpt(&["analyze", "--sigmas", "0.6", "--bogus"])
        .status
        .success());
    assert!(!retrowpt(&["sweep", "--sigmas", "0.6,0.8"]).status.success());
    assert!(
        !retrowpt(&["sweep", "--sigmas", "0.6,0.8", "--gains", "8:0"])
            .status
            .success()
    );
}

#[test]
fn validation_failures_exit_nonzero() {
    // no channel source
    assert!(!retrowpt(&["analyze"]).status.success());
    // singular value outside [0, 1]
    assert!(!retrowpt(&["analyze", "--sigmas", "1.5"]).status.success());
    assert!(
        !retrowpt(&["analyze", "/nonexistent/x.s4p", "--rx", "1", "--tx", "3"])
            .status
            .success()
    );
    assert!(!retrowpt(&["simulate", "--sigmas", "0.6", "--sat", "-1"])
        .status
        .success());
}

#[test]
fn analyze_known_spectrum() {
    let report = json(&retrowpt(&["analyze", "--sigmas", "0.6,0.8"]));
    assert!((report["eta_max_pct"].as_f64().unwrap() - 64.0).abs() < 1e-9);
    assert!((report["marginal_gain_db"].as_f64().unwrap() - 3.8764).abs() < 1e-4);
    assert_eq!(report["xi_list"].as_array().unwrap().len(), 2);
    let with_loss = json(&retrowpt(&[
        "analyze",
        "--sigmas",
        "0.6,0.8",
        "--loss-db",
        "3",
    ]));
    let diff = with_loss["marginal_gain_db"].as_f64().unwrap()
        - report["marginal_gain_db"].as_f64().unwrap();
    assert!((diff - 3.0).abs() < 1e-9);
}

#[test]
fn synth_file_feeds_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pair.s4p");
    let out = retrowpt(&[
        "synth",
        "--sigmas",
        "0.6,0.8",
        "--seed",
        "7",
        "--format",
        "ma",
        "--out",
        path(&file),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.starts_with('!'));
    let report = json(&retrowpt(&[
        "analyze",
        path(&file),
        "--rx",
        "1,2",
        "--tx",
        "3,4",
    ]));
    assert!((report["xi_max"].as_f64().unwrap() - 0.64).abs() < 1e-12);

    let modes = stdout(&retrowpt(&[
        "modes",
        path(&file),
        "--rx",
        "1,2",
        "--tx",
        "3,4",
    ]));
    let lines: Vec<&str> = modes.lines().collect();
    assert_eq!(lines[0], "mode,xi,eta_pct,a1_re,a1_im,a2_re,a2_im");
    assert_eq!(lines.len(), 3);

    // overlapping partitions are rejected
    assert!(
        !retrowpt(&["analyze", path(&file), "--rx", "1,2", "--tx", "2,3"])
            .status
            .success()
    );
}

#[test]
fn malformed_touchstone_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.s2p");
    fs::write(&file, "# GHz S RI R 50\n! comment\n2.4 1 0 0 1 0 1 1\n").unwrap();
    let out = retrowpt(&["analyze", path(&file), "--rx", "1", "--tx", "2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("bad.s2p"), "{err}");
}

#[test]
fn multi_point_file_needs_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("two.s2p");
    fs::write(
        &file,
        "# GHz S RI R 50\n2.3 0 0 0.5 0 0.5 0 0 0\n2.4 0 0 0.8 0 0.8 0 0 0\n",
    )
    .unwrap();
    assert!(
        !retrowpt(&["analyze", path(&file), "--rx", "1", "--tx", "2"])
            .status
            .success()
    );
    let report = json(&retrowpt(&[
        "analyze",
        path(&file),
        "--rx",
        "1",
        "--tx",
        "2",
        "--freq-ghz",
        "2.4",
    ]));
    assert!((report["xi_max"].as_f64().unwrap() - 0.64).abs() < 1e-12);
    assert!(!retrowpt(&[
        "analyze",
        path(&file),
        "--rx",
        "1",
        "--tx",
        "2",
        "--freq-ghz",
        "2.6"
    ])
    .status
    .success());
}

#[test]
fn simulate_writes_time_series() {
    let csv = stdout(&retrowpt(&[
        "simulate", "--sigmas", "0.6,0.8", "--steps", "50", "--seed", "3",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,v1f_norm,v2f_norm,efficiency,mode_purity");
    assert_eq!(lines.len(), 51);
    let last: Vec<f64> = lines[50].split(',').map(|x| x.parse().unwrap()).collect();
    // at the marginal gain the loop settles on the strongest mode
    assert!((last[3] - 0.64).abs() < 1e-6);
    assert!((last[4] - 1.0).abs() < 1e-6);
}

#[test]
fn sweep_is_reproducible_and_finds_transition() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep",
            "--sigmas",
            "0.6,0.8",
            "--gains",
            "8:0:0.25",
            "--seed",
            "5",
            "--steps",
            "600",
            "--discard",
            "200",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([path(p).to_string()])
        .collect::<Vec<_>>()
    };
    let run = |p: &Path| {
        let argv = args(p);
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        json(&retrowpt(&refs))
    };
    let summary = run(&a);
    run(&b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let transition = summary["transition_gain_db"].as_f64().unwrap();
    let predicted = summary["predicted_gain_db"].as_f64().unwrap();
    assert!((transition - predicted).abs() <= 0.25, "{summary}");
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("gain_db,eff_mean,eff_std,label\n8.0,"));
    assert_eq!(text.lines().count(), 34);
}

#[test]
fn regress_table2_report() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let report = json(&retrowpt(&["regress", "--table2", "--plot", path(&plot)]));
    assert!((report["free"]["slope"].as_f64().unwrap() + 0.9266).abs() <= 0.01);
    assert!((report["free"]["intercept_db"].as_f64().unwrap() - 6.46).abs() <= 0.15);
    assert!((report["free"]["r_squared"].as_f64().unwrap() - 0.8236).abs() <= 0.01);
    assert_eq!(report["fixed"]["slope"].as_f64().unwrap(), -1.0);
    assert_eq!(report["free"]["n_points"], 30);
    let plot = fs::read_to_string(&plot).unwrap();
    assert!(plot.starts_with("g_db,y_db,y_fit_free,y_fit_fixed\n"));
    assert_eq!(plot.lines().count(), 31);
}

#[test]
fn regress_external_cases() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cases.csv");
    fs::write(
        &file,
        "case,rx_ports,tx_ports,eta_theo_pct,eta_meas_pct,error_pct,gain_setting_db,gain_corr_db,est_loss_db\n\
         1,1,7,50,50,0,10,9,3\n2,1,7,50,25,50,12,11,0\n",
    )
    .unwrap();
    let report = json(&retrowpt(&["regress", "--cases", path(&file)]));
    assert_eq!(report["free"]["r_squared"].as_f64().unwrap(), 1.0);
    fs::write(&file, "case,rx_ports\n1,1\n").unwrap();
    assert!(!retrowpt(&["regress", "--cases", path(&file)])
        .status
        .success());
}

#[test]
fn table2_echo_has_no_mismatches() {
    let out = retrowpt(&["table2"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 31);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(text
        .lines()
        .nth(30)
        .unwrap()
        .starts_with("30,2;5,11;12,60.11,57.33,4.62,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatches: 0 of 30"));
}

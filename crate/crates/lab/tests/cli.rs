use std::path::PathBuf;
use std::process::{Command, Output};

const SDP5: &str = "kind=semidirect A=Z_5 B=Z_2 action=inversion";

fn cosetlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosetlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cosetlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn verify_lists_every_law_for_dihedral_six() {
    let o = cosetlab(&["verify", "--group", "kind=dihedral n=6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("law,cases,worst_deviation,tolerance,status"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|r| r.ends_with(",pass")), "{text}");
    let rank = rows.iter().find(|r| r.starts_with("rank,")).unwrap();
    assert!(rank.starts_with("rank,16,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("16 subgroups"));
}

#[test]
fn csi_sweep_emits_one_row_per_k() {
    let o = cosetlab(&["csi-sweep", "--group", SDP5, "--family", "sdp", "--k-min", "1", "--k-max", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    let header: Vec<&str> = lines[0].split(',').collect();
    let k_col = header.iter().position(|h| *h == "k").unwrap();
    let pgm_col = header.iter().position(|h| *h == "measured_pgm_success").unwrap();
    let mut last = 0.0;
    for (i, row) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[k_col], (i + 1).to_string());
        let s: f64 = cells[pgm_col].parse().unwrap();
        assert!(s >= last);
        last = s;
        // 12 significant digits in scientific form.
        assert_eq!(cells[pgm_col].split('e').next().unwrap().len(), 13, "{}", cells[pgm_col]);
    }
}

#[test]
fn json_sweep_is_parseable() {
    let o = cosetlab(&["tcs-sweep", "--group", "kind=symmetric n=4", "--family", "sym", "--k-max", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(v["family"]["size"], 3);
    assert!((rows[0]["measured_tcs_advantage"].as_f64().unwrap() - 0.125).abs() < 1e-12);
    assert!(rows[0]["measured_pgm_success"].is_null());
}

#[test]
fn exit_status_contract() {
    assert_eq!(cosetlab(&["hn-check", "--trials", "30", "--seed", "4"]).status.code(), Some(0));
    // Keys (1 2 3) and (1 3 2) generate one subgroup; the bound fails there.
    assert_eq!(cosetlab(&["qes-security", "--n", "3", "--m", "3"]).status.code(), Some(1));
    for bad in [
        vec!["verify"],
        vec!["csi-sweep", "--group", "kind=cyclic n=5", "--family", "sdp"],
        vec!["csi-sweep", "--group", SDP5, "--family", "sdp", "--k-min", "3", "--k-max", "1"],
        vec!["hn-check", "--tol", "0"],
        vec!["hn-check", "--workers", "0"],
        vec!["verify", "--group", "kind=torus n=3"],
        vec!["qes-security", "--n", "4", "--m", "3"],
        vec!["frobnicate"],
    ] {
        let o = cosetlab(&bad);
        assert_eq!(o.status.code(), Some(2), "{bad:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = cosetlab(&["verify", "--group", "kind=symmetric n=5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("120"));
}

#[test]
fn infeasible_sweep_cells_are_left_empty() {
    let o = cosetlab(&["csi-sweep", "--group", SDP5, "--family", "sdp", "--route", "dense", "--dense-cap", "50", "--k-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let col = lines[0].split(',').position(|h| h == "measured_pgm_success").unwrap();
    assert!(!lines[1].split(',').nth(col).unwrap().is_empty());
    assert!(lines[2].split(',').nth(col).unwrap().is_empty());
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("config");
    let config = dir.join("run.toml");
    std::fs::write(&config, "trials = 500\nseed = 3\ndim_max = 6\nformat = \"json\"\n").unwrap();
    let config = config.to_str().unwrap();
    let from_file = cosetlab(&["hn-check", "--config", config, "--trials", "25"]);
    assert_eq!(from_file.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(v["trials"], 25);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["dim_max"], 6);

    std::fs::write(dir.join("bad.toml"), "trails = 5\n").unwrap();
    let o = cosetlab(&["hn-check", "--config", dir.join("bad.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_file_matches_stdout() {
    let dir = scratch("out");
    let out = dir.join("hn.csv");
    let args = ["hn-check", "--trials", "40", "--seed", "11"];
    let printed = cosetlab(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    let o = cosetlab(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), printed);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweeps_are_independent_of_worker_count() {
    let base = ["tcs-sweep", "--group", SDP5, "--family", "sdp", "--k-max", "3"];
    let one = cosetlab(&[&base[..], &["--workers", "1"]].concat()).stdout;
    let four = cosetlab(&[&base[..], &["--workers", "4"]].concat()).stdout;
    assert_eq!(one, four);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kicked-spin"))
}

fn run(args: &[&str], out: &Path) -> Output {
    let o = bin().args(args).arg("--out").arg(out).output().expect("binary runs");
    assert!(
        o.status.success(),
        "{args:?}: {}\n{}",
        o.status,
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn read(dir: &Path, name: &str) -> (Value, Vec<String>) {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    let mut lines = text.lines();
    let head = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    (head, lines.map(str::to_string).collect())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let cases: [&[&str]; 3] = [
        &["zgeom", "--nodes", "2000"],
        &["trajectory", "--spin", "2", "--trajectories", "3", "--t-max", "4", "--seed", "7"],
        &["poincare", "--n-initial", "2", "--periods", "1200", "--transient", "1000", "--omega-z", "0.5"],
    ];
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(args, a.path());
        run(args, b.path());
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{args:?}");
    }
}

#[test]
fn seed_changes_the_jump_record() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["trajectory", "--spin", "2", "--t-max", "4"];
    run(&[&args[..], &["--seed", "1"]].concat(), a.path());
    run(&[&args[..], &["--seed", "2"]].concat(), b.path());
    assert_ne!(read(a.path(), "jumps.csv").1, read(b.path(), "jumps.csv").1);
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[model]\nomega_zz = 0.5\n").unwrap();
    let o = bin().arg("zgeom").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega_zz"));
}

#[test]
fn invalid_requests_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["verify", "--only", "42", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    // closed-form phase response needs ω_z = 0
    let o = bin().args(["zgeom", "--omega-z", "0.5", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[zgeom]\nnodes = 500\nsamples = 16\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["zgeom", "--config", cfg.to_str().unwrap()], &a);
    run(&["zgeom", "--config", cfg.to_str().unwrap(), "--nodes", "800"], &b);
    let (ha, rows) = read(&a, "zgeom.csv");
    let (hb, _) = read(&b, "zgeom.csv");
    assert_eq!(rows.len(), 1 + 16);
    assert_ne!(ha["config_sha256"], hb["config_sha256"]);
    assert_ne!(ha["meta"]["invariant_average"], hb["meta"]["invariant_average"]);
}

#[test]
fn header_and_columns_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &["lyap-map", "--n-omega-z", "3", "--n-omega1", "2", "--periods", "1000"],
        dir.path(),
    );
    let (head, rows) = read(dir.path(), "lyap_map.csv");
    assert_eq!(head["schema"], "grid-phase");
    assert_eq!(head["schema_version"], 1);
    assert_eq!(head["command"], "lyap-map");
    assert_eq!(head["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(rows[0], "omega_z,omega1,eta,phase_label");
    assert_eq!(rows.len(), 1 + 6);
}

#[test]
fn spectrum_reproduces_the_listed_peaks() {
    let dir = tempfile::tempdir().unwrap();
    run(&["spectrum", "--omega-z", "0", "--omega1", "1"], dir.path());
    let (head, rows) = read(dir.path(), "spectrum.csv");
    assert_eq!(rows[0], "freq,amplitude,m_label,n_label");
    let top: Vec<(f64, String)> = rows[1..5]
        .iter()
        .map(|r| {
            let c: Vec<&str> = r.split(',').collect();
            (c[0].parse().unwrap(), format!("{},{}", c[2], c[3]))
        })
        .collect();
    for (f, label) in [(2.312, "1,0"), (1.659, "-2,1"), (0.653, "3,-1"), (2.966, "4,-1")] {
        assert!(top.iter().any(|(g, l)| (g - f).abs() < 1e-2 && l == label), "{f} in {top:?}");
    }
    assert!((head["meta"]["omega_eff"].as_f64().unwrap() - 2.312).abs() < 1e-2);
    let (_, series) = read(dir.path(), "stroboscopic.csv");
    assert_eq!(series[0], "t,mx,my,mz");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        kicked_spin_cli::config::RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 6);
}

#[test]
fn every_command_writes_its_schema() {
    let cases: [(&[&str], &str, &str); 8] = [
        (&["bifurcation", "--points", "3", "--periods", "1000", "--from", "0.4", "--to", "0.6"], "bifurcation.csv", "param,my,eta,phase_label"),
        (&["shift-curve", "--omega-z", "0.6", "--points", "2", "--from", "0.9", "--to", "0.95"], "shift_curve.csv", "omega1,omega_eff,eta,locked,p,q,f_mod"),
        (&["tongues", "--n-omega1", "2", "--n-omega-z", "2"], "tongues.csv", "omega_z,omega1,locked,p,q,f_mod"),
        (&["liouvillian", "--spin", "1,2", "--method", "both", "--omega-z", "2.3"], "liouvillian.csv", "re,im,modulus,arg,S,method"),
        (&["autocorr", "--spin", "2,4", "--t-max", "20", "--omega-z", "2.0"], "autocorr.csv", "t,G,S"),
        (&["steady", "--spin", "2", "--periods", "3", "--omega-z", "2.0"], "steady.csv", "S,mx,my,mz,residual,iterations"),
        (&["steady", "--spin", "2", "--periods", "3", "--omega-z", "2.0"], "evolution_S2.csv", "t,mx,my,mz"),
        (&["trajectory", "--spin", "2", "--trajectories", "4", "--t-max", "3"], "ensemble.csv", "t,mx,my,mz,my_stderr"),
    ];
    for (args, file, columns) in cases {
        let dir = tempfile::tempdir().unwrap();
        run(args, dir.path());
        let (head, rows) = read(dir.path(), file);
        assert_eq!(rows[0], columns, "{args:?}");
        assert!(rows.len() > 1, "{args:?}");
        assert_eq!(head["schema_version"], 1);
    }
}

#[test]
fn liouvillian_methods_agree_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    run(&["liouvillian", "--spin", "2", "--method", "both", "--omega-z", "0.5"], dir.path());
    let (head, rows) = read(dir.path(), "liouvillian.csv");
    let gaps = &head["meta"]["gaps"];
    let a = gaps["dense_ed:2"]["gap"].as_f64().unwrap();
    let b = gaps["arnoldi:2"]["gap"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    let lead: Vec<f64> = rows[1..]
        .iter()
        .filter(|r| r.ends_with("dense_ed"))
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lead.len(), 25);
    assert!((lead[0] - 1.0).abs() < 1e-8);
}

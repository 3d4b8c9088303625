use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GOLDEN: &str = r#"
[subshift]
k = 2
a = [[1, 1], [1, 0]]
"#;

const GOLDEN_ROOF: &str = r#"
seed = 3

[subshift]
k = 2
a = [[1, 1], [1, 0]]

[potentials]
tau = { symbolwise = [1.0, 1.6180339887] }
g = { indicator = "1" }

[params]
depth = 3
b = [5.0, 20.0]

[params.decay]
m_max = 12

[params.orbits]
horizon = 14.0
t = [10.0, 12.0, 14.0]
"#;

fn ruelle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruelle")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_in(dir: &Path, cmd: &str, config: &str, out: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, config);
    let out = dir.join(out);
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ruelle(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pressure_of_the_golden_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "pressure", GOLDEN, "out", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0.4812118251");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/pressure.json")).unwrap()).unwrap();
    assert!((report["pressure"].as_f64().unwrap() - 1.618_033_988_749_895f64.ln()).abs() < 1e-12);
    assert!(tmp.path().join("out/manifest.toml").exists());
}

#[test]
fn zn_gives_lucas_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{GOLDEN}\n[params]\nn_max = 4\n");
    let o = run_in(tmp.path(), "zn", &cfg, "out", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(tmp.path().join("out/zn.csv")).unwrap();
    let values: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(values, vec![1.0, 3.0, 4.0, 7.0]);
}

#[test]
fn zero_row_matrix_is_rejected_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[subshift]\nk = 2\na = [[1, 1], [0, 0]]\n";
    let o = run_in(tmp.path(), "pressure", cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(11));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn malformed_fields_report_their_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (format!("{GOLDEN}\n[params]\ndepth = \"deep\"\n"), "params.depth"),
        (format!("{GOLDEN}\n[params.orbits]\nhorizn = 3.0\n"), "params.orbits"),
        (format!("{GOLDEN}\n[potentials]\ntau = {{ symbolwise = [1.0, \"x\"] }}\n"), "potentials.tau"),
        ("[subshift]\nk = 2\n".to_string(), "subshift"),
        (format!("{GOLDEN}\n[params.orbits]\nwindow = {{ kind = \"gaussian\", c = 1.0 }}\n"), "params.orbits.window"),
    ];
    for (cfg, path) in cases {
        let o = run_in(tmp.path(), "pressure", &cfg, "out", &[]);
        assert_eq!(o.status.code(), Some(3), "{cfg}: {}", stderr(&o));
        assert!(stderr(&o).contains(path), "expected `{path}` in: {}", stderr(&o));
        assert!(!tmp.path().join("out").exists());
    }
}

#[test]
fn module_errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let roof = format!("{GOLDEN}\n[potentials]\ntau = {{ symbolwise = [1.0, -1.0] }}\n");
    assert_eq!(run_in(tmp.path(), "pressure", &roof, "out", &[]).status.code(), Some(13));
    let periodic = "[subshift]\nk = 2\na = [[0, 1], [1, 0]]\n";
    assert_eq!(run_in(tmp.path(), "pressure", periodic, "out", &[]).status.code(), Some(12));
    let budget = format!("{GOLDEN}\n[params.orbits]\nhorizon = 40.0\nbudget = 1000\n");
    assert_eq!(run_in(tmp.path(), "orbits", &budget, "out", &[]).status.code(), Some(22));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["decay", "orbits", "hannay-ozorio", "ruelle-check"] {
        let a = run_in(tmp.path(), cmd, GOLDEN_ROOF, &format!("{cmd}-a"), &["--threads", "2"]);
        let b = run_in(tmp.path(), cmd, GOLDEN_ROOF, &format!("{cmd}-b"), &[]);
        assert!(a.status.success() && b.status.success(), "{cmd}: {}{}", stderr(&a), stderr(&b));
        for entry in fs::read_dir(tmp.path().join(format!("{cmd}-a"))).unwrap() {
            let name = entry.unwrap().file_name();
            if name == "manifest.toml" {
                continue;
            }
            let left = fs::read(tmp.path().join(format!("{cmd}-a")).join(&name)).unwrap();
            let right = fs::read(tmp.path().join(format!("{cmd}-b")).join(&name)).unwrap();
            assert!(left == right, "{cmd}: {name:?} differs");
        }
    }
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "pi-f", GOLDEN_ROOF, "first", &["--seed", "11", "--depth", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(tmp.path().join("first/manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 11") && manifest.contains("depth = 2"));
    fs::write(tmp.path().join("run.toml"), "garbage").unwrap();
    let again = tmp.path().join("second");
    let r = ruelle(&["rerun", "--manifest", tmp.path().join("first/manifest.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    for name in ["pi_f.csv", "pi_f.json"] {
        assert_eq!(fs::read(tmp.path().join("first").join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn tampered_manifest_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(tmp.path(), "solve-pf", GOLDEN_ROOF, "first", &[]).status.success());
    let path = tmp.path().join("first/manifest.toml");
    let text = fs::read_to_string(&path).unwrap().replace("seed = 3", "seed = 4");
    fs::write(&path, text).unwrap();
    let r = ruelle(&["rerun", "--manifest", path.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn exponential_windows_are_reported_out_of_reach() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{GOLDEN_ROOF}window = {{ kind = \"exponential\", c = 1.0, eps = 0.5 }}\n");
    let o = run_in(tmp.path(), "hannay-ozorio", &cfg, "out", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("out of statistical reach"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/hannay_ozorio.json")).unwrap()).unwrap();
    assert_eq!(report["out_of_reach"], serde_json::Value::Bool(true));
}

#[test]
fn every_subcommand_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cmds = [
        "pressure", "rpf", "solve-pf", "solve-sz", "zn", "zeta", "ruelle-check", "eta-g", "residue", "orbits", "pi-f",
        "hannay-ozorio", "decay", "ly-check", "lattice-test",
    ];
    for cmd in cmds {
        let o = run_in(tmp.path(), cmd, GOLDEN_ROOF, cmd, &[]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        let manifest = fs::read_to_string(tmp.path().join(cmd).join("manifest.toml")).unwrap();
        assert!(manifest.contains(&format!("command = \"{cmd}\"")));
        assert!(manifest.contains("config_sha256"));
    }
}

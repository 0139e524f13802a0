use std::path::Path;
use std::process::{Command, Output};

fn supercool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercool")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sidecar(path: &Path) -> serde_json::Value {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    serde_json::from_str(&std::fs::read_to_string(name).unwrap()).unwrap()
}

#[test]
fn planar_example_and_freeze() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(dir.path(), &["example", "planar", "--t0", "0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let field = dir.path().join("planar.sstf");
    assert!(field.exists());
    let side = sidecar(&field);
    assert_eq!(side["command"], "example planar");
    assert_eq!(side["config"]["example"]["t0"], "0.25");
    // defaults are echoed too
    assert_eq!(side["config"]["solver"]["omega"], "1.1");

    let o = supercool(dir.path(), &["analyze", "freeze", field.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("planar.freeze.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,s,never_freezes,frozen_from_start"));
    let s: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(s.len(), 257);
    assert!(s.iter().all(|v| *v == "2.5000000000000000e-1"));
    assert!(dir.path().join("planar.freeze.csv.json").exists());
}

#[test]
fn unknown_example_lists_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(dir.path(), &["example", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for name in ["planar", "tychonoff", "radial", "glued"] {
        assert!(e.contains(name), "{e}");
    }
}

#[test]
fn unknown_analysis_and_bad_config_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(dir.path(), &["analyze", "spectrum", "nothing.sstf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nucleation"));

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[grid]\nwidth = 2\n").unwrap();
    let o = supercool(dir.path(), &["example", "planar", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key `width`"));
}

#[test]
fn config_file_drives_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[grid]\nn = 33\nnt = 11\nt_hi = 0.5\n\n[example]\nt0 = 0.2\n").unwrap();
    let o = supercool(dir.path(), &["example", "planar", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = sidecar(&dir.path().join("planar.sstf"));
    assert_eq!(side["report"]["grid"]["shape"], serde_json::json!([33]));
    assert_eq!(side["config"]["grid"]["lo"], "auto");
    assert_eq!(side["report"]["t0"], 0.2);
}

#[test]
fn constant_data_extinguish_at_their_height() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(dir.path(), &["solve", "--expr", "0.25", "--set", "grid.t_hi=0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = sidecar(&dir.path().join("solve.sstf"));
    let t = side["report"]["run"]["extinction_time"].as_f64().unwrap();
    let dt = 0.3 / 200.0;
    assert!((t - 0.25).abs() <= dt, "{t}");
    assert!(stdout(&o).contains("extinction time"));
}

#[test]
fn validation_failure_and_force() {
    let dir = tempfile::tempdir().unwrap();
    // Δw0 = 6 exceeds the bound Δw0 <= 1
    let o = supercool(dir.path(), &["solve", "--expr", "1 + 3*x^2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("\"max_excess\": 5.0"), "{}", stderr(&o));
    assert!(!dir.path().join("solve.sstf").exists());

    let o = supercool(dir.path(), &["solve", "--expr", "1 + 3*x^2", "--force"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = sidecar(&dir.path().join("solve.sstf"));
    assert_eq!(side["report"]["forced"], true);
    assert_eq!(side["report"]["run"]["validation"]["pass"], false);
}

#[test]
fn nonconvergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(
        dir.path(),
        &[
            "solve",
            "--expr",
            "0.02*max(1 - 4*x^2, 0)^2",
            "--set",
            "solver.max_iter=1",
            "--set",
            "solver.tol=1e-300",
            "--set",
            "grid.t_hi=0.01",
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(dir.path().join("solve.sstf").exists());
}

#[test]
fn w0_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let w0 = dir.path().join("w0.txt");
    std::fs::write(&w0, "0.1, 0.1, 0.1\n0.1 0.1").unwrap();
    let o = supercool(dir.path(), &["solve", "--w0", w0.to_str().unwrap(), "--set", "grid.n=5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(sidecar(&dir.path().join("solve.sstf"))["inputs"], serde_json::json!(["w0.txt"]));
    let o = supercool(dir.path(), &["solve", "--w0", w0.to_str().unwrap(), "--set", "grid.n=6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn radial_frequency_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercool(dir.path(), &["example", "radial", "--d", "2", "--amp", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let field = dir.path().join("radial.sstf");
    let side = sidecar(&field);
    assert!(side["report"]["extinction_time"].as_f64().unwrap() > 0.0);
    assert_eq!(side["report"]["radially_monotone"], true);

    let f = field.to_str().unwrap();
    let o = supercool(dir.path(), &["analyze", "frequency", f, "--center", "auto-extinction", "--gamma", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lambda = sidecar(&dir.path().join("radial.frequency.csv"))["report"]["lambda"].as_f64().unwrap();
    assert!((1.8..=2.3).contains(&lambda), "{lambda}");
    let csv = std::fs::read_to_string(dir.path().join("radial.frequency.csv")).unwrap();
    assert!(csv.starts_with("r,H,D,phi,phi_gamma,err_H,err_D\n"));

    let o = supercool(dir.path(), &["analyze", "classify", f, "--all-extinction-maxima"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("radial.classify.json")).unwrap()).unwrap();
    assert_eq!(recs.as_array().unwrap().len(), 1);
    assert_eq!(recs[0]["verdict"], "singular");
    assert_eq!(recs[0]["frequency"], serde_json::json!({ "finite": 2 }));

    let o = supercool(dir.path(), &["report", f]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("singular dynamic 1"), "{}", stdout(&o));

    // a point outside the domain is a module error
    let o = supercool(dir.path(), &["analyze", "frequency", f, "--center", "5,5,0.01"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let cfg = ["--set", "grid.dim=2", "--set", "grid.n=33", "--set", "grid.nt=41"];
        let mut args = vec!["solve", "--expr", "0.01*max(1 - 4*r^2, 0)^2"];
        args.extend(cfg);
        assert!(supercool(dir, &args).status.success());
        let f = dir.join("solve.sstf");
        for kind in ["freeze", "dimension", "jumps", "nucleation"] {
            let o = supercool(dir, &["analyze", kind, f.to_str().unwrap(), "--seed", "7"]);
            assert!(o.status.success(), "{kind}: {}", stderr(&o));
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

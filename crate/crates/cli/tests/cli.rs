use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn esqpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esqpt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn decohere_writes_signal_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = esqpt(&[
        "decohere", "--alpha", "0.5", "--lambda", "0.3", "--n", "100", "--tmax", "10", "--grid",
        "51", "--out", out,
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 52);
    let json = fs::read_to_string(dir.path().join("signal.json")).unwrap();
    assert!(json.contains("\"method\": \"exact\"") || json.contains("\"method\":\"exact\""));
    let m = manifest(dir.path());
    assert_eq!(m["command"], "decohere");
    assert_eq!(m["parameters"]["settings"]["N"], 100);
    assert!(
        m["parameters"]["results"]["revival"]["value"]
            .as_f64()
            .unwrap()
            > 0.9
    );
    assert!(m["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "alpha = 0.4\nomega = 0.0\nlambda = 1.0\nN = 60\nmethod = \"tda2\"\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let r = esqpt(&[
        "decohere",
        "--alpha",
        "0.9",
        "--n",
        "500",
        "--tmax",
        "5",
        "--grid",
        "11",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let s = &manifest(&out)["parameters"]["settings"];
    assert_eq!(s["alpha"], 0.4);
    assert_eq!(s["N"], 60);
    assert_eq!(s["method"], "tda2");
    assert!(fs::read_to_string(out.join("signal.json"))
        .unwrap()
        .contains("tda2"));
}

#[test]
fn invalid_specs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        code(&esqpt(&["decohere", "--alpha", "1.5", "--out", out])),
        2
    );
    assert_eq!(
        code(&esqpt(&["decohere", "--method", "rpa", "--out", out])),
        2
    );
    assert_eq!(
        code(&esqpt(&[
            "rmax-sweep",
            "--lambdas",
            "1:0:0.1",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&esqpt(&[
            "scaling",
            "--sizes",
            "100,200,300,400",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&esqpt(&["levels", "--bogus"])), 2);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "temperature = 3\n").unwrap();
    assert_eq!(
        code(&esqpt(&[
            "levels",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out
        ])),
        2
    );
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn numerical_failure_exits_with_three() {
    // a window far shorter than the collapse holds no revival to fit
    let dir = tempfile::tempdir().unwrap();
    let r = esqpt(&[
        "scaling",
        "--alpha",
        "0.4",
        "--sizes",
        "100,200,400,1000",
        "--tmax",
        "0.05",
        "--grid",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn every_subcommand_produces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 8] = [
        (&["levels", "--n", "20", "--grid", "5"], "levels.csv"),
        (
            &["dos", "--n", "200", "--bins", "40", "--grid", "256"],
            "dos.csv",
        ),
        (&["surface", "--omega", "0.5", "--grid", "7"], "surface.csv"),
        (
            &["decohere", "--n", "50", "--tmax", "5", "--grid", "11"],
            "signal.csv",
        ),
        (
            &["rmax-sweep", "--n", "60", "--lambdas", "0.5:1.0:0.25"],
            "rmax_sweep.csv",
        ),
        (
            &[
                "scaling",
                "--alpha",
                "0.4",
                "--sizes",
                "20,40,80,200",
                "--method",
                "tda2",
            ],
            "scaling.csv",
        ),
        (
            &["phase-diagram", "--omega", "1.0", "--grid", "3"],
            "phase_diagram.csv",
        ),
        (
            &[
                "tda-compare",
                "--n",
                "80",
                "--lambda",
                "0.5",
                "--tmax",
                "5",
                "--grid",
                "11",
            ],
            "tda_compare.csv",
        ),
    ];
    for (args, file) in cases {
        let out = dir.path().join(args[0]);
        let mut full = args.to_vec();
        full.extend(["--out", out.to_str().unwrap()]);
        let r = esqpt(&full);
        assert_eq!(
            code(&r),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&r.stderr)
        );
        let csv = fs::read_to_string(out.join(file)).unwrap();
        assert!(csv.lines().count() >= 2, "{file}");
        assert_eq!(manifest(&out)["command"], args[0]);
    }
}

#[test]
fn cache_reused_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = |o: &str| {
        vec![
            "rmax-sweep".to_string(),
            "--n".into(),
            "80".into(),
            "--lambdas".into(),
            "0.6:1.0:0.2".into(),
            "--cache".into(),
            cache.to_str().unwrap().into(),
            "--out".into(),
            dir.path().join(o).to_str().unwrap().into(),
        ]
    };
    let run = |o| {
        let a = args(o);
        esqpt(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(code(&run("a")), 0);
    let entries = walk(&cache);
    assert_eq!(entries, 3);
    assert_eq!(code(&run("b")), 0);
    assert_eq!(walk(&cache), 3);
    assert_eq!(
        fs::read_to_string(dir.path().join("a/rmax_sweep.csv")).unwrap(),
        fs::read_to_string(dir.path().join("b/rmax_sweep.csv")).unwrap()
    );
}

fn walk(p: &Path) -> usize {
    fs::read_dir(p)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(&path)
            } else {
                1
            }
        })
        .sum()
}

#[test]
fn sequential_flag_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "rmax-sweep",
        "--alpha",
        "0.4",
        "--n",
        "100",
        "--lambdas",
        "0.8:1.2:0.1",
    ];
    let a = dir.path().join("par");
    let b = dir.path().join("seq");
    let mut x = base.to_vec();
    x.extend(["--out", a.to_str().unwrap()]);
    let mut y = base.to_vec();
    y.extend(["--sequential", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&esqpt(&x)), 0);
    assert_eq!(code(&esqpt(&y)), 0);
    assert_eq!(
        fs::read_to_string(a.join("rmax_sweep.csv")).unwrap(),
        fs::read_to_string(b.join("rmax_sweep.csv")).unwrap()
    );
    assert_eq!(manifest(&b)["parallel"], false);
}

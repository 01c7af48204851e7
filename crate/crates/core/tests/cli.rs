use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_snn-energy"));
    c.env_remove("SNN_ENERGY_TECH");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn estimate_gsc_fnn() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gsc.csv");
    let gsc = config("gsc_cnn.json");
    let tech = config("tech_45nm.json");
    let o = run(&[
        "estimate",
        "--arch",
        gsc.to_str().unwrap(),
        "--mode",
        "fnn",
        "--tech",
        tech.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    let order: Vec<usize> = [
        "Potentials",
        "Weights",
        "Bias",
        "In/Out",
        "Synaptic Op.",
        "Addressing",
        "Total",
    ]
    .iter()
    .map(|k| table.find(k).unwrap())
    .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("layer,mode,category,count,mem_bytes,energy_nj\n"));
    let total: f64 = csv
        .lines()
        .find(|l| l.starts_with("TOTAL,fnn,total,"))
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((3.32e4 / 3.0..=3.32e4 * 3.0).contains(&total), "{total}");
}

#[test]
fn snn_without_activity_is_usage_error() {
    let gsc = config("gsc_cnn.json");
    let o = run(&["estimate", "--arch", gsc.to_str().unwrap(), "--mode", "snn"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn zero_rate_silences_hidden_layers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let gsc = config("gsc_cnn.json");
    let o = run(&[
        "estimate",
        "--arch",
        gsc.to_str().unwrap(),
        "--mode",
        "snn",
        "--spike-rate",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out).unwrap();
    for layer in ["conv2", "conv3", "conv4"] {
        let row = csv
            .lines()
            .find(|l| l.starts_with(&format!("{layer},snn,weights,")))
            .unwrap();
        assert!(row.contains(",0.00000e0,"), "{row}");
    }
}

#[test]
fn compare_prints_ratio() {
    let gsc = config("gsc_cnn.json");
    let o = run(&[
        "compare",
        "--arch",
        gsc.to_str().unwrap(),
        "--spike-rate",
        "0.14",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("E_FNN / E_SNN = 7.0903"));
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--seed", "3", "--cases", "50"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["validate", "--strict-paper", "--cases", "50"]);
    assert_eq!(code(&o), 7);
    assert!(stdout(&o).contains("note:"));
    assert_eq!(code(&run(&["validate", "--cases", "0"])), 2);
}

#[test]
fn sweep_rows_and_ranges() {
    let gsc = config("gsc_cnn.json");
    let g = gsc.to_str().unwrap();
    let o = run(&[
        "sweep",
        "--arch",
        g,
        "--param",
        "spike-rate",
        "--from",
        "0",
        "--to",
        "0",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = run(&[
        "sweep",
        "--arch",
        g,
        "--param",
        "spike-rate",
        "--from",
        "1",
        "--to",
        "0",
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&[
        "sweep",
        "--arch",
        g,
        "--param",
        "spike-rate",
        "--from",
        "0",
        "--to",
        "2",
        "--steps",
        "5",
    ]);
    assert!(stdout(&o).contains(",crossover"));
    let o = run(&[
        "sweep",
        "--arch",
        g,
        "--param",
        "timesteps",
        "--from",
        "1",
        "--to",
        "4",
    ]);
    assert_eq!(code(&o), 2, "timestep sweeps need a rate");
}

#[test]
fn error_categories_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        code(&run(&[
            "estimate",
            "--arch",
            missing.to_str().unwrap(),
            "--mode",
            "fnn"
        ])),
        3
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        code(&run(&[
            "estimate",
            "--arch",
            bad.to_str().unwrap(),
            "--mode",
            "fnn"
        ])),
        4
    );

    let pool = dir.path().join("pool.json");
    fs::write(
        &pool,
        r#"{"name":"p","mode":"fnn","neuron":"relu","input":{"c":1,"h":4,"w":4},"layers":[{"kind":"maxpool"}]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&run(&[
            "estimate",
            "--arch",
            pool.to_str().unwrap(),
            "--mode",
            "fnn"
        ])),
        4
    );

    let trace = dir.path().join("trace.json");
    fs::write(
        &trace,
        r#"{"network":"gsc_cnn","theta_in":1,"theta":[1,2]}"#,
    )
    .unwrap();
    let gsc = config("gsc_cnn.json");
    let o = run(&[
        "estimate",
        "--arch",
        gsc.to_str().unwrap(),
        "--mode",
        "snn",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 5);

    assert_eq!(code(&run(&["estimate", "--bogus"])), 2);
}

#[test]
fn trace_file_drives_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    fs::write(
        &trace,
        r#"{"network":"gsc_cnn","theta_in":480,"theta":[100,100,50,10]}"#,
    )
    .unwrap();
    let gsc = config("gsc_cnn.json");
    let o = run(&[
        "estimate",
        "--arch",
        gsc.to_str().unwrap(),
        "--mode",
        "snn",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tech_profile_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let tech = dir.path().join("tech.json");
    fs::write(
        &tech,
        r#"{"e_add_pj":0.1,"e_mul_pj":3.1,"word_bits":32,"sram_points":[[8192,10]]}"#,
    )
    .unwrap();
    let gsc = config("gsc_cnn.json");
    let o = bin()
        .env("SNN_ENERGY_TECH", &tech)
        .args(["estimate", "--arch", gsc.to_str().unwrap(), "--mode", "fnn"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 5);
}

#[test]
fn help_documents_exit_codes() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let h = stdout(&o);
    for c in [
        "2  usage",
        "3  I/O",
        "4  parse",
        "5  validation",
        "6  estimation",
        "7  validate",
    ] {
        assert!(h.contains(c), "{c}");
    }
}

#[test]
fn csv_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let ncars = config("ncars_tinyvgg11.json");
    let mut outs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("{i}.csv"));
        let o = run(&[
            "compare",
            "--arch",
            ncars.to_str().unwrap(),
            "--spike-rate",
            "0.08",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outs.push(fs::read(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

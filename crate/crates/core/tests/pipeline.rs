use clap::Parser;
use qburgers::ansatz::{build_ansatz, AnsatzSpec, Head, Variant};
use qburgers::cli::{execute, load_config, Cli, EXIT_CONFIG, EXIT_OK, EXIT_THRESHOLD};
use qburgers::experiment::{gatecount_rows, run_burgers, ExperimentConfig, ExperimentKind};
use qburgers::hadamard::{build_gterm_circuit, estimate_circuit, EstimatorMode, GTermKind};
use qburgers::noise::{builtin_profile, model_from_calibration, Recipe};
use qburgers::transpile::Basis;
use std::fs;
use std::path::Path;
use std::process::Command;

fn cli_run(args: &[&str]) -> qburgers::cli::RunRecord {
    let cli = Cli::try_parse_from(std::iter::once("qburgers").chain(args.iter().copied())).unwrap();
    let (cfg, table) = load_config(&cli.command).unwrap();
    execute(&cli.command, &cfg, &table).unwrap()
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("in.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn shot_run_csvs_are_byte_identical_and_replayable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\nsteps = 2\n[estimator]\nmode = \"shots\"\nshots = 5000\n[sweep]\nsweeps = 2\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    cli_run(&["run", "--config", &cfg, "--seed", "11", "--out", a.to_str().unwrap()]);
    cli_run(&["run", "--config", &cfg, "--seed", "11", "--out", b.to_str().unwrap()]);
    let first = csv_bytes(&a);
    assert_eq!(
        first.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        ["cost_trace.csv", "fields.csv", "infidelity.csv", "params.csv"]
    );
    assert_eq!(first, csv_bytes(&b));

    // The snapshot alone reproduces the run.
    let snap = a.join("config.toml");
    cli_run(&["run", "--config", snap.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(first, csv_bytes(&c));

    let record: toml::Table = fs::read_to_string(a.join("record.toml")).unwrap().parse().unwrap();
    assert_eq!(record["seed"].as_integer(), Some(11));
    assert!(record["summary"]["max_infidelity"].as_float().unwrap() < 1e-2);
}

#[test]
fn csv_headers_are_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nsteps = 1\n[gatecount]\nn_max = 3\n");
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    cli_run(&["run", "--config", &cfg, "--out", o]);
    cli_run(&["gatecount", "--config", &cfg, "--out", o]);
    cli_run(&["classical", "--config", &cfg, "--out", o]);
    let header = |f: &str| fs::read_to_string(out.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("infidelity.csv"), "step,t,lambda,cost,infidelity,fidelity,fidelity_u0");
    assert_eq!(header("fields.csv"), "step,t,k,x,u_classical,u_vqa");
    assert_eq!(
        header("cost_trace.csv"),
        "step,iteration,sweep,param_index,lambda_value,cost,bracket"
    );
    assert_eq!(header("gatecount.csv"), "n,architecture,scheme,granularity,d,g1,g2,depth");
    assert_eq!(header("classical.csv"), "step,t,k,x,u");
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_qburgers");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let code = |args: &[&str]| Command::new(exe).args(args).output().unwrap().status.code().unwrap();

    let ok = write_config(tmp.path(), "[gatecount]\nn_max = 3\n");
    assert_eq!(code(&["gatecount", "--config", &ok, "--out", out.to_str().unwrap(), "--assert"]), EXIT_OK);

    let bad = write_config(tmp.path(), "[grid]\nn = 0\n");
    assert_eq!(code(&["run", "--config", &bad]), EXIT_CONFIG);
    let unknown = write_config(tmp.path(), "[grid]\nbogus = 1\n");
    assert_eq!(code(&["run", "--config", &unknown]), EXIT_CONFIG);
    let wrong_kind = write_config(tmp.path(), "kind = \"fit_initial\"\n");
    assert_eq!(code(&["run", "--config", &wrong_kind]), EXIT_CONFIG);

    let strict = write_config(tmp.path(), "[gatecount]\nn_max = 3\n[assert]\nmin_ratio = 100.0\n");
    let args = ["gatecount", "--config", &strict, "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), EXIT_OK);
    let mut with_assert = args.to_vec();
    with_assert.push("--assert");
    assert_eq!(code(&with_assert), EXIT_THRESHOLD);
}

#[test]
fn elide_input_file() {
    let exe = env!("CARGO_BIN_EXE_qburgers");
    let tmp = tempfile::tempdir().unwrap();
    let circuit = "qubits 3\nancilla 0\nh -> 0\nmcx 0,1 -> 2\ncry(0.3) 0 -> 1\nh -> 0\n";
    let input = tmp.path().join("c.qc");
    fs::write(&input, circuit).unwrap();
    let out = Command::new(exe)
        .args(["elide", "--input", input.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let elided = qburgers::circuit::parse_circuit(text.split("wrote").next().unwrap()).unwrap();
    // The Toffoli loses its ancilla control; the single-control rotation keeps it.
    assert_eq!(elided.gates()[1].controls, vec![1]);
    assert_eq!(elided.gates()[2].controls, vec![0]);
}

#[test]
fn two_qubit_counts_grow_with_n() {
    let mut last = [0usize; 4];
    for n in 3..=6 {
        let rows = gatecount_rows(n, Variant::CuAlt).unwrap();
        let shiftdiag: Vec<_> = rows.iter().filter(|r| r.granularity == "shiftdiag").collect();
        assert_eq!(shiftdiag.len(), 4);
        for (i, r) in shiftdiag.iter().enumerate() {
            assert!(r.g2 > last[i], "n={n} {:?} {}", r.architecture, r.scheme);
            last[i] = r.g2;
        }
        for scheme in ["conventional", "low-depth"] {
            let g2 = |b: Basis| shiftdiag.iter().find(|r| r.architecture == b && r.scheme == scheme).unwrap().g2;
            assert!(g2(Basis::Ion) < g2(Basis::Sc));
        }
    }
}

#[test]
fn zero_error_calibration_matches_exact() {
    let spec = AnsatzSpec::new(3, 3, Variant::CuAlt, Head::X).unwrap();
    let p = spec.param_count();
    let a = build_ansatz(&spec, &(0..p).map(|i| 0.3 + 0.5 * i as f64).collect::<Vec<_>>()).unwrap();
    let b = build_ansatz(&spec, &(0..p).map(|i| 1.1 - 0.4 * i as f64).collect::<Vec<_>>()).unwrap();
    for name in ["aqt-ibex", "ibm-kingston"] {
        let mut cal = builtin_profile(name).unwrap().scaled_errors(0.0);
        for q in &mut cal.qubits {
            q.p01 = 0.0;
            q.p10 = 0.0;
        }
        let mode = EstimatorMode::Noisy {
            model: model_from_calibration(&cal, Recipe::DepolOnly),
            basis: cal.basis,
            shots: None,
        };
        for kind in GTermKind::ALL {
            let c = build_gterm_circuit(kind, &a, &b).unwrap();
            let exact = estimate_circuit(&c, &EstimatorMode::Exact).unwrap();
            let noisy = estimate_circuit(&c, &mode).unwrap();
            assert!((exact - noisy).abs() <= 1e-11, "{name} {}", kind.label());
        }
    }
}

#[test]
fn stronger_noise_does_not_raise_fidelity() {
    // Exact density expectations, so the comparison is free of shot noise.
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::NoisyBurgers);
    cfg.grid.steps = 1;
    cfg.estimator.shots = 0;
    let fid = |cfg: &ExperimentConfig| 1.0 - run_burgers(cfg).unwrap().steps[1].infidelity;
    let base = fid(&cfg);
    cfg.estimator.error_scale = 3.0;
    let worse = fid(&cfg);
    assert!(worse <= base + 1e-9, "alpha=3 gave {worse}, baseline {base}");
}

//! Command-line driver: config resolution, runs, CSV emission.
//!
//! Every subcommand writes its CSVs plus `config.toml` (the fully resolved
//! config, rerunnable with `--config`) and `record.toml` (summary metrics)
//! into the output directory.

use crate::ansatz::build_ansatz;
use crate::burgers::{infidelity, FieldState};
use crate::circuit::{parse_circuit, serialize_circuit};
use crate::error::{Error, Result};
use crate::experiment::{
    aligned_norm, gatecount_rows, initial_field, resolved_table, run_burgers, run_classical, run_elide_check, run_fit,
    BurgersOutput, ExperimentConfig, ExperimentKind,
};
use crate::lowdepth::{detect_hadamard_form, elide_ancilla_controls, statevector_deviation};
use crate::transpile::Basis;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qburgers", version, about = "Low-depth Hadamard tests and variational Burgers' dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check ancilla-control elision on random Hadamard-test circuits,
    /// or elide a single circuit file.
    Elide {
        #[command(flatten)]
        common: Common,
        /// Circuit file to elide; the result is printed to stdout.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit the ansatz to the Gaussian initial field.
    Fit(Common),
    /// Noiseless (or shot-sampled) variational Burgers' run.
    Run(Common),
    /// Variational Burgers' run under a device noise profile.
    NoisyRun(Common),
    /// Gate counts of both schemes on both architectures.
    Gatecount(Common),
    /// Classical finite-difference reference only.
    Classical(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config merged over the defaults of the subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 3 when a configured threshold is missed.
    #[arg(long = "assert")]
    pub check: bool,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Elide { .. } => ExperimentKind::ElideCheck,
            Command::Fit(_) => ExperimentKind::FitInitial,
            Command::Run(_) => ExperimentKind::BurgersRun,
            Command::NoisyRun(_) => ExperimentKind::NoisyBurgers,
            Command::Gatecount(_) => ExperimentKind::GatecountSweep,
            Command::Classical(_) => ExperimentKind::Classical,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Elide { common, .. } => common,
            Command::Fit(c)
            | Command::Run(c)
            | Command::NoisyRun(c)
            | Command::Gatecount(c)
            | Command::Classical(c) => c,
        }
    }
}

/// Outcome of one subcommand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub out: PathBuf,
    pub files: Vec<String>,
    pub summary: toml::Table,
    /// Threshold violations, one message each.
    pub misses: Vec<String>,
}

/// Resolves the config for `cmd`: defaults, then the file, then flags.
pub fn load_config(cmd: &Command) -> Result<(ExperimentConfig, toml::Table)> {
    let kind = cmd.kind();
    let common = cmd.common();
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut table = resolved_table(&text, Some(kind))?;
    if let Some(seed) = common.seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Config("seed must fit in i64".into()))?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }
    if let Some(out) = &common.out {
        table.insert("out".into(), toml::Value::String(out.display().to_string()));
    }
    let cfg = ExperimentConfig::from_table(table.clone())?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config kind '{}' does not match subcommand '{}'",
            cfg.kind.label(),
            kind.label()
        )));
    }
    Ok((cfg, table))
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (cfg, table) = match load_config(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cli.command, &cfg, &table) {
        Ok(rec) => {
            for f in &rec.files {
                println!("wrote {}", rec.out.join(f).display());
            }
            if cli.command.common().check && !rec.misses.is_empty() {
                for m in &rec.misses {
                    eprintln!("threshold missed: {m}");
                }
                return EXIT_THRESHOLD;
            }
            EXIT_OK
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Executes `cmd` with a resolved config and writes all outputs.
pub fn execute(cmd: &Command, cfg: &ExperimentConfig, table: &toml::Table) -> Result<RunRecord> {
    let started = Instant::now();
    fs::create_dir_all(&cfg.out)?;
    let mut rec = RunRecord {
        out: cfg.out.clone(),
        ..RunRecord::default()
    };
    match cmd {
        Command::Elide { input: Some(path), .. } => elide_file(cfg, path, &mut rec)?,
        Command::Elide { input: None, .. } => cmd_elide(cfg, &mut rec)?,
        Command::Fit(_) => cmd_fit(cfg, &mut rec)?,
        Command::Run(_) | Command::NoisyRun(_) => cmd_burgers(cfg, &mut rec)?,
        Command::Gatecount(_) => cmd_gatecount(cfg, &mut rec)?,
        Command::Classical(_) => cmd_classical(cfg, &mut rec)?,
    }
    fs::write(cfg.out.join("config.toml"), toml::to_string(table).map_err(|e| Error::Io(e.to_string()))?)?;
    rec.files.push("config.toml".into());
    write_record(cfg, &rec, started.elapsed().as_secs_f64())?;
    rec.files.push("record.toml".into());
    Ok(rec)
}

fn write_record(cfg: &ExperimentConfig, rec: &RunRecord, wall: f64) -> Result<()> {
    let mut t = toml::Table::new();
    t.insert("kind".into(), cfg.kind.label().into());
    t.insert("seed".into(), toml::Value::Integer(cfg.seed as i64));
    t.insert("config".into(), "config.toml".into());
    t.insert(
        "files".into(),
        toml::Value::Array(rec.files.iter().map(|f| f.as_str().into()).collect()),
    );
    t.insert("wall_time_s".into(), wall.into());
    t.insert("summary".into(), toml::Value::Table(rec.summary.clone()));
    t.insert(
        "threshold_misses".into(),
        toml::Value::Array(rec.misses.iter().map(|m| m.as_str().into()).collect()),
    );
    let text = toml::to_string(&t).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(cfg.out.join("record.toml"), text)?;
    Ok(())
}

struct Csv {
    w: csv::Writer<fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[&str], rec: &mut RunRecord) -> Result<Self> {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        w.write_record(header)?;
        rec.files.push(name.into());
        Ok(Csv { w })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.w.write_record(fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

macro_rules! cells {
    ($($x:expr),* $(,)?) => { [$($x.to_string()),*] };
}

fn check_max(rec: &mut RunRecord, what: &str, value: f64, bound: Option<f64>) {
    if let Some(b) = bound {
        if !(value <= b) {
            rec.misses.push(format!("{what} = {value:e} exceeds {b:e}"));
        }
    }
}

fn check_min(rec: &mut RunRecord, what: &str, value: f64, bound: Option<f64>) {
    if let Some(b) = bound {
        if !(value >= b) {
            rec.misses.push(format!("{what} = {value:e} below {b:e}"));
        }
    }
}

fn cmd_elide(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let rows = run_elide_check(cfg)?;
    let mut csv = Csv::create(
        &cfg.out,
        "elide.csv",
        &["index", "n", "gates", "controls_before", "controls_after", "max_deviation"],
        rec,
    )?;
    for r in &rows {
        csv.row(&cells![r.index, r.n, r.gates, r.multi_before, r.multi_after, r.max_dev])?;
    }
    csv.finish()?;
    let worst = rows.iter().map(|r| r.max_dev).fold(0.0, f64::max);
    let removed: usize = rows.iter().map(|r| r.multi_before - r.multi_after).sum();
    rec.summary.insert("circuits".into(), (rows.len() as i64).into());
    rec.summary.insert("max_deviation".into(), worst.into());
    rec.summary.insert("controls_removed".into(), (removed as i64).into());
    check_max(rec, "max_deviation", worst, cfg.thresholds.max_deviation);
    Ok(())
}

fn elide_file(cfg: &ExperimentConfig, path: &Path, rec: &mut RunRecord) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let c = parse_circuit(&text)?;
    let reduced = elide_ancilla_controls(&detect_hadamard_form(&c)?);
    let dev = statevector_deviation(&c, &reduced)?;
    let out = serialize_circuit(&reduced);
    print!("{out}");
    fs::write(cfg.out.join("elided.qc"), &out)?;
    rec.files.push("elided.qc".into());
    rec.summary.insert("max_deviation".into(), dev.into());
    check_max(rec, "max_deviation", dev, cfg.thresholds.max_deviation);
    Ok(())
}

fn cmd_fit(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let (grid, _, psi) = initial_field(cfg)?;
    let fit = run_fit(cfg)?;
    let spec = cfg.ansatz_spec()?;
    let fitted = FieldState::from_circuit(1.0, build_ansatz(&spec, &fit.params)?)?.psi;
    let sign = aligned_norm(1.0, &fitted, &psi);
    let mut csv = Csv::create(&cfg.out, "fit_state.csv", &["k", "x", "target", "fitted"], rec)?;
    for (k, (t, f)) in psi.iter().zip(&fitted).enumerate() {
        csv.row(&cells![k, grid.x(k), t, sign * f])?;
    }
    csv.finish()?;
    write_params(&cfg.out, "fit_params.csv", std::iter::once((0, fit.params.as_slice())), rec)?;
    rec.summary.insert("infidelity".into(), fit.infidelity.into());
    rec.summary.insert("restarts_used".into(), (fit.restarts_used as i64).into());
    check_max(rec, "fit infidelity", fit.infidelity, cfg.thresholds.max_infidelity);
    Ok(())
}

fn write_params<'a>(
    dir: &Path,
    name: &str,
    sets: impl Iterator<Item = (usize, &'a [f64])>,
    rec: &mut RunRecord,
) -> Result<()> {
    let mut csv = Csv::create(dir, name, &["step", "param_index", "value"], rec)?;
    for (step, p) in sets {
        for (j, v) in p.iter().enumerate() {
            csv.row(&cells![step, j, v])?;
        }
    }
    csv.finish()
}

/// Writes the Burgers CSVs: fidelity series, field snapshots, cost traces
/// and parameters.
pub fn write_burgers_outputs(dir: &Path, out: &BurgersOutput, rec: &mut RunRecord) -> Result<()> {
    let mut csv = Csv::create(
        dir,
        "infidelity.csv",
        &["step", "t", "lambda", "cost", "infidelity", "fidelity", "fidelity_u0"],
        rec,
    )?;
    let u0 = &out.steps[0].u_classical;
    for s in &out.steps {
        let base = 1.0 - infidelity(u0, &s.u_classical)?;
        csv.row(&cells![s.step, s.t, s.lambda, s.cost, s.infidelity, 1.0 - s.infidelity, base])?;
    }
    csv.finish()?;

    let mut csv = Csv::create(dir, "fields.csv", &["step", "t", "k", "x", "u_classical", "u_vqa"], rec)?;
    for s in &out.steps {
        for k in 0..out.grid.points() {
            csv.row(&cells![s.step, s.t, k, out.grid.x(k), s.u_classical[k], s.u_vqa[k]])?;
        }
    }
    csv.finish()?;

    let mut csv = Csv::create(
        dir,
        "cost_trace.csv",
        &["step", "iteration", "sweep", "param_index", "lambda_value", "cost", "bracket"],
        rec,
    )?;
    let mut iteration = 0usize;
    let mut last_step = 0usize;
    for (step, row) in &out.traces {
        if *step != last_step {
            iteration = 0;
            last_step = *step;
        }
        csv.row(&cells![step, iteration, row.sweep, row.param, row.value, row.cost, row.bracket])?;
        iteration += 1;
    }
    csv.finish()?;

    write_params(dir, "params.csv", out.steps.iter().map(|s| (s.step, s.params.as_slice())), rec)
}

fn cmd_burgers(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let out = run_burgers(cfg)?;
    write_burgers_outputs(&cfg.out, &out, rec)?;
    let last = out.steps.last().expect("step 0 always present");
    rec.summary.insert("fit_infidelity".into(), out.fit.infidelity.into());
    rec.summary.insert("max_infidelity".into(), out.max_infidelity().into());
    rec.summary.insert("final_infidelity".into(), last.infidelity.into());
    rec.summary.insert("final_fidelity".into(), (1.0 - last.infidelity).into());
    rec.summary.insert("circuit_evaluations".into(), (out.circuit_evaluations as i64).into());
    if let Some(p) = &cfg.estimator.profile {
        rec.summary.insert("profile".into(), p.as_str().into());
    }
    check_max(rec, "max infidelity", out.max_infidelity(), cfg.thresholds.max_infidelity);
    check_min(rec, "final fidelity", 1.0 - last.infidelity, cfg.thresholds.min_fidelity);
    check_max(rec, "final fidelity", 1.0 - last.infidelity, cfg.thresholds.max_fidelity);
    Ok(())
}

fn cmd_gatecount(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let g = &cfg.gatecount;
    let mut csv = Csv::create(
        &cfg.out,
        "gatecount.csv",
        &["n", "architecture", "scheme", "granularity", "d", "g1", "g2", "depth"],
        rec,
    )?;
    let mut worst_ratio = f64::INFINITY;
    for n in g.n_min..=g.n_max {
        let rows = gatecount_rows(n, g.variant)?;
        for r in &rows {
            csv.row(&cells![r.n, r.architecture.label(), r.scheme, r.granularity, r.d, r.g1, r.g2, r.depth])?;
        }
        let pick = |scheme: &str| {
            rows.iter()
                .find(|r| r.architecture == Basis::Ion && r.scheme == scheme && r.granularity == "shiftdiag")
                .map(|r| r.g2 as f64)
                .expect("both schemes are counted")
        };
        worst_ratio = worst_ratio.min(pick("conventional") / pick("low-depth"));
    }
    csv.finish()?;
    rec.summary.insert("min_ion_g2_ratio".into(), worst_ratio.into());
    check_min(rec, "ION conventional/low-depth g2 ratio", worst_ratio, cfg.thresholds.min_ratio);
    Ok(())
}

fn cmd_classical(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let (grid, fields) = run_classical(cfg)?;
    let mut csv = Csv::create(&cfg.out, "classical.csv", &["step", "t", "k", "x", "u"], rec)?;
    for (step, u) in fields.iter().enumerate() {
        for (k, v) in u.iter().enumerate() {
            csv.row(&cells![step, grid.tau * step as f64, k, grid.x(k), v])?;
        }
    }
    csv.finish()?;
    rec.summary.insert("steps".into(), (cfg.grid.steps as i64).into());
    Ok(())
}

//! Experiment configuration and runners shared by the CLI and the tests.
//!
//! A config is TOML. Each experiment kind has a default table (see
//! [`default_config_text`]); the user's file is merged over it key by key.

use crate::ansatz::{build_ansatz, prepared_state, build_baseline, AnsatzSpec, BaselineSpec, Head, Variant};
use crate::burgers::{classical_step, infidelity, initial_condition_gaussian, BurgersGrid, Estimator, FieldState};
use crate::circuit::random::random_hadamard_circuit;
use crate::error::{Error, Result};
use crate::hadamard::{build_gterm_circuit_with, BuildOptions, EstimatorMode, GTermKind};
use crate::lowdepth::{detect_hadamard_form, elide_ancilla_controls, statevector_deviation};
use crate::noise::{builtin_profile, model_from_calibration, DeviceCalibration, Recipe};
use crate::sgeo::{fit_initial_state, optimize_step, FitConfig, FitResult, SweepConfig, TraceRow};
use crate::sim::ShotConfig;
use crate::transpile::{count_report, Basis};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ElideCheck,
    FitInitial,
    BurgersRun,
    GatecountSweep,
    NoisyBurgers,
    Classical,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::ElideCheck => "elide_check",
            ExperimentKind::FitInitial => "fit_initial",
            ExperimentKind::BurgersRun => "burgers_run",
            ExperimentKind::GatecountSweep => "gatecount_sweep",
            ExperimentKind::NoisyBurgers => "noisy_burgers",
            ExperimentKind::Classical => "classical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub nu: f64,
    /// Fixed time step; when absent `tau = tau_over_dx · δx`.
    pub tau: Option<f64>,
    pub tau_over_dx: f64,
    pub steps: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<BurgersGrid> {
        let dx = (self.b - self.a) / (1usize << self.n.min(30)) as f64;
        BurgersGrid::new(self.a, self.b, self.n, self.tau.unwrap_or(self.tau_over_dx * dx), self.nu)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub sigma: f64,
    /// Defaults to the domain midpoint.
    pub center: Option<f64>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub d: usize,
    pub variant: Variant,
    pub head: Head,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Exact,
    Shots,
    Noisy,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mode: ModeName,
    /// Shots per circuit; 0 means the exact expectation (noisy mode only).
    pub shots: u64,
    pub profile: Option<String>,
    /// Calibration CSV overriding the built-in profile of the same name.
    pub calibration_csv: Option<PathBuf>,
    pub recipe: Recipe,
    /// Multiplies every gate error of the profile.
    pub error_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatecountConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElideConfig {
    pub circuits: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub body_gates: usize,
}

/// Thresholds checked by `--assert`. Absent entries are not checked.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertConfig {
    pub max_infidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub max_fidelity: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub ansatz: AnsatzConfig,
    pub sweep: SweepConfig,
    pub fit: FitConfig,
    pub estimator: EstimatorConfig,
    pub gatecount: GatecountConfig,
    pub elide: ElideConfig,
    #[serde(default, rename = "assert")]
    pub thresholds: AssertConfig,
}

const COMMON_DEFAULTS: &str = r#"
seed = 0
out = "out"

[grid]
a = 0.0
b = 2.0
n = 3
nu = 1e-3
tau_over_dx = 0.1
steps = 40

[initial]
sigma = 0.3
amplitude = 1.0

[ansatz]
d = 3
variant = "cry"
head = "x"

[sweep]
grid_points = 64
sweeps = 10
tol = 1e-8
span = 6.283185307179586

[fit]
restarts = 20
threshold = 1e-6

[fit.sweep]
grid_points = 64
sweeps = 200
tol = 1e-14
span = 6.283185307179586

[estimator]
mode = "exact"
shots = 0
recipe = "depol_only"
error_scale = 1.0

[gatecount]
n_min = 3
n_max = 8
variant = "cu_alt"

[elide]
circuits = 200
n_min = 2
n_max = 6
body_gates = 12
"#;

/// Default table for `kind`, as TOML text.
pub fn default_config_text(kind: ExperimentKind) -> String {
    let extra = match kind {
        ExperimentKind::BurgersRun => "\n[assert]\nmax_infidelity = 1e-2\n",
        ExperimentKind::FitInitial => "\n[assert]\nmax_infidelity = 1e-4\n",
        ExperimentKind::ElideCheck => "\n[assert]\nmax_deviation = 1e-10\n",
        ExperimentKind::GatecountSweep => "\n[assert]\nmin_ratio = 3.0\n",
        ExperimentKind::NoisyBurgers | ExperimentKind::Classical => "",
    };
    let mut text = format!("kind = \"{}\"\n{COMMON_DEFAULTS}{extra}", kind.label());
    if kind == ExperimentKind::NoisyBurgers {
        // Noisy runs use the hardware-scale parameters.
        text = text
            .replace("nu = 1e-3", "nu = 1e-2")
            .replace("tau_over_dx = 0.1", "tau_over_dx = 0.1\ntau = 0.2")
            .replace("steps = 40", "steps = 3")
            .replace("variant = \"cry\"", "variant = \"cu_alt\"")
            .replace("sweeps = 10\ntol = 1e-8", "sweeps = 10\ntol = 1e-4")
            .replace("mode = \"exact\"\nshots = 0", "mode = \"noisy\"\nshots = 20000\nprofile = \"aqt-ibex\"");
    }
    text
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// The user's table merged over the defaults of its kind.
pub fn resolved_table(text: &str, fallback: Option<ExperimentKind>) -> Result<toml::Table> {
    let user: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let kind = match user.get("kind") {
        Some(v) => v
            .clone()
            .try_into::<ExperimentKind>()
            .map_err(|e| Error::Config(format!("kind: {e}")))?,
        None => fallback.ok_or_else(|| Error::Config("missing 'kind'".into()))?,
    };
    let mut base: toml::Table = default_config_text(kind)
        .parse()
        .expect("built-in defaults parse");
    merge(&mut base, user);
    Ok(base)
}

impl ExperimentConfig {
    /// Parses `text` over the defaults of the kind it names (or `fallback`).
    pub fn from_toml(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        Self::from_table(resolved_table(text, fallback)?)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn defaults(kind: ExperimentKind) -> Self {
        Self::from_toml("", Some(kind)).expect("built-in defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.grid()?;
        self.sweep.validate()?;
        self.fit.sweep.validate()?;
        if self.ansatz.d == 0 {
            return Err(Error::Config("ansatz.d must be >= 1".into()));
        }
        if self.gatecount.n_min < 2 || self.gatecount.n_min > self.gatecount.n_max {
            return Err(Error::Config("gatecount needs 2 <= n_min <= n_max".into()));
        }
        if self.elide.n_min < 1 || self.elide.n_min > self.elide.n_max {
            return Err(Error::Config("elide needs 1 <= n_min <= n_max".into()));
        }
        match self.estimator.mode {
            ModeName::Shots if self.estimator.shots == 0 => {
                Err(Error::Config("shots mode needs estimator.shots > 0".into()))
            }
            _ if !(self.estimator.error_scale >= 0.0) => {
                Err(Error::Config("estimator.error_scale must be >= 0".into()))
            }
            ModeName::Noisy if self.estimator.profile.is_none() => {
                Err(Error::Config("noisy mode needs estimator.profile".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn ansatz_spec(&self) -> Result<AnsatzSpec> {
        AnsatzSpec::new(self.grid.n, self.ansatz.d, self.ansatz.variant, self.ansatz.head)
    }

    pub fn calibration(&self) -> Result<Option<DeviceCalibration>> {
        let Some(name) = &self.estimator.profile else {
            return Ok(None);
        };
        let builtin = builtin_profile(name);
        let cal = match &self.estimator.calibration_csv {
            Some(path) => {
                let basis = builtin.as_ref().map(|c| c.basis).unwrap_or(Basis::Sc);
                DeviceCalibration::from_csv(name, basis, path)?
            }
            None => builtin?,
        };
        Ok(Some(if self.estimator.error_scale == 1.0 {
            cal
        } else {
            cal.scaled_errors(self.estimator.error_scale)
        }))
    }

    pub fn estimator_mode(&self) -> Result<EstimatorMode> {
        let shots = (self.estimator.shots > 0)
            .then(|| ShotConfig::new(self.estimator.shots, self.seed))
            .transpose()?;
        Ok(match self.estimator.mode {
            ModeName::Exact => EstimatorMode::Exact,
            ModeName::Shots => EstimatorMode::Shots(shots.expect("validated")),
            ModeName::Noisy => {
                let cal = self.calibration()?.expect("validated");
                EstimatorMode::Noisy {
                    model: model_from_calibration(&cal, self.estimator.recipe),
                    basis: cal.basis,
                    shots,
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub lambda: f64,
    pub infidelity: f64,
    pub cost: f64,
    pub params: Vec<f64>,
    pub u_vqa: Vec<f64>,
    pub u_classical: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BurgersOutput {
    pub grid: BurgersGrid,
    pub fit: FitResult,
    pub steps: Vec<StepRecord>,
    /// `(time step, row)` for every parameter update.
    pub traces: Vec<(usize, TraceRow)>,
    pub circuit_evaluations: u64,
}

impl BurgersOutput {
    pub fn max_infidelity(&self) -> f64 {
        self.steps.iter().map(|s| s.infidelity).fold(0.0, f64::max)
    }
}

/// Largest jump between neighbouring grid values (periodic).
pub fn steepness(u: &[f64]) -> f64 {
    let m = u.len();
    (0..m)
        .map(|k| (u[(k + 1) % m] - u[k]).abs())
        .fold(0.0, f64::max)
}

pub fn initial_field(cfg: &ExperimentConfig) -> Result<(BurgersGrid, f64, Vec<f64>)> {
    let grid = cfg.grid.grid()?;
    let center = cfg.initial.center.unwrap_or(0.5 * (grid.a + grid.b));
    let (l, psi) = initial_condition_gaussian(&grid, cfg.initial.sigma, center, cfg.initial.amplitude)?;
    Ok((grid, l, psi))
}

/// The fit fixes the state only up to sign, and `u → −u` reverses the
/// flow, so Λ₀ takes the sign that makes `Λ₀·ψ` match the target.
pub fn aligned_norm(lambda: f64, fitted: &[f64], target: &[f64]) -> f64 {
    let dot: f64 = fitted.iter().zip(target).map(|(a, b)| a * b).sum();
    if dot < 0.0 {
        -lambda
    } else {
        lambda
    }
}

pub fn run_fit(cfg: &ExperimentConfig) -> Result<FitResult> {
    let (_, _, psi) = initial_field(cfg)?;
    fit_initial_state(&psi, &cfg.ansatz_spec()?, &cfg.fit, crate::rng::child_seed(cfg.seed, 0))
}

/// Classical reference trajectory, `steps + 1` fields starting at `u₀`.
pub fn run_classical(cfg: &ExperimentConfig) -> Result<(BurgersGrid, Vec<Vec<f64>>)> {
    let (grid, l, psi) = initial_field(cfg)?;
    let mut u: Vec<f64> = psi.iter().map(|p| l * p).collect();
    let mut out = vec![u.clone()];
    for _ in 0..cfg.grid.steps {
        u = classical_step(&grid, &u);
        out.push(u.clone());
    }
    Ok((grid, out))
}

/// Fit at t = 0, then one SGEO-optimized step per time step. The previous
/// step's optimized circuit is the bra state of the next cost.
pub fn run_burgers(cfg: &ExperimentConfig) -> Result<BurgersOutput> {
    let spec = cfg.ansatz_spec()?;
    let (grid, classical) = run_classical(cfg)?;
    let (_, l0, psi0) = initial_field(cfg)?;
    let fit = run_fit(cfg)?;
    let mode = cfg.estimator_mode()?;
    let mut est = Estimator::new(mode, crate::rng::child_seed(cfg.seed, 1));

    let mut params = fit.params.clone();
    let circuit = build_ansatz(&spec, &params)?;
    let l0 = aligned_norm(l0, &prepared_state(&circuit)?, &psi0);
    let mut state = FieldState::from_circuit(l0, circuit)?;
    let mut steps = vec![StepRecord {
        step: 0,
        t: 0.0,
        lambda: l0,
        infidelity: infidelity(&state.psi, &classical[0])?,
        cost: -l0 * l0,
        params: params.clone(),
        u_vqa: state.velocity(),
        u_classical: classical[0].clone(),
    }];
    let mut traces = Vec::new();
    for step in 1..=cfg.grid.steps {
        let r = optimize_step(&grid, &state, &spec, &params, &cfg.sweep, &mut est)?;
        traces.extend(r.trace.iter().cloned().map(|row| (step, row)));
        params = r.params;
        state = FieldState::from_circuit(r.bracket, build_ansatz(&spec, &params)?)?;
        steps.push(StepRecord {
            step,
            t: grid.tau * step as f64,
            lambda: state.lambda,
            infidelity: infidelity(&state.psi, &classical[step])?,
            cost: r.cost,
            params: params.clone(),
            u_vqa: state.velocity(),
            u_classical: classical[step].clone(),
        });
    }
    Ok(BurgersOutput {
        grid,
        fit,
        steps,
        traces,
        circuit_evaluations: est.evaluations(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatecountRow {
    pub n: usize,
    pub architecture: Basis,
    pub scheme: &'static str,
    /// "shiftdiag" for the widest single circuit, "cost" for all fifteen
    /// circuits behind one parameter update.
    pub granularity: &'static str,
    pub d: usize,
    pub g1: usize,
    pub g2: usize,
    pub depth: usize,
}

/// Low-depth: tailored ansatz with d = 2n−3, work-chain adder, elided.
/// Conventional: ancilla-controlled baseline with d = n, staircase adder,
/// no elision.
pub fn gatecount_rows(n: usize, variant: Variant) -> Result<Vec<GatecountRow>> {
    let d_low = (2 * n).saturating_sub(3).max(1);
    let low_spec = AnsatzSpec::new(n, d_low, variant, Head::X)?;
    let angles = |k: usize| -> Vec<f64> { (0..k).map(|i| 0.37 + 0.61 * i as f64).collect() };
    let u_low = build_ansatz(&low_spec, &angles(low_spec.param_count()))?;
    let base = BaselineSpec { n, d: n };
    let u_conv = build_baseline(&base, &angles(base.param_count()))?;
    let mut rows = Vec::new();
    for basis in [Basis::Sc, Basis::Ion] {
        for (scheme, u, opts, d) in [
            ("conventional", &u_conv, BuildOptions::conventional(), n),
            ("low-depth", &u_low, BuildOptions::default(), d_low),
        ] {
            let mut total = (0, 0, 0);
            let mut widest = None;
            for kind in GTermKind::ALL {
                let c = build_gterm_circuit_with(kind, u, u, opts)?;
                let rep = count_report(&c, basis)?;
                // Three bindings per parameter update.
                total.0 += 3 * rep.g1;
                total.1 += 3 * rep.g2;
                total.2 += 3 * rep.depth;
                if matches!(kind, GTermKind::ShiftDiag(crate::hadamard::Direction::Plus)) {
                    widest = Some(rep);
                }
            }
            let w = widest.expect("ShiftDiag is part of ALL");
            rows.push(GatecountRow {
                n,
                architecture: basis,
                scheme,
                granularity: "shiftdiag",
                d,
                g1: w.g1,
                g2: w.g2,
                depth: w.depth,
            });
            rows.push(GatecountRow {
                n,
                architecture: basis,
                scheme,
                granularity: "cost",
                d,
                g1: total.0,
                g2: total.1,
                depth: total.2,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElideRow {
    pub index: usize,
    pub n: usize,
    pub gates: usize,
    pub multi_before: usize,
    pub multi_after: usize,
    pub max_dev: f64,
}

/// Random Hadamard-form circuits, elided and compared amplitude by
/// amplitude against the original.
pub fn run_elide_check(cfg: &ExperimentConfig) -> Result<Vec<ElideRow>> {
    let mut rng = crate::rng::stream(cfg.seed, "elide");
    let e = &cfg.elide;
    (0..e.circuits)
        .map(|i| {
            let n = e.n_min + i % (e.n_max - e.n_min + 1);
            let c = random_hadamard_circuit(&mut rng, n, e.body_gates);
            let h = detect_hadamard_form(&c)?;
            let reduced = elide_ancilla_controls(&h);
            let controls = |c: &crate::circuit::Circuit| -> usize {
                c.gates().iter().map(|g| g.controls.len()).sum()
            };
            Ok(ElideRow {
                index: i,
                n,
                gates: c.len(),
                multi_before: controls(&c),
                multi_after: controls(&reduced),
                max_dev: statevector_deviation(&c, &reduced)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_for_every_kind() {
        for kind in [
            ExperimentKind::ElideCheck,
            ExperimentKind::FitInitial,
            ExperimentKind::BurgersRun,
            ExperimentKind::GatecountSweep,
            ExperimentKind::NoisyBurgers,
            ExperimentKind::Classical,
        ] {
            let c = ExperimentConfig::defaults(kind);
            assert_eq!(c.kind, kind);
        }
        let noisy = ExperimentConfig::defaults(ExperimentKind::NoisyBurgers);
        assert_eq!(noisy.grid.tau, Some(0.2));
        assert_eq!(noisy.ansatz.variant, Variant::CuAlt);
        assert_eq!(noisy.sweep.sweeps, 10);
        assert_eq!(noisy.sweep.tol, 1e-4);
    }

    #[test]
    fn user_values_override_defaults() {
        let c = ExperimentConfig::from_toml("kind = \"burgers_run\"\n[grid]\nn = 4\n", None).unwrap();
        assert_eq!(c.grid.n, 4);
        assert_eq!(c.grid.steps, 40);
        assert!(ExperimentConfig::from_toml("[grid]\nn = 4\n", None).is_err());
        assert!(ExperimentConfig::from_toml("kind = \"burgers_run\"\nbogus = 1\n", None).is_err());
        assert!(ExperimentConfig::from_toml("kind = \"burgers_run\"\n[estimator]\nmode = \"shots\"\n", None).is_err());
    }

    #[test]
    fn default_time_step_is_a_tenth_of_the_spacing() {
        let g = ExperimentConfig::defaults(ExperimentKind::BurgersRun).grid.grid().unwrap();
        assert!((g.tau - g.dx() / 10.0).abs() < 1e-15);
    }

    #[test]
    fn steepness_of_a_step() {
        assert_eq!(steepness(&[0.0, 0.0, 1.0, 1.0]), 1.0);
    }
}

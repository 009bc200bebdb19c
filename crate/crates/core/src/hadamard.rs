//! Hadamard-test circuits for the Burgers' cost terms and their estimators.
//!
//! Every circuit estimates `Re⟨0|U_t† M U_λ|0⟩` (or the imaginary part) for
//! `M ∈ {I, Â, Â†, Â·D_t†, Â†·D_t†}` with `Â|k⟩ = |k−1 mod 2ⁿ⟩` and
//! `D_t = diag(U_t|0⟩)`.
//!
//! Wire layout: ancilla 0, main register `1..=n`, then `n−2` work qubits
//! (n ≥ 3) for the adder, then the second register used by `ShiftDiag`.

use crate::ansatz::prepared_amplitudes;
use crate::circuit::{Circuit, GateInstance, GateKind};
use crate::error::{Error, Result};
use crate::lowdepth::elide_unchecked;
use crate::matrix::{inner, CMatrix, C64, ONE};
use crate::noise::NoiseModel;
use crate::sim::{run_density, run_statevector, sample_z_from, ShotConfig};
use crate::transpile::{transpile, Basis};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Â
    Plus,
    /// Â†
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GTermKind {
    Overlap,
    Shift(Direction),
    ShiftDiag(Direction),
}

impl GTermKind {
    pub const ALL: [GTermKind; 5] = [
        GTermKind::Overlap,
        GTermKind::Shift(Direction::Plus),
        GTermKind::Shift(Direction::Minus),
        GTermKind::ShiftDiag(Direction::Plus),
        GTermKind::ShiftDiag(Direction::Minus),
    ];

    pub fn label(&self) -> &'static str {
        match self {
            GTermKind::Overlap => "overlap",
            GTermKind::Shift(Direction::Plus) => "shift_plus",
            GTermKind::Shift(Direction::Minus) => "shift_minus",
            GTermKind::ShiftDiag(Direction::Plus) => "shiftdiag_plus",
            GTermKind::ShiftDiag(Direction::Minus) => "shiftdiag_minus",
        }
    }
}

/// Circuit realization of the adder block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdderForm {
    /// Work-register carry chain: Toffolis and CNOTs only.
    WorkChain,
    /// Textbook staircase of multi-controlled X gates.
    Staircase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdderSpec {
    pub n: usize,
    pub direction: Direction,
}

impl AdderSpec {
    pub fn work_qubits(&self) -> usize {
        work_qubits(self.n)
    }
}

pub fn work_qubits(n: usize) -> usize {
    n.saturating_sub(2)
}

/// Â|k⟩ = |k−1 mod 2ⁿ⟩; the minus direction is its transpose.
pub fn adder_matrix(spec: AdderSpec) -> CMatrix {
    let d = 1usize << spec.n;
    let mut m = CMatrix::zeros(d);
    for k in 0..d {
        let down = (k + d - 1) % d;
        match spec.direction {
            Direction::Plus => m[(down, k)] = ONE,
            Direction::Minus => m[(k, down)] = ONE,
        }
    }
    m
}

fn x_gate(controls: Vec<usize>, target: usize) -> Result<GateInstance> {
    match controls.len() {
        0 => GateInstance::single(GateKind::X, target),
        1 => GateInstance::cnot(controls[0], target),
        _ => GateInstance::mcx(controls, target),
    }
}

/// Decrementer on `reg` (reg[0] least significant), every gate controlled
/// by `ancilla`. Returned for the plus direction; the minus direction is the
/// reversed list (all gates are self-inverse).
pub fn adder_gates(
    form: AdderForm,
    ancilla: usize,
    reg: &[usize],
    work: &[usize],
    direction: Direction,
) -> Result<Vec<GateInstance>> {
    let n = reg.len();
    let a = ancilla;
    let mut out = Vec::new();
    match form {
        AdderForm::Staircase => {
            // Bit j flips when every lower bit reads 1 after its own flip.
            for j in 0..n {
                let mut controls = vec![a];
                controls.extend_from_slice(&reg[..j]);
                out.push(x_gate(controls, reg[j])?);
            }
        }
        AdderForm::WorkChain => {
            if work.len() < work_qubits(n) {
                return Err(Error::WidthMismatch {
                    expected: work_qubits(n),
                    got: work.len(),
                });
            }
            out.push(x_gate(vec![a], reg[0])?);
            if n >= 2 {
                out.push(x_gate(vec![a, reg[0]], reg[1])?);
            }
            if n >= 3 {
                // work[j-1] holds q1 ∧ … ∧ q_j, all bits read after their flip.
                out.push(x_gate(vec![a, reg[0]], work[0])?);
                for j in 2..=n - 2 {
                    out.push(x_gate(vec![a, reg[j - 1], work[j - 2]], work[j - 1])?);
                    out.push(x_gate(vec![a, work[j - 1]], reg[j])?);
                }
                out.push(x_gate(vec![a, reg[n - 2], work[n - 3]], reg[n - 1])?);
                for j in (2..=n - 2).rev() {
                    out.push(x_gate(vec![a, reg[j - 1], work[j - 2]], work[j - 1])?);
                }
                out.push(x_gate(vec![a, reg[0]], work[0])?);
            }
        }
    }
    if direction == Direction::Minus {
        out.reverse();
    }
    Ok(out)
}

/// Adds the ancilla to a gate's controls unless already present.
fn with_ancilla_control(g: &GateInstance, a: usize) -> Result<GateInstance> {
    if g.controls.contains(&a) {
        return Ok(g.clone());
    }
    let mut controls = vec![a];
    controls.extend_from_slice(&g.controls);
    let kind = match g.kind {
        GateKind::CNOT | GateKind::MCX(_) => GateKind::MCX(controls.len()),
        k if k.is_two_target() => {
            return Err(Error::UnsupportedKind(format!(
                "cannot condition {} on the ancilla",
                k.name()
            )))
        }
        k => k,
    };
    GateInstance::new(kind, controls, g.targets.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub adder: AdderForm,
    /// Remove redundant ancilla controls after building.
    pub elide: bool,
    /// Insert S† before the closing H to read the imaginary part.
    pub imaginary: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            adder: AdderForm::WorkChain,
            elide: true,
            imaginary: false,
        }
    }
}

impl BuildOptions {
    pub fn conventional() -> Self {
        Self {
            adder: AdderForm::Staircase,
            elide: false,
            imaginary: false,
        }
    }
}

pub fn gterm_width(kind: GTermKind, n: usize) -> usize {
    match kind {
        GTermKind::Overlap => 1 + n,
        GTermKind::Shift(_) => 1 + n + work_qubits(n),
        GTermKind::ShiftDiag(_) => 1 + 2 * n + work_qubits(n),
    }
}

fn check_register(c: &Circuit, n: usize) -> Result<()> {
    if c.width() != n + 1 {
        return Err(Error::WidthMismatch {
            expected: n + 1,
            got: c.width(),
        });
    }
    if c.ancilla() != Some(0) {
        return Err(Error::InvalidCircuit(
            "register circuits must declare ancilla 0".into(),
        ));
    }
    Ok(())
}

/// Low-depth build: work-chain adder, elided.
pub fn build_gterm_circuit(kind: GTermKind, u_t: &Circuit, u_lambda: &Circuit) -> Result<Circuit> {
    build_gterm_circuit_with(kind, u_t, u_lambda, BuildOptions::default())
}

/// `u_t` and `u_lambda` are ancilla-controlled register circuits of width
/// `n + 1` with the ancilla on wire 0 (as produced by `ansatz`).
pub fn build_gterm_circuit_with(
    kind: GTermKind,
    u_t: &Circuit,
    u_lambda: &Circuit,
    opts: BuildOptions,
) -> Result<Circuit> {
    let n = u_lambda.width() - 1;
    check_register(u_lambda, n)?;
    check_register(u_t, n)?;
    let width = gterm_width(kind, n);
    let a = 0;
    let main: Vec<usize> = (1..=n).collect();
    let work: Vec<usize> = (n + 1..n + 1 + work_qubits(n)).collect();
    let second: Vec<usize> = (width - n..width).collect();
    let main_map: Vec<usize> = std::iter::once(a).chain(main.iter().copied()).collect();
    let second_map: Vec<usize> = std::iter::once(a).chain(second.iter().copied()).collect();
    let u_t_inv = u_t.inverse()?;

    let mut body: Vec<GateInstance> = Vec::new();
    let push_circuit = |body: &mut Vec<GateInstance>, c: &Circuit, map: &[usize]| {
        body.extend(c.gates().iter().map(|g| g.remapped(map)));
    };
    push_circuit(&mut body, u_lambda, &main_map);
    match kind {
        GTermKind::Overlap => {}
        GTermKind::Shift(dir) => {
            body.extend(adder_gates(opts.adder, a, &main, &work, dir)?);
        }
        GTermKind::ShiftDiag(dir) => {
            for (&q, &r) in main.iter().zip(&second) {
                body.push(GateInstance::cnot(q, r)?);
            }
            push_circuit(&mut body, &u_t_inv, &second_map);
            body.extend(adder_gates(opts.adder, a, &main, &work, dir)?);
        }
    }
    push_circuit(&mut body, &u_t_inv, &main_map);

    let mut c = Circuit::new(width)?.with_ancilla(a)?;
    c.push(GateInstance::single(GateKind::H, a)?)?;
    for g in &body {
        c.push(with_ancilla_control(g, a)?)?;
    }
    if opts.imaginary {
        c.push(GateInstance::single(GateKind::SDag, a)?)?;
    }
    c.push(GateInstance::single(GateKind::H, a)?)?;
    if !work.is_empty() {
        let list: Vec<String> = work.iter().map(|w| w.to_string()).collect();
        c.metadata.insert("clean_ancillas".into(), list.join(","));
    }
    c.metadata.insert("gterm".into(), kind.label().into());
    if opts.elide {
        c = elide_unchecked(&c, a);
        c.metadata.insert("scheme".into(), "low-depth".into());
    } else {
        c.metadata.insert("scheme".into(), "conventional".into());
    }
    Ok(c)
}

/// Dense-matrix value of `⟨0|U_t† M U_λ|0⟩`.
pub fn gterm_oracle(kind: GTermKind, u_t: &Circuit, u_lambda: &Circuit) -> Result<C64> {
    let psi_t = prepared_amplitudes(u_t)?;
    let phi = prepared_amplitudes(u_lambda)?;
    let n = u_lambda.width() - 1;
    let v = match kind {
        GTermKind::Overlap => phi,
        GTermKind::Shift(direction) => adder_matrix(AdderSpec { n, direction }).apply(&phi),
        GTermKind::ShiftDiag(direction) => {
            let d: Vec<C64> = phi.iter().zip(&psi_t).map(|(p, t)| t.conj() * p).collect();
            adder_matrix(AdderSpec { n, direction }).apply(&d)
        }
    };
    Ok(inner(&psi_t, &v))
}

/// How a G-term is estimated.
#[derive(Clone, Debug)]
pub enum EstimatorMode {
    Exact,
    Shots(ShotConfig),
    /// Transpile to `basis`, evolve the density matrix under `model`, read
    /// out through the ancilla's confusion matrix, optionally sample.
    Noisy {
        model: NoiseModel,
        basis: Basis,
        shots: Option<ShotConfig>,
    },
}

impl EstimatorMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, EstimatorMode::Exact)
    }

    /// Same mode with the shot seed replaced (no-op for exact modes).
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            EstimatorMode::Exact => EstimatorMode::Exact,
            EstimatorMode::Shots(cfg) => EstimatorMode::Shots(ShotConfig { seed, ..*cfg }),
            EstimatorMode::Noisy {
                model,
                basis,
                shots,
            } => EstimatorMode::Noisy {
                model: model.clone(),
                basis: *basis,
                shots: shots.map(|cfg| ShotConfig { seed, ..cfg }),
            },
        }
    }
}

/// Ancilla ⟨σz⟩ of an already-built Hadamard-test circuit.
pub fn estimate_circuit(c: &Circuit, mode: &EstimatorMode) -> Result<f64> {
    let a = c
        .ancilla()
        .ok_or_else(|| Error::InvalidCircuit("circuit declares no ancilla".into()))?;
    match mode {
        EstimatorMode::Exact => Ok(run_statevector(c).expectation_z(a)),
        EstimatorMode::Shots(cfg) => {
            let z = run_statevector(c).expectation_z(a);
            let mut rng = crate::rng::stream(cfg.seed, "shots");
            Ok(sample_z_from(z, cfg.shots, &mut rng))
        }
        EstimatorMode::Noisy {
            model,
            basis,
            shots,
        } => {
            let z = if model.is_noiseless() {
                run_statevector(c).expectation_z(a)
            } else {
                let t = transpile(c, *basis)?;
                let phys = t.final_position(a);
                let rho = run_density(&t.circuit, model)?;
                model.measured_z(rho.expectation_z(phys), phys)
            };
            Ok(match shots {
                Some(cfg) => {
                    let mut rng = crate::rng::stream(cfg.seed, "shots");
                    sample_z_from(z, cfg.shots, &mut rng)
                }
                None => z,
            })
        }
    }
}

pub fn estimate_gterm(
    kind: GTermKind,
    u_t: &Circuit,
    u_lambda: &Circuit,
    mode: &EstimatorMode,
) -> Result<f64> {
    estimate_circuit(&build_gterm_circuit(kind, u_t, u_lambda)?, mode)
}

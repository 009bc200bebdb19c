//! Parameterized circuits: the tailored chain ansatz and the fully
//! ancilla-controlled real-amplitude baseline.
//!
//! Both builders return a circuit of width `1 + n` with the ancilla on
//! wire 0 and register qubit `q_i` on wire `i` (1-based). Register-local
//! basis index `k = Σ bit(q_{i+1})·2^i`, so `q_1` is the least significant
//! bit of the prepared amplitudes.

use crate::circuit::{Circuit, GateInstance, GateKind};
use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::sim::StateVector;
use serde::Deserialize;
use std::f64::consts::PI;

pub type ParamVector = Vec<f64>;

/// Controlled-unitary flavour used by every chain gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Controlled RY, two CNOTs after decomposition.
    Cry,
    /// Controlled W(λ), one CNOT after decomposition.
    CuAlt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// CNOT from the ancilla onto q1.
    X,
    /// Ancilla-controlled RY(λ0) onto q1; adds one parameter.
    Ry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n: usize,
    pub d: usize,
    pub variant: Variant,
    pub head: Head,
}

impl AnsatzSpec {
    pub fn new(n: usize, d: usize, variant: Variant, head: Head) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Config(format!(
                "ansatz needs n >= 1 and d >= 1 (got n={n}, d={d})"
            )));
        }
        Ok(Self {
            n,
            d,
            variant,
            head,
        })
    }

    pub fn param_count(&self) -> usize {
        usize::from(self.head == Head::Ry) + self.d * self.n
    }

    pub fn width(&self) -> usize {
        self.n + 1
    }

    fn chain_gate(&self, angle: f64) -> GateKind {
        match self.variant {
            Variant::Cry => GateKind::CRY(angle),
            Variant::CuAlt => GateKind::CuAlt(angle),
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::LengthMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Head gate on q1, then `d` layers of the chain q1→q2→…→q_n→q1.
///
/// For n = 1 there is no register qubit to control from, so each layer is a
/// single ancilla-controlled RY on q1.
pub fn build_ansatz(spec: &AnsatzSpec, lambda: &[f64]) -> Result<Circuit> {
    check_len(spec.param_count(), lambda.len())?;
    let mut c = Circuit::new(spec.width())?.with_ancilla(0)?;
    let mut params = lambda.iter().copied();
    match spec.head {
        Head::X => c.push(GateInstance::cnot(0, 1)?)?,
        Head::Ry => c.push(GateInstance::controlled(
            GateKind::CRY(params.next().expect("length checked")),
            vec![0],
            1,
        )?)?,
    }
    let n = spec.n;
    for _ in 0..spec.d {
        if n == 1 {
            let a = params.next().expect("length checked");
            c.push(GateInstance::controlled(GateKind::RY(a), vec![0], 1)?)?;
            continue;
        }
        for i in 1..=n {
            let target = if i == n { 1 } else { i + 1 };
            let a = params.next().expect("length checked");
            c.push(GateInstance::controlled(spec.chain_gate(a), vec![i], target)?)?;
        }
    }
    c.metadata.insert("ansatz".into(), "tailored".into());
    Ok(c)
}

/// Real-amplitude baseline: per layer an RY column then a linear CNOT chain,
/// closed by a final RY column; every gate gets an extra ancilla control.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaselineSpec {
    pub n: usize,
    pub d: usize,
}

impl BaselineSpec {
    pub fn param_count(&self) -> usize {
        (self.d + 1) * self.n
    }
}

pub fn build_baseline(spec: &BaselineSpec, lambda: &[f64]) -> Result<Circuit> {
    check_len(spec.param_count(), lambda.len())?;
    if spec.n == 0 {
        return Err(Error::Config("baseline needs n >= 1".into()));
    }
    let n = spec.n;
    let mut c = Circuit::new(n + 1)?.with_ancilla(0)?;
    let mut params = lambda.iter().copied();
    let mut column = |c: &mut Circuit| -> Result<()> {
        for q in 1..=n {
            let a = params.next().expect("length checked");
            c.push(GateInstance::controlled(GateKind::RY(a), vec![0], q)?)?;
        }
        Ok(())
    };
    for _ in 0..spec.d {
        column(&mut c)?;
        for q in 1..n {
            c.push(GateInstance::mcx(vec![0, q], q + 1)?)?;
        }
    }
    column(&mut c)?;
    c.metadata.insert("ansatz".into(), "baseline".into());
    Ok(c)
}

pub fn bind_parameter(lambda: &[f64], j: usize, value: f64) -> Result<ParamVector> {
    if j >= lambda.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: lambda.len(),
        });
    }
    let mut out = lambda.to_vec();
    out[j] = value;
    Ok(out)
}

/// Maps an angle into [−π, π).
pub fn canonical_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// Register amplitudes produced by an ancilla-controlled circuit when the
/// ancilla is |1⟩.
pub fn prepared_amplitudes(c: &Circuit) -> Result<Vec<C64>> {
    let a = c
        .ancilla()
        .ok_or_else(|| Error::InvalidCircuit("circuit declares no ancilla".into()))?;
    let mut s = StateVector::zero(c.width());
    s.apply(&GateInstance::single(GateKind::X, a)?);
    s.apply_circuit(c)?;
    let register: Vec<usize> = (0..c.width()).filter(|&q| q != a).collect();
    Ok(s.slice(&register, 1 << a))
}

/// Real part of [`prepared_amplitudes`]; the RY-only ansatz is real.
pub fn prepared_state(c: &Circuit) -> Result<Vec<f64>> {
    Ok(prepared_amplitudes(c)?.iter().map(|z| z.re).collect())
}

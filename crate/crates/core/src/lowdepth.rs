//! Ancilla-control elision for Hadamard-test circuits.
//!
//! In a Hadamard test whose register starts in |0…0⟩ and whose body gates
//! are all conditional, the ancilla-|0⟩ branch never fires any gate. A gate
//! that already has a register control therefore needs no ancilla control:
//! in the |0⟩ branch its register control is still 0.

use crate::circuit::{Circuit, GateInstance, GateKind};
use crate::error::{Error, Result};
use crate::sim::run_statevector;
use std::ops::Range;

#[derive(Clone, Debug, PartialEq)]
pub struct HadamardForm {
    pub circuit: Circuit,
    pub ancilla: usize,
    /// Gates strictly between the opening H and the closing (S†) H.
    pub body: Range<usize>,
    pub imaginary_part: bool,
}

fn is_bare(g: &GateInstance, kind: GateKind, q: usize) -> bool {
    g.kind == kind && g.controls.is_empty() && g.targets == [q]
}

/// Structural match of `H(a) · body · [S†(a)] · H(a)`.
pub fn detect_hadamard_form_at(c: &Circuit, ancilla: usize) -> Result<HadamardForm> {
    let reject = |msg: String| Err(Error::NotHadamardForm(msg));
    if ancilla >= c.width() {
        return Err(Error::IndexOutOfRange {
            index: ancilla,
            len: c.width(),
        });
    }
    let gates = c.gates();
    if gates.len() < 2 {
        return reject("fewer than two gates".into());
    }
    if !is_bare(&gates[0], GateKind::H, ancilla) {
        return reject(format!("gate 0 is not H on ancilla {ancilla}"));
    }
    let last = gates.len() - 1;
    if !is_bare(&gates[last], GateKind::H, ancilla) {
        return reject(format!("gate {last} is not H on ancilla {ancilla}"));
    }
    let imaginary_part = last >= 2 && is_bare(&gates[last - 1], GateKind::SDag, ancilla);
    let body = 1..if imaginary_part { last - 1 } else { last };
    for i in body.clone() {
        let g = &gates[i];
        if g.controls.is_empty() {
            return reject(format!(
                "gate {i} ({}) is unconditional inside the body",
                g.kind.name()
            ));
        }
        if g.targets.contains(&ancilla) {
            return reject(format!("gate {i} ({}) targets the ancilla", g.kind.name()));
        }
    }
    Ok(HadamardForm {
        circuit: c.clone(),
        ancilla,
        body,
        imaginary_part,
    })
}

/// Uses the circuit's declared ancilla.
pub fn detect_hadamard_form(c: &Circuit) -> Result<HadamardForm> {
    let a = c
        .ancilla()
        .ok_or_else(|| Error::NotHadamardForm("circuit declares no ancilla".into()))?;
    detect_hadamard_form_at(c, a)
}

fn elide_gate(g: &GateInstance, ancilla: usize) -> GateInstance {
    if g.controls.len() < 2 || !g.controls.contains(&ancilla) {
        return g.clone();
    }
    let controls: Vec<usize> = g.controls.iter().copied().filter(|&q| q != ancilla).collect();
    let kind = match g.kind {
        GateKind::MCX(_) if controls.len() == 1 => GateKind::CNOT,
        GateKind::MCX(_) => GateKind::MCX(controls.len()),
        k => k,
    };
    GateInstance {
        kind,
        controls,
        targets: g.targets.clone(),
    }
}

pub fn elide_ancilla_controls(h: &HadamardForm) -> Circuit {
    elide_unchecked(&h.circuit, h.ancilla)
}

/// Elision without structural detection, for builders that construct valid
/// forms directly.
pub fn elide_unchecked(c: &Circuit, ancilla: usize) -> Circuit {
    let mut out = c.clone();
    let gates = c.gates().iter().map(|g| elide_gate(g, ancilla)).collect();
    out.set_gates(gates).expect("elision never widens a gate");
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub max_dev: f64,
    pub passed: bool,
}

pub const EQUIVALENCE_TOL: f64 = 1e-10;

/// Compares ancilla ⟨σz⟩ of both circuits by exact simulation.
pub fn verify_equivalence(
    original: &Circuit,
    reduced: &Circuit,
    ancilla: usize,
) -> Result<EquivalenceReport> {
    if original.width() != reduced.width() {
        return Err(Error::WidthMismatch {
            expected: original.width(),
            got: reduced.width(),
        });
    }
    let a = run_statevector(original);
    let b = run_statevector(reduced);
    let max_dev = (crate::sim::ancilla_expectation_z(&a, ancilla)?
        - crate::sim::ancilla_expectation_z(&b, ancilla)?)
    .abs();
    Ok(EquivalenceReport {
        max_dev,
        passed: max_dev <= EQUIVALENCE_TOL,
    })
}

/// Largest amplitude difference between the final states of two circuits.
pub fn statevector_deviation(a: &Circuit, b: &Circuit) -> Result<f64> {
    if a.width() != b.width() {
        return Err(Error::WidthMismatch {
            expected: a.width(),
            got: b.width(),
        });
    }
    let (sa, sb) = (run_statevector(a), run_statevector(b));
    Ok(sa
        .amplitudes()
        .iter()
        .zip(sb.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandwich(width: usize, body: &[(GateKind, &[usize], &[usize])], imag: bool) -> Circuit {
        let mut c = Circuit::new(width).unwrap().with_ancilla(0).unwrap();
        c.add(GateKind::H, &[], &[0]).unwrap();
        for (k, cs, ts) in body {
            c.add(*k, cs, ts).unwrap();
        }
        if imag {
            c.add(GateKind::SDag, &[], &[0]).unwrap();
        }
        c.add(GateKind::H, &[], &[0]).unwrap();
        c
    }

    #[test]
    fn accepts_sandwich_and_reports_span() {
        let c = sandwich(
            3,
            &[(GateKind::CNOT, &[0], &[1]), (GateKind::MCX(2), &[0, 1], &[2])],
            true,
        );
        let h = detect_hadamard_form(&c).unwrap();
        assert_eq!(h.body, 1..3);
        assert!(h.imaginary_part);
    }

    #[test]
    fn rejects_unconditional_body_gate() {
        let c = sandwich(2, &[(GateKind::X, &[], &[1])], false);
        match detect_hadamard_form(&c) {
            Err(Error::NotHadamardForm(msg)) => assert!(msg.contains("gate 1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_missing_sandwich() {
        let mut c = Circuit::new(2).unwrap().with_ancilla(0).unwrap();
        c.add(GateKind::CNOT, &[0], &[1]).unwrap();
        c.add(GateKind::H, &[], &[0]).unwrap();
        assert!(detect_hadamard_form(&c).is_err());
        let c = Circuit::new(2).unwrap();
        assert!(detect_hadamard_form(&c).is_err());
    }

    #[test]
    fn toffoli_becomes_cnot() {
        let c = sandwich(
            3,
            &[(GateKind::CNOT, &[0], &[1]), (GateKind::MCX(2), &[0, 1], &[2])],
            false,
        );
        let e = elide_ancilla_controls(&detect_hadamard_form(&c).unwrap());
        assert_eq!(e.gates()[1], c.gates()[1]);
        assert_eq!(e.gates()[2], GateInstance::cnot(1, 2).unwrap());
    }

    #[test]
    fn mcx3_loses_one_control() {
        let c = sandwich(
            4,
            &[
                (GateKind::CNOT, &[0], &[1]),
                (GateKind::MCX(3), &[0, 1, 2], &[3]),
            ],
            false,
        );
        let e = elide_unchecked(&c, 0);
        assert_eq!(e.gates()[2], GateInstance::mcx(vec![1, 2], 3).unwrap());
    }

    #[test]
    fn equivalence_report() {
        let c = sandwich(
            3,
            &[
                (GateKind::CRY(0.7), &[0], &[1]),
                (GateKind::CRY(1.1), &[0, 1], &[2]),
                (GateKind::MCX(2), &[0, 2], &[1]),
            ],
            false,
        );
        let e = elide_unchecked(&c, 0);
        let r = verify_equivalence(&c, &c, 0).unwrap();
        assert_eq!(r.max_dev, 0.0);
        let r = verify_equivalence(&c, &e, 0).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(statevector_deviation(&c, &e).unwrap() < 1e-12);

        let mut broken = e.clone();
        let mut gates = broken.gates().to_vec();
        gates[1] = GateInstance::controlled(GateKind::CRY(0.2), vec![0], 1).unwrap();
        broken.set_gates(gates).unwrap();
        let r = verify_equivalence(&c, &broken, 0).unwrap();
        assert!(!r.passed);

        assert!(verify_equivalence(&c, &Circuit::new(2).unwrap(), 0).is_err());
    }
}

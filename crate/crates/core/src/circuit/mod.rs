//! Circuit intermediate representation.

mod gates;
pub mod random;
mod text;

pub use gates::{
    mat2_to_cmatrix, mat4_to_cmatrix, to_mat2, to_mat4, unitary_of, ControlRule, GateInstance,
    GateKind, Mat2, Mat4,
};
pub use text::{format_angle, parse_circuit, serialize_circuit};

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Ordered gate list over `width` qubits. Gate order is execution order.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    ancilla: Option<usize>,
    gates: Vec<GateInstance>,
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidCircuit("width must be at least 1".into()));
        }
        Ok(Self {
            width,
            ancilla: None,
            gates: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_ancilla(mut self, ancilla: usize) -> Result<Self> {
        self.set_ancilla(Some(ancilla))?;
        Ok(self)
    }

    pub fn set_ancilla(&mut self, ancilla: Option<usize>) -> Result<()> {
        if let Some(a) = ancilla {
            if a >= self.width {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    len: self.width,
                });
            }
        }
        self.ancilla = ancilla;
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ancilla(&self) -> Option<usize> {
        self.ancilla
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateInstance) -> Result<()> {
        if let Some(q) = gate.qubits().find(|&q| q >= self.width) {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.width,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Validates and appends a gate given by its parts.
    pub fn add(&mut self, kind: GateKind, controls: &[usize], targets: &[usize]) -> Result<()> {
        self.push(GateInstance::new(kind, controls.to_vec(), targets.to_vec())?)
    }

    /// Appends every gate of `other` with qubit `q` renamed to `map[q]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() < other.width {
            return Err(Error::WidthMismatch {
                expected: other.width,
                got: map.len(),
            });
        }
        for g in &other.gates {
            self.push(g.remapped(map))?;
        }
        Ok(())
    }

    /// Replaces the gate list wholesale; each gate is re-checked against the width.
    pub fn set_gates(&mut self, gates: Vec<GateInstance>) -> Result<()> {
        self.gates.clear();
        self.gates.reserve(gates.len());
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Reversed gate order with each gate inverted.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = self.clone();
        out.gates = self
            .gates
            .iter()
            .rev()
            .map(GateInstance::inverse)
            .collect::<Result<_>>()?;
        Ok(out)
    }

    /// Gates touching two or more qubits.
    pub fn multi_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() >= 2).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 1).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_is_rejected() {
        assert!(Circuit::new(0).is_err());
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let mut c = Circuit::new(2).unwrap();
        assert!(matches!(
            c.add(GateKind::CNOT, &[0], &[2]),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(c.clone().with_ancilla(5).is_err());
    }

    #[test]
    fn inverse_reverses_and_inverts() {
        let mut c = Circuit::new(2).unwrap();
        c.add(GateKind::RY(0.3), &[], &[0]).unwrap();
        c.add(GateKind::CNOT, &[0], &[1]).unwrap();
        let inv = c.inverse().unwrap();
        assert_eq!(inv.gates()[0].kind, GateKind::CNOT);
        assert_eq!(inv.gates()[1].kind, GateKind::RY(-0.3));
        c.add(GateKind::SX, &[], &[0]).unwrap();
        assert!(matches!(c.inverse(), Err(Error::NoInverse(_))));
    }
}

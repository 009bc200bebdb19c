//! Seeded random circuits for property checks and the elision sweep.

use super::{Circuit, GateInstance, GateKind};
use rand::seq::index::sample;
use rand::Rng;
use std::f64::consts::PI;

fn angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}

fn one_qubit_kind<R: Rng + ?Sized>(rng: &mut R) -> GateKind {
    match rng.random_range(0..8) {
        0 => GateKind::H,
        1 => GateKind::X,
        2 => GateKind::SX,
        3 => GateKind::SDag,
        4 => GateKind::RX(angle(rng)),
        5 => GateKind::RY(angle(rng)),
        6 => GateKind::RZ(angle(rng)),
        _ => GateKind::R {
            theta: angle(rng),
            phi: angle(rng),
        },
    }
}

/// Any valid gate on `width` wires, including two-target kinds.
pub fn random_gate<R: Rng + ?Sized>(rng: &mut R, width: usize) -> GateInstance {
    loop {
        let pick = rng.random_range(0..10);
        if width < 2 && pick >= 2 {
            return GateInstance::single(one_qubit_kind(rng), 0).expect("valid");
        }
        let g = match pick {
            0 | 1 => GateInstance::single(one_qubit_kind(rng), rng.random_range(0..width)),
            2 => {
                let q = sample(rng, width, 2);
                let kind = match rng.random_range(0..5) {
                    0 => GateKind::RXX(angle(rng)),
                    1 => GateKind::ECR,
                    2 => GateKind::CZ,
                    3 => GateKind::RZZ(angle(rng)),
                    _ => GateKind::SWAP,
                };
                GateInstance::pair(kind, q.index(0), q.index(1))
            }
            _ => {
                let k = rng.random_range(1..width.min(4));
                let q = sample(rng, width, k + 1).into_vec();
                let (t, cs) = (q[0], q[1..].to_vec());
                controlled(rng, cs, t)
            }
        };
        if let Ok(g) = g {
            return g;
        }
    }
}

fn controlled<R: Rng + ?Sized>(rng: &mut R, cs: Vec<usize>, t: usize) -> crate::Result<GateInstance> {
    let kind = match rng.random_range(0..4) {
        0 if cs.len() == 1 => GateKind::CNOT,
        0 => GateKind::MCX(cs.len()),
        1 => GateKind::CRY(angle(rng)),
        2 => GateKind::CuAlt(angle(rng)),
        _ => one_qubit_kind(rng),
    };
    GateInstance::new(kind, cs, vec![t])
}

pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, width: usize, gates: usize) -> Circuit {
    let mut c = Circuit::new(width).expect("width >= 1");
    for _ in 0..gates {
        c.push(random_gate(rng, width)).expect("in range");
    }
    c
}

/// `H(0) · body · [S†(0)] · H(0)` on `1 + n` wires, ancilla 0. Body gates
/// carry at least one control, never target the ancilla, and include the
/// ancilla among their controls most of the time.
pub fn random_hadamard_circuit<R: Rng + ?Sized>(rng: &mut R, n: usize, body: usize) -> Circuit {
    let width = n + 1;
    let mut c = Circuit::new(width)
        .expect("width >= 2")
        .with_ancilla(0)
        .expect("ancilla 0");
    c.push(GateInstance::single(GateKind::H, 0).expect("valid"))
        .expect("in range");
    for _ in 0..body {
        let t = rng.random_range(1..width);
        let mut cs: Vec<usize> = Vec::new();
        if rng.random_bool(0.8) {
            cs.push(0);
        }
        let others: Vec<usize> = (1..width).filter(|&q| q != t).collect();
        let extra = rng.random_range(0..=others.len().min(3));
        for i in sample(rng, others.len(), extra) {
            cs.push(others[i]);
        }
        if cs.is_empty() {
            cs.push(0);
        }
        let g = controlled(rng, cs, t).expect("valid controlled gate");
        c.push(g).expect("in range");
    }
    if rng.random_bool(0.5) {
        c.push(GateInstance::single(GateKind::SDag, 0).expect("valid"))
            .expect("in range");
    }
    c.push(GateInstance::single(GateKind::H, 0).expect("valid"))
        .expect("in range");
    c
}

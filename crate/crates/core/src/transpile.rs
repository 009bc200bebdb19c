//! Lowering to device basis sets, linear-chain routing and gate counting.
//!
//! Pipeline: lower every gate to uncontrolled 1q gates, CNOTs and two-target
//! primitives; route (superconducting only); rewrite CNOT/SWAP/CZ/... into
//! the native entangler with 1q dressing; merge 1q runs and resynthesize
//! them in the native 1q set. Global phase is not tracked.

use crate::circuit::{Circuit, GateInstance, GateKind, Mat2};
use crate::error::{Error, Result};
use crate::matrix::{C64, ONE, ZERO};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Device basis sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// {ECR, RZ, X, SX} on a linear chain.
    Sc,
    /// {RXX, RZ, R}, all-to-all.
    Ion,
}

impl Basis {
    pub fn label(&self) -> &'static str {
        match self {
            Basis::Sc => "sc",
            Basis::Ion => "ion",
        }
    }

    pub fn needs_routing(&self) -> bool {
        *self == Basis::Sc
    }

    pub fn is_native(&self, kind: &GateKind) -> bool {
        match self {
            Basis::Sc => matches!(kind, GateKind::ECR | GateKind::RZ(_) | GateKind::X | GateKind::SX),
            Basis::Ion => matches!(kind, GateKind::RXX(_) | GateKind::RZ(_) | GateKind::R { .. }),
        }
    }
}

const EPS: f64 = 1e-12;

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn dagger2(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

const ID2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

fn op(kind: GateKind) -> Mat2 {
    kind.target_op().expect("single-qubit kind")
}

/// `U = e^{iα}·RZ(β)·RY(γ)·RZ(δ)`; returns (α, β, γ, δ).
pub fn zyz(u: &Mat2) -> (f64, f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = det.arg() / 2.0;
    let ph = C64::from_polar(1.0, -alpha);
    let a = u[0][0] * ph;
    let b = u[1][0] * ph;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > EPS { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > EPS { 2.0 * b.arg() } else { 0.0 };
    let (beta, delta) = if a.norm() > EPS && b.norm() > EPS {
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    } else if a.norm() > EPS {
        (sum, 0.0)
    } else {
        (diff, 0.0)
    };
    (alpha, beta, gamma, delta)
}

/// A unitary square root of a 2×2 unitary.
fn sqrt2(u: &Mat2) -> Mat2 {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let tr = u[0][0] + u[1][1];
    let s0 = det.sqrt();
    let cands = [s0, -s0];
    let (s, den) = cands
        .iter()
        .map(|&s| (s, tr + s * 2.0))
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .expect("two candidates");
    if den.norm() < 1e-9 {
        // U ∝ I with eigenvalues equal: the scalar root suffices.
        let g = u[0][0].sqrt();
        return [[g, ZERO], [ZERO, g]];
    }
    let k = den.sqrt();
    [[(u[0][0] + s) / k, u[0][1] / k], [u[1][0] / k, (u[1][1] + s) / k]]
}

fn near_zero_angle(a: f64) -> bool {
    let m = a.rem_euclid(2.0 * PI);
    m < 1e-10 || 2.0 * PI - m < 1e-10
}

fn wrap(a: f64) -> f64 {
    let y = (a + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI + 1e-15 {
        PI
    } else {
        y
    }
}

/// Incremental builder for the lowered gate list.
struct Lowerer {
    out: Vec<GateInstance>,
    clean: Vec<usize>,
}

impl Lowerer {
    fn push1(&mut self, kind: GateKind, q: usize) {
        if let GateKind::RZ(a) | GateKind::RY(a) = kind {
            if near_zero_angle(a) {
                return;
            }
        }
        self.out
            .push(GateInstance::single(kind, q).expect("single-qubit gate"));
    }

    fn cx(&mut self, c: usize, t: usize) {
        self.out.push(GateInstance::cnot(c, t).expect("distinct wires"));
    }

    /// Arbitrary 1q unitary as RZ·RY·RZ (global phase dropped).
    fn unitary1(&mut self, u: &Mat2, q: usize) {
        let (_, beta, gamma, delta) = zyz(u);
        self.push1(GateKind::RZ(delta), q);
        self.push1(GateKind::RY(gamma), q);
        self.push1(GateKind::RZ(beta), q);
    }

    fn toffoli(&mut self, c1: usize, c2: usize, t: usize) {
        let tg = GateKind::RZ(FRAC_PI_4);
        let tdg = GateKind::RZ(-FRAC_PI_4);
        self.push1(GateKind::H, t);
        self.cx(c2, t);
        self.push1(tdg, t);
        self.cx(c1, t);
        self.push1(tg, t);
        self.cx(c2, t);
        self.push1(tdg, t);
        self.cx(c1, t);
        self.push1(tg, c2);
        self.push1(tg, t);
        self.push1(GateKind::H, t);
        self.cx(c1, c2);
        self.push1(tg, c1);
        self.push1(tdg, c2);
        self.cx(c1, c2);
    }

    /// Single-controlled arbitrary U by the A·X·B·X·C construction.
    fn controlled_unitary(&mut self, u: &Mat2, c: usize, t: usize) {
        let (alpha, beta, gamma, delta) = zyz(u);
        self.push1(GateKind::RZ((delta - beta) / 2.0), t);
        self.cx(c, t);
        self.push1(GateKind::RZ(-(delta + beta) / 2.0), t);
        self.push1(GateKind::RY(-gamma / 2.0), t);
        self.cx(c, t);
        self.push1(GateKind::RY(gamma / 2.0), t);
        self.push1(GateKind::RZ(beta), t);
        // diag(1, e^{iα}) on the control, up to global phase.
        self.push1(GateKind::RZ(alpha), c);
    }

    fn clean_for(&self, used: &[usize], need: usize) -> Option<Vec<usize>> {
        let free: Vec<usize> = self
            .clean
            .iter()
            .copied()
            .filter(|q| !used.contains(q))
            .take(need)
            .collect();
        (free.len() == need).then_some(free)
    }

    fn mcx(&mut self, controls: &[usize], t: usize) {
        match controls.len() {
            0 => self.push1(GateKind::X, t),
            1 => self.cx(controls[0], t),
            2 => self.toffoli(controls[0], controls[1], t),
            k => {
                let mut used = controls.to_vec();
                used.push(t);
                if let Some(anc) = self.clean_for(&used, k - 2) {
                    // V-chain: anc[i] = c0 ∧ … ∧ c_{i+1}.
                    self.toffoli(controls[0], controls[1], anc[0]);
                    for i in 1..k - 2 {
                        self.toffoli(controls[i + 1], anc[i - 1], anc[i]);
                    }
                    self.toffoli(controls[k - 1], anc[k - 3], t);
                    for i in (1..k - 2).rev() {
                        self.toffoli(controls[i + 1], anc[i - 1], anc[i]);
                    }
                    self.toffoli(controls[0], controls[1], anc[0]);
                } else {
                    self.multi_controlled(&op(GateKind::X), controls, t);
                }
            }
        }
    }

    /// C^k(U) by the square-root recursion.
    fn multi_controlled(&mut self, u: &Mat2, controls: &[usize], t: usize) {
        match controls.len() {
            0 => self.unitary1(u, t),
            1 => self.controlled_unitary(u, controls[0], t),
            k => {
                let v = sqrt2(u);
                let last = controls[k - 1];
                let rest = &controls[..k - 1];
                self.controlled_unitary(&v, last, t);
                self.mcx(rest, last);
                self.controlled_unitary(&dagger2(&v), last, t);
                self.mcx(rest, last);
                self.multi_controlled(&v, rest, t);
            }
        }
    }

    fn gate(&mut self, g: &GateInstance) {
        let t = g.targets[0];
        match (g.kind, g.controls.as_slice()) {
            (k, []) if k.is_two_target() => self.out.push(g.clone()),
            (k, []) => self.push1(k, t),
            (GateKind::X | GateKind::CNOT | GateKind::MCX(_), cs) => self.mcx(cs, t),
            (GateKind::CRY(l) | GateKind::RY(l), &[ctl]) => {
                self.push1(GateKind::RY(l / 2.0), t);
                self.cx(ctl, t);
                self.push1(GateKind::RY(-l / 2.0), t);
                self.cx(ctl, t);
            }
            (GateKind::CuAlt(l), &[ctl]) => {
                self.push1(GateKind::RY(-l / 2.0), t);
                self.cx(ctl, t);
                self.push1(GateKind::RY(l / 2.0), t);
            }
            (GateKind::RZ(l), &[ctl]) => {
                self.push1(GateKind::RZ(l / 2.0), t);
                self.cx(ctl, t);
                self.push1(GateKind::RZ(-l / 2.0), t);
                self.cx(ctl, t);
            }
            (k, cs) => self.multi_controlled(&op(k), cs, t),
        }
    }
}

/// Rewrites every gate into uncontrolled 1q gates, CNOTs and two-target
/// primitives. Qubits listed in the `clean_ancillas` metadata are assumed to
/// be |0⟩ whenever a gate that does not touch them is lowered.
pub fn lower(c: &Circuit) -> Result<Circuit> {
    let clean = c
        .metadata
        .get("clean_ancillas")
        .map(|s| {
            s.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidCircuit(format!("bad clean_ancillas entry '{x}'")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();
    let mut l = Lowerer {
        out: Vec::new(),
        clean,
    };
    for g in c.gates() {
        l.gate(g);
    }
    let mut out = c.clone();
    out.set_gates(l.out)?;
    Ok(out)
}

/// A routed circuit plus where each logical qubit ended up.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// `layout[logical] = physical` after the last gate.
    pub layout: Vec<usize>,
}

impl Routed {
    pub fn final_position(&self, logical: usize) -> usize {
        self.layout[logical]
    }
}

/// Greedy SWAP insertion on the line 0–1–…–(w−1), starting from the trivial
/// layout. Each non-adjacent two-qubit gate moves its first qubit toward
/// the second until they touch.
pub fn route_linear(c: &Circuit) -> Result<Routed> {
    let w = c.width();
    let mut layout: Vec<usize> = (0..w).collect();
    let mut inverse: Vec<usize> = (0..w).collect();
    let mut out = Vec::new();
    for g in c.gates() {
        let qs: Vec<usize> = g.qubits().collect();
        match qs.len() {
            1 => out.push(g.remapped(&layout)),
            2 => {
                let target_phys = layout[qs[1]];
                while layout[qs[0]].abs_diff(target_phys) > 1 {
                    let p = layout[qs[0]];
                    let next = if p < target_phys { p + 1 } else { p - 1 };
                    out.push(GateInstance::pair(GateKind::SWAP, p, next)?);
                    let (la, lb) = (inverse[p], inverse[next]);
                    layout.swap(la, lb);
                    inverse.swap(p, next);
                }
                out.push(g.remapped(&layout));
            }
            _ => {
                return Err(Error::InvalidCircuit(format!(
                    "cannot route {}-qubit gate {}; lower it first",
                    qs.len(),
                    g.kind.name()
                )))
            }
        }
    }
    let mut circuit = c.clone();
    circuit.set_gates(out)?;
    if let Some(a) = c.ancilla() {
        circuit.set_ancilla(Some(layout[a]))?;
    }
    Ok(Routed { circuit, layout })
}

struct Dressing {
    pre: (Mat2, Mat2),
    post: (Mat2, Mat2),
}

fn prod(kinds: &[GateKind]) -> Mat2 {
    // Matrix product in written order (rightmost acts first).
    kinds.iter().fold(ID2, |acc, &k| mul2(&acc, &op(k)))
}

/// CNOT(c→t) ∝ (post.0 ⊗ post.1) · N(c, t) · (pre.0 ⊗ pre.1).
fn dressing(basis: Basis) -> Dressing {
    let rz = GateKind::RZ(FRAC_PI_2);
    match basis {
        Basis::Sc => Dressing {
            pre: (prod(&[GateKind::H, GateKind::X]), prod(&[GateKind::H])),
            post: (
                prod(&[rz, GateKind::X, GateKind::H]),
                prod(&[GateKind::H, rz, GateKind::X]),
            ),
        },
        Basis::Ion => Dressing {
            pre: (prod(&[GateKind::H, GateKind::X]), ID2),
            post: (
                prod(&[rz, GateKind::X, GateKind::H]),
                prod(&[GateKind::H, rz, GateKind::H]),
            ),
        },
    }
}

fn native_entangler(basis: Basis) -> GateKind {
    match basis {
        Basis::Sc => GateKind::ECR,
        Basis::Ion => GateKind::RXX(FRAC_PI_2),
    }
}

/// Stream element before 1q resynthesis.
enum Item {
    One(usize, Mat2),
    Two(GateInstance),
}

fn emit_cnot(items: &mut Vec<Item>, basis: Basis, ctl: usize, t: usize) {
    let d = dressing(basis);
    items.push(Item::One(ctl, d.pre.0));
    items.push(Item::One(t, d.pre.1));
    items.push(Item::Two(
        GateInstance::pair(native_entangler(basis), ctl, t).expect("distinct wires"),
    ));
    items.push(Item::One(ctl, d.post.0));
    items.push(Item::One(t, d.post.1));
}

fn translate_two(items: &mut Vec<Item>, basis: Basis, g: &GateInstance) {
    let (a, b) = (g.targets[0], g.targets[1]);
    let h = op(GateKind::H);
    match g.kind {
        k if basis.is_native(&k) => items.push(Item::Two(g.clone())),
        GateKind::SWAP => {
            emit_cnot(items, basis, a, b);
            emit_cnot(items, basis, b, a);
            emit_cnot(items, basis, a, b);
        }
        GateKind::CZ => {
            items.push(Item::One(b, h));
            emit_cnot(items, basis, a, b);
            items.push(Item::One(b, h));
        }
        GateKind::RZZ(t) => {
            emit_cnot(items, basis, a, b);
            items.push(Item::One(b, op(GateKind::RZ(t))));
            emit_cnot(items, basis, a, b);
        }
        GateKind::RXX(t) => {
            items.push(Item::One(a, h));
            items.push(Item::One(b, h));
            emit_cnot(items, basis, a, b);
            items.push(Item::One(b, op(GateKind::RZ(t))));
            emit_cnot(items, basis, a, b);
            items.push(Item::One(a, h));
            items.push(Item::One(b, h));
        }
        GateKind::ECR => {
            // ECR ∝ (post)† · CNOT · (pre)† with the superconducting dressing.
            let d = dressing(Basis::Sc);
            items.push(Item::One(a, dagger2(&d.pre.0)));
            items.push(Item::One(b, dagger2(&d.pre.1)));
            emit_cnot(items, basis, a, b);
            items.push(Item::One(a, dagger2(&d.post.0)));
            items.push(Item::One(b, dagger2(&d.post.1)));
        }
        other => unreachable!("{} is not a two-target kind", other.name()),
    }
}

fn is_identity_up_to_phase(u: &Mat2) -> bool {
    u[0][1].norm() < 1e-10 && u[1][0].norm() < 1e-10 && (u[0][0] - u[1][1]).norm() < 1e-10
}

/// Native 1q gates for `u` in time order.
pub fn synthesize_1q(u: &Mat2, basis: Basis) -> Vec<GateKind> {
    if is_identity_up_to_phase(u) {
        return Vec::new();
    }
    let (_, phi, theta, lam) = zyz(u);
    let mut out = Vec::new();
    let rz = |out: &mut Vec<GateKind>, a: f64| {
        if !near_zero_angle(a) {
            out.push(GateKind::RZ(wrap(a)));
        }
    };
    match basis {
        Basis::Ion => {
            if theta.abs() > 1e-10 {
                out.push(GateKind::R {
                    theta,
                    phi: wrap(FRAC_PI_2 - lam),
                });
            }
            rz(&mut out, phi + lam);
        }
        Basis::Sc => {
            if theta.abs() < 1e-10 {
                rz(&mut out, phi + lam);
            } else if (theta - PI).abs() < 1e-10 {
                out.push(GateKind::X);
                rz(&mut out, phi - lam - PI);
            } else if (theta - FRAC_PI_2).abs() < 1e-10 {
                rz(&mut out, lam - FRAC_PI_2);
                out.push(GateKind::SX);
                rz(&mut out, phi + FRAC_PI_2);
            } else {
                rz(&mut out, lam);
                out.push(GateKind::SX);
                rz(&mut out, theta + PI);
                out.push(GateKind::SX);
                rz(&mut out, phi + PI);
            }
        }
    }
    out
}

fn to_native(c: &Circuit, basis: Basis) -> Result<Circuit> {
    let mut items = Vec::new();
    for g in c.gates() {
        match (g.kind, g.arity()) {
            (GateKind::CNOT, 2) => emit_cnot(&mut items, basis, g.controls[0], g.targets[0]),
            (k, 1) => items.push(Item::One(g.targets[0], op(k))),
            (k, 2) if k.is_two_target() => translate_two(&mut items, basis, g),
            _ => {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} must be lowered before translation",
                    g.kind.name()
                )))
            }
        }
    }
    let mut pending: Vec<Mat2> = vec![ID2; c.width()];
    let mut out = Vec::new();
    let flush = |q: usize, pending: &mut Vec<Mat2>, out: &mut Vec<GateInstance>| {
        for k in synthesize_1q(&pending[q], basis) {
            out.push(GateInstance::single(k, q).expect("single-qubit gate"));
        }
        pending[q] = ID2;
    };
    for it in items {
        match it {
            Item::One(q, m) => pending[q] = mul2(&m, &pending[q]),
            Item::Two(g) => {
                for q in g.targets.clone() {
                    flush(q, &mut pending, &mut out);
                }
                out.push(g);
            }
        }
    }
    for q in 0..c.width() {
        flush(q, &mut pending, &mut out);
    }
    let mut native = c.clone();
    native.set_gates(out)?;
    native.metadata.remove("clean_ancillas");
    native.metadata.insert("basis".into(), basis.label().into());
    Ok(native)
}

/// Native-basis circuit without routing.
pub fn decompose(c: &Circuit, basis: Basis) -> Result<Circuit> {
    to_native(&lower(c)?, basis)
}

/// Full pipeline; superconducting targets are routed on a line.
pub fn transpile(c: &Circuit, basis: Basis) -> Result<Routed> {
    let lowered = lower(c)?;
    let routed = if basis.needs_routing() {
        route_linear(&lowered)?
    } else {
        Routed {
            layout: (0..c.width()).collect(),
            circuit: lowered,
        }
    };
    Ok(Routed {
        circuit: to_native(&routed.circuit, basis)?,
        layout: routed.layout,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateCountReport {
    pub g1: usize,
    pub g2: usize,
    pub depth: usize,
    pub histogram: BTreeMap<String, usize>,
}

/// Longest chain of gates sharing qubits (ASAP layering).
pub fn depth(c: &Circuit) -> usize {
    let mut level = vec![0usize; c.width()];
    for g in c.gates() {
        let l = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
        for q in g.qubits() {
            level[q] = l;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

pub fn tally(c: &Circuit) -> GateCountReport {
    let mut histogram = BTreeMap::new();
    for g in c.gates() {
        *histogram.entry(g.kind.name().to_string()).or_insert(0) += 1;
    }
    GateCountReport {
        g1: c.single_qubit_count(),
        g2: c.multi_qubit_count(),
        depth: depth(c),
        histogram,
    }
}

pub fn count_report(c: &Circuit, basis: Basis) -> Result<GateCountReport> {
    Ok(tally(&transpile(c, basis)?.circuit))
}

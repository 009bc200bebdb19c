use crate::error::{Error, Result};
use crate::matrix::{c, r, CMatrix, C64, I, ONE, ZERO};
use std::f64::consts::FRAC_1_SQRT_2;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Gate vocabulary of the IR. Angles are radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    SX,
    SDag,
    RX(f64),
    RY(f64),
    RZ(f64),
    R { theta: f64, phi: f64 },
    RXX(f64),
    CNOT,
    ECR,
    CZ,
    RZZ(f64),
    SWAP,
    /// Multi-controlled X with `k` controls.
    MCX(usize),
    CRY(f64),
    /// Controlled W(λ) = cos(λ/2)·X − sin(λ/2)·Z, the one-CNOT controlled block.
    CuAlt(f64),
}

/// How many controls a kind accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlRule {
    Any,
    AtLeastOne,
    Exactly(usize),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::SDag => "s_dag",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::R { .. } => "r",
            GateKind::RXX(_) => "rxx",
            GateKind::CNOT => "cnot",
            GateKind::ECR => "ecr",
            GateKind::CZ => "cz",
            GateKind::RZZ(_) => "rzz",
            GateKind::SWAP => "swap",
            GateKind::MCX(_) => "mcx",
            GateKind::CRY(_) => "cry",
            GateKind::CuAlt(_) => "cu_alt",
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            GateKind::RX(a)
            | GateKind::RY(a)
            | GateKind::RZ(a)
            | GateKind::RXX(a)
            | GateKind::RZZ(a)
            | GateKind::CRY(a)
            | GateKind::CuAlt(a) => vec![a],
            GateKind::R { theta, phi } => vec![theta, phi],
            _ => Vec::new(),
        }
    }

    /// Builds a kind from its text name. `controls` fixes the MCX arity.
    pub fn from_name(name: &str, angles: &[f64], controls: usize) -> Result<GateKind> {
        let want = match name {
            "rx" | "ry" | "rz" | "rxx" | "rzz" | "cry" | "cu_alt" => 1,
            "r" => 2,
            _ => 0,
        };
        if angles.len() != want {
            return Err(Error::InvalidCircuit(format!(
                "gate '{name}' takes {want} angle(s), got {}",
                angles.len()
            )));
        }
        let a = angles.first().copied().unwrap_or(0.0);
        Ok(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "sx" => GateKind::SX,
            "s_dag" => GateKind::SDag,
            "rx" => GateKind::RX(a),
            "ry" => GateKind::RY(a),
            "rz" => GateKind::RZ(a),
            "r" => GateKind::R {
                theta: angles[0],
                phi: angles[1],
            },
            "rxx" => GateKind::RXX(a),
            "cnot" => GateKind::CNOT,
            "ecr" => GateKind::ECR,
            "cz" => GateKind::CZ,
            "rzz" => GateKind::RZZ(a),
            "swap" => GateKind::SWAP,
            "mcx" => GateKind::MCX(controls),
            "cry" => GateKind::CRY(a),
            "cu_alt" => GateKind::CuAlt(a),
            other => return Err(Error::UnsupportedKind(format!("unknown gate '{other}'"))),
        })
    }

    pub fn target_count(&self) -> usize {
        if self.is_two_target() {
            2
        } else {
            1
        }
    }

    /// RXX, ECR, CZ, RZZ and SWAP act on two targets and take no controls.
    pub fn is_two_target(&self) -> bool {
        matches!(
            self,
            GateKind::RXX(_) | GateKind::ECR | GateKind::CZ | GateKind::RZZ(_) | GateKind::SWAP
        )
    }

    pub fn control_rule(&self) -> ControlRule {
        match self {
            GateKind::CNOT => ControlRule::Exactly(1),
            GateKind::MCX(k) => ControlRule::Exactly(*k),
            GateKind::CRY(_) | GateKind::CuAlt(_) => ControlRule::AtLeastOne,
            k if k.is_two_target() => ControlRule::Exactly(0),
            _ => ControlRule::Any,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.angles().iter().all(|a| a.is_finite())
    }

    pub fn inverse(&self) -> Result<GateKind> {
        Ok(match *self {
            GateKind::SX | GateKind::SDag => {
                return Err(Error::NoInverse(self.name().to_string()));
            }
            GateKind::RX(a) => GateKind::RX(-a),
            GateKind::RY(a) => GateKind::RY(-a),
            GateKind::RZ(a) => GateKind::RZ(-a),
            GateKind::R { theta, phi } => GateKind::R { theta: -theta, phi },
            GateKind::RXX(a) => GateKind::RXX(-a),
            GateKind::RZZ(a) => GateKind::RZZ(-a),
            GateKind::CRY(a) => GateKind::CRY(-a),
            other => other,
        })
    }

    /// Replaces the (first) angle of a parametric kind.
    pub fn with_angle(&self, value: f64) -> GateKind {
        match *self {
            GateKind::RX(_) => GateKind::RX(value),
            GateKind::RY(_) => GateKind::RY(value),
            GateKind::RZ(_) => GateKind::RZ(value),
            GateKind::R { phi, .. } => GateKind::R { theta: value, phi },
            GateKind::RXX(_) => GateKind::RXX(value),
            GateKind::RZZ(_) => GateKind::RZZ(value),
            GateKind::CRY(_) => GateKind::CRY(value),
            GateKind::CuAlt(_) => GateKind::CuAlt(value),
            other => other,
        }
    }

    /// The 2×2 operator applied to the target once all controls are set.
    /// `None` for two-target kinds.
    pub fn target_op(&self) -> Option<Mat2> {
        let h = FRAC_1_SQRT_2;
        Some(match *self {
            GateKind::H => [[r(h), r(h)], [r(h), r(-h)]],
            GateKind::X | GateKind::CNOT | GateKind::MCX(_) => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::SX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
            GateKind::SDag => [[ONE, ZERO], [ZERO, -I]],
            GateKind::RX(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[r(co), c(0.0, -s)], [c(0.0, -s), r(co)]]
            }
            GateKind::RY(t) | GateKind::CRY(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[r(co), r(-s)], [r(s), r(co)]]
            }
            GateKind::RZ(t) => [
                [C64::from_polar(1.0, -t / 2.0), ZERO],
                [ZERO, C64::from_polar(1.0, t / 2.0)],
            ],
            GateKind::R { theta, phi } => {
                let (s, co) = (theta / 2.0).sin_cos();
                [
                    [r(co), -I * C64::from_polar(s, -phi)],
                    [-I * C64::from_polar(s, phi), r(co)],
                ]
            }
            GateKind::CuAlt(l) => {
                let (s, co) = (l / 2.0).sin_cos();
                [[r(-s), r(co)], [r(co), r(s)]]
            }
            _ => return None,
        })
    }

    /// The 4×4 operator of a two-target kind; `targets[0]` is the high bit.
    pub fn pair_op(&self) -> Option<Mat4> {
        let m = match *self {
            GateKind::RXX(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                let x = pauli_x();
                CMatrix::identity(4)
                    .scale(r(co))
                    .add(&x.kron(&x).scale(c(0.0, -s)))
            }
            GateKind::ECR => {
                let (x, y) = (pauli_x(), pauli_y());
                CMatrix::identity(2)
                    .kron(&x)
                    .sub(&x.kron(&y))
                    .scale(r(FRAC_1_SQRT_2))
            }
            GateKind::CZ => CMatrix::diagonal(&[ONE, ONE, ONE, -ONE]),
            GateKind::RZZ(t) => {
                let (a, b) = (C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0));
                CMatrix::diagonal(&[a, b, b, a])
            }
            GateKind::SWAP => CMatrix::from_real(
                4,
                &[
                    1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
                ],
            ),
            _ => return None,
        };
        Some(to_mat4(&m))
    }
}

fn pauli_x() -> CMatrix {
    CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_rows(2, vec![ZERO, -I, I, ZERO])
}

pub fn mat2_to_cmatrix(m: &Mat2) -> CMatrix {
    CMatrix::from_rows(2, m.iter().flatten().copied().collect())
}

pub fn mat4_to_cmatrix(m: &Mat4) -> CMatrix {
    CMatrix::from_rows(4, m.iter().flatten().copied().collect())
}

pub fn to_mat2(m: &CMatrix) -> Mat2 {
    assert_eq!(m.dim(), 2);
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn to_mat4(m: &CMatrix) -> Mat4 {
    assert_eq!(m.dim(), 4);
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

/// Exact unitary of a 1- or 2-qubit primitive.
///
/// Single-control kinds (CNOT, MCX(1), CRY, CU_ALT) are returned as 4×4
/// matrices with the control as the high bit.
pub fn unitary_of(kind: GateKind) -> Result<CMatrix> {
    match kind {
        GateKind::MCX(k) if k != 1 => Err(Error::UnsupportedKind(format!(
            "mcx with {k} controls has no 4x4 matrix"
        ))),
        GateKind::CNOT | GateKind::MCX(1) | GateKind::CRY(_) | GateKind::CuAlt(_) => {
            let u = mat2_to_cmatrix(&kind.target_op().expect("controlled kind has a target op"));
            let mut m = CMatrix::identity(4);
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 + i, 2 + j)] = u[(i, j)];
                }
            }
            Ok(m)
        }
        k if k.is_two_target() => Ok(mat4_to_cmatrix(&k.pair_op().expect("two-target kind"))),
        k => Ok(mat2_to_cmatrix(
            &k.target_op().expect("single-qubit kind has a target op"),
        )),
    }
}

/// One gate application: a kind together with its wires.
#[derive(Clone, Debug, PartialEq)]
pub struct GateInstance {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

impl GateInstance {
    /// Validates arity, duplicates and control/target overlap. Width is
    /// checked when the gate is pushed onto a circuit.
    pub fn new(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>) -> Result<Self> {
        if !kind.is_finite() {
            return Err(Error::InvalidCircuit(format!(
                "non-finite angle on {}",
                kind.name()
            )));
        }
        if let GateKind::MCX(0) = kind {
            return Err(Error::InvalidCircuit("mcx needs at least one control".into()));
        }
        if targets.len() != kind.target_count() {
            return Err(Error::InvalidCircuit(format!(
                "{} takes {} target(s), got {}",
                kind.name(),
                kind.target_count(),
                targets.len()
            )));
        }
        let ok = match kind.control_rule() {
            ControlRule::Any => true,
            ControlRule::AtLeastOne => !controls.is_empty(),
            ControlRule::Exactly(k) => controls.len() == k,
        };
        if !ok {
            return Err(Error::InvalidCircuit(format!(
                "{} cannot take {} control(s)",
                kind.name(),
                controls.len()
            )));
        }
        let mut all: Vec<usize> = controls.iter().chain(&targets).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCircuit(format!(
                "{} uses a qubit twice",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            controls,
            targets,
        })
    }

    pub fn single(kind: GateKind, target: usize) -> Result<Self> {
        Self::new(kind, Vec::new(), vec![target])
    }

    pub fn controlled(kind: GateKind, controls: Vec<usize>, target: usize) -> Result<Self> {
        Self::new(kind, controls, vec![target])
    }

    pub fn pair(kind: GateKind, a: usize, b: usize) -> Result<Self> {
        Self::new(kind, Vec::new(), vec![a, b])
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::CNOT, vec![control], vec![target])
    }

    pub fn mcx(controls: Vec<usize>, target: usize) -> Result<Self> {
        Self::new(GateKind::MCX(controls.len()), controls, vec![target])
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn arity(&self) -> usize {
        self.controls.len() + self.targets.len()
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            kind: self.kind.inverse()?,
            controls: self.controls.clone(),
            targets: self.targets.clone(),
        })
    }

    /// Same gate with every wire renamed through `map`.
    pub fn remapped(&self, map: &[usize]) -> Self {
        Self {
            kind: self.kind,
            controls: self.controls.iter().map(|&q| map[q]).collect(),
            targets: self.targets.iter().map(|&q| map[q]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::time_ordered;
    use std::f64::consts::PI;

    fn kron_i_left(m: &CMatrix) -> CMatrix {
        CMatrix::identity(2).kron(m)
    }

    #[test]
    fn zero_rotation_is_identity() {
        let u = unitary_of(GateKind::RY(0.0)).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn cu_alt_at_zero_is_cnot() {
        let a = unitary_of(GateKind::CuAlt(0.0)).unwrap();
        let b = unitary_of(GateKind::CNOT).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn cry_matches_two_cnot_decomposition() {
        let lam = PI / 3.0;
        let cx = unitary_of(GateKind::CNOT).unwrap();
        let ry_m = kron_i_left(&unitary_of(GateKind::RY(-lam / 2.0)).unwrap());
        let ry_p = kron_i_left(&unitary_of(GateKind::RY(lam / 2.0)).unwrap());
        let product = &(&(&cx * &ry_m) * &cx) * &ry_p;
        let cry = unitary_of(GateKind::CRY(lam)).unwrap();
        assert!(cry.max_abs_diff(&product) < 1e-12);
    }

    #[test]
    fn cu_alt_is_rotated_cnot() {
        let lam = 1.234;
        let cx = unitary_of(GateKind::CNOT).unwrap();
        let a = kron_i_left(&unitary_of(GateKind::RY(-lam / 2.0)).unwrap());
        let b = kron_i_left(&unitary_of(GateKind::RY(lam / 2.0)).unwrap());
        let u = time_ordered(&[&a, &cx, &b]);
        assert!(unitary_of(GateKind::CuAlt(lam)).unwrap().max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn cry_at_two_pi_is_z_on_control() {
        let u = unitary_of(GateKind::CRY(2.0 * PI)).unwrap();
        let z = CMatrix::diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert!(u.max_abs_diff(&z) < 1e-12);
    }

    #[test]
    fn multi_controlled_x_has_no_matrix() {
        assert!(matches!(
            unitary_of(GateKind::MCX(2)),
            Err(Error::UnsupportedKind(_))
        ));
        assert!(unitary_of(GateKind::MCX(1)).is_ok());
    }

    #[test]
    fn ecr_is_self_inverse() {
        let e = unitary_of(GateKind::ECR).unwrap();
        assert!((&e * &e).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn arity_is_enforced() {
        assert!(GateInstance::new(GateKind::CNOT, vec![], vec![1]).is_err());
        assert!(GateInstance::new(GateKind::MCX(2), vec![0], vec![1]).is_err());
        assert!(GateInstance::new(GateKind::CRY(0.1), vec![], vec![0]).is_err());
        assert!(GateInstance::new(GateKind::CZ, vec![2], vec![0, 1]).is_err());
        assert!(GateInstance::new(GateKind::H, vec![0], vec![0]).is_err());
        assert!(GateInstance::new(GateKind::RY(f64::NAN), vec![], vec![0]).is_err());
        assert!(GateInstance::new(GateKind::RY(0.3), vec![1, 2], vec![0]).is_ok());
    }

    #[test]
    fn inverse_rules() {
        assert!(GateKind::SX.inverse().is_err());
        assert!(GateKind::SDag.inverse().is_err());
        assert_eq!(GateKind::CRY(0.4).inverse().unwrap(), GateKind::CRY(-0.4));
        assert_eq!(GateKind::CuAlt(0.4).inverse().unwrap(), GateKind::CuAlt(0.4));
        let u = unitary_of(GateKind::R { theta: 0.7, phi: 0.2 }).unwrap();
        let v = unitary_of(GateKind::R { theta: 0.7, phi: 0.2 }.inverse().unwrap()).unwrap();
        assert!((&u * &v).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        let w = unitary_of(GateKind::CuAlt(0.9)).unwrap();
        assert!((&w * &w).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }
}

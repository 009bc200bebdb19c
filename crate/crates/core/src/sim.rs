//! Exact statevector and density-matrix simulation.
//!
//! Qubit `q` is bit `q` of the basis index. The density matrix is stored
//! vectorized as a `2n`-qubit vector: row bits sit at `q + n`, column bits
//! at `q`, so `ρ → UρU†` is `U` on the row bit and `conj(U)` on the column
//! bit, using the same kernels as the statevector path.

use crate::circuit::{Circuit, GateInstance, GateKind, Mat2, Mat4};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ONE, ZERO};
use crate::noise::NoiseModel;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Largest register the density-matrix path accepts.
pub const DENSITY_QUBIT_LIMIT: usize = 12;

fn apply_single(amps: &mut [C64], target: usize, cmask: usize, m: &Mat2) {
    let tbit = 1usize << target;
    let [[a, b], [c, d]] = *m;
    for i in 0..amps.len() {
        if i & tbit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tbit;
        let (x, y) = (amps[i], amps[j]);
        amps[i] = a * x + b * y;
        amps[j] = c * x + d * y;
    }
}

fn apply_x(amps: &mut [C64], target: usize, cmask: usize) {
    let tbit = 1usize << target;
    for i in 0..amps.len() {
        if i & tbit == 0 && i & cmask == cmask {
            amps.swap(i, i | tbit);
        }
    }
}

fn apply_diag(amps: &mut [C64], target: usize, cmask: usize, d0: C64, d1: C64) {
    let tbit = 1usize << target;
    for (i, z) in amps.iter_mut().enumerate() {
        if i & cmask == cmask {
            *z *= if i & tbit == 0 { d0 } else { d1 };
        }
    }
}

/// `m` acts on the local index `2·bit(qa) + bit(qb)`.
fn apply_pair(amps: &mut [C64], qa: usize, qb: usize, cmask: usize, m: &Mat4) {
    let (ba, bb) = (1usize << qa, 1usize << qb);
    for i in 0..amps.len() {
        if i & (ba | bb) != 0 || i & cmask != cmask {
            continue;
        }
        let idx = [i, i | bb, i | ba, i | ba | bb];
        let v = idx.map(|k| amps[k]);
        for (r, &k) in idx.iter().enumerate() {
            amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    }
}

fn conj2(m: &Mat2) -> Mat2 {
    m.map(|row| row.map(|z| z.conj()))
}

fn conj4(m: &Mat4) -> Mat4 {
    m.map(|row| row.map(|z| z.conj()))
}

fn mask(qs: &[usize], shift: usize) -> usize {
    qs.iter().fold(0, |m, &q| m | (1 << (q + shift)))
}

/// Applies one gate to a register whose qubit `q` lives at bit `q + shift`.
/// With `conjugate` set, the complex conjugate of the gate is applied.
fn apply_gate_shifted(amps: &mut [C64], g: &GateInstance, shift: usize, conjugate: bool) {
    let cmask = mask(&g.controls, shift);
    if let Some(m) = g.kind.pair_op() {
        let m = if conjugate { conj4(&m) } else { m };
        apply_pair(amps, g.targets[0] + shift, g.targets[1] + shift, cmask, &m);
        return;
    }
    let t = g.targets[0] + shift;
    match g.kind {
        GateKind::X | GateKind::CNOT | GateKind::MCX(_) => apply_x(amps, t, cmask),
        GateKind::RZ(a) => {
            let (d0, d1) = (C64::from_polar(1.0, -a / 2.0), C64::from_polar(1.0, a / 2.0));
            if conjugate {
                apply_diag(amps, t, cmask, d0.conj(), d1.conj())
            } else {
                apply_diag(amps, t, cmask, d0, d1)
            }
        }
        k => {
            let m = k.target_op().expect("single-target kind has a target op");
            let m = if conjugate { conj2(&m) } else { m };
            apply_single(amps, t, cmask, &m);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Self { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidCircuit(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(Self {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::matrix::norm_sqr(&self.amps)
    }

    pub fn apply(&mut self, g: &GateInstance) {
        apply_gate_shifted(&mut self.amps, g, 0, false);
    }

    /// Applies `c` in order. The circuit must not be wider than the state.
    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.width() > self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                got: c.width(),
            });
        }
        for g in c.gates() {
            self.apply(g);
        }
        Ok(())
    }

    /// Σ (−1)^bit(q) |amp|².
    pub fn expectation_z(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, z)| if i & bit == 0 { z.norm_sqr() } else { -z.norm_sqr() })
            .sum()
    }

    /// Amplitudes of the qubits `qs` (qs[0] least significant) with every
    /// other qubit fixed by `fixed` (bits outside `qs`).
    pub fn slice(&self, qs: &[usize], fixed: usize) -> Vec<C64> {
        (0..1usize << qs.len())
            .map(|k| {
                let idx = qs
                    .iter()
                    .enumerate()
                    .fold(fixed, |acc, (i, &q)| acc | (((k >> i) & 1) << q));
                self.amps[idx]
            })
            .collect()
    }
}

pub fn run_statevector(c: &Circuit) -> StateVector {
    let mut s = StateVector::zero(c.width());
    for g in c.gates() {
        s.apply(g);
    }
    s
}

pub fn ancilla_expectation_z(s: &StateVector, ancilla: usize) -> Result<f64> {
    if ancilla >= s.n {
        return Err(Error::IndexOutOfRange {
            index: ancilla,
            len: s.n,
        });
    }
    Ok(s.expectation_z(ancilla))
}

/// Shot count and seed for a sampled estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(Self { shots, seed })
    }
}

/// (n₀ − n₁)/shots with n₀ ~ Binomial(shots, (1 + z)/2).
pub fn sample_z_from<R: Rng + ?Sized>(z: f64, shots: u64, rng: &mut R) -> f64 {
    let p0 = ((1.0 + z) / 2.0).clamp(0.0, 1.0);
    let n0 = Binomial::new(shots, p0)
        .expect("p0 is clamped to [0, 1]")
        .sample(rng);
    (2.0 * n0 as f64 - shots as f64) / shots as f64
}

pub fn sample_expectation_z(s: &StateVector, ancilla: usize, cfg: ShotConfig) -> Result<f64> {
    let z = ancilla_expectation_z(s, ancilla)?;
    let mut rng = crate::rng::stream(cfg.seed, "shots");
    Ok(sample_z_from(z, cfg.shots, &mut rng))
}

/// Noise channels the density path knows how to apply.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    /// ρ → (1−p)ρ + p·Tr_Q(ρ) ⊗ I/2^|Q|.
    Depolarizing { qubits: Vec<usize>, p: f64 },
    AmplitudeDamping { qubit: usize, gamma: f64 },
    /// Phase flip with probability `p`.
    Dephasing { qubit: usize, p: f64 },
}

impl Channel {
    /// Kraus operators on the channel's own qubits (first listed qubit is the
    /// low bit).
    pub fn kraus(&self) -> Vec<CMatrix> {
        let paulis = [
            CMatrix::identity(2),
            CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
            CMatrix::from_rows(2, vec![ZERO, -crate::matrix::I, crate::matrix::I, ZERO]),
            CMatrix::diagonal(&[ONE, -ONE]),
        ];
        match self {
            Channel::Depolarizing { qubits, p } => {
                let k = qubits.len();
                let count = 1usize << (2 * k);
                (0..count)
                    .map(|idx| {
                        let mut m = CMatrix::identity(1);
                        for j in (0..k).rev() {
                            m = m.kron(&paulis[(idx >> (2 * j)) & 3]);
                        }
                        let w = if idx == 0 {
                            1.0 - p + p / count as f64
                        } else {
                            p / count as f64
                        };
                        m.scale(C64::new(w.sqrt(), 0.0))
                    })
                    .collect()
            }
            Channel::AmplitudeDamping { gamma, .. } => vec![
                CMatrix::from_real(2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]),
                CMatrix::from_real(2, &[0.0, gamma.sqrt(), 0.0, 0.0]),
            ],
            Channel::Dephasing { p, .. } => vec![
                paulis[0].scale(C64::new((1.0 - p).sqrt(), 0.0)),
                paulis[3].scale(C64::new(p.sqrt(), 0.0)),
            ],
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Channel::Depolarizing { qubits, .. } => qubits.clone(),
            Channel::AmplitudeDamping { qubit, .. } | Channel::Dephasing { qubit, .. } => {
                vec![*qubit]
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Channel::Depolarizing { p, .. } => *p == 0.0,
            Channel::AmplitudeDamping { gamma, .. } => *gamma == 0.0,
            Channel::Dephasing { p, .. } => *p == 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    vec: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        if n > DENSITY_QUBIT_LIMIT {
            return Err(Error::Capacity {
                qubits: n,
                limit: DENSITY_QUBIT_LIMIT,
            });
        }
        let mut vec = vec![ZERO; 1 << (2 * n)];
        vec[0] = ONE;
        Ok(Self { n, vec })
    }

    pub fn from_pure(s: &StateVector) -> Result<Self> {
        let n = s.num_qubits();
        let mut rho = Self::zero(n)?;
        let a = s.amplitudes();
        for r in 0..1usize << n {
            for c in 0..1usize << n {
                rho.vec[(r << n) | c] = a[r] * a[c].conj();
            }
        }
        Ok(rho)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.vec[(row << self.n) | col]
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = 1usize << self.n;
        CMatrix::from_rows(d, self.vec.clone())
    }

    pub fn trace(&self) -> C64 {
        (0..1usize << self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn apply(&mut self, g: &GateInstance) {
        apply_gate_shifted(&mut self.vec, g, self.n, false);
        apply_gate_shifted(&mut self.vec, g, 0, true);
    }

    pub fn apply_channel(&mut self, ch: &Channel) {
        let n = self.n;
        match ch {
            Channel::Depolarizing { qubits, p } => {
                if *p == 0.0 {
                    return;
                }
                let rmask = mask(qubits, n);
                let cmask = mask(qubits, 0);
                let full = rmask | cmask;
                let k = qubits.len();
                let sub = 1usize << k;
                let offsets: Vec<usize> = (0..sub)
                    .map(|s| {
                        qubits
                            .iter()
                            .enumerate()
                            .fold(0, |acc, (i, &q)| acc | (((s >> i) & 1) << q))
                    })
                    .collect();
                for base in 0..self.vec.len() {
                    if base & full != 0 {
                        continue;
                    }
                    // Scale the whole block, then add back the traced part on
                    // the diagonal.
                    let mut tr = ZERO;
                    for &o in &offsets {
                        tr += self.vec[base | (o << n) | o];
                    }
                    for &ro in &offsets {
                        for &co in &offsets {
                            self.vec[base | (ro << n) | co] *= 1.0 - p;
                        }
                    }
                    let add = tr * (*p / sub as f64);
                    for &o in &offsets {
                        self.vec[base | (o << n) | o] += add;
                    }
                }
            }
            Channel::AmplitudeDamping { qubit, gamma } => {
                let (rb, cb) = (1usize << (qubit + n), 1usize << qubit);
                let keep = (1.0 - gamma).sqrt();
                for base in 0..self.vec.len() {
                    if base & (rb | cb) != 0 {
                        continue;
                    }
                    let p11 = self.vec[base | rb | cb];
                    self.vec[base] += p11 * *gamma;
                    self.vec[base | rb | cb] = p11 * (1.0 - gamma);
                    self.vec[base | rb] *= keep;
                    self.vec[base | cb] *= keep;
                }
            }
            Channel::Dephasing { qubit, p } => {
                let (rb, cb) = (1usize << (qubit + n), 1usize << qubit);
                let f = 1.0 - 2.0 * p;
                for (i, z) in self.vec.iter_mut().enumerate() {
                    if ((i & rb) != 0) != ((i & cb) != 0) {
                        *z *= f;
                    }
                }
            }
        }
    }

    pub fn expectation_z(&self, q: usize) -> f64 {
        (0..1usize << self.n)
            .map(|i| {
                let p = self.get(i, i).re;
                if i & (1 << q) == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }
}

/// ρ after each gate followed by the channels the model attaches to it.
pub fn run_density(c: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::zero(c.width())?;
    for g in c.gates() {
        rho.apply(g);
        for ch in noise.channels_for(g)? {
            rho.apply_channel(&ch);
        }
    }
    Ok(rho)
}

/// Full 2ⁿ×2ⁿ unitary of a circuit, column by column. Test oracle only.
pub fn circuit_unitary(c: &Circuit) -> CMatrix {
    let d = 1usize << c.width();
    let mut m = CMatrix::zeros(d);
    for col in 0..d {
        let mut amps = vec![ZERO; d];
        amps[col] = ONE;
        let mut s = StateVector {
            n: c.width(),
            amps,
        };
        for g in c.gates() {
            s.apply(g);
        }
        for (row, z) in s.amps.iter().enumerate() {
            m[(row, col)] = *z;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn circuit(width: usize, gates: &[(GateKind, &[usize], &[usize])]) -> Circuit {
        let mut c = Circuit::new(width).unwrap();
        for (k, cs, ts) in gates {
            c.add(*k, cs, ts).unwrap();
        }
        c
    }

    #[test]
    fn hadamard_gives_equal_superposition() {
        let s = run_statevector(&circuit(1, &[(GateKind::H, &[], &[0])]));
        for z in s.amplitudes() {
            assert!((z.re - FRAC_1_SQRT_2).abs() < 1e-15 && z.im == 0.0);
        }
        assert!(ancilla_expectation_z(&s, 0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn trivial_hadamard_test_reads_one() {
        let s = run_statevector(&circuit(
            2,
            &[(GateKind::H, &[], &[0]), (GateKind::H, &[], &[0])],
        ));
        assert!((ancilla_expectation_z(&s, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_test_of_rz_reads_cosine() {
        let theta = std::f64::consts::FRAC_PI_2;
        let s = run_statevector(&circuit(
            2,
            &[
                (GateKind::H, &[], &[0]),
                (GateKind::X, &[], &[1]),
                (GateKind::RZ(theta), &[0], &[1]),
                (GateKind::H, &[], &[0]),
            ],
        ));
        // Register in |1>: RZ gives e^{+iθ/2}, whose real part is cos(θ/2)
        // just like the |0> case.
        let z = ancilla_expectation_z(&s, 0).unwrap();
        assert!((z - (theta / 2.0).cos()).abs() < 1e-14);
        assert!((z - FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn toffoli_truth_table() {
        for input in 0..8usize {
            let mut c = Circuit::new(3).unwrap();
            for q in 0..3 {
                if input >> q & 1 == 1 {
                    c.add(GateKind::X, &[], &[q]).unwrap();
                }
            }
            c.add(GateKind::MCX(2), &[0, 1], &[2]).unwrap();
            let s = run_statevector(&c);
            let expected = if input & 3 == 3 { input ^ 4 } else { input };
            assert!((s.amplitudes()[expected] - ONE).norm() < 1e-15, "input {input}");
        }
    }

    #[test]
    fn ancilla_out_of_range() {
        let s = StateVector::zero(2);
        assert!(ancilla_expectation_z(&s, 2).is_err());
    }

    #[test]
    fn certain_outcome_samples_exactly() {
        let s = StateVector::zero(2);
        for seed in 0..20 {
            let z = sample_expectation_z(&s, 0, ShotConfig::new(100, seed).unwrap()).unwrap();
            assert_eq!(z, 1.0);
        }
        assert!(ShotConfig::new(0, 1).is_err());
    }

    #[test]
    fn single_shot_is_plus_minus_one() {
        let s = run_statevector(&circuit(1, &[(GateKind::H, &[], &[0])]));
        for seed in 0..50 {
            let z = sample_expectation_z(&s, 0, ShotConfig::new(1, seed).unwrap()).unwrap();
            assert!(z == 1.0 || z == -1.0);
        }
    }

    #[test]
    fn noiseless_density_matches_projector() {
        let c = circuit(
            3,
            &[
                (GateKind::H, &[], &[0]),
                (GateKind::RY(0.4), &[0], &[1]),
                (GateKind::ECR, &[], &[1, 2]),
                (GateKind::R { theta: 0.3, phi: 1.1 }, &[], &[2]),
                (GateKind::RZ(0.9), &[1], &[0]),
            ],
        );
        let s = run_statevector(&c);
        let rho = run_density(&c, &NoiseModel::noiseless()).unwrap();
        let pure = DensityMatrix::from_pure(&s).unwrap();
        assert!(rho.to_matrix().max_abs_diff(&pure.to_matrix()) < 1e-12);
        assert!((rho.expectation_z(0) - s.expectation_z(0)).abs() < 1e-12);
    }

    #[test]
    fn depolarized_x_mixes_toward_identity() {
        let p = 0.1;
        let mut rho = DensityMatrix::zero(1).unwrap();
        rho.apply(&GateInstance::single(GateKind::X, 0).unwrap());
        rho.apply_channel(&Channel::Depolarizing {
            qubits: vec![0],
            p,
        });
        assert!((rho.get(1, 1).re - (1.0 - p + p / 2.0)).abs() < 1e-15);
        assert!((rho.get(0, 0).re - p / 2.0).abs() < 1e-15);
        assert_eq!(rho.get(0, 1), ZERO);
    }

    #[test]
    fn channel_kernels_match_kraus_sums() {
        let c = circuit(
            2,
            &[
                (GateKind::H, &[], &[0]),
                (GateKind::RY(0.7), &[0], &[1]),
                (GateKind::RX(0.3), &[], &[1]),
            ],
        );
        let s = run_statevector(&c);
        let channels = [
            Channel::Depolarizing {
                qubits: vec![1],
                p: 0.2,
            },
            Channel::Depolarizing {
                qubits: vec![0, 1],
                p: 0.3,
            },
            Channel::AmplitudeDamping {
                qubit: 0,
                gamma: 0.25,
            },
            Channel::Dephasing { qubit: 1, p: 0.1 },
        ];
        for ch in channels {
            let mut rho = DensityMatrix::from_pure(&s).unwrap();
            rho.apply_channel(&ch);
            let dense = DensityMatrix::from_pure(&s).unwrap().to_matrix();
            let mut expected = CMatrix::zeros(4);
            for k in ch.kraus() {
                // Embed on the full register; only supports the listed layouts.
                let full = match ch.qubits().as_slice() {
                    [0] => CMatrix::identity(2).kron(&k),
                    [1] => k.kron(&CMatrix::identity(2)),
                    [0, 1] => k,
                    _ => unreachable!(),
                };
                expected = expected.add(&(&(&full * &dense) * &full.dagger()));
            }
            assert!(
                rho.to_matrix().max_abs_diff(&expected) < 1e-12,
                "{ch:?}"
            );
        }
    }

    #[test]
    fn density_capacity_is_guarded() {
        assert!(matches!(
            DensityMatrix::zero(13),
            Err(Error::Capacity { qubits: 13, .. })
        ));
    }
}

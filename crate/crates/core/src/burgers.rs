//! Discretized 1D viscous Burgers' equation and its variational cost.
//!
//! With `u = Λ·ψ` and the decrementer Â (`(Âψ)_k = ψ_{k+1}`), one explicit
//! Euler step reads
//!
//! ```text
//! Λ' ψ' = [Λ + l1 (Â + Â† − 2I) − l2 D (Â − Â†)] ψ,   D = diag(ψ)
//! l1 = Λ τ ν / (2 δx²),   l2 = |Λ|² τ / (2 δx)
//! ```
//!
//! and eliminating Λ' leaves `C = −S²` with
//! `S = (Λ − 2 l1)·Re⟨ψ|ψ_λ⟩ + l1·Re⟨ψ|(Â+Â†)ψ_λ⟩ + l2·Re⟨ψ|(Â−Â†)D ψ_λ⟩`.

use crate::ansatz::prepared_state;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hadamard::{
    adder_matrix, build_gterm_circuit, estimate_circuit, AdderSpec, Direction, EstimatorMode,
    GTermKind,
};
use crate::matrix::{CMatrix, C64};
use crate::rng::child_seed;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct BurgersGrid {
    /// Left edge of the periodic domain.
    pub a: f64,
    /// Right edge (identified with `a`).
    pub b: f64,
    /// Qubits; the grid has 2ⁿ points.
    pub n: usize,
    pub tau: f64,
    pub nu: f64,
}

impl BurgersGrid {
    pub fn new(a: f64, b: f64, n: usize, tau: f64, nu: f64) -> Result<Self> {
        if !(b > a) || !(tau > 0.0) || n == 0 || n > 20 || !(nu >= 0.0) {
            return Err(Error::Config(format!(
                "invalid grid: [{a}, {b}], n={n}, tau={tau}, nu={nu}"
            )));
        }
        Ok(Self { a, b, n, tau, nu })
    }

    pub fn points(&self) -> usize {
        1 << self.n
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.points() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.a + self.dx() * k as f64
    }

    pub fn coefficients(&self, lambda: f64) -> CostCoefficients {
        let dx = self.dx();
        CostCoefficients {
            l1: lambda * self.tau * self.nu / (2.0 * dx * dx),
            l2: lambda * lambda * self.tau / (2.0 * dx),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostCoefficients {
    pub l1: f64,
    pub l2: f64,
}

/// Velocity field `u = Λ·ψ`, with ψ produced by `circuit` (ancilla on, see
/// `ansatz::prepared_state`). Λ is signed so that `Λ·ψ` keeps the physical
/// sign whatever global sign the circuit picks.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub lambda: f64,
    pub psi: Vec<f64>,
    pub circuit: Circuit,
}

impl FieldState {
    pub fn from_circuit(lambda: f64, circuit: Circuit) -> Result<Self> {
        let psi = prepared_state(&circuit)?;
        Ok(Self {
            lambda,
            psi,
            circuit,
        })
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.psi.iter().map(|p| self.lambda * p).collect()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `u₀(x) = amplitude·exp(−(x−center)²/(2σ²))` sampled on the grid; returns
/// `(Λ₀, ψ₀)` with `Λ₀ = ‖u₀‖`.
pub fn initial_condition_gaussian(
    grid: &BurgersGrid,
    sigma: f64,
    center: f64,
    amplitude: f64,
) -> Result<(f64, Vec<f64>)> {
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    let u: Vec<f64> = (0..grid.points())
        .map(|k| {
            let d = grid.x(k) - center;
            amplitude * (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let l = norm(&u);
    if l == 0.0 {
        return Err(Error::Config("initial field is identically zero".into()));
    }
    Ok((l, u.iter().map(|x| x / l).collect()))
}

/// One explicit step on the raw velocity vector, diffusion weighted by
/// `τν/(2δx²)` to agree with the operator form above.
pub fn classical_step(grid: &BurgersGrid, u: &[f64]) -> Vec<f64> {
    let m = u.len();
    let dx = grid.dx();
    let kd = grid.tau * grid.nu / (2.0 * dx * dx);
    let ka = grid.tau / (2.0 * dx);
    (0..m)
        .map(|k| {
            let up = u[(k + 1) % m];
            let um = u[(k + m - 1) % m];
            u[k] + kd * (up + um - 2.0 * u[k]) - ka * u[k] * (up - um)
        })
        .collect()
}

/// Dense `Λ + l1(Â+Â†−2I) − l2·D(Â−Â†)` for the state `(Λ, ψ)`.
pub fn step_operator(grid: &BurgersGrid, lambda: f64, psi: &[f64]) -> CMatrix {
    let n = grid.n;
    let cc = grid.coefficients(lambda);
    let ap = adder_matrix(AdderSpec {
        n,
        direction: Direction::Plus,
    });
    let am = adder_matrix(AdderSpec {
        n,
        direction: Direction::Minus,
    });
    let dim = psi.len();
    let id = CMatrix::identity(dim);
    let d = CMatrix::diagonal(&psi.iter().map(|&p| C64::new(p, 0.0)).collect::<Vec<_>>());
    let lap = ap.add(&am).sub(&id.scale(C64::new(2.0, 0.0)));
    let grad = &d * &ap.sub(&am);
    id.scale(C64::new(lambda, 0.0))
        .add(&lap.scale(C64::new(cc.l1, 0.0)))
        .sub(&grad.scale(C64::new(cc.l2, 0.0)))
}

/// The five Hadamard-test expectation values behind one cost evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GTermValues {
    pub overlap: f64,
    pub shift_plus: f64,
    pub shift_minus: f64,
    pub diag_plus: f64,
    pub diag_minus: f64,
}

impl GTermValues {
    /// `[G1, G2, G3]`.
    pub fn weighted(&self, lambda_t: f64, cc: CostCoefficients) -> [f64; 3] {
        [
            (lambda_t - 2.0 * cc.l1) * self.overlap,
            cc.l1 * (self.shift_plus + self.shift_minus),
            cc.l2 * (self.diag_plus - self.diag_minus),
        ]
    }
}

/// Hands out per-circuit seeds so every estimate draws from its own stream.
#[derive(Clone, Debug)]
pub struct Estimator {
    pub mode: EstimatorMode,
    seed: u64,
    counter: u64,
}

impl Estimator {
    pub fn new(mode: EstimatorMode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            counter: 0,
        }
    }

    pub fn exact() -> Self {
        Self::new(EstimatorMode::Exact, 0)
    }

    pub fn estimate(&mut self, c: &Circuit) -> Result<f64> {
        if self.mode.is_exact() {
            return estimate_circuit(c, &self.mode);
        }
        let s = child_seed(self.seed, self.counter);
        self.counter += 1;
        estimate_circuit(c, &self.mode.reseeded(s))
    }

    pub fn evaluations(&self) -> u64 {
        self.counter
    }
}

pub fn estimate_gterms(
    prev: &FieldState,
    u_lambda: &Circuit,
    est: &mut Estimator,
) -> Result<GTermValues> {
    let mut v = [0.0; 5];
    for (slot, kind) in v.iter_mut().zip(GTermKind::ALL) {
        let c = build_gterm_circuit(kind, &prev.circuit, u_lambda)?;
        *slot = est.estimate(&c)?;
    }
    Ok(GTermValues {
        overlap: v[0],
        shift_plus: v[1],
        shift_minus: v[2],
        diag_plus: v[3],
        diag_minus: v[4],
    })
}

/// Bracket `S = G1 + G2 + G3`; the cost is `−S²` and the next Λ is `S`.
pub fn bracket(grid: &BurgersGrid, prev: &FieldState, u_lambda: &Circuit, est: &mut Estimator) -> Result<f64> {
    let g = estimate_gterms(prev, u_lambda, est)?;
    Ok(g.weighted(prev.lambda, grid.coefficients(prev.lambda)).iter().sum())
}

pub fn evaluate_cost_direct(
    grid: &BurgersGrid,
    prev: &FieldState,
    u_lambda: &Circuit,
    est: &mut Estimator,
) -> Result<f64> {
    let s = bracket(grid, prev, u_lambda, est)?;
    Ok(-s * s)
}

/// Signed norm update: `|Λ_{t+τ}| = √|C|`, sign taken from the bracket.
pub fn lambda_update(bracket: f64) -> f64 {
    bracket
}

/// `1 − |⟨a|b⟩|²` after normalizing both vectors.
pub fn infidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidCircuit("zero vector in infidelity".into()));
    }
    let ov: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    Ok((1.0 - ov * ov).clamp(0.0, 1.0))
}

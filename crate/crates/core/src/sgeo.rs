//! Sequential grid-based explicit optimization.
//!
//! Every cost handled here is `C = −S²` where `S` depends on a single angle
//! λ_j as `S(λ) = K + A·cos(λ/2) + B·sin(λ/2)`. Three evaluations at
//! λ_j ∈ {0, π, 2π} therefore fix the whole slice:
//!
//! ```text
//! S(λ) = ½[(1 + cos(λ/2) − sin(λ/2))·S₀ + 2 sin(λ/2)·S_π + (1 − cos(λ/2) − sin(λ/2))·S₂π]
//! ```

use crate::ansatz::{bind_parameter, build_ansatz, prepared_state, AnsatzSpec, ParamVector};
use crate::burgers::{bracket, BurgersGrid, Estimator, FieldState};
use crate::error::{Error, Result};
use crate::rng;
use rand::Rng;
use serde::Deserialize;
use std::f64::consts::PI;

pub const BINDINGS: [f64; 3] = [0.0, PI, 2.0 * PI];

/// `(c₀, c_π, c₂π)` at λ.
pub fn coefficients(lambda: f64) -> [f64; 3] {
    let (s, c) = (lambda / 2.0).sin_cos();
    [0.5 * (1.0 + c - s), s, 0.5 * (1.0 - c - s)]
}

pub fn reconstruct_bracket(bundle: [f64; 3], lambda: f64) -> f64 {
    let k = coefficients(lambda);
    k[0] * bundle[0] + k[1] * bundle[1] + k[2] * bundle[2]
}

/// `bundle` holds `S = G1 + G2 + G3` at the three bindings.
pub fn reconstruct_cost(bundle: [f64; 3], lambda: f64) -> f64 {
    let s = reconstruct_bracket(bundle, lambda);
    -s * s
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Scan points over `[−span, span)`.
    pub grid_points: usize,
    pub sweeps: usize,
    /// Stop once a full sweep improves the cost by less than this.
    pub tol: f64,
    /// Half-width of the scanned interval.
    pub span: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid_points: 64,
            sweeps: 10,
            tol: 1e-8,
            // RY(λ) uses half-angles, so the slice has period 4π.
            span: 2.0 * PI,
        }
    }
}

impl SweepConfig {
    pub fn sampled() -> Self {
        Self {
            tol: 1e-4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 || self.sweeps == 0 || !(self.span > 0.0) || !(self.tol >= 0.0) {
            return Err(Error::Config(format!("invalid sweep config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub sweep: usize,
    pub param: usize,
    pub value: f64,
    pub cost: f64,
    pub bracket: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub params: ParamVector,
    pub cost: f64,
    /// `S` at `params`; the next Λ in a Burgers step.
    pub bracket: f64,
    pub trace: Vec<TraceRow>,
    pub sweeps_run: usize,
}

/// Minimizes the reconstructed slice on the scan grid (plus the current
/// value), then refines with golden-section search around the winner.
pub fn minimize_slice(bundle: [f64; 3], current: f64, cfg: &SweepConfig) -> (f64, f64) {
    let f = |x: f64| reconstruct_cost(bundle, x);
    let step = 2.0 * cfg.span / cfg.grid_points as f64;
    let mut best = (current, f(current));
    for i in 0..cfg.grid_points {
        let x = -cfg.span + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut x = 0.5 * (lo + hi);
    if cfg.span >= 2.0 * PI {
        // The slice has period 4π.
        x = (x + 2.0 * PI).rem_euclid(4.0 * PI) - 2.0 * PI;
    }
    let v = f(x);
    if v < best.1 && (-cfg.span..cfg.span).contains(&x) {
        best = (x, v);
    }
    best
}

/// Coordinate descent driven by a bracket oracle `S(params)`.
pub fn coordinate_descent<F>(init: &[f64], cfg: &SweepConfig, mut bracket_of: F) -> Result<SweepResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if init.is_empty() {
        return Err(Error::Config("no parameters to optimize".into()));
    }
    let mut params = init.to_vec();
    let mut trace = Vec::new();
    let mut history: Vec<(ParamVector, f64, f64)> = Vec::new();
    let mut sweep_start_cost = f64::INFINITY;
    let mut sweeps_run = 0;
    for sweep in 0..cfg.sweeps {
        sweeps_run = sweep + 1;
        for j in 0..params.len() {
            let mut bundle = [0.0; 3];
            for (b, &x) in bundle.iter_mut().zip(&BINDINGS) {
                *b = bracket_of(&bind_parameter(&params, j, x)?)?;
            }
            let (x, cost) = minimize_slice(bundle, params[j], cfg);
            params[j] = x;
            let s = reconstruct_bracket(bundle, x);
            trace.push(TraceRow {
                sweep,
                param: j,
                value: x,
                cost,
                bracket: s,
            });
            history.push((params.clone(), cost, s));
        }
        let end_cost = history.last().map(|h| h.1).unwrap_or(f64::INFINITY);
        if sweep_start_cost - end_cost < cfg.tol {
            break;
        }
        sweep_start_cost = end_cost;
    }
    // Best of the last five parameter updates.
    let tail = &history[history.len().saturating_sub(5)..];
    let (p, cost, s) = tail
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .expect("at least one update");
    Ok(SweepResult {
        params: p,
        cost,
        bracket: s,
        trace,
        sweeps_run,
    })
}

/// One Burgers time step: optimizes the ansatz against the cost built on
/// `prev`, warm-started from `init`.
pub fn optimize_step(
    grid: &BurgersGrid,
    prev: &FieldState,
    spec: &AnsatzSpec,
    init: &[f64],
    cfg: &SweepConfig,
    est: &mut Estimator,
) -> Result<SweepResult> {
    if spec.n != grid.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            got: spec.n,
        });
    }
    coordinate_descent(init, cfg, |p| {
        let u = build_ansatz(spec, p)?;
        bracket(grid, prev, &u, est)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub params: ParamVector,
    pub infidelity: f64,
    pub restarts_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub sweep: SweepConfig,
    /// Random restarts after the first attempt.
    pub restarts: usize,
    /// Stop restarting once this infidelity is reached.
    pub threshold: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            sweep: SweepConfig {
                sweeps: 200,
                tol: 1e-14,
                ..SweepConfig::default()
            },
            restarts: 20,
            threshold: 1e-6,
        }
    }
}

/// Fits the ansatz to `target` by maximizing `Re⟨target|ψ_λ⟩²`. Missing the
/// threshold is reported through `infidelity`, not as an error.
pub fn fit_initial_state(
    target: &[f64],
    spec: &AnsatzSpec,
    cfg: &FitConfig,
    seed: u64,
) -> Result<FitResult> {
    let dim = 1usize << spec.n;
    if target.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let tn = crate::burgers::norm(target);
    let t: Vec<f64> = target.iter().map(|x| x / tn).collect();
    let overlap = |p: &[f64]| -> Result<f64> {
        let psi = prepared_state(&build_ansatz(spec, p)?)?;
        Ok(psi.iter().zip(&t).map(|(a, b)| a * b).sum())
    };
    let mut rng = rng::stream(seed, "fit");
    let mut best: Option<FitResult> = None;
    for attempt in 0..=cfg.restarts {
        let init: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        let r = coordinate_descent(&init, &cfg.sweep, overlap)?;
        let inf = (1.0 - r.bracket * r.bracket).max(0.0);
        if best.as_ref().is_none_or(|b| inf < b.infidelity) {
            best = Some(FitResult {
                params: r.params,
                infidelity: inf,
                restarts_used: attempt,
            });
        }
        if inf <= cfg.threshold {
            break;
        }
    }
    Ok(best.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{Head, Variant};

    #[test]
    fn coefficient_identities() {
        assert_eq!(coefficients(0.0), [1.0, 0.0, 0.0]);
        let k = coefficients(PI);
        assert!((k[0]).abs() < 1e-15 && (k[1] - 1.0).abs() < 1e-15 && k[2].abs() < 1e-15);
        let k = coefficients(2.0 * PI);
        assert!(k[0].abs() < 1e-15 && k[1].abs() < 1e-15 && (k[2] - 1.0).abs() < 1e-15);
        let b = [0.3, -1.2, 0.8];
        assert_eq!(reconstruct_cost(b, 0.0), -0.09);
        assert!((reconstruct_cost(b, PI) + 1.44).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_interpolates_the_sinusoid() {
        let (k, a, bb) = (0.2, -0.7, 0.4);
        let s = |x: f64| k + a * (x / 2.0).cos() + bb * (x / 2.0).sin();
        let bundle = [s(0.0), s(PI), s(2.0 * PI)];
        for i in 0..50 {
            let x = -PI + i as f64 * 0.13;
            assert!((reconstruct_bracket(bundle, x) - s(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn slice_minimum_matches_dense_scan() {
        let bundle = [0.3, -0.9, 0.5];
        let cfg = SweepConfig::default();
        let (x, v) = minimize_slice(bundle, 0.0, &cfg);
        let dense = (0..200_000)
            .map(|i| reconstruct_cost(bundle, -cfg.span + 2.0 * cfg.span * i as f64 / 200_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(v <= dense + 1e-12);
        assert!((-cfg.span..cfg.span).contains(&x));
    }

    #[test]
    fn single_rotation_fit_is_exact() {
        let spec = AnsatzSpec::new(1, 1, Variant::Cry, Head::X).unwrap();
        let theta: f64 = 0.8;
        // RY(λ)|1⟩ = (−sin λ/2, cos λ/2); target matches λ = −2θ.
        let target = [theta.sin(), theta.cos()];
        let r = fit_initial_state(&target, &spec, &FitConfig::default(), 1).unwrap();
        assert!(r.infidelity <= 1e-12, "{}", r.infidelity);
    }

    #[test]
    fn planted_parameters_are_recovered() {
        let spec = AnsatzSpec::new(3, 2, Variant::Cry, Head::Ry).unwrap();
        let planted: Vec<f64> = (0..spec.param_count()).map(|i| 0.4 + 0.3 * i as f64).collect();
        let target = prepared_state(&build_ansatz(&spec, &planted).unwrap()).unwrap();
        let cfg = FitConfig {
            threshold: 1e-10,
            ..FitConfig::default()
        };
        let r = fit_initial_state(&target, &spec, &cfg, 3).unwrap();
        assert!(r.infidelity <= 1e-7, "{}", r.infidelity);
    }

    #[test]
    fn exact_trace_is_monotone() {
        let spec = AnsatzSpec::new(2, 2, Variant::Cry, Head::X).unwrap();
        let target = [0.1, 0.7, 0.5, -0.3];
        let t: Vec<f64> = target.iter().map(|x| x / crate::burgers::norm(&target)).collect();
        let r = coordinate_descent(&[0.1; 4], &SweepConfig::default(), |p| {
            let psi = prepared_state(&build_ansatz(&spec, p)?)?;
            Ok(psi.iter().zip(&t).map(|(a, b)| a * b).sum())
        })
        .unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].cost <= w[0].cost + 1e-12);
        }
    }
}

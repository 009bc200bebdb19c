//! Device calibrations and the noise models built from them.

use crate::circuit::{GateInstance, GateKind};
use crate::error::{Error, Result};
use crate::sim::Channel;
use crate::transpile::Basis;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct QubitCalibration {
    pub t1_us: f64,
    pub t2_us: f64,
    /// P(read 0 | prepared 1).
    pub p01: f64,
    /// P(read 1 | prepared 0).
    pub p10: f64,
    pub readout_error: f64,
    pub error_1q: f64,
}

/// Gate durations used by the thermal recipe only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateDurations {
    pub one_q_ns: f64,
    pub two_q_ns: f64,
}

impl GateDurations {
    pub const SUPERCONDUCTING: Self = Self {
        one_q_ns: 60.0,
        two_q_ns: 660.0,
    };
    pub const TRAPPED_ION: Self = Self {
        one_q_ns: 15_000.0,
        two_q_ns: 200_000.0,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceCalibration {
    pub name: String,
    pub basis: Basis,
    pub qubits: Vec<QubitCalibration>,
    /// Two-qubit error per coupling, keyed by (min, max).
    pub pair_errors: BTreeMap<(usize, usize), f64>,
    /// Error used for every pair when the device is fully connected.
    pub all_to_all_error: Option<f64>,
    pub durations: GateDurations,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl DeviceCalibration {
    pub fn pair_error(&self, a: usize, b: usize) -> Option<f64> {
        self.pair_errors
            .get(&key(a, b))
            .copied()
            .or(self.all_to_all_error)
    }

    pub fn is_all_to_all(&self) -> bool {
        self.all_to_all_error.is_some()
    }

    /// Qubits whose table entry has T2 > 2·T1 (unphysical; kept, not rejected).
    pub fn t2_violations(&self) -> Vec<usize> {
        self.qubits
            .iter()
            .enumerate()
            .filter(|(_, q)| q.t2_us > 2.0 * q.t1_us)
            .map(|(i, _)| i)
            .collect()
    }

    /// Same calibration with every gate error multiplied by `alpha`.
    pub fn scaled_errors(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.error_1q = (q.error_1q * alpha).min(1.0);
        }
        for e in out.pair_errors.values_mut() {
            *e = (*e * alpha).min(1.0);
        }
        out.all_to_all_error = out.all_to_all_error.map(|e| (e * alpha).min(1.0));
        out
    }

    /// Loads a calibration table. Columns:
    /// `qubit,t1_us,t2_us,p01,p10,readout_error,error_1q,pair_a,pair_b,error_2q`,
    /// probabilities as fractions. Pair columns may be empty.
    pub fn from_csv(name: &str, basis: Basis, path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            qubit: usize,
            t1_us: f64,
            t2_us: f64,
            p01: f64,
            p10: f64,
            readout_error: f64,
            error_1q: f64,
            pair_a: Option<usize>,
            pair_b: Option<usize>,
            error_2q: Option<f64>,
        }
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows: Vec<Row> = Vec::new();
        for row in reader.deserialize() {
            rows.push(row?);
        }
        rows.sort_by_key(|r| r.qubit);
        let mut qubits = Vec::new();
        let mut pair_errors = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if r.qubit != i {
                return Err(Error::Config(format!(
                    "calibration rows must cover qubits 0..{} without gaps",
                    rows.len()
                )));
            }
            for p in [r.p01, r.p10, r.readout_error, r.error_1q] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!(
                        "qubit {i}: probability {p} outside [0, 1]"
                    )));
                }
            }
            qubits.push(QubitCalibration {
                t1_us: r.t1_us,
                t2_us: r.t2_us,
                p01: r.p01,
                p10: r.p10,
                readout_error: r.readout_error,
                error_1q: r.error_1q,
            });
            if let (Some(a), Some(b), Some(e)) = (r.pair_a, r.pair_b, r.error_2q) {
                pair_errors.insert(key(a, b), e);
            }
        }
        let durations = match basis {
            Basis::Sc => GateDurations::SUPERCONDUCTING,
            Basis::Ion => GateDurations::TRAPPED_ION,
        };
        Ok(Self {
            name: name.to_string(),
            basis,
            qubits,
            pair_errors,
            all_to_all_error: None,
            durations,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    DepolOnly,
    DepolPlusThermal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Thermal {
    gamma: f64,
    dephase: f64,
}

/// Per-gate channel attachment plus per-qubit readout confusion.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NoiseModel {
    depol_1q: Vec<f64>,
    depol_2q: BTreeMap<(usize, usize), f64>,
    depol_2q_default: Option<f64>,
    thermal_1q: Vec<Option<Thermal>>,
    thermal_2q: Vec<Option<Thermal>>,
    /// (P01, P10) per qubit.
    readout: Vec<(f64, f64)>,
    noiseless: bool,
}

/// Depolarizing probability from an average gate error on `d` levels.
pub fn depolarizing_from_error(error: f64, d: usize) -> f64 {
    let d = d as f64;
    error * d / (d - 1.0)
}

fn thermal(q: &QubitCalibration, duration_ns: f64) -> Option<Thermal> {
    let t = duration_ns * 1e-3;
    let gamma = if q.t1_us.is_finite() {
        1.0 - (-t / q.t1_us).exp()
    } else {
        0.0
    };
    let rate_phi = if q.t2_us.is_finite() {
        1.0 / q.t2_us - if q.t1_us.is_finite() { 0.5 / q.t1_us } else { 0.0 }
    } else {
        0.0
    };
    // T2 > 2·T1 leaves no room for pure dephasing.
    let dephase = if rate_phi > 0.0 {
        0.5 * (1.0 - (-t * rate_phi).exp())
    } else {
        0.0
    };
    (gamma > 0.0 || dephase > 0.0).then_some(Thermal { gamma, dephase })
}

pub fn model_from_calibration(cal: &DeviceCalibration, recipe: Recipe) -> NoiseModel {
    let with_thermal = recipe == Recipe::DepolPlusThermal;
    NoiseModel {
        depol_1q: cal
            .qubits
            .iter()
            .map(|q| depolarizing_from_error(q.error_1q, 2))
            .collect(),
        depol_2q: cal
            .pair_errors
            .iter()
            .map(|(&k, &e)| (k, depolarizing_from_error(e, 4)))
            .collect(),
        depol_2q_default: cal.all_to_all_error.map(|e| depolarizing_from_error(e, 4)),
        thermal_1q: cal
            .qubits
            .iter()
            .map(|q| {
                if with_thermal {
                    thermal(q, cal.durations.one_q_ns)
                } else {
                    None
                }
            })
            .collect(),
        thermal_2q: cal
            .qubits
            .iter()
            .map(|q| {
                if with_thermal {
                    thermal(q, cal.durations.two_q_ns)
                } else {
                    None
                }
            })
            .collect(),
        readout: cal.qubits.iter().map(|q| (q.p01, q.p10)).collect(),
        noiseless: false,
    }
}

impl NoiseModel {
    /// A model that attaches nothing and reads out perfectly.
    pub fn noiseless() -> Self {
        Self {
            noiseless: true,
            ..Self::default()
        }
    }

    /// Model with only readout confusion on the given qubits.
    pub fn readout_only(readout: Vec<(f64, f64)>) -> Self {
        Self {
            readout,
            noiseless: true,
            ..Self::default()
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless && self.readout.iter().all(|&(a, b)| a == 0.0 && b == 0.0)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.depol_1q.len() {
            Err(Error::MissingQubit(q))
        } else {
            Ok(())
        }
    }

    fn push_thermal(out: &mut Vec<Channel>, q: usize, t: Option<Thermal>) {
        if let Some(t) = t {
            if t.gamma > 0.0 {
                out.push(Channel::AmplitudeDamping {
                    qubit: q,
                    gamma: t.gamma,
                });
            }
            if t.dephase > 0.0 {
                out.push(Channel::Dephasing {
                    qubit: q,
                    p: t.dephase,
                });
            }
        }
    }

    /// Channels applied right after `g`. RZ is virtual (frame change) and
    /// attracts no noise.
    pub fn channels_for(&self, g: &GateInstance) -> Result<Vec<Channel>> {
        if self.noiseless {
            return Ok(Vec::new());
        }
        if matches!(g.kind, GateKind::RZ(_)) && g.controls.is_empty() {
            return Ok(Vec::new());
        }
        let qs: Vec<usize> = g.qubits().collect();
        let mut out = Vec::new();
        match qs.as_slice() {
            &[q] => {
                self.check_qubit(q)?;
                let p = self.depol_1q[q];
                if p > 0.0 {
                    out.push(Channel::Depolarizing {
                        qubits: vec![q],
                        p,
                    });
                }
                Self::push_thermal(&mut out, q, self.thermal_1q[q]);
            }
            &[a, b] => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                let p = self
                    .depol_2q
                    .get(&key(a, b))
                    .copied()
                    .or(self.depol_2q_default)
                    .ok_or(Error::MissingCoupling(a, b))?;
                if p > 0.0 {
                    out.push(Channel::Depolarizing {
                        qubits: vec![a, b],
                        p,
                    });
                }
                Self::push_thermal(&mut out, a, self.thermal_2q[a]);
                Self::push_thermal(&mut out, b, self.thermal_2q[b]);
            }
            _ => return Err(Error::NonNativeNoisyGate(g.kind.name().to_string())),
        }
        Ok(out)
    }

    /// Confusion matrix [[1−P10, P01], [P10, 1−P01]] of qubit `q`.
    pub fn confusion(&self, q: usize) -> [[f64; 2]; 2] {
        let (p01, p10) = self.readout.get(q).copied().unwrap_or((0.0, 0.0));
        [[1.0 - p10, p01], [p10, 1.0 - p01]]
    }

    /// ⟨σz⟩ as read out through qubit `q`'s confusion matrix.
    pub fn measured_z(&self, z: f64, q: usize) -> f64 {
        let m = self.confusion(q);
        let p0 = (1.0 + z) / 2.0;
        let p0_meas = m[0][0] * p0 + m[0][1] * (1.0 - p0);
        2.0 * p0_meas - 1.0
    }
}

fn qubit(t1_us: f64, t2_us: f64, p01: f64, p10: f64, r: f64, e1: f64) -> QubitCalibration {
    QubitCalibration {
        t1_us,
        t2_us,
        p01,
        p10,
        readout_error: r,
        error_1q: e1,
    }
}

fn pairs(list: &[(usize, usize, f64)]) -> BTreeMap<(usize, usize), f64> {
    list.iter().map(|&(a, b, e)| (key(a, b), e)).collect()
}

fn ibm_brisbane() -> DeviceCalibration {
    DeviceCalibration {
        name: "ibm-brisbane".into(),
        basis: Basis::Sc,
        qubits: vec![
            qubit(230.13, 47.19, 1.07e-2, 7.03e-2, 4.05e-2, 1.98e-4),
            qubit(277.15, 216.71, 1.46e-2, 1.95e-2, 1.70e-2, 1.24e-4),
            qubit(187.00, 70.44, 1.27e-2, 0.58e-2, 0.92e-2, 2.06e-4),
            qubit(289.31, 316.62, 1.75e-2, 3.71e-2, 2.73e-2, 12.90e-4),
            qubit(327.73, 285.37, 1.22e-2, 1.56e-2, 1.39e-2, 1.90e-4),
            qubit(252.21, 216.01, 1.56e-2, 2.00e-2, 1.78e-2, 2.02e-4),
            qubit(286.37, 100.14, 0.78e-2, 1.46e-2, 1.12e-2, 1.37e-4),
            qubit(375.57, 319.88, 0.83e-2, 0.92e-2, 0.87e-2, 2.08e-4),
        ],
        pair_errors: pairs(&[
            (4, 5, 4.30e-3),
            (1, 0, 3.57e-3),
            (2, 1, 4.39e-3),
            (3, 2, 13.37e-3),
            (4, 3, 25.76e-3),
            (6, 7, 4.44e-3),
            (6, 5, 5.89e-3),
            (7, 8, 3.21e-3),
        ]),
        all_to_all_error: None,
        durations: GateDurations::SUPERCONDUCTING,
    }
}

fn ibm_sherbrook() -> DeviceCalibration {
    DeviceCalibration {
        name: "ibm-sherbrook".into(),
        basis: Basis::Sc,
        qubits: vec![
            qubit(512.8, 304.55, 0.73e-2, 0.92e-2, 0.83e-2, 4.22e-4),
            qubit(281.82, 324.96, 10.54e-2, 11.67e-2, 11.11e-2, 12.8e-4),
            qubit(224.95, 194.79, 14.74e-2, 15.82e-2, 15.28e-2, 2.31e-4),
            qubit(178.94, 214.92, 3.36e-2, 3.17e-2, 3.27e-2, 2.04e-4),
            qubit(269.13, 500.95, 3.76e-2, 2.05e-2, 2.90e-2, 1.44e-4),
            qubit(296.69, 303.84, 3.22e-2, 4.39e-2, 3.80e-2, 1.96e-4),
            qubit(124.46, 123.99, 13.28e-2, 8.88e-2, 11.08e-2, 41.9e-4),
            qubit(282.8, 162.34, 10.54e-2, 9.66e-2, 10.11e-2, 2.88e-4),
        ],
        pair_errors: pairs(&[
            (1, 0, 14.91e-3),
            (1, 2, 6.13e-3),
            (3, 2, 4.63e-3),
            (4, 3, 4.79e-3),
            (5, 4, 3.88e-3),
            (6, 5, 71.81e-3),
            (7, 6, 100.96e-3),
        ]),
        all_to_all_error: None,
        durations: GateDurations::SUPERCONDUCTING,
    }
}

/// RZZ errors of ibm-kingston per coupling. The noise model itself uses the
/// CZ column.
pub fn kingston_rzz_errors() -> BTreeMap<(usize, usize), f64> {
    pairs(&[
        (0, 1, 2.09e-3),
        (1, 2, 3.62e-3),
        (2, 3, 4.07e-3),
        (3, 4, 1.88e-3),
        (4, 5, 2.60e-3),
        (5, 6, 3.45e-3),
        (6, 7, 8.57e-3),
    ])
}

fn ibm_kingston() -> DeviceCalibration {
    DeviceCalibration {
        name: "ibm-kingston".into(),
        basis: Basis::Sc,
        qubits: vec![
            qubit(381.83, 410.94, 2.19e-2, 4.88e-2, 35.40e-3, 2.93e-4),
            qubit(318.63, 502.68, 0.83e-2, 0.73e-2, 7.81e-3, 2.77e-4),
            qubit(303.25, 116.85, 0.43e-2, 0.58e-2, 5.12e-3, 1.07e-4),
            qubit(363.83, 469.64, 0.97e-2, 0.58e-2, 7.81e-3, 3.92e-4),
            qubit(210.52, 85.45, 1.12e-2, 1.90e-2, 15.14e-3, 1.77e-4),
            qubit(406.03, 248.17, 0.73e-2, 0.34e-2, 5.37e-3, 1.14e-4),
            qubit(227.77, 117.05, 0.92e-2, 0.83e-2, 8.78e-3, 3.58e-4),
            qubit(351.20, 194.05, 3.32e-2, 2.34e-2, 28.32e-3, 2.70e-4),
        ],
        pair_errors: pairs(&[
            (0, 1, 2.08e-3),
            (1, 2, 2.42e-3),
            (2, 3, 2.52e-3),
            (3, 4, 2.13e-3),
            (4, 5, 1.48e-3),
            (5, 6, 1.46e-3),
            (6, 7, 6.98e-3),
        ]),
        all_to_all_error: None,
        durations: GateDurations::SUPERCONDUCTING,
    }
}

fn aqt_ibex() -> DeviceCalibration {
    DeviceCalibration {
        name: "aqt-ibex".into(),
        basis: Basis::Ion,
        qubits: vec![qubit(f64::INFINITY, f64::INFINITY, 0.0, 0.0, 0.0, 3e-4); 12],
        pair_errors: BTreeMap::new(),
        all_to_all_error: Some(1.3e-2),
        durations: GateDurations::TRAPPED_ION,
    }
}

pub const PROFILE_NAMES: [&str; 4] = ["ibm-brisbane", "ibm-sherbrook", "ibm-kingston", "aqt-ibex"];

pub fn builtin_profiles() -> BTreeMap<String, DeviceCalibration> {
    [ibm_brisbane(), ibm_sherbrook(), ibm_kingston(), aqt_ibex()]
        .into_iter()
        .map(|c| (c.name.clone(), c))
        .collect()
}

pub fn builtin_profile(name: &str) -> Result<DeviceCalibration> {
    builtin_profiles()
        .remove(name)
        .ok_or_else(|| Error::Config(format!("unknown noise profile '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;

    #[test]
    fn perfect_gate_gives_identity_channel() {
        assert_eq!(depolarizing_from_error(0.0, 2), 0.0);
        assert_eq!(depolarizing_from_error(0.0, 4), 0.0);
    }

    #[test]
    fn aqt_two_qubit_depolarizing_rate() {
        let p = depolarizing_from_error(1.0 - 0.987, 4);
        assert!((p - 0.01733).abs() < 1e-5, "{p}");
    }

    #[test]
    fn brisbane_q0_readout() {
        let m = model_from_calibration(&builtin_profile("ibm-brisbane").unwrap(), Recipe::DepolOnly);
        let c = m.confusion(0);
        assert_eq!(c, [[1.0 - 7.03e-2, 1.07e-2], [7.03e-2, 1.0 - 1.07e-2]]);
        assert!((m.measured_z(1.0, 0) - 0.8594).abs() < 1e-12);
    }

    #[test]
    fn table_spot_values() {
        let sher = builtin_profile("ibm-sherbrook").unwrap();
        assert_eq!(sher.pair_error(6, 5), Some(71.81e-3));
        assert_eq!(sher.pair_error(7, 6), Some(100.96e-3));
        assert_eq!(kingston_rzz_errors()[&(2, 3)], 4.07e-3);
        let aqt = builtin_profile("aqt-ibex").unwrap();
        assert!(aqt.is_all_to_all());
        assert_eq!(aqt.qubits.len(), 12);
        assert_eq!(aqt.pair_error(0, 11), Some(1.3e-2));
        let bris = builtin_profile("ibm-brisbane").unwrap();
        assert_eq!(bris.pair_error(0, 2), None);
        assert!(bris.t2_violations().is_empty());
        assert!(builtin_profile("nope").is_err());
    }

    #[test]
    fn missing_coupling_is_an_error() {
        let m = model_from_calibration(&builtin_profile("ibm-brisbane").unwrap(), Recipe::DepolOnly);
        let g = GateInstance::pair(GateKind::ECR, 0, 2).unwrap();
        assert!(matches!(m.channels_for(&g), Err(Error::MissingCoupling(0, 2))));
        let g = GateInstance::mcx(vec![0, 1], 2).unwrap();
        assert!(matches!(m.channels_for(&g), Err(Error::NonNativeNoisyGate(_))));
        let g = GateInstance::single(GateKind::SX, 9).unwrap();
        assert!(matches!(m.channels_for(&g), Err(Error::MissingQubit(9))));
    }

    #[test]
    fn rz_is_noise_free() {
        let m = model_from_calibration(&builtin_profile("ibm-brisbane").unwrap(), Recipe::DepolPlusThermal);
        let g = GateInstance::single(GateKind::RZ(0.3), 0).unwrap();
        assert!(m.channels_for(&g).unwrap().is_empty());
        let g = GateInstance::single(GateKind::SX, 0).unwrap();
        assert_eq!(m.channels_for(&g).unwrap().len(), 3);
    }

    #[test]
    fn generated_channels_are_trace_preserving() {
        for cal in builtin_profiles().values() {
            let m = model_from_calibration(cal, Recipe::DepolPlusThermal);
            let gates = [
                GateInstance::single(GateKind::SX, 1).unwrap(),
                GateInstance::pair(GateKind::ECR, 1, 2).unwrap(),
            ];
            for g in gates {
                for ch in m.channels_for(&g).unwrap() {
                    let ks = ch.kraus();
                    let d = ks[0].dim();
                    let sum = ks
                        .iter()
                        .fold(CMatrix::zeros(d), |acc, k| acc.add(&(&k.dagger() * k)));
                    assert!(sum.max_abs_diff(&CMatrix::identity(d)) < 1e-12, "{ch:?}");
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cal.csv");
        std::fs::write(
            &path,
            "qubit,t1_us,t2_us,p01,p10,readout_error,error_1q,pair_a,pair_b,error_2q\n\
             0,100,80,0.01,0.02,0.015,0.0002,0,1,0.005\n\
             1,120,90,0.01,0.03,0.02,0.0003,,,\n",
        )
        .unwrap();
        let cal = DeviceCalibration::from_csv("test", Basis::Sc, &path).unwrap();
        assert_eq!(cal.qubits.len(), 2);
        assert_eq!(cal.pair_error(1, 0), Some(0.005));
        assert_eq!(cal.qubits[1].p10, 0.03);
    }
}

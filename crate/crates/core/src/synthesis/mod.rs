//! Pulse-level synthesis of Pauli exponentials.
//!
//! Every multi-qubit factor is lowered to native `exp(i t Z_a Z_b)` pulses
//! dressed by free single-qubit rotations.

pub mod identities;
pub mod lower;
pub mod search;

use serde::{Deserialize, Serialize};

use crate::dense::{DenseUnitary, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

pub use identities::{
    depth3_decompose, depth3_times, depth4_decompose, depth4_times, depth5_decompose, depth5_times,
    Phi, DEPTH5_C, DEPTH5_TC,
};
pub use lower::{cnot_ladder, conjugation_decompose, synthesize, synthesize_term, Strategy};
pub use search::{optimality_search, ParetoFront, SearchConfig};

/// `exp(i angle P)` for a Pauli string of weight at most two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliRot {
    pub string: PauliString,
    pub angle: f64,
}

impl PauliRot {
    pub fn new(string: PauliString, angle: f64) -> Self {
        PauliRot { string, angle }
    }

    pub fn term(t: &PauliTerm, angle: f64) -> Self {
        PauliRot {
            string: t.string.clone(),
            angle: angle * t.coefficient,
        }
    }
}

/// Single-qubit rotation `exp(i angle sigma_axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub qubit: usize,
    pub axis: Pauli,
    pub angle: f64,
}

/// `exp(i time Z_a Z_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub pair: [usize; 2],
    pub time: f64,
    pub generator: Generator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    ZZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "ops")]
pub enum Layer {
    /// Applied in list order.
    Single(Vec<Rotation>),
    Pulses(Vec<Pulse>),
}

/// Layers in application order: `layers[0]` acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

/// Basis rotation `V` with `V Z V^dag = letter`, as `exp(i angle axis)`.
fn basis_from_z(letter: Pauli) -> Option<(Pauli, f64)> {
    use std::f64::consts::FRAC_PI_4;
    match letter {
        Pauli::Z | Pauli::I => None,
        Pauli::X => Some((Pauli::Y, -FRAC_PI_4)),
        Pauli::Y => Some((Pauli::X, FRAC_PI_4)),
    }
}

impl PulseSequence {
    pub fn empty(n_qubits: usize) -> Self {
        PulseSequence {
            n_qubits,
            layers: Vec::new(),
        }
    }

    fn push_single(&mut self, r: Rotation) {
        if let Some(Layer::Single(v)) = self.layers.last_mut() {
            v.push(r);
        } else {
            self.layers.push(Layer::Single(vec![r]));
        }
    }

    fn push_pulse(&mut self, p: Pulse) {
        self.layers.push(Layer::Pulses(vec![p]));
    }

    /// Lower a product of rotations (application order) of weight at most two.
    pub fn from_rotations(n_qubits: usize, rots: &[PauliRot]) -> Result<Self> {
        let mut seq = PulseSequence::empty(n_qubits);
        for r in rots {
            if r.string.n_qubits() != n_qubits {
                return Err(Error::Dimension(r.string.n_qubits(), n_qubits));
            }
            if r.angle == 0.0 {
                continue;
            }
            let sup = r.string.support();
            match sup.len() {
                0 => {}
                1 => seq.push_single(Rotation {
                    qubit: sup[0],
                    axis: r.string.get(sup[0]),
                    angle: r.angle,
                }),
                2 => {
                    let basis: Vec<(usize, Pauli, f64)> = sup
                        .iter()
                        .filter_map(|&q| basis_from_z(r.string.get(q)).map(|(a, ang)| (q, a, ang)))
                        .collect();
                    for &(q, a, ang) in &basis {
                        seq.push_single(Rotation {
                            qubit: q,
                            axis: a,
                            angle: -ang,
                        });
                    }
                    seq.push_pulse(Pulse {
                        pair: [sup[0], sup[1]],
                        time: r.angle,
                        generator: Generator::ZZ,
                    });
                    for &(q, a, ang) in &basis {
                        seq.push_single(Rotation {
                            qubit: q,
                            axis: a,
                            angle: ang,
                        });
                    }
                }
                w => {
                    return Err(Error::Precondition(format!(
                        "rotation of weight {w} is not native"
                    )))
                }
            }
        }
        Ok(seq)
    }

    pub fn pulse_layers(&self) -> impl Iterator<Item = &Vec<Pulse>> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Pulses(p) => Some(p),
            _ => None,
        })
    }

    /// Per-layer maximal `|t|`, in application order.
    pub fn layer_times(&self) -> Vec<f64> {
        self.pulse_layers()
            .map(|ps| ps.iter().fold(0.0f64, |m, p| m.max(p.time.abs())))
            .collect()
    }

    /// Per-time cost: sum over two-qubit layers of the longest pulse.
    pub fn runtime_cost(&self) -> f64 {
        self.layer_times().iter().fold(0.0, |a, t| a + t)
    }

    /// Per-gate cost: number of two-qubit layers.
    pub fn depth_cost(&self) -> usize {
        self.pulse_layers().count()
    }

    pub fn is_empty(&self) -> bool {
        self.depth_cost() == 0
    }

    /// Check that no pulse layer reuses a qubit and all times are finite.
    pub fn validate(&self) -> Result<()> {
        for ps in self.pulse_layers() {
            let mut used = vec![false; self.n_qubits];
            for p in ps {
                if !p.time.is_finite() {
                    return Err(Error::Numeric("non-finite pulse time".into()));
                }
                for &q in &p.pair {
                    if q >= self.n_qubits || used[q] {
                        return Err(Error::Precondition(format!("qubit {q} reused in a pulse layer")));
                    }
                    used[q] = true;
                }
            }
        }
        Ok(())
    }

    /// Pulses below `t_min` in magnitude (nonzero).
    pub fn short_pulses(&self, t_min: f64) -> usize {
        self.pulse_layers()
            .flatten()
            .filter(|p| p.time != 0.0 && p.time.abs() < t_min)
            .count()
    }

    /// Rewrite negative pulses as positive ones conjugated by `X` on the first qubit.
    pub fn with_nonnegative_times(&self) -> PulseSequence {
        use std::f64::consts::FRAC_PI_2;
        let mut out = PulseSequence::empty(self.n_qubits);
        for layer in &self.layers {
            match layer {
                Layer::Single(v) => {
                    for r in v {
                        out.push_single(*r);
                    }
                }
                Layer::Pulses(ps) => {
                    let flips: Vec<usize> = ps.iter().filter(|p| p.time < 0.0).map(|p| p.pair[0]).collect();
                    for &q in &flips {
                        out.push_single(Rotation { qubit: q, axis: Pauli::X, angle: FRAC_PI_2 });
                    }
                    out.layers.push(Layer::Pulses(
                        ps.iter().map(|p| Pulse { time: p.time.abs(), ..*p }).collect(),
                    ));
                    for &q in &flips {
                        out.push_single(Rotation { qubit: q, axis: Pauli::X, angle: -FRAC_PI_2 });
                    }
                }
            }
        }
        out
    }

    /// Relabel qubits through `map` into an `n`-qubit register.
    pub fn embed(&self, n: usize, map: &[usize]) -> PulseSequence {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Single(v) => Layer::Single(
                    v.iter().map(|r| Rotation { qubit: map[r.qubit], ..*r }).collect(),
                ),
                Layer::Pulses(v) => Layer::Pulses(
                    v.iter()
                        .map(|p| Pulse { pair: [map[p.pair[0]], map[p.pair[1]]], ..*p })
                        .collect(),
                ),
            })
            .collect();
        PulseSequence { n_qubits: n, layers }
    }

    pub fn unitary(&self) -> Result<DenseUnitary> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "pulse sequence verification qubits",
                needed: self.n_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let n = self.n_qubits;
        let mut u = DenseUnitary::identity(n)?;
        for layer in &self.layers {
            match layer {
                Layer::Single(v) => {
                    for r in v {
                        let s = PauliString::from_sparse(n, &[(r.qubit, r.axis)])?;
                        u.apply_pauli_exp(&PauliTerm::unit(s), r.angle)?;
                    }
                }
                Layer::Pulses(v) => {
                    for p in v {
                        let s = PauliString::from_sparse(n, &[(p.pair[0], Pauli::Z), (p.pair[1], Pauli::Z)])?;
                        u.apply_pauli_exp(&PauliTerm::unit(s), p.time)?;
                    }
                }
            }
        }
        Ok(u)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Trivial,
    Direct,
    Conjugation,
    Depth3,
    Depth4,
    Depth5,
    Recursive,
    CnotLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub target: PauliTerm,
    pub delta: f64,
    pub method: Method,
    pub sequence: PulseSequence,
    pub runtime_cost: f64,
    pub depth_cost: usize,
    /// Phase-insensitive spectral distance to the target, when computed.
    pub verification_error: Option<f64>,
    /// Set when the requested method was outside its validity range.
    pub fallback: bool,
    pub notes: Vec<String>,
}

impl SynthesisReport {
    pub(crate) fn from_sequence(target: PauliTerm, delta: f64, method: Method, sequence: PulseSequence) -> Self {
        SynthesisReport {
            runtime_cost: sequence.runtime_cost(),
            depth_cost: sequence.depth_cost(),
            target,
            delta,
            method,
            sequence,
            verification_error: None,
            fallback: false,
            notes: Vec::new(),
        }
    }

    /// Compare the compiled unitary with `exp(i delta c P)`.
    pub fn verify(&mut self) -> Result<f64> {
        let want = crate::dense::pauli_exponential(&self.target, self.delta)?;
        let got = self.sequence.unitary()?;
        let d = crate::dense::distance_up_to_phase(&got, &want)?.distance;
        self.verification_error = Some(d);
        Ok(d)
    }
}

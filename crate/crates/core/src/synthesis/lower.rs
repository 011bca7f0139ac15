//! Lowering of arbitrary Pauli exponentials to native pulses.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::identities::{depth4_exps, depth5_exps, Phi, DEPTH5_TC};
use super::{Method, PauliRot, PulseSequence, SynthesisReport};
use crate::dense::MAX_DENSE_QUBITS;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Conjugation by pi/4 pulses down to a single two-qubit pulse.
    Standard,
    /// Depth-4 / depth-5 identities, recursively.
    Subcircuit,
    /// Whichever of the two has the smaller runtime cost.
    Auto,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "conjugation" => Ok(Strategy::Standard),
            "subcircuit" => Ok(Strategy::Subcircuit),
            "auto" => Ok(Strategy::Auto),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Letter anticommuting with `p`, chosen so that the product stays in a fixed cycle.
fn anticommuting(p: Pauli) -> Pauli {
    match p {
        Pauli::Z => Pauli::X,
        Pauli::X => Pauli::Y,
        Pauli::Y => Pauli::Z,
        Pauli::I => Pauli::X,
    }
}

/// Reduce into `(-pi, pi]`.
fn wrap(t: f64) -> f64 {
    let r = t - 2.0 * PI * (t / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Weight-2 generator `h1` on the first two support qubits and `h2 = i h1 P`.
pub(crate) fn split_pair(p: &PauliTerm) -> Result<(PauliTerm, PauliTerm)> {
    let sup = p.string.support();
    if sup.len() < 3 {
        return Err(Error::Precondition("split needs weight >= 3".into()));
    }
    let (a, b) = (sup[0], sup[1]);
    let h1s = PauliString::from_sparse(
        p.n_qubits(),
        &[(a, p.string.get(a)), (b, anticommuting(p.string.get(b)))],
    )?;
    let h1 = PauliTerm::unit(h1s);
    let unit_p = PauliTerm::unit(p.string.clone());
    let h2 = h1.i_times_product(&unit_p)?;
    Ok((h1, h2))
}

fn flip_qubit(h: &PauliString) -> (usize, Pauli) {
    let q = h.support()[0];
    (q, anticommuting(h.get(q)))
}

/// Append rotations implementing `exp(i angle h)`; returns whether a fallback occurred.
pub(crate) fn exp_rots(
    h: &PauliTerm,
    angle: f64,
    strategy: Strategy,
    out: &mut Vec<PauliRot>,
    notes: &mut Vec<String>,
) -> Result<bool> {
    let theta = angle * h.coefficient;
    let k = h.string.weight();
    if k <= 2 || theta == 0.0 {
        if k > 0 && theta != 0.0 {
            out.push(PauliRot::new(h.string.clone(), theta));
        }
        return Ok(false);
    }
    let unit = PauliTerm::unit(h.string.clone());
    match strategy {
        Strategy::Standard => {
            conjugation_rots(&unit, theta, out)?;
            Ok(false)
        }
        Strategy::Subcircuit | Strategy::Auto => {
            let t = wrap(theta);
            if t < 0.0 {
                let (q, l) = flip_qubit(&h.string);
                let f = PauliString::from_sparse(h.n_qubits(), &[(q, l)])?;
                out.push(PauliRot::new(f.clone(), FRAC_PI_2));
                let fb = exp_rots(&unit, -t, strategy, out, notes)?;
                out.push(PauliRot::new(f, -FRAC_PI_2));
                return Ok(fb);
            }
            let (h1, h2) = split_pair(&unit)?;
            let exps = if k == 4 {
                if t > DEPTH5_TC {
                    notes.push(format!(
                        "t = {t:.6} exceeds depth-5 range {DEPTH5_TC:.6}; used conjugation"
                    ));
                    conjugation_rots(&unit, t, out)?;
                    return Ok(true);
                }
                depth5_exps(&h1, &h2, t, Phi::Auto)?
            } else {
                depth4_exps(&h1, &h2, t)
            };
            let mut fb = false;
            for (g, a) in &exps {
                fb |= exp_rots(g, *a, strategy, out, notes)?;
            }
            Ok(fb)
        }
    }
}

/// `exp(i t P) = e^{-i pi/4 A} e^{i t P'} e^{i pi/4 A}` applied until `P'` has weight two.
fn conjugation_rots(p: &PauliTerm, t: f64, out: &mut Vec<PauliRot>) -> Result<()> {
    if p.string.weight() <= 2 {
        if !p.string.is_identity() {
            out.push(PauliRot::term(p, t));
        }
        return Ok(());
    }
    let (a, inner) = split_pair(p)?;
    out.push(PauliRot::new(a.string.clone(), FRAC_PI_4));
    conjugation_rots(&inner, t * p.coefficient, out)?;
    out.push(PauliRot::new(a.string, -FRAC_PI_4));
    Ok(())
}

fn local_target(target: &PauliTerm) -> Result<(Vec<usize>, PauliTerm)> {
    let sup = target.string.support();
    let local = PauliTerm::new(target.string.restrict(&sup), target.coefficient)?;
    Ok((sup, local))
}

fn finish(
    target: &PauliTerm,
    delta: f64,
    method: Method,
    sup: &[usize],
    local: PauliTerm,
    rots: &[PauliRot],
    fallback: bool,
    notes: Vec<String>,
) -> Result<SynthesisReport> {
    let seq = PulseSequence::from_rotations(local.n_qubits(), rots)?;
    let mut r = SynthesisReport::from_sequence(local, delta, method, seq);
    if r.target.n_qubits() <= MAX_DENSE_QUBITS.min(10) {
        r.verify()?;
    }
    r.sequence = r.sequence.embed(target.n_qubits(), sup);
    r.target = target.clone();
    r.fallback = fallback;
    r.notes = notes;
    Ok(r)
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() {
        return Err(Error::Precondition(format!("non-finite time {delta}")));
    }
    Ok(())
}

/// Standard conjugation construction: cost `(k-2) pi/2 + |t|`, depth `2k-3`.
pub fn conjugation_decompose(target: &PauliTerm, delta: f64) -> Result<SynthesisReport> {
    check_delta(delta)?;
    let (sup, local) = local_target(target)?;
    let k = sup.len();
    let mut rots = Vec::new();
    if k >= 1 {
        conjugation_rots(&local, delta, &mut rots)?;
    }
    let method = match k {
        0 | 1 => Method::Trivial,
        2 => Method::Direct,
        _ => Method::Conjugation,
    };
    finish(target, delta, method, &sup, local, &rots, false, Vec::new())
}

/// CNOT-ladder circuit counted as pulses: each CNOT is one `pi/4` two-qubit pulse.
pub fn cnot_ladder(target: &PauliTerm, delta: f64) -> Result<SynthesisReport> {
    check_delta(delta)?;
    let (sup, local) = local_target(target)?;
    let k = sup.len();
    let mut rots = Vec::new();
    if k >= 1 {
        let theta = delta * local.coefficient;
        // basis change so every letter becomes Z
        let basis: Vec<PauliRot> = (0..k)
            .filter_map(|q| {
                let (axis, ang) = match local.string.get(q) {
                    Pauli::X => (Pauli::Y, -FRAC_PI_4),
                    Pauli::Y => (Pauli::X, FRAC_PI_4),
                    _ => return None,
                };
                Some(PauliRot::new(PauliString::from_sparse(k, &[(q, axis)]).ok()?, ang))
            })
            .collect();
        let cnot = |c: usize, t: usize, out: &mut Vec<PauliRot>| -> Result<()> {
            out.push(PauliRot::new(PauliString::from_sparse(k, &[(c, Pauli::Z), (t, Pauli::X)])?, FRAC_PI_4));
            out.push(PauliRot::new(PauliString::from_sparse(k, &[(c, Pauli::Z)])?, -FRAC_PI_4));
            out.push(PauliRot::new(PauliString::from_sparse(k, &[(t, Pauli::X)])?, -FRAC_PI_4));
            Ok(())
        };
        for b in &basis {
            rots.push(PauliRot::new(b.string.clone(), -b.angle));
        }
        for q in 0..k - 1 {
            cnot(q, q + 1, &mut rots)?;
        }
        rots.push(PauliRot::new(PauliString::from_sparse(k, &[(k - 1, Pauli::Z)])?, theta));
        for q in (0..k - 1).rev() {
            cnot(q, q + 1, &mut rots)?;
        }
        rots.extend(basis.iter().cloned());
    }
    let method = if k <= 1 { Method::Trivial } else { Method::CnotLadder };
    finish(target, delta, method, &sup, local, &rots, false, Vec::new())
}

fn subcircuit(target: &PauliTerm, delta: f64) -> Result<SynthesisReport> {
    let (sup, local) = local_target(target)?;
    let k = sup.len();
    let mut rots = Vec::new();
    let mut notes = Vec::new();
    let fallback = if k >= 1 {
        exp_rots(&local, delta, Strategy::Subcircuit, &mut rots, &mut notes)?
    } else {
        false
    };
    let method = match (k, fallback) {
        (0 | 1, _) => Method::Trivial,
        (2, _) => Method::Direct,
        (4, true) => Method::Conjugation,
        (3, _) => Method::Depth4,
        (4, _) => Method::Depth5,
        _ => Method::Recursive,
    };
    finish(target, delta, method, &sup, local, &rots, fallback, notes)
}

/// Compile `exp(i delta c P)`.
pub fn synthesize(target: &PauliTerm, delta: f64, strategy: Strategy) -> Result<SynthesisReport> {
    check_delta(delta)?;
    match strategy {
        Strategy::Standard => conjugation_decompose(target, delta),
        Strategy::Subcircuit => subcircuit(target, delta),
        Strategy::Auto => {
            let a = conjugation_decompose(target, delta)?;
            let b = subcircuit(target, delta)?;
            Ok(if b.runtime_cost < a.runtime_cost { b } else { a })
        }
    }
}

/// Parse a Pauli string and compile it.
pub fn synthesize_term(pauli: &str, coefficient: f64, delta: f64, strategy: Strategy) -> Result<SynthesisReport> {
    let t = PauliTerm::parse(pauli, coefficient)?;
    synthesize(&t, delta, strategy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_cost_and_depth() {
        for (s, k) in [("XYZ", 3), ("ZZZZ", 4), ("XIYZX", 4), ("YXZYX", 5)] {
            let r = conjugation_decompose(&PauliTerm::parse(s, 1.0).unwrap(), 0.3).unwrap();
            assert!(r.verification_error.unwrap() < 1e-12, "{s}");
            let want = (k as f64 - 2.0) * FRAC_PI_2 + 0.3;
            assert!((r.runtime_cost - want).abs() < 1e-12, "{s}: {}", r.runtime_cost);
            assert_eq!(r.depth_cost, 2 * k - 3);
        }
    }

    #[test]
    fn subcircuit_k3_k4_k5() {
        for s in ["XYZ", "ZXY", "YYYY", "ZXIYZ", "XZYXZ", "ZZZZZZ"] {
            for t in [0.01, 0.2, 0.33, -0.2, 1.2, 3.0, -2.5] {
                let r = synthesize_term(s, 1.0, t, Strategy::Subcircuit).unwrap();
                let e = r.verification_error.unwrap();
                assert!(e < 1e-10, "{s} t={t} err={e}");
            }
        }
    }

    #[test]
    fn k4_fallback_is_flagged() {
        let r = synthesize_term("ZZZZ", 1.0, 0.5, Strategy::Subcircuit).unwrap();
        assert!(r.fallback);
        assert_eq!(r.method, Method::Conjugation);
        assert!(!r.notes.is_empty());
        let r = synthesize_term("ZZZZ", 1.0, 0.1, Strategy::Subcircuit).unwrap();
        assert!(!r.fallback);
        assert_eq!(r.method, Method::Depth5);
        assert!(r.runtime_cost <= 7.0 * 0.1f64.cbrt());
    }

    #[test]
    fn cnot_ladder_matches_target() {
        for s in ["XY", "XYZ", "ZIXY", "YYXZZ"] {
            let r = cnot_ladder(&PauliTerm::parse(s, 0.5).unwrap(), 0.7).unwrap();
            assert!(r.verification_error.unwrap() < 1e-12, "{s}");
            let k = s.chars().filter(|&c| c != 'I').count();
            assert_eq!(r.depth_cost, 2 * (k - 1));
            assert!((r.runtime_cost - (k - 1) as f64 * FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_support() {
        let r = synthesize_term("IXIIZIY", 1.0, 0.1, Strategy::Auto).unwrap();
        assert_eq!(r.sequence.n_qubits, 7);
        assert!(r.verification_error.unwrap() < 1e-12);
        let full = crate::dense::pauli_exponential(&r.target, 0.1).unwrap();
        let d = crate::dense::distance_up_to_phase(&r.sequence.unitary().unwrap(), &full).unwrap();
        assert!(d.distance < 1e-12);
    }

    #[test]
    fn trivial_and_single() {
        let r = synthesize_term("III", 1.0, 0.4, Strategy::Subcircuit).unwrap();
        assert_eq!(r.method, Method::Trivial);
        assert_eq!(r.runtime_cost, 0.0);
        let r = synthesize_term("IXI", 1.0, 0.4, Strategy::Standard).unwrap();
        assert_eq!(r.runtime_cost, 0.0);
        assert!(r.verification_error.unwrap() < 1e-14);
    }

    #[test]
    fn auto_picks_cheaper() {
        let small = synthesize_term("XYZ", 1.0, 0.01, Strategy::Auto).unwrap();
        assert_eq!(small.method, Method::Depth4);
        let big = synthesize_term("XYZ", 1.0, 1.5, Strategy::Auto).unwrap();
        assert_eq!(big.method, Method::Conjugation);
    }
}

use proptest::prelude::*;

use subcircuit::cost::{Decomposition, ErrorModel};
use subcircuit::dense::{pauli_matrix, spectral_norm};
use subcircuit::encoding::{Encoding, FermiHubbardSpec, QubitLayout};
use subcircuit::fock::{hopping_sector_norm, norm_bound};
use subcircuit::noise::{classify_events, trivial_epsilon, trivial_q_max, Bin, NoiseEvent, NoiseSchedule, SyndromeMap};
use subcircuit::sim::split_time;
use subcircuit::synthesis::{synthesize, Strategy as Lowering};
use subcircuit::trotter::build_formula;
use subcircuit::{Pauli, PauliString, PauliTerm};

use num_complex::Complex64;

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn active() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(letter(), n).prop_map(|v| PauliString::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_matrices(a in string(3), b in string(3)) {
        let (k, ab) = a.mul(&b).unwrap();
        let phase = Complex64::new(0.0, 1.0).powu(k as u32);
        let want = pauli_matrix(&a).unwrap() * pauli_matrix(&b).unwrap();
        let got = pauli_matrix(&ab).unwrap() * phase;
        prop_assert!(spectral_norm(&(want - got)) < 1e-12);
    }

    #[test]
    fn commutation_is_symmetric_and_matches_phases(a in string(4), b in string(4)) {
        let c = a.commutes(&b).unwrap();
        prop_assert_eq!(c, b.commutes(&a).unwrap());
        let (k1, _) = a.mul(&b).unwrap();
        let (k2, _) = b.mul(&a).unwrap();
        prop_assert_eq!(c, k1 % 4 == k2 % 4);
    }

    #[test]
    fn square_is_identity(a in string(5)) {
        let (k, aa) = a.mul(&a).unwrap();
        prop_assert_eq!(k % 4, 0);
        prop_assert!(aa.is_identity());
    }

    #[test]
    fn synthesis_is_exact(
        letters in prop::collection::vec(active(), 2..=5),
        delta in 0.0f64..1.5,
        coef in prop_oneof![Just(1.0), Just(-1.0), Just(0.5)],
    ) {
        let t = PauliTerm::new(PauliString::new(letters).unwrap(), coef).unwrap();
        for s in [Lowering::Standard, Lowering::Subcircuit, Lowering::Auto] {
            let mut r = synthesize(&t, delta, s).unwrap();
            let d = r.verify().unwrap();
            prop_assert!(d < 1e-9, "{} {delta} {s:?}: {d}", t.string);
        }
    }

    #[test]
    fn auto_is_never_worse(letters in prop::collection::vec(active(), 2..=5), delta in 0.0f64..1.5) {
        let t = PauliTerm::unit(PauliString::new(letters).unwrap());
        let a = synthesize(&t, delta, Lowering::Auto).unwrap().runtime_cost;
        let s = synthesize(&t, delta, Lowering::Standard).unwrap().runtime_cost;
        let c = synthesize(&t, delta, Lowering::Subcircuit).unwrap().runtime_cost;
        prop_assert!(a <= s.min(c) + 1e-12);
    }

    #[test]
    fn three_local_cost_bound(t in 1e-6f64..=std::f64::consts::FRAC_PI_2) {
        let z = PauliTerm::parse("ZZZ", 1.0).unwrap();
        let r = synthesize(&z, t, Lowering::Subcircuit).unwrap();
        prop_assert!(r.runtime_cost <= 2.0 * (2.0 * t).sqrt() + 1e-12);
    }

    #[test]
    fn four_local_cost_bound(t in 1e-6f64..=0.33) {
        let z = PauliTerm::parse("ZZZZ", 1.0).unwrap();
        let r = synthesize(&z, t, Lowering::Subcircuit).unwrap();
        prop_assert!(r.runtime_cost <= 7.0 * t.cbrt() + 1e-12);
    }

    #[test]
    fn stage_coefficients_sum_to_one(p in prop_oneof![Just(1usize), Just(2), Just(4), Just(6)], m in 2usize..7) {
        let f = build_formula(p, m).unwrap();
        for i in 0..m {
            let s: f64 = f.coeffs.iter().map(|row| row[i]).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_bound_round_trip(v in 1.0f64..1e7, mean in 1e-6f64..20.0) {
        let q = (mean / v).min(0.5);
        let eps = trivial_epsilon(v, q);
        prop_assert!(eps > 0.0 && eps < 1.0);
        let back = trivial_q_max(v, eps);
        prop_assert!((back - q).abs() <= 1e-8 * q, "{back} vs {q}");
    }

    #[test]
    fn split_time_reassembles(t in 0.0f64..50.0, delta in 1e-3f64..2.0) {
        let (full, rem) = split_time(t, delta).unwrap();
        prop_assert!(rem >= 0.0 && rem < delta);
        prop_assert!((full as f64 * delta + rem - t).abs() <= 1e-9 * delta.max(t));
    }

    #[test]
    fn hopping_norm_respects_bound(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), pairs in 1usize..=4, n in 0usize..=8) {
        let ps: Vec<(usize, usize)> = perm.chunks(2).take(pairs).map(|c| (c[0], c[1])).collect();
        let got = hopping_sector_norm(8, &ps, n);
        prop_assert!(got <= norm_bound(8, ps.len(), n) as f64 + 1e-9);
    }
}

fn noise_setup() -> (NoiseSchedule, SyndromeMap) {
    let spec = FermiHubbardSpec::unit(2, 3).unwrap();
    let s = NoiseSchedule::build(&spec, Encoding::Compact, Decomposition::Subcircuit, ErrorModel::PerGate, 2, 0.05, 2).unwrap();
    (s, SyndromeMap::generate(2, Encoding::Compact).unwrap())
}

fn events(sched: &NoiseSchedule) -> impl Strategy<Value = Vec<NoiseEvent>> {
    let slots = sched.total_slots();
    let n = sched.n_qubits;
    prop::collection::vec((0..slots, 0..n, active()), 0..6).prop_map(|v| {
        let mut e: Vec<NoiseEvent> = v.into_iter().map(|(slot, qubit, pauli)| NoiseEvent { slot, qubit, pauli }).collect();
        e.sort_by_key(|x| (x.slot, x.qubit));
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn detectable_runs_are_rejected(ev in events(&noise_setup().0)) {
        let (s, m) = noise_setup();
        let r = classify_events(&s, &m, &ev).unwrap();
        if r.bin == Bin::Detectable {
            prop_assert!(!r.accepted);
        }
        if ev.is_empty() {
            prop_assert_eq!(r.bin, Bin::Clean);
        }
        if r.bin == Bin::Clean {
            prop_assert!(r.accepted);
        }
    }

    #[test]
    fn doubled_events_cancel(ev in events(&noise_setup().0)) {
        let (s, m) = noise_setup();
        let mut twice: Vec<NoiseEvent> = ev.iter().flat_map(|&e| [e, e]).collect();
        twice.sort_by_key(|x| (x.slot, x.qubit));
        prop_assert_eq!(classify_events(&s, &m, &twice).unwrap().bin, Bin::Clean);
    }

    #[test]
    fn lone_vertex_z_is_phase(slot_frac in 0.0f64..1.0, pick in 0usize..8) {
        let (s, m) = noise_setup();
        let layout = QubitLayout::new(2, Encoding::Compact);
        let vertices: Vec<usize> = layout.vertex_qubits.iter().flatten().copied().collect();
        let boundaries: Vec<u64> = (0..s.total_slots())
            .filter(|&g| s.step_slots[(g % s.step_slots.len() as u64) as usize].boundary)
            .collect();
        let slot = boundaries[(slot_frac * boundaries.len() as f64) as usize];
        let q = vertices[pick % vertices.len()];
        let r = classify_events(&s, &m, &[NoiseEvent { slot, qubit: q, pauli: Pauli::Z }]).unwrap();
        prop_assert_eq!(r.bin, Bin::UndetectablePhase);
        prop_assert!(r.accepted);
    }
}

//! Depolarizing-noise Monte Carlo with syndrome tracking.
//!
//! A schedule is one Trotter step flattened into noise slots, one per
//! two-qubit pulse layer, repeated `steps` times. Noise acts after each slot;
//! the last slot of every Trotter layer sits on a layer boundary, the others
//! fall inside a gate decomposition.

pub mod feasible;
pub mod syndrome;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{emit_stage, Decomposition, ErrorModel};
use crate::encoding::{encode, Encoding, FermiHubbardSpec};
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::trotter::build_formula;

pub use feasible::{feasible_time_table, FeasibleConfig, FeasibleEntry, FeasibleRow};
pub use syndrome::{centralizer, MappingEntry, SyndromeMap};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub q: f64,
    pub mode: ErrorModel,
}

impl NoiseModel {
    pub fn new(q: f64, mode: ErrorModel) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Precondition(format!("q = {q} outside [0, 1]")));
        }
        Ok(NoiseModel { q, mode })
    }

    /// Per-qubit error probability after a slot of the given duration.
    pub fn slot_probability(&self, duration: f64) -> f64 {
        match self.mode {
            ErrorModel::PerGate => self.q,
            ErrorModel::PerTime => (self.q * duration).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    /// Index into the product-formula stage sequence.
    pub stage: usize,
    pub duration: f64,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub encoding: Encoding,
    #[serde(rename = "L")]
    pub l: usize,
    pub n_qubits: usize,
    pub decomposition: Decomposition,
    pub p: usize,
    pub delta: f64,
    pub steps: u64,
    pub step_slots: Vec<Slot>,
}

impl NoiseSchedule {
    pub fn build(
        spec: &FermiHubbardSpec,
        encoding: Encoding,
        decomposition: Decomposition,
        model: ErrorModel,
        p: usize,
        delta: f64,
        steps: u64,
    ) -> Result<Self> {
        let (layout, layers) = encode(spec, encoding)?;
        let f = build_formula(p, layers.len())?;
        let mut step_slots = Vec::new();
        for (stage, (i, c)) in f.sequence().into_iter().enumerate() {
            let seq = emit_stage(&layers[i], c * delta, decomposition, model)?;
            let times = seq.layer_times();
            let last = times.len();
            step_slots.extend(times.into_iter().enumerate().map(|(j, d)| Slot {
                stage,
                duration: d,
                boundary: j + 1 == last,
            }));
        }
        Ok(NoiseSchedule {
            encoding,
            l: spec.l,
            n_qubits: layout.total_qubits,
            decomposition,
            p,
            delta,
            steps,
            step_slots,
        })
    }

    pub fn total_slots(&self) -> u64 {
        self.steps * self.step_slots.len() as u64
    }

    /// Qubit-slot volume weighted by the noise model's time scaling.
    pub fn volume(&self, mode: ErrorModel) -> f64 {
        let per_step: f64 = match mode {
            ErrorModel::PerGate => self.step_slots.len() as f64,
            ErrorModel::PerTime => self.step_slots.iter().map(|s| s.duration).sum(),
        };
        per_step * self.steps as f64 * self.n_qubits as f64
    }

    /// Probability that no qubit errs anywhere in the schedule.
    pub fn clean_probability(&self, model: &NoiseModel) -> f64 {
        let per_step: f64 = self
            .step_slots
            .iter()
            .map(|s| (-model.slot_probability(s.duration)).ln_1p())
            .sum();
        (per_step * self.steps as f64 * self.n_qubits as f64).exp()
    }

    fn global(&self, g: u64) -> &Slot {
        &self.step_slots[(g % self.step_slots.len() as u64) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    Clean,
    Detectable,
    UndetectablePhase,
    UndetectableNonphase,
    IntraDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseEvent {
    /// Global slot index, `step * slots_per_step + j`.
    pub slot: u64,
    pub qubit: usize,
    pub pauli: Pauli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRunRecord {
    pub trial: u64,
    pub events: Vec<NoiseEvent>,
    /// `(slot, syndrome weight)` after every processed batch.
    pub syndrome_history: Vec<(u64, usize)>,
    pub bin: Bin,
    /// Final readout shows no triggered check.
    pub accepted: bool,
    /// Events moved out of a decomposition to the next layer boundary.
    pub commuted: usize,
}

struct Classifier<'a> {
    sched: &'a NoiseSchedule,
    masks: Vec<Vec<u64>>,
    phase: Vec<bool>,
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::X => 0,
        Pauli::Y => 1,
        Pauli::Z => 2,
        Pauli::I => unreachable!("identity is never sampled"),
    }
}

impl<'a> Classifier<'a> {
    fn new(sched: &'a NoiseSchedule, map: &SyndromeMap) -> Result<Self> {
        if sched.encoding != Encoding::Compact || map.encoding != Encoding::Compact {
            return Err(Error::Unsupported(
                "syndrome tracking needs a compact-encoding schedule".into(),
            ));
        }
        if map.n_qubits != sched.n_qubits {
            return Err(Error::Dimension(map.n_qubits, sched.n_qubits));
        }
        let masks = map.masks();
        let mut phase = vec![false; 3 * map.n_qubits];
        for e in &map.entries {
            phase[3 * e.qubit + pauli_index(e.pauli)] = e.phase_noise;
        }
        Ok(Classifier { sched, masks, phase })
    }

    /// Bin a trial from its time-ordered events.
    fn classify(&self, trial: u64, events: Vec<NoiseEvent>, log: bool) -> NoiseRunRecord {
        let words = self.masks.first().map_or(1, |m| m.len());
        let mut syndrome = vec![0u64; words];
        let (mut any, mut ever, mut intra, mut silent_nonphase) = (false, false, false, false);
        let mut commuted = 0;
        let mut history = Vec::new();
        let per_step = self.sched.step_slots.len() as u64;
        let mut pending: Vec<(usize, Pauli)> = Vec::new();
        let mut pending_until: Option<u64> = None;

        let mut flush = |batch: &mut Vec<(usize, Pauli)>, slot: u64, inside: bool, syndrome: &mut Vec<u64>| {
            batch.sort_by_key(|&(q, _)| q);
            let mut i = 0;
            while i < batch.len() {
                let q = batch[i].0;
                let mut net = Pauli::I;
                while i < batch.len() && batch[i].0 == q {
                    net = net.mul(batch[i].1).1;
                    i += 1;
                }
                if net == Pauli::I {
                    continue;
                }
                any = true;
                intra |= inside;
                let k = 3 * q + pauli_index(net);
                let mut zero = true;
                for (s, m) in syndrome.iter_mut().zip(&self.masks[k]) {
                    *s ^= m;
                    zero &= *m == 0;
                }
                if zero && !self.phase[k] {
                    silent_nonphase = true;
                }
            }
            batch.clear();
            let w: usize = syndrome.iter().map(|s| s.count_ones() as usize).sum();
            ever |= w > 0;
            if log {
                history.push((slot, w));
            }
        };

        let mut idx = 0;
        while idx < events.len() {
            let g = events[idx].slot;
            if let Some(b) = pending_until {
                if g > b {
                    flush(&mut pending, b, false, &mut syndrome);
                    pending_until = None;
                }
            }
            let slot = self.sched.global(g);
            let mut batch = Vec::new();
            while idx < events.len() && events[idx].slot == g {
                batch.push((events[idx].qubit, events[idx].pauli));
                idx += 1;
            }
            if slot.boundary {
                pending.extend(batch);
                flush(&mut pending, g, false, &mut syndrome);
                pending_until = None;
            } else if self.sched.decomposition == Decomposition::Subcircuit {
                commuted += batch.len();
                pending.extend(batch);
                if pending_until.is_none() {
                    let j = (g % per_step) as usize;
                    let off = self.sched.step_slots[j..]
                        .iter()
                        .position(|s| s.boundary)
                        .expect("every step ends on a boundary");
                    pending_until = Some(g + off as u64);
                }
            } else {
                flush(&mut batch, g, true, &mut syndrome);
            }
        }
        if let Some(b) = pending_until {
            flush(&mut pending, b, false, &mut syndrome);
        }

        let accepted = syndrome.iter().all(|&s| s == 0);
        let bin = if !any {
            Bin::Clean
        } else if intra {
            Bin::IntraDecomposition
        } else if !accepted {
            Bin::Detectable
        } else if ever || silent_nonphase {
            Bin::UndetectableNonphase
        } else {
            Bin::UndetectablePhase
        };
        NoiseRunRecord {
            trial,
            events: if log { events } else { Vec::new() },
            syndrome_history: history,
            bin,
            accepted,
            commuted,
        }
    }
}

/// Per-slot sampling tables for one step.
struct Sampler {
    n: usize,
    p: Vec<f64>,
    any: Vec<f64>,
    /// Cumulative hazard `-n ln(1-p)` through slot `j`.
    cum: Vec<f64>,
    saturated: bool,
}

impl Sampler {
    fn new(sched: &NoiseSchedule, model: &NoiseModel) -> Self {
        let n = sched.n_qubits;
        let p: Vec<f64> = sched
            .step_slots
            .iter()
            .map(|s| model.slot_probability(s.duration))
            .collect();
        let any = p.iter().map(|&x| -((n as f64) * (-x).ln_1p()).exp_m1()).collect();
        let mut acc = 0.0;
        let cum = p
            .iter()
            .map(|&x| {
                acc += -(n as f64) * (-x).ln_1p();
                acc
            })
            .collect();
        let saturated = p.iter().any(|&x| x >= 1.0);
        Sampler { n, p, any, cum, saturated }
    }

    fn errors_in_slot(&self, j: usize, g: u64, rng: &mut ChaCha8Rng, out: &mut Vec<NoiseEvent>) {
        let p = self.p[j];
        // First erring qubit, conditioned on at least one.
        let first = if p >= 1.0 {
            0
        } else {
            let v: f64 = rng.gen::<f64>() * self.any[j];
            (((-v).ln_1p() / (-p).ln_1p()).floor() as usize).min(self.n - 1)
        };
        for q in first..self.n {
            if q == first || rng.gen::<f64>() < p {
                let pauli = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
                out.push(NoiseEvent { slot: g, qubit: q, pauli });
            }
        }
    }

    fn sample(&self, steps: u64, rng: &mut ChaCha8Rng) -> Vec<NoiseEvent> {
        let per_step = self.p.len() as u64;
        let total = steps * per_step;
        let mut out = Vec::new();
        if total == 0 || self.n == 0 {
            return out;
        }
        if self.saturated {
            for g in 0..total {
                let j = (g % per_step) as usize;
                if rng.gen::<f64>() < self.any[j] {
                    self.errors_in_slot(j, g, rng, &mut out);
                }
            }
            return out;
        }
        let h_step = *self.cum.last().unwrap();
        if h_step <= 0.0 {
            return out;
        }
        // Exponential race over cumulative hazard, skipping quiet slots.
        let mut g = 0u64;
        while g < total {
            let start = (g / per_step) as f64 * h_step + if g % per_step == 0 { 0.0 } else { self.cum[(g % per_step) as usize - 1] };
            let e: f64 = -(1.0 - rng.gen::<f64>()).ln();
            let target = start + e;
            let step = (target / h_step).floor();
            if step >= steps as f64 {
                break;
            }
            let rem = target - step * h_step;
            let j = self.cum.partition_point(|&c| c <= rem).min(per_step as usize - 1);
            let mut hit = step as u64 * per_step + j as u64;
            if hit < g {
                hit = g;
            }
            if hit >= total {
                break;
            }
            let jj = (hit % per_step) as usize;
            if self.p[jj] > 0.0 {
                self.errors_in_slot(jj, hit, rng, &mut out);
            }
            g = hit + 1;
        }
        out
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One trial with its full event log.
pub fn run_trial(
    sched: &NoiseSchedule,
    model: &NoiseModel,
    map: &SyndromeMap,
    seed: u64,
    trial: u64,
) -> Result<NoiseRunRecord> {
    let c = Classifier::new(sched, map)?;
    let s = Sampler::new(sched, model);
    let events = s.sample(sched.steps, &mut trial_rng(seed, trial));
    Ok(c.classify(trial, events, true))
}

/// Bin a hand-built event list; events must be sorted by slot.
pub fn classify_events(sched: &NoiseSchedule, map: &SyndromeMap, events: &[NoiseEvent]) -> Result<NoiseRunRecord> {
    if events.windows(2).any(|w| w[0].slot > w[1].slot) {
        return Err(Error::Precondition("events must be sorted by slot".into()));
    }
    if let Some(e) = events.iter().find(|e| e.slot >= sched.total_slots() || e.qubit >= sched.n_qubits || e.pauli == Pauli::I) {
        return Err(Error::Precondition(format!("bad event {e:?}")));
    }
    Ok(Classifier::new(sched, map)?.classify(0, events.to_vec(), true))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCounts {
    pub clean: u64,
    pub detectable: u64,
    pub undetectable_phase: u64,
    pub undetectable_nonphase: u64,
    pub intra_decomposition: u64,
    pub accepted: u64,
    pub commuted: u64,
}

impl BinCounts {
    fn add(mut self, o: BinCounts) -> BinCounts {
        self.clean += o.clean;
        self.detectable += o.detectable;
        self.undetectable_phase += o.undetectable_phase;
        self.undetectable_nonphase += o.undetectable_nonphase;
        self.intra_decomposition += o.intra_decomposition;
        self.accepted += o.accepted;
        self.commuted += o.commuted;
        self
    }

    fn record(r: &NoiseRunRecord) -> BinCounts {
        let mut c = BinCounts::default();
        match r.bin {
            Bin::Clean => c.clean = 1,
            Bin::Detectable => c.detectable = 1,
            Bin::UndetectablePhase => c.undetectable_phase = 1,
            Bin::UndetectableNonphase => c.undetectable_nonphase = 1,
            Bin::IntraDecomposition => c.intra_decomposition = 1,
        }
        c.accepted = r.accepted as u64;
        c.commuted = (r.commuted > 0) as u64;
        c
    }

    pub fn total(&self) -> u64 {
        self.clean + self.detectable + self.undetectable_phase + self.undetectable_nonphase + self.intra_decomposition
    }
}

/// Binomial proportion with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Plain binomial standard error.
    pub std_err: f64,
}

impl Estimate {
    pub fn binomial(k: u64, n: u64) -> Estimate {
        if n == 0 {
            return Estimate { value: 0.0, lo: 0.0, hi: 1.0, std_err: 0.0 };
        }
        let nf = n as f64;
        let p = k as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let centre = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        Estimate {
            value: p,
            lo: (centre - half).clamp(0.0, p),
            hi: (centre + half).clamp(p, 1.0),
            std_err: (p * (1.0 - p) / nf).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub trials: u64,
    pub seed: u64,
    pub model: NoiseModel,
    pub counts: BinCounts,
    pub clean: Estimate,
    pub detectable: Estimate,
    pub undetectable_phase: Estimate,
    pub undetectable_nonphase: Estimate,
    pub intra_decomposition: Estimate,
    pub accept_rate: Estimate,
    pub post_selection_overhead: f64,
    /// Undetected non-phase plus intra-decomposition runs.
    pub eps_s: Estimate,
    /// Commuted-error residual, `sqrt(delta)` per affected run.
    pub eps_c: f64,
    pub clean_expected: f64,
}

impl NoiseSummary {
    fn from_counts(c: BinCounts, seed: u64, model: NoiseModel, sched: &NoiseSchedule) -> Self {
        let n = c.total();
        let accept_rate = Estimate::binomial(c.accepted, n);
        NoiseSummary {
            trials: n,
            seed,
            model,
            counts: c,
            clean: Estimate::binomial(c.clean, n),
            detectable: Estimate::binomial(c.detectable, n),
            undetectable_phase: Estimate::binomial(c.undetectable_phase, n),
            undetectable_nonphase: Estimate::binomial(c.undetectable_nonphase, n),
            intra_decomposition: Estimate::binomial(c.intra_decomposition, n),
            post_selection_overhead: if c.accepted == 0 {
                f64::INFINITY
            } else {
                n as f64 / c.accepted as f64
            },
            accept_rate,
            eps_s: Estimate::binomial(c.undetectable_nonphase + c.intra_decomposition, n),
            eps_c: c.commuted as f64 / n.max(1) as f64 * sched.delta.abs().sqrt(),
            clean_expected: sched.clean_probability(&model),
        }
    }
}

/// Monte Carlo over `trials` runs; trial `i` draws from stream `i` of the seeded generator.
pub fn run_monte_carlo(
    sched: &NoiseSchedule,
    model: &NoiseModel,
    map: &SyndromeMap,
    trials: u64,
    seed: u64,
) -> Result<NoiseSummary> {
    let c = Classifier::new(sched, map)?;
    let s = Sampler::new(sched, model);
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let events = s.sample(sched.steps, &mut trial_rng(seed, t));
            BinCounts::record(&c.classify(t, events, false))
        })
        .reduce(BinCounts::default, BinCounts::add);
    Ok(NoiseSummary::from_counts(counts, seed, *model, sched))
}

/// `1 - (1 - q)^V`.
pub fn trivial_epsilon(volume: f64, q: f64) -> f64 {
    -(volume * (-q).ln_1p()).exp_m1()
}

/// `1 - (1 - eps)^{1/V}`; any `q` works when `V = 0`.
pub fn trivial_q_max(volume: f64, eps: f64) -> f64 {
    if volume == 0.0 {
        return 1.0;
    }
    -((-eps).ln_1p() / volume).exp_m1()
}

/// Circuit volume `cost * L^2`.
pub fn circuit_volume(cost: f64, l: usize) -> f64 {
    cost * (l * l) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxQResult {
    pub q_max: f64,
    pub at_floor: bool,
    pub at_ceiling: bool,
    pub eps_s: Estimate,
    pub eps_t: f64,
    /// `sqrt(eps_t^2 + eps_s^2)` at the upper confidence limit.
    pub combined: f64,
    pub post_selection_overhead: f64,
    /// `(q, upper eps_s)` for every evaluated grid point.
    pub evaluations: Vec<(f64, f64)>,
}

pub const Q_GRID_FLOOR_EXP: i32 = -72;

/// Grid point `10^{k/8}`.
pub fn q_grid(k: i32) -> f64 {
    10f64.powf(k as f64 / 8.0)
}

/// Largest `q` on the `10^{k/8}` grid whose silent-error rate stays below `eps_target` at 95% confidence.
pub fn max_q_search(
    sched: &NoiseSchedule,
    mode: ErrorModel,
    map: &SyndromeMap,
    eps_target: f64,
    eps_t: f64,
    trials: u64,
    seed: u64,
) -> Result<MaxQResult> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::Precondition("eps_target must lie in (0, 1)".into()));
    }
    let mut evaluations = Vec::new();
    let mut eval = |k: i32| -> Result<NoiseSummary> {
        let m = NoiseModel::new(q_grid(k), mode)?;
        let s = run_monte_carlo(sched, &m, map, trials, seed)?;
        evaluations.push((m.q, s.eps_s.hi));
        Ok(s)
    };
    let mut coarse = None;
    let mut k = 0;
    while k >= Q_GRID_FLOOR_EXP {
        let s = eval(k)?;
        if s.eps_s.hi <= eps_target {
            coarse = Some((k, s));
            break;
        }
        k -= 4;
    }
    let (best_k, best, at_floor) = match coarse {
        None => {
            let s = eval(Q_GRID_FLOOR_EXP)?;
            (Q_GRID_FLOOR_EXP, s, true)
        }
        Some((kc, s)) => {
            let mut best = (kc, s);
            if kc < 0 {
                for kk in kc + 1..kc + 4 {
                    let s = eval(kk)?;
                    if s.eps_s.hi > eps_target {
                        break;
                    }
                    best = (kk, s);
                }
            }
            (best.0, best.1, false)
        }
    };
    Ok(MaxQResult {
        q_max: q_grid(best_k),
        at_floor,
        at_ceiling: best_k == 0 && !at_floor,
        combined: eps_t.hypot(best.eps_s.hi),
        eps_t,
        post_selection_overhead: best.post_selection_overhead,
        eps_s: best.eps_s,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(d: Decomposition) -> (NoiseSchedule, SyndromeMap) {
        let spec = FermiHubbardSpec::unit(2, 1).unwrap();
        let s = NoiseSchedule::build(&spec, Encoding::Compact, d, ErrorModel::PerGate, 1, 0.1, 3).unwrap();
        (s, SyndromeMap::generate(2, Encoding::Compact).unwrap())
    }

    #[test]
    fn schedule_shape() {
        let (s, _) = small(Decomposition::Standard);
        assert!(!s.step_slots.is_empty());
        assert!(s.step_slots.last().unwrap().boundary);
        assert!(s.step_slots.iter().any(|x| !x.boundary));
        assert_eq!(s.total_slots(), 3 * s.step_slots.len() as u64);
    }

    #[test]
    fn zero_noise_is_clean() {
        let (s, m) = small(Decomposition::Subcircuit);
        let r = run_monte_carlo(&s, &NoiseModel::new(0.0, ErrorModel::PerGate).unwrap(), &m, 2000, 1).unwrap();
        assert_eq!(r.counts.clean, 2000);
        assert_eq!(r.post_selection_overhead, 1.0);
    }

    #[test]
    fn vertex_z_is_phase_noise() {
        let (s, m) = small(Decomposition::Standard);
        let layout = crate::encoding::QubitLayout::new(2, Encoding::Compact);
        let b = (0..s.step_slots.len()).find(|&j| s.step_slots[j].boundary).unwrap() as u64;
        for &q in layout.vertex_qubits.iter().flatten() {
            let r = classify_events(&s, &m, &[NoiseEvent { slot: b, qubit: q, pauli: Pauli::Z }]).unwrap();
            assert_eq!(r.bin, Bin::UndetectablePhase);
            assert!(r.accepted);
        }
    }

    #[test]
    fn double_injection_cancels() {
        let (s, m) = small(Decomposition::Standard);
        let b = (0..s.step_slots.len()).find(|&j| s.step_slots[j].boundary).unwrap() as u64;
        for q in 0..s.n_qubits {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let e = NoiseEvent { slot: b, qubit: q, pauli: p };
                let r = classify_events(&s, &m, &[e, e]).unwrap();
                assert_eq!(r.bin, Bin::Clean);
            }
        }
    }

    #[test]
    fn cancelled_later_is_nonphase() {
        let (s, m) = small(Decomposition::Standard);
        let per = s.step_slots.len() as u64;
        let b = per - 1;
        let e1 = NoiseEvent { slot: b, qubit: 0, pauli: Pauli::X };
        let e2 = NoiseEvent { slot: b + per, qubit: 0, pauli: Pauli::X };
        assert_eq!(classify_events(&s, &m, &[e1]).unwrap().bin, Bin::Detectable);
        let r = classify_events(&s, &m, &[e1, e2]).unwrap();
        assert_eq!(r.bin, Bin::UndetectableNonphase);
        assert!(r.accepted);
    }

    #[test]
    fn inside_errors_depend_on_strategy() {
        for (d, want) in [
            (Decomposition::Standard, Bin::IntraDecomposition),
            (Decomposition::Subcircuit, Bin::UndetectablePhase),
        ] {
            let (s, m) = small(d);
            let Some(j) = s.step_slots.iter().position(|x| !x.boundary) else {
                continue;
            };
            let r = classify_events(&s, &m, &[NoiseEvent { slot: j as u64, qubit: 0, pauli: Pauli::Z }]).unwrap();
            assert_eq!(r.bin, want, "{d:?}");
        }
    }

    #[test]
    fn vc_rejected() {
        let spec = FermiHubbardSpec::unit(2, 1).unwrap();
        let s = NoiseSchedule::build(&spec, Encoding::Vc, Decomposition::Standard, ErrorModel::PerGate, 1, 0.1, 1).unwrap();
        let m = SyndromeMap::generate(2, Encoding::Compact).unwrap();
        let model = NoiseModel::new(1e-3, ErrorModel::PerGate).unwrap();
        assert!(matches!(run_monte_carlo(&s, &model, &m, 10, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn seed_determinism_and_clean_rate() {
        let (s, m) = small(Decomposition::Subcircuit);
        let model = NoiseModel::new(3e-3, ErrorModel::PerGate).unwrap();
        let a = run_monte_carlo(&s, &model, &m, 20_000, 42).unwrap();
        let b = run_monte_carlo(&s, &model, &m, 20_000, 42).unwrap();
        assert_eq!(a, b);
        let c = run_monte_carlo(&s, &model, &m, 20_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
        let p = a.clean_expected;
        let sigma = (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((a.clean.value - p).abs() < 3.0 * sigma, "{} vs {p}", a.clean.value);
    }

    #[test]
    fn per_time_scales_with_duration() {
        let spec = FermiHubbardSpec::unit(2, 1).unwrap();
        let s = NoiseSchedule::build(&spec, Encoding::Compact, Decomposition::Subcircuit, ErrorModel::PerTime, 2, 0.05, 4).unwrap();
        let m = SyndromeMap::generate(2, Encoding::Compact).unwrap();
        let model = NoiseModel::new(0.02, ErrorModel::PerTime).unwrap();
        let r = run_monte_carlo(&s, &model, &m, 20_000, 5).unwrap();
        let p = r.clean_expected;
        let sigma = (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((r.clean.value - p).abs() < 3.0 * sigma);
        assert!(p < 0.99 && p > 0.01, "{p}");
    }

    #[test]
    fn trivial_bound_examples() {
        assert!((trivial_q_max(1.0, 0.1) - 0.1).abs() < 1e-15);
        assert_eq!(trivial_epsilon(0.0, 0.3), 0.0);
        let e = trivial_epsilon(1e5, 1e-6);
        // ln(1 - q) by its power series, free of the rounding in 1 - q
        let ln1mq: f64 = -(1..8).map(|k| 1e-6f64.powi(k) / k as f64).sum::<f64>();
        assert!((e - (1.0 - (1e5 * ln1mq).exp())).abs() < 1e-12);
        assert!((e - 0.0952).abs() < 1e-4);
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        for (k, n) in [(0, 10), (5, 10), (10, 10), (3, 1000)] {
            let e = Estimate::binomial(k, n);
            assert!(e.lo <= e.value && e.value <= e.hi);
        }
    }

    #[test]
    fn max_q_ceiling_and_stability() {
        let (s, m) = small(Decomposition::Subcircuit);
        let r = max_q_search(&s, ErrorModel::PerGate, &m, 0.999, 0.0, 500, 3).unwrap();
        assert!(r.at_ceiling, "{r:?}");
        let a = max_q_search(&s, ErrorModel::PerGate, &m, 0.01, 0.05, 2000, 9).unwrap();
        let b = max_q_search(&s, ErrorModel::PerGate, &m, 0.01, 0.05, 4000, 9).unwrap();
        assert!(b.q_max <= a.q_max * 10f64.powf(1.0 / 8.0) * (1.0 + 1e-12), "{} {}", a.q_max, b.q_max);
        assert!(!a.at_floor && a.q_max < 1.0);
    }
}

//! Longest simulation time reachable at a given hardware error rate.
//!
//! Trotter error comes from the analytic bounds. Without mitigation the
//! stochastic error is the trivial zero-error bound on the circuit volume.
//! With mitigation it is a Poisson estimate of silent non-phase runs among
//! post-selected ones: a single detectable error is always caught, so the
//! leading silent contribution is a pair sharing a syndrome.

use serde::{Deserialize, Serialize};

use super::{circuit_volume, trivial_epsilon, NoiseSchedule, SyndromeMap};
use crate::cost::{simulation_cost, CostConfig, CostReport, Decomposition, ErrorModel};
use crate::encoding::{Encoding, FermiHubbardSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRow {
    pub error_model: ErrorModel,
    pub encoding: Encoding,
    pub decomposition: Decomposition,
    pub mitigation: bool,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub eps_target: f64,
    pub lambda: Option<f64>,
    pub rows: Vec<FeasibleRow>,
    pub overhead_cap: f64,
    pub t_max: f64,
    /// Fractions of `eps_target` tried as the Trotter share.
    pub trotter_shares: Vec<f64>,
    /// Relative width at which the time bisection stops.
    pub t_rtol: f64,
}

impl FeasibleConfig {
    /// Every row of the table for one lattice and one error rate list.
    pub fn full(l: usize, eps_target: f64, qs: &[f64]) -> Self {
        let mut rows = Vec::new();
        for model in [ErrorModel::PerTime, ErrorModel::PerGate] {
            for enc in [Encoding::Compact, Encoding::Vc] {
                for (d, mit) in [
                    (Decomposition::Standard, false),
                    (Decomposition::Subcircuit, false),
                    (Decomposition::Subcircuit, true),
                ] {
                    for &q in qs {
                        rows.push(FeasibleRow {
                            error_model: model,
                            encoding: enc,
                            decomposition: d,
                            mitigation: mit,
                            q,
                        });
                    }
                }
            }
        }
        FeasibleConfig {
            l,
            eps_target,
            lambda: None,
            rows,
            overhead_cap: 1e4,
            t_max: 1e4,
            trotter_shares: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
            t_rtol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleEntry {
    pub row: FeasibleRow,
    pub t_tar: f64,
    pub delta: f64,
    pub steps: u64,
    pub cost: f64,
    pub eps_t: f64,
    pub eps_s: f64,
    pub eps_c: f64,
    pub post_selection_overhead: Option<f64>,
    pub notes: Vec<String>,
}

/// Silent-error model shared by all times of one row.
struct Mitigation {
    n_qubits: f64,
    detectable_share: f64,
    phase_share: f64,
    collision: f64,
    inside_share: f64,
}

impl Mitigation {
    fn new(spec: &FermiHubbardSpec, row: &FeasibleRow) -> Result<Self> {
        let map = SyndromeMap::generate(spec.l, row.encoding)?;
        let n = map.entries.len() as f64;
        let detectable = map.entries.iter().filter(|e| !e.syndrome_bits.is_empty()).count() as f64;
        let phase = map.entries.iter().filter(|e| e.phase_noise).count() as f64;
        let sched = NoiseSchedule::build(spec, row.encoding, row.decomposition, row.error_model, 2, 0.05, 1)?;
        let weight = |s: &super::Slot| match row.error_model {
            ErrorModel::PerGate => 1.0,
            ErrorModel::PerTime => s.duration,
        };
        let total: f64 = sched.step_slots.iter().map(weight).sum();
        let inside: f64 = sched.step_slots.iter().filter(|s| !s.boundary).map(weight).sum();
        Ok(Mitigation {
            n_qubits: map.n_qubits as f64,
            detectable_share: detectable / n,
            phase_share: phase / n,
            collision: map.collision_probability(),
            inside_share: if total > 0.0 { inside / total } else { 0.0 },
        })
    }

    /// `(eps_s, eps_c, overhead)` for a schedule of the given cost.
    fn evaluate(&self, q: f64, cost: f64, delta: f64) -> (f64, f64, f64) {
        let mu = q * cost * self.n_qubits;
        let mu_d = mu * self.detectable_share;
        let pair = 0.5 * self.collision * mu_d * mu_d;
        let eps_s = pair / (1.0 + pair);
        let overhead = mu_d.exp() / (1.0 + pair);
        let mu_c = mu * self.phase_share * self.inside_share;
        let eps_c = (mu_c * delta.sqrt()).min(1.0);
        (eps_s, eps_c, overhead)
    }
}

struct Evaluation {
    report: CostReport,
    eps_t: f64,
    eps_s: f64,
    eps_c: f64,
    overhead: Option<f64>,
}

fn evaluate(
    spec: &FermiHubbardSpec,
    cfg: &FeasibleConfig,
    row: &FeasibleRow,
    mit: Option<&Mitigation>,
    t: f64,
) -> Result<Option<Evaluation>> {
    let mut best: Option<(f64, Evaluation)> = None;
    for &share in &cfg.trotter_shares {
        let eps_t = share * cfg.eps_target;
        let mut cc = CostConfig::new(t, eps_t);
        cc.lambda = cfg.lambda;
        let report = simulation_cost(spec, row.encoding, None, row.decomposition, row.error_model, &cc)?;
        if report.infeasible {
            continue;
        }
        let (eps_s, eps_c, overhead) = match mit {
            None => (trivial_epsilon(circuit_volume(report.cost, cfg.l), row.q), 0.0, None),
            Some(m) => {
                let (s, c, o) = m.evaluate(row.q, report.cost, report.delta0);
                if o > cfg.overhead_cap {
                    continue;
                }
                (s, c, Some(o))
            }
        };
        let total = (eps_t * eps_t + eps_s * eps_s + eps_c * eps_c).sqrt();
        if total <= cfg.eps_target && best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((
                total,
                Evaluation {
                    report,
                    eps_t,
                    eps_s,
                    eps_c,
                    overhead,
                },
            ));
        }
    }
    Ok(best.map(|(_, e)| e))
}

fn entry(row: FeasibleRow, t: f64, e: Option<Evaluation>, notes: Vec<String>) -> FeasibleEntry {
    match e {
        Some(e) => FeasibleEntry {
            row,
            t_tar: t,
            delta: e.report.delta0,
            steps: e.report.steps,
            cost: e.report.cost,
            eps_t: e.eps_t,
            eps_s: e.eps_s,
            eps_c: e.eps_c,
            post_selection_overhead: e.overhead,
            notes,
        },
        None => FeasibleEntry {
            row,
            t_tar: t,
            delta: 0.0,
            steps: 0,
            cost: 0.0,
            eps_t: 0.0,
            eps_s: 0.0,
            eps_c: 0.0,
            post_selection_overhead: None,
            notes,
        },
    }
}

fn solve_row(spec: &FermiHubbardSpec, cfg: &FeasibleConfig, row: FeasibleRow) -> Result<FeasibleEntry> {
    let mit = if row.mitigation {
        if row.decomposition != Decomposition::Subcircuit || row.encoding != Encoding::Compact {
            return Ok(entry(
                row,
                0.0,
                None,
                vec!["mitigation needs the compact error mapping and sub-circuit decompositions".into()],
            ));
        }
        Some(Mitigation::new(spec, &row)?)
    } else {
        None
    };
    let feasible = |t: f64| evaluate(spec, cfg, &row, mit.as_ref(), t);
    let mut lo = 0.0;
    let mut lo_eval = None;
    let mut hi = 0.01;
    loop {
        match feasible(hi)? {
            Some(e) => {
                lo = hi;
                lo_eval = Some(e);
                if hi >= cfg.t_max {
                    return Ok(entry(row, lo, lo_eval, vec!["reached t_max".into()]));
                }
                hi = (hi * 2.0).min(cfg.t_max);
            }
            None => break,
        }
    }
    while hi - lo > cfg.t_rtol * hi && hi > 1e-6 {
        let mid = 0.5 * (lo + hi);
        match feasible(mid)? {
            Some(e) => {
                lo = mid;
                lo_eval = Some(e);
            }
            None => hi = mid,
        }
    }
    Ok(entry(row, lo, lo_eval, Vec::new()))
}

/// Largest feasible time per row, by bisection on `T`.
pub fn feasible_time_table(spec: &FermiHubbardSpec, cfg: &FeasibleConfig) -> Result<Vec<FeasibleEntry>> {
    if !(cfg.eps_target > 0.0 && cfg.eps_target < 1.0) {
        return Err(Error::Precondition("eps_target must lie in (0, 1)".into()));
    }
    if spec.l != cfg.l {
        return Err(Error::Precondition("lattice size differs from the config".into()));
    }
    use rayon::prelude::*;
    cfg.rows
        .par_iter()
        .map(|&row| solve_row(spec, cfg, row))
        .collect()
}

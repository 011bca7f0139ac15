//! Brute-force search over short two-local Pauli pulse sequences for `exp(i T Z^k)`.
//!
//! Skeletons are enumerated modulo qubit permutations, per-qubit `X <-> Y`
//! relabelling and reversal. Pulse times are sampled on a grid (or randomly when
//! the grid is too large) and the best samples are refined with Nelder-Mead.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{apply_pauli_exp_rows, distance_up_to_phase, DenseUnitary};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub k: usize,
    pub depth: usize,
    pub t: f64,
    /// Maximum number of unitary evaluations over the whole search.
    pub budget: u64,
    /// Grid points per pulse-time axis on `[-pi/2, pi/2]`.
    pub grid: usize,
    /// Per-skeleton samples when the grid exceeds this many points.
    pub random_samples: usize,
    /// Number of best samples per skeleton handed to the local refinement.
    pub refine: usize,
    pub bin_width: f64,
    pub zero_tol: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(k: usize, depth: usize, t: f64, budget: u64) -> Self {
        SearchConfig {
            k,
            depth,
            t,
            budget,
            grid: 13,
            random_samples: 400,
            refine: 3,
            bin_width: std::f64::consts::PI / 40.0,
            zero_tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontPoint {
    pub cost: f64,
    pub epsilon: f64,
    pub skeleton: Vec<PauliString>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoFront {
    pub config: SearchConfig,
    /// Minimum-error point per cost bin, ordered by bin.
    pub bins: Vec<FrontPoint>,
    /// Non-dominated points over all bins.
    pub front: Vec<FrontPoint>,
    pub skeletons: usize,
    pub evaluations: u64,
    /// Set when the evaluation budget ran out before all skeletons were visited.
    pub partial: bool,
}

impl ParetoFront {
    /// Smallest cost with phase-optimized spectral error below `tol`.
    pub fn zero_error_cost(&self, tol: f64) -> Option<f64> {
        self.front
            .iter()
            .filter(|p| p.epsilon <= tol)
            .map(|p| p.cost)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Smallest error reachable with cost at most `cost`.
    pub fn min_error_within(&self, cost: f64) -> Option<f64> {
        self.front
            .iter()
            .filter(|p| p.cost <= cost)
            .map(|p| p.epsilon)
            .min_by(|a, b| a.total_cmp(b))
    }
}

fn two_local(k: usize) -> Vec<PauliString> {
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for &la in &letters {
                for &lb in &letters {
                    out.push(PauliString::from_sparse(k, &[(a, la), (b, lb)]).unwrap());
                }
            }
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Symmetry images of a generator index under each (permutation, XY-swap mask).
fn symmetry_table(gens: &[PauliString], k: usize) -> Vec<Vec<usize>> {
    let perms = permutations(k);
    let mut table = Vec::new();
    for p in &perms {
        for mask in 0..(1usize << k) {
            let map: Vec<usize> = gens
                .iter()
                .map(|g| {
                    let mut img = PauliString::identity(k);
                    for q in 0..k {
                        let mut l = g.get(q);
                        if mask >> q & 1 == 1 {
                            l = match l {
                                Pauli::X => Pauli::Y,
                                Pauli::Y => Pauli::X,
                                o => o,
                            };
                        }
                        img.set(p[q], l);
                    }
                    gens.iter().position(|h| *h == img).unwrap()
                })
                .collect();
            table.push(map);
        }
    }
    table
}

fn is_canonical(sk: &[usize], table: &[Vec<usize>]) -> bool {
    let mut img = vec![0usize; sk.len()];
    for map in table {
        for (i, &g) in sk.iter().enumerate() {
            img[i] = map[g];
        }
        if img.as_slice() < sk {
            return false;
        }
        img.reverse();
        if img.as_slice() < sk {
            return false;
        }
    }
    true
}

fn skeletons(n_gens: usize, depth: usize, table: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let total = n_gens.pow(depth as u32);
    let mut sk = vec![0usize; depth];
    for mut idx in 0..total {
        for s in sk.iter_mut().rev() {
            *s = idx % n_gens;
            idx /= n_gens;
        }
        if sk.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        if is_canonical(&sk, table) {
            out.push(sk.clone());
        }
    }
    out
}

struct Evaluator {
    gens: Vec<PauliTerm>,
    target_diag: Vec<Complex64>,
    dim: usize,
}

impl Evaluator {
    fn unitary(&self, sk: &[usize], times: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::identity(self.dim, self.dim);
        for (&g, &t) in sk.iter().zip(times) {
            apply_pauli_exp_rows(&mut m, &self.gens[g], t);
        }
        m
    }

    /// Phase-optimized Frobenius distance; an upper bound on the spectral one.
    fn frob(&self, sk: &[usize], times: &[f64]) -> f64 {
        let m = self.unitary(sk, times);
        let tr: Complex64 = (0..self.dim).map(|b| self.target_diag[b].conj() * m[(b, b)]).sum();
        (2.0 * self.dim as f64 - 2.0 * tr.norm()).max(0.0).sqrt()
    }
}

fn cost(times: &[f64]) -> f64 {
    times.iter().map(|t| t.abs()).sum()
}

/// Plain Nelder-Mead on a box-free objective.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |c: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + c * (simplex[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best].clone(), vals[best], evals)
}

struct SkeletonResult {
    points: Vec<(f64, f64, Vec<f64>)>,
    evals: u64,
}

fn search_skeleton(ev: &Evaluator, sk: &[usize], cfg: &SearchConfig, seed: u64) -> SkeletonResult {
    let n = sk.len();
    let g = cfg.grid.max(2);
    let grid_size = (g as u64).saturating_pow(n as u32);
    let mut samples: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let mut evals = 0u64;
    let push = |times: Vec<f64>, samples: &mut Vec<(f64, f64, Vec<f64>)>| {
        let e = ev.frob(sk, &times);
        samples.push((cost(&times), e, times));
    };
    if grid_size <= cfg.random_samples.max(1) as u64 * 8 {
        let axis: Vec<f64> = (0..g).map(|i| -FRAC_PI_2 + std::f64::consts::PI * i as f64 / (g - 1) as f64).collect();
        for mut idx in 0..grid_size {
            let mut times = vec![0.0; n];
            for t in times.iter_mut() {
                *t = axis[(idx % g as u64) as usize];
                idx /= g as u64;
            }
            push(times, &mut samples);
        }
        evals += grid_size;
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..cfg.random_samples {
            let times: Vec<f64> = (0..n).map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)).collect();
            push(times, &mut samples);
        }
        evals += cfg.random_samples as u64;
    }
    // keep the per-bin minima of the raw samples
    let mut bins: std::collections::BTreeMap<i64, (f64, f64, Vec<f64>)> = Default::default();
    for s in &samples {
        let b = (s.0 / cfg.bin_width).floor() as i64;
        let e = bins.entry(b).or_insert_with(|| s.clone());
        if s.1 < e.1 {
            *e = s.clone();
        }
    }
    let mut points: Vec<(f64, f64, Vec<f64>)> = bins.into_values().collect();
    samples.sort_by(|a, b| a.1.total_cmp(&b.1));
    for s in samples.iter().take(cfg.refine) {
        let (x, fx, e1) = nelder_mead(|x| ev.frob(sk, x).powi(2), &s.2, 0.05, 2000);
        evals += e1 as u64;
        points.push((cost(&x), fx.max(0.0).sqrt(), x.clone()));
        if fx.sqrt() < 1e-6 {
            // slide along the zero-error set towards smaller cost
            let (y, _, e2) = nelder_mead(|y| cost(y) + 20.0 * ev.frob(sk, y), &x, 0.02, 4000);
            let (z, fz, e3) = nelder_mead(|z| ev.frob(sk, z).powi(2), &y, 1e-3, 2000);
            evals += (e2 + e3) as u64;
            points.push((cost(&z), fz.max(0.0).sqrt(), z));
        }
    }
    SkeletonResult { points, evals }
}

fn dominates(a: &FrontPoint, b: &FrontPoint) -> bool {
    a.cost <= b.cost && a.epsilon <= b.epsilon && (a.cost < b.cost || a.epsilon < b.epsilon)
}

/// Enumerate depth-`n` two-local skeletons of width `k` and bin (cost, error) minima.
pub fn optimality_search(cfg: &SearchConfig) -> Result<ParetoFront> {
    if cfg.k < 2 || cfg.k > 3 || cfg.depth == 0 || cfg.depth > 5 {
        return Err(Error::Precondition(format!(
            "search supports 2 <= k <= 3 and 1 <= depth <= 5, got k={} depth={}",
            cfg.k, cfg.depth
        )));
    }
    let k = cfg.k;
    let gens_s = two_local(k);
    let table = symmetry_table(&gens_s, k);
    let sks = skeletons(gens_s.len(), cfg.depth, &table);
    let dim = 1usize << k;
    // target exp(i T Z^k) is diagonal with entries e^{i T (-1)^{popcount}}
    let target_diag: Vec<Complex64> = (0..dim)
        .map(|b| {
            let s = if (b as u32).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(1.0, cfg.t * s)
        })
        .collect();
    let ev = Evaluator {
        gens: gens_s.iter().cloned().map(PauliTerm::unit).collect(),
        target_diag,
        dim,
    };
    let grid_size = (cfg.grid.max(2) as u64).saturating_pow(cfg.depth as u32);
    let per_sk = if grid_size <= cfg.random_samples.max(1) as u64 * 8 {
        grid_size
    } else {
        cfg.random_samples as u64
    };
    let affordable = (cfg.budget / per_sk.max(1)) as usize;
    let partial = affordable < sks.len();
    let used = &sks[..affordable.min(sks.len())];
    let results: Vec<(usize, SkeletonResult)> = used
        .par_iter()
        .enumerate()
        .map(|(i, sk)| (i, search_skeleton(&ev, sk, cfg, cfg.seed.wrapping_add(i as u64))))
        .collect();
    let mut evaluations = 0u64;
    let mut all: Vec<FrontPoint> = Vec::new();
    for (i, r) in results {
        evaluations += r.evals;
        for (c, e, times) in r.points {
            all.push(FrontPoint {
                cost: c,
                epsilon: e,
                skeleton: used[i].iter().map(|&g| gens_s[g].clone()).collect(),
                times,
            });
        }
    }
    // spectral error on the candidates; Frobenius is only an upper bound
    let target = {
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b, b)] = ev.target_diag[b];
        }
        DenseUnitary::from_matrix(m)?
    };
    let mut by_bin: std::collections::BTreeMap<i64, FrontPoint> = Default::default();
    for p in all {
        let b = (p.cost / cfg.bin_width).floor() as i64;
        match by_bin.get(&b) {
            Some(q) if q.epsilon <= p.epsilon => {}
            _ => {
                by_bin.insert(b, p);
            }
        }
    }
    let mut bins: Vec<FrontPoint> = by_bin.into_values().collect();
    for p in bins.iter_mut() {
        let idx: Vec<usize> = p
            .skeleton
            .iter()
            .map(|s| gens_s.iter().position(|g| g == s).unwrap())
            .collect();
        let u = DenseUnitary::from_matrix(ev.unitary(&idx, &p.times))?;
        p.epsilon = distance_up_to_phase(&u, &target)?.distance.min(p.epsilon);
    }
    let front: Vec<FrontPoint> = bins
        .iter()
        .filter(|p| !bins.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect();
    Ok(ParetoFront {
        config: cfg.clone(),
        bins,
        front,
        skeletons: used.len(),
        evaluations,
        partial,
    })
}

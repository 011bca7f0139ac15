//! Exact and Trotterized evolution on small encoded lattices.
//!
//! Everything runs inside a fermion-number sector: the vertex-qubit
//! popcount is conserved by every encoded term, so the sector is invariant
//! under both `exp(-iHT)` and every layer exponential.

pub mod fit;
pub mod krylov;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dense::{spectral_norm, PauliAction};
use crate::encoding::{encode, lambda_global, Encoding, FermiHubbardSpec, QubitClass};
use crate::error::{Error, Result};
use crate::pauli::PauliTerm;
use crate::trotter::build_formula;

pub use fit::{fit_extrapolation, FitParams, FitPoint};
pub use krylov::{expm_multiply, power_norm, PowerNorm, StateVector};

/// Largest sector handled with dense matrices.
pub const MAX_DENSE_SECTOR: usize = 4096;
/// Largest register handled matrix-free.
pub const MAX_MATRIX_FREE_QUBITS: usize = 22;

const NONE: u32 = u32::MAX;

/// Computational basis states spanning an invariant subspace.
#[derive(Debug, Clone)]
pub struct Sector {
    pub n_qubits: usize,
    pub states: Vec<usize>,
    pos: Vec<u32>,
}

impl Sector {
    pub fn full(n_qubits: usize) -> Result<Self> {
        Self::filtered(n_qubits, |_| true)
    }

    /// States whose `mask` bits have popcount `count`.
    pub fn popcount(n_qubits: usize, mask: usize, count: usize) -> Result<Self> {
        Self::filtered(n_qubits, |b| (b & mask).count_ones() as usize == count)
    }

    fn filtered(n_qubits: usize, keep: impl Fn(usize) -> bool) -> Result<Self> {
        if n_qubits > MAX_MATRIX_FREE_QUBITS {
            return Err(Error::Capacity {
                what: "simulated qubits",
                needed: n_qubits,
                limit: MAX_MATRIX_FREE_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        let mut pos = vec![NONE; dim];
        let mut states = Vec::new();
        for b in 0..dim {
            if keep(b) {
                pos[b] = states.len() as u32;
                states.push(b);
            }
        }
        Ok(Sector { n_qubits, states, pos })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn index(&self, b: usize) -> Option<usize> {
        match self.pos[b] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    /// Whether `group` never maps a sector state outside the sector.
    pub fn is_invariant(&self, group: &FlipGroup) -> bool {
        self.states
            .iter()
            .all(|&b| self.pos[b ^ group.x] != NONE || group.amp(b).norm() < 1e-12)
    }
}

/// Commuting summands sharing one bit-flip mask: `H_g |b> = amp(b) |b ^ x>`.
///
/// Single hopping summands change the fermion number while their sum does
/// not, so exponentials act on whole groups.
#[derive(Debug, Clone)]
pub struct FlipGroup {
    pub x: usize,
    pub terms: Vec<(PauliAction, f64)>,
}

impl FlipGroup {
    #[inline]
    pub fn amp(&self, b: usize) -> Complex64 {
        self.terms.iter().map(|(a, c)| a.coeff(b) * *c).sum()
    }
}

pub(crate) fn group_by_flip(terms: impl IntoIterator<Item = (PauliAction, f64)>) -> Vec<FlipGroup> {
    let mut by_x: BTreeMap<usize, Vec<(PauliAction, f64)>> = BTreeMap::new();
    for (a, c) in terms {
        by_x.entry(a.x).or_default().push((a, c));
    }
    by_x.into_iter().map(|(x, terms)| FlipGroup { x, terms }).collect()
}

/// One commuting layer, split into flip groups.
#[derive(Debug, Clone)]
pub struct LayerOps {
    pub groups: Vec<FlipGroup>,
}

impl LayerOps {
    pub fn new(terms: &[PauliTerm]) -> Self {
        LayerOps {
            groups: group_by_flip(terms.iter().map(|t| (PauliAction::new(&t.string), t.coefficient))),
        }
    }
}

/// `v <- exp(-i theta H_g) v` in sector coordinates.
pub(crate) fn exp_group(sector: &Sector, g: &FlipGroup, theta: f64, v: &mut [Complex64]) {
    if g.x == 0 {
        for (a, z) in v.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -theta * g.amp(sector.states[a]).re);
        }
        return;
    }
    for a in 0..v.len() {
        let b = sector.states[a];
        let Some(a2) = sector.index(b ^ g.x) else {
            continue;
        };
        if a2 < a {
            continue;
        }
        // hermitian block [[0, w'], [w, 0]] with |w| = |w'|
        let w = g.amp(b);
        let r = w.norm();
        if r < 1e-300 {
            continue;
        }
        let wp = g.amp(b ^ g.x);
        let (c, s) = ((theta * r).cos(), (theta * r).sin() / r);
        let mis = Complex64::new(0.0, -s);
        let (v1, v2) = (v[a], v[a2]);
        v[a] = c * v1 + mis * wp * v2;
        v[a2] = c * v2 + mis * w * v1;
    }
}

/// A Fermi-Hubbard instance restricted to one fermion-number sector.
#[derive(Debug, Clone)]
pub struct SectorProblem {
    pub spec: FermiHubbardSpec,
    pub encoding: Encoding,
    pub sector: Sector,
    pub layers: Vec<LayerOps>,
    pub lambda: f64,
    pub n_terms: usize,
    pub n_tilde: usize,
    eig: Option<(DMatrix<Complex64>, Vec<f64>)>,
}

impl SectorProblem {
    pub fn new(spec: &FermiHubbardSpec, encoding: Encoding) -> Result<Self> {
        spec.validate()?;
        let (layout, layers) = encode(spec, encoding)?;
        let n = layout.total_qubits;
        let mut mask = 0usize;
        for q in 0..n {
            if layout.class_of(q) == QubitClass::Vertex {
                mask |= 1 << (n - 1 - q);
            }
        }
        let sector = Sector::popcount(n, mask, spec.fermion_count)?;
        let ops: Vec<LayerOps> = layers.iter().map(|l| LayerOps::new(&l.terms())).collect();
        for g in ops.iter().flat_map(|l| &l.groups) {
            if !sector.is_invariant(g) {
                return Err(Error::Numeric(format!("flip group {:#x} leaves the sector", g.x)));
            }
        }
        let (n_terms, n_tilde) = crate::cost::layer_structure(&layers)?;
        Ok(SectorProblem {
            spec: spec.clone(),
            encoding,
            lambda: lambda_global(spec, &layers),
            layers: ops,
            sector,
            n_terms,
            n_tilde,
            eig: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn check_dense(&self) -> Result<()> {
        if self.dim() > MAX_DENSE_SECTOR {
            return Err(Error::Capacity {
                what: "dense sector dimension",
                needed: self.dim(),
                limit: MAX_DENSE_SECTOR,
            });
        }
        Ok(())
    }

    /// Sector Hamiltonian, the sum of all layers.
    pub fn hamiltonian(&self) -> Result<DMatrix<Complex64>> {
        self.check_dense()?;
        let d = self.dim();
        let mut h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for g in self.layers.iter().flat_map(|l| &l.groups) {
            for (a, &b) in self.sector.states.iter().enumerate() {
                if let Some(row) = self.sector.index(b ^ g.x) {
                    h[(row, a)] += g.amp(b);
                }
            }
        }
        Ok(h)
    }

    fn eigen(&mut self) -> Result<&(DMatrix<Complex64>, Vec<f64>)> {
        if self.eig.is_none() {
            let h = self.hamiltonian()?;
            let e = h.symmetric_eigen();
            self.eig = Some((e.eigenvectors, e.eigenvalues.iter().copied().collect()));
        }
        Ok(self.eig.as_ref().unwrap())
    }

    /// `exp(-i H t)` from the eigendecomposition.
    pub fn exact_evolution(&mut self, t: f64) -> Result<DMatrix<Complex64>> {
        let (v, lam) = self.eigen()?;
        let mut scaled = v.clone();
        for (j, &l) in lam.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -l * t);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= ph;
            }
        }
        Ok(scaled * v.adjoint())
    }

    /// `exp(-i x H_layer)` applied on the left of `m`.
    pub fn apply_layer(&self, m: &mut DMatrix<Complex64>, layer: usize, x: f64) {
        let rows = m.nrows();
        for g in &self.layers[layer].groups {
            for col in m.as_mut_slice().chunks_mut(rows) {
                exp_group(&self.sector, g, x, col);
            }
        }
    }

    /// One product-formula step `P_p(delta)`; stage 0 acts first.
    pub fn trotter_step(&self, p: usize, delta: f64) -> Result<DMatrix<Complex64>> {
        self.check_dense()?;
        let f = build_formula(p, self.layers.len())?;
        let mut m = DMatrix::identity(self.dim(), self.dim());
        for (i, c) in f.sequence() {
            self.apply_layer(&mut m, i, c * delta);
        }
        Ok(m)
    }

    /// `P_p(delta)^{floor(T/delta)}` followed by one shorter step for any remainder.
    pub fn trotter_evolution(&self, p: usize, delta: f64, t: f64) -> Result<DMatrix<Complex64>> {
        let (full, rem) = split_time(t, delta)?;
        let step = self.trotter_step(p, delta)?;
        let mut u = matrix_power(&step, full);
        if rem > 0.0 {
            u = self.trotter_step(p, rem)? * u;
        }
        Ok(u)
    }
}

/// Whole steps and leftover time; a remainder below `1e-9 delta` is dropped.
pub fn split_time(t: f64, delta: f64) -> Result<(u64, f64)> {
    if !(delta > 0.0) || t < 0.0 {
        return Err(Error::Precondition("need delta > 0 and T >= 0".into()));
    }
    let ratio = t / delta;
    let full = (ratio + 1e-9).floor();
    let rem = t - full * delta;
    Ok((full as u64, if rem > 1e-9 * delta { rem } else { 0.0 }))
}

pub fn matrix_power(m: &DMatrix<Complex64>, mut k: u64) -> DMatrix<Complex64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &base * &result;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    DenseSvd,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericErrorPoint {
    #[serde(rename = "L")]
    pub l: usize,
    pub encoding: Encoding,
    pub p: usize,
    pub t: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub norm_method: NormMethod,
    /// Ritz residual of the power iteration; zero for the dense path.
    pub residual: f64,
    pub converged: bool,
}

/// `|| U(T) - P(delta)^{T/delta} ||` in the configured fermion sector.
pub fn numeric_epsilon(problem: &mut SectorProblem, p: usize, t: f64, delta: f64, seed: u64) -> Result<NumericErrorPoint> {
    let (l, encoding) = (problem.spec.l, problem.encoding);
    let point = |epsilon: f64, norm_method, residual, converged| NumericErrorPoint {
        l,
        encoding,
        p,
        t,
        delta,
        epsilon,
        norm_method,
        residual,
        converged,
    };
    if problem.dim() <= MAX_DENSE_SECTOR {
        let d = problem.exact_evolution(t)? - problem.trotter_evolution(p, delta, t)?;
        return Ok(point(spectral_norm(&d).min(2.0), NormMethod::DenseSvd, 0.0, true));
    }
    let r = krylov::trotter_error_norm(problem, p, t, delta, seed)?;
    Ok(point(r.norm.min(2.0), NormMethod::PowerIteration, r.residual, r.converged))
}

/// Largest step with numeric error at most `eps`, by bisection in `log delta`.
pub fn numeric_delta0(problem: &mut SectorProblem, p: usize, t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !(t > 0.0) {
        return Err(Error::Precondition("need eps > 0 and T > 0".into()));
    }
    let mut err = |d: f64| -> Result<f64> { Ok(numeric_epsilon(problem, p, t, d, 0)?.epsilon) };
    if err(t)? <= eps {
        return Ok(t);
    }
    let mut hi = t;
    let mut lo = t / 2.0;
    while err(lo)? > eps {
        hi = lo;
        lo /= 2.0;
        if lo < 1e-8 * t {
            return Err(Error::Infeasible(format!("no step below {lo:e} reaches eps = {eps}")));
        }
    }
    while (hi - lo) > 1e-4 * lo {
        let mid = (lo * hi).sqrt();
        if err(mid)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Analytic inputs `(Lambda, N, n_tilde)` matching this sector.
pub fn bound_inputs(problem: &SectorProblem) -> (f64, usize, usize) {
    (problem.lambda, problem.n_terms, problem.n_tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{hamiltonian_matrix, DenseUnitary};
    use crate::trotter::{tightest_bound, BoundQuery};

    fn two_by_two(n: usize) -> SectorProblem {
        SectorProblem::new(&FermiHubbardSpec::unit(2, n).unwrap(), Encoding::Compact).unwrap()
    }

    /// Dense `exp(-iHt)` by scaling and squaring of a Taylor series.
    fn expm_oracle(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        let a = h * Complex64::new(0.0, -t);
        let norm = a.iter().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let a = a / Complex64::new(2f64.powi(s), 0.0);
        let mut term = DMatrix::identity(h.nrows(), h.ncols());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn sector_dimension() {
        let p = two_by_two(4);
        // C(8,4) vertex configurations times two free face ancillas
        assert_eq!(p.dim(), 70 * 4);
    }

    #[test]
    fn exact_matches_taylor_oracle() {
        let mut p = two_by_two(2);
        let h = p.hamiltonian().unwrap();
        let u = p.exact_evolution(0.7).unwrap();
        assert!(spectral_norm(&(u - expm_oracle(&h, 0.7))) < 1e-10);
        let id = p.exact_evolution(0.0).unwrap();
        assert!(spectral_norm(&(id - DMatrix::identity(p.dim(), p.dim()))) < 1e-12);
    }

    #[test]
    fn toy_xx_plus_z_against_dense() {
        let terms = vec![
            PauliTerm::parse("XX", 1.0).unwrap(),
            PauliTerm::parse("ZI", 0.6).unwrap(),
        ];
        let h = hamiltonian_matrix(&terms, 2).unwrap();
        let oracle = expm_oracle(&h, 1.3);
        let mut v = StateVector::basis(2, 1);
        expm_multiply(&terms, &mut v, 1.3, 1e-13).unwrap();
        for i in 0..4 {
            assert!((v.amps[i] - oracle[(i, 1)]).norm() < 1e-12);
        }
    }

    #[test]
    fn per_step_error_has_order_p_plus_one() {
        let mut p = two_by_two(4);
        for (order, d) in [(1usize, 0.004), (2, 0.02), (4, 0.1)] {
            let mut err = |delta: f64| {
                let u = p.exact_evolution(delta).unwrap();
                spectral_norm(&(u - p.trotter_step(order, delta).unwrap()))
            };
            let slope = (err(d) / err(d / 2.0)).log2();
            assert!((slope - (order as f64 + 1.0)).abs() < 0.05, "p={order}: slope {slope}");
        }
    }

    #[test]
    fn single_commuting_layer_is_exact() {
        let p = two_by_two(3);
        let mut q = p.clone();
        q.layers.truncate(1);
        q.eig = None;
        let u = q.exact_evolution(0.9).unwrap();
        let mut step = DMatrix::identity(q.dim(), q.dim());
        q.apply_layer(&mut step, 0, 0.9);
        assert!(spectral_norm(&(u - step)) < 1e-10);
    }

    #[test]
    fn step_matches_dense_pauli_exponentials() {
        let spec = FermiHubbardSpec::unit(2, 2).unwrap();
        let (_, layers) = encode(&spec, Encoding::Compact).unwrap();
        let mut full = SectorProblem::new(&spec, Encoding::Compact).unwrap();
        full.sector = Sector::full(10).unwrap();
        full.eig = None;
        let mut u = DenseUnitary::identity(10).unwrap();
        let f = build_formula(2, layers.len()).unwrap();
        for (i, c) in f.sequence() {
            for t in layers[i].terms() {
                u.apply_pauli_exp(&t, -c * 0.1).unwrap();
            }
        }
        let s = full.trotter_step(2, 0.1).unwrap();
        assert!(spectral_norm(&(s - u.m)) < 1e-12);
    }

    #[test]
    fn second_order_is_time_symmetric() {
        let p = two_by_two(2);
        let fwd = p.trotter_step(2, 0.13).unwrap();
        let back = p.trotter_step(2, -0.13).unwrap();
        assert!(spectral_norm(&(fwd * back - DMatrix::identity(p.dim(), p.dim()))) < 1e-12);
    }

    #[test]
    fn unitarity_and_range() {
        let mut p = two_by_two(4);
        let u = p.trotter_evolution(1, 0.3, 1.0).unwrap();
        let d = &u.adjoint() * &u - DMatrix::identity(p.dim(), p.dim());
        assert!(spectral_norm(&d) < 1e-10);
        let e = numeric_epsilon(&mut p, 1, 1.0, 0.5, 0).unwrap();
        assert!(e.epsilon >= 0.0 && e.epsilon <= 2.0);
    }

    #[test]
    fn dominated_by_tightest_bound() {
        let mut p = two_by_two(4);
        let (lambda, n, nt) = bound_inputs(&p);
        let m = p.layers.len();
        let e = numeric_epsilon(&mut p, 2, 1.0, 0.1, 0).unwrap();
        let b = tightest_bound(&BoundQuery::new(2, m, lambda, 1.0, 0.1, n, nt)).unwrap();
        assert!(e.epsilon <= b.epsilon, "{} > {}", e.epsilon, b.epsilon);
    }

    #[test]
    fn monotone_in_delta() {
        let mut p = two_by_two(4);
        let mut last = 0.0;
        for d in [0.02, 0.05, 0.1, 0.2, 0.25] {
            let e = numeric_epsilon(&mut p, 2, 1.0, d, 0).unwrap().epsilon;
            assert!(e > last, "delta {d}: {e} <= {last}");
            last = e;
        }
    }

    #[test]
    fn delta0_bisection_is_consistent() {
        let mut p = two_by_two(4);
        for eps in [1e-3, 1e-2, 5e-2] {
            let d0 = numeric_delta0(&mut p, 2, 1.0, eps).unwrap();
            let at = numeric_epsilon(&mut p, 2, 1.0, d0, 0).unwrap().epsilon;
            assert!(at <= eps);
            let above = numeric_epsilon(&mut p, 2, 1.0, d0 * (1.0 + 2e-3), 0).unwrap().epsilon;
            assert!(above > eps * 0.99, "{above} vs {eps}");
        }
    }

    #[test]
    fn split_time_cases() {
        assert_eq!(split_time(1.0, 0.1).unwrap(), (10, 0.0));
        let (n, r) = split_time(1.0, 0.3).unwrap();
        assert_eq!(n, 3);
        assert!((r - 0.1).abs() < 1e-12);
        assert!(split_time(1.0, 0.0).is_err());
    }
}

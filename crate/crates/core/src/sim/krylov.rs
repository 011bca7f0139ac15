//! Matrix-free propagation: Lanczos exponentials and power iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{exp_group, group_by_flip, split_time, FlipGroup, LayerOps, Sector, SectorProblem};
use crate::error::{Error, Result};
use crate::pauli::PauliTerm;
use crate::trotter::build_formula;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Lanczos basis size per substep.
const KRYLOV_DIM: usize = 40;
/// Target `||H|| tau` per substep.
const SUBSTEP_SCALE: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amps: Vec<C>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = C::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `out = H v` in sector coordinates.
fn apply_h(sector: &Sector, groups: &[FlipGroup], v: &[C], out: &mut [C]) {
    out.par_iter_mut().enumerate().for_each(|(a, o)| {
        let b = sector.states[a];
        let mut acc = ZERO;
        for g in groups {
            let src = b ^ g.x;
            if let Some(i) = sector.index(src) {
                acc += g.amp(src) * v[i];
            }
        }
        *o = acc;
    });
}

/// `exp(-i T tau) e_1` for a real symmetric tridiagonal `T`.
fn small_expm(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let e = t.symmetric_eigen();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let ph = C::from_polar(1.0, -e.eigenvalues[k] * tau);
                    ph * e.eigenvectors[(i, k)] * e.eigenvectors[(0, k)]
                })
                .sum()
        })
        .collect()
}

/// One Lanczos substep `v <- exp(-i H tau) v`; returns the error estimate.
fn lanczos(sector: &Sector, ops: &[FlipGroup], v: &mut [C], tau: f64, tol: f64) -> Result<f64> {
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return Ok(0.0);
    }
    let mut q: Vec<Vec<C>> = vec![v.iter().map(|z| z / beta0).collect()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![ZERO; v.len()];
    let mut est = f64::INFINITY;
    for j in 0..KRYLOV_DIM {
        apply_h(sector, ops, &q[j], &mut w);
        let a = dot(&q[j], &w).re;
        alpha.push(a);
        // full reorthogonalization keeps the basis clean at this size
        for qk in &q {
            let h = dot(qk, &w);
            for (x, y) in w.iter_mut().zip(qk) {
                *x -= h * y;
            }
        }
        let b = norm(&w);
        let y = small_expm(&alpha, &beta, tau);
        est = b * y[j].norm();
        if est < tol || b < 1e-14 {
            for (i, z) in v.iter_mut().enumerate() {
                *z = beta0 * q.iter().zip(&y).map(|(qk, yk)| yk * qk[i]).sum::<C>();
            }
            return Ok(est * beta0);
        }
        beta.push(b);
        q.push(w.iter().map(|z| z / b).collect());
    }
    Err(Error::Numeric(format!("Lanczos did not converge, estimate {est:e}")))
}

fn coefficient_norm(ops: &[FlipGroup]) -> f64 {
    ops.iter().flat_map(|g| &g.terms).map(|(_, c)| c.abs()).sum()
}

fn expm_ops(sector: &Sector, ops: &[FlipGroup], v: &mut [C], t: f64, tol: f64) -> Result<f64> {
    let h = coefficient_norm(ops);
    let n = ((t.abs() * h) / SUBSTEP_SCALE).ceil().max(1.0) as usize;
    let tau = t / n as f64;
    let mut err = 0.0;
    for _ in 0..n {
        err += lanczos(sector, ops, v, tau, tol / n as f64)?;
    }
    Ok(err)
}

/// `v <- exp(-i H t) v` on the full register; returns the accumulated error estimate.
pub fn expm_multiply(terms: &[PauliTerm], v: &mut StateVector, t: f64, tol: f64) -> Result<f64> {
    let sector = Sector::full(v.n_qubits)?;
    let ops = LayerOps::new(terms).groups;
    expm_ops(&sector, &ops, &mut v.amps, t, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNorm {
    pub norm: f64,
    /// Relative Ritz residual `||D^dag D x - s^2 x|| / s^2` at exit.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of `D` from `D x` and `D^dag y` products, best of `restarts`.
pub fn power_norm(
    dim: usize,
    apply: &(dyn Fn(&[C]) -> Result<Vec<C>> + Sync),
    apply_adj: &(dyn Fn(&[C]) -> Result<Vec<C>> + Sync),
    restarts: usize,
    rtol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<PowerNorm> {
    let runs: Vec<Result<PowerNorm>> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut x: Vec<C> = (0..dim).map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let n0 = norm(&x);
            x.iter_mut().for_each(|z| *z /= n0);
            let mut out = PowerNorm { norm: 0.0, residual: f64::INFINITY, converged: false, iterations: 0 };
            for it in 1..=max_iter {
                let y = apply(&x)?;
                let z = apply_adj(&y)?;
                let s2 = dot(&x, &z).re;
                out.norm = norm(&y);
                out.iterations = it;
                if s2 <= 1e-300 {
                    out.residual = 0.0;
                    out.converged = true;
                    break;
                }
                let res: f64 = z.iter().zip(&x).map(|(a, b)| (a - b * s2).norm_sqr()).sum::<f64>().sqrt() / s2;
                out.residual = res;
                let nz = norm(&z);
                x = z.into_iter().map(|a| a / nz).collect();
                if res < rtol {
                    out.converged = true;
                    break;
                }
            }
            Ok(out)
        })
        .collect();
    let mut best: Option<PowerNorm> = None;
    for r in runs {
        let r = r?;
        if best.map_or(true, |b| r.norm > b.norm) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Precondition("need at least one restart".into()))
}

/// Flip groups of the whole Hamiltonian, merged across layers.
fn all_ops(layers: &[LayerOps]) -> Vec<FlipGroup> {
    group_by_flip(layers.iter().flat_map(|l| &l.groups).flat_map(|g| g.terms.iter().copied()))
}

/// Apply `P(delta)^full P(rem)` or its adjoint to a sector vector.
fn trotter_apply(problem: &SectorProblem, seq: &[(usize, f64)], delta: f64, full: u64, rem: f64, v: &mut [C], adjoint: bool) {
    let stage = |v: &mut [C], x: f64, rev: bool| {
        let order: Box<dyn Iterator<Item = &(usize, f64)>> = if rev { Box::new(seq.iter().rev()) } else { Box::new(seq.iter()) };
        for &(i, c) in order {
            let sign = if rev { -1.0 } else { 1.0 };
            for g in &problem.layers[i].groups {
                exp_group(&problem.sector, g, sign * c * x, v);
            }
        }
    };
    if !adjoint {
        for _ in 0..full {
            stage(v, delta, false);
        }
        if rem > 0.0 {
            stage(v, rem, false);
        }
    } else {
        if rem > 0.0 {
            stage(v, rem, true);
        }
        for _ in 0..full {
            stage(v, delta, true);
        }
    }
}

/// Matrix-free `|| U(T) - P^{T/delta} ||` in the problem's sector.
pub fn trotter_error_norm(problem: &SectorProblem, p: usize, t: f64, delta: f64, seed: u64) -> Result<PowerNorm> {
    let f = build_formula(p, problem.layers.len())?;
    let seq = f.sequence();
    let (full, rem) = split_time(t, delta)?;
    let ops = all_ops(&problem.layers);
    let tol = 1e-11;
    let d = |x: &[C], adj: bool| -> Result<Vec<C>> {
        let mut u = x.to_vec();
        expm_ops(&problem.sector, &ops, &mut u, if adj { -t } else { t }, tol)?;
        let mut pv = x.to_vec();
        trotter_apply(problem, &seq, delta, full, rem, &mut pv, adj);
        Ok(u.iter().zip(&pv).map(|(a, b)| a - b).collect())
    };
    power_norm(problem.dim(), &|x| d(x, false), &|x| d(x, true), 3, 1e-7, 2000, seed)
}

/// Dense matrix of a sector vector map, for cross-checks.
pub fn materialize(dim: usize, apply: impl Fn(&[C]) -> Vec<C>) -> DMatrix<C> {
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        let mut e = vec![ZERO; dim];
        e[j] = C::new(1.0, 0.0);
        let col = DVector::from_vec(apply(&e));
        m.set_column(j, &col);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::spectral_norm;
    use crate::encoding::{Encoding, FermiHubbardSpec};

    #[test]
    fn matrix_free_agrees_with_dense() {
        let spec = FermiHubbardSpec::unit(2, 3).unwrap();
        let mut p = SectorProblem::new(&spec, Encoding::Compact).unwrap();
        for (pp, delta) in [(1, 0.2), (2, 0.25), (4, 0.5)] {
            let dense = p.exact_evolution(1.0).unwrap() - p.trotter_evolution(pp, delta, 1.0).unwrap();
            let want = spectral_norm(&dense);
            let got = trotter_error_norm(&p, pp, 1.0, delta, 7).unwrap();
            assert!(got.converged, "{got:?}");
            assert!((got.norm - want).abs() < 1e-6 * want.max(1e-3), "p={pp}: {} vs {want}", got.norm);
        }
    }

    #[test]
    fn lanczos_exponential_is_unitary_and_exact() {
        let spec = FermiHubbardSpec::unit(2, 2).unwrap();
        let mut p = SectorProblem::new(&spec, Encoding::Compact).unwrap();
        let ops = all_ops(&p.layers);
        let dim = p.dim();
        let sector = p.sector.clone();
        let m = materialize(dim, |x| {
            let mut v = x.to_vec();
            expm_ops(&sector, &ops, &mut v, 2.5, 1e-13).unwrap();
            v
        });
        let u = p.exact_evolution(2.5).unwrap();
        assert!(spectral_norm(&(m.clone() - u)) < 1e-10);
        let id = m.adjoint() * &m - DMatrix::identity(dim, dim);
        assert!(spectral_norm(&id) < 1e-10);
    }

    #[test]
    fn adjoint_product_inverts() {
        let spec = FermiHubbardSpec::unit(2, 2).unwrap();
        let p = SectorProblem::new(&spec, Encoding::Compact).unwrap();
        let seq = build_formula(4, p.layers.len()).unwrap().sequence();
        let mut v: Vec<C> = (0..p.dim()).map(|i| C::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let orig = v.clone();
        trotter_apply(&p, &seq, 0.2, 3, 0.05, &mut v, false);
        trotter_apply(&p, &seq, 0.2, 3, 0.05, &mut v, true);
        let err: f64 = v.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn power_norm_on_diagonal() {
        let d = [3.0, 1.0, 0.5, 2.0];
        let f = |x: &[C]| -> Result<Vec<C>> { Ok(x.iter().zip(&d).map(|(a, s)| a * s).collect()) };
        let r = power_norm(4, &f, &f, 3, 1e-10, 5000, 1).unwrap();
        assert!((r.norm - 3.0).abs() < 1e-6);
    }
}

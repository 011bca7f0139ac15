//! Small dense unitaries on top of `nalgebra`.
//!
//! Basis index bit `n-1-q` holds qubit `q`, so qubit 0 is the leftmost
//! Kronecker factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

pub const MAX_DENSE_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit-mask description of a Pauli string acting on computational basis states:
/// `P|b> = phase * (-1)^{|b & z|} |b ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliAction {
    pub x: usize,
    pub z: usize,
    pub phase: Complex64,
}

impl PauliAction {
    pub fn new(p: &PauliString) -> Self {
        let n = p.n_qubits();
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (q, &l) in p.letters().iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if l.x_bit() {
                x |= bit;
            }
            if l.z_bit() {
                z |= bit;
            }
            if l == Pauli::Y {
                ny += 1;
            }
        }
        let phase = Complex64::i().powu(ny % 4);
        PauliAction { x, z, phase }
    }

    #[inline]
    pub fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Amplitude of `P|b>` on `|b ^ x>`.
    #[inline]
    pub fn coeff(&self, b: usize) -> Complex64 {
        self.phase * self.sign(b)
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "dense matrix qubits",
            needed: n,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

pub fn pauli_matrix(p: &PauliString) -> Result<DMatrix<Complex64>> {
    let n = p.n_qubits();
    check_capacity(n)?;
    let dim = 1usize << n;
    let act = PauliAction::new(p);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for b in 0..dim {
        m[(b ^ act.x, b)] = act.coeff(b);
    }
    Ok(m)
}

/// Dense matrix of a weighted sum of Pauli terms.
pub fn hamiltonian_matrix(terms: &[PauliTerm], n: usize) -> Result<DMatrix<Complex64>> {
    check_capacity(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for t in terms {
        if t.n_qubits() != n {
            return Err(Error::Dimension(t.n_qubits(), n));
        }
        let act = PauliAction::new(&t.string);
        for b in 0..dim {
            m[(b ^ act.x, b)] += act.coeff(b) * t.coefficient;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    pub n_qubits: usize,
    pub m: DMatrix<Complex64>,
}

impl DenseUnitary {
    pub fn identity(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        Ok(DenseUnitary {
            n_qubits: n,
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(Error::Dimension(m.nrows(), m.ncols()));
        }
        Ok(DenseUnitary {
            n_qubits: dim.trailing_zeros() as usize,
            m,
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `self * other`, i.e. `other` acts first.
    pub fn compose(&self, other: &DenseUnitary) -> Result<DenseUnitary> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(self.dim(), other.dim()));
        }
        Ok(DenseUnitary {
            n_qubits: self.n_qubits,
            m: &self.m * &other.m,
        })
    }

    pub fn dagger(&self) -> DenseUnitary {
        DenseUnitary {
            n_qubits: self.n_qubits,
            m: self.m.adjoint(),
        }
    }

    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let g = self.m.adjoint() * &self.m - DMatrix::<Complex64>::identity(dim, dim);
        spectral_norm(&g)
    }

    /// Left-multiply in place by `exp(i theta c P)`.
    pub fn apply_pauli_exp(&mut self, term: &PauliTerm, theta: f64) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(term.n_qubits(), self.n_qubits));
        }
        apply_pauli_exp_rows(&mut self.m, term, theta);
        Ok(())
    }
}

/// Left-multiply the columns of `m` by `exp(i theta c P)`.
pub fn apply_pauli_exp_rows(m: &mut DMatrix<Complex64>, term: &PauliTerm, theta: f64) {
    let a = theta * term.coefficient;
    if a == 0.0 {
        return;
    }
    let act = PauliAction::new(&term.string);
    let (c, s) = (a.cos(), a.sin());
    let is = Complex64::new(0.0, s);
    let dim = m.nrows();
    for col in 0..m.ncols() {
        let mut column = m.column_mut(col);
        if act.x == 0 {
            for b in 0..dim {
                column[b] *= c + is * act.coeff(b);
            }
            continue;
        }
        for b in 0..dim {
            let b2 = b ^ act.x;
            if b2 < b {
                continue;
            }
            // (P v)[b2] = coeff(b) v[b], (P v)[b] = coeff(b2) v[b2]
            let (v1, v2) = (column[b], column[b2]);
            column[b] = c * v1 + is * act.coeff(b2) * v2;
            column[b2] = c * v2 + is * act.coeff(b) * v1;
        }
    }
}

/// `exp(i theta c P) = cos(theta c) I + i sin(theta c) P`.
pub fn pauli_exponential(term: &PauliTerm, theta: f64) -> Result<DenseUnitary> {
    let n = term.n_qubits();
    check_capacity(n)?;
    let a = theta * term.coefficient;
    let dim = 1usize << n;
    let act = PauliAction::new(&term.string);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let is = Complex64::new(0.0, a.sin());
    for b in 0..dim {
        m[(b, b)] += ONE * a.cos();
        m[(b ^ act.x, b)] += is * act.coeff(b);
    }
    Ok(DenseUnitary { n_qubits: n, m })
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Spectral norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDistance {
    pub distance: f64,
    /// Global phase applied to `v`.
    pub alpha: f64,
    /// Set when the trace overlap vanished and the phase came from a grid search.
    pub grid_fallback: bool,
}

/// `min_alpha || u - e^{i alpha} v ||` in spectral norm.
pub fn distance_up_to_phase(u: &DenseUnitary, v: &DenseUnitary) -> Result<PhaseDistance> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(u.dim(), v.dim()));
    }
    let tr = (v.m.adjoint() * &u.m).trace();
    let dist = |alpha: f64| spectral_norm(&(&u.m - &v.m * Complex64::from_polar(1.0, alpha)));
    if tr.norm() > 1e-12 * u.dim() as f64 {
        let alpha = tr.arg();
        return Ok(PhaseDistance {
            distance: dist(alpha),
            alpha,
            grid_fallback: false,
        });
    }
    let steps = 720;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..steps {
        let a = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        let d = dist(a);
        if d < best.0 {
            best = (d, a);
        }
    }
    // golden-section polish around the best grid point
    let h = 2.0 * std::f64::consts::PI / steps as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let d = dist(alpha).min(best.0);
    Ok(PhaseDistance {
        distance: d,
        alpha,
        grid_fallback: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn term(s: &str) -> PauliTerm {
        PauliTerm::parse(s, 1.0).unwrap()
    }

    #[test]
    fn kron_order_qubit_zero_leftmost() {
        // X on qubit 0 of two qubits maps |00> to |10>, basis index 2
        let m = pauli_matrix(&"XI".parse().unwrap()).unwrap();
        assert_eq!(m[(2, 0)], ONE);
        let m = pauli_matrix(&"IX".parse().unwrap()).unwrap();
        assert_eq!(m[(1, 0)], ONE);
        let y = pauli_matrix(&"Y".parse().unwrap()).unwrap();
        assert_eq!(y[(1, 0)], Complex64::i());
        assert_eq!(y[(0, 1)], -Complex64::i());
    }

    #[test]
    fn exponential_examples() {
        let id = pauli_exponential(&term("Z"), 0.0).unwrap();
        assert!(spectral_norm(&(id.m - DMatrix::identity(2, 2))) < 1e-15);
        let u = pauli_exponential(&term("ZZ"), PI / 4.0).unwrap();
        let e = Complex64::from_polar(1.0, PI / 4.0);
        assert!((u.m[(0, 0)] - e).norm() < 1e-15);
        assert!((u.m[(1, 1)] - e.conj()).norm() < 1e-15);
        assert!((u.m[(3, 3)] - e).norm() < 1e-15);
    }

    #[test]
    fn in_place_matches_dense() {
        let t = PauliTerm::parse("XYZ", 0.7).unwrap();
        let mut u = DenseUnitary::identity(3).unwrap();
        u.apply_pauli_exp(&term("ZZI"), 0.3).unwrap();
        u.apply_pauli_exp(&t, -1.1).unwrap();
        let a = pauli_exponential(&term("ZZI"), 0.3).unwrap();
        let b = pauli_exponential(&t, -1.1).unwrap();
        let want = b.compose(&a).unwrap();
        assert!(spectral_norm(&(u.m - want.m)) < 1e-14);
    }

    #[test]
    fn distance_examples() {
        let u = pauli_exponential(&term("XY"), 0.4).unwrap();
        assert!(distance_up_to_phase(&u, &u).unwrap().distance < 1e-14);
        let mut v = u.clone();
        v.m *= Complex64::from_polar(1.0, PI / 3.0);
        assert!(distance_up_to_phase(&u, &v).unwrap().distance < 1e-14);
        let i2 = DenseUnitary::identity(1).unwrap();
        let x = DenseUnitary::from_matrix(pauli_matrix(&"X".parse().unwrap()).unwrap()).unwrap();
        let d = distance_up_to_phase(&i2, &x).unwrap();
        assert!(d.grid_fallback);
        // eigenvalues of I - e^{ia}X are 1 -+ e^{ia}; the best phase gives sqrt(2)
        assert!((d.distance - 2f64.sqrt()).abs() < 1e-9, "{}", d.distance);
    }

    #[test]
    fn capacity_guard() {
        let big = PauliString::identity(15);
        assert!(matches!(
            pauli_matrix(&big),
            Err(Error::Capacity { .. })
        ));
    }
}

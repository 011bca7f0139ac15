//! Product formulas and analytic Trotter error bounds.

pub mod bounds;
pub mod coeffs;
pub mod quad;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bounds::{
    bound_basic, bound_commutator, bound_explicit_sum, bound_taylor_of_taylor, commutator_integral,
    commutator_integral_quadrature, invert_for_delta, tightest_bound, BoundFamily, BoundQuery, BoundResult,
    DELTA_CAP,
};
pub use coeffs::taylor_coefficients;

/// `a_k = 1 / (4 - 4^{1/(2k-1)})`.
pub fn suzuki_a(k: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2 * k - 1) as f64))
}

pub fn check_order(p: usize) -> Result<()> {
    if p == 1 || (p >= 2 && p % 2 == 0) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("product formula order {p}; use 1 or an even order")))
    }
}

/// Number of stages `S_p`.
pub fn stages(p: usize) -> usize {
    if p == 1 {
        1
    } else {
        2 * 5usize.pow((p / 2 - 1) as u32)
    }
}

/// `B_p = (1/2) prod_{i=2}^{p/2} |1 - 4 a_i|`, with `B_1 = 1`.
pub fn b_p(p: usize) -> f64 {
    if p == 1 {
        return 1.0;
    }
    (2..=p / 2).fold(0.5, |acc, i| acc * (1.0 - 4.0 * suzuki_a(i)).abs())
}

/// `H_p = prod_{i=1}^{p/2-1} (4 + 4^{1/(2i+1)}) / |4 - 4^{1/(2i+1)}|`, with `H_1 = 1`.
pub fn h_p(p: usize) -> f64 {
    if p == 1 {
        return 1.0;
    }
    (1..p / 2).fold(1.0, |acc, i| {
        let r = 4f64.powf(1.0 / (2 * i + 1) as f64);
        acc * (4.0 + r) / (4.0 - r).abs()
    })
}

/// `G_p = 2/(p+1)! (10/3)^{(p+1)(p/2-1)}`, with `G_1 = 1`.
pub fn g_p(p: usize) -> f64 {
    if p == 1 {
        return 1.0;
    }
    let e = (p as f64 + 1.0) * (p as f64 / 2.0 - 1.0);
    2.0 / factorial(p + 1) * (10.0f64 / 3.0).powf(e)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFormula {
    pub p: usize,
    pub m: usize,
    pub s: usize,
    /// `a_k` for `k = 2..=p/2`.
    pub a: Vec<f64>,
    pub b_p: f64,
    pub h_p: f64,
    /// `coeffs[j][i]`: coefficient of layer `i` in stage `j`.
    pub coeffs: Vec<Vec<f64>>,
    /// Layer sweep direction of each stage (`true` = `0..M`).
    pub forward: Vec<bool>,
}

impl ProductFormula {
    /// Exponentials `(layer, coefficient)` in application order.
    pub fn sequence(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.s * self.m);
        for (j, row) in self.coeffs.iter().enumerate() {
            if self.forward[j] {
                out.extend((0..self.m).map(|i| (i, row[i])));
            } else {
                out.extend((0..self.m).rev().map(|i| (i, row[i])));
            }
        }
        out
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |a, c| a.max(c.abs()))
    }
}

/// Expand the recursive Suzuki formula into its stage coefficient matrix.
pub fn build_formula(p: usize, m: usize) -> Result<ProductFormula> {
    check_order(p)?;
    if m < 2 {
        return Err(Error::Precondition(format!("need at least two layers, got {m}")));
    }
    let (coeffs, forward) = expand(p, m);
    Ok(ProductFormula {
        p,
        m,
        s: coeffs.len(),
        a: (2..=p / 2).map(suzuki_a).collect(),
        b_p: b_p(p),
        h_p: h_p(p),
        coeffs,
        forward,
    })
}

fn expand(p: usize, m: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    match p {
        1 => (vec![vec![1.0; m]], vec![true]),
        2 => (vec![vec![0.5; m]; 2], vec![true, false]),
        _ => {
            let a = suzuki_a(p / 2);
            let (inner, dir) = expand(p - 2, m);
            let mut c = Vec::new();
            let mut f = Vec::new();
            for w in [a, a, 1.0 - 4.0 * a, a, a] {
                for (row, d) in inner.iter().zip(&dir) {
                    c.push(row.iter().map(|x| x * w).collect());
                    f.push(*d);
                }
            }
            (c, f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_shapes() {
        let f = build_formula(1, 5).unwrap();
        assert_eq!(f.s, 1);
        assert!(f.coeffs[0].iter().all(|&c| c == 1.0));
        let f = build_formula(2, 3).unwrap();
        assert_eq!(f.s, 2);
        assert!(f.coeffs.iter().flatten().all(|&c| c == 0.5));
        assert_eq!(f.h_p, 1.0);
        for p in [4, 6] {
            let f = build_formula(p, 4).unwrap();
            assert_eq!(f.s, stages(p));
            assert!(f.s <= 2 * 5usize.pow((p / 2 - 1) as u32));
        }
        assert!(build_formula(3, 4).is_err());
        assert!(build_formula(2, 1).is_err());
    }

    #[test]
    fn suzuki_constants() {
        assert!((suzuki_a(2) - 0.41449).abs() < 1e-5);
        assert!((h_p(4) - 2.31593).abs() < 1e-5);
        let r = 4f64.cbrt();
        assert!((h_p(4) - (4.0 + r) / (4.0 - r).abs()).abs() < 1e-15);
        assert!((g_p(2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g_p(1), 1.0);
    }

    #[test]
    fn coefficient_identities() {
        for p in [1, 2, 4, 6] {
            for m in [2, 3, 5] {
                let f = build_formula(p, m).unwrap();
                for i in 0..m {
                    let s: f64 = f.coeffs.iter().map(|r| r[i]).sum();
                    assert!((s - 1.0).abs() < 1e-12, "p={p} column {i} sums to {s}");
                }
                assert!((f.abs_sum() - m as f64 * f.h_p).abs() < 1e-12 * f.abs_sum());
                assert!(f.max_abs() <= f.b_p + 1e-15, "p={p}");
                if p >= 2 {
                    let k = p / 2;
                    assert!(f.b_p <= 0.5 * (2.0f64 / 3.0).powi(k as i32 - 1) + 1e-15);
                }
            }
        }
    }
}

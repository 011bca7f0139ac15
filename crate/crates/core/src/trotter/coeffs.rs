//! Series coefficients `f(p, M, l)` by symbolic expansion of the product formula
//! into words over the layer alphabet.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use super::{build_formula, factorial};
use crate::error::{Error, Result};

/// Largest dense word table (entries) the expansion will allocate.
pub const WORD_BUDGET: usize = 50_000_000;

fn cache() -> &'static RwLock<HashMap<(usize, usize, usize), f64>> {
    static C: OnceLock<RwLock<HashMap<(usize, usize, usize), f64>>> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients of `tau^len` for every word of length `len <= n` in the Taylor
/// expansion of the product formula. `tables[len][w]` is indexed by the word read
/// left to right as a base-`M` number.
fn expand_words(p: usize, m: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    let size = m.checked_pow(n as u32).filter(|&s| s <= WORD_BUDGET).ok_or_else(|| Error::Capacity {
        what: "taylor coefficient words".into(),
        needed: m.saturating_pow(n as u32),
        limit: WORD_BUDGET,
    })?;
    let _ = size;
    let formula = build_formula(p, m)?;
    let mut pow = vec![1usize; n + 1];
    for i in 1..=n {
        pow[i] = pow[i - 1] * m;
    }
    let mut tables: Vec<Vec<f64>> = (0..=n).map(|l| vec![0.0; pow[l]]).collect();
    tables[0][0] = 1.0;
    let inv_fact: Vec<f64> = (0..=n).map(|k| 1.0 / factorial(k)).collect();
    for (layer, c) in formula.sequence() {
        // exp(c tau H_layer) acts after everything so far: prepend `layer^k`
        let cp: Vec<f64> = (0..=n).map(|k| c.powi(k as i32) * inv_fact[k]).collect();
        for len in (0..n).rev() {
            let (lo, hi) = tables.split_at_mut(len + 1);
            let src = &lo[len];
            let mut prefix = 0usize;
            for k in 1..=n - len {
                prefix = prefix * m + layer;
                let dst = &mut hi[k - 1];
                let base = prefix * pow[len];
                let w = cp[k];
                for (i, &v) in src.iter().enumerate() {
                    if v != 0.0 {
                        dst[base + i] += v * w;
                    }
                }
            }
        }
    }
    Ok(tables)
}

fn compute(p: usize, m: usize, l: usize) -> Result<f64> {
    let t = expand_words(p, m, l + 1)?;
    let a = &t[l + 1];
    let b = &t[l];
    let fa = factorial(l + 1);
    let fb = factorial(l);
    let stride = b.len();
    let mut s = 0.0;
    // Neumaier-compensated sum of |A_w - B_{w[1..]}|
    let mut comp = 0.0;
    for (w, &av) in a.iter().enumerate() {
        let v = (fa * av - fb * b[w % stride]).abs();
        let t = s + v;
        if s.abs() >= v {
            comp += (s - t) + v;
        } else {
            comp += (v - t) + s;
        }
        s = t;
    }
    Ok(s + comp)
}

/// `f(p, M, l)`: the 1-norm of the `l`-th derivative of the remainder at zero,
/// expanded over words with cancellations between the two sums kept.
pub fn taylor_coefficients(p: usize, m: usize, l: usize) -> Result<f64> {
    if l < p {
        return Err(Error::Precondition(format!("need l >= p, got l={l} p={p}")));
    }
    if let Some(v) = cache().read().unwrap().get(&(p, m, l)) {
        return Ok(*v);
    }
    let v = compute(p, m, l)?;
    cache().write().unwrap().insert((p, m, l), v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(taylor_coefficients(1, 2, 1).unwrap(), 2.0);
        assert_eq!(taylor_coefficients(1, 2, 2).unwrap(), 6.0);
        assert_eq!(taylor_coefficients(1, 3, 1).unwrap(), 6.0);
        assert!((taylor_coefficients(2, 2, 2).unwrap() - 3.0).abs() < 1e-12);
        assert!((taylor_coefficients(2, 2, 4).unwrap() - 22.75).abs() < 1e-10);
        assert!(taylor_coefficients(2, 2, 1).is_err());
    }

    #[test]
    fn capacity_error() {
        assert!(matches!(taylor_coefficients(2, 40, 8), Err(Error::Capacity { .. })));
    }

    /// Independent oracle: sparse word map built from explicit word lists.
    fn oracle(p: usize, m: usize, l: usize) -> f64 {
        let f = build_formula(p, m).unwrap();
        let seq = f.sequence();
        let n = l + 1;
        let mut poly: HashMap<Vec<usize>, f64> = HashMap::new();
        poly.insert(vec![], 1.0);
        for (i, c) in seq {
            let mut next: HashMap<Vec<usize>, f64> = HashMap::new();
            for (w, v) in &poly {
                for k in 0..=(n - w.len()) {
                    let mut nw = vec![i; k];
                    nw.extend_from_slice(w);
                    *next.entry(nw).or_insert(0.0) += v * c.powi(k as i32) / factorial(k);
                }
            }
            poly = next;
        }
        let mut r: HashMap<Vec<usize>, f64> = HashMap::new();
        for (w, v) in &poly {
            if w.len() == n {
                *r.entry(w.clone()).or_insert(0.0) += v * factorial(n);
            }
            if w.len() == l {
                for j in 0..m {
                    let mut nw = vec![j];
                    nw.extend_from_slice(w);
                    *r.entry(nw).or_insert(0.0) -= v * factorial(l);
                }
            }
        }
        r.values().map(|v| v.abs()).sum()
    }

    #[test]
    fn dense_matches_sparse_oracle() {
        for (p, m, l) in [(1, 3, 2), (2, 3, 3), (4, 2, 5), (2, 4, 2)] {
            let a = taylor_coefficients(p, m, l).unwrap();
            let b = oracle(p, m, l);
            assert!((a - b).abs() <= 1e-10 * b, "f({p},{m},{l}) {a} vs {b}");
        }
    }
}

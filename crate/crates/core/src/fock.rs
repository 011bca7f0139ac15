//! Brute-force checks of the hopping-layer norm bound in a fixed fermion-number sector.

use nalgebra::DMatrix;

/// Largest `|eigenvalue|` of `sum_{(i,j)} (a_i^dag a_j + a_j^dag a_i)` restricted to `n` fermions.
pub fn hopping_sector_norm(modes: usize, pairs: &[(usize, usize)], n: usize) -> f64 {
    let states: Vec<usize> = (0..1usize << modes)
        .filter(|s| s.count_ones() as usize == n)
        .collect();
    if states.is_empty() {
        return 0.0;
    }
    let index = |s: usize| states.binary_search(&s).ok();
    let mut h = DMatrix::<f64>::zeros(states.len(), states.len());
    for (col, &s) in states.iter().enumerate() {
        for &(i, j) in pairs {
            for (a, b) in [(i, j), (j, i)] {
                // a_a^dag a_b
                if s >> b & 1 == 1 && s >> a & 1 == 0 {
                    let t = s ^ (1 << a) ^ (1 << b);
                    let (lo, hi) = (a.min(b), a.max(b));
                    let between = (s >> (lo + 1)) & ((1usize << (hi - lo - 1)) - 1);
                    let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    let row = index(t).expect("same sector");
                    h[(row, col)] += sign;
                }
            }
        }
    }
    h.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
}

/// The closed form `min(n, modes - n, |pairs|)`.
pub fn norm_bound(modes: usize, n_pairs: usize, n: usize) -> usize {
    n.min(modes - n).min(n_pairs)
}

/// All sets of disjoint pairs on `modes` sites, including the empty set.
pub fn matchings(modes: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: u32, modes: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>, start: usize) {
        out.push(cur.clone());
        for i in start..modes {
            if free >> i & 1 == 0 {
                continue;
            }
            for j in i + 1..modes {
                if free >> j & 1 == 0 {
                    continue;
                }
                cur.push((i, j));
                rec(free & !(1 << i) & !(1 << j), modes, cur, out, i + 1);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec((1u32 << modes) - 1, modes, &mut Vec::new(), &mut out, 0);
    out
}

#[derive(Debug, Clone, Default)]
pub struct NormBoundCheck {
    pub configurations: usize,
    pub violations: usize,
    pub not_tight: usize,
}

/// Check the bound and its tightness for every pair set and sector with `modes <= max_modes`.
pub fn check_norm_bound(max_modes: usize) -> NormBoundCheck {
    let mut out = NormBoundCheck::default();
    for modes in 1..=max_modes {
        for pairs in matchings(modes) {
            for n in 0..=modes {
                let got = hopping_sector_norm(modes, &pairs, n);
                let bound = norm_bound(modes, pairs.len(), n) as f64;
                out.configurations += 1;
                if got > bound + 1e-10 {
                    out.violations += 1;
                }
                if (got - bound).abs() > 1e-10 {
                    out.not_tight += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_modes_two_fermions() {
        let pairs = [(0, 1), (2, 3), (4, 5)];
        assert!((hopping_sector_norm(6, &pairs, 2) - 2.0).abs() < 1e-12);
        // non-adjacent pairs pick up string signs but the same spectrum
        let pairs = [(0, 5), (1, 3), (2, 4)];
        assert!((hopping_sector_norm(6, &pairs, 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matching_counts() {
        // involution numbers 1, 2, 4, 10, 26
        let got: Vec<usize> = (1..=5).map(|m| matchings(m).len()).collect();
        assert_eq!(got, vec![1, 2, 4, 10, 26]);
    }

    #[test]
    fn small_exhaustive() {
        let c = check_norm_bound(5);
        assert_eq!(c.violations, 0);
        assert_eq!(c.not_tight, 0);
    }
}

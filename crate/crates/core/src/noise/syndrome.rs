//! Syndrome bits of single-qubit Pauli errors.
//!
//! The checks are a GF(2) basis of every Pauli string commuting with all
//! encoded Hamiltonian summands. That group holds the loop stabilizers and the
//! per-spin parities, so a first-order error is silent exactly when it lies in
//! the algebra generated by the encoded terms.

use serde::{Deserialize, Serialize};

use crate::encoding::{encode, Encoding, FermiHubbardSpec, QubitClass};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub qubit: usize,
    pub pauli: Pauli,
    pub qubit_class: QubitClass,
    /// Indices of the checks this error flips.
    pub syndrome_bits: Vec<usize>,
    pub phase_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyndromeMap {
    pub encoding: Encoding,
    #[serde(rename = "L")]
    pub l: usize,
    pub n_qubits: usize,
    pub n_bits: usize,
    pub checks: Vec<PauliString>,
    pub entries: Vec<MappingEntry>,
}

/// Dense GF(2) row, 64 columns per word.
#[derive(Clone)]
struct Row(Vec<u64>);

impl Row {
    fn zeros(cols: usize) -> Self {
        Row(vec![0; cols.div_ceil(64)])
    }
    fn get(&self, c: usize) -> bool {
        self.0[c / 64] >> (c % 64) & 1 == 1
    }
    fn flip(&mut self, c: usize) {
        self.0[c / 64] ^= 1 << (c % 64);
    }
    fn xor(&mut self, o: &Row) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }
}

/// Basis of the null space of `rows` over GF(2).
fn null_space(mut rows: Vec<Row>, cols: usize) -> Vec<Row> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pr = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor(&pr);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = Row::zeros(cols);
        v.flip(free);
        for (i, &pc) in pivots.iter().enumerate() {
            if rows[i].get(free) {
                v.flip(pc);
            }
        }
        basis.push(v);
    }
    basis
}

/// Pauli strings commuting with every term, as a GF(2) basis.
pub fn centralizer(terms: &[PauliTerm], n: usize) -> Result<Vec<PauliString>> {
    // Vector layout (x_0..x_{n-1}, z_0..z_{n-1}); a term (xt, zt) gives the row (zt, xt).
    let rows: Vec<Row> = terms
        .iter()
        .map(|t| {
            if t.n_qubits() != n {
                return Err(Error::Dimension(t.n_qubits(), n));
            }
            let mut row = Row::zeros(2 * n);
            for (q, &p) in t.string.letters().iter().enumerate() {
                if p.z_bit() {
                    row.flip(q);
                }
                if p.x_bit() {
                    row.flip(n + q);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    null_space(rows, 2 * n)
        .into_iter()
        .map(|v| PauliString::new((0..n).map(|q| Pauli::from_bits(v.get(q), v.get(n + q))).collect()))
        .collect()
}

impl SyndromeMap {
    /// Map for the Fermi-Hubbard encoding on an `L x L` lattice.
    pub fn generate(l: usize, encoding: Encoding) -> Result<Self> {
        if encoding != Encoding::Compact {
            return Err(Error::Unsupported(
                "error mapping is only defined for the compact encoding".into(),
            ));
        }
        let spec = FermiHubbardSpec::unit(l, 1)?;
        let (layout, layers) = encode(&spec, encoding)?;
        let n = layout.total_qubits;
        let terms: Vec<PauliTerm> = layers.iter().flat_map(|l| l.terms()).collect();
        let checks = centralizer(&terms, n)?;
        let mut entries = Vec::with_capacity(3 * n);
        for q in 0..n {
            let class = layout.class_of(q);
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let e = PauliString::from_sparse(n, &[(q, p)])?;
                let mut bits = Vec::new();
                for (k, c) in checks.iter().enumerate() {
                    if !e.commutes(c)? {
                        bits.push(k);
                    }
                }
                entries.push(MappingEntry {
                    qubit: q,
                    pauli: p,
                    qubit_class: class,
                    syndrome_bits: bits,
                    phase_noise: class == QubitClass::Vertex && p == Pauli::Z,
                });
            }
        }
        Ok(SyndromeMap {
            encoding,
            l,
            n_qubits: n,
            n_bits: checks.len(),
            checks,
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("syndrome map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SyndromeMap = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != 3 * self.n_qubits {
            return Err(Error::Parse(format!(
                "expected {} entries, found {}",
                3 * self.n_qubits,
                self.entries.len()
            )));
        }
        for e in &self.entries {
            if e.qubit >= self.n_qubits || e.pauli == Pauli::I {
                return Err(Error::Parse(format!("bad entry for qubit {}", e.qubit)));
            }
            if let Some(&b) = e.syndrome_bits.iter().find(|&&b| b >= self.n_bits) {
                return Err(Error::Parse(format!("syndrome bit {b} out of range")));
            }
        }
        Ok(())
    }

    pub fn entry(&self, qubit: usize, pauli: Pauli) -> &MappingEntry {
        let k = match pauli {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
            Pauli::I => panic!("identity has no mapping entry"),
        };
        let e = &self.entries[3 * qubit + k];
        debug_assert!(e.qubit == qubit && e.pauli == pauli);
        e
    }

    /// Syndromes as bitsets, indexed `3 * qubit + (X, Y, Z)`.
    pub(crate) fn masks(&self) -> Vec<Vec<u64>> {
        let words = self.n_bits.div_ceil(64).max(1);
        let mut sorted: Vec<&MappingEntry> = self.entries.iter().collect();
        sorted.sort_by_key(|e| (e.qubit, e.pauli));
        sorted
            .iter()
            .map(|e| {
                let mut m = vec![0u64; words];
                for &b in &e.syndrome_bits {
                    m[b / 64] ^= 1 << (b % 64);
                }
                m
            })
            .collect()
    }

    /// Probability that two independent detectable single-qubit errors share a syndrome.
    pub fn collision_probability(&self) -> f64 {
        let mut counts = std::collections::HashMap::<&[usize], usize>::new();
        let mut total = 0usize;
        for e in self.entries.iter().filter(|e| !e.syndrome_bits.is_empty()) {
            *counts.entry(&e.syndrome_bits).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return 0.0;
        }
        counts
            .values()
            .map(|&c| (c as f64 / total as f64).powi(2))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::commutes;

    #[test]
    fn checks_commute_with_every_term() {
        let spec = FermiHubbardSpec::unit(3, 1).unwrap();
        let (_, layers) = encode(&spec, Encoding::Compact).unwrap();
        let m = SyndromeMap::generate(3, Encoding::Compact).unwrap();
        assert!(m.n_bits > 0);
        for l in &layers {
            for t in l.terms() {
                for c in &m.checks {
                    assert!(commutes(&t.string, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn first_order_table() {
        for l in [2, 3, 4] {
            let m = SyndromeMap::generate(l, Encoding::Compact).unwrap();
            for e in &m.entries {
                let silent = e.syndrome_bits.is_empty();
                assert_eq!(silent, e.phase_noise, "L={l} qubit {} {:?} {:?}", e.qubit, e.qubit_class, e.pauli);
            }
        }
    }

    #[test]
    fn null_space_small() {
        // rows: x0 + x1 = 0 over three columns
        let mut r = Row::zeros(3);
        r.flip(0);
        r.flip(1);
        let b = null_space(vec![r], 3);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert_eq!(v.get(0), v.get(1));
        }
    }

    #[test]
    fn vc_unsupported() {
        assert!(matches!(
            SyndromeMap::generate(2, Encoding::Vc),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn json_round_trip_and_shipped_file() {
        let m = SyndromeMap::generate(3, Encoding::Compact).unwrap();
        let back = SyndromeMap::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let shipped = include_str!("../../../../data/error_mapping.json");
        assert_eq!(SyndromeMap::from_json(shipped).unwrap(), m);
    }
}

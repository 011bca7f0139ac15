//! Pauli strings, weighted terms and their products.
//!
//! Qubit 0 is the leftmost letter and the leftmost tensor factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// `self * other = i^k * result`, returns `(k, result)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Pauli> {
        match c {
            'I' | 'i' | '_' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            _ => Err(Error::Parse(format!("bad Pauli letter '{c}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; n],
        }
    }

    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Precondition("empty Pauli string".into()));
        }
        Ok(PauliString { letters })
    }

    /// Build an `n`-qubit string from `(qubit, letter)` pairs.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n);
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::Dimension(q, n));
            }
            s.letters[q] = p;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        self.letters[q] = p;
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn overlaps(&self, other: &PauliString) -> bool {
        self.letters
            .iter()
            .zip(&other.letters)
            .any(|(a, b)| *a != Pauli::I && *b != Pauli::I)
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::Dimension(self.n_qubits(), other.n_qubits()));
        }
        let odd = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        Ok(odd % 2 == 0)
    }

    /// `self * other = i^k * result`.
    pub fn mul(&self, other: &PauliString) -> Result<(u8, PauliString)> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::Dimension(self.n_qubits(), other.n_qubits()));
        }
        let mut k = 0u8;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (ph, p) = a.mul(*b);
                k = (k + ph) % 4;
                p
            })
            .collect();
        Ok((k, PauliString { letters }))
    }

    /// Restrict to the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString {
            letters: qubits.iter().map(|&q| self.letters[q]).collect(),
        }
    }

    /// Symplectic bit vectors (x, z).
    pub fn bits(&self) -> (Vec<bool>, Vec<bool>) {
        (
            self.letters.iter().map(|p| p.x_bit()).collect(),
            self.letters.iter().map(|p| p.z_bit()).collect(),
        )
    }
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A real multiple of a Pauli string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(string: PauliString, coefficient: f64) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::Precondition("non-finite coefficient".into()));
        }
        Ok(PauliTerm {
            string,
            coefficient,
        })
    }

    pub fn unit(string: PauliString) -> Self {
        PauliTerm {
            string,
            coefficient: 1.0,
        }
    }

    pub fn parse(s: &str, coefficient: f64) -> Result<Self> {
        PauliTerm::new(s.parse()?, coefficient)
    }

    pub fn n_qubits(&self) -> usize {
        self.string.n_qubits()
    }

    pub fn weight(&self) -> usize {
        self.string.weight()
    }

    /// Product `i * self * other`, which is Hermitian when the factors anticommute.
    pub fn i_times_product(&self, other: &PauliTerm) -> Result<PauliTerm> {
        let (k, s) = self.string.mul(&other.string)?;
        let sign = match (k + 1) % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => return Err(Error::Precondition("product is not anti-Hermitian".into())),
        };
        Ok(PauliTerm {
            string: s,
            coefficient: sign * self.coefficient * other.coefficient,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn commutation_examples() {
        assert!(!commutes(&ps("XZX"), &ps("ZII")).unwrap());
        assert!(commutes(&ps("ZZ"), &ps("ZZ")).unwrap());
        assert!(commutes(&ps("XX"), &ps("ZZ")).unwrap());
        assert!(commutes(&ps("XZ"), &ps("ZZZ")).is_err());
    }

    #[test]
    fn products_carry_phase() {
        let (k, p) = ps("X").mul(&ps("Y")).unwrap();
        assert_eq!((k, p), (1, ps("Z")));
        let (k, p) = ps("ZX").mul(&ps("XZ")).unwrap();
        // ZX * XZ = (ZX)(XZ) = (iY)(-iY) = YY
        assert_eq!((k, p), (0, ps("YY")));
        let (k, p) = ps("XYZ").mul(&ps("XYZ")).unwrap();
        assert_eq!((k, p), (0, ps("III")));
    }

    #[test]
    fn i_times_product_is_target() {
        // i * (Z X I) * (I Y Z) = i * i Z Z Z = -ZZZ
        let h1 = PauliTerm::parse("ZXI", 1.0).unwrap();
        let h2 = PauliTerm::parse("IYZ", 1.0).unwrap();
        let t = h1.i_times_product(&h2).unwrap();
        assert_eq!(t.string, ps("ZZZ"));
        assert_eq!(t.coefficient, -1.0);
        assert!(h1.i_times_product(&PauliTerm::parse("ZXI", 1.0).unwrap()).is_err());
    }

    #[test]
    fn parse_print_roundtrip() {
        for s in ["IZX", "YYYY", "I"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert!("IQ".parse::<PauliString>().is_err());
        assert_eq!(ps("XIZY").support(), vec![0, 2, 3]);
        assert_eq!(ps("XIZY").weight(), 3);
    }
}

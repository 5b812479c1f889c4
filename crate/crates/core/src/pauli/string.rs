use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A power of `i`: `Phase(k)` stands for `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);

    pub fn to_complex(self) -> Complex64 {
        match self.0 & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }
}

/// Tensor product of single-qubit Paulis on up to 64 qubits.
///
/// Stored in symplectic form: bit `q` of `x` (`z`) is set when the factor on
/// qubit `q` has an X (Z) component, so Y sets both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub const MAX_QUBITS: usize = 64;

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_bits(n_qubits, 0, 0)
    }

    pub fn from_bits(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > Self::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n_qubits} must be in 1..=64"
            )));
        }
        let mask = mask(n_qubits);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidArgument(
                "bits set above the qubit count".into(),
            ));
        }
        Ok(PauliString { n_qubits, x, z })
    }

    /// Builds a string with the given factors on selected qubits and I elsewhere.
    pub fn from_factors(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        for &(q, p) in factors {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    len: n_qubits,
                });
            }
            s.set(q, p);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        let bit = 1u64 << qubit;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Returns `(phase, product)` with `phase * product == self * other`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        // Per-qubit phase of sigma_a sigma_b: +i for cyclic (XY, YZ, ZX), -i for anticyclic.
        let mut k: u32 = 0;
        let support = self.support() & other.support();
        let mut bits = support;
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let a = self.get(q);
            let b = other.get(q);
            k += match (a, b) {
                (Pauli::X, Pauli::Y) | (Pauli::Y, Pauli::Z) | (Pauli::Z, Pauli::X) => 1,
                (Pauli::Y, Pauli::X) | (Pauli::Z, Pauli::Y) | (Pauli::X, Pauli::Z) => 3,
                _ => 0,
            };
        }
        let product = PauliString {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        Ok((Phase((k & 3) as u8), product))
    }

    /// True when the factors commute on every qubit individually.
    pub fn commutes_qubitwise(&self, other: &PauliString) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let both = self.support() & other.support();
        Ok((self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0)
    }

    /// True when the two strings commute as operators.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(s.is_multiple_of(2))
    }

    /// Action on a computational basis state: `P|b> = phase * |b ^ x>`.
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let b64 = b as u64;
        let k = self.y_count() + 2 * (b64 & self.z).count_ones();
        (Phase((k & 3) as u8).to_complex(), (b64 ^ self.x) as usize)
    }

    /// Display form read with qubit 0 first instead of last.
    pub fn to_string_q0_first(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).symbol()).collect()
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits).rev() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses the highest-qubit-first display form.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let n = chars.len();
        let mut out = PauliString::identity(n)?;
        for (pos, c) in chars.iter().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid Pauli symbol '{other}' in \"{s}\""
                    )))
                }
            };
            out.set(n - 1 - pos, p);
        }
        Ok(out)
    }
}

impl Ord for PauliString {
    /// Lexicographic on the display form with I < X < Y < Z.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for q in (0..self.n_qubits).rev() {
                match self.get(q).cmp(&other.get(q)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn single(p: Pauli) -> DMatrix<Complex64> {
        let c = |r, i| Complex64::new(r, i);
        match p {
            Pauli::I => {
                DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
            }
            Pauli::X => {
                DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
            }
            Pauli::Y => {
                DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
            }
            Pauli::Z => {
                DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
            }
        }
    }

    // Kronecker product with the highest qubit as the leftmost factor.
    fn dense(s: &PauliString) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for q in (0..s.n_qubits()).rev() {
            m = m.kronecker(&single(s.get(q)));
        }
        m
    }

    fn all_strings(n: usize) -> Vec<PauliString> {
        let mut v = Vec::new();
        for x in 0..(1u64 << n) {
            for z in 0..(1u64 << n) {
                v.push(PauliString::from_bits(n, x, z).unwrap());
            }
        }
        v
    }

    #[test]
    fn display_is_highest_qubit_first() {
        let s = PauliString::from_factors(2, &[(1, Pauli::X), (0, Pauli::Z)]).unwrap();
        assert_eq!(s.to_string(), "XZ");
        assert_eq!(s.to_string_q0_first(), "ZX");
        assert_eq!(ps("XZ"), s);
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(ps("X").multiply(&ps("X")).unwrap(), (Phase(0), ps("I")));
        assert_eq!(ps("X").multiply(&ps("Y")).unwrap(), (Phase(1), ps("Z")));
        assert_eq!(ps("Y").multiply(&ps("X")).unwrap(), (Phase(3), ps("Z")));
    }

    #[test]
    fn mismatched_qubits_rejected() {
        assert!(ps("X").multiply(&ps("XX")).is_err());
        assert!(ps("X").commutes_qubitwise(&ps("XX")).is_err());
    }

    #[test]
    fn two_qubit_products_match_dense() {
        for a in all_strings(2) {
            for b in all_strings(2) {
                let (ph, p) = a.multiply(&b).unwrap();
                let lhs = dense(&a) * dense(&b);
                let rhs = dense(&p) * ph.to_complex();
                assert!((lhs - rhs).norm() < 1e-12, "{a} * {b}");
            }
        }
    }

    #[test]
    fn multiplication_is_associative_with_phases() {
        let strings = all_strings(2);
        for a in &strings {
            for b in &strings {
                for c in strings.iter().step_by(3) {
                    let (p1, ab) = a.multiply(b).unwrap();
                    let (p2, abc) = ab.multiply(c).unwrap();
                    let (q1, bc) = b.multiply(c).unwrap();
                    let (q2, abc2) = a.multiply(&bc).unwrap();
                    assert_eq!(abc, abc2);
                    assert_eq!(p1 * p2, q1 * q2);
                }
            }
        }
    }

    #[test]
    fn qubitwise_commutation_examples() {
        assert!(ps("IZ").commutes_qubitwise(&ps("XZ")).unwrap());
        assert!(!ps("X").commutes_qubitwise(&ps("Z")).unwrap());
        assert!(ps("II").commutes_qubitwise(&ps("YX")).unwrap());
        // XX and YY commute as operators but not qubit-wise.
        assert!(ps("XX").commutes(&ps("YY")).unwrap());
        assert!(!ps("XX").commutes_qubitwise(&ps("YY")).unwrap());
    }

    #[test]
    fn qubitwise_commutation_agrees_with_dense_commutator() {
        for a in all_strings(2) {
            for b in all_strings(2) {
                let comm = dense(&a) * dense(&b) - dense(&b) * dense(&a);
                assert_eq!(a.commutes(&b).unwrap(), comm.norm() < 1e-12);
                if a.commutes_qubitwise(&b).unwrap() {
                    assert!(comm.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn basis_action_matches_dense() {
        for s in all_strings(2) {
            let m = dense(&s);
            for b in 0..4 {
                let (ph, out) = s.apply_to_basis(b);
                assert!((m[(out, b)] - ph).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ordering_follows_display() {
        let mut v = [ps("ZI"), ps("IX"), ps("XZ"), ps("II")];
        v.sort();
        let shown: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["II", "IX", "XZ", "ZI"]);
    }
}

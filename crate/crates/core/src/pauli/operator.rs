use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::string::PauliString;
use crate::{Error, Result};

/// Largest register [`PauliOperator::to_matrix`] builds unless told otherwise.
pub const DEFAULT_MATRIX_QUBIT_CAP: usize = 12;

const DEFAULT_DROP: f64 = 1e-12;

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        PauliOperator {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Result<Self> {
        let mut op = Self::zero(n_qubits);
        op.add_term(PauliString::identity(n_qubits)?, Complex64::new(coeff, 0.0))?;
        Ok(op)
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut op = Self::zero(n_qubits);
        for (s, c) in terms {
            op.add_term(s, c)?;
        }
        op.simplify(DEFAULT_DROP);
        Ok(op)
    }

    /// Convenience constructor from display strings and real coefficients.
    pub fn from_real_terms(terms: &[(&str, f64)]) -> Result<Self> {
        let first: PauliString = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty term list".into()))?
            .0
            .parse()?;
        let parsed = terms
            .iter()
            .map(|(s, c)| Ok((s.parse::<PauliString>()?, Complex64::new(*c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(first.n_qubits(), parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in display order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Coefficient looked up by display string; zero when absent.
    pub fn coeff(&self, label: &str) -> Complex64 {
        label
            .parse::<PauliString>()
            .map(|s| self.coefficient(&s))
            .unwrap_or_default()
    }

    pub fn add_term(&mut self, s: PauliString, c: Complex64) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, s.n_qubits()));
        }
        *self.terms.entry(s).or_default() += c;
        Ok(())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops terms below `rel_tol * max|coeff|`.
    pub fn simplify(&mut self, rel_tol: f64) {
        let cut = rel_tol * self.max_abs_coeff();
        self.terms.retain(|_, c| c.norm() > cut && c.norm() > 0.0);
    }

    /// Zeroes imaginary parts that are below `rel_tol * max|coeff|`.
    pub fn chop_imaginary(&mut self, rel_tol: f64) {
        let cut = rel_tol * self.max_abs_coeff();
        for c in self.terms.values_mut() {
            if c.im.abs() <= cut {
                c.im = 0.0;
            }
        }
    }

    /// Pauli strings are Hermitian, so the sum is Hermitian iff all
    /// coefficients are real (up to `rel_tol * max|coeff|`).
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let cut = rel_tol * self.max_abs_coeff().max(f64::MIN_POSITIVE);
        self.terms.values().all(|c| c.im.abs() <= cut)
    }

    pub fn adjoint(&self) -> Self {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect(),
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            *out.terms.entry(*s).or_default() += c;
        }
        out.simplify(DEFAULT_DROP);
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (ph, p) = a.multiply(b)?;
                *out.terms.entry(p).or_default() += ph.to_complex() * ca * cb;
            }
        }
        out.simplify(DEFAULT_DROP);
        Ok(out)
    }

    /// Dense `2^n x 2^n` matrix, refusing registers above `cap` qubits.
    pub fn to_matrix_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::QubitCap {
                n: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (s, c) in &self.terms {
            for col in 0..dim {
                let (ph, row) = s.apply_to_basis(col);
                m[(row, col)] += c * ph;
            }
        }
        Ok(m)
    }

    /// Dense matrix with the default qubit cap.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_capped(DEFAULT_MATRIX_QUBIT_CAP)
    }

    /// Text form: one `<coefficient> <string>` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.terms {
            if c.im == 0.0 {
                let _ = writeln!(out, "{} {}", c.re, s);
            } else {
                let _ = writeln!(out, "{}{:+}i {}", c.re, c.im, s);
            }
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are skipped;
    /// repeated strings accumulate.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut op: Option<PauliOperator> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut parts = line.split_whitespace();
            let (c, s) = match (parts.next(), parts.next(), parts.next()) {
                (Some(c), Some(s), None) => (c, s),
                _ => {
                    return Err(err(format!(
                        "expected `<coefficient> <string>`, got \"{line}\""
                    )))
                }
            };
            let coeff =
                parse_coefficient(c).ok_or_else(|| err(format!("bad coefficient \"{c}\"")))?;
            let string: PauliString = s.parse().map_err(|e: Error| err(e.to_string()))?;
            let op = op.get_or_insert_with(|| PauliOperator::zero(string.n_qubits()));
            op.add_term(string, coeff).map_err(|e| err(e.to_string()))?;
        }
        let mut op = op.ok_or(Error::Parse {
            line: 0,
            msg: "no terms".into(),
        })?;
        op.simplify(DEFAULT_DROP);
        Ok(op)
    }
}

fn parse_coefficient(s: &str) -> Option<Complex64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(Complex64::new(v, 0.0));
    }
    let body = s.strip_suffix('i')?;
    // Split at the last sign that is not part of an exponent or the leading sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| {
        (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
    })?;
    let re = body[..split].parse::<f64>().ok()?;
    let im = body[split..].parse::<f64>().ok()?;
    Some(Complex64::new(re, im))
}

impl Add for &PauliOperator {
    type Output = PauliOperator;
    fn add(self, rhs: &PauliOperator) -> PauliOperator {
        self.try_add(rhs)
            .expect("qubit count mismatch in operator sum")
    }
}

impl Sub for &PauliOperator {
    type Output = PauliOperator;
    fn sub(self, rhs: &PauliOperator) -> PauliOperator {
        self + &(-rhs)
    }
}

impl Neg for &PauliOperator {
    type Output = PauliOperator;
    fn neg(self) -> PauliOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        self.try_mul(rhs)
            .expect("qubit count mismatch in operator product")
    }
}

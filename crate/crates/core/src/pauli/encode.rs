use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::PauliOperator;
use super::string::{Pauli, PauliString};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-9;

/// Creation or annihilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// A single fermionic ladder operator acting on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LadderOperatorExpr {
    pub kind: LadderKind,
    pub mode_index: usize,
}

impl LadderOperatorExpr {
    pub fn to_pauli(&self, n_qubits: usize) -> Result<PauliOperator> {
        match self.kind {
            LadderKind::Create => jw_raise(self.mode_index, n_qubits),
            LadderKind::Annihilate => jw_lower(self.mode_index, n_qubits),
        }
    }
}

fn z_chain_with(j: usize, n: usize, top: Pauli) -> Result<PauliString> {
    let mut factors: Vec<(usize, Pauli)> = (0..j).map(|q| (q, Pauli::Z)).collect();
    factors.push((j, top));
    PauliString::from_factors(n, &factors)
}

/// Jordan-Wigner annihilator `a_j = Z_0 ... Z_{j-1} (X_j + iY_j)/2`.
///
/// An occupied mode is `|1>` on its qubit.
pub fn jw_lower(j: usize, n: usize) -> Result<PauliOperator> {
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    PauliOperator::from_terms(
        n,
        [
            (z_chain_with(j, n, Pauli::X)?, Complex64::new(0.5, 0.0)),
            (z_chain_with(j, n, Pauli::Y)?, Complex64::new(0.0, 0.5)),
        ],
    )
}

/// Jordan-Wigner creator, the adjoint of [`jw_lower`].
pub fn jw_raise(j: usize, n: usize) -> Result<PauliOperator> {
    Ok(jw_lower(j, n)?.adjoint())
}

fn max_abs<T: Copy, F: Fn(T) -> f64>(it: impl Iterator<Item = T>, f: F) -> f64 {
    it.map(f).fold(0.0, f64::max)
}

/// One-body operator `sum_ij h_ij a_i^dag a_j` with one qubit per mode.
pub fn jw_encode_one_body(h: &DMatrix<f64>, n: usize) -> Result<PauliOperator> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "one-body matrix is {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.nrows() != n {
        return Err(Error::Dimension(format!(
            "one-body matrix has {} modes but {n} qubits were requested",
            h.nrows()
        )));
    }
    let scale = max_abs(h.iter(), |v: &f64| v.abs());
    let dev = max_abs((h - h.transpose()).iter(), |v: &f64| v.abs());
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let raise: Vec<_> = (0..n).map(|j| jw_raise(j, n)).collect::<Result<_>>()?;
    let lower: Vec<_> = (0..n).map(|j| jw_lower(j, n)).collect::<Result<_>>()?;
    let mut op = PauliOperator::zero(n);
    for i in 0..n {
        for j in 0..n {
            if h[(i, j)] == 0.0 {
                continue;
            }
            let term = (&raise[i] * &lower[j]).scale(Complex64::new(h[(i, j)], 0.0));
            op = &op + &term;
        }
    }
    op.chop_imaginary(1e-12);
    op.simplify(1e-12);
    Ok(op)
}

fn check_hermitian(h: &DMatrix<Complex64>) -> Result<()> {
    let dev = (h - h.adjoint()).norm();
    if dev > HERMITIAN_TOL * h.norm() {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Hilbert-Schmidt expansion `(1/N) sum_P Tr(P H) P` over all `4^n` strings.
pub fn compact_encode(h: &DMatrix<Complex64>) -> Result<PauliOperator> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::Dimension(format!("matrix is {}x{}", dim, h.ncols())));
    }
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    check_hermitian(h)?;
    let n = dim.trailing_zeros() as usize;
    let inv = 1.0 / dim as f64;
    let mut op = PauliOperator::zero(n);
    for x in 0..dim as u64 {
        for z in 0..dim as u64 {
            let s = PauliString::from_bits(n, x, z)?;
            // Tr(P H) = sum_c <c|P ... : P|c> = ph(c)|c^x>, so Tr(PH) = sum_c ph(c) H[c, c^x].
            let mut tr = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                let (ph, r) = s.apply_to_basis(c);
                tr += ph * h[(c, r)];
            }
            if tr.norm() > 0.0 {
                op.add_term(s, tr * inv)?;
            }
        }
    }
    op.chop_imaginary(1e-12);
    op.simplify(1e-12);
    Ok(op)
}

/// [`compact_encode`] for real symmetric input.
pub fn compact_encode_real(h: &DMatrix<f64>) -> Result<PauliOperator> {
    compact_encode(&h.map(|v| Complex64::new(v, 0.0)))
}

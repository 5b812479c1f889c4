use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate, GateKind};
use crate::pauli::{PauliOperator, PauliString};
use crate::{Error, Result};

/// Normalized amplitude vector over `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_qubits, amps })
    }

    /// Normalizes the given amplitudes; their count must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "state has zero or non-finite norm".into(),
            ));
        }
        Ok(QuantumState {
            n_qubits: dim.trailing_zeros() as usize,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Real amplitudes, zero-padded to the next power of two.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        let dim = values.len().next_power_of_two().max(2);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (a, v) in amps.iter_mut().zip(values) {
            a.re = *v;
        }
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_gate(&mut self, gate: &Gate, theta: f64) {
        apply_gate_slice(&mut self.amps, gate, theta);
    }

    /// `P|psi>` for a Pauli string.
    pub fn apply_pauli(&self, s: &PauliString) -> QuantumState {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let (ph, r) = s.apply_to_basis(b);
            out[r] += ph * a;
        }
        QuantumState {
            n_qubits: self.n_qubits,
            amps: out,
        }
    }
}

/// Applies one gate to an amplitude slice of length `2^n`.
pub(crate) fn apply_gate_slice(amps: &mut [Complex64], gate: &Gate, theta: f64) {
    let t = 1usize << gate.target;
    if gate.kind == GateKind::Cx {
        let c = 1usize << gate.control.expect("CX has a control");
        for i in 0..amps.len() {
            if i & c != 0 && i & t == 0 {
                amps.swap(i, i | t);
            }
        }
        return;
    }
    let u = gate.matrix(theta);
    for i in 0..amps.len() {
        if i & t == 0 {
            let (a0, a1) = (amps[i], amps[i | t]);
            amps[i] = u[0][0] * a0 + u[0][1] * a1;
            amps[i | t] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Runs `c` with the given parameters on the basis state `|initial>`.
pub fn apply_circuit(c: &Circuit, params: &[f64], initial: usize) -> Result<QuantumState> {
    let state = QuantumState::basis(c.n_qubits(), initial)?;
    apply_circuit_to(c, params, state)
}

/// Runs `c` on an arbitrary starting state.
pub fn apply_circuit_to(
    c: &Circuit,
    params: &[f64],
    mut state: QuantumState,
) -> Result<QuantumState> {
    if params.len() != c.n_parameters() {
        return Err(Error::Dimension(format!(
            "circuit takes {} parameters, got {}",
            c.n_parameters(),
            params.len()
        )));
    }
    if state.n_qubits != c.n_qubits() {
        return Err(Error::QubitMismatch(c.n_qubits(), state.n_qubits));
    }
    for g in c.gates() {
        let theta = g.angle.map(|a| a.resolve(params)).unwrap_or(0.0);
        state.apply_gate(g, theta);
    }
    Ok(state)
}

/// Exact `<psi|op|psi>` for a Hermitian operator.
pub fn expectation_exact(state: &QuantumState, op: &PauliOperator) -> Result<f64> {
    if op.n_qubits() != state.n_qubits {
        return Err(Error::QubitMismatch(op.n_qubits(), state.n_qubits));
    }
    if !op.is_hermitian(1e-9) {
        return Err(Error::NonHermitianOperator);
    }
    let mut total = 0.0;
    for (s, c) in op.terms() {
        let mut v = Complex64::new(0.0, 0.0);
        for (b, a) in state.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (ph, r) = s.apply_to_basis(b);
            v += state.amps[r].conj() * ph * a;
        }
        total += c.re * v.re;
    }
    Ok(total)
}

/// `|psi><psi|`.
pub fn density_matrix(state: &QuantumState) -> DMatrix<Complex64> {
    let d = state.amps.len();
    DMatrix::from_fn(d, d, |i, j| state.amps[i] * state.amps[j].conj())
}

/// JSON-friendly density matrix with basis labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixExport {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl DensityMatrixExport {
    /// Uses register bitstrings (highest qubit first) when `labels` is `None`.
    pub fn new(rho: &DMatrix<Complex64>, labels: Option<Vec<String>>) -> Self {
        let d = rho.nrows();
        let n = d.trailing_zeros() as usize;
        let labels = labels.unwrap_or_else(|| (0..d).map(|i| format!("{i:0n$b}")).collect());
        DensityMatrixExport {
            real: (0..d)
                .map(|i| (0..d).map(|j| rho[(i, j)].re).collect())
                .collect(),
            imag: (0..d)
                .map(|i| (0..d).map(|j| rho[(i, j)].im).collect())
                .collect(),
            labels,
        }
    }
}

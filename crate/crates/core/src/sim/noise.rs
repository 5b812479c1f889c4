use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate};
use super::sampling::sample_counts;
use super::state::{apply_gate_slice, QuantumState};
use crate::linalg::nnls;
use crate::pauli::PauliString;
use crate::rng::rng_for;
use crate::{Error, Result};

const MAX_CALIBRATION_QUBITS: usize = 6;

/// Independent readout flips and uniform depolarizing noise after every gate.
///
/// `readout_p10` is the probability of reading 1 from a prepared 0 and
/// `readout_p01` of reading 0 from a prepared 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub readout_p01: f64,
    pub readout_p10: f64,
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("readout_p01", self.readout_p01),
            ("readout_p10", self.readout_p10),
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.depol_1q > 0.0 || self.depol_2q > 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_p01 > 0.0 || self.readout_p10 > 0.0
    }

    /// Single-qubit confusion matrix `A[observed][prepared]`.
    pub fn readout_matrix(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.readout_p10, self.readout_p01],
            [self.readout_p10, 1.0 - self.readout_p01],
        ]
    }

    /// Applies the readout confusion to a probability vector.
    pub fn apply_readout(&self, probs: &mut [f64]) {
        if !self.has_readout_noise() {
            return;
        }
        let a = self.readout_matrix();
        let n = probs.len().trailing_zeros();
        for q in 0..n {
            let t = 1usize << q;
            for i in 0..probs.len() {
                if i & t == 0 {
                    let (p0, p1) = (probs[i], probs[i | t]);
                    probs[i] = a[0][0] * p0 + a[0][1] * p1;
                    probs[i | t] = a[1][0] * p0 + a[1][1] * p1;
                }
            }
        }
    }
}

/// Mixed state evolved under the noise model.
#[derive(Clone, Debug)]
pub(crate) struct NoisyState {
    rho: DMatrix<Complex64>,
}

impl NoisyState {
    pub fn from_pure(state: &QuantumState) -> Self {
        NoisyState {
            rho: super::state::density_matrix(state),
        }
    }

    fn apply_unitary(&mut self, gate: &Gate, theta: f64) {
        let d = self.rho.nrows();
        for j in 0..d {
            apply_gate_slice(self.rho.column_mut(j).as_mut_slice(), gate, theta);
        }
        self.rho.adjoint_mut();
        for j in 0..d {
            apply_gate_slice(self.rho.column_mut(j).as_mut_slice(), gate, theta);
        }
        self.rho.adjoint_mut();
    }

    /// `(1 - p) rho + p / 4^k sum_P P rho P` over all Paulis on `qubits`.
    fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p <= 0.0 {
            return;
        }
        let d = self.rho.nrows();
        let n = d.trailing_zeros() as usize;
        let k = qubits.len();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for code in 0..(1usize << (2 * k)) {
            let (mut x, mut z) = (0u64, 0u64);
            for (slot, &q) in qubits.iter().enumerate() {
                let sym = code >> (2 * slot) & 3;
                if sym & 1 == 1 {
                    x |= 1 << q;
                }
                if sym & 2 == 2 {
                    z |= 1 << q;
                }
            }
            let s = PauliString::from_bits(n, x, z).expect("qubits within register");
            for c in 0..d {
                let (pc, c2) = s.apply_to_basis(c);
                for r in 0..d {
                    let (pr, r2) = s.apply_to_basis(r);
                    acc[(r2, c2)] += pr * self.rho[(r, c)] * pc.conj();
                }
            }
        }
        let w = p / (1usize << (2 * k)) as f64;
        self.rho = &self.rho * Complex64::new(1.0 - p, 0.0) + acc * Complex64::new(w, 0.0);
    }

    pub fn apply_noisy_gate(&mut self, gate: &Gate, theta: f64, noise: &NoiseSpec) {
        self.apply_unitary(gate, theta);
        match gate.control {
            Some(c) => self.depolarize(&[c, gate.target], noise.depol_2q),
            None => self.depolarize(&[gate.target], noise.depol_1q),
        }
    }

    pub fn run(&mut self, c: &Circuit, params: &[f64], noise: &NoiseSpec) {
        for g in c.gates() {
            let theta = g.angle.map(|a| a.resolve(params)).unwrap_or(0.0);
            self.apply_noisy_gate(g, theta, noise);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.rho.nrows())
            .map(|i| self.rho[(i, i)].re.max(0.0))
            .collect()
    }
}

/// Readout calibration `A[observed][prepared]` used to correct counts.
#[derive(Clone, Debug, PartialEq)]
pub struct MitigationFilter {
    calibration: DMatrix<f64>,
}

impl MitigationFilter {
    pub fn new(calibration: DMatrix<f64>) -> Result<Self> {
        let d = calibration.nrows();
        if !calibration.is_square() || d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "calibration matrix is {}x{}",
                d,
                calibration.ncols()
            )));
        }
        for j in 0..d {
            let s: f64 = calibration.column(j).sum();
            if (s - 1.0).abs() > 1e-10 || calibration.column(j).iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "calibration column {j} is not a probability vector"
                )));
            }
        }
        Ok(MitigationFilter { calibration })
    }

    pub fn calibration_matrix(&self) -> &DMatrix<f64> {
        &self.calibration
    }

    pub fn n_qubits(&self) -> usize {
        self.calibration.nrows().trailing_zeros() as usize
    }

    /// Non-negative least-squares estimate of the pre-readout distribution,
    /// renormalized to unit sum.
    pub fn apply(&self, observed: &[f64]) -> Result<Vec<f64>> {
        if observed.len() != self.calibration.nrows() {
            return Err(Error::Dimension(format!(
                "filter covers {} outcomes, counts have {}",
                self.calibration.nrows(),
                observed.len()
            )));
        }
        let total: f64 = observed.iter().sum();
        if total <= 0.0 {
            return Ok(observed.to_vec());
        }
        let b = DVector::from_iterator(observed.len(), observed.iter().map(|v| v / total));
        let x = nnls(&self.calibration, &b);
        let s = x.sum();
        Ok(x.iter().map(|v| v / s).collect())
    }
}

/// Prepares every basis state with X gates under `noise` and records the
/// readout distribution. `shots_per_state = 0` uses exact probabilities.
pub fn build_calibration_filter(
    n_qubits: usize,
    noise: &NoiseSpec,
    shots_per_state: u64,
    seed: u64,
) -> Result<MitigationFilter> {
    if n_qubits > MAX_CALIBRATION_QUBITS {
        return Err(Error::QubitCap {
            n: n_qubits,
            cap: MAX_CALIBRATION_QUBITS,
        });
    }
    if n_qubits == 0 {
        return Err(Error::InvalidArgument(
            "calibration needs at least one qubit".into(),
        ));
    }
    noise.validate()?;
    let d = 1usize << n_qubits;
    let mut a = DMatrix::<f64>::zeros(d, d);
    for prepared in 0..d {
        let mut c = Circuit::new(n_qubits, 0);
        for q in 0..n_qubits {
            if prepared >> q & 1 == 1 {
                c.x(q)?;
            }
        }
        let mut st = NoisyState::from_pure(&QuantumState::basis(n_qubits, 0)?);
        st.run(&c, &[], noise);
        let mut p = st.probabilities();
        noise.apply_readout(&mut p);
        let col: Vec<f64> = if shots_per_state == 0 {
            let s: f64 = p.iter().sum();
            p.iter().map(|v| v / s).collect()
        } else {
            let mut rng = rng_for(seed ^ noise.seed, &[0xca1, prepared as u64]);
            sample_counts(&p, shots_per_state, &mut rng)
                .iter()
                .map(|&k| k as f64 / shots_per_state as f64)
                .collect()
        };
        for (i, v) in col.into_iter().enumerate() {
            a[(i, prepared)] = v;
        }
    }
    // Column sums are exact up to rounding; renormalize so validation is strict.
    for j in 0..d {
        let s = a.column(j).sum();
        a.column_mut(j).scale_mut(1.0 / s);
    }
    MitigationFilter::new(a)
}

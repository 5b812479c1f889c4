use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::noise::{MitigationFilter, NoiseSpec, NoisyState};
use super::state::{apply_circuit, apply_circuit_to, QuantumState};
use crate::pauli::{group_commuting, Pauli, PauliOperator};
use crate::rng::{derive_seed, rng_for};
use crate::{Error, Result};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// What to measure on: a circuit run from a basis state, or a given state.
#[derive(Clone, Copy, Debug)]
pub enum Preparation<'a> {
    Circuit {
        circuit: &'a Circuit,
        params: &'a [f64],
        initial: usize,
    },
    State(&'a QuantumState),
}

impl Preparation<'_> {
    fn n_qubits(&self) -> usize {
        match self {
            Preparation::Circuit { circuit, .. } => circuit.n_qubits(),
            Preparation::State(s) => s.n_qubits(),
        }
    }

    /// Noiseless output state.
    pub fn pure_state(&self) -> Result<QuantumState> {
        match *self {
            Preparation::Circuit {
                circuit,
                params,
                initial,
            } => apply_circuit(circuit, params, initial),
            Preparation::State(s) => Ok(s.clone()),
        }
    }
}

#[derive(Clone, Debug)]
struct GroupPlan {
    rotation: Circuit,
    /// `(Z-parity mask, coefficient)` per term after the basis change.
    terms: Vec<(usize, f64)>,
}

impl GroupPlan {
    fn value(&self, outcome: usize) -> f64 {
        self.terms
            .iter()
            .map(|&(mask, c)| {
                if (outcome & mask).count_ones().is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }
}

/// Commuting groups of a Hermitian operator with their basis-change circuits.
#[derive(Clone, Debug)]
pub struct MeasurementPlan {
    n_qubits: usize,
    constant: f64,
    groups: Vec<GroupPlan>,
}

impl MeasurementPlan {
    pub fn new(op: &PauliOperator) -> Result<Self> {
        if !op.is_hermitian(1e-9) {
            return Err(Error::NonHermitianOperator);
        }
        let n = op.n_qubits();
        let mut constant = 0.0;
        let mut groups = Vec::new();
        for g in group_commuting(op) {
            let mut terms = Vec::new();
            for (s, c) in &g.terms {
                if s.is_identity() {
                    constant += c.re;
                } else {
                    terms.push((s.support() as usize, c.re));
                }
            }
            if terms.is_empty() {
                continue;
            }
            let mut rotation = Circuit::new(n, 0);
            for (q, p) in g.basis(n).into_iter().enumerate() {
                match p {
                    Pauli::X => {
                        rotation.h(q)?;
                    }
                    Pauli::Y => {
                        rotation.sdg(q)?.h(q)?;
                    }
                    _ => {}
                }
            }
            groups.push(GroupPlan { rotation, terms });
        }
        Ok(MeasurementPlan {
            n_qubits: n,
            constant,
            groups,
        })
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Shot-sampled expectation; every group receives the full `shots`.
    pub fn estimate(
        &self,
        prep: Preparation<'_>,
        shots: u64,
        seed: u64,
        noise: Option<&NoiseSpec>,
        filter: Option<&MitigationFilter>,
    ) -> Result<Estimate> {
        if shots < 1 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        if prep.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, prep.n_qubits()));
        }
        if let Some(f) = filter {
            if f.n_qubits() != self.n_qubits {
                return Err(Error::Dimension(format!(
                    "filter is for {} qubits, operator has {}",
                    f.n_qubits(),
                    self.n_qubits
                )));
            }
        }
        if let Some(n) = noise {
            n.validate()?;
        }
        let gate_noise = noise.filter(|n| n.has_gate_noise());
        let noisy_base = match gate_noise {
            Some(n) => Some(match prep {
                Preparation::Circuit {
                    circuit,
                    params,
                    initial,
                } => {
                    if params.len() != circuit.n_parameters() {
                        return Err(Error::Dimension("parameter count mismatch".into()));
                    }
                    let mut st =
                        NoisyState::from_pure(&QuantumState::basis(self.n_qubits, initial)?);
                    st.run(circuit, params, n);
                    st
                }
                Preparation::State(s) => NoisyState::from_pure(s),
            }),
            None => None,
        };
        let pure_base = match noisy_base {
            Some(_) => None,
            None => Some(prep.pure_state()?),
        };
        let seed = derive_seed(seed, &[noise.map(|n| n.seed).unwrap_or(0)]);
        let mut mean = self.constant;
        let mut var = 0.0;
        for (gi, g) in self.groups.iter().enumerate() {
            let mut probs = match (&noisy_base, &pure_base) {
                (Some(base), _) => {
                    let mut st = base.clone();
                    st.run(&g.rotation, &[], gate_noise.expect("set with noisy base"));
                    st.probabilities()
                }
                (None, Some(base)) => {
                    apply_circuit_to(&g.rotation, &[], base.clone())?.probabilities()
                }
                (None, None) => unreachable!("one base is always prepared"),
            };
            if let Some(n) = noise {
                n.apply_readout(&mut probs);
            }
            let mut rng = rng_for(seed, &[gi as u64]);
            let counts = sample_counts(&probs, shots, &mut rng);
            let mut freq: Vec<f64> = counts.iter().map(|&k| k as f64 / shots as f64).collect();
            if let Some(f) = filter {
                freq = f.apply(&freq)?;
            }
            let (mut m1, mut m2) = (0.0, 0.0);
            for (b, p) in freq.iter().enumerate() {
                if *p > 0.0 {
                    let v = g.value(b);
                    m1 += p * v;
                    m2 += p * v * v;
                }
            }
            mean += m1;
            var += (m2 - m1 * m1).max(0.0) / shots as f64;
        }
        Ok(Estimate {
            mean,
            std_error: var.sqrt(),
        })
    }
}

/// Sampled `<psi(theta)|op|psi(theta)>` for `psi = c(params)|initial>`.
#[allow(clippy::too_many_arguments)]
pub fn expectation_sampled(
    c: &Circuit,
    params: &[f64],
    initial: usize,
    op: &PauliOperator,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseSpec>,
    filter: Option<&MitigationFilter>,
) -> Result<Estimate> {
    let plan = MeasurementPlan::new(op)?;
    plan.estimate(
        Preparation::Circuit {
            circuit: c,
            params,
            initial,
        },
        shots,
        seed,
        noise,
        filter,
    )
}

/// Multinomial draw of `shots` outcomes via sequential binomials.
pub fn sample_counts<R: Rng>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() || mass <= p {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).map(|b| b.sample(rng)).unwrap_or(0);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    counts
}

/// `bitstring,count` CSV (highest qubit first), nonzero outcomes only.
pub fn counts_csv(counts: &[u64]) -> String {
    let n = counts.len().trailing_zeros() as usize;
    let mut out = String::from("bitstring,count\n");
    for (b, &k) in counts.iter().enumerate() {
        if k > 0 {
            let _ = writeln!(out, "{b:0n$b},{k}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{build_calibration_filter, expectation_exact, Angle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z() -> PauliOperator {
        PauliOperator::from_real_terms(&[("Z", 1.0)]).unwrap()
    }

    #[test]
    fn deterministic_outcome_has_zero_variance() {
        let c = Circuit::new(1, 0);
        let e = expectation_sampled(&c, &[], 0, &z(), 100_000, 1, None, None).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn zero_shots_rejected() {
        let c = Circuit::new(1, 0);
        assert!(expectation_sampled(&c, &[], 0, &z(), 0, 1, None, None).is_err());
    }

    #[test]
    fn readout_bias_and_mitigation() {
        let noise = NoiseSpec {
            readout_p10: 0.02,
            ..Default::default()
        };
        let c = Circuit::new(1, 0);
        let raw = expectation_sampled(&c, &[], 0, &z(), 1_000_000, 9, Some(&noise), None).unwrap();
        assert!((raw.mean - 0.96).abs() < 4.0 * raw.std_error.max(1e-4));
        let f = build_calibration_filter(1, &noise, 0, 0).unwrap();
        let fixed =
            expectation_sampled(&c, &[], 0, &z(), 1_000_000, 9, Some(&noise), Some(&f)).unwrap();
        assert!((fixed.mean - 1.0).abs() <= 3.0 * raw.std_error.max(1e-4));
    }

    #[test]
    fn filter_dimension_mismatch() {
        let f = build_calibration_filter(2, &NoiseSpec::default(), 0, 0).unwrap();
        let c = Circuit::new(1, 0);
        assert!(matches!(
            expectation_sampled(&c, &[], 0, &z(), 10, 0, None, Some(&f)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn x_and_y_basis_changes() {
        let mut c = Circuit::new(1, 2);
        c.ry(0, Angle::param(0))
            .unwrap()
            .rz(0, Angle::param(1))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..10 {
            let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let state = apply_circuit(&c, &p, 0).unwrap();
            for label in ["X", "Y"] {
                let op = PauliOperator::from_real_terms(&[(label, 1.0)]).unwrap();
                let exact = expectation_exact(&state, &op).unwrap();
                let e = expectation_sampled(&c, &p, 0, &op, 50_000, trial, None, None).unwrap();
                assert!(
                    (e.mean - exact).abs() <= 4.0 * e.std_error + 1e-12,
                    "{label}: {} vs {exact}",
                    e.mean
                );
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut c = Circuit::new(2, 1);
        c.ry(0, Angle::param(0)).unwrap().cx(0, 1).unwrap();
        let op = PauliOperator::from_real_terms(&[("ZZ", 1.0), ("XI", 0.5), ("IZ", -0.3)]).unwrap();
        let a = expectation_sampled(&c, &[0.7], 0, &op, 1000, 17, None, None).unwrap();
        let b = expectation_sampled(&c, &[0.7], 0, &op, 1000, 17, None, None).unwrap();
        let d = expectation_sampled(&c, &[0.7], 0, &op, 1000, 18, None, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn counts_sum_to_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_counts(&[0.1, 0.0, 0.6, 0.3], 12345, &mut rng);
        assert_eq!(c.iter().sum::<u64>(), 12345);
        assert_eq!(c[1], 0);
        assert_eq!(counts_csv(&[3, 0, 1, 0]), "bitstring,count\n00,3\n10,1\n");
    }
}

//! VQE and subspace-search VQE drivers.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::optim::{
    minimize, parameter_shift_gradient, Evaluation, Objective, OptTrace, OptimizerConfig,
};
use crate::pauli::PauliOperator;
use crate::rng::derive_seed;
use crate::sim::{
    apply_circuit, build_calibration_filter, expectation_exact, Circuit, Estimate, MeasurementPlan,
    MitigationFilter, NoiseSpec, Preparation, QuantumState, Tier,
};
use crate::{Error, Result};

/// Iterations averaged for the reported energy in sampled tiers.
pub const TAIL_WINDOW: usize = 10;

/// How expectations are evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSettings {
    pub tier: Tier,
    pub shots: u64,
    pub noise: Option<NoiseSpec>,
    /// Correct readout with a calibration filter (noisy tier only).
    pub mitigation: bool,
    /// Shots per prepared state when building the filter; 0 means exact.
    pub calibration_shots: u64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            tier: Tier::Sv,
            shots: 8192,
            noise: None,
            mitigation: false,
            calibration_shots: 8192,
        }
    }
}

impl SimulationSettings {
    pub fn sv() -> Self {
        Self::default()
    }

    pub fn shots(shots: u64) -> Self {
        SimulationSettings {
            tier: Tier::Shots,
            shots,
            ..Default::default()
        }
    }

    pub fn noisy(shots: u64, noise: NoiseSpec, mitigation: bool) -> Self {
        SimulationSettings {
            tier: Tier::Noisy,
            shots,
            noise: Some(noise),
            mitigation,
            calibration_shots: shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tier != Tier::Sv && self.shots == 0 {
            return Err(Error::InvalidArgument(
                "sampled tiers need shots >= 1".into(),
            ));
        }
        if self.tier == Tier::Noisy && self.noise.is_none() {
            return Err(Error::InvalidArgument(
                "the noisy tier needs a noise model".into(),
            ));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    /// Readout filter for the noisy tier with mitigation on, else `None`.
    pub fn mitigation_filter(
        &self,
        n_qubits: usize,
        seed: u64,
    ) -> Result<Option<MitigationFilter>> {
        match (self.tier, self.mitigation, &self.noise) {
            (Tier::Noisy, true, Some(n)) => Ok(Some(build_calibration_filter(
                n_qubits,
                n,
                self.calibration_shots,
                derive_seed(seed, &[0xf117]),
            )?)),
            _ => Ok(None),
        }
    }

    pub fn active_noise(&self) -> Option<&NoiseSpec> {
        match self.tier {
            Tier::Noisy => self.noise.as_ref(),
            _ => None,
        }
    }
}

/// Reference states and their strictly decreasing weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsvqeSpec {
    pub reference_states: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SsvqeSpec {
    pub fn new(reference_states: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let s = SsvqeSpec {
            reference_states,
            weights,
        };
        s.validate()?;
        Ok(s)
    }

    /// Weights `1, 1/2, 1/4, ...` for the given references.
    pub fn geometric(reference_states: Vec<usize>) -> Result<Self> {
        let weights = (0..reference_states.len())
            .map(|i| 0.5f64.powi(i as i32))
            .collect();
        Self::new(reference_states, weights)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.reference_states;
        if r.is_empty() || r.len() != self.weights.len() {
            return Err(Error::InvalidArgument(
                "need one weight per reference state".into(),
            ));
        }
        for (i, a) in r.iter().enumerate() {
            if r[..i].contains(a) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate reference state {a}"
                )));
            }
        }
        if self.weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        if self.weights.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "weights must strictly decrease".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted sum of reference-state energies under one shared circuit.
pub struct VariationalObjective {
    op: PauliOperator,
    plan: MeasurementPlan,
    circuit: Circuit,
    refs: Vec<usize>,
    weights: Vec<f64>,
    settings: SimulationSettings,
    filter: Option<MitigationFilter>,
    scale: f64,
}

impl VariationalObjective {
    pub fn new(
        op: &PauliOperator,
        circuit: Circuit,
        spec: &SsvqeSpec,
        settings: &SimulationSettings,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        settings.validate()?;
        if circuit.n_qubits() != op.n_qubits() {
            return Err(Error::QubitMismatch(circuit.n_qubits(), op.n_qubits()));
        }
        let dim = 1usize << op.n_qubits();
        if let Some(&bad) = spec.reference_states.iter().find(|&&r| r >= dim) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: dim,
            });
        }
        let filter = settings.mitigation_filter(op.n_qubits(), seed)?;
        Ok(VariationalObjective {
            plan: MeasurementPlan::new(op)?,
            op: op.clone(),
            circuit,
            refs: spec.reference_states.clone(),
            weights: spec.weights.clone(),
            settings: settings.clone(),
            filter,
            scale: op.max_abs_coeff().max(f64::MIN_POSITIVE),
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn exact_energies(&self, circuit: &Circuit, params: &[f64]) -> Result<Vec<f64>> {
        self.refs
            .iter()
            .map(|&r| expectation_exact(&apply_circuit(circuit, params, r)?, &self.op))
            .collect()
    }

    /// Per-reference estimates at the current tier.
    pub fn components(&self, params: &[f64], eval_seed: u64) -> Result<Vec<Estimate>> {
        if self.settings.tier == Tier::Sv {
            return Ok(self
                .exact_energies(&self.circuit, params)?
                .into_iter()
                .map(|mean| Estimate {
                    mean,
                    std_error: 0.0,
                })
                .collect());
        }
        self.refs
            .par_iter()
            .enumerate()
            .map(|(i, &r)| {
                self.plan.estimate(
                    Preparation::Circuit {
                        circuit: &self.circuit,
                        params,
                        initial: r,
                    },
                    self.settings.shots,
                    derive_seed(eval_seed, &[i as u64]),
                    self.settings.active_noise(),
                    self.filter.as_ref(),
                )
            })
            .collect()
    }
}

impl Objective for VariationalObjective {
    fn dimension(&self) -> usize {
        self.circuit.n_parameters()
    }

    fn evaluate(&self, params: &[f64], eval_seed: u64) -> Result<Evaluation> {
        let components = self.components(params, eval_seed)?;
        let cost = components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.mean)
            .sum();
        let var: f64 = components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| (w * c.std_error).powi(2))
            .sum();
        Ok(Evaluation {
            cost,
            std_error: var.sqrt(),
            components,
        })
    }

    fn is_deterministic(&self) -> bool {
        self.settings.tier == Tier::Sv
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn gradient(&self, params: &[f64]) -> Option<Result<Vec<f64>>> {
        if self.settings.tier != Tier::Sv {
            return None;
        }
        Some(parameter_shift_gradient(&self.circuit, params, |c, p| {
            Ok(self
                .exact_energies(c, p)?
                .iter()
                .zip(&self.weights)
                .map(|(e, w)| w * e)
                .sum())
        }))
    }
}

/// Final estimate for one reference state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateResult {
    pub reference: usize,
    pub reference_bitstring: String,
    pub energy: f64,
    pub std_error: f64,
    /// `sqrt(max(energy, 0))`.
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub states: Vec<StateResult>,
    pub trace: OptTrace,
    pub final_params: Vec<f64>,
    pub circuit: Circuit,
    pub tier: Tier,
    /// `order[i]` is the rank of state `i`'s energy (0 = lowest).
    pub order: Vec<usize>,
}

impl SpectrumResult {
    /// `iteration,E_i,std_error` for reference `i`.
    pub fn reference_trace_csv(&self, i: usize) -> Result<String> {
        if i >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.states.len(),
            });
        }
        let mut out = format!("iteration,E_{i},std_error\n");
        for r in &self.trace.records {
            if let Some(c) = r.components.get(i) {
                let _ = writeln!(out, "{},{},{}", r.iteration, c.mean, c.std_error);
            }
        }
        Ok(out)
    }
}

/// Mean of the last `window` recorded estimates of component `i`. The
/// error is the RMS of their per-measurement standard errors, i.e. the
/// shot noise of one measurement near the final parameters.
pub fn tail_estimate(trace: &OptTrace, i: usize, window: usize) -> Option<Estimate> {
    let vals: Vec<&Estimate> = trace
        .records
        .iter()
        .rev()
        .take(window.max(1))
        .filter_map(|r| r.components.get(i))
        .collect();
    let n = vals.len() as f64;
    if vals.is_empty() {
        return None;
    }
    Some(Estimate {
        mean: vals.iter().map(|e| e.mean).sum::<f64>() / n,
        std_error: (vals.iter().map(|e| e.std_error.powi(2)).sum::<f64>() / n).sqrt(),
    })
}

pub fn run_vqe(
    h: &PauliOperator,
    ansatz: &AnsatzSpec,
    initial: usize,
    settings: &SimulationSettings,
    optimizer: &OptimizerConfig,
    seed: u64,
) -> Result<SpectrumResult> {
    run_ssvqe(
        h,
        ansatz,
        &SsvqeSpec::new(vec![initial], vec![1.0])?,
        settings,
        optimizer,
        seed,
    )
}

pub fn run_ssvqe(
    h: &PauliOperator,
    ansatz: &AnsatzSpec,
    spec: &SsvqeSpec,
    settings: &SimulationSettings,
    optimizer: &OptimizerConfig,
    seed: u64,
) -> Result<SpectrumResult> {
    if ansatz.n_qubits != h.n_qubits() {
        return Err(Error::QubitMismatch(ansatz.n_qubits, h.n_qubits()));
    }
    let circuit = ansatz.build()?;
    let obj = VariationalObjective::new(h, circuit.clone(), spec, settings, seed)?;
    let trace = minimize(&obj, optimizer, seed)?;
    let params = trace.final_params.clone();
    let n = h.n_qubits();
    let estimates: Vec<Estimate> = match settings.tier {
        Tier::Sv => obj.components(&params, 0)?,
        _ => (0..spec.reference_states.len())
            .map(|i| {
                tail_estimate(&trace, i, TAIL_WINDOW)
                    .ok_or_else(|| Error::Optimizer("empty trace".into()))
            })
            .collect::<Result<_>>()?,
    };
    let states: Vec<StateResult> = spec
        .reference_states
        .iter()
        .zip(&estimates)
        .map(|(&r, e)| StateResult {
            reference: r,
            reference_bitstring: format!("{r:0n$b}"),
            energy: e.mean,
            std_error: e.std_error,
            mass: e.mean.max(0.0).sqrt(),
        })
        .collect();
    let mut idx: Vec<usize> = (0..states.len()).collect();
    idx.sort_by(|&a, &b| states[a].energy.total_cmp(&states[b].energy));
    let mut order = vec![0; states.len()];
    for (rank, &i) in idx.iter().enumerate() {
        order[i] = rank;
    }
    Ok(SpectrumResult {
        states,
        final_params: params,
        circuit,
        tier: settings.tier,
        order,
        trace,
    })
}

/// Noiseless `U(theta*)|ref_index>`.
pub fn final_state(result: &SpectrumResult, index: usize) -> Result<QuantumState> {
    let s = result.states.get(index).ok_or(Error::IndexOutOfRange {
        index,
        len: result.states.len(),
    })?;
    apply_circuit(&result.circuit, &result.final_params, s.reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::OptimizerKind;

    #[test]
    fn single_qubit_z_minimum() {
        let z = PauliOperator::from_real_terms(&[("Z", 1.0)]).unwrap();
        let cfg = OptimizerConfig::new(OptimizerKind::Grad, 200);
        let r = run_vqe(
            &z,
            &AnsatzSpec::hea(1, 1),
            0,
            &SimulationSettings::sv(),
            &cfg,
            1,
        )
        .unwrap();
        assert!((r.states[0].energy + 1.0).abs() < 1e-9);
    }

    #[test]
    fn spec_validation() {
        assert!(SsvqeSpec::new(vec![0, 0], vec![1.0, 0.5]).is_err());
        assert!(SsvqeSpec::new(vec![0, 1], vec![0.5, 0.5]).is_err());
        assert!(SsvqeSpec::new(vec![0, 1], vec![1.0]).is_err());
        assert_eq!(
            SsvqeSpec::geometric(vec![0, 1, 2, 3]).unwrap().weights,
            [1.0, 0.5, 0.25, 0.125]
        );
    }

    #[test]
    fn diagonal_operator_orders_references_by_weight() {
        // diag(1, 2, 3, 4) = 2.5 II - 1 IZ - 0.5 ZI... built from its matrix.
        let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, 2.0, 3.0, 4.0,
        ]));
        let op = crate::pauli::compact_encode_real(&m).unwrap();
        let spec = SsvqeSpec::geometric(vec![3, 2, 1, 0]).unwrap();
        let cfg = OptimizerConfig::new(OptimizerKind::Grad, 300);
        let r = run_ssvqe(
            &op,
            &AnsatzSpec::hea(2, 2),
            &spec,
            &SimulationSettings::sv(),
            &cfg,
            5,
        )
        .unwrap();
        for (k, s) in r.states.iter().enumerate() {
            assert!(
                (s.energy - (k + 1) as f64).abs() < 1e-6,
                "{k}: {}",
                s.energy
            );
        }
        assert_eq!(r.order, [0, 1, 2, 3]);
    }

    #[test]
    fn mismatched_register_rejected() {
        let z = PauliOperator::from_real_terms(&[("ZZ", 1.0)]).unwrap();
        let cfg = OptimizerConfig::new(OptimizerKind::Grad, 5);
        assert!(run_vqe(
            &z,
            &AnsatzSpec::hea(1, 1),
            0,
            &SimulationSettings::sv(),
            &cfg,
            1
        )
        .is_err());
        assert!(run_vqe(
            &z,
            &AnsatzSpec::hea(2, 1),
            4,
            &SimulationSettings::sv(),
            &cfg,
            1
        )
        .is_err());
    }

    #[test]
    fn tail_estimate_averages_window() {
        let recs = (0..20)
            .map(|k| crate::optim::IterationRecord {
                iteration: k,
                params_hash: 0,
                cost: 0.0,
                std_error: 0.0,
                components: vec![Estimate {
                    mean: if k % 2 == 0 { 1.0 } else { 3.0 },
                    std_error: if k < 10 {
                        9.0
                    } else if k % 2 == 0 {
                        3.0
                    } else {
                        4.0
                    },
                }],
            })
            .collect();
        let t = OptTrace {
            records: recs,
            final_params: vec![],
            final_cost: 0.0,
            final_std_error: 0.0,
            termination: crate::optim::Termination::MaxIterations,
            restart: 0,
        };
        let e = tail_estimate(&t, 0, 10).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!((e.std_error - 12.5f64.sqrt()).abs() < 1e-12);
    }
}

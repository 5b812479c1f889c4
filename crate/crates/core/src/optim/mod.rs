//! Classical optimizers for the variational loop.
//!
//! Costs are divided by [`Objective::scale`] internally so that step-size
//! heuristics work on O(1) numbers; traces report the original units.

mod grad;
mod simplex;
mod spsa;

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_for};
use crate::sim::Estimate;
use crate::{Error, Result};

pub use grad::parameter_shift_gradient;

/// One cost evaluation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    pub std_error: f64,
    /// Per-part estimates, e.g. one energy per reference state.
    pub components: Vec<Estimate>,
}

impl Evaluation {
    pub fn scalar(cost: f64) -> Self {
        Evaluation {
            cost,
            std_error: 0.0,
            components: Vec::new(),
        }
    }
}

/// Something to minimize. Implementations must give identical results for
/// identical `(params, eval_seed)` and be safe to call from several threads.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, params: &[f64], eval_seed: u64) -> Result<Evaluation>;

    /// True when `evaluate` ignores its seed.
    fn is_deterministic(&self) -> bool;

    /// Typical magnitude of the cost; costs are divided by it internally.
    fn scale(&self) -> f64 {
        1.0
    }

    /// Analytic gradient of the cost, when available.
    fn gradient(&self, _params: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

/// Wraps a closure as a deterministic or noisy objective.
pub struct FnObjective<F> {
    pub dimension: usize,
    pub deterministic: bool,
    pub f: F,
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64], u64) -> f64 + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, params: &[f64], eval_seed: u64) -> Result<Evaluation> {
        Ok(Evaluation::scalar((self.f)(params, eval_seed)))
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Spsa,
    Simplex,
    Grad,
}

/// SPSA gain schedule `a_k = a / (k + 1 + A)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaConfig {
    /// Step gain; calibrated from sampled gradients when absent.
    pub a: Option<f64>,
    pub c: f64,
    /// Stability constant; `0.1 * max_iterations` when absent.
    #[serde(rename = "A")]
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    /// Target size of the first update per parameter, in radians.
    pub first_step: f64,
    pub calibration_samples: usize,
    /// Record the cost at each new iterate (one extra evaluation) rather
    /// than the mean of the two perturbed evaluations.
    pub measure_iterate: bool,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            a: None,
            c: 0.1,
            big_a: None,
            alpha: 0.602,
            gamma: 0.101,
            first_step: 0.1,
            calibration_samples: 25,
            measure_iterate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    /// SIMPLEX: cost spread; GRAD: gradient infinity norm. Both on the
    /// rescaled cost. Unused by SPSA.
    pub tolerance: f64,
    pub restarts: usize,
    pub init_range: [f64; 2],
    pub spsa: SpsaConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Grad,
            max_iterations: 500,
            tolerance: 1e-10,
            restarts: 5,
            init_range: [-PI, PI],
            spsa: SpsaConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, max_iterations: usize) -> Self {
        OptimizerConfig {
            kind,
            max_iterations,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be non-negative");
        }
        if self.init_range.iter().any(|r| r.is_nan()) || self.init_range[0] >= self.init_range[1] {
            return bad("init_range must be increasing");
        }
        let s = &self.spsa;
        if !(s.c > 0.0 && s.alpha > 0.0 && s.gamma > 0.0 && s.first_step > 0.0) {
            return bad("SPSA gains must be positive");
        }
        if s.a.is_some_and(|a| a.is_nan() || a <= 0.0)
            || s.big_a.is_some_and(|a| a.is_nan() || a < 0.0)
        {
            return bad("SPSA a must be positive and A non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub params_hash: u64,
    pub cost: f64,
    pub std_error: f64,
    pub components: Vec<Estimate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Converged,
    LineSearchFailed,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    pub records: Vec<IterationRecord>,
    pub final_params: Vec<f64>,
    pub final_cost: f64,
    pub final_std_error: f64,
    pub termination: Termination,
    /// Which restart produced this trace.
    pub restart: usize,
}

impl OptTrace {
    /// `iteration,cost,std_error` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cost,std_error\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.iteration, r.cost, r.std_error);
        }
        out
    }
}

/// Hash of the exact parameter bits, for spotting identical iterates.
pub fn params_hash(params: &[f64]) -> u64 {
    let bits: Vec<u64> = params.iter().map(|p| p.to_bits()).collect();
    derive_seed(params.len() as u64, &bits)
}

/// Bookkeeping shared by the optimizers: rescaling, seeding, recording.
pub(crate) struct Run<'a> {
    obj: &'a dyn Objective,
    scale: f64,
    seed: u64,
    restart: usize,
    evals: u64,
    records: Vec<IterationRecord>,
}

impl<'a> Run<'a> {
    fn new(obj: &'a dyn Objective, seed: u64, restart: usize) -> Self {
        let s = obj.scale();
        Run {
            obj,
            scale: if s > 0.0 && s.is_finite() { s } else { 1.0 },
            seed,
            restart,
            evals: 0,
            records: Vec::new(),
        }
    }

    fn rng(&self, path: &[u64]) -> rand_chacha::ChaCha8Rng {
        let mut p = vec![self.restart as u64];
        p.extend_from_slice(path);
        rng_for(self.seed, &p)
    }

    /// Evaluates with a fresh seed and returns (rescaled cost, evaluation).
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Evaluation)> {
        let s = derive_seed(self.seed, &[self.restart as u64, 0xe7a1, self.evals]);
        self.evals += 1;
        let e = self.obj.evaluate(x, s)?;
        Ok((e.cost / self.scale, e))
    }

    fn record(&mut self, x: &[f64], e: &Evaluation) {
        self.records.push(IterationRecord {
            iteration: self.records.len(),
            params_hash: params_hash(x),
            cost: e.cost,
            std_error: e.std_error,
            components: e.components.clone(),
        });
    }

    fn finish(self, x: Vec<f64>, last: &Evaluation, termination: Termination) -> OptTrace {
        OptTrace {
            records: self.records,
            final_params: x,
            final_cost: last.cost,
            final_std_error: last.std_error,
            termination,
            restart: self.restart,
        }
    }

    fn non_finite(self, x: Vec<f64>) -> OptTrace {
        OptTrace {
            records: self.records,
            final_params: x,
            final_cost: f64::NAN,
            final_std_error: f64::NAN,
            termination: Termination::NonFinite,
            restart: self.restart,
        }
    }
}

/// Runs `cfg.restarts` seeded starts (in parallel) and keeps the lowest
/// final cost.
pub fn minimize(obj: &dyn Objective, cfg: &OptimizerConfig, seed: u64) -> Result<OptTrace> {
    cfg.validate()?;
    let dim = obj.dimension();
    if dim == 0 {
        return Err(Error::InvalidArgument("objective has no parameters".into()));
    }
    let traces: Vec<Result<OptTrace>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, &[r as u64, 0x1417]);
            let x0: Vec<f64> = (0..dim)
                .map(|_| rng.random_range(cfg.init_range[0]..cfg.init_range[1]))
                .collect();
            run_single(obj, cfg, seed, r, x0)
        })
        .collect();
    let mut best: Option<OptTrace> = None;
    let mut first_err = None;
    for t in traces {
        match t {
            Ok(t) if t.final_cost.is_finite() => {
                if best.as_ref().is_none_or(|b| t.final_cost < b.final_cost) {
                    best = Some(t);
                }
            }
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::Optimizer(
            "every restart hit a non-finite cost".into(),
        )),
    }
}

/// A single start from `x0`.
pub fn minimize_from(
    obj: &dyn Objective,
    cfg: &OptimizerConfig,
    seed: u64,
    x0: Vec<f64>,
) -> Result<OptTrace> {
    cfg.validate()?;
    if x0.len() != obj.dimension() {
        return Err(Error::Dimension(format!(
            "start has {} parameters, objective takes {}",
            x0.len(),
            obj.dimension()
        )));
    }
    run_single(obj, cfg, seed, 0, x0)
}

fn run_single(
    obj: &dyn Objective,
    cfg: &OptimizerConfig,
    seed: u64,
    restart: usize,
    x0: Vec<f64>,
) -> Result<OptTrace> {
    let run = Run::new(obj, seed, restart);
    match cfg.kind {
        OptimizerKind::Spsa => spsa::run(run, cfg, x0),
        OptimizerKind::Simplex => simplex::run(run, cfg, x0),
        OptimizerKind::Grad => grad::run(run, cfg, x0),
    }
}

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::{OptTrace, OptimizerConfig, Run, Termination};
use crate::sim::{Angle, Circuit};
use crate::{Error, Result};

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const FD_STEP: f64 = 1e-6;

/// Shift-rule gradient: for every rotation gate bound to parameter `k`
/// with factor `s`, adds `s (E(angle + pi/2) - E(angle - pi/2)) / 2`.
pub fn parameter_shift_gradient<F>(circuit: &Circuit, params: &[f64], energy: F) -> Result<Vec<f64>>
where
    F: Fn(&Circuit, &[f64]) -> Result<f64> + Sync,
{
    if params.len() != circuit.n_parameters() {
        return Err(Error::Dimension(format!(
            "circuit takes {} parameters, got {}",
            circuit.n_parameters(),
            params.len()
        )));
    }
    let slots: Vec<(usize, usize, f64)> = circuit
        .gates()
        .iter()
        .enumerate()
        .filter_map(|(i, g)| match g.angle {
            Some(Angle::Param { index, scale, .. }) => Some((i, index, scale)),
            _ => None,
        })
        .collect();
    let parts: Vec<(usize, f64)> = slots
        .par_iter()
        .map(|&(gate, index, scale)| {
            let plus = energy(&circuit.shifted(gate, FRAC_PI_2), params)?;
            let minus = energy(&circuit.shifted(gate, -FRAC_PI_2), params)?;
            Ok((index, scale * (plus - minus) / 2.0))
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.len()];
    for (k, g) in parts {
        grad[k] += g;
    }
    Ok(grad)
}

fn gradient(run: &mut Run<'_>, x: &[f64]) -> Result<Vec<f64>> {
    if let Some(g) = run.obj.gradient(x) {
        return Ok(g?.into_iter().map(|v| v / run.scale).collect());
    }
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += FD_STEP;
        xm[i] -= FD_STEP;
        g[i] = (run.eval(&xp)?.0 - run.eval(&xm)?.0) / (2.0 * FD_STEP);
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS two-loop direction `-H g`.
fn direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push((a, rho));
    }
    if let Some((s, y)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y), (a, rho)) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Quasi-Newton descent with backtracking (Armijo) line search.
pub(super) fn run(mut run: Run<'_>, cfg: &OptimizerConfig, x0: Vec<f64>) -> Result<OptTrace> {
    let mut x = x0;
    let (mut f, mut e) = run.eval(&x)?;
    if !f.is_finite() {
        return Ok(run.non_finite(x));
    }
    let mut g = gradient(&mut run, &x)?;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut termination = Termination::MaxIterations;
    for _ in 0..cfg.max_iterations {
        if g.iter().any(|v| !v.is_finite()) {
            return Ok(run.non_finite(x));
        }
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= cfg.tolerance {
            termination = Termination::Converged;
            break;
        }
        let mut d = direction(&g, &memory);
        if dot(&d, &g) >= 0.0 {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&d, &g);
        let mut t = if memory.is_empty() {
            (1.0 / gmax).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (fn_, en) = run.eval(&xn)?;
            if fn_.is_finite() && fn_ <= f + ARMIJO * t * slope {
                accepted = Some((xn, fn_, en));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_, en)) = accepted else {
            if memory.is_empty() {
                termination = Termination::LineSearchFailed;
                break;
            }
            memory.clear();
            continue;
        };
        let gn = gradient(&mut run, &xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            memory.push_back((s, y));
            if memory.len() > MEMORY {
                memory.pop_front();
            }
        }
        x = xn;
        f = fn_;
        e = en;
        g = gn;
        run.record(&x, &e);
    }
    Ok(run.finish(x, &e, termination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_hea;
    use crate::pauli::PauliOperator;
    use crate::sim::{apply_circuit, expectation_exact};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_after_ry(theta: f64) -> Vec<f64> {
        let mut c = Circuit::new(1, 1);
        c.ry(0, Angle::param(0)).unwrap();
        let z = PauliOperator::from_real_terms(&[("Z", 1.0)]).unwrap();
        parameter_shift_gradient(&c, &[theta], |c, p| {
            expectation_exact(&apply_circuit(c, p, 0)?, &z)
        })
        .unwrap()
    }

    #[test]
    fn shift_rule_on_single_rotation() {
        assert!(z_after_ry(0.0)[0].abs() < 1e-15);
        assert!((z_after_ry(FRAC_PI_2)[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_objective_has_zero_gradient() {
        let c = build_hea(2, 1).unwrap();
        let g = parameter_shift_gradient(&c, &[0.3; 8], |_, _| Ok(4.2)).unwrap();
        assert_eq!(g, vec![0.0; 8]);
    }

    #[test]
    fn shift_rule_matches_finite_differences_on_hea() {
        let c = build_hea(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let terms: Vec<(&str, f64)> = ["IZ", "XI", "ZZ", "YX", "XY"]
                .iter()
                .map(|s| (*s, rng.random_range(-1.0..1.0)))
                .collect();
            let op = PauliOperator::from_real_terms(&terms).unwrap();
            let p: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
            let energy = |c: &Circuit, p: &[f64]| expectation_exact(&apply_circuit(c, p, 0)?, &op);
            let g = parameter_shift_gradient(&c, &p, energy).unwrap();
            for k in 0..8 {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[k] += 1e-6;
                pm[k] -= 1e-6;
                let fd = (energy(&c, &pp).unwrap() - energy(&c, &pm).unwrap()) / 2e-6;
                assert!((fd - g[k]).abs() < 1e-5, "k={k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn shared_parameters_accumulate() {
        // RZ(-t) RZ(+t) cancels, so the gradient must vanish.
        let mut c = Circuit::new(1, 1);
        c.h(0).unwrap();
        c.rz(0, Angle::scaled(0, -1.0)).unwrap();
        c.rz(0, Angle::param(0)).unwrap();
        let x = PauliOperator::from_real_terms(&[("X", 1.0)]).unwrap();
        let g = parameter_shift_gradient(&c, &[0.4], |c, p| {
            expectation_exact(&apply_circuit(c, p, 0)?, &x)
        })
        .unwrap();
        assert!(g[0].abs() < 1e-12);
    }
}

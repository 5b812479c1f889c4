use rand::Rng;

use super::{OptTrace, OptimizerConfig, Run, Termination};
use crate::Result;

fn perturbation(run: &Run<'_>, path: &[u64], dim: usize) -> Vec<f64> {
    let mut rng = run.rng(path);
    (0..dim)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

fn shifted(x: &[f64], delta: &[f64], c: f64) -> Vec<f64> {
    x.iter().zip(delta).map(|(v, d)| v + c * d).collect()
}

pub(super) fn run(mut run: Run<'_>, cfg: &OptimizerConfig, x0: Vec<f64>) -> Result<OptTrace> {
    let s = &cfg.spsa;
    let dim = x0.len();
    let big_a = s.big_a.unwrap_or(0.1 * cfg.max_iterations as f64);
    let mut x = x0;

    let a = match s.a {
        Some(a) => a,
        None => {
            // Mean per-component gradient magnitude at the start point.
            let mut total = 0.0;
            let samples = s.calibration_samples.max(1);
            for k in 0..samples {
                let d = perturbation(&run, &[0xca1b, k as u64], dim);
                let (yp, _) = run.eval(&shifted(&x, &d, s.c))?;
                let (ym, _) = run.eval(&shifted(&x, &d, -s.c))?;
                if !(yp.is_finite() && ym.is_finite()) {
                    return Ok(run.non_finite(x));
                }
                total += (yp - ym).abs() / (2.0 * s.c);
            }
            let g = total / samples as f64;
            let stab = (big_a + 1.0).powf(s.alpha);
            if g > 1e-12 {
                s.first_step * stab / g
            } else {
                s.first_step * stab
            }
        }
    };

    let mut last = None;
    for k in 0..cfg.max_iterations {
        let kf = k as f64;
        let ak = a / (kf + 1.0 + big_a).powf(s.alpha);
        let ck = s.c / (kf + 1.0).powf(s.gamma);
        let d = perturbation(&run, &[k as u64, 1], dim);
        let (yp, ep) = run.eval(&shifted(&x, &d, ck))?;
        let (ym, em) = run.eval(&shifted(&x, &d, -ck))?;
        if !(yp.is_finite() && ym.is_finite()) {
            return Ok(run.non_finite(x));
        }
        let g = (yp - ym) / (2.0 * ck);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi -= ak * g * di;
        }
        let rec = if s.measure_iterate {
            let (y, e) = run.eval(&x)?;
            if !y.is_finite() {
                return Ok(run.non_finite(x));
            }
            e
        } else {
            average(&ep, &em)
        };
        run.record(&x, &rec);
        last = Some(rec);
    }
    let last = last.expect("at least one iteration");
    Ok(run.finish(x, &last, Termination::MaxIterations))
}

fn average(a: &super::Evaluation, b: &super::Evaluation) -> super::Evaluation {
    use crate::sim::Estimate;
    super::Evaluation {
        cost: 0.5 * (a.cost + b.cost),
        std_error: 0.5 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt(),
        components: a
            .components
            .iter()
            .zip(&b.components)
            .map(|(p, q)| Estimate {
                mean: 0.5 * (p.mean + q.mean),
                std_error: 0.5 * (p.std_error.powi(2) + q.std_error.powi(2)).sqrt(),
            })
            .collect(),
    }
}

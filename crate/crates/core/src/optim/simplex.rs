use super::{Evaluation, OptTrace, OptimizerConfig, Run, Termination};
use crate::Result;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.5;

struct Vertex {
    x: Vec<f64>,
    f: f64,
    e: Evaluation,
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Nelder-Mead; one reflect/expand/contract/shrink step per iteration.
pub(super) fn run(mut run: Run<'_>, cfg: &OptimizerConfig, x0: Vec<f64>) -> Result<OptTrace> {
    let n = x0.len();
    let mut simplex = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut x = x0.clone();
        if i > 0 {
            x[i - 1] += INITIAL_STEP;
        }
        let (f, e) = run.eval(&x)?;
        if !f.is_finite() {
            return Ok(run.non_finite(x));
        }
        simplex.push(Vertex { x, f, e });
    }

    let mut termination = Termination::MaxIterations;
    for _ in 0..cfg.max_iterations {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        if simplex[n].f - simplex[0].f < cfg.tolerance {
            termination = Termination::Converged;
            break;
        }
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c += x / n as f64;
            }
        }
        let worst = &simplex[n];
        let xr = combine(&centroid, &worst.x, -REFLECT);
        let (fr, er) = run.eval(&xr)?;
        if !fr.is_finite() {
            return Ok(run.non_finite(xr));
        }
        if fr < simplex[0].f {
            let xe = combine(&centroid, &worst.x, -EXPAND);
            let (fe, ee) = run.eval(&xe)?;
            if !fe.is_finite() {
                return Ok(run.non_finite(xe));
            }
            simplex[n] = if fe < fr {
                Vertex {
                    x: xe,
                    f: fe,
                    e: ee,
                }
            } else {
                Vertex {
                    x: xr,
                    f: fr,
                    e: er,
                }
            };
        } else if fr < simplex[n - 1].f {
            simplex[n] = Vertex {
                x: xr,
                f: fr,
                e: er,
            };
        } else {
            // Outside contraction if the reflection beat the worst point, inside otherwise.
            let (xc, beat) = if fr < worst.f {
                (combine(&centroid, &xr, CONTRACT), fr)
            } else {
                (combine(&centroid, &worst.x, CONTRACT), worst.f)
            };
            let (fc, ec) = run.eval(&xc)?;
            if !fc.is_finite() {
                return Ok(run.non_finite(xc));
            }
            if fc < beat {
                simplex[n] = Vertex {
                    x: xc,
                    f: fc,
                    e: ec,
                };
            } else {
                let best = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &v.x, SHRINK);
                    let (f, e) = run.eval(&x)?;
                    if !f.is_finite() {
                        return Ok(run.non_finite(x));
                    }
                    *v = Vertex { x, f, e };
                }
            }
        }
        let best = simplex
            .iter()
            .min_by(|a, b| a.f.total_cmp(&b.f))
            .expect("non-empty simplex");
        let (x, e) = (best.x.clone(), best.e.clone());
        run.record(&x, &e);
    }
    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
    let best = simplex.swap_remove(0);
    Ok(run.finish(best.x, &best.e, termination))
}

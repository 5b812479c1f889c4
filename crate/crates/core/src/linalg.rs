//! Dense eigensolver and non-negative least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Largest dimension handled by the Jacobi sweep; larger matrices go
/// through nalgebra's Hermitian decomposition.
pub const JACOBI_MAX_DIM: usize = 64;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k).into_owned()
    }
}

/// Hermitian eigendecomposition; picks the Jacobi route for small inputs.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<Eigen> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.nrows() <= JACOBI_MAX_DIM {
        Ok(jacobi_eigen(h))
    } else {
        Ok(library_eigen(h))
    }
}

/// Cyclic complex Jacobi rotations until the off-diagonal Frobenius norm
/// drops below `1e-12 * ||H||`.
pub fn jacobi_eigen(h: &DMatrix<Complex64>) -> Eigen {
    let n = h.nrows();
    let mut a = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // D = diag(1, conj(e)) makes the pair real, then a real rotation.
                let e = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -e.conj() * s;
                let u_qq = e.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    sorted(values, v)
}

fn off_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn library_eigen(h: &DMatrix<Complex64>) -> Eigen {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let e = nalgebra::SymmetricEigen::new(sym);
    sorted(e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn sorted(values: Vec<f64>, vectors: DMatrix<Complex64>) -> Eigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vals = order.iter().map(|&i| values[i]).collect();
    let mut vecs = DMatrix::zeros(vectors.nrows(), vectors.ncols());
    for (k, &i) in order.iter().enumerate() {
        let mut col = vectors.column(i).into_owned();
        fix_phase(&mut col);
        vecs.set_column(k, &col);
    }
    Eigen {
        values: vals,
        vectors: vecs,
    }
}

/// Rotates a vector so its largest component is real and positive.
pub fn fix_phase(v: &mut DVector<Complex64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let r = v[best].norm();
    if r > 0.0 {
        let ph = v[best].conj() / r;
        *v *= ph;
    }
}

/// Lawson-Hanson non-negative least squares: `min ||A x - b||` with `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "nnls: dimension mismatch");
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            let z = solve_passive(a, b, &passive);
            if (0..n).all(|k| !passive[k] || z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in 0..n {
                if passive[k] && z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = a.select_columns(&idx);
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(idx.len()));
    let mut z = DVector::zeros(passive.len());
    for (k, &i) in idx.iter().enumerate() {
        z[i] = sol[k];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_hermitian(dim: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[(i * dim + j) % entries.len()];
            Complex64::new(re, im)
        });
        &a + a.adjoint()
    }

    fn check_decomposition(h: &DMatrix<Complex64>, e: &Eigen) {
        let n = h.nrows();
        let scale = h.norm().max(1.0);
        for k in 0..n {
            let v = e.vector(k);
            let r = h * &v - &v * c(e.values[k]);
            assert!(r.norm() <= 1e-8 * scale, "residual {}", r.norm());
        }
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!((gram - DMatrix::identity(n, n)).norm() <= 1e-10 * n as f64);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal_matrix() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0), c(4.0), c(2.0)]));
        let e = hermitian_eigen(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0, 4.0]);
        for k in 0..4 {
            let v = e.vector(k);
            assert!((v.norm() - 1.0).abs() < 1e-15);
            assert_eq!(v.iter().filter(|z| z.norm() > 0.5).count(), 1);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                c(1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, -2.0),
                c(1.0),
            ],
        );
        let e = hermitian_eigen(&h).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_agrees_with_library_route() {
        let entries: Vec<(f64, f64)> = (0..97)
            .map(|k| (((k * 37) % 23) as f64 - 11.0, ((k * 17) % 13) as f64 - 6.0))
            .collect();
        let h = random_hermitian(20, &entries);
        let a = jacobi_eigen(&h);
        let b = library_eigen(&h);
        check_decomposition(&h, &a);
        check_decomposition(&h, &b);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9 * h.norm());
        }
    }

    #[test]
    fn large_matrices_use_library_route() {
        let entries: Vec<(f64, f64)> = (0..31).map(|k| (k as f64 * 0.1 - 1.5, 0.0)).collect();
        let h = random_hermitian(70, &entries);
        check_decomposition(&h, &hermitian_eigen(&h).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn jacobi_residuals_and_orthonormality(
            dim in 1usize..=32,
            entries in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64),
        ) {
            let h = random_hermitian(dim, &entries);
            check_decomposition(&h, &jacobi_eigen(&h));
        }
    }

    #[test]
    fn nnls_matches_unconstrained_when_feasible() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x_true = DVector::from_vec(vec![0.3, 0.7]);
        let b = &a * &x_true;
        let x = nnls(&a, &b);
        assert!((x - x_true).norm() < 1e-10);
    }

    #[test]
    fn nnls_clips_negative_directions() {
        // Unconstrained optimum is (-1, 2); constrained optimum has x0 = 0.
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let x = nnls(&a, &b);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }
}

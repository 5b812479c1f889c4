use std::f64::consts::PI;

use num_complex::Complex64;

use super::params::ModelParams;
use crate::special::{jacobi_p, laguerre, ln_gamma_fn};
use crate::{Error, Result};

/// Longitudinal basis function `chi_l(x)`, normalized so that
/// `int_0^1 chi_l chi_l' dx = 4 pi delta_ll'`.
pub fn chi_l(x: f64, l: usize, params: &ModelParams) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x = {x} outside (0, 1)")));
    }
    let a = params.alpha();
    let b = params.beta();
    let lf = l as f64;
    let ln_ratio = ln_gamma_fn(lf + 1.0) + ln_gamma_fn(lf + a + b + 1.0)
        - ln_gamma_fn(lf + a + 1.0)
        - ln_gamma_fn(lf + b + 1.0);
    let norm = (4.0 * PI * (2.0 * lf + a + b + 1.0)).sqrt() * (0.5 * ln_ratio).exp();
    Ok(x.powf(b / 2.0) * (1.0 - x).powf(a / 2.0) * jacobi_p(l, a, b, 2.0 * x - 1.0) * norm)
}

/// Transverse basis function `phi_nm(q)` (2D harmonic oscillator in
/// momentum space), normalized to `int |phi|^2 d^2q / (2 pi)^2 = 1`.
pub fn phi_nm(q_perp: [f64; 2], n: usize, m: i32, kappa: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let q2 = q_perp[0] * q_perp[0] + q_perp[1] * q_perp[1];
    let rho = q2.sqrt() / kappa;
    let ln_fact = ln_gamma_fn(n as f64 + 1.0) - ln_gamma_fn((n + am) as f64 + 1.0);
    let radial = (4.0 * PI).sqrt() / kappa
        * (0.5 * ln_fact).exp()
        * rho.powi(am as i32)
        * (-rho * rho / 2.0).exp()
        * laguerre(n, am as f64, rho * rho);
    let theta = q_perp[1].atan2(q_perp[0]);
    Complex64::from_polar(radial, m as f64 * theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn longitudinal_orthonormality() {
        // Midpoint rule in u with x = (1 - cos u)/2, independent of the
        // library's Gauss-Legendre path.
        let p = ModelParams::light_1_1();
        let n = 20000;
        for l in 0..=3 {
            for lp in 0..=3 {
                let mut s = 0.0;
                for k in 0..n {
                    let u = (k as f64 + 0.5) * PI / n as f64;
                    let x = (1.0 - u.cos()) / 2.0;
                    let dx = u.sin() / 2.0 * PI / n as f64;
                    s += chi_l(x, l, &p).unwrap() * chi_l(x, lp, &p).unwrap() * dx;
                }
                let want = if l == lp { 4.0 * PI } else { 0.0 };
                assert!((s - want).abs() < 1e-6, "l={l} l'={lp}: {s}");
            }
        }
    }

    #[test]
    fn parity_under_x_reflection() {
        let p = ModelParams::light_1_1();
        for l in 0..4 {
            let a = chi_l(0.3, l, &p).unwrap();
            let b = chi_l(0.7, l, &p).unwrap();
            assert!((a - (-1f64).powi(l as i32) * b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_longitudinal_function_is_positive() {
        let p = ModelParams::light_4_1();
        for k in 1..100 {
            assert!(chi_l(k as f64 / 100.0, 0, &p).unwrap() > 0.0);
        }
    }

    #[test]
    fn endpoints_are_rejected() {
        let p = ModelParams::light_1_1();
        assert!(chi_l(0.0, 0, &p).is_err());
        assert!(chi_l(1.0, 1, &p).is_err());
    }

    #[test]
    fn transverse_normalization_and_orthogonality() {
        // d^2q/(2pi)^2 = q dq dtheta / (2pi)^2; the angular integral is 2pi for m = 0.
        let kappa = 560.0;
        let radial = |n1: usize, n2: usize| {
            simpson(
                |q| (phi_nm([q, 0.0], n1, 0, kappa).conj() * phi_nm([q, 0.0], n2, 0, kappa)).re * q,
                0.0,
                12.0 * kappa,
                4000,
            ) / (2.0 * PI)
        };
        assert!((radial(0, 0) - 1.0).abs() < 1e-6);
        assert!((radial(1, 1) - 1.0).abs() < 1e-6);
        assert!(radial(0, 1).abs() < 1e-6);
    }

    #[test]
    fn angular_modes_vanish_at_origin() {
        assert_eq!(phi_nm([0.0, 0.0], 0, 1, 560.0).norm(), 0.0);
        assert_eq!(phi_nm([0.0, 0.0], 1, -1, 560.0).norm(), 0.0);
    }

    #[test]
    fn angular_phase() {
        let v = phi_nm([0.0, 300.0], 0, 1, 560.0);
        assert!(v.re.abs() < 1e-15 && v.im > 0.0);
    }
}

//! Orthogonal polynomials and adaptive quadrature.

use statrs::function::gamma::ln_gamma;

/// Jacobi polynomial `P_n^{(a,b)}(z)` by upward recurrence.
pub fn jacobi_p(n: usize, a: f64, b: f64, z: f64) -> f64 {
    let p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let p1 = (a + 1.0) + (a + b + 2.0) * (z - 1.0) / 2.0;
    let (mut prev, mut cur) = (p0, p1);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * z + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_n^{(a)}(z)` by upward recurrence.
pub fn laguerre(n: usize, a: f64, z: f64) -> f64 {
    let l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let (mut prev, mut cur) = (l0, 1.0 + a - z);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - z) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 20;

fn gl_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive Gauss-Legendre integration of `f` over `[a, b]`.
///
/// A panel is accepted when splitting it changes the estimate by less
/// than `tol` (scaled by the panel's share of the interval).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(GL_ORDER);
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        rule: &(Vec<f64>, Vec<f64>),
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl_segment(f, a, m, rule);
        let right = gl_segment(f, m, b, rule);
        if depth == 0 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            rec(f, a, m, left, 0.5 * tol, depth - 1, rule)
                + rec(f, m, b, right, 0.5 * tol, depth - 1, rule)
        }
    }
    let whole = gl_segment(&f, a, b, &rule);
    rec(&f, a, b, whole, tol, 30, &rule)
}

/// Integral over `(0, 1)` through `x = sin^2 u`, which smooths the
/// algebraic endpoint behaviour of the longitudinal basis functions.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    integrate(
        |u: f64| {
            let (s, c) = u.sin_cos();
            f(s * s) * 2.0 * s * c
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        tol,
    )
}

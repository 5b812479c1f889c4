//! Decay constants and parton distribution functions measured on states.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blfq::{chi_l, exact_eigensolve, BasisCatalog, HamiltonianSource, ModelParams};
use crate::engine::SimulationSettings;
use crate::pauli::{compact_encode_real, PauliOperator};
use crate::rng::derive_seed;
use crate::sim::{
    expectation_exact, Estimate, MeasurementPlan, MitigationFilter, Preparation, Tier,
};
use crate::special::integrate_unit;
use crate::{Error, Result};

const QUAD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Pseudoscalar,
    Vector,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Pseudoscalar => "pseudoscalar",
            Channel::Vector => "vector",
        })
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudoscalar" => Ok(Channel::Pseudoscalar),
            "vector" => Ok(Channel::Vector),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

impl Channel {
    /// Weight of the `(s, sbar)` spin component in the current.
    fn spin_factor(self, two_s: i32, two_sbar: i32) -> f64 {
        match (two_s, two_sbar, self) {
            (1, -1, _) => 1.0,
            (-1, 1, Channel::Pseudoscalar) => -1.0,
            (-1, 1, Channel::Vector) => 1.0,
            _ => 0.0,
        }
    }
}

// Components in catalog (table) order.
const NU_P_1_1: [f64; 4] = [1.0, -1.0, 0.0, 0.0];
const NU_V_1_1: [f64; 4] = [1.0, 1.0, 0.0, 0.0];
const NU_P_4_1: [f64; 16] = [
    1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
];
const NU_V_4_1: [f64; 16] = [
    -1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
];

/// Unnormalized overlap vector `nu` of a decay channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayVector {
    pub channel: Channel,
    /// One entry per catalog state, in catalog order.
    pub components: Vec<f64>,
}

impl DecayVector {
    /// The tabulated vector for one of the bundled catalogs.
    pub fn bundled(channel: Channel, catalog: &BasisCatalog) -> Result<Self> {
        let comps: &[f64] = if *catalog == BasisCatalog::builtin_1_1() {
            match channel {
                Channel::Pseudoscalar => &NU_P_1_1,
                Channel::Vector => &NU_V_1_1,
            }
        } else if *catalog == BasisCatalog::builtin_4_1() {
            match channel {
                Channel::Pseudoscalar => &NU_P_4_1,
                Channel::Vector => &NU_V_4_1,
            }
        } else {
            return Err(Error::UnsupportedCatalog);
        };
        Ok(DecayVector {
            channel,
            components: comps.to_vec(),
        })
    }

    pub fn explicit(
        channel: Channel,
        components: Vec<f64>,
        catalog: &BasisCatalog,
    ) -> Result<Self> {
        if components.len() != catalog.len() {
            return Err(Error::Dimension(format!(
                "decay vector has {} components, catalog has {} states",
                components.len(),
                catalog.len()
            )));
        }
        if components.iter().all(|c| *c == 0.0) || components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "decay vector must be finite and nonzero".into(),
            ));
        }
        Ok(DecayVector {
            channel,
            components,
        })
    }

    /// Vector in matrix-row order, zero-padded to `len`.
    pub fn index_space(&self, catalog: &BasisCatalog, len: usize) -> Result<Vec<f64>> {
        if self.components.len() != catalog.len() {
            return Err(Error::Dimension(
                "decay vector does not match catalog".into(),
            ));
        }
        let mut v = vec![0.0; len];
        for (e, c) in catalog.entries().iter().zip(&self.components) {
            *v.get_mut(e.index).ok_or(Error::IndexOutOfRange {
                index: e.index,
                len,
            })? = *c;
        }
        Ok(v)
    }
}

/// Compact encoding of `|nu><nu|` on the catalog's register.
pub fn decay_projector(vector: &DecayVector, catalog: &BasisCatalog) -> Result<PauliOperator> {
    let nu = vector.index_space(catalog, catalog.padded_dim())?;
    let n = nu.len();
    compact_encode_real(&DMatrix::from_fn(n, n, |i, j| nu[i] * nu[j]))
}

/// `int_0^1 sqrt(x(1-x)) chi_l(x) dx`.
fn longitudinal_moment(l: u32, params: &ModelParams) -> Result<f64> {
    chi_l(0.5, l as usize, params)?;
    Ok(integrate_unit(
        |x| (x * (1.0 - x)).sqrt() * chi_l(x, l as usize, params).unwrap_or(0.0),
        QUAD_TOL,
    ))
}

/// Decay constant of a matrix-space coefficient vector from the
/// light-front wave function integral, in MeV.
pub fn decay_constant_integral(
    coeffs: &[f64],
    channel: Channel,
    catalog: &BasisCatalog,
    params: &ModelParams,
) -> Result<f64> {
    // The transverse integral of phi_n0 over d^2k/(2pi)^3 at fixed x is
    // x(1-x) (-1)^n kappa / (2 pi^(3/2)).
    let pre = params.kappa * (params.n_c as f64).sqrt() / (2.0 * PI.powf(1.5));
    let mut moments = std::collections::BTreeMap::new();
    let mut f = 0.0;
    for e in catalog.entries() {
        let q = e.qn;
        let w = channel.spin_factor(q.two_s, q.two_sbar);
        if q.m != 0 || w == 0.0 {
            continue;
        }
        let c = *coeffs.get(e.index).ok_or(Error::IndexOutOfRange {
            index: e.index,
            len: coeffs.len(),
        })?;
        let moment = match moments.get(&q.l) {
            Some(v) => *v,
            None => {
                let v = longitudinal_moment(q.l, params)?;
                moments.insert(q.l, v);
                v
            }
        };
        let sign = if q.n % 2 == 0 { 1.0 } else { -1.0 };
        f += sign * w * c * moment;
    }
    Ok(pre * f)
}

/// Prefactor `K` with `f = K |<nu|psi>|`, calibrated on the exact
/// eigenvectors: the lowest state with a nonvanishing overlap is used.
pub fn calibrate_decay_prefactor(h: &HamiltonianSource, vector: &DecayVector) -> Result<f64> {
    let spec = exact_eigensolve(h)?;
    let nu = vector.index_space(&h.catalog, h.dim())?;
    let nu_norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    for k in 0..spec.values.len() {
        let v = spec.vector(k);
        let overlap: f64 = nu.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        if overlap.abs() > 1e-8 * nu_norm {
            let f = decay_constant_integral(v.as_slice(), vector.channel, &h.catalog, &h.params)?;
            return Ok(f.abs() / overlap.abs());
        }
    }
    Err(Error::VanishingOverlap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayResult {
    pub channel: Channel,
    #[serde(rename = "f_MeV")]
    pub f_mev: f64,
    pub std_error: f64,
    #[serde(rename = "K_MeV")]
    pub k_mev: f64,
    pub tier: Tier,
    /// The sampled projector expectation was negative and clamped to 0.
    #[serde(default)]
    pub clamped: bool,
}

/// `f = K sqrt(<psi|nu><nu|psi>)` with the projector measured at the
/// requested tier. A sampled expectation below `-4 sigma` is flagged.
pub fn measure_decay_constant(
    prep: Preparation<'_>,
    vector: &DecayVector,
    catalog: &BasisCatalog,
    k_mev: f64,
    settings: &SimulationSettings,
    filter: Option<&MitigationFilter>,
    seed: u64,
) -> Result<DecayResult> {
    let op = decay_projector(vector, catalog)?;
    let est = estimate(&op, prep, settings, filter, seed)?;
    let clamped = est.mean < -4.0 * est.std_error;
    let p = est.mean.max(0.0);
    let f = k_mev * p.sqrt();
    let std_error = if p > 0.0 {
        k_mev * est.std_error / (2.0 * p.sqrt())
    } else {
        k_mev * est.std_error.sqrt()
    };
    Ok(DecayResult {
        channel: vector.channel,
        f_mev: f,
        std_error,
        k_mev,
        tier: settings.tier,
        clamped,
    })
}

fn estimate(
    op: &PauliOperator,
    prep: Preparation<'_>,
    settings: &SimulationSettings,
    filter: Option<&MitigationFilter>,
    seed: u64,
) -> Result<Estimate> {
    match settings.tier {
        Tier::Sv => Ok(Estimate {
            mean: expectation_exact(&prep.pure_state()?, op)?,
            std_error: 0.0,
        }),
        _ => MeasurementPlan::new(op)?.estimate(
            prep,
            settings.shots,
            seed,
            settings.active_noise(),
            filter,
        ),
    }
}

/// Pairs `(a, b, weight)` in matrix-row space contributing at `x`.
fn pdf_pairs(
    x: f64,
    catalog: &BasisCatalog,
    params: &ModelParams,
) -> Result<Vec<(usize, usize, f64)>> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x = {x} outside (0, 1)")));
    }
    let entries = catalog.entries();
    let chi: Vec<f64> = entries
        .iter()
        .map(|e| chi_l(x, e.qn.l as usize, params))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (a, ea) in entries.iter().enumerate() {
        for (b, eb) in entries.iter().enumerate() {
            if ea.qn.same_except_l(&eb.qn) {
                out.push((ea.index, eb.index, chi[a] * chi[b] / (4.0 * PI)));
            }
        }
    }
    Ok(out)
}

/// Compact encoding of the PDF operator at momentum fraction `x`.
pub fn pdf_operator(x: f64, catalog: &BasisCatalog, params: &ModelParams) -> Result<PauliOperator> {
    let n = catalog.padded_dim();
    let mut m = DMatrix::zeros(n, n);
    for (a, b, w) in pdf_pairs(x, catalog, params)? {
        m[(a, b)] += w;
    }
    compact_encode_real(&m)
}

/// Direct double sum over basis coefficients (matrix-row order).
pub fn classical_pdf(
    coeffs: &[f64],
    catalog: &BasisCatalog,
    params: &ModelParams,
    x: f64,
) -> Result<f64> {
    let mut q = 0.0;
    for (a, b, w) in pdf_pairs(x, catalog, params)? {
        let (ca, cb) = match (coeffs.get(a), coeffs.get(b)) {
            (Some(ca), Some(cb)) => (*ca, *cb),
            _ => {
                return Err(Error::Dimension(format!(
                    "coefficient vector of length {} is too short",
                    coeffs.len()
                )))
            }
        };
        q += ca * cb * w;
    }
    Ok(q)
}

/// `n` evenly spaced interior points `k / (n + 1)`.
pub fn default_pdf_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdfPoint {
    pub x: f64,
    pub q: f64,
    pub std_error: f64,
}

pub fn pdf_scan(
    prep: Preparation<'_>,
    catalog: &BasisCatalog,
    params: &ModelParams,
    grid: &[f64],
    settings: &SimulationSettings,
    filter: Option<&MitigationFilter>,
    seed: u64,
) -> Result<Vec<PdfPoint>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let op = pdf_operator(x, catalog, params)?;
            let e = estimate(&op, prep, settings, filter, derive_seed(seed, &[i as u64]))?;
            Ok(PdfPoint {
                x,
                q: e.mean,
                std_error: e.std_error,
            })
        })
        .collect()
}

/// Trapezoid integral of a scan, closing it with `q = 0` at both ends.
pub fn integrate_scan(points: &[PdfPoint]) -> f64 {
    let mut xs = vec![(0.0, 0.0)];
    xs.extend(points.iter().map(|p| (p.x, p.q)));
    xs.push((1.0, 0.0));
    xs.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

pub fn pdf_csv(points: &[PdfPoint]) -> String {
    let mut out = String::from("x,q,std_error\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.x, p.q, p.std_error);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blfq::{builtin_hamiltonian, phi_nm, SourceLabel};
    use crate::sim::QuantumState;

    fn light() -> HamiltonianSource {
        builtin_hamiltonian(SourceLabel::Builtin11).unwrap()
    }

    fn state_of(v: &[f64]) -> QuantumState {
        QuantumState::from_real(v).unwrap()
    }

    #[test]
    fn transverse_integral_matches_closed_form() {
        let kappa = 560.0;
        for n in 0..3 {
            let radial = |q: f64| 2.0 * PI * q * phi_nm([q, 0.0], n, 0, kappa).re;
            let num =
                crate::special::integrate(radial, 0.0, 20.0 * kappa, 1e-10) / (2.0 * PI).powi(3);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let closed = sign * kappa / (2.0 * PI.powf(1.5));
            assert!(
                (num - closed).abs() < 1e-9 * closed.abs(),
                "n={n}: {num} vs {closed}"
            );
        }
    }

    #[test]
    fn bundled_vectors_follow_selection_rule() {
        for cat in [BasisCatalog::builtin_1_1(), BasisCatalog::builtin_4_1()] {
            for ch in [Channel::Pseudoscalar, Channel::Vector] {
                let v = DecayVector::bundled(ch, &cat).unwrap();
                let derived: Vec<f64> = cat
                    .entries()
                    .iter()
                    .map(|e| {
                        let q = e.qn;
                        if q.m != 0 || q.l % 2 == 1 {
                            return 0.0;
                        }
                        let s = if q.n % 2 == 0 { 1.0 } else { -1.0 };
                        s * ch.spin_factor(q.two_s, q.two_sbar)
                    })
                    .collect();
                let dot: f64 = derived.iter().zip(&v.components).map(|(a, b)| a * b).sum();
                let nn: f64 = derived.iter().map(|a| a * a).sum();
                // Equal up to an overall sign.
                assert!(
                    (dot.abs() - nn).abs() < 1e-12
                        && v.components.iter().map(|a| a * a).sum::<f64>() == nn
                );
            }
        }
    }

    #[test]
    fn projector_is_rank_one() {
        let cat = BasisCatalog::builtin_4_1();
        let v = DecayVector::bundled(Channel::Vector, &cat).unwrap();
        let m = decay_projector(&v, &cat).unwrap().to_matrix().unwrap();
        let nu = v.index_space(&cat, 16).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert!((m[(i, j)].re - nu[i] * nu[j]).abs() < 1e-12 && m[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_catalog_needs_explicit_vector() {
        let mut text = BasisCatalog::builtin_1_1().to_text();
        text = text.replace("truncation 1 1", "truncation 2 1");
        let cat = BasisCatalog::from_text(&text).unwrap();
        assert!(matches!(
            DecayVector::bundled(Channel::Vector, &cat),
            Err(Error::UnsupportedCatalog)
        ));
        assert!(DecayVector::explicit(Channel::Vector, vec![1.0, 1.0, 0.0, 0.0], &cat).is_ok());
    }

    #[test]
    fn decay_constant_is_sign_insensitive_and_vanishes_off_support() {
        let h = light();
        let v = DecayVector::bundled(Channel::Pseudoscalar, &h.catalog).unwrap();
        let k = calibrate_decay_prefactor(&h, &v).unwrap();
        let spec = exact_eigensolve(&h).unwrap();
        let g: Vec<f64> = spec.vector(0).iter().copied().collect();
        let neg: Vec<f64> = g.iter().map(|a| -a).collect();
        let sv = SimulationSettings::sv();
        let f1 = measure_decay_constant(
            Preparation::State(&state_of(&g)),
            &v,
            &h.catalog,
            k,
            &sv,
            None,
            0,
        )
        .unwrap();
        let f2 = measure_decay_constant(
            Preparation::State(&state_of(&neg)),
            &v,
            &h.catalog,
            k,
            &sv,
            None,
            0,
        )
        .unwrap();
        assert_eq!(f1.f_mev, f2.f_mev);
        // States 2 and 4 carry odd l.
        let mut off = vec![0.0; 4];
        off[h.catalog.entry(2).unwrap().index] = 0.6;
        off[h.catalog.entry(3).unwrap().index] = -0.8;
        let f0 = measure_decay_constant(
            Preparation::State(&state_of(&off)),
            &v,
            &h.catalog,
            k,
            &sv,
            None,
            0,
        )
        .unwrap();
        assert!(f0.f_mev.abs() < 1e-9);
    }

    #[test]
    fn single_state_pdf_is_chi_squared() {
        let cat = BasisCatalog::builtin_1_1();
        let p = ModelParams::light_1_1();
        let mut v = vec![0.0; 4];
        v[cat.entry(0).unwrap().index] = 1.0;
        for x in [0.1, 0.37, 0.8] {
            let q = classical_pdf(&v, &cat, &p, x).unwrap();
            let c = chi_l(x, 0, &p).unwrap();
            assert!((q - c * c / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn pdf_operator_rejects_endpoints() {
        let cat = BasisCatalog::builtin_1_1();
        let p = ModelParams::light_1_1();
        assert!(pdf_operator(0.0, &cat, &p).is_err());
        assert!(pdf_operator(1.0, &cat, &p).is_err());
        assert!(pdf_operator(0.5, &cat, &p).unwrap().is_hermitian(1e-12));
    }

    #[test]
    fn default_grid() {
        let g = default_pdf_grid(19);
        assert_eq!(g.len(), 19);
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[18] - 0.95).abs() < 1e-15);
    }
}

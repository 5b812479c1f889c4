use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model parameters of the basis-function Hamiltonian (energies in MeV).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub kappa: f64,
    pub m_q: f64,
    /// Antiquark mass; equals `m_q` in the isospin-symmetric limit.
    pub m_qbar: f64,
    pub n_f: u32,
    pub alpha_s0: f64,
    #[serde(default = "default_colors")]
    pub n_c: u32,
}

fn default_colors() -> u32 {
    3
}

impl ModelParams {
    pub fn new(kappa: f64, m_q: f64, n_f: u32, alpha_s0: f64) -> Result<Self> {
        let p = ModelParams {
            kappa,
            m_q,
            m_qbar: m_q,
            n_f,
            alpha_s0,
            n_c: 3,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the (N_max, L_max) = (1, 1) fit.
    pub fn light_1_1() -> Self {
        ModelParams::new(560.0, 300.0, 3, 0.89).expect("valid constants")
    }

    /// Parameters of the (N_max, L_max) = (4, 1) fit.
    pub fn light_4_1() -> Self {
        ModelParams::new(560.0, 380.0, 3, 0.89).expect("valid constants")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.m_q > 0.0 && self.m_qbar > 0.0) {
            return Err(Error::InvalidArgument(
                "kappa and quark masses must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Jacobi exponent `alpha = 2 m_qbar (m_q + m_qbar) / kappa^2`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.m_qbar * (self.m_q + self.m_qbar) / (self.kappa * self.kappa)
    }

    /// Jacobi exponent `beta = 2 m_q (m_q + m_qbar) / kappa^2`.
    pub fn beta(&self) -> f64 {
        2.0 * self.m_q * (self.m_q + self.m_qbar) / (self.kappa * self.kappa)
    }
}

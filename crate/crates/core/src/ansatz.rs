//! Parameterized circuits: the hardware-efficient ansatz and the
//! single-excitation unitary coupled-cluster ansatz.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString};
use crate::sim::{Angle, Circuit};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Hea,
    UccSingle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub occupied_mode: usize,
    #[serde(default = "default_rho")]
    pub trotter_rho: usize,
}

fn default_reps() -> usize {
    1
}

fn default_rho() -> usize {
    1
}

impl AnsatzSpec {
    pub fn hea(n_qubits: usize, reps: usize) -> Self {
        AnsatzSpec {
            kind: AnsatzKind::Hea,
            n_qubits,
            reps,
            occupied_mode: 0,
            trotter_rho: 1,
        }
    }

    pub fn ucc_single(n_qubits: usize, occupied_mode: usize, trotter_rho: usize) -> Self {
        AnsatzSpec {
            kind: AnsatzKind::UccSingle,
            n_qubits,
            reps: 0,
            occupied_mode,
            trotter_rho,
        }
    }

    pub fn n_parameters(&self) -> usize {
        match self.kind {
            AnsatzKind::Hea => 2 * self.n_qubits * (self.reps + 1),
            AnsatzKind::UccSingle => self.n_qubits.saturating_sub(1),
        }
    }

    pub fn build(&self) -> Result<Circuit> {
        match self.kind {
            AnsatzKind::Hea => build_hea(self.n_qubits, self.reps),
            AnsatzKind::UccSingle => {
                build_ucc_single(self.n_qubits, self.occupied_mode, self.trotter_rho)
            }
        }
    }
}

/// `reps + 1` layers of RY then RZ on every qubit, separated by linear CX
/// chains. Parameters are laid out layer by layer, RY block first.
pub fn build_hea(n_qubits: usize, reps: usize) -> Result<Circuit> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument(
            "ansatz needs at least one qubit".into(),
        ));
    }
    let n = n_qubits;
    let mut c = Circuit::new(n, 2 * n * (reps + 1));
    for layer in 0..=reps {
        let base = 2 * n * layer;
        for q in 0..n {
            c.ry(q, Angle::param(base + q))?;
        }
        for q in 0..n {
            c.rz(q, Angle::param(base + n + q))?;
        }
        if layer < reps {
            for q in 0..n.saturating_sub(1) {
                c.cx(q, q + 1)?;
            }
        }
    }
    Ok(c)
}

/// Appends `exp(-i angle/2 * P)`: basis change, CX parity ladder, RZ,
/// then the mirror image.
pub fn append_pauli_exponential(c: &mut Circuit, p: &PauliString, angle: Angle) -> Result<()> {
    let support: Vec<usize> = (0..p.n_qubits())
        .filter(|&q| p.get(q) != Pauli::I)
        .collect();
    let Some(&top) = support.last() else {
        return Ok(());
    };
    for &q in &support {
        match p.get(q) {
            Pauli::X => {
                c.h(q)?;
            }
            Pauli::Y => {
                c.rx(q, Angle::Fixed(FRAC_PI_2))?;
            }
            _ => {}
        }
    }
    for w in support.windows(2) {
        c.cx(w[0], w[1])?;
    }
    c.rz(top, angle)?;
    for w in support.windows(2).rev() {
        c.cx(w[0], w[1])?;
    }
    for &q in &support {
        match p.get(q) {
            Pauli::X => {
                c.h(q)?;
            }
            Pauli::Y => {
                c.rx(q, Angle::Fixed(-FRAC_PI_2))?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Trotterized `prod_p exp(theta_p (a_p^dag a_r - a_r^dag a_p))` over the
/// virtual modes `p != r` in ascending order, one parameter per mode.
///
/// Each generator equals `(i/2) Z..Z (Y_r X_p - X_r Y_p)`; its two commuting
/// strings become `RZ(-theta)` and `RZ(+theta)` exponentials.
pub fn build_ucc_single(
    n_qubits: usize,
    occupied_mode: usize,
    trotter_rho: usize,
) -> Result<Circuit> {
    if occupied_mode >= n_qubits {
        return Err(Error::IndexOutOfRange {
            index: occupied_mode,
            len: n_qubits,
        });
    }
    if trotter_rho == 0 {
        return Err(Error::InvalidArgument(
            "trotter number must be positive".into(),
        ));
    }
    let r = occupied_mode;
    let virtuals: Vec<usize> = (0..n_qubits).filter(|&p| p != r).collect();
    let mut c = Circuit::new(n_qubits, virtuals.len());
    let step = 1.0 / trotter_rho as f64;
    for _ in 0..trotter_rho {
        for (k, &p) in virtuals.iter().enumerate() {
            let (lo, hi) = (p.min(r), p.max(r));
            let chain: Vec<(usize, Pauli)> = (lo + 1..hi).map(|q| (q, Pauli::Z)).collect();
            let string = |on_r: Pauli, on_p: Pauli| {
                let mut f = chain.clone();
                f.push((r, on_r));
                f.push((p, on_p));
                PauliString::from_factors(n_qubits, &f)
            };
            append_pauli_exponential(
                &mut c,
                &string(Pauli::Y, Pauli::X)?,
                Angle::scaled(k, -step),
            )?;
            append_pauli_exponential(&mut c, &string(Pauli::X, Pauli::Y)?, Angle::scaled(k, step))?;
        }
    }
    Ok(c)
}

//! Run configuration files (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blfq_vqe::ansatz::{AnsatzKind, AnsatzSpec};
use blfq_vqe::blfq::{
    builtin_hamiltonian, load_external_hamiltonian, Encoding, HamiltonianSource, ModelParams,
    SourceLabel,
};
use blfq_vqe::engine::{SimulationSettings, SsvqeSpec};
use blfq_vqe::optim::OptimizerConfig;
use blfq_vqe::sim::{NoiseSpec, Tier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vqe,
    Ssvqe,
}

/// Either a bundled Hamiltonian or a matrix file with its catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<SourceLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    #[serde(default = "one")]
    pub reps: usize,
    /// Direct encoding only; defaults to the mode of catalog state 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied_mode: Option<usize>,
    #[serde(default = "one")]
    pub trotter_rho: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsvqeConfig {
    pub reference_states: Vec<usize>,
    /// Defaults to 1, 1/2, 1/4, ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdfConfig {
    pub enabled: bool,
    pub grid_size: usize,
}

impl Default for PdfConfig {
    fn default() -> Self {
        PdfConfig {
            enabled: false,
            grid_size: 19,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    pub decay: bool,
    pub pdf: PdfConfig,
    /// Decay vectors in catalog order; required for external catalogs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_pseudoscalar: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_vector: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianConfig,
    #[serde(default = "default_encoding")]
    pub encoding: Encoding,
    pub ansatz: AnsatzConfig,
    #[serde(default = "default_method")]
    pub method: Method,
    /// VQE initial basis index; defaults to the register state of catalog state 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssvqe: Option<SsvqeConfig>,
    #[serde(default = "default_tier")]
    pub tier: Tier,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub mitigation: bool,
    /// Shots per prepared state for the readout calibration; 0 = exact.
    #[serde(default = "default_shots")]
    pub calibration_shots: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_encoding() -> Encoding {
    Encoding::Compact
}

fn default_method() -> Method {
    Method::Ssvqe
}

fn default_tier() -> Tier {
    Tier::Sv
}

fn default_shots() -> u64 {
    8192
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Parses a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.hamiltonian.matrix, &mut cfg.hamiltonian.catalog]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSource> {
        let h = &self.hamiltonian;
        match (h.builtin, &h.matrix, &h.catalog) {
            (Some(SourceLabel::External), ..) => {
                bail!("hamiltonian.builtin cannot be \"external\"; give matrix and catalog paths")
            }
            (Some(label), None, None) => {
                let mut src = builtin_hamiltonian(label)?;
                if let Some(p) = &h.params {
                    p.validate()?;
                    src.params = p.clone();
                }
                Ok(src)
            }
            (None, Some(m), Some(c)) => {
                let params = h
                    .params
                    .clone()
                    .context("an external hamiltonian needs [hamiltonian.params]")?;
                Ok(load_external_hamiltonian(m, c, params)?)
            }
            _ => bail!(
                "set either hamiltonian.builtin or both hamiltonian.matrix and hamiltonian.catalog"
            ),
        }
    }

    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            tier: self.tier,
            shots: self.shots,
            noise: self.noise.clone(),
            mitigation: self.mitigation,
            calibration_shots: self.calibration_shots,
        }
    }

    pub fn ansatz_spec(&self, h: &HamiltonianSource) -> Result<AnsatzSpec> {
        let n = h.n_qubits(self.encoding);
        let a = &self.ansatz;
        Ok(match a.kind {
            AnsatzKind::Hea => AnsatzSpec::hea(n, a.reps),
            AnsatzKind::UccSingle => {
                let occ = match a.occupied_mode {
                    Some(m) => m,
                    None => h.catalog.entry(0)?.index,
                };
                AnsatzSpec::ucc_single(n, occ, a.trotter_rho)
            }
        })
    }

    pub fn ssvqe_spec(&self, h: &HamiltonianSource) -> Result<SsvqeSpec> {
        match (self.method, &self.ssvqe) {
            (Method::Vqe, _) => {
                let initial = match self.initial_state {
                    Some(i) => i,
                    None => h.basis_index(0, self.encoding)?,
                };
                Ok(SsvqeSpec::new(vec![initial], vec![1.0])?)
            }
            (Method::Ssvqe, Some(s)) => Ok(match &s.weights {
                Some(w) => SsvqeSpec::new(s.reference_states.clone(), w.clone())?,
                None => SsvqeSpec::geometric(s.reference_states.clone())?,
            }),
            (Method::Ssvqe, None) => bail!("method = \"ssvqe\" needs an [ssvqe] table"),
        }
    }

    /// Cross-field checks that need the resolved Hamiltonian.
    pub fn validate(&self, h: &HamiltonianSource) -> Result<()> {
        if self.encoding == Encoding::Direct
            && (self.ansatz.kind != AnsatzKind::UccSingle || h.label != SourceLabel::Builtin11)
        {
            bail!("direct encoding is only supported with the ucc_single ansatz on builtin_1_1");
        }
        if self.ansatz.kind == AnsatzKind::Hea && self.ansatz.reps == 0 {
            bail!("ansatz.reps must be at least 1");
        }
        if self.observables.pdf.enabled && self.observables.pdf.grid_size == 0 {
            bail!("observables.pdf.grid_size must be at least 1");
        }
        self.settings().validate()?;
        self.optimizer.validate()?;
        self.ssvqe_spec(h)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
hamiltonian = { builtin = "builtin_1_1" }
ansatz = { kind = "hea", reps = 2 }
ssvqe = { reference_states = [0, 1, 2, 3] }
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.method, Method::Ssvqe);
        assert_eq!(cfg.tier, Tier::Sv);
        assert_eq!(cfg.observables.pdf.grid_size, 19);
        let h = cfg.hamiltonian().unwrap();
        cfg.validate(&h).unwrap();
        assert_eq!(cfg.ssvqe_spec(&h).unwrap().weights, [1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{MINIMAL}\nshots = 10\nshotz = 3\n");
        let err = toml::from_str::<RunConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("shotz") && err.contains("line 7"), "{err}");
    }

    #[test]
    fn direct_needs_ucc() {
        let text = MINIMAL.replace("hamiltonian =", "encoding = \"direct\"\nhamiltonian =");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        let h = cfg.hamiltonian().unwrap();
        assert!(cfg.validate(&h).is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}

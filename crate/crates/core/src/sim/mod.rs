//! Circuit simulation: exact statevector, shot sampling and a noisy tier
//! with readout-error mitigation.

mod circuit;
mod noise;
mod sampling;
mod state;

pub use circuit::{Angle, Circuit, Gate, GateKind};
pub use noise::{build_calibration_filter, MitigationFilter, NoiseSpec};
pub use sampling::{
    counts_csv, expectation_sampled, sample_counts, Estimate, MeasurementPlan, Preparation,
};
pub use state::{
    apply_circuit, density_matrix, expectation_exact, DensityMatrixExport, QuantumState,
};

use serde::{Deserialize, Serialize};

/// Simulation fidelity level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Exact statevector expectations.
    Sv,
    /// Shot-sampled, noiseless.
    Shots,
    /// Shot-sampled with gate and readout noise.
    Noisy,
}

impl std::fmt::Display for Tier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tier::Sv => "sv",
            Tier::Shots => "shots",
            Tier::Noisy => "noisy",
        })
    }
}

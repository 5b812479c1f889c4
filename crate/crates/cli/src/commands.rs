use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blfq_vqe::blfq::{exact_eigensolve, Encoding, HamiltonianSource};
use blfq_vqe::engine::{final_state, run_ssvqe, SimulationSettings, SpectrumResult};
use blfq_vqe::observables::{
    calibrate_decay_prefactor, classical_pdf, default_pdf_grid, measure_decay_constant, pdf_csv,
    pdf_scan, Channel, DecayResult, DecayVector, PdfPoint,
};
use blfq_vqe::sim::{
    density_matrix, DensityMatrixExport, MitigationFilter, Preparation, QuantumState, Tier,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::RunConfig;

const PDF_SEED_TAG: u64 = 0x9df;
const DECAY_SEED_TAG: u64 = 0xdec;

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn prepare(cfg: &RunConfig) -> Result<HamiltonianSource> {
    let h = cfg.hamiltonian()?;
    cfg.validate(&h)?;
    Ok(h)
}

fn snapshot(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    out.write("config.snapshot.toml", &cfg.to_toml()?)?;
    Ok(serde_json::to_value(cfg)?)
}

pub fn encode(cfg: &RunConfig) -> Result<Value> {
    let h = prepare(cfg)?;
    let op = h.operator(cfg.encoding)?;
    let mut out = Output::new(&cfg.output_dir)?;
    let name = match cfg.encoding {
        Encoding::Compact => "hamiltonian_compact.pauli",
        Encoding::Direct => "hamiltonian_direct.pauli",
    };
    let header = format!(
        "# {} {} encoding, {} qubits, MeV^2, highest qubit first\n",
        h.label,
        serde_json::to_value(cfg.encoding)?.as_str().unwrap_or("?"),
        op.n_qubits()
    );
    out.write(name, &(header + &op.to_text()))?;
    out.write("catalog.txt", &h.catalog.to_text())?;
    Ok(json!({
        "command": "encode",
        "operator_file": name,
        "n_qubits": op.n_qubits(),
        "n_terms": op.len(),
        "files": out.files,
    }))
}

fn decay_vector(cfg: &RunConfig, h: &HamiltonianSource, channel: Channel) -> Result<DecayVector> {
    let explicit = match channel {
        Channel::Pseudoscalar => &cfg.observables.nu_pseudoscalar,
        Channel::Vector => &cfg.observables.nu_vector,
    };
    match explicit {
        Some(v) => Ok(DecayVector::explicit(channel, v.clone(), &h.catalog)?),
        None => DecayVector::bundled(channel, &h.catalog).context(
            "no bundled decay vector for this catalog; set observables.nu_pseudoscalar / nu_vector",
        ),
    }
}

/// Channel measured on the state of a given energy rank.
fn channel_for_rank(rank: usize) -> Option<Channel> {
    match rank {
        0 => Some(Channel::Pseudoscalar),
        1 => Some(Channel::Vector),
        _ => None,
    }
}

fn compact_state(h: &HamiltonianSource, matrix_amps: &[Complex64]) -> Result<QuantumState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); h.catalog.padded_dim()];
    amps[..matrix_amps.len()].copy_from_slice(matrix_amps);
    Ok(QuantumState::from_amplitudes(amps)?)
}

fn pdf_grid(cfg: &RunConfig) -> Vec<f64> {
    default_pdf_grid(cfg.observables.pdf.grid_size)
}

pub fn exact(cfg: &RunConfig) -> Result<Value> {
    let h = prepare(cfg)?;
    let spec = exact_eigensolve(&h)?;
    let mut out = Output::new(&cfg.output_dir)?;
    let config = snapshot(cfg, &mut out)?;
    let labels: Vec<String> = (0..h.dim())
        .map(|k| h.catalog.compact_bitstring(k))
        .collect::<blfq_vqe::Result<_>>()?;
    // Eigenvector components listed in catalog order.
    let vectors: Vec<Vec<f64>> = (0..h.dim())
        .map(|i| {
            let v = spec.vector(i);
            h.catalog.entries().iter().map(|e| v[e.index]).collect()
        })
        .collect();
    let mut decay = Vec::new();
    if cfg.observables.decay {
        for rank in 0..h.dim().min(2) {
            let ch = channel_for_rank(rank).expect("rank below 2");
            let nu = decay_vector(cfg, &h, ch)?;
            let k = calibrate_decay_prefactor(&h, &nu)?;
            let v = spec.vector(rank);
            let nu_m = nu.index_space(&h.catalog, h.dim())?;
            let overlap: f64 = nu_m.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            decay.push(json!({
                "state": rank,
                "channel": ch,
                "f_MeV": k * overlap.abs(),
                "std_error": 0.0,
                "K_MeV": k,
                "tier": "exact",
            }));
        }
    }
    if cfg.observables.pdf.enabled {
        for rank in 0..h.dim().min(2) {
            let v: Vec<f64> = spec.vector(rank).iter().copied().collect();
            let pts = pdf_grid(cfg)
                .into_iter()
                .map(|x| {
                    Ok(PdfPoint {
                        x,
                        q: classical_pdf(&v, &h.catalog, &h.params, x)?,
                        std_error: 0.0,
                    })
                })
                .collect::<blfq_vqe::Result<Vec<_>>>()?;
            out.write(&format!("pdf_exact_state{rank}.csv"), &pdf_csv(&pts))?;
        }
    }
    let summary = json!({
        "command": "exact",
        "hamiltonian": h.label.to_string(),
        "energies_MeV2": spec.values,
        "masses_MeV": spec.masses(),
        "catalog_labels": labels,
        "eigenvectors": vectors,
        "decay": decay,
        "config": config,
    });
    out.write_json("spectrum.json", &summary)?;
    Ok(json!({
        "command": "exact",
        "energies_MeV2": spec.values,
        "masses_MeV": spec.masses(),
        "files": out.files,
    }))
}

/// Register preparation used for observables on SSVQE state `i`.
enum StateSource {
    Circuit { initial: usize },
    State(QuantumState),
}

impl StateSource {
    fn preparation<'a>(&'a self, result: &'a SpectrumResult) -> Preparation<'a> {
        match self {
            StateSource::Circuit { initial } => Preparation::Circuit {
                circuit: &result.circuit,
                params: &result.final_params,
                initial: *initial,
            },
            StateSource::State(s) => Preparation::State(s),
        }
    }
}

fn state_source(
    cfg: &RunConfig,
    h: &HamiltonianSource,
    result: &SpectrumResult,
    i: usize,
) -> Result<StateSource> {
    match cfg.encoding {
        Encoding::Compact if cfg.tier == Tier::Noisy => Ok(StateSource::Circuit {
            initial: result.states[i].reference,
        }),
        Encoding::Compact => Ok(StateSource::State(final_state(result, i)?)),
        Encoding::Direct => {
            let st = final_state(result, i)?;
            Ok(StateSource::State(compact_state(
                h,
                &h.to_matrix_space(st.amplitudes(), Encoding::Direct),
            )?))
        }
    }
}

fn observable_settings(cfg: &RunConfig) -> SimulationSettings {
    let mut s = cfg.settings();
    // Observables on a direct-encoded run are measured on a reconstructed
    // compact state, which carries no gate noise.
    if cfg.encoding == Encoding::Direct && s.tier == Tier::Noisy {
        s.tier = Tier::Shots;
    }
    s
}

pub fn solve(cfg: &RunConfig) -> Result<Value> {
    let h = prepare(cfg)?;
    let op = h.operator(cfg.encoding)?;
    let ansatz = cfg.ansatz_spec(&h)?;
    let spec = cfg.ssvqe_spec(&h)?;
    let settings = cfg.settings();
    let mut out = Output::new(&cfg.output_dir)?;
    let config = snapshot(cfg, &mut out)?;
    let result = run_ssvqe(&op, &ansatz, &spec, &settings, &cfg.optimizer, cfg.seed)?;

    out.write("trace.csv", &result.trace.to_csv())?;
    let mut states = Vec::new();
    for (i, s) in result.states.iter().enumerate() {
        let trace_file = format!("trace_state{i}.csv");
        out.write(&trace_file, &result.reference_trace_csv(i)?)?;
        let rho = density_matrix(&final_state(&result, i)?);
        out.write_json(
            &format!("density_state{i}.json"),
            &serde_json::to_value(DensityMatrixExport::new(&rho, None))?,
        )?;
        states.push(json!({
            "reference": s.reference,
            "reference_bitstring": s.reference_bitstring,
            "energy_MeV2": s.energy,
            "mass_MeV": s.mass,
            "std_error": s.std_error,
            "rank": result.order[i],
            "trace_file": trace_file,
        }));
    }

    let obs_settings = observable_settings(cfg);
    let n_compact = h.catalog.compact_qubits();
    let filter: Option<MitigationFilter> = obs_settings.mitigation_filter(n_compact, cfg.seed)?;
    let mut decay: Vec<DecayResult> = Vec::new();
    let mut pdf_files = Vec::new();
    if cfg.observables.decay || cfg.observables.pdf.enabled {
        for i in 0..result.states.len() {
            let Some(ch) = channel_for_rank(result.order[i]) else {
                continue;
            };
            let src = state_source(cfg, &h, &result, i)?;
            let prep = src.preparation(&result);
            let seed = blfq_vqe::rng::derive_seed(cfg.seed, &[i as u64]);
            if cfg.observables.decay {
                let nu = decay_vector(cfg, &h, ch)?;
                let k = calibrate_decay_prefactor(&h, &nu)?;
                let d = measure_decay_constant(
                    prep,
                    &nu,
                    &h.catalog,
                    k,
                    &obs_settings,
                    filter.as_ref(),
                    blfq_vqe::rng::derive_seed(seed, &[DECAY_SEED_TAG]),
                )?;
                decay.push(d);
            }
            if cfg.observables.pdf.enabled {
                let pts = pdf_scan(
                    prep,
                    &h.catalog,
                    &h.params,
                    &pdf_grid(cfg),
                    &obs_settings,
                    filter.as_ref(),
                    blfq_vqe::rng::derive_seed(seed, &[PDF_SEED_TAG]),
                )?;
                let name = format!("pdf_state{i}.csv");
                out.write(&name, &pdf_csv(&pts))?;
                pdf_files.push(name);
            }
        }
    }
    if cfg.observables.decay {
        out.write_json("decay.json", &serde_json::to_value(&decay)?)?;
    }

    let exact = exact_eigensolve(&h).ok().map(|s| s.values);
    let summary = json!({
        "command": "solve",
        "method": cfg.method,
        "tier": cfg.tier,
        "encoding": cfg.encoding,
        "seed": cfg.seed,
        "states": states,
        "exact_MeV2": exact,
        "termination": result.trace.termination,
        "iterations": result.trace.records.len(),
        "final_cost": result.trace.final_cost,
        "final_params": result.final_params,
        "trace_file": "trace.csv",
        "decay": decay,
        "pdf_files": pdf_files,
        "config": config,
    });
    out.write_json("result.json", &summary)?;
    Ok(json!({
        "command": "solve",
        "energies_MeV2": result.states.iter().map(|s| s.energy).collect::<Vec<_>>(),
        "std_errors": result.states.iter().map(|s| s.std_error).collect::<Vec<_>>(),
        "files": out.files,
    }))
}

pub fn pdf_scan_cmd(cfg: &RunConfig) -> Result<Value> {
    let h = prepare(cfg)?;
    let spec = exact_eigensolve(&h)?;
    let settings = observable_settings(cfg);
    let filter = settings.mitigation_filter(h.catalog.compact_qubits(), cfg.seed)?;
    let mut out = Output::new(&cfg.output_dir)?;
    snapshot(cfg, &mut out)?;
    let grid = pdf_grid(cfg);
    let mut worst: f64 = 0.0;
    for rank in 0..h.dim().min(2) {
        let v: Vec<f64> = spec.vector(rank).iter().copied().collect();
        let amps: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let state = compact_state(&h, &amps)?;
        let pts = pdf_scan(
            Preparation::State(&state),
            &h.catalog,
            &h.params,
            &grid,
            &settings,
            filter.as_ref(),
            blfq_vqe::rng::derive_seed(cfg.seed, &[PDF_SEED_TAG, rank as u64]),
        )?;
        let exact: Vec<PdfPoint> = grid
            .iter()
            .map(|&x| {
                Ok(PdfPoint {
                    x,
                    q: classical_pdf(&v, &h.catalog, &h.params, x)?,
                    std_error: 0.0,
                })
            })
            .collect::<blfq_vqe::Result<_>>()?;
        for (a, b) in pts.iter().zip(&exact) {
            worst = worst.max((a.q - b.q).abs());
        }
        out.write(&format!("pdf_state{rank}.csv"), &pdf_csv(&pts))?;
        out.write(&format!("pdf_exact_state{rank}.csv"), &pdf_csv(&exact))?;
    }
    Ok(json!({
        "command": "pdf-scan",
        "tier": settings.tier,
        "max_abs_deviation_from_exact": worst,
        "files": out.files,
    }))
}

pub fn calibrate(cfg: &RunConfig) -> Result<Value> {
    let h = prepare(cfg)?;
    let mut out = Output::new(&cfg.output_dir)?;
    snapshot(cfg, &mut out)?;
    let mut k = serde_json::Map::new();
    for ch in [Channel::Pseudoscalar, Channel::Vector] {
        let nu = decay_vector(cfg, &h, ch)?;
        k.insert(ch.to_string(), json!(calibrate_decay_prefactor(&h, &nu)?));
    }
    let readout = match (&cfg.noise, cfg.mitigation) {
        (Some(_), true) => {
            let mut s = cfg.settings();
            s.tier = Tier::Noisy;
            let f = s
                .mitigation_filter(h.catalog.compact_qubits(), cfg.seed)?
                .expect("noisy tier with mitigation builds a filter");
            let m = f.calibration_matrix();
            Some(
                (0..m.nrows())
                    .map(|i| m.row(i).iter().copied().collect::<Vec<f64>>())
                    .collect::<Vec<_>>(),
            )
        }
        (None, true) => bail!("mitigation = true needs a [noise] table to calibrate against"),
        _ => None,
    };
    let value = json!({
        "hamiltonian": h.label.to_string(),
        "params": h.params,
        "K_MeV": k,
        "readout_calibration": readout,
    });
    out.write_json("calibration.json", &value)?;
    Ok(json!({ "command": "calibrate", "K_MeV": k, "files": out.files }))
}

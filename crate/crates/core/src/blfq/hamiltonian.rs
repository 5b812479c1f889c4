use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::catalog::BasisCatalog;
use super::params::ModelParams;
use crate::linalg::hermitian_eigen;
use crate::pauli::{compact_encode_real, jw_encode_one_body, PauliOperator};
use crate::{Error, Result};

const H_1_1: &str = include_str!("../../data/h_1_1.txt");
const H_4_1: &str = include_str!("../../data/h_4_1.pauli");
const PAD_PENALTY_FACTOR: f64 = 1e3;
const MAX_EIGEN_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceLabel {
    #[serde(rename = "builtin_1_1")]
    Builtin11,
    #[serde(rename = "builtin_4_1")]
    Builtin41,
    External,
}

impl fmt::Display for SourceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceLabel::Builtin11 => "builtin_1_1",
            SourceLabel::Builtin41 => "builtin_4_1",
            SourceLabel::External => "external",
        })
    }
}

impl FromStr for SourceLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin_1_1" => Ok(SourceLabel::Builtin11),
            "builtin_4_1" => Ok(SourceLabel::Builtin41),
            "external" => Ok(SourceLabel::External),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// How basis states map onto qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One qubit per basis state (Jordan-Wigner, single excitation).
    Direct,
    /// Binary labels, `log2(dim)` qubits.
    Compact,
}

/// A Hamiltonian matrix in MeV^2 with its basis catalog and parameters.
#[derive(Clone, Debug)]
pub struct HamiltonianSource {
    pub label: SourceLabel,
    pub matrix: DMatrix<f64>,
    pub catalog: BasisCatalog,
    pub params: ModelParams,
}

/// Exact eigenpairs in ascending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// Masses in MeV, `sqrt(max(lambda, 0))`.
    pub fn masses(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

pub fn builtin_hamiltonian(label: SourceLabel) -> Result<HamiltonianSource> {
    match label {
        SourceLabel::Builtin11 => Ok(HamiltonianSource {
            label,
            matrix: parse_matrix(H_1_1)?,
            catalog: BasisCatalog::builtin_1_1(),
            params: ModelParams::light_1_1(),
        }),
        SourceLabel::Builtin41 => {
            let op = PauliOperator::from_text(H_4_1)?;
            let m = op.to_matrix()?;
            if m.iter().any(|z| z.im.abs() > 1e-9 * z.norm().max(1.0)) {
                return Err(Error::NonHermitianOperator);
            }
            Ok(HamiltonianSource {
                label,
                matrix: m.map(|z| z.re),
                catalog: BasisCatalog::builtin_4_1(),
                params: ModelParams::light_4_1(),
            })
        }
        SourceLabel::External => Err(Error::UnknownLabel(
            "external sources are loaded from files".into(),
        )),
    }
}

/// Parses the `dim N units MeV2` matrix format and checks symmetry.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let dim = match h.as_slice() {
        ["dim", n, "units", "MeV2"] => n.parse::<usize>().ok().filter(|&d| d > 0),
        _ => None,
    }
    .ok_or(Error::Parse {
        line: hline,
        msg: "expected header `dim N units MeV2`".into(),
    })?;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut row = 0;
    for (line, l) in lines {
        if row == dim {
            return Err(Error::Parse {
                line,
                msg: format!("more than {dim} rows"),
            });
        }
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != dim {
            return Err(Error::Parse {
                line,
                msg: format!("expected {dim} entries, found {}", vals.len()),
            });
        }
        for (c, v) in vals.iter().enumerate() {
            m[(row, c)] = v.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number \"{v}\""),
            })?;
        }
        row += 1;
    }
    if row != dim {
        return Err(Error::Dimension(format!(
            "expected {dim} rows, found {row}"
        )));
    }
    check_symmetric(&m)?;
    Ok(m)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let dev = (m - m.transpose()).norm();
    if dev > 1e-9 * m.norm() {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Loads a user matrix and catalog; the catalog must list one state per row.
pub fn load_external_hamiltonian(
    matrix_path: &Path,
    catalog_path: &Path,
    params: ModelParams,
) -> Result<HamiltonianSource> {
    let matrix = parse_matrix(&std::fs::read_to_string(matrix_path)?)?;
    let catalog = BasisCatalog::from_text(&std::fs::read_to_string(catalog_path)?)?;
    HamiltonianSource::new(SourceLabel::External, matrix, catalog, params)
}

impl HamiltonianSource {
    pub fn new(
        label: SourceLabel,
        matrix: DMatrix<f64>,
        catalog: BasisCatalog,
        params: ModelParams,
    ) -> Result<Self> {
        params.validate()?;
        if !matrix.is_square() || matrix.nrows() != catalog.len() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but the catalog has {} states",
                matrix.nrows(),
                matrix.ncols(),
                catalog.len()
            )));
        }
        check_symmetric(&matrix)?;
        Ok(HamiltonianSource {
            label,
            matrix,
            catalog,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix zero-padded to a power of two. Padded rows get a diagonal
    /// penalty of 1000 times a Gershgorin bound on the spectrum, which
    /// pushes them far above the physical states.
    pub fn padded_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let padded = self.catalog.padded_dim();
        if padded == dim {
            return self.matrix.clone();
        }
        let bound = (0..dim)
            .map(|i| self.matrix.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut m = DMatrix::zeros(padded, padded);
        m.view_mut((0, 0), (dim, dim)).copy_from(&self.matrix);
        for i in dim..padded {
            m[(i, i)] = PAD_PENALTY_FACTOR * bound;
        }
        m
    }

    pub fn n_qubits(&self, encoding: Encoding) -> usize {
        match encoding {
            Encoding::Direct => self.dim(),
            Encoding::Compact => self.catalog.compact_qubits(),
        }
    }

    pub fn operator(&self, encoding: Encoding) -> Result<PauliOperator> {
        match encoding {
            Encoding::Direct => jw_encode_one_body(&self.matrix, self.dim()),
            Encoding::Compact => compact_encode_real(&self.padded_matrix()),
        }
    }

    /// Register basis index representing catalog state `k`.
    pub fn basis_index(&self, k: usize, encoding: Encoding) -> Result<usize> {
        let idx = self.catalog.entry(k)?.index;
        Ok(match encoding {
            Encoding::Compact => idx,
            Encoding::Direct => 1usize << idx,
        })
    }

    /// Maps a register amplitude vector back to matrix-index space.
    pub fn to_matrix_space(&self, amps: &[Complex64], encoding: Encoding) -> Vec<Complex64> {
        (0..self.dim())
            .map(|i| {
                let b = match encoding {
                    Encoding::Compact => i,
                    Encoding::Direct => 1usize << i,
                };
                amps.get(b).copied().unwrap_or_default()
            })
            .collect()
    }
}

/// Exact diagonalization of the (unpadded) matrix.
pub fn exact_eigensolve(h: &HamiltonianSource) -> Result<Spectrum> {
    if h.dim() > MAX_EIGEN_DIM {
        return Err(Error::Dimension(format!(
            "{} exceeds {MAX_EIGEN_DIM}",
            h.dim()
        )));
    }
    let e = hermitian_eigen(&h.matrix.map(|v| Complex64::new(v, 0.0)))?;
    Ok(Spectrum {
        values: e.values,
        vectors: e.vectors.map(|z| z.re),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light() -> HamiltonianSource {
        builtin_hamiltonian(SourceLabel::Builtin11).unwrap()
    }

    #[test]
    fn light_matrix_entries() {
        let h = light();
        assert_eq!(h.matrix[(0, 2)], 25428.0);
        assert_eq!(h.matrix[(1, 3)], -15767.0);
        assert_eq!(h.matrix[(0, 1)], 0.0);
    }

    #[test]
    fn light_spectrum() {
        let s = exact_eigensolve(&light()).unwrap();
        for (got, want) in s
            .values
            .iter()
            .zip([543059.0, 593915.0, 1685209.0, 1716743.0])
        {
            assert!((got - want).abs() <= 1.0, "{got} vs {want}");
        }
        let masses: Vec<i64> = s.masses().iter().map(|m| m.round() as i64).collect();
        assert_eq!(masses, [737, 771, 1298, 1310]);
    }

    #[test]
    fn light_ground_state_lives_on_first_block() {
        // Rows 0 and 2 decouple from rows 1 and 3.
        let s = exact_eigensolve(&light()).unwrap();
        let v = s.vector(0);
        assert!(v[1].abs() < 1e-12 && v[3].abs() < 1e-12);
    }

    #[test]
    fn heavy_source_is_symmetric() {
        let h = builtin_hamiltonian(SourceLabel::Builtin41).unwrap();
        assert_eq!(h.dim(), 16);
        assert!((&h.matrix - h.matrix.transpose()).norm() < 1e-9);
    }

    #[test]
    fn diagonal_spectrum() {
        let cat = BasisCatalog::builtin_1_1();
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let h = HamiltonianSource::new(SourceLabel::External, m, cat, ModelParams::light_1_1())
            .unwrap();
        let s = exact_eigensolve(&h).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.vectors, DMatrix::identity(4, 4));
    }

    #[test]
    fn matrix_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("blfq-ham-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mp = dir.join("h.txt");
        let cp = dir.join("c.txt");
        std::fs::write(&mp, H_1_1).unwrap();
        std::fs::write(&cp, BasisCatalog::builtin_1_1().to_text()).unwrap();
        let ext = load_external_hamiltonian(&mp, &cp, ModelParams::light_1_1()).unwrap();
        assert_eq!(ext.matrix, light().matrix);
        assert_eq!(ext.catalog, light().catalog);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let text = "dim 2 units MeV2\n1 2\n3 4\n";
        assert!(matches!(parse_matrix(text), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn malformed_matrix_reports_line() {
        assert!(matches!(
            parse_matrix("dim 2 units GeV\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix("dim 2 units MeV2\n1 0\n0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_matrix("dim 2 units MeV2\n1 0\n0 x\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn catalog_size_mismatch_rejected() {
        let m = DMatrix::<f64>::identity(3, 3);
        let r = HamiltonianSource::new(
            SourceLabel::External,
            m,
            BasisCatalog::builtin_1_1(),
            ModelParams::light_1_1(),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn padding_preserves_physical_spectrum() {
        let text = "\
0 0 0 0 1 -1 000
1 0 0 0 -1 1 001
2 0 0 1 1 -1 010
3 0 0 1 -1 1 011
4 0 1 0 -1 -1 100
5 0 -1 0 1 1 101
";
        let cat = BasisCatalog::from_text(text).unwrap();
        let m = DMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                100.0 * (i as f64 + 1.0)
            } else {
                10.0 / (1.0 + (i + j) as f64)
            }
        });
        let h = HamiltonianSource::new(SourceLabel::External, m, cat, ModelParams::light_4_1())
            .unwrap();
        let exact = exact_eigensolve(&h).unwrap();
        let padded = h.padded_matrix();
        assert_eq!(padded.nrows(), 8);
        let op = h.operator(Encoding::Compact).unwrap();
        assert_eq!(op.n_qubits(), 3);
        let pe = hermitian_eigen(&op.to_matrix().unwrap()).unwrap();
        for k in 0..6 {
            assert!((pe.values[k] - exact.values[k]).abs() < 1e-8 * exact.values[5]);
        }
        assert!(pe.values[6] > 100.0 * exact.values[5]);
    }
}

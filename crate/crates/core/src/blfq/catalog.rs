use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Quantum numbers of one basis state. Spins are stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlfqQuantumNumbers {
    pub n: u32,
    pub m: i32,
    pub l: u32,
    pub two_s: i32,
    pub two_sbar: i32,
}

impl BlfqQuantumNumbers {
    pub const fn new(n: u32, m: i32, l: u32, two_s: i32, two_sbar: i32) -> Self {
        BlfqQuantumNumbers {
            n,
            m,
            l,
            two_s,
            two_sbar,
        }
    }

    /// Twice the total angular momentum projection `m + s + sbar`.
    pub fn two_mj(&self) -> i32 {
        2 * self.m + self.two_s + self.two_sbar
    }

    pub fn within(&self, n_max: u32, l_max: u32) -> bool {
        2 * self.n + self.m.unsigned_abs() < n_max && self.l <= l_max
    }

    /// Same transverse and spin labels; only `l` may differ.
    pub fn same_except_l(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.two_s == other.two_s
            && self.two_sbar == other.two_sbar
    }
}

/// A catalog state and the computational-basis index it is stored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub qn: BlfqQuantumNumbers,
    pub index: usize,
}

/// Ordered basis states of one truncation together with their register
/// assignment. In the compact encoding state `k` is the basis vector
/// `|entries[k].index>`; in the direct encoding it is the one-hot vector
/// with mode `entries[k].index` occupied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCatalog {
    pub n_max: u32,
    pub l_max: u32,
    entries: Vec<CatalogEntry>,
}

const fn qn(n: u32, m: i32, l: u32, two_s: i32, two_sbar: i32) -> BlfqQuantumNumbers {
    BlfqQuantumNumbers::new(n, m, l, two_s, two_sbar)
}

fn reverse_bits(v: usize, width: usize) -> usize {
    (0..width).fold(0, |acc, b| acc | ((v >> b & 1) << (width - 1 - b)))
}

impl BasisCatalog {
    pub fn new(n_max: u32, l_max: u32, entries: Vec<CatalogEntry>) -> Result<Self> {
        let cat = BasisCatalog {
            n_max,
            l_max,
            entries,
        };
        cat.validate()?;
        Ok(cat)
    }

    /// Builds a catalog whose state `k` sits at index `bit_reverse(k)`.
    fn bit_reversed(n_max: u32, l_max: u32, states: &[BlfqQuantumNumbers]) -> Self {
        let width = states.len().trailing_zeros() as usize;
        let entries = states
            .iter()
            .enumerate()
            .map(|(k, &qn)| CatalogEntry {
                qn,
                index: reverse_bits(k, width),
            })
            .collect();
        BasisCatalog::new(n_max, l_max, entries).expect("bundled catalog is valid")
    }

    /// The four m_j = 0 states of (N_max, L_max) = (1, 1).
    pub fn builtin_1_1() -> Self {
        Self::bit_reversed(
            1,
            1,
            &[
                qn(0, 0, 0, 1, -1),
                qn(0, 0, 0, -1, 1),
                qn(0, 0, 1, 1, -1),
                qn(0, 0, 1, -1, 1),
            ],
        )
    }

    /// The sixteen m_j = 0 states used at (N_max, L_max) = (4, 1).
    pub fn builtin_4_1() -> Self {
        let mut states = Vec::with_capacity(16);
        for n in 0..2 {
            states.extend_from_slice(&[
                qn(n, 0, 0, 1, -1),
                qn(n, 0, 0, -1, 1),
                qn(n, 0, 1, 1, -1),
                qn(n, 0, 1, -1, 1),
                qn(n, 1, 0, -1, -1),
                qn(n, 1, 1, -1, -1),
                qn(n, -1, 0, 1, 1),
                qn(n, -1, 1, 1, 1),
            ]);
        }
        Self::bit_reversed(4, 1, &states)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Catalog("empty catalog".into()));
        }
        let mj = self.entries[0].qn.two_mj();
        let mut seen = vec![false; self.entries.len()];
        for (k, e) in self.entries.iter().enumerate() {
            let q = e.qn;
            if q.two_s.abs() != 1 || q.two_sbar.abs() != 1 {
                return Err(Error::Catalog(format!("state {k}: spins must be +-1/2")));
            }
            if !q.within(self.n_max, self.l_max) {
                return Err(Error::Catalog(format!(
                    "state {k} violates the ({}, {}) truncation",
                    self.n_max, self.l_max
                )));
            }
            if q.two_mj() != mj {
                return Err(Error::Catalog(format!(
                    "state {k}: m_j differs from state 0"
                )));
            }
            match seen.get_mut(e.index) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(Error::Catalog(format!(
                        "state {k}: index {} is out of range or repeated",
                        e.index
                    )))
                }
            }
            if self.entries[..k].iter().any(|o| o.qn == q) {
                return Err(Error::Catalog(format!("state {k} is repeated")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry(&self, k: usize) -> Result<&CatalogEntry> {
        self.entries.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.entries.len(),
        })
    }

    /// State stored at a matrix / basis index.
    pub fn entry_at_index(&self, index: usize) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    /// Qubits needed by the compact encoding.
    pub fn compact_qubits(&self) -> usize {
        self.padded_dim().trailing_zeros().max(1) as usize
    }

    pub fn padded_dim(&self) -> usize {
        self.entries.len().next_power_of_two().max(2)
    }

    /// Compact register label of state `k`, highest qubit first.
    pub fn compact_bitstring(&self, k: usize) -> Result<String> {
        let e = self.entry(k)?;
        Ok(format!(
            "{:0width$b}",
            e.index,
            width = self.compact_qubits()
        ))
    }

    /// Direct (one-hot) register label of state `k`, highest qubit first.
    pub fn direct_bitstring(&self, k: usize) -> Result<String> {
        let e = self.entry(k)?;
        let n = self.len();
        Ok((0..n)
            .rev()
            .map(|q| if q == e.index { '1' } else { '0' })
            .collect())
    }

    /// Catalog file: one `index n m l 2s 2sbar bitstring` line per state.
    pub fn to_text(&self) -> String {
        let mut out = format!("# truncation {} {}\n", self.n_max, self.l_max);
        for k in 0..self.len() {
            let e = self.entries[k];
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                e.index,
                e.qn.n,
                e.qn.m,
                e.qn.l,
                e.qn.two_s,
                e.qn.two_sbar,
                self.compact_bitstring(k).unwrap_or_default()
            );
        }
        out
    }

    /// Parses a catalog file. The truncation comes from a
    /// `# truncation N_max L_max` line when present, otherwise it is the
    /// smallest one containing every state.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut trunc: Option<(u32, u32)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(rest) = line.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.first() == Some(&"truncation") {
                    let parse = |s: Option<&&str>| s.and_then(|v| v.parse::<u32>().ok());
                    match (parse(f.get(1)), parse(f.get(2))) {
                        (Some(a), Some(b)) => trunc = Some((a, b)),
                        _ => return Err(err("malformed truncation line".into())),
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(err(format!("expected 7 fields, found {}", f.len())));
            }
            let int = |s: &str| {
                s.parse::<i64>()
                    .map_err(|_| err(format!("bad integer \"{s}\"")))
            };
            let (index, n, m, l, s, sb) = (
                int(f[0])?,
                int(f[1])?,
                int(f[2])?,
                int(f[3])?,
                int(f[4])?,
                int(f[5])?,
            );
            if index < 0 || n < 0 || l < 0 {
                return Err(err("negative index, n or l".into()));
            }
            let bits = usize::from_str_radix(f[6], 2)
                .map_err(|_| err(format!("bad bitstring \"{}\"", f[6])))?;
            if bits != index as usize {
                return Err(err(format!(
                    "bitstring {} does not encode index {index}",
                    f[6]
                )));
            }
            entries.push(CatalogEntry {
                qn: qn(n as u32, m as i32, l as u32, s as i32, sb as i32),
                index: index as usize,
            });
        }
        let (n_max, l_max) = trunc.unwrap_or_else(|| {
            let n_max = entries
                .iter()
                .map(|e| 2 * e.qn.n + e.qn.m.unsigned_abs() + 1)
                .max()
                .unwrap_or(1);
            let l_max = entries.iter().map(|e| e.qn.l).max().unwrap_or(0);
            (n_max, l_max)
        });
        BasisCatalog::new(n_max, l_max, entries)
    }
}

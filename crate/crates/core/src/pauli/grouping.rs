use num_complex::Complex64;

use super::operator::PauliOperator;
use super::string::{Pauli, PauliString};

/// Terms that can be estimated from one measurement setting.
#[derive(Clone, Debug, PartialEq)]
pub struct TermGroup {
    pub terms: Vec<(PauliString, Complex64)>,
}

impl TermGroup {
    /// Per-qubit measurement basis: the non-identity factor shared by the
    /// group on each qubit, or `I` if every term is idle there.
    pub fn basis(&self, n_qubits: usize) -> Vec<Pauli> {
        (0..n_qubits)
            .map(|q| {
                self.terms
                    .iter()
                    .map(|(s, _)| s.get(q))
                    .find(|p| *p != Pauli::I)
                    .unwrap_or(Pauli::I)
            })
            .collect()
    }
}

/// Greedy first-fit partition into qubit-wise commuting groups.
///
/// Terms are visited by descending `|coefficient|`, ties broken by string
/// order, and each lands in the first group it commutes with.
pub fn group_commuting(op: &PauliOperator) -> Vec<TermGroup> {
    let mut terms: Vec<(PauliString, Complex64)> = op.terms().map(|(s, c)| (*s, *c)).collect();
    terms.sort_by(|a, b| {
        b.1.norm()
            .total_cmp(&a.1.norm())
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut groups: Vec<TermGroup> = Vec::new();
    for (s, c) in terms {
        let slot = groups.iter_mut().find(|g| {
            g.terms
                .iter()
                .all(|(t, _)| t.commutes_qubitwise(&s).unwrap_or(false))
        });
        match slot {
            Some(g) => g.terms.push((s, c)),
            None => groups.push(TermGroup {
                terms: vec![(s, c)],
            }),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_diagonal_and_x_on_top_share_a_group() {
        let op = PauliOperator::from_real_terms(&[
            ("II", 1134731.5),
            ("IZ", -566244.5),
            ("XI", 4830.5),
            ("XZ", 20597.5),
        ])
        .unwrap();
        let g = group_commuting(&op);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].basis(2), vec![Pauli::Z, Pauli::X]);
    }

    #[test]
    fn x_and_z_split() {
        let op = PauliOperator::from_real_terms(&[("X", 1.0), ("Z", 1.0)]).unwrap();
        assert_eq!(group_commuting(&op).len(), 2);
    }

    #[test]
    fn larger_coefficients_seed_groups() {
        let op = PauliOperator::from_real_terms(&[("X", 0.1), ("Z", 5.0), ("I", 1.0)]).unwrap();
        let g = group_commuting(&op);
        assert_eq!(g[0].terms[0].0.to_string(), "Z");
        assert_eq!(g[0].terms[1].0.to_string(), "I");
        assert_eq!(g[1].terms[0].0.to_string(), "X");
    }
}

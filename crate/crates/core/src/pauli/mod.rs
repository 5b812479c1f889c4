//! Pauli strings, weighted Pauli sums and the two fermion/qubit encodings.

mod encode;
mod grouping;
mod operator;
mod string;

pub use encode::{
    compact_encode, compact_encode_real, jw_encode_one_body, jw_lower, jw_raise, LadderKind,
    LadderOperatorExpr,
};
pub use grouping::{group_commuting, TermGroup};
pub use operator::{PauliOperator, DEFAULT_MATRIX_QUBIT_CAP};
pub use string::{Pauli, PauliString, Phase};

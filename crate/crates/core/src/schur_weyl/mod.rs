//! Symmetric-group machinery on tensor powers and exact twirls over the
//! unitary and Clifford groups.

mod partition;
mod permutation;
mod projectors;
mod twirl;

pub use partition::{partitions, CharacterTable, Partition, MAX_DEGREE};
pub use permutation::{perm_operator, trace_with_permutation, Permutation, SymmetricGroup, TENSOR_MAX_DIM};
pub use projectors::{
    central_idempotent, flip_from_paulis, q_projector, q_sandwich_norm, young_projector, young_projector_with, IrrepData,
    FLIP_MAX_QUBITS, Q_MAX_QUBITS,
};
pub use twirl::{twirl_clifford, twirl_monte_carlo, twirl_unitary, TwirlEnsemble, TwirlEstimate};

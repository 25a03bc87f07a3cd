//! Measuring, storing and compressing quantum evolutions.
//!
//! The crate covers orthogonal unitary operator bases and the two-time
//! measurement that collapses a unitary onto one basis element, CP maps in
//! Kraus, Choi and Stinespring form, storage and probabilistic retrieval of
//! realized evolutions, super-dense coding of unitaries, and the operator
//! Schmidt decomposition of bipartite interactions.
//!
//! Matrices are `nalgebra` `DMatrix<Complex64>`. Tensor products put the
//! first factor in the most significant position, and `vec` is row-major,
//! so `(M ⊗ I)|ψ⁺⟩ = vec(M)/√d`.

pub mod cp_map;
pub mod error;
pub mod evolution_measurement;
pub mod evolution_store;
pub mod interaction_entanglement;
pub mod io;
pub mod linalg;
pub mod operator_basis;
pub mod protocols;
pub mod random;

pub use cp_map::{
    apply, canonical_kraus, choi, entropy, equivalent, kraus_from_ancilla_basis, kraus_rotation, stinespring,
    CanonicalKraus, ChoiState, KrausMap, StinespringDilation,
};
pub use error::{Error, Result};
pub use evolution_measurement::{
    measure_which_unitary, measure_which_unitary_choi, measure_which_unitary_qudit, observable_commutator_norm,
    temporal_eigenvalue, which_unitary_distribution, ObservableFamily, OutcomeDistribution, PureState,
    TwoTimeObservable, WhichUnitaryResult,
};
pub use evolution_store::{
    compression_rate, probabilistic_retrieve, store, typical_compress, verify_sequence, EvolutionSequence,
    RetrievalOutcome, StoredEvolution,
};
pub use interaction_entanglement::{
    bipartite_expand, concentrate, concentration_yield, induced_local_map, interaction_entanglement, operator_schmidt,
    BipartiteUnitary, ConcentrationMode, ConcentrationRecord, OperatorSchmidt,
};
pub use linalg::{CMatrix, CVector, C64};
pub use operator_basis::{
    clock_shift, expand, pauli_basis, reconstruct, rotate_basis, weyl_basis, BasisRotation, ExpansionCoefficients,
    OperatorBasis, UnitaryOperator,
};
pub use protocols::{bell_basis, eavesdropper_marginal, superdense_send, BellBasis, ChannelTranscript};

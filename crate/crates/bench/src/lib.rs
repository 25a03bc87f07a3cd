//! Seeded inputs shared by the benchmarks.

use qevo::cp_map::KrausMap;
use qevo::interaction_entanglement::BipartiteUnitary;
use qevo::random::{haar_unitary, random_kraus_operators, seeded};
use qevo::{PureState, UnitaryOperator};

pub fn unitary(d: usize, seed: u64) -> UnitaryOperator {
    UnitaryOperator::new(haar_unitary(d, &mut seeded(seed))).expect("Haar sample is unitary")
}

pub fn state(d: usize, seed: u64) -> PureState {
    PureState::random(d, seed)
}

pub fn map(d: usize, k: usize, seed: u64) -> KrausMap {
    KrausMap::new(random_kraus_operators(d, k, &mut seeded(seed))).expect("random Kraus set is trace preserving")
}

pub fn bipartite(d_a: usize, d_b: usize, seed: u64) -> BipartiteUnitary {
    BipartiteUnitary::new(haar_unitary(d_a * d_b, &mut seeded(seed)), d_a, d_b).expect("Haar sample is unitary")
}

//! Super-dense coding of unitaries.
//!
//! Alice applies `u` to her half of `|ψ⁺⟩` and hands the qudit to Bob, who
//! measures both halves in the Bell family `(B_α ⊗ I)|ψ⁺⟩` of an orthogonal
//! unitary basis. Bob sees `|C_α|²`; anyone holding only the transmitted
//! qudit sees `I/d` whatever `u` was.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution_measurement::OutcomeDistribution;
use crate::linalg::{identity, kron, max_abs_diff, outer, partial_trace_second, psi_plus, CMatrix, CVector, C64};
use crate::operator_basis::{expand, OperatorBasis, UnitaryOperator};
use crate::random::{haar_unitary, seeded};

/// Maximally entangled states `(B_α ⊗ I)|ψ⁺⟩`, one per basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct BellBasis {
    dim: usize,
    vectors: Vec<CVector>,
    labels: Vec<String>,
}

impl BellBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Largest entry of `|G − I|` for the Gram matrix of the vectors.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((a.dotc(b) - C64::from(target)).norm());
            }
        }
        dev
    }

    /// Outcome probabilities `|⟨Φ_α|state⟩|²`.
    pub fn measure(&self, state: &CVector) -> Result<Vec<f64>> {
        if state.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim * self.dim, found: state.len() });
        }
        Ok(self.vectors.iter().map(|v| v.dotc(state).norm_sqr()).collect())
    }
}

/// Distance of the first-factor marginal of a `d ⊗ d` state from `I/d`.
fn marginal_deviation(v: &CVector, d: usize) -> f64 {
    let rho = partial_trace_second(&outer(v, v), d, d);
    max_abs_diff(&rho, &(identity(d) / C64::from(d as f64)))
}

pub fn bell_basis(basis: &OperatorBasis) -> Result<BellBasis> {
    let d = basis.dim();
    let plus = psi_plus(d);
    let id = identity(d);
    let vectors: Vec<CVector> = basis.elements().iter().map(|b| kron(b, &id) * &plus).collect();
    let worst = vectors.iter().map(|v| marginal_deviation(v, d)).fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(Error::NotMaximallyEntangled { deviation: worst });
    }
    let bell = BellBasis { dim: d, vectors, labels: basis.labels().to_vec() };
    let dev = bell.orthonormality_deviation();
    if dev > 1e-10 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    Ok(bell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
    Channel,
}

/// Who holds each half of the pair after one protocol step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptStage {
    pub action: String,
    /// Holder of Alice's original half (the transmitted qudit).
    pub first_half: Party,
    /// Holder of the half that stays with Bob.
    pub second_half: Party,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelTranscript {
    pub dim: usize,
    pub coefficients: Vec<C64>,
    pub bob: OutcomeDistribution,
    /// Marginal of the transmitted qudit, row-major.
    pub eavesdropper_marginal: Vec<C64>,
    /// Max entry of `|ρ_E − I/d|`.
    pub eavesdropper_distance: f64,
    pub stages: Vec<TranscriptStage>,
    /// Set when `u` is a basis element up to phase: the decoded symbol.
    pub classical_symbol: Option<usize>,
    /// `log₂(d²)` in the classical case.
    pub bits_per_qudit: Option<f64>,
    /// Shared maximally entangled pairs consumed.
    pub ebits: u32,
}

fn stages() -> Vec<TranscriptStage> {
    let stage =
        |action: &str, first_half, second_half| TranscriptStage { action: action.to_string(), first_half, second_half };
    vec![
        stage("share maximally entangled pair", Party::Alice, Party::Bob),
        stage("alice applies unitary to her half", Party::Alice, Party::Bob),
        stage("transmit first half", Party::Channel, Party::Bob),
        stage("bob measures in Bell basis", Party::Bob, Party::Bob),
    ]
}

fn encoded_state(u: &UnitaryOperator) -> CVector {
    let d = u.dim();
    kron(u.matrix(), &identity(d)) * psi_plus(d)
}

/// Marginal of Alice's half after encoding; the eavesdropper holds it in transit.
pub fn eavesdropper_marginal(u: &UnitaryOperator, basis: &OperatorBasis) -> Result<CMatrix> {
    if u.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: u.dim() });
    }
    let d = u.dim();
    let psi = encoded_state(u);
    Ok(partial_trace_second(&outer(&psi, &psi), d, d))
}

/// Classical capacity of one transmitted qudit with one shared pair.
pub fn superdense_bits(d: usize) -> f64 {
    ((d * d) as f64).log2()
}

pub fn superdense_send(u: &UnitaryOperator, basis: &OperatorBasis, shots: u64, seed: u64) -> Result<ChannelTranscript> {
    if u.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: u.dim() });
    }
    let d = u.dim();
    let bell = bell_basis(basis)?;
    let state = encoded_state(u);
    let probabilities = bell.measure(&state)?;
    let mut bob = OutcomeDistribution::exact(bell.labels().to_vec(), probabilities);
    if shots > 0 {
        bob.sample(shots, seed);
    }
    let marginal = partial_trace_second(&outer(&state, &state), d, d);
    let eavesdropper_distance = max_abs_diff(&marginal, &(identity(d) / C64::from(d as f64)));
    let classical_symbol = {
        let k = bob.argmax();
        ((bob.probabilities[k] - 1.0).abs() < 1e-10).then_some(k)
    };
    Ok(ChannelTranscript {
        dim: d,
        coefficients: expand(u.matrix(), basis)?.coeffs,
        eavesdropper_marginal: marginal.transpose().iter().copied().collect(),
        eavesdropper_distance,
        stages: stages(),
        bits_per_qudit: classical_symbol.map(|_| superdense_bits(d)),
        classical_symbol,
        bob,
        ebits: 1,
    })
}

/// Alice forwards `draws` Haar-random unitaries she never sees; draw `i`
/// comes from `ensemble_seed`, and its shots use `seed + i`.
pub fn blind_ensemble_send(
    basis: &OperatorBasis,
    draws: usize,
    ensemble_seed: u64,
    shots: u64,
    seed: u64,
) -> Result<Vec<(UnitaryOperator, ChannelTranscript)>> {
    let mut rng = seeded(ensemble_seed);
    (0..draws)
        .map(|i| {
            let u = UnitaryOperator::new(haar_unitary(basis.dim(), &mut rng))?;
            let t = superdense_send(&u, basis, shots, seed.wrapping_add(i as u64))?;
            Ok((u, t))
        })
        .collect()
}

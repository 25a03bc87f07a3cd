//! Storing realized evolutions as states, compressing the record, verifying
//! a claimed record against a dilation, and probabilistic retrieval of a
//! stored operator onto an unknown state.
//!
//! A Kraus operator `M` is stored as the normalized Choi-space vector
//! `(M ⊗ I)|ψ⁺⟩ ∝ vec(M)`, so `⟨stored(A)|stored(B)⟩ = tr(A†B)/d` up to the
//! normalizations. The canonical operators of a map store to orthogonal
//! states, so a record of `n` uses is diagonal in the canonical strings and
//! compresses like a classical source with distribution `p_μ`.

use serde::Serialize;

use crate::cp_map::{canonical_kraus, entropy, kraus_from_ancilla_basis, KrausMap, StinespringDilation};
use crate::error::{Error, Result};
use crate::evolution_measurement::PureState;
use crate::linalg::{
    self, fourier_matrix, hs_inner, identity, max_abs_diff, psi_plus, svd_desc, vec_row_major, CMatrix, CVector, C64,
    SUPPORT_TRIM, ZERO,
};
use crate::operator_basis::{pauli_basis_identity, weyl_basis};
use crate::random::{sample_index, stream_rng};

/// Largest block length for exact typical-set enumeration.
pub const MAX_BLOCK: usize = 20;

/// Which operator of `map` acted at each of `n` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSequence {
    map: KrausMap,
    indices: Vec<usize>,
}

impl EvolutionSequence {
    pub fn new(map: KrausMap, indices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= map.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: map.len() });
        }
        Ok(Self { map, indices })
    }

    pub fn map(&self) -> &KrausMap {
        &self.map
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// One unit vector in the `d²`-dimensional Choi space per step.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredEvolution {
    pub states: Vec<CVector>,
}

/// Normalized `(M ⊗ I)|ψ⁺⟩`.
pub fn storage_state(op: &CMatrix) -> Result<CVector> {
    let v = vec_row_major(op);
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(Error::OutsideSupport("operator stores to the zero vector".into()));
    }
    Ok(v / C64::from(norm))
}

pub fn store(sequence: &EvolutionSequence) -> Result<StoredEvolution> {
    let states =
        sequence.indices.iter().map(|&i| storage_state(&sequence.map.operators()[i])).collect::<Result<Vec<_>>>()?;
    Ok(StoredEvolution { states })
}

/// Compression rate in bits per use: the entropy of the map.
pub fn compression_rate(map: &KrausMap) -> f64 {
    entropy(map)
}

/// Result of keeping the δ-typical canonical strings of length `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypicalCompression {
    pub n: usize,
    pub delta: f64,
    pub entropy: f64,
    /// Number of typical strings.
    pub kept_dim: u128,
    pub typical_mass: f64,
    /// Probability mass outside the kept subspace.
    pub infidelity_bound: f64,
    /// `log₂(kept_dim)/n`, absent when nothing is typical.
    pub rate: Option<f64>,
    /// `δ′` with `rate ∈ [S − δ′, S + δ′]`: `δ + log₂(1/(1 − tail))/n`.
    pub rate_slack: f64,
}

/// Smallest kept subspace reaching a fixed tail mass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedErrorCompression {
    pub n: usize,
    pub max_tail: f64,
    pub entropy: f64,
    pub kept_dim: u128,
    pub tail_mass: f64,
    pub rate: f64,
}

/// A composition of `n` into per-symbol counts, with its string count and
/// per-string log-probability.
struct TypeClass {
    count: u128,
    log2_prob: f64,
}

fn type_classes(p: &[f64], n: usize) -> Vec<TypeClass> {
    fn factorial(k: usize) -> u128 {
        (1..=k as u128).product()
    }
    fn recurse(p: &[f64], left: usize, sym: usize, counts: &mut Vec<usize>, out: &mut Vec<TypeClass>, n_fact: u128) {
        if sym + 1 == p.len() {
            counts.push(left);
            let denom: u128 = counts.iter().map(|&c| factorial(c)).product();
            let log2_prob = counts.iter().zip(p).map(|(&c, &q)| c as f64 * q.log2()).sum();
            out.push(TypeClass { count: n_fact / denom, log2_prob });
            counts.pop();
            return;
        }
        for c in 0..=left {
            counts.push(c);
            recurse(p, left - c, sym + 1, counts, out, n_fact);
            counts.pop();
        }
    }
    let mut out = Vec::new();
    recurse(p, n, 0, &mut Vec::with_capacity(p.len()), &mut out, factorial(n));
    out
}

fn check_block(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BLOCK {
        return Err(Error::SizeOutOfRange { n, max: MAX_BLOCK, mode: "exact typical-set enumeration" });
    }
    Ok(())
}

/// δ-typical compression of the record of `n` uses of `map`.
pub fn typical_compress(map: &KrausMap, n: usize, delta: f64) -> Result<TypicalCompression> {
    check_block(n)?;
    let p = canonical_kraus(map).probabilities;
    Ok(typical_compress_probabilities(&p, n, delta))
}

/// Same as [`typical_compress`] for an explicit distribution.
pub fn typical_compress_probabilities(p: &[f64], n: usize, delta: f64) -> TypicalCompression {
    let s = linalg::shannon_entropy_bits(p);
    let mut kept: u128 = 0;
    let mut masses = Vec::new();
    for class in type_classes(p, n) {
        if (-class.log2_prob / n as f64 - s).abs() <= delta + 1e-12 {
            kept += class.count;
            masses.push(class.count as f64 * class.log2_prob.exp2());
        }
    }
    let typical_mass = linalg::compensated_sum(masses).min(1.0);
    let tail = (1.0 - typical_mass).max(0.0);
    let rate = (kept > 0).then(|| (kept as f64).log2() / n as f64);
    let rate_slack = if typical_mass > 0.0 { delta - typical_mass.log2() / n as f64 } else { f64::INFINITY };
    TypicalCompression { n, delta, entropy: s, kept_dim: kept, typical_mass, infidelity_bound: tail, rate, rate_slack }
}

/// Keeps the most probable canonical strings until the discarded mass is at
/// most `max_tail`.
pub fn compress_at_tail_mass(map: &KrausMap, n: usize, max_tail: f64) -> Result<FixedErrorCompression> {
    check_block(n)?;
    let p = canonical_kraus(map).probabilities;
    Ok(compress_probabilities_at_tail_mass(&p, n, max_tail))
}

pub fn compress_probabilities_at_tail_mass(p: &[f64], n: usize, max_tail: f64) -> FixedErrorCompression {
    let mut classes = type_classes(p, n);
    classes.sort_by(|a, b| b.log2_prob.total_cmp(&a.log2_prob));
    let target = 1.0 - max_tail;
    let mut mass = 0.0;
    let mut kept: u128 = 0;
    for class in &classes {
        if mass >= target - 1e-15 {
            break;
        }
        let q = class.log2_prob.exp2();
        let needed = (((target - mass) / q) - 1e-9).ceil().max(1.0) as u128;
        let take = needed.min(class.count);
        kept += take;
        mass += take as f64 * q;
    }
    let kept = kept.max(1);
    FixedErrorCompression {
        n,
        max_tail,
        entropy: linalg::shannon_entropy_bits(p),
        kept_dim: kept,
        tail_mass: (1.0 - mass).max(0.0),
        rate: (kept as f64).log2() / n as f64,
    }
}

/// Outcome of replaying a claimed record through a dilation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub verified: bool,
    /// Ancilla outcome observed at each step.
    pub record: Vec<usize>,
    /// Steps where the record and the claim differ.
    pub mismatches: Vec<usize>,
    /// Born probability of each ancilla outcome (the same at every step).
    pub outcome_probabilities: Vec<f64>,
    /// Probability that an honest replay reproduces the claim exactly.
    pub acceptance_probability: f64,
}

/// Per step, the dilation acts on half of `|ψ⁺⟩` with the ancilla in
/// `|0_C⟩`, and the ancilla is measured in `ancilla_basis`. Outcome `i` means
/// `M_i` of the induced representation acted; the claim is verified when the
/// record matches it at every step.
pub fn verify_sequence(
    dil: &StinespringDilation,
    ancilla_basis: &[CVector],
    claimed: &EvolutionSequence,
    seed: u64,
) -> Result<VerificationReport> {
    let induced = kraus_from_ancilla_basis(dil, ancilla_basis)?;
    if induced.len() != claimed.map.len() || induced.dim() != claimed.map.dim() {
        return Err(Error::RepresentationMismatch(format!(
            "ancilla basis induces {} operators on dimension {}, claim has {} on {}",
            induced.len(),
            induced.dim(),
            claimed.map.len(),
            claimed.map.dim()
        )));
    }
    for (k, (a, b)) in induced.operators().iter().zip(claimed.map.operators()).enumerate() {
        if max_abs_diff(a, b) > 1e-9 {
            return Err(Error::RepresentationMismatch(format!("operator {k} differs from the induced one")));
        }
    }

    let probabilities = dilation_outcome_probabilities(dil, ancilla_basis);
    let mut record = Vec::with_capacity(claimed.len());
    let mut mismatches = Vec::new();
    for (step, &claim) in claimed.indices.iter().enumerate() {
        let outcome = sample_index(&probabilities, &mut stream_rng(seed, step as u64));
        if outcome != claim {
            mismatches.push(step);
        }
        record.push(outcome);
    }
    let acceptance_probability = claimed.indices.iter().map(|&i| probabilities[i]).product();
    Ok(VerificationReport {
        verified: mismatches.is_empty(),
        record,
        mismatches,
        outcome_probabilities: probabilities,
        acceptance_probability,
    })
}

/// Ancilla outcome probabilities from the state vector of
/// system ⊗ ancilla ⊗ reference after the dilation acts on `|ψ⁺⟩ ⊗ |0_C⟩`.
fn dilation_outcome_probabilities(dil: &StinespringDilation, ancilla_basis: &[CVector]) -> Vec<f64> {
    let (d, a) = (dil.system_dim(), dil.ancilla_dim());
    // input: Σ_j |j⟩_s |0⟩_a |j⟩_r / √d, laid out as a (d·a) × d matrix
    let amp = C64::from(1.0 / (d as f64).sqrt());
    let mut input = CMatrix::zeros(d * a, d);
    for j in 0..d {
        input[(j * a, j)] = amp;
    }
    let output = dil.unitary() * input;
    ancilla_basis
        .iter()
        .map(|b| {
            let mut p = 0.0;
            for s in 0..d {
                for r in 0..d {
                    let amp = (0..a).fold(ZERO, |acc, c| acc + b[c].conj() * output[(s * a + c, r)]);
                    p += amp.norm_sqr();
                }
            }
            p
        })
        .collect()
}

/// Operator basis used by the retrieval unitary `V = Σ_μ P_μ ⊗ Û_μ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalBasisKind {
    /// Canonical operators of the map, all unitary up to normalization.
    Canonical,
    /// Pauli/Weyl elements spanning the same support (degenerate canonical sets).
    StandardUnitary,
    /// Non-unitary canonical operators, embedded as a contraction with a flag qubit.
    DilatedCanonical,
}

/// Pre-measurement state of the retrieval circuit.
#[derive(Clone, Debug)]
pub struct RetrievalSetup {
    kind: RetrievalBasisKind,
    support: usize,
    system_dim: usize,
    /// `(flag, storage outcome)` → probability and unnormalized system state.
    branches: Vec<(bool, usize, f64, CVector)>,
    /// Herald probability computed from the circuit.
    success_probability: f64,
    /// `‖M ψ‖² / (D · w · s²)`, computed from the expansion.
    predicted_success: f64,
    target: PureState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalOutcome {
    pub heralded_success: bool,
    /// Fourier outcome on the storage register (0 is the herald).
    pub storage_outcome: usize,
    /// Set when the contraction dilation failed independently of the storage outcome.
    pub flag_raised: bool,
    /// System state after the measurement; equals `M|ψ⟩/‖M|ψ⟩‖` on success.
    pub post_state: PureState,
}

impl RetrievalOutcome {
    pub fn output(&self) -> Option<&PureState> {
        self.heralded_success.then_some(&self.post_state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalStatistics {
    pub trials: u64,
    pub heralds: u64,
    pub exact_success: f64,
    pub empirical_success: f64,
    /// `|empirical − exact| / √(p(1−p)/trials)`.
    pub z_score: f64,
    /// Smallest conditioned fidelity seen over heralded trials.
    pub min_fidelity: f64,
    pub support: usize,
    pub basis: RetrievalBasisKind,
}

impl RetrievalSetup {
    /// Builds the storage state of `op`, the controlled unitary and the joint
    /// state before the storage register is read out.
    pub fn prepare(op: &CMatrix, map: &KrausMap, psi: &PureState) -> Result<Self> {
        let d = map.dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
        if psi.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
        }
        let (kind, ops) = retrieval_operators(map);
        let support = ops.len();

        // storage coordinates ⟨ψ̂_μ|stored⟩ with ψ̂_μ = vec(Û_μ)/√d
        let stored = storage_state(op)?;
        let coords = CVector::from_iterator(
            support,
            ops.iter().map(|u| vec_row_major(u).dotc(&stored) / C64::from((d as f64).sqrt())),
        );
        let captured = coords.norm_squared();
        if (captured - 1.0).abs() > 1e-9 {
            return Err(Error::OutsideSupport(format!("only {captured:.6} of the stored state lies in the support")));
        }

        let scale = if kind == RetrievalBasisKind::DilatedCanonical {
            ops.iter().map(|u| svd_desc(u).1[0]).fold(1.0, f64::max)
        } else {
            1.0
        };
        // K = Σ_μ |μ⟩⟨μ| ⊗ Û_μ / s on storage ⊗ system
        let n = support * d;
        let mut k = CMatrix::zeros(n, n);
        for (mu, u) in ops.iter().enumerate() {
            k.view_mut((mu * d, mu * d), (d, d)).copy_from(&(u / C64::from(scale)));
        }
        let input = linalg::kron_vec(&coords, psi.amplitudes());

        let fourier = fourier_matrix(support);
        let mut branches = Vec::with_capacity(2 * support);
        let mut push_branches = |flag: bool, joint: &CVector| {
            for m in 0..support {
                let mut sys = CVector::zeros(d);
                for mu in 0..support {
                    let w = fourier[(mu, m)].conj();
                    sys += joint.rows(mu * d, d) * w;
                }
                let p = sys.norm_squared();
                branches.push((flag, m, p, sys));
            }
        };
        if kind == RetrievalBasisKind::DilatedCanonical {
            // [[K, √(I−KK†)], [√(I−K†K), −K†]] with the flag most significant;
            // the flag starts in |0⟩, so only the first block column acts.
            let (w, sv, v) = svd_desc(&k);
            let defect = CMatrix::from_diagonal(&CVector::from_iterator(
                n,
                sv.iter().map(|&x| C64::from((1.0 - x * x).max(0.0).sqrt())),
            ));
            let full = {
                let mut u = CMatrix::zeros(2 * n, 2 * n);
                u.view_mut((0, 0), (n, n)).copy_from(&k);
                u.view_mut((0, n), (n, n)).copy_from(&(&w * &defect * w.adjoint()));
                u.view_mut((n, 0), (n, n)).copy_from(&(&v * &defect * v.adjoint()));
                u.view_mut((n, n), (n, n)).copy_from(&(-k.adjoint()));
                u
            };
            debug_assert!(linalg::is_unitary(&full, 1e-8));
            let mut padded = CVector::zeros(2 * n);
            padded.rows_mut(0, n).copy_from(&input);
            let joint = full * padded;
            push_branches(false, &joint.rows(0, n).into_owned());
            push_branches(true, &joint.rows(n, n).into_owned());
        } else {
            push_branches(false, &(&k * input));
        }

        let success_probability = branches[0].2;
        let w = hs_inner(op, op).re / d as f64;
        let m_psi = op * psi.amplitudes();
        let predicted_success = m_psi.norm_squared() / (support as f64 * w * scale * scale);
        let target = PureState::normalized(m_psi).unwrap_or_else(|_| psi.clone());
        Ok(Self { kind, support, system_dim: d, branches, success_probability, predicted_success, target })
    }

    pub fn support(&self) -> usize {
        self.support
    }

    pub fn basis_kind(&self) -> &RetrievalBasisKind {
        &self.kind
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn predicted_success(&self) -> f64 {
        self.predicted_success
    }

    /// Normalized `M|ψ⟩`.
    pub fn target(&self) -> &PureState {
        &self.target
    }

    /// Fidelity of the heralded branch with the target (1 when it is never heralded).
    pub fn herald_fidelity(&self) -> f64 {
        match PureState::normalized(self.branches[0].3.clone()) {
            Ok(state) => state.fidelity(&self.target),
            Err(_) => 1.0,
        }
    }

    /// Sum of all branch probabilities.
    pub fn total_probability(&self) -> f64 {
        linalg::compensated_sum(self.branches.iter().map(|b| b.2))
    }

    /// Reads out storage (and flag) for one trial.
    pub fn sample(&self, seed: u64, trial: u64) -> RetrievalOutcome {
        let probabilities: Vec<f64> = self.branches.iter().map(|b| b.2).collect();
        let k = sample_index(&probabilities, &mut stream_rng(seed, trial));
        let (flag, m, _, ref state) = self.branches[k];
        let post_state =
            PureState::normalized(state.clone()).unwrap_or_else(|_| PureState::basis_state(self.system_dim, 0));
        RetrievalOutcome { heralded_success: !flag && m == 0, storage_outcome: m, flag_raised: flag, post_state }
    }

    pub fn run_trials(&self, trials: u64, seed: u64) -> RetrievalStatistics {
        let mut heralds = 0u64;
        let mut min_fidelity = 1.0f64;
        for t in 0..trials {
            let outcome = self.sample(seed, t);
            if outcome.heralded_success {
                heralds += 1;
                min_fidelity = min_fidelity.min(outcome.post_state.fidelity(&self.target));
            }
        }
        let p = self.success_probability;
        let empirical = heralds as f64 / trials.max(1) as f64;
        let sigma = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
        let z_score = if sigma > 0.0 {
            (empirical - p).abs() / sigma
        } else if (empirical - p).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        RetrievalStatistics {
            trials,
            heralds,
            exact_success: p,
            empirical_success: empirical,
            z_score,
            min_fidelity,
            support: self.support,
            basis: self.kind.clone(),
        }
    }
}

/// Unit-normalized operator basis of the map's support for the retrieval
/// unitary. Prefers unitary operators so that `V` needs no flag qubit.
fn retrieval_operators(map: &KrausMap) -> (RetrievalBasisKind, Vec<CMatrix>) {
    let canonical = canonical_kraus(map);
    let normalized = canonical.normalized_operators();
    if normalized.iter().all(|u| linalg::is_unitary(u, 1e-9)) {
        return (RetrievalBasisKind::Canonical, normalized);
    }
    if let Some(ops) = standard_unitary_span(map.dim(), &normalized) {
        return (RetrievalBasisKind::StandardUnitary, ops);
    }
    (RetrievalBasisKind::DilatedCanonical, normalized)
}

/// Pauli (or Weyl) elements lying inside the span of `support_ops`, if they
/// are exactly as many as the support dimension.
fn standard_unitary_span(d: usize, support_ops: &[CMatrix]) -> Option<Vec<CMatrix>> {
    let basis = if d.is_power_of_two() {
        pauli_basis_identity(d.trailing_zeros() as usize).ok()?
    } else {
        weyl_basis(d, None).ok()?
    };
    let span: Vec<CVector> = support_ops.iter().map(|u| vec_row_major(u) / C64::from((d as f64).sqrt())).collect();
    let inside: Vec<CMatrix> = basis
        .elements()
        .iter()
        .filter(|b| {
            let v = vec_row_major(b) / C64::from((d as f64).sqrt());
            let captured: f64 = span.iter().map(|s| s.dotc(&v).norm_sqr()).sum();
            (captured - 1.0).abs() < 1e-9
        })
        .cloned()
        .collect();
    (inside.len() == support_ops.len()).then_some(inside)
}

/// Retrieves operator `op_index` of `map` onto `psi` in one heralded attempt.
pub fn probabilistic_retrieve(op_index: usize, map: &KrausMap, psi: &PureState, seed: u64) -> Result<RetrievalOutcome> {
    let op = map.operators().get(op_index).ok_or(Error::IndexOutOfRange { index: op_index, len: map.len() })?;
    Ok(RetrievalSetup::prepare(op, map, psi)?.sample(seed, 0))
}

/// Repeats the retrieval `trials` times under the per-trial stream rule.
pub fn retrieval_trials(
    op_index: usize,
    map: &KrausMap,
    psi: &PureState,
    trials: u64,
    seed: u64,
) -> Result<RetrievalStatistics> {
    let op = map.operators().get(op_index).ok_or(Error::IndexOutOfRange { index: op_index, len: map.len() })?;
    Ok(RetrievalSetup::prepare(op, map, psi)?.run_trials(trials, seed))
}

/// `⟨ψ⁺|(A† B ⊗ I)|ψ⁺⟩ = tr(A†B)/d`, the unnormalized storage overlap.
pub fn storage_overlap(a: &CMatrix, b: &CMatrix) -> C64 {
    let d = a.nrows();
    let plus = psi_plus(d);
    let id = identity(d);
    (linalg::kron(a, &id) * &plus).dotc(&(linalg::kron(b, &id) * &plus))
}

/// Support size of a canonical distribution after trimming.
pub fn support_size(map: &KrausMap) -> usize {
    canonical_kraus(map).probabilities.iter().filter(|&&p| p > SUPPORT_TRIM).count()
}

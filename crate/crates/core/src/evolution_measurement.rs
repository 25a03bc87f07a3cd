//! "Which unitary" measurements.
//!
//! The free evolution `U = Σ_α C_α B_α` is probed by coupling the system
//! twice to ancilla registers, once before (`t₁`) and once after (`t₂`) the
//! evolution. Each register measures one two-time observable
//! `A(t₂, t₁) = [U0 g U0†]_{t₂} [g]_{t₁}` whose eigenoperators are the basis
//! elements. The registers end up in Fourier vectors labelling the
//! eigenvalues, so reading them out in the Fourier basis selects one basis
//! element `α` with probability `|C_α|²` and leaves the system in `B_α|ψ⟩`.
//!
//! Couplings are impulsive controlled powers of the generator: at `t₁`
//! register value `a` applies `g^{†a}`, at `t₂` it applies `U0 g^a U0†`,
//! and registers are coupled at `t₂` in the reverse order of `t₁`. For
//! qubits `g = g†`, so this is `V = |0⟩⟨0| + |1⟩⟨1| σ` at both times.
//! Ancillas have no free Hamiltonian.
//!
//! Qubit systems (`d = 2^n`) use one Z-type and one X-type qubit register per
//! qubit with the Pauli basis; qudits use a pair of `d`-level registers with
//! the Weyl basis. Bases without product form (rotated bases) are measured
//! by [`measure_which_unitary_choi`] instead, a projective measurement on
//! `(U ⊗ I)|ψ⁺⟩`.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, hs_inner, identity, kron_all, matrix_power, psi_plus, CMatrix, CVector, C64, ZERO};
use crate::operator_basis::{clock_shift, expand, BasisFamily, OperatorBasis, UnitaryOperator};
use crate::random::{self, sample_counts};

/// Relative tolerance for the eigenoperator test.
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `v`; fails only for the zero vector.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: v / C64::from(norm) })
    }

    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = C64::from(1.0);
        Self { amplitudes: v }
    }

    pub fn random(d: usize, seed: u64) -> Self {
        Self { amplitudes: random::random_state_vector(d, &mut random::seeded(seed)) }
    }

    /// `(1/√d) Σ_j |jj⟩`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self { amplitudes: psi_plus(d) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|`, i.e. equality up to global phase when 1.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ObservableFamily {
    /// Generator `Z` (`σz` for a qubit).
    Z,
    /// Generator `X` (`σx` for a qubit).
    X,
}

/// `A(t₂, t₁) = [U0 g U0†]_{t₂} [g]_{t₁}` acting on operators as
/// `U ↦ (U0 g U0†) U g†`.
#[derive(Clone, Debug)]
pub struct TwoTimeObservable {
    family: ObservableFamily,
    site: Option<usize>,
    u0: UnitaryOperator,
    generator: CMatrix,
    order: usize,
}

impl TwoTimeObservable {
    /// Clock (`Z`) or shift (`X`) generator in the dimension of `u0`.
    pub fn new(family: ObservableFamily, u0: &UnitaryOperator) -> Result<Self> {
        let d = u0.dim();
        let (z, x) = clock_shift(d)?;
        let generator = match family {
            ObservableFamily::Z => z.into_matrix(),
            ObservableFamily::X => x.into_matrix(),
        };
        Ok(Self { family, site: None, u0: u0.clone(), generator, order: d })
    }

    /// `σz` or `σx` on a single qubit of an `n`-qubit system.
    pub fn local(family: ObservableFamily, qubit: usize, u0: &UnitaryOperator) -> Result<Self> {
        let d = u0.dim();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidDimension(format!("local qubit observable needs d = 2^n, got {d}")));
        }
        let qubits = d.trailing_zeros() as usize;
        if qubit >= qubits {
            return Err(Error::IndexOutOfRange { index: qubit, len: qubits });
        }
        let pauli = match family {
            ObservableFamily::Z => linalg::pauli(3),
            ObservableFamily::X => linalg::pauli(1),
        };
        let factors: Vec<CMatrix> = (0..qubits).map(|q| if q == qubit { pauli.clone() } else { identity(2) }).collect();
        Ok(Self { family, site: Some(qubit), u0: u0.clone(), generator: kron_all(&factors), order: 2 })
    }

    pub fn family(&self) -> ObservableFamily {
        self.family
    }

    pub fn site(&self) -> Option<usize> {
        self.site
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn u0(&self) -> &UnitaryOperator {
        &self.u0
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    /// Smallest `r` with `g^r = I`; also the ancilla register dimension.
    pub fn order(&self) -> usize {
        self.order
    }

    fn late_factor(&self) -> CMatrix {
        self.u0.matrix() * &self.generator * self.u0.matrix().adjoint()
    }

    /// `(U0 g U0†) · op · g†`.
    pub fn apply(&self, op: &CMatrix) -> CMatrix {
        self.late_factor() * op * self.generator.adjoint()
    }

    /// The map `U ↦ (U0 g U0†) U g†` as a `d² × d²` matrix on row-major
    /// vectorized operators.
    pub fn superoperator(&self) -> CMatrix {
        linalg::kron(&self.late_factor(), &self.generator.map(|v| v.conj()))
    }
}

/// `λ` with `(U0 g U0†) u g† = λ u`.
pub fn temporal_eigenvalue(obs: &TwoTimeObservable, u: &CMatrix) -> Result<C64> {
    if u.nrows() != obs.dim() || u.ncols() != obs.dim() {
        return Err(Error::DimensionMismatch { expected: obs.dim(), found: u.nrows() });
    }
    let image = obs.apply(u);
    let weight = hs_inner(u, u).re;
    if weight < 1e-300 {
        return Err(Error::NotAnEigenoperator);
    }
    let lambda = hs_inner(u, &image) / weight;
    let residual = linalg::frobenius_sq(&(image - u * lambda)).sqrt();
    if residual > EIGEN_TOL * weight.sqrt() {
        return Err(Error::NotAnEigenoperator);
    }
    Ok(lambda)
}

/// Index `k` with `λ = e^{2πik/r}`.
fn eigen_index(lambda: C64, order: usize) -> Result<usize> {
    let k = (lambda.arg() * order as f64 / (2.0 * PI)).round() as i64;
    let k = k.rem_euclid(order as i64) as usize;
    if (lambda - linalg::root_of_unity(order, k as i64)).norm() > 1e-8 {
        return Err(Error::NotAnEigenoperator);
    }
    Ok(k)
}

/// Frobenius norm of `[L₁, L₂]` for the operator-space maps of two
/// observables. Observables sharing `U0` commute (their eigenoperators are
/// one common basis); different reference unitaries generally do not.
pub fn observable_commutator_norm(a: &TwoTimeObservable, b: &TwoTimeObservable) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (la, lb) = (a.superoperator(), b.superoperator());
    Ok(linalg::frobenius_sq(&(&la * &lb - &lb * &la)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    pub shots: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OutcomeDistribution {
    pub fn exact(labels: Vec<String>, probabilities: Vec<f64>) -> Self {
        Self { labels, probabilities, counts: None, shots: 0, seed: None }
    }

    /// Adds `shots` samples drawn under the per-shot stream rule; returns
    /// the shot-by-shot outcome record.
    pub fn sample(&mut self, shots: u64, seed: u64) -> Vec<usize> {
        let (counts, record) = sample_counts(&self.probabilities, shots, seed);
        self.counts = Some(counts);
        self.shots = shots;
        self.seed = Some(seed);
        record
    }

    pub fn total(&self) -> f64 {
        linalg::compensated_sum(self.probabilities.iter().copied())
    }

    pub fn empirical(&self) -> Option<Vec<f64>> {
        let counts = self.counts.as_ref()?;
        let shots = self.shots.max(1) as f64;
        Some(counts.iter().map(|&c| c as f64 / shots).collect())
    }

    /// Largest `|empirical − p| / √(p(1−p)/shots)` over outcomes with
    /// `0 < p < 1`; outcomes with `p ∈ {0, 1}` must match exactly or the
    /// result is infinite.
    pub fn max_binomial_z(&self) -> Option<f64> {
        let emp = self.empirical()?;
        let shots = self.shots as f64;
        let mut worst = 0.0f64;
        for (&p, &f) in self.probabilities.iter().zip(&emp) {
            let var = p * (1.0 - p) / shots;
            if var < 1e-300 {
                if (f - p).abs() > 1e-12 {
                    return Some(f64::INFINITY);
                }
                continue;
            }
            worst = worst.max((f - p).abs() / var.sqrt());
        }
        Some(worst)
    }

    pub fn argmax(&self) -> usize {
        self.probabilities.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(k, _)| k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WhichUnitaryResult {
    /// Basis index of the selected element.
    pub outcome: usize,
    /// Post-measurement state of system (and any spectator factor).
    pub collapsed: PureState,
    pub exact_prob: f64,
}

/// Sampled run of the measurement circuit.
#[derive(Clone, Debug)]
pub struct WhichUnitaryRun {
    pub distribution: OutcomeDistribution,
    /// Outcome of every shot, in shot order.
    pub record: Vec<usize>,
    /// Post-measurement branch for each basis index with nonzero probability.
    pub branches: Vec<Option<WhichUnitaryResult>>,
}

impl WhichUnitaryRun {
    pub fn result_for_shot(&self, shot: usize) -> Option<&WhichUnitaryResult> {
        self.branches.get(*self.record.get(shot)?)?.as_ref()
    }
}

/// `Prob(α) = |C_α|²`, computed from the expansion.
pub fn which_unitary_distribution(u: &UnitaryOperator, basis: &OperatorBasis) -> Result<OutcomeDistribution> {
    let coeffs = expand(u.matrix(), basis)?;
    Ok(OutcomeDistribution::exact(basis.labels().to_vec(), coeffs.probabilities()))
}

/// Ancilla registers and readout table of the circuit for a product-form basis.
#[derive(Clone, Debug)]
pub struct MeasurementCircuit {
    observables: Vec<TwoTimeObservable>,
    /// Fourier readout tuple → basis index.
    readout: HashMap<Vec<usize>, usize>,
    basis: OperatorBasis,
}

impl MeasurementCircuit {
    pub fn for_basis(basis: &OperatorBasis) -> Result<Self> {
        let u0 = basis.u0().ok_or_else(|| Error::NotProductBasis("basis has no reference unitary U0".into()))?;
        let observables = match basis.family() {
            BasisFamily::Pauli { qubits } => {
                let mut obs = Vec::with_capacity(2 * qubits);
                for q in 0..qubits {
                    obs.push(TwoTimeObservable::local(ObservableFamily::Z, q, u0)?);
                    obs.push(TwoTimeObservable::local(ObservableFamily::X, q, u0)?);
                }
                obs
            }
            BasisFamily::Weyl => {
                vec![TwoTimeObservable::new(ObservableFamily::Z, u0)?, TwoTimeObservable::new(ObservableFamily::X, u0)?]
            }
            other => return Err(Error::NotProductBasis(format!("{other:?} basis"))),
        };
        let mut readout = HashMap::with_capacity(basis.len());
        for (alpha, element) in basis.elements().iter().enumerate() {
            let key = observables
                .iter()
                .map(|obs| {
                    temporal_eigenvalue(obs, element)
                        .and_then(|l| eigen_index(l, obs.order()))
                        .map_err(|_| Error::NotProductBasis(format!("element {alpha} is not a joint eigenoperator")))
                })
                .collect::<Result<Vec<_>>>()?;
            if readout.insert(key, alpha).is_some() {
                return Err(Error::NotProductBasis(format!("element {alpha} shares a readout with another element")));
            }
        }
        Ok(Self { observables, readout, basis: basis.clone() })
    }

    pub fn observables(&self) -> &[TwoTimeObservable] {
        &self.observables
    }

    fn register_dims(&self) -> Vec<usize> {
        self.observables.iter().map(TwoTimeObservable::order).collect()
    }

    /// Decomposes a flat register index into per-register digits
    /// (register 0 most significant).
    fn digits(dims: &[usize], mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
        out
    }

    /// Full state-vector simulation up to (not including) readout. Layout:
    /// registers ⊗ system ⊗ spectator, where the spectator is whatever
    /// factor of `psi` lies beyond the system dimension.
    pub fn evolve(&self, u: &UnitaryOperator, psi: &PureState) -> Result<CircuitState> {
        let d = self.basis.dim();
        if u.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u.dim() });
        }
        if !psi.dim().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
        }
        let spectator = psi.dim() / d;
        let dims = self.register_dims();
        let registers: usize = dims.iter().product();
        let amp = C64::from(1.0 / (registers as f64).sqrt());

        // psi as a d × spectator matrix; one block per register configuration
        let psi_block = linalg::unvec_row_major(psi.amplitudes(), d, spectator);
        let mut blocks: Vec<CMatrix> = vec![psi_block * amp; registers];

        let early: Vec<Vec<CMatrix>> = self
            .observables
            .iter()
            .map(|o| (0..o.order()).map(|a| matrix_power(&o.generator().adjoint(), a)).collect())
            .collect();
        let u0 = self.basis.u0().expect("checked in for_basis");
        let late: Vec<Vec<CMatrix>> = self
            .observables
            .iter()
            .map(|o| {
                (0..o.order()).map(|a| u0.matrix() * matrix_power(o.generator(), a) * u0.matrix().adjoint()).collect()
            })
            .collect();

        for (c, block) in blocks.iter_mut().enumerate() {
            let digits = Self::digits(&dims, c);
            for (j, &a) in digits.iter().enumerate() {
                *block = &early[j][a] * &*block;
            }
            *block = u.matrix() * &*block;
            for (j, &a) in digits.iter().enumerate().rev() {
                *block = &late[j][a] * &*block;
            }
        }
        Ok(CircuitState { dims, blocks, system_dim: d, spectator_dim: spectator })
    }

    /// Reads out the registers in the Fourier basis. Returns exact
    /// probabilities and post-measurement branches indexed by basis element.
    pub fn readout(&self, state: &CircuitState) -> (Vec<f64>, Vec<Option<WhichUnitaryResult>>) {
        let n = self.basis.len();
        let mut probs = vec![0.0; n];
        let mut branches = vec![None; n];
        let fourier: Vec<CMatrix> = state.dims.iter().map(|&r| linalg::fourier_matrix(r)).collect();
        let outcomes: usize = state.dims.iter().product();
        for k in 0..outcomes {
            let kd = Self::digits(&state.dims, k);
            let mut block = CMatrix::from_element(state.system_dim, state.spectator_dim, ZERO);
            for (c, b) in state.blocks.iter().enumerate() {
                let cd = Self::digits(&state.dims, c);
                let weight = cd
                    .iter()
                    .zip(&kd)
                    .enumerate()
                    .fold(C64::from(1.0), |acc, (j, (&a, &kk))| acc * fourier[j][(a, kk)].conj());
                block += b * weight;
            }
            let p = linalg::frobenius_sq(&block);
            let Some(&alpha) = self.readout.get(&kd) else {
                debug_assert!(p < 1e-12, "unlabelled readout with probability {p}");
                continue;
            };
            probs[alpha] += p;
            if p > 1e-15 {
                let collapsed = PureState::normalized(linalg::vec_row_major(&block)).expect("nonzero branch");
                branches[alpha] = Some(WhichUnitaryResult { outcome: alpha, collapsed, exact_prob: p });
            }
        }
        (probs, branches)
    }

    /// Register state left behind when the free evolution is exactly basis
    /// element `alpha`: the system factors out as `B_α|ψ⟩`.
    pub fn register_state_for_element(&self, alpha: usize, psi: &PureState) -> Result<CVector> {
        let element = self.basis.element(alpha);
        let u = UnitaryOperator::new(element.clone())?;
        let state = self.evolve(&u, psi)?;
        let target = linalg::unvec_row_major(psi.amplitudes(), state.system_dim, state.spectator_dim);
        let target = element * target;
        Ok(CVector::from_iterator(state.blocks.len(), state.blocks.iter().map(|b| hs_inner(&target, b))))
    }

    /// Product of Fourier vectors expected on the registers for element `alpha`.
    pub fn expected_register_state(&self, alpha: usize) -> CVector {
        let key = self
            .readout
            .iter()
            .find_map(|(k, &a)| (a == alpha).then(|| k.clone()))
            .expect("every element has a readout");
        self.observables.iter().zip(&key).fold(CVector::from_element(1, C64::from(1.0)), |acc, (o, &k)| {
            linalg::kron_vec(&acc, &linalg::fourier_matrix(o.order()).column(k).into_owned())
        })
    }
}

/// Joint register/system amplitudes after the `t₂` coupling.
#[derive(Clone, Debug)]
pub struct CircuitState {
    dims: Vec<usize>,
    blocks: Vec<CMatrix>,
    system_dim: usize,
    spectator_dim: usize,
}

impl CircuitState {
    /// Flattened state, registers most significant.
    pub fn to_vector(&self) -> CVector {
        let per = self.system_dim * self.spectator_dim;
        let mut v = CVector::zeros(self.blocks.len() * per);
        for (c, b) in self.blocks.iter().enumerate() {
            let flat = linalg::vec_row_major(b);
            v.rows_mut(c * per, per).copy_from(&flat);
        }
        v
    }

    pub fn register_dims(&self) -> &[usize] {
        &self.dims
    }
}

fn run_circuit(
    u: &UnitaryOperator,
    basis: &OperatorBasis,
    psi: &PureState,
    shots: u64,
    seed: u64,
) -> Result<WhichUnitaryRun> {
    let circuit = MeasurementCircuit::for_basis(basis)?;
    let state = circuit.evolve(u, psi)?;
    let (probabilities, branches) = circuit.readout(&state);
    let mut distribution = OutcomeDistribution::exact(basis.labels().to_vec(), probabilities);
    let record = if shots > 0 { distribution.sample(shots, seed) } else { Vec::new() };
    Ok(WhichUnitaryRun { distribution, record, branches })
}

/// Qubit circuit (`d = 2^n`, Pauli-form basis `{U0 σ_α}`).
pub fn measure_which_unitary(
    u: &UnitaryOperator,
    basis: &OperatorBasis,
    psi: &PureState,
    shots: u64,
    seed: u64,
) -> Result<WhichUnitaryRun> {
    if !matches!(basis.family(), BasisFamily::Pauli { .. }) {
        return Err(Error::NotProductBasis("qubit circuit needs a Pauli-form basis".into()));
    }
    run_circuit(u, basis, psi, shots, seed)
}

/// Qudit circuit with two `d`-level registers (Weyl-form basis).
pub fn measure_which_unitary_qudit(
    u: &UnitaryOperator,
    basis: &OperatorBasis,
    psi: &PureState,
    shots: u64,
    seed: u64,
) -> Result<WhichUnitaryRun> {
    if basis.family() != BasisFamily::Weyl {
        return Err(Error::NotProductBasis("qudit circuit needs a Weyl-form basis".into()));
    }
    run_circuit(u, basis, psi, shots, seed)
}

/// Measurement for any trace-orthogonal basis: `U` acts on half of `|ψ⁺⟩`
/// and the pair is measured projectively onto the orthonormal states
/// `(B_μ ⊗ I)|ψ⁺⟩`. Reproduces `|C_μ|²` but, unlike the circuit, consumes
/// the entangled pair instead of acting on a given system state.
pub fn measure_which_unitary_choi(
    u: &UnitaryOperator,
    basis: &OperatorBasis,
    shots: u64,
    seed: u64,
) -> Result<OutcomeDistribution> {
    let d = basis.dim();
    if u.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: u.dim() });
    }
    let plus = psi_plus(d);
    let id = identity(d);
    let probe = linalg::kron(u.matrix(), &id) * &plus;
    let probabilities =
        basis.elements().iter().map(|b| (linalg::kron(b, &id) * &plus).dotc(&probe).norm_sqr()).collect();
    let mut distribution = OutcomeDistribution::exact(basis.labels().to_vec(), probabilities);
    if shots > 0 {
        distribution.sample(shots, seed);
    }
    Ok(distribution)
}

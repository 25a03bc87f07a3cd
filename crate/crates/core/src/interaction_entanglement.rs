//! Operator Schmidt decomposition of bipartite unitaries, the entropy of the
//! squared Schmidt coefficients, and concentration of `n` copies of
//! `α I⊗I + β σx⊗σx`.

use serde::Serialize;

use crate::cp_map::KrausMap;
use crate::error::{Error, Result};
use crate::linalg::{
    self, canonical_span_basis, compensated_sum, hs_inner, identity, kron, kron_all, pauli, reduced_density,
    shannon_entropy_bits, svd_desc, CMatrix, CVector, C64, ZERO,
};
use crate::operator_basis::{pauli_basis_identity, weyl_basis, OperatorBasis};
use crate::random::{sample_index, stream_rng};

/// Unitary on `A ⊗ B` with `A` the more significant factor.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteUnitary {
    dims: (usize, usize),
    matrix: CMatrix,
}

impl BipartiteUnitary {
    pub fn new(matrix: CMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        let n = linalg::ensure_square(&matrix)?;
        if d_a == 0 || d_b == 0 || n != d_a * d_b {
            return Err(Error::DimensionMismatch { expected: d_a * d_b, found: n });
        }
        let deviation = linalg::unitarity_deviation(&matrix);
        if deviation > linalg::STRUCT_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { dims: (d_a, d_b), matrix })
    }

    pub fn product(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        Self::new(kron(a, b), a.nrows(), b.nrows())
    }

    pub fn cnot() -> Self {
        let p0 = (identity(2) + pauli(3)) * C64::from(0.5);
        let p1 = (identity(2) - pauli(3)) * C64::from(0.5);
        Self { dims: (2, 2), matrix: kron(&p0, &identity(2)) + kron(&p1, &pauli(1)) }
    }

    pub fn swap() -> Self {
        let m = (0..4).fold(CMatrix::zeros(4, 4), |acc, a| acc + kron(&pauli(a), &pauli(a))) * C64::from(0.5);
        Self { dims: (2, 2), matrix: m }
    }

    /// `cos θ I⊗I − i sin θ σx⊗σx`.
    pub fn xx_rotation(theta: f64) -> Self {
        let m = kron(&identity(2), &identity(2)) * C64::from(theta.cos())
            - kron(&pauli(1), &pauli(1)) * C64::new(0.0, theta.sin());
        Self { dims: (2, 2), matrix: m }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `C_μν = tr((A_μ ⊗ B_ν)† u) / (d_A d_B)`, rows indexed by `μ`.
pub fn bipartite_expand(u: &BipartiteUnitary, basis_a: &OperatorBasis, basis_b: &OperatorBasis) -> Result<CMatrix> {
    let (da, db) = u.dims;
    if basis_a.dim() != da {
        return Err(Error::DimensionMismatch { expected: da, found: basis_a.dim() });
    }
    if basis_b.dim() != db {
        return Err(Error::DimensionMismatch { expected: db, found: basis_b.dim() });
    }
    let norm = C64::from((da * db) as f64);
    Ok(CMatrix::from_fn(basis_a.len(), basis_b.len(), |mu, nu| {
        hs_inner(&kron(basis_a.element(mu), basis_b.element(nu)), &u.matrix) / norm
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSchmidt {
    /// Nonzero Schmidt coefficients, descending.
    pub values: Vec<f64>,
    pub a_ops: Vec<CMatrix>,
    pub b_ops: Vec<CMatrix>,
}

impl OperatorSchmidt {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.values.iter().map(|d| d * d).collect()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy_bits(&self.weights())
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut out = kron(&self.a_ops[0], &self.b_ops[0]) * C64::from(self.values[0]);
        for k in 1..self.rank() {
            out += kron(&self.a_ops[k], &self.b_ops[k]) * C64::from(self.values[k]);
        }
        out
    }
}

const SCHMIDT_TRIM: f64 = 1e-10;
const DEGENERATE_GAP: f64 = 1e-9;

pub fn operator_schmidt(
    u: &BipartiteUnitary,
    basis_a: &OperatorBasis,
    basis_b: &OperatorBasis,
) -> Result<OperatorSchmidt> {
    let c = bipartite_expand(u, basis_a, basis_b)?;
    let (mut w, s, mut v) = svd_desc(&c);
    let rank = s.iter().take_while(|&&x| x > SCHMIDT_TRIM).count();

    // within each degenerate block W → W', V → V·(W†W') leaves W Σ V† intact
    let mut start = 0;
    while start < rank {
        let mut end = start + 1;
        while end < rank && (s[start] - s[end]).abs() <= DEGENERATE_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = w.columns(start, end - start).into_owned();
            let canon = canonical_span_basis(&block);
            let r = block.adjoint() * &canon;
            let v_new = v.columns(start, end - start) * &r;
            w.columns_mut(start, end - start).copy_from(&canon);
            v.columns_mut(start, end - start).copy_from(&v_new);
        }
        start = end;
    }

    let (da, db) = u.dims;
    let mut a_ops = Vec::with_capacity(rank);
    let mut b_ops = Vec::with_capacity(rank);
    for k in 0..rank {
        let a = basis_a.elements().iter().enumerate().fold(CMatrix::zeros(da, da), |acc, (mu, e)| acc + e * w[(mu, k)]);
        let b = basis_b
            .elements()
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(db, db), |acc, (nu, e)| acc + e * v[(nu, k)].conj());
        a_ops.push(a);
        b_ops.push(b);
    }
    Ok(OperatorSchmidt { values: s[..rank].to_vec(), a_ops, b_ops })
}

/// Pauli basis for powers of two, Weyl otherwise.
pub fn default_basis(d: usize) -> Result<OperatorBasis> {
    if d.is_power_of_two() && d > 1 {
        pauli_basis_identity(d.trailing_zeros() as usize)
    } else {
        weyl_basis(d, None)
    }
}

/// `S_U` in bits.
pub fn interaction_entanglement(u: &BipartiteUnitary) -> Result<f64> {
    let (da, db) = u.dims;
    Ok(operator_schmidt(u, &default_basis(da)?, &default_basis(db)?)?.entropy())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OtherSide {
    Pure(CVector),
    MaximallyMixed,
}

/// Map on `side` obtained by preparing the other factor as given, applying
/// `u` and tracing the other factor out.
pub fn induced_local_map(u: &BipartiteUnitary, side: Side, other: &OtherSide) -> Result<KrausMap> {
    let (da, db) = u.dims;
    let (d_sys, d_env) = match side {
        Side::A => (da, db),
        Side::B => (db, da),
    };
    // ⟨j|_env u |k⟩_env as a d_sys × d_sys block
    let block = |j: usize, k: usize| {
        CMatrix::from_fn(d_sys, d_sys, |s, t| match side {
            Side::A => u.matrix[(s * db + j, t * db + k)],
            Side::B => u.matrix[(j * db + s, k * db + t)],
        })
    };
    let ops = match other {
        OtherSide::Pure(phi) => {
            if phi.len() != d_env {
                return Err(Error::DimensionMismatch { expected: d_env, found: phi.len() });
            }
            let norm = phi.norm();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized { norm });
            }
            (0..d_env)
                .map(|j| (0..d_env).fold(CMatrix::zeros(d_sys, d_sys), |acc, k| acc + block(j, k) * phi[k]))
                .collect()
        }
        OtherSide::MaximallyMixed => {
            let scale = C64::from(1.0 / (d_env as f64).sqrt());
            (0..d_env).flat_map(|j| (0..d_env).map(move |k| (j, k))).map(|(j, k)| block(j, k) * scale).collect()
        }
    };
    KrausMap::new(ops)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationMode {
    /// Projects the `4ⁿ`-dimensional operator onto each sector (n ≤ 4).
    Exact,
    /// Closed-form sector weights (n ≤ 64).
    Combinatorial,
}

impl ConcentrationMode {
    pub fn max_n(self) -> usize {
        match self {
            Self::Exact => 4,
            Self::Combinatorial => 64,
        }
    }
}

/// Outcome sector with `k` identity slots. The collapsed operator is the
/// equal-weight sum over the `C(n, k)` placements of `k` identities among `n`
/// slots, with `σx⊗σx` elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationRecord {
    pub n: usize,
    pub k: usize,
    pub term_count: u64,
    pub probability: f64,
    /// Common coefficient of every term, `α^k β^{n−k}`.
    pub term_coefficient: C64,
}

impl ConcentrationRecord {
    pub fn log2_terms(&self) -> f64 {
        (self.term_count as f64).log2()
    }
}

/// Per-sector quantities only the exact mode produces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorCheck {
    pub k: usize,
    pub projected_probability: f64,
    /// Largest relative spread of term weights inside the sector.
    pub weight_spread: f64,
    /// Entanglement across `A₁…A_n | B₁…B_n` after the normalized collapsed
    /// operator acts on `|0…0⟩`.
    pub block_entanglement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Concentration {
    pub n: usize,
    pub alpha: C64,
    pub beta: C64,
    pub mode: ConcentrationMode,
    /// Indexed by `k`.
    pub sectors: Vec<ConcentrationRecord>,
    pub total_probability: f64,
    pub exact: Option<Vec<SectorCheck>>,
    /// Sampled `k`, one per trial under the stream rule.
    pub samples: Vec<usize>,
    pub expected_log2_terms: f64,
}

impl Concentration {
    pub fn argmax_k(&self) -> usize {
        self.sectors.iter().max_by(|a, b| a.probability.total_cmp(&b.probability)).map(|r| r.k).unwrap_or(0)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn check_coefficients(alpha: C64, beta: C64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalizedCoefficients(norm));
    }
    Ok(())
}

fn sector_probabilities(n: usize, a2: f64, b2: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial(n, k) as f64 * a2.powi(k as i32) * b2.powi((n - k) as i32)).collect()
}

pub fn concentrate(
    n: usize,
    alpha: C64,
    beta: C64,
    mode: ConcentrationMode,
    samples: u64,
    seed: u64,
) -> Result<Concentration> {
    check_coefficients(alpha, beta)?;
    if n == 0 || n > mode.max_n() {
        let name = match mode {
            ConcentrationMode::Exact => "exact-matrix concentration",
            ConcentrationMode::Combinatorial => "combinatorial concentration",
        };
        return Err(Error::SizeOutOfRange { n, max: mode.max_n(), mode: name });
    }
    let probs = sector_probabilities(n, alpha.norm_sqr(), beta.norm_sqr());
    let sectors: Vec<ConcentrationRecord> = probs
        .iter()
        .enumerate()
        .map(|(k, &p)| ConcentrationRecord {
            n,
            k,
            term_count: binomial(n, k),
            probability: p,
            term_coefficient: alpha.powu(k as u32) * beta.powu((n - k) as u32),
        })
        .collect();
    let total_probability = compensated_sum(probs.iter().copied());
    let expected_log2_terms = compensated_sum(sectors.iter().map(|r| r.probability * r.log2_terms()));
    let exact = match mode {
        ConcentrationMode::Exact => Some(exact_sectors(n, alpha, beta)),
        ConcentrationMode::Combinatorial => None,
    };
    let samples = (0..samples).map(|t| sample_index(&probs, &mut stream_rng(seed, t))).collect();
    Ok(Concentration { n, alpha, beta, mode, sectors, total_probability, exact, samples, expected_log2_terms })
}

/// Slot `j` occupies factors `A_j B_j`; the full order is `A₁ B₁ A₂ B₂ …`.
fn exact_sectors(n: usize, alpha: C64, beta: C64) -> Vec<SectorCheck> {
    let xx = kron(&pauli(1), &pauli(1));
    let pair = identity(4) * alpha + &xx * beta;
    let full = kron_all(std::iter::repeat_n(&pair, n));
    let dim = full.nrows();
    // Z on A_j is diagonal, so Z_j X Z_j multiplies entry (r, c) by z_j(r) z_j(c)
    let z_sign = |j: usize, r: usize| if r >> (2 * n - 1 - 2 * j) & 1 == 1 { -1.0 } else { 1.0 };

    let mut per_k: Vec<Vec<CMatrix>> = vec![Vec::new(); n + 1];
    for pattern in 0..(1usize << n) {
        let op = CMatrix::from_fn(dim, dim, |r, c| {
            let keep = (0..n).all(|j| {
                let s = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                s * z_sign(j, r) * z_sign(j, c) > 0.0
            });
            if keep {
                full[(r, c)]
            } else {
                ZERO
            }
        });
        let k = n - pattern.count_ones() as usize;
        per_k[k].push(op);
    }

    let mut product = CVector::from_element(dim, ZERO);
    product[0] = C64::from(1.0);
    let dims = vec![2; 2 * n];
    let a_factors: Vec<usize> = (0..n).map(|j| 2 * j).collect();

    per_k
        .into_iter()
        .enumerate()
        .map(|(k, terms)| {
            let weights: Vec<f64> = terms.iter().map(|t| linalg::frobenius_sq(t) / dim as f64).collect();
            let projected_probability = compensated_sum(weights.iter().copied());
            let max = weights.iter().copied().fold(0.0, f64::max);
            let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
            let weight_spread = if max > 0.0 { (max - min) / max } else { 0.0 };
            let collapsed = terms.iter().fold(CMatrix::zeros(dim, dim), |acc, t| acc + t);
            let out = &collapsed * &product;
            let block_entanglement = if out.norm() > 1e-12 {
                let psi = &out / C64::from(out.norm());
                linalg::von_neumann_entropy_bits(&reduced_density(&psi, &dims, &a_factors))
            } else {
                0.0
            };
            SectorCheck { k, projected_probability, weight_spread, block_entanglement }
        })
        .collect()
}

/// `Σ_k P(k) log₂ C(n, k)` for real amplitude `alpha`, `β = √(1 − α²)`.
pub fn concentration_yield(n: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha.abs()) {
        return Err(Error::NotNormalizedCoefficients(alpha * alpha));
    }
    if n == 0 || n > ConcentrationMode::Combinatorial.max_n() {
        return Err(Error::SizeOutOfRange { n, max: 64, mode: "concentration yield" });
    }
    let a2 = alpha * alpha;
    let probs = sector_probabilities(n, a2, 1.0 - a2);
    Ok(compensated_sum(probs.iter().enumerate().map(|(k, p)| p * (binomial(n, k) as f64).log2())))
}

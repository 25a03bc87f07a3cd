//! Completely positive trace-preserving maps in Kraus, Choi and Stinespring
//! form, the canonical (diagonal) Kraus representation and the entropy of a
//! map.
//!
//! Conventions: `|ψ⁺⟩ = (1/√d) Σ_j |jj⟩`, and the Choi state is
//! `(E ⊗ id)(|ψ⁺⟩⟨ψ⁺|)`, acting on the *first* factor. With row-major
//! vectorization `(M ⊗ I)|ψ⁺⟩ = vec(M)/√d`. Entropies are in bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, canonical_span_basis, complete_to_unitary, eigh_desc, frobenius_sq, hs_inner, identity, max_abs_diff,
    shannon_entropy_bits, unvec_row_major, vec_row_major, CMatrix, CVector, C64, STRUCT_TOL, SUPPORT_TRIM, ZERO,
};
use crate::operator_basis::{pauli_basis_identity, weyl_basis, UnitaryOperator};

/// Tolerance on `Σ M†M = I`.
pub const TP_TOL: f64 = 1e-9;

/// Eigenvalues closer than this are treated as one degenerate eigenspace.
const DEGENERACY_GAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    dim: usize,
    operators: Vec<CMatrix>,
}

impl KrausMap {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .map(CMatrix::nrows)
            .ok_or_else(|| Error::InvalidDimension("a Kraus map needs at least one operator".into()))?;
        if dim == 0 {
            return Err(Error::InvalidDimension("empty Kraus operator".into()));
        }
        for m in &operators {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
            }
        }
        let map = Self { dim, operators };
        let deviation = map.trace_preservation_deviation();
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(map)
    }

    pub fn unitary(u: &UnitaryOperator) -> Self {
        Self { dim: u.dim(), operators: vec![u.matrix().clone()] }
    }

    pub fn identity_channel(d: usize) -> Self {
        Self { dim: d, operators: vec![identity(d)] }
    }

    /// `{√(1−p) I, √p σz}`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(vec![identity(2) * C64::from((1.0 - p).sqrt()), linalg::pauli(3) * C64::from(p.sqrt())])
    }

    /// `ρ ↦ (1−p)ρ + p·I/d`, written over the Pauli basis (`d = 2^n`) or the
    /// Weyl basis otherwise. `p = 1` is the completely depolarizing map.
    pub fn depolarizing(p: f64, d: usize) -> Result<Self> {
        check_probability(p)?;
        if d < 2 {
            return Err(Error::InvalidDimension(format!("depolarizing needs d >= 2, got {d}")));
        }
        let basis =
            if d.is_power_of_two() { pauli_basis_identity(d.trailing_zeros() as usize)? } else { weyl_basis(d, None)? };
        let n = (d * d) as f64;
        let ops = basis
            .elements()
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let w = if k == 0 { 1.0 - p + p / n } else { p / n };
                b * C64::from(w.sqrt())
            })
            .collect();
        Self::new(ops)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn trace_preservation_deviation(&self) -> f64 {
        let sum = self.operators.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, m| acc + m.adjoint() * m);
        max_abs_diff(&sum, &identity(self.dim))
    }

    /// Equivalent map with at most `d²` operators (the canonical set).
    pub fn trimmed(&self) -> Self {
        canonical_kraus(self).to_map()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Parse(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `E(ρ) = Σ_i M_i ρ M_i†`.
pub fn apply(map: &KrausMap, rho: &CMatrix) -> Result<CMatrix> {
    if rho.nrows() != map.dim || rho.ncols() != map.dim {
        return Err(Error::DimensionMismatch { expected: map.dim, found: rho.nrows().max(rho.ncols()) });
    }
    Ok(map.operators.iter().fold(CMatrix::zeros(map.dim, map.dim), |acc, m| acc + m * rho * m.adjoint()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    dim: usize,
    matrix: CMatrix,
}

/// Structural checks of a Choi state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoiDiagnostics {
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    /// Entrywise deviation of the acted-side marginal from `I/d`.
    pub marginal_error: f64,
}

impl ChoiDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.hermiticity <= STRUCT_TOL
            && self.min_eigenvalue >= -1e-9
            && self.trace_error <= 1e-9
            && self.marginal_error <= 1e-9
    }
}

impl ChoiState {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh_desc(&self.matrix).0
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > SUPPORT_TRIM).count()
    }

    pub fn diagnostics(&self) -> ChoiDiagnostics {
        let d = self.dim;
        let marginal = linalg::partial_trace_first(&self.matrix, d, d);
        ChoiDiagnostics {
            hermiticity: max_abs_diff(&self.matrix, &self.matrix.adjoint()),
            min_eigenvalue: self.eigenvalues().last().copied().unwrap_or(0.0),
            trace_error: (self.matrix.trace() - C64::from(1.0)).norm(),
            marginal_error: max_abs_diff(&marginal, &(identity(d) / C64::from(d as f64))),
        }
    }
}

/// `(E ⊗ id)(|ψ⁺⟩⟨ψ⁺|) = (1/d) Σ_i vec(M_i) vec(M_i)†`.
pub fn choi(map: &KrausMap) -> ChoiState {
    let d = map.dim;
    let n = d * d;
    let matrix = map.operators.iter().fold(CMatrix::zeros(n, n), |acc, m| {
        let v = vec_row_major(m);
        acc + &v * v.adjoint()
    }) / C64::from(d as f64);
    ChoiState { dim: d, matrix }
}

/// Diagonal representation: `p_μ` descending and `M_μ` with
/// `tr(M_μ† M_ν) = d·p_μ·δ_μν` and `Σ M_μ† M_μ = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalKraus {
    pub dim: usize,
    pub probabilities: Vec<f64>,
    pub operators: Vec<CMatrix>,
}

impl CanonicalKraus {
    pub fn support(&self) -> usize {
        self.probabilities.len()
    }

    pub fn to_map(&self) -> KrausMap {
        KrausMap { dim: self.dim, operators: self.operators.clone() }
    }

    /// Largest `|tr(M_μ† M_ν)|` over `μ ≠ ν`.
    pub fn orthogonality_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, ma) in self.operators.iter().enumerate() {
            for mb in &self.operators[a + 1..] {
                worst = worst.max(hs_inner(ma, mb).norm());
            }
        }
        worst
    }

    /// Unit-normalized operators `Û_μ = M_μ/√p_μ`, `(1/d) tr(Û_μ† Û_μ) = 1`.
    pub fn normalized_operators(&self) -> Vec<CMatrix> {
        self.operators.iter().zip(&self.probabilities).map(|(m, &p)| m / C64::from(p.sqrt())).collect()
    }
}

/// Eigendecomposes the Choi state; eigenvalues at or below `1e-12` are
/// dropped. Inside a degenerate eigenspace the eigenvectors are replaced by
/// the deterministic basis from [`canonical_span_basis`], which also fixes
/// each operator's phase.
pub fn canonical_kraus(map: &KrausMap) -> CanonicalKraus {
    let d = map.dim;
    let (values, vectors) = eigh_desc(choi(map).matrix());
    let support = values.iter().take_while(|&&v| v > SUPPORT_TRIM).count();

    let mut probabilities = Vec::with_capacity(support);
    let mut operators = Vec::with_capacity(support);
    let mut start = 0;
    while start < support {
        let mut end = start + 1;
        while end < support && values[end - 1] - values[end] <= DEGENERACY_GAP {
            end += 1;
        }
        let block = canonical_span_basis(&vectors.columns(start, end - start).into_owned());
        for (offset, v) in block.column_iter().enumerate() {
            let p = values[start + offset];
            probabilities.push(p);
            operators.push(unvec_row_major(&v.into_owned(), d, d) * C64::from((d as f64 * p).sqrt()));
        }
        start = end;
    }
    // Renormalize the kept mass; the trimmed tail is below 1e-12 per value.
    let total: f64 = linalg::compensated_sum(probabilities.iter().copied());
    for p in &mut probabilities {
        *p /= total;
    }
    CanonicalKraus { dim: d, probabilities, operators }
}

/// `S = −Σ p_μ log₂ p_μ` over the canonical probabilities.
pub fn entropy(map: &KrausMap) -> f64 {
    shannon_entropy_bits(&canonical_kraus(map).probabilities)
}

/// `N_j = Σ_i M_i u_ij`. `u` is `r × c` with orthonormal rows; when `r`
/// exceeds the number of operators the map is padded with zero operators.
pub fn kraus_rotation(map: &KrausMap, u: &CMatrix) -> Result<KrausMap> {
    let (r, c) = u.shape();
    if r < map.len() {
        return Err(Error::DimensionMismatch { expected: map.len(), found: r });
    }
    let deviation = max_abs_diff(&(u * u.adjoint()), &identity(r));
    if deviation > STRUCT_TOL {
        return Err(Error::NonIsometric { deviation });
    }
    let zero = CMatrix::from_element(map.dim, map.dim, ZERO);
    let operators = (0..c)
        .map(|j| map.operators.iter().enumerate().fold(zero.clone(), |acc, (i, m)| acc + m * u[(i, j)]))
        .collect();
    Ok(KrausMap { dim: map.dim, operators })
}

/// `‖Choi(a) − Choi(b)‖_F`; infinite for different dimensions.
pub fn choi_distance(a: &KrausMap, b: &KrausMap) -> f64 {
    if a.dim != b.dim {
        return f64::INFINITY;
    }
    frobenius_sq(&(choi(a).matrix - choi(b).matrix)).sqrt()
}

pub fn equivalent(a: &KrausMap, b: &KrausMap, tol: f64) -> bool {
    choi_distance(a, b) <= tol
}

/// Global unitary on system ⊗ ancilla (`index = s·a + c`) whose action on
/// `|ψ⟩ ⊗ |0_C⟩` is `Σ_i M_i|ψ⟩ ⊗ |i_C⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringDilation {
    system_dim: usize,
    ancilla_dim: usize,
    unitary: CMatrix,
}

impl StinespringDilation {
    pub fn new(system_dim: usize, ancilla_dim: usize, unitary: CMatrix) -> Result<Self> {
        if unitary.nrows() != system_dim * ancilla_dim {
            return Err(Error::DimensionMismatch { expected: system_dim * ancilla_dim, found: unitary.nrows() });
        }
        UnitaryOperator::new(unitary.clone())?;
        Ok(Self { system_dim, ancilla_dim, unitary })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// The ancilla starts in `|0_C⟩`.
    pub fn ancilla_initial(&self) -> usize {
        0
    }

    /// `tr_C U (ρ ⊗ |0_C⟩⟨0_C|) U†`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let (d, a) = (self.system_dim, self.ancilla_dim);
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        let mut ancilla0 = CMatrix::zeros(a, a);
        ancilla0[(0, 0)] = C64::from(1.0);
        let full = &self.unitary * linalg::kron(rho, &ancilla0) * self.unitary.adjoint();
        Ok(linalg::partial_trace_second(&full, d, a))
    }
}

/// Dilation with ancilla dimension equal to the number of Kraus operators.
pub fn stinespring(map: &KrausMap) -> StinespringDilation {
    let (d, a) = (map.dim, map.len());
    let iso = CMatrix::from_fn(d * a, d, |row, t| map.operators[row % a][(row / a, t)]);
    let completed = complete_to_unitary(&iso);
    // the isometry occupies the input columns t·a (ancilla in |0⟩)
    let mut unitary = CMatrix::zeros(d * a, d * a);
    let mut spare = d..d * a;
    for col in 0..d * a {
        let src = if col % a == 0 { col / a } else { spare.next().expect("enough spare columns") };
        unitary.set_column(col, &completed.column(src));
    }
    StinespringDilation { system_dim: d, ancilla_dim: a, unitary }
}

/// `M_i = (⟨b_i| ⊗ I) U (I ⊗ |0_C⟩)` for an orthonormal ancilla basis `{b_i}`.
pub fn kraus_from_ancilla_basis(dil: &StinespringDilation, ancilla_basis: &[CVector]) -> Result<KrausMap> {
    let (d, a) = (dil.system_dim, dil.ancilla_dim);
    if ancilla_basis.len() != a {
        return Err(Error::DimensionMismatch { expected: a, found: ancilla_basis.len() });
    }
    if let Some(bad) = ancilla_basis.iter().find(|b| b.len() != a) {
        return Err(Error::DimensionMismatch { expected: a, found: bad.len() });
    }
    let gram = CMatrix::from_fn(a, a, |i, j| ancilla_basis[i].dotc(&ancilla_basis[j]));
    let deviation = max_abs_diff(&gram, &identity(a));
    if deviation > STRUCT_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let operators = ancilla_basis
        .iter()
        .map(|b| {
            CMatrix::from_fn(d, d, |s, t| {
                (0..a).fold(ZERO, |acc, c| acc + b[c].conj() * dil.unitary[(s * a + c, t * a)])
            })
        })
        .collect();
    KrausMap::new(operators)
}

/// Columns of the identity, as an ancilla basis.
pub fn computational_basis(a: usize) -> Vec<CVector> {
    (0..a)
        .map(|k| {
            let mut v = CVector::zeros(a);
            v[k] = C64::from(1.0);
            v
        })
        .collect()
}

/// Columns of the discrete Fourier matrix, as an ancilla basis.
pub fn fourier_basis(a: usize) -> Vec<CVector> {
    let f = linalg::fourier_matrix(a);
    f.column_iter().map(|c| c.into_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, density, pauli, psi_plus};
    use crate::random::{haar_unitary, random_kraus_operators, random_row_isometry, random_state_vector, seeded};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn half() -> C64 {
        C64::from(FRAC_1_SQRT_2)
    }

    fn plus_state() -> CMatrix {
        CMatrix::from_element(2, 2, C64::from(0.5))
    }

    #[test]
    fn unitary_channel_conjugates() {
        let u = UnitaryOperator::new(haar_unitary(3, &mut seeded(1))).unwrap();
        let rho = density(&random_state_vector(3, &mut seeded(2)));
        let out = apply(&KrausMap::unitary(&u), &rho).unwrap();
        assert!(max_abs_diff(&out, &(u.matrix() * &rho * u.matrix().adjoint())) < 1e-12);
    }

    #[test]
    fn depolarizing_and_dephasing_outputs() {
        let mut zero = CMatrix::zeros(2, 2);
        zero[(0, 0)] = C64::from(1.0);
        // {σ_α / 2}
        let dep = KrausMap::new((0..4).map(|k| pauli(k) * C64::from(0.5)).collect()).unwrap();
        let mixed = identity(2) * C64::from(0.5);
        assert!(max_abs_diff(&apply(&dep, &zero).unwrap(), &mixed) < 1e-12);
        let deph = KrausMap::dephasing(0.5).unwrap();
        assert!(max_abs_diff(&apply(&deph, &plus_state()).unwrap(), &mixed) < 1e-12);
        assert!(apply(&deph, &identity(3)).is_err());
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let err = KrausMap::new(vec![identity(2), pauli(1)]).unwrap_err();
        assert!(matches!(err, Error::NotTracePreserving { .. }));
        assert!(KrausMap::new(vec![identity(2), identity(3)]).is_err());
    }

    #[test]
    fn choi_of_identity_is_projector() {
        let j = choi(&KrausMap::identity_channel(2));
        let plus = psi_plus(2);
        assert!(max_abs_diff(j.matrix(), &density(&plus)) < 1e-12);
        assert!(j.diagnostics().is_valid());
    }

    #[test]
    fn choi_of_complete_depolarizer_is_maximally_mixed() {
        let j = choi(&KrausMap::depolarizing(1.0, 2).unwrap());
        assert!(max_abs_diff(j.matrix(), &(identity(4) * C64::from(0.25))) < 1e-12);
    }

    #[test]
    fn choi_of_dephasing_has_two_halves() {
        let j = choi(&KrausMap::dephasing(0.5).unwrap());
        // ½(|00⟩⟨00| + |11⟩⟨11|)
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = C64::from(0.5);
        expected[(3, 3)] = C64::from(0.5);
        assert!(max_abs_diff(j.matrix(), &expected) < 1e-12);
        let ev = j.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        assert_eq!(j.rank(), 2);
    }

    #[test]
    fn canonical_of_unitary_channel() {
        let u = UnitaryOperator::new(haar_unitary(2, &mut seeded(3))).unwrap();
        let can = canonical_kraus(&KrausMap::unitary(&u));
        assert_eq!(can.probabilities.len(), 1);
        assert!((can.probabilities[0] - 1.0).abs() < 1e-12);
        let phase = hs_inner(u.matrix(), &can.operators[0]) / C64::from(2.0);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&can.operators[0], &(u.matrix() * phase)) < 1e-12);
    }

    #[test]
    fn canonical_of_bit_flip() {
        let q: f64 = 0.25;
        let map =
            KrausMap::new(vec![identity(2) * C64::from((1.0 - q).sqrt()), pauli(1) * C64::from(q.sqrt())]).unwrap();
        let can = canonical_kraus(&map);
        assert!((can.probabilities[0] - 0.75).abs() < 1e-12);
        assert!((can.probabilities[1] - 0.25).abs() < 1e-12);
        // proportional to I and σx
        let r0 = hs_inner(&identity(2), &can.operators[0]).norm() / 2.0;
        let r1 = hs_inner(&pauli(1), &can.operators[1]).norm() / 2.0;
        assert!((r0 - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((r1 - 0.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn canonical_is_invariant_under_mixing() {
        let map = KrausMap::new(random_kraus_operators(2, 2, &mut seeded(4))).unwrap();
        let mixed = kraus_rotation(&map, &haar_unitary(2, &mut seeded(5))).unwrap();
        let (a, b) = (canonical_kraus(&map), canonical_kraus(&mixed));
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_canonical_set_is_deterministic() {
        let deph = KrausMap::dephasing(0.5).unwrap();
        let mixed = kraus_rotation(&deph, &haar_unitary(2, &mut seeded(6))).unwrap();
        let (a, b) = (canonical_kraus(&deph), canonical_kraus(&mixed));
        for (x, y) in a.operators.iter().zip(&b.operators) {
            assert!(max_abs_diff(x, y) < 1e-9);
        }
        assert!(a.orthogonality_deviation() < 1e-12);
        let dep = canonical_kraus(&KrausMap::depolarizing(1.0, 2).unwrap());
        assert_eq!(dep.support(), 4);
        assert!(dep.orthogonality_deviation() < 1e-12);
        assert!(dep.to_map().trace_preservation_deviation() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let u = UnitaryOperator::new(haar_unitary(3, &mut seeded(7))).unwrap();
        assert!(entropy(&KrausMap::unitary(&u)).abs() < 1e-12);
        assert!((entropy(&KrausMap::depolarizing(1.0, 2).unwrap()) - 2.0).abs() < 1e-12);
        assert!((entropy(&KrausMap::dephasing(0.5).unwrap()) - 1.0).abs() < 1e-12);
        assert!((entropy(&KrausMap::depolarizing(1.0, 3).unwrap()) - 2.0 * 3f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn rotation_examples() {
        let deph = KrausMap::dephasing(0.5).unwrap();
        let same = kraus_rotation(&deph, &identity(2)).unwrap();
        assert_eq!(same.operators(), deph.operators());
        let h = (pauli(1) + pauli(3)) * half();
        let proj = kraus_rotation(&deph, &h).unwrap();
        let p0 = (identity(2) + pauli(3)) * C64::from(0.5);
        let p1 = (identity(2) - pauli(3)) * C64::from(0.5);
        assert!(max_abs_diff(&proj.operators()[0], &p0) < 1e-12);
        assert!(max_abs_diff(&proj.operators()[1], &p1) < 1e-12);
        assert!(equivalent(&deph, &proj, 1e-10));

        let map = KrausMap::new(random_kraus_operators(2, 3, &mut seeded(8))).unwrap();
        let rotated = kraus_rotation(&map, &haar_unitary(3, &mut seeded(9))).unwrap();
        assert!(equivalent(&map, &rotated, 1e-10));
        // padding with zero operators through a 3 × 5 isometry
        let padded = kraus_rotation(&map, &random_row_isometry(3, 5, &mut seeded(10))).unwrap();
        assert_eq!(padded.len(), 5);
        assert!(equivalent(&map, &padded, 1e-10));
    }

    #[test]
    fn rotation_rejects_non_isometry() {
        let deph = KrausMap::dephasing(0.5).unwrap();
        let bad = CMatrix::from_element(2, 2, C64::from(1.0));
        assert!(matches!(kraus_rotation(&deph, &bad), Err(Error::NonIsometric { .. })));
        assert!(kraus_rotation(&deph, &identity(1)).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let deph = KrausMap::dephasing(0.5).unwrap();
        let dep = KrausMap::depolarizing(1.0, 2).unwrap();
        assert!(!equivalent(&deph, &dep, 1e-6));
        assert!(equivalent(&deph, &deph, 0.0));
        assert!(!equivalent(&deph, &KrausMap::identity_channel(3), 1.0));
    }

    #[test]
    fn dilation_of_unitary_channel_is_the_unitary() {
        let u = UnitaryOperator::new(haar_unitary(2, &mut seeded(11))).unwrap();
        let dil = stinespring(&KrausMap::unitary(&u));
        assert_eq!(dil.ancilla_dim(), 1);
        assert!(max_abs_diff(dil.unitary(), u.matrix()) < 1e-12);
    }

    #[test]
    fn dilation_reproduces_dephasing() {
        let deph = KrausMap::dephasing(0.5).unwrap();
        let dil = stinespring(&deph);
        assert_eq!(dil.ancilla_dim(), 2);
        assert!(linalg::is_unitary(dil.unitary(), 1e-10));
        let rho = density(&random_state_vector(2, &mut seeded(12)));
        let via_dilation = dil.apply(&rho).unwrap();
        assert!(max_abs_diff(&via_dilation, &apply(&deph, &rho).unwrap()) < 1e-10);
        let back = kraus_from_ancilla_basis(&dil, &computational_basis(2)).unwrap();
        assert!(equivalent(&back, &deph, 1e-10));
        for (a, b) in back.operators().iter().zip(deph.operators()) {
            assert!(max_abs_diff(a, b) < 1e-12);
        }
    }

    #[test]
    fn fourier_ancilla_basis_selects_projectors() {
        let dil = stinespring(&KrausMap::dephasing(0.5).unwrap());
        let proj = kraus_from_ancilla_basis(&dil, &fourier_basis(2)).unwrap();
        let p0 = (identity(2) + pauli(3)) * C64::from(0.5);
        let p1 = (identity(2) - pauli(3)) * C64::from(0.5);
        assert!(max_abs_diff(&proj.operators()[0], &p0) < 1e-12);
        assert!(max_abs_diff(&proj.operators()[1], &p1) < 1e-12);
    }

    #[test]
    fn ancilla_bases_give_equivalent_maps() {
        let map = KrausMap::new(random_kraus_operators(3, 4, &mut seeded(13))).unwrap();
        let dil = stinespring(&map);
        let basis: Vec<CVector> = haar_unitary(4, &mut seeded(14)).column_iter().map(|c| c.into_owned()).collect();
        let a = kraus_from_ancilla_basis(&dil, &computational_basis(4)).unwrap();
        let b = kraus_from_ancilla_basis(&dil, &basis).unwrap();
        assert!(equivalent(&a, &b, 1e-10));
        assert!(equivalent(&a, &map, 1e-10));
        let mut bad = computational_basis(4);
        bad[1] = bad[0].clone();
        assert!(matches!(kraus_from_ancilla_basis(&dil, &bad), Err(Error::NotOrthonormal { .. })));
        assert!(kraus_from_ancilla_basis(&dil, &computational_basis(3)).is_err());
    }

    #[test]
    fn choi_diagnostics_flag_invalid_matrix() {
        let mut m = identity(4) * C64::from(0.25);
        m[(0, 1)] = c(0.1, 0.0);
        let diag = ChoiState::from_matrix(2, m).unwrap().diagnostics();
        assert!(!diag.is_valid());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::random::{haar_unitary, random_kraus_operators, random_row_isometry, seeded};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn choi_and_entropy_invariant_under_isometries(seed in any::<u64>(), d in 2usize..4, k in 1usize..5, extra in 0usize..3) {
            let mut rng = seeded(seed);
            let map = KrausMap::new(random_kraus_operators(d, k, &mut rng)).unwrap();
            let u = random_row_isometry(k, k + extra, &mut rng);
            let rotated = kraus_rotation(&map, &u).unwrap();
            prop_assert!(choi_distance(&map, &rotated) < 1e-9);
            prop_assert!((entropy(&map) - entropy(&rotated)).abs() < 1e-9);
            prop_assert!(rotated.trace_preservation_deviation() < 1e-9);
        }

        #[test]
        fn canonical_outputs_are_orthogonal_and_faithful(seed in any::<u64>(), d in 2usize..4, k in 1usize..6) {
            let map = KrausMap::new(random_kraus_operators(d, k, &mut seeded(seed))).unwrap();
            let can = canonical_kraus(&map);
            prop_assert!(can.orthogonality_deviation() < 1e-9);
            for (m, &p) in can.operators.iter().zip(&can.probabilities) {
                prop_assert!((hs_inner(m, m).re - d as f64 * p).abs() < 1e-9);
            }
            prop_assert!(choi_distance(&map, &can.to_map()) < 1e-9);
            prop_assert!(can.to_map().trace_preservation_deviation() < 1e-9);
            prop_assert!(choi(&map).diagnostics().is_valid());
        }

        #[test]
        fn entropy_bounds(seed in any::<u64>(), d in 2usize..4, k in 1usize..10) {
            let map = KrausMap::new(random_kraus_operators(d, k, &mut seeded(seed))).unwrap();
            let s = entropy(&map);
            prop_assert!(s >= 0.0 && s <= 2.0 * (d as f64).log2() + 1e-12);
            prop_assert_eq!(s < 1e-9, choi(&map).rank() == 1);
        }

        #[test]
        fn unitary_channels_have_zero_entropy(seed in any::<u64>(), d in 2usize..5) {
            let u = UnitaryOperator::new(haar_unitary(d, &mut seeded(seed))).unwrap();
            prop_assert!(entropy(&KrausMap::unitary(&u)).abs() < 1e-9);
        }

        #[test]
        fn dilation_round_trip(seed in any::<u64>(), d in 2usize..4, k in 1usize..5) {
            let map = KrausMap::new(random_kraus_operators(d, k, &mut seeded(seed))).unwrap();
            let dil = stinespring(&map);
            prop_assert!(linalg::is_unitary(dil.unitary(), 1e-10));
            let back = kraus_from_ancilla_basis(&dil, &computational_basis(k)).unwrap();
            prop_assert!(equivalent(&back, &map, 1e-9));
        }
    }
}

//! Orthogonal operator bases: Pauli strings, clock/shift (Weyl) products,
//! expansion and reconstruction, and unitary rotations of a basis.
//!
//! Every basis holds `d²` operators `B_α` with `tr(B_α† B_β) = d·δ_αβ`.
//! Bases built from a reference unitary `U0` have the product form
//! `B_α = U0·σ_α` with `σ_0 = I`, so element 0 is always `U0` itself.
//!
//! Orderings are fixed so indices mean the same thing in every module:
//!
//! * Pauli: `(I, X, Y, Z)` per qubit, strings indexed in base 4 with qubit 0
//!   as the most significant digit.
//! * Weyl: `Z^μ X^ν` with index `μ·d + ν`. No phase correction is applied,
//!   so for `d = 2` the `(1, 1)` element is `ZX = iσy`, and the order is
//!   `(I, X, Z, iY)` rather than the Pauli order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, frobenius_sq, hs_inner, identity, is_unitary, kron_all, matrix_power, max_abs_diff, root_of_unity,
    unitarity_deviation, CMatrix, C64, STRUCT_TOL, ZERO,
};

/// A validated square unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCT_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        linalg::ensure_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::InvalidDimension("empty operator".into()));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: identity(d) }
    }

    /// `exp(−i H t)` for Hermitian `H`.
    pub fn evolution(hamiltonian: &CMatrix, t: f64) -> Result<Self> {
        linalg::ensure_square(hamiltonian)?;
        let (vals, vecs) = linalg::eigh_desc(hamiltonian);
        let phases = CMatrix::from_diagonal(&linalg::CVector::from_iterator(
            vals.len(),
            vals.iter().map(|&e| C64::from_polar(1.0, -e * t)),
        ));
        Self::new(&vecs * phases * vecs.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix * &other.matrix })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }

    pub fn scaled_by_phase(&self, phase: f64) -> Self {
        Self { matrix: self.matrix.map(|x| x * C64::from_polar(1.0, phase)) }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        max_abs_diff(&self.matrix, &identity(self.dim())) <= tol
    }
}

/// How a basis was built; decides which measurement circuit applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// `U0·(Pauli string)` on `qubits` qubits.
    Pauli { qubits: usize },
    /// `U0·Z^μ X^ν`.
    Weyl,
    /// `A_μ = Σ_ν K_μν B_ν` for some unitary `K`.
    Rotated,
    /// Arbitrary validated trace-orthogonal set.
    Custom,
}

#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<CMatrix>,
    labels: Vec<String>,
    is_unitary: bool,
    u0: Option<UnitaryOperator>,
    family: BasisFamily,
}

impl OperatorBasis {
    /// Validates a trace-orthogonal set of `d²` operators.
    pub fn from_elements(elements: Vec<CMatrix>, labels: Option<Vec<String>>) -> Result<Self> {
        let dim = elements.first().map(CMatrix::nrows).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidDimension("basis needs at least one element".into()));
        }
        for m in &elements {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
            }
        }
        if elements.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: elements.len() });
        }
        let labels = labels.unwrap_or_else(|| (0..elements.len()).map(|k| format!("B{k}")).collect());
        if labels.len() != elements.len() {
            return Err(Error::DimensionMismatch { expected: elements.len(), found: labels.len() });
        }
        let basis = Self::assemble(dim, elements, labels, None, BasisFamily::Custom);
        let deviation = basis.gram_deviation();
        if deviation > STRUCT_TOL {
            return Err(Error::NotOrthogonal { deviation });
        }
        Ok(basis)
    }

    fn assemble(
        dim: usize,
        elements: Vec<CMatrix>,
        labels: Vec<String>,
        u0: Option<UnitaryOperator>,
        family: BasisFamily,
    ) -> Self {
        let is_unitary = elements.iter().all(|m| is_unitary(m, STRUCT_TOL));
        Self { dim, elements, labels, is_unitary, u0, family }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &CMatrix {
        &self.elements[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_unitary(&self) -> bool {
        self.is_unitary
    }

    pub fn u0(&self) -> Option<&UnitaryOperator> {
        self.u0.as_ref()
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    /// Normalized Gram matrix `G_αβ = (1/d) tr(B_α† B_β)`.
    pub fn gram_matrix(&self) -> CMatrix {
        let n = self.elements.len();
        let d = self.dim as f64;
        CMatrix::from_fn(n, n, |a, b| hs_inner(&self.elements[a], &self.elements[b]) / d)
    }

    /// Entrywise max of `|G − I|`.
    pub fn gram_deviation(&self) -> f64 {
        max_abs_diff(&self.gram_matrix(), &identity(self.elements.len()))
    }

    /// The `σ_α = U0† B_α` factors, when the basis has product form.
    pub fn sigma_parts(&self) -> Option<Vec<CMatrix>> {
        let u0 = self.u0.as_ref()?;
        let u0_dag = u0.matrix().adjoint();
        Some(self.elements.iter().map(|b| &u0_dag * b).collect())
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Expansion amplitudes `C_α = (1/d) tr(B_α† op)`, indexed like the basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub dim: usize,
    pub coeffs: Vec<C64>,
}

impl ExpansionCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `|C_α|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Unitary mixing matrix `K` of order `d²` used by [`rotate_basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRotation {
    k: CMatrix,
}

impl BasisRotation {
    pub fn new(k: CMatrix) -> Result<Self> {
        linalg::ensure_square(&k)?;
        let deviation = unitarity_deviation(&k);
        if deviation > STRUCT_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { k })
    }

    pub fn identity(order: usize) -> Self {
        Self { k: identity(order) }
    }

    pub fn order(&self) -> usize {
        self.k.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.k
    }

    /// Rotation equal to applying `self` first and `then` second, i.e. `then·self`.
    pub fn then(&self, then: &Self) -> Self {
        Self { k: &then.k * &self.k }
    }
}

fn qubit_count(d: usize) -> Option<usize> {
    (d >= 2 && d.is_power_of_two()).then(|| d.trailing_zeros() as usize)
}

const PAULI_LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Pauli string for base-4 index `alpha` on `qubits` qubits (qubit 0 most
/// significant), together with its label.
pub fn pauli_string(alpha: usize, qubits: usize) -> (CMatrix, String) {
    let digits: Vec<usize> = (0..qubits).rev().map(|q| (alpha >> (2 * q)) & 3).collect();
    let factors: Vec<CMatrix> = digits.iter().map(|&k| linalg::pauli(k)).collect();
    let label = digits.iter().map(|&k| PAULI_LETTERS[k]).collect();
    (kron_all(&factors), label)
}

/// `{U0·σ_α}` with `σ_α` ranging over Pauli strings in the fixed order.
pub fn pauli_basis(u0: &UnitaryOperator) -> Result<OperatorBasis> {
    let d = u0.dim();
    let qubits = qubit_count(d)
        .ok_or_else(|| Error::InvalidDimension(format!("Pauli basis needs a power-of-two dimension, got {d}")))?;
    let (elements, labels): (Vec<_>, Vec<_>) = (0..d * d)
        .map(|alpha| {
            let (sigma, label) = pauli_string(alpha, qubits);
            (u0.matrix() * sigma, label)
        })
        .unzip();
    Ok(OperatorBasis::assemble(d, elements, labels, Some(u0.clone()), BasisFamily::Pauli { qubits }))
}

/// Pauli basis with `U0 = I`.
pub fn pauli_basis_identity(qubits: usize) -> Result<OperatorBasis> {
    if qubits == 0 || qubits > 12 {
        return Err(Error::InvalidDimension(format!("qubit count {qubits} out of range 1..=12")));
    }
    pauli_basis(&UnitaryOperator::identity(1 << qubits))
}

/// Clock `Z = Σ ζ^j |j⟩⟨j|` and shift `X = Σ |j+1⟩⟨j|` with `ζ = e^{2πi/d}`.
pub fn clock_shift(d: usize) -> Result<(UnitaryOperator, UnitaryOperator)> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("clock/shift needs d >= 2, got {d}")));
    }
    let mut z = CMatrix::zeros(d, d);
    let mut x = CMatrix::zeros(d, d);
    for j in 0..d {
        z[(j, j)] = root_of_unity(d, j as i64);
        x[((j + 1) % d, j)] = C64::from(1.0);
    }
    Ok((UnitaryOperator { matrix: z }, UnitaryOperator { matrix: x }))
}

/// `{U0·Z^μ X^ν}` ordered lexicographically in `(μ, ν)`.
pub fn weyl_basis(d: usize, u0: Option<&UnitaryOperator>) -> Result<OperatorBasis> {
    let (z, x) = clock_shift(d)?;
    let u0 = match u0 {
        Some(u) if u.dim() != d => return Err(Error::DimensionMismatch { expected: d, found: u.dim() }),
        Some(u) => u.clone(),
        None => UnitaryOperator::identity(d),
    };
    let mut elements = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for mu in 0..d {
        let z_mu = matrix_power(z.matrix(), mu);
        for nu in 0..d {
            elements.push(u0.matrix() * &z_mu * matrix_power(x.matrix(), nu));
            labels.push(format!("Z^{mu}X^{nu}"));
        }
    }
    Ok(OperatorBasis::assemble(d, elements, labels, Some(u0), BasisFamily::Weyl))
}

/// `C_α = (1/d) tr(B_α† op)`.
pub fn expand(op: &CMatrix, basis: &OperatorBasis) -> Result<ExpansionCoefficients> {
    if op.nrows() != basis.dim || op.ncols() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, found: op.nrows().max(op.ncols()) });
    }
    let d = basis.dim as f64;
    let coeffs = basis.elements.iter().map(|b| hs_inner(b, op) / d).collect();
    Ok(ExpansionCoefficients { dim: basis.dim, coeffs })
}

/// `Σ_α C_α B_α`.
pub fn reconstruct(coeffs: &ExpansionCoefficients, basis: &OperatorBasis) -> Result<CMatrix> {
    if coeffs.dim != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, found: coeffs.dim });
    }
    if coeffs.coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: coeffs.coeffs.len() });
    }
    let zero = CMatrix::from_element(basis.dim, basis.dim, ZERO);
    Ok(coeffs.coeffs.iter().zip(&basis.elements).fold(zero, |acc, (c, b)| acc + b * *c))
}

/// `A_μ = Σ_ν K_μν B_ν`. Orthogonality survives; unitarity generally does not.
pub fn rotate_basis(basis: &OperatorBasis, k: &BasisRotation) -> Result<OperatorBasis> {
    if k.order() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: k.order() });
    }
    let zero = CMatrix::from_element(basis.dim, basis.dim, ZERO);
    let elements: Vec<CMatrix> = (0..basis.len())
        .map(|mu| basis.elements.iter().enumerate().fold(zero.clone(), |acc, (nu, b)| acc + b * k.k[(mu, nu)]))
        .collect();
    let labels = (0..elements.len()).map(|mu| format!("A{mu}")).collect();
    Ok(OperatorBasis::assemble(basis.dim, elements, labels, None, BasisFamily::Rotated))
}

/// `Σ_α |C_α|²` should equal `‖op‖_F² / d`; exposed for invariant checks.
pub fn expected_weight(op: &CMatrix) -> f64 {
    frobenius_sq(op) / op.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_rows, pauli, I, ONE};
    use crate::random::{haar_unitary, seeded};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn sigma_z_field(bt: f64) -> UnitaryOperator {
        UnitaryOperator::evolution(&pauli(3), bt).unwrap()
    }

    #[test]
    fn pauli_identity_basis_is_ordered_and_orthogonal() {
        let basis = pauli_basis_identity(1).unwrap();
        for k in 0..4 {
            assert!(max_abs_diff(basis.element(k), &pauli(k)) < 1e-15);
        }
        assert_eq!(basis.labels(), &["I", "X", "Y", "Z"]);
        assert!(basis.gram_deviation() < 1e-12);
        assert!(basis.is_unitary());
    }

    #[test]
    fn pauli_basis_with_field_prefactor() {
        let u0 = sigma_z_field(0.7);
        let basis = pauli_basis(&u0).unwrap();
        assert!(max_abs_diff(basis.element(0), u0.matrix()) < 1e-15);
        // tr(B_α† B_β) = 2 δ_αβ, checked without normalization
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b { 2.0 } else { 0.0 };
                assert!((hs_inner(basis.element(a), basis.element(b)) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_basis_with_sigma_x_prefactor() {
        let u0 = UnitaryOperator::new(pauli(1)).unwrap();
        let basis = pauli_basis(&u0).unwrap();
        assert!(max_abs_diff(basis.element(1), &identity(2)) < 1e-15);
        assert!(basis.gram_deviation() < 1e-12);
    }

    #[test]
    fn pauli_basis_rejects_bad_dimension() {
        assert!(matches!(pauli_basis(&UnitaryOperator::identity(3)), Err(Error::InvalidDimension(_))));
        assert!(UnitaryOperator::new(from_rows(&[vec![ONE, ONE], vec![ZERO, ONE]])).is_err());
    }

    #[test]
    fn two_qubit_pauli_strings() {
        let basis = pauli_basis_identity(2).unwrap();
        assert_eq!(basis.len(), 16);
        assert_eq!(basis.labels()[6], "XY");
        assert!(max_abs_diff(basis.element(6), &linalg::kron(&pauli(1), &pauli(2))) < 1e-15);
        assert!(basis.gram_deviation() < 1e-12);
    }

    #[test]
    fn clock_shift_qubit_reduces_to_pauli() {
        let (z, x) = clock_shift(2).unwrap();
        assert!(max_abs_diff(z.matrix(), &pauli(3)) < 1e-15);
        assert!(max_abs_diff(x.matrix(), &pauli(1)) < 1e-15);
    }

    #[test]
    fn clock_shift_relations() {
        for d in 2..8 {
            let (z, x) = clock_shift(d).unwrap();
            let zeta = root_of_unity(d, 1);
            let zx = z.matrix() * x.matrix();
            let xz = x.matrix() * z.matrix() * zeta;
            assert!(max_abs_diff(&zx, &xz) < 1e-12, "d={d}");
            assert!(max_abs_diff(&matrix_power(z.matrix(), d), &identity(d)) < 1e-12);
            assert!(max_abs_diff(&matrix_power(x.matrix(), d), &identity(d)) < 1e-12);
        }
        assert!(clock_shift(1).is_err());
    }

    #[test]
    fn weyl_qubit_phase_convention() {
        let basis = weyl_basis(2, None).unwrap();
        // (I, X, Z, ZX) with ZX = iσy
        assert!(max_abs_diff(basis.element(1), &pauli(1)) < 1e-15);
        assert!(max_abs_diff(basis.element(2), &pauli(3)) < 1e-15);
        assert!(max_abs_diff(basis.element(3), &pauli(2).map(|v| v * I)) < 1e-15);
    }

    #[test]
    fn weyl_qutrit_orthogonality() {
        let basis = weyl_basis(3, None).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                let expected = if a == b { 3.0 } else { 0.0 };
                assert!((hs_inner(basis.element(a), basis.element(b)) - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn weyl_with_sigma_z_prefactor() {
        let u0 = UnitaryOperator::new(pauli(3)).unwrap();
        let basis = weyl_basis(2, Some(&u0)).unwrap();
        // element (μ,ν) = (1,0) is σz·Z = I
        assert!(max_abs_diff(basis.element(2), &identity(2)) < 1e-15);
    }

    #[test]
    fn expand_field_evolution() {
        let bt = PI / 3.0;
        let u = sigma_z_field(bt);
        let coeffs = expand(u.matrix(), &pauli_basis_identity(1).unwrap()).unwrap();
        let expected = [c(bt.cos(), 0.0), ZERO, ZERO, c(0.0, -bt.sin())];
        for (got, want) in coeffs.coeffs.iter().zip(expected) {
            assert!((got - want).norm() < 1e-12);
        }
        assert!((coeffs.coeffs[0].re - 0.5).abs() < 1e-12);
        assert!((coeffs.coeffs[3].im + 0.8660254037844386).abs() < 1e-12);
    }

    #[test]
    fn expand_prefactor_in_own_basis() {
        let u0 = sigma_z_field(0.4);
        let coeffs = expand(u0.matrix(), &pauli_basis(&u0).unwrap()).unwrap();
        assert!((coeffs.coeffs[0] - ONE).norm() < 1e-12);
        assert!(coeffs.coeffs[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn expand_hadamard() {
        let h = (pauli(1) + pauli(3)).map(|v| v * FRAC_1_SQRT_2);
        let coeffs = expand(&h, &pauli_basis_identity(1).unwrap()).unwrap();
        let expected = [0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        for (got, want) in coeffs.coeffs.iter().zip(expected) {
            assert!((got - C64::from(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn expand_rejects_dimension_mismatch() {
        let basis = pauli_basis_identity(1).unwrap();
        assert!(matches!(expand(&identity(3), &basis), Err(Error::DimensionMismatch { .. })));
        let coeffs = ExpansionCoefficients { dim: 3, coeffs: vec![ZERO; 9] };
        assert!(reconstruct(&coeffs, &basis).is_err());
    }

    #[test]
    fn reconstruct_unit_vector_gives_element_zero() {
        let basis = pauli_basis(&sigma_z_field(1.1)).unwrap();
        let coeffs = ExpansionCoefficients { dim: 2, coeffs: vec![ONE, ZERO, ZERO, ZERO] };
        assert!(max_abs_diff(&reconstruct(&coeffs, &basis).unwrap(), basis.element(0)) < 1e-15);
    }

    #[test]
    fn reconstruct_round_trip_random_unitaries() {
        let mut rng = seeded(2024);
        for d in [2usize, 3, 4] {
            let basis =
                if d == 3 { weyl_basis(3, None).unwrap() } else { pauli_basis(&UnitaryOperator::identity(d)).unwrap() };
            for _ in 0..100 {
                let u = haar_unitary(d, &mut rng);
                let coeffs = expand(&u, &basis).unwrap();
                assert!((coeffs.norm_sqr() - 1.0).abs() < 1e-10);
                assert!(max_abs_diff(&reconstruct(&coeffs, &basis).unwrap(), &u) < 1e-10);
            }
        }
    }

    #[test]
    fn superposition_of_unitaries_is_not_unitary() {
        let basis = pauli_basis_identity(1).unwrap();
        let s = C64::from(FRAC_1_SQRT_2);
        let coeffs = ExpansionCoefficients { dim: 2, coeffs: vec![s, s, ZERO, ZERO] };
        let m = reconstruct(&coeffs, &basis).unwrap();
        assert!(!is_unitary(&m, STRUCT_TOL));
    }

    #[test]
    fn rotate_by_identity_is_noop() {
        let basis = weyl_basis(3, None).unwrap();
        let rotated = rotate_basis(&basis, &BasisRotation::identity(9)).unwrap();
        for (a, b) in basis.elements().iter().zip(rotated.elements()) {
            assert!(max_abs_diff(a, b) < 1e-15);
        }
        assert!(rotated.is_unitary());
    }

    #[test]
    fn hadamard_block_rotation_breaks_unitarity_only() {
        let basis = pauli_basis_identity(1).unwrap();
        let s = C64::from(FRAC_1_SQRT_2);
        let mut k = identity(4);
        k[(0, 0)] = s;
        k[(0, 1)] = s;
        k[(1, 0)] = s;
        k[(1, 1)] = -s;
        let rotated = rotate_basis(&basis, &BasisRotation::new(k).unwrap()).unwrap();
        let expected = (identity(2) + pauli(1)).map(|v| v * FRAC_1_SQRT_2);
        assert!(max_abs_diff(rotated.element(0), &expected) < 1e-15);
        assert!(!rotated.is_unitary());
        assert!(rotated.gram_deviation() < 1e-10);
        assert_eq!(rotated.family(), BasisFamily::Rotated);
    }

    #[test]
    fn random_rotation_conserves_total_norm() {
        let basis = pauli_basis_identity(1).unwrap();
        let k = BasisRotation::new(haar_unitary(4, &mut seeded(8))).unwrap();
        let rotated = rotate_basis(&basis, &k).unwrap();
        let total: f64 = rotated.elements().iter().map(frobenius_sq).sum();
        assert!((total - 8.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_rejects_non_unitary_k() {
        let mut k = identity(4);
        k[(0, 1)] = ONE;
        assert!(matches!(BasisRotation::new(k), Err(Error::NotUnitary { .. })));
        let basis = pauli_basis_identity(1).unwrap();
        assert!(rotate_basis(&basis, &BasisRotation::identity(9)).is_err());
    }

    #[test]
    fn custom_basis_validation() {
        let ok = OperatorBasis::from_elements((0..4).map(pauli).collect(), None).unwrap();
        assert_eq!(ok.family(), BasisFamily::Custom);
        let mut bad: Vec<CMatrix> = (0..4).map(pauli).collect();
        bad[1] = identity(2);
        assert!(matches!(OperatorBasis::from_elements(bad, None), Err(Error::NotOrthogonal { .. })));
    }
}

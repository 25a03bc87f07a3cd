//! Dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`. Composite systems are
//! always laid out as Kronecker products with the first factor most
//! significant, so a bipartite index is `i * d_b + j`, and `vec` means
//! row-major flattening (which matches that convention: `vec(M)[i*d+j] = M_ij`).

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for structural checks (unitarity, orthogonality, reconstruction).
pub const STRUCT_TOL: f64 = 1e-10;

/// Eigenvalues below this are treated as outside the support.
pub const SUPPORT_TRIM: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Builds a matrix from nested rows of complex entries.
pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Kronecker product of a sequence of matrices, left to right.
pub fn kron_all<'a, It>(factors: It) -> CMatrix
where
    It: IntoIterator<Item = &'a CMatrix>,
{
    factors.into_iter().fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Hilbert–Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Entrywise max of `|U†U − I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.ncols();
    max_abs_diff(&(m.adjoint() * m), &identity(n))
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && unitarity_deviation(m) <= tol
}

pub fn matrix_power(m: &CMatrix, k: usize) -> CMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Row-major flattening.
pub fn vec_row_major(m: &CMatrix) -> CVector {
    let (r, c) = m.shape();
    CVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unvec_row_major(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Discrete Fourier matrix whose column `k` is `(1/√d) Σ_j ζ^{jk} |j⟩`,
/// `ζ = exp(2πi/d)`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| C64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
}

pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64);
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh_desc(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Singular value decomposition `M = U diag(s) V†` with `s` sorted descending.
pub fn svd_desc(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("svd u requested");
    let v_t = svd.v_t.expect("svd v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_sorted = CMatrix::from_fn(v_t.ncols(), order.len(), |i, j| v_t[(order[j], i)].conj());
    (u_sorted, s, v_sorted)
}

/// Square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh_desc(m);
    let diag =
        CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::from(v.max(0.0).sqrt()))));
    &vecs * diag * vecs.adjoint()
}

/// Shannon entropy in bits; entries at or below [`SUPPORT_TRIM`] are ignored.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > SUPPORT_TRIM).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

pub fn von_neumann_entropy_bits(rho: &CMatrix) -> f64 {
    shannon_entropy_bits(&eigh_desc(rho).0)
}

/// Entanglement entropy (bits) of a pure bipartite state on `d_a ⊗ d_b`.
pub fn entanglement_entropy(psi: &CVector, d_a: usize, d_b: usize) -> f64 {
    let m = unvec_row_major(psi, d_a, d_b);
    let (_, s, _) = svd_desc(&m);
    let norm: f64 = s.iter().map(|x| x * x).sum();
    let p: Vec<f64> = s.iter().map(|x| x * x / norm).collect();
    shannon_entropy_bits(&p)
}

/// Traces out the second factor of a density matrix on `d_a ⊗ d_b`.
pub fn partial_trace_second(rho: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_a, d_a, |i, j| (0..d_b).fold(ZERO, |acc, k| acc + rho[(i * d_b + k, j * d_b + k)]))
}

/// Traces out the first factor of a density matrix on `d_a ⊗ d_b`.
pub fn partial_trace_first(rho: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_b, d_b, |i, j| (0..d_a).fold(ZERO, |acc, k| acc + rho[(k * d_b + i, k * d_b + j)]))
}

/// Reduced density matrix of a pure state on `⊗ dims`, keeping the listed
/// subsystems in the given order.
pub fn reduced_density(psi: &CVector, dims: &[usize], keep: &[usize]) -> CMatrix {
    let n = dims.len();
    let total: usize = dims.iter().product();
    assert_eq!(psi.len(), total, "state length does not match dims");
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // strides of each subsystem in the flat index
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offset = |subsystems: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &s in subsystems.iter().rev() {
            off += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        off
    };
    // psi reshaped as keep_dim x traced_dim
    let m = CMatrix::from_fn(keep_dim, traced_dim, |a, b| psi[offset(keep, a) + offset(&traced, b)]);
    &m * m.adjoint()
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn density(psi: &CVector) -> CMatrix {
    outer(psi, psi)
}

/// Canonical maximally entangled vector `(1/√d) Σ_j |jj⟩`.
pub fn psi_plus(d: usize) -> CVector {
    let norm = 1.0 / (d as f64).sqrt();
    let mut v = CVector::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = C64::from(norm);
    }
    v
}

/// Deterministic orthonormal basis for the column span of `span`
/// (assumed orthonormal columns): project `e_0, e_1, …` onto the span in
/// order and Gram–Schmidt the survivors. Independent of the arbitrary
/// rotation of `span` inside its subspace.
pub fn canonical_span_basis(span: &CMatrix) -> CMatrix {
    let (n, r) = span.shape();
    if r == 0 {
        return CMatrix::zeros(n, 0);
    }
    let proj = span * span.adjoint();
    let mut chosen: Vec<CVector> = Vec::with_capacity(r);
    for k in 0..n {
        if chosen.len() == r {
            break;
        }
        let mut v: CVector = proj.column(k).into_owned();
        for _ in 0..2 {
            for q in &chosen {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            chosen.push(v / C64::from(norm));
        }
    }
    CMatrix::from_columns(&chosen)
}

/// Extends the orthonormal columns of `iso` to a full unitary by
/// Gram–Schmidt over the computational basis.
pub fn complete_to_unitary(iso: &CMatrix) -> CMatrix {
    let n = iso.nrows();
    let mut cols: Vec<CVector> = iso.column_iter().map(|c| c.into_owned()).collect();
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[k] = ONE;
        for _ in 0..2 {
            for q in &cols {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / C64::from(norm));
        }
    }
    CMatrix::from_columns(&cols)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<It: IntoIterator<Item = f64>>(values: It) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Pauli matrices in the order `(I, σx, σy, σz)`.
pub fn pauli(index: usize) -> CMatrix {
    match index {
        0 => identity(2),
        1 => from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        2 => from_rows(&[vec![ZERO, -I], vec![I, ZERO]]),
        3 => from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]]),
        _ => panic!("pauli index {index} out of range"),
    }
}

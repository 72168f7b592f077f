//! Dense complex matrices for small bipartite systems.
//!
//! Everything here works on row-major `dim × dim` complex matrices with
//! `dim ≤ 16`. Joint indices of a bipartite system are A-major: the basis
//! state `|a⟩⊗|b⟩` sits at index `a·d_B + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest total Hilbert-space dimension accepted by the validators.
pub const MAX_DIM: usize = 16;

/// Absolute tolerance for Hermiticity, unit trace and the PSD clip window.
pub const DENSITY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    row: r,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|k⟩⟨k|` for an arbitrary (not necessarily normalized) ket.
    pub fn outer(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest element of `|H - H†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `⟨k|M|k⟩`.
    pub fn sandwich(&self, ket: &[C64]) -> C64 {
        assert_eq!(ket.len(), self.dim);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.dim {
                row += self[(i, j)] * ket[j];
            }
            acc += ket[i].conj() * row;
        }
        acc
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim {
            for k in 0..self.dim {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product: `(x⊗y)[(i·dy+k),(j·dy+l)] = x[i,j]·y[k,l]`.
pub fn tensor_product(x: &CMatrix, y: &CMatrix) -> CMatrix {
    let dy = y.dim;
    CMatrix::from_fn(x.dim * dy, |r, s| {
        x[(r / dy, s / dy)] * y[(r % dy, s % dy)]
    })
}

/// Tensor product of two kets, A-major.
pub fn tensor_ket(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter()
        .flat_map(|&a| y.iter().map(move |&b| a * b))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a raw joint matrix with the given subsystem dimensions.
pub fn partial_trace_matrix(mat: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    if da * db != mat.dim {
        return Err(Error::DimMismatch {
            expected: da * db,
            got: mat.dim,
        });
    }
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, |i, j| {
            (0..db).map(|b| mat[(i * db + b, j * db + b)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, |k, l| {
            (0..da).map(|a| mat[(a * db + k, a * db + l)]).sum()
        }),
    })
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl EigResult {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn hermitian_eig(h: &CMatrix) -> Result<EigResult> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = h.hermitian_deviation();
    if deviation > DENSITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.dim;
    if n == 1 {
        return Ok(EigResult {
            eigenvalues: vec![h[(0, 0)].re],
            eigenvectors: CMatrix::identity(1),
        });
    }
    let eig = SymmetricEigen::new(h.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues (descending) of the 2×2 Hermitian matrix `[[a, b], [b*, d]]`.
#[inline]
pub(crate) fn eigenvalues_2x2(a: f64, d: f64, b: C64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    (mean + r, mean - r)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    Ok(hermitian_eig(h)?.reconstruct_with(f))
}

/// A validated bipartite density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: (usize, usize),
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == (2, 2)
    }

    pub fn partial_trace(&self, keep: Subsystem) -> CMatrix {
        partial_trace_matrix(&self.mat, self.dims, keep).expect("validated dims")
    }

    pub fn marginal_a(&self) -> CMatrix {
        self.partial_trace(Subsystem::A)
    }

    pub fn marginal_b(&self) -> CMatrix {
        self.partial_trace(Subsystem::B)
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// The same state with the roles of A and B exchanged.
    pub fn swap_subsystems(&self) -> Self {
        let (da, db) = self.dims;
        let perm = |r: usize| {
            let (b, a) = (r / da, r % da);
            a * db + b
        };
        let mat = CMatrix::from_fn(da * db, |r, s| self.mat[(perm(r), perm(s))]);
        Self {
            dims: (db, da),
            mat,
        }
    }

    /// `U ρ U†` for a unitary `U` on the joint space.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        let mat = &(u * &self.mat) * &u.adjoint();
        Self {
            dims: self.dims,
            mat: mat.hermitian_part(),
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized joint ket.
    pub fn from_ket(ket: &[C64], dims: (usize, usize)) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        let unit: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        validate_density_matrix(CMatrix::outer(&unit), dims)
    }

    /// Wraps a matrix known to be a valid state. Only for internal
    /// constructions that preserve validity (convex mixtures, products).
    pub(crate) fn new_unchecked(mat: CMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(mat.dim, dims.0 * dims.1);
        Self { dims, mat }
    }
}

/// Checks that `mat` is a density matrix on a `d_A × d_B` system.
///
/// Eigenvalues in `[-1e-10, 0)` are clipped to zero and the matrix is
/// renormalized; anything more negative is rejected.
pub fn validate_density_matrix(mat: CMatrix, dims: (usize, usize)) -> Result<DensityMatrix> {
    if !mat.is_finite() {
        return Err(Error::NonFinite);
    }
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != mat.dim {
        return Err(Error::DimMismatch {
            expected: da * db,
            got: mat.dim,
        });
    }
    if mat.dim > MAX_DIM {
        return Err(Error::TooLarge {
            dim: mat.dim,
            max: MAX_DIM,
        });
    }
    let deviation = mat.hermitian_deviation();
    if deviation > DENSITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let tr = mat.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::TraceNotOne { trace: tr.re });
    }
    let herm = mat.hermitian_part();
    let eig = hermitian_eig(&herm)?;
    let min = *eig.eigenvalues.last().expect("non-empty");
    if min < -DENSITY_TOL {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    let mat = if min < 0.0 {
        let clipped: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0)).sum();
        eig.reconstruct_with(|l| l.max(0.0) / clipped).hermitian_part()
    } else {
        herm
    };
    Ok(DensityMatrix { dims, mat })
}

pub mod pauli {
    //! Single-qubit Pauli matrices.
    use super::{c, CMatrix};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn y() -> CMatrix {
        CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// `[σ_x, σ_y, σ_z]`.
    pub fn all() -> [CMatrix; 3] {
        [x(), y(), z()]
    }
}

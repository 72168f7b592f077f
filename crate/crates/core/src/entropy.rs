//! Classical and quantum entropic quantities, in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, partial_trace_matrix, CMatrix, DensityMatrix, Subsystem, DENSITY_TOL};

/// Probabilities below this are treated as exactly zero.
pub const ZERO_PROB: f64 = 1e-14;

const SUM_TOL: f64 = 1e-9;

/// `-p log₂ p` with `0·log 0 = 0`.
#[inline]
pub fn eta(p: f64) -> f64 {
    if p <= ZERO_PROB {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of a slice, no validation.
#[inline]
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| eta(p)).sum()
}

/// Binary entropy `h(x)`.
pub fn binary_entropy(x: f64) -> f64 {
    eta(x) + eta(1.0 - x)
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("empty".into()));
    }
    if let Some(p) = probs
        .iter()
        .find(|p| !p.is_finite() || **p < -SUM_TOL || **p > 1.0 + SUM_TOL)
    {
        return Err(Error::InvalidProbabilities(format!("entry {p} outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("sum is {total}")));
    }
    Ok(())
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        Ok(Self(probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn shannon_entropy(p: &ProbVector) -> f64 {
    entropy_bits(p.as_slice())
}

/// A joint distribution `p_ab` stored row-major (`a` indexes rows).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n_a: usize,
    n_b: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(n_a: usize, n_b: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != n_a * n_b {
            return Err(Error::DimMismatch {
                expected: n_a * n_b,
                got: table.len(),
            });
        }
        check_probs(&table)?;
        Ok(Self {
            n_a,
            n_b,
            table: table.into_iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_a = rows.len();
        let n_b = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_b) {
            return Err(Error::InvalidProbabilities("ragged table".into()));
        }
        Self::new(n_a, n_b, rows.concat())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.table[a * self.n_b + b]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.table.chunks(self.n_b).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.n_b)
            .map(|b| (0..self.n_a).map(|a| self.get(a, b)).sum())
            .collect()
    }

    /// `p_{b|a}`; `None` when `p_a` is zero.
    pub fn conditional_b_given_a(&self, a: usize) -> Option<Vec<f64>> {
        let row = &self.table[a * self.n_b..(a + 1) * self.n_b];
        let pa: f64 = row.iter().sum();
        (pa > ZERO_PROB).then(|| row.iter().map(|p| p / pa).collect())
    }

    /// Product of the marginals `p_a p_b`, same shape.
    pub fn product_of_marginals(&self) -> Self {
        let pa = self.marginal_a();
        let pb = self.marginal_b();
        let table = pa.iter().flat_map(|&x| pb.iter().map(move |&y| x * y)).collect();
        Self {
            n_a: self.n_a,
            n_b: self.n_b,
            table,
        }
    }

    pub fn transpose(&self) -> Self {
        let table = (0..self.n_b)
            .flat_map(|b| (0..self.n_a).map(move |a| (a, b)))
            .map(|(a, b)| self.get(a, b))
            .collect();
        Self {
            n_a: self.n_b,
            n_b: self.n_a,
            table,
        }
    }
}

/// Classical entropies of a joint distribution, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInfoTable {
    pub h_a: f64,
    pub h_b: f64,
    pub h_ab: f64,
    pub h_b_given_a: f64,
    pub h_a_given_b: f64,
    pub mutual_info: f64,
}

pub fn classical_info_table(p: &JointDistribution) -> ClassicalInfoTable {
    let h_a = entropy_bits(&p.marginal_a());
    let h_b = entropy_bits(&p.marginal_b());
    let h_ab = entropy_bits(p.table());
    ClassicalInfoTable {
        h_a,
        h_b,
        h_ab,
        h_b_given_a: h_ab - h_a,
        h_a_given_b: h_ab - h_b,
        mutual_info: h_a + h_b - h_ab,
    }
}

/// Quantum entropies of a bipartite state, in bits. Conditional entropies
/// may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumInfoTable {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub s_b_given_a: f64,
    pub s_a_given_b: f64,
    pub mutual_info: f64,
}

/// Entropy of the spectrum of a Hermitian matrix, without validating it
/// as a state.
pub(crate) fn spectral_entropy(h: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(h)?;
    Ok(eig.eigenvalues.iter().map(|&l| eta(l)).sum())
}

/// `-tr(ρ log₂ ρ)`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let state = crate::qmat::validate_density_matrix(rho.clone(), (rho.dim(), 1))?;
    spectral_entropy(state.matrix())
}

pub fn quantum_info_table(rho: &DensityMatrix) -> QuantumInfoTable {
    let s_ab = spectral_entropy(rho.matrix()).expect("validated state");
    let s_a = spectral_entropy(&rho.marginal_a()).expect("validated state");
    let s_b = spectral_entropy(&rho.marginal_b()).expect("validated state");
    QuantumInfoTable {
        s_a,
        s_b,
        s_ab,
        s_b_given_a: s_ab - s_a,
        s_a_given_b: s_ab - s_b,
        mutual_info: s_a + s_b - s_ab,
    }
}

/// `S(ρ‖σ) = -S(ρ) - tr(ρ log₂ σ)`.
///
/// Fails with [`Error::SupportViolation`] when `ρ` has weight on the kernel
/// of `σ` (eigenvalue threshold `1e-10`).
pub fn quantum_relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let r = hermitian_eig(rho)?;
    let s = hermitian_eig(sigma)?;
    let n = rho.dim();
    let mut cross = 0.0;
    for j in 0..n {
        let sj = s.eigenvalues[j];
        let sv = s.eigenvector(j);
        // ⟨s_j|ρ|s_j⟩ = Σ_i λ_i |⟨r_i|s_j⟩|²
        let weight: f64 = (0..n)
            .map(|i| {
                let overlap: num_complex::Complex64 = (0..n)
                    .map(|k| r.eigenvectors[(k, i)].conj() * sv[k])
                    .sum();
                r.eigenvalues[i].max(0.0) * overlap.norm_sqr()
            })
            .sum();
        if sj <= DENSITY_TOL {
            if weight > DENSITY_TOL {
                return Err(Error::SupportViolation);
            }
            continue;
        }
        cross -= weight * sj.log2();
    }
    let s_rho: f64 = r.eigenvalues.iter().map(|&l| eta(l)).sum();
    Ok(cross - s_rho)
}

/// `H(p‖q) = Σ p log₂(p/q)`.
pub fn classical_relative_information(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    relative_information_raw(p.as_slice(), q.as_slice())
}

pub(crate) fn relative_information_raw(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut acc = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        if pj <= ZERO_PROB {
            continue;
        }
        if qj <= ZERO_PROB {
            return Err(Error::SupportViolation);
        }
        acc += pj * (pj / qj).log2();
    }
    Ok(acc)
}

/// `S(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn mutual_information_as_relative_entropy(rho: &DensityMatrix) -> Result<f64> {
    let rho_a = partial_trace_matrix(rho.matrix(), rho.dims(), Subsystem::A)?;
    let rho_b = partial_trace_matrix(rho.matrix(), rho.dims(), Subsystem::B)?;
    quantum_relative_entropy(rho.matrix(), &crate::qmat::tensor_product(&rho_a, &rho_b))
}

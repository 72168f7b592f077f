//! Two-qubit concurrence and entanglement of formation.

use serde::{Deserialize, Serialize};

use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, hermitian_function, pauli, tensor_product, CMatrix, DensityMatrix};

/// Negative parts of the `ρρ̃` spectrum above this are treated as rounding.
const NEGATIVE_CLIP: f64 = -1e-10;

/// `ρρ̃` eigenvalues below this are rounding noise of exact zeros; their
/// square roots (~1e-8) would otherwise leak into the concurrence.
const EIGEN_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementPair {
    pub concurrence: f64,
    pub eof: f64,
}

/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    let (da, db) = rho.dims();
    if (da, db) != (2, 2) {
        return Err(Error::WrongDimensions(da, db));
    }
    let yy = tensor_product(&pauli::y(), &pauli::y());
    Ok(&(&yy * &rho.matrix().conj()) * &yy)
}

/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λ_j²` the eigenvalues of `ρρ̃`.
///
/// The spectrum is taken from the Hermitian `√ρ ρ̃ √ρ`, which shares it:
/// non-Hermitian Schur iteration stalls on product states, where `ρρ̃` is a
/// multiple of the identity.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let flipped = spin_flip(rho)?;
    let root = hermitian_function(rho.matrix(), |l| l.max(0.0).sqrt())?;
    let sandwiched = (&(&root * &flipped) * &root).hermitian_part();
    let eig = hermitian_eig(&sandwiched)?;
    let mut lambdas = [0.0; 4];
    for (l, &re) in lambdas.iter_mut().zip(&eig.eigenvalues) {
        if re < NEGATIVE_CLIP {
            return Err(Error::NegativeEigenvalue { value: re });
        }
        *l = if re < EIGEN_FLOOR { 0.0 } else { re.sqrt() };
    }
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// `h((1 + √(1 − C²)) / 2)` for a concurrence `C ∈ [0, 1]`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt()))
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

pub fn entanglement_pair(rho: &DensityMatrix) -> Result<EntanglementPair> {
    let concurrence = concurrence(rho)?;
    Ok(EntanglementPair {
        concurrence,
        eof: eof_from_concurrence(concurrence),
    })
}

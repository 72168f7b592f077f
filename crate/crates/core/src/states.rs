//! State factories: random density matrices, Bell states, the two-qubit
//! Pauli (Bloch) form, the product/Bell-diagonal mixture family,
//! classical-quantum ensembles and the JSON state format.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::ProbVector;
use crate::error::{Error, Result};
use crate::meas::{qubit_ket, SymmetricKind};
use crate::qmat::{c, pauli, tensor_product, validate_density_matrix, CMatrix, DensityMatrix, Subsystem, C64, MAX_DIM};
use crate::random::{ginibre_gram, random_simplex, random_unitary, rng_from_seed};

/// Hilbert–Schmidt random state `G G† / tr(G G†)` with `G` of shape
/// `(d_A d_B) × rank`; `rank = None` means full rank.
pub fn random_density<R: Rng + ?Sized>(dims: (usize, usize), rank: Option<usize>, rng: &mut R) -> Result<DensityMatrix> {
    let dim = dims.0 * dims.1;
    if dim > MAX_DIM {
        return Err(Error::TooLarge { dim, max: MAX_DIM });
    }
    let rank = rank.unwrap_or(dim);
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let g = ginibre_gram(dim, rank, rng);
    let tr = g.trace().re;
    validate_density_matrix(g.scale(1.0 / tr), dims)
}

pub fn random_density_seeded(dims: (usize, usize), rank: Option<usize>, seed: u64) -> Result<DensityMatrix> {
    random_density(dims, rank, &mut rng_from_seed(seed))
}

/// Random pure two-qubit state.
pub fn random_pure_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    random_density((2, 2), Some(1), rng).expect("rank one is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub fn bell_state(which: BellKind) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let ket = match which {
        BellKind::PhiPlus => [c(s, 0.0), z, z, c(s, 0.0)],
        BellKind::PhiMinus => [c(s, 0.0), z, z, c(-s, 0.0)],
        BellKind::PsiPlus => [z, c(s, 0.0), c(s, 0.0), z],
        BellKind::PsiMinus => [z, c(s, 0.0), c(-s, 0.0), z],
    };
    DensityMatrix::from_ket(&ket, (2, 2)).expect("normalized ket")
}

/// `ρ = ¼(I + a·σ⊗I + I⊗b·σ + Σ c_jk σ_j⊗σ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochForm {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Matrix3<f64>,
}

impl BlochForm {
    /// Bell-diagonal form with zero local vectors.
    pub fn bell_diagonal(c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            a: Vector3::zeros(),
            b: Vector3::zeros(),
            c: Matrix3::from_diagonal(&Vector3::new(c1, c2, c3)),
        }
    }

    /// Pure product state with unit local vectors `a`, `b` (so `c = a bᵀ`).
    pub fn pure_product(a: Vector3<f64>, b: Vector3<f64>) -> Self {
        Self { a, b, c: a * b.transpose() }
    }
}

fn bloch_operator(bf: &BlochForm) -> CMatrix {
    let id = pauli::identity();
    let s = pauli::all();
    let mut m = CMatrix::identity(4);
    for j in 0..3 {
        m = &m + &tensor_product(&s[j], &id).scale(bf.a[j]);
        m = &m + &tensor_product(&id, &s[j]).scale(bf.b[j]);
        for k in 0..3 {
            m = &m + &tensor_product(&s[j], &s[k]).scale(bf.c[(j, k)]);
        }
    }
    m.scale(0.25)
}

/// Fails with `NegativeEigenvalue` for non-physical parameters.
pub fn from_bloch(bf: &BlochForm) -> Result<DensityMatrix> {
    validate_density_matrix(bloch_operator(bf), (2, 2))
}

pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochForm> {
    let (da, db) = rho.dims();
    if (da, db) != (2, 2) {
        return Err(Error::WrongDimensions(da, db));
    }
    let id = pauli::identity();
    let s = pauli::all();
    let m = rho.matrix();
    let expect = |op: &CMatrix| op.trace_product(m).re;
    Ok(BlochForm {
        a: Vector3::from_fn(|j, _| expect(&tensor_product(&s[j], &id))),
        b: Vector3::from_fn(|j, _| expect(&tensor_product(&id, &s[j]))),
        c: Matrix3::from_fn(|j, k| expect(&tensor_product(&s[j], &s[k]))),
    })
}

/// Local vector of the product end of the mixture family, on subsystem A.
pub fn fig5_product_a() -> Vector3<f64> {
    Vector3::new(1.0, 0.0, 0.0)
}

/// Local vector of the product end of the mixture family, on subsystem B.
pub fn fig5_product_b() -> Vector3<f64> {
    Vector3::new(std::f64::consts::FRAC_1_SQRT_2, -0.5, 0.5)
}

/// Correlation diagonal of the Bell-diagonal end of the mixture family.
pub const FIG5_BELL_DIAGONAL: [f64; 3] = [-0.9, -0.8, -0.7];

/// `ρ(ε) = (1−ε) ρ_product + ε ρ_BellDiagonal`.
pub fn fig5_family(eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("mixing weight {eps} outside [0, 1]")));
    }
    let prod = bloch_operator(&BlochForm::pure_product(fig5_product_a(), fig5_product_b()));
    let [c1, c2, c3] = FIG5_BELL_DIAGONAL;
    let bd = bloch_operator(&BlochForm::bell_diagonal(c1, c2, c3));
    validate_density_matrix(&prod.scale(1.0 - eps) + &bd.scale(eps), (2, 2))
}

/// Ensemble of pure qubit states `½(I + n_j·σ)` with probabilities `p_j`,
/// tagged by orthonormal states of a `d_B`-dimensional register.
#[derive(Debug, Clone, PartialEq)]
pub struct CqEnsemble {
    probs: ProbVector,
    vectors: Vec<Vector3<f64>>,
}

impl CqEnsemble {
    pub fn new(probs: ProbVector, vectors: Vec<Vector3<f64>>) -> Result<Self> {
        if probs.len() != vectors.len() {
            return Err(Error::DimMismatch {
                expected: probs.len(),
                got: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| (v.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::OutOfRange(format!("Bloch vector of length {}", v.norm())));
        }
        Ok(Self { probs, vectors })
    }

    pub fn probs(&self) -> &[f64] {
        self.probs.as_slice()
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.vectors
    }

    pub fn d_b(&self) -> usize {
        self.vectors.len()
    }

    /// `Σ p_j n_j`.
    pub fn mean_vector(&self) -> Vector3<f64> {
        self.probs()
            .iter()
            .zip(&self.vectors)
            .fold(Vector3::zeros(), |acc, (p, n)| acc + *p * n)
    }

    /// Pairs `(p_j, n_j)`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &Vector3<f64>)> {
        self.probs().iter().copied().zip(&self.vectors)
    }
}

fn symmetric_ensemble(kind: SymmetricKind) -> CqEnsemble {
    CqEnsemble::new(ProbVector::uniform(kind.len()), kind.canonical_vertices()).expect("unit vertices")
}

/// Three equiprobable states at the vertices of an equilateral triangle.
pub fn triangle_ensemble() -> CqEnsemble {
    symmetric_ensemble(SymmetricKind::Trine)
}

/// Four equiprobable states at the vertices of a regular tetrahedron.
pub fn tetrahedron_ensemble() -> CqEnsemble {
    symmetric_ensemble(SymmetricKind::Tetrahedron)
}

/// `Σ p_j ρ_j ⊗ |j⟩⟨j|` with dims `(2, d_B)`.
pub fn cq_state(ens: &CqEnsemble) -> Result<DensityMatrix> {
    let d_b = ens.d_b();
    let mut m = CMatrix::zeros(2 * d_b);
    for (j, (p, n)) in ens.iter().enumerate() {
        let rho_j = CMatrix::outer(&qubit_ket(n)?);
        let mut tag = CMatrix::zeros(d_b);
        tag[(j, j)] = c(1.0, 0.0);
        m = &m + &tensor_product(&rho_j, &tag).scale(p);
    }
    validate_density_matrix(m, (2, d_b))
}

/// `Σ p_ab |e_a f_b⟩⟨e_a f_b|` for random local bases and a flat-Dirichlet
/// distribution `p_ab`.
pub fn random_product_diagonal<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> Result<DensityMatrix> {
    let (da, db) = dims;
    let u = tensor_product(&random_unitary(da, rng), &random_unitary(db, rng));
    let p = random_simplex(da * db, rng);
    let diag = CMatrix::from_real_diagonal(&p);
    validate_density_matrix((&(&u * &diag) * &u.adjoint()).hermitian_part(), dims)
}

/// Classical on `classical`: `Σ_k p_k |e_k⟩⟨e_k| ⊗ ρ_k` (or the mirror),
/// with a random local basis and random full-rank conditional states.
pub fn random_classical_quantum<R: Rng + ?Sized>(
    dims: (usize, usize),
    classical: Subsystem,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let (dc, dq) = match classical {
        Subsystem::A => dims,
        Subsystem::B => (dims.1, dims.0),
    };
    let basis = random_unitary(dc, rng);
    let p = random_simplex(dc, rng);
    let mut m = CMatrix::zeros(dc * dq);
    for (k, pk) in p.iter().enumerate() {
        let proj = CMatrix::outer(&basis.column(k));
        let rho_k = random_density((dq, 1), None, rng)?.into_matrix();
        m = &m + &tensor_product(&proj, &rho_k).scale(*pk);
    }
    let rho = validate_density_matrix(m.hermitian_part(), (dc, dq))?;
    Ok(match classical {
        Subsystem::A => rho,
        Subsystem::B => rho.swap_subsystems(),
    })
}

/// JSON state: `{"dims": [d_A, d_B], "matrix": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for StateFile {
    fn from(rho: &DensityMatrix) -> Self {
        let (da, db) = rho.dims();
        Self {
            dims: [da, db],
            matrix: rho
                .matrix()
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl StateFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        let rows = self
            .matrix
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        let m = CMatrix::from_rows(rows)?;
        validate_density_matrix(m, (self.dims[0], self.dims[1]))
    }
}

pub fn read_state_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::StateFormat(e.to_string()))?;
    file.into_density()
}

pub fn write_state_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from(rho)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{quantum_info_table, von_neumann_entropy};
    use crate::qmat::hermitian_eig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn random_density_is_seed_reproducible() {
        let a = random_density_seeded((2, 2), None, 17).unwrap();
        let b = random_density_seeded((2, 2), None, 17).unwrap();
        let c = random_density_seeded((2, 2), None, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rank_one_is_pure() {
        let rho = random_density_seeded((2, 3), Some(1), 4).unwrap();
        assert!(von_neumann_entropy(rho.matrix()).unwrap() < 1e-9);
    }

    #[test]
    fn invalid_rank() {
        assert!(matches!(
            random_density_seeded((2, 2), Some(5), 1),
            Err(Error::InvalidRank { rank: 5, dim: 4 })
        ));
        assert!(random_density_seeded((2, 2), Some(0), 1).is_err());
    }

    #[test]
    fn bell_states() {
        for kind in [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus] {
            let rho = bell_state(kind);
            assert!(rho.marginal_a().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
            let t = quantum_info_table(&rho);
            assert!(t.s_ab.abs() < 1e-12);
            assert_abs_diff_eq!(t.mutual_info, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bloch_examples() {
        let mixed = from_bloch(&BlochForm::bell_diagonal(0.0, 0.0, 0.0)).unwrap();
        assert!(mixed.matrix().max_abs_diff(&CMatrix::identity(4).scale(0.25)) < 1e-15);

        let phi = from_bloch(&BlochForm::bell_diagonal(1.0, -1.0, 1.0)).unwrap();
        assert!(phi.matrix().max_abs_diff(bell_state(BellKind::PhiPlus).matrix()) < 1e-15);

        let bd = from_bloch(&BlochForm::bell_diagonal(-0.9, -0.8, -0.7)).unwrap();
        let ev = hermitian_eig(bd.matrix()).unwrap().eigenvalues;
        for (x, y) in ev.iter().zip([0.85, 0.1, 0.05, 0.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_physical_bloch_is_rejected() {
        assert!(matches!(
            from_bloch(&BlochForm::bell_diagonal(1.0, 1.0, 1.0)),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn bloch_round_trip() {
        for seed in 0..20 {
            let rho = random_density_seeded((2, 2), None, seed).unwrap();
            let bf = to_bloch(&rho).unwrap();
            let back = from_bloch(&bf).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
            let again = to_bloch(&back).unwrap();
            assert!((again.c - bf.c).abs().max() < 1e-12);
        }
        assert!(to_bloch(&random_density_seeded((2, 3), None, 0).unwrap()).is_err());
    }

    #[test]
    fn fig5_family_endpoints_and_grid() {
        let prod = fig5_family(0.0).unwrap();
        assert_abs_diff_eq!(quantum_info_table(&prod).mutual_info, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(prod.purity(), 1.0, epsilon = 1e-12);
        let bf = to_bloch(&fig5_family(1.0).unwrap()).unwrap();
        assert!((bf.c - Matrix3::from_diagonal(&Vector3::new(-0.9, -0.8, -0.7))).abs().max() < 1e-12);
        for i in 0..=100 {
            assert!(fig5_family(i as f64 / 100.0).is_ok());
        }
        assert!(fig5_family(1.5).is_err());
    }

    #[test]
    fn symmetric_ensembles() {
        let tri = triangle_ensemble();
        let v = tri.vectors();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_abs_diff_eq!(v[i].dot(&v[j]), -0.5, epsilon = 1e-12);
            }
        }
        assert!(tri.mean_vector().norm() < 1e-15);
        let tet = tetrahedron_ensemble();
        let v = tet.vectors();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_abs_diff_eq!(v[i].dot(&v[j]), -1.0 / 3.0, epsilon = 1e-12);
            }
        }
        assert!(tet.mean_vector().norm() < 1e-15);
    }

    #[test]
    fn cq_state_properties() {
        let rho = cq_state(&triangle_ensemble()).unwrap();
        assert_eq!(rho.dims(), (2, 3));
        assert!(rho.marginal_a().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-12);
        assert_abs_diff_eq!(quantum_info_table(&rho).s_ab, 3f64.log2(), epsilon = 1e-12);

        let single = CqEnsemble::new(ProbVector::uniform(1), vec![Vector3::x()]).unwrap();
        assert_abs_diff_eq!(quantum_info_table(&cq_state(&single).unwrap()).mutual_info, 0.0, epsilon = 1e-12);

        assert!(CqEnsemble::new(ProbVector::uniform(1), vec![Vector3::new(0.5, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn structured_random_states_validate() {
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            assert!(random_product_diagonal((2, 3), &mut rng).is_ok());
            let rho = random_classical_quantum((2, 3), Subsystem::B, &mut rng).unwrap();
            assert_eq!(rho.dims(), (2, 3));
        }
    }

    #[test]
    fn json_round_trip() {
        let rho = random_density_seeded((2, 2), None, 3).unwrap();
        let back = read_state_json(&write_state_json(&rho)).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!(matches!(read_state_json("{"), Err(Error::StateFormat(_))));
        let bad = r#"{"dims":[2,2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(read_state_json(bad).is_err());
    }
}

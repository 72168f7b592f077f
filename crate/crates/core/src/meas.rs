//! Local measurements: rank-one POVMs, qubit projective pairs, conditioned
//! strategies and the joint outcome distributions they induce.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Rotation3, Unit, Vector3};
use rand::Rng;

use crate::entropy::JointDistribution;
use crate::error::{Error, Result};
use crate::qmat::{c, hermitian_eig, hermitian_function, CMatrix, DensityMatrix, C64};
use crate::random::{ginibre_gram, random_unitary};

const COMPLETENESS_TOL: f64 = 1e-9;

/// Outcomes with probability below this are dropped from conditional ensembles.
pub const ZERO_OUTCOME: f64 = 1e-12;

/// Default absolute eigenvalue gap below which a marginal counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// One element `μ |m⟩⟨m|` of a rank-one POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub weight: f64,
    pub ket: Vec<C64>,
}

impl PovmElement {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::outer(&self.ket).scale(self.weight)
    }
}

/// A POVM whose elements are all weighted rank-one projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOnePovm {
    dim: usize,
    elements: Vec<PovmElement>,
}

fn completeness_error(dim: usize, elements: impl Iterator<Item = CMatrix>) -> f64 {
    let mut sum = CMatrix::zeros(dim);
    for e in elements {
        sum = &sum + &e;
    }
    sum.max_abs_diff(&CMatrix::identity(dim))
}

impl RankOnePovm {
    /// Validates weights in `(0, 1]`, normalizes kets and checks `Σ E = I`.
    pub fn new(dim: usize, elements: Vec<PovmElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut normalized = Vec::with_capacity(elements.len());
        for (i, el) in elements.into_iter().enumerate() {
            if el.ket.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: el.ket.len(),
                });
            }
            if !(el.weight > 0.0 && el.weight <= 1.0 + COMPLETENESS_TOL) {
                return Err(Error::InvalidPovm(format!("weight {} of element {i} outside (0, 1]", el.weight)));
            }
            let norm = el.ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::InvalidPovm(format!("element {i} has a zero ket")));
            }
            normalized.push(PovmElement {
                weight: el.weight.min(1.0),
                ket: el.ket.iter().map(|z| z / norm).collect(),
            });
        }
        let err = completeness_error(dim, normalized.iter().map(PovmElement::matrix));
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("completeness violated by {err:e}")));
        }
        Ok(Self {
            dim,
            elements: normalized,
        })
    }

    /// Projective measurement onto the given orthonormal basis.
    pub fn from_basis(basis: Vec<Vec<C64>>) -> Result<Self> {
        let dim = basis.len();
        Self::new(
            dim,
            basis
                .into_iter()
                .map(|ket| PovmElement { weight: 1.0, ket })
                .collect(),
        )
    }

    /// Qubit POVM with elements `(μ_a/2)(I + m_a·σ)`.
    pub fn from_qubit_bloch(weights: &[f64], vectors: &[Vector3<f64>]) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(Error::DimMismatch {
                expected: weights.len(),
                got: vectors.len(),
            });
        }
        let elements = weights
            .iter()
            .zip(vectors)
            .map(|(&weight, m)| Ok(PovmElement { weight, ket: qubit_ket(m)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(2, elements)
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

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn element_matrix(&self, i: usize) -> CMatrix {
        self.elements[i].matrix()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.weight).collect()
    }

    /// `tr(E_a ρ)` for every element.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| (e.weight * rho.sandwich(&e.ket).re).max(0.0))
            .collect()
    }

    /// Bloch vectors of the element directions (qubits only).
    pub fn bloch_vectors(&self) -> Option<Vec<Vector3<f64>>> {
        (self.dim == 2).then(|| self.elements.iter().map(|e| bloch_vector_of(&e.ket)).collect())
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            dim: self.dim,
            elements: self.elements.iter().map(PovmElement::matrix).collect(),
        }
    }
}

/// A general POVM (arbitrary rank elements).
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(dim: usize, elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        for (i, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let eig = hermitian_eig(e)?;
            if eig.eigenvalues.last().copied().unwrap_or(0.0) < -COMPLETENESS_TOL {
                return Err(Error::InvalidPovm(format!("element {i} is not positive")));
            }
        }
        let err = completeness_error(dim, elements.iter().cloned());
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("completeness violated by {err:e}")));
        }
        Ok(Self { dim, elements })
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![CMatrix::identity(dim)],
        }
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

    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.trace_product(rho).re.max(0.0))
            .collect()
    }

    /// Canonical Kraus operator `√E_a`.
    pub fn kraus(&self, a: usize) -> CMatrix {
        hermitian_function(&self.elements[a], |l| l.max(0.0).sqrt()).expect("validated element")
    }

    /// Splits every element along its eigendecomposition. Returns the
    /// rank-one refinement and, per refined outcome, its parent index.
    pub fn fine_grain(&self) -> (RankOnePovm, Vec<usize>) {
        let mut elements = Vec::new();
        let mut parent = Vec::new();
        for (a, e) in self.elements.iter().enumerate() {
            let eig = hermitian_eig(e).expect("validated element");
            for (k, &l) in eig.eigenvalues.iter().enumerate() {
                if l > ZERO_OUTCOME {
                    elements.push(PovmElement {
                        weight: l.min(1.0),
                        ket: eig.eigenvector(k),
                    });
                    parent.push(a);
                }
            }
        }
        let povm = RankOnePovm::new(self.dim, elements).expect("refinement of a valid POVM");
        (povm, parent)
    }

    /// Groups outcomes: element `k` of the result is the sum of the elements
    /// whose label is `k`.
    pub fn coarse_grain(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.elements.len() {
            return Err(Error::DimMismatch {
                expected: self.elements.len(),
                got: labels.len(),
            });
        }
        let n = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![CMatrix::zeros(self.dim); n];
        for (e, &l) in self.elements.iter().zip(labels) {
            out[l] = &out[l] + e;
        }
        if out.iter().any(|e| e.max_abs() == 0.0) {
            return Err(Error::InvalidPovm("empty coarse-grained outcome".into()));
        }
        Ok(Self {
            dim: self.dim,
            elements: out,
        })
    }
}

/// Ket with Bloch vector `m` (unit length required).
pub fn qubit_ket(m: &Vector3<f64>) -> Result<Vec<C64>> {
    let n = m.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfRange(format!("Bloch vector has length {n}")));
    }
    let theta = (m.z / n).clamp(-1.0, 1.0).acos();
    let phi = m.y.atan2(m.x);
    Ok(vec![
        c((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Bloch vector `⟨ψ|σ|ψ⟩` of a normalized qubit ket.
pub fn bloch_vector_of(ket: &[C64]) -> Vector3<f64> {
    let (a, b) = (ket[0], ket[1]);
    let off = a.conj() * b;
    Vector3::new(2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr())
}

/// Angles `(θ, φ)` of a qubit projective pair
/// `|e₀⟩ = cosθ|0⟩ + e^{iφ} sinθ|1⟩`, `|e₁⟩ = −sinθ|0⟩ + e^{iφ} cosθ|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitProjectivePair {
    pub theta: f64,
    pub phi: f64,
}

impl QubitProjectivePair {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) || !(0.0..2.0 * PI + 1e-12).contains(&phi) {
            return Err(Error::OutOfRange(format!("angles ({theta}, {phi})")));
        }
        Ok(Self { theta, phi })
    }

    #[inline]
    pub fn kets(&self) -> [[C64; 2]; 2] {
        pair_kets(self.theta, self.phi)
    }

    /// Bloch direction of `|e₀⟩`: `(sin2θ cosφ, sin2θ sinφ, cos2θ)`.
    pub fn bloch_vector(&self) -> Vector3<f64> {
        angle_direction(self.theta, self.phi)
    }

    /// Angles whose `|e₀⟩` has Bloch vector `m`.
    pub fn from_direction(m: &Vector3<f64>) -> Self {
        let m = m.normalize();
        let theta = 0.5 * m.z.clamp(-1.0, 1.0).acos();
        let phi = m.y.atan2(m.x).rem_euclid(2.0 * PI);
        Self { theta, phi }
    }
}

#[inline]
pub(crate) fn pair_kets(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, co) = theta.sin_cos();
    let ph = C64::from_polar(1.0, phi);
    [[c(co, 0.0), ph * s], [c(-s, 0.0), ph * co]]
}

#[inline]
pub(crate) fn angle_direction(theta: f64, phi: f64) -> Vector3<f64> {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Vector3::new(s2 * phi.cos(), s2 * phi.sin(), c2)
}

pub fn projective_pair_povm(angles: QubitProjectivePair) -> RankOnePovm {
    let [e0, e1] = angles.kets();
    RankOnePovm {
        dim: 2,
        elements: vec![
            PovmElement {
                weight: 1.0,
                ket: e0.to_vec(),
            },
            PovmElement {
                weight: 1.0,
                ket: e1.to_vec(),
            },
        ],
    }
}

/// Projectors onto the eigenvectors of a marginal state, plus a flag set
/// when any two eigenvalues are closer than `degeneracy_tol`.
pub fn marginal_eigenbasis_povm(rho_marg: &CMatrix, degeneracy_tol: f64) -> Result<(RankOnePovm, bool)> {
    let eig = hermitian_eig(rho_marg)?;
    let degenerate = eig
        .eigenvalues
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() < degeneracy_tol);
    let basis = (0..rho_marg.dim()).map(|k| eig.eigenvector(k)).collect();
    Ok((RankOnePovm::from_basis(basis)?, degenerate))
}

fn check_dims(rho: &DensityMatrix, da: usize, db: usize) -> Result<()> {
    let (ra, rb) = rho.dims();
    if ra != da {
        return Err(Error::DimMismatch { expected: ra, got: da });
    }
    if rb != db {
        return Err(Error::DimMismatch { expected: rb, got: db });
    }
    Ok(())
}

/// `tr_A((E ⊗ I) ρ)`, unnormalized.
pub(crate) fn reduce_with_a_operator(rho: &DensityMatrix, e: &CMatrix) -> CMatrix {
    let (da, db) = rho.dims();
    let m = rho.matrix();
    CMatrix::from_fn(db, |k, l| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..da {
            for j in 0..da {
                acc += e[(i, j)] * m[(j * db + k, i * db + l)];
            }
        }
        acc
    })
}

/// `p_ab = tr(E_a ⊗ F_b ρ)`.
pub fn joint_distribution_unconditioned(rho: &DensityMatrix, e: &RankOnePovm, f: &RankOnePovm) -> Result<JointDistribution> {
    check_dims(rho, e.dim(), f.dim())?;
    let m = rho.matrix();
    let mut table = Vec::with_capacity(e.len() * f.len());
    for ea in e.elements() {
        for fb in f.elements() {
            let ket = crate::qmat::tensor_ket(&ea.ket, &fb.ket);
            table.push((ea.weight * fb.weight * m.sandwich(&ket).re).max(0.0));
        }
    }
    let total: f64 = table.iter().sum();
    let table = table.into_iter().map(|p| p / total).collect();
    JointDistribution::new(e.len(), f.len(), table)
}

/// Conditional state of B after outcome `a` on A.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStateB {
    pub outcome: usize,
    pub p_a: f64,
    pub rho_b: CMatrix,
}

/// `ρ_{B|a} = tr_A(E_a ρ)/p_a` for every outcome with `p_a ≥ 1e-12`.
pub fn conditional_states_b(rho: &DensityMatrix, e: &RankOnePovm) -> Result<Vec<ConditionalStateB>> {
    check_dims(rho, e.dim(), rho.dims().1)?;
    conditional_states_b_general(rho, &e.to_povm())
}

pub fn conditional_states_b_general(rho: &DensityMatrix, e: &Povm) -> Result<Vec<ConditionalStateB>> {
    check_dims(rho, e.dim(), rho.dims().1)?;
    let mut out = Vec::new();
    for (a, ea) in e.elements().iter().enumerate() {
        let unnorm = reduce_with_a_operator(rho, ea);
        let p_a = unnorm.trace().re;
        if p_a < ZERO_OUTCOME {
            continue;
        }
        out.push(ConditionalStateB {
            outcome: a,
            p_a,
            rho_b: unnorm.scale(1.0 / p_a).hermitian_part(),
        });
    }
    Ok(out)
}

/// Strategy with one-way communication: outcome `a` on A selects the
/// measurement `b_povms[c_of_a[a]]` on B.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedStrategy {
    a_povm: RankOnePovm,
    c_of_a: Vec<usize>,
    b_povms: Vec<RankOnePovm>,
}

impl ConditionedStrategy {
    pub fn new(a_povm: RankOnePovm, c_of_a: Vec<usize>, b_povms: Vec<RankOnePovm>) -> Result<Self> {
        if c_of_a.len() != a_povm.len() {
            return Err(Error::InvalidStrategy(format!(
                "{} labels for {} A-outcomes",
                c_of_a.len(),
                a_povm.len()
            )));
        }
        if let Some(&bad) = c_of_a.iter().find(|&&l| l >= b_povms.len()) {
            return Err(Error::InvalidStrategy(format!("label {bad} has no B measurement")));
        }
        if let Some(db) = b_povms.first().map(RankOnePovm::dim) {
            if let Some(p) = b_povms.iter().find(|p| p.dim() != db) {
                return Err(Error::DimMismatch { expected: db, got: p.dim() });
            }
        } else {
            return Err(Error::InvalidStrategy("no B measurements".into()));
        }
        Ok(Self { a_povm, c_of_a, b_povms })
    }

    /// Strategy (b): every outcome shares one B measurement.
    pub fn unconditioned(a_povm: RankOnePovm, b_povm: RankOnePovm) -> Self {
        let n = a_povm.len();
        Self {
            a_povm,
            c_of_a: vec![0; n],
            b_povms: vec![b_povm],
        }
    }

    pub fn a_povm(&self) -> &RankOnePovm {
        &self.a_povm
    }

    pub fn label(&self, a: usize) -> usize {
        self.c_of_a[a]
    }

    pub fn b_povms(&self) -> &[RankOnePovm] {
        &self.b_povms
    }

    /// Column offset of each label's outcomes in the disjoint B alphabet.
    pub fn b_offsets(&self) -> Vec<usize> {
        self.b_povms
            .iter()
            .scan(0, |acc, p| {
                let off = *acc;
                *acc += p.len();
                Some(off)
            })
            .collect()
    }

    pub fn b_alphabet_len(&self) -> usize {
        self.b_povms.iter().map(RankOnePovm::len).sum()
    }
}

/// `p_ab = tr(E_a ⊗ F_{b|c(a)} ρ)` over the disjoint union of all B outcomes;
/// entries with `b ∉ B_{c(a)}` are zero.
pub fn joint_distribution_conditioned(rho: &DensityMatrix, s: &ConditionedStrategy) -> Result<JointDistribution> {
    check_dims(rho, s.a_povm.dim(), s.b_povms[0].dim())?;
    let offsets = s.b_offsets();
    let n_b = s.b_alphabet_len();
    let n_a = s.a_povm.len();
    let mut table = vec![0.0; n_a * n_b];
    for a in 0..n_a {
        let unnorm = reduce_with_a_operator(rho, &s.a_povm.element_matrix(a));
        let label = s.c_of_a[a];
        for (b, fb) in s.b_povms[label].elements().iter().enumerate() {
            table[a * n_b + offsets[label] + b] = (fb.weight * unnorm.sandwich(&fb.ket).re).max(0.0);
        }
    }
    let total: f64 = table.iter().sum();
    let table = table.into_iter().map(|p| p / total).collect();
    JointDistribution::new(n_a, n_b, table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetricKind {
    Trine,
    Tetrahedron,
}

impl SymmetricKind {
    /// Unit vertices: the trine lies in the x–z plane with its first vertex
    /// on +z; the tetrahedron also has a vertex on +z.
    pub fn canonical_vertices(self) -> Vec<Vector3<f64>> {
        match self {
            SymmetricKind::Trine => (0..3)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / 3.0;
                    Vector3::new(a.sin(), 0.0, a.cos())
                })
                .collect(),
            SymmetricKind::Tetrahedron => {
                let s = (2.0f64).sqrt();
                let t = (2.0f64 / 3.0).sqrt();
                vec![
                    Vector3::new(0.0, 0.0, 1.0),
                    Vector3::new(2.0 * s / 3.0, 0.0, -1.0 / 3.0),
                    Vector3::new(-s / 3.0, t, -1.0 / 3.0),
                    Vector3::new(-s / 3.0, -t, -1.0 / 3.0),
                ]
            }
        }
    }

    pub fn len(self) -> usize {
        match self {
            SymmetricKind::Trine => 3,
            SymmetricKind::Tetrahedron => 4,
        }
    }

    /// A rotation taking the canonical vertex set onto its negation.
    pub fn dual_orientation(self) -> Rotation3<f64> {
        match self {
            SymmetricKind::Trine => Rotation3::from_axis_angle(&Vector3::y_axis(), PI),
            SymmetricKind::Tetrahedron => {
                let v = self.canonical_vertices();
                let axis = Unit::new_normalize(v[0] + v[1]);
                Rotation3::from_axis_angle(&axis, FRAC_PI_2)
            }
        }
    }
}

/// Trine (weights 2/3) or tetrahedron (weights 1/2) POVM with Bloch vectors
/// at the rotated canonical vertices.
pub fn symmetric_qubit_povm(kind: SymmetricKind, orientation: &Rotation3<f64>) -> RankOnePovm {
    let vertices: Vec<Vector3<f64>> = kind
        .canonical_vertices()
        .iter()
        .map(|v| orientation * v)
        .collect();
    let weight = 2.0 / kind.len() as f64;
    RankOnePovm::from_qubit_bloch(&vec![weight; kind.len()], &vertices).expect("symmetric POVM is complete")
}

/// Random rank-one POVM with `n_outcomes ≥ dim` elements, from the rows of
/// a Haar-random isometry.
pub fn random_rank_one_povm<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rng: &mut R) -> RankOnePovm {
    assert!(n_outcomes >= dim);
    let u = random_unitary(n_outcomes, rng);
    let elements = (0..n_outcomes)
        .map(|j| {
            let w: Vec<C64> = (0..dim).map(|k| u[(j, k)].conj()).collect();
            let weight = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
            PovmElement { weight, ket: w }
        })
        .filter(|e| e.weight > 1e-14)
        .collect();
    RankOnePovm::new(dim, elements).expect("isometry rows are complete")
}

/// Random general POVM: `E_j = S^{-1/2} A_j S^{-1/2}` with Wishart `A_j` of
/// the given rank. Requires `n_outcomes · rank ≥ dim` so that `S = Σ A_j`
/// is invertible.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rank: usize, rng: &mut R) -> Povm {
    assert!(n_outcomes * rank >= dim, "{n_outcomes} outcomes of rank {rank} cannot span dimension {dim}");
    let parts: Vec<CMatrix> = (0..n_outcomes).map(|_| ginibre_gram(dim, rank, rng)).collect();
    let mut total = CMatrix::zeros(dim);
    for p in &parts {
        total = &total + p;
    }
    let inv_sqrt = hermitian_function(&total, |l| 1.0 / l.sqrt()).expect("Hermitian");
    let elements = parts
        .iter()
        .map(|p| (&(&inv_sqrt * p) * &inv_sqrt).hermitian_part())
        .collect();
    Povm::new(dim, elements).expect("normalized POVM")
}

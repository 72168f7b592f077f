//! Singular-value analysis of the two-qubit correlation matrix and the
//! alignment of optimal measurement axes with its maximal singular vectors.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Evaluator, MeasureKind};
use crate::optim::OptimConfig;
use crate::qmat::DensityMatrix;
use crate::states::{fig5_family, to_bloch};

/// Singular values closer than this to the largest one span its subspace.
pub const SINGULAR_DEGENERACY_TOL: f64 = 1e-9;

/// Coarse-grid objective spread below which the optimum is not located.
pub const FLAT_OBJECTIVE_TOL: f64 = 1e-9;

/// `c = Σ_j λ_j n_j m_jᵀ`, `λ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSvd {
    pub singular_values: [f64; 3],
    /// Left (A-side) vectors.
    pub left: [Vector3<f64>; 3],
    /// Right (B-side) vectors.
    pub right: [Vector3<f64>; 3],
}

impl CorrelationSvd {
    /// Number of singular values within tolerance of the largest.
    pub fn maximal_multiplicity(&self) -> usize {
        let top = self.singular_values[0];
        self.singular_values
            .iter()
            .filter(|&&l| top - l <= SINGULAR_DEGENERACY_TOL)
            .count()
    }
}

pub fn correlation_svd(c: &Matrix3<f64>) -> CorrelationSvd {
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    CorrelationSvd {
        singular_values: order.map(|k| svd.singular_values[k].max(0.0)),
        left: order.map(|k| u.column(k).into_owned()),
        right: order.map(|k| v_t.row(k).transpose()),
    }
}

/// Largest `|cos|` between `v` and a unit vector of `span(basis)`.
fn subspace_cosine(v: &Vector3<f64>, basis: &[Vector3<f64>]) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let projected: f64 = basis.iter().map(|b| b.dot(v).powi(2)).sum();
    (projected.sqrt() / norm).clamp(0.0, 1.0)
}

/// Measures whose optimum is a pair of local projective axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlignedMeasure {
    Wpm,
    M2bAb,
    M2bBa,
    M3b,
}

impl AlignedMeasure {
    pub fn kind(self) -> MeasureKind {
        match self {
            AlignedMeasure::Wpm => MeasureKind::Wpm,
            AlignedMeasure::M2bAb => MeasureKind::M2bAb,
            AlignedMeasure::M2bBa => MeasureKind::M2bBa,
            AlignedMeasure::M3b => MeasureKind::M3b,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match MeasureKind::from_name(name)? {
            MeasureKind::Wpm => Some(AlignedMeasure::Wpm),
            MeasureKind::M2bAb => Some(AlignedMeasure::M2bAb),
            MeasureKind::M2bBa => Some(AlignedMeasure::M2bBa),
            MeasureKind::M3b => Some(AlignedMeasure::M3b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdAlignment {
    pub svd: CorrelationSvd,
    pub value: f64,
    pub a_axis: Vector3<f64>,
    pub b_axis: Vector3<f64>,
    /// `|cos|` of the A axis against the maximal left singular subspace.
    pub cos_a: f64,
    /// `|cos|` of the B axis against the maximal right singular subspace.
    pub cos_b: f64,
    /// The maximal singular value is degenerate; cosines are maxima over its subspace.
    pub degenerate: bool,
    /// The objective is flat on the coarse grid; the reported axes are arbitrary.
    pub flat_objective: bool,
}

pub fn svd_alignment(rho: &DensityMatrix, measure: AlignedMeasure, config: &OptimConfig) -> Result<SvdAlignment> {
    if !rho.is_two_qubit() {
        let (da, db) = rho.dims();
        return Err(Error::WrongDimensions(da, db));
    }
    let svd = correlation_svd(&to_bloch(rho)?.c);
    let mut ev = Evaluator::new(rho, config)?;
    let opt = ev.optimized(measure.kind())?;
    let (a_axis, b_axis) = (opt.angles.direction(0), opt.angles.direction(1));
    let k = svd.maximal_multiplicity();
    Ok(SvdAlignment {
        value: opt.value,
        cos_a: subspace_cosine(&a_axis, &svd.left[..k]),
        cos_b: subspace_cosine(&b_axis, &svd.right[..k]),
        degenerate: k > 1,
        flat_objective: opt.grid_spread < FLAT_OBJECTIVE_TOL,
        a_axis,
        b_axis,
        svd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub value: f64,
    pub cos_a: f64,
    pub cos_b: f64,
    pub degenerate: bool,
    pub flat_objective: bool,
}

/// `n_points` evenly spaced mixing weights in `[0, 1]` along the
/// product-to-Bell-diagonal family.
pub fn fig5_sweep(n_points: usize, measure: AlignedMeasure, config: &OptimConfig) -> Result<Vec<SweepRow>> {
    if n_points < 2 {
        return Err(Error::OutOfRange(format!("sweep needs at least 2 points, got {n_points}")));
    }
    (0..n_points)
        .map(|i| {
            let eps = i as f64 / (n_points - 1) as f64;
            let al = svd_alignment(&fig5_family(eps)?, measure, config)?;
            Ok(SweepRow {
                eps,
                value: al.value,
                cos_a: al.cos_a,
                cos_b: al.cos_b,
                degenerate: al.degenerate,
                flat_objective: al.flat_objective,
            })
        })
        .collect()
}

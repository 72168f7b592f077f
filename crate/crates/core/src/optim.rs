//! Derivative-free search over projective-measurement angles and over the
//! Bloch sphere: a coarse grid followed by Nelder–Mead refinement.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meas::angle_direction;
use crate::random::rng_from_seed;

/// Angles `(θ_A, φ_A[, θ_B, φ_B])` with `θ ∈ [0, π/2]`, `φ ∈ [0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleVector {
    pub values: Vec<f64>,
}

impl AngleVector {
    /// Maps arbitrary reals into the canonical box without changing the
    /// measurement direction `(sin2θ cosφ, sin2θ sinφ, cos2θ)`.
    pub fn canonical(raw: &[f64]) -> Self {
        let mut values = raw.to_vec();
        canonicalize_in_place(&mut values);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(θ, φ)` of qubit `k`.
    pub fn pair(&self, k: usize) -> (f64, f64) {
        (self.values[2 * k], self.values[2 * k + 1])
    }

    /// Bloch direction of the first projector of qubit `k`.
    pub fn direction(&self, k: usize) -> Vector3<f64> {
        let (t, p) = self.pair(k);
        angle_direction(t, p)
    }
}

fn canonicalize_in_place(values: &mut [f64]) {
    for pair in values.chunks_mut(2) {
        let mut theta = pair[0].rem_euclid(PI);
        let mut phi = pair[1];
        if theta > FRAC_PI_2 {
            theta = PI - theta;
            phi += PI;
        }
        pair[0] = theta;
        let phi = phi.rem_euclid(2.0 * PI);
        // rem_euclid can round up to exactly 2π.
        pair[1] = if phi >= 2.0 * PI { 0.0 } else { phi };
    }
}

/// Search budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    /// θ points per qubit on `[0, π/2]`.
    pub grid_theta: usize,
    /// φ points per qubit on `[0, 2π)`.
    pub grid_phi: usize,
    /// Cap on the Cartesian grid across qubits.
    pub max_grid_points: usize,
    /// Number of best grid points refined.
    pub refine_starts: usize,
    /// Additional refinements from seeded random points.
    pub restarts: usize,
    /// Simplex objective spread at which a refinement stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            grid_theta: 13,
            grid_phi: 25,
            max_grid_points: 10_000,
            refine_starts: 3,
            restarts: 2,
            tol: 1e-9,
            max_iter: 500,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    /// Equal to `objective(best_angles)` exactly.
    pub best_value: f64,
    pub best_angles: AngleVector,
    pub evaluations: usize,
    pub converged: bool,
    /// Max minus min objective over the coarse grid; zero for flat objectives.
    pub grid_spread: f64,
}

/// Per-qubit grid sizes after scaling the Cartesian product under the cap.
pub fn grid_shape(config: &OptimConfig, n_qubits: usize) -> (usize, usize) {
    let (mut gt, mut gp) = (config.grid_theta.max(2), config.grid_phi.max(1));
    let total = |gt: usize, gp: usize| ((gt * gp) as f64).powi(n_qubits as i32);
    if total(gt, gp) > config.max_grid_points as f64 {
        let scale = (config.max_grid_points as f64 / total(gt, gp)).powf(1.0 / (2.0 * n_qubits as f64));
        gt = ((gt as f64 * scale).floor() as usize).max(2);
        gp = ((gp as f64 * scale).floor() as usize).max(1);
    }
    (gt, gp)
}

struct Counter<'a, F> {
    f: &'a F,
    sign: f64,
    evaluations: usize,
    scratch: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Counter<'_, F> {
    /// Negated-if-minimizing objective at the canonicalized point.
    fn eval(&mut self, raw: &[f64]) -> Result<f64> {
        self.scratch.clear();
        self.scratch.extend_from_slice(raw);
        canonicalize_in_place(&mut self.scratch);
        self.evaluations += 1;
        let v = (self.f)(&self.scratch);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective {
                at: self.scratch.clone(),
            });
        }
        Ok(self.sign * v)
    }
}

struct Refined {
    point: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Nelder–Mead maximization from `start` with per-coordinate initial steps.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    obj: &mut Counter<'_, F>,
    start: &[f64],
    start_value: f64,
    steps: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Refined> {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), start_value));
    for k in 0..n {
        let mut p = start.to_vec();
        p[k] += steps[k];
        let v = obj.eval(&p)?;
        simplex.push((p, v));
    }
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let along = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(c, w)| c + t * (w - c)).collect() };
    for _ in 0..max_iter {
        // Descending by value; stable so ties keep insertion order.
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        if simplex[0].1 - simplex[n].1 < tol {
            converged = true;
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (p, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = along(&centroid, &worst.0, -1.0);
        let fr = obj.eval(&reflected)?;
        if fr > simplex[0].1 {
            let expanded = along(&centroid, &worst.0, -2.0);
            let fe = obj.eval(&expanded)?;
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        // Outside contraction if the reflection beat the worst vertex,
        // inside contraction otherwise.
        let outside = fr > worst.1;
        let target = if outside { &reflected } else { &worst.0 };
        let contracted = along(&centroid, target, 0.5);
        let fc = obj.eval(&contracted)?;
        if (outside && fc >= fr) || (!outside && fc > worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let p = along(&best, &vertex.0, 0.5);
            let v = obj.eval(&p)?;
            *vertex = (p, v);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (point, value) = simplex.swap_remove(0);
    Ok(Refined { point, value, converged })
}

/// Extremum of `objective` over `n_angles / 2` qubit projective pairs.
///
/// The objective is only ever called with canonical in-box angles.
pub fn optimize_angles<F>(objective: F, n_angles: usize, sense: Sense, config: &OptimConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    optimize_angles_seeded(objective, n_angles, sense, config, &[])
}

/// As [`optimize_angles`], additionally refining from each caller-supplied
/// start point (any angle values; wrong-length seeds are ignored).
pub fn optimize_angles_seeded<F>(
    objective: F,
    n_angles: usize,
    sense: Sense,
    config: &OptimConfig,
    seeds: &[Vec<f64>],
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    if n_angles == 0 || n_angles % 2 != 0 {
        return Err(Error::OutOfRange(format!("{n_angles} angles")));
    }
    let n_qubits = n_angles / 2;
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut obj = Counter {
        f: &objective,
        sign,
        evaluations: 0,
        scratch: Vec::with_capacity(n_angles),
    };

    let (gt, gp) = grid_shape(config, n_qubits);
    let thetas: Vec<f64> = (0..gt).map(|i| FRAC_PI_2 * i as f64 / (gt - 1) as f64).collect();
    let phis: Vec<f64> = (0..gp).map(|j| 2.0 * PI * j as f64 / gp as f64).collect();
    let per_qubit = gt * gp;
    let n_grid = per_qubit.pow(n_qubits as u32);
    let grid_point = |mut idx: usize, out: &mut Vec<f64>| {
        out.clear();
        out.resize(n_angles, 0.0);
        for q in (0..n_qubits).rev() {
            let local = idx % per_qubit;
            idx /= per_qubit;
            out[2 * q] = thetas[local / gp];
            out[2 * q + 1] = phis[local % gp];
        }
    };

    let mut values = Vec::with_capacity(n_grid);
    let mut point = Vec::with_capacity(n_angles);
    for idx in 0..n_grid {
        grid_point(idx, &mut point);
        values.push(obj.eval(&point)?);
    }
    let (grid_min, grid_max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let grid_spread = grid_max - grid_min;

    let mut order: Vec<usize> = (0..n_grid).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let steps: Vec<f64> = (0..n_angles)
        .map(|k| {
            if k % 2 == 0 {
                0.5 * FRAC_PI_2 / (gt - 1) as f64
            } else {
                0.5 * 2.0 * PI / gp as f64
            }
        })
        .collect();

    grid_point(order[0], &mut point);
    let mut best = Refined {
        point: point.clone(),
        value: values[order[0]],
        converged: false,
    };
    let mut any_converged = false;

    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    for &idx in order.iter().take(config.refine_starts) {
        grid_point(idx, &mut point);
        starts.push((point.clone(), values[idx]));
    }
    let mut rng = rng_from_seed(config.seed);
    for _ in 0..config.restarts {
        let p: Vec<f64> = (0..n_angles)
            .map(|k| {
                let u: f64 = rng.random();
                if k % 2 == 0 {
                    u * FRAC_PI_2
                } else {
                    u * 2.0 * PI
                }
            })
            .collect();
        let v = obj.eval(&p)?;
        starts.push((p, v));
    }
    for seed in seeds.iter().filter(|s| s.len() == n_angles) {
        let v = obj.eval(seed)?;
        starts.push((seed.clone(), v));
    }

    for (start, value) in starts {
        let run = nelder_mead(&mut obj, &start, value, &steps, config.tol, config.max_iter)?;
        any_converged |= run.converged;
        if run.value > best.value {
            best = run;
        }
    }

    let converged = best.converged || any_converged;
    let best_angles = AngleVector::canonical(&best.point);
    Ok(OptimResult {
        best_value: sign * best.value,
        best_angles,
        evaluations: obj.evaluations,
        converged,
        grid_spread,
    })
}

/// Maximum of `f` over unit vectors, searched through the map
/// `(θ, φ) ↦ (sin2θ cosφ, sin2θ sinφ, cos2θ)`.
pub fn maximize_over_sphere<F>(f: F, config: &OptimConfig) -> Result<(f64, Vector3<f64>)>
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let res = optimize_angles(|a| f(&angle_direction(a[0], a[1])), 2, Sense::Maximize, config)?;
    Ok((res.best_value, res.best_angles.direction(0)))
}

//! The measure array: quantum mutual information, MID, WPM, M2b, M3b,
//! discord and demon discord, with ordering checks, plus closed-form
//! evaluators for symmetric classical-quantum ensembles.
//!
//! Two-qubit optimizations run on a fixed-size evaluator; the general
//! measurement machinery in [`crate::meas`] is kept as its cross-check.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::entropy::{classical_info_table, entropy_bits, eta, quantum_info_table, JointDistribution, QuantumInfoTable};
use crate::error::{Error, Result};
use crate::meas::{
    bloch_vector_of, joint_distribution_unconditioned, marginal_eigenbasis_povm, pair_kets, QubitProjectivePair,
    Povm, RankOnePovm, DEGENERACY_TOL,
};
use crate::optim::{maximize_over_sphere, optimize_angles_seeded, AngleVector, OptimConfig, OptimResult, Sense};
use crate::qmat::{eigenvalues_2x2, hermitian_eig, tensor_product, DensityMatrix, C64};
use crate::states::CqEnsemble;

/// Default slack for the cross-measure inequalities.
pub const ORDERING_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

/// An optimized measure value and where it was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimized {
    pub value: f64,
    /// `(θ_A, φ_A, θ_B, φ_B)` in the original subsystem order for joint
    /// measurements; `(θ, φ)` of the measured side for one-sided ones.
    pub angles: AngleVector,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective spread over the coarse grid; zero when the objective is flat.
    pub grid_spread: f64,
}

impl Optimized {
    fn from_result(r: OptimResult, offset: f64) -> Self {
        Self {
            value: r.best_value - offset,
            angles: r.best_angles,
            evaluations: r.evaluations,
            converged: r.converged,
            grid_spread: r.grid_spread,
        }
    }

    fn swap_sides(mut self) -> Self {
        if self.angles.len() == 4 {
            self.angles.values.rotate_left(2);
        }
        self
    }
}

/// Unnormalized conditional block `tr_A((|e⟩⟨e| ⊗ I) ρ) = [[a, b], [b*, d]]`.
#[derive(Debug, Clone, Copy)]
struct Block {
    a: f64,
    d: f64,
    b: C64,
}

impl Block {
    #[inline]
    fn p(&self) -> f64 {
        self.a + self.d
    }

    #[inline]
    fn expect(&self, f: &[C64; 2]) -> f64 {
        let cross = f[0].conj() * self.b * f[1];
        (self.a * f[0].norm_sqr() + self.d * f[1].norm_sqr() + 2.0 * cross.re).max(0.0)
    }

    /// `p S(M/p) = −Σ λ log λ + p log p` from the unnormalized spectrum.
    #[inline]
    fn weighted_entropy(&self) -> f64 {
        let (l1, l2) = eigenvalues_2x2(self.a, self.d, self.b);
        eta(l1.max(0.0)) + eta(l2.max(0.0)) - eta(self.p().max(0.0))
    }
}

/// Fixed-size two-qubit state with cached entropies.
#[derive(Debug, Clone)]
pub(crate) struct TwoQubit {
    m: [[C64; 4]; 4],
    pub(crate) info: QuantumInfoTable,
}

impl TwoQubit {
    pub(crate) fn new(rho: &DensityMatrix) -> Result<Self> {
        let (da, db) = rho.dims();
        if (da, db) != (2, 2) {
            return Err(Error::WrongDimensions(da, db));
        }
        let mat = rho.matrix();
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = mat[(i, j)];
            }
        }
        Ok(Self {
            m,
            info: quantum_info_table(rho),
        })
    }

    #[inline]
    fn blocks(&self, theta: f64, phi: f64) -> [Block; 2] {
        let kets = pair_kets(theta, phi);
        kets.map(|e| {
            let mut blk = [[C64::new(0.0, 0.0); 2]; 2];
            for (k, row) in blk.iter_mut().enumerate() {
                for (l, x) in row.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..2 {
                        for j in 0..2 {
                            acc += e[i].conj() * e[j] * self.m[2 * i + k][2 * j + l];
                        }
                    }
                    *x = acc;
                }
            }
            Block {
                a: blk[0][0].re,
                d: blk[1][1].re,
                b: blk[0][1],
            }
        })
    }

    /// `p_ab` for projective pairs on both sides, row-major in `a`.
    #[inline]
    fn joint(&self, x: &[f64]) -> [f64; 4] {
        let blocks = self.blocks(x[0], x[1]);
        let f = pair_kets(x[2], x[3]);
        [
            blocks[0].expect(&f[0]),
            blocks[0].expect(&f[1]),
            blocks[1].expect(&f[0]),
            blocks[1].expect(&f[1]),
        ]
    }

    /// `(H(A), H(B), H(A,B))` of the joint outcome distribution.
    #[inline]
    fn classical(&self, x: &[f64]) -> (f64, f64, f64) {
        let p = self.joint(x);
        let h_a = eta(p[0] + p[1]) + eta(p[2] + p[3]);
        let h_b = eta(p[0] + p[2]) + eta(p[1] + p[3]);
        (h_a, h_b, entropy_bits(&p))
    }

    /// `Σ_a p_a S(ρ_{B|a})` and `H(p_a)` for a projective pair on A.
    #[inline]
    fn one_sided(&self, x: &[f64]) -> (f64, f64) {
        let blocks = self.blocks(x[0], x[1]);
        let residual = blocks[0].weighted_entropy() + blocks[1].weighted_entropy();
        (residual, eta(blocks[0].p()) + eta(blocks[1].p()))
    }

    fn mutual_info_at(&self, x: &[f64]) -> f64 {
        let (h_a, h_b, h_ab) = self.classical(x);
        h_a + h_b - h_ab
    }
}

fn angles_of_ket(ket: &[C64]) -> [f64; 2] {
    let p = QubitProjectivePair::from_direction(&bloch_vector_of(ket));
    [p.theta, p.phi]
}

/// `S(A) + S(B) − S(A,B)`.
pub fn quantum_mutual_information(rho: &DensityMatrix) -> f64 {
    quantum_info_table(rho).mutual_info
}

/// MID value with the marginal eigenbasis angles and degeneracy flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidResult {
    pub value: f64,
    /// `(θ_A, φ_A, θ_B, φ_B)`; empty for non-qubit subsystems.
    pub angles: AngleVector,
    pub degenerate_a: bool,
    pub degenerate_b: bool,
}

fn marginal_angles(rho: &DensityMatrix) -> Result<([f64; 2], [f64; 2], bool, bool)> {
    let ea = hermitian_eig(&rho.marginal_a())?;
    let eb = hermitian_eig(&rho.marginal_b())?;
    let gap = |v: &[f64]| (v[0] - v[1]).abs() < DEGENERACY_TOL;
    Ok((
        angles_of_ket(&ea.eigenvector(0)),
        angles_of_ket(&eb.eigenvector(0)),
        gap(&ea.eigenvalues),
        gap(&eb.eigenvalues),
    ))
}

/// `S(A:B) − H(A:B)` with both sides measured in their marginal eigenbases.
///
/// For two qubits, a degenerate marginal has its basis chosen to maximize
/// `H(A:B)`. Other dimensions use the eigenbasis returned by the solver.
pub fn mid(rho: &DensityMatrix, config: &OptimConfig) -> Result<MidResult> {
    if !rho.is_two_qubit() {
        let (e, deg_a) = marginal_eigenbasis_povm(&rho.marginal_a(), DEGENERACY_TOL)?;
        let (f, deg_b) = marginal_eigenbasis_povm(&rho.marginal_b(), DEGENERACY_TOL)?;
        let h = classical_info_table(&joint_distribution_unconditioned(rho, &e, &f)?);
        return Ok(MidResult {
            value: quantum_mutual_information(rho) - h.mutual_info,
            angles: AngleVector { values: vec![] },
            degenerate_a: deg_a,
            degenerate_b: deg_b,
        });
    }
    let tq = TwoQubit::new(rho)?;
    let (xa, xb, deg_a, deg_b) = marginal_angles(rho)?;
    let base = [xa[0], xa[1], xb[0], xb[1]];
    let s_mi = tq.info.mutual_info;
    let angles: Vec<f64> = match (deg_a, deg_b) {
        (false, false) => base.to_vec(),
        (true, false) => {
            let r = optimize_angles_seeded(
                |a| tq.mutual_info_at(&[a[0], a[1], xb[0], xb[1]]),
                2,
                Sense::Maximize,
                config,
                &[xa.to_vec()],
            )?;
            vec![r.best_angles.values[0], r.best_angles.values[1], xb[0], xb[1]]
        }
        (false, true) => {
            let r = optimize_angles_seeded(
                |b| tq.mutual_info_at(&[xa[0], xa[1], b[0], b[1]]),
                2,
                Sense::Maximize,
                config,
                &[xb.to_vec()],
            )?;
            vec![xa[0], xa[1], r.best_angles.values[0], r.best_angles.values[1]]
        }
        (true, true) => {
            let r = optimize_angles_seeded(|x| tq.mutual_info_at(x), 4, Sense::Maximize, config, &[base.to_vec()])?;
            r.best_angles.values
        }
    };
    Ok(MidResult {
        value: s_mi - tq.mutual_info_at(&angles),
        angles: AngleVector::canonical(&angles),
        degenerate_a: deg_a,
        degenerate_b: deg_b,
    })
}

/// The ten reported quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    MutualInfo,
    Mid,
    Wpm,
    M2bAb,
    M2bBa,
    DiscordAb,
    DiscordBa,
    M3b,
    DdAb,
    DdBa,
}

impl MeasureKind {
    /// Column order of the scan output.
    pub const ALL: [MeasureKind; 10] = [
        MeasureKind::MutualInfo,
        MeasureKind::Mid,
        MeasureKind::Wpm,
        MeasureKind::M2bAb,
        MeasureKind::M2bBa,
        MeasureKind::DiscordAb,
        MeasureKind::DiscordBa,
        MeasureKind::M3b,
        MeasureKind::DdAb,
        MeasureKind::DdBa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::MutualInfo => "mutual_info",
            MeasureKind::Mid => "mid",
            MeasureKind::Wpm => "wpm",
            MeasureKind::M2bAb => "m2b_ab",
            MeasureKind::M2bBa => "m2b_ba",
            MeasureKind::DiscordAb => "discord_ab",
            MeasureKind::DiscordBa => "discord_ba",
            MeasureKind::M3b => "m3b",
            MeasureKind::DdAb => "dd_ab",
            MeasureKind::DdBa => "dd_ba",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).expect("listed")
    }
}

/// `greater ≥ lesser` pairs checked on every report.
pub const ORDERING_RELATIONS: [(MeasureKind, MeasureKind); 17] = {
    use MeasureKind::*;
    [
        (MutualInfo, Mid),
        (Mid, Wpm),
        (Mid, M2bAb),
        (Mid, M2bBa),
        (M2bAb, DiscordAb),
        (M2bBa, DiscordBa),
        (Mid, M3b),
        (M3b, DdAb),
        (M3b, DdBa),
        (M3b, M2bAb),
        (M3b, M2bBa),
        (M2bAb, Wpm),
        (M2bBa, Wpm),
        (DdAb, DiscordAb),
        (DdBa, DiscordBa),
        (Wpm, DiscordAb),
        (Wpm, DiscordBa),
    ]
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingViolation {
    /// `"<greater> >= <lesser>"`, or `"<measure> >= 0"`.
    pub relation: String,
    /// How far the relation fails, before subtracting the slack.
    pub amount: f64,
}

pub fn check_orderings(values: &[Option<f64>; 10], slack: f64) -> Vec<OrderingViolation> {
    let mut out = Vec::new();
    for (greater, lesser) in ORDERING_RELATIONS {
        if let (Some(g), Some(l)) = (values[greater.index()], values[lesser.index()]) {
            if l - g > slack {
                out.push(OrderingViolation {
                    relation: format!("{} >= {}", greater.name(), lesser.name()),
                    amount: l - g,
                });
            }
        }
    }
    for kind in MeasureKind::ALL {
        if let Some(v) = values[kind.index()] {
            if v < -slack {
                out.push(OrderingViolation {
                    relation: format!("{} >= 0", kind.name()),
                    amount: -v,
                });
            }
        }
    }
    out
}

/// Lazily computed measures for one two-qubit state. Each optimization is
/// additionally started from the optima already found for related
/// measures, so the ordering relations cannot fail merely because one
/// search missed a point another search found.
pub struct Evaluator<'c> {
    ab: TwoQubit,
    ba: TwoQubit,
    config: &'c OptimConfig,
    eigen: [f64; 4],
    mid: Option<MidResult>,
    found: [Option<Optimized>; 10],
}

impl<'c> Evaluator<'c> {
    pub fn new(rho: &DensityMatrix, config: &'c OptimConfig) -> Result<Self> {
        let ab = TwoQubit::new(rho)?;
        let ba = TwoQubit::new(&rho.swap_subsystems())?;
        let (xa, xb, _, _) = marginal_angles(rho)?;
        Ok(Self {
            ab,
            ba,
            config,
            eigen: [xa[0], xa[1], xb[0], xb[1]],
            mid: None,
            found: Default::default(),
        })
    }

    pub fn quantum_info(&self) -> &QuantumInfoTable {
        &self.ab.info
    }

    fn rho_ab(&self) -> DensityMatrix {
        let m = crate::qmat::CMatrix::from_fn(4, |i, j| self.ab.m[i][j]);
        DensityMatrix::new_unchecked(m, (2, 2))
    }

    pub fn mid(&mut self) -> Result<&MidResult> {
        if self.mid.is_none() {
            self.mid = Some(mid(&self.rho_ab(), self.config)?);
        }
        Ok(self.mid.as_ref().expect("just set"))
    }

    /// Joint-angle seeds in A-major order.
    fn joint_seeds(&self) -> Vec<[f64; 4]> {
        let mut seeds = vec![self.eigen];
        if let Some(m) = &self.mid {
            seeds.push(m.angles.values.clone().try_into().expect("four angles"));
        }
        for k in [MeasureKind::M3b, MeasureKind::M2bAb, MeasureKind::M2bBa, MeasureKind::Wpm] {
            if let Some(o) = &self.found[k.index()] {
                seeds.push(o.angles.values.clone().try_into().expect("four angles"));
            }
        }
        seeds
    }

    /// One-sided seeds for the measured side `side` (0 = A, 1 = B).
    fn side_seeds(&self, side: usize, own: &[MeasureKind]) -> Vec<Vec<f64>> {
        let mut seeds: Vec<Vec<f64>> = self
            .joint_seeds()
            .iter()
            .map(|s| s[2 * side..2 * side + 2].to_vec())
            .collect();
        for k in own {
            if let Some(o) = &self.found[k.index()] {
                seeds.push(o.angles.values.clone());
            }
        }
        seeds
    }

    fn joint_seeds_for(&self, dir: Direction) -> Vec<Vec<f64>> {
        self.joint_seeds()
            .into_iter()
            .map(|mut s| {
                if dir == Direction::BtoA {
                    s.rotate_left(2);
                }
                s.to_vec()
            })
            .collect()
    }

    fn cached(&self, kind: MeasureKind) -> Option<f64> {
        self.found[kind.index()].as_ref().map(|o| o.value)
    }

    pub fn get(&mut self, kind: MeasureKind) -> Result<f64> {
        match kind {
            MeasureKind::MutualInfo => Ok(self.ab.info.mutual_info),
            MeasureKind::Mid => Ok(self.mid()?.value),
            _ => Ok(self.optimized(kind)?.value),
        }
    }

    pub fn optimized(&mut self, kind: MeasureKind) -> Result<&Optimized> {
        if self.cached(kind).is_none() {
            let o = self.compute(kind)?;
            self.found[kind.index()] = Some(o);
        }
        self.found[kind.index()]
            .as_ref()
            .ok_or_else(|| Error::OutOfRange(format!("{} is not an optimized measure", kind.name())))
    }

    fn compute(&mut self, kind: MeasureKind) -> Result<Optimized> {
        use MeasureKind::*;
        let cfg = self.config;
        match kind {
            MutualInfo | Mid => Err(Error::OutOfRange(format!("{} is not an optimized measure", kind.name()))),
            Wpm => {
                let tq = &self.ab;
                let r = optimize_angles_seeded(
                    |x| tq.mutual_info_at(x),
                    4,
                    Sense::Maximize,
                    cfg,
                    &self.joint_seeds_for(Direction::AtoB),
                )?;
                // S(A:B) − max H(A:B) = −(max H(A:B) − S(A:B)).
                let mut o = Optimized::from_result(r, tq.info.mutual_info);
                o.value = -o.value;
                Ok(o)
            }
            M3b => {
                let tq = &self.ab;
                let r = optimize_angles_seeded(
                    |x| tq.classical(x).2,
                    4,
                    Sense::Minimize,
                    cfg,
                    &self.joint_seeds_for(Direction::AtoB),
                )?;
                Ok(Optimized::from_result(r, tq.info.s_ab))
            }
            M2bAb | M2bBa => {
                let dir = if kind == M2bAb { Direction::AtoB } else { Direction::BtoA };
                let tq = if dir == Direction::AtoB { &self.ab } else { &self.ba };
                let r = optimize_angles_seeded(
                    |x| {
                        let (h_a, _, h_ab) = tq.classical(x);
                        h_ab - h_a
                    },
                    4,
                    Sense::Minimize,
                    cfg,
                    &self.joint_seeds_for(dir),
                )?;
                let o = Optimized::from_result(r, tq.info.s_b_given_a);
                Ok(if dir == Direction::BtoA { o.swap_sides() } else { o })
            }
            DiscordAb | DiscordBa | DdAb | DdBa => {
                let side = usize::from(matches!(kind, DiscordBa | DdBa));
                let tq = if side == 0 { &self.ab } else { &self.ba };
                let (own, demon) = match kind {
                    DiscordAb => (vec![DdAb], false),
                    DiscordBa => (vec![DdBa], false),
                    DdAb => (vec![DiscordAb], true),
                    _ => (vec![DiscordBa], true),
                };
                let seeds = self.side_seeds(side, &own);
                let r = if demon {
                    optimize_angles_seeded(
                        |x| {
                            let (res, h) = tq.one_sided(x);
                            h + res
                        },
                        2,
                        Sense::Minimize,
                        cfg,
                        &seeds,
                    )?
                } else {
                    optimize_angles_seeded(|x| tq.one_sided(x).0, 2, Sense::Minimize, cfg, &seeds)?
                };
                let offset = if demon { tq.info.s_ab } else { tq.info.s_b_given_a };
                Ok(Optimized::from_result(r, offset))
            }
        }
    }
}

/// Values and angle records of the whole array for one two-qubit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub mutual_info: f64,
    pub mid: f64,
    pub wpm: f64,
    pub m2b_ab: f64,
    pub m2b_ba: f64,
    pub discord_ab: f64,
    pub discord_ba: f64,
    pub m3b: f64,
    pub dd_ab: f64,
    pub dd_ba: f64,
    pub mid_detail: MidResult,
    pub wpm_angles: AngleVector,
    pub m2b_ab_angles: AngleVector,
    pub m2b_ba_angles: AngleVector,
    pub m3b_angles: AngleVector,
    /// Angles of the measured side only.
    pub discord_ab_angles: AngleVector,
    pub discord_ba_angles: AngleVector,
    pub dd_ab_angles: AngleVector,
    pub dd_ba_angles: AngleVector,
    pub violations: Vec<OrderingViolation>,
}

impl MeasureReport {
    pub fn values(&self) -> [f64; 10] {
        [
            self.mutual_info,
            self.mid,
            self.wpm,
            self.m2b_ab,
            self.m2b_ba,
            self.discord_ab,
            self.discord_ba,
            self.m3b,
            self.dd_ab,
            self.dd_ba,
        ]
    }

    pub fn get(&self, kind: MeasureKind) -> f64 {
        self.values()[kind.index()]
    }
}

/// Evaluation order; later searches start from earlier optima.
const EVALUATION_ORDER: [MeasureKind; 10] = {
    use MeasureKind::*;
    [MutualInfo, Mid, M3b, M2bAb, M2bBa, Wpm, DdAb, DdBa, DiscordAb, DiscordBa]
};

/// Only the selected measures, with orderings checked among them.
pub fn measure_values(
    rho: &DensityMatrix,
    selected: &[MeasureKind],
    config: &OptimConfig,
    slack: f64,
) -> Result<([Option<f64>; 10], Vec<OrderingViolation>)> {
    let mut ev = Evaluator::new(rho, config)?;
    let mut values = [None; 10];
    for kind in EVALUATION_ORDER {
        if selected.contains(&kind) {
            values[kind.index()] = Some(ev.get(kind)?);
        }
    }
    let violations = check_orderings(&values, slack);
    Ok((values, violations))
}

pub fn measure_report(rho: &DensityMatrix, config: &OptimConfig) -> Result<MeasureReport> {
    let mut ev = Evaluator::new(rho, config)?;
    let mut values = [None; 10];
    for kind in EVALUATION_ORDER {
        values[kind.index()] = Some(ev.get(kind)?);
    }
    let violations = check_orderings(&values, ORDERING_SLACK);
    let angles = |ev: &mut Evaluator, k: MeasureKind| -> Result<AngleVector> { Ok(ev.optimized(k)?.angles.clone()) };
    let v = values.map(|x| x.expect("all computed"));
    Ok(MeasureReport {
        mutual_info: v[0],
        mid: v[1],
        wpm: v[2],
        m2b_ab: v[3],
        m2b_ba: v[4],
        discord_ab: v[5],
        discord_ba: v[6],
        m3b: v[7],
        dd_ab: v[8],
        dd_ba: v[9],
        mid_detail: ev.mid()?.clone(),
        wpm_angles: angles(&mut ev, MeasureKind::Wpm)?,
        m2b_ab_angles: angles(&mut ev, MeasureKind::M2bAb)?,
        m2b_ba_angles: angles(&mut ev, MeasureKind::M2bBa)?,
        m3b_angles: angles(&mut ev, MeasureKind::M3b)?,
        discord_ab_angles: angles(&mut ev, MeasureKind::DiscordAb)?,
        discord_ba_angles: angles(&mut ev, MeasureKind::DiscordBa)?,
        dd_ab_angles: angles(&mut ev, MeasureKind::DdAb)?,
        dd_ba_angles: angles(&mut ev, MeasureKind::DdBa)?,
        violations,
    })
}

fn single(rho: &DensityMatrix, kind: MeasureKind, config: &OptimConfig) -> Result<Optimized> {
    let mut ev = Evaluator::new(rho, config)?;
    Ok(ev.optimized(kind)?.clone())
}

fn by_direction(dir: Direction, ab: MeasureKind, ba: MeasureKind) -> MeasureKind {
    match dir {
        Direction::AtoB => ab,
        Direction::BtoA => ba,
    }
}

/// `S(A:B) − max H(A:B)` over projective pairs on both qubits.
pub fn wpm(rho: &DensityMatrix, config: &OptimConfig) -> Result<Optimized> {
    single(rho, MeasureKind::Wpm, config)
}

/// `min H(B|A) − S(B|A)` (conditioning side first in `dir`).
pub fn m2b(rho: &DensityMatrix, dir: Direction, config: &OptimConfig) -> Result<Optimized> {
    single(rho, by_direction(dir, MeasureKind::M2bAb, MeasureKind::M2bBa), config)
}

/// `min H(A,B) − S(A,B)`.
pub fn m3b(rho: &DensityMatrix, config: &OptimConfig) -> Result<Optimized> {
    single(rho, MeasureKind::M3b, config)
}

/// `min Σ_a p_a S(ρ_{B|a}) − S(B|A)` over projective pairs on the
/// conditioning side.
pub fn discord(rho: &DensityMatrix, dir: Direction, config: &OptimConfig) -> Result<Optimized> {
    single(rho, by_direction(dir, MeasureKind::DiscordAb, MeasureKind::DiscordBa), config)
}

/// `min [H(A) + Σ_a p_a S(ρ_{B|a})] − S(A,B)`.
pub fn demon_discord(rho: &DensityMatrix, dir: Direction, config: &OptimConfig) -> Result<Optimized> {
    single(rho, by_direction(dir, MeasureKind::DdAb, MeasureKind::DdBa), config)
}

/// Classical mutual information of given local rank-one POVMs.
pub fn classical_mutual_information(rho: &DensityMatrix, e: &RankOnePovm, f: &RankOnePovm) -> Result<f64> {
    Ok(classical_info_table(&joint_distribution_unconditioned(rho, e, f)?).mutual_info)
}

/// Classical mutual information of arbitrary local POVMs,
/// `p_ab = tr((E_a⊗F_b)ρ)`.
pub fn classical_mutual_information_povm(rho: &DensityMatrix, e: &Povm, f: &Povm) -> Result<f64> {
    let (da, db) = rho.dims();
    if e.dim() != da {
        return Err(Error::DimMismatch { expected: da, got: e.dim() });
    }
    if f.dim() != db {
        return Err(Error::DimMismatch { expected: db, got: f.dim() });
    }
    let table = e
        .elements()
        .iter()
        .flat_map(|ea| {
            f.elements()
                .iter()
                .map(move |fb| tensor_product(ea, fb).trace_product(rho.matrix()).re.max(0.0))
        })
        .collect();
    Ok(classical_info_table(&JointDistribution::new(e.len(), f.len(), table)?).mutual_info)
}

const SYMMETRY_TOL: f64 = 1e-9;

/// `F(m) = Σ_j p_j (1 + n_j·m) log₂(1 + n_j·m)`.
pub fn ensemble_f(ensemble: &CqEnsemble, m: &Vector3<f64>) -> f64 {
    ensemble
        .iter()
        .map(|(p, n)| {
            let x = 1.0 + n.dot(m);
            // x log x = −η(x); η is zero below its cutoff.
            p * if x <= 0.0 { 0.0 } else { -eta(x) }
        })
        .sum()
}

fn check_ensemble_symmetry(ensemble: &CqEnsemble) -> Result<()> {
    let mean = ensemble.mean_vector();
    if mean.norm() > SYMMETRY_TOL {
        return Err(Error::SymmetryViolated(format!("ensemble mean vector has length {:e}", mean.norm())));
    }
    Ok(())
}

/// `1 − Σ_a q_a F(m_a)` with `q_a = μ_a / 2`: the discord (and WPM) of the
/// classical-quantum state when A is measured with `dual_povm`.
pub fn cq_discord_closed_form(ensemble: &CqEnsemble, dual_povm: &RankOnePovm) -> Result<f64> {
    check_ensemble_symmetry(ensemble)?;
    let vectors = dual_povm
        .bloch_vectors()
        .ok_or(Error::DimMismatch {
            expected: 2,
            got: dual_povm.dim(),
        })?;
    let q: Vec<f64> = dual_povm.weights().iter().map(|mu| mu / 2.0).collect();
    let mean = q.iter().zip(&vectors).fold(Vector3::zeros(), |acc, (q, m)| acc + *q * m);
    if mean.norm() > SYMMETRY_TOL {
        return Err(Error::SymmetryViolated(format!("POVM mean vector has length {:e}", mean.norm())));
    }
    Ok(1.0 - q.iter().zip(&vectors).map(|(q, m)| q * ensemble_f(ensemble, m)).sum::<f64>())
}

/// Classical information `½(F(m) + F(−m))` of the projective pair along `m`.
pub fn cq_projective_information(ensemble: &CqEnsemble, m: &Vector3<f64>) -> f64 {
    0.5 * (ensemble_f(ensemble, m) + ensemble_f(ensemble, &-m))
}

/// Best projective classical information and its axis. Candidates: every
/// ensemble axis `±n_j`, the normal of a coplanar ensemble, and a sphere
/// search.
pub fn cq_best_projective_information(ensemble: &CqEnsemble, config: &OptimConfig) -> Result<(f64, Vector3<f64>)> {
    check_ensemble_symmetry(ensemble)?;
    let mut candidates: Vec<Vector3<f64>> = ensemble.vectors().to_vec();
    if let [n0, n1, ..] = ensemble.vectors() {
        let normal = n0.cross(n1);
        if normal.norm() > 1e-9 {
            candidates.push(normal.normalize());
        }
    }
    let (sphere_value, sphere_axis) = maximize_over_sphere(|m| cq_projective_information(ensemble, m), config)?;
    let mut best = (sphere_value, sphere_axis);
    for m in candidates {
        let v = cq_projective_information(ensemble, &m);
        if v > best.0 {
            best = (v, m);
        }
    }
    Ok(best)
}

/// Candidate values behind the classical-quantum demon discord.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqDemonDiscord {
    /// `min(trine, projective)`.
    pub value: f64,
    /// `H(q) − Σ q_a F(m_a)` for the equal-weight dual POVM.
    pub symmetric_candidate: f64,
    /// `1 − ½(F(m) + F(−m))` at the best projective axis.
    pub projective_candidate: f64,
    pub projective_axis: [f64; 3],
}

/// Demon discord `min H(q) − Σ_a q_a F(m_a)` for a symmetric ensemble,
/// comparing the dual symmetric POVM against projective pairs.
pub fn cq_demon_discord_projective(
    ensemble: &CqEnsemble,
    dual_povm: &RankOnePovm,
    config: &OptimConfig,
) -> Result<CqDemonDiscord> {
    let q: Vec<f64> = dual_povm.weights().iter().map(|mu| mu / 2.0).collect();
    let symmetric_candidate = entropy_bits(&q) - (1.0 - cq_discord_closed_form(ensemble, dual_povm)?);
    let (info, axis) = cq_best_projective_information(ensemble, config)?;
    let projective_candidate = 1.0 - info;
    Ok(CqDemonDiscord {
        value: symmetric_candidate.min(projective_candidate),
        symmetric_candidate,
        projective_candidate,
        projective_axis: [axis.x, axis.y, axis.z],
    })
}

/// `max_m F(m)` by sphere search, also trying every `−n_j`.
pub fn cq_f_max(ensemble: &CqEnsemble, config: &OptimConfig) -> Result<(f64, Vector3<f64>)> {
    let mut best = maximize_over_sphere(|m| ensemble_f(ensemble, m), config)?;
    for n in ensemble.vectors() {
        let v = ensemble_f(ensemble, &-n);
        if v > best.0 {
            best = (v, -n);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::spectral_entropy;
    use crate::meas::{conditional_states_b, projective_pair_povm, symmetric_qubit_povm, SymmetricKind};
    use crate::qmat::CMatrix;
    use crate::random::rng_from_seed;
    use crate::states::{bell_state, random_density, triangle_ensemble, BellKind};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn cfg() -> OptimConfig {
        OptimConfig::default()
    }

    /// Joint distribution through the general machinery.
    fn general_joint(rho: &DensityMatrix, x: &[f64]) -> Vec<f64> {
        let e = projective_pair_povm(QubitProjectivePair { theta: x[0], phi: x[1] });
        let f = projective_pair_povm(QubitProjectivePair { theta: x[2], phi: x[3] });
        joint_distribution_unconditioned(rho, &e, &f).unwrap().table().to_vec()
    }

    #[test]
    fn fast_evaluator_matches_general_machinery() {
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            let rho = random_density((2, 2), None, &mut rng).unwrap();
            let tq = TwoQubit::new(&rho).unwrap();
            let x: Vec<f64> = (0..4).map(|k| rng.random::<f64>() * if k % 2 == 0 { 1.5 } else { 6.0 }).collect();
            let fast = tq.joint(&x);
            for (a, b) in fast.iter().zip(general_joint(&rho, &x)) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
            let e = projective_pair_povm(QubitProjectivePair { theta: x[0], phi: x[1] });
            let residual: f64 = conditional_states_b(&rho, &e)
                .unwrap()
                .iter()
                .map(|s| s.p_a * spectral_entropy(&s.rho_b).unwrap())
                .sum();
            assert_abs_diff_eq!(tq.one_sided(&x).0, residual, epsilon = 1e-10);
        }
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(quantum_mutual_information(&bell_state(BellKind::PhiPlus)), 2.0, epsilon = 1e-12);
        let classical =
            crate::qmat::validate_density_matrix(CMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]), (2, 2)).unwrap();
        assert_abs_diff_eq!(quantum_mutual_information(&classical), 1.0, epsilon = 1e-12);
        let mixed = crate::qmat::validate_density_matrix(CMatrix::identity(4).scale(0.25), (2, 2)).unwrap();
        assert_abs_diff_eq!(quantum_mutual_information(&mixed), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_report() {
        let r = measure_report(&bell_state(BellKind::PhiPlus), &cfg()).unwrap();
        assert_abs_diff_eq!(r.mutual_info, 2.0, epsilon = 1e-9);
        for v in &r.values()[1..] {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-6);
        }
        assert!(r.violations.is_empty());
        assert!(r.mid_detail.degenerate_a && r.mid_detail.degenerate_b);
    }

    #[test]
    fn classically_correlated_state_has_zero_discord() {
        let rho =
            crate::qmat::validate_density_matrix(CMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]), (2, 2)).unwrap();
        for dir in [Direction::AtoB, Direction::BtoA] {
            assert!(discord(&rho, dir, &cfg()).unwrap().value.abs() < 1e-6);
            assert!(demon_discord(&rho, dir, &cfg()).unwrap().value.abs() < 1e-6);
        }
    }

    #[test]
    fn random_state_orderings() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let rho = random_density((2, 2), None, &mut rng).unwrap();
            let r = measure_report(&rho, &cfg()).unwrap();
            assert!(r.violations.is_empty(), "{:?}", r.violations);
        }
    }

    #[test]
    fn reported_angles_reproduce_values() {
        let rho = random_density((2, 2), None, &mut rng_from_seed(9)).unwrap();
        let r = measure_report(&rho, &cfg()).unwrap();
        let tq = TwoQubit::new(&rho).unwrap();
        let info = quantum_info_table(&rho);
        let (h_a, h_b, h_ab) = tq.classical(&r.m3b_angles.values);
        assert_eq!(r.m3b, h_ab - info.s_ab);
        let (h_a2, _, h_ab2) = tq.classical(&r.m2b_ab_angles.values);
        assert_abs_diff_eq!(r.m2b_ab, h_ab2 - h_a2 - info.s_b_given_a, epsilon = 1e-15);
        let _ = (h_a, h_b);
        // B→A angles are stored in A-major order.
        let (_, h_b3, h_ab3) = tq.classical(&r.m2b_ba_angles.values);
        assert_abs_diff_eq!(r.m2b_ba, h_ab3 - h_b3 - info.s_a_given_b, epsilon = 1e-12);
    }

    #[test]
    fn non_two_qubit_is_rejected() {
        let rho = random_density((2, 3), None, &mut rng_from_seed(1)).unwrap();
        assert!(matches!(wpm(&rho, &cfg()), Err(Error::WrongDimensions(2, 3))));
        assert!(mid(&rho, &cfg()).is_ok());
    }

    #[test]
    fn ordering_check_flags_without_clamping() {
        let mut v = [Some(0.5); 10];
        v[MeasureKind::Wpm.index()] = Some(0.6);
        let viol = check_orderings(&v, 1e-4);
        assert!(viol.iter().any(|x| x.relation == "mid >= wpm" && (x.amount - 0.1).abs() < 1e-12));
        v[MeasureKind::Wpm.index()] = None;
        assert!(check_orderings(&v, 1e-4).is_empty());
    }

    #[test]
    fn measure_names_round_trip() {
        for k in MeasureKind::ALL {
            assert_eq!(MeasureKind::from_name(k.name()), Some(k));
        }
    }

    #[test]
    fn ensemble_f_examples() {
        let tri = triangle_ensemble();
        assert_abs_diff_eq!(ensemble_f(&tri, &Vector3::y()), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ensemble_f(&tri, &-tri.vectors()[0]), 1.5f64.log2(), epsilon = 1e-12);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let m = crate::random::random_unit_vector(&mut rng);
            let direct: f64 = tri
                .vectors()
                .iter()
                .map(|n| {
                    let x = 1.0 + n.dot(&m);
                    if x > 0.0 {
                        x * x.log2() / 3.0
                    } else {
                        0.0
                    }
                })
                .sum();
            assert_abs_diff_eq!(ensemble_f(&tri, &m), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_symmetry_precondition() {
        let ens = CqEnsemble::new(crate::entropy::ProbVector::uniform(1), vec![Vector3::z()]).unwrap();
        let trine = symmetric_qubit_povm(SymmetricKind::Trine, &SymmetricKind::Trine.dual_orientation());
        assert!(matches!(cq_discord_closed_form(&ens, &trine), Err(Error::SymmetryViolated(_))));
    }
}

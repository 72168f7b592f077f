//! Randomized property suites. Every trial draws from its own seeded
//! stream `seed ⊕ trial`, so reports do not depend on the worker count.

use std::fmt;

use qcorr::demon::{net_classical_work, refined_net_classical_work, BMeasurement};
use qcorr::entropy::{entropy_bits, von_neumann_entropy};
use qcorr::meas::{random_povm, random_rank_one_povm};
use qcorr::measures::{classical_mutual_information_povm, measure_report, MeasureKind, ORDERING_RELATIONS, ORDERING_SLACK};
use qcorr::optim::OptimConfig;
use qcorr::qmat::CMatrix;
use qcorr::random::{random_simplex, rng_from_seed, StateRng};
use qcorr::states::random_density;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PovmIneq,
    EnsembleIneq,
    FineGraining,
    Demon,
    Orderings,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::PovmIneq,
        Suite::EnsembleIneq,
        Suite::FineGraining,
        Suite::Demon,
        Suite::Orderings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PovmIneq => "povm-ineq",
            Suite::EnsembleIneq => "ensemble-ineq",
            Suite::FineGraining => "fine-graining",
            Suite::Demon => "demon",
            Suite::Orderings => "orderings",
        }
    }

    pub fn from_name(name: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CliError::Input(format!("unknown check suite {name:?}")))
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::PovmIneq | Suite::EnsembleIneq => 1000,
            Suite::FineGraining | Suite::Orderings => 500,
            Suite::Demon => 200,
        }
    }

    /// Largest tolerated failure of the checked relation.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::PovmIneq | Suite::EnsembleIneq | Suite::Demon => 1e-9,
            Suite::FineGraining => 1e-10,
            Suite::Orderings => ORDERING_SLACK,
        }
    }
}

/// A checked relation: it holds by `margin` (negative when it fails).
#[derive(Debug, Clone, Copy)]
struct Margin {
    margin: f64,
    tolerance: f64,
}

impl Margin {
    fn inequality(margin: f64, tolerance: f64) -> Self {
        Self { margin, tolerance }
    }

    fn equality(diff: f64, tolerance: f64) -> Self {
        Self {
            margin: -diff.abs(),
            tolerance,
        }
    }

    fn violated(&self) -> bool {
        self.margin < -self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest margin seen; negative values are failures.
    pub worst_margin: f64,
    pub tolerance: f64,
    /// First failing trials, at most ten.
    pub failing_trials: Vec<usize>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: trials={} violations={} worst_margin={:.3e} tolerance={:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.trials,
            self.violations,
            self.worst_margin,
            self.tolerance
        )
    }
}

fn single_state(dim: usize, rng: &mut StateRng) -> CliResult<CMatrix> {
    let rank = rng.random_range(1..=dim);
    Ok(random_density((dim, 1), Some(rank), rng)?.into_matrix())
}

/// `H(p) ≥ S(ρ) − Σ p_j log₂ μ_j ≥ S(ρ)` for rank-one POVMs (even trials);
/// `H(p) ≥ S(ρ) − Σ p_j log₂ tr E_j` for general ones (odd trials).
fn povm_trial(trial: usize, rng: &mut StateRng) -> CliResult<Vec<Margin>> {
    let dim = rng.random_range(2..=3);
    let rho = random_density((dim, 1), None, rng)?.into_matrix();
    let s = von_neumann_entropy(&rho)?;
    let tol = Suite::PovmIneq.tolerance();
    if trial % 2 == 0 {
        let n = dim + rng.random_range(0..=3);
        let e = random_rank_one_povm(dim, n, rng);
        let p = e.probabilities(&rho);
        let middle = s - p.iter().zip(e.weights()).map(|(pj, mu)| pj * mu.log2()).sum::<f64>();
        Ok(vec![
            Margin::inequality(entropy_bits(&p) - middle, tol),
            Margin::inequality(middle - s, tol),
        ])
    } else {
        let rank = rng.random_range(1..=dim);
        let n = rng.random_range(1..=4).max(dim.div_ceil(rank));
        let e = random_povm(dim, n, rank, rng);
        let p = e.probabilities(&rho);
        let bound = s - p
            .iter()
            .zip(e.elements())
            .map(|(pj, ej)| pj * ej.trace().re.log2())
            .sum::<f64>();
        Ok(vec![Margin::inequality(entropy_bits(&p) - bound, tol)])
    }
}

/// `H(q) ≥ S(Σ q_j ρ_j) − Σ q_j S(ρ_j)`.
fn ensemble_trial(rng: &mut StateRng) -> CliResult<Vec<Margin>> {
    let dim = rng.random_range(2..=3);
    let n = rng.random_range(1..=5);
    let q = random_simplex(n, rng);
    let mut mean = CMatrix::zeros(dim);
    let mut inner = 0.0;
    for &qj in &q {
        let rj = single_state(dim, rng)?;
        inner += qj * von_neumann_entropy(&rj)?;
        mean = &mean + &rj.scale(qj);
    }
    let holevo = von_neumann_entropy(&mean.hermitian_part())? - inner;
    Ok(vec![Margin::inequality(entropy_bits(&q) - holevo, Suite::EnsembleIneq.tolerance())])
}

/// Splitting coarse POVMs into their rank-one eigen-pieces never lowers
/// the classical mutual information.
fn fine_graining_trial(rng: &mut StateRng) -> CliResult<Vec<Margin>> {
    let db = rng.random_range(2..=3);
    let rho = random_density((2, db), None, rng)?;
    let n_a = rng.random_range(2..=3);
    let e = random_povm(2, n_a, 2, rng);
    let n_b = rng.random_range(2..=3);
    let f = random_povm(db, n_b, db, rng);
    let coarse = classical_mutual_information_povm(&rho, &e, &f)?;
    let fine_e = e.fine_grain().0.to_povm();
    let fine_f = f.fine_grain().0.to_povm();
    let one_side = classical_mutual_information_povm(&rho, &fine_e, &f)?;
    let both = classical_mutual_information_povm(&rho, &fine_e, &fine_f)?;
    let tol = Suite::FineGraining.tolerance();
    Ok(vec![
        Margin::inequality(one_side - coarse, tol),
        Margin::inequality(both - one_side, tol),
    ])
}

/// Coarse and refined ledgers agree; rank-one ledgers reduce to
/// `log₂(d_A d_B) − H(A,B)`.
fn demon_trial(rng: &mut StateRng) -> CliResult<Vec<Margin>> {
    let db = rng.random_range(2..=3);
    let rho = random_density((2, db), None, rng)?;
    let n_a = rng.random_range(1..=3);
    let e = random_povm(2, n_a, 2, rng);
    let b = BMeasurement::Conditioned {
        c_of_a: (0..n_a).map(|_| rng.random_range(0..2)).collect(),
        povms: (0..2)
            .map(|_| {
                let n = rng.random_range(1..=3);
                random_povm(db, n, db, rng)
            })
            .collect(),
    };
    let coarse = net_classical_work(&rho, &e, &b)?;
    let refined = refined_net_classical_work(&rho, &e, &b)?;

    let e1 = random_rank_one_povm(2, rng.random_range(2..=4), rng).to_povm();
    let f1 = random_rank_one_povm(db, db + rng.random_range(0..=2), rng).to_povm();
    let l = net_classical_work(&rho, &e1, &BMeasurement::Unconditioned(f1))?;
    Ok(vec![
        Margin::equality(coarse.w_net - refined.ledger.w_net, Suite::Demon.tolerance()),
        Margin::equality(l.log_dim - l.w_net - l.h_ab, 1e-10),
    ])
}

/// Every ordering relation and nonnegativity on a full-rank state.
fn orderings_trial(rng: &mut StateRng, optim: &OptimConfig) -> CliResult<Vec<Margin>> {
    let rho = random_density((2, 2), None, rng)?;
    let r = measure_report(&rho, optim)?;
    let tol = Suite::Orderings.tolerance();
    let mut out: Vec<Margin> = ORDERING_RELATIONS
        .iter()
        .map(|&(g, l)| Margin::inequality(r.get(g) - r.get(l), tol))
        .collect();
    out.extend(MeasureKind::ALL.iter().map(|&k| Margin::inequality(r.get(k), tol)));
    Ok(out)
}

fn trial_margins(suite: Suite, trial: usize, seed: u64, optim: &OptimConfig) -> CliResult<Vec<Margin>> {
    let mut rng = rng_from_seed(seed ^ trial as u64);
    match suite {
        Suite::PovmIneq => povm_trial(trial, &mut rng),
        Suite::EnsembleIneq => ensemble_trial(&mut rng),
        Suite::FineGraining => fine_graining_trial(&mut rng),
        Suite::Demon => demon_trial(&mut rng),
        Suite::Orderings => orderings_trial(&mut rng, optim),
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, optim: &OptimConfig) -> CliResult<SuiteReport> {
    if trials == 0 {
        return Err(CliError::Input("a check needs at least one trial".into()));
    }
    let per_trial: Vec<Vec<Margin>> = (0..trials)
        .into_par_iter()
        .map(|t| trial_margins(suite, t, seed, optim))
        .collect::<CliResult<_>>()?;
    let failing: Vec<usize> = per_trial
        .iter()
        .enumerate()
        .filter(|(_, m)| m.iter().any(Margin::violated))
        .map(|(t, _)| t)
        .collect();
    let worst_margin = per_trial
        .iter()
        .flatten()
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite,
        trials,
        seed,
        violations: failing.len(),
        worst_margin,
        tolerance: suite.tolerance(),
        failing_trials: failing.into_iter().take(10).collect(),
    })
}

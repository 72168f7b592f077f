//! Work accounting for local demons with one-way communication: coarse
//! POVM ledgers, their rank-one refinements, and the no-communication
//! work deficit.
//!
//! Post-measurement states use the canonical Kraus operators `√E`.

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_bits, quantum_info_table, spectral_entropy};
use crate::error::{Error, Result};
use crate::meas::{ConditionedStrategy, Povm, PovmElement, RankOnePovm, ZERO_OUTCOME};
use crate::qmat::{hermitian_eig, partial_trace_matrix, tensor_product, CMatrix, DensityMatrix, Subsystem, C64};

/// B's measurement: one POVM for every A-outcome, or one selected by label.
#[derive(Debug, Clone, PartialEq)]
pub enum BMeasurement {
    Unconditioned(Povm),
    Conditioned { c_of_a: Vec<usize>, povms: Vec<Povm> },
}

impl BMeasurement {
    fn for_outcome(&self, a: usize) -> &Povm {
        match self {
            BMeasurement::Unconditioned(p) => p,
            BMeasurement::Conditioned { c_of_a, povms } => &povms[c_of_a[a]],
        }
    }

    fn dim(&self) -> usize {
        match self {
            BMeasurement::Unconditioned(p) => p.dim(),
            BMeasurement::Conditioned { povms, .. } => povms[0].dim(),
        }
    }

    fn validate(&self, n_a: usize) -> Result<()> {
        if let BMeasurement::Conditioned { c_of_a, povms } = self {
            if c_of_a.len() != n_a {
                return Err(Error::InvalidStrategy(format!("{} labels for {n_a} A-outcomes", c_of_a.len())));
            }
            if povms.is_empty() || c_of_a.iter().any(|&l| l >= povms.len()) {
                return Err(Error::InvalidStrategy("label without a B measurement".into()));
            }
            if let Some(p) = povms.iter().find(|p| p.dim() != povms[0].dim()) {
                return Err(Error::DimMismatch {
                    expected: povms[0].dim(),
                    got: p.dim(),
                });
            }
        }
        Ok(())
    }
}

impl From<&ConditionedStrategy> for BMeasurement {
    fn from(s: &ConditionedStrategy) -> Self {
        BMeasurement::Conditioned {
            c_of_a: (0..s.a_povm().len()).map(|a| s.label(a)).collect(),
            povms: s.b_povms().iter().map(RankOnePovm::to_povm).collect(),
        }
    }
}

/// Itemized net classical work, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkLedger {
    pub log_dim: f64,
    /// `H(A,B)` of the coarse outcome records.
    pub h_ab: f64,
    /// `Σ_a p_a S(ρ_{A|a})`.
    pub residual_a: f64,
    /// `Σ_ab p_ab S(ρ_{B|ab})`.
    pub residual_b: f64,
    /// `Σ_a p_a H(λ_{α|a})` from refinement records; zero for a coarse ledger.
    pub record_a: f64,
    /// `Σ_ab p_ab H(λ_{β|ab})` from refinement records; zero for a coarse ledger.
    pub record_b: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_net: f64,
}

impl WorkLedger {
    fn assemble(log_dim: f64, h_ab: f64, residual_a: f64, residual_b: f64, record_a: f64, record_b: f64) -> Self {
        let w_plus = log_dim - residual_a - residual_b;
        let w_minus = h_ab + record_a + record_b;
        Self {
            log_dim,
            h_ab,
            residual_a,
            residual_b,
            record_a,
            record_b,
            w_plus,
            w_minus,
            w_net: w_plus - w_minus,
        }
    }
}

/// Branch `(a, b)` of the coarse protocol.
#[derive(Debug, Clone)]
struct Branch {
    a: usize,
    b: usize,
    p_ab: f64,
    p_b_given_a: f64,
    rho_b_given_ab: CMatrix,
}

/// Branch `a` of the coarse protocol.
#[derive(Debug, Clone)]
struct ABranch {
    a: usize,
    p_a: f64,
    rho_a_given_a: CMatrix,
    rho_b_given_a: CMatrix,
}

struct Protocol {
    a_branches: Vec<ABranch>,
    branches: Vec<Branch>,
    /// Joint record probabilities over the disjoint B alphabet.
    records: Vec<f64>,
}

fn run_protocol(rho: &DensityMatrix, e: &Povm, b: &BMeasurement) -> Result<Protocol> {
    let (da, db) = rho.dims();
    if e.dim() != da {
        return Err(Error::DimMismatch { expected: da, got: e.dim() });
    }
    if b.dim() != db {
        return Err(Error::DimMismatch { expected: db, got: b.dim() });
    }
    b.validate(e.len())?;
    let id_b = CMatrix::identity(db);
    let mut a_branches = Vec::new();
    let mut branches = Vec::new();
    let mut records = Vec::new();
    for a in 0..e.len() {
        let f = b.for_outcome(a);
        let kraus = tensor_product(&e.kraus(a), &id_b);
        let post = (&(&kraus * rho.matrix()) * &kraus.adjoint()).hermitian_part();
        let p_a = post.trace().re;
        if p_a < ZERO_OUTCOME {
            records.extend(std::iter::repeat_n(0.0, f.len()));
            continue;
        }
        let post = post.scale(1.0 / p_a);
        let rho_a = partial_trace_matrix(&post, (da, db), Subsystem::A)?;
        let rho_b = partial_trace_matrix(&post, (da, db), Subsystem::B)?;
        for bi in 0..f.len() {
            let kb = f.kraus(bi);
            let unnorm = (&(&kb * &rho_b) * &kb.adjoint()).hermitian_part();
            let p_b_given_a = unnorm.trace().re.max(0.0);
            records.push(p_a * p_b_given_a);
            if p_b_given_a < ZERO_OUTCOME {
                continue;
            }
            branches.push(Branch {
                a,
                b: bi,
                p_ab: p_a * p_b_given_a,
                p_b_given_a,
                rho_b_given_ab: unnorm.scale(1.0 / p_b_given_a),
            });
        }
        a_branches.push(ABranch {
            a,
            p_a,
            rho_a_given_a: rho_a,
            rho_b_given_a: rho_b,
        });
    }
    Ok(Protocol {
        a_branches,
        branches,
        records,
    })
}

fn log_dim(rho: &DensityMatrix) -> f64 {
    let (da, db) = rho.dims();
    ((da * db) as f64).log2()
}

/// `W_c = log(d_A d_B) − H(A,B) − Σ p_a S(ρ_{A|a}) − Σ p_ab S(ρ_{B|ab})`.
pub fn net_classical_work(rho: &DensityMatrix, e: &Povm, b: &BMeasurement) -> Result<WorkLedger> {
    let proto = run_protocol(rho, e, b)?;
    let residual_a = proto
        .a_branches
        .iter()
        .map(|br| Ok(br.p_a * spectral_entropy(&br.rho_a_given_a)?))
        .sum::<Result<f64>>()?;
    let residual_b = proto
        .branches
        .iter()
        .map(|br| Ok(br.p_ab * spectral_entropy(&br.rho_b_given_ab)?))
        .sum::<Result<f64>>()?;
    Ok(WorkLedger::assemble(
        log_dim(rho),
        entropy_bits(&proto.records),
        residual_a,
        residual_b,
        0.0,
        0.0,
    ))
}

/// Rank-one refinement of a coarse POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub povm: RankOnePovm,
    /// Coarse outcome of each refined element.
    pub parent: Vec<usize>,
}

/// Splits `E_a` into `√E_a |α⟩⟨α| √E_a` along the eigenvectors `|α⟩` of the
/// per-outcome state `conditionals[a]` (`None`: any basis; the standard
/// one is used). Zero elements are dropped.
pub fn refine_to_rank_one(e: &Povm, conditionals: &[Option<CMatrix>]) -> Result<Refinement> {
    if conditionals.len() != e.len() {
        return Err(Error::DimMismatch {
            expected: e.len(),
            got: conditionals.len(),
        });
    }
    let d = e.dim();
    let mut elements = Vec::new();
    let mut parent = Vec::new();
    for (a, cond) in conditionals.iter().enumerate() {
        let root = e.kraus(a);
        let basis: Vec<Vec<C64>> = match cond {
            Some(state) => {
                let eig = hermitian_eig(state)?;
                (0..d).map(|k| eig.eigenvector(k)).collect()
            }
            None => (0..d).map(|k| CMatrix::identity(d).column(k)).collect(),
        };
        for alpha in basis {
            let v = root.mul_vec(&alpha);
            let weight: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if weight > 1e-14 {
                elements.push(PovmElement { weight, ket: v });
                parent.push(a);
            }
        }
    }
    Ok(Refinement {
        povm: RankOnePovm::new(d, elements)?,
        parent,
    })
}

/// Ledger of the refined protocol together with its refinements.
#[derive(Debug, Clone)]
pub struct RefinedLedger {
    pub ledger: WorkLedger,
    pub a_refinement: Refinement,
    /// B refinement for each coarse A-outcome (indexed by `a`).
    pub b_refinements: Vec<Option<Refinement>>,
}

/// Refined erasure cost `H(A,B) + Σ p_a H(λ_{α|a}) + Σ p_ab H(λ_{β|ab})`,
/// with the record distributions `λ` read off the refined elements'
/// outcome probabilities. Residual quantum entropies vanish.
pub fn refined_net_classical_work(rho: &DensityMatrix, e: &Povm, b: &BMeasurement) -> Result<RefinedLedger> {
    let proto = run_protocol(rho, e, b)?;
    let mut a_conditionals = vec![None; e.len()];
    for br in &proto.a_branches {
        a_conditionals[br.a] = Some(br.rho_a_given_a.clone());
    }
    let a_refinement = refine_to_rank_one(e, &a_conditionals)?;
    let rho_a = rho.marginal_a();
    let refined_probs = a_refinement.povm.probabilities(&rho_a);

    let mut record_a = 0.0;
    for br in &proto.a_branches {
        let lambda: Vec<f64> = refined_probs
            .iter()
            .zip(&a_refinement.parent)
            .filter(|(_, &par)| par == br.a)
            .map(|(p, _)| p / br.p_a)
            .collect();
        record_a += br.p_a * entropy_bits(&lambda);
    }

    let mut record_b = 0.0;
    let mut b_refinements = vec![None; e.len()];
    for abr in &proto.a_branches {
        let f = b.for_outcome(abr.a);
        let mut conds = vec![None; f.len()];
        for br in proto.branches.iter().filter(|br| br.a == abr.a) {
            conds[br.b] = Some(br.rho_b_given_ab.clone());
        }
        let refinement = refine_to_rank_one(f, &conds)?;
        let probs = refinement.povm.probabilities(&abr.rho_b_given_a);
        for br in proto.branches.iter().filter(|br| br.a == abr.a) {
            let lambda: Vec<f64> = probs
                .iter()
                .zip(&refinement.parent)
                .filter(|(_, &par)| par == br.b)
                .map(|(p, _)| p / br.p_b_given_a)
                .collect();
            record_b += br.p_ab * entropy_bits(&lambda);
        }
        b_refinements[abr.a] = Some(refinement);
    }

    Ok(RefinedLedger {
        ledger: WorkLedger::assemble(log_dim(rho), entropy_bits(&proto.records), 0.0, 0.0, record_a, record_b),
        a_refinement,
        b_refinements,
    })
}

/// `W_q − W_c` without communication: `[log d_A d_B − S(A,B)] − [log d_A −
/// S(A)] − [log d_B − S(B)]`.
pub fn work_deficit_no_comm(rho: &DensityMatrix) -> f64 {
    let (da, db) = rho.dims();
    let t = quantum_info_table(rho);
    let quantum = log_dim(rho) - t.s_ab;
    let classical = ((da as f64).log2() - t.s_a) + ((db as f64).log2() - t.s_b);
    quantum - classical
}

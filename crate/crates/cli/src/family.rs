//! Named state families: the product-to-Bell-diagonal alignment sweep, Bell
//! states, and the symmetric classical-quantum ensembles.

use std::io::Write;

use qcorr::bloch_analysis::{fig5_sweep, AlignedMeasure};
use qcorr::meas::{symmetric_qubit_povm, SymmetricKind};
use qcorr::measures::{
    cq_best_projective_information, cq_demon_discord_projective, cq_discord_closed_form, cq_f_max,
    cq_projective_information, measure_report, MeasureKind,
};
use qcorr::optim::OptimConfig;
use qcorr::states::{bell_state, tetrahedron_ensemble, triangle_ensemble, BellKind, CqEnsemble};

use crate::{format_float, format_opt, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Fig5,
    Bell,
    CqTriangle,
    CqTetrahedron,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Fig5, Family::Bell, Family::CqTriangle, Family::CqTetrahedron];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fig5 => "fig5",
            Family::Bell => "bell",
            Family::CqTriangle => "cq-triangle",
            Family::CqTetrahedron => "cq-tetrahedron",
        }
    }

    pub fn from_name(name: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| CliError::Input(format!("unknown family {name:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    /// Sweep points over `[0, 1]`.
    pub points: usize,
    pub measure: AlignedMeasure,
    pub optim: OptimConfig,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            points: 101,
            measure: AlignedMeasure::Wpm,
            optim: OptimConfig::default(),
        }
    }
}

/// One line of a classical-quantum family table.
#[derive(Debug, Clone, PartialEq)]
pub struct CqQuantity {
    pub name: &'static str,
    pub closed_form: Option<f64>,
    pub numeric: Option<f64>,
}

pub fn cq_quantities(family: Family, optim: &OptimConfig) -> CliResult<Vec<CqQuantity>> {
    let (ensemble, kind): (CqEnsemble, SymmetricKind) = match family {
        Family::CqTriangle => (triangle_ensemble(), SymmetricKind::Trine),
        Family::CqTetrahedron => (tetrahedron_ensemble(), SymmetricKind::Tetrahedron),
        other => return Err(CliError::Input(format!("{} is not a classical-quantum family", other.name()))),
    };
    let dual = symmetric_qubit_povm(kind, &kind.dual_orientation());
    let discord = cq_discord_closed_form(&ensemble, &dual)?;
    let (f_max, _) = cq_f_max(&ensemble, optim)?;
    let (best_projective, _) = cq_best_projective_information(&ensemble, optim)?;
    let demon = cq_demon_discord_projective(&ensemble, &dual, optim)?;
    let through_vertex = 1.0 - cq_projective_information(&ensemble, &ensemble.vectors()[0]);
    Ok(vec![
        CqQuantity {
            name: "discord_ab",
            closed_form: Some(discord),
            numeric: Some(1.0 - f_max),
        },
        CqQuantity {
            name: "povm_information",
            closed_form: Some(1.0 - discord),
            numeric: Some(f_max),
        },
        CqQuantity {
            name: "best_projective_information",
            closed_form: None,
            numeric: Some(best_projective),
        },
        CqQuantity {
            name: "symmetric_candidate",
            closed_form: Some(demon.symmetric_candidate),
            numeric: None,
        },
        CqQuantity {
            name: "demon_discord",
            closed_form: Some(demon.symmetric_candidate.min(through_vertex)),
            numeric: Some(demon.value),
        },
    ])
}

pub fn write_family<W: Write>(mut out: W, family: Family, params: &FamilyParams) -> CliResult<()> {
    writeln!(
        out,
        "# qcorr family {} points={} measure={} grid_theta={} grid_phi={} restarts={} tol={:e}",
        family.name(),
        params.points,
        params.measure.kind().name(),
        params.optim.grid_theta,
        params.optim.grid_phi,
        params.optim.restarts,
        params.optim.tol
    )?;
    let mut w = csv::Writer::from_writer(out);
    match family {
        Family::Fig5 => {
            w.write_record(["eps", params.measure.kind().name(), "cos_a", "cos_b", "degenerate", "flat_objective"])?;
            for r in fig5_sweep(params.points, params.measure, &params.optim)? {
                w.write_record([
                    format_float(r.eps),
                    format_float(r.value),
                    format_float(r.cos_a),
                    format_float(r.cos_b),
                    r.degenerate.to_string(),
                    r.flat_objective.to_string(),
                ])?;
            }
        }
        Family::Bell => {
            let mut header = vec!["state"];
            header.extend(MeasureKind::ALL.iter().map(|k| k.name()));
            w.write_record(&header)?;
            let report = measure_report(&bell_state(BellKind::PhiPlus), &params.optim)?;
            let mut record = vec!["phi_plus".to_string()];
            record.extend(report.values().iter().map(|&v| format_float(v)));
            w.write_record(&record)?;
        }
        Family::CqTriangle | Family::CqTetrahedron => {
            w.write_record(["quantity", "closed_form", "numeric"])?;
            for q in cq_quantities(family, &params.optim)? {
                w.write_record([q.name.to_string(), format_opt(q.closed_form), format_opt(q.numeric)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

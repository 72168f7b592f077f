//! Full report for a single state read from a JSON state file.

use qcorr::entanglement::{entanglement_pair, EntanglementPair};
use qcorr::entropy::{classical_info_table, quantum_info_table, ClassicalInfoTable, QuantumInfoTable};
use qcorr::meas::{joint_distribution_unconditioned, marginal_eigenbasis_povm, DEGENERACY_TOL};
use qcorr::measures::{measure_report, MeasureReport};
use qcorr::optim::OptimConfig;
use qcorr::qmat::DensityMatrix;
use qcorr::states::read_state_json;
use serde::Serialize;

use crate::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSummary {
    pub dims: [usize; 2],
    pub purity: f64,
    pub quantum: QuantumInfoTable,
    /// Both marginals measured in their own eigenbases.
    pub classical_eigenbasis: ClassicalInfoTable,
    pub measures: MeasureReport,
    pub entanglement: EntanglementPair,
}

pub fn summarize(rho: &DensityMatrix, optim: &OptimConfig) -> CliResult<StateSummary> {
    let (da, db) = rho.dims();
    let (e, _) = marginal_eigenbasis_povm(&rho.marginal_a(), DEGENERACY_TOL)?;
    let (f, _) = marginal_eigenbasis_povm(&rho.marginal_b(), DEGENERACY_TOL)?;
    Ok(StateSummary {
        dims: [da, db],
        purity: rho.purity(),
        quantum: quantum_info_table(rho),
        classical_eigenbasis: classical_info_table(&joint_distribution_unconditioned(rho, &e, &f)?),
        measures: measure_report(rho, optim)?,
        entanglement: entanglement_pair(rho)?,
    })
}

/// Pretty JSON report for the contents of a state file.
pub fn measure_text(text: &str, optim: &OptimConfig) -> CliResult<String> {
    let rho = read_state_json(text)?;
    let summary = summarize(&rho, optim)?;
    Ok(serde_json::to_string_pretty(&summary).expect("plain data serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcorr::states::{bell_state, write_state_json, BellKind};

    #[test]
    fn bell_summary() {
        let text = write_state_json(&bell_state(BellKind::PsiMinus));
        let out: serde_json::Value = serde_json::from_str(&measure_text(&text, &OptimConfig::default()).unwrap()).unwrap();
        assert!((out["measures"]["mutual_info"].as_f64().unwrap() - 2.0).abs() < 1e-9);
        assert!((out["measures"]["discord_ab"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        assert!((out["entanglement"]["eof"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!((out["classical_eigenbasis"]["mutual_info"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn malformed_input_is_an_input_error() {
        let err = measure_text("{\"dims\": [2, 2]", &OptimConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

//! Seeded batch scans over random two-qubit states, one CSV row per state.

use std::io::{Read, Write};

use qcorr::entanglement::entanglement_pair;
use qcorr::entropy::quantum_info_table;
use qcorr::measures::{measure_values, MeasureKind, OrderingViolation, ORDERING_SLACK};
use qcorr::optim::OptimConfig;
use qcorr::random::rng_from_seed;
use qcorr::states::random_density;
use rayon::prelude::*;

use crate::{format_float, format_opt, CliError, CliResult};

pub const COLUMNS: [&str; 17] = [
    "index",
    "seed",
    "purity",
    "S_AB",
    "mutual_info",
    "mid",
    "wpm",
    "m2b_ab",
    "m2b_ba",
    "discord_ab",
    "discord_ba",
    "m3b",
    "dd_ab",
    "dd_ba",
    "concurrence",
    "eof",
    "violations",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub n_states: usize,
    pub seed: u64,
    /// `None` samples full-rank states.
    pub rank: Option<usize>,
    pub measures: Vec<MeasureKind>,
    pub optim: OptimConfig,
}

impl ScanConfig {
    pub fn new(n_states: usize, seed: u64) -> Self {
        Self {
            n_states,
            seed,
            rank: None,
            measures: MeasureKind::ALL.to_vec(),
            optim: OptimConfig::default(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n_states == 0 {
            return Err(CliError::Input("scan needs at least one state".into()));
        }
        if let Some(r) = self.rank {
            if !(1..=4).contains(&r) {
                return Err(CliError::Input(format!("rank {r} outside 1..=4")));
            }
        }
        if self.measures.is_empty() {
            return Err(CliError::Input("no measures selected".into()));
        }
        Ok(())
    }

    /// Full configuration echo for the `#` header line.
    pub fn header_comment(&self) -> String {
        let rank = self.rank.map_or("full".to_string(), |r| r.to_string());
        let measures: Vec<&str> = self.measures.iter().map(|k| k.name()).collect();
        let o = &self.optim;
        format!(
            "# qcorr scan n={} seed={} rank={} measures={} grid_theta={} grid_phi={} max_grid_points={} \
             refine_starts={} restarts={} tol={:e} max_iter={} optim_seed={} slack={:e}",
            self.n_states,
            self.seed,
            rank,
            measures.join(";"),
            o.grid_theta,
            o.grid_phi,
            o.max_grid_points,
            o.refine_starts,
            o.restarts,
            o.tol,
            o.max_iter,
            o.seed,
            ORDERING_SLACK
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub index: usize,
    pub seed: u64,
    pub purity: f64,
    pub s_ab: f64,
    /// In [`MeasureKind::ALL`] order; `None` when not selected.
    pub values: [Option<f64>; 10],
    pub concurrence: f64,
    pub eof: f64,
    pub violations: Vec<OrderingViolation>,
}

impl ScanRow {
    pub fn get(&self, kind: MeasureKind) -> Option<f64> {
        let k = MeasureKind::ALL.iter().position(|&m| m == kind).expect("listed");
        self.values[k]
    }
}

/// Per-state stream: independent of how states are spread over workers.
pub fn state_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

pub fn scan_row(config: &ScanConfig, index: usize) -> CliResult<ScanRow> {
    let seed = state_seed(config.seed, index);
    let rho = random_density((2, 2), config.rank, &mut rng_from_seed(seed))?;
    let (values, violations) = measure_values(&rho, &config.measures, &config.optim, ORDERING_SLACK)?;
    let ent = entanglement_pair(&rho)?;
    Ok(ScanRow {
        index,
        seed,
        purity: rho.purity(),
        s_ab: quantum_info_table(&rho).s_ab,
        values,
        concurrence: ent.concurrence,
        eof: ent.eof,
        violations,
    })
}

/// Rows in index order whatever the worker count.
pub fn run_scan(config: &ScanConfig) -> CliResult<Vec<ScanRow>> {
    config.validate()?;
    (0..config.n_states)
        .into_par_iter()
        .map(|i| scan_row(config, i))
        .collect()
}

fn format_violations(v: &[OrderingViolation]) -> String {
    v.iter()
        .map(|x| format!("{}:{}", x.relation, format_float(x.amount)))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_violations(field: &str) -> CliResult<Vec<OrderingViolation>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|item| {
            let (relation, amount) = item
                .rsplit_once(':')
                .ok_or_else(|| CliError::Input(format!("malformed violation entry {item:?}")))?;
            Ok(OrderingViolation {
                relation: relation.to_string(),
                amount: parse_float(amount)?,
            })
        })
        .collect()
}

fn parse_float(s: &str) -> CliResult<f64> {
    s.parse().map_err(|_| CliError::Input(format!("not a number: {s:?}")))
}

fn parse_opt(s: &str) -> CliResult<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_float(s).map(Some)
    }
}

pub fn write_csv<W: Write>(mut out: W, config: &ScanConfig, rows: &[ScanRow]) -> CliResult<()> {
    writeln!(out, "{}", config.header_comment())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let mut record = vec![
            r.index.to_string(),
            r.seed.to_string(),
            format_float(r.purity),
            format_float(r.s_ab),
        ];
        record.extend(r.values.iter().map(|&v| format_opt(v)));
        record.push(format_float(r.concurrence));
        record.push(format_float(r.eof));
        record.push(format_violations(&r.violations));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> CliResult<Vec<ScanRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(CliError::Input(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let mut values = [None; 10];
            for (k, v) in values.iter_mut().enumerate() {
                *v = parse_opt(field(4 + k))?;
            }
            Ok(ScanRow {
                index: field(0).parse().map_err(|_| CliError::Input("bad index".into()))?,
                seed: field(1).parse().map_err(|_| CliError::Input("bad seed".into()))?,
                purity: parse_float(field(2))?,
                s_ab: parse_float(field(3))?,
                values,
                concurrence: parse_float(field(14))?,
                eof: parse_float(field(15))?,
                violations: parse_violations(field(16))?,
            })
        })
        .collect()
}

/// `"all"` or a comma-separated list of measure names.
pub fn parse_measures(arg: &str) -> CliResult<Vec<MeasureKind>> {
    if arg == "all" {
        return Ok(MeasureKind::ALL.to_vec());
    }
    arg.split(',')
        .map(|name| {
            let name = name.trim();
            MeasureKind::from_name(name).ok_or_else(|| CliError::Input(format!("unknown measure {name:?}")))
        })
        .collect()
}

/// `"full"` or a rank in `1..=4`.
pub fn parse_rank(arg: &str) -> CliResult<Option<usize>> {
    if arg == "full" {
        return Ok(None);
    }
    match arg.parse::<usize>() {
        Ok(r) if (1..=4).contains(&r) => Ok(Some(r)),
        _ => Err(CliError::Input(format!("rank must be 'full' or 1..=4, got {arg:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_index_streams() {
        assert_eq!(state_seed(0, 5), 5);
        assert_eq!(state_seed(0b1100, 0b1010), 0b0110);
    }

    #[test]
    fn selectors() {
        assert_eq!(parse_measures("all").unwrap().len(), 10);
        assert_eq!(parse_measures("wpm, discord_ab").unwrap(), vec![MeasureKind::Wpm, MeasureKind::DiscordAb]);
        assert!(parse_measures("nope").is_err());
        assert_eq!(parse_rank("full").unwrap(), None);
        assert_eq!(parse_rank("2").unwrap(), Some(2));
        assert!(parse_rank("5").is_err());
    }

    #[test]
    fn violation_field_round_trip() {
        let v = vec![
            OrderingViolation {
                relation: "wpm >= discord_ab".into(),
                amount: 0.125,
            },
            OrderingViolation {
                relation: "mid >= 0".into(),
                amount: 3e-3,
            },
        ];
        assert_eq!(parse_violations(&format_violations(&v)).unwrap(), v);
        assert!(parse_violations("").unwrap().is_empty());
    }
}

use rayon::prelude::*;
use serde::ser::{Error as _, SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use qkur::classical::classical_current_stats;
use qkur::counting::CountingScheme;
use qkur::kur::{SteadyStateAnalysis, UncertaintyReport};
use qkur::models::{build_dqd, build_qubit, dqd_adiabatic, dqd_classical, sample_network, DqdParams};
use qkur::report::{format_flag, format_float, Format, Sci};
use qkur::superop::OpenSystemModel;

use crate::config::{Experiment, SweepConfig};
use crate::CliError;

const NETWORK_SIZE: usize = 5;
/// Sweeps report the adiabatic activity over the whole range, including
/// couplings where the eliminated mode is not fast.
const SWEEP_GAP_RATIO: f64 = 0.0;

/// Leading columns shared by every experiment.
pub const BASE_COLUMNS: [&str; 11] =
    ["x", "J", "D", "A", "psi", "chi", "ratio", "bound_classical", "bound_psi", "bound_chi", "ok_psi"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(Option<f64>),
    Flag(Option<bool>),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => x.map(format_float).unwrap_or_default(),
            Cell::Flag(b) => format_flag(*b),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(x) => Sci(*x).serialize(s),
            Cell::Flag(b) => b.serialize(s),
            Cell::Int(i) => i.serialize(s),
            Cell::Text(t) if t.is_empty() => s.serialize_none(),
            Cell::Text(t) => t.serialize(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

struct Row<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.rows.iter().any(|r| r.len() != self.columns.len()) {
            return Err(S::Error::custom("row width does not match the header"));
        }
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for r in &self.rows {
            seq.serialize_element(&Row(&self.columns, r))?;
        }
        seq.end()
    }
}

impl Table {
    /// CSV with a single header row and LF line endings, or a JSON array of objects.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let encode = |e: &dyn std::fmt::Display| CliError::Encode(e.to_string());
        match format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(self).map_err(|e| encode(&e))?;
                text.push('\n');
                Ok(text)
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
                w.write_record(&self.columns).map_err(|e| encode(&e))?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv)).map_err(|e| encode(&e))?;
                }
                let bytes = w.into_inner().map_err(|e| encode(&e))?;
                String::from_utf8(bytes).map_err(|e| encode(&e))
            }
        }
    }
}

/// Report plus experiment-specific cells of one grid point or sample.
struct Point {
    report: Option<UncertaintyReport>,
    extras: Vec<Cell>,
    errors: Vec<String>,
}

impl Point {
    fn failed(width: usize, e: impl ToString) -> Self {
        Self { report: None, extras: vec![Cell::Float(None); width], errors: vec![e.to_string()] }
    }

    fn cells(self, x: Cell) -> Vec<Cell> {
        let r = self.report;
        let f = |get: fn(&UncertaintyReport) -> Option<f64>| Cell::Float(r.as_ref().and_then(get));
        let mut out = vec![
            x,
            f(|r| Some(r.current)),
            f(|r| Some(r.noise)),
            f(|r| Some(r.activity)),
            f(|r| r.psi),
            f(|r| Some(r.chi)),
            f(|r| r.ratio),
            f(|r| r.bound_classical),
            f(|r| r.bound_psi),
            f(|r| r.bound_chi),
            Cell::Flag(r.and_then(|r| r.ok_psi)),
        ];
        out.extend(self.extras);
        out.push(Cell::Text(self.errors.join("; ")));
        out
    }
}

fn extra_columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Fig1a => &["A_cl", "A_ad"],
        Experiment::Fig1b => &["D_classical", "C"],
        Experiment::Fig1c => &["A_cl", "A_ad", "chi_bound_unit", "chi_bound_quarter"],
        Experiment::Fig2 => &["seed_index", "psi_sign"],
        Experiment::QubitJump | Experiment::QubitDiffusive | Experiment::Verify => &[],
    }
}

fn analyse(model: &OpenSystemModel, scheme: &CountingScheme) -> qkur::Result<(SteadyStateAnalysis, UncertaintyReport)> {
    scheme.validate_for(model)?;
    let an = SteadyStateAnalysis::new(model)?;
    let report = an.report(scheme)?;
    Ok((an, report))
}

/// Classical and adiabatic activities; failures go to the error column.
fn classical_activities(p: &DqdParams, errors: &mut Vec<String>) -> [Cell; 2] {
    let a_cl = dqd_classical(p)
        .and_then(|(rm, w)| classical_current_stats(&rm, &w))
        .map(|s| s.activity)
        .map_err(|e| errors.push(format!("A_cl: {e}")))
        .ok();
    let a_ad = dqd_adiabatic(p, SWEEP_GAP_RATIO).map(|(_, a)| a).map_err(|e| errors.push(format!("A_ad: {e}"))).ok();
    [Cell::Float(a_cl), Cell::Float(a_ad)]
}

fn l1_coherence(an: &SteadyStateAnalysis) -> f64 {
    let rho = an.steady_state().matrix();
    let mut sum = 0.0;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if i != j {
                sum += rho[(i, j)].norm();
            }
        }
    }
    sum
}

fn dqd_point(e: Experiment, p: &DqdParams) -> Point {
    let width = extra_columns(e).len();
    let built = match build_dqd(p) {
        Ok(b) => b,
        Err(err) => return Point::failed(width, err),
    };
    let scheme = if e == Experiment::Fig1c { &built.1.charge_diff } else { &built.1.through };
    let (an, report) = match analyse(&built.0, scheme) {
        Ok(x) => x,
        Err(err) => return Point::failed(width, err),
    };
    let mut errors = Vec::new();
    let extras = match e {
        Experiment::Fig1a => classical_activities(p, &mut errors).to_vec(),
        Experiment::Fig1b => {
            let d_cl = dqd_classical(p)
                .and_then(|(rm, w)| classical_current_stats(&rm, &w))
                .map(|s| s.noise)
                .map_err(|err| errors.push(format!("D_classical: {err}")))
                .ok();
            vec![Cell::Float(d_cl), Cell::Float(Some(l1_coherence(&an)))]
        }
        _ => {
            let mut cells = classical_activities(p, &mut errors).to_vec();
            let a = report.activity;
            let denom = (a + report.chi > 0.0).then_some(a + report.chi);
            cells.push(Cell::Float(denom.map(|b| a / b)));
            cells.push(Cell::Float(denom.map(|b| 0.25 * a / b)));
            cells
        }
    };
    Point { report: Some(report), extras, errors }
}

fn qubit_point(e: Experiment, cfg: &SweepConfig, omega: f64) -> Point {
    let p = cfg.qubit.with_omega(omega);
    let result = build_qubit(&p).and_then(|(model, s)| {
        let scheme = if e == Experiment::QubitJump { s.emission } else { s.homodyne };
        analyse(&model, &scheme)
    });
    match result {
        Ok((_, report)) => Point { report: Some(report), extras: vec![], errors: vec![] },
        Err(err) => Point::failed(0, err),
    }
}

fn network_point(seed: u64, index: u64) -> Point {
    let sign = |psi: Option<f64>| {
        Cell::Int(psi.map_or(0, |p| {
            if p > 0.0 {
                1
            } else if p < 0.0 {
                -1
            } else {
                0
            }
        }))
    };
    let result = sample_network(seed, index, NETWORK_SIZE).and_then(|s| analyse(&s.model, &s.scheme));
    match result {
        Ok((_, report)) => {
            Point { report: Some(report), extras: vec![Cell::Int(index as i64), sign(report.psi)], errors: vec![] }
        }
        Err(err) => {
            Point { report: None, extras: vec![Cell::Int(index as i64), Cell::Int(0)], errors: vec![err.to_string()] }
        }
    }
}

/// Evaluates every grid point or ensemble sample in parallel; rows keep index order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Table, CliError> {
    let e = cfg.experiment;
    let mut columns = BASE_COLUMNS.to_vec();
    columns.extend_from_slice(extra_columns(e));
    columns.push("error");
    let rows: Vec<Vec<Cell>> = match e {
        Experiment::Fig1a | Experiment::Fig1b | Experiment::Fig1c => cfg
            .grid
            .values()
            .into_par_iter()
            .map(|g| dqd_point(e, &cfg.dqd.with_g(g)).cells(Cell::Float(Some(g))))
            .collect(),
        Experiment::QubitJump | Experiment::QubitDiffusive => {
            cfg.grid.values().into_par_iter().map(|w| qubit_point(e, cfg, w).cells(Cell::Float(Some(w)))).collect()
        }
        Experiment::Fig2 => {
            (0..cfg.samples).into_par_iter().map(|i| network_point(cfg.seed, i).cells(Cell::Int(i as i64))).collect()
        }
        Experiment::Verify => return Err(CliError::Config("verify does not produce a table".into())),
    };
    Ok(Table { columns, rows })
}

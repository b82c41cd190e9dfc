//! CSV and JSON rendering of [`UncertaintyReport`]s.
//!
//! Floats are written with 17 significant digits so that they parse back to
//! the same `f64`. Undefined fields become an empty CSV cell or JSON `null`.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::counting::Unraveling;
use crate::error::{invalid, Result};
use crate::kur::UncertaintyReport;

/// Column order shared by CSV headers and JSON objects.
pub const REPORT_FIELDS: [&str; 13] = [
    "kind",
    "J",
    "D",
    "A",
    "psi",
    "chi",
    "ratio",
    "bound_classical",
    "bound_psi",
    "bound_chi",
    "ok_classical",
    "ok_psi",
    "ok_chi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = crate::KurError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(invalid(format!("unknown format {other:?}"))),
        }
    }
}

/// Shortest exact rendering: 17 significant digits in scientific notation.
/// Non-finite values render as an empty string.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn format_flag(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// A float serialized verbatim with 17 significant digits, or `null`.
#[derive(Debug, Clone, Copy)]
pub struct Sci(pub Option<f64>);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.filter(|x| x.is_finite()) {
            Some(x) => RawValue::from_string(format_float(x)).map_err(S::Error::custom)?.serialize(s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Serialize)]
struct ReportRecord {
    kind: Unraveling,
    #[serde(rename = "J")]
    current: Sci,
    #[serde(rename = "D")]
    noise: Sci,
    #[serde(rename = "A")]
    activity: Sci,
    psi: Sci,
    chi: Sci,
    ratio: Sci,
    bound_classical: Sci,
    bound_psi: Sci,
    bound_chi: Sci,
    ok_classical: Option<bool>,
    ok_psi: Option<bool>,
    ok_chi: Option<bool>,
}

impl From<&UncertaintyReport> for ReportRecord {
    fn from(r: &UncertaintyReport) -> Self {
        Self {
            kind: r.kind,
            current: Sci(Some(r.current)),
            noise: Sci(Some(r.noise)),
            activity: Sci(Some(r.activity)),
            psi: Sci(r.psi),
            chi: Sci(Some(r.chi)),
            ratio: Sci(r.ratio),
            bound_classical: Sci(r.bound_classical),
            bound_psi: Sci(r.bound_psi),
            bound_chi: Sci(r.bound_chi),
            ok_classical: r.ok_classical,
            ok_psi: r.ok_psi,
            ok_chi: r.ok_chi,
        }
    }
}

/// CSV cells in [`REPORT_FIELDS`] order.
pub fn report_cells(r: &UncertaintyReport) -> Vec<String> {
    vec![
        r.kind.as_str().to_string(),
        format_float(r.current),
        format_float(r.noise),
        format_float(r.activity),
        format_opt(r.psi),
        format_float(r.chi),
        format_opt(r.ratio),
        format_opt(r.bound_classical),
        format_opt(r.bound_psi),
        format_opt(r.bound_chi),
        format_flag(r.ok_classical),
        format_flag(r.ok_psi),
        format_flag(r.ok_chi),
    ]
}

/// JSON object for one report, with floats at full precision.
pub fn report_json(r: &UncertaintyReport) -> Result<String> {
    serde_json::to_string(&ReportRecord::from(r)).map_err(|e| invalid(e.to_string()))
}

/// Header plus one row (CSV, LF line endings) or a single JSON object.
pub fn emit_report(r: &UncertaintyReport, format: Format) -> Result<String> {
    match format {
        Format::Json => report_json(r),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
            let io = |e: csv::Error| invalid(e.to_string());
            w.write_record(REPORT_FIELDS).map_err(io)?;
            w.write_record(report_cells(r)).map_err(io)?;
            let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
        }
    }
}

/// Parses CSV with a [`REPORT_FIELDS`] header; extra columns are ignored.
pub fn parse_csv_reports(text: &str) -> Result<Vec<UncertaintyReport>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<UncertaintyReport>, _>>()
        .map_err(|e| invalid(e.to_string()))
}

pub fn parse_json_report(text: &str) -> Result<UncertaintyReport> {
    serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{CurrentStatistics, MethodTag};
    use crate::kur::kur_report;
    use crate::models::{build_dqd, DqdParams};

    fn dqd_report() -> UncertaintyReport {
        let (m, s) = build_dqd(&DqdParams::default()).unwrap();
        kur_report(&m, &s.through).unwrap()
    }

    #[test]
    fn float_rendering_is_exact() {
        for x in [0.1, -0.4, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(f64::NAN), "");
        assert_eq!(format_float(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn json_carries_psi() {
        let text = emit_report(&dqd_report(), Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["psi"].as_f64().unwrap() + 0.4).abs() < 1e-12);
        assert_eq!(v["kind"], "jump");
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = REPORT_FIELDS.to_vec();
        expected.sort_unstable();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort_unstable();
        assert_eq!(keys_sorted, expected);
    }

    #[test]
    fn undefined_fields_render_empty_and_null() {
        let stats = CurrentStatistics { current: 0.0, noise: 0.3, activity: 1.0, method: MethodTag::Drazin };
        let r = UncertaintyReport::from_parts(Unraveling::Jump, &stats, None, 0.2);
        let csv = emit_report(&r, Format::Csv).unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[6], "");
        assert_eq!(row[4], "");
        let json = emit_report(&r, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["ratio"].is_null());
        assert!(v["ok_psi"].is_null());
    }

    #[test]
    fn csv_uses_lf_and_header_order() {
        let csv = emit_report(&dqd_report(), Format::Csv).unwrap();
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().next().unwrap(), REPORT_FIELDS.join(","));
    }

    #[test]
    fn round_trips_agree() {
        let r = dqd_report();
        let from_csv = parse_csv_reports(&emit_report(&r, Format::Csv).unwrap()).unwrap();
        let from_json = parse_json_report(&emit_report(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(from_csv, vec![r]);
        assert_eq!(from_json, r);
    }
}

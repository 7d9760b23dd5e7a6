//! Report assembly and output formatting (12 significant digits throughout).

use std::fmt::Write as _;

use eulerdeg::boundary::{BoundaryTheorem, BoundaryZeroRecord};
use eulerdeg::connection::FlatnessReport;
use eulerdeg::gbc::{CurvedManifold, GbcResult};
use eulerdeg::numeric::round_sig12;
use eulerdeg::zeros::ManifoldZero;
use eulerdeg::zeros::ZeroRecord;
use serde::Serialize;
use serde_json::Value;

use crate::scenario::SCHEMA_VERSION;

/// One summary line: a computed quantity against its oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRow {
    pub method: String,
    pub raw: f64,
    pub rounded: Option<i64>,
    pub oracle: Option<i64>,
    pub residual: f64,
    pub agree: bool,
    /// Disagreement on an asserted row fails the run.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSumSection {
    pub manifold: String,
    pub sum: i64,
    pub degree: i64,
    pub oracle: i64,
    pub oracle_kind: String,
    pub seam_attempts: usize,
    pub zeros: Vec<ManifoldZero>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySection {
    pub interior_sum: i64,
    pub boundary_all_half: f64,
    pub boundary_inward: i64,
    pub chi_paper: f64,
    pub chi_morse: i64,
    pub chi_oracle: i64,
    pub flags: Vec<String>,
    pub zeros: Vec<ZeroRecord>,
    pub boundary_zeros: Vec<BoundaryZeroRecord>,
    pub chi_transversal: Option<i64>,
    pub boundary_winding_sum: i64,
    pub transversal: bool,
    pub constant_alpha: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub paper_hypotheses: bool,
    pub paper_asserted: bool,
    pub orientation: String,
}

impl BoundarySection {
    pub fn new(t: BoundaryTheorem, paper_asserted: bool) -> Self {
        Self {
            interior_sum: t.interior_sum,
            boundary_all_half: t.boundary_all_half,
            boundary_inward: t.boundary_inward,
            chi_paper: t.chi_paper,
            chi_morse: t.chi_morse,
            chi_oracle: t.chi_oracle,
            flags: t.flags,
            zeros: t.interior,
            boundary_zeros: t.boundary.zeros,
            chi_transversal: t.chi_transversal,
            boundary_winding_sum: t.boundary.winding_sum,
            transversal: t.boundary.transversal,
            constant_alpha: t.boundary.constant_alpha,
            alpha_min: t.boundary.alpha_min,
            alpha_max: t.boundary.alpha_max,
            paper_hypotheses: t.paper_hypotheses,
            paper_asserted,
            orientation: "outward normal; boundary sphere with induced orientation".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbcSection {
    pub manifold: CurvedManifold,
    pub oracle: i64,
    #[serde(flatten)]
    pub result: GbcResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessSection {
    pub winding: i32,
    #[serde(flatten)]
    pub report: FlatnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiReport {
    pub schema: u32,
    pub scenario: String,
    pub description: String,
    pub resolution_scale: f64,
    pub rows: Vec<MethodRow>,
    pub index_sum: Option<IndexSumSection>,
    pub boundary: Option<BoundarySection>,
    pub gbc: Option<GbcSection>,
    pub flatness: Option<FlatnessSection>,
    /// Comparisons that disagree but are not asserted.
    pub warnings: Vec<String>,
}

impl ChiReport {
    pub fn new(scenario: &str, description: &str, resolution_scale: f64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            description: description.to_string(),
            resolution_scale,
            rows: Vec::new(),
            index_sum: None,
            boundary: None,
            gbc: None,
            flatness: None,
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.asserted || r.agree)
    }

    pub fn push_row(&mut self, row: MethodRow) {
        if !row.agree && !row.asserted {
            self.warnings.push(format!(
                "{}: {} disagrees with oracle {} (not asserted)",
                row.method,
                fmt_num(row.raw),
                row.oracle.map_or("-".to_string(), |o| o.to_string())
            ));
        }
        self.rows.push(row);
    }

    /// Pretty JSON with every float rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report is serializable");
        round_floats(&mut value);
        let mut text = serde_json::to_string_pretty(&value).expect("report is serializable");
        text.push('\n');
        text
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario);
        let _ = writeln!(
            out,
            "  {:<22} {:>20} {:>8} {:>7} {:>20} {:>6} {:>8}",
            "method", "raw", "rounded", "oracle", "residual", "agree", "asserted"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "  {:<22} {:>20} {:>8} {:>7} {:>20} {:>6} {:>8}",
                r.method,
                fmt_num(r.raw),
                r.rounded.map_or("-".into(), |v| v.to_string()),
                r.oracle.map_or("-".into(), |v| v.to_string()),
                fmt_num(r.residual),
                if r.agree { "yes" } else { "NO" },
                if r.asserted { "yes" } else { "no" }
            );
        }
        out
    }
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        let r = round_sig12(x);
        if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    } else {
        format!("{x}")
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig12(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_rounded_to_twelve_digits() {
        let mut r = ChiReport::new("t", "", 1.0);
        r.push_row(MethodRow {
            method: "m".into(),
            raw: 0.1 + 0.2,
            rounded: Some(0),
            oracle: Some(0),
            residual: 1.234567890123456e-7,
            agree: true,
            asserted: true,
        });
        let json = r.to_json();
        assert!(json.contains("\"raw\": 0.3,"), "{json}");
        assert!(json.contains("1.23456789012e-7"), "{json}");
        assert_eq!(fmt_num(1.234567890123456e-7), "1.23456789012e-7");
        assert_eq!(fmt_num(2.5), "2.5");
    }

    #[test]
    fn unasserted_disagreement_is_a_warning() {
        let mut r = ChiReport::new("t", "", 1.0);
        r.push_row(MethodRow {
            method: "boundary-paper".into(),
            raw: 0.0,
            rounded: Some(0),
            oracle: Some(1),
            residual: 0.0,
            agree: false,
            asserted: false,
        });
        assert!(r.passed());
        assert_eq!(r.warnings.len(), 1);
    }
}

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use super::metrics::{apply_unknown_policy, compute_metrics, MetricsReport, UnknownPolicy};
use super::runner::{CaseOutcome, CaseResult, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    /// Format implied by a file extension; anything unrecognised is
    /// markdown.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::Csv,
            Some("json") => Self::Json,
            _ => Self::Markdown,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

/// One table row with cells already formatted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "Mode")]
    pub mode: String,
    #[serde(rename = "Policy")]
    pub policy: String,
    #[serde(rename = "Valid")]
    pub valid: String,
    #[serde(rename = "Invalid")]
    pub invalid: String,
    #[serde(rename = "Unk.")]
    pub unknown: String,
    #[serde(rename = "Accuracy")]
    pub accuracy: String,
    #[serde(rename = "Precision")]
    pub precision: String,
    #[serde(rename = "Recall")]
    pub recall: String,
    #[serde(rename = "F1")]
    pub f1: String,
    #[serde(rename = "Time")]
    pub time: String,
}

const HEADERS: [&str; 10] = [
    "Mode", "Policy", "Valid", "Invalid", "Unk.", "Accuracy", "Precision", "Recall", "F1", "Time",
];

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", v * 100.0))
}

impl ReportRow {
    pub fn new(mode: Mode, r: &MetricsReport, show_time: bool) -> Self {
        let time = match (show_time, r.mean_time_secs) {
            (false, _) => "-".to_string(),
            (true, None) => "n/a".to_string(),
            (true, Some(t)) => format!("{t:.2}"),
        };
        Self {
            mode: mode.to_string(),
            policy: r.counts.policy.to_string(),
            valid: pct(r.valid_rate),
            invalid: pct(r.invalid_rate),
            unknown: pct(r.unknown_rate),
            accuracy: pct(r.accuracy),
            precision: pct(r.precision),
            recall: pct(r.recall),
            f1: pct(r.f1),
            time,
        }
    }

    fn cells(&self) -> [&str; 10] {
        [
            &self.mode,
            &self.policy,
            &self.valid,
            &self.invalid,
            &self.unknown,
            &self.accuracy,
            &self.precision,
            &self.recall,
            &self.f1,
            &self.time,
        ]
    }
}

pub fn write_csv_rows(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(HEADERS).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn parse_csv_rows(text: &str) -> Result<Vec<ReportRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

/// Metrics of one dataset run under one or more unknown policies.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub mode: Mode,
    pub metrics: Vec<MetricsReport>,
    pub cases: Vec<CaseResult>,
    pub show_time: bool,
}

impl BenchReport {
    /// Errored cases are left out of every metric. Cases are sorted by
    /// problem id so the report does not depend on input order.
    pub fn new(
        mode: Mode,
        results: &[CaseResult],
        policies: &[UnknownPolicy],
        show_time: bool,
    ) -> Self {
        let mut cases = results.to_vec();
        cases.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
        let judged: Vec<_> = cases.iter().filter_map(|c| Some((c.verdict()?, c.label))).collect();
        let kinds: Vec<_> = judged.iter().map(|(v, _)| v.kind).collect();
        let labels: Vec<_> = judged.iter().map(|(_, l)| *l).collect();
        let mean_time = (!judged.is_empty()).then(|| {
            judged.iter().map(|(v, _)| v.wall_time.as_secs_f64()).sum::<f64>()
                / judged.len() as f64
        });
        let metrics = policies
            .iter()
            .map(|&p| compute_metrics(&apply_unknown_policy(&kinds, &labels, p), mean_time))
            .collect();
        Self {
            mode,
            metrics,
            cases,
            show_time,
        }
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.metrics
            .iter()
            .map(|m| ReportRow::new(self.mode, m, self.show_time))
            .collect()
    }

    pub fn errored(&self) -> impl Iterator<Item = (&str, &str)> {
        self.cases.iter().filter_map(|c| match &c.outcome {
            CaseOutcome::Errored(e) => Some((c.problem_id.as_str(), e.as_str())),
            CaseOutcome::Verdict(_) => None,
        })
    }

    fn markdown(&self) -> String {
        let mut out = String::new();
        let errored = self.errored().count();
        let _ = writeln!(out, "# Plan verification report\n");
        let _ = writeln!(out, "Mode: {}", self.mode);
        let _ = writeln!(out, "Cases: {} (errored: {errored})\n", self.cases.len());
        let _ = writeln!(out, "| {} |", HEADERS.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(HEADERS.len()));
        for row in self.rows() {
            let _ = writeln!(out, "| {} |", row.cells().join(" | "));
        }
        let _ = writeln!(out, "\n## Counts\n");
        let _ = writeln!(out, "| Policy | TP | FP | TN | FN | Unknown |");
        let _ = writeln!(out, "|---|---|---|---|---|---|");
        for m in &self.metrics {
            let c = &m.counts;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                c.policy, c.tp, c.fp, c.tn, c.fn_, c.unknown
            );
        }
        let _ = writeln!(out, "\n## Cases\n");
        let _ = writeln!(out, "| Problem | Label | Verdict |");
        let _ = writeln!(out, "|---|---|---|");
        for c in &self.cases {
            let verdict = c.verdict().map_or("errored", |v| v.kind.as_str());
            let _ = writeln!(out, "| {} | {} | {verdict} |", c.problem_id, c.label);
        }
        let _ = writeln!(out, "\n## Errored\n");
        if errored == 0 {
            let _ = writeln!(out, "none");
        }
        for (id, e) in self.errored() {
            let _ = writeln!(out, "- {id}: {e}");
        }
        out
    }

    fn json(&self) -> Json {
        let mut metrics = serde_json::to_value(&self.metrics).expect("metrics serialize");
        if !self.show_time {
            for m in metrics.as_array_mut().into_iter().flatten() {
                m["mean_time_secs"] = Json::Null;
            }
        }
        let cases: Vec<Json> = self
            .cases
            .iter()
            .filter_map(|c| {
                let v = c.verdict()?;
                Some(json!({"problem_id": c.problem_id, "label": c.label, "verdict": v.kind.as_str()}))
            })
            .collect();
        let errored: Vec<Json> = self
            .errored()
            .map(|(id, e)| json!({"problem_id": id, "error": e}))
            .collect();
        json!({"mode": self.mode.as_str(), "metrics": metrics, "cases": cases, "errored": errored})
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => report.markdown(),
        ReportFormat::Csv => write_csv_rows(&report.rows()),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.json()).expect("json serialize");
            s.push('\n');
            s
        }
    }
}

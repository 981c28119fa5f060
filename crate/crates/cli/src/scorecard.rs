//! Scorecards in JSON, markdown and CSV.

use freegva_core::{Report, Verdict};
use serde::Serialize;

use crate::suite::Format;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Row<'a> {
    check: &'a str,
    params: &'a str,
    verdict: Verdict,
    window_limited: bool,
    /// First mismatching coefficient as `label: z^a q^b: left vs right`, or the first note.
    detail: String,
}

#[derive(Serialize)]
struct Counts {
    total: usize,
    pass: usize,
    fail: usize,
    #[serde(rename = "notApplicable")]
    not_applicable: usize,
}

#[derive(Serialize)]
struct Card<'a> {
    summary: Counts,
    results: Vec<Row<'a>>,
}

fn detail(r: &Report) -> String {
    if let Some((label, m)) = r.first_mismatch() {
        return format!("{label}: z^{} q^{}: {} vs {}", m.z, m.q, m.left, m.right);
    }
    match r.verdict {
        Verdict::Pass => String::new(),
        _ => r.notes.first().cloned().unwrap_or_default(),
    }
}

fn counts(reports: &[Report]) -> Counts {
    let n = |v| reports.iter().filter(|r| r.verdict == v).count();
    Counts {
        total: reports.len(),
        pass: n(Verdict::Pass),
        fail: n(Verdict::Fail),
        not_applicable: n(Verdict::NotApplicable),
    }
}

pub fn all_passed(reports: &[Report]) -> bool {
    reports.iter().all(|r| r.verdict != Verdict::Fail)
}

pub fn render(reports: &[Report], format: Format) -> String {
    let rows: Vec<Row> = reports
        .iter()
        .map(|r| Row {
            check: &r.check,
            params: &r.params,
            verdict: r.verdict,
            window_limited: r.window_limited,
            detail: detail(r),
        })
        .collect();
    let c = counts(reports);
    match format {
        Format::Json => {
            let card = Card { summary: c, results: rows };
            serde_json::to_string_pretty(&card).expect("scorecard serializes") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row).expect("csv row");
            }
            String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
        }
        Format::Markdown => {
            let mut out = String::from("| check | parameters | verdict | detail |\n|---|---|---|---|\n");
            for row in &rows {
                let wl = if row.window_limited { " (window-limited)" } else { "" };
                out.push_str(&format!(
                    "| {} | {} | {}{wl} | {} |\n",
                    row.check,
                    row.params,
                    row.verdict,
                    row.detail.replace('|', "\\|")
                ));
            }
            out.push_str(&format!(
                "\n{} checks: {} PASS, {} FAIL, {} N/A\n",
                c.total, c.pass, c.fail, c.not_applicable
            ));
            out
        }
        Format::Summary => {
            let mut out = String::new();
            for r in reports.iter().filter(|r| r.verdict == Verdict::Fail) {
                out.push_str(&r.summary());
                out.push('\n');
            }
            out.push_str(&format!("{} checks: {} PASS, {} FAIL, {} N/A\n", c.total, c.pass, c.fail, c.not_applicable));
            out
        }
    }
}

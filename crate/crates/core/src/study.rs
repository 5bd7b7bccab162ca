//! Per-hierarchy counts of mixins whose expected supertype checks out.

use serde::Serialize;

use crate::program::Program;
use crate::subtype::{supertype_line, supertype_report, SubtypeOptions};
use crate::syntax::TypeExpr;

/// `round(100 * verified / total)`, halves rounded up; `None` for an empty
/// hierarchy.
pub fn percentage(verified: usize, total: usize) -> Option<u32> {
    if total == 0 {
        return None;
    }
    Some(((200 * verified + total) / (2 * total)) as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyRow {
    pub name: String,
    pub total: usize,
    pub verified: usize,
    pub percentage: Option<u32>,
    /// One `X is [NOT ]SUPERTYPE of Y` line per pair.
    pub verdicts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl StudyRow {
    /// A hierarchy that could not be checked at all.
    pub fn failed(name: impl Into<String>, error: impl Into<String>) -> StudyRow {
        StudyRow {
            name: name.into(),
            total: 0,
            verified: 0,
            percentage: None,
            verdicts: Vec::new(),
            error: Some(error.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyTotals {
    pub total: usize,
    pub verified: usize,
    pub percentage: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub totals: StudyTotals,
}

pub fn study_row(p: &Program, label: &str, pairs: &[(TypeExpr, TypeExpr)], opts: &SubtypeOptions) -> StudyRow {
    let results = supertype_report(p, pairs, opts);
    let mut verified = 0;
    let mut verdicts = Vec::with_capacity(pairs.len());
    for ((sub, sup), r) in pairs.iter().zip(results) {
        match r {
            Ok(v) => {
                if v.holds() {
                    verified += 1;
                }
                verdicts.push(v.report_line());
            }
            Err(e) => verdicts.push(format!("{} ({})", supertype_line(sup, sub, false), e)),
        }
    }
    StudyRow {
        name: label.to_string(),
        total: pairs.len(),
        verified,
        percentage: percentage(verified, pairs.len()),
        verdicts,
        error: None,
    }
}

fn pct(p: Option<u32>) -> String {
    p.map(|p| p.to_string()).unwrap_or_else(|| "—".to_string())
}

impl StudyReport {
    pub fn new(rows: Vec<StudyRow>) -> StudyReport {
        let total = rows.iter().map(|r| r.total).sum();
        let verified = rows.iter().map(|r| r.verified).sum();
        StudyReport {
            rows,
            totals: StudyTotals {
                total,
                verified,
                percentage: percentage(verified, total),
            },
        }
    }

    /// Aligned table with a totals line.
    pub fn table(&self) -> String {
        let header = ["Hierarchy", "Mixins", "Verified", "%"];
        let mut lines: Vec<[String; 4]> = vec![header.map(String::from)];
        for r in &self.rows {
            lines.push([r.name.clone(), r.total.to_string(), r.verified.to_string(), pct(r.percentage)]);
        }
        lines.push([
            "Total".to_string(),
            self.totals.total.to_string(),
            self.totals.verified.to_string(),
            pct(self.totals.percentage),
        ]);
        let mut widths = [0usize; 4];
        for l in &lines {
            for (w, cell) in widths.iter_mut().zip(l) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for l in &lines {
            let mut row = format!("{:<w$}", l[0], w = widths[0]);
            for i in 1..4 {
                let pad = widths[i] - l[i].chars().count();
                row.push_str("  ");
                row.push_str(&" ".repeat(pad));
                row.push_str(&l[i]);
            }
            out.push_str(row.trim_end());
            out.push('\n');
        }
        out
    }

    /// Verdict lines and errors of every row, then the table.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            if let Some(e) = &r.error {
                out.push_str(&format!("{}: error: {}\n", r.name, e));
            }
            for v in &r.verdicts {
                out.push_str(v);
                out.push('\n');
            }
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&self.table());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_matches_published_rows() {
        assert_eq!(percentage(11, 11), Some(100));
        assert_eq!(percentage(4, 5), Some(80));
        assert_eq!(percentage(6, 6), Some(100));
        assert_eq!(percentage(12, 27), Some(44));
        assert_eq!(percentage(33, 49), Some(67));
        assert_eq!(percentage(1, 2), Some(50));
        assert_eq!(percentage(1, 8), Some(13));
        assert_eq!(percentage(0, 0), None);
    }

    #[test]
    fn empty_report() {
        let r = StudyReport::new(Vec::new());
        assert_eq!(
            r.totals,
            StudyTotals {
                total: 0,
                verified: 0,
                percentage: None
            }
        );
        assert_eq!(r.table(), "Hierarchy  Mixins  Verified  %\nTotal           0         0  —\n");
    }

    #[test]
    fn totals_sum_rows() {
        let row = |n: &str, t, v| StudyRow {
            name: n.into(),
            total: t,
            verified: v,
            percentage: percentage(v, t),
            verdicts: vec![],
            error: None,
        };
        let r = StudyReport::new(vec![row("A", 11, 11), row("B", 5, 4)]);
        assert_eq!((r.totals.total, r.totals.verified, r.totals.percentage), (16, 15, Some(94)));
    }
}

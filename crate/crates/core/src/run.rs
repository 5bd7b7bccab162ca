//! Executing parsed commands and reporting their results, shared by the
//! batch front end, the REPL and the web playground.

use std::collections::HashMap;

use serde::Serialize;

use crate::ident::Ident;
use crate::subst::rename_heap;
use crate::syntax::Formula;
use crate::entail::{check_entail_with, EntailOptions, Verdict};
use crate::linearize::linearize;
use crate::parser::CommandKind;
use crate::predgen::PredTable;
use crate::program::{Diagnostic, Program};
use crate::study::{study_row, StudyReport, StudyRow};
use crate::subtype::{is_subtype_with, SubtypeOptions};

pub const SCHEMA_VERSION: &str = "mixcheck-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub entail: EntailOptions,
    pub open_tail: bool,
}

impl RunOptions {
    pub fn subtype(&self) -> SubtypeOptions {
        SubtypeOptions {
            open_tail: self.open_tail,
            entail: self.entail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Entail,
    Subtype,
    Lin,
    Study,
}

/// How a query bears on the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
    /// Informational only (linearizations, study rows).
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub kind: QueryKind,
    pub input: String,
    /// `Valid`, `NotProven`, `Yes`, `Ok`, `Error`, or `k/n` for a study.
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub status: Status,
    #[serde(skip)]
    pub study: Option<StudyRow>,
}

impl QueryRecord {
    fn new(kind: QueryKind, input: String) -> QueryRecord {
        QueryRecord {
            kind,
            input,
            verdict: String::new(),
            residue: None,
            trace: None,
            order: None,
            error: None,
            status: Status::Info,
            study: None,
        }
    }

    fn failed(mut self, e: impl ToString) -> QueryRecord {
        self.verdict = "Error".to_string();
        self.error = Some(e.to_string());
        self.status = Status::Error;
        self
    }

    /// Human-readable form: the verdict line, then residue, order or study
    /// lines, then the trace when requested.
    pub fn render(&self, with_trace: bool) -> String {
        let mut out = String::new();
        let human = match (self.kind, self.status) {
            (_, Status::Error) => format!("error: {}", self.error.as_deref().unwrap_or("")),
            (QueryKind::Entail | QueryKind::Subtype, Status::Pass) => "Valid".to_string(),
            (QueryKind::Entail | QueryKind::Subtype, _) => "Invalid (not proven)".to_string(),
            _ => self.verdict.clone(),
        };
        match self.kind {
            QueryKind::Lin if self.status != Status::Error => {
                out.push_str(&self.order.as_ref().map(|o| o.join(" ← ")).unwrap_or_default());
                out.push('\n');
            }
            QueryKind::Study if self.status != Status::Error => {
                if let Some(row) = &self.study {
                    for v in &row.verdicts {
                        out.push_str(v);
                        out.push('\n');
                    }
                    let pct = row.percentage.map(|p| format!("{}%", p)).unwrap_or_else(|| "—".into());
                    out.push_str(&format!("{}: {}/{} verified ({})\n", row.name, row.verified, row.total, pct));
                }
            }
            _ => {
                out.push_str(&format!("{}: {}\n", self.input, human));
                if let Some(r) = &self.residue {
                    out.push_str(&format!("  residue: {}\n", r));
                }
            }
        }
        if with_trace {
            for t in self.trace.iter().flatten() {
                out.push_str("  ");
                out.push_str(t);
                out.push('\n');
            }
        }
        out
    }
}

/// Renumber parser-generated names (`_#17`, ...) from 1 so the echoed
/// query does not depend on how much was parsed before it.
fn canonical_input(ante: &Formula, conseq: &Formula) -> String {
    let mut fresh: Vec<Ident> = ante
        .disjuncts
        .iter()
        .chain(&conseq.disjuncts)
        .flat_map(|h| h.all_vars())
        .filter(|v| v.is_fresh())
        .collect();
    fresh.sort_by_key(|v| v.id());
    fresh.dedup();
    let map: HashMap<Ident, Ident> = fresh
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v.clone(), Ident::with_id(v.name(), k as u64 + 1)))
        .collect();
    let rename = |f: &Formula| Formula::new(f.disjuncts.iter().map(|h| rename_heap(h, &map)).collect());
    format!("{} |- {}", rename(ante), rename(conseq))
}

pub fn run_command(p: &Program, table: &PredTable, cmd: &CommandKind, opts: &RunOptions) -> QueryRecord {
    match cmd {
        CommandKind::CheckEntail { ante, conseq } => {
            let rec = QueryRecord::new(QueryKind::Entail, canonical_input(ante, conseq));
            match check_entail_with(table, ante, conseq, &opts.entail) {
                Err(e) => rec.failed(e),
                Ok(r) => QueryRecord {
                    verdict: format!("{:?}", r.verdict),
                    status: if r.verdict == Verdict::Valid { Status::Pass } else { Status::Fail },
                    residue: r.residue.as_ref().map(|f| f.to_string()),
                    trace: opts.entail.trace.then_some(r.trace),
                    ..rec
                },
            }
        }
        CommandKind::CheckSubtype { sub, sup } => {
            let rec = QueryRecord::new(QueryKind::Subtype, format!("{} <: {}", sub, sup));
            match is_subtype_with(p, table, sub, sup, &opts.subtype()) {
                Err(e) => rec.failed(e),
                Ok(v) => {
                    let mut trace = vec![format!("QUERY {} |- {}", v.ante, v.conseq)];
                    trace.extend(v.result.trace.iter().cloned());
                    QueryRecord {
                        verdict: format!("{:?}", v.holds),
                        status: if v.holds() { Status::Pass } else { Status::Fail },
                        residue: v.result.residue.as_ref().map(|f| f.to_string()),
                        trace: opts.entail.trace.then_some(trace),
                        ..rec
                    }
                }
            }
        }
        CommandKind::Linearize(name) => {
            let rec = QueryRecord::new(QueryKind::Lin, name.clone());
            match linearize(p, name) {
                Err(e) => rec.failed(e),
                Ok(l) => QueryRecord {
                    verdict: "Ok".to_string(),
                    order: Some(l.order),
                    ..rec
                },
            }
        }
        CommandKind::Study { label, pairs } => {
            let row = study_row(p, label, pairs, &opts.subtype());
            QueryRecord {
                verdict: format!("{}/{}", row.verified, row.total),
                study: Some(row),
                ..QueryRecord::new(QueryKind::Study, label.clone())
            }
        }
    }
}

pub fn run_all<'a>(p: &Program, cmds: impl IntoIterator<Item = &'a CommandKind>, opts: &RunOptions) -> Vec<QueryRecord> {
    let table = PredTable::new(p);
    cmds.into_iter().map(|c| run_command(p, &table, c, opts)).collect()
}

/// 2 if anything errored, else 1 if anything failed, else 0.
pub fn exit_code(records: &[QueryRecord]) -> i32 {
    if records.iter().any(|r| r.status == Status::Error) {
        2
    } else if records.iter().any(|r| r.status == Status::Fail) {
        1
    } else {
        0
    }
}

/// The machine-readable report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub queries: Vec<QueryRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<Diagnostic>,
}

impl Report {
    /// Study rows found among `queries` become the `study` section.
    pub fn new(queries: Vec<QueryRecord>) -> Report {
        let rows: Vec<StudyRow> = queries.iter().filter_map(|q| q.study.clone()).collect();
        Report {
            version: SCHEMA_VERSION,
            queries,
            study: (!rows.is_empty()).then(|| StudyReport::new(rows)),
            errors: Vec::new(),
        }
    }

    pub fn with_study(mut self, study: StudyReport) -> Report {
        self.study = Some(study);
        self
    }

    pub fn with_errors(mut self, errors: Vec<Diagnostic>) -> Report {
        self.errors = errors;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

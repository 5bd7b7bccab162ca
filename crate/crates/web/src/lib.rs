//! Browser playground bindings. Each entry point takes the program text
//! and one query, and returns the JSON report.

use mixcheck::parser::{check_command, parse_entailment, parse_program_in, parse_type_expr, CommandKind};
use mixcheck::predgen::PredTable;
use mixcheck::run::{run_command, Report, RunOptions};
use mixcheck::{Command, Diagnostic};
use wasm_bindgen::prelude::*;

fn report(program: &str, opts: RunOptions, query: Result<CommandKind, Diagnostic>) -> String {
    let (p, _) = match parse_program_in(program, "<program>") {
        Ok(x) => x,
        Err(diags) => return Report::new(Vec::new()).with_errors(diags).to_json(),
    };
    let cmd = match query {
        Ok(kind) => Command {
            kind,
            span: Default::default(),
        },
        Err(d) => return Report::new(Vec::new()).with_errors(vec![d]).to_json(),
    };
    let diags = check_command(&p, &cmd);
    if !diags.is_empty() {
        return Report::new(Vec::new()).with_errors(diags).to_json();
    }
    let table = PredTable::new(&p);
    Report::new(vec![run_command(&p, &table, &cmd.kind, &opts)]).to_json()
}

fn options(trace: bool, open_tail: bool) -> RunOptions {
    let mut o = RunOptions::default();
    o.entail.trace = trace;
    o.open_tail = open_tail;
    o
}

/// `query` is `ANTE |- CONSEQ`.
#[wasm_bindgen]
pub fn entail(program: &str, query: &str, trace: bool) -> String {
    let q = parse_entailment(query).map(|(ante, conseq)| CommandKind::CheckEntail { ante, conseq });
    report(program, options(trace, false), q)
}

#[wasm_bindgen]
pub fn linearize(program: &str, name: &str) -> String {
    report(program, options(false, false), Ok(CommandKind::Linearize(name.trim().to_string())))
}

#[wasm_bindgen]
pub fn subtype(program: &str, sub: &str, sup: &str, open_tail: bool) -> String {
    let q = parse_type_expr(sub).and_then(|sub| Ok(CommandKind::CheckSubtype { sub, sup: parse_type_expr(sup)? }));
    report(program, options(true, open_tail), q)
}

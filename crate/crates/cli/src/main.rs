use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixcheck::entail::EntailOptions;
use mixcheck::parser::{parse_entailment, parse_program_in, parse_type_expr, CommandKind};
use mixcheck::predgen::PredTable;
use mixcheck::run::{exit_code, run_all, run_command, QueryRecord, Report, RunOptions};
use mixcheck::session::{Output, Session};
use mixcheck::study::{study_row, StudyReport, StudyRow};
use mixcheck::{Command, Diagnostic, Program};

#[derive(Parser)]
#[command(name = "mixcheck", version, about = "Trait and mixin subtyping by separation-logic entailment")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct Flags {
    /// Print the machine-readable report.
    #[arg(long, global = true)]
    json: bool,
    /// Print proof steps.
    #[arg(long, global = true)]
    trace: bool,
    /// Unfold budget per proof branch.
    #[arg(long, global = true, env = "MIXCHECK_BUDGET", default_value_t = mixcheck::entail::DEFAULT_BUDGET)]
    budget: u32,
    /// Reject entailments that leave a non-empty residue.
    #[arg(long, global = true)]
    no_frame: bool,
    /// End supertype chains in an instantiable variable instead of null.
    #[arg(long, global = true)]
    open_tail: bool,
}

impl Flags {
    fn run_options(self) -> RunOptions {
        RunOptions {
            entail: EntailOptions {
                budget: self.budget,
                frame: !self.no_frame,
                trace: self.trace,
            },
            open_tail: self.open_tail,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every command in a file.
    Check { file: PathBuf },
    /// Print the linearization of a trait or class.
    Lin { file: PathBuf, name: String },
    /// Check one entailment against a file's declarations, or every
    /// `checkentail` in the file.
    Entail { file: PathBuf, query: Option<String> },
    /// Check `SUB <: SUPER`.
    Subtype { file: PathBuf, sub: String, sup: String },
    /// Tabulate the `study` commands of each file.
    Study { files: Vec<PathBuf> },
    /// Read declarations and commands from standard input.
    Repl,
    /// Print the predicates generated for traits and classes.
    Preds { file: PathBuf },
}

enum Failure {
    Diags(Vec<Diagnostic>),
    Message(String),
}

fn load(path: &Path) -> Result<(Program, Vec<Command>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Message(format!("{}: {}", path.display(), e)))?;
    parse_program_in(&text, &path.display().to_string()).map_err(Failure::Diags)
}

fn report_failure(f: Failure, flags: Flags) -> ExitCode {
    let diags = match f {
        Failure::Diags(d) => d,
        Failure::Message(m) => {
            eprintln!("error: {}", m);
            return ExitCode::from(2);
        }
    };
    for d in &diags {
        eprintln!("{}", d);
    }
    if flags.json {
        println!("{}", Report::new(Vec::new()).with_errors(diags).to_json());
    }
    ExitCode::from(2)
}

fn emit(records: Vec<QueryRecord>, flags: Flags) -> ExitCode {
    let code = exit_code(&records);
    if flags.json {
        println!("{}", Report::new(records).to_json());
    } else {
        let mut out = io::stdout().lock();
        for r in &records {
            let _ = out.write_all(r.render(flags.trace).as_bytes());
        }
    }
    ExitCode::from(code as u8)
}

fn one_query(file: &Path, flags: Flags, build: impl FnOnce(&Program) -> Result<CommandKind, Diagnostic>) -> ExitCode {
    let p = match load(file) {
        Ok((p, _)) => p,
        Err(f) => return report_failure(f, flags),
    };
    let cmd = match build(&p) {
        Ok(c) => c,
        Err(d) => return report_failure(Failure::Diags(vec![d]), flags),
    };
    let check = Command {
        kind: cmd,
        span: Default::default(),
    };
    let diags = mixcheck::parser::check_command(&p, &check);
    if !diags.is_empty() {
        return report_failure(Failure::Diags(diags), flags);
    }
    let table = PredTable::new(&p);
    emit(vec![run_command(&p, &table, &check.kind, &flags.run_options())], flags)
}

fn study(files: &[PathBuf], flags: Flags) -> ExitCode {
    let opts = flags.run_options().subtype();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for f in files {
        let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match load(f) {
            Err(Failure::Message(m)) => {
                eprintln!("error: {}", m);
                rows.push(StudyRow::failed(stem, m));
            }
            Err(Failure::Diags(d)) => {
                for x in &d {
                    eprintln!("{}", x);
                }
                let msg = d.first().map(|x| x.message.clone()).unwrap_or_default();
                rows.push(StudyRow::failed(stem, msg));
                errors.extend(d);
            }
            Ok((p, cmds)) => {
                let before = rows.len();
                for c in &cmds {
                    if let CommandKind::Study { label, pairs } = &c.kind {
                        rows.push(study_row(&p, label, pairs, &opts));
                    }
                }
                if rows.len() == before {
                    let msg = format!("{}: no `study` command", f.display());
                    eprintln!("error: {}", msg);
                    rows.push(StudyRow::failed(stem, msg));
                }
            }
        }
    }
    let failed = rows.iter().any(|r| r.error.is_some());
    let report = StudyReport::new(rows);
    if flags.json {
        println!("{}", Report::new(Vec::new()).with_study(report).with_errors(errors).to_json());
    } else {
        print!("{}", report.text());
    }
    ExitCode::from(if failed { 2 } else { 0 })
}

fn repl(flags: Flags) -> ExitCode {
    let mut session = Session::new(flags.run_options());
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = io::stdout().lock();
    let mut errors = false;
    loop {
        if interactive {
            let _ = write!(out, "{}", session.prompt());
            let _ = out.flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {}", e);
                return ExitCode::from(2);
            }
        }
        match session.eval_line(line.trim_end_matches(['\n', '\r'])) {
            Output::Quit => break,
            Output::Incomplete => {}
            Output::Text { text, error } => {
                if error {
                    errors = true;
                    eprint!("{}", text);
                } else {
                    let _ = out.write_all(text.as_bytes());
                }
            }
        }
    }
    if session.is_pending() {
        eprintln!("error: unterminated statement at end of input");
        errors = true;
    }
    ExitCode::from(if errors { 2 } else { 0 })
}

fn preds(file: &Path, flags: Flags) -> ExitCode {
    let p = match load(file) {
        Ok((p, _)) => p,
        Err(f) => return report_failure(f, flags),
    };
    let table = PredTable::new(&p);
    for d in table.generated(&p) {
        println!("{}", d);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = cli.flags;
    match cli.cmd {
        Cmd::Check { file } => match load(&file) {
            Ok((p, cmds)) => emit(run_all(&p, cmds.iter().map(|c| &c.kind), &flags.run_options()), flags),
            Err(f) => report_failure(f, flags),
        },
        Cmd::Lin { file, name } => one_query(&file, flags, |_| Ok(CommandKind::Linearize(name))),
        Cmd::Entail { file, query: Some(q) } => one_query(&file, flags, |_| {
            let (ante, conseq) = parse_entailment(&q)?;
            Ok(CommandKind::CheckEntail { ante, conseq })
        }),
        Cmd::Entail { file, query: None } => match load(&file) {
            Ok((p, cmds)) => {
                let only = cmds.iter().map(|c| &c.kind).filter(|k| matches!(k, CommandKind::CheckEntail { .. }));
                emit(run_all(&p, only, &flags.run_options()), flags)
            }
            Err(f) => report_failure(f, flags),
        },
        Cmd::Subtype { file, sub, sup } => one_query(&file, flags, |_| {
            Ok(CommandKind::CheckSubtype {
                sub: parse_type_expr(&sub)?,
                sup: parse_type_expr(&sup)?,
            })
        }),
        Cmd::Study { files } => study(&files, flags),
        Cmd::Repl => repl(flags),
        Cmd::Preds { file } => preds(&file, flags),
    }
}

//! Interactive sessions: declarations accumulate, commands run against the
//! current state, and a failing line leaves the state untouched.

use crate::parser::{check_command, parse_statements, Stmt};
use crate::predgen::PredTable;
use crate::program::Program;
use crate::run::{run_command, RunOptions};

pub const PROMPT: &str = "mixcheck> ";
pub const CONTINUE_PROMPT: &str = "      ... ";

const HELP: &str = "\
declarations and commands end with `.`; a statement may span lines
  :quit        leave the session
  :reset       forget every declaration
  :budget N    set the unfold budget
  :dump        print the session's declarations
  :help        this text
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    /// Text to print; `error` marks a rejected line.
    Text { text: String, error: bool },
    /// Waiting for the rest of a statement.
    Incomplete,
    Quit,
}

#[derive(Debug, Clone)]
pub struct Session {
    program: Program,
    table: PredTable,
    pub opts: RunOptions,
    pub history: Vec<(String, String)>,
    pending: String,
    lines: usize,
}

impl Default for Session {
    fn default() -> Session {
        Session::new(RunOptions::default())
    }
}

impl Session {
    pub fn new(opts: RunOptions) -> Session {
        Session {
            program: Program::new(),
            table: PredTable::default(),
            opts,
            history: Vec::new(),
            pending: String::new(),
            lines: 0,
        }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn budget(&self) -> u32 {
        self.opts.entail.budget
    }

    pub fn is_pending(&self) -> bool {
        !self.pending.trim().is_empty()
    }

    pub fn prompt(&self) -> &'static str {
        if self.is_pending() {
            CONTINUE_PROMPT
        } else {
            PROMPT
        }
    }

    fn text(&mut self, input: &str, text: String, error: bool) -> Output {
        self.history.push((input.to_string(), text.clone()));
        Output::Text { text, error }
    }

    fn meta(&mut self, line: &str) -> Output {
        let mut words = line.split_whitespace();
        let cmd = words.next().unwrap_or("");
        let arg = words.next();
        match (cmd, arg) {
            (":quit" | ":q", None) => Output::Quit,
            (":reset", None) => {
                self.program = Program::new();
                self.table = PredTable::default();
                self.text(line, "session cleared\n".into(), false)
            }
            (":budget", Some(n)) => match n.parse::<u32>() {
                Ok(n) => {
                    self.opts.entail.budget = n;
                    self.text(line, format!("budget set to {}\n", n), false)
                }
                Err(_) => self.text(line, format!("error: `{}` is not a budget\n", n), true),
            },
            (":budget", None) => self.text(line, format!("budget is {}\n", self.budget()), false),
            (":dump", None) => {
                let d = self.program.dump();
                self.text(line, d, false)
            }
            (":help", None) => self.text(line, HELP.into(), false),
            _ => self.text(line, format!("error: unknown meta-command `{}`\n", line.trim()), true),
        }
    }

    /// Evaluate one input line. Statements may continue over several lines;
    /// the line completing them runs the whole statement.
    pub fn eval_line(&mut self, line: &str) -> Output {
        let trimmed = line.trim();
        if !self.is_pending() && trimmed.starts_with(':') {
            return self.meta(trimmed);
        }
        self.pending.push_str(line);
        self.pending.push('\n');
        let code = strip_comments(&self.pending);
        if code.trim().is_empty() {
            self.pending.clear();
            return Output::Text {
                text: String::new(),
                error: false,
            };
        }
        if !code.trim_end().ends_with('.') {
            return Output::Incomplete;
        }
        let input = std::mem::take(&mut self.pending);
        self.eval(&input)
    }

    /// Evaluate complete text as one unit: all of its declarations are
    /// added, or none.
    pub fn eval(&mut self, input: &str) -> Output {
        self.lines += 1;
        let file = format!("<repl:{}>", self.lines);
        let (stmts, diags) = parse_statements(input, &file);
        if !diags.is_empty() {
            return self.text(input, render_diags(&diags), true);
        }
        let mut program = self.program.clone();
        let mut declared = Vec::new();
        let mut cmds = Vec::new();
        let mut errors = Vec::new();
        for s in stmts {
            match s {
                Stmt::Decl(d, sp) => {
                    declared.push(d.name().to_string());
                    if let Err(e) = program.add(d, Some(sp.clone())) {
                        errors.push(e.at(Some(sp)));
                    }
                }
                Stmt::Command(c) => cmds.push(c),
            }
        }
        if errors.is_empty() && !declared.is_empty() {
            errors.extend(program.well_formed());
        }
        if errors.is_empty() {
            for c in &cmds {
                errors.extend(check_command(&program, c));
            }
        }
        if !errors.is_empty() {
            return self.text(input, render_diags(&errors), true);
        }
        if !declared.is_empty() {
            self.table = PredTable::new(&program);
            self.program = program;
        }
        let mut out = String::new();
        for n in &declared {
            out.push_str(&format!("defined `{}`\n", n));
        }
        for c in &cmds {
            let r = run_command(&self.program, &self.table, &c.kind, &self.opts);
            out.push_str(&r.render(self.opts.entail.trace));
        }
        self.text(input, out, false)
    }
}

fn render_diags(diags: &[crate::program::Diagnostic]) -> String {
    diags.iter().map(|d| format!("{}\n", d)).collect()
}

/// Drops `//` and `/* */` comments so the end-of-statement test sees code
/// only.
fn strip_comments(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '/' && chars.peek() == Some(&'/') {
            for c in chars.by_ref() {
                if c == '\n' {
                    out.push('\n');
                    break;
                }
            }
        } else if c == '/' && chars.peek() == Some(&'*') {
            chars.next();
            let mut prev = ' ';
            for c in chars.by_ref() {
                if prev == '*' && c == '/' {
                    break;
                }
                prev = c;
            }
        } else {
            out.push(c);
        }
    }
    out
}

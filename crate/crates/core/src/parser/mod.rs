//! Recursive-descent parser for `.mix` files: declarations and commands.
//!
//! Errors are collected per statement; after a syntax error the parser
//! skips to the next `.` and keeps going, so one run reports every broken
//! statement.

mod lexer;

use std::collections::BTreeSet;

use crate::ident::{Ident, NULL, SELF, WILDCARD};
use crate::linear::LinExpr;
use crate::program::{Decl, DiagKind, Diagnostic, Program, SourceSpan};
use crate::syntax::{
    ClassDecl, Formula, HeapAtom, PredDef, PredInst, PredKind, PureAtom, PureFormula, Sort,
    SymbolicHeap, TraitDecl, TypeExpr,
};

use lexer::{span, Pos, Tok, Token};

pub const KEYWORDS: &[&str] = &[
    "data",
    "pred",
    "trait",
    "class",
    "extends",
    "with",
    "interface",
    "inv",
    "checkentail",
    "subtype",
    "lin",
    "study",
    "exists",
    "emp",
    "true",
    "false",
    "null",
    "or",
];

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    CheckEntail { ante: Formula, conseq: Formula },
    CheckSubtype { sub: TypeExpr, sup: TypeExpr },
    Linearize(String),
    /// A labelled list of (mixin, expected supertype) pairs.
    Study { label: String, pairs: Vec<(TypeExpr, TypeExpr)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub kind: CommandKind,
    pub span: SourceSpan,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            CommandKind::CheckEntail { ante, conseq } => write!(f, "checkentail {} |- {}.", ante, conseq),
            CommandKind::CheckSubtype { sub, sup } => write!(f, "subtype {} {}.", sub, sup),
            CommandKind::Linearize(n) => write!(f, "lin {}.", n),
            CommandKind::Study { label, pairs } => {
                write!(f, "study {}: ", label)?;
                for (i, (a, b)) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{} <: {}", a, b)?;
                }
                f.write_str(".")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Decl(Decl, SourceSpan),
    Command(Command),
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
}

enum Item {
    Heap(HeapAtom),
    Pure(Vec<PureAtom>),
}

/// One side of a comparison before desugaring.
struct Side {
    expr: LinExpr,
    /// Set when the side is a bare identifier or `null`.
    bare: Option<Ident>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        span(self.file, t.start, t.end)
    }

    fn start(&self) -> Pos {
        self.toks[self.pos].start
    }

    fn prev_end(&self) -> Pos {
        if self.pos == 0 {
            self.toks[0].start
        } else {
            self.toks[self.pos - 1].end
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(DiagKind::Syntax, msg).at(Some(self.here())))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(n, 0) => format!("`{}`", n),
            Tok::Ident(n, id) => format!("`{}#{}`", n, id),
            Tok::Int(k) => format!("`{}`", k),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(n, 0) if n == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{}`, found {}", s, self.describe()))
        }
    }

    /// `>` that may be glued to a following `=` (as in `<n>==`).
    fn expect_close_angle(&mut self) -> PResult<()> {
        if self.is_sym(">=") {
            let t = &mut self.toks[self.pos];
            t.tok = Tok::Sym("=");
            t.start.col += 1;
            return Ok(());
        }
        self.expect_sym(">")
    }

    /// A non-keyword name.
    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(n, 0) if !KEYWORDS.contains(&n.as_str()) && n != WILDCARD => {
                self.bump();
                Ok(n)
            }
            _ => self.error(format!("expected {}, found {}", what, self.describe())),
        }
    }

    /// A variable, possibly a printed fresh name `w#3`.
    fn var(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(n, id) if id > 0 || (n != WILDCARD && !KEYWORDS.contains(&n.as_str())) => {
                self.bump();
                Ok(if id == 0 { Ident::new(n) } else { Ident::with_id(n, id) })
            }
            Tok::Ident(n, 0) if n == NULL => {
                self.bump();
                Ok(Ident::null())
            }
            _ => self.error(format!("expected a variable, found {}", self.describe())),
        }
    }

    fn skip_to_dot(&mut self) {
        while !matches!(self.peek(), Tok::Eof) {
            if let Tok::Sym(".") = self.bump() {
                return;
            }
        }
    }

    // ---- statements

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.start();
        let name = match self.peek() {
            Tok::Ident(n, 0) => n.clone(),
            _ => return self.error(format!("expected a declaration or command, found {}", self.describe())),
        };
        let stmt = match name.as_str() {
            "data" => Stmt::Decl(self.data_decl()?, SourceSpan::default()),
            "pred" => Stmt::Decl(self.pred_decl()?, SourceSpan::default()),
            "interface" | "trait" => Stmt::Decl(self.trait_decl()?, SourceSpan::default()),
            "class" => Stmt::Decl(self.class_decl()?, SourceSpan::default()),
            "checkentail" => {
                self.bump();
                let ante = self.formula()?;
                self.expect_sym("|-")?;
                let conseq = self.formula()?;
                Stmt::Command(Command {
                    kind: CommandKind::CheckEntail { ante, conseq },
                    span: SourceSpan::default(),
                })
            }
            "subtype" => {
                self.bump();
                let sub = self.type_expr()?;
                self.eat_sym("<:");
                let sup = self.type_expr()?;
                Stmt::Command(Command {
                    kind: CommandKind::CheckSubtype { sub, sup },
                    span: SourceSpan::default(),
                })
            }
            "lin" => {
                self.bump();
                let n = self.name("a trait or class name")?;
                Stmt::Command(Command {
                    kind: CommandKind::Linearize(n),
                    span: SourceSpan::default(),
                })
            }
            "study" => {
                self.bump();
                let label = self.name("a hierarchy label")?;
                self.expect_sym(":")?;
                let mut pairs = Vec::new();
                loop {
                    let a = self.type_expr()?;
                    self.expect_sym("<:")?;
                    let b = self.type_expr()?;
                    pairs.push((a, b));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                Stmt::Command(Command {
                    kind: CommandKind::Study { label, pairs },
                    span: SourceSpan::default(),
                })
            }
            other => return self.error(format!("expected a declaration or command, found `{}`", other)),
        };
        self.expect_sym(".")?;
        let sp = span(self.file, start, self.prev_end());
        Ok(match stmt {
            Stmt::Decl(d, _) => Stmt::Decl(d, sp),
            Stmt::Command(c) => Stmt::Command(Command { span: sp, ..c }),
        })
    }

    fn data_decl(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name("a data type name")?;
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.is_sym("}") {
            let sort = self.name("a field sort")?;
            let field = self.var()?;
            if field.is_null() || field.is_fresh() {
                return self.error("field names must be plain identifiers");
            }
            fields.push((Sort::from_name(&sort), field));
            if !self.eat_sym(";") && !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(Decl::Pred(PredDef::data(name, fields)))
    }

    fn pred_decl(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name("a predicate name")?;
        self.expect_sym("<")?;
        let mut params = vec![Ident::self_()];
        if !self.is_sym(">") && !self.is_sym(">=") {
            loop {
                let sp = self.here();
                let v = self.var()?;
                if v.is_null() || v.is_fresh() || v.name() == SELF {
                    return Err(Diagnostic::new(
                        DiagKind::Syntax,
                        format!("`{}` cannot be a parameter name", v),
                    )
                    .at(Some(sp)));
                }
                params.push(v);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_close_angle()?;
        let kind = if self.eat_sym("==") || self.eat_sym("=") {
            self.eat_sym("=");
            let body = self.formula()?;
            let bound: BTreeSet<Ident> = params.iter().cloned().collect();
            let disjuncts = body
                .disjuncts
                .into_iter()
                .map(|mut d| {
                    for v in d.free_vars() {
                        if !bound.contains(&v) {
                            d.existentials.push(v);
                        }
                    }
                    d
                })
                .collect();
            PredKind::Defined(crate::subst::tidy(&Formula::new(disjuncts)))
        } else {
            PredKind::Abstract
        };
        let invariant = if self.eat_kw("inv") {
            Some(self.pure_conj()?)
        } else {
            None
        };
        Ok(Decl::Pred(PredDef {
            name,
            params,
            kind,
            invariant,
        }))
    }

    fn trait_decl(&mut self) -> PResult<Decl> {
        let interface_only = self.eat_kw("interface");
        if !self.eat_kw("trait") {
            return self.error(format!("expected `trait`, found {}", self.describe()));
        }
        let name = self.name("a trait name")?;
        let parents = self.parents()?;
        Ok(Decl::Trait(TraitDecl {
            name,
            parents,
            interface_only,
        }))
    }

    fn class_decl(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name("a class name")?;
        let parents = self.parents()?;
        Ok(Decl::Class(ClassDecl { name, parents }))
    }

    fn parents(&mut self) -> PResult<Vec<String>> {
        let mut parents = Vec::new();
        if self.eat_kw("extends") {
            parents.push(self.name("a parent name")?);
            while self.eat_kw("with") {
                parents.push(self.name("a parent name")?);
            }
        }
        Ok(parents)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        if self.eat_sym("(") {
            let base = self.name("a type name")?;
            let mut mixed = Vec::new();
            while self.eat_kw("with") {
                mixed.push(self.name("a type name")?);
            }
            self.expect_sym(")")?;
            Ok(TypeExpr { base, mixed })
        } else {
            Ok(TypeExpr::named(self.name("a type name")?))
        }
    }

    /// A type expression with or without the surrounding parentheses.
    fn loose_type_expr(&mut self) -> PResult<TypeExpr> {
        if self.is_sym("(") {
            return self.type_expr();
        }
        let base = self.name("a type name")?;
        let mut mixed = Vec::new();
        while self.eat_kw("with") {
            mixed.push(self.name("a type name")?);
        }
        Ok(TypeExpr { base, mixed })
    }

    // ---- formulas

    fn formula(&mut self) -> PResult<Formula> {
        let mut disjuncts = vec![self.disjunct()?];
        while self.eat_sym("\\/") || self.eat_kw("or") {
            disjuncts.push(self.disjunct()?);
        }
        Ok(Formula::new(disjuncts))
    }

    fn disjunct(&mut self) -> PResult<SymbolicHeap> {
        let mut h = SymbolicHeap::default();
        if self.eat_kw("exists") {
            loop {
                let sp = self.here();
                let v = self.var()?;
                if v.is_null() {
                    return Err(Diagnostic::new(DiagKind::Syntax, "`null` cannot be bound").at(Some(sp)));
                }
                if h.existentials.contains(&v) {
                    return Err(
                        Diagnostic::new(DiagKind::Syntax, format!("`{}` is bound twice", v)).at(Some(sp)),
                    );
                }
                h.existentials.push(v);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(":")?;
        }
        loop {
            match self.item(&mut h.existentials, &mut h.pure.0)? {
                Item::Heap(a) => h.spatial.push(a),
                Item::Pure(atoms) => h.pure.0.extend(atoms),
            }
            if !self.eat_sym("*") && !self.eat_sym("&") {
                break;
            }
        }
        Ok(h)
    }

    fn item(&mut self, evars: &mut Vec<Ident>, pure: &mut Vec<PureAtom>) -> PResult<Item> {
        if self.eat_kw("emp") {
            return Ok(Item::Heap(HeapAtom::Emp));
        }
        if self.eat_kw("true") {
            return Ok(Item::Pure(Vec::new()));
        }
        if self.eat_kw("false") {
            return Ok(Item::Pure(vec![PureAtom::falsum()]));
        }
        if matches!(self.peek(), Tok::Ident(..)) && matches!(self.peek_at(1), Tok::Sym("::")) {
            return self.heap_atom(evars, pure).map(|p| Item::Heap(HeapAtom::Pred(p)));
        }
        self.pure_atom().map(Item::Pure)
    }

    fn heap_atom(&mut self, evars: &mut Vec<Ident>, pure: &mut Vec<PureAtom>) -> PResult<PredInst> {
        let sp = self.here();
        let root = self.var()?;
        if root.is_null() {
            return Err(Diagnostic::new(DiagKind::Syntax, "`null` cannot be the root of a heap atom").at(Some(sp)));
        }
        self.expect_sym("::")?;
        let name = self.name("a predicate name")?;
        self.expect_sym("<")?;
        let mut args = Vec::new();
        if !self.is_sym(">") {
            loop {
                args.push(self.arg(evars, pure)?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(">")?;
        Ok(PredInst::new(name, root, args))
    }

    fn arg(&mut self, evars: &mut Vec<Ident>, pure: &mut Vec<PureAtom>) -> PResult<Ident> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                let w = Ident::fresh(WILDCARD);
                let k = if neg { -k } else { k };
                pure.push(PureAtom::eq0(LinExpr::var(w.clone()).plus_const(-k)));
                evars.push(w.clone());
                Ok(w)
            }
            _ if neg => self.error(format!("expected an integer, found {}", self.describe())),
            Tok::Ident(n, 0) if n == WILDCARD => {
                self.bump();
                let w = Ident::fresh(WILDCARD);
                evars.push(w.clone());
                Ok(w)
            }
            _ => self.var(),
        }
    }

    fn pure_conj(&mut self) -> PResult<PureFormula> {
        let mut atoms = Vec::new();
        loop {
            if self.eat_kw("true") {
            } else if self.eat_kw("false") {
                atoms.push(PureAtom::falsum());
            } else {
                atoms.extend(self.pure_atom()?);
            }
            if !self.eat_sym("&") {
                break;
            }
        }
        Ok(PureFormula(atoms))
    }

    /// One comparison, or a negated one. Returns one atom except for `!=`
    /// between integer expressions, which stays a single negated equality.
    fn pure_atom(&mut self) -> PResult<Vec<PureAtom>> {
        if self.eat_sym("!") {
            let parens = self.eat_sym("(");
            let inner = self.pure_atom()?;
            if parens {
                self.expect_sym(")")?;
            }
            return match inner.as_slice() {
                [a] => Ok(vec![a.negate()]),
                _ => self.error("only a single comparison can be negated"),
            };
        }
        if self.is_sym("(") {
            self.bump();
            let inner = self.pure_atom()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        let sp = self.here();
        let lhs = self.side()?;
        let op = match self.peek() {
            Tok::Sym(s @ ("=" | "!=" | "<=" | "<" | ">=" | ">")) => *s,
            _ => {
                return self.error(format!("expected a comparison operator, found {}", self.describe()));
            }
        };
        self.bump();
        let rhs = self.side()?;
        let has_null = lhs.bare.as_ref().is_some_and(|v| v.is_null())
            || rhs.bare.as_ref().is_some_and(|v| v.is_null());
        if let (Some(a), Some(b)) = (&lhs.bare, &rhs.bare) {
            match op {
                "=" => return Ok(vec![PureAtom::var_eq(a.clone(), b.clone())]),
                "!=" => return Ok(vec![PureAtom::ne(a.clone(), b.clone())]),
                _ => {}
            }
        }
        if has_null {
            return Err(Diagnostic::new(
                DiagKind::Syntax,
                "`null` can only be compared with `=` or `!=` against a variable",
            )
            .at(Some(sp)));
        }
        let d = lhs.expr.sub(&rhs.expr);
        let atom = match op {
            "=" => PureAtom::eq0(d),
            "!=" => PureAtom::eq0(d).negate(),
            "<=" => PureAtom::leq0(d),
            "<" => PureAtom::leq0(d.plus_const(1)),
            ">=" => PureAtom::leq0(d.neg()),
            ">" => PureAtom::leq0(d.neg().plus_const(1)),
            _ => unreachable!(),
        };
        Ok(vec![atom])
    }

    fn side(&mut self) -> PResult<Side> {
        let mut sign = if self.eat_sym("-") { -1 } else { 1 };
        let (first, mut bare) = self.term()?;
        let null_first = bare.as_ref().is_some_and(|v| v.is_null());
        if null_first && (sign < 0 || self.is_sym("+") || self.is_sym("-")) {
            return self.error("`null` cannot appear in arithmetic");
        }
        if sign < 0 {
            bare = None;
        }
        let mut expr = first.scale(sign);
        while self.is_sym("+") || self.is_sym("-") {
            sign = if self.eat_sym("+") { 1 } else { self.bump(); -1 };
            let (t, b) = self.term()?;
            if b.as_ref().is_some_and(|v| v.is_null()) {
                return self.error("`null` cannot appear in arithmetic");
            }
            expr = expr.add(&t.scale(sign));
            bare = None;
        }
        Ok(Side { expr, bare })
    }

    /// `k`, `k*v`, `v`, or `null`; the second component is set for a bare
    /// variable.
    fn term(&mut self) -> PResult<(LinExpr, Option<Ident>)> {
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                if self.eat_sym("*") {
                    let v = self.var()?;
                    if v.is_null() {
                        return self.error("`null` cannot appear in arithmetic");
                    }
                    Ok((LinExpr::from_parts(0, [(v, k)]), None))
                } else {
                    Ok((LinExpr::constant(k), None))
                }
            }
            Tok::Ident(..) => {
                let v = self.var()?;
                if v.is_null() {
                    Ok((LinExpr::constant(0), Some(v)))
                } else {
                    Ok((LinExpr::var(v.clone()), Some(v)))
                }
            }
            _ => self.error(format!("expected a term, found {}", self.describe())),
        }
    }
}

fn parser<'a>(text: &str, file: &'a str) -> (Parser<'a>, Vec<Diagnostic>) {
    let (toks, diags) = lexer::lex(text, file);
    (Parser { toks, pos: 0, file }, diags)
}

/// Parse every statement, recovering at `.` after an error. Declarations
/// are not checked against each other.
pub fn parse_statements(text: &str, file: &str) -> (Vec<Stmt>, Vec<Diagnostic>) {
    let (mut p, mut diags) = parser(text, file);
    let mut out = Vec::new();
    while !matches!(p.peek(), Tok::Eof) {
        match p.statement() {
            Ok(s) => out.push(s),
            Err(d) => {
                diags.push(d);
                p.skip_to_dot();
            }
        }
    }
    (out, diags)
}

/// Checks a command against a program: names exist, arities agree.
pub fn check_command(prog: &Program, c: &Command) -> Vec<Diagnostic> {
    let diags = match &c.kind {
        CommandKind::CheckEntail { ante, conseq } => {
            let mut d = prog.check_formula(ante);
            d.extend(prog.check_formula(conseq));
            d
        }
        CommandKind::CheckSubtype { sub, sup } => {
            let mut d = prog.check_type_expr(sub);
            d.extend(prog.check_type_expr(sup));
            d
        }
        CommandKind::Linearize(n) => prog.check_type_expr(&TypeExpr::named(n.clone())),
        CommandKind::Study { pairs, .. } => pairs
            .iter()
            .flat_map(|(a, b)| {
                let mut d = prog.check_type_expr(a);
                d.extend(prog.check_type_expr(b));
                d
            })
            .collect(),
    };
    diags
        .into_iter()
        .map(|d| d.at(Some(c.span.clone())))
        .collect()
}

pub fn parse_program_in(text: &str, file: &str) -> Result<(Program, Vec<Command>), Vec<Diagnostic>> {
    let (stmts, mut diags) = parse_statements(text, file);
    let mut prog = Program::new();
    let mut cmds = Vec::new();
    for s in stmts {
        match s {
            Stmt::Decl(d, sp) => {
                if let Err(e) = prog.add(d, Some(sp.clone())) {
                    diags.push(e.at(Some(sp)));
                }
            }
            Stmt::Command(c) => cmds.push(c),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    diags.extend(prog.well_formed());
    if diags.is_empty() {
        for c in &cmds {
            diags.extend(check_command(&prog, c));
        }
    }
    if diags.is_empty() {
        Ok((prog, cmds))
    } else {
        Err(diags)
    }
}

/// Parse and check a whole program.
pub fn parse_program(text: &str) -> Result<(Program, Vec<Command>), Vec<Diagnostic>> {
    parse_program_in(text, "")
}

fn finish<T>(p: &mut Parser<'_>, lex: Vec<Diagnostic>, r: PResult<T>) -> PResult<T> {
    if let Some(d) = lex.into_iter().next() {
        return Err(d);
    }
    let v = r?;
    p.eat_sym(".");
    if !matches!(p.peek(), Tok::Eof) {
        return p.error(format!("unexpected {} after the end", p.describe()));
    }
    Ok(v)
}

pub fn parse_formula(text: &str) -> Result<Formula, Diagnostic> {
    let (mut p, lex) = parser(text, "");
    let r = p.formula();
    finish(&mut p, lex, r)
}

/// `A |- C`, with or without the `checkentail` keyword.
pub fn parse_entailment(text: &str) -> Result<(Formula, Formula), Diagnostic> {
    let (mut p, lex) = parser(text, "");
    p.eat_kw("checkentail");
    let r = p.formula().and_then(|a| {
        p.expect_sym("|-")?;
        Ok((a, p.formula()?))
    });
    finish(&mut p, lex, r)
}

/// `A`, `A with B`, or `(A with B)`.
pub fn parse_type_expr(text: &str) -> Result<TypeExpr, Diagnostic> {
    let (mut p, lex) = parser(text, "");
    let r = p.loose_type_expr();
    finish(&mut p, lex, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Beta;

    const ICELL: &str = "
        interface trait ICell.
        trait BICell extends ICell.
        trait Double extends ICell.
        trait Inc extends ICell.
        class OddICell extends BICell with Inc with Double.
        class EvenICell extends BICell with Double with Inc.
        subtype OddICell (BICell with Inc with Double).
        subtype EvenICell (BICell with Inc with Double).
    ";

    #[test]
    fn running_example_declarations() {
        let (p, cmds) = parse_program(ICELL).unwrap();
        assert_eq!(p.traits().count(), 4);
        assert_eq!(p.classes().count(), 2);
        assert_eq!(cmds.len(), 2);
        assert!(p.trait_decl("ICell").unwrap().interface_only);
    }

    #[test]
    fn empty_text_is_an_empty_program() {
        let (p, cmds) = parse_program("").unwrap();
        assert!(p.is_empty());
        assert!(cmds.is_empty());
    }

    #[test]
    fn wildcard_in_checkentail_is_fresh_existential() {
        let src = "data node { int val; node next }.
            pred ll<n> == self = null & n = 0 \\/ exists q, m: self::node<_, q> * q::ll<m> & n = m + 1 inv n >= 0.
            checkentail x::node<_,null> |- x::ll<m> & m=1.";
        let (_, cmds) = parse_program(src).unwrap();
        let CommandKind::CheckEntail { ante, .. } = &cmds[0].kind else {
            panic!()
        };
        let d = &ante.disjuncts[0];
        assert_eq!(d.existentials.len(), 1);
        assert!(d.existentials[0].is_fresh());
        assert_eq!(d.preds().next().unwrap().args[0], d.existentials[0]);
    }

    #[test]
    fn emp_and_true() {
        let f = parse_formula("emp & true").unwrap();
        assert_eq!(f.disjuncts.len(), 1);
        assert_eq!(f.disjuncts[0].spatial, vec![HeapAtom::Emp]);
        assert!(f.disjuncts[0].pure.is_true());
    }

    #[test]
    fn two_disjuncts() {
        let f = parse_formula("x::ll<n> & n=m \\/ x=null & m=0").unwrap();
        assert_eq!(f.disjuncts.len(), 2);
        assert_eq!(f.disjuncts[1].pure.0[0].beta, Beta::NullEq(Ident::new("x")));
    }

    #[test]
    fn chain_with_null_argument() {
        let f = parse_formula("x::BICell<v> * v::Inc<v1> * v1::Double<null>").unwrap();
        let atoms: Vec<_> = f.disjuncts[0].preds().collect();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[2].args, vec![Ident::null()]);
    }

    #[test]
    fn wildcards_are_pairwise_distinct() {
        let f = parse_formula("x::n<_, _> * y::n<_, _>").unwrap();
        let ex = &f.disjuncts[0].existentials;
        assert_eq!(ex.len(), 4);
        let set: BTreeSet<_> = ex.iter().collect();
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn comparisons_desugar() {
        let f = parse_formula("a < b & a > 2 & a != b & !(a <= 0) & 2*a - b = 1").unwrap();
        let s: Vec<String> = f.disjuncts[0].pure.0.iter().map(|a| a.to_string()).collect();
        assert_eq!(s[0], "a + 1 <= b");
        assert_eq!(s[2], "a != b");
        assert!(f.disjuncts[0].pure.0[3].negated);
    }

    #[test]
    fn syntax_errors_recover_at_dot() {
        let (stmts, diags) = parse_statements("trait A. trait . trait B extends. trait C.", "f.mix");
        assert_eq!(stmts.len(), 2);
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.span.as_ref().unwrap().file == "f.mix"));
    }

    #[test]
    fn duplicate_and_cycle_are_rejected() {
        let e = parse_program("trait A. trait A.").unwrap_err();
        assert_eq!(e[0].kind, DiagKind::Duplicate);
        let e = parse_program("class A extends A.").unwrap_err();
        assert!(e.iter().any(|d| d.kind == DiagKind::Cycle));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let e = parse_program("data node { int val; node next }. checkentail x::node<y> |- emp.").unwrap_err();
        assert_eq!(e[0].kind, DiagKind::Arity);
    }

    #[test]
    fn pred_printing_round_trips() {
        let src = "data node { int val; node next }.
            pred ll<n> == self = null & n = 0 \\/ exists q, m: self::node<_, q> * q::ll<m> & n = m + 1 inv n >= 0.";
        let (p, _) = parse_program(src).unwrap();
        let printed = p.dump();
        let (q, _) = parse_program(&printed).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.dump(), parse_program(&q.dump()).unwrap().0.dump());
    }

    #[test]
    fn glued_angle_and_definition() {
        let (p, _) = parse_program("pred P<a>== a = 1.").unwrap();
        assert!(p.pred_def("P").unwrap().body().is_some());
    }

    #[test]
    fn type_expr_forms() {
        assert_eq!(parse_type_expr("A").unwrap(), TypeExpr::named("A"));
        assert_eq!(parse_type_expr("A with B").unwrap(), TypeExpr::compound(&["A", "B"]));
        assert_eq!(parse_type_expr("(A with B)").unwrap(), TypeExpr::compound(&["A", "B"]));
    }

    #[test]
    fn fresh_names_re_parse() {
        let w = Ident::fresh("w");
        let f = parse_formula(&format!("x::P<{}>", w)).unwrap();
        assert_eq!(f.disjuncts[0].preds().next().unwrap().args[0], w);
    }
}

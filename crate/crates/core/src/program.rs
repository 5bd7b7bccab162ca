//! Programs: name-indexed declarations plus well-formedness checking.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::ident::Ident;
use crate::pure::{self, Sat};
use crate::sorts::{self, VarSort};
use crate::syntax::{
    ClassDecl, Formula, PredDef, PredKind, PureAtom, SymbolicHeap, TraitDecl, TypeExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = if self.file.is_empty() {
            "<input>"
        } else {
            &self.file
        };
        write!(
            f,
            "{}:{}:{}-{}:{}",
            file, self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagKind {
    Lexical,
    Syntax,
    Duplicate,
    UnknownName,
    Arity,
    Cycle,
    FreeVariable,
    Sort,
    Invariant,
    Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            kind,
            message: message.into(),
            span: None,
        }
    }

    pub fn at(mut self, span: Option<SourceSpan>) -> Diagnostic {
        if self.span.is_none() {
            self.span = span;
        }
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(s) => write!(f, "{}: error: {}", s, self.message),
            None => write!(f, "error: {}", self.message),
        }
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    /// Data records, abstract and defined predicates.
    Pred(PredDef),
    Trait(TraitDecl),
    Class(ClassDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Pred(p) => &p.name,
            Decl::Trait(t) => &t.name,
            Decl::Class(c) => &c.name,
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Pred(p) => write!(f, "{}", p),
            Decl::Trait(t) => write!(f, "{}", t),
            Decl::Class(c) => write!(f, "{}", c),
        }
    }
}

/// All declarations in source order, one namespace for every kind.
#[derive(Debug, Clone, Default)]
pub struct Program {
    decls: Vec<Decl>,
    spans: Vec<Option<SourceSpan>>,
    index: HashMap<String, usize>,
}

impl PartialEq for Program {
    /// Structural equality modulo alpha-renaming of predicate bodies.
    fn eq(&self, other: &Program) -> bool {
        self.decls.len() == other.decls.len()
            && self
                .decls
                .iter()
                .zip(&other.decls)
                .all(|(a, b)| decl_alpha_eq(a, b))
    }
}

fn decl_alpha_eq(a: &Decl, b: &Decl) -> bool {
    match (a, b) {
        (Decl::Pred(p), Decl::Pred(q)) => {
            p.name == q.name
                && p.params == q.params
                && p.invariant == q.invariant
                && match (&p.kind, &q.kind) {
                    (PredKind::Defined(x), PredKind::Defined(y)) => crate::subst::alpha_eq(x, y),
                    (x, y) => x == y,
                }
        }
        (x, y) => x == y,
    }
}

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    pub fn add(&mut self, decl: Decl, span: Option<SourceSpan>) -> Result<(), Diagnostic> {
        let name = decl.name().to_string();
        if self.index.contains_key(&name) {
            return Err(Diagnostic::new(
                DiagKind::Duplicate,
                format!("`{}` is already defined", name),
            )
            .at(span));
        }
        self.index.insert(name, self.decls.len());
        self.decls.push(decl);
        self.spans.push(span);
        Ok(())
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.index.get(name).map(|&i| &self.decls[i])
    }

    pub fn span_of(&self, name: &str) -> Option<&SourceSpan> {
        self.index.get(name).and_then(|&i| self.spans[i].as_ref())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn trait_decl(&self, name: &str) -> Option<&TraitDecl> {
        match self.get(name)? {
            Decl::Trait(t) => Some(t),
            _ => None,
        }
    }

    pub fn class_decl(&self, name: &str) -> Option<&ClassDecl> {
        match self.get(name)? {
            Decl::Class(c) => Some(c),
            _ => None,
        }
    }

    pub fn pred_def(&self, name: &str) -> Option<&PredDef> {
        match self.get(name)? {
            Decl::Pred(p) => Some(p),
            _ => None,
        }
    }

    pub fn traits(&self) -> impl Iterator<Item = &TraitDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Trait(t) => Some(t),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Class(c) => Some(c),
            _ => None,
        })
    }

    pub fn preds(&self) -> impl Iterator<Item = &PredDef> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Pred(p) => Some(p),
            _ => None,
        })
    }

    /// Inheritance parents of a trait or class.
    pub fn parents(&self, name: &str) -> Option<&[String]> {
        match self.get(name)? {
            Decl::Trait(t) => Some(&t.parents),
            Decl::Class(c) => Some(&c.parents),
            Decl::Pred(_) => None,
        }
    }

    /// Arity of the predicate named `name`, counting the root. Traits and
    /// classes denote their generated predicates; interface-only traits have
    /// none.
    pub fn pred_arity(&self, name: &str) -> Option<usize> {
        match self.get(name)? {
            Decl::Pred(p) => Some(p.arity()),
            Decl::Trait(t) if !t.interface_only => Some(2),
            Decl::Trait(_) => None,
            Decl::Class(_) => Some(1),
        }
    }

    /// Print every declaration in the input language, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for d in &self.decls {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        out
    }

    pub fn well_formed(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for (i, d) in self.decls.iter().enumerate() {
            let span = self.spans[i].clone();
            let before = diags.len();
            match d {
                Decl::Trait(t) => self.check_trait(t, &mut diags),
                Decl::Class(c) => self.check_class(c, &mut diags),
                Decl::Pred(p) => self.check_pred(p, &mut diags),
            }
            for diag in &mut diags[before..] {
                if diag.span.is_none() {
                    diag.span = span.clone();
                }
            }
        }
        if let Some(cycle) = self.find_cycle() {
            let span = self.span_of(&cycle[0]).cloned();
            diags.push(
                Diagnostic::new(
                    DiagKind::Cycle,
                    format!("inheritance cycle: {}", cycle.join(" -> ")),
                )
                .at(span),
            );
        }
        if diags.is_empty() {
            diags.extend(self.check_sorts());
        }
        if diags.is_empty() {
            diags.extend(self.check_invariants());
        }
        diags
    }

    fn check_trait(&self, t: &TraitDecl, diags: &mut Vec<Diagnostic>) {
        for p in &t.parents {
            match self.get(p) {
                None => diags.push(Diagnostic::new(
                    DiagKind::UnknownName,
                    format!("trait `{}` extends unknown trait `{}`", t.name, p),
                )),
                Some(Decl::Trait(_)) => {}
                Some(_) => diags.push(Diagnostic::new(
                    DiagKind::Shape,
                    format!("trait `{}` can only extend traits, `{}` is not one", t.name, p),
                )),
            }
        }
    }

    fn check_class(&self, c: &ClassDecl, diags: &mut Vec<Diagnostic>) {
        if c.parents.is_empty() {
            diags.push(Diagnostic::new(
                DiagKind::Shape,
                format!("class `{}` must extend at least one trait", c.name),
            ));
        }
        for p in &c.parents {
            match self.get(p) {
                None => diags.push(Diagnostic::new(
                    DiagKind::UnknownName,
                    format!("class `{}` extends unknown type `{}`", c.name, p),
                )),
                Some(Decl::Pred(_)) => diags.push(Diagnostic::new(
                    DiagKind::Shape,
                    format!("class `{}` extends `{}`, which is not a trait or class", c.name, p),
                )),
                Some(_) => {}
            }
        }
    }

    fn check_pred(&self, p: &PredDef, diags: &mut Vec<Diagnostic>) {
        let mut seen = BTreeSet::new();
        for v in &p.params {
            if !seen.insert(v) {
                diags.push(Diagnostic::new(
                    DiagKind::Duplicate,
                    format!("parameter `{}` of `{}` is declared twice", v, p.name),
                ));
            }
        }
        let params: BTreeSet<Ident> = p.params.iter().cloned().collect();
        if let PredKind::Defined(body) = &p.kind {
            diags.extend(self.check_formula(body));
            for v in body.free_vars() {
                if !params.contains(&v) {
                    diags.push(Diagnostic::new(
                        DiagKind::FreeVariable,
                        format!("variable `{}` in the body of `{}` is not a parameter", v, p.name),
                    ));
                }
            }
        }
        if let Some(inv) = &p.invariant {
            for v in inv.vars() {
                if !v.is_null() && !params.contains(&v) {
                    diags.push(Diagnostic::new(
                        DiagKind::FreeVariable,
                        format!("variable `{}` in the invariant of `{}` is not a parameter", v, p.name),
                    ));
                }
            }
        }
    }

    /// Unknown predicate names and arity mismatches inside a formula.
    pub fn check_formula(&self, f: &Formula) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for d in &f.disjuncts {
            self.check_heap(d, &mut diags);
        }
        diags
    }

    fn check_heap(&self, h: &SymbolicHeap, diags: &mut Vec<Diagnostic>) {
        for a in h.preds() {
            match (self.get(&a.name), self.pred_arity(&a.name)) {
                (None, _) => diags.push(Diagnostic::new(
                    DiagKind::UnknownName,
                    format!("unknown predicate `{}`", a.name),
                )),
                (Some(_), None) => diags.push(Diagnostic::new(
                    DiagKind::UnknownName,
                    format!("`{}` is interface-only and has no predicate", a.name),
                )),
                (Some(_), Some(n)) if n != a.arity() => diags.push(Diagnostic::new(
                    DiagKind::Arity,
                    format!(
                        "`{}` takes {} argument(s) after the root, found {} in `{}`",
                        a.name,
                        n - 1,
                        a.args.len(),
                        a
                    ),
                )),
                _ => {}
            }
        }
    }

    pub fn check_type_expr(&self, t: &TypeExpr) -> Vec<Diagnostic> {
        t.names()
            .filter_map(|n| match self.get(n) {
                Some(Decl::Trait(_)) | Some(Decl::Class(_)) => None,
                Some(Decl::Pred(_)) => Some(Diagnostic::new(
                    DiagKind::Shape,
                    format!("`{}` is a predicate, not a trait or class", n),
                )),
                None => Some(Diagnostic::new(
                    DiagKind::UnknownName,
                    format!("unknown trait or class `{}`", n),
                )),
            })
            .collect()
    }

    /// First inheritance cycle found, as a closed path of names.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Fresh,
            Active,
            Done,
        }
        let mut marks: HashMap<&str, Mark> = HashMap::new();
        fn visit<'a>(
            p: &'a Program,
            n: &'a str,
            marks: &mut HashMap<&'a str, Mark>,
            path: &mut Vec<&'a str>,
        ) -> Option<Vec<String>> {
            match marks.get(n).copied().unwrap_or(Mark::Fresh) {
                Mark::Done => return None,
                Mark::Active => {
                    let start = path.iter().position(|x| *x == n).unwrap_or(0);
                    let mut cyc: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                    cyc.push(n.to_string());
                    return Some(cyc);
                }
                Mark::Fresh => {}
            }
            marks.insert(n, Mark::Active);
            path.push(n);
            for parent in p.parents(n).unwrap_or(&[]) {
                if p.contains(parent) {
                    if let Some(c) = visit(p, parent, marks, path) {
                        return Some(c);
                    }
                }
            }
            path.pop();
            marks.insert(n, Mark::Done);
            None
        }
        for d in &self.decls {
            if matches!(d, Decl::Pred(_)) {
                continue;
            }
            let mut path = Vec::new();
            if let Some(c) = visit(self, d.name(), &mut marks, &mut path) {
                return Some(c);
            }
        }
        None
    }

    fn check_sorts(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let table = sorts::param_sorts(self);
        for p in self.preds() {
            let seed: HashMap<Ident, VarSort> = p
                .params
                .iter()
                .cloned()
                .zip(table.get(&p.name).cloned().unwrap_or_default())
                .filter_map(|(v, s)| s.map(|s| (v, s)))
                .collect();
            let mut heaps: Vec<&SymbolicHeap> = Vec::new();
            if let Some(body) = p.body() {
                heaps.extend(body.disjuncts.iter());
            }
            let inv_heap = p.invariant.as_ref().map(|inv| SymbolicHeap {
                pure: inv.clone(),
                ..Default::default()
            });
            heaps.extend(inv_heap.iter());
            for h in heaps {
                if let Err(v) = sorts::infer(&table, std::slice::from_ref(h), seed.clone()) {
                    diags.push(
                        Diagnostic::new(
                            DiagKind::Sort,
                            format!(
                                "`{}` is used both as an integer and as a pointer in `{}`",
                                v, p.name
                            ),
                        )
                        .at(self.span_of(&p.name).cloned()),
                    );
                }
            }
        }
        diags
    }

    /// Every body disjunct of a predicate with an invariant must entail the
    /// invariant, assuming it for the recursive instances in the body.
    fn check_invariants(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for p in self.preds() {
            let (Some(inv), Some(body)) = (&p.invariant, p.body()) else {
                continue;
            };
            for (i, d) in body.disjuncts.iter().enumerate() {
                let mut gamma: Vec<PureAtom> = d.pure.0.clone();
                let mut data_roots = Vec::new();
                for a in d.preds() {
                    if let Some(def) = self.pred_def(&a.name) {
                        if def.is_data() {
                            gamma.push(PureAtom::null_eq(a.root.clone()).negate());
                            for r in &data_roots {
                                gamma.push(PureAtom::ne(a.root.clone(), Ident::clone(r)));
                            }
                            data_roots.push(a.root.clone());
                        }
                        if let Some(sub_inv) = instantiate_invariant(def, &a.root, &a.args) {
                            gamma.extend(sub_inv);
                        }
                    }
                }
                if pure::sat(&gamma) == Sat::Unsat {
                    continue;
                }
                if !pure::entails(&gamma, &inv.0) {
                    diags.push(
                        Diagnostic::new(
                            DiagKind::Invariant,
                            format!(
                                "disjunct {} of `{}` does not establish its invariant `{}`",
                                i + 1,
                                p.name,
                                inv
                            ),
                        )
                        .at(self.span_of(&p.name).cloned()),
                    );
                }
            }
        }
        diags
    }
}

/// The invariant of `def` with parameters replaced by `root, args`.
pub fn instantiate_invariant(def: &PredDef, root: &Ident, args: &[Ident]) -> Option<Vec<PureAtom>> {
    let inv = def.invariant.as_ref()?;
    let map: HashMap<Ident, Ident> = def
        .params
        .iter()
        .cloned()
        .zip(std::iter::once(root.clone()).chain(args.iter().cloned()))
        .collect();
    Some(crate::subst::rename_atoms(&inv.0, &map))
}

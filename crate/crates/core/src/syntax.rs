//! Formulas, predicate definitions and trait/class declarations.
//!
//! `Display` on every type prints the textual input language, so printed
//! values re-parse (see the round-trip tests in `parser`).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::ident::{Ident, SELF};
use crate::linear::LinExpr;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Sort {
    Int,
    Bool,
    Bag,
    Shape,
    /// Pointer to a declared data/predicate/trait type.
    Ptr(String),
}

impl Sort {
    pub fn from_name(name: &str) -> Sort {
        match name {
            "int" => Sort::Int,
            "bool" => Sort::Bool,
            "bag" => Sort::Bag,
            "shape" => Sort::Shape,
            other => Sort::Ptr(other.to_string()),
        }
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, Sort::Ptr(_))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("int"),
            Sort::Bool => f.write_str("bool"),
            Sort::Bag => f.write_str("bag"),
            Sort::Shape => f.write_str("shape"),
            Sort::Ptr(n) => f.write_str(n),
        }
    }
}

/// Positive pure literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Beta {
    VarEq(Ident, Ident),
    NullEq(Ident),
    Leq0(LinExpr),
    Eq0(LinExpr),
}

/// A pure literal `β` or `¬β`. Build through the constructors, which keep
/// atoms in a canonical shape (`x = null` is never a `VarEq`, `x - y = 0`
/// is always a `VarEq`, equalities have a positive leading coefficient).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PureAtom {
    pub beta: Beta,
    pub negated: bool,
}

impl PureAtom {
    fn pos(beta: Beta) -> PureAtom {
        PureAtom {
            beta,
            negated: false,
        }
    }

    pub fn var_eq(a: Ident, b: Ident) -> PureAtom {
        match (a.is_null(), b.is_null()) {
            (true, true) => PureAtom::pos(Beta::NullEq(a)),
            (true, false) => PureAtom::pos(Beta::NullEq(b)),
            (false, true) => PureAtom::pos(Beta::NullEq(a)),
            (false, false) if a <= b => PureAtom::pos(Beta::VarEq(a, b)),
            (false, false) => PureAtom::pos(Beta::VarEq(b, a)),
        }
    }

    pub fn null_eq(v: Ident) -> PureAtom {
        PureAtom::pos(Beta::NullEq(v))
    }

    pub fn leq0(e: LinExpr) -> PureAtom {
        PureAtom::pos(Beta::Leq0(e))
    }

    pub fn eq0(e: LinExpr) -> PureAtom {
        if e.const_term() == 0 {
            let terms: Vec<_> = e.terms().collect();
            if let [(a, ka), (b, kb)] = terms[..] {
                if ka == -kb && ka.abs() == 1 {
                    return PureAtom::var_eq(a.clone(), b.clone());
                }
            }
        }
        let leading = e.terms().next().map(|(_, k)| k).unwrap_or(e.const_term());
        if leading < 0 {
            PureAtom::pos(Beta::Eq0(e.neg()))
        } else {
            PureAtom::pos(Beta::Eq0(e))
        }
    }

    /// `false`, encoded as `1 <= 0`.
    pub fn falsum() -> PureAtom {
        PureAtom::leq0(LinExpr::constant(1))
    }

    pub fn negate(&self) -> PureAtom {
        PureAtom {
            beta: self.beta.clone(),
            negated: !self.negated,
        }
    }

    pub fn ne(a: Ident, b: Ident) -> PureAtom {
        PureAtom::var_eq(a, b).negate()
    }

    pub fn vars(&self) -> Vec<&Ident> {
        match &self.beta {
            Beta::VarEq(a, b) => vec![a, b],
            Beta::NullEq(a) => vec![a],
            Beta::Leq0(e) | Beta::Eq0(e) => e.vars().collect(),
        }
    }

    pub fn is_arith(&self) -> bool {
        matches!(self.beta, Beta::Leq0(_) | Beta::Eq0(_))
    }

    /// Rebuild through the constructors after renaming variables.
    pub fn rename(&self, f: &dyn Fn(&Ident) -> Ident) -> PureAtom {
        let atom = match &self.beta {
            Beta::VarEq(a, b) => PureAtom::var_eq(f(a), f(b)),
            Beta::NullEq(a) => PureAtom::null_eq(f(a)),
            Beta::Leq0(e) => PureAtom::leq0(LinExpr::from_parts(
                e.const_term(),
                e.terms().map(|(v, k)| (f(v), k)),
            )),
            Beta::Eq0(e) => PureAtom::eq0(LinExpr::from_parts(
                e.const_term(),
                e.terms().map(|(v, k)| (f(v), k)),
            )),
        };
        if self.negated {
            atom.negate()
        } else {
            atom
        }
    }
}

impl fmt::Display for PureAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.negated { "!=" } else { "=" };
        match &self.beta {
            Beta::VarEq(a, b) => write!(f, "{} {} {}", a, op, b),
            Beta::NullEq(a) => write!(f, "{} {} null", a, op),
            Beta::Eq0(e) => {
                let (l, r) = e.sides();
                write!(f, "{} {} {}", l, op, r)
            }
            Beta::Leq0(e) => {
                let (l, r) = e.sides();
                if self.negated {
                    write!(f, "!({} <= {})", l, r)
                } else {
                    write!(f, "{} <= {}", l, r)
                }
            }
        }
    }
}

/// Conjunction of pure literals; empty means `true`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct PureFormula(pub Vec<PureAtom>);

impl PureFormula {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> &[PureAtom] {
        &self.0
    }

    pub fn vars(&self) -> BTreeSet<Ident> {
        self.0
            .iter()
            .flat_map(|a| a.vars().into_iter().cloned())
            .collect()
    }
}

impl fmt::Display for PureFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

/// `root::name<args>`; the predicate's first parameter is bound to `root`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredInst {
    pub name: String,
    pub root: Ident,
    pub args: Vec<Ident>,
}

impl PredInst {
    pub fn new(name: impl Into<String>, root: Ident, args: Vec<Ident>) -> PredInst {
        PredInst {
            name: name.into(),
            root,
            args,
        }
    }

    pub fn arity(&self) -> usize {
        1 + self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Ident> {
        std::iter::once(&self.root).chain(self.args.iter())
    }

    pub fn rename(&self, f: &dyn Fn(&Ident) -> Ident) -> PredInst {
        PredInst {
            name: self.name.clone(),
            root: f(&self.root),
            args: self.args.iter().map(f).collect(),
        }
    }
}

impl fmt::Display for PredInst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}<", self.root, self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", a)?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeapAtom {
    Emp,
    Pred(PredInst),
}

impl HeapAtom {
    pub fn as_pred(&self) -> Option<&PredInst> {
        match self {
            HeapAtom::Emp => None,
            HeapAtom::Pred(p) => Some(p),
        }
    }
}

impl fmt::Display for HeapAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapAtom::Emp => f.write_str("emp"),
            HeapAtom::Pred(p) => write!(f, "{}", p),
        }
    }
}

/// `∃ existentials · spatial ∧ pure`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct SymbolicHeap {
    pub existentials: Vec<Ident>,
    pub spatial: Vec<HeapAtom>,
    pub pure: PureFormula,
}

impl SymbolicHeap {
    pub fn emp() -> SymbolicHeap {
        SymbolicHeap::default()
    }

    pub fn from_atoms(atoms: Vec<PredInst>) -> SymbolicHeap {
        SymbolicHeap {
            existentials: Vec::new(),
            spatial: atoms.into_iter().map(HeapAtom::Pred).collect(),
            pure: PureFormula::default(),
        }
    }

    pub fn preds(&self) -> impl Iterator<Item = &PredInst> {
        self.spatial.iter().filter_map(HeapAtom::as_pred)
    }

    /// Variables occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Ident> {
        let mut out: BTreeSet<Ident> = self.existentials.iter().cloned().collect();
        for p in self.preds() {
            out.extend(p.vars().cloned());
        }
        out.extend(self.pure.vars());
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        for p in self.preds() {
            out.extend(p.vars().cloned());
        }
        out.extend(self.pure.vars());
        for w in &self.existentials {
            out.remove(w);
        }
        out.retain(|v| !v.is_null());
        out
    }

    pub fn star(&self, other: &SymbolicHeap) -> SymbolicHeap {
        let mut out = self.clone();
        out.existentials.extend(other.existentials.iter().cloned());
        out.spatial.extend(other.spatial.iter().cloned());
        out.pure.0.extend(other.pure.0.iter().cloned());
        out
    }
}

impl fmt::Display for SymbolicHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.existentials.is_empty() {
            f.write_str("exists ")?;
            for (i, w) in self.existentials.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", w)?;
            }
            f.write_str(": ")?;
        }
        if self.spatial.is_empty() {
            if self.pure.is_true() {
                return f.write_str("emp");
            }
            return write!(f, "{}", self.pure);
        }
        for (i, a) in self.spatial.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{}", a)?;
        }
        if !self.pure.is_true() {
            write!(f, " & {}", self.pure)?;
        }
        Ok(())
    }
}

/// Disjunction of symbolic heaps; never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub disjuncts: Vec<SymbolicHeap>,
}

impl Formula {
    pub fn new(disjuncts: Vec<SymbolicHeap>) -> Formula {
        assert!(!disjuncts.is_empty(), "a formula has at least one disjunct");
        Formula { disjuncts }
    }

    pub fn single(h: SymbolicHeap) -> Formula {
        Formula { disjuncts: vec![h] }
    }

    pub fn emp() -> Formula {
        Formula::single(SymbolicHeap::emp())
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        self.disjuncts.iter().flat_map(|d| d.free_vars()).collect()
    }

    /// True when the formula is a single `emp` disjunct with no pure part.
    pub fn is_emp(&self) -> bool {
        self.disjuncts.len() == 1 && {
            let d = &self.disjuncts[0];
            d.preds().next().is_none() && d.pure.is_true()
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredKind {
    /// No body; instances only match by unification.
    Abstract,
    /// A record cell with typed fields.
    Data(Vec<(Sort, Ident)>),
    Defined(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDef {
    pub name: String,
    /// First parameter is the implicit root `self`.
    pub params: Vec<Ident>,
    pub kind: PredKind,
    pub invariant: Option<PureFormula>,
}

impl PredDef {
    pub fn data(name: impl Into<String>, fields: Vec<(Sort, Ident)>) -> PredDef {
        let mut params = vec![Ident::self_()];
        params.extend(fields.iter().map(|(_, v)| v.clone()));
        PredDef {
            name: name.into(),
            params,
            kind: PredKind::Data(fields),
            invariant: None,
        }
    }

    pub fn abstract_(name: impl Into<String>, params: Vec<Ident>) -> PredDef {
        PredDef {
            name: name.into(),
            params,
            kind: PredKind::Abstract,
            invariant: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, PredKind::Data(_))
    }

    pub fn body(&self) -> Option<&Formula> {
        match &self.kind {
            PredKind::Defined(b) => Some(b),
            _ => None,
        }
    }
}

fn write_params(f: &mut fmt::Formatter<'_>, params: &[Ident]) -> fmt::Result {
    f.write_str("<")?;
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", p)?;
    }
    f.write_str(">")
}

impl fmt::Display for PredDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PredKind::Data(fields) => {
                write!(f, "data {} {{ ", self.name)?;
                for (i, (s, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{} {}", s, v)?;
                }
                return f.write_str(" }.");
            }
            PredKind::Abstract => {
                write!(f, "pred {}", self.name)?;
                write_params(f, &self.params[1..])?;
            }
            PredKind::Defined(body) => {
                write!(f, "pred {}", self.name)?;
                write_params(f, &self.params[1..])?;
                write!(f, " == {}", body)?;
            }
        }
        if let Some(inv) = &self.invariant {
            write!(f, " inv {}", inv)?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitDecl {
    pub name: String,
    pub parents: Vec<String>,
    /// Takes part in linearization but never in predicate chains.
    pub interface_only: bool,
}

impl fmt::Display for TraitDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.interface_only {
            f.write_str("interface ")?;
        }
        write!(f, "trait {}", self.name)?;
        write_parents(f, &self.parents)?;
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    /// The `extends C1 with C2 ...` sequence, left to right.
    pub parents: Vec<String>,
}

impl fmt::Display for ClassDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {}", self.name)?;
        write_parents(f, &self.parents)?;
        f.write_str(".")
    }
}

fn write_parents(f: &mut fmt::Formatter<'_>, parents: &[String]) -> fmt::Result {
    for (i, p) in parents.iter().enumerate() {
        if i == 0 {
            write!(f, " extends {}", p)?;
        } else {
            write!(f, " with {}", p)?;
        }
    }
    Ok(())
}

/// `Base with M1 with M2 ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeExpr {
    pub base: String,
    pub mixed: Vec<String>,
}

impl TypeExpr {
    pub fn named(name: impl Into<String>) -> TypeExpr {
        TypeExpr {
            base: name.into(),
            mixed: Vec::new(),
        }
    }

    pub fn compound(names: &[&str]) -> TypeExpr {
        TypeExpr {
            base: names[0].to_string(),
            mixed: names[1..].iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        std::iter::once(&self.base).chain(self.mixed.iter())
    }

    pub fn is_simple(&self) -> bool {
        self.mixed.is_empty()
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mixed.is_empty() {
            return f.write_str(&self.base);
        }
        write!(f, "({}", self.base)?;
        for m in &self.mixed {
            write!(f, " with {}", m)?;
        }
        f.write_str(")")
    }
}

/// Checks whether `self` is the reserved root parameter name.
pub fn is_self(v: &Ident) -> bool {
    v.id() == 0 && v.name() == SELF
}

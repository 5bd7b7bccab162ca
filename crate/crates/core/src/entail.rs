//! Entailment with frame inference: `ante ⊢ conseq ∗ R`.
//!
//! The search works on one antecedent disjunct against one consequent
//! disjunct at a time. Antecedent existentials become rigid skolems;
//! consequent existentials and consequent variables not free in the
//! antecedent are instantiable. Consequent atoms are matched left to right;
//! when no antecedent atom matches, defined predicates are unfolded on the
//! left (a case split, every case must succeed) or on the right (one case
//! suffices), each unfold spending one unit of budget. Leftover antecedent
//! atoms form the residue.
//!
//! Data atoms contribute `root != null` and pairwise-distinct roots; an
//! antecedent instance of a predicate with an `inv` clause contributes the
//! instantiated invariant. Abstract and data atoms never unfold.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::ident::Ident;
use crate::predgen::PredTable;
use crate::program::{instantiate_invariant, Program};
use crate::pure::{self, Sat, UnionFind};
use crate::subst::{alpha_eq_heap, fresh_rename, rename_heap, tidy};
use crate::syntax::{Beta, Formula, HeapAtom, PredDef, PredInst, PredKind, PureAtom, PureFormula, SymbolicHeap};

pub const DEFAULT_BUDGET: u32 = 4;

/// Failed searches keep at most this many trace lines.
const TRACE_CAP: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntailOptions {
    pub budget: u32,
    /// Allow a non-empty residue.
    pub frame: bool,
    /// Record proof steps.
    pub trace: bool,
}

impl Default for EntailOptions {
    fn default() -> EntailOptions {
        EntailOptions {
            budget: DEFAULT_BUDGET,
            frame: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Valid,
    NotProven,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "Valid",
            Verdict::NotProven => "Invalid (not proven)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailResult {
    pub verdict: Verdict,
    /// Present iff `Valid`.
    pub residue: Option<Formula>,
    /// Numbered proof steps; empty unless tracing was requested.
    pub trace: Vec<String>,
    /// Instantiations `u ↦ v` of named consequent variables.
    pub instantiation: Vec<(Ident, Ident)>,
}

impl EntailResult {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

#[derive(Debug, Clone)]
struct Step {
    depth: usize,
    text: String,
}

#[derive(Debug, Clone, Default)]
struct Proof {
    residues: Vec<SymbolicHeap>,
    steps: Vec<Step>,
    inst: Vec<(Ident, Ident)>,
}

#[derive(Debug, Clone)]
struct Goal {
    ante: Vec<PredInst>,
    ante_pure: Vec<PureAtom>,
    /// Derived from data cells and invariants; not part of the residue.
    facts: Vec<PureAtom>,
    data_roots: Vec<Ident>,
    skolems: BTreeSet<Ident>,
    conseq: Vec<PredInst>,
    conseq_pure: Vec<PureAtom>,
    obligations: Vec<PureAtom>,
    evars: BTreeSet<Ident>,
    inst: Vec<(Ident, Ident)>,
    budget: u32,
    /// The antecedent pure part changed since the last satisfiability check.
    dirty: bool,
}

struct Engine<'a> {
    table: &'a PredTable,
    opts: EntailOptions,
}

type Search = Result<Proof, Vec<Step>>;

fn instantiate_body(def: &PredDef, body: &SymbolicHeap, root: &Ident, args: &[Ident]) -> SymbolicHeap {
    let fresh = fresh_rename(body);
    let map: HashMap<Ident, Ident> = def
        .params
        .iter()
        .cloned()
        .zip(std::iter::once(root.clone()).chain(args.iter().cloned()))
        .collect();
    let mut h = rename_heap(&fresh, &map);
    h.spatial.retain(|a| !matches!(a, HeapAtom::Emp));
    h
}

impl Goal {
    fn rename_conseq(&mut self, from: &Ident, to: &Ident) {
        let f = |v: &Ident| if v == from { to.clone() } else { v.clone() };
        for a in &mut self.conseq {
            *a = a.rename(&f);
        }
        for a in self.conseq_pure.iter_mut().chain(self.obligations.iter_mut()) {
            *a = a.rename(&f);
        }
    }

    fn add_ante_atom(&mut self, table: &PredTable, a: PredInst) {
        if let Ok(def) = table.get(&a.name) {
            if def.is_data() {
                self.facts.push(PureAtom::null_eq(a.root.clone()).negate());
                for r in &self.data_roots {
                    self.facts.push(PureAtom::ne(a.root.clone(), r.clone()));
                }
                self.data_roots.push(a.root.clone());
            }
            if let Some(inv) = instantiate_invariant(def, &a.root, &a.args) {
                self.facts.extend(inv);
            }
        }
        self.ante.push(a);
    }

    fn gamma(&self) -> Vec<PureAtom> {
        let mut g = self.ante_pure.clone();
        g.extend(self.facts.iter().cloned());
        g
    }

    fn equalities(&self) -> UnionFind {
        let mut uf = UnionFind::default();
        for a in self.ante_pure.iter().chain(&self.facts) {
            match (&a.beta, a.negated) {
                (Beta::VarEq(x, y), false) => uf.union(x, y),
                (Beta::NullEq(x), false) => uf.union(x, &Ident::null()),
                _ => {}
            }
        }
        uf
    }

    fn residue(&self, covered: &[PureAtom]) -> SymbolicHeap {
        let pure = self
            .ante_pure
            .iter()
            .filter(|a| !pure::entails(covered, std::slice::from_ref(*a)))
            .cloned()
            .collect();
        let mut h = SymbolicHeap {
            existentials: Vec::new(),
            spatial: self.ante.iter().cloned().map(HeapAtom::Pred).collect(),
            pure: PureFormula(pure),
        };
        let in_heap: BTreeSet<Ident> = h.preds().flat_map(|a| a.vars().cloned()).collect();
        let hidden: BTreeSet<Ident> = self.skolems.iter().filter(|s| !in_heap.contains(s)).cloned().collect();
        if let Some(rest) = pure::eliminate_existentials(&h.pure.0, &hidden) {
            h.pure = PureFormula(rest);
        }
        let used = h.all_vars();
        h.existentials = self.skolems.iter().filter(|s| used.contains(s)).cloned().collect();
        h
    }
}

impl<'a> Engine<'a> {
    fn step(&self, steps: &mut Vec<Step>, depth: usize, text: impl FnOnce() -> String) {
        if self.opts.trace {
            steps.push(Step { depth, text: text() });
        }
    }

    fn prove(&self, mut g: Goal, depth: usize) -> Search {
        let mut steps = Vec::new();
        if g.dirty {
            g.dirty = false;
            if pure::sat(&g.gamma()) == Sat::Unsat {
                self.step(&mut steps, depth, || "VACUOUS antecedent is unsatisfiable".to_string());
                return Ok(Proof {
                    residues: Vec::new(),
                    steps,
                    inst: g.inst,
                });
            }
        }
        if g.conseq.is_empty() {
            return self.finish(g, depth, steps);
        }
        let c = g.conseq[0].clone();
        let uf = g.equalities();
        let mut candidates: Vec<usize> = Vec::new();
        let same_name = |i: &usize| g.ante[*i].name == c.name;
        candidates.extend((0..g.ante.len()).filter(same_name).filter(|i| g.ante[*i].root == c.root));
        candidates.extend(
            (0..g.ante.len())
                .filter(same_name)
                .filter(|i| g.ante[*i].root != c.root && uf.same(&g.ante[*i].root, &c.root)),
        );
        if g.evars.contains(&c.root) {
            candidates.extend((0..g.ante.len()).filter(same_name));
        }
        let mut tried = BTreeSet::new();
        for k in candidates {
            if !tried.insert(k) {
                continue;
            }
            let a = g.ante[k].clone();
            let mut ng = g.clone();
            ng.ante.remove(k);
            ng.conseq.remove(0);
            let mut c2 = c.clone();
            let pairs = std::iter::once((c.root.clone(), a.root.clone()))
                .chain(c.args.iter().cloned().zip(a.args.iter().cloned()))
                .collect::<Vec<_>>();
            for (i, (_, av)) in pairs.iter().enumerate() {
                let cv = if i == 0 { c2.root.clone() } else { c2.args[i - 1].clone() };
                if cv == *av {
                    continue;
                }
                if ng.evars.contains(&cv) {
                    ng.evars.remove(&cv);
                    ng.rename_conseq(&cv, av);
                    let f = |v: &Ident| if *v == cv { av.clone() } else { v.clone() };
                    c2 = c2.rename(&f);
                    ng.inst.push((cv.clone(), av.clone()));
                } else {
                    ng.obligations.push(PureAtom::var_eq(cv, av.clone()));
                }
            }
            self.step(&mut steps, depth, || format!("MATCH {} {}↦{}", c.name, c.root, a.root));
            match self.prove(ng, depth + 1) {
                Ok(mut p) => {
                    steps.append(&mut p.steps);
                    p.steps = steps;
                    return Ok(p);
                }
                Err(mut s) => self.absorb(&mut steps, &mut s),
            }
        }
        if g.budget == 0 {
            self.step(&mut steps, depth, || format!("FAIL no match for {}", c));
            return Err(steps);
        }
        // Left unfolds at the consequent's root come first.
        let defined = |a: &PredInst| matches!(self.table.get(&a.name).map(|d| &d.kind), Ok(PredKind::Defined(_)));
        let at_root: Vec<usize> = (0..g.ante.len())
            .filter(|i| defined(&g.ante[*i]) && uf.same(&g.ante[*i].root, &c.root))
            .collect();
        for &k in &at_root {
            match self.unfold_left(&g, k, depth) {
                Ok(mut p) => {
                    steps.append(&mut p.steps);
                    p.steps = steps;
                    return Ok(p);
                }
                Err(mut s) => self.absorb(&mut steps, &mut s),
            }
        }
        if let Ok(def) = self.table.get(&c.name) {
            if let PredKind::Defined(body) = &def.kind {
                for (i, d) in body.disjuncts.iter().enumerate() {
                    let inst = instantiate_body(def, d, &c.root, &c.args);
                    let mut ng = g.clone();
                    ng.budget -= 1;
                    ng.conseq.remove(0);
                    let atoms: Vec<PredInst> = inst.preds().cloned().collect();
                    ng.conseq.splice(0..0, atoms);
                    ng.conseq_pure.extend(inst.pure.0.iter().cloned());
                    ng.evars.extend(inst.existentials.iter().cloned());
                    self.step(&mut steps, depth, || format!("UNFOLD-R {}#{}", c.name, i + 1));
                    match self.prove(ng, depth + 1) {
                        Ok(mut p) => {
                            steps.append(&mut p.steps);
                            p.steps = steps;
                            return Ok(p);
                        }
                        Err(mut s) => self.absorb(&mut steps, &mut s),
                    }
                }
            }
        }
        for k in 0..g.ante.len() {
            if at_root.contains(&k) || !defined(&g.ante[k]) {
                continue;
            }
            match self.unfold_left(&g, k, depth) {
                Ok(mut p) => {
                    steps.append(&mut p.steps);
                    p.steps = steps;
                    return Ok(p);
                }
                Err(mut s) => self.absorb(&mut steps, &mut s),
            }
        }
        self.step(&mut steps, depth, || format!("FAIL no match for {}", c));
        Err(steps)
    }

    fn absorb(&self, steps: &mut Vec<Step>, failed: &mut Vec<Step>) {
        if steps.len() < TRACE_CAP {
            steps.append(failed);
            steps.truncate(TRACE_CAP);
        }
    }

    fn finish(&self, g: Goal, depth: usize, mut steps: Vec<Step>) -> Search {
        let mut delta = g.conseq_pure.clone();
        delta.extend(g.obligations.iter().cloned());
        let pure_ok = pure::entails_exists(&g.gamma(), &g.evars, &delta);
        let frame_ok = self.opts.frame || g.ante.is_empty();
        if pure_ok && frame_ok {
            self.step(&mut steps, depth, || {
                if delta.is_empty() {
                    "DONE".to_string()
                } else {
                    format!("PURE {}", PureFormula(delta.clone()))
                }
            });
            return Ok(Proof {
                residues: vec![g.residue(&delta)],
                steps,
                inst: g.inst,
            });
        }
        self.step(&mut steps, depth, || {
            if pure_ok {
                format!("FAIL residue not empty: {}", g.residue(&delta))
            } else {
                format!("FAIL pure {}", PureFormula(delta.clone()))
            }
        });
        if g.budget > 0 {
            for k in 0..g.ante.len() {
                if !matches!(self.table.get(&g.ante[k].name).map(|d| &d.kind), Ok(PredKind::Defined(_))) {
                    continue;
                }
                match self.unfold_left(&g, k, depth) {
                    Ok(mut p) => {
                        steps.append(&mut p.steps);
                        p.steps = steps;
                        return Ok(p);
                    }
                    Err(mut s) => self.absorb(&mut steps, &mut s),
                }
            }
        }
        Err(steps)
    }

    /// Case split on the body of antecedent atom `k`; every case must hold.
    fn unfold_left(&self, g: &Goal, k: usize, depth: usize) -> Search {
        let a = g.ante[k].clone();
        let def = self.table.get(&a.name).expect("checked before search");
        let body = def.body().expect("defined predicate");
        let mut out = Proof::default();
        for (i, d) in body.disjuncts.iter().enumerate() {
            let inst = instantiate_body(def, d, &a.root, &a.args);
            let mut ng = g.clone();
            ng.budget -= 1;
            ng.dirty = true;
            let rest = ng.ante.split_off(k);
            for atom in inst.preds().cloned() {
                ng.add_ante_atom(self.table, atom);
            }
            ng.ante.extend(rest.into_iter().skip(1));
            ng.ante_pure.extend(inst.pure.0.iter().cloned());
            ng.skolems.extend(inst.existentials.iter().cloned());
            self.step(&mut out.steps, depth, || format!("UNFOLD-L {}#{}", a.name, i + 1));
            match self.prove(ng, depth + 1) {
                Ok(mut p) => {
                    out.steps.append(&mut p.steps);
                    out.residues.append(&mut p.residues);
                    for x in p.inst {
                        if !out.inst.contains(&x) {
                            out.inst.push(x);
                        }
                    }
                }
                Err(mut s) => {
                    out.steps.append(&mut s);
                    return Err(out.steps);
                }
            }
        }
        Ok(out)
    }
}

fn setup(table: &PredTable, ante: &SymbolicHeap, conseq: &SymbolicHeap, ante_free: &BTreeSet<Ident>, budget: u32) -> Goal {
    let ante = fresh_rename(ante);
    let conseq = fresh_rename(conseq);
    let mut g = Goal {
        ante: Vec::new(),
        ante_pure: ante.pure.0.clone(),
        facts: Vec::new(),
        data_roots: Vec::new(),
        skolems: ante.existentials.iter().cloned().collect(),
        conseq: conseq.preds().cloned().collect(),
        conseq_pure: conseq.pure.0.clone(),
        obligations: Vec::new(),
        evars: conseq
            .existentials
            .iter()
            .cloned()
            .chain(conseq.free_vars().into_iter().filter(|v| !ante_free.contains(v)))
            .collect(),
        inst: Vec::new(),
        budget,
        dirty: true,
    };
    for a in ante.preds().cloned() {
        g.add_ante_atom(table, a);
    }
    g
}

fn number(steps: Vec<Step>) -> Vec<String> {
    steps
        .into_iter()
        .enumerate()
        .map(|(i, s)| format!("{:>3}. {}{}", i + 1, "  ".repeat(s.depth), s.text))
        .collect()
}

/// Check `ante ⊢ conseq ∗ R` against the predicates of `table`.
pub fn check_entail_with(table: &PredTable, ante: &Formula, conseq: &Formula, opts: &EntailOptions) -> Result<EntailResult, Error> {
    table.check_formula(ante)?;
    table.check_formula(conseq)?;
    let engine = Engine { table, opts: *opts };
    let ante_free = ante.free_vars();
    let named: BTreeSet<Ident> = conseq.free_vars().into_iter().filter(|v| !ante_free.contains(v)).collect();
    let mut residues = Vec::new();
    let mut steps = Vec::new();
    let mut inst = Vec::new();
    for (ai, ad) in ante.disjuncts.iter().enumerate() {
        let mut proved = false;
        for (ci, cd) in conseq.disjuncts.iter().enumerate() {
            if ante.disjuncts.len() > 1 || conseq.disjuncts.len() > 1 {
                engine.step(&mut steps, 0, || format!("CASE {} |- {}", ai + 1, ci + 1));
            }
            let g = setup(table, ad, cd, &ante_free, opts.budget);
            match engine.prove(g, 1) {
                Ok(mut p) => {
                    steps.append(&mut p.steps);
                    residues.append(&mut p.residues);
                    for (u, v) in p.inst {
                        if named.contains(&u) && !inst.contains(&(u.clone(), v.clone())) {
                            inst.push((u, v));
                        }
                    }
                    proved = true;
                    break;
                }
                Err(mut s) => engine.absorb(&mut steps, &mut s),
            }
        }
        if !proved {
            return Ok(EntailResult {
                verdict: Verdict::NotProven,
                residue: None,
                trace: number(steps),
                instantiation: Vec::new(),
            });
        }
    }
    if residues.is_empty() {
        residues.push(SymbolicHeap {
            pure: PureFormula(vec![PureAtom::falsum()]),
            ..Default::default()
        });
    }
    let mut distinct: Vec<SymbolicHeap> = Vec::new();
    for r in tidy(&Formula::new(residues)).disjuncts {
        if !distinct.iter().any(|d| alpha_eq_heap(d, &r)) {
            distinct.push(r);
        }
    }
    Ok(EntailResult {
        verdict: Verdict::Valid,
        residue: Some(Formula::new(distinct)),
        trace: number(steps),
        instantiation: inst,
    })
}

pub fn check_entail(p: &Program, ante: &Formula, conseq: &Formula, opts: &EntailOptions) -> Result<EntailResult, Error> {
    check_entail_with(&PredTable::new(p), ante, conseq, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_program};

    const ICELL: &str = "
        interface trait ICell.
        trait BICell extends ICell. trait Double extends ICell. trait Inc extends ICell.
        class OddICell extends BICell with Inc with Double.
        class EvenICell extends BICell with Double with Inc.";

    const LL: &str = "
        data node { int val; node next }.
        pred ll<n> == self = null & n = 0
                   \\/ exists q, m: self::node<_, q> * q::ll<m> & n = m + 1
             inv n >= 0.";

    fn run(src: &str, ante: &str, conseq: &str) -> EntailResult {
        let (p, _) = parse_program(src).unwrap();
        let opts = EntailOptions {
            trace: true,
            ..Default::default()
        };
        check_entail(&p, &parse_formula(ante).unwrap(), &parse_formula(conseq).unwrap(), &opts).unwrap()
    }

    #[test]
    fn oic_is_valid() {
        let r = run(ICELL, "oic::OddICell<> & oic = c", "c::BICell<v> * v::Inc<v1> * v1::Double<null>");
        assert!(r.is_valid(), "{:#?}", r.trace);
        assert_eq!(r.residue.unwrap().to_string(), "emp");
    }

    #[test]
    fn oic_instantiates_the_receiver() {
        let r = run(ICELL, "oic::OddICell<>", "c::BICell<v> * v::Inc<v1> * v1::Double<null>");
        assert!(r.is_valid(), "{:#?}", r.trace);
        assert_eq!(r.residue.unwrap().to_string(), "emp");
    }

    #[test]
    fn implied_pure_facts_leave_the_residue() {
        let r = run(LL, "emp & n <= 0", "emp & n <= 0");
        assert_eq!(r.residue.unwrap().to_string(), "emp");
        let r = run(LL, "emp & n <= 0", "emp");
        assert_eq!(r.residue.unwrap().to_string(), "n <= 0");
    }

    #[test]
    fn eic_is_not_proven() {
        let r = run(ICELL, "eic::EvenICell<> & eic = c", "c::BICell<v> * v::Inc<v1> * v1::Double<null>");
        assert_eq!(r.verdict, Verdict::NotProven);
        assert!(r.residue.is_none());
    }

    #[test]
    fn single_node_is_a_list_of_length_one() {
        let r = run(LL, "x::node<_, null>", "x::ll<m> & m = 1");
        assert!(r.is_valid(), "{}", r.trace.join("\n"));
        let r = run(LL, "x::node<_, null>", "x::ll<m> & m = 2");
        assert!(!r.is_valid());
    }

    #[test]
    fn anything_entails_emp_with_itself_as_residue() {
        let r = run(LL, "x::node<1, y> * y::ll<n>", "emp");
        assert!(r.is_valid());
        let res = r.residue.unwrap();
        assert!(crate::subst::alpha_eq(&res, &parse_formula("exists w: x::node<w, y> * y::ll<n> & w = 1").unwrap()), "{}", res);
    }

    #[test]
    fn fewer_traits_leave_a_frame() {
        let r = run(ICELL, "this::BICell<v> * v::Inc<v1> * v1::Double<null>", "this::BICell<u>");
        assert!(r.is_valid());
        assert_eq!(r.residue.unwrap().to_string(), "v::Inc<v1> * v1::Double<null>");
        assert_eq!(r.instantiation, vec![(Ident::new("u"), Ident::new("v"))]);
    }

    #[test]
    fn no_frame_rejects_leftovers() {
        let (p, _) = parse_program(ICELL).unwrap();
        let opts = EntailOptions {
            frame: false,
            ..Default::default()
        };
        let a = parse_formula("this::BICell<v> * v::Inc<null>").unwrap();
        let c = parse_formula("this::BICell<u>").unwrap();
        assert!(!check_entail(&p, &a, &c, &opts).unwrap().is_valid());
        let c = parse_formula("this::BICell<u> * u::Inc<null>").unwrap();
        assert!(check_entail(&p, &a, &c, &opts).unwrap().is_valid());
    }

    #[test]
    fn left_case_split() {
        let r = run(LL, "x::ll<n> & n >= 1", "x::node<a, b> * b::ll<k> & n = k + 1");
        assert!(r.is_valid(), "{}", r.trace.join("\n"));
        let r = run(LL, "x::ll<n>", "x::node<a, b>");
        assert!(!r.is_valid());
    }

    #[test]
    fn invariant_is_assumed() {
        let r = run(LL, "x::ll<n>", "n >= 0");
        assert!(r.is_valid());
        let r = run(LL, "x::ll<n>", "n >= 1");
        assert!(!r.is_valid());
    }

    #[test]
    fn disjointness_of_cells() {
        let r = run(LL, "x::node<a, b> * y::node<c, d>", "x != y");
        assert!(r.is_valid());
        let r = run(LL, "x::node<a, b> & x = null", "false");
        assert!(r.is_valid());
    }

    #[test]
    fn disjunctions() {
        let r = run(LL, "x = null \\/ x::node<a, null>", "x::ll<n>");
        assert!(r.is_valid(), "{}", r.trace.join("\n"));
        let r = run(LL, "x::node<a, null>", "x = null \\/ x::node<b, c>");
        assert!(r.is_valid());
    }

    #[test]
    fn unknown_predicate_is_an_error() {
        let (p, _) = parse_program(LL).unwrap();
        let f = parse_formula("x::nope<>").unwrap();
        assert!(check_entail(&p, &f, &f, &EntailOptions::default()).is_err());
    }

    #[test]
    fn trace_uses_step_vocabulary() {
        let r = run(LL, "x::node<_, null>", "x::ll<m> & m = 1");
        let t = r.trace.join("\n");
        assert!(t.contains("UNFOLD-R ll#2"));
        assert!(t.contains("MATCH node x↦x"));
        assert!(r.trace[0].starts_with("  1."));
    }
}

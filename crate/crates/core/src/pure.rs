//! Decision procedure for the pure fragment: conjunctions of pointer
//! (dis)equalities and linear integer literals.
//!
//! Equalities between variables go through a union-find; arithmetic literals
//! are rewritten over class representatives, equalities with a unit
//! coefficient are eliminated by substitution, and the remaining
//! inequalities go through Fourier–Motzkin elimination with integer
//! tightening. `Unsat` is always sound. `Sat` is only reported once a concrete
//! integer model has been rebuilt from the elimination and checked; anything
//! in between is `Unknown`.
//!
//! Pointers are reasoned about as integers that never appear in arithmetic,
//! with `null` as one more variable. Any pointer model embeds into such an
//! integer model, so refutations carry over.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ident::Ident;
use crate::linear::LinExpr;
use crate::syntax::{Beta, PureAtom, PureFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Sat {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PureVerdict {
    Proven,
    NotProven,
}

/// Bail-out for Fourier–Motzkin blow-up.
const MAX_CONSTRAINTS: usize = 4096;
const MAX_COEFF: i64 = 1 << 40;

#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: HashMap<Ident, Ident>,
}

impl UnionFind {
    pub fn find(&self, v: &Ident) -> Ident {
        let mut cur = v;
        while let Some(p) = self.parent.get(cur) {
            if p == cur {
                break;
            }
            cur = p;
        }
        cur.clone()
    }

    /// Union keeping `null` (then the smallest name) as representative.
    pub fn union(&mut self, a: &Ident, b: &Ident) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let (root, child) = if ra.is_null() || (!rb.is_null() && ra < rb) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent.insert(child, root.clone());
        self.parent.entry(root.clone()).or_insert(root);
    }

    pub fn same(&self, a: &Ident, b: &Ident) -> bool {
        a == b || self.find(a) == self.find(b)
    }
}

/// A conjunction in solved form.
#[derive(Debug, Clone, Default)]
pub struct PureContext {
    pub classes: UnionFind,
    /// `e = 0`, over class representatives.
    pub lin_eqs: Vec<LinExpr>,
    /// `e <= 0`, over class representatives.
    pub lin_ineqs: Vec<LinExpr>,
    /// `e != 0`, over class representatives.
    pub lin_diseqs: Vec<LinExpr>,
    /// Representatives that must differ.
    pub ptr_diseqs: Vec<(Ident, Ident)>,
    /// Two equated classes were also required to differ.
    pub contradiction: bool,
}

impl PureContext {
    pub fn new(atoms: &[PureAtom]) -> PureContext {
        let mut ctx = PureContext::default();
        for a in atoms.iter().filter(|a| !a.negated) {
            match &a.beta {
                Beta::VarEq(x, y) => ctx.classes.union(x, y),
                Beta::NullEq(x) => ctx.classes.union(x, &Ident::null()),
                _ => {}
            }
        }
        for a in atoms {
            match (&a.beta, a.negated) {
                (Beta::VarEq(..) | Beta::NullEq(_), false) => {}
                (Beta::VarEq(x, y), true) => ctx.add_ptr_diseq(x, y),
                (Beta::NullEq(x), true) => ctx.add_ptr_diseq(x, &Ident::null()),
                (Beta::Leq0(e), false) => {
                    let e = ctx.canon(e);
                    ctx.lin_ineqs.push(e);
                }
                (Beta::Leq0(e), true) => {
                    let e = ctx.canon(e);
                    ctx.lin_ineqs.push(e.neg().plus_const(1));
                }
                (Beta::Eq0(e), false) => {
                    let e = ctx.canon(e);
                    ctx.lin_eqs.push(e);
                }
                (Beta::Eq0(e), true) => {
                    let e = ctx.canon(e);
                    ctx.lin_diseqs.push(e);
                }
            }
        }
        ctx
    }

    fn add_ptr_diseq(&mut self, x: &Ident, y: &Ident) {
        let (rx, ry) = (self.classes.find(x), self.classes.find(y));
        if rx == ry {
            self.contradiction = true;
        } else {
            self.ptr_diseqs.push((rx, ry));
        }
    }

    fn canon(&self, e: &LinExpr) -> LinExpr {
        LinExpr::from_parts(
            e.const_term(),
            e.terms().map(|(v, k)| (self.classes.find(v), k)),
        )
    }

    pub fn provably_equal(&self, a: &Ident, b: &Ident) -> bool {
        self.classes.same(a, b)
    }

    pub fn solve(&self) -> Sat {
        if self.contradiction {
            return Sat::Unsat;
        }
        let lin_vars: BTreeSet<&Ident> = self
            .lin_eqs
            .iter()
            .chain(&self.lin_ineqs)
            .chain(&self.lin_diseqs)
            .flat_map(|e| e.vars())
            .collect();
        let mut diseqs = self.lin_diseqs.clone();
        for (a, b) in &self.ptr_diseqs {
            if lin_vars.contains(a) && lin_vars.contains(b) {
                diseqs.push(LinExpr::var(a.clone()).sub(&LinExpr::var(b.clone())));
            }
        }
        split_diseqs(&self.lin_eqs, &self.lin_ineqs, &diseqs)
    }
}

fn split_diseqs(eqs: &[LinExpr], ineqs: &[LinExpr], diseqs: &[LinExpr]) -> Sat {
    let Some((d, rest)) = diseqs.split_first() else {
        return lia(eqs, ineqs);
    };
    if d.is_constant() {
        return if d.const_term() == 0 {
            Sat::Unsat
        } else {
            split_diseqs(eqs, ineqs, rest)
        };
    }
    let mut unknown = false;
    for branch in [d.plus_const(1), d.neg().plus_const(1)] {
        let mut ineqs = ineqs.to_vec();
        ineqs.push(branch);
        match split_diseqs(eqs, &ineqs, rest) {
            Sat::Sat => return Sat::Sat,
            Sat::Unknown => unknown = true,
            Sat::Unsat => {}
        }
    }
    if unknown {
        Sat::Unknown
    } else {
        Sat::Unsat
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

/// Integer tightening of `e <= 0`. `None` when the result is a false
/// constant inequality.
fn tighten(e: &LinExpr) -> Option<LinExpr> {
    if e.is_constant() {
        return if e.const_term() <= 0 { Some(LinExpr::constant(0)) } else { None };
    }
    let g = e.coeff_gcd();
    if g <= 1 {
        return Some(e.clone());
    }
    Some(LinExpr::from_parts(
        ceil_div(e.const_term(), g),
        e.terms().map(|(v, k)| (v.clone(), k / g)),
    ))
}

fn too_big(e: &LinExpr) -> bool {
    e.const_term().abs() > MAX_COEFF || e.terms().any(|(_, k)| k.abs() > MAX_COEFF)
}

/// Linear integer arithmetic over `eqs (= 0)` and `ineqs (<= 0)`.
fn lia(eqs: &[LinExpr], ineqs: &[LinExpr]) -> Sat {
    let mut eqs: Vec<LinExpr> = eqs.to_vec();
    let mut ineqs: Vec<LinExpr> = ineqs.to_vec();
    let mut solved: Vec<(Ident, LinExpr)> = Vec::new();

    // Equalities: gcd test, then unit-coefficient substitution.
    while let Some(e) = eqs.pop() {
        if e.is_constant() {
            if e.const_term() != 0 {
                return Sat::Unsat;
            }
            continue;
        }
        let g = e.coeff_gcd();
        if e.const_term() % g != 0 {
            return Sat::Unsat;
        }
        let e = LinExpr::from_parts(
            e.const_term() / g,
            e.terms().map(|(v, k)| (v.clone(), k / g)),
        );
        let unit = e.terms().find(|(_, k)| k.abs() == 1).map(|(v, k)| (v.clone(), k));
        match unit {
            Some((v, k)) => {
                // k*v + rest = 0  =>  v = -k*rest
                let rest = e.sub(&LinExpr::var(v.clone()).scale(k));
                let def = rest.scale(-k);
                for other in eqs.iter_mut().chain(ineqs.iter_mut()) {
                    *other = other.substitute(&v, &def);
                }
                for (_, d) in solved.iter_mut() {
                    *d = d.substitute(&v, &def);
                }
                solved.push((v, def));
            }
            None => {
                ineqs.push(e.clone());
                ineqs.push(e.neg());
            }
        }
    }

    // Fourier–Motzkin, keeping each stage for model reconstruction.
    let mut current: BTreeSet<LinExpr> = BTreeSet::new();
    for e in &ineqs {
        match tighten(e) {
            None => return Sat::Unsat,
            Some(t) if t.is_constant() => {}
            Some(t) => {
                current.insert(t);
            }
        }
    }
    let vars: BTreeSet<Ident> = current.iter().flat_map(|e| e.vars().cloned()).collect();
    let mut stages: Vec<(Ident, Vec<LinExpr>)> = Vec::new();
    for x in vars {
        let (mut lower, mut upper, mut next) = (Vec::new(), Vec::new(), BTreeSet::new());
        for e in &current {
            match e.coeff(&x) {
                0 => {
                    next.insert(e.clone());
                }
                k if k < 0 => lower.push(e.clone()),
                _ => upper.push(e.clone()),
            }
        }
        for l in &lower {
            for u in &upper {
                let (kl, ku) = (-l.coeff(&x), u.coeff(&x));
                let combined = l.scale(ku).add(&u.scale(kl));
                if too_big(&combined) {
                    return Sat::Unknown;
                }
                match tighten(&combined) {
                    None => return Sat::Unsat,
                    Some(t) if t.is_constant() => {}
                    Some(t) => {
                        next.insert(t);
                    }
                }
            }
        }
        if next.len() > MAX_CONSTRAINTS {
            return Sat::Unknown;
        }
        let stage: Vec<LinExpr> = current.into_iter().filter(|e| e.mentions(&x)).collect();
        stages.push((x, stage));
        current = next;
    }

    // Back-substitution.
    let mut model: BTreeMap<Ident, i64> = BTreeMap::new();
    for (x, constraints) in stages.iter().rev() {
        let (mut lo, mut hi) = (i64::MIN, i64::MAX);
        for e in constraints {
            let k = e.coeff(x);
            let rest = e
                .sub(&LinExpr::var(x.clone()).scale(k))
                .eval(&|v| model.get(v).copied().unwrap_or(0));
            // k*x + rest <= 0
            if k > 0 {
                hi = hi.min(floor_div(-rest, k));
            } else {
                lo = lo.max(ceil_div(rest, -k));
            }
        }
        if lo > hi {
            return Sat::Unknown;
        }
        let val = if lo <= 0 && 0 <= hi {
            0
        } else if lo > 0 {
            lo
        } else {
            hi
        };
        model.insert(x.clone(), val);
    }
    for (v, def) in solved.iter().rev() {
        let val = def.eval(&|w| model.get(w).copied().unwrap_or(0));
        model.insert(v.clone(), val);
    }
    let env = |v: &Ident| model.get(v).copied().unwrap_or(0);
    if ineqs.iter().all(|e| e.eval(&env) <= 0) {
        Sat::Sat
    } else {
        Sat::Unknown
    }
}

pub fn sat(atoms: &[PureAtom]) -> Sat {
    PureContext::new(atoms).solve()
}

pub fn pure_sat(f: &PureFormula) -> Sat {
    sat(f.atoms())
}

/// Every literal of `delta` is refuted-when-negated under `gamma`.
pub fn entails(gamma: &[PureAtom], delta: &[PureAtom]) -> bool {
    if delta.is_empty() {
        return true;
    }
    if sat(gamma) == Sat::Unsat {
        return true;
    }
    let mut buf = gamma.to_vec();
    delta.iter().all(|d| {
        buf.push(d.negate());
        let refuted = sat(&buf) == Sat::Unsat;
        buf.pop();
        refuted
    })
}

pub fn pure_entail(gamma: &PureFormula, delta: &PureFormula) -> PureVerdict {
    if entails(gamma.atoms(), delta.atoms()) {
        PureVerdict::Proven
    } else {
        PureVerdict::NotProven
    }
}

/// Decide `gamma ⊢ ∃evars. delta`. Existentials are first solved from
/// defining equalities, then removed when every remaining occurrence can be
/// satisfied by choice of the witness. Gives up (`false`) otherwise.
pub fn entails_exists(gamma: &[PureAtom], evars: &BTreeSet<Ident>, delta: &[PureAtom]) -> bool {
    match eliminate_existentials(delta, evars) {
        Some(closed) => entails(gamma, &closed),
        None => false,
    }
}

enum Def {
    Var(Ident),
    Lin(LinExpr),
}

fn substitute_lin(atom: &PureAtom, v: &Ident, by: &LinExpr) -> Option<PureAtom> {
    let rebuilt = match &atom.beta {
        Beta::Leq0(e) if e.mentions(v) => PureAtom::leq0(e.substitute(v, by)),
        Beta::Eq0(e) if e.mentions(v) => PureAtom::eq0(e.substitute(v, by)),
        Beta::VarEq(a, b) if a == v || b == v => {
            let other = if a == v { b } else { a };
            if other.is_null() {
                return None;
            }
            PureAtom::eq0(by.sub(&LinExpr::var(other.clone())))
        }
        Beta::NullEq(a) if a == v => return None,
        _ => return Some(atom.clone()),
    };
    Some(if atom.negated { rebuilt.negate() } else { rebuilt })
}

pub fn eliminate_existentials(delta: &[PureAtom], evars: &BTreeSet<Ident>) -> Option<Vec<PureAtom>> {
    let mut atoms: Vec<PureAtom> = delta
        .iter()
        .map(|a| match (&a.beta, a.negated) {
            (Beta::Leq0(e), true) => PureAtom::leq0(e.neg().plus_const(1)),
            _ => a.clone(),
        })
        .collect();

    loop {
        let found = atoms.iter().enumerate().find_map(|(i, a)| {
            if a.negated {
                return None;
            }
            match &a.beta {
                Beta::VarEq(x, y) if x != y && evars.contains(x) => Some((i, x.clone(), Def::Var(y.clone()))),
                Beta::VarEq(x, y) if x != y && evars.contains(y) => Some((i, y.clone(), Def::Var(x.clone()))),
                Beta::NullEq(x) if evars.contains(x) => Some((i, x.clone(), Def::Var(Ident::null()))),
                Beta::Eq0(e) => e.terms().find(|(v, k)| k.abs() == 1 && evars.contains(*v)).map(|(v, k)| {
                    let rest = e.sub(&LinExpr::var(v.clone()).scale(k));
                    (i, v.clone(), Def::Lin(rest.scale(-k)))
                }),
                _ => None,
            }
        });
        let Some((i, v, def)) = found else { break };
        atoms.remove(i);
        atoms = match def {
            Def::Var(t) => {
                let f = |x: &Ident| if *x == v { t.clone() } else { x.clone() };
                atoms.iter().map(|a| a.rename(&f)).collect()
            }
            Def::Lin(e) => atoms
                .iter()
                .map(|a| substitute_lin(a, &v, &e))
                .collect::<Option<Vec<_>>>()?,
        };
    }

    for e in evars {
        let (with, without): (Vec<PureAtom>, Vec<PureAtom>) =
            atoms.into_iter().partition(|a| a.vars().contains(&e));
        atoms = without;
        if with.is_empty() {
            continue;
        }
        let diseq_like = with.iter().all(|a| match &a.beta {
            Beta::VarEq(x, y) => a.negated && x != y,
            Beta::NullEq(_) | Beta::Eq0(_) => a.negated,
            Beta::Leq0(_) => false,
        });
        if diseq_like {
            // Finitely many excluded values; a witness always exists.
            continue;
        }
        let bounds: Option<Vec<&LinExpr>> = with
            .iter()
            .map(|a| match (&a.beta, a.negated) {
                (Beta::Leq0(x), false) => Some(x),
                _ => None,
            })
            .collect();
        let bounds = bounds?;
        let lower: Vec<&LinExpr> = bounds.iter().copied().filter(|b| b.coeff(e) < 0).collect();
        let upper: Vec<&LinExpr> = bounds.iter().copied().filter(|b| b.coeff(e) > 0).collect();
        for l in &lower {
            for u in &upper {
                let (kl, ku) = (-l.coeff(e), u.coeff(e));
                if kl != 1 && ku != 1 {
                    // Integer projection would not be exact.
                    return None;
                }
                atoms.push(PureAtom::leq0(l.scale(ku).add(&u.scale(kl))));
            }
        }
    }
    Some(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Ident {
        Ident::new(n)
    }

    fn lin(c: i64, terms: &[(&str, i64)]) -> LinExpr {
        LinExpr::from_parts(c, terms.iter().map(|(n, k)| (v(n), *k)))
    }

    #[test]
    fn self_disequality_has_no_witness() {
        let evars: BTreeSet<Ident> = [v("x")].into_iter().collect();
        let ne = PureAtom::ne(v("x"), v("x"));
        assert!(!entails_exists(&[], &evars, &[ne]));
        assert!(entails_exists(&[], &evars, &[PureAtom::ne(v("x"), v("y"))]));
    }

    #[test]
    fn null_contradiction_is_unsat() {
        let atoms = [PureAtom::null_eq(v("x")), PureAtom::null_eq(v("x")).negate()];
        assert_eq!(sat(&atoms), Sat::Unsat);
    }

    #[test]
    fn simple_equation_is_sat() {
        assert_eq!(sat(&[PureAtom::eq0(lin(-1, &[("m", 1)]))]), Sat::Sat);
    }

    #[test]
    fn odd_equation_has_no_integer_solution() {
        // 2v + 1 = 0
        assert_eq!(sat(&[PureAtom::eq0(lin(1, &[("v", 2)]))]), Sat::Unsat);
    }

    #[test]
    fn tightening_refutes_rational_solutions() {
        // 1 <= 2x <= 1  has x = 1/2 only
        let atoms = [
            PureAtom::leq0(lin(1, &[("x", -2)])),
            PureAtom::leq0(lin(-1, &[("x", 2)])),
        ];
        assert_eq!(sat(&atoms), Sat::Unsat);
    }

    #[test]
    fn identity_entailment() {
        let m1 = PureAtom::eq0(lin(-1, &[("m", 1)]));
        assert!(entails(&[m1.clone()], &[m1]));
    }

    #[test]
    fn transitivity_through_classes() {
        let gamma = [PureAtom::var_eq(v("x"), v("y")), PureAtom::null_eq(v("y"))];
        assert!(entails(&gamma, &[PureAtom::null_eq(v("x"))]));
        assert!(!entails(&gamma, &[PureAtom::null_eq(v("z"))]));
    }

    #[test]
    fn two_bounds_pin_a_value() {
        let gamma = [
            PureAtom::leq0(lin(-1, &[("v", 1)])),
            PureAtom::leq0(lin(1, &[("v", -1)])),
        ];
        assert!(entails(&gamma, &[PureAtom::eq0(lin(-1, &[("v", 1)]))]));
    }

    #[test]
    fn pointer_disequality_needs_distinct_classes() {
        let gamma = [PureAtom::var_eq(v("x"), v("y"))];
        assert!(!entails(&gamma, &[PureAtom::ne(v("x"), v("z"))]));
        assert_eq!(sat(&[PureAtom::var_eq(v("x"), v("y")), PureAtom::ne(v("y"), v("x"))]), Sat::Unsat);
    }

    #[test]
    fn integer_disequality_splits() {
        // 0 <= x <= 1, x != 0, x != 1
        let atoms = [
            PureAtom::leq0(lin(0, &[("x", -1)])),
            PureAtom::leq0(lin(-1, &[("x", 1)])),
            PureAtom::eq0(lin(0, &[("x", 1)])).negate(),
            PureAtom::eq0(lin(-1, &[("x", 1)])).negate(),
        ];
        assert_eq!(sat(&atoms), Sat::Unsat);
    }

    #[test]
    fn existential_solved_from_equalities() {
        // m = 1 |- exists n1, m2. m2 = m & m2 = n1 + 1 & n1 = 0
        let gamma = [PureAtom::eq0(lin(-1, &[("m", 1)]))];
        let evars: BTreeSet<Ident> = [v("n1"), v("m2")].into_iter().collect();
        let delta = [
            PureAtom::var_eq(v("m2"), v("m")),
            PureAtom::eq0(lin(-1, &[("m2", 1), ("n1", -1)])),
            PureAtom::eq0(lin(0, &[("n1", 1)])),
        ];
        assert!(entails_exists(&gamma, &evars, &delta));
        let gamma2 = [PureAtom::eq0(lin(-2, &[("m", 1)]))];
        assert!(!entails_exists(&gamma2, &evars, &delta));
    }

    #[test]
    fn one_sided_existential_is_dropped() {
        // |- exists k. k >= n
        let evars: BTreeSet<Ident> = [v("k")].into_iter().collect();
        let delta = [PureAtom::leq0(lin(0, &[("n", 1), ("k", -1)]))];
        assert!(entails_exists(&[], &evars, &delta));
    }

    #[test]
    fn bounded_existential_projects_exactly() {
        // a <= 3 |- exists k. a <= k & k <= 3
        let evars: BTreeSet<Ident> = [v("k")].into_iter().collect();
        let gamma = [PureAtom::leq0(lin(-3, &[("a", 1)]))];
        let delta = [
            PureAtom::leq0(lin(0, &[("a", 1), ("k", -1)])),
            PureAtom::leq0(lin(-3, &[("k", 1)])),
        ];
        assert!(entails_exists(&gamma, &evars, &delta));
        let gamma2 = [PureAtom::leq0(lin(-4, &[("a", 1)]))];
        assert!(!entails_exists(&gamma2, &evars, &delta));
    }
}

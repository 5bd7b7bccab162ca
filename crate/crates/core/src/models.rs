//! Brute-force models of symbolic heaps over a bounded universe.
//!
//! A model is a store for the free variables plus a heap of data cells and
//! abstract resources. Abstract atoms are opaque labelled resources: a
//! `T<a, b>` instance is present exactly when the resource `(T, a, b)` is.
//! Used as an independent oracle for the entailment procedure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ident::Ident;
use crate::predgen::PredTable;
use crate::sorts::{self, VarSort};
use crate::subst::fresh_rename;
use crate::syntax::{Beta, Formula, HeapAtom, PredInst, PredKind, PureAtom, SymbolicHeap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Loc(u32),
    Int(i64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Loc(l) => write!(f, "#{}", l),
            Value::Int(k) => write!(f, "{}", k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Heap {
    pub cells: BTreeMap<u32, (String, Vec<Value>)>,
    /// Sorted multiset of `(name, root and arguments)`.
    pub resources: Vec<(String, Vec<Value>)>,
}

impl Heap {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.resources.is_empty()
    }

    fn locs(&self) -> BTreeSet<u32> {
        let mut out: BTreeSet<u32> = self.cells.keys().copied().collect();
        let vals = self
            .cells
            .values()
            .flat_map(|(_, v)| v.iter())
            .chain(self.resources.iter().flat_map(|(_, v)| v.iter()));
        for v in vals {
            if let Value::Loc(l) = v {
                out.insert(*l);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Model {
    pub store: BTreeMap<Ident, Value>,
    pub heap: Heap,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.store.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        write!(f, "[{}]", s.join(", "))?;
        for (l, (n, vals)) in &self.heap.cells {
            let v: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
            write!(f, " #{}::{}<{}>", l, n, v.join(", "))?;
        }
        for (n, vals) in &self.heap.resources {
            let v: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
            write!(f, " {}<{}>", n, v.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of data cells.
    pub heap_size: usize,
    pub int_min: i64,
    pub int_max: i64,
    /// Maximum nesting of predicate unfoldings.
    pub depth: usize,
}

impl Bounds {
    pub fn new(heap_size: usize, int_min: i64, int_max: i64) -> Bounds {
        Bounds {
            heap_size,
            int_min,
            int_max,
            depth: heap_size + 3,
        }
    }
}

/// The unfolding depth ran out before every branch was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundExhausted;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Holds,
    Fails,
    BoundExhausted,
}

#[derive(Clone)]
struct St {
    store: HashMap<Ident, Value>,
    heap: Heap,
    /// Locations in use; fresh ones are numbered from here.
    next_loc: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Generate,
    Consume,
}

struct Enum<'a> {
    table: &'a PredTable,
    params: sorts::ParamSorts,
    sorts: HashMap<Ident, VarSort>,
    bounds: Bounds,
    mode: Mode,
    exhausted: bool,
}

fn eval_atom(a: &PureAtom, s: &HashMap<Ident, Value>) -> Option<bool> {
    let val = |v: &Ident| -> Option<Value> {
        if v.is_null() {
            Some(Value::Null)
        } else {
            s.get(v).copied()
        }
    };
    let lin = |e: &crate::linear::LinExpr| -> Option<Option<i64>> {
        let mut total = e.const_term();
        for (v, k) in e.terms() {
            match val(v)? {
                Value::Int(x) => total += k * x,
                _ => return Some(None),
            }
        }
        Some(Some(total))
    };
    let r = match &a.beta {
        Beta::VarEq(x, y) => val(x)? == val(y)?,
        Beta::NullEq(x) => val(x)? == Value::Null,
        Beta::Leq0(e) => lin(e)?.is_some_and(|t| t <= 0),
        Beta::Eq0(e) => lin(e)?.is_some_and(|t| t == 0),
    };
    Some(r != a.negated)
}

impl<'a> Enum<'a> {
    fn sort_of(&self, v: &Ident, pure: &[PureAtom]) -> VarSort {
        if let Some(s) = self.sorts.get(v) {
            return *s;
        }
        let arith = pure.iter().any(|a| matches!(&a.beta, Beta::Leq0(e) | Beta::Eq0(e) if e.mentions(v)));
        if arith {
            VarSort::Int
        } else {
            VarSort::Ptr
        }
    }

    fn domain(&self, st: &St, sort: VarSort) -> Vec<(Value, bool)> {
        match sort {
            VarSort::Int => (self.bounds.int_min..=self.bounds.int_max)
                .map(|k| (Value::Int(k), false))
                .collect(),
            VarSort::Ptr => {
                let mut d = vec![(Value::Null, false)];
                d.extend((0..st.next_loc).map(|l| (Value::Loc(l), false)));
                d.push((Value::Loc(st.next_loc), true));
                d
            }
        }
    }

    fn bind(st: &mut St, v: &Ident, val: Value, fresh: bool) {
        st.store.insert(v.clone(), val);
        if fresh {
            st.next_loc += 1;
        }
    }

    fn value(st: &St, v: &Ident) -> Option<Value> {
        if v.is_null() {
            Some(Value::Null)
        } else {
            st.store.get(v).copied()
        }
    }

    /// Drop decided pure atoms; `None` if one is false.
    fn prune(st: &St, pure: &[PureAtom]) -> Option<Vec<PureAtom>> {
        let mut rest = Vec::new();
        for a in pure {
            match eval_atom(a, &st.store) {
                Some(true) => {}
                Some(false) => return None,
                None => rest.push(a.clone()),
            }
        }
        Some(rest)
    }

    /// Bind `vars` one at a time (each by its sort's domain), then `k`.
    fn bind_all(
        &mut self,
        st: St,
        vars: &[(Ident, VarSort)],
        pure: Vec<PureAtom>,
        k: &mut dyn FnMut(&mut Self, St, Vec<PureAtom>) -> bool,
    ) -> bool {
        let Some(pure) = Self::prune(&st, &pure) else {
            return false;
        };
        let Some(((v, sort), rest)) = vars.split_first() else {
            return k(self, st, pure);
        };
        if Self::value(&st, v).is_some() {
            return self.bind_all(st, rest, pure, k);
        }
        for (val, fresh) in self.domain(&st, *sort) {
            let mut s2 = st.clone();
            Self::bind(&mut s2, v, val, fresh);
            if self.bind_all(s2, rest, pure.clone(), k) {
                return true;
            }
        }
        false
    }

    /// Process `todo` left to right; `out` sees every completed state and
    /// returns `true` to stop the search.
    fn go(
        &mut self,
        st: St,
        todo: &[PredInst],
        pure: Vec<PureAtom>,
        vars: &[Ident],
        depth: usize,
        out: &mut dyn FnMut(&St) -> bool,
    ) -> bool {
        let Some(pure) = Self::prune(&st, &pure) else {
            return false;
        };
        let Some((a, rest)) = todo.split_first() else {
            let unbound: Vec<(Ident, VarSort)> = vars
                .iter()
                .filter(|v| Self::value(&st, v).is_none())
                .map(|v| (v.clone(), self.sort_of(v, &pure)))
                .collect();
            let mode = self.mode;
            return self.bind_all(st, &unbound, pure, &mut |_, st, pure| {
                if !pure.is_empty() {
                    return false;
                }
                if mode == Mode::Consume && !st.heap.is_empty() {
                    return false;
                }
                out(&st)
            });
        };
        let def = match self.table.get(&a.name) {
            Ok(d) => d.clone(),
            Err(_) => return false,
        };
        let slots: Vec<Ident> = std::iter::once(a.root.clone()).chain(a.args.iter().cloned()).collect();
        let slot_sorts: Vec<VarSort> = slots
            .iter()
            .enumerate()
            .map(|(i, v)| {
                self.params
                    .get(&a.name)
                    .and_then(|ps| ps.get(i).copied().flatten())
                    .unwrap_or_else(|| self.sort_of(v, &pure))
            })
            .collect();
        match (&def.kind, self.mode) {
            (PredKind::Defined(body), _) => {
                if depth == 0 {
                    self.exhausted = true;
                    return false;
                }
                for d in &body.disjuncts {
                    let fresh = fresh_rename(d);
                    let map: HashMap<Ident, Ident> = def.params.iter().cloned().zip(slots.iter().cloned()).collect();
                    let inst = crate::subst::rename_heap(&fresh, &map);
                    let mut todo2: Vec<PredInst> = inst.preds().cloned().collect();
                    todo2.extend(rest.iter().cloned());
                    let mut pure2 = pure.clone();
                    pure2.extend(inst.pure.0.iter().cloned());
                    let mut vars2 = vars.to_vec();
                    vars2.extend(inst.existentials.iter().cloned());
                    if self.go(st.clone(), &todo2, pure2, &vars2, depth - 1, out) {
                        return true;
                    }
                }
                false
            }
            (PredKind::Data(_), Mode::Generate) => {
                if st.heap.cells.len() >= self.bounds.heap_size {
                    return false;
                }
                let root_choices: Vec<(Value, bool)> = match Self::value(&st, &a.root) {
                    Some(v) => vec![(v, false)],
                    None => self.domain(&st, VarSort::Ptr).into_iter().filter(|(v, _)| *v != Value::Null).collect(),
                };
                for (rv, fresh) in root_choices {
                    let Value::Loc(l) = rv else { continue };
                    if st.heap.cells.contains_key(&l) {
                        continue;
                    }
                    let mut s2 = st.clone();
                    Self::bind(&mut s2, &a.root, rv, fresh);
                    let arg_vars: Vec<(Ident, VarSort)> =
                        a.args.iter().cloned().zip(slot_sorts[1..].iter().copied()).collect();
                    let name = a.name.clone();
                    let args = a.args.clone();
                    let stop = self.bind_all(s2, &arg_vars, pure.clone(), &mut |me, mut s3, pure| {
                        let vals = args.iter().map(|v| Self::value(&s3, v).expect("bound")).collect();
                        s3.heap.cells.insert(l, (name.clone(), vals));
                        me.go(s3, rest, pure, vars, depth, out)
                    });
                    if stop {
                        return true;
                    }
                }
                false
            }
            (PredKind::Abstract, Mode::Generate) => {
                let all: Vec<(Ident, VarSort)> = slots.iter().cloned().zip(slot_sorts.iter().copied()).collect();
                let name = a.name.clone();
                let slots2 = slots.clone();
                self.bind_all(st, &all, pure, &mut |me, mut s3, pure| {
                    let vals: Vec<Value> = slots2.iter().map(|v| Self::value(&s3, v).expect("bound")).collect();
                    let pos = s3.heap.resources.partition_point(|r| *r < (name.clone(), vals.clone()));
                    s3.heap.resources.insert(pos, (name.clone(), vals));
                    me.go(s3, rest, pure, vars, depth, out)
                })
            }
            (PredKind::Data(_) | PredKind::Abstract, Mode::Consume) => {
                let candidates: Vec<(Option<u32>, usize, Vec<Value>)> = if def.is_data() {
                    st.heap
                        .cells
                        .iter()
                        .filter(|(_, (n, _))| *n == a.name)
                        .map(|(l, (_, v))| {
                            let mut all = vec![Value::Loc(*l)];
                            all.extend(v.iter().copied());
                            (Some(*l), 0, all)
                        })
                        .collect()
                } else {
                    let mut seen = BTreeSet::new();
                    st.heap
                        .resources
                        .iter()
                        .enumerate()
                        .filter(|(_, (n, _))| *n == a.name)
                        .filter(|(_, r)| seen.insert((*r).clone()))
                        .map(|(i, (_, v))| (None, i, v.clone()))
                        .collect()
                };
                for (loc, idx, vals) in candidates {
                    let mut s2 = st.clone();
                    let mut ok = true;
                    for (v, val) in slots.iter().zip(&vals) {
                        match Self::value(&s2, v) {
                            Some(x) if x != *val => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => {
                                s2.store.insert(v.clone(), *val);
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    match loc {
                        Some(l) => {
                            s2.heap.cells.remove(&l);
                        }
                        None => {
                            s2.heap.resources.remove(idx);
                        }
                    }
                    if self.go(s2, rest, pure.clone(), vars, depth, out) {
                        return true;
                    }
                }
                false
            }
        }
    }
}

fn query_sorts(table: &PredTable, p: &crate::program::Program, heaps: &[SymbolicHeap]) -> (sorts::ParamSorts, HashMap<Ident, VarSort>) {
    let _ = table;
    let params = sorts::param_sorts(p);
    let found = sorts::infer(&params, heaps, HashMap::new()).unwrap_or_default();
    (params, found)
}

/// Every model of `h` with at most `bounds.heap_size` cells and integers
/// in the bounds' range. The store covers the free variables of `h`.
pub fn model_enumerate(
    p: &crate::program::Program,
    table: &PredTable,
    h: &SymbolicHeap,
    bounds: &Bounds,
) -> Result<Vec<Model>, BoundExhausted> {
    let h = fresh_rename(h);
    let (params, sorts) = query_sorts(table, p, std::slice::from_ref(&h));
    let mut e = Enum {
        table,
        params,
        sorts,
        bounds: *bounds,
        mode: Mode::Generate,
        exhausted: false,
    };
    let free: Vec<Ident> = h.free_vars().into_iter().collect();
    let mut vars = free.clone();
    vars.extend(h.existentials.iter().cloned());
    let todo: Vec<PredInst> = h.preds().cloned().collect();
    let st = St {
        store: HashMap::new(),
        heap: Heap::default(),
        next_loc: 0,
    };
    let mut found = BTreeSet::new();
    e.go(st, &todo, h.pure.0.clone(), &vars, bounds.depth, &mut |st| {
        let store = free
            .iter()
            .map(|v| (v.clone(), st.store[v]))
            .collect();
        found.insert(Model {
            store,
            heap: st.heap.clone(),
        });
        false
    });
    if e.exhausted {
        return Err(BoundExhausted);
    }
    Ok(found.into_iter().collect())
}

/// Does `m` satisfy `f`? Variables of `f` outside the model's store are
/// existential; pointer witnesses range over the model's locations plus
/// one fresh location, integer witnesses over the bounds' range.
pub fn satisfies(p: &crate::program::Program, table: &PredTable, m: &Model, f: &Formula, bounds: &Bounds) -> Check {
    let mut exhausted = false;
    for d in &f.disjuncts {
        let h = fresh_rename(d);
        let (params, mut sorts) = query_sorts(table, p, std::slice::from_ref(&h));
        for (v, val) in &m.store {
            match val {
                Value::Int(_) => sorts.insert(v.clone(), VarSort::Int),
                _ => sorts.insert(v.clone(), VarSort::Ptr),
            };
        }
        let mut e = Enum {
            table,
            params,
            sorts,
            bounds: *bounds,
            mode: Mode::Consume,
            exhausted: false,
        };
        let mut vars: Vec<Ident> = h.free_vars().into_iter().collect();
        vars.extend(h.existentials.iter().cloned());
        let todo: Vec<PredInst> = h.preds().cloned().collect();
        let locs = m.heap.locs();
        let store_locs = m.store.values().filter_map(|v| match v {
            Value::Loc(l) => Some(*l),
            _ => None,
        });
        let next_loc = locs.iter().copied().chain(store_locs).max().map_or(0, |l| l + 1);
        let st = St {
            store: m.store.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            heap: m.heap.clone(),
            next_loc,
        };
        if e.go(st, &todo, h.pure.0.clone(), &vars, bounds.depth, &mut |_| true) {
            return Check::Holds;
        }
        exhausted |= e.exhausted;
    }
    if exhausted {
        Check::BoundExhausted
    } else {
        Check::Fails
    }
}

/// `conseq ∗ residue` as one formula, disjunct by disjunct.
pub fn star_formulas(a: &Formula, b: &Formula) -> Formula {
    let mut out = Vec::new();
    for x in &a.disjuncts {
        for y in &b.disjuncts {
            out.push(fresh_rename(x).star(&fresh_rename(y)));
        }
    }
    Formula::new(out)
}

/// Whether `h` mentions only emp and pure atoms.
pub fn is_pure(h: &SymbolicHeap) -> bool {
    h.spatial.iter().all(|a| matches!(a, HeapAtom::Emp))
}

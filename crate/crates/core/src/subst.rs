//! Capture-avoiding renaming over formulas.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::ident::{Ident, WILDCARD};
use crate::syntax::{Formula, HeapAtom, PureAtom, PureFormula, SymbolicHeap};

fn apply<'a>(map: &'a HashMap<Ident, Ident>) -> impl Fn(&Ident) -> Ident + 'a {
    move |v| map.get(v).unwrap_or(v).clone()
}

/// Rename free variables of one heap without any capture check. Bound
/// existentials are renamed too if they appear in `map`.
pub fn rename_heap(h: &SymbolicHeap, map: &HashMap<Ident, Ident>) -> SymbolicHeap {
    let f = apply(map);
    SymbolicHeap {
        existentials: h.existentials.iter().map(&f).collect(),
        spatial: h
            .spatial
            .iter()
            .map(|a| match a {
                HeapAtom::Emp => HeapAtom::Emp,
                HeapAtom::Pred(p) => HeapAtom::Pred(p.rename(&f)),
            })
            .collect(),
        pure: rename_pure(&h.pure, map),
    }
}

pub fn rename_pure(p: &PureFormula, map: &HashMap<Ident, Ident>) -> PureFormula {
    let f = apply(map);
    PureFormula(p.0.iter().map(|a| a.rename(&f)).collect())
}

pub fn rename_atoms(atoms: &[PureAtom], map: &HashMap<Ident, Ident>) -> Vec<PureAtom> {
    let f = apply(map);
    atoms.iter().map(|a| a.rename(&f)).collect()
}

/// Simultaneous capture-avoiding substitution on one disjunct.
pub fn substitute_heap(h: &SymbolicHeap, mapping: &HashMap<Ident, Ident>) -> SymbolicHeap {
    let bound: HashSet<&Ident> = h.existentials.iter().collect();
    let mut local: HashMap<Ident, Ident> = mapping
        .iter()
        .filter(|(k, _)| !bound.contains(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if local.is_empty() {
        return h.clone();
    }
    let range: HashSet<&Ident> = local.values().collect();
    let mut renamed = Vec::with_capacity(h.existentials.len());
    let mut captures = Vec::new();
    for w in &h.existentials {
        if range.contains(w) {
            let w2 = w.refresh();
            captures.push((w.clone(), w2.clone()));
            renamed.push(w2);
        } else {
            renamed.push(w.clone());
        }
    }
    local.extend(captures);
    let mut out = rename_heap(h, &local);
    out.existentials = renamed;
    out
}

pub fn substitute(target: &Formula, mapping: &HashMap<Ident, Ident>) -> Formula {
    Formula::new(
        target
            .disjuncts
            .iter()
            .map(|d| substitute_heap(d, mapping))
            .collect(),
    )
}

/// Replace every existential by a globally fresh identifier.
pub fn fresh_rename(h: &SymbolicHeap) -> SymbolicHeap {
    if h.existentials.is_empty() {
        return h.clone();
    }
    let map: HashMap<Ident, Ident> = h
        .existentials
        .iter()
        .map(|w| (w.clone(), w.refresh()))
        .collect();
    rename_heap(h, &map)
}

/// Canonical form used for alpha-equivalence: existentials renamed in order
/// of first occurrence, atoms sorted.
fn canonical(h: &SymbolicHeap) -> (usize, Vec<HeapAtom>, Vec<PureAtom>) {
    let bound: HashSet<&Ident> = h.existentials.iter().collect();
    let mut map = HashMap::new();
    let mut next = 0u64;
    let mut visit = |v: &Ident, map: &mut HashMap<Ident, Ident>| {
        if bound.contains(v) && !map.contains_key(v) {
            next += 1;
            map.insert(v.clone(), Ident::with_id("$", next));
        }
    };
    for p in h.preds() {
        for v in p.vars() {
            visit(v, &mut map);
        }
    }
    for a in h.pure.atoms() {
        for v in a.vars() {
            visit(v, &mut map);
        }
    }
    let r = rename_heap(h, &map);
    let mut spatial: Vec<HeapAtom> = r
        .spatial
        .into_iter()
        .filter(|a| !matches!(a, HeapAtom::Emp))
        .collect();
    spatial.sort();
    let mut pure = r.pure.0;
    pure.sort();
    pure.dedup();
    (map.len(), spatial, pure)
}

pub fn alpha_eq_heap(a: &SymbolicHeap, b: &SymbolicHeap) -> bool {
    canonical(a) == canonical(b)
}

/// Alpha-equivalence up to disjunct order.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    if a.disjuncts.len() != b.disjuncts.len() {
        return false;
    }
    let mut used = vec![false; b.disjuncts.len()];
    'outer: for da in &a.disjuncts {
        for (j, db) in b.disjuncts.iter().enumerate() {
            if !used[j] && alpha_eq_heap(da, db) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Rename fresh existentials to readable surface names that do not clash
/// with anything else in the heap. Alpha-equivalent to the input.
pub fn tidy_heap(h: &SymbolicHeap) -> SymbolicHeap {
    let mut taken: BTreeSet<String> = h
        .all_vars()
        .iter()
        .filter(|v| !v.is_fresh() && !h.existentials.contains(v))
        .map(|v| v.name().to_string())
        .collect();
    let mut map = HashMap::new();
    for w in &h.existentials {
        if !w.is_fresh() && !taken.contains(w.name()) {
            taken.insert(w.name().to_string());
            continue;
        }
        let base = if w.name() == WILDCARD { "w" } else { w.name() };
        let mut n = 0;
        let name = loop {
            let cand = if n == 0 {
                base.to_string()
            } else {
                format!("{}{}", base, n)
            };
            if !taken.contains(&cand) && !is_keyword(&cand) {
                break cand;
            }
            n += 1;
        };
        taken.insert(name.clone());
        map.insert(w.clone(), Ident::new(name));
    }
    rename_heap(h, &map)
}

pub fn tidy(f: &Formula) -> Formula {
    Formula::new(f.disjuncts.iter().map(tidy_heap).collect())
}

fn is_keyword(s: &str) -> bool {
    crate::parser::KEYWORDS.contains(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::PredInst;

    fn v(n: &str) -> Ident {
        Ident::new(n)
    }

    fn atom(name: &str, root: &str, args: &[&str]) -> HeapAtom {
        HeapAtom::Pred(PredInst::new(
            name,
            if root == "null" { Ident::null() } else { v(root) },
            args.iter()
                .map(|a| if *a == "null" { Ident::null() } else { v(a) })
                .collect(),
        ))
    }

    #[test]
    fn direct_replacement() {
        let f = Formula::single(SymbolicHeap {
            spatial: vec![atom("ll", "x", &["m"])],
            ..Default::default()
        });
        let out = substitute(&f, &HashMap::from([(v("m"), v("n"))]));
        assert_eq!(out.to_string(), "x::ll<n>");
    }

    #[test]
    fn capture_forces_renaming() {
        let f = Formula::single(SymbolicHeap {
            existentials: vec![v("w")],
            spatial: vec![atom("node", "x", &["w", "y"])],
            ..Default::default()
        });
        let out = substitute(&f, &HashMap::from([(v("y"), v("w"))]));
        let d = &out.disjuncts[0];
        let w2 = d.existentials[0].clone();
        assert_ne!(w2, v("w"));
        assert_eq!(w2.name(), "w");
        let p = d.preds().next().unwrap();
        assert_eq!(p.args, vec![w2, v("w")]);
    }

    #[test]
    fn empty_mapping_is_identity() {
        let f = Formula::single(SymbolicHeap {
            existentials: vec![v("w")],
            spatial: vec![atom("node", "x", &["w", "null"])],
            ..Default::default()
        });
        assert_eq!(substitute(&f, &HashMap::new()), f);
    }

    #[test]
    fn bound_names_are_not_substituted() {
        let f = Formula::single(SymbolicHeap {
            existentials: vec![v("w")],
            spatial: vec![atom("node", "x", &["w", "y"])],
            ..Default::default()
        });
        let out = substitute(&f, &HashMap::from([(v("w"), v("z"))]));
        assert_eq!(out, f);
    }

    #[test]
    fn fresh_rename_twice_is_alpha_equivalent_but_not_identical() {
        let h = SymbolicHeap {
            existentials: vec![v("w")],
            spatial: vec![atom("node", "x", &["w", "null"])],
            ..Default::default()
        };
        let a = fresh_rename(&h);
        let b = fresh_rename(&a);
        assert_ne!(a, b);
        assert_ne!(a, h);
        assert!(alpha_eq_heap(&a, &b));
        assert!(alpha_eq_heap(&a, &h));
        assert!(a.existentials[0].is_fresh());
    }

    #[test]
    fn fresh_rename_without_existentials_is_identity() {
        let h = SymbolicHeap {
            spatial: vec![atom("node", "x", &["y", "null"])],
            ..Default::default()
        };
        assert_eq!(fresh_rename(&h), h);
    }

    #[test]
    fn tidy_picks_unclashing_names() {
        let w = Ident::fresh("v");
        let h = SymbolicHeap {
            existentials: vec![w.clone()],
            spatial: vec![
                HeapAtom::Pred(PredInst::new("A", v("this"), vec![w.clone()])),
                HeapAtom::Pred(PredInst::new("B", w, vec![v("v")])),
            ],
            ..Default::default()
        };
        let t = tidy_heap(&h);
        assert_eq!(t.to_string(), "exists v1: this::A<v1> * v1::B<v>");
        assert!(alpha_eq_heap(&t, &h));
    }
}

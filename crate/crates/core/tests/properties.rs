use std::collections::{BTreeSet, HashMap};

use mixcheck::entail::{check_entail_with, EntailOptions};
use mixcheck::linear::ArithTerm;
use mixcheck::linearize::linearize;
use mixcheck::models::{model_enumerate, satisfies, Bounds, Check};
use mixcheck::parser::{parse_formula, parse_program, parse_program_in};
use mixcheck::predgen::{gen_chain, PredTable, Terminal};
use mixcheck::pure::{entails, sat, Sat};
use mixcheck::session::{Output, Session};
use mixcheck::subst::{alpha_eq, alpha_eq_heap, fresh_rename, substitute, tidy};
use mixcheck::subtype::{is_subtype_with, this, SubtypeOptions};
use mixcheck::{Decl, Formula, Ident, PureAtom, TypeExpr};
use proptest::prelude::*;

const HEAP_PROGRAM: &str = "
    data node { node next }.
    data cell { int val }.
    pred ll<n> == self = null & n = 0
               \\/ exists q, m: self::node<q> * q::ll<m> & n = m + 1
         inv n >= 0.
    pred lseg<p> == self = p
                 \\/ exists q: self::node<q> * q::lseg<p> & self != p.";

fn ident(i: usize) -> Ident {
    Ident::new(["a", "b", "c"][i % 3])
}

fn arith() -> impl Strategy<Value = ArithTerm> {
    let leaf = prop_oneof![
        (-5i64..=5).prop_map(ArithTerm::Const),
        (-3i64..=3, 0usize..3).prop_map(|(k, v)| ArithTerm::Scaled(k, ident(v))),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| ArithTerm::Sum(Box::new(a), Box::new(b)))
    })
}

/// Heap text over pointer variables x, y, z (and `e` when bound) and
/// integer variables n, m.
fn heap_text() -> impl Strategy<Value = String> {
    let ptr = |with_null: bool| {
        let mut v = vec!["x", "y", "z"];
        if with_null {
            v.push("null");
        }
        prop::sample::select(v)
    };
    let atom = prop_oneof![
        (ptr(false), ptr(true)).prop_map(|(r, a)| format!("{}::node<{}>", r, a)),
        (ptr(false), prop::sample::select(vec!["n", "m"])).prop_map(|(r, a)| format!("{}::cell<{}>", r, a)),
        (ptr(false), prop::sample::select(vec!["n", "m"])).prop_map(|(r, a)| format!("{}::ll<{}>", r, a)),
        (ptr(false), ptr(true)).prop_map(|(r, a)| format!("{}::lseg<{}>", r, a)),
    ];
    let pure = prop_oneof![
        (ptr(false), ptr(true)).prop_map(|(a, b)| format!("{} = {}", a, b)),
        (ptr(false), ptr(true)).prop_map(|(a, b)| format!("{} != {}", a, b)),
        (prop::sample::select(vec!["n", "m"]), -2i64..=2).prop_map(|(a, k)| format!("{} <= {}", a, k)),
        (prop::sample::select(vec!["n", "m"]), -2i64..=2).prop_map(|(a, k)| format!("{} != {}", a, k)),
    ];
    (prop::collection::vec(atom, 0..=3), prop::collection::vec(pure, 0..=2)).prop_map(|(atoms, pure)| {
        let mut s = if atoms.is_empty() { "emp".to_string() } else { atoms.join(" * ") };
        for p in pure {
            s.push_str(" & ");
            s.push_str(&p);
        }
        s
    })
}

fn formula_text() -> impl Strategy<Value = String> {
    (prop::collection::vec(heap_text(), 1..=3), any::<bool>()).prop_map(|(ds, quantify)| {
        ds.into_iter()
            .map(|d| {
                if quantify && d.contains('y') {
                    format!("exists y: {}", d)
                } else {
                    d
                }
            })
            .collect::<Vec<_>>()
            .join(" \\/ ")
    })
}

/// Acyclic hierarchies: each node extends earlier nodes only.
fn hierarchy(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec((any::<bool>(), any::<bool>(), prop::collection::vec(any::<prop::sample::Index>(), 0..=3)), 1..=max)
        .prop_map(|nodes| {
            let mut out = String::new();
            let mut traits: Vec<String> = Vec::new();
            let mut all: Vec<String> = Vec::new();
            for (i, (is_class, interface, parents)) in nodes.into_iter().enumerate() {
                let name = format!("N{}", i);
                // Traits extend traits; classes may extend anything earlier.
                let is_class = is_class && !traits.is_empty();
                let pool = if is_class { &all } else { &traits };
                let mut ps: Vec<String> = Vec::new();
                if !pool.is_empty() {
                    for p in parents {
                        let k = pool[p.index(pool.len())].clone();
                        if !ps.contains(&k) {
                            ps.push(k);
                        }
                    }
                }
                if is_class && ps.is_empty() {
                    ps.push(traits[0].clone());
                }
                let ext = if ps.is_empty() { String::new() } else { format!(" extends {}", ps.join(" with ")) };
                if is_class {
                    out.push_str(&format!("class {}{}.\n", name, ext));
                } else {
                    out.push_str(&format!("{}trait {}{}.\n", if interface { "interface " } else { "" }, name, ext));
                    traits.push(name.clone());
                }
                all.push(name);
            }
            out
        })
}

fn heap_table() -> (mixcheck::Program, PredTable) {
    let (p, _) = parse_program(HEAP_PROGRAM).unwrap();
    let t = PredTable::new(&p);
    (p, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_is_idempotent_and_preserves_value(t in arith(), env in prop::array::uniform3(-10i64..=10)) {
        let once = t.normalize();
        prop_assert_eq!(once.to_term().normalize(), once.clone());
        let f = |v: &Ident| match v.name() { "a" => env[0], "b" => env[1], _ => env[2] };
        prop_assert_eq!(once.eval(&f), t.eval(&f));
    }

    #[test]
    fn substitute_distributes_over_disjuncts(src in formula_text(), to in prop::sample::select(vec!["x", "y", "z", "w"])) {
        let f = parse_formula(&src).unwrap();
        let map: HashMap<Ident, Ident> = [(Ident::new("x"), Ident::new(to))].into_iter().collect();
        let whole = substitute(&f, &map);
        let parts: Vec<_> = f.disjuncts.iter().flat_map(|d| substitute(&Formula::single(d.clone()), &map).disjuncts).collect();
        prop_assert_eq!(whole.disjuncts.len(), parts.len());
        for (a, b) in whole.disjuncts.iter().zip(&parts) {
            prop_assert!(alpha_eq_heap(a, b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn tidy_is_idempotent(src in formula_text()) {
        let f = parse_formula(&src).unwrap();
        let once = tidy(&f);
        prop_assert!(alpha_eq(&tidy(&once), &once));
    }

    #[test]
    fn printing_round_trips(src in formula_text()) {
        let f = parse_formula(&src).unwrap();
        let printed = f.to_string();
        let again = parse_formula(&printed).unwrap();
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn wildcards_become_distinct_existentials(k in 1usize..=4) {
        let args = vec!["_"; k].join(", ");
        let src = format!("x::w<{}>", args);
        let f = parse_formula(&src).unwrap();
        let h = &f.disjuncts[0];
        prop_assert_eq!(h.existentials.len(), k);
        let distinct: BTreeSet<&Ident> = h.existentials.iter().collect();
        prop_assert_eq!(distinct.len(), k);
    }

    #[test]
    fn diagnostics_stay_inside_the_input(src in "[a-z<>:*&|=!(){}\\[\\]., \n0-9_-]{0,60}") {
        let lines: Vec<&str> = src.split('\n').collect();
        if let Err(diags) = parse_program_in(&src, "t.mix") {
            for d in diags {
                let Some(s) = d.span else { continue };
                prop_assert!(s.start_line >= 1 && s.end_line <= lines.len());
                prop_assert!((s.start_line, s.start_col) <= (s.end_line, s.end_col));
                prop_assert!(s.end_col <= lines[s.end_line - 1].chars().count() + 2, "{} in {:?}", s, src);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fresh_rename_preserves_models(src in heap_text()) {
        let (p, t) = heap_table();
        let h = parse_formula(&format!("exists y: {}", src)).unwrap().disjuncts.remove(0);
        let b = Bounds::new(3, -2, 2);
        let Ok(models) = model_enumerate(&p, &t, &h, &b) else { return Ok(()) };
        let renamed = fresh_rename(&h);
        prop_assert_eq!(model_enumerate(&p, &t, &renamed, &b).ok(), Some(models.clone()));
        for m in &models {
            prop_assert_eq!(satisfies(&p, &t, m, &Formula::single(renamed.clone()), &b), Check::Holds);
        }
    }

    #[test]
    fn entailment_is_reflexive(src in heap_text()) {
        let (p, t) = heap_table();
        let h = parse_formula(&src).unwrap();
        let inhabited = model_enumerate(&p, &t, &h.disjuncts[0], &Bounds::new(3, -2, 2)).map(|m| !m.is_empty());
        prop_assume!(inhabited == Ok(true));
        let r = check_entail_with(&t, &h, &h, &EntailOptions::default()).unwrap();
        prop_assert!(r.is_valid(), "{}", src);
        // The residue keeps the antecedent's pure facts; its heap is empty.
        let res = r.residue.unwrap();
        prop_assert_eq!(res.to_string(), "emp", "{}", src);
    }

    #[test]
    fn budget_is_monotone(a in heap_text(), c in heap_text()) {
        let (_, t) = heap_table();
        let (ante, conseq) = (parse_formula(&a).unwrap(), parse_formula(&c).unwrap());
        let mut seen_valid = false;
        for budget in 0..=5 {
            let opts = EntailOptions { budget, ..Default::default() };
            let v = check_entail_with(&t, &ante, &conseq, &opts).unwrap().is_valid();
            prop_assert!(v || !seen_valid, "{} |- {} lost validity at budget {}", a, c, budget);
            seen_valid |= v;
        }
    }

    #[test]
    fn linearization_is_unique_and_stable(src in hierarchy(12)) {
        let (p, _) = parse_program(&src).unwrap();
        for d in p.decls() {
            let name = d.name();
            let l = linearize(&p, name).unwrap();
            prop_assert_eq!(&l.order[0], name);
            let distinct: BTreeSet<&String> = l.order.iter().collect();
            prop_assert_eq!(distinct.len(), l.order.len());
            prop_assert_eq!(linearize(&p, name).unwrap(), l.clone());
            if let Some([parent]) = p.parents(name) {
                let mut expected = vec![name.to_string()];
                expected.extend(linearize(&p, parent).unwrap().order);
                prop_assert_eq!(l.order, expected);
            }
        }
    }

    #[test]
    fn chains_follow_the_linearization(src in hierarchy(10)) {
        let (p, _) = parse_program(&src).unwrap();
        for d in p.decls() {
            let name = d.name();
            let l = linearize(&p, name).unwrap();
            // Interfaces and classes (a class owner included) contribute no link.
            let interfaces = l.order.iter().filter(|n| matches!(p.get(n), Some(Decl::Trait(t)) if t.interface_only)).count();
            let classes = l.order.iter().filter(|n| matches!(p.get(n), Some(Decl::Class(_)))).count();
            let t = TypeExpr::named(name);
            let expected = l.order.len() - interfaces - classes;
            match gen_chain(&p, &t, this(), "v", Terminal::Null) {
                Err(_) => prop_assert_eq!(expected, 0),
                Ok(c) => {
                    prop_assert_eq!(c.links.len(), expected);
                    let deepest = l.order.iter().rev().find(|n| matches!(p.get(n), Some(Decl::Trait(t)) if !t.interface_only)).unwrap();
                    prop_assert_eq!(c.names()[0], deepest.as_str());
                    let again = gen_chain(&p, &t, this(), "v", Terminal::Null).unwrap();
                    prop_assert!(alpha_eq(&c.formula(), &again.formula()));
                }
            }
        }
    }

    #[test]
    fn mutual_subtypes_have_equal_chains(src in hierarchy(8), open_tail in any::<bool>()) {
        let (p, _) = parse_program(&src).unwrap();
        let t = PredTable::new(&p);
        let opts = SubtypeOptions { open_tail, entail: EntailOptions::default() };
        let names: Vec<&str> = p.decls().iter().map(|d| d.name()).collect();
        for a in &names {
            for b in &names {
                let (ta, tb) = (TypeExpr::named(*a), TypeExpr::named(*b));
                let ab = is_subtype_with(&p, &t, &ta, &tb, &opts).map(|v| v.holds()).unwrap_or(false);
                let ba = is_subtype_with(&p, &t, &tb, &ta, &opts).map(|v| v.holds()).unwrap_or(false);
                if ab && ba {
                    let ca = gen_chain(&p, &ta, this(), "v", Terminal::Null).unwrap();
                    let cb = gen_chain(&p, &tb, this(), "v", Terminal::Null).unwrap();
                    prop_assert_eq!(ca.names(), cb.names());
                }
            }
        }
    }

    #[test]
    fn failing_lines_leave_the_session_alone(garbage in "[a-zA-Z<>:=(){} .]{1,30}") {
        let mut s = Session::default();
        for l in ["trait A.", "trait B extends A.", "class C extends B with A."] {
            s.eval_line(l);
        }
        let before = s.program().dump();
        let line = format!("{}.", garbage);
        if let Output::Text { error: true, .. } = s.eval_line(&line) {
            prop_assert_eq!(s.program().dump(), before);
        }
    }
}

fn int_atom(c: i64, terms: &[(usize, i64)], eq: bool) -> PureAtom {
    let e = mixcheck::linear::LinExpr::from_parts(c, terms.iter().map(|(v, k)| (ident(*v), *k)));
    if eq {
        PureAtom::eq0(e)
    } else {
        PureAtom::leq0(e)
    }
}

fn pure_atom() -> impl Strategy<Value = PureAtom> {
    (-5i64..=5, prop::collection::vec((0usize..3, -3i64..=3), 1..=3), any::<bool>(), prop::bool::weighted(0.2))
        .prop_map(|(c, t, eq, neg)| {
            let a = int_atom(c, &t, eq);
            if neg {
                a.negate()
            } else {
                a
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn proving_is_monotone(gamma in prop::collection::vec(pure_atom(), 1..=3),
                           extra in pure_atom(),
                           delta in prop::collection::vec(pure_atom(), 1..=2)) {
        if entails(&gamma, &delta) {
            let mut more = gamma.clone();
            more.push(extra);
            if sat(&more) != Sat::Unsat {
                prop_assert!(entails(&more, &delta));
            }
        }
    }
}

#[test]
fn null_never_enters_arithmetic() {
    assert!(parse_formula("x::node<y> & null + 1 <= 0").is_err());
    assert!(parse_formula("x::node<y> & y < null").is_err());
    assert!(parse_formula("x::node<y> & y != null").is_ok());
}

//! Integer/pointer sort inference for variables.

use std::collections::HashMap;

use crate::ident::Ident;
use crate::program::{Decl, Program};
use crate::syntax::{Beta, PredKind, Sort, SymbolicHeap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarSort {
    Int,
    Ptr,
}

impl From<&Sort> for VarSort {
    fn from(s: &Sort) -> VarSort {
        if s.is_pointer() {
            VarSort::Ptr
        } else {
            VarSort::Int
        }
    }
}

/// Known sorts of each predicate's parameters, root included.
pub type ParamSorts = HashMap<String, Vec<Option<VarSort>>>;

pub fn param_sorts(p: &Program) -> ParamSorts {
    let mut table: ParamSorts = HashMap::new();
    for d in p.decls() {
        let entry = match d {
            Decl::Trait(t) if t.interface_only => continue,
            Decl::Trait(_) => vec![Some(VarSort::Ptr), Some(VarSort::Ptr)],
            Decl::Class(_) => vec![Some(VarSort::Ptr)],
            Decl::Pred(def) => match &def.kind {
                PredKind::Data(fields) => std::iter::once(Some(VarSort::Ptr))
                    .chain(fields.iter().map(|(s, _)| Some(VarSort::from(s))))
                    .collect(),
                _ => {
                    let mut v = vec![None; def.params.len()];
                    if let Some(first) = v.first_mut() {
                        *first = Some(VarSort::Ptr);
                    }
                    v
                }
            },
        };
        table.insert(d.name().to_string(), entry);
    }
    loop {
        let mut changed = false;
        for def in p.preds() {
            let mut heaps: Vec<SymbolicHeap> = def
                .body()
                .map(|b| b.disjuncts.clone())
                .unwrap_or_default();
            if let Some(inv) = &def.invariant {
                heaps.push(SymbolicHeap {
                    pure: inv.clone(),
                    ..Default::default()
                });
            }
            let current = table[&def.name].clone();
            let seed = def
                .params
                .iter()
                .cloned()
                .zip(current.iter().copied())
                .filter_map(|(v, s)| s.map(|s| (v, s)))
                .collect();
            let Ok(found) = infer(&table, &heaps, seed) else {
                continue;
            };
            let entry = table.get_mut(&def.name).expect("entry exists");
            for (slot, v) in entry.iter_mut().zip(&def.params) {
                if slot.is_none() {
                    if let Some(s) = found.get(v) {
                        *slot = Some(*s);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return table;
        }
    }
}

/// Infer sorts of the variables in `heaps`; `Err(v)` names a variable used
/// at both sorts.
pub fn infer(
    table: &ParamSorts,
    heaps: &[SymbolicHeap],
    seed: HashMap<Ident, VarSort>,
) -> Result<HashMap<Ident, VarSort>, Ident> {
    let mut sorts = seed;
    fn set(sorts: &mut HashMap<Ident, VarSort>, v: &Ident, s: VarSort, changed: &mut bool) -> Result<(), Ident> {
        if v.is_null() {
            return if s == VarSort::Ptr { Ok(()) } else { Err(v.clone()) };
        }
        match sorts.get(v) {
            Some(old) if *old != s => Err(v.clone()),
            Some(_) => Ok(()),
            None => {
                sorts.insert(v.clone(), s);
                *changed = true;
                Ok(())
            }
        }
    }
    loop {
        let mut changed = false;
        for h in heaps {
            for a in h.preds() {
                set(&mut sorts, &a.root, VarSort::Ptr, &mut changed)?;
                if let Some(ps) = table.get(&a.name) {
                    for (arg, s) in a.args.iter().zip(ps.iter().skip(1)) {
                        if let Some(s) = s {
                            set(&mut sorts, arg, *s, &mut changed)?;
                        }
                    }
                }
            }
            for atom in h.pure.atoms() {
                match &atom.beta {
                    Beta::NullEq(v) => set(&mut sorts, v, VarSort::Ptr, &mut changed)?,
                    Beta::Leq0(e) | Beta::Eq0(e) => {
                        for v in e.vars() {
                            set(&mut sorts, v, VarSort::Int, &mut changed)?;
                        }
                    }
                    Beta::VarEq(a, b) => {
                        if a.is_null() || b.is_null() {
                            continue;
                        }
                        if let Some(s) = sorts.get(a).copied() {
                            set(&mut sorts, b, s, &mut changed)?;
                        }
                        if let Some(s) = sorts.get(b).copied() {
                            set(&mut sorts, a, s, &mut changed)?;
                        }
                    }
                }
            }
        }
        if !changed {
            return Ok(sorts);
        }
    }
}

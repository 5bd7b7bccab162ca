//! Traits become abstract predicates `T<self, next>`; mixin classes become
//! defined predicates whose body is the chain of their concrete traits.

use std::collections::HashMap;

use crate::error::Error;
use crate::ident::Ident;
use crate::linearize::{linearize, linearize_type_expr, Linearization};
use crate::program::{Decl, Program};
use crate::syntax::{ClassDecl, Formula, PredDef, PredInst, PredKind, SymbolicHeap, TraitDecl, TypeExpr};

/// How the last link of a chain ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Terminal {
    #[default]
    Null,
    /// A fresh variable, so a shorter chain matches any longer one.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub owner: String,
    /// Base first.
    pub links: Vec<PredInst>,
    /// Linking variables, `links[i].args[0]` for all but a null-terminated
    /// last link.
    pub vars: Vec<Ident>,
}

impl Chain {
    pub fn names(&self) -> Vec<&str> {
        self.links.iter().map(|l| l.name.as_str()).collect()
    }

    /// The chain with its linking variables existentially bound.
    pub fn heap(&self) -> SymbolicHeap {
        SymbolicHeap {
            existentials: self.vars.clone(),
            ..SymbolicHeap::from_atoms(self.links.clone())
        }
    }

    pub fn formula(&self) -> Formula {
        Formula::single(self.heap())
    }
}

pub fn gen_trait_pred(t: &TraitDecl) -> Option<PredDef> {
    if t.interface_only {
        return None;
    }
    Some(PredDef::abstract_(
        t.name.clone(),
        vec![Ident::self_(), Ident::new("next")],
    ))
}

/// Build the chain `L1<root, v> * L2<v, v1> * … * Ln<vk, null>` over the
/// given link names.
pub fn chain_of(owner: &str, names: &[&str], root: Ident, base: &str, terminal: Terminal) -> Chain {
    let mut links = Vec::with_capacity(names.len());
    let mut vars = Vec::new();
    let mut cur = root;
    for (i, n) in names.iter().enumerate() {
        let last = i + 1 == names.len();
        let next = if last && terminal == Terminal::Null {
            Ident::null()
        } else {
            let v = Ident::fresh(base);
            vars.push(v.clone());
            v
        };
        links.push(PredInst::new(*n, cur, vec![next.clone()]));
        cur = next;
    }
    Chain {
        owner: owner.to_string(),
        links,
        vars,
    }
}

fn link_names<'p>(p: &'p Program, lin: &Linearization) -> Vec<&'p str> {
    let mut names: Vec<&str> = lin
        .ancestors()
        .iter()
        .filter_map(|n| match p.get(n) {
            Some(Decl::Trait(t)) if !t.interface_only => Some(t.name.as_str()),
            _ => None,
        })
        .collect();
    names.reverse();
    names
}

/// The chain of a type expression (or bare trait/class name), rooted at
/// `root`, with linking variables named after `base`.
pub fn gen_chain(p: &Program, t: &TypeExpr, root: Ident, base: &str, terminal: Terminal) -> Result<Chain, Error> {
    let lin = linearize_type_expr(p, t)?;
    let names = link_names(p, &lin);
    if names.is_empty() {
        return Err(Error::EmptyChain(t.to_string()));
    }
    Ok(chain_of(&t.to_string(), &names, root, base, terminal))
}

pub fn gen_mixin_pred(p: &Program, c: &ClassDecl) -> Result<PredDef, Error> {
    let lin = linearize(p, &c.name)?;
    let names = link_names(p, &lin);
    if names.is_empty() {
        return Err(Error::EmptyChain(c.name.clone()));
    }
    let chain = chain_of(&c.name, &names, Ident::self_(), "v", Terminal::Null);
    Ok(PredDef {
        name: c.name.clone(),
        params: vec![Ident::self_()],
        kind: PredKind::Defined(crate::subst::tidy(&chain.formula())),
        invariant: None,
    })
}

/// Every predicate a formula over the program may mention: declared ones
/// plus those generated from traits and classes.
#[derive(Debug, Clone, Default)]
pub struct PredTable {
    defs: HashMap<String, PredDef>,
    errors: HashMap<String, Error>,
    order: Vec<String>,
}

impl PredTable {
    pub fn new(p: &Program) -> PredTable {
        let mut t = PredTable::default();
        for d in p.decls() {
            let def = match d {
                Decl::Pred(def) => Ok(def.clone()),
                Decl::Trait(tr) => match gen_trait_pred(tr) {
                    Some(def) => Ok(def),
                    None => Err(Error::InterfaceOnly(tr.name.clone())),
                },
                Decl::Class(c) => gen_mixin_pred(p, c),
            };
            let name = d.name().to_string();
            match def {
                Ok(def) => {
                    t.defs.insert(name.clone(), def);
                }
                Err(e) => {
                    t.errors.insert(name.clone(), e);
                }
            }
            t.order.push(name);
        }
        t
    }

    pub fn get(&self, name: &str) -> Result<&PredDef, Error> {
        if let Some(d) = self.defs.get(name) {
            return Ok(d);
        }
        Err(self
            .errors
            .get(name)
            .cloned()
            .unwrap_or_else(|| Error::UnknownName(name.to_string())))
    }

    /// Predicates generated from traits and classes, in declaration order.
    pub fn generated<'a>(&'a self, p: &'a Program) -> impl Iterator<Item = &'a PredDef> + 'a {
        self.order
            .iter()
            .filter(move |n| !matches!(p.get(n), Some(Decl::Pred(_))))
            .filter_map(move |n| self.defs.get(n))
    }

    /// Checks that every atom of `f` names a known predicate with the right
    /// number of arguments.
    pub fn check_formula(&self, f: &Formula) -> Result<(), Error> {
        for d in &f.disjuncts {
            for a in d.preds() {
                let def = self.get(&a.name)?;
                if def.arity() != a.arity() {
                    return Err(Error::Arity {
                        name: a.name.clone(),
                        expected: def.arity() - 1,
                        found: a.args.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

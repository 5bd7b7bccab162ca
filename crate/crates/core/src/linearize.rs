//! Class linearization: `L(C) = C, L(Cn) ⊕ … ⊕ L(C1)` where `⊕` keeps the
//! last occurrence of every repeated name.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::program::{Decl, Program};
use crate::syntax::TypeExpr;

/// Owner name given to the anonymous class of a compound type.
pub const ANON: &str = "<anon>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Linearization {
    pub owner: String,
    /// Owner first, then most-derived to base.
    pub order: Vec<String>,
}

impl Linearization {
    /// Everything after the owner.
    pub fn ancestors(&self) -> &[String] {
        &self.order[1..]
    }
}

impl fmt::Display for Linearization {
    /// `C ← P1 ← P2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.order.join(" ← "))
    }
}

fn merge_keep_last(parts: Vec<Vec<String>>) -> Vec<String> {
    let all: Vec<String> = parts.into_iter().flatten().collect();
    let mut seen = HashSet::new();
    let mut out: Vec<String> = all
        .into_iter()
        .rev()
        .filter(|n| seen.insert(n.clone()))
        .collect();
    out.reverse();
    out
}

fn lin_rec(p: &Program, name: &str, active: &mut Vec<String>) -> Result<Vec<String>, Error> {
    let parents = match p.get(name) {
        None => return Err(Error::UnknownName(name.to_string())),
        Some(Decl::Pred(_)) => return Err(Error::NotAType(name.to_string())),
        Some(Decl::Trait(t)) => &t.parents,
        Some(Decl::Class(c)) => &c.parents,
    };
    if active.iter().any(|a| a == name) {
        return Err(Error::Cycle(name.to_string()));
    }
    active.push(name.to_string());
    let mut parts = Vec::with_capacity(parents.len());
    for parent in parents.iter().rev() {
        parts.push(lin_rec(p, parent, active)?);
    }
    active.pop();
    let mut order = vec![name.to_string()];
    order.extend(merge_keep_last(parts));
    Ok(order)
}

pub fn linearize(p: &Program, name: &str) -> Result<Linearization, Error> {
    Ok(Linearization {
        owner: name.to_string(),
        order: lin_rec(p, name, &mut Vec::new())?,
    })
}

/// Linearization of an anonymous class `extends base with mixed…`.
pub fn linearize_type_expr(p: &Program, t: &TypeExpr) -> Result<Linearization, Error> {
    let mut parts = Vec::new();
    for n in t.names().collect::<Vec<_>>().into_iter().rev() {
        parts.push(lin_rec(p, n, &mut Vec::new())?);
    }
    let mut order = vec![ANON.to_string()];
    order.extend(merge_keep_last(parts));
    Ok(Linearization {
        owner: ANON.to_string(),
        order,
    })
}

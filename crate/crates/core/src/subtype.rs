//! `C <: D` as the entailment `chain(C, this) ⊢ chain(D, this)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::entail::{check_entail_with, EntailOptions, EntailResult};
use crate::error::Error;
use crate::ident::Ident;
use crate::predgen::{gen_chain, PredTable, Terminal};
use crate::program::Program;
use crate::subst::tidy;
use crate::syntax::{Formula, TypeExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubtypeOptions {
    /// End the supertype chain in a fresh variable instead of `null`, so a
    /// prefix of the subtype's chain suffices.
    pub open_tail: bool,
    pub entail: EntailOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Holds {
    Yes,
    NotProven,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtypeVerdict {
    pub sub: TypeExpr,
    pub sup: TypeExpr,
    pub holds: Holds,
    /// The entailment that was checked.
    pub ante: Formula,
    pub conseq: Formula,
    pub result: EntailResult,
}

impl SubtypeVerdict {
    pub fn holds(&self) -> bool {
        self.holds == Holds::Yes
    }

    /// `X is SUPERTYPE of Y` / `X is NOT SUPERTYPE of Y`.
    pub fn report_line(&self) -> String {
        supertype_line(&self.sup, &self.sub, self.holds())
    }
}

pub fn supertype_line(sup: &TypeExpr, sub: &TypeExpr, holds: bool) -> String {
    let not = if holds { "" } else { "NOT " };
    format!("{} is {}SUPERTYPE of {}", sup, not, sub)
}

pub fn this() -> Ident {
    Ident::new("this")
}

pub fn is_subtype_with(
    p: &Program,
    table: &PredTable,
    sub: &TypeExpr,
    sup: &TypeExpr,
    opts: &SubtypeOptions,
) -> Result<SubtypeVerdict, Error> {
    let ante = gen_chain(p, sub, this(), "v", Terminal::Null)?;
    let terminal = if opts.open_tail { Terminal::Open } else { Terminal::Null };
    let conseq = gen_chain(p, sup, this(), "u", terminal)?;
    let (ante, conseq) = (tidy(&ante.formula()), tidy(&conseq.formula()));
    let result = check_entail_with(table, &ante, &conseq, &opts.entail)?;
    Ok(SubtypeVerdict {
        sub: sub.clone(),
        sup: sup.clone(),
        holds: if result.is_valid() { Holds::Yes } else { Holds::NotProven },
        ante,
        conseq,
        result,
    })
}

pub fn is_subtype(p: &Program, sub: &TypeExpr, sup: &TypeExpr, opts: &SubtypeOptions) -> Result<SubtypeVerdict, Error> {
    is_subtype_with(p, &PredTable::new(p), sub, sup, opts)
}

/// One verdict per `(sub, sup)` pair, in input order. Pairs are checked in
/// parallel.
pub fn supertype_report(
    p: &Program,
    pairs: &[(TypeExpr, TypeExpr)],
    opts: &SubtypeOptions,
) -> Vec<Result<SubtypeVerdict, Error>> {
    let table = PredTable::new(p);
    pairs
        .par_iter()
        .map(|(sub, sup)| is_subtype_with(p, &table, sub, sup, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn icell() -> Program {
        parse_program(
            "interface trait ICell.
             trait BICell extends ICell. trait Double extends ICell. trait Inc extends ICell.
             class OddICell extends BICell with Inc with Double.
             class EvenICell extends BICell with Double with Inc.",
        )
        .unwrap()
        .0
    }

    fn check(p: &Program, sub: &str, sup: &str, open_tail: bool) -> bool {
        let opts = SubtypeOptions {
            open_tail,
            ..Default::default()
        };
        let sub = crate::parser::parse_type_expr(sub).unwrap();
        let sup = crate::parser::parse_type_expr(sup).unwrap();
        is_subtype(p, &sub, &sup, &opts).unwrap().holds()
    }

    #[test]
    fn running_example() {
        let p = icell();
        assert!(check(&p, "OddICell", "BICell with Inc with Double", false));
        assert!(!check(&p, "EvenICell", "BICell with Inc with Double", false));
        assert!(!check(&p, "OddICell", "EvenICell", false));
        assert!(check(&p, "OddICell", "OddICell", false));
    }

    #[test]
    fn open_tail_accepts_prefixes() {
        let p = icell();
        assert!(!check(&p, "OddICell", "BICell with Inc", false));
        assert!(check(&p, "OddICell", "BICell with Inc", true));
        assert!(check(&p, "EvenICell", "BICell", true));
        assert!(!check(&p, "EvenICell", "BICell with Inc", true));
    }

    #[test]
    fn query_shape() {
        let p = icell();
        let v = is_subtype(
            &p,
            &TypeExpr::named("OddICell"),
            &TypeExpr::compound(&["BICell", "Inc", "Double"]),
            &SubtypeOptions::default(),
        )
        .unwrap();
        assert_eq!(v.ante.to_string(), "exists v, v1: this::BICell<v> * v::Inc<v1> * v1::Double<null>");
        assert_eq!(v.conseq.to_string(), "exists u, u1: this::BICell<u> * u::Inc<u1> * u1::Double<null>");
        assert_eq!(v.report_line(), "(BICell with Inc with Double) is SUPERTYPE of OddICell");
    }

    #[test]
    fn report_keeps_order_and_errors() {
        let p = icell();
        let pairs = vec![
            (TypeExpr::named("OddICell"), TypeExpr::named("OddICell")),
            (TypeExpr::named("ICell"), TypeExpr::named("OddICell")),
            (TypeExpr::named("EvenICell"), TypeExpr::named("OddICell")),
        ];
        let r = supertype_report(&p, &pairs, &SubtypeOptions::default());
        assert!(r[0].as_ref().unwrap().holds());
        assert!(matches!(r[1], Err(Error::EmptyChain(_))));
        assert!(!r[2].as_ref().unwrap().holds());
        assert!(supertype_report(&p, &[], &SubtypeOptions::default()).is_empty());
    }
}

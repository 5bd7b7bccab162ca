//! Subtyping between trait/mixin compositions, decided by separation-logic
//! entailment with frame inference.
//!
//! Each trait becomes an abstract two-place predicate `T<self, next>`; each
//! mixin becomes a chain of those predicates in base-first linearization
//! order, terminated by `null`. `C <: D` holds when `C`'s chain entails
//! `D`'s chain from a shared root.
//!
//! ```
//! use mixcheck::{parse_program, subtype::{is_subtype, SubtypeOptions}, TypeExpr};
//!
//! let (prog, _) = parse_program(
//!     "interface trait ICell.
//!      trait BICell extends ICell. trait Double extends ICell. trait Inc extends ICell.
//!      class OddICell extends BICell with Inc with Double.",
//! )
//! .unwrap();
//! let v = is_subtype(
//!     &prog,
//!     &TypeExpr::named("OddICell"),
//!     &TypeExpr::compound(&["BICell", "Inc", "Double"]),
//!     &SubtypeOptions::default(),
//! )
//! .unwrap();
//! assert!(v.holds());
//! ```

pub mod entail;
pub mod error;
pub mod ident;
pub mod linear;
pub mod linearize;
pub mod models;
pub mod parser;
pub mod predgen;
pub mod program;
pub mod pure;
pub mod run;
pub mod session;
pub mod sorts;
pub mod subst;
pub mod study;
pub mod subtype;
pub mod syntax;

pub use ident::Ident;
pub use parser::{parse_formula, parse_program, Command, CommandKind};
pub use program::{Decl, DiagKind, Diagnostic, Program, SourceSpan};
pub use syntax::{Formula, HeapAtom, PredDef, PredInst, PureAtom, PureFormula, SymbolicHeap, TypeExpr};

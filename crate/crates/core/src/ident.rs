//! Variable names with fresh-name generation.
//!
//! Surface variables carry id 0 and print as their bare name. Fresh
//! variables get a process-wide unique id and print as `name#id`, which the
//! lexer accepts back so printed formulas re-parse to the same identifiers.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Serialize, Serializer};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Name of the reserved null constant.
pub const NULL: &str = "null";
/// Name of the implicit root parameter of every predicate.
pub const SELF: &str = "self";
/// Name of the placeholder pattern that expands to a fresh existential.
pub const WILDCARD: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    name: String,
    id: u64,
}

impl Ident {
    /// A surface-level identifier (id 0).
    pub fn new(name: impl Into<String>) -> Ident {
        let name = name.into();
        debug_assert!(!name.is_empty(), "identifier names are non-empty");
        Ident { name, id: 0 }
    }

    /// An identifier with an explicit id, as produced by re-parsing a printed
    /// fresh name. Advances the global counter past `id` so later fresh names
    /// cannot collide with it.
    pub fn with_id(name: impl Into<String>, id: u64) -> Ident {
        if id > 0 {
            NEXT_ID.fetch_max(id + 1, Ordering::Relaxed);
        }
        Ident { name: name.into(), id }
    }

    pub fn fresh(base: &str) -> Ident {
        let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        Ident {
            name: base.to_string(),
            id,
        }
    }

    /// A fresh identifier that keeps this one's base name.
    pub fn refresh(&self) -> Ident {
        Ident::fresh(&self.name)
    }

    pub fn null() -> Ident {
        Ident::new(NULL)
    }

    pub fn self_() -> Ident {
        Ident::new(SELF)
    }

    pub fn is_null(&self) -> bool {
        self.id == 0 && self.name == NULL
    }

    pub fn is_fresh(&self) -> bool {
        self.id > 0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "{}#{}", self.name, self.id)
        }
    }
}

impl Serialize for Ident {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

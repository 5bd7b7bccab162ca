use thiserror::Error;

/// Failures of the semantic operations (linearization, chain generation,
/// entailment setup). Parse problems are `Diagnostic`s instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` is not a trait or class")]
    NotAType(String),
    #[error("`{0}` is interface-only and has no predicate")]
    InterfaceOnly(String),
    #[error("`{0}` has no concrete trait in its linearization, so its chain is empty")]
    EmptyChain(String),
    #[error("`{name}` takes {expected} argument(s) after the root, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("inheritance cycle through `{0}`")]
    Cycle(String),
}

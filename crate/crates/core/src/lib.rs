//! Compiler from Bayesian networks in plate notation to well-formed
//! entity-relationship models.
//!
//! The pipeline has three stages:
//!
//! 1. [`atomicize`] turns a validated [`PlateModel`] into an
//!    [`AtomicPlateModel`]: every variable becomes a scalar atom carrying the
//!    set of plates it lives in, and all edges are dropped.
//! 2. [`translate`] maps plates to entity types, plate intersections to
//!    association entities and atoms to attributes, then adjusts links for
//!    nested plates and one-hot constraints.
//! 3. [`reduce`] merges association entities that no longer extend their
//!    owner's key and collapses duplicate relationships the user declared
//!    equivalent.
//!
//! The [`emit`] module renders each stage as canonical JSON, Graphviz DOT,
//! Mermaid, or ANSI SQL DDL.

pub mod apm;
pub mod ast;
pub mod diag;
pub mod emit;
pub mod erm;
pub mod error;
pub mod parse;
pub mod pipeline;
pub mod reduce;
pub mod translate;
pub mod validate;

pub use apm::{atomicize, membership_closure, Atom, AtomicPlateModel, Plate};
pub use ast::{Domain, Location, PlateModel, VarKind};
pub use diag::{Diagnostic, Severity, ValidationReport};
pub use erm::{Cardinality, ERModel, Stage};
pub use error::{EmitError, ParseError, ReduceError, TranslateError};
pub use parse::parse;
pub use reduce::{check_wellformed, reduce, EquivalenceHints, Reduction};
pub use translate::translate;
pub use validate::validate;

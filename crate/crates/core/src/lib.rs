//! Structural quantifiers over finite structures.

pub mod axiomatize;
pub mod class;
pub mod closure;
pub mod corpus;
pub mod enumerate;
pub mod error;
pub mod iso;
pub mod parse;
pub mod print;
pub mod report;
pub mod semantics;
pub mod sexp;
pub mod structure;
pub mod syntax;
pub mod translate;
mod util;

pub use error::{Error, Result};
pub use structure::{DecoratedStructure, Elem, Structure, Symbol, Vocabulary};
pub use syntax::{Formula, Fragment, Kappa, QStruct, Term, Theory};

//! The `.xfo` modeling language: lexing, parsing, printing and compilation
//! into a [`Registry`](crate::ontology::Registry) plus world definitions.

pub mod ast;
mod compile;
pub mod diagnostic;
mod expand;
pub mod lexer;
mod load;
pub mod parser;
mod printer;

pub use compile::{
    compile, compile_sources, ArtifactRef, ClaimDef, Compiled, EvidenceDef, ModuleInfo, RuleDef, WorldDef,
    WorldItemDef, DEFAULT_FACET,
};
pub use diagnostic::{format_diagnostics, has_errors, Diagnostic, Severity, Span};
pub use expand::{expand_activity_family, ActivityFamily, ExpandError, PARTICIPATES_IN, PERSON};
pub use load::{load_files, module_name, LoadError};
pub use parser::parse_module;
pub use printer::{print_module, quote};

//! A small intensional Martin-Löf type theory with a bidirectional checker,
//! normalization by evaluation, and a surface language for proof files.

pub mod cli;
pub mod corpus;
pub mod diagnostic;
pub mod kernel;
pub mod nbe;
pub mod parser;
pub mod prelude;
pub mod report;
pub mod syntax;
pub mod session;

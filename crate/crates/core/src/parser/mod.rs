//! Surface language: lexing, parsing, scope resolution and printing.

pub mod grammar;
pub mod lexer;
pub mod print;
pub mod resolve;

pub use grammar::{parse_expr, parse_module, DeclKind, Expr, ExprKind, SurfaceDecl};
pub use print::Printer;
pub use resolve::{resolve_all, resolve_decl, Resolver};

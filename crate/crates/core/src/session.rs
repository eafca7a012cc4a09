//! Elaborating source files into a checked module.

use std::path::Path;

use crate::diagnostic::Diagnostic;
use crate::kernel::{check_declaration, CheckedModule, ResolvedDecl};
use crate::parser::{parse_module, resolve_decl};

/// Outcome of checking one file.
#[derive(Clone, Debug)]
pub struct FileOutcome {
    /// Names declared by the file, in order, up to the first error.
    pub declared: Vec<String>,
    pub postulates: usize,
    pub error: Option<Diagnostic>,
}

impl FileOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

/// Check `source` declaration by declaration into `module`. Declarations
/// before the first error stay in the module.
pub fn check_source(module: &mut CheckedModule, source: &str, file: &str) -> FileOutcome {
    let mut outcome = FileOutcome {
        declared: Vec::new(),
        postulates: 0,
        error: None,
    };
    let decls = match parse_module(source, file) {
        Ok(d) => d,
        Err(e) => {
            outcome.error = Some(e);
            return outcome;
        }
    };
    for decl in &decls {
        let resolved = match resolve_decl(decl, &|n| module.contains(n)) {
            Ok(r) => r,
            Err(e) => {
                outcome.error = Some(e);
                return outcome;
            }
        };
        if let Err(e) = check_declaration(module, &resolved) {
            outcome.error = Some(e);
            return outcome;
        }
        if resolved.body.is_none() {
            outcome.postulates += 1;
        }
        outcome.declared.push(decl.name.clone());
    }
    outcome
}

/// Read and check a file; IO failures are returned separately from
/// checking failures.
pub fn check_file(module: &mut CheckedModule, path: &Path) -> std::io::Result<FileOutcome> {
    let source = std::fs::read_to_string(path)?;
    Ok(check_source(module, &source, &path.display().to_string()))
}

/// Parse and resolve a file without type checking, against the globals
/// accepted by `is_global` plus the file's own earlier declarations.
pub fn resolve_source(
    source: &str,
    file: &str,
    is_global: &dyn Fn(&str) -> bool,
) -> Result<Vec<ResolvedDecl>, Diagnostic> {
    let decls = parse_module(source, file)?;
    crate::parser::resolve_all(&decls, is_global)
}

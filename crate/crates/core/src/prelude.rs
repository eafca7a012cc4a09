//! The prelude: library files checked before any user or corpus file.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Deserialize;
use thiserror::Error;

use crate::kernel::CheckedModule;
use crate::report::FileRecord;
use crate::session::check_source;
use crate::syntax::Name;

/// The shipped prelude, compiled into the binary.
pub const EMBEDDED_MANIFEST: &str = include_str!("../../../prelude/MANIFEST.tsv");
pub const EMBEDDED_FILES: &[(&str, &str)] = &[
    ("paths.hct", include_str!("../../../prelude/paths.hct")),
    ("logic.hct", include_str!("../../../prelude/logic.hct")),
    ("equiv.hct", include_str!("../../../prelude/equiv.hct")),
    ("hedberg.hct", include_str!("../../../prelude/hedberg.hct")),
    ("axioms.hct", include_str!("../../../prelude/axioms.hct")),
];

#[derive(Debug, Error)]
pub enum PreludeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("prelude manifest: {0}")]
    Manifest(#[from] csv::Error),
    #[error("prelude manifest names `{0}`, which is not shipped")]
    UnknownFile(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Ordinary definitions.
    Library,
    /// Axiom shapes: type definitions that theorems take as hypotheses.
    Axioms,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PreludeFile {
    pub file: String,
    pub role: Role,
    pub description: String,
}

/// Prelude files in dependency order.
#[derive(Clone, Debug)]
pub struct PreludeManifest {
    pub files: Vec<PreludeFile>,
}

impl PreludeManifest {
    pub fn parse(text: &str) -> Result<PreludeManifest, PreludeError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .from_reader(text.as_bytes());
        let files = reader.deserialize().collect::<Result<Vec<PreludeFile>, _>>()?;
        Ok(PreludeManifest { files })
    }
}

/// Where prelude sources come from.
#[derive(Clone, Debug)]
pub enum PreludeSource {
    Embedded,
    Dir(PathBuf),
}

impl PreludeSource {
    /// `(display path, role, source text)` for each file in manifest order.
    fn load(&self) -> Result<Vec<(String, Role, String)>, PreludeError> {
        match self {
            PreludeSource::Embedded => {
                let manifest = PreludeManifest::parse(EMBEDDED_MANIFEST)?;
                manifest
                    .files
                    .into_iter()
                    .map(|f| {
                        let text = EMBEDDED_FILES
                            .iter()
                            .find(|(n, _)| *n == f.file)
                            .map(|(_, t)| t.to_string())
                            .ok_or_else(|| PreludeError::UnknownFile(f.file.clone()))?;
                        Ok((format!("prelude/{}", f.file), f.role, text))
                    })
                    .collect()
            }
            PreludeSource::Dir(dir) => {
                let manifest = PreludeManifest::parse(&read(&dir.join("MANIFEST.tsv"))?)?;
                manifest
                    .files
                    .into_iter()
                    .map(|f| {
                        let path = dir.join(&f.file);
                        Ok((path.display().to_string(), f.role, read(&path)?))
                    })
                    .collect()
            }
        }
    }
}

fn read(path: &Path) -> Result<String, PreludeError> {
    std::fs::read_to_string(path).map_err(|source| PreludeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A checked prelude.
#[derive(Debug)]
pub struct Prelude {
    pub module: Arc<CheckedModule>,
    pub records: Vec<FileRecord>,
    /// Names declared by axiom-shape files, in declaration order.
    pub axiom_shapes: Vec<Name>,
}

impl Prelude {
    /// Check the prelude files strictly in order. Checking stops at the
    /// first failing file since later files depend on it.
    pub fn check(source: &PreludeSource) -> Result<Prelude, PreludeError> {
        let mut module = CheckedModule::new();
        let mut records = Vec::new();
        let mut axiom_shapes = Vec::new();
        for (path, role, text) in source.load()? {
            let start = Instant::now();
            let outcome = check_source(&mut module, &text, &path);
            let passed = outcome.passed();
            if role == Role::Axioms {
                axiom_shapes.extend(outcome.declared.iter().map(|n| Name::from(n.as_str())));
            }
            records.push(FileRecord::from_outcome(path, &outcome, start.elapsed()));
            if !passed {
                break;
            }
        }
        Ok(Prelude {
            module: Arc::new(module),
            records,
            axiom_shapes,
        })
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed())
    }

    pub fn postulates(&self) -> usize {
        self.records.iter().map(|r| r.postulates).sum()
    }
}

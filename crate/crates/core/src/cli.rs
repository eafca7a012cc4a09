//! Command-line driver. Exit codes: 0 success, 1 verification failure,
//! 2 usage, IO or manifest error.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::corpus::{self, CorpusOptions, Manifest};
use crate::kernel::{check_closed, infer_closed, CheckedModule};
use crate::parser::{parse_expr, Printer, Resolver};
use crate::prelude::{Prelude, PreludeSource};
use crate::report::{FileRecord, RunReport};
use crate::session::check_source;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hct", version, about = "Type checker for .hct proof files")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check files in order into one growing scope.
    Check {
        files: Vec<PathBuf>,
        /// Load the bundled prelude first.
        #[arg(long)]
        prelude: bool,
        /// Emit the run report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Print the normal form of a global or an expression.
    Normalize {
        /// A global name or an expression.
        term: String,
        /// Files to load before normalizing.
        files: Vec<PathBuf>,
        /// Load the bundled prelude first.
        #[arg(long)]
        prelude: bool,
        /// Check the expression against this type instead of inferring one.
        #[arg(long)]
        at: Option<String>,
        /// Also print the normalized type.
        #[arg(long = "type")]
        show_type: bool,
    },
    /// Check the prelude, the corpus and the negative suite per the manifest.
    Corpus {
        #[arg(long, default_value = "corpus/MANIFEST.tsv")]
        manifest: PathBuf,
        /// Prelude directory; defaults to the one beside the corpus.
        #[arg(long = "prelude-dir")]
        prelude_dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Check independent files concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Run a parsed command line, writing to the given streams.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Check { files, prelude, json } => cmd_check(&files, prelude, json, out, err),
        Command::Normalize {
            term,
            files,
            prelude,
            at,
            show_type,
        } => cmd_normalize(&term, &files, prelude, at.as_deref(), show_type, out, err),
        Command::Corpus {
            manifest,
            prelude_dir,
            json,
            jobs,
        } => cmd_corpus(&manifest, prelude_dir, json, jobs, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_USAGE
    })
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn base_module(prelude: bool) -> Result<(CheckedModule, Vec<FileRecord>), Box<dyn std::error::Error>> {
    if !prelude {
        return Ok((CheckedModule::new(), Vec::new()));
    }
    let p = Prelude::check(&PreludeSource::Embedded)?;
    let module = (*p.module).clone();
    Ok((module, p.records))
}

/// Read every file first so that IO errors surface before any checking.
fn read_all(files: &[PathBuf]) -> Result<Vec<(String, String)>, Box<dyn std::error::Error>> {
    files
        .iter()
        .map(|f| {
            std::fs::read_to_string(f)
                .map(|t| (f.display().to_string(), t))
                .map_err(|e| format!("{}: {e}", f.display()).into())
        })
        .collect()
}

fn load(
    module: &mut CheckedModule,
    sources: &[(String, String)],
    records: &mut Vec<FileRecord>,
    err: &mut dyn Write,
) -> std::io::Result<()> {
    for (name, text) in sources {
        let start = Instant::now();
        let outcome = check_source(module, text, name);
        if let Some(d) = &outcome.error {
            writeln!(err, "{d}")?;
        }
        records.push(FileRecord::from_outcome(name.clone(), &outcome, start.elapsed()));
    }
    Ok(())
}

fn cmd_check(files: &[PathBuf], prelude: bool, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let sources = read_all(files)?;
    let (mut module, mut records) = base_module(prelude)?;
    load(&mut module, &sources, &mut records, err)?;
    let report = RunReport {
        files: records,
        ..RunReport::default()
    }
    .finish();
    emit(&report, json, out)?;
    Ok(report.exit_code)
}

fn emit(report: &RunReport, json: bool, out: &mut dyn Write) -> std::io::Result<()> {
    if json {
        serde_json::to_writer_pretty(&mut *out, report)?;
        writeln!(out)
    } else {
        write!(out, "{}", report.render(true))
    }
}

fn cmd_normalize(
    term: &str,
    files: &[PathBuf],
    prelude: bool,
    at: Option<&str>,
    show_type: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let sources = read_all(files)?;
    let (mut module, mut records) = base_module(prelude)?;
    load(&mut module, &sources, &mut records, err)?;
    if records.iter().any(|r| !r.passed()) {
        return Ok(EXIT_FAIL);
    }
    let resolve = |src: &str| -> Result<_, crate::diagnostic::Diagnostic> {
        let e = parse_expr(src, "<input>")?;
        Resolver::new(&|n| module.contains(n)).expr(&e)
    };
    let tm = match resolve(term) {
        Ok(t) => t,
        Err(d) => {
            writeln!(err, "{d}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let ty = match at {
        Some(src) => {
            let ty = match resolve(src) {
                Ok(t) => t,
                Err(d) => {
                    writeln!(err, "{d}")?;
                    return Ok(EXIT_USAGE);
                }
            };
            if let Err(e) = check_closed(&module, &tm, &ty) {
                writeln!(err, "{}", e.into_diagnostic(crate::syntax::SourceSpan::point("<input>".into(), 1, 1)))?;
                return Ok(EXIT_FAIL);
            }
            ty
        }
        None => match infer_closed(&module, &tm) {
            Ok(t) => t,
            Err(e) => {
                writeln!(err, "{}", e.into_diagnostic(crate::syntax::SourceSpan::point("<input>".into(), 1, 1)))?;
                return Ok(EXIT_FAIL);
            }
        },
    };
    let printer = Printer::new(&module);
    writeln!(out, "{}", printer.term(&module.normalize(&tm, &ty), &[]))?;
    if show_type {
        writeln!(out, "  : {}", printer.term(&module.normalize_type(&ty), &[]))?;
    }
    Ok(EXIT_OK)
}

fn cmd_corpus(
    manifest: &std::path::Path,
    prelude_dir: Option<PathBuf>,
    json: bool,
    jobs: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let manifest = Manifest::read(manifest)?;
    let prelude = prelude_dir.map_or_else(|| manifest.default_prelude(), PreludeSource::Dir);
    let report = corpus::run(&manifest, &CorpusOptions { jobs, prelude })?;
    for f in &report.files {
        for d in &f.diagnostics {
            writeln!(err, "{d}")?;
        }
    }
    emit(&report, json, out)?;
    Ok(report.exit_code)
}

//! The proof corpus: manifest parsing, dependency scheduling, checking and
//! per-entry verification of theorem names, axiom hypotheses and postulates.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

use crate::diagnostic::Category;
use crate::kernel::CheckedModule;
use crate::parser::{parse_module, resolve_all};
use crate::prelude::{Prelude, PreludeError, PreludeSource};
use crate::report::{EntryRecord, FileRecord, NegativeRecord, RunReport, Status};
use crate::session::{check_source, FileOutcome};
use crate::syntax::Name;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Row { path: PathBuf, line: usize, message: String },
    #[error("MissingEntry: manifest names `{0}`, which does not exist")]
    MissingEntry(String),
    #[error("dependency cycle among {0}")]
    Cycle(String),
    #[error(transparent)]
    Prelude(#[from] PreludeError),
}

#[derive(Debug, Deserialize)]
struct RawRow {
    #[serde(rename = "result-id")]
    result_id: String,
    file: String,
    #[serde(rename = "theorem-names")]
    theorems: String,
    #[serde(rename = "required-axioms")]
    axioms: String,
}

/// One manifest row. A row without theorems is a support file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub result_id: String,
    /// Path relative to the corpus directory.
    pub file: String,
    pub theorems: Vec<String>,
    pub required_axioms: Vec<String>,
}

impl CorpusEntry {
    pub fn is_support(&self) -> bool {
        self.theorems.is_empty()
    }
}

/// Split a comma list where `-` and `none` denote the empty list.
fn list(field: &str) -> Vec<String> {
    match field.trim() {
        "" | "-" | "none" => Vec::new(),
        s => s.split(',').map(|x| x.trim().to_string()).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub corpus_dir: PathBuf,
    pub entries: Vec<CorpusEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Manifest::parse(&text, path, dir)
    }

    pub fn parse(text: &str, path: &Path, corpus_dir: PathBuf) -> Result<Manifest, CorpusError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .from_reader(text.as_bytes());
        let mut entries: Vec<CorpusEntry> = Vec::new();
        for (i, row) in reader.deserialize::<RawRow>().enumerate() {
            let row = row.map_err(|source| CorpusError::Format {
                path: path.to_path_buf(),
                source,
            })?;
            let line = i + 2;
            if entries.iter().any(|e| e.result_id == row.result_id) {
                return Err(CorpusError::Row {
                    path: path.to_path_buf(),
                    line,
                    message: format!("duplicate result-id `{}`", row.result_id),
                });
            }
            if row.file.trim().is_empty() {
                return Err(CorpusError::Row {
                    path: path.to_path_buf(),
                    line,
                    message: "empty file column".into(),
                });
            }
            entries.push(CorpusEntry {
                result_id: row.result_id,
                file: row.file.trim().to_string(),
                theorems: list(&row.theorems),
                required_axioms: list(&row.axioms),
            });
        }
        Ok(Manifest { corpus_dir, entries })
    }

    /// Distinct files in first-mention order.
    pub fn files(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.file) {
                out.push(e.file.clone());
            }
        }
        out
    }

    /// The prelude beside the corpus directory when present, else the
    /// embedded one.
    pub fn default_prelude(&self) -> PreludeSource {
        let dir = match self.corpus_dir.parent() {
            Some(parent) => parent.join("prelude"),
            None => PathBuf::from("../prelude"),
        };
        if dir.join("MANIFEST.tsv").is_file() {
            PreludeSource::Dir(dir)
        } else {
            PreludeSource::Embedded
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusOptions {
    pub jobs: usize,
    pub prelude: PreludeSource,
}

/// Waves of file indices, and each file's prerequisites.
pub type WavePlan = (Vec<Vec<usize>>, Vec<BTreeSet<usize>>);

/// Per-file records, per-file outcomes, and the extended module.
pub type CheckedFiles = (Vec<FileRecord>, Vec<Option<FileOutcome>>, CheckedModule);

/// Group files into waves: every file's prerequisites lie in earlier waves.
/// A prerequisite is a file defining a global that another file references
/// and that `ambient` does not already provide.
pub fn plan_waves(
    sources: &[(String, String)],
    ambient: &dyn Fn(&str) -> bool,
) -> Result<WavePlan, CorpusError> {
    let parsed: Vec<_> = sources
        .iter()
        .map(|(name, text)| parse_module(text, name).ok())
        .collect();
    let mut defined_by: HashMap<&str, usize> = HashMap::new();
    for (i, decls) in parsed.iter().enumerate() {
        for d in decls.iter().flatten() {
            defined_by.entry(d.name.as_str()).or_insert(i);
        }
    }
    let deps: Vec<BTreeSet<usize>> = parsed
        .iter()
        .enumerate()
        .map(|(i, decls)| {
            let mut out = BTreeSet::new();
            let Some(decls) = decls else { return out };
            let Ok(resolved) = resolve_all(decls, &|_| true) else { return out };
            for d in &resolved {
                let mut globals = d.ty.globals();
                if let Some(b) = &d.body {
                    globals.extend(b.globals());
                }
                for g in globals {
                    if ambient(&g) {
                        continue;
                    }
                    if let Some(&j) = defined_by.get(&*g) {
                        if j != i {
                            out.insert(j);
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut done = vec![false; sources.len()];
    let mut waves = Vec::new();
    while done.iter().any(|d| !d) {
        let wave: Vec<usize> = (0..sources.len())
            .filter(|&i| !done[i] && deps[i].iter().all(|&j| done[j]))
            .collect();
        if wave.is_empty() {
            let stuck: Vec<&str> = (0..sources.len())
                .filter(|&i| !done[i])
                .map(|i| sources[i].0.as_str())
                .collect();
            return Err(CorpusError::Cycle(stuck.join(", ")));
        }
        for &i in &wave {
            done[i] = true;
        }
        waves.push(wave);
    }
    Ok((waves, deps))
}

/// Runs file checks sequentially or on a dedicated thread pool.
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(jobs: usize) -> Executor {
        #[cfg(feature = "parallel")]
        {
            let pool = (jobs > 1).then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .expect("thread pool")
            });
            Executor { pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = jobs;
            Executor {}
        }
    }

    pub fn map<T, F>(&self, items: &[usize], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(|&i| f(i)).collect());
        }
        items.iter().map(|&i| f(i)).collect()
    }
}

struct Checked {
    layer: CheckedModule,
    outcome: FileOutcome,
    elapsed: Duration,
}

/// Check `sources` over `base` wave by wave. Returns one record per source
/// in input order, the outcomes of the files that were checked, and the
/// module extended with every passing file.
pub fn check_files(
    base: CheckedModule,
    sources: &[(String, String)],
    jobs: usize,
) -> Result<CheckedFiles, CorpusError> {
    let (waves, deps) = plan_waves(sources, &|n| base.contains(n))?;
    let executor = Executor::new(jobs);
    let mut records: Vec<Option<FileRecord>> = vec![None; sources.len()];
    let mut outcomes: Vec<Option<FileOutcome>> = vec![None; sources.len()];
    let mut failed = vec![false; sources.len()];
    let mut base = base;
    for wave in waves {
        let (ready, blocked): (Vec<usize>, Vec<usize>) = wave
            .into_iter()
            .partition(|&i| deps[i].iter().all(|&j| !failed[j]));
        for i in blocked {
            let culprit = deps[i].iter().find(|&&j| failed[j]).copied().unwrap_or(i);
            records[i] = Some(FileRecord::skipped(
                sources[i].0.clone(),
                format!("not checked: depends on failing {}", sources[culprit].0),
            ));
            failed[i] = true;
        }
        let shared = Arc::new(base);
        let results = executor.map(&ready, |i| {
            let mut layer = CheckedModule::layered(shared.clone());
            let start = Instant::now();
            let outcome = check_source(&mut layer, &sources[i].1, &sources[i].0);
            Checked {
                layer: layer.detach(),
                outcome,
                elapsed: start.elapsed(),
            }
        });
        base = Arc::try_unwrap(shared).unwrap_or_else(|a| (*a).clone());
        for (i, r) in ready.into_iter().zip(results) {
            records[i] = Some(FileRecord::from_outcome(sources[i].0.clone(), &r.outcome, r.elapsed));
            if r.outcome.passed() {
                base.absorb(r.layer);
            } else {
                failed[i] = true;
            }
            outcomes[i] = Some(r.outcome);
        }
    }
    let records = records.into_iter().map(|r| r.expect("every file scheduled")).collect();
    Ok((records, outcomes, base))
}

/// Expected rejection category from a `-- expect: Category` line.
pub fn expected_category(source: &str) -> Option<Category> {
    source.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("--")?.trim().strip_prefix("expect:")?;
        Category::parse(rest.trim())
    })
}

/// Check each negative file against the prelude alone.
pub fn check_negatives(prelude: &Arc<CheckedModule>, files: &[(String, String)]) -> Vec<NegativeRecord> {
    files
        .iter()
        .map(|(name, text)| {
            let expected = expected_category(text);
            let mut layer = CheckedModule::layered(prelude.clone());
            let outcome = check_source(&mut layer, text, name);
            let actual = outcome.error.as_ref().map(|d| d.category);
            NegativeRecord {
                file: name.clone(),
                expected,
                actual,
                status: Status::of(expected.is_some() && expected == actual),
                diagnostic: outcome.error,
            }
        })
        .collect()
}

/// Verify every manifest row against the checked files.
pub fn verify_manifest(
    manifest: &Manifest,
    files: &[String],
    outcomes: &[Option<FileOutcome>],
    module: &CheckedModule,
    axiom_shapes: &[Name],
) -> Vec<EntryRecord> {
    manifest
        .entries
        .iter()
        .map(|entry| {
            let mut problems = Vec::new();
            let idx = files.iter().position(|f| *f == entry.file);
            let outcome = idx.and_then(|i| outcomes[i].as_ref());
            let postulates = outcome.map_or(0, |o| o.postulates);
            let mut found: BTreeSet<usize> = BTreeSet::new();
            match outcome {
                Some(o) if o.passed() => {
                    for t in &entry.theorems {
                        if !o.declared.iter().any(|d| d == t) {
                            problems.push(format!("MissingTheorem: `{t}` is not declared in {}", entry.file));
                            continue;
                        }
                        let Some(e) = module.get(t) else { continue };
                        for g in e.ty_term.globals() {
                            if let Some(k) = axiom_shapes.iter().position(|a| *a == g) {
                                found.insert(k);
                            }
                        }
                    }
                }
                _ => problems.push(format!("{} did not check", entry.file)),
            }
            let found: Vec<String> = found.into_iter().map(|k| axiom_shapes[k].to_string()).collect();
            if !entry.is_support() && problems.is_empty() {
                let want: BTreeSet<&str> = entry.required_axioms.iter().map(String::as_str).collect();
                let have: BTreeSet<&str> = found.iter().map(String::as_str).collect();
                if want != have {
                    problems.push(format!(
                        "AxiomDrift: stated types use [{}], manifest requires [{}]",
                        found.join(","),
                        entry.required_axioms.join(",")
                    ));
                }
            }
            if postulates > 0 {
                problems.push(format!("AxiomDrift: {} declares {postulates} postulate(s)", entry.file));
            }
            EntryRecord {
                result_id: entry.result_id.clone(),
                file: entry.file.clone(),
                theorems: entry.theorems.clone(),
                required_axioms: entry.required_axioms.clone(),
                found_axioms: found,
                postulates,
                status: Status::of(problems.is_empty()),
                problems,
            }
        })
        .collect()
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Negative files under `<corpus>/neg`, sorted by name.
fn negative_sources(corpus_dir: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let dir = corpus_dir.join("neg");
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|source| CorpusError::Io {
            path: dir.clone(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "hct"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Ok((p.display().to_string(), read(&p)?)))
        .collect()
}

/// Check the prelude, then the corpus, then the negative suite, and verify
/// the manifest.
pub fn run(manifest: &Manifest, options: &CorpusOptions) -> Result<RunReport, CorpusError> {
    let files = manifest.files();
    for f in &files {
        if !manifest.corpus_dir.join(f).is_file() {
            return Err(CorpusError::MissingEntry(f.clone()));
        }
    }
    let sources = files
        .iter()
        .map(|f| {
            let path = manifest.corpus_dir.join(f);
            Ok((path.display().to_string(), read(&path)?))
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    let negatives = negative_sources(&manifest.corpus_dir)?;

    let prelude = Prelude::check(&options.prelude)?;
    let mut report = RunReport {
        files: prelude.records.clone(),
        ..RunReport::default()
    };
    if !prelude.passed() {
        report.entries = verify_manifest(manifest, &files, &vec![None; files.len()], &prelude.module, &[]);
        return Ok(report.finish());
    }
    let base = (*prelude.module).clone();
    let (records, outcomes, module) = check_files(base, &sources, options.jobs.max(1))?;
    report.files.extend(records);
    report.entries = verify_manifest(manifest, &files, &outcomes, &module, &prelude.axiom_shapes);
    report.negatives = check_negatives(&prelude.module, &negatives);
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(name: &str, text: &str) -> (String, String) {
        (name.to_string(), text.to_string())
    }

    #[test]
    fn manifest_lists_split_on_commas() {
        let text = "result-id\tfile\ttheorem-names\trequired-axioms\n\
                    a\tx.hct\tp,q\tFunext,PropExt\n\
                    s\ty.hct\t-\tnone\n";
        let m = Manifest::parse(text, Path::new("M.tsv"), PathBuf::new()).unwrap();
        assert_eq!(m.entries[0].theorems, ["p", "q"]);
        assert_eq!(m.entries[0].required_axioms, ["Funext", "PropExt"]);
        assert!(m.entries[1].is_support());
        assert!(m.entries[1].required_axioms.is_empty());
    }

    #[test]
    fn duplicate_result_ids_are_rejected() {
        let text = "result-id\tfile\ttheorem-names\trequired-axioms\na\tx.hct\tp\tnone\na\ty.hct\tq\tnone\n";
        let err = Manifest::parse(text, Path::new("M.tsv"), PathBuf::new()).unwrap_err();
        assert!(matches!(err, CorpusError::Row { line: 3, .. }), "{err}");
    }

    #[test]
    fn waves_follow_references() {
        let s = [
            src("c", "def c : Bool := b;"),
            src("a", "def a : Bool := true;"),
            src("b", "def b : Bool := a;"),
            src("d", "def d : Bool := a;"),
        ];
        let (waves, deps) = plan_waves(&s, &|_| false).unwrap();
        assert_eq!(waves, vec![vec![1], vec![2, 3], vec![0]]);
        assert_eq!(deps[0], BTreeSet::from([2]));
    }

    #[test]
    fn bound_variables_are_not_dependencies() {
        let s = [
            src("a", "def a : Bool -> Bool := fun b => b;"),
            src("b", "def b : Bool := true;"),
        ];
        let (waves, _) = plan_waves(&s, &|_| false).unwrap();
        assert_eq!(waves, vec![vec![0, 1]]);
    }

    #[test]
    fn cycles_are_reported() {
        let s = [src("a", "def a : Bool := b;"), src("b", "def b : Bool := a;")];
        assert!(matches!(plan_waves(&s, &|_| false), Err(CorpusError::Cycle(_))));
    }

    #[test]
    fn dependents_of_a_failing_file_are_skipped() {
        let s = [
            src("a", "def a : Bool := zero;"),
            src("b", "def b : Bool := a;"),
            src("c", "def c : Bool := true;"),
        ];
        let (records, outcomes, module) = check_files(CheckedModule::new(), &s, 1).unwrap();
        assert_eq!(records[0].status, Status::Fail);
        assert_eq!(records[1].status, Status::Fail);
        assert!(records[1].note.as_deref().unwrap().contains("a"));
        assert!(outcomes[1].is_none());
        assert!(records[2].passed());
        assert!(module.contains("c") && !module.contains("a"));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let s: Vec<_> = (0..8)
            .map(|i| src(&format!("f{i}"), &format!("def v{i} : Bool -> Bool := fun x => x;")))
            .collect();
        let (seq, _, m1) = check_files(CheckedModule::new(), &s, 1).unwrap();
        let (par, _, m2) = check_files(CheckedModule::new(), &s, 4).unwrap();
        let names = |m: &CheckedModule| m.entries().iter().map(|e| e.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(&m1), names(&m2));
        assert!(seq.iter().zip(&par).all(|(a, b)| a.file == b.file && a.status == b.status));
    }

    #[test]
    fn expectation_comment_is_read() {
        assert_eq!(
            expected_category("-- expect: TypeMismatch\ndef x : Bool := zero;"),
            Some(Category::TypeMismatch)
        );
        assert_eq!(expected_category("def x : Bool := true;"), None);
    }

    #[test]
    fn axiom_drift_is_detected() {
        let mut m = CheckedModule::new();
        let src = "def Ax : U1 := (A : U0) -> A -> A; def thm : Ax -> Bool := fun h => true;";
        let outcome = check_source(&mut m, src, "x.hct");
        let manifest = Manifest {
            corpus_dir: PathBuf::new(),
            entries: vec![CorpusEntry {
                result_id: "r".into(),
                file: "x.hct".into(),
                theorems: vec!["thm".into()],
                required_axioms: vec![],
            }],
        };
        let shapes = vec![Name::from("Ax")];
        let rec = verify_manifest(&manifest, &["x.hct".into()], &[Some(outcome)], &m, &shapes);
        assert_eq!(rec[0].status, Status::Fail);
        assert_eq!(rec[0].found_axioms, ["Ax"]);
        assert!(rec[0].problems[0].starts_with("AxiomDrift"));
    }

    #[test]
    fn postulates_fail_their_entry() {
        let mut m = CheckedModule::new();
        let outcome = check_source(&mut m, "postulate thm : Bool;", "x.hct");
        let manifest = Manifest {
            corpus_dir: PathBuf::new(),
            entries: vec![CorpusEntry {
                result_id: "r".into(),
                file: "x.hct".into(),
                theorems: vec!["thm".into()],
                required_axioms: vec![],
            }],
        };
        let rec = verify_manifest(&manifest, &["x.hct".into()], &[Some(outcome)], &m, &[]);
        assert_eq!(rec[0].status, Status::Fail);
        assert_eq!(rec[0].postulates, 1);
    }
}

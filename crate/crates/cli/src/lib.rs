//! Driver behind the `platec` binary.
//!
//! [`run`] executes one translation, [`validate_file`] only checks a model
//! and [`corpus_check`] re-renders every fixture in a corpus directory and
//! compares it with the checked-in goldens. All three return the process exit
//! code and write diagnostics to the given stream.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use platec_core::emit::{self, read_artifact, Artifact, EmitOptions, Format, OwnedArtifact};
use platec_core::pipeline::golden_files;
use platec_core::reduce::Reduction;
use platec_core::translate::{translate_with, Rule};
use platec_core::{
    atomicize, parse, reduce, validate, AtomicPlateModel, Diagnostic, ERModel,
    EquivalenceHints, Stage, ValidationReport,
};

pub const EXIT_OK: i32 = 0;
/// Validation, parse, translation or emission errors, and golden drift.
pub const EXIT_INVALID: i32 = 1;
/// Unresolved duplicate relationships under `--strict`, or when DDL was
/// requested from a model that is not fully reduced.
pub const EXIT_UNRESOLVED: i32 = 2;
pub const EXIT_IO: i32 = 3;
/// Bad command line.
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopAfter {
    Apm,
    /// Raw ERM with only the nesting rule applied.
    NestedErm,
    RawErm,
    Reduced,
}

impl StopAfter {
    fn suffix(self) -> &'static str {
        match self {
            StopAfter::Apm => "apm",
            StopAfter::NestedErm => "nested-erm",
            StopAfter::RawErm => "raw-erm",
            StopAfter::Reduced => "erm",
        }
    }
}

impl FromStr for StopAfter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apm" => Ok(StopAfter::Apm),
            "nested-erm" => Ok(StopAfter::NestedErm),
            "raw-erm" => Ok(StopAfter::RawErm),
            "reduced" => Ok(StopAfter::Reduced),
            other => Err(format!(
                "unknown stage `{other}` (expected apm, nested-erm, raw-erm or reduced)"
            )),
        }
    }
}

impl fmt::Display for StopAfter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopAfter::Apm => "apm",
            StopAfter::NestedErm => "nested-erm",
            StopAfter::RawErm => "raw-erm",
            StopAfter::Reduced => "reduced",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub input: PathBuf,
    pub hints: Option<PathBuf>,
    pub stop_after: StopAfter,
    pub emit: Vec<Format>,
    pub out_dir: PathBuf,
    pub assume_equivalent: bool,
    /// Treat warnings from reduction as fatal.
    pub strict: bool,
    pub color: bool,
}

impl CliConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            hints: None,
            stop_after: StopAfter::Reduced,
            emit: vec![Format::Json],
            out_dir: PathBuf::from("."),
            assume_equivalent: false,
            strict: false,
            color: false,
        }
    }
}

/// Whether diagnostics on a terminal should be colored.
pub fn color_enabled(is_terminal: bool) -> bool {
    is_terminal && std::env::var_os("PLATEC_NO_COLOR").is_none()
}

enum Failure {
    Io(String),
    Invalid(String),
    Unresolved(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Unresolved(_) => EXIT_UNRESOLVED,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Invalid(m) | Failure::Unresolved(m) => m,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Output file stem: the input's file name without `.bpn`, `.apm.json`, ...
fn stem_of(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    for suffix in [".apm.json", ".nested-erm.json", ".raw-erm.json", ".erm.json", ".json", ".bpn"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_string();
        }
    }
    name
}

fn load_hints(config: &CliConfig) -> Result<EquivalenceHints, Failure> {
    let mut hints = match &config.hints {
        Some(path) => EquivalenceHints::parse(&read(path)?)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
        None => EquivalenceHints::none(),
    };
    hints.assume_all |= config.assume_equivalent;
    Ok(hints)
}

/// Where the input enters the pipeline.
enum Entry {
    Source(String),
    Apm(AtomicPlateModel),
    Erm(ERModel),
}

fn entry_of(text: String, path: &Path) -> Result<Entry, Failure> {
    if text.trim_start().starts_with('{') {
        match read_artifact(&text) {
            Ok(OwnedArtifact::Apm(m)) => Ok(Entry::Apm(m)),
            Ok(OwnedArtifact::Erm(m)) => Ok(Entry::Erm(m)),
            Err(e) => Err(Failure::Invalid(format!("{}: {e}", path.display()))),
        }
    } else {
        Ok(Entry::Source(text))
    }
}

/// Final model of a run plus its one-line summary.
enum Outcome {
    Apm(AtomicPlateModel),
    Erm(ERModel),
}

fn summary(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Apm(m) => format!(
            "{}: {} plates, {} atoms, {} edges (stage apm)",
            m.name,
            m.plates.len(),
            m.atoms.len(),
            m.edge_count()
        ),
        Outcome::Erm(m) => format!(
            "{}: {} entities, {} associations, {} direct relationships (stage {})",
            m.name,
            m.plain_entities().count(),
            m.associations().count(),
            m.direct_rels.len(),
            m.stage
        ),
    }
}

fn render_report(report: &ValidationReport, file: &str, color: bool, err: &mut dyn Write) {
    let text = report.render(file, color);
    if !text.is_empty() {
        let _ = err.write_all(text.as_bytes());
        if !text.ends_with('\n') {
            let _ = writeln!(err);
        }
    }
}

fn pipeline(config: &CliConfig, err: &mut dyn Write) -> Result<Outcome, Failure> {
    let file = config.input.display().to_string();
    let text = read(&config.input)?;
    let hints = load_hints(config)?;

    let apm = match entry_of(text, &config.input)? {
        Entry::Source(src) => {
            let pm = parse(&src).map_err(|e| {
                let d = Diagnostic::error(e.code(), e.message()).at(e.location());
                Failure::Invalid(d.render(&file, config.color))
            })?;
            let report = validate(&pm);
            render_report(&report, &file, config.color, err);
            if report.has_errors() {
                let n = report.errors().count();
                return Err(Failure::Invalid(format!("{file}: {n} validation error(s)")));
            }
            atomicize(&pm)
        }
        Entry::Apm(apm) => apm,
        Entry::Erm(erm) => return finish_erm(config, erm, &hints, &file, err),
    };
    if config.stop_after == StopAfter::Apm {
        return Ok(Outcome::Apm(apm));
    }
    let rules: &[Rule] = if config.stop_after == StopAfter::NestedErm {
        &[Rule::Nesting]
    } else {
        &[Rule::Nesting, Rule::Onehot]
    };
    let raw = translate_with(&apm, rules).map_err(|e| Failure::Invalid(format!("{file}: {e}")))?;
    finish_erm(config, raw, &hints, &file, err)
}

fn finish_erm(
    config: &CliConfig,
    erm: ERModel,
    hints: &EquivalenceHints,
    file: &str,
    err: &mut dyn Write,
) -> Result<Outcome, Failure> {
    if config.stop_after != StopAfter::Reduced {
        if erm.stage != Stage::Raw {
            return Err(Failure::Invalid(format!(
                "{file}: cannot stop after {} on a model at stage {}",
                config.stop_after, erm.stage
            )));
        }
        return Ok(Outcome::Erm(erm));
    }
    // An already reduced model passes through unchanged: reduce is idempotent.
    let Reduction { model, report } =
        reduce(&erm, hints).map_err(|e| Failure::Invalid(format!("{file}: {e}")))?;
    render_report(&report, file, config.color, err);
    if model.stage == Stage::ReducedWithWarnings {
        if config.strict {
            return Err(Failure::Unresolved(format!(
                "{file}: unresolved duplicate relationships (strict mode)"
            )));
        }
        if config.emit.contains(&Format::Ddl) {
            return Err(Failure::Unresolved(format!(
                "{file}: DDL needs every duplicate relationship resolved; pass --hints or --assume-equivalent"
            )));
        }
    } else if config.strict && !report.is_empty() {
        return Err(Failure::Unresolved(format!(
            "{file}: reduction produced warnings (strict mode)"
        )));
    }
    Ok(Outcome::Erm(model))
}

fn render_outputs(config: &CliConfig, outcome: &Outcome, err: &mut dyn Write) -> Result<Vec<(PathBuf, String)>, Failure> {
    let stem = stem_of(&config.input);
    let artifact = match outcome {
        Outcome::Apm(m) => Artifact::Apm(m),
        Outcome::Erm(m) => Artifact::Erm(m),
    };
    let mut outputs = Vec::new();
    let mut formats = config.emit.clone();
    formats.sort();
    formats.dedup();
    for format in formats {
        let opts = EmitOptions::new(format);
        if format != Format::Ddl && !opts.supports(artifact.stage()) {
            let _ = writeln!(
                err,
                "note: skipping {format} output, not available for stage {}",
                artifact.stage().as_str()
            );
            continue;
        }
        let text = emit::emit(artifact, &opts).map_err(|e| Failure::Invalid(e.to_string()))?;
        let name = match format {
            Format::Ddl => format!("{stem}.ddl.sql"),
            f => format!("{stem}.{}.{}", config.stop_after.suffix(), f.extension()),
        };
        outputs.push((config.out_dir.join(name), text));
    }
    Ok(outputs)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomically(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs one translation. Nothing is written unless every requested
/// artifact rendered.
pub fn run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = pipeline(config, err).and_then(|outcome| {
        let files = render_outputs(config, &outcome, err)?;
        fs::create_dir_all(&config.out_dir)
            .map_err(|e| Failure::Io(format!("{}: {e}", config.out_dir.display())))?;
        for (path, text) in &files {
            write_atomically(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let _ = writeln!(out, "{}", summary(&outcome));
            EXIT_OK
        }
        Err(f) => {
            let msg = f.message();
            let _ = write!(err, "{msg}");
            if !msg.ends_with('\n') {
                let _ = writeln!(err);
            }
            f.code()
        }
    }
}

/// Parses and validates a model without translating it.
pub fn validate_file(path: &Path, color: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let file = path.display().to_string();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "{file}: {e}");
            return EXIT_IO;
        }
    };
    let pm = match parse(&text) {
        Ok(pm) => pm,
        Err(e) => {
            let d = Diagnostic::error(e.code(), e.message()).at(e.location());
            let _ = writeln!(err, "{}", d.render(&file, color));
            return EXIT_INVALID;
        }
    };
    let report = validate(&pm);
    render_report(&report, &file, color, err);
    let errors = report.errors().count();
    let warnings = report.diagnostics.len() - errors;
    let _ = writeln!(out, "{}: {errors} error(s), {warnings} warning(s)", pm.name);
    if errors > 0 {
        EXIT_INVALID
    } else {
        EXIT_OK
    }
}

/// Position of the first differing byte, or `None` when equal.
pub fn first_difference(expected: &[u8], actual: &[u8]) -> Option<usize> {
    let common = expected.iter().zip(actual).position(|(a, b)| a != b);
    match common {
        Some(i) => Some(i),
        None if expected.len() == actual.len() => None,
        None => Some(expected.len().min(actual.len())),
    }
}

fn line_col(text: &[u8], offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let col = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

/// Fixture stems (`*.bpn`) in a corpus directory, sorted.
pub fn corpus_fixtures(dir: &Path) -> io::Result<Vec<String>> {
    let mut stems: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".bpn").map(str::to_string)
        })
        .collect();
    stems.sort();
    Ok(stems)
}

/// Re-renders every fixture and compares against the goldens on disk. With
/// `bless`, goldens are rewritten instead.
pub fn corpus_check(dir: &Path, bless: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let stems = match corpus_fixtures(dir) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    let mut drift = 0usize;
    let mut files_checked = 0usize;
    for stem in &stems {
        let src_path = dir.join(format!("{stem}.bpn"));
        let hints_path = dir.join(format!("{stem}.hints"));
        let source = match fs::read_to_string(&src_path) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", src_path.display());
                return EXIT_IO;
            }
        };
        let hints = if hints_path.exists() {
            match fs::read_to_string(&hints_path).map(|t| EquivalenceHints::parse(&t)) {
                Ok(Ok(h)) => h,
                Ok(Err(e)) => {
                    let _ = writeln!(err, "{}: {e}", hints_path.display());
                    return EXIT_INVALID;
                }
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", hints_path.display());
                    return EXIT_IO;
                }
            }
        } else {
            EquivalenceHints::none()
        };
        let files = match golden_files(stem, &source, &hints) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", src_path.display());
                drift += 1;
                continue;
            }
        };
        for (name, expected_now) in files {
            files_checked += 1;
            let path = dir.join(&name);
            if bless {
                if let Err(e) = write_atomically(&path, &expected_now) {
                    let _ = writeln!(err, "{}: {e}", path.display());
                    return EXIT_IO;
                }
                continue;
            }
            match fs::read(&path) {
                Ok(golden) => {
                    if let Some(off) = first_difference(&golden, expected_now.as_bytes()) {
                        let (line, col) = line_col(&golden, off);
                        let _ = writeln!(
                            err,
                            "{}: drift at byte {off} (line {line}, column {col})",
                            path.display()
                        );
                        drift += 1;
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    let _ = writeln!(err, "{}: golden file missing", path.display());
                    drift += 1;
                }
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", path.display());
                    return EXIT_IO;
                }
            }
        }
    }
    let verb = if bless { "blessed" } else { "checked" };
    let _ = writeln!(
        out,
        "{} fixtures, {files_checked} files {verb}, {drift} drifted",
        stems.len()
    );
    if drift > 0 {
        EXIT_INVALID
    } else {
        EXIT_OK
    }
}

/// Default corpus location: `crates/core/corpus` under the current
/// directory, else the copy next to this crate's sources.
pub fn default_corpus_dir() -> PathBuf {
    let local = PathBuf::from("crates/core/corpus");
    if local.is_dir() {
        local
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
    }
}

//! One-call driver: source text to reduced ER model.

use thiserror::Error;

use crate::apm::{atomicize, AtomicPlateModel};
use crate::ast::PlateModel;
use crate::diag::ValidationReport;
use crate::emit::{emit_apm_dot, emit_apm_json, emit_ddl, emit_dot, emit_erm_json, emit_mermaid};
use crate::erm::{ERModel, Stage};
use crate::error::{EmitError, ParseError, ReduceError, TranslateError};
use crate::parse::parse;
use crate::reduce::{reduce, EquivalenceHints};
use crate::translate::{translate, translate_with, Rule};
use crate::validate::validate;

#[derive(Debug, Clone)]
pub struct Compiled {
    pub plate_model: PlateModel,
    /// Validation findings. Warnings only: errors stop the pipeline.
    pub validation: ValidationReport,
    pub apm: AtomicPlateModel,
    /// Raw ERM with only the nesting rule applied: constrained attributes
    /// are still in place.
    pub nested: ERModel,
    pub raw: ERModel,
    pub reduced: ERModel,
    /// Reducer warnings (renamed attributes, unresolved duplicates).
    pub reduction: ValidationReport,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error at {}: {}", .0.location(), .0.message())]
    Parse(#[from] ParseError),
    #[error("model has {} validation error(s)", .0.errors().count())]
    Invalid(ValidationReport),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

pub fn compile(source: &str, hints: &EquivalenceHints) -> Result<Compiled, PipelineError> {
    let plate_model = parse(source)?;
    let validation = validate(&plate_model);
    if validation.has_errors() {
        return Err(PipelineError::Invalid(validation));
    }
    let apm = atomicize(&plate_model);
    let nested = translate_with(&apm, &[Rule::Nesting])?;
    let raw = translate(&apm)?;
    let reduction = reduce(&raw, hints)?;
    Ok(Compiled {
        plate_model,
        validation,
        apm,
        nested,
        raw,
        reduced: reduction.model,
        reduction: reduction.report,
    })
}

/// Every artifact checked into the corpus for one fixture, as
/// `(file name, contents)` pairs in a fixed order. The DDL file is only
/// produced when reduction left no warnings.
pub fn golden_files(
    stem: &str,
    source: &str,
    hints: &EquivalenceHints,
) -> Result<Vec<(String, String)>, PipelineError> {
    let c = compile(source, hints)?;
    let mut files = vec![
        (format!("{stem}.apm.json"), emit_apm_json(&c.apm)),
        (format!("{stem}.apm.dot"), emit_apm_dot(&c.apm)),
        (format!("{stem}.nested-erm.json"), emit_erm_json(&c.nested)),
        (format!("{stem}.raw-erm.json"), emit_erm_json(&c.raw)),
        (format!("{stem}.raw-erm.dot"), emit_dot(&c.raw)),
        (format!("{stem}.erm.json"), emit_erm_json(&c.reduced)),
        (format!("{stem}.erm.dot"), emit_dot(&c.reduced)),
        (format!("{stem}.erm.mmd"), emit_mermaid(&c.reduced)),
    ];
    if c.reduced.stage == Stage::Reduced {
        files.push((format!("{stem}.ddl.sql"), emit_ddl(&c.reduced)?));
    }
    Ok(files)
}

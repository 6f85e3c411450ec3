//! Renderers for atomic plate models and ER models.
//!
//! All emitters are pure: the same model always renders to the same bytes.

mod ddl;
mod dot;
mod json;
mod mermaid;

use std::fmt;
use std::str::FromStr;

pub use ddl::{column_name, emit_ddl, table_name};
pub use dot::{emit_apm_dot, emit_dot};
pub use json::{
    emit_apm_json, emit_erm_json, emit_json, read_apm_json, read_artifact, read_erm_json,
    OwnedArtifact, APM_SCHEMA, ERM_SCHEMA,
};
pub use mermaid::emit_mermaid;

use crate::apm::AtomicPlateModel;
use crate::erm::{ERModel, Stage};
use crate::error::EmitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Json,
    Dot,
    Mermaid,
    Ddl,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Json, Format::Dot, Format::Mermaid, Format::Ddl];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Mermaid => "mermaid",
            Format::Ddl => "ddl",
        }
    }

    /// File extension used for artifacts of this format.
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Mermaid => "mmd",
            Format::Ddl => "sql",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            "mermaid" | "mmd" => Ok(Format::Mermaid),
            "ddl" | "sql" => Ok(Format::Ddl),
            other => Err(format!(
                "unknown format `{other}` (expected json, dot, mermaid or ddl)"
            )),
        }
    }
}

/// Pipeline stage an artifact belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmitStage {
    Apm,
    Raw,
    Reduced,
}

impl EmitStage {
    pub fn as_str(self) -> &'static str {
        match self {
            EmitStage::Apm => "apm",
            EmitStage::Raw => "raw",
            EmitStage::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Apm(&'a AtomicPlateModel),
    Erm(&'a ERModel),
}

impl Artifact<'_> {
    pub fn stage(&self) -> EmitStage {
        match self {
            Artifact::Apm(_) => EmitStage::Apm,
            Artifact::Erm(m) if m.stage == Stage::Raw => EmitStage::Raw,
            Artifact::Erm(_) => EmitStage::Reduced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    pub format: Format,
    /// DDL flavour. Only `ansi` exists.
    pub dialect: String,
}

impl EmitOptions {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            dialect: "ansi".to_string(),
        }
    }

    /// Whether this format can render the given stage. DDL needs a reduced
    /// model and Mermaid has no notation for plates.
    pub fn supports(&self, stage: EmitStage) -> bool {
        match self.format {
            Format::Json | Format::Dot => true,
            Format::Mermaid => stage != EmitStage::Apm,
            Format::Ddl => stage == EmitStage::Reduced,
        }
    }
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self::new(Format::Json)
    }
}

pub fn emit(artifact: Artifact<'_>, opts: &EmitOptions) -> Result<String, EmitError> {
    let stage = artifact.stage();
    if opts.format == Format::Ddl {
        if opts.dialect != "ansi" {
            return Err(EmitError::Unsupported {
                format: format!("ddl/{}", opts.dialect),
                stage: stage.as_str().into(),
            });
        }
        return match artifact {
            Artifact::Erm(m) => emit_ddl(m),
            Artifact::Apm(_) => Err(EmitError::NotReduced {
                stage: stage.as_str().into(),
            }),
        };
    }
    if !opts.supports(stage) {
        return Err(EmitError::Unsupported {
            format: opts.format.to_string(),
            stage: stage.as_str().into(),
        });
    }
    Ok(match (opts.format, artifact) {
        (Format::Json, a) => emit_json(a),
        (Format::Dot, Artifact::Apm(m)) => emit_apm_dot(m),
        (Format::Dot, Artifact::Erm(m)) => emit_dot(m),
        (Format::Mermaid, Artifact::Erm(m)) => emit_mermaid(m),
        (Format::Mermaid, Artifact::Apm(_)) | (Format::Ddl, _) => unreachable!("checked above"),
    })
}

/// Quotes a DOT / Mermaid string literal.
pub(crate) fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

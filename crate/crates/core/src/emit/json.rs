//! Canonical JSON (`apm/v1`, `erm/v1`).
//!
//! Object keys are sorted, entities, links and relationships are sorted by
//! name, and the output is pretty-printed with a trailing newline. APM plates
//! and atoms keep declaration order: plate order decides association names
//! downstream.

use serde::Serialize;
use serde_json::Value;

use super::Artifact;
use crate::apm::AtomicPlateModel;
use crate::erm::ERModel;
use crate::error::JsonError;

pub const APM_SCHEMA: &str = "apm/v1";
pub const ERM_SCHEMA: &str = "erm/v1";

fn with_schema<T: Serialize>(value: &T, schema: &str) -> String {
    let mut v = serde_json::to_value(value).expect("model types serialize");
    v.as_object_mut()
        .expect("models serialize as objects")
        .insert("schema".into(), Value::String(schema.into()));
    // serde_json's default map is a BTreeMap, so keys come out sorted
    let mut out = serde_json::to_string_pretty(&v).expect("value serializes");
    out.push('\n');
    out
}

pub fn emit_apm_json(apm: &AtomicPlateModel) -> String {
    with_schema(apm, APM_SCHEMA)
}

pub fn emit_erm_json(erm: &ERModel) -> String {
    let mut erm = erm.clone();
    erm.canonicalize();
    with_schema(&erm, ERM_SCHEMA)
}

pub fn emit_json(artifact: Artifact<'_>) -> String {
    match artifact {
        Artifact::Apm(m) => emit_apm_json(m),
        Artifact::Erm(m) => emit_erm_json(m),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnedArtifact {
    Apm(AtomicPlateModel),
    Erm(ERModel),
}

fn take_schema(text: &str) -> Result<(String, Value), JsonError> {
    let mut v: Value = serde_json::from_str(text)?;
    let schema = v
        .as_object_mut()
        .and_then(|o| o.remove("schema"))
        .and_then(|s| s.as_str().map(str::to_string))
        .unwrap_or_default();
    Ok((schema, v))
}

pub fn read_apm_json(text: &str) -> Result<AtomicPlateModel, JsonError> {
    match read_artifact(text)? {
        OwnedArtifact::Apm(m) => Ok(m),
        OwnedArtifact::Erm(_) => Err(JsonError::Schema {
            found: ERM_SCHEMA.into(),
            expected: APM_SCHEMA.into(),
        }),
    }
}

pub fn read_erm_json(text: &str) -> Result<ERModel, JsonError> {
    match read_artifact(text)? {
        OwnedArtifact::Erm(m) => Ok(m),
        OwnedArtifact::Apm(_) => Err(JsonError::Schema {
            found: APM_SCHEMA.into(),
            expected: ERM_SCHEMA.into(),
        }),
    }
}

/// Reads either schema, dispatching on the embedded `schema` field.
pub fn read_artifact(text: &str) -> Result<OwnedArtifact, JsonError> {
    let (schema, v) = take_schema(text)?;
    match schema.as_str() {
        APM_SCHEMA => Ok(OwnedArtifact::Apm(serde_json::from_value(v)?)),
        ERM_SCHEMA => Ok(OwnedArtifact::Erm(serde_json::from_value(v)?)),
        _ => Err(JsonError::Schema {
            found: schema,
            expected: format!("{APM_SCHEMA} or {ERM_SCHEMA}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erm::Stage;

    #[test]
    fn empty_erm_document() {
        let text = emit_erm_json(&ERModel::new("Empty", Stage::Raw));
        assert_eq!(
            text,
            "{\n  \"direct_rels\": [],\n  \"entities\": [],\n  \"links\": [],\n  \"name\": \"Empty\",\n  \"schema\": \"erm/v1\",\n  \"stage\": \"raw\"\n}\n"
        );
        assert_eq!(read_erm_json(&text).unwrap(), ERModel::new("Empty", Stage::Raw));
    }

    #[test]
    fn empty_apm_document() {
        let apm = AtomicPlateModel {
            name: "Empty".into(),
            ..Default::default()
        };
        let text = emit_apm_json(&apm);
        assert_eq!(
            text,
            "{\n  \"atoms\": [],\n  \"name\": \"Empty\",\n  \"plates\": [],\n  \"schema\": \"apm/v1\"\n}\n"
        );
        assert_eq!(read_apm_json(&text).unwrap(), apm);
    }

    #[test]
    fn schema_checks() {
        assert!(matches!(
            read_artifact("{\"schema\": \"foo/v9\"}"),
            Err(JsonError::Schema { .. })
        ));
        let erm_text = emit_erm_json(&ERModel::new("E", Stage::Reduced));
        assert!(read_apm_json(&erm_text).is_err());
        assert!(matches!(read_artifact("not json"), Err(JsonError::Json(_))));
    }
}

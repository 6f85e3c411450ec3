use std::fs;
use std::path::Path;

use proptest::prelude::*;

use platec_core::emit::emit_ddl;
use platec_core::erm::{DirectRelationship, EntityType, Origin};
use platec_core::pipeline::compile;
use platec_core::{Cardinality, ERModel, EmitError, EquivalenceHints, Stage};
use platec_testkit::sql::Schema;
use platec_testkit::valid_model_source;

fn corpus(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)).unwrap()
}

fn assert_sound(ddl: &str) -> Schema {
    let schema = Schema::parse(ddl).unwrap_or_else(|e| panic!("{e}\n{ddl}"));
    assert!(schema.referential_problems().is_empty(), "{:?}", schema.referential_problems());
    assert!(schema.unconstrained_id_columns().is_empty(), "{:?}", schema.unconstrained_id_columns());
    schema
}

#[test]
fn corpus_ddl_is_sound() {
    for stem in ["lda", "lda-explorer", "polyreg", "vector", "matrix", "selfrel", "onehot-minimal", "nesting-minimal", "dupmerge"] {
        assert_sound(&corpus(&format!("{stem}.ddl.sql")));
    }
}

#[test]
fn lda_tables() {
    let schema = assert_sound(&corpus("lda.ddl.sql"));
    let names: Vec<&str> = schema.tables.keys().map(String::as_str).collect();
    assert_eq!(names, vec!["DOCUMENT", "D_T", "TOKEN", "TOPIC", "T_W", "WORD"]);
    let token = &schema.tables["TOKEN"];
    for c in ["DOCUMENT_ID", "TOPIC_ID", "WORD_ID"] {
        assert!(token.columns.contains(c), "{c}");
    }
    assert_eq!(schema.tables["D_T"].primary_key, vec!["DOCUMENT_ID", "TOPIC_ID"]);
    assert_eq!(schema.tables["T_W"].primary_key, vec!["TOPIC_ID", "WORD_ID"]);
    assert!(schema.tables["TOPIC"].columns.contains("ALPHA"));
}

#[test]
fn self_relationship_has_two_role_columns() {
    let schema = assert_sound(&corpus("selfrel.ddl.sql"));
    let fks: Vec<_> = schema.foreign_keys.iter().filter(|f| f.table == "N_N").collect();
    assert_eq!(fks.len(), 2);
    assert!(fks.iter().all(|f| f.target == "NODE"));
    assert_eq!(schema.tables["N_N"].primary_key, vec!["NODE_1_ID", "NODE_2_ID"]);
}

#[test]
fn reserved_names_are_quoted() {
    let ddl = corpus("polyreg.ddl.sql");
    assert!(ddl.contains("CREATE TABLE \"GLOBAL\""));
    let schema = assert_sound(&ddl);
    assert!(schema.tables.contains_key("GLOBAL"));
    assert!(schema.tables["GLOBAL"].primary_key.is_empty());
}

#[test]
fn minimum_participation_is_a_comment() {
    let ddl = corpus("lda.ddl.sql");
    assert!(ddl.contains("relates to (1,N) TOKEN rows"));
    assert!(ddl.contains("relates to (0,N) TOKEN rows"));
}

fn entity(name: &str) -> EntityType {
    EntityType {
        name: name.into(),
        origin: Origin::Plate { plate: name.into() },
        is_association: false,
        key_attrs: vec!["ID".into()],
        attrs: vec![],
    }
}

fn rel(card_a: Cardinality, card_b: Cardinality) -> ERModel {
    let mut erm = ERModel::new("R", Stage::Reduced);
    erm.entities = vec![entity("A"), entity("B")];
    erm.direct_rels = vec![DirectRelationship {
        name: "r".into(),
        a: "A".into(),
        b: "B".into(),
        card_a,
        card_b,
        role: None,
        provenance: vec!["r".into()],
    }];
    erm
}

#[test]
fn foreign_key_side_and_nullability() {
    let optional = emit_ddl(&rel(Cardinality::new(0, Some(1)), Cardinality::ZERO_OR_MORE)).unwrap();
    assert!(optional.contains("    b_id INTEGER,\n") || optional.contains("    b_id INTEGER\n"), "{optional}");
    let flipped = emit_ddl(&rel(Cardinality::ONE_OR_MORE, Cardinality::EXACTLY_ONE)).unwrap();
    assert!(flipped.contains("ALTER TABLE B ADD CONSTRAINT fk_b_a_id"), "{flipped}");
    assert_sound(&optional);
    assert_sound(&flipped);
    assert!(matches!(
        emit_ddl(&rel(Cardinality::ZERO_OR_MORE, Cardinality::ONE_OR_MORE)),
        Err(EmitError::ManyToManyDirect { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_models_emit_sound_ddl(src in valid_model_source()) {
        let c = compile(&src, &EquivalenceHints::assume_all()).unwrap();
        let ddl = emit_ddl(&c.reduced).unwrap();
        let schema = Schema::parse(&ddl).map_err(|e| TestCaseError::fail(format!("{e}\n{ddl}")))?;
        prop_assert!(schema.referential_problems().is_empty(), "{:?}\n{}", schema.referential_problems(), ddl);
        prop_assert_eq!(schema.tables.len(), c.reduced.entities.len());
    }
}

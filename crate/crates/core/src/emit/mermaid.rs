//! Mermaid `erDiagram` output (crow's foot).
//!
//! Min-max pairs map onto crow's foot ends: the symbol next to an entity
//! says how many of it relate to one instance on the other side. Identifying
//! links draw solid, everything else dashed.

use std::fmt::Write;

use super::quoted;
use crate::ast::Domain;
use crate::erm::{Cardinality, ERModel};

fn ident(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn left_end(c: Cardinality) -> &'static str {
    match (c.min, c.is_at_most_one()) {
        (0, true) => "|o",
        (_, true) => "||",
        (0, false) => "}o",
        (_, false) => "}|",
    }
}

fn right_end(c: Cardinality) -> &'static str {
    match (c.min, c.is_at_most_one()) {
        (0, true) => "o|",
        (_, true) => "||",
        (0, false) => "o{",
        (_, false) => "|{",
    }
}

fn type_name(d: Domain) -> &'static str {
    match d {
        Domain::Real => "float",
        Domain::Int => "int",
        Domain::Bit => "boolean",
    }
}

pub fn emit_mermaid(erm: &ERModel) -> String {
    let mut out = String::from("erDiagram\n");
    for entity in &erm.entities {
        writeln!(out, "    {} {{", ident(&entity.name)).unwrap();
        for key in &entity.key_attrs {
            writeln!(out, "        int {} PK", ident(key)).unwrap();
        }
        for attr in &entity.attrs {
            writeln!(out, "        {} {}", type_name(attr.domain), ident(&attr.name)).unwrap();
        }
        out.push_str("    }\n");
    }
    // `target ||--o{ assoc`: one target per association row, card_target
    // association rows per target.
    for link in &erm.links {
        let line = if link.identifying { "--" } else { ".." };
        writeln!(
            out,
            "    {} {}{line}{} {} : {}",
            ident(&link.target),
            left_end(link.card_assoc),
            right_end(link.card_target),
            ident(&link.association),
            quoted(&link.id)
        )
        .unwrap();
    }
    for rel in &erm.direct_rels {
        writeln!(
            out,
            "    {} {}..{} {} : {}",
            ident(&rel.a),
            left_end(rel.card_b),
            right_end(rel.card_a),
            ident(&rel.b),
            quoted(&rel.name)
        )
        .unwrap();
    }
    out
}

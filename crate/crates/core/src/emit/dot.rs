//! Graphviz output.
//!
//! APMs render as a digraph of atoms grouped into `cluster_` subgraphs, one
//! per distinct plate combination. ER models render in Chen notation:
//! entities as boxes, associations as diamonds, attributes as ellipses,
//! identifying links double-lined, min-max labels at each end.

use std::fmt::Write;

use super::quoted;
use crate::apm::AtomicPlateModel;
use crate::ast::VarKind;
use crate::erm::ERModel;

pub fn emit_apm_dot(apm: &AtomicPlateModel) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quoted(&apm.name)).unwrap();
    out.push_str("  node [shape=circle];\n");

    let mut groups: Vec<(Vec<&str>, Vec<usize>)> = Vec::new();
    for (i, atom) in apm.atoms.iter().enumerate() {
        let key = atom.member_occurrences();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }

    for (key, members) in &groups {
        let indent = if key.is_empty() { "  " } else { "    " };
        if !key.is_empty() {
            let id = format!("cluster_{}", key.join("_"));
            let label = key
                .iter()
                .map(|p| format!("{} ∈ {}", p.to_lowercase(), p))
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(out, "  subgraph {} {{", quoted(&id)).unwrap();
            writeln!(out, "    label={};", quoted(&label)).unwrap();
        }
        for &i in members {
            let atom = &apm.atoms[i];
            let style = match atom.kind {
                VarKind::Observed => ", style=filled, fillcolor=gray80",
                VarKind::Hidden => "",
                VarKind::Hyper => ", style=bold",
                VarKind::Deterministic => ", shape=doublecircle",
            };
            writeln!(out, "{indent}{} [label={}{style}];", quoted(&atom.name), quoted(&atom.name)).unwrap();
        }
        if !key.is_empty() {
            out.push_str("  }\n");
        }
    }
    out.push_str("}\n");
    out
}

pub fn emit_dot(erm: &ERModel) -> String {
    let mut out = String::new();
    writeln!(out, "graph {} {{", quoted(&erm.name)).unwrap();
    out.push_str("  node [fontname=\"Helvetica\"];\n");

    for entity in &erm.entities {
        let shape = if entity.is_association { "diamond" } else { "box" };
        writeln!(out, "  {} [shape={shape}];", quoted(&entity.name)).unwrap();
        for key in &entity.key_attrs {
            let id = format!("{}.{key}", entity.name);
            writeln!(out, "  {} [shape=ellipse, label=<<u>{key}</u>>];", quoted(&id)).unwrap();
            writeln!(out, "  {} -- {};", quoted(&entity.name), quoted(&id)).unwrap();
        }
        for attr in &entity.attrs {
            let id = format!("{}.{}", entity.name, attr.name);
            writeln!(out, "  {} [shape=ellipse, label={}];", quoted(&id), quoted(&attr.name)).unwrap();
            writeln!(out, "  {} -- {};", quoted(&entity.name), quoted(&id)).unwrap();
        }
    }

    for link in &erm.links {
        let lines = if link.identifying { ", color=\"black:invis:black\"" } else { "" };
        let role = link
            .role
            .as_ref()
            .map(|r| format!(", label={}", quoted(r)))
            .unwrap_or_default();
        writeln!(
            out,
            "  {} -- {} [taillabel={}, headlabel={}{role}{lines}];",
            quoted(&link.association),
            quoted(&link.target),
            quoted(&link.card_assoc.to_string()),
            quoted(&link.card_target.to_string()),
        )
        .unwrap();
    }

    for rel in &erm.direct_rels {
        let id = format!("rel:{}", rel.name);
        writeln!(out, "  {} [shape=diamond, label={}];", quoted(&id), quoted(&rel.name)).unwrap();
        writeln!(
            out,
            "  {} -- {} [headlabel={}];",
            quoted(&id),
            quoted(&rel.a),
            quoted(&rel.card_a.to_string())
        )
        .unwrap();
        writeln!(
            out,
            "  {} -- {} [headlabel={}];",
            quoted(&id),
            quoted(&rel.b),
            quoted(&rel.card_b.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erm::{EntityType, Origin, Stage};

    #[test]
    fn single_entity_has_no_edges_besides_key() {
        let mut erm = ERModel::new("One", Stage::Reduced);
        erm.entities.push(EntityType {
            name: "Thing".into(),
            origin: Origin::Plate { plate: "N".into() },
            is_association: false,
            key_attrs: vec!["ID".into()],
            attrs: vec![],
        });
        let dot = emit_dot(&erm);
        assert!(dot.contains("\"Thing\" [shape=box];"));
        assert_eq!(dot.matches(" -- ").count(), 1);
    }
}

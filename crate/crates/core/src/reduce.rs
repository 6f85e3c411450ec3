//! Reduction of a raw ER model to a well-formed one.
//!
//! Two kinds of translation artifacts are removed:
//!
//! * association entities left with a single identifying link and no key
//!   attributes of their own. They are merged into that link's target; their
//!   other links turn into direct relationships of the owner.
//! * duplicate direct relationships (same endpoints, same cardinalities).
//!   Whether two of them mean the same thing is a judgement call, so they are
//!   only collapsed when an [`EquivalenceHints`] class names them, or when
//!   `assume_all` is set.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Diagnostic, ValidationReport};
use crate::erm::{DirectRelationship, ERModel, Stage, ID};
use crate::error::{HintsError, ReduceError};
use crate::translate::snake;

/// User declarations of semantically equivalent relationships.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivalenceHints {
    /// Each class lists relationship names (or link ids they were built from).
    pub classes: Vec<BTreeSet<String>>,
    /// Treat every duplicate as equivalent.
    pub assume_all: bool,
}

impl EquivalenceHints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn assume_all() -> Self {
        Self {
            classes: Vec::new(),
            assume_all: true,
        }
    }

    pub fn class<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.classes.push(names.into_iter().map(Into::into).collect());
        self
    }

    /// Parses a `.hints` file: one `equivalent <rel> <rel> [...]` per line,
    /// `#` comments.
    pub fn parse(text: &str) -> Result<Self, HintsError> {
        let mut hints = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u32 + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("equivalent") => {}
                Some(other) => {
                    return Err(HintsError::Syntax {
                        line: line_no,
                        message: format!("expected `equivalent`, found `{other}`"),
                    })
                }
                None => unreachable!("line is not empty"),
            }
            let names: BTreeSet<String> = words.map(str::to_string).collect();
            if names.len() < 2 {
                return Err(HintsError::Syntax {
                    line: line_no,
                    message: "`equivalent` needs at least two distinct relationship names".into(),
                });
            }
            hints.classes.push(names);
        }
        Ok(hints)
    }
}

/// Result of [`reduce`]: the model plus warnings about what was left alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub model: ERModel,
    pub report: ValidationReport,
}

/// Merges degenerate associations to a fixpoint, then merges hinted
/// duplicate relationships. Unresolved duplicates are reported and the model
/// is marked `reduced-with-warnings`.
pub fn reduce(erm: &ERModel, hints: &EquivalenceHints) -> Result<Reduction, ReduceError> {
    let mut model = erm.clone();
    let mut report = ValidationReport::new();

    loop {
        let next = model
            .associations()
            .find(|a| is_degenerate(&model, &a.name))
            .map(|a| a.name.clone());
        let Some(name) = next else { break };
        report.extend(merge_degenerate_association(&mut model, &name));
    }

    report.extend(merge_duplicate_relationships(&mut model, hints)?);

    model.stage = if report.contains_code("UNRESOLVED_DUPLICATE") {
        Stage::ReducedWithWarnings
    } else {
        Stage::Reduced
    };
    model.canonicalize();
    Ok(Reduction { model, report })
}

fn is_degenerate(erm: &ERModel, association: &str) -> bool {
    let Some(entity) = erm.entity(association) else {
        return false;
    };
    entity.is_association
        && entity.key_attrs.is_empty()
        && erm.links_of(association).filter(|l| l.identifying).count() == 1
}

/// Folds an association with exactly one identifying link into that link's
/// target. Does nothing when the precondition does not hold.
///
/// Attributes move to the owner (renamed `<association>_<attr>` on a clash,
/// with an `ATTR_RENAMED` warning); every other link becomes a direct
/// relationship owner (1,1) – target, keeping the link's target-side
/// cardinality.
pub fn merge_degenerate_association(erm: &mut ERModel, association: &str) -> ValidationReport {
    let mut report = ValidationReport::new();
    if !is_degenerate(erm, association) {
        return report;
    }
    let owner = erm
        .links_of(association)
        .find(|l| l.identifying)
        .map(|l| l.target.clone())
        .expect("degenerate association has an identifying link");
    let others: Vec<_> = erm
        .links_of(association)
        .filter(|l| !l.identifying)
        .cloned()
        .collect();

    let pos = erm
        .entities
        .iter()
        .position(|e| e.name == association)
        .expect("association exists");
    let assoc = erm.entities.remove(pos);
    erm.links.retain(|l| l.association != association);

    let owner_entity = erm.entity_mut(&owner).expect("link target exists");
    for mut attr in assoc.attrs {
        if owner_entity.attr(&attr.name).is_some() || owner_entity.key_attrs.contains(&attr.name) {
            let renamed = format!("{}_{}", snake(association), attr.name);
            report.push(Diagnostic::warning(
                "ATTR_RENAMED",
                format!(
                    "`{owner}` already has `{}`; attribute from `{association}` renamed to `{renamed}`",
                    attr.name
                ),
            ));
            attr.name = renamed;
        }
        owner_entity.attrs.push(attr);
    }

    for link in others {
        erm.direct_rels.push(DirectRelationship {
            name: link.id.clone(),
            a: owner.clone(),
            b: link.target,
            card_a: link.card_assoc,
            card_b: link.card_target,
            role: link.role,
            provenance: vec![link.id],
        });
    }
    for rel in &mut erm.direct_rels {
        if rel.a == association {
            rel.a = owner.clone();
        }
        if rel.b == association {
            rel.b = owner.clone();
        }
    }
    report
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn resolve(erm: &ERModel, name: &str) -> Option<usize> {
    erm.direct_rels
        .iter()
        .position(|r| r.name == name)
        .or_else(|| {
            erm.direct_rels
                .iter()
                .position(|r| r.provenance.iter().any(|p| p == name))
        })
}

/// Collapses duplicate relationships named by a hint class (or all of them
/// under `assume_all`). Remaining duplicates produce `UNRESOLVED_DUPLICATE`
/// warnings.
pub fn merge_duplicate_relationships(
    erm: &mut ERModel,
    hints: &EquivalenceHints,
) -> Result<ValidationReport, ReduceError> {
    let mut report = ValidationReport::new();
    let n = erm.direct_rels.len();
    let mut uf = UnionFind::new(n);

    for class in &hints.classes {
        let mut members = Vec::new();
        for name in class {
            let idx = resolve(erm, name).ok_or_else(|| ReduceError::UnknownRelationship {
                name: name.clone(),
            })?;
            members.push(idx);
        }
        let first = &erm.direct_rels[members[0]];
        if members
            .iter()
            .any(|&i| erm.direct_rels[i].signature() != first.signature())
        {
            return Err(ReduceError::HintMismatch {
                names: class.iter().cloned().collect(),
            });
        }
        for &i in &members[1..] {
            uf.union(members[0], i);
        }
    }

    if hints.assume_all {
        for group in duplicate_groups(erm) {
            for &i in &group[1..] {
                uf.union(group[0], i);
            }
        }
    }

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        classes.entry(uf.find(i)).or_default().push(i);
    }
    let mut merged = Vec::with_capacity(classes.len());
    for members in classes.values() {
        let mut rels: Vec<&DirectRelationship> = members.iter().map(|&i| &erm.direct_rels[i]).collect();
        rels.sort_by(|a, b| a.name.cmp(&b.name));
        let mut rel = rels[0].clone();
        if rels.len() > 1 {
            let provenance: BTreeSet<String> = rels
                .iter()
                .flat_map(|r| r.provenance.iter().cloned())
                .collect();
            rel.provenance = provenance.into_iter().collect();
            rel.name = rel.provenance.join("+");
            if rels.iter().any(|r| r.role != rel.role) {
                rel.role = None;
            }
        }
        merged.push(rel);
    }
    erm.direct_rels = merged;

    for group in duplicate_groups(erm) {
        let names: Vec<&str> = group.iter().map(|&i| erm.direct_rels[i].name.as_str()).collect();
        let r = &erm.direct_rels[group[0]];
        report.push(Diagnostic::warning(
            "UNRESOLVED_DUPLICATE",
            format!(
                "relationships {} all connect {} and {}; declare them equivalent to merge",
                names.join(", "),
                r.a,
                r.b
            ),
        ));
    }
    Ok(report)
}

/// Indices of direct relationships sharing a signature, groups of size >= 2.
fn duplicate_groups(erm: &ERModel) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, r) in erm.direct_rels.iter().enumerate() {
        groups.entry(r.signature()).or_default().push(i);
    }
    groups.into_values().filter(|g| g.len() > 1).collect()
}

/// Flags what keeps an ER model from being well-formed: foreign-key-style
/// attributes, degenerate or keyless associations, duplicate relationships
/// and dangling references.
pub fn check_wellformed(erm: &ERModel) -> ValidationReport {
    let mut report = ValidationReport::new();

    for entity in &erm.entities {
        for attr in &entity.attrs {
            let lower = attr.name.to_ascii_lowercase();
            if lower == ID.to_ascii_lowercase() || lower.ends_with("_id") {
                report.push(Diagnostic::error(
                    "FOREIGN_KEY_ATTRIBUTE",
                    format!(
                        "`{}.{}` looks like a foreign key; use a relationship instead",
                        entity.name, attr.name
                    ),
                ));
            }
        }
        if !entity.is_association {
            continue;
        }
        let identifying = erm.links_of(&entity.name).filter(|l| l.identifying).count();
        if entity.key_attrs.is_empty() && identifying == 1 {
            report.push(Diagnostic::error(
                "DEGENERATE_ASSOCIATION",
                format!(
                    "association `{}` has a single identifying link and does not extend its owner's key",
                    entity.name
                ),
            ));
        } else if entity.key_attrs.is_empty() && identifying == 0 {
            report.push(Diagnostic::error(
                "ASSOCIATION_WITHOUT_KEY",
                format!("association `{}` has no identifying link", entity.name),
            ));
        }
    }

    for group in duplicate_groups(erm) {
        let names: Vec<&str> = group.iter().map(|&i| erm.direct_rels[i].name.as_str()).collect();
        report.push(Diagnostic::error(
            "DUPLICATE_RELATIONSHIP",
            format!("relationships {} are duplicates", names.join(", ")),
        ));
    }

    for link in &erm.links {
        if !erm.entity(&link.association).is_some_and(|e| e.is_association) {
            report.push(Diagnostic::error(
                "DANGLING_REFERENCE",
                format!("link `{}` belongs to unknown association `{}`", link.id, link.association),
            ));
        }
        if erm.entity(&link.target).is_none() {
            report.push(Diagnostic::error(
                "DANGLING_REFERENCE",
                format!("link `{}` targets unknown entity `{}`", link.id, link.target),
            ));
        }
    }
    for rel in &erm.direct_rels {
        for end in [&rel.a, &rel.b] {
            if erm.entity(end).is_none() {
                report.push(Diagnostic::error(
                    "DANGLING_REFERENCE",
                    format!("relationship `{}` references unknown entity `{end}`", rel.name),
                ));
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apm::atomicize;
    use crate::erm::{Attribute, Cardinality};
    use crate::parse::parse;
    use crate::translate::translate;
    use crate::Domain;

    fn raw(src: &str) -> ERModel {
        translate(&atomicize(&parse(src).unwrap())).unwrap()
    }

    fn rel(name: &str, a: &str, b: &str) -> DirectRelationship {
        DirectRelationship {
            name: name.into(),
            a: a.into(),
            b: b.into(),
            card_a: Cardinality::EXACTLY_ONE,
            card_b: Cardinality::ZERO_OR_MORE,
            role: None,
            provenance: vec![name.into()],
        }
    }

    const NESTED: &str = "model Nest\nindex A \"As\"\nindex B in A \"Bs\"\nvar x : real[B] hidden\n";

    #[test]
    fn hints_file() {
        let h = EquivalenceHints::parse("# c\nequivalent a b\n\nequivalent c d e # t\n").unwrap();
        assert_eq!(h.classes.len(), 2);
        assert_eq!(h.classes[1].len(), 3);
        assert!(!h.assume_all);
        assert!(EquivalenceHints::parse("equivalent a\n").is_err());
        assert!(EquivalenceHints::parse("equivalent a a\n").is_err());
        assert_eq!(
            EquivalenceHints::parse("x\nsame a b\n"),
            Err(HintsError::Syntax {
                line: 1,
                message: "expected `equivalent`, found `x`".into()
            })
        );
    }

    #[test]
    fn nested_association_merges_into_child() {
        let r = reduce(&raw(NESTED), &EquivalenceHints::none()).unwrap();
        let m = &r.model;
        assert!(m.associations().next().is_none());
        assert_eq!(m.entity("B").unwrap().attrs[0].name, "x");
        assert_eq!(m.direct_rels.len(), 1);
        let d = &m.direct_rels[0];
        assert_eq!((d.a.as_str(), d.b.as_str()), ("B", "A"));
        assert_eq!(d.card_a, Cardinality::EXACTLY_ONE);
        assert_eq!(d.card_b, Cardinality::ZERO_OR_MORE);
        assert_eq!(d.provenance, vec!["A-B.A"]);
        assert_eq!(m.stage, Stage::Reduced);
        assert!(r.report.is_empty());
    }

    #[test]
    fn two_identifying_links_survive() {
        let erm = raw("model X\nindex N \"As\"\nindex M \"Bs\"\nvar x : real[N, M] hidden\n");
        let r = reduce(&erm, &EquivalenceHints::none()).unwrap();
        assert!(r.model.entity("A-B").is_some());
        assert!(r.model.direct_rels.is_empty());
    }

    #[test]
    fn no_associations_is_fixpoint() {
        let erm = raw("model V\nindex N \"Objects\"\nvar x : real[N] hidden\n");
        let r = reduce(&erm, &EquivalenceHints::none()).unwrap();
        let mut expected = erm.clone();
        expected.stage = Stage::Reduced;
        assert_eq!(r.model, expected);
    }

    #[test]
    fn empty_artifact_is_deleted() {
        let mut erm = raw(NESTED);
        erm.entity_mut("A-B").unwrap().attrs.clear();
        erm.links.retain(|l| l.identifying);
        let r = reduce(&erm, &EquivalenceHints::none()).unwrap();
        assert_eq!(r.model.entities.len(), 2);
        assert!(r.model.direct_rels.is_empty());
    }

    #[test]
    fn attribute_clash_renames() {
        let mut erm = raw(NESTED);
        erm.entity_mut("B").unwrap().attrs.push(Attribute {
            name: "x".into(),
            domain: Domain::Int,
            source: "x_other".into(),
        });
        let r = reduce(&erm, &EquivalenceHints::none()).unwrap();
        assert!(r.report.contains_code("ATTR_RENAMED"));
        assert!(r.model.entity("B").unwrap().attr("a_b_x").is_some());
        assert_eq!(r.model.stage, Stage::Reduced);
    }

    fn two_parallel() -> ERModel {
        let mut erm = ERModel::new("Fig8", Stage::Raw);
        erm.direct_rels = vec![rel("R", "B", "A"), rel("S", "B", "A")];
        erm
    }

    #[test]
    fn duplicates_need_hints() {
        let r = reduce(&two_parallel(), &EquivalenceHints::none()).unwrap();
        assert_eq!(r.model.direct_rels.len(), 2);
        assert_eq!(r.report.codes(), vec!["UNRESOLVED_DUPLICATE"]);
        assert_eq!(r.model.stage, Stage::ReducedWithWarnings);
    }

    #[test]
    fn duplicates_merge_under_hint_or_assume_all() {
        for hints in [
            EquivalenceHints::none().class(["R", "S"]),
            EquivalenceHints::assume_all(),
        ] {
            let r = reduce(&two_parallel(), &hints).unwrap();
            assert_eq!(r.model.direct_rels.len(), 1);
            let merged = &r.model.direct_rels[0];
            assert_eq!(merged.name, "R+S");
            assert_eq!(merged.provenance, vec!["R", "S"]);
            assert!(r.report.is_empty());
        }
    }

    #[test]
    fn distinct_endpoints_untouched() {
        let mut erm = ERModel::new("x", Stage::Raw);
        erm.direct_rels = vec![rel("R", "B", "A"), rel("S", "B", "C")];
        let r = reduce(&erm, &EquivalenceHints::assume_all()).unwrap();
        assert_eq!(r.model.direct_rels.len(), 2);
    }

    #[test]
    fn hint_mismatch_and_unknown() {
        let mut erm = ERModel::new("x", Stage::Raw);
        erm.direct_rels = vec![rel("R", "B", "A"), rel("S", "B", "C")];
        assert!(matches!(
            reduce(&erm, &EquivalenceHints::none().class(["R", "S"])),
            Err(ReduceError::HintMismatch { .. })
        ));
        assert_eq!(
            reduce(&erm, &EquivalenceHints::none().class(["R", "Q"])),
            Err(ReduceError::UnknownRelationship { name: "Q".into() })
        );
    }

    #[test]
    fn hints_resolve_by_provenance_after_merge() {
        let hints = EquivalenceHints::none().class(["R", "S"]);
        let once = reduce(&two_parallel(), &hints).unwrap().model;
        let twice = reduce(&once, &hints).unwrap().model;
        assert_eq!(once, twice);
    }

    #[test]
    fn wellformed_flags() {
        let erm = raw(NESTED);
        assert_eq!(check_wellformed(&erm).codes(), vec!["DEGENERATE_ASSOCIATION"]);
        assert!(check_wellformed(&ERModel::new("e", Stage::Raw)).is_empty());

        let mut bad = two_parallel();
        bad.entities.push(crate::erm::EntityType {
            name: "A".into(),
            origin: crate::erm::Origin::Global,
            is_association: false,
            key_attrs: vec![],
            attrs: vec![Attribute {
                name: "b_id".into(),
                domain: Domain::Int,
                source: "b_id".into(),
            }],
        });
        let codes = check_wellformed(&bad).codes();
        assert!(codes.contains(&"FOREIGN_KEY_ATTRIBUTE"));
        assert!(codes.contains(&"DUPLICATE_RELATIONSHIP"));
        assert!(codes.contains(&"DANGLING_REFERENCE"));
    }
}

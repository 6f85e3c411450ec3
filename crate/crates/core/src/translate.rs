//! Rule-based translation of an atomic plate model into a raw ER model.
//!
//! Rules, applied in this order:
//!
//! 1. every plate becomes an entity type with an artificial key `ID`;
//! 2. every distinct plate intersection that holds an atom becomes an
//!    association entity with one identifying link per member plate
//!    (repeated plates give role-tagged links, i.e. a self-relationship);
//! 3. atoms become attributes of their plate's entity, of their
//!    intersection's association, or of the singleton `Global` entity;
//! 4. nesting: inside an association that also contains a nested plate, the
//!    link to the covering plate stops being identifying;
//! 5. one-hot: the link towards the summed-over plate stops being identifying
//!    and the constrained attribute is removed.
//!
//! Rules 4 and 5 only ever clear `identifying` flags, so they commute.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::apm::{Atom, AtomicPlateModel, Plate};
use crate::erm::{
    AssociationLink, Attribute, Cardinality, ERModel, EntityType, Origin, Stage, GLOBAL, ID,
};
use crate::error::TranslateError;

/// Link-adjusting rules that run after structure and attributes are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Nesting,
    Onehot,
}

/// Translates with the nesting rule followed by the one-hot rule.
pub fn translate(apm: &AtomicPlateModel) -> Result<ERModel, TranslateError> {
    translate_with(apm, &[Rule::Nesting, Rule::Onehot])
}

/// Builds entities, associations and attributes, then applies `rules` in the
/// given order. `&[Rule::Nesting]` yields the intermediate model in which
/// constrained attributes are still present.
pub fn translate_with(apm: &AtomicPlateModel, rules: &[Rule]) -> Result<ERModel, TranslateError> {
    let mut erm = ERModel::new(apm.name.clone(), Stage::Raw);
    let mut taken: HashSet<String> = HashSet::new();
    if apm.atoms.iter().any(|a| a.memberships.is_empty()) {
        taken.insert(GLOBAL.to_string());
    }

    for plate in &apm.plates {
        let mut entity = rule_entity_for_plate(plate);
        entity.name = unique_name(&entity.name, &mut taken);
        erm.entities.push(entity);
    }
    if taken.contains(GLOBAL) {
        erm.entities.push(EntityType {
            name: GLOBAL.to_string(),
            origin: Origin::Global,
            is_association: false,
            key_attrs: Vec::new(),
            attrs: Vec::new(),
        });
    }

    // Distinct membership multisets of size >= 2, keyed by plate positions.
    let mut intersections: BTreeMap<(usize, Vec<usize>), ()> = BTreeMap::new();
    for atom in &apm.atoms {
        let key = occurrence_key(apm, atom)?;
        if key.len() >= 2 {
            intersections.insert((key.len(), key), ());
        }
    }
    for (_, positions) in intersections.keys() {
        let members: Vec<&EntityType> = positions
            .iter()
            .map(|&p| {
                erm.entity_for_plate(&apm.plates[p].name)
                    .expect("entity exists for every plate")
            })
            .collect();
        let initials = association_initials(&members);
        let name = unique_name(&initials, &mut taken);
        let (entity, links) = rule_association_for_intersection(&name, &members);
        erm.entities.push(entity);
        erm.links.extend(links);
    }

    for atom in &apm.atoms {
        rule_attribute_placement(atom, &mut erm);
    }

    for rule in rules {
        match rule {
            Rule::Nesting => {
                for plate in &apm.plates {
                    if let Some(parent) = &plate.parent {
                        rule_nesting(&mut erm, &plate.name, parent, plate.nonempty);
                    }
                }
            }
            Rule::Onehot => {
                for atom in apm.atoms.iter().filter(|a| a.onehot_over.is_some()) {
                    rule_onehot(&mut erm, atom)?;
                }
            }
        }
    }

    if rules.contains(&Rule::Onehot) {
        for assoc in erm.associations() {
            if !erm.links_of(&assoc.name).any(|l| l.identifying) {
                return Err(TranslateError::NoIdentifyingLink {
                    association: assoc.name.clone(),
                });
            }
        }
    }

    erm.canonicalize();
    Ok(erm)
}

fn occurrence_key(apm: &AtomicPlateModel, atom: &Atom) -> Result<Vec<usize>, TranslateError> {
    let mut key = atom
        .member_occurrences()
        .into_iter()
        .map(|m| {
            apm.plate_index(m).ok_or_else(|| TranslateError::UnknownPlate {
                atom: atom.name.clone(),
                plate: m.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    key.sort_unstable();
    Ok(key)
}

fn unique_name(base: &str, taken: &mut HashSet<String>) -> String {
    let mut name = base.to_string();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}

/// Entity name for a plate label: last word singularized, words joined in
/// PascalCase. Falls back to the index-set name for an empty label.
pub fn entity_name_for(plate: &Plate) -> String {
    let words: Vec<&str> = plate
        .label
        .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .filter(|w| !w.is_empty())
        .collect();
    let Some((last, init)) = words.split_last() else {
        return plate.name.clone();
    };
    let mut out = String::new();
    for w in init {
        out.push_str(&capitalize(w));
    }
    out.push_str(&capitalize(&singularize(last)));
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn singularize(w: &str) -> String {
    let lower = w.to_ascii_lowercase();
    if lower.len() > 3 && lower.ends_with("ies") {
        format!("{}y", &w[..w.len() - 3])
    } else if lower.len() > 1 && lower.ends_with('s') && !lower.ends_with("ss") && !lower.ends_with("us") {
        w[..w.len() - 1].to_string()
    } else {
        w.to_string()
    }
}

fn association_initials(members: &[&EntityType]) -> String {
    members
        .iter()
        .map(|e| {
            e.name
                .chars()
                .find(|c| c.is_ascii_alphanumeric())
                .unwrap_or('X')
                .to_ascii_uppercase()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("-")
}

/// Snake-case form of an entity name, used for role names.
pub(crate) fn snake(name: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c.is_ascii_uppercase() {
            if prev_lower {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
            prev_lower = false;
        } else if c.is_ascii_alphanumeric() {
            out.push(c);
            prev_lower = true;
        } else {
            if !out.ends_with('_') && !out.is_empty() {
                out.push('_');
            }
            prev_lower = false;
        }
    }
    out.trim_end_matches('_').to_string()
}

/// Plate → entity type with the artificial key `ID`.
pub fn rule_entity_for_plate(plate: &Plate) -> EntityType {
    EntityType {
        name: entity_name_for(plate),
        origin: Origin::Plate {
            plate: plate.name.clone(),
        },
        is_association: false,
        key_attrs: vec![ID.to_string()],
        attrs: Vec::new(),
    }
}

/// Plate intersection → association entity plus one identifying link per
/// member. A member listed more than once (square matrix) yields
/// role-tagged links `<entity>_1`, `<entity>_2`, ...
pub fn rule_association_for_intersection(
    name: &str,
    members: &[&EntityType],
) -> (EntityType, Vec<AssociationLink>) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for m in members {
        *counts.entry(m.name.as_str()).or_default() += 1;
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let links = members
        .iter()
        .map(|m| {
            let role = (counts[m.name.as_str()] > 1).then(|| {
                let n = seen.entry(m.name.as_str()).or_default();
                *n += 1;
                format!("{}_{}", snake(&m.name), n)
            });
            AssociationLink {
                id: format!("{name}.{}", role.as_deref().unwrap_or(&m.name)),
                association: name.to_string(),
                target: m.name.clone(),
                identifying: true,
                role,
                card_target: Cardinality::ZERO_OR_MORE,
                card_assoc: Cardinality::EXACTLY_ONE,
            }
        })
        .collect();
    let entity = EntityType {
        name: name.to_string(),
        origin: Origin::Association {
            members: members
                .iter()
                .map(|m| m.plate().unwrap_or(&m.name).to_string())
                .collect(),
        },
        is_association: true,
        key_attrs: Vec::new(),
        attrs: Vec::new(),
    };
    (entity, links)
}

/// Places the atom's attribute by the number of surrounding plates: none →
/// `Global`, one → that plate's entity, more → the intersection's
/// association.
pub fn rule_attribute_placement(atom: &Atom, erm: &mut ERModel) {
    let occurrences = atom.member_occurrences();
    let owner = match occurrences.as_slice() {
        [] => GLOBAL.to_string(),
        [plate] => erm
            .entity_for_plate(plate)
            .map(|e| e.name.clone())
            .expect("entity exists for every plate"),
        many => {
            let mut wanted: Vec<&str> = many.to_vec();
            wanted.sort_unstable();
            erm.associations()
                .find(|e| match &e.origin {
                    Origin::Association { members } => {
                        let mut have: Vec<&str> = members.iter().map(String::as_str).collect();
                        have.sort_unstable();
                        have == wanted
                    }
                    _ => false,
                })
                .map(|e| e.name.clone())
                .expect("association exists for every realized intersection")
        }
    };
    let entity = erm.entity_mut(&owner).expect("owner exists");
    entity.attrs.push(Attribute {
        name: atom.source.clone(),
        domain: atom.domain,
        source: atom.name.clone(),
    });
}

/// Nested plates: in every association that contains both the child and the
/// parent entity, the parent links become non-identifying. With a nonempty
/// child the parent participates at least once.
pub fn rule_nesting(erm: &mut ERModel, child_plate: &str, parent_plate: &str, nonempty: bool) {
    let (Some(child), Some(parent)) = (
        erm.entity_for_plate(child_plate).map(|e| e.name.clone()),
        erm.entity_for_plate(parent_plate).map(|e| e.name.clone()),
    ) else {
        return;
    };
    let with_child: HashSet<String> = erm
        .links
        .iter()
        .filter(|l| l.target == child)
        .map(|l| l.association.clone())
        .collect();
    for link in erm
        .links
        .iter_mut()
        .filter(|l| l.target == parent && with_child.contains(&l.association))
    {
        link.identifying = false;
        if nonempty {
            link.card_target = Cardinality::ONE_OR_MORE;
        }
    }
}

/// One-hot constraint: the link towards the summed-over entity is no longer
/// identifying and the constrained attribute is dropped. Idempotent.
pub fn rule_onehot(erm: &mut ERModel, atom: &Atom) -> Result<(), TranslateError> {
    let Some(over) = atom.onehot_over.as_deref() else {
        return Ok(());
    };
    let fail = || TranslateError::OnehotWithoutIntersection {
        atom: atom.name.clone(),
        over: over.to_string(),
    };
    let target = erm
        .entity_for_plate(over)
        .map(|e| e.name.clone())
        .ok_or_else(fail)?;
    let owner = erm
        .entities
        .iter()
        .find(|e| e.attrs.iter().any(|a| a.source == atom.name))
        .filter(|e| e.is_association)
        .map(|e| e.name.clone())
        .ok_or_else(fail)?;
    if !erm
        .links
        .iter()
        .any(|l| l.association == owner && l.target == target)
    {
        return Err(fail());
    }
    // On a self pair the last role is demoted, so repeating the constraint
    // is a no-op.
    if let Some(link) = erm
        .links
        .iter_mut()
        .rev()
        .find(|l| l.association == owner && l.target == target)
    {
        link.identifying = false;
    }
    let entity = erm.entity_mut(&owner).expect("owner exists");
    entity.attrs.retain(|a| a.source != atom.name);
    Ok(())
}

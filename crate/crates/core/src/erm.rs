//! Entity-relationship models with min-max cardinalities.
//!
//! Relationships coming out of the translator are always expressed through
//! association entities: an association has one [`AssociationLink`] per
//! member plate, and identifying links compose its key. Only the reducer
//! creates [`DirectRelationship`]s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ast::Domain;

/// Name of the singleton entity holding attributes outside every plate.
pub const GLOBAL: &str = "Global";
/// Artificial key attribute of plate entities.
pub const ID: &str = "ID";

/// `(min, max)` participation; `max = None` is `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl Cardinality {
    pub const EXACTLY_ONE: Cardinality = Cardinality { min: 1, max: Some(1) };
    pub const ZERO_OR_MORE: Cardinality = Cardinality { min: 0, max: None };
    pub const ONE_OR_MORE: Cardinality = Cardinality { min: 1, max: None };

    pub fn new(min: u32, max: Option<u32>) -> Self {
        Self { min, max }
    }

    pub fn is_at_most_one(self) -> bool {
        self.max == Some(1)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "({},{})", self.min, max),
            None => write!(f, "({},N)", self.min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityParseError(String);

impl fmt::Display for CardinalityParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid cardinality `{}`, expected e.g. `(0,N)`", self.0)
    }
}

impl std::error::Error for CardinalityParseError {}

impl FromStr for Cardinality {
    type Err = CardinalityParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CardinalityParseError(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(err)?;
        let (min, max) = inner.split_once(',').ok_or_else(err)?;
        let min: u32 = min.trim().parse().map_err(|_| err())?;
        let max = match max.trim() {
            "N" | "n" | "*" => None,
            m => Some(m.parse::<u32>().map_err(|_| err())?),
        };
        if max.is_some_and(|m| m < min || m == 0) {
            return Err(err());
        }
        Ok(Cardinality { min, max })
    }
}

impl Serialize for Cardinality {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cardinality {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Origin {
    Plate { plate: String },
    Global,
    /// Member plates with multiplicity, in plate declaration order.
    Association { members: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub domain: Domain,
    /// Atom the attribute was translated from.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityType {
    pub name: String,
    pub origin: Origin,
    pub is_association: bool,
    /// Own key attributes. Associations start with none: their key comes
    /// from the identifying links.
    pub key_attrs: Vec<String>,
    pub attrs: Vec<Attribute>,
}

impl EntityType {
    pub fn plate(&self) -> Option<&str> {
        match &self.origin {
            Origin::Plate { plate } => Some(plate),
            _ => None,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&Attribute> {
        self.attrs.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationLink {
    /// `<association>.<target>`, or `<association>.<role>` for role links.
    pub id: String,
    pub association: String,
    pub target: String,
    /// Contributes the target's key to the association's key.
    pub identifying: bool,
    /// Distinguishes links of a self-relationship.
    pub role: Option<String>,
    /// Association instances per target instance.
    pub card_target: Cardinality,
    /// Target instances per association instance; always (1,1).
    pub card_assoc: Cardinality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectRelationship {
    pub name: String,
    pub a: String,
    pub b: String,
    /// `b` instances per `a` instance.
    pub card_a: Cardinality,
    /// `a` instances per `b` instance.
    pub card_b: Cardinality,
    /// Role of the `b` end, carried over from a self-relationship link.
    pub role: Option<String>,
    /// Ids of the association links this relationship was built from.
    pub provenance: Vec<String>,
}

impl DirectRelationship {
    /// Endpoint/cardinality signature, independent of orientation.
    pub fn signature(&self) -> ((&str, Cardinality), (&str, Cardinality)) {
        let x = (self.a.as_str(), self.card_a);
        let y = (self.b.as_str(), self.card_b);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Raw,
    Reduced,
    ReducedWithWarnings,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Reduced => "reduced",
            Stage::ReducedWithWarnings => "reduced-with-warnings",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ERModel {
    pub name: String,
    pub stage: Stage,
    pub entities: Vec<EntityType>,
    pub links: Vec<AssociationLink>,
    pub direct_rels: Vec<DirectRelationship>,
}

impl ERModel {
    pub fn new(name: impl Into<String>, stage: Stage) -> Self {
        Self {
            name: name.into(),
            stage,
            entities: Vec::new(),
            links: Vec::new(),
            direct_rels: Vec::new(),
        }
    }

    pub fn entity(&self, name: &str) -> Option<&EntityType> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn entity_mut(&mut self, name: &str) -> Option<&mut EntityType> {
        self.entities.iter_mut().find(|e| e.name == name)
    }

    /// Entity translated from the given plate.
    pub fn entity_for_plate(&self, plate: &str) -> Option<&EntityType> {
        self.entities.iter().find(|e| e.plate() == Some(plate))
    }

    pub fn associations(&self) -> impl Iterator<Item = &EntityType> {
        self.entities.iter().filter(|e| e.is_association)
    }

    pub fn plain_entities(&self) -> impl Iterator<Item = &EntityType> {
        self.entities.iter().filter(|e| !e.is_association)
    }

    pub fn links_of<'a>(&'a self, association: &'a str) -> impl Iterator<Item = &'a AssociationLink> {
        self.links.iter().filter(move |l| l.association == association)
    }

    pub fn relationship(&self, name: &str) -> Option<&DirectRelationship> {
        self.direct_rels.iter().find(|r| r.name == name)
    }

    /// Every (owner, attribute name, source atom) triple.
    pub fn attribute_triples(&self) -> Vec<(String, String, String)> {
        let mut out: Vec<_> = self
            .entities
            .iter()
            .flat_map(|e| {
                e.attrs
                    .iter()
                    .map(|a| (e.name.clone(), a.name.clone(), a.source.clone()))
            })
            .collect();
        out.sort();
        out
    }

    /// Sorts entities, links and relationships by name. Attribute order is
    /// left alone; it follows variable declaration order.
    pub fn canonicalize(&mut self) {
        self.entities.sort_by(|a, b| a.name.cmp(&b.name));
        self.links.sort_by(|a, b| a.id.cmp(&b.id));
        self.direct_rels.sort_by(|a, b| a.name.cmp(&b.name));
        for r in &mut self.direct_rels {
            r.provenance.sort();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_text() {
        assert_eq!(Cardinality::ZERO_OR_MORE.to_string(), "(0,N)");
        assert_eq!(Cardinality::EXACTLY_ONE.to_string(), "(1,1)");
        assert_eq!("(1,N)".parse::<Cardinality>().unwrap(), Cardinality::ONE_OR_MORE);
        assert_eq!(" ( 0 , 1 ) ".parse::<Cardinality>().unwrap(), Cardinality::new(0, Some(1)));
        for bad in ["", "(1)", "1,N", "(a,N)", "(2,1)", "(0,0)"] {
            assert!(bad.parse::<Cardinality>().is_err(), "{bad}");
        }
    }

    #[test]
    fn signature_ignores_orientation() {
        let r = DirectRelationship {
            name: "r".into(),
            a: "Token".into(),
            b: "Document".into(),
            card_a: Cardinality::EXACTLY_ONE,
            card_b: Cardinality::ONE_OR_MORE,
            role: None,
            provenance: vec![],
        };
        let mut s = r.clone();
        std::mem::swap(&mut s.a, &mut s.b);
        std::mem::swap(&mut s.card_a, &mut s.card_b);
        assert_eq!(r.signature(), s.signature());
    }
}

//! Plate-model syntax tree.
//!
//! A [`PlateModel`] is what the `.bpn` parser produces: index sets (one per
//! plate), variables with their dimensions, and the DAG edges of the network.
//! Every declaration and every name reference carries the [`Location`] it was
//! read from so that validation can point at the offending token.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: u32,
    pub col: u32,
}

impl Location {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A reference to another declaration by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameRef {
    pub name: String,
    pub loc: Location,
}

impl NameRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            loc: Location::default(),
        }
    }

    pub fn at(name: impl Into<String>, loc: Location) -> Self {
        Self {
            name: name.into(),
            loc,
        }
    }
}

/// An index set, drawn as one plate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    pub name: String,
    /// Display label, e.g. `"Documents"`. Empty when not given.
    pub label: String,
    /// The index set whose plate covers this one.
    pub parent: Option<NameRef>,
    /// Every instance of the parent holds at least one element of this set.
    pub nonempty: bool,
    pub loc: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Observed,
    Hidden,
    Hyper,
    Deterministic,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Observed => "observed",
            VarKind::Hidden => "hidden",
            VarKind::Hyper => "hyper",
            VarKind::Deterministic => "deterministic",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "observed" => VarKind::Observed,
            "hidden" => VarKind::Hidden,
            "hyper" => VarKind::Hyper,
            "deterministic" => VarKind::Deterministic,
            _ => return None,
        })
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Real,
    Bit,
    Int,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Real => "real",
            Domain::Bit => "bit",
            Domain::Int => "int",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "real" => Domain::Real,
            "bit" => Domain::Bit,
            "int" => Domain::Int,
            _ => return None,
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Opaque deterministic transform of a `def` variable. Never evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub expr: String,
    pub uses: Vec<NameRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Domain,
    /// Ordered dimensions; an index set may repeat (square matrix).
    pub dims: Vec<NameRef>,
    pub onehot_over: Option<NameRef>,
    pub transform: Option<Transform>,
    pub loc: Location,
}

impl Variable {
    pub fn dim_names(&self) -> impl Iterator<Item = &str> {
        self.dims.iter().map(|d| d.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: NameRef,
    pub dst: NameRef,
    pub loc: Location,
}

/// A Bayesian network in plate notation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlateModel {
    pub name: String,
    pub index_sets: Vec<IndexSet>,
    pub variables: Vec<Variable>,
    pub edges: Vec<Edge>,
}

impl PlateModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn index_set(&self, name: &str) -> Option<&IndexSet> {
        self.index_sets.iter().find(|i| i.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Renders the model in canonical `.bpn` form.
    ///
    /// Parsing the output yields an equal model up to source locations, and
    /// printing a parsed canonical source reproduces it byte for byte.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        out.push_str("model ");
        out.push_str(&self.name);
        out.push('\n');
        if !self.index_sets.is_empty() {
            out.push('\n');
        }
        for idx in &self.index_sets {
            out.push_str("index ");
            out.push_str(&idx.name);
            if let Some(parent) = &idx.parent {
                out.push_str(" in ");
                out.push_str(&parent.name);
            }
            if !idx.label.is_empty() {
                out.push_str(&format!(" \"{}\"", idx.label));
            }
            if idx.nonempty {
                out.push_str(" nonempty");
            }
            out.push('\n');
        }
        if !self.variables.is_empty() {
            out.push('\n');
        }
        for var in &self.variables {
            let head = if var.transform.is_some() { "def" } else { "var" };
            out.push_str(&format!("{head} {} : {}", var.name, var.domain));
            if !var.dims.is_empty() {
                let dims: Vec<&str> = var.dim_names().collect();
                out.push_str(&format!("[{}]", dims.join(", ")));
            }
            match &var.transform {
                Some(t) => {
                    out.push_str(" = ");
                    out.push_str(&t.expr);
                    if !t.uses.is_empty() {
                        let uses: Vec<&str> = t.uses.iter().map(|u| u.name.as_str()).collect();
                        out.push_str(&format!(" uses {}", uses.join(", ")));
                    }
                }
                None => {
                    out.push(' ');
                    out.push_str(var.kind.as_str());
                }
            }
            if let Some(over) = &var.onehot_over {
                out.push_str(" onehot over ");
                out.push_str(&over.name);
            }
            out.push('\n');
        }
        if !self.edges.is_empty() {
            out.push('\n');
        }
        for edge in &self.edges {
            out.push_str(&format!("edge {} -> {}\n", edge.src.name, edge.dst.name));
        }
        out
    }
}

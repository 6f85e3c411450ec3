//! Atomic plate models.
//!
//! Every variable of a plate model is split into a single scalar component
//! atom that sits inside the plates of its dimensions. Nested plates
//! contribute their ancestors, so a token-level variable also lives in the
//! document plate. Edges are dropped: once variables are split they no longer
//! describe conditional distributions.
//!
//! The representation is intensional: one atom per variable with a membership
//! set, never one node per index tuple.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::ast::{Domain, IndexSet, NameRef, PlateModel, Transform, VarKind, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plate {
    pub name: String,
    pub label: String,
    pub parent: Option<String>,
    pub nonempty: bool,
}

impl From<&IndexSet> for Plate {
    fn from(idx: &IndexSet) -> Self {
        Self {
            name: idx.name.clone(),
            label: idx.label.clone(),
            parent: idx.parent.as_ref().map(|p| p.name.clone()),
            nonempty: idx.nonempty,
        }
    }
}

/// Scalar component of a variable, e.g. `z_nmk`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    /// Variable the atom was split from.
    pub source: String,
    /// Plates surrounding the atom, ancestors before descendants.
    pub memberships: Vec<String>,
    pub kind: VarKind,
    pub domain: Domain,
    pub onehot_over: Option<String>,
    /// Set when an index set occurs more than once among the dims.
    #[serde(rename = "self")]
    pub is_self: bool,
    /// One entry per extra occurrence of a repeated index set.
    pub self_over: Vec<String>,
}

impl Atom {
    /// Plates with multiplicity: repeated index sets appear once per occurrence.
    pub fn member_occurrences(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.memberships.iter().map(String::as_str).collect();
        out.extend(self.self_over.iter().map(String::as_str));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AtomicPlateModel {
    pub name: String,
    /// Plates used by at least one atom, in declaration order.
    pub plates: Vec<Plate>,
    pub atoms: Vec<Atom>,
}

impl AtomicPlateModel {
    pub fn plate(&self, name: &str) -> Option<&Plate> {
        self.plates.iter().find(|p| p.name == name)
    }

    pub fn plate_index(&self, name: &str) -> Option<usize> {
        self.plates.iter().position(|p| p.name == name)
    }

    /// An APM never carries edges; kept as a method so callers can assert it.
    pub fn edge_count(&self) -> usize {
        0
    }

    /// Re-encodes the APM as a plate model of variables whose dims are the
    /// atoms' memberships. Transforms become opaque placeholders.
    pub fn to_plate_model(&self) -> PlateModel {
        let mut pm = PlateModel::new(self.name.clone());
        pm.index_sets = self
            .plates
            .iter()
            .map(|p| IndexSet {
                name: p.name.clone(),
                label: p.label.clone(),
                parent: p.parent.clone().map(NameRef::new),
                nonempty: p.nonempty,
                loc: Default::default(),
            })
            .collect();
        pm.variables = self
            .atoms
            .iter()
            .map(|a| {
                let mut dims: Vec<NameRef> = Vec::new();
                for m in &a.memberships {
                    let repeats = 1 + a.self_over.iter().filter(|s| *s == m).count();
                    dims.extend((0..repeats).map(|_| NameRef::new(m.clone())));
                }
                Variable {
                    name: a.source.clone(),
                    kind: a.kind,
                    domain: a.domain,
                    dims,
                    onehot_over: a.onehot_over.clone().map(NameRef::new),
                    transform: (a.kind == VarKind::Deterministic).then(|| Transform {
                        expr: "opaque".into(),
                        uses: Vec::new(),
                    }),
                    loc: Default::default(),
                }
            })
            .collect();
        pm
    }
}

/// Ordered closure: each dim preceded by its ancestors (root first), without
/// duplicates. Unknown names are kept as-is; parent cycles are cut.
pub(crate) fn closure_of<'a>(pm: &PlateModel, dims: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for dim in dims {
        let mut chain = vec![dim.to_string()];
        let mut seen: HashSet<String> = HashSet::from([dim.to_string()]);
        let mut cur = pm.index_set(dim);
        while let Some(parent) = cur.and_then(|i| i.parent.as_ref()) {
            if !seen.insert(parent.name.clone()) {
                break;
            }
            chain.push(parent.name.clone());
            cur = pm.index_set(&parent.name);
        }
        for name in chain.into_iter().rev() {
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}

/// `dims` plus every transitive parent under the index-set nesting relation.
pub fn membership_closure<'a>(
    dims: impl IntoIterator<Item = &'a str>,
    pm: &PlateModel,
) -> BTreeSet<String> {
    closure_of(pm, dims).into_iter().collect()
}

fn atom_name(source: &str, memberships: &[String], self_over: &[String]) -> String {
    if memberships.is_empty() {
        return source.to_string();
    }
    let mut subscript = String::new();
    for m in memberships {
        let repeats = 1 + self_over.iter().filter(|s| *s == m).count();
        for _ in 0..repeats {
            subscript.push_str(&m.to_lowercase());
        }
    }
    format!("{source}_{subscript}")
}

/// Converts a validated plate model into its atomic plate model.
///
/// Each variable, including deterministic `def` transforms, yields exactly
/// one atom; `pm` must pass [`crate::validate::validate`].
pub fn atomicize(pm: &PlateModel) -> AtomicPlateModel {
    let mut atoms = Vec::with_capacity(pm.variables.len());
    for var in &pm.variables {
        let memberships = closure_of(pm, var.dim_names());
        let mut self_over = Vec::new();
        let mut seen = HashSet::new();
        for dim in var.dim_names() {
            if !seen.insert(dim) {
                self_over.push(dim.to_string());
            }
        }
        self_over.sort_by_key(|s| memberships.iter().position(|m| m == s));
        atoms.push(Atom {
            name: atom_name(&var.name, &memberships, &self_over),
            source: var.name.clone(),
            kind: var.kind,
            domain: var.domain,
            onehot_over: var.onehot_over.as_ref().map(|o| o.name.clone()),
            is_self: !self_over.is_empty(),
            self_over,
            memberships,
        });
    }

    let used: HashSet<&str> = atoms
        .iter()
        .flat_map(|a| a.memberships.iter().map(String::as_str))
        .collect();
    let plates = pm
        .index_sets
        .iter()
        .filter(|i| used.contains(i.name.as_str()))
        .map(Plate::from)
        .collect();

    AtomicPlateModel {
        name: pm.name.clone(),
        plates,
        atoms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn closure_examples() {
        let pm = parse("model L\nindex N\nindex M in N\nindex K\n").unwrap();
        assert_eq!(membership_closure(["M"], &pm), set(&["M", "N"]));
        assert_eq!(membership_closure([], &pm), set(&[]));
        assert_eq!(membership_closure(["M", "K"], &pm), set(&["M", "N", "K"]));
        assert_eq!(closure_of(&pm, ["M", "K"]), vec!["N", "M", "K"]);
    }

    #[test]
    fn closure_is_idempotent_and_transitive() {
        let pm = parse("model L\nindex A\nindex B in A\nindex C in B\n").unwrap();
        let once = membership_closure(["C"], &pm);
        assert_eq!(once, set(&["A", "B", "C"]));
        let twice = membership_closure(once.iter().map(String::as_str), &pm);
        assert_eq!(once, twice);
    }

    #[test]
    fn vector() {
        let pm = parse("model V\nindex N \"Objects\"\nvar alpha : real hyper\nvar x : real[N] hidden\nedge alpha -> x\n").unwrap();
        let apm = atomicize(&pm);
        assert_eq!(apm.plates.len(), 1);
        assert_eq!(apm.atoms.len(), 2);
        assert_eq!(apm.atoms[0].name, "alpha");
        assert!(apm.atoms[0].memberships.is_empty());
        assert_eq!(apm.atoms[1].name, "x_n");
        assert_eq!(apm.atoms[1].memberships, vec!["N"]);
    }

    #[test]
    fn matrix() {
        let pm = parse("model X\nindex N\nindex M\nvar x : real[N, M] hidden\n").unwrap();
        let apm = atomicize(&pm);
        assert_eq!(apm.atoms[0].name, "x_nm");
        assert_eq!(apm.atoms[0].memberships, vec!["N", "M"]);
        assert!(!apm.atoms[0].is_self);
    }

    #[test]
    fn square_matrix_marks_self() {
        let pm = parse("model S\nindex N\nvar x : real[N, N] hidden\n").unwrap();
        let apm = atomicize(&pm);
        let x = &apm.atoms[0];
        assert_eq!(x.name, "x_nn");
        assert_eq!(x.memberships, vec!["N"]);
        assert!(x.is_self);
        assert_eq!(x.self_over, vec!["N"]);
        assert_eq!(x.member_occurrences(), vec!["N", "N"]);
    }

    #[test]
    fn unused_index_sets_are_not_plates() {
        let pm = parse("model U\nindex N\nindex Q\nvar x : real[N] hidden\n").unwrap();
        let apm = atomicize(&pm);
        assert_eq!(apm.plates.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), vec!["N"]);
    }

    #[test]
    fn nested_parent_becomes_used() {
        let pm = parse("model U\nindex N\nindex M in N\nvar x : real[M] hidden\n").unwrap();
        let apm = atomicize(&pm);
        assert_eq!(apm.plates.len(), 2);
        assert_eq!(apm.atoms[0].name, "x_nm");
    }

    #[test]
    fn reencoding_is_a_fixpoint() {
        let pm = parse("model L\nindex N\nindex M in N\nindex K\nvar z : bit[M, K] hidden onehot over K\nvar s : real[K, K] hidden\ndef y : real = f(z) uses z\n").unwrap();
        let apm = atomicize(&pm);
        assert_eq!(atomicize(&apm.to_plate_model()), apm);
    }
}

//! Structural validation of a parsed [`PlateModel`].
//!
//! Codes emitted:
//!
//! | code | severity | meaning |
//! |------|----------|---------|
//! | `DUPLICATE_NAME` | error | two declarations share a name |
//! | `UNDECLARED_INDEX` | error | dims, parent or `onehot over` names an unknown index set |
//! | `INDEX_CYCLE` | error | the `in <parent>` chain loops |
//! | `UNDECLARED_VARIABLE` | error | an edge or `uses` list names an unknown variable |
//! | `EDGE_CYCLE` | error | edges plus transform dependencies are not a DAG |
//! | `ONEHOT_NOT_BIT` | error | `onehot over` on a non-bit variable |
//! | `ONEHOT_NOT_IN_DIMS` | error | `onehot over` an index set that is not a dimension |
//! | `ONEHOT_WITHOUT_INTERSECTION` | error | one-hot variable lives in a single plate |
//! | `ONEHOT_EXHAUSTS_KEY` | error | constraint plus nesting leave the association without a key |
//! | `TRANSFORM_MISMATCH` | error | a transform on a non-deterministic variable or vice versa |
//! | `RESERVED_NAME` | error | a variable is named `ID` |
//! | `FOREIGN_KEY_NAME` | warning | a variable name looks like a foreign key (`*_id`) |
//! | `DUPLICATE_EDGE` | warning | the same edge is declared twice |

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::{Domain, Location, PlateModel, VarKind};
use crate::diag::{Diagnostic, ValidationReport};

/// Lists every violated invariant of `pm`. Pure; `pm` is not modified.
pub fn validate(pm: &PlateModel) -> ValidationReport {
    let mut report = ValidationReport::new();
    let indices: HashMap<&str, usize> = pm
        .index_sets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let variables: HashSet<&str> = pm.variables.iter().map(|v| v.name.as_str()).collect();

    check_duplicates(pm, &mut report);

    for idx in &pm.index_sets {
        if let Some(parent) = &idx.parent {
            if !indices.contains_key(parent.name.as_str()) {
                report.push(
                    Diagnostic::error(
                        "UNDECLARED_INDEX",
                        format!("parent index set `{}` is not declared", parent.name),
                    )
                    .at(parent.loc),
                );
            }
        }
    }
    let cyclic = cyclic_index_sets(pm, &indices);
    for idx in pm.index_sets.iter().filter(|i| cyclic.contains(i.name.as_str())) {
        report.push(
            Diagnostic::error(
                "INDEX_CYCLE",
                format!("index set `{}` is its own ancestor", idx.name),
            )
            .at(idx.loc),
        );
    }

    // One-hot plates seen so far per association (membership multiset).
    let mut onehots_by_members: BTreeMap<BTreeMap<String, usize>, BTreeSet<String>> = BTreeMap::new();
    for var in &pm.variables {
        let mut dims_ok = true;
        for dim in &var.dims {
            if !indices.contains_key(dim.name.as_str()) {
                dims_ok = false;
                report.push(
                    Diagnostic::error(
                        "UNDECLARED_INDEX",
                        format!(
                            "variable `{}` uses undeclared index set `{}`",
                            var.name, dim.name
                        ),
                    )
                    .at(dim.loc),
                );
            }
        }

        if var.name.eq_ignore_ascii_case("id") {
            report.push(
                Diagnostic::error(
                    "RESERVED_NAME",
                    format!("`{}` collides with the artificial key ID", var.name),
                )
                .at(var.loc),
            );
        } else if var.name.to_ascii_lowercase().ends_with("_id") {
            report.push(
                Diagnostic::warning(
                    "FOREIGN_KEY_NAME",
                    format!(
                        "variable `{}` looks like a foreign key; relationships are derived from plates",
                        var.name
                    ),
                )
                .at(var.loc),
            );
        }

        match (&var.transform, var.kind) {
            (Some(_), VarKind::Deterministic) | (None, VarKind::Observed | VarKind::Hidden | VarKind::Hyper) => {}
            (Some(_), kind) => report.push(
                Diagnostic::error(
                    "TRANSFORM_MISMATCH",
                    format!("`{}` has a transform but kind `{kind}`", var.name),
                )
                .at(var.loc),
            ),
            (None, _) => report.push(
                Diagnostic::error(
                    "TRANSFORM_MISMATCH",
                    format!("deterministic variable `{}` has no transform", var.name),
                )
                .at(var.loc),
            ),
        }
        if let Some(t) = &var.transform {
            for dep in &t.uses {
                if !variables.contains(dep.name.as_str()) {
                    report.push(
                        Diagnostic::error(
                            "UNDECLARED_VARIABLE",
                            format!(
                                "transform of `{}` uses undeclared variable `{}`",
                                var.name, dep.name
                            ),
                        )
                        .at(dep.loc),
                    );
                }
            }
        }

        let Some(over) = &var.onehot_over else {
            continue;
        };
        if !indices.contains_key(over.name.as_str()) {
            report.push(
                Diagnostic::error(
                    "UNDECLARED_INDEX",
                    format!("one-hot index set `{}` is not declared", over.name),
                )
                .at(over.loc),
            );
            continue;
        }
        if var.domain != Domain::Bit {
            report.push(
                Diagnostic::error(
                    "ONEHOT_NOT_BIT",
                    format!(
                        "`{}` has domain `{}`; one-hot constraints need `bit`",
                        var.name, var.domain
                    ),
                )
                .at(over.loc),
            );
        }
        if !var.dims.iter().any(|d| d.name == over.name) {
            report.push(
                Diagnostic::error(
                    "ONEHOT_NOT_IN_DIMS",
                    format!(
                        "`{}` is one-hot over `{}`, which is not one of its dimensions",
                        var.name, over.name
                    ),
                )
                .at(over.loc),
            );
            continue;
        }
        if !dims_ok || !cyclic.is_empty() {
            continue;
        }
        let members = membership_multiset(pm, var.dim_names());
        let size: usize = members.values().sum();
        if size < 2 {
            report.push(
                Diagnostic::error(
                    "ONEHOT_WITHOUT_INTERSECTION",
                    format!(
                        "`{}` lies only in plate `{}`; a one-hot constraint needs a plate intersection",
                        var.name, over.name
                    ),
                )
                .at(over.loc),
            );
        } else {
            let overs = onehots_by_members.entry(members.clone()).or_default();
            let before = identifying_after_rules(pm, &members, overs);
            overs.insert(over.name.clone());
            if before == 0 || identifying_after_rules(pm, &members, overs) > 0 {
                continue;
            }
            report.push(
                Diagnostic::error(
                    "ONEHOT_EXHAUSTS_KEY",
                    format!(
                        "one-hot over `{}` removes the last identifying plate of `{}`",
                        over.name, var.name
                    ),
                )
                .at(over.loc),
            );
        }
    }

    let mut seen_edges: HashSet<(&str, &str)> = HashSet::new();
    for edge in &pm.edges {
        for end in [&edge.src, &edge.dst] {
            if !variables.contains(end.name.as_str()) {
                report.push(
                    Diagnostic::error(
                        "UNDECLARED_VARIABLE",
                        format!("edge endpoint `{}` is not a declared variable", end.name),
                    )
                    .at(end.loc),
                );
            }
        }
        if !seen_edges.insert((edge.src.name.as_str(), edge.dst.name.as_str())) {
            report.push(
                Diagnostic::warning(
                    "DUPLICATE_EDGE",
                    format!("edge {} -> {} is declared twice", edge.src.name, edge.dst.name),
                )
                .at(edge.loc),
            );
        }
    }

    if let Some((name, loc)) = first_dependency_cycle(pm) {
        report.push(
            Diagnostic::error(
                "EDGE_CYCLE",
                format!("variable `{name}` depends on itself; the network must be acyclic"),
            )
            .at(loc),
        );
    }

    report
}

fn check_duplicates(pm: &PlateModel, report: &mut ValidationReport) {
    let mut seen: HashMap<&str, Location> = HashMap::new();
    let decls = pm
        .index_sets
        .iter()
        .map(|i| (i.name.as_str(), i.loc))
        .chain(pm.variables.iter().map(|v| (v.name.as_str(), v.loc)));
    for (name, loc) in decls {
        if let Some(first) = seen.get(name) {
            report.push(
                Diagnostic::error(
                    "DUPLICATE_NAME",
                    format!("`{name}` is already declared at {first}"),
                )
                .at(loc),
            );
        } else {
            seen.insert(name, loc);
        }
    }
}

fn cyclic_index_sets<'a>(pm: &'a PlateModel, indices: &HashMap<&str, usize>) -> HashSet<&'a str> {
    let mut cyclic = HashSet::new();
    for start in &pm.index_sets {
        let mut seen = HashSet::new();
        let mut cur = start;
        loop {
            if !seen.insert(cur.name.as_str()) {
                if cur.name == start.name {
                    cyclic.insert(start.name.as_str());
                }
                break;
            }
            match cur.parent.as_ref().and_then(|p| indices.get(p.name.as_str())) {
                Some(&i) => cur = &pm.index_sets[i],
                None => break,
            }
        }
    }
    cyclic
}

/// Multiset of plates surrounding a variable with the given dims: each dim
/// counted as often as it appears, plus each ancestor once.
pub(crate) fn membership_multiset<'a>(
    pm: &PlateModel,
    dims: impl Iterator<Item = &'a str>,
) -> BTreeMap<String, usize> {
    let dims: Vec<&str> = dims.collect();
    let mut members: BTreeMap<String, usize> = BTreeMap::new();
    for d in &dims {
        *members.entry(d.to_string()).or_default() += 1;
    }
    for name in crate::apm::closure_of(pm, dims.iter().copied()) {
        members.entry(name).or_insert(1);
    }
    members
}

/// Number of identifying links an association over `members` keeps after the
/// nesting rule and one-hot constraints over each plate in `onehots`. Several
/// constraints over the same plate demote a single link.
pub(crate) fn identifying_after_rules(
    pm: &PlateModel,
    members: &BTreeMap<String, usize>,
    onehots: &BTreeSet<String>,
) -> usize {
    let parents: HashSet<&str> = members
        .keys()
        .filter_map(|m| pm.index_set(m))
        .filter_map(|i| i.parent.as_ref())
        .map(|p| p.name.as_str())
        .collect();
    members
        .iter()
        .filter(|(name, _)| !parents.contains(name.as_str()))
        .map(|(name, count)| if onehots.contains(name) { count - 1 } else { *count })
        .sum()
}

/// Depth-first search over edges and transform dependencies.
fn first_dependency_cycle(pm: &PlateModel) -> Option<(String, Location)> {
    let mut succ: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in &pm.edges {
        succ.entry(e.src.name.as_str()).or_default().push(e.dst.name.as_str());
    }
    for v in &pm.variables {
        if let Some(t) = &v.transform {
            for dep in &t.uses {
                succ.entry(dep.name.as_str()).or_default().push(v.name.as_str());
            }
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();

    fn visit<'a>(
        node: &'a str,
        succ: &HashMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
    ) -> Option<&'a str> {
        match marks.get(node) {
            Some(Mark::Active) => return Some(node),
            Some(Mark::Done) => return None,
            None => {}
        }
        marks.insert(node, Mark::Active);
        for &next in succ.get(node).map(Vec::as_slice).unwrap_or_default() {
            if let Some(hit) = visit(next, succ, marks) {
                return Some(hit);
            }
        }
        marks.insert(node, Mark::Done);
        None
    }

    let mut roots: Vec<&str> = pm.variables.iter().map(|v| v.name.as_str()).collect();
    roots.extend(pm.edges.iter().map(|e| e.src.name.as_str()));
    for root in roots {
        if let Some(hit) = visit(root, &succ, &mut marks) {
            let loc = pm
                .edges
                .iter()
                .find(|e| e.dst.name == hit)
                .map(|e| e.loc)
                .or_else(|| pm.variable(hit).map(|v| v.loc))
                .unwrap_or_default();
            return Some((hit.to_string(), loc));
        }
    }
    None
}

//! Proptest strategies producing random, valid plate models as source text.
//!
//! Generated models use up to four index sets (optionally nested), up to six
//! variables with repeated dimensions, one-hot constraints, deterministic
//! transforms and acyclic edges. Candidates that fail validation are
//! rejected, so every value the strategy yields compiles.

pub mod sql;

use proptest::prelude::*;

use platec_core::{parse, validate, PlateModel};

const INDEX_NAMES: [&str; 4] = ["N", "M", "K", "V"];
const LABELS: [&str; 6] = ["Documents", "Tokens", "Topics", "Words", "Users", "Cells"];
const KINDS: [&str; 3] = ["hidden", "observed", "hyper"];
const DOMAINS: [&str; 3] = ["real", "int", "bit"];

#[derive(Debug, Clone)]
struct IndexPlan {
    parent: Option<usize>,
    label: Option<usize>,
    nonempty: bool,
}

#[derive(Debug, Clone)]
struct VarPlan {
    dims: Vec<usize>,
    kind: usize,
    domain: usize,
    onehot: Option<usize>,
    /// Deterministic variable computed from earlier variables.
    uses: Option<Vec<usize>>,
}

fn index_plan(i: usize) -> impl Strategy<Value = IndexPlan> {
    (
        prop::option::weighted(0.4, 0..i.max(1)),
        prop::option::weighted(0.8, 0..LABELS.len()),
        any::<bool>(),
    )
        .prop_map(move |(parent, label, nonempty)| IndexPlan {
            parent: parent.filter(|_| i > 0),
            label,
            nonempty,
        })
}

fn var_plan(n_idx: usize) -> impl Strategy<Value = VarPlan> {
    (
        prop::collection::vec(0..n_idx, 0..=3),
        0..KINDS.len(),
        0..DOMAINS.len(),
        prop::option::weighted(0.3, 0..3usize),
        prop::option::weighted(0.15, prop::collection::vec(0..6usize, 1..=2)),
    )
        .prop_map(|(dims, kind, domain, onehot, uses)| VarPlan {
            dims,
            kind,
            domain,
            onehot,
            uses,
        })
}

fn render(name: &str, indices: &[IndexPlan], vars: &[VarPlan], edges: &[(usize, usize)]) -> String {
    let mut out = format!("model {name}\n");
    for (i, plan) in indices.iter().enumerate() {
        out.push_str(&format!("index {}", INDEX_NAMES[i]));
        if let Some(p) = plan.parent {
            out.push_str(&format!(" in {}", INDEX_NAMES[p]));
        }
        if let Some(l) = plan.label {
            // repeated labels are legal; they exercise entity renaming
            out.push_str(&format!(" \"{}\"", LABELS[l]));
        }
        if plan.parent.is_some() && plan.nonempty {
            out.push_str(" nonempty");
        }
        out.push('\n');
    }
    for (v, plan) in vars.iter().enumerate() {
        let dims: Vec<&str> = plan.dims.iter().map(|&d| INDEX_NAMES[d]).collect();
        let dims = if dims.is_empty() {
            String::new()
        } else {
            format!("[{}]", dims.join(", "))
        };
        let mut deps_sorted: Vec<usize> = plan
            .uses
            .iter()
            .flatten()
            .copied()
            .filter(|&u| u < v)
            .collect();
        deps_sorted.sort_unstable();
        deps_sorted.dedup();
        let domain = if plan.onehot.is_some() { "bit" } else { DOMAINS[plan.domain] };
        if deps_sorted.is_empty() {
            out.push_str(&format!("var v{v} : {domain}{dims} {}", KINDS[plan.kind]));
        } else {
            let uses: Vec<String> = deps_sorted.iter().map(|u| format!("v{u}")).collect();
            out.push_str(&format!(
                "def v{v} : {domain}{dims} = f({}) uses {}",
                uses.join(", "),
                uses.join(", ")
            ));
        }
        if let Some(o) = plan.onehot {
            if let Some(&d) = plan.dims.get(o) {
                out.push_str(&format!(" onehot over {}", INDEX_NAMES[d]));
            }
        }
        out.push('\n');
    }
    let mut seen = Vec::new();
    for &(a, b) in edges {
        let (a, b) = (a.min(b), a.max(b));
        if a == b || b >= vars.len() || seen.contains(&(a, b)) {
            continue;
        }
        seen.push((a, b));
        out.push_str(&format!("edge v{a} -> v{b}\n"));
    }
    out
}

/// Source text of a random model that parses and validates without errors.
pub fn valid_model_source() -> impl Strategy<Value = String> {
    (1..=4usize)
        .prop_flat_map(|n_idx| {
            let indices: Vec<_> = (0..n_idx).map(index_plan).collect();
            (
                indices,
                prop::collection::vec(var_plan(n_idx), 1..=6),
                prop::collection::vec((0..6usize, 0..6usize), 0..6),
            )
        })
        .prop_map(|(indices, vars, edges)| render("Random", &indices, &vars, &edges))
        .prop_filter("model must validate", |src| match parse(src) {
            Ok(pm) => !validate(&pm).has_errors(),
            Err(_) => false,
        })
}

/// A random valid model, parsed.
pub fn valid_model() -> impl Strategy<Value = PlateModel> {
    valid_model_source().prop_map(|src| parse(&src).expect("filtered to parse"))
}

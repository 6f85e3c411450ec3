//! Rendered diagnostics for malformed and invalid models.

use platec_core::{parse, validate, Diagnostic};

fn rendered(src: &str) -> String {
    match parse(src) {
        Err(e) => Diagnostic::error(e.code(), e.message())
            .at(e.location())
            .render("m.bpn", false),
        Ok(pm) => validate(&pm).render("m.bpn", false),
    }
}

fn check(src: &str, expected: &str) {
    assert_eq!(rendered(src).trim_end(), expected, "source:\n{src}");
}

#[test]
fn unclosed_dimension_list() {
    check(
        "model M\nindex N\nvar x : real[N hidden\n",
        "m.bpn:3:16: error SYNTAX expected one of `,`, `]`, found `hidden`",
    );
}

#[test]
fn unknown_kind() {
    check(
        "model M\nindex N\nvar x : real[N] wobbly\n",
        "m.bpn:3:17: error SYNTAX expected one of `observed`, `hidden`, `hyper`, found `wobbly`",
    );
}

#[test]
fn duplicate_name_points_at_both_declarations() {
    check(
        "model M\nindex N\nvar N : real hidden\n",
        "m.bpn:3:5: error DUPLICATE_NAME `N` is already declared at 2:7",
    );
}

#[test]
fn undeclared_index() {
    check(
        "model M\nvar x : real[K] hidden\n",
        "m.bpn:2:14: error UNDECLARED_INDEX variable `x` uses undeclared index set `K`",
    );
}

#[test]
fn index_cycle_reports_every_member() {
    check(
        "model M\nindex N in M\nindex M in N\n",
        "m.bpn:2:1: error INDEX_CYCLE index set `N` is its own ancestor\n\
         m.bpn:3:1: error INDEX_CYCLE index set `M` is its own ancestor",
    );
}

#[test]
fn edge_cycle() {
    check(
        "model M\nvar a : real hidden\nvar b : real hidden\nedge a -> b\nedge b -> a\n",
        "m.bpn:5:1: error EDGE_CYCLE variable `a` depends on itself; the network must be acyclic",
    );
}

#[test]
fn onehot_needs_bits() {
    check(
        "model M\nindex N\nindex K\nvar z : real[N, K] hidden onehot over K\n",
        "m.bpn:4:39: error ONEHOT_NOT_BIT `z` has domain `real`; one-hot constraints need `bit`",
    );
}

#[test]
fn foreign_key_lookalike_is_a_warning() {
    let src = "model M\nvar word_id : int observed\n";
    check(
        src,
        "m.bpn:2:1: warning FOREIGN_KEY_NAME variable `word_id` looks like a foreign key; relationships are derived from plates",
    );
    assert!(validate(&parse(src).unwrap()).passes());
}

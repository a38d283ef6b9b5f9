//! Strategies shared by the property tests.

#![allow(dead_code)]

use apisync_core::model::{ParamKind, Parameter, ParameterList};
use proptest::prelude::*;

const DEFAULTS: &[&str] = &["None", "0", "'a'", "True", "(1, 2)", "[x, y]", "-1.5", "{'k': 1}"];
const ANNOTATIONS: &[&str] = &["int", "str", "Optional[int]", "Dict[str, int]", "'Tensor'"];

fn param(kind: ParamKind) -> impl Strategy<Value = Parameter> {
    let variadic = kind.is_variadic();
    (
        "[a-z][a-z0-9_]{0,7}",
        proptest::option::of(proptest::sample::select(ANNOTATIONS)),
        proptest::option::of(proptest::sample::select(DEFAULTS)),
    )
        .prop_map(move |(name, ann, default)| {
            let mut p = Parameter::new(name, kind);
            if let Some(a) = ann {
                p = p.with_annotation(a);
            }
            if let (Some(d), false) = (default, variadic) {
                p = p.with_default(d);
            }
            p
        })
}

/// Well-formed parameter lists covering every region.
pub fn param_list() -> impl Strategy<Value = ParameterList> {
    (
        prop::collection::vec(param(ParamKind::PositionalOnly), 0..3),
        prop::collection::vec(param(ParamKind::PositionalOrKeyword), 0..4),
        prop::collection::vec(param(ParamKind::VarPositional), 0..2),
        prop::collection::vec(param(ParamKind::KeywordOnly), 0..3),
        prop::collection::vec(param(ParamKind::VarKeyword), 0..2),
    )
        .prop_map(|(a, b, c, d, e)| {
            let mut params: Vec<Parameter> = a.into_iter().chain(b).chain(c).chain(d).chain(e).collect();
            // keep names unique without changing region order
            for (i, p) in params.iter_mut().enumerate() {
                p.name = format!("{}_{i}", p.name);
            }
            ParameterList::new(params).expect("strategy builds valid lists")
        })
}

/// Same list with every existing default replaced by another value.
pub fn revise_defaults(list: &ParameterList, salt: usize) -> ParameterList {
    let params = list
        .params()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut q = p.clone();
            if q.default_repr.is_some() {
                q.default_repr = Some(DEFAULTS[(i + salt) % DEFAULTS.len()].to_string());
            }
            q
        })
        .collect();
    ParameterList::new(params).unwrap()
}

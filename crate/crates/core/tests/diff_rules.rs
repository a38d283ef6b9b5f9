//! Update identification against the hand-classified fixture pair, plus
//! properties of the no-modification rules.

mod common;

use std::collections::BTreeMap;

use apisync_core::diff::{classify_update, detect_changes, diff_dumps, satisfies_rules, Classification, DEFAULT_THRESHOLD};
use apisync_core::model::{ApiKind, ApiSignature, ParamKind, Parameter, ParameterList, SignatureDump};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Expected {
    updates: BTreeMap<String, Vec<(String, Option<String>, Option<String>)>>,
    no_change: Vec<String>,
    only_in_legacy: Vec<String>,
    only_in_updated: Vec<String>,
    kind_changed: Vec<String>,
    near_matches: Vec<(String, String, String)>,
}

fn load(name: &str) -> SignatureDump {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/diff").join(name);
    SignatureDump::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixture_pair_matches_hand_table() {
    let legacy = load("legacy.json");
    let updated = load("updated.json");
    let expected: Expected =
        serde_json::from_str(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/diff/expected.json")).unwrap())
            .unwrap();
    let report = diff_dumps(&legacy, &updated, DEFAULT_THRESHOLD).unwrap();

    let got: BTreeMap<String, Vec<(String, Option<String>, Option<String>)>> = report
        .updates
        .iter()
        .map(|u| {
            let changes = u
                .changes
                .iter()
                .map(|c| {
                    let kind = serde_json::to_value(c.kind).unwrap().as_str().unwrap().to_string();
                    (kind, c.legacy_name.clone(), c.updated_name.clone())
                })
                .collect();
            (u.api_path.to_string(), changes)
        })
        .collect();
    assert_eq!(got, expected.updates);
    assert_eq!(report.unchanged_count, expected.no_change.len());
    let strs = |v: &[apisync_core::model::DottedPath]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    assert_eq!(strs(&report.apis_only_in_legacy), expected.only_in_legacy);
    assert_eq!(strs(&report.apis_only_in_updated), expected.only_in_updated);
    assert_eq!(strs(&report.kind_changed), expected.kind_changed);
    assert!(report.check_partition(&legacy, &updated));
    for path in &expected.no_change {
        assert!(!got.contains_key(path), "{path} must not be reported");
    }

    let near: Vec<(String, String, String)> = report
        .updates
        .iter()
        .flat_map(|u| u.near_matches.iter().map(|m| (u.api_path.to_string(), m.legacy_name.clone(), m.updated_name.clone())))
        .collect();
    assert_eq!(near, expected.near_matches);

    // every change kind is exercised by the fixture
    let kinds: std::collections::BTreeSet<&str> = expected.updates.values().flatten().map(|c| c.0.as_str()).collect();
    assert_eq!(kinds.len(), 6);
}

#[test]
fn update_record_serialization() {
    let legacy = ApiSignature::parse("m.f", ApiKind::Function, &["(x, y=1)"]).unwrap();
    let updated = ApiSignature::parse("m.f", ApiKind::Function, &["(x, y=1, z=None)"]).unwrap();
    let Classification::Updated(rec) = classify_update(&legacy, &updated, DEFAULT_THRESHOLD).unwrap() else {
        panic!("expected an update");
    };
    let json = serde_json::to_value(&rec).unwrap();
    assert_eq!(json["legacy_sig"], "(x, y=1)");
    assert_eq!(json["updated_sig"], "(x, y=1, z=None)");
    assert_eq!(json["changes"][0]["kind"], "parameter_added");
    assert!(json.get("near_matches").is_none());
}

#[test]
fn overloads_match_if_any_pair_satisfies_rules() {
    let legacy = ApiSignature::parse("m.f", ApiKind::Function, &["(x)", "(x, y)"]).unwrap();
    let updated = ApiSignature::parse("m.f", ApiKind::Function, &["(x, y)", "(x, y, z=0)"]).unwrap();
    assert_eq!(classify_update(&legacy, &updated, DEFAULT_THRESHOLD).unwrap(), Classification::NoChange);
}

fn with_extra(list: &ParameterList, p: Parameter) -> Option<ParameterList> {
    let mut params = list.params().to_vec();
    let at = params.iter().position(|q| q.kind > p.kind).unwrap_or(params.len());
    params.insert(at, p);
    ParameterList::new(params).ok()
}

proptest! {
    #[test]
    fn default_only_revision_is_never_an_update(list in common::param_list(), salt in 0usize..8) {
        let revised = common::revise_defaults(&list, salt);
        prop_assert!(satisfies_rules(&list, &revised, DEFAULT_THRESHOLD).unwrap());
        let (changes, _) = detect_changes(&list, &revised, DEFAULT_THRESHOLD).unwrap();
        prop_assert!(changes.is_empty());
        let l = ApiSignature::new("m.f".parse().unwrap(), ApiKind::Function, vec![list]).unwrap();
        let u = ApiSignature::new("m.f".parse().unwrap(), ApiKind::Function, vec![revised]).unwrap();
        prop_assert_eq!(classify_update(&l, &u, DEFAULT_THRESHOLD).unwrap(), Classification::NoChange);
    }

    #[test]
    fn rules_are_symmetric(a in common::param_list(), b in common::param_list()) {
        prop_assert_eq!(
            satisfies_rules(&a, &b, DEFAULT_THRESHOLD).unwrap(),
            satisfies_rules(&b, &a, DEFAULT_THRESHOLD).unwrap()
        );
        let (ab, _) = detect_changes(&a, &b, DEFAULT_THRESHOLD).unwrap();
        let (ba, _) = detect_changes(&b, &a, DEFAULT_THRESHOLD).unwrap();
        prop_assert_eq!(ab.len(), ba.len());
        prop_assert_eq!(ab.is_empty(), satisfies_rules(&a, &b, DEFAULT_THRESHOLD).unwrap() && ba.is_empty());
    }

    #[test]
    fn adding_a_named_parameter_is_detected(list in common::param_list(), optional in any::<bool>()) {
        let mut p = Parameter::new("zz_added", ParamKind::KeywordOnly);
        if optional {
            p = p.with_default("None");
        }
        if let Some(grown) = with_extra(&list, p) {
            prop_assert!(!satisfies_rules(&list, &grown, DEFAULT_THRESHOLD).unwrap());
            let (changes, _) = detect_changes(&list, &grown, DEFAULT_THRESHOLD).unwrap();
            prop_assert!(changes.iter().any(|c| c.updated_name.as_deref() == Some("zz_added")));
        }
    }

    #[test]
    fn identity_has_no_changes(list in common::param_list()) {
        prop_assert!(satisfies_rules(&list, &list, DEFAULT_THRESHOLD).unwrap());
        prop_assert!(detect_changes(&list, &list, DEFAULT_THRESHOLD).unwrap().0.is_empty());
    }
}

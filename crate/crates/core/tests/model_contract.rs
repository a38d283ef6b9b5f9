//! Canonical signature text and the signature dump interchange format.

mod common;

use apisync_core::model::{parse_signature_text, ApiKind, DumpError, SignatureDump};
use proptest::prelude::*;

proptest! {
    #[test]
    fn parse_render_identity(list in common::param_list()) {
        let text = list.render();
        let parsed = parse_signature_text(&text).unwrap();
        prop_assert_eq!(&parsed, &list);
        prop_assert_eq!(parsed.render(), text);
    }

    #[test]
    fn whitespace_is_not_significant(list in common::param_list()) {
        // the textual rewrite below must only touch separators
        let has_comma = |s: &Option<String>| s.as_deref().is_some_and(|t| t.contains(','));
        prop_assume!(!list.params().iter().any(|p| has_comma(&p.default_repr) || has_comma(&p.annotation_repr)));
        let spaced = list.render().replace(", ", " ,  ").replace('=', " = ");
        prop_assert_eq!(parse_signature_text(&spaced).unwrap(), list);
    }
}

#[test]
fn canonical_rendering_examples() {
    let cases = [
        ("(state_dict, strict=True, assign=False)", "(state_dict, strict=True, assign=False)"),
        ("(a,b , /, c=1)", "(a, b, /, c=1)"),
        ("(x, *, y)", "(x, *, y)"),
        ("(*args, key=None, **kwargs)", "(*args, key=None, **kwargs)"),
        ("(x: int = 3, y: Dict[str, int]={})", "(x: int=3, y: Dict[str, int]={})"),
        ("()", "()"),
    ];
    for (input, canonical) in cases {
        assert_eq!(parse_signature_text(input).unwrap().render(), canonical, "{input}");
    }
    let list = parse_signature_text("(state_dict, strict=True, assign=False)").unwrap();
    assert_eq!(list.len(), 3);
    assert_eq!(list.params().iter().filter(|p| p.required()).count(), 1);
}

#[test]
fn malformed_signatures_are_rejected() {
    for bad in ["x, y", "(x, x)", "(*, )", "(a, /, /)", "(*a, *b)", "(x=)", "(1x)", "(**kw, y)", "(,)"] {
        assert!(parse_signature_text(bad).is_err(), "{bad}");
    }
}

const DUMP: &str = r#"{
  "library": "toylib",
  "version": "0.3.1",
  "apis": {
    "toylib.core.run": {"kind": "function", "overloads": ["(job, *, retries=3)"]},
    "toylib.core.Runner.__init__": {"kind": "initializer", "overloads": ["(workers=1)"]},
    "toylib.core.Runner.submit": {"kind": "method", "overloads": ["(job)", "(job, priority)"]}
  }
}"#;

#[test]
fn dump_schema_round_trips() {
    let dump = SignatureDump::from_json(DUMP).unwrap();
    assert_eq!(dump.library, "toylib");
    assert_eq!(dump.version, "0.3.1");
    assert_eq!(dump.apis.len(), 3);
    let init = &dump.apis[&"toylib.core.Runner".parse().unwrap()];
    assert_eq!(init.kind, ApiKind::Initializer);
    let submit = &dump.apis[&"toylib.core.Runner.submit".parse().unwrap()];
    assert_eq!(submit.overloads.len(), 2);
    assert_eq!(submit.owning_class().unwrap().to_string(), "toylib.core.Runner");

    let again = SignatureDump::from_json(&dump.to_json()).unwrap();
    assert_eq!(again, dump);
    let value: serde_json::Value = serde_json::from_str(&dump.to_json()).unwrap();
    assert_eq!(value["apis"]["toylib.core.run"]["overloads"][0], "(job, *, retries=3)");
    assert_eq!(value["apis"]["toylib.core.Runner"]["kind"], "initializer");
}

#[test]
fn dump_schema_violations_are_errors() {
    let foreign = DUMP.replace("toylib.core.run", "other.run");
    assert!(matches!(SignatureDump::from_json(&foreign), Err(DumpError::ForeignApi { .. })));
    let bad_kind = DUMP.replace("\"function\"", "\"property\"");
    assert!(SignatureDump::from_json(&bad_kind).is_err());
    let bad_sig = DUMP.replace("(job)", "(job");
    assert!(SignatureDump::from_json(&bad_sig).is_err());
    let missing = r#"{"library": "toylib", "apis": {}}"#;
    assert!(SignatureDump::from_json(missing).is_err());
}

#[test]
fn committed_dump_fixtures_validate() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for rel in ["mini/minilib-1.0.json", "mini/minilib-2.0.json", "diff/legacy.json", "diff/updated.json"] {
        let text = std::fs::read_to_string(root.join(rel)).unwrap();
        let dump = SignatureDump::from_json(&text).unwrap_or_else(|e| panic!("{rel}: {e}"));
        for api in dump.apis.values() {
            for o in &api.overloads {
                assert_eq!(&parse_signature_text(&o.render()).unwrap(), o);
            }
        }
    }
}

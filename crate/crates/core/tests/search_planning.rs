//! Query templates and search planning over a local corpus.

use apisync_core::model::{ApiKind, DottedPath};
use apisync_core::search::{enumerate_templates, plan_search, LocalCorpusBackend, RetryPolicy};
use proptest::prelude::*;

#[test]
fn softmax_templates_in_order() {
    let path: DottedPath = "torch.nn.functional.softmax".parse().unwrap();
    let rendered: Vec<String> = enumerate_templates(&path, ApiKind::Function)
        .unwrap()
        .iter()
        .map(|t| t.segments.join(" ... "))
        .collect();
    assert_eq!(
        rendered,
        [
            "torch.nn.functional.softmax",
            "import torch as ... .nn.functional.softmax",
            "from torch import nn ... .functional.softmax",
            "import torch.nn as ... .functional.softmax",
            "from torch.nn import functional ... .softmax",
            "import torch.nn.functional as ... .softmax",
            "from torch.nn.functional import softmax",
        ]
    );
}

#[test]
fn method_templates_carry_call_suffix() {
    let path: DottedPath = "torch.Tensor.shape".parse().unwrap();
    let t = enumerate_templates(&path, ApiKind::Method).unwrap();
    assert_eq!(t.len(), 3);
    assert!(t.iter().all(|t| t.segments.iter().any(|s| s.contains(".shape("))));
}

fn dotted() -> impl Strategy<Value = DottedPath> {
    prop::collection::vec("[a-z_][a-z0-9_]{0,5}", 2..7).prop_map(|f| DottedPath::new(f).unwrap())
}

proptest! {
    #[test]
    fn template_count_follows_path_length(path in dotted()) {
        let n = path.len();
        let f = enumerate_templates(&path, ApiKind::Function).unwrap();
        prop_assert_eq!(f.len(), 2 * n - 1);
        prop_assert_eq!(f.len(), enumerate_templates(&path, ApiKind::Initializer).unwrap().len());
        // the first template is the full path and the last a single from-import
        prop_assert_eq!(&f[0].segments, &vec![path.to_string()]);
        prop_assert_eq!(f.last().unwrap().segments.len(), 1);
        let m = enumerate_templates(&path, ApiKind::Method);
        if n >= 3 {
            let m = m.unwrap();
            prop_assert_eq!(m.len(), 2 * (n - 1) - 1);
            let call = format!(".{}(", path.last());
            prop_assert!(m.iter().all(|t| t.segments.last() == Some(&call)));
        } else {
            prop_assert!(m.is_err());
        }
    }

    #[test]
    fn every_template_matches_its_own_usage(path in dotted()) {
        // a file written in the style of each template is found by it
        for t in enumerate_templates(&path, ApiKind::Function).unwrap() {
            let file = t.segments.join(" x\nx");
            prop_assert!(t.matches(&file));
        }
    }
}

#[test]
fn plan_over_local_corpus_attributes_first_template() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.py"), "import numpy as np\nnp.full(1, 2)\n").unwrap();
    std::fs::write(dir.path().join("b.py"), "from numpy import full\nfull(1, 2)\n").unwrap();
    std::fs::write(dir.path().join("c.py"), "import numpy\nnumpy.full(1, 2)\n").unwrap();
    std::fs::write(dir.path().join("d.txt"), "numpy.full").unwrap();
    let backend = LocalCorpusBackend::open(dir.path()).unwrap();
    let path: DottedPath = "numpy.full".parse().unwrap();
    let outcome = plan_search([(&path, ApiKind::Function)], &backend, 10, &RetryPolicy::default()).unwrap();
    let files = &outcome.files[&path];
    let got: Vec<(&str, usize)> = files.iter().map(|f| (f.source_id.as_str(), f.template_index)).collect();
    assert_eq!(got, vec![("c.py", 0), ("a.py", 1), ("b.py", 2)]);
    assert!(outcome.failures.is_empty());

    // the cap bounds each template's result, not the per-API union
    std::fs::write(dir.path().join("e.py"), "import numpy\nnumpy.full(3, 4)\n").unwrap();
    std::fs::write(dir.path().join("f.py"), "import numpy\nnumpy.full(5, 6)\n").unwrap();
    let backend = LocalCorpusBackend::open(dir.path()).unwrap();
    let capped = plan_search([(&path, ApiKind::Function)], &backend, 2, &RetryPolicy::default()).unwrap();
    let got: Vec<(&str, usize)> = capped.files[&path].iter().map(|f| (f.source_id.as_str(), f.template_index)).collect();
    assert_eq!(got, vec![("c.py", 0), ("e.py", 0), ("a.py", 1), ("b.py", 2)]);
}

//! Benchmark and training-set construction from validated pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arglist::{parse_argument_list, Argument, ArgumentList};
use crate::locate::MetadataItem;
use crate::model::{ApiSignature, DottedPath};
use crate::synth::{ClientError, GenerationClient};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("split counts are inconsistent: per_api {per_api} != train {train} + test {test}")]
    InvalidCounts { per_api: usize, train: usize, test: usize },
    #[error("{api}: no two distinct distractors could be derived from `{updated_code}`")]
    DistractorExhausted { api: String, updated_code: String },
    #[error("{api}: multiple-choice options are not pairwise distinct")]
    DuplicateOption { api: String },
    #[error("{api}: answer `{code}` is not an argument list")]
    MalformedAnswer { api: String, code: String },
}

/// A validated legacy/updated invocation pair with its origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub api_path: DottedPath,
    pub metadata: MetadataItem,
    pub updated_code: String,
    pub outdated_code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub per_api: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self { per_api: 15, train: 10, test: 5 }
    }
}

impl SplitCounts {
    pub fn check(&self) -> Result<(), BenchError> {
        if self.per_api != self.train + self.test || self.per_api == 0 {
            return Err(BenchError::InvalidCounts { per_api: self.per_api, train: self.train, test: self.test });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: BTreeMap<DottedPath, Vec<PairRecord>>,
    pub test: BTreeMap<DottedPath, Vec<PairRecord>>,
    /// APIs with too few instances, with their instance counts.
    pub dropped: Vec<(DottedPath, usize)>,
}

fn derived_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("digest has 32 bytes"))
}

/// Drop APIs with fewer than `per_api` pairs, sample `per_api` of each
/// remaining API and partition the sample into train and test.
pub fn sample_and_split(
    pairs: &BTreeMap<DottedPath, Vec<PairRecord>>,
    counts: SplitCounts,
    seed: u64,
) -> Result<SplitAssignment, BenchError> {
    counts.check()?;
    let mut split = SplitAssignment::default();
    for (api, records) in pairs {
        if records.len() < counts.per_api {
            split.dropped.push((api.clone(), records.len()));
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, &[&api.to_string()]));
        let picked = rand::seq::index::sample(&mut rng, records.len(), counts.per_api).into_vec();
        let (train, test) = picked.split_at(counts.train);
        let take = |idx: &[usize]| {
            let mut idx = idx.to_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| records[i].clone()).collect::<Vec<_>>()
        };
        split.train.insert(api.clone(), take(train));
        split.test.insert(api.clone(), take(test));
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskItem {
    #[serde(rename = "API_path")]
    pub api_path: DottedPath,
    pub question: String,
    pub answer: String,
}

/// Code completion: the context up to the callee; answer the updated call.
pub fn make_cct(pair: &PairRecord) -> TaskItem {
    TaskItem {
        api_path: pair.api_path.clone(),
        question: pair.metadata.code_context.clone(),
        answer: pair.updated_code.clone(),
    }
}

/// Error correction: the context followed by the outdated call.
pub fn make_ect(pair: &PairRecord) -> TaskItem {
    TaskItem {
        api_path: pair.api_path.clone(),
        question: format!("{}{}", pair.metadata.code_context, pair.outdated_code),
        answer: pair.updated_code.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqItem {
    #[serde(rename = "API_path")]
    pub api_path: DottedPath,
    pub question: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "D")]
    pub d: String,
    pub answer: String,
}

impl McqItem {
    pub fn options(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn option(&self, letter: char) -> Option<&str> {
        let idx = "ABCD".find(letter.to_ascii_uppercase())?;
        Some(self.options()[idx])
    }
}

/// Plausible keyword names for fabricated distractor parameters, keyed by
/// a fragment of an existing parameter name. The fallback row applies to
/// any signature.
const FABRICATED: &[(&str, &[(&str, &str)])] = &[
    ("dim", &[("keepdim", "True"), ("axis", "0")]),
    ("axis", &[("keepdims", "True"), ("dim", "0")]),
    ("dtype", &[("copy", "False"), ("casting", "'unsafe'")]),
    ("path", &[("encoding", "'utf-8'"), ("mode", "'r'")]),
    ("file", &[("encoding", "'utf-8'"), ("indent", "4")]),
    ("fp", &[("indent", "4"), ("sort_keys", "True")]),
    ("lr", &[("momentum", "0.9"), ("weight_decay", "0.0")]),
    ("size", &[("align_corners", "False"), ("antialias", "True")]),
    ("index", &[("inplace", "True"), ("drop", "True")]),
    ("", &[("inplace", "True"), ("verbose", "False"), ("device", "None"), ("strict", "True")]),
];

/// Replacement names for keyword renames and positional-to-keyword rewrites.
const RENAMES: &[(&str, &str)] = &[
    ("dim", "axis"),
    ("axis", "dim"),
    ("input", "x"),
    ("x", "input"),
    ("obj", "data"),
    ("data", "obj"),
    ("fp", "file"),
    ("file", "fp"),
    ("size", "shape"),
    ("shape", "size"),
    ("keepdim", "keepdims"),
    ("keepdims", "keepdim"),
];

const GENERIC_NAMES: &[&str] = &["z", "value", "data", "obj", "x"];

fn canonical(api: &str, code: &str) -> Result<String, BenchError> {
    parse_argument_list(code)
        .map(|l| l.render())
        .map_err(|_| BenchError::MalformedAnswer { api: api.to_string(), code: code.to_string() })
}

fn value_for(name: &str, default: Option<&str>) -> String {
    match default {
        Some(d) if d != "None" => d.to_string(),
        _ => name.to_string(),
    }
}

/// Candidate perturbations of `updated_code`, grouped by approach:
/// remove an optional argument, add a stale or fabricated keyword,
/// permute positional arguments, rename a keyword.
pub fn distractor_candidates(
    pair: &PairRecord,
    legacy: &ApiSignature,
    updated: &ApiSignature,
) -> Result<[Vec<String>; 4], BenchError> {
    let api = pair.api_path.to_string();
    let call = parse_argument_list(&pair.updated_code)
        .map_err(|_| BenchError::MalformedAnswer { api: api.clone(), code: pair.updated_code.clone() })?;
    let sig = &updated.overloads[0];
    let known: BTreeSet<&str> = updated
        .overloads
        .iter()
        .flat_map(|o| o.params().iter().map(|p| p.name.as_str()))
        .collect();
    let used: BTreeSet<&str> = call.keywords().map(|(k, _)| k).collect();
    let positional_names: Vec<&str> = sig
        .params()
        .iter()
        .filter(|p| p.kind.is_positional() && !p.kind.is_variadic())
        .map(|p| p.name.as_str())
        .collect();
    let with = |args: Vec<Argument>| ArgumentList::new(args).render();
    let mut out: [Vec<String>; 4] = Default::default();

    // 1: drop an optional argument
    for (i, arg) in call.args.iter().enumerate() {
        let optional = match arg {
            Argument::Keyword { name, .. } => sig.get(name).map_or(true, |p| !p.required()),
            Argument::Positional(_) => {
                let pos = call.args[..i].iter().filter(|a| a.is_positional()).count();
                positional_names.get(pos).and_then(|n| sig.get(n)).map_or(false, |p| !p.required())
            }
            _ => false,
        };
        if optional {
            let mut args = call.args.clone();
            args.remove(i);
            out[0].push(with(args));
        }
    }

    // 2: add a keyword the updated signature does not define
    let mut additions: Vec<(String, String)> = Vec::new();
    for p in legacy.overloads.iter().flat_map(|o| o.params()) {
        if !p.kind.is_variadic() && p.kind.accepts_keyword() && !known.contains(p.name.as_str()) {
            additions.push((p.name.clone(), value_for(&p.name, p.default_repr.as_deref())));
        }
    }
    for (fragment, names) in FABRICATED {
        if fragment.is_empty() || known.iter().any(|k| k.contains(fragment)) {
            for (name, value) in names.iter() {
                if !known.contains(name) {
                    additions.push((name.to_string(), value.to_string()));
                }
            }
        }
    }
    for (name, value) in additions {
        if used.contains(name.as_str()) {
            continue;
        }
        let mut args = call.args.clone();
        let at = args.iter().position(|a| matches!(a, Argument::UnpackMap(_))).unwrap_or(args.len());
        args.insert(at, Argument::keyword(name, value));
        out[1].push(with(args));
    }

    // 3: swap two positional arguments
    let slots: Vec<usize> = (0..call.args.len()).filter(|&i| call.args[i].is_positional()).collect();
    for (x, &i) in slots.iter().enumerate() {
        for &j in &slots[x + 1..] {
            if call.args[i] != call.args[j] {
                let mut args = call.args.clone();
                args.swap(i, j);
                out[2].push(with(args));
            }
        }
    }

    // 4: rename a keyword, or pass a positional under a wrong name
    let rename = |name: &str| -> Vec<String> {
        let mut names: Vec<String> =
            RENAMES.iter().filter(|(from, _)| *from == name).map(|(_, to)| to.to_string()).collect();
        names.extend(GENERIC_NAMES.iter().map(|n| n.to_string()));
        names.retain(|n| n != name && !known.contains(n.as_str()) && !used.contains(n.as_str()));
        names
    };
    for (i, arg) in call.args.iter().enumerate() {
        match arg {
            Argument::Keyword { name, value } => {
                for new in rename(name).into_iter().take(2) {
                    let mut args = call.args.clone();
                    args[i] = Argument::keyword(new, value.clone());
                    out[3].push(with(args));
                }
            }
            Argument::Positional(value) => {
                // only the trailing positional argument can become a keyword
                if call.args[i + 1..].iter().any(Argument::is_positional) {
                    continue;
                }
                let pos = slots.iter().position(|&s| s == i).unwrap_or(0);
                let name = positional_names.get(pos).copied().unwrap_or("x");
                for new in rename(name).into_iter().take(2) {
                    let mut args = call.args.clone();
                    args[i] = Argument::keyword(new, value.clone());
                    out[3].push(with(args));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Two seeded distractors, distinct from both answers and from each other.
pub fn gen_distractors(
    pair: &PairRecord,
    legacy: &ApiSignature,
    updated: &ApiSignature,
    seed: u64,
) -> Result<[String; 2], BenchError> {
    let api = pair.api_path.to_string();
    let taken = [canonical(&api, &pair.updated_code)?, canonical(&api, &pair.outdated_code)?];
    let mut groups = distractor_candidates(pair, legacy, updated)?;
    for g in groups.iter_mut() {
        let mut seen = BTreeSet::new();
        g.retain(|c| !taken.contains(c) && seen.insert(c.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(
        seed,
        &[&api, &pair.metadata.file_id, &pair.metadata.start_line.to_string()],
    ));
    let mut order = [0usize, 1, 2, 3];
    order.shuffle(&mut rng);
    let mut chosen: Vec<String> = Vec::new();
    // one per approach first, then any remaining candidate
    for &g in &order {
        if chosen.len() == 2 {
            break;
        }
        let fresh: Vec<&String> = groups[g].iter().filter(|c| !chosen.contains(c)).collect();
        if !fresh.is_empty() {
            chosen.push(fresh[rng.gen_range(0..fresh.len())].clone());
        }
    }
    if chosen.len() < 2 {
        let rest: Vec<&String> = order.iter().flat_map(|&g| groups[g].iter()).filter(|c| !chosen.contains(c)).collect();
        if let Some(c) = rest.first() {
            chosen.push((*c).clone());
        }
    }
    match chosen.as_slice() {
        [a, b] => Ok([a.clone(), b.clone()]),
        _ => Err(BenchError::DistractorExhausted { api, updated_code: pair.updated_code.clone() }),
    }
}

const DISTRACTOR_PROMPT: &str = "I want to create a multiple-choice question where, based on a specific code context, we identify the most appropriate parameter list for the target API. I will provide you with the following information:
- API_path: The full name of the API
- updated_signature: The API's new signature
- outdated_signature: The API's old signature
- import: The import statements in the code
- context: The preceding code context, ending with the target API's name
- updated_code: The correct answer that matches the new signature
- outdated_code: The incorrect answer that matches the old signature
I want to construct a multiple-choice question with four options. Among these, updated_code will be the correct option, and outdated_code is one incorrect option I have already provided. You need to create two additional incorrect options based on the differences between the new and old signatures - specifically, options that would be \"misleading\" if a model is still relying on the old signature. In other words, if the model only knows the old signature, it might be inclined to select these incorrect answers.

Here are four possible approaches for crafting these additional incorrect options:

1. Remove some optional parameters from the correct answer (that is, updated_code).
2. Add some incorrect optional parameters, such as parameters that existed in the old signature but do not exist in the new one, or parameters that appear in neither signature (the name of these parameters should not be like extra_param, which can be judged to error very easily).
3. Rearrange the positions of any positional parameters based on updated_code.
4. Change parameter names, for example changing add(x: int) to something like add(z=3).

WARNING: Your two new incorrect options MUST differ from both updated_code and outdated_code that I give to you, as well as from EACH OTHER.

Output Format:

Provide your two new incorrect options as your answer, without any other output.

For example:
############ Your output ##############

Option 1: (paramA, paramB=123)

Option 2: (paramX=\"hello\")

#######################################
---
";

fn signature_text(api: &ApiSignature) -> String {
    api.overloads.iter().map(|o| format!("{}{}", api.api_path, o.render())).collect::<Vec<_>>().join(" or ")
}

pub fn build_distractor_prompt(pair: &PairRecord, legacy: &ApiSignature, updated: &ApiSignature) -> String {
    format!(
        "{DISTRACTOR_PROMPT}API_path: {}\nupdated_signature: {}\noutdated_signature: {}\nimport: {}\ncontext: {}\nupdated_code: {}\noutdated_code: {}\n",
        pair.api_path,
        signature_text(updated),
        signature_text(legacy),
        pair.metadata.imports,
        pair.metadata.code_context,
        pair.updated_code,
        pair.outdated_code
    )
}

/// `Option 1: (...)` / `Option 2: (...)` lines of a distractor response.
pub fn parse_distractor_response(response: &str) -> Option<[String; 2]> {
    let find = |label: &str| {
        response.lines().find_map(|l| {
            let rest = l.trim().strip_prefix(label)?.trim();
            parse_argument_list(rest).ok().map(|_| rest.to_string())
        })
    };
    Some([find("Option 1:")?, find("Option 2:")?])
}

/// Ask the client for distractors; fall back to the rule-based path when
/// the reply is unusable or violates distinctness.
pub fn client_distractors(
    client: &dyn GenerationClient,
    pair: &PairRecord,
    legacy: &ApiSignature,
    updated: &ApiSignature,
    seed: u64,
) -> Result<Result<[String; 2], BenchError>, ClientError> {
    let reply = client.generate(&build_distractor_prompt(pair, legacy, updated), seed)?;
    let api = pair.api_path.to_string();
    if let Some([a, b]) = parse_distractor_response(&reply) {
        let all = [&pair.updated_code, &pair.outdated_code, &a, &b].map(|c| canonical(&api, c).ok());
        let distinct = all.iter().all(Option::is_some) && all.iter().collect::<BTreeSet<_>>().len() == 4;
        if distinct {
            return Ok(Ok([a, b]));
        }
    }
    Ok(gen_distractors(pair, legacy, updated, seed))
}

/// Place the four options according to `perm`, where slot `i` holds
/// option `perm[i]` of [updated, outdated, first distractor, second].
pub fn make_mcq_with_permutation(
    pair: &PairRecord,
    distractors: &[String; 2],
    perm: [usize; 4],
) -> Result<McqItem, BenchError> {
    let api = pair.api_path.to_string();
    let base = [&pair.updated_code, &pair.outdated_code, &distractors[0], &distractors[1]];
    let mut seen = BTreeSet::new();
    for code in base {
        if !seen.insert(canonical(&api, code)?) {
            return Err(BenchError::DuplicateOption { api });
        }
    }
    let mut sorted = perm;
    sorted.sort_unstable();
    if sorted != [0, 1, 2, 3] {
        return Err(BenchError::DuplicateOption { api });
    }
    let slot = |i: usize| base[perm[i]].clone();
    let answer_slot = perm.iter().position(|&p| p == 0).expect("permutation holds 0");
    Ok(McqItem {
        api_path: pair.api_path.clone(),
        question: pair.metadata.code_context.clone(),
        a: slot(0),
        b: slot(1),
        c: slot(2),
        d: slot(3),
        answer: ["A", "B", "C", "D"][answer_slot].to_string(),
    })
}

pub fn make_mcq(pair: &PairRecord, distractors: &[String; 2], seed: u64) -> Result<McqItem, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(
        seed,
        &["mcq", &pair.api_path.to_string(), &pair.metadata.file_id, &pair.metadata.start_line.to_string()],
    ));
    let mut perm = [0usize, 1, 2, 3];
    perm.shuffle(&mut rng);
    make_mcq_with_permutation(pair, distractors, perm)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftItem {
    pub instruction: String,
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub from: String,
    pub value: String,
}

impl Turn {
    fn new(from: &str, value: impl Into<String>) -> Self {
        Self { from: from.to_string(), value: value.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefItem {
    pub conversations: Vec<Turn>,
    pub chosen: Turn,
    pub rejected: Turn,
}

pub const PREFERENCE_SYSTEM_TURN: &str = "Please complete subsequent API calling statement.";

pub fn make_training(pair: &PairRecord) -> (SftItem, PrefItem) {
    let sft = SftItem {
        instruction: format!("Please fill the parameter list of api \"{}\" according to the given context.", pair.api_path),
        input: pair.metadata.code_context.clone(),
        output: pair.updated_code.clone(),
    };
    let pref = PrefItem {
        conversations: vec![
            Turn::new("system", PREFERENCE_SYSTEM_TURN),
            Turn::new("human", pair.metadata.code_context.clone()),
        ],
        chosen: Turn::new("gpt", pair.updated_code.clone()),
        rejected: Turn::new("gpt", pair.outdated_code.clone()),
    };
    (sft, pref)
}

/// An item left out of the benchmark, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchFlag {
    pub api_path: DottedPath,
    pub file_id: String,
    pub start_line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchOutput {
    pub cct: Vec<TaskItem>,
    pub ect: Vec<TaskItem>,
    pub mcq: Vec<McqItem>,
    pub sft: Vec<SftItem>,
    pub pref: Vec<PrefItem>,
    pub flags: Vec<BenchFlag>,
}

/// Emit every benchmark and training record for a split, in api_path
/// order. Test pairs whose distractors run out are flagged and produce
/// no items at all, which keeps the three tasks aligned one to one.
pub fn build_benchmark(
    split: &SplitAssignment,
    signatures: &BTreeMap<DottedPath, (ApiSignature, ApiSignature)>,
    seed: u64,
) -> BenchOutput {
    let mut out = BenchOutput::default();
    for pairs in split.train.values() {
        for pair in pairs {
            let (sft, pref) = make_training(pair);
            out.sft.push(sft);
            out.pref.push(pref);
        }
    }
    for (api, pairs) in &split.test {
        for pair in pairs {
            let flag = |reason: String| BenchFlag {
                api_path: api.clone(),
                file_id: pair.metadata.file_id.clone(),
                start_line: pair.metadata.start_line,
                reason,
            };
            let Some((legacy, updated)) = signatures.get(api) else {
                out.flags.push(flag("signatures unavailable".into()));
                continue;
            };
            let mcq = gen_distractors(pair, legacy, updated, seed).and_then(|d| make_mcq(pair, &d, seed));
            match mcq {
                Ok(item) => {
                    out.cct.push(make_cct(pair));
                    out.ect.push(make_ect(pair));
                    out.mcq.push(item);
                }
                Err(e) => out.flags.push(flag(e.to_string())),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locate::Evidence;
    use crate::model::ApiKind;

    fn metadata(api: &str, context: &str, line: usize) -> MetadataItem {
        MetadataItem {
            api_path: api.parse().unwrap(),
            code_context: context.into(),
            target_seq: "()".into(),
            suffix: String::new(),
            file_id: "f.py".into(),
            start_line: line,
            end_line: line,
            evidence: Evidence::DirectName,
            imports: String::new(),
        }
    }

    fn pair(api: &str, updated: &str, outdated: &str, line: usize) -> PairRecord {
        PairRecord {
            api_path: api.parse().unwrap(),
            metadata: metadata(api, "def f():\n    g", line),
            updated_code: updated.into(),
            outdated_code: outdated.into(),
        }
    }

    fn many(api: &str, n: usize) -> Vec<PairRecord> {
        (0..n).map(|i| pair(api, "(a, b=1)", "(a)", i + 1)).collect()
    }

    #[test]
    fn split_counts_and_threshold() {
        let mut pairs = BTreeMap::new();
        for api in ["p.a", "p.b", "p.c"] {
            pairs.insert(api.parse().unwrap(), many(api, 15 + api.len()));
        }
        pairs.insert("p.short".parse().unwrap(), many("p.short", 14));
        let split = sample_and_split(&pairs, SplitCounts::default(), 7).unwrap();
        assert_eq!(split.train.values().map(Vec::len).sum::<usize>(), 30);
        assert_eq!(split.test.values().map(Vec::len).sum::<usize>(), 15);
        assert_eq!(split.dropped, vec![("p.short".parse().unwrap(), 14)]);
        assert_eq!(split, sample_and_split(&pairs, SplitCounts::default(), 7).unwrap());
        for (api, train) in &split.train {
            let test = &split.test[api];
            assert!(train.iter().all(|t| !test.contains(t)));
        }
        let bad = SplitCounts { per_api: 15, train: 10, test: 4 };
        assert!(sample_and_split(&pairs, bad, 7).is_err());
    }

    #[test]
    fn task_items() {
        let p = PairRecord {
            api_path: "flask.json.dump".parse().unwrap(),
            metadata: metadata("flask.json.dump", "def t():\n    flask.json.dump", 2),
            updated_code: "(token_data, file)".into(),
            outdated_code: "(token_data, file, app=None)".into(),
        };
        assert_eq!(make_cct(&p).question, "def t():\n    flask.json.dump");
        assert_eq!(make_ect(&p).question, "def t():\n    flask.json.dump(token_data, file, app=None)");
        assert_eq!(make_ect(&p).answer, "(token_data, file)");
        let json = serde_json::to_string(&make_cct(&p)).unwrap();
        assert!(json.starts_with("{\"API_path\":\"flask.json.dump\",\"question\""));
    }

    #[test]
    fn distractors_distinct_and_seeded() {
        let legacy = ApiSignature::parse("flask.json.dump", ApiKind::Function, &["(obj, fp, app=None, **kwargs)"]).unwrap();
        let updated = ApiSignature::parse("flask.json.dump", ApiKind::Function, &["(obj, fp, **kwargs)"]).unwrap();
        let p = pair("flask.json.dump", "(test_data, out)", "(test_data, out, app=None)", 3);
        let d = gen_distractors(&p, &legacy, &updated, 7).unwrap();
        assert_eq!(d, gen_distractors(&p, &legacy, &updated, 7).unwrap());
        let all: BTreeSet<&str> = [p.updated_code.as_str(), p.outdated_code.as_str(), &d[0], &d[1]].into_iter().collect();
        assert_eq!(all.len(), 4);
        assert!(d.iter().all(|x| !x.contains("extra_param")));
        let groups = distractor_candidates(&p, &legacy, &updated).unwrap();
        assert!(groups[1].contains(&"(test_data, out, app=app)".to_string()));
        assert!(groups[2].contains(&"(out, test_data)".to_string()));
    }

    #[test]
    fn single_required_argument() {
        let sig = ApiSignature::parse("m.add", ApiKind::Function, &["(x)"]).unwrap();
        let legacy = ApiSignature::parse("m.add", ApiKind::Function, &["(x, y)"]).unwrap();
        let p = pair("m.add", "(a)", "(a, b)", 1);
        let groups = distractor_candidates(&p, &legacy, &sig).unwrap();
        assert!(groups[0].is_empty());
        assert!(groups[2].is_empty());
        assert!(groups[3].contains(&"(z=a)".to_string()));
        let d = gen_distractors(&p, &legacy, &sig, 1).unwrap();
        assert_ne!(d[0], d[1]);
    }

    #[test]
    fn exhausted_distractors() {
        // every fabricated name is already a parameter and nothing else varies
        let text = "(inplace=True, verbose=False, device=None, strict=True)";
        let sig = ApiSignature::parse("m.f", ApiKind::Function, &[text]).unwrap();
        let p = pair("m.f", "()", "(inplace=False)", 1);
        assert!(matches!(gen_distractors(&p, &sig, &sig, 0), Err(BenchError::DistractorExhausted { .. })));
    }

    #[test]
    fn mcq_permutation_and_answer() {
        let p = pair("flask.json.dump", "(test_data, out)", "(test_data, out, app=None)", 3);
        let d = ["(test_data, out, app=app)".to_string(), "(test_data, out, app=app, indent=4)".to_string()];
        let item = make_mcq_with_permutation(&p, &d, [2, 0, 3, 1]).unwrap();
        assert_eq!(item.answer, "B");
        assert_eq!(item.a, "(test_data, out, app=app)");
        assert_eq!(item.d, "(test_data, out, app=None)");
        let seeded = make_mcq(&p, &d, 9).unwrap();
        assert_eq!(seeded, make_mcq(&p, &d, 9).unwrap());
        assert_eq!(seeded.option(seeded.answer.chars().next().unwrap()), Some("(test_data, out)"));
        let dup = ["(test_data, out)".to_string(), "(x)".to_string()];
        assert!(make_mcq_with_permutation(&p, &dup, [0, 1, 2, 3]).is_err());
    }

    #[test]
    fn training_records() {
        let p = pair("torch.optim.swa_utils.AveragedModel.load_state_dict", "(state_dict, strict=True, assign=False)", "(state_dict, strict=True)", 4);
        let (sft, pref) = make_training(&p);
        assert_eq!(
            sft.instruction,
            "Please fill the parameter list of api \"torch.optim.swa_utils.AveragedModel.load_state_dict\" according to the given context."
        );
        assert_eq!(sft.output, "(state_dict, strict=True, assign=False)");
        assert_eq!(pref.conversations[0].value, PREFERENCE_SYSTEM_TURN);
        assert_eq!(pref.chosen.value, p.updated_code);
        assert_eq!(pref.rejected.value, p.outdated_code);
        assert_eq!(pref.rejected.from, "gpt");
    }

    #[test]
    fn client_path_validated() {
        let legacy = ApiSignature::parse("m.f", ApiKind::Function, &["(a, b=1)"]).unwrap();
        let updated = ApiSignature::parse("m.f", ApiKind::Function, &["(a, c=1)"]).unwrap();
        let p = pair("m.f", "(a, c=2)", "(a, b=2)", 1);
        let d = client_distractors(&crate::synth::MockClient, &p, &legacy, &updated, 3).unwrap().unwrap();
        assert_eq!(d, ["(a)".to_string(), "(a, c=2, verbose=True)".to_string()]);
        assert!(parse_distractor_response("Option 1: (a)\n").is_none());
    }
}

//! Lexical and sampling metrics for generated argument lists.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arglist::{parse_argument_list, Argument};
use crate::diff::edit_distance;
use crate::text;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("invalid counts: n={n}, c={c}, k={k}")]
    InvalidCounts { n: u64, c: u64, k: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no output for item {0}")]
    MissingItem(usize),
    #[error("output refers to unknown item {0}")]
    UnknownItem(usize),
    #[error("item {0} has no samples")]
    NoSamples(usize),
}

/// Whitespace-separated words, with every punctuation character as its
/// own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if c.is_alphanumeric() || c == '_' {
                current.push(c);
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Smoothing {
    None,
    /// Replace a zero match count by this value.
    Epsilon(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_n: usize,
    pub weights: Vec<f64>,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self::uniform(4)
    }
}

impl BleuConfig {
    pub fn uniform(max_n: usize) -> Self {
        Self { max_n, weights: vec![1.0 / max_n as f64; max_n], smoothing: Smoothing::None }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_n == 0 || self.weights.len() != self.max_n {
            return Err(MetricError::InvalidConfig("need N >= 1 and one weight per order".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.weights.iter().any(|w| *w < 0.0) {
            return Err(MetricError::InvalidConfig(format!("weights must be non-negative and sum to 1, got {sum}")));
        }
        if let Smoothing::Epsilon(e) = self.smoothing {
            if !(e > 0.0 && e < 1.0) {
                return Err(MetricError::InvalidConfig(format!("epsilon must lie in (0, 1), got {e}")));
            }
        }
        Ok(())
    }
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else if c == 0 {
        0.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// `BP * exp(sum w_n log p_n)` with clipped n-gram precisions.
pub fn bleu<T: AsRef<str>>(candidate: &[T], reference: &[T], cfg: &BleuConfig) -> Result<f64, MetricError> {
    cfg.validate()?;
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let bp = brevity_penalty(candidate.len(), reference.len());
    if bp == 0.0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for (i, w) in cfg.weights.iter().enumerate() {
        let n = i + 1;
        let cand = ngram_counts(candidate, n);
        let refs = ngram_counts(reference, n);
        let total = candidate.len().saturating_sub(n - 1);
        let matched: usize = cand.iter().map(|(g, c)| (*c).min(*refs.get(g).unwrap_or(&0))).sum();
        let p = match (matched, cfg.smoothing) {
            (0, Smoothing::None) => return Ok(0.0),
            (0, Smoothing::Epsilon(e)) => e / total.max(1) as f64,
            (m, _) => m as f64 / total as f64,
        };
        if *w > 0.0 {
            log_sum += w * p.ln();
        }
    }
    Ok((bp * log_sum.exp()).clamp(0.0, 1.0))
}

fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// `LCS(C, R) / |R|`.
pub fn rouge_l<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let c: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    Ok(lcs_len(&c, &r) as f64 / r.len() as f64)
}

/// Character edit distance over the longer length; two empty strings
/// count as identical.
pub fn red(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(a, b) as f64 / longest as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuConfig {
    /// Weights of plain BLEU, keyword-weighted BLEU and subtree match.
    pub weights: [f64; 3],
    /// Weight of keyword-argument names in the weighted component.
    pub keyword_weight: f64,
    pub max_n: usize,
    pub smoothing: Smoothing,
}

impl Default for CodeBleuConfig {
    fn default() -> Self {
        Self { weights: [1.0 / 3.0; 3], keyword_weight: 5.0, max_n: 4, smoothing: Smoothing::None }
    }
}

/// Names used as `name=` keyword arguments at the top level.
fn keyword_names(text: &str) -> Vec<String> {
    match parse_argument_list(text) {
        Ok(list) => list.keywords().map(|(k, _)| k.to_string()).collect(),
        Err(_) => Vec::new(),
    }
}

fn weighted_unigram(candidate: &[String], reference: &[String], keywords: &[String], weight: f64) -> f64 {
    let w = |t: &str| if keywords.iter().any(|k| k == t) { weight } else { 1.0 };
    let cand = ngram_counts(candidate, 1);
    let refs = ngram_counts(reference, 1);
    let total: f64 = cand.iter().map(|(g, c)| w(g[0]) * *c as f64).sum();
    if total == 0.0 {
        return 0.0;
    }
    let matched: f64 = cand.iter().map(|(g, c)| w(g[0]) * (*c).min(*refs.get(g).unwrap_or(&0)) as f64).sum();
    brevity_penalty(candidate.len(), reference.len()) * matched / total
}

/// Serialized subtrees of an argument list: the whole list, each argument,
/// and each keyword value.
pub fn argument_subtrees(text: &str) -> Option<Vec<String>> {
    let list = parse_argument_list(text).ok()?;
    let mut nodes = Vec::new();
    let mut children = Vec::new();
    for arg in &list.args {
        let node = match arg {
            Argument::Positional(v) => format!("(pos {v})"),
            Argument::Keyword { name, value } => {
                let v = format!("(value {value})");
                nodes.push(v.clone());
                format!("(kw {name} {v})")
            }
            Argument::Unpack(v) => format!("(star {v})"),
            Argument::UnpackMap(v) => format!("(dstar {v})"),
        };
        children.push(node.clone());
        nodes.push(node);
    }
    nodes.push(format!("(args {})", children.join(" ")));
    Some(nodes)
}

fn subtree_match(candidate: &[String], reference: &[String]) -> f64 {
    let mut pool: HashMap<&str, usize> = HashMap::new();
    for s in candidate {
        *pool.entry(s.as_str()).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for s in reference {
        if let Some(n) = pool.get_mut(s.as_str()) {
            if *n > 0 {
                *n -= 1;
                matched += 1;
            }
        }
    }
    matched as f64 / reference.len() as f64
}

/// Three-component CodeBLEU reduction for argument lists. The n-gram order
/// is capped at the reference length so short lists stay scoreable.
pub fn codebleu(candidate: &str, reference: &str, cfg: &CodeBleuConfig) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if r.is_empty() {
        return if c.is_empty() { 1.0 } else { 0.0 };
    }
    let order = cfg.max_n.min(r.len()).max(1);
    let mut bcfg = BleuConfig::uniform(order);
    bcfg.smoothing = cfg.smoothing;
    let plain = bleu(&c, &r, &bcfg).unwrap_or(0.0);
    let mut keywords = keyword_names(reference);
    keywords.extend(keyword_names(candidate));
    let weighted = weighted_unigram(&c, &r, &keywords, cfg.keyword_weight);
    let [w1, w2, w3] = cfg.weights;
    match (argument_subtrees(candidate), argument_subtrees(reference)) {
        (Some(ct), Some(rt)) => w1 * plain + w2 * weighted + w3 * subtree_match(&ct, &rt),
        _ if w1 + w2 > 0.0 => (w1 * plain + w2 * weighted) / (w1 + w2),
        _ => 0.0,
    }
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Unbiased pass@k: `1 - C(n-c, k) / C(n, k)`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, MetricError> {
    if c > n || k == 0 || k > n {
        return Err(MetricError::InvalidCounts { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    match (binomial(n - c, k), binomial(n, k)) {
        (Some(miss), Some(all)) => Ok((all - miss) as f64 / all as f64),
        _ => {
            // product form for counts beyond exact integer range
            let mut keep = 1.0;
            for i in (n - c + 1)..=n {
                keep *= 1.0 - k as f64 / i as f64;
            }
            Ok(1.0 - keep)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Cct,
    Ect,
    Mcq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOutputRecord {
    pub item_id: usize,
    pub samples: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleAggregation {
    #[default]
    Mean,
    BestOfN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    #[serde(default)]
    pub bleu: BleuConfig,
    #[serde(default)]
    pub codebleu: CodeBleuConfig,
    #[serde(default = "default_ks")]
    pub ks: Vec<u64>,
    #[serde(default)]
    pub aggregation: SampleAggregation,
}

fn default_ks() -> Vec<u64> {
    vec![1, 3, 5]
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self { bleu: BleuConfig::default(), codebleu: CodeBleuConfig::default(), ks: default_ks(), aggregation: SampleAggregation::Mean }
    }
}

/// Trim a model answer to its outermost balanced parenthesized group.
pub fn normalize_answer(text: &str) -> &str {
    match text::outermost_parens(text) {
        Some((a, b)) => &text[a..b],
        None => text.trim(),
    }
}

/// First standalone A-D letter, ignoring case and punctuation.
pub fn extract_letter(text: &str) -> Option<char> {
    let cleaned: String = text.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    cleaned.split_whitespace().find_map(|w| {
        let mut chars = w.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if matches!(c.to_ascii_uppercase(), 'A'..='D') => Some(c.to_ascii_uppercase()),
            _ => None,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub item_id: usize,
    pub samples: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub items: Vec<ItemScore>,
    pub aggregate: BTreeMap<String, f64>,
    pub item_count: usize,
    pub sample_count: usize,
    pub unextractable: usize,
}

fn lexical_scores(sample: &str, answer: &str, cfg: &ScoreConfig) -> Result<[f64; 4], MetricError> {
    let s = normalize_answer(sample);
    let a = normalize_answer(answer);
    let (st, at) = (tokenize(s), tokenize(a));
    Ok([bleu(&st, &at, &cfg.bleu)?, rouge_l(&st, &at)?, red(s, a), codebleu(s, a, &cfg.codebleu)])
}

const LEXICAL: [&str; 4] = ["bleu", "rouge_l", "red", "codebleu"];

/// Score a run. `answers[i]` is the reference of item `i`: an argument
/// list for completion and correction tasks, a letter for MCQ.
pub fn score_run(
    task: Task,
    answers: &[String],
    outputs: &[ModelOutputRecord],
    cfg: &ScoreConfig,
) -> Result<MetricReport, MetricError> {
    cfg.bleu.validate()?;
    let mut by_id: BTreeMap<usize, &ModelOutputRecord> = BTreeMap::new();
    for o in outputs {
        if o.item_id >= answers.len() {
            return Err(MetricError::UnknownItem(o.item_id));
        }
        by_id.insert(o.item_id, o);
    }
    let mut items = Vec::with_capacity(answers.len());
    let mut unextractable = 0;
    let mut sample_count = 0;
    for (id, answer) in answers.iter().enumerate() {
        let out = by_id.get(&id).ok_or(MetricError::MissingItem(id))?;
        if out.samples.is_empty() {
            return Err(MetricError::NoSamples(id));
        }
        sample_count += out.samples.len();
        let mut values = BTreeMap::new();
        match task {
            Task::Cct | Task::Ect => {
                let rows = out
                    .samples
                    .iter()
                    .map(|s| lexical_scores(s, answer, cfg))
                    .collect::<Result<Vec<_>, _>>()?;
                for (m, name) in LEXICAL.iter().enumerate() {
                    let column = rows.iter().map(|r| r[m]);
                    let v = match cfg.aggregation {
                        SampleAggregation::Mean => column.sum::<f64>() / rows.len() as f64,
                        SampleAggregation::BestOfN if *name == "red" => column.fold(f64::INFINITY, f64::min),
                        SampleAggregation::BestOfN => column.fold(0.0, f64::max),
                    };
                    values.insert(name.to_string(), v);
                }
            }
            Task::Mcq => {
                let expected = extract_letter(answer);
                let mut correct = 0u64;
                for s in &out.samples {
                    match extract_letter(s) {
                        Some(l) if Some(l) == expected => correct += 1,
                        Some(_) => {}
                        None => {
                            unextractable += 1;
                            log::debug!("item {id}: no option letter in {s:?}");
                        }
                    }
                }
                let n = out.samples.len() as u64;
                for &k in &cfg.ks {
                    if k <= n {
                        values.insert(format!("pass@{k}"), pass_at_k(n, correct, k)?);
                    }
                }
                values.insert("correct".into(), correct as f64);
            }
        }
        items.push(ItemScore { item_id: id, samples: out.samples.len(), values });
    }
    let mut aggregate = BTreeMap::new();
    if !items.is_empty() {
        let keys: Vec<String> = items[0].values.keys().filter(|k| *k != "correct").cloned().collect();
        for key in keys {
            let present: Vec<f64> = items.iter().filter_map(|i| i.values.get(&key).copied()).collect();
            if present.len() == items.len() {
                aggregate.insert(key, present.iter().sum::<f64>() / present.len() as f64);
            }
        }
    }
    Ok(MetricReport { task, item_count: items.len(), items, aggregate, sample_count, unextractable })
}

/// Fixed-width summary of one or more reports.
pub fn render_table(reports: &[MetricReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<6} {:>6} {:>8}  {}", "task", "items", "samples", "metrics");
    for r in reports {
        let task = format!("{:?}", r.task).to_uppercase();
        let metrics: Vec<String> = r.aggregate.iter().map(|(k, v)| format!("{k}={:>7.4}", v)).collect();
        let _ = writeln!(out, "{:<6} {:>6} {:>8}  {}", task, r.item_count, r.sample_count, metrics.join("  "));
    }
    out
}

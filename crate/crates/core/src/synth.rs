//! Legacy/updated invocation pair synthesis through a text-generation
//! client, with response parsing, validation and bounded retries.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arglist::{check_call_syntax, parse_argument_list, Argument};
use crate::locate::MetadataItem;
use crate::model::{parse_signature_text, ApiSignature, DottedPath, ParamKind, ParameterList, SignatureError};
use crate::text;

pub const DEFAULT_MAX_RETRIES: usize = 3;

const TASK_HEADER: &str = "I will provide a code snippet as the context, followed by a calling statement that contains a target API call and a suffix. Additionally, the latest and outdated function signatures of the API are accessible(referred to as latest_signature and outdated_signature). Your task is to update the calling statement according to both the latest and outdated API function signatures, producing two distinct answers: the \"latest answer\" and the \"outdated answer\".
---
You must adhere to the following guidelines:
1. Calling Statement Updates: Only update the calling statement based on the given signatures, ensuring the functionality and correctness of the calls.
2. Include Required Parameters: The updated calling statements should include only the required parameters from the API signatures. Optional parameters should only be included if they are explicitly used or necessary based on the provided code context.
3. Avoid Unnecessary Defaults: Do not include default values for optional parameters unless they are explicitly mentioned in the code or are necessary for functionality.
4. Reflect API Updates: Clearly showcase the differences between the latest and outdated API signatures through your modifications.
---
";

const OUTPUT_FORMAT: &str = "---
Output format: reply with exactly the two lines below and nothing else, each holding only a parenthesized argument list.
latest answer: (...)
outdated answer: (...)
";

const LATEST_LINE: &str = "Latest API Signature: ";
const OUTDATED_LINE: &str = "Outdated API Signature: ";
const OVERLOAD_SEPARATOR: &str = " or ";

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("response does not contain both labeled answers: {0}")]
    ResponseUnparseable(String),
    #[error("invalid request for {api}: {source}")]
    InvalidRequest {
        api: String,
        #[source]
        source: SignatureError,
    },
    #[error(transparent)]
    Client(#[from] ClientError),
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("token variable `{0}` is not set")]
    MissingToken(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("service returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed service response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisRequest {
    pub api_path: DottedPath,
    pub latest_signature: String,
    pub outdated_signature: String,
    pub context: String,
    pub statement: String,
    pub suffix: String,
}

fn signature_line(api: &ApiSignature) -> String {
    api.overloads
        .iter()
        .map(|o| format!("{}{}", api.api_path, o.render()))
        .collect::<Vec<_>>()
        .join(OVERLOAD_SEPARATOR)
}

/// Parameter lists of every `<path>(...)` group in a signature line.
fn signatures_in_line(path: &str, line: &str) -> Result<Vec<ParameterList>, SignatureError> {
    let mut out = Vec::new();
    let mut rest = line;
    while let Some(at) = rest.find(path) {
        let open = at + path.len();
        if !rest[open..].starts_with('(') {
            rest = &rest[open..];
            continue;
        }
        let close = text::matching_close(rest, open)?;
        out.push(parse_signature_text(&rest[open..=close])?);
        rest = &rest[close + 1..];
    }
    if out.is_empty() {
        return Err(SignatureError::Syntax(format!("no signature for `{path}` in `{line}`")));
    }
    Ok(out)
}

impl SynthesisRequest {
    pub fn new(item: &MetadataItem, legacy: &ApiSignature, updated: &ApiSignature) -> Self {
        Self {
            api_path: item.api_path.clone(),
            latest_signature: signature_line(updated),
            outdated_signature: signature_line(legacy),
            context: item.code_context.clone(),
            statement: item.target_seq.clone(),
            suffix: item.suffix.clone(),
        }
    }

    /// Parse both signature texts back into parameter lists.
    pub fn signatures(&self) -> Result<(Vec<ParameterList>, Vec<ParameterList>), SynthError> {
        let path = self.api_path.to_string();
        let wrap = |source| SynthError::InvalidRequest { api: path.clone(), source };
        let latest = signatures_in_line(&path, &self.latest_signature).map_err(wrap)?;
        let outdated = signatures_in_line(&path, &self.outdated_signature).map_err(wrap)?;
        Ok((latest, outdated))
    }
}

/// The pair-update prompt with the request substituted in, followed by a
/// machine-readable output format instruction.
pub fn build_synthesis_prompt(req: &SynthesisRequest) -> String {
    format!(
        "{TASK_HEADER}{LATEST_LINE}{}\n{OUTDATED_LINE}{}\nContext: {}\nStatement: {}\nsuffix: {}\n{OUTPUT_FORMAT}",
        req.latest_signature, req.outdated_signature, req.context, req.statement, req.suffix
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub updated_code: String,
    pub outdated_code: String,
}

fn labeled_answer(response: &str, label: &str) -> Option<String> {
    let lower = response.to_ascii_lowercase();
    let mut search = 0;
    while let Some(found) = lower[search..].find(label) {
        let at = search + found;
        search = at + label.len();
        let line_start = response[..at].rfind('\n').map_or(0, |i| i + 1);
        let lead = response[line_start..at].trim_matches(|c: char| c.is_whitespace() || "-*#>".contains(c));
        if !lead.is_empty() {
            continue;
        }
        let rest = response[search..].trim_start_matches(|c: char| c == ':' || c == '*' || c == '`' || c.is_whitespace());
        if !rest.starts_with('(') {
            continue;
        }
        let close = text::matching_close(rest, 0).ok()?;
        return Some(rest[..=close].to_string());
    }
    None
}

/// Extract the two labeled argument lists from a model response.
pub fn parse_synthesis_response(response: &str) -> Result<SynthesisResult, SynthError> {
    let unfenced: String = response
        .lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n");
    let updated = labeled_answer(&unfenced, "latest answer");
    let outdated = labeled_answer(&unfenced, "outdated answer");
    match (updated, outdated) {
        (Some(updated_code), Some(outdated_code)) => Ok(SynthesisResult { updated_code, outdated_code }),
        _ => Err(SynthError::ResponseUnparseable(response.chars().take(200).collect())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerSide {
    Updated,
    Outdated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum PairViolation {
    #[error("updated and outdated answers do not differ")]
    InsufficientDivergence,
    #[error("{side:?} answer is not a valid argument list: {reason}")]
    MalformedAnswer { side: AnswerSide, reason: String },
    #[error("{side:?} answer uses keyword `{keyword}` unknown to its signature")]
    KeywordViolation { side: AnswerSide, keyword: String },
    #[error("{side:?} answer passes {given} positional arguments, at most {capacity} accepted")]
    ArityViolation { side: AnswerSide, given: usize, capacity: usize },
}

fn check_answer(code: &str, api: &ApiSignature, side: AnswerSide) -> Result<String, PairViolation> {
    let malformed = |reason: String| PairViolation::MalformedAnswer { side, reason };
    check_call_syntax(code).map_err(|e| malformed(e.to_string()))?;
    let args = parse_argument_list(code).map_err(|e| malformed(e.to_string()))?;
    for (keyword, _) in args.keywords() {
        if !api.overloads.iter().any(|o| o.accepts_keyword(keyword)) {
            return Err(PairViolation::KeywordViolation { side, keyword: keyword.to_string() });
        }
    }
    let unbounded = api.overloads.iter().any(|o| o.var_positional().is_some());
    let given = args.positional().count();
    let capacity = api.overloads.iter().map(ParameterList::positional_capacity).max().unwrap_or(0);
    if !unbounded && !args.args.iter().any(|a| matches!(a, Argument::Unpack(_))) && given > capacity {
        return Err(PairViolation::ArityViolation { side, given, capacity });
    }
    Ok(args.render())
}

/// Accept a pair only if both answers are well-formed, respect their
/// signatures, and differ from each other.
pub fn validate_pair(res: &SynthesisResult, legacy: &ApiSignature, updated: &ApiSignature) -> Result<(), PairViolation> {
    let u = check_answer(&res.updated_code, updated, AnswerSide::Updated)?;
    let o = check_answer(&res.outdated_code, legacy, AnswerSide::Outdated)?;
    if u == o {
        return Err(PairViolation::InsufficientDivergence);
    }
    Ok(())
}

/// A text-generation service.
pub trait GenerationClient: Send + Sync {
    fn generate(&self, prompt: &str, seed: u64) -> Result<String, ClientError>;
}

fn stable_hash(prompt: &str, seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(prompt.as_bytes());
    h.update(seed.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Deterministic offline stand-in for a generation service.
///
/// Pair prompts are answered from the signatures in the prompt: required
/// parameters plus the optionals that differ between versions, with more
/// shared optionals mixed in for non-zero seeds. Any other prompt gets a
/// reply derived from a hash of (prompt, seed).
#[derive(Debug, Clone, Default)]
pub struct MockClient;

impl MockClient {
    fn answer_pair(&self, prompt: &str, seed: u64) -> Option<String> {
        let line = |prefix: &str| prompt.lines().find_map(|l| l.strip_prefix(prefix));
        let latest = line(LATEST_LINE)?;
        let outdated = line(OUTDATED_LINE)?;
        let path = latest.split('(').next()?.trim();
        let latest = signatures_in_line(path, latest).ok()?.into_iter().next()?;
        let outdated = signatures_in_line(path, outdated).ok()?.into_iter().next()?;
        Some(format!(
            "latest answer: {}\noutdated answer: {}\n",
            mock_call(&latest, &outdated, seed),
            mock_call(&outdated, &latest, seed)
        ))
    }

    fn answer_distractors(&self, prompt: &str) -> Option<String> {
        let updated = prompt.lines().find_map(|l| l.strip_prefix("updated_code: "))?;
        let args = parse_argument_list(updated).ok()?;
        let mut shorter = args.clone();
        shorter.args.pop();
        let mut longer = args;
        longer.args.push(Argument::keyword("verbose", "True"));
        Some(format!("Option 1: {}\n\nOption 2: {}\n", shorter.render(), longer.render()))
    }
}

/// Argument list a cautious caller would write against `this`, given the
/// other version `other`.
fn mock_call(this: &ParameterList, other: &ParameterList, seed: u64) -> String {
    let changed = |name: &str, kind: ParamKind, required: bool| match other.get(name) {
        None => true,
        Some(p) => p.kind != kind || p.required() != required,
    };
    let mut positional = Vec::new();
    let mut keywords = Vec::new();
    let mut spare = Vec::new();
    for p in this.params() {
        match (p.kind, p.required()) {
            (ParamKind::VarPositional | ParamKind::VarKeyword, _) => {}
            (ParamKind::PositionalOnly | ParamKind::PositionalOrKeyword, true) => positional.push(p.name.clone()),
            (ParamKind::KeywordOnly, true) => keywords.push(format!("{0}={0}", p.name)),
            (ParamKind::PositionalOnly, false) => {}
            (_, false) => {
                let value = p.default_repr.clone().unwrap_or_else(|| "None".into());
                if changed(&p.name, p.kind, false) {
                    keywords.push(format!("{}={value}", p.name));
                } else {
                    spare.push(format!("{}={value}", p.name));
                }
            }
        }
    }
    let extra = (seed as usize) % (spare.len() + 1);
    keywords.extend(spare.into_iter().take(extra));
    positional.extend(keywords);
    format!("({})", positional.join(", "))
}

impl GenerationClient for MockClient {
    fn generate(&self, prompt: &str, seed: u64) -> Result<String, ClientError> {
        if let Some(reply) = self.answer_pair(prompt, seed) {
            return Ok(reply);
        }
        if let Some(reply) = self.answer_distractors(prompt) {
            return Ok(reply);
        }
        let h = stable_hash(prompt, seed);
        if prompt.contains("\nA. ") && prompt.contains("\nD. ") {
            return Ok(["A", "B", "C", "D"][(h % 4) as usize].to_string());
        }
        // completion prompts: echo a trailing argument list if present
        let trimmed = prompt.trim_end();
        if trimmed.ends_with(')') {
            let mut depth = 0usize;
            for (i, c) in trimmed.char_indices().rev() {
                match c {
                    ')' => depth += 1,
                    '(' => {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(trimmed[i..].to_string());
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok("()".to_string())
    }
}

/// Client for chat-completion services with an OpenAI-compatible API.
pub struct ChatCompletionClient {
    base_url: String,
    model: String,
    token: String,
    temperature: f64,
    http: reqwest::blocking::Client,
}

impl ChatCompletionClient {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, token: String, temperature: f64) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(Self { base_url: base_url.into(), model: model.into(), token, temperature, http })
    }

    pub fn from_env(base_url: impl Into<String>, model: impl Into<String>, token_var: &str, temperature: f64) -> Result<Self, ClientError> {
        let token = std::env::var(token_var).map_err(|_| ClientError::MissingToken(token_var.to_string()))?;
        Self::new(base_url, model, token, temperature)
    }
}

impl GenerationClient for ChatCompletionClient {
    fn generate(&self, prompt: &str, seed: u64) -> Result<String, ClientError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "seed": seed,
        });
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let resp = self
            .http
            .post(url)
            .bearer_auth(&self.token)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ClientError::Status { status: status.as_u16(), body: text });
        }
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("missing choices[0].message.content".into()))
    }
}

/// One prompt/response exchange, kept for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptLog {
    pub api_path: DottedPath,
    pub file_id: String,
    pub start_line: usize,
    pub attempt: usize,
    pub seed: u64,
    pub prompt: String,
    pub response: String,
    pub verdict: String,
}

/// A metadata item that never produced a valid pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFlag {
    pub api_path: DottedPath,
    pub file_id: String,
    pub start_line: usize,
    pub attempts: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    pub result: Option<SynthesisResult>,
    pub log: Vec<AttemptLog>,
    pub flag: Option<ReviewFlag>,
}

/// Prompt, parse and validate, re-prompting at most `max_retries` times
/// with successive seeds.
pub fn synthesize_pair(
    client: &dyn GenerationClient,
    item: &MetadataItem,
    legacy: &ApiSignature,
    updated: &ApiSignature,
    seed: u64,
    max_retries: usize,
) -> Result<SynthesisOutcome, SynthError> {
    let req = SynthesisRequest::new(item, legacy, updated);
    let prompt = build_synthesis_prompt(&req);
    let mut log = Vec::new();
    let mut last_reason = String::new();
    for attempt in 0..=max_retries {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let response = client.generate(&prompt, attempt_seed)?;
        let verdict = parse_synthesis_response(&response)
            .map_err(|e| e.to_string())
            .and_then(|res| validate_pair(&res, legacy, updated).map(|_| res).map_err(|e| e.to_string()));
        log.push(AttemptLog {
            api_path: item.api_path.clone(),
            file_id: item.file_id.clone(),
            start_line: item.start_line,
            attempt,
            seed: attempt_seed,
            prompt: prompt.clone(),
            response,
            verdict: verdict.as_ref().map_or_else(Clone::clone, |_| "ok".to_string()),
        });
        match verdict {
            Ok(res) => return Ok(SynthesisOutcome { result: Some(res), log, flag: None }),
            Err(reason) => last_reason = reason,
        }
    }
    let flag = ReviewFlag {
        api_path: item.api_path.clone(),
        file_id: item.file_id.clone(),
        start_line: item.start_line,
        attempts: max_retries + 1,
        reason: last_reason,
    };
    Ok(SynthesisOutcome { result: None, log, flag: Some(flag) })
}

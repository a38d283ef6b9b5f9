//! Import-aware search templates and bounded code-search planning.
//!
//! A template is a set of literal segments that must all occur in a file.
//! For `torch.nn.functional.softmax` the templates cover the direct full
//! path plus every `import <prefix> as` / `from <prefix> import <field>`
//! split of the dotted path.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::{ApiKind, DottedPath};

pub const DEFAULT_FILE_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("`{0}` is too short to build search templates")]
    PathTooShort(String),
    #[error("per-template file cap must be at least 1")]
    InvalidCap,
    #[error("code search backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("code search rate limited; retry after {retry_after:?}")]
    RateLimited { retry_after: Duration },
    #[error("corpus error: {0}")]
    Corpus(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchTemplate {
    pub segments: Vec<String>,
}

impl SearchTemplate {
    fn new(segments: Vec<String>) -> Self {
        debug_assert!(!segments.is_empty() && segments.iter().all(|s| !s.is_empty()));
        Self { segments }
    }

    pub fn matches(&self, content: &str) -> bool {
        self.segments.iter().all(|s| content.contains(s.as_str()))
    }
}

fn expand_path(fields: &[String]) -> Vec<Vec<String>> {
    let n = fields.len();
    let join = |range: &[String]| range.join(".");
    let mut out = vec![vec![join(fields)]];
    for k in 1..n {
        out.push(vec![
            format!("import {} as", join(&fields[..k])),
            format!(".{}", join(&fields[k..])),
        ]);
        let mut from = vec![format!("from {} import {}", join(&fields[..k]), fields[k])];
        if k + 1 < n {
            from.push(format!(".{}", join(&fields[k + 1..])));
        }
        out.push(from);
    }
    out
}

/// Enumerate the search templates for an API.
///
/// Functions and initializers expand the API path itself (2n-1 templates
/// for an n-field path). Methods expand the owning class path and append a
/// `.<method>(` segment to every template.
pub fn enumerate_templates(path: &DottedPath, kind: ApiKind) -> Result<Vec<SearchTemplate>, SearchError> {
    let too_short = || SearchError::PathTooShort(path.to_string());
    match kind {
        ApiKind::Function | ApiKind::Initializer => {
            if path.len() < 2 {
                return Err(too_short());
            }
            Ok(expand_path(path.fields()).into_iter().map(SearchTemplate::new).collect())
        }
        ApiKind::Method => {
            let class = path.parent().filter(|c| c.len() >= 2).ok_or_else(too_short)?;
            let call = format!(".{}(", path.last());
            Ok(expand_path(class.fields())
                .into_iter()
                .map(|mut segs| {
                    segs.push(call.clone());
                    SearchTemplate::new(segs)
                })
                .collect())
        }
    }
}

/// A file returned by a backend query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub source_id: String,
    pub url: Option<String>,
}

/// A retrieved file, attributed to the first template that found it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub source_id: String,
    pub url: Option<String>,
    pub template_index: usize,
}

/// Conjunctive literal code search.
pub trait CodeSearchBackend {
    /// Files whose content contains every segment, at most `cap` of them.
    fn search(&self, segments: &[String], cap: usize) -> Result<Vec<SearchHit>, SearchError>;

    fn fetch(&self, file: &FileRef) -> Result<String, SearchError>;
}

/// Scans a local directory tree of `.py` files.
#[derive(Debug, Clone)]
pub struct LocalCorpusBackend {
    root: PathBuf,
    files: Vec<(String, String)>,
}

impl LocalCorpusBackend {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, SearchError> {
        let root = root.as_ref().to_path_buf();
        if !root.is_dir() {
            return Err(SearchError::Corpus(format!("{} is not a directory", root.display())));
        }
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(&root).sort_by_file_name() {
            let entry = entry.map_err(|e| SearchError::Corpus(e.to_string()))?;
            let path = entry.path();
            if !entry.file_type().is_file() || path.extension().and_then(|e| e.to_str()) != Some("py") {
                continue;
            }
            let rel = path.strip_prefix(&root).expect("walk stays under root");
            let id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            let content = std::fs::read_to_string(path)
                .map_err(|e| SearchError::Corpus(format!("{}: {e}", path.display())))?;
            files.push((id, content));
        }
        Ok(Self { root, files })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

impl CodeSearchBackend for LocalCorpusBackend {
    fn search(&self, segments: &[String], cap: usize) -> Result<Vec<SearchHit>, SearchError> {
        Ok(self
            .files
            .iter()
            .filter(|(_, content)| segments.iter().all(|s| content.contains(s.as_str())))
            .take(cap)
            .map(|(id, _)| SearchHit { source_id: id.clone(), url: None })
            .collect())
    }

    fn fetch(&self, file: &FileRef) -> Result<String, SearchError> {
        self.files
            .iter()
            .find(|(id, _)| *id == file.source_id)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| SearchError::Corpus(format!("unknown file {}", file.source_id)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
    /// Pauses honored for rate limiting before an API is given up on.
    pub max_rate_limit_waits: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { attempts: 3, base_delay_ms: 500, max_rate_limit_waits: 5 }
    }
}

impl RetryPolicy {
    /// Run `op`, retrying unavailability with exponential backoff and
    /// pausing whenever the backend reports a rate limit.
    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, SearchError>) -> Result<T, SearchError> {
        let mut failures = 0;
        let mut waits = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(SearchError::BackendUnavailable(msg)) => {
                    failures += 1;
                    if failures >= self.attempts.max(1) {
                        return Err(SearchError::BackendUnavailable(msg));
                    }
                    let delay = self.base_delay_ms.saturating_mul(1 << (failures - 1).min(16));
                    log::warn!("backend unavailable ({msg}); retrying in {delay} ms");
                    std::thread::sleep(Duration::from_millis(delay));
                }
                Err(SearchError::RateLimited { retry_after }) => {
                    waits += 1;
                    if waits > self.max_rate_limit_waits {
                        return Err(SearchError::RateLimited { retry_after });
                    }
                    log::warn!("rate limited; pausing for {retry_after:?}");
                    std::thread::sleep(retry_after);
                }
                Err(other) => return Err(other),
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub files: BTreeMap<DottedPath, Vec<FileRef>>,
    /// APIs whose queries failed after retries, with the reason.
    pub failures: Vec<(DottedPath, String)>,
    /// Number of template queries issued.
    pub queries: usize,
}

/// Run every template of every API against the backend.
///
/// Per API, results are unioned across templates and deduplicated by
/// source id, keeping first-seen order. A failing API is recorded and
/// skipped; it does not abort the run.
pub fn plan_search<'a>(
    apis: impl IntoIterator<Item = (&'a DottedPath, ApiKind)>,
    backend: &dyn CodeSearchBackend,
    cap: usize,
    retry: &RetryPolicy,
) -> Result<SearchOutcome, SearchError> {
    if cap == 0 {
        return Err(SearchError::InvalidCap);
    }
    let mut outcome = SearchOutcome::default();
    'api: for (path, kind) in apis {
        let templates = enumerate_templates(path, kind)?;
        let mut seen = HashSet::new();
        let mut refs = Vec::new();
        for (index, template) in templates.iter().enumerate() {
            outcome.queries += 1;
            let hits = match retry.run(|| backend.search(&template.segments, cap)) {
                Ok(hits) => hits,
                Err(e) => {
                    outcome.failures.push((path.clone(), e.to_string()));
                    continue 'api;
                }
            };
            for hit in hits.into_iter().take(cap) {
                if seen.insert(hit.source_id.clone()) {
                    refs.push(FileRef { source_id: hit.source_id, url: hit.url, template_index: index });
                }
            }
        }
        outcome.files.insert(path.clone(), refs);
    }
    Ok(outcome)
}

/// Client for a GitHub-style code search REST endpoint.
///
/// Queries are the quoted literal segments joined by spaces plus a
/// language qualifier; file bodies are fetched from the item's contents
/// URL using the raw media type.
#[derive(Debug, Clone)]
pub struct HttpSearchBackend {
    base_url: String,
    token: Option<String>,
    language: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct SearchPage {
    #[serde(default)]
    items: Vec<SearchItem>,
}

#[derive(Deserialize)]
struct SearchItem {
    path: String,
    url: String,
    repository: Repository,
}

#[derive(Deserialize)]
struct Repository {
    full_name: String,
}

impl HttpSearchBackend {
    pub fn new(base_url: impl Into<String>, token: Option<String>) -> Result<Self, SearchError> {
        let client = reqwest::blocking::Client::builder()
            .user_agent("apisync")
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| SearchError::BackendUnavailable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            token,
            language: "Python".into(),
            client,
        })
    }

    /// Read the token from the named environment variable, if set.
    pub fn from_env(base_url: impl Into<String>, token_var: &str) -> Result<Self, SearchError> {
        Self::new(base_url, std::env::var(token_var).ok().filter(|t| !t.is_empty()))
    }

    pub fn query_string(&self, segments: &[String]) -> String {
        let mut terms: Vec<String> = segments
            .iter()
            .map(|s| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")))
            .collect();
        terms.push(format!("language:{}", self.language));
        terms.join(" ")
    }

    fn get(&self, url: &str, query: &[(&str, String)], accept: &str) -> Result<reqwest::blocking::Response, SearchError> {
        let mut req = self.client.get(url).query(query).header("Accept", accept);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| SearchError::BackendUnavailable(e.to_string()))?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let header = |name: &str| resp.headers().get(name).and_then(|v| v.to_str().ok()).and_then(|v| v.parse::<u64>().ok());
        let exhausted = header("x-ratelimit-remaining") == Some(0);
        if status.as_u16() == 429 || (status.as_u16() == 403 && (exhausted || header("retry-after").is_some())) {
            let retry_after = header("retry-after")
                .or_else(|| {
                    let reset = header("x-ratelimit-reset")?;
                    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok()?.as_secs();
                    Some(reset.saturating_sub(now))
                })
                .unwrap_or(60);
            return Err(SearchError::RateLimited { retry_after: Duration::from_secs(retry_after) });
        }
        Err(SearchError::BackendUnavailable(format!("{url}: HTTP {status}")))
    }
}

impl CodeSearchBackend for HttpSearchBackend {
    fn search(&self, segments: &[String], cap: usize) -> Result<Vec<SearchHit>, SearchError> {
        let per_page = cap.min(100);
        let mut hits = Vec::new();
        let mut page = 1;
        while hits.len() < cap {
            let url = format!("{}/search/code", self.base_url);
            let query = [
                ("q", self.query_string(segments)),
                ("per_page", per_page.to_string()),
                ("page", page.to_string()),
            ];
            let body: SearchPage = self
                .get(&url, &query, "application/vnd.github+json")?
                .json()
                .map_err(|e| SearchError::BackendUnavailable(format!("bad search response: {e}")))?;
            let fetched = body.items.len();
            hits.extend(body.items.into_iter().map(|item| SearchHit {
                source_id: format!("{}/{}", item.repository.full_name, item.path),
                url: Some(item.url),
            }));
            if fetched < per_page {
                break;
            }
            page += 1;
        }
        hits.truncate(cap);
        Ok(hits)
    }

    fn fetch(&self, file: &FileRef) -> Result<String, SearchError> {
        let url = file
            .url
            .as_deref()
            .ok_or_else(|| SearchError::BackendUnavailable(format!("no URL for {}", file.source_id)))?;
        self.get(url, &[], "application/vnd.github.raw")?
            .text()
            .map_err(|e| SearchError::BackendUnavailable(e.to_string()))
    }
}

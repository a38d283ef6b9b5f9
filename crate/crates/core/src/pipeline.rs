//! Staged, resumable pipeline from signature dumps to benchmark reports.
//!
//! Each stage reads the outputs of earlier stages, writes its own files
//! under `<output_root>/<stage>/` atomically, and records a manifest with
//! input digests. A stage whose manifest still matches its inputs and
//! configuration is skipped.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{self, BenchOutput, McqItem, PairRecord, SplitCounts, TaskItem};
use crate::diff::{self, UpdateRecord, DEFAULT_THRESHOLD};
use crate::locate::{self, MetadataItem, ParsedSource};
use crate::metrics::{self, MetricReport, ModelOutputRecord, ScoreConfig, Task};
use crate::model::{ApiSignature, DottedPath, SignatureDump};
use crate::search::{
    self, CodeSearchBackend, FileRef, HttpSearchBackend, LocalCorpusBackend, RetryPolicy, DEFAULT_FILE_CAP,
};
use crate::synth::{self, ChatCompletionClient, GenerationClient, MockClient, DEFAULT_MAX_RETRIES};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` needs `{missing}` to have run first")]
    MissingPrerequisite { stage: Stage, missing: Stage },
    #[error("external service failure: {0}")]
    External(String),
    #[error("output root is locked by another run ({0}); pass --resume to take over a stale lock")]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::MissingPrerequisite { .. } => 3,
            PipelineError::External(_) => 4,
            _ => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.to_path_buf(), source }
    }
}

type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Extract,
    Diff,
    Plan,
    Fetch,
    Locate,
    Synthesize,
    Build,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Extract,
        Stage::Diff,
        Stage::Plan,
        Stage::Fetch,
        Stage::Locate,
        Stage::Synthesize,
        Stage::Build,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Diff => "diff",
            Stage::Plan => "plan",
            Stage::Fetch => "fetch",
            Stage::Locate => "locate",
            Stage::Synthesize => "synthesize",
            Stage::Build => "build",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Stages whose outputs this stage reads.
    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Extract => &[],
            Stage::Diff => &[Stage::Extract],
            Stage::Plan => &[Stage::Diff],
            Stage::Fetch => &[Stage::Plan],
            Stage::Locate => &[Stage::Extract, Stage::Fetch],
            Stage::Synthesize => &[Stage::Extract, Stage::Locate],
            Stage::Build => &[Stage::Extract, Stage::Synthesize],
            Stage::Evaluate => &[Stage::Build],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibraryConfig {
    pub name: String,
    pub legacy: PathBuf,
    pub updated: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Local {
        root: PathBuf,
    },
    Http {
        base_url: String,
        #[serde(default = "default_search_token_var")]
        token_var: String,
        #[serde(default)]
        retry: RetryPolicy,
    },
}

fn default_search_token_var() -> String {
    "CODE_SEARCH_TOKEN".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientConfig {
    Mock,
    Chat {
        base_url: String,
        model: String,
        #[serde(default = "default_client_token_var")]
        token_var: String,
        #[serde(default)]
        temperature: f64,
    },
}

fn default_client_token_var() -> String {
    "GENERATION_API_KEY".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Samples drawn per item.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Directory with precomputed `<task>_outputs.jsonl` files; when set,
    /// no samples are generated.
    #[serde(default)]
    pub outputs_dir: Option<PathBuf>,
    #[serde(default)]
    pub score: ScoreConfig,
}

fn default_samples() -> usize {
    10
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self { samples: default_samples(), outputs_dir: None, score: ScoreConfig::default() }
    }
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_cap() -> usize {
    DEFAULT_FILE_CAP
}
fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}
fn default_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_root: PathBuf,
    pub seed: u64,
    pub libraries: Vec<LibraryConfig>,
    pub backend: BackendConfig,
    pub client: ClientConfig,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_cap")]
    pub file_cap: usize,
    #[serde(default)]
    pub counts: SplitCounts,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.libraries.is_empty() {
            return bad("at least one library is required".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for lib in &self.libraries {
            if !names.insert(&lib.name) {
                return bad(format!("library `{}` listed twice", lib.name));
            }
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        if self.file_cap == 0 {
            return bad("file_cap must be positive".into());
        }
        self.counts.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be positive".into());
        }
        if self.evaluate.samples == 0 {
            return bad("evaluate.samples must be positive".into());
        }
        self.evaluate.score.bleu.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

/// A validated configuration with relative paths resolved against the
/// directory of the configuration file.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    base_dir: PathBuf,
}

impl Pipeline {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(config, base_dir)
    }

    pub fn new(config: PipelineConfig, base_dir: PathBuf) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, base_dir })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn root(&self) -> PathBuf {
        self.resolve(&self.config.output_root)
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root().join(stage.name())
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.stage_dir(stage).join("manifest.json")
    }

    pub fn read_manifest(&self, stage: Stage) -> Option<StageManifest> {
        let text = fs::read_to_string(self.manifest_path(stage)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// The configuration slice a stage depends on.
    fn stage_config(&self, stage: Stage) -> serde_json::Value {
        let c = &self.config;
        let v = match stage {
            Stage::Extract => serde_json::json!({ "libraries": c.libraries }),
            Stage::Diff => serde_json::json!({ "threshold": c.threshold }),
            Stage::Plan => serde_json::json!({ "backend": c.backend, "file_cap": c.file_cap }),
            Stage::Fetch => serde_json::json!({ "backend": c.backend }),
            Stage::Locate => serde_json::json!({}),
            Stage::Synthesize => serde_json::json!({
                "client": c.client, "seed": c.seed, "max_retries": c.max_retries
            }),
            Stage::Build => serde_json::json!({ "counts": c.counts, "seed": c.seed }),
            Stage::Evaluate => serde_json::json!({ "client": c.client, "seed": c.seed, "evaluate": c.evaluate }),
        };
        v
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_digest(path: &Path) -> Result<String> {
    fs::read(path).map(|b| sha256_hex(&b)).map_err(|e| PipelineError::io(path, e))
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| PipelineError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    f.sync_all().map_err(|e| PipelineError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

pub mod jsonl {
    use super::*;

    pub fn to_string<T: Serialize>(items: &[T]) -> String {
        let mut out = String::new();
        for item in items {
            out.push_str(&serde_json::to_string(item).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| PipelineError::Config(format!("{}:{}: {e}", path.display(), i + 1)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Path relative to the output root.
    pub path: String,
    pub sha256: String,
    /// Line count for JSONL outputs.
    pub items: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: Stage,
    pub config_digest: String,
    /// Input path (relative to the output root when inside it) to digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
    pub counts: BTreeMap<String, usize>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl StageManifest {
    /// The manifest without its timestamp, for comparisons across runs.
    pub fn without_timestamp(&self) -> StageManifest {
        StageManifest { timestamp: 0, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub manifest: StageManifest,
    /// True when the stage was up to date and nothing was rewritten.
    pub skipped: bool,
}

/// Files a stage produced, before they are committed.
struct StageWrite {
    files: Vec<(String, Vec<u8>, bool)>,
    counts: BTreeMap<String, usize>,
}

impl StageWrite {
    fn new() -> Self {
        Self { files: Vec::new(), counts: BTreeMap::new() }
    }

    fn jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) {
        self.files.push((name.to_string(), jsonl::to_string(items).into_bytes(), true));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("values serialize");
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes(), false));
    }

    fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes, false));
    }

    fn count(&mut self, name: &str, n: usize) {
        self.counts.insert(name.to_string(), n);
    }
}

/// Holds `<root>/.lock` for the lifetime of a run.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(root: &Path, take_over: bool) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| PipelineError::io(root, e))?;
        let path = root.join(".lock");
        if path.exists() {
            if !take_over {
                return Err(PipelineError::Locked(path));
            }
            log::warn!("taking over existing lock {}", path.display());
            fs::remove_file(&path).map_err(|e| PipelineError::io(&path, e))?;
        }
        let mut f = fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|_| PipelineError::Locked(path.clone()))?;
        let _ = writeln!(f, "{}", std::process::id());
        Ok(Self { path })
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn stage_err(stage: Stage) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Stage { stage, message }
}

fn item_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("digest has 32 bytes"))
}

fn short_hash(text: &str) -> String {
    sha256_hex(text.as_bytes())[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub library: String,
    pub updates: usize,
    pub unchanged: usize,
    pub only_in_legacy: Vec<DottedPath>,
    pub only_in_updated: Vec<DottedPath>,
    pub kind_changed: Vec<DottedPath>,
    pub partition_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NearMatchRow {
    api_path: DottedPath,
    legacy_name: String,
    updated_name: String,
    similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedFile {
    pub api_path: DottedPath,
    #[serde(flatten)]
    pub file: FileRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchedFile {
    pub api_path: DottedPath,
    pub source_id: String,
    pub url: Option<String>,
    pub template_index: usize,
    /// Null for the local backend, which keeps outputs reproducible.
    pub retrieved_at: Option<u64>,
    /// Stored copy, relative to the output root.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocateSkip {
    pub file_id: String,
    pub line: Option<usize>,
    pub reason: String,
}

impl Pipeline {
    fn library_dumps(&self) -> Result<Vec<(String, SignatureDump, SignatureDump)>> {
        let dir = self.stage_dir(Stage::Extract);
        self.config
            .libraries
            .iter()
            .map(|lib| {
                let read = |which: &str| -> Result<SignatureDump> {
                    let p = dir.join(format!("{}.{which}.json", lib.name));
                    let text = fs::read_to_string(&p).map_err(|e| PipelineError::io(&p, e))?;
                    SignatureDump::from_json(&text).map_err(|e| stage_err(Stage::Extract)(e.to_string()))
                };
                Ok((lib.name.clone(), read("legacy")?, read("updated")?))
            })
            .collect()
    }

    /// Legacy and updated signatures of every updated API.
    fn update_signatures(&self) -> Result<BTreeMap<DottedPath, (ApiSignature, ApiSignature)>> {
        let updates: Vec<UpdateRecord> = jsonl::read(&self.stage_dir(Stage::Diff).join("updates.jsonl"))?;
        let mut all_legacy = BTreeMap::new();
        let mut all_updated = BTreeMap::new();
        for (_, legacy, updated) in self.library_dumps()? {
            all_legacy.extend(legacy.apis);
            all_updated.extend(updated.apis);
        }
        let mut out = BTreeMap::new();
        for u in updates {
            if let (Some(l), Some(n)) = (all_legacy.get(&u.api_path), all_updated.get(&u.api_path)) {
                out.insert(u.api_path.clone(), (l.clone(), n.clone()));
            }
        }
        Ok(out)
    }

    fn backend(&self) -> Result<(Box<dyn CodeSearchBackend>, RetryPolicy, bool)> {
        match &self.config.backend {
            BackendConfig::Local { root } => {
                let backend = LocalCorpusBackend::open(self.resolve(root)).map_err(|e| PipelineError::Config(e.to_string()))?;
                Ok((Box::new(backend), RetryPolicy::default(), true))
            }
            BackendConfig::Http { base_url, token_var, retry } => {
                let backend =
                    HttpSearchBackend::from_env(base_url.clone(), token_var).map_err(|e| PipelineError::External(e.to_string()))?;
                Ok((Box::new(backend), *retry, false))
            }
        }
    }

    fn client(&self) -> Result<Box<dyn GenerationClient>> {
        match &self.config.client {
            ClientConfig::Mock => Ok(Box::new(MockClient)),
            ClientConfig::Chat { base_url, model, token_var, temperature } => {
                let c = ChatCompletionClient::from_env(base_url.clone(), model.clone(), token_var, *temperature)
                    .map_err(|e| PipelineError::External(e.to_string()))?;
                Ok(Box::new(c))
            }
        }
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.max_in_flight)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Digests of everything a stage reads.
    fn stage_inputs(&self, stage: Stage) -> Result<BTreeMap<String, String>> {
        let mut inputs = BTreeMap::new();
        match stage {
            Stage::Extract => {
                for lib in &self.config.libraries {
                    for p in [&lib.legacy, &lib.updated] {
                        let full = self.resolve(p);
                        inputs.insert(p.display().to_string(), file_digest(&full)?);
                    }
                }
            }
            _ => {
                for pre in stage.prerequisites() {
                    let m = self
                        .read_manifest(*pre)
                        .ok_or(PipelineError::MissingPrerequisite { stage, missing: *pre })?;
                    for o in &m.outputs {
                        inputs.insert(o.path.clone(), o.sha256.clone());
                    }
                }
            }
        }
        if stage == Stage::Plan || stage == Stage::Fetch {
            if let BackendConfig::Local { root } = &self.config.backend {
                inputs.insert("local_corpus".into(), tree_digest(&self.resolve(root))?);
            }
        }
        if stage == Stage::Evaluate {
            if let Some(dir) = &self.config.evaluate.outputs_dir {
                let dir = self.resolve(dir);
                for task in ["cct", "ect", "mcq"] {
                    let p = dir.join(format!("{task}_outputs.jsonl"));
                    if p.exists() {
                        inputs.insert(p.display().to_string(), file_digest(&p)?);
                    }
                }
            }
        }
        Ok(inputs)
    }

    fn up_to_date(&self, stage: Stage, config_digest: &str, inputs: &BTreeMap<String, String>) -> Option<StageManifest> {
        let m = self.read_manifest(stage)?;
        if m.config_digest != config_digest || &m.inputs != inputs {
            return None;
        }
        let root = self.root();
        for o in &m.outputs {
            if file_digest(&root.join(&o.path)).ok()? != o.sha256 {
                return None;
            }
        }
        Some(m)
    }

    /// Run one stage, or skip it when its manifest is current.
    pub fn run_stage(&self, stage: Stage) -> Result<StageOutcome> {
        for pre in stage.prerequisites() {
            if self.read_manifest(*pre).is_none() {
                return Err(PipelineError::MissingPrerequisite { stage, missing: *pre });
            }
        }
        let inputs = self.stage_inputs(stage)?;
        let config_digest = sha256_hex(self.stage_config(stage).to_string().as_bytes());
        if let Some(manifest) = self.up_to_date(stage, &config_digest, &inputs) {
            log::info!("{stage}: up to date");
            return Ok(StageOutcome { manifest, skipped: true });
        }
        // an interrupted run must not leave a manifest describing old files
        let manifest_path = self.manifest_path(stage);
        if manifest_path.exists() {
            fs::remove_file(&manifest_path).map_err(|e| PipelineError::io(&manifest_path, e))?;
        }
        let write = match stage {
            Stage::Extract => self.run_extract()?,
            Stage::Diff => self.run_diff()?,
            Stage::Plan => self.run_plan()?,
            Stage::Fetch => self.run_fetch()?,
            Stage::Locate => self.run_locate()?,
            Stage::Synthesize => self.run_synthesize()?,
            Stage::Build => self.run_build()?,
            Stage::Evaluate => self.run_evaluate()?,
        };
        let dir = self.stage_dir(stage);
        let mut outputs = Vec::new();
        for (name, bytes, is_jsonl) in &write.files {
            let path = dir.join(name);
            write_atomic(&path, bytes)?;
            outputs.push(OutputEntry {
                path: format!("{}/{}", stage.name(), name),
                sha256: sha256_hex(bytes),
                items: is_jsonl.then(|| bytes.iter().filter(|b| **b == b'\n').count()),
            });
        }
        let manifest = StageManifest {
            stage,
            config_digest,
            inputs,
            outputs,
            counts: write.counts,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_atomic(&manifest_path, text.as_bytes())?;
        log::info!("{stage}: {:?}", manifest.counts);
        Ok(StageOutcome { manifest, skipped: false })
    }

    /// Run every stage in order.
    pub fn run_all(&self) -> Result<Vec<StageOutcome>> {
        Stage::ALL.into_iter().map(|s| self.run_stage(s)).collect()
    }

    fn run_extract(&self) -> Result<StageWrite> {
        let mut w = StageWrite::new();
        let mut apis = 0;
        for lib in &self.config.libraries {
            for (which, p) in [("legacy", &lib.legacy), ("updated", &lib.updated)] {
                let full = self.resolve(p);
                let text = fs::read_to_string(&full).map_err(|e| PipelineError::Config(format!("{}: {e}", full.display())))?;
                let dump = SignatureDump::from_json(&text)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", full.display())))?;
                apis += dump.apis.len();
                let mut out = dump.to_json();
                out.push('\n');
                w.raw(&format!("{}.{which}.json", lib.name), out.into_bytes());
            }
        }
        w.count("apis", apis);
        w.count("libraries", self.config.libraries.len());
        Ok(w)
    }

    fn run_diff(&self) -> Result<StageWrite> {
        let mut w = StageWrite::new();
        let mut updates = Vec::new();
        let mut near = Vec::new();
        let mut summaries = Vec::new();
        for (name, legacy, updated) in self.library_dumps()? {
            let report = diff::diff_dumps(&legacy, &updated, self.config.threshold)
                .map_err(|e| stage_err(Stage::Diff)(e.to_string()))?;
            summaries.push(DiffSummary {
                library: name,
                updates: report.updates.len(),
                unchanged: report.unchanged_count,
                only_in_legacy: report.apis_only_in_legacy.clone(),
                only_in_updated: report.apis_only_in_updated.clone(),
                kind_changed: report.kind_changed.clone(),
                partition_ok: report.check_partition(&legacy, &updated),
            });
            for u in &report.updates {
                near.extend(u.near_matches.iter().map(|m| NearMatchRow {
                    api_path: u.api_path.clone(),
                    legacy_name: m.legacy_name.clone(),
                    updated_name: m.updated_name.clone(),
                    similarity: m.similarity,
                }));
            }
            updates.extend(report.updates);
        }
        w.count("updates", updates.len());
        w.count("near_matches", near.len());
        w.jsonl("updates.jsonl", &updates);
        w.jsonl("near_matches.jsonl", &near);
        w.json("summary.json", &summaries);
        Ok(w)
    }

    fn run_plan(&self) -> Result<StageWrite> {
        let updates: Vec<UpdateRecord> = jsonl::read(&self.stage_dir(Stage::Diff).join("updates.jsonl"))?;
        let (backend, retry, _) = self.backend()?;
        let outcome = search::plan_search(
            updates.iter().map(|u| (&u.api_path, u.kind)),
            backend.as_ref(),
            self.config.file_cap,
            &retry,
        )
        .map_err(|e| stage_err(Stage::Plan)(e.to_string()))?;
        if !outcome.failures.is_empty() && outcome.failures.len() == updates.len() {
            return Err(PipelineError::External(format!("every search failed, first: {}", outcome.failures[0].1)));
        }
        let planned: Vec<PlannedFile> = outcome
            .files
            .iter()
            .flat_map(|(api, refs)| refs.iter().map(|f| PlannedFile { api_path: api.clone(), file: f.clone() }))
            .collect();
        let failures: Vec<serde_json::Value> = outcome
            .failures
            .iter()
            .map(|(api, reason)| serde_json::json!({ "api_path": api, "reason": reason }))
            .collect();
        let mut w = StageWrite::new();
        w.count("queries", outcome.queries);
        w.count("files", planned.len());
        w.count("failures", failures.len());
        w.jsonl("files.jsonl", &planned);
        w.jsonl("failures.jsonl", &failures);
        Ok(w)
    }

    fn run_fetch(&self) -> Result<StageWrite> {
        let planned: Vec<PlannedFile> = jsonl::read(&self.stage_dir(Stage::Plan).join("files.jsonl"))?;
        let (backend, retry, local) = self.backend()?;
        let mut w = StageWrite::new();
        let mut fetched = Vec::new();
        let mut failures = Vec::new();
        for p in &planned {
            match retry.run(|| backend.fetch(&p.file)) {
                Ok(text) => {
                    let rel = format!("corpus/{}/{}.src", short_hash(&p.api_path.to_string()), short_hash(&p.file.source_id));
                    let retrieved_at =
                        (!local).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
                    fetched.push(FetchedFile {
                        api_path: p.api_path.clone(),
                        source_id: p.file.source_id.clone(),
                        url: p.file.url.clone(),
                        template_index: p.file.template_index,
                        retrieved_at,
                        path: format!("{}/{rel}", Stage::Fetch.name()),
                    });
                    w.raw(&rel, text.into_bytes());
                }
                Err(e) => failures.push(serde_json::json!({
                    "api_path": p.api_path, "source_id": p.file.source_id, "reason": e.to_string()
                })),
            }
        }
        if !planned.is_empty() && fetched.is_empty() {
            return Err(PipelineError::External("no file could be fetched".into()));
        }
        w.count("files", fetched.len());
        w.count("failures", failures.len());
        w.jsonl("manifest.jsonl", &fetched);
        w.jsonl("failures.jsonl", &failures);
        Ok(w)
    }

    fn run_locate(&self) -> Result<StageWrite> {
        let fetched: Vec<FetchedFile> = jsonl::read(&self.stage_dir(Stage::Fetch).join("manifest.jsonl"))?;
        let signatures = self.update_signatures()?;
        let root = self.root();
        let results: Vec<(Vec<MetadataItem>, Vec<LocateSkip>, usize)> = fetched
            .par_iter()
            .map(|f| {
                let Some((_, api)) = signatures.get(&f.api_path) else {
                    return (Vec::new(), Vec::new(), 0);
                };
                let skip = |line: Option<usize>, reason: String| LocateSkip { file_id: f.source_id.clone(), line, reason };
                let text = match fs::read_to_string(root.join(&f.path)) {
                    Ok(t) => t,
                    Err(e) => return (Vec::new(), vec![skip(None, format!("unreadable: {e}"))], 0),
                };
                let source = match ParsedSource::parse(f.source_id.clone(), text) {
                    Ok(s) => s,
                    Err(e) => return (Vec::new(), vec![skip(None, e.to_string())], 0),
                };
                let analysis = locate::analyze_source(&source, api);
                let mut skips: Vec<LocateSkip> = analysis
                    .star_imports
                    .iter()
                    .map(|s| skip(Some(source.line_of(s.offset)), format!("star import from `{}` ignored", s.module)))
                    .collect();
                skips.extend(analysis.skips.iter().map(|s| skip(Some(s.line), "site outside function".into())));
                (analysis.items, skips, analysis.sites.len())
            })
            .collect();
        let mut items = Vec::new();
        let mut skips = Vec::new();
        let mut sites = 0;
        for (i, s, n) in results {
            items.extend(i);
            skips.extend(s);
            sites += n;
        }
        let mut w = StageWrite::new();
        w.count("files", fetched.len());
        w.count("sites", sites);
        w.count("items", items.len());
        w.count("skips", skips.len());
        w.jsonl("metadata.jsonl", &items);
        w.jsonl("skips.jsonl", &skips);
        Ok(w)
    }

    fn run_synthesize(&self) -> Result<StageWrite> {
        let items: Vec<MetadataItem> = jsonl::read(&self.stage_dir(Stage::Locate).join("metadata.jsonl"))?;
        let signatures = self.update_signatures()?;
        let client = self.client()?;
        let seed = self.config.seed;
        let retries = self.config.max_retries;
        let outcomes = self.thread_pool()?.install(|| {
            items
                .par_iter()
                .filter_map(|item| signatures.get(&item.api_path).map(|s| (item, s)))
                .map(|(item, (legacy, updated))| {
                    let s = item_seed(seed, &[&item.api_path.to_string(), &item.file_id, &item.start_line.to_string()]);
                    synth::synthesize_pair(client.as_ref(), item, legacy, updated, s, retries).map(|o| (item, o))
                })
                .collect::<Result<Vec<_>, _>>()
        });
        let outcomes = outcomes.map_err(|e| match e {
            synth::SynthError::Client(c) => PipelineError::External(c.to_string()),
            other => stage_err(Stage::Synthesize)(other.to_string()),
        })?;
        let mut pairs = Vec::new();
        let mut log = Vec::new();
        let mut review = Vec::new();
        for (item, o) in outcomes {
            log.extend(o.log);
            review.extend(o.flag);
            if let Some(r) = o.result {
                pairs.push(PairRecord {
                    api_path: item.api_path.clone(),
                    metadata: item.clone(),
                    updated_code: r.updated_code,
                    outdated_code: r.outdated_code,
                });
            }
        }
        let mut w = StageWrite::new();
        w.count("items", items.len());
        w.count("pairs", pairs.len());
        w.count("prompts", log.len());
        w.count("flagged", review.len());
        w.jsonl("pairs.jsonl", &pairs);
        w.jsonl("log.jsonl", &log);
        w.jsonl("review.jsonl", &review);
        Ok(w)
    }

    fn run_build(&self) -> Result<StageWrite> {
        let pairs: Vec<PairRecord> = jsonl::read(&self.stage_dir(Stage::Synthesize).join("pairs.jsonl"))?;
        let signatures = self.update_signatures()?;
        let mut grouped: BTreeMap<DottedPath, Vec<PairRecord>> = BTreeMap::new();
        for p in pairs {
            grouped.entry(p.api_path.clone()).or_default().push(p);
        }
        let split = bench::sample_and_split(&grouped, self.config.counts, self.config.seed)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let BenchOutput { cct, ect, mcq, sft, pref, flags } = bench::build_benchmark(&split, &signatures, self.config.seed);
        let members = |part: &BTreeMap<DottedPath, Vec<PairRecord>>| -> BTreeMap<String, Vec<String>> {
            part.iter()
                .map(|(api, pairs)| {
                    let ids = pairs.iter().map(|p| format!("{}:{}", p.metadata.file_id, p.metadata.start_line)).collect();
                    (api.to_string(), ids)
                })
                .collect()
        };
        let dropped: Vec<serde_json::Value> = split
            .dropped
            .iter()
            .map(|(api, n)| serde_json::json!({ "api_path": api, "instances": n }))
            .collect();
        let split_record = serde_json::json!({
            "seed": self.config.seed,
            "counts": self.config.counts,
            "train": members(&split.train),
            "test": members(&split.test),
            "dropped": dropped,
        });
        let mut w = StageWrite::new();
        w.count("apis_kept", split.train.len());
        w.count("apis_dropped", dropped.len());
        w.count("train_pairs", split.train.values().map(Vec::len).sum());
        w.count("test_pairs", split.test.values().map(Vec::len).sum());
        w.count("cct", cct.len());
        w.count("ect", ect.len());
        w.count("mcq", mcq.len());
        w.count("flags", flags.len());
        w.jsonl("cct.jsonl", &cct);
        w.jsonl("ect.jsonl", &ect);
        w.jsonl("mcq.jsonl", &mcq);
        w.jsonl("train_sft.jsonl", &sft);
        w.jsonl("train_pref.jsonl", &pref);
        w.jsonl("flags.jsonl", &flags);
        w.json("split.json", &split_record);
        Ok(w)
    }

    fn run_evaluate(&self) -> Result<StageWrite> {
        let dir = self.stage_dir(Stage::Build);
        let cct: Vec<TaskItem> = jsonl::read(&dir.join("cct.jsonl"))?;
        let ect: Vec<TaskItem> = jsonl::read(&dir.join("ect.jsonl"))?;
        let mcq: Vec<McqItem> = jsonl::read(&dir.join("mcq.jsonl"))?;
        let tasks: [(Task, Vec<String>, Vec<String>); 3] = [
            (Task::Cct, cct.iter().map(completion_prompt).collect(), cct.iter().map(|i| i.answer.clone()).collect()),
            (Task::Ect, ect.iter().map(correction_prompt).collect(), ect.iter().map(|i| i.answer.clone()).collect()),
            (Task::Mcq, mcq.iter().map(choice_prompt).collect(), mcq.iter().map(|i| i.answer.clone()).collect()),
        ];
        let cfg = &self.config.evaluate;
        let mut w = StageWrite::new();
        let mut reports: Vec<MetricReport> = Vec::new();
        for (task, prompts, answers) in tasks {
            let name = format!("{task:?}").to_lowercase();
            let outputs: Vec<ModelOutputRecord> = match &cfg.outputs_dir {
                Some(d) => jsonl::read(&self.resolve(d).join(format!("{name}_outputs.jsonl")))?,
                None => self.sample_outputs(&prompts)?,
            };
            let report = metrics::score_run(task, &answers, &outputs, &cfg.score)
                .map_err(|e| stage_err(Stage::Evaluate)(e.to_string()))?;
            w.count(&format!("{name}_items"), report.item_count);
            w.count(&format!("{name}_unextractable"), report.unextractable);
            w.jsonl(&format!("{name}_outputs.jsonl"), &outputs);
            reports.push(report);
        }
        let by_task: BTreeMap<String, &MetricReport> =
            reports.iter().map(|r| (format!("{:?}", r.task).to_lowercase(), r)).collect();
        w.json("report.json", &by_task);
        w.raw("summary.txt", metrics::render_table(&reports).into_bytes());
        Ok(w)
    }

    fn sample_outputs(&self, prompts: &[String]) -> Result<Vec<ModelOutputRecord>> {
        let client = self.client()?;
        let n = self.config.evaluate.samples;
        let seed = self.config.seed;
        self.thread_pool()?
            .install(|| {
                prompts
                    .par_iter()
                    .enumerate()
                    .map(|(id, prompt)| {
                        let samples = (0..n)
                            .map(|i| client.generate(prompt, seed.wrapping_add(i as u64)))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(ModelOutputRecord { item_id: id, samples })
                    })
                    .collect::<Result<Vec<_>, synth::ClientError>>()
            })
            .map_err(|e| PipelineError::External(e.to_string()))
    }
}

fn tree_digest(root: &Path) -> Result<String> {
    let mut h = Sha256::new();
    let mut entries: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .collect();
    entries.sort();
    for p in entries {
        let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
        h.update(rel.as_bytes());
        h.update([0]);
        h.update(fs::read(&p).map_err(|e| PipelineError::io(&p, e))?);
        h.update([0]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn completion_prompt(item: &TaskItem) -> String {
    format!(
        "Complete the parameter list of the last API call ({}) in the code below. Reply with the parenthesized argument list only.\n\n{}",
        item.api_path, item.question
    )
}

pub fn correction_prompt(item: &TaskItem) -> String {
    format!(
        "The last API call ({}) in the code below uses an outdated parameter list. Reply with the corrected parenthesized argument list only.\n\n{}",
        item.api_path, item.question
    )
}

pub fn choice_prompt(item: &McqItem) -> String {
    format!(
        "Choose the parameter list that correctly completes the last API call ({}) in the code below.\n\n{}\n\nA. {}\nB. {}\nC. {}\nD. {}\n\nAnswer with a single letter.",
        item.api_path, item.question, item.a, item.b, item.c, item.d
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Stage>(), Err(PipelineError::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::Config("x".into()).exit_code(), 2);
        assert_eq!(PipelineError::MissingPrerequisite { stage: Stage::Build, missing: Stage::Synthesize }.exit_code(), 3);
        assert_eq!(PipelineError::External("x".into()).exit_code(), 4);
    }

    #[test]
    fn config_validation() {
        let json = r#"{
            "output_root": "out", "seed": 7,
            "libraries": [{"name": "lib", "legacy": "a.json", "updated": "b.json"}],
            "backend": {"type": "local", "root": "corpus"},
            "client": {"type": "mock"}
        }"#;
        let cfg: PipelineConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.counts, SplitCounts::default());
        let mut bad = cfg.clone();
        bad.counts.test = 4;
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.threshold = 1.5;
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<PipelineConfig>(&json.replace("\"seed\": 7,", "\"seed\": 7, \"token\": \"x\",")).is_err());
    }

    #[test]
    fn atomic_write_and_lock() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, b"hello").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "hello");
        let lock = RunLock::acquire(dir.path(), false).unwrap();
        assert!(matches!(RunLock::acquire(dir.path(), false), Err(PipelineError::Locked(_))));
        drop(lock);
        let _again = RunLock::acquire(dir.path(), false).unwrap();
    }

    #[test]
    fn choice_prompt_lists_options() {
        let item = McqItem {
            api_path: "m.f".parse().unwrap(),
            question: "def g():\n    m.f".into(),
            a: "(a)".into(),
            b: "(b)".into(),
            c: "(c)".into(),
            d: "(d)".into(),
            answer: "A".into(),
        };
        let p = choice_prompt(&item);
        assert!(p.contains("\nA. (a)\n") && p.contains("\nD. (d)\n"));
        let reply = MockClient.generate(&p, 0).unwrap();
        assert!(metrics::extract_letter(&reply).is_some());
    }
}

//! Static verification of API invocation sites in retrieved source files.
//!
//! The flow per file is: parse, build the alias map from import
//! statements, infer receiver types from the three sanctioned situations,
//! locate call expressions that resolve to the target API, then cut the
//! enclosing function definition into context / target / suffix.

mod scope;
mod segment;
mod walk;

use rustpython_parser::ast::{self, Constant, Expr, Stmt};
use rustpython_parser::Parse;
use serde::{Deserialize, Serialize};

use crate::model::{ApiKind, ApiSignature, DottedPath};
use scope::{BindKind, BindingTable, ScopeTree};
use walk::{attribute_chain, span};

pub use scope::{ScopeKind, StarImport};
pub use segment::{segment_and_metadata, segments, MetadataItem, Segment, SegmentSkip, SegmentSkipReason};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocateError {
    #[error("{file_id}: parse error: {message}")]
    Parse { file_id: String, message: String },
}

/// A parsed source file with a line index.
#[derive(Debug, Clone)]
pub struct ParsedSource {
    pub file_id: String,
    text: String,
    suite: Vec<Stmt>,
    line_starts: Vec<usize>,
}

impl ParsedSource {
    pub fn parse(file_id: impl Into<String>, text: impl Into<String>) -> Result<Self, LocateError> {
        let file_id = file_id.into();
        let text = text.into();
        let suite = ast::Suite::parse(&text, &file_id)
            .map_err(|e| LocateError::Parse { file_id: file_id.clone(), message: e.to_string() })?;
        let line_starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        Ok(Self { file_id, text, suite, line_starts })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub(crate) fn suite(&self) -> &[Stmt] {
        &self.suite
    }

    /// 1-based line containing byte `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        self.line_starts.partition_point(|&s| s <= offset)
    }

    /// Byte offset of the first character of the 1-based `line`.
    pub fn line_start(&self, line: usize) -> usize {
        self.line_starts[line.saturating_sub(1).min(self.line_starts.len() - 1)]
    }

    /// 0-based byte column of `offset` within its line.
    pub fn column_of(&self, offset: usize) -> usize {
        offset - self.line_start(self.line_of(offset))
    }
}

/// Import-derived name bindings, per scope and position.
#[derive(Debug, Clone)]
pub struct AliasMap {
    tree: ScopeTree,
    table: BindingTable<Option<DottedPath>>,
    pub star_imports: Vec<StarImport>,
}

impl AliasMap {
    /// Full path bound to `name` at byte position `pos`, if it comes from an
    /// import that is still live there.
    pub fn resolve(&self, name: &str, pos: usize) -> Option<&DottedPath> {
        self.table.lookup(&self.tree, name, pos)?.as_ref()
    }

    /// Module-scope binding of `name` at the end of the file.
    pub fn get(&self, name: &str) -> Option<&DottedPath> {
        self.table.final_binding(0, name)?.as_ref()
    }

    /// All live-import events as (scope kind, local name, position, path).
    pub fn bindings(&self) -> Vec<(ScopeKind, &str, usize, &DottedPath)> {
        let mut out: Vec<_> = self
            .table
            .iter()
            .filter_map(|(scope, name, pos, v)| v.as_ref().map(|p| (self.tree.kind(scope), name, pos, p)))
            .collect();
        out.sort_by(|a, b| (a.2, a.1).cmp(&(b.2, b.1)));
        out
    }

    pub fn is_empty(&self) -> bool {
        self.bindings().is_empty()
    }
}

pub fn build_alias_map(source: &ParsedSource) -> AliasMap {
    let collected = scope::collect(source.suite(), source.text.len());
    let table = scope::table_from(&collected, |b| match &b.kind {
        BindKind::Import(path) => Some(path.clone()),
        _ => None,
    });
    AliasMap { tree: collected.tree, table, star_imports: collected.star_imports }
}

/// Which of the sanctioned inference rules produced a typed binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceSituation {
    /// `x = pkg.Class(...)`
    InitializerAssignment,
    /// `def f(x: pkg.Class)`
    ParameterAnnotation,
    /// `x = make()` where `def make() -> pkg.Class` is in the same file
    ReturnAnnotation,
}

impl InferenceSituation {
    pub fn number(self) -> u8 {
        match self {
            InferenceSituation::InitializerAssignment => 1,
            InferenceSituation::ParameterAnnotation => 2,
            InferenceSituation::ReturnAnnotation => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedBinding {
    pub class: DottedPath,
    pub situation: InferenceSituation,
}

/// Variable types inferred from the sanctioned situations only.
#[derive(Debug, Clone)]
pub struct TypeEnvironment {
    tree: ScopeTree,
    table: BindingTable<Option<TypedBinding>>,
}

impl TypeEnvironment {
    pub fn lookup(&self, name: &str, pos: usize) -> Option<&TypedBinding> {
        self.table.lookup(&self.tree, name, pos)?.as_ref()
    }

    /// All typed events as (scope kind, name, position, binding).
    pub fn bindings(&self) -> Vec<(ScopeKind, &str, usize, &TypedBinding)> {
        let mut out: Vec<_> = self
            .table
            .iter()
            .filter_map(|(scope, name, pos, v)| v.as_ref().map(|t| (self.tree.kind(scope), name, pos, t)))
            .collect();
        out.sort_by(|a, b| (a.2, a.1).cmp(&(b.2, b.1)));
        out
    }
}

/// Resolve a name/attribute chain, or a string annotation holding one,
/// through the alias map at `pos`.
fn resolve_reference(expr: &Expr, aliases: &AliasMap, pos: usize) -> Option<DottedPath> {
    if let Expr::Constant(ast::ExprConstant { value: Constant::Str(s), .. }) = expr {
        let mut fields = s.trim().split('.');
        let head = fields.next()?;
        let rest: Vec<&str> = fields.collect();
        if !crate::text::is_identifier(head) || !rest.iter().all(|f| crate::text::is_identifier(f)) {
            return None;
        }
        return aliases.resolve(head, pos).map(|p| p.extend(rest));
    }
    let (head, attrs) = attribute_chain(expr)?;
    aliases.resolve(head, pos).map(|p| p.extend(attrs))
}

pub fn infer_types(source: &ParsedSource, aliases: &AliasMap) -> TypeEnvironment {
    let collected = scope::collect(source.suite(), source.text.len());
    let tree = collected.tree.clone();
    // return classes of same-file function definitions
    let returns = scope::table_from(&collected, |b| match &b.kind {
        BindKind::FunctionDef(Some(ann)) => resolve_reference(ann, aliases, span(*ann).0),
        _ => None,
    });
    let table = scope::table_from(&collected, |b| match &b.kind {
        BindKind::Value(Expr::Call(call)) => {
            let at = span(call).0;
            let (head, attrs) = attribute_chain(&call.func)?;
            if let Some(path) = aliases.resolve(head, at) {
                return Some(TypedBinding {
                    class: path.extend(attrs),
                    situation: InferenceSituation::InitializerAssignment,
                });
            }
            if !attrs.is_empty() {
                return None;
            }
            let class = returns.lookup(&tree, head, at)?.clone()?;
            Some(TypedBinding { class, situation: InferenceSituation::ReturnAnnotation })
        }
        BindKind::Param(Some(ann)) => resolve_reference(ann, aliases, span(*ann).0)
            .map(|class| TypedBinding { class, situation: InferenceSituation::ParameterAnnotation }),
        _ => None,
    });
    TypeEnvironment { tree: collected.tree, table }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasHop {
    pub local: String,
    pub target: DottedPath,
}

/// Why a call was accepted as an invocation of the target API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// The callee is spelled with the full path of a plain `import`.
    DirectName,
    AliasChain { hops: Vec<AliasHop> },
    TypedReceiver { situation: InferenceSituation },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationSite {
    pub file_id: String,
    pub start_line: usize,
    pub end_line: usize,
    /// 0-based byte column of the call start.
    pub column: usize,
    pub api_path: DottedPath,
    pub evidence: Evidence,
    /// Byte offsets of the call start, the end of the callee and the call end.
    pub call_start: usize,
    pub callee_end: usize,
    pub call_end: usize,
}

fn alias_evidence(head: &str, bound: &DottedPath) -> Evidence {
    if bound.len() == 1 && bound.root() == head {
        Evidence::DirectName
    } else {
        Evidence::AliasChain { hops: vec![AliasHop { local: head.to_string(), target: bound.clone() }] }
    }
}

pub fn locate_invocations(
    source: &ParsedSource,
    api: &ApiSignature,
    aliases: &AliasMap,
    types: &TypeEnvironment,
) -> Vec<InvocationSite> {
    let owner = api.owning_class();
    let mut sites = Vec::new();
    walk::for_each_expr(source.suite(), &mut |expr, shadow| {
        let Expr::Call(call) = expr else { return };
        let (start, end) = span(call);
        let callee_end = span(call.func.as_ref()).1;
        let evidence = match api.kind {
            ApiKind::Function | ApiKind::Initializer => {
                let Some((head, attrs)) = attribute_chain(&call.func) else { return };
                if shadow.contains(&head) {
                    return;
                }
                let Some(bound) = aliases.resolve(head, start) else { return };
                if bound.extend(attrs.iter().copied()) != api.api_path {
                    return;
                }
                alias_evidence(head, bound)
            }
            ApiKind::Method => {
                let Expr::Attribute(attr) = call.func.as_ref() else { return };
                let Expr::Name(recv) = attr.value.as_ref() else { return };
                if attr.attr.as_str() != api.api_path.last() || shadow.contains(&recv.id.as_str()) {
                    return;
                }
                let Some(binding) = types.lookup(recv.id.as_str(), start) else { return };
                if Some(&binding.class) != owner.as_ref() {
                    return;
                }
                Evidence::TypedReceiver { situation: binding.situation }
            }
        };
        sites.push(InvocationSite {
            file_id: source.file_id.clone(),
            start_line: source.line_of(start),
            end_line: source.line_of(end.saturating_sub(1).max(start)),
            column: source.column_of(start),
            api_path: api.api_path.clone(),
            evidence,
            call_start: start,
            callee_end,
            call_end: end,
        });
    });
    sites.sort_by_key(|s| (s.start_line, s.column, s.call_end));
    sites
}

/// Everything the locator derives from one file for one API.
#[derive(Debug, Clone)]
pub struct FileAnalysis {
    pub sites: Vec<InvocationSite>,
    pub items: Vec<MetadataItem>,
    pub skips: Vec<SegmentSkip>,
    pub star_imports: Vec<StarImport>,
}

pub fn analyze_source(source: &ParsedSource, api: &ApiSignature) -> FileAnalysis {
    let aliases = build_alias_map(source);
    let types = infer_types(source, &aliases);
    let sites = locate_invocations(source, api, &aliases, &types);
    let (items, skips) = segment_and_metadata(source, &sites);
    FileAnalysis { sites, items, skips, star_imports: aliases.star_imports }
}

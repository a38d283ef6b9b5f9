//! Lexical scopes and position-aware name bindings.
//!
//! Every name-binding construct (imports, assignments, parameters, loop
//! targets, definitions, ...) becomes an event at a byte position inside a
//! scope. A lookup picks the scope that owns the name following the
//! subject language's rules (function locals, then enclosing functions,
//! then the module; class bodies are not visible from nested functions)
//! and returns the latest event at or before the use position.

use std::collections::HashMap;

use rustpython_parser::ast::{self, Expr, Stmt};

use super::walk::{self, span};
use crate::model::DottedPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Module,
    Function,
    Class,
}

#[derive(Debug, Clone)]
pub(crate) struct Scope {
    pub kind: ScopeKind,
    pub parent: Option<usize>,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct ScopeTree {
    pub(crate) scopes: Vec<Scope>,
}

impl ScopeTree {
    fn new(len: usize) -> Self {
        Self {
            scopes: vec![Scope { kind: ScopeKind::Module, parent: None, start: 0, end: len + 1 }],
        }
    }

    fn push(&mut self, kind: ScopeKind, parent: usize, start: usize, end: usize) -> usize {
        self.scopes.push(Scope { kind, parent: Some(parent), start, end });
        self.scopes.len() - 1
    }

    /// Deepest scope whose range contains `pos`.
    pub fn innermost(&self, pos: usize) -> usize {
        let mut best = 0;
        for (i, s) in self.scopes.iter().enumerate().skip(1) {
            if s.start <= pos && pos < s.end && s.start >= self.scopes[best].start {
                best = i;
            }
        }
        best
    }

    pub fn kind(&self, scope: usize) -> ScopeKind {
        self.scopes[scope].kind
    }
}

/// Position-ordered binding events per scope.
#[derive(Debug, Clone)]
pub struct BindingTable<T> {
    per_scope: Vec<HashMap<String, Vec<(usize, T)>>>,
}

impl<T> BindingTable<T> {
    fn new(scopes: usize) -> Self {
        Self { per_scope: (0..scopes).map(|_| HashMap::new()).collect() }
    }

    fn insert(&mut self, scope: usize, name: &str, pos: usize, value: T) {
        let events = self.per_scope[scope].entry(name.to_string()).or_default();
        let at = events.partition_point(|(p, _)| *p <= pos);
        events.insert(at, (pos, value));
    }

    /// The binding of `name` visible at `pos`, if any.
    pub fn lookup(&self, tree: &ScopeTree, name: &str, pos: usize) -> Option<&T> {
        let mut scope = tree.innermost(pos);
        let mut first = true;
        loop {
            let s = &tree.scopes[scope];
            let visible = first || s.kind != ScopeKind::Class;
            if visible {
                if let Some(events) = self.per_scope[scope].get(name) {
                    let idx = events.partition_point(|(p, _)| *p <= pos);
                    return idx.checked_sub(1).map(|i| &events[i].1);
                }
            }
            first = false;
            scope = s.parent?;
        }
    }

    /// Last binding of `name` in the given scope.
    pub fn final_binding(&self, scope: usize, name: &str) -> Option<&T> {
        self.per_scope.get(scope)?.get(name)?.last().map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, usize, &T)> {
        self.per_scope.iter().enumerate().flat_map(|(scope, names)| {
            names
                .iter()
                .flat_map(move |(name, events)| events.iter().map(move |(pos, v)| (scope, name.as_str(), *pos, v)))
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum BindKind<'a> {
    Import(DottedPath),
    Value(&'a Expr),
    Param(Option<&'a Expr>),
    FunctionDef(Option<&'a Expr>),
    Other,
}

#[derive(Debug, Clone)]
pub(crate) struct RawBinding<'a> {
    pub scope: usize,
    pub name: &'a str,
    pub pos: usize,
    pub kind: BindKind<'a>,
}

/// A `from m import *` that was ignored for resolution.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StarImport {
    pub module: String,
    pub offset: usize,
}

pub(crate) struct Collected<'a> {
    pub tree: ScopeTree,
    pub bindings: Vec<RawBinding<'a>>,
    pub star_imports: Vec<StarImport>,
}

pub(crate) fn collect<'a>(suite: &'a [Stmt], len: usize) -> Collected<'a> {
    let mut c = Collected { tree: ScopeTree::new(len), bindings: Vec::new(), star_imports: Vec::new() };
    collect_body(suite, 0, &mut c);
    c
}

fn bind<'a>(c: &mut Collected<'a>, scope: usize, name: &'a str, pos: usize, kind: BindKind<'a>) {
    c.bindings.push(RawBinding { scope, name, pos, kind });
}

fn bind_targets<'a>(c: &mut Collected<'a>, scope: usize, target: &'a Expr, pos: Option<usize>) {
    let mut names = Vec::new();
    walk::target_names(target, &mut names);
    for (name, end) in names {
        bind(c, scope, name, pos.unwrap_or(end), BindKind::Other);
    }
}

fn bind_function<'a>(
    c: &mut Collected<'a>,
    scope: usize,
    stmt: &'a Stmt,
    name: &'a str,
    args: &'a ast::Arguments,
    body: &'a [Stmt],
    returns: Option<&'a Expr>,
) {
    let (start, end) = span(stmt);
    bind(c, scope, name, start, BindKind::FunctionDef(returns));
    let body_start = body.first().map_or(end, |s| span(s).0);
    let inner = c.tree.push(ScopeKind::Function, scope, body_start, end);
    for a in args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs) {
        bind(c, inner, a.def.arg.as_str(), body_start, BindKind::Param(a.def.annotation.as_deref()));
    }
    for a in args.vararg.iter().chain(args.kwarg.iter()) {
        bind(c, inner, a.arg.as_str(), body_start, BindKind::Other);
    }
    collect_body(body, inner, c);
}

fn collect_body<'a>(stmts: &'a [Stmt], scope: usize, c: &mut Collected<'a>) {
    for stmt in stmts {
        // assignment expressions bind in the current scope
        for e in walk::stmt_exprs(stmt) {
            let mut found: Vec<(&'a str, usize)> = Vec::new();
            walk::walk_expr(e, &mut Vec::new(), &mut |e, _| {
                if let Expr::NamedExpr(n) = e {
                    walk::target_names(&n.target, &mut found);
                }
            });
            for (name, end) in found {
                bind(c, scope, name, end, BindKind::Other);
            }
        }
        let (start, end) = span(stmt);
        match stmt {
            Stmt::Import(s) => {
                for alias in &s.names {
                    let dotted = alias.name.as_str();
                    let parsed: Result<DottedPath, _> = dotted.parse();
                    let Ok(full) = parsed else { continue };
                    match &alias.asname {
                        Some(asname) => bind(c, scope, asname.as_str(), end, BindKind::Import(full)),
                        None => {
                            let root = full.prefix(1);
                            let head = dotted.split('.').next().unwrap_or(dotted);
                            bind(c, scope, head, end, BindKind::Import(root));
                        }
                    }
                }
            }
            Stmt::ImportFrom(s) => {
                let relative = s.level.as_ref().map_or(false, |l| l.to_u32() > 0);
                let module: Option<DottedPath> = s.module.as_ref().and_then(|m| m.as_str().parse().ok());
                for alias in &s.names {
                    let local = alias.asname.as_ref().unwrap_or(&alias.name).as_str();
                    if alias.name.as_str() == "*" {
                        c.star_imports.push(StarImport {
                            module: s.module.as_ref().map(|m| m.to_string()).unwrap_or_default(),
                            offset: start,
                        });
                        continue;
                    }
                    match (&module, relative) {
                        (Some(m), false) => {
                            bind(c, scope, local, end, BindKind::Import(m.child(alias.name.as_str())))
                        }
                        _ => bind(c, scope, local, end, BindKind::Other),
                    }
                }
            }
            Stmt::Assign(s) => {
                for target in &s.targets {
                    match target {
                        Expr::Name(n) => bind(c, scope, n.id.as_str(), end, BindKind::Value(&s.value)),
                        other => bind_targets(c, scope, other, Some(end)),
                    }
                }
            }
            Stmt::AnnAssign(s) => {
                if let (Expr::Name(n), Some(value)) = (s.target.as_ref(), s.value.as_deref()) {
                    bind(c, scope, n.id.as_str(), end, BindKind::Value(value));
                }
            }
            Stmt::AugAssign(s) => bind_targets(c, scope, &s.target, Some(end)),
            Stmt::Delete(s) => s.targets.iter().for_each(|t| bind_targets(c, scope, t, Some(end))),
            Stmt::For(s) => bind_targets(c, scope, &s.target, None),
            Stmt::AsyncFor(s) => bind_targets(c, scope, &s.target, None),
            Stmt::With(s) => {
                for item in &s.items {
                    if let Some(v) = &item.optional_vars {
                        bind_targets(c, scope, v, None);
                    }
                }
            }
            Stmt::AsyncWith(s) => {
                for item in &s.items {
                    if let Some(v) = &item.optional_vars {
                        bind_targets(c, scope, v, None);
                    }
                }
            }
            Stmt::Try(ast::StmtTry { handlers, .. }) | Stmt::TryStar(ast::StmtTryStar { handlers, .. }) => {
                for h in handlers {
                    let ast::ExceptHandler::ExceptHandler(h) = h;
                    if let Some(name) = &h.name {
                        let body_start = h.body.first().map_or(span(h).0, |b| span(b).0);
                        bind(c, scope, name.as_str(), body_start, BindKind::Other);
                    }
                }
            }
            Stmt::FunctionDef(s) => {
                bind_function(c, scope, stmt, s.name.as_str(), &s.args, &s.body, s.returns.as_deref());
                continue;
            }
            Stmt::AsyncFunctionDef(s) => {
                bind_function(c, scope, stmt, s.name.as_str(), &s.args, &s.body, s.returns.as_deref());
                continue;
            }
            Stmt::ClassDef(s) => {
                bind(c, scope, s.name.as_str(), start, BindKind::Other);
                let body_start = s.body.first().map_or(end, |b| span(b).0);
                let inner = c.tree.push(ScopeKind::Class, scope, body_start, end);
                collect_body(&s.body, inner, c);
                continue;
            }
            _ => {}
        }
        for body in walk::stmt_bodies(stmt) {
            collect_body(body, scope, c);
        }
    }
}

pub(crate) fn table_from<'a, T>(
    c: &Collected<'a>,
    mut value: impl FnMut(&RawBinding<'a>) -> T,
) -> BindingTable<T> {
    let mut table = BindingTable::new(c.tree.scopes.len());
    for b in &c.bindings {
        let v = value(b);
        table.insert(b.scope, b.name, b.pos, v);
    }
    table
}

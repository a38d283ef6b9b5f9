//! AST traversal helpers over the subject-language syntax tree.

use rustpython_parser::ast::{self, Expr, Ranged, Stmt};

pub(crate) fn span<T: Ranged>(node: &T) -> (usize, usize) {
    let r = node.range();
    (usize::from(r.start()), usize::from(r.end()))
}

/// `a.b.c` as (`a`, [`b`, `c`]). Anything other than a pure name/attribute
/// chain yields `None`.
pub(crate) fn attribute_chain(expr: &Expr) -> Option<(&str, Vec<&str>)> {
    match expr {
        Expr::Name(n) => Some((n.id.as_str(), Vec::new())),
        Expr::Attribute(a) => {
            let (head, mut attrs) = attribute_chain(&a.value)?;
            attrs.push(a.attr.as_str());
            Some((head, attrs))
        }
        _ => None,
    }
}

fn argument_names(args: &ast::Arguments) -> impl Iterator<Item = &str> {
    args.posonlyargs
        .iter()
        .chain(&args.args)
        .chain(&args.kwonlyargs)
        .map(|a| a.def.arg.as_str())
        .chain(args.vararg.iter().map(|a| a.arg.as_str()))
        .chain(args.kwarg.iter().map(|a| a.arg.as_str()))
}

/// Simple names bound by an assignment-like target.
pub(crate) fn target_names<'a>(target: &'a Expr, out: &mut Vec<(&'a str, usize)>) {
    match target {
        Expr::Name(n) => out.push((n.id.as_str(), span(n).1)),
        Expr::Tuple(t) => t.elts.iter().for_each(|e| target_names(e, out)),
        Expr::List(l) => l.elts.iter().for_each(|e| target_names(e, out)),
        Expr::Starred(s) => target_names(&s.value, out),
        _ => {}
    }
}

/// Pre-order walk over every expression. `shadow` holds names bound by
/// enclosing lambdas and comprehensions at the visited point.
pub(crate) fn walk_expr<'a>(
    expr: &'a Expr,
    shadow: &mut Vec<&'a str>,
    f: &mut dyn FnMut(&'a Expr, &[&'a str]),
) {
    f(expr, shadow);
    let mut go = |e: &'a Expr, shadow: &mut Vec<&'a str>| walk_expr(e, shadow, f);
    match expr {
        Expr::BoolOp(e) => e.values.iter().for_each(|v| go(v, shadow)),
        Expr::NamedExpr(e) => {
            go(&e.target, shadow);
            go(&e.value, shadow);
        }
        Expr::BinOp(e) => {
            go(&e.left, shadow);
            go(&e.right, shadow);
        }
        Expr::UnaryOp(e) => go(&e.operand, shadow),
        Expr::Lambda(e) => {
            for d in e.args.posonlyargs.iter().chain(&e.args.args).chain(&e.args.kwonlyargs) {
                if let Some(default) = &d.default {
                    go(default, shadow);
                }
            }
            let before = shadow.len();
            shadow.extend(argument_names(&e.args));
            go(&e.body, shadow);
            shadow.truncate(before);
        }
        Expr::IfExp(e) => {
            go(&e.test, shadow);
            go(&e.body, shadow);
            go(&e.orelse, shadow);
        }
        Expr::Dict(e) => {
            for (k, v) in e.keys.iter().zip(&e.values) {
                if let Some(k) = k {
                    go(k, shadow);
                }
                go(v, shadow);
            }
        }
        Expr::Set(e) => e.elts.iter().for_each(|v| go(v, shadow)),
        Expr::ListComp(e) => walk_comprehension(&[&e.elt], &e.generators, shadow, f),
        Expr::SetComp(e) => walk_comprehension(&[&e.elt], &e.generators, shadow, f),
        Expr::GeneratorExp(e) => walk_comprehension(&[&e.elt], &e.generators, shadow, f),
        Expr::DictComp(e) => walk_comprehension(&[&e.key, &e.value], &e.generators, shadow, f),
        Expr::Await(e) => go(&e.value, shadow),
        Expr::Yield(e) => {
            if let Some(v) = &e.value {
                go(v, shadow);
            }
        }
        Expr::YieldFrom(e) => go(&e.value, shadow),
        Expr::Compare(e) => {
            go(&e.left, shadow);
            e.comparators.iter().for_each(|v| go(v, shadow));
        }
        Expr::Call(e) => {
            go(&e.func, shadow);
            e.args.iter().for_each(|v| go(v, shadow));
            e.keywords.iter().for_each(|k| go(&k.value, shadow));
        }
        Expr::FormattedValue(e) => {
            go(&e.value, shadow);
            if let Some(fmt) = &e.format_spec {
                go(fmt, shadow);
            }
        }
        Expr::JoinedStr(e) => e.values.iter().for_each(|v| go(v, shadow)),
        Expr::Attribute(e) => go(&e.value, shadow),
        Expr::Subscript(e) => {
            go(&e.value, shadow);
            go(&e.slice, shadow);
        }
        Expr::Starred(e) => go(&e.value, shadow),
        Expr::List(e) => e.elts.iter().for_each(|v| go(v, shadow)),
        Expr::Tuple(e) => e.elts.iter().for_each(|v| go(v, shadow)),
        Expr::Slice(e) => {
            for part in [&e.lower, &e.upper, &e.step].into_iter().flatten() {
                go(part, shadow);
            }
        }
        Expr::Constant(_) | Expr::Name(_) => {}
    }
}

fn walk_comprehension<'a>(
    elts: &[&'a Expr],
    generators: &'a [ast::Comprehension],
    shadow: &mut Vec<&'a str>,
    f: &mut dyn FnMut(&'a Expr, &[&'a str]),
) {
    let before = shadow.len();
    for generator in generators {
        // the first iterable is evaluated before any target is bound
        walk_expr(&generator.iter, shadow, f);
        let mut names = Vec::new();
        target_names(&generator.target, &mut names);
        shadow.extend(names.into_iter().map(|(n, _)| n));
        walk_expr(&generator.target, shadow, f);
        generator.ifs.iter().for_each(|c| walk_expr(c, shadow, f));
    }
    elts.iter().for_each(|e| walk_expr(e, shadow, f));
    shadow.truncate(before);
}

fn arguments_exprs(args: &ast::Arguments) -> Vec<&Expr> {
    let mut out = Vec::new();
    for a in args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs) {
        if let Some(ann) = &a.def.annotation {
            out.push(ann.as_ref());
        }
        if let Some(d) = &a.default {
            out.push(d.as_ref());
        }
    }
    for a in args.vararg.iter().chain(args.kwarg.iter()) {
        if let Some(ann) = &a.annotation {
            out.push(ann.as_ref());
        }
    }
    out
}

/// Expressions owned directly by a statement (not by nested bodies).
pub(crate) fn stmt_exprs(stmt: &Stmt) -> Vec<&Expr> {
    let mut out: Vec<&Expr> = Vec::new();
    match stmt {
        Stmt::FunctionDef(s) => {
            out.extend(&s.decorator_list);
            out.extend(arguments_exprs(&s.args));
            out.extend(s.returns.as_deref());
        }
        Stmt::AsyncFunctionDef(s) => {
            out.extend(&s.decorator_list);
            out.extend(arguments_exprs(&s.args));
            out.extend(s.returns.as_deref());
        }
        Stmt::ClassDef(s) => {
            out.extend(&s.decorator_list);
            out.extend(&s.bases);
            out.extend(s.keywords.iter().map(|k| &k.value));
        }
        Stmt::Return(s) => out.extend(s.value.as_deref()),
        Stmt::Delete(s) => out.extend(&s.targets),
        Stmt::Assign(s) => {
            out.push(&s.value);
            out.extend(&s.targets);
        }
        Stmt::TypeAlias(s) => out.push(&s.value),
        Stmt::AugAssign(s) => {
            out.push(&s.target);
            out.push(&s.value);
        }
        Stmt::AnnAssign(s) => {
            out.push(&s.annotation);
            out.extend(s.value.as_deref());
            out.push(&s.target);
        }
        Stmt::For(s) => {
            out.push(&s.iter);
            out.push(&s.target);
        }
        Stmt::AsyncFor(s) => {
            out.push(&s.iter);
            out.push(&s.target);
        }
        Stmt::While(s) => out.push(&s.test),
        Stmt::If(s) => out.push(&s.test),
        Stmt::With(s) => {
            for item in &s.items {
                out.push(&item.context_expr);
                out.extend(item.optional_vars.as_deref());
            }
        }
        Stmt::AsyncWith(s) => {
            for item in &s.items {
                out.push(&item.context_expr);
                out.extend(item.optional_vars.as_deref());
            }
        }
        Stmt::Match(s) => {
            out.push(&s.subject);
            out.extend(s.cases.iter().filter_map(|c| c.guard.as_deref()));
        }
        Stmt::Raise(s) => {
            out.extend(s.exc.as_deref());
            out.extend(s.cause.as_deref());
        }
        Stmt::Try(s) => out.extend(handler_types(&s.handlers)),
        Stmt::TryStar(s) => out.extend(handler_types(&s.handlers)),
        Stmt::Assert(s) => {
            out.push(&s.test);
            out.extend(s.msg.as_deref());
        }
        Stmt::Expr(s) => out.push(&s.value),
        Stmt::Import(_)
        | Stmt::ImportFrom(_)
        | Stmt::Global(_)
        | Stmt::Nonlocal(_)
        | Stmt::Pass(_)
        | Stmt::Break(_)
        | Stmt::Continue(_) => {}
    }
    out
}

fn handler_types(handlers: &[ast::ExceptHandler]) -> impl Iterator<Item = &Expr> {
    handlers.iter().filter_map(|h| {
        let ast::ExceptHandler::ExceptHandler(h) = h;
        h.type_.as_deref()
    })
}

fn handler_bodies(handlers: &[ast::ExceptHandler]) -> impl Iterator<Item = &[Stmt]> {
    handlers.iter().map(|h| {
        let ast::ExceptHandler::ExceptHandler(h) = h;
        h.body.as_slice()
    })
}

/// Nested statement bodies of a statement, in source order.
pub(crate) fn stmt_bodies(stmt: &Stmt) -> Vec<&[Stmt]> {
    match stmt {
        Stmt::FunctionDef(s) => vec![&s.body],
        Stmt::AsyncFunctionDef(s) => vec![&s.body],
        Stmt::ClassDef(s) => vec![&s.body],
        Stmt::For(s) => vec![&s.body, &s.orelse],
        Stmt::AsyncFor(s) => vec![&s.body, &s.orelse],
        Stmt::While(s) => vec![&s.body, &s.orelse],
        Stmt::If(s) => vec![&s.body, &s.orelse],
        Stmt::With(s) => vec![&s.body],
        Stmt::AsyncWith(s) => vec![&s.body],
        Stmt::Match(s) => s.cases.iter().map(|c| c.body.as_slice()).collect(),
        Stmt::Try(s) => {
            let mut v = vec![s.body.as_slice()];
            v.extend(handler_bodies(&s.handlers));
            v.push(&s.orelse);
            v.push(&s.finalbody);
            v
        }
        Stmt::TryStar(s) => {
            let mut v = vec![s.body.as_slice()];
            v.extend(handler_bodies(&s.handlers));
            v.push(&s.orelse);
            v.push(&s.finalbody);
            v
        }
        _ => Vec::new(),
    }
}

/// Visit every expression in a statement list, nested bodies included.
pub(crate) fn for_each_expr<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Expr, &[&'a str])) {
    for stmt in stmts {
        for e in stmt_exprs(stmt) {
            let mut shadow = Vec::new();
            walk_expr(e, &mut shadow, f);
        }
        for body in stmt_bodies(stmt) {
            for_each_expr(body, f);
        }
    }
}

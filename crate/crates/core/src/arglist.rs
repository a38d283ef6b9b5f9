//! Call argument lists such as `(x, y, dim=1, *rest, **opts)`.

use std::fmt;

use rustpython_parser::{ast, Parse};

use crate::text::{self, ScanError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArgListError {
    #[error("argument list is not parenthesized or unbalanced: {0}")]
    Unbalanced(#[from] ScanError),
    #[error("empty argument at position {0}")]
    EmptyArgument(usize),
    #[error("positional argument follows keyword argument: `{0}`")]
    PositionalAfterKeyword(String),
    #[error("not a valid call argument list: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Argument {
    Positional(String),
    Keyword { name: String, value: String },
    /// `*iterable`
    Unpack(String),
    /// `**mapping`
    UnpackMap(String),
}

impl Argument {
    pub fn keyword(name: impl Into<String>, value: impl Into<String>) -> Self {
        Argument::Keyword { name: name.into(), value: value.into() }
    }

    pub fn keyword_name(&self) -> Option<&str> {
        match self {
            Argument::Keyword { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is_positional(&self) -> bool {
        matches!(self, Argument::Positional(_))
    }
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Argument::Positional(v) => f.write_str(v),
            Argument::Keyword { name, value } => write!(f, "{name}={value}"),
            Argument::Unpack(v) => write!(f, "*{v}"),
            Argument::UnpackMap(v) => write!(f, "**{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ArgumentList {
    pub args: Vec<Argument>,
}

impl ArgumentList {
    pub fn new(args: Vec<Argument>) -> Self {
        Self { args }
    }

    pub fn positional(&self) -> impl Iterator<Item = &String> {
        self.args.iter().filter_map(|a| match a {
            Argument::Positional(v) => Some(v),
            _ => None,
        })
    }

    pub fn keywords(&self) -> impl Iterator<Item = (&str, &str)> {
        self.args.iter().filter_map(|a| match a {
            Argument::Keyword { name, value } => Some((name.as_str(), value.as_str())),
            _ => None,
        })
    }

    pub fn has_unpacking(&self) -> bool {
        self.args
            .iter()
            .any(|a| matches!(a, Argument::Unpack(_) | Argument::UnpackMap(_)))
    }

    /// Canonical `(a, b, k=v)` rendering.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self.args.iter().map(ToString::to_string).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for ArgumentList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Split a parenthesized argument list into its arguments.
///
/// This is a lexical split: argument values are kept as trimmed text.
/// Use [`check_call_syntax`] when full syntactic validity matters.
pub fn parse_argument_list(text: &str) -> Result<ArgumentList, ArgListError> {
    let body = text::unwrap_parens(text)?;
    let mut pieces: Vec<&str> = text::split_top_level(body)?
        .into_iter()
        .map(str::trim)
        .collect();
    if pieces.last() == Some(&"") {
        pieces.pop();
    }
    let mut args = Vec::with_capacity(pieces.len());
    let mut keyword_seen = false;
    for (i, piece) in pieces.into_iter().enumerate() {
        if piece.is_empty() {
            return Err(ArgListError::EmptyArgument(i));
        }
        let arg = if let Some(rest) = piece.strip_prefix("**") {
            Argument::UnpackMap(rest.trim().to_string())
        } else if let Some(rest) = piece.strip_prefix('*') {
            Argument::Unpack(rest.trim().to_string())
        } else {
            let name_len = text::identifier_prefix_len(piece);
            let after = piece[name_len..].trim_start();
            if name_len > 0 && after.starts_with('=') && !after.starts_with("==") {
                Argument::Keyword {
                    name: piece[..name_len].to_string(),
                    value: after[1..].trim().to_string(),
                }
            } else {
                Argument::Positional(piece.to_string())
            }
        };
        match &arg {
            Argument::Keyword { .. } | Argument::UnpackMap(_) => keyword_seen = true,
            Argument::Positional(v) if keyword_seen => {
                return Err(ArgListError::PositionalAfterKeyword(v.clone()))
            }
            _ => {}
        }
        args.push(arg);
    }
    Ok(ArgumentList { args })
}

/// Verify that `text` is a syntactically valid argument list by parsing
/// `f<text>` as a call expression.
pub fn check_call_syntax(text: &str) -> Result<(), ArgListError> {
    let trimmed = text.trim();
    let source = format!("f{trimmed}");
    let expr = ast::Expr::parse(&source, "<arguments>")
        .map_err(|e| ArgListError::Syntax(e.to_string()))?;
    match expr {
        ast::Expr::Call(call) if matches!(call.func.as_ref(), ast::Expr::Name(n) if n.id.as_str() == "f") => {
            Ok(())
        }
        _ => Err(ArgListError::Syntax(format!("`{trimmed}` is not a call argument list"))),
    }
}

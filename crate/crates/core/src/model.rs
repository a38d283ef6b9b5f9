//! Canonical data model for API paths, parameters and versioned signature
//! dumps, plus the textual parameter-list grammar.
//!
//! The textual form follows the subject language's rendering of callable
//! signatures, e.g. `(a, b=1, /, c, *, d=None, **kw)`. Defaults and
//! annotations are kept as opaque text and never evaluated.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::text::{self, ScanError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("unbalanced parentheses or brackets: {0}")]
    Unbalanced(#[from] ScanError),
    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
    #[error("parameter `{name}` of kind {kind:?} cannot follow kind {previous:?}")]
    KindOrder {
        name: String,
        kind: ParamKind,
        previous: ParamKind,
    },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("syntax error: {0}")]
    Syntax(String),
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed dump JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("api `{api}`: {source}")]
    Signature {
        api: String,
        #[source]
        source: SignatureError,
    },
    #[error("api `{api}` has no overloads")]
    NoOverloads { api: String },
    #[error("api `{api}` lists the overload `{overload}` twice")]
    DuplicateOverload { api: String, overload: String },
    #[error("api `{api}` does not belong to library `{library}`")]
    ForeignApi { api: String, library: String },
    #[error("api `{api}` of kind {kind} needs an owning class path")]
    MissingClass { api: String, kind: ApiKind },
}

/// A dotted API path such as `torch.nn.functional.softmax`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DottedPath(Vec<String>);

impl DottedPath {
    pub fn new<I, S>(fields: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let fields: Vec<String> = fields.into_iter().map(Into::into).collect();
        if fields.is_empty() {
            return Err(SignatureError::InvalidIdentifier(String::new()));
        }
        if let Some(bad) = fields.iter().find(|f| !text::is_identifier(f)) {
            return Err(SignatureError::InvalidIdentifier(bad.clone()));
        }
        Ok(Self(fields))
    }

    pub fn fields(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> &str {
        &self.0[0]
    }

    pub fn last(&self) -> &str {
        &self.0[self.0.len() - 1]
    }

    /// The path without its last field, if it has more than one.
    pub fn parent(&self) -> Option<DottedPath> {
        (self.0.len() > 1).then(|| Self(self.0[..self.0.len() - 1].to_vec()))
    }

    /// First `n` fields (`1 <= n <= len`).
    pub fn prefix(&self, n: usize) -> DottedPath {
        Self(self.0[..n].to_vec())
    }

    pub fn child(&self, field: &str) -> DottedPath {
        let mut fields = self.0.clone();
        fields.push(field.to_string());
        Self(fields)
    }

    pub fn extend<'a>(&self, fields: impl IntoIterator<Item = &'a str>) -> DottedPath {
        let mut out = self.0.clone();
        out.extend(fields.into_iter().map(str::to_string));
        Self(out)
    }

    pub fn starts_with(&self, other: &DottedPath) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl fmt::Display for DottedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

impl FromStr for DottedPath {
    type Err = SignatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s.split('.'))
    }
}

impl Serialize for DottedPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DottedPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameter kinds, declared in the order they must appear in a list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    PositionalOnly,
    PositionalOrKeyword,
    VarPositional,
    KeywordOnly,
    VarKeyword,
}

impl ParamKind {
    pub fn is_variadic(self) -> bool {
        matches!(self, ParamKind::VarPositional | ParamKind::VarKeyword)
    }

    pub fn is_positional(self) -> bool {
        matches!(self, ParamKind::PositionalOnly | ParamKind::PositionalOrKeyword)
    }

    pub fn accepts_keyword(self) -> bool {
        matches!(self, ParamKind::PositionalOrKeyword | ParamKind::KeywordOnly)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Parameter {
    pub name: String,
    pub kind: ParamKind,
    pub default_repr: Option<String>,
    pub annotation_repr: Option<String>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, kind: ParamKind) -> Self {
        Self {
            name: name.into(),
            kind,
            default_repr: None,
            annotation_repr: None,
        }
    }

    pub fn with_default(mut self, default: impl Into<String>) -> Self {
        self.default_repr = Some(default.into());
        self
    }

    pub fn with_annotation(mut self, annotation: impl Into<String>) -> Self {
        self.annotation_repr = Some(annotation.into());
        self
    }

    /// Required iff the parameter has no default and is not variadic.
    pub fn required(&self) -> bool {
        self.default_repr.is_none() && !self.kind.is_variadic()
    }

    fn render(&self) -> String {
        let mut out = String::new();
        match self.kind {
            ParamKind::VarPositional => out.push('*'),
            ParamKind::VarKeyword => out.push_str("**"),
            _ => {}
        }
        out.push_str(&self.name);
        if let Some(ann) = &self.annotation_repr {
            out.push_str(": ");
            out.push_str(ann);
        }
        if let Some(default) = &self.default_repr {
            out.push('=');
            out.push_str(default);
        }
        out
    }
}

/// An ordered, validated parameter list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ParameterList {
    params: Vec<Parameter>,
}

impl ParameterList {
    pub fn new(params: Vec<Parameter>) -> Result<Self, SignatureError> {
        let mut seen = HashSet::new();
        let mut previous: Option<ParamKind> = None;
        for p in &params {
            if !text::is_identifier(&p.name) {
                return Err(SignatureError::InvalidIdentifier(p.name.clone()));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(SignatureError::DuplicateName(p.name.clone()));
            }
            if p.kind.is_variadic() && p.default_repr.is_some() {
                return Err(SignatureError::Syntax(format!(
                    "variadic parameter `{}` cannot have a default",
                    p.name
                )));
            }
            if let Some(prev) = previous {
                let repeated_variadic = prev == p.kind && p.kind.is_variadic();
                if p.kind < prev || repeated_variadic {
                    return Err(SignatureError::KindOrder {
                        name: p.name.clone(),
                        kind: p.kind,
                        previous: prev,
                    });
                }
            }
            previous = Some(p.kind);
        }
        Ok(Self { params })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Parameter> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn var_positional(&self) -> Option<&Parameter> {
        self.params.iter().find(|p| p.kind == ParamKind::VarPositional)
    }

    pub fn var_keyword(&self) -> Option<&Parameter> {
        self.params.iter().find(|p| p.kind == ParamKind::VarKeyword)
    }

    /// Number of parameters that can be bound positionally, ignoring `*args`.
    pub fn positional_capacity(&self) -> usize {
        self.params.iter().filter(|p| p.kind.is_positional()).count()
    }

    /// Whether `name` may be passed as a keyword argument.
    pub fn accepts_keyword(&self, name: &str) -> bool {
        match self.get(name) {
            Some(p) => p.kind.accepts_keyword(),
            None => self.var_keyword().is_some(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, SignatureError> {
        parse_signature_text(text)
    }

    pub fn render(&self) -> String {
        render_signature_text(self)
    }
}

impl fmt::Display for ParameterList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for ParameterList {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for ParameterList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_signature_text(&s).map_err(serde::de::Error::custom)
    }
}

/// Parse a parenthesized parameter declaration.
///
/// `/` closes the positional-only region; a bare `*` or a `*args`
/// parameter opens the keyword-only region.
pub fn parse_signature_text(text: &str) -> Result<ParameterList, SignatureError> {
    let body = text::unwrap_parens(text)?;
    let mut pieces: Vec<&str> = text::split_top_level(body)?
        .into_iter()
        .map(str::trim)
        .collect();
    if pieces.last() == Some(&"") {
        pieces.pop();
        if !pieces.is_empty() && body.trim().is_empty() {
            return Err(SignatureError::Syntax("stray comma".into()));
        }
    }

    let mut params: Vec<Parameter> = Vec::new();
    let mut slash_seen = false;
    let mut star_seen = false;
    let mut bare_star_pending = false;
    for piece in pieces {
        if piece.is_empty() {
            return Err(SignatureError::Syntax("empty parameter".into()));
        }
        if piece == "/" {
            if slash_seen || star_seen || params.is_empty() {
                return Err(SignatureError::Syntax("misplaced `/`".into()));
            }
            for p in &mut params {
                p.kind = ParamKind::PositionalOnly;
            }
            slash_seen = true;
            continue;
        }
        if piece == "*" {
            if star_seen {
                return Err(SignatureError::Syntax("duplicate `*`".into()));
            }
            star_seen = true;
            bare_star_pending = true;
            continue;
        }
        let (kind, decl) = if let Some(rest) = piece.strip_prefix("**") {
            (ParamKind::VarKeyword, rest)
        } else if let Some(rest) = piece.strip_prefix('*') {
            if star_seen {
                return Err(SignatureError::Syntax("duplicate `*`".into()));
            }
            star_seen = true;
            (ParamKind::VarPositional, rest)
        } else if star_seen {
            (ParamKind::KeywordOnly, piece)
        } else {
            (ParamKind::PositionalOrKeyword, piece)
        };
        if kind != ParamKind::VarKeyword {
            bare_star_pending = false;
        }
        params.push(parse_param(kind, decl.trim_start())?);
    }
    if bare_star_pending {
        return Err(SignatureError::Syntax("named parameters must follow bare `*`".into()));
    }
    ParameterList::new(params)
}

fn parse_param(kind: ParamKind, decl: &str) -> Result<Parameter, SignatureError> {
    let name_len = text::identifier_prefix_len(decl);
    if name_len == 0 {
        return Err(SignatureError::InvalidIdentifier(decl.to_string()));
    }
    let mut param = Parameter::new(&decl[..name_len], kind);
    let rest = decl[name_len..].trim_start();
    let (annotation, default) = if let Some(after_colon) = rest.strip_prefix(':') {
        match text::find_assign(after_colon)? {
            Some(eq) => (Some(&after_colon[..eq]), Some(&after_colon[eq + 1..])),
            None => (Some(after_colon), None),
        }
    } else if let Some(after_eq) = rest.strip_prefix('=') {
        (None, Some(after_eq))
    } else if rest.is_empty() {
        (None, None)
    } else {
        return Err(SignatureError::Syntax(format!("unexpected text after `{}`", param.name)));
    };
    if let Some(ann) = annotation {
        let ann = ann.trim();
        if ann.is_empty() {
            return Err(SignatureError::Syntax(format!("empty annotation on `{}`", param.name)));
        }
        param.annotation_repr = Some(ann.to_string());
    }
    if let Some(default) = default {
        let default = default.trim();
        if default.is_empty() {
            return Err(SignatureError::Syntax(format!("empty default on `{}`", param.name)));
        }
        param.default_repr = Some(default.to_string());
    }
    Ok(param)
}

/// Canonical text: `", "` separators, `=` without spaces, and explicit `/`
/// and `*` markers exactly where a region boundary exists.
pub fn render_signature_text(list: &ParameterList) -> String {
    let params = list.params();
    let mut items: Vec<String> = Vec::with_capacity(params.len() + 2);
    let has_posonly = params.iter().any(|p| p.kind == ParamKind::PositionalOnly);
    let has_varargs = list.var_positional().is_some();
    let mut slash_done = false;
    let mut star_done = false;
    for p in params {
        if has_posonly && !slash_done && p.kind != ParamKind::PositionalOnly {
            items.push("/".into());
            slash_done = true;
        }
        if p.kind == ParamKind::KeywordOnly && !has_varargs && !star_done {
            items.push("*".into());
            star_done = true;
        }
        items.push(p.render());
    }
    if has_posonly && !slash_done {
        items.push("/".into());
    }
    format!("({})", items.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiKind {
    Function,
    Method,
    Initializer,
}

impl fmt::Display for ApiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApiKind::Function => "function",
            ApiKind::Method => "method",
            ApiKind::Initializer => "initializer",
        })
    }
}

/// Signature of one API, possibly overloaded.
///
/// Initializers are keyed by their class path (`torch.nn.Linear`), so the
/// owning class of an initializer is the API path itself; a method's
/// owning class is the path minus the method name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiSignature {
    pub api_path: DottedPath,
    pub kind: ApiKind,
    pub overloads: Vec<ParameterList>,
}

impl ApiSignature {
    pub fn new(
        api_path: DottedPath,
        kind: ApiKind,
        overloads: Vec<ParameterList>,
    ) -> Result<Self, DumpError> {
        let api = api_path.to_string();
        if overloads.is_empty() {
            return Err(DumpError::NoOverloads { api });
        }
        if kind == ApiKind::Method && api_path.len() < 2 {
            return Err(DumpError::MissingClass { api, kind });
        }
        let mut seen = HashSet::new();
        for o in &overloads {
            let rendered = o.render();
            if !seen.insert(rendered.clone()) {
                return Err(DumpError::DuplicateOverload { api, overload: rendered });
            }
        }
        Ok(Self { api_path, kind, overloads })
    }

    /// Single-overload convenience constructor from signature text.
    pub fn parse(path: &str, kind: ApiKind, overloads: &[&str]) -> Result<Self, DumpError> {
        let api_path: DottedPath = path.parse().map_err(|source| DumpError::Signature {
            api: path.to_string(),
            source,
        })?;
        let lists = overloads
            .iter()
            .map(|o| parse_signature_text(o))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| DumpError::Signature { api: path.to_string(), source })?;
        Self::new(api_path, kind, lists)
    }

    pub fn owning_class(&self) -> Option<DottedPath> {
        match self.kind {
            ApiKind::Function => None,
            ApiKind::Method => self.api_path.parent(),
            ApiKind::Initializer => Some(self.api_path.clone()),
        }
    }
}

/// Per-version inventory of a library's API signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureDump {
    pub library: String,
    pub version: String,
    pub apis: BTreeMap<DottedPath, ApiSignature>,
}

#[derive(Serialize, Deserialize)]
struct RawDump {
    library: String,
    version: String,
    apis: BTreeMap<String, RawApi>,
}

#[derive(Serialize, Deserialize)]
struct RawApi {
    kind: ApiKind,
    overloads: Vec<String>,
}

impl SignatureDump {
    pub fn new(library: impl Into<String>, version: impl Into<String>) -> Self {
        Self {
            library: library.into(),
            version: version.into(),
            apis: BTreeMap::new(),
        }
    }

    pub fn root_package(&self) -> &str {
        self.library.split('.').next().unwrap_or(&self.library)
    }

    pub fn insert(&mut self, api: ApiSignature) -> Result<(), DumpError> {
        if api.api_path.root() != self.root_package() {
            return Err(DumpError::ForeignApi {
                api: api.api_path.to_string(),
                library: self.library.clone(),
            });
        }
        self.apis.insert(api.api_path.clone(), api);
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, DumpError> {
        let raw: RawDump = serde_json::from_str(json)?;
        let mut dump = SignatureDump::new(raw.library, raw.version);
        for (key, raw_api) in raw.apis {
            let signature_err = |source| DumpError::Signature { api: key.clone(), source };
            let mut path: DottedPath = key.parse().map_err(signature_err)?;
            // initializers are keyed by class path
            if raw_api.kind == ApiKind::Initializer && path.last() == "__init__" {
                path = path.parent().ok_or_else(|| DumpError::MissingClass {
                    api: key.clone(),
                    kind: raw_api.kind,
                })?;
            }
            let overloads = raw_api
                .overloads
                .iter()
                .map(|o| parse_signature_text(o))
                .collect::<Result<Vec<_>, _>>()
                .map_err(signature_err)?;
            dump.insert(ApiSignature::new(path, raw_api.kind, overloads)?)?;
        }
        Ok(dump)
    }

    pub fn to_json(&self) -> String {
        let raw = RawDump {
            library: self.library.clone(),
            version: self.version.clone(),
            apis: self
                .apis
                .iter()
                .map(|(path, api)| {
                    (
                        path.to_string(),
                        RawApi {
                            kind: api.kind,
                            overloads: api.overloads.iter().map(ParameterList::render).collect(),
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("dump serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(list: &ParameterList) -> Vec<(String, ParamKind, bool)> {
        list.params()
            .iter()
            .map(|p| (p.name.clone(), p.kind, p.required()))
            .collect()
    }

    #[test]
    fn empty_signature() {
        let list = parse_signature_text("()").unwrap();
        assert!(list.is_empty());
        assert_eq!(render_signature_text(&list), "()");
    }

    #[test]
    fn markers_split_regions() {
        let list = parse_signature_text("(a, b=1, /, c, *, d=None)").unwrap();
        use ParamKind::*;
        assert_eq!(
            kinds(&list),
            vec![
                ("a".into(), PositionalOnly, true),
                ("b".into(), PositionalOnly, false),
                ("c".into(), PositionalOrKeyword, true),
                ("d".into(), KeywordOnly, false),
            ]
        );
        assert_eq!(list.render(), "(a, b=1, /, c, *, d=None)");
    }

    #[test]
    fn load_state_dict_signature() {
        let list = parse_signature_text("(state_dict, strict=True, assign=False)").unwrap();
        assert_eq!(list.len(), 3);
        assert!(list.params().iter().all(|p| p.kind == ParamKind::PositionalOrKeyword));
        assert_eq!(list.params().iter().filter(|p| p.required()).count(), 1);
    }

    #[test]
    fn render_direct_construction() {
        let list = ParameterList::new(vec![
            Parameter::new("a", ParamKind::PositionalOrKeyword),
            Parameter::new("b", ParamKind::PositionalOrKeyword).with_default("1"),
        ])
        .unwrap();
        assert_eq!(list.render(), "(a, b=1)");
    }

    #[test]
    fn varargs_open_keyword_region() {
        let list = parse_signature_text("(x, *args, key: int = 3, **kwargs)").unwrap();
        assert_eq!(list.params()[2].kind, ParamKind::KeywordOnly);
        assert_eq!(list.params()[2].annotation_repr.as_deref(), Some("int"));
        assert_eq!(list.params()[2].default_repr.as_deref(), Some("3"));
        assert_eq!(list.render(), "(x, *args, key: int=3, **kwargs)");
    }

    #[test]
    fn defaults_with_nested_punctuation() {
        let list = parse_signature_text("(shape, fill=(0, 1), sep=', ', *, f=lambda: 1)").unwrap();
        assert_eq!(list.params()[1].default_repr.as_deref(), Some("(0, 1)"));
        assert_eq!(list.params()[2].default_repr.as_deref(), Some("', '"));
    }

    #[test]
    fn rejects_bad_signatures() {
        assert!(matches!(parse_signature_text("(a, b"), Err(SignatureError::Unbalanced(_))));
        assert!(matches!(
            parse_signature_text("(a, a)"),
            Err(SignatureError::DuplicateName(_))
        ));
        assert!(matches!(
            parse_signature_text("(**kw, a)"),
            Err(SignatureError::KindOrder { .. })
        ));
        assert!(parse_signature_text("(*, /)").is_err());
        assert!(parse_signature_text("(a, *)").is_err());
        assert!(parse_signature_text("(*a, *b)").is_err());
        assert!(parse_signature_text("(a,, b)").is_err());
        assert!(parse_signature_text("(1a)").is_err());
        assert!(parse_signature_text("a, b").is_err());
    }

    #[test]
    fn construction_rejects_kind_order() {
        let err = ParameterList::new(vec![
            Parameter::new("a", ParamKind::KeywordOnly),
            Parameter::new("b", ParamKind::PositionalOnly),
        ]);
        assert!(matches!(err, Err(SignatureError::KindOrder { .. })));
        let err = ParameterList::new(vec![
            Parameter::new("a", ParamKind::VarPositional).with_default("()"),
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn trailing_comma_accepted() {
        let list = parse_signature_text("(a, b,)").unwrap();
        assert_eq!(list.render(), "(a, b)");
    }

    #[test]
    fn dotted_path_validation() {
        let p: DottedPath = "torch.nn.functional.softmax".parse().unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.to_string(), "torch.nn.functional.softmax");
        assert!("torch..nn".parse::<DottedPath>().is_err());
        assert!("9x".parse::<DottedPath>().is_err());
        assert_eq!(p.parent().unwrap().to_string(), "torch.nn.functional");
    }

    #[test]
    fn dump_json_round_trip() {
        let json = r#"{
          "library": "flask",
          "version": "3.0.0",
          "apis": {
            "flask.json.dump": {"kind": "function", "overloads": ["(obj, fp, **kwargs)"]},
            "flask.Flask.__init__": {"kind": "initializer", "overloads": ["(import_name, static_url_path=None)"]}
          }
        }"#;
        let dump = SignatureDump::from_json(json).unwrap();
        assert!(dump.apis.contains_key(&"flask.Flask".parse().unwrap()));
        let again = SignatureDump::from_json(&dump.to_json()).unwrap();
        assert_eq!(dump, again);
    }

    #[test]
    fn dump_rejects_foreign_and_duplicates() {
        let foreign = r#"{"library":"flask","version":"1","apis":{"numpy.full":{"kind":"function","overloads":["()"]}}}"#;
        assert!(matches!(SignatureDump::from_json(foreign), Err(DumpError::ForeignApi { .. })));
        let dup = r#"{"library":"np","version":"1","apis":{"np.f":{"kind":"function","overloads":["(a)","( a )"]}}}"#;
        assert!(matches!(SignatureDump::from_json(dup), Err(DumpError::DuplicateOverload { .. })));
        let none = r#"{"library":"np","version":"1","apis":{"np.f":{"kind":"function","overloads":[]}}}"#;
        assert!(matches!(SignatureDump::from_json(none), Err(DumpError::NoOverloads { .. })));
    }
}

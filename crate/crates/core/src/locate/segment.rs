//! Function-level segments and the context / target / suffix split.

use rustpython_parser::ast::Stmt;
use serde::{Deserialize, Serialize};

use super::walk::{self, span};
use super::{Evidence, InvocationSite, ParsedSource};
use crate::model::DottedPath;

/// One function definition, dedented to column zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub file_id: String,
    /// 1-based inclusive line span of the definition in the file.
    pub start_line: usize,
    pub end_line: usize,
    pub text: String,
    def_line_start: usize,
    /// (source offset of each line start, bytes of indentation removed)
    lines: Vec<(usize, usize)>,
}

impl Segment {
    /// Map a byte offset in the file into the segment text.
    fn map_offset(&self, offset: usize) -> usize {
        let idx = self.lines.partition_point(|(s, _)| *s <= offset).saturating_sub(1);
        let removed_before: usize = self.lines[..idx].iter().map(|(_, r)| r).sum();
        let (line_start, removed) = self.lines[idx];
        let col = offset - line_start;
        line_start - self.def_line_start - removed_before + col - col.min(removed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataItem {
    pub api_path: DottedPath,
    pub code_context: String,
    pub target_seq: String,
    pub suffix: String,
    pub file_id: String,
    pub start_line: usize,
    pub end_line: usize,
    pub evidence: Evidence,
    /// Module-level import statements of the file, one per line.
    #[serde(default)]
    pub imports: String,
}

impl MetadataItem {
    pub fn segment_text(&self) -> String {
        format!("{}{}{}", self.code_context, self.target_seq, self.suffix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentSkipReason {
    SiteOutsideFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSkip {
    pub file_id: String,
    pub line: usize,
    pub reason: SegmentSkipReason,
}

fn collect_defs(stmts: &[Stmt], out: &mut Vec<(usize, usize)>) {
    for stmt in stmts {
        if matches!(stmt, Stmt::FunctionDef(_) | Stmt::AsyncFunctionDef(_)) {
            out.push(span(stmt));
        }
        for body in walk::stmt_bodies(stmt) {
            collect_defs(body, out);
        }
    }
}

fn build_segment(source: &ParsedSource, def_start: usize, def_end: usize) -> Segment {
    let text = source.text();
    let start_line = source.line_of(def_start);
    let def_line_start = source.line_start(start_line);
    let indent = def_start - def_line_start;
    let raw = &text[def_line_start..def_end];
    let mut out = String::with_capacity(raw.len());
    let mut lines = Vec::new();
    let mut offset = def_line_start;
    for line in raw.split_inclusive('\n') {
        let leading = line.bytes().take_while(|b| *b == b' ' || *b == b'\t').count();
        let removed = leading.min(indent);
        out.push_str(&line[removed..]);
        lines.push((offset, removed));
        offset += line.len();
    }
    Segment {
        file_id: source.file_id.clone(),
        start_line,
        end_line: source.line_of(def_end.saturating_sub(1)),
        text: out,
        def_line_start,
        lines,
    }
}

fn import_block(source: &ParsedSource) -> String {
    source
        .suite()
        .iter()
        .filter(|s| matches!(s, Stmt::Import(_) | Stmt::ImportFrom(_)))
        .map(|s| {
            let (a, b) = span(s);
            &source.text()[a..b]
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Cut each function definition holding a site into one metadata item
/// built from its first site. Sites at module level are skipped.
pub fn segment_and_metadata(
    source: &ParsedSource,
    sites: &[InvocationSite],
) -> (Vec<MetadataItem>, Vec<SegmentSkip>) {
    let mut defs = Vec::new();
    collect_defs(source.suite(), &mut defs);
    let mut items = Vec::new();
    let mut skips = Vec::new();
    let mut used: Vec<(usize, usize)> = Vec::new();
    let imports = import_block(source);
    let mut ordered: Vec<&InvocationSite> = sites.iter().collect();
    ordered.sort_by_key(|s| s.call_start);
    for site in ordered {
        let innermost = defs
            .iter()
            .filter(|(s, e)| *s <= site.call_start && site.call_end <= *e)
            .max_by_key(|(s, _)| *s);
        let Some(&(def_start, def_end)) = innermost else {
            skips.push(SegmentSkip {
                file_id: site.file_id.clone(),
                line: site.start_line,
                reason: SegmentSkipReason::SiteOutsideFunction,
            });
            continue;
        };
        if used.contains(&(def_start, def_end)) {
            continue;
        }
        used.push((def_start, def_end));
        let segment = build_segment(source, def_start, def_end);
        let callee = segment.map_offset(site.callee_end);
        let end = segment.map_offset(site.call_end);
        items.push(MetadataItem {
            api_path: site.api_path.clone(),
            code_context: segment.text[..callee].to_string(),
            target_seq: segment.text[callee..end].to_string(),
            suffix: segment.text[end..].to_string(),
            file_id: site.file_id.clone(),
            start_line: site.start_line,
            end_line: site.end_line,
            evidence: site.evidence.clone(),
            imports: imports.clone(),
        });
    }
    items.sort_by_key(|i| (i.start_line, i.end_line));
    (items, skips)
}

/// Every function-definition segment of a file, outermost first.
pub fn segments(source: &ParsedSource) -> Vec<Segment> {
    let mut defs = Vec::new();
    collect_defs(source.suite(), &mut defs);
    defs.sort();
    defs.into_iter().map(|(s, e)| build_segment(source, s, e)).collect()
}

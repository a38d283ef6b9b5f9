//! Signature-level API update detection.
//!
//! Two versions of a parameter list are considered unchanged only when a
//! per-region parameter mapping exists (positional-only by position,
//! keyword-only and positional-or-keyword by name), names are identical,
//! positional order is preserved and every mapped parameter keeps its
//! required/optional status. Default-value text and annotations never
//! count as changes.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{ApiKind, ApiSignature, DottedPath, ParamKind, Parameter, ParameterList, SignatureDump};

pub const DEFAULT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error("similarity threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("cannot compare `{legacy}` with `{updated}`: path or kind differs")]
    PathMismatch { legacy: String, updated: String },
    #[error("cannot diff library `{legacy}` against `{updated}`")]
    LibraryMismatch { legacy: String, updated: String },
}

fn check_threshold(threshold: f64) -> Result<(), DiffError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(DiffError::ThresholdOutOfRange(threshold))
    }
}

/// Character-level Levenshtein distance.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - editDistance(a, b) / max(|a|, |b|)`, in characters.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(a, b) as f64 / longest as f64
}

/// Index pairs `(legacy, updated)` for one parameter region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamMapping {
    pub category: ParamKind,
    pub pairs: Vec<(usize, usize)>,
}

/// Mappings for the positional-only, positional-or-keyword and
/// keyword-only regions, in that order.
pub type RegionMappings = [ParamMapping; 3];

const REGIONS: [ParamKind; 3] = [
    ParamKind::PositionalOnly,
    ParamKind::PositionalOrKeyword,
    ParamKind::KeywordOnly,
];

/// Match names between two index sets: exact names first, then each
/// remaining pair whose similarity is at least `threshold` and is the
/// unique best choice for both sides.
fn match_by_name(
    legacy: &[Parameter],
    legacy_idx: &[usize],
    updated: &[Parameter],
    updated_idx: &[usize],
    threshold: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut free_l: Vec<usize> = Vec::new();
    let mut taken_u: BTreeSet<usize> = BTreeSet::new();
    for &l in legacy_idx {
        match updated_idx.iter().find(|&&u| updated[u].name == legacy[l].name) {
            Some(&u) => {
                pairs.push((l, u));
                taken_u.insert(u);
            }
            None => free_l.push(l),
        }
    }
    let free_u: Vec<usize> = updated_idx.iter().copied().filter(|u| !taken_u.contains(u)).collect();
    let unique_best = |from: usize, from_side: &[Parameter], cands: &[usize], to_side: &[Parameter]| {
        let mut best: Option<(usize, f64)> = None;
        let mut tied = false;
        for &c in cands {
            let s = name_similarity(&from_side[from].name, &to_side[c].name);
            match best {
                Some((_, b)) if s < b => {}
                Some((_, b)) if s == b => tied = true,
                _ => {
                    best = Some((c, s));
                    tied = false;
                }
            }
        }
        match best {
            Some((c, s)) if !tied && s >= threshold => Some(c),
            _ => None,
        }
    };
    for &l in &free_l {
        if let Some(u) = unique_best(l, legacy, &free_u, updated) {
            if unique_best(u, updated, &free_l, legacy) == Some(l) {
                pairs.push((l, u));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

fn region_indices(list: &ParameterList, kind: ParamKind) -> Vec<usize> {
    list.params()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == kind)
        .map(|(i, _)| i)
        .collect()
}

/// Build the three per-region parameter mappings, or `None` when some
/// region cannot be fully mapped.
pub fn build_parameter_mapping(
    legacy: &ParameterList,
    updated: &ParameterList,
    threshold: f64,
) -> Result<Option<RegionMappings>, DiffError> {
    check_threshold(threshold)?;
    let mut out: Vec<ParamMapping> = Vec::with_capacity(3);
    for kind in REGIONS {
        let li = region_indices(legacy, kind);
        let ui = region_indices(updated, kind);
        if li.len() != ui.len() {
            return Ok(None);
        }
        let pairs = if kind == ParamKind::PositionalOnly {
            li.iter().copied().zip(ui.iter().copied()).collect()
        } else {
            let pairs = match_by_name(legacy.params(), &li, updated.params(), &ui, threshold);
            if pairs.len() != li.len() {
                return Ok(None);
            }
            pairs
        };
        out.push(ParamMapping { category: kind, pairs });
    }
    Ok(Some(out.try_into().expect("three regions")))
}

/// True when the two lists satisfy all three no-modification rules.
pub fn satisfies_rules(legacy: &ParameterList, updated: &ParameterList, threshold: f64) -> Result<bool, DiffError> {
    let Some(mappings) = build_parameter_mapping(legacy, updated, threshold)? else {
        return Ok(false);
    };
    let lp = legacy.params();
    let up = updated.params();
    for mapping in &mappings {
        // rule 1: identical keywords
        if mapping.pairs.iter().any(|&(l, u)| lp[l].name != up[u].name) {
            return Ok(false);
        }
        // rule 2: order is preserved wherever position matters
        if mapping.category != ParamKind::KeywordOnly {
            let mut by_legacy = mapping.pairs.clone();
            by_legacy.sort_unstable();
            if by_legacy.windows(2).any(|w| w[0].1 > w[1].1) {
                return Ok(false);
            }
        }
        // rule 3: required/optional status
        if mapping.pairs.iter().any(|&(l, u)| lp[l].required() != up[u].required()) {
            return Ok(false);
        }
    }
    let star_presence = |l: &ParameterList| (l.var_positional().is_some(), l.var_keyword().is_some());
    Ok(star_presence(legacy) == star_presence(updated))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    ParameterAdded,
    ParameterRemoved,
    KindChanged,
    RequirednessChanged,
    PositionChanged,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub kind: ChangeKind,
    pub legacy_name: Option<String>,
    pub updated_name: Option<String>,
}

impl Change {
    fn new(kind: ChangeKind, legacy: Option<&Parameter>, updated: Option<&Parameter>) -> Self {
        Self {
            kind,
            legacy_name: legacy.map(|p| p.name.clone()),
            updated_name: updated.map(|p| p.name.clone()),
        }
    }
}

/// A parameter pair whose names are similar but fall short of the rename
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMatch {
    pub legacy_name: String,
    pub updated_name: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub api_path: DottedPath,
    pub kind: ApiKind,
    #[serde(rename = "legacy_sig")]
    pub legacy: ParameterList,
    #[serde(rename = "updated_sig")]
    pub updated: ParameterList,
    pub changes: Vec<Change>,
    /// Sub-threshold rename candidates; persisted in a side file, not in
    /// the update record itself.
    #[serde(skip)]
    pub near_matches: Vec<NearMatch>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    NoChange,
    Updated(UpdateRecord),
}

fn positional_index(list: &ParameterList, idx: usize) -> Option<usize> {
    let p = &list.params()[idx];
    p.kind
        .is_positional()
        .then(|| list.params()[..idx].iter().filter(|q| q.kind.is_positional()).count())
}

/// All detected changes between two parameter lists plus sub-threshold
/// rename candidates.
pub fn detect_changes(
    legacy: &ParameterList,
    updated: &ParameterList,
    threshold: f64,
) -> Result<(Vec<Change>, Vec<NearMatch>), DiffError> {
    check_threshold(threshold)?;
    let lp = legacy.params();
    let up = updated.params();
    let named = |l: &ParameterList| -> Vec<usize> {
        (0..l.len()).filter(|&i| !l.params()[i].kind.is_variadic()).collect()
    };
    let mut pairs = match_by_name(lp, &named(legacy), up, &named(updated), threshold);
    // star parameters correspond by kind, whatever their names
    for kind in [ParamKind::VarPositional, ParamKind::VarKeyword] {
        let l = lp.iter().position(|p| p.kind == kind);
        let u = up.iter().position(|p| p.kind == kind);
        if let (Some(l), Some(u)) = (l, u) {
            pairs.push((l, u));
        }
    }
    pairs.sort_unstable();

    let mut changes = Vec::new();
    let matched_l: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    let matched_u: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
    let mut pair_iter = pairs.iter().peekable();
    for li in 0..lp.len() {
        if !matched_l.contains(&li) {
            changes.push(Change::new(ChangeKind::ParameterRemoved, Some(&lp[li]), None));
            continue;
        }
        let &&(_, ui) = pair_iter.peek().expect("matched index has a pair");
        pair_iter.next();
        let (l, u) = (&lp[li], &up[ui]);
        if l.name != u.name && !l.kind.is_variadic() {
            changes.push(Change::new(ChangeKind::Renamed, Some(l), Some(u)));
        }
        if l.kind != u.kind {
            changes.push(Change::new(ChangeKind::KindChanged, Some(l), Some(u)));
        }
        if l.required() != u.required() {
            changes.push(Change::new(ChangeKind::RequirednessChanged, Some(l), Some(u)));
        }
        if let (Some(a), Some(b)) = (positional_index(legacy, li), positional_index(updated, ui)) {
            if a != b {
                changes.push(Change::new(ChangeKind::PositionChanged, Some(l), Some(u)));
            }
        }
    }
    for (ui, u) in up.iter().enumerate() {
        if !matched_u.contains(&ui) {
            changes.push(Change::new(ChangeKind::ParameterAdded, None, Some(u)));
        }
    }

    let mut near = Vec::new();
    for (li, l) in lp.iter().enumerate() {
        if matched_l.contains(&li) || l.kind.is_variadic() {
            continue;
        }
        let best = up
            .iter()
            .enumerate()
            .filter(|(ui, u)| !matched_u.contains(ui) && !u.kind.is_variadic())
            .map(|(_, u)| (u, name_similarity(&l.name, &u.name)))
            .filter(|(_, s)| *s > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((u, similarity)) = best {
            near.push(NearMatch {
                legacy_name: l.name.clone(),
                updated_name: u.name.clone(),
                similarity,
            });
        }
    }
    Ok((changes, near))
}

/// Classify the update between two versions of one API.
///
/// Overloads are paired greedily: any pair satisfying all rules means no
/// change; otherwise the pair with the fewest changes is reported, ties
/// going to the earliest legacy then updated overload.
pub fn classify_update(
    legacy: &ApiSignature,
    updated: &ApiSignature,
    threshold: f64,
) -> Result<Classification, DiffError> {
    check_threshold(threshold)?;
    if legacy.api_path != updated.api_path || legacy.kind != updated.kind {
        return Err(DiffError::PathMismatch {
            legacy: format!("{} ({})", legacy.api_path, legacy.kind),
            updated: format!("{} ({})", updated.api_path, updated.kind),
        });
    }
    for l in &legacy.overloads {
        for u in &updated.overloads {
            if satisfies_rules(l, u, threshold)? {
                return Ok(Classification::NoChange);
            }
        }
    }
    let mut best: Option<(usize, &ParameterList, &ParameterList, Vec<Change>, Vec<NearMatch>)> = None;
    for l in &legacy.overloads {
        for u in &updated.overloads {
            let (changes, near) = detect_changes(l, u, threshold)?;
            if best.as_ref().map_or(true, |b| changes.len() < b.0) {
                best = Some((changes.len(), l, u, changes, near));
            }
        }
    }
    let (_, l, u, changes, near_matches) = best.expect("signatures have overloads");
    debug_assert!(!changes.is_empty(), "rule failure must surface a change");
    Ok(Classification::Updated(UpdateRecord {
        api_path: legacy.api_path.clone(),
        kind: legacy.kind,
        legacy: l.clone(),
        updated: u.clone(),
        changes,
        near_matches,
    }))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub updates: Vec<UpdateRecord>,
    pub apis_only_in_legacy: Vec<DottedPath>,
    pub apis_only_in_updated: Vec<DottedPath>,
    /// Same path, different API kind; not comparable parameter-wise.
    pub kind_changed: Vec<DottedPath>,
    pub unchanged_count: usize,
}

impl DiffReport {
    /// Check that the categories partition the union of both path sets.
    pub fn check_partition(&self, legacy: &SignatureDump, updated: &SignatureDump) -> bool {
        let union: BTreeSet<&DottedPath> = legacy.apis.keys().chain(updated.apis.keys()).collect();
        let mut seen: BTreeSet<&DottedPath> = BTreeSet::new();
        let all = self
            .updates
            .iter()
            .map(|u| &u.api_path)
            .chain(&self.apis_only_in_legacy)
            .chain(&self.apis_only_in_updated)
            .chain(&self.kind_changed);
        for path in all {
            if !seen.insert(path) {
                return false;
            }
        }
        let unchanged = union.len().checked_sub(seen.len());
        unchanged == Some(self.unchanged_count) && seen.iter().all(|p| union.contains(p))
    }
}

pub fn diff_dumps(legacy: &SignatureDump, updated: &SignatureDump, threshold: f64) -> Result<DiffReport, DiffError> {
    check_threshold(threshold)?;
    if legacy.library != updated.library {
        return Err(DiffError::LibraryMismatch {
            legacy: legacy.library.clone(),
            updated: updated.library.clone(),
        });
    }
    let shared: Vec<(&ApiSignature, &ApiSignature)> = legacy
        .apis
        .iter()
        .filter_map(|(path, l)| updated.apis.get(path).map(|u| (l, u)))
        .collect();
    let mut report = DiffReport {
        apis_only_in_legacy: legacy.apis.keys().filter(|p| !updated.apis.contains_key(*p)).cloned().collect(),
        apis_only_in_updated: updated.apis.keys().filter(|p| !legacy.apis.contains_key(*p)).cloned().collect(),
        ..Default::default()
    };
    let outcomes: Vec<Result<Option<Classification>, DiffError>> = shared
        .par_iter()
        .map(|(l, u)| {
            if l.kind != u.kind {
                return Ok(None);
            }
            classify_update(l, u, threshold).map(Some)
        })
        .collect();
    for ((l, _), outcome) in shared.iter().zip(outcomes) {
        match outcome? {
            None => report.kind_changed.push(l.api_path.clone()),
            Some(Classification::NoChange) => report.unchanged_count += 1,
            Some(Classification::Updated(record)) => report.updates.push(record),
        }
    }
    debug_assert!(report.check_partition(legacy, updated));
    Ok(report)
}

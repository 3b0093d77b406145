//! Retrieval-quality evaluation of interaction logs (mean reciprocal rank).
//!
//! A log is JSON lines of [`LogEvent`]. Selections come from `selection`
//! events (a [`SelectionRecord`] payload) or from `insert` events carrying a
//! `selection` object; `suggest` events supply ranked lists for the latter and
//! `search` events count text queries.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// One line of the interaction log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogEvent {
    /// Milliseconds since the Unix epoch.
    pub ts: u64,
    pub session_id: String,
    pub op: String,
    #[serde(default)]
    pub payload: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionRecord {
    pub query_id: String,
    pub ranked_categories: Vec<String>,
    pub selected_category: String,
    pub used_text_search: bool,
}

impl SelectionRecord {
    /// 1-based rank of the selected category, if listed.
    pub fn rank(&self) -> Option<usize> {
        self.ranked_categories.iter().position(|c| *c == self.selected_category).map(|i| i + 1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankDistribution {
    #[serde(rename = "1")]
    pub first: usize,
    #[serde(rename = "2")]
    pub second: usize,
    #[serde(rename = "3")]
    pub third: usize,
    #[serde(rename = "4+")]
    pub fourth_or_lower: usize,
}

impl RankDistribution {
    fn add(&mut self, rank: usize) {
        match rank {
            1 => self.first += 1,
            2 => self.second += 1,
            3 => self.third += 1,
            _ => self.fourth_or_lower += 1,
        }
    }
}

/// Mean reciprocal rank as an exact fraction and its float value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mrr {
    pub value: f64,
    pub exact: String,
    pub count: usize,
}

fn mrr(ranks: &[usize]) -> Option<Mrr> {
    if ranks.is_empty() {
        return None;
    }
    let mut sum = BigRational::zero();
    for r in ranks {
        sum += BigRational::new(BigInt::from(1), BigInt::from(*r));
    }
    let mean = sum / BigRational::from_integer(BigInt::from(ranks.len()));
    Some(Mrr {
        value: mean.to_f64().unwrap_or(f64::NAN),
        exact: format!("{}/{}", mean.numer(), mean.denom()),
        count: ranks.len(),
    })
}

/// Published study values, shown for orientation only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMrr {
    pub none: f64,
    pub basic: f64,
    pub full: f64,
    pub note: String,
}

impl Default for ReferenceMrr {
    fn default() -> Self {
        ReferenceMrr {
            none: 0.353,
            basic: 0.785,
            full: 0.769,
            note: "reference values from a 20-participant user study; not reproducible from logs".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub selection_count: usize,
    /// Over every ranked selection, text-search selections included.
    pub mrr: Option<Mrr>,
    /// Over selections made from the suggestion list only.
    pub mrr_suggestions_only: Option<Mrr>,
    pub rank_distribution: RankDistribution,
    pub text_query_count: usize,
    pub text_selection_count: usize,
    /// Text-search selections whose category was absent from the last list.
    pub excluded_text_selections: usize,
    /// List selections whose category was absent from their list.
    pub unranked_selections: usize,
    pub malformed_lines: usize,
    pub reference: ReferenceMrr,
}

/// Parses JSON lines, skipping blank lines; returns events and the number of
/// malformed lines.
pub fn parse_log(text: &str) -> (Vec<LogEvent>, usize) {
    let mut events = Vec::new();
    let mut malformed = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LogEvent>(line) {
            Ok(e) => events.push(e),
            Err(e) => {
                log::warn!("log line {}: skipped: {e}", i + 1);
                malformed += 1;
            }
        }
    }
    (events, malformed)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SuggestPayload {
    query_id: String,
    ranked_categories: Vec<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct InsertSelection {
    #[serde(default)]
    query_id: Option<String>,
    category: String,
    #[serde(default)]
    via_text_search: bool,
}

/// Selection records implied by a sequence of events.
pub fn selections(events: &[LogEvent]) -> (Vec<SelectionRecord>, usize) {
    let mut by_query: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut last: BTreeMap<&str, (String, Vec<String>)> = BTreeMap::new();
    let mut out = Vec::new();
    let mut malformed = 0;
    for e in events {
        match e.op.as_str() {
            "selection" => match serde_json::from_value::<SelectionRecord>(e.payload.clone()) {
                Ok(r) if !r.selected_category.is_empty() => out.push(r),
                _ => malformed += 1,
            },
            "suggest" => match serde_json::from_value::<SuggestPayload>(e.payload.clone()) {
                Ok(p) => {
                    by_query.insert(p.query_id.clone(), p.ranked_categories.clone());
                    last.insert(&e.session_id, (p.query_id, p.ranked_categories));
                }
                Err(_) => malformed += 1,
            },
            "insert" => {
                let Some(sel) = e.payload.get("selection").filter(|s| !s.is_null()) else {
                    continue;
                };
                let Ok(sel) = serde_json::from_value::<InsertSelection>(sel.clone()) else {
                    malformed += 1;
                    continue;
                };
                let listed = sel
                    .query_id
                    .as_ref()
                    .and_then(|q| by_query.get(q).map(|r| (q.clone(), r.clone())))
                    .or_else(|| last.get(e.session_id.as_str()).cloned());
                let (query_id, ranked) = listed.unwrap_or_default();
                out.push(SelectionRecord {
                    query_id,
                    ranked_categories: ranked,
                    selected_category: sel.category,
                    used_text_search: sel.via_text_search,
                });
            }
            _ => {}
        }
    }
    (out, malformed)
}

/// Evaluates parsed events.
pub fn evaluate_events(events: &[LogEvent]) -> EvalReport {
    let (records, malformed) = selections(events);
    let text_query_count = events.iter().filter(|e| e.op == "search").count();
    let mut report = evaluate_selections(&records, text_query_count);
    report.malformed_lines += malformed;
    report
}

/// MRR over selection records.
///
/// List selections use the selected category's rank. Text-search selections
/// use the rank of the chosen category in the last list shown when present;
/// otherwise they are excluded and counted separately.
pub fn evaluate_selections(records: &[SelectionRecord], text_query_count: usize) -> EvalReport {
    let mut all = Vec::new();
    let mut listed = Vec::new();
    let mut dist = RankDistribution::default();
    let mut excluded_text = 0;
    let mut unranked = 0;
    let mut text_selections = 0;
    for r in records {
        if r.used_text_search {
            text_selections += 1;
        }
        match (r.rank(), r.used_text_search) {
            (Some(rank), text) => {
                all.push(rank);
                dist.add(rank);
                if !text {
                    listed.push(rank);
                }
            }
            (None, true) => excluded_text += 1,
            (None, false) => unranked += 1,
        }
    }
    EvalReport {
        selection_count: records.len(),
        mrr: mrr(&all),
        mrr_suggestions_only: mrr(&listed),
        rank_distribution: dist,
        text_query_count,
        text_selection_count: text_selections,
        excluded_text_selections: excluded_text,
        unranked_selections: unranked,
        malformed_lines: 0,
        reference: ReferenceMrr::default(),
    }
}

/// Parses and evaluates a JSON-lines log.
pub fn evaluate_log(text: &str) -> EvalReport {
    let (events, malformed) = parse_log(text);
    let mut report = evaluate_events(&events);
    report.malformed_lines += malformed;
    report
}

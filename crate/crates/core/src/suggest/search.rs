use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{ModelDb, ModelMetadata};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchHit {
    pub model_id: String,
    pub category: String,
    /// Number of distinct query tokens found in the model's text fields.
    pub score: usize,
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn model_tokens(meta: &ModelMetadata) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = tokenize(&meta.name).into_iter().collect();
    out.extend(tokenize(&meta.category));
    out.extend(tokenize(&meta.description));
    for tag in &meta.tags {
        out.extend(tokenize(tag));
    }
    out
}

/// Case-insensitive keyword search over name, tags, category and description.
///
/// Models matching no token are dropped; the rest are ordered by score
/// (descending) then model id.
pub fn keyword_search(models: &ModelDb, text: &str, limit: usize) -> Vec<SearchHit> {
    let query: BTreeSet<String> = tokenize(text).into_iter().collect();
    if query.is_empty() {
        return Vec::new();
    }
    let mut hits: Vec<SearchHit> = models
        .iter()
        .filter_map(|m| {
            let tokens = model_tokens(m);
            let score = query.iter().filter(|q| tokens.contains(*q)).count();
            (score > 0).then(|| SearchHit {
                model_id: m.model_id.clone(),
                category: m.category.clone(),
                score,
            })
        })
        .collect();
    hits.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.model_id.cmp(&b.model_id)));
    hits.truncate(limit);
    hits
}

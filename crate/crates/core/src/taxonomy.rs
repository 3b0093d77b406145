//! Category taxonomy used for prior backoff.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_format_version, ModelDb};
use crate::FORMAT_VERSION;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CategoryTaxonomy {
    /// Category -> parent category (`None` for roots).
    #[serde(default)]
    pub parent: BTreeMap<String, Option<String>>,
    /// Categories whose models have no meaningful front (round tables, plants).
    #[serde(default)]
    pub no_front_categories: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TaxonomyFile {
    format_version: u32,
    #[serde(flatten)]
    taxonomy: CategoryTaxonomy,
}

impl CategoryTaxonomy {
    pub fn new(parent: impl IntoIterator<Item = (String, Option<String>)>) -> Result<Self> {
        let t = CategoryTaxonomy {
            parent: parent.into_iter().collect(),
            no_front_categories: BTreeSet::new(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Checks that parent links are acyclic.
    pub fn validate(&self) -> Result<()> {
        for start in self.parent.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(start.as_str());
            while let Some(c) = cur {
                if !seen.insert(c) {
                    return Err(Error::InvalidInput(format!(
                        "taxonomy cycle through category {c}"
                    )));
                }
                cur = self.parent_of(c);
            }
        }
        Ok(())
    }

    pub fn parent_of(&self, category: &str) -> Option<&str> {
        self.parent.get(category).and_then(|p| p.as_deref())
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self, category: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.parent_of(category);
        while let Some(c) = cur {
            if out.contains(&c) || c == category {
                break;
            }
            out.push(c);
            cur = self.parent_of(c);
        }
        out
    }

    /// The category followed by its ancestors.
    pub fn self_and_ancestors<'a>(&'a self, category: &'a str) -> Vec<&'a str> {
        let mut out = vec![category];
        out.extend(self.ancestors(category));
        out
    }

    /// Whether a category has a semantic front: not listed as front-less and
    /// not made up solely of models flagged without a semantic front.
    pub fn has_front(&self, category: &str, models: &ModelDb) -> bool {
        if self.no_front_categories.contains(category) {
            return false;
        }
        let mut members = models.iter().filter(|m| m.category == category).peekable();
        if members.peek().is_none() {
            return true;
        }
        members.any(|m| m.has_semantic_front)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TaxonomyFile {
            format_version: FORMAT_VERSION,
            taxonomy: self.clone(),
        })
        .expect("taxonomy serializes")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
        check_format_version(&value, path)?;
        let file: TaxonomyFile = serde_json::from_value(value).map_err(|e| Error::parse(path, e))?;
        file.taxonomy.validate().map_err(|e| Error::parse(path, e))?;
        Ok(file.taxonomy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}

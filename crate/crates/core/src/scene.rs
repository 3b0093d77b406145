//! Scenes and their static-support hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Transform, Vec3};
use crate::model::check_format_version;
use crate::FORMAT_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelInstance {
    pub id: String,
    pub model_id: String,
    pub transform: Transform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    #[serde(default)]
    pub is_architecture: bool,
}

impl ModelInstance {
    pub fn centroid(&self) -> Vec3 {
        self.transform.translation()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scene {
    pub id: String,
    pub scene_type: String,
    pub objects: Vec<ModelInstance>,
    /// `(childId, parentId)` pairs.
    #[serde(default)]
    pub support_edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SceneFile {
    format_version: u32,
    #[serde(flatten)]
    scene: Scene,
}

/// A problem with a scene's support hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SupportViolation {
    DuplicateId { id: String },
    DanglingEdge { child: String, parent: String, missing: String },
    MultiParent { child: String, parents: Vec<String> },
    Cycle { members: Vec<String> },
    ParentMismatch { object: String, declared: String, edge: Option<String> },
    Orphan { object: String },
    NonArchitectureRoot { object: String },
    MultipleRoots { roots: Vec<String> },
    NoRoot,
}

impl fmt::Display for SupportViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportViolation::DuplicateId { id } => write!(f, "duplicate object id {id}"),
            SupportViolation::DanglingEdge { child, parent, missing } => {
                write!(f, "edge {child}->{parent} references missing object {missing}")
            }
            SupportViolation::MultiParent { child, parents } => {
                write!(f, "object {child} has multiple parents {}", parents.join(", "))
            }
            SupportViolation::Cycle { members } => {
                write!(f, "support cycle through {}", members.join(" -> "))
            }
            SupportViolation::ParentMismatch { object, declared, edge } => write!(
                f,
                "object {object} declares parent {declared} but support edge says {}",
                edge.as_deref().unwrap_or("<none>")
            ),
            SupportViolation::Orphan { object } => {
                write!(f, "object {object} has no support parent")
            }
            SupportViolation::NonArchitectureRoot { object } => {
                write!(f, "root object {object} is not architecture")
            }
            SupportViolation::MultipleRoots { roots } => {
                write!(f, "multiple architecture roots {}", roots.join(", "))
            }
            SupportViolation::NoRoot => write!(f, "no root object"),
        }
    }
}

impl Scene {
    pub fn new(id: &str, scene_type: &str) -> Self {
        Scene {
            id: id.to_string(),
            scene_type: scene_type.to_string(),
            objects: Vec::new(),
            support_edges: Vec::new(),
        }
    }

    pub fn object(&self, id: &str) -> Option<&ModelInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: &str) -> Option<&mut ModelInstance> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    /// Support parent of `id` according to the support edges.
    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.support_edges
            .iter()
            .find(|(c, _)| c == id)
            .map(|(_, p)| p.as_str())
    }

    /// Objects directly supported by `id`, sorted by id.
    pub fn children_of(&self, id: &str) -> Vec<&ModelInstance> {
        let mut out: Vec<&ModelInstance> = self
            .support_edges
            .iter()
            .filter(|(_, p)| p == id)
            .filter_map(|(c, _)| self.object(c))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// Objects without a support parent.
    pub fn roots(&self) -> Vec<&ModelInstance> {
        let children: BTreeSet<&str> = self.support_edges.iter().map(|(c, _)| c.as_str()).collect();
        self.objects
            .iter()
            .filter(|o| !children.contains(o.id.as_str()))
            .collect()
    }

    /// Adds an object with a support edge to `parent_id` (or as root when `None`).
    pub fn add_object(&mut self, mut object: ModelInstance, parent_id: Option<&str>) {
        object.parent_id = parent_id.map(str::to_string);
        if let Some(p) = parent_id {
            self.support_edges.push((object.id.clone(), p.to_string()));
        }
        self.objects.push(object);
    }

    /// Removes an object and everything it (transitively) supports.
    /// Returns the removed ids in removal order.
    pub fn remove_subtree(&mut self, id: &str) -> Vec<String> {
        let mut removed = Vec::new();
        let mut stack = vec![id.to_string()];
        while let Some(cur) = stack.pop() {
            if removed.contains(&cur) {
                continue;
            }
            for child in self.children_of(&cur) {
                stack.push(child.id.clone());
            }
            removed.push(cur);
        }
        self.objects.retain(|o| !removed.contains(&o.id));
        self.support_edges
            .retain(|(c, p)| !removed.contains(c) && !removed.contains(p));
        removed
    }

    /// Re-parents an object, replacing its support edge.
    pub fn set_parent(&mut self, id: &str, parent_id: &str) {
        self.support_edges.retain(|(c, _)| c != id);
        self.support_edges.push((id.to_string(), parent_id.to_string()));
        if let Some(o) = self.object_mut(id) {
            o.parent_id = Some(parent_id.to_string());
        }
    }

    pub fn to_json(&self) -> String {
        let file = SceneFile {
            format_version: FORMAT_VERSION,
            scene: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("scene serializes")
    }

    /// Parses a scene file without validating its support tree.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
        check_format_version(&value, path)?;
        let file: SceneFile = serde_json::from_value(value).map_err(|e| Error::parse(path, e))?;
        Ok(file.scene)
    }
}

/// Checks that the support edges form one tree rooted at an architecture object.
///
/// Returns an empty list for a valid scene (an empty scene is valid).
pub fn validate_support_tree(scene: &Scene) -> Vec<SupportViolation> {
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    for o in &scene.objects {
        if !seen.insert(o.id.as_str()) {
            violations.push(SupportViolation::DuplicateId { id: o.id.clone() });
        }
    }

    let mut parents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut graph = DiGraphMap::<&str, ()>::new();
    for (child, parent) in &scene.support_edges {
        let missing = [child, parent]
            .into_iter()
            .find(|id| !seen.contains(id.as_str()));
        if let Some(missing) = missing {
            violations.push(SupportViolation::DanglingEdge {
                child: child.clone(),
                parent: parent.clone(),
                missing: missing.clone(),
            });
            continue;
        }
        parents.entry(child).or_default().insert(parent);
        graph.add_edge(child, parent, ());
    }

    for (child, ps) in &parents {
        if ps.len() > 1 {
            violations.push(SupportViolation::MultiParent {
                child: child.to_string(),
                parents: ps.iter().map(|p| p.to_string()).collect(),
            });
        }
    }

    for component in petgraph::algo::tarjan_scc(&graph) {
        let is_cycle = component.len() > 1
            || graph.contains_edge(component[0], component[0]);
        if is_cycle {
            let mut members: Vec<String> = component.iter().map(|s| s.to_string()).collect();
            members.sort();
            violations.push(SupportViolation::Cycle { members });
        }
    }

    for o in &scene.objects {
        if let Some(declared) = &o.parent_id {
            let edge = parents
                .get(o.id.as_str())
                .and_then(|ps| ps.iter().next())
                .map(|p| p.to_string());
            if edge.as_deref() != Some(declared.as_str()) {
                violations.push(SupportViolation::ParentMismatch {
                    object: o.id.clone(),
                    declared: declared.clone(),
                    edge,
                });
            }
        }
    }

    if !scene.objects.is_empty() {
        let roots: Vec<&ModelInstance> = scene
            .objects
            .iter()
            .filter(|o| !parents.contains_key(o.id.as_str()))
            .collect();
        let arch_roots: Vec<&ModelInstance> =
            roots.iter().copied().filter(|o| o.is_architecture).collect();
        match arch_roots.len() {
            0 if roots.is_empty() => violations.push(SupportViolation::NoRoot),
            0 => {
                for r in &roots {
                    violations.push(SupportViolation::NonArchitectureRoot { object: r.id.clone() });
                }
            }
            1 => {
                for r in roots.iter().filter(|o| !o.is_architecture) {
                    violations.push(SupportViolation::Orphan { object: r.id.clone() });
                }
            }
            _ => {
                violations.push(SupportViolation::MultipleRoots {
                    roots: arch_roots.iter().map(|o| o.id.clone()).collect(),
                });
                for r in roots.iter().filter(|o| !o.is_architecture) {
                    violations.push(SupportViolation::Orphan { object: r.id.clone() });
                }
            }
        }
    }

    violations
}

//! Scene edits as logged payloads, shared by the live service and replay.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use scenesuggest_core::eval::LogEvent;
use scenesuggest_core::{ModelInstance, Scene, Transform};

/// Payload of a `session` event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionCreated {
    pub scene_type: String,
    /// The initial scene as written by `Scene::to_json`.
    pub scene: serde_json::Value,
}

/// Payload of an `insert` event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Inserted {
    pub object: ModelInstance,
    /// `None` for an architecture root inserted into an empty scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    pub revision: u64,
    /// Which suggestion (or search result) the object came from, for evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<serde_json::Value>,
}

/// Payload of `move` and `rotate` events: the new parent and every transform
/// that changed (the object and everything it supports).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Updated {
    pub object_id: String,
    pub parent_id: String,
    pub transforms: BTreeMap<String, Transform>,
    pub revision: u64,
}

/// Payload of a `delete` event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Deleted {
    pub object_id: String,
    pub removed: Vec<String>,
    pub revision: u64,
}

pub fn apply_insert(scene: &mut Scene, m: &Inserted) {
    scene.add_object(m.object.clone(), m.parent_id.as_deref());
}

pub fn apply_update(scene: &mut Scene, m: &Updated) {
    if scene.parent_of(&m.object_id) != Some(m.parent_id.as_str()) {
        scene.set_parent(&m.object_id, &m.parent_id);
    }
    for (id, t) in &m.transforms {
        if let Some(o) = scene.object_mut(id) {
            o.transform = *t;
        }
    }
}

pub fn apply_delete(scene: &mut Scene, m: &Deleted) -> Vec<String> {
    scene.remove_subtree(&m.object_id)
}

/// A session rebuilt from its log entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayedSession {
    pub scene: Scene,
    pub revision: u64,
}

fn payload<T: for<'de> Deserialize<'de>>(e: &LogEvent, index: usize) -> Result<T, String> {
    serde_json::from_value(e.payload.clone()).map_err(|err| format!("event {index} ({}): {err}", e.op))
}

/// Rebuilds every session's scene from the mutation events of a log.
/// Query and search events are ignored.
pub fn replay(events: &[LogEvent]) -> Result<BTreeMap<String, ReplayedSession>, String> {
    let mut sessions: BTreeMap<String, ReplayedSession> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        if e.op == "session" {
            let created: SessionCreated = payload(e, i)?;
            let scene = Scene::from_json(&created.scene.to_string(), Path::new("<log>"))
                .map_err(|err| format!("event {i}: {err}"))?;
            sessions.insert(e.session_id.clone(), ReplayedSession { scene, revision: 0 });
            continue;
        }
        if !matches!(e.op.as_str(), "insert" | "move" | "rotate" | "delete") {
            continue;
        }
        let session = sessions
            .get_mut(&e.session_id)
            .ok_or_else(|| format!("event {i}: unknown session {}", e.session_id))?;
        let revision = match e.op.as_str() {
            "insert" => {
                let m: Inserted = payload(e, i)?;
                apply_insert(&mut session.scene, &m);
                m.revision
            }
            "delete" => {
                let m: Deleted = payload(e, i)?;
                apply_delete(&mut session.scene, &m);
                m.revision
            }
            _ => {
                let m: Updated = payload(e, i)?;
                apply_update(&mut session.scene, &m);
                m.revision
            }
        };
        if revision != session.revision + 1 {
            return Err(format!("event {i}: revision {revision} does not follow {}", session.revision));
        }
        session.revision = revision;
    }
    Ok(sessions)
}

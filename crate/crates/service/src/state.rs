use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use scenesuggest_core::priors::PriorsDb;
use scenesuggest_core::{ModelDb, Scene};

use crate::log::EventLog;

/// One editor's scene. `revision` grows by one per accepted mutation.
#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub id: String,
    pub scene: Scene,
    pub revision: u64,
}

/// Shared server state: read-only priors and models plus the live sessions.
#[derive(Debug)]
pub struct AppState {
    pub priors: PriorsDb,
    pub models: ModelDb,
    pub log: EventLog,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_session: AtomicU64,
}

impl AppState {
    pub fn new(priors: PriorsDb, models: ModelDb, log: EventLog) -> Self {
        AppState {
            priors,
            models,
            log,
            sessions: RwLock::new(BTreeMap::new()),
            next_session: AtomicU64::new(1),
        }
    }

    /// Starts a session on `scene`, or on an empty scene of `scene_type`.
    pub(crate) fn open_session(&self, scene: Option<Scene>, scene_type: &str) -> Session {
        let id = format!("s{}", self.next_session.fetch_add(1, Ordering::SeqCst));
        let scene = scene.unwrap_or_else(|| Scene::new(&id, scene_type));
        let session = Session { id: id.clone(), scene, revision: 0 };
        self.sessions
            .write()
            .expect("session table lock")
            .insert(id, Arc::new(Mutex::new(session.clone())));
        session
    }

    /// Handle to a session; lock it to read or mutate.
    pub fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().expect("session table lock").get(id).cloned()
    }

    /// Copy of a session's current state.
    pub fn snapshot(&self, id: &str) -> Option<Session> {
        self.session(id).map(|s| s.lock().expect("session lock").clone())
    }
}

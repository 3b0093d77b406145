//! Scene corpora: loading, observation extraction and synthetic generation.
//!
//! A corpus directory looks like
//!
//! ```text
//! corpus/
//!   models.json        model database
//!   taxonomy.json      optional category taxonomy
//!   scenes/*.json      one scene per file
//! ```

mod extract;
mod support;
mod synthetic;

use std::path::{Path, PathBuf};

pub use extract::{
    extract_observations, CorpusStats, CountObservation, ObservationSet, RelObservation,
    Relationship, SupportObservation,
};
pub use support::{
    identify_support_surface, locate_surface, support_surfaces, SupportContact, SupportSurface,
    PROXIMITY_THRESHOLD,
};
pub use synthetic::{
    generate_synthetic_corpus, OrientationSpec, PlacementRule, PositionSpec, SyntheticCorpus,
    SyntheticSpec,
};

use crate::error::{Error, Result};
use crate::model::ModelDb;
use crate::scene::{validate_support_tree, Scene};
use crate::taxonomy::CategoryTaxonomy;

/// Scenes plus the model database and taxonomy they refer to.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub scenes: Vec<Scene>,
    pub models: ModelDb,
    pub taxonomy: CategoryTaxonomy,
}

/// Checks a scene against the support-tree rules and the model database.
pub fn validate_scene(scene: &Scene, models: &ModelDb, path: &Path) -> Result<()> {
    for o in &scene.objects {
        if models.get(&o.model_id).is_none() {
            return Err(Error::UnknownModel {
                path: path.to_path_buf(),
                object: o.id.clone(),
                model_id: o.model_id.clone(),
            });
        }
    }
    let violations = validate_support_tree(scene);
    if !violations.is_empty() {
        return Err(Error::Validation {
            path: path.to_path_buf(),
            scene: scene.id.clone(),
            violations,
        });
    }
    Ok(())
}

/// Loads and validates scene files against a model database file.
/// Scenes are returned sorted by id.
pub fn load_corpus(scene_paths: &[PathBuf], models_path: &Path) -> Result<(Vec<Scene>, ModelDb)> {
    let models = ModelDb::load(models_path)?;
    let mut scenes = Vec::with_capacity(scene_paths.len());
    for path in scene_paths {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scene = Scene::from_json(&text, path)?;
        validate_scene(&scene, &models, path)?;
        scenes.push(scene);
    }
    scenes.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((scenes, models))
}

/// Loads a corpus directory (`scenes/*.json`, `models.json`, optional `taxonomy.json`).
pub fn load_corpus_dir(dir: &Path) -> Result<Corpus> {
    let scenes_dir = dir.join("scenes");
    let entries = std::fs::read_dir(&scenes_dir).map_err(|e| Error::io(&scenes_dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&scenes_dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no scene files found",
            scenes_dir.display()
        )));
    }
    let (scenes, models) = load_corpus(&paths, &dir.join("models.json"))?;
    let taxonomy_path = dir.join("taxonomy.json");
    let taxonomy = if taxonomy_path.exists() {
        CategoryTaxonomy::load(&taxonomy_path)?
    } else {
        CategoryTaxonomy::default()
    };
    Ok(Corpus {
        scenes,
        models,
        taxonomy,
    })
}

/// Writes a corpus directory in the layout read by [`load_corpus_dir`].
pub fn write_corpus_dir(corpus: &Corpus, dir: &Path) -> Result<()> {
    let scenes_dir = dir.join("scenes");
    std::fs::create_dir_all(&scenes_dir).map_err(|e| Error::io(&scenes_dir, e))?;
    corpus.models.save(&dir.join("models.json"))?;
    let taxonomy_path = dir.join("taxonomy.json");
    std::fs::write(&taxonomy_path, corpus.taxonomy.to_json()).map_err(|e| Error::io(&taxonomy_path, e))?;
    for scene in &corpus.scenes {
        let path = scenes_dir.join(format!("{}.json", scene.id));
        std::fs::write(&path, scene.to_json()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::support::support_surfaces;
use super::Corpus;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Transform, Vec3};
use crate::model::{check_format_version, ModelDb, ModelMetadata};
use crate::placement::{compose_placement, heading, reference_frame};
use crate::scene::{ModelInstance, Scene};
use crate::surface::{AttachmentFace, SurfaceType};
use crate::taxonomy::CategoryTaxonomy;
use crate::FORMAT_VERSION;

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Offset distribution on the support plane, in the delta frame of the
/// reference object (the parent, or a sibling of category `relativeTo`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PositionSpec {
    #[serde(default)]
    pub relative_to: Option<String>,
    #[serde(default)]
    pub mean: [f64; 2],
    #[serde(default)]
    pub std: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrientationSpec {
    /// Relative heading in degrees (see `relative_pose`).
    #[serde(default)]
    pub mean_deg: f64,
    #[serde(default)]
    pub std_deg: f64,
}

/// How many children of one category each parent gets, and where they go.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlacementRule {
    pub scene_type: String,
    pub parent_category: String,
    pub child_category: String,
    pub count: BTreeMap<u32, f64>,
    pub surface: BTreeMap<SurfaceType, f64>,
    #[serde(default = "default_face")]
    pub face: BTreeMap<AttachmentFace, f64>,
    #[serde(default = "default_position")]
    pub position: PositionSpec,
    #[serde(default = "default_orientation")]
    pub orientation: OrientationSpec,
}

fn default_face() -> BTreeMap<AttachmentFace, f64> {
    BTreeMap::from([(AttachmentFace::Bottom, 1.0)])
}

fn default_position() -> PositionSpec {
    PositionSpec { relative_to: None, mean: [0.0; 2], std: [0.0; 2] }
}

fn default_orientation() -> OrientationSpec {
    OrientationSpec { mean_deg: 0.0, std_deg: 0.0 }
}

/// Generative description of a synthetic corpus. Rules run in order, so a
/// rule may place children on objects created by earlier rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyntheticSpec {
    pub scene_types: BTreeMap<String, f64>,
    /// Model of the room; its box is placed with the floor at `z = 0`.
    pub room_model: String,
    pub models: Vec<ModelMetadata>,
    #[serde(default)]
    pub taxonomy: CategoryTaxonomy,
    pub rules: Vec<PlacementRule>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SpecFile {
    format_version: u32,
    #[serde(flatten)]
    spec: SyntheticSpec,
}

impl SyntheticSpec {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
        check_format_version(&value, path)?;
        // Deserialized directly: integer map keys do not survive a flattened wrapper.
        serde_json::from_value(value).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecFile { format_version: FORMAT_VERSION, spec: self.clone() })
            .expect("spec serializes")
    }

    pub fn validate(&self) -> Result<ModelDb> {
        check_categorical("sceneTypes", &self.scene_types)?;
        let models = ModelDb::new(self.models.clone()).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if models.get(&self.room_model).is_none() {
            return Err(Error::InvalidSpec(format!("room model {} not in models", self.room_model)));
        }
        let categories = models.categories();
        for (i, rule) in self.rules.iter().enumerate() {
            let what = format!("rule {i} ({} on {})", rule.child_category, rule.parent_category);
            check_categorical(&format!("{what} count"), &rule.count)?;
            check_categorical(&format!("{what} surface"), &rule.surface)?;
            check_categorical(&format!("{what} face"), &rule.face)?;
            if !categories.contains_key(rule.child_category.as_str()) {
                return Err(Error::InvalidSpec(format!("{what}: no models of category {}", rule.child_category)));
            }
            let stds = [rule.position.std[0], rule.position.std[1], rule.orientation.std_deg];
            if stds.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::InvalidSpec(format!("{what}: standard deviations must be >= 0")));
            }
        }
        Ok(models)
    }
}

fn check_categorical<K>(what: &str, dist: &BTreeMap<K, f64>) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::InvalidSpec(format!("{what}: empty distribution")));
    }
    if dist.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidSpec(format!("{what}: probabilities must be >= 0")));
    }
    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidSpec(format!("{what}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn sample_categorical<'a, K, R: Rng>(dist: &'a BTreeMap<K, f64>, rng: &mut R) -> &'a K {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (k, p) in dist {
        acc += p;
        last = Some(k);
        if u < acc {
            return k;
        }
    }
    last.expect("validated distributions are non-empty")
}

fn gaussian<R: Rng>(rng: &mut R, mean: f64, std: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + std * z
}

/// A generated corpus together with the `SyntheticSpec` that produced it.
#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub spec: SyntheticSpec,
}

/// Samples `n` scenes from `spec`; identical seeds give identical corpora.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, n: usize, seed: u64) -> Result<SyntheticCorpus> {
    let models = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories: BTreeMap<String, Vec<String>> = models
        .categories()
        .into_iter()
        .map(|(c, ids)| (c.to_string(), ids.into_iter().map(str::to_string).collect()))
        .collect();
    let room_meta = models.get(&spec.room_model).expect("validated");

    let mut scenes = Vec::with_capacity(n);
    for i in 0..n {
        let scene_type = sample_categorical(&spec.scene_types, &mut rng).clone();
        let mut scene = Scene::new(&format!("scene_{i:05}"), &scene_type);
        scene.add_object(
            ModelInstance {
                id: "room".into(),
                model_id: spec.room_model.clone(),
                transform: Transform::from_translation(&Vec3::new(0.0, 0.0, room_meta.bbox_dims[2] / 2.0)),
                parent_id: None,
                is_architecture: true,
            },
            None,
        );
        let mut next_id: BTreeMap<String, usize> = BTreeMap::new();

        for rule in spec.rules.iter().filter(|r| r.scene_type == scene_type || r.scene_type == "*") {
            let parents: Vec<String> = scene
                .objects
                .iter()
                .filter(|o| models.category_of(&o.model_id) == Some(rule.parent_category.as_str()))
                .map(|o| o.id.clone())
                .collect();
            for parent_id in parents {
                let k = *sample_categorical(&rule.count, &mut rng);
                for _ in 0..k {
                    let ids = &categories[&rule.child_category];
                    let model_id = &ids[rng.random_range(0..ids.len())];
                    let meta = models.get(model_id).expect("category member");
                    let transform = place_child(&scene, &models, &parent_id, rule, meta, &mut rng)?;
                    let counter = next_id.entry(rule.child_category.clone()).or_default();
                    let id = format!("{}_{:02}", rule.child_category, *counter);
                    *counter += 1;
                    scene.add_object(
                        ModelInstance {
                            id,
                            model_id: model_id.clone(),
                            transform,
                            parent_id: None,
                            is_architecture: false,
                        },
                        Some(&parent_id),
                    );
                }
            }
        }
        scenes.push(scene);
    }

    Ok(SyntheticCorpus {
        corpus: Corpus { scenes, models, taxonomy: spec.taxonomy.clone() },
        spec: spec.clone(),
    })
}

fn place_child<R: Rng>(
    scene: &Scene,
    models: &ModelDb,
    parent_id: &str,
    rule: &PlacementRule,
    meta: &ModelMetadata,
    rng: &mut R,
) -> Result<Transform> {
    let parent = scene.object(parent_id).expect("parent exists");
    let surface_type = *sample_categorical(&rule.surface, rng);
    let face = *sample_categorical(&rule.face, rng);

    let reference = rule
        .position
        .relative_to
        .as_deref()
        .and_then(|cat| {
            scene
                .children_of(parent_id)
                .into_iter()
                .find(|s| models.category_of(&s.model_id) == Some(cat))
        })
        .unwrap_or(parent);
    let ref_meta = models.get(&reference.model_id).expect("scene objects have models");

    let candidates: Vec<_> = support_surfaces(parent, models)
        .expect("parent has a model")
        .into_iter()
        .filter(|s| s.surface_type == surface_type)
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidSpec(format!(
            "{} has no {surface_type} surface for {}",
            rule.parent_category, rule.child_category
        )));
    }
    let surface = if std::ptr::eq(reference, parent) {
        candidates[rng.random_range(0..candidates.len())]
    } else {
        // Closest matching surface to the sibling, e.g. the wall behind a desk.
        *candidates
            .iter()
            .min_by(|a, b| {
                let da = a.face.distance_to(&reference.centroid());
                let db = b.face.distance_to(&reference.centroid());
                da.total_cmp(&db)
            })
            .expect("non-empty")
    };

    let n = surface.normal;
    let frame = reference_frame(&n, &reference.transform, ref_meta);
    let c = reference.centroid();
    let base = c - n * (c - surface.face.center).dot(&n);
    let dx = gaussian(rng, rule.position.mean[0], rule.position.std[0]);
    let dy = gaussian(rng, rule.position.mean[1], rule.position.std[1]);
    let anchor = base + frame.x * dx + frame.y * dy;

    let theta = gaussian(rng, rule.orientation.mean_deg, rule.orientation.std_deg).to_radians();
    let upright = compose_placement(&anchor, &n, face, 0.0, meta)?;
    let theta0 = frame.angle_of(&heading(&upright, meta, &n));
    compose_placement(&anchor, &n, face, wrap_angle(theta - theta0), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            scene_types: BTreeMap::from([("office".to_string(), 1.0)]),
            room_model: "room".into(),
            models: vec![
                ModelMetadata::new("room", "room", [6.0, 5.0, 3.0]),
                ModelMetadata::new("desk", "desk", [1.4, 0.7, 0.75]),
                ModelMetadata::new("chair_a", "chair", [0.5, 0.5, 0.9]),
                ModelMetadata::new("chair_b", "chair", [0.55, 0.5, 1.0]),
            ],
            taxonomy: CategoryTaxonomy::default(),
            rules: vec![
                PlacementRule {
                    scene_type: "office".into(),
                    parent_category: "room".into(),
                    child_category: "desk".into(),
                    count: BTreeMap::from([(1, 1.0)]),
                    surface: BTreeMap::from([(SurfaceType::FLOOR, 1.0)]),
                    face: default_face(),
                    position: PositionSpec { relative_to: None, mean: [0.0, 0.0], std: [1.0, 1.0] },
                    orientation: default_orientation(),
                },
                PlacementRule {
                    scene_type: "office".into(),
                    parent_category: "room".into(),
                    child_category: "chair".into(),
                    count: BTreeMap::from([(1, 0.5), (2, 0.5)]),
                    surface: BTreeMap::from([(SurfaceType::FLOOR, 1.0)]),
                    face: default_face(),
                    position: PositionSpec { relative_to: Some("desk".into()), mean: [0.0, 0.7], std: [0.1, 0.1] },
                    orientation: OrientationSpec { mean_deg: 180.0, std_deg: 5.0 },
                },
            ],
        }
    }

    #[test]
    fn every_office_has_one_desk() {
        let c = generate_synthetic_corpus(&spec(), 50, 3).unwrap();
        for s in &c.corpus.scenes {
            let desks = s.objects.iter().filter(|o| o.model_id == "desk").count();
            assert_eq!(desks, 1);
            assert!(crate::scene::validate_support_tree(s).is_empty());
        }
    }

    #[test]
    fn chair_count_frequency_matches_spec() {
        let c = generate_synthetic_corpus(&spec(), 1000, 11).unwrap();
        let ones = c
            .corpus
            .scenes
            .iter()
            .filter(|s| s.objects.iter().filter(|o| o.model_id.starts_with("chair")).count() == 1)
            .count();
        assert!((ones as f64 / 1000.0 - 0.5).abs() < 0.05, "ones = {ones}");
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_synthetic_corpus(&spec(), 20, 7).unwrap();
        let b = generate_synthetic_corpus(&spec(), 20, 7).unwrap();
        let ja: Vec<String> = a.corpus.scenes.iter().map(Scene::to_json).collect();
        let jb: Vec<String> = b.corpus.scenes.iter().map(Scene::to_json).collect();
        assert_eq!(ja, jb);
        let c = generate_synthetic_corpus(&spec(), 20, 8).unwrap();
        assert_ne!(ja, c.corpus.scenes.iter().map(Scene::to_json).collect::<Vec<_>>());
    }

    #[test]
    fn unnormalized_spec_is_rejected() {
        let mut s = spec();
        s.rules[1].count.insert(3, 0.2);
        assert!(matches!(generate_synthetic_corpus(&s, 1, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = spec();
        let back = SyntheticSpec::from_json(&s.to_json(), Path::new("spec.json")).unwrap();
        assert_eq!(back, s);
    }
}

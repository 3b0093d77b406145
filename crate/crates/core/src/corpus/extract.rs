use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::support::identify_support_surface;
use crate::error::{Error, Result};
use crate::model::ModelDb;
use crate::placement::{relative_pose, Placed, RelOffset};
use crate::scene::{ModelInstance, Scene};
use crate::surface::{AttachmentFace, SurfaceType};
use crate::taxonomy::CategoryTaxonomy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relationship {
    Sibling,
    ChildParent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupportObservation {
    pub scene_id: String,
    pub child_id: String,
    pub child_category: String,
    pub parent_category: String,
    pub scene_type: String,
    pub parent_surface: SurfaceType,
    pub child_face: AttachmentFace,
    pub low_confidence: bool,
}

/// Number of children of one category on one parent instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountObservation {
    pub scene_id: String,
    pub parent_id: String,
    pub child_category: String,
    pub parent_category: String,
    pub scene_type: String,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelObservation {
    pub scene_id: String,
    pub obj_id: String,
    pub ref_id: String,
    pub obj_category: String,
    pub ref_category: String,
    pub scene_type: String,
    pub relationship: Relationship,
    /// Support surface of the observed object.
    pub surface: SurfaceType,
    pub offset: RelOffset,
    pub theta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub scene_count: usize,
    pub per_scene_type: BTreeMap<String, usize>,
}

/// Everything prior learning needs from a corpus, in deterministic order
/// (scene id, then object id).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObservationSet {
    pub supports: Vec<SupportObservation>,
    pub counts: Vec<CountObservation>,
    pub relatives: Vec<RelObservation>,
    pub corpus_stats: CorpusStats,
}

impl ObservationSet {
    pub fn is_empty(&self) -> bool {
        self.supports.is_empty() && self.counts.is_empty() && self.relatives.is_empty()
    }
}

fn category<'a>(o: &ModelInstance, models: &'a ModelDb) -> Result<&'a str> {
    models
        .category_of(&o.model_id)
        .ok_or_else(|| Error::InvalidInput(format!("object {} has unknown model {}", o.id, o.model_id)))
}

/// Extracts support, count and relative-placement observations from validated scenes.
pub fn extract_observations(scenes: &[Scene], models: &ModelDb, taxonomy: &CategoryTaxonomy) -> Result<ObservationSet> {
    let mut ordered: Vec<&Scene> = scenes.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    // (child category, parent category) pairs seen anywhere in the corpus.
    let mut pairs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for scene in &ordered {
        for (child, parent) in &scene.support_edges {
            let (Some(c), Some(p)) = (scene.object(child), scene.object(parent)) else {
                continue;
            };
            pairs
                .entry(category(p, models)?.to_string())
                .or_default()
                .insert(category(c, models)?.to_string());
        }
    }

    let mut obs = ObservationSet::default();
    for scene in &ordered {
        obs.corpus_stats.scene_count += 1;
        *obs.corpus_stats.per_scene_type.entry(scene.scene_type.clone()).or_default() += 1;

        let mut objects: Vec<&ModelInstance> = scene.objects.iter().collect();
        objects.sort_by(|a, b| a.id.cmp(&b.id));

        for parent in &objects {
            let parent_cat = category(parent, models)?;
            let Some(child_cats) = pairs.get(parent_cat) else {
                continue;
            };
            let children = scene.children_of(&parent.id);
            for child_cat in child_cats {
                let mut count = 0u32;
                for c in &children {
                    if category(c, models)? == child_cat {
                        count += 1;
                    }
                }
                obs.counts.push(CountObservation {
                    scene_id: scene.id.clone(),
                    parent_id: parent.id.clone(),
                    child_category: child_cat.clone(),
                    parent_category: parent_cat.to_string(),
                    scene_type: scene.scene_type.clone(),
                    count,
                });
            }
        }

        for child in &objects {
            let Some(parent) = scene.parent_of(&child.id).and_then(|p| scene.object(p)) else {
                continue;
            };
            let child_cat = category(child, models)?;
            let parent_cat = category(parent, models)?;
            let contact = identify_support_surface(child, parent, models)?;
            obs.supports.push(SupportObservation {
                scene_id: scene.id.clone(),
                child_id: child.id.clone(),
                child_category: child_cat.to_string(),
                parent_category: parent_cat.to_string(),
                scene_type: scene.scene_type.clone(),
                parent_surface: contact.surface_type,
                child_face: contact.face,
                low_confidence: contact.low_confidence,
            });

            let child_meta = models.get(&child.model_id).expect("category lookup succeeded");
            let obj = Placed { transform: &child.transform, meta: child_meta };
            let refs = std::iter::once((parent, Relationship::ChildParent)).chain(
                scene
                    .children_of(&parent.id)
                    .into_iter()
                    .filter(|s| s.id != child.id)
                    .map(|s| (s, Relationship::Sibling)),
            );
            for (reference, relationship) in refs {
                let ref_cat = category(reference, models)?;
                let ref_meta = models.get(&reference.model_id).expect("category lookup succeeded");
                let pose = relative_pose(
                    obj,
                    Placed { transform: &reference.transform, meta: ref_meta },
                    &contact.normal,
                    taxonomy.has_front(ref_cat, models),
                );
                obs.relatives.push(RelObservation {
                    scene_id: scene.id.clone(),
                    obj_id: child.id.clone(),
                    ref_id: reference.id.clone(),
                    obj_category: child_cat.to_string(),
                    ref_category: ref_cat.to_string(),
                    scene_type: scene.scene_type.clone(),
                    relationship,
                    surface: contact.surface_type,
                    offset: pose.offset,
                    theta: pose.theta,
                });
            }
        }
    }
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Transform, Vec3};
    use crate::model::ModelMetadata;
    use crate::placement::compose_placement;

    fn models() -> ModelDb {
        ModelDb::new([
            ModelMetadata::new("room", "room", [6.0, 5.0, 3.0]),
            ModelMetadata::new("desk", "desk", [1.4, 0.7, 0.75]),
            ModelMetadata::new("monitor", "monitor", [0.5, 0.2, 0.4]),
            ModelMetadata::new("computer", "computer", [0.2, 0.45, 0.4]),
            ModelMetadata::new("chair", "chair", [0.5, 0.5, 0.9]),
        ])
        .unwrap()
    }

    fn place(scene: &mut Scene, models: &ModelDb, id: &str, model: &str, parent: &str, anchor: Vec3, alpha: f64) {
        let t = compose_placement(&anchor, &Vec3::z(), AttachmentFace::Bottom, alpha, models.get(model).unwrap()).unwrap();
        scene.add_object(
            ModelInstance { id: id.into(), model_id: model.into(), transform: t, parent_id: None, is_architecture: false },
            Some(parent),
        );
    }

    fn office(models: &ModelDb) -> Scene {
        let mut s = Scene::new("s1", "office");
        s.add_object(
            ModelInstance {
                id: "room".into(),
                model_id: "room".into(),
                transform: Transform::from_translation(&Vec3::new(0.0, 0.0, 1.5)),
                parent_id: None,
                is_architecture: true,
            },
            None,
        );
        place(&mut s, models, "desk", "desk", "room", Vec3::zeros(), 0.0);
        place(&mut s, models, "monitor", "monitor", "desk", Vec3::new(0.0, -0.1, 0.75), 0.0);
        place(&mut s, models, "computer", "computer", "desk", Vec3::new(0.5, 0.0, 0.75), 0.0);
        s
    }

    #[test]
    fn desk_hierarchy_support_observations() {
        let m = models();
        let obs = extract_observations(&[office(&m)], &m, &CategoryTaxonomy::default()).unwrap();
        let pairs: Vec<(&str, &str, SurfaceType)> = obs
            .supports
            .iter()
            .map(|s| (s.child_category.as_str(), s.parent_category.as_str(), s.parent_surface))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("computer", "desk", SurfaceType::TOP),
                ("desk", "room", SurfaceType::FLOOR),
                ("monitor", "desk", SurfaceType::TOP),
            ]
        );
        assert!(obs.supports.iter().all(|s| !s.low_confidence && s.child_face == AttachmentFace::Bottom));
    }

    #[test]
    fn two_chairs_counted_on_room() {
        let m = models();
        let mut s = office(&m);
        place(&mut s, &m, "chair_a", "chair", "room", Vec3::new(0.0, 1.0, 0.0), 0.0);
        place(&mut s, &m, "chair_b", "chair", "room", Vec3::new(1.0, 1.0, 0.0), 0.0);
        let obs = extract_observations(&[s], &m, &CategoryTaxonomy::default()).unwrap();
        let chair = obs.counts.iter().find(|c| c.child_category == "chair").unwrap();
        assert_eq!((chair.parent_category.as_str(), chair.scene_type.as_str(), chair.count), ("room", "office", 2));
        // the desk is a parent category too; it has no chairs but only pairs seen on desks appear
        assert!(obs.counts.iter().all(|c| !(c.parent_category == "desk" && c.child_category == "chair")));
    }

    #[test]
    fn zero_counts_for_pairs_seen_elsewhere() {
        let m = models();
        let a = office(&m);
        let mut b = Scene::new("s2", "office");
        b.add_object(a.objects[0].clone(), None);
        b.objects[0].parent_id = None;
        place(&mut b, &m, "desk", "desk", "room", Vec3::zeros(), 0.0);
        let obs = extract_observations(&[a, b], &m, &CategoryTaxonomy::default()).unwrap();
        let empty_desk: Vec<_> = obs.counts.iter().filter(|c| c.scene_id == "s2" && c.parent_id == "desk").collect();
        assert_eq!(empty_desk.len(), 2);
        assert!(empty_desk.iter().all(|c| c.count == 0));
    }

    #[test]
    fn chair_in_front_of_desk_sibling_observation() {
        let m = models();
        let mut s = office(&m);
        // Desk front is +Y; chair one meter in front, spun to face the desk.
        place(&mut s, &m, "chair", "chair", "room", Vec3::new(0.0, 1.0, 0.0), std::f64::consts::PI);
        let obs = extract_observations(&[s], &m, &CategoryTaxonomy::default()).unwrap();
        let rel = obs
            .relatives
            .iter()
            .find(|r| r.obj_id == "chair" && r.ref_id == "desk")
            .unwrap();
        assert_eq!(rel.relationship, Relationship::Sibling);
        let RelOffset::Planar([x, y]) = rel.offset else { panic!() };
        // Independent arithmetic: desk frame axes are world axes here, so the
        // offset is the plain centroid difference in XY.
        let desk_c = Vec3::new(0.0, 0.0, 0.375);
        let chair_c = Vec3::new(0.0, 1.0, 0.45);
        assert!((x - (chair_c.x - desk_c.x)).abs() < 1e-12);
        assert!((y - (chair_c.y - desk_c.y)).abs() < 1e-12);
        assert!((rel.theta - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn siblings_in_both_directions() {
        let m = models();
        let obs = extract_observations(&[office(&m)], &m, &CategoryTaxonomy::default()).unwrap();
        let on_desk = obs
            .relatives
            .iter()
            .filter(|r| r.relationship == Relationship::Sibling)
            .count();
        assert_eq!(on_desk, 2);
        let cp = obs.relatives.iter().filter(|r| r.relationship == Relationship::ChildParent).count();
        assert_eq!(cp, 3);
    }
}

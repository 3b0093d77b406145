//! Ranked, placed suggestions for a point on a support surface.

mod search;

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use search::{keyword_search, tokenize, SearchHit};

use crate::corpus::Relationship;
use crate::error::{Error, Result};
use crate::geometry::{to_array, vec3, wrap_angle, Transform, Vec3};
use crate::model::{ModelDb, ModelMetadata};
use crate::placement::{compose_placement, relative_pose, Placed};
use crate::priors::{orientation_bin, PriorsDb, RelKey, ORIENTATION_BINS};
use crate::raycast::{raycast_scene, Ray};
use crate::scene::Scene;
use crate::surface::{featurize_surface, AttachmentFace, SurfaceType};

/// Where a suggestion is requested: a point on one surface of a parent object.
#[derive(Clone, Debug)]
pub struct ContextQuery<'a> {
    pub scene: &'a Scene,
    pub parent_id: String,
    pub parent_category: String,
    pub surface_normal: Vec3,
    pub surface_type: SurfaceType,
    pub pos: Vec3,
    pub scene_type: String,
}

impl<'a> ContextQuery<'a> {
    /// Query at `pos` on the surface of `parent_id` with normal `surface_normal`
    /// (normalized here).
    pub fn new(scene: &'a Scene, models: &ModelDb, parent_id: &str, pos: Vec3, surface_normal: Vec3) -> Result<Self> {
        let parent = scene
            .object(parent_id)
            .ok_or_else(|| Error::InvalidInput(format!("parent {parent_id} not in scene {}", scene.id)))?;
        let parent_category = models
            .category_of(&parent.model_id)
            .ok_or_else(|| Error::InvalidInput(format!("object {parent_id} has unknown model {}", parent.model_id)))?;
        let len = surface_normal.norm();
        if !(len.is_finite() && len > 0.0) || !pos.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("query needs a finite position and non-zero normal".into()));
        }
        let surface_normal = surface_normal / len;
        let surface_type = featurize_surface(&surface_normal, parent.is_architecture)?;
        Ok(ContextQuery {
            scene,
            parent_id: parent_id.to_string(),
            parent_category: parent_category.to_string(),
            surface_normal,
            surface_type,
            pos,
            scene_type: scene.scene_type.clone(),
        })
    }

    /// Query at the first surface hit by `ray`; `Ok(None)` on a miss.
    pub fn from_ray(scene: &'a Scene, models: &ModelDb, ray: &Ray) -> Result<Option<Self>> {
        match raycast_scene(ray, scene, models) {
            None => Ok(None),
            Some(hit) => Self::new(scene, models, &hit.object_id, vec3(hit.point), vec3(hit.normal)).map(Some),
        }
    }
}

/// A transform plus the attachment face it realizes, and the parameters it
/// was composed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Placement {
    pub transform: Transform,
    pub face: AttachmentFace,
    pub anchor: [f64; 3],
    pub surface_normal: [f64; 3],
    pub alpha: f64,
}

impl Placement {
    pub fn compose(anchor: &Vec3, surface_normal: &Vec3, face: AttachmentFace, alpha: f64, meta: &ModelMetadata) -> Result<Self> {
        Ok(Placement {
            transform: compose_placement(anchor, surface_normal, face, alpha, meta)?,
            face,
            anchor: to_array(anchor),
            surface_normal: to_array(surface_normal),
            alpha,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Suggestion {
    pub category: String,
    pub representative_model_id: String,
    pub member_model_ids: Vec<String>,
    pub placement: Placement,
    pub score: f64,
    pub alpha: f64,
    /// `P(|C| > k | parent, scene)`.
    pub occurrence: f64,
    /// `P_surf_sup(t | C)`.
    pub surface_probability: f64,
    pub position_score: f64,
}

/// Weights of the occurrence/surface term and the position term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { lambda1: 1.0, lambda2: 0.25 }
    }
}

/// One neighbor's contribution to `w_pos` as a function of spin:
/// `density * bins[bin(theta0 + alpha)]`.
#[derive(Clone, Debug)]
struct NeighborTerm {
    density: f64,
    theta0: f64,
    bins: Vec<f64>,
}

impl NeighborTerm {
    fn value(&self, alpha: f64) -> f64 {
        self.density * self.bins[orientation_bin(self.theta0 + alpha)]
    }
}

/// Ranks categories for context queries against learned priors.
#[derive(Clone, Copy, Debug)]
pub struct SuggestionEngine<'a> {
    pub priors: &'a PriorsDb,
    pub models: &'a ModelDb,
    pub weights: Weights,
}

impl<'a> SuggestionEngine<'a> {
    pub fn new(priors: &'a PriorsDb, models: &'a ModelDb) -> Self {
        SuggestionEngine { priors, models, weights: Weights::default() }
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    fn representative(&self, category: &str) -> Result<&'a ModelMetadata> {
        self.models
            .representative(category)
            .ok_or_else(|| Error::InvalidInput(format!("no model of category {category}")))
    }

    /// Face with the highest `P_surf_att(f | C, t)`; ties follow the fixed face order.
    pub fn choose_attachment_face(&self, category: &str, t: SurfaceType) -> AttachmentFace {
        let mut best = AttachmentFace::TIE_ORDER[0];
        let mut best_p = f64::NEG_INFINITY;
        for face in AttachmentFace::TIE_ORDER {
            let p = self.priors.attachment_face_probability(face, category, t);
            if p > best_p {
                best = face;
                best_p = p;
            }
        }
        best
    }

    /// Per-neighbor terms, evaluated at spin `alpha`; `theta0` is shifted
    /// back to spin zero.
    fn neighbor_terms(&self, category: &str, query: &ContextQuery<'_>, face: AttachmentFace, alpha: f64) -> Result<Vec<NeighborTerm>> {
        let meta = self.representative(category)?;
        let transform = compose_placement(&query.pos, &query.surface_normal, face, alpha, meta)?;
        let candidate = Placed { transform: &transform, meta };
        let parent = query
            .scene
            .object(&query.parent_id)
            .ok_or_else(|| Error::InvalidInput(format!("parent {} not in scene", query.parent_id)))?;
        let neighbors = std::iter::once((parent, Relationship::ChildParent)).chain(
            query
                .scene
                .children_of(&query.parent_id)
                .into_iter()
                .map(|c| (c, Relationship::Sibling)),
        );
        let mut terms = Vec::new();
        for (neighbor, relationship) in neighbors {
            let Some(ref_meta) = self.models.get(&neighbor.model_id) else {
                continue;
            };
            let pose = relative_pose(
                candidate,
                Placed { transform: &neighbor.transform, meta: ref_meta },
                &query.surface_normal,
                self.priors.has_front(&ref_meta.category),
            );
            let key = RelKey {
                obj_category: category.to_string(),
                ref_category: ref_meta.category.clone(),
                scene_type: query.scene_type.clone(),
                relationship,
                surface: query.surface_type,
            };
            let density = self.priors.relpos_density(&pose.offset, &key);
            let bins = match self.priors.relorient_histogram(&key) {
                Some(h) => h.bins.clone(),
                None => vec![1.0 / ORIENTATION_BINS as f64; ORIENTATION_BINS],
            };
            terms.push(NeighborTerm { density, theta0: wrap_angle(pose.theta - alpha), bins });
        }
        Ok(terms)
    }

    /// `w_pos`: sum over the parent and the parent's current children of
    /// position density times orientation mass for a candidate of `category`
    /// placed at the query point with spin `alpha`.
    pub fn position_score(&self, category: &str, query: &ContextQuery<'_>, face: AttachmentFace, alpha: f64) -> Result<f64> {
        let terms = self.neighbor_terms(category, query, face, alpha)?;
        Ok(terms.iter().map(|t| t.value(alpha)).sum())
    }

    /// Spin angle maximizing `w_pos`.
    ///
    /// `w_pos` is piecewise constant in the spin: each neighbor's orientation
    /// bin changes only where `theta0 + alpha` crosses a 10° boundary. The
    /// earliest maximizing interval is found exactly; the result is its
    /// smallest whole-degree angle, or its midpoint if it holds none.
    pub fn optimize_rotation(&self, category: &str, query: &ContextQuery<'_>, face: AttachmentFace) -> Result<f64> {
        let terms = self.neighbor_terms(category, query, face, 0.0)?;
        Ok(maximize_spin(&terms))
    }

    /// Ranked suggestions for every category in the model database.
    pub fn suggest(&self, query: &ContextQuery<'_>, limit: usize) -> Result<Vec<Suggestion>> {
        let children = query.scene.children_of(&query.parent_id);
        let architecture: BTreeSet<&str> = query
            .scene
            .objects
            .iter()
            .filter(|o| o.is_architecture)
            .filter_map(|o| self.models.category_of(&o.model_id))
            .collect();
        let mut out = Vec::new();
        for (category, members) in self.models.categories() {
            if architecture.contains(category) {
                continue;
            }
            let meta = self.representative(category)?;
            let k = children
                .iter()
                .filter(|c| self.models.category_of(&c.model_id) == Some(category))
                .count() as u32;
            let occurrence = self.priors.occurrence_probability(category, &query.parent_category, &query.scene_type, k);
            let surface_probability = self.priors.support_surface_probability(query.surface_type, category);
            let face = self.choose_attachment_face(category, query.surface_type);
            let terms = self.neighbor_terms(category, query, face, 0.0)?;
            let alpha = maximize_spin(&terms);
            let position_score: f64 = terms.iter().map(|t| t.value(alpha)).sum();
            let score = self.weights.lambda1 * occurrence * surface_probability + self.weights.lambda2 * position_score;
            out.push(Suggestion {
                category: category.to_string(),
                representative_model_id: meta.model_id.clone(),
                member_model_ids: members.iter().map(|m| m.to_string()).collect(),
                placement: Placement::compose(&query.pos, &query.surface_normal, face, alpha, meta)?,
                score,
                alpha,
                occurrence,
                surface_probability,
                position_score,
            });
        }
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.category.cmp(&b.category)));
        out.truncate(limit);
        Ok(out)
    }

    /// Every model of `category` placed with the same anchor, face and spin.
    pub fn expand_category(&self, category: &str, placement: &Placement) -> Result<Vec<(String, Placement)>> {
        let anchor = vec3(placement.anchor);
        let normal = vec3(placement.surface_normal);
        let mut out = Vec::new();
        for meta in self.models.iter().filter(|m| m.category == category) {
            let p = Placement::compose(&anchor, &normal, placement.face, placement.alpha, meta)?;
            out.push((meta.model_id.clone(), p));
        }
        Ok(out)
    }
}

fn maximize_spin(terms: &[NeighborTerm]) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let step = TAU / ORIENTATION_BINS as f64;
    let mut cuts = vec![0.0, TAU];
    for t in terms {
        for m in 0..ORIENTATION_BINS {
            let b = wrap_angle(m as f64 * step - t.theta0);
            if b > 0.0 && b < TAU {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let score = |alpha: f64| -> f64 { terms.iter().map(|t| t.value(alpha)).sum() };
    let mut best: Option<(f64, f64, f64)> = None;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let v = score(0.5 * (lo + hi));
        if best.is_none_or(|(b, _, _)| v > b) {
            best = Some((v, lo, hi));
        }
    }
    let Some((best_v, lo, hi)) = best else {
        return 0.0;
    };
    let first = lo.to_degrees().ceil() as i64;
    let last = hi.to_degrees().floor() as i64;
    for deg in first..=last.min(359) {
        let alpha = (deg as f64).to_radians();
        if alpha >= lo - 1e-12 && alpha < hi && score(alpha) == best_v {
            return alpha;
        }
    }
    0.5 * (lo + hi)
}

//! Contextual priors learned from corpus observations.
//!
//! Five families are estimated: occurrence-count histograms, support-surface
//! and attachment-face categoricals, relative-position kernel density
//! estimates and relative-orientation wrapped histograms. Every lookup walks a
//! backoff ladder over the category taxonomy and the scene type before giving
//! up.

pub mod kde;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{ObservationSet, Relationship};
use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::model::{check_format_version, ModelDb, ModelMetadata, ShapeClass};
use crate::placement::RelOffset;
use crate::surface::{AttachmentFace, NormalClass, SurfaceType};
use crate::taxonomy::CategoryTaxonomy;
use crate::FORMAT_VERSION;

/// Minimum number of observations for a key to be used without backing off.
pub const BACKOFF_THRESHOLD: u64 = 5;
/// Returned for unseen events, and the Laplace pseudo-count of orientation bins.
pub const SMOOTHING_EPSILON: f64 = 1e-4;
pub const ORIENTATION_BINS: usize = 36;
/// Scene-type label of the pool that merges every scene type.
pub const ANY_SCENE: &str = "*";

const BIN_WIDTH: f64 = std::f64::consts::TAU / ORIENTATION_BINS as f64;

/// Index of the 10° bin holding `theta` (any real, wrapped first).
pub fn orientation_bin(theta: f64) -> usize {
    ((wrap_angle(theta) / BIN_WIDTH).floor() as usize).min(ORIENTATION_BINS - 1)
}

/// `P(|C| = k | parent category, scene type)` as raw counts and frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountHistogram {
    pub child_category: String,
    pub parent_category: String,
    pub scene_type: String,
    /// Number of parent instances observed with each child count.
    pub counts: BTreeMap<u32, u64>,
    pub probs: BTreeMap<u32, f64>,
    pub n_obs: u64,
}

impl CountHistogram {
    /// `Σ_{i>k} P(|C| = i)`.
    pub fn tail(&self, k: u32) -> f64 {
        if self.n_obs == 0 {
            return 0.0;
        }
        let above: u64 = self.counts.range((Bound::Excluded(k), Bound::Unbounded)).map(|(_, c)| c).sum();
        above as f64 / self.n_obs as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurfaceCategorical {
    pub category: String,
    pub counts: BTreeMap<SurfaceType, u64>,
    pub probs: BTreeMap<SurfaceType, f64>,
    pub n_obs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaceCategorical {
    pub category: String,
    pub surface: SurfaceType,
    pub counts: BTreeMap<AttachmentFace, u64>,
    pub probs: BTreeMap<AttachmentFace, f64>,
    pub n_obs: u64,
}

/// Key of the relative-position and relative-orientation priors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelKey {
    pub obj_category: String,
    pub ref_category: String,
    pub scene_type: String,
    pub relationship: Relationship,
    pub surface: SurfaceType,
}

impl RelKey {
    fn with(&self, obj_category: &str, scene_type: &str) -> RelKey {
        RelKey {
            obj_category: obj_category.to_string(),
            scene_type: scene_type.to_string(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RelSamples {
    Planar { points: Vec<[f64; 2]>, bandwidth: [f64; 2] },
    Radial { distances: Vec<f64>, bandwidth: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelPosKde {
    pub key: RelKey,
    pub samples: RelSamples,
    pub n_obs: u64,
}

impl RelPosKde {
    /// Density at `offset`; `None` when the offset kind does not match the samples.
    pub fn density(&self, offset: &RelOffset) -> Option<f64> {
        match (&self.samples, offset) {
            (RelSamples::Planar { points, bandwidth }, RelOffset::Planar(q)) => {
                Some(kde::planar_density(points, *bandwidth, *q))
            }
            (RelSamples::Radial { distances, bandwidth }, RelOffset::Radial(r)) => {
                Some(kde::radial_density(distances, *bandwidth, *r))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WrappedHistogram {
    pub key: RelKey,
    pub counts: Vec<u64>,
    pub bins: Vec<f64>,
    pub n_obs: u64,
}

/// One rung of the backoff ladder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackoffLevel {
    pub category: String,
    /// `None` for priors that are not conditioned on the scene type.
    pub scene_type: Option<String>,
}

/// How a lookup was resolved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lookup {
    /// Levels whose entries were examined, in order.
    pub consulted: Vec<BackoffLevel>,
    /// Level the query was answered from.
    pub resolved: Option<BackoffLevel>,
    /// Support observations of the resolved category in the resolved scene pool.
    pub n_obs: u64,
    /// No level reached the threshold; the most specific observed level was used.
    pub sparse: bool,
}

/// Support surface and attachment face guessed from shape alone.
pub fn geometry_fallback(meta: &ModelMetadata) -> (SurfaceType, AttachmentFace) {
    let surface = SurfaceType::TOP;
    (surface, fallback_face(meta.shape_class(), surface))
}

/// Attachment face for a shape class on a surface type when nothing was observed.
pub fn fallback_face(shape: ShapeClass, surface: SurfaceType) -> AttachmentFace {
    match shape {
        ShapeClass::Blocky => AttachmentFace::Bottom,
        ShapeClass::Flat if surface.normal_class == NormalClass::Horizontal => AttachmentFace::Back,
        ShapeClass::Flat => AttachmentFace::Bottom,
        ShapeClass::Thin => AttachmentFace::Left,
    }
}

fn fallback_surface_probability(t: SurfaceType) -> f64 {
    if t.normal_class == NormalClass::Up {
        0.5
    } else {
        0.0
    }
}

/// All learned priors plus the taxonomy used to back off.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorsDb {
    pub backoff_threshold: u64,
    pub smoothing_epsilon: f64,
    taxonomy: CategoryTaxonomy,
    frontless: BTreeSet<String>,
    shapes: BTreeMap<String, ShapeClass>,
    support_counts: BTreeMap<(String, String), u64>,
    count_hists: BTreeMap<(String, String, String), CountHistogram>,
    support_cats: BTreeMap<String, SurfaceCategorical>,
    face_cats: BTreeMap<(String, SurfaceType), FaceCategorical>,
    rel_pos: BTreeMap<RelKey, RelPosKde>,
    rel_orient: BTreeMap<RelKey, WrappedHistogram>,
}

fn frequencies<K: Ord + Copy>(counts: &BTreeMap<K, u64>) -> (BTreeMap<K, f64>, u64) {
    let n: u64 = counts.values().sum();
    let probs = counts.iter().map(|(k, c)| (*k, *c as f64 / n as f64)).collect();
    (probs, n)
}

fn scene_pools(scene_type: &str) -> Vec<&str> {
    if scene_type == ANY_SCENE {
        vec![ANY_SCENE]
    } else {
        vec![scene_type, ANY_SCENE]
    }
}

/// Number of support observations of one category (descendants pooled)
/// within one scene type, or `"*"` for all scene types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupportCount {
    pub category: String,
    pub scene_type: String,
    pub n_obs: u64,
}

/// Learns every prior family from an observation set.
pub fn learn_priors(obs: &ObservationSet, taxonomy: &CategoryTaxonomy, models: &ModelDb) -> Result<PriorsDb> {
    if obs.is_empty() {
        return Err(Error::EmptyObservations);
    }

    // Per parent instance: child category -> count, pooled into every ancestor.
    type ParentCounts<'a> = (&'a str, &'a str, BTreeMap<&'a str, u32>);
    let mut per_parent: BTreeMap<(&str, &str), ParentCounts> = BTreeMap::new();
    for c in &obs.counts {
        let entry = per_parent
            .entry((c.scene_id.as_str(), c.parent_id.as_str()))
            .or_insert_with(|| (c.parent_category.as_str(), c.scene_type.as_str(), BTreeMap::new()));
        for cat in taxonomy.self_and_ancestors(&c.child_category) {
            *entry.2.entry(cat).or_default() += c.count;
        }
    }
    let mut raw_counts: BTreeMap<(String, String, String), BTreeMap<u32, u64>> = BTreeMap::new();
    for (parent_cat, scene_type, by_cat) in per_parent.values() {
        for (cat, count) in by_cat {
            for s in scene_pools(scene_type) {
                *raw_counts
                    .entry((cat.to_string(), parent_cat.to_string(), s.to_string()))
                    .or_default()
                    .entry(*count)
                    .or_default() += 1;
            }
        }
    }
    let count_hists = raw_counts
        .into_iter()
        .map(|(key, counts)| {
            let (probs, n_obs) = frequencies(&counts);
            let hist = CountHistogram {
                child_category: key.0.clone(),
                parent_category: key.1.clone(),
                scene_type: key.2.clone(),
                counts,
                probs,
                n_obs,
            };
            (key, hist)
        })
        .collect();

    let mut support_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for s in &obs.supports {
        for cat in taxonomy.self_and_ancestors(&s.child_category) {
            for pool in scene_pools(&s.scene_type) {
                *support_counts.entry((cat.to_string(), pool.to_string())).or_default() += 1;
            }
        }
    }

    let mut surface_counts: BTreeMap<String, BTreeMap<SurfaceType, u64>> = BTreeMap::new();
    let mut face_counts: BTreeMap<(String, SurfaceType), BTreeMap<AttachmentFace, u64>> = BTreeMap::new();
    for s in &obs.supports {
        for cat in taxonomy.self_and_ancestors(&s.child_category) {
            *surface_counts.entry(cat.to_string()).or_default().entry(s.parent_surface).or_default() += 1;
            *face_counts
                .entry((cat.to_string(), s.parent_surface))
                .or_default()
                .entry(s.child_face)
                .or_default() += 1;
        }
    }
    let support_cats = surface_counts
        .into_iter()
        .map(|(category, counts)| {
            let (probs, n_obs) = frequencies(&counts);
            (category.clone(), SurfaceCategorical { category, counts, probs, n_obs })
        })
        .collect();
    let face_cats = face_counts
        .into_iter()
        .map(|((category, surface), counts)| {
            let (probs, n_obs) = frequencies(&counts);
            ((category.clone(), surface), FaceCategorical { category, surface, counts, probs, n_obs })
        })
        .collect();

    let mut planar: BTreeMap<RelKey, Vec<[f64; 2]>> = BTreeMap::new();
    let mut radial: BTreeMap<RelKey, Vec<f64>> = BTreeMap::new();
    let mut bins: BTreeMap<RelKey, Vec<u64>> = BTreeMap::new();
    for r in &obs.relatives {
        let base = RelKey {
            obj_category: r.obj_category.clone(),
            ref_category: r.ref_category.clone(),
            scene_type: r.scene_type.clone(),
            relationship: r.relationship,
            surface: r.surface,
        };
        for cat in taxonomy.self_and_ancestors(&r.obj_category) {
            for s in scene_pools(&r.scene_type) {
                let key = base.with(cat, s);
                match r.offset {
                    RelOffset::Planar(p) => planar.entry(key.clone()).or_default().push(p),
                    RelOffset::Radial(d) => radial.entry(key.clone()).or_default().push(d),
                }
                bins.entry(key).or_insert_with(|| vec![0; ORIENTATION_BINS])[orientation_bin(r.theta)] += 1;
            }
        }
    }
    let mut rel_pos = BTreeMap::new();
    for (key, points) in planar {
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let bandwidth = [kde::scott_bandwidth(&xs, 2), kde::scott_bandwidth(&ys, 2)];
        let n_obs = points.len() as u64;
        rel_pos.insert(key.clone(), RelPosKde { key, samples: RelSamples::Planar { points, bandwidth }, n_obs });
    }
    for (key, distances) in radial {
        if rel_pos.contains_key(&key) {
            log::warn!("mixed planar and radial samples for {key:?}; keeping planar");
            continue;
        }
        let bandwidth = kde::scott_bandwidth(&distances, 1);
        let n_obs = distances.len() as u64;
        rel_pos.insert(key.clone(), RelPosKde { key, samples: RelSamples::Radial { distances, bandwidth }, n_obs });
    }
    let rel_orient = bins
        .into_iter()
        .map(|(key, counts)| {
            let n_obs: u64 = counts.iter().sum();
            let denom = n_obs as f64 + ORIENTATION_BINS as f64 * SMOOTHING_EPSILON;
            let bins = counts.iter().map(|c| (*c as f64 + SMOOTHING_EPSILON) / denom).collect();
            (key.clone(), WrappedHistogram { key, counts, bins, n_obs })
        })
        .collect();

    let mut categories: BTreeSet<&str> = models.categories().into_keys().collect();
    categories.extend(taxonomy.parent.keys().map(String::as_str));
    let frontless = categories
        .iter()
        .filter(|c| !taxonomy.has_front(c, models))
        .map(|c| c.to_string())
        .collect();
    let shapes = models
        .categories()
        .into_keys()
        .filter_map(|c| models.representative(c).map(|m| (c.to_string(), m.shape_class())))
        .collect();

    Ok(PriorsDb {
        backoff_threshold: BACKOFF_THRESHOLD,
        smoothing_epsilon: SMOOTHING_EPSILON,
        taxonomy: taxonomy.clone(),
        frontless,
        shapes,
        support_counts,
        count_hists,
        support_cats,
        face_cats,
        rel_pos,
        rel_orient,
    })
}

impl PriorsDb {
    pub fn taxonomy(&self) -> &CategoryTaxonomy {
        &self.taxonomy
    }

    /// Whether `category` was treated as having a semantic front while learning.
    pub fn has_front(&self, category: &str) -> bool {
        !self.frontless.contains(category)
    }

    pub fn shape_of(&self, category: &str) -> Option<ShapeClass> {
        self.shapes.get(category).copied()
    }

    pub fn count_histograms(&self) -> impl Iterator<Item = &CountHistogram> {
        self.count_hists.values()
    }

    pub fn surface_categoricals(&self) -> impl Iterator<Item = &SurfaceCategorical> {
        self.support_cats.values()
    }

    pub fn face_categoricals(&self) -> impl Iterator<Item = &FaceCategorical> {
        self.face_cats.values()
    }

    pub fn rel_pos_entries(&self) -> impl Iterator<Item = &RelPosKde> {
        self.rel_pos.values()
    }

    pub fn rel_orient_entries(&self) -> impl Iterator<Item = &WrappedHistogram> {
        self.rel_orient.values()
    }

    pub fn count_histogram(&self, child: &str, parent: &str, scene_type: &str) -> Option<&CountHistogram> {
        self.count_hists.get(&(child.to_string(), parent.to_string(), scene_type.to_string()))
    }

    fn levels<'a>(&'a self, category: &'a str, scene_type: Option<&'a str>) -> Vec<(&'a str, Option<&'a str>)> {
        let cats = self.taxonomy.self_and_ancestors(category);
        match scene_type {
            None => cats.into_iter().map(|c| (c, None)).collect(),
            Some(s) => scene_pools(s)
                .into_iter()
                .flat_map(|s| cats.iter().map(move |c| (*c, Some(s))))
                .collect(),
        }
    }

    /// Support observations of `category` (descendants pooled) in `scene_type`.
    pub fn support_observations(&self, category: &str, scene_type: &str) -> u64 {
        self.support_counts
            .get(&(category.to_string(), scene_type.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Walks the ladder and returns the entry of the first level whose
    /// category has at least `backoff_threshold` support observations in that
    /// scene pool, else of the most specific level with any. The entry itself
    /// may be missing: a well-observed category never seen in this context.
    fn resolve<'a, T>(&'a self, category: &str, scene_type: Option<&str>, get: impl Fn(&str, Option<&str>) -> Option<&'a T>) -> (Option<&'a T>, Lookup) {
        let mut lookup = Lookup::default();
        let mut sparse: Option<(BackoffLevel, u64)> = None;
        for (cat, scene) in self.levels(category, scene_type) {
            let level = BackoffLevel {
                category: cat.to_string(),
                scene_type: scene.map(str::to_string),
            };
            lookup.consulted.push(level.clone());
            let n = self.support_observations(cat, scene.unwrap_or(ANY_SCENE));
            if n >= self.backoff_threshold {
                lookup.resolved = Some(level);
                lookup.n_obs = n;
                return (get(cat, scene), lookup);
            }
            if n > 0 && sparse.is_none() {
                sparse = Some((level, n));
            }
        }
        match sparse {
            Some((level, n)) => {
                let entry = get(&level.category, level.scene_type.as_deref());
                lookup.n_obs = n;
                lookup.resolved = Some(level);
                lookup.sparse = true;
                (entry, lookup)
            }
            None => (None, lookup),
        }
    }

    /// `P(|C on p in s| > k)`, or the smoothing epsilon when nothing resolves.
    pub fn occurrence_probability(&self, category: &str, parent_category: &str, scene_type: &str, k: u32) -> f64 {
        self.occurrence_trace(category, parent_category, scene_type, k).0
    }

    pub fn occurrence_trace(&self, category: &str, parent_category: &str, scene_type: &str, k: u32) -> (f64, Lookup) {
        let (entry, lookup) = self.resolve(
            category,
            Some(scene_type),
            |c, s| self.count_histogram(c, parent_category, s.unwrap_or(ANY_SCENE)),
        );
        match entry {
            Some(h) => (h.tail(k), lookup),
            None => (self.smoothing_epsilon, lookup),
        }
    }

    /// `P_surf_sup(t | C)`.
    pub fn support_surface_probability(&self, t: SurfaceType, category: &str) -> f64 {
        self.support_surface_trace(t, category).0
    }

    pub fn support_surface_trace(&self, t: SurfaceType, category: &str) -> (f64, Lookup) {
        let (entry, lookup) = self.resolve(category, None, |c, _| self.support_cats.get(c));
        match entry {
            Some(e) => (e.probs.get(&t).copied().unwrap_or(0.0), lookup),
            None => (fallback_surface_probability(t), lookup),
        }
    }

    /// `P_surf_att(f | C, t)`.
    pub fn attachment_face_probability(&self, face: AttachmentFace, category: &str, t: SurfaceType) -> f64 {
        self.attachment_face_trace(face, category, t).0
    }

    pub fn attachment_face_trace(&self, face: AttachmentFace, category: &str, t: SurfaceType) -> (f64, Lookup) {
        let (entry, lookup) = self.resolve(
            category,
            None,
            |c, _| self.face_cats.get(&(c.to_string(), t)),
        );
        match entry {
            Some(e) => (e.probs.get(&face).copied().unwrap_or(0.0), lookup),
            None => {
                let shape = self.shape_of(category).unwrap_or(ShapeClass::Blocky);
                let p = if fallback_face(shape, t) == face { 1.0 } else { 0.0 };
                (p, lookup)
            }
        }
    }

    fn resolve_rel<'a, T>(&'a self, key: &RelKey, map: &'a BTreeMap<RelKey, T>) -> (Option<&'a T>, Lookup) {
        self.resolve(&key.obj_category, Some(&key.scene_type), |c, s| {
            map.get(&key.with(c, s.unwrap_or(ANY_SCENE)))
        })
    }

    /// Positional factor of `P_relpos`: KDE density at `offset`.
    pub fn relpos_density(&self, offset: &RelOffset, key: &RelKey) -> f64 {
        self.relpos_trace(offset, key).0
    }

    pub fn relpos_trace(&self, offset: &RelOffset, key: &RelKey) -> (f64, Lookup) {
        let (entry, lookup) = self.resolve_rel(key, &self.rel_pos);
        let density = entry.and_then(|e| e.density(offset)).unwrap_or(self.smoothing_epsilon);
        (density, lookup)
    }

    /// Orientation factor of `P_relpos`: mass of the 10° bin holding `theta`.
    /// Unresolved keys are uniform.
    pub fn relorient_probability(&self, theta: f64, key: &RelKey) -> f64 {
        self.relorient_trace(theta, key).0
    }

    pub fn relorient_trace(&self, theta: f64, key: &RelKey) -> (f64, Lookup) {
        let (entry, lookup) = self.resolve_rel(key, &self.rel_orient);
        match entry {
            Some(h) => (h.bins[orientation_bin(theta)], lookup),
            None => (1.0 / ORIENTATION_BINS as f64, lookup),
        }
    }

    /// Resolved orientation histogram for `key`, if any.
    pub fn relorient_histogram(&self, key: &RelKey) -> Option<&WrappedHistogram> {
        self.resolve_rel(key, &self.rel_orient).0
    }

    /// Resolved relative-position entry for `key`, if any.
    pub fn relpos_entry(&self, key: &RelKey) -> Option<&RelPosKde> {
        self.resolve_rel(key, &self.rel_pos).0
    }

    pub fn to_json(&self) -> String {
        let file = PriorsFile {
            format_version: FORMAT_VERSION,
            backoff_threshold: self.backoff_threshold,
            smoothing_epsilon: self.smoothing_epsilon,
            taxonomy: self.taxonomy.clone(),
            frontless_categories: self.frontless.clone(),
            category_shapes: self.shapes.clone(),
            support_counts: self
                .support_counts
                .iter()
                .map(|((category, scene_type), n)| SupportCount {
                    category: category.clone(),
                    scene_type: scene_type.clone(),
                    n_obs: *n,
                })
                .collect(),
            count_hists: self.count_hists.values().cloned().collect(),
            support_cats: self.support_cats.values().cloned().collect(),
            face_cats: self.face_cats.values().cloned().collect(),
            rel_pos: self.rel_pos.values().cloned().collect(),
            rel_orient: self.rel_orient.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("priors serialize")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let corrupt = |message: String| Error::Corrupt { path: path.to_path_buf(), message };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        check_format_version(&value, path)?;
        let file: PriorsFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        file.taxonomy.validate().map_err(|e| corrupt(e.to_string()))?;
        for h in &file.rel_orient {
            if h.bins.len() != ORIENTATION_BINS || h.counts.len() != ORIENTATION_BINS {
                return Err(corrupt(format!("orientation histogram {:?} must have {ORIENTATION_BINS} bins", h.key)));
            }
        }
        for e in &file.rel_pos {
            let ok = match &e.samples {
                RelSamples::Planar { points, bandwidth } => !points.is_empty() && bandwidth.iter().all(|b| *b > 0.0),
                RelSamples::Radial { distances, bandwidth } => !distances.is_empty() && *bandwidth > 0.0,
            };
            if !ok {
                return Err(corrupt(format!("position entry {:?} needs samples and positive bandwidths", e.key)));
            }
        }
        Ok(PriorsDb {
            backoff_threshold: file.backoff_threshold,
            smoothing_epsilon: file.smoothing_epsilon,
            taxonomy: file.taxonomy,
            frontless: file.frontless_categories,
            shapes: file.category_shapes,
            support_counts: file
                .support_counts
                .into_iter()
                .map(|c| ((c.category, c.scene_type), c.n_obs))
                .collect(),
            count_hists: file
                .count_hists
                .into_iter()
                .map(|h| ((h.child_category.clone(), h.parent_category.clone(), h.scene_type.clone()), h))
                .collect(),
            support_cats: file.support_cats.into_iter().map(|c| (c.category.clone(), c)).collect(),
            face_cats: file.face_cats.into_iter().map(|c| ((c.category.clone(), c.surface), c)).collect(),
            rel_pos: file.rel_pos.into_iter().map(|e| (e.key.clone(), e)).collect(),
            rel_orient: file.rel_orient.into_iter().map(|e| (e.key.clone(), e)).collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PriorsFile {
    format_version: u32,
    backoff_threshold: u64,
    smoothing_epsilon: f64,
    taxonomy: CategoryTaxonomy,
    frontless_categories: BTreeSet<String>,
    category_shapes: BTreeMap<String, ShapeClass>,
    support_counts: Vec<SupportCount>,
    count_hists: Vec<CountHistogram>,
    support_cats: Vec<SurfaceCategorical>,
    face_cats: Vec<FaceCategorical>,
    rel_pos: Vec<RelPosKde>,
    rel_orient: Vec<WrappedHistogram>,
}

pub fn save_priors(db: &PriorsDb, path: &Path) -> Result<()> {
    std::fs::write(path, db.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_priors(path: &Path) -> Result<PriorsDb> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PriorsDb::from_json(&text, path)
}

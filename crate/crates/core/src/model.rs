//! Model metadata and the model database.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_unit, vec3, Vec3, UNIT_TOLERANCE};
use crate::surface::AttachmentFace;
use crate::FORMAT_VERSION;

/// Coarse shape classes used when no attachment observations exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Blocky,
    Flat,
    Thin,
}

pub const THIN_RATIO: f64 = 0.05;
pub const FLAT_RATIO: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelMetadata {
    pub model_id: String,
    pub category: String,
    /// Semantic up, model-local.
    pub up: [f64; 3],
    /// Semantic front, model-local, orthogonal to `up`.
    pub front: [f64; 3],
    /// Bounding box extents along the model-local axes, in meters.
    pub bbox_dims: [f64; 3],
    #[serde(default = "default_true")]
    pub has_semantic_front: bool,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub description: String,
}

fn default_true() -> bool {
    true
}

impl ModelMetadata {
    /// Axis-aligned model with up = +Z and front = +Y.
    pub fn new(model_id: &str, category: &str, bbox_dims: [f64; 3]) -> Self {
        Self {
            model_id: model_id.to_string(),
            category: category.to_string(),
            up: [0.0, 0.0, 1.0],
            front: [0.0, 1.0, 0.0],
            bbox_dims,
            has_semantic_front: true,
            name: model_id.to_string(),
            tags: Vec::new(),
            description: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let up = vec3(self.up);
        let front = vec3(self.front);
        if !is_unit(&up) || !is_unit(&front) {
            return Err(Error::InvalidInput(format!(
                "model {}: up and front must be unit vectors",
                self.model_id
            )));
        }
        if up.dot(&front).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "model {}: up and front must be orthogonal",
                self.model_id
            )));
        }
        if self.bbox_dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "model {}: bbox dims must be positive, got {:?}",
                self.model_id, self.bbox_dims
            )));
        }
        if self.category.is_empty() {
            return Err(Error::InvalidInput(format!(
                "model {}: empty category",
                self.model_id
            )));
        }
        Ok(())
    }

    pub fn up(&self) -> Vec3 {
        vec3(self.up)
    }

    pub fn front(&self) -> Vec3 {
        vec3(self.front)
    }

    pub fn half_extents(&self) -> Vec3 {
        vec3(self.bbox_dims) * 0.5
    }

    /// Rotation taking model-local coordinates to the semantic frame
    /// (right = +X, front = +Y, up = +Z).
    pub fn semantic_basis(&self) -> Matrix3<f64> {
        let up = self.up();
        let front = self.front();
        let right = front.cross(&up);
        Matrix3::from_rows(&[right.transpose(), front.transpose(), up.transpose()])
    }

    /// Half-extent of the local bounding box along a semantic-frame direction.
    pub fn semantic_half_extent(&self, dir: &Vec3) -> f64 {
        let local = self.semantic_basis().transpose() * dir;
        let h = self.half_extents();
        local.x.abs() * h.x + local.y.abs() * h.y + local.z.abs() * h.z
    }

    /// Classifies the bounding box as blocky, flat or thin (rod-like).
    pub fn shape_class(&self) -> ShapeClass {
        let mut d = self.bbox_dims;
        d.sort_by(f64::total_cmp);
        let (small, mid, large) = (d[0], d[1], d[2]);
        // Rod-like: a tiny cross-section and no second large axis.
        if small / large < THIN_RATIO && mid / large < FLAT_RATIO {
            ShapeClass::Thin
        } else if small / large < FLAT_RATIO {
            ShapeClass::Flat
        } else {
            ShapeClass::Blocky
        }
    }

    /// Semantic face whose outward normal is the given model-local direction.
    pub fn face_for_local_normal(&self, local_normal: &Vec3) -> AttachmentFace {
        AttachmentFace::nearest(&(self.semantic_basis() * local_normal))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ModelDbFile {
    format_version: u32,
    models: Vec<ModelMetadata>,
}

/// All known models, keyed by model id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelDb {
    models: BTreeMap<String, ModelMetadata>,
}

impl ModelDb {
    pub fn new(models: impl IntoIterator<Item = ModelMetadata>) -> Result<Self> {
        let mut db = ModelDb::default();
        for m in models {
            m.validate()?;
            if db.models.contains_key(&m.model_id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate model id {}",
                    m.model_id
                )));
            }
            db.models.insert(m.model_id.clone(), m);
        }
        Ok(db)
    }

    pub fn get(&self, model_id: &str) -> Option<&ModelMetadata> {
        self.models.get(model_id)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModelMetadata> {
        self.models.values()
    }

    /// Category -> member model ids, both sorted.
    pub fn categories(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for m in self.models.values() {
            out.entry(m.category.as_str())
                .or_default()
                .push(m.model_id.as_str());
        }
        out
    }

    /// First model (by id) of a category.
    pub fn representative(&self, category: &str) -> Option<&ModelMetadata> {
        self.models.values().find(|m| m.category == category)
    }

    pub fn category_of(&self, model_id: &str) -> Option<&str> {
        self.get(model_id).map(|m| m.category.as_str())
    }

    pub fn to_json(&self) -> String {
        let file = ModelDbFile {
            format_version: FORMAT_VERSION,
            models: self.models.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("model db serializes")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
        check_format_version(&value, path)?;
        let file: ModelDbFile = serde_json::from_value(value).map_err(|e| Error::parse(path, e))?;
        ModelDb::new(file.models).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn check_format_version(value: &serde_json::Value, path: &Path) -> Result<()> {
    let found = value.get("formatVersion").and_then(|v| v.as_u64());
    if found != Some(FORMAT_VERSION as u64) {
        return Err(Error::FormatVersion {
            path: path.to_path_buf(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_classes() {
        assert_eq!(
            ModelMetadata::new("box", "cardboard_box", [0.3, 0.2, 0.25]).shape_class(),
            ShapeClass::Blocky
        );
        assert_eq!(
            ModelMetadata::new("poster", "poster", [0.6, 0.01, 0.9]).shape_class(),
            ShapeClass::Flat
        );
        assert_eq!(
            ModelMetadata::new("pen", "pen", [0.006, 0.15, 0.006]).shape_class(),
            ShapeClass::Thin
        );
    }

    #[test]
    fn semantic_basis_maps_up_and_front() {
        let mut m = ModelMetadata::new("m", "c", [1.0, 2.0, 3.0]);
        m.up = [0.0, 1.0, 0.0];
        m.front = [-1.0, 0.0, 0.0];
        let b = m.semantic_basis();
        assert!((b * m.up() - Vec3::z()).norm() < 1e-12);
        assert!((b * m.front() - Vec3::y()).norm() < 1e-12);
        assert!((m.semantic_half_extent(&Vec3::z()) - 1.0).abs() < 1e-12);
        assert!((m.semantic_half_extent(&Vec3::y()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_metadata() {
        assert!(ModelMetadata::new("m", "c", [0.0, 1.0, 1.0]).validate().is_err());
        let mut m = ModelMetadata::new("m", "c", [1.0, 1.0, 1.0]);
        m.front = [0.0, 0.0, 1.0];
        assert!(m.validate().is_err());
    }

    #[test]
    fn json_requires_version() {
        let err = ModelDb::from_json(r#"{"models": []}"#, Path::new("models.json")).unwrap_err();
        assert!(matches!(err, Error::FormatVersion { found: None, .. }));
        let db = ModelDb::new([ModelMetadata::new("a", "chair", [0.5, 0.5, 1.0])]).unwrap();
        let back = ModelDb::from_json(&db.to_json(), Path::new("m.json")).unwrap();
        assert_eq!(db, back);
    }
}

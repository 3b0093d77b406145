use crate::error::{Error, Result};
use crate::geometry::{BoxFace, OrientedBox, Vec3};
use crate::model::ModelDb;
use crate::scene::ModelInstance;
use crate::surface::{featurize_surface, AttachmentFace, Interiority, NormalClass, SurfaceType};

/// Contact distance (meters) between a child face midpoint and a parent surface.
pub const PROXIMITY_THRESHOLD: f64 = 0.05;

/// Child face and parent surface must face each other at least this much.
const FACING_COS: f64 = 0.5;

/// One candidate support surface of a parent object.
#[derive(Clone, Copy, Debug)]
pub struct SupportSurface {
    pub face: BoxFace,
    /// Unit normal pointing away from the surface toward where children sit:
    /// outward for ordinary objects, inward for architecture.
    pub normal: Vec3,
    pub surface_type: SurfaceType,
}

/// The six bounding-box faces of `parent` as support surfaces.
pub fn support_surfaces(parent: &ModelInstance, models: &ModelDb) -> Option<Vec<SupportSurface>> {
    let meta = models.get(&parent.model_id)?;
    let bbox = OrientedBox::new(parent.transform, meta.half_extents());
    Some(
        bbox.faces()
            .into_iter()
            .map(|face| {
                let normal = if parent.is_architecture { -face.normal } else { face.normal };
                SupportSurface {
                    face,
                    normal,
                    surface_type: featurize_surface(&normal, parent.is_architecture)
                        .expect("face normals are unit"),
                }
            })
            .collect(),
    )
}

/// Result of matching a supported child against its parent's surfaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportContact {
    pub surface_type: SurfaceType,
    pub face: AttachmentFace,
    /// World normal of the parent surface at the contact (up for the fallback).
    pub normal: Vec3,
    /// Face-midpoint to surface distance; infinite for the fallback.
    pub distance: f64,
    /// No child face came within the proximity threshold of a parent surface.
    pub low_confidence: bool,
}

/// Finds the child attachment face and parent support surface of a support edge.
///
/// Every child bounding-box face midpoint is tested against every parent
/// surface facing it; the closest pair within [`PROXIMITY_THRESHOLD`] wins.
/// Without a qualifying pair the child is assumed to sit on its bottom on an
/// upward surface, flagged as low confidence.
pub fn identify_support_surface(child: &ModelInstance, parent: &ModelInstance, models: &ModelDb) -> Result<SupportContact> {
    let child_meta = models.get(&child.model_id).ok_or_else(|| {
        Error::InvalidInput(format!("object {} has unknown model {}", child.id, child.model_id))
    })?;
    let surfaces = support_surfaces(parent, models).ok_or_else(|| {
        Error::InvalidInput(format!("object {} has unknown model {}", parent.id, parent.model_id))
    })?;
    let child_box = OrientedBox::new(child.transform, child_meta.half_extents());

    let mut best: Option<(f64, usize, &SupportSurface, &BoxFace)> = None;
    let child_faces = child_box.faces();
    for child_face in &child_faces {
        let face = child_meta.face_for_local_normal(&child_face.local_normal);
        let rank = AttachmentFace::TIE_ORDER.iter().position(|f| *f == face).unwrap_or(0);
        for surface in &surfaces {
            if child_face.normal.dot(&surface.normal) > -FACING_COS {
                continue;
            }
            let dist = surface.face.distance_to(&child_face.center);
            if dist > PROXIMITY_THRESHOLD {
                continue;
            }
            let better = match best {
                None => true,
                Some((d, r, _, _)) => dist < d - 1e-12 || ((dist - d).abs() <= 1e-12 && rank < r),
            };
            if better {
                best = Some((dist, rank, surface, child_face));
            }
        }
    }

    Ok(match best {
        Some((distance, _, surface, child_face)) => SupportContact {
            surface_type: surface.surface_type,
            face: child_meta.face_for_local_normal(&child_face.local_normal),
            normal: surface.normal,
            distance,
            low_confidence: false,
        },
        None => SupportContact {
            surface_type: SurfaceType::new(
                NormalClass::Up,
                if parent.is_architecture { Interiority::Interior } else { Interiority::Exterior },
            ),
            face: AttachmentFace::Bottom,
            normal: Vec3::z(),
            distance: f64::INFINITY,
            low_confidence: true,
        },
    })
}

/// The parent surface containing `point` (within `tolerance`), nearest first.
pub fn locate_surface(parent: &ModelInstance, models: &ModelDb, point: &Vec3, tolerance: f64) -> Option<SupportSurface> {
    support_surfaces(parent, models)?
        .into_iter()
        .map(|s| (s.face.distance_to(point), s))
        .filter(|(d, _)| *d <= tolerance)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
}

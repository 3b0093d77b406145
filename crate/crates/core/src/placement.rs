//! Composing placements on support surfaces and measuring relative poses.

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{axis_angle, project_onto_plane, world_up, wrap_angle, Transform, Vec3};
use crate::model::ModelMetadata;
use crate::surface::{classify_normal, AttachmentFace, NormalClass};

/// Rotation taking the canonical face normal to `-surface_normal`, before spin.
///
/// Antiparallel cases flip about a fixed axis so the result is deterministic:
/// up/down faces flip about X, side faces about Z (keeping the model upright).
fn attach_rotation(face: AttachmentFace, surface_normal: &Vec3) -> Matrix3<f64> {
    let from = face.canonical_normal();
    let to = -surface_normal;
    match Rotation3::rotation_between(&from, &to) {
        Some(r) if from.dot(&to) > -1.0 + 1e-9 => r.into_inner(),
        _ => {
            let axis = if from.z.abs() > 0.5 { Vec3::x() } else { Vec3::z() };
            axis_angle(&axis, std::f64::consts::PI)
        }
    }
}

/// World transform that attaches `meta`'s face `face` to a support surface.
///
/// The face's outward normal points along `-surface_normal`, the model is
/// spun by `alpha` about `surface_normal`, and the center of the face lands on
/// `anchor`. Model size is taken from the metadata unchanged.
pub fn compose_placement(
    anchor: &Vec3,
    surface_normal: &Vec3,
    face: AttachmentFace,
    alpha: f64,
    meta: &ModelMetadata,
) -> Result<Transform> {
    meta.validate()?;
    let n_len = surface_normal.norm();
    if !(n_len.is_finite() && n_len > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput("placement needs a finite surface normal and angle".into()));
    }
    let n = surface_normal / n_len;
    let rotation = axis_angle(&n, alpha) * attach_rotation(face, &n);
    let linear = rotation * meta.semantic_basis();
    let face_dir = face.canonical_normal();
    let face_center = rotation * (face_dir * meta.semantic_half_extent(&face_dir));
    Transform::from_parts(&linear, &(anchor - face_center))
}

/// Center of face `face` of a placed instance, in world space: the anchor
/// `compose_placement` would have been given.
pub fn attachment_anchor(transform: &Transform, meta: &ModelMetadata, face: AttachmentFace) -> Vec3 {
    let rotation = transform.linear() * meta.semantic_basis().transpose();
    let face_dir = face.canonical_normal();
    transform.translation() + rotation * (face_dir * meta.semantic_half_extent(&face_dir))
}

/// Spin angle in `[0, 2π)` such that `compose_placement` with `face` and
/// `surface_normal` reproduces the rotation of `transform`.
pub fn recover_spin(transform: &Transform, meta: &ModelMetadata, face: AttachmentFace, surface_normal: &Vec3) -> Result<f64> {
    let n = surface_normal
        .try_normalize(1e-12)
        .ok_or_else(|| Error::InvalidInput("surface normal must be non-zero".into()))?;
    let base = compose_placement(&Vec3::zeros(), &n, face, 0.0, meta)?;
    let spin = transform.linear() * base.linear().transpose();
    let u = any_perpendicular(&n);
    let v = spin * u;
    Ok(wrap_angle(n.dot(&u.cross(&v)).atan2(u.dot(&v))))
}

/// Semantic front and up of a placed instance, in world space.
pub fn world_axes(transform: &Transform, meta: &ModelMetadata) -> (Vec3, Vec3) {
    let lin = transform.linear();
    ((lin * meta.front()).normalize(), (lin * meta.up()).normalize())
}

/// In-plane heading of a placed object: its front projected onto the support
/// plane, or its up when the front points (mostly) along the normal, as for
/// wall-mounted posters and clocks.
pub fn heading(transform: &Transform, meta: &ModelMetadata, normal: &Vec3) -> Vec3 {
    let (front, up) = world_axes(transform, meta);
    let f = project_onto_plane(&front, normal);
    if f.norm() >= 0.5 {
        return f.normalize();
    }
    let u = project_onto_plane(&up, normal);
    if u.norm() > 1e-9 {
        u.normalize()
    } else {
        f.try_normalize(1e-12).unwrap_or_else(|| any_perpendicular(normal))
    }
}

fn any_perpendicular(n: &Vec3) -> Vec3 {
    let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    project_onto_plane(&seed, n).normalize()
}

/// Orthonormal 2D frame on a support plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFrame {
    pub normal: Vec3,
    pub x: Vec3,
    pub y: Vec3,
}

impl PlaneFrame {
    /// Frame with `+Y` along `y_hint` projected into the plane, `+X = Y × n`.
    pub fn new(normal: &Vec3, y_hint: &Vec3) -> Self {
        let normal = normal.normalize();
        let y = project_onto_plane(y_hint, &normal)
            .try_normalize(1e-9)
            .unwrap_or_else(|| any_perpendicular(&normal));
        PlaneFrame {
            normal,
            x: y.cross(&normal),
            y,
        }
    }

    /// In-plane coordinates of a world offset.
    pub fn coords(&self, v: &Vec3) -> [f64; 2] {
        [v.dot(&self.x), v.dot(&self.y)]
    }

    /// Counter-clockwise angle (about the normal) from `+Y` to `dir`, in `[0, 2π)`.
    pub fn angle_of(&self, dir: &Vec3) -> f64 {
        wrap_angle((-dir.dot(&self.x)).atan2(dir.dot(&self.y)))
    }
}

/// Delta frame of a reference object on a support plane.
///
/// On up/down facing planes `+Y` is the reference's front projected onto the
/// plane. On wall-like planes `+Y` is world up, so offsets read as
/// (along-wall, height).
pub fn reference_frame(support_normal: &Vec3, ref_transform: &Transform, ref_meta: &ModelMetadata) -> PlaneFrame {
    let n = support_normal.normalize();
    match classify_normal(&n) {
        NormalClass::Horizontal => PlaneFrame::new(&n, &world_up()),
        NormalClass::Up | NormalClass::Down => {
            let (front, up) = world_axes(ref_transform, ref_meta);
            let hint = if project_onto_plane(&front, &n).norm() > 1e-6 { front } else { up };
            PlaneFrame::new(&n, &hint)
        }
    }
}

/// Relative position of an object with respect to a reference object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelOffset {
    /// `(x, y)` in the reference's delta frame, meters.
    Planar([f64; 2]),
    /// Distance from the reference centroid in the plane, for references
    /// without a semantic front.
    Radial(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativePose {
    pub offset: RelOffset,
    /// Heading of the object relative to the reference frame, in `[0, 2π)`.
    pub theta: f64,
}

/// A placed object: transform plus its metadata.
#[derive(Clone, Copy, Debug)]
pub struct Placed<'a> {
    pub transform: &'a Transform,
    pub meta: &'a ModelMetadata,
}

/// Relative pose of `obj` with respect to `reference`, measured on the
/// support plane of `obj` (normal `support_normal`).
///
/// Both centroids are projected onto the plane. For references without a
/// semantic front the offset is radial and `theta` is measured from the
/// direction pointing from the reference toward the object.
pub fn relative_pose(obj: Placed<'_>, reference: Placed<'_>, support_normal: &Vec3, reference_has_front: bool) -> RelativePose {
    let n = support_normal.normalize();
    let delta = project_onto_plane(&(obj.transform.translation() - reference.transform.translation()), &n);
    let dir = heading(obj.transform, obj.meta, &n);
    if reference_has_front {
        let frame = reference_frame(&n, reference.transform, reference.meta);
        RelativePose {
            offset: RelOffset::Planar(frame.coords(&delta)),
            theta: frame.angle_of(&dir),
        }
    } else {
        let radius = delta.norm();
        let frame = if radius > 1e-9 {
            PlaneFrame::new(&n, &delta)
        } else {
            reference_frame(&n, reference.transform, reference.meta)
        };
        RelativePose {
            offset: RelOffset::Radial(radius),
            theta: frame.angle_of(&dir),
        }
    }
}

//! Ray picking against object bounding boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_array, vec3, OrientedBox, Vec3};
use crate::model::ModelDb;
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: [f64; 3],
    pub direction: [f64; 3],
}

impl Ray {
    /// Builds a ray, normalizing the direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) || !origin.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("ray needs a finite non-zero direction".into()));
        }
        Ok(Ray {
            origin: to_array(&origin),
            direction: to_array(&(direction / n)),
        })
    }

    pub fn origin(&self) -> Vec3 {
        vec3(self.origin)
    }

    pub fn direction(&self) -> Vec3 {
        vec3(self.direction)
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin() + self.direction() * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RayHit {
    pub point: [f64; 3],
    /// Unit surface normal facing the ray origin's side: outward for hits
    /// from outside a box, inward when the ray starts inside (room interiors).
    pub normal: [f64; 3],
    pub object_id: String,
    pub distance: f64,
}

/// Slab intersection of a ray with one oriented box.
///
/// Returns the distance along the (unit) ray and the world normal of the hit
/// face. A ray starting inside the box hits the exit face with an inward normal.
pub fn intersect_box(ray: &Ray, bbox: &OrientedBox) -> Option<(f64, Vec3)> {
    let inv = bbox.transform.inverse();
    let o = inv.transform_point(&ray.origin());
    let d = inv.transform_vector(&ray.direction());
    let h = bbox.half_extents;

    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut near_axis = 0;
    let mut far_axis = 0;
    for axis in 0..3 {
        if d[axis].abs() < 1e-15 {
            if o[axis].abs() > h[axis] {
                return None;
            }
            continue;
        }
        let t1 = (-h[axis] - o[axis]) / d[axis];
        let t2 = (h[axis] - o[axis]) / d[axis];
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        if lo > t_near {
            t_near = lo;
            near_axis = axis;
        }
        if hi < t_far {
            t_far = hi;
            far_axis = axis;
        }
    }
    if t_near > t_far || t_far < 0.0 {
        return None;
    }

    let mut local_normal = Vec3::zeros();
    if t_near >= 0.0 {
        local_normal[near_axis] = -d[near_axis].signum();
        Some((t_near, bbox.transform.transform_normal(&local_normal)))
    } else {
        // Inside: report the exit face, seen from within.
        local_normal[far_axis] = -d[far_axis].signum();
        Some((t_far, bbox.transform.transform_normal(&local_normal)))
    }
}

/// Nearest bounding-box hit in the scene, or `None` on a miss.
///
/// Equal distances prefer non-architecture objects, then the smaller id.
pub fn raycast_scene(ray: &Ray, scene: &Scene, models: &ModelDb) -> Option<RayHit> {
    let mut best: Option<(f64, bool, &str, Vec3)> = None;
    for obj in &scene.objects {
        let Some(meta) = models.get(&obj.model_id) else {
            continue;
        };
        let bbox = OrientedBox::new(obj.transform, meta.half_extents());
        let Some((t, normal)) = intersect_box(ray, &bbox) else {
            continue;
        };
        let candidate = (t, obj.is_architecture, obj.id.as_str(), normal);
        let better = match &best {
            None => true,
            Some(b) => hit_order(&candidate, b) == std::cmp::Ordering::Less,
        };
        if better {
            best = Some(candidate);
        }
    }
    best.map(|(t, _, id, normal)| RayHit {
        point: to_array(&ray.at(t)),
        normal: to_array(&normal),
        object_id: id.to_string(),
        distance: t,
    })
}

fn hit_order(a: &(f64, bool, &str, Vec3), b: &(f64, bool, &str, Vec3)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(b.2))
}

//! Homogeneous transforms and small vector helpers.

use nalgebra::{Matrix3, Matrix4, Rotation3, RowVector4, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance used when checking that a vector is unit length.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// World up axis.
pub fn world_up() -> Vec3 {
    Vec3::z()
}

pub fn is_unit(v: &Vec3) -> bool {
    (v.norm() - 1.0).abs() <= UNIT_TOLERANCE
}

pub fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

pub fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = theta.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}

/// Right-handed rotation by `angle` radians about `axis`.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner()
}

/// Removes the component of `v` along the unit vector `normal`.
pub fn project_onto_plane(v: &Vec3, normal: &Vec3) -> Vec3 {
    v - normal * v.dot(normal)
}

/// A 4×4 homogeneous transform stored column-major, as in the scene files.
///
/// The bottom row is exactly `(0, 0, 0, 1)` and the linear part has a
/// positive determinant (rotation times positive scale).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Transform([f64; 16]);

impl Transform {
    pub fn identity() -> Self {
        Self::from_matrix_unchecked(&Matrix4::identity())
    }

    pub fn from_column_major(m: [f64; 16]) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "transform contains non-finite entries".into(),
            ));
        }
        if m[3] != 0.0 || m[7] != 0.0 || m[11] != 0.0 || m[15] != 1.0 {
            return Err(Error::InvalidInput(format!(
                "transform bottom row must be (0,0,0,1), got ({}, {}, {}, {})",
                m[3], m[7], m[11], m[15]
            )));
        }
        let t = Transform(m);
        let det = t.linear().determinant();
        if det <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "transform linear part must have positive determinant, got {det}"
            )));
        }
        Ok(t)
    }

    /// Builds a transform from a linear part and a translation.
    pub fn from_parts(linear: &Matrix3<f64>, translation: &Vec3) -> Result<Self> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(linear);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
        let mut a = [0.0; 16];
        a.copy_from_slice(m.as_slice());
        Self::from_column_major(a)
    }

    /// Translation-only transform.
    pub fn from_translation(t: &Vec3) -> Self {
        Self::from_parts(&Matrix3::identity(), t).expect("translation is a valid transform")
    }

    fn from_matrix_unchecked(m: &Matrix4<f64>) -> Self {
        let mut a = [0.0; 16];
        a.copy_from_slice(m.as_slice());
        Transform(a)
    }

    pub fn as_array(&self) -> &[f64; 16] {
        &self.0
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_column_slice(&self.0)
    }

    pub fn linear(&self) -> Matrix3<f64> {
        self.matrix().fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::new(self.0[12], self.0[13], self.0[14])
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.linear() * p + self.translation()
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.linear() * v
    }

    /// Maps a local surface normal to a unit world normal (inverse transpose).
    pub fn transform_normal(&self, n: &Vec3) -> Vec3 {
        let inv = self
            .linear()
            .try_inverse()
            .expect("positive determinant implies invertible");
        (inv.transpose() * n).normalize()
    }

    pub fn inverse(&self) -> Transform {
        let inv = self
            .matrix()
            .try_inverse()
            .expect("positive determinant implies invertible");
        Self::from_matrix_unchecked(&inv)
    }

    /// `self * other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Transform) -> Transform {
        let mut m = self.matrix() * other.matrix();
        m.fixed_view_mut::<1, 4>(3, 0).copy_from(&RowVector4::new(0.0, 0.0, 0.0, 1.0));
        Self::from_matrix_unchecked(&m)
    }

    /// Largest absolute entry-wise difference to another transform.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Transform {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let arr: [f64; 16] = v.as_slice().try_into().map_err(|_| {
            Error::InvalidInput(format!("transform must have 16 numbers, got {}", v.len()))
        })?;
        Transform::from_column_major(arr)
    }
}

impl From<Transform> for Vec<f64> {
    fn from(t: Transform) -> Self {
        t.0.to_vec()
    }
}

/// One rectangular face of an oriented box, in world space.
#[derive(Clone, Copy, Debug)]
pub struct BoxFace {
    /// Model-local outward normal (a signed unit axis).
    pub local_normal: Vec3,
    pub center: Vec3,
    /// Unit outward normal in world space.
    pub normal: Vec3,
    /// In-plane half-axes spanning the face rectangle.
    pub half_u: Vec3,
    pub half_v: Vec3,
}

impl BoxFace {
    /// Distance from `p` to the closest point of the face rectangle.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let d = p - self.center;
        let mut closest = self.center;
        for half in [&self.half_u, &self.half_v] {
            let len2 = half.norm_squared();
            if len2 > 0.0 {
                let s = (d.dot(half) / len2).clamp(-1.0, 1.0);
                closest += half * s;
            }
        }
        (p - closest).norm()
    }
}

/// A model's bounding box placed in the world by an instance transform.
/// The local box is centered on the model origin.
#[derive(Clone, Copy, Debug)]
pub struct OrientedBox {
    pub transform: Transform,
    pub half_extents: Vec3,
}

impl OrientedBox {
    pub fn new(transform: Transform, half_extents: Vec3) -> Self {
        Self {
            transform,
            half_extents,
        }
    }

    pub fn center(&self) -> Vec3 {
        self.transform.translation()
    }

    /// The six faces in order +X, -X, +Y, -Y, +Z, -Z (model-local).
    pub fn faces(&self) -> [BoxFace; 6] {
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        std::array::from_fn(|k| {
            let axis = k / 2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let local_normal = axes[axis] * sign;
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            BoxFace {
                local_normal,
                center: self
                    .transform
                    .transform_point(&(local_normal * self.half_extents[axis])),
                normal: self.transform.transform_normal(&local_normal),
                half_u: self
                    .transform
                    .transform_vector(&(axes[u] * self.half_extents[u])),
                half_v: self
                    .transform
                    .transform_vector(&(axes[v] * self.half_extents[v])),
            }
        })
    }
}

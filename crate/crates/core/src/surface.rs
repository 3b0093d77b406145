//! Support-surface and attachment-face featurization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_unit, Vec3};

/// `|n_z|` above this is an up/down surface; otherwise the surface is
/// treated as a wall-like ("horizontal" normal) surface.
pub const VERTICAL_CONE_COS: f64 = 0.707;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalClass {
    Up,
    Down,
    Horizontal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interiority {
    Interior,
    Exterior,
}

/// Featurized parent support surface, e.g. a room floor is `up-interior`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SurfaceType {
    pub normal_class: NormalClass,
    pub interiority: Interiority,
}

impl SurfaceType {
    pub const fn new(normal_class: NormalClass, interiority: Interiority) -> Self {
        Self {
            normal_class,
            interiority,
        }
    }

    pub const FLOOR: SurfaceType = SurfaceType::new(NormalClass::Up, Interiority::Interior);
    pub const WALL: SurfaceType = SurfaceType::new(NormalClass::Horizontal, Interiority::Interior);
    pub const TOP: SurfaceType = SurfaceType::new(NormalClass::Up, Interiority::Exterior);

    pub fn all() -> [SurfaceType; 6] {
        use Interiority::*;
        use NormalClass::*;
        [
            SurfaceType::new(Up, Interior),
            SurfaceType::new(Up, Exterior),
            SurfaceType::new(Down, Interior),
            SurfaceType::new(Down, Exterior),
            SurfaceType::new(Horizontal, Interior),
            SurfaceType::new(Horizontal, Exterior),
        ]
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self.normal_class {
            NormalClass::Up => "up",
            NormalClass::Down => "down",
            NormalClass::Horizontal => "horizontal",
        };
        let i = match self.interiority {
            Interiority::Interior => "interior",
            Interiority::Exterior => "exterior",
        };
        write!(f, "{n}-{i}")
    }
}

impl FromStr for SurfaceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, i) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidInput(format!("bad surface type {s:?}")))?;
        let normal_class = match n {
            "up" => NormalClass::Up,
            "down" => NormalClass::Down,
            "horizontal" => NormalClass::Horizontal,
            _ => return Err(Error::InvalidInput(format!("bad surface normal class {n:?}"))),
        };
        let interiority = match i {
            "interior" => Interiority::Interior,
            "exterior" => Interiority::Exterior,
            _ => return Err(Error::InvalidInput(format!("bad surface interiority {i:?}"))),
        };
        Ok(SurfaceType::new(normal_class, interiority))
    }
}

impl TryFrom<String> for SurfaceType {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SurfaceType> for String {
    fn from(t: SurfaceType) -> Self {
        t.to_string()
    }
}

/// Side of a child's bounding box that touches its support surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachmentFace {
    Top,
    Bottom,
    Front,
    Back,
    Left,
    Right,
}

impl AttachmentFace {
    pub const ALL: [AttachmentFace; 6] = [
        AttachmentFace::Top,
        AttachmentFace::Bottom,
        AttachmentFace::Front,
        AttachmentFace::Back,
        AttachmentFace::Left,
        AttachmentFace::Right,
    ];

    /// Order used to break ties between equally likely faces.
    pub const TIE_ORDER: [AttachmentFace; 6] = [
        AttachmentFace::Bottom,
        AttachmentFace::Back,
        AttachmentFace::Left,
        AttachmentFace::Right,
        AttachmentFace::Front,
        AttachmentFace::Top,
    ];

    /// Outward face normal in the semantic frame (right = +X, front = +Y, up = +Z).
    pub fn canonical_normal(self) -> Vec3 {
        match self {
            AttachmentFace::Top => Vec3::new(0.0, 0.0, 1.0),
            AttachmentFace::Bottom => Vec3::new(0.0, 0.0, -1.0),
            AttachmentFace::Front => Vec3::new(0.0, 1.0, 0.0),
            AttachmentFace::Back => Vec3::new(0.0, -1.0, 0.0),
            AttachmentFace::Right => Vec3::new(1.0, 0.0, 0.0),
            AttachmentFace::Left => Vec3::new(-1.0, 0.0, 0.0),
        }
    }

    /// Face whose canonical normal is closest to `dir` (semantic frame).
    pub fn nearest(dir: &Vec3) -> AttachmentFace {
        let mut best = AttachmentFace::TIE_ORDER[0];
        let mut best_dot = f64::NEG_INFINITY;
        for face in AttachmentFace::TIE_ORDER {
            let d = face.canonical_normal().dot(dir);
            if d > best_dot + 1e-12 {
                best = face;
                best_dot = d;
            }
        }
        best
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttachmentFace::Top => "top",
            AttachmentFace::Bottom => "bottom",
            AttachmentFace::Front => "front",
            AttachmentFace::Back => "back",
            AttachmentFace::Left => "left",
            AttachmentFace::Right => "right",
        }
    }
}

impl fmt::Display for AttachmentFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttachmentFace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttachmentFace::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("bad attachment face {s:?}")))
    }
}

pub fn classify_normal(normal: &Vec3) -> NormalClass {
    if normal.z > VERTICAL_CONE_COS {
        NormalClass::Up
    } else if normal.z < -VERTICAL_CONE_COS {
        NormalClass::Down
    } else {
        NormalClass::Horizontal
    }
}

/// Featurizes a world-space surface normal of a support surface.
///
/// Architecture (room) surfaces are interior, everything else exterior.
pub fn featurize_surface(normal: &Vec3, owner_is_architecture: bool) -> Result<SurfaceType> {
    if !is_unit(normal) {
        return Err(Error::InvalidInput(format!(
            "surface normal must be unit length, |n| = {}",
            normal.norm()
        )));
    }
    let interiority = if owner_is_architecture {
        Interiority::Interior
    } else {
        Interiority::Exterior
    };
    Ok(SurfaceType::new(classify_normal(normal), interiority))
}

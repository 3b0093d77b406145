//! Context-driven 3D scene suggestion engine.
//!
//! Scenes are trees of model instances linked by static-support edges. From a
//! corpus of such scenes we extract support, attachment, count and relative
//! placement observations, learn categorical and kernel-density priors from
//! them, and answer point queries on a support surface with a ranked list of
//! categories, each carrying an automatically oriented placement.
//!
//! Coordinate conventions: world up is `+Z`; every model's local bounding box
//! is centered on the local origin, and a model's semantic `up`/`front` map to
//! `+Z`/`+Y` once placed with a zero spin angle on a floor.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod model;
pub mod placement;
pub mod priors;
pub mod raycast;
pub mod scene;
pub mod suggest;
pub mod surface;
pub mod taxonomy;

pub use error::{Error, Result};
pub use geometry::Transform;
pub use model::{ModelDb, ModelMetadata, ShapeClass};
pub use scene::{ModelInstance, Scene, SupportViolation};
pub use surface::{AttachmentFace, Interiority, NormalClass, SurfaceType};
pub use taxonomy::CategoryTaxonomy;

/// Version tag written into (and required from) every JSON file this crate reads.
pub const FORMAT_VERSION: u32 = 1;

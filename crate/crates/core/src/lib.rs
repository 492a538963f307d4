//! Territory design for dynamic multi-period vehicle routing with time windows.

pub mod exact;
pub mod generators;
pub mod geometry;
pub mod model;
pub mod routing;
pub mod scalar;
pub mod solver;

pub use model::{Instance, Solution};
pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type BoundingBox = geometry::BoundingBox<f64>;
pub type Geometry = geometry::GeometryTable<f64>;
pub type UnitGeometry = geometry::BasicUnitGeometry<f64>;

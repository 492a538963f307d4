//! Planar geometry of basic units.
//!
//! Every customer (and the depot) owns a convex cell of a clipped Voronoi
//! tessellation. The [`GeometryTable`] caches per-cell area, perimeter and the
//! shared boundary length with each neighbouring cell; territory-level
//! quantities (perimeter of a union, compactness ratio, contiguity) are derived
//! from these aggregates.

mod geojson;
mod polygon;
mod table;
mod voronoi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use self::geojson::{table_from_geojson, table_to_geojson};
pub use self::polygon::{is_convex_ccw, polygon_area, polygon_perimeter, regular_polygon};
pub use self::table::{BasicUnitGeometry, GeometryTable, ShapeStats};
pub use self::voronoi::build_voronoi;

/// A point in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Axis-aligned rectangle used to close the outer Voronoi cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox<T> {
    pub min_x: T,
    pub min_y: T,
    pub max_x: T,
    pub max_y: T,
}

impl<T: Real> BoundingBox<T> {
    pub fn new(min_x: T, min_y: T, max_x: T, max_y: T) -> Self {
        BoundingBox { min_x, min_y, max_x, max_y }
    }

    /// Hull of `points` inflated by `margin` (a fraction of the extent) per side.
    ///
    /// A degenerate axis (all points share that coordinate) borrows the other
    /// axis' extent, or 1 when every point coincides.
    pub fn around(points: &[Point<T>], margin: T) -> Option<Self> {
        let first = points.first()?;
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (first.x, first.x, first.y, first.y);
        for p in points {
            lo_x = lo_x.min(p.x);
            hi_x = hi_x.max(p.x);
            lo_y = lo_y.min(p.y);
            hi_y = hi_y.max(p.y);
        }
        let (mut wx, mut wy) = (hi_x - lo_x, hi_y - lo_y);
        let fallback = if wx > T::zero() || wy > T::zero() { wx.max(wy) } else { T::one() };
        if wx <= T::zero() {
            wx = fallback;
        }
        if wy <= T::zero() {
            wy = fallback;
        }
        Some(BoundingBox {
            min_x: lo_x - margin * wx,
            min_y: lo_y - margin * wy,
            max_x: hi_x + margin * wx,
            max_y: hi_y + margin * wy,
        })
    }

    pub fn width(&self) -> T {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> T {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn strictly_contains(&self, p: Point<T>) -> bool {
        p.x > self.min_x && p.x < self.max_x && p.y > self.min_y && p.y < self.max_y
    }

    /// Counter-clockwise corner list.
    pub fn corners(&self) -> [Point<T>; 4] {
        [
            Point::new(self.min_x, self.min_y),
            Point::new(self.max_x, self.min_y),
            Point::new(self.max_x, self.max_y),
            Point::new(self.min_x, self.max_y),
        ]
    }
}

/// Denominator used by the compactness ratio.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompactnessMode {
    /// perimeter / sqrt(sum of cell areas)
    #[default]
    SqrtOfSum,
    /// perimeter / sum of sqrt(cell area); linear in unit membership
    SumOfSqrts,
}

impl std::fmt::Display for CompactnessMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CompactnessMode::SqrtOfSum => "SQRT_OF_SUM",
            CompactnessMode::SumOfSqrts => "SUM_OF_SQRTS",
        })
    }
}

impl std::str::FromStr for CompactnessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SQRT_OF_SUM" => Ok(CompactnessMode::SqrtOfSum),
            "SUM_OF_SQRTS" => Ok(CompactnessMode::SumOfSqrts),
            other => Err(format!("unknown compactness mode `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("at least one site is required")]
    NoSites,
    #[error("sites {first} and {second} coincide")]
    DuplicateSites { first: usize, second: usize },
    #[error("site {index} is not strictly inside the bounding box")]
    SiteOutsideBox { index: usize },
    #[error("unknown basic unit {0}")]
    UnknownUnit(usize),
    #[error("empty unit set")]
    EmptySet,
    #[error("cell of site {0} degenerated to fewer than three vertices")]
    DegenerateCell(usize),
    #[error("invalid GeoJSON: {0}")]
    GeoJson(String),
}

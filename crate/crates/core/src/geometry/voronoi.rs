use std::collections::BTreeMap;

use crate::scalar::Real;

use super::polygon::{clip_half_plane, polygon_area, polygon_perimeter};
use super::table::{BasicUnitGeometry, GeometryTable};
use super::{BoundingBox, GeometryError, Point};

/// Builds the Voronoi tessellation of `sites` clipped to `bbox`.
///
/// Each cell starts as the box and is cut by the perpendicular bisector with
/// every other site, nearest first; the sweep stops once the next site is
/// farther than twice the cell's current radius. Cell edges remember which
/// bisector produced them, which yields the shared boundary lengths directly.
pub fn build_voronoi<T: Real>(
    sites: &[Point<T>],
    bbox: BoundingBox<T>,
) -> Result<GeometryTable<T>, GeometryError> {
    if sites.is_empty() {
        return Err(GeometryError::NoSites);
    }
    if let Some(index) = sites.iter().position(|&p| !bbox.strictly_contains(p)) {
        return Err(GeometryError::SiteOutsideBox { index });
    }
    let diag = bbox.diagonal();
    let tol = diag * T::lit(1e-9);
    check_distinct(sites, tol)?;

    let inside_tol = diag * T::lit(1e-12);
    let mut cells: Vec<(Vec<Point<T>>, Vec<Option<usize>>)> = Vec::with_capacity(sites.len());
    let mut order: Vec<usize> = Vec::with_capacity(sites.len());
    for (i, &si) in sites.iter().enumerate() {
        let mut poly = bbox.corners().to_vec();
        let mut labels = vec![None; 4];
        order.clear();
        order.extend((0..sites.len()).filter(|&j| j != i));
        order.sort_by(|&a, &b| {
            si.dist_sq(sites[a])
                .partial_cmp(&si.dist_sq(sites[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut radius = cell_radius(si, &poly);
        for &j in &order {
            let sj = sites[j];
            let d = si.dist(sj);
            if d > T::lit(2.0) * radius + tol {
                break;
            }
            let normal = Point::new((sj.x - si.x) / d, (sj.y - si.y) / d);
            let mid = Point::new((si.x + sj.x) / T::lit(2.0), (si.y + sj.y) / T::lit(2.0));
            let offset = normal.x * mid.x + normal.y * mid.y;
            let (p, l) = clip_half_plane(&poly, &labels, normal, offset, Some(j), inside_tol, tol);
            poly = p;
            labels = l;
            if poly.len() < 3 {
                return Err(GeometryError::DegenerateCell(i));
            }
            radius = cell_radius(si, &poly);
        }
        cells.push((poly, labels));
    }

    let mut units: Vec<BasicUnitGeometry<T>> = cells
        .iter()
        .enumerate()
        .map(|(i, (poly, labels))| {
            let area = polygon_area(poly);
            BasicUnitGeometry {
                unit_id: i,
                polygon: poly.clone(),
                edge_neighbor: labels.clone(),
                area,
                perimeter: polygon_perimeter(poly),
                sqrt_area: area.sqrt(),
                neighbors: Vec::new(),
            }
        })
        .collect();

    // Shared side lengths are taken from the lower-indexed cell and stored on both.
    let mut shared: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for (i, unit) in units.iter().enumerate() {
        for (j, len) in unit.labelled_lengths() {
            let key = (i.min(j), i.max(j));
            if i == key.0 {
                shared.insert(key, len);
            } else {
                shared.entry(key).or_insert(len);
            }
        }
    }
    for ((i, j), len) in shared {
        if len > tol {
            units[i].neighbors.push((j, len));
            units[j].neighbors.push((i, len));
        }
    }
    for u in &mut units {
        u.neighbors.sort_by(|a, b| a.0.cmp(&b.0));
    }
    Ok(GeometryTable::from_units(bbox, units))
}

fn cell_radius<T: Real>(site: Point<T>, poly: &[Point<T>]) -> T {
    poly.iter().map(|&v| site.dist(v)).fold(T::zero(), T::max)
}

fn check_distinct<T: Real>(sites: &[Point<T>], tol: T) -> Result<(), GeometryError> {
    let mut idx: Vec<usize> = (0..sites.len()).collect();
    idx.sort_by(|&a, &b| sites[a].x.partial_cmp(&sites[b].x).unwrap().then(a.cmp(&b)));
    for (pos, &a) in idx.iter().enumerate() {
        for &b in &idx[pos + 1..] {
            if sites[b].x - sites[a].x > tol {
                break;
            }
            if sites[a].dist(sites[b]) <= tol {
                let (first, second) = if a < b { (a, b) } else { (b, a) };
                return Err(GeometryError::DuplicateSites { first, second });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box() -> BoundingBox<f64> {
        BoundingBox::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn single_site_owns_the_box() {
        let t = build_voronoi(&[Point::new(0.3, 0.6)], unit_box()).unwrap();
        let u = t.unit(0);
        assert_relative_eq!(u.area, 1.0, epsilon = 1e-12);
        assert_relative_eq!(u.perimeter, 4.0, epsilon = 1e-12);
        assert!(u.neighbors.is_empty());
    }

    #[test]
    fn two_sites_split_in_half() {
        let sites = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
        let t = build_voronoi(&sites, unit_box()).unwrap();
        for i in 0..2 {
            assert_relative_eq!(t.unit(i).area, 0.5, epsilon = 1e-12);
            assert_relative_eq!(t.unit(i).perimeter, 3.0, epsilon = 1e-12);
        }
        assert_relative_eq!(t.shared_boundary(0, 1), 1.0, epsilon = 1e-12);
        assert_eq!(t.shared_boundary(0, 1), t.shared_boundary(1, 0));
    }

    #[test]
    fn two_sites_in_f32() {
        let sites = [Point::new(0.25f32, 0.5), Point::new(0.75, 0.5)];
        let t = build_voronoi(&sites, BoundingBox::new(0.0f32, 0.0, 1.0, 1.0)).unwrap();
        assert!((t.unit(0).perimeter - 3.0).abs() < 1e-5);
        assert!((t.shared_boundary(0, 1) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn duplicate_sites_rejected_with_pair() {
        let sites = [Point::new(0.2, 0.2), Point::new(0.5, 0.5), Point::new(0.2, 0.2)];
        assert_eq!(
            build_voronoi(&sites, unit_box()).unwrap_err(),
            GeometryError::DuplicateSites { first: 0, second: 2 }
        );
    }

    #[test]
    fn site_on_box_rejected() {
        let sites = [Point::new(0.5, 0.5), Point::new(1.0, 0.5)];
        assert_eq!(
            build_voronoi(&sites, unit_box()).unwrap_err(),
            GeometryError::SiteOutsideBox { index: 1 }
        );
    }

    #[test]
    fn grid_2x2_has_no_diagonal_adjacency() {
        let sites = [
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.75, 0.75),
            Point::new(0.25, 0.75),
        ];
        let t = build_voronoi(&sites, unit_box()).unwrap();
        assert!(t.are_adjacent(0, 1) && t.are_adjacent(1, 2) && t.are_adjacent(2, 3) && t.are_adjacent(3, 0));
        assert!(!t.are_adjacent(0, 2) && !t.are_adjacent(1, 3));
    }
}

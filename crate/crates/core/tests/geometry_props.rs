use std::collections::{HashSet, VecDeque};
use std::f64::consts::PI;

use proptest::prelude::*;
use tddmp::geometry::{build_voronoi, is_convex_ccw, polygon_area, regular_polygon, CompactnessMode, GeometryTable};
use tddmp::{BoundingBox, Point};

fn grid(rows: usize, cols: usize) -> GeometryTable<f64> {
    let mut polys = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (c as f64, r as f64);
            polys.push(vec![
                Point::new(x, y),
                Point::new(x + 1.0, y),
                Point::new(x + 1.0, y + 1.0),
                Point::new(x, y + 1.0),
            ]);
        }
    }
    GeometryTable::from_polygons(polys).unwrap()
}

/// Grows a random connected set of grid cells from `seed_cell`.
fn grow(geo: &GeometryTable<f64>, seed_cell: usize, picks: &[usize]) -> Vec<usize> {
    let mut set = vec![seed_cell];
    for &p in picks {
        let frontier: Vec<usize> = set
            .iter()
            .flat_map(|&u| geo.neighbors(u))
            .filter(|v| !set.contains(v))
            .collect::<HashSet<_>>()
            .into_iter()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if frontier.is_empty() {
            break;
        }
        set.push(frontier[p % frontier.len()]);
    }
    set
}

fn bfs_connected(geo: &GeometryTable<f64>, units: &[usize]) -> bool {
    if units.len() <= 1 {
        return true;
    }
    let set: HashSet<usize> = units.iter().copied().collect();
    let mut seen = HashSet::from([units[0]]);
    let mut queue = VecDeque::from([units[0]]);
    while let Some(u) = queue.pop_front() {
        for v in 0..geo.len() {
            let shares_side = geo.unit(u).neighbors.iter().any(|&(w, len)| w == v && len > 1e-9);
            if set.contains(&v) && shares_side && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen.len() == set.len()
}

/// Cell of `sites[i]` as the intersection of the box with every bisector
/// half-plane, with no early termination or labelling.
fn brute_cell(sites: &[Point], i: usize, bbox: BoundingBox) -> Vec<Point> {
    let mut poly = bbox.corners().to_vec();
    for (j, &sj) in sites.iter().enumerate() {
        if j == i {
            continue;
        }
        let si = sites[i];
        let keep = |p: Point| p.dist_sq(si) <= p.dist_sq(sj) + 1e-12;
        let cross = |a: Point, b: Point| {
            let fa = a.dist_sq(si) - a.dist_sq(sj);
            let fb = b.dist_sq(si) - b.dist_sq(sj);
            let t = fa / (fa - fb);
            Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        };
        let mut out = Vec::new();
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            match (keep(a), keep(b)) {
                (true, true) => out.push(b),
                (true, false) => out.push(cross(a, b)),
                (false, true) => {
                    out.push(cross(a, b));
                    out.push(b);
                }
                (false, false) => {}
            }
        }
        out.dedup_by(|a, b| a.dist(*b) < 1e-12);
        poly = out;
    }
    poly
}

#[test]
fn two_by_two_grid_matches_half_plane_oracle() {
    let sites = [
        Point::new(0.5, 0.5),
        Point::new(1.5, 0.5),
        Point::new(0.5, 1.5),
        Point::new(1.5, 1.5),
    ];
    let bbox = BoundingBox::new(0.0, 0.0, 2.0, 2.0);
    let geo = build_voronoi(&sites, bbox).unwrap();
    for i in 0..4 {
        let oracle = brute_cell(&sites, i, bbox);
        let cell = &geo.unit(i);
        assert!((cell.area - polygon_area(&oracle)).abs() < 1e-12);
        for v in &oracle {
            assert!(cell.polygon.iter().any(|w| w.dist(*v) < 1e-12), "vertex {v:?} of cell {i}");
        }
        let ids: Vec<usize> = cell.neighbors.iter().map(|n| n.0).collect();
        let expected: Vec<usize> = (0..4).filter(|&j| j != i && j != 3 - i).collect();
        assert_eq!(ids, expected);
        assert!(cell.neighbors.iter().all(|n| (n.1 - 1.0).abs() < 1e-12));
    }
}

#[test]
fn unit_square_ratio_is_four() {
    let geo = grid(1, 1);
    assert_eq!(geo.compactness_ratio(&[0], CompactnessMode::SqrtOfSum).unwrap(), 4.0);
    assert_eq!(geo.compactness_ratio(&[0], CompactnessMode::SumOfSqrts).unwrap(), 4.0);
}

#[test]
fn sixty_four_gon_approaches_circle() {
    let poly = regular_polygon(Point::new(0.0, 0.0), 1.0, 64);
    let geo = GeometryTable::from_polygons(vec![poly]).unwrap();
    let cr = geo.compactness_ratio(&[0], CompactnessMode::SqrtOfSum).unwrap();
    let exact = 2.0 * (64.0 * (PI / 64.0).tan()).sqrt();
    assert!((cr - exact).abs() < 1e-9);
    assert!((cr / (2.0 * PI.sqrt()) - 1.0).abs() < 1e-3);
}

#[test]
fn l_shape_is_contiguous() {
    let geo = grid(2, 2);
    assert!(geo.is_contiguous(&[0, 1, 2]));
    assert!(bfs_connected(&geo, &[0, 1, 2]));
    assert!(!geo.is_contiguous(&[0, 3]));
}

fn sites_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.5f64..99.5, 0.5f64..99.5), 1..40)
}

fn distinct(raw: &[(f64, f64)]) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    for &(x, y) in raw {
        let p = Point::new(x, y);
        if pts.iter().all(|q| q.dist(p) > 1e-3) {
            pts.push(p);
        }
    }
    pts
}

proptest! {
    #[test]
    fn voronoi_tiles_the_box(raw in sites_strategy()) {
        let sites = distinct(&raw);
        let bbox = BoundingBox::new(0.0, 0.0, 100.0, 100.0);
        let geo = build_voronoi(&sites, bbox).unwrap();
        let total: f64 = (0..geo.len()).map(|i| geo.unit(i).area).sum();
        prop_assert!((total / bbox.area() - 1.0).abs() < 1e-6);
        for i in 0..geo.len() {
            let u = geo.unit(i);
            prop_assert!(u.polygon.len() >= 3);
            prop_assert!(is_convex_ccw(&u.polygon, 1e-9));
            prop_assert!(u.area > 0.0 && u.perimeter > 0.0);
            prop_assert!((u.sqrt_area / u.area.sqrt() - 1.0).abs() < 1e-9);
            let shared: f64 = u.neighbors.iter().map(|n| n.1).sum();
            prop_assert!(shared <= u.perimeter * (1.0 + 1e-9));
            for &(j, len) in &u.neighbors {
                prop_assert_eq!(geo.shared_boundary(j, i), len);
            }
            prop_assert_eq!(geo.territory_perimeter(&[i]).unwrap(), u.perimeter);
        }
    }

    #[test]
    fn adding_a_unit_changes_perimeter_by_identity(
        rows in 2usize..6, cols in 2usize..6, start in 0usize..36, picks in prop::collection::vec(0usize..8, 1..10),
    ) {
        let geo = grid(rows, cols);
        let set = grow(&geo, start % geo.len(), &picks);
        let (new, base) = set.split_last().unwrap();
        let shared: f64 = base.iter().map(|&b| geo.shared_boundary(*new, b)).sum();
        let before = geo.territory_perimeter(base).unwrap();
        let after = geo.territory_perimeter(&set).unwrap();
        prop_assert!((after - (before + geo.unit(*new).perimeter - 2.0 * shared)).abs() < 1e-9);
    }

    #[test]
    fn ratio_bounds_on_grid_unions(
        rows in 1usize..6, cols in 1usize..6, start in 0usize..36, picks in prop::collection::vec(0usize..8, 0..12),
    ) {
        let geo = grid(rows, cols);
        let set = grow(&geo, start % geo.len(), &picks);
        prop_assert!(geo.is_contiguous(&set));
        prop_assert!(bfs_connected(&geo, &set));
        let proper = geo.compactness_ratio(&set, CompactnessMode::SqrtOfSum).unwrap();
        let summed = geo.compactness_ratio(&set, CompactnessMode::SumOfSqrts).unwrap();
        prop_assert!(proper >= 3.5);
        prop_assert!(summed <= proper + 1e-12);
    }

    #[test]
    fn contiguity_agrees_with_bfs(rows in 1usize..5, cols in 1usize..5, mask in 0u32..(1 << 16)) {
        let geo = grid(rows, cols);
        let set: Vec<usize> = (0..geo.len()).filter(|&i| mask & (1 << i) != 0).collect();
        prop_assert_eq!(geo.is_contiguous(&set), bfs_connected(&geo, &set));
    }
}

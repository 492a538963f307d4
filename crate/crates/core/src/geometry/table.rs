use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::polygon::{polygon_area, polygon_perimeter, signed_area};
use super::{BoundingBox, CompactnessMode, GeometryError, Point};

/// One basic unit's cell and its cached aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicUnitGeometry<T> {
    pub unit_id: usize,
    /// Counter-clockwise vertex list.
    pub polygon: Vec<Point<T>>,
    /// Owner of the edge `polygon[k] -> polygon[k+1]` on the other side, `None`
    /// on the outer boundary.
    pub edge_neighbor: Vec<Option<usize>>,
    pub area: T,
    pub perimeter: T,
    pub sqrt_area: T,
    /// `(neighbour id, shared boundary length)`, sorted by id.
    pub neighbors: Vec<(usize, T)>,
}

impl<T: Real> BasicUnitGeometry<T> {
    pub(crate) fn labelled_lengths(&self) -> Vec<(usize, T)> {
        let n = self.polygon.len();
        let mut out: Vec<(usize, T)> = Vec::new();
        for k in 0..n {
            if let Some(j) = self.edge_neighbor[k] {
                let len = self.polygon[k].dist(self.polygon[(k + 1) % n]);
                match out.iter_mut().find(|(o, _)| *o == j) {
                    Some((_, acc)) => *acc += len,
                    None => out.push((j, len)),
                }
            }
        }
        out
    }
}

/// Perimeter and area aggregates of a set of units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats<T> {
    pub perimeter: T,
    pub area: T,
    pub sqrt_area_sum: T,
}

impl<T: Real> ShapeStats<T> {
    pub fn ratio(&self, mode: CompactnessMode) -> T {
        match mode {
            CompactnessMode::SqrtOfSum => self.perimeter / self.area.sqrt(),
            CompactnessMode::SumOfSqrts => self.perimeter / self.sqrt_area_sum,
        }
    }

    /// Aggregates after adding `unit`, which shares `shared` boundary with the set.
    pub fn with_unit(&self, unit: &BasicUnitGeometry<T>, shared: T) -> Self {
        ShapeStats {
            perimeter: self.perimeter + unit.perimeter - T::lit(2.0) * shared,
            area: self.area + unit.area,
            sqrt_area_sum: self.sqrt_area_sum + unit.sqrt_area,
        }
    }

    /// Aggregates after removing `unit`, which shares `shared` boundary with the rest.
    pub fn without_unit(&self, unit: &BasicUnitGeometry<T>, shared: T) -> Self {
        ShapeStats {
            perimeter: self.perimeter - unit.perimeter + T::lit(2.0) * shared,
            area: self.area - unit.area,
            sqrt_area_sum: self.sqrt_area_sum - unit.sqrt_area,
        }
    }
}

/// Immutable table of basic-unit geometry, indexed by node id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryTable<T> {
    pub bbox: BoundingBox<T>,
    pub units: Vec<BasicUnitGeometry<T>>,
}

impl<T: Real> GeometryTable<T> {
    pub(crate) fn from_units(bbox: BoundingBox<T>, units: Vec<BasicUnitGeometry<T>>) -> Self {
        GeometryTable { bbox, units }
    }

    /// Builds a table from arbitrary convex polygons (one per unit).
    ///
    /// Adjacency is recovered from collinear overlapping edges. An edge touching
    /// several neighbours is labelled with the one it overlaps most.
    pub fn from_polygons(polygons: Vec<Vec<Point<T>>>) -> Result<Self, GeometryError> {
        let all: Vec<Point<T>> = polygons.iter().flatten().copied().collect();
        let bbox = BoundingBox::around(&all, T::zero()).ok_or(GeometryError::NoSites)?;
        let tol = bbox.diagonal() * T::lit(1e-9);
        let polys: Vec<Vec<Point<T>>> = polygons
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                if p.len() < 3 {
                    return Err(GeometryError::DegenerateCell(i));
                }
                if signed_area(&p) < T::zero() {
                    p.reverse();
                }
                Ok(p)
            })
            .collect::<Result<_, _>>()?;

        let mut units: Vec<BasicUnitGeometry<T>> = polys
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let area = polygon_area(p);
                BasicUnitGeometry {
                    unit_id: i,
                    polygon: p.clone(),
                    edge_neighbor: vec![None; p.len()],
                    area,
                    perimeter: polygon_perimeter(p),
                    sqrt_area: area.sqrt(),
                    neighbors: Vec::new(),
                }
            })
            .collect();

        let n = polys.len();
        let mut best_overlap: Vec<Vec<T>> = polys.iter().map(|p| vec![T::zero(); p.len()]).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut total = T::zero();
                for (ei, a) in edges(&polys[i]).enumerate() {
                    for (ej, b) in edges(&polys[j]).enumerate() {
                        let ov = collinear_overlap(a, b, tol);
                        if ov > tol {
                            total += ov;
                            if ov > best_overlap[i][ei] {
                                best_overlap[i][ei] = ov;
                                units[i].edge_neighbor[ei] = Some(j);
                            }
                            if ov > best_overlap[j][ej] {
                                best_overlap[j][ej] = ov;
                                units[j].edge_neighbor[ej] = Some(i);
                            }
                        }
                    }
                }
                if total > tol {
                    units[i].neighbors.push((j, total));
                    units[j].neighbors.push((i, total));
                }
            }
        }
        for u in &mut units {
            u.neighbors.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Ok(GeometryTable { bbox, units })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, id: usize) -> &BasicUnitGeometry<T> {
        &self.units[id]
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.units[id].neighbors.iter().map(|&(j, _)| j)
    }

    /// Shared boundary length `f_{i,j}`; zero when the cells are not adjacent.
    pub fn shared_boundary(&self, i: usize, j: usize) -> T {
        let nb = &self.units[i].neighbors;
        match nb.binary_search_by(|probe| probe.0.cmp(&j)) {
            Ok(pos) => nb[pos].1,
            Err(_) => T::zero(),
        }
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.units[i]
            .neighbors
            .binary_search_by(|probe| probe.0.cmp(&j))
            .is_ok()
    }

    /// Total boundary `unit` shares with members of a set.
    pub fn boundary_with(&self, unit: usize, member: impl Fn(usize) -> bool) -> T {
        self.units[unit]
            .neighbors
            .iter()
            .filter(|&&(j, _)| member(j))
            .map(|&(_, len)| len)
            .sum()
    }

    /// Whether `unit` touches any member of a set.
    pub fn touches(&self, unit: usize, member: impl Fn(usize) -> bool) -> bool {
        self.units[unit].neighbors.iter().any(|&(j, _)| member(j))
    }

    fn check_ids(&self, units: &[usize]) -> Result<(), GeometryError> {
        if units.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        match units.iter().find(|&&u| u >= self.units.len()) {
            Some(&u) => Err(GeometryError::UnknownUnit(u)),
            None => Ok(()),
        }
    }

    /// Aggregated perimeter, area and sqrt-area sum of a unit set.
    pub fn shape_of(&self, units: &[usize]) -> Result<ShapeStats<T>, GeometryError> {
        self.check_ids(units)?;
        let members: HashSet<usize> = units.iter().copied().collect();
        let mut stats = ShapeStats::default();
        for &u in &members {
            let g = &self.units[u];
            stats.perimeter += g.perimeter;
            stats.area += g.area;
            stats.sqrt_area_sum += g.sqrt_area;
            // each internal side is subtracted once per direction
            stats.perimeter -= self.boundary_with(u, |j| members.contains(&j));
        }
        Ok(stats)
    }

    /// Outer boundary length of the union of the given cells.
    pub fn territory_perimeter(&self, units: &[usize]) -> Result<T, GeometryError> {
        Ok(self.shape_of(units)?.perimeter)
    }

    pub fn compactness_ratio(&self, units: &[usize], mode: CompactnessMode) -> Result<T, GeometryError> {
        Ok(self.shape_of(units)?.ratio(mode))
    }

    /// True iff the adjacency subgraph induced by `units` is connected.
    pub fn is_contiguous(&self, units: &[usize]) -> bool {
        if units.len() <= 1 {
            return units.iter().all(|&u| u < self.units.len());
        }
        if units.iter().any(|&u| u >= self.units.len()) {
            return false;
        }
        let members: HashSet<usize> = units.iter().copied().collect();
        self.components(&members) == 1
    }

    /// Number of connected components of the induced adjacency subgraph.
    pub fn components(&self, members: &HashSet<usize>) -> usize {
        let mut seen: HashSet<usize> = HashSet::with_capacity(members.len());
        let mut count = 0;
        let mut sorted: Vec<usize> = members.iter().copied().collect();
        sorted.sort_unstable();
        for &start in &sorted {
            if !seen.insert(start) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if members.contains(&v) && seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Boundary rings of the union of the given cells.
    ///
    /// Rings of the outer boundary run counter-clockwise, holes clockwise.
    pub fn dissolve(&self, units: &[usize]) -> Result<Vec<Vec<Point<T>>>, GeometryError> {
        self.check_ids(units)?;
        let members: HashSet<usize> = units.iter().copied().collect();
        let tol = self.bbox.diagonal() * T::lit(1e-7);
        let mut segs: Vec<(Point<T>, Point<T>)> = Vec::new();
        let mut sorted: Vec<usize> = members.iter().copied().collect();
        sorted.sort_unstable();
        for &u in &sorted {
            let g = &self.units[u];
            let n = g.polygon.len();
            for k in 0..n {
                let internal = matches!(g.edge_neighbor[k], Some(j) if members.contains(&j));
                if !internal {
                    segs.push((g.polygon[k], g.polygon[(k + 1) % n]));
                }
            }
        }
        let mut used = vec![false; segs.len()];
        let mut rings = Vec::new();
        for s in 0..segs.len() {
            if used[s] {
                continue;
            }
            used[s] = true;
            let start = segs[s].0;
            let mut ring = vec![start];
            let mut cur = segs[s].1;
            loop {
                if cur.dist(start) <= tol {
                    break;
                }
                ring.push(cur);
                let next = (0..segs.len())
                    .filter(|&t| !used[t])
                    .min_by(|&a, &b| {
                        segs[a].0.dist(cur).partial_cmp(&segs[b].0.dist(cur)).unwrap()
                    });
                match next {
                    Some(t) if segs[t].0.dist(cur) <= tol => {
                        used[t] = true;
                        cur = segs[t].1;
                    }
                    _ => break,
                }
            }
            rings.push(ring);
        }
        Ok(rings)
    }
}

fn edges<T: Real>(poly: &[Point<T>]) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
    let n = poly.len();
    (0..n).map(move |k| (poly[k], poly[(k + 1) % n]))
}

/// Length of the overlap of two segments lying on a common line.
fn collinear_overlap<T: Real>(a: (Point<T>, Point<T>), b: (Point<T>, Point<T>), tol: T) -> T {
    let len = a.0.dist(a.1);
    if len <= tol {
        return T::zero();
    }
    let dir = Point::new((a.1.x - a.0.x) / len, (a.1.y - a.0.y) / len);
    let off = |p: Point<T>| (p.x - a.0.x) * dir.y - (p.y - a.0.y) * dir.x;
    if off(b.0).abs() > tol || off(b.1).abs() > tol {
        return T::zero();
    }
    let proj = |p: Point<T>| (p.x - a.0.x) * dir.x + (p.y - a.0.y) * dir.y;
    let (b0, b1) = (proj(b.0), proj(b.1));
    let lo = b0.min(b1).max(T::zero());
    let hi = b0.max(b1).min(len);
    (hi - lo).max(T::zero())
}

use crate::scalar::Real;

use super::Point;

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area<T: Real>(poly: &[Point<T>]) -> T {
    let n = poly.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    acc / T::lit(2.0)
}

pub fn polygon_area<T: Real>(poly: &[Point<T>]) -> T {
    signed_area(poly).abs()
}

pub fn polygon_perimeter<T: Real>(poly: &[Point<T>]) -> T {
    let n = poly.len();
    (0..n).map(|k| poly[k].dist(poly[(k + 1) % n])).sum()
}

/// Regular `sides`-gon with circumradius `radius` centred at `center`, CCW.
pub fn regular_polygon<T: Real>(center: Point<T>, radius: T, sides: usize) -> Vec<Point<T>> {
    let step = T::lit(2.0) * T::PI() / T::lit(sides as f64);
    (0..sides)
        .map(|k| {
            let a = step * T::lit(k as f64);
            Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect()
}

pub fn is_convex_ccw<T: Real>(poly: &[Point<T>], tol: T) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let c = poly[(k + 2) % n];
        let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        cross >= -tol
    })
}

/// Clips a convex polygon by the half-plane `{p : normal·p <= offset}`.
///
/// `labels[k]` names the owner of edge `poly[k] -> poly[k+1]`. Edges created
/// along the clip line receive `clip_label`. Vertices closer than `merge_tol`
/// to their predecessor are dropped together with the zero-length edge.
pub(crate) fn clip_half_plane<T: Real>(
    poly: &[Point<T>],
    labels: &[Option<usize>],
    normal: Point<T>,
    offset: T,
    clip_label: Option<usize>,
    inside_tol: T,
    merge_tol: T,
) -> (Vec<Point<T>>, Vec<Option<usize>>) {
    let n = poly.len();
    let side = |p: Point<T>| normal.x * p.x + normal.y * p.y - offset;
    // (vertex, label of the edge ending at it)
    let mut out: Vec<(Point<T>, Option<usize>)> = Vec::with_capacity(n + 2);
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let label = labels[k];
        let (fp, fq) = (side(p), side(q));
        let (p_in, q_in) = (fp <= inside_tol, fq <= inside_tol);
        match (p_in, q_in) {
            (true, true) => out.push((q, label)),
            (true, false) => out.push((lerp(p, q, fp / (fp - fq)), label)),
            (false, true) => {
                out.push((lerp(p, q, fp / (fp - fq)), clip_label));
                out.push((q, label));
            }
            (false, false) => {}
        }
    }

    let mut kept: Vec<(Point<T>, Option<usize>)> = Vec::with_capacity(out.len());
    for (v, lab) in out {
        match kept.last() {
            Some((prev, _)) if prev.dist(v) <= merge_tol => {}
            _ => kept.push((v, lab)),
        }
    }
    while kept.len() > 1 {
        let first = kept[0].0;
        let last = *kept.last().unwrap();
        if first.dist(last.0) <= merge_tol {
            kept[0].1 = last.1;
            kept.pop();
        } else {
            break;
        }
    }

    let m = kept.len();
    let verts = kept.iter().map(|(v, _)| *v).collect();
    let out_labels = (0..m).map(|k| kept[(k + 1) % m].1).collect();
    (verts, out_labels)
}

fn lerp<T: Real>(p: Point<T>, q: Point<T>, t: T) -> Point<T> {
    Point::new(p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point<f64>> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_area_and_perimeter() {
        let sq = unit_square();
        assert_eq!(polygon_area(&sq), 1.0);
        assert_eq!(polygon_perimeter(&sq), 4.0);
        assert!(is_convex_ccw(&sq, 1e-12));
    }

    #[test]
    fn clip_in_half_labels_new_edge() {
        let sq = unit_square();
        let labels = vec![None; 4];
        // keep x <= 0.5
        let (poly, labs) =
            clip_half_plane(&sq, &labels, Point::new(1.0, 0.0), 0.5, Some(7), 1e-12, 1e-9);
        assert_eq!(poly.len(), 4);
        assert!((polygon_area(&poly) - 0.5).abs() < 1e-12);
        let clipped: f64 = (0..poly.len())
            .filter(|&k| labs[k] == Some(7))
            .map(|k| poly[k].dist(poly[(k + 1) % poly.len()]))
            .sum();
        assert!((clipped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_through_corner_leaves_no_zero_edge() {
        let sq = unit_square();
        let labels = vec![None; 4];
        // x + y <= 2 touches only the corner (1,1)
        let n = Point::new(1.0, 1.0);
        let (poly, labs) = clip_half_plane(&sq, &labels, n, 2.0, Some(3), 1e-12, 1e-9);
        assert_eq!(poly.len(), 4);
        assert!(labs.iter().all(|l| l.is_none()));
    }
}

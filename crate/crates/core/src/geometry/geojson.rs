use serde_json::{json, Value};

use crate::scalar::Real;

use super::{GeometryError, GeometryTable, Point};

pub(crate) fn ring_coordinates<T: Real>(ring: &[Point<T>]) -> Value {
    let mut coords: Vec<Value> = ring.iter().map(|p| json!([p.x.as_f64(), p.y.as_f64()])).collect();
    if let Some(first) = ring.first() {
        coords.push(json!([first.x.as_f64(), first.y.as_f64()]));
    }
    Value::Array(coords)
}

/// One Feature per basic unit with its cached aggregates as properties.
pub fn table_to_geojson<T: Real>(table: &GeometryTable<T>) -> Value {
    let features: Vec<Value> = table
        .units
        .iter()
        .map(|u| {
            let neighbors: Vec<Value> = u
                .neighbors
                .iter()
                .map(|&(j, len)| json!([j, len.as_f64()]))
                .collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "Polygon", "coordinates": [ring_coordinates(&u.polygon)] },
                "properties": {
                    "unit_id": u.unit_id,
                    "area": u.area.as_f64(),
                    "perimeter": u.perimeter.as_f64(),
                    "neighbors": neighbors,
                }
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Reads unit polygons back; adjacency is recomputed from the shared edges.
pub fn table_from_geojson<T: Real>(doc: &Value) -> Result<GeometryTable<T>, GeometryError> {
    let bad = |m: &str| GeometryError::GeoJson(m.to_string());
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `features` array"))?;
    let mut polys: Vec<(usize, Vec<Point<T>>)> = Vec::with_capacity(features.len());
    for (pos, f) in features.iter().enumerate() {
        let id = f
            .pointer("/properties/unit_id")
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .unwrap_or(pos);
        let ring = f
            .pointer("/geometry/coordinates/0")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("feature without polygon ring"))?;
        let mut pts: Vec<Point<T>> = ring
            .iter()
            .map(|c| {
                let x = c.get(0).and_then(Value::as_f64);
                let y = c.get(1).and_then(Value::as_f64);
                match (x, y) {
                    (Some(x), Some(y)) => Ok(Point::new(T::lit(x), T::lit(y))),
                    _ => Err(bad("malformed coordinate")),
                }
            })
            .collect::<Result<_, _>>()?;
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        polys.push((id, pts));
    }
    polys.sort_by_key(|(id, _)| *id);
    if polys.iter().enumerate().any(|(k, (id, _))| *id != k) {
        return Err(bad("unit ids must be 0..n"));
    }
    GeometryTable::from_polygons(polys.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_voronoi, BoundingBox};

    #[test]
    fn voronoi_table_survives_geojson() {
        let sites = [
            Point::new(0.2, 0.3),
            Point::new(0.7, 0.2),
            Point::new(0.5, 0.8),
            Point::new(0.9, 0.6),
        ];
        let t = build_voronoi(&sites, BoundingBox::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        let back: GeometryTable<f64> = table_from_geojson(&table_to_geojson(&t)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((t.shared_boundary(i, j) - back.shared_boundary(i, j)).abs() < 1e-9);
            }
            assert!((t.unit(i).perimeter - back.unit(i).perimeter).abs() < 1e-12);
        }
    }
}

use std::collections::HashSet;
use std::fmt::Write as _;

use serde_json::{json, Value};
use thiserror::Error;

use tddmp::geometry::{polygon_perimeter, GeometryError};
use tddmp::model::{Instance, Solution};
use tddmp::Point;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("solution belongs to `{solution}`, not to `{instance}`")]
    InstanceName { solution: String, instance: String },
    #[error("territory {territory} lists unknown customer {customer}")]
    UnknownCustomer { territory: usize, customer: usize },
    #[error("customer {0} appears in two territories")]
    Overlap(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#ad494a",
];

pub fn territory_color(id: usize) -> &'static str {
    PALETTE[id % PALETTE.len()]
}

/// Dissolved boundary of one territory, split into polygons of one outer
/// ring plus its holes.
#[derive(Clone, Debug, PartialEq)]
pub struct TerritoryShape {
    pub id: usize,
    pub members: Vec<usize>,
    pub compactness: f64,
    /// Summed length of every boundary ring.
    pub perimeter: f64,
    pub polygons: Vec<Vec<Vec<Point>>>,
}

fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|k| ring[k].x * ring[(k + 1) % n].y - ring[(k + 1) % n].x * ring[k].y).sum::<f64>() / 2.0
}

fn contains(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (ring[k], ring[(k + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

/// Rejects a solution that does not partition a subset of `inst`'s
/// customers or names another instance.
pub fn check_pairing(sol: &Solution, inst: &Instance) -> Result<(), RenderError> {
    if sol.instance != inst.name() {
        return Err(RenderError::InstanceName { solution: sol.instance.clone(), instance: inst.name().to_string() });
    }
    let mut seen = HashSet::new();
    for t in &sol.territories {
        for &c in &t.members {
            if c == 0 || c > inst.n() {
                return Err(RenderError::UnknownCustomer { territory: t.id, customer: c });
            }
            if !seen.insert(c) {
                return Err(RenderError::Overlap(c));
            }
        }
    }
    Ok(())
}

pub fn territory_shapes(sol: &Solution, inst: &Instance) -> Result<Vec<TerritoryShape>, RenderError> {
    check_pairing(sol, inst)?;
    let geo = inst.geometry();
    let mut shapes = Vec::new();
    for t in sol.territories.iter().filter(|t| !t.members.is_empty()) {
        let rings = geo.dissolve(&t.members)?;
        let perimeter = rings.iter().map(|r| polygon_perimeter(r)).sum();
        let (outers, holes): (Vec<_>, Vec<_>) = rings.into_iter().partition(|r| signed_area(r) > 0.0);
        let mut polygons: Vec<Vec<Vec<Point>>> = outers.into_iter().map(|r| vec![r]).collect();
        for hole in holes {
            let host = polygons.iter().position(|p| contains(&p[0], hole[0])).unwrap_or(0);
            if let Some(p) = polygons.get_mut(host) {
                p.push(hole);
            }
        }
        shapes.push(TerritoryShape {
            id: t.id,
            members: t.members.clone(),
            compactness: geo.compactness_ratio(&t.members, inst.compactness_mode())?,
            perimeter,
            polygons,
        });
    }
    Ok(shapes)
}

fn closed(ring: &[Point]) -> Value {
    let mut coords: Vec<Value> = ring.iter().map(|p| json!([p.x, p.y])).collect();
    if let Some(p) = ring.first() {
        coords.push(json!([p.x, p.y]));
    }
    Value::Array(coords)
}

/// FeatureCollection with one feature per non-empty territory.
pub fn render_geojson(sol: &Solution, inst: &Instance) -> Result<Value, RenderError> {
    let features: Vec<Value> = territory_shapes(sol, inst)?
        .into_iter()
        .map(|s| {
            let polys: Vec<Value> =
                s.polygons.iter().map(|p| Value::Array(p.iter().map(|r| closed(r)).collect())).collect();
            let geometry = if polys.len() == 1 {
                json!({ "type": "Polygon", "coordinates": polys[0] })
            } else {
                json!({ "type": "MultiPolygon", "coordinates": polys })
            };
            json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": {
                    "id": s.id,
                    "color": territory_color(s.id),
                    "compactness": s.compactness,
                    "perimeter": s.perimeter,
                    "members": s.members,
                }
            })
        })
        .collect();
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

/// SVG map: territories filled by id, customers as dots, the depot as a
/// square.
pub fn render_svg(sol: &Solution, inst: &Instance, width: f64) -> Result<String, RenderError> {
    let shapes = territory_shapes(sol, inst)?;
    let bbox = inst.geometry().bbox;
    let scale = width / bbox.width().max(f64::MIN_POSITIVE);
    let height = bbox.height() * scale;
    let project = |p: Point| ((p.x - bbox.min_x) * scale, (bbox.max_y - p.y) * scale);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    for s in &shapes {
        let mut d = String::new();
        for ring in s.polygons.iter().flatten() {
            for (k, &p) in ring.iter().enumerate() {
                let (x, y) = project(p);
                let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            svg,
            r##"  <path d="{}" fill="{}" fill-opacity="0.55" fill-rule="evenodd" stroke="#222" stroke-width="1"><title>territory {} CR {:.3}</title></path>"##,
            d.trim_end(),
            territory_color(s.id),
            s.id,
            s.compactness
        );
    }
    for (i, &p) in inst.coords().iter().enumerate() {
        let (x, y) = project(p);
        if i == 0 {
            let _ = writeln!(svg, r##"  <rect x="{:.3}" y="{:.3}" width="8" height="8" fill="#000"/>"##, x - 4.0, y - 4.0);
        } else {
            let _ = writeln!(svg, r##"  <circle cx="{x:.3}" cy="{y:.3}" r="2" fill="#000"/>"##);
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

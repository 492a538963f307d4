use super::GeneratorError;

/// One row of the CUSTOMER section. Row 0 is the depot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolomonRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub ready: f64,
    pub due: f64,
    pub service: f64,
}

/// A Solomon VRPTW benchmark file.
#[derive(Clone, Debug, PartialEq)]
pub struct SolomonFile {
    pub name: String,
    pub vehicles: usize,
    pub capacity: f64,
    pub rows: Vec<SolomonRow>,
}

impl SolomonFile {
    pub fn depot(&self) -> &SolomonRow {
        &self.rows[0]
    }

    pub fn customer_count(&self) -> usize {
        self.rows.len() - 1
    }
}

/// Parses the published Solomon text layout: a name line, a `VEHICLE`
/// section with one `NUMBER CAPACITY` row and a `CUSTOMER` section with
/// seven numeric columns per row.
pub fn parse_solomon(text: &str) -> Result<SolomonFile, GeneratorError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (_, name) = lines.next().ok_or(GeneratorError::MissingSection("name"))?;

    let mut vehicle = None;
    let mut rows = Vec::new();
    let mut section = "";
    for (line, l) in lines {
        let upper = l.to_ascii_uppercase();
        if upper.starts_with("VEHICLE") {
            section = "VEHICLE";
            continue;
        }
        if upper.starts_with("CUSTOMER") {
            section = "CUSTOMER";
            continue;
        }
        if l.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let fields = numbers(l, line)?;
        match section {
            "VEHICLE" => {
                if vehicle.is_some() || fields.len() != 2 {
                    return Err(GeneratorError::Malformed { line, reason: "expected `NUMBER CAPACITY`".into() });
                }
                vehicle = Some((fields[0] as usize, fields[1]));
            }
            "CUSTOMER" => {
                if fields.len() != 7 {
                    return Err(GeneratorError::Malformed {
                        line,
                        reason: format!("expected 7 columns, found {}", fields.len()),
                    });
                }
                if fields[0] != rows.len() as f64 {
                    return Err(GeneratorError::Malformed {
                        line,
                        reason: format!("expected customer {}, found {}", rows.len(), fields[0]),
                    });
                }
                rows.push(SolomonRow {
                    id: fields[0] as usize,
                    x: fields[1],
                    y: fields[2],
                    demand: fields[3],
                    ready: fields[4],
                    due: fields[5],
                    service: fields[6],
                });
            }
            _ => return Err(GeneratorError::Malformed { line, reason: "data outside a section".into() }),
        }
    }
    let (vehicles, capacity) = vehicle.ok_or(GeneratorError::MissingSection("VEHICLE"))?;
    if rows.is_empty() {
        return Err(GeneratorError::MissingSection("CUSTOMER"));
    }
    Ok(SolomonFile { name: name.to_string(), vehicles, capacity, rows })
}

fn numbers(l: &str, line: usize) -> Result<Vec<f64>, GeneratorError> {
    l.split_whitespace()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| GeneratorError::Malformed { line, reason: format!("`{f}` is not a non-negative number") })
        })
        .collect()
}

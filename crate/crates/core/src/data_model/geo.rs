//! Geographic transforms used to regularize spatial features: polygon
//! centroids on the raw lat/long plane and the lat/long to unit-sphere map.

use crate::error::{Error, Result};

/// Closed ring of `(lat, long)` vertices in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<(f64, f64)>,
}

impl Polygon {
    /// Drops an explicit closing vertex if present; the ring is always
    /// treated as closed.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(&(lat, long)) = vertices.iter().find(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::Domain(format!("non-finite vertex ({lat}, {long})")));
        }
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area on the lat/long plane.
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .edges()
            .map(|((lat0, long0), (lat1, long1))| lat0 * long1 - lat1 * long0)
            .sum::<f64>()
    }
}

/// Shoelace centroid `(lat_c, long_c)` in degrees.
pub fn polygon_centroid(polygon: &Polygon) -> Result<(f64, f64)> {
    let mut twice_area = 0.0;
    let mut scale = 0.0;
    let mut lat_acc = 0.0;
    let mut long_acc = 0.0;
    for ((lat0, long0), (lat1, long1)) in polygon.edges() {
        let cross = lat0 * long1 - lat1 * long0;
        twice_area += cross;
        scale += (lat0 * long1).abs() + (lat1 * long0).abs();
        lat_acc += (lat0 + lat1) * cross;
        long_acc += (long0 + long1) * cross;
    }
    let area = 0.5 * twice_area;
    if twice_area.abs() <= 16.0 * f64::EPSILON * scale {
        return Err(Error::DegenerateGeometry("polygon has zero area".into()));
    }
    Ok((lat_acc / (6.0 * area), long_acc / (6.0 * area)))
}

/// Maps degrees of latitude/longitude onto the unit sphere.
pub fn to_unit_sphere(lat: f64, long: f64) -> Result<(f64, f64, f64)> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(Error::Domain(format!("latitude {lat} outside [-90, 90]")));
    }
    if !(-180.0..=180.0).contains(&long) {
        return Err(Error::Domain(format!("longitude {long} outside [-180, 180]")));
    }
    let (lat, long) = (lat.to_radians(), long.to_radians());
    Ok((lat.cos() * long.cos(), lat.cos() * long.sin(), lat.sin()))
}

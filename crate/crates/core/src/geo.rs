//! Great-circle geometry on a spherical Earth.

use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Haversine distance in meters.
pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Point reached by travelling `distance_m` from `origin` on initial
/// bearing `bearing_deg` (clockwise from north).
pub fn destination(origin: LatLon, bearing_deg: f64, distance_m: f64) -> LatLon {
    let delta = distance_m / EARTH_RADIUS_M;
    let theta = bearing_deg.to_radians();
    let p1 = origin.lat.to_radians();
    let l1 = origin.lon.to_radians();
    let p2 = (p1.sin() * delta.cos() + p1.cos() * delta.sin() * theta.cos()).asin();
    let l2 = l1 + (theta.sin() * delta.sin() * p1.cos()).atan2(delta.cos() - p1.sin() * p2.sin());
    let lon = (l2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
    LatLon::new(p2.to_degrees(), lon)
}

/// East/north components of a horizontal offset along `bearing_deg`.
pub fn east_north(bearing_deg: f64, distance: f64) -> (f64, f64) {
    let t = bearing_deg.to_radians();
    (distance * t.sin(), distance * t.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_distances() {
        let o = LatLon::new(0.0, 0.0);
        assert_eq!(haversine_m(o, o), 0.0);
        let one_deg = EARTH_RADIUS_M * PI / 180.0;
        assert!((one_deg - 111_195.0).abs() < 1.0);
        assert!((haversine_m(o, LatLon::new(1.0, 0.0)) - one_deg).abs() < 1e-6);
        assert!((haversine_m(o, LatLon::new(1.0, 0.0)) - 111_195.0).abs() < 1.0);
        let half = haversine_m(o, LatLon::new(0.0, 180.0));
        assert!((half - EARTH_RADIUS_M * PI).abs() < 1e-6);
        assert!((half - 20_015_087.0).abs() < 10.0);
    }

    #[test]
    fn destination_inverts_haversine() {
        let start = LatLon::new(35.8262, -82.5487);
        for (bearing, d) in [(0.0, 800.0), (90.0, 1500.0), (225.0, 1000.0), (359.0, 12.5)] {
            let end = destination(start, bearing, d);
            assert!((haversine_m(start, end) - d).abs() < 1e-6, "{bearing} {d}");
        }
    }

    #[test]
    fn east_north_cardinal() {
        let (e, n) = east_north(0.0, 152.4);
        assert!(e.abs() < 1e-9 && (n - 152.4).abs() < 1e-9);
        let (e, n) = east_north(90.0, 10.0);
        assert!((e - 10.0).abs() < 1e-9 && n.abs() < 1e-9);
    }
}

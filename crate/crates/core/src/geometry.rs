//! Planar geometry on a square wrap-around region.
//!
//! Users and radio heads live on a torus of side `√A`. Distances and
//! bearings use the minimal periodic image, so the region has no edges.
//! Proximity is a strict disc test of radius `r_o`; sectorized sites add an
//! angular test between the user's angular-spectrum arc and the sector arcs.
//!
//! A user with angular spread `θ` occupies the arc `[b − θ, b + θ]` around
//! its line-of-sight bearing `b`, so `θ = π` is omnidirectional.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("torus side must be positive and finite, got {0}")]
    InvalidSide(f64),
    #[error("proximity radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("angular spread must lie in (0, pi], got {0}")]
    InvalidSpread(f64),
    #[error("sector count must be at least 1")]
    NoSectors,
    #[error("undefined bearing between coincident points")]
    UndefinedBearing,
}

/// Square region with periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    side: f64,
}

/// A location on a [`Torus`]. Constructed points are canonical, i.e. both
/// coordinates lie in `[0, side)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl Torus {
    pub fn new(side: f64) -> Result<Self, GeometryError> {
        if side > 0.0 && side.is_finite() {
            Ok(Torus { side })
        } else {
            Err(GeometryError::InvalidSide(side))
        }
    }

    /// Torus whose area is `area_ratio` times the area of a disc of radius
    /// `r_o`.
    pub fn from_area_ratio(area_ratio: f64, r_o: f64) -> Result<Self, GeometryError> {
        Torus::new((area_ratio * PI * r_o * r_o).sqrt())
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    fn wrap_coord(&self, v: f64) -> f64 {
        let w = v.rem_euclid(self.side);
        // rem_euclid can round up to exactly `side` for tiny negative inputs
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    /// Canonical representative of an arbitrary planar point.
    pub fn wrap(&self, x: f64, y: f64) -> Point {
        Point::new(self.wrap_coord(x), self.wrap_coord(y))
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }

    /// Minimal periodic displacement along one axis, in `[-side/2, side/2)`.
    /// An exact half-period tie resolves to the negative image.
    fn axis_delta(&self, from: f64, to: f64) -> f64 {
        let mut d = (to - from).rem_euclid(self.side);
        if d >= 0.5 * self.side {
            d -= self.side;
        }
        d
    }

    /// Displacement of the nearest periodic image of `to` as seen from
    /// `from`. Ties between equally near images pick the lexicographically
    /// smallest `(dx, dy)`.
    pub fn displacement(&self, from: Point, to: Point) -> (f64, f64) {
        (self.axis_delta(from.x, to.x), self.axis_delta(from.y, to.y))
    }

    pub fn distance_sq(&self, p: Point, q: Point) -> f64 {
        let mut dx = (p.x - q.x).abs();
        let mut dy = (p.y - q.y).abs();
        dx = dx.min(self.side - dx);
        dy = dy.min(self.side - dy);
        dx * dx + dy * dy
    }

    /// Minimum Euclidean distance over the periodic images.
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        self.distance_sq(p, q).sqrt()
    }

    /// Direction of the minimal displacement from `from` to `to`, in
    /// `[0, 2π)`.
    pub fn bearing(&self, from: Point, to: Point) -> Result<f64, GeometryError> {
        let (dx, dy) = self.displacement(from, to);
        if dx == 0.0 && dy == 0.0 {
            return Err(GeometryError::UndefinedBearing);
        }
        Ok(normalize_angle(dy.atan2(dx)))
    }
}

/// Maps any angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Disc-and-sector proximity parameters shared by every radio head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityModel {
    r_o: f64,
    theta: f64,
    sectors: usize,
    sector_offset: f64,
}

impl ProximityModel {
    pub fn new(
        r_o: f64,
        theta: f64,
        sectors: usize,
        sector_offset: f64,
    ) -> Result<Self, GeometryError> {
        if !(r_o > 0.0 && r_o.is_finite()) {
            return Err(GeometryError::InvalidRadius(r_o));
        }
        if !(theta > 0.0 && theta <= PI) {
            return Err(GeometryError::InvalidSpread(theta));
        }
        if sectors == 0 {
            return Err(GeometryError::NoSectors);
        }
        Ok(ProximityModel {
            r_o,
            theta,
            sectors,
            sector_offset: normalize_angle(sector_offset),
        })
    }

    /// Unsectorized model of radius `r_o`.
    pub fn omni(r_o: f64) -> Result<Self, GeometryError> {
        ProximityModel::new(r_o, PI, 1, 0.0)
    }

    pub fn r_o(&self) -> f64 {
        self.r_o
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn sector_offset(&self) -> f64 {
        self.sector_offset
    }

    /// Disc diameter `2 r_o`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.r_o
    }

    /// Disc area `π r_o²`.
    pub fn disc_area(&self) -> f64 {
        PI * self.r_o * self.r_o
    }
}

/// Strict disc test: distance below `r_o`.
pub fn in_proximity(t: &Torus, m: &ProximityModel, user: Point, rrh: Point) -> bool {
    t.distance_sq(user, rrh) < m.r_o * m.r_o
}

/// Whether the user arc `[bearing - θ, bearing + θ]` has a positive-length
/// intersection with sector `sector_index` of the model.
pub fn sector_overlap(m: &ProximityModel, bearing: f64, sector_index: usize) -> bool {
    debug_assert!(sector_index < m.sectors);
    arc_overlaps_sector(m.theta, m.sectors, m.sector_offset, bearing, sector_index)
}

/// [`sector_overlap`] with an explicit sector orientation, for sites whose
/// sector boundaries are rotated individually.
pub fn arc_overlaps_sector(
    theta: f64,
    sectors: usize,
    offset: f64,
    bearing: f64,
    sector_index: usize,
) -> bool {
    if sectors == 1 {
        return true;
    }
    let width = TAU / sectors as f64;
    let start = normalize_angle(bearing - theta - offset);
    let end = start + 2.0 * theta;
    let lo = sector_index as f64 * width;
    let hi = lo + width;
    // start lies in [0, 2π) and the arc is at most 2π long, so only the
    // unshifted and the -2π images can meet the sector
    (start < hi && end > lo) || (start - TAU < hi && end - TAU > lo)
}

/// Indices of all sectors overlapped by the arc centred on `bearing`.
pub fn overlapping_sectors(
    theta: f64,
    sectors: usize,
    offset: f64,
    bearing: f64,
) -> impl Iterator<Item = usize> {
    (0..sectors).filter(move |&s| arc_overlaps_sector(theta, sectors, offset, bearing, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn t10() -> Torus {
        Torus::new(10.0).unwrap()
    }

    #[test]
    fn distance_examples() {
        let t = t10();
        assert_abs_diff_eq!(t.distance(Point::new(0.0, 0.0), Point::new(9.0, 0.0)), 1.0);
        assert_abs_diff_eq!(
            t.distance(Point::new(0.0, 0.0), Point::new(5.0, 5.0)),
            50f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(t.distance(Point::new(2.0, 3.0), Point::new(2.0, 3.0)), 0.0);
    }

    #[test]
    fn bearing_examples() {
        let t = t10();
        let o = Point::new(0.0, 0.0);
        assert_abs_diff_eq!(t.bearing(o, Point::new(1.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            t.bearing(o, Point::new(0.0, 9.0)).unwrap(),
            1.5 * PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            t.bearing(o, Point::new(1.0, 1.0)).unwrap(),
            PI / 4.0,
            epsilon = 1e-12
        );
        assert_eq!(t.bearing(o, o), Err(GeometryError::UndefinedBearing));
    }

    #[test]
    fn half_period_tie_takes_negative_image() {
        let t = t10();
        let (dx, dy) = t.displacement(Point::new(0.0, 0.0), Point::new(5.0, 5.0));
        assert_eq!((dx, dy), (-5.0, -5.0));
        assert_abs_diff_eq!(
            t.bearing(Point::new(0.0, 0.0), Point::new(5.0, 0.0))
                .unwrap(),
            PI
        );
    }

    #[test]
    fn proximity_examples() {
        let t = t10();
        let m = ProximityModel::omni(1.784).unwrap();
        let o = Point::new(0.0, 3.0);
        assert!(in_proximity(&t, &m, o, Point::new(1.0, 3.0)));
        assert!(!in_proximity(&t, &m, o, Point::new(1.784, 3.0)));
        assert!(!in_proximity(&t, &m, o, Point::new(5.0, 3.0)));
    }

    #[test]
    fn sector_examples() {
        // arc [0, π/3] fills sector 0 and only touches its neighbours
        let m = ProximityModel::new(1.0, PI / 6.0, 6, 0.0).unwrap();
        assert!(sector_overlap(&m, PI / 6.0, 0));
        assert!(!sector_overlap(&m, PI / 6.0, 1));
        assert!(!sector_overlap(&m, PI / 6.0, 5));
        // arc [π/6, π/2] straddles the boundary at π/3
        let hits: Vec<_> = overlapping_sectors(PI / 6.0, 6, 0.0, PI / 3.0).collect();
        assert_eq!(hits, vec![0, 1]);
        let omni = ProximityModel::new(1.0, 0.3, 1, 0.0).unwrap();
        for b in [0.0, 1.0, 3.0, 6.0] {
            assert!(sector_overlap(&omni, b, 0));
        }
    }

    #[test]
    fn sector_wraps_past_zero() {
        // arc [-π/12, π/12] touches the last and first sectors
        let hits: Vec<_> = overlapping_sectors(PI / 12.0, 6, 0.0, 0.0).collect();
        assert_eq!(hits, vec![0, 5]);
    }

    #[test]
    fn full_spread_sees_every_sector() {
        for s in [2, 3, 6, 8] {
            for b in [0.0, 0.4, PI, 5.0] {
                assert_eq!(overlapping_sectors(PI, s, 0.3, b).count(), s);
            }
        }
    }

    #[test]
    fn aligned_arc_does_not_touch_neighbours() {
        // arc exactly equal to sector 0 of 4
        let hits: Vec<_> = overlapping_sectors(PI / 4.0, 4, 0.0, PI / 4.0).collect();
        assert_eq!(hits, vec![0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Torus::new(0.0).is_err());
        assert!(ProximityModel::new(0.0, 1.0, 1, 0.0).is_err());
        assert!(ProximityModel::new(1.0, 0.0, 1, 0.0).is_err());
        assert!(ProximityModel::new(1.0, 4.0, 1, 0.0).is_err());
        assert!(ProximityModel::new(1.0, 1.0, 0, 0.0).is_err());
    }

    fn pt(side: f64) -> impl Strategy<Value = Point> {
        (0.0..side, 0.0..side).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in pt(10.0), b in pt(10.0), c in pt(10.0)) {
            let t = t10();
            prop_assert_eq!(t.distance(a, b), t.distance(b, a));
            prop_assert!(t.distance(a, c) <= t.distance(a, b) + t.distance(b, c) + 1e-12);
            prop_assert!(t.distance(a, b) <= 10.0 * 2f64.sqrt() / 2.0 + 1e-12);
        }

        #[test]
        fn translation_invariance(a in pt(10.0), b in pt(10.0), sx in -20.0..20.0f64, sy in -20.0..20.0f64) {
            let t = t10();
            let a2 = t.wrap(a.x + sx, a.y + sy);
            let b2 = t.wrap(b.x + sx, b.y + sy);
            prop_assert!(t.contains(a2) && t.contains(b2));
            prop_assert!((t.distance(a, b) - t.distance(a2, b2)).abs() < 1e-9);
            let m = ProximityModel::omni(2.5).unwrap();
            let d = t.distance(a, b);
            if (d - 2.5).abs() > 1e-9 {
                prop_assert_eq!(in_proximity(&t, &m, a, b), in_proximity(&t, &m, a2, b2));
            }
            prop_assert_eq!(in_proximity(&t, &m, a, b), in_proximity(&t, &m, b, a));
            if d > 1e-6 {
                let diff = normalize_angle(t.bearing(a, b).unwrap() - t.bearing(a2, b2).unwrap());
                prop_assert!(!(1e-6..=TAU - 1e-6).contains(&diff));
            }
        }

        #[test]
        fn sector_width_spread_hits_one_or_two(s in 1usize..16, bearing in 0.0..TAU, offset in 0.0..TAU) {
            // arc as wide as one sector
            let theta = PI / s as f64;
            let n = overlapping_sectors(theta, s, offset, bearing).count();
            prop_assert!((1..=2).contains(&n), "{} sectors", n);
        }
    }
}

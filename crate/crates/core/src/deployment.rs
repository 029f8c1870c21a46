//! Placement of radio-head sites and active users.

use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{Point, ProximityModel, Torus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice needs at least one point per sublattice side")]
    EmptyLattice,
    #[error("lattice density beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("lattice disc diameter must be positive, got {0}")]
    InvalidDiameter(f64),
    #[error("{0} is not a lattice size (must equal 2c^2)")]
    NotLatticeSize(usize),
}

/// One slot's worth of positions.
#[derive(Debug, Clone)]
pub struct DeploymentSnapshot {
    pub torus: Torus,
    pub rrh_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub model: ProximityModel,
    /// Per-site sector orientation. Empty means every site uses the model's
    /// own offset.
    pub sector_offsets: Vec<f64>,
}

impl DeploymentSnapshot {
    pub fn new(
        torus: Torus,
        rrh_positions: Vec<Point>,
        user_positions: Vec<Point>,
        model: ProximityModel,
    ) -> Self {
        DeploymentSnapshot {
            torus,
            rrh_positions,
            user_positions,
            model,
            sector_offsets: Vec::new(),
        }
    }

    pub fn sector_offset(&self, rrh: usize) -> f64 {
        self.sector_offsets
            .get(rrh)
            .copied()
            .unwrap_or(self.model.sector_offset())
    }
}

/// `n` independent uniform points on the torus.
pub fn place_random<R: Rng + ?Sized>(t: &Torus, n: usize, rng: &mut R) -> Vec<Point> {
    let side = t.side();
    (0..n)
        .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .map(|p| t.wrap(p.x, p.y))
        .collect()
}

/// Two offset square sublattices with `c × c` points each, spaced `d/√β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    c: usize,
    beta: f64,
}

impl LatticeSpec {
    pub fn new(c: usize, beta: f64) -> Result<Self, LatticeError> {
        if c == 0 {
            return Err(LatticeError::EmptyLattice);
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(LatticeError::InvalidBeta(beta));
        }
        Ok(LatticeSpec { c, beta })
    }

    /// Lattice of `n = 2c²` points whose matched region has area
    /// `area_ratio` disc areas, for discs of diameter `d`.
    pub fn for_point_count(n: usize, area_ratio: f64) -> Result<Self, LatticeError> {
        let c = ((n as f64 / 2.0).sqrt()).round() as usize;
        if c == 0 || 2 * c * c != n {
            return Err(LatticeError::NotLatticeSize(n));
        }
        // A = c² d² / β and D = π d² / 4
        LatticeSpec::new(c, 4.0 * (c * c) as f64 / (PI * area_ratio))
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of points, `2c²`.
    pub fn point_count(&self) -> usize {
        2 * self.c * self.c
    }

    pub fn spacing(&self, d: f64) -> f64 {
        d / self.beta.sqrt()
    }

    /// Region area over disc area, `4c² / (πβ)`.
    pub fn area_ratio(&self) -> f64 {
        4.0 * (self.c * self.c) as f64 / (PI * self.beta)
    }

    fn build(&self, d: f64) -> Result<(Torus, Vec<Point>), LatticeError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(LatticeError::InvalidDiameter(d));
        }
        let s = self.spacing(d);
        let torus = Torus::new(self.c as f64 * s).map_err(|_| LatticeError::InvalidDiameter(d))?;
        let mut pts = Vec::with_capacity(self.point_count());
        for shift in [0.0, 0.5 * s] {
            for i in 0..self.c {
                for j in 0..self.c {
                    pts.push(torus.wrap(i as f64 * s + shift, j as f64 * s + shift));
                }
            }
        }
        Ok((torus, pts))
    }
}

/// Users at the disc centres of the lattice, on the matched torus.
pub fn place_user_lattice(spec: LatticeSpec, d: f64) -> Result<(Torus, Vec<Point>), LatticeError> {
    spec.build(d)
}

/// Radio-head sites on the same construction as [`place_user_lattice`].
pub fn place_rrh_lattice(spec: LatticeSpec, d: f64) -> Result<(Torus, Vec<Point>), LatticeError> {
    spec.build(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, StreamKey};
    use approx::assert_abs_diff_eq;

    #[test]
    fn random_placement_basics() {
        let t = Torus::new(10.0).unwrap();
        let mut rng = StreamKey::new(1).rng();
        assert!(place_random(&t, 0, &mut rng).is_empty());

        let key = StreamKey::new(99).trial(4).purpose(Purpose::UserPlacement);
        let a = place_random(&t, 3, &mut key.rng());
        let b = place_random(&t, 3, &mut key.rng());
        assert_eq!(a, b);
    }

    #[test]
    fn random_placement_mean() {
        let t = Torus::new(10.0).unwrap();
        let n = 100_000;
        let pts = place_random(&t, n, &mut StreamKey::new(5).rng());
        assert!(pts.iter().all(|p| t.contains(*p)));
        let mean = pts.iter().map(|p| p.x).sum::<f64>() / n as f64;
        // uniform on [0,10): sd = 10/√12
        let sigma = 10.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn lattice_examples() {
        let spec = LatticeSpec::new(3, 1.5).unwrap();
        let (_, pts) = place_user_lattice(spec, 2.0).unwrap();
        assert_eq!(pts.len(), 18);

        let spec = LatticeSpec::new(1, 2.0).unwrap();
        let (t, pts) = place_user_lattice(spec, 2.0).unwrap();
        assert_abs_diff_eq!(t.side(), 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0], Point::new(0.0, 0.0));
        assert_abs_diff_eq!(pts[1].x, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(pts[1].y, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn rrh_lattice_matches_user_lattice() {
        let spec = LatticeSpec::new(3, 0.8).unwrap();
        let (t1, a) = place_rrh_lattice(spec, 1.3).unwrap();
        let (t2, b) = place_rrh_lattice(spec, 1.3).unwrap();
        assert_eq!(a.len(), 18);
        assert_eq!(a, b);
        assert_eq!(t1, t2);
        let s = spec.spacing(1.3);
        assert_abs_diff_eq!(a[9].x - a[0].x, 0.5 * s, epsilon = 1e-12);
        assert_abs_diff_eq!(a[9].y - a[0].y, 0.5 * s, epsilon = 1e-12);
    }

    #[test]
    fn lattice_user_count_identity() {
        let d = 2.0;
        for c in 1..8 {
            for beta in [0.5, 1.0, 1.5, 2.0, 3.7] {
                let spec = LatticeSpec::new(c, beta).unwrap();
                let (t, pts) = place_user_lattice(spec, d).unwrap();
                let disc = PI * d * d / 4.0;
                let k = PI / 2.0 * beta * t.area() / disc;
                assert_abs_diff_eq!(k, pts.len() as f64, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lattice_points_distinct_with_expected_spacing() {
        for c in 2..6 {
            let spec = LatticeSpec::new(c, 1.3).unwrap();
            let d = 1.7;
            let (t, pts) = place_user_lattice(spec, d).unwrap();
            assert!(pts.iter().all(|p| t.contains(*p)));
            let mut min = f64::INFINITY;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    min = min.min(t.distance(pts[i], pts[j]));
                }
            }
            assert!(min > 0.0);
            assert_abs_diff_eq!(min, spec.spacing(d) * 2f64.sqrt() / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn lattice_for_point_count() {
        let spec = LatticeSpec::for_point_count(2048, 10.0).unwrap();
        assert_eq!(spec.c(), 32);
        assert_abs_diff_eq!(spec.area_ratio(), 10.0, epsilon = 1e-9);
        assert_eq!(
            LatticeSpec::for_point_count(2000, 10.0),
            Err(LatticeError::NotLatticeSize(2000))
        );
        assert!(LatticeSpec::new(0, 1.0).is_err());
        assert!(LatticeSpec::new(2, -1.0).is_err());
    }
}

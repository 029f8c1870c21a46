//! Upper bounds on the multiplexing gain per pilot RE (single pilot
//! dimension) from lattice-structured user scheduling.
//!
//! With discs of diameter `d` and area `D = πd²/4`, users sit on two offset
//! square sublattices of spacing `d/√β`, giving `K(β) = (π/2)·β·(A/D)`
//! scheduled users. A user is served when some site lands in the part of
//! its disc not covered by any other user disc, an area `λ(β)`
//! approximated by the square of side `d√(2/β) − d`.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("area ratio A/D must be positive and finite, got {0}")]
    BadAreaRatio(f64),
    #[error("empty beta grid")]
    EmptyGrid,
    #[error("beta {0} outside (0, 2]")]
    BetaOutOfRange(f64),
}

/// `π·(A/D)`: the gain when every disc is packed at `β = 2` with sites
/// everywhere.
pub fn m_max(area_ratio: f64) -> f64 {
    PI * area_ratio
}

/// Scheduled users on the matched lattice, `(π/2)·β·(A/D)`.
pub fn lattice_users(beta: f64, area_ratio: f64) -> f64 {
    0.5 * PI * beta * area_ratio
}

/// Area of the non-overlapped part of a user disc of area `disc_area`.
///
/// Square approximation, clamped to the disc area; zero for `β ≥ 2`.
/// Requires `beta > 0`.
pub fn lambda_area(beta: f64, disc_area: f64) -> f64 {
    if beta >= 2.0 {
        return 0.0;
    }
    let side = (2.0 / beta).sqrt() - 1.0;
    (4.0 / PI * disc_area * side * side).min(disc_area)
}

/// Probability that at least one of `n` uniform sites lands in the
/// non-overlapped region, `1 − (1 − λ/A)^N`.
pub fn p1(beta: f64, n: u64, area_ratio: f64) -> f64 {
    let frac = lambda_area(beta, 1.0) / area_ratio;
    if n == 0 || frac <= 0.0 {
        return 0.0;
    }
    if frac >= 1.0 {
        return 1.0;
    }
    -((n as f64) * (-frac).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub area_ratio: f64,
    pub sites: u64,
    pub beta_grid: Vec<f64>,
}

impl BoundParams {
    pub fn new(area_ratio: f64, sites: u64) -> Self {
        BoundParams {
            area_ratio,
            sites,
            beta_grid: default_beta_grid(),
        }
    }
}

/// 128 log-spaced points on `[0.5, 2]`.
pub fn default_beta_grid() -> Vec<f64> {
    let n = 128;
    let (lo, hi) = (0.5f64.ln(), 2f64.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = 0.5;
    g[n - 1] = 2.0;
    g
}

/// Maximizer of the lattice scheduling gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBound {
    pub gain: f64,
    pub beta: f64,
}

/// `max_β K(β)·p₁(β, N)` over the grid; ties resolve toward smaller `β`.
pub fn lattice_bound(params: &BoundParams) -> Result<LatticeBound, BoundsError> {
    if !(params.area_ratio > 0.0 && params.area_ratio.is_finite()) {
        return Err(BoundsError::BadAreaRatio(params.area_ratio));
    }
    if params.beta_grid.is_empty() {
        return Err(BoundsError::EmptyGrid);
    }
    let mut best: Option<LatticeBound> = None;
    for &beta in &params.beta_grid {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(BoundsError::BetaOutOfRange(beta));
        }
        let gain =
            lattice_users(beta, params.area_ratio) * p1(beta, params.sites, params.area_ratio);
        best = match best {
            Some(b) if b.gain > gain || (b.gain == gain && b.beta <= beta) => Some(b),
            _ => Some(LatticeBound { gain, beta }),
        };
    }
    Ok(best.expect("non-empty grid"))
}

//! Lattice scheduling checks against closed forms.

use rrhsim::bounds::{lattice_bound, m_max, p1, BoundParams};
use rrhsim::deployment::LatticeSpec;
use rrhsim::serving::{measure_lattice_users, optimize_k, GainConfig, RrhLayout};
use rrhsim::StreamKey;

/// At β = 0.5 neighbouring discs only touch, so a lattice user is served
/// exactly when some site falls in its own disc.
#[test]
fn sparse_lattice_matches_exact_p1() {
    for (c, sites) in [(2usize, 10usize), (3, 25), (4, 60)] {
        let spec = LatticeSpec::new(c, 0.5).unwrap();
        let exact = p1(0.5, sites as u64, spec.area_ratio());
        let sim = measure_lattice_users(spec, 1.0, sites, 4000, StreamKey::new(c as u64)).unwrap();
        assert!(
            (sim.mean - exact).abs() <= 4.0 * sim.stderr.max(1e-3),
            "c={c} N={sites}: simulated {} vs exact {exact}",
            sim.mean
        );
    }
}

/// The square approximation of the free area never exceeds the true free
/// area, so the analytic p1 is a lower estimate of the served fraction.
#[test]
fn square_approximation_is_conservative() {
    let spec = LatticeSpec::new(4, 1.5).unwrap();
    let analytic = p1(1.5, 200, spec.area_ratio());
    let sim = measure_lattice_users(spec, 1.0, 200, 2000, StreamKey::new(5)).unwrap();
    assert!(sim.mean + 3.0 * sim.stderr >= analytic);
}

#[test]
fn no_sites_serve_nobody() {
    let spec = LatticeSpec::new(3, 1.0).unwrap();
    let sim = measure_lattice_users(spec, 1.0, 0, 10, StreamKey::new(1)).unwrap();
    assert_eq!(sim.mean, 0.0);
}

#[test]
fn lattice_rrh_gain_stays_below_bound() {
    let mut cfg = GainConfig::new(10.0, 128, 0, 8, 1);
    cfg.layout = RrhLayout::Lattice;
    let opt = optimize_k(&cfg, &[40, 80, 160], 30, StreamKey::new(2)).unwrap();
    assert!(opt.best.gain.mean < m_max(10.0));
    assert!(lattice_bound(&BoundParams::new(10.0, 128)).unwrap().gain < m_max(10.0));
}

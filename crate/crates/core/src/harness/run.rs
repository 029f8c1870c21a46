//! Scenario sweeps.

use std::cmp::Ordering;
use std::f64::consts::PI;

use super::config::{ExperimentConfig, Scenario};
use super::HarnessError;
use crate::bounds::{lattice_bound, m_max, p1, BoundParams};
use crate::deployment::LatticeSpec;
use crate::phy::{mixed_pattern, or_agreement_with, PhyParams};
use crate::pilotcode::{capacity, efficiency, enumerate_codewords, min_ell};
use crate::rng::StreamKey;
use crate::serving::{measure_lattice_users, optimize_k, GainConfig, KOptimum, RrhLayout};
use crate::stats::Estimate;

/// Swept parameter values of one row; `None` for axes the scenario does not
/// use.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Axes {
    pub sites: Option<usize>,
    pub users: Option<usize>,
    pub q: Option<usize>,
    pub pilots: Option<usize>,
    pub theta: Option<f64>,
    pub sectors: Option<usize>,
    pub ones: Option<usize>,
    pub ell: Option<usize>,
    pub beta: Option<f64>,
    pub antennas: Option<usize>,
    pub snr_db: Option<f64>,
}

fn cmp_f(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.is_some().cmp(&b.is_some()),
    }
}

impl Axes {
    /// Canonical order: N, K, q, Q, theta, S, L, ell, beta, M, snr_db.
    pub fn canonical_cmp(&self, o: &Axes) -> Ordering {
        self.sites
            .cmp(&o.sites)
            .then(self.users.cmp(&o.users))
            .then(self.q.cmp(&o.q))
            .then(self.pilots.cmp(&o.pilots))
            .then(cmp_f(self.theta, o.theta))
            .then(self.sectors.cmp(&o.sectors))
            .then(self.ones.cmp(&o.ones))
            .then(self.ell.cmp(&o.ell))
            .then(cmp_f(self.beta, o.beta))
            .then(self.antennas.cmp(&o.antennas))
            .then(cmp_f(self.snr_db, o.snr_db))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: Scenario,
    pub axes: Axes,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl ResultRow {
    fn new(scenario: Scenario, axes: Axes, metric: &'static str, est: Estimate) -> Self {
        ResultRow {
            scenario,
            axes,
            metric,
            value: est.mean,
            stderr: est.stderr,
            trials: est.samples,
        }
    }

    fn exact(scenario: Scenario, axes: Axes, metric: &'static str, value: f64) -> Self {
        ResultRow {
            scenario,
            axes,
            metric,
            value,
            stderr: 0.0,
            trials: 0,
        }
    }

    pub fn canonical_cmp(&self, o: &ResultRow) -> Ordering {
        self.scenario
            .cmp(&o.scenario)
            .then_with(|| self.axes.canonical_cmp(&o.axes))
            .then(self.metric.cmp(o.metric))
    }
}

/// Runs every grid point of `cfg`; rows come back in canonical order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let key = StreamKey::new(cfg.seed);
    let mut rows = match cfg.scenario {
        Scenario::RandomRandom | Scenario::LatticeRrh | Scenario::Sectorized => {
            gain_rows(cfg, key)?
        }
        Scenario::LatticeUsers => lattice_user_rows(cfg, key)?,
        Scenario::CodeEfficiency => code_rows(cfg),
        Scenario::PhyValidation => phy_rows(cfg, key)?,
    };
    rows.sort_by(|a, b| a.canonical_cmp(b));
    Ok(rows)
}

fn gain_template(
    cfg: &ExperimentConfig,
    sites: usize,
    q: usize,
    theta: f64,
    sectors: usize,
) -> GainConfig {
    let mut g =
        GainConfig::new(cfg.area_ratio, sites, 0, cfg.pilots, q).with_sectors(sectors, theta);
    g.r_o = cfg.r_o;
    g.redraw_sites = cfg.rrh_redraw;
    g.assignment = cfg.group_assignment.into();
    g.random_sector_offsets = cfg.random_sector_offsets;
    if cfg.scenario == Scenario::LatticeRrh {
        g.layout = RrhLayout::Lattice;
    }
    g
}

fn point_key(key: StreamKey, sites: usize, q: usize, theta: f64, sectors: usize) -> StreamKey {
    key.child(sites as u64)
        .child(q as u64)
        .child_f64(theta)
        .child(sectors as u64)
}

fn gain_rows(cfg: &ExperimentConfig, key: StreamKey) -> Result<Vec<ResultRow>, HarnessError> {
    let grid = cfg.k_grid();
    let mut rows = Vec::new();
    for &n in &cfg.sites {
        for &q in &cfg.q {
            for &theta in &cfg.theta {
                for &s in &cfg.sectors {
                    let template = gain_template(cfg, n, q, theta, s);
                    let opt =
                        optimize_k(&template, &grid, cfg.trials, point_key(key, n, q, theta, s))?;
                    let axes = Axes {
                        sites: Some(n),
                        q: Some(q),
                        pilots: Some(cfg.pilots),
                        theta: Some(theta),
                        sectors: Some(s),
                        ..Axes::default()
                    };
                    for (k, r) in &opt.curve {
                        let at = Axes {
                            users: Some(*k),
                            ..axes
                        };
                        rows.push(ResultRow::new(cfg.scenario, at, "gain", r.gain));
                        rows.push(ResultRow::new(
                            cfg.scenario,
                            at,
                            "collision_probability",
                            r.collision,
                        ));
                    }
                    let at = Axes {
                        users: Some(opt.k_star),
                        ..axes
                    };
                    rows.push(ResultRow::new(cfg.scenario, at, "gain_opt", opt.best.gain));
                }
            }
        }
    }
    if let Some(target_sites) = cfg.match_omni_sites {
        rows.extend(match_rows(cfg, key, &grid, target_sites)?);
    }
    Ok(rows)
}

fn match_rows(
    cfg: &ExperimentConfig,
    key: StreamKey,
    grid: &[usize],
    target_sites: usize,
) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rows = Vec::new();
    for &q in &cfg.q {
        let omni = gain_template(cfg, target_sites, q, PI, 1);
        let target = optimize_k(
            &omni,
            grid,
            cfg.trials,
            point_key(key, target_sites, q, PI, 1),
        )?;
        rows.push(ResultRow::new(
            cfg.scenario,
            Axes {
                sites: Some(target_sites),
                users: Some(target.k_star),
                q: Some(q),
                pilots: Some(cfg.pilots),
                theta: Some(PI),
                sectors: Some(1),
                ..Axes::default()
            },
            "omni_target",
            target.best.gain,
        ));
        for &theta in &cfg.theta {
            for &s in &cfg.sectors {
                let template = gain_template(cfg, 0, q, theta, s);
                let found = sites_to_match(
                    &template,
                    target.best.gain.mean,
                    grid,
                    cfg.trials,
                    key,
                    target_sites,
                )?;
                let (sites, users, value) = match &found {
                    Some(m) => (Some(m.sites), Some(m.optimum.k_star), m.sites as f64),
                    None => (None, None, f64::NAN),
                };
                rows.push(ResultRow::exact(
                    cfg.scenario,
                    Axes {
                        sites,
                        users,
                        q: Some(q),
                        pilots: Some(cfg.pilots),
                        theta: Some(theta),
                        sectors: Some(s),
                        ..Axes::default()
                    },
                    "sites_to_match",
                    value,
                ));
            }
        }
    }
    Ok(rows)
}

/// First site count whose optimized gain reaches a target.
#[derive(Debug, Clone, PartialEq)]
pub struct SitesMatch {
    pub sites: usize,
    pub optimum: KOptimum,
}

/// Scans `N = 1, 2, …, max_sites` with the settings of `template` and stops
/// at the first `N` whose optimized gain is at least `target`.
///
/// Each `N` uses the same sub-stream as a sweep point with that site count.
pub fn sites_to_match(
    template: &GainConfig,
    target: f64,
    k_grid: &[usize],
    trials: usize,
    key: StreamKey,
    max_sites: usize,
) -> Result<Option<SitesMatch>, HarnessError> {
    for n in 1..=max_sites {
        let cfg = GainConfig {
            sites: n,
            ..template.clone()
        };
        let k = point_key(key, n, cfg.group_size, cfg.theta, cfg.sectors);
        let optimum = optimize_k(&cfg, k_grid, trials, k)?;
        if optimum.best.gain.mean >= target {
            return Ok(Some(SitesMatch { sites: n, optimum }));
        }
    }
    Ok(None)
}

/// Sublattice side whose matched area ratio is closest to `area_ratio` at
/// density `beta`.
fn lattice_side(beta: f64, area_ratio: f64) -> usize {
    ((PI * beta * area_ratio / 4.0).sqrt().round() as usize).max(1)
}

fn lattice_user_rows(
    cfg: &ExperimentConfig,
    key: StreamKey,
) -> Result<Vec<ResultRow>, HarnessError> {
    let sc = cfg.scenario;
    let mut rows = Vec::new();
    for &n in &cfg.sites {
        let axes = Axes {
            sites: Some(n),
            ..Axes::default()
        };
        rows.push(ResultRow::exact(sc, axes, "m_max", m_max(cfg.area_ratio)));
        let b = lattice_bound(&BoundParams::new(cfg.area_ratio, n as u64))?;
        rows.push(ResultRow::exact(
            sc,
            Axes {
                beta: Some(b.beta),
                ..axes
            },
            "lattice_bound",
            b.gain,
        ));
        for &beta in cfg.beta.as_deref().unwrap_or_default() {
            let spec = LatticeSpec::new(lattice_side(beta, cfg.area_ratio), beta)?;
            let at = Axes {
                users: Some(spec.point_count()),
                beta: Some(beta),
                ..axes
            };
            rows.push(ResultRow::exact(
                sc,
                at,
                "p1_analytic",
                p1(beta, n as u64, spec.area_ratio()),
            ));
            let sim = measure_lattice_users(
                spec,
                cfg.r_o,
                n,
                cfg.trials,
                key.child(n as u64).child_f64(beta),
            )?;
            rows.push(ResultRow::new(sc, at, "p1_simulated", sim));
        }
    }
    Ok(rows)
}

fn code_rows(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    let sc = cfg.scenario;
    let mut rows = Vec::new();
    for &l in &cfg.ones {
        for &k in cfg.users.as_deref().unwrap_or_default() {
            let ell = min_ell(k as u64, l);
            let axes = Axes {
                users: Some(k),
                ones: Some(l),
                ell: Some(ell),
                ..Axes::default()
            };
            rows.push(ResultRow::exact(sc, axes, "ell", ell as f64));
            rows.push(ResultRow::exact(
                sc,
                axes,
                "efficiency",
                efficiency(k as u64, l),
            ));
        }
        for &ell in cfg.ell.as_deref().unwrap_or_default() {
            let axes = Axes {
                ones: Some(l),
                ell: Some(ell),
                ..Axes::default()
            };
            rows.push(ResultRow::exact(
                sc,
                axes,
                "capacity",
                capacity(l, ell) as f64,
            ));
        }
    }
    rows
}

fn phy_rows(cfg: &ExperimentConfig, key: StreamKey) -> Result<Vec<ResultRow>, HarnessError> {
    let sc = cfg.scenario;
    let ells: Vec<Option<usize>> = match &cfg.ell {
        Some(e) => e.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    for &l in &cfg.ones {
        for &k in cfg.users.as_deref().unwrap_or_default() {
            for &ell in &ells {
                let ell = ell.unwrap_or_else(|| min_ell(k as u64, l));
                let code = enumerate_codewords(l, ell, k as u64)?;
                for &m in &cfg.antennas {
                    let params = PhyParams::from_snr_db(m, cfg.snr_db)?;
                    let pk = key
                        .child(l as u64)
                        .child(k as u64)
                        .child(ell as u64)
                        .child(m as u64);
                    let agree = or_agreement_with(&params, &code, cfg.trials, pk, |rng| {
                        mixed_pattern(k, rng)
                    })?;
                    let axes = Axes {
                        users: Some(k),
                        ones: Some(l),
                        ell: Some(ell),
                        antennas: Some(m),
                        snr_db: Some(cfg.snr_db),
                        ..Axes::default()
                    };
                    rows.push(ResultRow::new(sc, axes, "or_agreement", agree.per_re));
                    rows.push(ResultRow::new(sc, axes, "decode_agreement", agree.decode));
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn gain_sweep_emits_curve_and_optimum() {
        let c = cfg("scenario = \"random_random\"\nN = [20]\nK = [1, 8, 30]\ntrials = 5\n");
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 3 * 2 + 1);
        let opt: Vec<_> = rows.iter().filter(|r| r.metric == "gain_opt").collect();
        assert_eq!(opt.len(), 1);
        let best = rows
            .iter()
            .filter(|r| r.metric == "gain")
            .map(|r| r.value)
            .fold(f64::MIN, f64::max);
        assert_eq!(opt[0].value, best);
        assert!(rows
            .windows(2)
            .all(|w| w[0].canonical_cmp(&w[1]) != Ordering::Greater));
    }

    #[test]
    fn sweep_is_deterministic() {
        let c = cfg("scenario = \"sectorized\"\nN = [15]\nK = [5, 20]\nS = [1, 4]\ntheta = [0.5]\ntrials = 4\nseed = 9\n");
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn code_rows_match_closed_forms() {
        let c = cfg("scenario = \"code_efficiency\"\nL = [5]\nK = [1, 6, 10]\nell = [2]\n");
        let rows = run_experiment(&c).unwrap();
        let eff = |k| {
            rows.iter()
                .find(|r| r.metric == "efficiency" && r.axes.users == Some(k))
                .unwrap()
                .value
        };
        assert_eq!(eff(1), 1.0);
        assert!((eff(6) - 5.0 / 6.0).abs() < 1e-12);
        assert!((eff(10) - 5.0 / 7.0).abs() < 1e-12);
        let cap = rows.iter().find(|r| r.metric == "capacity").unwrap();
        assert_eq!(cap.value, 21.0);
    }

    #[test]
    fn lattice_user_rows_include_bound() {
        let c = cfg("scenario = \"lattice_users\"\nN = [0, 100]\nbeta = [0.5]\ntrials = 3\n");
        let rows = run_experiment(&c).unwrap();
        let bound0 = rows
            .iter()
            .find(|r| r.metric == "lattice_bound" && r.axes.sites == Some(0))
            .unwrap();
        assert_eq!(bound0.value, 0.0);
        assert!(rows.iter().any(|r| r.metric == "p1_simulated"));
    }

    #[test]
    fn match_scan_finds_trivial_target() {
        let template = GainConfig::new(10.0, 0, 0, 1, 1);
        let m = sites_to_match(&template, 0.0, &[1], 2, StreamKey::new(1), 5)
            .unwrap()
            .unwrap();
        assert_eq!(m.sites, 1);
        assert!(
            sites_to_match(&template, 1e9, &[1], 2, StreamKey::new(1), 3)
                .unwrap()
                .is_none()
        );
    }
}

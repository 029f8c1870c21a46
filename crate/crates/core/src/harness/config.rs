//! Experiment configuration files.
//!
//! A config is a flat TOML table. Scalars are typed; sweep axes are arrays.
//! Unknown keys are rejected.
//!
//! ```toml
//! scenario = "random_random"
//! area_ratio = 10.0
//! Q = 8
//! q = [1, 2, 4, 8]
//! N = [32, 128, 512, 2048]
//! trials = 100
//! seed = 1
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use super::HarnessError;
use crate::serving::{default_k_grid, GroupAssignment};

/// Environment variable that overrides the configured master seed.
pub const SEED_ENV: &str = "RRHSIM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RandomRandom,
    LatticeUsers,
    LatticeRrh,
    Sectorized,
    CodeEfficiency,
    PhyValidation,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::RandomRandom => "random_random",
            Scenario::LatticeUsers => "lattice_users",
            Scenario::LatticeRrh => "lattice_rrh",
            Scenario::Sectorized => "sectorized",
            Scenario::CodeEfficiency => "code_efficiency",
            Scenario::PhyValidation => "phy_validation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    #[default]
    Random,
    Balanced,
}

impl From<Assignment> for GroupAssignment {
    fn from(a: Assignment) -> Self {
        match a {
            Assignment::Random => GroupAssignment::Random,
            Assignment::Balanced => GroupAssignment::Balanced,
        }
    }
}

fn default_area_ratio() -> f64 {
    10.0
}

fn default_r_o() -> f64 {
    1.0
}

fn default_pilots() -> usize {
    8
}

fn default_q() -> Vec<usize> {
    vec![1]
}

fn default_theta() -> Vec<f64> {
    vec![PI]
}

fn default_sectors() -> Vec<usize> {
    vec![1]
}

fn default_trials() -> usize {
    100
}

fn default_snr_db() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// `A/D`.
    #[serde(default = "default_area_ratio")]
    pub area_ratio: f64,
    #[serde(default = "default_r_o")]
    pub r_o: f64,
    /// Pilot REs per RB.
    #[serde(rename = "Q", default = "default_pilots")]
    pub pilots: usize,
    /// Pilot group sizes.
    #[serde(default = "default_q")]
    pub q: Vec<usize>,
    /// Site counts.
    #[serde(rename = "N", default)]
    pub sites: Vec<usize>,
    /// Scheduled users for gain scenarios (defaults to a geometric grid),
    /// or code sizes for the code and phy scenarios.
    #[serde(rename = "K", default)]
    pub users: Option<Vec<usize>>,
    /// Angular spreads in radians (half-width of the arc around the line of
    /// sight).
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
    #[serde(rename = "S", default = "default_sectors")]
    pub sectors: Vec<usize>,
    /// Code weights.
    #[serde(rename = "L", default)]
    pub ones: Vec<usize>,
    /// Code zero counts; derived from `K` and `L` when absent.
    #[serde(default)]
    pub ell: Option<Vec<usize>>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    /// Antenna counts.
    #[serde(rename = "M", default)]
    pub antennas: Vec<usize>,
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub rrh_redraw: bool,
    #[serde(default)]
    pub group_assignment: Assignment,
    #[serde(default)]
    pub random_sector_offsets: bool,
    /// For `sectorized`: also report the smallest site count whose gain
    /// reaches the omni gain at this many sites.
    #[serde(default)]
    pub match_omni_sites: Option<usize>,
}

fn bad(field: &'static str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field,
        reason: reason.into(),
    }
}

fn nonempty<T>(field: &'static str, v: &[T]) -> Result<(), HarnessError> {
    if v.is_empty() {
        return Err(bad(field, "must not be empty"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        ExperimentConfig::parse(&text)
    }

    /// Replaces the seed with `RRHSIM_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), HarnessError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                bad(
                    "seed",
                    format!("{SEED_ENV}={v:?} is not an unsigned integer"),
                )
            })?;
        }
        Ok(())
    }

    /// The `K` grid for gain scenarios.
    pub fn k_grid(&self) -> Vec<usize> {
        match &self.users {
            Some(k) => k.clone(),
            None => default_k_grid(self.pilots, self.area_ratio),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1"));
        }
        if !(self.area_ratio > 0.0 && self.area_ratio.is_finite()) {
            return Err(bad("area_ratio", "must be positive and finite"));
        }
        if !(self.r_o > 0.0 && self.r_o.is_finite()) {
            return Err(bad("r_o", "must be positive and finite"));
        }
        if let Some(k) = &self.users {
            nonempty("K", k)?;
        }
        match self.scenario {
            Scenario::RandomRandom | Scenario::LatticeRrh | Scenario::Sectorized => {
                nonempty("N", &self.sites)?;
                nonempty("q", &self.q)?;
                nonempty("theta", &self.theta)?;
                nonempty("S", &self.sectors)?;
                if self.pilots == 0 {
                    return Err(bad("Q", "must be at least 1"));
                }
                if let Some(&q) = self
                    .q
                    .iter()
                    .find(|&&q| q == 0 || !self.pilots.is_multiple_of(q))
                {
                    return Err(bad("q", format!("{q} does not divide Q = {}", self.pilots)));
                }
                if let Some(&t) = self.theta.iter().find(|&&t| !(t > 0.0 && t <= PI)) {
                    return Err(bad("theta", format!("{t} outside (0, pi]")));
                }
                if self.sectors.contains(&0) {
                    return Err(bad("S", "sector counts must be at least 1"));
                }
                if self.scenario == Scenario::LatticeRrh {
                    if let Some(&n) = self.sites.iter().find(|&&n| !is_lattice_size(n)) {
                        return Err(bad("N", format!("{n} is not of the form 2c^2")));
                    }
                }
                if self.match_omni_sites.is_some() && self.scenario != Scenario::Sectorized {
                    return Err(bad(
                        "match_omni_sites",
                        "only valid for the sectorized scenario",
                    ));
                }
            }
            Scenario::LatticeUsers => {
                nonempty("N", &self.sites)?;
                if let Some(b) = &self.beta {
                    nonempty("beta", b)?;
                    if let Some(&x) = b.iter().find(|&&x| !(x > 0.0 && x <= 2.0)) {
                        return Err(bad("beta", format!("{x} outside (0, 2]")));
                    }
                }
            }
            Scenario::CodeEfficiency | Scenario::PhyValidation => {
                nonempty("L", &self.ones)?;
                if self.ones.contains(&0) {
                    return Err(bad("L", "code weight must be at least 1"));
                }
                let k = self
                    .users
                    .as_deref()
                    .ok_or_else(|| bad("K", "required for code scenarios"))?;
                if k.contains(&0) {
                    return Err(bad("K", "code sizes must be at least 1"));
                }
                if let Some(e) = &self.ell {
                    nonempty("ell", e)?;
                }
                if self.scenario == Scenario::PhyValidation {
                    nonempty("M", &self.antennas)?;
                    if self.antennas.contains(&0) {
                        return Err(bad("M", "antenna counts must be at least 1"));
                    }
                    if !self.snr_db.is_finite() {
                        return Err(bad("snr_db", "must be finite"));
                    }
                }
            }
        }
        if self.users.is_none() && self.k_grid().is_empty() {
            return Err(bad("K", "must not be empty"));
        }
        Ok(())
    }
}

fn is_lattice_size(n: usize) -> bool {
    let c = ((n as f64 / 2.0).sqrt()).round() as usize;
    c > 0 && 2 * c * c == n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: HarnessError) -> &'static str {
        match e {
            HarnessError::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_gain_config() {
        let c = ExperimentConfig::parse("scenario = \"random_random\"\nN = [10]\n").unwrap();
        assert_eq!(c.pilots, 8);
        assert_eq!(c.q, vec![1]);
        assert_eq!(c.trials, 100);
        assert_eq!(c.k_grid(), default_k_grid(8, 10.0));
    }

    #[test]
    fn empty_k_grid_is_rejected() {
        let e = ExperimentConfig::parse("scenario = \"random_random\"\nN = [10]\nK = []\n")
            .unwrap_err();
        assert_eq!(field_of(e), "K");
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("scenario = \"random_random\"\n", "N"),
            (
                "scenario = \"random_random\"\nN = [4]\ntrials = 0\n",
                "trials",
            ),
            ("scenario = \"random_random\"\nN = [4]\nq = [3]\n", "q"),
            (
                "scenario = \"sectorized\"\nN = [4]\ntheta = [4.0]\n",
                "theta",
            ),
            ("scenario = \"lattice_rrh\"\nN = [10]\n", "N"),
            ("scenario = \"code_efficiency\"\nL = [5]\n", "K"),
            ("scenario = \"phy_validation\"\nL = [2]\nK = [3]\n", "M"),
            (
                "scenario = \"lattice_users\"\nN = [4]\nbeta = [2.5]\n",
                "beta",
            ),
        ];
        for (text, field) in cases {
            assert_eq!(
                field_of(ExperimentConfig::parse(text).unwrap_err()),
                field,
                "{text}"
            );
        }
    }

    #[test]
    fn unknown_keys_and_bad_scenarios_fail_to_parse() {
        assert!(matches!(
            ExperimentConfig::parse("scenario = \"random_random\"\nN = [4]\nbogus = 1\n"),
            Err(HarnessError::Parse(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("scenario = \"nope\"\n"),
            Err(HarnessError::Parse(_))
        ));
    }
}

//! Proximity graphs, the pilot-collision serving rule, and multiplexing-gain
//! estimation.
//!
//! A serving node is a radio-head site, or a (site, sector) pair when sites
//! are sectorized. Node `j` sees the set of active users within `r_o`
//! (and, when sectorized, whose angular arc overlaps the sector). Users are
//! split into `Q/q` pilot groups; per group, a node serves all of its
//! proximate users of that group if there are at most `q` of them, and none
//! otherwise. A user counts as served when at least one node serves it.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::deployment::{
    place_random, place_rrh_lattice, place_user_lattice, DeploymentSnapshot, LatticeError,
    LatticeSpec,
};
use crate::geometry::{overlapping_sectors, GeometryError, Point, ProximityModel, Torus};
use crate::rng::{Purpose, StreamKey};
use crate::stats::{Estimate, RunningStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServingError {
    #[error("pilot group size q={q} must be positive and divide Q={pilots}")]
    BadGroupSize { pilots: usize, q: usize },
    #[error("user {user} assigned to group {group}, but only {groups} groups exist")]
    GroupOutOfRange {
        user: usize,
        group: usize,
        groups: usize,
    },
    #[error("grouping covers {grouped} users, graph has {users}")]
    UserCountMismatch { grouped: usize, users: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("empty K grid")]
    EmptyGrid,
    #[error("area ratio must be positive, got {0}")]
    BadAreaRatio(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Bucket grid over site positions, for neighbour queries within `r_o`.
#[derive(Debug, Clone)]
pub struct SiteIndex {
    cells_per_axis: usize,
    cell_size: f64,
    starts: Vec<usize>,
    sites: Vec<usize>,
}

impl SiteIndex {
    pub fn new(torus: &Torus, sites: &[Point], radius: f64) -> Self {
        let mut n = (torus.side() / radius).floor() as usize;
        // fewer than three buckets per axis would make the 3x3 scan revisit cells
        if n < 3 {
            n = 1;
        }
        let cell_size = torus.side() / n as f64;
        let cell_of = |p: &Point| {
            let cx = ((p.x / cell_size) as usize).min(n - 1);
            let cy = ((p.y / cell_size) as usize).min(n - 1);
            cx * n + cy
        };
        let mut counts = vec![0usize; n * n + 1];
        for p in sites {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0usize; sites.len()];
        for (j, p) in sites.iter().enumerate() {
            let c = cell_of(p);
            order[fill[c]] = j;
            fill[c] += 1;
        }
        SiteIndex {
            cells_per_axis: n,
            cell_size,
            starts,
            sites: order,
        }
    }

    /// Calls `f` with every site index whose bucket neighbours `p`'s bucket.
    /// A superset of the sites within `radius` of `p`.
    pub fn for_each_candidate(&self, p: Point, mut f: impl FnMut(usize)) {
        let n = self.cells_per_axis;
        if n == 1 {
            self.sites.iter().for_each(|&j| f(j));
            return;
        }
        let cx = ((p.x / self.cell_size) as usize).min(n - 1);
        let cy = ((p.y / self.cell_size) as usize).min(n - 1);
        for dx in [n - 1, 0, 1] {
            let x = (cx + dx) % n;
            for dy in [n - 1, 0, 1] {
                let c = x * n + (cy + dy) % n;
                self.sites[self.starts[c]..self.starts[c + 1]]
                    .iter()
                    .for_each(|&j| f(j));
            }
        }
    }
}

/// Compressed node → proximate-user adjacency for one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    users: usize,
    sites: usize,
    sectors: usize,
    offsets: Vec<usize>,
    adjacent: Vec<usize>,
}

impl ProximityGraph {
    /// Graph from explicit `(node, user)` edges.
    pub fn from_edges(
        users: usize,
        sites: usize,
        sectors: usize,
        edges: &[(usize, usize)],
    ) -> Self {
        let nodes = sites * sectors;
        let mut offsets = vec![0usize; nodes + 1];
        for &(node, _) in edges {
            offsets[node + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut adjacent = vec![0usize; edges.len()];
        for &(node, user) in edges {
            adjacent[fill[node]] = user;
            fill[node] += 1;
        }
        for n in 0..nodes {
            adjacent[offsets[n]..offsets[n + 1]].sort_unstable();
        }
        ProximityGraph {
            users,
            sites,
            sectors,
            offsets,
            adjacent,
        }
    }

    pub fn user_count(&self) -> usize {
        self.users
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn node_count(&self) -> usize {
        self.sites * self.sectors
    }

    pub fn node_id(&self, site: usize, sector: usize) -> usize {
        site * self.sectors + sector
    }

    /// Proximate users of `node`, ascending.
    pub fn users_of(&self, node: usize) -> &[usize] {
        &self.adjacent[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacent.len()
    }
}

/// Builds the slot's proximity graph.
pub fn build_graph(snap: &DeploymentSnapshot) -> ProximityGraph {
    let index = SiteIndex::new(&snap.torus, &snap.rrh_positions, snap.model.r_o());
    build_graph_indexed(snap, &index)
}

/// [`build_graph`] reusing a prebuilt index over `snap.rrh_positions`.
pub fn build_graph_indexed(snap: &DeploymentSnapshot, index: &SiteIndex) -> ProximityGraph {
    let t = &snap.torus;
    let m = &snap.model;
    let r2 = m.r_o() * m.r_o();
    let sectors = m.sectors();
    let mut edges = Vec::new();
    for (k, &u) in snap.user_positions.iter().enumerate() {
        index.for_each_candidate(u, |j| {
            let site = snap.rrh_positions[j];
            if t.distance_sq(u, site) >= r2 {
                return;
            }
            if sectors == 1 {
                edges.push((j, k));
                return;
            }
            match t.bearing(site, u) {
                Ok(b) => {
                    for s in overlapping_sectors(m.theta(), sectors, snap.sector_offset(j), b) {
                        edges.push((j * sectors + s, k));
                    }
                }
                // user on top of the site: every sector sees it
                Err(_) => {
                    for s in 0..sectors {
                        edges.push((j * sectors + s, k));
                    }
                }
            }
        });
    }
    ProximityGraph::from_edges(
        snap.user_positions.len(),
        snap.rrh_positions.len(),
        sectors,
        &edges,
    )
}

/// Split of `Q` pilot REs into `Q/q` groups and the group of each user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotGrouping {
    pilots: usize,
    group_size: usize,
    group_of_user: Vec<usize>,
}

impl PilotGrouping {
    pub fn new(
        pilots: usize,
        group_size: usize,
        group_of_user: Vec<usize>,
    ) -> Result<Self, ServingError> {
        check_group_size(pilots, group_size)?;
        let groups = pilots / group_size;
        if let Some((user, &group)) = group_of_user.iter().enumerate().find(|(_, &g)| g >= groups) {
            return Err(ServingError::GroupOutOfRange {
                user,
                group,
                groups,
            });
        }
        Ok(PilotGrouping {
            pilots,
            group_size,
            group_of_user,
        })
    }

    /// Every user in a single group of `q = Q` REs.
    pub fn single_group(pilots: usize, users: usize) -> Result<Self, ServingError> {
        PilotGrouping::new(pilots, pilots, vec![0; users])
    }

    /// Independent uniform group per user.
    pub fn random<R: Rng + ?Sized>(
        pilots: usize,
        group_size: usize,
        users: usize,
        rng: &mut R,
    ) -> Result<Self, ServingError> {
        check_group_size(pilots, group_size)?;
        let groups = pilots / group_size;
        let g = (0..users).map(|_| rng.random_range(0..groups)).collect();
        PilotGrouping::new(pilots, group_size, g)
    }

    /// Group sizes differ by at most one; the assignment is shuffled.
    pub fn balanced<R: Rng + ?Sized>(
        pilots: usize,
        group_size: usize,
        users: usize,
        rng: &mut R,
    ) -> Result<Self, ServingError> {
        check_group_size(pilots, group_size)?;
        let groups = pilots / group_size;
        let mut g: Vec<usize> = (0..users).map(|k| k % groups).collect();
        g.shuffle(rng);
        PilotGrouping::new(pilots, group_size, g)
    }

    pub fn pilots(&self) -> usize {
        self.pilots
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> usize {
        self.pilots / self.group_size
    }

    pub fn group_of(&self, user: usize) -> usize {
        self.group_of_user[user]
    }

    pub fn user_count(&self) -> usize {
        self.group_of_user.len()
    }
}

fn check_group_size(pilots: usize, q: usize) -> Result<(), ServingError> {
    if q == 0 || pilots == 0 || !pilots.is_multiple_of(q) {
        return Err(ServingError::BadGroupSize { pilots, q });
    }
    Ok(())
}

/// Serving decisions for one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    node_offsets: Vec<usize>,
    node_served: Vec<usize>,
    served: Vec<bool>,
    /// (node, group) pairs with at least one proximate user.
    pub occupied_groups: usize,
    /// (node, group) pairs with more than `q` proximate users.
    pub collided_groups: usize,
}

impl SlotOutcome {
    /// Users served by `node`, ascending.
    pub fn served_by(&self, node: usize) -> &[usize] {
        &self.node_served[self.node_offsets[node]..self.node_offsets[node + 1]]
    }

    pub fn is_served(&self, user: usize) -> bool {
        self.served[user]
    }

    /// Users served by at least one node, ascending.
    pub fn served_users(&self) -> Vec<usize> {
        self.served
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k))
            .collect()
    }

    /// Instantaneous multiplexing gain, the size of the served union.
    pub fn served_count(&self) -> usize {
        self.served.iter().filter(|&&s| s).count()
    }

    /// Fraction of occupied (node, group) pairs that collided, if any were
    /// occupied.
    pub fn collision_fraction(&self) -> Option<f64> {
        (self.occupied_groups > 0)
            .then(|| self.collided_groups as f64 / self.occupied_groups as f64)
    }
}

/// Applies the per-group collision rule at every node.
pub fn served_sets(
    graph: &ProximityGraph,
    grouping: &PilotGrouping,
) -> Result<SlotOutcome, ServingError> {
    if grouping.user_count() != graph.user_count() {
        return Err(ServingError::UserCountMismatch {
            grouped: grouping.user_count(),
            users: graph.user_count(),
        });
    }
    let q = grouping.group_size();
    let mut counts = vec![0usize; grouping.groups()];
    let mut node_offsets = Vec::with_capacity(graph.node_count() + 1);
    let mut node_served = Vec::new();
    let mut served = vec![false; graph.user_count()];
    let mut occupied = 0;
    let mut collided = 0;
    node_offsets.push(0);
    for node in 0..graph.node_count() {
        let users = graph.users_of(node);
        for &u in users {
            let g = grouping.group_of(u);
            if counts[g] == 0 {
                occupied += 1;
            }
            counts[g] += 1;
            if counts[g] == q + 1 {
                collided += 1;
            }
        }
        for &u in users {
            if counts[grouping.group_of(u)] <= q {
                node_served.push(u);
                served[u] = true;
            }
        }
        for &u in users {
            counts[grouping.group_of(u)] = 0;
        }
        node_offsets.push(node_served.len());
    }
    Ok(SlotOutcome {
        node_offsets,
        node_served,
        served,
        occupied_groups: occupied,
        collided_groups: collided,
    })
}

/// How sites are laid out for a gain experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RrhLayout {
    #[default]
    Random,
    /// Two offset square sublattices; the site count must be `2c²`.
    Lattice,
}

/// How users are split among pilot groups each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupAssignment {
    #[default]
    Random,
    Balanced,
}

/// One point of a random-scheduling gain experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    /// Region area over disc area, `A/D`.
    pub area_ratio: f64,
    pub r_o: f64,
    pub sites: usize,
    pub users: usize,
    /// Pilot REs per RB, `Q`.
    pub pilots: usize,
    /// Pilot group size, `q`.
    pub group_size: usize,
    /// User angular spread; ignored unless `sectors > 1`.
    pub theta: f64,
    pub sectors: usize,
    pub layout: RrhLayout,
    /// Redraw site positions every slot instead of once per experiment.
    pub redraw_sites: bool,
    pub assignment: GroupAssignment,
    /// Rotate each site's sectors by an independent uniform angle.
    pub random_sector_offsets: bool,
}

impl GainConfig {
    pub fn new(
        area_ratio: f64,
        sites: usize,
        users: usize,
        pilots: usize,
        group_size: usize,
    ) -> Self {
        GainConfig {
            area_ratio,
            r_o: 1.0,
            sites,
            users,
            pilots,
            group_size,
            theta: std::f64::consts::PI,
            sectors: 1,
            layout: RrhLayout::Random,
            redraw_sites: false,
            assignment: GroupAssignment::Random,
            random_sector_offsets: false,
        }
    }

    pub fn with_sectors(mut self, sectors: usize, theta: f64) -> Self {
        self.sectors = sectors;
        self.theta = theta;
        self
    }

    pub fn with_redraw(mut self) -> Self {
        self.redraw_sites = true;
        self
    }

    pub fn with_users(&self, users: usize) -> Self {
        GainConfig {
            users,
            ..self.clone()
        }
    }

    pub fn model(&self) -> Result<ProximityModel, ServingError> {
        Ok(ProximityModel::new(
            self.r_o,
            self.theta,
            self.sectors,
            0.0,
        )?)
    }

    fn validate(&self) -> Result<(), ServingError> {
        if !(self.area_ratio > 0.0 && self.area_ratio.is_finite()) {
            return Err(ServingError::BadAreaRatio(self.area_ratio));
        }
        check_group_size(self.pilots, self.group_size)?;
        self.model()?;
        Ok(())
    }

    fn sites_and_torus(&self, key: StreamKey) -> Result<(Torus, Vec<Point>), ServingError> {
        match self.layout {
            RrhLayout::Random => {
                let t = Torus::from_area_ratio(self.area_ratio, self.r_o)?;
                let pts = place_random(
                    &t,
                    self.sites,
                    &mut key.purpose(Purpose::RrhPlacement).rng(),
                );
                Ok((t, pts))
            }
            RrhLayout::Lattice => {
                if self.sites == 0 {
                    return Ok((
                        Torus::from_area_ratio(self.area_ratio, self.r_o)?,
                        Vec::new(),
                    ));
                }
                let spec = LatticeSpec::for_point_count(self.sites, self.area_ratio)?;
                Ok(place_rrh_lattice(spec, 2.0 * self.r_o)?)
            }
        }
    }

    fn sector_offsets(&self, key: StreamKey) -> Vec<f64> {
        if !self.random_sector_offsets || self.sectors == 1 {
            return Vec::new();
        }
        let mut rng = key.purpose(Purpose::SectorOrientation).rng();
        (0..self.sites)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect()
    }

    fn grouping(&self, key: StreamKey) -> Result<PilotGrouping, ServingError> {
        let mut rng = key.purpose(Purpose::GroupAssignment).rng();
        match self.assignment {
            GroupAssignment::Random => {
                PilotGrouping::random(self.pilots, self.group_size, self.users, &mut rng)
            }
            GroupAssignment::Balanced => {
                PilotGrouping::balanced(self.pilots, self.group_size, self.users, &mut rng)
            }
        }
    }
}

/// Monte Carlo estimates over `T` slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainResult {
    /// Multiplexing gain per pilot RE, `|S(t)| / Q` averaged over slots.
    pub gain: Estimate,
    /// Per-slot fraction of occupied (node, group) pairs that collided,
    /// averaged over slots with any occupied pair.
    pub collision: Estimate,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy)]
struct SlotSample {
    served: usize,
    collision: Option<f64>,
}

struct Sites {
    torus: Torus,
    positions: Vec<Point>,
    offsets: Vec<f64>,
    index: SiteIndex,
}

impl Sites {
    fn draw(cfg: &GainConfig, key: StreamKey) -> Result<Self, ServingError> {
        let (torus, positions) = cfg.sites_and_torus(key)?;
        let index = SiteIndex::new(&torus, &positions, cfg.r_o);
        Ok(Sites {
            torus,
            offsets: cfg.sector_offsets(key),
            positions,
            index,
        })
    }
}

fn run_slot(
    cfg: &GainConfig,
    model: ProximityModel,
    sites: &Sites,
    key: StreamKey,
) -> Result<SlotSample, ServingError> {
    let users = place_random(
        &sites.torus,
        cfg.users,
        &mut key.purpose(Purpose::UserPlacement).rng(),
    );
    let grouping = cfg.grouping(key)?;
    let snap = DeploymentSnapshot {
        torus: sites.torus,
        rrh_positions: sites.positions.clone(),
        user_positions: users,
        model,
        sector_offsets: sites.offsets.clone(),
    };
    let graph = build_graph_indexed(&snap, &sites.index);
    let out = served_sets(&graph, &grouping)?;
    Ok(SlotSample {
        served: out.served_count(),
        collision: out.collision_fraction(),
    })
}

/// Estimates the gain per pilot RE over `trials` independent slots.
///
/// Site positions come from `key` and are shared by every `K` measured
/// under the same key unless `redraw_sites` is set; user placement and
/// grouping use a per-`(K, trial)` sub-stream.
pub fn measure_gain(
    cfg: &GainConfig,
    trials: usize,
    key: StreamKey,
) -> Result<GainResult, ServingError> {
    if trials == 0 {
        return Err(ServingError::NoTrials);
    }
    cfg.validate()?;
    let model = cfg.model()?;
    let fixed = if cfg.redraw_sites {
        None
    } else {
        Some(Sites::draw(cfg, key)?)
    };
    let user_key = key.child(cfg.users as u64);
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let slot_key = user_key.trial(t as u64);
            match &fixed {
                Some(sites) => run_slot(cfg, model, sites, slot_key),
                None => run_slot(cfg, model, &Sites::draw(cfg, slot_key)?, slot_key),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut gain = RunningStats::default();
    let mut collision = RunningStats::default();
    for s in &samples {
        gain.push(s.served as f64 / cfg.pilots as f64);
        if let Some(c) = s.collision {
            collision.push(c);
        }
    }
    Ok(GainResult {
        gain: gain.estimate(),
        collision: collision.estimate(),
        trials,
    })
}

/// Collision probability at one configuration; see [`GainResult::collision`].
pub fn collision_probability(
    cfg: &GainConfig,
    trials: usize,
    key: StreamKey,
) -> Result<Estimate, ServingError> {
    Ok(measure_gain(cfg, trials, key)?.collision)
}

/// Fraction of lattice-scheduled users that are served by `sites` uniform
/// sites, with every user on one pilot RE (`q = Q = 1`).
///
/// Users sit on `spec` with disc diameter `2·r_o`; sites are redrawn each
/// trial.
pub fn measure_lattice_users(
    spec: LatticeSpec,
    r_o: f64,
    sites: usize,
    trials: usize,
    key: StreamKey,
) -> Result<Estimate, ServingError> {
    if trials == 0 {
        return Err(ServingError::NoTrials);
    }
    let (torus, users) = place_user_lattice(spec, 2.0 * r_o)?;
    let model = ProximityModel::omni(r_o)?;
    let grouping = PilotGrouping::single_group(1, users.len())?;
    let fractions = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = key.trial(t as u64).purpose(Purpose::RrhPlacement).rng();
            let snap = DeploymentSnapshot::new(
                torus,
                place_random(&torus, sites, &mut rng),
                users.clone(),
                model,
            );
            let out = served_sets(&build_graph(&snap), &grouping)?;
            Ok(out.served_count() as f64 / users.len() as f64)
        })
        .collect::<Result<Vec<_>, ServingError>>()?;
    Ok(fractions.into_iter().collect::<RunningStats>().estimate())
}

/// Result of maximizing the gain over a grid of scheduling sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct KOptimum {
    pub k_star: usize,
    pub best: GainResult,
    /// Every grid point in input order.
    pub curve: Vec<(usize, GainResult)>,
}

/// Grid maximum of the gain over `K`, ties toward smaller `K`.
pub fn optimize_k(
    cfg: &GainConfig,
    k_grid: &[usize],
    trials: usize,
    key: StreamKey,
) -> Result<KOptimum, ServingError> {
    if k_grid.is_empty() {
        return Err(ServingError::EmptyGrid);
    }
    let curve = k_grid
        .iter()
        .map(|&k| measure_gain(&cfg.with_users(k), trials, key).map(|r| (k, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let (k_star, best) = curve
        .iter()
        .copied()
        .reduce(|a, b| {
            let better =
                b.1.gain.mean > a.1.gain.mean || (b.1.gain.mean == a.1.gain.mean && b.0 < a.0);
            if better {
                b
            } else {
                a
            }
        })
        .expect("non-empty grid");
    Ok(KOptimum {
        k_star,
        best,
        curve,
    })
}

/// Geometric grid of `points` distinct integers from `lo` to `hi`
/// inclusive (fewer if rounding merges neighbours).
pub fn geometric_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let lo = lo.max(1);
    if points <= 1 || hi <= lo {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (points - 1) as f64);
    let mut out: Vec<usize> = (0..points)
        .map(|i| (lo as f64 * ratio.powi(i as i32)).round() as usize)
        .collect();
    out.dedup();
    *out.last_mut().unwrap() = hi;
    out
}

/// Default `K` grid: geometric, 1 to `8·Q·(A/D)`, 24 points.
pub fn default_k_grid(pilots: usize, area_ratio: f64) -> Vec<usize> {
    let hi = (8.0 * pilots as f64 * area_ratio).round().max(1.0) as usize;
    geometric_grid(1, hi, 24)
}

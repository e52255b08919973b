use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{Load, Scenario, Split, VolumeFraction};
use crate::fem::DesignDomain;

/// Sampling distributions for random scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub volfrac_mean: f64,
    pub volfrac_std: f64,
    /// Normal draws outside `[volfrac_min, volfrac_max]` are redrawn.
    pub volfrac_min: f64,
    pub volfrac_max: f64,
    /// Poisson rate of the load count; zero draws are redrawn.
    pub loads_rate: f64,
    /// Poisson rate of the fixed-node count, clamped to `[2, edge length]`.
    pub fixed_rate: f64,
    pub load_magnitude: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            volfrac_mean: 0.3,
            volfrac_std: 0.05,
            volfrac_min: 0.1,
            volfrac_max: 0.6,
            loads_rate: 2.0,
            fixed_rate: 50.0,
            load_magnitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn opposite(self) -> Edge {
        match self {
            Edge::Left => Edge::Right,
            Edge::Right => Edge::Left,
            Edge::Bottom => Edge::Top,
            Edge::Top => Edge::Bottom,
        }
    }

    /// Nodes along the edge in increasing coordinate order.
    pub fn nodes(self, domain: &DesignDomain) -> Vec<(usize, usize)> {
        match self {
            Edge::Left => (0..=domain.ny).map(|j| (0, j)).collect(),
            Edge::Right => (0..=domain.ny).map(|j| (domain.nx, j)).collect(),
            Edge::Bottom => (0..=domain.nx).map(|i| (i, 0)).collect(),
            Edge::Top => (0..=domain.nx).map(|i| (i, domain.ny)).collect(),
        }
    }

    pub fn contains(self, domain: &DesignDomain, (i, j): (usize, usize)) -> bool {
        match self {
            Edge::Left => i == 0,
            Edge::Right => i == domain.nx,
            Edge::Bottom => j == 0,
            Edge::Top => j == domain.ny,
        }
    }

    /// Distance in nodes from `(i, j)` to this edge.
    pub fn distance(self, domain: &DesignDomain, (i, j): (usize, usize)) -> usize {
        match self {
            Edge::Left => i,
            Edge::Right => domain.nx - i,
            Edge::Bottom => j,
            Edge::Top => domain.ny - j,
        }
    }

    /// Distance between this edge and its opposite.
    pub fn span(self, domain: &DesignDomain) -> usize {
        match self {
            Edge::Left | Edge::Right => domain.nx,
            Edge::Bottom | Edge::Top => domain.ny,
        }
    }
}

pub fn sample_scenario(seed: u64, split: Split, domain: DesignDomain) -> Scenario {
    sample_scenario_with(seed, split, domain, &SamplerConfig::default())
}

/// Draws one scenario; deterministic in `(seed, split, domain, config)`.
///
/// Supports are a contiguous run on a random edge. Train and validation loads
/// sit on distinct nodes of the opposite edge, test loads on distinct interior
/// nodes. The complexity bound is left at 1 for the caller to back-fill.
pub fn sample_scenario_with(seed: u64, split: Split, domain: DesignDomain, cfg: &SamplerConfig) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let normal = Normal::new(cfg.volfrac_mean, cfg.volfrac_std).expect("finite std");
    let volfrac = loop {
        let v: f64 = normal.sample(&mut rng);
        if (cfg.volfrac_min..=cfg.volfrac_max).contains(&v) {
            break v;
        }
    };

    let fixed_edge = Edge::ALL[rng.random_range(0..4)];
    let edge_nodes = fixed_edge.nodes(&domain);
    let fixed_draw = Poisson::new(cfg.fixed_rate).expect("positive rate").sample(&mut rng) as usize;
    let n_fixed = fixed_draw.clamp(2, edge_nodes.len());
    let first = rng.random_range(0..=edge_nodes.len() - n_fixed);
    let fixed_nodes = edge_nodes[first..first + n_fixed].to_vec();

    let load_dist = Poisson::new(cfg.loads_rate).expect("positive rate");
    let n_loads = loop {
        let k = load_dist.sample(&mut rng) as usize;
        if k >= 1 {
            break k;
        }
    };

    let candidates: Vec<(usize, usize)> = match split {
        Split::Test if domain.nx >= 2 && domain.ny >= 2 => (1..domain.ny)
            .flat_map(|j| (1..domain.nx).map(move |i| (i, j)))
            .collect(),
        _ => fixed_edge.opposite().nodes(&domain),
    };
    let n_loads = n_loads.min(candidates.len());
    let mut picks = index::sample(&mut rng, candidates.len(), n_loads).into_vec();
    picks.sort_unstable();
    let loads = picks
        .into_iter()
        .map(|k| {
            let (i, j) = candidates[k];
            Load {
                i,
                j,
                theta_deg: rng.random_range(0.0..360.0),
                mag: cfg.load_magnitude,
            }
        })
        .collect();

    Scenario {
        nx: domain.nx,
        ny: domain.ny,
        fixed_nodes,
        loads,
        volfrac: VolumeFraction::Uniform(volfrac),
        complexity: 1,
        split,
        seed,
    }
}

/// The edge holding every fixed node, if there is one.
pub fn fixed_edge_of(scenario: &Scenario) -> Option<Edge> {
    let dom = scenario.domain();
    Edge::ALL
        .into_iter()
        .find(|e| !scenario.fixed_nodes.is_empty() && scenario.fixed_nodes.iter().all(|&n| e.contains(&dom, n)))
}

//! Problem instances: supports, loads, volume-fraction target and
//! complexity bound, plus their condition-tensor encoding.
//!
//! Nodes are addressed as `(i, j)` with `i` along x (`0..=nx`) and `j` along
//! y (`0..=ny`). Load angles are degrees counterclockwise from +x, so a load
//! contributes `mag * (cos θ, sin θ)` to the node's (x, y) DOFs.

mod sampler;
mod tensor;

pub use sampler::{fixed_edge_of, sample_scenario, sample_scenario_with, Edge, SamplerConfig};
pub use tensor::{decode_condition_tensor, encode_condition_tensor, Channel, ConditionTensor, DecodedScenario};

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::DesignDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    /// Accepted-record targets of the reference dataset.
    pub fn reference_size(&self) -> usize {
        match self {
            Split::Train => 3885,
            Split::Validation => 432,
            Split::Test => 635,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Validation(format!("unknown split {other:?}"))),
        }
    }
}

fn unit_magnitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub i: usize,
    pub j: usize,
    pub theta_deg: f64,
    #[serde(default = "unit_magnitude")]
    pub mag: f64,
}

impl Load {
    pub fn new(i: usize, j: usize, theta_deg: f64) -> Self {
        Self {
            i,
            j,
            theta_deg,
            mag: 1.0,
        }
    }

    pub fn components(&self) -> (f64, f64) {
        let t = self.theta_deg.to_radians();
        (self.mag * t.cos(), self.mag * t.sin())
    }
}

/// Target material fraction, either constant or per node
/// (`field[j][i]`, `(ny + 1)` rows of `(nx + 1)` values).
#[derive(Debug, Clone, PartialEq)]
pub enum VolumeFraction {
    Uniform(f64),
    Field(Vec<Vec<f64>>),
}

impl VolumeFraction {
    pub fn is_uniform(&self) -> bool {
        matches!(self, VolumeFraction::Uniform(_))
    }

    pub fn at_node(&self, i: usize, j: usize) -> f64 {
        match self {
            VolumeFraction::Uniform(v) => *v,
            VolumeFraction::Field(rows) => rows[j][i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioWire", into = "ScenarioWire")]
pub struct Scenario {
    pub nx: usize,
    pub ny: usize,
    pub fixed_nodes: Vec<(usize, usize)>,
    pub loads: Vec<Load>,
    pub volfrac: VolumeFraction,
    /// Upper bound on the total bar count.
    pub complexity: u32,
    pub split: Split,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ScenarioWire {
    nx: usize,
    ny: usize,
    fixed_nodes: Vec<[usize; 2]>,
    loads: Vec<Load>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volfrac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volfrac_field: Option<Vec<Vec<f64>>>,
    complexity: u32,
    split: Split,
    seed: u64,
}

impl TryFrom<ScenarioWire> for Scenario {
    type Error = Error;

    fn try_from(w: ScenarioWire) -> Result<Self> {
        let volfrac = match (w.volfrac, w.volfrac_field) {
            (Some(v), None) => VolumeFraction::Uniform(v),
            (None, Some(f)) => VolumeFraction::Field(f),
            (Some(_), Some(_)) => return Err(Error::Validation("give either volfrac or volfrac_field, not both".into())),
            (None, None) => return Err(Error::Validation("missing volfrac or volfrac_field".into())),
        };
        Ok(Scenario {
            nx: w.nx,
            ny: w.ny,
            fixed_nodes: w.fixed_nodes.into_iter().map(|[i, j]| (i, j)).collect(),
            loads: w.loads,
            volfrac,
            complexity: w.complexity,
            split: w.split,
            seed: w.seed,
        })
    }
}

impl From<Scenario> for ScenarioWire {
    fn from(s: Scenario) -> Self {
        let (volfrac, volfrac_field) = match s.volfrac {
            VolumeFraction::Uniform(v) => (Some(v), None),
            VolumeFraction::Field(f) => (None, Some(f)),
        };
        ScenarioWire {
            nx: s.nx,
            ny: s.ny,
            fixed_nodes: s.fixed_nodes.into_iter().map(|(i, j)| [i, j]).collect(),
            loads: s.loads,
            volfrac,
            volfrac_field,
            complexity: s.complexity,
            split: s.split,
            seed: s.seed,
        }
    }
}

impl Scenario {
    pub fn domain(&self) -> DesignDomain {
        DesignDomain {
            nx: self.nx,
            ny: self.ny,
        }
    }

    /// Left edge clamped, unit downward load at mid-height of the right edge.
    pub fn cantilever(nx: usize, ny: usize, volfrac: f64) -> Self {
        Self {
            nx,
            ny,
            fixed_nodes: (0..=ny).map(|j| (0, j)).collect(),
            loads: vec![Load::new(nx, ny / 2, 270.0)],
            volfrac: VolumeFraction::Uniform(volfrac),
            complexity: 1,
            split: Split::Train,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.nx == 0 || self.ny == 0 {
            return bad(format!("domain must be at least 1x1, got {}x{}", self.nx, self.ny));
        }
        let dom = self.domain();
        for &(i, j) in &self.fixed_nodes {
            if !dom.contains_node(i, j) {
                return bad(format!("fixed node ({i}, {j}) outside the {}x{} node grid", self.nx + 1, self.ny + 1));
            }
        }
        let fixed: HashSet<_> = self.fixed_nodes.iter().copied().collect();
        for l in &self.loads {
            if !dom.contains_node(l.i, l.j) {
                return bad(format!("load node ({}, {}) outside the node grid", l.i, l.j));
            }
            if !(l.theta_deg.is_finite() && l.mag.is_finite()) {
                return bad(format!("non-finite load at ({}, {})", l.i, l.j));
            }
            if fixed.contains(&(l.i, l.j)) {
                return bad(format!("load applied to fixed node ({}, {})", l.i, l.j));
            }
        }
        if self.complexity < 1 {
            return bad("complexity must be >= 1".into());
        }
        match &self.volfrac {
            VolumeFraction::Uniform(v) => {
                if !(*v > 0.0 && *v <= 1.0) {
                    return bad(format!("volume fraction {v} outside (0, 1]"));
                }
            }
            VolumeFraction::Field(rows) => {
                if rows.len() != self.ny + 1 || rows.iter().any(|r| r.len() != self.nx + 1) {
                    return bad(format!("volfrac_field must be {} rows of {} values", self.ny + 1, self.nx + 1));
                }
                if rows.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("volfrac_field values must lie in [0, 1]".into());
                }
                let mean = self.volume_target();
                if !(mean > 0.0) {
                    return bad("volfrac_field has zero mean".into());
                }
            }
        }
        Ok(())
    }

    /// Per-element target: the mean of the four corner node values.
    pub fn element_volfrac(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for ey in 0..self.ny {
            for ex in 0..self.nx {
                let v = &self.volfrac;
                out.push(
                    0.25 * (v.at_node(ex, ey) + v.at_node(ex + 1, ey) + v.at_node(ex + 1, ey + 1) + v.at_node(ex, ey + 1)),
                );
            }
        }
        out
    }

    /// Global volume-fraction target (element mean of the field).
    pub fn volume_target(&self) -> f64 {
        match &self.volfrac {
            VolumeFraction::Uniform(v) => *v,
            VolumeFraction::Field(_) => {
                let e = self.element_volfrac();
                e.iter().sum::<f64>() / e.len() as f64
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }
}

/// Constrained DOFs and load vector of `scenario` on `domain`.
///
/// Both DOFs of every fixed node are constrained; loads sharing a node add up.
pub fn scenario_to_system(scenario: &Scenario, domain: &DesignDomain) -> Result<(Vec<usize>, Vec<f64>)> {
    scenario.validate()?;
    if scenario.domain() != *domain {
        return Err(Error::Validation(format!(
            "scenario is {}x{}, domain is {}x{}",
            scenario.nx, scenario.ny, domain.nx, domain.ny
        )));
    }
    let mut fixed: Vec<usize> = scenario
        .fixed_nodes
        .iter()
        .flat_map(|&(i, j)| {
            let n = domain.node_index(i, j);
            [2 * n, 2 * n + 1]
        })
        .collect();
    fixed.sort_unstable();
    fixed.dedup();
    let mut f = vec![0.0; domain.n_dofs()];
    for l in &scenario.loads {
        let n = domain.node_index(l.i, l.j);
        let (fx, fy) = l.components();
        f[2 * n] += fx;
        f[2 * n + 1] += fy;
    }
    Ok((fixed, f))
}

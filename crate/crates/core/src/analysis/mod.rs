//! Design evaluation: binarization, volume, truss-likeness screening, bar
//! graphs and batch constraint reports.

mod graph;
mod raster;
mod report;
mod skeleton;

pub use graph::{extract_bar_graph, extract_bar_graph_with, Bar, BarGraph, BarTotals, BarType, GraphNode};
pub use raster::Canvas;
pub use report::{constraint_report, EvalSample, MarginRate, ConstraintReport, SampleEval};
pub use skeleton::{thin, BinaryGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::DensityField;
use crate::image::DesignImage;
use crate::scenario::Scenario;
use crate::simp::{ComplianceEvaluator, SimpConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Values at or above the threshold count as material.
    pub threshold: f64,
    pub junction_radius: f64,
    pub spur_length: f64,
    pub attach_radius: f64,
    /// Open interval of grey values counted as intermediate density.
    pub grey_band: (f64, f64),
    pub max_grey_fraction: f64,
    /// Absolute slack on volume comparisons, covering the optimizer's
    /// bisection tolerance.
    pub volume_slack: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            junction_radius: 2.0,
            spur_length: 5.0,
            attach_radius: 3.0,
            grey_band: (0.2, 0.8),
            max_grey_fraction: 0.1,
            volume_slack: 1e-6,
        }
    }
}

/// Maps grey values to `{0, 1}`; ties go to material.
pub fn binarize(design: &DesignImage, threshold: f64) -> Result<DesignImage> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold {threshold} outside (0, 1)")));
    }
    let v = design.values().iter().map(|&x| if x >= threshold { 1.0 } else { 0.0 }).collect();
    Ok(DesignImage::new(design.width(), design.height(), v)?.with_provenance(design.provenance))
}

/// Mean grey value.
pub fn volume_fraction(design: &DesignImage) -> f64 {
    design.values().iter().sum::<f64>() / design.values().len() as f64
}

/// `|c_true - c_pred| / c_true` in percent.
pub fn compliance_error(c_true: f64, c_pred: f64) -> Result<f64> {
    if !(c_true > 0.0) {
        return Err(Error::param(format!("reference compliance must be positive, got {c_true}")));
    }
    Ok((c_true - c_pred).abs() / c_true * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum TrussFailure {
    Disconnected { components: usize, unreached: usize },
    IntermediateDensity { fraction: f64 },
    Unattached { fixed: bool, loads: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrussCheck {
    pub pass: bool,
    pub reasons: Vec<TrussFailure>,
}

/// Component count of the material and how many attachment sites (each
/// load, the fixed run) have no material of the largest component nearby.
fn connectivity(grid: &BinaryGrid, scenario: &Scenario, radius: f64) -> (usize, usize) {
    let (w, h) = (grid.width, grid.height);
    let mut label = vec![usize::MAX; w * h];
    let mut sizes = Vec::new();
    for start in 0..w * h {
        if !grid.cells[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![start];
        label[start] = id;
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for (dx, dy) in skeleton::RING {
                let (nx, ny) = (x + dx, y + dy);
                if grid.at(nx, ny) {
                    let q = ny as usize * w + nx as usize;
                    if label[q] == usize::MAX {
                        label[q] = id;
                        stack.push(q);
                    }
                }
            }
        }
        sizes.push(size);
    }
    if sizes.is_empty() {
        let sites = scenario.loads.len() + usize::from(!scenario.fixed_nodes.is_empty());
        return (0, sites);
    }
    let main = (0..sizes.len()).max_by_key(|&k| (sizes[k], usize::MAX - k)).unwrap_or(0);
    let reaches = |pts: &[(f64, f64)]| {
        pts.iter().any(|&(px, py)| {
            let r = radius.ceil() as isize;
            let (cx, cy) = (px.round() as isize, py.round() as isize);
            (cy - r..=cy + r).any(|y| {
                (cx - r..=cx + r).any(|x| {
                    grid.at(x, y)
                        && label[y as usize * w + x as usize] == main
                        && (x as f64 - px).hypot(y as f64 - py) <= radius
                })
            })
        })
    };
    let mut unreached = 0;
    for l in &scenario.loads {
        if !reaches(&[graph::node_to_pixel(scenario, w, h, l.i, l.j)]) {
            unreached += 1;
        }
    }
    let fixed: Vec<_> = scenario
        .fixed_nodes
        .iter()
        .map(|&(i, j)| graph::node_to_pixel(scenario, w, h, i, j))
        .collect();
    if !fixed.is_empty() && !reaches(&fixed) {
        unreached += 1;
    }
    (sizes.len(), unreached)
}

fn material(design: &DesignImage, threshold: f64) -> BinaryGrid {
    BinaryGrid::new(design.width(), design.height(), design.values().iter().map(|&v| v >= threshold).collect())
}

/// True when the material is a single component touching every load and
/// the fixed run.
pub fn is_connected(design: &DesignImage, scenario: &Scenario, cfg: &AnalysisConfig) -> bool {
    let (components, unreached) = connectivity(&material(design, cfg.threshold), scenario, cfg.attach_radius);
    components == 1 && unreached == 0
}

pub fn truss_likeness(design: &DesignImage, scenario: &Scenario) -> TrussCheck {
    truss_likeness_with(design, scenario, &AnalysisConfig::default())
}

pub fn truss_likeness_with(design: &DesignImage, scenario: &Scenario, cfg: &AnalysisConfig) -> TrussCheck {
    let mut reasons = Vec::new();
    let (components, unreached) = connectivity(&material(design, cfg.threshold), scenario, cfg.attach_radius);
    if components != 1 || unreached > 0 {
        reasons.push(TrussFailure::Disconnected { components, unreached });
    }
    let (lo, hi) = cfg.grey_band;
    let grey = design.values().iter().filter(|&&v| v > lo && v < hi).count() as f64 / design.values().len() as f64;
    if grey >= cfg.max_grey_fraction {
        reasons.push(TrussFailure::IntermediateDensity { fraction: grey });
    }
    let g = extract_bar_graph_with(design, scenario, cfg);
    if !g.fully_attached() {
        reasons.push(TrussFailure::Unattached {
            fixed: !g.fixed_attached,
            loads: g.unattached_loads.clone(),
        });
    }
    TrussCheck {
        pass: reasons.is_empty(),
        reasons,
    }
}

/// Element densities of a binarized design: material at 1, voids at
/// `x_min`. Node-sized rasters average their four corners per element;
/// other sizes are resampled to the element grid.
pub fn binary_density(design: &DesignImage, scenario: &Scenario, threshold: f64, x_min: f64) -> Result<DensityField> {
    let (nx, ny) = (scenario.nx, scenario.ny);
    let grey: Vec<f64> = if design.width() == nx + 1 && design.height() == ny + 1 {
        let mut v = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            for ex in 0..nx {
                v.push(
                    0.25 * (design.get(ex, ey) + design.get(ex + 1, ey) + design.get(ex, ey + 1) + design.get(ex + 1, ey + 1)),
                );
            }
        }
        v
    } else {
        design.resize_bilinear(nx, ny)?.values().to_vec()
    };
    DensityField::new(nx, ny, grey.into_iter().map(|g| if g >= threshold { 1.0 } else { x_min }).collect())
}

/// Compliance of the binarized design, `+inf` when its material does not
/// connect the supports and loads or the solve is singular.
pub fn binary_compliance(design: &DesignImage, scenario: &Scenario, cfg: &AnalysisConfig, simp: &SimpConfig) -> Result<f64> {
    scenario.validate()?;
    if !is_connected(design, scenario, cfg) {
        return Ok(f64::INFINITY);
    }
    let density = binary_density(design, scenario, cfg.threshold, simp.x_min)?;
    let evaluator = ComplianceEvaluator::new(scenario.domain(), scenario, simp)?;
    match evaluator.solve(&density) {
        Ok((_, c)) => Ok(c),
        Err(e) if e.is_singular() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

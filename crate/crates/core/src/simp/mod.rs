//! SIMP compliance minimization with optimality-criteria updates.

mod filter;
mod oc;

pub use filter::{filter_sensitivities, SensitivityFilter};
pub use oc::{oc_element, oc_update, OcStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    compliance, element_displacements, element_stiffness, solve_equilibrium_with, Assembler, DensityField,
    DesignDomain, ElementStiffness, LinearSystem, Material, SolverKind,
};
use crate::scenario::{scenario_to_system, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimpConfig {
    pub penal: f64,
    pub move_limit: f64,
    /// Exponent applied to the optimality ratio.
    pub damping: f64,
    /// Filter radius in element widths.
    pub rmin: f64,
    pub volfrac: f64,
    pub max_iters: usize,
    /// Converged once the largest density change drops below this.
    pub change_tol: f64,
    pub x_min: f64,
    pub material: Material,
    pub solver: SolverKind,
}

impl Default for SimpConfig {
    fn default() -> Self {
        Self {
            penal: 3.0,
            move_limit: 0.2,
            damping: 0.5,
            rmin: 1.5,
            volfrac: 0.5,
            max_iters: 200,
            change_tol: 0.01,
            x_min: 1e-3,
            material: Material::default(),
            solver: SolverKind::Auto,
        }
    }
}

impl SimpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.penal >= 3.0) {
            return bad(format!("penal must be >= 3, got {}", self.penal));
        }
        if !(self.move_limit > 0.0 && self.move_limit < 1.0) {
            return bad(format!("move limit must be in (0, 1), got {}", self.move_limit));
        }
        if !(self.damping > 0.0) {
            return bad(format!("damping exponent must be positive, got {}", self.damping));
        }
        if !(self.rmin >= 0.0 && self.rmin.is_finite()) {
            return bad(format!("rmin must be >= 0, got {}", self.rmin));
        }
        if !(self.x_min > 0.0 && self.x_min < self.volfrac && self.volfrac <= 1.0) {
            return bad(format!(
                "need 0 < x_min < volfrac <= 1, got x_min={} volfrac={}",
                self.x_min, self.volfrac
            ));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if !(self.change_tol > 0.0) {
            return bad(format!("change_tol must be positive, got {}", self.change_tol));
        }
        element_stiffness(self.material.young, self.material.poisson).map(|_| ())
    }
}

/// Per-element density limits; passive elements have `upper == x_min`,
/// active elements `lower == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBounds {
    nx: usize,
    ny: usize,
    x_min: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DensityBounds {
    pub fn unconstrained(nx: usize, ny: usize, x_min: f64) -> Self {
        Self {
            nx,
            ny,
            x_min,
            lower: vec![x_min; nx * ny],
            upper: vec![1.0; nx * ny],
        }
    }

    pub fn new(nx: usize, ny: usize, x_min: f64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != nx * ny || upper.len() != nx * ny {
            return Err(Error::param("bounds length does not match the grid"));
        }
        for (e, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(x_min <= l && l <= u && u <= 1.0) {
                return Err(Error::param(format!(
                    "element {e}: need x_min <= lower <= upper <= 1, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self {
            nx,
            ny,
            x_min,
            lower,
            upper,
        })
    }

    /// Bounds implied by a node-grid volume-fraction field: elements whose
    /// corner average is <= 0 become passive, >= 1 become active.
    pub fn from_volfrac_field(domain: DesignDomain, element_field: &[f64], x_min: f64) -> Result<Self> {
        if element_field.len() != domain.n_elements() {
            return Err(Error::param("volume-fraction field does not match the grid"));
        }
        let mut b = Self::unconstrained(domain.nx, domain.ny, x_min);
        for (e, &v) in element_field.iter().enumerate() {
            if v <= 0.0 {
                b.pin_passive(e);
            } else if v >= 1.0 {
                b.pin_active(e);
            }
        }
        Ok(b)
    }

    pub fn pin_passive(&mut self, e: usize) {
        self.lower[e] = self.x_min;
        self.upper[e] = self.x_min;
    }

    pub fn pin_active(&mut self, e: usize) {
        self.lower[e] = 1.0;
        self.upper[e] = 1.0;
    }

    fn pin_disk(&mut self, cx: f64, cy: f64, radius: f64, active: bool) {
        for ey in 0..self.ny {
            for ex in 0..self.nx {
                let dx = ex as f64 + 0.5 - cx;
                let dy = ey as f64 + 0.5 - cy;
                if dx * dx + dy * dy <= radius * radius {
                    let e = ey * self.nx + ex;
                    if active {
                        self.pin_active(e)
                    } else {
                        self.pin_passive(e)
                    }
                }
            }
        }
    }

    /// Pins every element whose centre lies in the disk to void.
    pub fn with_passive_disk(mut self, cx: f64, cy: f64, radius: f64) -> Self {
        self.pin_disk(cx, cy, radius, false);
        self
    }

    /// Pins every element whose centre lies in the disk to solid.
    pub fn with_active_disk(mut self, cx: f64, cy: f64, radius: f64) -> Self {
        self.pin_disk(cx, cy, radius, true);
        self
    }

    /// Element-wise intersection.
    pub fn intersect(&self, other: &DensityBounds) -> Result<Self> {
        other.check_dims(self.nx, self.ny)?;
        let lower: Vec<f64> = self.lower.iter().zip(&other.lower).map(|(a, b)| a.max(*b)).collect();
        let upper: Vec<f64> = self.upper.iter().zip(&other.upper).map(|(a, b)| a.min(*b)).collect();
        Self::new(self.nx, self.ny, self.x_min.max(other.x_min), lower, upper)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_passive(&self, e: usize) -> bool {
        self.upper[e] <= self.x_min
    }

    pub fn is_active(&self, e: usize) -> bool {
        self.lower[e] >= 1.0
    }

    pub(crate) fn check_dims(&self, nx: usize, ny: usize) -> Result<()> {
        if self.nx == nx && self.ny == ny {
            Ok(())
        } else {
            Err(Error::param(format!(
                "bounds are {}x{}, field is {nx}x{ny}",
                self.nx, self.ny
            )))
        }
    }
}

/// `dc/dx_e = -p x_e^(p-1) u_e^T k0 u_e` for every element.
pub fn sensitivities(
    domain: &DesignDomain,
    density: &DensityField,
    u: &[f64],
    k0: &ElementStiffness,
    penal: f64,
) -> Result<Vec<f64>> {
    density.check_domain(domain)?;
    if u.len() != domain.n_dofs() {
        return Err(Error::param(format!(
            "{} displacements for {} DOFs",
            u.len(),
            domain.n_dofs()
        )));
    }
    let mut out = Vec::with_capacity(domain.n_elements());
    for ey in 0..domain.ny {
        for ex in 0..domain.nx {
            let x = density.get(ex, ey);
            let energy = k0.energy(&element_displacements(domain, u, ex, ey));
            out.push(-penal * x.powf(penal - 1.0) * energy);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Compliance of the design entering this iteration.
    pub compliance: f64,
    /// Volume fraction after the update.
    pub volume_fraction: f64,
    /// Largest absolute density change of the update.
    pub change: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
    pub final_density: DensityField,
    /// Compliance of `final_density`.
    pub final_compliance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Target volume the optimizer aimed for.
    pub target_volume: f64,
    /// False if the bounds ever made the target unattainable.
    pub volume_reachable: bool,
    pub clamped_sensitivities: usize,
}

impl OptimizationTrace {
    pub fn final_volume_fraction(&self) -> f64 {
        self.final_density.mean()
    }

    /// Per-iteration CSV: `iter,compliance,volfrac,change`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,compliance,volfrac,change\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{:.12e},{:.9},{:.9}\n",
                r.iteration, r.compliance, r.volume_fraction, r.change
            ));
        }
        s
    }
}

/// Reusable per-domain state for repeated compliance evaluations.
pub struct ComplianceEvaluator {
    assembler: Assembler,
    k0: ElementStiffness,
    penal: f64,
    solver: SolverKind,
    fixed_dofs: Vec<usize>,
    loads: Vec<f64>,
}

impl ComplianceEvaluator {
    pub fn new(domain: DesignDomain, scenario: &Scenario, config: &SimpConfig) -> Result<Self> {
        let (fixed_dofs, loads) = scenario_to_system(scenario, &domain)?;
        Ok(Self {
            assembler: Assembler::new(domain),
            k0: element_stiffness(config.material.young, config.material.poisson)?,
            penal: config.penal,
            solver: config.solver,
            fixed_dofs,
            loads,
        })
    }

    pub fn element_stiffness(&self) -> &ElementStiffness {
        &self.k0
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Displacements and compliance of `density`.
    pub fn solve(&self, density: &DensityField) -> Result<(Vec<f64>, f64)> {
        let system = LinearSystem {
            stiffness: self.assembler.assemble(density, self.penal, &self.k0)?,
            loads: self.loads.clone(),
            fixed_dofs: self.fixed_dofs.clone(),
        };
        let u = solve_equilibrium_with(&system, self.solver)?;
        let c = compliance(&u, &self.loads)?;
        Ok((u, c))
    }
}

/// Runs solve, sensitivity, filter and update until the largest density
/// change falls below `change_tol` or `max_iters` is reached.
///
/// The volume target comes from the scenario (its uniform value, or the
/// element mean of its field); `config.volfrac` is overridden. A scenario
/// field additionally pins passive and active elements, intersected with
/// `bounds`.
pub fn optimize(
    domain: DesignDomain,
    scenario: &Scenario,
    config: &SimpConfig,
    bounds: &DensityBounds,
) -> Result<OptimizationTrace> {
    scenario.validate()?;
    if scenario.domain() != domain {
        return Err(Error::param(format!(
            "scenario is {}x{}, domain is {}x{}",
            scenario.nx, scenario.ny, domain.nx, domain.ny
        )));
    }
    let element_vf = scenario.element_volfrac();
    let mut cfg = config.clone();
    cfg.volfrac = element_vf.iter().sum::<f64>() / element_vf.len() as f64;
    cfg.validate()?;
    bounds.check_dims(domain.nx, domain.ny)?;
    let bounds = if scenario.volfrac.is_uniform() {
        bounds.clone()
    } else {
        bounds.intersect(&DensityBounds::from_volfrac_field(domain, &element_vf, cfg.x_min)?)?
    };

    let evaluator = ComplianceEvaluator::new(domain, scenario, &cfg)?;
    let filter = SensitivityFilter::new(domain, cfg.rmin)?;
    let start: Vec<f64> = (0..domain.n_elements())
        .map(|e| cfg.volfrac.max(bounds.lower()[e]).min(bounds.upper()[e]).max(cfg.x_min))
        .collect();
    let mut x = DensityField::new(domain.nx, domain.ny, start)?;

    let wrap = |iteration: usize, e: Error| Error::Optimization {
        iteration,
        seed: scenario.seed,
        source: Box::new(e),
    };

    let mut records = Vec::new();
    let mut converged = false;
    let mut volume_reachable = true;
    let mut clamped = 0;
    for iteration in 1..=cfg.max_iters {
        let (u, c) = evaluator.solve(&x).map_err(|e| wrap(iteration, e))?;
        let dc = sensitivities(&domain, &x, &u, &evaluator.k0, cfg.penal).map_err(|e| wrap(iteration, e))?;
        let dcf = filter.apply(&x, &dc, cfg.x_min).map_err(|e| wrap(iteration, e))?;
        let step = oc_update(&x, &dcf, &cfg, &bounds).map_err(|e| wrap(iteration, e))?;
        let change = x
            .values()
            .iter()
            .zip(step.density.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        clamped += step.clamped_positive;
        volume_reachable &= step.target_reachable;
        records.push(IterationRecord {
            iteration,
            compliance: c,
            volume_fraction: step.volume_fraction,
            change,
        });
        log::debug!("iter {iteration}: c={c:.6e} vol={:.4} change={change:.4}", step.volume_fraction);
        x = step.density;
        if step.degenerate {
            break;
        }
        if change < cfg.change_tol {
            converged = true;
            break;
        }
    }
    let iterations = records.len();
    let (_, final_compliance) = evaluator.solve(&x).map_err(|e| wrap(iterations + 1, e))?;
    Ok(OptimizationTrace {
        records,
        final_density: x,
        final_compliance,
        iterations,
        converged,
        target_volume: cfg.volfrac,
        volume_reachable,
        clamped_sensitivities: clamped,
    })
}

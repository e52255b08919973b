use super::{DensityBounds, SimpConfig};
use crate::error::{Error, Result};
use crate::fem::DensityField;

const LAMBDA_LO: f64 = 1e-9;
const LAMBDA_HI: f64 = 1e9;
/// Bisection stops once the volume fraction is this close to the target.
const VOLUME_TOL: f64 = 1e-7;
/// Required volume accuracy of a successful update.
const VOLUME_CONTRACT: f64 = 1e-4;
const BRACKET_TOL: f64 = 1e-13;

/// Result of one optimality-criteria update.
#[derive(Debug, Clone)]
pub struct OcStep {
    pub density: DensityField,
    pub lambda: f64,
    pub volume_fraction: f64,
    /// False when the bounds make the target volume unattainable; the
    /// nearest achievable volume was used instead.
    pub target_reachable: bool,
    /// Positive sensitivities that were clamped to zero.
    pub clamped_positive: usize,
    /// All sensitivities were zero; the density was returned unchanged.
    pub degenerate: bool,
}

/// Fixed-multiplier update of one element: the three-branch move-limited
/// rule followed by clamping into `[lower, upper]`.
#[inline]
pub fn oc_element(x: f64, beta: f64, cfg: &SimpConfig, lower: f64, upper: f64) -> f64 {
    let candidate = x * beta.powf(cfg.damping);
    let lo = cfg.x_min.max(x - cfg.move_limit);
    let hi = (x + cfg.move_limit).min(1.0);
    let moved = if candidate <= lo {
        lo
    } else if candidate >= hi {
        hi
    } else {
        candidate
    };
    moved.max(lower).min(upper)
}

struct Updater<'a> {
    x: &'a [f64],
    sens: &'a [f64],
    cfg: &'a SimpConfig,
    bounds: &'a DensityBounds,
}

impl Updater<'_> {
    fn fill(&self, lambda: f64, out: &mut [f64]) -> f64 {
        let mut sum = 0.0;
        for (e, o) in out.iter_mut().enumerate() {
            // dV/dx_e = 1 on a unit grid
            let beta = -self.sens[e] / lambda;
            *o = oc_element(self.x[e], beta, self.cfg, self.bounds.lower()[e], self.bounds.upper()[e]);
            sum += *o;
        }
        sum / out.len() as f64
    }
}

/// Optimality-criteria update with the Lagrange multiplier found by bisection
/// so that the mean density matches `config.volfrac`.
pub fn oc_update(
    density: &DensityField,
    filtered: &[f64],
    config: &SimpConfig,
    bounds: &DensityBounds,
) -> Result<OcStep> {
    let n = density.values().len();
    if filtered.len() != n {
        return Err(Error::param(format!("{} sensitivities for {n} elements", filtered.len())));
    }
    bounds.check_dims(density.nx(), density.ny())?;

    let clamped_positive = filtered.iter().filter(|v| **v > 0.0).count();
    if clamped_positive > 0 {
        log::warn!("clamped {clamped_positive} positive sensitivities to zero");
    }
    let sens: Vec<f64> = filtered.iter().map(|v| v.min(0.0)).collect();
    if sens.iter().all(|v| *v == 0.0) {
        return Ok(OcStep {
            volume_fraction: density.mean(),
            density: density.clone(),
            lambda: f64::NAN,
            target_reachable: true,
            clamped_positive,
            degenerate: true,
        });
    }

    let up = Updater {
        x: density.values(),
        sens: &sens,
        cfg: config,
        bounds,
    };
    let target = config.volfrac;
    let mut out = vec![0.0; n];
    let finish = |values: Vec<f64>, lambda, volume, reachable| {
        Ok(OcStep {
            density: DensityField::new(density.nx(), density.ny(), values)?,
            lambda,
            volume_fraction: volume,
            target_reachable: reachable,
            clamped_positive,
            degenerate: false,
        })
    };

    let v_max = up.fill(LAMBDA_LO, &mut out);
    if v_max <= target + VOLUME_TOL {
        return finish(out, LAMBDA_LO, v_max, v_max >= target - VOLUME_CONTRACT);
    }
    let v_min = up.fill(LAMBDA_HI, &mut out);
    if v_min >= target - VOLUME_TOL {
        return finish(out, LAMBDA_HI, v_min, v_min <= target + VOLUME_CONTRACT);
    }

    // volume is non-increasing in lambda; bisect geometrically
    let (mut lo, mut hi) = (LAMBDA_LO, LAMBDA_HI);
    let mut lambda = (lo * hi).sqrt();
    let mut volume = up.fill(lambda, &mut out);
    for _ in 0..200 {
        if (volume - target).abs() <= VOLUME_TOL || (hi - lo) / (hi + lo) < BRACKET_TOL {
            break;
        }
        if volume > target {
            lo = lambda;
        } else {
            hi = lambda;
        }
        lambda = (lo * hi).sqrt();
        volume = up.fill(lambda, &mut out);
    }
    if (volume - target).abs() > VOLUME_CONTRACT {
        return Err(Error::Bisection { lo, hi });
    }
    finish(out, lambda, volume, true)
}

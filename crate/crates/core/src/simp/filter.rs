use crate::error::{Error, Result};
use crate::fem::{DensityField, DesignDomain};

/// Mesh-independency filter on element sensitivities.
///
/// Each element averages `x_f * dc_f` over neighbours whose centres lie within
/// `rmin` (in element widths), weighted by `max(0, rmin - dist)`, and divides
/// by `x_e` times the weight sum.
#[derive(Debug, Clone)]
pub struct SensitivityFilter {
    nx: usize,
    ny: usize,
    rmin: f64,
    neighbours: Vec<Vec<(usize, f64)>>,
}

impl SensitivityFilter {
    pub fn new(domain: DesignDomain, rmin: f64) -> Result<Self> {
        if !(rmin >= 0.0 && rmin.is_finite()) {
            return Err(Error::param(format!("filter radius must be >= 0, got {rmin}")));
        }
        let (nx, ny) = (domain.nx, domain.ny);
        let reach = rmin.floor() as usize;
        let mut neighbours = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            for ex in 0..nx {
                let mut list = Vec::new();
                for fy in ey.saturating_sub(reach)..=(ey + reach).min(ny - 1) {
                    for fx in ex.saturating_sub(reach)..=(ex + reach).min(nx - 1) {
                        let dx = fx as f64 - ex as f64;
                        let dy = fy as f64 - ey as f64;
                        let w = rmin - (dx * dx + dy * dy).sqrt();
                        if w > 0.0 {
                            list.push((fy * nx + fx, w));
                        }
                    }
                }
                neighbours.push(list);
            }
        }
        Ok(Self {
            nx,
            ny,
            rmin,
            neighbours,
        })
    }

    pub fn rmin(&self) -> f64 {
        self.rmin
    }

    /// Filters `raw`; every density must be at least `x_min`.
    pub fn apply(&self, density: &DensityField, raw: &[f64], x_min: f64) -> Result<Vec<f64>> {
        if density.nx() != self.nx || density.ny() != self.ny || raw.len() != self.nx * self.ny {
            return Err(Error::param(format!(
                "filter built for {}x{}, got density {}x{} and {} sensitivities",
                self.nx,
                self.ny,
                density.nx(),
                density.ny(),
                raw.len()
            )));
        }
        let x = density.values();
        if let Some((e, v)) = x.iter().enumerate().find(|(_, v)| **v < x_min) {
            return Err(Error::param(format!("density {v} at element {e} is below x_min {x_min}")));
        }
        Ok(self
            .neighbours
            .iter()
            .enumerate()
            .map(|(e, list)| {
                let wsum: f64 = list.iter().map(|(_, w)| w).sum();
                if wsum == 0.0 {
                    // rmin == 0: no smoothing at all
                    return raw[e];
                }
                let acc: f64 = list.iter().map(|&(f, w)| w * x[f] * raw[f]).sum();
                acc / (x[e] * wsum)
            })
            .collect())
    }
}

/// One-shot form of [`SensitivityFilter::apply`].
pub fn filter_sensitivities(density: &DensityField, raw: &[f64], rmin: f64, x_min: f64) -> Result<Vec<f64>> {
    let domain = DesignDomain::new(density.nx(), density.ny())?;
    SensitivityFilter::new(domain, rmin)?.apply(density, raw, x_min)
}

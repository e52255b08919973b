//! Distribution checks on accepted records against fresh sampler draws.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::fem::DesignDomain;
use crate::scenario::{sample_scenario_with, SamplerConfig};

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical CDFs of `a` and `b`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCheck {
    pub accepted: usize,
    pub draws: usize,
    pub acceptance_rate: f64,
    /// KS statistic of accepted volume targets against fresh draws.
    pub ks_volfrac: f64,
    /// Histogram of the stored complexity bounds of accepted records.
    pub complexity_histogram: BTreeMap<u32, usize>,
}

/// Compares the accepted volume targets of `ds` with `draws` fresh
/// scenarios from `sampler`, drawn from seeds outside any split range.
pub fn distribution_check(ds: &Dataset, sampler: &SamplerConfig, draws: usize) -> Result<DistributionCheck> {
    if draws == 0 {
        return Err(Error::param("need at least one fresh draw"));
    }
    let labels = ds.labels()?;
    let m = ds.manifest();
    let domain = DesignDomain::new(m.nx, m.ny)?;
    let accepted: Vec<f64> = labels.iter().map(|l| l.scenario.volume_target()).collect();
    let offset = 1u64 << 48;
    let fresh: Vec<f64> = (0..draws as u64)
        .map(|k| sample_scenario_with(offset + k, m.split, domain, sampler).volume_target())
        .collect();
    let mut complexity_histogram = BTreeMap::new();
    for l in &labels {
        *complexity_histogram.entry(l.scenario.complexity).or_default() += 1;
    }
    let check = DistributionCheck {
        accepted: accepted.len(),
        draws,
        acceptance_rate: m.acceptance_rate(),
        ks_volfrac: ks_statistic(&accepted, &fresh),
        complexity_histogram,
    };
    log::info!(
        "{}: KS(volfrac) = {:.4} over {} accepted vs {draws} draws",
        m.split,
        check.ks_volfrac,
        check.accepted
    );
    Ok(check)
}

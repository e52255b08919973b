//! Batch constraint reports: volume, complexity and compliance pass-rates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binary_compliance, compliance_error, extract_bar_graph_with, volume_fraction, AnalysisConfig};
use crate::error::{Error, Result};
use crate::image::DesignImage;
use crate::scenario::Scenario;
use crate::simp::SimpConfig;

pub const VOLUME_MARGINS: [(&str, f64); 4] = [("V_g≤V_i", 0.0), ("≤2.5%", 0.025), ("≤5%", 0.05), ("≤10%", 0.10)];
pub const COMPLEXITY_MARGINS: [(&str, u32); 3] = [("Cx_g≤Cx_i", 0), ("≤+1bar", 1), ("≤+2bars", 2)];
pub const COMPLIANCE_BUCKETS: [(&str, f64); 4] = [("≤2.5%", 2.5), ("≤5%", 5.0), ("≤7.5%", 7.5), ("≤10%", 10.0)];

#[derive(Debug, Clone)]
pub struct EvalSample {
    pub scenario: Scenario,
    pub design: DesignImage,
    pub reference: Option<DesignImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEval {
    pub volume: f64,
    pub volume_target: f64,
    pub bars: usize,
    pub complexity: u32,
    pub compliance: f64,
    pub reference_compliance: Option<f64>,
    /// Percent; infinite when either design is disconnected.
    pub compliance_error: Option<f64>,
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginRate {
    pub column: String,
    pub margin: f64,
    pub passed: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub samples: usize,
    pub volume: Vec<MarginRate>,
    pub complexity: Vec<MarginRate>,
    /// Over samples with a reference design only.
    pub compliance: Vec<MarginRate>,
    /// Samples whose compliance error exceeds the widest bucket.
    pub compliance_worst: usize,
    pub with_reference: usize,
    pub mse: Option<f64>,
    pub per_sample: Vec<SampleEval>,
}

fn mean_squared_error(design: &DesignImage, reference: &DesignImage) -> Result<f64> {
    let resized;
    let d = if design.width() != reference.width() || design.height() != reference.height() {
        resized = design.resize_bilinear(reference.width(), reference.height())?;
        &resized
    } else {
        design
    };
    let n = reference.values().len() as f64;
    Ok(d.values().iter().zip(reference.values()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

fn evaluate_one(s: &EvalSample, cfg: &AnalysisConfig, simp: &SimpConfig) -> Result<SampleEval> {
    let compliance = binary_compliance(&s.design, &s.scenario, cfg, simp)?;
    let (reference_compliance, compliance_error, mse) = match &s.reference {
        Some(r) => {
            let rc = binary_compliance(r, &s.scenario, cfg, simp)?;
            let err = if rc.is_finite() && compliance.is_finite() {
                compliance_error(rc, compliance)?
            } else if rc == compliance {
                0.0
            } else {
                f64::INFINITY
            };
            (Some(rc), Some(err), Some(mean_squared_error(&s.design, r)?))
        }
        None => (None, None, None),
    };
    Ok(SampleEval {
        volume: volume_fraction(&s.design),
        volume_target: s.scenario.volume_target(),
        bars: extract_bar_graph_with(&s.design, &s.scenario, cfg).total(),
        complexity: s.scenario.complexity,
        compliance,
        reference_compliance,
        compliance_error,
        mse,
    })
}

fn rate(column: &str, margin: f64, passed: usize, of: usize) -> MarginRate {
    MarginRate {
        column: column.to_string(),
        margin,
        passed,
        rate: if of == 0 { 0.0 } else { passed as f64 / of as f64 },
    }
}

/// Evaluates every sample (in parallel) and aggregates the pass-rates.
pub fn constraint_report(samples: &[EvalSample], cfg: &AnalysisConfig, simp: &SimpConfig) -> Result<ConstraintReport> {
    if samples.is_empty() {
        return Err(Error::param("constraint report needs at least one sample"));
    }
    let per_sample = samples
        .par_iter()
        .map(|s| evaluate_one(s, cfg, simp))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(per_sample, cfg.volume_slack))
}

pub(crate) fn aggregate(per_sample: Vec<SampleEval>, slack: f64) -> ConstraintReport {
    let n = per_sample.len();
    let volume = VOLUME_MARGINS
        .iter()
        .map(|&(col, m)| {
            let passed = per_sample.iter().filter(|s| s.volume <= s.volume_target * (1.0 + m) + slack).count();
            rate(col, m * 100.0, passed, n)
        })
        .collect();
    let complexity = COMPLEXITY_MARGINS
        .iter()
        .map(|&(col, k)| {
            let passed = per_sample.iter().filter(|s| s.bars as u64 <= s.complexity as u64 + k as u64).count();
            rate(col, k as f64, passed, n)
        })
        .collect();
    let errors: Vec<f64> = per_sample.iter().filter_map(|s| s.compliance_error).collect();
    let compliance = COMPLIANCE_BUCKETS
        .iter()
        .map(|&(col, b)| rate(col, b, errors.iter().filter(|&&e| e <= b).count(), errors.len()))
        .collect();
    let widest = COMPLIANCE_BUCKETS[COMPLIANCE_BUCKETS.len() - 1].1;
    let mses: Vec<f64> = per_sample.iter().filter_map(|s| s.mse).collect();
    ConstraintReport {
        samples: n,
        volume,
        complexity,
        compliance,
        compliance_worst: errors.iter().filter(|&&e| !(e <= widest)).count(),
        with_reference: errors.len(),
        mse: (!mses.is_empty()).then(|| mses.iter().sum::<f64>() / mses.len() as f64),
        per_sample,
    }
}

#[derive(Serialize)]
struct VolumeSummary {
    #[serde(rename = "V_g≤V_i")]
    exact: f64,
    #[serde(rename = "≤2.5%")]
    m25: f64,
    #[serde(rename = "≤5%")]
    m5: f64,
    #[serde(rename = "≤10%")]
    m10: f64,
}

#[derive(Serialize)]
struct ComplexitySummary {
    #[serde(rename = "Cx_g≤Cx_i")]
    exact: f64,
    #[serde(rename = "≤+1bar")]
    plus1: f64,
    #[serde(rename = "≤+2bars")]
    plus2: f64,
}

#[derive(Serialize)]
struct ComplianceSummary {
    #[serde(rename = "≤2.5%")]
    b25: f64,
    #[serde(rename = "≤5%")]
    b5: f64,
    #[serde(rename = "≤7.5%")]
    b75: f64,
    #[serde(rename = "≤10%")]
    b10: f64,
    #[serde(rename = ">10%")]
    worst: usize,
    samples: usize,
}

#[derive(Serialize)]
struct Summary {
    samples: usize,
    complexity: ComplexitySummary,
    volume: VolumeSummary,
    compliance: ComplianceSummary,
    mse: Option<f64>,
}

impl ConstraintReport {
    /// True when every group's rates are non-decreasing as margins widen.
    pub fn is_monotone(&self) -> bool {
        [&self.volume, &self.complexity, &self.compliance]
            .iter()
            .all(|g| g.windows(2).all(|w| w[0].rate <= w[1].rate) && g.iter().all(|r| (0.0..=1.0).contains(&r.rate)))
    }

    pub fn rate(&self, column: &str) -> Option<f64> {
        self.volume
            .iter()
            .chain(&self.complexity)
            .find(|r| r.column == column)
            .map(|r| r.rate)
    }

    /// One CSV row per margin bucket: `group,column,margin,passed,total,rate`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["group", "column", "margin", "passed", "total", "rate"])?;
        let groups = [
            ("complexity", &self.complexity, self.samples),
            ("volume", &self.volume, self.samples),
            ("compliance", &self.compliance, self.with_reference),
        ];
        for (group, rows, total) in groups {
            for r in rows.iter() {
                w.write_record([
                    group.to_string(),
                    r.column.clone(),
                    r.margin.to_string(),
                    r.passed.to_string(),
                    total.to_string(),
                    format!("{:.6}", r.rate),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Dataset(format!("writing report CSV: {e}")))?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let v = |k: usize| self.volume[k].rate;
        let c = |k: usize| self.complexity[k].rate;
        let b = |k: usize| self.compliance[k].rate;
        let s = Summary {
            samples: self.samples,
            complexity: ComplexitySummary {
                exact: c(0),
                plus1: c(1),
                plus2: c(2),
            },
            volume: VolumeSummary {
                exact: v(0),
                m25: v(1),
                m5: v(2),
                m10: v(3),
            },
            compliance: ComplianceSummary {
                b25: b(0),
                b5: b(1),
                b75: b(2),
                b10: b(3),
                worst: self.compliance_worst,
                samples: self.with_reference,
            },
            mse: self.mse,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

//! Generator, discriminator and counter losses over plain batches.
//!
//! Every logarithm takes its argument clamped into `[LOG_EPS, 1]`, so the
//! losses stay finite at saturated probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LOG_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub reconstruction: f64,
    pub adversarial: f64,
    pub counting: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            reconstruction: 1.0,
            adversarial: 0.01,
            counting: 0.1,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("reconstruction", self.reconstruction),
            ("adversarial", self.adversarial),
            ("counting", self.counting),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param(format!("{name} weight must be finite and >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// How a predicted count is compared with the bound in the counting loss.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountComparison {
    /// `pred >= truth` is penalized.
    #[default]
    AtLeast,
    /// Only `pred > truth` is penalized.
    Exceeds,
}

/// One generator step's worth of inputs. Designs are flattened rasters of
/// equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBatch {
    pub designs: Vec<Vec<f64>>,
    pub predicted: Vec<Vec<f64>>,
    /// Discriminator output on the generated designs.
    pub disc_fake: Vec<f64>,
    pub counts: Vec<f64>,
    pub predicted_counts: Vec<f64>,
    pub counter_accuracy: f64,
    #[serde(default)]
    pub comparison: CountComparison,
}

impl GeneratorBatch {
    pub fn validate(&self) -> Result<()> {
        let n = self.designs.len();
        if n == 0 {
            return Err(Error::param("batch is empty"));
        }
        for (name, len) in [
            ("predicted designs", self.predicted.len()),
            ("discriminator outputs", self.disc_fake.len()),
            ("counts", self.counts.len()),
            ("predicted counts", self.predicted_counts.len()),
        ] {
            if len != n {
                return Err(Error::param(format!("{len} {name} for {n} designs")));
            }
        }
        let dim = self.designs[0].len();
        if self.designs.iter().chain(&self.predicted).any(|d| d.len() != dim) {
            return Err(Error::param("designs differ in size"));
        }
        check_probs(&self.disc_fake)?;
        if !(0.0..=1.0).contains(&self.counter_accuracy) {
            return Err(Error::param(format!("counter accuracy {} outside [0, 1]", self.counter_accuracy)));
        }
        Ok(())
    }
}

fn check_probs(p: &[f64]) -> Result<()> {
    match p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::param(format!("probability {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

fn check_nonempty(len: usize, what: &str) -> Result<()> {
    if len == 0 {
        Err(Error::param(format!("{what} is empty")))
    } else {
        Ok(())
    }
}

fn safe_ln(v: f64) -> f64 {
    v.clamp(LOG_EPS, 1.0).ln()
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

/// Mean over samples of the per-pixel mean squared error.
pub fn reconstruction_loss(designs: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    check_nonempty(designs.len(), "design batch")?;
    if designs.len() != predicted.len() {
        return Err(Error::param(format!("{} designs, {} predictions", designs.len(), predicted.len())));
    }
    let mut total = 0.0;
    for (x, y) in designs.iter().zip(predicted) {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::param(format!("design of {} pixels vs prediction of {}", x.len(), y.len())));
        }
        total += x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
    }
    Ok(total / designs.len() as f64)
}

/// Fraction of samples whose predicted count violates the bound.
pub fn counting_loss(truth: &[f64], predicted: &[f64], comparison: CountComparison) -> Result<f64> {
    check_nonempty(truth.len(), "count batch")?;
    if truth.len() != predicted.len() {
        return Err(Error::param(format!("{} counts, {} predictions", truth.len(), predicted.len())));
    }
    let hit = |(p, t): (&f64, &f64)| match comparison {
        CountComparison::AtLeast => p >= t,
        CountComparison::Exceeds => p > t,
    };
    Ok(predicted.iter().zip(truth).filter(|&pair| hit(pair)).count() as f64 / truth.len() as f64)
}

/// Mean of `log(1 - D(G(z|c)))`.
pub fn adversarial_loss_generator(disc_fake: &[f64]) -> Result<f64> {
    check_nonempty(disc_fake.len(), "discriminator batch")?;
    check_probs(disc_fake)?;
    Ok(mean(disc_fake.iter().map(|&p| safe_ln(1.0 - p))))
}

/// `-(mean log D(x|c) + mean log(1 - D(G(z|c))))`.
pub fn discriminator_loss(real: &[f64], fake: &[f64]) -> Result<f64> {
    check_nonempty(real.len(), "real batch")?;
    check_nonempty(fake.len(), "fake batch")?;
    check_probs(real)?;
    check_probs(fake)?;
    let r = mean(real.iter().map(|&p| safe_ln(p)));
    let f = mean(fake.iter().map(|&p| safe_ln(1.0 - p)));
    Ok(-(r + f))
}

/// Fraction of predictions within `tolerance` bars of the truth.
pub fn counter_accuracy(truth: &[f64], predicted: &[f64], tolerance: f64) -> Result<f64> {
    check_nonempty(truth.len(), "count batch")?;
    if truth.len() != predicted.len() {
        return Err(Error::param(format!("{} counts, {} predictions", truth.len(), predicted.len())));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::param(format!("tolerance must be >= 0, got {tolerance}")));
    }
    Ok(truth.iter().zip(predicted).filter(|(t, p)| (*p - *t).abs() <= tolerance).count() as f64 / truth.len() as f64)
}

/// Raw terms and their weighted contributions to the generator loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorLoss {
    pub total: f64,
    pub reconstruction: f64,
    pub adversarial: f64,
    pub counting: f64,
    pub counter_accuracy: f64,
    pub reconstruction_term: f64,
    pub adversarial_term: f64,
    pub counting_term: f64,
}

impl GeneratorLoss {
    /// `λ1 L_rec + λ2 L_adv + λ3 Acc L_count`.
    pub fn from_terms(
        reconstruction: f64,
        adversarial: f64,
        counting: f64,
        counter_accuracy: f64,
        w: &LossWeights,
    ) -> Self {
        let reconstruction_term = w.reconstruction * reconstruction;
        let adversarial_term = w.adversarial * adversarial;
        let counting_term = w.counting * counter_accuracy * counting;
        Self {
            total: reconstruction_term + adversarial_term + counting_term,
            reconstruction,
            adversarial,
            counting,
            counter_accuracy,
            reconstruction_term,
            adversarial_term,
            counting_term,
        }
    }
}

pub fn generator_loss(batch: &GeneratorBatch, weights: &LossWeights) -> Result<GeneratorLoss> {
    batch.validate()?;
    weights.validate()?;
    Ok(GeneratorLoss::from_terms(
        reconstruction_loss(&batch.designs, &batch.predicted)?,
        adversarial_loss_generator(&batch.disc_fake)?,
        counting_loss(&batch.counts, &batch.predicted_counts, batch.comparison)?,
        batch.counter_accuracy,
        weights,
    ))
}

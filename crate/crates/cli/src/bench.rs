use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use rayon::prelude::*;
use topoforge::fem::{DensityField, DesignDomain};
use topoforge::scenario::{sample_scenario, Split};
use topoforge::simp::{ComplianceEvaluator, SimpConfig};

use crate::{write_text, BenchArgs};

/// Published per-design FE time, printed for context only.
const REFERENCE_SECONDS: f64 = 1.13;

fn evaluate(domain: DesignDomain, seed: u64, cfg: &SimpConfig) -> Result<f64> {
    let s = sample_scenario(seed, Split::Train, domain);
    let density = DensityField::uniform(domain, s.volume_target())?;
    let (_, c) = ComplianceEvaluator::new(domain, &s, cfg)?.solve(&density)?;
    Ok(c)
}

pub fn run(a: &BenchArgs) -> Result<()> {
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        return Err(topoforge::Error::Parameter("batch sizes must be positive".into()).into());
    }
    let domain = DesignDomain::new(a.nx, a.ny)?;
    let cfg = SimpConfig::default();
    let mut csv = String::from("n,mode,total_seconds,seconds_per_design\n");
    for &n in &a.sizes {
        let seeds: Vec<u64> = (0..n as u64).map(|k| a.seed + k).collect();

        let t = Instant::now();
        for &s in &seeds {
            evaluate(domain, s, &cfg)?;
        }
        let sequential = t.elapsed().as_secs_f64();

        let t = Instant::now();
        seeds.par_iter().map(|&s| evaluate(domain, s, &cfg)).collect::<Result<Vec<_>>>()?;
        let batched = t.elapsed().as_secs_f64();

        for (mode, total) in [("per_design", sequential), ("batched", batched)] {
            let per = total / n as f64;
            log::info!("{}x{} n={n} {mode}: {total:.4} s total, {per:.5} s per design", a.nx, a.ny);
            writeln!(csv, "{n},{mode},{total:.6},{per:.6}")?;
        }
    }
    writeln!(csv, "# reference FE time per design: {REFERENCE_SECONDS} s")?;
    if let Some(out) = &a.out {
        write_text(out, &csv)?;
    }
    print!("{csv}");
    Ok(())
}

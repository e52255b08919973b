use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use topoforge::analysis::{constraint_report, extract_bar_graph, AnalysisConfig, EvalSample};
use topoforge::dataset::format::{read_designs, write_designs};
use topoforge::dataset::{distribution_check, generate_split, Dataset, DatasetConfig, GenerateOptions};
use topoforge::image::{DesignImage, Provenance};
use topoforge::metrics::{
    counter_accuracy, discriminator_loss, generator_loss, GeneratorBatch, LossWeights,
};
use topoforge::scenario::{Scenario, VolumeFraction};
use topoforge::simp::{optimize as run_simp, DensityBounds, SimpConfig};
use topoforge::Error;

use crate::{read_json, write_text, CountBarsArgs, DatasetArgs, EvaluateArgs, LossesArgs, OptimizeArgs, ReportFormat};

fn param(msg: String) -> anyhow::Error {
    Error::Parameter(msg).into()
}

pub fn optimize(a: &OptimizeArgs) -> Result<()> {
    let mut scenario = match &a.scenario {
        Some(p) => {
            let s: Scenario = read_json(p).context("reading the scenario")?;
            for (flag, given, have) in [("--nx", a.nx, s.nx), ("--ny", a.ny, s.ny)] {
                if given.is_some_and(|g| g != have) {
                    return Err(param(format!("{flag} {} disagrees with the scenario's {have}", given.unwrap())));
                }
            }
            s
        }
        None => Scenario::cantilever(a.nx.unwrap_or(60), a.ny.unwrap_or(20), a.volfrac.unwrap_or(0.4)),
    };
    if let Some(v) = a.volfrac {
        scenario.volfrac = VolumeFraction::Uniform(v);
    }
    scenario.validate().context("validating the scenario")?;

    let mut cfg: SimpConfig = match &a.config {
        Some(p) => read_json(p).context("reading the SIMP config")?,
        None => SimpConfig::default(),
    };
    if let Some(p) = a.penal {
        cfg.penal = p;
    }
    if let Some(r) = a.rmin {
        cfg.rmin = r;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate()?;

    let (nx, ny) = (scenario.nx, scenario.ny);
    let trace = run_simp(scenario.domain(), &scenario, &cfg, &DensityBounds::unconstrained(nx, ny, cfg.x_min))?;
    if !trace.converged {
        log::warn!("stopped after {} iterations without meeting the change tolerance", trace.iterations);
    }
    let design = DesignImage::new(nx, ny, trace.final_density.values().to_vec())?
        .resize_bilinear(nx + 1, ny + 1)?
        .with_provenance(Provenance::Simp);
    write_designs(&a.out, 0, &[design]).context("writing the design")?;
    let trace_path = a.trace.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".trace.csv");
        PathBuf::from(p)
    });
    write_text(&trace_path, &trace.to_csv())?;
    let summary = json!({
        "iterations": trace.iterations,
        "converged": trace.converged,
        "compliance": trace.final_compliance,
        "volume_fraction": trace.final_volume_fraction(),
        "design": a.out,
        "trace": trace_path,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

pub fn dataset(a: &DatasetArgs, threads: usize) -> Result<()> {
    let mut cfg: DatasetConfig = match &a.config {
        Some(p) => read_json(p).context("reading the dataset config")?,
        None => DatasetConfig::default(),
    };
    if let Some(v) = a.nx {
        cfg.nx = v;
    }
    if let Some(v) = a.ny {
        cfg.ny = v;
    }
    if let Some(v) = a.shard_size {
        cfg.shard_size = v;
    }
    let workers = a.workers.unwrap_or(threads).min(threads);
    let n = a.n.unwrap_or(a.split.reference_size());
    let opts = GenerateOptions {
        workers,
        stop_after_shards: a.stop_after_shards,
    };
    let m = generate_split(&a.out, a.split, n, a.seed, &cfg, &opts)?;
    let dir = a.out.join(a.split.as_str());
    log::info!(
        "{}: {} accepted, {} rejected ({:.1}% acceptance) {:?}",
        m.split,
        m.record_count,
        m.rejected,
        100.0 * m.acceptance_rate(),
        m.rejections
    );
    let mut summary = json!({
        "split": m.split,
        "records": m.record_count,
        "complete": m.complete,
        "rejected": m.rejected,
        "rejections": m.rejections,
        "acceptance_rate": m.acceptance_rate(),
        "seed_range": [m.base_seed, m.next_seed],
        "manifest": dir.join(topoforge::dataset::MANIFEST_FILE),
    });
    if m.complete && a.check_draws > 0 {
        let check = distribution_check(&Dataset::open(&dir)?, &cfg.sampler, a.check_draws)?;
        summary["ks_volfrac"] = json!(check.ks_volfrac);
        summary["complexity_histogram"] = json!(check.complexity_histogram);
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn design_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tpfg"))
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

#[derive(Serialize)]
struct Unpaired {
    file: PathBuf,
    position: usize,
    index: u64,
    reason: &'static str,
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let ds = Dataset::open(&a.records).context("opening the records")?;
    let mut candidates: BTreeMap<u64, DesignImage> = BTreeMap::new();
    let mut unpaired = Vec::new();
    match &a.designs {
        Some(path) => {
            for file in design_files(path)? {
                let (first, designs) = read_designs(&file)?;
                for (k, d) in designs.into_iter().enumerate() {
                    let index = first + k as u64;
                    let reason = if index >= ds.len() as u64 {
                        Some("no record with this index")
                    } else if candidates.contains_key(&index) {
                        Some("duplicate index")
                    } else {
                        None
                    };
                    match reason {
                        Some(reason) => unpaired.push(Unpaired {
                            file: file.clone(),
                            position: k,
                            index,
                            reason,
                        }),
                        None => {
                            candidates.insert(index, d);
                        }
                    }
                }
            }
        }
        None => {
            for k in 0..ds.len() as u64 {
                candidates.insert(k, ds.read_record(k)?.design);
            }
        }
    }
    for u in &unpaired {
        log::warn!("{}#{} (index {}): {}", u.file.display(), u.position, u.index, u.reason);
    }
    if candidates.is_empty() {
        return Err(param("no candidate design pairs with a record".into()));
    }
    let samples = candidates
        .into_iter()
        .map(|(index, design)| {
            let r = ds.read_record(index)?;
            Ok(EvalSample {
                scenario: r.scenario,
                design,
                reference: Some(r.design),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = constraint_report(&samples, &AnalysisConfig::default(), &SimpConfig::default())?;
    if !report.is_monotone() {
        log::error!("pass rates are not monotone in the margins");
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if matches!(a.format, ReportFormat::Csv | ReportFormat::Both) {
        let path = a.out.join("report.csv");
        let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(f)?;
        let mut w = csv::Writer::from_path(a.out.join("samples.csv"))?;
        for s in &report.per_sample {
            w.serialize(s)?;
        }
        w.flush()?;
    }
    let mut summary: serde_json::Value = serde_json::from_str(&report.summary_json()?)?;
    summary["records"] = json!(ds.len());
    summary["missing"] = json!(ds.len() - report.samples);
    summary["unpaired"] = json!(unpaired);
    summary["monotone"] = json!(report.is_monotone());
    if matches!(a.format, ReportFormat::Json | ReportFormat::Both) {
        write_text(&a.out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

pub fn count_bars(a: &CountBarsArgs) -> Result<()> {
    let (_, designs) = read_designs(&a.design).context("reading the design")?;
    let count = designs.len();
    let design = designs.into_iter().nth(a.index).ok_or(Error::OutOfRange { index: a.index, count })?;
    let scenario: Scenario = read_json(&a.scenario).context("reading the scenario")?;
    scenario.validate()?;
    let g = extract_bar_graph(&design, &scenario);
    if g.empty {
        log::warn!("design holds no material");
    }
    println!(
        "clamped {} loaded {} internal {} total {}",
        g.totals.clamped,
        g.totals.loaded,
        g.totals.internal,
        g.total()
    );
    if let Some(out) = &a.out {
        write_text(out, &serde_json::to_string_pretty(&g)?)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct LossInput {
    #[serde(flatten)]
    batch: GeneratorBatch,
    /// Discriminator output on real designs.
    #[serde(default)]
    disc_real: Option<Vec<f64>>,
    #[serde(default)]
    weights: LossWeights,
}

pub fn losses(a: &LossesArgs) -> Result<()> {
    let input: LossInput = read_json(&a.batch)?;
    let g = generator_loss(&input.batch, &input.weights)?;
    let b = &input.batch;
    let mut out = json!({
        "generator": g,
        "counter_accuracy": {
            "exact": counter_accuracy(&b.counts, &b.predicted_counts, 0.0)?,
            "within_1": counter_accuracy(&b.counts, &b.predicted_counts, 1.0)?,
            "within_2": counter_accuracy(&b.counts, &b.predicted_counts, 2.0)?,
        },
    });
    if let Some(real) = &input.disc_real {
        out["discriminator"] = json!(discriminator_loss(real, &b.disc_fake)?);
    }
    let text = serde_json::to_string_pretty(&out)?;
    if let Some(p) = &a.out {
        write_text(p, &text)?;
    }
    println!("{text}");
    Ok(())
}

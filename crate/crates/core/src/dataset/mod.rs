//! Dataset generation and storage: sample, optimize, screen, label, encode
//! and persist records in fixed-size TPFG shards with a JSON manifest.
//!
//! A split lives in `<root>/<split>/` as `shard-NNNNN.tpfg` files, each with
//! a `shard-NNNNN.labels.jsonl` sidecar (one line per record: index, seed,
//! scenario, labels, sha256 of the record bytes) and a `manifest.json` that
//! is rewritten atomically after every completed shard.

pub mod format;
mod stats;

pub use stats::{distribution_check, ks_statistic, DistributionCheck};

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::format::{bytes_to_planes, planes_to_bytes, quantize, sha256_hex, write_atomic, ShardHeader, HEADER_LEN};
use crate::analysis::{
    extract_bar_graph_with, truss_likeness_with, volume_fraction, AnalysisConfig, BarTotals, TrussFailure,
};
use crate::error::{Error, Result};
use crate::fem::DesignDomain;
use crate::image::{DesignImage, Provenance};
use crate::scenario::{encode_condition_tensor, sample_scenario_with, ConditionTensor, SamplerConfig, Scenario, Split};
use crate::simp::{optimize, DensityBounds, SimpConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHANNEL_ORDER: [&str; 7] = ["DESIGN", "BC_x", "BC_y", "F_x", "F_y", "VF", "CX"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub nx: usize,
    pub ny: usize,
    pub shard_size: usize,
    /// Seeds tried per requested record before generation gives up.
    pub max_attempts_per_record: u64,
    pub require_converged: bool,
    pub simp: SimpConfig,
    pub analysis: AnalysisConfig,
    pub sampler: SamplerConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            nx: 100,
            ny: 100,
            shard_size: 256,
            max_attempts_per_record: 50,
            require_converged: true,
            simp: SimpConfig::default(),
            analysis: AnalysisConfig::default(),
            sampler: SamplerConfig::default(),
        }
    }
}

impl DatasetConfig {
    fn fingerprint(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub workers: usize,
    /// Return after this many shards have been committed in this call,
    /// leaving an incomplete manifest to resume from.
    pub stop_after_shards: Option<usize>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            stop_after_shards: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub labels: String,
    pub first_record_index: u64,
    pub record_count: usize,
    /// Offset of the first record in `file`.
    pub byte_offset: u64,
    pub record_bytes: usize,
    /// Half-open range of scenario seeds consumed by this shard.
    pub seed_range: [u64; 2],
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardManifest {
    pub format_version: u32,
    pub split: Split,
    pub nx: usize,
    pub ny: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub channel_order: Vec<String>,
    pub shard_size: usize,
    pub target: usize,
    pub base_seed: u64,
    /// First seed not yet consumed by a committed shard.
    pub next_seed: u64,
    pub record_count: usize,
    pub rejected: usize,
    pub rejections: BTreeMap<String, usize>,
    pub complete: bool,
    pub config_sha256: String,
    pub shards: Vec<ShardEntry>,
}

impl ShardManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        let sum: usize = m.shards.iter().map(|s| s.record_count).sum();
        if sum != m.record_count {
            return Err(Error::Corruption {
                path,
                detail: format!("shards hold {sum} records, manifest says {}", m.record_count),
            });
        }
        Ok(m)
    }

    fn store(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn seed_range(&self) -> (u64, u64) {
        (self.base_seed, self.next_seed)
    }

    pub fn acceptance_rate(&self) -> f64 {
        let tried = self.record_count + self.rejected;
        if tried == 0 {
            0.0
        } else {
            self.record_count as f64 / tried as f64
        }
    }
}

/// Errors when two manifests consumed a common seed.
pub fn check_seed_disjoint(manifests: &[ShardManifest]) -> Result<()> {
    for (k, a) in manifests.iter().enumerate() {
        for b in &manifests[k + 1..] {
            let (a0, a1) = a.seed_range();
            let (b0, b1) = b.seed_range();
            if a0 < b1 && b0 < a1 {
                return Err(Error::Dataset(format!(
                    "seed ranges overlap: {} [{a0}, {a1}) and {} [{b0}, {b1})",
                    a.split, b.split
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    /// Compliance of the final grey SIMP density.
    pub compliance: f64,
    pub volume_fraction: f64,
    pub bars: BarTotals,
    pub total_bars: usize,
    pub iterations: usize,
    pub converged: bool,
    pub truss_like: bool,
}

/// One line of a shard's label sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLabel {
    pub index: u64,
    pub seed: u64,
    pub sha256: String,
    pub scenario: Scenario,
    pub labels: Labels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    pub seed: u64,
    pub scenario: Scenario,
    /// Seven-channel tensor; its design plane is the stored design.
    pub tensor: ConditionTensor,
    pub design: DesignImage,
    pub labels: Labels,
    pub sha256: String,
}

struct Prepared {
    seed: u64,
    scenario: Scenario,
    bytes: Vec<u8>,
    labels: Labels,
}

enum Outcome {
    Accepted(Box<Prepared>),
    Rejected(&'static str),
}

fn rejection_reason(r: &TrussFailure) -> &'static str {
    match r {
        TrussFailure::Disconnected { .. } => "disconnected",
        TrussFailure::IntermediateDensity { .. } => "intermediate_density",
        TrussFailure::Unattached { .. } => "unattached",
    }
}

fn attempt(seed: u64, split: Split, cfg: &DatasetConfig) -> Result<Outcome> {
    let domain = DesignDomain::new(cfg.nx, cfg.ny)?;
    let mut scenario = sample_scenario_with(seed, split, domain, &cfg.sampler);
    let bounds = DensityBounds::unconstrained(cfg.nx, cfg.ny, cfg.simp.x_min);
    let trace = match optimize(domain, &scenario, &cfg.simp, &bounds) {
        Ok(t) => t,
        Err(e) if e.is_singular() => {
            log::warn!("seed {seed}: {e}");
            return Ok(Outcome::Rejected("singular"));
        }
        Err(e) => return Err(e),
    };
    if cfg.require_converged && !trace.converged {
        return Ok(Outcome::Rejected("not_converged"));
    }
    let element = DesignImage::new(cfg.nx, cfg.ny, trace.final_density.values().to_vec())?;
    let node = element.resize_bilinear(cfg.nx + 1, cfg.ny + 1)?;
    let design = DesignImage::new(node.width(), node.height(), quantize(node.values()))?.with_provenance(Provenance::Simp);

    let check = truss_likeness_with(&design, &scenario, &cfg.analysis);
    if let Some(r) = check.reasons.first() {
        log::debug!("seed {seed} rejected: {:?}", check.reasons);
        return Ok(Outcome::Rejected(rejection_reason(r)));
    }
    let graph = extract_bar_graph_with(&design, &scenario, &cfg.analysis);
    scenario.complexity = graph.total().max(1) as u32;
    let tensor = encode_condition_tensor(&scenario, &domain, Some(&design))?;
    let labels = Labels {
        compliance: trace.final_compliance,
        volume_fraction: volume_fraction(&design),
        bars: graph.totals,
        total_bars: graph.total(),
        iterations: trace.iterations,
        converged: trace.converged,
        truss_like: check.pass,
    };
    Ok(Outcome::Accepted(Box::new(Prepared {
        seed,
        scenario,
        bytes: planes_to_bytes(&tensor.planes()),
        labels,
    })))
}

fn shard_name(k: usize) -> (String, String) {
    (format!("shard-{k:05}.tpfg"), format!("shard-{k:05}.labels.jsonl"))
}

struct Writer<'a> {
    dir: &'a Path,
    manifest: ShardManifest,
    pending: Vec<Prepared>,
    pending_rejections: BTreeMap<String, usize>,
    shard_first_seed: u64,
    others: Vec<ShardManifest>,
}

impl Writer<'_> {
    fn commit(&mut self, next_seed: u64) -> Result<()> {
        let m = &mut self.manifest;
        let first = m.record_count as u64;
        let header = ShardHeader {
            width: m.width,
            height: m.height,
            channels: m.channels,
            record_count: self.pending.len(),
            first_record_index: first,
        };
        let mut bytes = header.encode().to_vec();
        let mut lines = String::new();
        for (k, p) in self.pending.iter().enumerate() {
            bytes.extend_from_slice(&p.bytes);
            let line = RecordLabel {
                index: first + k as u64,
                seed: p.seed,
                sha256: sha256_hex(&p.bytes),
                scenario: p.scenario.clone(),
                labels: p.labels.clone(),
            };
            lines.push_str(&serde_json::to_string(&line)?);
            lines.push('\n');
        }
        let (file, labels) = shard_name(m.shards.len());
        write_atomic(&self.dir.join(&file), &bytes)?;
        write_atomic(&self.dir.join(&labels), lines.as_bytes())?;

        m.shards.push(ShardEntry {
            file,
            labels,
            first_record_index: first,
            record_count: self.pending.len(),
            byte_offset: HEADER_LEN as u64,
            record_bytes: header.record_bytes(),
            seed_range: [self.shard_first_seed, next_seed],
            sha256: sha256_hex(&bytes),
        });
        m.record_count += self.pending.len();
        m.next_seed = next_seed;
        for (reason, count) in std::mem::take(&mut self.pending_rejections) {
            m.rejected += count;
            *m.rejections.entry(reason).or_default() += count;
        }
        m.complete = m.record_count == m.target;
        let mut all = self.others.clone();
        all.push(m.clone());
        check_seed_disjoint(&all)?;
        m.store(self.dir)?;
        log::info!(
            "{}: shard {} committed, {}/{} records, acceptance {:.1}%",
            m.split,
            m.shards.len() - 1,
            m.record_count,
            m.target,
            100.0 * m.acceptance_rate()
        );
        self.pending.clear();
        self.shard_first_seed = next_seed;
        Ok(())
    }
}

fn sibling_manifests(root: &Path, split: Split) -> Result<Vec<ShardManifest>> {
    let mut out = Vec::new();
    for other in [Split::Train, Split::Validation, Split::Test] {
        if other == split {
            continue;
        }
        let dir = root.join(other.as_str());
        if dir.join(MANIFEST_FILE).exists() {
            out.push(ShardManifest::load(&dir)?);
        }
    }
    Ok(out)
}

/// Generates `n` accepted records for `split` from seeds `base_seed..`,
/// resuming from an existing incomplete manifest in `<root>/<split>`.
///
/// Seeds are evaluated in parallel windows but accepted strictly in seed
/// order, so the output bytes do not depend on `workers`.
pub fn generate_split(
    root: &Path,
    split: Split,
    n: usize,
    base_seed: u64,
    cfg: &DatasetConfig,
    opts: &GenerateOptions,
) -> Result<ShardManifest> {
    if n == 0 {
        return Err(Error::param("need at least one record"));
    }
    if opts.workers == 0 {
        return Err(Error::param("need at least one worker"));
    }
    if cfg.shard_size == 0 || cfg.max_attempts_per_record == 0 {
        return Err(Error::param("shard size and attempt budget must be positive"));
    }
    cfg.simp.validate()?;
    let dir = root.join(split.as_str());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let config_sha256 = cfg.fingerprint()?;

    let manifest = if dir.join(MANIFEST_FILE).exists() {
        let m = ShardManifest::load(&dir)?;
        let same = m.split == split
            && m.target == n
            && m.base_seed == base_seed
            && m.config_sha256 == config_sha256
            && m.shard_size == cfg.shard_size;
        if !same {
            return Err(Error::Dataset(format!(
                "{} holds a manifest generated with different settings",
                dir.display()
            )));
        }
        if m.complete {
            return Ok(m);
        }
        log::info!("{split}: resuming at record {} (seed {})", m.record_count, m.next_seed);
        m
    } else {
        ShardManifest {
            format_version: format::FORMAT_VERSION,
            split,
            nx: cfg.nx,
            ny: cfg.ny,
            width: cfg.nx + 1,
            height: cfg.ny + 1,
            channels: CHANNEL_ORDER.len(),
            channel_order: CHANNEL_ORDER.iter().map(|s| s.to_string()).collect(),
            shard_size: cfg.shard_size,
            target: n,
            base_seed,
            next_seed: base_seed,
            record_count: 0,
            rejected: 0,
            rejections: BTreeMap::new(),
            complete: false,
            config_sha256,
            shards: Vec::new(),
        }
    };
    let others = sibling_manifests(root, split)?;
    if let Some(o) = others.iter().find(|o| (o.base_seed..o.next_seed).contains(&manifest.next_seed)) {
        return Err(Error::Dataset(format!(
            "seed {} was already used by the {} split",
            manifest.next_seed, o.split
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Dataset(format!("thread pool: {e}")))?;
    let budget = base_seed.saturating_add((n as u64).saturating_mul(cfg.max_attempts_per_record));
    let window = (opts.workers * 2) as u64;
    let mut seed = manifest.next_seed;
    let mut w = Writer {
        dir: &dir,
        shard_first_seed: seed,
        manifest,
        pending: Vec::new(),
        pending_rejections: BTreeMap::new(),
        others,
    };
    let mut committed_here = 0;
    while w.manifest.record_count < n {
        if seed >= budget {
            return Err(Error::Dataset(format!(
                "{split}: only {} of {n} records accepted after {} seeds",
                w.manifest.record_count + w.pending.len(),
                seed - base_seed
            )));
        }
        let end = seed.saturating_add(window).min(budget);
        let results: Vec<(u64, Result<Outcome>)> =
            pool.install(|| (seed..end).into_par_iter().map(|s| (s, attempt(s, split, cfg))).collect());
        for (s, r) in results {
            seed = s + 1;
            match r? {
                Outcome::Accepted(p) => w.pending.push(*p),
                Outcome::Rejected(reason) => *w.pending_rejections.entry(reason.to_string()).or_default() += 1,
            }
            let total = w.manifest.record_count + w.pending.len();
            if w.pending.len() == cfg.shard_size || total == n {
                w.commit(seed)?;
                committed_here += 1;
                if total == n || opts.stop_after_shards.is_some_and(|k| committed_here >= k) {
                    return Ok(w.manifest);
                }
            }
        }
    }
    Ok(w.manifest)
}

/// Read access to one generated split.
#[derive(Debug, Clone)]
pub struct Dataset {
    dir: PathBuf,
    manifest: ShardManifest,
}

impl Dataset {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let manifest = ShardManifest::load(&dir)?;
        Ok(Self { dir, manifest })
    }

    pub fn manifest(&self) -> &ShardManifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.manifest.record_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn locate(&self, index: u64) -> Result<&ShardEntry> {
        self.manifest
            .shards
            .iter()
            .find(|s| (s.first_record_index..s.first_record_index + s.record_count as u64).contains(&index))
            .ok_or(Error::OutOfRange {
                index: index as usize,
                count: self.len(),
            })
    }

    fn label(&self, shard: &ShardEntry, index: u64) -> Result<RecordLabel> {
        let path = self.dir.join(&shard.labels);
        let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let k = (index - shard.first_record_index) as usize;
        let line = BufReader::new(f)
            .lines()
            .nth(k)
            .ok_or_else(|| Error::Corruption {
                path: path.clone(),
                detail: format!("no label line for record {index}"),
            })?
            .map_err(|e| Error::io(&path, e))?;
        let label: RecordLabel = serde_json::from_str(&line)?;
        if label.index != index {
            return Err(Error::Corruption {
                path,
                detail: format!("label line {k} is for record {}", label.index),
            });
        }
        Ok(label)
    }

    /// All label lines in index order.
    pub fn labels(&self) -> Result<Vec<RecordLabel>> {
        let mut out = Vec::with_capacity(self.len());
        for shard in &self.manifest.shards {
            let path = self.dir.join(&shard.labels);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            for line in text.lines() {
                out.push(serde_json::from_str(line)?);
            }
        }
        Ok(out)
    }

    /// Checksum-verified record.
    pub fn read_record(&self, index: u64) -> Result<SampleRecord> {
        if index >= self.len() as u64 {
            return Err(Error::OutOfRange {
                index: index as usize,
                count: self.len(),
            });
        }
        let shard = self.locate(index)?;
        let path = self.dir.join(&shard.file);
        let mut f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut head = [0u8; HEADER_LEN];
        f.read_exact(&mut head).map_err(|e| Error::io(&path, e))?;
        let file_len = f.metadata().map_err(|e| Error::io(&path, e))?.len() as usize;
        let mut probe = head.to_vec();
        probe.resize(file_len, 0);
        let header = ShardHeader::decode(&probe, &path)?;
        let m = &self.manifest;
        if (header.width, header.height, header.channels) != (m.width, m.height, m.channels)
            || header.first_record_index != shard.first_record_index
            || header.record_count != shard.record_count
        {
            return Err(Error::Corruption {
                path,
                detail: "shard header disagrees with the manifest".into(),
            });
        }
        let k = index - shard.first_record_index;
        let mut bytes = vec![0u8; header.record_bytes()];
        f.seek(SeekFrom::Start(shard.byte_offset + k * header.record_bytes() as u64))
            .and_then(|_| f.read_exact(&mut bytes))
            .map_err(|e| Error::io(&path, e))?;
        let label = self.label(shard, index)?;
        let sum = sha256_hex(&bytes);
        if sum != label.sha256 {
            return Err(Error::Corruption {
                path,
                detail: format!("record {index} checksum {sum} does not match {}", label.sha256),
            });
        }
        let planes = bytes_to_planes(&bytes, header.channels, header.width * header.height);
        let tensor = ConditionTensor::from_planes(header.width, header.height, planes)?;
        let design_plane = tensor.design.clone().ok_or_else(|| Error::Corruption {
            path: path.clone(),
            detail: "record has no design plane".into(),
        })?;
        let design = DesignImage::new(header.width, header.height, design_plane)?.with_provenance(Provenance::Simp);
        Ok(SampleRecord {
            index,
            seed: label.seed,
            scenario: label.scenario,
            tensor,
            design,
            labels: label.labels,
            sha256: sum,
        })
    }
}

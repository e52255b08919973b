//! TPFG containers: a 64-byte little-endian header followed by records of
//! row-major `f32` planes.
//!
//! ```text
//! 0   magic "TPFG"
//! 4   u32 format version
//! 8   u32 width
//! 12  u32 height
//! 16  u32 channels per record
//! 20  u32 record count
//! 24  u64 index of the first record
//! 32  zero padding to 64
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::{DesignImage, Provenance};

pub const MAGIC: &[u8; 4] = b"TPFG";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub record_count: usize,
    pub first_record_index: u64,
}

impl ShardHeader {
    pub fn record_bytes(&self) -> usize {
        self.width * self.height * self.channels * 4
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(MAGIC);
        h[4..8].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        for (k, v) in [self.width, self.height, self.channels, self.record_count].into_iter().enumerate() {
            let at = 8 + 4 * k;
            h[at..at + 4].copy_from_slice(&(v as u32).to_le_bytes());
        }
        h[24..32].copy_from_slice(&self.first_record_index.to_le_bytes());
        h
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let corrupt = |detail: String| Error::Corruption {
            path: path.to_path_buf(),
            detail,
        };
        if bytes.len() < HEADER_LEN {
            return Err(corrupt(format!("{} bytes, header needs {HEADER_LEN}", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(corrupt("bad magic".into()));
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
        let version = u32_at(4) as u32;
        if version != FORMAT_VERSION {
            return Err(corrupt(format!("format version {version}, expected {FORMAT_VERSION}")));
        }
        let header = Self {
            width: u32_at(8),
            height: u32_at(12),
            channels: u32_at(16),
            record_count: u32_at(20),
            first_record_index: u64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes")),
        };
        if header.width == 0 || header.height == 0 || header.channels == 0 {
            return Err(corrupt("zero dimension in header".into()));
        }
        let want = HEADER_LEN + header.record_count * header.record_bytes();
        if bytes.len() != want {
            return Err(corrupt(format!("{} bytes, header implies {want}", bytes.len())));
        }
        Ok(header)
    }
}

pub fn planes_to_bytes(planes: &[&[f64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(planes.iter().map(|p| p.len() * 4).sum());
    for p in planes {
        for &v in p.iter() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Splits one record into `channels` planes of `plane_len` values.
pub fn bytes_to_planes(bytes: &[u8], channels: usize, plane_len: usize) -> Vec<Vec<f64>> {
    bytes
        .chunks_exact(plane_len * 4)
        .take(channels)
        .map(|plane| {
            plane
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
                .collect()
        })
        .collect()
}

/// Rounds every value to the nearest `f32`, matching what storage keeps.
pub fn quantize(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| v as f32 as f64).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut f = fs::File::create(tmp).map_err(|e| Error::io(tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(tmp, e))?;
    f.sync_all().map_err(|e| Error::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes single-channel designs of equal size; record `k` gets index
/// `first_record_index + k`.
pub fn write_designs(path: &Path, first_record_index: u64, designs: &[DesignImage]) -> Result<()> {
    let first = designs.first().ok_or_else(|| Error::param("no designs to write"))?;
    let (w, h) = (first.width(), first.height());
    if let Some(d) = designs.iter().find(|d| d.width() != w || d.height() != h) {
        return Err(Error::param(format!(
            "designs differ in size: {}x{} vs {w}x{h}",
            d.width(),
            d.height()
        )));
    }
    let header = ShardHeader {
        width: w,
        height: h,
        channels: 1,
        record_count: designs.len(),
        first_record_index,
    };
    let mut bytes = header.encode().to_vec();
    for d in designs {
        bytes.extend(planes_to_bytes(&[d.values()]));
    }
    write_atomic(path, &bytes)
}

/// Reads a single-channel design file: the first record index and the
/// designs in order.
pub fn read_designs(path: &Path) -> Result<(u64, Vec<DesignImage>)> {
    let bytes = read_file(path)?;
    let header = ShardHeader::decode(&bytes, path)?;
    if header.channels != 1 {
        return Err(Error::Corruption {
            path: path.to_path_buf(),
            detail: format!("{} channels, a design file has 1", header.channels),
        });
    }
    let n = header.width * header.height;
    let designs = bytes[HEADER_LEN..]
        .chunks_exact(header.record_bytes())
        .map(|rec| {
            let plane = bytes_to_planes(rec, 1, n).remove(0);
            DesignImage::new(header.width, header.height, plane).map(|d| d.with_provenance(Provenance::External))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header.first_record_index, designs))
}

//! Grey-value raster shared by the analysis, encoding and storage code.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simp,
    #[default]
    External,
}

/// Row-major raster of grey values in `[0, 1]`; row `r` is grid row `j = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl DesignImage {
    /// Values are clamped into `[0, 1]`; NaN becomes 0.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::param(format!(
                "image {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        Ok(Self {
            width,
            height,
            values,
            provenance: Provenance::External,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-empty dims")
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, v: f64) {
        self.values[row * self.width + col] = v.clamp(0.0, 1.0);
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> Self {
        let mut v = vec![0.0; self.values.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                v[c * self.height + r] = self.get(c, r);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            values: v,
            provenance: self.provenance,
        }
    }

    pub fn rotate_180(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { values, ..self.clone() }
    }

    /// Bilinear resampling with corner pixels aligned.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("cannot resize to an empty image"));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let scale = |n_src: usize, n_dst: usize| {
            if n_dst > 1 {
                (n_src as f64 - 1.0) / (n_dst as f64 - 1.0)
            } else {
                0.0
            }
        };
        let (sx, sy) = (scale(self.width, width), scale(self.height, height));
        let mut out = Vec::with_capacity(width * height);
        for r in 0..height {
            let y = r as f64 * sy;
            let y0 = (y.floor() as usize).min(self.height - 1);
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = y - y0 as f64;
            for c in 0..width {
                let x = c as f64 * sx;
                let x0 = (x.floor() as usize).min(self.width - 1);
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = x - x0 as f64;
                let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
                let bot = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
                out.push(top * (1.0 - ty) + bot * ty);
            }
        }
        Ok(Self::new(width, height, out)?.with_provenance(self.provenance))
    }
}

//! Drawing thick segments into a raster, for synthetic fixtures and tests.

use crate::image::DesignImage;

/// Binary drawing surface in pixel coordinates `(col, row)`.
#[derive(Debug, Clone)]
pub struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<f64>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![0.0; width * height],
        }
    }

    /// Marks every pixel whose centre lies within `width / 2` of the segment.
    pub fn segment(&mut self, from: (f64, f64), to: (f64, f64), width: f64) -> &mut Self {
        let r = width / 2.0;
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let len2 = dx * dx + dy * dy;
        let lo_x = (from.0.min(to.0) - r).floor().max(0.0) as usize;
        let hi_x = ((from.0.max(to.0) + r).ceil().max(0.0) as usize).min(self.width.saturating_sub(1));
        let lo_y = (from.1.min(to.1) - r).floor().max(0.0) as usize;
        let hi_y = ((from.1.max(to.1) + r).ceil().max(0.0) as usize).min(self.height.saturating_sub(1));
        for y in lo_y..=hi_y {
            for x in lo_x..=hi_x {
                let (px, py) = (x as f64 - from.0, y as f64 - from.1);
                let t = if len2 > 0.0 { ((px * dx + py * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
                let (ex, ey) = (px - t * dx, py - t * dy);
                if ex * ex + ey * ey <= r * r + 1e-9 {
                    self.cells[y * self.width + x] = 1.0;
                }
            }
        }
        self
    }

    /// Filled disk.
    pub fn disk(&mut self, centre: (f64, f64), radius: f64) -> &mut Self {
        self.segment(centre, centre, 2.0 * radius)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], width: f64) -> &mut Self {
        for w in points.windows(2) {
            self.segment(w[0], w[1], width);
        }
        self
    }

    pub fn to_image(&self) -> DesignImage {
        DesignImage::new(self.width, self.height, self.cells.clone()).expect("canvas dims are non-zero")
    }
}

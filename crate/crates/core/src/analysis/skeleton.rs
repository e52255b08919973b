//! Topology-preserving thinning of binary rasters (8-connected foreground,
//! 4-connected background).

use std::sync::OnceLock;

/// Neighbour offsets in circular order starting east, counterclockwise in
/// raster terms (rows grow downward): E, NE, N, NW, W, SW, S, SE.
pub(crate) const RING: [(isize, isize); 8] = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), width * height);
        Self { width, height, cells }
    }

    #[inline]
    pub fn at(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.cells[y as usize * self.width + x as usize]
    }

    /// Bitmask of the 8 neighbours in [`RING`] order.
    #[inline]
    pub(crate) fn ring_mask(&self, x: isize, y: isize) -> u8 {
        let mut m = 0u8;
        for (k, (dx, dy)) in RING.iter().enumerate() {
            if self.at(x + dx, y + dy) {
                m |= 1 << k;
            }
        }
        m
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

fn simple_table() -> &'static [bool; 256] {
    static TABLE: OnceLock<[bool; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [false; 256];
        for (mask, slot) in t.iter_mut().enumerate() {
            *slot = is_simple_mask(mask as u8);
        }
        t
    })
}

/// A pixel is simple when removing it changes neither the number of
/// foreground 8-components nor background 4-components in its 3x3 window.
fn is_simple_mask(mask: u8) -> bool {
    let fg = |k: usize| mask & (1 << k) != 0;
    let components = |want_fg: bool, eight: bool, seed_filter: &dyn Fn(usize) -> bool| -> usize {
        let mut seen = [false; 8];
        let mut count = 0;
        for s in 0..8 {
            if seen[s] || fg(s) != want_fg || !seed_filter(s) {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(a) = stack.pop() {
                for b in 0..8 {
                    if seen[b] || fg(b) != want_fg {
                        continue;
                    }
                    let (ax, ay) = RING[a];
                    let (bx, by) = RING[b];
                    let (dx, dy) = ((ax - bx).abs(), (ay - by).abs());
                    let adjacent = if eight { dx.max(dy) == 1 } else { dx + dy == 1 };
                    if adjacent {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        count
    };
    let fg_components = components(true, true, &|_| true);
    // only background components touching a 4-neighbour of the centre count
    let bg_components = components(false, false, &|k| k % 2 == 0);
    fg_components == 1 && bg_components == 1
}

/// Thins `grid` to a one-pixel-wide skeleton by repeatedly peeling simple,
/// non-end border pixels from each of the four directions in turn.
pub fn thin(grid: &BinaryGrid) -> BinaryGrid {
    let table = simple_table();
    let mut g = grid.clone();
    let (w, h) = (g.width as isize, g.height as isize);
    // N, S, E, W border directions
    let dirs: [(isize, isize); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for (dx, dy) in dirs {
            candidates.clear();
            for y in 0..h {
                for x in 0..w {
                    if !g.at(x, y) || g.at(x + dx, y + dy) {
                        continue;
                    }
                    let m = g.ring_mask(x, y);
                    if m.count_ones() > 1 && table[m as usize] {
                        candidates.push((x, y));
                    }
                }
            }
            for &(x, y) in &candidates {
                let m = g.ring_mask(x, y);
                if m.count_ones() > 1 && table[m as usize] {
                    g.cells[y as usize * g.width + x as usize] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return g;
        }
    }
}

//! Bar-graph extraction: skeleton pixels become junction/end nodes joined by
//! traced paths, which are pruned, merged and typed by their attachments.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::skeleton::{thin, BinaryGrid, RING};
use super::AnalysisConfig;
use crate::image::DesignImage;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarType {
    Clamped,
    Loaded,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    /// Pixel-space centroid `(col, row)`.
    pub x: f64,
    pub y: f64,
    pub fixed: bool,
    /// Indices into the scenario's load list.
    pub loads: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub start: usize,
    pub end: usize,
    pub polyline: Vec<(usize, usize)>,
    pub length: f64,
    pub kind: BarType,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarTotals {
    pub clamped: usize,
    pub loaded: usize,
    pub internal: usize,
}

impl BarTotals {
    pub fn total(&self) -> usize {
        self.clamped + self.loaded + self.internal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarGraph {
    pub nodes: Vec<GraphNode>,
    pub bars: Vec<Bar>,
    pub totals: BarTotals,
    /// Set when the binarized design holds no material at all.
    pub empty: bool,
    pub fixed_attached: bool,
    pub unattached_loads: Vec<usize>,
}

impl BarGraph {
    pub fn total(&self) -> usize {
        self.totals.total()
    }

    /// True when every load and the fixed run reach at least one bar.
    pub fn fully_attached(&self) -> bool {
        self.fixed_attached && self.unattached_loads.is_empty()
    }
}

/// Maps scenario node coordinates into pixel coordinates of a `w x h`
/// raster: identity for node-sized rasters, half-pixel shifted for
/// element-sized ones, proportional otherwise.
pub(crate) fn node_to_pixel(scenario: &Scenario, w: usize, h: usize, i: usize, j: usize) -> (f64, f64) {
    let axis = |k: usize, n: usize, size: usize| -> f64 {
        if size == n + 1 {
            k as f64
        } else if size == n {
            k as f64 - 0.5
        } else {
            k as f64 * (size as f64 - 1.0) / n as f64
        }
    };
    (axis(i, scenario.nx, w), axis(j, scenario.ny, h))
}

struct Attachments<'a> {
    fixed_pts: Vec<(f64, f64)>,
    load_pts: Vec<(f64, f64)>,
    radius: f64,
    material: &'a BinaryGrid,
}

impl<'a> Attachments<'a> {
    fn new(scenario: &Scenario, material: &'a BinaryGrid, radius: f64) -> Self {
        let (w, h) = (material.width, material.height);
        Self {
            fixed_pts: scenario.fixed_nodes.iter().map(|&(i, j)| node_to_pixel(scenario, w, h, i, j)).collect(),
            load_pts: scenario.loads.iter().map(|l| node_to_pixel(scenario, w, h, l.i, l.j)).collect(),
            radius,
            material,
        }
    }

    /// Distance from `p` to the nearest void pixel, the outside counting as void.
    fn inscribed_radius(&self, p: (usize, usize)) -> f64 {
        let g = self.material;
        let (x, y) = (p.0 as isize, p.1 as isize);
        let mut best = f64::INFINITY;
        for r in 1..=(g.width.max(g.height) as isize + 1) {
            if r as f64 > best {
                break;
            }
            for d in -r..=r {
                for (dx, dy) in [(d, -r), (d, r), (-r, d), (r, d)] {
                    if !g.at(x + dx, y + dy) {
                        best = best.min((dx as f64).hypot(dy as f64));
                    }
                }
            }
        }
        best
    }

    fn dist(p: (usize, usize), q: (f64, f64)) -> f64 {
        (p.0 as f64 - q.0).hypot(p.1 as f64 - q.1)
    }

    fn fixed_dist(&self, p: (usize, usize)) -> f64 {
        self.fixed_pts.iter().map(|&q| Self::dist(p, q)).fold(f64::INFINITY, f64::min)
    }

    fn load_dist(&self, p: (usize, usize), l: usize) -> f64 {
        Self::dist(p, self.load_pts[l])
    }

    /// Attachment tolerance at skeleton pixel `p`: the material around a
    /// thick member's medial axis extends past it by its inscribed radius.
    fn reach(&self, p: (usize, usize)) -> f64 {
        self.radius + (self.inscribed_radius(p) - 1.0).max(0.0)
    }

    fn tag(&self, node: &mut WorkNode) {
        node.radius = node.pixels.iter().map(|&p| self.inscribed_radius(p)).fold(0.0, f64::max);
        node.fixed = node.pixels.iter().any(|&p| self.fixed_dist(p) <= self.reach(p));
        node.loads = (0..self.load_pts.len())
            .filter(|&l| node.pixels.iter().any(|&p| self.load_dist(p, l) <= self.reach(p)))
            .collect();
    }
}

#[derive(Clone)]
struct WorkNode {
    pixels: Vec<(usize, usize)>,
    /// Largest inscribed-disk radius of the material over the node's pixels.
    radius: f64,
    fixed: bool,
    loads: BTreeSet<usize>,
    alive: bool,
}

impl WorkNode {
    fn attached(&self) -> bool {
        self.fixed || !self.loads.is_empty()
    }

    fn absorb(&mut self, other: WorkNode) {
        self.pixels.extend(other.pixels);
        self.radius = self.radius.max(other.radius);
        self.fixed |= other.fixed;
        self.loads.extend(other.loads);
    }
}

#[derive(Clone)]
struct WorkEdge {
    a: usize,
    b: usize,
    path: Vec<(usize, usize)>,
    alive: bool,
}

fn path_length(path: &[(usize, usize)]) -> f64 {
    path.windows(2)
        .map(|w| (w[0].0 as f64 - w[1].0 as f64).hypot(w[0].1 as f64 - w[1].1 as f64))
        .sum()
}

impl WorkEdge {
    fn length(&self) -> f64 {
        path_length(&self.path)
    }

    fn other(&self, n: usize) -> usize {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }

    /// Path oriented so that it ends at node `n`.
    fn path_into(&self, n: usize) -> Vec<(usize, usize)> {
        let mut p = self.path.clone();
        if self.b != n {
            p.reverse();
        }
        p
    }
}

struct Work {
    nodes: Vec<WorkNode>,
    edges: Vec<WorkEdge>,
}

impl Work {
    fn degree(&self, n: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.alive)
            .map(|e| (e.a == n) as usize + (e.b == n) as usize)
            .sum()
    }

    fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.alive) {
            d[e.a] += 1;
            d[e.b] += 1;
        }
        d
    }

    fn incident(&self, n: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].alive && (self.edges[k].a == n || self.edges[k].b == n))
            .collect()
    }

    fn merge_nodes(&mut self, keep: usize, gone: usize) {
        let node = self.nodes[gone].clone();
        self.nodes[gone].alive = false;
        self.nodes[keep].absorb(node);
        for e in self.edges.iter_mut().filter(|e| e.alive) {
            if e.a == gone {
                e.a = keep;
            }
            if e.b == gone {
                e.b = keep;
            }
        }
    }

    /// One round of spur pruning, fragment removal, degree-2 dissolving and
    /// short-edge contraction. Returns whether anything changed.
    fn simplify_once(&mut self, min_len: f64) -> bool {
        let mut changed = false;

        // spurs: one free end, shorter than the threshold
        let deg = self.degrees();
        let mut spurs = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if !e.alive || e.a == e.b || e.length() >= min_len {
                continue;
            }
            let (da, db) = (deg[e.a], deg[e.b]);
            if da == 1 && db == 1 {
                spurs.push((k, None));
            } else if da == 1 {
                spurs.push((k, Some((e.a, e.b))));
            } else if db == 1 {
                spurs.push((k, Some((e.b, e.a))));
            }
        }
        for (k, tip) in spurs {
            self.edges[k].alive = false;
            changed = true;
            match tip {
                Some((tip, base)) => {
                    let t = self.nodes[tip].clone();
                    self.nodes[base].fixed |= t.fixed;
                    self.nodes[base].loads.extend(t.loads);
                    self.nodes[tip].alive = false;
                }
                None => {
                    let e = self.edges[k].clone();
                    self.nodes[e.a].alive = false;
                    self.nodes[e.b].alive = false;
                }
            }
        }

        // dissolve unattached pass-through nodes
        for n in 0..self.nodes.len() {
            if !self.nodes[n].alive || self.nodes[n].attached() {
                continue;
            }
            let inc = self.incident(n);
            if inc.len() != 2 || inc.iter().any(|&k| self.edges[k].a == self.edges[k].b) {
                continue;
            }
            let (e1, e2) = (inc[0], inc[1]);
            let a = self.edges[e1].other(n);
            let b = self.edges[e2].other(n);
            let mut path = self.edges[e1].path_into(n);
            let mut tail = self.edges[e2].path_into(n);
            tail.reverse();
            if path.last() == tail.first() {
                tail.remove(0);
            }
            path.extend(tail);
            self.edges[e1] = WorkEdge { a, b, path, alive: true };
            self.edges[e2].alive = false;
            self.nodes[n].alive = false;
            changed = true;
        }

        // contract short edges between two branching nodes, or between
        // junctions whose inscribed disks overlap
        loop {
            let deg = self.degrees();
            let nodes = &self.nodes;
            let pick = self
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.alive && e.length() < min_len.max(nodes[e.a].radius + nodes[e.b].radius))
                .filter(|(_, e)| e.a == e.b || (deg[e.a] >= 2 && deg[e.b] >= 2))
                .min_by(|x, y| x.1.length().total_cmp(&y.1.length()))
                .map(|(k, _)| k);
            let Some(k) = pick else { break };
            let (a, b) = (self.edges[k].a, self.edges[k].b);
            self.edges[k].alive = false;
            if a != b {
                self.merge_nodes(a.min(b), a.max(b));
            }
            changed = true;
        }

        // nodes left without edges only matter when attached
        for n in 0..self.nodes.len() {
            if self.nodes[n].alive && !self.nodes[n].attached() && self.degree(n) == 0 {
                self.nodes[n].alive = false;
            }
        }
        changed
    }

    fn simplify(&mut self, min_len: f64) {
        while self.simplify_once(min_len) {}
    }

    fn split(&mut self, k: usize, at: usize, att: &Attachments) {
        let e = self.edges[k].clone();
        let pixel = e.path[at];
        let mut node = WorkNode {
            pixels: vec![pixel],
            radius: 0.0,
            fixed: false,
            loads: BTreeSet::new(),
            alive: true,
        };
        att.tag(&mut node);
        self.nodes.push(node);
        let m = self.nodes.len() - 1;
        self.edges[k] = WorkEdge {
            a: e.a,
            b: m,
            path: e.path[..=at].to_vec(),
            alive: true,
        };
        self.edges.push(WorkEdge {
            a: m,
            b: e.b,
            path: e.path[at..].to_vec(),
            alive: true,
        });
    }

    /// Inserts nodes where a bar passes an attachment point without ending
    /// near it.
    fn split_at_attachments(&mut self, att: &Attachments) {
        let mut k = 0;
        while k < self.edges.len() {
            let e = &self.edges[k];
            if !e.alive || e.path.len() < 3 {
                k += 1;
                continue;
            }
            let interior = 1..e.path.len() - 1;
            let (na, nb) = (&self.nodes[e.a], &self.nodes[e.b]);
            if !na.fixed && !nb.fixed && !att.fixed_pts.is_empty() {
                let best = interior
                    .clone()
                    .map(|q| (q, att.fixed_dist(e.path[q]) - att.reach(e.path[q])))
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                if let Some((q, d)) = best {
                    if d <= 0.0 {
                        self.split(k, q, att);
                        continue;
                    }
                }
            }
            let mut did = false;
            for l in 0..att.load_pts.len() {
                if na.loads.contains(&l) || nb.loads.contains(&l) {
                    continue;
                }
                let best = interior
                    .clone()
                    .map(|q| (q, att.load_dist(e.path[q], l) - att.reach(e.path[q])))
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                if let Some((q, d)) = best {
                    if d <= 0.0 {
                        self.split(k, q, att);
                        did = true;
                        break;
                    }
                }
            }
            if !did {
                k += 1;
            }
        }
    }
}

fn build_work(skel: &BinaryGrid, att: &Attachments, junction_radius: f64) -> Work {
    let (w, h) = (skel.width, skel.height);
    let idx = |x: usize, y: usize| y * w + x;
    let mut degree = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            if skel.cells[idx(x, y)] {
                degree[idx(x, y)] = skel.ring_mask(x as isize, y as isize).count_ones();
            }
        }
    }

    // junction pixels within the cluster radius share a node
    let junctions: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| skel.cells[idx(x, y)] && degree[idx(x, y)] >= 3)
        .collect();
    let mut parent: Vec<usize> = (0..junctions.len()).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let r2 = junction_radius * junction_radius;
    for a in 0..junctions.len() {
        for b in a + 1..junctions.len() {
            let (pa, pb) = (junctions[a], junctions[b]);
            if pb.1 as f64 - pa.1 as f64 > junction_radius {
                break;
            }
            let dx = pa.0 as f64 - pb.0 as f64;
            let dy = pa.1 as f64 - pb.1 as f64;
            if dx * dx + dy * dy <= r2 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    let mut node_of: Vec<Option<usize>> = vec![None; w * h];
    let mut nodes: Vec<WorkNode> = Vec::new();
    let mut root_node = vec![usize::MAX; junctions.len()];
    for (k, &(x, y)) in junctions.iter().enumerate() {
        let r = find(&mut parent, k);
        if root_node[r] == usize::MAX {
            root_node[r] = nodes.len();
            nodes.push(WorkNode {
                pixels: Vec::new(),
                radius: 0.0,
                fixed: false,
                loads: BTreeSet::new(),
                alive: true,
            });
        }
        nodes[root_node[r]].pixels.push((x, y));
        node_of[idx(x, y)] = Some(root_node[r]);
    }
    for y in 0..h {
        for x in 0..w {
            if skel.cells[idx(x, y)] && degree[idx(x, y)] == 1 {
                node_of[idx(x, y)] = Some(nodes.len());
                nodes.push(WorkNode {
                    pixels: vec![(x, y)],
                    radius: 0.0,
                    fixed: false,
                    loads: BTreeSet::new(),
                    alive: true,
                });
            }
        }
    }

    let neighbours = |x: usize, y: usize| {
        RING.iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            skel.at(nx, ny).then_some((nx as usize, ny as usize))
        })
    };

    let mut edges = Vec::new();
    let mut visited = vec![false; w * h];
    let trace = |start: (usize, usize), first: (usize, usize), node_of: &[Option<usize>], visited: &mut [bool]| {
        let mut path = vec![start, first];
        visited[idx(first.0, first.1)] = true;
        let (mut prev, mut cur) = (start, first);
        loop {
            let next = neighbours(cur.0, cur.1).find(|&p| p != prev && !(visited[idx(p.0, p.1)] && node_of[idx(p.0, p.1)].is_none()));
            let Some(next) = next else { return None };
            path.push(next);
            if let Some(n) = node_of[idx(next.0, next.1)] {
                return Some((n, path));
            }
            visited[idx(next.0, next.1)] = true;
            prev = cur;
            cur = next;
        }
    };

    for y in 0..h {
        for x in 0..w {
            let Some(a) = node_of[idx(x, y)] else { continue };
            for (qx, qy) in neighbours(x, y).collect::<Vec<_>>() {
                match node_of[idx(qx, qy)] {
                    Some(b) => {
                        if b != a && idx(x, y) < idx(qx, qy) {
                            edges.push(WorkEdge {
                                a,
                                b,
                                path: vec![(x, y), (qx, qy)],
                                alive: true,
                            });
                        }
                    }
                    None => {
                        if visited[idx(qx, qy)] {
                            continue;
                        }
                        if let Some((b, path)) = trace((x, y), (qx, qy), &node_of, &mut visited) {
                            edges.push(WorkEdge { a, b, path, alive: true });
                        }
                    }
                }
            }
        }
    }

    // closed loops without any junction get a single anchor node
    for y in 0..h {
        for x in 0..w {
            if !skel.cells[idx(x, y)] || visited[idx(x, y)] || node_of[idx(x, y)].is_some() || degree[idx(x, y)] != 2 {
                continue;
            }
            let n = nodes.len();
            nodes.push(WorkNode {
                pixels: vec![(x, y)],
                radius: 0.0,
                fixed: false,
                loads: BTreeSet::new(),
                alive: true,
            });
            node_of[idx(x, y)] = Some(n);
            let first = neighbours(x, y).next().expect("degree two");
            if !visited[idx(first.0, first.1)] {
                if let Some((b, path)) = trace((x, y), first, &node_of, &mut visited) {
                    edges.push(WorkEdge { a: n, b, path, alive: true });
                }
            }
        }
    }

    for node in nodes.iter_mut() {
        att.tag(node);
    }
    Work { nodes, edges }
}

/// Bar graph of a design with the default analysis settings.
pub fn extract_bar_graph(design: &DesignImage, scenario: &Scenario) -> BarGraph {
    extract_bar_graph_with(design, scenario, &AnalysisConfig::default())
}

pub fn extract_bar_graph_with(design: &DesignImage, scenario: &Scenario, cfg: &AnalysisConfig) -> BarGraph {
    let (w, h) = (design.width(), design.height());
    let grid = BinaryGrid::new(w, h, design.values().iter().map(|&v| v >= cfg.threshold).collect());
    if grid.count() == 0 {
        return BarGraph {
            nodes: Vec::new(),
            bars: Vec::new(),
            totals: BarTotals::default(),
            empty: true,
            fixed_attached: scenario.fixed_nodes.is_empty(),
            unattached_loads: (0..scenario.loads.len()).collect(),
        };
    }
    // Thinning is scan-order dependent, so every input is first brought to a
    // canonical orientation among its transposes and half-turns.
    let (o, grid, scenario) = Orient::ALL
        .iter()
        .map(|&o| (o, o.grid(&grid), o.scenario(scenario)))
        .min_by(|a, b| canonical_key(&a.1, &a.2).cmp(&canonical_key(&b.1, &b.2)))
        .expect("four orientations");
    let att = Attachments::new(&scenario, &grid, cfg.attach_radius);
    let skel = thin(&grid);
    let mut work = build_work(&skel, &att, cfg.junction_radius);
    work.simplify(cfg.spur_length);
    work.split_at_attachments(&att);
    work.simplify(cfg.spur_length);
    let mut g = finish(work, &att);
    // Every orientation is its own inverse.
    let (cw, ch) = (grid.width, grid.height);
    for n in &mut g.nodes {
        (n.x, n.y) = o.point(cw as f64 - 1.0, ch as f64 - 1.0, n.x, n.y);
    }
    for b in &mut g.bars {
        for p in &mut b.polyline {
            *p = o.pixel(cw, ch, *p);
        }
    }
    g
}

#[derive(Debug, Clone, Copy)]
enum Orient {
    Identity,
    Transpose,
    HalfTurn,
    AntiTranspose,
}

impl Orient {
    const ALL: [Orient; 4] = [Orient::Identity, Orient::Transpose, Orient::HalfTurn, Orient::AntiTranspose];

    fn swaps(self) -> bool {
        matches!(self, Orient::Transpose | Orient::AntiTranspose)
    }

    /// Maps a point of a grid spanning `[0, xmax] x [0, ymax]`.
    fn point(self, xmax: f64, ymax: f64, x: f64, y: f64) -> (f64, f64) {
        match self {
            Orient::Identity => (x, y),
            Orient::Transpose => (y, x),
            Orient::HalfTurn => (xmax - x, ymax - y),
            Orient::AntiTranspose => (ymax - y, xmax - x),
        }
    }

    fn pixel(self, w: usize, h: usize, (x, y): (usize, usize)) -> (usize, usize) {
        match self {
            Orient::Identity => (x, y),
            Orient::Transpose => (y, x),
            Orient::HalfTurn => (w - 1 - x, h - 1 - y),
            Orient::AntiTranspose => (h - 1 - y, w - 1 - x),
        }
    }

    fn node(self, nx: usize, ny: usize, (i, j): (usize, usize)) -> (usize, usize) {
        match self {
            Orient::Identity => (i, j),
            Orient::Transpose => (j, i),
            Orient::HalfTurn => (nx - i, ny - j),
            Orient::AntiTranspose => (ny - j, nx - i),
        }
    }

    fn grid(self, g: &BinaryGrid) -> BinaryGrid {
        let (w, h) = if self.swaps() { (g.height, g.width) } else { (g.width, g.height) };
        let mut cells = vec![false; w * h];
        for y in 0..g.height {
            for x in 0..g.width {
                let (u, v) = self.pixel(g.width, g.height, (x, y));
                cells[v * w + u] = g.cells[y * g.width + x];
            }
        }
        BinaryGrid::new(w, h, cells)
    }

    fn scenario(self, s: &Scenario) -> Scenario {
        let mut out = s.clone();
        if self.swaps() {
            std::mem::swap(&mut out.nx, &mut out.ny);
        }
        out.fixed_nodes = s.fixed_nodes.iter().map(|&p| self.node(s.nx, s.ny, p)).collect();
        for l in &mut out.loads {
            (l.i, l.j) = self.node(s.nx, s.ny, (l.i, l.j));
        }
        out
    }
}

type CanonicalKey<'a> = (&'a [bool], Vec<(usize, usize)>, Vec<(usize, usize)>);

fn canonical_key<'a>(grid: &'a BinaryGrid, s: &Scenario) -> CanonicalKey<'a> {
    let mut fixed = s.fixed_nodes.clone();
    fixed.sort_unstable();
    (&grid.cells, fixed, s.loads.iter().map(|l| (l.i, l.j)).collect())
}

fn finish(work: Work, att: &Attachments) -> BarGraph {
    let deg = work.degrees();
    let mut remap = vec![usize::MAX; work.nodes.len()];
    let mut nodes = Vec::new();
    for (k, n) in work.nodes.iter().enumerate() {
        if !n.alive {
            continue;
        }
        remap[k] = nodes.len();
        let m = n.pixels.len() as f64;
        nodes.push(GraphNode {
            x: n.pixels.iter().map(|p| p.0 as f64).sum::<f64>() / m,
            y: n.pixels.iter().map(|p| p.1 as f64).sum::<f64>() / m,
            fixed: n.fixed,
            loads: n.loads.iter().copied().collect(),
        });
    }
    let mut totals = BarTotals::default();
    let mut bars = Vec::new();
    for e in work.edges.iter().filter(|e| e.alive) {
        let (a, b) = (&work.nodes[e.a], &work.nodes[e.b]);
        let kind = if !a.loads.is_empty() || !b.loads.is_empty() {
            totals.loaded += 1;
            BarType::Loaded
        } else if a.fixed || b.fixed {
            totals.clamped += 1;
            BarType::Clamped
        } else {
            totals.internal += 1;
            BarType::Internal
        };
        bars.push(Bar {
            start: remap[e.a],
            end: remap[e.b],
            length: e.length(),
            polyline: e.path.clone(),
            kind,
        });
    }
    let with_bars = |pred: &dyn Fn(&WorkNode) -> bool| {
        work.nodes.iter().enumerate().any(|(k, n)| n.alive && deg[k] > 0 && pred(n))
    };
    let fixed_attached = att.fixed_pts.is_empty() || with_bars(&|n| n.fixed);
    let unattached_loads = (0..att.load_pts.len()).filter(|l| !with_bars(&|n| n.loads.contains(l))).collect();
    BarGraph {
        nodes,
        bars,
        totals,
        empty: false,
        fixed_attached,
        unattached_loads,
    }
}

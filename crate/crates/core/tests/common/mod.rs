//! Test-only reference implementations, written independently of the crate
//! internals (own node numbering, own element matrix, own solver).
#![allow(dead_code)]

pub mod corpus;

use nalgebra::{DMatrix, DVector};

/// Q4 plane-stress stiffness by 2x2 Gauss quadrature, nodes counterclockwise
/// from the lower-left corner of the unit square.
pub fn quadrature_ke(young: f64, nu: f64) -> [[f64; 8]; 8] {
    let s = young / (1.0 - nu * nu);
    let d = [[s, s * nu, 0.0], [s * nu, s, 0.0], [0.0, 0.0, s * (1.0 - nu) / 2.0]];
    let xi = [-1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()];
    let nat = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut k = [[0.0; 8]; 8];
    for &a in &xi {
        for &b in &xi {
            let mut b_mat = [[0.0; 8]; 3];
            for (n, &(na, nb)) in nat.iter().enumerate() {
                // d/dx = 2 d/dxi on a unit element
                let dx = 2.0 * 0.25 * na * (1.0 + nb * b);
                let dy = 2.0 * 0.25 * nb * (1.0 + na * a);
                b_mat[0][2 * n] = dx;
                b_mat[1][2 * n + 1] = dy;
                b_mat[2][2 * n] = dy;
                b_mat[2][2 * n + 1] = dx;
            }
            // det J = 1/4
            for r in 0..8 {
                for c in 0..8 {
                    let mut acc = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            acc += b_mat[p][r] * d[p][q] * b_mat[q][c];
                        }
                    }
                    k[r][c] += 0.25 * acc;
                }
            }
        }
    }
    k
}

/// Column-major node numbering: node (i, j) -> i * (ny + 1) + j.
pub struct ColumnMajorGrid {
    pub nx: usize,
    pub ny: usize,
}

impl ColumnMajorGrid {
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn ndof(&self) -> usize {
        2 * (self.nx + 1) * (self.ny + 1)
    }

    pub fn edofs(&self, ex: usize, ey: usize) -> [usize; 8] {
        let n = [
            self.node(ex, ey),
            self.node(ex + 1, ey),
            self.node(ex + 1, ey + 1),
            self.node(ex, ey + 1),
        ];
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    }
}

/// Banded symmetric positive definite solve (lower band stored densely).
pub fn banded_solve(dense_band: &[Vec<f64>], half_bw: usize, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    // l[i][k] holds L(i, i - half_bw + k)
    let mut l = dense_band.to_vec();
    for i in 0..n {
        for jj in 0..=half_bw {
            let j = i + jj;
            let j = match j.checked_sub(half_bw) {
                Some(j) if j <= i => j,
                _ => continue,
            };
            let mut s = l[i][j + half_bw - i];
            let kstart = i.saturating_sub(half_bw).max(j.saturating_sub(half_bw));
            for k in kstart..j {
                s -= l[i][k + half_bw - i] * l[j][k + half_bw - j];
            }
            if j == i {
                assert!(s > 0.0, "oracle factorization failed");
                l[i][half_bw] = s.sqrt();
            } else {
                l[i][j + half_bw - i] = s / l[j][half_bw];
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in i.saturating_sub(half_bw)..i {
            s -= l[i][k + half_bw - i] * y[k];
        }
        y[i] = s / l[i][half_bw];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..=(i + half_bw).min(n - 1) {
            s -= l[k][i + half_bw - k] * y[k];
        }
        y[i] = s / l[i][half_bw];
    }
    y
}

pub struct ReferenceResult {
    pub density: Vec<f64>, // row-major ey * nx + ex
    pub compliance: f64,
    pub iterations: usize,
}

/// Straight port of the classic educational SIMP loop: OC with move 0.2,
/// damping 1/2, bisection on lambda in [0, 1e5] to absolute width 1e-4,
/// sensitivity filter with weights rmin - dist.
pub fn reference_simp(
    nx: usize,
    ny: usize,
    volfrac: f64,
    penal: f64,
    rmin: f64,
    fixed_nodes: &[(usize, usize)],
    loads: &[(usize, usize, f64, f64)],
    max_iters: usize,
) -> ReferenceResult {
    let g = ColumnMajorGrid { nx, ny };
    let ke = quadrature_ke(1.0, 0.3);
    let ndof = g.ndof();
    let mut fixed = vec![false; ndof];
    for &(i, j) in fixed_nodes {
        fixed[2 * g.node(i, j)] = true;
        fixed[2 * g.node(i, j) + 1] = true;
    }
    let free: Vec<usize> = (0..ndof).filter(|&d| !fixed[d]).collect();
    let mut map = vec![usize::MAX; ndof];
    for (k, &d) in free.iter().enumerate() {
        map[d] = k;
    }
    let mut f = vec![0.0; ndof];
    for &(i, j, fx, fy) in loads {
        f[2 * g.node(i, j)] += fx;
        f[2 * g.node(i, j) + 1] += fy;
    }
    let half_bw = 2 * (ny + 1) + 3;
    let n_el = nx * ny;
    let mut x = vec![volfrac; n_el];
    let solve = |x: &[f64]| -> Vec<f64> {
        let nf = free.len();
        let mut band = vec![vec![0.0; half_bw + 1]; nf];
        for ey in 0..ny {
            for ex in 0..nx {
                let w = x[ey * nx + ex].powf(penal);
                let ed = g.edofs(ex, ey);
                for a in 0..8 {
                    for b in 0..8 {
                        let (ra, cb) = (map[ed[a]], map[ed[b]]);
                        if ra == usize::MAX || cb == usize::MAX || cb > ra {
                            continue;
                        }
                        band[ra][cb + half_bw - ra] += w * ke[a][b];
                    }
                }
            }
        }
        let rhs: Vec<f64> = free.iter().map(|&d| f[d]).collect();
        let uf = banded_solve(&band, half_bw, &rhs);
        let mut u = vec![0.0; ndof];
        for (k, &d) in free.iter().enumerate() {
            u[d] = uf[k];
        }
        u
    };
    let energy = |u: &[f64], ex: usize, ey: usize| {
        let ed = g.edofs(ex, ey);
        let mut s = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                s += u[ed[a]] * ke[a][b] * u[ed[b]];
            }
        }
        s
    };
    let mut iterations = 0;
    let mut change = 1.0;
    while change > 0.01 && iterations < max_iters {
        iterations += 1;
        let u = solve(&x);
        let mut dc = vec![0.0; n_el];
        for ey in 0..ny {
            for ex in 0..nx {
                let e = ey * nx + ex;
                dc[e] = -penal * x[e].powf(penal - 1.0) * energy(&u, ex, ey);
            }
        }
        // filter
        let r = rmin.floor() as isize;
        let mut dcn = vec![0.0; n_el];
        for ey in 0..ny as isize {
            for ex in 0..nx as isize {
                let mut sum = 0.0;
                let mut acc = 0.0;
                for fy in (ey - r).max(0)..=(ey + r).min(ny as isize - 1) {
                    for fx in (ex - r).max(0)..=(ex + r).min(nx as isize - 1) {
                        let fac = rmin - (((ex - fx).pow(2) + (ey - fy).pow(2)) as f64).sqrt();
                        let fac = fac.max(0.0);
                        sum += fac;
                        let k = (fy * nx as isize + fx) as usize;
                        acc += fac * x[k] * dc[k];
                    }
                }
                let e = (ey * nx as isize + ex) as usize;
                dcn[e] = acc / (x[e] * sum);
            }
        }
        // OC
        let (mut l1, mut l2) = (0.0f64, 1e5f64);
        let mv = 0.2;
        let mut xnew = x.clone();
        while l2 - l1 > 1e-4 {
            let lmid = 0.5 * (l2 + l1);
            for e in 0..n_el {
                let cand = x[e] * (-dcn[e] / lmid).sqrt();
                xnew[e] = 0.001f64.max((x[e] - mv).max(1.0f64.min((x[e] + mv).min(cand))));
            }
            if xnew.iter().sum::<f64>() - volfrac * n_el as f64 > 0.0 {
                l1 = lmid;
            } else {
                l2 = lmid;
            }
        }
        change = x.iter().zip(&xnew).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = xnew;
    }
    let u = solve(&x);
    let compliance = (0..ndof).map(|d| f[d] * u[d]).sum();
    ReferenceResult {
        density: x,
        compliance,
        iterations,
    }
}

/// Dense solve of the reduced system with nalgebra's Cholesky.
pub fn dense_reduced_solve(k: &[Vec<f64>], f: &[f64], fixed: &[usize]) -> Vec<f64> {
    let n = f.len();
    let free: Vec<usize> = (0..n).filter(|d| !fixed.contains(d)).collect();
    let m = DMatrix::from_fn(free.len(), free.len(), |r, c| k[free[r]][free[c]]);
    let b = DVector::from_iterator(free.len(), free.iter().map(|&d| f[d]));
    let sol = m.cholesky().expect("SPD reduced matrix").solve(&b);
    let mut u = vec![0.0; n];
    for (k, &d) in free.iter().enumerate() {
        u[d] = sol[k];
    }
    u
}

/// Small deterministic generator so oracle inputs do not depend on the
/// crate's own RNG plumbing.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

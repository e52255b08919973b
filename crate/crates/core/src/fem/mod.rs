//! Plane-stress finite elements on a regular grid of unit square bilinear
//! quadrilaterals.
//!
//! Node `(i, j)` sits at `x = i`, `y = j` with `0 <= i <= nx`, `0 <= j <= ny`.
//! Nodes are numbered row-major, `node = j * (nx + 1) + i`, and node `n`
//! owns DOFs `2n` (x) and `2n + 1` (y). Element `(ex, ey)` is numbered
//! `ey * nx + ex`; its local nodes run counterclockwise from the lower-left
//! corner: `(ex, ey)`, `(ex+1, ey)`, `(ex+1, ey+1)`, `(ex, ey+1)`.

mod solver;
mod sparse;

pub use solver::{solve_equilibrium, solve_equilibrium_with, LinearSystem, SolverKind};
pub use sparse::CsrMatrix;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular design domain of `nx * ny` unit elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignDomain {
    pub nx: usize,
    pub ny: usize,
}

impl DesignDomain {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param(format!("domain must be at least 1x1, got {nx}x{ny}")));
        }
        Ok(Self { nx, ny })
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        ey * self.nx + ex
    }

    pub fn contains_node(&self, i: usize, j: usize) -> bool {
        i <= self.nx && j <= self.ny
    }

    /// Global DOFs of element `(ex, ey)` in local stiffness order.
    #[inline]
    pub fn element_dofs(&self, ex: usize, ey: usize) -> [usize; 8] {
        let n0 = self.node_index(ex, ey);
        let n1 = n0 + 1;
        let n2 = self.node_index(ex + 1, ey + 1);
        let n3 = n2 - 1;
        [
            2 * n0,
            2 * n0 + 1,
            2 * n1,
            2 * n1 + 1,
            2 * n2,
            2 * n2 + 1,
            2 * n3,
            2 * n3 + 1,
        ]
    }

    /// Element DOF tables for every element, in element order.
    pub fn all_element_dofs(&self) -> Vec<[usize; 8]> {
        let mut out = Vec::with_capacity(self.n_elements());
        for ey in 0..self.ny {
            for ex in 0..self.nx {
                out.push(self.element_dofs(ex, ey));
            }
        }
        out
    }
}

/// Per-element material densities, row-major `ny x nx` (`values[ey * nx + ex]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl DensityField {
    /// Builds a field, rejecting values outside `(0, 1]`.
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(Error::param(format!(
                "density field needs {} values for {nx}x{ny}, got {}",
                nx * ny,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(Error::param(format!("density {bad} outside (0, 1]")));
        }
        Ok(Self { nx, ny, values })
    }

    pub fn uniform(domain: DesignDomain, value: f64) -> Result<Self> {
        Self::new(domain.nx, domain.ny, vec![value; domain.n_elements()])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, ex: usize, ey: usize) -> f64 {
        self.values[ey * self.nx + ex]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn matches(&self, domain: &DesignDomain) -> bool {
        self.nx == domain.nx && self.ny == domain.ny
    }

    pub(crate) fn check_domain(&self, domain: &DesignDomain) -> Result<()> {
        if self.matches(domain) {
            Ok(())
        } else {
            Err(Error::param(format!(
                "density field is {}x{}, domain is {}x{}",
                self.nx, self.ny, domain.nx, domain.ny
            )))
        }
    }
}

/// Material parameters of the solid phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            young: 1.0,
            poisson: 0.3,
        }
    }
}

/// Stiffness matrix of a unit square bilinear element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementStiffness {
    k: [[f64; 8]; 8],
}

impl ElementStiffness {
    pub fn matrix(&self) -> &[[f64; 8]; 8] {
        &self.k
    }

    /// `u_e^T k0 u_e`.
    #[inline]
    pub fn energy(&self, ue: &[f64; 8]) -> f64 {
        let mut acc = 0.0;
        for (row, ui) in self.k.iter().zip(ue) {
            let mut r = 0.0;
            for (kij, uj) in row.iter().zip(ue) {
                r += kij * uj;
            }
            acc += ui * r;
        }
        acc
    }
}

/// Analytically integrated plane-stress stiffness of a unit square Q4 element.
pub fn element_stiffness(young: f64, poisson: f64) -> Result<ElementStiffness> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::param(format!("Young's modulus must be positive, got {young}")));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(Error::param(format!("Poisson's ratio must be in [0, 0.5), got {poisson}")));
    }
    let nu = poisson;
    let c = [
        0.5 - nu / 6.0,
        0.125 + nu / 8.0,
        -0.25 - nu / 12.0,
        -0.125 + 3.0 * nu / 8.0,
        -0.25 + nu / 12.0,
        -0.125 - nu / 8.0,
        nu / 6.0,
        0.125 - 3.0 * nu / 8.0,
    ];
    // index pattern into `c` for each entry
    const PATTERN: [[usize; 8]; 8] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ];
    let scale = young / (1.0 - nu * nu);
    let mut k = [[0.0; 8]; 8];
    for (r, row) in PATTERN.iter().enumerate() {
        for (col, &idx) in row.iter().enumerate() {
            k[r][col] = scale * c[idx];
        }
    }
    Ok(ElementStiffness { k })
}

/// Cached sparsity pattern and element scatter map for one domain.
///
/// Reusing an assembler across SIMP iterations avoids rebuilding the CSR
/// structure; only the values are rewritten.
#[derive(Debug, Clone)]
pub struct Assembler {
    domain: DesignDomain,
    pattern: CsrMatrix,
    /// For each element, the CSR value slot of every local (row, col) pair.
    slots: Vec<[usize; 64]>,
}

impl Assembler {
    pub fn new(domain: DesignDomain) -> Self {
        let nxn = domain.nx + 1;
        let nyn = domain.ny + 1;
        let n = domain.n_dofs();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n * 18);
        row_ptr.push(0);
        for j in 0..nyn {
            for i in 0..nxn {
                let mut cols = Vec::with_capacity(18);
                for nj in j.saturating_sub(1)..=(j + 1).min(nyn - 1) {
                    for ni in i.saturating_sub(1)..=(i + 1).min(nxn - 1) {
                        let nb = domain.node_index(ni, nj);
                        cols.push(2 * nb);
                        cols.push(2 * nb + 1);
                    }
                }
                cols.sort_unstable();
                for _ in 0..2 {
                    col_idx.extend_from_slice(&cols);
                    row_ptr.push(col_idx.len());
                }
            }
        }
        let nnz = col_idx.len();
        let pattern = CsrMatrix::from_parts(n, row_ptr, col_idx, vec![0.0; nnz]);

        let mut slots = Vec::with_capacity(domain.n_elements());
        for dofs in domain.all_element_dofs() {
            let mut s = [0usize; 64];
            for (a, &ra) in dofs.iter().enumerate() {
                for (b, &cb) in dofs.iter().enumerate() {
                    s[a * 8 + b] = pattern
                        .slot(ra, cb)
                        .expect("element coupling present in grid pattern");
                }
            }
            slots.push(s);
        }
        Self {
            domain,
            pattern,
            slots,
        }
    }

    pub fn domain(&self) -> DesignDomain {
        self.domain
    }

    /// `K = sum_e x_e^penal * scatter(k0)`.
    pub fn assemble(&self, density: &DensityField, penal: f64, k0: &ElementStiffness) -> Result<CsrMatrix> {
        density.check_domain(&self.domain)?;
        if !(penal >= 1.0) {
            return Err(Error::param(format!("penalization must be >= 1, got {penal}")));
        }
        let mut k = self.pattern.clone();
        let values = k.values_mut();
        let km = k0.matrix();
        for (slots, &x) in self.slots.iter().zip(density.values()) {
            let w = x.powf(penal);
            for a in 0..8 {
                for b in 0..8 {
                    values[slots[a * 8 + b]] += w * km[a][b];
                }
            }
        }
        Ok(k)
    }
}

/// Assembles the global stiffness matrix for `density`.
pub fn assemble_global(
    domain: DesignDomain,
    density: &DensityField,
    penal: f64,
    k0: &ElementStiffness,
) -> Result<CsrMatrix> {
    Assembler::new(domain).assemble(density, penal, k0)
}

/// External work `F^T U`.
pub fn compliance(u: &[f64], f: &[f64]) -> Result<f64> {
    if u.len() != f.len() {
        return Err(Error::param(format!(
            "displacement has {} entries, load vector {}",
            u.len(),
            f.len()
        )));
    }
    Ok(u.iter().zip(f).map(|(a, b)| a * b).sum())
}

/// Gathers the 8 element displacements of element `(ex, ey)`.
#[inline]
pub fn element_displacements(domain: &DesignDomain, u: &[f64], ex: usize, ey: usize) -> [f64; 8] {
    let dofs = domain.element_dofs(ex, ey);
    let mut ue = [0.0; 8];
    for (v, d) in ue.iter_mut().zip(dofs) {
        *v = u[d];
    }
    ue
}

/// `u_e^T k0 u_e` for every element, in element order.
pub fn element_energies(domain: &DesignDomain, u: &[f64], k0: &ElementStiffness) -> Result<Vec<f64>> {
    if u.len() != domain.n_dofs() {
        return Err(Error::param(format!(
            "displacement has {} entries, domain has {} DOFs",
            u.len(),
            domain.n_dofs()
        )));
    }
    let mut out = Vec::with_capacity(domain.n_elements());
    for ey in 0..domain.ny {
        for ex in 0..domain.nx {
            out.push(k0.energy(&element_displacements(domain, u, ex, ey)));
        }
    }
    Ok(out)
}

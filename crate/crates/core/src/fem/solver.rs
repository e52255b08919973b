use faer::col::ColMut;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LltRef, SymbolicCholesky, SymmetricOrdering};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Par, Side};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Above this many free DOFs `SolverKind::Auto` switches to conjugate gradients.
const AUTO_DIRECT_LIMIT: usize = 250_000;
const CG_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Auto,
    Cholesky,
    ConjugateGradient,
}

/// `K U = F` with the DOFs in `fixed_dofs` held at zero.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub stiffness: CsrMatrix,
    pub loads: Vec<f64>,
    pub fixed_dofs: Vec<usize>,
}

impl LinearSystem {
    fn free_dofs(&self) -> Result<Vec<usize>> {
        let n = self.stiffness.dim();
        let mut fixed = vec![false; n];
        for &d in &self.fixed_dofs {
            if d >= n {
                return Err(Error::param(format!("fixed DOF {d} out of range for {n} DOFs")));
            }
            fixed[d] = true;
        }
        Ok((0..n).filter(|&d| !fixed[d]).collect())
    }
}

pub fn solve_equilibrium(system: &LinearSystem) -> Result<Vec<f64>> {
    solve_equilibrium_with(system, SolverKind::Auto)
}

/// Solves the reduced system obtained by eliminating fixed rows and columns.
pub fn solve_equilibrium_with(system: &LinearSystem, kind: SolverKind) -> Result<Vec<f64>> {
    let n = system.stiffness.dim();
    if system.loads.len() != n {
        return Err(Error::param(format!(
            "load vector has {} entries, stiffness is {n}x{n}",
            system.loads.len()
        )));
    }
    if let Some(bad) = system.loads.iter().find(|v| !v.is_finite()) {
        return Err(Error::param(format!("non-finite load entry {bad}")));
    }
    if system.fixed_dofs.is_empty() {
        return Err(Error::Singular {
            stage: "equilibrium solve".into(),
            detail: "no fixed DOFs, rigid-body motion is unconstrained".into(),
        });
    }
    let free = system.free_dofs()?;
    let mut u = vec![0.0; n];
    if free.is_empty() {
        return Ok(u);
    }
    let k_free = system.stiffness.principal_submatrix(&free);
    let f_free: Vec<f64> = free.iter().map(|&d| system.loads[d]).collect();
    let f_norm = norm(&f_free);
    if f_norm == 0.0 {
        return Ok(u);
    }

    let kind = match kind {
        SolverKind::Auto if free.len() > AUTO_DIRECT_LIMIT => SolverKind::ConjugateGradient,
        SolverKind::Auto => SolverKind::Cholesky,
        k => k,
    };
    let u_free = match kind {
        SolverKind::ConjugateGradient => pcg(&k_free, &f_free)?,
        _ => {
            let factor = SparseCholesky::factor(&k_free)?;
            let mut x = factor.solve(&f_free);
            // one step of iterative refinement when roundoff is visible
            let r = residual(&k_free, &x, &f_free);
            if norm(&r) > 1e-12 * f_norm {
                let dx = factor.solve(&r);
                for (xi, d) in x.iter_mut().zip(dx) {
                    *xi += d;
                }
            }
            x
        }
    };

    let rel = norm(&residual(&k_free, &u_free, &f_free)) / f_norm.max(f64::EPSILON);
    if !(rel <= RESIDUAL_TOL) {
        return Err(Error::Singular {
            stage: "equilibrium solve".into(),
            detail: format!("relative residual {rel:e} exceeds {RESIDUAL_TOL:e}"),
        });
    }
    for (&d, v) in free.iter().zip(u_free) {
        u[d] = v;
    }
    Ok(u)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

/// Supernodal sparse Cholesky factor with a fill-reducing ordering.
///
/// Factorization and solves run sequentially so results do not depend on
/// thread scheduling.
struct SparseCholesky {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let singular = |detail: String| Error::Singular {
            stage: "Cholesky factorization".into(),
            detail,
        };
        // a symmetric CSR matrix is its own CSC transpose
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let mat = SparseColMatRef::new(pattern, a.values());
        let symbolic = factorize_symbolic_cholesky(pattern, Side::Lower, SymmetricOrdering::Amd, Default::default())
            .map_err(|e| singular(format!("symbolic analysis failed: {e:?}")))?;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut buf = MemBuffer::new(symbolic.factorize_numeric_llt_scratch::<f64>(Par::Seq, Default::default()));
        symbolic
            .factorize_numeric_llt(
                &mut values,
                mat,
                Side::Lower,
                Default::default(),
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .map_err(|e| singular(format!("{e:?}; the load path is not supported")))?;
        Ok(Self { symbolic, values })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let mut buf = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        LltRef::new(&self.symbolic, &self.values).solve_in_place_with_conj(
            Conj::No,
            ColMut::from_slice_mut(&mut x).as_mat_mut(),
            Par::Seq,
            MemStack::new(&mut buf),
        );
        x
    }
}

/// Jacobi-preconditioned conjugate gradients.
fn pcg(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, m)| ri * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = (10 * n).max(1000);
    for _ in 0..max_iter {
        if norm(&r) <= CG_TOL * b_norm {
            return Ok(x);
        }
        a.mul_vec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::Singular {
                stage: "conjugate gradient solve".into(),
                detail: format!("non-positive curvature {pap:e}; the load path is not supported"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm(&r) <= CG_TOL * b_norm {
        Ok(x)
    } else {
        Err(Error::Singular {
            stage: "conjugate gradient solve".into(),
            detail: format!("no convergence in {max_iter} iterations"),
        })
    }
}

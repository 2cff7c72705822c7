//! Common orthonormal eigenbasis of a commuting family of normal blocks.
//!
//! Each block splits as `B = H + iK` with Hermitian `H = (B + B†)/2` and
//! `K = (B − B†)/2i`. For a commuting normal family all `H_ij` and `K_ij`
//! commute, so their joint eigenspaces can be found by refinement: start from
//! the whole space and, generator by generator, split every current subspace
//! along the eigenvalue clusters of the generator compressed to it. Once every
//! generator has been used, each subspace lies inside a joint eigenspace of
//! the whole family.

use crate::block::{validate_family, BlockMatrix, DEFAULT_TOL_COMMUTE, DEFAULT_TOL_NORMAL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, outer, ComplexMatrix, C64};

/// Relative gap below which consecutive eigenvalues of a generator are
/// treated as one cluster.
pub const CLUSTER_GAP_REL: f64 = 1e-8;
/// Bound on the diagonalization leakage relative to `max(1, max ‖B_ij‖_F)`.
pub const RESIDUAL_REL: f64 = 1e-8;

/// Common eigenbasis `U` and the eigenvalue tables `beta[k][(i, j)] = u_k† B_ij u_k`.
#[derive(Debug, Clone)]
pub struct JointEigenStructure {
    /// Unitary `d × d`; column `k` is `u_k`.
    pub u: ComplexMatrix,
    /// One `n × n` table per column of `u`.
    pub beta: Vec<ComplexMatrix>,
    /// Worst `‖U† B_ij U − diag(β^{ij})‖_F` over all blocks.
    pub residual: f64,
}

impl JointEigenStructure {
    pub fn d(&self) -> usize {
        self.u.cols()
    }

    pub fn n(&self) -> usize {
        self.beta.first().map_or(0, ComplexMatrix::rows)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.u.column(k)
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.d();
        (&(&self.u.adjoint() * &self.u) - &ComplexMatrix::identity(d)).frobenius_norm()
    }
}

/// Validates the family at the default tolerances, then diagonalizes it.
pub fn simultaneous_diagonalize(t: &BlockMatrix) -> Result<JointEigenStructure> {
    simultaneous_diagonalize_with(t, DEFAULT_TOL_NORMAL, DEFAULT_TOL_COMMUTE)
}

pub fn simultaneous_diagonalize_with(
    t: &BlockMatrix,
    tol_normal: f64,
    tol_commute: f64,
) -> Result<JointEigenStructure> {
    if !validate_family(t, tol_normal, tol_commute).passes() {
        return Err(Error::FamilyInvalid);
    }
    diagonalize_validated(t)
}

/// Joint diagonalization without re-running the family checks. The caller
/// is responsible for having validated `t`.
pub fn diagonalize_validated(t: &BlockMatrix) -> Result<JointEigenStructure> {
    let d = t.d();
    let mut subspaces = vec![ComplexMatrix::identity(d)];

    'generators: for (_, block) in t.iter_blocks() {
        for part in [ComplexMatrix::hermitian_part, ComplexMatrix::skew_hermitian_part] {
            if subspaces.len() == d {
                break 'generators;
            }
            subspaces = refine(&subspaces, &part(block))?;
        }
    }

    let columns: Vec<Vec<C64>> = subspaces
        .iter()
        .flat_map(|q| (0..q.cols()).map(move |c| q.column(c)))
        .collect();
    let u = ComplexMatrix::from_columns(&columns)?;
    let beta = eigenvalue_tables(t, &u);
    let residual = leakage(t, &u, &beta);

    let bound = RESIDUAL_REL * t.max_block_norm().max(1.0);
    if residual > bound {
        return Err(Error::ResidualTooLarge { residual, bound });
    }
    Ok(JointEigenStructure { u, beta, residual })
}

fn refine(subspaces: &[ComplexMatrix], generator: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let norm = generator.frobenius_norm();
    if norm == 0.0 {
        return Ok(subspaces.to_vec());
    }
    let gap = CLUSTER_GAP_REL * norm.max(1.0);
    let mut out = Vec::with_capacity(subspaces.len());
    for q in subspaces {
        if q.cols() == 1 {
            out.push(q.clone());
            continue;
        }
        let compressed = &(&q.adjoint() * generator) * q;
        let eig = hermitian_eig(&compressed)?;
        let rotated = q * &eig.eigenvectors;
        let mut start = 0;
        for end in 1..=eig.len() {
            if end == eig.len() || eig.eigenvalues[end] - eig.eigenvalues[end - 1] >= gap {
                let cols: Vec<Vec<C64>> = (start..end).map(|c| rotated.column(c)).collect();
                out.push(ComplexMatrix::from_columns(&cols)?);
                start = end;
            }
        }
    }
    Ok(out)
}

/// Rayleigh quotients `u_k† B_ij u_k`.
fn eigenvalue_tables(t: &BlockMatrix, u: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let n = t.n();
    (0..u.cols())
        .map(|k| {
            let uk = u.column(k);
            ComplexMatrix::from_fn(n, n, |i, j| {
                let bu = t.block(i, j).matvec(&uk).expect("u has d rows");
                inner(&uk, &bu)
            })
        })
        .collect()
}

fn leakage(t: &BlockMatrix, u: &ComplexMatrix, beta: &[ComplexMatrix]) -> f64 {
    let ua = u.adjoint();
    t.iter_blocks()
        .map(|((i, j), b)| {
            let mut rotated = &(&ua * b) * u;
            for (k, table) in beta.iter().enumerate() {
                rotated[(k, k)] -= table[(i, j)];
            }
            rotated.frobenius_norm()
        })
        .fold(0.0, f64::max)
}

/// The `d` pairs `(M_k, u_k)` with `T = Σ_k M_k ⊗ u_k u_k†`.
pub fn decompose_eq1(
    t: &BlockMatrix,
    joint: &JointEigenStructure,
) -> Result<Vec<(ComplexMatrix, Vec<C64>)>> {
    if joint.u.shape() != (t.d(), t.d()) || joint.beta.len() != t.d() {
        return Err(Error::InconsistentInput(format!(
            "eigenbasis is {}x{} with {} tables, block size is {}",
            joint.u.rows(),
            joint.u.cols(),
            joint.beta.len(),
            t.d()
        )));
    }
    if joint.beta.iter().any(|m| m.shape() != (t.n(), t.n())) {
        return Err(Error::InconsistentInput(format!(
            "eigenvalue tables must be {0}x{0}",
            t.n()
        )));
    }
    Ok(joint
        .beta
        .iter()
        .enumerate()
        .map(|(k, m)| (m.clone(), joint.eigenvector(k)))
        .collect())
}

/// Dense `Σ_k M_k ⊗ u_k u_k†`.
pub fn reconstruct_eq1(pairs: &[(ComplexMatrix, Vec<C64>)]) -> ComplexMatrix {
    let (m0, u0) = &pairs[0];
    let dim = m0.rows() * u0.len();
    pairs.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, (m, u)| {
        &acc + &m.kron(&outer(u, u))
    })
}

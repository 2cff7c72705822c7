//! Dense brute-force checks.
//!
//! Everything here works on the full `nd × nd` matrix with the plain Jacobi
//! eigensolver and never touches the joint eigenbasis or the coefficient
//! matrices, so it can serve as ground truth for the structured path.

use serde_json::{json, Value};

use crate::block::BlockMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_with_tol, vec_norm, ComplexMatrix, C64};
use crate::separability::SeparableDecomposition;

/// Largest total dimension the dense oracle accepts.
pub const MAX_ORACLE_DIM: usize = 512;
/// Tolerance on `| ‖v‖ − 1 |` for decomposition factors.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensePsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// `‖T − T†‖_F` of the dense matrix.
    pub hermitian_defect: f64,
}

/// Dense eigensolve of `(T + T†)/2`; PSD iff `λ_min ≥ −tol · max(1, ‖T‖_F)`.
pub fn brute_force_psd(t: &BlockMatrix, tol: f64) -> Result<DensePsdReport> {
    let dense = dense_within_envelope(t)?;
    let hermitian_defect = dense.hermitian_defect()?;
    let sym = dense.hermitian_part();
    let eig = hermitian_eig_with_tol(&sym, f64::INFINITY)?;
    let min_eigenvalue = eig.min_eigenvalue();
    Ok(DensePsdReport {
        is_psd: min_eigenvalue >= -tol * dense.frobenius_norm().max(1.0),
        min_eigenvalue,
        hermitian_defect,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub checks: Vec<Check>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "decomposition",
            "passed": self.passed(),
            "failed_checks": self.failed_checks(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "measured": c.measured,
                "bound": c.bound,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Checks a decomposition term by term against the dense matrix:
///
/// * `nonnegative_weights`: smallest weight is `≥ 0`;
/// * `unit_factors`: every factor has unit norm within [`UNIT_NORM_TOL`];
/// * `reconstruction`: `‖T − Σ terms‖_F ≤ tol · max(1, ‖T‖_F)`;
/// * `length_bound`: at most `n·d` terms.
pub fn verify_decomposition(
    t: &BlockMatrix,
    dec: &SeparableDecomposition,
    tol: f64,
) -> Result<DecompositionReport> {
    let dense = dense_within_envelope(t)?;
    let (n, d) = (t.n(), t.d());
    for (i, term) in dec.terms.iter().enumerate() {
        if term.left.len() != n || term.right.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "term {i} has factors of length {} and {}, expected {n} and {d}",
                term.left.len(),
                term.right.len()
            )));
        }
    }

    let min_weight = dec
        .terms
        .iter()
        .map(|t| t.weight)
        .fold(f64::INFINITY, f64::min);
    let worst_norm = dec
        .terms
        .iter()
        .flat_map(|t| [vec_norm(&t.left), vec_norm(&t.right)])
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max);

    // Σ λ (v ⊗ u)(v ⊗ u)†, accumulated entry by entry.
    let dim = n * d;
    let mut residual = dense;
    for term in &dec.terms {
        let x: Vec<C64> = term
            .left
            .iter()
            .flat_map(|&a| term.right.iter().map(move |&b| a * b))
            .collect();
        for r in 0..dim {
            let xr = x[r] * term.weight;
            for c in 0..dim {
                residual[(r, c)] -= xr * x[c].conj();
            }
        }
    }
    let scale = t.frobenius_norm().max(1.0);
    let recon_bound = tol * scale;
    let recon = residual.frobenius_norm();

    Ok(DecompositionReport {
        checks: vec![
            Check {
                name: "nonnegative_weights",
                passed: dec.terms.is_empty() || min_weight >= 0.0,
                measured: if dec.terms.is_empty() { 0.0 } else { min_weight },
                bound: 0.0,
            },
            Check {
                name: "unit_factors",
                passed: worst_norm <= UNIT_NORM_TOL,
                measured: worst_norm,
                bound: UNIT_NORM_TOL,
            },
            Check {
                name: "reconstruction",
                passed: recon <= recon_bound,
                measured: recon,
                bound: recon_bound,
            },
            Check {
                name: "length_bound",
                passed: dec.len() <= n * d,
                measured: dec.len() as f64,
                bound: (n * d) as f64,
            },
        ],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub passed: bool,
    /// Dense `X† T X` (real part).
    pub value: f64,
    pub claimed: f64,
    pub bound: f64,
}

impl WitnessReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "witness",
            "passed": self.passed,
            "value": self.value,
            "claimed": self.claimed,
            "bound": self.bound,
            "failed_checks": if self.passed { vec![] } else { vec!["witness"] },
        })
    }
}

/// Passes iff `|X† T X − claimed| ≤ tol · max(1, ‖T‖_F)` and `claimed < 0`.
pub fn verify_witness(t: &BlockMatrix, x: &[C64], claimed: f64, tol: f64) -> Result<WitnessReport> {
    if x.len() != t.dim() {
        return Err(Error::ShapeMismatch(format!(
            "witness has length {}, matrix dimension is {}",
            x.len(),
            t.dim()
        )));
    }
    let dense = dense_within_envelope(t)?;
    let value = dense.quadratic_form(x)?.re;
    let bound = tol * dense.frobenius_norm().max(1.0);
    Ok(WitnessReport {
        passed: (value - claimed).abs() <= bound && claimed < 0.0,
        value,
        claimed,
        bound,
    })
}

fn dense_within_envelope(t: &BlockMatrix) -> Result<ComplexMatrix> {
    if t.dim() > MAX_ORACLE_DIM {
        return Err(Error::TooLarge {
            dim: t.dim(),
            max: MAX_ORACLE_DIM,
        });
    }
    Ok(t.to_dense())
}

//! Positivity test, separable decomposition and negativity witness.
//!
//! With `T = Σ_k M_k ⊗ u_k u_k†` and orthonormal `{u_k}`, `T` is positive
//! semidefinite exactly when every coefficient matrix `M_k` is. In that case
//! the spectral decompositions `M_k = Σ_j λ_j^k v_j^k v_j^k†` give the
//! separable decomposition `T = Σ_{k,j} λ_j^k v_j^k v_j^k† ⊗ u_k u_k†`, with at
//! most `n·d` terms. Otherwise `v ⊗ u_k` for a negative eigenpair `(λ, v)` of
//! some `M_k` satisfies `X† T X = λ < 0`.

use serde_json::{json, Value};

use crate::block::{validate_family, BlockMatrix, FamilyReport, DEFAULT_TOL_COMMUTE, DEFAULT_TOL_NORMAL};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{hermitian_eig_with_tol, kron_vec, outer, ComplexMatrix, HermitianEig, C64};
use crate::simdiag::{diagonalize_validated, JointEigenStructure};

/// Relative tolerance on the smallest eigenvalue of each coefficient matrix.
pub const DEFAULT_TOL_PSD: f64 = 1e-9;
/// Relative Hermiticity tolerance for `T` and for each coefficient matrix.
pub const HERMITIAN_REL_TOL: f64 = 1e-9;
/// Eigenvalues at or below this (relative) are dropped from decompositions.
pub const WEIGHT_DROP_REL: f64 = 1e-12;

/// Tolerances for the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub normal: f64,
    pub commute: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            normal: DEFAULT_TOL_NORMAL,
            commute: DEFAULT_TOL_COMMUTE,
            psd: DEFAULT_TOL_PSD,
        }
    }
}

/// The `n × n` matrix of block eigenvalues attached to eigenvector `u_k`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub k: usize,
    pub matrix: ComplexMatrix,
    /// Filled in by [`check_psd_all`].
    pub eig: Option<HermitianEig>,
}

impl CoefficientMatrix {
    fn scale(&self) -> f64 {
        self.matrix.frobenius_norm().max(1.0)
    }
}

pub fn coefficient_matrices(joint: &JointEigenStructure) -> Vec<CoefficientMatrix> {
    joint
        .beta
        .iter()
        .enumerate()
        .map(|(k, m)| CoefficientMatrix {
            k,
            matrix: m.clone(),
            eig: None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdSummary {
    pub all_psd: bool,
    /// `λ_min(M_k)` for each `k`.
    pub min_eigenvalues: Vec<f64>,
}

/// Eigensolves every coefficient matrix (caching the result on the record)
/// and tests `λ_min(M_k) ≥ −tol · max(1, ‖M_k‖_F)` for all `k`.
pub fn check_psd_all(ms: &mut [CoefficientMatrix], tol: f64) -> Result<PsdSummary> {
    let mut all_psd = true;
    let mut min_eigenvalues = Vec::with_capacity(ms.len());
    for m in ms.iter_mut() {
        if m.eig.is_none() {
            m.eig = Some(hermitian_eig_with_tol(&m.matrix, HERMITIAN_REL_TOL)?);
        }
        let lmin = m.eig.as_ref().map_or(f64::NAN, HermitianEig::min_eigenvalue);
        if lmin < -tol * m.scale() {
            all_psd = false;
        }
        min_eigenvalues.push(lmin);
    }
    Ok(PsdSummary {
        all_psd,
        min_eigenvalues,
    })
}

/// Vector `X ∈ ℂ^{nd}` with `X† T X = value < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub vector: Vec<C64>,
    pub value: f64,
    pub k: usize,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        json!({
            "vector": json::vector_to_json(&self.vector),
            "value": self.value,
            "k": self.k,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Ok(Self {
            vector: json::vector_from_json(json::field(v, "vector", "")?, "vector")?,
            value: json::f64_field(v, "value", "")?,
            k: json::usize_field(v, "k", "")?,
        })
    }
}

/// Builds `X = v ⊗ u_k` from the lowest eigenpair of `M_k`.
///
/// Since `T = Σ_s M_s ⊗ u_s u_s†` and the `u_s` are orthonormal,
/// `X† T X = v† M_k v = λ_min(M_k)`.
pub fn witness(
    ms: &[CoefficientMatrix],
    joint: &JointEigenStructure,
    k: usize,
    tol: f64,
) -> Result<Witness> {
    let m = ms
        .iter()
        .find(|m| m.k == k)
        .ok_or_else(|| Error::InconsistentInput(format!("no coefficient matrix with index {k}")))?;
    if k >= joint.d() {
        return Err(Error::InconsistentInput(format!(
            "eigenvector index {k} out of range for d = {}",
            joint.d()
        )));
    }
    let eig = match &m.eig {
        Some(e) => e.clone(),
        None => hermitian_eig_with_tol(&m.matrix, HERMITIAN_REL_TOL)?,
    };
    let value = eig.min_eigenvalue();
    if value >= -tol * m.scale() {
        return Err(Error::NotNegative {
            k,
            min_eigenvalue: value,
        });
    }
    Ok(Witness {
        vector: kron_vec(&eig.eigenvector(0), &joint.eigenvector(k)),
        value,
        k,
    })
}

/// One rank-one product term `weight · (left left†) ⊗ (right right†)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    /// Unit vector in `ℂⁿ`.
    pub left: Vec<C64>,
    /// Unit vector in `ℂ^d`.
    pub right: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparableDecomposition {
    pub terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dense `Σ λ · (v v†) ⊗ (u u†)`. Requires at least one term.
    pub fn reconstruct(&self) -> Option<ComplexMatrix> {
        let first = self.terms.first()?;
        let dim = first.left.len() * first.right.len();
        Some(self.terms.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, t| {
            let x = kron_vec(&t.left, &t.right);
            &acc + &outer(&x, &x).scale(C64::new(t.weight, 0.0))
        }))
    }

    /// Groups terms sharing the same right factor into `(M, u)` pairs with
    /// `M = Σ λ v v†`, in order of first appearance.
    pub fn regrouped(&self) -> Vec<(ComplexMatrix, Vec<C64>)> {
        let mut groups: Vec<(ComplexMatrix, Vec<C64>)> = Vec::new();
        for t in &self.terms {
            let term = outer(&t.left, &t.left).scale(C64::new(t.weight, 0.0));
            match groups.iter_mut().find(|(_, u)| *u == t.right) {
                Some((m, _)) => *m = &*m + &term,
                None => groups.push((term, t.right.clone())),
            }
        }
        groups
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self
                .terms
                .iter()
                .map(|t| json!({
                    "weight": t.weight,
                    "left": json::vector_to_json(&t.left),
                    "right": json::vector_to_json(&t.right),
                }))
                .collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let terms = json::array(json::field(v, "terms", "")?, "terms")?;
        let terms = terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let path = format!("terms[{i}]");
                Ok(SeparableTerm {
                    weight: json::f64_field(t, "weight", &path)?,
                    left: json::vector_from_json(
                        json::field(t, "left", &path)?,
                        &format!("{path}.left"),
                    )?,
                    right: json::vector_from_json(
                        json::field(t, "right", &path)?,
                        &format!("{path}.right"),
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }
}

/// Result of the full pipeline.
#[derive(Debug, Clone)]
pub enum Verdict {
    Separable(SeparableDecomposition),
    NotPsd(Witness),
    /// `T` itself is not Hermitian, so it cannot be positive semidefinite.
    NotHermitian { defect: f64, bound: f64 },
    HypothesesFail(FamilyReport),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Separable(_) => "separable",
            Verdict::NotPsd(_) | Verdict::NotHermitian { .. } => "not_psd",
            Verdict::HypothesesFail(_) => "hypotheses_fail",
        }
    }
}

/// Verdict together with the intermediate products of the pipeline.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub verdict: Verdict,
    pub family: FamilyReport,
    pub joint: Option<JointEigenStructure>,
    pub coefficients: Vec<CoefficientMatrix>,
    pub min_eigenvalues: Vec<f64>,
}

/// Runs the pipeline at the default tolerances.
pub fn decompose(t: &BlockMatrix) -> Result<Verdict> {
    Ok(analyze(t, &Tolerances::default())?.verdict)
}

/// Validation, joint diagonalization, positivity test, then either a
/// decomposition or a witness.
pub fn analyze(t: &BlockMatrix, tol: &Tolerances) -> Result<Analysis> {
    let family = validate_family(t, tol.normal, tol.commute);
    let mut analysis = Analysis {
        verdict: Verdict::HypothesesFail(family.clone()),
        family,
        joint: None,
        coefficients: Vec::new(),
        min_eigenvalues: Vec::new(),
    };
    if !analysis.family.passes() {
        return Ok(analysis);
    }

    let defect = block_hermitian_defect(t);
    let bound = HERMITIAN_REL_TOL * t.frobenius_norm().max(1.0);
    if defect > bound {
        analysis.verdict = Verdict::NotHermitian { defect, bound };
        return Ok(analysis);
    }

    let joint = diagonalize_validated(t)?;
    let mut ms = coefficient_matrices(&joint);
    let summary = check_psd_all(&mut ms, tol.psd)?;

    analysis.verdict = if summary.all_psd {
        Verdict::Separable(assemble(&ms, &joint))
    } else {
        let k = most_negative(&ms, tol.psd);
        Verdict::NotPsd(witness(&ms, &joint, k, tol.psd)?)
    };
    analysis.min_eigenvalues = summary.min_eigenvalues;
    analysis.coefficients = ms;
    analysis.joint = Some(joint);
    Ok(analysis)
}

/// Among the coefficient matrices failing the positivity test, the one with
/// the most negative `λ_min`; ties go to the smallest `k`.
fn most_negative(ms: &[CoefficientMatrix], tol: f64) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for m in ms {
        let lmin = m.eig.as_ref().map_or(f64::NAN, HermitianEig::min_eigenvalue);
        if lmin >= -tol * m.scale() {
            continue;
        }
        if best.map_or(true, |(b, _)| lmin < b) {
            best = Some((lmin, m.k));
        }
    }
    best.map_or(0, |(_, k)| k)
}

fn assemble(ms: &[CoefficientMatrix], joint: &JointEigenStructure) -> SeparableDecomposition {
    let mut terms = Vec::new();
    for m in ms {
        let eig = m.eig.as_ref().expect("eigensolved by check_psd_all");
        let drop = WEIGHT_DROP_REL * m.scale();
        let u = joint.eigenvector(m.k);
        for j in (0..eig.len()).rev() {
            let weight = eig.eigenvalues[j];
            if weight > drop {
                terms.push(SeparableTerm {
                    weight,
                    left: eig.eigenvector(j),
                    right: u.clone(),
                });
            }
        }
    }
    SeparableDecomposition { terms }
}

/// `‖T − T†‖_F` computed block by block.
fn block_hermitian_defect(t: &BlockMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..t.n() {
        for j in 0..t.n() {
            let a = t.block(i, j);
            let b = t.block(j, i);
            for r in 0..t.d() {
                for c in 0..t.d() {
                    acc += (a[(r, c)] - b[(c, r)].conj()).norm_sqr();
                }
            }
        }
    }
    acc.sqrt()
}

/// Outcome of the entrywise necessary condition for positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryCondition {
    pub passes: bool,
    /// `(k, i, j)` with `i ≤ j`; `i == j` marks a negative diagonal entry.
    pub violations: Vec<(usize, usize, usize)>,
    /// Whether the stricter inequality `|β_k^{ij}| ≤ β_k^{ii}` holds for all
    /// entries. Diagnostic only: positive semidefinite matrices can violate it.
    pub strict_form_holds: bool,
}

/// Checks `Re M_ii ≥ −tol` and `|M_ij|² ≤ Re M_ii · Re M_jj + tol` for every
/// coefficient matrix, with `tol = 1e-9 · max(1, ‖M_k‖_F)²`. Any violation
/// rules out positivity without an eigensolve.
pub fn necessary_condition(ms: &[CoefficientMatrix]) -> NecessaryCondition {
    let mut violations = Vec::new();
    let mut strict_form_holds = true;
    for m in ms {
        let a = &m.matrix;
        let n = a.rows();
        let scale = m.scale();
        let tol = HERMITIAN_REL_TOL * scale * scale;
        let diag_tol = HERMITIAN_REL_TOL * scale;
        for i in 0..n {
            let aii = a[(i, i)].re;
            if aii < -diag_tol {
                violations.push((m.k, i, i));
            }
            for j in 0..n {
                let mag = a[(i, j)].norm();
                if i != j && mag > aii + diag_tol {
                    strict_form_holds = false;
                }
                if j > i && mag * mag > aii * a[(j, j)].re + tol {
                    violations.push((m.k, i, j));
                }
            }
        }
    }
    NecessaryCondition {
        passes: violations.is_empty(),
        violations,
        strict_form_holds,
    }
}

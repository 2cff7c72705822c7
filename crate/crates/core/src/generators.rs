//! Structured block families: constant-coefficient circulants, power-Toeplitz
//! matrices, polynomial families of one normal matrix, and a seeded random
//! factory.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::block::{BlockMatrix, DEFAULT_TOL_NORMAL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, is_normal, ComplexMatrix, C64};

/// Cyclic shift with ones on the subdiagonal and in the top-right corner,
/// so `S e_c = e_{c+1 mod d}`.
pub fn shift_matrix(d: usize) -> Result<ComplexMatrix> {
    shift_power(d, 1)
}

/// `S^m` for any integer `m`; negative powers are adjoint powers.
pub fn shift_power(d: usize, m: i64) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("shift matrix needs d >= 1".into()));
    }
    let m = m.rem_euclid(d as i64) as usize;
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + m) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Primitive root `ε = exp(2πi/d)` raised to `p`.
pub fn root_of_unity(d: usize, p: i64) -> C64 {
    let p = p.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * p / d as f64)
}

/// Normalized Fourier vector with components `ε̄^{kl}/√d`; `S u_k = ε^k u_k`.
pub fn fourier_vector(d: usize, k: usize) -> Vec<C64> {
    let norm = (d as f64).sqrt();
    (0..d)
        .map(|l| root_of_unity(d, -((k * l) as i64)) / norm)
        .collect()
}

/// Block matrix with blocks `a_ij S^{i−j}`.
pub fn circulant_constant(a: &ComplexMatrix, d: usize) -> Result<BlockMatrix> {
    let n = a
        .require_square()
        .map_err(|_| Error::InvalidDimension(format!("A must be square, got {}x{}", a.rows(), a.cols())))?;
    if d == 0 {
        return Err(Error::InvalidDimension("circulant needs d >= 1".into()));
    }
    BlockMatrix::from_fn(n, d, |i, j| {
        Ok(shift_power(d, i as i64 - j as i64)?.scale(a[(i, j)]))
    })
}

/// Block Toeplitz matrix with `B^{j−i}` above the diagonal, `(B^{i−j})†`
/// below and identities on the diagonal.
pub fn power_toeplitz(b: &ComplexMatrix, n: usize) -> Result<BlockMatrix> {
    require_normal(b)?;
    if n == 0 {
        return Err(Error::InvalidDimension("power-Toeplitz needs n >= 1".into()));
    }
    let mut powers = vec![ComplexMatrix::identity(b.rows())];
    for p in 1..n {
        let next = &powers[p - 1] * b;
        powers.push(next);
    }
    let adjoints: Vec<ComplexMatrix> = powers.iter().map(ComplexMatrix::adjoint).collect();
    BlockMatrix::from_fn(n, b.rows(), |i, j| {
        Ok(if j >= i {
            powers[j - i].clone()
        } else {
            adjoints[i - j].clone()
        })
    })
}

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSpec {
    pub coefficients: Vec<C64>,
}

impl PolynomialSpec {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidDimension("polynomial needs at least one coefficient".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn constant(c: C64) -> Self {
        Self {
            coefficients: vec![c],
        }
    }

    /// Horner evaluation at a scalar.
    pub fn eval(&self, x: C64) -> C64 {
        self.coefficients
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = b.require_square()?;
        let ident = ComplexMatrix::identity(d);
        let mut acc = ComplexMatrix::zeros(d, d);
        for &c in self.coefficients.iter().rev() {
            acc = &(&acc * b) + &ident.scale(c);
        }
        Ok(acc)
    }

    /// Polynomial with conjugated coefficients, so `p̄(B†) = p(B)†`.
    pub fn conjugate(&self) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(C64::conj).collect(),
        }
    }
}

/// Block matrix `(P_ij(B))` for a normal `B`.
pub fn polynomial_family(b: &ComplexMatrix, grid: &[Vec<PolynomialSpec>]) -> Result<BlockMatrix> {
    require_normal(b)?;
    let n = grid.len();
    if n == 0 || grid.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidDimension("polynomial grid must be square and nonempty".into()));
    }
    BlockMatrix::from_fn(n, b.rows(), |i, j| grid[i][j].eval_matrix(b))
}

fn require_normal(b: &ComplexMatrix) -> Result<()> {
    if !is_normal(b, DEFAULT_TOL_NORMAL)? {
        return Err(Error::NotNormal {
            defect: b.normality_defect()?,
        });
    }
    Ok(())
}

fn gaussian_c64(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-like random unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &cols {
                let proj = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = crate::linalg::vec_norm(&v);
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    ComplexMatrix::from_columns(&cols).expect("d columns of length d")
}

/// `Q diag(λ) Q†`.
pub fn normal_from_spectrum(q: &ComplexMatrix, eigenvalues: &[C64]) -> ComplexMatrix {
    &(q * &ComplexMatrix::from_diagonal(eigenvalues)) * &q.adjoint()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian_c64(rng)).hermitian_part()
}

/// `G G†` for an `n × rank` Gaussian `G`.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, rank.max(1), |_, _| gaussian_c64(rng));
    &g * &g.adjoint()
}

/// Seeded random member of the commuting normal class, with its generating
/// data kept alongside so tests can compare against closed forms.
#[derive(Debug, Clone)]
pub struct RandomFamily {
    pub seed: u64,
    pub matrix: BlockMatrix,
    /// The normal matrix all blocks are functions of.
    pub b: ComplexMatrix,
    /// Unitary whose columns diagonalize every block.
    pub basis: ComplexMatrix,
    /// Eigenvalues of `b`, aligned with the columns of `basis`.
    pub b_eigenvalues: Vec<C64>,
    /// Coefficient matrices computed from the closed form, aligned with
    /// the columns of `basis`.
    pub coefficients: Vec<ComplexMatrix>,
    /// Multiple of the identity added to the diagonal.
    pub shift: f64,
}

impl RandomFamily {
    /// Smallest eigenvalue of the closed-form coefficient matrices, which is
    /// also the smallest eigenvalue of the dense matrix.
    pub fn analytic_min_eigenvalue(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|m| hermitian_eig(m).expect("coefficients are Hermitian").min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// Shifts the diagonal so that the smallest eigenvalue equals `margin`.
    /// A negative margin yields an indefinite matrix.
    pub fn with_min_eigenvalue(&self, margin: f64) -> Self {
        let delta = margin - self.analytic_min_eigenvalue();
        let n = self.matrix.n();
        let mut out = self.clone();
        out.matrix = self.matrix.shift_diagonal(delta);
        out.shift += delta;
        out.coefficients = self
            .coefficients
            .iter()
            .map(|m| m + &ComplexMatrix::identity(n).scale(C64::new(delta, 0.0)))
            .collect();
        out
    }
}

/// Builds a Hermitian block matrix whose blocks are polynomials of one
/// random normal `B`.
///
/// `B = p(G) + i q(G)` for a random Hermitian `G` and real polynomials `p`,
/// `q`, so `B` and `B†` are both polynomials of `G` and every block below
/// commutes with every other. Blocks above the diagonal are `P_ij(B)` for
/// random complex quadratics, blocks below are their adjoints, and diagonal
/// blocks are the Hermitian parts of `P_ii(B)`. About a quarter of the seeds
/// give `G` a repeated eigenvalue.
pub fn random_family(seed: u64, n: usize, d: usize) -> Result<RandomFamily> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidDimension(format!("random family needs n, d >= 1, got n={n}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if d >= 2 && rng.gen_bool(0.25) {
        g[1] = g[0];
    }
    let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let real_poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
    let b_eigenvalues: Vec<C64> = g
        .iter()
        .map(|&x| C64::new(real_poly(&p, x), real_poly(&q, x)))
        .collect();

    let basis = random_unitary(&mut rng, d);
    let b = normal_from_spectrum(&basis, &b_eigenvalues);

    let mut polys = vec![vec![PolynomialSpec::constant(C64::new(0.0, 0.0)); n]; n];
    for (i, row) in polys.iter_mut().enumerate() {
        for poly in row.iter_mut().skip(i) {
            *poly = PolynomialSpec::new((0..3).map(|_| gaussian_c64(&mut rng)).collect())?;
        }
    }

    let mut upper = vec![vec![None; n]; n];
    for (i, row) in upper.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate().skip(i) {
            *slot = Some(polys[i][j].eval_matrix(&b)?);
        }
    }
    let matrix = BlockMatrix::from_fn(n, d, |i, j| {
        Ok(match i.cmp(&j) {
            std::cmp::Ordering::Less => upper[i][j].clone().expect("filled above"),
            std::cmp::Ordering::Equal => upper[i][i].as_ref().expect("filled above").hermitian_part(),
            std::cmp::Ordering::Greater => upper[j][i].as_ref().expect("filled above").adjoint(),
        })
    })?;

    let coefficients = b_eigenvalues
        .iter()
        .map(|&beta| {
            ComplexMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => polys[i][j].eval(beta),
                std::cmp::Ordering::Equal => C64::new(polys[i][i].eval(beta).re, 0.0),
                std::cmp::Ordering::Greater => polys[j][i].eval(beta).conj(),
            })
        })
        .collect();

    Ok(RandomFamily {
        seed,
        matrix,
        b,
        basis,
        b_eigenvalues,
        coefficients,
        shift: 0.0,
    })
}

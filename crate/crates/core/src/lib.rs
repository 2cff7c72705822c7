//! Separability certificates for block matrices whose blocks are normal and
//! pairwise commuting.
//!
//! A block matrix `T = Σ E_ij ⊗ B_ij` with `n × n` blocks of size `d × d`
//! whose blocks share a common orthonormal eigenbasis `{u_k}` splits as
//! `T = Σ_k M_k ⊗ u_k u_k†`, where `M_k` is the `n × n` matrix of block
//! eigenvalues attached to `u_k`. Positivity of `T` then reduces to positivity
//! of the `d` small matrices `M_k`, and their spectral decompositions give an
//! explicit separable decomposition with at most `n·d` rank-one terms. When
//! some `M_k` has a negative eigenvalue, the pair `v ⊗ u_k` is a vector on
//! which the quadratic form of `T` is negative.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex matrices and a cyclic Jacobi Hermitian eigensolver.
//! * [`block`]: the block-matrix container, family validation, JSON format.
//! * [`simdiag`]: common eigenbasis of a commuting normal family.
//! * [`separability`]: positivity test, decomposition, witness.
//! * [`generators`]: structured and seeded random instances.
//! * [`oracle`]: dense brute-force checks independent of the fast path.
//! * [`cli`]: the `blocksep` command-line front end.

pub mod block;
pub mod cli;
pub mod error;
pub mod generators;
pub mod json;
pub mod linalg;
pub mod oracle;
pub mod separability;
pub mod simdiag;

pub use block::{BlockMatrix, FamilyReport};
pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, HermitianEig, C64};
pub use separability::{SeparableDecomposition, Verdict};
pub use simdiag::JointEigenStructure;

//! Block matrices `T = Σ E_ij ⊗ B_ij` with an `n × n` grid of `d × d` blocks.
//!
//! The `n`-dimensional factor is the outer one: block `(i, j)` occupies dense
//! rows `[i·d, (i+1)·d)` and columns `[j·d, (j+1)·d)`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{commutator_norm, ComplexMatrix, C64};

/// Default relative tolerance for the normality test of each block.
pub const DEFAULT_TOL_NORMAL: f64 = 1e-10;
/// Default relative tolerance for pairwise commutators.
pub const DEFAULT_TOL_COMMUTE: f64 = 1e-10;
/// Cap on the number of offenders listed in a [`FamilyReport`].
pub const MAX_REPORTED_OFFENDERS: usize = 10;

pub type BlockIndex = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    d: usize,
    /// Row-major grid, `blocks[i * n + j]`.
    blocks: Vec<ComplexMatrix>,
}

impl BlockMatrix {
    /// Builds a block matrix from an `n × n` grid of `d × d` blocks.
    pub fn from_blocks(grid: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let n = grid.len();
        if n == 0 {
            return Err(Error::InvalidDimension("block grid is empty".into()));
        }
        let d = grid[0]
            .first()
            .ok_or_else(|| Error::InvalidDimension("block grid row 0 is empty".into()))?
            .rows();
        let mut blocks = Vec::with_capacity(n * n);
        for (i, row) in grid.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::mismatch(
                    format!("{n} blocks in grid row {i}"),
                    row.len(),
                ));
            }
            for (j, b) in row.into_iter().enumerate() {
                if b.shape() != (d, d) {
                    return Err(Error::mismatch(
                        format!("{d}x{d} block at ({i}, {j})"),
                        format!("{}x{}", b.rows(), b.cols()),
                    ));
                }
                blocks.push(b);
            }
        }
        Ok(Self { n, d, blocks })
    }

    pub fn from_fn(
        n: usize,
        d: usize,
        mut f: impl FnMut(usize, usize) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        let grid = (0..n)
            .map(|i| (0..n).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let t = Self::from_blocks(grid)?;
        if t.d != d {
            return Err(Error::mismatch(format!("block size {d}"), t.d));
        }
        Ok(t)
    }

    /// Partitions an `nd × nd` dense matrix into `d × d` blocks.
    pub fn from_dense(m: &ComplexMatrix, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidDimension(format!("n={n}, d={d}")));
        }
        if m.shape() != (n * d, n * d) {
            return Err(Error::mismatch(
                format!("{0}x{0}", n * d),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        let blocks = (0..n * n)
            .map(|b| {
                let (i, j) = (b / n, b % n);
                ComplexMatrix::from_fn(d, d, |r, c| m[(i * d + r, j * d + c)])
            })
            .collect();
        Ok(Self { n, d, blocks })
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let d = self.d;
        ComplexMatrix::from_fn(self.n * d, self.n * d, |r, c| {
            self.block(r / d, c / d)[(r % d, c % d)]
        })
    }

    /// Number of blocks per row.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Block dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Total dimension `n·d`.
    pub fn dim(&self) -> usize {
        self.n * self.d
    }

    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.n + j]
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut ComplexMatrix {
        &mut self.blocks[i * self.n + j]
    }

    /// Blocks with their grid indices, row-major.
    pub fn iter_blocks(&self) -> impl Iterator<Item = (BlockIndex, &ComplexMatrix)> {
        let n = self.n;
        self.blocks
            .iter()
            .enumerate()
            .map(move |(b, m)| ((b / n, b % n), m))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_block_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(ComplexMatrix::frobenius_norm)
            .fold(0.0, f64::max)
    }

    /// `T + shift · I_{nd}`.
    pub fn shift_diagonal(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let b = out.block_mut(i, i);
            for r in 0..self.d {
                b[(r, r)] += C64::new(shift, 0.0);
            }
        }
        out
    }

    /// Shared JSON representation `{"n", "d", "blocks"}`; `meta` is attached
    /// verbatim when present.
    pub fn to_json(&self, meta: Option<Value>) -> Value {
        let grid: Vec<Value> = (0..self.n)
            .map(|i| {
                Value::Array(
                    (0..self.n)
                        .map(|j| json::matrix_to_json(self.block(i, j)))
                        .collect(),
                )
            })
            .collect();
        let mut obj = json!({ "n": self.n, "d": self.d, "blocks": grid });
        if let Some(meta) = meta {
            obj["meta"] = meta;
        }
        obj
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json::usize_field(v, "n", "")?;
        let d = json::usize_field(v, "d", "")?;
        if n == 0 {
            return Err(Error::parse("n", "must be positive"));
        }
        if d == 0 {
            return Err(Error::parse("d", "must be positive"));
        }
        let rows = json::array(json::field(v, "blocks", "")?, "blocks")?;
        if rows.len() != n {
            return Err(Error::parse(
                "blocks",
                format!("expected {n} block rows, got {}", rows.len()),
            ));
        }
        let mut blocks = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let path = format!("blocks[{i}]");
            let row = json::array(row, &path)?;
            if row.len() != n {
                return Err(Error::parse(
                    path,
                    format!("expected {n} blocks, got {}", row.len()),
                ));
            }
            for (j, b) in row.iter().enumerate() {
                blocks.push(json::matrix_from_json(
                    b,
                    &format!("blocks[{i}][{j}]"),
                    Some((d, d)),
                )?);
            }
        }
        Ok(Self { n, d, blocks })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::parse("<root>", e))?;
        Self::from_json(&v)
    }
}

/// Outcome of checking the commuting-normal hypotheses on a block family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub is_normal_family: bool,
    pub is_commuting_family: bool,
    /// Largest `‖BB† − B†B‖_F` over all blocks.
    pub max_normality_defect: f64,
    /// Largest `‖AB − BA‖_F` over all unordered block pairs.
    pub max_commutator_norm: f64,
    /// Blocks failing the scaled normality test, sorted, at most ten.
    pub non_normal_blocks: Vec<BlockIndex>,
    /// Pairs failing the scaled commutator test, sorted, at most ten.
    pub offending_pairs: Vec<(BlockIndex, BlockIndex)>,
    pub tol_normal: f64,
    pub tol_commute: f64,
}

impl FamilyReport {
    pub fn passes(&self) -> bool {
        self.is_normal_family && self.is_commuting_family
    }

    pub fn to_json(&self) -> Value {
        let idx = |(i, j): BlockIndex| json!([i, j]);
        json!({
            "is_normal_family": self.is_normal_family,
            "is_commuting_family": self.is_commuting_family,
            "max_normality_defect": self.max_normality_defect,
            "max_commutator_norm": self.max_commutator_norm,
            "non_normal_blocks": self.non_normal_blocks.iter().map(|&b| idx(b)).collect::<Vec<_>>(),
            "offending_pairs": self
                .offending_pairs
                .iter()
                .map(|&(a, b)| json!([idx(a), idx(b)]))
                .collect::<Vec<_>>(),
            "tol_normal": self.tol_normal,
            "tol_commute": self.tol_commute,
        })
    }
}

/// Checks normality of every block and commutativity of every unordered
/// pair of blocks.
///
/// A block passes when `‖[B, B†]‖_F ≤ tol_normal · max(1, ‖B‖_F²)`; a pair
/// passes when `‖[A, B]‖_F ≤ tol_commute · max(1, ‖A‖_F) · max(1, ‖B‖_F)`.
pub fn validate_family(t: &BlockMatrix, tol_normal: f64, tol_commute: f64) -> FamilyReport {
    let n2 = t.n * t.n;
    let index = |b: usize| (b / t.n, b % t.n);
    let norms: Vec<f64> = t.blocks.iter().map(ComplexMatrix::frobenius_norm).collect();

    let mut max_normality_defect = 0.0f64;
    let mut non_normal = Vec::new();
    for (b, block) in t.blocks.iter().enumerate() {
        let defect = block.normality_defect().expect("blocks are square");
        max_normality_defect = max_normality_defect.max(defect);
        if defect > tol_normal * norms[b].powi(2).max(1.0) {
            non_normal.push(index(b));
        }
    }

    let mut max_commutator = 0.0f64;
    let mut offending = Vec::new();
    for a in 0..n2 {
        for b in a + 1..n2 {
            if t.blocks[a] == t.blocks[b] {
                continue;
            }
            let c = commutator_norm(&t.blocks[a], &t.blocks[b]).expect("blocks share a shape");
            max_commutator = max_commutator.max(c);
            if c > tol_commute * norms[a].max(1.0) * norms[b].max(1.0) {
                offending.push((index(a), index(b)));
            }
        }
    }

    let is_normal_family = non_normal.is_empty();
    let is_commuting_family = offending.is_empty();
    non_normal.truncate(MAX_REPORTED_OFFENDERS);
    offending.truncate(MAX_REPORTED_OFFENDERS);
    FamilyReport {
        is_normal_family,
        is_commuting_family,
        max_normality_defect,
        max_commutator_norm: max_commutator,
        non_normal_blocks: non_normal,
        offending_pairs: offending,
        tol_normal,
        tol_commute,
    }
}

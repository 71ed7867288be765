//! Lattice bases, LLL reduction, nearest-plane decoding and exact
//! enumeration oracles for small dimensions.
//!
//! A basis is stored column-wise: an `d×n` matrix whose `n` columns are
//! linearly independent vectors of `R^d`.

mod enumerate;
mod lll;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, gram_schmidt, mat_vec, norm, svd, GramSchmidt, Matrix, MAX_CONDITION};

pub use enumerate::{
    enumerate_cvp, enumerate_svp, gapsvp_decide, sivp_solve_small, CvpSolution, EnumerationLimit,
    GapSvpAnswer, SvpSolution, MAX_ENUM_DIM,
};
pub use lll::{lll_approximation_factor, lll_reduce, ReductionResult, DEFAULT_DELTA};

/// Dimension up to which successive minima are computed exactly.
pub const EXACT_MINIMA_MAX_DIM: usize = 6;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LatticeBasis {
    basis: Matrix,
    gso: OnceLock<GramSchmidt>,
}

impl LatticeBasis {
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.ncols() == 0 || basis.nrows() < basis.ncols() {
            return Err(Error::DimensionMismatch { expected: basis.ncols().max(1), found: basis.nrows() });
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let gso = gram_schmidt(&basis)?;
        let cell = OnceLock::new();
        let _ = cell.set(gso);
        Ok(Self { basis, gso: cell })
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.len();
        let d = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidParameter("columns of unequal length".into()));
        }
        Self::new(Matrix::from_fn(d, n, |i, j| cols[j][i]))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n, n)).expect("identity is a basis")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        Self::new(Matrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 }))
    }

    /// Rank of the lattice (number of basis vectors).
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.basis.column(i).iter().copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.column(i)).collect()
    }

    pub fn gso(&self) -> &GramSchmidt {
        self.gso
            .get_or_init(|| gram_schmidt(&self.basis).expect("basis validated at construction"))
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| norm(&self.column(i))).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.basis * c)
    }

    /// `Σ_i coeffs[i] · b_i`.
    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let x: Vec<f64> = coeffs.iter().map(|&c| c as f64).collect();
        mat_vec(&self.basis, &x)
    }

    /// Real coordinates of `v` in this basis (least squares for `d > n`).
    pub fn coordinates(&self, v: &[f64]) -> Result<Vec<f64>> {
        let pinv = crate::numerics::pseudo_inverse(&self.basis)?;
        Ok(mat_vec(&pinv, v))
    }

    pub fn abs_determinant(&self) -> f64 {
        self.gso().log_volume().exp()
    }

    pub fn is_integral(&self) -> bool {
        self.basis.iter().all(|v| v.fract() == 0.0)
    }

    /// Basis of the dual lattice: `B (BᵀB)⁻¹`, which is `(Bᵀ)⁻¹` for square `B`.
    pub fn dual_basis(&self) -> Result<Self> {
        let dec = svd(&self.basis)?;
        let cond = dec.condition_number();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition: cond });
        }
        let gram = self.basis.transpose() * &self.basis;
        let inv = gram
            .try_inverse()
            .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        Self::new(&self.basis * inv)
    }

    /// Successive minima: exact by enumeration up to
    /// [`EXACT_MINIMA_MAX_DIM`], LLL column-norm upper bounds beyond.
    pub fn successive_minima(&self) -> Result<MinimaEstimate> {
        if self.dim() <= EXACT_MINIMA_MAX_DIM {
            self.successive_minima_enumerated(EnumerationLimit::Dim(EXACT_MINIMA_MAX_DIM))
        } else {
            Ok(self.minima_upper_bounds())
        }
    }

    pub fn successive_minima_enumerated(&self, limit: EnumerationLimit) -> Result<MinimaEstimate> {
        enumerate::successive_minima(self, limit)
    }

    fn minima_upper_bounds(&self) -> MinimaEstimate {
        let red = lll_reduce(self, DEFAULT_DELTA);
        let mut cols = red.reduced.columns();
        cols.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
        MinimaEstimate { values: cols.iter().map(|c| norm(c)).collect(), vectors: cols, exact: false }
    }
}

impl TryFrom<Vec<Vec<f64>>> for LatticeBasis {
    type Error = Error;

    fn try_from(cols: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_columns(&cols)
    }
}

impl From<LatticeBasis> for Vec<Vec<f64>> {
    fn from(b: LatticeBasis) -> Self {
        b.columns()
    }
}

impl PartialEq for LatticeBasis {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

/// Successive minima `λ_1 ≤ … ≤ λ_n` and vectors realizing them.
#[derive(Debug, Clone)]
pub struct MinimaEstimate {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `false` when `values` are only upper bounds.
    pub exact: bool,
}

impl MinimaEstimate {
    pub fn lambda_1(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_n(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }
}

/// Babai's nearest-plane algorithm on the basis as given.
///
/// Returns the lattice point and its integer coefficients.
pub fn babai_nearest_plane(b: &LatticeBasis, target: &[f64]) -> Result<(Vec<f64>, Vec<i64>)> {
    if target.len() != b.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: b.ambient_dim(), found: target.len() });
    }
    let gso = b.gso();
    let n = b.dim();
    let mut t = target.to_vec();
    let mut coeffs = vec![0i64; n];
    for i in (0..n).rev() {
        let bs: Vec<f64> = gso.b_star.column(i).iter().copied().collect();
        let c = dot(&t, &bs) / gso.norms_sq[i];
        let z = c.round();
        coeffs[i] = z as i64;
        if z != 0.0 {
            for (tk, bk) in t.iter_mut().zip(b.basis.column(i).iter()) {
                *tk -= z * bk;
            }
        }
    }
    Ok((b.point(&coeffs), coeffs))
}

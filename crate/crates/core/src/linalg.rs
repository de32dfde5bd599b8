//! Dense symmetric linear algebra primitives.
//!
//! Everything downstream works with two types: [`SymmetricOperator`], a
//! symmetric matrix carrying its eigendecomposition, and
//! [`OrthonormalBasis`], a column-orthonormal matrix standing in for a
//! subspace and its orthogonal projector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

/// Numerical thresholds shared by every module.
///
/// `tol` is relative: checks compare against `tol * max(1, ‖A‖)` for the
/// operator at hand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub tol: f64,
    /// `H` counts as invertible when `min |λ| > invert * ‖H‖`.
    pub invert: f64,
    /// Certification requires `η < 1 − margin`.
    pub margin: f64,
    /// Slack on `|λ − μ| ≤ η λ`, scaled by `max(1, ‖H‖)`.
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: 1e-10, invert: 1e-10, margin: 1e-8, bound_slack: 1e-8 }
    }
}

impl Tolerances {
    pub fn with_tol(tol: f64) -> Self {
        Tolerances { tol, ..Default::default() }
    }

    pub fn scaled(&self, norm: f64) -> f64 {
        self.tol * norm.max(1.0)
    }
}

/// An open interval `(lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        OpenInterval { lo, hi }
    }

    pub fn above(lo: f64) -> Self {
        OpenInterval { lo, hi: f64::INFINITY }
    }

    pub fn everything() -> Self {
        OpenInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Dense real symmetric matrix with a cached eigendecomposition.
///
/// Entries are symmetrized as `(A + Aᵀ)/2` on construction, so
/// `entries[(i, j)] == entries[(j, i)]` holds bit for bit. Eigenvalues are
/// ascending with multiplicity; ties keep the solver's order (stable sort).
#[derive(Clone, Debug)]
pub struct SymmetricOperator {
    entries: Mat,
    values: Vec<f64>,
    vectors: Mat,
    norm: f64,
}

impl SymmetricOperator {
    pub fn new(entries: Mat) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::dims(format!(
                "symmetric operator needs a square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::dims("symmetric operator must have positive dimension"));
        }
        check_finite(&entries)?;
        let sym = (&entries + entries.transpose()) * 0.5;

        // Diagonal input is decomposed exactly; the iterative solver would
        // leave rounding-level noise in the eigenvectors.
        let is_diagonal = (0..sym.nrows()).all(|r| (0..sym.ncols()).all(|c| r == c || sym[(r, c)] == 0.0));
        let (raw_values, raw_vectors) = if is_diagonal {
            (sym.diagonal(), Mat::identity(sym.nrows(), sym.nrows()))
        } else {
            let eig = sym.clone().symmetric_eigen();
            (eig.eigenvalues, eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..raw_values.len()).collect();
        order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
        let values: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
        let vectors = Mat::from_fn(sym.nrows(), order.len(), |r, c| raw_vectors[(r, order[c])]);
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

        Ok(SymmetricOperator { entries: sym, values, vectors, norm })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::dims(format!("expected {} entries, got {}", dim * dim, data.len())));
        }
        Self::new(Mat::from_row_slice(dim, dim, data))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    /// Eigenvalues, ascending, with multiplicity.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, in the order of [`values`](Self::values).
    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    /// Spectral norm, `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// `max |λ| / min |λ|`; infinite for singular operators.
    pub fn condition(&self) -> f64 {
        let lo = self.min_abs_eigenvalue();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            self.norm / lo
        }
    }

    pub fn check_invertible(&self, tols: &Tolerances) -> Result<()> {
        let threshold = tols.invert * self.norm;
        let min_abs = self.min_abs_eigenvalue();
        if min_abs > threshold {
            Ok(())
        } else {
            Err(Error::SingularOperator { min_abs, threshold })
        }
    }

    /// Functional calculus: `Q diag(f(λ)) Qᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat {
        let q = &self.vectors;
        let mut scaled = q.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(c).scale_mut(s);
        }
        &scaled * q.transpose()
    }

    /// `H⁻¹` through the eigendecomposition, after the invertibility check.
    pub fn inverse(&self, tols: &Tolerances) -> Result<Mat> {
        self.check_invertible(tols)?;
        Ok(self.apply_fn(|l| 1.0 / l))
    }

    /// `|A| = Q diag(|λ|) Qᵀ`.
    pub fn abs(&self) -> Result<SymmetricOperator> {
        SymmetricOperator::new(self.apply_fn(f64::abs))
    }

    pub fn neg(&self) -> Result<SymmetricOperator> {
        SymmetricOperator::new(-&self.entries)
    }

    /// `QᵀAQ` for an orthonormal basis `Q` of a subspace.
    pub fn compress(&self, basis: &OrthonormalBasis) -> Result<SymmetricOperator> {
        if basis.ambient_dim() != self.dim() {
            return Err(Error::dims(format!(
                "operator is {0}x{0} but basis lives in dimension {1}",
                self.dim(),
                basis.ambient_dim()
            )));
        }
        if basis.dim() == 0 {
            return Err(Error::dims("cannot compress onto the zero subspace"));
        }
        let q = basis.cols();
        SymmetricOperator::new(q.transpose() * &self.entries * q)
    }

    /// `‖A Q − Q Λ‖` for the cached eigendecomposition.
    pub fn eig_residual(&self) -> f64 {
        let lam = Mat::from_diagonal(&DVector::from_column_slice(&self.values));
        let r = &self.entries * &self.vectors - &self.vectors * lam;
        operator_norm(&r).unwrap_or(f64::INFINITY)
    }

    /// `‖QᵀQ − I‖` for the cached eigenvectors.
    pub fn orthogonality_residual(&self) -> f64 {
        gram_residual(&self.vectors)
    }
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors.
pub fn sym_eig(a: &SymmetricOperator) -> (Vec<f64>, OrthonormalBasis) {
    (a.values.clone(), OrthonormalBasis { cols: a.vectors.clone() })
}

/// Largest singular value; `0` for empty matrices.
pub fn operator_norm(b: &Mat) -> Result<f64> {
    if b.nrows() == 0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    check_finite(b)?;
    Ok(b.singular_values().max())
}

pub(crate) fn gram_residual(q: &Mat) -> f64 {
    let k = q.ncols();
    if k == 0 {
        return 0.0;
    }
    let g = q.transpose() * q - Mat::identity(k, k);
    operator_norm(&g).unwrap_or(f64::INFINITY)
}

/// Column-orthonormal `n×k` matrix spanning a subspace of ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    cols: Mat,
}

impl OrthonormalBasis {
    /// Wraps columns that are already orthonormal to within `tol`.
    pub fn from_orthonormal(cols: Mat, tol: f64) -> Result<Self> {
        check_finite(&cols)?;
        let r = gram_residual(&cols);
        if r > tol {
            return Err(Error::HypothesisViolated(format!(
                "columns are not orthonormal: ‖QᵀQ − I‖ = {r:e} > {tol:e}"
            )));
        }
        Ok(OrthonormalBasis { cols })
    }

    pub fn empty(n: usize) -> Self {
        OrthonormalBasis { cols: Mat::zeros(n, 0) }
    }

    pub fn identity(n: usize) -> Self {
        OrthonormalBasis { cols: Mat::identity(n, n) }
    }

    /// Span of the standard basis vectors `e_i` for the given 0-based indices.
    pub fn standard(n: usize, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::dims(format!("standard basis index {bad} out of range for dimension {n}")));
        }
        let mut cols = Mat::zeros(n, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            cols[(i, c)] = 1.0;
        }
        orthonormalize(&cols, 1e-12)
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols.nrows()
    }

    pub fn dim(&self) -> usize {
        self.cols.ncols()
    }

    pub fn cols(&self) -> &Mat {
        &self.cols
    }

    pub fn into_cols(self) -> Mat {
        self.cols
    }

    /// The orthogonal projector `QQᵀ`.
    pub fn projector(&self) -> Mat {
        &self.cols * self.cols.transpose()
    }

    /// An orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> OrthonormalBasis {
        let n = self.ambient_dim();
        let k = self.dim();
        if k == 0 {
            return OrthonormalBasis::identity(n);
        }
        if k == n {
            return OrthonormalBasis::empty(n);
        }
        let perp = Mat::identity(n, n) - self.projector();
        let sym = (&perp + perp.transpose()) * 0.5;
        // Eigenvalues cluster at 0 (k of them) and 1 (n − k of them).
        let op = SymmetricOperator::new(sym).expect("projector is finite and square");
        OrthonormalBasis { cols: op.vectors.columns(k, n - k).into_owned() }
    }

    pub fn orthogonality_residual(&self) -> f64 {
        gram_residual(&self.cols)
    }
}

/// Orthonormal basis for the column space of `cols`.
///
/// Householder QR with signs fixed so that `diag(R) ≥ 0`; columns that are
/// exactly orthonormal come back unchanged. Fails with
/// `RankDeficient` when a singular value falls below `tol * σ_max`.
pub fn orthonormalize(cols: &Mat, tol: f64) -> Result<OrthonormalBasis> {
    let (n, k) = cols.shape();
    if k > n {
        return Err(Error::dims(format!("{k} columns cannot be orthonormal in dimension {n}")));
    }
    if k == 0 {
        return Ok(OrthonormalBasis::empty(n));
    }
    check_finite(cols)?;

    let sv = cols.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > tol * smax).count();
    if smax == 0.0 || rank < k {
        return Err(Error::RankDeficient { rank: if smax == 0.0 { 0 } else { rank }, expected: k });
    }

    // Exactly orthonormal input (coordinate vectors, permutations) would
    // otherwise pick up rounding noise from the reflectors.
    if gram_residual(cols) == 0.0 {
        return Ok(OrthonormalBasis { cols: cols.clone() });
    }
    let qr = cols.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..k {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    Ok(OrthonormalBasis { cols: q })
}

/// Basis of the eigenvectors of `A` whose eigenvalues lie in `interval`.
pub fn spectral_projector(a: &SymmetricOperator, interval: OpenInterval) -> OrthonormalBasis {
    let picked: Vec<usize> = (0..a.values.len()).filter(|&i| interval.contains(a.values[i])).collect();
    let cols = Mat::from_fn(a.dim(), picked.len(), |r, c| a.vectors[(r, picked[c])]);
    OrthonormalBasis { cols }
}

/// The eigenvalues of `A` strictly above a threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCut {
    pub threshold: f64,
    pub values: Vec<f64>,
    pub count: usize,
}

impl SpectralCut {
    /// `λ_{γ,j}` with 1-based `j`.
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

/// Ascending eigenvalues of `A` strictly greater than `gamma`, with multiplicity.
pub fn variational_values(a: &SymmetricOperator, gamma: f64) -> SpectralCut {
    let values: Vec<f64> = a.values.iter().copied().filter(|&v| v > gamma).collect();
    SpectralCut { threshold: gamma, count: values.len(), values }
}

//! Compression of `H` onto `U` and the objects derived from the pair:
//! image subspaces `V = H·U`, `W = H⁻¹·U`, the oblique projector
//! `P = H P_U H⁻¹`, the diagonal/off-diagonal split and the defect `η`.

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, orthonormalize, Mat, OrthonormalBasis, SymmetricOperator, Tolerances};

/// The idempotent `P = H P_U H⁻¹`, projecting onto `V` along `W^⊥`.
#[derive(Clone, Debug)]
pub struct ObliqueProjector {
    pub matrix: Mat,
    pub range_basis: OrthonormalBasis,
    pub kernel_basis: OrthonormalBasis,
}

impl ObliqueProjector {
    /// `‖P² − P‖`.
    pub fn idempotency_residual(&self) -> f64 {
        let p = &self.matrix;
        operator_norm(&(p * p - p)).unwrap_or(f64::INFINITY)
    }

    /// `‖P Q_V − Q_V‖`: `P` fixes its range.
    pub fn range_residual(&self) -> f64 {
        let q = self.range_basis.cols();
        operator_norm(&(&self.matrix * q - q)).unwrap_or(f64::INFINITY)
    }

    /// `‖P Q_{W^⊥}‖`: `P` annihilates its kernel.
    pub fn kernel_residual(&self) -> f64 {
        operator_norm(&(&self.matrix * self.kernel_basis.cols())).unwrap_or(f64::INFINITY)
    }
}

/// `H = H_diag + H_off` relative to `U ⊕ U^⊥`, plus `η = ‖P_U − P‖`.
#[derive(Clone, Debug)]
pub struct OperatorSplit {
    pub h_diag: SymmetricOperator,
    pub h_off: SymmetricOperator,
    pub eta: f64,
}

/// Everything computed from one `(H, U)` pair.
#[derive(Clone, Debug)]
pub struct CompressionSetup {
    pub h: SymmetricOperator,
    pub u: OrthonormalBasis,
    pub u_perp: OrthonormalBasis,
    pub h_inv: Mat,
    /// `M = QᵀHQ`.
    pub m: SymmetricOperator,
    /// Compression onto `U^⊥`; `None` when `U` is the whole space.
    pub m_perp: Option<SymmetricOperator>,
    pub v: OrthonormalBasis,
    pub w: OrthonormalBasis,
    pub p: ObliqueProjector,
    pub split: OperatorSplit,
    pub tols: Tolerances,
}

fn check_pair(h: &SymmetricOperator, u: &OrthonormalBasis) -> Result<()> {
    if u.ambient_dim() != h.dim() {
        return Err(Error::dims(format!(
            "H is {0}x{0} but U lives in dimension {1}",
            h.dim(),
            u.ambient_dim()
        )));
    }
    if u.dim() == 0 {
        return Err(Error::dims("U must be nonzero"));
    }
    Ok(())
}

impl CompressionSetup {
    pub fn new(h: &SymmetricOperator, u: &OrthonormalBasis, tols: &Tolerances) -> Result<Self> {
        check_pair(h, u)?;
        let h_inv = h.inverse(tols)?;
        let q = u.cols();
        let m = h.compress(u)?;
        let u_perp = u.complement();
        let m_perp = if u_perp.dim() > 0 { Some(h.compress(&u_perp)?) } else { None };

        let v = orthonormalize(&(h.entries() * q), tols.tol)?;
        let w = orthonormalize(&(&h_inv * q), tols.tol)?;

        let pu = u.projector();
        let p_matrix = h.entries() * &pu * &h_inv;
        let p = ObliqueProjector { matrix: p_matrix, range_basis: v.clone(), kernel_basis: w.complement() };

        let n = h.dim();
        let pu_perp = Mat::identity(n, n) - &pu;
        let hm = h.entries();
        let h_diag = SymmetricOperator::new(&pu * hm * &pu + &pu_perp * hm * &pu_perp)?;
        let h_off = SymmetricOperator::new(&pu * hm * &pu_perp + &pu_perp * hm * &pu)?;
        let eta = operator_norm(&(&pu - &p.matrix))?;

        Ok(CompressionSetup {
            h: h.clone(),
            u: u.clone(),
            u_perp,
            h_inv,
            m,
            m_perp,
            v,
            w,
            p,
            split: OperatorSplit { h_diag, h_off, eta },
            tols: *tols,
        })
    }

    pub fn eta(&self) -> f64 {
        self.split.eta
    }

    /// Spectrum of `H_diag` as the union of the two block spectra,
    /// ascending. Each entry carries `Some(k)` (0-based index into the
    /// eigenvalues of `M`) for values from the `U` block and `None` for the
    /// `U^⊥` block. On exact ties the `U` block sorts first.
    pub fn h_diag_spectrum(&self) -> Vec<(f64, Option<usize>)> {
        let mut all: Vec<(f64, Option<usize>)> =
            self.m.values().iter().enumerate().map(|(k, &v)| (v, Some(k))).collect();
        if let Some(mp) = &self.m_perp {
            all.extend(mp.values().iter().map(|&v| (v, None)));
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.is_some().cmp(&a.1.is_some())));
        all
    }

    /// Residuals of the factorization `H_off H⁻¹ = (P_U − P_U^⊥)(P_U − P)`
    /// and of `‖P_U − P‖ = ‖P_U(I − P) + P_U^⊥ P‖`.
    pub fn factorization_report(&self) -> Result<FactorizationReport> {
        let n = self.h.dim();
        let id = Mat::identity(n, n);
        let pu = self.u.projector();
        let pu_perp = &id - &pu;
        let p = &self.p.matrix;

        let lhs = self.split.h_off.entries() * &self.h_inv;
        let rhs = (&pu - &pu_perp) * (&pu - p);
        let factorization = operator_norm(&(lhs - rhs))?;

        let alt = &pu * (&id - p) + &pu_perp * p;
        let norm_identity = (self.split.eta - operator_norm(&alt)?).abs();
        Ok(FactorizationReport { factorization, norm_identity })
    }
}

/// `M = QᵀHQ` for `Q` the columns of `U`.
pub fn compress(h: &SymmetricOperator, u: &OrthonormalBasis) -> Result<SymmetricOperator> {
    check_pair(h, u)?;
    h.compress(u)
}

/// Orthonormal bases of `V = H·U` and `W = H⁻¹·U`.
pub fn image_subspaces(
    h: &SymmetricOperator,
    u: &OrthonormalBasis,
    tols: &Tolerances,
) -> Result<(OrthonormalBasis, OrthonormalBasis)> {
    check_pair(h, u)?;
    let h_inv = h.inverse(tols)?;
    let v = orthonormalize(&(h.entries() * u.cols()), tols.tol)?;
    let w = orthonormalize(&(&h_inv * u.cols()), tols.tol)?;
    Ok((v, w))
}

pub fn oblique_projection(h: &SymmetricOperator, u: &OrthonormalBasis, tols: &Tolerances) -> Result<ObliqueProjector> {
    Ok(CompressionSetup::new(h, u, tols)?.p)
}

pub fn diag_off_split(h: &SymmetricOperator, u: &OrthonormalBasis, tols: &Tolerances) -> Result<OperatorSplit> {
    Ok(CompressionSetup::new(h, u, tols)?.split)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FactorizationReport {
    /// `‖H_off H⁻¹ − (P_U − P_U^⊥)(P_U − P)‖`
    pub factorization: f64,
    /// `|‖P_U − P‖ − ‖P_U(I − P) + P_U^⊥ P‖|`
    pub norm_identity: f64,
}

impl FactorizationReport {
    pub fn max(&self) -> f64 {
        self.factorization.max(self.norm_identity)
    }
}

pub fn verify_factorization(
    h: &SymmetricOperator,
    u: &OrthonormalBasis,
    tols: &Tolerances,
) -> Result<FactorizationReport> {
    CompressionSetup::new(h, u, tols)?.factorization_report()
}

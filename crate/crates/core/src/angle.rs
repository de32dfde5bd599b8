//! Maximal angles between subspaces and the graph representation of `V`
//! over `W`.
//!
//! Angles are reported through their sines and tangents; radians only appear
//! as a convenience from [`max_angle`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, orthonormalize, Mat, OrthonormalBasis, SymmetricOperator, Tolerances};
use crate::split::{CompressionSetup, ObliqueProjector};

/// `(sin θ, θ)` for `θ(M, N) = arcsin ‖P_M − P_N‖`.
pub fn max_angle(m: &OrthonormalBasis, n: &OrthonormalBasis) -> Result<(f64, f64)> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dims(format!(
            "subspaces live in dimensions {} and {}",
            m.ambient_dim(),
            n.ambient_dim()
        )));
    }
    let sin = operator_norm(&(m.projector() - n.projector()))?;
    Ok((sin, sin.min(1.0).asin()))
}

fn tan_from_sin(sin: f64) -> f64 {
    sin / (1.0 - sin * sin).max(0.0).sqrt()
}

/// `(I + G)^{-1/2}` for a symmetric positive semidefinite Gram matrix `G`.
fn inv_sqrt_shifted(gram: Mat) -> Mat {
    let k = gram.nrows();
    if k == 0 {
        return gram;
    }
    let shifted = gram + Mat::identity(k, k);
    SymmetricOperator::new(shifted).expect("finite Gram matrix").apply_fn(|l| 1.0 / l.sqrt())
}

/// Graph operator `X: W → W^⊥` with `V = {f ⊕ Xf}` and the block rotation
/// carrying `W` onto `V`.
///
/// Blocks are expressed in the frame `F = [Q_W | Q_{W^⊥}]`; `umat` is the
/// rotation in ambient coordinates, `F · U_block · Fᵀ`.
#[derive(Clone, Debug)]
pub struct GraphRotation {
    pub x: Mat,
    pub umat: Mat,
    pub block_rotation: Mat,
    pub frame: Mat,
    /// `(I + XᵀX)^{-1/2}` and `(I + XXᵀ)^{-1/2}`.
    pub inv_sqrt_w: Mat,
    pub inv_sqrt_w_perp: Mat,
}

impl GraphRotation {
    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn x_norm(&self) -> f64 {
        operator_norm(&self.x).unwrap_or(f64::INFINITY)
    }

    /// `‖UᵀU − I‖`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.umat.nrows();
        operator_norm(&(self.umat.transpose() * &self.umat - Mat::identity(n, n))).unwrap_or(f64::INFINITY)
    }

    /// `‖U P_W Uᵀ − P_V‖`.
    pub fn conjugation_residual(&self, v: &OrthonormalBasis, w: &OrthonormalBasis) -> f64 {
        let rotated = &self.umat * w.projector() * self.umat.transpose();
        operator_norm(&(rotated - v.projector())).unwrap_or(f64::INFINITY)
    }

    /// Distance between `P_V` and the projector onto the graph `{f ⊕ Xf}`.
    pub fn graph_residual(&self, v: &OrthonormalBasis) -> f64 {
        let k = self.k();
        let n = self.frame.nrows();
        let mut stacked = Mat::zeros(n, k);
        stacked.view_mut((0, 0), (k, k)).copy_from(&Mat::identity(k, k));
        stacked.view_mut((k, 0), (n - k, k)).copy_from(&self.x);
        match orthonormalize(&(&self.frame * stacked), 1e-14) {
            Ok(graph) => operator_norm(&(graph.projector() - v.projector())).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }

    /// `‖Xᵀ(I + XXᵀ)^{-1/2} − (I + XᵀX)^{-1/2}Xᵀ‖`.
    pub fn push_through_residual(&self) -> f64 {
        let xt = self.x.transpose();
        let lhs = &xt * &self.inv_sqrt_w_perp;
        let rhs = &self.inv_sqrt_w * &xt;
        operator_norm(&(lhs - rhs)).unwrap_or(f64::INFINITY)
    }
}

pub fn graph_tangent(
    v: &OrthonormalBasis,
    w: &OrthonormalBasis,
    p: &ObliqueProjector,
    tols: &Tolerances,
) -> Result<GraphRotation> {
    let (sin, _) = max_angle(v, w)?;
    if sin >= 1.0 - tols.tol {
        return Err(Error::NotGraphRepresentable { sin });
    }
    let n = w.ambient_dim();
    let k = w.dim();
    let w_perp = w.complement();
    let mut frame = Mat::zeros(n, n);
    frame.view_mut((0, 0), (n, k)).copy_from(w.cols());
    frame.view_mut((0, k), (n, n - k)).copy_from(w_perp.cols());

    let x = w_perp.cols().transpose() * &p.matrix * w.cols();
    let xt = x.transpose();
    let a = inv_sqrt_shifted(&xt * &x);
    let b = inv_sqrt_shifted(&x * &xt);

    let mut block = Mat::zeros(n, n);
    block.view_mut((0, 0), (k, k)).copy_from(&a);
    block.view_mut((0, k), (k, n - k)).copy_from(&(-(&xt * &b)));
    block.view_mut((k, 0), (n - k, k)).copy_from(&(&x * &a));
    block.view_mut((k, k), (n - k, n - k)).copy_from(&b);
    let umat = &frame * &block * frame.transpose();

    Ok(GraphRotation { x, umat, block_rotation: block, frame, inv_sqrt_w: a, inv_sqrt_w_perp: b })
}

/// Residuals of the block identities `P_W − P = [[0, 0], [−X, 0]]` and
/// `P_V − P = U [[0, Xᵀ], [0, 0]] Uᵀ`, both measured in the `W ⊕ W^⊥` frame.
pub fn annular_residuals(
    v: &OrthonormalBasis,
    w: &OrthonormalBasis,
    p: &ObliqueProjector,
    g: &GraphRotation,
) -> (f64, f64) {
    let n = g.frame.nrows();
    let k = g.k();
    let ft = g.frame.transpose();

    let lhs_w = &ft * (w.projector() - &p.matrix) * &g.frame;
    let mut expect_w = DMatrix::zeros(n, n);
    expect_w.view_mut((k, 0), (n - k, k)).copy_from(&(-&g.x));
    let r1 = operator_norm(&(lhs_w - expect_w)).unwrap_or(f64::INFINITY);

    let lhs_v = &ft * (v.projector() - &p.matrix) * &g.frame;
    let mut upper = DMatrix::zeros(n, n);
    upper.view_mut((0, k), (k, n - k)).copy_from(&g.x.transpose());
    let expect_v = &g.block_rotation * upper * g.block_rotation.transpose();
    let r2 = operator_norm(&(lhs_v - expect_v)).unwrap_or(f64::INFINITY);
    (r1, r2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub sin_uv: f64,
    pub sin_uw: f64,
    pub sin_vw: f64,
    pub tan_vw: f64,
    /// `min(sin θ(U,V), sin θ(U,W)) + tan θ(V,W)`
    pub bound: f64,
    pub eta: f64,
    /// `‖X‖`, which equals `tan θ(V,W)`.
    pub x_norm: f64,
    /// `‖P_V − P‖` and `‖P_W − P‖`, both equal to `‖X‖`.
    pub pv_minus_p: f64,
    pub pw_minus_p: f64,
}

impl AngleReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.eta <= self.bound + slack
    }

    pub fn slack(&self) -> f64 {
        self.bound - self.eta
    }
}

pub fn angle_bound(setup: &CompressionSetup) -> Result<AngleReport> {
    let (sin_uv, _) = max_angle(&setup.u, &setup.v)?;
    let (sin_uw, _) = max_angle(&setup.u, &setup.w)?;
    let (sin_vw, _) = max_angle(&setup.v, &setup.w)?;
    let g = graph_tangent(&setup.v, &setup.w, &setup.p, &setup.tols)?;
    let tan_vw = tan_from_sin(sin_vw);
    let p = &setup.p.matrix;
    Ok(AngleReport {
        sin_uv,
        sin_uw,
        sin_vw,
        tan_vw,
        bound: sin_uv.min(sin_uw) + tan_vw,
        eta: setup.eta(),
        x_norm: g.x_norm(),
        pv_minus_p: operator_norm(&(setup.v.projector() - p))?,
        pw_minus_p: operator_norm(&(setup.w.projector() - p))?,
    })
}

/// `max{‖P_V P_W^⊥‖, ‖P_V^⊥ P_W‖}`, which equals `‖P_W − P_V‖`.
pub fn cross_norm(v: &OrthonormalBasis, w: &OrthonormalBasis) -> Result<f64> {
    let n = v.ambient_dim();
    let id = Mat::identity(n, n);
    let pv = v.projector();
    let pw = w.projector();
    let a = operator_norm(&(&pv * (&id - &pw)))?;
    let b = operator_norm(&((&id - &pv) * &pw))?;
    Ok(a.max(b))
}

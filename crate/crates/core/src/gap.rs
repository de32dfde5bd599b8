//! Eigenvalues in a spectral gap under a relatively bounded perturbation.
//!
//! `A` is symmetric, `V` a symmetric perturbation with `‖Vx‖ ≤ ‖A₁x‖` where
//! `A₁ = a + b|A|`, `b ∈ [0, 1)`. If `(α, β)` is free of spectrum of `A` and
//! wide enough, then `(f₊(α), f₋(β))` with `f±(t) = t ± (a + b|t|)` is free of
//! spectrum of `B = A + V`, eigenvalue counts above the two windows agree, and
//! the `j`-th eigenvalues above the windows differ by at most
//! `a + b|λ_{α,j}(A)|`.
//!
//! The second half of the module evaluates the gap condition `ν < ν'` for a
//! splitting `Ran Λ ⊕ Ran(I − Λ)` and samples the minimax characterization of
//! the eigenvalues above `ν`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    operator_norm, orthonormalize, variational_values, Mat, OrthonormalBasis, SymmetricOperator, Tolerances,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundParams {
    pub a: f64,
    pub b: f64,
}

impl RelativeBoundParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(0.0..1.0).contains(&b) {
            return Err(Error::HypothesisViolated(format!("relative bound b = {b} must lie in [0, 1)")));
        }
        Ok(RelativeBoundParams { a, b })
    }

    pub fn f_plus(&self, t: f64) -> f64 {
        t + (self.a + self.b * t.abs())
    }

    pub fn f_minus(&self, t: f64) -> f64 {
        t - (self.a + self.b * t.abs())
    }

    /// `A₁ = a + b|A|`.
    pub fn a1(&self, a: &SymmetricOperator) -> Mat {
        a.apply_fn(|l| self.a + self.b * l.abs())
    }

    fn a1_min(&self, a: &SymmetricOperator) -> f64 {
        self.a + self.b * a.min_abs_eigenvalue()
    }
}

fn same_dim(a: &SymmetricOperator, v: &SymmetricOperator) -> Result<()> {
    if a.dim() != v.dim() {
        return Err(Error::dims(format!("A is {0}x{0}, V is {1}x{1}", a.dim(), v.dim())));
    }
    Ok(())
}

/// Whether `‖V A₁⁻¹‖ ≤ 1 + tol`, i.e. `‖Vx‖ ≤ ‖A₁x‖` for all `x`.
///
/// A numerically singular `A₁` is rejected rather than handled through a
/// pseudo-inverse.
pub fn relbound_check(
    a: &SymmetricOperator,
    v: &SymmetricOperator,
    p: &RelativeBoundParams,
    tols: &Tolerances,
) -> Result<bool> {
    same_dim(a, v)?;
    let min = p.a1_min(a);
    if min <= tols.scaled(a.norm()) {
        return Err(Error::DegenerateBound { min });
    }
    let a1_inv = a.apply_fn(|l| 1.0 / (p.a + p.b * l.abs()));
    let ratio = operator_norm(&(v.entries() * a1_inv))?;
    Ok(ratio <= 1.0 + tols.tol)
}

/// A resolvent window `(α, β)` of `A` together with its image
/// `(f₊(α), f₋(β))`, which is guaranteed free of spectrum of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapWindow {
    pub alpha: f64,
    pub beta: f64,
    pub mapped_low: f64,
    pub mapped_high: f64,
    pub params: RelativeBoundParams,
}

pub fn guaranteed_interval(alpha: f64, beta: f64, p: &RelativeBoundParams) -> Result<GapWindow> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::HypothesisViolated(format!("window ({alpha}, {beta}) must be finite")));
    }
    let need = 2.0 * p.a + p.b * (alpha.abs() + beta.abs());
    if beta - alpha <= need {
        return Err(Error::HypothesisViolated(format!(
            "β − α = {} must exceed 2a + b(|α| + |β|) = {need}",
            beta - alpha
        )));
    }
    Ok(GapWindow { alpha, beta, mapped_low: p.f_plus(alpha), mapped_high: p.f_minus(beta), params: *p })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub allowed: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationComparison {
    pub rows: Vec<CompareRow>,
    pub count_a: usize,
    pub count_b: usize,
    /// Eigenvalues of `B` found inside `(f₊(α), f₋(β))`.
    pub window_violations: Vec<f64>,
}

impl PerturbationComparison {
    pub fn ok(&self) -> bool {
        self.count_a == self.count_b && self.window_violations.is_empty() && self.rows.iter().all(|r| r.ok)
    }

    /// Largest `|λ_A − λ_B| − allowed` over the rows; `≤ 0` when the bound holds exactly.
    pub fn worst_excess(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.lambda_a - r.lambda_b).abs() - r.allowed)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    if lo == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if hi == f64::INFINITY {
        lo
    } else {
        0.5 * (lo + hi)
    }
}

/// Compares the eigenvalues of `A` above `α` with those of `B = A + V` above
/// `f₊(α)`, index by index.
///
/// Both spectra are cut at the middle of their resolvent windows rather than
/// at the left endpoints. The counts are the same either way, and the middle
/// keeps eigenvalues sitting on an endpoint from flipping sides by rounding.
pub fn perturbed_compare(
    a: &SymmetricOperator,
    v: &SymmetricOperator,
    p: &RelativeBoundParams,
    window: &GapWindow,
    tols: &Tolerances,
) -> Result<PerturbationComparison> {
    if !relbound_check(a, v, p, tols)? {
        return Err(Error::HypothesisViolated("‖Vx‖ ≤ ‖(a + b|A|)x‖ does not hold".into()));
    }
    let checked = guaranteed_interval(window.alpha, window.beta, p)?;
    if let Some(&e) = a.values().iter().find(|&&e| window.alpha < e && e < window.beta) {
        return Err(Error::WindowNotInResolvent { eigenvalue: e, alpha: window.alpha, beta: window.beta });
    }

    let b = SymmetricOperator::new(a.entries() + v.entries())?;
    let va = variational_values(a, midpoint(checked.alpha, checked.beta));
    let vb = variational_values(&b, midpoint(checked.mapped_low, checked.mapped_high));
    let slack = tols.scaled(a.norm().max(b.norm()));

    let rows = va
        .values
        .iter()
        .zip(&vb.values)
        .map(|(&la, &lb)| {
            let allowed = p.a + p.b * la.abs();
            CompareRow { lambda_a: la, lambda_b: lb, allowed, ok: (la - lb).abs() <= allowed + slack }
        })
        .collect();

    let window_violations = b
        .values()
        .iter()
        .copied()
        .filter(|&e| checked.mapped_low + slack < e && e < checked.mapped_high - slack)
        .collect();

    Ok(PerturbationComparison { rows, count_a: va.count, count_b: vb.count, window_violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Worst `max(⟨x,(A − A₁)x⟩ − ⟨x,Bx⟩, ⟨x,Bx⟩ − ⟨x,(A + A₁)x⟩)` over the sampled unit vectors.
    pub max_violation: f64,
    /// `λ_min(A₁ + V)`; nonnegative iff `A − A₁ ≤ B`.
    pub min_eig_lower: f64,
    /// `λ_min(A₁ − V)`; nonnegative iff `B ≤ A + A₁`.
    pub min_eig_upper: f64,
}

impl SandwichReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.max_violation <= slack && self.min_eig_lower >= -slack && self.min_eig_upper >= -slack
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Quadratic-form sandwich `A − A₁ ≤ A + V ≤ A + A₁`, sampled on random unit
/// vectors and checked exactly through the spectra of `A₁ ± V`.
pub fn form_sandwich_check(
    a: &SymmetricOperator,
    v: &SymmetricOperator,
    p: &RelativeBoundParams,
    samples: usize,
    seed: u64,
) -> Result<SandwichReport> {
    same_dim(a, v)?;
    let a1 = p.a1(a);
    let lower = a.entries() - &a1;
    let upper = a.entries() + &a1;
    let b = a.entries() + v.entries();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut x = gaussian_matrix(&mut rng, a.dim(), 1);
        let nrm = x.norm();
        if nrm == 0.0 {
            continue;
        }
        x /= nrm;
        let q = |m: &Mat| (x.transpose() * m * &x)[(0, 0)];
        let qb = q(&b);
        worst = worst.max((q(&lower) - qb).max(qb - q(&upper)));
    }

    let plus = SymmetricOperator::new(&a1 + v.entries())?;
    let minus = SymmetricOperator::new(&a1 - v.entries())?;
    Ok(SandwichReport { max_violation: worst, min_eig_lower: plus.values()[0], min_eig_upper: minus.values()[0] })
}

/// `ν = sup ⟨x₋, T x₋⟩` over unit `x₋ ∈ Ran(I − Λ)` and `ν' = inf ⟨x₊, T x₊⟩`
/// over unit `x₊ ∈ Ran Λ`. Empty sides give `ν = −∞` or `ν' = +∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapConditionReport {
    #[serde(with = "crate::ext_real")]
    pub nu: f64,
    #[serde(with = "crate::ext_real")]
    pub nu_prime: f64,
    pub holds: bool,
}

pub fn gap_condition(t: &SymmetricOperator, lambda: &OrthonormalBasis) -> Result<GapConditionReport> {
    if lambda.ambient_dim() != t.dim() {
        return Err(Error::dims(format!(
            "T is {0}x{0} but Λ lives in dimension {1}",
            t.dim(),
            lambda.ambient_dim()
        )));
    }
    let rest = lambda.complement();
    let nu = if rest.dim() == 0 {
        f64::NEG_INFINITY
    } else {
        *t.compress(&rest)?.values().last().expect("nonempty")
    };
    let nu_prime = if lambda.dim() == 0 { f64::INFINITY } else { t.compress(lambda)?.values()[0] };
    Ok(GapConditionReport { nu, nu_prime, holds: nu < nu_prime })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxReport {
    /// `λ_{ν,j}(T)`.
    pub target: f64,
    /// Smallest sampled `sup` over `𝔐 ⊕ D₋`.
    pub estimate: f64,
    /// Smallest `sup − target` over the samples.
    pub min_slack: f64,
    pub floor_ok: bool,
    /// `sup` over the eigenvector witness, when `T` commutes with `Λ`.
    pub witness: Option<f64>,
}

impl MinimaxReport {
    pub fn witness_error(&self) -> Option<f64> {
        self.witness.map(|w| (w - self.target).abs())
    }
}

/// Largest Rayleigh quotient of `T` over the span of orthonormal `cols`.
fn rayleigh_sup(t: &SymmetricOperator, cols: &Mat) -> Result<f64> {
    let c = SymmetricOperator::new(cols.transpose() * t.entries() * cols)?;
    Ok(*c.values().last().expect("nonempty"))
}

fn hstack(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Samples `inf_𝔐 sup_{x ∈ 𝔐 ⊕ D₋} ⟨x, Tx⟩` over random `j`-dimensional
/// `𝔐 ⊂ Ran Λ`.
///
/// Sample `s` draws from the ChaCha8 stream `s` of `seed`, so results do not
/// depend on how the samples are scheduled.
pub fn minimax_sample(
    t: &SymmetricOperator,
    lambda: &OrthonormalBasis,
    j: usize,
    samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<MinimaxReport> {
    let gap = gap_condition(t, lambda)?;
    if !gap.holds {
        return Err(Error::HypothesisViolated(format!(
            "gap condition fails: ν = {} is not below ν' = {}",
            gap.nu, gap.nu_prime
        )));
    }
    if j == 0 || j > lambda.dim() {
        return Err(Error::IndexOutOfRange { index: j, len: lambda.dim() });
    }
    // (ν, ν') lies in the resolvent set of T.
    let cut = variational_values(t, midpoint(gap.nu, gap.nu_prime));
    let target = cut.get(j).ok_or_else(|| {
        Error::InternalContradiction(format!("only {} eigenvalues above ν, expected at least {j}", cut.count))
    })?;

    let rest = lambda.complement();
    let sups: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let coeffs = gaussian_matrix(&mut rng, lambda.dim(), j);
            let sub = orthonormalize(&coeffs, 1e-12)?;
            let m = lambda.cols() * sub.cols();
            rayleigh_sup(t, &hstack(&m, rest.cols()))
        })
        .collect::<Result<_>>()?;

    let estimate = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let min_slack = estimate - target;
    let slack = tols.scaled(t.norm());

    let pl = lambda.projector();
    let commutator = operator_norm(&(t.entries() * &pl - &pl * t.entries()))?;
    let witness = if commutator <= slack {
        let first = t.values().iter().position(|&v| v > cut.threshold).unwrap_or(t.dim());
        let lowest = t.vectors().columns(first, j).into_owned();
        Some(rayleigh_sup(t, &hstack(&lowest, rest.cols()))?)
    } else {
        None
    };

    Ok(MinimaxReport { target, estimate, min_slack, floor_ok: min_slack >= -slack, witness })
}

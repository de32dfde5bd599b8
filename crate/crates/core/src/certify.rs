//! Relative eigenvalue certificates.
//!
//! For `η = ‖P_U − P‖ < 1` every eigenvalue `μ_k` of `M` in `(0, (1 − η)d)`
//! is matched to a positive eigenvalue `λ_{j_k}` of `H` with
//! `|λ_{j_k} − μ_k| ≤ η λ_{j_k}` and `j_k` strictly increasing. The index
//! `j_k` is the rank of `μ_k` among the positive eigenvalues of `H_diag`,
//! whose spectrum is the union of the spectra of `M` and of the compression
//! onto `U^⊥`.
//!
//! Finite matrices have no essential spectrum. `d` is a declared threshold
//! ([`EssentialModel`]) above which eigenvalues are treated as the
//! "essential" cluster; the default `d = ∞` matches every positive `μ_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::midpoint;
use crate::linalg::{variational_values, OrthonormalBasis, SymmetricOperator, Tolerances};
use crate::split::CompressionSetup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    NotCertifiable,
    /// Some eigenvalues of `M` sit within tolerance of a threshold and were
    /// left out of the matching.
    Partial,
}

/// One matched pair. `k` and `j` are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub k: usize,
    pub mu: f64,
    pub j: usize,
    pub lambda: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub eta: f64,
    #[serde(with = "crate::ext_real")]
    pub d: f64,
    #[serde(with = "crate::ext_real")]
    pub alpha: f64,
    #[serde(with = "crate::ext_real")]
    pub beta: f64,
    pub matches: Vec<Match>,
    #[serde(with = "crate::ext_real")]
    pub secondary_bound: f64,
    pub verdict: Verdict,
    /// Eigenvalues of `M` past the upper threshold; no claim is made about them.
    #[serde(default)]
    pub unmatched: Vec<f64>,
    /// Eigenvalues of `M` within tolerance of a threshold.
    #[serde(default)]
    pub boundary: Vec<f64>,
}

impl Certificate {
    pub fn mus(&self) -> Vec<f64> {
        self.matches.iter().map(|m| m.mu).collect()
    }

    pub fn witness(&self) -> Vec<usize> {
        self.matches.iter().map(|m| m.j).collect()
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// Re-checks the stored matches: the relative bound (primary and
    /// secondary), strictly increasing `j` and the thresholds.
    pub fn recheck(&self, slack: f64) -> std::result::Result<(), String> {
        let mut last_j = 0;
        for m in &self.matches {
            if m.j <= last_j {
                return Err(format!("j indices not strictly increasing at k = {}", m.k));
            }
            last_j = m.j;
            let gap = (m.lambda - m.mu).abs();
            if gap > self.eta * m.lambda.abs() + slack {
                return Err(format!("|λ − μ| = {gap} exceeds η|λ| at k = {}", m.k));
            }
            if gap > self.secondary_bound * m.mu.abs() + slack {
                return Err(format!("|λ − μ|/|μ| exceeds η/(1 − η) at k = {}", m.k));
            }
        }
        Ok(())
    }
}

/// Declared threshold `d > 0` for the emulated essential spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialModel {
    #[serde(with = "crate::ext_real")]
    pub d: f64,
}

impl Default for EssentialModel {
    fn default() -> Self {
        EssentialModel { d: f64::INFINITY }
    }
}

impl EssentialModel {
    pub fn new(d: f64) -> Result<Self> {
        if d.is_nan() || d <= 0.0 {
            return Err(Error::HypothesisViolated(format!("essential threshold d = {d} must be positive")));
        }
        Ok(EssentialModel { d })
    }
}

fn secondary(eta: f64) -> f64 {
    if eta < 1.0 {
        eta / (1.0 - eta)
    } else {
        f64::INFINITY
    }
}

/// Largest negative and smallest positive eigenvalue (`∓∞` when absent).
fn zero_gap(h: &SymmetricOperator) -> (f64, f64) {
    let alpha = h.values().iter().copied().filter(|&v| v < 0.0).fold(f64::NEG_INFINITY, f64::max);
    let beta = h.values().iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    (alpha, beta)
}

/// Thresholds used by one certification run.
struct Window {
    alpha: f64,
    beta: f64,
    d: f64,
    /// Spectrum-free window of `H_diag`.
    diag_lo: f64,
    diag_hi: f64,
    /// Cuts separating "above the window" for `H` and `H_diag`.
    cut_h: f64,
    cut_diag: f64,
    /// `μ` must lie in `(mu_lo, mu_hi)` to be matched.
    mu_lo: f64,
    mu_hi: f64,
}

/// `(k, j)` pairs (0-based `k`, 1-based `j`) for every eigenvalue of `M`
/// above `cut`, ranked within the `H_diag` spectrum above `cut`.
fn ranks_above(setup: &CompressionSetup, cut: f64) -> Vec<(usize, usize)> {
    setup
        .h_diag_spectrum()
        .into_iter()
        .filter(|&(v, _)| v > cut)
        .enumerate()
        .filter_map(|(rank, (_, k))| k.map(|k| (k, rank + 1)))
        .collect()
}

fn run(setup: &CompressionSetup, w: &Window, tols: &Tolerances) -> Result<Certificate> {
    let eta = setup.eta();
    let h_norm = setup.h.norm();
    let slack = tols.scaled(h_norm);
    let mut cert = Certificate {
        eta,
        d: w.d,
        alpha: w.alpha,
        beta: w.beta,
        matches: Vec::new(),
        secondary_bound: secondary(eta),
        verdict: Verdict::Certified,
        unmatched: Vec::new(),
        boundary: Vec::new(),
    };

    let m_min = setup.m.min_abs_eigenvalue();
    if m_min <= tols.invert * h_norm {
        return Err(Error::InternalContradiction(format!(
            "η = {eta} < 1 but M is numerically singular (min |μ| = {m_min:e})"
        )));
    }
    let spectrum = setup.h_diag_spectrum();
    if let Some(&(v, _)) = spectrum.iter().find(|&&(v, _)| w.diag_lo + slack < v && v < w.diag_hi - slack) {
        return Err(Error::InternalContradiction(format!(
            "H_diag has eigenvalue {v} inside its guaranteed gap ({}, {})",
            w.diag_lo, w.diag_hi
        )));
    }

    let ranks = ranks_above(setup, w.cut_diag);
    let lambdas = variational_values(&setup.h, w.cut_h);
    let bound_slack = tols.bound_slack * h_norm.max(1.0);

    for (k, &mu) in setup.m.values().iter().enumerate() {
        if mu < w.mu_lo - slack {
            continue;
        }
        if (mu - w.mu_lo).abs() <= slack || (w.mu_hi.is_finite() && (mu - w.mu_hi).abs() <= slack) {
            cert.boundary.push(mu);
            continue;
        }
        if mu > w.mu_hi {
            cert.unmatched.push(mu);
            continue;
        }
        let j = ranks.iter().find(|&&(kk, _)| kk == k).map(|&(_, j)| j).ok_or_else(|| {
            Error::InternalContradiction(format!("μ_{} = {mu} is not above the H_diag cut {}", k + 1, w.cut_diag))
        })?;
        let lambda = lambdas.get(j).ok_or_else(|| {
            Error::InternalContradiction(format!(
                "rank j = {j} exceeds the {} eigenvalues of H above the cut",
                lambdas.count
            ))
        })?;
        let gap = (lambda - mu).abs();
        if gap > eta * lambda.abs() + bound_slack {
            return Err(Error::InternalContradiction(format!(
                "match (k = {}, j = {j}): |λ − μ| = {gap:e} exceeds η|λ| = {:e}",
                k + 1,
                eta * lambda.abs()
            )));
        }
        if w.d.is_finite() && lambda >= w.d + slack {
            return Err(Error::InternalContradiction(format!("matched λ = {lambda} is not below d = {}", w.d)));
        }
        cert.matches.push(Match { k: k + 1, mu, j, lambda, rel_err: gap / lambda.abs() });
    }

    if !cert.boundary.is_empty() {
        cert.verdict = Verdict::Partial;
    }
    Ok(cert)
}

fn not_certifiable(eta: f64, d: f64, alpha: f64, beta: f64) -> Certificate {
    Certificate {
        eta,
        d,
        alpha,
        beta,
        matches: Vec::new(),
        secondary_bound: secondary(eta),
        verdict: Verdict::NotCertifiable,
        unmatched: Vec::new(),
        boundary: Vec::new(),
    }
}

/// Certificate for the positive eigenvalues of `M` on an already built setup.
pub fn certify_setup(setup: &CompressionSetup, ess: &EssentialModel, tols: &Tolerances) -> Result<Certificate> {
    let eta = setup.eta();
    let (alpha, beta) = zero_gap(&setup.h);
    if eta >= 1.0 - tols.margin {
        return Ok(not_certifiable(eta, ess.d, alpha, beta));
    }
    let shrink = 1.0 - eta;
    let window = Window {
        alpha,
        beta,
        d: ess.d,
        diag_lo: shrink * alpha,
        diag_hi: shrink * beta,
        // 0 sits inside both resolvent windows.
        cut_h: 0.0,
        cut_diag: 0.0,
        mu_lo: 0.0,
        mu_hi: shrink * ess.d,
    };
    run(setup, &window, tols)
}

pub fn certify(
    h: &SymmetricOperator,
    u: &OrthonormalBasis,
    ess: &EssentialModel,
    tols: &Tolerances,
) -> Result<Certificate> {
    certify_setup(&CompressionSetup::new(h, u, tols)?, ess, tols)
}

/// Index pairs `(k, j_k)`, both 1-based, for the eigenvalues of `M` in
/// `(0, (1 − η)d)`.
///
/// `alpha` must be `−∞` or the largest negative eigenvalue of `H`.
pub fn match_indices(
    setup: &CompressionSetup,
    ess: &EssentialModel,
    alpha: f64,
    tols: &Tolerances,
) -> Result<Vec<(usize, usize)>> {
    let eta = setup.eta();
    if eta >= 1.0 {
        return Err(Error::HypothesisViolated(format!("η = {eta} must be below 1")));
    }
    let (expected, _) = zero_gap(&setup.h);
    if alpha != expected {
        return Err(Error::HypothesisViolated(format!(
            "α = {alpha} is not the largest negative eigenvalue of H ({expected})"
        )));
    }
    let upper = (1.0 - eta) * ess.d;
    let slack = tols.scaled(setup.h.norm());
    let mus = setup.m.values();
    Ok(ranks_above(setup, 0.0)
        .into_iter()
        .filter(|&(k, _)| mus[k] > slack && mus[k] < upper)
        .map(|(k, j)| (k + 1, j))
        .collect())
}

fn mirror(cert: Certificate) -> Certificate {
    Certificate {
        eta: cert.eta,
        d: -cert.d,
        alpha: -cert.beta,
        beta: -cert.alpha,
        matches: cert
            .matches
            .into_iter()
            .map(|m| Match { mu: -m.mu, lambda: -m.lambda, ..m })
            .collect(),
        secondary_bound: cert.secondary_bound,
        verdict: cert.verdict,
        unmatched: cert.unmatched.into_iter().map(|v| -v).collect(),
        boundary: cert.boundary.into_iter().map(|v| -v).collect(),
    }
}

/// Certificate for the negative eigenvalues, obtained by certifying `−H`
/// and negating the reported values back.
///
/// `ess_neg.d > 0` bounds the magnitude: eigenvalues of `M` in
/// `(−(1 − η)d, 0)` are matched. Indices count outward from zero.
pub fn certify_negative(
    h: &SymmetricOperator,
    u: &OrthonormalBasis,
    ess_neg: &EssentialModel,
    tols: &Tolerances,
) -> Result<Certificate> {
    let neg = h.neg()?;
    Ok(mirror(certify(&neg, u, ess_neg, tols)?))
}

/// Certificate for eigenvalues above a resolvent window `(α̃, β̃)` of `H`
/// that need not contain zero.
///
/// Requires `η < (β̃ − α̃)/(|α̃| + |β̃|)`. Eigenvalues of `M` in
/// `(α̃ + η|α̃|, d̃ − η|d̃|)` are matched to the eigenvalues of `H` above
/// `α̃` with `|λ − μ| ≤ η|λ|`.
pub fn certify_gap(
    h: &SymmetricOperator,
    u: &OrthonormalBasis,
    alpha_t: f64,
    beta_t: f64,
    ess: &EssentialModel,
    tols: &Tolerances,
) -> Result<Certificate> {
    if !alpha_t.is_finite() || !beta_t.is_finite() || alpha_t >= beta_t {
        return Err(Error::HypothesisViolated(format!(
            "gap ({alpha_t}, {beta_t}) must be a finite nonempty interval"
        )));
    }
    if ess.d < beta_t {
        return Err(Error::HypothesisViolated(format!("d̃ = {} must not lie below β̃ = {beta_t}", ess.d)));
    }
    let setup = CompressionSetup::new(h, u, tols)?;
    if let Some(&e) = h.values().iter().find(|&&e| alpha_t < e && e < beta_t) {
        return Err(Error::WindowNotInResolvent { eigenvalue: e, alpha: alpha_t, beta: beta_t });
    }
    let eta = setup.eta();
    let limit = (beta_t - alpha_t) / (alpha_t.abs() + beta_t.abs());
    if eta >= limit - tols.margin {
        return Err(Error::GapConditionFailed { eta, limit });
    }
    let diag_lo = alpha_t + eta * alpha_t.abs();
    let diag_hi = beta_t - eta * beta_t.abs();
    let window = Window {
        alpha: alpha_t,
        beta: beta_t,
        d: ess.d,
        diag_lo,
        diag_hi,
        cut_h: midpoint(alpha_t, beta_t),
        cut_diag: midpoint(diag_lo, diag_hi),
        mu_lo: diag_lo,
        mu_hi: if ess.d.is_infinite() { f64::INFINITY } else { ess.d - eta * ess.d.abs() },
    };
    run(&setup, &window, tols)
}

/// Result of the independent matching check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMatch {
    pub feasible: bool,
    /// 1-based indices into `lambdas`, one per matched `μ`.
    pub witness: Vec<usize>,
}

fn admissible(mu: f64, lambda: f64, eta: f64) -> bool {
    let lo = mu / (1.0 + eta);
    let hi = if eta < 1.0 { mu / (1.0 - eta) } else { f64::INFINITY };
    lo <= lambda && lambda <= hi
}

/// Decides whether strictly increasing indices `j_k` exist with
/// `λ_{j_k} ∈ [μ_k/(1 + η), μ_k/(1 − η)]` for every `k`.
///
/// Inputs are ascending and positive. Both interval endpoints grow with `μ`,
/// so taking the smallest admissible unused `λ` for each `μ` in turn is
/// optimal.
pub fn oracle_match(mus: &[f64], lambdas: &[f64], eta: f64) -> OracleMatch {
    let mut witness = Vec::with_capacity(mus.len());
    let mut next = 0;
    for &mu in mus {
        let lo = mu / (1.0 + eta);
        while next < lambdas.len() && lambdas[next] < lo {
            next += 1;
        }
        if next < lambdas.len() && admissible(mu, lambdas[next], eta) {
            witness.push(next + 1);
            next += 1;
        } else {
            return OracleMatch { feasible: false, witness };
        }
    }
    OracleMatch { feasible: true, witness }
}

/// Whether a given witness is strictly increasing and interval-admissible.
pub fn witness_admissible(mus: &[f64], lambdas: &[f64], witness: &[usize], eta: f64) -> bool {
    if mus.len() != witness.len() {
        return false;
    }
    let mut last = 0;
    for (&mu, &j) in mus.iter().zip(witness) {
        if j <= last || j > lambdas.len() || !admissible(mu, lambdas[j - 1], eta) {
            return false;
        }
        last = j;
    }
    true
}

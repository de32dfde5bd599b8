//! Instance generation with controlled spectra and subspaces, and the batch
//! runner.
//!
//! Randomness comes from ChaCha8 seeded with the instance seed. Stream 0
//! draws the orthogonal eigenvector matrix, stream 1 the subspace. Seeds
//! reproduce bit for bit within this implementation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::EssentialModel;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, Mat, OrthonormalBasis, SymmetricOperator, Tolerances};
use crate::report::{Outcome, Report};

fn default_ess() -> f64 {
    f64::INFINITY
}

fn default_min_gap() -> f64 {
    1e-8
}

/// How the subspace `U` is chosen. Indices are 1-based positions in
/// `InstanceSpec::spectrum`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SubspaceMode {
    /// Exact span of the selected eigenvectors (an invariant subspace).
    EigenvectorSpan { indices: Vec<usize> },
    /// The eigenvector span with each basis vector rotated by `epsilon`
    /// toward its own random unit vector in the orthogonal complement.
    Tilted { indices: Vec<usize>, epsilon: f64 },
    /// `k` orthonormalized Gaussian columns.
    Random { k: usize },
    /// Span of `(v_i + v_j)/√2` per pair. With `λ_i = −λ_j` this is the
    /// sign-flip construction, giving `η = 1` and a singular `M`.
    EigenvectorMix { pairs: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub spectrum: Vec<f64>,
    pub subspace: SubspaceMode,
    pub seed: u64,
    #[serde(with = "crate::ext_real", default = "default_ess")]
    pub ess_threshold: f64,
    /// Every eigenvalue must satisfy `|λ| ≥ min_gap`.
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.spectrum.len() != self.n {
            return bad(format!("spectrum has {} values but n = {}", self.spectrum.len(), self.n));
        }
        if let Some(v) = self.spectrum.iter().find(|v| !v.is_finite()) {
            return bad(format!("spectrum value {v} is not finite"));
        }
        if self.min_gap.is_nan() || self.min_gap <= 0.0 {
            return bad(format!("min_gap = {} must be positive", self.min_gap));
        }
        if let Some(v) = self.spectrum.iter().find(|v| v.abs() < self.min_gap) {
            return bad(format!("spectrum value {v} is within {} of zero", self.min_gap));
        }
        if self.ess_threshold.is_nan() || self.ess_threshold <= 0.0 {
            return bad(format!("ess_threshold = {} must be positive", self.ess_threshold));
        }
        let check_indices = |idx: &[usize]| -> Result<()> {
            if idx.is_empty() {
                return bad("subspace needs at least one index".into());
            }
            let mut seen = vec![false; self.n];
            for &i in idx {
                if i == 0 || i > self.n {
                    return bad(format!("index {i} outside 1..={}", self.n));
                }
                if std::mem::replace(&mut seen[i - 1], true) {
                    return bad(format!("index {i} repeated"));
                }
            }
            Ok(())
        };
        match &self.subspace {
            SubspaceMode::EigenvectorSpan { indices } => check_indices(indices),
            SubspaceMode::Tilted { indices, epsilon } => {
                if !(epsilon.is_finite() && *epsilon >= 0.0) {
                    return bad(format!("tilt epsilon = {epsilon} must be a nonnegative number"));
                }
                check_indices(indices)
            }
            SubspaceMode::Random { k } => {
                if *k == 0 || *k > self.n {
                    return bad(format!("random subspace dimension {k} outside 1..={}", self.n));
                }
                Ok(())
            }
            SubspaceMode::EigenvectorMix { pairs } => {
                let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                check_indices(&flat)
            }
        }
    }

    pub fn ess(&self) -> EssentialModel {
        EssentialModel { d: self.ess_threshold }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix with `diag(R) ≥ 0`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        if let Ok(q) = orthonormalize(&gaussian(rng, n, n), 1e-12) {
            return q.into_cols();
        }
    }
}

/// Builds `H = Qᵀ diag(spectrum) Q` and the subspace `U`.
///
/// The eigenvector for `spectrum[i]` is row `i` of `Q`.
pub fn gen_instance(spec: &InstanceSpec) -> Result<(SymmetricOperator, OrthonormalBasis)> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = random_orthogonal(n, &mut rng);
    let diag = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&spec.spectrum));
    let h = SymmetricOperator::new(q.transpose() * diag * &q)?;
    let eigvec = |i: usize| q.row(i - 1).transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let pick = |idx: &[usize]| Mat::from_columns(&idx.iter().map(|&i| eigvec(i)).collect::<Vec<_>>());

    let u = match &spec.subspace {
        SubspaceMode::EigenvectorSpan { indices } => orthonormalize(&pick(indices), 1e-12)?,
        SubspaceMode::Tilted { indices, epsilon } => {
            let mut cols = pick(indices);
            let rest: Vec<usize> = (1..=n).filter(|i| !indices.contains(i)).collect();
            let r = indices.len().min(rest.len());
            if r > 0 {
                let coeffs = orthonormalize(&gaussian(&mut rng, rest.len(), r), 1e-12)?;
                let dirs = pick(&rest) * coeffs.cols();
                let (s, c) = epsilon.sin_cos();
                for i in 0..r {
                    let rotated = cols.column(i) * c + dirs.column(i) * s;
                    cols.set_column(i, &rotated);
                }
            }
            orthonormalize(&cols, 1e-12)?
        }
        SubspaceMode::Random { k } => loop {
            if let Ok(b) = orthonormalize(&gaussian(&mut rng, n, *k), 1e-12) {
                break b;
            }
        },
        SubspaceMode::EigenvectorMix { pairs } => {
            let cols: Vec<_> = pairs.iter().map(|&(a, b)| (eigvec(a) + eigvec(b)) * std::f64::consts::FRAC_1_SQRT_2).collect();
            orthonormalize(&Mat::from_columns(&cols), 1e-12)?
        }
    };
    Ok((h, u))
}

/// A random indefinite instance of dimension `3..=max_n`: eigenvalue
/// magnitudes log-uniform in `[0.2, 5]` with both signs present, and a
/// subspace of dimension `1..n` tilted by `epsilon`.
pub fn random_indefinite_spec(seed: u64, max_n: usize, epsilon: f64) -> InstanceSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(7);
    let n = rng.random_range(3..=max_n.max(3));
    let mut spectrum: Vec<f64> = (0..n)
        .map(|_| {
            let mag = (rng.random_range(0.2f64.ln()..5f64.ln())).exp();
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    spectrum[0] = -spectrum[0].abs();
    spectrum[1] = spectrum[1].abs();
    let k = rng.random_range(1..n);
    let mut all: Vec<usize> = (1..=n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    let mut indices = all[..k].to_vec();
    indices.sort_unstable();
    InstanceSpec {
        n,
        spectrum,
        subspace: SubspaceMode::Tilted { indices, epsilon },
        seed,
        ess_threshold: f64::INFINITY,
        min_gap: 1e-8,
    }
}

/// Sign-flip family: spectrum `±c_i` in pairs, `U` spanned by
/// `(v₋ + v₊)/√2` for every pair. `η = 1` exactly and `M = 0`.
pub fn flip_spec(seed: u64, pairs: usize) -> InstanceSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(9);
    let mut spectrum = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let c: f64 = rng.random_range(0.5..4.0);
        spectrum.push(-c);
        spectrum.push(c);
    }
    InstanceSpec {
        n: 2 * pairs,
        spectrum,
        subspace: SubspaceMode::EigenvectorMix { pairs: (0..pairs).map(|p| (2 * p + 1, 2 * p + 2)).collect() },
        seed,
        ess_threshold: f64::INFINITY,
        min_gap: 1e-8,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub total: usize,
    pub certified: usize,
    pub partial: usize,
    pub not_certifiable: usize,
    pub internal_contradictions: usize,
    pub errors: usize,
    pub invariant_failures: usize,
}

impl BatchSummary {
    pub fn success(&self) -> bool {
        self.internal_contradictions == 0 && self.invariant_failures == 0
    }

    fn add(&mut self, r: &Report) {
        self.total += 1;
        match r.outcome() {
            Outcome::Certified => self.certified += 1,
            Outcome::Partial => self.partial += 1,
            Outcome::NotCertifiable => self.not_certifiable += 1,
            Outcome::InternalContradiction => self.internal_contradictions += 1,
            Outcome::Error => self.errors += 1,
        }
        if r.invariants.values().any(|ok| !ok) {
            self.invariant_failures += 1;
        }
    }
}

/// Runs every instance (in parallel; output order follows `specs`). Errors
/// are recorded per instance and never abort the batch.
pub fn run_batch(specs: &[InstanceSpec], tols: &Tolerances) -> (Vec<Report>, BatchSummary) {
    let reports: Vec<Report> = specs.par_iter().map(|spec| Report::for_spec(spec, tols)).collect();
    let mut summary = BatchSummary::default();
    for r in &reports {
        summary.add(r);
    }
    (reports, summary)
}

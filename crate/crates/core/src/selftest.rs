//! A quick invariant sweep, run by `relcert selftest`.

use serde::Serialize;

use crate::angle::angle_bound;
use crate::certify::{certify, EssentialModel, Verdict};
use crate::gap::{form_sandwich_check, RelativeBoundParams};
use crate::harness::{flip_spec, random_indefinite_spec, run_batch};
use crate::report::Outcome;
use crate::linalg::{orthonormalize, Mat, OrthonormalBasis, SymmetricOperator, Tolerances};
use crate::split::CompressionSetup;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn closed_form() -> crate::Result<(bool, String)> {
    let t = 0.2f64;
    let (c, s) = (t.cos(), t.sin());
    let h = SymmetricOperator::diagonal(&[1.0, 3.0])?;
    let u = orthonormalize(&Mat::from_column_slice(2, 1, &[c, s]), 1e-14)?;
    let cert = certify(&h, &u, &EssentialModel::default(), &Tolerances::default())?;
    let m = cert.matches.first().copied();
    let err = m.map_or(f64::INFINITY, |m| {
        (cert.eta - (2.0 * t).sin()).abs().max((m.mu - (1.0 + 2.0 * s * s)).abs()).max((m.rel_err - 2.0 * s * s).abs())
    });
    Ok((cert.verdict == Verdict::Certified && err <= 1e-12, format!("max deviation {err:.2e}")))
}

fn angle_example() -> crate::Result<(bool, String)> {
    let h = SymmetricOperator::diagonal(&[1.0, 3.0])?;
    let u = orthonormalize(&Mat::from_column_slice(2, 1, &[0.2f64.cos(), 0.2f64.sin()]), 1e-14)?;
    let a = angle_bound(&CompressionSetup::new(&h, &u, &Tolerances::default())?)?;
    Ok((a.holds(1e-9), format!("η = {:.6}, bound = {:.6}", a.eta, a.bound)))
}

fn random_batch() -> crate::Result<(bool, String)> {
    let tols = Tolerances::default();
    let specs: Vec<_> = (0..50).map(|s| random_indefinite_spec(s, 12, 0.05)).collect();
    let (reports, summary) = run_batch(&specs, &tols);
    // η ≥ 1 is a legitimate refusal; anything below must certify.
    let consistent = reports.iter().all(|r| match (&r.certificate, r.outcome()) {
        (Some(c), Outcome::Certified) => c.eta < 1.0,
        (Some(c), Outcome::NotCertifiable) => c.eta >= 1.0 - tols.margin,
        _ => false,
    });
    Ok((
        summary.success() && consistent,
        format!(
            "{}/{} certified, {} refused with η ≥ 1, {} invariant failures",
            summary.certified, summary.total, summary.not_certifiable, summary.invariant_failures
        ),
    ))
}

fn flip_family() -> crate::Result<(bool, String)> {
    let specs: Vec<_> = (0..5).map(|s| flip_spec(s, 2)).collect();
    let (_, summary) = run_batch(&specs, &Tolerances::default());
    Ok((summary.not_certifiable == summary.total, format!("{}/{} not certifiable", summary.not_certifiable, summary.total)))
}

fn sandwich() -> crate::Result<(bool, String)> {
    let a = SymmetricOperator::diagonal(&[-2.0, -0.5, 1.0, 3.0])?;
    let p = RelativeBoundParams::new(0.0, 0.3)?;
    let v = SymmetricOperator::new(a.abs()?.entries() * -0.25)?;
    let r = form_sandwich_check(&a, &v, &p, 200, 7)?;
    Ok((r.holds(1e-10), format!("worst sampled violation {:.2e}", r.max_violation)))
}

fn invariant_subspace() -> crate::Result<(bool, String)> {
    let h = SymmetricOperator::diagonal(&[-1.0, 1.0, 2.0])?;
    let u = OrthonormalBasis::standard(3, &[1, 2])?;
    let cert = certify(&h, &u, &EssentialModel::default(), &Tolerances::default())?;
    let exact = cert.eta == 0.0 && cert.matches.iter().all(|m| m.rel_err == 0.0);
    Ok((exact && cert.verdict == Verdict::Certified, format!("η = {:e}", cert.eta)))
}

/// Runs every check; all must pass for a healthy build.
pub fn run() -> Vec<Check> {
    vec![
        check("closed_form_2x2", closed_form),
        check("invariant_subspace", invariant_subspace),
        check("angle_bound", angle_example),
        check("random_batch", random_batch),
        check("flip_family", flip_family),
        check("form_sandwich", sandwich),
    ]
}

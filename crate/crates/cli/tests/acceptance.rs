//! End-to-end acceptance suite. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! gives a one-screen summary.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relcert::certify::witness_admissible;
use relcert::harness::{flip_spec, random_indefinite_spec};
use relcert::linalg::Mat;
use relcert::report::{CertifyOutput, Outcome};
use relcert::{
    angle_bound, certify, form_sandwich_check, gap_condition, gen_instance, graph_tangent, annular_residuals,
    guaranteed_interval, minimax_sample, operator_norm, oracle_match, orthonormalize, perturbed_compare,
    relbound_check, run_batch, CompressionSetup, EssentialModel, InstanceSpec, OrthonormalBasis,
    RelativeBoundParams, Report, SubspaceMode, SymmetricOperator, Tolerances, Verdict,
};

fn verdict_line(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn tols() -> Tolerances {
    Tolerances::default()
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_closed_form_2x2() {
    let start = Instant::now();
    let t = 0.2f64;
    let (c, s) = (t.cos(), t.sin());
    let h = SymmetricOperator::diagonal(&[1.0, 3.0]).unwrap();
    let u = orthonormalize(&Mat::from_column_slice(2, 1, &[c, s]), 1e-14).unwrap();
    let u_perp = orthonormalize(&Mat::from_column_slice(2, 1, &[-s, c]), 1e-14).unwrap();
    let ess = EssentialModel::default();

    // Closed forms: HU ∝ (c, 3s), H⁻¹U ∝ (c, s/3), η = sin 2t,
    // μ = 1 + 2s² on U and 3 − 2s² on U^⊥.
    let line_sin = |a: (f64, f64), b: (f64, f64)| {
        ((a.0 * b.1 - a.1 * b.0) / (a.0.hypot(a.1) * b.0.hypot(b.1))).abs()
    };
    let eta = (2.0 * t).sin();
    let mu = [1.0 + 2.0 * s * s, 3.0 - 2.0 * s * s];
    let rel = [2.0 * s * s, 2.0 * s * s / 3.0];
    let s_uv = line_sin((c, s), (c, 3.0 * s));
    let s_uw = line_sin((c, s), (c, s / 3.0));
    let s_vw = line_sin((c, 3.0 * s), (c, s / 3.0));
    let bound = s_uv.min(s_uw) + s_vw / (1.0 - s_vw * s_vw).sqrt();

    let a = certify(&h, &u, &ess, &tols()).unwrap();
    let b = certify(&h, &u_perp, &ess, &tols()).unwrap();
    let angle = angle_bound(&CompressionSetup::new(&h, &u, &tols()).unwrap()).unwrap();
    let (ma, mb) = (a.matches[0], b.matches[0]);

    let dev = [
        (a.eta - eta).abs(),
        (b.eta - eta).abs(),
        (ma.mu - mu[0]).abs(),
        (mb.mu - mu[1]).abs(),
        (ma.rel_err - rel[0]).abs(),
        (mb.rel_err - rel[1]).abs(),
        (angle.bound - bound).abs(),
        (angle.sin_uv - s_uv).abs(),
        (angle.sin_uw - s_uw).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let structure = a.verdict == Verdict::Certified
        && b.verdict == Verdict::Certified
        && (a.matches.len(), b.matches.len()) == (1, 1)
        && (ma.j, mb.j) == (1, 2)
        && (ma.lambda, mb.lambda) == (1.0, 3.0)
        && ma.rel_err <= a.eta
        && mb.rel_err <= b.eta
        && angle.bound >= angle.eta;
    // Six-digit reference figures; the angle bound figure is a sum of rounded
    // terms and sits 2.4e-6 below the exact value.
    let quoted = (eta - 0.389418).abs() < 5e-7
        && (mu[0] - 1.078939).abs() < 5e-7
        && (mu[1] - 2.921061).abs() < 5e-7
        && (rel[0] - 0.078939).abs() < 5e-7
        && (rel[1] - 0.026313).abs() < 5e-7
        && (bound - 0.651367).abs() < 5e-6;
    let elapsed = start.elapsed();
    verdict_line(
        1,
        dev <= 1e-12 && structure && quoted && elapsed < Duration::from_secs(1),
        &format!(
            "η = {:.9}, μ = ({:.9}, {:.9}), j = ({}, {}), bound = {:.9}; max deviation from closed form {dev:.1e}; {:.1?}",
            a.eta, ma.mu, mb.mu, ma.j, mb.j, angle.bound, elapsed
        ),
    );
}

// ---------------------------------------------------------------- 2–4

struct Suite {
    reports: Vec<Report>,
    refused: usize,
    elapsed: Duration,
}

const SUITE_TARGET: usize = 1000;
const EPSILONS: [f64; 4] = [0.01, 0.03, 0.05, 0.1];

/// Seeded tilted instances with `n ≤ 40`, keeping those with `η < 1`.
fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let mut reports = Vec::new();
        let mut refused = 0;
        let mut next = 0u64;
        while reports.len() < SUITE_TARGET {
            let specs: Vec<InstanceSpec> = (next..next + 256)
                .map(|s| random_indefinite_spec(s, 40, EPSILONS[(s % 4) as usize]))
                .collect();
            next += 256;
            for r in run_batch(&specs, &tols()).0 {
                match &r.certificate {
                    Some(c) if c.eta >= 1.0 => refused += 1,
                    _ => reports.push(r),
                }
            }
        }
        Suite { reports, refused, elapsed: start.elapsed() }
    })
}

fn positive_spectrum(spec: &InstanceSpec) -> Vec<f64> {
    let mut pos: Vec<f64> = spec.spectrum.iter().copied().filter(|&v| v > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    pos
}

fn spectral_norm(spec: &InstanceSpec) -> f64 {
    spec.spectrum.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn criterion_2_random_certification_suite() {
    let suite = suite();
    let mut failures = Vec::new();
    let mut matches = 0;
    for r in &suite.reports {
        let spec = r.instance.as_ref().unwrap();
        let Some(c) = r.certificate.as_ref().filter(|c| c.verdict == Verdict::Certified) else {
            failures.push(format!("seed {}: {:?} {:?}", spec.seed, r.outcome(), r.error));
            continue;
        };
        let h_norm = spectral_norm(spec);
        // Eigenvalues of H are known exactly from the spectrum used to build it.
        let pos = positive_spectrum(spec);
        for m in &c.matches {
            matches += 1;
            let bound_ok = (m.lambda - m.mu).abs() <= c.eta * m.lambda.abs() + 1e-8 * h_norm;
            let lambda_ok = pos.get(m.j - 1).is_some_and(|&l| (l - m.lambda).abs() <= 1e-9 * h_norm);
            if !(bound_ok && lambda_ok) {
                failures.push(format!("seed {}: match {m:?} fails the bound or the true spectrum", spec.seed));
            }
        }
        let eta = c.eta + 1e-8 * h_norm / pos[0];
        let mus = c.mus();
        let oracle = oracle_match(&mus, &pos, eta);
        if !(oracle.feasible && witness_admissible(&mus, &pos, &c.witness(), eta)) {
            failures.push(format!("seed {}: oracle rejects the witness", spec.seed));
        }
    }
    let n_max = suite.reports.iter().map(|r| r.instance.as_ref().unwrap().n).max().unwrap_or(0);
    let ok = suite.reports.len() >= SUITE_TARGET && failures.is_empty() && suite.elapsed < Duration::from_secs(60);
    verdict_line(
        2,
        ok,
        &format!(
            "{} instances with η < 1 (n ≤ {n_max}; {} with η ≥ 1 set aside), {matches} matches, {} failures, {:.1?}{}",
            suite.reports.len(),
            suite.refused,
            failures.len(),
            suite.elapsed,
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_3_angle_bound() {
    let suite = suite();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_x = 0.0f64;
    let mut missing = 0;
    for r in &suite.reports {
        let Some(a) = &r.angle else {
            missing += 1;
            continue;
        };
        worst_gap = worst_gap.max(a.eta - a.bound);
        worst_x = worst_x.max((a.pv_minus_p - a.x_norm).abs()).max((a.pw_minus_p - a.x_norm).abs());
    }
    verdict_line(
        3,
        missing == 0 && worst_gap <= 1e-9 && worst_x <= 1e-9,
        &format!(
            "{} instances: max(η − bound) = {worst_gap:.2e}, max |‖P_V − P‖ − ‖X‖|, |‖P_W − P‖ − ‖X‖| = {worst_x:.2e}",
            suite.reports.len()
        ),
    );
}

#[test]
fn criterion_4_identity_residuals() {
    let suite = suite();
    let mut worst = [0.0f64; 5];
    let names = ["projector", "factorization", "norm identity", "block residuals", "rotation conjugation"];
    for r in &suite.reports {
        let spec = r.instance.as_ref().unwrap();
        let (h, u) = gen_instance(spec).unwrap();
        let setup = CompressionSetup::new(&h, &u, &tols()).unwrap();
        let p = &setup.p;
        let fact = setup.factorization_report().unwrap();
        let g = graph_tangent(&setup.v, &setup.w, p, &tols()).unwrap();
        let (r1, r2) = annular_residuals(&setup.v, &setup.w, p, &g);
        let vals = [
            p.idempotency_residual().max(p.range_residual()).max(p.kernel_residual()),
            fact.factorization,
            fact.norm_identity,
            r1.max(r2),
            g.conjugation_residual(&setup.v, &setup.w)
                .max(g.orthogonality_residual())
                .max(g.graph_residual(&setup.v))
                .max(g.push_through_residual()),
        ];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
    }
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    verdict_line(4, worst.iter().all(|&w| w <= 1e-9), &format!("max residuals: {}", detail.join(", ")));
}

// ---------------------------------------------------------------- 5

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&g + g.transpose()) * 0.5
}

/// Adjacent eigenvalue pairs `(α, β)` of `A` that are valid windows for `b`.
fn admissible_windows(a: &SymmetricOperator, b: f64) -> Vec<(f64, f64)> {
    a.values()
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(lo, hi)| hi - lo > b * (lo.abs() + hi.abs()) * (1.0 + 1e-6))
        .collect()
}

#[test]
fn criterion_5_relative_perturbation_suite() {
    let tols = tols();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_semidef = f64::INFINITY;
    let mut non_zero_windows = 0;
    const INSTANCES: usize = 500;
    for i in 0..INSTANCES {
        let (a, _) = gen_instance(&random_indefinite_spec(10_000 + i as u64, 30, 0.0)).unwrap();
        let b = rng.random_range(0.05..0.6);
        let params = RelativeBoundParams::new(0.0, b).unwrap();
        // Scale a random symmetric V so that ‖V|A|⁻¹‖ = ρ·b with ρ ≤ 1.
        let raw = random_symmetric(a.dim(), &mut rng);
        let abs_inv = a.apply_fn(|l| 1.0 / l.abs());
        let ratio = operator_norm(&(&raw * abs_inv)).unwrap();
        let rho = rng.random_range(0.3..=1.0);
        let v = SymmetricOperator::new(raw * (rho * b / ratio)).unwrap();

        let windows = admissible_windows(&a, b);
        let straddle = windows.iter().position(|&(lo, hi)| lo < 0.0 && hi > 0.0).expect("zero gap is admissible");
        let pick = if i % 3 == 0 && windows.len() > 1 {
            (straddle + 1 + rng.random_range(0..windows.len() - 1)) % windows.len()
        } else {
            straddle
        };
        let (alpha, beta) = windows[pick];
        if pick != straddle {
            non_zero_windows += 1;
        }

        let hyp = relbound_check(&a, &v, &params, &tols).unwrap();
        let window = guaranteed_interval(alpha, beta, &params).unwrap();
        let cmp = perturbed_compare(&a, &v, &params, &window, &tols).unwrap();
        let sw = form_sandwich_check(&a, &v, &params, 64, i as u64).unwrap();
        worst_excess = worst_excess.max(cmp.worst_excess());
        worst_semidef = worst_semidef.min(sw.min_eig_lower).min(sw.min_eig_upper).min(-sw.max_violation);
        if !(hyp && cmp.ok() && sw.holds(1e-10)) {
            failures.push(format!(
                "instance {i}: hypothesis {hyp}, counts {}/{}, window violations {:?}, excess {:.2e}",
                cmp.count_a,
                cmp.count_b,
                cmp.window_violations,
                cmp.worst_excess()
            ));
        }
    }
    verdict_line(
        5,
        failures.is_empty() && worst_semidef >= -1e-10,
        &format!(
            "{INSTANCES} instances ({non_zero_windows} with windows away from 0): max(|λ_A − λ_B| − b|λ_A|) = {worst_excess:.2e}, min semidefinite slack = {worst_semidef:.2e}, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

// ---------------------------------------------------------------- 6

/// `T` with a low block in `[-3, 1]` and a high block in `[2, 5]`; `Λ` is
/// the high block's eigenvector span, tilted by `epsilon`.
fn minimax_instance(seed: u64, epsilon: f64) -> (SymmetricOperator, OrthonormalBasis) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..=16);
    let high = rng.random_range(3..=n - 2);
    let mut spectrum: Vec<f64> = (0..n - high).map(|_| rng.random_range(-3.0..1.0)).collect();
    spectrum.extend((0..high).map(|_| rng.random_range(2.0..5.0)));
    let indices: Vec<usize> = (n - high + 1..=n).collect();
    let subspace = if epsilon == 0.0 {
        SubspaceMode::EigenvectorSpan { indices }
    } else {
        SubspaceMode::Tilted { indices, epsilon }
    };
    let spec = InstanceSpec { n, spectrum, subspace, seed, ess_threshold: f64::INFINITY, min_gap: 1e-12 };
    gen_instance(&spec).unwrap()
}

#[test]
fn criterion_6_minimax() {
    let tols = tols();
    let mut worst_witness = 0.0f64;
    let mut commuting = 0;
    for seed in 0..100 {
        let (t, lambda) = minimax_instance(600 + seed, 0.0);
        for j in 1..=3 {
            let r = minimax_sample(&t, &lambda, j, 8, seed, &tols).unwrap();
            match r.witness_error() {
                Some(e) => worst_witness = worst_witness.max(e),
                None => worst_witness = f64::INFINITY,
            }
        }
        commuting += 1;
    }

    let mut worst_slack = f64::INFINITY;
    let mut non_commuting = 0;
    let mut seed = 0;
    while non_commuting < 100 {
        let (t, lambda) = minimax_instance(900 + seed, 0.08);
        seed += 1;
        if !gap_condition(&t, &lambda).unwrap().holds {
            continue;
        }
        let j = 1 + (seed as usize % lambda.dim().min(3));
        let r = minimax_sample(&t, &lambda, j, 200, seed, &tols).unwrap();
        assert!(r.witness.is_none(), "tilted Λ should not commute with T");
        worst_slack = worst_slack.min(r.min_slack);
        non_commuting += 1;
    }
    verdict_line(
        6,
        worst_witness <= 1e-10 && worst_slack >= -1e-10,
        &format!(
            "commuting: {commuting} instances × j ≤ 3, max witness error {worst_witness:.1e}; non-commuting: {non_commuting} instances × 200 samples, min(sup − λ_j) = {worst_slack:.3e}"
        ),
    );
}

// ---------------------------------------------------------------- 7

/// Negative and small positive eigenvalues plus a cluster in `[d, 1.5d]`
/// standing in for essential spectrum at `d`.
fn cluster_spec(seed: u64) -> InstanceSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2.0..5.0);
    let mut spectrum: Vec<f64> = (0..rng.random_range(1..=4)).map(|_| -rng.random_range(0.2..5.0)).collect();
    let discrete = rng.random_range(2..=5);
    spectrum.extend((0..discrete).map(|_| rng.random_range(0.2..0.6 * d)));
    spectrum.extend((0..rng.random_range(5..=10)).map(|_| d * rng.random_range(1.0..1.5)));
    let n = spectrum.len();
    // Tilt a mix of discrete, cluster and negative directions.
    let mut indices: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.4)).collect();
    if indices.is_empty() || indices.len() == n {
        indices = vec![n - discrete];
    }
    InstanceSpec {
        n,
        spectrum,
        subspace: SubspaceMode::Tilted { indices, epsilon: 0.02 },
        seed,
        ess_threshold: d,
        min_gap: 1e-8,
    }
}

#[test]
fn criterion_7_essential_threshold() {
    let tols = tols();
    let mut failures = Vec::new();
    let (mut checked, mut matched, mut above) = (0, 0, 0);
    for seed in 0..200 {
        let spec = cluster_spec(7_000 + seed);
        let d = spec.ess_threshold;
        let (h, u) = gen_instance(&spec).unwrap();
        let setup = CompressionSetup::new(&h, &u, &tols).unwrap();
        if setup.eta() >= 1.0 {
            continue;
        }
        checked += 1;
        let h_norm = spectral_norm(&spec);
        let slack = 1e-8 * h_norm;
        let pos = positive_spectrum(&spec);
        let eta = setup.eta();
        let mus: Vec<f64> = setup.m.values().to_vec();

        let c = certify(&h, &u, &EssentialModel::new(d).unwrap(), &tols).unwrap();
        let in_range = mus.iter().filter(|&&m| m > slack && m < (1.0 - eta) * d - slack).count();
        above += mus.iter().filter(|&&m| m >= (1.0 - eta) * d).count();
        matched += c.matches.len();
        let sound = c.matches.iter().all(|m| {
            m.lambda < d
                && (m.lambda - pos[m.j - 1]).abs() <= 1e-9 * h_norm
                && (m.lambda - m.mu).abs() <= eta * m.lambda + slack
        });
        if c.verdict != Verdict::Certified || c.matches.len() != in_range || !sound {
            failures.push(format!("seed {}: finite d: {:?}, {} of {in_range} matched", spec.seed, c.verdict, c.matches.len()));
        }

        let c_inf = certify(&h, &u, &EssentialModel::default(), &tols).unwrap();
        let positive = mus.iter().filter(|&&m| m > 0.0).count();
        let sound_inf = c_inf.matches.iter().all(|m| (m.lambda - pos[m.j - 1]).abs() <= 1e-9 * h_norm);
        if c_inf.matches.len() != positive || !c_inf.unmatched.is_empty() || !sound_inf {
            failures.push(format!("seed {}: d = ∞ matched {} of {positive}", spec.seed, c_inf.matches.len()));
        }
    }
    verdict_line(
        7,
        failures.is_empty() && checked >= 150,
        &format!(
            "{checked} cluster instances: {matched} matches below (1 − η)d, {above} μ at or past (1 − η)d left unmatched, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

// ---------------------------------------------------------------- 8–9

fn relcert() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relcert"))
}

fn write_pair(dir: &Path, h: &SymmetricOperator, u: &Mat) {
    relcert::mtx::write_symmetric(dir.join("H.mtx"), h).unwrap();
    std::fs::write(dir.join("U.mtx"), relcert::mtx::format_dense(u)).unwrap();
}

fn certify_cli(dir: &Path, json: &Path) -> i32 {
    relcert()
        .arg("certify")
        .arg(dir.join("H.mtx"))
        .arg(dir.join("U.mtx"))
        .arg("--json")
        .arg(json)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn criterion_8_flip_boundary() {
    let tols = tols();
    let mut failures = Vec::new();
    let mut count = 0;
    for seed in 0..30 {
        for pairs in 1..=3 {
            count += 1;
            let spec = flip_spec(seed, pairs);
            let r = Report::for_spec(&spec, &tols);
            let (h, u) = gen_instance(&spec).unwrap();
            let setup = CompressionSetup::new(&h, &u, &tols).unwrap();
            let singular = setup.m.min_abs_eigenvalue() <= 1e-10 * h.norm();
            let eta_one = (setup.eta() - 1.0).abs() <= 1e-10;
            if r.outcome() != Outcome::NotCertifiable || !singular || !eta_one {
                failures.push(format!("seed {seed}, {pairs} pairs: {:?}, η = {}", r.outcome(), setup.eta()));
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let h = SymmetricOperator::diagonal(&[-1.0, 1.0]).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    write_pair(dir.path(), &h, &Mat::from_column_slice(2, 1, &[r, r]));
    let json = dir.path().join("out.json");
    let code = certify_cli(dir.path(), &json);
    let out: CertifyOutput = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let cli_ok = code == 2 && out.certificate.verdict == Verdict::NotCertifiable;
    verdict_line(
        8,
        failures.is_empty() && cli_ok,
        &format!(
            "{count} flip instances NotCertifiable with η = 1 and singular M ({} failures); diag(−1, 1) via CLI: exit {code}, η = {}",
            failures.len(),
            out.certificate.eta
        ),
    );
}

#[test]
fn criterion_9_cli_end_to_end() {
    let run_all = |root: &Path| -> Vec<(i32, String, Vec<u8>, Vec<u8>)> {
        (0..20u64)
            .map(|seed| {
                let dir = root.join(format!("inst{seed}"));
                let gen = relcert()
                    .args(["gen", "--seed", &seed.to_string(), "--max-n", "25", "--out"])
                    .arg(&dir)
                    .output()
                    .unwrap();
                assert!(gen.status.success());
                let json = dir.join("cert.json");
                let code = certify_cli(&dir, &json);
                let text = std::fs::read_to_string(&json).unwrap_or_default();
                let h = std::fs::read(dir.join("H.mtx")).unwrap();
                let u = std::fs::read(dir.join("U.mtx")).unwrap();
                (code, text, h, u)
            })
            .collect()
    };
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = run_all(first.path());
    let b = run_all(second.path());
    let deterministic = a == b;

    let mut round_trip = true;
    let mut consistent = true;
    let mut codes = Vec::new();
    for (code, text, _, _) in &a {
        codes.push(*code);
        match serde_json::from_str::<CertifyOutput>(text) {
            Ok(out) => {
                round_trip &= serde_json::to_string_pretty(&out).unwrap() + "\n" == *text;
                let expected = if out.certificate.verdict == Verdict::NotCertifiable { 2 } else { 0 };
                consistent &= *code == expected;
            }
            Err(_) => round_trip = false,
        }
    }

    // Exit 0 with η = 0 on an exactly invariant subspace.
    let dir = tempfile::tempdir().unwrap();
    let h = SymmetricOperator::diagonal(&[-1.0, 1.0, 2.0]).unwrap();
    write_pair(dir.path(), &h, OrthonormalBasis::standard(3, &[1, 2]).unwrap().cols());
    let json = dir.path().join("out.json");
    let code0 = certify_cli(dir.path(), &json);
    let inv: CertifyOutput = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();

    // Exit 2 through `gen --mode mix`.
    let flip_dir = dir.path().join("flip");
    let gen = relcert()
        .args(["gen", "--spectrum=-2,2", "--mode", "mix", "--pairs", "1:2", "--out"])
        .arg(&flip_dir)
        .output()
        .unwrap();
    assert!(gen.status.success());
    let code2 = certify_cli(&flip_dir, &flip_dir.join("out.json"));

    // Exit 3 with a diagnostic naming the file and line.
    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "%%MatrixMarket matrix array real symmetric\n2 2\n1\nnot-a-number\n3\n").unwrap();
    let out = relcert().arg("certify").arg(&bad).arg(dir.path().join("U.mtx")).output().unwrap();
    let code3 = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let diagnostic = stderr.contains(&format!("{}:4:", bad.display()));

    let ok = deterministic
        && round_trip
        && consistent
        && code0 == 0
        && inv.certificate.eta == 0.0
        && code2 == 2
        && code3 == 3
        && diagnostic;
    verdict_line(
        9,
        ok,
        &format!(
            "20 gen→certify runs (exit codes {codes:?}): deterministic {deterministic}, JSON round-trip {round_trip}, codes match verdicts {consistent}; invariant example exit {code0} with η = {}; flip exit {code2}; malformed exit {code3}, diagnostic names file:line {diagnostic}",
            inv.certificate.eta
        ),
    );
}

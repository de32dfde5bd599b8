//! Per-instance reports and the JSON shape emitted by the CLI.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::angle::{angle_bound, annular_residuals, graph_tangent, AngleReport};
use crate::certify::{certify_setup, oracle_match, witness_admissible, Certificate, EssentialModel, Verdict};
use crate::error::{Error, Result};
use crate::harness::{gen_instance, InstanceSpec};
use crate::linalg::{variational_values, OrthonormalBasis, SymmetricOperator, Tolerances};
use crate::split::{CompressionSetup, FactorizationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Certified,
    Partial,
    NotCertifiable,
    InternalContradiction,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ReportError {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::NonFinite => "non_finite",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::SingularOperator { .. } => "singular_operator",
            Error::NotGraphRepresentable { .. } => "not_graph_representable",
            Error::DegenerateBound { .. } => "degenerate_bound",
            Error::HypothesisViolated(_) => "hypothesis_violated",
            Error::WindowNotInResolvent { .. } => "window_not_in_resolvent",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::GapConditionFailed { .. } => "gap_condition_failed",
            Error::InternalContradiction(_) => "internal_contradiction",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        };
        ReportError { kind: kind.into(), message: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnularResiduals {
    pub r1: f64,
    pub r2: f64,
}

/// The angle fields carried in the CLI's JSON output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSummary {
    pub sin_uv: f64,
    pub sin_uw: f64,
    pub tan_vw: f64,
    pub bound: f64,
}

impl From<&AngleReport> for AngleSummary {
    fn from(a: &AngleReport) -> Self {
        AngleSummary { sin_uv: a.sin_uv, sin_uw: a.sin_uw, tan_vw: a.tan_vw, bound: a.bound }
    }
}

/// JSON emitted by `relcert certify`: the certificate fields plus `angle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOutput {
    #[serde(flatten)]
    pub certificate: Certificate,
    pub angle: Option<AngleSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub instance: Option<InstanceSpec>,
    pub certificate: Option<Certificate>,
    pub angle: Option<AngleReport>,
    pub factorization: Option<FactorizationReport>,
    pub annular: Option<AnnularResiduals>,
    /// Named invariant checks; `false` marks a failure.
    pub invariants: BTreeMap<String, bool>,
    pub error: Option<ReportError>,
    pub elapsed_ms: f64,
}

/// Residual ceiling for the identity checks, relative to `‖H‖‖H⁻¹‖`.
const IDENTITY_TOL: f64 = 1e-9;

impl Report {
    fn empty(instance: Option<InstanceSpec>) -> Self {
        Report {
            instance,
            certificate: None,
            angle: None,
            factorization: None,
            annular: None,
            invariants: BTreeMap::new(),
            error: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn for_spec(spec: &InstanceSpec, tols: &Tolerances) -> Report {
        let start = Instant::now();
        let mut report = match gen_instance(spec) {
            Ok((h, u)) => Self::for_pair(&h, &u, &spec.ess(), tols),
            Err(e) => {
                let mut r = Self::empty(None);
                r.error = Some(ReportError::from(&e));
                r
            }
        };
        report.instance = Some(spec.clone());
        report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        report
    }

    /// Certificate, angle bound, factorization and annular residuals for
    /// one `(H, U)` pair, with every invariant recorded.
    pub fn for_pair(h: &SymmetricOperator, u: &OrthonormalBasis, ess: &EssentialModel, tols: &Tolerances) -> Report {
        let start = Instant::now();
        let mut r = Self::empty(None);
        if let Err(e) = r.fill(h, u, ess, tols) {
            r.error = Some(ReportError::from(&e));
        }
        r.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        r
    }

    fn fill(&mut self, h: &SymmetricOperator, u: &OrthonormalBasis, ess: &EssentialModel, tols: &Tolerances) -> Result<()> {
        let setup = CompressionSetup::new(h, u, tols)?;
        let scale = h.condition().max(1.0);
        let id_tol = IDENTITY_TOL * scale;

        let fact = setup.factorization_report()?;
        self.factorization = Some(fact);
        self.invariants.insert("factorization".into(), fact.max() <= id_tol);
        let p_res = setup.p.idempotency_residual().max(setup.p.range_residual()).max(setup.p.kernel_residual());
        self.invariants.insert("oblique_projector".into(), p_res <= id_tol);

        match angle_bound(&setup) {
            Ok(a) => {
                self.invariants.insert("angle_bound".into(), a.holds(IDENTITY_TOL));
                self.angle = Some(a);
                let g = graph_tangent(&setup.v, &setup.w, &setup.p, tols)?;
                let (r1, r2) = annular_residuals(&setup.v, &setup.w, &setup.p, &g);
                self.annular = Some(AnnularResiduals { r1, r2 });
                self.invariants.insert("annular".into(), r1.max(r2) <= id_tol);
            }
            Err(e) => {
                self.invariants.insert("angle_bound".into(), false);
                self.error = Some(ReportError::from(&e));
            }
        }

        let cert = certify_setup(&setup, ess, tols)?;
        if cert.verdict != Verdict::NotCertifiable {
            let slack = tols.bound_slack * h.norm().max(1.0);
            self.invariants.insert("certificate_recheck".into(), cert.recheck(slack).is_ok());
            let lambdas = variational_values(h, 0.0).values;
            let mus = cert.mus();
            let eta = cert.eta + tols.bound_slack;
            let oracle = oracle_match(&mus, &lambdas, eta);
            self.invariants.insert(
                "oracle_match".into(),
                oracle.feasible && witness_admissible(&mus, &lambdas, &cert.witness(), eta),
            );
        }
        self.certificate = Some(cert);
        Ok(())
    }

    pub fn outcome(&self) -> Outcome {
        match (&self.certificate, &self.error) {
            (_, Some(e)) if e.kind == "internal_contradiction" => Outcome::InternalContradiction,
            (Some(c), _) => match c.verdict {
                Verdict::Certified => Outcome::Certified,
                Verdict::Partial => Outcome::Partial,
                Verdict::NotCertifiable => Outcome::NotCertifiable,
            },
            (None, _) => Outcome::Error,
        }
    }

    pub fn certify_output(&self) -> Option<CertifyOutput> {
        self.certificate.clone().map(|certificate| CertifyOutput {
            certificate,
            angle: self.angle.as_ref().map(AngleSummary::from),
        })
    }
}

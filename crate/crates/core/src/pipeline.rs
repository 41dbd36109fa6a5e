//! Instance → slack factorization → normalization → encoding → reconstruction.

use serde::{Deserialize, Serialize};

use crate::encoding::{encode, reconstruct, EncodeParams, EncodedPolytope, Reconstruction, RhoVariant};
use crate::error::{Error, Result};
use crate::polytope::{slack_factorization, PolytopeInstance};
use crate::scaling::{normalize_factorization, Factorization, ScalingCertificate, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorizationPath {
    /// Slack factorization rescaled by the barrier scaling automorphism.
    Normalized,
    /// Slack factorization used as is: `cone(A)` misses the interior
    /// because some inequality is tight on every point.
    Raw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    pub rho_variant: RhoVariant,
    /// `f_C`; `None` uses `√ϑ` of the orthant.
    pub f_c: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            rho_variant: RhoVariant::DPlusOne,
            f_c: None,
        }
    }
}

pub struct PipelineRun {
    pub path: FactorizationPath,
    pub factorization: Factorization,
    pub certificate: Option<ScalingCertificate>,
    pub encoded: EncodedPolytope,
    pub reconstruction: Reconstruction,
    /// Whether the accepted candidates are exactly `V`.
    pub exact: bool,
}

/// Slack factorization, normalized when `cone(A)` and `cone(B)` meet the
/// interiors and left raw otherwise.
pub fn factorize(
    inst: &PolytopeInstance,
    solver: &SolverOptions,
) -> Result<(FactorizationPath, Factorization, Option<ScalingCertificate>)> {
    let raw = slack_factorization(inst)?;
    match normalize_factorization(&raw, solver) {
        Ok((fac, cert)) => Ok((FactorizationPath::Normalized, fac, Some(cert))),
        Err(Error::Precondition(_)) => Ok((FactorizationPath::Raw, raw, None)),
        Err(e) => Err(e),
    }
}

/// Encoding parameters for an instance: `M` and `‖v‖_∞` from the instance,
/// `f_C` from the options or `√ϑ`.
pub fn instance_params(inst: &PolytopeInstance, fac: &Factorization, opts: &PipelineOptions) -> Result<EncodeParams> {
    let m = crate::polytope::biguint_to_f64(&inst.m)?;
    let mut params = EncodeParams::new(m, opts.f_c.unwrap_or((fac.cone.dim() as f64).sqrt()));
    params.v_bound = inst.v_bound.max(1) as f64;
    params.rho_variant = opts.rho_variant;
    Ok(params)
}

pub fn run_instance(inst: &PolytopeInstance, opts: &PipelineOptions) -> Result<PipelineRun> {
    let (path, fac, cert) = factorize(inst, &opts.solver)?;
    let encoded = encode(&fac, &instance_params(inst, &fac, opts)?)?;
    let reconstruction = reconstruct(&encoded, &inst.ground_set()?)?;
    if reconstruction.indeterminate() {
        let worst = reconstruction
            .candidates
            .iter()
            .filter(|c| c.status == crate::encoding::Feasibility::Indeterminate)
            .map(|c| c.max_violation)
            .fold(0.0, f64::max);
        return Err(Error::Indeterminate { violation: worst });
    }
    let exact = reconstruction.accepted == inst.v;
    Ok(PipelineRun {
        path,
        factorization: fac,
        certificate: cert,
        encoded,
        reconstruction,
        exact,
    })
}

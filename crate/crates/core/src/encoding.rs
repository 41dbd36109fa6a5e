//! Compact encoding of a factorized point/inequality pair and its
//! reconstruction by convex feasibility.
//!
//! An encoding keeps `n+d` inequality vectors `fᵢ` and lattice-rounded dual
//! vectors `uᵢ ≈ b_{fᵢ}`. A candidate `x` is reconstructed iff some
//! `y ∈ C ∩ B₀(ρ)` has `|⟨fᵢ,x⟩ − ⟨uᵢ,y⟩| ≤ δ` for every `i`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::{theta, BarrierPoint};
use crate::cone::ConeDescriptor;
use crate::error::{Error, Result};
use crate::net::{max_volume_subsystem, NetMode, NetSpec};
use crate::newton::{follow_path, BarrierEval, BarrierProblem, Control, PathOptions};
use crate::scaling::Factorization;

/// Which dimension enters `ρ = √((k+1)·M·‖v‖_∞)·f_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RhoVariant {
    /// `k = d`, the lifted space dimension.
    #[default]
    #[serde(rename = "d+1")]
    DPlusOne,
    /// `k = n`, the cone dimension.
    #[serde(rename = "n+1")]
    NPlusOne,
}

impl RhoVariant {
    pub fn k(self, n: usize, d: usize) -> usize {
        match self {
            RhoVariant::DPlusOne => d,
            RhoVariant::NPlusOne => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodeParams {
    /// Bound on `‖f‖_∞`.
    #[serde(rename = "M")]
    pub m: f64,
    pub f_c: f64,
    /// Bound on `‖v‖_∞` (1 for 0/1 points).
    pub v_bound: f64,
    pub rho_variant: RhoVariant,
}

impl EncodeParams {
    pub fn new(m: f64, f_c: f64) -> Self {
        Self {
            m,
            f_c,
            v_bound: 1.0,
            rho_variant: RhoVariant::default(),
        }
    }

    /// `√(d·M·‖v‖_∞)·f_C`, the norm every factor must respect.
    pub fn norm_cap(&self, d: usize) -> f64 {
        (d as f64 * self.m * self.v_bound).sqrt() * self.f_c
    }

    pub fn rho(&self, n: usize, d: usize) -> f64 {
        ((self.rho_variant.k(n, d) + 1) as f64 * self.m * self.v_bound).sqrt() * self.f_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedPolytope {
    pub cone: ConeDescriptor,
    pub n: usize,
    pub d: usize,
    pub params: EncodeParams,
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub lattice_spacing: f64,
    /// Indices into the factorization's inequality list, padded to `n+d`.
    pub selected: Vec<usize>,
    pub f: Vec<Vec<i64>>,
    /// Net points `uᵢ = lattice_spacing · u_index[i]`.
    pub u_index: Vec<Vec<i64>>,
}

impl EncodedPolytope {
    pub fn u(&self) -> Vec<DVector<f64>> {
        self.u_index
            .iter()
            .map(|k| DVector::from_iterator(k.len(), k.iter().map(|&x| x as f64 * self.lattice_spacing)))
            .collect()
    }

    /// The data that identifies `V`: the pairs `(fᵢ, uᵢ)`.
    pub fn key(&self) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
        (self.f.clone(), self.u_index.clone())
    }
}

fn inf_norm(v: &[i64]) -> f64 {
    v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64
}

fn idot(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

/// Selects a max-volume subsystem of the rows `(f, b_f)`, rounds the
/// selected `b_f` onto the lattice net and pads to `n+d` entries by
/// repeating the last selected row.
pub fn encode(fac: &Factorization, params: &EncodeParams) -> Result<EncodedPolytope> {
    let labels = fac
        .labels
        .as_ref()
        .ok_or_else(|| Error::precondition("encoding needs point and inequality labels"))?;
    let n = fac.cone.dim();
    let d = labels
        .inequalities
        .first()
        .or(labels.points.first())
        .map(|v| v.len())
        .ok_or_else(|| Error::precondition("no inequalities to encode"))?;
    if !(params.m > 0.0 && params.m.is_finite() && params.f_c > 0.0 && params.v_bound > 0.0) {
        return Err(Error::precondition("M, f_C and the point bound must be positive and finite"));
    }
    for f in &labels.inequalities {
        if f.len() != d {
            return Err(Error::Dimension { expected: d, got: f.len() });
        }
        if inf_norm(f) > params.m {
            return Err(Error::precondition(format!("‖f‖_∞ = {} exceeds M = {}", inf_norm(f), params.m)));
        }
    }
    for v in &labels.points {
        if v.len() != d {
            return Err(Error::Dimension { expected: d, got: v.len() });
        }
        if inf_norm(v) > params.v_bound {
            return Err(Error::precondition(format!("‖v‖_∞ = {} exceeds {}", inf_norm(v), params.v_bound)));
        }
    }
    let mut worst = 0.0f64;
    for (v, a) in labels.points.iter().zip(&fac.a) {
        for (f, b) in labels.inequalities.iter().zip(&fac.b) {
            let s = idot(v, f);
            if s < 0.0 {
                return Err(Error::precondition("some ⟨v, f⟩ is negative"));
            }
            worst = worst.max((a.dot(b) - s).abs() / (1.0 + s));
        }
    }
    if worst > 1e-9 {
        return Err(Error::Inconsistent { max_violation: worst });
    }
    let cap = params.norm_cap(d) * (1.0 + 1e-12);
    if let Some(x) = fac.a.iter().chain(&fac.b).find(|x| x.norm() > cap) {
        return Err(Error::precondition(format!(
            "factor norm {} exceeds √(dM)·f_C = {}; normalize the factorization first",
            x.norm(),
            params.norm_cap(d)
        )));
    }

    let rows: Vec<DVector<f64>> = labels
        .inequalities
        .iter()
        .zip(&fac.b)
        .map(|(f, b)| DVector::from_iterator(d + n, f.iter().map(|&x| x as f64).chain(b.iter().copied())))
        .collect();
    let mut selected = max_volume_subsystem(&rows)?;
    if selected.is_empty() {
        return Err(Error::RankDeficient { rank: 0, required: 1 });
    }

    let rho = params.rho(n, d);
    let eps = 1.0 / (4.0 * (n + d) as f64 * rho);
    let net = NetSpec::new(n, rho, eps, NetMode::ImplicitLattice)?;
    let last = *selected.last().unwrap();
    selected.resize(n + d, last);
    let u_index = selected
        .iter()
        .map(|&i| net.round_index(&fac.b[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedPolytope {
        cone: fac.cone.clone(),
        n,
        d,
        params: *params,
        rho,
        eps,
        delta: 1.0 / (4.0 * (n + d) as f64),
        lattice_spacing: net.spacing(),
        f: selected.iter().map(|&i| labels.inequalities[i].clone()).collect(),
        selected,
        u_index,
    })
}

/// `center − halfwidth ≤ ⟨u, y⟩ ≤ center + halfwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub u: DVector<f64>,
    pub center: f64,
    pub halfwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: Feasibility,
    /// Best point found; its largest slab violation is `max_violation`.
    pub witness: DVector<f64>,
    /// `max(|center − ⟨u,y⟩| − halfwidth)` at the witness.
    pub max_violation: f64,
    /// Certified lower bound on the smallest achievable violation.
    pub lower_bound: f64,
}

/// Violation of the slabs at `y`.
pub fn slab_violation(slabs: &[Slab], y: &DVector<f64>) -> f64 {
    slabs
        .iter()
        .map(|s| (s.center - s.u.dot(y)).abs() - s.halfwidth)
        .fold(f64::NEG_INFINITY, f64::max)
}

struct SlabProblem<'a> {
    cone: &'a ConeDescriptor,
    rho2: f64,
    slabs: &'a [Slab],
    cost: DVector<f64>,
    theta: f64,
}

impl BarrierProblem for SlabProblem<'_> {
    fn cost(&self) -> &DVector<f64> {
        &self.cost
    }

    fn value(&self, z: &DVector<f64>) -> Option<f64> {
        let n = self.cone.dim();
        let y = z.rows(0, n).into_owned();
        let s = z[n];
        let p = BarrierPoint::try_new(self.cone, &y)?;
        let q0 = self.rho2 - y.norm_squared();
        if q0 <= 0.0 {
            return None;
        }
        let mut v = p.value() - q0.ln();
        for sl in self.slabs {
            let r = sl.center - sl.u.dot(&y);
            let (p1, p2) = (s + sl.halfwidth - r, s + sl.halfwidth + r);
            if p1 <= 0.0 || p2 <= 0.0 {
                return None;
            }
            v -= p1.ln() + p2.ln();
        }
        Some(v)
    }

    fn eval(&self, z: &DVector<f64>) -> Option<BarrierEval> {
        let value = self.value(z)?;
        let n = self.cone.dim();
        let y = z.rows(0, n).into_owned();
        let s = z[n];
        let p = BarrierPoint::try_new(self.cone, &y)?;
        let q0 = self.rho2 - y.norm_squared();
        let mut grad = DVector::zeros(n + 1);
        let mut hess = DMatrix::zeros(n + 1, n + 1);
        grad.rows_mut(0, n).copy_from(&(p.gradient() + &y * (2.0 / q0)));
        {
            let mut hy = hess.view_mut((0, 0), (n, n));
            hy += p.hessian_matrix();
            hy += DMatrix::identity(n, n) * (2.0 / q0);
            hy.ger(4.0 / (q0 * q0), &y, &y, 1.0);
        }
        let mut dp = DVector::zeros(n + 1);
        for sl in self.slabs {
            let r = sl.center - sl.u.dot(&y);
            for (sign, pv) in [(1.0, s + sl.halfwidth - r), (-1.0, s + sl.halfwidth + r)] {
                dp.rows_mut(0, n).copy_from(&(&sl.u * sign));
                dp[n] = 1.0;
                grad -= &dp / pv;
                hess.ger(1.0 / (pv * pv), &dp, &dp, 1.0);
            }
        }
        Some(BarrierEval { value, grad, hess })
    }

    fn nu(&self) -> f64 {
        self.theta + 1.0 + 2.0 * self.slabs.len() as f64
    }
}

/// Minimizes `s` subject to `|cᵢ − ⟨uᵢ,y⟩| − hᵢ ≤ s`, `y ∈ C`, `‖y‖ ≤ ρ`
/// with a barrier method. Stops as soon as a point with violation at most
/// `tol` is found (feasible) or the duality bound proves the optimum is
/// above `tol` (infeasible).
pub fn feasibility_check(cone: &ConeDescriptor, rho: f64, slabs: &[Slab], tol: f64) -> Result<FeasibilityResult> {
    let th = theta(cone)? as f64;
    if !(rho > 0.0) {
        return Err(Error::precondition("ρ must be positive"));
    }
    let n = cone.dim();
    for sl in slabs {
        if sl.u.len() != n {
            return Err(Error::Dimension { expected: n, got: sl.u.len() });
        }
        if !(sl.halfwidth >= 0.0) {
            return Err(Error::precondition("slab half-widths must be nonnegative"));
        }
    }
    let e = cone.identity_point();
    let y0 = &e * (0.5 * rho / e.norm());
    if slabs.is_empty() {
        return Ok(FeasibilityResult {
            status: Feasibility::Feasible,
            witness: y0,
            max_violation: f64::NEG_INFINITY,
            lower_bound: f64::NEG_INFINITY,
        });
    }
    let v0 = slab_violation(slabs, &y0);
    if v0 <= tol {
        return Ok(FeasibilityResult {
            status: Feasibility::Feasible,
            witness: y0,
            max_violation: v0,
            lower_bound: f64::NEG_INFINITY,
        });
    }
    let mut z0 = DVector::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(&y0);
    z0[n] = v0 + 1.0;
    let mut cost = DVector::zeros(n + 1);
    cost[n] = 1.0;
    let problem = SlabProblem {
        cone,
        rho2: rho * rho,
        slabs,
        cost,
        theta: th,
    };
    let nu = problem.nu();
    let scale = 1.0 + v0.abs();
    let opts = PathOptions {
        tau0: nu / scale,
        gap_tol: 1e-12 * nu / scale,
        max_newton: 4000,
        ..PathOptions::default()
    };
    let mut best = (y0.clone(), v0);
    let mut lower = f64::NEG_INFINITY;
    let mut status = Feasibility::Indeterminate;
    let outcome = follow_path(&problem, z0, &opts, |z, tau| {
        let y = z.rows(0, n).into_owned();
        let viol = slab_violation(slabs, &y);
        if viol < best.1 {
            best = (y, viol);
        }
        // Near-central points satisfy s − s* ≤ ν/τ; the factor 2 covers the
        // centering tolerance.
        lower = lower.max(z[n] - 2.0 * nu / tau);
        if best.1 <= tol {
            status = Feasibility::Feasible;
            Control::Stop
        } else if lower > tol {
            status = Feasibility::Infeasible;
            Control::Stop
        } else {
            Control::Continue
        }
    });
    match outcome {
        Ok(_) | Err(Error::NonConvergence { .. }) | Err(Error::Numerical(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(FeasibilityResult {
        status,
        witness: best.0,
        max_violation: best.1,
        lower_bound: lower,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateResult {
    pub point: Vec<i64>,
    pub status: Feasibility,
    pub max_violation: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reconstruction {
    pub accepted: Vec<Vec<i64>>,
    pub candidates: Vec<CandidateResult>,
    /// Decision threshold on the slab violation.
    pub tol: f64,
}

impl Reconstruction {
    pub fn indeterminate(&self) -> bool {
        self.candidates.iter().any(|c| c.status == Feasibility::Indeterminate)
    }
}

/// Decides each candidate with [`feasibility_check`] at threshold `δ/2`:
/// members of `V` have violation at most 0 and all other candidates at
/// least `δ`, so the threshold sits in the middle of the gap.
pub fn reconstruct(enc: &EncodedPolytope, candidates: &[Vec<i64>]) -> Result<Reconstruction> {
    let u = enc.u();
    let tol = 0.5 * enc.delta;
    let results: Vec<CandidateResult> = candidates
        .par_iter()
        .map(|x| {
            if x.len() != enc.d {
                return Err(Error::Dimension { expected: enc.d, got: x.len() });
            }
            let slabs: Vec<Slab> = enc
                .f
                .iter()
                .zip(&u)
                .map(|(f, u)| Slab {
                    u: u.clone(),
                    center: idot(f, x),
                    halfwidth: enc.delta,
                })
                .collect();
            let r = feasibility_check(&enc.cone, enc.rho, &slabs, tol)?;
            Ok(CandidateResult {
                point: x.clone(),
                status: r.status,
                max_violation: r.max_violation,
                lower_bound: r.lower_bound,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Reconstruction {
        accepted: results
            .iter()
            .filter(|c| c.status == Feasibility::Feasible)
            .map(|c| c.point.clone())
            .collect(),
        candidates: results,
        tol,
    })
}

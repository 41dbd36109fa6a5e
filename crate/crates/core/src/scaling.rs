//! Normalization of factorizations over symmetric cones.
//!
//! The scaling point `w̄` minimizes the largest of `⟨−∇F(w), a⟩` (over `A`)
//! and `⟨w, b⟩` (over `B`). The Hessian square root at `w̄` is a self-adjoint
//! automorphism `L` with `‖La‖² ≤ ϑΔ` and `‖L⁻¹b‖² ≤ ϑΔ`, while `⟨La, L⁻¹b⟩`
//! reproduces `⟨a, b⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::barrier::{theta, BarrierPoint, ScalingOperator};
use crate::cone::{ConeDescriptor, INTERIOR_TOL, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::minnorm::min_norm_point;
use crate::newton::{follow_path, solve_spd, BarrierEval, BarrierProblem, Control, PathOptions};

/// Integer labels tying factorization members back to a polytope instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationLabels {
    /// One lifted point per member of `A`.
    pub points: Vec<Vec<i64>>,
    /// One inequality vector per member of `B`.
    pub inequalities: Vec<Vec<i64>>,
}

/// Paired sets `A ⊆ C`, `B ⊆ C★`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub cone: ConeDescriptor,
    pub a: Vec<DVector<f64>>,
    pub b: Vec<DVector<f64>>,
    pub labels: Option<FactorizationLabels>,
}

impl Factorization {
    /// Validates dimensions and cone membership (tolerance relative to each
    /// vector's norm).
    pub fn new(
        cone: ConeDescriptor,
        a: Vec<DVector<f64>>,
        b: Vec<DVector<f64>>,
        labels: Option<FactorizationLabels>,
    ) -> Result<Self> {
        for (i, x) in a.iter().enumerate() {
            cone.check_dim(x).map_err(|e| Error::schema(format!("A[{i}]"), e.to_string()))?;
            if !cone.contains(x, MEMBERSHIP_TOL * (1.0 + x.norm()))? {
                return Err(Error::schema(format!("A[{i}]"), "vector is not in the cone"));
            }
        }
        for (i, y) in b.iter().enumerate() {
            cone.check_dim(y).map_err(|e| Error::schema(format!("B[{i}]"), e.to_string()))?;
            if !cone.dual_contains(y, MEMBERSHIP_TOL * (1.0 + y.norm()))? {
                return Err(Error::schema(format!("B[{i}]"), "vector is not in the dual cone"));
            }
        }
        if let Some(l) = &labels {
            if l.points.len() != a.len() || l.inequalities.len() != b.len() {
                return Err(Error::schema("labels", "label counts must match |A| and |B|"));
            }
        }
        Ok(Self { cone, a, b, labels })
    }

    /// `Δ = max ⟨a, b⟩` over all pairs (0 when either set is empty).
    pub fn delta(&self) -> f64 {
        let mut d = 0.0f64;
        for a in &self.a {
            for b in &self.b {
                d = d.max(a.dot(b));
            }
        }
        d
    }

    pub fn max_norm(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|x| x.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative optimality gap for the scaling program.
    pub tol: f64,
    /// Acceptance threshold for the KKT residual, relative to `1 + Δ`.
    pub kkt_tol: f64,
    /// Relative slack under which a constraint counts as active.
    pub active_tol: f64,
    /// Newton step budget.
    pub max_iters: usize,
    /// Scale used when `Δ = 0`; `None` picks `min(1, 1/(1 + max norm))`.
    pub eps_zero: Option<f64>,
    /// Normalize each block of a product cone separately.
    pub blockwise: bool,
    /// Assert monotone decrease of every damped Newton step.
    pub debug: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            kkt_tol: 1e-6,
            active_tol: 1e-6,
            max_iters: 5000,
            eps_zero: None,
            blockwise: false,
            debug: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sym1Solution {
    pub w: DVector<f64>,
    pub t: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub kkt_residual: f64,
    /// `Σ λ_a (t − ⟨−∇F(w),a⟩) + Σ μ_b (t − ⟨w,b⟩)`.
    pub complementarity: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingCertificate {
    pub operator: ScalingOperator,
    pub theta: usize,
    pub delta: f64,
    pub w_bar: DVector<f64>,
    pub t_bar: f64,
    pub kkt_residual: f64,
    pub max_primal_norm_sq: f64,
    pub max_dual_norm_sq: f64,
    pub inner_product_max_error: f64,
    /// Set when `Δ = 0` and both sets were scaled by this factor.
    pub eps_zero: Option<f64>,
}

impl ScalingCertificate {
    /// Operational normalization constant `√ϑ` (norms are at most `f_C·√Δ`).
    pub fn f_c(&self) -> f64 {
        (self.theta as f64).sqrt()
    }

    pub fn bound(&self) -> f64 {
        self.theta as f64 * self.delta
    }

    /// Whether the norm bounds and pairing preservation hold at the
    /// documented tolerances.
    pub fn holds(&self) -> bool {
        if self.eps_zero.is_some() {
            return self.inner_product_max_error <= 1e-8 * (1.0 + self.delta);
        }
        let cap = self.bound() * (1.0 + 1e-6);
        self.max_primal_norm_sq <= cap
            && self.max_dual_norm_sq <= cap
            && self.inner_product_max_error <= 1e-8 * (1.0 + self.delta)
    }
}

fn check_hypotheses(fac: &Factorization) -> Result<()> {
    theta(&fac.cone)?;
    if fac.a.is_empty() || fac.b.is_empty() {
        return Err(Error::precondition("both A and B must be nonempty"));
    }
    let sa: DVector<f64> = fac.a.iter().fold(DVector::zeros(fac.cone.dim()), |s, x| s + x);
    if !fac.cone.contains_interior(&sa, INTERIOR_TOL * (1.0 + sa.norm()))? {
        return Err(Error::precondition("cone(A) does not meet the interior of C (set A)"));
    }
    let sb: DVector<f64> = fac.b.iter().fold(DVector::zeros(fac.cone.dim()), |s, x| s + x);
    if !fac.cone.dual_contains_interior(&sb, INTERIOR_TOL * (1.0 + sb.norm()))? {
        return Err(Error::precondition("cone(B) does not meet the interior of C★ (set B)"));
    }
    Ok(())
}

/// Objective of the scaling program at `w`: the largest constraint value.
pub fn sym1_objective(cone: &ConeDescriptor, w: &DVector<f64>, a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<f64> {
    let p = BarrierPoint::new(cone, w)?;
    let ng = p.neg_gradient();
    let ta = a.iter().map(|x| ng.dot(x)).fold(f64::NEG_INFINITY, f64::max);
    let tb = b.iter().map(|y| w.dot(y)).fold(f64::NEG_INFINITY, f64::max);
    Ok(ta.max(tb))
}

struct Sym1Problem<'a> {
    cone: &'a ConeDescriptor,
    a: Vec<DVector<f64>>,
    b: Vec<DVector<f64>>,
    cost: DVector<f64>,
}

impl Sym1Problem<'_> {
    fn split<'z>(&self, z: &'z DVector<f64>) -> (DVector<f64>, f64) {
        let n = self.cone.dim();
        (z.rows(0, n).into_owned(), z[n])
    }
}

impl BarrierProblem for Sym1Problem<'_> {
    fn cost(&self) -> &DVector<f64> {
        &self.cost
    }

    fn value(&self, z: &DVector<f64>) -> Option<f64> {
        let (w, t) = self.split(z);
        let p = BarrierPoint::try_new(self.cone, &w)?;
        let ng = p.neg_gradient();
        let mut v = 0.0;
        for a in &self.a {
            let q = t - ng.dot(a);
            if q <= 0.0 {
                return None;
            }
            v -= q.ln();
        }
        for b in &self.b {
            let q = t - w.dot(b);
            if q <= 0.0 {
                return None;
            }
            v -= q.ln();
        }
        Some(v)
    }

    fn eval(&self, z: &DVector<f64>) -> Option<BarrierEval> {
        let n = self.cone.dim();
        let (w, t) = self.split(z);
        let p = BarrierPoint::try_new(self.cone, &w)?;
        let ng = p.neg_gradient();
        let mut value = 0.0;
        let mut grad = DVector::zeros(n + 1);
        let mut hess = DMatrix::zeros(n + 1, n + 1);
        let mut dq = DVector::zeros(n + 1);
        for a in &self.a {
            let q = t - ng.dot(a);
            if q <= 0.0 {
                return None;
            }
            value -= q.ln();
            dq.rows_mut(0, n).copy_from(&p.hessian_apply(a));
            dq[n] = 1.0;
            grad -= &dq / q;
            hess.ger(1.0 / (q * q), &dq, &dq, 1.0);
            let ph = p.pairing_hessian(a) / q;
            let mut ww = hess.view_mut((0, 0), (n, n));
            ww += ph;
        }
        for b in &self.b {
            let q = t - w.dot(b);
            if q <= 0.0 {
                return None;
            }
            value -= q.ln();
            dq.rows_mut(0, n).copy_from(&(-b));
            dq[n] = 1.0;
            grad -= &dq / q;
            hess.ger(1.0 / (q * q), &dq, &dq, 1.0);
        }
        Some(BarrierEval { value, grad, hess })
    }

    fn nu(&self) -> f64 {
        (self.a.len() + self.b.len()) as f64
    }
}

/// Solves the scaling program `min t` s.t. `⟨−∇F(w), a⟩ ≤ t`, `⟨w, b⟩ ≤ t`,
/// `w ∈ int C`, and certifies the optimum through [`kkt_residual`].
pub fn solve_sym1(fac: &Factorization, opts: &SolverOptions) -> Result<Sym1Solution> {
    check_hypotheses(fac)?;
    let delta = fac.delta();
    if delta <= 0.0 {
        return Err(Error::precondition("Δ = 0: use normalize_factorization for the degenerate case"));
    }
    let cone = &fac.cone;
    let n = cone.dim();
    let alpha = fac.a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let beta = fac.b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let problem = Sym1Problem {
        cone,
        a: fac.a.iter().map(|x| x / alpha).collect(),
        b: fac.b.iter().map(|x| x / beta).collect(),
        cost: {
            let mut c = DVector::zeros(n + 1);
            c[n] = 1.0;
            c
        },
    };

    // Balance the two constraint groups along the ray through the identity.
    let e = cone.identity_point();
    let pe = BarrierPoint::new(cone, &e)?;
    let nge = pe.neg_gradient();
    let ga = problem.a.iter().map(|x| nge.dot(x)).fold(0.0, f64::max);
    let hb = problem.b.iter().map(|y| e.dot(y)).fold(0.0, f64::max);
    let c = (ga / hb).sqrt();
    let w0 = &e * c;
    let t0 = 2.0 * (ga * hb).sqrt();
    let mut z0 = DVector::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(&w0);
    z0[n] = t0;

    let popts = PathOptions {
        tau0: problem.nu() / t0,
        gap_tol: 0.0,
        max_newton: opts.max_iters,
        accept_stall: true,
        debug: opts.debug,
        ..PathOptions::default()
    };
    let nu = problem.nu();
    let tol = opts.tol;
    let result = follow_path(&problem, z0, &popts, |z, tau| {
        if nu / tau <= tol * z[n].abs().max(1e-300) {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;

    let w = result.z.rows(0, n).into_owned() * (alpha / beta).sqrt();
    let t = sym1_objective(cone, &w, &fac.a, &fac.b)?;
    let (residual, lambda, mu) = kkt_residual(fac, &w, t, opts.active_tol)?;
    let complementarity = complementarity(fac, &w, t, &lambda, &mu)?;
    if residual > opts.kkt_tol * (1.0 + delta) {
        return Err(Error::NonConvergence {
            iterations: result.newton_steps,
            detail: format!(
                "KKT residual {residual:e} above tolerance at t = {t}{}, w = {:?}",
                if result.stalled { " after a stalled centering" } else { "" },
                w.as_slice()
            ),
        });
    }
    Ok(Sym1Solution {
        w,
        t,
        lambda,
        mu,
        kkt_residual: residual,
        complementarity,
        newton_steps: result.newton_steps,
    })
}

fn complementarity(fac: &Factorization, w: &DVector<f64>, t: f64, lambda: &[f64], mu: &[f64]) -> Result<f64> {
    let p = BarrierPoint::new(&fac.cone, w)?;
    let ng = p.neg_gradient();
    let sa: f64 = fac.a.iter().zip(lambda).map(|(a, l)| l * (t - ng.dot(a))).sum();
    let sb: f64 = fac.b.iter().zip(mu).map(|(b, m)| m * (t - w.dot(b))).sum();
    Ok(sa + sb)
}

/// Stationarity residual `min ‖∇²F(w)(Σ λ_a a) − Σ μ_b b‖` over nonnegative
/// multipliers with `Σλ + Σμ = 1`, supported on the constraints active
/// within `active_tol` (relative to `t`). Returns the residual and the
/// minimizing multipliers.
pub fn kkt_residual(fac: &Factorization, w: &DVector<f64>, t: f64, active_tol: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let p = BarrierPoint::new(&fac.cone, w)?;
    let ng = p.neg_gradient();
    let band = active_tol * t.abs().max(1e-300);
    let mut cols = Vec::new();
    let mut owners = Vec::new();
    for (i, a) in fac.a.iter().enumerate() {
        if t - ng.dot(a) <= band {
            cols.push(p.hessian_apply(a));
            owners.push((true, i));
        }
    }
    for (j, b) in fac.b.iter().enumerate() {
        if t - w.dot(b) <= band {
            cols.push(-b);
            owners.push((false, j));
        }
    }
    let mut lambda = vec![0.0; fac.a.len()];
    let mut mu = vec![0.0; fac.b.len()];
    if cols.is_empty() {
        return Ok((f64::INFINITY, lambda, mu));
    }
    let (weights, residual) = tie_broken_min_norm(&cols);
    for ((is_a, i), wgt) in owners.into_iter().zip(weights) {
        if is_a {
            lambda[i] = wgt;
        } else {
            mu[i] = wgt;
        }
    }
    Ok((residual, lambda, mu))
}

/// Multipliers are not unique when several constraints are redundant; among
/// (near-)minimizers prefer the smallest weight vector, which spreads weight
/// evenly over symmetric constraints.
fn tie_broken_min_norm(cols: &[DVector<f64>]) -> (Vec<f64>, f64) {
    let (w0, r0) = min_norm_point(cols);
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let m = cols.len();
    let reg = 1e-4 * scale;
    let augmented: Vec<DVector<f64>> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut v = DVector::zeros(c.len() + m);
            v.rows_mut(0, c.len()).copy_from(c);
            v[c.len() + j] = reg;
            v
        })
        .collect();
    let (w1, _) = min_norm_point(&augmented);
    let r1 = cols.iter().zip(&w1).fold(DVector::zeros(cols[0].len()), |acc, (c, w)| acc + c * *w).norm();
    if r1 <= (2.0 * r0).max(r0 + 1e-9 * scale) {
        (w1, r1)
    } else {
        (w0, r0)
    }
}

/// `max( max_a ⟨∇²F(w)a, a⟩, max_b ⟨∇²F(w)⁻¹b, b⟩ )`.
pub fn evaluate_sym2(cone: &ConeDescriptor, w: &DVector<f64>, a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<f64> {
    let p = BarrierPoint::new(cone, w)?;
    let ta = a.iter().map(|x| p.hessian_apply(x).dot(x)).fold(f64::NEG_INFINITY, f64::max);
    let tb = b.iter().map(|y| p.hessian_inverse_apply(y).dot(y)).fold(f64::NEG_INFINITY, f64::max);
    Ok(ta.max(tb))
}

/// Rescales the factorization by the Hessian square root at the scaling
/// point. Returns the scaled sets and a certificate of the norm bounds.
pub fn normalize_factorization(fac: &Factorization, opts: &SolverOptions) -> Result<(Factorization, ScalingCertificate)> {
    let theta = theta(&fac.cone)?;
    let delta = fac.delta();
    let scale = fac.a.iter().map(|x| x.norm()).fold(0.0, f64::max) * fac.b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if delta <= 1e-15 * scale || delta == 0.0 {
        let eps = opts.eps_zero.unwrap_or_else(|| (1.0 / (1.0 + fac.max_norm())).min(1.0));
        let scaled = Factorization {
            cone: fac.cone.clone(),
            a: fac.a.iter().map(|x| x * eps).collect(),
            b: fac.b.iter().map(|x| x * eps).collect(),
            labels: fac.labels.clone(),
        };
        let cert = ScalingCertificate {
            operator: ScalingOperator::scalar(&fac.cone, eps),
            theta,
            delta,
            w_bar: fac.cone.identity_point(),
            t_bar: 0.0,
            kkt_residual: 0.0,
            max_primal_norm_sq: scaled.a.iter().map(|x| x.norm_squared()).fold(0.0, f64::max),
            max_dual_norm_sq: scaled.b.iter().map(|x| x.norm_squared()).fold(0.0, f64::max),
            inner_product_max_error: pairing_error(fac, &scaled),
            eps_zero: Some(eps),
        };
        return Ok((scaled, cert));
    }

    let (w, t, residual) = if opts.blockwise && fac.cone.blocks().len() > 1 {
        solve_blockwise(fac, opts)?
    } else {
        let sol = solve_sym1(fac, opts)?;
        (sol.w, sol.t, sol.kkt_residual)
    };
    let op = BarrierPoint::new(&fac.cone, &w)?.hessian_sqrt()?;
    let scaled = Factorization {
        cone: fac.cone.clone(),
        a: fac.a.iter().map(|x| op.apply(x)).collect(),
        b: fac.b.iter().map(|y| op.apply_inverse(y)).collect(),
        labels: fac.labels.clone(),
    };
    let cert = ScalingCertificate {
        theta,
        delta,
        t_bar: t,
        kkt_residual: residual,
        max_primal_norm_sq: scaled.a.iter().map(|x| x.norm_squared()).fold(0.0, f64::max),
        max_dual_norm_sq: scaled.b.iter().map(|x| x.norm_squared()).fold(0.0, f64::max),
        inner_product_max_error: pairing_error(fac, &scaled),
        operator: op,
        w_bar: w,
        eps_zero: None,
    };
    Ok((scaled, cert))
}

/// Per-block scaling points concatenated. The product Hessian is block
/// diagonal, so the composite square root acts blockwise.
fn solve_blockwise(fac: &Factorization, opts: &SolverOptions) -> Result<(DVector<f64>, f64, f64)> {
    let mut w = DVector::zeros(fac.cone.dim());
    let mut residual = 0.0f64;
    for (kind, s) in fac.cone.blocks().iter().zip(fac.cone.slices()) {
        let sub = Factorization {
            cone: ConeDescriptor::new(vec![*kind])?,
            a: fac.a.iter().map(|x| x.rows(s.offset, s.len).into_owned()).collect(),
            b: fac.b.iter().map(|y| y.rows(s.offset, s.len).into_owned()).collect(),
            labels: None,
        };
        let sol = solve_sym1(&sub, opts)
            .map_err(|e| Error::precondition(format!("blockwise normalization of block {}: {e}", s.index)))?;
        w.rows_mut(s.offset, s.len).copy_from(&sol.w);
        residual = residual.max(sol.kkt_residual);
    }
    let t = sym1_objective(&fac.cone, &w, &fac.a, &fac.b)?;
    Ok((w, t, residual))
}

fn pairing_error(orig: &Factorization, scaled: &Factorization) -> f64 {
    let mut err = 0.0f64;
    for (a, sa) in orig.a.iter().zip(&scaled.a) {
        for (b, sb) in orig.b.iter().zip(&scaled.b) {
            err = err.max((a.dot(b) - sa.dot(sb)).abs());
        }
    }
    err
}

/// Nesterov–Todd scaling point: the interior `w` with `∇²F(w) a = b`.
/// Orthant and PSD blocks use closed forms; second-order blocks use Newton's
/// method on the convex function `⟨−∇F(w), a⟩ + ⟨w, b⟩`.
pub fn nt_scaling_point(cone: &ConeDescriptor, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_nt_inputs(cone, a, b)?;
    let mut w = DVector::zeros(cone.dim());
    for (kind, s) in cone.blocks().iter().zip(cone.slices()) {
        let ab = a.rows(s.offset, s.len).into_owned();
        let bb = b.rows(s.offset, s.len).into_owned();
        let wb = match *kind {
            crate::cone::BlockKind::Orthant { .. } => ab.zip_map(&bb, |x, y| (x / y).sqrt()),
            crate::cone::BlockKind::Psd { side } => {
                let am = crate::cone::smat_unchecked(ab.as_slice(), side);
                let bm = crate::cone::smat_unchecked(bb.as_slice(), side);
                let ah = sym_fn(&am, f64::sqrt);
                let mid = &ah * bm * &ah;
                let wm = &ah * sym_fn(&mid, |l| 1.0 / l.sqrt()) * &ah;
                crate::cone::svec_unchecked(&wm)
            }
            _ => nt_newton(&ConeDescriptor::new(vec![*kind])?, &ab, &bb)?,
        };
        w.rows_mut(s.offset, s.len).copy_from(&wb);
    }
    Ok(w)
}

/// Nesterov–Todd point by Newton's method on the whole product cone.
pub fn nt_scaling_point_iterative(cone: &ConeDescriptor, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_nt_inputs(cone, a, b)?;
    nt_newton(cone, a, b)
}

fn check_nt_inputs(cone: &ConeDescriptor, a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    theta(cone)?;
    cone.check_dim(a)?;
    cone.check_dim(b)?;
    if !cone.contains_interior(a, INTERIOR_TOL * (1.0 + a.norm()))? {
        return Err(Error::precondition("a is not interior to C"));
    }
    if !cone.dual_contains_interior(b, INTERIOR_TOL * (1.0 + b.norm()))? {
        return Err(Error::precondition("b is not interior to C★"));
    }
    Ok(())
}

fn nt_newton(cone: &ConeDescriptor, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let objective = |w: &DVector<f64>| BarrierPoint::try_new(cone, w).map(|p| p.neg_gradient().dot(a) + w.dot(b));
    let e = cone.identity_point();
    let pe = BarrierPoint::new(cone, &e)?;
    let mut w = &e * (pe.neg_gradient().dot(a) / e.dot(b)).sqrt();
    let bnorm = b.norm();
    for _ in 0..200 {
        let p = BarrierPoint::new(cone, &w)?;
        let g = b - p.hessian_apply(a);
        if g.norm() <= 1e-14 * bnorm {
            return Ok(w);
        }
        let h = p.pairing_hessian(a);
        let dw = solve_spd(&h, &(-&g))?;
        let dec = -g.dot(&dw);
        let f0 = p.neg_gradient().dot(a) + w.dot(b);
        let mut step = if dec.sqrt() > 0.25 { 1.0 / (1.0 + dec.sqrt()) } else { 1.0 };
        let mut moved = false;
        for _ in 0..60 {
            let trial = &w + &dw * step;
            if let Some(f1) = objective(&trial) {
                // Close to the solution the objective change is below rounding,
                // so a full step that shrinks the residual is accepted too.
                let shrinks = step == 1.0
                    && BarrierPoint::try_new(cone, &trial).is_some_and(|q| (b - q.hessian_apply(a)).norm() < g.norm());
                if f1 <= f0 + 0.25 * step * g.dot(&dw) || dec < 1e-20 || shrinks {
                    w = trial;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let p = BarrierPoint::new(cone, &w)?;
    let res = (p.hessian_apply(a) - b).norm();
    if res <= 1e-8 * bnorm {
        Ok(w)
    } else {
        Err(Error::NonConvergence {
            iterations: 200,
            detail: format!("Nesterov–Todd residual {res:e}"),
        })
    }
}

fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

//! Damped-Newton path following for `min cᵀz` over the domain of a barrier.
//!
//! Used by the scaling solver and by the slab feasibility check. Each outer
//! step re-centers on `τ·cᵀz + Φ(z)` and then increases `τ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct BarrierEval {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

pub(crate) trait BarrierProblem {
    fn cost(&self) -> &DVector<f64>;
    /// `None` outside the barrier domain.
    fn eval(&self, z: &DVector<f64>) -> Option<BarrierEval>;
    /// Barrier value only; `None` outside the domain.
    fn value(&self, z: &DVector<f64>) -> Option<f64>;
    /// Sum of barrier parameters; `ν/τ` bounds the gap on the central path.
    fn nu(&self) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PathOptions {
    pub tau0: f64,
    pub tau_factor: f64,
    /// Stop once `ν/τ` drops below this.
    pub gap_tol: f64,
    pub max_newton: usize,
    pub centering_tol: f64,
    /// Newton steps allowed for a single centering.
    pub max_center: usize,
    /// On a stalled centering after the first, return the current iterate
    /// instead of failing; callers must certify it independently.
    pub accept_stall: bool,
    /// Check that every damped step decreases the centering objective.
    pub debug: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            tau0: 1.0,
            tau_factor: 8.0,
            gap_tol: 1e-11,
            max_newton: 5000,
            centering_tol: 1e-9,
            max_center: 500,
            accept_stall: false,
            debug: false,
        }
    }
}

pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct PathResult {
    pub z: DVector<f64>,
    pub newton_steps: usize,
    pub stalled: bool,
}

/// Runs path following from the strictly feasible `z0`. `monitor` is called
/// after every centering and may stop the run early.
pub(crate) fn follow_path<P: BarrierProblem>(
    problem: &P,
    z0: DVector<f64>,
    opts: &PathOptions,
    mut monitor: impl FnMut(&DVector<f64>, f64) -> Control,
) -> Result<PathResult> {
    let mut z = z0;
    let mut tau = opts.tau0;
    let mut steps = 0usize;
    if problem.value(&z).is_none() {
        return Err(Error::precondition("starting point outside the barrier domain"));
    }
    let mut centered_once = false;
    let mut stalled = false;
    loop {
        let budget = opts.max_center.min(opts.max_newton.saturating_sub(steps));
        match center(problem, &mut z, tau, opts, budget) {
            Ok(k) => steps += k,
            Err(Error::NonConvergence { iterations, .. }) if opts.accept_stall && centered_once => {
                steps += iterations;
                stalled = true;
                break;
            }
            Err(e) => return Err(e),
        }
        centered_once = true;
        if let Control::Stop = monitor(&z, tau) {
            break;
        }
        if problem.nu() / tau < opts.gap_tol {
            break;
        }
        if steps >= opts.max_newton {
            return Err(Error::NonConvergence {
                iterations: steps,
                detail: format!("Newton budget exhausted at τ = {tau:e}"),
            });
        }
        tau *= opts.tau_factor;
    }
    Ok(PathResult {
        z,
        newton_steps: steps,
        stalled,
    })
}

fn center<P: BarrierProblem>(
    problem: &P,
    z: &mut DVector<f64>,
    tau: f64,
    opts: &PathOptions,
    budget: usize,
) -> Result<usize> {
    let c = problem.cost();
    let objective = |z: &DVector<f64>| problem.value(z).map(|v| tau * c.dot(z) + v);
    let mut steps = 0;
    loop {
        if steps >= budget {
            return Err(Error::NonConvergence {
                iterations: steps,
                detail: format!("centering did not converge at τ = {tau:e}"),
            });
        }
        let ev = problem
            .eval(z)
            .ok_or_else(|| Error::Numerical("iterate left the barrier domain".into()))?;
        let g = c * tau + &ev.grad;
        let dz = solve_spd(&ev.hess, &(-&g))?;
        let decrement2 = -g.dot(&dz);
        steps += 1;
        if !decrement2.is_finite() {
            return Err(Error::Numerical("non-finite Newton decrement".into()));
        }
        if decrement2 <= 2.0 * opts.centering_tol {
            return Ok(steps);
        }
        let f0 = tau * c.dot(z) + ev.value;
        let slope = g.dot(&dz);
        let mut alpha = if decrement2.sqrt() > 0.25 { 1.0 / (1.0 + decrement2.sqrt()) } else { 1.0 };
        // Below this the objective difference is rounding noise.
        let noise = 1e-13 * (f0.abs() + tau * c.abs().dot(&z.abs()) + 1.0);
        if decrement2 <= 1e-4 && decrement2 <= noise {
            return Ok(steps);
        }
        let mut accepted = false;
        for _ in 0..80 {
            let trial = &*z + &dz * alpha;
            if let Some(f1) = objective(&trial) {
                if f1 <= f0 + 0.25 * alpha * slope {
                    if opts.debug {
                        assert!(f1 <= f0, "damped Newton step increased the objective");
                    }
                    *z = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No decrease representable in floating point: treat as centered.
            return Ok(steps);
        }
    }
}

/// Solves `H x = r` for symmetric positive (semi)definite `H`, regularizing
/// slightly when the Cholesky factorization fails.
pub(crate) fn solve_spd(h: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Ok(ch.solve(r));
    }
    let scale = h.diagonal().amax().max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = hr.cholesky() {
            return Ok(ch.solve(r));
        }
        reg *= 100.0;
    }
    h.clone()
        .lu()
        .solve(r)
        .ok_or_else(|| Error::Numerical("singular Newton system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x subject to 1 ≤ x ≤ 3, barrier −log(x−1) − log(3−x).
    struct Interval {
        c: DVector<f64>,
    }

    impl BarrierProblem for Interval {
        fn cost(&self) -> &DVector<f64> {
            &self.c
        }
        fn eval(&self, z: &DVector<f64>) -> Option<BarrierEval> {
            let v = self.value(z)?;
            let (a, b) = (z[0] - 1.0, 3.0 - z[0]);
            Some(BarrierEval {
                value: v,
                grad: DVector::from_element(1, -1.0 / a + 1.0 / b),
                hess: DMatrix::from_element(1, 1, 1.0 / (a * a) + 1.0 / (b * b)),
            })
        }
        fn value(&self, z: &DVector<f64>) -> Option<f64> {
            let (a, b) = (z[0] - 1.0, 3.0 - z[0]);
            (a > 0.0 && b > 0.0).then(|| -a.ln() - b.ln())
        }
        fn nu(&self) -> f64 {
            2.0
        }
    }

    #[test]
    fn interval_minimum() {
        let p = Interval {
            c: DVector::from_element(1, 1.0),
        };
        let opts = PathOptions {
            debug: true,
            ..PathOptions::default()
        };
        let r = follow_path(&p, DVector::from_element(1, 2.5), &opts, |_, _| Control::Continue).unwrap();
        assert!((r.z[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_start_rejected() {
        let p = Interval {
            c: DVector::from_element(1, 1.0),
        };
        assert!(follow_path(&p, DVector::from_element(1, 5.0), &PathOptions::default(), |_, _| Control::Continue).is_err());
    }
}

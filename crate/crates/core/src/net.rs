//! ε-nets of Euclidean balls and max-volume subsystem selection.
//!
//! The net is the cubic lattice `(2ε/√n)·ℤⁿ`: coordinatewise rounding moves
//! a point by at most `√n·(ε/√n) = ε`. The analytic cardinality bound of the
//! Rogers-type net is exposed separately as a formula.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::pivoted_basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetMode {
    ImplicitLattice,
    Enumerated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub n: usize,
    pub rho: f64,
    pub eps: f64,
    pub mode: NetMode,
}

impl NetSpec {
    pub fn new(n: usize, rho: f64, eps: f64, mode: NetMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::precondition("net dimension must be positive"));
        }
        if !(eps > 0.0) || !(rho > 0.0) || !eps.is_finite() || !rho.is_finite() {
            return Err(Error::precondition("ρ and ε must be positive and finite"));
        }
        if rho / eps < n as f64 {
            return Err(Error::precondition(format!("ρ/ε = {} is below n = {n}", rho / eps)));
        }
        Ok(Self { n, rho, eps, mode })
    }

    /// Lattice spacing `2ε/√n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.eps / (self.n as f64).sqrt()
    }

    /// Lattice coordinates of the net point nearest to `u`.
    pub fn round_index(&self, u: &DVector<f64>) -> Result<Vec<i64>> {
        if u.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: u.len() });
        }
        if u.norm() > self.rho * (1.0 + 1e-12) {
            return Err(Error::precondition(format!("‖u‖ = {} exceeds ρ = {}", u.norm(), self.rho)));
        }
        let h = self.spacing();
        u.iter()
            .map(|x| {
                let k = (x / h).round();
                if k.abs() < 9.0e15 {
                    Ok(k as i64)
                } else {
                    Err(Error::CapExceeded("lattice index out of range".into()))
                }
            })
            .collect()
    }

    pub fn point(&self, index: &[i64]) -> DVector<f64> {
        let h = self.spacing();
        DVector::from_iterator(index.len(), index.iter().map(|&k| k as f64 * h))
    }

    /// Rounds `u` onto the net.
    pub fn round(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.point(&self.round_index(u)?))
    }

    /// Lattice points within distance `ρ + ε` of the origin: every point of
    /// the ball rounds into this set.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Vec<i64>>> {
        let h = self.spacing();
        let r = self.rho + self.eps;
        let kmax = (r / h).floor() as i64;
        let side = (2 * kmax + 1) as f64;
        if side.powi(self.n as i32) > 64.0 * cap as f64 {
            return Err(Error::CapExceeded(format!("net enumeration box has {side}^{} cells", self.n)));
        }
        let mut out = Vec::new();
        let mut idx = vec![-kmax; self.n];
        let r2 = (r / h) * (r / h);
        loop {
            let norm2: f64 = idx.iter().map(|&k| (k * k) as f64).sum();
            if norm2 <= r2 {
                out.push(idx.clone());
                if out.len() > cap {
                    return Err(Error::CapExceeded(format!("net has more than {cap} points")));
                }
            }
            let mut pos = 0;
            loop {
                if pos == self.n {
                    return Ok(out);
                }
                idx[pos] += 1;
                if idx[pos] <= kmax {
                    break;
                }
                idx[pos] = -kmax;
                pos += 1;
            }
        }
    }
}

fn check_bound_args(n: usize, rho: f64, eps: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::precondition("the net bound needs n ≥ 3"));
    }
    if !(rho > 0.0) || !(eps > 0.0) || rho / eps < n as f64 {
        return Err(Error::precondition(format!("ρ/ε = {} must be at least n = {n}", rho / eps)));
    }
    Ok(())
}

/// `e·(n ln n + n ln ln n + 5n)·(ρ/ε)ⁿ`.
pub fn net_cardinality_bound(n: usize, rho: f64, eps: f64) -> Result<f64> {
    check_bound_args(n, rho, eps)?;
    Ok(net_cardinality_bound_log2(n, rho, eps)?.exp2())
}

/// Base-2 logarithm of [`net_cardinality_bound`], finite for large `n`.
pub fn net_cardinality_bound_log2(n: usize, rho: f64, eps: f64) -> Result<f64> {
    check_bound_args(n, rho, eps)?;
    Ok(net_bound_log2_ratio(n as f64, (rho / eps).log2()))
}

/// Same formula from `log₂(ρ/ε)` directly, for ratios beyond `f64` range.
pub(crate) fn net_bound_log2_ratio(n: f64, ratio_log2: f64) -> f64 {
    let poly = n * n.ln() + n * n.ln().ln() + 5.0 * n;
    std::f64::consts::LOG2_E + poly.log2() + n * ratio_log2
}

/// Coefficients `ν` expressing every row in the basis formed by `selected`:
/// row `j` equals `Σᵢ ν[(j,i)]·rows[selected[i]]` (least squares).
pub fn expansion_coefficients(rows: &[DVector<f64>], selected: &[usize]) -> DMatrix<f64> {
    if selected.is_empty() {
        return DMatrix::zeros(rows.len(), 0);
    }
    let dim = rows[0].len();
    let basis_t = DMatrix::from_fn(dim, selected.len(), |i, k| rows[selected[k]][i]);
    let svd = basis_t.svd(true, true);
    let mut nu = DMatrix::zeros(rows.len(), selected.len());
    for (j, r) in rows.iter().enumerate() {
        let c = svd.solve(r, 1e-13).expect("SVD with both factors");
        nu.row_mut(j).copy_from(&c.transpose());
    }
    nu
}

/// Rows of maximal Gram volume up to single swaps. Starts from a pivoted
/// basis and swaps a selected row for an outside row while that multiplies
/// the Gram determinant by more than `1 + 1e−12` (the factor is `ν²`).
pub fn max_volume_subsystem(rows: &[DVector<f64>]) -> Result<Vec<usize>> {
    if rows.is_empty() {
        return Err(Error::precondition("no rows to select from"));
    }
    let dim = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::Dimension { expected: dim, got: r.len() });
    }
    let mut sel = pivoted_basis(rows, 1e-10);
    if sel.is_empty() {
        return Ok(sel);
    }
    let threshold = 1.0 + 1e-12;
    // Each swap multiplies the volume by > 1, so no basis repeats.
    for _ in 0..10_000 {
        let nu = expansion_coefficients(rows, &sel);
        let mut best = (threshold, usize::MAX, usize::MAX);
        for j in 0..rows.len() {
            if sel.contains(&j) {
                continue;
            }
            for i in 0..sel.len() {
                let f = nu[(j, i)] * nu[(j, i)];
                if f > best.0 {
                    best = (f, i, j);
                }
            }
        }
        if best.1 == usize::MAX {
            return Ok(sel);
        }
        sel[best.1] = best.2;
    }
    Err(Error::NonConvergence {
        iterations: 10_000,
        detail: "max-volume exchange did not settle".into(),
    })
}

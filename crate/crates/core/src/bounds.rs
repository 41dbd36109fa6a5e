//! Log-domain counting bounds.
//!
//! If every member of a family with `N` distinct point sets factors through
//! a cone in `ℝⁿ` with normalization constant `f_C`, each set is identified
//! by `n+d` pairs from `{f : ‖f‖_∞ ≤ M} × Γ(n, ρ, ε)`, so
//! `N ≤ (|Γ| · |H_M|)^{n+d}`. Everything here is evaluated in `log₂`.
//!
//! Two right-hand sides are reported:
//! - `rhs_log2` keeps the net bound `e(n ln n + n ln ln n + 5n)(ρ/ε)ⁿ` as is;
//! - `chain_rhs_log2` uses the simplified closed form
//!   `((2M+1)^{d+1} · n² · (3(k+1)·M·‖v‖_∞·f_C²·n)ⁿ)^{n+d}`.
//!
//! The simplified form is smaller than the net bound whenever
//! `(4(n+d)/(3n))ⁿ` dominates, so `ruled_out` is decided by `rhs_log2`.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::encoding::RhoVariant;
use crate::error::{Error, Result};
use crate::net::net_bound_log2_ratio;
use crate::polytope::biguint_log2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: String,
    pub d: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    pub f_c: f64,
    pub rho_variant: RhoVariant,
    pub m_log2: f64,
    pub v_bound_log2: f64,
    pub rho_log2: f64,
    pub eps_log2: f64,
    /// `log₂` of the net cardinality bound at `(n, ρ, ε)`.
    pub gamma_log2: f64,
    /// `log₂ (2M+1)^{d+1}`.
    pub h_count_log2: f64,
    /// `(n+d)·(gamma_log2 + h_count_log2)`.
    pub rhs_log2: f64,
    pub chain_rhs_log2: f64,
    /// `log₂` of the number of distinct point sets in the family.
    pub lhs_log2: f64,
    pub ruled_out: bool,
    pub chain_ruled_out: bool,
}

/// `(n+d)·(gamma_log2 + h_count_log2)`.
pub fn counting_bound_log2(n: usize, d: usize, gamma_log2: f64, h_count_log2: f64) -> f64 {
    (n + d) as f64 * (gamma_log2 + h_count_log2)
}

/// `log₂(2^x + 1)` for any `x ≥ 0` without overflow.
fn log2_pow2_plus_one(x: f64) -> f64 {
    x + (-x).exp2().ln_1p() * std::f64::consts::LOG2_E
}

/// `log₂(2^k − 1)` computed as `k + log₂(1 − 2^{−k})`.
pub fn log2_pow2_minus_one(k: f64) -> f64 {
    k + (-(-k).exp2()).ln_1p() * std::f64::consts::LOG2_E
}

struct Inputs {
    family: &'static str,
    d: usize,
    n: usize,
    t: Option<u64>,
    f_c: f64,
    variant: RhoVariant,
    m_log2: f64,
    v_log2: f64,
    lhs_log2: f64,
}

fn evaluate(i: Inputs) -> Result<BoundReport> {
    if i.n < 3 {
        return Err(Error::precondition("the net bound needs n ≥ 3"));
    }
    if i.d < 2 {
        return Err(Error::precondition("d must be at least 2"));
    }
    if !(i.f_c > 0.0) || !i.f_c.is_finite() {
        return Err(Error::precondition("f_C must be positive"));
    }
    let (n, d) = (i.n as f64, i.d as f64);
    let k = i.variant.k(i.n, i.d) as f64;
    let f2_log2 = 2.0 * i.f_c.log2();
    let rho2_log2 = (k + 1.0).log2() + i.m_log2 + i.v_log2 + f2_log2;
    let rho_log2 = 0.5 * rho2_log2;
    let eps_log2 = -(2.0 + (n + d).log2() + rho_log2);
    let ratio_log2 = rho_log2 - eps_log2;
    if ratio_log2 < n.log2() {
        return Err(Error::precondition("ρ/ε below n"));
    }
    let gamma_log2 = net_bound_log2_ratio(n, ratio_log2);
    let h_count_log2 = (d + 1.0) * log2_pow2_plus_one(i.m_log2 + 1.0);
    let rhs_log2 = counting_bound_log2(i.n, i.d, gamma_log2, h_count_log2);
    let inner = 3f64.log2() + (k + 1.0).log2() + i.m_log2 + i.v_log2 + f2_log2 + n.log2();
    let chain_rhs_log2 = (n + d) * (h_count_log2 + 2.0 * n.log2() + n * inner);
    Ok(BoundReport {
        family: i.family.into(),
        d: i.d,
        n: i.n,
        t: i.t,
        f_c: i.f_c,
        rho_variant: i.variant,
        m_log2: i.m_log2,
        v_bound_log2: i.v_log2,
        rho_log2,
        eps_log2,
        gamma_log2,
        h_count_log2,
        rhs_log2,
        chain_rhs_log2,
        lhs_log2: i.lhs_log2,
        ruled_out: i.lhs_log2 > rhs_log2,
        chain_ruled_out: i.lhs_log2 > chain_rhs_log2,
    })
}

/// `log₂ M` for `M = 2^{d·log₂(2d)}`.
pub fn zero_one_m_log2(d: usize) -> f64 {
    d as f64 * (2.0 * d as f64).log2()
}

/// `log₂ M` for `M = ((d+1)t^d)^d`, with `M ≥ 1`.
pub fn cyclic_m_log2(d: usize, t: u64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let d = d as f64;
    (d * ((d + 1.0).log2() + d * (t as f64).log2())).max(0.0)
}

/// Counting bound for the 0/1 family in dimension `d`, whose `2^{2^d} − 1`
/// point sets must all factor through the cone.
pub fn zero_one_ruled_out(d: usize, n: usize, f_c: f64, variant: RhoVariant) -> Result<BoundReport> {
    if d > 1000 {
        return Err(Error::CapExceeded("d above 1000".into()));
    }
    evaluate(Inputs {
        family: "zero-one",
        d,
        n,
        t: None,
        f_c,
        variant,
        m_log2: zero_one_m_log2(d),
        v_log2: 0.0,
        lhs_log2: log2_pow2_minus_one((d as f64).exp2()),
    })
}

/// Counting bound for the cyclic family with `2^{t+1}` subsets of the
/// moment curve points `k = 0..=t`; `‖v‖_∞ ≤ t^{d−1}` enters `ρ`.
pub fn cyclic_ruled_out(d: usize, t: u64, n: usize, f_c: f64, variant: RhoVariant) -> Result<BoundReport> {
    let v_log2 = if t == 0 { 0.0 } else { (d as f64 - 1.0) * (t as f64).log2() };
    evaluate(Inputs {
        family: "cyclic",
        d,
        n,
        t: Some(t),
        f_c,
        variant,
        m_log2: cyclic_m_log2(d, t),
        v_log2,
        lhs_log2: t as f64 + 1.0,
    })
}

/// Exact value of the simplified chain for the 0/1 family with integer `f_C`.
pub fn zero_one_chain_exact(d: usize, n: usize, f_c: u64, variant: RhoVariant) -> BigUint {
    let m = crate::polytope::zero_one_m(d);
    let k = variant.k(n, d) as u64;
    let two_m1: BigUint = &m * 2u32 + 1u32;
    let nb = BigUint::from(n as u64);
    let inner = BigUint::from(3 * (k + 1)) * &m * BigUint::from(f_c).pow(2) * &nb;
    let base = two_m1.pow(d as u32 + 1) * nb.pow(2) * inner.pow(n as u32);
    base.pow((n + d) as u32)
}

/// `2^{2^d} − 1`.
pub fn zero_one_family_count(d: usize) -> BigUint {
    (BigUint::one() << (1usize << d)) - 1u32
}

/// `log₂` of a big integer.
pub fn big_log2(x: &BigUint) -> f64 {
    biguint_log2(x)
}

/// Smallest `d ≥ d_min` from which `ruled_out` holds for every `d ≤ d_max`,
/// or `None` if it fails at `d_max`.
pub fn zero_one_d_star(n: usize, f_c: f64, d_min: usize, d_max: usize, variant: RhoVariant) -> Result<Option<usize>> {
    let mut star = None;
    for d in (d_min..=d_max).rev() {
        if zero_one_ruled_out(d, n, f_c, variant)?.ruled_out {
            star = Some(d);
        } else {
            break;
        }
    }
    Ok(star)
}

/// Smallest `n ≥ 3` for which the 0/1 family of dimension `d` is no longer
/// ruled out at the given `f_C` (the bound is monotone in `n`).
pub fn zero_one_n_star(d: usize, f_c: f64, variant: RhoVariant) -> Result<usize> {
    let ruled = |n: usize| zero_one_ruled_out(d, n, f_c, variant).map(|r| r.ruled_out);
    if !ruled(3)? {
        return Ok(3);
    }
    let mut hi = 6;
    while ruled(hi)? {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::CapExceeded("threshold n beyond 2^40".into()));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ruled(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::net_cardinality_bound_log2;

    #[test]
    fn counting_example() {
        let b = counting_bound_log2(4, 3, 1000f64.log2(), 125f64.log2());
        assert!((b - 7.0 * 125000f64.log2()).abs() < 1e-9);
        assert!((b - 118.5).abs() < 0.1);
        assert!((counting_bound_log2(8, 6, 1.0, 2.0) - 2.0 * counting_bound_log2(4, 3, 1.0, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gamma_matches_net_bound() {
        let r = zero_one_ruled_out(3, 3, 1.0, RhoVariant::DPlusOne).unwrap();
        let rho = (4.0f64 * 216.0).sqrt();
        let eps = 1.0 / (4.0 * 6.0 * rho);
        let direct = net_cardinality_bound_log2(3, rho, eps).unwrap();
        assert!((r.gamma_log2 - direct).abs() < 1e-9);
    }

    /// Independent evaluation of the simplified chain straight from its
    /// displayed form, with `M = (2d)^d`.
    fn chain_oracle(d: f64, n: f64, f: f64) -> (f64, f64) {
        let m = d * (2.0 * d).log2();
        let two_m1 = m + 1.0; // 2M+1 ≈ 2M at these sizes
        let rhs = (n + d) * ((d + 1.0) * two_m1 + 2.0 * n.log2() + n * (3.0 * (d + 1.0) * f * f * n).log2() + n * m);
        (d.exp2(), rhs)
    }

    #[test]
    fn thresholds_at_twenty() {
        let r20 = zero_one_ruled_out(20, 100, 10.0, RhoVariant::DPlusOne).unwrap();
        let r21 = zero_one_ruled_out(21, 100, 10.0, RhoVariant::DPlusOne).unwrap();
        assert!(!r20.ruled_out && !r20.chain_ruled_out);
        assert!(r21.ruled_out && r21.chain_ruled_out);
        let (l20, c20) = chain_oracle(20.0, 100.0, 10.0);
        let (l21, c21) = chain_oracle(21.0, 100.0, 10.0);
        assert!((r20.chain_rhs_log2 - c20).abs() < 1e-6 * c20);
        assert!((r21.chain_rhs_log2 - c21).abs() < 1e-6 * c21);
        assert!((r20.lhs_log2 - l20).abs() < 1e-9 && (r21.lhs_log2 - l21).abs() < 1e-9);
        assert!(c20 > 1.7e6 && c20 < 1.9e6 && c21 > 1.8e6 && c21 < 2.0e6);
    }

    #[test]
    fn exact_chain_agrees() {
        for d in 2..=6 {
            for n in [3, 5, 12] {
                let r = zero_one_ruled_out(d, n, 10.0, RhoVariant::DPlusOne).unwrap();
                let exact = big_log2(&zero_one_chain_exact(d, n, 10, RhoVariant::DPlusOne));
                assert!((r.chain_rhs_log2 - exact).abs() <= 1e-12 * exact, "d={d} n={n}");
                let lhs = big_log2(&zero_one_family_count(d));
                assert!((r.lhs_log2 - lhs).abs() <= 1e-12 * lhs);
            }
        }
    }

    #[test]
    fn monotone_in_n() {
        for d in [10, 20, 25] {
            let mut seen_false = false;
            for n in (3..400).step_by(7) {
                let r = zero_one_ruled_out(d, n, 10.0, RhoVariant::DPlusOne).unwrap();
                if seen_false {
                    assert!(!r.ruled_out);
                }
                seen_false |= !r.ruled_out;
            }
        }
    }

    #[test]
    fn cyclic_edge_cases() {
        let r = cyclic_ruled_out(3, 0, 5, 2.0, RhoVariant::DPlusOne).unwrap();
        assert!(!r.ruled_out);
        let r = cyclic_ruled_out(2, 1_000_000, 10, 2.0, RhoVariant::DPlusOne).unwrap();
        assert!(r.rhs_log2.is_finite() && r.lhs_log2 == 1_000_001.0);
        let mut seen = false;
        for t in (0..200_000).step_by(997) {
            let r = cyclic_ruled_out(3, t, 20, 5.0, RhoVariant::DPlusOne).unwrap();
            if seen {
                assert!(r.ruled_out, "t = {t}");
            }
            seen |= r.ruled_out;
        }
        assert!(seen);
    }

    #[test]
    fn n_star_threshold() {
        let n = zero_one_n_star(24, 10.0, RhoVariant::DPlusOne).unwrap();
        assert!(zero_one_ruled_out(24, n - 1, 10.0, RhoVariant::DPlusOne).unwrap().ruled_out);
        assert!(!zero_one_ruled_out(24, n, 10.0, RhoVariant::DPlusOne).unwrap().ruled_out);
    }
}

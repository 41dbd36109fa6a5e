//! Recovery of the linear maps behind an inner-product preserving pairing,
//! sample-based automorphism checks, and the half-cone counterexample.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{sample_point, ConeDescriptor};
use crate::error::{Error, Result};

/// Linear maps `g(a) = G a` and `q(b) = Q b` recovered from paired sets.
#[derive(Debug, Clone)]
pub struct RecoveredMaps {
    pub g: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// Members of `A` whose rows form `R`.
    pub a_basis: Vec<usize>,
    /// Members of `B` whose rows form `L`.
    pub b_basis: Vec<usize>,
    /// Largest of `‖G a − ã‖` and `‖Q b − b̃‖` over the inputs.
    pub consistency_residual: f64,
}

/// Greedy pivoted selection of a basis: repeatedly take the vector with the
/// largest component orthogonal to the span chosen so far.
pub(crate) fn pivoted_basis(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<usize> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut residual: Vec<DVector<f64>> = vectors.to_vec();
    let mut chosen = Vec::new();
    let dim = vectors[0].len();
    while chosen.len() < dim {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.norm()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || norm <= rel_tol * scale {
            break;
        }
        chosen.push(best);
        let q = &residual[best] / norm;
        for r in residual.iter_mut() {
            let c = q.dot(r);
            r.axpy(-c, &q, 1.0);
        }
    }
    chosen
}

fn rows(vectors: &[DVector<f64>], idx: &[usize]) -> DMatrix<f64> {
    let n = vectors[0].len();
    DMatrix::from_fn(idx.len(), n, |i, j| vectors[idx[i]][j])
}

fn check_lengths(name: &str, x: &[DVector<f64>], y: &[DVector<f64>], n: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::precondition(format!("{name} and its image have different sizes")));
    }
    for v in x.iter().chain(y) {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
    }
    Ok(())
}

/// Recovers `G = L̃⁻¹L` and `Q = R̃⁻¹R`, where `L`, `L̃` stack a basis of `B`
/// and its images and `R`, `R̃` a basis of `A` and its images.
pub fn recover_linear_maps(
    a: &[DVector<f64>],
    a_img: &[DVector<f64>],
    b: &[DVector<f64>],
    b_img: &[DVector<f64>],
) -> Result<RecoveredMaps> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::RankDeficient { rank: 0, required: a.first().or(b.first()).map_or(1, |v| v.len()) });
    }
    let n = a[0].len();
    check_lengths("A", a, a_img, n)?;
    check_lengths("B", b, b_img, n)?;

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (x, xi) in a.iter().zip(a_img) {
        for (y, yi) in b.iter().zip(b_img) {
            let p = x.dot(y);
            scale = scale.max(p.abs());
            worst = worst.max((p - xi.dot(yi)).abs());
        }
    }
    if worst > 1e-9 * (1.0 + scale) {
        return Err(Error::Inconsistent { max_violation: worst });
    }

    let ia = pivoted_basis(a, 1e-10);
    if ia.len() < n {
        return Err(Error::RankDeficient { rank: ia.len(), required: n });
    }
    let ib = pivoted_basis(b, 1e-10);
    if ib.len() < n {
        return Err(Error::RankDeficient { rank: ib.len(), required: n });
    }
    let (r, r_img) = (rows(a, &ia), rows(a_img, &ia));
    let (l, l_img) = (rows(b, &ib), rows(b_img, &ib));
    let g = l_img
        .lu()
        .solve(&l)
        .ok_or_else(|| Error::Numerical("image of the B basis is singular".into()))?;
    let q = r_img
        .lu()
        .solve(&r)
        .ok_or_else(|| Error::Numerical("image of the A basis is singular".into()))?;

    let mut residual = 0.0f64;
    for (x, xi) in a.iter().zip(a_img) {
        residual = residual.max((&g * x - xi).norm());
    }
    for (y, yi) in b.iter().zip(b_img) {
        residual = residual.max((&q * y - yi).norm());
    }
    Ok(RecoveredMaps {
        g,
        q,
        a_basis: ia,
        b_basis: ib,
        consistency_residual: residual,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismReport {
    pub forward_ok: bool,
    pub inverse_ok: bool,
    /// Smallest cone margin of an image, relative to the image norm.
    pub worst_margin: f64,
    pub samples: usize,
}

/// Checks on sampled boundary and interior points whether `G` and `G⁻¹`
/// map the cone into itself.
pub fn verify_automorphism<R: Rng + ?Sized>(
    cone: &ConeDescriptor,
    g: &DMatrix<f64>,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AutomorphismReport> {
    let n = cone.dim();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::Dimension { expected: n, got: g.nrows() });
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::precondition("matrix is singular"))?;
    let (mut forward_ok, mut inverse_ok) = (true, true);
    let mut worst = f64::INFINITY;
    for k in 0..n_samples {
        let x = sample_point(cone, rng, k % 2 == 0);
        for (map, ok) in [(g, &mut forward_ok), (&g_inv, &mut inverse_ok)] {
            let y = map * &x;
            let m = cone.margin(&y)? / y.norm().max(1e-300);
            worst = worst.min(m);
            if m < -tol {
                *ok = false;
            }
        }
    }
    Ok(AutomorphismReport {
        forward_ok,
        inverse_ok,
        worst_margin: worst,
        samples: n_samples,
    })
}

/// The two automorphism families of the half second-order cone at `α = 1`,
/// paired with the matching dual-cone maps.
pub fn halfsoc3_family(family: usize, beta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = (beta * beta + 1.0).sqrt();
    match family {
        0 => (
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, beta, 0.0, beta, c]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -beta, 0.0, -beta, c]),
        ),
        _ => (
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -c, -beta, 0.0, beta, c]),
            // inverse-adjoint of the map above
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -c, beta, 0.0, -beta, c]),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMinimum {
    pub family: usize,
    pub beta: f64,
    pub alpha: f64,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    #[serde(rename = "M")]
    pub m: f64,
    pub beta_range: (f64, f64),
    pub grid_size: usize,
    /// Minimum over the grid of `max(‖g(a)‖, ‖q(b)‖)` at the balancing `α`.
    pub minima: Vec<FamilyMinimum>,
    pub lower_bound: f64,
    pub delta: f64,
    /// Largest relative gap between `‖g(a)‖·‖q(b)‖` and `M²(2+2β²)` on the grid.
    pub identity_max_error: f64,
    /// Whether every grid value is at least `√2·M` up to `1e−9·M`.
    pub certified: bool,
}

/// Scans `β` for both families with `A = {(M,0,M)}` and `B = {(−M,0,M)}`.
/// For each `β`, the `α` balancing `‖g(a)‖ = ‖q(b)‖` is optimal since the
/// two norms scale as `α` and `1/α`.
pub fn counterexample_search(m: f64, beta_range: (f64, f64), grid_size: usize) -> Result<CounterexampleRecord> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::precondition("M must be positive"));
    }
    if grid_size == 0 || !(beta_range.0 <= beta_range.1) {
        return Err(Error::precondition("empty β grid"));
    }
    let a = DVector::from_row_slice(&[m, 0.0, m]);
    let b = DVector::from_row_slice(&[-m, 0.0, m]);
    let delta = a.dot(&b);
    let lower = std::f64::consts::SQRT_2 * m;
    let mut minima = Vec::new();
    let mut identity_err = 0.0f64;
    let mut certified = true;
    for family in 0..2 {
        let mut best: Option<FamilyMinimum> = None;
        for k in 0..grid_size {
            let beta = if grid_size == 1 {
                beta_range.0
            } else {
                beta_range.0 + (beta_range.1 - beta_range.0) * k as f64 / (grid_size - 1) as f64
            };
            let (g, q) = halfsoc3_family(family, beta);
            let (ga, qb) = ((&g * &a).norm(), (&q * &b).norm());
            let alpha = (qb / ga).sqrt();
            let max_norm = (alpha * ga).max(qb / alpha);
            let product = m * m * (2.0 + 2.0 * beta * beta);
            identity_err = identity_err.max((ga * qb - product).abs() / product);
            if max_norm < lower - 1e-9 * m {
                certified = false;
            }
            if best.as_ref().map_or(true, |b| max_norm < b.max_norm) {
                best = Some(FamilyMinimum { family, beta, alpha, max_norm });
            }
        }
        minima.extend(best);
    }
    Ok(CounterexampleRecord {
        m,
        beta_range,
        grid_size,
        minima,
        lower_bound: lower,
        delta,
        identity_max_error: identity_err,
        certified: certified && delta == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn diagonal_recovery() {
        let e = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let a_img = vec![v(&[2.0, 0.0]), v(&[0.0, 0.5])];
        let b_img = vec![v(&[0.5, 0.0]), v(&[0.0, 2.0])];
        let r = recover_linear_maps(&e, &a_img, &e, &b_img).unwrap();
        assert!((r.g.clone() - DMatrix::from_diagonal(&v(&[2.0, 0.5]))).norm() < 1e-14);
        assert!((r.q.clone() - DMatrix::from_diagonal(&v(&[0.5, 2.0]))).norm() < 1e-14);
    }

    #[test]
    fn round_trip_recovers_random_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            let g0 = DMatrix::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
            let g0_it = g0.clone().try_inverse().unwrap().transpose();
            let a: Vec<_> = (0..n + 3).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let b: Vec<_> = (0..n + 2).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let ai: Vec<_> = a.iter().map(|x| &g0 * x).collect();
            let bi: Vec<_> = b.iter().map(|x| &g0_it * x).collect();
            let r = recover_linear_maps(&a, &ai, &b, &bi).unwrap();
            assert!((&r.g - &g0).norm() <= 1e-10 * g0.norm());
            assert!((&r.q - &g0_it).norm() <= 1e-10 * g0_it.norm());
        }
    }

    #[test]
    fn hyperplane_is_rank_deficient() {
        let a = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[1.0, 1.0, 0.0])];
        let b = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        match recover_linear_maps(&a, &a, &b, &b) {
            Err(Error::RankDeficient { rank: 2, required: 3 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn broken_pairing_is_inconsistent() {
        let e = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let img = vec![v(&[2.0, 0.0]), v(&[0.0, 1.0])];
        assert!(matches!(recover_linear_maps(&e, &img, &e, &e), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn automorphism_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let r = verify_automorphism(&ConeDescriptor::orthant(3), &perm, 200, 1e-12, &mut rng).unwrap();
        assert!(r.forward_ok && r.inverse_ok);

        let (s, c) = (0.5f64, 3f64.sqrt() / 2.0);
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let r = verify_automorphism(&ConeDescriptor::orthant(2), &rot, 200, 1e-12, &mut rng).unwrap();
        assert!(!r.forward_ok && !r.inverse_ok);

        let (g, _) = halfsoc3_family(0, 1.0);
        let r = verify_automorphism(&ConeDescriptor::second_order(3), &g, 10_000, 1e-12, &mut rng).unwrap();
        assert!(r.forward_ok && r.inverse_ok, "{r:?}");
    }

    #[test]
    fn families_preserve_half_cone_and_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for family in 0..2 {
            for beta in [-2.0, 0.0, 0.7] {
                let (g, q) = halfsoc3_family(family, beta);
                let r = verify_automorphism(&ConeDescriptor::half_soc3(), &g, 500, 1e-12, &mut rng).unwrap();
                assert!(r.forward_ok && r.inverse_ok);
                // q is the inverse-adjoint of g
                let gt_q = g.transpose() * &q;
                assert!((gt_q - DMatrix::identity(3, 3)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn counterexample_minimum() {
        for m in [1.0, 10.0, 100.0] {
            let rec = counterexample_search(m, (-10.0, 10.0), 4001).unwrap();
            assert!(rec.certified);
            assert_eq!(rec.delta, 0.0);
            for f in &rec.minima {
                assert_eq!(f.beta, 0.0);
                assert!((f.alpha - 1.0).abs() < 1e-12);
                assert!((f.max_norm - std::f64::consts::SQRT_2 * m).abs() <= 1e-12 * m);
            }
            assert!(rec.identity_max_error < 1e-12);
        }
    }
}

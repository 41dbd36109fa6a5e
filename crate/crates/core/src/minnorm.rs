//! Wolfe's minimum-norm-point algorithm over the convex hull of finitely
//! many points.

use nalgebra::{DMatrix, DVector};

/// Returns simplex weights `z` minimizing `‖Σ zⱼ pⱼ‖` together with that norm.
pub(crate) fn min_norm_point(points: &[DVector<f64>]) -> (Vec<f64>, f64) {
    let m = points.len();
    assert!(m > 0, "min_norm_point needs at least one point");
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-15;

    let start = (0..m)
        .min_by(|&i, &j| points[i].norm_squared().total_cmp(&points[j].norm_squared()))
        .unwrap();
    let mut corral = vec![start];
    let mut w = vec![0.0; m];
    w[start] = 1.0;
    let mut x = points[start].clone();

    for _major in 0..(50 * m + 100) {
        let (j, best) = (0..m)
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - best <= 1e-13 * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        loop {
            let v = affine_minimizer(points, &corral);
            if v.iter().all(|&t| t > eps) {
                for (k, &idx) in corral.iter().enumerate() {
                    w[idx] = v[k];
                }
                break;
            }
            let mut theta = 1.0f64;
            for (k, &idx) in corral.iter().enumerate() {
                if v[k] <= eps && w[idx] - v[k] > 0.0 {
                    theta = theta.min(w[idx] / (w[idx] - v[k]));
                }
            }
            for (k, &idx) in corral.iter().enumerate() {
                w[idx] += theta * (v[k] - w[idx]);
            }
            corral.retain(|&idx| {
                if w[idx] <= eps {
                    w[idx] = 0.0;
                    false
                } else {
                    true
                }
            });
            if corral.is_empty() {
                corral.push(j);
                w[j] = 1.0;
                break;
            }
        }
        let total: f64 = corral.iter().map(|&i| w[i]).sum();
        for &i in &corral {
            w[i] /= total;
        }
        x = corral.iter().fold(DVector::zeros(x.len()), |acc, &i| acc + &points[i] * w[i]);
    }
    let norm = x.norm();
    (w, norm)
}

/// Minimizer of `‖Σ vₖ p_{S(k)}‖` subject to `Σ vₖ = 1` (no sign constraint).
fn affine_minimizer(points: &[DVector<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            kkt[(a, b)] = points[corral[a]].dot(&points[corral[b]]);
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            kkt.svd(true, true)
                .solve(&rhs, 1e-14)
                .expect("SVD solve with both factors computed")
        });
    sol.rows(0, k).iter().copied().collect()
}

//! Self-scaled barriers for symmetric cones and their derivatives.
//!
//! Block barriers: `−Σ log xᵢ` on the orthant, `−log(x_n² − ‖x̃‖²)` on the
//! second-order cone and `−log det X` on the PSD cone. A product cone uses the
//! sum of block barriers, so the barrier parameter adds up.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::cone::{smat_unchecked, svec_unchecked, BlockKind, BlockSlice, ConeDescriptor};
use crate::error::{Error, Result};

/// Relative eigenvalue floor used for PSD matrix functions.
const EIGEN_FLOOR: f64 = 1e-14;

/// Barrier parameter ϑ, the Carathéodory number of the cone.
pub fn theta(cone: &ConeDescriptor) -> Result<usize> {
    cone.blocks()
        .iter()
        .map(|b| match *b {
            BlockKind::Orthant { dim } => Ok(dim),
            BlockKind::SecondOrder { .. } => Ok(2),
            BlockKind::Psd { side } => Ok(side),
            BlockKind::HalfSoc3 => Err(Error::Unsupported(
                "the half second-order cone has no self-scaled barrier".into(),
            )),
        })
        .sum()
}

#[derive(Debug, Clone)]
enum BlockData {
    Orthant {
        x: DVector<f64>,
    },
    /// `s = x_n² − ‖x̃‖²`, `jx = (−x̃, x_n)`.
    Soc {
        x: DVector<f64>,
        jx: DVector<f64>,
        s: f64,
    },
    Psd {
        side: usize,
        inv: DMatrix<f64>,
        eig: SymmetricEigen<f64, nalgebra::Dyn>,
    },
}

/// An interior point together with the per-block factorizations needed to
/// evaluate barrier derivatives.
#[derive(Debug, Clone)]
pub struct BarrierPoint {
    cone: ConeDescriptor,
    x: DVector<f64>,
    blocks: Vec<(BlockSlice, BlockData)>,
}

impl BarrierPoint {
    pub fn new(cone: &ConeDescriptor, x: &DVector<f64>) -> Result<Self> {
        cone.check_dim(x)?;
        Self::try_new(cone, x).ok_or_else(|| Error::precondition("barrier point is not strictly interior"))
    }

    /// `None` when `x` is not strictly inside the cone (or the cone has no
    /// self-scaled barrier).
    pub fn try_new(cone: &ConeDescriptor, x: &DVector<f64>) -> Option<Self> {
        if x.len() != cone.dim() || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut blocks = Vec::with_capacity(cone.blocks().len());
        for (b, s) in cone.blocks().iter().zip(cone.slices()) {
            let v = x.rows(s.offset, s.len).into_owned();
            let data = match *b {
                BlockKind::Orthant { .. } => {
                    if v.iter().any(|&t| t <= 0.0) {
                        return None;
                    }
                    BlockData::Orthant { x: v }
                }
                BlockKind::SecondOrder { dim } => {
                    let axis = v[dim - 1];
                    let rest2: f64 = v.rows(0, dim - 1).norm_squared();
                    let s = (axis - rest2.sqrt()) * (axis + rest2.sqrt());
                    if axis <= 0.0 || s <= 0.0 {
                        return None;
                    }
                    let mut jx = -v.clone();
                    jx[dim - 1] = axis;
                    BlockData::Soc { x: v, jx, s }
                }
                BlockKind::Psd { side } => {
                    let m = smat_unchecked(v.as_slice(), side);
                    let eig = SymmetricEigen::new(m);
                    let lmax = eig.eigenvalues.max();
                    if eig.eigenvalues.min() <= EIGEN_FLOOR * lmax.max(0.0) || lmax <= 0.0 {
                        return None;
                    }
                    let inv = eig_apply(&eig, |l| 1.0 / l);
                    BlockData::Psd { side, inv, eig }
                }
                BlockKind::HalfSoc3 => return None,
            };
            blocks.push((s, data));
        }
        Some(Self {
            cone: cone.clone(),
            x: x.clone(),
            blocks,
        })
    }

    pub fn cone(&self) -> &ConeDescriptor {
        &self.cone
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn theta(&self) -> usize {
        theta(&self.cone).expect("barrier points only exist on symmetric cones")
    }

    pub fn value(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(_, d)| match d {
                BlockData::Orthant { x } => -x.iter().map(|t| t.ln()).sum::<f64>(),
                BlockData::Soc { s, .. } => -s.ln(),
                BlockData::Psd { eig, .. } => -eig.eigenvalues.iter().map(|l| l.ln()).sum::<f64>(),
            })
            .sum()
    }

    /// `−∇F(x)`, which lies in the interior of the dual cone.
    pub fn neg_gradient(&self) -> DVector<f64> {
        let mut g = DVector::zeros(self.x.len());
        for (s, d) in &self.blocks {
            let mut out = g.rows_mut(s.offset, s.len);
            match d {
                BlockData::Orthant { x } => out.copy_from(&x.map(|t| 1.0 / t)),
                BlockData::Soc { jx, s: r, .. } => out.copy_from(&(jx * (2.0 / r))),
                BlockData::Psd { inv, .. } => out.copy_from(&svec_unchecked(inv)),
            }
        }
        g
    }

    pub fn gradient(&self) -> DVector<f64> {
        -self.neg_gradient()
    }

    /// `∇²F(x) h`.
    pub fn hessian_apply(&self, h: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(h.len());
        for (s, d) in &self.blocks {
            let hb = h.rows(s.offset, s.len);
            let mut o = out.rows_mut(s.offset, s.len);
            match d {
                BlockData::Orthant { x } => {
                    for i in 0..s.len {
                        o[i] = hb[i] / (x[i] * x[i]);
                    }
                }
                BlockData::Soc { jx, s: r, .. } => {
                    // ∇²F = −(2/s) J + (4/s²) (Jx)(Jx)ᵀ
                    let n = s.len;
                    let c = 4.0 * jx.dot(&hb) / (r * r);
                    for i in 0..n {
                        let jh = if i + 1 == n { hb[i] } else { -hb[i] };
                        o[i] = -2.0 / r * jh + c * jx[i];
                    }
                }
                BlockData::Psd { side, inv, .. } => {
                    let hm = smat_unchecked(hb.as_slice(), *side);
                    o.copy_from(&svec_unchecked(&(inv * hm * inv)));
                }
            }
        }
        out
    }

    /// `[∇²F(x)]⁻¹ h`.
    pub fn hessian_inverse_apply(&self, h: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(h.len());
        for (s, d) in &self.blocks {
            let hb = h.rows(s.offset, s.len);
            let mut o = out.rows_mut(s.offset, s.len);
            match d {
                BlockData::Orthant { x } => {
                    for i in 0..s.len {
                        o[i] = hb[i] * x[i] * x[i];
                    }
                }
                BlockData::Soc { x, s: r, .. } => {
                    // [∇²F]⁻¹ = x xᵀ − (s/2) J
                    let n = s.len;
                    let c = x.dot(&hb);
                    for i in 0..n {
                        let jh = if i + 1 == n { hb[i] } else { -hb[i] };
                        o[i] = c * x[i] - 0.5 * r * jh;
                    }
                }
                BlockData::Psd { side, eig, .. } => {
                    let xm = eig_apply(eig, |l| l);
                    let hm = smat_unchecked(hb.as_slice(), *side);
                    o.copy_from(&svec_unchecked(&(&xm * hm * &xm)));
                }
            }
        }
        out
    }

    /// Dense Hessian matrix (block diagonal).
    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        let n = self.x.len();
        let mut m = DMatrix::zeros(n, n);
        for (s, d) in &self.blocks {
            let block = self.block_hessian(s, d);
            m.view_mut((s.offset, s.offset), (s.len, s.len)).copy_from(&block);
        }
        m
    }

    fn block_hessian(&self, s: &BlockSlice, d: &BlockData) -> DMatrix<f64> {
        match d {
            BlockData::Orthant { x } => DMatrix::from_diagonal(&x.map(|t| 1.0 / (t * t))),
            BlockData::Soc { jx, s: r, .. } => {
                let mut m = jx * jx.transpose() * (4.0 / (r * r));
                for i in 0..s.len {
                    let j = if i + 1 == s.len { 1.0 } else { -1.0 };
                    m[(i, i)] -= 2.0 / r * j;
                }
                m
            }
            BlockData::Psd { side, inv, .. } => {
                let mut m = DMatrix::zeros(s.len, s.len);
                for j in 0..s.len {
                    let mut e = vec![0.0; s.len];
                    e[j] = 1.0;
                    let em = smat_unchecked(&e, *side);
                    m.set_column(j, &svec_unchecked(&(inv * em * inv)));
                }
                m
            }
        }
    }

    /// Hessian square root `[∇²F(x)]^{1/2}` as a block-structured operator.
    pub fn hessian_sqrt(&self) -> Result<ScalingOperator> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (s, d) in &self.blocks {
            let op = match d {
                BlockData::Orthant { x } => ScalingBlock::Diagonal(x.map(|t| 1.0 / t)),
                BlockData::Soc { .. } => {
                    let h = self.block_hessian(s, d);
                    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or_else(|| {
                        Error::Numerical(format!("eigendecomposition of second-order block {} failed", s.index))
                    })?;
                    if eig.eigenvalues.min() <= 0.0 {
                        return Err(Error::Numerical(format!(
                            "second-order Hessian block {} not positive definite (min eigenvalue {:e})",
                            s.index,
                            eig.eigenvalues.min()
                        )));
                    }
                    ScalingBlock::Dense {
                        forward: eig_apply(&eig, f64::sqrt),
                        inverse: eig_apply(&eig, |l| 1.0 / l.sqrt()),
                    }
                }
                BlockData::Psd { side, eig, .. } => ScalingBlock::Congruence {
                    side: *side,
                    forward: eig_apply(eig, |l| 1.0 / l.sqrt()),
                    inverse: eig_apply(eig, f64::sqrt),
                },
            };
            blocks.push((*s, op));
        }
        Ok(ScalingOperator {
            dim: self.x.len(),
            blocks,
        })
    }

    /// Gradient in `w` of `⟨−∇F(w), a⟩`, i.e. `−∇²F(w) a`.
    pub fn pairing_gradient(&self, a: &DVector<f64>) -> DVector<f64> {
        -self.hessian_apply(a)
    }

    /// Hessian in `w` of `⟨−∇F(w), a⟩` (a third derivative of `F`).
    /// Positive semidefinite for `a` in the cone.
    pub fn pairing_hessian(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let n = self.x.len();
        let mut m = DMatrix::zeros(n, n);
        for (s, d) in &self.blocks {
            let ab = a.rows(s.offset, s.len);
            let block = match d {
                BlockData::Orthant { x } => {
                    DMatrix::from_fn(s.len, s.len, |i, j| if i == j { 2.0 * ab[i] / x[i].powi(3) } else { 0.0 })
                }
                BlockData::Soc { x, jx, s: r } => {
                    let len = s.len;
                    let mut p = -ab.into_owned();
                    p[len - 1] = ab[len - 1];
                    let pw = p.dot(x);
                    let u = jx;
                    let mut h = (&p * u.transpose() + u * p.transpose()) * (-4.0 / (r * r));
                    h += u * u.transpose() * (16.0 * pw / r.powi(3));
                    for i in 0..len {
                        let j = if i + 1 == len { 1.0 } else { -1.0 };
                        h[(i, i)] -= 4.0 * pw / (r * r) * j;
                    }
                    h
                }
                BlockData::Psd { side, inv, .. } => {
                    let am = smat_unchecked(ab.as_slice(), *side);
                    let xax = inv * am * inv;
                    let mut h = DMatrix::zeros(s.len, s.len);
                    for j in 0..s.len {
                        let mut e = vec![0.0; s.len];
                        e[j] = 1.0;
                        let em = smat_unchecked(&e, *side);
                        let col = inv * &em * &xax + &xax * &em * inv;
                        h.set_column(j, &svec_unchecked(&col));
                    }
                    h
                }
            };
            m.view_mut((s.offset, s.offset), (s.len, s.len)).copy_from(&block);
        }
        m
    }

    /// Applies `x ↦ −∇F(x)` twice. For self-scaled barriers the map is an
    /// involution between the cone and its (identical) dual, so the result
    /// reproduces `x`.
    pub fn conjugate_gradient_map(&self) -> Result<DVector<f64>> {
        let y = self.neg_gradient();
        let q = BarrierPoint::new(&self.cone, &y)?;
        Ok(q.neg_gradient())
    }
}

fn eig_apply(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    v * d * v.transpose()
}

#[derive(Debug, Clone)]
enum ScalingBlock {
    Diagonal(DVector<f64>),
    Dense {
        forward: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
    /// `H ↦ P H P` with `P` symmetric.
    Congruence {
        side: usize,
        forward: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
}

/// Block-structured self-adjoint linear map, e.g. a Hessian square root.
#[derive(Debug, Clone)]
pub struct ScalingOperator {
    dim: usize,
    blocks: Vec<(BlockSlice, ScalingBlock)>,
}

impl ScalingOperator {
    /// `x ↦ c·x` on every block.
    pub fn scalar(cone: &ConeDescriptor, c: f64) -> Self {
        let blocks = cone
            .slices()
            .into_iter()
            .map(|s| (s, ScalingBlock::Diagonal(DVector::from_element(s.len, c))))
            .collect();
        Self {
            dim: cone.dim(),
            blocks,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, h: &DVector<f64>) -> DVector<f64> {
        self.apply_with(h, false)
    }

    pub fn apply_inverse(&self, h: &DVector<f64>) -> DVector<f64> {
        self.apply_with(h, true)
    }

    /// The operator is self-adjoint under the ambient inner product.
    pub fn apply_adjoint(&self, h: &DVector<f64>) -> DVector<f64> {
        self.apply(h)
    }

    fn apply_with(&self, h: &DVector<f64>, inverse: bool) -> DVector<f64> {
        let mut out = DVector::zeros(h.len());
        for (s, b) in &self.blocks {
            let hb = h.rows(s.offset, s.len);
            let mut o = out.rows_mut(s.offset, s.len);
            match b {
                ScalingBlock::Diagonal(d) => {
                    for i in 0..s.len {
                        o[i] = if inverse { hb[i] / d[i] } else { hb[i] * d[i] };
                    }
                }
                ScalingBlock::Dense { forward, inverse: inv } => {
                    let m = if inverse { inv } else { forward };
                    o.copy_from(&(m * hb));
                }
                ScalingBlock::Congruence { side, forward, inverse: inv } => {
                    let p = if inverse { inv } else { forward };
                    let hm = smat_unchecked(hb.as_slice(), *side);
                    o.copy_from(&svec_unchecked(&(p * hm * p)));
                }
            }
        }
        out
    }

    /// Dense matrix of the operator in ambient coordinates.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.matrix_with(false)
    }

    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        self.matrix_with(true)
    }

    fn matrix_with(&self, inverse: bool) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[j] = 1.0;
            m.set_column(j, &self.apply_with(&e, inverse));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::svec;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn diag_svec(d: &[f64]) -> DVector<f64> {
        svec(&DMatrix::from_diagonal(&v(d)), 0.0).unwrap()
    }

    fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(&ConeDescriptor::orthant(5)).unwrap(), 5);
        assert_eq!(theta(&ConeDescriptor::second_order(9)).unwrap(), 2);
        let c = ConeDescriptor::new(vec![BlockKind::Orthant { dim: 2 }, BlockKind::Psd { side: 3 }]).unwrap();
        assert_eq!(theta(&c).unwrap(), 5);
        assert!(matches!(theta(&ConeDescriptor::half_soc3()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn value_examples() {
        let p = BarrierPoint::new(&ConeDescriptor::orthant(3), &v(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(p.value(), 0.0);
        let p = BarrierPoint::new(&ConeDescriptor::second_order(3), &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.value(), 0.0);
        let p = BarrierPoint::new(&ConeDescriptor::psd(2), &diag_svec(&[2.0, 0.5])).unwrap();
        assert!(p.value().abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let p = BarrierPoint::new(&ConeDescriptor::orthant(2), &v(&[2.0, 4.0])).unwrap();
        assert_eq!(p.neg_gradient(), v(&[0.5, 0.25]));
        let p = BarrierPoint::new(&ConeDescriptor::second_order(3), &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.neg_gradient(), v(&[0.0, 0.0, 2.0]));
        assert_eq!(p.neg_gradient().dot(p.point()), 2.0);
        let p = BarrierPoint::new(&ConeDescriptor::psd(2), &diag_svec(&[2.0, 1.0])).unwrap();
        assert!(close(&p.neg_gradient(), &diag_svec(&[0.5, 1.0]), 1e-15));
    }

    #[test]
    fn hessian_examples() {
        let p = BarrierPoint::new(&ConeDescriptor::orthant(2), &v(&[2.0, 1.0])).unwrap();
        assert_eq!(p.hessian_apply(&v(&[4.0, 1.0])), v(&[1.0, 1.0]));
        let p = BarrierPoint::new(&ConeDescriptor::psd(2), &diag_svec(&[2.0, 1.0])).unwrap();
        let h = p.hessian_apply(&diag_svec(&[1.0, 1.0]));
        assert!(close(&h, &diag_svec(&[0.25, 1.0]), 1e-14));
        let back = p.hessian_inverse_apply(&h);
        assert!(close(&back, &diag_svec(&[1.0, 1.0]), 1e-14));
    }

    #[test]
    fn hessian_sqrt_examples() {
        let p = BarrierPoint::new(&ConeDescriptor::orthant(2), &v(&[2.0, 1.0])).unwrap();
        let l = p.hessian_sqrt().unwrap();
        assert_eq!(l.to_matrix(), DMatrix::from_diagonal(&v(&[0.5, 1.0])));
        let h = v(&[3.0, -2.0]);
        assert_eq!(l.apply(&l.apply(&h)), v(&[0.75, -2.0]));

        let p = BarrierPoint::new(&ConeDescriptor::psd(2), &diag_svec(&[4.0, 1.0])).unwrap();
        let l = p.hessian_sqrt().unwrap();
        // congruence by diag(1/2, 1)
        let x = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]), 0.0).unwrap();
        let expect = svec(&DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.5, 1.0]), 0.0).unwrap();
        assert!(close(&l.apply(&x), &expect, 1e-14));
    }

    #[test]
    fn conjugate_map_example() {
        let p = BarrierPoint::new(&ConeDescriptor::second_order(3), &v(&[1.0, 0.0, 2.0])).unwrap();
        assert!(close(&p.neg_gradient(), &v(&[-2.0 / 3.0, 0.0, 4.0 / 3.0]), 1e-15));
        assert!(close(&p.conjugate_gradient_map().unwrap(), &v(&[1.0, 0.0, 2.0]), 1e-14));
        let p = BarrierPoint::new(&ConeDescriptor::orthant(3), &v(&[0.5, 2.0, 8.0])).unwrap();
        assert_eq!(p.conjugate_gradient_map().unwrap(), v(&[0.5, 2.0, 8.0]));
    }

    #[test]
    fn boundary_points_rejected() {
        assert!(BarrierPoint::new(&ConeDescriptor::second_order(3), &v(&[1.0, 0.0, 1.0])).is_err());
        assert!(BarrierPoint::new(&ConeDescriptor::orthant(2), &v(&[1.0, 0.0])).is_err());
        assert!(BarrierPoint::new(&ConeDescriptor::half_soc3(), &v(&[0.5, 0.0, 1.0])).is_err());
        assert!(BarrierPoint::new(&ConeDescriptor::orthant(2), &v(&[1.0])).is_err());
    }

    #[test]
    fn dense_hessian_matches_apply() {
        let c = ConeDescriptor::new(vec![
            BlockKind::Orthant { dim: 2 },
            BlockKind::SecondOrder { dim: 3 },
            BlockKind::Psd { side: 2 },
        ])
        .unwrap();
        let x = v(&[1.0, 2.0, 0.3, -0.4, 1.5, 2.0, 0.1, 1.0]);
        let p = BarrierPoint::new(&c, &x).unwrap();
        let h = v(&[0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8]);
        assert!(close(&(p.hessian_matrix() * &h), &p.hessian_apply(&h), 1e-13));
        let l = p.hessian_sqrt().unwrap();
        assert!(close(&(l.to_matrix() * l.inverse_matrix() * &h), &h, 1e-12));
    }

    #[test]
    fn pairing_hessian_matches_finite_differences() {
        let c = ConeDescriptor::new(vec![
            BlockKind::Orthant { dim: 2 },
            BlockKind::SecondOrder { dim: 3 },
            BlockKind::Psd { side: 2 },
        ])
        .unwrap();
        let x = v(&[1.0, 2.0, 0.3, -0.4, 1.5, 2.0, 0.1, 1.0]);
        let a = v(&[0.5, 1.0, 0.2, 0.1, 1.0, 1.0, 0.3, 2.0]);
        let p = BarrierPoint::new(&c, &x).unwrap();
        let h = p.pairing_hessian(&a);
        let step = 1e-6;
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let gp = BarrierPoint::new(&c, &xp).unwrap().pairing_gradient(&a);
            let gm = BarrierPoint::new(&c, &xm).unwrap().pairing_gradient(&a);
            let fd = (gp - gm) / (2.0 * step);
            assert!((fd - h.column(j)).norm() < 1e-6 * (1.0 + h.column(j).norm()), "column {j}");
        }
    }
}

//! Cone descriptors and membership tests.
//!
//! A cone is an ordered product of primitive blocks. Vectors live in the
//! ambient coordinate space obtained by concatenating the blocks; PSD blocks
//! use the `√2`-scaled symmetric vectorization so the Euclidean inner product
//! on coordinates is the trace inner product on matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for closed-cone membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Default margin required for interior membership.
pub const INTERIOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BlockKind {
    Orthant { dim: usize },
    #[serde(rename = "soc")]
    SecondOrder { dim: usize },
    Psd { side: usize },
    /// `{x ∈ ℝ³ : x₁² + x₂² ≤ x₃², x₁ ≥ 0, x₃ ≥ 0}`, a hyperbolic cone whose
    /// dual is not homogeneous.
    #[serde(rename = "halfsoc3")]
    HalfSoc3,
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match *self {
            BlockKind::Orthant { dim } | BlockKind::SecondOrder { dim } => dim,
            BlockKind::Psd { side } => side * (side + 1) / 2,
            BlockKind::HalfSoc3 => 3,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, BlockKind::HalfSoc3)
    }
}

/// Position of one block inside the ambient coordinate range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSlice {
    pub index: usize,
    pub offset: usize,
    pub len: usize,
}

impl BlockSlice {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCone", into = "RawCone")]
pub struct ConeDescriptor {
    blocks: Vec<BlockKind>,
}

#[derive(Serialize, Deserialize)]
struct RawCone {
    blocks: Vec<BlockKind>,
}

impl TryFrom<RawCone> for ConeDescriptor {
    type Error = Error;
    fn try_from(raw: RawCone) -> Result<Self> {
        ConeDescriptor::new(raw.blocks)
    }
}

impl From<ConeDescriptor> for RawCone {
    fn from(c: ConeDescriptor) -> Self {
        RawCone { blocks: c.blocks }
    }
}

impl ConeDescriptor {
    pub fn new(blocks: Vec<BlockKind>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::schema("blocks", "a cone needs at least one block"));
        }
        for (i, b) in blocks.iter().enumerate() {
            let bad = match *b {
                BlockKind::Orthant { dim } => dim == 0,
                BlockKind::SecondOrder { dim } => dim < 2,
                BlockKind::Psd { side } => side == 0,
                BlockKind::HalfSoc3 => blocks.len() != 1,
            };
            if bad {
                return Err(Error::schema(
                    format!("blocks[{i}]"),
                    format!("invalid block {b:?}"),
                ));
            }
        }
        Ok(Self { blocks })
    }

    pub fn orthant(dim: usize) -> Self {
        Self::new(vec![BlockKind::Orthant { dim }]).expect("orthant dimension must be positive")
    }

    pub fn second_order(dim: usize) -> Self {
        Self::new(vec![BlockKind::SecondOrder { dim }]).expect("second-order dimension must be ≥ 2")
    }

    pub fn psd(side: usize) -> Self {
        Self::new(vec![BlockKind::Psd { side }]).expect("psd side must be positive")
    }

    pub fn half_soc3() -> Self {
        Self {
            blocks: vec![BlockKind::HalfSoc3],
        }
    }

    pub fn blocks(&self) -> &[BlockKind] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(BlockKind::dim).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.blocks.iter().all(BlockKind::is_symmetric)
    }

    pub fn slices(&self) -> Vec<BlockSlice> {
        let mut offset = 0;
        self.blocks
            .iter()
            .enumerate()
            .map(|(index, b)| {
                let s = BlockSlice {
                    index,
                    offset,
                    len: b.dim(),
                };
                offset += s.len;
                s
            })
            .collect()
    }

    pub fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Canonical interior point: ones, the unit axis point, or the identity.
    pub fn identity_point(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (b, s) in self.blocks.iter().zip(self.slices()) {
            let mut v = x.rows_mut(s.offset, s.len);
            match *b {
                BlockKind::Orthant { .. } => v.fill(1.0),
                BlockKind::SecondOrder { dim } => v[dim - 1] = 1.0,
                BlockKind::Psd { side } => v.copy_from(&svec_unchecked(&DMatrix::identity(side, side))),
                BlockKind::HalfSoc3 => {
                    v[0] = 0.5;
                    v[2] = 1.0;
                }
            }
        }
        x
    }

    /// Smallest block margin: positive inside, zero on the boundary, negative outside.
    pub fn margin(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .blocks
            .iter()
            .zip(self.slices())
            .map(|(b, s)| block_margin(b, x.rows(s.offset, s.len).as_slice()))
            .fold(f64::INFINITY, f64::min))
    }

    /// Smallest block margin for the dual cone.
    pub fn dual_margin(&self, y: &DVector<f64>) -> Result<f64> {
        self.check_dim(y)?;
        Ok(self
            .blocks
            .iter()
            .zip(self.slices())
            .map(|(b, s)| {
                let v = y.rows(s.offset, s.len);
                match b {
                    BlockKind::HalfSoc3 => halfsoc3_dual_margin(v.as_slice()),
                    _ => block_margin(b, v.as_slice()),
                }
            })
            .fold(f64::INFINITY, f64::min))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.margin(x)? >= -tol)
    }

    pub fn contains_interior(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.margin(x)? > tol)
    }

    pub fn dual_contains(&self, y: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.dual_margin(y)? >= -tol)
    }

    pub fn dual_contains_interior(&self, y: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.dual_margin(y)? > tol)
    }

    /// Whether `cone(S)` meets the interior. A conic combination is interior
    /// iff the plain sum is, since the sum dominates any sub-combination.
    pub fn conic_hull_meets_interior(&self, set: &[DVector<f64>], tol: f64) -> Result<bool> {
        let sum = vector_sum(self.dim(), set)?;
        self.contains_interior(&sum, tol)
    }

    /// Dual-cone counterpart of [`ConeDescriptor::conic_hull_meets_interior`].
    pub fn conic_hull_meets_dual_interior(&self, set: &[DVector<f64>], tol: f64) -> Result<bool> {
        let sum = vector_sum(self.dim(), set)?;
        self.dual_contains_interior(&sum, tol)
    }
}

fn vector_sum(dim: usize, set: &[DVector<f64>]) -> Result<DVector<f64>> {
    if set.is_empty() {
        return Err(Error::precondition("empty set has no conic hull interior"));
    }
    let mut sum = DVector::zeros(dim);
    for x in set {
        if x.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: x.len(),
            });
        }
        sum += x;
    }
    Ok(sum)
}

fn block_margin(b: &BlockKind, v: &[f64]) -> f64 {
    match *b {
        BlockKind::Orthant { .. } => v.iter().copied().fold(f64::INFINITY, f64::min),
        BlockKind::SecondOrder { dim } => {
            let rest = v[..dim - 1].iter().map(|t| t * t).sum::<f64>().sqrt();
            v[dim - 1] - rest
        }
        BlockKind::Psd { side } => {
            let m = smat_unchecked(v, side);
            SymmetricEigen::new(m).eigenvalues.min()
        }
        BlockKind::HalfSoc3 => {
            let soc = v[2] - v[0].hypot(v[1]);
            soc.min(v[0]).min(v[2])
        }
    }
}

/// Dual margin of the half second-order cone, in closed form.
///
/// The dual is `SOC₃ + cone(e₁)`; the best shift `s ≥ 0` in `y − s·e₁` is
/// `max(y₁, 0)`, which leaves `‖(min(y₁,0), y₂)‖ ≤ y₃` as the condition.
pub fn halfsoc3_dual_margin(y: &[f64]) -> f64 {
    y[2] - y[0].min(0.0).hypot(y[1])
}

/// Same quantity as [`halfsoc3_dual_margin`], computed by golden-section
/// search over the shift `s ∈ [0, ‖y‖ + 1]`.
pub fn halfsoc3_dual_margin_search(y: &[f64]) -> f64 {
    let f = |s: f64| y[2] - (y[0] - s).hypot(y[1]);
    let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let (mut lo, mut hi) = (0.0, norm + 1.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    f(0.0).max(f(0.5 * (lo + hi)))
}

/// Symmetric vectorization: upper triangle, column-major, off-diagonals ×√2.
pub fn svec(x: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
    if !x.is_square() {
        return Err(Error::precondition(format!(
            "svec needs a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let scale = 1.0 + x.amax();
    let asym = (x - x.transpose()).amax();
    if asym > tol * scale {
        return Err(Error::precondition(format!("matrix asymmetric by {asym:e}")));
    }
    Ok(svec_unchecked(x))
}

pub(crate) fn svec_unchecked(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows();
    let mut v = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            v[k] = if i == j {
                x[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (x[(i, j)] + x[(j, i)])
            };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], side: usize) -> Result<DMatrix<f64>> {
    if v.len() != side * (side + 1) / 2 {
        return Err(Error::Dimension {
            expected: side * (side + 1) / 2,
            got: v.len(),
        });
    }
    Ok(smat_unchecked(v, side))
}

pub(crate) fn smat_unchecked(v: &[f64], side: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in 0..=j {
            if i == j {
                x[(i, i)] = v[k];
            } else {
                let e = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                x[(i, j)] = e;
                x[(j, i)] = e;
            }
            k += 1;
        }
    }
    x
}

/// Random point of the cone. With `boundary`, each block is pushed onto
/// its boundary with probability one half.
pub fn sample_point<R: Rng + ?Sized>(cone: &ConeDescriptor, rng: &mut R, boundary: bool) -> DVector<f64> {
    let mut x = DVector::zeros(cone.dim());
    for (b, s) in cone.blocks().iter().zip(cone.slices()) {
        let on_boundary = boundary && rng.gen_bool(0.5);
        let block = sample_block(b, rng, on_boundary);
        x.rows_mut(s.offset, s.len).copy_from(&block);
    }
    x
}

/// Random point of the dual cone.
pub fn sample_dual_point<R: Rng + ?Sized>(cone: &ConeDescriptor, rng: &mut R, boundary: bool) -> DVector<f64> {
    let mut y = DVector::zeros(cone.dim());
    for (b, s) in cone.blocks().iter().zip(cone.slices()) {
        let on_boundary = boundary && rng.gen_bool(0.5);
        let block = match b {
            BlockKind::HalfSoc3 => {
                let mut v = sample_block(&BlockKind::SecondOrder { dim: 3 }, rng, on_boundary);
                if !on_boundary {
                    v[0] += rng.gen_range(0.0..2.0);
                }
                v
            }
            _ => sample_block(b, rng, on_boundary),
        };
        y.rows_mut(s.offset, s.len).copy_from(&block);
    }
    y
}

fn sample_block<R: Rng + ?Sized>(b: &BlockKind, rng: &mut R, boundary: bool) -> DVector<f64> {
    match *b {
        BlockKind::Orthant { dim } => {
            let mut v = DVector::from_fn(dim, |_, _| rng.gen_range(0.05..3.0));
            if boundary {
                let k = rng.gen_range(0..dim);
                v[k] = 0.0;
            }
            v
        }
        BlockKind::SecondOrder { dim } => {
            let dir = random_unit(dim - 1, rng);
            let axis = rng.gen_range(0.2..3.0);
            let r = if boundary { axis } else { axis * rng.gen_range(0.0..0.95) };
            let mut v = DVector::zeros(dim);
            for i in 0..dim - 1 {
                v[i] = r * dir[i];
            }
            v[dim - 1] = axis;
            v
        }
        BlockKind::Psd { side } => {
            let rank = if boundary && side > 1 { rng.gen_range(1..side) } else { side };
            let g = DMatrix::from_fn(side, rank, |_, _| rng.gen_range(-1.0..1.0));
            let mut m = &g * g.transpose();
            if !boundary {
                m += DMatrix::identity(side, side) * 0.05;
            }
            svec_unchecked(&m)
        }
        BlockKind::HalfSoc3 => {
            let axis = rng.gen_range(0.2..3.0);
            let r = if boundary { axis } else { axis * rng.gen_range(0.0..0.95) };
            let theta = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
            DVector::from_vec(vec![r * theta.cos(), r * theta.sin(), axis])
        }
    }
}

pub(crate) fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

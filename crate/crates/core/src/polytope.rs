//! Exact 0/1 and cyclic polytope families with canonical facet normals.
//!
//! For a point set `V ⊂ ℤᵈ` (lifted with a trailing 1), `F` consists of the
//! primitive integer facet normals of `cone(V)` inside `span(V)`, plus both
//! orientations of a primitive integer basis of `span(V)^⊥`. Everything is
//! computed with big rationals, and `F` is sorted lexicographically so the
//! assignment `X ↦ (V, F)` is deterministic.

use nalgebra::DVector;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cone::ConeDescriptor;
use crate::error::{Error, Result};
use crate::scaling::{Factorization, FactorizationLabels};

/// Largest `d` accepted by [`zero_one_instance`].
pub const ZERO_ONE_MAX_D: usize = 8;
/// Largest number of basis subsets examined by the hull enumeration.
pub const SUBSET_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Family {
    ZeroOne,
    Cyclic { t: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeInstance {
    pub d: usize,
    pub family: Family,
    /// Indices of the chosen points in the family's ground set.
    pub subset: Vec<usize>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<i64>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<i64>>,
    /// Analytic bound on `‖f‖_∞`.
    #[serde(rename = "M", with = "decimal")]
    pub m: BigUint,
    /// Bound on `‖v‖_∞` for the family.
    pub v_bound: u64,
    /// Observed `max ‖f‖_∞`.
    pub max_abs_f: i64,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("M must be a decimal integer string"))
    }
}

impl PolytopeInstance {
    /// `log₂ M`.
    pub fn m_log2(&self) -> f64 {
        biguint_log2(&self.m)
    }

    pub fn ground_set(&self) -> Result<Vec<Vec<i64>>> {
        match self.family {
            Family::ZeroOne => zero_one_ground_set(self.d),
            Family::Cyclic { t } => cyclic_ground_set(self.d, t),
        }
    }
}

/// `M` as a float for the encoder, which works in floating point.
pub fn biguint_to_f64(m: &BigUint) -> Result<f64> {
    match m.to_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::CapExceeded("M does not fit in a double".into())),
    }
}

pub(crate) fn biguint_log2(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits <= 1000 {
        m.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        let top = (m >> shift).to_f64().unwrap();
        top.log2() + shift as f64
    }
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides out the gcd of the entries.
fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

/// Primitive integer basis of `{x : ⟨r, x⟩ = 0 for all rows r}`.
fn integer_kernel(rows: &[Vec<BigInt>], d: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let c = m[i][col].clone();
                for j in 0..d {
                    let s = &c * &m[row][j];
                    m[i][j] -= s;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..d).filter(|c| !pivots.contains(c)) {
        let mut x = vec![BigRational::zero(); d];
        x[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = -m[r][free].clone();
        }
        let l = x.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
        let ints: Vec<BigInt> = x.iter().map(|q| (q * BigRational::from_integer(l.clone())).to_integer()).collect();
        basis.push(primitive(ints));
    }
    basis
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Canonical `F` for the point set `v` (see module docs).
pub fn facet_normals(points: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let Some(first) = points.first() else {
        return Err(Error::precondition("empty point set"));
    };
    let d = first.len();
    let pts: Vec<Vec<BigInt>> = points.iter().map(|p| to_big(p)).collect();
    let ortho = integer_kernel(&pts, d);
    let r = d - ortho.len();
    if binomial(pts.len(), r - 1) > SUBSET_CAP {
        return Err(Error::CapExceeded(format!(
            "{} basis subsets exceed the cap of {SUBSET_CAP}",
            binomial(pts.len(), r - 1)
        )));
    }
    let mut normals: Vec<Vec<BigInt>> = Vec::new();
    let mut subset: Vec<usize> = (0..r - 1).collect();
    loop {
        let mut rows: Vec<Vec<BigInt>> = subset.iter().map(|&i| pts[i].clone()).collect();
        rows.extend(ortho.iter().cloned());
        let ker = integer_kernel(&rows, d);
        if ker.len() == 1 {
            let nrm = &ker[0];
            let signs: Vec<BigInt> = pts.iter().map(|p| dot(nrm, p)).collect();
            if signs.iter().all(|s| !s.is_negative()) {
                normals.push(nrm.clone());
            } else if signs.iter().all(|s| !s.is_positive()) {
                normals.push(nrm.iter().map(|x| -x).collect());
            }
        }
        if !next_subset(&mut subset, pts.len()) {
            break;
        }
    }
    for e in &ortho {
        normals.push(e.clone());
        normals.push(e.iter().map(|x| -x).collect());
    }
    let mut out: Vec<Vec<i64>> = normals
        .into_iter()
        .map(|n| {
            n.iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::CapExceeded("facet normal entry exceeds 64 bits".into())))
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Advances a `k`-combination of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `{0,1}^{d−1} × {1}`, point `k` having bit `i` of `k` as coordinate `i`.
pub fn zero_one_ground_set(d: usize) -> Result<Vec<Vec<i64>>> {
    if d < 2 || d > ZERO_ONE_MAX_D {
        return Err(Error::CapExceeded(format!("0/1 family needs 2 ≤ d ≤ {ZERO_ONE_MAX_D}")));
    }
    Ok((0..1usize << (d - 1))
        .map(|k| {
            let mut p: Vec<i64> = (0..d - 1).map(|i| ((k >> i) & 1) as i64).collect();
            p.push(1);
            p
        })
        .collect())
}

/// Moment-curve points `(k, k², …, k^{d−1}, 1)` for `k = 0..=t`.
pub fn cyclic_ground_set(d: usize, t: u64) -> Result<Vec<Vec<i64>>> {
    if d < 2 {
        return Err(Error::precondition("cyclic family needs d ≥ 2"));
    }
    if t > 100_000 {
        return Err(Error::CapExceeded("t above 100000".into()));
    }
    (0..=t as i64)
        .map(|k| {
            let mut p = Vec::with_capacity(d);
            let mut x: i64 = 1;
            for _ in 0..d - 1 {
                x = x.checked_mul(k).ok_or_else(|| Error::CapExceeded("moment-curve coordinate exceeds 64 bits".into()))?;
                p.push(x);
            }
            p.push(1);
            Ok(p)
        })
        .collect()
}

fn build(d: usize, family: Family, ground: &[Vec<i64>], subset: &[usize], m: BigUint, v_bound: u64) -> Result<PolytopeInstance> {
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if let Some(&bad) = subset.iter().find(|&&i| i >= ground.len()) {
        return Err(Error::precondition(format!("subset index {bad} outside the ground set of size {}", ground.len())));
    }
    let v: Vec<Vec<i64>> = subset.iter().map(|&i| ground[i].clone()).collect();
    let f = if v.is_empty() {
        // Every lifted point has last coordinate 1, so −e_d separates all.
        let mut e = vec![0; d];
        e[d - 1] = -1;
        vec![e]
    } else {
        facet_normals(&v)?
    };
    let max_abs_f = f.iter().flatten().map(|x| x.abs()).max().unwrap_or(0);
    Ok(PolytopeInstance {
        d,
        family,
        subset,
        v,
        f,
        m,
        v_bound,
        max_abs_f,
    })
}

/// Analytic coefficient bound `2^{d·log₂(2d)} = (2d)^d`.
pub fn zero_one_m(d: usize) -> BigUint {
    BigUint::from(2 * d as u64).pow(d as u32)
}

/// Analytic coefficient bound `((d+1)t^d)^d`, at least 1.
pub fn cyclic_m(d: usize, t: u64) -> BigUint {
    let inner = BigUint::from(d as u64 + 1) * BigUint::from(t).pow(d as u32);
    inner.pow(d as u32).max(BigUint::one())
}

/// Instance for `X ⊆ {0,1}^{d−1}` given by indices into [`zero_one_ground_set`].
/// The empty subset is allowed and gets `F = {−e_d}`.
pub fn zero_one_instance(d: usize, subset: &[usize]) -> Result<PolytopeInstance> {
    let ground = zero_one_ground_set(d)?;
    build(d, Family::ZeroOne, &ground, subset, zero_one_m(d), 1)
}

/// Instance for `X ⊆ {0,…,t}` on the moment curve.
pub fn cyclic_instance(d: usize, t: u64, ks: &[u64]) -> Result<PolytopeInstance> {
    let ground = cyclic_ground_set(d, t)?;
    let idx: Vec<usize> = ks.iter().map(|&k| k as usize).collect();
    let v_bound = t
        .checked_pow(d as u32 - 1)
        .ok_or_else(|| Error::CapExceeded("t^{d−1} exceeds 64 bits".into()))?
        .max(1);
    build(d, Family::Cyclic { t }, &ground, &idx, cyclic_m(d, t), v_bound)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub coefficient_bound: bool,
    pub point_bound: bool,
    pub nonnegative: bool,
    /// Every ground point outside `V` has some `⟨p, f⟩ ≤ −1`.
    pub separated: bool,
    pub vertices: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.coefficient_bound && self.point_bound && self.nonnegative && self.separated && self.vertices
    }
}

/// Checks the three instance conditions and the vertex property exactly.
pub fn verify_conditions(inst: &PolytopeInstance) -> Result<ConditionReport> {
    let ground = inst.ground_set()?;
    let m = BigInt::from(inst.m.clone());
    let fs: Vec<Vec<BigInt>> = inst.f.iter().map(|f| to_big(f)).collect();
    let vs: Vec<Vec<BigInt>> = inst.v.iter().map(|v| to_big(v)).collect();
    let coefficient_bound = fs.iter().flatten().all(|x| x.abs() <= m);
    let point_bound = inst.v.iter().flatten().all(|x| x.unsigned_abs() <= inst.v_bound);
    let nonnegative = vs.iter().all(|v| fs.iter().all(|f| !dot(v, f).is_negative()));
    let minus_one = -BigInt::one();
    let separated = ground
        .iter()
        .filter(|p| !inst.v.contains(p))
        .all(|p| fs.iter().any(|f| dot(&to_big(p), f) <= minus_one));
    let mut vertices = true;
    for (i, v) in inst.v.iter().enumerate() {
        let others: Vec<Vec<i64>> = inst.v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| w.clone()).collect();
        if others.is_empty() {
            continue;
        }
        let g = facet_normals(&others)?;
        if !g.iter().any(|f| dot(&to_big(v), &to_big(f)).is_negative()) {
            vertices = false;
        }
    }
    Ok(ConditionReport {
        coefficient_bound,
        point_bound,
        nonnegative,
        separated,
        vertices,
    })
}

/// Orthant factorization of the slack matrix: `a_v = (⟨v,f⟩)_f`, `b_f = e_f`.
pub fn slack_factorization(inst: &PolytopeInstance) -> Result<Factorization> {
    let k = inst.f.len();
    let fs: Vec<Vec<BigInt>> = inst.f.iter().map(|f| to_big(f)).collect();
    let mut a = Vec::with_capacity(inst.v.len());
    for v in &inst.v {
        let bv = to_big(v);
        let row: Vec<f64> = fs
            .iter()
            .map(|f| dot(&bv, f).to_f64().ok_or_else(|| Error::Numerical("slack value not representable".into())))
            .collect::<Result<_>>()?;
        a.push(DVector::from_vec(row));
    }
    let b = (0..k)
        .map(|j| {
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            e
        })
        .collect();
    Factorization::new(
        ConeDescriptor::orthant(k),
        a,
        b,
        Some(FactorizationLabels {
            points: inst.v.clone(),
            inequalities: inst.f.clone(),
        }),
    )
}

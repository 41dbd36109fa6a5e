//! JSON documents, hashing and atomic output.
//!
//! Parsing goes through `serde_path_to_error`, so data errors carry the
//! field path (`A[2][0]`) and syntax errors the line and column. Floats are
//! written in shortest round-trip form and parsed exactly, so emit/parse is
//! the identity on every document.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cone::ConeDescriptor;
use crate::error::{Error, Result};
use crate::recovery::RecoveredMaps;
use crate::scaling::{Factorization, FactorizationLabels, ScalingCertificate};

/// Parses `text` as `T`, reporting field paths on schema violations.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => Error::schema(path, inner.to_string()),
            _ => Error::from(inner),
        }
    })?;
    de.end()?;
    Ok(value)
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn vecs(rows: &[Vec<f64>]) -> Vec<DVector<f64>> {
    rows.iter().map(|r| DVector::from_column_slice(r)).collect()
}

fn rows(v: &[DVector<f64>]) -> Vec<Vec<f64>> {
    v.iter().map(|x| x.iter().copied().collect()).collect()
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(path: &str, r: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = r.first().map_or(0, |x| x.len());
    for (i, x) in r.iter().enumerate() {
        if x.len() != ncols {
            return Err(Error::schema(format!("{path}[{i}]"), format!("expected {ncols} entries, got {}", x.len())));
        }
    }
    Ok(DMatrix::from_fn(r.len(), ncols, |i, j| r[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationDoc {
    pub cone: ConeDescriptor,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<FactorizationLabels>,
}

impl FactorizationDoc {
    pub fn from_factorization(f: &Factorization) -> Self {
        Self {
            cone: f.cone.clone(),
            a: rows(&f.a),
            b: rows(&f.b),
            labels: f.labels.clone(),
        }
    }

    /// Validates dimensions and membership, naming the offending entry.
    pub fn into_factorization(self) -> Result<Factorization> {
        let n = self.cone.dim();
        for (name, set) in [("A", &self.a), ("B", &self.b)] {
            for (i, x) in set.iter().enumerate() {
                if x.len() != n {
                    return Err(Error::schema(
                        format!("{name}[{i}]"),
                        format!("ambient dimension is {n}, vector has {} entries", x.len()),
                    ));
                }
            }
        }
        Factorization::new(self.cone, vecs(&self.a), vecs(&self.b), self.labels)
    }
}

pub fn parse_factorization(text: &str) -> Result<Factorization> {
    parse::<FactorizationDoc>(text)?.into_factorization()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub theta: usize,
    pub delta: f64,
    pub w_bar: Vec<f64>,
    pub t_bar: f64,
    pub kkt_residual: f64,
    pub max_primal_norm_sq: f64,
    pub max_dual_norm_sq: f64,
    pub inner_product_max_error: f64,
    pub eps_zero: Option<f64>,
    pub f_c: f64,
    pub bound: f64,
    pub holds: bool,
    /// Matrix of the scaling automorphism `L`, row-major.
    pub operator: Vec<Vec<f64>>,
}

impl CertificateDoc {
    pub fn from_certificate(c: &ScalingCertificate) -> Self {
        Self {
            theta: c.theta,
            delta: c.delta,
            w_bar: c.w_bar.iter().copied().collect(),
            t_bar: c.t_bar,
            kkt_residual: c.kkt_residual,
            max_primal_norm_sq: c.max_primal_norm_sq,
            max_dual_norm_sq: c.max_dual_norm_sq,
            inner_product_max_error: c.inner_product_max_error,
            eps_zero: c.eps_zero,
            f_c: c.f_c(),
            bound: c.bound(),
            holds: c.holds(),
            operator: matrix_rows(&c.operator.to_matrix()),
        }
    }
}

/// Input of `recover-maps`: paired sets and their images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsDoc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "A_image")]
    pub a_image: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "B_image")]
    pub b_image: Vec<Vec<f64>>,
}

impl PairsDoc {
    pub fn sets(&self) -> [Vec<DVector<f64>>; 4] {
        [vecs(&self.a), vecs(&self.a_image), vecs(&self.b), vecs(&self.b_image)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapsDoc {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub a_basis: Vec<usize>,
    pub b_basis: Vec<usize>,
    pub consistency_residual: f64,
    /// `‖Q − G^{−⊤}‖ / ‖G^{−⊤}‖`, or `null` when `G` is singular.
    pub inverse_adjoint_error: Option<f64>,
}

impl MapsDoc {
    pub fn from_maps(m: &RecoveredMaps) -> Self {
        let err = m.g.clone().try_inverse().map(|gi| {
            let git = gi.transpose();
            (&m.q - &git).norm() / git.norm()
        });
        Self {
            g: matrix_rows(&m.g),
            q: matrix_rows(&m.q),
            a_basis: m.a_basis.clone(),
            b_basis: m.b_basis.clone(),
            consistency_residual: m.consistency_residual,
            inverse_adjoint_error: err,
        }
    }
}

/// Ties one command's inputs, options and outputs together. Hashes are
/// SHA-256 of the exact bytes read or written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub options: serde_json::Value,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, options: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: BTreeMap::new(),
            options,
            outputs: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn input(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.inputs.insert(name.into(), sha256_hex(bytes));
    }

    pub fn output(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.outputs.insert(name.into(), sha256_hex(bytes));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{normalize_factorization, SolverOptions};

    const FAC: &str = r#"{"cone":{"blocks":[{"type":"orthant","dim":2}]},
        "A":[[1.0,0.5],[0.25,2.0]],"B":[[1.0,1.0],[3.0,0.125]]}"#;

    #[test]
    fn factorization_round_trip() {
        let f = parse_factorization(FAC).unwrap();
        let text = emit(&FactorizationDoc::from_factorization(&f));
        assert_eq!(parse_factorization(&text).unwrap(), f);
    }

    #[test]
    fn certificate_round_trip_is_bit_identical() {
        let f = parse_factorization(FAC).unwrap();
        let (_, cert) = normalize_factorization(&f, &SolverOptions::default()).unwrap();
        let doc = CertificateDoc::from_certificate(&cert);
        let text = emit(&doc);
        let back: CertificateDoc = parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(emit(&back), text);
        for (x, y) in back.w_bar.iter().zip(&doc.w_bar) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = FAC.replace("[0.25,2.0]", "[0.25,2.0,1.0]");
        match parse_factorization(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "A[1]"),
            other => panic!("{other:?}"),
        }
        let bad = FAC.replace("[3.0,0.125]", "[3.0,\"x\"]");
        match parse_factorization(&bad) {
            Err(e @ Error::Schema { .. }) => {
                assert!(e.to_string().contains("B[1][1]"), "{e}");
                assert_eq!(e.exit_code(), 1);
            }
            other => panic!("{other:?}"),
        }
        match parse_factorization("{\"cone\": ") {
            Err(Error::Json { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_factorization(&FAC.replace("\"A\"", "\"X\"")), Err(Error::Schema { .. })));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}

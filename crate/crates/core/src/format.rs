//! Deterministic text emission and the matrix/partition/system literals read
//! from configuration files.
//!
//! Floats are always written with 17 significant digits so that runs can be
//! diffed byte for byte.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bernoulli::{BernoulliShiftSystem, Window};
use crate::dynsys::EntropyTrace;
use crate::error::{Error, Result};
use crate::opalg::{c, ComplexMatrix, DensityMatrix};
use crate::partition::OperationalPartition;

/// `x` with 17 significant digits in exponent form; non-finite values are
/// spelled out (`inf`, `-inf`, `NaN`).
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        sig17(x)
    } else {
        format!("\"{x}\"")
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_number(*x).serialize(s)
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => json_number(*v).serialize(s),
        None => s.serialize_none(),
    }
}

pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw: Vec<Box<RawValue>> = xs.iter().map(|&x| json_number(x)).collect();
    raw.serialize(s)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report types serialize");
    out.push('\n');
    out
}

pub const ENTROPY_CSV_HEADER: &str = "n,S_n,S_n_over_n,increment";

/// `n,S_n,S_n_over_n,increment` rows for `n = 1..=n_max`.
pub fn entropy_trace_csv(trace: &EntropyTrace) -> String {
    let mut out = String::from(ENTROPY_CSV_HEADER);
    out.push('\n');
    for i in 0..trace.n_max() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            sig17(trace.entropies[i]),
            sig17(trace.averages[i]),
            sig17(trace.increments[i])
        ));
    }
    out
}

/// A matrix entry: `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EntryLiteral {
    Complex([f64; 2]),
    Real(f64),
}

/// Row-major nested matrix literal.
pub type MatrixLiteral = Vec<Vec<EntryLiteral>>;

pub fn matrix_from_literal(lit: &MatrixLiteral) -> Result<ComplexMatrix> {
    let rows = lit.len();
    let cols = lit.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::Invalid("empty matrix literal".into()));
    }
    if let Some((i, r)) = lit.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Invalid(format!(
            "matrix literal row {i} has {} entries, expected {cols}",
            r.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| match lit[i][j] {
        EntryLiteral::Complex([re, im]) => c(re, im),
        EntryLiteral::Real(re) => c(re, 0.0),
    }))
}

pub fn matrix_to_literal(m: &ComplexMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| EntryLiteral::Complex([m[(i, j)].re, m[(i, j)].im]))
                .collect()
        })
        .collect()
}

/// `{"dim": int, "elements": [matrix, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionLiteral {
    pub dim: usize,
    pub elements: Vec<MatrixLiteral>,
}

impl PartitionLiteral {
    pub fn to_partition(&self) -> Result<OperationalPartition> {
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(j, lit)| {
                let m = matrix_from_literal(lit)?;
                if m.shape() != (self.dim, self.dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "element {j} is {}x{}, declared dim is {}",
                        m.nrows(),
                        m.ncols(),
                        self.dim
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        OperationalPartition::new(elements)
    }

    pub fn from_partition(x: &OperationalPartition) -> Self {
        PartitionLiteral {
            dim: x.dim(),
            elements: x.elements().iter().map(matrix_to_literal).collect(),
        }
    }
}

/// `{"d": int, "site_state": matrix, "window": [a, b]}` (window optional).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemLiteral {
    pub d: usize,
    pub site_state: MatrixLiteral,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
}

impl SystemLiteral {
    pub fn to_system(&self) -> Result<BernoulliShiftSystem> {
        let m = matrix_from_literal(&self.site_state)?;
        if m.shape() != (self.d, self.d) {
            return Err(Error::DimensionMismatch(format!(
                "site_state is {}x{}, d is {}",
                m.nrows(),
                m.ncols(),
                self.d
            )));
        }
        let sys = BernoulliShiftSystem::new(DensityMatrix::new(m)?);
        Ok(match self.window {
            Some([a, b]) => sys.with_window(Window::new(a, b)?),
            None => sys,
        })
    }
}

pub fn parse_partition(json: &str) -> Result<OperationalPartition> {
    let lit: PartitionLiteral = serde_json::from_str(json)
        .map_err(|e| Error::Invalid(format!("partition literal: {e}")))?;
    lit.to_partition()
}

pub fn parse_system(json: &str) -> Result<BernoulliShiftSystem> {
    let lit: SystemLiteral =
        serde_json::from_str(json).map_err(|e| Error::Invalid(format!("system literal: {e}")))?;
    lit.to_system()
}

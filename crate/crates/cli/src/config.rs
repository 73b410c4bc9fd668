//! Experiment configuration: a JSON file whose fields can be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use qdyn_core::bernoulli::{BernoulliShiftSystem, SitedPartition};
use qdyn_core::dynsys::FiniteDynamicalSystem;
use qdyn_core::format::{matrix_from_literal, MatrixLiteral, PartitionLiteral, SystemLiteral};
use qdyn_core::partition::OperationalPartition;
use qdyn_core::random::{random_kraus, rng};
use qdyn_core::{DensityMatrix, Error, Guard, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// `{"unitary": matrix, "state": matrix}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteLiteral {
    pub unitary: MatrixLiteral,
    pub state: MatrixLiteral,
}

impl FiniteLiteral {
    pub fn to_system(&self) -> Result<FiniteDynamicalSystem> {
        FiniteDynamicalSystem::new(
            matrix_from_literal(&self.unitary)?,
            DensityMatrix::new(matrix_from_literal(&self.state)?)?,
        )
    }
}

/// A named partition (`weyl`, `trivial`, `computational`, `random:K`) or an
/// explicit literal.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Named(String),
    Literal(PartitionLiteral),
}

impl PartitionSpec {
    pub fn build(&self, dim: usize, seed: u64) -> Result<OperationalPartition> {
        let x = match self {
            PartitionSpec::Literal(lit) => lit.to_partition()?,
            PartitionSpec::Named(name) => match name.as_str() {
                "weyl" => OperationalPartition::weyl(dim),
                "trivial" => OperationalPartition::trivial(dim),
                "computational" => OperationalPartition::computational(dim),
                other => match other.strip_prefix("random:").map(str::parse::<usize>) {
                    Some(Ok(k)) if k >= 1 => {
                        OperationalPartition::new(random_kraus(&mut rng(seed), dim, k))?
                    }
                    _ => {
                        return Err(Error::Invalid(format!(
                            "unknown partition '{other}' (expected weyl, trivial, computational, random:K or a literal)"
                        )))
                    }
                },
            },
        };
        if x.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "partition acts on dimension {}, system needs {dim}",
                x.dim()
            )));
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub guard: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub system: Option<SystemLiteral>,
    pub finite: Option<FiniteLiteral>,
    pub partition: Option<PartitionSpec>,
    pub support_start: Option<i64>,
    pub support_len: Option<usize>,
    pub n_max: Option<usize>,
    pub scheme: Option<String>,
    pub decoders: Option<Vec<String>>,
    pub suite: Option<String>,
    pub trials: Option<usize>,
    pub dim: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Config> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config {e}")))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn guard(&self) -> Guard {
        self.guard.map(Guard).unwrap_or_default()
    }

    pub fn bernoulli(&self) -> Result<BernoulliShiftSystem> {
        match &self.system {
            Some(lit) => lit.to_system(),
            None => Err(Error::Invalid(
                "no system given: set \"system\" in the config or pass --diag".into(),
            )),
        }
    }

    /// Site state of the configured Bernoulli system, when there is one.
    pub fn site_state(&self) -> Result<Option<DensityMatrix>> {
        match &self.system {
            Some(_) => Ok(Some(self.bernoulli()?.site_state().clone())),
            None => Ok(None),
        }
    }

    pub fn sited_partition(&self, system: &BernoulliShiftSystem) -> Result<SitedPartition> {
        let len = self.support_len.unwrap_or(1);
        let dim = system
            .d()
            .checked_pow(len as u32)
            .ok_or_else(|| Error::Invalid(format!("support of {len} sites is too large")))?;
        self.guard().check("partition dimension", dim as u128)?;
        let x = self.partition_spec().build(dim, self.seed())?;
        SitedPartition::new(x, self.support_start.unwrap_or(0), len)
    }

    pub fn partition_spec(&self) -> PartitionSpec {
        self.partition
            .clone()
            .unwrap_or_else(|| PartitionSpec::Named("weyl".into()))
    }
}

/// Parses `0.75,0.25` into a diagonal site-state literal.
pub fn diagonal_system(values: &str) -> std::result::Result<SystemLiteral, String> {
    let p: Vec<f64> = values
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let d = p.len();
    let site_state = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| qdyn_core::format::EntryLiteral::Real(if i == j { p[i] } else { 0.0 }))
                .collect()
        })
        .collect();
    Ok(SystemLiteral {
        d,
        site_state,
        window: None,
    })
}

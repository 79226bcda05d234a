use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{DistributionModel, Family, MomentEngine, QuadratureSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Self::Table),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format `{other}`"
            ))),
        }
    }
}

/// Everything one CLI invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub model: DistributionModel,
    pub n: usize,
    /// Number of observed failures; taken from the input when absent.
    pub r: Option<usize>,
    /// Each request is one target (marginal only) or a pair (joint + marginal).
    pub targets: Vec<Vec<usize>>,
    pub input: Option<PathBuf>,
    pub format: OutputFormat,
    pub cache_dir: Option<PathBuf>,
    pub quadrature: Option<QuadratureSettings>,
}

impl AnalysisConfig {
    pub fn new(family: Family, n: usize) -> Self {
        Self {
            model: DistributionModel::new(family),
            n,
            r: None,
            targets: Vec::new(),
            input: None,
            format: OutputFormat::Table,
            cache_dir: None,
            quadrature: None,
        }
    }

    pub fn engine(&self) -> MomentEngine {
        match self.quadrature {
            Some(q) => MomentEngine::default().with_quadrature(q),
            None => MomentEngine::default(),
        }
    }

    /// Checks `2 <= r < n` and `r < s < t <= n` for every request.
    ///
    /// Requests with more than two targets pass here; they are rejected by the
    /// feasibility check with a dedicated verdict.
    pub fn validate(&self, r: usize) -> Result<()> {
        if r < 2 {
            return Err(Error::InvalidConfig(format!(
                "r = {r}: at least 2 observations are required"
            )));
        }
        if r >= self.n {
            return Err(Error::InvalidConfig(format!(
                "r = {r} must be smaller than n = {}",
                self.n
            )));
        }
        if let Some(expected) = self.r {
            if expected != r {
                return Err(Error::InvalidConfig(format!(
                    "--r {expected} disagrees with the {r} observations in the input"
                )));
            }
        }
        for request in &self.targets {
            if request.is_empty() {
                return Err(Error::InvalidConfig("empty target request".into()));
            }
            for &idx in request {
                if idx <= r || idx > self.n {
                    return Err(Error::TargetOutOfRange {
                        index: idx,
                        r,
                        n: self.n,
                    });
                }
            }
            for w in request.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::TargetOrder { s: w[0], t: w[1] });
                }
            }
        }
        Ok(())
    }
}

/// Parses `"6,7;6,10;9"` into `[[6, 7], [6, 10], [9]]`.
pub fn parse_targets(spec: &str) -> Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(str::trim)
        .filter(|group| !group.is_empty())
        .map(|group| {
            group
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<usize>().map_err(|e| Error::Parse {
                        what: format!("target index `{}`", tok.trim()),
                        message: e.to_string(),
                    })
                })
                .collect()
        })
        .collect()
}

//! Means and covariances of standardized order statistics.
//!
//! The exponential parent has closed forms (Rényi representation). The normal
//! parent is integrated numerically; see [`quadrature`].

mod cache;
mod quadrature;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cache::{load_or_build_moments, CacheStatus, MomentCache, CACHE_FORMAT_VERSION};
pub use quadrature::QuadratureSettings;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

/// Default ceiling on `n`; the quadrature defaults are only validated up to here.
pub const DEFAULT_MAX_N: usize = 50;

/// Standardized parent density of the lifetime model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Exponential,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Exponential => "exponential",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Family::Normal),
            "exponential" | "exp" => Ok(Family::Exponential),
            other => Err(Error::UnsupportedFamily(other.to_string())),
        }
    }
}

/// Whether the model carries a location parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelClass {
    /// Density `(1/sigma) f((x - mu)/sigma)`.
    LocationScale,
    /// Density `(1/sigma) f(x/sigma)`; the location is known to be zero.
    ScaleOnly,
}

/// A parent distribution: the standardized density plus its model class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistributionModel {
    pub family: Family,
    pub class: ModelClass,
}

impl DistributionModel {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            class: ModelClass::LocationScale,
        }
    }

    pub fn normal() -> Self {
        Self::new(Family::Normal)
    }

    pub fn exponential() -> Self {
        Self::new(Family::Exponential)
    }

    pub fn scale_only(mut self) -> Self {
        self.class = ModelClass::ScaleOnly;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.family, Family::Normal)
    }

    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Normal => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Exponential => (0.0, f64::INFINITY),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            Family::Exponential => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => 0.5 * libm::erfc(-x * FRAC_1_SQRT_2),
            Family::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
        }
    }

    /// `1 - cdf(x)` without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => 0.5 * libm::erfc(x * FRAC_1_SQRT_2),
            Family::Exponential => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x).exp()
                }
            }
        }
    }

    /// `E[Z]` of a single standardized observation.
    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Normal => 0.0,
            Family::Exponential => 1.0,
        }
    }

    /// `E[Z^2]` of a single standardized observation.
    pub fn second_moment(&self) -> f64 {
        match self.family {
            Family::Normal => 1.0,
            Family::Exponential => 2.0,
        }
    }

    pub fn default_quadrature(&self) -> QuadratureSettings {
        match self.family {
            Family::Normal => QuadratureSettings {
                lower: -12.0,
                upper: 12.0,
                panels: 24,
                nodes_per_panel: 20,
            },
            Family::Exponential => QuadratureSettings {
                lower: 0.0,
                upper: 50.0,
                panels: 100,
                nodes_per_panel: 20,
            },
        }
    }

    /// Integral of the standardized density over its (truncated) support.
    pub fn total_mass(&self, settings: &QuadratureSettings) -> f64 {
        quadrature::integrate(settings, |x| self.pdf(x))
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            ModelClass::LocationScale => write!(f, "{}", self.family),
            ModelClass::ScaleOnly => write!(f, "{} (scale-only)", self.family),
        }
    }
}

/// How a moment table was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Quadrature(QuadratureSettings),
}

/// `alpha_i = E[Z_{i:n}]` and `Sigma_ij = Cov(Z_{i:n}, Z_{j:n})` for one `(family, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet<T = f64> {
    pub family: Family,
    pub n: usize,
    pub alpha: Vec<T>,
    pub sigma: Matrix<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> MomentSet<T> {
    pub fn cast<U: Scalar>(&self) -> MomentSet<U> {
        MomentSet {
            family: self.family,
            n: self.n,
            alpha: self
                .alpha
                .iter()
                .map(|&x| U::lit(x.to_f64_lossy()))
                .collect(),
            sigma: self.sigma.map(|x| U::lit(x.to_f64_lossy())),
            provenance: self.provenance,
        }
    }

    /// Leading `r` entries of `alpha`.
    pub fn alpha_prefix(&self, r: usize) -> &[T] {
        &self.alpha[..r]
    }

    /// `trace(Sigma) + |alpha|^2`, which equals `n E[Z^2]`.
    pub fn second_moment_total(&self) -> T {
        self.sigma.trace() + self.alpha.iter().map(|&a| a * a).sum::<T>()
    }
}

impl MomentSet<f64> {
    /// Checks every structural invariant of a moment table.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let model = DistributionModel::new(self.family);
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        if self.alpha.len() != n || self.sigma.rows() != n || self.sigma.cols() != n {
            return fail(format!("table dimensions do not match n = {n}"));
        }
        if self
            .alpha
            .iter()
            .chain(self.sigma.as_slice())
            .any(|x| !x.is_finite())
        {
            return fail("non-finite entry".into());
        }
        if let Some(i) = (1..n).find(|&i| self.alpha[i] <= self.alpha[i - 1]) {
            return fail(format!("alpha not strictly increasing at index {}", i + 1));
        }
        let asym = self.sigma.max_asymmetry();
        if asym > 1e-12 {
            return fail(format!("sigma asymmetric by {asym:.3e}"));
        }
        // Cholesky of the whole matrix succeeds iff every leading block is PD.
        if let Err(e) = Cholesky::new(&self.sigma) {
            return fail(format!("sigma not positive definite: {e}"));
        }
        let (identity_tol, row_tol) = match self.provenance {
            Provenance::ClosedForm => (1e-12, 1e-12),
            Provenance::Quadrature(_) => (1e-4, 1e-4),
        };
        if model.is_symmetric() {
            for i in 0..n / 2 {
                let d = (self.alpha[i] + self.alpha[n - 1 - i]).abs();
                if d > identity_tol {
                    return fail(format!(
                        "alpha not antisymmetric at index {} ({d:.3e})",
                        i + 1
                    ));
                }
            }
        }
        let total = self.second_moment_total();
        let expected = n as f64 * model.second_moment();
        if (total - expected).abs() > identity_tol * expected.max(1.0) {
            return fail(format!(
                "trace(sigma) + |alpha|^2 = {total} but n E[Z^2] = {expected}"
            ));
        }
        if self.family == Family::Normal {
            for (i, s) in self.sigma.row_sums().into_iter().enumerate() {
                if (s - 1.0).abs() > row_tol {
                    return fail(format!("sigma row {} sums to {s}, expected 1", i + 1));
                }
            }
        }
        Ok(())
    }
}

/// Computes moment tables. The default picks closed forms where they exist.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEngine {
    pub max_n: usize,
    /// Overrides the family default when set.
    pub quadrature: Option<QuadratureSettings>,
    /// Use numerical integration even when a closed form exists.
    pub force_quadrature: bool,
    /// Largest accepted residual of the quadrature sum identities.
    pub tolerance: f64,
}

impl Default for MomentEngine {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            quadrature: None,
            force_quadrature: false,
            tolerance: 1e-9,
        }
    }
}

impl MomentEngine {
    pub fn with_quadrature(mut self, settings: QuadratureSettings) -> Self {
        self.quadrature = Some(settings);
        self
    }

    pub fn forcing_quadrature(mut self) -> Self {
        self.force_quadrature = true;
        self
    }

    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }

    /// Provenance a table built by this engine would carry.
    pub fn provenance(&self, dist: &DistributionModel) -> Provenance {
        match dist.family {
            Family::Exponential if !self.force_quadrature => Provenance::ClosedForm,
            _ => {
                Provenance::Quadrature(self.quadrature.unwrap_or_else(|| dist.default_quadrature()))
            }
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::EmptySampleSize);
        }
        if n > self.max_n {
            return Err(Error::SampleSizeTooLarge { n, max: self.max_n });
        }
        Ok(())
    }

    pub fn alpha(&self, dist: &DistributionModel, n: usize) -> Result<Vec<f64>> {
        self.check_n(n)?;
        match self.provenance(dist) {
            Provenance::ClosedForm => Ok(exponential_alpha(n)),
            Provenance::Quadrature(settings) => {
                self.check_settings(&settings)?;
                let q = quadrature::single_moments(dist, n, &settings);
                self.check_residual(q.residual)?;
                Ok(q.alpha)
            }
        }
    }

    pub fn sigma(&self, dist: &DistributionModel, n: usize) -> Result<Matrix<f64>> {
        Ok(self.build_unchecked(dist, n)?.sigma)
    }

    /// Computes and validates the full moment table.
    pub fn build(&self, dist: &DistributionModel, n: usize) -> Result<MomentSet<f64>> {
        let set = self.build_unchecked(dist, n)?;
        set.validate()?;
        Ok(set)
    }

    fn build_unchecked(&self, dist: &DistributionModel, n: usize) -> Result<MomentSet<f64>> {
        self.check_n(n)?;
        let provenance = self.provenance(dist);
        let (alpha, sigma) = match provenance {
            Provenance::ClosedForm => (exponential_alpha(n), exponential_sigma(n)),
            Provenance::Quadrature(settings) => {
                let q = self.integrate(dist, n, &settings)?;
                let sigma =
                    Matrix::from_fn(n, n, |i, j| q.product[(i, j)] - q.alpha[i] * q.alpha[j]);
                (q.alpha, sigma)
            }
        };
        Ok(MomentSet {
            family: dist.family,
            n,
            alpha,
            sigma,
            provenance,
        })
    }

    fn integrate(
        &self,
        dist: &DistributionModel,
        n: usize,
        settings: &QuadratureSettings,
    ) -> Result<quadrature::QuadratureMoments> {
        self.check_settings(settings)?;
        let q = quadrature::order_statistic_moments(dist, n, settings);
        self.check_residual(q.residual)?;
        Ok(q)
    }

    fn check_settings(&self, settings: &QuadratureSettings) -> Result<()> {
        if settings.panels == 0
            || settings.nodes_per_panel == 0
            || !(settings.upper > settings.lower)
        {
            return Err(Error::InvalidConfig(format!(
                "bad quadrature settings {settings:?}"
            )));
        }
        Ok(())
    }

    fn check_residual(&self, residual: f64) -> Result<()> {
        if !(residual <= self.tolerance) {
            return Err(Error::QuadratureNonConvergence {
                achieved: residual,
                tolerance: self.tolerance,
            });
        }
        Ok(())
    }
}

/// `E[Z_{i:n}]` for every `i`.
pub fn compute_alpha(dist: &DistributionModel, n: usize) -> Result<Vec<f64>> {
    MomentEngine::default().alpha(dist, n)
}

/// `Cov(Z_{i:n}, Z_{j:n})` for every `(i, j)`.
pub fn compute_sigma(dist: &DistributionModel, n: usize) -> Result<Matrix<f64>> {
    MomentEngine::default().sigma(dist, n)
}

// Rényi: Z_{i:n} = sum_{k<=i} E_k / (n - k + 1) with iid unit exponentials E_k.
fn exponential_alpha(n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (1..=n)
        .map(|k| {
            acc += 1.0 / (n - k + 1) as f64;
            acc
        })
        .collect()
}

fn exponential_sigma(n: usize) -> Matrix<f64> {
    let mut partial = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 1..=n {
        let d = (n - k + 1) as f64;
        acc += 1.0 / (d * d);
        partial.push(acc);
    }
    Matrix::from_fn(n, n, |i, j| partial[i.min(j)])
}

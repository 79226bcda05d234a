//! Best linear unbiased estimation of location and scale from a Type-II
//! right-censored sample.
//!
//! With `X = (X_{1:n}, ..., X_{r:n})'`, `E[X] = mu 1 + sigma alpha` and
//! `Cov(X) = sigma^2 Sigma`, generalized least squares gives
//!
//! ```text
//! mu_hat    = { (a'S^-1 a) 1'S^-1 - (a'S^-1 1) a'S^-1 } X / Delta
//! sigma_hat = { (1'S^-1 1) a'S^-1 - (1'S^-1 a) 1'S^-1 } X / Delta
//! Delta     = (1'S^-1 1)(a'S^-1 a) - (1'S^-1 a)^2
//! ```
//!
//! where `a` is the leading `r` entries of `alpha` and `S` the leading `r x r`
//! block of `Sigma`. All `Sigma^-1` products come from Cholesky solves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::moments::MomentSet;
use crate::scalar::{dot, Scalar};

/// The first `r` of `n` ordered failure times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample<T = f64> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> CensoredSample<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        let r = values.len();
        if r < 2 {
            return Err(Error::InvalidSample(format!(
                "need at least 2 observed failures to estimate location and scale, got {r}"
            )));
        }
        if r >= n {
            return Err(Error::InvalidSample(format!(
                "r = {r} observations leaves nothing to predict out of n = {n}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("non-finite value {v}")));
        }
        if let Some(i) = (1..r).find(|&i| values[i] <= values[i - 1]) {
            return Err(Error::InvalidSample(format!(
                "values must be strictly increasing: x[{}] = {} follows x[{}] = {}",
                i + 1,
                values[i],
                i,
                values[i - 1]
            )));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Applies `x -> scale * x + shift` to every observation (`scale > 0`).
    pub fn affine(&self, scale: T, shift: T) -> Result<Self> {
        Self::new(
            self.n,
            self.values.iter().map(|&x| scale * x + shift).collect(),
        )
    }
}

/// GLS building blocks for the leading `r x r` covariance block.
///
/// `row_sums_r[i]` is the i-th row sum of `Sigma^-1` (that is, `Sigma^-1 1`) and
/// `row_sums_s[i]` the i-th entry of `Sigma^-1 alpha`.
#[derive(Debug, Clone)]
pub struct GlsSystem<T> {
    pub r: usize,
    pub alpha: Vec<T>,
    pub sigma: Matrix<T>,
    pub chol: Cholesky<T>,
    pub row_sums_r: Vec<T>,
    pub row_sums_s: Vec<T>,
    /// `1' Sigma^-1 1`
    pub one_one: T,
    /// `1' Sigma^-1 alpha`
    pub one_alpha: T,
    /// `alpha' Sigma^-1 alpha`
    pub alpha_alpha: T,
    pub delta: T,
    pub condition: T,
}

impl<T: Scalar> GlsSystem<T> {
    pub fn new(moments: &MomentSet<T>, r: usize) -> Result<Self> {
        if r < 2 || r > moments.n {
            return Err(Error::DimensionMismatch {
                expected: moments.n,
                found: r,
            });
        }
        let sigma = moments.sigma.leading(r);
        let alpha = moments.alpha_prefix(r).to_vec();
        let chol = Cholesky::new(&sigma)?;
        let condition = chol.condition_number(&sigma);
        if !(condition.to_f64_lossy() <= T::CONDITION_LIMIT) {
            return Err(Error::Singular {
                condition: condition.to_f64_lossy(),
                limit: T::CONDITION_LIMIT,
            });
        }
        let row_sums_r = chol.solve(&vec![T::one(); r]);
        let row_sums_s = chol.solve(&alpha);
        let one_one: T = row_sums_r.iter().copied().sum();
        let one_alpha = dot(&alpha, &row_sums_r);
        let alpha_alpha = dot(&alpha, &row_sums_s);
        let delta = one_one * alpha_alpha - one_alpha * one_alpha;
        if !(delta > T::zero()) {
            return Err(Error::Singular {
                condition: f64::INFINITY,
                limit: T::CONDITION_LIMIT,
            });
        }
        Ok(Self {
            r,
            alpha,
            sigma,
            chol,
            row_sums_r,
            row_sums_s,
            one_one,
            one_alpha,
            alpha_alpha,
            delta,
            condition,
        })
    }

    /// BLUE weights `(w_mu, w_sigma)` with `mu_hat = w_mu'X`, `sigma_hat = w_sigma'X`.
    pub fn blue_weights(&self) -> (Vec<T>, Vec<T>) {
        let mu = self
            .row_sums_r
            .iter()
            .zip(&self.row_sums_s)
            .map(|(&ri, &si)| (self.alpha_alpha * ri - self.one_alpha * si) / self.delta)
            .collect();
        let sigma = self
            .row_sums_r
            .iter()
            .zip(&self.row_sums_s)
            .map(|(&ri, &si)| (self.one_one * si - self.one_alpha * ri) / self.delta)
            .collect();
        (mu, sigma)
    }

    pub fn check_sample(&self, sample: &CensoredSample<T>, n: usize) -> Result<()> {
        if sample.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sample.n(),
            });
        }
        if sample.r() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                found: sample.r(),
            });
        }
        Ok(())
    }
}

/// Location and scale BLUEs with their second-moment structure.
///
/// Variances and the covariance are coefficients of `sigma^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlueEstimate<T = f64> {
    pub mu_hat: T,
    pub sigma_hat: T,
    pub var_mu: T,
    pub var_sigma: T,
    pub cov_mu_sigma: T,
    /// Generalized variance `Delta`.
    pub delta: T,
    pub mu_coefficients: Vec<T>,
    pub sigma_coefficients: Vec<T>,
    /// 1-norm condition number of the leading covariance block.
    pub condition: T,
}

impl<T: Scalar> BlueEstimate<T> {
    pub fn from_system(system: &GlsSystem<T>, values: &[T]) -> Self {
        let (mu_coefficients, sigma_coefficients) = system.blue_weights();
        Self {
            mu_hat: dot(&mu_coefficients, values),
            sigma_hat: dot(&sigma_coefficients, values),
            var_mu: system.alpha_alpha / system.delta,
            var_sigma: system.one_one / system.delta,
            cov_mu_sigma: -system.one_alpha / system.delta,
            delta: system.delta,
            mu_coefficients,
            sigma_coefficients,
            condition: system.condition,
        }
    }
}

pub fn blue_estimate<T: Scalar>(
    sample: &CensoredSample<T>,
    moments: &MomentSet<T>,
) -> Result<BlueEstimate<T>> {
    if sample.n() != moments.n {
        return Err(Error::DimensionMismatch {
            expected: moments.n,
            found: sample.n(),
        });
    }
    let system = GlsSystem::new(moments, sample.r())?;
    Ok(BlueEstimate::from_system(&system, sample.values()))
}

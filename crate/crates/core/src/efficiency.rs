//! Determinant and trace comparisons of joint versus marginal predictors.
//!
//! Both ratios put the joint predictors in the numerator:
//! `d_efficiency = det(V_joint) / det(V_marginal)` and
//! `trace_efficiency = tr(V_joint) / tr(V_marginal)`. The gain is
//! `1 - d_efficiency`, the loss `1 - trace_efficiency`, and the overall gain
//! their difference.

use serde::{Deserialize, Serialize};

use crate::blup::{Cov2, JointPredictor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport<T = f64> {
    pub d_efficiency: T,
    pub trace_efficiency: T,
    pub efficiency_gain: T,
    pub efficiency_loss: T,
    pub overall_gain: T,
    pub joint_cov: Cov2<T>,
    pub marginal_cov: Cov2<T>,
}

pub fn efficiency_report<T: Scalar>(
    joint: &JointPredictor<T>,
    marginal_cov: Cov2<T>,
) -> Result<EfficiencyReport<T>> {
    compare_covariances(joint.v, marginal_cov)
}

/// Efficiency measures for any pair of 2 x 2 predictor covariances.
pub fn compare_covariances<T: Scalar>(
    joint_cov: Cov2<T>,
    marginal_cov: Cov2<T>,
) -> Result<EfficiencyReport<T>> {
    for (name, cov) in [("joint", &joint_cov), ("marginal", &marginal_cov)] {
        if [cov.v11, cov.v12, cov.v22].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance(format!(
                "{name} covariance has non-finite entries"
            )));
        }
        if cov.v11 < T::zero() || cov.v22 < T::zero() || cov.determinant() < T::zero() {
            return Err(Error::InvalidCovariance(format!(
                "{name} covariance is not positive semi-definite"
            )));
        }
    }
    let det_m = marginal_cov.determinant();
    let trace_m = marginal_cov.trace();
    if !(det_m > T::zero()) {
        return Err(Error::InvalidCovariance(format!(
            "marginal determinant {det_m} is not positive"
        )));
    }
    if !(trace_m > T::zero()) {
        return Err(Error::InvalidCovariance(format!(
            "marginal trace {trace_m} is not positive"
        )));
    }
    let d_efficiency = joint_cov.determinant() / det_m;
    let trace_efficiency = joint_cov.trace() / trace_m;
    let efficiency_gain = T::one() - d_efficiency;
    let efficiency_loss = T::one() - trace_efficiency;
    Ok(EfficiencyReport {
        d_efficiency,
        trace_efficiency,
        efficiency_gain,
        efficiency_loss,
        overall_gain: efficiency_gain - efficiency_loss,
        joint_cov,
        marginal_cov,
    })
}

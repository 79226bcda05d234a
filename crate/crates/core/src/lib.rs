//! Best linear unbiased estimation and prediction from Type-II censored
//! samples, with D-optimal joint prediction of two future order statistics.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). Moment
//! tables are always computed in `f64` and cast with [`MomentSet::cast`].

// Guards are written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blue;
pub mod blup;
pub mod cli;
pub mod efficiency;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod scalar;

pub use blue::{blue_estimate, BlueEstimate, CensoredSample, GlsSystem};
pub use blup::{
    check_joint_feasibility, covariance_from_constraints, joint_blup, joint_predictor,
    marginal_blup, marginal_pair_covariance, marginal_predictor,
    three_target_singularity_diagnostic, ConstraintCovariance, Cov2, Feasibility, JointPrediction,
    JointPredictor, PredictorWeights, SingularityDiagnostic,
};
pub use efficiency::{compare_covariances, efficiency_report, EfficiencyReport};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{Cholesky, Matrix};
pub use moments::{
    load_or_build_moments, CacheStatus, DistributionModel, Family, ModelClass, MomentCache,
    MomentEngine, MomentSet, Provenance, QuadratureSettings,
};
pub use scalar::Scalar;

pub type MomentSet64 = MomentSet<f64>;
pub type MomentSet32 = MomentSet<f32>;
pub type CensoredSample64 = CensoredSample<f64>;
pub type CensoredSample32 = CensoredSample<f32>;
pub type BlueEstimate64 = BlueEstimate<f64>;
pub type BlueEstimate32 = BlueEstimate<f32>;
pub type PredictorWeights64 = PredictorWeights<f64>;
pub type PredictorWeights32 = PredictorWeights<f32>;
pub type Cov2x64 = Cov2<f64>;
pub type Cov2x32 = Cov2<f32>;
pub type JointPredictor64 = JointPredictor<f64>;
pub type JointPredictor32 = JointPredictor<f32>;
pub type JointPrediction64 = JointPrediction<f64>;
pub type JointPrediction32 = JointPrediction<f32>;
pub type EfficiencyReport64 = EfficiencyReport<f64>;
pub type EfficiencyReport32 = EfficiencyReport<f32>;

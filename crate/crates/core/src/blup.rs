//! Marginal and D-optimal joint best linear unbiased predictors of future
//! order statistics.
//!
//! The marginal predictor of `X_{s:n}` corrects the fitted mean with the
//! GLS residual:
//!
//! ```text
//! X^_s = mu_hat + sigma_hat alpha_s + omega_s' Sigma^-1 (X - mu_hat 1 - sigma_hat alpha)
//! ```
//!
//! The joint predictors `(a'X, b'X)` of `(X_{s:n}, X_{t:n})` minimize the
//! determinant of their covariance subject to `a'1 = 1`, `a'alpha = alpha_s`,
//! `b'1 = 1`, `b'alpha = alpha_t`. Eliminating the Lagrange multipliers gives
//!
//! ```text
//! a_i = (1/Delta) sum_j (alpha_j - alpha_s)(S_j R_i - R_j S_i)
//! b_i = (1/Delta) sum_j (alpha_j - alpha_t)(S_j R_i - R_j S_i)
//! ```
//!
//! with `R = Sigma^-1 1` and `S = Sigma^-1 alpha`, and covariance
//! `V = (1/Delta) [alpha_(s)' Sigma^-1 alpha_(s), alpha_(t)' Sigma^-1 alpha_(s); ., alpha_(t)' Sigma^-1 alpha_(t)]`
//! where `alpha_(s) = alpha - alpha_s 1`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::blue::{BlueEstimate, CensoredSample, GlsSystem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::moments::{DistributionModel, ModelClass, MomentSet};
use crate::scalar::{dot, Scalar};

/// Linear predictor `weights' X` of the order statistic `X_{target_index:n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorWeights<T = f64> {
    pub target_index: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> PredictorWeights<T> {
    pub fn predict(&self, values: &[T]) -> T {
        dot(&self.weights, values)
    }

    /// Residuals `(w'1 - 1, w'alpha - alpha_target)` of the unbiasedness constraints.
    pub fn unbiasedness_residuals(&self, alpha_observed: &[T], alpha_target: T) -> (T, T) {
        let sum: T = self.weights.iter().copied().sum();
        (
            sum - T::one(),
            dot(&self.weights, alpha_observed) - alpha_target,
        )
    }
}

/// Symmetric 2 x 2 covariance matrix, in units of `sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cov2<T = f64> {
    pub v11: T,
    pub v12: T,
    pub v22: T,
}

impl<T: Scalar> Cov2<T> {
    /// `[x'Sx, x'Sy; x'Sy, y'Sy]`.
    pub fn from_weights(sigma: &Matrix<T>, x: &[T], y: &[T]) -> Self {
        let sx = sigma.mul_vec(x);
        let sy = sigma.mul_vec(y);
        Self {
            v11: dot(x, &sx),
            v12: dot(y, &sx),
            v22: dot(y, &sy),
        }
    }

    pub fn determinant(&self) -> T {
        self.v11 * self.v22 - self.v12 * self.v12
    }

    pub fn trace(&self) -> T {
        self.v11 + self.v22
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            v11: self.v11 * c,
            v12: self.v12 * c,
            v22: self.v22 * c,
        }
    }

    pub fn as_rows(&self) -> [[T; 2]; 2] {
        [[self.v11, self.v12], [self.v12, self.v22]]
    }
}

/// Coefficients and covariance of the D-optimal joint predictors of `X_{s:n}` and `X_{t:n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPredictor<T = f64> {
    pub s: usize,
    pub t: usize,
    pub a: PredictorWeights<T>,
    pub b: PredictorWeights<T>,
    /// Covariance of `(a'X, b'X)` from the closed-form expressions.
    pub v: Cov2<T>,
    pub row_sums_r: Vec<T>,
    pub row_sums_s: Vec<T>,
    pub delta: T,
}

impl<T: Scalar> JointPredictor<T> {
    pub fn predict(&self, sample: &CensoredSample<T>) -> JointPrediction<T> {
        JointPrediction {
            predicted_s: self.a.predict(sample.values()),
            predicted_t: self.b.predict(sample.values()),
            predictor: self.clone(),
        }
    }
}

/// Joint predictors applied to an observed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPrediction<T = f64> {
    #[serde(flatten)]
    pub predictor: JointPredictor<T>,
    pub predicted_s: T,
    pub predicted_t: T,
}

fn check_target(index: usize, r: usize, n: usize) -> Result<()> {
    if index <= r || index > n {
        return Err(Error::TargetOutOfRange { index, r, n });
    }
    Ok(())
}

fn check_pair<T: Scalar>(moments: &MomentSet<T>, r: usize, s: usize, t: usize) -> Result<(T, T)> {
    check_target(s, r, moments.n)?;
    check_target(t, r, moments.n)?;
    if s >= t {
        return Err(Error::TargetOrder { s, t });
    }
    let alpha_s = moments.alpha[s - 1];
    let alpha_t = moments.alpha[t - 1];
    let gap = (alpha_t - alpha_s).abs();
    if !(gap.to_f64_lossy() >= T::DEGENERACY_GAP) {
        return Err(Error::DegenerateTargets {
            s,
            t,
            gap: gap.to_f64_lossy(),
        });
    }
    Ok((alpha_s, alpha_t))
}

/// Explicit linear form of the marginal predictor of `X_{s:n}`.
fn marginal_weights<T: Scalar>(
    system: &GlsSystem<T>,
    moments: &MomentSet<T>,
    s: usize,
) -> PredictorWeights<T> {
    let r = system.r;
    let alpha_s = moments.alpha[s - 1];
    let omega: Vec<T> = (0..r).map(|i| moments.sigma[(i, s - 1)]).collect();
    let v = system.chol.solve(&omega);
    let v_one: T = v.iter().copied().sum();
    let v_alpha = dot(&v, &system.alpha);
    let (w_mu, w_sigma) = system.blue_weights();
    let weights = (0..r)
        .map(|i| w_mu[i] * (T::one() - v_one) + w_sigma[i] * (alpha_s - v_alpha) + v[i])
        .collect();
    PredictorWeights {
        target_index: s,
        weights,
    }
}

/// Linear weights of the marginal BLUP of `X_{s:n}` from the first `r` order statistics.
pub fn marginal_predictor<T: Scalar>(
    moments: &MomentSet<T>,
    r: usize,
    s: usize,
) -> Result<PredictorWeights<T>> {
    let system = GlsSystem::new(moments, r)?;
    check_target(s, r, moments.n)?;
    Ok(marginal_weights(&system, moments, s))
}

/// Marginal BLUP of `X_{s:n}`, returned both as explicit weights and as the
/// predicted value evaluated from the residual-correction form.
pub fn marginal_blup<T: Scalar>(
    sample: &CensoredSample<T>,
    moments: &MomentSet<T>,
    blue: &BlueEstimate<T>,
    s: usize,
) -> Result<(PredictorWeights<T>, T)> {
    let system = GlsSystem::new(moments, sample.r())?;
    system.check_sample(sample, moments.n)?;
    check_target(s, sample.r(), moments.n)?;
    if blue.mu_coefficients.len() != sample.r() {
        return Err(Error::DimensionMismatch {
            expected: sample.r(),
            found: blue.mu_coefficients.len(),
        });
    }
    let alpha_s = moments.alpha[s - 1];
    let omega: Vec<T> = (0..sample.r()).map(|i| moments.sigma[(i, s - 1)]).collect();
    let residual: Vec<T> = sample
        .values()
        .iter()
        .zip(&system.alpha)
        .map(|(&x, &a)| x - blue.mu_hat - blue.sigma_hat * a)
        .collect();
    let correction = dot(&system.chol.solve(&omega), &residual);
    let predicted = blue.mu_hat + blue.sigma_hat * alpha_s + correction;
    Ok((marginal_weights(&system, moments, s), predicted))
}

/// Covariance of the two marginal predictors, from their explicit weights.
pub fn marginal_pair_covariance<T: Scalar>(
    moments: &MomentSet<T>,
    r: usize,
    s: usize,
    t: usize,
) -> Result<Cov2<T>> {
    check_pair(moments, r, s, t)?;
    let system = GlsSystem::new(moments, r)?;
    let ds = marginal_weights(&system, moments, s);
    let dt = marginal_weights(&system, moments, t);
    Ok(Cov2::from_weights(&system.sigma, &ds.weights, &dt.weights))
}

// (1/Delta) sum_j (alpha_j - target)(S_j R_i - R_j S_i), for all i.
fn joint_coefficients<T: Scalar>(system: &GlsSystem<T>, target: T) -> Vec<T> {
    let centered: Vec<T> = system.alpha.iter().map(|&a| a - target).collect();
    let along_s = dot(&centered, &system.row_sums_s);
    let along_r = dot(&centered, &system.row_sums_r);
    system
        .row_sums_r
        .iter()
        .zip(&system.row_sums_s)
        .map(|(&ri, &si)| (along_s * ri - along_r * si) / system.delta)
        .collect()
}

// alpha_(x)' Sigma^-1 alpha_(y) = sum_i (alpha_i - x)(S_i - y R_i)
fn centered_form<T: Scalar>(system: &GlsSystem<T>, x: T, y: T) -> T {
    system
        .alpha
        .iter()
        .zip(system.row_sums_r.iter().zip(&system.row_sums_s))
        .map(|(&a, (&ri, &si))| (a - x) * (si - y * ri))
        .sum()
}

fn joint_from_system<T: Scalar>(
    system: &GlsSystem<T>,
    s: usize,
    t: usize,
    alpha_s: T,
    alpha_t: T,
) -> JointPredictor<T> {
    let delta = system.delta;
    JointPredictor {
        s,
        t,
        a: PredictorWeights {
            target_index: s,
            weights: joint_coefficients(system, alpha_s),
        },
        b: PredictorWeights {
            target_index: t,
            weights: joint_coefficients(system, alpha_t),
        },
        v: Cov2 {
            v11: centered_form(system, alpha_s, alpha_s) / delta,
            v12: centered_form(system, alpha_t, alpha_s) / delta,
            v22: centered_form(system, alpha_t, alpha_t) / delta,
        },
        row_sums_r: system.row_sums_r.clone(),
        row_sums_s: system.row_sums_s.clone(),
        delta,
    }
}

/// D-optimal joint predictor coefficients for targets `r < s < t <= n`.
pub fn joint_predictor<T: Scalar>(
    moments: &MomentSet<T>,
    r: usize,
    s: usize,
    t: usize,
) -> Result<JointPredictor<T>> {
    let (alpha_s, alpha_t) = check_pair(moments, r, s, t)?;
    let system = GlsSystem::new(moments, r)?;
    Ok(joint_from_system(&system, s, t, alpha_s, alpha_t))
}

/// D-optimal joint BLUPs of `X_{s:n}` and `X_{t:n}` for an observed sample.
pub fn joint_blup<T: Scalar>(
    sample: &CensoredSample<T>,
    moments: &MomentSet<T>,
    s: usize,
    t: usize,
) -> Result<JointPrediction<T>> {
    let (alpha_s, alpha_t) = check_pair(moments, sample.r(), s, t)?;
    let system = GlsSystem::new(moments, sample.r())?;
    system.check_sample(sample, moments.n)?;
    Ok(joint_from_system(&system, s, t, alpha_s, alpha_t).predict(sample))
}

/// Covariance entries recovered from the unbiasedness constraints alone.
///
/// Writing `a` and `b` through the stationarity conditions and imposing
/// `a'1 = 1, a'alpha = alpha_s` determines `(V11, V12)`; imposing
/// `b'1 = 1, b'alpha = alpha_t` determines `(V12, V22)`. The two values of
/// `V12` must agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCovariance<T> {
    pub v11: T,
    pub v12_from_a: T,
    pub v12_from_b: T,
    pub v22: T,
}

pub fn covariance_from_constraints<T: Scalar>(
    moments: &MomentSet<T>,
    r: usize,
    s: usize,
    t: usize,
) -> Result<ConstraintCovariance<T>> {
    let (alpha_s, alpha_t) = check_pair(moments, r, s, t)?;
    let sys = GlsSystem::new(moments, r)?;
    // 1' Sigma^-1 alpha_(x) and alpha' Sigma^-1 alpha_(x)
    let p = |x: T| sys.one_alpha - x * sys.one_one;
    let q = |x: T| sys.alpha_alpha - x * sys.one_alpha;
    let (pt, ps, qt, qs) = (p(alpha_t), p(alpha_s), q(alpha_t), q(alpha_s));
    // [-pt ps; -qt qs] [u; w] = (alpha_t - alpha_s) [1; rhs]
    let det = -pt * qs + ps * qt;
    let gap = alpha_t - alpha_s;
    let solve = |rhs: T| {
        let u = gap * (qs - ps * rhs) / det;
        let w = gap * (-pt * rhs + qt) / det;
        (u, w)
    };
    let (v11, v12_from_a) = solve(alpha_s);
    let (v12_from_b, v22) = solve(alpha_t);
    Ok(ConstraintCovariance {
        v11,
        v12_from_a,
        v12_from_b,
        v22,
    })
}

/// Outcome of asking whether joint BLUPs exist for a request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Feasibility {
    Feasible,
    /// Joint BLUPs exist only for exactly two targets.
    InfeasibleCount {
        requested: usize,
    },
    /// The model has no location parameter.
    InfeasibleFamily,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feasibility::Feasible => f.write_str("feasible"),
            Feasibility::InfeasibleCount { requested } if *requested > 2 => write!(
                f,
                "infeasible-count: D-optimal joint prediction of {requested} order statistics does not \
                 exist in a location-scale family (the constraint system is singular); request at most two targets"
            ),
            Feasibility::InfeasibleCount { requested } => write!(
                f,
                "infeasible-count: joint prediction needs exactly two targets, got {requested}"
            ),
            Feasibility::InfeasibleFamily => f.write_str(
                "infeasible-family: D-optimal joint predictors do not exist for a scale-only model \
                 (both multipliers vanish)",
            ),
        }
    }
}

/// Decides whether joint BLUPs exist for the requested target indices.
pub fn check_joint_feasibility(targets: &[usize], dist: &DistributionModel) -> Feasibility {
    let distinct: BTreeSet<usize> = targets.iter().copied().collect();
    if dist.class == ModelClass::ScaleOnly {
        return Feasibility::InfeasibleFamily;
    }
    if distinct.len() != 2 {
        return Feasibility::InfeasibleCount {
            requested: distinct.len(),
        };
    }
    Feasibility::Feasible
}

/// The 6 x 6 coefficient matrix of the three-target unbiasedness system in the
/// unknowns `(V11, V12, V13, V22, V23, V33)`, with its determinant.
#[derive(Debug, Clone)]
pub struct SingularityDiagnostic<T> {
    pub matrix: Matrix<T>,
    pub determinant: T,
    /// Product of the row 2-norms, the Hadamard bound on `|determinant|`.
    pub scale: T,
}

impl<T: Scalar> SingularityDiagnostic<T> {
    pub fn relative_determinant(&self) -> T {
        self.determinant.abs() / self.scale
    }
}

pub fn three_target_singularity_diagnostic<T: Scalar>(
    moments: &MomentSet<T>,
    r: usize,
    s: usize,
    t: usize,
    u: usize,
) -> Result<SingularityDiagnostic<T>> {
    for idx in [s, t, u] {
        check_target(idx, r, moments.n)?;
    }
    if !(s < t && t < u) {
        return Err(Error::TargetOrder { s, t: u });
    }
    let a = |i: usize| moments.alpha[i - 1];
    let (alpha_s, alpha_t, alpha_u) = (a(s), a(t), a(u));
    for (i, j, x, y) in [
        (s, t, alpha_s, alpha_t),
        (t, u, alpha_t, alpha_u),
        (s, u, alpha_s, alpha_u),
    ] {
        let gap = (y - x).abs().to_f64_lossy();
        if !(gap >= T::DEGENERACY_GAP) {
            return Err(Error::DegenerateTargets { s: i, t: j, gap });
        }
    }
    let sys = GlsSystem::new(moments, r)?;
    let big_r = sys.one_one;
    let big_r_star = sys.one_alpha;
    let q = sys.alpha_alpha;
    let a_entry = |num: T, den: T| (num * big_r - big_r_star) / den;
    let b_entry = |num: T, den: T| (num * big_r_star - q) / den;
    let (d1, d2, d3) = (alpha_t - alpha_s, alpha_u - alpha_t, alpha_s - alpha_u);
    let a1 = [
        a_entry(alpha_t, d1),
        a_entry(alpha_u, d2),
        a_entry(alpha_s, d3),
    ];
    let b1 = [
        b_entry(alpha_t, d1),
        b_entry(alpha_u, d2),
        b_entry(alpha_s, d3),
    ];
    let z = T::zero();
    let rows = vec![
        vec![a1[0], a1[1], a1[2], z, z, z],
        vec![b1[0], b1[1], b1[2], z, z, z],
        vec![z, a1[0], z, a1[1], a1[2], z],
        vec![z, b1[0], z, b1[1], b1[2], z],
        vec![z, z, a1[0], z, a1[1], a1[2]],
        vec![z, z, b1[0], z, b1[1], b1[2]],
    ];
    let matrix = Matrix::from_rows(&rows)?;
    let scale = rows
        .iter()
        .map(|row| dot(row, row).sqrt())
        .fold(T::one(), |acc, x| acc * x);
    Ok(SingularityDiagnostic {
        determinant: matrix.determinant(),
        matrix,
        scale,
    })
}

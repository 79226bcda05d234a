use std::collections::BTreeSet;

use serde::Serialize;

use super::config::AnalysisConfig;
use super::ingest::{ingest, InputFormat};
use super::SCHEMA_VERSION;
use crate::blue::{blue_estimate, BlueEstimate, CensoredSample};
use crate::blup::{
    check_joint_feasibility, joint_blup, joint_predictor, marginal_blup, marginal_pair_covariance,
    Cov2, JointPrediction, PredictorWeights,
};
use crate::efficiency::{efficiency_report, EfficiencyReport};
use crate::error::{Error, Result};
use crate::moments::{Family, ModelClass, MomentCache, MomentSet, Provenance};

#[derive(Debug, Clone, Serialize)]
pub struct MomentsDocument {
    pub schema_version: u32,
    pub family: Family,
    pub n: usize,
    pub provenance: Provenance,
    pub alpha: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateDocument {
    pub schema_version: u32,
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub values: Vec<f64>,
    pub blue: BlueEstimate<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalEntry {
    pub s: usize,
    pub predicted: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairEntry {
    pub s: usize,
    pub t: usize,
    pub marginal_s: f64,
    pub marginal_t: f64,
    pub joint: JointPrediction<f64>,
    pub marginal_cov: Cov2<f64>,
    pub efficiency: EfficiencyReport<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub values: Vec<f64>,
    pub moments_provenance: Provenance,
    pub blue: BlueEstimate<f64>,
    pub marginals: Vec<MarginalEntry>,
    pub pairs: Vec<PairEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyEntry {
    pub s: usize,
    pub t: usize,
    pub a: PredictorWeights<f64>,
    pub b: PredictorWeights<f64>,
    pub efficiency: EfficiencyReport<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyDocument {
    pub schema_version: u32,
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub pairs: Vec<EfficiencyEntry>,
}

pub fn load_moments(config: &AnalysisConfig) -> Result<MomentSet<f64>> {
    let dist = config.model;
    let result = match &config.cache_dir {
        Some(dir) => MomentCache::new(dir)
            .with_engine(config.engine())
            .load_or_build(&dist, config.n)
            .map(|(set, _)| set),
        None => config.engine().build(&dist, config.n),
    };
    result.map_err(|e| e.with_context(format!("moments for ({}, n = {})", dist.family, config.n)))
}

pub fn moments_document(config: &AnalysisConfig) -> Result<MomentsDocument> {
    let m = load_moments(config)?;
    Ok(MomentsDocument {
        schema_version: SCHEMA_VERSION,
        family: m.family,
        n: m.n,
        provenance: m.provenance,
        sigma: (0..m.n).map(|i| m.sigma.row(i).to_vec()).collect(),
        alpha: m.alpha,
    })
}

fn load_sample(config: &AnalysisConfig) -> Result<CensoredSample<f64>> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("an input file is required (--input)".into()))?;
    ingest(path, InputFormat::from_path(path), Some(config.n))
}

fn require_location_scale(config: &AnalysisConfig) -> Result<()> {
    if config.model.class == ModelClass::ScaleOnly {
        return Err(Error::InvalidConfig(
            "scale-only models support feasibility checks only; estimation assumes a location-scale family"
                .into(),
        ));
    }
    Ok(())
}

fn check_requests(config: &AnalysisConfig) -> Result<()> {
    for request in &config.targets {
        if let Some(w) = request.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::TargetOrder { s: w[0], t: w[1] });
        }
    }
    for request in config.targets.iter().filter(|req| req.len() > 1) {
        let verdict = check_joint_feasibility(request, &config.model);
        if !verdict.is_feasible() {
            return Err(Error::Infeasible(verdict).with_context(format!("targets {request:?}")));
        }
    }
    Ok(())
}

pub fn estimate(config: &AnalysisConfig) -> Result<EstimateDocument> {
    require_location_scale(config)?;
    let sample = load_sample(config)?;
    config.validate(sample.r())?;
    let m = load_moments(config)?;
    let blue = blue_estimate(&sample, &m).map_err(|e| e.with_context("BLUE"))?;
    Ok(EstimateDocument {
        schema_version: SCHEMA_VERSION,
        family: m.family,
        n: m.n,
        r: sample.r(),
        values: sample.values().to_vec(),
        blue,
    })
}

/// Moments, BLUE, marginal BLUPs, joint BLUPs and efficiencies for every
/// requested target or pair.
pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisReport> {
    check_requests(config)?;
    require_location_scale(config)?;
    let sample = load_sample(config)?;
    config.validate(sample.r())?;
    if config.targets.is_empty() {
        return Err(Error::InvalidConfig(
            "no targets requested (--targets)".into(),
        ));
    }
    let m = load_moments(config)?;
    analyze_sample(&sample, &m, &config.targets)
}

pub fn analyze_sample(
    sample: &CensoredSample<f64>,
    m: &MomentSet<f64>,
    targets: &[Vec<usize>],
) -> Result<AnalysisReport> {
    let r = sample.r();
    let blue = blue_estimate(sample, m).map_err(|e| e.with_context("BLUE"))?;

    let indices: BTreeSet<usize> = targets.iter().flatten().copied().collect();
    let mut marginals = Vec::with_capacity(indices.len());
    for &s in &indices {
        let (weights, predicted) = marginal_blup(sample, m, &blue, s)
            .map_err(|e| e.with_context(format!("marginal BLUP for s = {s}")))?;
        marginals.push(MarginalEntry {
            s,
            predicted,
            weights: weights.weights,
        });
    }
    let marginal_of = |s: usize| marginals.iter().find(|e| e.s == s).map(|e| e.predicted);

    let mut pairs = Vec::new();
    for request in targets.iter().filter(|req| req.len() == 2) {
        let (s, t) = (request[0], request[1]);
        let ctx = |stage: &str| format!("{stage} for (s, t) = ({s}, {t})");
        let joint = joint_blup(sample, m, s, t).map_err(|e| e.with_context(ctx("joint BLUP")))?;
        let marginal_cov = marginal_pair_covariance(m, r, s, t)
            .map_err(|e| e.with_context(ctx("marginal covariance")))?;
        let efficiency = efficiency_report(&joint.predictor, marginal_cov)
            .map_err(|e| e.with_context(ctx("efficiency")))?;
        pairs.push(PairEntry {
            s,
            t,
            marginal_s: marginal_of(s).unwrap_or(f64::NAN),
            marginal_t: marginal_of(t).unwrap_or(f64::NAN),
            joint,
            marginal_cov,
            efficiency,
        });
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        family: m.family,
        n: m.n,
        r,
        values: sample.values().to_vec(),
        moments_provenance: m.provenance,
        blue,
        marginals,
        pairs,
    })
}

/// Efficiency of joint over marginal predictors; needs only `n`, `r` and the pairs.
pub fn efficiency_analysis(config: &AnalysisConfig) -> Result<EfficiencyDocument> {
    check_requests(config)?;
    require_location_scale(config)?;
    let r = match (config.r, &config.input) {
        (Some(r), None) => r,
        (_, Some(_)) => load_sample(config)?.r(),
        (None, None) => {
            return Err(Error::InvalidConfig(
                "either --r or --input is required".into(),
            ))
        }
    };
    config.validate(r)?;
    let m = load_moments(config)?;
    let mut pairs = Vec::new();
    for request in &config.targets {
        let [s, t] = request[..] else {
            return Err(Error::InvalidConfig(format!(
                "efficiency compares pairs of targets, got {request:?}"
            )));
        };
        let ctx = |stage: &str| format!("{stage} for (s, t) = ({s}, {t})");
        let jp = joint_predictor(&m, r, s, t).map_err(|e| e.with_context(ctx("joint BLUP")))?;
        let mc = marginal_pair_covariance(&m, r, s, t)
            .map_err(|e| e.with_context(ctx("marginal covariance")))?;
        let efficiency =
            efficiency_report(&jp, mc).map_err(|e| e.with_context(ctx("efficiency")))?;
        pairs.push(EfficiencyEntry {
            s,
            t,
            a: jp.a,
            b: jp.b,
            efficiency,
        });
    }
    Ok(EfficiencyDocument {
        schema_version: SCHEMA_VERSION,
        family: m.family,
        n: m.n,
        r,
        pairs,
    })
}

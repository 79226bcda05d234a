//! Recomputes the published comparison and coefficient tables and checks
//! every cell against the printed value.

use std::path::Path;

use serde::Serialize;

use super::SCHEMA_VERSION;
use crate::blue::CensoredSample;
use crate::blup::joint_predictor;
use crate::cli::analysis::analyze_sample;
use crate::error::Result;
use crate::moments::{DistributionModel, MomentCache, MomentEngine, MomentSet};

pub const PREDICTION_TOLERANCE: f64 = 0.01;
pub const COEFFICIENT_TOLERANCE: f64 = 0.005;
pub const EFFICIENCY_TOLERANCE: f64 = 0.002;

/// Schmee and Hahn's first five failure times out of ten (normal model).
pub const SCHMEE_HAHN: [f64; 5] = [87.0, 92.8, 117.1, 133.6, 138.6];
pub const SCHMEE_HAHN_N: usize = 10;

/// One printed row of the joint-versus-marginal comparison.
#[derive(Debug, Clone, Copy)]
pub struct Table1Row {
    pub s: usize,
    pub t: usize,
    pub marginal: (f64, f64),
    pub joint: (f64, f64),
    pub d_efficiency: f64,
    pub trace_efficiency: f64,
    pub overall_gain: f64,
}

const fn row1(
    s: usize,
    t: usize,
    m: (f64, f64),
    j: (f64, f64),
    d: f64,
    tr: f64,
    g: f64,
) -> Table1Row {
    Table1Row {
        s,
        t,
        marginal: m,
        joint: j,
        d_efficiency: d,
        trace_efficiency: tr,
        overall_gain: g,
    }
}

pub const TABLE1: [Table1Row; 10] = [
    row1(
        6,
        7,
        (148.73, 158.99),
        (148.58, 158.86),
        0.9737,
        0.9937,
        0.0200,
    ),
    row1(
        6,
        8,
        (148.73, 170.36),
        (148.58, 170.25),
        0.9758,
        0.9954,
        0.0196,
    ),
    row1(
        6,
        9,
        (148.73, 184.37),
        (148.58, 184.29),
        0.9777,
        0.9968,
        0.0190,
    ),
    row1(
        6,
        10,
        (148.73, 206.19),
        (148.58, 206.12),
        0.9798,
        0.9980,
        0.0182,
    ),
    row1(
        7,
        8,
        (158.99, 170.36),
        (158.86, 170.25),
        0.9785,
        0.9966,
        0.0181,
    ),
    row1(
        7,
        9,
        (158.99, 184.37),
        (158.86, 184.29),
        0.9806,
        0.9976,
        0.0170,
    ),
    row1(
        7,
        10,
        (158.99, 206.19),
        (158.86, 206.12),
        0.9829,
        0.9985,
        0.0157,
    ),
    row1(
        8,
        9,
        (170.35, 184.37),
        (170.25, 184.29),
        0.9830,
        0.9983,
        0.0152,
    ),
    row1(
        8,
        10,
        (170.35, 206.18),
        (170.25, 206.12),
        0.9854,
        0.9989,
        0.0135,
    ),
    row1(
        9,
        10,
        (184.37, 206.18),
        (184.29, 206.12),
        0.9877,
        0.9992,
        0.0116,
    ),
];

/// One printed block of joint predictor coefficients for the normal parent.
#[derive(Debug, Clone, Copy)]
pub struct Table2Block {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub a: &'static [f64],
    pub b: &'static [f64],
}

const N10_A67: &[f64] = &[-0.1843, -0.0322, 0.0382, 0.0932, 1.0852];
const N10_B10: &[f64] = &[-0.8809, -0.3849, -0.1547, 0.0264, 2.3941];
const N15_A11: &[f64] = &[
    -0.1215, -0.0459, -0.0127, 0.0124, 0.0338, 0.0530, 0.0709, 0.0882, 0.1051, 0.8168,
];
const N15_B15: &[f64] = &[
    -0.4160, -0.2266, -0.1434, -0.0803, -0.0267, 0.0215, 0.0666, 0.1102, 0.1531, 1.5415,
];
const N20R5_A6: &[f64] = &[-0.1206, -0.0361, 0.0000, 0.0250, 1.1324];
const N20R5_B20: &[f64] = &[-1.5471, -0.8758, -0.5940, -0.3862, 4.4032];
const N20R10_A11: &[f64] = &[
    -0.0841, -0.0310, -0.0086, 0.0080, 0.0218, 0.0338, 0.0448, 0.0550, 0.0646, 0.8958,
];
const N20R10_B20: &[f64] = &[
    -0.5557, -0.3308, -0.2358, -0.1652, -0.1067, -0.0554, -0.0087, 0.0349, 0.0763, 2.3470,
];

pub const TABLE2: [Table2Block; 12] = [
    Table2Block {
        n: 10,
        r: 5,
        s: 6,
        t: 7,
        a: N10_A67,
        b: &[-0.3088, -0.0952, 0.0037, 0.0812, 1.3191],
    },
    Table2Block {
        n: 10,
        r: 5,
        s: 6,
        t: 10,
        a: N10_A67,
        b: N10_B10,
    },
    Table2Block {
        n: 10,
        r: 5,
        s: 9,
        t: 10,
        a: &[-0.6165, -0.2510, -0.0815, 0.0517, 1.8973],
        b: N10_B10,
    },
    Table2Block {
        n: 15,
        r: 10,
        s: 11,
        t: 12,
        a: N15_A11,
        b: &[
            -0.1696, -0.0754, -0.0341, -0.0027, 0.0239, 0.0478, 0.0702, 0.0917, 0.1130, 0.9351,
        ],
    },
    Table2Block {
        n: 15,
        r: 10,
        s: 11,
        t: 15,
        a: N15_A11,
        b: N15_B15,
    },
    Table2Block {
        n: 15,
        r: 10,
        s: 14,
        t: 15,
        a: &[
            -0.2982, -0.1543, -0.0912, -0.0432, -0.0025, 0.0341, 0.0683, 0.1014, 0.1339, 1.2517,
        ],
        b: N15_B15,
    },
    Table2Block {
        n: 20,
        r: 5,
        s: 6,
        t: 7,
        a: N20R5_A6,
        b: &[-0.2030, -0.0846, -0.0351, 0.0013, 1.3214],
    },
    Table2Block {
        n: 20,
        r: 5,
        s: 6,
        t: 20,
        a: N20R5_A6,
        b: N20R5_B20,
    },
    Table2Block {
        n: 20,
        r: 5,
        s: 19,
        t: 20,
        a: &[-1.2802, -0.7187, -0.4830, -0.3093, 3.7912],
        b: N20R5_B20,
    },
    Table2Block {
        n: 20,
        r: 10,
        s: 11,
        t: 12,
        a: N20R10_A11,
        b: &[
            -0.1168, -0.0518, -0.0243, -0.0040, 0.0129, 0.0277, 0.0411, 0.0536, 0.0654, 0.9962,
        ],
    },
    Table2Block {
        n: 20,
        r: 10,
        s: 11,
        t: 20,
        a: N20R10_A11,
        b: N20R10_B20,
    },
    Table2Block {
        n: 20,
        r: 10,
        s: 19,
        t: 20,
        a: &[
            -0.4356, -0.2545, -0.1779, -0.1211, -0.0740, -0.0327, 0.0049, 0.0400, 0.0733, 1.9774,
        ],
        b: N20R10_B20,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellCheck {
    pub label: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CellCheck {
    fn new(label: String, computed: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            pass: (computed - expected).abs() <= tolerance,
            label,
            computed,
            expected,
            tolerance,
        }
    }

    pub fn delta(&self) -> f64 {
        self.computed - self.expected
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproductionReport {
    pub schema_version: u32,
    pub table: Table,
    pub cells: Vec<CellCheck>,
    /// Claims that are checked as conditions rather than against a printed number.
    pub conditions: Vec<(String, bool)>,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass) && self.conditions.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.pass).count()
            + self.conditions.iter().filter(|(_, ok)| !ok).count()
    }

    pub fn cells_with_prefix<'a>(
        &'a self,
        prefix: &'a str,
    ) -> impl Iterator<Item = &'a CellCheck> + 'a {
        self.cells
            .iter()
            .filter(move |c| c.label.starts_with(prefix))
    }
}

fn normal_moments(n: usize, cache_dir: Option<&Path>) -> Result<MomentSet<f64>> {
    let dist = DistributionModel::normal();
    match cache_dir {
        Some(dir) => MomentCache::new(dir)
            .load_or_build(&dist, n)
            .map(|(m, _)| m),
        None => MomentEngine::default().build(&dist, n),
    }
}

pub fn reproduce(which: Table, cache_dir: Option<&Path>) -> Result<ReproductionReport> {
    match which {
        Table::Table1 => reproduce_table1(cache_dir),
        Table::Table2 => reproduce_table2(cache_dir),
    }
}

pub fn reproduce_table1(cache_dir: Option<&Path>) -> Result<ReproductionReport> {
    let m = normal_moments(SCHMEE_HAHN_N, cache_dir)?;
    let sample = CensoredSample::new(SCHMEE_HAHN_N, SCHMEE_HAHN.to_vec())?;
    let targets: Vec<Vec<usize>> = TABLE1.iter().map(|row| vec![row.s, row.t]).collect();
    let report = analyze_sample(&sample, &m, &targets)?;

    let mut cells = Vec::new();
    let mut conditions = Vec::new();
    for (row, pair) in TABLE1.iter().zip(&report.pairs) {
        let tag = format!("({}, {})", row.s, row.t);
        let p = PREDICTION_TOLERANCE;
        let e = EFFICIENCY_TOLERANCE;
        cells.push(CellCheck::new(
            format!("marginal X^({}) {tag}", row.s),
            pair.marginal_s,
            row.marginal.0,
            p,
        ));
        cells.push(CellCheck::new(
            format!("marginal X^({}) {tag}", row.t),
            pair.marginal_t,
            row.marginal.1,
            p,
        ));
        cells.push(CellCheck::new(
            format!("joint X~({}) {tag}", row.s),
            pair.joint.predicted_s,
            row.joint.0,
            p,
        ));
        cells.push(CellCheck::new(
            format!("joint X~({}) {tag}", row.t),
            pair.joint.predicted_t,
            row.joint.1,
            p,
        ));
        let eff = &pair.efficiency;
        cells.push(CellCheck::new(
            format!("D-efficiency {tag}"),
            eff.d_efficiency,
            row.d_efficiency,
            e,
        ));
        cells.push(CellCheck::new(
            format!("trace-efficiency {tag}"),
            eff.trace_efficiency,
            row.trace_efficiency,
            e,
        ));
        cells.push(CellCheck::new(
            format!("overall gain {tag}"),
            eff.overall_gain,
            row.overall_gain,
            e,
        ));
        conditions.push((
            format!("overall gain {tag} positive"),
            eff.overall_gain > 0.0,
        ));
    }
    Ok(ReproductionReport {
        schema_version: SCHEMA_VERSION,
        table: Table::Table1,
        cells,
        conditions,
    })
}

pub fn reproduce_table2(cache_dir: Option<&Path>) -> Result<ReproductionReport> {
    let mut cells = Vec::new();
    let mut cached: Vec<MomentSet<f64>> = Vec::new();
    for block in &TABLE2 {
        if !cached.iter().any(|m| m.n == block.n) {
            cached.push(normal_moments(block.n, cache_dir)?);
        }
        let m = cached
            .iter()
            .find(|m| m.n == block.n)
            .expect("loaded above");
        let jp = joint_predictor(m, block.r, block.s, block.t)?;
        let tag = format!("n={} {}|{},{}", block.n, block.r, block.s, block.t);
        for (i, (&got, &want)) in jp.a.weights.iter().zip(block.a).enumerate() {
            cells.push(CellCheck::new(
                format!("{tag} a{}", i + 1),
                got,
                want,
                COEFFICIENT_TOLERANCE,
            ));
        }
        for (i, (&got, &want)) in jp.b.weights.iter().zip(block.b).enumerate() {
            cells.push(CellCheck::new(
                format!("{tag} b{}", i + 1),
                got,
                want,
                COEFFICIENT_TOLERANCE,
            ));
        }
    }
    Ok(ReproductionReport {
        schema_version: SCHEMA_VERSION,
        table: Table::Table2,
        cells,
        conditions: Vec::new(),
    })
}

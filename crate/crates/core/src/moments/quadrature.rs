//! Composite Gauss-Legendre evaluation of order-statistic moments.
//!
//! Single moments integrate `x^k f_{i:n}(x)` over a truncated support. Product
//! moments use the joint density of `(Z_{i:n}, Z_{j:n})` on the triangle
//! `x < y`, integrating `y` over `[x, upper]` for every outer node `x`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DistributionModel;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Truncated support, in standardized units.
    pub lower: f64,
    pub upper: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl QuadratureSettings {
    pub fn total_nodes(&self) -> usize {
        self.panels * self.nodes_per_panel
    }
}

pub(crate) struct QuadratureMoments {
    pub alpha: Vec<f64>,
    /// `E[Z_i Z_j]`, full symmetric matrix with `E[Z_i^2]` on the diagonal.
    pub product: Matrix<f64>,
    /// Worst relative violation of the sum identities for first, second and
    /// cross moments.
    pub residual: f64,
}

struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

struct Rule {
    abscissae: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(nodes: usize) -> Self {
        let degree = NonZeroUsize::new(nodes.max(1)).expect("non-zero node count");
        let rule = GaussLegendre::new(degree);
        let (abscissae, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        Self { abscissae, weights }
    }

    fn composite(&self, lower: f64, upper: f64, panels: usize) -> Grid {
        let panels = panels.max(1);
        let h = (upper - lower) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * self.abscissae.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..panels {
            let a = lower + p as f64 * h;
            for (x, w) in self.abscissae.iter().zip(&self.weights) {
                nodes.push(a + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Grid { nodes, weights }
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

fn powers(base: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut acc = 1.0;
    for _ in 0..count {
        out.push(acc);
        acc *= base;
    }
    out
}

/// Integrates `density` over the truncated support with the given settings.
pub(crate) fn integrate(settings: &QuadratureSettings, f: impl Fn(f64) -> f64) -> f64 {
    let grid = Rule::new(settings.nodes_per_panel).composite(
        settings.lower,
        settings.upper,
        settings.panels,
    );
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w * f(x))
        .sum()
}

pub(crate) struct SingleMoments {
    pub alpha: Vec<f64>,
    pub second: Vec<f64>,
    pub residual: f64,
}

/// `E[Z_{i:n}]` and `E[Z_{i:n}^2]` only.
pub(crate) fn single_moments(
    dist: &DistributionModel,
    n: usize,
    settings: &QuadratureSettings,
) -> SingleMoments {
    let grid = Rule::new(settings.nodes_per_panel).composite(
        settings.lower,
        settings.upper,
        settings.panels,
    );
    single_on_grid(dist, n, &grid)
}

fn single_on_grid(dist: &DistributionModel, n: usize, grid: &Grid) -> SingleMoments {
    let lf = log_factorials(n);
    // n! / ((i-1)! (n-i)!) for i = 1..n
    let coef: Vec<f64> = (1..=n)
        .map(|i| (lf[n] - lf[i - 1] - lf[n - i]).exp())
        .collect();

    let mut alpha = vec![0.0; n];
    let mut second = vec![0.0; n];
    for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
        let fx = dist.pdf(x);
        if fx == 0.0 {
            continue;
        }
        let cdf_pow = powers(dist.cdf(x), n);
        let sf_pow = powers(dist.sf(x), n);
        for i in 1..=n {
            let g = w * fx * coef[i - 1] * cdf_pow[i - 1] * sf_pow[n - i];
            alpha[i - 1] += x * g;
            second[i - 1] += x * x * g;
        }
    }

    let nf = n as f64;
    let first_resid = (alpha.iter().sum::<f64>() - nf * dist.mean()).abs() / nf;
    let second_resid = (second.iter().sum::<f64>() - nf * dist.second_moment()).abs()
        / (nf * dist.second_moment());
    SingleMoments {
        alpha,
        second,
        residual: first_resid.max(second_resid),
    }
}

pub(crate) fn order_statistic_moments(
    dist: &DistributionModel,
    n: usize,
    settings: &QuadratureSettings,
) -> QuadratureMoments {
    let rule = Rule::new(settings.nodes_per_panel);
    let outer = rule.composite(settings.lower, settings.upper, settings.panels);
    let lf = log_factorials(n);
    let SingleMoments {
        alpha,
        second,
        residual: single_resid,
    } = single_on_grid(dist, n, &outer);

    // Outer nodes are independent; results are summed afterwards in node order
    // so the output does not depend on thread scheduling.
    let contributions: Vec<Vec<f64>> = outer
        .nodes
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(&x, &wx)| cross_moment_slice(dist, n, &rule, settings, &lf, x, wx))
        .collect();

    let mut product = Matrix::zeros(n, n);
    for slice in &contributions {
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                product[(i, j)] += slice[idx];
                idx += 1;
            }
        }
    }
    for i in 0..n {
        product[(i, i)] = second[i];
        for j in 0..i {
            product[(i, j)] = product[(j, i)];
        }
    }

    let mean = dist.mean();
    let m2 = dist.second_moment();
    let nf = n as f64;
    let cross: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| product[(i, j)])
        .sum();
    let cross_resid = if n > 1 {
        (2.0 * cross - nf * (nf - 1.0) * mean * mean).abs() / (nf * (nf - 1.0) * m2)
    } else {
        0.0
    };

    QuadratureMoments {
        alpha,
        product,
        residual: single_resid.max(cross_resid),
    }
}

/// Contribution of one outer node `x` to every `E[Z_i Z_j]`, `i < j`, packed
/// row-wise over the strict upper triangle.
fn cross_moment_slice(
    dist: &DistributionModel,
    n: usize,
    rule: &Rule,
    settings: &QuadratureSettings,
    lf: &[f64],
    x: f64,
    wx: f64,
) -> Vec<f64> {
    let pairs = n * n.saturating_sub(1) / 2;
    let mut out = vec![0.0; pairs];
    let fx = dist.pdf(x);
    if n < 2 || fx == 0.0 || x >= settings.upper {
        return out;
    }
    let cdf_x = dist.cdf(x);
    let sf_x = dist.sf(x);

    // inner[k][m] = sum_y w_y y f(y) (F(y) - F(x))^k S(y)^m, k + m <= n - 2
    let width = n - 1;
    let mut inner = vec![0.0; width * width];
    let grid = rule.composite(x, settings.upper, settings.panels);
    for (&y, &wy) in grid.nodes.iter().zip(&grid.weights) {
        let fy = dist.pdf(y);
        if fy == 0.0 {
            continue;
        }
        let sf_y = dist.sf(y);
        // Take the difference from whichever tail keeps full precision.
        let between = if cdf_x > 0.5 {
            sf_x - sf_y
        } else {
            dist.cdf(y) - cdf_x
        };
        let between_pow = powers(between.max(0.0), width);
        let sf_pow = powers(sf_y, width);
        let g = wy * y * fy;
        for k in 0..width {
            let gk = g * between_pow[k];
            for m in 0..width - k {
                inner[k * width + m] += gk * sf_pow[m];
            }
        }
    }

    let cdf_pow = powers(cdf_x, n);
    let outer_g = wx * x * fx;
    let mut idx = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            let coef = (lf[n] - lf[i - 1] - lf[j - i - 1] - lf[n - j]).exp();
            let k = j - i - 1;
            let m = n - j;
            out[idx] = outer_g * coef * cdf_pow[i - 1] * inner[k * width + m];
            idx += 1;
        }
    }
    out
}

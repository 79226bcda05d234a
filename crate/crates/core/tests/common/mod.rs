//! Independent oracles shared by the integration tests. Nothing here calls
//! the crate's own solvers; moment tables are the only input taken from it.

#![allow(dead_code)]

use joint_blup::{DistributionModel, MomentEngine, MomentSet};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn moments(dist: &DistributionModel, n: usize) -> MomentSet<f64> {
    MomentEngine::default().build(dist, n).unwrap()
}

/// Moment tables for n = 1..=max_n, indexed by n.
pub fn moment_tables(dist: &DistributionModel, max_n: usize) -> Vec<Option<MomentSet<f64>>> {
    (0..=max_n)
        .map(|n| (n > 0).then(|| moments(dist, n)))
        .collect()
}

pub fn leading_sigma(m: &MomentSet<f64>, r: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, r, |i, j| m.sigma[(i, j)])
}

pub fn alpha_vec(m: &MomentSet<f64>, r: usize) -> DVector<f64> {
    DVector::from_iterator(r, m.alpha[..r].iter().copied())
}

fn design(m: &MomentSet<f64>, r: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, 2, |i, j| if j == 0 { 1.0 } else { m.alpha[i] })
}

/// Exponential moments straight from the spacings representation.
pub fn exponential_closed_form(n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rate = |k: usize| 1.0 / (n - k) as f64;
    let alpha = (1..=n).map(|i| (0..i).map(rate).sum()).collect();
    let sigma = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| (0..i.min(j)).map(|k| rate(k).powi(2)).sum())
                .collect()
        })
        .collect();
    (alpha, sigma)
}

/// Minimizes `(X - mu 1 - sigma alpha)' Sigma^-1 (X - mu 1 - sigma alpha)` by
/// the normal equations with an explicit inverse.
pub fn gls_oracle(m: &MomentSet<f64>, x: &[f64]) -> (f64, f64) {
    let r = x.len();
    let w = leading_sigma(m, r).try_inverse().unwrap();
    let c = design(m, r);
    let lhs = c.transpose() * &w * &c;
    let rhs = c.transpose() * &w * DVector::from_column_slice(x);
    let theta = lhs.try_inverse().unwrap() * rhs;
    (theta[0], theta[1])
}

/// Solves `min d'Sigma d - 2 d'omega` subject to `d'1 = 1`, `d'alpha = alpha_s`
/// through its KKT system.
pub fn marginal_oracle(m: &MomentSet<f64>, r: usize, s: usize) -> Vec<f64> {
    let sigma = leading_sigma(m, r);
    let c = design(m, r);
    let mut kkt = DMatrix::zeros(r + 2, r + 2);
    kkt.view_mut((0, 0), (r, r)).copy_from(&(2.0 * &sigma));
    kkt.view_mut((0, r), (r, 2)).copy_from(&c);
    kkt.view_mut((r, 0), (2, r)).copy_from(&c.transpose());
    let mut rhs = DVector::zeros(r + 2);
    for i in 0..r {
        rhs[i] = 2.0 * m.sigma[(i, s - 1)];
    }
    rhs[r] = 1.0;
    rhs[r + 1] = m.alpha[s - 1];
    let sol = kkt.lu().solve(&rhs).unwrap();
    sol.rows(0, r).iter().copied().collect()
}

pub struct BruteForce {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub det: f64,
}

fn det_v(sigma: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (sa, sb) = (sigma * a, sigma * b);
    a.dot(&sa) * b.dot(&sb) - a.dot(&sb).powi(2)
}

/// Numerical minimizer of `det V(a, b)` over all `(a, b)` meeting the four
/// unbiasedness constraints.
///
/// Works in null-space coordinates `a = a0 + N p`, `b = b0 + N q`: block
/// coordinate descent (each block is a convex quadratic) from several random
/// starts, then Newton steps on the full problem.
pub fn brute_force_joint(
    m: &MomentSet<f64>,
    r: usize,
    s: usize,
    t: usize,
    seed: u64,
) -> BruteForce {
    let sigma = leading_sigma(m, r);
    let c = design(m, r);
    let ct = c.transpose();
    let particular = |target: f64| -> DVector<f64> {
        let rhs = DVector::from_vec(vec![1.0, target]);
        &c * (&ct * &c).try_inverse().unwrap() * rhs
    };
    let a0 = particular(m.alpha[s - 1]);
    let b0 = particular(m.alpha[t - 1]);
    let k = r - 2;
    if k == 0 {
        let det = det_v(&sigma, &a0, &b0);
        return BruteForce {
            a: a0.iter().copied().collect(),
            b: b0.iter().copied().collect(),
            det,
        };
    }
    // Eigenvectors of the projector onto the orthogonal complement of span(C)
    // with eigenvalue one span the null space of C'.
    let projector = DMatrix::identity(r, r) - &c * (&ct * &c).try_inverse().unwrap() * &ct;
    let eig = projector.symmetric_eigen();
    let cols: Vec<usize> = (0..r).filter(|&j| eig.eigenvalues[j] > 0.5).collect();
    assert_eq!(cols.len(), k);
    let null = DMatrix::from_fn(r, k, |i, j| eig.eigenvectors[(i, cols[j])]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(DVector<f64>, DVector<f64>, f64)> = None;
    for _ in 0..6 {
        let mut p = DVector::from_fn(k, |_, _| rng.gen_range(-2.0..2.0));
        let mut q = DVector::from_fn(k, |_, _| rng.gen_range(-2.0..2.0));
        for _ in 0..400 {
            p = block_step(&sigma, &null, &a0, &(&b0 + &null * &q));
            q = block_step(&sigma, &null, &b0, &(&a0 + &null * &p));
        }
        newton_polish(&sigma, &null, &a0, &b0, &mut p, &mut q);
        let a = &a0 + &null * &p;
        let b = &b0 + &null * &q;
        let det = det_v(&sigma, &a, &b);
        if best.as_ref().is_none_or(|(_, _, d)| det < *d) {
            best = Some((a, b, det));
        }
    }
    let (a, b, det) = best.unwrap();
    BruteForce {
        a: a.iter().copied().collect(),
        b: b.iter().copied().collect(),
        det,
    }
}

/// Exact minimizer over `p` of `det V(x0 + N p, other)`, a quadratic form in `p`.
fn block_step(
    sigma: &DMatrix<f64>,
    null: &DMatrix<f64>,
    x0: &DVector<f64>,
    other: &DVector<f64>,
) -> DVector<f64> {
    let so = sigma * other;
    let m = other.dot(&so) * sigma - &so * so.transpose();
    let h = null.transpose() * &m * null;
    let g = null.transpose() * &m * x0;
    h.lu().solve(&(-g)).unwrap()
}

fn newton_polish(
    sigma: &DMatrix<f64>,
    null: &DMatrix<f64>,
    a0: &DVector<f64>,
    b0: &DVector<f64>,
    p: &mut DVector<f64>,
    q: &mut DVector<f64>,
) {
    let k = p.len();
    for _ in 0..50 {
        let a = a0 + null * &*p;
        let b = b0 + null * &*q;
        let (sa, sb) = (sigma * &a, sigma * &b);
        let (va, vb, vab) = (a.dot(&sa), b.dot(&sb), a.dot(&sb));
        let ga = 2.0 * vb * &sa - 2.0 * vab * &sb;
        let gb = 2.0 * va * &sb - 2.0 * vab * &sa;
        let haa = 2.0 * vb * sigma - 2.0 * &sb * sb.transpose();
        let hbb = 2.0 * va * sigma - 2.0 * &sa * sa.transpose();
        let hab = 4.0 * &sa * sb.transpose() - 2.0 * &sb * sa.transpose() - 2.0 * vab * sigma;
        let nt = null.transpose();
        let mut grad = DVector::zeros(2 * k);
        grad.rows_mut(0, k).copy_from(&(&nt * ga));
        grad.rows_mut(k, k).copy_from(&(&nt * gb));
        if grad.norm() < 1e-15 {
            break;
        }
        let mut hess = DMatrix::zeros(2 * k, 2 * k);
        hess.view_mut((0, 0), (k, k)).copy_from(&(&nt * haa * null));
        hess.view_mut((k, k), (k, k)).copy_from(&(&nt * hbb * null));
        let cross = &nt * hab * null;
        hess.view_mut((0, k), (k, k)).copy_from(&cross);
        hess.view_mut((k, 0), (k, k)).copy_from(&cross.transpose());
        let Some(step) = hess.lu().solve(&(-grad)) else {
            break;
        };
        let current = det_v(sigma, &a, &b);
        let mut scale = 1.0;
        loop {
            let np = &*p + scale * step.rows(0, k);
            let nq = &*q + scale * step.rows(k, k);
            let cand = det_v(sigma, &(a0 + null * &np), &(b0 + null * &nq));
            if cand <= current || scale < 1e-6 {
                if cand <= current {
                    *p = np;
                    *q = nq;
                }
                break;
            }
            scale *= 0.5;
        }
    }
}

/// Empirical moments of standard normal order statistics.
pub struct MonteCarlo {
    pub alpha: Vec<f64>,
    pub alpha_se: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub sigma_se: Vec<Vec<f64>>,
}

/// `draws` sorted samples of size `n`, split into `batches` equal batches;
/// standard errors come from the spread of the batch estimates.
pub fn monte_carlo_normal(n: usize, draws: usize, batches: usize, seed: u64) -> MonteCarlo {
    let per_batch = draws / batches;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch_alpha = Vec::with_capacity(batches);
    let mut batch_sigma = Vec::with_capacity(batches);
    let mut z = vec![0.0f64; n];
    for _ in 0..batches {
        let mut sum = vec![0.0; n];
        let mut cross = vec![vec![0.0; n]; n];
        for _ in 0..per_batch {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            z.sort_by(f64::total_cmp);
            for i in 0..n {
                sum[i] += z[i];
                for j in i..n {
                    cross[i][j] += z[i] * z[j];
                }
            }
        }
        let nb = per_batch as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nb).collect();
        let cov: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let (lo, hi) = (i.min(j), i.max(j));
                        (cross[lo][hi] - nb * mean[i] * mean[j]) / (nb - 1.0)
                    })
                    .collect()
            })
            .collect();
        batch_alpha.push(mean);
        batch_sigma.push(cov);
    }
    let b = batches as f64;
    let mean_se = |vals: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = vals.collect();
        let mu = v.iter().sum::<f64>() / b;
        let var = v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (b - 1.0);
        (mu, (var / b).sqrt())
    };
    let mut alpha = vec![0.0; n];
    let mut alpha_se = vec![0.0; n];
    let mut sigma = vec![vec![0.0; n]; n];
    let mut sigma_se = vec![vec![0.0; n]; n];
    for i in 0..n {
        (alpha[i], alpha_se[i]) = mean_se(&mut batch_alpha.iter().map(|a| a[i]));
        for j in 0..n {
            (sigma[i][j], sigma_se[i][j]) = mean_se(&mut batch_sigma.iter().map(|c| c[i][j]));
        }
    }
    MonteCarlo {
        alpha,
        alpha_se,
        sigma,
        sigma_se,
    }
}

/// `|x - y| <= tol * max(|x|, |y|)`, with magnitudes below 1e-12 treated as 1e-12.
pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-12)
}

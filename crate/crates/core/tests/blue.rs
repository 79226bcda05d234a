mod common;

use joint_blup::{blue_estimate, CensoredSample, DistributionModel, GlsSystem, MomentSet};
use proptest::prelude::*;

const SCHMEE_HAHN: [f64; 5] = [87.0, 92.8, 117.1, 133.6, 138.6];

fn model(exponential: bool) -> DistributionModel {
    if exponential {
        DistributionModel::exponential()
    } else {
        DistributionModel::normal()
    }
}

fn noise_free(m: &MomentSet<f64>, r: usize, mu: f64, sigma: f64) -> CensoredSample<f64> {
    CensoredSample::new(m.n, m.alpha[..r].iter().map(|a| mu + sigma * a).collect()).unwrap()
}

#[test]
fn schmee_hahn_matches_gls_oracle() {
    let m = common::moments(&DistributionModel::normal(), 10);
    let sample = CensoredSample::new(10, SCHMEE_HAHN.to_vec()).unwrap();
    let est = blue_estimate(&sample, &m).unwrap();
    let (mu, sigma) = common::gls_oracle(&m, &SCHMEE_HAHN);
    assert!(common::rel_close(est.mu_hat, mu, 1e-10));
    assert!(common::rel_close(est.sigma_hat, sigma, 1e-10));
}

#[test]
fn noise_free_recovery_every_case() {
    for exponential in [false, true] {
        for n in [3, 6, 10, 15] {
            let m = common::moments(&model(exponential), n);
            for r in 2..n {
                let est = blue_estimate(&noise_free(&m, r, 5.0, 2.0), &m).unwrap();
                assert!((est.mu_hat - 5.0).abs() < 1e-10, "n={n} r={r}");
                assert!((est.sigma_hat - 2.0).abs() < 1e-10, "n={n} r={r}");
            }
        }
    }
}

#[test]
fn two_observations_interpolate() {
    for exponential in [false, true] {
        let m = common::moments(&model(exponential), 7);
        let x = [1.3, 4.1];
        let est = blue_estimate(&CensoredSample::new(7, x.to_vec()).unwrap(), &m).unwrap();
        for (a, xi) in m.alpha.iter().zip(x) {
            assert!((est.mu_hat + est.sigma_hat * a - xi).abs() < 1e-10);
        }
    }
}

fn case() -> impl Strategy<Value = (bool, usize, usize)> {
    (any::<bool>(), 3usize..=20).prop_flat_map(|(e, n)| (Just(e), Just(n), 2..n))
}

fn sample_strategy() -> impl Strategy<Value = (bool, usize, usize, Vec<f64>)> {
    case().prop_flat_map(|(e, n, r)| {
        (
            Just(e),
            Just(n),
            Just(r),
            proptest::collection::vec(0.05f64..3.0, r),
        )
            .prop_map(|(e, n, r, gaps)| {
                let mut acc = 10.0;
                let values = gaps.iter().map(|g| {
                    acc += g;
                    acc
                });
                (e, n, r, values.collect())
            })
    })
}

thread_local! {
    static TABLES: [Vec<Option<MomentSet<f64>>>; 2] = [
        common::moment_tables(&DistributionModel::normal(), 20),
        common::moment_tables(&DistributionModel::exponential(), 20),
    ];
}

fn with_moments<R>(exponential: bool, n: usize, f: impl FnOnce(&MomentSet<f64>) -> R) -> R {
    TABLES.with(|t| f(t[exponential as usize][n].as_ref().unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn affine_equivariance((e, n, _r, values) in sample_strategy(), c in 0.01f64..50.0, d in -500.0f64..500.0) {
        with_moments(e, n, |m| {
            let sample = CensoredSample::new(n, values).unwrap();
            let base = blue_estimate(&sample, m).unwrap();
            let moved = blue_estimate(&sample.affine(c, d).unwrap(), m).unwrap();
            prop_assert!(common::rel_close(moved.mu_hat, c * base.mu_hat + d, 1e-9));
            prop_assert!(common::rel_close(moved.sigma_hat, c * base.sigma_hat, 1e-9));
            prop_assert_eq!(&moved.mu_coefficients, &base.mu_coefficients);
            Ok(())
        })?;
    }

    #[test]
    fn weights_unbiased_and_variances_consistent((e, n, r) in case()) {
        with_moments(e, n, |m| {
            let sys = GlsSystem::new(m, r).unwrap();
            let (wm, ws) = sys.blue_weights();
            let alpha = &m.alpha[..r];
            let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            let one = vec![1.0; r];
            prop_assert!((dot(&wm, &one) - 1.0).abs() < 1e-10);
            prop_assert!(dot(&wm, alpha).abs() < 1e-10);
            prop_assert!(dot(&ws, &one).abs() < 1e-10);
            prop_assert!((dot(&ws, alpha) - 1.0).abs() < 1e-10);

            let sigma = common::leading_sigma(m, r);
            let quad = |x: &[f64], y: &[f64]| {
                let (x, y) = (nalgebra::DVector::from_column_slice(x), nalgebra::DVector::from_column_slice(y));
                x.dot(&(&sigma * y))
            };
            let est = blue_estimate(&CensoredSample::new(n, (1..=r).map(|i| i as f64).collect()).unwrap(), m).unwrap();
            prop_assert!(common::rel_close(est.var_mu, quad(&wm, &wm), 1e-10));
            prop_assert!(common::rel_close(est.var_sigma, quad(&ws, &ws), 1e-10));
            prop_assert!(common::rel_close(est.cov_mu_sigma, quad(&wm, &ws), 1e-10));

            let inv = sigma.clone().try_inverse().unwrap();
            let a = common::alpha_vec(m, r);
            let o = nalgebra::DVector::from_element(r, 1.0);
            let delta = o.dot(&(&inv * &o)) * a.dot(&(&inv * &a)) - o.dot(&(&inv * &a)).powi(2);
            prop_assert!(est.delta > 0.0);
            prop_assert!(common::rel_close(est.delta, delta, 1e-10));
            Ok(())
        })?;
    }
}

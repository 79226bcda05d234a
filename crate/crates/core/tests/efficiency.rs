mod common;

use joint_blup::{
    efficiency_report, joint_predictor, marginal_pair_covariance, CensoredSample,
    DistributionModel, MomentSet,
};
use proptest::prelude::*;

fn report(m: &MomentSet<f64>, r: usize, s: usize, t: usize) -> joint_blup::EfficiencyReport<f64> {
    let jp = joint_predictor(m, r, s, t).unwrap();
    efficiency_report(&jp, marginal_pair_covariance(m, r, s, t).unwrap()).unwrap()
}

#[test]
fn published_first_and_last_rows() {
    let m = common::moments(&DistributionModel::normal(), 10);
    let first = report(&m, 5, 6, 7);
    assert!((first.d_efficiency - 0.9737).abs() <= 0.002);
    assert!((first.trace_efficiency - 0.9937).abs() <= 0.002);
    assert!((first.overall_gain - 0.0200).abs() <= 0.002);
    let last = report(&m, 5, 9, 10);
    assert!((last.d_efficiency - 0.9877).abs() <= 0.002);
    assert!((last.trace_efficiency - 0.9992).abs() <= 0.002);
    assert!((last.overall_gain - 0.0116).abs() <= 0.002);
}

#[test]
fn published_rows_are_internally_consistent() {
    // (D-efficiency, trace-efficiency, overall gain) as printed.
    let rows: [(f64, f64, f64); 10] = [
        (0.9737, 0.9937, 0.0200),
        (0.9758, 0.9954, 0.0196),
        (0.9777, 0.9968, 0.0190),
        (0.9798, 0.9980, 0.0182),
        (0.9785, 0.9966, 0.0181),
        (0.9806, 0.9976, 0.0170),
        (0.9829, 0.9985, 0.0157),
        (0.9830, 0.9983, 0.0152),
        (0.9854, 0.9989, 0.0135),
        (0.9877, 0.9992, 0.0116),
    ];
    for (d, tr, g) in rows {
        // Printed to four decimals, so one unit in the last place; the extra
        // slack absorbs binary representation of the decimal inputs.
        assert!(((1.0 - d) - (1.0 - tr) - g).abs() <= 1e-4 + 1e-12);
    }
}

#[test]
fn efficiency_does_not_depend_on_data() {
    // Ratios are functions of (n, r, s, t) only; the data enter through sigma^2, which cancels.
    let m = common::moments(&DistributionModel::normal(), 10);
    let sample = CensoredSample::new(10, vec![1.0, 2.0, 3.5, 4.0, 4.2]).unwrap();
    let joint = joint_blup::joint_blup(&sample, &m, 6, 8).unwrap();
    let via_sample = efficiency_report(
        &joint.predictor,
        marginal_pair_covariance(&m, 5, 6, 8).unwrap(),
    )
    .unwrap();
    assert_eq!(via_sample, report(&m, 5, 6, 8));
}

fn pair_case() -> impl Strategy<Value = (bool, usize, usize, usize, usize)> {
    (any::<bool>(), 4usize..=15)
        .prop_flat_map(|(e, n)| (Just(e), Just(n), 2..n - 1))
        .prop_flat_map(|(e, n, r)| (Just(e), Just(n), Just(r), r + 1..n))
        .prop_flat_map(|(e, n, r, s)| (Just(e), Just(n), Just(r), Just(s), s + 1..=n))
}

thread_local! {
    static TABLES: [Vec<Option<MomentSet<f64>>>; 2] = [
        common::moment_tables(&DistributionModel::normal(), 15),
        common::moment_tables(&DistributionModel::exponential(), 15),
    ];
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identities_and_dominance((e, n, r, s, t) in pair_case(), c in 0.01f64..100.0) {
        TABLES.with(|tables| {
            let m = tables[e as usize][n].as_ref().unwrap();
            let rep = report(m, r, s, t);
            prop_assert_eq!(rep.efficiency_gain, 1.0 - rep.d_efficiency);
            prop_assert_eq!(rep.efficiency_loss, 1.0 - rep.trace_efficiency);
            prop_assert_eq!(rep.overall_gain, rep.efficiency_gain - rep.efficiency_loss);
            prop_assert!(rep.d_efficiency <= 1.0 + 1e-12);
            let scaled = joint_blup::compare_covariances(rep.joint_cov.scaled(c), rep.marginal_cov.scaled(c)).unwrap();
            // det V loses digits to cancellation when the two predictors are
            // strongly correlated (v11 v22 / det reaches ~5e3 for exponential n = 14).
            prop_assert!((scaled.d_efficiency - rep.d_efficiency).abs() < 1e-10);
            prop_assert!((scaled.trace_efficiency - rep.trace_efficiency).abs() < 1e-12);
            Ok(())
        })?;
    }
}

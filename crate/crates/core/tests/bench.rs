use cdinn::arch::{build, Kind, NetworkSpec};
use cdinn::bench::{
    camel3_plus5, classify_2d, default_function_data, delay_dataset, delay_targets, function_grid, matyas_plus5,
    mse, multiples_in, regression_1d, spill_concentration, spill_grid, sumpower_plus5, table2, train,
    AffineScaler, ClassKind, Experiment, ExperimentConfig, Method, RegressionKind, Report, SpillParams,
    TestFunction, TrainConfig,
};
use cdinn::nn::Matrix;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn test_functions_at_known_points() {
    assert_eq!(camel3_plus5(&[0.0, 0.0]), 5.0);
    // 2 - 1.05 + 1/6 + 1 + 1 + 5
    assert!(close(camel3_plus5(&[1.0, 1.0]), 8.0 + 1.0 / 6.0 - 0.05, 1e-14));
    assert_eq!(sumpower_plus5(&[0.0; 5]), 5.0);
    assert_eq!(sumpower_plus5(&[-1.0; 5]), 10.0);
    // |x0|^2 + |x1|^3 at (0.5, -0.5)
    assert!(close(sumpower_plus5(&[0.5, -0.5, 0.0, 0.0, 0.0]), 5.375, 1e-15));
    assert_eq!(matyas_plus5(&[0.0, 0.0]), 5.0);
    assert!(close(matyas_plus5(&[10.0, -10.0]), 105.0, 1e-14));
    assert!(close(matyas_plus5(&[1.0, 1.0]), 5.04, 1e-14));
}

#[test]
fn function_grids_have_documented_sizes_and_ranges() {
    for (f, n, w) in [(TestFunction::Camel, 41 * 41, 5.0), (TestFunction::Sumpower, 4000, 1.0), (TestFunction::Matyas, 41 * 41, 10.0)] {
        let ds = default_function_data(f, 1).unwrap();
        assert_eq!(ds.len(), n, "{f:?}");
        assert_eq!(ds.input_dim(), f.dim());
        for i in 0..ds.len() {
            assert!(ds.input(i).iter().all(|v| v.abs() <= w));
            assert_eq!(ds.target(i), f.eval(ds.input(i)));
        }
    }
    let small = function_grid(TestFunction::Camel, 3, 0, 0).unwrap();
    assert_eq!(small.input(0), &[-5.0, -5.0]);
    assert_eq!(small.input(8), &[5.0, 5.0]);
}

#[test]
fn matyas_symmetry_and_camel_parity() {
    for &(a, b) in &[(0.3, -2.0), (4.0, 1.5), (-7.0, 9.0)] {
        assert_eq!(matyas_plus5(&[a, b]), matyas_plus5(&[b, a]));
        assert!(close(camel3_plus5(&[a, b]), camel3_plus5(&[-a, -b]), 1e-14));
    }
}

#[test]
fn spill_source_is_one_sided_in_time() {
    let p = SpillParams::default();
    assert_eq!(spill_concentration(0.5, 0.0, &p), 0.0);
    // the second event contributes nothing until just after t = 10
    let before = spill_concentration(0.8, 10.0, &p);
    let after = spill_concentration(0.8, 10.02, &p);
    assert!(after > 10.0 * before.max(1e-3), "{before} -> {after}");
}

#[test]
fn spill_grid_peaks_just_after_second_event() {
    let p = SpillParams::default();
    let ds = spill_grid(&p, 0.02).unwrap();
    assert_eq!(ds.len(), 50 * 750);
    let best = (0..ds.len()).max_by(|&a, &b| ds.target(a).total_cmp(&ds.target(b))).unwrap();
    let x = ds.input(best);
    assert!(close(x[0], 0.8, 1e-12) && close(x[1], 10.02, 1e-12), "{x:?}");
    assert_eq!(multiples_in(0.01, 0.07, 0.02), vec![0.02, 0.04, 0.06]);
}

#[test]
fn delay_targets_sum_four_previous_inputs() {
    assert_eq!(delay_targets(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), vec![0.0, 1.0, 3.0, 6.0, 10.0, 14.0]);
    let ds = delay_dataset(3, 5, 2).unwrap();
    assert_eq!(ds.len(), 3);
    for i in 0..3 {
        let u: Vec<f64> = ds.sequence(i).into_iter().map(|s| s[0]).collect();
        assert_eq!(ds.targets.row(i), delay_targets(&u).as_slice());
    }
}

#[test]
fn generators_are_deterministic_per_seed() {
    let a = classify_2d(ClassKind::Moons, 100, 0.1, 4).unwrap();
    let b = classify_2d(ClassKind::Moons, 100, 0.1, 4).unwrap();
    let c = classify_2d(ClassKind::Moons, 100, 0.1, 5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.inputs, c.inputs);
    assert_eq!(regression_1d(RegressionKind::Cubic, 50, 1).unwrap(), regression_1d(RegressionKind::Cubic, 50, 1).unwrap());
}

#[test]
fn classes_are_balanced_labels() {
    let ds = classify_2d(ClassKind::Circles, 200, 0.0, 0).unwrap();
    let ones = (0..ds.len()).filter(|&i| ds.target(i) == 1.0).count();
    assert_eq!(ones, 100);
    for i in 0..ds.len() {
        let r = ds.input(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        let want = if ds.target(i) == 1.0 { 0.5 } else { 1.0 };
        assert!(close(r, want, 1e-12));
    }
}

#[test]
fn zero_epochs_leave_the_network_untouched() {
    let ds = regression_1d(RegressionKind::Sine, 40, 0).unwrap();
    let net = build(&NetworkSpec::new(Kind::Cdinn1, 1, vec![5]).with_seed(2)).unwrap();
    let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
    let (trained, loss) = train(net.clone(), &ds, &cfg).unwrap();
    assert_eq!(trained, net);
    assert_eq!(loss, mse(&net, &ds).unwrap());
}

#[test]
fn training_reduces_loss_and_rejects_shape_mismatch() {
    let ds = regression_1d(RegressionKind::Quadratic, 100, 0).unwrap();
    let net = build(&NetworkSpec::new(Kind::Icnn, 1, vec![8]).with_seed(1)).unwrap();
    let before = mse(&net, &ds).unwrap();
    let cfg = TrainConfig { epochs: 200, batch_size: Some(20), ..TrainConfig::default() };
    let (_, after) = train(net, &ds, &cfg).unwrap();
    assert!(after < before * 0.1, "{before} -> {after}");

    let wrong = build(&NetworkSpec::new(Kind::Icnn, 2, vec![8])).unwrap();
    assert!(train(wrong, &ds, &cfg).is_err());
    let seq = delay_dataset(4, 5, 0).unwrap();
    let ff = build(&NetworkSpec::new(Kind::Standard, 1, vec![3])).unwrap();
    assert!(train(ff, &seq, &cfg).is_err());
}

#[test]
fn degenerate_scaler_is_rejected() {
    assert!(AffineScaler::new(vec![1.0], vec![1.0]).is_err());
    assert!(AffineScaler::fit(&Matrix::from_rows(&[vec![2.0, 1.0], vec![2.0, 3.0]]).unwrap()).is_err());
}

proptest! {
    #[test]
    fn scaler_round_trips_and_maps_constraints(
        lo in prop::collection::vec(-50.0..0.0f64, 3),
        span in prop::collection::vec(0.1..80.0f64, 3),
        x in prop::collection::vec(-60.0..60.0f64, 3),
        g in prop::collection::vec(-3.0..3.0f64, 3),
        h in -20.0..20.0f64,
    ) {
        let hi: Vec<f64> = lo.iter().zip(&span).map(|(l, s)| l + s).collect();
        let sc = AffineScaler::new(lo.clone(), hi.clone()).unwrap();
        let back = sc.inverse_transform(&sc.transform(&x));
        for (a, b) in back.iter().zip(&x) {
            prop_assert!(close(*a, *b, 1e-12));
        }
        let ends = sc.transform(&lo);
        prop_assert!(ends.iter().all(|v| close(*v, -1.0, 1e-12)));
        // g.x <= h in original units is the mapped row on scaled inputs
        let (row, rhs) = sc.map_constraint(&g, h);
        let s = sc.transform(&x);
        let orig: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - h;
        let mapped: f64 = row.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() - rhs;
        prop_assert!((orig - mapped).abs() <= 1e-9 * (1.0 + orig.abs()));
    }
}

#[test]
fn table2_smoke_run_produces_complete_rows() {
    let cfg = ExperimentConfig { epochs: 3, restarts: Some(1), ..ExperimentConfig::default() };
    let report = table2(&cfg, &[TestFunction::Matyas]).unwrap();
    // two CDiNN kinds with CCP, two GD settings for the standard net, each at two tolerances
    assert_eq!(report.rows.len(), 2 * 2 + 2 * 2);
    assert_eq!(report.ccp_runs.len(), 2 * 2);
    for r in &report.rows {
        assert_eq!(r.x_opt.len(), 2);
        assert!(close(r.y_opt, matyas_plus5(&r.x_opt), 1e-15));
        assert!(r.x_opt.iter().all(|v| v.abs() <= 10.0 + 1e-9));
        if r.kind == Kind::Standard {
            assert!(matches!(r.method, Method::Subgrad { .. }));
        } else {
            assert_eq!(r.method, Method::Ccp);
        }
    }
    let tables = Report::Table2(report).tables();
    assert_eq!(tables.len(), 1);
    assert!(tables[0].rows.iter().all(|row| row.len() == tables[0].header.len()));
}

#[test]
fn experiment_names_round_trip() {
    for e in Experiment::ALL {
        assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
    }
    assert!("table9".parse::<Experiment>().is_err());
}

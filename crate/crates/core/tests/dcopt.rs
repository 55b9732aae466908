use cdinn::arch::{build, dc_split, max_affine_construct, FeedForward, Kind, NetworkSpec};
use cdinn::dcopt::{
    ccp_optimize, epigraph_lp, filtered_subgrad, linearize_concave, CcpConfig, ConstraintSet,
    StepSchedule, SubgradConfig, Termination, Units,
};
use cdinn::lp::{solve_lp, LpStatus};
use cdinn::Error;
use proptest::prelude::*;

fn abs_net() -> FeedForward {
    max_affine_construct(&[(vec![1.0], 0.0), (vec![-1.0], 0.0)]).unwrap()
}

/// `|x| - |x - 0.5|` as a two-trunk network.
fn kinked_difference() -> FeedForward {
    let mut net = abs_net();
    let shifted = max_affine_construct(&[(vec![1.0], -0.5), (vec![-1.0], 0.5)]).unwrap();
    net.spec.kind = Kind::Cdinn2;
    net.branches.push(shifted.branches[0].clone());
    net.signs = vec![1.0, -1.0];
    net
}

fn ff(kind: Kind, d: usize, hidden: Vec<usize>, seed: u64) -> FeedForward {
    build(&NetworkSpec::new(kind, d, hidden).with_seed(seed))
        .unwrap()
        .as_feedforward()
        .unwrap()
        .clone()
}

fn unit_box(d: usize) -> ConstraintSet {
    ConstraintSet::boxed(vec![-1.0; d], vec![1.0; d]).unwrap()
}

/// Minimum over a `(n+1)^2` grid of `[-1,1]^2`, and an L1 gradient bound.
fn grid_min(f: impl Fn(&[f64]) -> f64, grad: impl Fn(&[f64]) -> Vec<f64>, n: usize) -> (f64, f64) {
    let mut best = f64::INFINITY;
    let mut lip: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let x = [-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64];
            best = best.min(f(&x));
            lip = lip.max(grad(&x).iter().map(|g| g.abs()).sum());
        }
    }
    (best, lip)
}

#[test]
fn abs_lp_minimum_at_origin() {
    let net = abs_net();
    let split = dc_split(&net).unwrap();
    let lp = epigraph_lp(&split.f1, &[0.0], 0.0, &unit_box(1)).unwrap();
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(s.value.abs() < 1e-12);
    assert!(s.x[0].abs() < 1e-12);
}

#[test]
fn abs_with_linear_term_matches_vertices() {
    let net = abs_net();
    let split = dc_split(&net).unwrap();
    let lp = epigraph_lp(&split.f1, &[-0.5], 0.0, &unit_box(1)).unwrap();
    let s = solve_lp(&lp).unwrap();
    let brute = (0..=2000)
        .map(|i| -1.0 + i as f64 / 1000.0)
        .map(|x: f64| x.abs() - 0.5 * x)
        .fold(f64::INFINITY, f64::min);
    assert!((s.value - brute).abs() < 1e-9);
    assert!(s.value.abs() < 1e-12);
}

#[test]
fn icnn_lp_matches_dense_grid() {
    for seed in [1u64, 2, 3] {
        let net = ff(Kind::Icnn, 2, vec![8, 8], seed);
        let split = dc_split(&net).unwrap();
        assert!(split.f2.is_zero());
        let s = solve_lp(&epigraph_lp(&split.f1, &[0.0, 0.0], 0.0, &unit_box(2)).unwrap()).unwrap();
        let n = 400;
        let (best, lip) = grid_min(|x| net.eval(x), |x| net.input_gradient(x).unwrap(), n);
        let h = 2.0 / n as f64;
        assert!(s.value <= best + 1e-7, "lp {} grid {best}", s.value);
        assert!(s.value >= best - lip * h, "lp {} grid {best} L {lip}", s.value);
        // the LP point evaluates to the LP value
        assert!((net.eval(&s.x[..2]) - s.value).abs() < 1e-8);
    }
}

#[test]
fn pc_relu_cdinn_piece_is_tight() {
    for seed in [4u64, 5] {
        let mut net = ff(Kind::Cdinn1, 2, vec![6, 6], seed);
        // spread slopes over [0, 1]
        for (k, layer) in net.branches[0].layers.iter_mut().enumerate() {
            for (i, a) in layer.slope.iter_mut().enumerate() {
                *a = ((i + k) % 5) as f64 / 4.0;
            }
        }
        let split = dc_split(&net).unwrap();
        let f1 = &split.f1;
        let s = solve_lp(&epigraph_lp(f1, &[0.3, -0.2], 0.1, &unit_box(2)).unwrap()).unwrap();
        let n = 300;
        let obj = |x: &[f64]| f1.eval(x) + 0.3 * x[0] - 0.2 * x[1] + 0.1;
        let (best, lip) = grid_min(obj, |x| {
            let mut g = f1.value_and_gradient(x).1;
            g[0] += 0.3;
            g[1] -= 0.2;
            g
        }, n);
        assert!(s.value <= best + 1e-7);
        assert!(s.value >= best - lip * 2.0 / n as f64);
    }
}

#[test]
fn epigraph_rejects_bad_input() {
    let net = abs_net();
    let split = dc_split(&net).unwrap();
    assert!(matches!(epigraph_lp(&split.f1, &[0.0, 0.0], 0.0, &unit_box(1)), Err(Error::Dimension(_))));
    let mut piece = split.f1.clone();
    piece.weights[0] = -1.0;
    assert!(matches!(epigraph_lp(&piece, &[0.0], 0.0, &unit_box(1)), Err(Error::Contract(_))));
}

#[test]
fn linearization_is_tangent_and_minorant() {
    let net = abs_net();
    let split = dc_split(&net).unwrap();
    let (q, r) = linearize_concave(&split.f1, &[2.0]);
    assert_eq!(q, vec![-1.0]);
    assert_eq!(r, 0.0);
    // -|x| <= -x everywhere, equal at x0 = 2
    for i in -20..=20 {
        let x = i as f64 / 4.0;
        assert!(-x.abs() <= q[0] * x + r + 1e-15);
    }
}

#[test]
fn zero_piece_linearizes_to_zero() {
    let net = ff(Kind::Icnn, 3, vec![4], 9);
    let split = dc_split(&net).unwrap();
    let (q, r) = linearize_concave(&split.f2, &[0.3, -0.1, 0.9]);
    assert_eq!(q, vec![0.0; 3]);
    assert_eq!(r, 0.0);
}

#[test]
fn ccp_solves_convex_case_in_one_step() {
    let net = abs_net();
    let trace = ccp_optimize(&net, &unit_box(1), &CcpConfig::new(vec![0.7])).unwrap();
    assert_eq!(trace.termination, Termination::Converged);
    assert!(trace.iterations() <= 2);
    assert!(trace.final_x()[0].abs() < 1e-12);
    assert!(trace.final_objective().abs() < 1e-12);
}

#[test]
fn ccp_on_kinked_difference() {
    let net = kinked_difference();
    for x0 in [-0.8, 0.2, 0.9] {
        let trace = ccp_optimize(&net, &unit_box(1), &CcpConfig::new(vec![x0])).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!((trace.final_objective() + 0.5).abs() < 1e-9, "x0 {x0}: {}", trace.final_objective());
        assert!(trace.worst_ascent() <= 1e-7);
    }
}

#[test]
fn ccp_respects_affine_rows() {
    // minimise |x| - |x - 0.5| with x >= 0.3: optimum moves to the boundary region
    let net = kinked_difference();
    let cons = ConstraintSet::new(vec![-1.0], vec![1.0], vec![vec![-1.0]], vec![-0.3]).unwrap();
    let trace = ccp_optimize(&net, &cons, &CcpConfig::new(vec![0.9])).unwrap();
    for r in &trace.records {
        assert!(cons.contains(&r.x, 1e-8));
    }
    // f = 2x - 0.5 on [0, 0.5], so the constrained minimum is 0.1 at 0.3
    assert!((trace.final_objective() - 0.1).abs() < 1e-9);
}

#[test]
fn ccp_maximize_flips_direction() {
    let net = abs_net();
    let mut cfg = CcpConfig::new(vec![0.2]);
    cfg.maximize = true;
    let trace = ccp_optimize(&net, &unit_box(1), &cfg).unwrap();
    assert!((trace.final_objective() - 1.0).abs() < 1e-12);
    assert!(trace.worst_ascent() <= 1e-7);
}

#[test]
fn ccp_rejects_bad_configs() {
    let net = abs_net();
    let mut cfg = CcpConfig::new(vec![1.5]);
    assert!(matches!(ccp_optimize(&net, &unit_box(1), &cfg), Err(Error::Config(_))));
    cfg.x0 = vec![0.0];
    cfg.epsilon = 0.0;
    assert!(matches!(ccp_optimize(&net, &unit_box(1), &cfg), Err(Error::Config(_))));
    let deep = ff(Kind::Standard, 1, vec![4, 4], 1);
    assert!(matches!(
        ccp_optimize(&deep, &unit_box(1), &CcpConfig::new(vec![0.0])),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn empty_constraint_set_is_rejected() {
    let r = ConstraintSet::new(vec![0.0], vec![1.0], vec![vec![1.0]], vec![-0.5]);
    assert!(matches!(r, Err(Error::Infeasible(_))));
    assert!(ConstraintSet::boxed(vec![1.0], vec![0.0]).is_err());
}

#[test]
fn subgrad_descends_on_convex_net() {
    let net = abs_net();
    let mut cfg = SubgradConfig::new(0.05, StepSchedule::Constant, vec![0.93]);
    cfg.beta = 0.0;
    cfg.epsilon = 1e-12;
    let trace = filtered_subgrad(&net, &unit_box(1), &cfg, false).unwrap();
    let objs: Vec<f64> = trace.records.iter().map(|r| r.objective).collect();
    // monotone until it reaches the kink
    let first_up = objs.windows(2).position(|w| w[1] > w[0]).unwrap_or(objs.len());
    assert!(first_up >= 18);
    assert!(objs.iter().cloned().fold(f64::INFINITY, f64::min) < 0.05);
}

#[test]
fn subgrad_filter_and_schedule() {
    // f = |x|: gradient is sign(x) away from 0, so the iterates are explicit
    let net = abs_net();
    let mut cfg = SubgradConfig::new(0.1, StepSchedule::OverK, vec![0.9]);
    cfg.max_iterations = 3;
    cfg.epsilon = 1e-12;
    let trace = filtered_subgrad(&net, &unit_box(1), &cfg, false).unwrap();
    // s1 = 0.75, x1 = 0.9 - 0.1*0.75; s2 = 0.75 + 0.25*0.75, x2 = x1 - 0.05*s2
    let s1 = 0.75;
    let x1 = 0.9 - 0.1 * s1;
    let s2 = 0.75 + 0.25 * s1;
    let x2 = x1 - 0.05 * s2;
    assert!((trace.records[1].x[0] - x1).abs() < 1e-15);
    assert!((trace.records[2].x[0] - x2).abs() < 1e-15);
    assert_eq!(trace.termination, Termination::MaxIter);
}

#[test]
fn subgrad_steps_in_rescaled_units() {
    // network |s| with x = 2s and y = 3|s| = 1.5|x|
    let net = abs_net();
    let mut cfg = SubgradConfig::new(0.1, StepSchedule::Constant, vec![0.9]);
    cfg.beta = 0.0;
    cfg.max_iterations = 1;
    cfg.units = Some(Units { input: vec![2.0], output: 3.0 });
    let trace = filtered_subgrad(&net, &unit_box(1), &cfg, false).unwrap();
    // x: 1.8 -> 1.8 - 0.1 * 1.5 = 1.65, s = 0.825
    assert!((trace.records[1].x[0] - 0.825).abs() < 1e-15);

    // |dy| = 3 * 0.075 is above a tolerance of 0.2 only in rescaled units
    cfg.max_iterations = 5;
    cfg.epsilon = 0.2;
    let raw = filtered_subgrad(&net, &unit_box(1), &SubgradConfig { units: None, ..cfg.clone() }, false).unwrap();
    let scaled = filtered_subgrad(&net, &unit_box(1), &cfg, false).unwrap();
    assert_eq!(raw.iterations(), 1);
    assert!(scaled.iterations() > 1);

    cfg.units = Some(Units { input: vec![0.0], output: 1.0 });
    assert!(matches!(filtered_subgrad(&net, &unit_box(1), &cfg, false), Err(Error::Config(_))));
    cfg.units = Some(Units { input: vec![1.0, 1.0], output: 1.0 });
    assert!(matches!(filtered_subgrad(&net, &unit_box(1), &cfg, false), Err(Error::Dimension(_))));
}

#[test]
fn subgrad_clips_to_box_and_maximizes() {
    let net = abs_net();
    let cfg = SubgradConfig::new(5.0, StepSchedule::Constant, vec![0.1]);
    let trace = filtered_subgrad(&net, &unit_box(1), &cfg, true).unwrap();
    assert!(trace.records.iter().all(|r| r.x[0].abs() <= 1.0));
    assert_eq!(trace.final_x(), &[1.0]);
    assert_eq!(trace.termination, Termination::Converged);
}

#[test]
fn subgrad_validates_config() {
    let net = abs_net();
    let mut cfg = SubgradConfig::new(0.0, StepSchedule::Constant, vec![0.0]);
    assert!(filtered_subgrad(&net, &unit_box(1), &cfg, false).is_err());
    cfg.alpha0 = 1.0;
    cfg.beta = 1.0;
    assert!(filtered_subgrad(&net, &unit_box(1), &cfg, false).is_err());
    assert_eq!("over_k".parse::<StepSchedule>().unwrap(), StepSchedule::OverK);
    assert!("linear".parse::<StepSchedule>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ccp_descends_and_surrogate_majorizes(seed in 0u64..1000, kind in prop::sample::select(vec![Kind::Cdinn1, Kind::Cdinn2]),
                                           x0 in prop::collection::vec(-1.0f64..1.0, 2)) {
        let net = ff(kind, 2, vec![6, 6], seed);
        let cons = unit_box(2);
        let mut cfg = CcpConfig::new(x0);
        cfg.max_iterations = 30;
        let trace = ccp_optimize(&net, &cons, &cfg).unwrap();
        prop_assert!(trace.worst_ascent() <= 1e-7);
        let split = dc_split(&net).unwrap();
        let mut rng_state = seed;
        for r in &trace.records {
            prop_assert!(cons.in_box(&r.x));
            let (q, off) = linearize_concave(&split.f2, &r.x);
            let surrogate = |x: &[f64]| split.f1.eval(x) + q.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + off;
            prop_assert!((surrogate(&r.x) - net.eval(&r.x)).abs() <= 1e-9);
            for _ in 0..50 {
                // small LCG for probe points
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (rng_state >> 11) as f64 / (1u64 << 53) as f64;
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = (rng_state >> 11) as f64 / (1u64 << 53) as f64;
                let p = [2.0 * u - 1.0, 2.0 * v - 1.0];
                prop_assert!(surrogate(&p) >= net.eval(&p) - 1e-9);
            }
        }
        // the recorded surrogate bounds the objective at the new iterate
        for r in trace.records.iter().skip(1) {
            prop_assert!(r.objective <= r.surrogate.unwrap() + 1e-9);
        }
    }

    #[test]
    fn convex_ccp_is_global(seed in 0u64..1000) {
        let net = ff(Kind::Icnn, 2, vec![5], seed);
        let trace = ccp_optimize(&net, &unit_box(2), &CcpConfig::new(vec![0.5, 0.5])).unwrap();
        prop_assert!(trace.iterations() <= 2);
        let n = 200;
        let (best, lip) = grid_min(|x| net.eval(x), |x| net.input_gradient(x).unwrap(), n);
        prop_assert!(trace.final_objective() <= best + 1e-7);
        prop_assert!(trace.final_objective() >= best - lip * 2.0 / n as f64);
    }
}

use cdinn::lp::{solve_lp, LpProblem, LpStatus};
use proptest::prelude::*;

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in 0..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum over all feasible vertices; None when no vertex is feasible.
/// Only valid for problems with a bounded feasible region.
fn vertex_oracle(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let mut rows: Vec<(Vec<f64>, f64)> = p.rows.iter().cloned().zip(p.rhs.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), p.upper[j]));
        rows.push((e.iter().map(|v| -v).collect(), -p.lower[j]));
    }
    let k = rows.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if p.max_violation(&x) <= 1e-9 {
                let v = p.objective_value(&x);
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn abs_epigraph_has_zero_minimum() {
    // min t s.t. x <= t, -x <= t, x in [-1, 1]
    let mut p = LpProblem::new(2);
    p.objective = vec![0.0, 1.0];
    p.set_bounds(0, -1.0, 1.0);
    p.add_le(vec![1.0, -1.0], 0.0);
    p.add_le(vec![-1.0, -1.0], 0.0);
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(s.value.abs() < 1e-12);
    assert!(p.max_violation(&s.x) < 1e-12);
}

#[test]
fn simplex_corner_value() {
    let mut p = LpProblem::new(2);
    p.objective = vec![-1.0, -1.0];
    p.set_bounds(0, 0.0, 1.0);
    p.set_bounds(1, 0.0, 1.0);
    p.add_le(vec![1.0, 1.0], 1.0);
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.value + 1.0).abs() < 1e-12);
}

#[test]
fn contradictory_rows_are_infeasible() {
    let mut p = LpProblem::new(1);
    p.add_le(vec![1.0], -1.0);
    p.add_le(vec![-1.0], -1.0);
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn crossed_bounds_are_infeasible() {
    let mut p = LpProblem::new(1);
    p.set_bounds(0, 1.0, 0.0);
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn free_direction_is_unbounded() {
    let mut p = LpProblem::new(2);
    p.objective = vec![1.0, 0.0];
    p.add_le(vec![0.0, 1.0], 3.0);
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn upper_only_and_fixed_bounds() {
    // max v0 + v1 with v0 <= 2 (no lower), v1 fixed at 0.5, v0 >= -5 via a row
    let mut p = LpProblem::new(2);
    p.objective = vec![-1.0, -1.0];
    p.set_bounds(0, f64::NEG_INFINITY, 2.0);
    p.set_bounds(1, 0.5, 0.5);
    p.add_le(vec![-1.0, 0.0], 5.0);
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.x, vec![2.0, 0.5]);
    assert!((s.value + 2.5).abs() < 1e-12);
}

#[test]
fn constant_is_added_to_value() {
    let mut p = LpProblem::new(1);
    p.objective = vec![2.0];
    p.constant = 7.0;
    p.set_bounds(0, 1.0, 4.0);
    let s = solve_lp(&p).unwrap();
    assert!((s.value - 9.0).abs() < 1e-12);
}

#[test]
fn malformed_problem_is_an_error() {
    let mut p = LpProblem::new(2);
    p.add_le(vec![1.0], 0.0);
    assert!(solve_lp(&p).is_err());
    let mut q = LpProblem::new(1);
    q.objective[0] = f64::NAN;
    assert!(solve_lp(&q).is_err());
}

#[test]
fn degenerate_problem_terminates() {
    // many redundant constraints through the optimum
    let mut p = LpProblem::new(2);
    p.objective = vec![-1.0, -1.0];
    p.set_bounds(0, 0.0, f64::INFINITY);
    p.set_bounds(1, 0.0, f64::INFINITY);
    for k in 1..=12 {
        let a = k as f64 / 6.0;
        p.add_le(vec![a, 1.0], 1.0 + a);
    }
    p.add_le(vec![1.0, 0.0], 1.0);
    p.add_le(vec![0.0, 1.0], 1.0);
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.value + 2.0).abs() < 1e-10);
}

#[test]
fn dump_mentions_every_part() {
    let mut p = LpProblem::new(2);
    p.objective = vec![1.0, -2.0];
    p.set_bounds(0, 0.0, 1.0);
    p.add_le(vec![1.0, 1.0], 3.0);
    let text = p.to_lp_format();
    assert!(text.contains("Minimize"));
    assert!(text.contains("obj: 1 v0 - 2 v1"));
    assert!(text.contains("c0: 1 v0 + 1 v1 <= 3"));
    assert!(text.contains("0 <= v0 <= 1"));
    assert!(text.contains("v1 free"));
    assert!(text.ends_with("End\n"));
}

#[test]
fn small_pivot_on_a_slightly_negative_row_keeps_feasibility() {
    // shrunk from a generated case: a Harris step left rhs at -9e-10 on the
    // row later chosen with a 5e-4 pivot
    let mut p = LpProblem::new(8);
    p.objective = vec![0.0, -0.8316794740187593, 0.0, -0.6832605581888671, 0.0, 0.0, 0.0, 0.0];
    for j in 0..8 {
        p.set_bounds(j, -2.0, 2.0);
    }
    let rows: [([f64; 5], f64); 8] = [
        ([0.0, 0.0, 0.0, 0.0710437387428474, 0.0], 0.0),
        ([0.04036453445908945, -0.07322823210809278, -0.08955735788546992, -0.01096222933045915, -0.039313262603997715], 0.007261138909553127),
        ([9.315251514725593e-7, 6.976645144871409e-7, 4.7395594091218707e-7, 5.512898825853373e-7, 6.089359718815446e-7], 8.908869924103691e-8),
        ([0.03827696819699258, 0.055022336835802835, 0.04151427143456152, -0.016424130474397277, 0.08030635642260084], 0.01335761366020907),
        ([0.0, -0.06298720651866946, 0.09785997149197273, 0.0, -0.09398906791573991], 0.01081850867615909),
        ([-0.038579455686498114, -0.04937832788330273, 0.06161189003137271, -0.06031830481794607, -0.056146123415308814], 0.003872707788985735),
        ([0.0, -0.0777385039044224, 0.08320850142653595, 0.08024297538233187, 0.0676348301351996], 0.014613128750215563),
        ([-0.0007038747182160646, -0.0009663588254089933, -0.0007880155814952661, -0.0007557062933077298, 0.000495286050444124], 0.00013570003163349093),
    ];
    // coefficients act on v1, v2, v3, v4, v6
    for (g, h) in rows {
        p.add_le(vec![0.0, g[0], g[1], g[2], g[3], 0.0, g[4], 0.0], h);
    }
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(p.max_violation(&s.x) <= 1e-8, "violation {}", p.max_violation(&s.x));
}

fn random_lp() -> impl Strategy<Value = LpProblem> {
    (2usize..=3, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), m),
            prop::collection::vec(-1.0f64..2.0, m),
            prop::collection::vec((-2.0f64..0.0, 0.0f64..2.0), n),
        )
            .prop_map(move |(c, rows, rhs, bounds)| {
                let mut p = LpProblem::new(n);
                p.objective = c;
                for (j, (l, u)) in bounds.into_iter().enumerate() {
                    p.set_bounds(j, l, u);
                }
                for (r, b) in rows.into_iter().zip(rhs) {
                    p.add_le(r, b);
                }
                p
            })
    })
}

/// Boxed LP with a known feasible point, mixed coefficient magnitudes and
/// some fixed variables. It is always feasible and bounded.
fn feasible_boxed_lp() -> impl Strategy<Value = (LpProblem, Vec<f64>)> {
    (3usize..9, 8usize..40).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec((prop::collection::vec(-1.0..1.0f64, n), -6i32..1, 0.0..0.5f64), m),
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(prop::bool::weighted(0.3), n),
        )
            .prop_map(move |(x_star, rows, cost, fixed)| {
                let mut p = LpProblem::new(n);
                p.objective = cost;
                for j in 0..n {
                    let (lo, hi) = if fixed[j] { (x_star[j], x_star[j]) } else { (-2.0, 2.0) };
                    p.set_bounds(j, lo, hi);
                }
                for (row, exp, slack) in rows {
                    let row: Vec<f64> = row.iter().map(|a| a * 10f64.powi(exp)).collect();
                    let h = row.iter().zip(&x_star).map(|(a, x)| a * x).sum::<f64>() + slack * 10f64.powi(exp);
                    p.add_le(row, h);
                }
                (p, x_star)
            })
    })
}

proptest! {
    #[test]
    fn feasible_problems_are_never_rejected((p, x_star) in feasible_boxed_lp()) {
        let s = solve_lp(&p).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!(p.max_violation(&s.x) <= 1e-8);
        prop_assert!(s.value <= p.objective_value(&x_star) + 1e-9);
    }

    #[test]
    fn matches_vertex_enumeration(p in random_lp()) {
        let s = solve_lp(&p).unwrap();
        match vertex_oracle(&p) {
            Some(best) => {
                prop_assert_eq!(s.status, LpStatus::Optimal);
                prop_assert!((s.value - best).abs() <= 1e-7 * (1.0 + best.abs()),
                    "simplex {} vs oracle {}", s.value, best);
                prop_assert!(p.max_violation(&s.x) <= 1e-8);
            }
            None => prop_assert_eq!(s.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn solving_is_deterministic(p in random_lp()) {
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        for (u, v) in a.x.iter().zip(&b.x) {
            prop_assert_eq!(u.to_bits(), v.to_bits());
        }
    }
}

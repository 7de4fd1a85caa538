//! Oracle checks for the ellipsoidal uncertainty pipeline.
//!
//! The bounding box is checked against direct sampling of the set, the inner
//! worst case against a one-dimensional dual search, and the cutting-plane
//! second stage against an angular grid search over the deviation frontier.
//! None of the expectations here reuse the library's solvers.

mod common;

use common::{
    ellipsoid_point, lp_oracle, random_orthonormal, rng, unit_sphere, wc_dual_value, OracleOutcome,
};
use effbudget::ellipsoid::{
    axis_intercepts, budgeted_ellipsoid_max, ellipsoid_admissible, solve_ellipsoid,
};
use effbudget::lp::SolveOptions;
use effbudget::robust::{insensitivity_holds, solve_full_budget, solve_nominal};
use effbudget::{
    bounding_box, classify_ellipsoid, effective_ellipsoid, BudgetedEllipsoid, EllipsoidSpec,
    NominalInstance,
};
use rand::Rng;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// 45-degree rotation in two dimensions.
fn rotated_axes() -> Vec<Vec<f64>> {
    vec![vec![SQRT_HALF, SQRT_HALF], vec![-SQRT_HALF, SQRT_HALF]]
}

fn identity_axes(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|j| (0..m).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// A two-resource instance with loose rows and bounds matching the box of
/// the given ellipsoid, so the admissible interval equals the box itself.
fn loose_instance(ell: &BudgetedEllipsoid) -> NominalInstance {
    let (y_low, y_up) = bounding_box(ell);
    NominalInstance {
        a: vec![vec![0.0], vec![0.0]],
        b: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        c1: vec![1.0],
        c2: vec![3.0, 2.0],
        g: vec![50.0, 50.0],
        y_nominal: ell.center.clone(),
        y_low,
        y_up,
        budget_groups: None,
        allow_non_centered: false,
        ellipsoid: None,
    }
}

#[test]
fn bounding_box_matches_the_support_function_on_a_rotated_ellipse() {
    let ell = BudgetedEllipsoid::new(vec![5.0, 4.0], rotated_axes(), vec![2.0, 1.0], 1.0, 2.0)
        .expect("valid ellipsoid");
    let (y_low, y_up) = bounding_box(&ell);
    // Support along either coordinate: sqrt((l1 v11)^2 + (l2 v21)^2) = sqrt(2.5).
    let reach = 2.5f64.sqrt();
    assert!((y_up[0] - (5.0 + reach)).abs() < 1e-12);
    assert!((y_up[1] - (4.0 + reach)).abs() < 1e-12);
    assert!((y_low[0] - (5.0 - reach)).abs() < 1e-12);
    assert!((y_low[1] - (4.0 - reach)).abs() < 1e-12);

    let mut r = rng(0xe111);
    let mut max_seen = [f64::NEG_INFINITY; 2];
    for _ in 0..100_000 {
        let eta = unit_sphere(&mut r, 2);
        let p = ellipsoid_point(&ell.center, &ell.axes, &ell.lengths, ell.gamma, &eta);
        for k in 0..2 {
            assert!(p[k] <= y_up[k] + 1e-9, "sample escaped the box above");
            assert!(p[k] >= y_low[k] - 1e-9, "sample escaped the box below");
            max_seen[k] = max_seen[k].max(p[k]);
        }
    }
    for k in 0..2 {
        assert!(
            (y_up[k] - max_seen[k]).abs() < 1e-3,
            "box face {k} not tight: bound {} vs sampled {}",
            y_up[k],
            max_seen[k]
        );
    }
}

#[test]
fn bounding_box_contains_sampled_points_of_random_rotated_ellipsoids() {
    for seed in 0..20u64 {
        let mut r = rng(0xb0_b0 ^ seed);
        let m = 2 + (seed as usize % 4);
        let axes = random_orthonormal(&mut r, m);
        let lengths: Vec<f64> = (0..m).map(|_| r.gen_range(0.5..3.0)).collect();
        let center: Vec<f64> = (0..m).map(|_| r.gen_range(5.0..15.0)).collect();
        let gamma = [0.5, 1.0, 1.7][seed as usize % 3];
        let budget = 0.8 * lengths.iter().sum::<f64>();
        let ell = BudgetedEllipsoid::new(center, axes, lengths, gamma, budget)
            .expect("random orthonormal axes must validate");
        let (y_low, y_up) = bounding_box(&ell);
        for i in 0..20_000 {
            let mut eta = unit_sphere(&mut r, m);
            if i % 2 == 0 {
                let shrink = r.gen_range(0.0f64..1.0).powf(1.0 / m as f64);
                for e in eta.iter_mut() {
                    *e *= shrink;
                }
            }
            let p = ellipsoid_point(&ell.center, &ell.axes, &ell.lengths, ell.gamma, &eta);
            for k in 0..m {
                let scale = 1e-9 * (1.0 + y_up[k].abs());
                assert!(p[k] <= y_up[k] + scale && p[k] >= y_low[k] - scale);
            }
        }
    }
}

#[test]
fn axis_aligned_boxes_use_center_plus_radius_times_length() {
    let ell = BudgetedEllipsoid::new(
        vec![5.0, 4.0, 6.0],
        identity_axes(3),
        vec![1.5, 1.0, 0.25],
        1.2,
        2.0,
    )
    .expect("valid ellipsoid");
    let (y_low, y_up) = bounding_box(&ell);
    for (k, half) in [1.8, 1.2, 0.3].iter().enumerate() {
        assert!((y_up[k] - (ell.center[k] + half)).abs() < 1e-12);
        assert!((y_low[k] - (ell.center[k] - half)).abs() < 1e-12);
    }

    let point = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![2.0, 1.0], 0.0, 1.0)
        .expect("zero radius is allowed");
    let (lo, up) = bounding_box(&point);
    assert_eq!(lo, vec![5.0, 4.0]);
    assert_eq!(up, vec![5.0, 4.0]);
}

#[test]
fn worst_case_over_the_effective_set_matches_the_dual_search_oracle() {
    let opts = SolveOptions::default();
    for seed in 0..60u64 {
        let mut r = rng(0x3c0de ^ seed);
        let m = 1 + (seed as usize % 4);
        let lengths: Vec<f64> = (0..m).map(|_| r.gen_range(0.3..3.0)).collect();
        let weights: Vec<f64> = (0..m).map(|_| (r.gen_range(0..11) as f64) / 2.0).collect();
        let gamma = [0.0, 0.7, 1.0, 1.8][seed as usize % 4];
        let budget = [0.0, 0.25, 0.6, 1.2][(seed as usize / 4) % 4] * lengths.iter().sum::<f64>();
        let (value, mu) = budgeted_ellipsoid_max(&weights, &lengths, gamma, budget, &opts)
            .expect("inner maximum must solve");
        let expected = wc_dual_value(&weights, &lengths, gamma, budget);
        assert!(
            (value - expected).abs() <= 1e-5 * (1.0 + expected.abs()),
            "seed {seed}: inner max {value} vs dual search {expected}"
        );

        // The attaining deviation must lie in the set it maximizes over.
        let quad: f64 = mu
            .iter()
            .zip(&lengths)
            .map(|(&mj, &lj)| (mj / lj).powi(2))
            .sum();
        assert!(quad <= gamma * gamma + 2e-6 * (1.0 + gamma * gamma));
        assert!(mu.iter().map(|v| v.abs()).sum::<f64>() <= budget + 1e-7);
        assert!(weights.iter().zip(&mu).map(|(&w, &m)| w * m).sum::<f64>() >= value - 1e-7);

        // Sampled feasible points can never beat the reported maximum.
        for _ in 0..2_000 {
            let dir = unit_sphere(&mut r, m);
            let mut cand: Vec<f64> = dir
                .iter()
                .zip(&lengths)
                .map(|(&d, &l)| gamma * l * d.abs())
                .collect();
            let used: f64 = cand.iter().sum();
            if used > budget {
                let shrink = budget / used.max(1e-300);
                for c in cand.iter_mut() {
                    *c *= shrink;
                }
            }
            let val: f64 = weights.iter().zip(&cand).map(|(&w, &c)| w * c).sum();
            assert!(val <= value + 1e-6 * (1.0 + value.abs()));
        }
    }
}

#[test]
fn classification_follows_the_intercept_thresholds() {
    let opts = SolveOptions::default();

    // Uncoupled rotated set: every admissible cap reaches the box face, which
    // lies strictly beyond the axis intercept, so every axis is case 1.
    let ell = BudgetedEllipsoid::new(vec![5.0, 4.0], rotated_axes(), vec![2.0, 1.0], 1.0, 2.0)
        .expect("valid ellipsoid");
    let inst = loose_instance(&ell);
    let interval = ellipsoid_admissible(&inst, &ell, &opts).expect("stage 1");
    let labels = classify_ellipsoid(&ell, &interval);
    assert_eq!(
        labels.iter().map(|c| c.label()).collect::<Vec<_>>(),
        vec![1, 1]
    );
    assert!(labels.iter().all(|c| c.effective()));
    // The intercept of a rotated ellipse sits strictly inside the box face.
    let a = axis_intercepts(&ell);
    assert!(a[0] < interval.s_up[0] - 1e-9 && a[1] < interval.s_up[1] - 1e-9);

    // Axis-aligned uncoupled set: the cap equals the intercept exactly; the
    // boundary counts as full utilization (case 1).
    let ell = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![1.5, 1.0], 1.0, 2.0)
        .expect("valid ellipsoid");
    let inst = loose_instance(&ell);
    let interval = ellipsoid_admissible(&inst, &ell, &opts).expect("stage 1");
    let labels = classify_ellipsoid(&ell, &interval);
    assert_eq!(
        labels.iter().map(|c| c.label()).collect::<Vec<_>>(),
        vec![1, 1]
    );

    // A capacity row binding between the nominal value and the intercept
    // yields case 2; rows binding at or below the nominal yield cases 3/4.
    for (cap, want) in [(5.6, 2), (4.7, 3), (3.2, 4)] {
        let mut inst = loose_instance(&ell);
        inst.g[0] = cap;
        let interval = ellipsoid_admissible(&inst, &ell, &opts).expect("stage 1");
        let labels = classify_ellipsoid(&ell, &interval);
        assert_eq!(
            labels[0].label(),
            want,
            "row cap {cap} must classify as case {want}"
        );
        assert_eq!(labels[1].label(), 1, "untouched axis stays case 1");
        assert_eq!(labels[0].effective(), want <= 2);
    }
}

#[test]
fn effective_set_keeps_only_axes_that_reach_beyond_nominal() {
    let opts = SolveOptions::default();
    let ell = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![1.5, 1.0], 1.0, 2.0)
        .expect("valid ellipsoid");

    // First axis capped below nominal: it moves to the complement with its
    // cap; the second keeps effective length s_up - y_nom.
    let mut inst = loose_instance(&ell);
    inst.g[0] = 4.7;
    let interval = ellipsoid_admissible(&inst, &ell, &opts).expect("stage 1");
    let eff = effective_ellipsoid(&ell, &interval);
    assert_eq!(eff.index_set, vec![1]);
    assert_eq!(eff.complement, vec![0]);
    assert!((eff.effective_lengths[1] - 1.0).abs() < 1e-9);
    assert_eq!(eff.effective_lengths[0], 0.0);
    assert!((eff.caps[0] - 4.7).abs() < 1e-9);
    assert!(!eff.is_degenerate());

    // Zero radius collapses the box to the center; no axis reaches beyond
    // nominal and the effective set is degenerate.
    let point = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![1.5, 1.0], 0.0, 1.0)
        .expect("valid ellipsoid");
    let inst = loose_instance(&point);
    let interval = ellipsoid_admissible(&inst, &point, &opts).expect("stage 1");
    let eff = effective_ellipsoid(&point, &interval);
    assert!(eff.index_set.is_empty());
    assert!(eff.is_degenerate());
}

#[test]
fn zero_radius_reduces_the_pipeline_to_the_nominal_model() {
    let opts = SolveOptions::default();
    let ell = BudgetedEllipsoid::new(vec![5.0, 4.0], rotated_axes(), vec![2.0, 1.0], 0.0, 1.5)
        .expect("valid ellipsoid");
    // Bounds of the instance are immaterial to the pipeline but must be a
    // valid box around the center; use a small symmetric one.
    let mut inst = loose_instance(&ell);
    inst.y_low = vec![4.0, 3.0];
    inst.y_up = vec![6.0, 5.0];

    let run = solve_ellipsoid(&inst, &ell, &opts).expect("pipeline");
    let nominal = solve_nominal(&inst, &opts).expect("nominal");
    assert!((run.solution.objective - nominal.objective).abs() < 1e-7);
    assert!((run.solution.worst_case_term).abs() < 1e-9);
    for (ye, yn) in run.solution.y.iter().zip(&nominal.y) {
        assert!((ye - yn).abs() < 1e-7);
    }
    for (xe, xn) in run.solution.x.iter().zip(&nominal.x) {
        assert!((xe - xn).abs() < 1e-7);
    }
}

#[test]
fn full_budget_corner_matches_the_box_model_capped_at_the_interval() {
    let opts = SolveOptions::default();
    // Equal penalties keep the inner maximum indifferent to how the budget is
    // spread, so the ellipsoidal worst case equals the box full-budget one.
    let ell = BudgetedEllipsoid::new(
        vec![5.0, 4.0],
        identity_axes(2),
        vec![1.0, 1.5],
        2f64.sqrt(),
        2.5,
    )
    .expect("valid ellipsoid");
    let (y_low, y_up) = bounding_box(&ell);
    let inst = NominalInstance {
        a: vec![vec![0.0], vec![0.0]],
        b: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        c1: vec![1.0],
        c2: vec![3.0, 3.0],
        g: vec![6.0, 5.5],
        y_nominal: vec![5.0, 4.0],
        y_low: y_low.clone(),
        y_up: y_up.clone(),
        budget_groups: None,
        allow_non_centered: false,
        ellipsoid: None,
    };

    let run = solve_ellipsoid(&inst, &ell, &opts).expect("pipeline");
    // Row caps bind below the box faces, so s_up = (6, 5.5), the effective
    // lengths are (1, 1.5), the corner mu = (1, 1.5) is exactly on the cone
    // at radius sqrt(2), and the budget 2.5 equals their sum.
    assert!((run.effective.effective_lengths[0] - 1.0).abs() < 1e-7);
    assert!((run.effective.effective_lengths[1] - 1.5).abs() < 1e-7);
    assert!((run.solution.worst_case_term - 7.5).abs() < 1e-6);

    let capped = NominalInstance {
        y_up: vec![6.0, 5.5],
        allow_non_centered: true,
        ellipsoid: None,
        ..inst.clone()
    };
    let full = solve_full_budget(&capped, &opts).expect("full budget");
    assert!(
        (run.solution.objective - full.objective).abs() < 1e-6,
        "ellipsoid {} vs box full budget {}",
        run.solution.objective,
        full.objective
    );
    for (ye, yb) in run.solution.y.iter().zip(&full.y) {
        assert!((ye - yb).abs() < 1e-6);
    }
}

/// Decision value of the second stage for a fixed deviation, via the vertex
/// enumeration oracle: the base rows plus the two deviation-relaxed caps.
fn capped_decision_value(
    c: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    y_cols: (usize, usize),
    caps: (f64, f64),
) -> f64 {
    let mut rows2 = rows.to_vec();
    let mut rhs2 = rhs.to_vec();
    let mut cap_row = vec![0.0; c.len()];
    cap_row[y_cols.0] = 1.0;
    rows2.push(cap_row);
    rhs2.push(caps.0);
    let mut cap_row = vec![0.0; c.len()];
    cap_row[y_cols.1] = 1.0;
    rows2.push(cap_row);
    rhs2.push(caps.1);
    match lp_oracle(c, &rows2, &rhs2) {
        OracleOutcome::Optimal(v) => v,
        other => panic!("oracle LP must be optimal, got {other:?}"),
    }
}

/// Minimum of the capped decision value over the deviation frontier, by an
/// angular scan with local refinement. The frontier is the radially maximal
/// boundary of the cone-and-budget region in the nonnegative quadrant; the
/// decision value never increases when a cap is relaxed, so the minimum over
/// the full region is attained there.
#[allow(clippy::too_many_arguments)]
fn grid_decision_min(
    c: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    y_cols: (usize, usize),
    y_nom: (f64, f64),
    le: (f64, f64),
    gamma: f64,
    budget: f64,
) -> f64 {
    let mu_at = |theta: f64| -> (f64, f64) {
        let (u1, u2) = (theta.cos().max(0.0), theta.sin().max(0.0));
        let t_cone = gamma / ((u1 / le.0).powi(2) + (u2 / le.1).powi(2)).sqrt();
        let t_budget = if u1 + u2 > 1e-12 {
            budget / (u1 + u2)
        } else {
            f64::INFINITY
        };
        let t = t_cone.min(t_budget);
        (t * u1, t * u2)
    };
    let value_at = |theta: f64| -> f64 {
        let (m1, m2) = mu_at(theta);
        capped_decision_value(c, rows, rhs, y_cols, (y_nom.0 + m1, y_nom.1 + m2))
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let n = 10_000;
    let mut best = f64::INFINITY;
    let mut best_k = 0usize;
    for k in 0..=n {
        let v = value_at(half_pi * k as f64 / n as f64);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let lo = half_pi * best_k.saturating_sub(2) as f64 / n as f64;
    let hi = half_pi * (best_k + 2).min(n) as f64 / n as f64;
    for k in 0..=2_000 {
        best = best.min(value_at(lo + (hi - lo) * k as f64 / 2_000.0));
    }
    best
}

#[test]
fn cutting_plane_objective_matches_an_angular_grid_search() {
    let opts = SolveOptions::default();

    // Rotated set; one axis capped by a row coupled to the allocation.
    {
        let gamma = 1.2;
        let budget = 1.5;
        let reach = gamma * 2.5f64.sqrt();
        let spec = EllipsoidSpec {
            axes: rotated_axes(),
            lengths: vec![2.0, 1.0],
            gamma,
            budget,
        };
        let inst = NominalInstance {
            a: vec![vec![-1.0], vec![0.5], vec![0.0]],
            b: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            c1: vec![1.0],
            c2: vec![4.0, 3.0],
            g: vec![-1.0, 6.0, 7.0],
            y_nominal: vec![5.0, 4.0],
            y_low: vec![5.0 - reach, 4.0 - reach],
            y_up: vec![5.0 + reach, 4.0 + reach],
            budget_groups: None,
            allow_non_centered: false,
            ellipsoid: Some(spec),
        };
        let ell = BudgetedEllipsoid::from_instance(&inst).expect("ellipsoid block");

        let run = solve_ellipsoid(&inst, &ell, &opts).expect("pipeline");
        // Stage 1: x = 1 is forced, the second row then caps s_up[0] at 5.5;
        // the second axis reaches its box face.
        let le = (0.5, reach);
        assert!((run.effective.effective_lengths[0] - le.0).abs() < 1e-7);
        assert!((run.effective.effective_lengths[1] - le.1).abs() < 1e-7);
        assert_eq!(
            run.labels.iter().map(|c| c.label()).collect::<Vec<_>>(),
            vec![2, 1]
        );

        let c = [1.0, -4.0, -3.0];
        let rows = vec![
            vec![-1.0, 0.0, 0.0],
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let rhs = vec![-1.0, 6.0, 7.0];
        let decision = grid_decision_min(&c, &rows, &rhs, (1, 2), (5.0, 4.0), le, gamma, budget);
        let wc = wc_dual_value(&[4.0, 3.0], &[le.0, le.1], gamma, budget);
        let expected = decision + 32.0 + wc;
        assert!(
            (run.solution.objective - expected).abs() < 1e-4,
            "cutting planes {} vs grid {}",
            run.solution.objective,
            expected
        );

        // The supporting deviation satisfies the quadratic and budget rows.
        let quad: f64 = run
            .solution
            .deviations
            .iter()
            .zip(&run.effective.effective_lengths)
            .filter(|(_, &l)| l > 0.0)
            .map(|(&m, &l)| (m / l).powi(2))
            .sum();
        assert!(quad <= gamma * gamma + 2e-6 * (1.0 + gamma * gamma));
        let used: f64 = run.solution.deviations.iter().map(|v| v.abs()).sum();
        assert!(used <= budget + 1e-7);
    }

    // Axis-aligned set; one axis capped between nominal and its intercept.
    {
        let gamma = 1.0;
        let budget = 1.2;
        let ell = BudgetedEllipsoid::new(
            vec![5.0, 4.0],
            identity_axes(2),
            vec![1.5, 1.0],
            gamma,
            budget,
        )
        .expect("valid ellipsoid");
        let (y_low, y_up) = bounding_box(&ell);
        let inst = NominalInstance {
            a: vec![vec![0.0], vec![0.0]],
            b: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            c1: vec![0.5],
            c2: vec![2.0, 5.0],
            g: vec![4.6, 20.0],
            y_nominal: vec![5.0, 4.0],
            y_low,
            y_up,
            budget_groups: None,
            allow_non_centered: false,
            ellipsoid: None,
        };
        let run = solve_ellipsoid(&inst, &ell, &opts).expect("pipeline");
        let le = (1.5, 0.6);
        assert_eq!(
            run.labels.iter().map(|c| c.label()).collect::<Vec<_>>(),
            vec![1, 2]
        );

        let c = [0.5, -2.0, -5.0];
        let rows = vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        let rhs = vec![4.6, 20.0];
        let decision = grid_decision_min(&c, &rows, &rhs, (1, 2), (5.0, 4.0), le, gamma, budget);
        let wc = wc_dual_value(&[2.0, 5.0], &[le.0, le.1], gamma, budget);
        let expected = decision + 30.0 + wc;
        assert!(
            (run.solution.objective - expected).abs() < 1e-4,
            "cutting planes {} vs grid {}",
            run.solution.objective,
            expected
        );
    }
}

#[test]
fn growing_the_set_beyond_binding_rows_leaves_decisions_unchanged() {
    let opts = SolveOptions::default();
    let inst_for = |ell: &BudgetedEllipsoid| {
        let (y_low, y_up) = bounding_box(ell);
        NominalInstance {
            a: vec![vec![0.0], vec![0.0]],
            b: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            c1: vec![1.0],
            c2: vec![3.0, 2.0],
            g: vec![5.6, 4.5],
            y_nominal: vec![5.0, 4.0],
            y_low,
            y_up,
            budget_groups: None,
            allow_non_centered: false,
            ellipsoid: None,
        }
    };
    // Both radii cover the interval corner (effective lengths (0.6, 0.5)),
    // so the caps saturate at the binding rows in either case.
    let small = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![1.0, 1.0], 1.5, 1.2)
        .expect("valid ellipsoid");
    let large = BudgetedEllipsoid::new(vec![5.0, 4.0], identity_axes(2), vec![1.0, 1.0], 2.2, 2.0)
        .expect("valid ellipsoid");
    let run_small = solve_ellipsoid(&inst_for(&small), &small, &opts).expect("pipeline");
    let run_large = solve_ellipsoid(&inst_for(&large), &large, &opts).expect("pipeline");

    assert!(insensitivity_holds(
        &inst_for(&small),
        &run_small.solution.x,
        &run_small.solution.y,
        1e-6
    ));
    for (a, b) in run_small.solution.x.iter().zip(&run_large.solution.x) {
        assert!((a - b).abs() < 1e-6);
    }
    for (a, b) in run_small.solution.y.iter().zip(&run_large.solution.y) {
        assert!((a - b).abs() < 1e-6);
    }
    // The worst-case price still grows with the set.
    assert!(run_large.solution.worst_case_term >= run_small.solution.worst_case_term - 1e-9);
}

#[test]
fn sets_reaching_below_zero_are_rejected_by_the_pipeline() {
    let opts = SolveOptions::default();
    let ell = BudgetedEllipsoid::new(vec![1.0, 4.0], identity_axes(2), vec![2.0, 1.0], 1.0, 2.0)
        .expect("geometry itself is fine");
    let mut inst = loose_instance(&ell);
    inst.y_low = vec![0.0, 3.0];
    inst.y_up = vec![2.0, 5.0];
    let err = ellipsoid_admissible(&inst, &ell, &opts).unwrap_err();
    assert!(
        matches!(err, effbudget::Error::InvalidInstance(_)),
        "expected an instance error, got {err:?}"
    );
}

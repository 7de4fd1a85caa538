//! Validates the simplex against an independent vertex-enumeration oracle
//! on randomly generated programs, and checks the dual identities the rest
//! of the library relies on.

mod common;

use common::{int_in, lp_oracle, rng, OracleOutcome};
use effbudget::lp::{solve_lp, SolveOptions};
use effbudget::{LinearProgram, Relation, SolveStatus};

/// Random 5-variable, 8-constraint program with integer data.
fn random_lp(seed: u64) -> (LinearProgram, Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let n = 5;
    let m = 8;
    let c: Vec<f64> = (0..n).map(|_| int_in(&mut r, -5, 5) as f64).collect();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| int_in(&mut r, -5, 5) as f64).collect();
        rows.push(row);
        rhs.push(int_in(&mut r, -5, 10) as f64);
    }
    let mut lp = LinearProgram::new(n, c);
    for (row, &b) in rows.iter().zip(&rhs) {
        let coeffs: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        lp.add_constraint(coeffs, Relation::Le, b);
    }
    (lp, rows, rhs)
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let opts = SolveOptions::default();
    let mut optimal = 0;
    let mut infeasible = 0;
    let mut unbounded = 0;
    for seed in 0..60u64 {
        let (lp, rows, rhs) = random_lp(seed);
        let want = lp_oracle(&lp.objective, &rows, &rhs);
        let got = solve_lp(&lp, &opts).unwrap();
        match want {
            OracleOutcome::Infeasible => {
                assert_eq!(got.status, SolveStatus::Infeasible, "seed {seed}");
                infeasible += 1;
            }
            OracleOutcome::Unbounded => {
                assert_eq!(got.status, SolveStatus::Unbounded, "seed {seed}");
                unbounded += 1;
            }
            OracleOutcome::Optimal(v) => {
                assert_eq!(got.status, SolveStatus::Optimal, "seed {seed}");
                let tol = 1e-6 * (1.0 + v.abs());
                assert!(
                    (got.objective - v).abs() < tol,
                    "seed {seed}: simplex {} vs oracle {v}",
                    got.objective
                );
                optimal += 1;
            }
        }
    }
    // The seeded suite must exercise every terminal status.
    assert!(optimal >= 20, "only {optimal} optimal cases");
    assert!(infeasible >= 3, "only {infeasible} infeasible cases");
    assert!(unbounded >= 3, "only {unbounded} unbounded cases");
}

#[test]
fn duals_price_the_optimum() {
    let opts = SolveOptions::default();
    for seed in 0..60u64 {
        let (lp, rows, rhs) = random_lp(seed);
        if !matches!(
            lp_oracle(&lp.objective, &rows, &rhs),
            OracleOutcome::Optimal(_)
        ) {
            continue;
        }
        let s = solve_lp(&lp, &opts).unwrap();
        // Strong duality with nonnegative variables: b'y plus bound terms.
        let mut dual_obj: f64 = s
            .duals
            .iter()
            .zip(&lp.constraints)
            .map(|(y, c)| y * c.rhs)
            .sum();
        for j in 0..lp.num_vars {
            let rc = s.reduced_costs[j];
            if rc > 1e-9 {
                dual_obj += rc * lp.bounds[j].lower;
            }
        }
        let tol = 1e-6 * (1.0 + s.objective.abs());
        assert!(
            (dual_obj - s.objective).abs() < tol,
            "seed {seed}: dual {dual_obj} vs primal {}",
            s.objective
        );
        // Sign convention and complementary slackness.
        for (i, c) in lp.constraints.iter().enumerate() {
            assert!(s.duals[i] <= 1e-9, "seed {seed}: <= row with positive dual");
            let slack = c.rhs - c.dot(&s.x);
            assert!(
                (s.duals[i] * slack).abs() < 1e-5 * (1.0 + c.rhs.abs()),
                "seed {seed}: complementary slackness broken on row {i}"
            );
        }
    }
}

#[test]
fn replay_is_bit_identical() {
    let opts = SolveOptions::default();
    for seed in [3u64, 17, 42] {
        let (lp, _, _) = random_lp(seed);
        let a = solve_lp(&lp, &opts).unwrap();
        let b = solve_lp(&lp, &opts).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        let bits = |v: &Vec<f64>| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.x), bits(&b.x));
        assert_eq!(bits(&a.duals), bits(&b.duals));
    }
}

//! Depth-first branch and bound over the simplex relaxation.
//!
//! Branching selects the most fractional integral variable (ties to the
//! lowest index) and explores the floor branch before the ceiling branch.
//! Nodes are pruned against the incumbent with an absolute gap of `1e-6`.
//! The search is exhaustive and deterministic; it is intended for the small
//! integer programs that arise in the bundled application models (at most 64
//! integral variables), not as a general MILP code.

use super::{solve_lp, LpSolution, MixedProgram, SolveOptions, SolveStatus, VarBounds};
use crate::{Error, Result};

/// Absolute optimality gap used for pruning.
const GAP: f64 = 1e-6;

/// Solves a mixed-integer program. `duals` and `reduced_costs` are empty in
/// the returned solution; they are only meaningful for pure LP solves.
pub fn solve_milp(mp: &MixedProgram, opts: &SolveOptions) -> Result<LpSolution> {
    mp.validate()?;
    let mut stack: Vec<Vec<VarBounds>> = vec![mp.base.bounds.clone()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0usize;
    let mut nodes = 0usize;

    while let Some(bounds) = stack.pop() {
        nodes += 1;
        if nodes > opts.max_nodes {
            return Err(Error::SolverStalled(format!(
                "branch and bound exceeded {} nodes",
                opts.max_nodes
            )));
        }
        if bounds.iter().any(|b| b.lower > b.upper) {
            continue;
        }
        let mut lp = mp.base.clone();
        lp.bounds = bounds.clone();
        let relax = solve_lp(&lp, opts)?;
        iterations += relax.iterations;
        match relax.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                // Integral variables are bounded, so an unbounded relaxation
                // rides a continuous ray. Fixing the remaining integral
                // variables cannot remove it; certify by diving on the first
                // unfixed one until all are fixed.
                match mp
                    .integral_vars
                    .iter()
                    .find(|&&j| bounds[j].upper - bounds[j].lower > 0.5)
                {
                    None => {
                        return Ok(LpSolution {
                            status: SolveStatus::Unbounded,
                            x: Vec::new(),
                            objective: f64::NEG_INFINITY,
                            duals: Vec::new(),
                            reduced_costs: Vec::new(),
                            iterations,
                        })
                    }
                    Some(&j) => {
                        let mid = ((bounds[j].lower + bounds[j].upper) / 2.0).floor();
                        let mut down = bounds.clone();
                        down[j].upper = mid;
                        let mut up = bounds.clone();
                        up[j].lower = mid + 1.0;
                        stack.push(up);
                        stack.push(down);
                        continue;
                    }
                }
            }
            SolveStatus::Optimal => {}
        }
        if let Some((incumbent, _)) = &best {
            if relax.objective >= incumbent - GAP {
                continue;
            }
        }
        // Most fractional integral variable; ties to the lowest index.
        let mut branch: Option<(usize, f64, f64)> = None; // (var, value, score)
        for &j in &mp.integral_vars {
            let v = relax.x[j];
            let frac = v - v.floor();
            let dist = frac.min(1.0 - frac);
            if dist > opts.int_tol {
                let better = match branch {
                    None => true,
                    Some((_, _, s)) => dist > s + 1e-12,
                };
                if better {
                    branch = Some((j, v, dist));
                }
            }
        }
        match branch {
            None => {
                // Integral within tolerance: snap and record the incumbent.
                let mut x = relax.x.clone();
                for &j in &mp.integral_vars {
                    x[j] = x[j].round();
                }
                let obj = mp.base.objective_value(&x);
                let improves = match &best {
                    None => true,
                    Some((incumbent, _)) => obj < incumbent - GAP,
                };
                if improves {
                    best = Some((obj, x));
                }
            }
            Some((j, v, _)) => {
                let mut down = bounds.clone();
                down[j].upper = v.floor();
                let mut up = bounds;
                up[j].lower = v.ceil();
                stack.push(up);
                stack.push(down);
            }
        }
    }

    match best {
        Some((obj, x)) => Ok(LpSolution {
            status: SolveStatus::Optimal,
            x,
            objective: obj,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            iterations,
        }),
        None => Ok(LpSolution {
            status: SolveStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            iterations,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LinearProgram, Relation};

    #[test]
    fn knapsack_toy() {
        // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, binary.
        let mut lp = LinearProgram::new(3, vec![-5.0, -4.0, -3.0]);
        for b in &mut lp.bounds {
            b.upper = 1.0;
        }
        lp.add_constraint(vec![(0, 2.0), (1, 3.0), (2, 1.0)], Relation::Le, 5.0);
        let mp = MixedProgram::new(lp, vec![0, 1, 2], vec![0, 1, 2]);
        let s = solve_milp(&mp, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 9.0).abs() < 1e-9);
        assert_eq!(
            s.x.iter().map(|v| v.round() as i64).collect::<Vec<_>>(),
            vec![1, 1, 0]
        );
    }

    #[test]
    fn mixed_continuous_and_integer() {
        // min -x - 10y s.t. x + 5y <= 7, x <= 3.2, y integer in [0, 2].
        let mut lp = LinearProgram::new(2, vec![-1.0, -10.0]);
        lp.bounds[0].upper = 3.2;
        lp.bounds[1].upper = 2.0;
        lp.add_constraint(vec![(0, 1.0), (1, 5.0)], Relation::Le, 7.0);
        let mp = MixedProgram::new(lp, vec![1], vec![]);
        let s = solve_milp(&mp, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[1] - 1.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.objective + 12.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_integrality() {
        // 0.4 <= x <= 0.6 with x integer has no solution.
        let mut lp = LinearProgram::new(1, vec![1.0]);
        lp.bounds[0] = VarBounds::interval(0.4, 0.6);
        let mp = MixedProgram::new(lp, vec![0], vec![]);
        let s = solve_milp(&mp, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }
}

//! Two-phase primal simplex on a dense tableau.
//!
//! Canonicalization: variables with a finite lower bound are shifted to 0,
//! unbounded-below variables are split into a difference of nonnegative
//! parts, and finite upper bounds become explicit `<=` rows. Every row then
//! receives a slack, surplus, or artificial column, phase 1 minimizes the
//! artificial sum, and phase 2 minimizes the user objective with artificials
//! barred from entering. Pricing is Dantzig's rule with ties broken by the
//! lowest column index; after a run of degenerate pivots the solver switches
//! to Bland's rule, which guarantees termination. All scan orders are fixed,
//! so identical inputs produce bit-identical outputs.

// Tableau code indexes rows and columns heavily; ranged loops keep the
// pivot arithmetic close to the textbook statement.
#![allow(clippy::needless_range_loop)]

use super::{LinearProgram, LpSolution, Relation, SolveOptions, SolveStatus};
use crate::{Error, Result};

/// Pivot element tolerance: smaller entries are treated as zero.
const TOL_PIVOT: f64 = 1e-9;
/// Reduced-cost tolerance for entering-column eligibility.
const TOL_COST: f64 = 1e-9;

#[derive(Clone, Copy)]
enum ColMap {
    /// `x = x' + shift` with `x' >= 0` in column `col`.
    Shifted { col: usize, shift: f64 },
    /// `x = x_pos - x_neg` with both parts nonnegative.
    Split { pos: usize, neg: usize },
}

struct Canonical {
    /// Dense rows, length `ncols`; user rows first, then upper-bound rows.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// +1 or -1: user rows multiplied by -1 to make the rhs nonnegative.
    flip: Vec<f64>,
    /// Structural objective, length `ncols`.
    cost: Vec<f64>,
    col_map: Vec<ColMap>,
    /// Designated unit column of each row (slack or artificial).
    unit_col: Vec<usize>,
    /// Columns that are phase-1 artificials.
    artificial: Vec<usize>,
    num_user_rows: usize,
}

fn canonicalize(lp: &LinearProgram) -> Canonical {
    let mut col_map = Vec::with_capacity(lp.num_vars);
    let mut cost = Vec::new();
    let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // (var, rhs of x' <= u - l)
    for j in 0..lp.num_vars {
        let b = lp.bounds[j];
        if b.lower.is_finite() {
            let col = cost.len();
            cost.push(lp.objective[j]);
            col_map.push(ColMap::Shifted {
                col,
                shift: b.lower,
            });
            if b.upper.is_finite() {
                upper_rows.push((j, b.upper - b.lower));
            }
        } else {
            let pos = cost.len();
            cost.push(lp.objective[j]);
            cost.push(-lp.objective[j]);
            col_map.push(ColMap::Split { pos, neg: pos + 1 });
            if b.upper.is_finite() {
                upper_rows.push((j, b.upper));
            }
        }
    }
    let nstruct = cost.len();
    let num_user_rows = lp.constraints.len();
    let nrows = num_user_rows + upper_rows.len();

    // Structural part of every row, plus the shifted rhs.
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(nrows);
    let mut rhs = Vec::with_capacity(nrows);
    let mut relation = Vec::with_capacity(nrows);
    for row in &lp.constraints {
        let mut r = vec![0.0; nstruct];
        let mut b = row.rhs;
        for &(j, a) in &row.coeffs {
            match col_map[j] {
                ColMap::Shifted { col, shift } => {
                    r[col] += a;
                    b -= a * shift;
                }
                ColMap::Split { pos, neg } => {
                    r[pos] += a;
                    r[neg] -= a;
                }
            }
        }
        dense.push(r);
        rhs.push(b);
        relation.push(row.relation);
    }
    for &(j, ub) in &upper_rows {
        let mut r = vec![0.0; nstruct];
        match col_map[j] {
            ColMap::Shifted { col, .. } => r[col] = 1.0,
            ColMap::Split { pos, neg } => {
                r[pos] = 1.0;
                r[neg] = -1.0;
            }
        }
        dense.push(r);
        rhs.push(ub);
        relation.push(Relation::Le);
    }

    // Make every rhs nonnegative, flipping the relation as needed.
    let mut flip = vec![1.0; nrows];
    for i in 0..nrows {
        if rhs[i] < 0.0 {
            flip[i] = -1.0;
            rhs[i] = -rhs[i];
            for v in dense[i].iter_mut() {
                *v = -*v;
            }
            relation[i] = match relation[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Slack / surplus / artificial columns. A row's designated unit column
    // is its slack for `<=` rows and its artificial otherwise.
    let mut ncols = nstruct;
    let mut slack_col = vec![usize::MAX; nrows];
    let mut surplus_col = vec![usize::MAX; nrows];
    for i in 0..nrows {
        match relation[i] {
            Relation::Le => {
                slack_col[i] = ncols;
                ncols += 1;
            }
            Relation::Ge => {
                surplus_col[i] = ncols;
                ncols += 1;
            }
            Relation::Eq => {}
        }
    }
    let mut artificial = Vec::new();
    let mut art_col = vec![usize::MAX; nrows];
    for i in 0..nrows {
        if !matches!(relation[i], Relation::Le) {
            art_col[i] = ncols;
            artificial.push(ncols);
            ncols += 1;
        }
    }

    let mut rows = Vec::with_capacity(nrows);
    for i in 0..nrows {
        let mut r = vec![0.0; ncols];
        r[..nstruct].copy_from_slice(&dense[i]);
        if slack_col[i] != usize::MAX {
            r[slack_col[i]] = 1.0;
        }
        if surplus_col[i] != usize::MAX {
            r[surplus_col[i]] = -1.0;
        }
        if art_col[i] != usize::MAX {
            r[art_col[i]] = 1.0;
        }
        rows.push(r);
    }
    let mut full_cost = vec![0.0; ncols];
    full_cost[..nstruct].copy_from_slice(&cost);

    let unit_col = (0..nrows)
        .map(|i| {
            if art_col[i] != usize::MAX {
                art_col[i]
            } else {
                slack_col[i]
            }
        })
        .collect();

    Canonical {
        rows,
        rhs,
        flip,
        cost: full_cost,
        col_map,
        unit_col,
        artificial,
        num_user_rows,
    }
}

struct Tableau {
    /// `nrows` rows of length `ncols + 1`; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    /// Phase-2 reduced-cost row; last entry is minus the internal objective.
    cost: Vec<f64>,
    /// Phase-1 reduced-cost row while phase 1 runs.
    pcost: Vec<f64>,
    basis: Vec<usize>,
    is_artificial: Vec<bool>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, in_phase1: bool) {
        let piv = self.rows[r][c];
        let inv = 1.0 / piv;
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        // Guard against residue on the pivot column.
        self.rows[r][c] = 1.0;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for k in 0..=self.ncols {
                    self.rows[i][k] -= f * self.rows[r][k];
                }
                self.rows[i][c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for k in 0..=self.ncols {
                self.cost[k] -= f * self.rows[r][k];
            }
            self.cost[c] = 0.0;
        }
        if in_phase1 {
            let f = self.pcost[c];
            if f != 0.0 {
                for k in 0..=self.ncols {
                    self.pcost[k] -= f * self.rows[r][k];
                }
                self.pcost[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }
}

enum LoopOutcome {
    Optimal,
    Unbounded,
}

/// Runs the pivot loop on the given cost row until optimality, unboundedness,
/// or the iteration cap. `iterations` accumulates across calls.
fn pivot_loop(
    t: &mut Tableau,
    in_phase1: bool,
    opts: &SolveOptions,
    iterations: &mut usize,
) -> Result<LoopOutcome> {
    let mut bland = false;
    let mut stall = 0usize;
    let stall_limit = 2 * (t.rows.len() + t.ncols) + 16;
    loop {
        if *iterations >= opts.max_iterations {
            return Err(Error::SolverStalled(format!(
                "simplex exceeded {} pivots",
                opts.max_iterations
            )));
        }
        let costs: &Vec<f64> = if in_phase1 { &t.pcost } else { &t.cost };
        // Entering column.
        let mut enter = None;
        if bland {
            for j in 0..t.ncols {
                if !in_phase1 && t.is_artificial[j] {
                    continue;
                }
                if costs[j] < -TOL_COST {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best_c = -TOL_COST;
            for j in 0..t.ncols {
                if !in_phase1 && t.is_artificial[j] {
                    continue;
                }
                if costs[j] < best_c {
                    best_c = costs[j];
                    enter = Some(j);
                }
            }
        }
        let Some(c) = enter else {
            return Ok(LoopOutcome::Optimal);
        };
        // Ratio test; ties go to the lowest row index (Dantzig) or the
        // lowest basic column index (Bland).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..t.rows.len() {
            let a = t.rows[i][c];
            if a > TOL_PIVOT {
                let b = t.rows[i][t.ncols].max(0.0);
                let ratio = b / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-12
                            || (ratio < best_ratio + 1e-12 && bland && t.basis[i] < t.basis[l])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            if in_phase1 {
                // The artificial sum is bounded below by zero, so a failed
                // ratio test here means the tableau degraded numerically.
                return Err(Error::Numerical(
                    "phase 1 lost boundedness; tableau is numerically degenerate".into(),
                ));
            }
            return Ok(LoopOutcome::Unbounded);
        };
        // The last cost entry holds minus the objective, so it strictly
        // increases on every improving pivot.
        let before = costs[t.ncols];
        t.pivot(r, c, in_phase1);
        *iterations += 1;
        let after = if in_phase1 {
            t.pcost[t.ncols]
        } else {
            t.cost[t.ncols]
        };
        if after <= before + 1e-12 {
            stall += 1;
            if stall > stall_limit {
                bland = true;
            }
        } else {
            stall = 0;
        }
    }
}

/// Solves a linear program. Returns `Optimal`, `Infeasible`, or `Unbounded`
/// in the solution status; errors are reserved for invalid models, numerical
/// breakdown, and iteration caps.
pub fn solve_lp(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution> {
    lp.validate()?;
    let canon = canonicalize(lp);
    let nrows = canon.rows.len();
    let ncols = canon.cost.len();

    let mut t = Tableau {
        rows: canon
            .rows
            .iter()
            .zip(&canon.rhs)
            .map(|(r, &b)| {
                let mut v = r.clone();
                v.push(b);
                v
            })
            .collect(),
        cost: {
            let mut v = canon.cost.clone();
            v.push(0.0);
            v
        },
        pcost: vec![0.0; ncols + 1],
        basis: canon.unit_col.clone(),
        is_artificial: {
            let mut v = vec![false; ncols];
            for &c in &canon.artificial {
                v[c] = true;
            }
            v
        },
        ncols,
    };

    let mut iterations = 0usize;
    let rhs_scale = 1.0 + canon.rhs.iter().fold(0.0_f64, |m, b| m.max(b.abs()));

    if !canon.artificial.is_empty() {
        // Phase-1 reduced costs: minus the column sums over artificial rows.
        for i in 0..nrows {
            if t.is_artificial[t.basis[i]] {
                for k in 0..=ncols {
                    t.pcost[k] -= t.rows[i][k];
                }
            }
        }
        for &c in &canon.artificial {
            t.pcost[c] = 0.0;
        }
        match pivot_loop(&mut t, true, opts, &mut iterations)? {
            LoopOutcome::Optimal => {}
            LoopOutcome::Unbounded => {
                return Err(Error::Numerical("phase 1 reported unbounded".into()))
            }
        }
        let phase1 = -t.pcost[ncols];
        if phase1 > opts.tol_feas * rhs_scale {
            return Ok(LpSolution {
                status: SolveStatus::Infeasible,
                x: Vec::new(),
                objective: f64::INFINITY,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                iterations,
            });
        }
        // Drive leftover basic artificials out; rows where no structural
        // pivot exists are redundant and stay inert at zero.
        for i in 0..nrows {
            if t.is_artificial[t.basis[i]] {
                let mut target = None;
                for j in 0..ncols {
                    if !t.is_artificial[j] && t.rows[i][j].abs() > TOL_PIVOT {
                        target = Some(j);
                        break;
                    }
                }
                if let Some(c) = target {
                    t.pivot(i, c, true);
                    iterations += 1;
                }
            }
        }
    }

    match pivot_loop(&mut t, false, opts, &mut iterations)? {
        LoopOutcome::Optimal => {}
        LoopOutcome::Unbounded => {
            return Ok(LpSolution {
                status: SolveStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                iterations,
            });
        }
    }

    // Extract the internal point.
    let mut xi = vec![0.0; ncols];
    for i in 0..nrows {
        xi[t.basis[i]] = t.rows[i][ncols];
    }
    let mut x = vec![0.0; lp.num_vars];
    for (j, m) in canon.col_map.iter().enumerate() {
        x[j] = match *m {
            ColMap::Shifted { col, shift } => xi[col] + shift,
            ColMap::Split { pos, neg } => xi[pos] - xi[neg],
        };
    }
    for v in &x {
        if !v.is_finite() {
            return Err(Error::Numerical(
                "solution contains non-finite values".into(),
            ));
        }
    }

    // Internal duals from the designated unit column of each row:
    // a column equal to +e_i with zero cost has reduced cost -y_i.
    let y_int: Vec<f64> = (0..nrows).map(|i| -t.cost[canon.unit_col[i]]).collect();
    let mut duals = Vec::with_capacity(canon.num_user_rows);
    for i in 0..canon.num_user_rows {
        duals.push(canon.flip[i] * y_int[i]);
    }
    // Upper-bound row duals fold into user-level reduced costs.
    let mut ub_dual = vec![0.0; lp.num_vars];
    let mut next_ub_row = canon.num_user_rows;
    for j in 0..lp.num_vars {
        if lp.bounds[j].upper.is_finite() {
            // Every finite upper bound produced one row, in variable order.
            ub_dual[j] = y_int[next_ub_row];
            next_ub_row += 1;
        }
    }
    let mut reduced_costs = Vec::with_capacity(lp.num_vars);
    for (j, m) in canon.col_map.iter().enumerate() {
        let col = match *m {
            ColMap::Shifted { col, .. } => col,
            ColMap::Split { pos, .. } => pos,
        };
        reduced_costs.push(t.cost[col] + ub_dual[j]);
    }

    let objective = lp.objective_value(&x);
    if !objective.is_finite() {
        return Err(Error::Numerical("objective is not finite".into()));
    }

    // Final audit: the reported point must satisfy every row and bound to
    // the feasibility tolerance, scaled by the row magnitude.
    for (i, row) in lp.constraints.iter().enumerate() {
        let lhs = row.dot(&x);
        let scale = 1.0 + row.rhs.abs();
        let viol = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        if viol > opts.tol_feas * scale * 10.0 {
            return Err(Error::Numerical(format!(
                "optimal point violates constraint {i} by {viol:.3e}"
            )));
        }
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let scale = 1.0 + b.lower.abs().min(b.upper.abs());
        if x[j] < b.lower - opts.tol_feas * scale * 10.0
            || x[j] > b.upper + opts.tol_feas * scale * 10.0
        {
            return Err(Error::Numerical(format!(
                "optimal point violates bounds of variable {j}"
            )));
        }
        // Snap tiny bound violations so downstream models see clean values.
        x[j] = x[j].clamp(b.lower, b.upper);
    }
    let objective = lp.objective_value(&x);

    Ok(LpSolution {
        status: SolveStatus::Optimal,
        x,
        objective,
        duals,
        reduced_costs,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::VarBounds;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn solves_simple_box() {
        let mut lp = LinearProgram::new(2, vec![-1.0, -1.0]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn classic_duals() {
        // min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
        let mut lp = LinearProgram::new(2, vec![-3.0, -5.0]);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add_constraint(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add_constraint(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.x[1] - 6.0).abs() < 1e-9);
        assert!(s.duals[0].abs() < 1e-9);
        assert!((s.duals[1] + 1.5).abs() < 1e-9);
        assert!((s.duals[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LinearProgram::new(1, vec![-1.0]);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(1, vec![0.0]);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, -1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn handles_equality_and_free_vars() {
        // min y s.t. x + y = -5, x free, y >= 0 -> x = -5, y = 0.
        let mut lp = LinearProgram::new(2, vec![0.0, 1.0]);
        lp.bounds[0] = VarBounds::free();
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, -5.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] + 5.0).abs() < 1e-9);
        assert!(s.x[1].abs() < 1e-9);
    }

    #[test]
    fn handles_shifted_bounds() {
        let mut lp = LinearProgram::new(1, vec![1.0]);
        lp.bounds[0] = VarBounds::interval(2.5, 7.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert!((s.objective - 2.5).abs() < 1e-9);

        let mut lp = LinearProgram::new(1, vec![1.0]);
        lp.bounds[0] = VarBounds::interval(-3.0, -1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert!((s.objective + 3.0).abs() < 1e-9);
    }

    #[test]
    fn handles_ge_rows() {
        // min x + y s.t. x + 2y >= 4, 3x + y >= 6.
        let mut lp = LinearProgram::new(2, vec![1.0, 1.0]);
        lp.add_constraint(vec![(0, 1.0), (1, 2.0)], Relation::Ge, 4.0);
        lp.add_constraint(vec![(0, 3.0), (1, 1.0)], Relation::Ge, 6.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        // Vertex at the intersection: x = 8/5, y = 6/5.
        assert!((s.objective - 2.8).abs() < 1e-9);
        // >= rows of a minimization carry nonnegative marginals.
        assert!(s.duals.iter().all(|&d| d >= -1e-9));
    }

    #[test]
    fn strong_duality_holds() {
        let mut lp = LinearProgram::new(3, vec![2.0, 3.0, 1.0]);
        lp.bounds[2] = VarBounds::interval(0.0, 0.8);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Ge, 2.0);
        lp.add_constraint(vec![(0, 2.0), (1, 1.0)], Relation::Ge, 1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
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
            } else if rc < -1e-9 {
                dual_obj += rc * lp.bounds[j].upper;
            }
        }
        assert!((dual_obj - s.objective).abs() < 1e-7 * (1.0 + s.objective.abs()));
    }

    #[test]
    fn deterministic_replay() {
        let mut lp = LinearProgram::new(4, vec![-1.0, -2.0, 0.5, -0.3]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Le, 10.0);
        lp.add_constraint(vec![(0, 2.0), (1, -1.0), (3, 1.0)], Relation::Le, 6.0);
        lp.add_constraint(vec![(1, 1.0), (3, 2.0)], Relation::Ge, 1.0);
        let a = solve_lp(&lp, &opts()).unwrap();
        let b = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }
}

//! Linear and mixed-integer programming on dense tableaus.
//!
//! Solves
//!
//! ```text
//! min  c'x   subject to   a_i'x {<=,=,>=} b_i,   l <= x <= u,
//! ```
//!
//! with a deterministic two-phase primal simplex (Dantzig pricing, Bland's
//! rule after cycling is detected) and a depth-first branch-and-bound layer
//! for integrality. The implementation favors reproducibility over speed:
//! identical model bits always produce identical solution bits. Sparse
//! revised simplex, presolve, and interior-point methods are out of scope.

mod milp;
mod mps;
mod simplex;

pub use milp::solve_milp;
pub use mps::to_mps;
pub use simplex::solve_lp;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `a'x <= b`
    Le,
    /// `a'x = b`
    Eq,
    /// `a'x >= b`
    Ge,
}

/// A single linear constraint with a sparse coefficient row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    /// `(variable index, coefficient)` pairs; indices must be in range and
    /// strictly increasing.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Evaluates the row at a point.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// Variable bounds; use `f64::NEG_INFINITY` / `f64::INFINITY` for free sides.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VarBounds {
    pub lower: f64,
    pub upper: f64,
}

impl VarBounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        VarBounds { lower, upper }
    }

    pub fn nonnegative() -> Self {
        VarBounds {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        VarBounds { lower, upper }
    }

    pub fn free() -> Self {
        VarBounds {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }
}

/// A linear program in minimization form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Objective coefficients, length `num_vars`; the sense is always `min`.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable bounds, length `num_vars`.
    pub bounds: Vec<VarBounds>,
    /// Optional variable names used by diagnostics and MPS export.
    pub var_names: Option<Vec<String>>,
}

impl LinearProgram {
    /// Creates a program with all variables nonnegative and no constraints.
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Self {
        LinearProgram {
            num_vars,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::nonnegative(); num_vars],
            var_names: None,
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints
            .push(Constraint::new(coeffs, relation, rhs));
    }

    /// Structural validation: finite coefficients, index ranges, bound order.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::InvalidModel(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        if self.bounds.len() != self.num_vars {
            return Err(Error::InvalidModel(format!(
                "bounds has {} entries for {} variables",
                self.bounds.len(),
                self.num_vars
            )));
        }
        if let Some(names) = &self.var_names {
            if names.len() != self.num_vars {
                return Err(Error::InvalidModel(format!(
                    "var_names has {} entries for {} variables",
                    names.len(),
                    self.num_vars
                )));
            }
        }
        for (j, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Numerical(format!(
                    "objective coefficient {j} is not finite"
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() {
                return Err(Error::Numerical(format!("bounds of variable {j} are NaN")));
            }
            if b.lower > b.upper {
                return Err(Error::InvalidModel(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    b.lower, b.upper
                )));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Numerical(format!(
                    "rhs of constraint {i} is not finite"
                )));
            }
            let mut last: Option<usize> = None;
            for &(j, a) in &row.coeffs {
                if j >= self.num_vars {
                    return Err(Error::InvalidModel(format!(
                        "constraint {i} references variable {j} out of range"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Numerical(format!(
                        "constraint {i} has non-finite coefficient on variable {j}"
                    )));
                }
                if let Some(p) = last {
                    if j <= p {
                        return Err(Error::InvalidModel(format!(
                            "constraint {i} has non-increasing variable indices"
                        )));
                    }
                }
                last = Some(j);
            }
        }
        Ok(())
    }

    /// Objective value at a point.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// A linear program plus integrality requirements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedProgram {
    pub base: LinearProgram,
    /// Variables required to take integer values; each must have finite bounds.
    pub integral_vars: Vec<usize>,
    /// Subset of `integral_vars` restricted to `{0, 1}`.
    pub binary_vars: Vec<usize>,
}

impl MixedProgram {
    pub fn new(base: LinearProgram, integral_vars: Vec<usize>, binary_vars: Vec<usize>) -> Self {
        MixedProgram {
            base,
            integral_vars,
            binary_vars,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.integral_vars.len() > 64 {
            return Err(Error::InvalidModel(format!(
                "{} integral variables exceed the supported maximum of 64",
                self.integral_vars.len()
            )));
        }
        for &j in &self.integral_vars {
            if j >= self.base.num_vars {
                return Err(Error::InvalidModel(format!(
                    "integral variable {j} out of range"
                )));
            }
            let b = self.base.bounds[j];
            if !b.lower.is_finite() || !b.upper.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "integral variable {j} must have finite bounds"
                )));
            }
        }
        for &j in &self.binary_vars {
            if !self.integral_vars.contains(&j) {
                return Err(Error::InvalidModel(format!(
                    "binary variable {j} is not listed as integral"
                )));
            }
            let b = self.base.bounds[j];
            if b.lower < -1e-12 || b.upper > 1.0 + 1e-12 {
                return Err(Error::InvalidModel(format!(
                    "binary variable {j} must have bounds inside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Terminal status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or MILP solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: SolveStatus,
    /// Primal point, length `num_vars`; meaningful only when `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Per-constraint dual values in the marginal convention
    /// `duals[i] = d(objective)/d(rhs_i)`: nonpositive for `<=` rows and
    /// nonnegative for `>=` rows of a minimization. Valid only for pure LP
    /// solves at optimality; empty for MILP solutions.
    pub duals: Vec<f64>,
    /// Per-variable reduced costs under the same convention; empty for MILP.
    pub reduced_costs: Vec<f64>,
    /// Simplex pivots performed (LP) or summed over all nodes (MILP).
    pub iterations: usize,
}

/// Solver tolerances and caps.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Absolute feasibility tolerance on constraint and bound violations.
    pub tol_feas: f64,
    /// Relative objective tolerance: comparisons use `tol_obj * (1 + |value|)`.
    pub tol_obj: f64,
    /// Simplex pivot cap per LP solve.
    pub max_iterations: usize,
    /// Node cap for branch and bound.
    pub max_nodes: usize,
    /// Integrality tolerance for branch and bound.
    pub int_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_feas: 1e-7,
            tol_obj: 1e-6,
            max_iterations: 50_000,
            max_nodes: 100_000,
            int_tol: 1e-6,
        }
    }
}

/// One constraint or bound violation found by [`check_feasible`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    /// Human-readable site, e.g. `constraint 3` or `lower bound of x2`.
    pub site: String,
    pub amount: f64,
}

/// Feasibility report for a candidate point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_violation: f64,
    pub violations: Vec<Violation>,
}

/// Checks a point against all constraints and bounds of `lp` with absolute
/// tolerance `tol`.
pub fn check_feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    if x.len() != lp.num_vars {
        return Err(Error::InvalidModel(format!(
            "point has {} entries for {} variables",
            x.len(),
            lp.num_vars
        )));
    }
    let mut violations = Vec::new();
    let mut max_violation = 0.0_f64;
    let mut push = |site: String, amount: f64| {
        if amount > tol {
            violations.push(Violation { site, amount });
        }
        if amount > max_violation {
            max_violation = amount;
        }
    };
    for (j, (&v, b)) in x.iter().zip(&lp.bounds).enumerate() {
        push(format!("lower bound of variable {j}"), b.lower - v);
        push(format!("upper bound of variable {j}"), v - b.upper);
    }
    for (i, row) in lp.constraints.iter().enumerate() {
        let lhs = row.dot(x);
        let gap = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        push(format!("constraint {i}"), gap);
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        max_violation,
        violations,
    })
}

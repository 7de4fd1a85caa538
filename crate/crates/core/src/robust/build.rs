//! LP construction and solve wrappers for the nominal, conventional, and
//! full-budget models.
//!
//! The conventional robust counterpart keeps the deviation controls `z+`,
//! `z-` as decision variables and prices the worst-case penalty through the
//! dual of the budgeted inner maximum
//!
//! ```text
//! max  sum_j c2_j (y_up_j - y_nom_j) z_j
//! s.t. sum_{j in t} z_j <= gamma_t  per group t,   0 <= z <= 1,
//! ```
//!
//! whose dual contributes `xi_t` per group and `mu_j` per coordinate with
//! rows `xi_t + mu_j >= c2_j (y_up_j - y_nom_j)`. Strong duality makes the
//! priced term equal the greedy value of [`worst_case_inner`]; the solved
//! models carry that identity into their `worst_case_term` field.

use std::ops::Range;

use crate::lp::{solve_lp, LinearProgram, LpSolution, Relation, SolveOptions, VarBounds};
use crate::{Error, Result};

use super::{BudgetSpec, ModelVariant, NominalInstance, RobustSolution};

/// Column ranges of a built model, for extracting structured solutions.
#[derive(Debug, Clone)]
pub struct VarLayout {
    pub x: Range<usize>,
    pub y: Range<usize>,
    /// Upward deviation controls: `z+` (conventional) or `r` (effective).
    pub dev_plus: Option<Range<usize>>,
    /// Downward deviation controls `z-`.
    pub dev_minus: Option<Range<usize>>,
    /// Per-group budget duals `xi`.
    pub xi: Option<Range<usize>>,
    /// Per-coordinate cap duals `mu`.
    pub mu: Option<Range<usize>>,
    /// Per-coordinate floor duals `lambda` (effective model only).
    pub lambda: Option<Range<usize>>,
    /// Constant added to the LP objective to obtain the model objective.
    pub constant: f64,
}

impl VarLayout {
    fn bounds_only(p: usize, m: usize, constant: f64) -> Self {
        VarLayout {
            x: 0..p,
            y: p..p + m,
            dev_plus: None,
            dev_minus: None,
            xi: None,
            mu: None,
            lambda: None,
            constant,
        }
    }
}

/// A linear program together with the layout needed to read it back.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub lp: LinearProgram,
    pub layout: VarLayout,
    pub variant: ModelVariant,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Adds the resource rows `A x + B y <= g` with `x` at columns `x0..` and
/// `y` at columns `y0..`.
pub(crate) fn push_resource_rows(
    lp: &mut LinearProgram,
    inst: &NominalInstance,
    x0: usize,
    y0: usize,
) {
    for i in 0..inst.num_rows() {
        let mut coeffs = Vec::new();
        for (k, &a) in inst.a[i].iter().enumerate() {
            if a != 0.0 {
                coeffs.push((x0 + k, a));
            }
        }
        for (j, &b) in inst.b[i].iter().enumerate() {
            if b != 0.0 {
                coeffs.push((y0 + j, b));
            }
        }
        lp.add_constraint(coeffs, Relation::Le, inst.g[i]);
    }
}

pub(crate) fn names(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (0..count).map(move |i| format!("{prefix}{i}"))
}

/// Builds the nominal model: utilization capped at `y_nominal`.
pub fn build_nominal(inst: &NominalInstance) -> Result<BuiltModel> {
    inst.validate()?;
    let (p, m) = (inst.num_allocations(), inst.num_resources());
    let mut obj = Vec::with_capacity(p + m);
    obj.extend_from_slice(&inst.c1);
    obj.extend(inst.c2.iter().map(|&c| -c));
    let mut lp = LinearProgram::new(p + m, obj);
    for j in 0..m {
        lp.bounds[p + j] = VarBounds::interval(0.0, inst.y_nominal[j]);
    }
    push_resource_rows(&mut lp, inst, 0, p);
    lp.var_names = Some(names("x", p).chain(names("y", m)).collect());
    lp.validate()?;
    Ok(BuiltModel {
        lp,
        layout: VarLayout::bounds_only(p, m, dot(&inst.c2, &inst.y_nominal)),
        variant: ModelVariant::Nominal,
    })
}

/// Builds the full-budget model: every deviation at its bound, utilization
/// capped at `y_up`.
pub fn build_full_budget(inst: &NominalInstance) -> Result<BuiltModel> {
    inst.validate()?;
    let (p, m) = (inst.num_allocations(), inst.num_resources());
    let mut obj = Vec::with_capacity(p + m);
    obj.extend_from_slice(&inst.c1);
    obj.extend(inst.c2.iter().map(|&c| -c));
    let mut lp = LinearProgram::new(p + m, obj);
    for j in 0..m {
        lp.bounds[p + j] = VarBounds::interval(0.0, inst.y_up[j]);
    }
    push_resource_rows(&mut lp, inst, 0, p);
    lp.var_names = Some(names("x", p).chain(names("y", m)).collect());
    lp.validate()?;
    Ok(BuiltModel {
        lp,
        layout: VarLayout::bounds_only(p, m, dot(&inst.c2, &inst.y_up)),
        variant: ModelVariant::FullBudget,
    })
}

/// Builds the conventional robust counterpart for a budget specification.
///
/// Columns: `x (p) | y (m) | z+ (m) | z- (m) | xi (groups) | mu (m)`.
/// Rows: resource rows, per-coordinate caps
/// `y_j - (y_up_j - y_nom_j) z+_j + (y_nom_j - y_low_j) z-_j <= y_nom_j`,
/// per-group budgets `sum (z+ + z-) <= gamma_t`, and the dual feasibility
/// rows of the inner maximum.
pub fn build_conventional(inst: &NominalInstance, budget: &BudgetSpec) -> Result<BuiltModel> {
    inst.validate()?;
    let m = inst.num_resources();
    let owner = budget.validate(m)?;
    let p = inst.num_allocations();
    let ng = budget.groups.len();
    let (y0, zp0, zm0, xi0, mu0) = (p, p + m, p + 2 * m, p + 3 * m, p + 3 * m + ng);
    let nv = mu0 + m;

    let mut obj = vec![0.0; nv];
    obj[..p].copy_from_slice(&inst.c1);
    for j in 0..m {
        obj[y0 + j] = -inst.c2[j];
        obj[mu0 + j] = 1.0;
    }
    for (t, g) in budget.groups.iter().enumerate() {
        obj[xi0 + t] = g.gamma;
    }

    let mut lp = LinearProgram::new(nv, obj);
    for j in 0..m {
        lp.bounds[zp0 + j] = VarBounds::interval(0.0, 1.0);
        lp.bounds[zm0 + j] = VarBounds::interval(0.0, 1.0);
    }

    push_resource_rows(&mut lp, inst, 0, y0);
    for j in 0..m {
        let up = inst.y_up[j] - inst.y_nominal[j];
        let down = inst.y_nominal[j] - inst.y_low[j];
        let mut coeffs = vec![(y0 + j, 1.0)];
        if up != 0.0 {
            coeffs.push((zp0 + j, -up));
        }
        if down != 0.0 {
            coeffs.push((zm0 + j, down));
        }
        lp.add_constraint(coeffs, Relation::Le, inst.y_nominal[j]);
    }
    for g in &budget.groups {
        let mut idx: Vec<usize> = g.indices.clone();
        idx.sort_unstable();
        let mut coeffs: Vec<(usize, f64)> = idx.iter().map(|&j| (zp0 + j, 1.0)).collect();
        coeffs.extend(idx.iter().map(|&j| (zm0 + j, 1.0)));
        lp.add_constraint(coeffs, Relation::Le, g.gamma);
    }
    for (j, &t) in owner.iter().enumerate() {
        let w = inst.c2[j] * (inst.y_up[j] - inst.y_nominal[j]);
        lp.add_constraint(vec![(xi0 + t, 1.0), (mu0 + j, 1.0)], Relation::Ge, w);
    }

    lp.var_names = Some(
        names("x", p)
            .chain(names("y", m))
            .chain(names("zp", m))
            .chain(names("zm", m))
            .chain(names("xi", ng))
            .chain(names("mu", m))
            .collect(),
    );
    lp.validate()?;
    Ok(BuiltModel {
        lp,
        layout: VarLayout {
            x: 0..p,
            y: y0..y0 + m,
            dev_plus: Some(zp0..zp0 + m),
            dev_minus: Some(zm0..zm0 + m),
            xi: Some(xi0..xi0 + ng),
            mu: Some(mu0..mu0 + m),
            lambda: None,
            constant: dot(&inst.c2, &inst.y_nominal),
        },
        variant: ModelVariant::Conventional,
    })
}

/// Exact value and maximizer of the budgeted inner maximum
/// `max sum_j c2_j (y_up_j - y_nom_j) z_j` over the deviation budget,
/// solved per group by the greedy fill: weights descending, ties to the
/// lowest index, whole units then one fractional remainder.
pub fn worst_case_inner(inst: &NominalInstance, budget: &BudgetSpec) -> Result<(f64, Vec<f64>)> {
    let m = inst.num_resources();
    budget.validate(m)?;
    let w: Vec<f64> = (0..m)
        .map(|j| inst.c2[j] * (inst.y_up[j] - inst.y_nominal[j]))
        .collect();
    let mut z = vec![0.0; m];
    let mut value = 0.0;
    for g in &budget.groups {
        let mut order = g.indices.clone();
        order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
        let mut left = g.gamma;
        for &j in &order {
            if left <= 0.0 || w[j] <= 0.0 {
                break;
            }
            let take = left.min(1.0);
            z[j] = take;
            value += w[j] * take;
            left -= take;
        }
    }
    Ok((value, z))
}

/// Whether the optimum is insensitive to enlarging resource availability:
/// true when some resource row is binding at `(x, y)`, carries nonnegative
/// allocation load `A_i x >= 0`, and couples a resource whose penalty
/// dominates every allocation cost.
pub fn insensitivity_holds(inst: &NominalInstance, x: &[f64], y: &[f64], tol: f64) -> bool {
    let cmax = inst.max_allocation_cost();
    for i in 0..inst.num_rows() {
        let ax = dot(&inst.a[i], x);
        let lhs = ax + dot(&inst.b[i], y);
        if (lhs - inst.g[i]).abs() > tol * (1.0 + inst.g[i].abs()) || ax < -tol {
            continue;
        }
        let witness = inst.b[i]
            .iter()
            .zip(&inst.c2)
            .any(|(&bij, &c2j)| bij > tol && c2j >= cmax);
        if witness {
            return true;
        }
    }
    false
}

pub(crate) fn require_optimal(sol: &LpSolution, variant: ModelVariant) -> Result<()> {
    match sol.status {
        crate::lp::SolveStatus::Optimal => Ok(()),
        crate::lp::SolveStatus::Infeasible => Err(Error::Infeasible(format!(
            "{} model has no feasible point",
            variant.as_str()
        ))),
        crate::lp::SolveStatus::Unbounded => Err(Error::Unbounded(format!(
            "{} model has unbounded optimum",
            variant.as_str()
        ))),
    }
}

pub(crate) fn slice(sol: &LpSolution, range: &Range<usize>) -> Vec<f64> {
    sol.x[range.clone()].to_vec()
}

/// Solves the nominal model.
pub fn solve_nominal(inst: &NominalInstance, opts: &SolveOptions) -> Result<RobustSolution> {
    let built = build_nominal(inst)?;
    let sol = solve_lp(&built.lp, opts).map_err(|e| e.in_stage("nominal model"))?;
    require_optimal(&sol, built.variant)?;
    let x = slice(&sol, &built.layout.x);
    let y = slice(&sol, &built.layout.y);
    let comparable_cost = dot(&inst.c1, &x) - dot(&inst.c2, &y) + dot(&inst.c2, &inst.y_nominal);
    Ok(RobustSolution {
        variant: ModelVariant::Nominal,
        deviations: vec![0.0; inst.num_resources()],
        objective: sol.objective + built.layout.constant,
        worst_case_term: 0.0,
        comparable_cost,
        gamma_total: 0.0,
        gamma_effective: None,
        cases: None,
        iterations: sol.iterations,
        x,
        y,
    })
}

/// Solves the conventional robust counterpart.
pub fn solve_conventional(
    inst: &NominalInstance,
    budget: &BudgetSpec,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let built = build_conventional(inst, budget)?;
    let sol = solve_lp(&built.lp, opts).map_err(|e| e.in_stage("conventional model"))?;
    require_optimal(&sol, built.variant)?;
    let layout = &built.layout;
    let x = slice(&sol, &layout.x);
    let y = slice(&sol, &layout.y);
    let deviations = slice(&sol, layout.dev_plus.as_ref().expect("conventional layout"));
    let xi = slice(&sol, layout.xi.as_ref().expect("conventional layout"));
    let mu = slice(&sol, layout.mu.as_ref().expect("conventional layout"));
    let worst_case_term = budget
        .groups
        .iter()
        .zip(&xi)
        .map(|(g, v)| g.gamma * v)
        .sum::<f64>()
        + mu.iter().sum::<f64>();
    let (wc, _) = worst_case_inner(inst, budget)?;
    let comparable_cost =
        dot(&inst.c1, &x) - dot(&inst.c2, &y) + dot(&inst.c2, &inst.y_nominal) + wc;
    Ok(RobustSolution {
        variant: ModelVariant::Conventional,
        objective: sol.objective + layout.constant,
        worst_case_term,
        comparable_cost,
        gamma_total: budget.total_gamma(),
        gamma_effective: None,
        cases: None,
        iterations: sol.iterations,
        x,
        y,
        deviations,
    })
}

/// Solves the full-budget model.
pub fn solve_full_budget(inst: &NominalInstance, opts: &SolveOptions) -> Result<RobustSolution> {
    let built = build_full_budget(inst)?;
    let sol = solve_lp(&built.lp, opts).map_err(|e| e.in_stage("full-budget model"))?;
    require_optimal(&sol, built.variant)?;
    let m = inst.num_resources();
    let x = slice(&sol, &built.layout.x);
    let y = slice(&sol, &built.layout.y);
    let wc: f64 = (0..m)
        .map(|j| inst.c2[j] * (inst.y_up[j] - inst.y_nominal[j]))
        .sum();
    let comparable_cost =
        dot(&inst.c1, &x) - dot(&inst.c2, &y) + dot(&inst.c2, &inst.y_nominal) + wc;
    Ok(RobustSolution {
        variant: ModelVariant::FullBudget,
        deviations: vec![1.0; m],
        objective: sol.objective + built.layout.constant,
        worst_case_term: wc,
        comparable_cost,
        gamma_total: m as f64,
        gamma_effective: None,
        cases: None,
        iterations: sol.iterations,
        x,
        y,
    })
}

//! Stage 2: the robust counterpart over the admissible box.
//!
//! Deviations are re-expressed around the admissible midpoint through
//! controls `r_j in [v_j, 1]`: utilization is capped at
//! `s_mid_j + r_j (s_up_j - s_mid_j)` and the budget rows charge
//! `sum_{j in t} e_j r_j <= gamma_eff_t`. The worst-case penalty over that
//! set,
//!
//! ```text
//! max  sum_j c2_j (s_up_j - s_mid_j) rho_j
//! s.t. sum_{j in t} e_j rho_j <= gamma_eff_t,   v <= rho <= 1,
//! ```
//!
//! is priced exactly through its dual: `xi_t` per budget row, `mu_j` for
//! the ceilings `rho_j <= 1`, `lambda_j` for the floors `rho_j >= v_j`,
//! with rows `e_j xi_t + mu_j - lambda_j >= c2_j (s_up_j - s_mid_j)` and
//! objective contribution `sum_t gamma_eff_t xi_t + sum_j (mu_j - v_j lambda_j)`.

use crate::lp::{solve_lp, LinearProgram, Relation, SolveOptions, VarBounds};
use crate::robust::{
    worst_case_inner, BudgetSpec, BuiltModel, ModelVariant, NominalInstance, RobustSolution,
    VarLayout,
};
use crate::{Error, Result};

use super::{stage1_admissible, AdmissibleInterval, EffectiveParams};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn names(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (0..count).map(move |i| format!("{prefix}{i}"))
}

/// Builds the stage-2 effective model for a classified admissible interval.
///
/// Columns: `x (p) | y (m) | r (m) | xi (groups) | mu (m) | lambda (m)`.
pub fn build_stage2(
    inst: &NominalInstance,
    interval: &AdmissibleInterval,
    params: &EffectiveParams,
    budget: &BudgetSpec,
) -> Result<BuiltModel> {
    inst.validate()?;
    let m = inst.num_resources();
    let owner = budget.validate(m)?;
    if params.gamma_effective.len() != budget.groups.len() {
        return Err(Error::InvalidBudget(format!(
            "effective parameters carry {} groups for a budget with {}",
            params.gamma_effective.len(),
            budget.groups.len()
        )));
    }
    let p = inst.num_allocations();
    let ng = budget.groups.len();
    let (y0, r0, xi0) = (p, p + m, p + 2 * m);
    let (mu0, la0) = (xi0 + ng, xi0 + ng + m);
    let nv = la0 + m;

    let mut obj = vec![0.0; nv];
    obj[..p].copy_from_slice(&inst.c1);
    for j in 0..m {
        obj[y0 + j] = -inst.c2[j];
        obj[mu0 + j] = 1.0;
        obj[la0 + j] = -params.v[j];
    }
    obj[xi0..xi0 + ng].copy_from_slice(&params.gamma_effective);

    let mut lp = LinearProgram::new(nv, obj);
    for j in 0..m {
        lp.bounds[r0 + j] = VarBounds::interval(params.v[j], 1.0);
    }

    for i in 0..inst.num_rows() {
        let mut coeffs = Vec::new();
        for (k, &a) in inst.a[i].iter().enumerate() {
            if a != 0.0 {
                coeffs.push((k, a));
            }
        }
        for (j, &b) in inst.b[i].iter().enumerate() {
            if b != 0.0 {
                coeffs.push((y0 + j, b));
            }
        }
        lp.add_constraint(coeffs, Relation::Le, inst.g[i]);
    }
    for j in 0..m {
        let half = interval.s_up[j] - interval.s_mid[j];
        let mut coeffs = vec![(y0 + j, 1.0)];
        if half != 0.0 {
            coeffs.push((r0 + j, -half));
        }
        lp.add_constraint(coeffs, Relation::Le, interval.s_mid[j]);
    }
    for (t, g) in budget.groups.iter().enumerate() {
        let mut idx: Vec<usize> = g.indices.clone();
        idx.sort_unstable();
        let coeffs: Vec<(usize, f64)> = idx
            .iter()
            .filter(|&&j| params.e[j] != 0.0)
            .map(|&j| (r0 + j, params.e[j]))
            .collect();
        if !coeffs.is_empty() {
            lp.add_constraint(coeffs, Relation::Le, params.gamma_effective[t]);
        }
    }
    for (j, &t) in owner.iter().enumerate() {
        let w = inst.c2[j] * (interval.s_up[j] - interval.s_mid[j]);
        let mut coeffs = Vec::new();
        if params.e[j] != 0.0 {
            coeffs.push((xi0 + t, params.e[j]));
        }
        coeffs.push((mu0 + j, 1.0));
        coeffs.push((la0 + j, -1.0));
        lp.add_constraint(coeffs, Relation::Ge, w);
    }

    lp.var_names = Some(
        names("x", p)
            .chain(names("y", m))
            .chain(names("r", m))
            .chain(names("xi", ng))
            .chain(names("mu", m))
            .chain(names("la", m))
            .collect(),
    );
    lp.validate()?;
    Ok(BuiltModel {
        lp,
        layout: VarLayout {
            x: 0..p,
            y: y0..y0 + m,
            dev_plus: Some(r0..r0 + m),
            dev_minus: None,
            xi: Some(xi0..xi0 + ng),
            mu: Some(mu0..mu0 + m),
            lambda: Some(la0..la0 + m),
            constant: dot(&inst.c2, &interval.s_mid),
        },
        variant: ModelVariant::Effective,
    })
}

/// Solves the stage-2 model for an already-computed admissible interval.
pub fn solve_effective_with_interval(
    inst: &NominalInstance,
    interval: &AdmissibleInterval,
    budget: &BudgetSpec,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let params = EffectiveParams::compute(inst, interval, budget)?;
    let built = build_stage2(inst, interval, &params, budget)?;
    let sol = solve_lp(&built.lp, opts).map_err(|e| e.in_stage("stage-2 effective model"))?;
    match sol.status {
        crate::lp::SolveStatus::Optimal => {}
        status => {
            return Err(Error::Infeasible(format!(
                "stage-2 effective model ended {status:?} although the admissible interval exists"
            )));
        }
    }
    let layout = &built.layout;
    let x = sol.x[layout.x.clone()].to_vec();
    let y = sol.x[layout.y.clone()].to_vec();
    let deviations = sol.x[layout.dev_plus.clone().expect("stage-2 layout")].to_vec();
    let xi = &sol.x[layout.xi.clone().expect("stage-2 layout")];
    let mu = &sol.x[layout.mu.clone().expect("stage-2 layout")];
    let la = &sol.x[layout.lambda.clone().expect("stage-2 layout")];
    let worst_case_term = params
        .gamma_effective
        .iter()
        .zip(xi)
        .map(|(g, v)| g * v)
        .sum::<f64>()
        + mu.iter().sum::<f64>()
        - params.v.iter().zip(la).map(|(v, l)| v * l).sum::<f64>();
    let (wc_original, _) = worst_case_inner(inst, budget)?;
    let comparable_cost =
        dot(&inst.c1, &x) - dot(&inst.c2, &y) + dot(&inst.c2, &inst.y_nominal) + wc_original;
    Ok(RobustSolution {
        variant: ModelVariant::Effective,
        objective: sol.objective + layout.constant,
        worst_case_term,
        comparable_cost,
        gamma_total: budget.total_gamma(),
        gamma_effective: Some(params.gamma_effective.clone()),
        cases: Some(interval.cases.clone()),
        iterations: sol.iterations,
        x,
        y,
        deviations,
    })
}

/// Runs both stages: admissible interval, then the effective counterpart.
pub fn solve_effective(
    inst: &NominalInstance,
    budget: &BudgetSpec,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let interval = stage1_admissible(inst, opts)?;
    solve_effective_with_interval(inst, &interval, budget, opts)
}

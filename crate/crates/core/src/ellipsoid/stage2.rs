//! Cutting-plane second stage over the effective budgeted ellipsoid.
//!
//! With effective index set `I`, lengths `le_j`, caps `s_up`, radius
//! `gamma`, and budget `Gamma`, the deviation region in axis coordinates
//! is
//!
//! ```text
//! M = { mu : sum_{j in I} (mu_j / le_j)^2 <= gamma^2,
//!            sum_{j in I} |mu_j| <= Gamma },
//! ```
//!
//! and the second stage mirrors the decoupled interval counterpart:
//! deviation controls relax the utilization caps while the worst-case
//! penalty is the separate inner maximum over the same region,
//!
//! ```text
//! min  c1'x - c2'y + sum_I c2_j y_nom_j + sum_{I^c} c2_j s_up_j + WC
//! s.t. A x + B y <= g,      y_j <= y_nom_j + mu_j   (j in I),
//!      0 <= y_j <= s_up_j   (j in I^c),             mu in M,
//!
//! WC = max { sum_I c2_j mu_j : mu in M, mu >= 0 }.
//! ```
//!
//! Complement coordinates realize at their caps in the worst case and are
//! priced there; index-set coordinates realize at the center plus the
//! inner maximum. The quadratic constraint of `M` is enforced by gradient
//! cuts: whenever an LP optimum `mu*` violates it, the supporting cut
//!
//! ```text
//! sum_j 2 (mu*_j / le_j^2) mu_j <= gamma^2 + sum_j (mu*_j / le_j)^2
//! ```
//!
//! is added, which every point of the quadratic region satisfies and `mu*`
//! does not. The absolute-value budget is linearized by the split
//! `mu = mu+ - mu-`. Iterates approach the region from outside, so each
//! LP value is a valid bound for its problem; on the cut cap the best
//! bound is reported through the stall error.

use crate::lp::{solve_lp, LinearProgram, LpSolution, Relation, SolveOptions, VarBounds};
use crate::robust::build::{dot, names, push_resource_rows, require_optimal, slice};
use crate::robust::{BuiltModel, ModelVariant, NominalInstance, RobustSolution, VarLayout};
use crate::{Error, Result};

use super::EffectiveEllipsoid;

/// Relative tolerance on the quadratic cut violation, scaled by
/// `1 + gamma^2`.
const CUT_TOL: f64 = 1e-6;

/// Cap on the number of gradient cuts per solve.
const MAX_CUTS: usize = 200;

/// Solves `lp` with the quadratic region of radius `gamma` and lengths
/// `le` enforced on the deviation block by gradient cuts. The net
/// deviation is `x[plus0 + i] - x[minus0 + i]`, or just the plus block
/// when no minus block exists. Returns the final solution, the net
/// deviation, and the simplex pivots summed over all LP solves.
fn solve_with_cuts(
    lp: &mut LinearProgram,
    plus0: usize,
    minus0: Option<usize>,
    le: &[f64],
    gamma: f64,
    opts: &SolveOptions,
    what: &'static str,
) -> Result<(LpSolution, Vec<f64>, usize)> {
    let k = le.len();
    let viol_tol = CUT_TOL * (1.0 + gamma * gamma);
    let mut pivots = 0;
    let mut best = f64::NAN;
    for cut in 0..=MAX_CUTS {
        let sol = solve_lp(lp, opts).map_err(|e| e.in_stage(what))?;
        require_optimal(&sol, ModelVariant::Effective).map_err(|e| e.in_stage(what))?;
        pivots += sol.iterations;
        best = sol.objective;
        let mu: Vec<f64> = (0..k)
            .map(|i| sol.x[plus0 + i] - minus0.map_or(0.0, |m0| sol.x[m0 + i]))
            .collect();
        let quad: f64 = mu.iter().zip(le).map(|(&u, &l)| (u / l).powi(2)).sum();
        if quad - gamma * gamma <= viol_tol {
            return Ok((sol, mu, pivots));
        }
        if cut == MAX_CUTS {
            break;
        }
        let grad: Vec<f64> = (0..k).map(|i| 2.0 * mu[i] / (le[i] * le[i])).collect();
        let mut coeffs = Vec::with_capacity(2 * k);
        coeffs.extend(
            (0..k)
                .filter(|&i| grad[i] != 0.0)
                .map(|i| (plus0 + i, grad[i])),
        );
        if let Some(m0) = minus0 {
            coeffs.extend(
                (0..k)
                    .filter(|&i| grad[i] != 0.0)
                    .map(|i| (m0 + i, -grad[i])),
            );
        }
        lp.add_constraint(coeffs, Relation::Le, gamma * gamma + quad);
    }
    Err(Error::SolverStalled(format!(
        "{what}: cut cap of {MAX_CUTS} reached before the quadratic \
         constraint held; best bound {best}"
    )))
}

/// Exact value and maximizer of the budgeted ellipsoidal inner maximum
///
/// ```text
/// max { sum_j w_j mu_j : sum_j (mu_j / l_j)^2 <= gamma^2,
///                        sum_j |mu_j| <= budget }
/// ```
///
/// by gradient cuts on the quadratic constraint. Coordinates with
/// nonpositive weight or length keep their deviation at zero; the
/// returned maximizer is the last LP iterate, feasible within the cut
/// tolerance.
pub fn budgeted_ellipsoid_max(
    weights: &[f64],
    lengths: &[f64],
    gamma: f64,
    budget: f64,
    opts: &SolveOptions,
) -> Result<(f64, Vec<f64>)> {
    if weights.len() != lengths.len() {
        return Err(Error::InvalidModel(format!(
            "{} weights for {} lengths",
            weights.len(),
            lengths.len()
        )));
    }
    let m = weights.len();
    let active: Vec<usize> = (0..m)
        .filter(|&j| weights[j] > 0.0 && lengths[j] > 0.0)
        .collect();
    if active.is_empty() || gamma <= 0.0 || budget <= 0.0 {
        return Ok((0.0, vec![0.0; m]));
    }
    let k = active.len();
    let obj: Vec<f64> = active.iter().map(|&j| -weights[j]).collect();
    let le: Vec<f64> = active.iter().map(|&j| lengths[j]).collect();
    let mut lp = LinearProgram::new(k, obj);
    for (i, &l) in le.iter().enumerate() {
        lp.bounds[i] = VarBounds::interval(0.0, gamma * l);
    }
    lp.add_constraint((0..k).map(|i| (i, 1.0)).collect(), Relation::Le, budget);
    let (sol, mu_active, _) = solve_with_cuts(
        &mut lp,
        0,
        None,
        &le,
        gamma,
        opts,
        "ellipsoid inner maximum",
    )?;
    let mut mu = vec![0.0; m];
    for (i, &j) in active.iter().enumerate() {
        mu[j] = mu_active[i];
    }
    Ok((-sol.objective, mu))
}

/// Builds the LP part of the second stage. Columns:
/// `x (p) | y (m) | mu+ (|I|) | mu- (|I|)`. Rows: resource rows,
/// relaxed caps `y_j - mu+_i + mu-_i <= y_nom_j` on the index set, and
/// the budget row `sum (mu+ + mu-) <= budget`; the quadratic constraint
/// is added as cuts during the solve. The layout constant prices the
/// index set at the center and the complement at its caps.
pub fn build_ellipsoid_stage2(
    inst: &NominalInstance,
    eff: &EffectiveEllipsoid,
    gamma: f64,
    budget: f64,
) -> Result<BuiltModel> {
    inst.validate()?;
    let (p, m) = (inst.num_allocations(), inst.num_resources());
    if eff.caps.len() != m || eff.effective_lengths.len() != m {
        return Err(Error::InvalidModel(format!(
            "effective set describes {} coordinates for {m} resources",
            eff.caps.len()
        )));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidBudget(format!(
            "ellipsoid radius {gamma} must be finite and nonnegative"
        )));
    }
    if !budget.is_finite() || budget < 0.0 {
        return Err(Error::InvalidBudget(format!(
            "deviation budget {budget} must be finite and nonnegative"
        )));
    }
    let k = eff.index_set.len();
    let (y0, mp0, mm0) = (p, p + m, p + m + k);
    let nv = mm0 + k;

    let mut obj = vec![0.0; nv];
    obj[..p].copy_from_slice(&inst.c1);
    for j in 0..m {
        obj[y0 + j] = -inst.c2[j];
    }
    let mut lp = LinearProgram::new(nv, obj);
    for (i, &j) in eff.index_set.iter().enumerate() {
        let reach = gamma * eff.effective_lengths[j];
        lp.bounds[y0 + j] = VarBounds::interval(0.0, inst.y_nominal[j] + reach);
        lp.bounds[mp0 + i] = VarBounds::interval(0.0, reach);
        lp.bounds[mm0 + i] = VarBounds::interval(0.0, reach);
    }
    for &j in &eff.complement {
        lp.bounds[y0 + j] = VarBounds::interval(0.0, eff.caps[j]);
    }
    push_resource_rows(&mut lp, inst, 0, y0);
    for (i, &j) in eff.index_set.iter().enumerate() {
        lp.add_constraint(
            vec![(y0 + j, 1.0), (mp0 + i, -1.0), (mm0 + i, 1.0)],
            Relation::Le,
            inst.y_nominal[j],
        );
    }
    if k > 0 {
        let mut coeffs: Vec<(usize, f64)> = (0..k).map(|i| (mp0 + i, 1.0)).collect();
        coeffs.extend((0..k).map(|i| (mm0 + i, 1.0)));
        lp.add_constraint(coeffs, Relation::Le, budget);
    }
    lp.var_names = Some(
        names("x", p)
            .chain(names("y", m))
            .chain(names("mup", k))
            .chain(names("mum", k))
            .collect(),
    );
    lp.validate()?;
    let constant = eff
        .index_set
        .iter()
        .map(|&j| inst.c2[j] * inst.y_nominal[j])
        .sum::<f64>()
        + eff
            .complement
            .iter()
            .map(|&j| inst.c2[j] * eff.caps[j])
            .sum::<f64>();
    Ok(BuiltModel {
        lp,
        layout: VarLayout {
            x: 0..p,
            y: y0..y0 + m,
            dev_plus: Some(mp0..mp0 + k),
            dev_minus: Some(mm0..mm0 + k),
            xi: None,
            mu: None,
            lambda: None,
            constant,
        },
        variant: ModelVariant::Effective,
    })
}

/// Solves the effective ellipsoidal second stage by cutting planes and
/// prices the worst case.
///
/// The reported objective is the LP optimum plus the layout constant plus
/// the inner maximum of the penalties over the deviation region; a
/// degenerate effective set (empty index set) reduces the model to the
/// nominal one under the admissible caps with a zero worst-case term.
/// Ellipsoidal runs carry no interval-set repricing, so `comparable_cost`
/// equals the objective; `deviations` holds the net cap relaxation, zero
/// on the complement.
pub fn solve_ellipsoid_stage2(
    inst: &NominalInstance,
    eff: &EffectiveEllipsoid,
    gamma: f64,
    budget: f64,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let built = build_ellipsoid_stage2(inst, eff, gamma, budget)?;
    let mut lp = built.lp;
    let k = eff.index_set.len();
    let le: Vec<f64> = eff
        .index_set
        .iter()
        .map(|&j| eff.effective_lengths[j])
        .collect();
    let (sol, mu, pivots) = if k == 0 {
        let sol = solve_lp(&lp, opts).map_err(|e| e.in_stage("ellipsoid second stage"))?;
        require_optimal(&sol, ModelVariant::Effective)
            .map_err(|e| e.in_stage("ellipsoid second stage"))?;
        let pivots = sol.iterations;
        (sol, Vec::new(), pivots)
    } else {
        let mp0 = built
            .layout
            .dev_plus
            .as_ref()
            .expect("index set has a plus block")
            .start;
        let mm0 = built
            .layout
            .dev_minus
            .as_ref()
            .expect("index set has a minus block")
            .start;
        solve_with_cuts(
            &mut lp,
            mp0,
            Some(mm0),
            &le,
            gamma,
            opts,
            "ellipsoid second stage",
        )?
    };
    let x = slice(&sol, &built.layout.x);
    let y = slice(&sol, &built.layout.y);
    let mut deviations = vec![0.0; inst.num_resources()];
    for (i, &j) in eff.index_set.iter().enumerate() {
        deviations[j] = mu[i];
    }
    let weights: Vec<f64> = eff.index_set.iter().map(|&j| inst.c2[j]).collect();
    let (wc, _) = budgeted_ellipsoid_max(&weights, &le, gamma, budget, opts)?;
    let objective = dot(&inst.c1, &x) - dot(&inst.c2, &y) + built.layout.constant + wc;
    Ok(RobustSolution {
        variant: ModelVariant::Effective,
        x,
        y,
        deviations,
        objective,
        worst_case_term: wc,
        comparable_cost: objective,
        gamma_total: budget,
        gamma_effective: None,
        cases: None,
        iterations: pivots,
    })
}

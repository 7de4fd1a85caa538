//! Stage 1: the largest admissible sub-interval.
//!
//! A sub-box `[s_low, s_up]` of the uncertainty box is admissible when some
//! allocation `x` keeps every resource row satisfied at every realization
//! inside it. Each row's worst realization is a corner of the box, known at
//! build time from the sign of its coefficient: `s_up_j` where `B_ij > 0`
//! and `s_low_j` where `B_ij < 0`. The stage-1 model therefore linearizes
//! the per-row envelope coefficientwise and maximizes the retained interval:
//!
//! ```text
//! min  sum_j (cap_up_j - s_up_j) + sum_j (cap_low_j - s_low_j)
//! s.t. A_i x + sum_{B_ij > 0} B_ij s_up_j + sum_{B_ij < 0} B_ij s_low_j <= g_i
//!      s_low <= s_up,   0 <= s_up <= cap_up,   0 <= s_low <= cap_low.
//! ```
//!
//! For an instance this runs with `cap_up = y_up`, `cap_low = y_low`; the
//! application models reuse [`solve_stage1_system`] directly with their own
//! rows and allocation bounds.

use crate::lp::{solve_lp, LinearProgram, Relation, SolveOptions, VarBounds};
use crate::robust::{BuiltModel, ModelVariant, NominalInstance, RobustSolution};
use crate::{Error, Result};

use super::{classify, AdmissibleInterval};

/// A stage-1 feasibility system `A x + B s <= g`; `B` may carry any signs.
#[derive(Debug, Clone)]
pub struct Stage1System {
    /// Allocation coefficients, `n` rows of length `p`.
    pub a: Vec<Vec<f64>>,
    /// Resource coefficients, `n` rows of length `m`.
    pub b: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    /// Bounds on the allocation variables.
    pub x_bounds: Vec<VarBounds>,
    /// Upper cap on `s_up`, usually `y_up`.
    pub cap_up: Vec<f64>,
    /// Upper cap on `s_low`, usually `y_low`.
    pub cap_low: Vec<f64>,
}

/// Stage-1 solve result.
#[derive(Debug, Clone)]
pub struct Stage1Outcome {
    pub s_low: Vec<f64>,
    pub s_up: Vec<f64>,
    /// Allocation certifying admissibility of the interval.
    pub x: Vec<f64>,
    /// Interval-loss objective value.
    pub objective: f64,
    pub iterations: usize,
}

/// Solves a stage-1 system for the largest admissible sub-interval.
pub fn solve_stage1_system(sys: &Stage1System, opts: &SolveOptions) -> Result<Stage1Outcome> {
    let p = sys.x_bounds.len();
    let m = sys.cap_up.len();
    let (up0, lo0) = (p, p + m);
    let nv = p + 2 * m;

    let mut obj = vec![0.0; nv];
    for j in 0..m {
        obj[up0 + j] = -1.0;
        obj[lo0 + j] = -1.0;
    }
    let mut lp = LinearProgram::new(nv, obj);
    lp.bounds[..p].copy_from_slice(&sys.x_bounds);
    for j in 0..m {
        lp.bounds[up0 + j] = VarBounds::interval(0.0, sys.cap_up[j]);
        lp.bounds[lo0 + j] = VarBounds::interval(0.0, sys.cap_low[j]);
    }
    for i in 0..sys.g.len() {
        let mut coeffs = Vec::new();
        for (k, &a) in sys.a[i].iter().enumerate() {
            if a != 0.0 {
                coeffs.push((k, a));
            }
        }
        for (j, &b) in sys.b[i].iter().enumerate() {
            if b > 0.0 {
                coeffs.push((up0 + j, b));
            }
        }
        for (j, &b) in sys.b[i].iter().enumerate() {
            if b < 0.0 {
                coeffs.push((lo0 + j, b));
            }
        }
        lp.add_constraint(coeffs, Relation::Le, sys.g[i]);
    }
    for j in 0..m {
        lp.add_constraint(vec![(up0 + j, -1.0), (lo0 + j, 1.0)], Relation::Le, 0.0);
    }
    lp.validate()?;

    let sol = solve_lp(&lp, opts)?;
    match sol.status {
        crate::lp::SolveStatus::Optimal => {}
        crate::lp::SolveStatus::Infeasible => {
            return Err(Error::Infeasible(
                "no admissible point: the system cannot absorb any realization".into(),
            ));
        }
        crate::lp::SolveStatus::Unbounded => {
            return Err(Error::Numerical(
                "stage-1 interval objective reported unbounded, which contradicts its caps".into(),
            ));
        }
    }
    let caps_total: f64 = sys.cap_up.iter().sum::<f64>() + sys.cap_low.iter().sum::<f64>();
    Ok(Stage1Outcome {
        s_low: sol.x[lo0..lo0 + m].to_vec(),
        s_up: sol.x[up0..up0 + m].to_vec(),
        x: sol.x[..p].to_vec(),
        objective: sol.objective + caps_total,
        iterations: sol.iterations,
    })
}

/// Computes the admissible interval of an instance and classifies it.
pub fn stage1_admissible(
    inst: &NominalInstance,
    opts: &SolveOptions,
) -> Result<AdmissibleInterval> {
    inst.validate()?;
    let sys = Stage1System {
        a: inst.a.clone(),
        b: inst.b.clone(),
        g: inst.g.clone(),
        x_bounds: vec![VarBounds::nonnegative(); inst.num_allocations()],
        cap_up: inst.y_up.clone(),
        cap_low: inst.y_low.clone(),
    };
    let out =
        solve_stage1_system(&sys, opts).map_err(|e| e.in_stage("stage-1 admissible interval"))?;
    let cases = classify(&inst.y_low, &inst.y_nominal, &inst.y_up, &out.s_up);
    let s_mid: Vec<f64> = out
        .s_low
        .iter()
        .zip(&out.s_up)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    Ok(AdmissibleInterval {
        s_low: out.s_low,
        s_up: out.s_up,
        s_mid,
        cases,
        stage1_objective: out.objective,
    })
}

/// The instance re-bounded to the admissible interval: uncertainty
/// `[s_low, s_up]` with nominal `s_mid`.
pub fn rebounded_instance(
    inst: &NominalInstance,
    interval: &AdmissibleInterval,
) -> NominalInstance {
    NominalInstance {
        y_nominal: interval.s_mid.clone(),
        y_low: interval.s_low.clone(),
        y_up: interval.s_up.clone(),
        ..inst.clone()
    }
}

/// Builds the nominal model of the re-bounded instance: utilization capped
/// at the admissible midpoint `s_mid`.
pub fn build_admissible(
    inst: &NominalInstance,
    interval: &AdmissibleInterval,
) -> Result<BuiltModel> {
    let mut built = crate::robust::build_nominal(&rebounded_instance(inst, interval))?;
    built.variant = ModelVariant::Admissible;
    Ok(built)
}

/// Solves stage 1 and the nominal model of the re-bounded instance.
pub fn solve_admissible(inst: &NominalInstance, opts: &SolveOptions) -> Result<RobustSolution> {
    let interval = stage1_admissible(inst, opts)?;
    let built = build_admissible(inst, &interval)?;
    let sol = solve_lp(&built.lp, opts).map_err(|e| e.in_stage("admissible model"))?;
    if sol.status != crate::lp::SolveStatus::Optimal {
        return Err(Error::Infeasible(format!(
            "admissible model ended {:?} although stage 1 certified the interval",
            sol.status
        )));
    }
    let x = sol.x[built.layout.x.clone()].to_vec();
    let y = sol.x[built.layout.y.clone()].to_vec();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let comparable_cost = dot(&inst.c1, &x) - dot(&inst.c2, &y) + dot(&inst.c2, &inst.y_nominal);
    Ok(RobustSolution {
        variant: ModelVariant::Admissible,
        deviations: vec![0.0; inst.num_resources()],
        objective: sol.objective + built.layout.constant,
        worst_case_term: 0.0,
        comparable_cost,
        gamma_total: 0.0,
        gamma_effective: None,
        cases: Some(interval.cases.clone()),
        iterations: sol.iterations,
        x,
        y,
    })
}

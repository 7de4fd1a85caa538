//! Two-stage effective-budget counterpart.
//!
//! Stage 1 finds the largest sub-interval `[s_low, s_up]` of the uncertainty
//! box that the constraint system can fully absorb: there must be an
//! allocation `x >= 0` with `A x + B s <= g` for every realization `s` in
//! the sub-box. Each coordinate is then classified against its uncertainty
//! interval `[y_low_j, y_up_j]` with nominal `y_nom_j`:
//!
//! * case `a`: `s_up = y_up` (nothing truncated),
//! * case `b`: `y_nom < s_up < y_up`,
//! * case `c`: `y_low < s_up <= y_nom`,
//! * case `d`: `s_up <= y_low` (interval collapsed to a point).
//!
//! Stage 2 rebuilds the robust counterpart over the admissible box with
//! midpoint `s_mid = (s_low + s_up) / 2` and rescaled deviation geometry
//!
//! ```text
//! h_j = 1 for cases a, b          (two-sided deviations survive)
//! e_j = h_j (s_up_j - s_mid_j) / (y_up_j - y_nom_j)
//! v_j = h_j (y_nom_j - s_mid_j) / (s_up_j - s_mid_j)
//! gamma_eff_t = gamma_t + sum_{j in t} v_j e_j
//! ```
//!
//! so deviations are measured from `s_mid` in units of the admissible
//! half-width, the floor `v_j` accounts for the part of the interval below
//! the original nominal, and the budget gains the offset that floor already
//! consumes. Coordinates in cases c, d get `e_j = v_j = 0`: their deviation
//! is decoupled from the budget because the whole admissible interval sits
//! at or below the nominal.

mod stage1;
mod stage2;

pub use stage1::{
    build_admissible, solve_admissible, solve_stage1_system, stage1_admissible, Stage1System,
};
pub use stage2::{build_stage2, solve_effective, solve_effective_with_interval};

use serde::{Deserialize, Serialize};

use crate::robust::{BudgetSpec, NominalInstance};
use crate::{Error, Result};

/// Classification tolerance, scaled by `1 + |y_up_j|` per coordinate.
pub const TOL_CLASS: f64 = 1e-7;

/// Classification of one coordinate's admissible interval against its
/// uncertainty interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// The whole interval is admissible: `s_up = y_up`.
    Full,
    /// Upper end truncated above the nominal: `y_nom < s_up < y_up`.
    UpperTruncated,
    /// Upper end truncated at or below the nominal: `y_low < s_up <= y_nom`.
    BelowNominal,
    /// Collapsed: `s_up <= y_low`, no upward deviation is absorbable.
    Collapsed,
}

impl Case {
    /// Single-letter label used in reports: `a`, `b`, `c`, `d`.
    pub fn letter(self) -> char {
        match self {
            Case::Full => 'a',
            Case::UpperTruncated => 'b',
            Case::BelowNominal => 'c',
            Case::Collapsed => 'd',
        }
    }

    /// Whether the coordinate keeps budget-coupled deviations (`h_j = 1`).
    pub fn two_sided(self) -> bool {
        matches!(self, Case::Full | Case::UpperTruncated)
    }
}

/// Stage-1 result: the admissible sub-interval and its classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibleInterval {
    pub s_low: Vec<f64>,
    pub s_up: Vec<f64>,
    /// Exact midpoint `(s_low + s_up) / 2`.
    pub s_mid: Vec<f64>,
    pub cases: Vec<Case>,
    /// Optimal value of the stage-1 interval-loss objective
    /// `sum (y_up - s_up) + sum (y_low - s_low)`.
    pub stage1_objective: f64,
}

/// Deviation geometry of the admissible box and the rescaled budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// 1 for budget-coupled coordinates (cases a, b), else 0.
    pub h: Vec<f64>,
    /// Admissible half-width over original half-width.
    pub e: Vec<f64>,
    /// Scaled floor of the deviation variable `r_j`.
    pub v: Vec<f64>,
    /// Per-group budget offset `sum v_j e_j`.
    pub budget_offset: Vec<f64>,
    /// Per-group effective budgets `gamma_t + offset_t`.
    pub gamma_effective: Vec<f64>,
}

/// Classifies every coordinate of an admissible upper end `s_up` against
/// the instance bounds. The truncation side is decided first: a coordinate
/// is budget-coupled only when `s_up` lies strictly above the nominal.
pub fn classify(y_low: &[f64], y_nominal: &[f64], y_up: &[f64], s_up: &[f64]) -> Vec<Case> {
    s_up.iter()
        .enumerate()
        .map(|(j, &s)| {
            let tol = TOL_CLASS * (1.0 + y_up[j].abs());
            if s > y_nominal[j] + tol {
                if s >= y_up[j] - tol {
                    Case::Full
                } else {
                    Case::UpperTruncated
                }
            } else if s > y_low[j] + tol {
                Case::BelowNominal
            } else {
                Case::Collapsed
            }
        })
        .collect()
}

impl EffectiveParams {
    /// Computes the deviation geometry of an admissible interval under a
    /// budget specification.
    pub fn compute(
        inst: &NominalInstance,
        interval: &AdmissibleInterval,
        budget: &BudgetSpec,
    ) -> Result<EffectiveParams> {
        let m = inst.num_resources();
        let owner = budget.validate(m)?;
        if interval.s_up.len() != m || interval.cases.len() != m {
            return Err(Error::InvalidModel(format!(
                "admissible interval has {} coordinates for an instance with {m}",
                interval.s_up.len()
            )));
        }
        let tiny = 1e-12;
        let mut h = vec![0.0; m];
        let mut e = vec![0.0; m];
        let mut v = vec![0.0; m];
        for j in 0..m {
            if !interval.cases[j].two_sided() {
                continue;
            }
            h[j] = 1.0;
            let half_orig = inst.y_up[j] - inst.y_nominal[j];
            let half_adm = interval.s_up[j] - interval.s_mid[j];
            if half_orig > tiny {
                e[j] = half_adm / half_orig;
            }
            if half_adm > tiny {
                v[j] = (inst.y_nominal[j] - interval.s_mid[j]) / half_adm;
            }
        }
        let ng = budget.groups.len();
        let mut budget_offset = vec![0.0; ng];
        for j in 0..m {
            budget_offset[owner[j]] += v[j] * e[j];
        }
        let gamma_effective = budget
            .groups
            .iter()
            .zip(&budget_offset)
            .map(|(g, off)| g.gamma + off)
            .collect();
        Ok(EffectiveParams {
            h,
            e,
            v,
            budget_offset,
            gamma_effective,
        })
    }

    /// Total effective budget across groups.
    pub fn gamma_effective_total(&self) -> f64 {
        self.gamma_effective.iter().sum()
    }
}

/// Per-coordinate stage-1 report in CSV form, one row per resource.
pub fn stage1_report_csv(
    inst: &NominalInstance,
    interval: &AdmissibleInterval,
    params: &EffectiveParams,
) -> String {
    let mut out = String::from("j,y_low,y_nom,y_up,s_low,s_mid,s_up,case,h,e,v\n");
    for j in 0..inst.num_resources() {
        out.push_str(&format!(
            "{j},{},{},{},{},{},{},{},{},{},{}\n",
            inst.y_low[j],
            inst.y_nominal[j],
            inst.y_up[j],
            interval.s_low[j],
            interval.s_mid[j],
            interval.s_up[j],
            interval.cases[j].letter(),
            params.h[j],
            params.e[j],
            params.v[j],
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust::BudgetSpec;

    fn one_coord_instance() -> NominalInstance {
        NominalInstance {
            a: vec![vec![]],
            b: vec![vec![1.0]],
            c1: vec![],
            c2: vec![2.0],
            g: vec![7.0],
            y_nominal: vec![5.0],
            y_low: vec![0.0],
            y_up: vec![10.0],
            budget_groups: None,
            allow_non_centered: false,
            ellipsoid: None,
        }
    }

    #[test]
    fn classification_boundaries() {
        let (lo, nom, up) = (vec![2.0; 5], vec![5.0; 5], vec![8.0; 5]);
        let cases = classify(&lo, &nom, &up, &[8.0, 6.5, 5.0, 3.0, 2.0]);
        assert_eq!(
            cases,
            vec![
                Case::Full,
                Case::UpperTruncated,
                Case::BelowNominal,
                Case::BelowNominal,
                Case::Collapsed,
            ]
        );
        // Exactly at the nominal the coordinate decouples from the budget.
        assert!(!cases[2].two_sided());
    }

    #[test]
    fn params_match_hand_computation() {
        let inst = one_coord_instance();
        let interval = AdmissibleInterval {
            s_low: vec![0.0],
            s_up: vec![7.0],
            s_mid: vec![3.5],
            cases: vec![Case::UpperTruncated],
            stage1_objective: 3.0,
        };
        let budget = BudgetSpec::uniform(1.0, 1);
        let p = EffectiveParams::compute(&inst, &interval, &budget).unwrap();
        assert!((p.e[0] - 0.7).abs() < 1e-12);
        assert!((p.v[0] - 3.0 / 7.0).abs() < 1e-12);
        assert!((p.budget_offset[0] - 0.3).abs() < 1e-12);
        assert!((p.gamma_effective[0] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn collapsed_and_below_nominal_have_zero_geometry() {
        let inst = one_coord_instance();
        let interval = AdmissibleInterval {
            s_low: vec![0.0],
            s_up: vec![4.0],
            s_mid: vec![2.0],
            cases: vec![Case::BelowNominal],
            stage1_objective: 6.0,
        };
        let budget = BudgetSpec::uniform(0.5, 1);
        let p = EffectiveParams::compute(&inst, &interval, &budget).unwrap();
        assert_eq!(p.h, vec![0.0]);
        assert_eq!(p.e, vec![0.0]);
        assert_eq!(p.v, vec![0.0]);
        assert!((p.gamma_effective[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn report_layout_is_stable() {
        let inst = one_coord_instance();
        let interval = AdmissibleInterval {
            s_low: vec![0.0],
            s_up: vec![7.0],
            s_mid: vec![3.5],
            cases: vec![Case::UpperTruncated],
            stage1_objective: 3.0,
        };
        let budget = BudgetSpec::uniform(1.0, 1);
        let p = EffectiveParams::compute(&inst, &interval, &budget).unwrap();
        let csv = stage1_report_csv(&inst, &interval, &p);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "j,y_low,y_nom,y_up,s_low,s_mid,s_up,case,h,e,v"
        );
        assert_eq!(
            lines.next().unwrap(),
            "0,0,5,10,0,3.5,7,b,1,0.7,0.42857142857142855"
        );
    }
}

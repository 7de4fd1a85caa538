//! Budgeted ellipsoidal uncertainty: bounding box, admissible
//! classification, the effective ellipsoid, and a cutting-plane second
//! stage.
//!
//! The available resource vector deviates inside the budgeted ellipsoid
//!
//! ```text
//! y = y_nom + sum_j mu_j v_j,    sum_j (mu_j / l_j)^2 <= gamma^2,
//!                                sum_j |mu_j|         <= Gamma,
//! ```
//!
//! with orthonormal axes `v_j`, semi-axis lengths `gamma l_j`, and an
//! absolute deviation budget `Gamma <= sum l_j`. The pipeline mirrors the
//! interval one: enclose the set in its axis-aligned bounding box, run the
//! stage-1 admissible system on the boxed instance, classify each axis
//! against the ellipse intercepts, keep the effective part, and solve the
//! second stage with cutting planes over the LP core ([`stage2`]).
//!
//! The bounding box and the axis intercepts describe the ellipse alone;
//! the budget cap can only shrink what is reachable inside them, exactly
//! as the per-coordinate interval ignores the budget in the box pipeline.
//! The radius stays explicit throughout: effective lengths are rescaled to
//! the admissible caps while `gamma` keeps multiplying them, so a radius
//! above one deliberately reaches beyond the admissible cap on effective
//! axes.

mod stage2;

pub use stage2::{budgeted_ellipsoid_max, build_ellipsoid_stage2, solve_ellipsoid_stage2};

use serde::{Deserialize, Serialize};

use crate::effective::{stage1_admissible, AdmissibleInterval, TOL_CLASS};
use crate::lp::SolveOptions;
use crate::robust::{NominalInstance, RobustSolution};
use crate::{Error, Result};

/// Tolerance for pairwise orthonormality of the axes.
const TOL_ORTHO: f64 = 1e-9;

/// Relative tolerance for the nonnegative-floor check on the bounding box
/// and for matching the center against the instance nominal.
const TOL_GEOM: f64 = 1e-9;

/// On-file description of a budgeted ellipsoid, attached to an instance
/// under the `ellipsoid` key; the center is the instance's `y_nominal`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    /// Orthonormal axis directions, one length-`m` vector per axis.
    pub axes: Vec<Vec<f64>>,
    /// Base semi-axis lengths `l_j > 0`; the radius scales them.
    pub lengths: Vec<f64>,
    /// Radius of the quadratic constraint, `gamma >= 0`.
    pub gamma: f64,
    /// Budget on the absolute axis deviations, at most `sum l_j`.
    pub budget: f64,
}

/// A budgeted ellipsoidal uncertainty set in deviation form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetedEllipsoid {
    /// Center of the set, the nominal availability.
    pub center: Vec<f64>,
    /// Orthonormal axis directions `v_j`, one vector per axis.
    pub axes: Vec<Vec<f64>>,
    /// Base semi-axis lengths `l_j > 0`; axis `j` spans `gamma l_j`.
    pub lengths: Vec<f64>,
    /// Radius of the quadratic constraint.
    pub gamma: f64,
    /// Budget on the absolute axis deviations `sum |mu_j|`.
    pub gamma_budget: f64,
}

impl BudgetedEllipsoid {
    /// Builds and validates a budgeted ellipsoid.
    pub fn new(
        center: Vec<f64>,
        axes: Vec<Vec<f64>>,
        lengths: Vec<f64>,
        gamma: f64,
        gamma_budget: f64,
    ) -> Result<BudgetedEllipsoid> {
        let ell = BudgetedEllipsoid {
            center,
            axes,
            lengths,
            gamma,
            gamma_budget,
        };
        ell.validate()?;
        Ok(ell)
    }

    /// Builds the ellipsoid from an instance's `ellipsoid` block, centered
    /// at the instance nominal.
    pub fn from_instance(inst: &NominalInstance) -> Result<BudgetedEllipsoid> {
        let spec = inst
            .ellipsoid
            .as_ref()
            .ok_or_else(|| Error::InvalidInstance("instance carries no ellipsoid block".into()))?;
        BudgetedEllipsoid::new(
            inst.y_nominal.clone(),
            spec.axes.clone(),
            spec.lengths.clone(),
            spec.gamma,
            spec.budget,
        )
    }

    /// Dimension `m` of the set.
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Largest admissible deviation budget `sum l_j`.
    pub fn max_budget(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Checks geometry (dimensions, orthonormal axes, positive lengths)
    /// and budget ranges; reports the first violation found.
    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m == 0 {
            return Err(Error::InvalidModel("ellipsoid center is empty".into()));
        }
        if self.axes.len() != m || self.lengths.len() != m {
            return Err(Error::InvalidModel(format!(
                "{} axes and {} lengths for dimension {m}",
                self.axes.len(),
                self.lengths.len()
            )));
        }
        for (j, v) in self.axes.iter().enumerate() {
            if v.len() != m {
                return Err(Error::InvalidModel(format!(
                    "axis {j} has {} entries, expected {m}",
                    v.len()
                )));
            }
        }
        let all = self
            .center
            .iter()
            .chain(self.axes.iter().flatten())
            .chain(&self.lengths);
        for v in all {
            if !v.is_finite() {
                return Err(Error::InvalidModel(
                    "ellipsoid contains a non-finite value".into(),
                ));
            }
        }
        for j in 0..m {
            for k in j..m {
                let dotjk: f64 = self.axes[j]
                    .iter()
                    .zip(&self.axes[k])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if j == k { 1.0 } else { 0.0 };
                if (dotjk - want).abs() > TOL_ORTHO {
                    return Err(Error::InvalidModel(format!(
                        "axes {j} and {k} are not orthonormal: inner product {dotjk}"
                    )));
                }
            }
        }
        if let Some((j, &l)) = self.lengths.iter().enumerate().find(|(_, &l)| l <= 0.0) {
            return Err(Error::InvalidModel(format!(
                "length {j} is {l}, must be positive"
            )));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::InvalidBudget(format!(
                "ellipsoid radius {} must be finite and nonnegative",
                self.gamma
            )));
        }
        let max = self.max_budget();
        if !self.gamma_budget.is_finite() || self.gamma_budget < 0.0 || self.gamma_budget > max {
            return Err(Error::InvalidBudget(format!(
                "deviation budget {} is outside [0, {max}]",
                self.gamma_budget
            )));
        }
        Ok(())
    }
}

/// Axis-aligned minimum bounding box of the ellipse, ignoring the budget
/// cap: the support along coordinate `j` is
/// `gamma * sqrt(sum_k (l_k v_kj)^2)`, so
///
/// ```text
/// y_up_j  = y_nom_j + gamma sqrt(sum_k (l_k v_kj)^2),
/// y_low_j = y_nom_j - gamma sqrt(sum_k (l_k v_kj)^2).
/// ```
///
/// Axis-aligned sets reduce to `y_nom_j +- gamma l_j`; a zero radius
/// collapses the box to the center.
pub fn bounding_box(ell: &BudgetedEllipsoid) -> (Vec<f64>, Vec<f64>) {
    let m = ell.dim();
    let mut y_low = ell.center.clone();
    let mut y_up = ell.center.clone();
    for j in 0..m {
        let reach = ell.gamma
            * ell
                .axes
                .iter()
                .zip(&ell.lengths)
                .map(|(v, &l)| (l * v[j]).powi(2))
                .sum::<f64>()
                .sqrt();
        y_low[j] -= reach;
        y_up[j] += reach;
    }
    (y_low, y_up)
}

/// Intersections of the ellipse boundary with the coordinate lines through
/// the center:
///
/// ```text
/// a_j = y_nom_j + gamma / sqrt(sum_k (v_kj / l_k)^2),
/// ```
///
/// which reduces to `y_nom_j + gamma l_j` for axis-aligned sets. The
/// intercept never exceeds the bounding-box face along the same
/// coordinate.
pub fn axis_intercepts(ell: &BudgetedEllipsoid) -> Vec<f64> {
    (0..ell.dim())
        .map(|j| {
            let q: f64 = ell
                .axes
                .iter()
                .zip(&ell.lengths)
                .map(|(v, &l)| (v[j] / l).powi(2))
                .sum();
            ell.center[j] + ell.gamma / q.sqrt()
        })
        .collect()
}

/// Classification of one coordinate of the admissible interval against the
/// ellipse geometry along its coordinate line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipsoidCase {
    /// The cap reaches the axis intercept: the full extent of the ellipse
    /// along this coordinate line is admissible.
    FullReach,
    /// The cap lies strictly between the center and the intercept.
    Truncated,
    /// The cap lies at or below the center but above the box floor.
    BelowCenter,
    /// The cap collapses to the box floor; no deviation is absorbable.
    Collapsed,
}

impl EllipsoidCase {
    /// Numeric label 1 to 4 used in reports.
    pub fn label(self) -> u8 {
        match self {
            EllipsoidCase::FullReach => 1,
            EllipsoidCase::Truncated => 2,
            EllipsoidCase::BelowCenter => 3,
            EllipsoidCase::Collapsed => 4,
        }
    }

    /// Whether the coordinate joins the effective index set (labels 1, 2).
    pub fn effective(self) -> bool {
        matches!(self, EllipsoidCase::FullReach | EllipsoidCase::Truncated)
    }
}

/// Classifies every coordinate of an admissible interval against the
/// ellipse. Collapsed caps are decided first, then full reach: a cap
/// meeting the intercept exactly counts as full reach, so an uncoupled
/// axis-aligned instance is case 1 on every axis.
pub fn classify_ellipsoid(
    ell: &BudgetedEllipsoid,
    interval: &AdmissibleInterval,
) -> Vec<EllipsoidCase> {
    let (box_low, box_up) = bounding_box(ell);
    let a = axis_intercepts(ell);
    (0..ell.dim())
        .map(|j| {
            let tol = TOL_CLASS * (1.0 + box_up[j].abs());
            let s = interval.s_up[j];
            if s <= box_low[j] + tol {
                EllipsoidCase::Collapsed
            } else if s >= a[j] - tol {
                EllipsoidCase::FullReach
            } else if s > ell.center[j] + tol {
                EllipsoidCase::Truncated
            } else {
                EllipsoidCase::BelowCenter
            }
        })
        .collect()
}

/// The effective part of a budgeted ellipsoid after stage 1: coordinates
/// whose admissible cap exceeds the center keep a rescaled axis, the rest
/// are held below their caps without consuming budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveEllipsoid {
    /// Coordinates with `s_up_j > y_nom_j`, in increasing order.
    pub index_set: Vec<usize>,
    /// The remaining coordinates, in increasing order.
    pub complement: Vec<usize>,
    /// Effective semi-axis lengths `s_up_j - y_nom_j` on the index set,
    /// zero elsewhere.
    pub effective_lengths: Vec<f64>,
    /// Admissible caps `s_up`; plain upper bounds on the complement.
    pub caps: Vec<f64>,
}

impl EffectiveEllipsoid {
    /// True when no coordinate reaches beyond the center; the second stage
    /// then reduces to the nominal model under the admissible caps.
    pub fn is_degenerate(&self) -> bool {
        self.index_set.is_empty()
    }
}

/// Builds the effective ellipsoid of an admissible interval: coordinates
/// whose cap exceeds the center (within the classification tolerance)
/// join the index set with effective length `s_up_j - y_nom_j`; the rest
/// move to the complement. An empty index set is allowed and logged.
pub fn effective_ellipsoid(
    ell: &BudgetedEllipsoid,
    interval: &AdmissibleInterval,
) -> EffectiveEllipsoid {
    let (_, box_up) = bounding_box(ell);
    let mut index_set = Vec::new();
    let mut complement = Vec::new();
    let mut effective_lengths = vec![0.0; ell.dim()];
    for j in 0..ell.dim() {
        let tol = TOL_CLASS * (1.0 + box_up[j].abs());
        if interval.s_up[j] > ell.center[j] + tol {
            index_set.push(j);
            effective_lengths[j] = interval.s_up[j] - ell.center[j];
        } else {
            complement.push(j);
        }
    }
    if index_set.is_empty() {
        log::warn!("effective ellipsoid is degenerate: no admissible cap exceeds the center");
    }
    EffectiveEllipsoid {
        index_set,
        complement,
        effective_lengths,
        caps: interval.s_up.clone(),
    }
}

/// Computes the admissible interval of the boxed instance: the ellipsoid
/// is enclosed in its bounding box, the instance is re-bounded to that box
/// with the center as nominal, and the stage-1 system runs on the result.
/// The box must stay inside the nonnegative orthant, since availability
/// cannot realize below zero; floors negative beyond roundoff are
/// rejected, not clamped.
pub fn ellipsoid_admissible(
    inst: &NominalInstance,
    ell: &BudgetedEllipsoid,
    opts: &SolveOptions,
) -> Result<AdmissibleInterval> {
    inst.validate()?;
    ell.validate()?;
    let m = inst.num_resources();
    if ell.dim() != m {
        return Err(Error::InvalidInstance(format!(
            "ellipsoid dimension {} does not match {m} uncertain resources",
            ell.dim()
        )));
    }
    for j in 0..m {
        let tol = TOL_CLASS * (1.0 + inst.y_nominal[j].abs());
        if (ell.center[j] - inst.y_nominal[j]).abs() > tol {
            return Err(Error::InvalidInstance(format!(
                "ellipsoid center [{j}] = {} differs from y_nominal[{j}] = {}",
                ell.center[j], inst.y_nominal[j]
            )));
        }
    }
    let (mut y_low, y_up) = bounding_box(ell);
    for j in 0..m {
        let tol = TOL_GEOM * (1.0 + y_up[j].abs());
        if y_low[j] < -tol {
            return Err(Error::InvalidInstance(format!(
                "bounding-box floor {} of coordinate {j} is negative: \
                 the set admits unrealizable negative availability",
                y_low[j]
            )));
        }
        y_low[j] = y_low[j].max(0.0);
    }
    let boxed = NominalInstance {
        y_nominal: ell.center.clone(),
        y_low,
        y_up,
        ..inst.clone()
    };
    stage1_admissible(&boxed, opts)
}

/// Everything produced by one ellipsoidal run: the boxed admissible
/// interval, the per-axis classification, the effective set, and the
/// second-stage solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidPipeline {
    pub interval: AdmissibleInterval,
    pub labels: Vec<EllipsoidCase>,
    pub effective: EffectiveEllipsoid,
    pub solution: RobustSolution,
}

/// Runs the whole ellipsoidal pipeline: admissible interval over the
/// bounding box, classification, effective set, cutting-plane second
/// stage. A zero radius reduces the result to the nominal model.
pub fn solve_ellipsoid(
    inst: &NominalInstance,
    ell: &BudgetedEllipsoid,
    opts: &SolveOptions,
) -> Result<EllipsoidPipeline> {
    let interval = ellipsoid_admissible(inst, ell, opts)?;
    let labels = classify_ellipsoid(ell, &interval);
    let effective = effective_ellipsoid(ell, &interval);
    let solution = solve_ellipsoid_stage2(inst, &effective, ell.gamma, ell.gamma_budget, opts)?;
    Ok(EllipsoidPipeline {
        interval,
        labels,
        effective,
        solution,
    })
}

//! Nominal resource-allocation model and its budgeted robust counterparts.
//!
//! The nominal model is
//!
//! ```text
//! min  c1'x + c2'(y_nom - y)
//! s.t. A x + B y <= g,    0 <= y <= y_nom,    x >= 0,
//! ```
//!
//! with `x` the allocation decisions and `y` the utilization of `m`
//! uncertain resources. Availability deviates inside the budgeted interval
//! set: each coordinate moves between `y_low_j` and `y_up_j`, scaled
//! deviations are capped at 1, and their sum within each budget group is
//! capped by that group's `gamma`.
//!
//! Standing assumptions, enforced by [`NominalInstance::validate`]:
//!
//! 1. some penalty coefficient `c2_j` dominates every allocation cost
//!    `c1_k` (unused resources are worth penalizing),
//! 2. the coupling matrix `B` is elementwise nonnegative,
//! 3. `c1` and `c2` are elementwise nonnegative.
//!
//! The conventional robust counterpart keeps deviation variables in the
//! capacity constraints and prices the worst-case penalty through an exact
//! dualization of the inner maximum, so the whole counterpart stays one LP.

pub(crate) mod build;

pub use build::{
    build_conventional, build_full_budget, build_nominal, insensitivity_holds, solve_conventional,
    solve_full_budget, solve_nominal, worst_case_inner, BuiltModel, VarLayout,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for the centering check on `y_nominal`.
const TOL_CENTER: f64 = 1e-7;

/// One budget group: a set of resource coordinates sharing a deviation
/// budget `gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetGroup {
    pub indices: Vec<usize>,
    pub gamma: f64,
}

/// Deviation budget, possibly split across disjoint coordinate groups
/// (for example one group per time period).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub groups: Vec<BudgetGroup>,
}

impl BudgetSpec {
    /// Single group over all `m` coordinates.
    pub fn uniform(gamma: f64, m: usize) -> Self {
        BudgetSpec {
            groups: vec![BudgetGroup {
                indices: (0..m).collect(),
                gamma,
            }],
        }
    }

    /// Same `gamma` applied to every group of a partition.
    pub fn uniform_over(partition: &[Vec<usize>], gamma: f64) -> Self {
        BudgetSpec {
            groups: partition
                .iter()
                .map(|g| BudgetGroup {
                    indices: g.clone(),
                    gamma,
                })
                .collect(),
        }
    }

    /// The partition implied by the instance: its `budget_groups` when
    /// present, otherwise one group over all coordinates.
    pub fn for_instance(inst: &NominalInstance, gamma: f64) -> Self {
        match &inst.budget_groups {
            Some(p) => BudgetSpec::uniform_over(p, gamma),
            None => BudgetSpec::uniform(gamma, inst.num_resources()),
        }
    }

    pub fn total_gamma(&self) -> f64 {
        self.groups.iter().map(|g| g.gamma).sum()
    }

    /// Sum of group sizes, i.e. `m` for a valid partition.
    pub fn total_size(&self) -> usize {
        self.groups.iter().map(|g| g.indices.len()).sum()
    }

    /// Group index of each coordinate; errors unless the groups partition
    /// `0..m` and every `gamma` lies in `[0, |group|]`.
    pub fn validate(&self, m: usize) -> Result<Vec<usize>> {
        let mut owner = vec![usize::MAX; m];
        for (t, g) in self.groups.iter().enumerate() {
            if !g.gamma.is_finite() || g.gamma < 0.0 {
                return Err(Error::InvalidBudget(format!(
                    "group {t} has budget {}, expected a finite nonnegative value",
                    g.gamma
                )));
            }
            if g.gamma > g.indices.len() as f64 + 1e-12 {
                return Err(Error::InvalidBudget(format!(
                    "group {t} has budget {} above its size {}",
                    g.gamma,
                    g.indices.len()
                )));
            }
            for &j in &g.indices {
                if j >= m {
                    return Err(Error::InvalidBudget(format!(
                        "group {t} references coordinate {j} out of range"
                    )));
                }
                if owner[j] != usize::MAX {
                    return Err(Error::InvalidBudget(format!(
                        "coordinate {j} appears in groups {} and {t}",
                        owner[j]
                    )));
                }
                owner[j] = t;
            }
        }
        if let Some(j) = owner.iter().position(|&t| t == usize::MAX) {
            return Err(Error::InvalidBudget(format!(
                "coordinate {j} belongs to no budget group"
            )));
        }
        Ok(owner)
    }
}

/// Which model produced a [`RobustSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    Nominal,
    Conventional,
    FullBudget,
    Effective,
    Admissible,
}

impl ModelVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Nominal => "nominal",
            ModelVariant::Conventional => "conventional",
            ModelVariant::FullBudget => "full_budget",
            ModelVariant::Effective => "effective",
            ModelVariant::Admissible => "admissible",
        }
    }
}

/// Solution of any robust (or nominal) variant, in common coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustSolution {
    pub variant: ModelVariant,
    pub x: Vec<f64>,
    /// Utilization of the uncertain resources.
    pub y: Vec<f64>,
    /// Deviation controls at the optimum: `z+` for the conventional model,
    /// `r` for the effective model, all ones for the full-budget model.
    pub deviations: Vec<f64>,
    /// The variant model's own optimal objective value, constants included.
    pub objective: f64,
    /// Value of the dualized inner maximum at the optimum.
    pub worst_case_term: f64,
    /// The plan priced under the original budgeted set at the same budget:
    /// `c1'x - c2'y + c2'y_nom + worst_case_inner(gamma)`. Variants with
    /// different objective constants are compared through this figure.
    pub comparable_cost: f64,
    /// Total deviation budget the model was built with.
    pub gamma_total: f64,
    /// Effective budgets per group, for the effective variant.
    pub gamma_effective: Option<Vec<f64>>,
    /// Stage-1 coordinate classification, for the effective variant.
    pub cases: Option<Vec<crate::effective::Case>>,
    /// Simplex pivots spent producing this solution.
    pub iterations: usize,
}

/// Immutable problem data for the nominal model.
///
/// Matrices are dense and row-major: `a` is `n x p`, `b` is `n x m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NominalInstance {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub g: Vec<f64>,
    pub y_nominal: Vec<f64>,
    pub y_low: Vec<f64>,
    pub y_up: Vec<f64>,
    /// Optional partition of `0..m` into budget groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_groups: Option<Vec<Vec<usize>>>,
    /// Accept `y_nominal` away from the interval midpoint.
    #[serde(default)]
    pub allow_non_centered: bool,
    /// Optional ellipsoidal uncertainty description centered at `y_nominal`;
    /// when present the ellipsoidal pipeline can be run on this instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipsoid: Option<crate::ellipsoid::EllipsoidSpec>,
}

impl NominalInstance {
    /// Number of constraint rows `n`.
    pub fn num_rows(&self) -> usize {
        self.g.len()
    }

    /// Number of allocation variables `p`.
    pub fn num_allocations(&self) -> usize {
        self.c1.len()
    }

    /// Number of uncertain resources `m`.
    pub fn num_resources(&self) -> usize {
        self.c2.len()
    }

    /// Largest allocation cost `max_k c1_k` (0 when there are none).
    pub fn max_allocation_cost(&self) -> f64 {
        self.c1.iter().fold(0.0_f64, |m, &c| m.max(c))
    }

    /// Full structural and assumption validation; reports the first
    /// violation found.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_rows();
        let p = self.num_allocations();
        let m = self.num_resources();
        if self.a.len() != n || self.b.len() != n {
            return Err(Error::InvalidInstance(format!(
                "A has {} rows and B has {} rows for {} constraints",
                self.a.len(),
                self.b.len(),
                n
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidInstance(format!(
                    "row {i} of A has {} entries, expected {p}",
                    row.len()
                )));
            }
        }
        for (i, row) in self.b.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "row {i} of B has {} entries, expected {m}",
                    row.len()
                )));
            }
        }
        for (name, v, want) in [
            ("y_nominal", &self.y_nominal, m),
            ("y_low", &self.y_low, m),
            ("y_up", &self.y_up, m),
        ] {
            if v.len() != want {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {} entries, expected {want}",
                    v.len()
                )));
            }
        }
        let all = self
            .a
            .iter()
            .chain(self.b.iter())
            .flatten()
            .chain(self.c1.iter())
            .chain(self.c2.iter())
            .chain(self.g.iter())
            .chain(self.y_nominal.iter())
            .chain(self.y_low.iter())
            .chain(self.y_up.iter());
        for v in all {
            if !v.is_finite() {
                return Err(Error::InvalidInstance(
                    "instance contains a non-finite value".into(),
                ));
            }
        }
        // Penalty dominance: some resource must be worth at least every
        // allocation cost, otherwise leaving resources unused is free and
        // the robust counterparts degenerate.
        let cmax = self.max_allocation_cost();
        if m == 0 || !self.c2.iter().any(|&c| c >= cmax) {
            return Err(Error::InvalidInstance(format!(
                "no penalty coefficient reaches the largest allocation cost {cmax}"
            )));
        }
        for (i, row) in self.b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "coupling coefficient B[{i}][{j}] = {v} is negative"
                    )));
                }
            }
        }
        for (name, v) in [("c1", &self.c1), ("c2", &self.c2)] {
            if let Some((j, &c)) = v.iter().enumerate().find(|(_, &c)| c < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "cost coefficient {name}[{j}] = {c} is negative"
                )));
            }
        }
        for j in 0..m {
            if self.y_low[j] < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "y_low[{j}] = {} is negative",
                    self.y_low[j]
                )));
            }
            if !(self.y_low[j] <= self.y_nominal[j] && self.y_nominal[j] <= self.y_up[j]) {
                return Err(Error::InvalidInstance(format!(
                    "bounds of coordinate {j} are not ordered: {} <= {} <= {} fails",
                    self.y_low[j], self.y_nominal[j], self.y_up[j]
                )));
            }
            let mid = 0.5 * (self.y_low[j] + self.y_up[j]);
            if !self.allow_non_centered
                && (self.y_nominal[j] - mid).abs() > TOL_CENTER * (1.0 + mid.abs())
            {
                return Err(Error::InvalidInstance(format!(
                    "y_nominal[{j}] = {} is not the midpoint {mid} of its interval; \
                     set allow_non_centered to accept",
                    self.y_nominal[j]
                )));
            }
        }
        if let Some(groups) = &self.budget_groups {
            BudgetSpec::uniform_over(groups, 0.0).validate(m)?;
        }
        Ok(())
    }

    /// Parses and validates an instance from JSON text.
    pub fn from_json_str(text: &str) -> Result<NominalInstance> {
        let inst: NominalInstance = serde_json::from_str(text)
            .map_err(|e| Error::Io(format!("instance JSON parse failed: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    /// Reads and validates an instance file.
    pub fn from_path(path: &Path) -> Result<NominalInstance> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        NominalInstance::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

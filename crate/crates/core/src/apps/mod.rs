//! Application models built on the budgeted-uncertainty machinery:
//! security-constrained economic dispatch with uncertain wind, elective
//! patient admission with uncertain demand, and single-product inventory
//! planning with uncertain demand.
//!
//! Each family follows the same recipe. The deterministic model allocates
//! against nominal levels of the uncertain quantity. The conventional robust
//! model prices the budgeted worst case through its exact dual and lets the
//! plan track deviations over the original interval. The effective model
//! first finds the largest admissible sub-interval the system can actually
//! absorb (stage 1), rescales the deviation geometry onto it, and prices the
//! worst case over the rescaled budget (stage 2). All models are assembled
//! as explicit linear or mixed-integer programs over named columns so plans
//! can be exported and audited.
//!
//! Alongside its structural model, every family keeps a shadow resource
//! instance: the flattened uncertain coordinates with their penalty weights
//! and bounds, but no allocation rows. The shadow instance drives the shared
//! pricing helpers (greedy worst case, deviation geometry, stage-1 reports)
//! so that worst-case terms are identical in meaning across families.

mod inventory;
mod patient;
mod sced;

pub use inventory::{
    build_inventory, inventory_stage1, solve_inventory, InventoryInstance, InventoryLayout,
    InventoryModel,
};
pub use patient::{
    build_patient, patient_stage1, solve_patient, PatientInstance, PatientLayout, PatientModel,
};
pub use sced::{
    build_sced, sced_stage1, solve_sced, Generator, Line, ScedInstance, ScedLayout, ScedModel,
    WindFarm,
};

use std::str::FromStr;

use crate::effective::{classify, stage1_report_csv, AdmissibleInterval, EffectiveParams};
use crate::lp::{LpSolution, SolveStatus};
use crate::robust::{BudgetGroup, BudgetSpec, ModelVariant, NominalInstance, RobustSolution};
use crate::{Error, Result};

/// Which model family an instance file belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppKind {
    /// Bare resource-allocation instances handled by the core solvers.
    Generic,
    /// Security-constrained economic dispatch.
    Sced,
    /// Elective patient admission.
    Patient,
    /// Single-product inventory planning.
    Inventory,
}

impl AppKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AppKind::Generic => "generic",
            AppKind::Sced => "sced",
            AppKind::Patient => "patient",
            AppKind::Inventory => "inventory",
        }
    }
}

impl FromStr for AppKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(AppKind::Generic),
            "sced" => Ok(AppKind::Sced),
            "patient" => Ok(AppKind::Patient),
            "inventory" => Ok(AppKind::Inventory),
            other => Err(Error::InvalidInstance(format!(
                "unknown instance kind {other:?}, expected generic, sced, patient, or inventory"
            ))),
        }
    }
}

/// A loaded, validated instance of any supported family.
#[derive(Debug, Clone)]
pub enum AppInstance {
    Generic(NominalInstance),
    Sced(ScedInstance),
    Patient(PatientInstance),
    Inventory(InventoryInstance),
}

/// Names of the instances bundled into the library.
pub fn bundled_instances() -> &'static [&'static str] {
    &["patient_table2", "inventory_table3", "sced_toy"]
}

fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "patient_table2" => Some(include_str!("assets/patient_table2.json")),
        "inventory_table3" => Some(include_str!("assets/inventory_table3.json")),
        "sced_toy" => Some(include_str!("assets/sced_toy.json")),
        _ => None,
    }
}

/// Loads an instance from a bundled name or a filesystem path and validates
/// it. Bundled names are matched first; anything else is read as a path.
pub fn load_instance(spec: &str, kind: AppKind) -> Result<AppInstance> {
    let text = match bundled(spec) {
        Some(text) => text.to_string(),
        None => std::fs::read_to_string(spec)
            .map_err(|e| Error::Io(format!("reading instance {spec}: {e}")))?,
    };
    match kind {
        AppKind::Generic => {
            let inst = NominalInstance::from_json_str(&text)?;
            inst.validate()?;
            Ok(AppInstance::Generic(inst))
        }
        AppKind::Sced => {
            let inst = ScedInstance::from_json_str(&text)?;
            Ok(AppInstance::Sced(inst))
        }
        AppKind::Patient => {
            let inst = PatientInstance::from_json_str(&text)?;
            Ok(AppInstance::Patient(inst))
        }
        AppKind::Inventory => {
            let inst = InventoryInstance::from_json_str(&text)?;
            Ok(AppInstance::Inventory(inst))
        }
    }
}

/// First-stage products shared by the application families: the shadow
/// resource instance pricing operates on, the active deviation budget, the
/// admissible interval, and the rescaled deviation geometry.
#[derive(Debug, Clone)]
pub struct AppStage1 {
    pub shadow: NominalInstance,
    pub budget: BudgetSpec,
    pub interval: AdmissibleInterval,
    pub params: EffectiveParams,
}

impl AppStage1 {
    /// Classifies an admissible interval against the shadow bounds and
    /// computes the rescaled deviation geometry.
    pub(crate) fn assemble(
        shadow: NominalInstance,
        budget: BudgetSpec,
        s_low: Vec<f64>,
        s_up: Vec<f64>,
        stage1_objective: f64,
    ) -> Result<AppStage1> {
        let cases = classify(&shadow.y_low, &shadow.y_nominal, &shadow.y_up, &s_up);
        let s_mid: Vec<f64> = s_low
            .iter()
            .zip(&s_up)
            .map(|(&l, &u)| 0.5 * (l + u))
            .collect();
        let interval = AdmissibleInterval {
            s_low,
            s_up,
            s_mid,
            cases,
            stage1_objective,
        };
        let params = EffectiveParams::compute(&shadow, &interval, &budget)?;
        Ok(AppStage1 {
            shadow,
            budget,
            interval,
            params,
        })
    }

    /// Per-coordinate stage-1 report in CSV form.
    pub fn report_csv(&self) -> String {
        stage1_report_csv(&self.shadow, &self.interval, &self.params)
    }
}

/// A solved application model: the cross-variant solution summary plus the
/// raw column vector in the model's own layout.
#[derive(Debug, Clone)]
pub struct AppSolution {
    pub solution: RobustSolution,
    pub raw: Vec<f64>,
}

/// Maps a non-optimal solver status to the matching error.
pub(crate) fn expect_optimal(sol: &LpSolution, what: &str, variant: ModelVariant) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(Error::Infeasible(format!(
            "{what} ({}) has no feasible point",
            variant.as_str()
        ))),
        SolveStatus::Unbounded => Err(Error::Unbounded(format!(
            "{what} ({}) has an unbounded optimum",
            variant.as_str()
        ))),
    }
}

/// Builds the active budget specification over a coordinate partition:
/// either the per-group budgets carried by the instance or a uniform
/// override applied to every group.
pub(crate) fn budget_spec(
    partition: &[Vec<usize>],
    per_group: &[f64],
    gamma_override: Option<f64>,
) -> BudgetSpec {
    match gamma_override {
        Some(gamma) => BudgetSpec::uniform_over(partition, gamma),
        None => BudgetSpec {
            groups: partition
                .iter()
                .zip(per_group)
                .map(|(indices, &gamma)| BudgetGroup {
                    indices: indices.clone(),
                    gamma,
                })
                .collect(),
        },
    }
}

/// Exact value and maximizer of the rescaled inner maximum
/// `max sum_j w_j rho_j` over `sum_{j in t} e_j rho_j <= gamma_eff_t`,
/// `v_j <= rho_j <= 1`. Floors are filled first (they consume exactly the
/// budget offset), zero-consumption coordinates with positive weight are
/// free, and the remaining budget tops coordinates up in descending
/// weight-to-consumption ratio, ties to the lowest index.
pub(crate) fn effective_inner_max(
    weights: &[f64],
    budget: &BudgetSpec,
    params: &EffectiveParams,
) -> (f64, Vec<f64>) {
    let mut rho: Vec<f64> = params.v.clone();
    let mut value: f64 = weights.iter().zip(&rho).map(|(w, r)| w * r).sum();
    for (t, group) in budget.groups.iter().enumerate() {
        let mut paid: Vec<usize> = Vec::new();
        let mut left = params.gamma_effective[t];
        for &j in &group.indices {
            left -= params.e[j] * rho[j];
            if params.e[j] <= 1e-12 {
                if weights[j] > 0.0 && rho[j] < 1.0 {
                    value += weights[j] * (1.0 - rho[j]);
                    rho[j] = 1.0;
                }
            } else if weights[j] > 0.0 && rho[j] < 1.0 {
                paid.push(j);
            }
        }
        paid.sort_by(|&a, &b| {
            (weights[b] / params.e[b])
                .partial_cmp(&(weights[a] / params.e[a]))
                .unwrap()
                .then(a.cmp(&b))
        });
        for j in paid {
            if left <= 1e-12 {
                break;
            }
            let take = (left / params.e[j]).min(1.0 - rho[j]);
            value += weights[j] * take;
            left -= params.e[j] * take;
            rho[j] += take;
        }
    }
    (value, rho)
}

/// Maps an effective adversary point back to deviations of the original
/// interval: the upward part of `s_mid + rho (s_up - s_mid)` beyond the
/// nominal, scaled by the original half-width.
pub(crate) fn original_scale_deviations(
    rho: &[f64],
    interval: &AdmissibleInterval,
    shadow: &NominalInstance,
) -> Vec<f64> {
    (0..shadow.num_resources())
        .map(|j| {
            let width = shadow.y_up[j] - shadow.y_nominal[j];
            if width <= 1e-12 {
                return 0.0;
            }
            let point = interval.s_mid[j] + rho[j] * (interval.s_up[j] - interval.s_mid[j]);
            (point - shadow.y_nominal[j]).max(0.0) / width
        })
        .collect()
}

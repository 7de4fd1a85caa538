//! Single-product inventory planning with uncertain demand.
//!
//! Over `tau` periods, orders `u_k` (capped at `order_max_k` and gated by
//! fixed-cost binaries `v_k`) and met demand `w_k` drive the inventory
//! balance `I_{k+1} = I_k + u_k - w_k` from `inv_start` to exactly
//! `inv_end`, with every interior level kept inside `[inv_min, inv_max]`.
//! Unmet demand costs `shortage_cost` per unit; stock held above the
//! nominal requirement costs `holding_cost` per unit through the floors
//! `o_k >= I_k + u_k - demand_nominal_k`, which stay anchored at nominal
//! demand in every variant.
//!
//! The deterministic model meets at most nominal demand. The conventional
//! robust model raises the met-demand caps by `z_k (demand_up - nominal)`
//! against the single deviation budget and prices the worst-case shortage
//! through the exact dual of the budgeted inner maximum. The effective
//! model rescales deviations onto the stage-1 admissible interval and
//! prices the worst case over the rescaled budget.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lp::{
    solve_lp, solve_milp, LinearProgram, MixedProgram, Relation, SolveOptions, SolveStatus,
    VarBounds,
};
use crate::robust::{worst_case_inner, BudgetSpec, ModelVariant, NominalInstance, RobustSolution};
use crate::{Error, Result};

use super::{
    budget_spec, effective_inner_max, original_scale_deviations, AppSolution, AppStage1,
};

/// Problem data for the inventory model. Periods are 0-based in code and
/// 1-based in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryInstance {
    /// Horizon length `tau`.
    pub periods: usize,
    /// Inventory on hand before the first period.
    pub inv_start: f64,
    /// Required inventory after the last period.
    pub inv_end: f64,
    /// Lower bound on every interior inventory level.
    pub inv_min: f64,
    /// Upper bound on every interior inventory level.
    pub inv_max: f64,
    /// Per-unit purchase cost per period.
    pub purchase_cost: Vec<f64>,
    /// Fixed cost of placing any order in a period.
    pub fixed_cost: Vec<f64>,
    /// Per-unit shortage cost per period.
    pub shortage_cost: Vec<f64>,
    /// Per-unit holding cost per period.
    pub holding_cost: Vec<f64>,
    /// Order cap per period.
    pub order_max: Vec<f64>,
    /// Nominal demand per period.
    pub demand_nominal: Vec<f64>,
    /// Lower demand bounds; an empty vector means all zeros.
    #[serde(default)]
    pub demand_low: Vec<f64>,
    /// Upper demand bounds.
    pub demand_up: Vec<f64>,
    /// Deviation budget shared by all periods.
    pub budget: f64,
}

impl InventoryInstance {
    /// Parses an instance from JSON, filling the demand floor with zeros
    /// when absent, and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut inst: InventoryInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("inventory instance: {e}")))?;
        if inst.demand_low.is_empty() {
            inst.demand_low = vec![0.0; inst.demand_nominal.len()];
        }
        inst.validate()?;
        Ok(inst)
    }

    /// Reads and parses an instance file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("reading {}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    /// Serializes the instance as pretty JSON.
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io(format!("serializing inventory instance: {e}")))
    }

    /// Structural validation; reports the first violation found.
    pub fn validate(&self) -> Result<()> {
        let tau = self.periods;
        if tau == 0 {
            return Err(Error::InvalidInstance(
                "inventory instance needs at least one period".into(),
            ));
        }
        for (name, len) in [
            ("purchase_cost", self.purchase_cost.len()),
            ("fixed_cost", self.fixed_cost.len()),
            ("shortage_cost", self.shortage_cost.len()),
            ("holding_cost", self.holding_cost.len()),
            ("order_max", self.order_max.len()),
            ("demand_nominal", self.demand_nominal.len()),
            ("demand_low", self.demand_low.len()),
            ("demand_up", self.demand_up.len()),
        ] {
            if len != tau {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {len} entries, expected {tau}"
                )));
            }
        }
        for (name, values) in [
            ("purchase_cost", &self.purchase_cost),
            ("fixed_cost", &self.fixed_cost),
            ("shortage_cost", &self.shortage_cost),
            ("holding_cost", &self.holding_cost),
            ("order_max", &self.order_max),
        ] {
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "{name} must be finite and nonnegative"
                )));
            }
        }
        for k in 0..tau {
            let (lo, nom, up) = (self.demand_low[k], self.demand_nominal[k], self.demand_up[k]);
            if ![lo, nom, up].iter().all(|v| v.is_finite()) || lo < 0.0 || lo > nom || nom > up {
                return Err(Error::InvalidInstance(format!(
                    "period {}: demand bounds ({lo}, {nom}, {up}) are not ordered",
                    k + 1
                )));
            }
        }
        if !(self.inv_min.is_finite() && self.inv_max.is_finite()) || self.inv_min > self.inv_max {
            return Err(Error::InvalidInstance(format!(
                "inventory limits [{}, {}] are not an interval",
                self.inv_min, self.inv_max
            )));
        }
        if !self.inv_start.is_finite()
            || self.inv_start < self.inv_min
            || self.inv_start > self.inv_max
        {
            return Err(Error::InvalidInstance(format!(
                "inventory start level {} lies outside [{}, {}]",
                self.inv_start, self.inv_min, self.inv_max
            )));
        }
        if !self.inv_end.is_finite() || self.inv_end < self.inv_min || self.inv_end > self.inv_max
        {
            return Err(Error::InvalidInstance(format!(
                "inventory end level {} lies outside [{}, {}]",
                self.inv_end, self.inv_min, self.inv_max
            )));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "budget {} must be finite and nonnegative",
                self.budget
            )));
        }
        Ok(())
    }

    /// Budget partition: a single group across all periods.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        vec![(0..self.periods).collect()]
    }

    /// Shadow resource instance over the demand coordinates: shortage costs
    /// as deprivation costs, no allocation rows.
    pub fn shadow_instance(&self) -> NominalInstance {
        NominalInstance {
            a: vec![],
            b: vec![],
            c1: vec![],
            c2: self.shortage_cost.clone(),
            g: vec![],
            y_nominal: self.demand_nominal.clone(),
            y_low: self.demand_low.clone(),
            y_up: self.demand_up.clone(),
            budget_groups: Some(self.partition()),
            allow_non_centered: true,
            ellipsoid: None,
        }
    }
}

/// Column layout of a built inventory model.
#[derive(Debug, Clone)]
pub struct InventoryLayout {
    pub u: Range<usize>,
    pub v: Range<usize>,
    pub w: Range<usize>,
    pub o: Range<usize>,
    /// Conventional deviation controls `z_k`.
    pub z: Option<Range<usize>>,
    /// Effective deviation controls `rho_k`.
    pub rho: Option<Range<usize>>,
    pub xi: Option<Range<usize>>,
    pub mu: Option<Range<usize>>,
    pub lambda: Option<Range<usize>>,
}

/// A built inventory model: the program, its layout, and the pricing
/// context shared across variants.
#[derive(Debug, Clone)]
pub struct InventoryModel {
    pub program: MixedProgram,
    pub var_names: Vec<String>,
    pub layout: InventoryLayout,
    pub variant: ModelVariant,
    /// Constant added to the raw objective in reports.
    pub constant: f64,
    /// Penalty mass outside the admissible interval (effective variant).
    pub gap: f64,
    /// Shadow resource instance over the demand coordinates.
    pub shadow: NominalInstance,
    /// Active deviation budget (instance budget or uniform override).
    pub budget: BudgetSpec,
    /// Stage-1 products, present for the effective variant.
    pub stage1: Option<AppStage1>,
}

/// Builds the inventory model for a variant.
///
/// Columns: `u | v | w | o` (`tau` each), then `z | xi | mu` for the
/// conventional variant or `rho | xi | mu | lambda` for the effective one.
/// Rows: order caps `tau`, interior inventory limits `2 (tau - 1)`, one
/// terminal balance equation, holding floors `tau`, then met-demand caps
/// `tau`, the budget row (skipped when no coordinate carries deviation
/// weight), and one pricing row per period.
pub fn build_inventory(
    inst: &InventoryInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<InventoryModel> {
    inst.validate()?;
    let stage1 = match variant {
        ModelVariant::Effective => Some(inventory_stage1(inst, gamma_override, opts)?),
        ModelVariant::Nominal | ModelVariant::Conventional => None,
        other => {
            return Err(Error::InvalidModel(format!(
                "variant {} is not defined for the inventory model",
                other.as_str()
            )))
        }
    };
    build_inventory_with(inst, variant, gamma_override, stage1)
}

fn build_inventory_with(
    inst: &InventoryInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    stage1: Option<AppStage1>,
) -> Result<InventoryModel> {
    let tau = inst.periods;
    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &[inst.budget], gamma_override);
    budget.validate(tau)?;

    let robust = !matches!(variant, ModelVariant::Nominal);
    let effective = matches!(variant, ModelVariant::Effective);
    let (u0, v0, w0, o0) = (0, tau, 2 * tau, 3 * tau);
    let dev0 = 4 * tau;
    let xi0 = dev0 + if robust { tau } else { 0 };
    let mu0 = xi0 + if robust { 1 } else { 0 };
    let la0 = mu0 + if robust { tau } else { 0 };
    let nv = la0 + if effective { tau } else { 0 };

    let (base, width): (Vec<f64>, Vec<f64>) = if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        (
            s1.interval.s_mid.clone(),
            s1.interval
                .s_up
                .iter()
                .zip(&s1.interval.s_mid)
                .map(|(&u, &mid)| u - mid)
                .collect(),
        )
    } else {
        (
            shadow.y_nominal.clone(),
            shadow
                .y_up
                .iter()
                .zip(&shadow.y_nominal)
                .map(|(&u, &nom)| u - nom)
                .collect(),
        )
    };

    let mut obj = vec![0.0; nv];
    for k in 0..tau {
        obj[u0 + k] = inst.purchase_cost[k];
        obj[v0 + k] = inst.fixed_cost[k];
        obj[w0 + k] = -inst.shortage_cost[k];
        obj[o0 + k] = inst.holding_cost[k];
        if robust {
            obj[mu0 + k] = 1.0;
        }
    }
    if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        obj[xi0] = s1.params.gamma_effective[0];
        for k in 0..tau {
            obj[la0 + k] = -s1.params.v[k];
        }
    } else if robust {
        obj[xi0] = budget.groups[0].gamma;
    }

    let mut lp = LinearProgram::new(nv, obj);
    for k in 0..tau {
        lp.bounds[u0 + k] = VarBounds::interval(0.0, inst.order_max[k]);
        lp.bounds[v0 + k] = VarBounds::interval(0.0, 1.0);
        lp.bounds[w0 + k] = VarBounds::interval(
            0.0,
            if robust {
                inst.demand_up[k]
            } else {
                inst.demand_nominal[k]
            },
        );
        if robust {
            lp.bounds[dev0 + k] = if effective {
                let s1 = stage1.as_ref().expect("stage-1 products");
                VarBounds::interval(s1.params.v[k], 1.0)
            } else {
                VarBounds::interval(0.0, 1.0)
            };
        }
    }

    // Order caps: nothing arrives in a period without its fixed charge.
    for k in 0..tau {
        lp.add_constraint(
            vec![(u0 + k, 1.0), (v0 + k, -inst.order_max[k])],
            Relation::Le,
            0.0,
        );
    }
    // Interior inventory limits on I_k = inv_start + prefix(u - w).
    for k in 1..tau {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for j in 0..k {
            lower.push((u0 + j, -1.0));
            upper.push((u0 + j, 1.0));
        }
        for j in 0..k {
            lower.push((w0 + j, 1.0));
            upper.push((w0 + j, -1.0));
        }
        lp.add_constraint(lower, Relation::Le, inst.inv_start - inst.inv_min);
        lp.add_constraint(upper, Relation::Le, inst.inv_max - inst.inv_start);
    }
    // Terminal balance: the horizon ends exactly at the target level.
    {
        let mut coeffs = Vec::new();
        for k in 0..tau {
            coeffs.push((u0 + k, 1.0));
        }
        for k in 0..tau {
            coeffs.push((w0 + k, -1.0));
        }
        lp.add_constraint(coeffs, Relation::Eq, inst.inv_end - inst.inv_start);
    }
    // Holding floors against the nominal requirement, in every variant.
    for k in 0..tau {
        let mut coeffs = Vec::new();
        for j in 0..=k {
            coeffs.push((u0 + j, 1.0));
        }
        for j in 0..k {
            coeffs.push((w0 + j, -1.0));
        }
        coeffs.push((o0 + k, -1.0));
        lp.add_constraint(
            coeffs,
            Relation::Le,
            inst.demand_nominal[k] - inst.inv_start,
        );
    }
    // Met-demand caps with the variant's deviation controls.
    if robust {
        for k in 0..tau {
            let mut coeffs = vec![(w0 + k, 1.0)];
            if width[k] != 0.0 {
                coeffs.push((dev0 + k, -width[k]));
            }
            lp.add_constraint(coeffs, Relation::Le, base[k]);
        }
        // Budget row over the single group.
        if effective {
            let s1 = stage1.as_ref().expect("stage-1 products");
            let coeffs: Vec<(usize, f64)> = (0..tau)
                .filter(|&k| s1.params.e[k] != 0.0)
                .map(|k| (dev0 + k, s1.params.e[k]))
                .collect();
            if !coeffs.is_empty() {
                lp.add_constraint(coeffs, Relation::Le, s1.params.gamma_effective[0]);
            }
        } else {
            let coeffs: Vec<(usize, f64)> = (0..tau).map(|k| (dev0 + k, 1.0)).collect();
            lp.add_constraint(coeffs, Relation::Le, budget.groups[0].gamma);
        }
        // Pricing rows: dual feasibility of the inner maximum.
        for k in 0..tau {
            let w = inst.shortage_cost[k] * width[k];
            let mut coeffs = Vec::new();
            if effective {
                let s1 = stage1.as_ref().expect("stage-1 products");
                if s1.params.e[k] != 0.0 {
                    coeffs.push((xi0, s1.params.e[k]));
                }
                coeffs.push((mu0 + k, 1.0));
                coeffs.push((la0 + k, -1.0));
            } else {
                coeffs.push((xi0, 1.0));
                coeffs.push((mu0 + k, 1.0));
            }
            lp.add_constraint(coeffs, Relation::Ge, w);
        }
    }

    let mut names = Vec::with_capacity(nv);
    for prefix in ["u", "v", "w", "o"] {
        for k in 0..tau {
            names.push(format!("{prefix}{}", k + 1));
        }
    }
    if robust {
        let dev = if effective { "rho" } else { "z" };
        for k in 0..tau {
            names.push(format!("{dev}{}", k + 1));
        }
        names.push("xi1".to_string());
        for k in 0..tau {
            names.push(format!("mu{}", k + 1));
        }
        if effective {
            for k in 0..tau {
                names.push(format!("la{}", k + 1));
            }
        }
    }
    debug_assert_eq!(names.len(), nv);
    lp.var_names = Some(names.clone());

    let layout = InventoryLayout {
        u: u0..v0,
        v: v0..w0,
        w: w0..o0,
        o: o0..dev0,
        z: (robust && !effective).then(|| dev0..dev0 + tau),
        rho: effective.then(|| dev0..dev0 + tau),
        xi: robust.then(|| xi0..xi0 + 1),
        mu: robust.then(|| mu0..mu0 + tau),
        lambda: effective.then(|| la0..la0 + tau),
    };
    let program = MixedProgram::new(lp, (v0..w0).collect(), (v0..w0).collect());
    program.validate()?;

    let constant: f64 = shadow.c2.iter().zip(&base).map(|(c, b)| c * b).sum();
    let gap = if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        shadow
            .c2
            .iter()
            .zip(&shadow.y_nominal)
            .zip(&s1.interval.s_up)
            .map(|((&c, &nom), &up)| c * (nom - up).max(0.0))
            .sum()
    } else {
        0.0
    };

    Ok(InventoryModel {
        program,
        var_names: names,
        layout,
        variant,
        constant,
        gap,
        shadow,
        budget,
        stage1,
    })
}

impl InventoryModel {
    /// Solves the program and summarizes it in cross-variant coordinates:
    /// `y` is met demand per period, the comparable cost reprices the plan
    /// on the original interval at the active budget.
    pub fn solve(&self, opts: &SolveOptions) -> Result<AppSolution> {
        let sol = solve_milp(&self.program, opts).map_err(|e| e.in_stage("inventory model"))?;
        super::expect_optimal(&sol, "inventory model", self.variant)?;
        let raw = sol.x;
        let met = raw[self.layout.w.clone()].to_vec();
        let tau = met.len();
        let (wc_original, conv_z) = worst_case_inner(&self.shadow, &self.budget)?;

        let (worst_case_term, deviations, gamma_total) = match self.variant {
            ModelVariant::Nominal => (0.0, vec![0.0; tau], 0.0),
            ModelVariant::Conventional => {
                let xi = self.layout.xi.clone().expect("robust layout");
                let mu = self.layout.mu.clone().expect("robust layout");
                let term = self.budget.groups[0].gamma * raw[xi.start]
                    + raw[mu].iter().sum::<f64>();
                (term, conv_z, self.budget.total_gamma())
            }
            _ => {
                let s1 = self.stage1.as_ref().expect("stage-1 products");
                let xi = self.layout.xi.clone().expect("robust layout");
                let mu = self.layout.mu.clone().expect("robust layout");
                let la = self.layout.lambda.clone().expect("effective layout");
                let term = s1.params.gamma_effective[0] * raw[xi.start]
                    + raw[mu].iter().sum::<f64>()
                    - s1.params
                        .v
                        .iter()
                        .zip(raw[la].iter())
                        .map(|(v, &l)| v * l)
                        .sum::<f64>();
                let weights: Vec<f64> = (0..tau)
                    .map(|k| self.shadow.c2[k] * (s1.interval.s_up[k] - s1.interval.s_mid[k]))
                    .collect();
                let (_, rho) = effective_inner_max(&weights, &self.budget, &s1.params);
                let devs = original_scale_deviations(&rho, &s1.interval, &self.shadow);
                (term, devs, self.budget.total_gamma())
            }
        };

        let obj = &self.program.base.objective;
        let plan_cost: f64 = self
            .layout
            .u
            .clone()
            .chain(self.layout.v.clone())
            .chain(self.layout.o.clone())
            .map(|j| obj[j] * raw[j])
            .sum();
        let comparable_cost = plan_cost
            + self
                .shadow
                .c2
                .iter()
                .zip(&self.shadow.y_nominal)
                .zip(&met)
                .map(|((&c, &nom), &w)| c * (nom - w))
                .sum::<f64>()
            + wc_original;

        let solution = RobustSolution {
            variant: self.variant,
            x: raw[self.layout.u.clone()].to_vec(),
            y: met,
            deviations,
            objective: sol.objective + self.constant + self.gap,
            worst_case_term,
            comparable_cost,
            gamma_total,
            gamma_effective: self
                .stage1
                .as_ref()
                .map(|s1| s1.params.gamma_effective.clone()),
            cases: self.stage1.as_ref().map(|s1| s1.interval.cases.clone()),
            iterations: sol.iterations,
        };
        Ok(AppSolution { solution, raw })
    }
}

/// Builds and solves the inventory model, returning the solution summary.
pub fn solve_inventory(
    inst: &InventoryInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let model = build_inventory(inst, variant, gamma_override, opts)?;
    Ok(model.solve(opts)?.solution)
}

/// Stage 1 for the inventory model: the largest demand profile the ordering
/// plan can meet in full.
///
/// Order availability is fixed at the deterministic optimum's fixed-charge
/// pattern. Meeting a profile in full means the balance walks from
/// `inv_start` to `inv_end` without leaving the interior limits; the
/// binding conditions are prefix bounds on cumulative demand against
/// cumulative orders. Ties between profiles of equal mass break toward
/// earlier periods. The demand floor is admissible as given: meeting less
/// than the ceiling is always feasible because shortage is priced, not
/// forbidden.
pub fn inventory_stage1(
    inst: &InventoryInstance,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<AppStage1> {
    inst.validate()?;
    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &[inst.budget], gamma_override);
    let tau = inst.periods;

    let det = build_inventory_with(inst, ModelVariant::Nominal, None, None)?;
    let det_sol =
        solve_milp(&det.program, opts).map_err(|e| e.in_stage("inventory stage-1 baseline"))?;
    super::expect_optimal(&det_sol, "inventory stage-1 baseline", ModelVariant::Nominal)?;
    let open: Vec<f64> = det
        .layout
        .v
        .clone()
        .map(|j| det_sol.x[j].round())
        .collect();

    // Columns: u (tau) | s_up (tau).
    let s0 = tau;
    let mut obj = vec![0.0; 2 * tau];
    for k in 0..tau {
        // Maximize total admissible mass; the tiny weight front-loads.
        obj[s0 + k] = -(1.0 + 1e-6 * (tau - 1 - k) as f64 / tau as f64);
    }
    let mut lp = LinearProgram::new(2 * tau, obj);
    for k in 0..tau {
        lp.bounds[k] = VarBounds::interval(0.0, inst.order_max[k] * open[k]);
        lp.bounds[s0 + k] = VarBounds::interval(inst.demand_low[k], inst.demand_up[k]);
    }
    // Backlog floors: cumulative demand within cumulative orders.
    for k in 0..tau {
        let mut coeffs = Vec::new();
        for j in 0..=k {
            coeffs.push((j, -1.0));
        }
        for j in 0..=k {
            coeffs.push((s0 + j, 1.0));
        }
        lp.add_constraint(coeffs, Relation::Le, inst.inv_start - inst.inv_min);
    }
    // Terminal condition: the horizon must still reach the target level.
    {
        let mut coeffs = Vec::new();
        for k in 0..tau {
            coeffs.push((k, -1.0));
        }
        for k in 0..tau {
            coeffs.push((s0 + k, 1.0));
        }
        lp.add_constraint(coeffs, Relation::Le, inst.inv_start - inst.inv_end);
    }
    // Overstock ceilings on the interior levels.
    for k in 1..tau {
        let mut coeffs = Vec::new();
        for j in 0..k {
            coeffs.push((j, 1.0));
        }
        for j in 0..k {
            coeffs.push((s0 + j, -1.0));
        }
        lp.add_constraint(coeffs, Relation::Le, inst.inv_max - inst.inv_start);
    }
    lp.validate()?;
    let sol = solve_lp(&lp, opts).map_err(|e| e.in_stage("inventory stage-1"))?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible(
                "no admissible demand profile: the ordering plan cannot meet the demand floor"
                    .into(),
            ))
        }
        SolveStatus::Unbounded => {
            return Err(Error::Numerical(
                "inventory stage-1 reported an unbounded interval".into(),
            ))
        }
    }
    let s_up = sol.x[s0..2 * tau].to_vec();
    let s_low = shadow.y_low.clone();
    let loss: f64 = shadow.y_up.iter().zip(&s_up).map(|(&u, &s)| u - s).sum();
    AppStage1::assemble(shadow, budget, s_low, s_up, loss)
}

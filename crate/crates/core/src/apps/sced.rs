//! Security-constrained economic dispatch with uncertain wind.
//!
//! Over `T` periods, generators `g` schedule output `p_{g,t}` inside
//! `[p_min, p_max]` with ramp limits between periods, and carry upward and
//! downward reserve `ries{+,-}_{g,t}` capped by their ramp rates and headroom.
//! Wind farms `k` offer an uncertain availability profile; the dispatch
//! uses `w_{k,t}` of it and pays `curtail_cost` for every unused unit.
//! Power balance holds per period, line flows stay within limits under a
//! linear sensitivity map from bus injections, and total scheduled reserve
//! covers the per-period requirements.
//!
//! The deterministic model caps wind usage at the nominal profile. The
//! conventional robust model tracks deviations both ways with `z^+`, `z^-`
//! against the per-period budgets and prices the worst-case curtailment
//! through the exact dual of the budgeted inner maximum. The effective
//! model rescales deviations onto the stage-1 admissible interval, which
//! accounts for line limits, reserve deliverability, and ramp room, and
//! prices the worst case over the rescaled budget. Every curtailment price
//! must dominate every generator marginal cost so that wind is never
//! spilled for economic reasons, only for feasibility.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::effective::{solve_stage1_system, Stage1System};
use crate::lp::{solve_lp, LinearProgram, Relation, SolveOptions, VarBounds};
use crate::robust::{worst_case_inner, BudgetSpec, ModelVariant, NominalInstance, RobustSolution};
use crate::{Error, Result};

use super::{
    budget_spec, effective_inner_max, original_scale_deviations, AppSolution, AppStage1,
};

/// A dispatchable generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    /// Bus the unit injects at.
    pub bus: usize,
    /// Marginal cost per unit of output.
    pub cost: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Ramp-up rate, also the cap on upward reserve.
    pub ramp_up: f64,
    /// Ramp-down rate, also the cap on downward reserve.
    pub ramp_down: f64,
}

/// A wind farm with an uncertain availability profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFarm {
    pub name: String,
    /// Bus the farm injects at.
    pub bus: usize,
    /// Cost per unit of available wind left unused.
    pub curtail_cost: f64,
    /// Nominal availability per period; must be the midpoint of the bounds.
    pub nominal: Vec<f64>,
    /// Lower availability bounds; an empty vector means all zeros.
    #[serde(default)]
    pub low: Vec<f64>,
    /// Upper availability bounds.
    pub up: Vec<f64>,
}

/// A transmission line under a linear power-transfer model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub limit_low: f64,
    pub limit_up: f64,
    /// Flow sensitivity to a unit injection at each bus.
    pub sensitivity: Vec<f64>,
}

/// Problem data for the dispatch model. Periods are 0-based in code and
/// 1-based in reports; wind coordinates flatten period-major as
/// `j = t * K + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScedInstance {
    pub buses: usize,
    pub periods: usize,
    pub generators: Vec<Generator>,
    pub farms: Vec<WindFarm>,
    pub lines: Vec<Line>,
    /// Demand per bus and period.
    pub loads: Vec<Vec<f64>>,
    /// Upward reserve requirement per period; empty means all zeros.
    #[serde(default)]
    pub reserve_up: Vec<f64>,
    /// Downward reserve requirement per period; empty means all zeros.
    #[serde(default)]
    pub reserve_down: Vec<f64>,
    /// Deviation budget per period.
    pub budgets: Vec<f64>,
}

impl ScedInstance {
    /// Parses an instance from JSON, filling omitted wind floors and
    /// reserve requirements with zeros, and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut inst: ScedInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("dispatch instance: {e}")))?;
        for farm in &mut inst.farms {
            if farm.low.is_empty() {
                farm.low = vec![0.0; farm.nominal.len()];
            }
        }
        if inst.reserve_up.is_empty() {
            inst.reserve_up = vec![0.0; inst.periods];
        }
        if inst.reserve_down.is_empty() {
            inst.reserve_down = vec![0.0; inst.periods];
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
            .map_err(|e| Error::Io(format!("serializing dispatch instance: {e}")))
    }

    /// Structural validation; reports the first violation found.
    pub fn validate(&self) -> Result<()> {
        let (nb, nt) = (self.buses, self.periods);
        if nb == 0 || nt == 0 {
            return Err(Error::InvalidInstance(
                "dispatch instance needs at least one bus and one period".into(),
            ));
        }
        if self.generators.is_empty() {
            return Err(Error::InvalidInstance(
                "dispatch instance needs at least one generator".into(),
            ));
        }
        if self.farms.is_empty() {
            return Err(Error::InvalidInstance(
                "dispatch instance needs at least one wind farm".into(),
            ));
        }
        let dearest = self
            .generators
            .iter()
            .map(|g| g.cost)
            .fold(f64::NEG_INFINITY, f64::max);
        for gen in &self.generators {
            if gen.bus >= nb {
                return Err(Error::InvalidInstance(format!(
                    "generator {} sits at bus {} of {nb}",
                    gen.name, gen.bus
                )));
            }
            if ![gen.cost, gen.p_min, gen.p_max, gen.ramp_up, gen.ramp_down]
                .iter()
                .all(|v| v.is_finite())
                || gen.cost < 0.0
                || gen.p_min > gen.p_max
                || gen.ramp_up < 0.0
                || gen.ramp_down < 0.0
            {
                return Err(Error::InvalidInstance(format!(
                    "generator {} has inconsistent limits",
                    gen.name
                )));
            }
        }
        for farm in &self.farms {
            if farm.bus >= nb {
                return Err(Error::InvalidInstance(format!(
                    "wind farm {} sits at bus {} of {nb}",
                    farm.name, farm.bus
                )));
            }
            if !farm.curtail_cost.is_finite() || farm.curtail_cost < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "wind farm {} has curtailment cost {}",
                    farm.name, farm.curtail_cost
                )));
            }
            for (name, len) in [
                ("nominal", farm.nominal.len()),
                ("low", farm.low.len()),
                ("up", farm.up.len()),
            ] {
                if len != nt {
                    return Err(Error::InvalidInstance(format!(
                        "wind farm {}: {name} profile has {len} entries, expected {nt}",
                        farm.name
                    )));
                }
            }
            for t in 0..nt {
                let (lo, nom, up) = (farm.low[t], farm.nominal[t], farm.up[t]);
                if ![lo, nom, up].iter().all(|v| v.is_finite()) || lo < 0.0 || lo > nom || nom > up
                {
                    return Err(Error::InvalidInstance(format!(
                        "wind farm {} period {}: bounds ({lo}, {nom}, {up}) are not ordered",
                        farm.name,
                        t + 1
                    )));
                }
                let mid = 0.5 * (lo + up);
                if (nom - mid).abs() > 1e-7 * (1.0 + mid.abs()) {
                    return Err(Error::InvalidInstance(format!(
                        "wind farm {} period {}: nominal {nom} is not the midpoint of \
                         [{lo}, {up}]",
                        farm.name,
                        t + 1
                    )));
                }
            }
            // Wind must never be spilled for economic reasons: every
            // curtailment price has to dominate the dearest marginal cost.
            if farm.curtail_cost < dearest {
                return Err(Error::InvalidInstance(format!(
                    "wind farm {}: curtailment cost {} is below the dearest generator \
                     marginal cost {dearest}",
                    farm.name, farm.curtail_cost
                )));
            }
        }
        for line in &self.lines {
            if line.sensitivity.len() != nb {
                return Err(Error::InvalidInstance(format!(
                    "line {}: sensitivity has {} entries, expected {nb}",
                    line.name,
                    line.sensitivity.len()
                )));
            }
            if !line.sensitivity.iter().all(|v| v.is_finite())
                || !line.limit_low.is_finite()
                || !line.limit_up.is_finite()
                || line.limit_low > line.limit_up
            {
                return Err(Error::InvalidInstance(format!(
                    "line {} has inconsistent limits",
                    line.name
                )));
            }
        }
        if self.loads.len() != nb || self.loads.iter().any(|row| row.len() != nt) {
            return Err(Error::InvalidInstance(format!(
                "loads must be a {nb} x {nt} table"
            )));
        }
        if self.loads.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInstance(
                "loads must be finite and nonnegative".into(),
            ));
        }
        for (name, values, want) in [
            ("reserve_up", &self.reserve_up, nt),
            ("reserve_down", &self.reserve_down, nt),
            ("budgets", &self.budgets, nt),
        ] {
            if values.len() != want {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {} entries, expected {want}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "{name} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }

    /// Number of uncertain wind coordinates `T * K`.
    pub fn num_coords(&self) -> usize {
        self.periods * self.farms.len()
    }

    /// Flat coordinate of farm `k` in period `t`.
    pub fn coord(&self, t: usize, k: usize) -> usize {
        t * self.farms.len() + k
    }

    /// Budget partition: one group per period across all farms.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let kf = self.farms.len();
        (0..self.periods)
            .map(|t| (0..kf).map(|k| self.coord(t, k)).collect())
            .collect()
    }

    fn flatten(&self, field: impl Fn(&WindFarm) -> &Vec<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_coords());
        for t in 0..self.periods {
            for farm in &self.farms {
                out.push(field(farm)[t]);
            }
        }
        out
    }

    /// Shadow resource instance over the flattened wind coordinates:
    /// curtailment prices as deprivation costs, no allocation rows.
    pub fn shadow_instance(&self) -> NominalInstance {
        let mut c2 = Vec::with_capacity(self.num_coords());
        for _ in 0..self.periods {
            c2.extend(self.farms.iter().map(|f| f.curtail_cost));
        }
        NominalInstance {
            a: vec![],
            b: vec![],
            c1: vec![],
            c2,
            g: vec![],
            y_nominal: self.flatten(|f| &f.nominal),
            y_low: self.flatten(|f| &f.low),
            y_up: self.flatten(|f| &f.up),
            budget_groups: Some(self.partition()),
            allow_non_centered: true,
            ellipsoid: None,
        }
    }

    fn total_load(&self, t: usize) -> f64 {
        self.loads.iter().map(|row| row[t]).sum()
    }
}

/// Column layout of a built dispatch model.
#[derive(Debug, Clone)]
pub struct ScedLayout {
    pub p: Range<usize>,
    pub r_up: Range<usize>,
    pub r_down: Range<usize>,
    /// Wind usage `w_{k,t}`, period-major.
    pub w: Range<usize>,
    /// Conventional upward deviation controls.
    pub z_up: Option<Range<usize>>,
    /// Conventional downward deviation controls.
    pub z_down: Option<Range<usize>>,
    /// Effective deviation controls.
    pub rho: Option<Range<usize>>,
    pub xi: Option<Range<usize>>,
    pub mu: Option<Range<usize>>,
    pub lambda: Option<Range<usize>>,
    generators: usize,
    farms: usize,
    periods: usize,
}

impl ScedLayout {
    /// Column of generator `g`'s output in period `t`.
    pub fn p_index(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.generators && t < self.periods);
        self.p.start + t * self.generators + g
    }

    /// Column of generator `g`'s upward reserve in period `t`.
    pub fn r_up_index(&self, g: usize, t: usize) -> usize {
        self.r_up.start + t * self.generators + g
    }

    /// Column of generator `g`'s downward reserve in period `t`.
    pub fn r_down_index(&self, g: usize, t: usize) -> usize {
        self.r_down.start + t * self.generators + g
    }

    /// Column of farm `k`'s wind usage in period `t`.
    pub fn w_index(&self, k: usize, t: usize) -> usize {
        debug_assert!(k < self.farms && t < self.periods);
        self.w.start + t * self.farms + k
    }
}

/// A built dispatch model: the program, its layout, and the pricing
/// context shared across variants.
#[derive(Debug, Clone)]
pub struct ScedModel {
    pub program: LinearProgram,
    pub var_names: Vec<String>,
    pub layout: ScedLayout,
    pub variant: ModelVariant,
    /// Constant added to the raw objective in reports.
    pub constant: f64,
    /// Curtailment mass outside the admissible interval (effective variant).
    pub gap: f64,
    /// Shadow resource instance over the flattened wind coordinates.
    pub shadow: NominalInstance,
    /// Active deviation budget (instance budgets or uniform override).
    pub budget: BudgetSpec,
    /// Stage-1 products, present for the effective variant.
    pub stage1: Option<AppStage1>,
}

/// Builds the dispatch model for a variant.
///
/// Columns: `p | r_up | r_down` (`G T` each, period-major) and `w` (`K T`),
/// then `z_up | z_down | xi | mu` for the conventional variant or
/// `rho | xi | mu | lambda` for the effective one. Rows: balance `T`, line
/// flows `2 F T`, reserve requirements `2 T`, reserve deliverability
/// `2 G T`, ramps `2 G (T - 1)`, then wind caps `K T`, per-period budgets
/// (effective periods without deviation weight are skipped), and one
/// pricing row per wind coordinate.
pub fn build_sced(
    inst: &ScedInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<ScedModel> {
    inst.validate()?;
    let stage1 = match variant {
        ModelVariant::Effective => Some(sced_stage1(inst, gamma_override, opts)?),
        ModelVariant::Nominal | ModelVariant::Conventional => None,
        other => {
            return Err(Error::InvalidModel(format!(
                "variant {} is not defined for the dispatch model",
                other.as_str()
            )))
        }
    };
    build_sced_with(inst, variant, gamma_override, stage1)
}

fn build_sced_with(
    inst: &ScedInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    stage1: Option<AppStage1>,
) -> Result<ScedModel> {
    let (ng, kf, nt) = (inst.generators.len(), inst.farms.len(), inst.periods);
    let m = inst.num_coords();
    let gt = ng * nt;

    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &inst.budgets, gamma_override);
    budget.validate(m)?;

    let robust = !matches!(variant, ModelVariant::Nominal);
    let effective = matches!(variant, ModelVariant::Effective);
    let (p0, ru0, rd0, w0) = (0, gt, 2 * gt, 3 * gt);
    let dev0 = w0 + m;
    let xi0 = dev0
        + match (robust, effective) {
            (true, false) => 2 * m,
            (true, true) => m,
            _ => 0,
        };
    let mu0 = xi0 + if robust { nt } else { 0 };
    let la0 = mu0 + if robust { m } else { 0 };
    let nv = la0 + if effective { m } else { 0 };

    let (base, up_width, down_width): (Vec<f64>, Vec<f64>, Vec<f64>) = if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        let half: Vec<f64> = s1
            .interval
            .s_up
            .iter()
            .zip(&s1.interval.s_mid)
            .map(|(&u, &mid)| u - mid)
            .collect();
        (s1.interval.s_mid.clone(), half.clone(), half)
    } else {
        (
            shadow.y_nominal.clone(),
            shadow
                .y_up
                .iter()
                .zip(&shadow.y_nominal)
                .map(|(&u, &nom)| u - nom)
                .collect(),
            shadow
                .y_nominal
                .iter()
                .zip(&shadow.y_low)
                .map(|(&nom, &lo)| nom - lo)
                .collect(),
        )
    };

    let mut layout = ScedLayout {
        p: p0..ru0,
        r_up: ru0..rd0,
        r_down: rd0..w0,
        w: w0..dev0,
        z_up: None,
        z_down: None,
        rho: None,
        xi: None,
        mu: None,
        lambda: None,
        generators: ng,
        farms: kf,
        periods: nt,
    };
    let mut obj = vec![0.0; nv];
    for t in 0..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            obj[layout.p_index(g, t)] = gen.cost;
        }
        for (k, farm) in inst.farms.iter().enumerate() {
            obj[layout.w_index(k, t)] = -farm.curtail_cost;
        }
    }
    if robust {
        layout.xi = Some(xi0..xi0 + nt);
        layout.mu = Some(mu0..mu0 + m);
        for j in 0..m {
            obj[mu0 + j] = 1.0;
        }
    }
    if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        layout.rho = Some(dev0..dev0 + m);
        layout.lambda = Some(la0..la0 + m);
        for (t, &ge) in s1.params.gamma_effective.iter().enumerate() {
            obj[xi0 + t] = ge;
        }
        for j in 0..m {
            obj[la0 + j] = -s1.params.v[j];
        }
    } else if robust {
        layout.z_up = Some(dev0..dev0 + m);
        layout.z_down = Some(dev0 + m..dev0 + 2 * m);
        for (t, group) in budget.groups.iter().enumerate() {
            obj[xi0 + t] = group.gamma;
        }
    }

    let mut lp = LinearProgram::new(nv, obj);
    for t in 0..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            lp.bounds[layout.p_index(g, t)] = VarBounds::interval(gen.p_min, gen.p_max);
            lp.bounds[layout.r_up_index(g, t)] = VarBounds::interval(0.0, gen.ramp_up);
            lp.bounds[layout.r_down_index(g, t)] = VarBounds::interval(0.0, gen.ramp_down);
        }
        for (k, farm) in inst.farms.iter().enumerate() {
            let cap = if robust { farm.up[t] } else { farm.nominal[t] };
            lp.bounds[layout.w_index(k, t)] = VarBounds::interval(0.0, cap);
        }
    }
    if robust {
        for j in 0..m {
            lp.bounds[dev0 + j] = if effective {
                let s1 = stage1.as_ref().expect("stage-1 products");
                VarBounds::interval(s1.params.v[j], 1.0)
            } else {
                VarBounds::interval(0.0, 1.0)
            };
        }
        if !effective {
            for j in 0..m {
                lp.bounds[dev0 + m + j] = VarBounds::interval(0.0, 1.0);
            }
        }
    }

    // Power balance per period.
    for t in 0..nt {
        let mut coeffs = Vec::new();
        for g in 0..ng {
            coeffs.push((layout.p_index(g, t), 1.0));
        }
        for k in 0..kf {
            coeffs.push((layout.w_index(k, t), 1.0));
        }
        lp.add_constraint(coeffs, Relation::Eq, inst.total_load(t));
    }
    // Line flows under the sensitivity map, both directions.
    for t in 0..nt {
        for line in &inst.lines {
            let shift: f64 = line
                .sensitivity
                .iter()
                .enumerate()
                .map(|(i, &s)| s * inst.loads[i][t])
                .sum();
            for dir in [1.0, -1.0] {
                let mut coeffs = Vec::new();
                for (g, gen) in inst.generators.iter().enumerate() {
                    let s = line.sensitivity[gen.bus];
                    if s != 0.0 {
                        coeffs.push((layout.p_index(g, t), dir * s));
                    }
                }
                for (k, farm) in inst.farms.iter().enumerate() {
                    let s = line.sensitivity[farm.bus];
                    if s != 0.0 {
                        coeffs.push((layout.w_index(k, t), dir * s));
                    }
                }
                let rhs = if dir > 0.0 {
                    line.limit_up + shift
                } else {
                    -line.limit_low - shift
                };
                lp.add_constraint(coeffs, Relation::Le, rhs);
            }
        }
    }
    // Reserve requirements per period.
    for t in 0..nt {
        let up: Vec<(usize, f64)> = (0..ng).map(|g| (layout.r_up_index(g, t), 1.0)).collect();
        lp.add_constraint(up, Relation::Ge, inst.reserve_up[t]);
        let down: Vec<(usize, f64)> = (0..ng).map(|g| (layout.r_down_index(g, t), 1.0)).collect();
        lp.add_constraint(down, Relation::Ge, inst.reserve_down[t]);
    }
    // Reserve deliverability against the output limits.
    for t in 0..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            lp.add_constraint(
                vec![(layout.p_index(g, t), 1.0), (layout.r_up_index(g, t), 1.0)],
                Relation::Le,
                gen.p_max,
            );
            lp.add_constraint(
                vec![
                    (layout.p_index(g, t), -1.0),
                    (layout.r_down_index(g, t), 1.0),
                ],
                Relation::Le,
                -gen.p_min,
            );
        }
    }
    // Ramp limits between consecutive periods.
    for t in 1..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            lp.add_constraint(
                vec![
                    (layout.p_index(g, t - 1), -1.0),
                    (layout.p_index(g, t), 1.0),
                ],
                Relation::Le,
                gen.ramp_up,
            );
            lp.add_constraint(
                vec![
                    (layout.p_index(g, t - 1), 1.0),
                    (layout.p_index(g, t), -1.0),
                ],
                Relation::Le,
                gen.ramp_down,
            );
        }
    }
    // Wind caps with the variant's deviation controls.
    if robust {
        for t in 0..nt {
            for k in 0..kf {
                let j = inst.coord(t, k);
                let mut coeffs = vec![(layout.w_index(k, t), 1.0)];
                if effective {
                    if up_width[j] != 0.0 {
                        coeffs.push((dev0 + j, -up_width[j]));
                    }
                } else {
                    if up_width[j] != 0.0 {
                        coeffs.push((dev0 + j, -up_width[j]));
                    }
                    if down_width[j] != 0.0 {
                        coeffs.push((dev0 + m + j, down_width[j]));
                    }
                }
                lp.add_constraint(coeffs, Relation::Le, base[j]);
            }
        }
        // Budget rows per period.
        for (t, group) in budget.groups.iter().enumerate() {
            let mut idx = group.indices.clone();
            idx.sort_unstable();
            if effective {
                let s1 = stage1.as_ref().expect("stage-1 products");
                let coeffs: Vec<(usize, f64)> = idx
                    .iter()
                    .filter(|&&j| s1.params.e[j] != 0.0)
                    .map(|&j| (dev0 + j, s1.params.e[j]))
                    .collect();
                if !coeffs.is_empty() {
                    lp.add_constraint(coeffs, Relation::Le, s1.params.gamma_effective[t]);
                }
            } else {
                let mut coeffs: Vec<(usize, f64)> =
                    idx.iter().map(|&j| (dev0 + j, 1.0)).collect();
                coeffs.extend(idx.iter().map(|&j| (dev0 + m + j, 1.0)));
                lp.add_constraint(coeffs, Relation::Le, group.gamma);
            }
        }
        // Pricing rows: dual feasibility of the inner maximum.
        let owner = budget.validate(m)?;
        for t in 0..nt {
            for k in 0..kf {
                let j = inst.coord(t, k);
                let weight = shadow.c2[j] * up_width[j];
                let mut coeffs = Vec::new();
                if effective {
                    let s1 = stage1.as_ref().expect("stage-1 products");
                    if s1.params.e[j] != 0.0 {
                        coeffs.push((xi0 + owner[j], s1.params.e[j]));
                    }
                    coeffs.push((mu0 + j, 1.0));
                    coeffs.push((la0 + j, -1.0));
                } else {
                    coeffs.push((xi0 + owner[j], 1.0));
                    coeffs.push((mu0 + j, 1.0));
                }
                lp.add_constraint(coeffs, Relation::Ge, weight);
            }
        }
    }

    let mut names = Vec::with_capacity(nv);
    for prefix in ["p", "rup", "rdn"] {
        for t in 0..nt {
            for g in 0..ng {
                names.push(format!("{prefix}_g{}_t{}", g + 1, t + 1));
            }
        }
    }
    for t in 0..nt {
        for k in 0..kf {
            names.push(format!("w_k{}_t{}", k + 1, t + 1));
        }
    }
    if robust {
        let dev: &[&str] = if effective { &["rho"] } else { &["zup", "zdn"] };
        for prefix in dev {
            for t in 0..nt {
                for k in 0..kf {
                    names.push(format!("{prefix}_k{}_t{}", k + 1, t + 1));
                }
            }
        }
        for t in 0..nt {
            names.push(format!("xi_t{}", t + 1));
        }
        for t in 0..nt {
            for k in 0..kf {
                names.push(format!("mu_k{}_t{}", k + 1, t + 1));
            }
        }
        if effective {
            for t in 0..nt {
                for k in 0..kf {
                    names.push(format!("la_k{}_t{}", k + 1, t + 1));
                }
            }
        }
    }
    debug_assert_eq!(names.len(), nv);
    lp.var_names = Some(names.clone());
    lp.validate()?;

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

    Ok(ScedModel {
        program: lp,
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

impl ScedModel {
    /// Solves the program and summarizes it in cross-variant coordinates:
    /// `y` is wind usage per flat coordinate, the comparable cost reprices
    /// the dispatch on the original interval at the active budget.
    pub fn solve(&self, opts: &SolveOptions) -> Result<AppSolution> {
        let sol = solve_lp(&self.program, opts).map_err(|e| e.in_stage("dispatch model"))?;
        super::expect_optimal(&sol, "dispatch model", self.variant)?;
        let raw = sol.x;
        let wind = raw[self.layout.w.clone()].to_vec();
        let m = wind.len();
        let (wc_original, conv_z) = worst_case_inner(&self.shadow, &self.budget)?;

        let (worst_case_term, deviations, gamma_total) = match self.variant {
            ModelVariant::Nominal => (0.0, vec![0.0; m], 0.0),
            ModelVariant::Conventional => {
                let xi = self.layout.xi.clone().expect("robust layout");
                let mu = self.layout.mu.clone().expect("robust layout");
                let term = self
                    .budget
                    .groups
                    .iter()
                    .zip(raw[xi].iter())
                    .map(|(g, &v)| g.gamma * v)
                    .sum::<f64>()
                    + raw[mu].iter().sum::<f64>();
                (term, conv_z, self.budget.total_gamma())
            }
            _ => {
                let s1 = self.stage1.as_ref().expect("stage-1 products");
                let xi = self.layout.xi.clone().expect("robust layout");
                let mu = self.layout.mu.clone().expect("robust layout");
                let la = self.layout.lambda.clone().expect("effective layout");
                let term = s1
                    .params
                    .gamma_effective
                    .iter()
                    .zip(raw[xi].iter())
                    .map(|(g, &v)| g * v)
                    .sum::<f64>()
                    + raw[mu].iter().sum::<f64>()
                    - s1.params
                        .v
                        .iter()
                        .zip(raw[la].iter())
                        .map(|(v, &l)| v * l)
                        .sum::<f64>();
                let weights: Vec<f64> = (0..m)
                    .map(|j| self.shadow.c2[j] * (s1.interval.s_up[j] - s1.interval.s_mid[j]))
                    .collect();
                let (_, rho) = effective_inner_max(&weights, &self.budget, &s1.params);
                let devs = original_scale_deviations(&rho, &s1.interval, &self.shadow);
                (term, devs, self.budget.total_gamma())
            }
        };

        let generation_cost: f64 = self
            .layout
            .p
            .clone()
            .map(|j| self.program.objective[j] * raw[j])
            .sum();
        let comparable_cost = generation_cost
            + self
                .shadow
                .c2
                .iter()
                .zip(&self.shadow.y_nominal)
                .zip(&wind)
                .map(|((&c, &nom), &w)| c * (nom - w))
                .sum::<f64>()
            + wc_original;

        let solution = RobustSolution {
            variant: self.variant,
            x: raw[self.layout.p.clone()].to_vec(),
            y: wind,
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

/// Builds and solves the dispatch model, returning the solution summary.
pub fn solve_sced(
    inst: &ScedInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let model = build_sced(inst, variant, gamma_override, opts)?;
    Ok(model.solve(opts)?.solution)
}

/// Stage 1 for the dispatch model: the largest wind envelope the grid can
/// absorb at some fixed dispatch.
///
/// A single dispatch with reserves must keep every flow limit, reserve
/// deliverability, and ramp constraint satisfied coefficientwise over the
/// whole envelope: rows see the upper endpoint where more wind tightens
/// them and the lower endpoint where less wind does. Upward adequacy at the
/// envelope floor and downward room at its ceiling replace the balance
/// equation, which cannot hold identically across an interval.
pub fn sced_stage1(
    inst: &ScedInstance,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<AppStage1> {
    inst.validate()?;
    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &inst.budgets, gamma_override);
    let (ng, kf, nt) = (inst.generators.len(), inst.farms.len(), inst.periods);
    let m = inst.num_coords();
    let gt = ng * nt;
    let (p0, ru0, rd0) = (0, gt, 2 * gt);
    let np = 3 * gt;
    let pcol = |g: usize, t: usize| p0 + t * ng + g;
    let rucol = |g: usize, t: usize| ru0 + t * ng + g;
    let rdcol = |g: usize, t: usize| rd0 + t * ng + g;

    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut push = |ar: Vec<f64>, br: Vec<f64>, g: f64| {
        a.push(ar);
        b.push(br);
        rhs.push(g);
    };

    // Line flows, both directions, wind at the tightening endpoint.
    for t in 0..nt {
        for line in &inst.lines {
            let shift: f64 = line
                .sensitivity
                .iter()
                .enumerate()
                .map(|(i, &s)| s * inst.loads[i][t])
                .sum();
            for dir in [1.0, -1.0] {
                let mut ar = vec![0.0; np];
                let mut br = vec![0.0; m];
                for (g, gen) in inst.generators.iter().enumerate() {
                    ar[pcol(g, t)] = dir * line.sensitivity[gen.bus];
                }
                for (k, farm) in inst.farms.iter().enumerate() {
                    br[inst.coord(t, k)] = dir * line.sensitivity[farm.bus];
                }
                let g = if dir > 0.0 {
                    line.limit_up + shift
                } else {
                    -line.limit_low - shift
                };
                push(ar, br, g);
            }
        }
    }
    // Upward adequacy at the envelope floor: output plus upward reserve
    // plus the least wind must cover load and the upward requirement.
    for t in 0..nt {
        let mut ar = vec![0.0; np];
        let mut br = vec![0.0; m];
        for g in 0..ng {
            ar[pcol(g, t)] = -1.0;
            ar[rucol(g, t)] = -1.0;
        }
        for k in 0..kf {
            br[inst.coord(t, k)] = -1.0;
        }
        push(ar, br, -inst.total_load(t) - inst.reserve_up[t]);
    }
    // Downward room at the envelope ceiling: output minus downward reserve
    // plus the most wind must stay within load and the downward margin.
    for t in 0..nt {
        let mut ar = vec![0.0; np];
        let mut br = vec![0.0; m];
        for g in 0..ng {
            ar[pcol(g, t)] = 1.0;
            ar[rdcol(g, t)] = -1.0;
        }
        for k in 0..kf {
            br[inst.coord(t, k)] = 1.0;
        }
        push(ar, br, inst.total_load(t) + inst.reserve_down[t]);
    }
    // Reserve deliverability and ramps carry over unchanged.
    for t in 0..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            let mut ar = vec![0.0; np];
            ar[pcol(g, t)] = 1.0;
            ar[rucol(g, t)] = 1.0;
            push(ar, vec![0.0; m], gen.p_max);
            let mut ar = vec![0.0; np];
            ar[pcol(g, t)] = -1.0;
            ar[rdcol(g, t)] = 1.0;
            push(ar, vec![0.0; m], -gen.p_min);
        }
    }
    for t in 1..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            let mut ar = vec![0.0; np];
            ar[pcol(g, t - 1)] = -1.0;
            ar[pcol(g, t)] = 1.0;
            push(ar, vec![0.0; m], gen.ramp_up);
            let mut ar = vec![0.0; np];
            ar[pcol(g, t - 1)] = 1.0;
            ar[pcol(g, t)] = -1.0;
            push(ar, vec![0.0; m], gen.ramp_down);
        }
    }

    let mut x_bounds = vec![VarBounds::nonnegative(); np];
    for t in 0..nt {
        for (g, gen) in inst.generators.iter().enumerate() {
            x_bounds[pcol(g, t)] = VarBounds::interval(gen.p_min, gen.p_max);
            x_bounds[rucol(g, t)] = VarBounds::interval(0.0, gen.ramp_up);
            x_bounds[rdcol(g, t)] = VarBounds::interval(0.0, gen.ramp_down);
        }
    }
    let sys = Stage1System {
        a,
        b,
        g: rhs,
        x_bounds,
        cap_up: shadow.y_up.clone(),
        cap_low: shadow.y_low.clone(),
    };
    let outcome = solve_stage1_system(&sys, opts).map_err(|e| e.in_stage("dispatch stage-1"))?;
    AppStage1::assemble(shadow, budget, outcome.s_low, outcome.s_up, outcome.objective)
}

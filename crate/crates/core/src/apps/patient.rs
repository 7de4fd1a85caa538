//! Elective patient admission with uncertain daily demand.
//!
//! Over a horizon of `T` days, patients of `P` priority classes arrive in
//! uncertain numbers. Service on day `t` of arrivals that waited `n` days is
//! counted by `x_{t,n,p}`; daily capacity is assembled from `K` segments
//! `c_{i,t}` with per-unit costs `theta_i` (the base segment is free) and
//! ceilings `L_i`, with binaries `q_{i,t}` linking interior segments to
//! their predecessors. Arrivals never served by the horizon are penalized at
//! `g_{t,p}` each.
//!
//! The demand rows follow the waiting-index arithmetic literally: for every
//! day `t` and depth `n <= t`, the diagonal sum `sum_{i<=n} x_{t-i,n-i,p}`
//! is capped by the day-`t` demand level. The deterministic model caps at
//! nominal demand. The conventional robust model lets the plan raise the
//! caps by `z_{t,p} (d_up - d_nom)` against the per-priority budget and
//! prices the worst-case penalty through the exact dual of the budgeted
//! inner maximum. The effective model rescales deviations onto the stage-1
//! admissible interval and prices the worst case over the rescaled budget;
//! its reported objective adds the penalty mass `g (d_nom - s_up)^+` that
//! lies outside the admissible interval, so all variants price unserved
//! demand against the same baseline.

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

/// Problem data for the admission model. Days and priorities are 0-based in
/// code and 1-based in reports; demand tables are indexed `[day][priority]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientInstance {
    /// Number of priority classes `P`.
    pub priorities: usize,
    /// Horizon length `T` in days.
    pub days: usize,
    /// Number of capacity segments `K`.
    pub segments: usize,
    /// Capacity units consumed per patient of each priority.
    pub service_time: Vec<f64>,
    /// Waiting-time targets per priority, carried for reporting only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wait_target: Option<Vec<f64>>,
    /// Unserved-arrival penalty `g[day][priority]`.
    pub penalty: Vec<Vec<f64>>,
    /// Per-unit cost of each capacity segment; the base segment is free.
    pub theta: Vec<f64>,
    /// Segment ceilings `L_i`. At least `segments` entries; extra trailing
    /// entries are carried but unused by the model.
    pub capacity_levels: Vec<f64>,
    /// Nominal demand `[day][priority]`.
    pub demand_nominal: Vec<Vec<f64>>,
    /// Lower demand bounds; an empty table means all zeros.
    #[serde(default)]
    pub demand_low: Vec<Vec<f64>>,
    /// Upper demand bounds.
    pub demand_up: Vec<Vec<f64>>,
    /// Deviation budget per priority.
    pub budgets: Vec<f64>,
}

impl PatientInstance {
    /// Parses an instance from JSON, filling the demand floor with zeros
    /// when absent, and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut inst: PatientInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("admission instance: {e}")))?;
        if inst.demand_low.is_empty() {
            inst.demand_low = inst
                .demand_nominal
                .iter()
                .map(|row| vec![0.0; row.len()])
                .collect();
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
            .map_err(|e| Error::Io(format!("serializing admission instance: {e}")))
    }

    /// Structural validation; reports the first violation found.
    pub fn validate(&self) -> Result<()> {
        let (np, nt, nk) = (self.priorities, self.days, self.segments);
        if np == 0 || nt == 0 || nk == 0 {
            return Err(Error::InvalidInstance(
                "admission instance needs at least one priority, day, and segment".into(),
            ));
        }
        for (name, len, want) in [
            ("service_time", self.service_time.len(), np),
            ("theta", self.theta.len(), nk),
            ("budgets", self.budgets.len(), np),
        ] {
            if len != want {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {len} entries, expected {want}"
                )));
            }
        }
        if let Some(w) = &self.wait_target {
            if w.len() != np {
                return Err(Error::InvalidInstance(format!(
                    "wait_target has {} entries, expected {np}",
                    w.len()
                )));
            }
        }
        if self.capacity_levels.len() < nk {
            return Err(Error::InvalidInstance(format!(
                "capacity_levels has {} entries for {nk} segments",
                self.capacity_levels.len()
            )));
        }
        if self.theta[0] != 0.0 {
            return Err(Error::InvalidInstance(format!(
                "theta[0] is {}, the base segment must be free",
                self.theta[0]
            )));
        }
        if self.theta.iter().any(|&t| !t.is_finite() || t < 0.0) {
            return Err(Error::InvalidInstance(
                "theta must be finite and nonnegative".into(),
            ));
        }
        if self.service_time.iter().any(|&s| !s.is_finite() || s <= 0.0) {
            return Err(Error::InvalidInstance(
                "service_time must be finite and positive".into(),
            ));
        }
        for i in 0..nk {
            let l = self.capacity_levels[i];
            if !l.is_finite() || l <= 0.0 || (i > 0 && l <= self.capacity_levels[i - 1]) {
                return Err(Error::InvalidInstance(format!(
                    "capacity_levels must be positive and strictly increasing, got {l} at {i}"
                )));
            }
        }
        for (name, table) in [
            ("penalty", &self.penalty),
            ("demand_nominal", &self.demand_nominal),
            ("demand_low", &self.demand_low),
            ("demand_up", &self.demand_up),
        ] {
            if table.len() != nt || table.iter().any(|row| row.len() != np) {
                return Err(Error::InvalidInstance(format!(
                    "{name} must be a {nt} x {np} table"
                )));
            }
            if table.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "{name} must be finite and nonnegative"
                )));
            }
        }
        for t in 0..nt {
            for p in 0..np {
                let (lo, nom, up) = (
                    self.demand_low[t][p],
                    self.demand_nominal[t][p],
                    self.demand_up[t][p],
                );
                if lo > nom || nom > up {
                    return Err(Error::InvalidInstance(format!(
                        "day {} priority {}: demand bounds ({lo}, {nom}, {up}) are not ordered",
                        t + 1,
                        p + 1
                    )));
                }
            }
        }
        if self.budgets.iter().any(|&b| !b.is_finite() || b < 0.0) {
            return Err(Error::InvalidInstance(
                "budgets must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Number of uncertain demand coordinates `T * P`.
    pub fn num_coords(&self) -> usize {
        self.days * self.priorities
    }

    /// Flat coordinate of day `t`, priority `p`.
    pub fn coord(&self, t: usize, p: usize) -> usize {
        t * self.priorities + p
    }

    /// Budget partition: one group per priority across all days.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        (0..self.priorities)
            .map(|p| (0..self.days).map(|t| self.coord(t, p)).collect())
            .collect()
    }

    fn flatten(&self, table: &[Vec<f64>]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_coords());
        for row in table {
            out.extend_from_slice(row);
        }
        out
    }

    /// Shadow resource instance over the flattened demand coordinates:
    /// penalties as deprivation costs, no allocation rows. It drives the
    /// shared pricing helpers and stage-1 reports.
    pub fn shadow_instance(&self) -> NominalInstance {
        NominalInstance {
            a: vec![],
            b: vec![],
            c1: vec![],
            c2: self.flatten(&self.penalty),
            g: vec![],
            y_nominal: self.flatten(&self.demand_nominal),
            y_low: self.flatten(&self.demand_low),
            y_up: self.flatten(&self.demand_up),
            budget_groups: Some(self.partition()),
            allow_non_centered: true,
            ellipsoid: None,
        }
    }
}

/// Column layout of a built admission model.
#[derive(Debug, Clone)]
pub struct PatientLayout {
    pub x: Range<usize>,
    pub c: Range<usize>,
    pub q: Range<usize>,
    /// Conventional deviation controls `z_{t,p}`.
    pub z: Option<Range<usize>>,
    /// Effective deviation controls `rho_{t,p}`.
    pub rho: Option<Range<usize>>,
    pub xi: Option<Range<usize>>,
    pub mu: Option<Range<usize>>,
    pub lambda: Option<Range<usize>>,
    priorities: usize,
    days: usize,
    segments: usize,
}

impl PatientLayout {
    /// Column of `x_{t,n,p}`: service on day `t` (0-based) of arrivals that
    /// waited `n` days, priority `p`.
    pub fn x_index(&self, t: usize, n: usize, p: usize) -> usize {
        debug_assert!(t < self.days && n <= t && p < self.priorities);
        self.x.start + (t * (t + 1) / 2 + n) * self.priorities + p
    }

    /// Column of capacity segment `i` on day `t`.
    pub fn c_index(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.segments && t < self.days);
        self.c.start + t * self.segments + i
    }

    /// Column of the segment gate `q_{i,t}`.
    pub fn q_index(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.segments && t < self.days);
        self.q.start + t * self.segments + i
    }
}

/// A built admission model: the program, its layout, and the pricing
/// context shared across variants.
#[derive(Debug, Clone)]
pub struct PatientModel {
    pub program: MixedProgram,
    pub var_names: Vec<String>,
    pub layout: PatientLayout,
    pub variant: ModelVariant,
    /// Constant added to the raw objective in reports.
    pub constant: f64,
    /// Penalty mass outside the admissible interval (effective variant).
    pub gap: f64,
    /// Shadow resource instance over the flattened demand coordinates.
    pub shadow: NominalInstance,
    /// Active deviation budget (instance budgets or uniform override).
    pub budget: BudgetSpec,
    /// Stage-1 products, present for the effective variant.
    pub stage1: Option<AppStage1>,
}

/// Builds the admission model for a variant.
///
/// Columns: `x (P T(T+1)/2) | c (K T) | q (K T)`, then `z (T P) | xi (P) |
/// mu (T P)` for the conventional variant or `rho (T P) | xi (P) | mu (T P)
/// | lambda (T P)` for the effective one. Rows: capacity `T`, segment links
/// `2 T max(K-2, 0)`, demand `P T(T+1)/2`, then per-priority budgets
/// (effective groups without deviation weight are skipped) and one pricing
/// row per demand coordinate.
pub fn build_patient(
    inst: &PatientInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<PatientModel> {
    inst.validate()?;
    let stage1 = match variant {
        ModelVariant::Effective => Some(patient_stage1(inst, gamma_override, opts)?),
        ModelVariant::Nominal | ModelVariant::Conventional => None,
        other => {
            return Err(Error::InvalidModel(format!(
                "variant {} is not defined for the admission model",
                other.as_str()
            )))
        }
    };
    build_patient_with(inst, variant, gamma_override, stage1)
}

fn build_patient_with(
    inst: &PatientInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    stage1: Option<AppStage1>,
) -> Result<PatientModel> {
    let (np, nt, nk) = (inst.priorities, inst.days, inst.segments);
    let m = inst.num_coords();
    let nx = np * nt * (nt + 1) / 2;
    let nc = nk * nt;

    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &inst.budgets, gamma_override);
    budget.validate(m)?;

    let robust = !matches!(variant, ModelVariant::Nominal);
    let effective = matches!(variant, ModelVariant::Effective);
    let x0 = 0;
    let c0 = nx;
    let q0 = c0 + nc;
    let dev0 = q0 + nc;
    let xi0 = dev0 + if robust { m } else { 0 };
    let mu0 = xi0 + if robust { np } else { 0 };
    let la0 = mu0 + if robust { m } else { 0 };
    let nv = la0 + if effective { m } else { 0 };

    // Per-coordinate cap baseline and deviation width.
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
    let mut layout = PatientLayout {
        x: x0..c0,
        c: c0..q0,
        q: q0..dev0,
        z: None,
        rho: None,
        xi: None,
        mu: None,
        lambda: None,
        priorities: np,
        days: nt,
        segments: nk,
    };
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                // Unserved arrivals of day t - n are refunded when served.
                obj[layout.x_index(t, n, p)] = -inst.penalty[t - n][p];
            }
        }
        for i in 0..nk {
            obj[layout.c_index(i, t)] = inst.theta[i];
        }
    }
    if robust {
        layout.xi = Some(xi0..xi0 + np);
        layout.mu = Some(mu0..mu0 + m);
        for j in 0..m {
            obj[mu0 + j] = 1.0;
        }
    }
    if effective {
        let s1 = stage1.as_ref().expect("stage-1 products");
        layout.rho = Some(dev0..dev0 + m);
        layout.lambda = Some(la0..la0 + m);
        for (p, &ge) in s1.params.gamma_effective.iter().enumerate() {
            obj[xi0 + p] = ge;
        }
        for j in 0..m {
            obj[la0 + j] = -s1.params.v[j];
        }
    } else if robust {
        layout.z = Some(dev0..dev0 + m);
        for (p, group) in budget.groups.iter().enumerate() {
            obj[xi0 + p] = group.gamma;
        }
    }

    let mut lp = LinearProgram::new(nv, obj);
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                lp.bounds[layout.x_index(t, n, p)] =
                    VarBounds::interval(0.0, inst.demand_up[t][p]);
            }
        }
        for i in 0..nk {
            lp.bounds[layout.c_index(i, t)] =
                VarBounds::interval(0.0, inst.capacity_levels[i]);
            lp.bounds[layout.q_index(i, t)] = VarBounds::interval(0.0, 1.0);
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
    }

    // Capacity per day: served work within bought segments.
    for t in 0..nt {
        let mut coeffs = Vec::new();
        for n in 0..=t {
            for p in 0..np {
                coeffs.push((layout.x_index(t, n, p), inst.service_time[p]));
            }
        }
        for i in 0..nk {
            coeffs.push((layout.c_index(i, t), -1.0));
        }
        coeffs.sort_by_key(|&(j, _)| j);
        lp.add_constraint(coeffs, Relation::Le, 0.0);
    }
    // Interior segment links: a segment opens only against its gate, and the
    // gate chain is monotone through the predecessor segment.
    for t in 0..nt {
        for i in 1..nk.saturating_sub(1) {
            let widthc = inst.capacity_levels[i] - inst.capacity_levels[i - 1];
            lp.add_constraint(
                vec![(layout.c_index(i, t), -1.0), (layout.q_index(i, t), widthc)],
                Relation::Le,
                0.0,
            );
            lp.add_constraint(
                vec![(layout.c_index(i, t), 1.0), (layout.q_index(i - 1, t), -widthc)],
                Relation::Le,
                0.0,
            );
        }
    }
    // Demand rows: diagonal cumulative service against the day's cap.
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                let j = inst.coord(t, p);
                let mut coeffs: Vec<(usize, f64)> = (0..=n)
                    .map(|i| (layout.x_index(t - i, n - i, p), 1.0))
                    .collect();
                if robust && width[j] != 0.0 {
                    coeffs.push((dev0 + j, -width[j]));
                }
                coeffs.sort_by_key(|&(jj, _)| jj);
                lp.add_constraint(coeffs, Relation::Le, base[j]);
            }
        }
    }
    // Budget rows per priority.
    if robust {
        for (p, group) in budget.groups.iter().enumerate() {
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
                    lp.add_constraint(coeffs, Relation::Le, s1.params.gamma_effective[p]);
                }
            } else {
                let coeffs: Vec<(usize, f64)> =
                    idx.iter().map(|&j| (dev0 + j, 1.0)).collect();
                lp.add_constraint(coeffs, Relation::Le, group.gamma);
            }
        }
    }
    // Pricing rows: dual feasibility of the inner maximum.
    if robust {
        let owner = budget.validate(m)?;
        for j in 0..m {
            let w = shadow.c2[j] * width[j];
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
            lp.add_constraint(coeffs, Relation::Ge, w);
        }
    }

    let mut names = Vec::with_capacity(nv);
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                names.push(format!("x_t{}_n{}_p{}", t + 1, n + 1, p + 1));
            }
        }
    }
    for t in 0..nt {
        for i in 0..nk {
            names.push(format!("c{}_t{}", i + 1, t + 1));
        }
    }
    for t in 0..nt {
        for i in 0..nk {
            names.push(format!("q{}_t{}", i + 1, t + 1));
        }
    }
    if robust {
        let dev = if effective { "rho" } else { "z" };
        for t in 0..nt {
            for p in 0..np {
                names.push(format!("{dev}_t{}_p{}", t + 1, p + 1));
            }
        }
        for p in 0..np {
            names.push(format!("xi_p{}", p + 1));
        }
        for t in 0..nt {
            for p in 0..np {
                names.push(format!("mu_t{}_p{}", t + 1, p + 1));
            }
        }
        if effective {
            for t in 0..nt {
                for p in 0..np {
                    names.push(format!("la_t{}_p{}", t + 1, p + 1));
                }
            }
        }
    }
    debug_assert_eq!(names.len(), nv);
    lp.var_names = Some(names.clone());

    let integral: Vec<usize> = layout.x.clone().chain(layout.q.clone()).collect();
    let binary: Vec<usize> = layout.q.clone().collect();
    let program = MixedProgram::new(lp, integral, binary);
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

    Ok(PatientModel {
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

impl PatientModel {
    /// Solves the program and summarizes it in cross-variant coordinates:
    /// `y` is served demand per arrival day, the comparable cost reprices
    /// the plan on the original interval at the active budget.
    pub fn solve(&self, opts: &SolveOptions) -> Result<AppSolution> {
        let sol = solve_milp(&self.program, opts).map_err(|e| e.in_stage("admission model"))?;
        super::expect_optimal(&sol, "admission model", self.variant)?;
        let raw = sol.x;
        let served = self.served(&raw);
        let m = self.shadow.num_resources();
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

        let allocation_cost: f64 = (0..self.layout.segments)
            .flat_map(|i| (0..self.layout.days).map(move |t| (i, t)))
            .map(|(i, t)| self.program.base.objective[self.layout.c_index(i, t)]
                * raw[self.layout.c_index(i, t)])
            .sum();
        let comparable_cost = allocation_cost
            + self
                .shadow
                .c2
                .iter()
                .zip(&self.shadow.y_nominal)
                .zip(&served)
                .map(|((&c, &nom), &s)| c * (nom - s))
                .sum::<f64>()
            + wc_original;

        let solution = RobustSolution {
            variant: self.variant,
            x: raw[self.layout.x.clone()].to_vec(),
            y: served,
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

    /// Served demand per arrival day and priority: every service of the
    /// cohort that arrived on that day, at any later day.
    fn served(&self, raw: &[f64]) -> Vec<f64> {
        let (np, nt) = (self.layout.priorities, self.layout.days);
        let mut out = vec![0.0; np * nt];
        for t in 0..nt {
            for p in 0..np {
                out[t * np + p] = (t..nt)
                    .map(|tt| raw[self.layout.x_index(tt, tt - t, p)])
                    .sum();
            }
        }
        out
    }
}

/// Builds and solves the admission model, returning the solution summary.
pub fn solve_patient(
    inst: &PatientInstance,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<RobustSolution> {
    let model = build_patient(inst, variant, gamma_override, opts)?;
    Ok(model.solve(opts)?.solution)
}

/// Stage 1 for the admission model: the largest demand profile the capacity
/// plan can fully absorb.
///
/// Paid segments are fixed at their deterministic optimum; free segments
/// stay fully available. A single service plan must respect the literal
/// cumulative demand rows at the profile, fit within daily capacity, and
/// cover every arrival by the horizon. The demand floor is admissible as
/// given: serving less than the ceiling is always feasible because unserved
/// arrivals are priced, not forbidden. Ties between profiles of equal mass
/// break toward earlier days.
pub fn patient_stage1(
    inst: &PatientInstance,
    gamma_override: Option<f64>,
    opts: &SolveOptions,
) -> Result<AppStage1> {
    inst.validate()?;
    let shadow = inst.shadow_instance();
    let budget = budget_spec(&inst.partition(), &inst.budgets, gamma_override);
    let (np, nt, nk) = (inst.priorities, inst.days, inst.segments);
    let m = inst.num_coords();
    let nx = np * nt * (nt + 1) / 2;

    let det = build_patient_with(inst, ModelVariant::Nominal, None, None)?;
    let det_sol =
        solve_milp(&det.program, opts).map_err(|e| e.in_stage("admission stage-1 baseline"))?;
    super::expect_optimal(&det_sol, "admission stage-1 baseline", ModelVariant::Nominal)?;
    let caps: Vec<f64> = (0..nt)
        .map(|t| {
            (0..nk)
                .map(|i| {
                    if inst.theta[i] == 0.0 {
                        inst.capacity_levels[i]
                    } else {
                        det_sol.x[det.layout.c_index(i, t)]
                    }
                })
                .sum()
        })
        .collect();

    // Columns: x (continuous relaxation of the service grid) | s_up (m).
    let s0 = nx;
    let mut obj = vec![0.0; s0 + m];
    for t in 0..nt {
        for p in 0..np {
            // Maximize total admissible mass; the tiny weight front-loads.
            obj[s0 + inst.coord(t, p)] = -(1.0 + 1e-6 * (nt - 1 - t) as f64 / nt as f64);
        }
    }
    let mut lp = LinearProgram::new(s0 + m, obj);
    let x_index = |t: usize, n: usize, p: usize| (t * (t + 1) / 2 + n) * np + p;
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                lp.bounds[x_index(t, n, p)] = VarBounds::interval(0.0, inst.demand_up[t][p]);
            }
        }
        for p in 0..np {
            let j = inst.coord(t, p);
            lp.bounds[s0 + j] = VarBounds::interval(inst.demand_low[t][p], inst.demand_up[t][p]);
        }
    }
    for t in 0..nt {
        let mut coeffs = Vec::new();
        for n in 0..=t {
            for p in 0..np {
                coeffs.push((x_index(t, n, p), inst.service_time[p]));
            }
        }
        coeffs.sort_by_key(|&(j, _)| j);
        lp.add_constraint(coeffs, Relation::Le, caps[t]);
    }
    for t in 0..nt {
        for n in 0..=t {
            for p in 0..np {
                let mut coeffs: Vec<(usize, f64)> = (0..=n)
                    .map(|i| (x_index(t - i, n - i, p), 1.0))
                    .collect();
                coeffs.push((s0 + inst.coord(t, p), -1.0));
                coeffs.sort_by_key(|&(j, _)| j);
                lp.add_constraint(coeffs, Relation::Le, 0.0);
            }
        }
    }
    for t in 0..nt {
        for p in 0..np {
            let mut coeffs: Vec<(usize, f64)> = (t..nt)
                .map(|tt| (x_index(tt, tt - t, p), -1.0))
                .collect();
            coeffs.push((s0 + inst.coord(t, p), 1.0));
            coeffs.sort_by_key(|&(j, _)| j);
            lp.add_constraint(coeffs, Relation::Le, 0.0);
        }
    }
    lp.validate()?;
    let sol = solve_lp(&lp, opts).map_err(|e| e.in_stage("admission stage-1"))?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible(
                "no admissible demand profile: the capacity plan cannot absorb the demand floor"
                    .into(),
            ))
        }
        SolveStatus::Unbounded => {
            return Err(Error::Numerical(
                "admission stage-1 reported an unbounded interval".into(),
            ))
        }
    }
    let s_up = sol.x[s0..s0 + m].to_vec();
    let s_low = shadow.y_low.clone();
    let loss: f64 = shadow
        .y_up
        .iter()
        .zip(&s_up)
        .map(|(&u, &s)| u - s)
        .sum::<f64>();
    AppStage1::assemble(shadow, budget, s_low, s_up, loss)
}

//! Out-of-sample evaluation of robust plans by Monte Carlo sampling.
//!
//! Scenarios draw scaled deviations uniformly from the budgeted set
//!
//! ```text
//! { d in [-1, 1]^m : sum_{j in J_g} |d_j| <= Gamma_g  for every group g }
//! ```
//!
//! by per-group rejection sampling and map them onto the resource box:
//! positive deviations stretch toward `y_up`, negative ones toward `y_low`.
//! Each scenario owns an independent generator keyed on `(seed, index)`, so
//! a run is reproducible and insensitive to evaluation order.
//!
//! A plan fixed before the draw is repriced at the realization: usage
//! beyond the realized availability is bought back at a penalty price,
//! unused availability is charged at the deprivation cost, and the
//! first-stage cost carries over unchanged. The cost regret `delta C` of a
//! plan is the absolute gap to a prescient plan solved with the
//! realization substituted for the nominal point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apps::{budget_spec, solve_sced, ScedInstance};
use crate::effective::solve_effective;
use crate::lp::SolveOptions;
use crate::robust::{
    solve_conventional, solve_full_budget, solve_nominal, BudgetSpec, ModelVariant,
    NominalInstance, RobustSolution,
};
use crate::{Error, Result};

/// Attempt cap for the per-group rejection sampler. Groups whose budget
/// admits less than roughly a `1e-6` fraction of the box are rejected as
/// degenerate instead of spinning forever.
const MAX_ATTEMPTS: u32 = 1_000_000;

/// One sampled realization of the uncertain resources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Realized availability per resource coordinate.
    pub y_actual: Vec<f64>,
    /// Scaled deviations in `[-1, 1]` that produced the realization.
    pub scaled_dev: Vec<f64>,
    /// Index mixed into the seed; equal indices reproduce equal draws.
    pub seed_index: u64,
}

/// Knobs for scenario generation and plan repricing.
#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Number of scenarios to draw.
    pub scenarios: usize,
    /// Base seed; every scenario derives its own stream from it.
    pub seed: u64,
    /// Price per unit of planned usage the realization cannot deliver.
    pub penalty: f64,
    /// Solver options for the plan and the prescient resolves.
    pub solve: SolveOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            scenarios: 100,
            seed: 42,
            penalty: 50.0,
            solve: SolveOptions::default(),
        }
    }
}

/// What the simulator evaluates: a generic resource instance or a
/// dispatch day.
#[derive(Debug, Clone, Copy)]
pub enum SimModel<'a> {
    Generic(&'a NominalInstance),
    Sced(&'a ScedInstance),
}

/// Cost-regret summary for one variant at one budget.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaCReport {
    pub variant: ModelVariant,
    /// Total budget the plan was solved under.
    pub gamma_total: f64,
    /// Per-scenario absolute regret, in scenario order.
    pub deltas: Vec<f64>,
    pub mean: f64,
}

/// SplitMix64 finalizer; decorrelates consecutive scenario indices.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_group(
    rng: &mut ChaCha8Rng,
    indices: &[usize],
    gamma: f64,
    dev: &mut [f64],
) -> Result<()> {
    let n = indices.len();
    if gamma <= 1e-12 || n == 0 {
        return Ok(());
    }
    if gamma >= n as f64 {
        for &j in indices {
            dev[j] = rng.gen_range(-1.0..=1.0);
        }
        return Ok(());
    }
    let mut draw = vec![0.0_f64; n];
    for _ in 0..MAX_ATTEMPTS {
        let mut total = 0.0;
        for d in draw.iter_mut() {
            *d = rng.gen_range(-1.0..=1.0);
            total += d.abs();
        }
        if total <= gamma {
            for (&j, &d) in indices.iter().zip(&draw) {
                dev[j] = d;
            }
            return Ok(());
        }
    }
    Err(Error::Sampling(format!(
        "budget group of size {n} with gamma {gamma} accepted no draw in {MAX_ATTEMPTS} \
         attempts; the budgeted set is too thin to sample"
    )))
}

/// Draws `count` scenarios from the budgeted uncertainty set of `shadow`.
pub fn generate_scenarios(
    shadow: &NominalInstance,
    budget: &BudgetSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<Scenario>> {
    let m = shadow.num_resources();
    budget.validate(m)?;
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, index as u64));
        let mut dev = vec![0.0; m];
        for group in &budget.groups {
            sample_group(&mut rng, &group.indices, group.gamma, &mut dev)?;
        }
        let y_actual: Vec<f64> = (0..m)
            .map(|j| {
                let d = dev[j];
                if d >= 0.0 {
                    shadow.y_nominal[j] + d * (shadow.y_up[j] - shadow.y_nominal[j])
                } else {
                    shadow.y_nominal[j] + d * (shadow.y_nominal[j] - shadow.y_low[j])
                }
            })
            .collect();
        out.push(Scenario {
            y_actual,
            scaled_dev: dev,
            seed_index: index as u64,
        });
    }
    Ok(out)
}

impl SimModel<'_> {
    /// Resource-coordinate view of the model.
    pub fn shadow(&self) -> NominalInstance {
        match self {
            SimModel::Generic(inst) => (*inst).clone(),
            SimModel::Sced(inst) => inst.shadow_instance(),
        }
    }

    /// Active budget for a run. Generic instances carry no budget of their
    /// own, so an explicit gamma is required for them.
    pub fn budget(&self, gamma_override: Option<f64>) -> Result<BudgetSpec> {
        match self {
            SimModel::Generic(inst) => match gamma_override {
                Some(gamma) => Ok(BudgetSpec::for_instance(inst, gamma)),
                None => Err(Error::InvalidBudget(
                    "a gamma value is required to simulate a generic instance".into(),
                )),
            },
            SimModel::Sced(inst) => {
                Ok(budget_spec(&inst.partition(), &inst.budgets, gamma_override))
            }
        }
    }

    fn plan(
        &self,
        variant: ModelVariant,
        gamma_override: Option<f64>,
        opts: &SolveOptions,
    ) -> Result<RobustSolution> {
        match self {
            SimModel::Generic(inst) => {
                let budget = self.budget(gamma_override)?;
                match variant {
                    ModelVariant::Nominal => solve_nominal(inst, opts),
                    ModelVariant::Conventional => solve_conventional(inst, &budget, opts),
                    ModelVariant::FullBudget => solve_full_budget(inst, opts),
                    ModelVariant::Effective => solve_effective(inst, &budget, opts),
                    other => Err(Error::InvalidModel(format!(
                        "variant {} is not supported in simulation",
                        other.as_str()
                    ))),
                }
            }
            SimModel::Sced(inst) => solve_sced(inst, variant, gamma_override, opts),
        }
    }

    /// First-stage cost of a solved plan.
    fn first_stage_cost(&self, sol: &RobustSolution) -> f64 {
        match self {
            SimModel::Generic(inst) => {
                inst.c1.iter().zip(&sol.x).map(|(c, x)| c * x).sum()
            }
            SimModel::Sced(inst) => {
                let ng = inst.generators.len();
                sol.x
                    .iter()
                    .enumerate()
                    .map(|(i, p)| inst.generators[i % ng].cost * p)
                    .sum()
            }
        }
    }

    /// Cost of the cheapest plan solved with the realization substituted
    /// for the nominal point.
    pub fn prescient_cost(&self, y_actual: &[f64], opts: &SolveOptions) -> Result<f64> {
        match self {
            SimModel::Generic(inst) => {
                let mut known = (*inst).clone();
                known.y_nominal = y_actual.to_vec();
                known.y_low = y_actual.to_vec();
                known.y_up = y_actual.to_vec();
                known.allow_non_centered = true;
                Ok(solve_nominal(&known, opts)?.objective)
            }
            SimModel::Sced(inst) => {
                let mut known = (*inst).clone();
                let kf = known.farms.len();
                for (k, farm) in known.farms.iter_mut().enumerate() {
                    for t in 0..known.periods {
                        let v = y_actual[t * kf + k];
                        farm.nominal[t] = v;
                        farm.low[t] = v;
                        farm.up[t] = v;
                    }
                }
                Ok(solve_sced(&known, ModelVariant::Nominal, None, opts)?.objective)
            }
        }
    }

    /// Reprices a fixed plan at a realization: first-stage cost, penalty
    /// on usage the realization cannot deliver, deprivation cost on
    /// availability the plan leaves unused.
    pub fn realized_cost(
        &self,
        sol: &RobustSolution,
        y_actual: &[f64],
        penalty: f64,
    ) -> f64 {
        let shadow = self.shadow();
        let mut cost = self.first_stage_cost(sol);
        for j in 0..y_actual.len() {
            let planned = sol.y[j];
            let actual = y_actual[j];
            cost += penalty * (planned - actual).max(0.0);
            cost += shadow.c2[j] * (actual - planned.min(actual));
        }
        cost
    }
}

/// Reports the cost regret of several variants over one shared scenario
/// draw at one budget. The prescient resolve per scenario is shared, so
/// the reports are directly comparable and each scenario is solved with
/// hindsight exactly once.
pub fn delta_c_multi(
    model: &SimModel,
    variants: &[ModelVariant],
    gamma_override: Option<f64>,
    opts: &SimOptions,
) -> Result<Vec<DeltaCReport>> {
    if opts.scenarios == 0 {
        return Err(Error::Sampling("scenario count must be positive".into()));
    }
    let shadow = model.shadow();
    let budget = model.budget(gamma_override)?;
    let scenarios = generate_scenarios(&shadow, &budget, opts.scenarios, opts.seed)?;
    let prescient: Vec<f64> = scenarios
        .iter()
        .map(|s| model.prescient_cost(&s.y_actual, &opts.solve))
        .collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(variants.len());
    for &variant in variants {
        let plan = model.plan(variant, gamma_override, &opts.solve)?;
        let deltas: Vec<f64> = scenarios
            .iter()
            .zip(&prescient)
            .map(|(s, &p)| {
                (model.realized_cost(&plan, &s.y_actual, opts.penalty) - p).abs()
            })
            .collect();
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        reports.push(DeltaCReport {
            variant,
            gamma_total: budget.total_gamma(),
            deltas,
            mean,
        });
    }
    Ok(reports)
}

/// Single-variant convenience wrapper around [`delta_c_multi`].
pub fn delta_c(
    model: &SimModel,
    variant: ModelVariant,
    gamma_override: Option<f64>,
    opts: &SimOptions,
) -> Result<DeltaCReport> {
    Ok(delta_c_multi(model, &[variant], gamma_override, opts)?
        .pop()
        .expect("one report per variant"))
}

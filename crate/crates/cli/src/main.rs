//! Command-line front end for the budgeted robust optimization library.
//!
//! Subcommands:
//!
//! * `solve`: solve one or more model variants and write the solution
//!   columns as `variable,value` CSV files.
//! * `stage1`: compute the admissible interval and write the coordinate
//!   report (`j,y_low,y_nom,y_up,s_low,s_mid,s_up,case,h,e,v`).
//! * `sweep`: solve a grid of budgets per variant and tabulate
//!   `gamma,approach,objective,utilization,gamma_effective`.
//! * `simulate`: draw scenarios and report the out-of-sample cost regret
//!   `scenario,approach,delta_c` per variant.
//! * `classify`: report each coordinate's admissible-interval case.
//! * `export-lp`: write a variant's LP relaxation in MPS format.
//!
//! Instances are JSON files or bundled names (`effbudget solve --instance
//! sced_toy --kind sced ...`). Every command writes its reports plus a
//! `summary.json` with SHA-256 digests into `--out`. Table fills run on a
//! rayon pool sized by `--jobs` and are reassembled in a fixed order, so
//! reports are byte-identical for any thread count. Logging is controlled
//! by the `EFFBUDGET_LOG` environment variable.
//!
//! Exit codes: 0 on success, 1 for invalid input (instance, model,
//! budget, or I/O), 2 for solver and sampling failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use effbudget::apps::{
    build_inventory, build_patient, build_sced, inventory_stage1, load_instance, patient_stage1,
    sced_stage1, solve_inventory, solve_patient, solve_sced, AppInstance, AppKind,
};
use effbudget::effective::{
    build_admissible, build_stage2, solve_admissible, solve_effective, stage1_admissible,
    stage1_report_csv,
};
use effbudget::lp::to_mps;
use effbudget::robust::{solve_conventional, solve_full_budget, solve_nominal};
use effbudget::sim::{delta_c_multi, SimModel, SimOptions};
use effbudget::{
    BudgetSpec, Case, EffectiveParams, Error, LinearProgram, ModelVariant, NominalInstance,
    RobustSolution, SolveOptions,
};

#[derive(Parser)]
#[command(
    name = "effbudget",
    version,
    about = "Budgeted robust optimization: solve, analyze, and simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve model variants and write their solution columns.
    Solve(SolveArgs),
    /// Compute the stage-1 admissible interval report.
    Stage1(Stage1Args),
    /// Solve a budget grid per variant and tabulate the results.
    Sweep(SweepArgs),
    /// Draw scenarios and report out-of-sample cost regret per variant.
    Simulate(SimulateArgs),
    /// Report each uncertain coordinate's admissible-interval case.
    Classify(ClassifyArgs),
    /// Export a variant's LP relaxation in MPS format.
    ExportLp(ExportLpArgs),
}

#[derive(Args)]
struct Common {
    /// Instance file path or bundled instance name.
    #[arg(long)]
    instance: String,
    /// Instance family: generic, patient, inventory, or sced.
    #[arg(long, default_value = "generic")]
    kind: String,
    /// Output directory for reports; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Feasibility tolerance handed to the solver.
    #[arg(long, default_value_t = 1e-7)]
    tol_feas: f64,
    /// Objective tolerance handed to the solver.
    #[arg(long, default_value_t = 1e-6)]
    tol_obj: f64,
    /// Worker threads for table fills; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated variants: nominal, conventional, effective,
    /// full-budget, admissible.
    #[arg(long = "variant", visible_alias = "variants", default_value = "effective")]
    variant: String,
    /// Uniform budget override; app instances fall back to their own
    /// budgets, generic robust variants require a value.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct Stage1Args {
    #[command(flatten)]
    common: Common,
    /// Budget used for the rescaled-budget column of the report.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated variants to sweep.
    #[arg(
        long = "variant",
        visible_alias = "variants",
        default_value = "conventional,effective"
    )]
    variant: String,
    /// Budget grid as start:stop:step (inclusive) or a single value.
    #[arg(long)]
    gamma: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated variants to evaluate on the shared scenario draw.
    #[arg(
        long = "variant",
        visible_alias = "variants",
        default_value = "nominal,conventional,effective"
    )]
    variant: String,
    /// Uniform budget override; see `solve`.
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of scenarios to draw.
    #[arg(long, default_value_t = 100)]
    scenarios: usize,
    /// Base seed for the scenario streams.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Price per unit of planned usage the realization cannot deliver.
    #[arg(long, default_value_t = 50.0)]
    penalty: f64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExportLpArgs {
    #[command(flatten)]
    common: Common,
    /// Single variant to export.
    #[arg(long, default_value = "effective")]
    variant: String,
    /// Uniform budget override; see `solve`.
    #[arg(long)]
    gamma: Option<f64>,
}

fn main() {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter("EFFBUDGET_LOG")
            .default_filter_or("warn"),
    )
    .format_timestamp(None)
    .init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        // Library errors already render their chain in Display; only
        // context-wrapped errors need the alternate chained form.
        if err.downcast_ref::<Error>().is_some() {
            eprintln!("error: {err}");
        } else {
            eprintln!("error: {err:#}");
        }
        std::process::exit(exit_code(&err));
    }
}

/// Invalid input exits 1; solver and sampling failures exit 2.
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidModel(_)
            | Error::InvalidInstance(_)
            | Error::InvalidBudget(_)
            | Error::Io(_),
        ) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Stage1(args) => cmd_stage1(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::ExportLp(args) => cmd_export_lp(args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing.
// ---------------------------------------------------------------------------

fn parse_variant(s: &str) -> Result<ModelVariant, Error> {
    match s.trim() {
        "nominal" | "deterministic" | "det" => Ok(ModelVariant::Nominal),
        "conventional" | "conv" => Ok(ModelVariant::Conventional),
        "effective" | "eff" => Ok(ModelVariant::Effective),
        "full" | "full-budget" | "full_budget" => Ok(ModelVariant::FullBudget),
        "admissible" => Ok(ModelVariant::Admissible),
        other => Err(Error::InvalidModel(format!(
            "unknown variant {other:?}, expected nominal, conventional, effective, \
             full-budget, or admissible"
        ))),
    }
}

fn parse_variants(s: &str) -> Result<Vec<ModelVariant>, Error> {
    let variants: Vec<ModelVariant> = s
        .split(',')
        .filter(|part| !part.trim().is_empty())
        .map(parse_variant)
        .collect::<Result<_, _>>()?;
    if variants.is_empty() {
        return Err(Error::InvalidModel("no variant given".into()));
    }
    Ok(variants)
}

/// Parses `start:stop:step` (inclusive grid) or a single number.
fn parse_gamma_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || {
        Error::InvalidBudget(format!(
            "gamma must be a number or start:stop:step, got {s:?}"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad())?;
            Ok(vec![v])
        }
        [start, stop, step] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            let step: f64 = step.trim().parse().map_err(|_| bad())?;
            if !step.is_finite() || step <= 0.0 || stop < start - 1e-12 {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

fn load(common: &Common) -> anyhow::Result<AppInstance> {
    let kind = AppKind::from_str(&common.kind)?;
    let inst = load_instance(&common.instance, kind)?;
    log::info!("loaded {} instance {}", kind.as_str(), common.instance);
    Ok(inst)
}

fn solve_options(common: &Common) -> SolveOptions {
    SolveOptions {
        tol_feas: common.tol_feas,
        tol_obj: common.tol_obj,
        ..SolveOptions::default()
    }
}

fn generic_budget(inst: &NominalInstance, gamma: Option<f64>) -> Result<BudgetSpec, Error> {
    match gamma {
        Some(v) => Ok(BudgetSpec::for_instance(inst, v)),
        None => Err(Error::InvalidBudget(
            "--gamma is required for robust variants of a generic instance".into(),
        )),
    }
}

fn solve_any(
    inst: &AppInstance,
    variant: ModelVariant,
    gamma: Option<f64>,
    opts: &SolveOptions,
) -> Result<RobustSolution, Error> {
    match inst {
        AppInstance::Generic(g) => match variant {
            ModelVariant::Nominal => solve_nominal(g, opts),
            ModelVariant::Conventional => solve_conventional(g, &generic_budget(g, gamma)?, opts),
            ModelVariant::FullBudget => solve_full_budget(g, opts),
            ModelVariant::Effective => solve_effective(g, &generic_budget(g, gamma)?, opts),
            ModelVariant::Admissible => solve_admissible(g, opts),
        },
        AppInstance::Patient(p) => solve_patient(p, variant, gamma, opts),
        AppInstance::Inventory(v) => solve_inventory(v, variant, gamma, opts),
        AppInstance::Sced(s) => solve_sced(s, variant, gamma, opts),
    }
}

/// Total nominal resource mass, the denominator of the utilization column.
fn nominal_total(inst: &AppInstance) -> f64 {
    match inst {
        AppInstance::Generic(g) => g.y_nominal.iter().sum(),
        AppInstance::Patient(p) => p.demand_nominal.iter().flatten().sum(),
        AppInstance::Inventory(v) => v.demand_nominal.iter().sum(),
        AppInstance::Sced(s) => s
            .farms
            .iter()
            .flat_map(|farm| farm.nominal.iter())
            .sum(),
    }
}

fn utilization(inst: &AppInstance, sol: &RobustSolution) -> f64 {
    let total = nominal_total(inst);
    if total > 0.0 {
        sol.y.iter().sum::<f64>() / total
    } else {
        0.0
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

struct Report {
    name: String,
    sha256: String,
    rows: usize,
}

fn write_report(out: &Path, name: &str, contents: &str) -> anyhow::Result<Report> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(Report {
        name: name.to_string(),
        sha256: format!("{:x}", Sha256::digest(contents.as_bytes())),
        rows: contents.lines().count().saturating_sub(1),
    })
}

fn write_summary(
    out: &Path,
    command: &str,
    common: &Common,
    reports: &[Report],
    details: serde_json::Value,
) -> anyhow::Result<()> {
    let files: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| json!({ "name": r.name, "sha256": r.sha256, "rows": r.rows }))
        .collect();
    let summary = json!({
        "command": command,
        "instance": common.instance,
        "kind": common.kind,
        "files": files,
        "details": details,
    });
    let path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).context("serializing summary")?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Formats a float the way all reports do: shortest round-trip form.
fn num(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// Solution columns with their names, for the `variable,value` report.
fn solve_columns(
    inst: &AppInstance,
    variant: ModelVariant,
    gamma: Option<f64>,
    opts: &SolveOptions,
) -> Result<(RobustSolution, Vec<String>, Vec<f64>), Error> {
    match inst {
        AppInstance::Generic(g) => {
            let sol = solve_any(inst, variant, gamma, opts)?;
            let mut names = Vec::with_capacity(sol.x.len() + sol.y.len());
            let mut values = Vec::with_capacity(names.capacity());
            for (i, &v) in sol.x.iter().enumerate() {
                names.push(format!("x{}", i + 1));
                values.push(v);
            }
            for (j, &v) in sol.y.iter().enumerate() {
                names.push(format!("y{}", j + 1));
                values.push(v);
            }
            debug_assert_eq!(g.num_allocations(), sol.x.len());
            Ok((sol, names, values))
        }
        AppInstance::Patient(p) => {
            let model = build_patient(p, variant, gamma, opts)?;
            let solved = model.solve(opts)?;
            Ok((solved.solution, model.var_names.clone(), solved.raw))
        }
        AppInstance::Inventory(v) => {
            let model = build_inventory(v, variant, gamma, opts)?;
            let solved = model.solve(opts)?;
            Ok((solved.solution, model.var_names.clone(), solved.raw))
        }
        AppInstance::Sced(s) => {
            let model = build_sced(s, variant, gamma, opts)?;
            let solved = model.solve(opts)?;
            Ok((solved.solution, model.var_names.clone(), solved.raw))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let variants = parse_variants(&args.variant)?;
    let opts = solve_options(common);
    let mut reports = Vec::new();
    let mut details = Vec::new();
    for &variant in &variants {
        let (sol, names, values) = solve_columns(&inst, variant, args.gamma, &opts)?;
        let mut csv = String::from("variable,value\n");
        for (name, value) in names.iter().zip(&values) {
            csv.push_str(&format!("{name},{}\n", num(*value)));
        }
        let file = format!("solution_{}.csv", variant.as_str());
        reports.push(write_report(&common.out, &file, &csv)?);
        println!(
            "{}: objective {:.6}, comparable {:.6}, worst case {:.6}",
            variant.as_str(),
            sol.objective,
            sol.comparable_cost,
            sol.worst_case_term
        );
        details.push(json!({
            "variant": variant.as_str(),
            "objective": sol.objective,
            "comparable_cost": sol.comparable_cost,
            "worst_case_term": sol.worst_case_term,
            "gamma_total": sol.gamma_total,
            "gamma_effective_total": sol.gamma_effective.as_ref().map(|g| g.iter().sum::<f64>()),
            "utilization": utilization(&inst, &sol),
            "iterations": sol.iterations,
        }));
    }
    write_summary(
        &common.out,
        "solve",
        common,
        &reports,
        json!({ "gamma": args.gamma, "variants": details }),
    )
}

// ---------------------------------------------------------------------------
// stage1 and classify
// ---------------------------------------------------------------------------

/// Stage-1 report and interval facts for any instance kind.
fn stage1_report(
    inst: &AppInstance,
    gamma: Option<f64>,
    opts: &SolveOptions,
) -> Result<(String, Vec<Case>, f64, f64), Error> {
    match inst {
        AppInstance::Generic(g) => {
            let budget = generic_budget(g, gamma.or(Some(1.0)))?;
            let interval = stage1_admissible(g, opts)?;
            let params = EffectiveParams::compute(g, &interval, &budget)?;
            Ok((
                stage1_report_csv(g, &interval, &params),
                interval.cases.clone(),
                interval.stage1_objective,
                params.gamma_effective_total(),
            ))
        }
        AppInstance::Patient(p) => {
            let s1 = patient_stage1(p, gamma, opts)?;
            Ok((
                s1.report_csv(),
                s1.interval.cases.clone(),
                s1.interval.stage1_objective,
                s1.params.gamma_effective_total(),
            ))
        }
        AppInstance::Inventory(v) => {
            let s1 = inventory_stage1(v, gamma, opts)?;
            Ok((
                s1.report_csv(),
                s1.interval.cases.clone(),
                s1.interval.stage1_objective,
                s1.params.gamma_effective_total(),
            ))
        }
        AppInstance::Sced(s) => {
            let s1 = sced_stage1(s, gamma, opts)?;
            Ok((
                s1.report_csv(),
                s1.interval.cases.clone(),
                s1.interval.stage1_objective,
                s1.params.gamma_effective_total(),
            ))
        }
    }
}

fn case_counts(cases: &[Case]) -> serde_json::Value {
    let mut counts = [0usize; 4];
    for case in cases {
        let slot = match case {
            Case::Full => 0,
            Case::UpperTruncated => 1,
            Case::BelowNominal => 2,
            Case::Collapsed => 3,
        };
        counts[slot] += 1;
    }
    json!({ "a": counts[0], "b": counts[1], "c": counts[2], "d": counts[3] })
}

fn cmd_stage1(args: Stage1Args) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let opts = solve_options(common);
    let (csv, cases, loss, gamma_eff) = stage1_report(&inst, args.gamma, &opts)?;
    let report = write_report(&common.out, "stage1.csv", &csv)?;
    println!(
        "stage 1: {} coordinates, interval loss {:.6}, effective budget {:.6}",
        cases.len(),
        loss,
        gamma_eff
    );
    write_summary(
        &common.out,
        "stage1",
        common,
        &[report],
        json!({
            "gamma": args.gamma,
            "stage1_objective": loss,
            "gamma_effective_total": gamma_eff,
            "cases": case_counts(&cases),
        }),
    )
}

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let opts = solve_options(common);
    let cases = match &inst {
        AppInstance::Generic(g) => stage1_admissible(g, &opts)?.cases,
        AppInstance::Patient(p) => patient_stage1(p, None, &opts)?.interval.cases,
        AppInstance::Inventory(v) => inventory_stage1(v, None, &opts)?.interval.cases,
        AppInstance::Sced(s) => sced_stage1(s, None, &opts)?.interval.cases,
    };
    let mut csv = String::from("j,case\n");
    for (j, case) in cases.iter().enumerate() {
        csv.push_str(&format!("{j},{}\n", case.letter()));
    }
    let report = write_report(&common.out, "classify.csv", &csv)?;
    let counts = case_counts(&cases);
    println!("cases: {counts}");
    write_summary(
        &common.out,
        "classify",
        common,
        &[report],
        json!({ "cases": counts }),
    )
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let variants = parse_variants(&args.variant)?;
    let gammas = parse_gamma_grid(&args.gamma)?;
    let opts = solve_options(common);

    let cells: Vec<(f64, ModelVariant)> = gammas
        .iter()
        .flat_map(|&gamma| variants.iter().map(move |&variant| (gamma, variant)))
        .collect();
    let rows: Vec<String> = in_pool(common.jobs, || {
        cells
            .par_iter()
            .map(|&(gamma, variant)| {
                let sol = solve_any(&inst, variant, Some(gamma), &opts)?;
                let gamma_eff = sol
                    .gamma_effective
                    .as_ref()
                    .map(|g| num(g.iter().sum::<f64>()))
                    .unwrap_or_default();
                Ok(format!(
                    "{},{},{},{},{gamma_eff}",
                    num(gamma),
                    variant.as_str(),
                    num(sol.objective),
                    num(utilization(&inst, &sol)),
                ))
            })
            .collect::<Result<_, Error>>()
    })??;

    let mut csv = String::from("gamma,approach,objective,utilization,gamma_effective\n");
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let report = write_report(&common.out, "sweep.csv", &csv)?;
    println!(
        "swept {} budgets x {} variants: {} rows",
        gammas.len(),
        variants.len(),
        rows.len()
    );
    write_summary(
        &common.out,
        "sweep",
        common,
        &[report],
        json!({
            "gamma_grid": gammas,
            "variants": variants.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
        }),
    )
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let variants = parse_variants(&args.variant)?;
    let model = match &inst {
        AppInstance::Generic(g) => SimModel::Generic(g),
        AppInstance::Sced(s) => SimModel::Sced(s),
        _ => {
            return Err(Error::InvalidInstance(
                "simulation supports generic and sced instances only".into(),
            )
            .into())
        }
    };
    let sim_opts = SimOptions {
        scenarios: args.scenarios,
        seed: args.seed,
        penalty: args.penalty,
        solve: solve_options(common),
    };
    let reports = in_pool(common.jobs, || {
        delta_c_multi(&model, &variants, args.gamma, &sim_opts)
    })??;

    let mut csv = String::from("scenario,approach,delta_c\n");
    for report in &reports {
        for (scenario, delta) in report.deltas.iter().enumerate() {
            csv.push_str(&format!(
                "{scenario},{},{}\n",
                report.variant.as_str(),
                num(*delta)
            ));
        }
    }
    let file = write_report(&common.out, "simulate.csv", &csv)?;
    for report in &reports {
        println!(
            "{}: mean delta C {:.6} over {} scenarios",
            report.variant.as_str(),
            report.mean,
            report.deltas.len()
        );
    }
    write_summary(
        &common.out,
        "simulate",
        common,
        &[file],
        json!({
            "gamma": args.gamma,
            "scenarios": args.scenarios,
            "seed": args.seed,
            "penalty": args.penalty,
            "means": reports
                .iter()
                .map(|r| json!({ "variant": r.variant.as_str(), "mean": r.mean }))
                .collect::<Vec<_>>(),
        }),
    )
}

// ---------------------------------------------------------------------------
// export-lp
// ---------------------------------------------------------------------------

/// The LP relaxation of a variant's program.
fn relaxation(
    inst: &AppInstance,
    variant: ModelVariant,
    gamma: Option<f64>,
    opts: &SolveOptions,
) -> Result<LinearProgram, Error> {
    match inst {
        AppInstance::Generic(g) => {
            let built = match variant {
                ModelVariant::Nominal => effbudget::robust::build_nominal(g)?,
                ModelVariant::Conventional => {
                    effbudget::robust::build_conventional(g, &generic_budget(g, gamma)?)?
                }
                ModelVariant::FullBudget => effbudget::robust::build_full_budget(g)?,
                ModelVariant::Admissible => {
                    let interval = stage1_admissible(g, opts)?;
                    build_admissible(g, &interval)?
                }
                ModelVariant::Effective => {
                    let budget = generic_budget(g, gamma)?;
                    let interval = stage1_admissible(g, opts)?;
                    let params = EffectiveParams::compute(g, &interval, &budget)?;
                    build_stage2(g, &interval, &params, &budget)?
                }
            };
            Ok(built.lp)
        }
        AppInstance::Patient(p) => Ok(build_patient(p, variant, gamma, opts)?.program.base),
        AppInstance::Inventory(v) => Ok(build_inventory(v, variant, gamma, opts)?.program.base),
        AppInstance::Sced(s) => Ok(build_sced(s, variant, gamma, opts)?.program),
    }
}

fn cmd_export_lp(args: ExportLpArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let inst = load(common)?;
    let variants = parse_variants(&args.variant)?;
    if variants.len() != 1 {
        return Err(Error::InvalidModel("export-lp takes a single variant".into()).into());
    }
    let variant = variants[0];
    let opts = solve_options(common);
    let lp = relaxation(&inst, variant, args.gamma, &opts)?;
    let name = format!("model_{}", variant.as_str());
    let mps = to_mps(&lp, &name)?;
    let report = write_report(&common.out, &format!("{name}.mps"), &mps)?;
    println!(
        "exported {} columns x {} rows to {name}.mps",
        lp.num_vars,
        lp.constraints.len()
    );
    write_summary(
        &common.out,
        "export-lp",
        common,
        &[report],
        json!({
            "gamma": args.gamma,
            "variant": variant.as_str(),
            "columns": lp.num_vars,
            "rows": lp.constraints.len(),
        }),
    )
}

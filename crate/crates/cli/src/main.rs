//! `xpcube`: batch front end for verification suites, inequality evaluations,
//! sweeps, extremal searches and geometry grids.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage or precondition error.

mod grid;
mod inputs;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use xpcube::geometry::{
    critical_snowflake_exponent, exponents, grid_lower_bound_table, phase_transition_threshold, snowflake_bound,
    EmbeddingParams,
};
use xpcube::inequalities::{self as ineq, InequalityReport};
use xpcube::search::{constant_sweep, KRule, Objective, SearchConfig};
use xpcube::verify::{run_suite, Operators, Suite, VerifyOptions};
use xpcube::{Sampling, Scaling, Subset};

use grid::{parse_axis, parse_coords, parse_int_axis};
use output::{write_manifests, write_text, RunManifest, Table};

const EVAL_COLUMNS: &str = "\
CSV COLUMNS (one row per report, in this order):
  name, mode, seed, budget   report identity; seed and budget are empty in exact mode
  <parameter>                the inequality's parameters, alphabetically
  lhs, rhs, ratio            both sides; rhs = scale * (sum of terms)^(1/power); ratio = lhs/rhs, 0 when rhs = 0
  term_<t>                   right-hand-side terms, constants excluded
  stderr_<s>                 Monte Carlo standard errors (mc mode only)
  extra_<e>                  auxiliary quantities
  flag_<f>                   boolean diagnostics

Per inequality (parameters | terms | stderr | extras | flags):
  linear-xp         a k n p | diagonal gradient | - | - | -
  chaos-xp          k n p refined | diagonal gradient | - | refined_diagonal_bare refined_diagonal_prefactor
                    refined_gradient_bare refined_gradient_prefactor (with --refined) | -
  metric-xp         k m n p r scaling | diagonal gradient | diagonal_term gradient_term long_term
                    | diagonal_term gradient_term long_term | hypothesis_violated
  smoothed-xp       k n p r scaling | diagonal gradient | diagonal_term gradient_term long_term | - | -
  lust-piquard      n p | h_norm_pow | - | lower_envelope upper_envelope | -
  randomized-riesz  n p set | half_laplacian_pow | lhs_moment | - | -
  jensen            alpha n p set | laplacian_ratio_pow | - | - | violated
  probe             alpha n p | envelope | - | dual_exponent kappa_half_count proof_bound two_sided_target
                    | alpha_in_range half_cube_condition pointwise_bound_holds
  ts-perturbation   n p r set | diagonal | - | - | violated

Coordinates are 0-based. Files written at PATH get a sidecar PATH.manifest.json.";

const SEARCH_COLUMNS: &str = "\
CSV COLUMNS:
  n, k, p          dimension, subset size from the rule, exponent
  rule             half | sqrt | fixed:K
  objective        linear | chaos
  best_ratio       largest ratio found over all restarts
  restarts         random restarts (structured seeds run in addition)
  seed             master seed
  exhausted        true when the best restart hit the iteration cap

Files written at PATH get a sidecar PATH.manifest.json.";

const GEOMETRY_COLUMNS: &str = "\
All quantities carry constant one; true distortions agree with them up to factors depending on p and q.

CSV COLUMNS (rows ordered by p, q, n, m, theta):
  p, q, n, m, theta        grid point; theta is empty without --theta
  n_exponent, m_exponent   exponents of n and m in the grid distortion
  n_term, m_term           n^n_exponent and m^m_exponent
  grid_distortion          min(n_term, m_term)
  phase_exponent           exponent of n in the phase transition threshold
  phase_threshold          n^phase_exponent (empty when q = 2)
  lower_bound, lower_bound_k
                           max over k in [ceil(n/(16 m^2)), n] of k^(1/q)/(k + k^(p/2) n^(p/q-p/2))^(1/p), smallest maximizer
  critical_theta           q/p (empty when q = 2)
  snowflake_min_factor, snowflake_lower_bound, snowflake_k
                           the snowflake minimization over k in [1, n], its reciprocal, and the smallest minimizer

Files written at PATH get a sidecar PATH.manifest.json.";

#[derive(Parser)]
#[command(name = "xpcube", version, about = "Walsh analysis and metric X_p inequality toolkit")]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall time in reports and a timestamp in manifests.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded property suite; exit 1 on any violation.
    Verify(VerifyArgs),
    /// Evaluate one inequality at one parameter point.
    #[command(after_long_help = EVAL_COLUMNS)]
    Eval(EvalArgs),
    /// Evaluate one inequality over a parameter grid.
    #[command(after_long_help = EVAL_COLUMNS)]
    Sweep(EvalArgs),
    /// Search for extremal ratios across dimensions.
    #[command(after_long_help = SEARCH_COLUMNS)]
    Search(SearchArgs),
    /// Closed-form distortion quantities over a (p, q, n, m, theta) grid.
    #[command(after_long_help = GEOMETRY_COLUMNS)]
    Geometry(GeometryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    CorruptLaplacian,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// walsh | torus | inequalities-exact | inequalities-mc | all
    #[arg(value_parser = parse_suite)]
    #[serde(serialize_with = "suite_name")]
    suite: Suite,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials for cheap checks; costly checks run a tenth as many.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<String>,
    #[arg(long, hide = true)]
    #[serde(skip)]
    fault: Option<Fault>,
}

fn suite_name<S: serde::Serializer>(s: &Suite, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.name())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: xpcube::Error| e.to_string())
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
enum Inequality {
    LinearXp,
    ChaosXp,
    MetricXp,
    SmoothedXp,
    LustPiquard,
    RandomizedRiesz,
    Jensen,
    Probe,
    TsPerturbation,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScalingArg {
    /// m = r/4 on Z_{8m}^n
    Sharp,
    /// m = r on Z_{2m}^n
    Generic,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    inequality: Inequality,
    /// Dimension (cube or torus).
    #[arg(long)]
    n: Option<String>,
    /// Subset size; sweeps skip points with k > n.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// Torus half-size: functions live on Z_{2r}^n.
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Coordinates as a comma list, `all` or `none`.
    #[arg(long)]
    set: Option<String>,
    /// Coefficients for linear-xp.
    #[arg(long, help = format!("Coefficients for linear-xp: {}", inputs::COEFF_HELP))]
    a: Option<String>,
    #[arg(long, help = format!("Cube function: {}", inputs::CUBE_HELP))]
    h: Option<String>,
    #[arg(long, help = format!("Torus function: {}", inputs::TORUS_HELP))]
    f: Option<String>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Samples per term in mc mode.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Required in mc mode.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "sharp")]
    scaling: ScalingArg,
    /// Report the two separately scaled terms of the chaos inequality.
    #[arg(long)]
    refined: bool,
    /// eval: append a row; sweep: write the table.
    #[arg(long)]
    csv: Option<String>,
    /// Write the report (eval) or the list of reports (sweep) here instead of stdout.
    #[arg(long)]
    json: Option<String>,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "linear")]
    objective: ObjectiveArg,
    #[arg(long)]
    n: String,
    #[arg(long)]
    p: String,
    /// half | sqrt | fixed:K
    #[arg(long, default_value = "half")]
    rule: String,
    #[arg(long, default_value_t = SearchConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = SearchConfig::default().iterations)]
    iterations: usize,
    #[arg(long, default_value_t = SearchConfig::default().initial_step)]
    step: f64,
    #[arg(long, default_value_t = SearchConfig::default().decay)]
    decay: f64,
    #[arg(long, default_value_t = SearchConfig::default().tolerance)]
    tolerance: f64,
    /// Point values tried per iteration for the chaos objective.
    #[arg(long, default_value_t = SearchConfig::default().batch)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    csv: Option<String>,
    /// Dump the full results, extremizers included.
    #[arg(long)]
    json: Option<String>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ObjectiveArg {
    Linear,
    Chaos,
}

#[derive(Args, Serialize)]
struct GeometryArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    n: String,
    #[arg(long, default_value = "1")]
    m: String,
    #[arg(long)]
    theta: Option<String>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    csv: Option<String>,
}

enum Outcome {
    Ok,
    Violation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, cli.timing),
        Command::Eval(a) => cmd_eval(a, cli.timing, false),
        Command::Sweep(a) => cmd_eval(a, cli.timing, true),
        Command::Search(a) => cmd_search(a, cli.timing),
        Command::Geometry(a) => cmd_geometry(a, cli.timing),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(a: &VerifyArgs, timing: bool) -> Result<Outcome, String> {
    let ops = match a.fault {
        Some(Fault::CorruptLaplacian) => Operators::corrupted(),
        None => Operators::standard(),
    };
    let options = VerifyOptions {
        n_max: a.n_max,
        seed: a.seed,
        trials: a.trials,
    };
    let report = run_suite(a.suite, &options, &ops).map_err(|e| e.to_string())?;
    let text = report.to_json() + "\n";
    match &a.json {
        Some(path) => {
            write_text(path, &text)?;
            let mut m = RunManifest::new(&format!("verify {}", a.suite.name()), a, Some(a.seed), timing);
            m.outputs.push(path.clone());
            write_manifests(&m)?;
        }
        None => print!("{text}"),
    }
    if report.passed {
        Ok(Outcome::Ok)
    } else {
        eprintln!("violations in: {}", report.failures().join(", "));
        Ok(Outcome::Violation)
    }
}

/// One grid point of an eval or sweep.
#[derive(Clone, Copy)]
struct Point {
    n: Option<usize>,
    k: Option<usize>,
    p: Option<f64>,
    r: Option<usize>,
    alpha: Option<f64>,
}

fn axis_usize(spec: &Option<String>) -> Result<Vec<Option<usize>>, String> {
    match spec {
        None => Ok(vec![None]),
        Some(s) => Ok(parse_int_axis(s)?.into_iter().map(|v| Some(v as usize)).collect()),
    }
}

fn axis_f64(spec: &Option<String>) -> Result<Vec<Option<f64>>, String> {
    match spec {
        None => Ok(vec![None]),
        Some(s) => Ok(parse_axis(s)?.into_iter().map(Some).collect()),
    }
}

/// Grid points in lexicographic order of (n, k, p, r, alpha), skipping k > n.
fn points(a: &EvalArgs) -> Result<Vec<Point>, String> {
    let mut out = Vec::new();
    for &n in &axis_usize(&a.n)? {
        for &k in &axis_usize(&a.k)? {
            if let (Some(n), Some(k)) = (n, k) {
                if k > n {
                    continue;
                }
            }
            for &p in &axis_f64(&a.p)? {
                for &r in &axis_usize(&a.r)? {
                    for &alpha in &axis_f64(&a.alpha)? {
                        out.push(Point { n, k, p, r, alpha });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("this inequality needs --{flag}"))
}

fn subset(spec: &Option<String>, n: usize) -> Result<Subset, String> {
    let coords = parse_coords(spec.as_deref().unwrap_or("all"), n)?;
    if let Some(c) = coords.iter().find(|c| **c >= n) {
        return Err(format!("coordinate {c} out of range for n = {n}"));
    }
    Ok(Subset::from_coords(coords))
}

fn sampling(a: &EvalArgs) -> Result<Sampling, String> {
    match a.mode {
        ModeArg::Exact => Ok(Sampling::exact()),
        ModeArg::Mc => {
            let seed = a.seed.ok_or("Monte Carlo mode requires an explicit --seed")?;
            Ok(Sampling::monte_carlo(a.budget, seed))
        }
    }
}

fn scaling(a: &EvalArgs) -> Scaling {
    match a.scaling {
        ScalingArg::Sharp => Scaling::Sharp,
        ScalingArg::Generic => Scaling::Generic,
    }
}

fn evaluate(a: &EvalArgs, pt: Point) -> Result<InequalityReport, String> {
    let e = |err: xpcube::Error| err.to_string();
    let p = need(pt.p, "p")?;
    let cube = || -> Result<xpcube::CubeFunction, String> { inputs::cube_function(need(a.h.as_ref(), "h")?, pt.n) };
    let torus = || inputs::torus_function(need(a.f.as_ref(), "f")?, pt.r, pt.n);
    match a.inequality {
        Inequality::LinearXp => {
            let coeffs = inputs::coefficients(a.a.as_deref().unwrap_or("ones"), pt.n)?;
            if let Some(n) = pt.n {
                if n != coeffs.len() {
                    return Err(format!("--a has {} coefficients but --n is {n}", coeffs.len()));
                }
            }
            ineq::linear_xp(&coeffs, p, need(pt.k, "k")?).map_err(e)
        }
        Inequality::ChaosXp => ineq::chaos_xp(&cube()?, p, need(pt.k, "k")?, a.refined).map_err(e),
        Inequality::MetricXp => ineq::metric_xp(&torus()?, p, need(pt.k, "k")?, sampling(a)?, scaling(a)).map_err(e),
        Inequality::SmoothedXp => {
            ineq::smoothed_xp(&torus()?, p, need(pt.k, "k")?, sampling(a)?, scaling(a)).map_err(e)
        }
        Inequality::LustPiquard => ineq::lust_piquard_square(&cube()?, p).map_err(e),
        Inequality::RandomizedRiesz => {
            let h = cube()?;
            let set = subset(&a.set, h.n())?;
            ineq::randomized_riesz(&h, p, set, sampling(a)?).map_err(e)
        }
        Inequality::Jensen => {
            let h = cube()?;
            let set = subset(&a.set, h.n())?;
            ineq::jensen_contraction(&h, set, need(pt.alpha, "alpha")?, p).map_err(e)
        }
        Inequality::Probe => ineq::inverse_laplacian_probe(p, need(pt.alpha, "alpha")?, need(pt.n, "n")?).map_err(e),
        Inequality::TsPerturbation => {
            let f = torus()?;
            let set = subset(&a.set, f.n())?;
            ineq::ts_perturbation(&f, set, p).map_err(e)
        }
    }
}

fn cmd_eval(a: &EvalArgs, timing: bool, sweep: bool) -> Result<Outcome, String> {
    if matches!(a.mode, ModeArg::Mc) && a.seed.is_none() {
        return Err("Monte Carlo mode requires an explicit --seed".into());
    }
    let grid = points(a)?;
    if !sweep && grid.len() != 1 {
        return Err("eval takes a single parameter point; use `sweep` for grids".into());
    }
    let mut reports = grid.iter().map(|pt| evaluate(a, *pt)).collect::<Result<Vec<_>, _>>()?;
    if !timing {
        reports.iter_mut().for_each(|r| r.wall_time_secs = None);
    }
    let violated = reports.iter().any(|r| r.violated());
    let command = if sweep { "sweep" } else { "eval" };
    let mut manifest = RunManifest::new(command, a, a.seed, timing);
    let table = Table::from_pairs(reports.iter().map(|r| r.flatten()).collect())?;
    let json = if sweep {
        serde_json::to_string_pretty(&reports)
    } else {
        serde_json::to_string_pretty(&reports[0])
    }
    .map_err(|e| e.to_string())?
        + "\n";
    match &a.json {
        Some(path) => {
            write_text(path, &json)?;
            manifest.outputs.push(path.clone());
        }
        None if !(sweep && a.csv.is_none()) => print!("{json}"),
        None => {}
    }
    match &a.csv {
        Some(path) => {
            if sweep {
                table.write(path)?;
            } else {
                table.append(path)?;
            }
            manifest.outputs.push(path.clone());
        }
        None if sweep => print!("{}", table.render()?),
        None => {}
    }
    write_manifests(&manifest)?;
    Ok(if violated { Outcome::Violation } else { Outcome::Ok })
}

fn parse_rule(s: &str) -> Result<KRule, String> {
    match s {
        "half" => Ok(KRule::Half),
        "sqrt" => Ok(KRule::Sqrt),
        _ => {
            let k = s.strip_prefix("fixed:").unwrap_or(s);
            k.parse::<usize>()
                .map(KRule::Fixed)
                .map_err(|_| format!("unknown rule '{s}' (expected half, sqrt or fixed:K)"))
        }
    }
}

fn cmd_search(a: &SearchArgs, timing: bool) -> Result<Outcome, String> {
    let rule = parse_rule(&a.rule)?;
    let objective = match a.objective {
        ObjectiveArg::Linear => Objective::Linear,
        ObjectiveArg::Chaos => Objective::Chaos,
    };
    let ns: Vec<usize> = parse_int_axis(&a.n)?.into_iter().map(|v| v as usize).collect();
    let ps = parse_axis(&a.p)?;
    let config = SearchConfig {
        restarts: a.restarts,
        iterations: a.iterations,
        initial_step: a.step,
        decay: a.decay,
        tolerance: a.tolerance,
        seed: a.seed,
        batch: a.batch,
        ..SearchConfig::default()
    };
    let mut results = Vec::new();
    for &n in &ns {
        for &p in &ps {
            results.extend(constant_sweep(&[n], rule, p, objective, &config).map_err(|e| e.to_string())?);
        }
    }
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                r.p.to_string(),
                rule.name(),
                objective.name().to_string(),
                r.best_ratio.to_string(),
                r.config.restarts.to_string(),
                r.config.seed.to_string(),
                r.iterations_exhausted.to_string(),
            ]
        })
        .collect();
    let header = [
        "n",
        "k",
        "p",
        "rule",
        "objective",
        "best_ratio",
        "restarts",
        "seed",
        "exhausted",
    ];
    let table = Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    let mut manifest = RunManifest::new("search", a, Some(a.seed), timing);
    match &a.csv {
        Some(path) => {
            table.write(path)?;
            manifest.outputs.push(path.clone());
        }
        None => print!("{}", table.render()?),
    }
    if let Some(path) = &a.json {
        write_text(
            path,
            &(serde_json::to_string_pretty(&results).map_err(|e| e.to_string())? + "\n"),
        )?;
        manifest.outputs.push(path.clone());
    }
    write_manifests(&manifest)?;
    Ok(Outcome::Ok)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_geometry(a: &GeometryArgs, timing: bool) -> Result<Outcome, String> {
    let ps = parse_axis(&a.p)?;
    let qs = parse_axis(&a.q)?;
    let ns = parse_int_axis(&a.n)?;
    let ms = parse_int_axis(&a.m)?;
    let thetas: Vec<Option<f64>> = match &a.theta {
        Some(t) => parse_axis(t)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let err = |e: xpcube::Error| e.to_string();
    let mut cells = Vec::new();
    for &p in &ps {
        for &q in &qs {
            for &n in &ns {
                cells.push((p, q, n));
            }
        }
    }
    let blocks: Vec<Vec<Vec<String>>> = cells
        .par_iter()
        .map(|&(p, q, n)| -> Result<Vec<Vec<String>>, String> {
            let e = exponents(p, q).map_err(err)?;
            let strict = q > 2.0;
            let phase = if strict {
                Some(phase_transition_threshold(p, q, n).map_err(err)?)
            } else {
                None
            };
            let critical = if strict {
                Some(critical_snowflake_exponent(p, q).map_err(err)?)
            } else {
                None
            };
            let lower = grid_lower_bound_table(p, q, n, &ms).map_err(err)?;
            let snow = thetas
                .iter()
                .map(|t| match t {
                    Some(theta) => snowflake_bound(p, q, *theta, n).map(Some),
                    None => Ok(None),
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            let mut rows = Vec::new();
            for (&m, lb) in ms.iter().zip(&lower) {
                let params = EmbeddingParams::new(p, q, m, n).map_err(err)?;
                let n_term = (n as f64).powf(e.n_exponent);
                let m_term = (m as f64).powf(e.m_exponent);
                let distortion = xpcube::geometry::grid_distortion_value(&params).map_err(err)?;
                for (theta, s) in thetas.iter().zip(&snow) {
                    rows.push(vec![
                        p.to_string(),
                        q.to_string(),
                        n.to_string(),
                        m.to_string(),
                        fmt_opt(*theta),
                        e.n_exponent.to_string(),
                        e.m_exponent.to_string(),
                        n_term.to_string(),
                        m_term.to_string(),
                        distortion.to_string(),
                        e.phase_exponent.to_string(),
                        fmt_opt(phase),
                        lb.value.to_string(),
                        lb.k.to_string(),
                        fmt_opt(critical),
                        fmt_opt(s.map(|s| s.min_factor)),
                        fmt_opt(s.map(|s| s.distortion_lower_bound)),
                        s.map(|s| s.k.to_string()).unwrap_or_default(),
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let header = [
        "p",
        "q",
        "n",
        "m",
        "theta",
        "n_exponent",
        "m_exponent",
        "n_term",
        "m_term",
        "grid_distortion",
        "phase_exponent",
        "phase_threshold",
        "lower_bound",
        "lower_bound_k",
        "critical_theta",
        "snowflake_min_factor",
        "snowflake_lower_bound",
        "snowflake_k",
    ];
    let table = Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows: blocks.into_iter().flatten().collect(),
    };
    let mut manifest = RunManifest::new("geometry", a, None, timing);
    match &a.csv {
        Some(path) => {
            table.write(path)?;
            manifest.outputs.push(path.clone());
            write_manifests(&manifest)?;
        }
        None => print!("{}", table.render()?),
    }
    Ok(Outcome::Ok)
}

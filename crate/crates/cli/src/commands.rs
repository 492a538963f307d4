use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use thiserror::Error;

use tddmp::exact::{emit_milp, exact_solve, ExactLimits, ExactOutcome, MilpOptions};
use tddmp::generators::{
    make_month_pair, make_monthly_instance, make_random_small_instance, make_small_instance, parse_solomon,
    GeneratorParams, MonthlyProfile, C101_HEAD,
};
use tddmp::geometry::CompactnessMode;
use tddmp::model::{solution_cost, validate, Instance, Solution};
use tddmp::solver::{trace_to_jsonl, SolverError, SolverParams};

use crate::bench::{bench_one, baseline_index, BenchReport, BenchRow, NextMonthRow};
use crate::next_month::{next_month, NextMonthReport};
use crate::render::{render_geojson, render_svg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Timeout(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Timeout(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn input<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Input(format!("{context}: {e}"))
}

#[derive(Parser, Debug)]
#[command(name = "tddmp", version, about = "Territory design for multi-period vehicle routing with time windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated instance (or a month pair).
    Generate(GenerateArgs),
    /// Design territories for an instance.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Check a solution against every constraint family.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Minimum territory count by enumeration (at most 8 customers, 3 days).
    Exact {
        instance: PathBuf,
        #[arg(long, default_value_t = ExactLimits::default().node_cap)]
        node_cap: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the MILP formulation as a CPLEX LP file.
    ExportMilp {
        instance: PathBuf,
        #[arg(long)]
        symmetry_breaking: bool,
        #[arg(long)]
        literal_depot_flow: bool,
        #[arg(long)]
        big_m: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Solve a batch of instances and tabulate the results.
    Bench(BenchArgs),
    /// Route a second month with the territories of the first.
    NextMonth {
        /// Month-1 solution.
        solution: PathBuf,
        /// Month-2 instance.
        instance: PathBuf,
        /// JSON array of `[month-1 id, month-2 id]` pairs.
        shared: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Draw the territories of a solution as GeoJSON (and SVG).
    Render {
        solution: PathBuf,
        instance: PathBuf,
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// First customers of a Solomon file over several days.
    Small,
    /// Solomon-like random customers.
    RandomSmall,
    /// Synthetic monthly distribution instance.
    Monthly,
    /// Two consecutive synthetic months with customer turnover.
    Pair,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    pub kind: GenKind,
    /// Generator parameters (TOML or JSON).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub customers: Option<usize>,
    #[arg(long)]
    pub days: Option<usize>,
    /// Solomon file for `small`; defaults to the bundled C101 excerpt.
    #[arg(long)]
    pub solomon: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SolverArgs {
    /// Solver parameters (TOML or JSON); flags override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Elimination budget: seconds, or a number with an `s` or `m` suffix.
    #[arg(long, value_parser = parse_budget)]
    pub ct_max: Option<f64>,
    #[arg(long)]
    pub eta: Option<usize>,
    #[arg(long)]
    pub pmax: Option<u32>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Compactness bound.
    #[arg(long = "F")]
    pub f: Option<f64>,
    #[arg(long)]
    pub compactness_mode: Option<CompactnessMode>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Glob of instance files.
    #[arg(long, conflicts_with = "generate")]
    pub instances: Option<String>,
    /// Generate the batch instead of reading it.
    #[arg(long)]
    pub generate: Option<GenKind>,
    /// Number of generated instances.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Generator parameters (TOML or JSON).
    #[arg(long)]
    pub gen_params: Option<PathBuf>,
    /// Solver seeds per instance, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub repetitions: u64,
    /// Glob of baseline solution files for the travel-time comparison.
    #[arg(long)]
    pub baseline: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses one per CPU.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

/// Seconds from `90`, `90s` or `1.5m`.
pub fn parse_budget(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (num, scale) = match t.strip_suffix('m') {
        Some(n) => (n, 60.0),
        None => (t.strip_suffix('s').unwrap_or(t), 1.0),
    };
    match num.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v * scale),
        _ => Err(format!("`{text}` is not a positive duration")),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(input(path.display()))
}

/// Deserializes TOML for `.toml` files and JSON otherwise.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(input(path.display()))
    } else {
        serde_json::from_str(&text).map_err(input(path.display()))
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::from_json(&read_text(path)?).map_err(input(path.display()))
}

pub fn read_solution(path: &Path) -> Result<Solution, CliError> {
    Solution::from_json(&read_text(path)?).map_err(input(path.display()))
}

/// Writes through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl SolverArgs {
    pub fn resolve(&self) -> Result<SolverParams, CliError> {
        let mut p = match &self.params {
            Some(path) => read_config::<SolverParams>(path)?,
            None => SolverParams::default(),
        };
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.ct_max {
            p = p.with_ct_max(Duration::from_secs_f64(v));
        }
        if let Some(v) = self.eta {
            p.eta = v;
        }
        if let Some(v) = self.pmax {
            p.p_max = v;
        }
        if let Some(v) = self.kmax {
            p.k_max = v;
        }
        if let Some(v) = self.f {
            p.compactness_bound = Some(v);
        }
        if let Some(v) = self.compactness_mode {
            p.compactness_mode = Some(v);
        }
        p.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(p)
    }
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::IntrinsicallyInfeasible { customers } => {
            CliError::Infeasible(format!("customers {customers:?} cannot be served even on their own"))
        }
        SolverError::Params(m) => CliError::Input(m),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Solve { instance, solver, out_dir } => cmd_solve(&instance, &solver, &out_dir),
        Command::Validate { instance, solution } => cmd_validate(&instance, &solution),
        Command::Exact { instance, node_cap, out_dir } => cmd_exact(&instance, node_cap, &out_dir),
        Command::ExportMilp { instance, symmetry_breaking, literal_depot_flow, big_m, out_dir } => {
            let options = MilpOptions { symmetry_breaking, literal_depot_flow, big_m };
            cmd_export_milp(&instance, options, &out_dir)
        }
        Command::Bench(args) => cmd_bench(&args).map(|_| ()),
        Command::NextMonth { solution, instance, shared, out_dir } => {
            cmd_next_month(&solution, &instance, &shared, &out_dir).map(|_| ())
        }
        Command::Render { solution, instance, svg, width, out_dir } => {
            cmd_render(&solution, &instance, svg.then_some(width), &out_dir)
        }
    }
}

fn generator_params(args: &GenerateArgs) -> Result<GeneratorParams, CliError> {
    let mut p = match &args.params {
        Some(path) => read_config::<GeneratorParams>(path)?,
        None => GeneratorParams::default(),
    };
    if let Some(s) = args.seed {
        p.rng_seed = s;
    }
    if let Some(n) = args.customers {
        p.customer_count = n;
    }
    if let Some(d) = args.days {
        p.horizon_days = d;
    }
    Ok(p)
}

fn monthly_profile(path: Option<&Path>, customers: Option<usize>, days: Option<usize>) -> Result<MonthlyProfile, CliError> {
    let mut p = match path {
        Some(path) => read_config::<MonthlyProfile>(path)?,
        None => MonthlyProfile::table2_average(),
    };
    if let Some(n) = customers {
        p.customers = n;
    }
    if let Some(d) = days {
        p.days = d;
    }
    Ok(p)
}

/// The instance of a small, random-small or monthly generator.
fn generate_one(
    kind: GenKind,
    small: &GeneratorParams,
    monthly: &MonthlyProfile,
    solomon: Option<&Path>,
) -> Result<Instance, CliError> {
    let gen_err = |e: tddmp::generators::GeneratorError| CliError::Input(e.to_string());
    match kind {
        GenKind::Small => {
            let text = match solomon {
                Some(p) => read_text(p)?,
                None => C101_HEAD.to_string(),
            };
            let file = parse_solomon(&text).map_err(gen_err)?;
            make_small_instance(&file, small).map_err(gen_err)
        }
        GenKind::RandomSmall => make_random_small_instance(small).map_err(gen_err),
        GenKind::Monthly => make_monthly_instance(monthly, small.rng_seed).map_err(gen_err),
        GenKind::Pair => Err(CliError::Input("a month pair is not a single instance".into())),
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let small = generator_params(args)?;
    let monthly = monthly_profile(
        if matches!(args.kind, GenKind::Monthly | GenKind::Pair) { args.params.as_deref() } else { None },
        args.customers,
        args.days,
    )?;
    if args.kind == GenKind::Pair {
        let pair = make_month_pair(&monthly, small.rng_seed).map_err(|e| CliError::Input(e.to_string()))?;
        let stem = pair.month1.name().trim_end_matches("-m1").to_string();
        write_atomic(&args.out_dir.join(format!("{stem}-m1.json")), &pair.month1.to_json())?;
        write_atomic(&args.out_dir.join(format!("{stem}-m2.json")), &pair.month2.to_json())?;
        let shared = serde_json::to_string(&pair.shared).expect("pairs serialize");
        write_atomic(&args.out_dir.join(format!("{stem}-shared.json")), &shared)?;
        println!("{stem}: {} shared customers", pair.shared.len());
        return Ok(());
    }
    let inst = generate_one(args.kind, &small, &monthly, args.solomon.as_deref())?;
    let path = args.out_dir.join(format!("{}.json", inst.name()));
    write_atomic(&path, &inst.to_json())?;
    println!("{}", path.display());
    Ok(())
}

fn summary_line(inst: &Instance, sol: &Solution, cpu: f64) -> String {
    let cost = solution_cost(inst, sol);
    format!(
        "{}: NV {} TT {:.3} h ACR {:.3} CPU {:.3} s",
        inst.name(),
        cost.territories,
        cost.travel_time_hours,
        cost.average_compactness.unwrap_or(0.0),
        cpu
    )
}

pub fn cmd_solve(instance: &Path, solver: &SolverArgs, out_dir: &Path) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let params = solver.resolve()?;
    let (row, result) = bench_one(&inst, &params, None).map_err(solver_error)?;
    write_atomic(&out_dir.join(format!("{}.solution.json", inst.name())), &result.solution.to_json())?;
    write_atomic(&out_dir.join(format!("{}.trace.jsonl", inst.name())), &trace_to_jsonl(&result.trace))?;
    println!("{}", summary_line(&inst, &result.solution, row.cpu));
    if row.feasible {
        Ok(())
    } else if row.timed_out {
        Err(CliError::Timeout(format!("{}: no feasible solution within the time budget", inst.name())))
    } else {
        Err(CliError::Infeasible(format!("{}: the solution does not validate", inst.name())))
    }
}

pub fn cmd_validate(instance: &Path, solution: &Path) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let sol = read_solution(solution)?;
    let report = validate(&inst, &sol).map_err(input(solution.display()))?;
    for v in &report.violations {
        println!("{}: {}", v.family.label(), v.detail);
    }
    if report.is_feasible() {
        println!("{}", summary_line(&inst, &sol, 0.0).trim_end_matches(" CPU 0.000 s"));
        Ok(())
    } else {
        Err(CliError::Infeasible(format!("{} violations", report.violations.len())))
    }
}

pub fn cmd_exact(instance: &Path, node_cap: u64, out_dir: &Path) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    match exact_solve(&inst, ExactLimits { node_cap }).map_err(input(instance.display()))? {
        ExactOutcome::Optimal { territories, solution } => {
            write_atomic(&out_dir.join(format!("{}.exact.json", inst.name())), &solution.to_json())?;
            println!("{}: optimum {territories} territories", inst.name());
            Ok(())
        }
        ExactOutcome::Infeasible => Err(CliError::Infeasible(format!("{}: no feasible partition", inst.name()))),
        ExactOutcome::Unknown { lower_bound } => Err(CliError::Timeout(format!(
            "{}: node cap reached, at least {lower_bound} territories",
            inst.name()
        ))),
    }
}

pub fn cmd_export_milp(instance: &Path, options: MilpOptions, out_dir: &Path) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let art = emit_milp(&inst, options).map_err(input(instance.display()))?;
    let path = out_dir.join(format!("{}.lp", inst.name()));
    write_atomic(&path, &art.to_lp(&inst))?;
    println!("{}: {} variables, {} rows", path.display(), art.lp.variables.len(), art.lp.rows.len());
    Ok(())
}

pub fn read_shared(path: &Path) -> Result<Vec<(usize, usize)>, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(input(path.display()))
}

pub fn cmd_next_month(
    solution: &Path,
    instance: &Path,
    shared: &Path,
    out_dir: &Path,
) -> Result<NextMonthReport, CliError> {
    let sol = read_solution(solution)?;
    let inst = read_instance(instance)?;
    let map = read_shared(shared)?;
    let report = next_month(&sol, &inst, &map).map_err(input(shared.display()))?;
    write_next_month(&report, out_dir)?;
    println!(
        "{}: TIC {} TID {} IAC {:.1} kg IATW {:.3} h, {} old customer-days over",
        report.instance,
        report.tic,
        report.tid,
        report.iac,
        report.iatw,
        report.overflow.len()
    );
    Ok(report)
}

fn write_next_month(report: &NextMonthReport, out_dir: &Path) -> Result<(), CliError> {
    let stem = &report.instance;
    let full = serde_json::to_string_pretty(report).expect("report serializes");
    write_atomic(&out_dir.join(format!("{stem}.next-month.json")), &full)?;
    write_atomic(&out_dir.join(format!("{stem}.plan.json")), &report.plan.to_json())?;
    let table = BenchReport::from_next_month(vec![NextMonthRow::from(report)]);
    write_atomic(&out_dir.join(format!("{stem}.next-month.csv")), &table.to_csv().map_err(csv_err)?)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

pub fn cmd_render(solution: &Path, instance: &Path, svg_width: Option<f64>, out_dir: &Path) -> Result<(), CliError> {
    let sol = read_solution(solution)?;
    let inst = read_instance(instance)?;
    let doc = render_geojson(&sol, &inst).map_err(input(solution.display()))?;
    let path = out_dir.join(format!("{}.geojson", inst.name()));
    write_atomic(&path, &serde_json::to_string_pretty(&doc).expect("geojson serializes"))?;
    println!("{}", path.display());
    if let Some(width) = svg_width {
        let svg = render_svg(&sol, &inst, width).map_err(input(solution.display()))?;
        let path = out_dir.join(format!("{}.svg", inst.name()));
        write_atomic(&path, &svg)?;
        println!("{}", path.display());
    }
    Ok(())
}

enum Job {
    Single(Arc<Instance>),
    Pair(u64),
}

fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(input(pattern))?
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!("`{pattern}` matches no files")));
    }
    Ok(paths)
}

/// Runs the batch and writes `report.json`, `report.csv` and `classes.csv`
/// plus one solution and trace per run under `solutions/`.
pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let params = args.solver.resolve()?;
    let (small, monthly) = match args.generate {
        Some(GenKind::Small | GenKind::RandomSmall) => {
            let p = match &args.gen_params {
                Some(path) => read_config::<GeneratorParams>(path)?,
                None => GeneratorParams::default(),
            };
            (p, MonthlyProfile::table2_average())
        }
        Some(GenKind::Monthly | GenKind::Pair) => {
            (GeneratorParams::default(), monthly_profile(args.gen_params.as_deref(), None, None)?)
        }
        None => (GeneratorParams::default(), MonthlyProfile::table2_average()),
    };
    let jobs: Vec<Job> = match (&args.instances, args.generate) {
        (Some(pattern), _) => {
            expand_glob(pattern)?.iter().map(|p| read_instance(p).map(|i| Job::Single(Arc::new(i)))).collect::<Result<_, _>>()?
        }
        (None, Some(GenKind::Pair)) => (0..args.count as u64).map(|k| Job::Pair(small.rng_seed + k)).collect(),
        (None, Some(kind)) => (0..args.count as u64)
            .map(|k| {
                let p = small.clone().with_seed(small.rng_seed + k);
                Ok(Job::Single(Arc::new(generate_one(kind, &p, &monthly, None)?)))
            })
            .collect::<Result<_, CliError>>()?,
        (None, None) => return Err(CliError::Input("give --instances or --generate".into())),
    };
    if jobs.is_empty() {
        return Err(CliError::Input("the batch is empty".into()));
    }
    if args.repetitions == 0 {
        return Err(CliError::Input("--repetitions must be positive".into()));
    }
    let baseline = match &args.baseline {
        Some(pattern) => {
            let by_name: HashMap<String, Arc<Instance>> = jobs
                .iter()
                .filter_map(|j| match j {
                    Job::Single(i) => Some((i.name().to_string(), Arc::clone(i))),
                    Job::Pair(_) => None,
                })
                .collect();
            let mut pairs = Vec::new();
            for path in expand_glob(pattern)? {
                let sol = read_solution(&path)?;
                match by_name.get(&sol.instance) {
                    Some(inst) => pairs.push((sol, inst.as_ref().clone())),
                    None => warn!("baseline {} names no instance of the batch", path.display()),
                }
            }
            Some(baseline_index(&pairs))
        }
        None => None,
    };

    let runs: Vec<(&Job, u64)> =
        jobs.iter().flat_map(|j| (0..args.repetitions).map(move |r| (j, params.seed + r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let solutions_dir = args.out_dir.join("solutions");
    let outcomes: Vec<Result<(BenchRow, Option<NextMonthRow>), CliError>> = pool.install(|| {
        runs.par_iter()
            .map(|&(job, seed)| {
                let p = params.clone().with_seed(seed);
                let (inst, pair) = match job {
                    Job::Single(i) => (Arc::clone(i), None),
                    Job::Pair(s) => {
                        let pair = make_month_pair(&monthly, *s).map_err(|e| CliError::Input(e.to_string()))?;
                        (Arc::new(pair.month1.clone()), Some(pair))
                    }
                };
                info!("solving {} with seed {seed}", inst.name());
                let (row, result) = bench_one(&inst, &p, baseline.as_ref()).map_err(solver_error)?;
                let stem = format!("{}-seed{seed}", inst.name());
                write_atomic(&solutions_dir.join(format!("{stem}.solution.json")), &result.solution.to_json())?;
                write_atomic(&solutions_dir.join(format!("{stem}.trace.jsonl")), &trace_to_jsonl(&result.trace))?;
                let nm = match pair {
                    Some(pair) => {
                        let report = next_month(&result.solution, &pair.month2, &pair.shared)
                            .map_err(|e| CliError::Input(e.to_string()))?;
                        write_next_month(&report, &solutions_dir)?;
                        Some(NextMonthRow::from(&report))
                    }
                    None => None,
                };
                Ok((row, nm))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut nm_rows = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((row, nm)) => {
                rows.push(row);
                nm_rows.extend(nm);
            }
            Err(e) => failures.push(e),
        }
    }
    let mut report = BenchReport::from_rows(rows);
    report.next_month = nm_rows;
    write_atomic(&args.out_dir.join("report.json"), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    write_atomic(&args.out_dir.join("report.csv"), &report.to_csv().map_err(csv_err)?)?;
    write_atomic(&args.out_dir.join("classes.csv"), &report.classes_csv().map_err(csv_err)?)?;
    for c in &report.classes {
        println!(
            "{:<10} n={:<3} ANV {:.2} ATT {:.3} h ACR {:.3} ACPU {:.3} s{}",
            c.class,
            c.instances,
            c.anv,
            c.att,
            c.acr,
            c.acpu,
            c.delta_tt.map_or(String::new(), |d| format!(" dTT {d:.2}%"))
        );
    }
    for r in &report.next_month {
        println!("{}: TIC {} TID {} IAC {:.1} kg IATW {:.3} h", r.instance, r.tic, r.tid, r.iac, r.iatw);
    }
    match failures.into_iter().next() {
        Some(first) => Err(first),
        None => Ok(report),
    }
}

//! Command-line front end for the stabbing-number solvers.

pub mod render;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stabnum::geom::{self, LineFamily};
use stabnum::instance::{self, Instance, Method, Problem, Solution};
use stabnum::models;
use stabnum::oracle::{self, Objective};
use stabnum::solve::{self, Metric};

use render::Drawing;
use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "stabnum", version, about = "Minimum stabbing number matchings and spanning trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random or grid instance
    Gen(GenArgs),
    /// Evaluate a stored solution
    Eval(EvalArgs),
    /// Solve the LP relaxation only
    Bound(SolveArgs),
    /// Iterated rounding
    Round(SolveArgs),
    /// Exact branch-and-bound
    Exact(SolveArgs),
    /// Minimum-length matching or spanning tree
    Minlen(MinlenArgs),
    /// Draw an instance, a solution or the LP optimum as SVG
    Render(RenderArgs),
    /// Brute-force optimum over all structures (tiny instances)
    Oracle(OracleArgs),
    /// Bound, rounding and exact solve with a key=value summary
    Report(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Matching,
    Tree,
    Triangulation,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::Matching => Problem::Matching,
            ProblemArg::Tree => Problem::SpanningTree,
            ProblemArg::Triangulation => Problem::Triangulation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Axis,
    General,
}

impl From<FamilyArg> for LineFamily {
    fn from(f: FamilyArg) -> LineFamily {
        match f {
            FamilyArg::Axis => LineFamily::AxisParallel,
            FamilyArg::General => LineFamily::General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Stabbing,
    Crossing,
    Average,
    Length,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Objective {
        match o {
            ObjectiveArg::Stabbing => Objective::Stabbing,
            ObjectiveArg::Crossing => Objective::Crossing,
            ObjectiveArg::Average => Objective::AverageStabbing,
            ObjectiveArg::Length => Objective::Length,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of random points
    #[arg(long, value_name = "N", conflicts_with = "grid", required_unless_present = "grid")]
    pub random: Option<usize>,
    /// Grid shape ROWSxCOLS
    #[arg(long, value_name = "ROWSxCOLS")]
    pub grid: Option<String>,
    /// Coordinates are drawn from [0, BBOX]
    #[arg(long, default_value_t = 100)]
    pub bbox: u32,
    /// Fraction of grid points kept
    #[arg(long, default_value_t = 1.0)]
    pub keep: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file (native point list or TSPLIB)
    pub instance: PathBuf,
    /// Drop the last point when the instance has an odd number of points
    #[arg(long)]
    pub drop_last: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum, default_value = "matching")]
    pub problem: ProblemArg,
    #[arg(long, value_enum, default_value = "axis")]
    pub family: FamilyArg,
    /// Branch-and-bound time limit in milliseconds (0 = unlimited)
    #[arg(long, default_value_t = 0)]
    pub time_limit: u64,
    /// Re-solve the LP in exact rational arithmetic
    #[arg(long)]
    pub exact_check: bool,
    /// Accepted for reproducible pipelines; the solvers are deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    /// Solution JSON file
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, value_enum, default_value = "stabbing")]
    pub objective: ObjectiveArg,
    /// Line family; defaults to the one stored in the solution
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
}

#[derive(Debug, Args)]
pub struct MinlenArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum, default_value = "matching")]
    pub problem: ProblemArg,
    /// Length metric; defaults to Manhattan for the axis family and
    /// Euclidean for the general family
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, value_enum, default_value = "axis")]
    pub family: FamilyArg,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    /// Draw this solution
    #[arg(long, conflicts_with = "lp")]
    pub edges: Option<PathBuf>,
    /// Draw the length-refined LP optimum
    #[arg(long)]
    pub lp: bool,
    #[arg(long, value_enum, default_value = "matching")]
    pub problem: ProblemArg,
    #[arg(long, value_enum, default_value = "axis")]
    pub family: FamilyArg,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum, default_value = "matching")]
    pub problem: ProblemArg,
    #[arg(long, value_enum, default_value = "axis")]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value = "stabbing")]
    pub objective: ObjectiveArg,
    /// Write the lexicographically first optimal structure as JSON
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(stabnum::Error),
}

impl From<stabnum::Error> for CliError {
    fn from(e: stabnum::Error) -> Self {
        match e {
            stabnum::Error::Parse { .. } => CliError::Usage(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(args: &InstanceArgs) -> CliResult<Instance> {
    let text = read(&args.instance)?;
    let stem = args
        .instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    let inst = instance::parse_instance(&text, &stem)?;
    if args.drop_last && inst.len() % 2 == 1 {
        Ok(inst.drop_last()?)
    } else {
        Ok(inst)
    }
}

/// Writes to `-o` when given, otherwise to stdout.
fn emit(output: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

fn line(out: &mut dyn Write, text: impl AsRef<str>) -> CliResult<()> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn lp_problem(p: ProblemArg) -> CliResult<Problem> {
    match p {
        ProblemArg::Triangulation => Err(CliError::Usage(
            "triangulations are only supported by eval and oracle".into(),
        )),
        other => Ok(other.into()),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. Solution documents go to `-o` or `out`; when they
/// take `out`, the accompanying summary lines go to `err`.
pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Bound(a) => bound(a, out),
        Command::Round(a) => round(a, out, err),
        Command::Exact(a) => exact(a, out, err),
        Command::Minlen(a) => minlen(a, out),
        Command::Render(a) => render_cmd(a, out),
        Command::Oracle(a) => oracle_cmd(a, out),
        Command::Report(a) => report_cmd(a, out),
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = match (a.random, &a.grid) {
        (Some(n), _) => instance::gen_random(n, a.bbox, a.seed)?,
        (None, Some(shape)) => {
            let bad = || CliError::Usage(format!("grid shape must look like 3x4, got {shape:?}"));
            let (r, c) = shape.split_once(['x', 'X']).ok_or_else(bad)?;
            let rows: usize = r.trim().parse().map_err(|_| bad())?;
            let cols: usize = c.trim().parse().map_err(|_| bad())?;
            instance::gen_grid(rows, cols, a.keep, a.seed)?
        }
        (None, None) => return Err(CliError::Usage("gen needs --random or --grid".into())),
    };
    emit(&a.output, &inst.serialize(), out)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let sol = Solution::from_json(&read(&a.edges)?, &inst)?;
    let family = a.family.map(LineFamily::from).unwrap_or(sol.family);
    let pts = inst.points();
    let (k, witness) = geom::stabbing_number(&sol.edges, pts, sol.family)?;
    line(out, format!("problem={}", sol.problem))?;
    line(out, format!("family={family}"))?;
    line(out, format!("stored_k={}", sol.k))?;
    line(out, format!("recomputed_k={k}"))?;
    if let Some(w) = witness {
        line(out, format!("witness_line={w}"))?;
    }
    let value = match a.objective {
        ObjectiveArg::Stabbing => geom::stabbing_number(&sol.edges, pts, family)?.0.to_string(),
        ObjectiveArg::Crossing => geom::crossing_number(&sol.edges, pts, family)?.to_string(),
        ObjectiveArg::Average => match geom::average_stabbing(&sol.edges, pts, family)? {
            geom::AverageStabbing::Exact(r) if *r.denom() == 1 => r.numer().to_string(),
            geom::AverageStabbing::Exact(r) => format!("{}/{}", r.numer(), r.denom()),
            geom::AverageStabbing::Real(v) => format!("{v:.9}"),
        },
        ObjectiveArg::Length => match family {
            LineFamily::AxisParallel => sol
                .edges
                .iter()
                .map(|&e| geom::manhattan_length(e, pts))
                .sum::<i64>()
                .to_string(),
            LineFamily::General => format!(
                "{:.9}",
                sol.edges.iter().map(|&e| geom::euclidean_length(e, pts)).sum::<f64>()
            ),
        },
    };
    line(out, format!("objective={}", format!("{:?}", a.objective).to_lowercase()))?;
    line(out, format!("value={value}"))?;
    line(out, format!("consistent={}", k == sol.k))?;
    if k != sol.k {
        return Err(CliError::Solver(stabnum::Error::InconsistentSolution(format!(
            "stored k = {} but recomputed {k}",
            sol.k
        ))));
    }
    Ok(())
}

fn bound(a: SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let problem = lp_problem(a.problem)?;
    let mut model = models::build_model(&inst, problem, a.family.into())?;
    let r = models::solve_relaxation(&mut model)?;
    line(out, format!("instance={}", inst.name()))?;
    line(out, format!("problem={problem}"))?;
    line(out, format!("family={}", LineFamily::from(a.family)))?;
    line(out, format!("k_frac={:.6}", r.k_frac))?;
    line(out, format!("ceil_bound={}", solve::ceil_bound(r.k_frac)))?;
    line(out, format!("cuts_added={}", r.cuts_added))?;
    line(out, format!("lp_iterations={}", r.lp_iterations))?;
    if a.exact_check {
        let exact = model.certify()?;
        let diff = (stabnum::lp::Scalar::to_f64(&exact) - r.k_frac).abs();
        line(out, format!("k_frac_exact={}", instance::rational_string(&exact)))?;
        line(out, format!("exact_check={}", if diff <= 1e-6 { "ok" } else { "mismatch" }))?;
        if diff > 1e-6 {
            return Err(CliError::Solver(stabnum::Error::Numerical(format!(
                "float and exact LP values differ by {diff:e}"
            ))));
        }
    }
    Ok(())
}

fn round(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let problem = lp_problem(a.problem)?;
    let sol = solve::iterated_rounding(&inst, problem, a.family.into())?;
    emit(&a.output, &sol.to_json(), out)?;
    let summary: &mut dyn Write = if a.output.is_some() { &mut *out } else { &mut *err };
    line(summary, format!("instance={}", inst.name()))?;
    line(summary, format!("k_rounding={}", sol.k))?;
    if let Some(lb) = &sol.lower_bound {
        line(summary, format!("k_frac={}", instance::rational_string(lb)))?;
    }
    Ok(())
}

fn exact(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let problem = lp_problem(a.problem)?;
    let family: LineFamily = a.family.into();
    let t = Instant::now();
    let res = solve::branch_and_bound(&inst, problem, family, a.time_limit)?;
    let exact_ms = t.elapsed().as_millis();
    emit(&a.output, &res.solution.to_json(), out)?;
    let report = RunReport {
        instance: inst.name().to_string(),
        problem,
        family,
        k_frac: res.root_k_frac,
        k_frac_exact: None,
        ceil_bound: solve::ceil_bound(res.root_k_frac),
        k_rounding: res.rounding.k,
        k_exact: res.proven.then_some(res.solution.k),
        cuts_added: res.cuts_added,
        nodes: res.nodes,
        bound_ms: 0,
        rounding_ms: 0,
        exact_ms,
    };
    let summary: &mut dyn Write = if a.output.is_some() { &mut *out } else { &mut *err };
    line(summary, report.render())
}

fn minlen(a: MinlenArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let metric = match a.metric {
        Some(MetricArg::Euclidean) => Metric::Euclidean,
        Some(MetricArg::Manhattan) => Metric::Manhattan,
        None => match a.family {
            FamilyArg::Axis => Metric::Manhattan,
            FamilyArg::General => Metric::Euclidean,
        },
    };
    let sol = match lp_problem(a.problem)? {
        Problem::Matching => solve::min_length_matching(&inst, metric)?,
        _ => solve::min_length_tree(&inst, metric)?,
    };
    emit(&a.output, &sol.to_json(), out)
}

fn render_cmd(a: RenderArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let svg = if let Some(path) = &a.edges {
        let sol = Solution::from_json(&read(path)?, &inst)?;
        render::render_svg(&inst, &Drawing::Solution(&sol))?
    } else if a.lp {
        let problem = lp_problem(a.problem)?;
        let mut model = models::build_model(&inst, problem, a.family.into())?;
        let r = models::solve_relaxation(&mut model)?;
        let refined = models::lexicographic_refine(&mut model, &r)?;
        let weights = refined.support(model.edges());
        render::render_svg(&inst, &Drawing::Fractional { weights: &weights, k: r.k_frac })?
    } else {
        render::render_svg(&inst, &Drawing::Points)?
    };
    emit(&a.output, &svg, out)
}

fn oracle_cmd(a: OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let problem: Problem = a.problem.into();
    let family: LineFamily = a.family.into();
    let best = oracle::brute_optimum(&inst, problem, family, a.objective.into())?;
    let value = match &best.value {
        oracle::Value::Count(c) => c.to_string(),
        oracle::Value::Exact(r) if *r.denom() == 1 => r.numer().to_string(),
        oracle::Value::Exact(r) => format!("{}/{}", r.numer(), r.denom()),
        oracle::Value::Real(v) => format!("{v:.9}"),
    };
    line(out, format!("instance={}", inst.name()))?;
    line(out, format!("problem={problem}"))?;
    line(out, format!("family={family}"))?;
    line(out, format!("value={value}"))?;
    line(out, format!("optimal_structures={}", best.argmin.len()))?;
    line(out, format!("evaluated={}", best.evaluated))?;
    if let Some(path) = &a.output {
        let first = best.argmin.iter().min().expect("nonempty argmin").clone();
        let sol = Solution::build(&inst, problem, family, first, None, Method::Brute)?;
        emit(&Some(path.clone()), &sol.to_json(), out)?;
    }
    Ok(())
}

fn report_cmd(a: SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let inst = load(&a.input)?;
    let problem = lp_problem(a.problem)?;
    let family: LineFamily = a.family.into();

    let t = Instant::now();
    let mut model = models::build_model(&inst, problem, family)?;
    let relaxed = models::solve_relaxation(&mut model)?;
    let exact_lp = if a.exact_check { Some(model.certify()?) } else { None };
    let bound_ms = t.elapsed().as_millis();

    let t = Instant::now();
    let rounding = solve::iterated_rounding(&inst, problem, family)?;
    let rounding_ms = t.elapsed().as_millis();

    let t = Instant::now();
    let bnb = solve::branch_and_bound(&inst, problem, family, a.time_limit)?;
    let exact_ms = t.elapsed().as_millis();

    let report = RunReport {
        instance: inst.name().to_string(),
        problem,
        family,
        k_frac: relaxed.k_frac,
        k_frac_exact: exact_lp,
        ceil_bound: solve::ceil_bound(relaxed.k_frac),
        k_rounding: rounding.k,
        k_exact: bnb.proven.then_some(bnb.solution.k),
        cuts_added: relaxed.cuts_added,
        nodes: bnb.nodes,
        bound_ms,
        rounding_ms,
        exact_ms,
    };
    line(out, report.render())?;
    if let Some(path) = &a.output {
        emit(&Some(path.clone()), &bnb.solution.to_json(), out)?;
    }
    Ok(())
}

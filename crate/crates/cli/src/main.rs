#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use tempfile::NamedTempFile;

use treering::compiler::{CompileOptions, MomentStateSystem};
use treering::oracle::{self, compare, linear_table, McConfig, McTable, MomentTable};
use treering::planner::{build_rrt, Environment, PlannerConfig};
use treering::sysspec::{trig_encode, validate_independence, PolynomialSystem, Severity, SystemSpec};
use treering::{DisturbanceModel, Error, MultiIndex, Propagator};

/// Exact moment propagation, Monte Carlo and linearized baselines, and
/// chance-constrained planning for stochastic trigonometric-polynomial systems.
#[derive(Parser, Debug)]
#[command(name = "treering", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a system spec into a moment-state system.
    Compile {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip factorization over the dependence graph.
        #[arg(long)]
        unreduced: bool,
        /// Write the equation listing here instead of standard output.
        #[arg(long)]
        equations: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        max_basis: usize,
        #[arg(long, default_value_t = 32)]
        max_degree: u32,
    },
    /// Propagate a compiled system over a horizon.
    Propagate {
        compiled: PathBuf,
        /// Spec whose `dist` lines give the disturbances (and `init` lines the
        /// initial state when `--init` is absent).
        #[arg(long)]
        dist: PathBuf,
        /// CSV of initial states, one sample per row; columns are state
        /// variables or angles. Moments are averaged over the rows.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(short = 'T', long)]
        steps: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Evaluate in single precision.
        #[arg(long)]
        f32: bool,
    },
    /// Monte Carlo moment estimates from the original (trigonometric) system.
    Mc {
        spec: PathBuf,
        #[arg(short = 'T', long)]
        steps: usize,
        #[arg(short = 'N', long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Monomials to estimate, e.g. "x y x^2"; defaults to the reduced basis.
        #[arg(long)]
        moments: Option<String>,
    },
    /// Linearized mean/covariance propagation about the initial state.
    Lin {
        spec: PathBuf,
        #[arg(short = 'T', long)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        moments: Option<String>,
    },
    /// Per-moment z-scores of exact (and optionally linearized) series against Monte Carlo.
    Compare {
        exact: PathBuf,
        mc: PathBuf,
        lin: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write per-moment series with ±2 SE bands for plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Chance-constrained RRT over an environment file.
    Plan {
        spec: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        controls: Option<PathBuf>,
        #[arg(long, default_value_t = 3000)]
        iterations: usize,
        #[arg(long, default_value_t = 5.0)]
        turn_radius: f64,
        #[arg(long, default_value_t = 10.0)]
        max_edge: f64,
        #[arg(long, default_value_t = 0.1)]
        goal_bias: f64,
    },
}

/// Failure class mapped to the process exit code.
#[derive(Debug)]
enum Failure {
    Runtime(anyhow::Error),
    Input(anyhow::Error),
    NoPlan(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Input(_) => 2,
            Failure::NoPlan(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidSpec(_)
            | Error::InvalidDistribution(_)
            | Error::MissingDisturbance(_)
            | Error::Format { .. }
            | Error::InvalidArgument(_)
            | Error::HorizonMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::InconsistentTrigPair { .. }
            | Error::MissingMoment(_)
            | Error::AmbientMismatch => Failure::Input(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn input_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Input)
}

fn load_spec(path: &Path) -> CliResult<SystemSpec> {
    SystemSpec::parse(&read_input(path)?).map_err(|e| Failure::Input(anyhow!("{}:{e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let run = || -> anyhow::Result<()> {
        let mut tmp = NamedTempFile::new_in(dir)?;
        {
            let mut w = BufWriter::new(tmp.as_file_mut());
            body(&mut w)?;
            w.flush()?;
        }
        tmp.persist(path)?;
        Ok(())
    };
    run().with_context(|| format!("writing {}", path.display())).map_err(Failure::Runtime)
}

fn metadata(out: &mut dyn Write, extra: &[(&str, String)]) -> io::Result<()> {
    writeln!(out, "# treering {}", env!("CARGO_PKG_VERSION"))?;
    let args: Vec<String> = std::env::args().collect();
    writeln!(out, "# command: {}", args.join(" "))?;
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn encoded_system(spec: &SystemSpec) -> CliResult<PolynomialSystem> {
    Ok(trig_encode(spec)?)
}

fn initial_encoded(sys: &PolynomialSystem) -> CliResult<Vec<f64>> {
    Ok(sys.encode_state(&sys.spec.initial_state())?)
}

/// Initial moment values from a CSV of sample states.
fn init_from_csv<F: treering::Scalar>(prop: &Propagator<F>, text: &str) -> CliResult<Vec<F>> {
    let sys = prop.system();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header: Vec<&str> =
        lines.next().ok_or_else(|| input_err(anyhow!("empty init file")))?.split(',').map(str::trim).collect();
    let mut acc = vec![F::zero(); prop.len()];
    let mut rows = 0usize;
    for line in lines {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| input_err(anyhow!("bad number `{f}` in init file"))))
            .collect::<CliResult<_>>()?;
        if fields.len() != header.len() {
            return Err(input_err(anyhow!("init row has {} fields, header has {}", fields.len(), header.len())));
        }
        let mut x = vec![None; sys.vars.len()];
        for (name, &value) in header.iter().zip(&fields) {
            if let Some(link) = sys.state_links.iter().find(|l| l.angle == *name) {
                x[link.cos_index] = Some(value.cos());
                x[link.sin_index] = Some(value.sin());
            } else if let Some(i) = sys.var_index(name) {
                x[i] = Some(value);
            } else {
                return Err(input_err(anyhow!("init column `{name}` is not a state variable")));
            }
        }
        let x: Vec<F> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v.map(F::of).ok_or_else(|| input_err(anyhow!("init file lacks `{}`", sys.vars[i]))))
            .collect::<CliResult<_>>()?;
        let state = prop.init_deterministic(&x)?;
        for (a, v) in acc.iter_mut().zip(&state.values) {
            *a += *v;
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(input_err(anyhow!("init file has no rows")));
    }
    let n = F::of(rows as f64);
    Ok(acc.into_iter().map(|v| v / n).collect())
}

fn cmd_compile(
    spec_path: &Path,
    output: &Path,
    unreduced: bool,
    equations: Option<&Path>,
    max_basis: usize,
    max_degree: u32,
) -> CliResult<()> {
    let spec = load_spec(spec_path)?;
    let mut fatal = false;
    for d in validate_independence(&spec) {
        eprintln!("{:?}: {}", d.severity, d.message);
        fatal |= d.severity == Severity::Error;
    }
    if fatal {
        return Err(input_err(anyhow!("declared independences contradict the dynamics")));
    }
    let sys = encoded_system(&spec)?;
    let opts = CompileOptions { reduced: !unreduced, max_basis, max_degree };
    let start = Instant::now();
    let compiled = MomentStateSystem::compile(&sys, &opts)?;
    let elapsed = start.elapsed();
    write_atomic(output, |w| w.write_all(compiled.to_text().as_bytes()))?;
    let listing = compiled.equations();
    match equations {
        Some(p) => write_atomic(p, |w| w.write_all(listing.as_bytes()))?,
        None => print!("{listing}"),
    }
    eprintln!(
        "{} equations, {} terms ({}) in {:.3} s",
        compiled.len(),
        compiled.term_count(),
        if compiled.reduced { "reduced" } else { "un-reduced" },
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn propagate_with<F: treering::Scalar>(
    compiled: MomentStateSystem,
    dist: &SystemSpec,
    init: Option<&str>,
    steps: usize,
    output: &Path,
    precision: &str,
) -> CliResult<()> {
    let model: DisturbanceModel<F> = DisturbanceModel::from_spec(dist)?;
    let prop: Propagator<F> = Propagator::new(compiled)?;
    let values = match init {
        Some(text) => init_from_csv(&prop, text)?,
        None => {
            let sys = encoded_system(dist)?;
            if sys.vars != prop.system().vars {
                return Err(input_err(anyhow!(
                    "spec variables [{}] differ from the compiled system's [{}]; pass --init",
                    sys.vars.join(" "),
                    prop.system().vars.join(" ")
                )));
            }
            let x0: Vec<F> = initial_encoded(&sys)?.into_iter().map(F::of).collect();
            prop.init_deterministic(&x0)?.values
        }
    };
    let init = prop.state_from_values(values)?;
    let start = Instant::now();
    let traj = prop.propagate(&init, &model, steps)?;
    let elapsed = start.elapsed();
    write_atomic(output, |w| {
        metadata(w, &[("precision", precision.to_string()), ("steps", steps.to_string())])?;
        traj.write_csv(w)
    })?;
    eprintln!("{} moments over {steps} steps in {:.3} ms", prop.len(), elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn moments_for(sys: &PolynomialSystem, moments: Option<&str>) -> CliResult<Vec<MultiIndex>> {
    match moments {
        Some(text) => Ok(sys.parse_moments(text)?),
        None => Ok(MomentStateSystem::compile(sys, &CompileOptions::default())?.basis.as_slice().to_vec()),
    }
}

fn cmd_mc(
    spec_path: &Path,
    steps: usize,
    samples: usize,
    seed: u64,
    output: &Path,
    moments: Option<&str>,
) -> CliResult<()> {
    let spec = load_spec(spec_path)?;
    let sys = encoded_system(&spec)?;
    let model = DisturbanceModel::from_spec(&spec)?;
    let moments = moments_for(&sys, moments)?;
    let start = Instant::now();
    let est =
        oracle::mc_simulate(&spec, &model, &spec.initial_state(), &moments, &McConfig::new(steps, samples, seed))?;
    let elapsed = start.elapsed();
    write_atomic(output, |w| {
        metadata(w, &[("seed", seed.to_string()), ("samples", samples.to_string()), ("steps", steps.to_string())])?;
        est.write_csv(w)
    })?;
    eprintln!("{samples} rollouts x {steps} steps in {:.2} s (seed {seed})", elapsed.as_secs_f64());
    Ok(())
}

fn cmd_lin(spec_path: &Path, steps: usize, dt: f64, output: &Path, moments: Option<&str>) -> CliResult<()> {
    use treering::nalgebra::{DMatrix, DVector};
    let spec = load_spec(spec_path)?;
    let sys = encoded_system(&spec)?;
    let model = DisturbanceModel::from_spec(&spec)?;
    let moments = moments_for(&sys, moments)?;
    let x0 = spec.initial_state();
    let lin = oracle::linearize_at_initial(&spec, &model, &x0, dt)?;
    let n = x0.len();
    let gaussians =
        oracle::linear_propagate(&lin, &DVector::from_vec(x0), &DMatrix::zeros(n, n), &spec, &model, steps)?;
    let table = linear_table(&spec, &gaussians, &moments);
    write_atomic(output, |w| {
        metadata(w, &[("dt", dt.to_string()), ("steps", steps.to_string())])?;
        table.write_csv(w)
    })
}

fn cmd_compare(exact: &Path, mc: &Path, lin: Option<&Path>, output: &Path, plot: Option<&Path>) -> CliResult<()> {
    let exact_t = MomentTable::parse_csv(&read_input(exact)?)?;
    let mc_t = McTable::parse_csv(&read_input(mc)?)?;
    let lin_t = lin.map(|p| read_input(p).and_then(|t| Ok(MomentTable::parse_csv(&t)?))).transpose()?;
    let report = compare(&exact_t, &mc_t, lin_t.as_ref())?;
    let summary = report.summary();
    write_atomic(output, |w| {
        metadata(w, &[("summary", summary.clone())])?;
        report.write_csv(w)
    })?;
    if let Some(p) = plot {
        write_atomic(p, |w| report.write_plot_data(w))?;
    }
    println!("{summary}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    spec_path: &Path,
    env_path: &Path,
    cfg: PlannerConfig,
    output: &Path,
    tree: Option<&Path>,
    controls: Option<&Path>,
) -> CliResult<()> {
    let spec = load_spec(spec_path)?;
    let env = Environment::parse(&read_input(env_path)?)
        .map_err(|e| Failure::Input(anyhow!("{}:{e}", env_path.display())))?;
    let sys = encoded_system(&spec)?;
    let model = DisturbanceModel::from_spec(&spec)?;
    let compiled = MomentStateSystem::compile(&sys, &CompileOptions::default())?;
    let prop = Propagator::new(compiled)?;
    let speed_idx = spec
        .state_vars
        .iter()
        .position(|s| *s == cfg.speed_var)
        .ok_or_else(|| input_err(anyhow!("spec has no speed variable `{}`", cfg.speed_var)))?;
    let speed = spec.initial_state()[speed_idx];
    if !(speed > 0.0) {
        return Err(input_err(anyhow!(
            "initial speed `{}` must be positive (set it with an init line)",
            cfg.speed_var
        )));
    }
    let start = Instant::now();
    let plan = build_rrt(&env, &prop, &model, speed, &cfg)?;
    let elapsed = start.elapsed();
    let meta = vec![
        ("seed", cfg.seed.to_string()),
        ("epsilon", cfg.epsilon.to_string()),
        ("iterations", plan.iterations.to_string()),
        ("tree_nodes", plan.nodes.len().to_string()),
        ("turn_radius", cfg.turn_radius.to_string()),
        ("max_edge", cfg.max_edge.to_string()),
        ("goal_bias", cfg.goal_bias.to_string()),
    ];
    if let Some(p) = tree {
        write_atomic(p, |w| {
            metadata(w, &meta)?;
            plan.write_tree_csv(w)
        })?;
    }
    if !plan.found() {
        return Err(Failure::NoPlan(format!(
            "no plan within {} iterations ({} nodes, {:.2} s)",
            cfg.iterations,
            plan.nodes.len(),
            elapsed.as_secs_f64()
        )));
    }
    write_atomic(output, |w| {
        metadata(w, &meta)?;
        plan.write_path_csv(w)
    })?;
    if let Some(p) = controls {
        write_atomic(p, |w| {
            metadata(w, &meta)?;
            plan.write_controls_csv(w)
        })?;
    }
    eprintln!(
        "plan with {} nodes, {} steps, risk bound {:.4} ({} tree nodes, {:.2} s)",
        plan.path.as_ref().map_or(0, Vec::len),
        plan.controls().len(),
        plan.risk().unwrap_or(0.0),
        plan.nodes.len(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compile { spec, output, unreduced, equations, max_basis, max_degree } => {
            cmd_compile(&spec, &output, unreduced, equations.as_deref(), max_basis, max_degree)
        }
        Command::Propagate { compiled, dist, init, steps, output, f32 } => {
            let compiled = MomentStateSystem::from_text(&read_input(&compiled)?)?;
            let dist = load_spec(&dist)?;
            let init = init.map(|p| read_input(&p)).transpose()?;
            if f32 {
                propagate_with::<f32>(compiled, &dist, init.as_deref(), steps, &output, "f32")
            } else {
                propagate_with::<f64>(compiled, &dist, init.as_deref(), steps, &output, "f64")
            }
        }
        Command::Mc { spec, steps, samples, seed, output, moments } => {
            cmd_mc(&spec, steps, samples, seed, &output, moments.as_deref())
        }
        Command::Lin { spec, steps, dt, output, moments } => cmd_lin(&spec, steps, dt, &output, moments.as_deref()),
        Command::Compare { exact, mc, lin, output, plot } => {
            cmd_compare(&exact, &mc, lin.as_deref(), &output, plot.as_deref())
        }
        Command::Plan {
            spec,
            env,
            eps,
            seed,
            output,
            tree,
            controls,
            iterations,
            turn_radius,
            max_edge,
            goal_bias,
        } => {
            let cfg = PlannerConfig {
                epsilon: eps,
                seed,
                iterations,
                turn_radius,
                max_edge,
                goal_bias,
                ..PlannerConfig::default()
            };
            cmd_plan(&spec, &env, cfg, &output, tree.as_deref(), controls.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Runtime(e) | Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::NoPlan(m) => eprintln!("{m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

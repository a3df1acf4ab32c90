//! `tsfrac`: fractional operators, the IVP solver, control synthesis and
//! the identity auditor on arbitrary time scales.
//!
//! Exit codes: 0 success, 2 input validation failure, 3 numerical
//! failure (non-convergence or divergence flags), 1 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use tsfrac::error::ErrorClass;
use tsfrac::gridfn::GridFunction;
use tsfrac::io::{
    self, format_sig17, from_json_strict, ControlDoc, ControlLawDoc, OperatorDoc, ProblemDoc,
    PsiSpec, SolverReportDoc, TimeScaleDoc,
};
use tsfrac::operators::FracParams;
use tsfrac::oracles::{audit_identity, default_catalog};
use tsfrac::solver::{picard_solve, IVProblem, SolverConfig};
use tsfrac::{ControlProblem64, Error, GridFunction64, PsiFunction64, Result, TimeScale64};

#[derive(Parser)]
#[command(
    name = "tsfrac",
    about = "Fractional integrals, Hilfer-family derivatives, a certified Picard solver and control synthesis on arbitrary time scales",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Input JSON document.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Panels per continuous interval component.
    #[arg(long = "grid-N", default_value_t = 512)]
    grid_n: usize,
    /// Solver / synthesis tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for randomized audit instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for the randomized catalog instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OperatorArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Operator order.
    #[arg(long)]
    alpha: f64,
    /// Derivative type in [0, 1] (fracderiv only).
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Weight function override, e.g. `identity`, `power:2`,
    /// `exp-affine:1,1,-1`.
    #[arg(long)]
    psi: Option<String>,
    /// Also print the profile value at this point.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a time scale: components, jump operators, grid nodes.
    DescribeTimescale(CommonArgs),
    /// Fractional integral profile of the input function.
    Fracint(OperatorArgs),
    /// Fractional derivative profile of order alpha and type beta.
    Fracderiv(OperatorArgs),
    /// Solve the fractional initial value problem on [0, 1].
    SolveIvp(CommonArgs),
    /// Synthesize the terminal steering control on [0, 1].
    SynthesizeControl(CommonArgs),
    /// Run the identity audit catalog and write the verdicts.
    Verify(VerifyArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Internal => 1,
            }
        }
    };
    std::process::exit(code);
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::from)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::DescribeTimescale(args) => describe_timescale(args),
        Command::Fracint(args) => operator_profile(args, OperatorKind::Integral),
        Command::Fracderiv(args) => operator_profile(args, OperatorKind::Derivative),
        Command::SolveIvp(args) => solve_ivp(args),
        Command::SynthesizeControl(args) => synthesize(args),
        Command::Verify(args) => verify(args),
    }
}

fn describe_timescale(args: CommonArgs) -> Result<i32> {
    ensure_out(&args.out)?;
    let doc: TimeScaleDoc = from_json_strict(&read_input(&args.input)?)?;
    let ts: TimeScale64 = doc.to_scale()?;
    let grid = ts.build_grid(args.grid_n)?;
    let kappa = ts.kappa_restrict();
    let nodes: Vec<serde_json::Value> = grid
        .nodes()
        .iter()
        .map(|&t| {
            serde_json::json!({
                "t": t,
                "sigma": ts.sigma(t).unwrap(),
                "rho": ts.rho(t).unwrap(),
                "mu": ts.graininess(t).unwrap(),
            })
        })
        .collect();
    let summary = serde_json::json!({
        "min": ts.min(),
        "max": ts.max(),
        "component_count": ts.components().len(),
        "discrete": ts.is_discrete(),
        "kappa_removes_max": kappa != ts,
        "components": TimeScaleDoc::from_scale(&ts),
        "grid_nodes": nodes,
    });
    let path = write_out(
        &args.out,
        "describe.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "time scale: [{}, {}], {} component(s); wrote {}",
        ts.min(),
        ts.max(),
        ts.components().len(),
        path.display()
    );
    Ok(0)
}

enum OperatorKind {
    Integral,
    Derivative,
}

fn operator_profile(args: OperatorArgs, kind: OperatorKind) -> Result<i32> {
    ensure_out(&args.common.out)?;
    let doc: OperatorDoc = from_json_strict(&read_input(&args.common.input)?)?;
    let ts: TimeScale64 = doc.timescale.to_scale()?;
    let psi_spec = match &args.psi {
        Some(flag) => PsiSpec::parse_flag(flag)?,
        None => doc.psi.clone().unwrap_or(PsiSpec::Identity),
    };
    let psi: PsiFunction64 = psi_spec.to_psi()?;
    let grid = Arc::new(ts.build_grid(args.common.grid_n)?);
    psi.validate_on_grid(&grid)?;
    let a = ts.min();
    let f_spec = doc
        .f
        .clone()
        .unwrap_or(io::FuncSpec::Constant { value: 1.0 });
    let f: GridFunction64 = GridFunction::sample(&grid, f_spec.to_fn(&psi, a));

    let (profile, name) = match kind {
        OperatorKind::Integral => (
            tsfrac::operators::rl_integral_profile(&f, &psi, args.alpha, a)?,
            "fracint.csv",
        ),
        OperatorKind::Derivative => {
            let n = args.alpha.ceil().max(1.0) as u32;
            let params = FracParams::new(args.alpha, args.beta, n)?;
            (
                tsfrac::operators::hilfer_profile(&f, &psi, &params, a)?,
                "fracderiv.csv",
            )
        }
    };
    let csv = io::grid_function_to_csv(&profile, "value");
    let path = write_out(&args.common.out, name, &csv)?;
    println!("wrote {}", path.display());
    if let Some(t) = args.t {
        let v = profile.value_at(t)?;
        println!("value at t = {}: {}", t, format_sig17(v));
    }
    Ok(0)
}

fn solver_config(common: &CommonArgs) -> SolverConfig<f64> {
    SolverConfig {
        grid_n: common.grid_n,
        tol: common.tol,
        ..SolverConfig::default()
    }
}

fn build_problem(doc: &ProblemDoc) -> Result<IVProblem<f64>> {
    let ts: TimeScale64 = doc.timescale.to_scale()?;
    let psi: PsiFunction64 = doc.psi.to_psi()?;
    let params = FracParams::order_one(doc.alpha, doc.beta)?;
    let rhs = doc.rhs.to_fn::<f64>();
    let mut prob = IVProblem::new(ts, psi, params, Arc::new(rhs))?;
    prob.lipschitz = doc.lipschitz;
    prob.bound = doc.bound;
    Ok(prob)
}

fn solve_ivp(args: CommonArgs) -> Result<i32> {
    ensure_out(&args.out)?;
    let doc: ProblemDoc = from_json_strict(&read_input(&args.input)?)?;
    let prob = build_problem(&doc)?;
    let cfg = solver_config(&args);
    let report = picard_solve(&prob, &cfg)?;

    let csv = io::grid_function_to_csv(&report.solution, "value");
    let csv_path = write_out(&args.out, "solution.csv", &csv)?;
    let doc_out = SolverReportDoc::from_report(&report);
    let json_path = write_out(
        &args.out,
        "solver_report.json",
        &serde_json::to_string_pretty(&doc_out)?,
    )?;
    println!(
        "converged: {}; iterations: {}; residual: {:.3e}; wrote {} and {}",
        report.converged,
        report.iterations,
        report.residual,
        csv_path.display(),
        json_path.display()
    );
    Ok(if report.converged { 0 } else { 3 })
}

fn synthesize(args: CommonArgs) -> Result<i32> {
    ensure_out(&args.out)?;
    let doc: ControlDoc = from_json_strict(&read_input(&args.input)?)?;
    let base_doc = ProblemDoc {
        timescale: doc.timescale.clone(),
        psi: doc.psi.clone(),
        alpha: doc.alpha,
        beta: doc.beta,
        rhs: doc.rhs.clone(),
        lipschitz: doc.lipschitz,
        bound: doc.bound,
    };
    let prob = ControlProblem64 {
        base: build_problem(&base_doc)?,
        b_gain: doc.b_gain,
        target: doc.y1,
        inverse_bound: doc.inverse_bound,
    };
    let cfg = solver_config(&args);
    let law = tsfrac::control::synthesize_control(&prob, &cfg)?;

    let csv = io::grid_function_to_csv(&law.control, "u");
    let csv_path = write_out(&args.out, "control.csv", &csv)?;
    let doc_out = ControlLawDoc::from_law(&law);
    let json_path = write_out(
        &args.out,
        "control_report.json",
        &serde_json::to_string_pretty(&doc_out)?,
    )?;
    println!(
        "converged: {}; terminal value: {:.12}; terminal error: {:.3e}; wrote {} and {}",
        law.converged,
        law.terminal_value,
        law.terminal_error,
        csv_path.display(),
        json_path.display()
    );
    Ok(if law.converged { 0 } else { 3 })
}

fn verify(args: VerifyArgs) -> Result<i32> {
    ensure_out(&args.out)?;
    let catalog = default_catalog(args.seed);
    let mut verdicts = Vec::with_capacity(catalog.len());
    for inst in &catalog {
        verdicts.push(audit_identity(inst)?);
    }
    let json = serde_json::to_string_pretty(&verdicts)?;
    let path = write_out(&args.out, "verify.json", &json)?;

    println!(
        "{:<24} {:<46} {:>13} {:>13} {:>10} verdict",
        "identity", "instance", "lhs", "rhs", "|diff|"
    );
    let mut diverging = 0usize;
    for v in &verdicts {
        if v.verdict == "diverges" {
            diverging += 1;
        }
        println!(
            "{:<24} {:<46} {:>13.6e} {:>13.6e} {:>10.3e} {}",
            v.identity, v.instance, v.lhs, v.rhs, v.abs_diff, v.verdict
        );
    }
    println!("wrote {}", path.display());
    Ok(if diverging > 0 { 3 } else { 0 })
}

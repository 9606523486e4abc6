use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use sdpsense::facial::{
    audit, facial_reduction, FacialConfig, FacialManifest, FacialReductionResult, ReductionStatus,
};
use sdpsense::fixtures::{perturbation_family, Perturbation};
use sdpsense::hinf::{
    classify_all, default_grid, matrixwise_family, nonstrict_feasibility_criterion,
    ClassifyOptions, ControlSystem, FaceBehavior, FeasibilityVerdict,
};
use sdpsense::ipm::{solve, SolveStatus, SolverConfig};
use sdpsense::mpla::MpScalar;
use sdpsense::sdpmodel::{read_sdpa, FamilyMeta, PerturbedFamily, SdpProblem};
use sdpsense::sensitivity::{
    continuity_diagnostic, parse_grid, plot_data, run_sweep, to_csv, verify_value_certificates,
    SweepOutputs, SweepSpec,
};

const DIGITS: usize = 30;

#[derive(Parser, Debug)]
#[command(
    name = "sdpsense",
    version,
    about = "Sensitivity analysis for singular semidefinite programs"
)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for the randomized certificate search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Zero threshold for eigenvalues and ranks in facial reduction
    /// (default 2^(-precision/4)).
    #[arg(long, global = true)]
    tol: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an SDPA sparse file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run facial reduction on the dual of an SDPA sparse file.
    Reduce {
        file: PathBuf,
        /// Write the faces and certificates as a JSON manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the face behavior of every plant entry of an H-infinity problem.
    Classify {
        /// Plant matrices A, B1, B2, C1, D11, D12 as JSON.
        plant: PathBuf,
    },
    /// Solve a perturbation family over a grid of parameters.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        /// "±k*STEP:A..B", "k*STEP:A..B" or a comma-separated list.
        #[arg(long)]
        grid: String,
        /// CSV output path; plot data goes next to it with a .plot extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip facial reduction and the rank condition at each point.
        #[arg(long)]
        values_only: bool,
        /// Jump threshold for the continuity diagnostic.
        #[arg(long, default_value = "1e-6")]
        jump_tol: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Audit a reduction manifest, or run the closed-form value checks.
    Verify {
        /// Manifest written by `reduce --out`.
        manifest: Option<PathBuf>,
        /// Problem the manifest belongs to.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Run the closed-form feasibility and value checks instead.
        #[arg(long)]
        values: bool,
    },
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Parameter file with SDPA key names.
    #[arg(long)]
    param: Option<PathBuf>,
    /// Sets epsilonStar and epsilonDash.
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = true)]
struct FamilyArgs {
    /// Base problem (t = 0) as an SDPA sparse file.
    #[arg(long, requires = "toward")]
    base: Option<PathBuf>,
    /// Problem reached at t = 1.
    #[arg(long)]
    toward: Option<PathBuf>,
    /// Plant JSON; combine with --entry.
    #[arg(long, requires = "entry", conflicts_with = "base")]
    plant: Option<PathBuf>,
    /// Plant entry to perturb, e.g. a21.
    #[arg(long)]
    entry: Option<String>,
    /// Built-in family of the reference problem: p1, p2 or p3.
    #[arg(long, conflicts_with_all = ["base", "plant"])]
    perturbation: Option<String>,
}

enum Failure {
    Usage(String),
    Domain(String),
}

type Outcome = Result<(Value, String, bool), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn scalar(x: &MpScalar) -> String {
    x.to_decimal(DIGITS)
}

fn solver_config(args: &SolverArgs, precision: Option<u32>) -> Result<SolverConfig, Failure> {
    let mut cfg = match &args.param {
        Some(p) => SolverConfig::load(p).map_err(usage)?,
        None => SolverConfig::reference_at(precision.unwrap_or(1024), "1e-50"),
    };
    if let Some(p) = precision {
        cfg = cfg.with_precision(p);
    }
    if let Some(e) = &args.epsilon {
        let delta = MpScalar::parse(cfg.precision_bits, e).map_err(usage)?;
        cfg = cfg.with_epsilon(&delta);
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn facial_config(cli: &Cli, prec: u32) -> Result<FacialConfig, Failure> {
    let mut cfg = FacialConfig::new(prec).with_seed(cli.seed);
    if let Some(t) = &cli.tol {
        cfg = cfg.with_cert_tol(MpScalar::parse(prec, t).map_err(usage)?);
    }
    Ok(cfg)
}

fn load_problem(path: &Path, prec: u32) -> Result<SdpProblem, Failure> {
    let rep = read_sdpa(path, prec).map_err(usage)?;
    for w in &rep.warnings {
        eprintln!("warning: {}: {w:?}", path.display());
    }
    Ok(rep.problem)
}

fn run_solve(file: &Path, args: &SolverArgs, precision: Option<u32>) -> Outcome {
    let cfg = solver_config(args, precision)?;
    let prob = load_problem(file, cfg.precision_bits)?;
    let rep = solve(&prob, &cfg).map_err(domain)?;
    let s = &rep.solution;
    let text = format!(
        "status      {}\niterations  {}\nsup (P) b'y  {}\ninf (D) A0.X {}\nrelative gap {:e}",
        rep.status,
        rep.iterations,
        scalar(&s.primal_obj),
        scalar(&s.dual_obj),
        rep.relative_gap().to_f64()
    );
    let report = json!({
        "status": rep.status,
        "iterations": rep.iterations,
        "primal_value": s.primal_obj,
        "dual_value": s.dual_obj,
        "relative_gap": rep.relative_gap(),
        "y": s.y,
    });
    Ok((report, text, rep.status == SolveStatus::Optimal))
}

fn reduction_text(res: &FacialReductionResult) -> String {
    let dims: Vec<String> = res.residual_dims().iter().map(|r| r.to_string()).collect();
    format!(
        "status  {:?}\ndegree  {}\nr       ({})",
        res.status,
        res.degree,
        dims.join(",")
    )
}

fn run_reduce(cli: &Cli, file: &Path, out: Option<&Path>) -> Outcome {
    let prec = cli.precision.unwrap_or(1024);
    let prob = load_problem(file, prec)?;
    let cfg = facial_config(cli, prec)?;
    let res = facial_reduction(&prob, &cfg).map_err(domain)?;
    let manifest = res.to_manifest();
    if let Some(path) = out {
        std::fs::write(path, manifest.to_json())
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let report = json!({
        "status": res.status,
        "degree": res.degree,
        "residual_dims": res.residual_dims(),
        "farkas": res.farkas,
    });
    Ok((
        report,
        reduction_text(&res),
        res.status == ReductionStatus::MinimalFaceFound,
    ))
}

fn run_classify(cli: &Cli, plant: &Path) -> Outcome {
    let prec = cli.precision.unwrap_or(1024);
    let sys = ControlSystem::load(plant, prec).map_err(usage)?;
    let opts = ClassifyOptions {
        facial: facial_config(cli, prec)?,
        ..ClassifyOptions::new(prec)
    };
    let rows = classify_all(&sys, &opts).map_err(domain)?;
    let grid = default_grid(prec);
    let criterion = match nonstrict_feasibility_criterion(&sys, &grid) {
        FeasibilityVerdict::Strict => "strictly feasible dual".to_string(),
        FeasibilityVerdict::NotStrict { witness } => format!(
            "no strictly feasible dual point; rank drops at {} + {}i",
            witness.re.to_decimal(12),
            witness.im.to_decimal(12)
        ),
    };
    let half = rows.len().div_ceil(2);
    let mut text = format!(
        "{:<12} {:<18} {:<12} {}\n",
        "Perturbation", "Face", "Perturbation", "Face"
    );
    for i in 0..half {
        let left = &rows[i];
        let right = rows.get(i + half);
        text.push_str(&format!(
            "{:<12} {:<18} {:<12} {}\n",
            left.param,
            left.behavior.label(),
            right.map_or("", |r| r.param.as_str()),
            right.map_or("", |r| r.behavior.label())
        ));
    }
    text.push_str(&criterion);
    let ok = rows.iter().all(|r| r.behavior != FaceBehavior::Unknown);
    Ok((
        json!({ "classifications": rows, "plant_criterion": criterion }),
        text,
        ok,
    ))
}

fn family(fa: &FamilyArgs, prec: u32) -> Result<PerturbedFamily, Failure> {
    if let Some(name) = &fa.perturbation {
        let which = Perturbation::parse(name)
            .ok_or_else(|| usage(format!("unknown perturbation {name:?}")))?;
        return Ok(perturbation_family(which, prec));
    }
    if let (Some(plant), Some(entry)) = (&fa.plant, &fa.entry) {
        let sys = ControlSystem::load(plant, prec).map_err(usage)?;
        return matrixwise_family(&sys, entry).map_err(usage);
    }
    match (&fa.base, &fa.toward) {
        (Some(base), Some(toward)) => {
            let meta = FamilyMeta {
                name: format!("{} -> {}", base.display(), toward.display()),
                parameter: Some("t".into()),
                ..FamilyMeta::default()
            };
            PerturbedFamily::between(
                load_problem(base, prec)?,
                &load_problem(toward, prec)?,
                meta,
            )
            .map_err(usage)
        }
        _ => Err(usage(
            "give --perturbation, --plant with --entry, or --base with --toward",
        )),
    }
}

struct SweepArgs<'a> {
    family: &'a FamilyArgs,
    grid: &'a str,
    out: Option<&'a Path>,
    values_only: bool,
    jump_tol: &'a str,
    solver: &'a SolverArgs,
}

fn run_sweep_cmd(cli: &Cli, a: SweepArgs) -> Outcome {
    let cfg = solver_config(a.solver, cli.precision)?;
    let prec = cfg.precision_bits;
    let fam = family(a.family, prec)?;
    let grid = parse_grid(a.grid, prec).map_err(usage)?;
    let jump_tol = MpScalar::parse(prec, a.jump_tol).map_err(usage)?;
    let outputs = if a.values_only {
        SweepOutputs::values_only()
    } else {
        SweepOutputs::all()
    };
    let mut spec = SweepSpec::new(fam, grid, cfg).with_outputs(outputs);
    spec.facial = facial_config(cli, prec)?;
    let rows = run_sweep(&spec).map_err(domain)?;
    let csv = to_csv(&rows);
    if let Some(path) = a.out {
        let plot = path.with_extension("plot");
        std::fs::write(path, &csv).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        std::fs::write(&plot, plot_data(&rows))
            .map_err(|e| usage(format!("{}: {e}", plot.display())))?;
    }
    let rep = continuity_diagnostic(&rows, &jump_tol);
    let optimal = rows.iter().filter(|r| r.is_optimal()).count();
    let mut text = if a.out.is_none() { csv } else { String::new() };
    text.push_str(&format!(
        "points {} (optimal {})\ncontinuity {:?}: jump {:e}, modulus {:e}",
        rows.len(),
        optimal,
        rep.verdict,
        rep.max_jump,
        rep.modulus_estimate
    ));
    let ok = optimal == rows.len();
    Ok((json!({ "rows": rows, "continuity": rep }), text, ok))
}

fn run_verify(cli: &Cli, manifest: Option<&Path>, problem: Option<&Path>, values: bool) -> Outcome {
    if values {
        let prec = cli.precision.unwrap_or(1024);
        let rep = verify_value_certificates(prec, &MpScalar::pow2(prec, -200));
        let text = rep
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} ({:e})",
                    if c.passed { "ok  " } else { "FAIL" },
                    c.name,
                    c.error
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        return Ok((json!(rep), text, rep.ok()));
    }
    let (Some(manifest), Some(problem)) = (manifest, problem) else {
        return Err(usage("verify needs a manifest and --problem, or --values"));
    };
    let man = FacialManifest::load(manifest).map_err(usage)?;
    let prec = cli.precision.unwrap_or(man.precision_bits);
    let prob = load_problem(problem, prec)?;
    let res = FacialReductionResult::from_manifest(&man, prec).map_err(usage)?;
    let rep = audit(&prob, &res, &facial_config(cli, prec)?.cert_tol);
    let text = format!(
        "{}\ncertificates valid {:?}\nfaces consistent   {:?}\nfaces orthonormal  {}\naudit {}",
        reduction_text(&res),
        rep.certificates_valid,
        rep.faces_consistent,
        rep.faces_orthogonal,
        if rep.ok() { "passed" } else { "FAILED" }
    );
    Ok((json!(rep), text, rep.ok()))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solve { file, solver } => run_solve(file, solver, cli.precision),
        Command::Reduce { file, out } => run_reduce(cli, file, out.as_deref()),
        Command::Classify { plant } => run_classify(cli, plant),
        Command::Sweep {
            family,
            grid,
            out,
            values_only,
            jump_tol,
            solver,
        } => run_sweep_cmd(
            cli,
            SweepArgs {
                family,
                grid,
                out: out.as_deref(),
                values_only: *values_only,
                jump_tol,
                solver,
            },
        ),
        Command::Verify {
            manifest,
            problem,
            values,
        } => run_verify(cli, manifest.as_deref(), problem.as_deref(), *values),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, text, ok)) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&report).expect("report serializes")
            } else {
                text
            };
            let _ = writeln!(std::io::stdout(), "{body}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

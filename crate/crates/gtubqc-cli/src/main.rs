//! Command-line interface: run blind computations from JSON plan files,
//! decompose gates, drive the server honesty tests, audit blindness, and
//! run the blind QFT. Reports are JSON on stdout; transcripts are
//! JSON-lines files. Exit codes: 0 success, 2 plan/input error,
//! 3 protocol abort or refused audit, 4 malformed server response.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gtubqc::apps_qft::{dft_matrix, qft_circuit, run_blind_qft};
use gtubqc::protocol::{
    compile_gates, plan_unitary, run_computation, PartyRole, PlanFile, SessionConfig,
};
use gtubqc::qcore::{apply_unitary, BellCode, Complex, StateVector, Unitary};
use gtubqc::rotations::{abc_decompose, euler_decompose, Angle, Axis, EulerOrder, NamedGate};
use gtubqc::verify::{
    blindness_audit_angles, blindness_audit_inputs, controlled_detection_probability,
    controlled_test, rotation_detection_probability, rotation_test, AdversaryBehavior,
    AdversaryModel,
};
use gtubqc::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "gtubqc", version, about = "Blind quantum computation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON plan file blindly and write the transcript.
    Run(RunArgs),
    /// Print Euler-angle and ABC decompositions of a gate or matrix file.
    Decompose(DecomposeArgs),
    /// Run the entanglement-swapping honesty tests against an adversary.
    TestServers(TestServersArgs),
    /// Audit input and angle blindness of a plan by exact enumeration.
    Audit(AuditArgs),
    /// Build and run the quantum Fourier transform (blind or direct).
    Qft(QftArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON plan file ({wires, gates: [{name, wires, params?}], seed?}).
    #[arg(long)]
    plan: PathBuf,
    /// Basis-state index of the input register.
    #[arg(long, default_value_t = 0)]
    input: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON-lines transcript.
    #[arg(long, default_value = "transcript.jsonl")]
    transcript: PathBuf,
    /// Include client-only key material in the transcript.
    #[arg(long, default_value_t = false)]
    include_secrets: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Named gate (h, s, t, x, y, z, i) — or use --matrix.
    gate: Option<String>,
    /// JSON file with a 2×2 matrix as [[[re,im],[re,im]],[[re,im],[re,im]]].
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Euler order (zyz, zxz, xyx, xzx, yxy, yzy) or "all".
    #[arg(long, default_value = "all")]
    order: String,
}

#[derive(ValueEnum, Clone, Copy)]
enum TargetServer {
    Server1,
    Server2,
}

#[derive(Args)]
struct TestServersArgs {
    /// honest | flip-b1 | flip-b2 | fixed:<b1b2> | skip | offset:<radians>
    #[arg(long, default_value = "honest")]
    behavior: String,
    #[arg(long, value_enum, default_value_t = TargetServer::Server1)]
    target: TargetServer,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Rotation angle in π/4 units.
    #[arg(long, default_value_t = 1)]
    theta_quarters: i64,
    #[arg(long, default_value = "z")]
    axis: String,
    /// Also run the four-pair controlled-rotation test.
    #[arg(long, default_value_t = false)]
    controlled: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Steps to inspect in the input audit (defaults to every step).
    #[arg(long)]
    steps: Vec<usize>,
}

#[derive(Args)]
struct QftArgs {
    #[arg(long)]
    n: usize,
    /// Basis-state index of the input register.
    #[arg(long, default_value_t = 0)]
    input: usize,
    /// Run through the blind protocol (default) or simulate directly.
    #[arg(long, default_value_t = false)]
    direct: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    include_secrets: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::TestServers(args) => cmd_test_servers(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Qft(args) => cmd_qft(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ProtocolAbort(_) | Error::ContinuousModeAudit => 3,
        Error::MalformedResponse(_) => 4,
        _ => 2,
    }
}

/// Seed precedence: GTUBQC_SEED env, then --seed, then the plan file, then
/// a fresh recorded value (always echoed in the report for replay).
fn resolve_seed(flag: Option<u64>, plan_seed: Option<u64>) -> u64 {
    if let Ok(v) = std::env::var("GTUBQC_SEED") {
        if let Ok(n) = v.parse::<u64>() {
            return n;
        }
    }
    flag.or(plan_seed).unwrap_or_else(|| {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        let mut h = DefaultHasher::new();
        now.hash(&mut h);
        std::process::id().hash(&mut h);
        h.finish()
    })
}

fn config_hash(parts: &[String]) -> String {
    let mut h = DefaultHasher::new();
    for p in parts {
        p.hash(&mut h);
    }
    format!("{:016x}", h.finish())
}

fn read_plan(path: &PathBuf) -> Result<PlanFile, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let file = read_plan(&args.plan)?;
    let gates = file.parse_gates()?;
    let plan = compile_gates(&gates, file.wires, EulerOrder::Zyz)?;
    let seed = resolve_seed(args.seed, file.seed);
    let dim = 1usize << file.wires;
    if args.input >= dim {
        return Err(Error::InvalidPlan(format!(
            "input index {} out of range for {} wires",
            args.input, file.wires
        )));
    }
    let input = StateVector::basis(file.wires, args.input);
    let out = run_computation(&plan, &input, &SessionConfig::new(seed))?;
    let expected = apply_all(&plan_unitary(&plan)?, &input)?;
    let fidelity = out.output.fidelity(&expected);
    std::fs::write(&args.transcript, out.transcript.to_json_lines(args.include_secrets)?)?;
    let report = json!({
        "command": "run",
        "version": VERSION,
        "config_hash": config_hash(&[
            format!("{:?}", args.plan), seed.to_string(), args.input.to_string(),
            args.include_secrets.to_string(),
        ]),
        "seed": seed,
        "mode": plan.mode,
        "steps": plan.steps.len(),
        "messages": out.transcript.messages.len(),
        "fidelity": fidelity,
        "transcript": args.transcript,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn apply_all(u: &Unitary, input: &StateVector) -> Result<StateVector, Error> {
    let wires: Vec<usize> = (0..input.num_qubits()).collect();
    apply_unitary(input, u, &wires)
}

fn parse_matrix_file(path: &PathBuf) -> Result<Unitary, Error> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)?;
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(Error::InvalidPlan("matrix file must be 2x2".into()));
    }
    let entries: Vec<Complex> = rows
        .iter()
        .flat_map(|r| r.iter().map(|&[re, im]| Complex::new(re, im)))
        .collect();
    Ok(Unitary::from_entries_unchecked(2, entries))
}

fn cmd_decompose(args: DecomposeArgs) -> Result<(), Error> {
    let (label, matrix) = if let Some(path) = &args.matrix {
        (format!("{}", path.display()), parse_matrix_file(path)?)
    } else {
        let name = args.gate.clone().ok_or_else(|| {
            Error::InvalidPlan("give a gate name or --matrix FILE".into())
        })?;
        let m = if name.eq_ignore_ascii_case("i") {
            Unitary::identity(2)
        } else {
            NamedGate::parse(&name.to_uppercase())
                .ok_or_else(|| Error::UnsupportedGate(name.clone()))?
                .matrix()
        };
        (name, m)
    };
    let residual = matrix.unitarity_residual();
    if residual > 1e-9 {
        return Err(Error::NotUnitary { residual });
    }
    let orders: Vec<EulerOrder> = if args.order == "all" {
        vec![
            EulerOrder::Zyz,
            EulerOrder::Zxz,
            EulerOrder::Xyx,
            EulerOrder::Xzx,
            EulerOrder::Yxy,
            EulerOrder::Yzy,
        ]
    } else {
        vec![EulerOrder::parse(&args.order)
            .ok_or_else(|| Error::InvalidPlan(format!("unknown order '{}'", args.order)))?]
    };
    let mut euler_reports = Vec::new();
    for order in orders {
        let triple = euler_decompose(&matrix, order)?;
        let recon_residual = triple.reconstruct().max_abs_diff(&matrix);
        euler_reports.push(json!({
            "order": order.name(),
            "phase": triple.phase,
            "alpha": triple.alpha,
            "beta": triple.beta,
            "gamma": triple.gamma,
            "reconstruction_residual": recon_residual,
        }));
    }
    let abc = abc_decompose(&matrix)?;
    let abc_identity = abc.abc_product().max_abs_diff(&Unitary::identity(2));
    let abc_recon = abc.reconstruct().max_abs_diff(&matrix);
    let report = json!({
        "command": "decompose",
        "version": VERSION,
        "input": label,
        "unitarity_residual": residual,
        "euler": euler_reports,
        "abc": {
            "alpha": abc.alpha,
            "abc_identity_residual": abc_identity,
            "reconstruction_residual": abc_recon,
        },
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn parse_behavior(s: &str) -> Result<AdversaryBehavior, Error> {
    if s == "honest" {
        return Ok(AdversaryBehavior::Honest);
    }
    if s == "flip-b1" {
        return Ok(AdversaryBehavior::FlipOutcomeBit(0));
    }
    if s == "flip-b2" {
        return Ok(AdversaryBehavior::FlipOutcomeBit(1));
    }
    if s == "skip" {
        return Ok(AdversaryBehavior::SkipRotation);
    }
    if let Some(code) = s.strip_prefix("fixed:") {
        let bytes = code.as_bytes();
        if bytes.len() == 2 && bytes.iter().all(|b| *b == b'0' || *b == b'1') {
            return Ok(AdversaryBehavior::FixedOutcome(BellCode::new(
                bytes[0] - b'0',
                bytes[1] - b'0',
            )));
        }
        return Err(Error::InvalidPlan(format!("bad bell code '{code}'")));
    }
    if let Some(rad) = s.strip_prefix("offset:") {
        let delta: f64 = rad
            .parse()
            .map_err(|_| Error::InvalidPlan(format!("bad offset '{rad}'")))?;
        return Ok(AdversaryBehavior::AngleOffset(delta));
    }
    Err(Error::InvalidPlan(format!("unknown behavior '{s}'")))
}

fn parse_axis(s: &str) -> Result<Axis, Error> {
    match s.to_lowercase().as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        other => Err(Error::InvalidPlan(format!("unknown axis '{other}'"))),
    }
}

fn cmd_test_servers(args: TestServersArgs) -> Result<(), Error> {
    let behavior = parse_behavior(&args.behavior)?;
    let target = match args.target {
        TargetServer::Server1 => PartyRole::Server1,
        TargetServer::Server2 => PartyRole::Server2,
    };
    let adversaries = [AdversaryModel { behavior, target }];
    let axis = parse_axis(&args.axis)?;
    let theta = Angle::grid(args.theta_quarters);
    let seed = resolve_seed(args.seed, None);
    let mut rng = gtubqc::qcore::session_rng(seed);
    let codes = (BellCode::new(0, 0), BellCode::new(0, 0));
    let predicted = rotation_detection_probability(codes, axis, theta, &adversaries)?;
    let verdict = rotation_test(codes, axis, theta, &adversaries, args.trials, &mut rng)?;
    let mut report = json!({
        "command": "test-servers",
        "version": VERSION,
        "seed": seed,
        "behavior": args.behavior,
        "trials": args.trials,
        "rotation": {
            "passed": verdict.passed,
            "failures": verdict.failures,
            "observed_detection_rate": verdict.failures as f64 / args.trials as f64,
            "predicted_detection_rate": predicted,
            "honest_support_size": verdict.honest_support.len(),
        },
    });
    if args.controlled {
        let ccodes = [BellCode::new(0, 0); 4];
        let cpred = controlled_detection_probability(ccodes, Axis::Z, theta, &adversaries)?;
        let cv = controlled_test(ccodes, Axis::Z, theta, &adversaries, args.trials, &mut rng)?;
        report["controlled"] = json!({
            "passed": cv.passed,
            "failures": cv.failures,
            "observed_detection_rate": cv.failures as f64 / args.trials as f64,
            "predicted_detection_rate": cpred,
            "honest_support_size": cv.honest_support.len(),
        });
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_audit(args: AuditArgs) -> Result<(), Error> {
    let file = read_plan(&args.plan)?;
    let gates = file.parse_gates()?;
    let plan = compile_gates(&gates, file.wires, EulerOrder::Zyz)?;
    let seed = resolve_seed(args.seed, file.seed);
    let steps: Vec<usize> = if args.steps.is_empty() {
        (0..plan.steps.len()).collect()
    } else {
        args.steps.clone()
    };
    let angle_report = blindness_audit_angles(&plan)?;
    let input = StateVector::basis(file.wires, 0);
    let distance = blindness_audit_inputs(&plan, &input, &steps, seed)?;
    let report = json!({
        "command": "audit",
        "version": VERSION,
        "seed": seed,
        "mode": plan.mode,
        "input_audit": {
            "steps": steps,
            "max_trace_distance_from_mixed": distance,
        },
        "angle_audit": {
            "uniform": angle_report.uniform,
            "max_total_variation": angle_report.max_total_variation,
            "steps": angle_report.steps.iter().map(|s| json!({
                "step": s.step,
                "controlled": s.controlled,
                "counts": s.counts,
            })).collect::<Vec<_>>(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_qft(args: QftArgs) -> Result<(), Error> {
    let seed = resolve_seed(args.seed, None);
    let dim = 1usize
        .checked_shl(args.n as u32)
        .ok_or(Error::QubitCountOutOfRange(args.n))?;
    if args.input >= dim {
        return Err(Error::InvalidPlan(format!(
            "input index {} out of range for n={}",
            args.input, args.n
        )));
    }
    let input = StateVector::basis(args.n, args.input);
    let expected = apply_all(&dft_matrix(args.n), &input)?;
    let report = if args.direct {
        let circuit = qft_circuit(args.n)?;
        let out = apply_all(&circuit.unitary()?, &input)?;
        json!({
            "command": "qft",
            "version": VERSION,
            "n": args.n,
            "blind": false,
            "gates": circuit.gates.len(),
            "fidelity_vs_dft": out.fidelity(&expected),
        })
    } else {
        let (out, transcript) = run_blind_qft(args.n, &input, seed)?;
        if let Some(path) = &args.transcript {
            std::fs::write(path, transcript.to_json_lines(args.include_secrets)?)?;
        }
        json!({
            "command": "qft",
            "version": VERSION,
            "n": args.n,
            "blind": true,
            "seed": seed,
            "mode": transcript.mode,
            "messages": transcript.messages.len(),
            "fidelity_vs_dft": out.fidelity(&expected),
        })
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

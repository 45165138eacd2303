use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shadow_simplex::bounding::{bound_global, bound_local};
use shadow_simplex::feasibility::{phase1_global_delta, phase1_subdeterminant, Phase1Outcome, Phase1Verdict};
use shadow_simplex::geometry::{
    delta_from_subdeterminants, global_delta, local_delta_with_witness, matching_cycle_checks,
    matching_width_certificate, max_subdeterminant, MatchingInstance,
};
use shadow_simplex::harness::{
    diameter_path, fan_width_sq, generate_instance, run_experiment, ExperimentConfig, ExperimentKind, GenParams,
    InstanceKind, NormalFan,
};
use shadow_simplex::io::{parse_vector_str, rationals_to_json, Instance};
use shadow_simplex::numeric::{format_rational, parse_rational};
use shadow_simplex::optimize::{optimize_with_halving, Phase2Options};
use shadow_simplex::sampler::trial_rng;
use shadow_simplex::{Basis, Error, Polyhedron, Rational};

#[derive(Parser)]
#[command(name = "shadow", version, about = "Exact shadow simplex toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance
    Gen(GenArgs),
    /// Maximize an objective over an instance
    Solve(SolveArgs),
    /// Decide feasibility and find a feasible basis
    Feasible(FeasibleArgs),
    /// Add rows that make a pointed polyhedron bounded
    Bound(BoundArgs),
    /// Compute δ², τ², subdeterminant bounds or matching certificates
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Walk between two vertices along the diameter construction
    Diameter(DiameterArgs),
    /// Run a seeded Monte Carlo experiment
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: InstanceKind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 2)]
    max_entry: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Comma-separated objective, e.g. "1,-1/2,0"
    #[arg(long, allow_hyphen_values = true)]
    objective: String,
    /// Comma-separated feasible basis; found by phase 1 when omitted
    #[arg(long)]
    start: Option<String>,
    /// Assumed δ²; computed by enumeration when omitted
    #[arg(long)]
    delta_sq: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the pivot trace as JSON lines
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Resamples allowed per level after a degenerate segment
    #[arg(long)]
    max_retries: Option<usize>,
    /// Follow the unshifted segments (no random perturbation of the path)
    #[arg(long)]
    zero_shift: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Phase1Method {
    Global,
    Subdet,
}

#[derive(Args)]
struct FeasibleArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Phase1Method::Global)]
    method: Phase1Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMode {
    Local,
    Global,
}

#[derive(Args)]
struct BoundArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = BoundMode::Local)]
    mode: BoundMode,
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    delta_sq: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// Local and global δ² by enumeration
    Delta { instance: PathBuf },
    /// Width τ² of the normal fan of a polytope
    Tau { instance: PathBuf },
    /// δ and τ lower bounds from subdeterminants of an integral matrix
    Subdet { instance: PathBuf },
    /// Odd-set certificates for perfect matching polytope vertices
    Matching(MatchingArgs),
}

#[derive(Args)]
struct MatchingArgs {
    #[arg(long, conflicts_with = "cycle")]
    complete: Option<usize>,
    #[arg(long)]
    cycle: Option<usize>,
    /// Comma-separated edge indices; every perfect matching when omitted
    #[arg(long)]
    matching: Option<String>,
}

#[derive(Args)]
struct DiameterArgs {
    instance: PathBuf,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    tau_sq: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    instance: PathBuf,
    #[arg(long, value_parser = parse_experiment)]
    kind: ExperimentKind,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    tau_sq: Option<String>,
    #[arg(long)]
    delta_sq: Option<String>,
    /// Per-trial rows
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of a subcommand: a JSON document plus the exit status.
struct Report {
    body: Value,
    code: u8,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report { body, code: 0 }
    }
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(Error::NoFeasibleBasis) => 2,
            Failure::Lib(Error::Unbounded | Error::UnboundedDirection(_)) => 3,
            Failure::Lib(Error::RetriesExhausted(_)) => 4,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(s) => s.clone(),
        }
    }
}

type CmdResult = Result<Report, Failure>;

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Instance::parse(&text)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, Failure> {
    Ok(parse_rational(s.trim()).map_err(Error::from)?)
}

fn basis_arg(s: &str, p: &Polyhedron) -> Result<Basis, Failure> {
    let idx = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Io(format!("bad basis {s:?}: {e}")))?;
    if idx.len() != p.dim() || idx.iter().any(|&i| i >= p.num_rows()) {
        return Err(Error::BadParams(format!("basis needs {} row indices below {}", p.dim(), p.num_rows())).into());
    }
    Ok(Basis::new(idx))
}

fn vector_arg(s: &str, n: usize) -> Result<Vec<Rational>, Failure> {
    let v = parse_vector_str(s)?;
    if v.len() != n {
        return Err(Error::BadParams(format!("expected {n} entries, got {}", v.len())).into());
    }
    Ok(v)
}

fn basis_json(b: &Basis) -> Value {
    json!(b.indices())
}

fn phase1_json(out: &Phase1Outcome) -> Value {
    match &out.verdict {
        Phase1Verdict::Feasible(r) => json!({
            "feasible": true,
            "basis": basis_json(&r.basis),
            "vertex": rationals_to_json(&r.vertex),
            "rounds": out.rounds,
            "pivots": out.pivots,
        }),
        Phase1Verdict::Infeasible(w) => json!({
            "feasible": false,
            "witness": w.to_json(),
            "rounds": out.rounds,
            "pivots": out.pivots,
        }),
    }
}

fn gen(a: GenArgs) -> CmdResult {
    let mut rng = trial_rng(a.seed, 0);
    let params = GenParams {
        n: a.n,
        m: a.m,
        max_entry: a.max_entry,
    };
    let inst = generate_instance(a.kind, &params, &mut rng)?.with_meta("seed", json!(a.seed));
    let text = serde_json::to_string_pretty(&inst.to_json()).expect("json");
    if a.output.is_some() {
        write_out(a.output.as_deref(), &text)?;
        Ok(Report::ok(Value::Object(inst.meta)))
    } else {
        Ok(Report::ok(inst.to_json()))
    }
}

/// A feasible basis, or the phase-1 report for an empty polyhedron.
fn find_start<R: rand::Rng>(p: &Polyhedron, rng: &mut R) -> Result<Result<Basis, Phase1Outcome>, Failure> {
    let out = phase1_global_delta(p, &global_delta(p.matrix()), rng)?;
    Ok(match out.verdict {
        Phase1Verdict::Feasible(ref r) => Ok(r.basis.clone()),
        Phase1Verdict::Infeasible(_) => Err(out),
    })
}

fn solve(a: SolveArgs) -> CmdResult {
    let p = load(&a.instance)?.poly;
    let d = vector_arg(&a.objective, p.dim())?;
    let mut rng = trial_rng(a.seed, 0);
    let start = match &a.start {
        Some(s) => {
            let b = basis_arg(s, &p)?;
            p.feasible_vertex(&b)?;
            b
        }
        None => match find_start(&p, &mut rng)? {
            Ok(b) => b,
            Err(out) => {
                return Ok(Report {
                    body: json!({"status": "infeasible", "phase1": phase1_json(&out)}),
                    code: 2,
                })
            }
        },
    };
    let delta_sq = match &a.delta_sq {
        Some(s) => rational_arg(s)?,
        None => local_delta_with_witness(&p)?.0,
    };
    let bounded = p.is_bounded();
    let (work, work_delta) = if bounded {
        (p.clone(), delta_sq.clone())
    } else {
        let (pp, rep) = bound_local(&p, &start, &delta_sq)?;
        (pp, rep.delta_sq_after)
    };
    let mut opts = Phase2Options {
        force_zero_x: a.zero_shift,
        ..Phase2Options::default()
    };
    if let Some(k) = a.max_retries {
        opts.max_retries = k;
    }
    let out = optimize_with_halving(&work, &work_delta, &start, &d, &mut rng, &opts, 64)?;
    let basis = &out.outcome.basis;
    if let Some(path) = &a.trace {
        let lines: String = out.outcome.traces.iter().map(|t| t.to_json_lines()).collect();
        fs::write(path, lines).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    let summary = json!({
        "pivots": out.outcome.pivots(),
        "depth": out.outcome.depth(),
        "halvings": out.halvings,
        "delta_sq": format_rational(&out.delta_sq),
    });
    // an optimum on the added row means no original vertex is optimal
    if basis.indices().iter().any(|&i| i >= p.num_rows()) {
        return Ok(Report {
            body: json!({"status": "unbounded", "run": summary}),
            code: 3,
        });
    }
    let x = p.feasible_vertex(basis)?;
    let value: Rational = x.iter().zip(&d).map(|(u, v)| u * v).sum();
    Ok(Report::ok(json!({
        "status": "optimal",
        "basis": basis_json(basis),
        "vertex": rationals_to_json(&x),
        "value": format_rational(&value),
        "run": summary,
    })))
}

fn feasible(a: FeasibleArgs) -> CmdResult {
    let p = load(&a.instance)?.poly;
    let mut rng = trial_rng(a.seed, 0);
    let out = match a.method {
        Phase1Method::Global => phase1_global_delta(&p, &global_delta(p.matrix()), &mut rng)?,
        Phase1Method::Subdet => phase1_subdeterminant(&p, &max_subdeterminant(p.matrix())?, &mut rng)?,
    };
    let code = if out.is_feasible() { 0 } else { 2 };
    Ok(Report {
        body: phase1_json(&out),
        code,
    })
}

fn bound(a: BoundArgs) -> CmdResult {
    let inst = load(&a.instance)?;
    let p = &inst.poly;
    let mut rng = trial_rng(a.seed, 0);
    let (pp, rep) = match a.mode {
        BoundMode::Local => {
            let basis = match &a.basis {
                Some(s) => basis_arg(s, p)?,
                None => match find_start(p, &mut rng)? {
                    Ok(b) => b,
                    Err(out) => {
                        return Ok(Report {
                            body: json!({"status": "infeasible", "phase1": phase1_json(&out)}),
                            code: 2,
                        })
                    }
                },
            };
            let delta_sq = match &a.delta_sq {
                Some(s) => rational_arg(s)?,
                None => local_delta_with_witness(p)?.0,
            };
            bound_local(p, &basis, &delta_sq)?
        }
        BoundMode::Global => {
            let delta_sq = match &a.delta_sq {
                Some(s) => rational_arg(s)?,
                None => global_delta(p.matrix()),
            };
            bound_global(p, &delta_sq)?
        }
    };
    let out = Instance {
        poly: pp,
        meta: inst.meta.clone(),
    }
    .with_meta("bounding", rep.to_json());
    let text = serde_json::to_string_pretty(&out.to_json()).expect("json");
    if a.output.is_some() {
        write_out(a.output.as_deref(), &text)?;
        Ok(Report::ok(rep.to_json()))
    } else {
        Ok(Report::ok(out.to_json()))
    }
}

fn certify(c: CertifyCmd) -> CmdResult {
    match c {
        CertifyCmd::Delta { instance } => {
            let p = load(&instance)?.poly;
            let (local, witness) = local_delta_with_witness(&p)?;
            Ok(Report::ok(json!({
                "local_delta_sq": format_rational(&local),
                "local_witness": basis_json(&witness),
                "global_delta_sq": format_rational(&global_delta(p.matrix())),
            })))
        }
        CertifyCmd::Tau { instance } => {
            let p = load(&instance)?.poly;
            let fan = NormalFan::new(&p)?;
            Ok(Report::ok(json!({
                "tau_sq": format_rational(&fan_width_sq(&p, &fan)),
                "vertices": fan.vertices.len(),
                "edges": fan.edges.len(),
            })))
        }
        CertifyCmd::Subdet { instance } => {
            let p = load(&instance)?.poly;
            let b = delta_from_subdeterminants(p.matrix())?;
            Ok(Report::ok(json!({
                "delta_1": b.delta_1.to_string(),
                "delta_n_minus_1": b.delta_n1.to_string(),
                "delta": format_rational(&b.delta),
                "tau": format_rational(&b.tau),
            })))
        }
        CertifyCmd::Matching(m) => certify_matching(m),
    }
}

fn certify_matching(m: MatchingArgs) -> CmdResult {
    let g = match (m.complete, m.cycle) {
        (Some(k), None) => MatchingInstance::complete(k),
        (None, Some(k)) => MatchingInstance::cycle(k),
        _ => return Err(Error::BadParams("give exactly one of --complete, --cycle".into()).into()),
    };
    let matchings = match &m.matching {
        Some(s) => vec![s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Io(format!("bad matching {s:?}: {e}")))?],
        None => g.perfect_matchings(),
    };
    let mut all = true;
    let mut rows = Vec::new();
    for mm in matchings {
        let gm = g.with_matching(mm.clone());
        let cert = matching_width_certificate(&gm)?;
        let cycles = matching_cycle_checks(&gm, &cert.w);
        let cycles_ok = cycles.iter().all(|c| c.holds());
        let holds = cert.matched_edges_ok && cert.unmatched_edges_ok && cycles_ok && cert.tau_bound_holds(g.edges.len());
        all &= holds;
        rows.push(json!({
            "matching": mm,
            "w": cert.w,
            "tau_sq": format_rational(&cert.tau_sq),
            "matched_edges_ok": cert.matched_edges_ok,
            "unmatched_edges_ok": cert.unmatched_edges_ok,
            "cycle_checks": cycles.len(),
            "cycles_ok": cycles_ok,
            "holds": holds,
        }));
    }
    Ok(Report {
        body: json!({"edges": g.edges.len(), "certificates": rows, "all_hold": all}),
        code: if all { 0 } else { 1 },
    })
}

fn diameter(a: DiameterArgs) -> CmdResult {
    let p = load(&a.instance)?.poly;
    let fan = NormalFan::new(&p)?;
    let from = match &a.from {
        Some(s) => basis_arg(s, &p)?,
        None => fan.vertices[0].bases[0].clone(),
    };
    let to = match &a.to {
        Some(s) => basis_arg(s, &p)?,
        None => {
            let u = fan.vertex_of_basis(&from).ok_or(Error::InfeasibleBasis)?;
            fan.vertices[fan.farthest_from(u)].bases[0].clone()
        }
    };
    let tau_sq = match &a.tau_sq {
        Some(s) => rational_arg(s)?,
        None => fan_width_sq(&p, &fan),
    };
    let mut rng = trial_rng(a.seed, 0);
    let path = diameter_path(&p, &from, &to, &tau_sq, &mut rng)?;
    Ok(Report::ok(json!({
        "from": basis_json(&from),
        "to": basis_json(&to),
        "length": path.length(),
        "pivots": path.trace.pivots(),
        "retries": path.retries,
        "bound": path.bound,
        "tau_sq": format_rational(&tau_sq),
        "valid": path.is_valid(&p, &fan, &from, &to),
        "vertices": path.vertices.iter().map(|v| rationals_to_json(v)).collect::<Vec<_>>(),
        "bases": path.bases.iter().map(basis_json).collect::<Vec<_>>(),
    })))
}

fn experiment(a: ExperimentArgs) -> CmdResult {
    let p = load(&a.instance)?.poly;
    let n = p.dim();
    let mut cfg = ExperimentConfig::new(a.kind, a.trials, a.seed);
    cfg.c = a.c.as_deref().map(|s| vector_arg(s, n)).transpose()?;
    cfg.d = a.d.as_deref().map(|s| vector_arg(s, n)).transpose()?;
    cfg.alpha = a.alpha.as_deref().map(rational_arg).transpose()?;
    cfg.tau_sq = a.tau_sq.as_deref().map(rational_arg).transpose()?;
    cfg.delta_sq = a.delta_sq.as_deref().map(rational_arg).transpose()?;
    let r = run_experiment(&p, &cfg)?;
    if let Some(path) = &a.csv {
        fs::write(path, &r.csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Report::ok(r.summary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Feasible(a) => feasible(a),
        Command::Bound(a) => bound(a),
        Command::Certify(c) => certify(c),
        Command::Diameter(a) => diameter(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(r) => {
            println!("{}", serde_json::to_string_pretty(&r.body).expect("json"));
            ExitCode::from(r.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

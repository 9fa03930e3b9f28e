use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tricover::elm::oracle::blowup_oracle_check_with;
use tricover::elm::resolve::{resolve_with, Strategy};
use tricover::elm::{ElmState, Engine, Fault};
use tricover::report::{Report, Status};
use tricover::ruled::{m_invariant, Bundle, RuledSurfaceModel, Splitting};
use tricover::scenario::Scenario;
use tricover::suites::{self, Grid, VerifyConfig, DEFAULT_SEED};
use tricover::theorems::bounds::cs_threshold;
use tricover::theorems::construction::minimal_planned_degree;
use tricover::theorems::{
    cs_classical, execute_plan, gonality_consequence, minimal_degree_characterization, pencil_degree_range,
    plan_construction, theorem_a_threshold, theorem_b_bound, verdict, PlanOutcome, ThresholdA, Verdict,
};

#[derive(Parser)]
#[command(name = "tricover", version, about = "Ruled surfaces, trisections and elementary transformations")]
struct Cli {
    /// Also write the report as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    NegateEUpdate,
    KeepDeltaOnR2,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::NegateEUpdate => Fault::NegateEUpdate,
            FaultArg::KeepDeltaOnR2 => Fault::KeepDeltaOnR2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Default,
    Large,
}

#[derive(Subcommand)]
enum Cmd {
    /// Castelnuovo–Severi, lower bound and threshold for a Tschirnhausen surface.
    Bounds {
        #[arg(long)]
        gx: i64,
        #[arg(long)]
        gy: i64,
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
        #[arg(long)]
        d: Option<i64>,
        /// Treat the Tschirnhausen bundle as split.
        #[arg(long)]
        decomposable: bool,
        /// Skip the parity check.
        #[arg(long)]
        raw: bool,
    },
    /// Run the elm script of a scenario with per-step oracle checks.
    Run {
        scenario: PathBuf,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Resolve the trisection singularities of a scenario.
    Resolve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "exhaustive")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, allow_hyphen_values = true)]
        target_e: Option<i64>,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Plan and execute the pencil construction for degree d.
    Plan {
        #[arg(long)]
        gy: i64,
        #[arg(long)]
        gx: i64,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        halphen: bool,
    },
    /// Run every identity suite.
    VerifyPaper {
        #[arg(long, value_enum, default_value = "default")]
        grid: GridArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<Report, InputError>;

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::MustFactor => "MustFactor",
        Verdict::Impossible => "Impossible",
        Verdict::MinimalRequiresDecomposable => "MinimalRequiresDecomposable",
        Verdict::Guaranteed => "Guaranteed",
        Verdict::Unknown => "Unknown",
    }
}

fn bounds(gx: i64, gy: i64, e: i64, d: Option<i64>, decomposable: bool, raw: bool) -> CmdResult {
    let mut rep = Report::new(format!("bounds --gx {gx} --gy {gy} --e {e}{}", d.map(|d| format!(" --d {d}")).unwrap_or_default()));
    let b = gx - 3 * gy + 2;
    let m = if raw {
        RuledSurfaceModel { g_y: gy, g_x: gx, b, n: (b + e).div_euclid(2), e, bundle: Bundle::Unknown, raw: true }
    } else {
        let mut m = RuledSurfaceModel::tschirnhausen(gy, gx, e)?;
        if decomposable {
            if e < 0 {
                return Err(InputError(format!("a split bundle has e ≥ 0, got {e}")));
            }
            m.bundle = Bundle::Decomposable(Splitting::new((b - e) / 2, (b + e) / 2));
        }
        m
    };
    if raw {
        rep.info("parity", "not checked (--raw)");
    }
    let cs = cs_threshold(gx, gy, 3)?;
    rep.info("CS threshold", format!("(g_x − 3g_y + 2)/2 = ({gx} − {} + 2)/2 = {cs}, ceiling {}", 3 * gy, cs.ceil()));
    let bound = theorem_b_bound(&m);
    rep.info("lower bound", format!("(b + |e|)/2 = ({b} + {})/2 = {bound}", e.abs()));
    let ta = theorem_a_threshold(&m);
    match &ta {
        ThresholdA::Threshold(a) => {
            rep.info("threshold", format!("(b + |e|)/2 + 4g_y = {bound} + {} = {a}", 4 * gy))
        }
        ThresholdA::PreconditionFailed(why) => rep.info("threshold", format!("undefined: {why}")),
    }
    let parity_ok = (b - e).rem_euclid(2) == 0;
    let mm = parity_ok.then(|| m_invariant(&m));
    match mm {
        Some(v) => rep.info("m invariant", format!("(b − |e|)/2 − 2 = ({b} − {})/2 − 2 = {v}", e.abs())),
        None => rep.info("m invariant", "undefined: b − e is odd"),
    }
    rep.check(
        "ordering",
        cs.ceil() <= bound && ta.value().is_none_or(|a| bound <= a),
        format!("⌈CS⌉ = {} ≤ {bound}{}", cs.ceil(), ta.value().map(|a| format!(" ≤ {a}")).unwrap_or_default()),
    );
    let gon = gonality_consequence(gx, gy, 3)?;
    if let Some(c) = &gon.conclusion {
        rep.info("gonality", format!("g_x ≥ 9g_y + 4 = {}: {c}", gon.genus_floor));
    }
    let range = if parity_ok { pencil_degree_range(&m).ok() } else { None };
    if let Some(r) = &range {
        let regimes: Vec<String> = r
            .regimes
            .iter()
            .map(|g| format!("{:?} {}..{}", g.justification, g.lo, g.hi.map(|h| h.to_string()).unwrap_or_default()))
            .collect();
        rep.info("pencil degrees", regimes.join(", "));
        if !r.gaps.is_empty() {
            rep.info("pencil gaps", format!("{:?}", r.gaps));
        }
    }
    let mut data = json!({
        "model": m,
        "cs": cs,
        "cs_ceil": cs.ceil(),
        "theorem_b": bound,
        "theorem_a": ta,
        "m": mm,
        "pencil_range": range,
        "gonality": gon,
    });
    if let Some(d) = d {
        if d < 1 {
            return Err(InputError(format!("d = {d} < 1")));
        }
        let v = verdict(&m, d);
        let classical = cs_classical(gx, gy, 3, d)?;
        rep.info("verdict", format!("d = {d}: {}", verdict_name(v.verdict)));
        rep.info("classical", format!("d = {d}: {}", verdict_name(classical.verdict)));
        if v.verdict == Verdict::Unknown {
            rep.info("open", "whether a nontrivial morphism of this degree exists is not decided here");
        }
        data["d"] = json!(d);
        data["verdict"] = json!(v);
        data["classical"] = json!(classical);
    }
    rep.data = data;
    Ok(rep)
}

fn load(path: &Path) -> Result<(Scenario, ElmState), InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let sc = Scenario::from_json(&text)?;
    let st = sc.build_state()?;
    Ok((sc, st))
}

fn engine(f: Option<FaultArg>) -> Engine {
    Engine { fault: f.map(Fault::from) }
}

fn opt(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

fn bundle_str(b: &Bundle) -> String {
    match b {
        Bundle::Unknown => "unknown".into(),
        Bundle::Indecomposable => "indecomposable".into(),
        Bundle::Decomposable(s) => match &s.formal {
            Some((f1, f2)) => format!("O({f1}) ⊕ O({f2}), degrees ({}, {})", s.b1, s.b2),
            None => format!("split, degrees ({}, {})", s.b1, s.b2),
        },
    }
}

fn summary(st: &ElmState) -> serde_json::Value {
    json!({
        "e": st.surface.e,
        "b": st.surface.b,
        "bundle": st.surface.bundle,
        "sections": st.sections.iter().map(|s| (s.id.clone(), s.class.to_string())).collect::<std::collections::BTreeMap<_, _>>(),
        "trisection": st.trisection.as_ref().map(|t| t.class.to_string()),
        "total_delta": st.total_delta(),
        "genus": st.trisection_genus().ok().flatten(),
    })
}

fn run(path: &Path, fault: Option<FaultArg>) -> CmdResult {
    let (sc, initial) = load(path)?;
    let mut rep = Report::new(format!("run {}", path.display()));
    let eng = engine(fault);
    let genus = initial.trisection_genus().ok().flatten();
    let mut cur = initial.clone();
    let mut trace = Vec::new();
    for (i, step) in sc.script.iter().enumerate() {
        let oracle = blowup_oracle_check_with(&eng, &cur, step);
        let next = match eng.apply(&cur, step) {
            Ok(n) => n,
            Err(err) => {
                rep.check(format!("step {i}"), false, format!("{}: {err}", step.center));
                trace.push(json!({"index": i, "step": step, "error": err.to_string()}));
                break;
            }
        };
        let mut flags = Vec::new();
        if next.history.last().is_some_and(|h| h.undo.exhausted_chain()) {
            flags.push("chain exhausted");
        }
        rep.check(
            format!("step {i} oracle"),
            oracle.agrees(),
            format!(
                "{} on {}: e {} → {}, Σδ {} → {}{}",
                step.center,
                step.fiber,
                cur.surface.e,
                next.surface.e,
                cur.total_delta(),
                next.total_delta(),
                if flags.is_empty() { String::new() } else { format!(" [{}]", flags.join(", ")) }
            ),
        );
        trace.push(json!({"index": i, "step": step, "oracle": oracle, "flags": flags, "state": summary(&next)}));
        cur = next;
    }
    if sc.trisection.is_some() {
        let g = cur.trisection_genus().ok().flatten();
        rep.check("genus preserved", g == genus, format!("{} → {}", opt(genus), opt(g)));
    }
    let mut minimal = None;
    if sc.checks.minimal_degree {
        match minimal_degree_characterization(&initial) {
            Ok(r) => {
                rep.check(
                    "minimal degree",
                    r.consistent,
                    format!("{}; relation {}, final trivial {}", if r.consistent { "Consistent" } else { "Inconsistent" }, r.relation_holds, r.final_trivial),
                );
                minimal = Some(r);
            }
            Err(err) => rep.check("minimal degree", false, err.to_string()),
        }
    }
    if let Some(e) = sc.checks.expect_final_e {
        rep.check("final e", cur.surface.e == e, format!("{} (expected {e})", cur.surface.e));
    }
    if let Some(z) = sc.checks.expect_final_fib_deg {
        let got = cur.trisection.as_ref().map(|t| t.class.fib_deg);
        rep.check("final fiber degree", got == Some(z), format!("{} (expected {z})", opt(got)));
    }
    let fin = summary(&cur);
    rep.info(
        "final",
        format!(
            "e = {}, bundle = {}, trisection = {}, Σδ = {}",
            cur.surface.e,
            bundle_str(&cur.surface.bundle),
            fin["trisection"].as_str().unwrap_or("none"),
            cur.total_delta()
        ),
    );
    rep.data = json!({"scenario": sc.name, "steps": trace, "final": fin, "minimal_degree": minimal});
    Ok(rep)
}

fn resolve(path: &Path, strategy: StrategyArg, budget: usize, target_e: Option<i64>, fault: Option<FaultArg>) -> CmdResult {
    let (sc, mut st) = load(path)?;
    let mut rep = Report::new(format!("resolve {}", path.display()));
    let eng = engine(fault);
    for step in &sc.script {
        st = eng.apply(&st, step).map_err(|e| InputError(format!("script step {}: {e}", step.center)))?;
    }
    let strat = match strategy {
        StrategyArg::Greedy => Strategy::Greedy,
        StrategyArg::Exhaustive => Strategy::Exhaustive { budget },
    };
    let delta = st.total_delta();
    match resolve_with(&eng, &st, strat, target_e) {
        Ok(r) => {
            rep.check("resolved", r.state.total_delta() == 0, format!("Σδ {delta} → {}", r.state.total_delta()));
            rep.check("length", r.alpha as i64 <= delta, format!("α = {} ≤ Σδ = {delta}", r.alpha));
            rep.info("e", format!("{} → {} (Δe = {})", st.surface.e, r.state.surface.e, r.delta_e));
            if let Some(t) = target_e {
                rep.check("target e", r.state.surface.e == t, format!("{} (target {t})", r.state.surface.e));
            }
            let centers: Vec<String> = r
                .steps
                .iter()
                .map(|s| format!("{}{}", s.fiber, if s.on_min_section { "+" } else { "−" }))
                .collect();
            rep.info("steps", centers.join(" "));
            rep.data = serde_json::to_value(&r)?;
        }
        Err(err) => rep.check("resolved", false, err.to_string()),
    }
    Ok(rep)
}

fn plan(gy: i64, gx: i64, d: i64, halphen: bool) -> CmdResult {
    let mut rep = Report::new(format!("plan --gy {gy} --gx {gx} --d {d}{}", if halphen { " --halphen" } else { "" }));
    match plan_construction(gy, gx, d, halphen)? {
        PlanOutcome::Infeasible(why) => {
            let floor = minimal_planned_degree(gy, gx, halphen);
            if d >= floor {
                rep.check("plan", false, format!("Infeasible for d ≥ {floor}: {why}"));
            } else {
                rep.info("plan", format!("Infeasible: {why}"));
            }
            rep.data = json!({"infeasible": why, "floor": floor});
        }
        PlanOutcome::Plan(p) => {
            rep.info("route", format!("{:?}", p.route));
            rep.info(
                "degrees",
                format!("deg D = {}, deg D′ = {}, b1 = {}, b2 = {}", p.degrees.deg_d, p.degrees.deg_d_prime, p.degrees.b1, p.degrees.b2),
            );
            let run = execute_plan(&p);
            for c in run.checks() {
                rep.check(c.name.clone(), c.ok, c.detail.clone());
            }
            rep.check("execution", run.is_verified(), if run.is_verified() { "Verified" } else { "Failed" });
            rep.data = json!({"plan": p, "execution": run});
        }
    }
    Ok(rep)
}

fn verify_paper(grid: GridArg, seed: u64, fault: Option<FaultArg>) -> CmdResult {
    let grid = match grid {
        GridArg::Default => Grid::Default,
        GridArg::Large => Grid::Large,
    };
    let mut rep = Report::new(format!("verify-paper --grid {grid:?} --seed {seed}").to_lowercase());
    let cfg = VerifyConfig { grid, seed, fault: fault.map(Fault::from) };
    let results = suites::run_all(&cfg);
    for r in &results {
        rep.push(format!("{}. {}", r.id, r.name), Status::from_ok(r.passed()), r.summary_line());
    }
    rep.data = serde_json::to_value(&results)?;
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Bounds { gx, gy, e, d, decomposable, raw } => bounds(gx, gy, e, d, decomposable, raw),
        Cmd::Run { scenario, inject_fault } => run(&scenario, inject_fault),
        Cmd::Resolve { scenario, strategy, budget, target_e, inject_fault } => {
            resolve(&scenario, strategy, budget, target_e, inject_fault)
        }
        Cmd::Plan { gy, gx, d, halphen } => plan(gy, gx, d, halphen),
        Cmd::VerifyPaper { grid, seed, inject_fault } => verify_paper(grid, seed, inject_fault),
    };
    let rep = match res {
        Ok(r) => r,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    print!("{}", rep.render());
    if let Some(path) = cli.json_out {
        let text = serde_json::to_string_pretty(&rep).expect("report serializes");
        if let Err(e) = std::fs::write(&path, text) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(rep.exit_code() as u8)
}

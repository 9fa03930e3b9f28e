//! Planning and executing the explicit construction of triple covers with a
//! nontrivial pencil of prescribed degree.
//!
//! With `b = g_x − 3g_y + 2`, `δ = b mod 2` and `d0 = (b + δ)/2`, choose
//! `deg D = 2t − δ` and `deg D′ = d0 − 3t + δ`, set `B1 = D + D′`,
//! `B2 = 2D + D′`, and take the trisection `X ∼ 3S0 + π*(2B2 − B1)` on
//! `P(O(B1) ⊕ O(B2))`. Transforming at the points of `X` over `D` lands on
//! the product surface with `X` of fiber degree `d0 + t − δ`; extra blocks
//! `T3`, `T1`, `T2` add `2t1 + 3t2`.

use serde::{Deserialize, Serialize};

use crate::elm::oracle::blowup_oracle_check;
use crate::elm::{apply_elm, sections_pairwise_check, ElmState, ElmStep};
use crate::error::TheoremError;
use crate::picard::FormalDivisor;
use crate::ruled::{arithmetic_genus, intersect, RuledSurfaceModel, Splitting, SurfaceClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn delta(self) -> i64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Route {
    Direct { t: i64 },
    Extended { t: i64, t1: i64, t2: i64 },
}

impl Route {
    pub fn t(&self) -> i64 {
        match *self {
            Route::Direct { t } | Route::Extended { t, .. } => t,
        }
    }

    /// `(t1, t2)`, zero on the direct route.
    pub fn extra(&self) -> (i64, i64) {
        match *self {
            Route::Direct { .. } => (0, 0),
            Route::Extended { t1, t2, .. } => (t1, t2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDegrees {
    pub deg_d: i64,
    pub deg_d_prime: i64,
    pub b1: i64,
    pub b2: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    T3,
    T1,
    T2,
    T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptBlock {
    pub block: Block,
    pub steps: Vec<ElmStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub g_y: i64,
    pub g_x: i64,
    pub target_d: i64,
    pub parity_case: Parity,
    pub d0: i64,
    pub route: Route,
    pub degrees: PlanDegrees,
    pub e_planned: i64,
    pub halphen_used: bool,
    pub elm_script: Vec<ScriptBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum PlanOutcome {
    Plan(Box<ConstructionPlan>),
    Infeasible(String),
}

/// The admissible range of `t`, from `deg D ≥ 2g_y` (or the Halphen floor
/// `deg D ≥ g_y + 3`) and `deg D′ ≥ 2g_y`.
pub fn t_range(g_y: i64, g_x: i64, halphen: bool) -> (i64, i64) {
    let b = g_x - 3 * g_y + 2;
    let dp = b.rem_euclid(2);
    let d0 = (b + dp) / 2;
    let mut lo = g_y + dp;
    if halphen {
        lo = lo.min((g_y + 3 + dp + 1).div_euclid(2));
    }
    let hi = (d0 + dp - 2 * g_y).div_euclid(3);
    (lo, hi)
}

/// Smallest degree the planner can reach.
pub fn minimal_planned_degree(g_y: i64, g_x: i64, halphen: bool) -> i64 {
    let b = g_x - 3 * g_y + 2;
    let dp = b.rem_euclid(2);
    (b + dp) / 2 + t_range(g_y, g_x, halphen).0 - dp
}

fn check_genera(g_y: i64, g_x: i64, halphen: bool) -> Result<(), TheoremError> {
    if g_y < 1 {
        return Err(TheoremError::PreconditionFailed(format!("g_y = {g_y} < 1")));
    }
    if g_x < 37 * g_y - 2 {
        return Err(TheoremError::PreconditionFailed(format!("g_x = {g_x} < 37g_y − 2 = {}", 37 * g_y - 2)));
    }
    if halphen && g_y < 2 {
        return Err(TheoremError::PreconditionFailed(format!("Halphen floor needs g_y ≥ 2, got {g_y}")));
    }
    Ok(())
}

pub fn plan_construction(g_y: i64, g_x: i64, d: i64, use_halphen: bool) -> Result<PlanOutcome, TheoremError> {
    check_genera(g_y, g_x, use_halphen)?;
    let b = g_x - 3 * g_y + 2;
    let dp = b.rem_euclid(2);
    let d0 = (b + dp) / 2;
    let (lo, hi) = t_range(g_y, g_x, use_halphen);
    if lo > hi {
        return Ok(PlanOutcome::Infeasible(format!("empty t range [{lo}, {hi}]")));
    }
    let floor = d0 + lo - dp;
    if d < floor {
        return Ok(PlanOutcome::Infeasible(format!("d = {d} < d0 + t_min − δ = {floor}")));
    }
    let t = d - d0 + dp;
    let route = if t <= hi {
        Some(Route::Direct { t })
    } else {
        extended_route(g_y, d - d0 + dp, lo, hi, d0, dp)
    };
    let Some(route) = route else {
        return Ok(PlanOutcome::Infeasible(format!("no t, t1, t2 with d = {d}")));
    };
    Ok(PlanOutcome::Plan(Box::new(build_plan(g_y, g_x, d, route, use_halphen))))
}

/// `rest = t + 2t1 + 3t2`; minimal t first, then minimal t2.
fn extended_route(g_y: i64, rest: i64, lo: i64, hi: i64, d0: i64, dp: i64) -> Option<Route> {
    for t in lo..=hi {
        let deg_d = 2 * t - dp;
        let (b1, b2) = (d0 - t, d0 + t - dp);
        let t1_hi = 2 * b2 - b1 - deg_d;
        let need = rest - t;
        let mut t2 = 0;
        while 3 * t2 <= need {
            let r = need - 3 * t2;
            if r % 2 == 0 {
                let t1 = r / 2;
                if (2 * g_y..=t1_hi).contains(&t1) {
                    return Some(Route::Extended { t, t1, t2 });
                }
            }
            t2 += 1;
        }
    }
    None
}

fn build_plan(g_y: i64, g_x: i64, d: i64, route: Route, halphen: bool) -> ConstructionPlan {
    let b = g_x - 3 * g_y + 2;
    let dp = b.rem_euclid(2);
    let d0 = (b + dp) / 2;
    let t = route.t();
    let degrees = PlanDegrees { deg_d: 2 * t - dp, deg_d_prime: d0 - 3 * t + dp, b1: d0 - t, b2: d0 + t - dp };
    let (t1, t2) = route.extra();
    let elm_script = script(degrees.deg_d, t1, t2);
    ConstructionPlan {
        g_y,
        g_x,
        target_d: d,
        parity_case: if dp == 0 { Parity::Even } else { Parity::Odd },
        d0,
        route,
        degrees,
        e_planned: degrees.b2 - degrees.b1,
        halphen_used: halphen && 2 * t - dp < 2 * g_y,
        elm_script,
    }
}

fn script(deg_d: i64, t1: i64, t2: i64) -> Vec<ScriptBlock> {
    let mut out = Vec::new();
    if t1 + t2 > 0 {
        out.push(ScriptBlock {
            block: Block::T3,
            steps: (1..=t1 + t2)
                .map(|j| ElmStep::new(format!("W{j}"), format!("w{j}")).on_min(true).on("S0"))
                .collect(),
        });
        out.push(ScriptBlock {
            block: Block::T1,
            steps: (1..=t1).map(|j| ElmStep::new(format!("U{j}"), format!("u{j}")).on("S").mult(1)).collect(),
        });
        out.push(ScriptBlock {
            block: Block::T2,
            steps: (1..=t2).map(|j| ElmStep::new(format!("V{j}"), format!("v{j}")).on("S")).collect(),
        });
    }
    out.push(ScriptBlock {
        block: Block::T,
        steps: (1..=deg_d).map(|i| ElmStep::new(format!("P{i}"), format!("y{i}")).on("S").mult(1)).collect(),
    });
    out
}

/// Violated plan invariants, empty for a consistent plan.
pub fn plan_violations(p: &ConstructionPlan) -> Vec<String> {
    let mut v = Vec::new();
    let mut need = |ok: bool, msg: String| {
        if !ok {
            v.push(msg);
        }
    };
    let b = p.g_x - 3 * p.g_y + 2;
    let dp = p.parity_case.delta();
    let g = &p.degrees;
    let t = p.route.t();
    let (t1, t2) = p.route.extra();
    need(b.rem_euclid(2) == dp, format!("parity case {:?} but b = {b}", p.parity_case));
    need(2 * p.d0 - dp == b, format!("d0 = {} inconsistent with b = {b}", p.d0));
    need(g.b1 + g.b2 == b, format!("deg B1 + deg B2 = {} ≠ b = {b}", g.b1 + g.b2));
    need(g.deg_d == 2 * t - dp, format!("deg D = {} but 2t − δ = {}", g.deg_d, 2 * t - dp));
    need(g.b1 == g.deg_d + g.deg_d_prime, format!("deg B1 = {} ≠ deg D + deg D′ = {}", g.b1, g.deg_d + g.deg_d_prime));
    need(g.b2 == 2 * g.deg_d + g.deg_d_prime, format!("deg B2 = {} ≠ 2deg D + deg D′", g.b2));
    need(
        g.deg_d_prime == p.d0 - 3 * t + dp,
        format!("deg D′ = {} but d0 − 3t + δ = {}", g.deg_d_prime, p.d0 - 3 * t + dp),
    );
    need(g.deg_d_prime >= 2 * p.g_y, format!("deg(2B1 − B2) = {} < 2g_y", g.deg_d_prime));
    let d_floor = if p.halphen_used { p.g_y + 3 } else { 2 * p.g_y };
    need(g.deg_d >= d_floor, format!("deg D = {} < {d_floor}", g.deg_d));
    need(p.e_planned == g.b2 - g.b1, format!("e = {} ≠ deg B2 − deg B1", p.e_planned));
    need(p.e_planned == g.deg_d, format!("e = {} ≠ deg D = {}", p.e_planned, g.deg_d));
    need(
        p.target_d == p.d0 + t - dp + 2 * t1 + 3 * t2,
        format!("d = {} but d0 + t − δ + 2t1 + 3t2 = {}", p.target_d, p.d0 + t - dp + 2 * t1 + 3 * t2),
    );
    if let Route::Extended { .. } = p.route {
        let t1_hi = 2 * g.b2 - g.b1 - g.deg_d;
        need((2 * p.g_y..=t1_hi).contains(&t1), format!("t1 = {t1} outside [{}, {t1_hi}]", 2 * p.g_y));
        need(t2 >= 0, format!("t2 = {t2} < 0"));
    }
    let expected = script(g.deg_d, t1, t2);
    need(p.elm_script == expected, "elm script does not match the route".into());
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Execution {
    Verified { final_state: Box<ElmState>, checks: Vec<PlanCheck> },
    Failed { report: Vec<String>, checks: Vec<PlanCheck> },
}

impl Execution {
    pub fn is_verified(&self) -> bool {
        matches!(self, Execution::Verified { .. })
    }

    pub fn checks(&self) -> &[PlanCheck] {
        match self {
            Execution::Verified { checks, .. } | Execution::Failed { checks, .. } => checks,
        }
    }

    pub fn final_state(&self) -> Option<&ElmState> {
        match self {
            Execution::Verified { final_state, .. } => Some(final_state),
            Execution::Failed { .. } => None,
        }
    }
}

fn sum_of(prefix: &str, n: i64) -> FormalDivisor {
    FormalDivisor::sum_of((1..=n).map(|i| format!("{prefix}{i}")))
}

/// The decomposable surface with its sections, marked points and trisection,
/// before any transformation.
pub fn initial_state(p: &ConstructionPlan) -> Result<ElmState, TheoremError> {
    let g = p.degrees;
    let (t1, t2) = p.route.extra();
    let d = FormalDivisor::symbol("D");
    let dpr = FormalDivisor::symbol("D'");
    let big_b1 = &d + &dpr;
    let big_b2 = &d.scaled(2) + &dpr;
    let surface =
        RuledSurfaceModel::decomposable_with(p.g_y, Splitting::with_formal(g.b1, g.b2, big_b1.clone(), big_b2.clone()))?;
    let mut st = ElmState::new(surface);
    st.ledger.declare("D", g.deg_d)?;
    st.ledger.declare("D'", g.deg_d_prime)?;

    st.add_section("S0", SurfaceClass::min_section())?;
    st.add_section("S", SurfaceClass::with_formal(1, g.deg_d, d.clone()))?;
    st.add_section("S1", SurfaceClass::with_formal(1, g.deg_d, sum_of("yp", g.deg_d)))?;
    st.add_section("S2", SurfaceClass::with_formal(1, g.deg_d, sum_of("yp", g.deg_d)))?;
    st.set_trisection(SurfaceClass::with_formal(3, 2 * g.b2 - g.b1, &big_b2.scaled(2) - &big_b1))?;

    for i in 1..=g.deg_d {
        let (y, yp) = (format!("y{i}"), format!("yp{i}"));
        for (pt, sec) in [("P", "S"), ("Q", "S1"), ("R", "S2")] {
            let name = format!("{pt}{i}");
            st.register_point(&name, &y)?;
            st.mark_on_section(sec, &name)?;
            st.mark_on_trisection(&name, [sec])?;
        }
        let name = format!("Pp{i}");
        st.register_point(&name, &yp)?;
        for sec in ["S", "S1", "S2"] {
            st.mark_on_section(sec, &name)?;
        }
    }
    // D ∼ Σ y_i and the second member E = Σ y′_i of |D|
    st.ledger.declare_equivalent(&d, &sum_of("y", g.deg_d))?;
    st.ledger.declare_equivalent(&d, &sum_of("yp", g.deg_d))?;

    for j in 1..=t1 {
        let name = format!("U{j}");
        st.register_point(&name, format!("u{j}"))?;
        st.mark_on_section("S", &name)?;
        st.mark_on_trisection(&name, ["S"])?;
    }
    for j in 1..=t2 {
        let name = format!("V{j}");
        st.register_point(&name, format!("v{j}"))?;
        st.mark_on_section("S", &name)?;
    }
    for j in 1..=t1 + t2 {
        let name = format!("W{j}");
        st.register_point(&name, format!("w{j}"))?;
        st.mark_on_section("S0", &name)?;
    }
    if t1 + t2 > 0 {
        let t3 = sum_of("w", t1 + t2);
        let rhs = &sum_of("u", t1) + &sum_of("v", t2);
        st.ledger.declare_equivalent(&t3, &rhs)?;
    }
    st.validate()?;
    Ok(st)
}

pub fn execute_plan(p: &ConstructionPlan) -> Execution {
    let violations = plan_violations(p);
    if !violations.is_empty() {
        return Execution::Failed { report: violations, checks: Vec::new() };
    }
    let mut checks = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        checks.push(PlanCheck { name: name.to_string(), ok, detail });
    };
    let st = match initial_state(p) {
        Ok(s) => s,
        Err(e) => return Execution::Failed { report: vec![e.to_string()], checks: Vec::new() },
    };
    let g = p.degrees;
    let b = p.g_x - 3 * p.g_y + 2;

    let s12 = sections_pairwise_check(&st, "S1", "S2").unwrap_or(i64::MIN);
    check("family sections meet in deg E points", s12 == g.deg_d, format!("S1·S2 = {s12}, deg E = {}", g.deg_d));
    let s_s0 = sections_pairwise_check(&st, "S", "S0").unwrap_or(i64::MIN);
    check("S disjoint from S0", s_s0 == 0, format!("S·S0 = {s_s0}"));
    let tri = st.trisection.as_ref().expect("initial state has a trisection");
    let s = st.section("S").expect("S tracked");
    let sx = intersect(&s.class, &tri.class, &st.surface);
    let on_s = tri.marked_smooth_points.values().filter(|secs| secs.contains("S")).count() as i64;
    check("marks of X on S fit in S·X", on_s <= sx, format!("{on_s} marked, S·X = {sx}"));
    let s0x = intersect(&SurfaceClass::min_section(), &tri.class, &st.surface);
    check("S0·X = deg D′", s0x == g.deg_d_prime, format!("S0·X = {s0x}"));
    let pa = arithmetic_genus(&tri.class, &st.surface).unwrap_or(i64::MIN);
    check("initial genus", pa == p.g_x, format!("p_a(X) = {pa}, g_x = {}", p.g_x));

    let mut cur = st;
    let mut oracle_bad = Vec::new();
    for block in &p.elm_script {
        for step in &block.steps {
            if !blowup_oracle_check(&cur, step).agrees() {
                oracle_bad.push(step.center.clone());
            }
            match apply_elm(&cur, step) {
                Ok(next) => cur = next,
                Err(e) => {
                    check("script runs", false, format!("{:?} step at {}: {e}", block.block, step.center));
                    return Execution::Failed { report: vec![format!("step {} failed: {e}", step.center)], checks };
                }
            }
        }
    }
    check("script runs", true, format!("{} steps", cur.history.len()));
    check("oracle agrees on every step", oracle_bad.is_empty(), format!("disagreements at {oracle_bad:?}"));
    check("final surface e = 0", cur.surface.e == 0, format!("e = {}", cur.surface.e));
    let split = cur.surface.splitting().cloned();
    let trivial = match &split {
        Some(Splitting { b1, b2, formal: Some((f1, f2)) }) => {
            b1 == b2 && cur.ledger.equivalent(f1, f2).unwrap_or(false)
        }
        _ => false,
    };
    check(
        "final splitting trivial up to twist",
        trivial,
        match &split {
            Some(Splitting { b1, b2, formal: Some((f1, f2)) }) => format!("({b1}, {b2}), B1 = {f1}, B2 = {f2}"),
            other => format!("{other:?}"),
        },
    );
    let tri = cur.trisection.as_ref().expect("trisection survives");
    let fd = tri.class.fib_deg;
    check("final fiber degree", fd == p.target_d, format!("{fd} vs target {}", p.target_d));
    let formal_ok = tri.class.check_formal(&cur.ledger).unwrap_or(false);
    check("final class formally consistent", formal_ok, format!("{}", tri.class));
    let delta = tri.total_delta();
    check("Σδ = 2d − b", delta == 2 * p.target_d - b, format!("Σδ = {delta}, 2d − b = {}", 2 * p.target_d - b));
    let genus = cur.trisection_genus().ok().flatten().unwrap_or(i64::MIN);
    check("genus preserved", genus == p.g_x, format!("p_a − Σδ = {genus}"));

    if checks.iter().all(|c| c.ok) {
        Execution::Verified { final_state: Box::new(cur), checks }
    } else {
        let report = checks.iter().filter(|c| !c.ok).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        Execution::Failed { report, checks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(g_y: i64, g_x: i64, d: i64, h: bool) -> ConstructionPlan {
        match plan_construction(g_y, g_x, d, h).unwrap() {
            PlanOutcome::Plan(p) => *p,
            PlanOutcome::Infeasible(why) => panic!("infeasible: {why}"),
        }
    }

    #[test]
    fn direct_example() {
        let p = plan(1, 35, 18, false);
        assert_eq!(p.route, Route::Direct { t: 1 });
        assert_eq!(p.degrees, PlanDegrees { deg_d: 2, deg_d_prime: 14, b1: 16, b2: 18 });
        assert_eq!(p.e_planned, 2);
        let run = execute_plan(&p);
        assert!(run.is_verified(), "{run:?}");
        let fin = run.final_state().unwrap();
        assert_eq!(fin.trisection.as_ref().unwrap().class.fib_deg, 18);
        assert_eq!(fin.surface.e, 0);
    }

    #[test]
    fn below_bound() {
        assert!(matches!(plan_construction(1, 35, 17, false).unwrap(), PlanOutcome::Infeasible(_)));
    }

    #[test]
    fn extended_example() {
        let p = plan(1, 35, 26, false);
        assert_eq!(p.d0, 17);
        assert_eq!(p.route, Route::Extended { t: 1, t1: 4, t2: 0 });
        let (t1, t2) = p.route.extra();
        assert_eq!(2 * t1 + 3 * t2, 8);
        assert!(execute_plan(&p).is_verified());
    }

    #[test]
    fn tampered_plan_fails() {
        let mut p = plan(1, 35, 18, false);
        p.degrees.deg_d_prime -= 1;
        match execute_plan(&p) {
            Execution::Failed { report, .. } => assert!(report.iter().any(|r| r.contains("deg D′"))),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn odd_parity() {
        // b = 36 − 3 + 2 = 35
        let p = plan(1, 36, 19, false);
        assert_eq!(p.parity_case, Parity::Odd);
        assert_eq!(p.d0, 18);
        assert_eq!(p.route, Route::Direct { t: 2 });
        assert_eq!(p.degrees.deg_d, 3);
        assert!(execute_plan(&p).is_verified());
        assert!(matches!(plan_construction(1, 36, 18, false).unwrap(), PlanOutcome::Infeasible(_)));
    }

    #[test]
    fn halphen_floor() {
        assert_eq!(minimal_planned_degree(5, 183, false), 90);
        assert_eq!(minimal_planned_degree(5, 183, true), 89);
        let p = plan(5, 183, 89, true);
        assert_eq!(p.route, Route::Direct { t: 4 });
        assert!(p.halphen_used);
        assert!(execute_plan(&p).is_verified());
        assert!(matches!(plan_construction(5, 183, 89, false).unwrap(), PlanOutcome::Infeasible(_)));
    }

    #[test]
    fn preconditions() {
        assert!(plan_construction(0, 10, 5, false).is_err());
        assert!(plan_construction(1, 30, 20, false).is_err());
        assert!(plan_construction(1, 35, 20, true).is_err());
    }
}

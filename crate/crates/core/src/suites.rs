//! Identity suites shared by `verify-paper` and the acceptance tests.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elm::oracle::blowup_oracle_check_with;
use crate::elm::resolve::{resolve_with, Strategy};
use crate::elm::{apply_elm, apply_inverse, ElmState, ElmStep, Engine, Fault, SingularityProfile};
use crate::picard::FormalDivisor;
use crate::ruled::{
    arithmetic_genus, m_invariant, trisection_cover_class, Bundle, RuledSurfaceModel, Splitting, SurfaceClass,
};
use crate::theorems::bounds::{cs_threshold, h0_chain, h0_window, Verdict};
use crate::theorems::construction::minimal_planned_degree;
use crate::theorems::{
    cs_classical, execute_plan, pencil_degree_range, plan_construction, theorem_a_threshold, theorem_b_bound,
    verdict, PlanOutcome, Route,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    #[default]
    Default,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub grid: Grid,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { grid: Grid::Default, seed: DEFAULT_SEED, fault: None }
    }
}

impl VerifyConfig {
    fn engine(&self) -> Engine {
        Engine { fault: self.fault }
    }

    fn random_cases(&self) -> usize {
        match self.grid {
            Grid::Default => 1000,
            Grid::Large => 5000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub id: u8,
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        let mut s = format!("{} cases, {} failures, {} ms", self.cases, self.failures.len(), self.elapsed_ms);
        if let Some(f) = self.failures.first() {
            s.push_str(&format!("; first: {f}"));
        }
        s
    }
}

struct Tally {
    cases: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, failures: Vec::new(), notes: Vec::new() }
    }

    fn case(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, id: u8, name: &str, start: Instant) -> SuiteResult {
        SuiteResult {
            id,
            name: name.to_string(),
            cases: self.cases,
            failures: self.failures,
            notes: self.notes,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

/// Values of `e` with `e ≡ b (mod 2)` in `[−g_y, max(2g_y − 2, b/3)]`.
pub fn valid_es(g_y: i64, b: i64) -> Vec<i64> {
    let hi = (2 * g_y - 2).max(b.div_euclid(3));
    (-g_y..=hi).filter(|e| (e - b).rem_euclid(2) == 0).collect()
}

fn model_grid(grid: Grid) -> (std::ops::RangeInclusive<i64>, std::ops::RangeInclusive<i64>) {
    match grid {
        Grid::Default => (0..=4, 1..=40),
        Grid::Large => (0..=6, 1..=80),
    }
}

pub fn adjunction_grid(grid: Grid) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (gys, bs) = model_grid(grid);
    for g_y in gys {
        for b in bs.clone() {
            for e in valid_es(g_y, b) {
                let m = match RuledSurfaceModel::tschirnhausen(g_y, b + 3 * g_y - 2, e) {
                    Ok(m) => m,
                    Err(err) => {
                        t.case(false, || format!("g_y={g_y} b={b} e={e}: {err}"));
                        continue;
                    }
                };
                let pa = arithmetic_genus(&trisection_cover_class(&m), &m);
                t.case(pa == Ok(b + 3 * g_y - 2), || format!("g_y={g_y} b={b} e={e}: p_a = {pa:?}"));
            }
        }
    }
    t.finish(1, "adjunction identity grid", start)
}

pub fn product_genus_grid(grid: Grid) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (gys, ds) = match grid {
        Grid::Default => (0..=4, 1..=60),
        Grid::Large => (0..=8, 1..=150),
    };
    for g_y in gys {
        let m = RuledSurfaceModel::product(g_y);
        for d in ds.clone() {
            let pa = arithmetic_genus(&SurfaceClass::new(3, d), &m);
            t.case(pa == Ok(2 * d + 3 * g_y - 2), || format!("g_y={g_y} d={d}: p_a = {pa:?}"));
        }
    }
    t.finish(2, "product-surface trisection genus", start)
}

const CHAINS: [&[u8]; 5] = [&[2], &[2, 2], &[3], &[3, 2], &[2, 2, 2]];

/// A random tracked state with minimal section `S0`, an extra section `T`, a
/// trisection with a few singularities and marked points, after up to two
/// random steps.
pub fn random_state(rng: &mut ChaCha8Rng) -> ElmState {
    let g_y = rng.gen_range(0..=3);
    let kind = rng.gen_range(0..3);
    let mut st = match kind {
        0 => {
            let b1 = rng.gen_range(0..=12);
            let b2 = b1 + rng.gen_range(0..=4);
            let split = Splitting::with_formal(b1, b2, FormalDivisor::symbol("B1"), FormalDivisor::symbol("B2"));
            let mut st = ElmState::new(RuledSurfaceModel::decomposable_with(g_y, split).expect("ordered splitting"));
            st.ledger.declare("B1", b1).unwrap();
            st.ledger.declare("B2", b2).unwrap();
            st
        }
        _ => {
            let e: i64 = rng.gen_range(-3..=4);
            let b = e.abs() + 2 * rng.gen_range(0..=8);
            let mut m = RuledSurfaceModel::raw(g_y, b, (b + e) / 2).expect("parity by construction");
            if kind == 2 {
                m.bundle = Bundle::Indecomposable;
            }
            ElmState::new(m)
        }
    };
    let e = st.surface.e;
    st.add_section("S0", SurfaceClass::min_section()).unwrap();
    if let Some(s) = st.surface.splitting() {
        let z = s.e();
        if z > 0 {
            st.add_section("S", SurfaceClass::with_formal(1, z, &FormalDivisor::symbol("B2") - &FormalDivisor::symbol("B1")))
                .unwrap();
        }
    }
    let zt = e.max(0) + rng.gen_range(1..=4);
    st.ledger.declare("Z_T", zt).unwrap();
    st.add_section("T", SurfaceClass::with_formal(1, zt, FormalDivisor::symbol("Z_T"))).unwrap();
    let zx = 3 * e.max(0) + rng.gen_range(2..=10);
    st.ledger.declare("Z_X", zx).unwrap();
    st.set_trisection(SurfaceClass::with_formal(3, zx, FormalDivisor::symbol("Z_X"))).unwrap();
    for f in ["s1", "s2"].iter().take(rng.gen_range(0..=2)) {
        let chain = CHAINS.choose(rng).unwrap().to_vec();
        st.add_profile(SingularityProfile::new(*f, chain).unwrap()).unwrap();
    }
    for i in 0..rng.gen_range(0..=2) {
        let p = format!("M{i}");
        st.register_point(&p, format!("m{i}")).unwrap();
        st.mark_on_section("T", &p).unwrap();
        st.mark_on_trisection(&p, ["T"]).unwrap();
    }
    for k in 0..rng.gen_range(0..=2) {
        if let Some((next, _)) = random_valid_step(rng, &st, &format!("pre{k}")) {
            st = next;
        }
    }
    st
}

fn candidate_step(rng: &mut ChaCha8Rng, st: &ElmState, tag: &str) -> Option<ElmStep> {
    let tri = st.trisection.as_ref()?;
    let on_min = rng.gen_bool(0.5);
    let mut step = match rng.gen_range(0..4) {
        0 | 3 => {
            let r = rng.gen_range(0..=1);
            let mut s = ElmStep::new(format!("c{tag}"), format!("f{tag}")).mult(r);
            if rng.gen_bool(0.4) {
                s = s.on("T");
            }
            s
        }
        1 => {
            let (p, secs) = tri.marked_smooth_points.iter().collect::<Vec<_>>().choose(rng).copied()?;
            let mut s = ElmStep::new(p.clone(), st.points[p].clone()).mult(1);
            for id in secs {
                s = s.on(id.clone());
            }
            s
        }
        _ => {
            let prof = tri.singularities.choose(rng)?;
            ElmStep::new(format!("x{tag}"), prof.base_fiber.clone()).mult(prof.r())
        }
    };
    step = step.on_min(on_min);
    if on_min {
        if let Some(m) = st.min_section() {
            if st.surface.e > 0 || rng.gen_bool(0.5) {
                step = step.on(m.id.clone());
            }
        }
    }
    for s in &st.sections {
        if s.marked_points.contains(&step.center) {
            step = step.on(s.id.clone());
        }
    }
    Some(step)
}

/// Draws candidate steps until one is accepted by the engine.
pub fn random_valid_step(rng: &mut ChaCha8Rng, st: &ElmState, tag: &str) -> Option<(ElmState, ElmStep)> {
    for _ in 0..64 {
        if let Some(step) = candidate_step(rng, st, tag) {
            if let Ok(next) = apply_elm(st, &step) {
                return Some((next, step));
            }
        }
    }
    None
}

pub fn oracle_random(cfg: &VerifyConfig) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let engine = cfg.engine();
    // (on minimal section, on trisection)
    let mut branches = [[0usize; 2]; 2];
    let mut produced = 0;
    while produced < cfg.random_cases() {
        let st = random_state(&mut rng);
        let Some((_, step)) = random_valid_step(&mut rng, &st, "s") else { continue };
        produced += 1;
        branches[step.on_min_section as usize][(step.trisection_multiplicity > 0) as usize] += 1;
        let v = blowup_oracle_check_with(&engine, &st, &step);
        t.case(v.agrees(), || format!("step {step:?} on e = {}: {v:?}", st.surface.e));
    }
    for (on_min, row) in branches.iter().enumerate() {
        for (on_c, &n) in row.iter().enumerate() {
            t.notes.push(format!("branch on_min={} on_C={}: {n}", on_min == 1, on_c == 1));
            if n == 0 {
                t.failures.push(format!("branch on_min={} on_C={} never sampled", on_min == 1, on_c == 1));
            }
        }
    }
    t.finish(3, "elm-oracle equivalence", start)
}

pub fn inverse_random(cfg: &VerifyConfig) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let engine = cfg.engine();
    let mut produced = 0;
    while produced < cfg.random_cases() {
        let st = random_state(&mut rng);
        let Some((_, step)) = random_valid_step(&mut rng, &st, "s") else { continue };
        produced += 1;
        let ok = match engine.apply(&st, &step) {
            Ok(next) => (next.surface.e - st.surface.e).abs() == 1 && apply_inverse(&next).as_ref() == Ok(&st),
            Err(_) => false,
        };
        t.case(ok, || format!("round trip failed for {step:?}"));
    }
    t.finish(4, "invertibility", start)
}

fn random_singular_product(rng: &mut ChaCha8Rng) -> ElmState {
    loop {
        let g_y = rng.gen_range(0..=3);
        let mut st = ElmState::new(RuledSurfaceModel::product(g_y));
        st.set_trisection(SurfaceClass::new(3, rng.gen_range(20..=30))).unwrap();
        for f in ["a", "b", "c"].iter().take(rng.gen_range(1..=3)) {
            let chain = CHAINS.choose(rng).unwrap().to_vec();
            st.add_profile(SingularityProfile::new(*f, chain).unwrap()).unwrap();
        }
        if st.total_delta() <= 6 {
            return st;
        }
    }
}

pub fn resolution_properties(cfg: &VerifyConfig) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xde17a);
    let engine = cfg.engine();
    let n = match cfg.grid {
        Grid::Default => 200,
        Grid::Large => 1000,
    };
    for _ in 0..n {
        let st = random_singular_product(&mut rng);
        let delta = st.total_delta();
        let genus = st.trisection_genus().ok().flatten();
        let d = st.trisection.as_ref().unwrap().class.fib_deg;
        match resolve_with(&engine, &st, Strategy::Greedy, None) {
            Ok(r) => t.case(
                r.alpha as i64 <= delta
                    && r.state.total_delta() == 0
                    && r.state.trisection_genus().ok().flatten() == genus,
                || format!("greedy: α = {} vs Σδ = {delta}", r.alpha),
            ),
            Err(e) => t.case(false, || format!("greedy failed on Σδ = {delta}: {e}")),
        }
        match resolve_with(&engine, &st, Strategy::Exhaustive { budget: 200_000 }, None) {
            Ok(r) => {
                let de = r.delta_e.abs();
                let g = r.state.trisection_genus().ok().flatten().unwrap_or(i64::MIN);
                let b_final = g - 3 * st.surface.g_y + 2;
                t.case(
                    de <= r.alpha as i64 && r.alpha as i64 <= delta && 2 * d - (b_final + delta) == 0 && delta >= r.state.surface.e.abs(),
                    || format!("exhaustive: |Δe| = {de}, α = {}, Σδ = {delta}", r.alpha),
                );
            }
            Err(e) => t.case(false, || format!("exhaustive failed on Σδ = {delta}: {e}")),
        }
    }
    for g_y in 0..=2 {
        for e in 1..=3 {
            let mut st = ElmState::new(RuledSurfaceModel::product(g_y));
            st.set_trisection(SurfaceClass::new(3, 3 * e + 6)).unwrap();
            for i in 0..e {
                st.add_profile(SingularityProfile::node(format!("q{i}"))).unwrap();
            }
            match resolve_with(&engine, &st, Strategy::Exhaustive { budget: 200_000 }, Some(e)) {
                Ok(r) => t.case(
                    r.alpha as i64 == e && r.state.surface.e == e && r.monotone_raise && r.alpha_equals_abs_delta_e,
                    || format!("minimal-degree g_y={g_y} e={e}: α = {}", r.alpha),
                ),
                Err(err) => t.case(false, || format!("minimal-degree g_y={g_y} e={e}: {err}")),
            }
        }
    }
    t.finish(5, "resolution properties", start)
}

pub fn ordering_grid(grid: Grid) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (gys, bs) = model_grid(grid);
    for g_y in gys {
        for b in bs.clone() {
            let g_x = b + 3 * g_y - 2;
            for e in valid_es(g_y, b) {
                let Ok(m) = RuledSurfaceModel::tschirnhausen(g_y, g_x, e) else {
                    t.case(false, || format!("model g_y={g_y} b={b} e={e}"));
                    continue;
                };
                let cs = cs_threshold(g_x, g_y, 3).expect("3 is prime").ceil();
                let bound = theorem_b_bound(&m);
                let a = theorem_a_threshold(&m).value();
                t.case(cs <= bound && a.is_none_or(|a| bound <= a), || {
                    format!("g_y={g_y} b={b} e={e}: cs {cs}, B {bound}, A {a:?}")
                });
                for d in 1..=bound + 1 {
                    let must = cs_classical(g_x, g_y, 3, d).map(|v| v.verdict == Verdict::MustFactor).unwrap_or(false);
                    if must {
                        t.case(verdict(&m, d).verdict == Verdict::Impossible, || {
                            format!("g_y={g_y} b={b} e={e} d={d}: CS factors but verdict is not Impossible")
                        });
                    }
                }
                if g_y == 0 {
                    t.case(bound == g_x - m_invariant(&m), || format!("Maroni g_x={g_x} e={e}"));
                }
            }
        }
    }
    let m = RuledSurfaceModel::tschirnhausen(0, 5, 1).expect("trigonal genus 5");
    let (bound, mm) = (theorem_b_bound(&m), m_invariant(&m));
    t.case(bound == 4 && mm == 1 && bound == m.g_x - mm, || format!("trigonal genus 5: bound {bound}, m {mm}"));
    t.finish(6, "lower bound and CS ordering", start)
}

pub fn h0_grid(grid: Grid) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (gys, span) = match grid {
        Grid::Default => (1..=2, 20),
        Grid::Large => (1..=4, 40),
    };
    for g_y in gys {
        for g_x in 9 * g_y + 4..=9 * g_y + span {
            let b = g_x - 3 * g_y + 2;
            for e in valid_es(g_y, b) {
                let m = RuledSurfaceModel::tschirnhausen(g_y, g_x, e).expect("parity-valid model");
                let (lo, hi) = h0_window(&m);
                for a in lo..=hi {
                    let want = g_x - g_y - 2 * a;
                    match h0_chain(&m, a) {
                        Ok(c) => t.case(
                            c.h0_surface == want
                                && c.h0_kx_fa == want
                                && c.h0_fa == a - g_y + 1
                                && c.cut_out
                                && c.vanishing_degree < 0,
                            || format!("g_y={g_y} g_x={g_x} e={e} a={a}: {c:?}"),
                        ),
                        Err(err) => t.case(false, || format!("g_y={g_y} g_x={g_x} e={e} a={a}: {err}")),
                    }
                }
                match pencil_degree_range(&m) {
                    Ok(r) => t.case(r.construction_min == Some(r.threshold), || {
                        format!("g_y={g_y} g_x={g_x} e={e}: construction min {:?} vs threshold {}", r.construction_min, r.threshold)
                    }),
                    Err(err) => t.case(false, || format!("pencil range g_y={g_y} g_x={g_x} e={e}: {err}")),
                }
            }
        }
    }
    t.finish(7, "h0 chain", start)
}

pub fn construction_roundtrip(grid: Grid) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (gys, span, odd) = match grid {
        Grid::Default => (1..=2, 15, false),
        Grid::Large => (1..=3, 40, true),
    };
    for g_y in gys {
        let mut gxs = vec![37 * g_y - 2, 37 * g_y, 37 * g_y + 6];
        if odd {
            gxs.extend([37 * g_y - 1, 37 * g_y + 7]);
        }
        for g_x in gxs {
            let b: i64 = g_x - 3 * g_y + 2;
            let d0 = (b + b.rem_euclid(2)) / 2;
            for d in d0 + g_y..=d0 + g_y + span {
                let what = format!("g_y={g_y} g_x={g_x} d={d}");
                let plan = match plan_construction(g_y, g_x, d, false) {
                    Ok(PlanOutcome::Plan(p)) => p,
                    Ok(PlanOutcome::Infeasible(why)) => {
                        t.case(false, || format!("{what}: infeasible ({why})"));
                        continue;
                    }
                    Err(err) => {
                        t.case(false, || format!("{what}: {err}"));
                        continue;
                    }
                };
                let run = execute_plan(&plan);
                let ok = run.final_state().is_some_and(|s| {
                    s.surface.e == 0 && s.trisection.as_ref().is_some_and(|x| x.class.fib_deg == d)
                });
                let m = RuledSurfaceModel::decomposable(g_y, plan.degrees.b1, plan.degrees.b2).expect("plan splitting");
                let bound = theorem_b_bound(&m);
                let direct = matches!(plan.route, Route::Direct { .. });
                let sharp = d >= bound && ((d == bound) == direct);
                t.case(ok && sharp, || format!("{what}: verified={} bound={bound} route={:?}", run.is_verified(), plan.route));
            }
            t.case(minimal_planned_degree(g_y, g_x, false) == d0 + g_y, || format!("g_y={g_y} g_x={g_x}: planner floor"));
        }
    }
    t.finish(8, "construction round trip", start)
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteResult> {
    vec![
        adjunction_grid(cfg.grid),
        product_genus_grid(cfg.grid),
        oracle_random(cfg),
        inverse_random(cfg),
        resolution_properties(cfg),
        ordering_grid(cfg.grid),
        h0_grid(cfg.grid),
        construction_roundtrip(cfg.grid),
    ]
}

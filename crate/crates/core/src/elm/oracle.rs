//! Independent check of `apply_elm` in the Picard lattice of the blown-up
//! surface.
//!
//! Basis `(φ*S0, φ*F, E)` with Gram matrix `[[−e,1,0],[1,0,0],[0,0,−1]]`. The
//! fiber coordinate also carries a formal base divisor so that the symbolic
//! answer can be compared as well.

use serde::{Deserialize, Serialize};

use crate::elm::{ElmState, ElmStep, Engine};
use crate::picard::FormalDivisor;
use crate::ruled::SurfaceClass;

#[derive(Clone, Debug, PartialEq, Eq)]
struct LVec {
    s: i64,
    f: i64,
    ex: i64,
    formal: Option<FormalDivisor>,
}

impl LVec {
    fn dot(&self, o: &LVec, e: i64) -> i64 {
        -e * self.s * o.s + self.s * o.f + self.f * o.s - self.ex * o.ex
    }

    fn plus_scaled(&self, k: i64, o: &LVec) -> LVec {
        LVec {
            s: self.s + k * o.s,
            f: self.f + k * o.f,
            ex: self.ex + k * o.ex,
            formal: match (&self.formal, &o.formal) {
                (Some(a), Some(b)) => Some(a + &b.scaled(k)),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMismatch {
    pub item: String,
    pub engine: String,
    pub oracle: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "mismatches", rename_all = "snake_case")]
pub enum OracleVerdict {
    Agree,
    Disagree(Vec<OracleMismatch>),
}

impl OracleVerdict {
    pub fn agrees(&self) -> bool {
        matches!(self, OracleVerdict::Agree)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Pushed {
    e: i64,
    class: SurfaceClass,
}

/// Image of a class with multiplicity `r` at the center, expressed on the new
/// surface relative to the image of the old minimal section.
fn transform(c: &SurfaceClass, r: i64, e: i64, eps: bool, p: &FormalDivisor) -> Result<Pushed, String> {
    let f_tilde = LVec { s: 0, f: 1, ex: -1, formal: Some(p.clone()) };
    let fiber = LVec { s: 0, f: 1, ex: 0, formal: Some(p.clone()) };
    let push_pull = |v: LVec| {
        let k = v.dot(&f_tilde, e);
        v.plus_scaled(k, &f_tilde)
    };
    let strict = LVec { s: c.sigma, f: c.fib_deg, ex: -r, formal: c.fib_formal.clone() };
    let w = push_pull(strict);
    let min = push_pull(LVec { s: 1, f: 0, ex: -i64::from(eps), formal: Some(FormalDivisor::zero()) });
    let e_new = -min.dot(&min, e);

    let alpha = w.dot(&fiber, e) / min.dot(&fiber, e);
    let beta = w.dot(&min, e) + alpha * e_new;
    // the residual w − α·M' − β·F must vanish
    let res = w.plus_scaled(-alpha, &min).plus_scaled(-beta, &LVec { s: 0, f: 1, ex: 0, formal: None });
    if res.s != 0 || res.f != 0 || res.ex != 0 {
        return Err(format!("class ({}, {}) does not descend: residual {:?}", c.sigma, c.fib_deg, res));
    }
    let formal = match (&w.formal, &min.formal) {
        (Some(zw), Some(zm)) => Some(zw - &zm.scaled(alpha)),
        _ => None,
    };
    Ok(Pushed { e: e_new, class: SurfaceClass { sigma: alpha, fib_deg: beta, fib_formal: formal } })
}

pub fn blowup_oracle_check(state: &ElmState, step: &ElmStep) -> OracleVerdict {
    blowup_oracle_check_with(&Engine::default(), state, step)
}

/// Runs `engine` on the step and compares every tracked quantity with the
/// lattice computation.
pub fn blowup_oracle_check_with(engine: &Engine, state: &ElmState, step: &ElmStep) -> OracleVerdict {
    let mut bad = Vec::new();
    let mut miss = |item: &str, engine: String, oracle: String| {
        if engine != oracle {
            bad.push(OracleMismatch { item: item.to_string(), engine, oracle });
        }
    };
    let next = match engine.apply(state, step) {
        Ok(n) => n,
        Err(err) => {
            return OracleVerdict::Disagree(vec![OracleMismatch {
                item: "step".into(),
                engine: err.to_string(),
                oracle: "valid step".into(),
            }])
        }
    };
    let e = state.surface.e;
    let eps = step.on_min_section;
    let p = FormalDivisor::symbol(step.fiber.clone());
    let show = |c: &SurfaceClass| format!("{c}");

    let probe = transform(&SurfaceClass::fiber(), 0, e, eps, &p);
    match probe {
        Ok(fib) => miss("e", next.surface.e.to_string(), fib.e.to_string()),
        Err(msg) => miss("e", next.surface.e.to_string(), msg),
    }
    for (old, new) in state.sections.iter().zip(&next.sections) {
        let r = i64::from(step.on_sections.contains(&old.id));
        match transform(&old.class, r, e, eps, &p) {
            Ok(t) => miss(&format!("section {}", old.id), show(&new.class), show(&t.class)),
            Err(msg) => miss(&format!("section {}", old.id), show(&new.class), msg),
        }
    }
    if let (Some(old), Some(new)) = (&state.trisection, &next.trisection) {
        let r = step.trisection_multiplicity as i64;
        match transform(&old.class, r, e, eps, &p) {
            Ok(t) => miss("trisection", show(&new.class), show(&t.class)),
            Err(msg) => miss("trisection", show(&new.class), msg),
        }
        // new singular point where the contracted fiber met C̃ in k points
        let k = old.class.sigma - r;
        let delta = old.total_delta() - r * (r - 1) / 2 + k * (k - 1) / 2;
        miss("total delta", new.total_delta().to_string(), delta.to_string());
    }
    if bad.is_empty() {
        OracleVerdict::Agree
    } else {
        OracleVerdict::Disagree(bad)
    }
}

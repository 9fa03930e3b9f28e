//! When a cover attains the minimal degree, transforming at the `e` points
//! `Q_i` of `X` on the disjoint section reaches the product surface exactly
//! when `Σ q_i ∼ B2 − B1`.

use serde::{Deserialize, Serialize};

use crate::elm::{apply_elm, ElmState, ElmStep};
use crate::error::TheoremError;
use crate::picard::FormalDivisor;
use crate::ruled::{Bundle, Splitting};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalDegreeReport {
    pub consistent: bool,
    pub section: Option<String>,
    pub points: Vec<String>,
    pub final_e: i64,
    pub final_fiber_degree: Option<i64>,
    /// `B1′ ∼ B2′` after the transformations.
    pub final_trivial: bool,
    /// `Σ q_i ∼ B2 − B1` on the original surface.
    pub relation_holds: bool,
    /// `O(B1 + Σ q_i) ⊕ O(B2)` is a twist of the trivial bundle.
    pub twisted_trivial: bool,
    pub notes: Vec<String>,
}

pub fn minimal_degree_characterization(state: &ElmState) -> Result<MinimalDegreeReport, TheoremError> {
    let split = match &state.surface.bundle {
        Bundle::Decomposable(s) => s.clone(),
        _ => return Err(TheoremError::PreconditionFailed("surface is not decomposable".into())),
    };
    let e = state.surface.e;
    if e < 0 {
        return Err(TheoremError::PreconditionFailed(format!("e = {e} < 0")));
    }
    if e == 0 {
        return Ok(MinimalDegreeReport {
            consistent: true,
            section: None,
            points: Vec::new(),
            final_e: 0,
            final_fiber_degree: state.trisection.as_ref().map(|t| t.class.fib_deg),
            final_trivial: true,
            relation_holds: true,
            twisted_trivial: true,
            notes: vec!["e = 0: nothing to transform".into()],
        });
    }
    let Some((big_b1, big_b2)) = split.formal.clone() else {
        return Err(TheoremError::PreconditionFailed("splitting has no formal classes".into()));
    };
    let tri = state.trisection.as_ref().ok_or_else(|| TheoremError::PreconditionFailed("no trisection".into()))?;
    let sec = state
        .sections
        .iter()
        .find(|s| !s.is_min_degree && s.class.fib_deg == e)
        .ok_or_else(|| TheoremError::PreconditionFailed("no section disjoint from S0 is tracked".into()))?;
    let points: Vec<String> = sec
        .marked_points
        .iter()
        .filter(|p| tri.marked_smooth_points.contains_key(*p))
        .cloned()
        .collect();
    if points.len() as i64 != e {
        return Err(TheoremError::PreconditionFailed(format!(
            "{} points of X marked on {}, expected e = {e}",
            points.len(),
            sec.id
        )));
    }

    let mut cur = state.clone();
    let mut sum_q = FormalDivisor::zero();
    for q in &points {
        let fiber = state.points[q].clone();
        sum_q.add_term(fiber.clone(), 1);
        let mut step = ElmStep::new(q.clone(), fiber).mult(1);
        for s in &tri.marked_smooth_points[q] {
            step = step.on(s.clone());
        }
        for s in state.sections.iter().filter(|s| s.marked_points.contains(q)) {
            step = step.on(s.id.clone());
        }
        cur = apply_elm(&cur, &step)?;
    }

    let ledger = &cur.ledger;
    let relation_holds = ledger.equivalent(&sum_q, &(&big_b2 - &big_b1))?;
    let twisted_trivial = ledger.equivalent(&(&big_b1 + &sum_q), &big_b2)?;
    let mut notes = Vec::new();
    let final_trivial = match cur.surface.splitting() {
        Some(Splitting { b1, b2, formal: Some((f1, f2)) }) => {
            let expected = (&big_b1, &(&big_b2 - &sum_q));
            if (f1, f2) != expected {
                notes.push(format!("splitting evolved to ({f1}, {f2}), expected ({}, {})", expected.0, expected.1));
            }
            b1 == b2 && ledger.equivalent(f1, f2)?
        }
        other => {
            notes.push(format!("splitting lost: {other:?}"));
            false
        }
    };
    if !final_trivial {
        notes.push("final surface is not the trivial one".into());
    }
    let consistent = cur.surface.e == 0
        && notes.iter().all(|n| !n.starts_with("splitting"))
        && final_trivial == relation_holds
        && relation_holds == twisted_trivial;
    Ok(MinimalDegreeReport {
        consistent,
        section: Some(sec.id.clone()),
        points,
        final_e: cur.surface.e,
        final_fiber_degree: cur.trisection.as_ref().map(|t| t.class.fib_deg),
        final_trivial,
        relation_holds,
        twisted_trivial,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruled::{disjoint_section_class, trisection_cover_class, RuledSurfaceModel, SurfaceClass};

    fn state(with_relation: bool) -> ElmState {
        let b1 = FormalDivisor::symbol("B1");
        let b2 = FormalDivisor::symbol("B2");
        let m = RuledSurfaceModel::decomposable_with(1, Splitting::with_formal(5, 7, b1.clone(), b2.clone())).unwrap();
        let mut st = ElmState::new(m);
        st.ledger.declare("B1", 5).unwrap();
        st.ledger.declare("B2", 7).unwrap();
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        let s = disjoint_section_class(&st.surface).unwrap();
        st.add_section("S", s).unwrap();
        let x = trisection_cover_class(&st.surface);
        st.set_trisection(SurfaceClass::with_formal(3, x.fib_deg, &b2.scaled(2) - &b1)).unwrap();
        for (p, f) in [("Q1", "q1"), ("Q2", "q2")] {
            st.register_point(p, f).unwrap();
            st.mark_on_section("S", p).unwrap();
            st.mark_on_trisection(p, ["S"]).unwrap();
        }
        if with_relation {
            let q = FormalDivisor::sum_of(["q1", "q2"]);
            st.ledger.declare_equivalent(&q, &(&b2 - &b1)).unwrap();
        }
        st
    }

    #[test]
    fn with_relation() {
        let r = minimal_degree_characterization(&state(true)).unwrap();
        assert!(r.consistent, "{r:?}");
        assert_eq!(r.final_e, 0);
        assert!(r.final_trivial && r.relation_holds && r.twisted_trivial);
        // d0 = (b + e)/2 = 7
        assert_eq!(r.final_fiber_degree, Some(7));
    }

    #[test]
    fn without_relation() {
        let r = minimal_degree_characterization(&state(false)).unwrap();
        assert!(r.consistent);
        assert!(!r.final_trivial);
        assert!(r.notes.iter().any(|n| n.contains("not the trivial")));
    }

    #[test]
    fn vacuous() {
        let st = ElmState::new(RuledSurfaceModel::decomposable(1, 6, 6).unwrap());
        assert!(minimal_degree_characterization(&st).unwrap().consistent);
    }
}

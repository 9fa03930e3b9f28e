//! JSON scenario files: a surface, declared symbols and relations, tracked
//! curves and an elm script.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elm::{ElmState, ElmStep, SingularityProfile};
use crate::picard::FormalDivisor;
use crate::ruled::{trisection_cover_class, Bundle, RuledSurfaceModel, Splitting, SurfaceClass};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    Version(u32),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid<E: std::fmt::Display>(e: E) -> ScenarioError {
    ScenarioError::Invalid(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingSpec {
    pub b1: i64,
    pub b2: i64,
    #[serde(default)]
    pub formal: Option<(FormalDivisor, FormalDivisor)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub g_y: i64,
    #[serde(default)]
    pub g_x: Option<i64>,
    #[serde(default)]
    pub b: Option<i64>,
    #[serde(default)]
    pub n: Option<i64>,
    #[serde(default)]
    pub e: Option<i64>,
    #[serde(default)]
    pub splitting: Option<SplittingSpec>,
    #[serde(default)]
    pub indecomposable: bool,
    /// Waives `b = g_x − 3g_y + 2`.
    #[serde(default, rename = "raw-surface", alias = "raw")]
    pub raw: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub lhs: FormalDivisor,
    #[serde(default)]
    pub rhs: FormalDivisor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub id: String,
    pub fib_deg: i64,
    #[serde(default)]
    pub fib_formal: Option<FormalDivisor>,
    #[serde(default)]
    pub marked_points: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrisectionSpec {
    /// Defaults to the cover class `3S0 + π*(3N − B)`.
    #[serde(default)]
    pub fib_deg: Option<i64>,
    #[serde(default)]
    pub fib_formal: Option<FormalDivisor>,
    #[serde(default)]
    pub singularities: Vec<SingularityProfile>,
    #[serde(default)]
    pub marked_smooth_points: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioChecks {
    #[serde(default)]
    pub minimal_degree: bool,
    #[serde(default)]
    pub expect_final_e: Option<i64>,
    #[serde(default)]
    pub expect_final_fib_deg: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub symbols: BTreeMap<String, i64>,
    #[serde(default)]
    pub relations: Vec<RelationSpec>,
    #[serde(default)]
    pub points: BTreeMap<String, String>,
    #[serde(default)]
    pub sections: Vec<SectionSpec>,
    #[serde(default)]
    pub trisection: Option<TrisectionSpec>,
    #[serde(default)]
    pub script: Vec<ElmStep>,
    #[serde(default)]
    pub checks: ScenarioChecks,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = serde_json::from_str(text)?;
        if sc.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::Version(sc.schema_version));
        }
        Ok(sc)
    }

    pub fn surface_model(&self) -> Result<RuledSurfaceModel, ScenarioError> {
        let s = &self.surface;
        let mut m = if let Some(sp) = &s.splitting {
            let split = Splitting { b1: sp.b1, b2: sp.b2, formal: sp.formal.clone() };
            let mut m = RuledSurfaceModel::decomposable_with(s.g_y, split).map_err(invalid)?;
            if let Some(b) = s.b {
                if b != m.b {
                    return Err(invalid(format!("b = {b} but the splitting gives {}", m.b)));
                }
            }
            if let Some(g_x) = s.g_x {
                m.g_x = g_x;
            }
            m
        } else {
            let b = match (s.b, s.g_x) {
                (Some(b), _) => b,
                (None, Some(g_x)) => g_x - 3 * s.g_y + 2,
                (None, None) => return Err(invalid("surface needs g_x or b")),
            };
            let n = match (s.n, s.e) {
                (Some(n), _) => n,
                (None, Some(e)) => {
                    if (e - b).rem_euclid(2) != 0 {
                        return Err(invalid(format!("parity: e = {e} and b = {b}")));
                    }
                    (b + e) / 2
                }
                (None, None) => return Err(invalid("surface needs n or e")),
            };
            let mut m = RuledSurfaceModel::raw(s.g_y, b, n).map_err(invalid)?;
            if let Some(g_x) = s.g_x {
                m.g_x = g_x;
            }
            m
        };
        if let Some(n) = s.n {
            if n != m.n {
                return Err(invalid(format!("n = {n} but the model has n = {}", m.n)));
            }
        }
        if let Some(e) = s.e {
            if e != m.e {
                return Err(invalid(format!("e = {e} but the model has e = {}", m.e)));
            }
        }
        if s.indecomposable {
            if s.splitting.is_some() {
                return Err(invalid("indecomposable surface with a splitting"));
            }
            m.bundle = Bundle::Indecomposable;
        }
        m.raw = s.raw;
        m.validate().map_err(invalid)?;
        Ok(m)
    }

    /// The initial state described by the file (the script is not run).
    pub fn build_state(&self) -> Result<ElmState, ScenarioError> {
        let mut st = ElmState::new(self.surface_model()?);
        for (sym, deg) in &self.symbols {
            st.ledger.declare(sym.clone(), *deg).map_err(invalid)?;
        }
        for (pt, fiber) in &self.points {
            st.register_point(pt.clone(), fiber.clone()).map_err(invalid)?;
        }
        for rel in &self.relations {
            st.ledger.declare_equivalent(&rel.lhs, &rel.rhs).map_err(invalid)?;
        }
        for s in &self.sections {
            let class = SurfaceClass { sigma: 1, fib_deg: s.fib_deg, fib_formal: s.fib_formal.clone() };
            st.add_section(s.id.clone(), class).map_err(invalid)?;
            for p in &s.marked_points {
                st.mark_on_section(&s.id, p).map_err(invalid)?;
            }
        }
        if let Some(t) = &self.trisection {
            let class = match t.fib_deg {
                Some(z) => SurfaceClass { sigma: 3, fib_deg: z, fib_formal: t.fib_formal.clone() },
                None => {
                    let c = trisection_cover_class(&st.surface);
                    SurfaceClass { sigma: 3, fib_deg: c.fib_deg, fib_formal: t.fib_formal.clone() }
                }
            };
            st.set_trisection(class).map_err(invalid)?;
            for p in &t.singularities {
                st.add_profile(p.clone()).map_err(invalid)?;
            }
            for (p, secs) in &t.marked_smooth_points {
                st.mark_on_trisection(p, secs.iter().cloned()).map_err(invalid)?;
            }
        }
        st.validate().map_err(invalid)?;
        Ok(st)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROP: &str = r#"{
      "schema_version": 1,
      "surface": {"g_y": 1, "splitting": {"b1": 5, "b2": 7, "formal": [{"B1": 1}, {"B2": 1}]}},
      "symbols": {"B1": 5, "B2": 7},
      "points": {"Q1": "q1", "Q2": "q2"},
      "relations": [{"lhs": {"q1": 1, "q2": 1}, "rhs": {"B2": 1, "B1": -1}}],
      "sections": [
        {"id": "S0", "fib_deg": 0, "fib_formal": {}},
        {"id": "S", "fib_deg": 2, "fib_formal": {"B2": 1, "B1": -1}, "marked_points": ["Q1", "Q2"]}
      ],
      "trisection": {"fib_formal": {"B2": 2, "B1": -1}, "marked_smooth_points": {"Q1": ["S"], "Q2": ["S"]}},
      "script": [
        {"center": "Q1", "fiber": "q1", "on_sections": ["S"], "trisection_multiplicity": 1},
        {"center": "Q2", "fiber": "q2", "on_sections": ["S"], "trisection_multiplicity": 1}
      ],
      "checks": {"minimal_degree": true, "expect_final_e": 0}
    }"#;

    #[test]
    fn parses_and_builds() {
        let sc = Scenario::from_json(PROP).unwrap();
        let st = sc.build_state().unwrap();
        assert_eq!(st.surface.e, 2);
        assert_eq!(st.trisection.as_ref().unwrap().class.fib_deg, 9);
        assert_eq!(sc.script.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Scenario::from_json("{"), Err(ScenarioError::Parse(_))));
        let v2 = PROP.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(Scenario::from_json(&v2), Err(ScenarioError::Version(2))));
        let bad = PROP.replace("\"Q1\": \"q1\",", "");
        assert!(Scenario::from_json(&bad).unwrap().build_state().is_err());
    }
}

//! Resolving trisection singularities by elementary transformations centered
//! at singular points.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::elm::{ElmState, ElmStep, Engine, SingularityProfile};
use crate::error::ElmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Exhaustive { budget: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub state: ElmState,
    pub steps: Vec<ElmStep>,
    pub alpha: usize,
    pub delta_e: i64,
    /// Every step raised e.
    pub monotone_raise: bool,
    pub alpha_equals_abs_delta_e: bool,
}

fn moves(state: &ElmState, depth: usize) -> Vec<ElmStep> {
    let Some(tri) = &state.trisection else { return Vec::new() };
    let mut profiles: Vec<&SingularityProfile> = tri.singularities.iter().collect();
    profiles.sort_by(|a, b| a.base_fiber.cmp(&b.base_fiber));
    let mut out = Vec::new();
    for p in profiles {
        for on_min in [true, false] {
            let mut step = ElmStep::new(format!("{}#{depth}", p.base_fiber), p.base_fiber.clone())
                .on_min(on_min)
                .mult(p.r());
            if on_min && state.surface.e > 0 {
                if let Some(m) = state.min_section() {
                    step = step.on(m.id.clone());
                }
            }
            out.push(step);
        }
    }
    out
}

fn done(state: &ElmState, target_e: Option<i64>) -> bool {
    state.total_delta() == 0 && target_e.is_none_or(|t| state.surface.e == t)
}

fn finish(start: &ElmState, state: ElmState, steps: Vec<ElmStep>) -> Resolution {
    let delta_e = state.surface.e - start.surface.e;
    let alpha = steps.len();
    Resolution {
        monotone_raise: steps.iter().all(|s| s.on_min_section),
        alpha_equals_abs_delta_e: alpha as i64 == delta_e.abs(),
        state,
        steps,
        alpha,
        delta_e,
    }
}

type Key = (i64, Vec<(String, Vec<u8>)>, i64);

fn key(state: &ElmState) -> Key {
    let tri = state.trisection.as_ref();
    let mut prof: Vec<(String, Vec<u8>)> = tri
        .map(|t| t.singularities.iter().map(|p| (p.base_fiber.clone(), p.multiplicities.clone())).collect())
        .unwrap_or_default();
    prof.sort();
    (state.surface.e, prof, tri.map_or(0, |t| t.class.fib_deg))
}

pub fn resolve_singularities(
    state: &ElmState,
    strategy: Strategy,
    target_e: Option<i64>,
) -> Result<Resolution, ElmError> {
    resolve_with(&Engine::default(), state, strategy, target_e)
}

pub fn resolve_with(
    engine: &Engine,
    state: &ElmState,
    strategy: Strategy,
    target_e: Option<i64>,
) -> Result<Resolution, ElmError> {
    match strategy {
        Strategy::Greedy => greedy(engine, state, target_e),
        Strategy::Exhaustive { budget } => exhaustive(engine, state, target_e, budget),
    }
}

/// First singular point in fiber order; raise e while below the target.
fn greedy(engine: &Engine, start: &ElmState, target_e: Option<i64>) -> Result<Resolution, ElmError> {
    let cap = start.total_delta() as usize;
    let mut state = start.clone();
    let mut steps = Vec::new();
    while state.total_delta() > 0 {
        if steps.len() >= cap {
            return Err(ElmError::NoResolution);
        }
        let prefer_min = target_e.is_none_or(|t| state.surface.e < t);
        let cands = moves(&state, steps.len());
        let Some(fiber) = cands.first().map(|s| s.fiber.clone()) else { break };
        let mut pair: Vec<ElmStep> = cands.into_iter().filter(|s| s.fiber == fiber).collect();
        pair.sort_by_key(|s| s.on_min_section != prefer_min);
        let mut advanced = false;
        for step in pair {
            if let Ok(next) = engine.apply(&state, &step) {
                state = next;
                steps.push(step);
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Err(ElmError::NoResolution);
        }
    }
    if !done(&state, target_e) {
        return Err(ElmError::NoResolution);
    }
    Ok(finish(start, state, steps))
}

/// Breadth first, so the first goal reached has minimal length.
fn exhaustive(engine: &Engine, start: &ElmState, target_e: Option<i64>, budget: usize) -> Result<Resolution, ElmError> {
    let max_depth = start.total_delta() as usize;
    let mut queue = VecDeque::from([(start.clone(), Vec::<ElmStep>::new())]);
    let mut seen: HashSet<Key> = HashSet::from([key(start)]);
    let mut expanded = 0usize;
    while let Some((state, steps)) = queue.pop_front() {
        if done(&state, target_e) {
            return Ok(finish(start, state, steps));
        }
        if steps.len() >= max_depth {
            continue;
        }
        expanded += 1;
        if expanded > budget {
            return Err(ElmError::BudgetExceeded(budget));
        }
        for step in moves(&state, steps.len()) {
            let Ok(next) = engine.apply(&state, &step) else { continue };
            if seen.insert(key(&next)) {
                let mut path = steps.clone();
                path.push(step);
                queue.push_back((next, path));
            }
        }
    }
    Err(ElmError::NoResolution)
}

/// Fibers carrying a singularity, in search order.
pub fn singular_fibers(state: &ElmState) -> BTreeSet<String> {
    state
        .trisection
        .iter()
        .flat_map(|t| t.singularities.iter().map(|p| p.base_fiber.clone()))
        .collect()
}

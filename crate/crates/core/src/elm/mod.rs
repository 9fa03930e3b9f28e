//! Elementary transformations acting on a tracked ruled surface.
//!
//! A step `elm_P` blows up `P` and contracts the strict transform of the fiber
//! through it. For a class `a·S0 + z·F` with multiplicity `r` at `P` the new
//! fiber degree, measured against the image of the old minimal section, is
//! `z − r + a·ε` where `ε = 1` iff `P` lies on a minimal section.

pub mod oracle;
pub mod resolve;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ElmError;
use crate::picard::{EquivalenceLedger, FormalDivisor};
use crate::ruled::{arithmetic_genus, intersect, Bundle, RuledSurfaceModel, Splitting, SurfaceClass};

/// Multiplicity chain of a trisection singularity and its infinitely near
/// singular points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingularityProfile {
    pub base_fiber: String,
    pub multiplicities: Vec<u8>,
}

impl SingularityProfile {
    pub fn new(base_fiber: impl Into<String>, multiplicities: Vec<u8>) -> Result<Self, ElmError> {
        let p = Self { base_fiber: base_fiber.into(), multiplicities };
        p.validate()?;
        Ok(p)
    }

    pub fn node(base_fiber: impl Into<String>) -> Self {
        Self { base_fiber: base_fiber.into(), multiplicities: vec![2] }
    }

    pub fn triple(base_fiber: impl Into<String>) -> Self {
        Self { base_fiber: base_fiber.into(), multiplicities: vec![3] }
    }

    pub fn validate(&self) -> Result<(), ElmError> {
        if self.multiplicities.is_empty() {
            return Err(ElmError::ProfileMismatch(format!("empty chain at {}", self.base_fiber)));
        }
        if self.multiplicities.iter().any(|r| !(2..=3).contains(r)) {
            return Err(ElmError::ProfileMismatch(format!(
                "chain {:?} at {} has entries outside {{2, 3}}",
                self.multiplicities, self.base_fiber
            )));
        }
        if self.multiplicities.windows(2).any(|w| w[1] > w[0]) {
            return Err(ElmError::ProfileMismatch(format!(
                "chain {:?} at {} is not non-increasing",
                self.multiplicities, self.base_fiber
            )));
        }
        Ok(())
    }

    /// Current multiplicity.
    pub fn r(&self) -> u8 {
        self.multiplicities[0]
    }

    pub fn delta(&self) -> i64 {
        self.multiplicities.iter().map(|&r| delta_of(r)).sum()
    }
}

fn delta_of(r: u8) -> i64 {
    let r = r as i64;
    r * (r - 1) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackedSection {
    pub id: String,
    pub class: SurfaceClass,
    pub is_min_degree: bool,
    #[serde(default)]
    pub marked_points: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackedTrisection {
    pub class: SurfaceClass,
    #[serde(default)]
    pub singularities: Vec<SingularityProfile>,
    /// Smooth points of the trisection, each with the sections through it.
    #[serde(default)]
    pub marked_smooth_points: BTreeMap<String, BTreeSet<String>>,
}

impl TrackedTrisection {
    pub fn new(class: SurfaceClass) -> Self {
        Self { class, singularities: Vec::new(), marked_smooth_points: BTreeMap::new() }
    }

    pub fn total_delta(&self) -> i64 {
        self.singularities.iter().map(SingularityProfile::delta).sum()
    }

    pub fn profile_at(&self, fiber: &str) -> Option<usize> {
        self.singularities.iter().position(|p| p.base_fiber == fiber)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElmStep {
    pub center: String,
    pub fiber: String,
    #[serde(default)]
    pub on_min_section: bool,
    #[serde(default)]
    pub on_sections: BTreeSet<String>,
    #[serde(default)]
    pub trisection_multiplicity: u8,
}

impl ElmStep {
    pub fn new(center: impl Into<String>, fiber: impl Into<String>) -> Self {
        Self {
            center: center.into(),
            fiber: fiber.into(),
            on_min_section: false,
            on_sections: BTreeSet::new(),
            trisection_multiplicity: 0,
        }
    }

    pub fn on_min(mut self, yes: bool) -> Self {
        self.on_min_section = yes;
        self
    }

    pub fn on(mut self, section: impl Into<String>) -> Self {
        self.on_sections.insert(section.into());
        self
    }

    pub fn mult(mut self, r: u8) -> Self {
        self.trisection_multiplicity = r;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplittingChange {
    None,
    MinSide,
    OtherSide,
    Lost { previous: Bundle },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileChange {
    None,
    /// The head of the chain was consumed; `removed` when the chain emptied.
    Popped { index: usize, head: u8, removed: bool },
    Created { index: usize },
}

/// What `apply_inverse` cannot recompute from the step alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undo {
    pub prev_raw: bool,
    pub splitting: SplittingChange,
    pub profile: ProfileChange,
    pub unmarked_sections: Vec<String>,
    pub unmarked_trisection: Option<BTreeSet<String>>,
    pub registered_point: bool,
    pub declared_fiber: bool,
}

impl Undo {
    /// Set when a step used up the last entry of a chain.
    pub fn exhausted_chain(&self) -> bool {
        matches!(self.profile, ProfileChange::Popped { removed: true, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: ElmStep,
    pub undo: Undo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElmState {
    pub surface: RuledSurfaceModel,
    #[serde(default)]
    pub sections: Vec<TrackedSection>,
    #[serde(default)]
    pub trisection: Option<TrackedTrisection>,
    #[serde(default)]
    pub ledger: EquivalenceLedger,
    /// Registered points and the fiber symbol each lies over.
    #[serde(default)]
    pub points: BTreeMap<String, String>,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
}

impl ElmState {
    pub fn new(surface: RuledSurfaceModel) -> Self {
        Self {
            surface,
            sections: Vec::new(),
            trisection: None,
            ledger: EquivalenceLedger::new(),
            points: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    pub fn add_section(&mut self, id: impl Into<String>, class: SurfaceClass) -> Result<&mut Self, ElmError> {
        let id = id.into();
        if class.sigma != 1 {
            return Err(ElmError::InvalidStep(format!("section {id} has sigma {}", class.sigma)));
        }
        if self.section(&id).is_some() {
            return Err(ElmError::InvalidStep(format!("section {id} already tracked")));
        }
        let is_min_degree = class.fib_deg == 0;
        self.sections.push(TrackedSection { id, class, is_min_degree, marked_points: BTreeSet::new() });
        Ok(self)
    }

    pub fn set_trisection(&mut self, class: SurfaceClass) -> Result<&mut Self, ElmError> {
        if class.sigma != 3 {
            return Err(ElmError::InvalidStep(format!("trisection has sigma {}", class.sigma)));
        }
        self.trisection = Some(TrackedTrisection::new(class));
        Ok(self)
    }

    pub fn add_profile(&mut self, profile: SingularityProfile) -> Result<&mut Self, ElmError> {
        profile.validate()?;
        let tri = self.trisection.as_mut().ok_or_else(|| ElmError::InvalidStep("no trisection".into()))?;
        if tri.profile_at(&profile.base_fiber).is_some() {
            return Err(ElmError::ProfileMismatch(format!("fiber {} already has a profile", profile.base_fiber)));
        }
        tri.singularities.push(profile);
        Ok(self)
    }

    /// Registers `point` over `fiber`, declaring the fiber symbol with degree 1.
    pub fn register_point(&mut self, point: impl Into<String>, fiber: impl Into<String>) -> Result<&mut Self, ElmError> {
        let (point, fiber) = (point.into(), fiber.into());
        if let Some(f) = self.points.get(&point) {
            if *f != fiber {
                return Err(ElmError::InvalidStep(format!("point {point} already lies over {f}")));
            }
        }
        self.ledger.declare(fiber.clone(), 1)?;
        self.points.insert(point, fiber);
        Ok(self)
    }

    pub fn mark_on_section(&mut self, section: &str, point: &str) -> Result<&mut Self, ElmError> {
        if !self.points.contains_key(point) {
            return Err(ElmError::InvalidStep(format!("point {point} is not registered")));
        }
        let s = self.section_mut(section)?;
        s.marked_points.insert(point.to_string());
        Ok(self)
    }

    pub fn mark_on_trisection<I, S>(&mut self, point: &str, sections: I) -> Result<&mut Self, ElmError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if !self.points.contains_key(point) {
            return Err(ElmError::InvalidStep(format!("point {point} is not registered")));
        }
        let secs: BTreeSet<String> = sections.into_iter().map(Into::into).collect();
        for s in &secs {
            self.section(s).ok_or_else(|| ElmError::UnknownSection(s.clone()))?;
        }
        let tri = self.trisection.as_mut().ok_or_else(|| ElmError::InvalidStep("no trisection".into()))?;
        tri.marked_smooth_points.insert(point.to_string(), secs);
        Ok(self)
    }

    pub fn section(&self, id: &str) -> Option<&TrackedSection> {
        self.sections.iter().find(|s| s.id == id)
    }

    fn section_mut(&mut self, id: &str) -> Result<&mut TrackedSection, ElmError> {
        self.sections
            .iter_mut()
            .find(|s| s.id == id)
            .ok_or_else(|| ElmError::UnknownSection(id.to_string()))
    }

    /// First tracked section of class `(1, 0)`.
    pub fn min_section(&self) -> Option<&TrackedSection> {
        self.sections.iter().find(|s| s.is_min_degree)
    }

    pub fn total_delta(&self) -> i64 {
        self.trisection.as_ref().map_or(0, TrackedTrisection::total_delta)
    }

    /// `p_a − Σδ` of the trisection.
    pub fn trisection_genus(&self) -> Result<Option<i64>, ElmError> {
        match &self.trisection {
            None => Ok(None),
            Some(t) => Ok(Some(arithmetic_genus(&t.class, &self.surface)? - t.total_delta())),
        }
    }

    pub fn validate(&self) -> Result<(), ElmError> {
        for (i, s) in self.sections.iter().enumerate() {
            if s.class.sigma != 1 {
                return Err(ElmError::InvalidStep(format!("section {} has sigma {}", s.id, s.class.sigma)));
            }
            if s.is_min_degree != (s.class.fib_deg == 0) {
                return Err(ElmError::InvalidStep(format!("section {} has a stale minimality flag", s.id)));
            }
            if self.sections[..i].iter().any(|t| t.id == s.id) {
                return Err(ElmError::InvalidStep(format!("duplicate section id {}", s.id)));
            }
            for p in &s.marked_points {
                if !self.points.contains_key(p) {
                    return Err(ElmError::InvalidStep(format!("point {p} is not registered")));
                }
            }
            if !s.class.check_formal(&self.ledger)? {
                return Err(ElmError::InvalidStep(format!("section {} formal degree mismatch", s.id)));
            }
        }
        if let Some(t) = &self.trisection {
            if t.class.sigma != 3 {
                return Err(ElmError::InvalidStep(format!("trisection has sigma {}", t.class.sigma)));
            }
            if !t.class.check_formal(&self.ledger)? {
                return Err(ElmError::InvalidStep("trisection formal degree mismatch".into()));
            }
            let mut seen = BTreeSet::new();
            for p in &t.singularities {
                p.validate()?;
                if !seen.insert(&p.base_fiber) {
                    return Err(ElmError::ProfileMismatch(format!("two profiles at {}", p.base_fiber)));
                }
            }
            for (p, secs) in &t.marked_smooth_points {
                if !self.points.contains_key(p) {
                    return Err(ElmError::InvalidStep(format!("point {p} is not registered")));
                }
                for s in secs {
                    self.section(s).ok_or_else(|| ElmError::UnknownSection(s.clone()))?;
                }
            }
        }
        for f in self.points.values() {
            if self.ledger.symbol_degree(f) != Some(1) {
                return Err(ElmError::InvalidStep(format!("fiber symbol {f} must have degree 1")));
            }
        }
        Ok(())
    }
}

/// Deliberate defects for checking that the test suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the e update.
    NegateEUpdate,
    /// Do not consume the chain on an r = 2 step.
    KeepDeltaOnR2,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Engine {
    pub fault: Option<Fault>,
}

impl Engine {
    pub fn with_fault(fault: Fault) -> Self {
        Self { fault: Some(fault) }
    }

    pub fn apply(&self, state: &ElmState, step: &ElmStep) -> Result<ElmState, ElmError> {
        check_step(state, step)?;
        let eps = step.on_min_section;
        let r = step.trisection_multiplicity;
        let p = FormalDivisor::symbol(step.fiber.clone());
        let mut next = state.clone();

        let declared_fiber = next.ledger.symbol_degree(&step.fiber).is_none();
        if declared_fiber {
            next.ledger.declare(step.fiber.clone(), 1)?;
        }
        let registered_point = !next.points.contains_key(&step.center);
        if registered_point {
            next.points.insert(step.center.clone(), step.fiber.clone());
        }

        let splitting = update_bundle(&mut next, step, &p);
        let prev_raw = next.surface.raw;
        let s = &mut next.surface;
        let up = eps != (self.fault == Some(Fault::NegateEUpdate));
        s.b -= 1;
        s.e += if up { 1 } else { -1 };
        s.n = (s.e + s.b) / 2;
        s.raw = true;

        let mut unmarked_sections = Vec::new();
        for sec in &mut next.sections {
            let rs = i64::from(step.on_sections.contains(&sec.id));
            shift_class(&mut sec.class, rs, eps, &p, 1);
            sec.is_min_degree = sec.class.fib_deg == 0;
            if sec.marked_points.remove(&step.center) {
                unmarked_sections.push(sec.id.clone());
            }
        }

        let mut profile = ProfileChange::None;
        let mut unmarked_trisection = None;
        if let Some(tri) = next.trisection.as_mut() {
            shift_class(&mut tri.class, r as i64, eps, &p, 3);
            unmarked_trisection = tri.marked_smooth_points.remove(&step.center);
            profile = match (r, tri.profile_at(&step.fiber)) {
                (2 | 3, Some(i)) => {
                    if r == 2 && self.fault == Some(Fault::KeepDeltaOnR2) {
                        ProfileChange::None
                    } else {
                        let chain = &mut tri.singularities[i].multiplicities;
                        let head = chain.remove(0);
                        let removed = chain.is_empty();
                        if removed {
                            tri.singularities.remove(i);
                        }
                        ProfileChange::Popped { index: i, head, removed }
                    }
                }
                (0 | 1, None) => {
                    let created = if r == 0 { SingularityProfile::triple(&*step.fiber) } else { SingularityProfile::node(&*step.fiber) };
                    tri.singularities.push(created);
                    ProfileChange::Created { index: tri.singularities.len() - 1 }
                }
                _ => unreachable!("checked by check_step"),
            };
        }

        next.history.push(HistoryEntry {
            step: step.clone(),
            undo: Undo {
                prev_raw,
                splitting,
                profile,
                unmarked_sections,
                unmarked_trisection,
                registered_point,
                declared_fiber,
            },
        });
        Ok(next)
    }
}

pub fn apply_elm(state: &ElmState, step: &ElmStep) -> Result<ElmState, ElmError> {
    Engine::default().apply(state, step)
}

/// `z ↦ z − r + a·ε`, with the matching formal update.
fn shift_class(c: &mut SurfaceClass, r: i64, eps: bool, p: &FormalDivisor, a: i64) {
    let k = a * i64::from(eps) - r;
    c.fib_deg += k;
    if let Some(z) = c.fib_formal.as_mut() {
        *z = &*z + &p.scaled(k);
    }
}

fn unshift_class(c: &mut SurfaceClass, r: i64, eps: bool, p: &FormalDivisor, a: i64) {
    shift_class(c, -r, false, p, a);
    if eps {
        c.fib_deg -= a;
        if let Some(z) = c.fib_formal.as_mut() {
            *z = &*z - &p.scaled(a);
        }
    }
}

fn update_bundle(state: &mut ElmState, step: &ElmStep, p: &FormalDivisor) -> SplittingChange {
    let e = state.surface.e;
    let on_disjoint = step
        .on_sections
        .iter()
        .filter_map(|id| state.section(id))
        .any(|s| s.class.fib_deg == e);
    match &mut state.surface.bundle {
        Bundle::Decomposable(sp) if step.on_min_section => {
            sp.b1 -= 1;
            if let Some((b1, _)) = sp.formal.as_mut() {
                *b1 = &*b1 - p;
            }
            SplittingChange::MinSide
        }
        Bundle::Decomposable(sp) if on_disjoint && e >= 1 => {
            sp.b2 -= 1;
            if let Some((_, b2)) = sp.formal.as_mut() {
                *b2 = &*b2 - p;
            }
            SplittingChange::OtherSide
        }
        Bundle::Unknown => SplittingChange::None,
        b => SplittingChange::Lost { previous: std::mem::take(b) },
    }
}

fn check_step(state: &ElmState, step: &ElmStep) -> Result<(), ElmError> {
    let r = step.trisection_multiplicity;
    if r > 3 {
        return Err(ElmError::InvalidStep(format!("multiplicity {r} exceeds 3")));
    }
    if state.trisection.is_none() && r != 0 {
        return Err(ElmError::InvalidStep("multiplicity given but no trisection is tracked".into()));
    }
    if let Some(f) = state.points.get(&step.center) {
        if *f != step.fiber {
            return Err(ElmError::InvalidStep(format!("{} lies over {f}, not {}", step.center, step.fiber)));
        }
    }
    if let Some(d) = state.ledger.symbol_degree(&step.fiber) {
        if d != 1 {
            return Err(ElmError::InvalidStep(format!("fiber symbol {} has degree {d}", step.fiber)));
        }
    }
    let mut on = Vec::new();
    for id in &step.on_sections {
        on.push(state.section(id).ok_or_else(|| ElmError::UnknownSection(id.clone()))?);
    }
    for s in &state.sections {
        if s.marked_points.contains(&step.center) && !step.on_sections.contains(&s.id) {
            return Err(ElmError::InvalidStep(format!("{} is marked on {} but the step is off it", step.center, s.id)));
        }
    }
    for s in &on {
        if s.is_min_degree && !step.on_min_section {
            return Err(ElmError::InvalidStep(format!("{} is a minimal section but on_min_section is false", s.id)));
        }
    }
    if state.surface.e > 0 && step.on_min_section {
        if let Some(m) = state.min_section() {
            if !step.on_sections.contains(&m.id) {
                return Err(ElmError::InvalidStep(format!(
                    "e > 0 so the minimal section is unique, but the center is off {}",
                    m.id
                )));
            }
        }
    }
    for (i, s) in on.iter().enumerate() {
        for t in &on[i + 1..] {
            if intersect(&s.class, &t.class, &state.surface) < 1 {
                return Err(ElmError::InvalidStep(format!("{} and {} do not meet", s.id, t.id)));
            }
        }
    }
    if let Some(tri) = &state.trisection {
        for s in &on {
            let m = intersect(&s.class, &tri.class, &state.surface);
            if m < r as i64 {
                return Err(ElmError::InvalidStep(format!("{}·C = {m} < r = {r}", s.id)));
            }
        }
        if let Some(secs) = tri.marked_smooth_points.get(&step.center) {
            if r != 1 {
                return Err(ElmError::InvalidStep(format!("{} is a smooth point of C but r = {r}", step.center)));
            }
            if let Some(s) = secs.iter().find(|s| !step.on_sections.contains(*s)) {
                return Err(ElmError::InvalidStep(format!("{} lies on {s} but the step is off it", step.center)));
            }
        }
        match (r, tri.profile_at(&step.fiber)) {
            (2 | 3, Some(i)) if tri.singularities[i].r() == r => {}
            (2 | 3, Some(i)) => {
                return Err(ElmError::ProfileMismatch(format!(
                    "r = {r} but the profile at {} has r = {}",
                    step.fiber,
                    tri.singularities[i].r()
                )))
            }
            (2 | 3, None) => {
                return Err(ElmError::ProfileMismatch(format!("r = {r} but no singularity at {}", step.fiber)))
            }
            (_, Some(_)) => {
                return Err(ElmError::ProfileMismatch(format!(
                    "r = {r} at {} which carries an active singularity",
                    step.fiber
                )))
            }
            (_, None) => {}
        }
    }
    let consumes = r >= 2;
    for h in state.history.iter().filter(|h| h.step.fiber == step.fiber) {
        if !consumes && h.step.on_sections.is_disjoint(&step.on_sections) {
            return Err(ElmError::InvalidStep(format!(
                "fiber {} was already used by {} and the step neither follows a section through it nor resolves a singularity",
                step.fiber, h.step.center
            )));
        }
    }
    Ok(())
}

/// Undoes the last step.
pub fn apply_inverse(state: &ElmState) -> Result<ElmState, ElmError> {
    let mut prev = state.clone();
    let HistoryEntry { step, undo } = prev.history.pop().ok_or(ElmError::EmptyHistory)?;
    let eps = step.on_min_section;
    let p = FormalDivisor::symbol(step.fiber.clone());

    let s = &mut prev.surface;
    s.b += 1;
    s.e += if eps { -1 } else { 1 };
    s.n = (s.e + s.b) / 2;
    s.raw = undo.prev_raw;
    match (&mut s.bundle, undo.splitting) {
        (Bundle::Decomposable(sp), SplittingChange::MinSide) => {
            sp.b1 += 1;
            if let Some((b1, _)) = sp.formal.as_mut() {
                *b1 = &*b1 + &p;
            }
        }
        (Bundle::Decomposable(sp), SplittingChange::OtherSide) => {
            sp.b2 += 1;
            if let Some((_, b2)) = sp.formal.as_mut() {
                *b2 = &*b2 + &p;
            }
        }
        (b, SplittingChange::Lost { previous }) => *b = previous,
        (_, SplittingChange::None) => {}
        (b, change) => {
            return Err(ElmError::InvalidStep(format!("history records {change:?} but the bundle is {b:?}")));
        }
    }

    for sec in &mut prev.sections {
        let rs = i64::from(step.on_sections.contains(&sec.id));
        unshift_class(&mut sec.class, rs, eps, &p, 1);
        sec.is_min_degree = sec.class.fib_deg == 0;
    }
    for id in &undo.unmarked_sections {
        prev.section_mut(id)?.marked_points.insert(step.center.clone());
    }

    if let Some(tri) = prev.trisection.as_mut() {
        unshift_class(&mut tri.class, step.trisection_multiplicity as i64, eps, &p, 3);
        if let Some(secs) = undo.unmarked_trisection {
            tri.marked_smooth_points.insert(step.center.clone(), secs);
        }
        match undo.profile {
            ProfileChange::None => {}
            ProfileChange::Popped { index, head, removed: true } => {
                tri.singularities.insert(index, SingularityProfile { base_fiber: step.fiber.clone(), multiplicities: vec![head] });
            }
            ProfileChange::Popped { index, head, removed: false } => {
                tri.singularities[index].multiplicities.insert(0, head);
            }
            ProfileChange::Created { index } => {
                tri.singularities.remove(index);
            }
        }
    }

    if undo.registered_point {
        prev.points.remove(&step.center);
    }
    if undo.declared_fiber {
        prev.ledger.undeclare(&step.fiber);
    }
    Ok(prev)
}

/// Intersection number of two tracked sections.
pub fn sections_pairwise_check(state: &ElmState, s1: &str, s2: &str) -> Result<i64, ElmError> {
    let a = state.section(s1).ok_or_else(|| ElmError::UnknownSection(s1.to_string()))?;
    let b = state.section(s2).ok_or_else(|| ElmError::UnknownSection(s2.to_string()))?;
    Ok(intersect(&a.class, &b.class, &state.surface))
}

/// Splitting degrees as an ordered pair, or `None` if untracked.
pub fn splitting_degrees(state: &ElmState) -> Option<(i64, i64)> {
    state.surface.splitting().map(|s: &Splitting| (s.b1, s.b2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruled::{disjoint_section_class, trisection_cover_class};

    fn product_state(g_y: i64, z: i64) -> ElmState {
        let mut st = ElmState::new(RuledSurfaceModel::product(g_y));
        st.set_trisection(SurfaceClass::with_formal(3, z, FormalDivisor::zero())).unwrap();
        st
    }

    #[test]
    fn e_moves_by_one() {
        let st = ElmState::new(RuledSurfaceModel::product(1));
        let off = apply_elm(&st, &ElmStep::new("P", "p")).unwrap();
        assert_eq!(off.surface.e, -1);
        let on = apply_elm(&st, &ElmStep::new("P", "p").on_min(true)).unwrap();
        assert_eq!(on.surface.e, 1);
        assert_eq!(apply_inverse(&on).unwrap(), st);
    }

    #[test]
    fn four_trisection_cases() {
        // reference section S is the minimal one here
        let mut st = ElmState::new(RuledSurfaceModel::decomposable(1, 16, 18).unwrap());
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        let x = trisection_cover_class(&st.surface);
        st.set_trisection(x.clone()).unwrap();
        let z = x.fib_deg;
        let e = st.surface.e;
        let cases = [(true, 0, 3), (true, 1, 2), (false, 0, 0), (false, 1, -1)];
        for (on_s, r, shift) in cases {
            let mut step = ElmStep::new("P", "p").on_min(on_s).mult(r);
            if on_s {
                step = step.on("S0");
            }
            let next = apply_elm(&st, &step).unwrap();
            let tri = next.trisection.as_ref().unwrap();
            // fiber degree relative to S' (the image of S0, still (1, 0))
            assert_eq!(tri.class.fib_deg, z + shift, "case on_s={on_s} r={r}");
            assert_eq!(next.section("S0").unwrap().class.fib_deg, 0);
            assert_eq!(next.surface.e, if on_s { e + 1 } else { e - 1 });
            assert_eq!(tri.class.fib_formal.as_ref().unwrap().coeff("p"), shift);
            assert_eq!(apply_inverse(&next).unwrap(), st);
        }
    }

    #[test]
    fn section_lemma() {
        let mut st = ElmState::new(RuledSurfaceModel::decomposable(1, 16, 18).unwrap());
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        st.add_section("S", disjoint_section_class(&st.surface).unwrap()).unwrap();
        let before = st.section("S").unwrap().class.fib_deg - st.section("S0").unwrap().class.fib_deg;
        let next = apply_elm(&st, &ElmStep::new("P", "p").on_min(true).on("S0")).unwrap();
        let after = next.section("S").unwrap().class.fib_deg - next.section("S0").unwrap().class.fib_deg;
        assert_eq!(after, before + 1);
        assert_eq!(splitting_degrees(&next), Some((15, 18)));
        assert_eq!(sections_pairwise_check(&next, "S", "S0").unwrap(), 0);
    }

    #[test]
    fn node_chain_consumed() {
        let mut st = product_state(1, 10);
        st.add_profile(SingularityProfile::new("p", vec![2, 2, 2]).unwrap()).unwrap();
        assert_eq!(st.total_delta(), 3);
        let g = st.trisection_genus().unwrap();
        let next = apply_elm(&st, &ElmStep::new("P", "p").on_min(true).mult(2)).unwrap();
        let tri = next.trisection.as_ref().unwrap();
        assert_eq!(tri.singularities[0].multiplicities, vec![2, 2]);
        assert_eq!(next.total_delta(), 2);
        assert_eq!(tri.class.fib_deg, 11);
        assert_eq!(next.trisection_genus().unwrap(), g);
    }

    #[test]
    fn triple_point_and_exhaustion() {
        let mut st = product_state(2, 9);
        st.add_profile(SingularityProfile::triple("p")).unwrap();
        let next = apply_elm(&st, &ElmStep::new("P", "p").mult(3)).unwrap();
        assert_eq!(next.total_delta(), 0);
        assert!(next.history[0].undo.exhausted_chain());
        assert_eq!(next.trisection_genus().unwrap(), st.trisection_genus().unwrap());
        assert_eq!(apply_inverse(&next).unwrap(), st);
    }

    #[test]
    fn created_singularities_keep_genus() {
        let st = product_state(1, 8);
        let g = st.trisection_genus().unwrap();
        for (on, r) in [(true, 0), (true, 1), (false, 0), (false, 1)] {
            let next = apply_elm(&st, &ElmStep::new("P", "p").on_min(on).mult(r)).unwrap();
            assert_eq!(next.trisection_genus().unwrap(), g);
        }
    }

    #[test]
    fn profile_mismatches() {
        let mut st = product_state(1, 8);
        st.add_profile(SingularityProfile::node("p")).unwrap();
        assert!(matches!(apply_elm(&st, &ElmStep::new("P", "p").mult(3)), Err(ElmError::ProfileMismatch(_))));
        assert!(matches!(apply_elm(&st, &ElmStep::new("P", "p").mult(1)), Err(ElmError::ProfileMismatch(_))));
        assert!(matches!(apply_elm(&st, &ElmStep::new("Q", "q").mult(2)), Err(ElmError::ProfileMismatch(_))));
        assert!(SingularityProfile::new("q", vec![2, 3]).is_err());
    }

    #[test]
    fn invalid_steps() {
        let mut st = ElmState::new(RuledSurfaceModel::decomposable(1, 16, 18).unwrap());
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        st.add_section("S", disjoint_section_class(&st.surface).unwrap()).unwrap();
        st.register_point("P", "p").unwrap();
        st.mark_on_section("S", "P").unwrap();
        // marked on S but claimed off it
        assert!(apply_elm(&st, &ElmStep::new("P", "p")).is_err());
        // unique minimal section must carry an on-min center
        assert!(apply_elm(&st, &ElmStep::new("Q", "q").on_min(true)).is_err());
        // S0 and S are disjoint
        assert!(apply_elm(&st, &ElmStep::new("Q", "q").on_min(true).on("S0").on("S")).is_err());
        // wrong fiber for a registered point
        assert!(apply_elm(&st, &ElmStep::new("P", "x").on("S")).is_err());
        assert!(matches!(apply_elm(&st, &ElmStep::new("Q", "q").on("T")), Err(ElmError::UnknownSection(_))));
        let ok = apply_elm(&st, &ElmStep::new("P", "p").on("S")).unwrap();
        assert!(ok.section("S").unwrap().marked_points.is_empty());
        // reusing the fiber off every section
        assert!(apply_elm(&ok, &ElmStep::new("P2", "p")).is_err());
        assert!(apply_elm(&ok, &ElmStep::new("P2", "p").on("S")).is_ok());
    }

    #[test]
    fn inverse_restores_everything() {
        let mut st = ElmState::new(RuledSurfaceModel::decomposable(1, 16, 18).unwrap());
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        st.add_section("S", disjoint_section_class(&st.surface).unwrap()).unwrap();
        st.set_trisection(trisection_cover_class(&st.surface)).unwrap();
        st.register_point("P", "p").unwrap();
        st.mark_on_section("S", "P").unwrap();
        st.mark_on_trisection("P", ["S"]).unwrap();
        let next = apply_elm(&st, &ElmStep::new("P", "p").on("S").mult(1)).unwrap();
        assert_eq!(splitting_degrees(&next), Some((16, 17)));
        assert_eq!(apply_inverse(&next).unwrap(), st);
        assert_eq!(apply_inverse(&st), Err(ElmError::EmptyHistory));
    }

    #[test]
    fn pairwise_examples() {
        let mut st = ElmState::new(RuledSurfaceModel::decomposable(1, 16, 18).unwrap());
        st.add_section("S0", SurfaceClass::min_section()).unwrap();
        st.add_section("S1", SurfaceClass::new(1, 2)).unwrap();
        st.add_section("S2", SurfaceClass::new(1, 2)).unwrap();
        assert_eq!(sections_pairwise_check(&st, "S0", "S1").unwrap(), 0);
        assert_eq!(sections_pairwise_check(&st, "S1", "S2").unwrap(), 2);
        assert_eq!(sections_pairwise_check(&st, "S0", "S0").unwrap(), -2);
        assert!(sections_pairwise_check(&st, "S0", "X").is_err());
    }

    #[test]
    fn faults_change_results() {
        let st = ElmState::new(RuledSurfaceModel::product(1));
        let bad = Engine::with_fault(Fault::NegateEUpdate).apply(&st, &ElmStep::new("P", "p").on_min(true)).unwrap();
        assert_eq!(bad.surface.e, -1);
        let mut st = product_state(1, 8);
        st.add_profile(SingularityProfile::node("p")).unwrap();
        let bad = Engine::with_fault(Fault::KeepDeltaOnR2).apply(&st, &ElmStep::new("P", "p").mult(2)).unwrap();
        assert_eq!(bad.total_delta(), 1);
    }
}

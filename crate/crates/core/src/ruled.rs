//! Numerical model of a ruled surface `P(E)` over a base curve `Y`.
//!
//! Divisor classes are written `a·S0 + z·F` where `S0` is a minimal degree
//! section (`S0² = −e`) and `F` a fiber. All invariants here are twist
//! independent except `b` and `n`, which depend on the chosen representative
//! `E` of the surface.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::picard::{EquivalenceLedger, FormalDivisor};

/// Degrees (and optionally formal classes) of the summands of a decomposable
/// `E = O(B1) ⊕ O(B2)`, with `b1 ≤ b2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splitting {
    pub b1: i64,
    pub b2: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal: Option<(FormalDivisor, FormalDivisor)>,
}

impl Splitting {
    pub fn new(b1: i64, b2: i64) -> Self {
        Self { b1, b2, formal: None }
    }

    pub fn with_formal(b1: i64, b2: i64, big_b1: FormalDivisor, big_b2: FormalDivisor) -> Self {
        Self { b1, b2, formal: Some((big_b1, big_b2)) }
    }

    pub fn e(&self) -> i64 {
        self.b2 - self.b1
    }
}

/// What is known about the rank two bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bundle {
    #[default]
    Unknown,
    Indecomposable,
    Decomposable(Splitting),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuledSurfaceModel {
    pub g_y: i64,
    pub g_x: i64,
    /// deg E (= deg B for the Tschirnhausen bundle).
    pub b: i64,
    /// deg N, where E ⊗ O(−N) is normalized.
    pub n: i64,
    pub e: i64,
    #[serde(default)]
    pub bundle: Bundle,
    /// When set, `b` is not tied to the cover genus `g_x`.
    #[serde(default)]
    pub raw: bool,
}

impl RuledSurfaceModel {
    /// The surface carrying a triple cover of genus `g_x` over a genus `g_y`
    /// curve, with e-invariant `e`.
    pub fn tschirnhausen(g_y: i64, g_x: i64, e: i64) -> Result<Self, ModelError> {
        let b = g_x - 3 * g_y + 2;
        if (b - e).rem_euclid(2) != 0 {
            return Err(ModelError::Parity { e, b });
        }
        let m = Self { g_y, g_x, b, n: (b + e) / 2, e, bundle: Bundle::Unknown, raw: false };
        m.validate()?;
        Ok(m)
    }

    /// Decomposable Tschirnhausen bundle `O(B1) ⊕ O(B2)` with the given degrees.
    pub fn decomposable(g_y: i64, b1: i64, b2: i64) -> Result<Self, ModelError> {
        Self::decomposable_with(g_y, Splitting::new(b1, b2))
    }

    pub fn decomposable_with(g_y: i64, splitting: Splitting) -> Result<Self, ModelError> {
        let b = splitting.b1 + splitting.b2;
        let m = Self {
            g_y,
            g_x: b + 3 * g_y - 2,
            b,
            n: splitting.b2,
            e: splitting.e(),
            bundle: Bundle::Decomposable(splitting),
            raw: false,
        };
        m.validate()?;
        Ok(m)
    }

    /// An arbitrary ruled surface given by `deg E` and `deg N`.
    pub fn raw(g_y: i64, b: i64, n: i64) -> Result<Self, ModelError> {
        let m = Self { g_y, g_x: b + 3 * g_y - 2, b, n, e: 2 * n - b, bundle: Bundle::Unknown, raw: true };
        m.validate()?;
        Ok(m)
    }

    /// `Y × P¹ = P(O ⊕ O)`.
    pub fn product(g_y: i64) -> Self {
        Self {
            g_y,
            g_x: 3 * g_y - 2,
            b: 0,
            n: 0,
            e: 0,
            bundle: Bundle::Decomposable(Splitting::with_formal(0, 0, FormalDivisor::zero(), FormalDivisor::zero())),
            raw: true,
        }
    }

    pub fn with_bundle(mut self, bundle: Bundle) -> Result<Self, ModelError> {
        self.bundle = bundle;
        self.validate()?;
        Ok(self)
    }

    pub fn splitting(&self) -> Option<&Splitting> {
        match &self.bundle {
            Bundle::Decomposable(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_indecomposable(&self) -> bool {
        matches!(self.bundle, Bundle::Indecomposable)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.g_y < 0 {
            return Err(ModelError::Invalid(format!("g_y = {} is negative", self.g_y)));
        }
        if self.e != 2 * self.n - self.b {
            return Err(ModelError::Invalid(format!(
                "e = {} but 2n − b = {}",
                self.e,
                2 * self.n - self.b
            )));
        }
        if !self.raw && self.b != self.g_x - 3 * self.g_y + 2 {
            return Err(ModelError::Invalid(format!(
                "b = {} but g_x − 3g_y + 2 = {}",
                self.b,
                self.g_x - 3 * self.g_y + 2
            )));
        }
        if let Some(s) = self.splitting() {
            if s.b1 > s.b2 {
                return Err(ModelError::Invalid(format!("splitting ({}, {}) not ordered", s.b1, s.b2)));
            }
            if s.b1 + s.b2 != self.b {
                return Err(ModelError::Invalid(format!("b1 + b2 = {} ≠ b = {}", s.b1 + s.b2, self.b)));
            }
            if s.e() != self.e {
                return Err(ModelError::Invalid(format!("b2 − b1 = {} ≠ e = {}", s.e(), self.e)));
            }
        }
        Ok(())
    }

    /// Degrees of the symbols `B`, `N`, `K_Y` used by [`canonical_class`]
    /// and [`trisection_cover_class`].
    pub fn standard_ledger(&self) -> EquivalenceLedger {
        let mut l = EquivalenceLedger::new();
        l.declare("B", self.b).expect("fresh ledger");
        l.declare("N", self.n).expect("fresh ledger");
        l.declare("K_Y", 2 * self.g_y - 2).expect("fresh ledger");
        l
    }
}

/// `sigma·S0 + π*Z` with `deg Z = fib_deg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub sigma: i64,
    pub fib_deg: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fib_formal: Option<FormalDivisor>,
}

impl SurfaceClass {
    pub fn new(sigma: i64, fib_deg: i64) -> Self {
        Self { sigma, fib_deg, fib_formal: None }
    }

    pub fn with_formal(sigma: i64, fib_deg: i64, z: FormalDivisor) -> Self {
        Self { sigma, fib_deg, fib_formal: Some(z) }
    }

    pub fn min_section() -> Self {
        Self::with_formal(1, 0, FormalDivisor::zero())
    }

    pub fn fiber() -> Self {
        Self::new(0, 1)
    }

    /// Checks `deg(fib_formal) = fib_deg` against a ledger.
    pub fn check_formal(&self, ledger: &EquivalenceLedger) -> Result<bool, ModelError> {
        match &self.fib_formal {
            Some(z) => Ok(ledger.degree(z)? == self.fib_deg),
            None => Ok(true),
        }
    }

    pub fn numerical(&self) -> (i64, i64) {
        (self.sigma, self.fib_deg)
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.sigma, self.fib_deg)?;
        if let Some(z) = &self.fib_formal {
            write!(f, " = {}S0 + π*({z})", self.sigma)?;
        }
        Ok(())
    }
}

/// Intersection pairing: `(a1 S0 + z1 F)·(a2 S0 + z2 F) = −e a1 a2 + a1 z2 + a2 z1`.
pub fn intersect(c1: &SurfaceClass, c2: &SurfaceClass, m: &RuledSurfaceModel) -> i64 {
    -m.e * c1.sigma * c2.sigma + c1.sigma * c2.fib_deg + c2.sigma * c1.fib_deg
}

/// `K ∼ −2S0 + π*(B − 2N + K_Y)`.
pub fn canonical_class(m: &RuledSurfaceModel) -> SurfaceClass {
    SurfaceClass::with_formal(
        -2,
        m.b - 2 * m.n + 2 * m.g_y - 2,
        FormalDivisor::from_terms([("B", 1), ("N", -2), ("K_Y", 1)]),
    )
}

/// The class of the embedded cover, `X ∼ 3S0 + π*(3N − B)`.
pub fn trisection_cover_class(m: &RuledSurfaceModel) -> SurfaceClass {
    SurfaceClass::with_formal(3, 3 * m.n - m.b, FormalDivisor::from_terms([("N", 3), ("B", -1)]))
}

/// Arithmetic genus by adjunction, `1 + (C² + C·K)/2`.
pub fn arithmetic_genus(c: &SurfaceClass, m: &RuledSurfaceModel) -> Result<i64, ModelError> {
    if c.sigma < 0 {
        return Err(ModelError::NotEffective(c.sigma));
    }
    let k = canonical_class(m);
    let twice = intersect(c, c, m) + intersect(c, &k, m);
    if twice.rem_euclid(2) != 0 {
        return Err(ModelError::ParityError(twice));
    }
    Ok(1 + twice / 2)
}

/// `m = (b − |e|)/2 − 2`.
pub fn m_invariant(m: &RuledSurfaceModel) -> i64 {
    debug_assert_eq!((m.b - m.e).rem_euclid(2), 0);
    (m.b - m.e.abs()).div_euclid(2) - 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "violations", rename_all = "snake_case")]
pub enum EBounds {
    Ok,
    Violations(Vec<String>),
}

impl EBounds {
    pub fn is_ok(&self) -> bool {
        matches!(self, EBounds::Ok)
    }
}

/// Checks the admissible range of `e` for a Tschirnhausen bundle. Reports
/// violations instead of failing, since intermediate surfaces need not obey it.
pub fn e_bounds_check(m: &RuledSurfaceModel) -> EBounds {
    let mut v = Vec::new();
    let (e, b) = (m.e, m.b);
    if e < -m.g_y {
        v.push(format!("e = {e} < −g_y = {}", -m.g_y));
    }
    match m.splitting() {
        None => {
            if e > 2 * m.g_y - 2 {
                v.push(format!("e = {e} > 2g_y − 2 = {} (no splitting)", 2 * m.g_y - 2));
            }
        }
        Some(s) => {
            if e < 0 {
                v.push(format!("e = {e} < 0 for a decomposable bundle"));
            }
            if 3 * e > b {
                v.push(format!("e = {e} > b/3 = {b}/3"));
            }
            if 3 * s.b1 < b {
                v.push(format!("b1 = {} < b/3 = {b}/3", s.b1));
            }
            if 2 * s.b1 > b {
                v.push(format!("b1 = {} > b/2 = {b}/2", s.b1));
            }
            if 2 * s.b2 < b {
                v.push(format!("b2 = {} < b/2 = {b}/2", s.b2));
            }
            if 3 * s.b2 > 2 * b {
                v.push(format!("b2 = {} > 2b/3 = {}/3", s.b2, 2 * b));
            }
        }
    }
    if v.is_empty() {
        EBounds::Ok
    } else {
        EBounds::Violations(v)
    }
}

/// A section disjoint from `S0`: `S0 + π*(B2 − B1)`.
pub fn disjoint_section_class(m: &RuledSurfaceModel) -> Result<SurfaceClass, ModelError> {
    let s = m.splitting().ok_or(ModelError::NotDecomposable)?;
    Ok(match &s.formal {
        Some((b1, b2)) => SurfaceClass::with_formal(1, s.e(), b2 - b1),
        None => SurfaceClass::new(1, s.e()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(g_y: i64, b: i64, n: i64) -> RuledSurfaceModel {
        let mut m = RuledSurfaceModel::raw(g_y, b, n).unwrap();
        m.raw = false;
        m.validate().unwrap();
        m
    }

    #[test]
    fn intersect_examples() {
        let m = model(1, 9, 5);
        assert_eq!(m.e, 1);
        let s0 = SurfaceClass::min_section();
        assert_eq!(intersect(&s0, &s0, &m), -1);
        assert_eq!(intersect(&s0, &SurfaceClass::fiber(), &m), 1);
        assert_eq!(intersect(&SurfaceClass::new(3, 6), &SurfaceClass::new(-2, -1), &m), -9);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_class(&model(0, 7, 4)).numerical(), (-2, -3));
        assert_eq!(canonical_class(&model(1, 9, 5)).numerical(), (-2, -1));
        assert_eq!(canonical_class(&RuledSurfaceModel::product(1)).numerical(), (-2, 0));
    }

    #[test]
    fn canonical_formal_degree_matches() {
        let m = model(2, 13, 8);
        let k = canonical_class(&m);
        assert!(k.check_formal(&m.standard_ledger()).unwrap());
        assert!(trisection_cover_class(&m).check_formal(&m.standard_ledger()).unwrap());
    }

    #[test]
    fn trisection_examples() {
        assert_eq!(trisection_cover_class(&model(1, 9, 5)).numerical(), (3, 6));
        assert_eq!(trisection_cover_class(&model(1, 12, 6)).numerical(), (3, 6));
        assert_eq!(trisection_cover_class(&model(0, 7, 4)).numerical(), (3, 5));
    }

    #[test]
    fn genus_examples() {
        let m = model(1, 9, 5);
        assert_eq!(m.g_x, 10);
        assert_eq!(arithmetic_genus(&trisection_cover_class(&m), &m).unwrap(), 10);
        let p = RuledSurfaceModel::product(1);
        assert_eq!(arithmetic_genus(&SurfaceClass::new(3, 10), &p).unwrap(), 21);
        for g_y in 0..4 {
            let m = model(g_y, 11, 7);
            assert_eq!(arithmetic_genus(&SurfaceClass::min_section(), &m).unwrap(), g_y);
        }
    }

    #[test]
    fn genus_errors() {
        let m = model(1, 9, 5);
        assert_eq!(arithmetic_genus(&SurfaceClass::new(-1, 0), &m), Err(ModelError::NotEffective(-1)));
        // 2S0 on e = 1: c² + cK = −4 + (4 − 2·... ) ; odd fiber twist breaks parity only with odd e·a terms
        let c = SurfaceClass::new(2, 0);
        let twice = intersect(&c, &c, &m) + intersect(&c, &canonical_class(&m), &m);
        assert_eq!(twice % 2, 0);
    }

    #[test]
    fn m_invariant_examples() {
        assert_eq!(m_invariant(&RuledSurfaceModel::tschirnhausen(0, 5, 1).unwrap()), 1);
        assert_eq!(m_invariant(&RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap()), 4);
        assert_eq!(m_invariant(&RuledSurfaceModel::decomposable(1, 16, 18).unwrap()), 14);
    }

    #[test]
    fn e_bounds_examples() {
        let m = RuledSurfaceModel::tschirnhausen(1, 12, -1).unwrap();
        assert!(e_bounds_check(&m).is_ok());
        let m = RuledSurfaceModel::tschirnhausen(1, 12, 3).unwrap();
        match e_bounds_check(&m) {
            EBounds::Violations(v) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].contains("2g_y − 2"));
            }
            EBounds::Ok => panic!("expected a violation"),
        }
        let m = RuledSurfaceModel::decomposable(1, 16, 18).unwrap();
        assert_eq!(m.b, 34);
        assert!(e_bounds_check(&m).is_ok());
        let m = RuledSurfaceModel::decomposable(1, 10, 24).unwrap();
        assert!(!e_bounds_check(&m).is_ok());
    }

    #[test]
    fn disjoint_section_examples() {
        let m = RuledSurfaceModel::decomposable(1, 16, 18).unwrap();
        let s = disjoint_section_class(&m).unwrap();
        assert_eq!(s.numerical(), (1, 2));
        assert_eq!(intersect(&s, &SurfaceClass::min_section(), &m), 0);

        let m = RuledSurfaceModel::decomposable(1, 7, 7).unwrap();
        assert_eq!(disjoint_section_class(&m).unwrap().numerical(), (1, 0));

        let m = RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap();
        assert_eq!(disjoint_section_class(&m), Err(ModelError::NotDecomposable));
    }

    #[test]
    fn model_validation() {
        assert!(matches!(RuledSurfaceModel::tschirnhausen(1, 13, 1), Err(ModelError::Parity { .. })));
        let mut m = RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap();
        m.n += 1;
        assert!(m.validate().is_err());
    }
}

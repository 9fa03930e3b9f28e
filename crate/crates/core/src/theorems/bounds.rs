//! Degree bounds for pencils on triple covers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TheoremError;
use crate::picard::h0_line_bundle;
use crate::ruled::{intersect, m_invariant, Bundle, RuledSurfaceModel, SurfaceClass};

/// Reduced fraction with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "denominator must be positive");
        let g = gcd(num.abs(), den);
        Self { num: num / g, den: den / g }
    }

    pub fn ceil(self) -> i64 {
        (self.num + self.den - 1).div_euclid(self.den)
    }

    /// `x < self` for an integer x.
    pub fn exceeds(self, x: i64) -> bool {
        x * self.den < self.num
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

pub fn is_prime(k: i64) -> bool {
    k >= 2 && (2..).take_while(|i| i * i <= k).all(|i| k % i != 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MustFactor,
    Impossible,
    MinimalRequiresDecomposable,
    Guaranteed,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub cs: Option<Ratio>,
    pub cs_ceil: Option<i64>,
    pub theorem_b: Option<i64>,
    pub theorem_a: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismVerdict {
    pub verdict: Verdict,
    pub thresholds: Thresholds,
}

/// `(g_x − k·g_y + k − 1)/(k − 1)`.
pub fn cs_threshold(g_x: i64, g_y: i64, k: i64) -> Result<Ratio, TheoremError> {
    if !is_prime(k) {
        return Err(TheoremError::NonPrimeK(k));
    }
    Ok(Ratio::new(g_x - k * g_y + k - 1, k - 1))
}

/// Classical Castelnuovo–Severi: a degree `d` pencil below the threshold
/// factors through the degree `k` covering.
pub fn cs_classical(g_x: i64, g_y: i64, k: i64, d: i64) -> Result<MorphismVerdict, TheoremError> {
    let th = cs_threshold(g_x, g_y, k)?;
    if d < 1 {
        return Err(TheoremError::PreconditionFailed(format!("d = {d} < 1")));
    }
    let verdict = if th.exceeds(d) { Verdict::MustFactor } else { Verdict::Unknown };
    Ok(MorphismVerdict {
        verdict,
        thresholds: Thresholds { cs: Some(th), cs_ceil: Some(th.ceil()), ..Thresholds::default() },
    })
}

/// `(b + |e|)/2`.
pub fn theorem_b_bound(m: &RuledSurfaceModel) -> i64 {
    (m.b + m.e.abs()).div_euclid(2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ThresholdA {
    Threshold(i64),
    PreconditionFailed(String),
}

impl ThresholdA {
    pub fn value(&self) -> Option<i64> {
        match self {
            ThresholdA::Threshold(v) => Some(*v),
            ThresholdA::PreconditionFailed(_) => None,
        }
    }
}

/// `(b + |e|)/2 + 4g_y` when `g_x ≥ 9g_y + 4`.
pub fn theorem_a_threshold(m: &RuledSurfaceModel) -> ThresholdA {
    if m.g_x >= 9 * m.g_y + 4 {
        ThresholdA::Threshold(theorem_b_bound(m) + 4 * m.g_y)
    } else {
        ThresholdA::PreconditionFailed(format!("g_x = {} < 9g_y + 4 = {}", m.g_x, 9 * m.g_y + 4))
    }
}

pub fn verdict(m: &RuledSurfaceModel, d: i64) -> MorphismVerdict {
    let bound = theorem_b_bound(m);
    let a = theorem_a_threshold(m).value();
    let cs = cs_threshold(m.g_x, m.g_y, 3).ok();
    let thresholds = Thresholds { cs, cs_ceil: cs.map(Ratio::ceil), theorem_b: Some(bound), theorem_a: a };
    let verdict = if d < bound {
        Verdict::Impossible
    } else if d == bound && m.e >= 0 {
        if matches!(m.bundle, Bundle::Indecomposable) {
            Verdict::Impossible
        } else {
            Verdict::MinimalRequiresDecomposable
        }
    } else if a.is_some_and(|t| d >= t) {
        Verdict::Guaranteed
    } else {
        Verdict::Unknown
    };
    MorphismVerdict { verdict, thresholds }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    VeryAmple,
    SeparatesFibers,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H0Chain {
    pub a: i64,
    pub window: (i64, i64),
    /// `h⁰(P(E), K + X − π*A)` from rank two Riemann–Roch on `Y`.
    pub h0_surface: i64,
    pub h0_fa: i64,
    /// `h⁰(X, K_X − f*A)` from Riemann–Roch on `X`.
    pub h0_kx_fa: i64,
    /// `deg(−B + N + A)`, negative so the second summand has no sections.
    pub vanishing_degree: i64,
    /// `C·X − C·C` for `C = K + X − π*A`.
    pub restriction_margin: i64,
    pub cut_out: bool,
    pub geometry: Geometry,
}

impl H0Chain {
    pub fn agrees(&self) -> bool {
        self.h0_surface == self.h0_kx_fa
    }
}

/// Admissible `deg A` for the h⁰ chain: `max(2g_y − 1, 0) ..= m`.
pub fn h0_window(m: &RuledSurfaceModel) -> (i64, i64) {
    ((2 * m.g_y - 1).max(0), m_invariant(m))
}

pub fn h0_chain(m: &RuledSurfaceModel, a: i64) -> Result<H0Chain, TheoremError> {
    if m.g_x < 9 * m.g_y + 4 {
        return Err(TheoremError::PreconditionFailed(format!("g_x = {} < 9g_y + 4", m.g_x)));
    }
    let (lo, hi) = h0_window(m);
    if a < lo || a > hi {
        return Err(TheoremError::OutOfWindow { a, lo, hi });
    }
    let g_y = m.g_y;
    let vanishing_degree = -m.b + m.n + a;
    if vanishing_degree >= 0 {
        return Err(TheoremError::PreconditionFailed(format!("deg(−B + N + A) = {vanishing_degree} ≥ 0")));
    }
    let twist = m.n + 2 * g_y - 2 - a;
    let h0_surface = -m.e + 2 * twist + 2 * (1 - g_y);

    let h0_a = h0_line_bundle(g_y, a, false)
        .exact()
        .ok_or_else(|| TheoremError::PreconditionFailed(format!("h⁰(Y, A) undetermined for deg A = {a}")))?;
    let h0_fa = h0_a;
    let deg_fa = 3 * a;
    let h0_kx_fa = h0_fa - deg_fa + m.g_x - 1;

    let c = SurfaceClass::new(1, twist);
    let x = SurfaceClass::new(3, 3 * m.n - m.b);
    let restriction_margin = intersect(&c, &x, m) - intersect(&c, &c, m);
    Ok(H0Chain {
        a,
        window: (lo, hi),
        h0_surface,
        h0_fa,
        h0_kx_fa,
        vanishing_degree,
        restriction_margin,
        cut_out: restriction_margin > 0,
        geometry: if a < hi { Geometry::VeryAmple } else { Geometry::SeparatesFibers },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    Construction,
    BnExtension,
    Nonspecial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRegime {
    pub justification: Justification,
    pub lo: i64,
    /// `None` means unbounded.
    pub hi: Option<i64>,
}

impl DegreeRegime {
    pub fn contains(&self, d: i64) -> bool {
        d >= self.lo && self.hi.is_none_or(|h| d <= h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PencilRange {
    pub regimes: Vec<DegreeRegime>,
    pub threshold: i64,
    /// Degrees at or above the threshold covered by no regime.
    pub gaps: Vec<i64>,
    pub construction_min: Option<i64>,
    pub construction_max: Option<i64>,
}

impl PencilRange {
    pub fn covers(&self, d: i64) -> bool {
        self.regimes.iter().any(|r| r.contains(d))
    }
}

pub fn pencil_degree_range(m: &RuledSurfaceModel) -> Result<PencilRange, TheoremError> {
    let threshold = theorem_a_threshold(m)
        .value()
        .ok_or_else(|| TheoremError::PreconditionFailed(format!("g_x = {} < 9g_y + 4", m.g_x)))?;
    let (g_x, g_y) = (m.g_x, m.g_y);
    let (lo, hi) = h0_window(m);
    let mut regimes = Vec::new();
    let (mut cmin, mut cmax) = (None, None);
    if lo <= hi {
        cmin = Some(g_x + g_y - hi);
        cmax = Some(g_x + g_y - lo);
        regimes.push(DegreeRegime { justification: Justification::Construction, lo: g_x + g_y - hi, hi: cmax });
    }
    // g_x − g_y + 2 ≤ g_x only for g_y = 2
    if g_y == 2 {
        regimes.push(DegreeRegime { justification: Justification::BnExtension, lo: g_x - g_y + 2, hi: Some(g_x) });
    }
    regimes.push(DegreeRegime { justification: Justification::Nonspecial, lo: g_x + 1, hi: None });
    let mut range = PencilRange { regimes, threshold, gaps: Vec::new(), construction_min: cmin, construction_max: cmax };
    range.gaps = (threshold..=g_x + 1).filter(|&d| !range.covers(d)).collect();
    Ok(range)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GonalityReport {
    pub applies: bool,
    pub genus_floor: i64,
    pub cs_threshold: Ratio,
    pub pencil_floor: i64,
    pub conclusion: Option<String>,
}

/// When `g_x ≥ k²g_y + (k−1)²`, every pencil of degree below `k(g_y + 1)`
/// factors, so the gonality of `X` is `k` times that of `Y`.
pub fn gonality_consequence(g_x: i64, g_y: i64, k: i64) -> Result<GonalityReport, TheoremError> {
    let th = cs_threshold(g_x, g_y, k)?;
    let genus_floor = k * k * g_y + (k - 1) * (k - 1);
    let pencil_floor = k * (g_y + 1);
    let applies = g_x >= genus_floor;
    debug_assert!(!applies || th.num >= pencil_floor * th.den);
    Ok(GonalityReport {
        applies,
        genus_floor,
        cs_threshold: th,
        pencil_floor,
        conclusion: applies.then(|| format!("gon(X) = {k}·gon(Y)")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruled::Splitting;

    #[test]
    fn cs_examples() {
        let v = cs_classical(13, 1, 3, 5).unwrap();
        assert_eq!(v.verdict, Verdict::MustFactor);
        assert_eq!(v.thresholds.cs, Some(Ratio::new(6, 1)));
        assert_eq!(cs_classical(13, 1, 3, 6).unwrap().verdict, Verdict::Unknown);
        let v = cs_classical(5, 0, 3, 3).unwrap();
        assert_eq!(v.verdict, Verdict::MustFactor);
        assert_eq!(v.thresholds.cs.unwrap().to_string(), "7/2");
        assert_eq!(v.thresholds.cs_ceil, Some(4));
        assert_eq!(cs_classical(13, 1, 4, 3), Err(TheoremError::NonPrimeK(4)));
    }

    #[test]
    fn theorem_b_examples() {
        assert_eq!(theorem_b_bound(&RuledSurfaceModel::tschirnhausen(0, 5, 1).unwrap()), 4);
        assert_eq!(theorem_b_bound(&RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap()), 6);
        assert_eq!(theorem_b_bound(&RuledSurfaceModel::decomposable(1, 16, 18).unwrap()), 18);
    }

    #[test]
    fn theorem_a_examples() {
        assert_eq!(theorem_a_threshold(&RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap()), ThresholdA::Threshold(10));
        assert!(theorem_a_threshold(&RuledSurfaceModel::tschirnhausen(1, 12, 1).unwrap()).value().is_none());
        assert_eq!(theorem_a_threshold(&RuledSurfaceModel::tschirnhausen(0, 5, 1).unwrap()), ThresholdA::Threshold(4));
    }

    #[test]
    fn verdict_examples() {
        // b = 12, e = 2
        let m = RuledSurfaceModel::tschirnhausen(1, 13, 2).unwrap().with_bundle(Bundle::Indecomposable).unwrap();
        assert_eq!(verdict(&m, 7).verdict, Verdict::Impossible);
        let m = RuledSurfaceModel::decomposable_with(1, Splitting::new(5, 7)).unwrap();
        assert_eq!(verdict(&m, 7).verdict, Verdict::MinimalRequiresDecomposable);
        let m = RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap();
        assert_eq!(verdict(&m, 10).verdict, Verdict::Guaranteed);
        assert_eq!(verdict(&m, 8).verdict, Verdict::Unknown);
        assert_eq!(verdict(&m, 5).verdict, Verdict::Impossible);
        let m = RuledSurfaceModel::tschirnhausen(1, 13, -2).unwrap();
        assert_eq!(verdict(&m, 7).verdict, Verdict::Unknown);
    }

    #[test]
    fn h0_examples() {
        let m = RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap();
        let c = h0_chain(&m, 2).unwrap();
        assert_eq!((c.h0_surface, c.h0_kx_fa, c.h0_fa), (8, 8, 2));
        assert_eq!(c.geometry, Geometry::VeryAmple);
        assert!(c.cut_out);
        assert_eq!(h0_chain(&m, 4).unwrap().geometry, Geometry::SeparatesFibers);
        assert_eq!(h0_chain(&m, 5), Err(TheoremError::OutOfWindow { a: 5, lo: 1, hi: 4 }));
        assert!(matches!(
            h0_chain(&RuledSurfaceModel::tschirnhausen(1, 12, 1).unwrap(), 2),
            Err(TheoremError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn pencil_examples() {
        let r = pencil_degree_range(&RuledSurfaceModel::tschirnhausen(1, 13, 0).unwrap()).unwrap();
        assert_eq!((r.construction_min, r.construction_max), (Some(10), Some(13)));
        assert_eq!(r.threshold, 10);
        assert!(r.gaps.is_empty());

        let r = pencil_degree_range(&RuledSurfaceModel::tschirnhausen(0, 5, 1).unwrap()).unwrap();
        assert!(r.gaps.is_empty());
        assert!((4..40).all(|d| r.covers(d)));

        let r = pencil_degree_range(&RuledSurfaceModel::tschirnhausen(2, 22, 0).unwrap()).unwrap();
        assert_eq!(r.threshold, 17);
        assert_eq!((r.construction_min, r.construction_max), (Some(17), Some(21)));
        assert!(r.gaps.is_empty());
    }

    #[test]
    fn gonality_examples() {
        assert!(gonality_consequence(13, 1, 3).unwrap().applies);
        assert!(!gonality_consequence(12, 1, 3).unwrap().applies);
        let g = gonality_consequence(4, 0, 2).unwrap();
        assert_eq!(g.conclusion.as_deref(), Some("gon(X) = 2·gon(Y)"));
    }
}

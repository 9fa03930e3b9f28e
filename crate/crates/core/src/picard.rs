//! Formal divisors on the base curve, declared linear equivalences, and
//! degree-level Riemann–Roch.
//!
//! Nothing here knows about actual points or function fields. Symbols carry a
//! declared degree, and two divisors are linearly equivalent exactly when their
//! difference lies in the integer span of the declared relations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::PicardError;

/// A finite integer combination of named base-curve symbols (points such as
/// `q1`, or classes such as `B1`, `K_Y`). Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FormalDivisor {
    terms: BTreeMap<String, i64>,
}

impl FormalDivisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        Self::term(name, 1)
    }

    pub fn term(name: impl Into<String>, coeff: i64) -> Self {
        let mut d = Self::zero();
        d.add_term(name, coeff);
        d
    }

    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut d = Self::zero();
        for (s, c) in terms {
            d.add_term(s, c);
        }
        d
    }

    /// Sum of the given symbols, each with coefficient one.
    pub fn sum_of<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_terms(symbols.into_iter().map(|s| (s, 1)))
    }

    pub fn add_term(&mut self, name: impl Into<String>, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let name = name.into();
        let entry = self.terms.entry(name.clone()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&name);
        }
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.terms.get(name).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self::from_terms(self.terms.iter().map(|(s, c)| (s.clone(), c * k)))
    }
}

impl Add for &FormalDivisor {
    type Output = FormalDivisor;
    fn add(self, rhs: &FormalDivisor) -> FormalDivisor {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), *c);
        }
        out
    }
}

impl Add for FormalDivisor {
    type Output = FormalDivisor;
    fn add(self, rhs: FormalDivisor) -> FormalDivisor {
        &self + &rhs
    }
}

impl Neg for &FormalDivisor {
    type Output = FormalDivisor;
    fn neg(self) -> FormalDivisor {
        self.scaled(-1)
    }
}

impl Neg for FormalDivisor {
    type Output = FormalDivisor;
    fn neg(self) -> FormalDivisor {
        self.scaled(-1)
    }
}

impl Sub for &FormalDivisor {
    type Output = FormalDivisor;
    fn sub(self, rhs: &FormalDivisor) -> FormalDivisor {
        self + &(-rhs)
    }
}

impl Sub for FormalDivisor {
    type Output = FormalDivisor;
    fn sub(self, rhs: FormalDivisor) -> FormalDivisor {
        &self - &rhs
    }
}

impl Mul<&FormalDivisor> for i64 {
    type Output = FormalDivisor;
    fn mul(self, rhs: &FormalDivisor) -> FormalDivisor {
        rhs.scaled(self)
    }
}

impl fmt::Display for FormalDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                (_, s) => write!(f, " {s} ")?,
            }
            if mag == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{mag}{s}")?;
            }
        }
        Ok(())
    }
}

/// Declared symbol degrees plus a list of divisors declared linearly
/// equivalent to zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceLedger {
    degrees: BTreeMap<String, i64>,
    relations: Vec<FormalDivisor>,
}

impl EquivalenceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares (or re-declares with the same value) the degree of a symbol.
    pub fn declare(&mut self, name: impl Into<String>, degree: i64) -> Result<(), PicardError> {
        let name = name.into();
        match self.degrees.get(&name) {
            Some(&d) if d != degree => Err(PicardError::ConflictingDegree {
                symbol: name,
                existing: d,
                requested: degree,
            }),
            _ => {
                self.degrees.insert(name, degree);
                Ok(())
            }
        }
    }

    pub(crate) fn undeclare(&mut self, name: &str) {
        self.degrees.remove(name);
    }

    pub fn symbol_degree(&self, name: &str) -> Option<i64> {
        self.degrees.get(name).copied()
    }

    pub fn degrees(&self) -> &BTreeMap<String, i64> {
        &self.degrees
    }

    pub fn relations(&self) -> &[FormalDivisor] {
        &self.relations
    }

    /// Records `rel ∼ 0`. The relation must have degree zero.
    pub fn add_relation(&mut self, rel: FormalDivisor) -> Result<(), PicardError> {
        let deg = self.degree(&rel)?;
        if deg != 0 {
            return Err(PicardError::NonzeroRelationDegree { relation: rel.to_string(), degree: deg });
        }
        if !rel.is_zero() {
            self.relations.push(rel);
        }
        Ok(())
    }

    /// Records `lhs ∼ rhs`.
    pub fn declare_equivalent(&mut self, lhs: &FormalDivisor, rhs: &FormalDivisor) -> Result<(), PicardError> {
        self.add_relation(lhs - rhs)
    }

    pub fn degree(&self, d: &FormalDivisor) -> Result<i64, PicardError> {
        degree(d, self)
    }

    pub fn equivalent(&self, d1: &FormalDivisor, d2: &FormalDivisor) -> Result<bool, PicardError> {
        equivalent(d1, d2, self)
    }
}

/// Σ coeff · deg(symbol).
pub fn degree(d: &FormalDivisor, ledger: &EquivalenceLedger) -> Result<i64, PicardError> {
    d.terms().try_fold(0i64, |acc, (s, c)| {
        let deg = ledger
            .symbol_degree(s)
            .ok_or_else(|| PicardError::UnknownSymbol(s.to_string()))?;
        Ok(acc + c * deg)
    })
}

/// Linear equivalence modulo the declared relations.
///
/// Returns `false` without solving when the degrees differ. Otherwise decides
/// integer-span membership of `d1 - d2` with an echelon (Hermite-style) form of
/// the relation lattice.
pub fn equivalent(d1: &FormalDivisor, d2: &FormalDivisor, ledger: &EquivalenceLedger) -> Result<bool, PicardError> {
    if degree(d1, ledger)? != degree(d2, ledger)? {
        return Ok(false);
    }
    let diff = d1 - d2;
    if diff.is_zero() {
        return Ok(true);
    }
    for r in ledger.relations() {
        degree(r, ledger)?;
    }

    let mut columns: Vec<&str> = ledger.relations().iter().flat_map(|r| r.symbols()).collect();
    columns.extend(diff.symbols());
    columns.sort_unstable();
    columns.dedup();

    let to_row = |d: &FormalDivisor| -> Vec<i128> { columns.iter().map(|s| d.coeff(s) as i128).collect() };
    let rows: Vec<Vec<i128>> = ledger.relations().iter().map(to_row).collect();
    let target = to_row(&diff);
    Ok(lattice_contains(rows, target))
}

/// Integer row echelon form; pivots are positive and entries above each pivot
/// are reduced into `[0, pivot)`.
pub(crate) fn hermite_rows(mut rows: Vec<Vec<i128>>) -> Vec<(usize, Vec<i128>)> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots: Vec<(usize, Vec<i128>)> = Vec::new();
    for col in 0..ncols {
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.is_empty() {
                break;
            }
            nz.sort_by_key(|&i| rows[i][col].abs());
            let p = nz[0];
            if nz.len() == 1 {
                let mut row = rows.swap_remove(p);
                if row[col] < 0 {
                    row.iter_mut().for_each(|x| *x = -*x);
                }
                pivots.push((col, row));
                break;
            }
            let prow = rows[p].clone();
            for &i in &nz[1..] {
                let q = rows[i][col].div_euclid(prow[col]);
                for (x, y) in rows[i].iter_mut().zip(&prow) {
                    *x -= q * y;
                }
            }
        }
    }
    for k in 0..pivots.len() {
        let (col, prow) = pivots[k].clone();
        for (_, row) in pivots.iter_mut().take(k) {
            let q = row[col].div_euclid(prow[col]);
            if q != 0 {
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= q * y;
                }
            }
        }
    }
    pivots
}

fn lattice_contains(rows: Vec<Vec<i128>>, mut target: Vec<i128>) -> bool {
    if rows.is_empty() {
        return target.iter().all(|&x| x == 0);
    }
    let pivots = hermite_rows(rows);
    let mut next = pivots.iter().peekable();
    for col in 0..target.len() {
        match next.peek() {
            Some((pc, prow)) if *pc == col => {
                if target[col] % prow[col] != 0 {
                    return false;
                }
                let q = target[col] / prow[col];
                for (x, y) in target.iter_mut().zip(prow) {
                    *x -= q * y;
                }
                next.next();
            }
            _ => {
                if target[col] != 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Result of a degree-level h⁰ computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum H0 {
    Exact { value: i64 },
    Range { lo: i64, hi: i64 },
}

impl H0 {
    pub fn exact(self) -> Option<i64> {
        match self {
            H0::Exact { value } => Some(value),
            H0::Range { .. } => None,
        }
    }

    pub fn bounds(self) -> (i64, i64) {
        match self {
            H0::Exact { value } => (value, value),
            H0::Range { lo, hi } => (lo, hi),
        }
    }
}

/// h⁰ of a line bundle of degree `deg` on a curve of genus `genus`.
///
/// Exact whenever degree alone decides it (negative degree, or
/// `deg ≥ 2g − 1`), or when the caller asserts nonspeciality. Otherwise a
/// range bounded below by Riemann–Roch and above by Clifford.
pub fn h0_line_bundle(genus: i64, deg: i64, nonspecial_assumed: bool) -> H0 {
    debug_assert!(genus >= 0);
    if deg < 0 {
        return H0::Exact { value: 0 };
    }
    if deg >= 2 * genus - 1 {
        return H0::Exact { value: deg - genus + 1 };
    }
    if nonspecial_assumed {
        // a nonspecial bundle of degree < g - 1 cannot exist; clamp rather than go negative
        return H0::Exact { value: (deg - genus + 1).max(0) };
    }
    if deg == 2 * genus - 2 {
        return H0::Range { lo: deg - genus + 1, hi: deg - genus + 2 };
    }
    H0::Range { lo: (deg - genus + 1).max(0), hi: deg / 2 + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(degs: &[(&str, i64)]) -> EquivalenceLedger {
        let mut l = EquivalenceLedger::new();
        for (s, d) in degs {
            l.declare(*s, *d).unwrap();
        }
        l
    }

    #[test]
    fn degree_examples() {
        let l = ledger(&[("B1", 16), ("B2", 18)]);
        assert_eq!(degree(&FormalDivisor::symbol("B1"), &l).unwrap(), 16);
        let d = FormalDivisor::from_terms([("B2", 1), ("B1", -1)]);
        assert_eq!(degree(&d, &l).unwrap(), 2);
        let d = FormalDivisor::from_terms([("B2", 2), ("B1", -1)]);
        assert_eq!(degree(&d, &l).unwrap(), 20);
    }

    #[test]
    fn unknown_symbol() {
        let l = ledger(&[("B1", 16)]);
        let err = degree(&FormalDivisor::symbol("q"), &l).unwrap_err();
        assert!(matches!(err, PicardError::UnknownSymbol(s) if s == "q"));
    }

    #[test]
    fn equivalence_examples() {
        let mut l = ledger(&[("B1", 16), ("B2", 18), ("q1", 1), ("q2", 1)]);
        let d = FormalDivisor::from_terms([("B2", 1), ("B1", -1)]);
        assert!(equivalent(&d, &d, &l).unwrap());

        let q = FormalDivisor::sum_of(["q1", "q2"]);
        assert!(!equivalent(&q, &d, &l).unwrap());
        l.declare_equivalent(&q, &d).unwrap();
        assert!(equivalent(&q, &d, &l).unwrap());
        assert!(equivalent(&d, &q, &l).unwrap());

        assert!(!equivalent(&FormalDivisor::symbol("q1"), &d, &l).unwrap());
    }

    #[test]
    fn relation_must_have_degree_zero() {
        let mut l = ledger(&[("p", 1), ("q", 2)]);
        let err = l.add_relation(FormalDivisor::from_terms([("p", 1), ("q", -1)])).unwrap_err();
        assert!(matches!(err, PicardError::NonzeroRelationDegree { degree: -1, .. }));
    }

    #[test]
    fn membership_needs_integer_combinations() {
        // 2(p - q) ∼ 0 does not give p ∼ q: the torsion is not visible to us
        let mut l = ledger(&[("p", 1), ("q", 1)]);
        l.add_relation(FormalDivisor::from_terms([("p", 2), ("q", -2)])).unwrap();
        let p = FormalDivisor::symbol("p");
        let q = FormalDivisor::symbol("q");
        assert!(!equivalent(&p, &q, &l).unwrap());
        assert!(equivalent(&p.scaled(4), &q.scaled(4), &l).unwrap());
        assert!(!equivalent(&p.scaled(3), &q.scaled(3), &l).unwrap());
    }

    #[test]
    fn membership_through_chained_relations() {
        let mut l = ledger(&[("a", 1), ("b", 1), ("c", 1), ("d", 1)]);
        l.declare_equivalent(&FormalDivisor::symbol("a"), &FormalDivisor::symbol("b")).unwrap();
        l.declare_equivalent(&FormalDivisor::symbol("b"), &FormalDivisor::symbol("c")).unwrap();
        let a = FormalDivisor::symbol("a");
        let c = FormalDivisor::symbol("c");
        let d = FormalDivisor::symbol("d");
        assert!(equivalent(&a, &c, &l).unwrap());
        assert!(!equivalent(&a, &d, &l).unwrap());
        let lhs = FormalDivisor::from_terms([("a", 3), ("d", 1)]);
        let rhs = FormalDivisor::from_terms([("c", 2), ("b", 1), ("d", 1)]);
        assert!(equivalent(&lhs, &rhs, &l).unwrap());
    }

    #[test]
    fn hermite_rows_are_echelon() {
        let rows = vec![vec![4i128, 6, 2], vec![6, 9, 3], vec![2, 0, 1]];
        let piv = hermite_rows(rows);
        let cols: Vec<usize> = piv.iter().map(|(c, _)| *c).collect();
        assert!(cols.windows(2).all(|w| w[0] < w[1]));
        for (c, row) in &piv {
            assert!(row[*c] > 0);
            assert!(row[..*c].iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn h0_examples() {
        assert_eq!(h0_line_bundle(1, -3, false), H0::Exact { value: 0 });
        assert_eq!(h0_line_bundle(1, -3, true), H0::Exact { value: 0 });
        assert_eq!(h0_line_bundle(1, 2, false), H0::Exact { value: 2 });
        assert_eq!(h0_line_bundle(2, 2, false), H0::Range { lo: 1, hi: 2 });
        assert_eq!(h0_line_bundle(2, 2, true), H0::Exact { value: 1 });
        assert_eq!(h0_line_bundle(1, 0, false), H0::Range { lo: 0, hi: 1 });
        assert_eq!(h0_line_bundle(0, 0, false), H0::Exact { value: 1 });
    }

    #[test]
    fn display() {
        let d = FormalDivisor::from_terms([("B2", 2), ("B1", -1), ("p", 1)]);
        assert_eq!(d.to_string(), "-B1 + 2B2 + p");
        assert_eq!(FormalDivisor::zero().to_string(), "0");
    }
}

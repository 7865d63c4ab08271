//! Exact cyclotomic arithmetic and enumeration of quasi-unipotent
//! characteristic polynomials by degree and trace.
//!
//! A characteristic polynomial whose roots are all roots of unity is a
//! product `Π Φ_d^{m_d}`, so it is stored as the multiplicity map `d ↦ m_d`.
//! Its degree is `Σ m_d φ(d)` and its trace (sum of roots) is `Σ m_d μ(d)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub fn totient(d: u64) -> u64 {
    let mut n = d;
    let mut out = d;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

pub fn mobius(d: u64) -> i64 {
    let mut n = d;
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

fn divisors(d: u64) -> Vec<u64> {
    (1..=d).filter(|e| d.is_multiple_of(*e)).collect()
}

/// Dense integer polynomial, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPolynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `t^d - 1`.
    pub fn x_pow_minus_one(d: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); d + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[d] += 1;
        Self::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }

    /// Long division by a monic divisor: `(quotient, remainder)`.
    pub fn div_rem_monic(&self, divisor: &IntPolynomial) -> (IntPolynomial, IntPolynomial) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let dd = divisor.degree().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (IntPolynomial::new(Vec::new()), self.clone());
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (IntPolynomial::new(quot), IntPolynomial::new(rem))
    }

    /// Exact quotient, if `divisor` divides `self`.
    pub fn div_exact(&self, divisor: &IntPolynomial) -> Option<IntPolynomial> {
        let (q, r) = self.div_rem_monic(divisor);
        r.is_zero().then_some(q)
    }

    /// Sum of the roots of a monic polynomial: minus the subleading
    /// coefficient.
    pub fn root_sum(&self) -> BigInt {
        match self.degree() {
            Some(d) if d >= 1 => -self.coeff(d - 1),
            _ => BigInt::zero(),
        }
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            first = false;
            if k == 0 || !mag.is_one() {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

/// `Φ_d`, by exact division of `t^d - 1` by the `Φ_e` for proper divisors
/// `e` of `d`.
pub fn cyclotomic_poly(d: u64) -> IntPolynomial {
    assert!(d >= 1, "cyclotomic index must be positive");
    let mut memo = HashMap::new();
    cyclotomic_memo(d, &mut memo)
}

fn cyclotomic_memo(d: u64, memo: &mut HashMap<u64, IntPolynomial>) -> IntPolynomial {
    if let Some(p) = memo.get(&d) {
        return p.clone();
    }
    let mut acc = IntPolynomial::x_pow_minus_one(d as usize);
    for e in divisors(d).into_iter().filter(|&e| e < d) {
        let phi_e = cyclotomic_memo(e, memo);
        acc = acc
            .div_exact(&phi_e)
            .expect("proper cyclotomic factor divides t^d - 1");
    }
    memo.insert(d, acc.clone());
    acc
}

/// Multiplicities `d ↦ m_d` of the cyclotomic factors `Φ_d^{m_d}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CyclotomicMultiset {
    mults: BTreeMap<u64, u64>,
}

impl CyclotomicMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(d, m_d)` pairs; zero multiplicities are dropped and
    /// repeated indices accumulate.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Self {
        let mut out = Self::new();
        for &(d, m) in pairs {
            out.add(d, m);
        }
        out
    }

    pub fn add(&mut self, d: u64, m: u64) {
        assert!(d >= 1, "cyclotomic index must be positive");
        if m > 0 {
            *self.mults.entry(d).or_insert(0) += m;
        }
    }

    pub fn multiplicity(&self, d: u64) -> u64 {
        self.mults.get(&d).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.mults.iter().map(|(&d, &m)| (d, m))
    }

    pub fn is_empty(&self) -> bool {
        self.mults.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.iter().map(|(d, m)| m * totient(d)).sum()
    }

    pub fn trace(&self) -> i64 {
        self.iter().map(|(d, m)| m as i64 * mobius(d)).sum()
    }

    /// Product of the two characteristic polynomials.
    pub fn union(&self, other: &CyclotomicMultiset) -> CyclotomicMultiset {
        let mut out = self.clone();
        for (d, m) in other.iter() {
            out.add(d, m);
        }
        out
    }
}

impl fmt::Display for CyclotomicMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for (d, m) in self.iter() {
            if !first {
                f.write_str("·")?;
            }
            first = false;
            write!(f, "Φ{d}")?;
            if m > 1 {
                write!(f, "^{m}")?;
            }
        }
        Ok(())
    }
}

/// `Π Φ_d^{m_d}` as a dense polynomial.
pub fn expand(ms: &CyclotomicMultiset) -> IntPolynomial {
    let mut memo = HashMap::new();
    let mut acc = IntPolynomial::one();
    for (d, m) in ms.iter() {
        let phi = cyclotomic_memo(d, &mut memo);
        for _ in 0..m {
            acc = acc.mul(&phi);
        }
    }
    acc
}

/// Cyclotomic indices `d` with `φ(d) ≤ degree`. Since `φ(d) ≥ sqrt(d/2)`,
/// every such `d` is at most `2·degree²`.
pub fn candidate_indices(degree: u64) -> Vec<u64> {
    if degree == 0 {
        return Vec::new();
    }
    let limit = (2 * degree * degree).max(2);
    (1..=limit).filter(|&d| totient(d) <= degree).collect()
}

/// Every cyclotomic multiset of the given degree, in ascending order.
pub fn enumerate_by_degree(degree: u64) -> Vec<CyclotomicMultiset> {
    search(degree, None)
}

/// Every cyclotomic multiset with `Σ m_d φ(d) = degree` and
/// `Σ m_d μ(d) = trace`, in ascending order.
pub fn enumerate_charpolys(degree: u64, trace: i64) -> BTreeSet<CyclotomicMultiset> {
    search(degree, Some(trace)).into_iter().collect()
}

type SearchKey = (u64, Option<i64>);

static SEARCH_MEMO: OnceLock<Mutex<HashMap<SearchKey, Vec<CyclotomicMultiset>>>> = OnceLock::new();

fn search(degree: u64, trace: Option<i64>) -> Vec<CyclotomicMultiset> {
    if let Some(t) = trace {
        if t.unsigned_abs() > degree {
            return Vec::new();
        }
    }
    let memo = SEARCH_MEMO.get_or_init(Default::default);
    if let Some(hit) = memo.lock().unwrap().get(&(degree, trace)) {
        return hit.clone();
    }
    let out = search_uncached(degree, trace);
    memo.lock().unwrap().insert((degree, trace), out.clone());
    out
}

fn search_uncached(degree: u64, trace: Option<i64>) -> Vec<CyclotomicMultiset> {
    let parts: Vec<(u64, u64, i64)> = candidate_indices(degree)
        .into_iter()
        .map(|d| (d, totient(d), mobius(d)))
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    search_rec(&parts, 0, degree, trace, &mut current, &mut out);
    out.sort();
    out
}

fn search_rec(
    parts: &[(u64, u64, i64)],
    start: usize,
    degree_left: u64,
    trace_left: Option<i64>,
    current: &mut Vec<(u64, u64)>,
    out: &mut Vec<CyclotomicMultiset>,
) {
    if degree_left == 0 {
        if trace_left.is_none_or(|t| t == 0) {
            out.push(CyclotomicMultiset::from_pairs(current));
        }
        return;
    }
    // |μ(d)| ≤ φ(d), so the remaining trace is bounded by the remaining degree.
    if trace_left.is_some_and(|t| t.unsigned_abs() > degree_left) {
        return;
    }
    for (i, &(d, phi, mu)) in parts.iter().enumerate().skip(start) {
        if phi > degree_left {
            continue;
        }
        let max_mult = degree_left / phi;
        for m in 1..=max_mult {
            current.push((d, m));
            search_rec(
                parts,
                i + 1,
                degree_left - m * phi,
                trace_left.map(|t| t - m as i64 * mu),
                current,
                out,
            );
            current.pop();
        }
    }
}

/// A set of nonnegative integers of the form `[min, max] \ excluded`, with
/// `max = None` meaning unbounded above. Used for the admissible values of a
/// symbolic degree such as `λ^0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DegreeSet {
    pub min: u64,
    pub max: Option<u64>,
    pub excluded: BTreeSet<u64>,
}

impl DegreeSet {
    pub fn at_least(min: u64) -> Self {
        DegreeSet {
            min,
            max: None,
            excluded: BTreeSet::new(),
        }
    }

    pub fn exactly(v: u64) -> Self {
        DegreeSet {
            min: v,
            max: Some(v),
            excluded: BTreeSet::new(),
        }
    }

    pub fn empty() -> Self {
        DegreeSet {
            min: 1,
            max: Some(0),
            excluded: BTreeSet::new(),
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        v >= self.min && self.max.is_none_or(|m| v <= m) && !self.excluded.contains(&v)
    }

    /// Smallest member.
    pub fn least(&self) -> Option<u64> {
        let mut v = self.min;
        loop {
            if self.max.is_some_and(|m| v > m) {
                return None;
            }
            if !self.excluded.contains(&v) {
                return Some(v);
            }
            v += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.least().is_none()
    }

    /// Everything above this value is a member (for unbounded sets).
    fn tail_start(&self) -> u64 {
        self.excluded
            .iter()
            .next_back()
            .map_or(self.min, |&e| e.max(self.min) + 1)
    }

    fn scan_limit(&self) -> u64 {
        match self.max {
            Some(m) => m,
            None => self.tail_start(),
        }
    }

    fn from_predicate(limit: u64, unbounded_tail: bool, pred: impl Fn(u64) -> bool) -> Self {
        let members: Vec<u64> = (0..=limit).filter(|&v| pred(v)).collect();
        let min = match members.first() {
            Some(&m) => m,
            None if unbounded_tail => limit + 1,
            None => return DegreeSet::empty(),
        };
        let max = if unbounded_tail {
            None
        } else {
            members.last().copied()
        };
        let top = max.unwrap_or(limit);
        let excluded = (min..=top).filter(|&v| !pred(v)).collect();
        DegreeSet { min, max, excluded }
    }

    pub fn union(&self, other: &DegreeSet) -> DegreeSet {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let limit = self.scan_limit().max(other.scan_limit());
        let tail = self.max.is_none() || other.max.is_none();
        Self::from_predicate(limit, tail, |v| self.contains(v) || other.contains(v))
    }

    pub fn intersect(&self, other: &DegreeSet) -> DegreeSet {
        let limit = self.scan_limit().max(other.scan_limit());
        let tail = self.max.is_none() && other.max.is_none();
        Self::from_predicate(limit, tail, |v| self.contains(v) && other.contains(v))
    }

    /// `{v + offset : v ∈ self}`.
    pub fn shift(&self, offset: u64) -> DegreeSet {
        if self.is_empty() {
            return DegreeSet::empty();
        }
        DegreeSet {
            min: self.min + offset,
            max: self.max.map(|m| m + offset),
            excluded: self.excluded.iter().map(|e| e + offset).collect(),
        }
    }

    /// Renders as a constraint on the named variable.
    pub fn describe(&self, var: &str) -> String {
        let Some(least) = self.least() else {
            return "infeasible".into();
        };
        let mut out = match self.max {
            Some(m) if m == least => return format!("{var} = {least}"),
            Some(m) => format!("{least} ≤ {var} ≤ {m}"),
            None => format!("{var} ≥ {least}"),
        };
        for e in self.excluded.iter().filter(|&&e| e > least) {
            out.push_str(&format!(", {var} ≠ {e}"));
        }
        out
    }
}

/// All degrees `D` admitting a cyclotomic multiset of trace `trace`:
/// `{0 if trace = 0} ∪ {D ≥ max(1, |trace|)}`, minus `D = 1` when
/// `trace = 0`.
pub fn feasible_degrees(trace: i64) -> DegreeSet {
    let bound = trace.unsigned_abs();
    if bound == 0 {
        let mut set = DegreeSet::at_least(0);
        set.excluded.insert(1);
        set
    } else {
        DegreeSet::at_least(bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Concrete(bool),
    /// Admissible values of an unknown degree.
    Constraint(DegreeSet),
}

/// Feasibility of a (possibly unknown) degree with the given trace.
pub fn feasible_degree_trace(degree: Option<u64>, trace: i64) -> Feasibility {
    match degree {
        Some(d) => Feasibility::Concrete(!enumerate_charpolys(d, trace).is_empty()),
        None => Feasibility::Constraint(feasible_degrees(trace)),
    }
}

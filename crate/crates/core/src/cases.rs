//! Exhaustive enumeration of the admissible structures of the Lê module
//! complex `0 → M^s → ... → M^0 → 0`.
//!
//! Over the rationals each `M^j` carries the monodromy-invariant filtration
//! `im ∂_{j+1} ⊆ ker ∂_j ⊆ M^j`, so it splits into three pieces:
//!
//! * `in`   = `im ∂_{j+1}`, isomorphic (equivariantly) to the `coim` piece
//!   of level `j + 1`;
//! * `h`    = `ker ∂_j / im ∂_{j+1}`, the rational cohomology in degree
//!   `n - j`;
//! * `coim` = `M^j / ker ∂_j`, mapped isomorphically onto `in` of level
//!   `j - 1`.
//!
//! Every piece has a cyclotomic characteristic polynomial and the three
//! traces add up to the Lê-Milnor trace of the level. A [`CaseProfile`] is
//! one assignment of piece ranks for the whole complex together with every
//! compatible choice of characteristic polynomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cyclotomic::{
    enumerate_by_degree, enumerate_charpolys, feasible_degrees, CyclotomicMultiset, DegreeSet,
};
use crate::model::{Flag, LeNumber, Scenario};
use crate::traces::{lm_traces, TraceVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("Lê number λ^{level} is unknown; only λ^0 may be left symbolic")]
    UnsupportedSymbolic { level: usize },
}

/// A rank that is either a number or `λ^0 - offset` for symbolic `λ^0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Exact(u64),
    Lambda0Minus(u64),
}

impl Rank {
    pub fn exact(self) -> Option<u64> {
        match self {
            Rank::Exact(v) => Some(v),
            Rank::Lambda0Minus(_) => None,
        }
    }

    /// Value once `λ^0` is fixed.
    pub fn instantiate(self, lambda0: u64) -> Option<u64> {
        match self {
            Rank::Exact(v) => Some(v),
            Rank::Lambda0Minus(k) => lambda0.checked_sub(k),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Exact(v) => write!(f, "{v}"),
            Rank::Lambda0Minus(0) => f.write_str("λ0"),
            Rank::Lambda0Minus(k) => write!(f, "λ0 - {k}"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Rank::Exact(v) => s.serialize_u64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// Piece ranks at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LevelShape {
    pub level: usize,
    pub rank_in: u64,
    pub rank_h: Rank,
    pub rank_coim: u64,
}

/// Piece ranks and characteristic polynomials at one level. `cp_h` is
/// `None` exactly when the level's Lê number is symbolic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LevelDecomposition {
    pub level: usize,
    /// `trace(α_j)`.
    pub trace: i64,
    pub rank_in: u64,
    pub rank_h: Rank,
    pub rank_coim: u64,
    pub cp_in: CyclotomicMultiset,
    pub cp_h: Option<CyclotomicMultiset>,
    pub cp_coim: CyclotomicMultiset,
}

impl LevelDecomposition {
    pub fn shape(&self) -> LevelShape {
        LevelShape {
            level: self.level,
            rank_in: self.rank_in,
            rank_h: self.rank_h,
            rank_coim: self.rank_coim,
        }
    }
}

/// One complete choice of characteristic polynomials, levels listed from
/// `s` down to `0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Assignment {
    pub levels: Vec<LevelDecomposition>,
    /// Admissible `λ^0` values for this assignment when `λ^0` is symbolic.
    pub lambda0_constraint: Option<DegreeSet>,
}

impl Assignment {
    pub fn level(&self, level: usize) -> &LevelDecomposition {
        let s = self.levels.len() - 1;
        &self.levels[s - level]
    }
}

/// An admissible rank profile of the Lê module complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseProfile {
    /// Levels `s` down to `0`.
    pub levels: Vec<LevelShape>,
    /// All compatible characteristic-polynomial choices, sorted.
    pub assignments: Vec<Assignment>,
    /// Union of the assignments' `λ^0` constraints.
    pub lambda0_constraint: Option<DegreeSet>,
    /// The coarser bound seen by level 0 as a whole: `λ^0 ≥ rank_in(0)`
    /// and feasibility of `trace(α_0)` in degree `λ^0`. Contains
    /// `lambda0_constraint`.
    pub lambda0_level_bound: Option<DegreeSet>,
}

impl CaseProfile {
    pub fn s(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, level: usize) -> &LevelShape {
        &self.levels[self.s() - level]
    }

    /// Characteristic polynomials the cohomology piece at `level` takes
    /// across all assignments.
    pub fn cohomology_charpolys(&self, level: usize) -> Vec<CyclotomicMultiset> {
        let mut out: Vec<_> = self
            .assignments
            .iter()
            .filter_map(|a| a.level(level).cp_h.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Rational Betti numbers `b_{n-j} = rank_h(j)`, keyed by degree.
pub fn betti_of_case(case: &CaseProfile, n: usize) -> BTreeMap<i64, Rank> {
    case.levels
        .iter()
        .map(|l| (n as i64 - l.level as i64, l.rank_h))
        .collect()
}

/// Admissible `λ^0` for a symbolic level 0; `None` when `λ^0` is known.
pub fn lambda0_bound_of_case(case: &CaseProfile) -> Option<DegreeSet> {
    case.lambda0_constraint.clone()
}

/// `λ^0 ≥ rank_in` with `trace(α_0) = trace0` feasible in degree `λ^0`;
/// `{0}` when the swing dichotomy applies with `∂_1 = 0`.
pub fn lambda0_level_bound(rank_in: u64, trace0: i64, forces_zero: bool) -> DegreeSet {
    let set = DegreeSet::at_least(rank_in).intersect(&feasible_degrees(trace0));
    if forces_zero {
        set.intersect(&DegreeSet::exactly(0))
    } else {
        set
    }
}

/// `λ^0` values for which the residual cohomology piece of degree
/// `λ^0 - rank_in` and trace `residual_trace` is cyclotomically feasible.
pub fn lambda0_admissible(rank_in: u64, residual_trace: i64) -> DegreeSet {
    feasible_degrees(residual_trace).shift(rank_in)
}

struct Search<'a> {
    scenario: &'a Scenario,
    traces: TraceVector,
    top_nonzero: bool,
    swing: bool,
    by_degree: HashMap<u64, Vec<CyclotomicMultiset>>,
}

impl Search<'_> {
    fn all_of_degree(&mut self, degree: u64) -> Vec<CyclotomicMultiset> {
        self.by_degree
            .entry(degree)
            .or_insert_with(|| enumerate_by_degree(degree))
            .clone()
    }

    fn visit(
        &mut self,
        level: usize,
        rank_in: u64,
        cp_in: CyclotomicMultiset,
        acc: &mut Vec<LevelDecomposition>,
        out: &mut Vec<Assignment>,
    ) {
        let trace = self.traces.get(level);
        let residual_trace = trace - cp_in.trace();
        // the swing dichotomy: ∂_1 = 0 forces λ^0 = 0
        let forces_zero = self.swing && level == 0 && rank_in == 0;

        match self.scenario.lambda(level) {
            LeNumber::Unknown => {
                debug_assert_eq!(level, 0);
                let mut admissible = lambda0_admissible(rank_in, residual_trace);
                if forces_zero {
                    admissible = admissible.intersect(&DegreeSet::exactly(0));
                }
                if admissible.is_empty() {
                    return;
                }
                acc.push(LevelDecomposition {
                    level,
                    trace,
                    rank_in,
                    rank_h: Rank::Lambda0Minus(rank_in),
                    rank_coim: 0,
                    cp_in,
                    cp_h: None,
                    cp_coim: CyclotomicMultiset::new(),
                });
                out.push(Assignment {
                    levels: acc.clone(),
                    lambda0_constraint: Some(admissible),
                });
                acc.pop();
            }
            LeNumber::Known(lambda) => {
                if rank_in > lambda || (forces_zero && lambda != 0) {
                    return;
                }
                let rest = lambda - rank_in;
                let coim_range = if level == 0 { 0..=0 } else { 0..=rest };
                for rank_coim in coim_range {
                    if level == self.scenario.s && level > 0 && self.top_nonzero && rank_coim == 0 {
                        continue;
                    }
                    let rank_h = rest - rank_coim;
                    for cp_coim in self.all_of_degree(rank_coim) {
                        let h_trace = residual_trace - cp_coim.trace();
                        for cp_h in enumerate_charpolys(rank_h, h_trace) {
                            acc.push(LevelDecomposition {
                                level,
                                trace,
                                rank_in,
                                rank_h: Rank::Exact(rank_h),
                                rank_coim,
                                cp_in: cp_in.clone(),
                                cp_h: Some(cp_h),
                                cp_coim: cp_coim.clone(),
                            });
                            if level == 0 {
                                out.push(Assignment {
                                    levels: acc.clone(),
                                    lambda0_constraint: None,
                                });
                            } else {
                                self.visit(level - 1, rank_coim, cp_coim.clone(), acc, out);
                            }
                            acc.pop();
                        }
                    }
                }
            }
        }
    }
}

/// Every admissible profile of the Lê module complex, sorted by level ranks
/// (top level first) and then by characteristic polynomials. Infeasible
/// scenarios yield an empty list.
pub fn enumerate_cases(scenario: &Scenario) -> Result<Vec<CaseProfile>, CaseError> {
    if let Some(level) = (1..=scenario.s).find(|&j| scenario.lambda(j).is_unknown()) {
        return Err(CaseError::UnsupportedSymbolic { level });
    }
    let mut search = Search {
        scenario,
        traces: lm_traces(scenario),
        top_nonzero: scenario.has_flag(Flag::TopDifferentialNonzero),
        swing: scenario.s == 1 && scenario.has_flag(Flag::Swing),
        by_degree: HashMap::new(),
    };
    let mut assignments = Vec::new();
    search.visit(
        scenario.s,
        0,
        CyclotomicMultiset::new(),
        &mut Vec::new(),
        &mut assignments,
    );

    let swing = search.swing;
    let mut grouped: BTreeMap<Vec<LevelShape>, Vec<Assignment>> = BTreeMap::new();
    for a in assignments {
        let key = a.levels.iter().map(LevelDecomposition::shape).collect();
        grouped.entry(key).or_default().push(a);
    }
    Ok(grouped
        .into_iter()
        .map(|(levels, mut assignments)| {
            assignments.sort();
            let lambda0_constraint = assignments
                .iter()
                .filter_map(|a| a.lambda0_constraint.clone())
                .reduce(|acc, set| acc.union(&set));
            let bottom = levels[levels.len() - 1];
            let lambda0_level_bound = lambda0_constraint.as_ref().map(|_| {
                lambda0_level_bound(
                    bottom.rank_in,
                    assignments[0].level(0).trace,
                    swing && bottom.rank_in == 0,
                )
            });
            CaseProfile {
                levels,
                assignments,
                lambda0_constraint,
                lambda0_level_bound,
            }
        })
        .collect())
}

/// Re-checks every structural invariant of a profile against the scenario,
/// independently of how it was produced.
pub fn audit_profile(scenario: &Scenario, case: &CaseProfile) -> Result<(), String> {
    let traces = lm_traces(scenario);
    let s = scenario.s;
    if case.levels.len() != s + 1 {
        return Err(format!(
            "profile has {} levels, expected {}",
            case.levels.len(),
            s + 1
        ));
    }
    if case.assignments.is_empty() {
        return Err("profile has no assignment".into());
    }
    for a in &case.assignments {
        let shapes: Vec<LevelShape> = a.levels.iter().map(LevelDecomposition::shape).collect();
        if shapes != case.levels {
            return Err("assignment ranks differ from profile ranks".into());
        }
        for j in 0..=s {
            let l = a.level(j);
            if l.level != j || l.trace != traces.get(j) {
                return Err(format!("level {j} out of order or with a wrong trace"));
            }
            if l.cp_in.degree() != l.rank_in || l.cp_coim.degree() != l.rank_coim {
                return Err(format!("level {j}: piece degree differs from rank"));
            }
            let mut trace = l.cp_in.trace() + l.cp_coim.trace();
            match (&l.cp_h, scenario.lambda(j)) {
                (Some(cp_h), LeNumber::Known(lambda)) => {
                    if l.rank_h != Rank::Exact(cp_h.degree()) {
                        return Err(format!("level {j}: cohomology degree differs from rank"));
                    }
                    if l.rank_in + cp_h.degree() + l.rank_coim != lambda {
                        return Err(format!("level {j}: ranks do not sum to λ^{j}"));
                    }
                    trace += cp_h.trace();
                    if trace != traces.get(j) {
                        return Err(format!("level {j}: traces do not sum to trace(α_{j})"));
                    }
                }
                (None, LeNumber::Unknown) if j == 0 => {
                    let residual = traces.get(0) - trace;
                    let set = a
                        .lambda0_constraint
                        .as_ref()
                        .ok_or("symbolic level without λ^0 constraint")?;
                    let least = set.least().ok_or("empty λ^0 constraint")?;
                    if !lambda0_admissible(l.rank_in, residual).contains(least) {
                        return Err("λ^0 constraint admits an infeasible value".into());
                    }
                    let bound = case
                        .lambda0_level_bound
                        .as_ref()
                        .ok_or("symbolic level without λ^0 level bound")?;
                    if !bound.contains(least) {
                        return Err("λ^0 constraint escapes the level bound".into());
                    }
                }
                _ => return Err(format!("level {j}: symbolic data mismatch")),
            }
            if j == 0 && l.rank_coim != 0 {
                return Err("bottom level has a nonzero coimage".into());
            }
            if j == s && l.rank_in != 0 {
                return Err("top level has a nonzero image".into());
            }
            if j < s {
                let above = a.level(j + 1);
                if above.rank_coim != l.rank_in || above.cp_coim != l.cp_in {
                    return Err(format!("linkage between levels {} and {j} broken", j + 1));
                }
            }
        }
    }
    Ok(())
}

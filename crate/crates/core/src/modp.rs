//! Mod-p Lê complexes and Universal Coefficient bookkeeping.
//!
//! Reducing the Lê module complex mod p gives a complex of `F_p`-vector
//! spaces of the same ranks `λ^j` computing `H̃^*(F; Z/p)`, and
//! `dim H̃^k(F; Z/p) = b_k + t_k + t_{k+1}` where `t_k` counts the p-power
//! cyclic summands of `H̃^k(F; Z)`. Both facts bound the torsion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::realization::ComplexRealization;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModpError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u64, ModpError> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(ModpError::NotPrime(p))
    }
}

/// Number of p-power cyclic summands in each `H̃^k(F; Z)`; absent degrees
/// count zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorsionProfile {
    pub p: u64,
    pub counts: BTreeMap<i64, u64>,
}

impl TorsionProfile {
    pub fn zero(p: u64) -> Self {
        TorsionProfile {
            p,
            counts: BTreeMap::new(),
        }
    }

    pub fn get(&self, k: i64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

/// `dim H̃^k(F; Z/p) = b_k + t_k + t_{k+1}`.
pub fn uct_dimension(betti: &BTreeMap<i64, u64>, torsion: &TorsionProfile, k: i64) -> u64 {
    betti.get(&k).copied().unwrap_or(0) + torsion.get(k) + torsion.get(k + 1)
}

/// `Σ_{k ∈ vars} t_k ≤ bound`, coming from level `level` (degree `n - level`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorsionInequality {
    pub level: usize,
    pub degree: i64,
    pub vars: Vec<i64>,
    /// `λ^j - b_{n-j}`; negative means the Betti data alone is inconsistent.
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorsionBounds {
    pub p: u64,
    pub inequalities: Vec<TorsionInequality>,
    /// Tightest upper bound on each `t_k` implied by the inequalities.
    pub max_torsion: BTreeMap<i64, u64>,
    pub consistent: bool,
}

/// For each level `j`: `b_{n-j} + t_{n-j} + t_{n-j+1} ≤ λ^j`, with
/// `t_{n+1} = 0` since the complex ends in degree `n`.
///
/// `le_numbers[j] = λ^j`, `betti` keyed by degree.
pub fn torsion_bounds(
    le_numbers: &[u64],
    betti: &BTreeMap<i64, u64>,
    n: usize,
    p: u64,
) -> TorsionBounds {
    let n = n as i64;
    let inequalities: Vec<TorsionInequality> = le_numbers
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let degree = n - j as i64;
            let vars = if degree < n {
                vec![degree, degree + 1]
            } else {
                vec![degree]
            };
            TorsionInequality {
                level: j,
                degree,
                vars,
                bound: lambda as i64 - betti.get(&degree).copied().unwrap_or(0) as i64,
            }
        })
        .collect();
    let mut max_torsion = BTreeMap::new();
    for ineq in &inequalities {
        for &k in &ineq.vars {
            let cap = ineq.bound.max(0) as u64;
            max_torsion
                .entry(k)
                .and_modify(|m: &mut u64| *m = (*m).min(cap))
                .or_insert(cap);
        }
    }
    TorsionBounds {
        p,
        consistent: inequalities.iter().all(|i| i.bound >= 0),
        inequalities,
        max_torsion,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModpCohomology {
    pub p: u64,
    /// Ranks over `F_p` of `D_1, ..., D_s`.
    pub differential_ranks: Vec<u64>,
    /// `dim H̃^{n-j}(F; Z/p)`, keyed by degree.
    pub dims: BTreeMap<i64, u64>,
    /// Traces of `A_j ⊗ F_p` in `0..p`.
    pub traces: Vec<u64>,
}

/// Reduces a realization mod p and computes the cohomology dimensions of
/// the resulting complex of `F_p`-vector spaces.
pub fn reduce_and_rank(r: &ComplexRealization, p: u64) -> Result<ModpCohomology, ModpError> {
    check_prime(p)?;
    let s = r.s();
    let ranks: Vec<u64> = (0..=s + 1)
        .map(|j| r.differential(j).rank_mod(p) as u64)
        .collect();
    let dims = (0..=s)
        .map(|j| {
            let degree = r.n as i64 - j as i64;
            (degree, r.ranks[j] - ranks[j] - ranks[j + 1])
        })
        .collect();
    let modulus = BigInt::from(p);
    let traces = r
        .monodromy
        .iter()
        .map(|a| a.trace().mod_floor(&modulus).to_u64().unwrap())
        .collect();
    Ok(ModpCohomology {
        p,
        differential_ranks: ranks[1..=s].to_vec(),
        dims,
        traces,
    })
}

/// Integral traces reduced into `0..p`.
pub fn reduce_traces(traces: &[i64], p: u64) -> Vec<u64> {
    traces
        .iter()
        .map(|&t| t.rem_euclid(p as i64) as u64)
        .collect()
}

//! Traces of the Lê-Milnor monodromies computed from link Euler
//! characteristics, and the global consistency facts they satisfy.

use serde::{Deserialize, Serialize};

use crate::jsonint;
use crate::model::{LeNumber, Scenario};

fn sign(exponent: i64) -> i64 {
    if exponent.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `trace(α_0), ..., trace(α_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraceVector(
    #[serde(
        serialize_with = "jsonint::serialize_i64_vec",
        deserialize_with = "jsonint::deserialize_i64_vec"
    )]
    pub Vec<i64>,
);

impl TraceVector {
    pub fn get(&self, level: usize) -> i64 {
        self.0[level]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }
}

/// `trace(α_j) = (-1)^{n-j} (χ(L^{s-j-1}) - χ(L^{s-j}))` for `0 ≤ j ≤ s`.
pub fn lm_traces(scenario: &Scenario) -> TraceVector {
    let n = scenario.n as i64;
    let s = scenario.s as isize;
    let traces = (0..=s)
        .map(|j| {
            let below = scenario.link_chi(s - j - 1);
            let here = scenario.link_chi(s - j);
            sign(n - j as i64) * (below - here)
        })
        .collect();
    TraceVector(traces)
}

/// Alternating sum `Σ_j (-1)^{n-j} trace(α_j)`.
pub fn alternating_trace_sum(traces: &TraceVector, n: usize) -> i128 {
    traces
        .iter()
        .enumerate()
        .map(|(j, t)| sign(n as i64 - j as i64) as i128 * t as i128)
        .sum()
}

/// True iff the alternating sum telescopes to `-1`, i.e. the Lefschetz
/// number `(-1)^n Σ_j (-1)^{n-j} t_j` of the shifted vanishing cycles equals
/// `(-1)^{n+1}`.
pub fn check_telescoping(traces: &TraceVector, n: usize) -> bool {
    alternating_trace_sum(traces, n) == -1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBound {
    pub level: usize,
    pub trace: i64,
    /// `|trace(α_j)| ≤ λ^j`.
    pub lower_bound: u64,
    /// A zero trace also rules out `λ^j = 1`.
    pub excludes_one: bool,
    pub lambda: Option<u64>,
    /// `λ^j` is known and equals the bound, forcing `(t - 1)^λ` or `(t + 1)^λ`.
    pub extremal: bool,
    /// `None` while `λ^j` is unknown.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundsReport {
    pub levels: Vec<LevelBound>,
}

impl BoundsReport {
    pub fn lower_bounds(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.lower_bound).collect()
    }
}

/// Lower bounds on the Lê numbers from the traces alone.
pub fn lambda_lower_bounds(traces: &TraceVector) -> BoundsReport {
    lambda_lower_bounds_with(traces, &[])
}

/// Same as [`lambda_lower_bounds`], also checking any known Lê numbers.
pub fn lambda_lower_bounds_with(traces: &TraceVector, lambdas: &[LeNumber]) -> BoundsReport {
    let levels = traces
        .iter()
        .enumerate()
        .map(|(level, trace)| {
            let lower_bound = trace.unsigned_abs();
            let lambda = lambdas.get(level).and_then(|l| l.known());
            let excludes_one = trace == 0;
            LevelBound {
                level,
                trace,
                lower_bound,
                excludes_one,
                lambda,
                extremal: lambda == Some(lower_bound),
                satisfied: lambda.map(|l| l >= lower_bound && !(excludes_one && l == 1)),
            }
        })
        .collect();
    BoundsReport { levels }
}

/// Every trace is zero or has the sign of `(-1)^{n-s-1}`.
pub fn check_lci_signs(traces: &TraceVector, n: usize, s: usize) -> bool {
    let expected = sign(n as i64 - s as i64 - 1);
    traces.iter().all(|t| expected * t >= 0)
}

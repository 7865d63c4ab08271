//! Explicit integer witnesses for case profiles, and a verifier that checks
//! any candidate complex with monodromy from scratch.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cases::{Assignment, CaseProfile};
use crate::cyclotomic::{
    candidate_indices, cyclotomic_poly, enumerate_charpolys, expand, CyclotomicMultiset,
    IntPolynomial,
};
use crate::matrix::IntMatrix;
use crate::model::{LeNumber, Scenario};
use crate::traces::lm_traces;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("λ^0 is symbolic for this case; a concrete value is required")]
    MissingLambda0,
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("assignment {index} does not exist (case has {count})")]
    NoSuchAssignment { index: usize, count: usize },
}

/// Companion matrix with ones on the subdiagonal and last column
/// `-c_0, ..., -c_{d-1}`; its characteristic polynomial is `p`.
pub fn companion_matrix(p: &IntPolynomial) -> IntMatrix {
    assert!(p.is_monic(), "companion matrix needs a monic polynomial");
    let d = p.degree().unwrap_or(0);
    let mut m = IntMatrix::zeros(d, d);
    for i in 0..d {
        if i + 1 < d {
            m.set(i + 1, i, BigInt::one());
        }
        m.set(i, d - 1, -p.coeff(i));
    }
    m
}

/// A complex `0 → Z^{λ^s} → ... → Z^{λ^0} → 0` with a monodromy
/// automorphism on every term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexRealization {
    pub n: usize,
    /// `λ^0, ..., λ^s`.
    pub ranks: Vec<u64>,
    /// `A_0, ..., A_s`.
    pub monodromy: Vec<IntMatrix>,
    /// `D_1, ..., D_s` with `D_j : Z^{λ^j} → Z^{λ^{j-1}}`.
    pub differentials: Vec<IntMatrix>,
    /// Rational Betti numbers the witness claims, keyed by degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_betti: Option<BTreeMap<i64, u64>>,
}

impl ComplexRealization {
    pub fn s(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    /// `D_j`, with `D_0 = 0` and `D_{s+1} = 0` of the right shapes.
    pub fn differential(&self, j: usize) -> IntMatrix {
        if j == 0 {
            return IntMatrix::zeros(0, self.ranks.first().copied().unwrap_or(0) as usize);
        }
        match self.differentials.get(j - 1) {
            Some(d) => d.clone(),
            None => IntMatrix::zeros(self.ranks.get(j - 1).copied().unwrap_or(0) as usize, 0),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("realization serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn piece_block(ms: &CyclotomicMultiset) -> IntMatrix {
    companion_matrix(&expand(ms))
}

fn choose_assignment(
    case: &CaseProfile,
    index: Option<usize>,
    lambda0: Option<u64>,
) -> Result<&Assignment, RealizeError> {
    if let Some(index) = index {
        return case
            .assignments
            .get(index)
            .ok_or(RealizeError::NoSuchAssignment {
                index,
                count: case.assignments.len(),
            });
    }
    match (&case.lambda0_constraint, lambda0) {
        (None, _) => case
            .assignments
            .first()
            .ok_or_else(|| RealizeError::ConstraintViolation("case has no assignment".into())),
        (Some(_), None) => Err(RealizeError::MissingLambda0),
        (Some(union), Some(v)) => case
            .assignments
            .iter()
            .find(|a| a.lambda0_constraint.as_ref().is_some_and(|c| c.contains(v)))
            .ok_or_else(|| {
                RealizeError::ConstraintViolation(format!(
                    "λ0 = {v} is not admissible ({})",
                    union.describe("λ0")
                ))
            }),
    }
}

/// Builds a block witness for one assignment of `case`: every `M^j` is
/// `in ⊕ h ⊕ coim` with companion blocks, and `D_j` maps the coimage block
/// of `M^j` identically onto the image block of `M^{j-1}`.
pub fn realize(
    case: &CaseProfile,
    n: usize,
    assignment: Option<usize>,
    lambda0: Option<u64>,
) -> Result<ComplexRealization, RealizeError> {
    let chosen = choose_assignment(case, assignment, lambda0)?;
    let s = case.s();

    let mut pieces: Vec<[CyclotomicMultiset; 3]> = Vec::with_capacity(s + 1);
    for j in 0..=s {
        let l = chosen.level(j);
        let cp_h = match &l.cp_h {
            Some(cp) => cp.clone(),
            None => {
                let lambda0 = lambda0.ok_or(RealizeError::MissingLambda0)?;
                let set = chosen
                    .lambda0_constraint
                    .as_ref()
                    .expect("symbolic level carries a constraint");
                if !set.contains(lambda0) {
                    return Err(RealizeError::ConstraintViolation(format!(
                        "λ0 = {lambda0} is not admissible for this assignment ({})",
                        set.describe("λ0")
                    )));
                }
                let degree = lambda0 - l.rank_in;
                let residual = l.trace - l.cp_in.trace();
                enumerate_charpolys(degree, residual)
                    .into_iter()
                    .next()
                    .ok_or_else(|| {
                        RealizeError::ConstraintViolation(format!(
                            "no cyclotomic polynomial of degree {degree} and trace {residual}"
                        ))
                    })?
            }
        };
        pieces.push([l.cp_in.clone(), cp_h, l.cp_coim.clone()]);
    }

    let ranks: Vec<u64> = pieces
        .iter()
        .map(|p| p.iter().map(CyclotomicMultiset::degree).sum())
        .collect();
    let monodromy: Vec<IntMatrix> = pieces
        .iter()
        .map(|p| {
            IntMatrix::block_diagonal(&[piece_block(&p[0]), piece_block(&p[1]), piece_block(&p[2])])
        })
        .collect();
    let differentials = (1..=s)
        .map(|j| {
            let rows = ranks[j - 1] as usize;
            let cols = ranks[j] as usize;
            let coim = pieces[j][2].degree() as usize;
            let mut d = IntMatrix::zeros(rows, cols);
            d.put_block(0, cols - coim, &IntMatrix::identity(coim));
            d
        })
        .collect();
    let expected_betti = Some(
        pieces
            .iter()
            .enumerate()
            .map(|(j, p)| (n as i64 - j as i64, p[1].degree()))
            .collect(),
    );
    Ok(ComplexRealization {
        n,
        ranks,
        monodromy,
        differentials,
        expected_betti,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCohomology {
    pub level: usize,
    pub degree: i64,
    pub betti: u64,
    /// Invariant factors greater than one of the torsion subgroup.
    pub torsion: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub cohomology: Vec<LevelCohomology>,
    /// Characteristic polynomial of each `A_j` as a cyclotomic multiset,
    /// when it factors.
    pub charpolys: Vec<Option<CyclotomicMultiset>>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn betti(&self) -> BTreeMap<i64, u64> {
        self.cohomology
            .iter()
            .map(|c| (c.degree, c.betti))
            .collect()
    }

    /// Number of invariant factors divisible by `p`, per degree.
    pub fn torsion_counts(&self, p: u64) -> BTreeMap<i64, u64> {
        let p = BigInt::from(p);
        self.cohomology
            .iter()
            .map(|c| {
                let count = c
                    .torsion
                    .iter()
                    .filter(|t| t.parse::<BigInt>().is_ok_and(|v| (v % &p).is_zero()))
                    .count() as u64;
                (c.degree, count)
            })
            .collect()
    }
}

/// Factors a monic polynomial into cyclotomics by trial division with every
/// `Φ_d` of degree at most `deg p`.
pub fn cyclotomic_factorization(p: &IntPolynomial) -> Option<CyclotomicMultiset> {
    if !p.is_monic() {
        return None;
    }
    let degree = p.degree()? as u64;
    let mut rest = p.clone();
    let mut out = CyclotomicMultiset::new();
    for d in candidate_indices(degree) {
        let phi = cyclotomic_poly(d);
        while let Some(q) = rest.div_exact(&phi) {
            rest = q;
            out.add(d, 1);
        }
    }
    (rest == IntPolynomial::one()).then_some(out)
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn record(&mut self, name: &str, failures: Vec<String>) {
        let passed = failures.is_empty();
        self.0.push(CheckResult {
            name: name.to_string(),
            passed,
            detail: if passed {
                "ok".into()
            } else {
                failures.join("; ")
            },
        });
    }
}

/// Integral cohomology of the complex level by level. The module at level
/// `j` sits in degree `n - j`; `H = ker D_j / im D_{j+1}` and its torsion is
/// that of `coker D_{j+1}`. Shapes must already be consistent.
pub fn integral_cohomology(r: &ComplexRealization) -> Vec<LevelCohomology> {
    let s = r.s();
    let smith: Vec<_> = (0..=s + 1)
        .map(|j| r.differential(j).smith_normal_form())
        .collect();
    (0..=s)
        .map(|j| {
            let rank_out = smith[j].rank() as u64;
            let rank_in = smith[j + 1].rank() as u64;
            LevelCohomology {
                level: j,
                degree: r.n as i64 - j as i64,
                betti: r.ranks[j].saturating_sub(rank_out + rank_in),
                torsion: smith[j + 1]
                    .torsion()
                    .iter()
                    .map(|t| t.to_string())
                    .collect(),
            }
        })
        .collect()
}

/// Checks a realization against a scenario without assuming anything about
/// how it was built. Malformed input yields failed checks, never a panic.
pub fn verify(r: &ComplexRealization, scenario: &Scenario) -> VerificationReport {
    let mut checks = Checks(Vec::new());
    let s = scenario.s;

    let mut shape = Vec::new();
    if r.n != scenario.n {
        shape.push(format!("n = {} but scenario has n = {}", r.n, scenario.n));
    }
    if r.ranks.len() != s + 1 {
        shape.push(format!("{} ranks, expected {}", r.ranks.len(), s + 1));
    }
    if r.monodromy.len() != r.ranks.len() {
        shape.push(format!(
            "{} monodromy matrices for {} levels",
            r.monodromy.len(),
            r.ranks.len()
        ));
    }
    if r.differentials.len() != r.ranks.len().saturating_sub(1) {
        shape.push(format!(
            "{} differentials for {} levels",
            r.differentials.len(),
            r.ranks.len()
        ));
    }
    for (j, (a, &rank)) in r.monodromy.iter().zip(&r.ranks).enumerate() {
        if a.rows() as u64 != rank || a.cols() as u64 != rank {
            shape.push(format!(
                "A_{j} is {}x{}, expected {rank}x{rank}",
                a.rows(),
                a.cols()
            ));
        }
    }
    for (i, d) in r.differentials.iter().enumerate() {
        let j = i + 1;
        if let (Some(&target), Some(&source)) = (r.ranks.get(j - 1), r.ranks.get(j)) {
            if d.rows() as u64 != target || d.cols() as u64 != source {
                shape.push(format!(
                    "D_{j} is {}x{}, expected {target}x{source}",
                    d.rows(),
                    d.cols()
                ));
            }
        }
    }
    for (j, &rank) in r.ranks.iter().enumerate() {
        if let Some(LeNumber::Known(lambda)) = scenario.le_numbers.get(j) {
            if *lambda != rank {
                shape.push(format!("rank of M^{j} is {rank} but λ^{j} = {lambda}"));
            }
        }
    }
    let well_formed = shape.is_empty();
    checks.record("shape", shape);
    if !well_formed {
        return VerificationReport {
            checks: checks.0,
            cohomology: Vec::new(),
            charpolys: Vec::new(),
        };
    }

    let complex = (1..s)
        .filter_map(|j| {
            let product = r.differential(j).mul(&r.differential(j + 1));
            (!product.is_zero()).then(|| format!("D_{j}·D_{} ≠ 0", j + 1))
        })
        .collect();
    checks.record("complex", complex);

    let equivariance = (1..=s)
        .filter_map(|j| {
            let d = r.differential(j);
            let lhs = r.monodromy[j - 1].mul(&d);
            let rhs = d.mul(&r.monodromy[j]);
            (lhs != rhs).then(|| format!("A_{}·D_{j} ≠ D_{j}·A_{j}", j - 1))
        })
        .collect();
    checks.record("equivariance", equivariance);

    let determinant = r
        .monodromy
        .iter()
        .enumerate()
        .filter_map(|(j, a)| {
            let det = a.determinant().expect("square");
            (!det.abs().is_one()).then(|| format!("det A_{j} = {det}"))
        })
        .collect();
    checks.record("unit_determinant", determinant);

    let traces = lm_traces(scenario);
    let trace_failures = r
        .monodromy
        .iter()
        .enumerate()
        .filter_map(|(j, a)| {
            let t = a.trace();
            (t != BigInt::from(traces.get(j)))
                .then(|| format!("trace A_{j} = {t}, expected {}", traces.get(j)))
        })
        .collect();
    checks.record("trace", trace_failures);

    let charpolys: Vec<Option<CyclotomicMultiset>> = r
        .monodromy
        .iter()
        .map(|a| cyclotomic_factorization(&a.charpoly().expect("square")))
        .collect();
    let cyclotomic = charpolys
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(j, _)| format!("char poly of A_{j} is not a product of cyclotomics"))
        .collect();
    checks.record("cyclotomic", cyclotomic);

    let cohomology = integral_cohomology(r);
    if let Some(expected) = &r.expected_betti {
        let computed: BTreeMap<i64, u64> = cohomology.iter().map(|c| (c.degree, c.betti)).collect();
        let betti = if &computed == expected {
            Vec::new()
        } else {
            vec![format!("computed Betti {computed:?}, claimed {expected:?}")]
        };
        checks.record("betti", betti);
    }

    VerificationReport {
        checks: checks.0,
        cohomology,
        charpolys,
    }
}

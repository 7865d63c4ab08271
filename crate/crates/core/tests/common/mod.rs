#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use le_monodromy::matrix::IntMatrix;
use le_monodromy::model::{validate_scenario, Flag, RawScenario, Scenario};
use le_monodromy::realization::ComplexRealization;
use num_bigint::BigInt;
use rand::Rng;

pub fn scenario(n: i64, chis: &[i64], lambdas: &[Option<i64>], flags: &[Flag]) -> Scenario {
    validate_scenario(RawScenario {
        n,
        s: chis.len() as i64 - 1,
        link_chis: chis.to_vec(),
        le_numbers: lambdas.to_vec(),
        flags: flags.iter().copied().collect::<BTreeSet<_>>(),
    })
    .unwrap()
}

/// The smooth line singularity: s = 1, every link contractible.
pub fn line(n: i64, lambda1: i64, flags: &[Flag]) -> Scenario {
    scenario(n, &[1, 1], &[None, Some(lambda1)], flags)
}

/// The cone over a smooth conic with `λ^2 = 2` and `∂_2 ≠ 0`.
pub fn cone(n: i64, lambda1: i64) -> Scenario {
    scenario(
        n,
        &[2, 0, 1],
        &[None, Some(lambda1), Some(2)],
        &[Flag::TopDifferentialNonzero],
    )
}

/// Textbook trace formula, written out independently of the library.
pub fn traces_by_hand(n: i64, chis: &[i64]) -> Vec<i64> {
    let s = chis.len() as i64 - 1;
    let chi = |k: i64| if k < 0 { 0 } else { chis[k as usize] };
    (0..=s)
        .map(|j| {
            let sign = if (n - j).rem_euclid(2) == 0 { 1 } else { -1 };
            sign * (chi(s - j - 1) - chi(s - j))
        })
        .collect()
}

/// A random integral complex with entries in `[-max_entry, max_entry]`
/// and ranks at most `max_rank`, together with the differences it was
/// built from: the diagonal entries of each `D_j` before a random change
/// of basis.
pub struct RandomComplex {
    pub realization: ComplexRealization,
    /// `diagonals[j - 1]` for `D_j`.
    pub diagonals: Vec<Vec<i64>>,
}

impl RandomComplex {
    /// `H` at level `j` has torsion `coker D_{j+1}`; a diagonal entry `d`
    /// contributes a p-power summand exactly when `p | d`.
    pub fn torsion_count(&self, level: usize, p: u64) -> u64 {
        self.diagonals
            .get(level)
            .map(|d| d.iter().filter(|v| v.unsigned_abs() % p == 0).count() as u64)
            .unwrap_or(0)
    }

    pub fn betti(&self, level: usize) -> u64 {
        let r = &self.realization;
        let out = if level == 0 {
            0
        } else {
            self.diagonals[level - 1].len()
        };
        let inc = self.diagonals.get(level).map_or(0, |d| d.len());
        r.ranks[level] - (out + inc) as u64
    }
}

pub fn random_complex<R: Rng>(rng: &mut R, max_rank: u64, max_entry: i64) -> RandomComplex {
    let s = rng.gen_range(0..=3usize);
    let n = s + rng.gen_range(0..=2usize);
    let mut ranks: Vec<u64> = (0..=s).map(|_| rng.gen_range(0..=max_rank)).collect();
    // coim[j] = rank of D_j, chosen from the top down
    let mut coim = vec![0u64; s + 2];
    for j in (0..=s).rev() {
        let incoming = coim[j + 1];
        ranks[j] = ranks[j].max(incoming);
        if j > 0 {
            coim[j] = rng.gen_range(0..=ranks[j] - incoming);
        }
    }
    let choices = [1i64, 1, 1, 2, 3, 4, 5];
    let mut diagonals = Vec::new();
    let mut differentials = Vec::new();
    for j in 1..=s {
        let rows = ranks[j - 1] as usize;
        let cols = ranks[j] as usize;
        let k = coim[j] as usize;
        let mut d = IntMatrix::zeros(rows, cols);
        let mut diag = Vec::new();
        for i in 0..k {
            let mut v = choices[rng.gen_range(0..choices.len())].min(max_entry);
            if rng.gen_bool(0.5) {
                v = -v;
            }
            d.set(i, cols - k + i, BigInt::from(v));
            diag.push(v);
        }
        diagonals.push(diag);
        differentials.push(d);
    }
    let mut realization = ComplexRealization {
        n,
        monodromy: ranks
            .iter()
            .map(|&r| IntMatrix::identity(r as usize))
            .collect(),
        ranks,
        differentials,
        expected_betti: None,
    };
    scramble(rng, &mut realization, 40, max_entry);
    let mut out = RandomComplex {
        realization,
        diagonals,
    };
    let betti: BTreeMap<i64, u64> = (0..=s)
        .map(|j| (n as i64 - j as i64, out.betti(j)))
        .collect();
    out.realization.expected_betti = Some(betti);
    out
}

fn within(m: &IntMatrix, bound: i64) -> bool {
    let bound = BigInt::from(bound);
    m.max_abs_entry() <= bound
}

/// Random unimodular changes of basis `e_b ↦ e_b + c e_a` on single
/// modules, kept only when all entries stay within `bound`.
fn scramble<R: Rng>(rng: &mut R, r: &mut ComplexRealization, steps: usize, bound: i64) {
    let s = r.ranks.len() - 1;
    for _ in 0..steps {
        let j = rng.gen_range(0..=s);
        let rank = r.ranks[j] as usize;
        if rank < 2 {
            continue;
        }
        let a = rng.gen_range(0..rank);
        let b = (a + rng.gen_range(1..rank)) % rank;
        let c: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        // D_j gains c·(column a) in column b; D_{j+1} loses c·(row b) from row a.
        let mut below = (j > 0).then(|| r.differentials[j - 1].clone());
        let mut above = (j < s).then(|| r.differentials[j].clone());
        if let Some(d) = below.as_mut() {
            for i in 0..d.rows() {
                let v = d.get(i, b) + BigInt::from(c) * d.get(i, a);
                d.set(i, b, v);
            }
        }
        if let Some(d) = above.as_mut() {
            for k in 0..d.cols() {
                let v = d.get(a, k) - BigInt::from(c) * d.get(b, k);
                d.set(a, k, v);
            }
        }
        let ok = below.as_ref().is_none_or(|d| within(d, bound))
            && above.as_ref().is_none_or(|d| within(d, bound));
        if ok {
            if let Some(d) = below {
                r.differentials[j - 1] = d;
            }
            if let Some(d) = above {
                r.differentials[j] = d;
            }
        }
    }
}

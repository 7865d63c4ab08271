//! Dense integer matrices with exact arithmetic: products, determinants,
//! characteristic polynomials, Smith normal form and ranks mod p.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::IntPolynomial;
use crate::jsonint;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Vec<BigInt>>) -> Self {
        assert_eq!(entries.len(), rows, "row count");
        let mut data = Vec::with_capacity(rows * cols);
        for row in entries {
            assert_eq!(row.len(), cols, "ragged row");
            data.extend(row);
        }
        IntMatrix { rows, cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::from_rows(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data.iter().map(|v| v.abs()).max().unwrap_or_default()
    }

    /// `None` on a dimension mismatch.
    pub fn checked_mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] += a * rhs.get(k, j);
                }
            }
        }
        Some(out)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).expect("matrix dimension mismatch")
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    /// Places `block` with its top-left corner at `(row, col)`.
    pub fn put_block(&mut self, row: usize, col: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(row + i, col + j, block.get(i, j).clone());
            }
        }
    }

    pub fn block_diagonal(blocks: &[IntMatrix]) -> IntMatrix {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = IntMatrix::zeros(n, m);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.put_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Option<BigInt> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return Some(BigInt::zero());
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        Some(sign * a.get(n - 1, n - 1))
    }

    /// Characteristic polynomial `det(tI - A)` by Faddeev-LeVerrier; every
    /// division is exact over the integers.
    pub fn charpoly(&self) -> Option<IntPolynomial> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = IntMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                let idx = i * n + i;
                next.data[idx] += &coeffs[n - k + 1];
            }
            m = next;
            let am = self.mul(&m);
            let (q, r) = am.trace().div_rem(&BigInt::from(k));
            debug_assert!(r.is_zero());
            coeffs[n - k] = -q;
        }
        Some(IntPolynomial::new(coeffs))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[target] += factor * row[source]`
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(source, j) * factor;
            self.data[target * self.cols + j] += v;
        }
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, source) * factor;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }

    pub fn smith_normal_form(&self) -> SmithForm {
        smith(self)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        self.smith_normal_form().rank()
    }

    /// Rank over the field with `p` elements.
    pub fn rank_mod(&self, p: u64) -> usize {
        let modulus = BigInt::from(p);
        let mut a: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| v.mod_floor(&modulus).to_u64().unwrap())
                    .collect()
            })
            .collect();
        let p128 = p as u128;
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&i| a[i][col] != 0) else {
                continue;
            };
            a.swap(rank, pivot);
            let inv = mod_inverse(a[rank][col], p);
            for i in 0..self.rows {
                if i == rank || a[i][col] == 0 {
                    continue;
                }
                let f = (a[i][col] as u128 * inv as u128) % p128;
                let pivot_row = a[rank].clone();
                for (x, &y) in a[i].iter_mut().zip(&pivot_row).skip(col) {
                    let sub = (f * y as u128) % p128;
                    *x = ((*x as u128 + p128 - sub) % p128) as u64;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn reduce_mod(&self, p: u64) -> IntMatrix {
        let modulus = BigInt::from(p);
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.mod_floor(&modulus)).collect(),
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let e = num_integer::Integer::extended_gcd(&(a as i128), &(p as i128));
    e.x.rem_euclid(p as i128) as u64
}

/// `left · A · right = diag(invariants, 0, ...)` with unimodular `left`,
/// `right` and positive invariant factors each dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub invariants: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    /// Invariant factors greater than one: the torsion of the cokernel.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariants
            .iter()
            .filter(|v| !v.is_one())
            .cloned()
            .collect()
    }
}

fn smith(input: &IntMatrix) -> SmithForm {
    let mut a = input.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let v = a.get(i, j);
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        left.swap_rows(t, pi);
        a.swap_cols(t, pj);
        right.swap_cols(t, pj);

        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -a.get(i, t).div_floor(a.get(t, t));
                a.add_row_multiple(i, t, &q);
                left.add_row_multiple(i, t, &q);
                if !a.get(i, t).is_zero() {
                    a.swap_rows(t, i);
                    left.swap_rows(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -a.get(t, j).div_floor(a.get(t, t));
                a.add_col_multiple(j, t, &q);
                right.add_col_multiple(j, t, &q);
                if !a.get(t, j).is_zero() {
                    a.swap_cols(t, j);
                    right.swap_cols(t, j);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // pivot must divide the whole trailing block
            let pivot = a.get(t, t).clone();
            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    left.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
        t += 1;
    }
    let invariants = (0..t).map(|i| a.get(i, i).clone()).collect();
    SmithForm {
        invariants,
        left,
        right,
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows == 0 || self.cols == 0 {
            return write!(f, "({}x{} empty)", self.rows, self.cols);
        }
        let cells: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{:>width$}", cells[i * self.cols + j])?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<serde_json::Value>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|i| self.row(i).iter().map(jsonint::to_value).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.entries.len() != repr.rows || repr.entries.iter().any(|r| r.len() != repr.cols) {
            return Err(D::Error::custom(format!(
                "matrix entries do not match declared shape {}x{}",
                repr.rows, repr.cols
            )));
        }
        let entries = repr
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(jsonint::from_value)
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Ok(IntMatrix::from_rows(repr.rows, repr.cols, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn diag_of(s: &SmithForm, shape: (usize, usize)) -> IntMatrix {
        let mut d = IntMatrix::zeros(shape.0, shape.1);
        for (i, v) in s.invariants.iter().enumerate() {
            d.set(i, i, v.clone());
        }
        d
    }

    #[test]
    fn determinant_and_charpoly() {
        let c = m(&[&[0, -1], &[1, 1]]);
        assert_eq!(c.determinant(), Some(BigInt::from(1)));
        assert_eq!(c.charpoly().unwrap(), IntPolynomial::from_i64(&[1, -1, 1]));
        // reference values from a computer algebra system
        let a = m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]);
        assert_eq!(a.determinant(), Some(BigInt::from(6)));
        assert_eq!(
            a.charpoly().unwrap(),
            IntPolynomial::from_i64(&[-6, 13, -7, 1])
        );
        let singular = m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]);
        assert_eq!(singular.determinant(), Some(BigInt::zero()));
        assert_eq!(
            singular.charpoly().unwrap(),
            IntPolynomial::from_i64(&[0, 8, -6, 1])
        );
        assert_eq!(IntMatrix::zeros(0, 0).determinant(), Some(BigInt::one()));
        assert_eq!(
            IntMatrix::zeros(0, 0).charpoly().unwrap(),
            IntPolynomial::one()
        );
        assert_eq!(m(&[&[0, 1], &[0, 0]]).determinant(), Some(BigInt::zero()));
    }

    #[test]
    fn smith_examples() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = a.smith_normal_form();
        assert_eq!(
            s.invariants,
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
        assert_eq!(
            m(&[&[2]]).smith_normal_form().torsion(),
            vec![BigInt::from(2)]
        );
        assert_eq!(IntMatrix::zeros(2, 3).rank(), 0);
        assert_eq!(m(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn rank_mod_p() {
        let a = m(&[&[2]]);
        assert_eq!(a.rank_mod(2), 0);
        assert_eq!(a.rank_mod(3), 1);
        let b = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(b.rank_mod(2), 1);
        assert_eq!(b.rank_mod(5), 2);
    }

    #[test]
    fn serde_shape_survives_empty_rows() {
        let z = IntMatrix::zeros(0, 3);
        let text = serde_json::to_string(&z).unwrap();
        assert_eq!(serde_json::from_str::<IntMatrix>(&text).unwrap(), z);
        let big = IntMatrix::from_rows(1, 1, vec![vec![BigInt::from(1u64 << 60)]]);
        let text = serde_json::to_string(&big).unwrap();
        assert!(text.contains("\"1152921504606846976\""));
        assert_eq!(serde_json::from_str::<IntMatrix>(&text).unwrap(), big);
        assert!(
            serde_json::from_str::<IntMatrix>(r#"{"rows":1,"cols":2,"entries":[[1]]}"#).is_err()
        );
    }

    fn matrix_strategy() -> impl Strategy<Value = IntMatrix> {
        (0usize..5, 0usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-6i64..=6, r * c).prop_map(move |v| {
                let rows = v
                    .chunks(c.max(1))
                    .take(r)
                    .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
                    .collect::<Vec<Vec<BigInt>>>();
                if c == 0 {
                    IntMatrix::zeros(r, 0)
                } else {
                    IntMatrix::from_rows(r, c, rows)
                }
            })
        })
    }

    proptest! {
        #[test]
        fn smith_decomposition_is_valid(a in matrix_strategy()) {
            let s = a.smith_normal_form();
            let d = s.left.mul(&a).mul(&s.right);
            prop_assert_eq!(d, diag_of(&s, (a.rows(), a.cols())));
            prop_assert!(s.left.determinant().unwrap().abs().is_one());
            prop_assert!(s.right.determinant().unwrap().abs().is_one());
            for w in s.invariants.windows(2) {
                prop_assert!(w[1].is_multiple_of(&w[0]));
            }
            prop_assert!(s.invariants.iter().all(|v| v.is_positive()));
            for p in [2u64, 3, 5, 7] {
                let expected = s.invariants.iter().filter(|v| !v.is_multiple_of(&BigInt::from(p))).count();
                prop_assert_eq!(a.rank_mod(p), expected);
            }
        }

        #[test]
        fn charpoly_constant_term_is_signed_determinant(v in proptest::collection::vec(-4i64..=4, 9)) {
            let rows: Vec<&[i64]> = v.chunks(3).collect();
            let a = IntMatrix::from_i64(&rows);
            let p = a.charpoly().unwrap();
            prop_assert_eq!(-p.coeff(0), a.determinant().unwrap());
            prop_assert_eq!(p.root_sum(), a.trace());
        }
    }
}

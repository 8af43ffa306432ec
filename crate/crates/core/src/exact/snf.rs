//! Smith normal form with both transforms and their inverses.
//!
//! The elimination runs on machine integers with overflow checks first and
//! restarts on arbitrary-precision integers only if an intermediate overflows.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntegerMatrix;

/// `U · A · V = D` with `D` diagonal, `d₀ | d₁ | …`, all `dᵢ > 0` for `i < rank`.
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub u: IntegerMatrix,
    pub u_inv: IntegerMatrix,
    pub v: IntegerMatrix,
    pub v_inv: IntegerMatrix,
    /// Nonzero invariant factors, in divisibility order.
    pub diag: Vec<BigInt>,
    pub rank: usize,
}

trait Ring: Clone + PartialEq + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    fn neg(&self) -> Option<Self>;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// Truncated quotient.
    fn quot(&self, o: &Self) -> Option<Self>;
    fn divides(&self, o: &Self) -> bool;
    fn to_big(&self) -> BigInt;
}

impl Ring for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.unsigned_abs() < o.unsigned_abs()
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn quot(&self, o: &Self) -> Option<Self> {
        self.checked_div(*o)
    }
    fn divides(&self, o: &Self) -> bool {
        o.checked_rem(*self) == Some(0)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.magnitude() < o.magnitude()
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn quot(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn divides(&self, o: &Self) -> bool {
        Zero::is_zero(&o.mod_floor(self))
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

struct Dense<R> {
    rows: usize,
    cols: usize,
    d: Vec<R>,
}

impl<R: Ring> Dense<R> {
    fn identity(n: usize) -> Self {
        let mut d = vec![R::zero(); n * n];
        for i in 0..n {
            d[i * n + i] = R::one();
        }
        Self { rows: n, cols: n, d }
    }
    #[inline]
    fn at(&self, r: usize, c: usize) -> &R {
        &self.d[r * self.cols + c]
    }
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.d.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.d.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }
    /// `row[dst] += q · row[src]`.
    fn add_row(&mut self, dst: usize, src: usize, q: &R) -> Option<()> {
        for c in 0..self.cols {
            let s = &self.d[src * self.cols + c];
            if !s.is_zero() {
                let v = self.d[dst * self.cols + c].add(&s.mul(q)?)?;
                self.d[dst * self.cols + c] = v;
            }
        }
        Some(())
    }
    /// `col[dst] += q · col[src]`.
    fn add_col(&mut self, dst: usize, src: usize, q: &R) -> Option<()> {
        for r in 0..self.rows {
            let s = &self.d[r * self.cols + src];
            if !s.is_zero() {
                let v = self.d[r * self.cols + dst].add(&s.mul(q)?)?;
                self.d[r * self.cols + dst] = v;
            }
        }
        Some(())
    }
    fn negate_row(&mut self, r: usize) -> Option<()> {
        for c in 0..self.cols {
            let v = self.d[r * self.cols + c].neg()?;
            self.d[r * self.cols + c] = v;
        }
        Some(())
    }
    fn negate_col(&mut self, c: usize) -> Option<()> {
        for r in 0..self.rows {
            let v = self.d[r * self.cols + c].neg()?;
            self.d[r * self.cols + c] = v;
        }
        Some(())
    }
    fn to_integer(&self) -> IntegerMatrix {
        IntegerMatrix::from_data(self.rows, self.cols, self.d.iter().map(Ring::to_big).collect())
    }
}

/// Working state: `u · a₀ · v = a`, `u · u_inv = I`, `v · v_inv = I`.
struct State<R> {
    a: Dense<R>,
    u: Dense<R>,
    u_inv: Dense<R>,
    v: Dense<R>,
    v_inv: Dense<R>,
}

impl<R: Ring> State<R> {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }
    /// `row[dst] += q · row[src]`.
    fn row_op(&mut self, dst: usize, src: usize, q: &R) -> Option<()> {
        self.a.add_row(dst, src, q)?;
        self.u.add_row(dst, src, q)?;
        self.u_inv.add_col(src, dst, &q.neg()?)
    }
    /// `col[dst] += q · col[src]`.
    fn col_op(&mut self, dst: usize, src: usize, q: &R) -> Option<()> {
        self.a.add_col(dst, src, q)?;
        self.v.add_col(dst, src, q)?;
        self.v_inv.add_row(src, dst, &q.neg()?)
    }
    fn negate_row(&mut self, r: usize) -> Option<()> {
        self.a.negate_row(r)?;
        self.u.negate_row(r)?;
        self.u_inv.negate_col(r)
    }

    /// Position of a smallest nonzero entry in the trailing block.
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for r in t..self.a.rows {
            for c in t..self.a.cols {
                let x = self.a.at(r, c);
                if x.is_zero() {
                    continue;
                }
                if x.is_unit() {
                    return Some((r, c));
                }
                if best.map_or(true, |(br, bc)| x.abs_lt(self.a.at(br, bc))) {
                    best = Some((r, c));
                }
            }
        }
        best
    }

    fn run(mut self) -> Option<(Self, usize)> {
        let (m, n) = (self.a.rows, self.a.cols);
        let mut t = 0;
        while t < m.min(n) {
            let Some((pr, pc)) = self.pivot(t) else { break };
            self.swap_rows(t, pr);
            self.swap_cols(t, pc);
            loop {
                let mut clean = true;
                for i in (t + 1)..m {
                    if !self.a.at(i, t).is_zero() {
                        let q = self.a.at(i, t).quot(self.a.at(t, t))?;
                        self.row_op(i, t, &q.neg()?)?;
                        clean &= self.a.at(i, t).is_zero();
                    }
                }
                for j in (t + 1)..n {
                    if !self.a.at(t, j).is_zero() {
                        let q = self.a.at(t, j).quot(self.a.at(t, t))?;
                        self.col_op(j, t, &q.neg()?)?;
                        clean &= self.a.at(t, j).is_zero();
                    }
                }
                if !clean {
                    // A remainder smaller than the pivot survived; promote it.
                    let mut best = (t, t);
                    for i in (t + 1)..m {
                        let x = self.a.at(i, t);
                        if !x.is_zero() && x.abs_lt(self.a.at(best.0, best.1)) {
                            best = (i, t);
                        }
                    }
                    for j in (t + 1)..n {
                        let x = self.a.at(t, j);
                        if !x.is_zero() && x.abs_lt(self.a.at(best.0, best.1)) {
                            best = (t, j);
                        }
                    }
                    self.swap_rows(t, best.0);
                    self.swap_cols(t, best.1);
                    continue;
                }
                if self.a.at(t, t).is_unit() {
                    break;
                }
                let offending = ((t + 1)..m).find(|&i| ((t + 1)..n).any(|j| !self.a.at(t, t).divides(self.a.at(i, j))));
                match offending {
                    Some(i) => self.row_op(t, i, &R::one())?,
                    None => break,
                }
            }
            if self.a.at(t, t).is_negative() {
                self.negate_row(t)?;
            }
            t += 1;
        }
        Some((self, t))
    }
}

fn attempt<R: Ring>(a: Vec<R>, rows: usize, cols: usize) -> Option<SnfResult> {
    let state = State {
        a: Dense { rows, cols, d: a },
        u: Dense::identity(rows),
        u_inv: Dense::identity(rows),
        v: Dense::identity(cols),
        v_inv: Dense::identity(cols),
    };
    let (s, rank) = state.run()?;
    Some(SnfResult {
        diag: (0..rank).map(|i| s.a.at(i, i).to_big()).collect(),
        u: s.u.to_integer(),
        u_inv: s.u_inv.to_integer(),
        v: s.v.to_integer(),
        v_inv: s.v_inv.to_integer(),
        rank,
    })
}

/// Smith normal form of `a`.
pub fn smith_normal_form(a: &IntegerMatrix) -> SnfResult {
    let (rows, cols) = (a.rows(), a.cols());
    if a.max_abs_bits() < 32 {
        let small: Vec<i64> = a.data.iter().map(|v| i64::try_from(v).expect("fits")).collect();
        if let Some(r) = attempt(small, rows, cols) {
            return r;
        }
    }
    attempt(a.data.clone(), rows, cols).expect("arbitrary precision cannot overflow")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &IntegerMatrix) -> SnfResult {
        let s = smith_normal_form(a);
        let d = s.u.mul(a).mul(&s.v);
        for r in 0..d.rows() {
            for c in 0..d.cols() {
                let want = if r == c && r < s.rank { s.diag[r].clone() } else { BigInt::from(0) };
                assert_eq!(d.get(r, c), &want, "entry ({r},{c}) of U A V");
            }
        }
        assert_eq!(s.u.mul(&s.u_inv), IntegerMatrix::identity(a.rows()));
        assert_eq!(s.v.mul(&s.v_inv), IntegerMatrix::identity(a.cols()));
        for w in s.diag.windows(2) {
            assert!(Zero::is_zero(&w[1].mod_floor(&w[0])), "divisibility chain");
        }
        s
    }

    #[test]
    fn two_by_two_example() {
        let s = check(&IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]));
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&IntegerMatrix::identity(3));
        assert_eq!(s.diag, vec![BigInt::from(1); 3]);
        let z = check(&IntegerMatrix::zeros(3, 4));
        assert_eq!(z.rank, 0);
        let e = check(&IntegerMatrix::zeros(0, 3));
        assert_eq!(e.rank, 0);
    }

    #[test]
    fn coprime_diagonal_is_merged() {
        // diag(2, 3) ~ diag(1, 6).
        let s = check(&IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(s.diag, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = 1i64 << 31;
        let m = IntegerMatrix::from_rows(&[vec![big - 1, big - 3, 7], vec![big - 5, big - 7, 11], vec![13, 17, big - 11]]);
        let s = check(&m);
        let prod = s.diag.iter().fold(BigInt::from(1), |acc, d| acc * d);
        assert_eq!(prod, m.determinant().abs());
    }
}

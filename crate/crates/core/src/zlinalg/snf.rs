//! Smith normal form.
//!
//! [`invariant_factors`] is the workhorse: a sparse elimination that only
//! pivots on entries equal to ±1 (choosing short rows and rarely used columns
//! first), followed by a dense min-|pivot| pass on whatever core is left.
//! Both passes run on `i64` and restart on `BigInt` when a value overflows.
//! Large inputs are re-checked against ranks modulo several primes.
//!
//! [`snf`] also returns the unimodular transforms and is meant for small
//! matrices.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::modular;
use super::scalar::{Overflow, Scalar};

/// Matrices with more rows or columns than this get the modular rank check.
pub const VERIFY_DIMENSION: usize = 500;

type SparseRow<T> = Vec<(u32, T)>;

/// Smith form `left * A * right = diag(diag)` with unimodular `left`, `right`.
#[derive(Clone, Debug)]
pub struct Snf {
    /// Length `min(rows, cols)`, non-negative, each entry dividing the next;
    /// zeros come last.
    pub diag: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

/// Invariant factors of `a`: `min(rows, cols)` entries, ones first, zeros last.
pub fn invariant_factors(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.rows().min(a.cols());
    let rows = a.to_sparse_rows();
    let (units, mut core) = match sparse_phase::<i64>(&rows, a.cols()) {
        Ok(r) => r,
        Err(Overflow) => sparse_phase::<BigInt>(&rows, a.cols()).expect("BigInt cannot overflow"),
    };
    core.sort();
    let mut d: Vec<BigInt> = vec![BigInt::one(); units];
    d.extend(dense_core_invariants(core));
    d.resize(n, BigInt::zero());
    if a.rows().max(a.cols()) > VERIFY_DIMENSION {
        verify_with_ranks(&rows, a.cols(), &d);
    }
    d
}

/// Rank over Q. Small matrices read it off the invariant factors; larger
/// ones use `cols - dim ker`, with the kernel from the verified modular path.
pub fn rank(a: &IntMatrix) -> usize {
    if a.rows().max(a.cols()) <= 48 {
        invariant_factors(a).iter().filter(|d| !d.is_zero()).count()
    } else {
        a.cols() - super::lattice::rational_kernel(a).rank()
    }
}

fn to_scalar_rows<T: Scalar>(rows: &[Vec<(usize, BigInt)>]) -> Result<Vec<SparseRow<T>>, Overflow> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|(c, v)| T::from_bigint(v).map(|x| (*c as u32, x)).ok_or(Overflow))
                .collect()
        })
        .collect()
}

/// `dst - f * src` for sorted sparse rows. Columns that appear in the result
/// but not in `dst` are appended to `fill`.
fn axpy<T: Scalar>(
    dst: &[(u32, T)],
    f: &T,
    src: &[(u32, T)],
    fill: &mut Vec<u32>,
) -> Result<SparseRow<T>, Overflow> {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        let take = match (dst.get(i), src.get(j)) {
            (Some(a), Some(b)) => a.0.cmp(&b.0),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => unreachable!(),
        };
        match take {
            Ordering::Less => {
                out.push(dst[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                let v = f.mul(&src[j].1)?.neg()?;
                fill.push(src[j].0);
                out.push((src[j].0, v));
                j += 1;
            }
            Ordering::Equal => {
                let v = dst[i].1.sub(&f.mul(&src[j].1)?)?;
                if !v.is_nil() {
                    out.push((dst[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

/// Eliminates with ±1 pivots only. Returns the number of pivots and the rows
/// left over (non-empty, in the original column indexing).
fn sparse_phase<T: Scalar>(
    input: &[Vec<(usize, BigInt)>],
    ncols: usize,
) -> Result<(usize, Vec<Vec<(usize, BigInt)>>), Overflow> {
    let mut rows: Vec<SparseRow<T>> = to_scalar_rows(input)?;
    let nrows = rows.len();
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); ncols];
    for (r, row) in rows.iter().enumerate() {
        for (c, _) in row {
            col_rows[*c as usize].push(r as u32);
        }
    }
    let mut active = vec![true; nrows];
    let mut deferred = vec![false; nrows];
    let mut stamp = vec![usize::MAX; nrows];
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> =
        rows.iter().enumerate().map(|(r, row)| Reverse((row.len(), r as u32))).collect();
    let mut units = 0usize;
    let mut step = 0usize;
    let mut fill = Vec::new();

    while let Some(Reverse((len, r))) = heap.pop() {
        let r = r as usize;
        if !active[r] || deferred[r] {
            continue;
        }
        if rows[r].len() != len {
            heap.push(Reverse((rows[r].len(), r as u32)));
            continue;
        }
        if rows[r].is_empty() {
            active[r] = false;
            continue;
        }
        let pivot = rows[r]
            .iter()
            .filter(|(_, v)| v.is_unit())
            .min_by_key(|(c, _)| col_rows[*c as usize].len())
            .map(|(c, v)| (*c, v.clone()));
        let Some((pc, pv)) = pivot else {
            deferred[r] = true;
            continue;
        };
        step += 1;
        let pivot_row = std::mem::take(&mut rows[r]);
        active[r] = false;
        let others = std::mem::take(&mut col_rows[pc as usize]);
        for s in others {
            let s = s as usize;
            if s == r || !active[s] || stamp[s] == step {
                continue;
            }
            stamp[s] = step;
            let Ok(k) = rows[s].binary_search_by_key(&pc, |e| e.0) else {
                continue;
            };
            // pv is ±1, so pv is its own inverse.
            let factor = rows[s][k].1.mul(&pv)?;
            fill.clear();
            let new_row = axpy(&rows[s], &factor, &pivot_row, &mut fill)?;
            rows[s] = new_row;
            for &c in &fill {
                col_rows[c as usize].push(s as u32);
            }
            deferred[s] = false;
            heap.push(Reverse((rows[s].len(), s as u32)));
        }
        units += 1;
    }

    let core = rows
        .into_iter()
        .enumerate()
        .filter(|(r, row)| active[*r] && !row.is_empty())
        .map(|(_, row)| row.into_iter().map(|(c, v)| (c as usize, v.to_bigint())).collect())
        .collect();
    Ok((units, core))
}

/// Non-unit invariant factors (and any units) of the leftover core, nonzero only.
fn dense_core_invariants(core: Vec<Vec<(usize, BigInt)>>) -> Vec<BigInt> {
    if core.is_empty() {
        return Vec::new();
    }
    let mut cols: Vec<usize> = core.iter().flat_map(|r| r.iter().map(|e| e.0)).collect();
    cols.sort_unstable();
    cols.dedup();
    let dense: Vec<Vec<BigInt>> = core
        .iter()
        .map(|r| {
            let mut row = vec![BigInt::zero(); cols.len()];
            for (c, v) in r {
                row[cols.binary_search(c).unwrap()] = v.clone();
            }
            row
        })
        .collect();
    let small: Option<Vec<Vec<i64>>> =
        dense.iter().map(|r| r.iter().map(|v| v.to_i64()).collect()).collect();
    if let Some(m) = small {
        if let Ok(d) = dense_diagonalize(m) {
            return d.iter().map(Scalar::to_bigint).collect();
        }
    }
    dense_diagonalize(dense).expect("BigInt cannot overflow")
}

fn min_abs_nonzero<T: Scalar>(m: &[Vec<T>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if v.is_nil() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.abs_cmp(&m[bi][bj]) == Ordering::Less) {
                best = Some((i, j));
                if v.is_unit() {
                    return best;
                }
            }
        }
    }
    best
}

/// Diagonalizes in place without transforms; returns the nonzero diagonal,
/// absolute values, in divisibility order.
fn dense_diagonalize<T: Scalar>(mut m: Vec<Vec<T>>) -> Result<Vec<T>, Overflow> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        let Some((pi, pj)) = min_abs_nonzero(&m, t) else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..nrows {
                if m[i][t].is_nil() {
                    continue;
                }
                let q = m[i][t].div_fl(&m[t][t]);
                for j in t..ncols {
                    let v = m[i][j].sub(&q.mul(&m[t][j])?)?;
                    m[i][j] = v;
                }
                clean &= m[i][t].is_nil();
            }
            for j in t + 1..ncols {
                if m[t][j].is_nil() {
                    continue;
                }
                let q = m[t][j].div_fl(&m[t][t]);
                for row in m.iter_mut().skip(t) {
                    let v = row[j].sub(&q.mul(&row[t])?)?;
                    row[j] = v;
                }
                clean &= m[t][j].is_nil();
            }
            if !clean {
                // Move the smallest leftover of row t / column t onto the pivot.
                let mut best = (t, t);
                for i in t + 1..nrows {
                    if !m[i][t].is_nil() && m[i][t].abs_cmp(&m[best.0][best.1]) == Ordering::Less {
                        best = (i, t);
                    }
                }
                for j in t + 1..ncols {
                    if !m[t][j].is_nil() && m[t][j].abs_cmp(&m[best.0][best.1]) == Ordering::Less {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    m.swap(t, best.0);
                } else if best.1 != t {
                    for row in m.iter_mut() {
                        row.swap(t, best.1);
                    }
                }
                continue;
            }
            let p = m[t][t].clone();
            let bad = (t + 1..nrows)
                .find(|&i| m[i][t + 1..].iter().any(|v| !v.rem_floor(&p).is_nil()));
            match bad {
                Some(i) => {
                    for j in t..ncols {
                        let v = m[t][j].add(&m[i][j])?;
                        m[t][j] = v;
                    }
                }
                None => break,
            }
        }
        out.push(m[t][t].abs_val()?);
        t += 1;
    }
    Ok(out)
}

fn small_prime_factors(d: &BigInt, into: &mut Vec<u64>) {
    let Some(mut n) = d.to_u64() else { return };
    if n > 1_000_000_000_000 {
        return;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            into.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        into.push(n);
    }
}

/// Checks the rank over Q (via a large prime) and the rank modulo each small
/// prime against what the invariant factors predict.
fn verify_with_ranks(rows: &[Vec<(usize, BigInt)>], ncols: usize, d: &[BigInt]) {
    let rank = d.iter().filter(|x| !x.is_zero()).count();
    let mut primes = vec![2u64, 3, 5, 7];
    for x in d.iter().filter(|x| !x.is_zero() && !x.is_one()) {
        small_prime_factors(x, &mut primes);
    }
    primes.sort_unstable();
    primes.dedup();
    let big = modular::large_primes().next().expect("a large prime");
    primes.push(big);
    for p in primes {
        let expected = d.iter().filter(|x| !x.is_zero() && !(*x % p).is_zero()).count();
        let got = modular::rank_mod_p(rows, ncols, p);
        assert_eq!(
            got, expected,
            "Smith form failed the modular rank check mod {p} (rank {rank})"
        );
    }
}

/// Smith form with transforms, for small dense matrices.
pub fn snf(a: &IntMatrix) -> Snf {
    let (nr, nc) = (a.rows(), a.cols());
    let mut m = a.to_rows();
    let mut l = IntMatrix::identity(nr).to_rows();
    let mut r = IntMatrix::identity(nc).to_rows();
    let n = nr.min(nc);

    let swap_rows = |m: &mut Vec<Vec<BigInt>>, l: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        m.swap(i, j);
        l.swap(i, j);
    };
    let swap_cols = |m: &mut Vec<Vec<BigInt>>, r: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        for row in r.iter_mut() {
            row.swap(i, j);
        }
    };
    // row_i -= q * row_t
    fn row_op(m: &mut [Vec<BigInt>], i: usize, t: usize, q: &BigInt) {
        let src = m[t].clone();
        for (x, s) in m[i].iter_mut().zip(&src) {
            *x -= q * s;
        }
    }
    // col_j -= q * col_t
    fn col_op(m: &mut [Vec<BigInt>], j: usize, t: usize, q: &BigInt) {
        for row in m.iter_mut() {
            let s = row[t].clone();
            row[j] -= q * s;
        }
    }

    let mut t = 0;
    while t < n {
        let Some((pi, pj)) = min_abs_nonzero(&m, t) else { break };
        swap_rows(&mut m, &mut l, t, pi);
        swap_cols(&mut m, &mut r, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..nr {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                row_op(&mut m, i, t, &q);
                row_op(&mut l, i, t, &q);
                clean &= m[i][t].is_zero();
            }
            for j in t + 1..nc {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                col_op(&mut m, j, t, &q);
                col_op(&mut r, j, t, &q);
                clean &= m[t][j].is_zero();
            }
            if !clean {
                let mut best = (t, t);
                for i in t + 1..nr {
                    if !m[i][t].is_zero() && m[i][t].abs_cmp(&m[best.0][best.1]) == Ordering::Less {
                        best = (i, t);
                    }
                }
                for j in t + 1..nc {
                    if !m[t][j].is_zero() && m[t][j].abs_cmp(&m[best.0][best.1]) == Ordering::Less {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    swap_rows(&mut m, &mut l, t, best.0);
                } else if best.1 != t {
                    swap_cols(&mut m, &mut r, t, best.1);
                }
                continue;
            }
            let p = m[t][t].clone();
            let bad = (t + 1..nr).find(|&i| m[i][t + 1..].iter().any(|v| !v.mod_floor(&p).is_zero()));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_op(&mut m, t, i, &minus_one);
                    row_op(&mut l, t, i, &minus_one);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -x.clone();
            }
            for x in l[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let diag = (0..n).map(|i| m[i][i].clone()).collect();
    Snf { diag, left: IntMatrix::from_rows(nr, &l), right: IntMatrix::from_rows(nc, &r) }
}

/// Determinant of a small square matrix by fraction-free elimination (Bareiss).
pub fn determinant(a: &IntMatrix) -> BigInt {
    assert_eq!(a.rows(), a.cols(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &m[n - 1][n - 1]
}


#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows.first().map_or(0, Vec::len), rows)
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check_transforms(a: &IntMatrix) -> Snf {
        let s = snf(a);
        let prod = s.left.mul(a).unwrap().mul(&s.right).unwrap();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let want = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(prod.get(i, j), want, "L*A*R off at ({i},{j})");
            }
        }
        assert!(determinant(&s.left).abs().is_one());
        assert!(determinant(&s.right).abs().is_one());
        s
    }

    #[test]
    fn diag_six_four() {
        let a = m(&[vec![6, 0], vec![0, 4]]);
        assert_eq!(invariant_factors(&a), ints(&[2, 12]));
        assert_eq!(check_transforms(&a).diag, ints(&[2, 12]));
    }

    #[test]
    fn identity_has_unit_factors() {
        let a = IntMatrix::identity(5);
        assert_eq!(invariant_factors(&a), ints(&[1; 5]));
        assert_eq!(check_transforms(&a).diag, ints(&[1; 5]));
    }

    #[test]
    fn already_diagonal_with_zero() {
        let a = m(&[vec![2, 0], vec![0, 0]]);
        assert_eq!(invariant_factors(&a), ints(&[2, 0]));
        assert_eq!(check_transforms(&a).diag, ints(&[2, 0]));
    }

    #[test]
    fn rectangular_and_empty() {
        let a = m(&[vec![1, 1], vec![1, -1], vec![2, 0]]);
        assert_eq!(invariant_factors(&a), ints(&[1, 2]));
        check_transforms(&a);
        assert!(invariant_factors(&IntMatrix::zeros(0, 3)).is_empty());
        assert_eq!(invariant_factors(&IntMatrix::zeros(2, 3)), ints(&[0, 0]));
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = i64::MAX / 2;
        let a = m(&[vec![big, big - 1], vec![big - 1, big - 3]]);
        let d = invariant_factors(&a);
        let det = determinant(&a).abs();
        assert_eq!(&d[0] * &d[1], det);
        assert_eq!(check_transforms(&a).diag, d);
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&m(&[vec![2, 4], vec![6, 8]])), BigInt::from(-8));
        assert_eq!(determinant(&m(&[vec![0, 1], vec![1, 0]])), BigInt::from(-1));
    }
}

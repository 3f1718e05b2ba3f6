//! Row Hermite normal form.
//!
//! Convention: pivots are positive, each pivot lies strictly right of the one
//! above it, entries above a pivot are reduced into `[0, pivot)`, zero rows
//! come last.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// Nearest-integer quotient `a / b`.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two: BigInt = BigInt::from(2);
    let (q, r) = a.div_mod_floor(b);
    if (&r * &two).abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

fn sub_multiple(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for j in 0..m[dst].len() {
        let s = &m[src][j] * q;
        m[dst][j] -= s;
    }
}

fn hnf_impl(rows: Vec<Vec<BigInt>>, ncols: usize, track: bool) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<usize>) {
    let nrows = rows.len();
    let mut h = rows;
    let mut u: Vec<Vec<BigInt>> = if track {
        (0..nrows)
            .map(|i| (0..nrows).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        if (r..nrows).all(|i| h[i][c].is_zero()) {
            continue;
        }
        // Euclid on the column with the smallest pivot, rounding quotients.
        loop {
            let p = (r..nrows).filter(|&i| !h[i][c].is_zero()).min_by(|&i, &j| h[i][c].abs().cmp(&h[j][c].abs()));
            let p = p.expect("nonzero entry in column");
            h.swap(r, p);
            if track {
                u.swap(r, p);
            }
            let mut done = true;
            for i in r + 1..nrows {
                if h[i][c].is_zero() {
                    continue;
                }
                let q = round_div(&h[i][c], &h[r][c]);
                sub_multiple(&mut h, i, r, &q);
                if track {
                    sub_multiple(&mut u, i, r, &q);
                }
                if !h[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[r][c].is_negative() {
            for x in h[r].iter_mut() {
                *x = -std::mem::take(x);
            }
            if track {
                for x in u[r].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            sub_multiple(&mut h, i, r, &q);
            if track {
                sub_multiple(&mut u, i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (h, u, pivots)
}

/// `(H, U)` with `H = U * A`, `U` unimodular and `H` in row Hermite form.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (h, u, _) = hnf_impl(a.to_rows(), a.cols(), true);
    (IntMatrix::from_rows(a.cols(), &h), IntMatrix::from_rows(a.rows(), &u))
}

/// Nonzero rows of the Hermite form of the given rows, and their pivot columns.
pub fn hnf_rows(rows: &[Vec<BigInt>], ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let (mut h, _, pivots) = hnf_impl(rows.to_vec(), ncols, false);
    h.truncate(pivots.len());
    (h, pivots)
}

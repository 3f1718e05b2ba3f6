//! Arithmetic modulo word-sized integers: ranks and row echelon forms modulo
//! primes, Chinese remaindering, rational reconstruction, and kernels and
//! Hermite forms modulo a composite `D`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below 2^31, largest first.
pub fn large_primes() -> impl Iterator<Item = u64> {
    (1u64 << 30..1u64 << 31).rev().filter(|&n| is_prime_u64(n))
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

fn reduce(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn dense_mod(rows: &[Vec<(usize, BigInt)>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    rows.iter()
        .map(|r| {
            let mut d = vec![0u64; ncols];
            for (c, v) in r {
                d[*c] = reduce(v, p);
            }
            d
        })
        .collect()
}

/// Reduced row echelon form modulo the prime `p`, in place. Returns pivot columns.
/// The nonzero rows end up first.
pub fn rref_in_place(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(s) = (r..nrows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, s);
        let inv = inv_mod(m[r][c], p).expect("nonzero mod a prime is invertible");
        for x in m[r][c..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let (before, rest) = m.split_at_mut(r);
        let (piv, after) = rest.split_first_mut().unwrap();
        for row in before.iter_mut().chain(after.iter_mut()) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let f = p - f;
            for (x, y) in row[c..].iter_mut().zip(&piv[c..]) {
                if *y != 0 {
                    *x = ((*x as u128 + f as u128 * *y as u128) % p as u128) as u64;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a sparse-row integer matrix modulo `p`.
pub fn rank_mod_p(rows: &[Vec<(usize, BigInt)>], ncols: usize, p: u64) -> usize {
    // Row echelon only (no back elimination) keeps sparse inputs cheap.
    let mut m = dense_mod(rows, ncols, p);
    let nrows = m.len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(s) = (r..nrows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, s);
        let inv = inv_mod(m[r][c], p).expect("p is prime");
        let (top, below) = m.split_at_mut(r + 1);
        let piv = &top[r];
        for row in below.iter_mut() {
            if row[c] == 0 {
                continue;
            }
            let f = p - mul_mod(row[c], inv, p);
            for (x, y) in row[c..].iter_mut().zip(&piv[c..]) {
                if *y != 0 {
                    *x = ((*x as u128 + f as u128 * *y as u128) % p as u128) as u64;
                }
            }
        }
        r += 1;
    }
    r
}

/// Reduced echelon data of an integer matrix modulo `p`: pivot columns and the
/// pivot rows (length `ncols`).
pub fn rref_mod_p(rows: &[Vec<(usize, BigInt)>], ncols: usize, p: u64) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut m = dense_mod(rows, ncols, p);
    let pivots = rref_in_place(&mut m, p);
    m.truncate(pivots.len());
    (pivots, m)
}

/// `x ≡ a (mod m)`, `x ≡ b (mod p)`, result in `[0, m p)`.
pub fn crt(a: &BigInt, m: &BigInt, b: u64, p: u64) -> BigInt {
    let am = reduce(a, p);
    let mm = reduce(m, p);
    let inv = inv_mod(mm, p).expect("coprime moduli");
    let diff = (b + p - am) % p;
    let k = mul_mod(diff, inv, p);
    a + m * BigInt::from(k)
}

/// Finds `n/d` with `n ≡ a d (mod m)`, `|n|, d <= sqrt(m/2)`, `d > 0`.
pub fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Row operations modulo a composite `d` (`d < 2^63`).
struct ModRing {
    d: u64,
}

impl ModRing {
    fn norm(&self, x: i128) -> u64 {
        x.rem_euclid(self.d as i128) as u64
    }

    /// Replaces `(a, b)` by `(x a + y b, u a + v b)` modulo `d` from column `from` on.
    fn combine(&self, a: &mut [u64], b: &mut [u64], x: i128, y: i128, u: i128, v: i128, from: usize) {
        let d = self.d as i128;
        let (x, y, u, v) = (x.rem_euclid(d), y.rem_euclid(d), u.rem_euclid(d), v.rem_euclid(d));
        for j in from..a.len() {
            let (ra, rb) = (a[j] as i128, b[j] as i128);
            if ra == 0 && rb == 0 {
                continue;
            }
            // Each product is below 2^126; reduce before adding.
            a[j] = (((x * ra) % d + (y * rb) % d) % d) as u64;
            b[j] = (((u * ra) % d + (v * rb) % d) % d) as u64;
        }
    }

    /// Eliminates column `c` among `rows` (all nonzero there may be any) into
    /// `rows[0]`; returns the annihilator row `(d / gcd(pivot, d)) * pivot_row`
    /// if it is nonzero.
    fn eliminate(&self, rows: &mut [Vec<u64>], c: usize) -> Option<Vec<u64>> {
        let (head, tail) = rows.split_first_mut()?;
        for s in tail.iter_mut() {
            if s[c] == 0 {
                continue;
            }
            if head[c] == 0 {
                std::mem::swap(head, s);
                continue;
            }
            let (a, b) = (head[c] as i128, s[c] as i128);
            let e = a.extended_gcd(&b);
            let (g, x, y) = (e.gcd, e.x, e.y);
            self.combine(head, s, x, y, -(b / g), a / g, c);
        }
        if head[c] == 0 {
            return None;
        }
        let g = (head[c] as i128).gcd(&(self.d as i128));
        let k = self.d as i128 / g;
        if k == self.d as i128 {
            return None;
        }
        let ann: Vec<u64> = head.iter().map(|&x| self.norm(x as i128 * k)).collect();
        ann.iter().any(|&x| x != 0).then_some(ann)
    }
}

/// Generators (modulo `d Z^k`) of `{z in Z^k : z * a ≡ 0 (mod d)}`, where `a`
/// is `k x n`. Returns `None` when `d` does not fit in a word.
pub fn left_kernel_mod(a: &[Vec<BigInt>], n: usize, d: &BigInt) -> Option<Vec<Vec<u64>>> {
    let dd = d.to_u64().filter(|&x| x > 0 && x < 1 << 62)?;
    let ring = ModRing { d: dd };
    let k = a.len();
    let mut active: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u64> = row.iter().map(|v| reduce(v, dd)).collect();
            r.resize(n, 0);
            r.extend((0..k).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let mut with: Vec<Vec<u64>> = Vec::new();
        let mut without: Vec<Vec<u64>> = Vec::new();
        for r in active.drain(..) {
            if r[c] != 0 {
                with.push(r);
            } else {
                without.push(r);
            }
        }
        if let Some(ann) = ring.eliminate(&mut with, c) {
            without.push(ann);
        }
        // with[0] is the pivot row and leaves; the rest now vanish at c.
        without.extend(with.into_iter().skip(1));
        without.retain(|r| r.iter().any(|&x| x != 0));
        active = without;
    }
    Some(active.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Upper-triangular basis (positive pivots dividing `d`, later entries in
/// `[0, d)`) of the lattice spanned by `gens` together with `d Z^k`.
pub fn hnf_mod(gens: &[Vec<u64>], k: usize, d: u64) -> Vec<Vec<u64>> {
    let ring = ModRing { d };
    let mut active: Vec<Vec<u64>> = gens.iter().map(|r| r.iter().map(|&x| x % d).collect()).collect();
    let mut basis = Vec::with_capacity(k);
    for c in 0..k {
        let mut with: Vec<Vec<u64>> = Vec::new();
        let mut without: Vec<Vec<u64>> = Vec::new();
        for r in active.drain(..) {
            if r[c] != 0 {
                with.push(r);
            } else {
                without.push(r);
            }
        }
        let mut pivot = if with.is_empty() {
            None
        } else {
            if let Some(ann) = ring.eliminate(&mut with, c) {
                without.push(ann);
            }
            let mut it = with.into_iter();
            let p = it.next();
            without.extend(it);
            p
        };
        // Fold in d * e_c: pivot becomes gcd(pivot, d); the leftover is an
        // annihilator row already added above.
        let row = match pivot.take() {
            None => {
                let mut r = vec![0u64; k];
                r[c] = d;
                r
            }
            Some(mut r) => {
                let e = (r[c] as i128).extended_gcd(&(d as i128));
                let x = e.x.rem_euclid(d as i128);
                for v in r.iter_mut() {
                    *v = ring.norm(*v as i128 * x);
                }
                r[c] = e.gcd as u64;
                r
            }
        };
        without.retain(|r| r.iter().any(|&x| x != 0));
        active = without;
        basis.push(row);
    }
    // Reduce entries above pivots.
    for c in (0..k).rev() {
        let p = basis[c][c];
        for i in 0..c {
            let q = basis[i][c] / p;
            if q == 0 {
                continue;
            }
            let src = basis[c].clone();
            for j in c..k {
                let v = basis[i][j] as i128 - q as i128 * src[j] as i128;
                basis[i][j] = if j == c { v as u64 } else { ring.norm(v) };
            }
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime_u64(2_147_483_647));
        assert!(!is_prime_u64(2_147_483_649));
        let first: Vec<u64> = large_primes().take(2).collect();
        assert_eq!(first[0], 2_147_483_647);
        assert!(first[1] < first[0] && is_prime_u64(first[1]));
    }

    #[test]
    fn reconstruction_round_trip() {
        let m = BigInt::from(1_000_003u64) * BigInt::from(998_244_353u64);
        for (n, d) in [(3i64, 7i64), (-5, 12), (0, 1), (1234, 567)] {
            let inv = BigInt::from(d).extended_gcd(&m).x.mod_floor(&m);
            let a = (BigInt::from(n) * inv).mod_floor(&m);
            let (rn, rd) = rational_reconstruction(&a, &m).unwrap();
            let g = BigInt::from(n).gcd(&BigInt::from(d));
            assert_eq!((rn, rd), (BigInt::from(n) / &g, BigInt::from(d) / &g));
        }
    }

    #[test]
    fn crt_combines() {
        let x = crt(&BigInt::from(2), &BigInt::from(5), 3, 7);
        assert_eq!(x, BigInt::from(17));
    }

    #[test]
    fn kernel_mod_composite() {
        // z * [2, 4]^T ≡ 0 mod 4 for z in Z^2: 2 z0 + 4 z1 ≡ 0 mod 4 <=> z0 even.
        let a = vec![vec![BigInt::from(2)], vec![BigInt::from(4)]];
        let gens = left_kernel_mod(&a, 1, &BigInt::from(4)).unwrap();
        let basis = hnf_mod(&gens, 2, 4);
        assert_eq!(basis, vec![vec![2, 0], vec![0, 1]]);
    }

    #[test]
    fn rank_modulo_small_prime() {
        let rows = vec![
            vec![(0, BigInt::from(2)), (1, BigInt::from(4))],
            vec![(0, BigInt::from(1)), (1, BigInt::from(3))],
        ];
        assert_eq!(rank_mod_p(&rows, 2, 2), 1);
        assert_eq!(rank_mod_p(&rows, 2, 3), 2);
    }
}

//! Integer lattices given by echelon row bases, integer kernels of rational
//! matrices, and the abelian groups obtained as quotients of lattices.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::abgroup::AbGroup;
use super::hnf::{hnf, hnf_rows};
use super::matrix::IntMatrix;
use super::modular::{self, crt, large_primes, rational_reconstruction, rref_mod_p};
use super::scalar::{Overflow, Scalar};
use super::snf::invariant_factors;
use super::LinalgError;

/// A sublattice of `Z^dim`.
///
/// The basis is in echelon form with respect to the column order `order`:
/// row `i` vanishes on every column placed before its pivot, and pivots move
/// strictly right from row to row. The default order is the identity, in
/// which case the basis is the row Hermite normal form.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    order: Vec<usize>,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    /// The lattice spanned by arbitrary integer rows of length `dim`.
    pub fn from_generators(dim: usize, rows: &[Vec<BigInt>]) -> Self {
        let (basis, pivots) = hnf_rows(rows, dim);
        Lattice { dim, order: (0..dim).collect(), basis, pivots }
    }

    pub fn from_matrix(m: &IntMatrix) -> Self {
        Self::from_generators(m.cols(), &m.to_rows())
    }

    pub fn full(dim: usize) -> Self {
        Self::from_matrix(&IntMatrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Lattice { dim, order: (0..dim).collect(), basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.dim, &self.basis)
    }

    /// Coordinates of `v` in the basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.dim);
        back_substitute::<BigInt>(&self.basis, &self.pivots, v.to_vec())
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Coordinates of each row, failing with `NotSubLattice` on the first
    /// row outside the lattice.
    pub fn coordinates_of_rows(&self, rows: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>, LinalgError> {
        let small = to_small(&self.basis);
        rows.iter()
            .map(|v| {
                if v.len() != self.dim {
                    return Err(LinalgError::DimensionMismatch { expected: self.dim, found: v.len() });
                }
                let fast = small.as_ref().and_then(|b| {
                    let sv: Option<Vec<i64>> = v.iter().map(|x| x.to_i64()).collect();
                    sv.and_then(|sv| try_back_substitute::<i64>(b, &self.pivots, sv).ok())
                });
                let coords = match fast {
                    Some(c) => c.map(|c| c.iter().map(|&x| BigInt::from(x)).collect()),
                    None => back_substitute::<BigInt>(&self.basis, &self.pivots, v.clone()),
                };
                coords.ok_or(LinalgError::NotSubLattice)
            })
            .collect()
    }

    /// Whether `other` is contained in `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        self.dim == other.dim && self.coordinates_of_rows(&other.basis).is_ok()
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.dim, other.dim);
        let rows: Vec<Vec<BigInt>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Lattice::from_generators(self.dim, &rows)
    }

    /// The row Hermite normal form basis, in the natural column order.
    pub fn hnf_basis(&self) -> Vec<Vec<BigInt>> {
        if self.order.iter().enumerate().all(|(i, &c)| i == c) {
            self.basis.clone()
        } else {
            hnf_rows(&self.basis, self.dim).0
        }
    }

    /// True when `Z^dim ∩ (Q ⊗ L) = L`.
    pub fn is_saturated(&self) -> bool {
        invariant_factors(&self.basis_matrix()).iter().all(|d| d.is_one())
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.rank() == other.rank()
            && self.contains_lattice(other)
            && other.contains_lattice(self)
    }
}

impl Eq for Lattice {}

fn to_small(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    rows.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
}

/// `Ok(None)` when `v` is outside the lattice, `Err` on overflow.
fn try_back_substitute<T: Scalar>(basis: &[Vec<T>], pivots: &[usize], mut v: Vec<T>) -> Result<Option<Vec<T>>, Overflow> {
    let mut coords = Vec::with_capacity(basis.len());
    for (row, &p) in basis.iter().zip(pivots) {
        let a = &v[p];
        if a.is_nil() {
            coords.push(T::nil());
            continue;
        }
        if !a.rem_floor(&row[p]).is_nil() {
            return Ok(None);
        }
        let c = a.div_fl(&row[p]);
        for (x, b) in v.iter_mut().zip(row) {
            if !b.is_nil() {
                *x = x.sub(&c.mul(b)?)?;
            }
        }
        coords.push(c);
    }
    Ok(v.iter().all(Scalar::is_nil).then_some(coords))
}

fn back_substitute<T: Scalar>(basis: &[Vec<T>], pivots: &[usize], v: Vec<T>) -> Option<Vec<T>> {
    try_back_substitute(basis, pivots, v).expect("BigInt cannot overflow")
}

/// `Z^n / rowspace(a)`, where `a` has `n` columns.
pub fn cokernel(a: &IntMatrix, n: usize) -> AbGroup {
    assert_eq!(a.cols(), n, "relation rows must have {n} entries");
    let d = invariant_factors(a);
    let rank = d.iter().filter(|x| !x.is_zero()).count();
    AbGroup::from_factors(d.into_iter().filter(|x| !x.is_zero()).chain(std::iter::repeat_n(BigInt::zero(), n - rank)))
}

/// `L / span(u)`, where the rows of `u` must lie in `L`.
pub fn subquotient_torsion(lattice: &Lattice, u: &IntMatrix) -> Result<AbGroup, LinalgError> {
    if u.cols() != lattice.dim() {
        return Err(LinalgError::DimensionMismatch { expected: lattice.dim(), found: u.cols() });
    }
    let coords = lattice.coordinates_of_rows(&u.to_rows())?;
    let k = lattice.rank();
    let rows: Vec<Vec<(usize, BigInt)>> = coords
        .into_iter()
        .map(|r| r.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect())
        .collect();
    Ok(cokernel(&IntMatrix::from_sparse_rows(k, rows), k))
}

/// Saturated integer kernel `{v in Z^n : a v = 0}` of a matrix with `n`
/// columns. A rational matrix is passed with its denominators cleared, which
/// does not change the kernel.
pub fn rational_kernel(a: &IntMatrix) -> Lattice {
    if a.cols() <= 48 && a.rows() <= 48 {
        rational_kernel_small(a)
    } else {
        rational_kernel_modular(a).unwrap_or_else(|| rational_kernel_small(a))
    }
}

/// Integer kernel of a sparse matrix. Variables with a unit coefficient are
/// eliminated by substitution, which is unimodular, so only the remaining
/// system goes through `rational_kernel`; the eliminated coordinates are then
/// recovered by back substitution.
pub fn sparse_kernel(a: &IntMatrix) -> Lattice {
    let n = a.cols();
    let mut eqs: Vec<BTreeMap<usize, BigInt>> = a.to_sparse_rows().into_iter().map(|r| r.into_iter().collect()).collect();
    let mut occ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (e, eq) in eqs.iter().enumerate() {
        for &v in eq.keys() {
            occ[v].insert(e);
        }
    }
    let mut alive = vec![true; eqs.len()];
    let mut eliminated = vec![false; n];
    let mut subs: Vec<(usize, Vec<(usize, BigInt)>)> = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for e in 0..eqs.len() {
            if !alive[e] {
                continue;
            }
            let pivot = eqs[e]
                .iter()
                .filter(|(_, c)| c.magnitude().is_one())
                .min_by_key(|(v, _)| occ[**v].len())
                .map(|(v, c)| (*v, c.clone()));
            let Some((i, u)) = pivot else { continue };
            // u x_i + Σ a_j x_j = 0, so x_i = -u Σ a_j x_j
            let eq = std::mem::take(&mut eqs[e]);
            alive[e] = false;
            let expr: Vec<(usize, BigInt)> = eq.iter().filter(|(v, _)| **v != i).map(|(v, c)| (*v, -&u * c)).collect();
            for v in eq.keys() {
                occ[*v].remove(&e);
            }
            for f in std::mem::take(&mut occ[i]) {
                let c = eqs[f].remove(&i).expect("occurrence lists track equations");
                for (j, b) in &expr {
                    let entry = eqs[f].entry(*j).or_insert_with(BigInt::zero);
                    *entry += &c * b;
                    if entry.is_zero() {
                        eqs[f].remove(j);
                        occ[*j].remove(&f);
                    } else {
                        occ[*j].insert(f);
                    }
                }
                if eqs[f].is_empty() {
                    alive[f] = false;
                }
            }
            eliminated[i] = true;
            subs.push((i, expr));
            changed = true;
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !eliminated[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &v) in rest.iter().enumerate() {
        index[v] = k;
    }
    let remaining: Vec<Vec<(usize, BigInt)>> = eqs
        .iter()
        .zip(&alive)
        .filter(|(eq, &a)| a && !eq.is_empty())
        .map(|(eq, _)| eq.iter().map(|(v, c)| (index[*v], c.clone())).collect())
        .collect();
    let reduced = if remaining.is_empty() {
        Lattice::full(rest.len())
    } else {
        rational_kernel(&IntMatrix::from_sparse_rows(rest.len(), remaining))
    };
    let basis: Vec<Vec<BigInt>> = reduced
        .basis
        .iter()
        .map(|w| {
            let mut x = vec![BigInt::zero(); n];
            for (k, c) in w.iter().enumerate() {
                x[rest[k]] = c.clone();
            }
            for (i, expr) in subs.iter().rev() {
                x[*i] = expr.iter().map(|(j, c)| c * &x[*j]).sum();
            }
            x
        })
        .collect();
    // The lifted rows agree with the reduced basis on `rest`, so they stay in
    // echelon form for the reduced order followed by the eliminated columns.
    let order: Vec<usize> = reduced.order.iter().map(|&k| rest[k]).chain((0..n).filter(|&v| eliminated[v])).collect();
    let pivots = reduced.pivots.iter().map(|&k| rest[k]).collect();
    Lattice { dim: n, order, basis, pivots }
}

/// Kernel via a unimodular transform of the transpose: the transform rows
/// that kill `a^T` form a basis of the integer kernel.
pub fn rational_kernel_small(a: &IntMatrix) -> Lattice {
    let (h, u) = hnf(&a.transpose());
    let rank = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    let rows: Vec<Vec<BigInt>> = (rank..u.rows()).map(|i| u.row(i)).collect();
    Lattice::from_generators(a.cols(), &rows)
}

/// Kernel via reduced echelon forms modulo word-sized primes, rational
/// reconstruction, an exact check, and saturation modulo the common
/// denominator. Returns `None` if the denominator is too large for the
/// word-sized saturation step.
pub(crate) fn rational_kernel_modular(a: &IntMatrix) -> Option<Lattice> {
    let n = a.cols();
    let rows = a.to_sparse_rows();
    let mut pivots: Option<Vec<usize>> = None;
    let mut residues: Vec<BigInt> = Vec::new();
    let mut modulus = BigInt::one();
    let mut count = 0usize;
    let mut next_try = 1usize;

    for p in large_primes() {
        let (piv, rref) = rref_mod_p(&rows, n, p);
        let free = free_columns(&piv, n);
        let image: Vec<u64> = rref.iter().flat_map(|r| free.iter().map(|&f| r[f])).collect();
        match &pivots {
            Some(cur) if *cur == piv => {
                for (x, &b) in residues.iter_mut().zip(&image) {
                    *x = crt(x, &modulus, b, p);
                }
                modulus *= p;
            }
            // A larger rank, or the same rank with earlier pivots, means the
            // previous primes were unlucky.
            Some(cur) if piv.len() < cur.len() || (piv.len() == cur.len() && piv > *cur) => continue,
            _ => {
                pivots = Some(piv);
                residues = image.into_iter().map(BigInt::from).collect();
                modulus = BigInt::from(p);
                count = 0;
                next_try = 1;
            }
        }
        count += 1;
        if count < next_try {
            continue;
        }
        next_try *= 2;
        let piv = pivots.as_ref().unwrap();
        if let Some(lat) = try_assemble(a, &rows, piv, &residues, &modulus) {
            return lat;
        }
    }
    unreachable!("ran out of word-sized primes")
}

fn free_columns(pivots: &[usize], n: usize) -> Vec<usize> {
    let mut is_pivot = vec![false; n];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..n).filter(|&c| !is_pivot[c]).collect()
}

/// Attempts reconstruction of the echelon matrix; on success, checks it
/// exactly and saturates. Outer `None`: try more primes. Inner `None`: the
/// denominator is too large.
#[allow(clippy::option_option)]
fn try_assemble(
    a: &IntMatrix,
    rows: &[Vec<(usize, BigInt)>],
    pivots: &[usize],
    residues: &[BigInt],
    modulus: &BigInt,
) -> Option<Option<Lattice>> {
    let n = a.cols();
    let free = free_columns(pivots, n);
    let (r, f) = (pivots.len(), free.len());
    if f == 0 {
        return Some(Some(Lattice::zero(n)));
    }
    let mut fracs = Vec::with_capacity(residues.len());
    let mut den = BigInt::one();
    for x in residues {
        let (num, d) = rational_reconstruction(x, modulus)?;
        den = den.lcm(&d);
        fracs.push((num, d));
    }
    // numer[i][j] = den * R[i][j]: x_P = -(numer / den) x_F on the kernel.
    let numer: Vec<Vec<BigInt>> = (0..r)
        .map(|i| (0..f).map(|j| { let (nu, d) = &fracs[i * f + j]; nu * (&den / d) }).collect())
        .collect();
    if !check_kernel(rows, pivots, &free, &numer, &den) {
        return None;
    }
    // z in Z^F gives an integer kernel vector iff numer z ≡ 0 (mod den).
    let z_basis: Vec<Vec<BigInt>> = if den.is_one() {
        (0..f).map(|i| (0..f).map(|j| BigInt::from(u8::from(i == j))).collect()).collect()
    } else {
        let transposed: Vec<Vec<BigInt>> = (0..f).map(|j| numer.iter().map(|row| row[j].clone()).collect()).collect();
        let Some(gens) = modular::left_kernel_mod(&transposed, r, &den) else {
            return Some(None);
        };
        let d = den.to_u64().unwrap();
        modular::hnf_mod(&gens, f, d)
            .into_iter()
            .map(|row| row.into_iter().map(BigInt::from).collect())
            .collect()
    };
    let mut basis = Vec::with_capacity(f);
    for z in &z_basis {
        let mut v = vec![BigInt::zero(); n];
        for (j, &c) in free.iter().enumerate() {
            v[c] = z[j].clone();
        }
        for (i, &p) in pivots.iter().enumerate() {
            let s: BigInt = numer[i].iter().zip(z).filter(|(_, b)| !b.is_zero()).map(|(a, b)| a * b).sum();
            let (q, rem) = s.div_rem(&den);
            assert!(rem.is_zero(), "saturation produced a non-integral kernel vector");
            v[p] = -q;
        }
        basis.push(v);
    }
    let order: Vec<usize> = free.iter().chain(pivots).copied().collect();
    Some(Some(Lattice { dim: n, order, basis, pivots: free }))
}

/// Exact check of `den * a_F = a_P * numer` for every row of `a`.
fn check_kernel(rows: &[Vec<(usize, BigInt)>], pivots: &[usize], free: &[usize], numer: &[Vec<BigInt>], den: &BigInt) -> bool {
    let n = pivots.len() + free.len();
    let mut pos = vec![(false, 0usize); n];
    for (i, &p) in pivots.iter().enumerate() {
        pos[p] = (true, i);
    }
    for (j, &c) in free.iter().enumerate() {
        pos[c] = (false, j);
    }
    let small_numer: Option<Vec<Vec<i128>>> = numer.iter().map(|r| r.iter().map(|x| x.to_i128()).collect()).collect();
    let small_den = den.to_i128();
    for row in rows {
        let mut acc_small: Option<Vec<i128>> = small_numer.as_ref().and(small_den).map(|_| vec![0i128; free.len()]);
        if let (Some(acc), Some(sn), Some(sd)) = (acc_small.as_mut(), small_numer.as_ref(), small_den) {
            let mut ok = true;
            'fast: for (c, v) in row {
                let Some(v) = v.to_i128() else { ok = false; break };
                let (is_p, k) = pos[*c];
                if is_p {
                    for (x, y) in acc.iter_mut().zip(&sn[k]) {
                        match v.checked_mul(*y).and_then(|t| x.checked_add(t)) {
                            Some(s) => *x = s,
                            None => {
                                ok = false;
                                break 'fast;
                            }
                        }
                    }
                } else {
                    match v.checked_mul(sd).and_then(|t| acc[k].checked_sub(t)) {
                        Some(s) => acc[k] = s,
                        None => {
                            ok = false;
                            break 'fast;
                        }
                    }
                }
            }
            if ok {
                if acc.iter().any(|&x| x != 0) {
                    return false;
                }
                continue;
            }
        }
        acc_small = None;
        let _ = acc_small;
        let mut acc = vec![BigInt::zero(); free.len()];
        for (c, v) in row {
            let (is_p, k) = pos[*c];
            if is_p {
                for (x, y) in acc.iter_mut().zip(&numer[k]) {
                    *x += v * y;
                }
            } else {
                acc[k] -= v * den;
            }
        }
        if acc.iter().any(|x| !x.is_zero()) {
            return false;
        }
    }
    true
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

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel(&IntMatrix::zeros(0, 3), 3), AbGroup::free(3));
        assert_eq!(cokernel(&m(&[vec![2, 0], vec![0, 3]]), 2), AbGroup::cyclic(6));
        assert_eq!(cokernel(&m(&[vec![1, 1], vec![1, -1]]), 2), AbGroup::cyclic(2));
    }

    #[test]
    fn kernel_examples() {
        let k = rational_kernel(&m(&[vec![1, -1]]));
        assert_eq!(k, Lattice::from_generators(2, &[ints(&[1, 1])]));
        assert_eq!(rational_kernel(&IntMatrix::identity(3)).rank(), 0);
        let k = rational_kernel(&m(&[vec![2, 4]]));
        assert_eq!(k, Lattice::from_generators(2, &[ints(&[2, -1])]));
        assert!(k.is_saturated());
    }

    #[test]
    fn kernel_paths_agree() {
        // Saturation matters here: the rational echelon form has denominators.
        let a = m(&[vec![2, 4, 6, 3, 0], vec![0, 3, 9, 1, 6], vec![4, 2, 0, 5, 2]]);
        let small = rational_kernel_small(&a);
        let modular = rational_kernel_modular(&a).unwrap();
        assert_eq!(small, modular);
        assert!(modular.is_saturated());
        for v in modular.basis() {
            assert!(a.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn subquotients() {
        let k = Lattice::from_generators(2, &[ints(&[1, 0])]);
        assert_eq!(subquotient_torsion(&k, &m(&[vec![2, 0]])).unwrap(), AbGroup::cyclic(2));
        let full = Lattice::full(2);
        let u = m(&[vec![1, 1], vec![1, -1]]);
        assert_eq!(subquotient_torsion(&full, &u).unwrap(), AbGroup::cyclic(2));
        assert_eq!(subquotient_torsion(&k, &k.basis_matrix()).unwrap(), AbGroup::trivial());
        assert_eq!(subquotient_torsion(&k, &m(&[vec![0, 1]])), Err(LinalgError::NotSubLattice));
    }

    #[test]
    fn lattice_equality_ignores_basis_choice() {
        let a = Lattice::from_generators(2, &[ints(&[2, 4]), ints(&[6, 8])]);
        let b = Lattice::from_generators(2, &[ints(&[2, 0]), ints(&[0, 4])]);
        assert_eq!(a, b);
        assert!(a.contains(&ints(&[4, 4])));
        assert!(!a.contains(&ints(&[1, 0])));
        assert_eq!(a.sum(&Lattice::from_generators(2, &[ints(&[0, 2])])).rank(), 2);
    }

    proptest::proptest! {
        #[test]
        fn kernel_paths_agree_on_random_input(
            a in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 7), 1..5)
        ) {
            let m = IntMatrix::from_rows(7, &a);
            proptest::prop_assert_eq!(rational_kernel_modular(&m).unwrap(), rational_kernel_small(&m));
        }

        #[test]
        fn sparse_kernel_agrees_on_sparse_input(
            a in proptest::collection::vec(proptest::collection::vec(
                proptest::prop_oneof![4 => proptest::strategy::Just(0i64), 2 => -1i64..=1, 1 => -3i64..=3], 9), 0..8)
        ) {
            let m = IntMatrix::from_rows(9, &a);
            let k = sparse_kernel(&m);
            proptest::prop_assert_eq!(&k, &rational_kernel_small(&m));
            for v in k.basis() {
                proptest::prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
                proptest::prop_assert!(k.contains(v));
            }
        }
    }
}

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::snf::invariant_factors;
use super::LinalgError;

/// A finitely generated abelian group `Z/d_1 + ... + Z/d_k`, with
/// `1 < d_1 | d_2 | ...` and the free factors (`d = 0`) listed last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AbGroup {
    factors: Vec<BigInt>,
}

impl AbGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbGroup { factors: vec![BigInt::zero(); rank] }
    }

    pub fn cyclic(n: impl Into<BigInt>) -> Self {
        Self::from_factors([n.into()])
    }

    /// Normalizes any list of cyclic orders (0 for Z) into invariant-factor form.
    pub fn from_factors(list: impl IntoIterator<Item = BigInt>) -> Self {
        let list: Vec<BigInt> = list.into_iter().map(|d| d.abs()).collect();
        let zeros = list.iter().filter(|d| d.is_zero()).count();
        let finite: Vec<BigInt> = list.into_iter().filter(|d| !d.is_zero() && !d.is_one()).collect();
        let n = finite.len();
        let mut diag = IntMatrix::zeros(n, n);
        for (i, d) in finite.into_iter().enumerate() {
            diag.set(i, i, d);
        }
        let mut factors: Vec<BigInt> = invariant_factors(&diag).into_iter().filter(|d| !d.is_one()).collect();
        factors.extend(std::iter::repeat_n(BigInt::zero(), zeros));
        AbGroup { factors }
    }

    /// Invariant factors of the form above; `0` marks a copy of Z.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn torsion_invariants(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_zero()).cloned().collect()
    }

    pub fn rank(&self) -> usize {
        self.factors.iter().filter(|d| d.is_zero()).count()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rank() == 0
    }

    /// `None` when the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.factors.iter().product())
    }

    pub fn torsion(&self) -> AbGroup {
        AbGroup { factors: self.torsion_invariants() }
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion_invariants().iter().product()
    }

    /// Exponent of the torsion subgroup (1 when torsion-free).
    pub fn torsion_exponent(&self) -> BigInt {
        self.torsion_invariants().last().cloned().unwrap_or_else(BigInt::one)
    }

    pub fn direct_sum(&self, other: &AbGroup) -> AbGroup {
        Self::from_factors(self.factors.iter().chain(&other.factors).cloned())
    }
}

impl fmt::Display for AbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.torsion_invariants().iter().map(|d| format!("Z/{d}")).collect();
        match self.rank() {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        write!(f, "{}", parts.join(" + "))
    }
}

fn reduce_coords(v: &mut [BigInt], moduli: &[BigInt]) {
    for (x, d) in v.iter_mut().zip(moduli) {
        if !d.is_zero() {
            *x = x.mod_floor(d);
        }
    }
}

/// A homomorphism given on generators: row `i` of `matrix` is the image of
/// the `i`-th generator of `domain`, in the coordinates of `codomain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbHom {
    domain: AbGroup,
    codomain: AbGroup,
    matrix: IntMatrix,
}

impl AbHom {
    pub fn new(domain: AbGroup, codomain: AbGroup, matrix: IntMatrix) -> Result<Self, LinalgError> {
        let (nd, nc) = (domain.factors.len(), codomain.factors.len());
        if matrix.rows() != nd {
            return Err(LinalgError::DimensionMismatch { expected: nd, found: matrix.rows() });
        }
        if matrix.cols() != nc {
            return Err(LinalgError::DimensionMismatch { expected: nc, found: matrix.cols() });
        }
        for (i, d) in domain.factors.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            for (j, c) in codomain.factors.iter().enumerate() {
                let v = d * matrix.get(i, j);
                let ok = if c.is_zero() { v.is_zero() } else { v.is_multiple_of(c) };
                if !ok {
                    return Err(LinalgError::NotWellDefined);
                }
            }
        }
        let mut rows = matrix.to_rows();
        for r in rows.iter_mut() {
            reduce_coords(r, &codomain.factors);
        }
        Ok(AbHom { matrix: IntMatrix::from_rows(nc, &rows), domain, codomain })
    }

    pub fn domain(&self) -> &AbGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &AbGroup {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = self.matrix.vec_mul(v);
        reduce_coords(&mut out, &self.codomain.factors);
        out
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &AbHom) -> Result<AbHom, LinalgError> {
        let m = self.matrix.mul(&next.matrix)?;
        AbHom::new(self.domain.clone(), next.codomain.clone(), m)
    }
}

/// A finite abelian group with elements numbered `0..order` in mixed radix
/// over the given cyclic factors. Element `0` is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    moduli: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
}

impl FiniteGroup {
    pub fn from_moduli(moduli: Vec<u64>) -> Self {
        let mut strides = Vec::with_capacity(moduli.len());
        let mut order = 1usize;
        for &m in &moduli {
            assert!(m > 0, "cyclic factor of order zero");
            strides.push(order);
            order = order.checked_mul(m as usize).expect("group too large to enumerate");
        }
        FiniteGroup { moduli, strides, order }
    }

    /// Panics on infinite groups.
    pub fn new(g: &AbGroup) -> Self {
        assert!(g.is_finite(), "cannot enumerate an infinite group");
        Self::from_moduli(g.factors.iter().map(|d| d.to_u64().expect("factor fits in u64")).collect())
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ngens(&self) -> usize {
        self.moduli.len()
    }

    pub fn coords(&self, x: usize) -> Vec<u64> {
        self.moduli.iter().zip(&self.strides).map(|(&m, &s)| ((x / s) as u64) % m).collect()
    }

    /// Index of the element with the given coordinates (reduced first).
    pub fn index<T: Copy + Into<i128>>(&self, c: &[T]) -> usize {
        assert_eq!(c.len(), self.moduli.len());
        c.iter()
            .zip(&self.moduli)
            .zip(&self.strides)
            .map(|((&x, &m), &s)| (x.into().rem_euclid(m as i128) as usize) * s)
            .sum()
    }

    pub fn index_big(&self, c: &[BigInt]) -> usize {
        let small: Vec<i128> = c
            .iter()
            .zip(&self.moduli)
            .map(|(x, &m)| x.mod_floor(&BigInt::from(m)).to_i128().unwrap())
            .collect();
        self.index(&small)
    }

    pub fn generator(&self, i: usize) -> usize {
        if self.moduli[i] == 1 {
            0
        } else {
            self.strides[i]
        }
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let m = m as usize;
            out += (((a / s) % m + (b / s) % m) % m) * s;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let mut out = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let m = m as usize;
            out += ((m - (a / s) % m) % m) * s;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn scale(&self, a: usize, k: i64) -> usize {
        let c: Vec<i128> = self.coords(a).iter().map(|&x| x as i128 * k as i128).collect();
        self.index(&c)
    }

    pub fn order_of(&self, a: usize) -> u64 {
        self.coords(a)
            .iter()
            .zip(&self.moduli)
            .map(|(&x, &m)| m / x.gcd(&m))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut out = vec![0];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for &g in gens {
                let y = self.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Image of every element under the homomorphism sending generator `i`
    /// to `images[i]` in `target`.
    pub fn hom_table(&self, target: &FiniteGroup, images: &[usize]) -> Vec<usize> {
        assert_eq!(images.len(), self.ngens());
        let mut table = vec![0usize; self.order];
        for x in 1..self.order {
            // x = prev + e_i for its lowest nonzero coordinate i.
            let i = (0..self.ngens())
                .find(|&i| !(x / self.strides[i]).is_multiple_of(self.moduli[i] as usize))
                .unwrap();
            let prev = x - self.strides[i];
            table[x] = target.add(table[prev], images[i]);
        }
        table
    }

    /// Elements of the kernel of a homomorphism given by its table.
    pub fn kernel(table: &[usize]) -> Vec<usize> {
        table.iter().enumerate().filter(|(_, &y)| y == 0).map(|(x, _)| x).collect()
    }

    /// Invariant factors of a subgroup given by its element list.
    pub fn subgroup_structure(&self, elems: &[usize]) -> AbGroup {
        let mut gens: Vec<usize> = Vec::new();
        let mut span = vec![0usize];
        for &e in elems {
            if span.binary_search(&e).is_err() {
                gens.push(e);
                span = self.subgroup(&gens);
            }
        }
        if gens.is_empty() {
            return AbGroup::trivial();
        }
        super::discover::ab_discover(span.len() as u64, 0usize, |a: &usize, b: &usize| self.add(*a, *b), &gens)
            .expect("generators span their own subgroup")
            .group()
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn normalization() {
        let g = AbGroup::from_factors(ints(&[2, 3, 0, 1, 4]));
        assert_eq!(g.invariant_factors(), &ints(&[2, 12, 0])[..]);
        assert_eq!(g.rank(), 1);
        assert_eq!(g.order(), None);
        assert_eq!(g.torsion_exponent(), BigInt::from(12));
        assert_eq!(g.to_string(), "Z/2 + Z/12 + Z");
        assert!(AbGroup::from_factors(ints(&[1, 1])).is_trivial());
        assert_eq!(AbGroup::trivial().to_string(), "0");
    }

    #[test]
    fn finite_group_arithmetic() {
        let g = FiniteGroup::from_moduli(vec![2, 6]);
        assert_eq!(g.order(), 12);
        for a in 0..12 {
            assert_eq!(g.index(&g.coords(a).iter().map(|&x| x as i64).collect::<Vec<_>>()), a);
            assert_eq!(g.add(a, g.neg(a)), 0);
            assert_eq!(g.scale(a, g.order_of(a) as i64), 0);
        }
        assert_eq!(g.subgroup(&[g.generator(1)]).len(), 6);
        let sub = g.subgroup(&[g.scale(g.generator(1), 3), g.generator(0)]);
        assert_eq!(g.subgroup_structure(&sub), AbGroup::from_factors(ints(&[2, 2])));
    }

    #[test]
    fn hom_tables() {
        let g = FiniteGroup::from_moduli(vec![2, 6]);
        let h = FiniteGroup::from_moduli(vec![3]);
        // (a, b) -> b mod 3
        let t = g.hom_table(&h, &[0, 1]);
        for x in 0..g.order() {
            assert_eq!(t[x] as u64, g.coords(x)[1] % 3);
        }
        assert_eq!(FiniteGroup::kernel(&t).len(), 4);
    }

    #[test]
    fn hom_well_definedness() {
        let z2 = AbGroup::cyclic(2);
        let z4 = AbGroup::cyclic(4);
        assert!(AbHom::new(z2.clone(), z4.clone(), IntMatrix::from_rows(1, &[vec![2]])).is_ok());
        assert_eq!(
            AbHom::new(z2, z4, IntMatrix::from_rows(1, &[vec![1]])),
            Err(LinalgError::NotWellDefined)
        );
    }
}

//! Structure of a finite abelian group known only through a multiplication
//! oracle and a set of generators.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::abgroup::{AbGroup, FiniteGroup};
use super::matrix::IntMatrix;
use super::snf::snf;
use super::LinalgError;

/// Result of [`ab_discover`]: the group structure, every element, and its
/// coordinates in the basis of the invariant-factor decomposition.
#[derive(Clone, Debug)]
pub struct Discovered<T> {
    group: AbGroup,
    finite: FiniteGroup,
    elements: Vec<T>,
    position: HashMap<T, usize>,
    /// Finite-group index of each element in `elements`.
    index_of: Vec<usize>,
    /// Inverse of `index_of`.
    element_at: Vec<usize>,
    basis: Vec<T>,
}

impl<T: Clone + Eq + Hash> Discovered<T> {
    pub fn group(&self) -> &AbGroup {
        &self.group
    }

    /// The group with elements numbered by their coordinates.
    pub fn finite_group(&self) -> &FiniteGroup {
        &self.finite
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Coordinates of `x` in the returned basis, or `None` if `x` was never reached.
    pub fn dlog(&self, x: &T) -> Option<Vec<u64>> {
        self.dlog_index(x).map(|i| self.finite.coords(i))
    }

    /// Index of `x` in [`Self::finite_group`].
    pub fn dlog_index(&self, x: &T) -> Option<usize> {
        self.position.get(x).map(|&p| self.index_of[p])
    }

    pub fn element(&self, index: usize) -> &T {
        &self.elements[self.element_at[index]]
    }

    /// Elements mapping to the unit coordinate vectors.
    pub fn basis(&self) -> &[T] {
        &self.basis
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }
}

/// Enumerates the group as a tower of cosets: for each generator `g_j`, the
/// least `e_j` with `g_j^e_j` in the span of the earlier generators gives a
/// relation `e_j x_j = (word of g_j^e_j)`. These `k` relations form a
/// triangular basis of the full relation lattice.
///
/// Fails with `GeneratorsInsufficient` when the generated subgroup does not
/// have exactly `order` elements.
pub fn ab_discover<T, F>(order: u64, identity: T, mul: F, gens: &[T]) -> Result<Discovered<T>, LinalgError>
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    let k = gens.len();
    let mut elements = vec![identity.clone()];
    let mut position = HashMap::from([(identity, 0usize)]);
    let mut words: Vec<Vec<u64>> = vec![vec![0; k]];
    let mut relations: Vec<Vec<BigInt>> = Vec::with_capacity(k);

    for (j, g) in gens.iter().enumerate() {
        let cur = elements.len();
        let mut p = g.clone();
        let mut e = 1u64;
        while !position.contains_key(&p) {
            e += 1;
            if cur as u64 * e > order {
                return Err(LinalgError::GeneratorsInsufficient { found: cur as u64 * e, expected: order });
            }
            p = mul(&p, g);
        }
        let mut rel: Vec<BigInt> = words[position[&p]].iter().map(|&x| -BigInt::from(x)).collect();
        rel[j] += e;
        relations.push(rel);
        let mut q = g.clone();
        for t in 1..e {
            for x in 0..cur {
                let y = mul(&elements[x], &q);
                let mut w = words[x].clone();
                w[j] = t;
                position.insert(y.clone(), elements.len());
                elements.push(y);
                words.push(w);
            }
            q = mul(&q, g);
        }
    }
    if elements.len() as u64 != order || position.len() != elements.len() {
        return Err(LinalgError::GeneratorsInsufficient { found: position.len() as u64, expected: order });
    }

    let hm = IntMatrix::from_rows(k, &relations);
    let s = snf(&hm);
    let keep: Vec<usize> = (0..k).filter(|&i| !s.diag[i].is_one()).collect();
    let moduli: Vec<u64> = keep.iter().map(|&i| s.diag[i].to_u64().expect("factor fits")).collect();
    let finite = FiniteGroup::from_moduli(moduli.clone());
    // Column i of R, reduced mod d_i.
    let r: Vec<Vec<i128>> = keep
        .iter()
        .zip(&moduli)
        .map(|(&i, &d)| {
            (0..k).map(|j| s.right.get(j, i).mod_floor(&BigInt::from(d)).to_i128().unwrap()).collect()
        })
        .collect();
    let index_of: Vec<usize> = words
        .iter()
        .map(|w| {
            let c: Vec<i128> = r
                .iter()
                .zip(&moduli)
                .map(|(col, &d)| w.iter().zip(col).map(|(&a, &b)| (a as i128 * b) % d as i128).sum::<i128>())
                .collect();
            finite.index(&c)
        })
        .collect();
    let mut element_at = vec![usize::MAX; elements.len()];
    for (p, &i) in index_of.iter().enumerate() {
        assert_eq!(element_at[i], usize::MAX, "discrete logarithm is not injective");
        element_at[i] = p;
    }
    let basis = (0..finite.ngens()).map(|i| elements[element_at[finite.generator(i)]].clone()).collect();
    Ok(Discovered {
        group: AbGroup::from_factors(moduli.iter().map(|&d| BigInt::from(d))),
        finite,
        elements,
        position,
        index_of,
        element_at,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zmod(n: u64) -> impl Fn(&u64, &u64) -> u64 {
        move |a, b| (a + b) % n
    }

    #[test]
    fn trivial_group() {
        let d = ab_discover(1, 0u64, zmod(1), &[]).unwrap();
        assert!(d.group().is_trivial());
        assert_eq!(d.dlog(&0), Some(vec![]));
    }

    #[test]
    fn cyclic_six() {
        let d = ab_discover(6, 0u64, zmod(6), &[1]).unwrap();
        assert_eq!(d.group(), &AbGroup::cyclic(6));
    }

    #[test]
    fn klein_four() {
        // (Z/2)^2 as bit vectors under xor.
        let d = ab_discover(4, 0u8, |a: &u8, b: &u8| a ^ b, &[1, 2]).unwrap();
        assert_eq!(d.group(), &AbGroup::from_factors([BigInt::from(2), BigInt::from(2)]));
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        // (Z/15)^x has structure Z/2 + Z/4.
        let mulm = |a: &u64, b: &u64| a * b % 15;
        let d = ab_discover(8, 1u64, mulm, &[2, 14, 7]).unwrap();
        assert_eq!(d.group(), &AbGroup::from_factors([BigInt::from(2), BigInt::from(4)]));
        let g = d.finite_group();
        for &a in d.elements() {
            for &b in d.elements() {
                let lhs = d.dlog_index(&mulm(&a, &b)).unwrap();
                assert_eq!(lhs, g.add(d.dlog_index(&a).unwrap(), d.dlog_index(&b).unwrap()));
            }
        }
        for (i, b) in d.basis().iter().enumerate() {
            assert_eq!(d.dlog_index(b), Some(g.generator(i)));
        }
    }

    #[test]
    fn insufficient_generators() {
        let err = ab_discover(12, 0u64, zmod(12), &[4]).unwrap_err();
        assert!(matches!(err, LinalgError::GeneratorsInsufficient { expected: 12, .. }));
    }
}

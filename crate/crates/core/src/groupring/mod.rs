//! Group rings `Z[G]` and `Q[G]` of finite abelian groups: traces, averaged
//! Frobenius elements, Iwasawa elements and inertia-trace ideals.

mod trace;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rayclass::RayError;
use crate::zlinalg::FiniteGroup;

pub use trace::{coset_rows, gal_h_quotient_torsion, quotient_on_subgroup, trace_ideal_quotient, TraceQuotient};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupRingError {
    #[error(transparent)]
    Ray(#[from] RayError),
    #[error("modulus {0} is not coprime to w_K = {1}")]
    NotCoprimeToW(String, u32),
}

/// An element `Σ (num_σ / den) σ` of `Q[G]`, dense over the indices of a
/// [`FiniteGroup`]; kept with `den > 0` and `gcd(num, den) = 1`.
#[derive(Clone, Debug)]
pub struct GroupRingElt {
    num: Vec<BigInt>,
    den: BigInt,
}

impl GroupRingElt {
    pub fn zero(order: usize) -> Self {
        GroupRingElt { num: vec![BigInt::zero(); order], den: BigInt::one() }
    }

    pub fn basis(order: usize, g: usize) -> Self {
        let mut e = Self::zero(order);
        e.num[g] = BigInt::one();
        e
    }

    pub fn one(order: usize) -> Self {
        Self::basis(order, 0)
    }

    /// `s(X) = Σ_{σ ∈ X} σ`.
    pub fn trace(order: usize, elems: &[usize]) -> Self {
        let mut e = Self::zero(order);
        for &g in elems {
            e.num[g] += 1;
        }
        e
    }

    pub fn from_integers(num: Vec<BigInt>) -> Self {
        GroupRingElt { num, den: BigInt::one() }
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    /// Sum of the coefficients, as `(num, den)`.
    pub fn augmentation(&self) -> (BigInt, BigInt) {
        (self.num.iter().sum(), self.den.clone())
    }

    fn normalized(mut self) -> Self {
        let g = self.num.iter().fold(self.den.clone(), |g, x| g.gcd(x));
        if !g.is_one() && !g.is_zero() {
            for x in &mut self.num {
                *x /= &g;
            }
            self.den /= &g;
        }
        if self.den.is_negative() {
            self.den = -self.den;
            for x in &mut self.num {
                *x = -&*x;
            }
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.iter().zip(&other.num).map(|(a, b)| a * &other.den + b * &self.den).collect();
        GroupRingElt { num, den: &self.den * &other.den }.normalized()
    }

    pub fn neg(&self) -> Self {
        GroupRingElt { num: self.num.iter().map(|a| -a).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        GroupRingElt { num: self.num.iter().map(|a| a * k).collect(), den: self.den.clone() }.normalized()
    }

    pub fn div(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        GroupRingElt { num: self.num.clone(), den: &self.den * k }.normalized()
    }

    pub fn mul(&self, other: &Self, g: &FiniteGroup) -> Self {
        let mut out = vec![BigInt::zero(); self.num.len()];
        let rhs: Vec<(usize, &BigInt)> = other.num.iter().enumerate().filter(|(_, b)| !b.is_zero()).collect();
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &rhs {
                out[g.add(i, j)] += a * b;
            }
        }
        GroupRingElt { num: out, den: &self.den * &other.den }.normalized()
    }

    /// `σ · self`.
    pub fn translate(&self, sigma: usize, g: &FiniteGroup) -> Self {
        let mut out = vec![BigInt::zero(); self.num.len()];
        for (i, a) in self.num.iter().enumerate() {
            if !a.is_zero() {
                out[g.add(i, sigma)] = a.clone();
            }
        }
        GroupRingElt { num: out, den: self.den.clone() }
    }

    /// Push-forward along a group homomorphism given by its table.
    pub fn push(&self, table: &[usize], target_order: usize) -> Self {
        let mut out = vec![BigInt::zero(); target_order];
        for (i, a) in self.num.iter().enumerate() {
            out[table[i]] += a;
        }
        GroupRingElt { num: out, den: self.den.clone() }.normalized()
    }

    /// Integer coefficients of `scale · self`; panics unless `den | scale`.
    pub fn scaled_coeffs(&self, scale: &BigInt) -> Vec<BigInt> {
        let (q, r) = scale.div_rem(&self.den);
        assert!(r.is_zero(), "scale is not a multiple of the denominator");
        self.num.iter().map(|a| a * &q).collect()
    }
}

impl PartialEq for GroupRingElt {
    fn eq(&self, other: &Self) -> bool {
        self.num.len() == other.num.len()
            && self.num.iter().zip(&other.num).all(|(a, b)| a * &other.den == b * &self.den)
    }
}

impl Eq for GroupRingElt {}

impl fmt::Display for GroupRingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.num.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| format!("{a}·g{i}")).collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.den.is_one() {
            f.write_str(&body)
        } else {
            write!(f, "({body})/{}", self.den)
        }
    }
}

/// `p* = λ^{-1} s(T) / #T` in `Q[G]`.
pub fn p_star(g: &FiniteGroup, inertia: &[usize], frob: usize) -> GroupRingElt {
    GroupRingElt::trace(g.order(), inertia).translate(g.neg(frob), g).div(&BigInt::from(inertia.len()))
}

/// `α(n, n′) = s(ker(G_{n′} → G_n)) Π (1 - p*)`, given the kernel and the
/// averaged Frobenius elements of the primes dividing `n`, all in `G_{n′}`.
pub fn alpha(g: &FiniteGroup, kernel: &[usize], pstars: &[GroupRingElt]) -> GroupRingElt {
    let one = GroupRingElt::one(g.order());
    pstars.iter().fold(GroupRingElt::trace(g.order(), kernel), |acc, ps| acc.mul(&one.sub(ps), g))
}

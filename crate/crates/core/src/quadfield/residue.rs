use std::collections::HashSet;

use crate::zlinalg::{ab_discover, AbGroup, Discovered, FiniteGroup};

use super::ideal::mul_wide;
use super::{Elt, Modulus, OIdeal, QuadError, QuadField};

/// Largest modulus norm for which residues are enumerated.
pub const RESIDUE_BOUND: u64 = 1_000_000;

/// The unit group `(O_K/n)^×` with discrete logarithms and the image of the
/// roots of unity.
#[derive(Clone, Debug)]
pub struct ResidueUnits {
    disc: i64,
    modulus: OIdeal,
    primes: Vec<OIdeal>,
    units: Discovered<Elt>,
    mu_generator: usize,
    mu_image: Vec<usize>,
}

impl ResidueUnits {
    pub fn new(k: &QuadField, n: &Modulus, bound: u64) -> Result<Self, QuadError> {
        let norm = n.norm();
        if norm > bound {
            return Err(QuadError::ModulusTooLarge { norm, bound });
        }
        let disc = k.disc();
        let modulus = n.ideal();
        let primes: Vec<OIdeal> = n.primes().iter().map(|p| *p.ideal()).collect();
        let (n1, _, c) = modulus.hermite();
        let is_unit = |e: Elt| primes.iter().all(|p| !p.contains(e));
        let mut units = Vec::new();
        for y in 0..c {
            for x in 0..n1 {
                let e = Elt::new(x, y);
                if is_unit(e) {
                    units.push(e);
                }
            }
        }
        let expected: u64 = n.primes().iter().zip(n.exponents()).map(|(p, &e)| p.norm().pow(e - 1) * (p.norm() - 1)).product();
        assert_eq!(units.len() as u64, expected, "unit count disagrees with the prime-power formula");

        let mul = |a: &Elt, b: &Elt| {
            let (x, y) = mul_wide(disc, (a.x as i128, a.y as i128), (b.x as i128, b.y as i128));
            modulus.reduce_wide(x, y)
        };
        let one = modulus.reduce(Elt::ONE);
        let mut reached = HashSet::from([one]);
        let mut gens = Vec::new();
        for u in &units {
            if reached.len() == units.len() {
                break;
            }
            if reached.contains(u) {
                continue;
            }
            gens.push(*u);
            let base: Vec<Elt> = reached.iter().copied().collect();
            let mut p = *u;
            while !reached.contains(&p) {
                for x in &base {
                    reached.insert(mul(x, &p));
                }
                p = mul(&p, u);
            }
        }
        let units = ab_discover(expected, one, mul, &gens).expect("greedy generators span the unit group");
        let zeta = modulus.reduce(k.root_of_unity());
        let mu_generator = units.dlog_index(&zeta).expect("roots of unity are units");
        let mu_image = units.finite_group().subgroup(&[mu_generator]);
        Ok(ResidueUnits { disc, modulus, primes, units, mu_generator, mu_image })
    }

    pub fn group(&self) -> &AbGroup {
        self.units.group()
    }

    pub fn finite_group(&self) -> &FiniteGroup {
        self.units.finite_group()
    }

    pub fn order(&self) -> usize {
        self.units.order()
    }

    pub fn modulus(&self) -> &OIdeal {
        &self.modulus
    }

    pub fn reduce(&self, e: Elt) -> Elt {
        self.modulus.reduce(e)
    }

    pub fn is_unit(&self, e: Elt) -> bool {
        self.primes.iter().all(|p| !p.contains(e))
    }

    /// Index of `e mod n` in [`Self::finite_group`].
    pub fn dlog(&self, e: Elt) -> Result<usize, QuadError> {
        if !self.is_unit(e) {
            return Err(QuadError::NotCoprime);
        }
        Ok(self.units.dlog_index(&self.reduce(e)).expect("coprime residues are enumerated"))
    }

    /// Residue representative of the group element with the given index.
    pub fn element(&self, index: usize) -> Elt {
        *self.units.element(index)
    }

    /// Image of a generator of the roots of unity.
    pub fn mu_generator(&self) -> usize {
        self.mu_generator
    }

    /// The subgroup generated by the roots of unity, sorted.
    pub fn mu_image(&self) -> &[usize] {
        &self.mu_image
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units(d: u64, spec: &str) -> ResidueUnits {
        let k = QuadField::new(d).unwrap();
        k.residue_units(&Modulus::parse(&k, spec).unwrap()).unwrap()
    }

    #[test]
    fn prime_residue_fields() {
        assert_eq!(units(7, "p:7").group(), &AbGroup::cyclic(6));
        assert_eq!(units(7, "p:11:0").group(), &AbGroup::cyclic(10));
        assert_eq!(units(7, "q:3").group(), &AbGroup::cyclic(8));
        assert!(units(7, "1").group().is_trivial());
    }

    #[test]
    fn orders_multiply_over_coprime_factors() {
        let u = units(7, "p:7,p:11:0,p:23:0");
        assert_eq!(u.order(), 6 * 10 * 22);
        let u = units(7, "p:11:0^2,q:3");
        assert_eq!(u.order(), 110 * 8);
    }

    #[test]
    fn dlog_is_multiplicative() {
        let u = units(23, "p:3:0^2,p:2:1");
        let g = u.finite_group();
        let disc = u.disc();
        let samples: Vec<Elt> = (0..40).map(|t| Elt::new(t * 7 + 1, t % 5)).filter(|&e| u.is_unit(e)).collect();
        for &a in &samples {
            for &b in &samples {
                let ab = super::super::elt_mul(disc, a, b);
                assert_eq!(u.dlog(ab).unwrap(), g.add(u.dlog(a).unwrap(), u.dlog(b).unwrap()));
            }
        }
        assert_eq!(u.dlog(Elt::int(3)), Err(QuadError::NotCoprime));
    }

    #[test]
    fn mu_image_is_injective() {
        for (d, spec, w) in [(7u64, "p:11:0", 2usize), (3, "p:7:0", 6), (1, "p:5:1,p:13:0", 4), (7, "p:23:0", 2)] {
            assert_eq!(units(d, spec).mu_image().len(), w, "d = {d}, n = {spec}");
        }
    }

    #[test]
    fn too_large() {
        let k = QuadField::new(7).unwrap();
        let n = Modulus::parse(&k, "p:11:0").unwrap();
        assert_eq!(ResidueUnits::new(&k, &n, 10).unwrap_err(), QuadError::ModulusTooLarge { norm: 11, bound: 10 });
    }
}

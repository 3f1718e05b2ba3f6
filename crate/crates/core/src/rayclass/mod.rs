//! Ray class groups `G_n ≅ Cl_n` of an imaginary quadratic field, with the
//! Artin map, inertia subgroups, Frobenius elements and transition maps.

mod galois;

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::quadfield::{Elt, Modulus, OIdeal, PrimeIdeal, QuadError, QuadField, ResidueUnits};
use crate::zlinalg::{snf, AbGroup, AbHom, FiniteGroup, IntMatrix, LinalgError};

pub use galois::GaloisOverH;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RayError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{0} does not divide {1}")]
    NotDivisor(String, String),
    #[error("prime {0} does not divide the modulus")]
    PrimeNotInModulus(String),
    #[error("Sylow frame unavailable: {0}")]
    FrameUnavailable(String),
}

/// Builds the table of a homomorphism from the images of a generating set,
/// walking the Cayley graph. Panics if the assignment is not a homomorphism.
pub fn extend_hom(src: &FiniteGroup, src_gens: &[usize], tgt: &FiniteGroup, tgt_imgs: &[usize]) -> Vec<usize> {
    let mut table = vec![usize::MAX; src.order()];
    table[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&g, &img) in src_gens.iter().zip(tgt_imgs) {
            let y = src.add(x, g);
            let v = tgt.add(table[x], img);
            if table[y] == usize::MAX {
                table[y] = v;
                queue.push_back(y);
            } else {
                assert_eq!(table[y], v, "generator images do not define a homomorphism");
            }
        }
    }
    assert!(table.iter().all(|&v| v != usize::MAX), "generators do not span the source group");
    table
}

/// Frobenius data of a prime: `exact` is false when the prime divides the
/// modulus and `rep` only represents a coset of the inertia subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frobenius {
    pub rep: usize,
    pub exact: bool,
}

/// `Cl_n` presented by generators of `(O/n)^×` and class-group generator
/// primes, with the extension glued by actual principal generators.
#[derive(Clone, Debug)]
pub struct RayClassGroup {
    field: QuadField,
    modulus: Modulus,
    modulus_ideal: OIdeal,
    units: ResidueUnits,
    class_gens: Vec<PrimeIdeal>,
    /// Word in `class_gens` for each class (indexed as in the field's class group).
    class_words: Vec<Vec<u64>>,
    relations: IntMatrix,
    group: AbGroup,
    finite: FiniteGroup,
    /// Images in `finite` of the presentation generators: unit basis first, then `class_gens`.
    gen_images: Vec<usize>,
}

/// Smallest-norm primes with residue characteristic prime to `avoid`, chosen
/// greedily until their classes span the class group; with the coset-tower
/// words of every class.
fn class_generators(k: &QuadField, avoid: u64) -> (Vec<PrimeIdeal>, Vec<u64>, Vec<Vec<u64>>) {
    let cg = k.classes().finite_group();
    let h = cg.order();
    let mut words: Vec<Option<Vec<u64>>> = vec![None; h];
    words[0] = Some(vec![]);
    let mut span = vec![0usize];
    let (mut gens, mut exps) = (Vec::new(), Vec::new());
    let mut bound = 64;
    while span.len() < h {
        for q in k.primes_up_to(bound) {
            if span.len() == h {
                break;
            }
            if avoid.is_multiple_of(q.p()) {
                continue;
            }
            let x = k.class_index(q.ideal());
            if words[x].is_some() {
                continue;
            }
            let mut e = 1u64;
            let mut p = x;
            while words[p].is_none() {
                e += 1;
                p = cg.add(p, x);
            }
            let cur = span.clone();
            let mut step = x;
            for t in 1..e {
                for &y in &cur {
                    let z = cg.add(y, step);
                    let mut w = words[y].clone().unwrap();
                    w.resize(gens.len(), 0);
                    w.push(t);
                    words[z] = Some(w);
                    span.push(z);
                }
                step = cg.add(step, x);
            }
            gens.push(q);
            exps.push(e);
        }
        bound *= 2;
    }
    let n = gens.len();
    let words = words
        .into_iter()
        .map(|w| {
            let mut w = w.expect("class reached");
            w.resize(n, 0);
            w
        })
        .collect();
    (gens, exps, words)
}

impl RayClassGroup {
    pub fn new(k: &QuadField, n: &Modulus) -> Result<Self, RayError> {
        let units = k.residue_units(n)?;
        let modulus_ideal = n.ideal();
        let (class_gens, class_exps, class_words) = class_generators(k, n.norm());
        let ku = units.finite_group().ngens();
        let t = class_gens.len();
        let ncols = ku + t;
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for (i, &d) in units.finite_group().moduli().iter().enumerate() {
            let mut r = vec![BigInt::from(0); ncols];
            r[i] = BigInt::from(d);
            rows.push(r);
        }
        let unit_coords = |idx: usize| -> Vec<BigInt> {
            units.finite_group().coords(idx).into_iter().map(BigInt::from).collect()
        };
        let mut mu = unit_coords(units.mu_generator());
        mu.resize(ncols, BigInt::from(0));
        rows.push(mu);
        // q_j^{e_j} Π_{i<j} q_i^{-w_i} = (β / Π N(q_i)^{w_i}) with β generating q_j^{e_j} Π q̄_i^{w_i}.
        let cg = k.classes().finite_group();
        for j in 0..t {
            let x = k.class_index(class_gens[j].ideal());
            let target = cg.scale(x, class_exps[j] as i64);
            let w = &class_words[target];
            let mut ideal = class_gens[j].ideal().pow(class_exps[j] as u32);
            let mut nrm = 1i64;
            for i in 0..j {
                ideal = ideal.multiply(&class_gens[i].ideal().conjugate().pow(w[i] as u32))?;
                nrm *= (class_gens[i].norm() as i64).pow(w[i] as u32);
            }
            let beta = k.is_principal(&ideal).expect("class relation gives a principal ideal");
            let fg = units.finite_group();
            let u = fg.sub(units.dlog(beta)?, units.dlog(Elt::int(nrm))?);
            let mut r: Vec<BigInt> = unit_coords(u).into_iter().map(|c| -c).collect();
            r.resize(ncols, BigInt::from(0));
            r[ku + j] += BigInt::from(class_exps[j]);
            for i in 0..j {
                r[ku + i] -= BigInt::from(w[i]);
            }
            rows.push(r);
        }
        let relations = IntMatrix::from_rows(ncols, &rows);
        let s = snf(&relations);
        let keep: Vec<usize> = (0..ncols).filter(|&i| !s.diag[i].is_one()).collect();
        let moduli: Vec<u64> = keep
            .iter()
            .map(|&i| s.diag[i].to_u64().filter(|&d| d > 0).expect("ray class group is finite"))
            .collect();
        let finite = FiniteGroup::from_moduli(moduli.clone());
        let gen_images: Vec<usize> = (0..ncols)
            .map(|j| {
                let c: Vec<BigInt> =
                    keep.iter().zip(&moduli).map(|(&i, &d)| s.right.get(j, i).mod_floor(&BigInt::from(d))).collect();
                finite.index_big(&c)
            })
            .collect();
        let group = AbGroup::from_factors(moduli.iter().map(|&d| BigInt::from(d)));
        let expected = if n.is_unit() {
            k.h() as usize
        } else {
            k.h() as usize * units.order() / units.mu_image().len()
        };
        assert_eq!(finite.order(), expected, "ray class group order disagrees with the exact sequence");
        Ok(RayClassGroup {
            field: k.clone(),
            modulus: n.clone(),
            modulus_ideal,
            units,
            class_gens,
            class_words,
            relations,
            group,
            finite,
            gen_images,
        })
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn group(&self) -> &AbGroup {
        &self.group
    }

    /// The group with elements numbered `0..order`, `0` the identity.
    pub fn finite_group(&self) -> &FiniteGroup {
        &self.finite
    }

    pub fn order(&self) -> usize {
        self.finite.order()
    }

    pub fn units(&self) -> &ResidueUnits {
        &self.units
    }

    pub fn class_generators(&self) -> &[PrimeIdeal] {
        &self.class_gens
    }

    /// Relation matrix of the presentation on (unit basis, class generators).
    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    fn unit_image(&self, u: usize) -> usize {
        let fg = &self.finite;
        self.units
            .finite_group()
            .coords(u)
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| fg.add(acc, fg.scale(self.gen_images[i], c as i64)))
    }

    /// Artin image of the principal ideal `(α)`, `α` prime to the modulus.
    pub fn artin_elt(&self, alpha: Elt) -> Result<usize, RayError> {
        Ok(self.unit_image(self.units.dlog(alpha)?))
    }

    /// Artin image of an ideal prime to the modulus.
    pub fn artin(&self, a: &OIdeal) -> Result<usize, RayError> {
        if !a.is_coprime(&self.modulus_ideal)? {
            return Err(QuadError::NotCoprime.into());
        }
        let k = &self.field;
        let c = &self.class_words[k.class_index(a)];
        let mut ideal = *a;
        let mut nrm = 1i64;
        for (q, &cj) in self.class_gens.iter().zip(c) {
            ideal = ideal.multiply(&q.ideal().conjugate().pow(cj as u32))?;
            nrm *= (q.norm() as i64).pow(cj as u32);
        }
        let beta = k.is_principal(&ideal).expect("ideal times inverse class word is principal");
        let ufg = self.units.finite_group();
        let u = ufg.sub(self.units.dlog(beta)?, self.units.dlog(Elt::int(nrm))?);
        let ku = ufg.ngens();
        let fg = &self.finite;
        Ok(c.iter().enumerate().fold(self.unit_image(u), |acc, (j, &cj)| {
            fg.add(acc, fg.scale(self.gen_images[ku + j], cj as i64))
        }))
    }

    /// Table of the transition surjection `G_self → G_target`.
    pub fn transition(&self, target: &RayClassGroup) -> Result<Vec<usize>, RayError> {
        if !target.modulus.divides(&self.modulus) || target.field.disc() != self.field.disc() {
            return Err(RayError::NotDivisor(target.modulus.spec(), self.modulus.spec()));
        }
        let ufg = self.units.finite_group();
        let mut imgs = Vec::with_capacity(self.gen_images.len());
        for i in 0..ufg.ngens() {
            imgs.push(target.artin_elt(self.units.element(ufg.generator(i)))?);
        }
        for q in &self.class_gens {
            imgs.push(target.artin(q.ideal())?);
        }
        Ok(extend_hom(&self.finite, &self.gen_images, &target.finite, &imgs))
    }

    /// The transition as a homomorphism of invariant-factor groups.
    pub fn transition_hom(&self, target: &RayClassGroup) -> Result<AbHom, RayError> {
        let table = self.transition(target)?;
        let rows: Vec<Vec<BigInt>> = (0..self.finite.ngens())
            .map(|i| target.finite.coords(table[self.finite.generator(i)]).into_iter().map(BigInt::from).collect())
            .collect();
        let m = IntMatrix::from_rows(target.finite.ngens(), &rows);
        Ok(AbHom::new(self.group.clone(), target.group.clone(), m)?)
    }

    /// Kernel of the transition to `n / p^{v_p(n)}`, given that group.
    pub fn inertia_in(&self, p: &PrimeIdeal, lower: &RayClassGroup) -> Result<Vec<usize>, RayError> {
        if self.modulus.valuation(p) == 0 {
            return Err(RayError::PrimeNotInModulus(p.label()));
        }
        if lower.modulus != self.modulus.without(p) {
            return Err(RayError::NotDivisor(lower.modulus.spec(), self.modulus.without(p).spec()));
        }
        Ok(FiniteGroup::kernel(&self.transition(lower)?))
    }

    /// The inertia subgroup `T_p(n)`, sorted.
    pub fn inertia(&self, p: &PrimeIdeal) -> Result<Vec<usize>, RayError> {
        if self.modulus.valuation(p) == 0 {
            return Err(RayError::PrimeNotInModulus(p.label()));
        }
        let lower = RayClassGroup::new(&self.field, &self.modulus.without(p))?;
        self.inertia_in(p, &lower)
    }

    /// Frobenius of `p`; for `p | n` a lift of the Frobenius of `G_{n/p^v}`,
    /// given that group.
    pub fn frobenius_in(&self, p: &PrimeIdeal, lower: Option<&RayClassGroup>) -> Result<Frobenius, RayError> {
        if self.modulus.valuation(p) == 0 {
            return Ok(Frobenius { rep: self.artin(p.ideal())?, exact: true });
        }
        let owned;
        let lower = match lower {
            Some(l) => l,
            None => {
                owned = RayClassGroup::new(&self.field, &self.modulus.without(p))?;
                &owned
            }
        };
        let image = lower.artin(p.ideal())?;
        let table = self.transition(lower)?;
        let rep = table.iter().position(|&v| v == image).expect("transition is surjective");
        Ok(Frobenius { rep, exact: false })
    }

    pub fn frobenius(&self, p: &PrimeIdeal) -> Result<Frobenius, RayError> {
        self.frobenius_in(p, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(d: u64, spec: &str) -> RayClassGroup {
        let k = QuadField::new(d).unwrap();
        RayClassGroup::new(&k, &Modulus::parse(&k, spec).unwrap()).unwrap()
    }

    #[test]
    fn orders() {
        assert!(ray(7, "1").group().is_trivial());
        assert_eq!(ray(7, "p:11:0").group(), &AbGroup::cyclic(5));
        assert_eq!(ray(7, "p:7").order(), 3);
        assert_eq!(ray(7, "p:7,p:11:0").order(), 30);
        assert_eq!(ray(7, "p:7,p:11:0,p:23:0").order(), 660);
        assert_eq!(ray(23, "1").group(), &AbGroup::cyclic(3));
        assert_eq!(ray(23, "p:2:0").order(), 3);
        assert_eq!(ray(23, "p:3:0^2").order(), 3 * 6 / 2);
    }

    #[test]
    fn transition_orders() {
        let g = ray(7, "p:7,p:11:0");
        let h = ray(7, "p:11:0");
        let t = g.transition(&h).unwrap();
        assert_eq!(FiniteGroup::kernel(&t).len(), 6);
        let id = g.transition(&g).unwrap();
        assert_eq!(id, (0..30).collect::<Vec<_>>());
        assert!(matches!(h.transition(&g), Err(RayError::NotDivisor(..))));
        let hom = g.transition_hom(&h).unwrap();
        assert_eq!(hom.codomain().order().unwrap(), BigInt::from(5));
    }

    #[test]
    fn transition_to_one_is_class_group() {
        let g = ray(23, "p:2:0,p:3:1");
        let one = ray(23, "1");
        let t = g.transition(&one).unwrap();
        let mut img = t.clone();
        img.sort();
        img.dedup();
        assert_eq!(img.len(), 3);
    }

    #[test]
    fn inertia_examples() {
        let k = QuadField::new(7).unwrap();
        let m = Modulus::parse(&k, "p:7,p:11:0,p:23:0").unwrap();
        let g = RayClassGroup::new(&k, &m).unwrap();
        let t7 = g.inertia(&m.primes()[0]).unwrap();
        assert_eq!(t7.len(), 6);
        assert_eq!(g.finite_group().subgroup_structure(&t7), AbGroup::cyclic(6));
        let g11 = ray(7, "p:11:0");
        assert_eq!(g11.inertia(&g11.modulus().primes()[0]).unwrap().len(), 5);
        let other = Modulus::parse(&k, "p:2:0").unwrap().primes()[0].clone();
        assert!(matches!(g11.inertia(&other), Err(RayError::PrimeNotInModulus(_))));
    }

    #[test]
    fn frobenius_examples() {
        let k = QuadField::new(7).unwrap();
        let g = ray(7, "p:7");
        let p11 = Modulus::parse(&k, "p:11:0").unwrap().primes()[0].clone();
        let f = g.frobenius(&p11).unwrap();
        assert!(f.exact);
        assert_eq!(f.rep, g.artin(p11.ideal()).unwrap());
        let g1 = ray(7, "1");
        assert_eq!(g1.frobenius(&p11).unwrap().rep, 0);
        let g11 = ray(7, "p:11:0");
        assert_eq!(g11.frobenius(&p11).unwrap(), Frobenius { rep: 0, exact: false });
    }

    #[test]
    fn artin_is_multiplicative() {
        for (d, spec) in [(23u64, "p:3:0,p:13:1"), (7, "p:7,p:11:0"), (5, "p:7:0,p:3:1"), (1, "p:5:0,p:13:1")] {
            let g = ray(d, spec);
            let k = g.field().clone();
            let norm = g.modulus().norm();
            let ps: Vec<PrimeIdeal> = k.primes_up_to(60).into_iter().filter(|p| !norm.is_multiple_of(p.p())).collect();
            let fg = g.finite_group();
            for a in &ps {
                for b in &ps {
                    let ab = a.ideal().multiply(b.ideal()).unwrap();
                    let lhs = g.artin(&ab).unwrap();
                    assert_eq!(lhs, fg.add(g.artin(a.ideal()).unwrap(), g.artin(b.ideal()).unwrap()), "d = {d}");
                }
            }
            // Artin is onto.
            let mut seen: Vec<usize> = Vec::new();
            for p in k.primes_up_to(2000).into_iter().filter(|p| !norm.is_multiple_of(p.p())) {
                seen.push(g.artin(p.ideal()).unwrap());
            }
            assert_eq!(fg.subgroup(&seen).len(), g.order(), "d = {d}");
        }
    }

    #[test]
    fn principal_ideals_have_unit_artin_image() {
        let g = ray(23, "p:3:0,p:2:1");
        let k = g.field().clone();
        for e in [Elt::new(5, 1), Elt::new(7, 2), Elt::new(11, -3)] {
            let i = OIdeal::principal(k.disc(), e);
            if i.is_coprime(&g.modulus().ideal()).unwrap() {
                assert_eq!(g.artin(&i).unwrap(), g.artin_elt(e).unwrap());
            }
        }
    }

    #[test]
    fn transition_is_functorial() {
        let k = QuadField::new(7).unwrap();
        let a = RayClassGroup::new(&k, &Modulus::parse(&k, "p:7,p:11:0,p:23:0").unwrap()).unwrap();
        let b = RayClassGroup::new(&k, &Modulus::parse(&k, "p:7,p:23:0").unwrap()).unwrap();
        let c = RayClassGroup::new(&k, &Modulus::parse(&k, "p:23:0").unwrap()).unwrap();
        let ab = a.transition(&b).unwrap();
        let bc = b.transition(&c).unwrap();
        let ac = a.transition(&c).unwrap();
        for x in 0..a.order() {
            assert_eq!(bc[ab[x]], ac[x]);
        }
    }

    #[test]
    fn inertia_generates_gamma() {
        let k = QuadField::new(23).unwrap();
        let m = Modulus::parse(&k, "p:3:0,p:13:1").unwrap();
        let g = RayClassGroup::new(&k, &m).unwrap();
        let one = RayClassGroup::new(&k, &Modulus::unit(k.disc())).unwrap();
        let gamma = FiniteGroup::kernel(&g.transition(&one).unwrap());
        let mut gens = Vec::new();
        for p in m.primes() {
            gens.extend(g.inertia(p).unwrap());
        }
        assert_eq!(g.finite_group().subgroup(&gens), gamma);
        for (p, &e) in m.primes().iter().zip(m.exponents()) {
            let local = Modulus::new(k.disc(), vec![(p.clone(), e)]).unwrap();
            let units = k.residue_units(&local).unwrap();
            let t = g.inertia(p).unwrap();
            assert_eq!(&g.finite_group().subgroup_structure(&t), units.group());
        }
    }
}

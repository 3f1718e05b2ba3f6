//! Arithmetic of an imaginary quadratic field `K = Q(√-d)`: ideals, prime
//! splitting, the class group via reduced binary quadratic forms, and the
//! unit groups of residue rings.

mod ideal;
mod modulus;
mod residue;

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::zlinalg::modular::is_prime_u64;
use crate::zlinalg::{ab_discover, AbGroup, Discovered};

pub use ideal::{elt_conj, elt_mul, elt_norm, Elt, OIdeal};
pub use modulus::{Modulus, PrimeIdeal, SplitKind};
pub use residue::{ResidueUnits, RESIDUE_BOUND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("{0} is not a rational prime")]
    NotPrime(u64),
    #[error("ideals belong to different fields")]
    FieldMismatch,
    #[error("modulus norm {norm} exceeds the enumeration bound {bound}")]
    ModulusTooLarge { norm: u64, bound: u64 },
    #[error("element or ideal is not coprime to the modulus")]
    NotCoprime,
    #[error("prime {0} appears twice in the modulus")]
    DuplicatePrime(String),
    #[error("bad ideal spec `{0}`: {1}")]
    BadSpec(String, String),
}

/// A primitive positive definite binary quadratic form `a x² + b x y + c y²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The form with given `a, b` and discriminant `disc`.
    pub fn with_disc(a: i64, b: i64, disc: i64) -> Form {
        Form { a, b, c: (b * b - disc) / (4 * a) }
    }

    /// The unique reduced form properly equivalent to `self`.
    pub fn reduced(self) -> Form {
        let d = self.disc();
        let Form { mut a, mut b, mut c } = self;
        loop {
            if !(-a < b && b <= a) {
                b += 2 * a * Integer::div_floor(&(a - b), &(2 * a));
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                (a, b, c) = (c, -b, a);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return Form { a, b, c };
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a && self.a <= self.c && (self.b >= 0 || (self.b.abs() != self.a && self.a != self.c))
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// How a rational prime decomposes in `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split(PrimeIdeal, PrimeIdeal),
    Inert(PrimeIdeal),
    Ramified(PrimeIdeal),
}

impl Splitting {
    pub fn kind(&self) -> SplitKind {
        match self {
            Splitting::Split(..) => SplitKind::Split,
            Splitting::Inert(_) => SplitKind::Inert,
            Splitting::Ramified(_) => SplitKind::Ramified,
        }
    }

    pub fn primes(&self) -> Vec<PrimeIdeal> {
        match self {
            Splitting::Split(a, b) => vec![a.clone(), b.clone()],
            Splitting::Inert(a) | Splitting::Ramified(a) => vec![a.clone()],
        }
    }
}

/// An imaginary quadratic field with its class group.
#[derive(Clone, Debug)]
pub struct QuadField {
    d: u64,
    disc: i64,
    w: u32,
    forms: Vec<Form>,
    classes: Discovered<Form>,
}

fn is_squarefree(d: u64) -> bool {
    let mut n = d;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// All reduced forms of discriminant `disc`, ordered by `(a, b)`.
pub fn reduced_forms(disc: i64) -> Vec<Form> {
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 || (b * b - disc) % (4 * a) != 0 {
                continue;
            }
            let f = Form::with_disc(a, b, disc);
            if f.is_reduced() {
                out.push(f);
            }
        }
        a += 1;
    }
    out
}

impl QuadField {
    /// `Q(√-d)` for squarefree `d >= 1`.
    pub fn new(d: u64) -> Result<Self, QuadError> {
        if d == 0 || !is_squarefree(d) {
            return Err(QuadError::NotSquarefree(d));
        }
        let d_i = i64::try_from(d).map_err(|_| QuadError::NotSquarefree(d))?;
        let disc = if d % 4 == 3 { -d_i } else { -4 * d_i };
        let w = match disc {
            -4 => 4,
            -3 => 6,
            _ => 2,
        };
        let forms = reduced_forms(disc);
        let id = Form::with_disc(1, disc.rem_euclid(2), disc).reduced();
        let compose = |f: &Form, g: &Form| compose_forms(disc, f, g);
        // Greedy generators in the order of the form list.
        let mut reached = std::collections::HashSet::from([id]);
        let mut gens = Vec::new();
        for f in &forms {
            if reached.contains(f) {
                continue;
            }
            gens.push(*f);
            let base: Vec<Form> = reached.iter().copied().collect();
            let mut p = *f;
            while !reached.contains(&p) {
                for x in &base {
                    reached.insert(compose(x, &p));
                }
                p = compose(&p, f);
            }
        }
        let classes =
            ab_discover(forms.len() as u64, id, compose, &gens).expect("reduced forms enumerate the class group");
        Ok(QuadField { d, disc, w, forms, classes })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// Number of roots of unity.
    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn h(&self) -> u64 {
        self.forms.len() as u64
    }

    pub fn class_group(&self) -> &AbGroup {
        self.classes.group()
    }

    pub fn classes(&self) -> &Discovered<Form> {
        &self.classes
    }

    /// Reduced forms, one per ideal class.
    pub fn form_reps(&self) -> &[Form] {
        &self.forms
    }

    pub fn principal_form(&self) -> Form {
        Form::with_disc(1, self.disc.rem_euclid(2), self.disc).reduced()
    }

    /// Reduced form attached to the class of `i`.
    pub fn class_of(&self, i: &OIdeal) -> Form {
        let (a, b) = i.primitive_form();
        Form::with_disc(a, b, self.disc).reduced()
    }

    /// Index of the class of `i` in [`Discovered::finite_group`] of [`Self::classes`].
    pub fn class_index(&self, i: &OIdeal) -> usize {
        self.classes.dlog_index(&self.class_of(i)).expect("every reduced form is a class")
    }

    /// A generator of the cyclic group of roots of unity.
    pub fn root_of_unity(&self) -> Elt {
        match self.w {
            // i = ω + 2 for D = -4, and (1 + √-3)/2 = ω + 2 for D = -3.
            4 | 6 => Elt::new(2, 1),
            _ => Elt::int(-1),
        }
    }

    /// A generator of `i` when it is principal, verified against the ideal.
    pub fn is_principal(&self, i: &OIdeal) -> Option<Elt> {
        if self.class_of(i) != self.principal_form() {
            return None;
        }
        let g = shortest_vector(self.disc, i.z_basis());
        debug_assert_eq!(elt_norm(self.disc, g), i.norm() as i128);
        assert_eq!(OIdeal::principal(self.disc, g), *i, "shortest vector does not generate a principal ideal");
        Some(g)
    }

    pub fn splitting_type(&self, p: u64) -> Result<Splitting, QuadError> {
        if !is_prime_u64(p) {
            return Err(QuadError::NotPrime(p));
        }
        let pi = p as i64;
        let roots: Vec<i64> = (0..2 * pi).filter(|&b| (b * b - self.disc).rem_euclid(4 * pi) == 0).collect();
        let make = |b: i64, kind, index| PrimeIdeal::new(OIdeal::from_form(self.disc, pi, b), p, 1, kind, index);
        Ok(match roots.len() {
            2 => Splitting::Split(make(roots[0], SplitKind::Split, 0), make(roots[1], SplitKind::Split, 1)),
            1 => Splitting::Ramified(make(roots[0], SplitKind::Ramified, 0)),
            _ => Splitting::Inert(PrimeIdeal::new(OIdeal::from_int(self.disc, pi), p, 2, SplitKind::Inert, 0)),
        })
    }

    /// Prime ideals of norm at most `bound`, by norm then canonical order.
    pub fn primes_up_to(&self, bound: u64) -> Vec<PrimeIdeal> {
        let mut out: Vec<PrimeIdeal> = (2..=bound)
            .filter(|&p| is_prime_u64(p))
            .flat_map(|p| self.splitting_type(p).expect("prime").primes())
            .filter(|q| q.norm() <= bound)
            .collect();
        out.sort_by_key(|q| (q.norm(), q.p(), q.index()));
        out
    }

    pub fn residue_units(&self, n: &Modulus) -> Result<ResidueUnits, QuadError> {
        ResidueUnits::new(self, n, RESIDUE_BOUND)
    }
}

/// Gauss composition, carried out on the attached ideals.
pub fn compose_forms(disc: i64, f: &Form, g: &Form) -> Form {
    let i = OIdeal::from_form(disc, f.a, f.b).multiply(&OIdeal::from_form(disc, g.a, g.b)).expect("same field");
    let (a, b) = i.primitive_form();
    Form::with_disc(a, b, disc).reduced()
}

/// Lagrange-Gauss reduction of a rank-2 lattice under the norm form.
fn shortest_vector(disc: i64, basis: [Elt; 2]) -> Elt {
    let nrm = |e: Elt| elt_norm(disc, e);
    // 2 B(u, v) = N(u + v) - N(u) - N(v)
    let bil2 = |u: Elt, v: Elt| nrm(Elt::new(u.x + v.x, u.y + v.y)) - nrm(u) - nrm(v);
    let [mut u, mut v] = basis;
    loop {
        if nrm(u) > nrm(v) {
            std::mem::swap(&mut u, &mut v);
        }
        let q = bil2(u, v);
        let n = 2 * nrm(u);
        // nearest integer to q / n
        let m = Integer::div_floor(&(2 * q + n), &(2 * n));
        if m == 0 {
            return u;
        }
        let m = m as i64;
        v = Elt::new(v.x - m * u.x, v.y - m * u.y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Euler's criterion, independent of the ideal machinery.
    fn legendre(a: i64, p: i64) -> i64 {
        let mut r = 1i64;
        let mut b = a.rem_euclid(p);
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        if r == p - 1 {
            -1
        } else {
            r
        }
    }

    #[test]
    fn small_fields() {
        let k = QuadField::new(1).unwrap();
        assert_eq!((k.disc(), k.w(), k.h()), (-4, 4, 1));
        let k = QuadField::new(7).unwrap();
        assert_eq!((k.disc(), k.w(), k.h()), (-7, 2, 1));
        let k = QuadField::new(23).unwrap();
        assert_eq!((k.disc(), k.w(), k.h()), (-23, 2, 3));
        assert_eq!(k.class_group(), &AbGroup::cyclic(3));
        let forms: Vec<(i64, i64, i64)> = k.form_reps().iter().map(|f| (f.a, f.b, f.c)).collect();
        assert_eq!(forms, vec![(1, 1, 6), (2, -1, 3), (2, 1, 3)]);
        assert_eq!(QuadField::new(3).unwrap().w(), 6);
    }

    #[test]
    fn not_squarefree() {
        assert_eq!(QuadField::new(12).unwrap_err(), QuadError::NotSquarefree(12));
        assert!(QuadField::new(0).is_err());
    }

    #[test]
    fn class_numbers_match_form_counts() {
        // Known class numbers of small discriminants.
        for (d, h) in [(5, 2), (14, 4), (15, 2), (21, 4), (47, 5), (71, 7), (163, 1), (30, 4)] {
            let k = QuadField::new(d).unwrap();
            assert_eq!(k.h(), h, "d = {d}");
            assert_eq!(k.class_group().order().unwrap(), h.into());
        }
        // Q(√-21) has class group (Z/2)^2.
        let k = QuadField::new(21).unwrap();
        assert_eq!(k.class_group().invariant_factors().len(), 2);
    }

    #[test]
    fn splitting_in_q_sqrt_minus_7() {
        let k = QuadField::new(7).unwrap();
        let s = k.splitting_type(11).unwrap();
        assert_eq!(s.kind(), SplitKind::Split);
        let Splitting::Split(p, q) = s else { unreachable!() };
        assert_eq!((p.norm(), q.norm()), (11, 11));
        assert_eq!(p.ideal().multiply(q.ideal()).unwrap(), OIdeal::from_int(-7, 11));
        assert_eq!(p.ideal().conjugate(), *q.ideal());
        assert!(p.ideal().primitive_form().1 < q.ideal().primitive_form().1);
        assert_eq!(k.splitting_type(7).unwrap().kind(), SplitKind::Ramified);
        assert_eq!(k.splitting_type(3).unwrap().kind(), SplitKind::Inert);
        assert_eq!(k.splitting_type(9).unwrap_err(), QuadError::NotPrime(9));
    }

    #[test]
    fn splitting_agrees_with_legendre_symbol() {
        for d in [1u64, 2, 3, 5, 7, 15, 23, 31] {
            let k = QuadField::new(d).unwrap();
            for p in [3i64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
                let kind = k.splitting_type(p as u64).unwrap().kind();
                let want = match legendre(k.disc(), p) {
                    0 => SplitKind::Ramified,
                    1 => SplitKind::Split,
                    _ => SplitKind::Inert,
                };
                assert_eq!(kind, want, "d = {d}, p = {p}");
            }
        }
    }

    #[test]
    fn gcd_of_distinct_primes() {
        let k = QuadField::new(7).unwrap();
        let p7 = *k.splitting_type(7).unwrap().primes()[0].ideal();
        let p11 = *k.splitting_type(11).unwrap().primes()[0].ideal();
        assert!(p7.gcd(&p11).unwrap().is_unit());
        assert!(p7.is_coprime(&p11).unwrap());
        assert_eq!(p7.pow(2), OIdeal::from_int(-7, 7));
    }

    #[test]
    fn principal_ideals() {
        let k = QuadField::new(15).unwrap();
        let g = k.is_principal(&OIdeal::unit(-15)).unwrap();
        assert!(g == Elt::ONE || g == Elt::int(-1));
        for p in k.splitting_type(19).unwrap().primes() {
            let g = k.is_principal(p.ideal()).expect("norm 19 = 2² + 15");
            assert_eq!(elt_norm(-15, g), 19);
            // 19 = (X² + 15 Y²)/4 with (X, Y) = (±4, ±2)
            let (x, y) = g.half_coords(-15);
            assert_eq!((x.abs(), y.abs()), (4, 2));
        }
        let k5 = QuadField::new(5).unwrap();
        let p2 = k5.splitting_type(2).unwrap().primes()[0].clone();
        assert_eq!(k5.is_principal(p2.ideal()), None);
    }

    /// Principality by reduced forms agrees with a brute-force search for an
    /// element of the right norm lying in the ideal.
    #[test]
    fn principal_sweep_small_norms() {
        for d in [5u64, 23, 14] {
            let k = QuadField::new(d).unwrap();
            let disc = k.disc();
            let mut ideals = vec![OIdeal::unit(disc)];
            for p in k.primes_up_to(200) {
                let mut extra = Vec::new();
                for i in &ideals {
                    let j = i.multiply(p.ideal()).unwrap();
                    if j.norm() <= 200 {
                        extra.push(j);
                    }
                }
                ideals.extend(extra);
            }
            ideals.sort();
            ideals.dedup();
            for i in &ideals {
                let n = i.norm() as i128;
                let mut brute = false;
                // 4 N = X² + |D| Y² with X = 2x + yD, Y = y.
                let r = (4 * n as i64).isqrt();
                'outer: for y in -r..=r {
                    for big_x in -r..=r {
                        if (big_x - y * disc).rem_euclid(2) != 0 {
                            continue;
                        }
                        let e = Elt::new((big_x - y * disc) / 2, y);
                        if elt_norm(disc, e) == n && i.contains(e) {
                            brute = true;
                            break 'outer;
                        }
                    }
                }
                let fast = k.is_principal(i);
                assert_eq!(fast.is_some(), brute, "d = {d}, ideal {i}");
                assert_eq!(fast.is_some(), k.class_index(i) == 0);
            }
        }
    }

    #[test]
    fn class_index_is_a_homomorphism() {
        let k = QuadField::new(47).unwrap();
        let g = k.classes().finite_group().clone();
        let ps = k.primes_up_to(30);
        for a in &ps {
            for b in &ps {
                let ab = a.ideal().multiply(b.ideal()).unwrap();
                assert_eq!(k.class_index(&ab), g.add(k.class_index(a.ideal()), k.class_index(b.ideal())));
            }
        }
    }

    #[test]
    fn roots_of_unity() {
        for d in [1u64, 3, 7] {
            let k = QuadField::new(d).unwrap();
            let z = k.root_of_unity();
            let mut p = z;
            let mut n = 1;
            while p != Elt::ONE {
                p = elt_mul(k.disc(), p, z);
                n += 1;
            }
            assert_eq!(n, k.w());
        }
    }
}

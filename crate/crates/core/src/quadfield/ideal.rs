use std::fmt;

use num_integer::Integer;

use super::QuadError;

/// The element `x + y ω` of `O_K`, where `ω = (D + √D)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elt {
    pub x: i64,
    pub y: i64,
}

impl Elt {
    pub const ONE: Elt = Elt { x: 1, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        Elt { x, y }
    }

    pub fn int(x: i64) -> Self {
        Elt { x, y: 0 }
    }

    /// `(X, Y)` with `self = (X + Y √D)/2`.
    pub fn half_coords(&self, disc: i64) -> (i64, i64) {
        (2 * self.x + self.y * disc, self.y)
    }
}

/// `N(ω) = (D² - D)/4`.
fn omega_norm(disc: i64) -> i128 {
    let d = disc as i128;
    (d * d - d) / 4
}

pub(crate) fn mul_wide(disc: i64, a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
    // ω² = D ω - N(ω)
    let n = omega_norm(disc);
    let yy = a.1 * b.1;
    (a.0 * b.0 - yy * n, a.0 * b.1 + a.1 * b.0 + yy * disc as i128)
}

pub fn elt_mul(disc: i64, a: Elt, b: Elt) -> Elt {
    let (x, y) = mul_wide(disc, (a.x as i128, a.y as i128), (b.x as i128, b.y as i128));
    Elt { x: x.try_into().expect("element overflow"), y: y.try_into().expect("element overflow") }
}

/// `N(x + y ω) = x² + D x y + N(ω) y²`.
pub fn elt_norm(disc: i64, a: Elt) -> i128 {
    let (x, y) = (a.x as i128, a.y as i128);
    x * x + disc as i128 * x * y + omega_norm(disc) * y * y
}

pub fn elt_conj(disc: i64, a: Elt) -> Elt {
    // conj(ω) = D - ω
    Elt { x: a.x + a.y * disc, y: -a.y }
}

/// A nonzero ideal of `O_K`, stored as the Z-lattice with Hermite basis
/// `{n1, b + c ω}`, where `0 <= b < n1` and `c | n1`, `c | b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OIdeal {
    disc: i64,
    n1: i64,
    b: i64,
    c: i64,
}

/// Hermite basis `(n1, b, c)` of the Z-span of the given coordinate vectors.
fn hnf2(vecs: &[(i128, i128)]) -> (i128, i128, i128) {
    let (mut px, mut py) = (0i128, 0i128);
    let mut n1 = 0i128;
    for &(x, y) in vecs {
        if y == 0 {
            n1 = n1.gcd(&x);
            continue;
        }
        if py == 0 {
            if px != 0 {
                n1 = n1.gcd(&px);
            }
            (px, py) = (x, y);
            continue;
        }
        let e = py.extended_gcd(&y);
        let g = e.gcd;
        let (nx, ny) = (e.x * px + e.y * x, e.x * py + e.y * y);
        let other = (y / g) * px - (py / g) * x;
        n1 = n1.gcd(&other);
        (px, py) = (nx, ny);
        if n1 != 0 {
            px = px.rem_euclid(n1);
        }
    }
    assert!(n1 != 0 && py != 0, "lattice is not of full rank");
    if py < 0 {
        (px, py) = (-px, -py);
    }
    (n1.abs(), px.rem_euclid(n1.abs()), py)
}

impl OIdeal {
    pub fn unit(disc: i64) -> Self {
        OIdeal { disc, n1: 1, b: 0, c: 1 }
    }

    fn from_lattice(disc: i64, vecs: &[(i128, i128)]) -> Self {
        let (n1, b, c) = hnf2(vecs);
        let cv = |v: i128| i64::try_from(v).expect("ideal too large");
        OIdeal { disc, n1: cv(n1), b: cv(b), c: cv(c) }
    }

    /// The ideal generated (as an `O_K`-module) by the given elements.
    pub fn generated_by(disc: i64, gens: &[Elt]) -> Self {
        let mut vecs = Vec::with_capacity(2 * gens.len());
        for g in gens {
            let v = (g.x as i128, g.y as i128);
            vecs.push(v);
            vecs.push(mul_wide(disc, v, (0, 1)));
        }
        Self::from_lattice(disc, &vecs)
    }

    pub fn principal(disc: i64, g: Elt) -> Self {
        Self::generated_by(disc, &[g])
    }

    pub fn from_int(disc: i64, n: i64) -> Self {
        OIdeal { disc, n1: n.abs(), b: 0, c: n.abs() }
    }

    /// The ideal `a Z + ((b + √D)/2) Z`; requires `b² ≡ D (mod 4a)`.
    pub fn from_form(disc: i64, a: i64, b: i64) -> Self {
        debug_assert_eq!((b * b - disc).rem_euclid(4 * a), 0);
        // (b + √D)/2 = (b - D)/2 + ω
        Self::from_lattice(disc, &[(a as i128, 0), (((b - disc) / 2) as i128, 1)])
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn norm(&self) -> i64 {
        self.n1 * self.c
    }

    /// Largest rational integer dividing the ideal.
    pub fn content(&self) -> i64 {
        self.c
    }

    /// `(a, b)` of the primitive part `a Z + ((b + √D)/2) Z`, with `b` in `[0, 2a)`.
    pub fn primitive_form(&self) -> (i64, i64) {
        let a = self.n1 / self.c;
        let b = (2 * (self.b / self.c) + self.disc).rem_euclid(2 * a);
        (a, b)
    }

    /// The Hermite basis `(n1, b, c)`.
    pub fn hermite(&self) -> (i64, i64, i64) {
        (self.n1, self.b, self.c)
    }

    /// Z-basis `{n1, b + c ω}`.
    pub fn z_basis(&self) -> [Elt; 2] {
        [Elt::int(self.n1), Elt::new(self.b, self.c)]
    }

    pub fn is_unit(&self) -> bool {
        self.n1 == 1
    }

    fn check(&self, other: &OIdeal) -> Result<(), QuadError> {
        if self.disc == other.disc {
            Ok(())
        } else {
            Err(QuadError::FieldMismatch)
        }
    }

    pub fn multiply(&self, other: &OIdeal) -> Result<OIdeal, QuadError> {
        self.check(other)?;
        let mut vecs = Vec::with_capacity(4);
        for u in self.z_basis() {
            for v in other.z_basis() {
                vecs.push(mul_wide(self.disc, (u.x as i128, u.y as i128), (v.x as i128, v.y as i128)));
            }
        }
        Ok(Self::from_lattice(self.disc, &vecs))
    }

    pub fn pow(&self, e: u32) -> OIdeal {
        let mut r = OIdeal::unit(self.disc);
        for _ in 0..e {
            r = r.multiply(self).expect("same field");
        }
        r
    }

    /// `I + J`, the largest ideal dividing both.
    pub fn gcd(&self, other: &OIdeal) -> Result<OIdeal, QuadError> {
        self.check(other)?;
        let vecs: Vec<(i128, i128)> =
            self.z_basis().iter().chain(other.z_basis().iter()).map(|e| (e.x as i128, e.y as i128)).collect();
        Ok(Self::from_lattice(self.disc, &vecs))
    }

    pub fn is_coprime(&self, other: &OIdeal) -> Result<bool, QuadError> {
        Ok(self.gcd(other)?.is_unit())
    }

    pub fn contains(&self, e: Elt) -> bool {
        self.reduce(e) == Elt::default()
    }

    /// Whether `self` divides `other`, i.e. `other ⊆ self`.
    pub fn divides(&self, other: &OIdeal) -> bool {
        self.disc == other.disc && other.z_basis().iter().all(|&e| self.contains(e))
    }

    pub fn conjugate(&self) -> OIdeal {
        let vecs: Vec<(i128, i128)> = self
            .z_basis()
            .iter()
            .map(|&e| {
                let c = elt_conj(self.disc, e);
                (c.x as i128, c.y as i128)
            })
            .collect();
        Self::from_lattice(self.disc, &vecs)
    }

    /// Canonical representative of `e` modulo the ideal: `x` in `[0, n1)`, `y` in `[0, c)`.
    pub fn reduce(&self, e: Elt) -> Elt {
        self.reduce_wide(e.x as i128, e.y as i128)
    }

    pub(crate) fn reduce_wide(&self, x: i128, y: i128) -> Elt {
        let q = Integer::div_floor(&y, &(self.c as i128));
        let y = y - q * self.c as i128;
        let x = (x - q * self.b as i128).rem_euclid(self.n1 as i128);
        Elt { x: x as i64, y: y as i64 }
    }

    /// Exponent of the prime `p` in `self`.
    pub fn valuation(&self, p: &OIdeal) -> u32 {
        let mut k = 0;
        let mut q = *p;
        while q.divides(self) {
            k += 1;
            q = q.multiply(p).expect("same field");
        }
        k
    }
}

impl fmt::Display for OIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.primitive_form();
        if self.c == 1 {
            write!(f, "[{a}, ({b}+√{})/2]", self.disc)
        } else {
            write!(f, "{}·[{a}, ({b}+√{})/2]", self.c, self.disc)
        }
    }
}

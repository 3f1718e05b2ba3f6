use std::fmt;

use super::{OIdeal, QuadError, QuadField, Splitting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

/// A prime ideal together with its rational prime, residue degree and
/// position among the primes above `p` (0 or 1 when split).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeIdeal {
    ideal: OIdeal,
    p: u64,
    f: u32,
    kind: SplitKind,
    index: u8,
}

impl PrimeIdeal {
    pub(crate) fn new(ideal: OIdeal, p: u64, f: u32, kind: SplitKind, index: u8) -> Self {
        PrimeIdeal { ideal, p, f, kind, index }
    }

    pub fn ideal(&self) -> &OIdeal {
        &self.ideal
    }

    /// The rational prime below.
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn residue_degree(&self) -> u32 {
        self.f
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn norm(&self) -> u64 {
        self.p.pow(self.f)
    }

    /// Spec string: `p:11:0`, `p:11:1`, `p:7` (ramified) or `q:3` (inert).
    pub fn label(&self) -> String {
        match self.kind {
            SplitKind::Split => format!("p:{}:{}", self.p, self.index),
            SplitKind::Ramified => format!("p:{}", self.p),
            SplitKind::Inert => format!("q:{}", self.p),
        }
    }

    /// Parses a single prime spec (`p:N`, `p:N:i`, `q:N`).
    pub fn parse(k: &QuadField, spec: &str) -> Result<PrimeIdeal, QuadError> {
        let bad = |msg: &str| QuadError::BadSpec(spec.to_string(), msg.to_string());
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad("expected an integer"));
        let (tag, p, idx) = match parts.as_slice() {
            [tag, p] => (*tag, num(p)?, None),
            [tag, p, i] => (*tag, num(p)?, Some(num(i)?)),
            _ => return Err(bad("expected p:N, p:N:i or q:N")),
        };
        let split = k.splitting_type(p)?;
        match (tag, &split, idx) {
            ("p", Splitting::Split(a, b), i) => match i.unwrap_or(0) {
                0 => Ok(a.clone()),
                1 => Ok(b.clone()),
                _ => Err(bad("index must be 0 or 1")),
            },
            ("p" | "q", Splitting::Inert(a) | Splitting::Ramified(a), None | Some(0)) => Ok(a.clone()),
            ("q", Splitting::Split(..), _) => Err(bad("prime splits; use p:N:i")),
            ("p" | "q", _, _) => Err(bad("only one prime lies above this number")),
            _ => Err(bad("tag must be p or q")),
        }
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A factored integral ideal `Π p_i^{e_i}`, primes kept in the given order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    disc: i64,
    primes: Vec<PrimeIdeal>,
    exps: Vec<u32>,
}

impl Modulus {
    pub fn unit(disc: i64) -> Self {
        Modulus { disc, primes: Vec::new(), exps: Vec::new() }
    }

    /// Drops zero exponents; rejects repeated primes.
    pub fn new(disc: i64, factors: Vec<(PrimeIdeal, u32)>) -> Result<Self, QuadError> {
        let mut m = Modulus::unit(disc);
        for (p, e) in factors {
            if p.ideal().disc() != disc {
                return Err(QuadError::FieldMismatch);
            }
            if m.primes.contains(&p) {
                return Err(QuadError::DuplicatePrime(p.label()));
            }
            if e > 0 {
                m.primes.push(p);
                m.exps.push(e);
            }
        }
        Ok(m)
    }

    /// Parses a comma-separated list of prime specs with optional `^e`.
    pub fn parse(k: &QuadField, spec: &str) -> Result<Self, QuadError> {
        let spec = spec.trim();
        if spec.is_empty() || spec == "1" {
            return Ok(Modulus::unit(k.disc()));
        }
        let mut factors = Vec::new();
        for item in spec.split(',') {
            let (p, e) = match item.split_once('^') {
                Some((p, e)) => {
                    let e = e.trim().parse::<u32>().map_err(|_| {
                        QuadError::BadSpec(item.to_string(), "exponent must be a non-negative integer".into())
                    })?;
                    (p, e)
                }
                None => (item, 1),
            };
            factors.push((PrimeIdeal::parse(k, p)?, e));
        }
        Self::new(k.disc(), factors)
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn primes(&self) -> &[PrimeIdeal] {
        &self.primes
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    /// Number of distinct primes.
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_unit(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_unit()
    }

    pub fn is_squarefree(&self) -> bool {
        self.exps.iter().all(|&e| e == 1)
    }

    pub fn ideal(&self) -> OIdeal {
        self.primes
            .iter()
            .zip(&self.exps)
            .fold(OIdeal::unit(self.disc), |acc, (p, &e)| acc.multiply(&p.ideal().pow(e)).expect("same field"))
    }

    pub fn norm(&self) -> u64 {
        self.primes.iter().zip(&self.exps).map(|(p, &e)| p.norm().pow(e)).product()
    }

    /// Exponent of `p` in the modulus.
    pub fn valuation(&self, p: &PrimeIdeal) -> u32 {
        self.primes.iter().position(|q| q == p).map_or(0, |i| self.exps[i])
    }

    /// The divisor with exponents `exps` (aligned with [`Self::primes`]).
    pub fn with_exponents(&self, exps: &[u32]) -> Modulus {
        assert_eq!(exps.len(), self.primes.len());
        Modulus::new(self.disc, self.primes.iter().cloned().zip(exps.iter().copied()).collect())
            .expect("sub-modulus of a valid modulus")
    }

    /// All divisors, as exponent vectors aligned with [`Self::primes`].
    pub fn divisor_exponents(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &e in &self.exps {
            out = out.into_iter().flat_map(|v| (0..=e).map(move |k| [v.clone(), vec![k]].concat())).collect();
        }
        out
    }

    pub fn divides(&self, other: &Modulus) -> bool {
        self.primes.iter().zip(&self.exps).all(|(p, &e)| other.valuation(p) >= e)
    }

    /// `self / p^{v_p(self)}`.
    pub fn without(&self, p: &PrimeIdeal) -> Modulus {
        let exps: Vec<u32> = self.primes.iter().zip(&self.exps).map(|(q, &e)| if q == p { 0 } else { e }).collect();
        self.with_exponents(&exps)
    }

    /// Whether the modulus is coprime to the integer `n`.
    pub fn is_coprime_to_int(&self, n: u64) -> bool {
        self.primes.iter().all(|p| !n.is_multiple_of(p.p()))
    }

    /// Canonical spec string, parseable by [`Self::parse`].
    pub fn spec(&self) -> String {
        if self.is_unit() {
            return "1".into();
        }
        self.primes
            .iter()
            .zip(&self.exps)
            .map(|(p, &e)| if e == 1 { p.label() } else { format!("{}^{e}", p.label()) })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

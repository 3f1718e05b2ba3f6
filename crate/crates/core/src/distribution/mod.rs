//! The level presentation `Δ_m/U(m)` of the universal ordinary distribution,
//! the Iwasawa map `F_m`, torsion bounds and the parity certificate.

mod certificate;
mod iwasawa;

use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::groupring::GroupRingError;
use crate::quadfield::{Modulus, QuadField};
use crate::rayclass::{RayClassGroup, RayError};
use crate::zlinalg::{cokernel, AbGroup, IntMatrix, LinalgError};

pub use certificate::{
    nu, search_torsex, torsex_certificate, DegreeCheck, ParityCase, ParityCheck, TorsionCertificate,
};
pub use iwasawa::{block_rank, iwasawa_image, iwasawa_matrix, level_torsion, torsion_bound, IwasawaMatrix, TorsionBound};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistError {
    #[error(transparent)]
    Ray(#[from] RayError),
    #[error(transparent)]
    GroupRing(#[from] GroupRingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("torsion oracles disagree: relation SNF gives {0}, kernel of F gives {1}")]
    OracleMismatch(String, String),
    #[error("expected a modulus with 3 prime factors, got {0}")]
    WrongShape(usize),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("modulus {0} is not coprime to w_K = {1}")]
    NotCoprimeToW(String, u32),
}

impl From<crate::quadfield::QuadError> for DistError {
    fn from(e: crate::quadfield::QuadError) -> Self {
        DistError::Ray(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationKind {
    /// `σ - s(K_{up^e}/K_u) σ̃`, for `p | u`.
    Relred,
    /// `(1 - (p, K_u/K)^{-1}) σ - s(K_{up^e}/K_u) σ̃`, for `p ∤ u`.
    Reluti,
}

/// Which generator `S(u, p^e, σ)` a relation row encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationInfo {
    pub kind: RelationKind,
    /// Level index of `u`.
    pub level: usize,
    /// Position of `p` among the primes of `m`.
    pub prime: usize,
    pub e: u32,
    pub sigma: usize,
}

/// One divisor `n | m` with its ray class group and its block of generators.
#[derive(Clone, Debug)]
pub struct Level {
    pub exps: Vec<u32>,
    pub modulus: Modulus,
    pub group: RayClassGroup,
    /// Index of the generator `(n, identity)`.
    pub offset: usize,
}

impl Level {
    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// Number of primes of `m` dividing this level.
    pub fn support(&self) -> usize {
        self.exps.iter().filter(|&&e| e > 0).count()
    }
}

/// `Δ_m` with basis `(n, σ)` for `n | m`, `σ ∈ G_n`, and the rows of `U(m)`.
#[derive(Clone, Debug)]
pub struct DeltaPresentation {
    field: QuadField,
    m: Modulus,
    levels: Vec<Level>,
    by_exps: HashMap<Vec<u32>, usize>,
    ngens: usize,
    relations: IntMatrix,
    info: Vec<RelationInfo>,
}

/// Graded-lexicographic order on divisors: number of primes, then total
/// exponent, then exponent vectors.
fn divisor_key(exps: &[u32]) -> (usize, u32, Vec<u32>) {
    (exps.iter().filter(|&&e| e > 0).count(), exps.iter().sum(), exps.to_vec())
}

/// Preimage lists of a surjection given by its table.
pub(crate) fn fibres(table: &[usize], target_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); target_order];
    for (x, &y) in table.iter().enumerate() {
        out[y].push(x);
    }
    out
}

impl DeltaPresentation {
    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn modulus(&self) -> &Modulus {
        &self.m
    }

    /// Levels in the total order `≺`; the last one is `m`.
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn top(&self) -> &Level {
        self.levels.last().expect("at least the unit level")
    }

    pub fn level_index(&self, exps: &[u32]) -> Option<usize> {
        self.by_exps.get(exps).copied()
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn relation_info(&self) -> &[RelationInfo] {
        &self.info
    }

    /// `(level, σ)` of a generator.
    pub fn generator(&self, index: usize) -> (usize, usize) {
        let l = self.levels.partition_point(|lv| lv.offset <= index) - 1;
        (l, index - self.levels[l].offset)
    }

    pub fn index(&self, level: usize, sigma: usize) -> usize {
        self.levels[level].offset + sigma
    }

    /// Levels of `Σ`: divisors carrying the full exponent of each of their primes.
    pub fn sigma_levels(&self) -> Vec<usize> {
        let full = self.m.exponents();
        (0..self.levels.len())
            .filter(|&i| self.levels[i].exps.iter().zip(full).all(|(&e, &f)| e == 0 || e == f))
            .collect()
    }

    /// Table of `G_hi → G_lo`.
    pub fn transition(&self, hi: usize, lo: usize) -> Result<Vec<usize>, DistError> {
        Ok(self.levels[hi].group.transition(&self.levels[lo].group)?)
    }

    /// `Δ_m/U(m)`.
    pub fn quotient(&self) -> AbGroup {
        cokernel(&self.relations, self.ngens)
    }
}

/// Builds `Δ_m` and the rows of `U(m)`: for every level `u`, prime `p | m` and
/// `1 <= e <= v_p(m) - v_p(u)`, one row per `σ ∈ G_u`.
pub fn build_presentation(k: &QuadField, m: &Modulus) -> Result<DeltaPresentation, DistError> {
    let mut divisors = m.divisor_exponents();
    divisors.sort_by_key(|e| divisor_key(e));
    let mut levels = Vec::with_capacity(divisors.len());
    let mut offset = 0;
    for exps in divisors {
        let modulus = m.with_exponents(&exps);
        let group = RayClassGroup::new(k, &modulus)?;
        let order = group.order();
        levels.push(Level { exps, modulus, group, offset });
        offset += order;
    }
    let by_exps: HashMap<Vec<u32>, usize> = levels.iter().enumerate().map(|(i, l)| (l.exps.clone(), i)).collect();
    let full = m.exponents();
    let mut rows: Vec<Vec<(usize, BigInt)>> = Vec::new();
    let mut info = Vec::new();
    for (li, lv) in levels.iter().enumerate() {
        for (pi, p) in m.primes().iter().enumerate() {
            let v = lv.exps[pi];
            for e in 1..=(full[pi] - v) {
                let mut up = lv.exps.clone();
                up[pi] += e;
                let hi = &levels[by_exps[&up]];
                let table = hi.group.transition(&lv.group)?;
                let fib = fibres(&table, lv.order());
                let kind = if v == 0 { RelationKind::Reluti } else { RelationKind::Relred };
                let lambda = match kind {
                    RelationKind::Reluti => Some(lv.group.frobenius(p)?.rep),
                    RelationKind::Relred => None,
                };
                let fg = lv.group.finite_group();
                for sigma in 0..lv.order() {
                    let mut coeffs: HashMap<usize, i64> = HashMap::new();
                    *coeffs.entry(lv.offset + sigma).or_default() += 1;
                    if let Some(l) = lambda {
                        *coeffs.entry(lv.offset + fg.sub(sigma, l)).or_default() -= 1;
                    }
                    for &t in &fib[sigma] {
                        *coeffs.entry(hi.offset + t).or_default() -= 1;
                    }
                    let mut row: Vec<(usize, BigInt)> =
                        coeffs.into_iter().filter(|&(_, c)| c != 0).map(|(i, c)| (i, BigInt::from(c))).collect();
                    row.sort_by_key(|&(i, _)| i);
                    rows.push(row);
                    info.push(RelationInfo { kind, level: li, prime: pi, e, sigma });
                }
            }
        }
    }
    Ok(DeltaPresentation {
        field: k.clone(),
        m: m.clone(),
        levels,
        by_exps,
        ngens: offset,
        relations: IntMatrix::from_sparse_rows(offset, rows),
        info,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zlinalg::hnf_rows;

    fn q7() -> QuadField {
        QuadField::new(7).unwrap()
    }

    #[test]
    fn unit_modulus() {
        let k = QuadField::new(23).unwrap();
        let p = build_presentation(&k, &Modulus::unit(k.disc())).unwrap();
        assert_eq!(p.ngens(), 3);
        assert_eq!(p.relations().rows(), 0);
        assert_eq!(p.quotient(), AbGroup::free(3));
    }

    #[test]
    fn q7_triple_counts() {
        let k = q7();
        let m = Modulus::parse(&k, "p:7,p:11:0,p:23:0").unwrap();
        let p = build_presentation(&k, &m).unwrap();
        assert_eq!(p.levels().len(), 8);
        let expected: usize = p.levels().iter().map(Level::order).sum();
        assert_eq!(p.ngens(), expected);
        assert_eq!(p.ngens(), 886);
        assert_eq!(p.relations().rows(), 247);
        assert!(p.relation_info().iter().all(|r| r.kind == RelationKind::Reluti));
        // one row per (u, p ∤ u, σ ∈ G_u)
        let pairs: usize = p.levels().iter().map(|l| l.order() * (3 - l.support())).sum();
        assert_eq!(pairs, 247);
        assert_eq!(p.top().order(), 660);
    }

    #[test]
    fn rows_supported_on_two_blocks() {
        let k = q7();
        let m = Modulus::parse(&k, "p:7^2,p:11:0").unwrap();
        let p = build_presentation(&k, &m).unwrap();
        for (r, inf) in p.relation_info().iter().enumerate() {
            let mut up = p.levels()[inf.level].exps.clone();
            up[inf.prime] += inf.e;
            let hi = p.level_index(&up).unwrap();
            for (c, _) in p.relations().sparse_row(r) {
                let (l, _) = p.generator(c);
                assert!(l == inf.level || l == hi);
            }
        }
        assert!(p.relation_info().iter().any(|r| r.kind == RelationKind::Relred));
    }

    #[test]
    fn rank_is_order_of_top_group() {
        let k = q7();
        for spec in ["p:7", "p:7,p:11:0", "p:7^2,p:11:0", "p:2:0,p:11:1"] {
            let m = Modulus::parse(&k, spec).unwrap();
            let p = build_presentation(&k, &m).unwrap();
            assert_eq!(p.quotient().rank(), p.top().order(), "{spec}");
        }
        let k = QuadField::new(23).unwrap();
        let m = Modulus::parse(&k, "p:3:0,p:13:1").unwrap();
        let p = build_presentation(&k, &m).unwrap();
        assert_eq!(p.quotient().rank(), p.top().order());
    }

    /// Rebuilding the trace term from `s(ker) σ̃` with arbitrary lifts spans
    /// the same lattice.
    #[test]
    fn rows_independent_of_lift() {
        let k = q7();
        let m = Modulus::parse(&k, "p:7,p:11:0").unwrap();
        let p = build_presentation(&k, &m).unwrap();
        let mut alt: Vec<Vec<BigInt>> = Vec::new();
        let mut state = 0x9e37_79b9_u64;
        for inf in p.relation_info() {
            let lv = &p.levels()[inf.level];
            let mut up = lv.exps.clone();
            up[inf.prime] += inf.e;
            let hi = p.level_index(&up).unwrap();
            let table = p.transition(hi, inf.level).unwrap();
            let fib = fibres(&table, lv.order());
            let ker = &fib[0];
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let lift = fib[inf.sigma][(state >> 33) as usize % fib[inf.sigma].len()];
            let hg = p.levels()[hi].group.finite_group();
            let mut row = vec![BigInt::from(0); p.ngens()];
            row[lv.offset + inf.sigma] += 1;
            if inf.kind == RelationKind::Reluti {
                let l = lv.group.frobenius(&p.modulus().primes()[inf.prime]).unwrap().rep;
                row[lv.offset + lv.group.finite_group().sub(inf.sigma, l)] -= 1;
            }
            for &t in ker {
                row[p.levels()[hi].offset + hg.add(t, lift)] -= 1;
            }
            alt.push(row);
        }
        let (a, _) = hnf_rows(&alt, p.ngens());
        let (b, _) = hnf_rows(&p.relations().to_rows(), p.ngens());
        assert_eq!(a, b);
    }
}

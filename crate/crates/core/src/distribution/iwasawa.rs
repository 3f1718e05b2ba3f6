use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::groupring::{alpha, p_star, trace_ideal_quotient, GroupRingElt};
use crate::zlinalg::{rational_kernel, subquotient_torsion, AbGroup, IntMatrix};

use super::{fibres, DeltaPresentation, DistError};

/// `F_m` scaled by a common denominator: column `(n, σ)` holds `scale · σ̃ α(n, m)`.
#[derive(Clone, Debug)]
pub struct IwasawaMatrix {
    pub scale: BigInt,
    /// `α(n, m)` for every level, in level order.
    pub alphas: Vec<GroupRingElt>,
    /// Rows indexed by `G_m`, columns by the generators of `Δ_m`.
    pub matrix: IntMatrix,
    /// For every level, a lift in `G_m` of each `σ ∈ G_n`.
    pub lifts: Vec<Vec<usize>>,
}

impl IwasawaMatrix {
    /// `scale · F_m(v)` as coefficients over `G_m`.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.matrix.mul_vec(v)
    }
}

/// `p*` in `G_m` for each prime of `m`.
fn pstars(p: &DeltaPresentation) -> Result<Vec<GroupRingElt>, DistError> {
    let top = p.top();
    let fg = top.group.finite_group();
    let mut out = Vec::with_capacity(p.modulus().len());
    for (pi, pr) in p.modulus().primes().iter().enumerate() {
        let mut lower = top.exps.clone();
        lower[pi] = 0;
        let lower = &p.levels()[p.level_index(&lower).expect("divisor level")].group;
        let t = top.group.inertia_in(pr, lower)?;
        let lam = top.group.frobenius_in(pr, Some(lower))?;
        out.push(p_star(fg, &t, lam.rep));
    }
    Ok(out)
}

/// `α(n, m)` for one level, and a lift in `G_m` of each `σ ∈ G_n`.
fn alpha_at(
    p: &DeltaPresentation,
    pstars: &[GroupRingElt],
    level: usize,
) -> Result<(GroupRingElt, Vec<usize>), DistError> {
    let lv = &p.levels()[level];
    let fib = fibres(&p.transition(p.levels().len() - 1, level)?, lv.order());
    let ps: Vec<GroupRingElt> =
        (0..pstars.len()).filter(|&i| lv.exps[i] > 0).map(|i| pstars[i].clone()).collect();
    let a = alpha(p.top().group.finite_group(), &fib[0], &ps);
    Ok((a, fib.iter().map(|f| f[0]).collect()))
}

/// Builds `F_m`, with `p*` taken in `G_m` for every prime dividing the level.
pub fn iwasawa_matrix(p: &DeltaPresentation) -> Result<IwasawaMatrix, DistError> {
    let top = p.top();
    let fg = top.group.finite_group();
    let ps = pstars(p)?;
    let mut alphas = Vec::with_capacity(p.levels().len());
    let mut lifts = Vec::with_capacity(p.levels().len());
    for li in 0..p.levels().len() {
        let (a, l) = alpha_at(p, &ps, li)?;
        alphas.push(a);
        lifts.push(l);
    }
    let scale = alphas.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denominator()));
    let mut rows: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); top.order()];
    for (li, lv) in p.levels().iter().enumerate() {
        let base = alphas[li].scaled_coeffs(&scale);
        for (sigma, &lift) in lifts[li].iter().enumerate() {
            let col = lv.offset + sigma;
            for (tau, c) in base.iter().enumerate() {
                if !c.is_zero() {
                    rows[fg.add(tau, lift)].push((col, c.clone()));
                }
            }
        }
    }
    for r in &mut rows {
        r.sort_by_key(|&(c, _)| c);
    }
    Ok(IwasawaMatrix { scale, alphas, matrix: IntMatrix::from_sparse_rows(p.ngens(), rows), lifts })
}

/// `F_m(v)` in `Q[G_m]`, touching only the levels where `v` is supported.
pub fn iwasawa_image(p: &DeltaPresentation, v: &[BigInt]) -> Result<GroupRingElt, DistError> {
    let fg = p.top().group.finite_group();
    let order = p.top().order();
    let ps = pstars(p)?;
    let mut out = GroupRingElt::zero(order);
    for (li, lv) in p.levels().iter().enumerate() {
        let block = &v[lv.offset..lv.offset + lv.order()];
        if block.iter().all(Zero::is_zero) {
            continue;
        }
        let (a, lifts) = alpha_at(p, &ps, li)?;
        let mut y = vec![BigInt::zero(); order];
        for (sigma, c) in block.iter().enumerate() {
            y[lifts[sigma]] += c;
        }
        out = out.add(&GroupRingElt::from_integers(y).mul(&a, fg));
    }
    Ok(out)
}

/// `Tor(Δ_m/U(m))` from the SNF of the relations, cross-checked against
/// `ker(F_m)/U(m)`.
pub fn level_torsion(p: &DeltaPresentation) -> Result<AbGroup, DistError> {
    let a = p.quotient().torsion();
    let f = iwasawa_matrix(p)?;
    let ker = rational_kernel(&f.matrix);
    let b = subquotient_torsion(&ker, p.relations())?;
    if a != b {
        return Err(DistError::OracleMismatch(format!("{a}"), format!("{b}")));
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionBound {
    /// `Π z_u` over the levels `u ∈ Σ`, `m` included.
    pub product_bound: BigInt,
    /// `z_u` for each level of `Σ`, as `(level index, z_u)`.
    pub z: Vec<(usize, BigInt)>,
    /// `a = 2^{|m|-1} - |m|`.
    pub a: u32,
    /// `w_K^{a h}`.
    pub borne: BigInt,
    pub exponent_divides_product: bool,
    pub order_divides_borne: bool,
}

/// The annihilator `Π z_u` and the order bound `w_K^{a h}` for a computed
/// level torsion.
pub fn torsion_bound(p: &DeltaPresentation, torsion: &AbGroup) -> Result<TorsionBound, DistError> {
    let k = p.field();
    let w = k.w();
    if !p.modulus().is_coprime_to_int(w as u64) {
        return Err(DistError::NotCoprimeToW(p.modulus().spec(), w));
    }
    let mut z = Vec::new();
    for li in p.sigma_levels() {
        z.push((li, trace_ideal_quotient(&p.levels()[li].group)?.z));
    }
    let product_bound = z.iter().fold(BigInt::one(), |acc, (_, x)| acc * x);
    let s = p.modulus().len() as u32;
    let a = if s == 0 { 0 } else { (1u32 << (s - 1)) - s };
    let borne = num_traits::pow(BigInt::from(w), (a as u64 * k.h()) as usize);
    let exp = torsion.torsion_exponent();
    let exp = if exp.is_zero() { BigInt::one() } else { exp };
    let order = torsion.torsion_order();
    Ok(TorsionBound {
        exponent_divides_product: product_bound.is_multiple_of(&exp),
        order_divides_borne: borne.is_multiple_of(&order),
        product_bound,
        z,
        a,
        borne,
    })
}

/// Rank of `F_m(Δ_n)`, where `Δ_n` is spanned by the generators at the levels
/// dividing `n`.
pub fn block_rank(p: &DeltaPresentation, f: &IwasawaMatrix, level: usize) -> usize {
    let n = &p.levels()[level].exps;
    let cols: Vec<usize> = p
        .levels()
        .iter()
        .filter(|lv| lv.exps.iter().zip(n).all(|(a, b)| a <= b))
        .flat_map(|lv| lv.offset..lv.offset + lv.order())
        .collect();
    crate::zlinalg::rank(&f.matrix.select_cols(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::build_presentation;
    use crate::quadfield::{Modulus, QuadField};

    fn pres(d: u64, spec: &str) -> DeltaPresentation {
        let k = QuadField::new(d).unwrap();
        build_presentation(&k, &Modulus::parse(&k, spec).unwrap()).unwrap()
    }

    #[test]
    fn unit_level_is_identity() {
        let p = pres(7, "1");
        let f = iwasawa_matrix(&p).unwrap();
        assert_eq!(f.matrix.to_rows(), vec![vec![BigInt::one()]]);
        assert!(level_torsion(&p).unwrap().is_trivial());
    }

    #[test]
    fn unit_generator_column_is_all_ones() {
        let p = pres(7, "p:7,p:11:0");
        let f = iwasawa_matrix(&p).unwrap();
        let col: Vec<BigInt> = (0..p.top().order()).map(|r| f.matrix.get(r, 0)).collect();
        assert!(col.iter().all(|c| *c == f.scale));
    }

    #[test]
    fn f_kills_relations() {
        for (d, spec) in [(7, "p:7,p:11:0"), (7, "p:7^2,p:11:0"), (23, "p:3:0,p:13:1")] {
            let p = pres(d, spec);
            let f = iwasawa_matrix(&p).unwrap();
            for r in p.relations().to_rows() {
                assert!(f.apply(&r).iter().all(Zero::is_zero), "{spec}");
            }
        }
    }

    #[test]
    fn sparse_image_matches_matrix() {
        let p = pres(7, "p:7,p:11:0");
        let f = iwasawa_matrix(&p).unwrap();
        for g in [0, 3, 7, 20, p.ngens() - 1] {
            let mut v = vec![BigInt::zero(); p.ngens()];
            v[g] = BigInt::from(3);
            v[1] = BigInt::from(-2);
            let img = iwasawa_image(&p, &v).unwrap();
            let want = GroupRingElt::from_integers(f.apply(&v)).div(&f.scale);
            assert_eq!(img, want);
        }
    }

    #[test]
    fn block_ranks() {
        let p = pres(7, "p:7,p:11:0");
        let f = iwasawa_matrix(&p).unwrap();
        for li in 0..p.levels().len() {
            assert_eq!(block_rank(&p, &f, li), p.levels()[li].order());
        }
    }

    #[test]
    fn small_levels_torsion_free() {
        for spec in ["p:7", "p:7,p:11:0", "p:11:0,p:23:0"] {
            let p = pres(7, spec);
            let t = level_torsion(&p).unwrap();
            assert!(t.is_trivial(), "{spec}");
            let b = torsion_bound(&p, &t).unwrap();
            assert_eq!(b.product_bound, BigInt::one());
            assert_eq!(b.borne, BigInt::one());
        }
    }

    #[test]
    fn bound_rejects_w() {
        let p = pres(7, "p:2:0");
        let t = AbGroup::trivial();
        assert!(matches!(torsion_bound(&p, &t), Err(DistError::NotCoprimeToW(..))));
    }
}

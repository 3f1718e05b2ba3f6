use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::groupring::GroupRingElt;
use crate::quadfield::{Modulus, PrimeIdeal, QuadField};
use crate::rayclass::RayClassGroup;
use crate::zlinalg::{FiniteGroup, Lattice};

use super::{build_presentation, fibres, iwasawa_image, DeltaPresentation, DistError};

/// Above this many generators the `R ∉ U(m)` lattice check is skipped.
const LATTICE_CHECK_LIMIT: usize = 5000;

/// `ν(v)`: the sum of the coordinates of `v` at levels divisible by all three
/// primes of `m`.
pub fn nu(p: &DeltaPresentation, v: &[BigInt]) -> Result<BigInt, DistError> {
    if p.modulus().len() != 3 {
        return Err(DistError::WrongShape(p.modulus().len()));
    }
    let mut s = BigInt::zero();
    for lv in p.levels().iter().filter(|l| l.support() == 3) {
        for x in &v[lv.offset..lv.offset + lv.order()] {
            s += x;
        }
    }
    Ok(s)
}

/// One family of generators `S(n, p^e, σ)` of `U` and the value the parity
/// functional takes on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCase {
    pub template: String,
    pub condition: String,
    pub value: String,
    /// Concrete instances `(description, value)`.
    pub instances: Vec<(String, i64)>,
    pub even: bool,
}

/// A degree `[K_{n′}:K_n]` from the order formula against the actual ray
/// class group orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCheck {
    pub step: String,
    pub formula: u64,
    pub actual: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheck {
    /// The functional counts coordinates at levels divisible by `p_1 p_2 p_3`
    /// and prime to 2; on `Δ_m` it agrees with `ν` since `m` is odd.
    pub levels_prime_to_2: bool,
    pub cases: Vec<ParityCase>,
    pub degree_checks: Vec<DegreeCheck>,
    /// A generator on which `ν` counted on every level divisible by
    /// `p_1 p_2 p_3` (including even ones) would be odd.
    pub unrestricted_counterexample: Option<String>,
    pub all_even: bool,
}

#[derive(Clone, Debug)]
pub struct TorsionCertificate {
    pub modulus: Modulus,
    pub g_prime_order: usize,
    /// `ε_i = 1` when `λ_i ∉ T_i × G′_j × G′_k`.
    pub epsilon: [bool; 3],
    /// `R` in the coordinates of `Δ_m`.
    pub r: Vec<BigInt>,
    pub in_kernel: bool,
    /// `R ∉ U(m)`, checked against the relation lattice; `None` when the
    /// presentation is too large for the check.
    pub outside_u_m: Option<bool>,
    pub nu_r: BigInt,
    pub parity: ParityCheck,
    pub conclusion: bool,
}

fn check_hypotheses(k: &QuadField, primes: &[PrimeIdeal]) -> Result<(), DistError> {
    if primes.len() != 3 {
        return Err(DistError::WrongShape(primes.len()));
    }
    if k.w() != 2 {
        return Err(DistError::HypothesisFailed(format!("w_K = {}, need w_K = 2", k.w())));
    }
    for p in primes {
        if p.norm() % 4 != 3 {
            return Err(DistError::HypothesisFailed(format!("N({}) = {} is not 3 mod 4", p.label(), p.norm())));
        }
        if k.is_principal(p.ideal()).is_none() {
            return Err(DistError::HypothesisFailed(format!("{} is not principal", p.label())));
        }
    }
    for i in 0..3 {
        for j in i + 1..3 {
            if primes[i].p() == primes[j].p() {
                return Err(DistError::HypothesisFailed(format!(
                    "{} and {} share the residue characteristic {}",
                    primes[i].label(),
                    primes[j].label(),
                    primes[i].p()
                )));
            }
        }
    }
    Ok(())
}

fn odd_part(fg: &FiniteGroup, elems: &[usize]) -> Vec<usize> {
    elems.iter().copied().filter(|&x| fg.order_of(x) % 2 == 1).collect()
}

/// `[K_{np^e}:K_n]` for `p ∤ n` with `μ_K → (O/n)^×` injective.
fn unramified_step(norm: u64, e: u32) -> u64 {
    norm.pow(e - 1) * (norm - 1)
}

fn order_of(k: &QuadField, factors: Vec<(PrimeIdeal, u32)>) -> Result<u64, DistError> {
    let m = Modulus::new(k.disc(), factors)?;
    Ok(RayClassGroup::new(k, &m)?.order() as u64)
}

/// Parity of the functional on every generator of `U`, by case analysis on
/// the level `n`, the prime `p` and `e`, instantiated on concrete primes.
fn parity_check(k: &QuadField, primes: &[PrimeIdeal], bound: u64) -> Result<ParityCheck, DistError> {
    let mut cases = Vec::new();
    let es = [1u32, 2, 3];
    let others: Vec<PrimeIdeal> = k.primes_up_to(bound).into_iter().filter(|q| !primes.contains(q)).collect();
    let odd_others: Vec<&PrimeIdeal> = others.iter().filter(|q| q.p() != 2).collect();
    let above_2: Vec<&PrimeIdeal> = others.iter().filter(|q| q.p() == 2).collect();

    let mut inst = Vec::new();
    for q in &odd_others {
        for &e in &es {
            inst.push((format!("{}^{e}", q.label()), -(unramified_step(q.norm(), e) as i64)));
        }
    }
    cases.push(ParityCase {
        template: "reluti".into(),
        condition: "p1p2p3 | n, 2 ∤ n, p ∤ 2n".into(),
        value: "ν(σ) - ν(λ^{-1}σ) - [K(np^e):K(n)] = -N(p)^{e-1}(N(p)-1)".into(),
        even: inst.iter().all(|(_, v)| v % 2 == 0),
        instances: inst,
    });

    cases.push(ParityCase {
        template: "reluti".into(),
        condition: "p1p2p3 | n, 2 ∤ n, p | 2".into(),
        value: "0 (np^e is even, so its coordinates are not counted)".into(),
        instances: above_2.iter().flat_map(|q| es.iter().map(move |e| (format!("{}^{e}", q.label()), 0))).collect(),
        even: true,
    });

    let mut inst = Vec::new();
    for p in primes {
        for &e in &es {
            inst.push((format!("{}^{e}", p.label()), -(unramified_step(p.norm(), e) as i64)));
        }
    }
    cases.push(ParityCase {
        template: "reluti".into(),
        condition: "n = p_j^a p_k^b n0 with p_i ∤ n, 2 ∤ n, p = p_i".into(),
        value: "-[K(np_i^e):K(n)] = -N(p_i)^{e-1}(N(p_i)-1)".into(),
        even: inst.iter().all(|(_, v)| v % 2 == 0),
        instances: inst,
    });

    cases.push(ParityCase {
        template: "reluti".into(),
        condition: "neither n nor np^e counted".into(),
        value: "0".into(),
        instances: vec![],
        even: true,
    });

    let mut inst = Vec::new();
    for p in primes.iter().chain(odd_others.iter().copied()) {
        for &e in &es {
            inst.push((format!("{}^{e}", p.label()), 1 - p.norm().pow(e) as i64));
        }
    }
    cases.push(ParityCase {
        template: "relred".into(),
        condition: "p1p2p3 | n, 2 ∤ n, p | n".into(),
        value: "1 - [K(np^e):K(n)] = 1 - N(p)^e".into(),
        even: inst.iter().all(|(_, v)| v % 2 == 0),
        instances: inst,
    });

    cases.push(ParityCase {
        template: "relred".into(),
        condition: "n not counted, p | n (np^e has the same support and parity)".into(),
        value: "0".into(),
        instances: vec![],
        even: true,
    });

    // the order formulas against actual groups, on small levels of the same shape
    let p1 = &primes[0];
    let base = order_of(k, vec![(p1.clone(), 1)])?;
    let mut degree_checks = Vec::new();
    for q in odd_others.iter().take(2).copied().chain(above_2.iter().copied()) {
        let up = order_of(k, vec![(p1.clone(), 1), (q.clone(), 1)])?;
        degree_checks.push(DegreeCheck {
            step: format!("{} -> {}{}", p1.label(), p1.label(), q.label()),
            formula: unramified_step(q.norm(), 1),
            actual: up / base,
        });
    }
    for p in primes {
        let lo = order_of(k, vec![(p.clone(), 1)])?;
        let hi = order_of(k, vec![(p.clone(), 2)])?;
        degree_checks.push(DegreeCheck {
            step: format!("{} -> {}^2", p.label(), p.label()),
            formula: p.norm(),
            actual: hi / lo,
        });
    }
    for (i, p) in primes.iter().enumerate() {
        let q = &primes[(i + 1) % 3];
        let lo = order_of(k, vec![(q.clone(), 1)])?;
        let hi = order_of(k, vec![(q.clone(), 1), (p.clone(), 1)])?;
        degree_checks.push(DegreeCheck {
            step: format!("{} -> {}{}", q.label(), q.label(), p.label()),
            formula: unramified_step(p.norm(), 1),
            actual: hi / lo,
        });
    }

    let unrestricted_counterexample = above_2.first().map(|q| {
        let d = unramified_step(q.norm(), 1);
        format!(
            "reluti S(n, {}, σ) with p1p2p3 | n and 2 ∤ n: ν = -[K(n{}):K(n)] = -{d}, odd",
            q.label(),
            q.label()
        )
    });
    let formulas_hold = degree_checks.iter().all(|c| c.formula == c.actual);
    let all_even = formulas_hold && cases.iter().all(|c| c.even);
    Ok(ParityCheck { levels_prime_to_2: true, cases, degree_checks, unrestricted_counterexample, all_even })
}

/// Builds the explicit element `R = s(G′) + x_1 + x_2 + x_3 ∈ ker(F_m)` and
/// certifies `Tor(A_m) ≠ 0` by the parity of `ν`.
pub fn torsex_certificate(k: &QuadField, primes: &[PrimeIdeal]) -> Result<TorsionCertificate, DistError> {
    check_hypotheses(k, primes)?;
    let m = Modulus::new(k.disc(), primes.iter().map(|p| (p.clone(), 1)).collect())?;
    let pres = build_presentation(k, &m)?;
    let top_i = pres.levels().len() - 1;
    let top = pres.top();
    let fg = top.group.finite_group();
    let order = top.order();

    let unit_level = pres.level_index(&[0, 0, 0]).expect("unit level");
    let gamma = fibres(&pres.transition(top_i, unit_level)?, pres.levels()[unit_level].order()).swap_remove(0);
    let g_prime = odd_part(fg, &gamma);

    let mut lower = Vec::new();
    let mut inertia = Vec::new();
    let mut lambda = Vec::new();
    let mut t = Vec::new();
    for (i, p) in primes.iter().enumerate() {
        let mut exps = vec![1u32; 3];
        exps[i] = 0;
        let li = pres.level_index(&exps).expect("divisor level");
        let lg = &pres.levels()[li].group;
        let ti = top.group.inertia_in(p, lg)?;
        let two: Vec<usize> = ti.iter().copied().filter(|&x| fg.order_of(x) == 2).collect();
        if two.len() != 1 {
            return Err(DistError::HypothesisFailed(format!(
                "inertia 2-Sylow of {} has {} involutions, expected 1",
                p.label(),
                two.len()
            )));
        }
        let lam = top.group.frobenius_in(p, Some(lg))?.rep;
        if gamma.binary_search(&lam).is_err() {
            return Err(DistError::HypothesisFailed(format!("Frobenius of {} is not in Gal(K_m/H)", p.label())));
        }
        t.push(two[0]);
        lower.push(li);
        inertia.push(ti);
        lambda.push(lam);
    }
    if t[2] != fg.add(t[0], t[1]) {
        return Err(DistError::HypothesisFailed("τ_3 ≠ τ_1 τ_2 in the inertia 2-Sylows".into()));
    }
    let gp: Vec<Vec<usize>> = inertia.iter().map(|ti| odd_part(fg, ti)).collect();
    if gp.iter().map(Vec::len).product::<usize>() != g_prime.len() {
        return Err(DistError::HypothesisFailed("G′ is not the product of the G′_i".into()));
    }

    // 2 = (1+τ_1) + (1+τ_2) - τ_1(1+τ_3) in Z[G_m]
    let one = GroupRingElt::one(order);
    let c = [one.clone(), one.clone(), GroupRingElt::basis(order, t[0]).neg()];
    let two = (0..3).fold(GroupRingElt::zero(order), |acc, i| {
        acc.add(&c[i].mul(&one.add(&GroupRingElt::basis(order, t[i])), fg))
    });
    assert_eq!(two, one.scale(&BigInt::from(2)));

    let mut r = vec![BigInt::zero(); pres.ngens()];
    for &g in &g_prime {
        r[top.offset + g] += 1;
    }
    let mut epsilon = [false; 3];
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        let gens: Vec<usize> = inertia[i].iter().chain(&gp[j]).chain(&gp[l]).copied().collect();
        let phi = fg.subgroup(&gens);
        epsilon[i] = phi.binary_search(&lambda[i]).is_err();
        if !epsilon[i] {
            continue;
        }
        let jk = fg.subgroup(&gp[j].iter().chain(&gp[l]).copied().collect::<Vec<_>>());
        let y = c[i].mul(&GroupRingElt::trace(order, &jk).translate(fg.neg(lambda[i]), fg), fg);
        let lv = &pres.levels()[lower[i]];
        let pushed = y.push(&pres.transition(top_i, lower[i])?, lv.order());
        for (s, x) in pushed.scaled_coeffs(&BigInt::one()).into_iter().enumerate() {
            r[lv.offset + s] += x;
        }
    }

    let in_kernel = iwasawa_image(&pres, &r)?.is_zero();
    let outside_u_m = (pres.ngens() <= LATTICE_CHECK_LIMIT)
        .then(|| !Lattice::from_matrix(pres.relations()).contains(&r));
    let nu_r = nu(&pres, &r)?;
    let parity = parity_check(k, primes, 50)?;
    let conclusion = in_kernel && nu_r.is_odd() && parity.all_even;
    Ok(TorsionCertificate {
        modulus: m,
        g_prime_order: g_prime.len(),
        epsilon,
        r,
        in_kernel,
        outside_u_m,
        nu_r,
        parity,
        conclusion,
    })
}

/// Triples of principal primes of norm `≡ 3 (mod 4)` and at most `bound`,
/// with distinct residue characteristics.
pub fn search_torsex(k: &QuadField, bound: u64) -> Vec<[PrimeIdeal; 3]> {
    if k.w() != 2 {
        return Vec::new();
    }
    let cands: Vec<PrimeIdeal> = k
        .primes_up_to(bound)
        .into_iter()
        .filter(|p| p.norm() % 4 == 3 && k.is_principal(p.ideal()).is_some())
        .collect();
    let mut out = Vec::new();
    for a in 0..cands.len() {
        for b in a + 1..cands.len() {
            for c in b + 1..cands.len() {
                let (x, y, z) = (&cands[a], &cands[b], &cands[c]);
                if x.p() != y.p() && y.p() != z.p() && x.p() != z.p() {
                    out.push([x.clone(), y.clone(), z.clone()]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(t: &[PrimeIdeal; 3]) -> Vec<String> {
        t.iter().map(PrimeIdeal::label).collect()
    }

    fn triple(k: &QuadField, specs: [&str; 3]) -> Vec<PrimeIdeal> {
        specs.iter().map(|s| PrimeIdeal::parse(k, s).unwrap()).collect()
    }

    #[test]
    fn search_q7() {
        let k = QuadField::new(7).unwrap();
        let found = search_torsex(&k, 25);
        assert!(found.iter().any(|t| {
            let mut ps: Vec<u64> = t.iter().map(PrimeIdeal::p).collect();
            ps.sort();
            ps == [7, 11, 23]
        }));
        for t in &found {
            assert!(t.iter().all(|p| p.norm() % 4 == 3), "{:?}", labels(t));
        }
    }

    #[test]
    fn search_q5_empty() {
        let k = QuadField::new(5).unwrap();
        assert!(search_torsex(&k, 500).is_empty());
    }

    #[test]
    fn search_q15() {
        let k = QuadField::new(15).unwrap();
        let found = search_torsex(&k, 80);
        assert!(found.iter().any(|t| t.iter().map(PrimeIdeal::p).collect::<Vec<_>>() == [19, 31, 79]));
    }

    #[test]
    fn hypothesis_failures() {
        let k = QuadField::new(5).unwrap();
        let err = torsex_certificate(&k, &triple(&k, ["p:3:0", "p:7:0", "p:23:0"])).unwrap_err();
        assert!(matches!(err, DistError::HypothesisFailed(_)), "{err}");
        let k = QuadField::new(7).unwrap();
        let err = torsex_certificate(&k, &triple(&k, ["p:7", "p:11:0", "p:29:0"])).unwrap_err();
        assert!(matches!(err, DistError::HypothesisFailed(ref s) if s.contains("3 mod 4")));
        let err = torsex_certificate(&k, &triple(&k, ["p:7", "p:11:0", "p:11:1"])).unwrap_err();
        assert!(matches!(err, DistError::HypothesisFailed(_)));
        let k = QuadField::new(3).unwrap();
        let err = torsex_certificate(&k, &triple(&k, ["p:7:0", "p:13:0", "p:19:0"])).unwrap_err();
        assert!(matches!(err, DistError::HypothesisFailed(ref s) if s.contains("w_K")));
    }

    #[test]
    fn nu_shape() {
        let k = QuadField::new(7).unwrap();
        let p = build_presentation(&k, &Modulus::parse(&k, "p:7,p:11:0").unwrap()).unwrap();
        assert_eq!(nu(&p, &vec![BigInt::zero(); p.ngens()]), Err(DistError::WrongShape(2)));
    }

    #[test]
    fn nu_on_presentation_rows_is_even() {
        let k = QuadField::new(7).unwrap();
        let p = build_presentation(&k, &Modulus::parse(&k, "p:7,p:11:0,p:23:0").unwrap()).unwrap();
        let mut v = vec![BigInt::zero(); p.ngens()];
        v[p.top().offset + 5] = BigInt::one();
        assert_eq!(nu(&p, &v).unwrap(), BigInt::one());
        for row in p.relations().to_rows() {
            assert!(nu(&p, &row).unwrap().is_even());
        }
    }

    #[test]
    fn certificate_q7() {
        let k = QuadField::new(7).unwrap();
        let c = torsex_certificate(&k, &triple(&k, ["p:7", "p:11:0", "p:23:0"])).unwrap();
        assert_eq!(c.g_prime_order, 165);
        assert!(c.in_kernel);
        assert_eq!(c.outside_u_m, Some(true));
        assert_eq!(c.nu_r, BigInt::from(165));
        assert!(c.parity.all_even, "{:?}", c.parity);
        assert!(c.parity.degree_checks.iter().all(|d| d.formula == d.actual));
        // 2 splits in Q(√-7): a prime of norm 2 gives an odd value if even levels were counted
        assert!(c.parity.unrestricted_counterexample.is_some());
        assert!(c.conclusion);
    }
}

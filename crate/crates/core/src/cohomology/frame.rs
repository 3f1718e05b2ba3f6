use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;

use crate::groupring::coset_rows;
use crate::zlinalg::{cokernel, AbGroup, FiniteGroup, IntMatrix};

use super::{tate_cyclic, CohomologyError, CyclicModule, Parity};

/// The `ℓ`-part frame: `Λ = Z[⟨τ_1⟩ × … × ⟨τ_m⟩]` with `o(τ_i) = g_i` for
/// `i < m`, `o(τ_m) = g_m/ℓ^r`, and `j = Σ (g_i/g_m) τ_i` (additively).
///
/// Indices are 0-based; the last index `m - 1` is the prime whose inertia
/// group is `⟨j⟩`.
#[derive(Clone, Debug)]
pub struct SylowFrameSynthetic {
    ell: u64,
    g: Vec<u64>,
    r: u32,
    group: FiniteGroup,
    j: usize,
}

fn is_power_of(x: u64, ell: u64) -> bool {
    let mut x = x;
    while x > 1 && x.is_multiple_of(ell) {
        x /= ell;
    }
    x == 1
}

impl SylowFrameSynthetic {
    pub fn new(ell: u64, g: Vec<u64>, r: u32) -> Result<Self, CohomologyError> {
        let bad = |s: String| Err(CohomologyError::InvalidFrame(s));
        if ell < 2 || (2..ell).take_while(|d| d * d <= ell).any(|d| ell.is_multiple_of(d)) {
            return bad(format!("{ell} is not prime"));
        }
        let Some(&gm) = g.last() else {
            return bad("empty g-vector".into());
        };
        if let Some(x) = g.iter().find(|&&x| x < ell || !is_power_of(x, ell)) {
            return bad(format!("{x} is not a positive power of {ell}"));
        }
        if g.iter().any(|&x| x < gm) {
            return bad(format!("g_m = {gm} exceeds some g_i"));
        }
        let lr = ell.checked_pow(r).filter(|lr| gm % lr == 0);
        let Some(lr) = lr else {
            return bad(format!("{ell}^{r} does not divide g_m = {gm}"));
        };
        let m = g.len();
        let mut moduli: Vec<u64> = g[..m - 1].to_vec();
        moduli.push(gm / lr);
        let group = FiniteGroup::from_moduli(moduli);
        let coeffs: Vec<u64> = (0..m).map(|i| if i + 1 < m { g[i] / gm } else { 1 }).collect();
        let j = group.index(&coeffs);
        if m >= 2 && group.order_of(j) != gm {
            return bad(format!("j has order {}, expected {gm}", group.order_of(j)));
        }
        Ok(SylowFrameSynthetic { ell, g, r, group, j })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn g(&self) -> &[u64] {
        &self.g
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn tau(&self, i: usize) -> usize {
        self.group.generator(i)
    }

    /// `⟨τ_i⟩`.
    pub fn tau_subgroup(&self, i: usize) -> Vec<usize> {
        self.group.subgroup(&[self.tau(i)])
    }

    /// The inertia `ℓ`-subgroup of prime `i`: `⟨τ_i⟩`, or `⟨j⟩` for the last.
    pub fn inertia(&self, i: usize) -> Vec<usize> {
        if i + 1 == self.m() {
            self.group.subgroup(&[self.j])
        } else {
            self.tau_subgroup(i)
        }
    }

    /// `Z/ℓ^r` for odd `m ≥ 3`, trivial otherwise.
    pub fn expected_torsion(&self) -> AbGroup {
        let m = self.m();
        if m >= 3 && m % 2 == 1 {
            AbGroup::cyclic(self.ell.pow(self.r))
        } else {
            AbGroup::trivial()
        }
    }

    fn check_indices(&self, p: &BTreeSet<usize>) -> Result<(), CohomologyError> {
        match p.iter().find(|&&i| i >= self.m()) {
            Some(i) => Err(CohomologyError::InvalidIndexSet(format!("index {i} out of range for m = {}", self.m()))),
            None => Ok(()),
        }
    }
}

/// `Z[G]` modulo the ideal generated by `s(⟨τ_i⟩)` for `i` in `coords`, and
/// by `s(⟨j⟩)` when `j` is set.
#[derive(Clone, Debug)]
pub struct LambdaQuotient {
    group: FiniteGroup,
    coords: Vec<usize>,
    j: Option<usize>,
}

impl LambdaQuotient {
    fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.coords.iter().map(|&i| self.group.subgroup(&[self.group.generator(i)])).collect();
        if let Some(j) = self.j {
            out.push(self.group.subgroup(&[j]));
        }
        out
    }

    /// Rows spanning the ideal, over the elements of `G`.
    pub fn relation_rows(&self) -> Vec<Vec<(usize, BigInt)>> {
        let all: Vec<usize> = (0..self.group.order()).collect();
        coset_rows(&self.group, &all, &self.subgroups())
    }

    pub fn structure(&self) -> AbGroup {
        let n = self.group.order();
        cokernel(&IntMatrix::from_sparse_rows(n, self.relation_rows()), n)
    }

    pub fn torsion(&self) -> AbGroup {
        self.structure().torsion()
    }

    /// Basis of the quotient when only coordinate traces are killed: the
    /// elements whose `i`-th coordinate is below `o(τ_i) - 1` for each
    /// killed `i`.
    fn normal_basis(&self) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut index = vec![None; self.group.order()];
        let mut basis = Vec::new();
        for x in 0..self.group.order() {
            let c = self.group.coords(x);
            if self.coords.iter().all(|&i| c[i] + 1 < self.group.moduli()[i]) {
                index[x] = Some(basis.len());
                basis.push(x);
            }
        }
        (basis, index)
    }

    /// Image of `e_x` in the normal basis: `τ_i^{o-1} ≡ -Σ_{k<o-1} τ_i^k`.
    fn reduce(&self, x: usize, index: &[Option<usize>]) -> Vec<(usize, BigInt)> {
        let mut terms: Vec<(Vec<u64>, BigInt)> = vec![(self.group.coords(x), BigInt::one())];
        for &i in &self.coords {
            let top = self.group.moduli()[i] - 1;
            let mut next = Vec::with_capacity(terms.len());
            for (c, a) in terms {
                if c[i] == top {
                    for k in 0..top {
                        let mut d = c.clone();
                        d[i] = k;
                        next.push((d, -&a));
                    }
                } else {
                    next.push((c, a));
                }
            }
            terms = next;
        }
        terms.into_iter().map(|(c, a)| (index[self.group.index(&c)].expect("reduced element"), a)).collect()
    }

    /// The quotient as a module over `⟨σ⟩`, acting by translation.
    pub fn cyclic_module(&self, sigma: usize) -> Result<CyclicModule, CohomologyError> {
        let order = self.group.order_of(sigma);
        if self.j.is_some() {
            let n = self.group.order();
            let rels: Vec<Vec<BigInt>> =
                IntMatrix::from_sparse_rows(n, self.relation_rows()).to_rows();
            let rows = (0..n).map(|x| vec![(self.group.add(x, sigma), BigInt::one())]).collect();
            return CyclicModule::new(n, &rels, IntMatrix::from_sparse_rows(n, rows), order);
        }
        let (basis, index) = self.normal_basis();
        let rows = basis.iter().map(|&x| self.reduce(self.group.add(x, sigma), &index)).collect();
        CyclicModule::free(IntMatrix::from_sparse_rows(basis.len(), rows), order)
    }

    /// `Z`-rank when only coordinate traces are killed.
    pub fn free_rank(&self) -> Option<usize> {
        self.j.is_none().then(|| self.normal_basis().0.len())
    }
}

/// `(Λ/Λ(P), Λ/Θ(P))`. `Λ(P)` is generated by `s(⟨τ_i⟩)`, `i ∈ P`; `Θ(P)`
/// uses `s(⟨j⟩)` in place of `s(⟨τ_m⟩)`, so the two agree when `m ∉ P`.
pub fn build_lambda_quotients(
    f: &SylowFrameSynthetic,
    p: &BTreeSet<usize>,
) -> Result<(LambdaQuotient, LambdaQuotient), CohomologyError> {
    f.check_indices(p)?;
    let last = f.m() - 1;
    let lambda = LambdaQuotient { group: f.group.clone(), coords: p.iter().copied().collect(), j: None };
    let theta = if p.contains(&last) {
        let coords = p.iter().copied().filter(|&i| i != last).collect();
        LambdaQuotient { group: f.group.clone(), coords, j: Some(f.j) }
    } else {
        lambda.clone()
    };
    Ok((lambda, theta))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorH2Check {
    /// `Tor(Λ/Θ(P ∪ {m}))`, from the Smith form.
    pub tor: AbGroup,
    /// `Ĥ^even(⟨j⟩, Λ/Λ(P))`, from kernels and images.
    pub h2: AbGroup,
    pub agree: bool,
}

/// Compares `Tor(Λ/Θ(P ∪ {m}))` with `H²(⟨j⟩, Λ/Λ(P))` for `m ∉ P`.
pub fn verify_tor_h2(f: &SylowFrameSynthetic, p: &BTreeSet<usize>) -> Result<TorH2Check, CohomologyError> {
    let last = f.m() - 1;
    if p.contains(&last) {
        return Err(CohomologyError::InvalidIndexSet(format!("P contains the last index {last}")));
    }
    let mut p_top = p.clone();
    p_top.insert(last);
    let (_, theta) = build_lambda_quotients(f, &p_top)?;
    let tor = theta.torsion();
    let (lambda, _) = build_lambda_quotients(f, p)?;
    let h2 = tate_cyclic(&lambda.cyclic_module(f.j)?, Parity::Even)?;
    Ok(TorH2Check { agree: tor == h2, tor, h2 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpqCheck {
    pub d_order: u64,
    pub even: AbGroup,
    pub odd: AbGroup,
    pub vanishes: bool,
}

/// Tate groups of `D_Q = ⟨G^ℓ_{p_i} : i ∉ Q⟩` on `Λ/Λ(P)`, for `P ⊊ Q` and
/// `m ∉ Q`. Only cyclic `D_Q` is handled.
pub fn hpq_spot_check(
    f: &SylowFrameSynthetic,
    p: &BTreeSet<usize>,
    q: &BTreeSet<usize>,
) -> Result<HpqCheck, CohomologyError> {
    f.check_indices(q)?;
    let last = f.m() - 1;
    if q.contains(&last) {
        return Err(CohomologyError::InvalidIndexSet(format!("Q contains the last index {last}")));
    }
    if !(p.is_subset(q) && p.len() < q.len()) {
        return Err(CohomologyError::InvalidIndexSet("P is not a proper subset of Q".into()));
    }
    let mut gens: Vec<usize> = (0..last).filter(|i| !q.contains(i)).map(|i| f.tau(i)).collect();
    gens.push(f.j);
    let d = f.group.subgroup(&gens);
    let structure = f.group.subgroup_structure(&d);
    if structure.invariant_factors().len() > 1 {
        return Err(CohomologyError::NotCyclic(format!("{structure}")));
    }
    let d_order = d.len() as u64;
    let gen = *d.iter().find(|&&x| f.group.order_of(x) == d_order).expect("cyclic group has a generator");
    let (lambda, _) = build_lambda_quotients(f, p)?;
    let module = lambda.cyclic_module(gen)?;
    let even = tate_cyclic(&module, Parity::Even)?;
    let odd = tate_cyclic(&module, Parity::Odd)?;
    Ok(HpqCheck { d_order, vanishes: even.is_trivial() && odd.is_trivial(), even, odd })
}

/// `Ĥ^{m+1}(⟨j⟩, Λ^{⟨τ_1, …, τ_{m-1}⟩})`, the last link of the chain, read off
/// the parity of `m + 1`. The invariants are the permutation module on
/// `G/⟨τ_1, …, τ_{m-1}⟩ ≅ ⟨τ_m⟩`, where `j` acts as `τ_m`.
pub fn terminal_group(f: &SylowFrameSynthetic) -> Result<AbGroup, CohomologyError> {
    let m = f.m();
    if m < 2 {
        return Err(CohomologyError::InvalidFrame("the chain needs m >= 2".into()));
    }
    let n = f.group.moduli()[m - 1] as usize;
    let rows: Vec<Vec<(usize, BigInt)>> = (0..n).map(|x| vec![((x + 1) % n, BigInt::one())]).collect();
    let module = CyclicModule::free(IntMatrix::from_sparse_rows(n, rows), f.g[m - 1])?;
    tate_cyclic(&module, Parity::of(m as u64 + 1))
}

/// The exponents `r` with `ℓ^r` dividing some `w_K` of an imaginary
/// quadratic field (`w_K ∈ {2, 4, 6}`).
pub fn admissible_r(ell: u64) -> Vec<u32> {
    (1..)
        .take_while(|&r| [2u64, 4, 6].iter().any(|w| w % ell.pow(r) == 0))
        .collect()
}

/// Every `(g_1, …, g_m)` with entries in `{ℓ, ℓ²}` and `g_m ≤ g_i`.
pub fn g_vectors(ell: u64, m: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let g: Vec<u64> = (0..m).map(|i| if mask >> i & 1 == 1 { ell * ell } else { ell }).collect();
        if g.iter().all(|&x| x >= g[m - 1]) {
            out.push(g);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub ell: u64,
    pub r: u32,
    pub g: Vec<u64>,
    /// `Tor(Λ/Θ({1..m}))`.
    pub torsion: AbGroup,
    pub expected: AbGroup,
    /// Number of index sets `P ⊆ {1..m-1}` checked by [`verify_tor_h2`].
    pub tor_h2_cases: usize,
    pub tor_h2_agree: bool,
    /// [`terminal_group`], for `m >= 2`.
    pub terminal: Option<AbGroup>,
    pub verdict: bool,
}

/// Runs the parity law, every `verify_tor_h2` case and the terminal link
/// over all frames with `m ≤ max_m`, `g_i ∈ {ℓ, ℓ²}` and the given `r`.
pub fn toralg_sweep(ell: u64, max_m: usize, rs: &[u32]) -> Result<Vec<SweepRow>, CohomologyError> {
    let mut rows = Vec::new();
    for m in 1..=max_m {
        for g in g_vectors(ell, m) {
            for &r in rs {
                if g[m - 1] % ell.pow(r) != 0 {
                    continue;
                }
                let f = SylowFrameSynthetic::new(ell, g.clone(), r)?;
                let all: BTreeSet<usize> = (0..m).collect();
                let torsion = build_lambda_quotients(&f, &all)?.1.torsion();
                let expected = f.expected_torsion();
                let mut cases = 0;
                let mut agree = true;
                for mask in 0u32..(1 << (m - 1)) {
                    let p: BTreeSet<usize> = (0..m - 1).filter(|i| mask >> i & 1 == 1).collect();
                    cases += 1;
                    agree &= verify_tor_h2(&f, &p)?.agree;
                }
                let terminal = if m >= 2 { Some(terminal_group(&f)?) } else { None };
                let terminal_ok = terminal.as_ref().is_none_or(|t| *t == torsion);
                let verdict = torsion == expected && agree && terminal_ok;
                rows.push(SweepRow { ell, r, g: g.clone(), torsion, expected, tor_h2_cases: cases, tor_h2_agree: agree, terminal, verdict });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn frame_validation() {
        assert!(SylowFrameSynthetic::new(4, vec![4], 1).is_err());
        assert!(SylowFrameSynthetic::new(2, vec![6], 1).is_err());
        assert!(SylowFrameSynthetic::new(2, vec![2, 4], 1).is_err());
        assert!(SylowFrameSynthetic::new(2, vec![4, 2], 2).is_err());
        let f = SylowFrameSynthetic::new(3, vec![9, 3], 1).unwrap();
        assert_eq!(f.group().order(), 9);
        assert_eq!(f.group().order_of(f.j()), 3);
    }

    #[test]
    fn lambda_of_empty_set_is_free() {
        let f = SylowFrameSynthetic::new(2, vec![2, 2, 2], 1).unwrap();
        let (l, t) = build_lambda_quotients(&f, &set(&[])).unwrap();
        assert_eq!(l.structure(), AbGroup::free(4));
        assert_eq!(t.structure(), AbGroup::free(4));
    }

    #[test]
    fn theta_equals_lambda_off_the_last_index() {
        let f = SylowFrameSynthetic::new(3, vec![9, 3, 3], 1).unwrap();
        let (l, t) = build_lambda_quotients(&f, &set(&[0, 1])).unwrap();
        assert_eq!(l.relation_rows(), t.relation_rows());
        assert_eq!(l.structure().rank(), l.free_rank().unwrap());
    }

    #[test]
    fn parity_law_on_small_frames() {
        let f = SylowFrameSynthetic::new(2, vec![2, 2, 2], 1).unwrap();
        let (_, t) = build_lambda_quotients(&f, &set(&[0, 1, 2])).unwrap();
        assert_eq!(t.torsion(), AbGroup::cyclic(2));
        for g in [vec![2, 2], vec![4, 2], vec![3, 3], vec![9, 3]] {
            let ell = g[1];
            let f = SylowFrameSynthetic::new(ell, g, 1).unwrap();
            let (_, t) = build_lambda_quotients(&f, &set(&[0, 1])).unwrap();
            assert!(t.torsion().is_trivial());
        }
    }

    #[test]
    fn tor_h2_examples() {
        let f = SylowFrameSynthetic::new(2, vec![2, 2, 2], 1).unwrap();
        let c = verify_tor_h2(&f, &set(&[0, 1])).unwrap();
        assert_eq!(c.tor, AbGroup::cyclic(2));
        assert!(c.agree);
        let c = verify_tor_h2(&f, &set(&[])).unwrap();
        assert!(c.tor.is_trivial() && c.agree);
        for ell in [2, 3] {
            let f = SylowFrameSynthetic::new(ell, vec![ell, ell], 1).unwrap();
            let c = verify_tor_h2(&f, &set(&[0])).unwrap();
            assert!(c.tor.is_trivial() && c.h2.is_trivial());
        }
        assert!(matches!(verify_tor_h2(&f, &set(&[2])), Err(CohomologyError::InvalidIndexSet(_))));
    }

    #[test]
    fn hpq_examples() {
        let f = SylowFrameSynthetic::new(2, vec![2, 2, 2], 1).unwrap();
        let c = hpq_spot_check(&f, &set(&[0]), &set(&[0, 1])).unwrap();
        assert_eq!(c.d_order, 2);
        assert!(c.vanishes);
        let f = SylowFrameSynthetic::new(2, vec![4, 4, 2], 1).unwrap();
        assert!(hpq_spot_check(&f, &set(&[]), &set(&[0, 1])).unwrap().vanishes);
        let f = SylowFrameSynthetic::new(3, vec![3, 3], 1).unwrap();
        assert!(hpq_spot_check(&f, &set(&[]), &set(&[0])).unwrap().vanishes);
        // D_Q = ⟨τ_1, j⟩ ≅ C_2 × C_2
        let f = SylowFrameSynthetic::new(2, vec![2, 2, 2], 1).unwrap();
        assert!(matches!(hpq_spot_check(&f, &set(&[]), &set(&[1])), Err(CohomologyError::NotCyclic(_))));
        assert!(matches!(hpq_spot_check(&f, &set(&[0]), &set(&[0])), Err(CohomologyError::InvalidIndexSet(_))));
    }

    #[test]
    fn lambda_quotients_are_free_over_the_remaining_taus() {
        for (ell, g) in [(2, vec![2, 2, 2]), (2, vec![4, 2, 2]), (3, vec![3, 3, 3]), (2, vec![4, 4, 4])] {
            let f = SylowFrameSynthetic::new(ell, g.clone(), 1).unwrap();
            let m = f.m();
            for mask in 0u32..(1 << m) {
                let p: BTreeSet<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                let (l, _) = build_lambda_quotients(&f, &p).unwrap();
                for k in (0..m).filter(|k| !p.contains(k)) {
                    let tau = f.tau(k);
                    if f.group().order_of(tau) == 1 {
                        continue;
                    }
                    let module = l.cyclic_module(tau).unwrap();
                    for par in [Parity::Even, Parity::Odd] {
                        assert!(tate_cyclic(&module, par).unwrap().is_trivial(), "{g:?} P={p:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn terminal_parity() {
        let f = SylowFrameSynthetic::new(2, vec![4, 4, 4], 1).unwrap();
        assert_eq!(terminal_group(&f).unwrap(), AbGroup::cyclic(2));
        let f = SylowFrameSynthetic::new(2, vec![4, 4, 4, 4], 2).unwrap();
        assert!(terminal_group(&f).unwrap().is_trivial());
        let f = SylowFrameSynthetic::new(3, vec![9, 9, 9], 1).unwrap();
        assert_eq!(terminal_group(&f).unwrap(), AbGroup::cyclic(3));
    }

    #[test]
    fn admissible_exponents() {
        assert_eq!(admissible_r(2), vec![1, 2]);
        assert_eq!(admissible_r(3), vec![1]);
        assert_eq!(g_vectors(2, 2), vec![vec![2, 2], vec![4, 2], vec![4, 4]]);
    }

    #[test]
    fn sweep_ell_2_up_to_3() {
        let rows = toralg_sweep(2, 3, &admissible_r(2)).unwrap();
        assert!(rows.iter().all(|r| r.verdict), "{rows:?}");
    }
}

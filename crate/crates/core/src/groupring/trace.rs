use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::quadfield::{Modulus, QuadField};
use crate::rayclass::RayClassGroup;
use crate::zlinalg::{cokernel, AbGroup, FiniteGroup, IntMatrix};

use super::GroupRingError;

/// Structure of `Z[G]/S` and the exponent `z` of its torsion subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceQuotient {
    pub quotient: AbGroup,
    pub z: BigInt,
}

impl TraceQuotient {
    fn from_group(quotient: AbGroup) -> Self {
        let t = quotient.torsion_exponent();
        let z = if t.is_zero() { BigInt::one() } else { t };
        TraceQuotient { quotient, z }
    }
}

/// Indicator rows of the distinct cosets `σT` of each subgroup, over the
/// positions of `ambient` (a sorted subgroup of `g` containing every `T`).
/// These rows span the ideal generated by the traces `s(T)` in `Z[ambient]`.
pub fn coset_rows(g: &FiniteGroup, ambient: &[usize], subgroups: &[Vec<usize>]) -> Vec<Vec<(usize, BigInt)>> {
    let pos = |x: usize| ambient.binary_search(&x).expect("coset leaves the ambient subgroup");
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    for t in subgroups {
        for &sigma in ambient {
            let mut coset: Vec<usize> = t.iter().map(|&x| pos(g.add(sigma, x))).collect();
            coset.sort_unstable();
            if seen.insert(coset.clone()) {
                rows.push(coset.into_iter().map(|i| (i, BigInt::one())).collect());
            }
        }
    }
    rows
}

/// `Z[A]/S` where `A` is a subgroup of `g` and `S` is generated by the
/// traces of the given subgroups of `A`.
pub fn quotient_on_subgroup(g: &FiniteGroup, ambient: &[usize], subgroups: &[Vec<usize>]) -> TraceQuotient {
    let rows = coset_rows(g, ambient, subgroups);
    let n = ambient.len();
    TraceQuotient::from_group(cokernel(&IntMatrix::from_sparse_rows(n, rows), n))
}

/// `Z[G_n]/S(n)` and `z_n`, with `S(n)` generated by the inertia traces of
/// every prime dividing `n`.
pub fn trace_ideal_quotient(g: &RayClassGroup) -> Result<TraceQuotient, GroupRingError> {
    let inertia =
        g.modulus().primes().iter().map(|p| g.inertia(p)).collect::<Result<Vec<_>, _>>()?;
    let all: Vec<usize> = (0..g.order()).collect();
    Ok(quotient_on_subgroup(g.finite_group(), &all, &inertia))
}

/// Torsion of `Z[Γ_n]/S̃(n)`, `Γ_n = ker(G_n → G_(1))`, with `S̃(n)` generated
/// inside `Z[Γ_n]` by the inertia traces.
pub fn gal_h_quotient_torsion(k: &QuadField, n: &Modulus) -> Result<AbGroup, GroupRingError> {
    let w = k.w();
    if !n.is_coprime_to_int(w as u64) {
        return Err(GroupRingError::NotCoprimeToW(n.spec(), w));
    }
    let g = RayClassGroup::new(k, n)?;
    let one = RayClassGroup::new(k, &Modulus::unit(k.disc()))?;
    let gamma = FiniteGroup::kernel(&g.transition(&one)?);
    let inertia = n.primes().iter().map(|p| g.inertia(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(quotient_on_subgroup(g.finite_group(), &gamma, &inertia).quotient.torsion())
}

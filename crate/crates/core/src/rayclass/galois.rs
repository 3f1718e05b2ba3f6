use crate::zlinalg::FiniteGroup;

use super::{RayClassGroup, RayError};

fn ell_part(n: u64, ell: u64) -> u64 {
    let mut q = 1;
    let mut n = n;
    while n.is_multiple_of(ell) {
        n /= ell;
        q *= ell;
    }
    q
}

/// `Γ = Gal(K_m/H) = G′ × G_ℓ` with the Sylow frame `τ_1, ..., τ_m`.
///
/// Frame indices follow `order`: `order[i]` is the position in the modulus
/// of the prime playing the role of `p_{i+1}`, the last one having the
/// smallest inertia `ℓ`-Sylow.
#[derive(Clone, Debug)]
pub struct GaloisOverH {
    pub ell: u64,
    /// `ℓ^r`, the largest power of `ℓ` dividing `w_K`.
    pub ell_r: u64,
    pub gamma: Vec<usize>,
    pub g_prime: Vec<usize>,
    pub g_ell: Vec<usize>,
    /// Inertia subgroups `T_{p_i}(m)` in modulus order.
    pub inertia: Vec<Vec<usize>>,
    /// `G′_i`, the `ℓ′`-part of each inertia subgroup, in modulus order.
    pub g_prime_i: Vec<Vec<usize>>,
    /// Inertia `ℓ`-Sylows in modulus order.
    pub g_ell_i: Vec<Vec<usize>>,
    pub order: Vec<usize>,
    /// `g_i` in frame order.
    pub g: Vec<u64>,
    /// `τ_i` in frame order; empty when `G_ℓ` is trivial.
    pub tau: Vec<usize>,
    pub j: usize,
}

impl RayClassGroup {
    /// Splits `Γ` and builds the frame, given the inertia subgroups of the
    /// primes of the modulus (in modulus order) and the kernel `Γ`.
    pub fn galois_over_h_from(
        &self,
        ell: u64,
        gamma: Vec<usize>,
        inertia: Vec<Vec<usize>>,
    ) -> Result<GaloisOverH, RayError> {
        let fg = self.finite_group();
        let is_ell = |x: usize| ell_part(fg.order_of(x), ell) == fg.order_of(x);
        let is_prime_to = |x: usize| !fg.order_of(x).is_multiple_of(ell);
        let g_prime: Vec<usize> = gamma.iter().copied().filter(|&x| is_prime_to(x)).collect();
        let g_ell: Vec<usize> = gamma.iter().copied().filter(|&x| is_ell(x)).collect();
        assert_eq!(g_prime.len() * g_ell.len(), gamma.len(), "Γ is not the product of its Sylow parts");
        let g_prime_i: Vec<Vec<usize>> =
            inertia.iter().map(|t| t.iter().copied().filter(|&x| is_prime_to(x)).collect()).collect();
        let g_ell_i: Vec<Vec<usize>> =
            inertia.iter().map(|t| t.iter().copied().filter(|&x| is_ell(x)).collect()).collect();
        let w = self.field().w() as u64;
        let ell_r = ell_part(w, ell);
        let mut out = GaloisOverH {
            ell,
            ell_r,
            gamma,
            g_prime,
            g_ell,
            inertia,
            g_prime_i,
            g_ell_i,
            order: Vec::new(),
            g: Vec::new(),
            tau: Vec::new(),
            j: 0,
        };
        let m = out.g_ell_i.len();
        if out.g_ell.len() == 1 || m == 0 {
            return Ok(out);
        }
        // Cyclic generators of the inertia Sylows.
        let mut gens = Vec::with_capacity(m);
        for (i, s) in out.g_ell_i.iter().enumerate() {
            let g = s.iter().copied().find(|&x| fg.order_of(x) == s.len() as u64).ok_or_else(|| {
                RayError::FrameUnavailable(format!("inertia {ell}-Sylow of prime {i} is not cyclic"))
            })?;
            gens.push(g);
        }
        let sizes: Vec<u64> = out.g_ell_i.iter().map(|s| s.len() as u64).collect();
        let min = *sizes.iter().min().unwrap();
        let last = (0..m).rev().find(|&i| sizes[i] == min).unwrap();
        let order: Vec<usize> = (0..m).filter(|&i| i != last).chain([last]).collect();
        let g: Vec<u64> = order.iter().map(|&i| sizes[i]).collect();
        let gm = g[m - 1];
        let head: Vec<usize> = order[..m - 1].iter().map(|&i| gens[i]).collect();
        let h = fg.subgroup(&head);
        if h.len() as u64 != g[..m - 1].iter().product::<u64>() {
            return Err(RayError::FrameUnavailable("inertia Sylows do not form a direct product".into()));
        }
        // τ_m = j Π_{i<m} τ_i^{-g_i/g_m} over the generators j of the last inertia Sylow.
        let shift = head.iter().zip(&g).fold(0, |acc, (&t, &gi)| fg.add(acc, fg.scale(t, (gi / gm) as i64)));
        let want = gm / ell_r.min(gm);
        for &jc in &out.g_ell_i[last] {
            if fg.order_of(jc) != gm {
                continue;
            }
            let tm = fg.sub(jc, shift);
            if fg.order_of(tm) != want {
                continue;
            }
            let mut all = head.clone();
            all.push(tm);
            if fg.subgroup(&all).len() as u64 == h.len() as u64 * want && fg.subgroup(&all).len() == out.g_ell.len()
            {
                let mut tau = head;
                tau.push(tm);
                out.order = order;
                out.g = g;
                out.tau = tau;
                out.j = jc;
                return Ok(out);
            }
        }
        Err(RayError::FrameUnavailable(format!("no τ_m of order {want} completes the frame")))
    }

    /// `galois_over_H` computing the needed lower groups itself.
    pub fn galois_over_h(&self, ell: u64) -> Result<GaloisOverH, RayError> {
        let k = self.field();
        let one = RayClassGroup::new(k, &crate::quadfield::Modulus::unit(k.disc()))?;
        let gamma = FiniteGroup::kernel(&self.transition(&one)?);
        let inertia = self.modulus().primes().iter().map(|p| self.inertia(p)).collect::<Result<Vec<_>, _>>()?;
        self.galois_over_h_from(ell, gamma, inertia)
    }
}

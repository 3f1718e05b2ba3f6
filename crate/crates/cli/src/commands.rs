use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use ordist_core::cohomology::{admissible_r, toralg_sweep, SweepRow};
use ordist_core::distribution::{
    build_presentation, level_torsion, search_torsex, torsex_certificate, torsion_bound, TorsionCertificate,
};
use ordist_core::quadfield::{Modulus, PrimeIdeal, QuadField};
use ordist_core::rayclass::RayClassGroup;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::error::CliError;
use crate::report::{big, bigs, group};

/// A report body, plus the failed check when the computation finished but
/// did not verify.
pub type Outcome = Result<(Value, Option<CliError>), CliError>;

/// Moduli above this norm need the slow opt-in.
pub const NORM_LIMIT: u64 = 100_000;

pub struct Context {
    pub cache: Option<Cache>,
    pub slow: bool,
    pub verbose: u8,
}

impl Context {
    fn note(&self, msg: &str) {
        if self.verbose > 0 {
            eprintln!("ordist: {msg}");
        }
    }

    fn cached<F>(&self, kind: &str, key: &str, compute: F) -> Result<Value, CliError>
    where
        F: FnOnce() -> Result<(Value, ordist_core::zlinalg::IntMatrix), CliError>,
    {
        if let Some(c) = &self.cache {
            if let Some(v) = c.load(kind, key)? {
                self.note(&format!("cache hit {kind} {key}"));
                return Ok(v);
            }
        }
        let (v, matrix) = compute()?;
        if let Some(c) = &self.cache {
            c.store(kind, key, &v, &matrix)?;
            self.note(&format!("cache store {kind} {key}"));
        }
        Ok(v)
    }
}

pub fn field(d: u64) -> Result<QuadField, CliError> {
    Ok(QuadField::new(d)?)
}

/// A prime spec, or a bare rational prime meaning `p:N`.
pub fn parse_prime(k: &QuadField, s: &str) -> Result<PrimeIdeal, CliError> {
    let s = s.trim();
    if s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty() {
        return Ok(PrimeIdeal::parse(k, &format!("p:{s}"))?);
    }
    Ok(PrimeIdeal::parse(k, s)?)
}

fn parse_modulus(ctx: &Context, k: &QuadField, spec: &str) -> Result<Modulus, CliError> {
    let m = Modulus::parse(k, spec)?;
    if m.norm() > NORM_LIMIT && !ctx.slow {
        return Err(CliError::Usage(format!("modulus norm {} exceeds {NORM_LIMIT}; pass --slow", m.norm())));
    }
    Ok(m)
}

pub fn cmd_field(k: &QuadField) -> Value {
    crate::report::field(k)
}

pub fn cmd_rayclass(ctx: &Context, k: &QuadField, spec: &str) -> Result<Value, CliError> {
    let m = parse_modulus(ctx, k, spec)?;
    let key = format!("d{}:{}", k.d(), m.spec());
    ctx.cached("rayclass", &key, || {
        let g = RayClassGroup::new(k, &m)?;
        let mut primes = Vec::new();
        for (p, e) in m.primes().iter().zip(m.exponents()) {
            primes.push(json!({
                "prime": p.label(),
                "exponent": e,
                "norm": p.norm(),
                "inertia_order": g.inertia(p)?.len(),
            }));
        }
        let v = json!({
            "modulus": m.spec(),
            "norm": m.norm(),
            "order": g.order(),
            "structure": group(g.group()),
            "residue_units_order": g.units().order(),
            "class_generators": g.class_generators().iter().map(|p| p.label()).collect::<Vec<_>>(),
            "primes": primes,
        });
        Ok((v, g.relations().clone()))
    })
}

pub fn cmd_torsion(ctx: &Context, k: &QuadField, spec: &str) -> Result<Value, CliError> {
    let m = parse_modulus(ctx, k, spec)?;
    let key = format!("d{}:{}", k.d(), m.spec());
    ctx.cached("torsion", &key, || {
        let p = build_presentation(k, &m)?;
        let torsion = level_torsion(&p)?;
        let quotient = p.quotient();
        let bounds = match torsion_bound(&p, &torsion) {
            Ok(b) => json!({
                "product_bound": big(&b.product_bound),
                "z": b.z.iter().map(|(li, z)| json!({
                    "level": p.levels()[*li].modulus.spec(),
                    "z": big(z),
                })).collect::<Vec<_>>(),
                "a": b.a,
                "borne": big(&b.borne),
                "exponent_divides_product": b.exponent_divides_product,
                "order_divides_borne": b.order_divides_borne,
            }),
            Err(e) => json!({ "skipped": e.to_string() }),
        };
        let v = json!({
            "modulus": m.spec(),
            "levels": p.levels().len(),
            "generators": p.ngens(),
            "relations": p.relations().rows(),
            "group_order": p.top().order(),
            "rank": quotient.rank(),
            "torsion_invariants": bigs(&torsion.torsion_invariants()),
            "oracles_agree": true,
            "bounds": bounds,
        });
        Ok((v, p.relations().clone()))
    })
}

fn certificate_json(c: &TorsionCertificate) -> Value {
    let support = c.r.iter().filter(|x| !x.is_zero()).count();
    let l1: BigInt = c.r.iter().map(|x| x.abs()).sum();
    let parity = &c.parity;
    json!({
        "modulus": c.modulus.spec(),
        "g_prime_order": c.g_prime_order,
        "epsilon": c.epsilon,
        "r_support": support,
        "r_l1_norm": big(&l1),
        "in_kernel": c.in_kernel,
        "outside_u_m": c.outside_u_m,
        "nu_r": big(&c.nu_r),
        "nu_r_odd": c.nu_r.is_odd(),
        "parity": {
            "levels_prime_to_2": parity.levels_prime_to_2,
            "all_even": parity.all_even,
            "cases": parity.cases.iter().map(|x| json!({
                "template": x.template,
                "condition": x.condition,
                "value": x.value,
                "instances": x.instances.iter().map(|(d, v)| json!([d, v])).collect::<Vec<_>>(),
                "even": x.even,
            })).collect::<Vec<_>>(),
            "degree_checks": parity.degree_checks.iter().map(|x| json!({
                "step": x.step,
                "formula": x.formula,
                "actual": x.actual,
            })).collect::<Vec<_>>(),
            "unrestricted_counterexample": parity.unrestricted_counterexample,
        },
        "conclusion": c.conclusion,
    })
}

pub fn cmd_certify(k: &QuadField, primes: &[String]) -> Outcome {
    let primes = primes.iter().map(|s| parse_prime(k, s)).collect::<Result<Vec<_>, _>>()?;
    let c = torsex_certificate(k, &primes)?;
    let failed = (!c.conclusion).then(|| CliError::Internal("certificate does not verify".into()));
    Ok((certificate_json(&c), failed))
}

pub fn cmd_search(k: &QuadField, bound: u64) -> Value {
    let triples = search_torsex(k, bound);
    json!({
        "bound": bound,
        "count": triples.len(),
        "triples": triples.iter().map(|t| t.iter().map(|p| p.label()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn sweep_row(r: &SweepRow) -> Value {
    json!({
        "m": r.g.len(),
        "g": r.g,
        "r": r.r,
        "torsion_invariants": bigs(&r.torsion.torsion_invariants()),
        "expected_invariants": bigs(&r.expected.torsion_invariants()),
        "tor_h2_cases": r.tor_h2_cases,
        "tor_h2_agree": r.tor_h2_agree,
        "terminal_invariants": r.terminal.as_ref().map(|t| bigs(&t.torsion_invariants())),
        "verdict": r.verdict,
    })
}

pub fn cmd_toralg_sweep(ell: u64, max_m: usize, rs: &[u32]) -> Outcome {
    if max_m == 0 || max_m > 5 {
        return Err(CliError::Usage(format!("--max-m must be between 1 and 5, got {max_m}")));
    }
    let rs: Vec<u32> = if rs.is_empty() { admissible_r(ell) } else { rs.to_vec() };
    if rs.is_empty() {
        return Err(CliError::Usage(format!("{ell} divides no w_K; pass --r explicitly")));
    }
    let rs: Vec<u32> = rs.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let rows = toralg_sweep(ell, max_m, &rs)?;
    let all = rows.iter().all(|r| r.verdict);
    let v = json!({
        "ell": ell,
        "max_m": max_m,
        "r": rs,
        "rows": rows.iter().map(sweep_row).collect::<Vec<_>>(),
        "all_verdicts": all,
    });
    let failed = (!all).then(|| CliError::Internal("a sweep row failed its verdict".into()));
    Ok((v, failed))
}

//! The fixed verification battery: test-function suites and the parameter
//! sets of the acceptance criteria, at full or reduced scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::{algebra, sets, theorems, verdict, CheckRow, Num, VerificationReport};
use crate::error::{Error, Result};
use crate::operators::{FamilyKind, SetFamily};
use crate::radial::RadialFunction;
use crate::words::FreeGroupCtx;

/// Largest accepted `c2/c1` for the restricted-weak equivalence band.
pub const THM3_BAND_MAX_SPREAD: f64 = 25.0;
/// Lower edge of the band for `restricted_weak_estimate(χ_n) / q^{n/2}`.
pub const R22_BAND_FLOOR: f64 = 1.0;
/// Seed of the random part of the function suite.
pub const SUITE_SEED: u64 = 2024;
/// Seed of random set families.
pub const FAMILY_SEED: u64 = 42;
/// Seed of the random functions in the equivalence study.
pub const THM3_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// The acceptance parameters.
    Full,
    /// Reduced parameters with the same code paths, for fast reruns.
    Quick,
}

/// Seeded nonnegative radial function of degree at most `deg_max`: each
/// coefficient below the top is zero with probability 1/2, otherwise
/// `a/b` with `a ∈ [1, 12]`, `b ∈ [1, 4]`; the top coefficient is nonzero.
pub fn random_radial<R: Rng>(ctx: FreeGroupCtx, rng: &mut R, deg_max: usize) -> RadialFunction {
    let d = rng.gen_range(0..=deg_max);
    let coeffs = (0..=d)
        .map(|n| {
            if n < d && rng.gen_bool(0.5) {
                BigRational::from_integer(BigInt::from(0))
            } else {
                BigRational::new(rng.gen_range(1..=12).into(), rng.gen_range(1..=4).into())
            }
        })
        .collect();
    RadialFunction::new(ctx, coeffs)
}

/// Fifty test functions: `χ_0 … χ_6`; truncated geometric `q^{-βn}`,
/// `n ≤ d`, for `β ∈ {0.4, 0.5, 0.6}` and `d = 1 … 6` (coefficients rounded
/// to 9 decimals); 25 seeded random functions of degree at most 6.
pub fn function_suite(ctx: FreeGroupCtx) -> Vec<(String, RadialFunction)> {
    let mut out = Vec::with_capacity(50);
    for n in 0..=6 {
        out.push((format!("sphere_{n}"), RadialFunction::sphere(ctx, n)));
    }
    let q = f64::from(ctx.q());
    for beta in [0.4, 0.5, 0.6] {
        for d in 1..=6 {
            let coeffs: Vec<f64> = (0..=d).map(|n| q.powf(-beta * n as f64)).collect();
            out.push((
                format!("geometric_b{beta}_d{d}"),
                RadialFunction::from_f64_rounded(ctx, &coeffs, 9),
            ));
        }
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(SUITE_SEED);
    for i in 0..25 {
        out.push((format!("random_{i}"), random_radial(ctx, &mut rng, 6)));
    }
    out
}

fn f2() -> FreeGroupCtx {
    FreeGroupCtx::new(2).expect("k = 2 is valid")
}

fn f3() -> FreeGroupCtx {
    FreeGroupCtx::new(3).expect("k = 3 is valid")
}

/// Set families for the sphere-pairing and pairing-bound sweeps.
pub fn set_families(scale: Scale) -> Vec<SetFamily> {
    match scale {
        Scale::Full => vec![
            SetFamily::new(FamilyKind::Exhaustive, 1),
            SetFamily::new(FamilyKind::SphereUnions, 8),
            SetFamily::new(FamilyKind::RandomSubsets, 4)
                .with_budget(1000)
                .with_seed(FAMILY_SEED),
        ],
        Scale::Quick => vec![
            SetFamily::new(FamilyKind::Exhaustive, 1),
            SetFamily::new(FamilyKind::SphereUnions, 4),
            SetFamily::new(FamilyKind::RandomSubsets, 3)
                .with_budget(30)
                .with_seed(FAMILY_SEED),
        ],
    }
}

pub fn thm1_families(scale: Scale) -> Vec<SetFamily> {
    match scale {
        Scale::Full => vec![
            SetFamily::new(FamilyKind::Exhaustive, 1),
            SetFamily::new(FamilyKind::SphereUnions, 8),
            SetFamily::new(FamilyKind::RandomSubsets, 3)
                .with_budget(200)
                .with_seed(FAMILY_SEED),
            SetFamily::new(FamilyKind::Greedy, 2).with_budget(16),
        ],
        Scale::Quick => vec![
            SetFamily::new(FamilyKind::Exhaustive, 1),
            SetFamily::new(FamilyKind::SphereUnions, 4),
            SetFamily::new(FamilyKind::RandomSubsets, 2)
                .with_budget(20)
                .with_seed(FAMILY_SEED),
            SetFamily::new(FamilyKind::Greedy, 1).with_budget(4),
        ],
    }
}

fn suite(scale: Scale) -> Vec<(String, RadialFunction)> {
    let all = function_suite(f2());
    match scale {
        Scale::Full => all,
        Scale::Quick => all.into_iter().step_by(6).collect(),
    }
}

pub const CRITERIA: [&str; 11] = [
    "structure-constant oracle equivalence",
    "display majorization",
    "sphere-pairing bound over set families",
    "two-sided weak-type certificate",
    "pairing bound and sphere band",
    "P_k column bound",
    "Q_n^alpha column bound",
    "restricted weak equivalence band",
    "lower chain for f * chi_n",
    "Lorentz exponent fit",
    "determinism across thread counts",
];

pub fn criterion_names() -> &'static [&'static str] {
    &CRITERIA
}

/// Runs criterion `id` (1-based) and returns its reports.
pub fn criterion(id: usize, scale: Scale) -> Result<Vec<VerificationReport>> {
    let full = scale == Scale::Full;
    match id {
        1 => {
            let (a, b) = if full { (6, 4) } else { (3, 2) };
            Ok(vec![
                algebra::verify_oracle(&f2(), a)?,
                algebra::verify_oracle(&f3(), b)?,
            ])
        }
        2 => {
            let n = if full { 12 } else { 6 };
            Ok(vec![
                algebra::verify_majorization(&f2(), n)?,
                algebra::verify_majorization(&f3(), n)?,
            ])
        }
        3 => {
            let k_max = if full { 8 } else { 4 };
            set_families(scale)
                .iter()
                .map(|fam| sets::verify_lemma1(&f2(), fam, k_max))
                .collect()
        }
        4 => {
            let fams = thm1_families(scale);
            suite(scale)
                .iter()
                .map(|(name, f)| Ok(theorems::verify_thm1(f, &fams)?.param("name", name)))
                .collect()
        }
        5 => {
            let n_max = if full { 8 } else { 4 };
            let mut out: Vec<VerificationReport> = set_families(scale)
                .iter()
                .map(|fam| sets::verify_r22(&f2(), fam, n_max))
                .collect::<Result<_>>()?;
            let band_fam = SetFamily::new(FamilyKind::SphereUnions, if full { 8 } else { 4 });
            out.push(sets::r22_sphere_band(&f2(), 1..=n_max, &band_fam, R22_BAND_FLOOR)?);
            Ok(out)
        }
        6 => {
            let (k, r) = if full { (6, 8) } else { (4, 5) };
            Ok(vec![sets::verify_pk(&f2(), k, r)?])
        }
        7 => {
            let (n, r) = if full { (6, 8) } else { (3, 5) };
            Ok(vec![sets::verify_qn(&f2(), n, r)?])
        }
        8 => {
            let (samples, r) = if full { (100, 8) } else { (10, 4) };
            Ok(vec![theorems::thm3_equivalence_report(
                &f2(),
                samples,
                THM3_SEED,
                6,
                &SetFamily::new(FamilyKind::SphereUnions, r),
                THM3_BAND_MAX_SPREAD,
            )?])
        }
        9 => {
            let mut out = Vec::new();
            for p in [1.25, 1.5, 1.75] {
                for (name, f) in suite(scale) {
                    out.push(theorems::thm4_lower_chain(&f, p)?.param("name", name));
                }
            }
            Ok(out)
        }
        10 => {
            let n_max = 40;
            [
                (1.0, f64::INFINITY),
                (2.0, 2.0),
                (2.0, f64::INFINITY),
                (1.0, 2.0),
                (1.5, 3.0),
            ]
            .iter()
            .map(|&(s, t)| theorems::thm5_exponent_fit(&f2(), s, t, 4..=n_max))
            .collect()
        }
        11 => Ok(vec![determinism_report(scale, &[1, 4])?]),
        _ => Err(Error::domain(format!(
            "no criterion {id}; criteria are numbered 1 to 11"
        ))),
    }
}

/// Reruns criteria 1 to 10 at reduced scale in thread pools of each given
/// size and compares the serialized reports byte for byte.
pub fn determinism_report(scale: Scale, threads: &[usize]) -> Result<VerificationReport> {
    let inner = match scale {
        Scale::Full => Scale::Quick,
        Scale::Quick => Scale::Quick,
    };
    let mut rep = VerificationReport::new("determinism", "identical reports for every thread count").param(
        "threads",
        threads.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
    );
    for id in 1..=10 {
        let mut renders: Vec<String> = Vec::new();
        for &t in threads {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::domain(e.to_string()))?;
            let reports = pool.install(|| criterion(id, inner))?;
            renders.push(crate::report::to_json(&reports)?);
        }
        let same = renders.windows(2).all(|w| w[0] == w[1]);
        rep.push(CheckRow::new(
            format!("criterion {id}"),
            Num::int(renders[0].len() as u64),
            Num::int(renders.last().map_or(0, |r| r.len()) as u64),
            Some(if same { 1.0 } else { 0.0 }),
            verdict(same),
        ));
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_fifty_nonnegative_functions() {
        let s = function_suite(f2());
        assert_eq!(s.len(), 50);
        assert!(s
            .iter()
            .all(|(_, f)| f.is_nonnegative() && f.degree().unwrap_or(0) <= 6));
        assert_eq!(function_suite(f2()), s);
        let names: std::collections::BTreeSet<_> = s.iter().map(|(n, _)| n.clone()).collect();
        assert_eq!(names.len(), 50);
    }

    #[test]
    fn unknown_criterion() {
        assert!(criterion(12, Scale::Quick).is_err());
        assert!(criterion(0, Scale::Quick).is_err());
    }
}

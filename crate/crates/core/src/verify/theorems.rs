use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sets::{family_sweep, Cell};
use super::{battery::random_radial, verdict, CheckRow, Num, Status, VerificationReport};
use crate::error::{Error, Result};
use crate::lorentz::{conjugate, lorentz_norm, radial_weighted_sum, rearrange_radial_real, LorentzIndex};
use crate::numeric::{fit_line, CompensatedSum};
use crate::operators::{restricted_weak_estimate, ImageEvaluator, SetFamily};
use crate::radial::{big_to_f64, convolve_real, RadialFunction};
use crate::report::format_real;
use crate::surd::ratio_to_f64;
use crate::words::FreeGroupCtx;

/// Slack on the sphere-chain lower bound: `max_m ‖f * χ_m‖²/|S_m| ≥ A(f)/15`.
pub const THM1_LOWER_DIVISOR: u32 = 15;
/// Relative tolerance of the floating `≥` in the `p'`-chain.
pub const THM4_REL_TOL: f64 = 1e-9;
/// Allowed distance between fitted and predicted growth exponents.
pub const THM5_SLOPE_TOL: f64 = 0.15;
/// Fewest points accepted by the exponent fit.
pub const THM5_MIN_POINTS: usize = 8;

fn require_nonnegative(f: &RadialFunction, what: &str) -> Result<()> {
    if f.is_nonnegative() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} needs a nonnegative radial function")))
    }
}

fn rat(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `‖g‖_2²` of a radial function, exactly.
fn radial_l2_sq(g: &RadialFunction) -> BigRational {
    let ctx = g.ctx();
    g.coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| c * c * rat(ctx.sphere_size(l)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Two-sided weak type (2,2) certificate for `f ≥ 0`:
/// upper `‖f * χ_E‖_2² / |E| ≤ 4 A(f)` for every set of every family, and
/// lower `max_{2d ≤ m ≤ 2d+4} ‖f * χ_m‖_2² / |S_m| ≥ A(f) / 15`, `d = deg f`.
pub fn verify_thm1(f: &RadialFunction, families: &[SetFamily]) -> Result<VerificationReport> {
    require_nonnegative(f, "verify_thm1")?;
    let ctx = *f.ctx();
    let a = f.a_functional();
    let four_a = a.scale(&rat(4));
    let mut rep = VerificationReport::new(
        "thm1",
        "A(f)/15 <= max_m ||f*chi_m||^2/|S_m| and ||f*chi_E||^2/|E| <= 4 A(f)",
    )
    .param("k", ctx.k())
    .param("f", f);
    for fam in families {
        let ev = ImageEvaluator::new(f, fam.radius);
        let label = format!("upper {}", fam.kind);
        let rows = family_sweep(&ctx, fam, std::slice::from_ref(&label), |cand| {
            let lv = ev.levels(cand)?;
            let val = lv.l2_norm_sq() / rat(cand.size(&ctx));
            let holds = four_a.cmp_rational(&val) != Ordering::Less;
            Ok(vec![Cell::at_most(Num::Exact(val), Num::Surd(four_a.clone()), holds)])
        })?;
        for r in rows {
            rep.push(r.with_param("family", fam));
        }
    }
    let (best, best_m) = sphere_chain(f)?;
    let bound = a.scale(&BigRational::new(1.into(), THM1_LOWER_DIVISOR.into()));
    let holds = bound.cmp_rational(&best) != Ordering::Greater;
    rep.push(
        CheckRow::at_least("lower sphere chain", Num::Exact(best), Num::Surd(bound), holds)
            .with_param("m", best_m)
            .with_witness(format!("E=S_{best_m}")),
    );
    rep.note("A", Num::Surd(a.clone()));
    rep.note("A_real", Num::Real(a.to_f64()));
    rep.note("A_negative_exponent", Num::Real(f.a_functional_negative_exponent()));
    Ok(rep.finish())
}

/// `max_{2d ≤ m ≤ 2d+4} ‖f * χ_m‖_2² / |S_m|` and its maximizer (first one).
fn sphere_chain(f: &RadialFunction) -> Result<(BigRational, usize)> {
    let ctx = *f.ctx();
    let d = f.degree().unwrap_or(0);
    let mut best: Option<(BigRational, usize)> = None;
    for m in 2 * d..=2 * d + 4 {
        let g = f.convolve(&RadialFunction::sphere(ctx, m))?;
        let v = radial_l2_sq(&g) / rat(ctx.sphere_size(m));
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, m));
        }
    }
    Ok(best.expect("five spheres tried"))
}

/// Empirical two-sided equivalence between the restricted weak (2,2)
/// estimate and `Σ f_n q^{n/2}` over seeded random `f ≥ 0`.
///
/// Each row checks the upper bound `estimate ≤ 2 q^{3/2} Σ f_n q^{n/2}` and
/// records the sphere-pair lower bound
/// `max_{a,b} ⟨f * χ_a, χ_b⟩ / (|S_a||S_b|)^{1/2}` against the larger of the
/// even and odd partial sums. The band `[c1, c2]` of
/// `estimate / Σ f_n q^{n/2}` and its spread `c2/c1` go into the summary;
/// the spread must not exceed `max_spread`.
pub fn thm3_equivalence_report(
    ctx: &FreeGroupCtx,
    samples: usize,
    seed: u64,
    deg_max: usize,
    fam: &SetFamily,
    max_spread: f64,
) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<RadialFunction> = (0..samples).map(|_| random_radial(*ctx, &mut rng, deg_max)).collect();
    let qf = f64::from(ctx.q());
    let c_upper = 2.0 * qf.powf(1.5);
    let results = fs
        .par_iter()
        .map(|f| -> Result<(f64, f64, f64, crate::operators::EstimateReport)> {
            let est = restricted_weak_estimate(f, fam)?;
            let w = radial_weighted_sum(f, 2.0)?;
            let coeffs = f.to_f64();
            let (mut even, mut odd) = (CompensatedSum::new(), CompensatedSum::new());
            for (n, c) in coeffs.iter().enumerate() {
                let t = c * qf.powf(n as f64 / 2.0);
                if n % 2 == 0 {
                    even.add(t)
                } else {
                    odd.add(t)
                }
            }
            let ev = ImageEvaluator::new(f, fam.radius);
            let mut pair = 0.0f64;
            for a in 0..=fam.radius {
                for b in 0..=fam.radius {
                    let v = ratio_to_f64(&ev.sphere_pairing(a, b))
                        / (big_to_f64(&ctx.sphere_size(a)) * big_to_f64(&ctx.sphere_size(b))).sqrt();
                    pair = pair.max(v);
                }
            }
            Ok((w, pair, even.value().max(odd.value()), est))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = VerificationReport::new(
        "thm3",
        "c1 <= restricted_weak_estimate(f) / sum f_n q^(n/2) <= c2 with c2/c1 bounded, and estimate <= 2 q^(3/2) sum f_n q^(n/2)",
    )
    .param("k", ctx.k())
    .param("samples", samples)
    .param("seed", seed)
    .param("deg_max", deg_max)
    .param("family", fam);
    let (mut c1, mut c2, mut pair_c) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for (i, (f, (w, pair, parity, est))) in fs.iter().zip(results).enumerate() {
        let ratio = est.estimate / w;
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
        pair_c = pair_c.min(pair / parity);
        rep.push(
            CheckRow::at_most(
                format!("sample {i}"),
                Num::Real(est.estimate),
                Num::Real(c_upper * w),
                est.estimate <= c_upper * w,
            )
            .with_param("f", f)
            .with_param("ratio", format_real(ratio))
            .with_param("sphere_pair_ratio", format_real(pair / parity))
            .with_witness(format!("E={}; |F|={}", est.argmax, est.j))
            .with_cases(est.evaluated as u64),
        );
    }
    let spread = c2 / c1;
    rep.push(
        CheckRow::new(
            "band spread",
            Num::Real(spread),
            Num::Real(max_spread),
            Some(max_spread / spread),
            verdict(spread <= max_spread),
        )
        .with_cases(samples as u64),
    );
    rep.note("c1", Num::Real(c1));
    rep.note("c2", Num::Real(c2));
    rep.note("spread", Num::Real(spread));
    rep.note("sphere_pair_c", Num::Real(pair_c));
    Ok(rep.finish())
}

/// `q^{-n} ‖f * χ_n‖_{p'}^{p'} ≥ (2/3)^{p'} Σ_{l ≤ n} q^{l p'/p} f_l^{p'}` for
/// `n = d, …, d+3`, with exact convolution and a relative tolerance of
/// [`THM4_REL_TOL`].
pub fn thm4_lower_chain(f: &RadialFunction, p: f64) -> Result<VerificationReport> {
    require_nonnegative(f, "thm4_lower_chain")?;
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::domain(format!("thm4_lower_chain needs p in (1, 2), got {p}")));
    }
    let ctx = *f.ctx();
    let qf = f64::from(ctx.q());
    let pc = conjugate(p);
    let coeffs = f.to_f64();
    let d = f.degree().unwrap_or(0);
    let mut rep = VerificationReport::new(
        "thm4",
        "q^-n ||f*chi_n||_p'^p' >= (2/3)^p' sum_{l<=n} q^(l p'/p) f_l^p'",
    )
    .param("k", ctx.k())
    .param("f", f)
    .param("p", p)
    .param("rel_tol", THM4_REL_TOL);
    let mut best_estimate = 0.0f64;
    for n in d..=d + 3 {
        let g = f.convolve(&RadialFunction::sphere(ctx, n))?;
        let norm_pc: f64 = g
            .coeffs()
            .iter()
            .enumerate()
            .map(|(l, c)| ratio_to_f64(c).abs().powf(pc) * big_to_f64(&ctx.sphere_size(l)))
            .collect::<CompensatedSum>()
            .value();
        let lhs = norm_pc / qf.powi(n as i32);
        let chain: f64 = (0..=n)
            .filter(|&l| l < coeffs.len())
            .map(|l| qf.powf(l as f64 * pc / p) * coeffs[l].powf(pc))
            .collect::<CompensatedSum>()
            .value();
        let rhs = (2.0f64 / 3.0).powf(pc) * chain;
        let holds = lhs >= rhs * (1.0 - THM4_REL_TOL);
        rep.push(CheckRow::at_least(
            format!("n={n}"),
            Num::Real(lhs),
            Num::Real(rhs),
            holds,
        ));
        best_estimate = best_estimate.max(norm_pc.powf(1.0 / pc) / big_to_f64(&ctx.sphere_size(n)).powf(1.0 / pc));
    }
    let weighted = radial_weighted_sum(f, p)?;
    rep.note("sphere_estimate", Num::Real(best_estimate));
    rep.note("weighted_sum", Num::Real(weighted));
    if weighted > 0.0 {
        rep.note("estimate_over_weighted_sum", Num::Real(best_estimate / weighted));
    }
    Ok(rep.finish())
}

/// Growth exponent of `‖χ_n * f‖_{(2,t)} / ‖f‖_{(2,s)}` for
/// `f = Σ_{k ≤ 2n} q^{-k/2} χ_k`: the least-squares slope of
/// `log(r(n) q^{-n/2})` against `log n` must lie within
/// [`THM5_SLOPE_TOL`] of `1 - 1/s + 1/t`.
pub fn thm5_exponent_fit(
    ctx: &FreeGroupCtx,
    s: f64,
    t: f64,
    ns: std::ops::RangeInclusive<usize>,
) -> Result<VerificationReport> {
    if !((1.0..=2.0).contains(&s) && t >= 2.0) {
        return Err(Error::domain(format!("thm5 needs 1 <= s <= 2 <= t, got s={s}, t={t}")));
    }
    let idx_s = LorentzIndex::new(2.0, s)?;
    let idx_t = LorentzIndex::new(2.0, t)?;
    let qf = f64::from(ctx.q());
    let target = 1.0 - 1.0 / s + 1.0 / t;
    let mut rep = VerificationReport::new(
        "thm5",
        "slope of log(||chi_n*f||_(2,t)/||f||_(2,s) q^(-n/2)) vs log n equals 1 - 1/s + 1/t",
    )
    .param("k", ctx.k())
    .param("s", s)
    .param("t", t)
    .param("n_min", ns.start())
    .param("n_max", ns.end())
    .param("tolerance", THM5_SLOPE_TOL);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut scaled = Vec::new();
    for n in ns.clone().filter(|&n| n >= 1) {
        let f: Vec<f64> = (0..=2 * n).map(|k| qf.powf(-(k as f64) / 2.0)).collect();
        let mut chi = vec![0.0; n + 1];
        chi[n] = 1.0;
        let g = convolve_real(ctx, &chi, &f);
        let num = lorentz_norm(&rearrange_radial_real(ctx, &g), idx_t);
        let den = lorentz_norm(&rearrange_radial_real(ctx, &f), idx_s);
        let r = num / den * qf.powf(-(n as f64) / 2.0);
        xs.push((n as f64).ln());
        ys.push(r.ln());
        scaled.push((n, r));
        rep.push(CheckRow::new(
            format!("n={n}"),
            Num::Real(r),
            Num::Text(String::new()),
            None,
            Status::Informational,
        ));
    }
    let fit = fit_line(&xs, &ys, THM5_MIN_POINTS)?;
    let diff = (fit.slope - target).abs();
    rep.push(CheckRow::new(
        "slope",
        Num::Real(fit.slope),
        Num::Real(target),
        Some(if diff == 0.0 { f64::MAX } else { THM5_SLOPE_TOL / diff }),
        verdict(diff <= THM5_SLOPE_TOL),
    ));
    let c_fit = scaled
        .iter()
        .map(|&(n, r)| r / (n as f64).powf(target))
        .fold(0.0f64, f64::max);
    rep.note("slope", Num::Real(fit.slope));
    rep.note("intercept", Num::Real(fit.intercept));
    rep.note("target", Num::Real(target));
    rep.note("upper_constant", Num::Real(c_fit));
    Ok(rep.finish())
}

/// Exploratory table: the conjecture functional for each `s` (both exponent
/// signs) next to the squared restricted weak estimate. For indicator inputs
/// `‖χ_E‖_{(2,s)} = |E|^{1/2}` for every `s`, so the set-based estimate does
/// not depend on `s`.
pub fn conjecture_scan(fs: &[(String, RadialFunction)], s_grid: &[f64], fam: &SetFamily) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new(
        "conjecture",
        "sum f_n f_m q^((n+m)/2) (1 + min(n^(1/s'), m^(1/s'))) vs restricted estimate squared",
    )
    .param("family", fam)
    .param(
        "s_grid",
        s_grid.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
    );
    let ests = fs
        .par_iter()
        .map(|(_, f)| restricted_weak_estimate(f, fam))
        .collect::<Result<Vec<_>>>()?;
    for ((name, f), est) in fs.iter().zip(ests) {
        let sq = est.estimate * est.estimate;
        for &s in s_grid {
            let pos = f.conjecture_functional(s)?;
            let neg = f.conjecture_functional_negative_exponent(s)?;
            rep.push(
                CheckRow::new(
                    format!("{name} s={s}"),
                    Num::Real(sq),
                    Num::Real(pos),
                    if sq == 0.0 { None } else { Some(pos / sq) },
                    Status::Informational,
                )
                .with_param("f", f)
                .with_param("functional_negative_exponent", format_real(neg))
                .with_param("A", format_real(f.a_functional().to_f64()))
                .with_witness(format!("E={}; |F|={}", est.argmax, est.j)),
            );
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::FamilyKind;

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    #[test]
    fn thm1_identity_margins() {
        let ctx = f2();
        let rep = verify_thm1(
            &RadialFunction::sphere(ctx, 0),
            &[SetFamily::new(FamilyKind::Exhaustive, 1)],
        )
        .unwrap();
        assert_eq!(rep.status, Status::Pass);
        let upper = &rep.rows[0];
        assert_eq!(upper.margin, Some(4.0));
        let lower = rep.rows.last().unwrap();
        assert_eq!(lower.margin, Some(15.0));
    }

    #[test]
    fn thm1_chi2_chain_is_exact() {
        // A(χ_2) = 3·9 = 27; chain over m = 4..8 with exact products
        let ctx = f2();
        let f = RadialFunction::sphere(ctx, 2);
        assert_eq!(*f.a_functional().rational_part(), rat(27));
        let (best, m) = sphere_chain(&f).unwrap();
        // oracle: ‖χ_2 * χ_m‖² / |S_m| = Σ_l c(2,m,l)² |S_l| / |S_m|
        let mut direct = BigRational::zero();
        for l in m - 2..=m + 2 {
            let c = crate::radial::structure_constant(&ctx, 2, m, l);
            direct += rat(&c * &c * ctx.sphere_size(l));
        }
        assert_eq!(best, direct / rat(ctx.sphere_size(m)));
        assert!(best * rat(15) >= rat(27));
    }

    #[test]
    fn thm4_identity_and_sphere() {
        let ctx = f2();
        let rep = thm4_lower_chain(&RadialFunction::sphere(ctx, 0), 1.5).unwrap();
        assert_eq!(rep.status, Status::Pass);
        let rep = thm4_lower_chain(&RadialFunction::sphere(ctx, 2), 1.5).unwrap();
        assert_eq!(rep.status, Status::Pass);
        assert!(thm4_lower_chain(&RadialFunction::sphere(ctx, 2), 2.0).is_err());
    }

    #[test]
    fn thm5_needs_enough_points() {
        let ctx = f2();
        assert!(matches!(
            thm5_exponent_fit(&ctx, 2.0, 2.0, 4..=8),
            Err(Error::DegenerateFit { .. })
        ));
        assert!(thm5_exponent_fit(&ctx, 2.5, 2.0, 4..=20).is_err());
    }

    #[test]
    fn conjecture_scan_identity() {
        let ctx = f2();
        let fs = vec![("chi_0".to_string(), RadialFunction::sphere(ctx, 0))];
        let rep = conjecture_scan(&fs, &[1.0, 2.0], &SetFamily::new(FamilyKind::Spheres, 2)).unwrap();
        assert_eq!(rep.status, Status::Informational);
        for row in &rep.rows {
            assert!((row.lhs.to_f64().unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(row.rhs, Num::Real(1.0));
        }
    }
}

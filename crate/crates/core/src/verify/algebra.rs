use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{verdict, CheckRow, Num, VerificationReport};
use crate::error::Result;
use crate::radial::{display_coefficient, oracle_convolve, structure_constant, RadialFunction};
use crate::words::FreeGroupCtx;

/// Closed-form products `χ_n * χ_m` against brute-force pair counts, plus
/// mass conservation `Σ_l c(n,m,l)|S_l| = |S_n||S_m|`, for `n, m ≤ n_max`.
pub fn verify_oracle(ctx: &FreeGroupCtx, n_max: usize) -> Result<VerificationReport> {
    let pairs: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (0..=n_max).map(move |m| (n, m))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(n, m)| -> Result<Vec<CheckRow>> {
            let exact = RadialFunction::sphere(*ctx, n).convolve(&RadialFunction::sphere(*ctx, m))?;
            let oracle = oracle_convolve(ctx, n, m)?;
            let same = exact == oracle;
            let product = CheckRow::new(
                format!("chi_{n}*chi_{m}"),
                Num::Text(exact.to_string()),
                Num::Text(oracle.to_string()),
                Some(if same { 1.0 } else { 0.0 }),
                verdict(same),
            )
            .with_param("n", n)
            .with_param("m", m);
            let mass: BigUint = (0..=n + m)
                .map(|l| structure_constant(ctx, n, m, l) * ctx.sphere_size(l))
                .sum();
            let expected = ctx.sphere_size(n) * ctx.sphere_size(m);
            let conserved = CheckRow::new(
                format!("mass_{n}_{m}"),
                Num::int(mass.clone()),
                Num::int(expected.clone()),
                Some(1.0),
                verdict(mass == expected),
            )
            .with_param("n", n)
            .with_param("m", m);
            Ok(vec![product, conserved])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = VerificationReport::new(
        "oracle",
        "chi_n*chi_m from structure constants equals the brute-force pair tally; sum_l c(n,m,l)|S_l| = |S_n||S_m|",
    )
    .param("k", ctx.k())
    .param("n_max", n_max);
    rows.into_iter().flatten().for_each(|r| rep.push(r));
    Ok(rep.finish())
}

/// `c(n,m,l) ≤ d(n,m,l) ≤ 2c(n,m,l)` for the printed coefficients `d`, all
/// admissible `l` and `n, m ≤ n_max`. One row per `(n, m)` reporting the
/// extreme ratios `d/c`.
pub fn verify_majorization(ctx: &FreeGroupCtx, n_max: usize) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("majorization", "c(n,m,l) <= d(n,m,l) <= 2 c(n,m,l)")
        .param("k", ctx.k())
        .param("n_max", n_max);
    let two = BigRational::from_integer(BigInt::from(2));
    for n in 0..=n_max {
        for m in 0..=n_max {
            let mut lo: Option<(BigRational, usize)> = None;
            let mut hi: Option<(BigRational, usize)> = None;
            let mut ok = true;
            let mut stray = None;
            for l in 0..=n + m + 1 {
                let c = structure_constant(ctx, n, m, l);
                let d = display_coefficient(ctx, n, m, l);
                if c.is_zero() {
                    if !d.is_zero() {
                        ok = false;
                        stray = Some(l);
                    }
                    continue;
                }
                ok &= c <= d && d <= &c * 2u32;
                let r = BigRational::new(BigInt::from(d), BigInt::from(c));
                if lo.as_ref().is_none_or(|(v, _)| r < *v) {
                    lo = Some((r.clone(), l));
                }
                if hi.as_ref().is_none_or(|(v, _)| r > *v) {
                    hi = Some((r, l));
                }
            }
            let (lo, lo_l) = lo.expect("c(n,m,n+m) = 1");
            let (hi, hi_l) = hi.expect("c(n,m,n+m) = 1");
            let margin =
                (crate::surd::ratio_to_f64(&two) / crate::surd::ratio_to_f64(&hi)).min(crate::surd::ratio_to_f64(&lo));
            let mut row = CheckRow::new(
                format!("n={n},m={m}"),
                Num::Exact(hi.clone()),
                Num::Exact(two.clone()),
                Some(margin),
                verdict(ok && lo >= BigRational::one()),
            )
            .with_param("max_ratio_at_l", hi_l)
            .with_param("min_ratio", &lo)
            .with_param("min_ratio_at_l", lo_l);
            if let Some(l) = stray {
                row = row.with_witness(format!("printed coefficient nonzero at inadmissible l={l}"));
            }
            rep.push(row);
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Status;

    #[test]
    fn small_oracle_and_majorization_pass() {
        let ctx = FreeGroupCtx::new(2).unwrap();
        let r = verify_oracle(&ctx, 3).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.rows.len(), 32);
        let m = verify_majorization(&ctx, 5).unwrap();
        assert_eq!(m.status, Status::Pass);
        // χ_2*χ_2: printed 3 against exact 2 at l = 2
        let row = m.rows.iter().find(|r| r.id == "n=2,m=2").unwrap();
        assert_eq!(row.lhs, Num::Exact(BigRational::new(3.into(), 2.into())));
    }
}

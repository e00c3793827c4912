//! The radial convolution algebra on `F_k`.
//!
//! A radial function `Σ f_n χ_n` is stored as its coefficient vector. Products
//! are driven by the exact structure constants `c(n, m, l)` defined by
//! `χ_n * χ_m = Σ_l c(n, m, l) χ_l`; [`oracle_convolve`] recomputes them by
//! brute-force enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::operators::FunctionOnGroup;
use crate::surd::{ratio_to_f64, Surd};
use crate::words::FreeGroupCtx;

/// `c(n, m, l)`: coefficient of `χ_l` in `χ_n * χ_m`.
///
/// For `1 ≤ m ≤ n` and `l = n + m - 2j`: 1 at `j = 0`, `(q-1) q^(j-1)` for
/// `0 < j < m`, and at `j = m` either `q^m` (`n > m`) or `(q+1) q^(n-1)` (`n = m`).
pub fn structure_constant(ctx: &FreeGroupCtx, n: usize, m: usize, l: usize) -> BigUint {
    let q = BigUint::from(ctx.q());
    match closed_form(n, m, l) {
        Term::Zero => BigUint::zero(),
        Term::One => BigUint::one(),
        Term::Interior(j) => (&q - 1u32) * q.pow(j - 1),
        Term::Bottom(j) => q.pow(j),
        Term::Origin(n) => (&q + 1u32) * q.pow(n - 1),
    }
}

/// Same closed form in floating point, for the large-degree path.
pub fn structure_constant_f64(ctx: &FreeGroupCtx, n: usize, m: usize, l: usize) -> f64 {
    let q = f64::from(ctx.q());
    match closed_form(n, m, l) {
        Term::Zero => 0.0,
        Term::One => 1.0,
        Term::Interior(j) => (q - 1.0) * q.powi(j as i32 - 1),
        Term::Bottom(j) => q.powi(j as i32),
        Term::Origin(n) => (q + 1.0) * q.powi(n as i32 - 1),
    }
}

enum Term {
    Zero,
    One,
    Interior(u32),
    Bottom(u32),
    Origin(u32),
}

fn closed_form(n: usize, m: usize, l: usize) -> Term {
    let (n, m) = if n >= m { (n, m) } else { (m, n) };
    if l > n + m || l < n - m || (n + m - l) % 2 == 1 {
        return Term::Zero;
    }
    let j = (n + m - l) / 2;
    if j == 0 {
        Term::One
    } else if j < m {
        Term::Interior(j as u32)
    } else if n > m {
        Term::Bottom(m as u32)
    } else {
        Term::Origin(n as u32)
    }
}

/// The product coefficients as printed alongside the structure constants:
/// `q^((n+m-l)/2)` on the admissible range, plus `q^(n-1)` at `l = 0` when
/// `n = m ≥ 1`. Exact constants are bounded by this from above and by half
/// of it from below.
pub fn display_coefficient(ctx: &FreeGroupCtx, n: usize, m: usize, l: usize) -> BigUint {
    let (hi, lo) = if n >= m { (n, m) } else { (m, n) };
    if l > hi + lo || l < hi - lo || (hi + lo - l) % 2 == 1 {
        return BigUint::zero();
    }
    let q = BigUint::from(ctx.q());
    let mut c = q.pow(((n + m - l) / 2) as u32);
    if n == m && n >= 1 && l == 0 {
        c += q.pow((n - 1) as u32);
    }
    c
}

/// Finitely supported radial function with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    ctx: FreeGroupCtx,
    coeffs: Vec<BigRational>,
}

impl RadialFunction {
    pub fn new(ctx: FreeGroupCtx, mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RadialFunction { ctx, coeffs }
    }

    pub fn zero(ctx: FreeGroupCtx) -> Self {
        RadialFunction::new(ctx, Vec::new())
    }

    /// `χ_n`.
    pub fn sphere(ctx: FreeGroupCtx, n: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        RadialFunction::new(ctx, coeffs)
    }

    pub fn from_integers(ctx: FreeGroupCtx, coeffs: &[i64]) -> Self {
        RadialFunction::new(
            ctx,
            coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
        )
    }

    /// Rounds each coefficient to `digits` decimal places.
    pub fn from_f64_rounded(ctx: FreeGroupCtx, coeffs: &[f64], digits: u32) -> Self {
        let scale = 10f64.powi(digits as i32);
        let denom = BigInt::from(10u32).pow(digits);
        RadialFunction::new(
            ctx,
            coeffs
                .iter()
                .map(|&c| BigRational::new(BigInt::from((c * scale).round() as i64), denom.clone()))
                .collect(),
        )
    }

    /// Parses `"f0,f1,..."` where each entry is an integer, `p/q`, or a
    /// decimal literal.
    pub fn parse(ctx: FreeGroupCtx, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(RadialFunction::zero(ctx));
        }
        let coeffs = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Ok(RadialFunction::new(ctx, coeffs))
    }

    pub fn ctx(&self) -> &FreeGroupCtx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> BigRational {
        self.coeffs.get(n).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Index of the last nonzero coefficient; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero coefficients with their sphere index.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    /// `Σ f_n |S_n|`, the sum of `f` over the group.
    pub fn mass(&self) -> BigRational {
        self.terms()
            .map(|(n, c)| c * BigRational::from_integer(BigInt::from(self.ctx.sphere_size(n))))
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(ratio_to_f64).collect()
    }

    pub fn add(&self, other: &RadialFunction) -> Result<RadialFunction> {
        self.ctx.check_same(&other.ctx)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        Ok(RadialFunction::new(
            self.ctx,
            (0..len).map(|n| self.coeff(n) + other.coeff(n)).collect(),
        ))
    }

    pub fn scale(&self, c: &BigRational) -> RadialFunction {
        RadialFunction::new(self.ctx, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// `f * g` through the structure constants.
    pub fn convolve(&self, other: &RadialFunction) -> Result<RadialFunction> {
        self.ctx.check_same(&other.ctx)?;
        if self.is_zero() || other.is_zero() {
            return Ok(RadialFunction::zero(self.ctx));
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (n, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (m, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for l in ((n.abs_diff(m))..=(n + m)).step_by(2) {
                    let c = structure_constant(&self.ctx, n, m, l);
                    out[l] += &ab * BigRational::from_integer(c.into());
                }
            }
        }
        Ok(RadialFunction::new(self.ctx, out))
    }

    /// Sparse function on the group taking the value `f_n` on every word of
    /// length `n`.
    pub fn embed(&self) -> Result<FunctionOnGroup> {
        let mut entries = BTreeMap::new();
        if let Some(d) = self.degree() {
            self.ctx.guard(&format!("ball B_{d}"), &self.ctx.ball_size(d))?;
            for (n, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for w in self.ctx.sphere(n)? {
                    entries.insert(w, c.clone());
                }
            }
        }
        Ok(FunctionOnGroup::from_map(self.ctx, entries))
    }

    /// `Σ_{n,m} |f_n| |f_m| q^((n+m)/2) (1 + min(n, m))`, exactly.
    pub fn a_functional(&self) -> Surd {
        let q = self.ctx.q();
        let qb = BigInt::from(q);
        let mut rational = BigRational::zero();
        let mut root = BigRational::zero();
        for (n, a) in self.coeffs.iter().enumerate() {
            for (m, b) in self.coeffs.iter().enumerate() {
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let weight = BigInt::from(1 + n.min(m)) * qb.pow(((n + m) / 2) as u32);
                let term = a.abs() * b.abs() * BigRational::from_integer(weight);
                if (n + m) % 2 == 0 {
                    rational += term;
                } else {
                    root += term;
                }
            }
        }
        Surd::new(rational, root, q)
    }

    /// The same double sum with the weight `q^(-(n+m)/2)`.
    pub fn a_functional_negative_exponent(&self) -> f64 {
        let f = self.to_f64();
        let q = f64::from(self.ctx.q());
        let mut total = 0.0;
        for (n, a) in f.iter().enumerate() {
            for (m, b) in f.iter().enumerate() {
                total += a.abs() * b.abs() * q.powf(-((n + m) as f64) / 2.0) * (1 + n.min(m)) as f64;
            }
        }
        total
    }

    /// `Σ f_n f_m q^((n+m)/2) (1 + min(n^(1/s'), m^(1/s')))` with `s' = s/(s-1)`
    /// and `1/s' = 0` at `s = 1`.
    pub fn conjecture_functional(&self, s: f64) -> Result<f64> {
        self.conjecture_sum(s, 1.0)
    }

    /// Variant with the weight `q^(-(n+m)/2)`.
    pub fn conjecture_functional_negative_exponent(&self, s: f64) -> Result<f64> {
        self.conjecture_sum(s, -1.0)
    }

    fn conjecture_sum(&self, s: f64, sign: f64) -> Result<f64> {
        if !(1.0..=2.0).contains(&s) {
            return Err(Error::domain(format!("conjecture index s = {s} outside [1, 2]")));
        }
        if !self.is_nonnegative() {
            return Err(Error::domain("conjecture functional needs nonnegative coefficients"));
        }
        let exp = 1.0 - 1.0 / s;
        let q = f64::from(self.ctx.q());
        let f = self.to_f64();
        let mut total = 0.0;
        for (n, a) in f.iter().enumerate() {
            for (m, b) in f.iter().enumerate() {
                let pn = root_power(n, exp);
                let pm = root_power(m, exp);
                total += a * b * q.powf(sign * (n + m) as f64 / 2.0) * (1.0 + pn.min(pm));
            }
        }
        Ok(total)
    }
}

/// `n^e` with `0^e = 0` for every `e ≥ 0`, the limit from `e > 0`.
fn root_power(n: usize, e: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n as f64).powf(e)
    }
}

impl fmt::Display for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let err = || Error::ParseRational(s.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{int_digits}{frac}");
        let mut p = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        if neg {
            p = -p;
        }
        return Ok(BigRational::new(p, BigInt::from(10u32).pow(frac.len() as u32)));
    }
    BigInt::from_str(t).map(BigRational::from_integer).map_err(|_| err())
}

/// Coefficients of `χ_n * χ_m` by enumerating every pair `(x, y)` with
/// `|x| = n`, `|y| = m` and tallying `|xy|`; the tally at length `l` divided
/// by `|S_l|` is the coefficient.
pub fn oracle_convolve(ctx: &FreeGroupCtx, n: usize, m: usize) -> Result<RadialFunction> {
    let pairs = ctx.sphere_size(n) * ctx.sphere_size(m);
    ctx.guard(&format!("pairs S_{n} x S_{m}"), &pairs)?;
    let left: Vec<_> = ctx.sphere(n)?.collect();
    let right: Vec<_> = ctx.sphere(m)?.collect();
    let mut tally = vec![0u64; n + m + 1];
    for x in &left {
        for y in &right {
            tally[x.product_len(y)] += 1;
        }
    }
    let coeffs = tally
        .into_iter()
        .enumerate()
        .map(|(l, t)| BigRational::new(BigInt::from(t), BigInt::from(ctx.sphere_size(l))))
        .collect();
    Ok(RadialFunction::new(*ctx, coeffs))
}

/// Float counterpart of [`RadialFunction::convolve`] for coefficient vectors
/// that are not rational (e.g. `q^(-k/2)` profiles).
pub fn convolve_real(ctx: &FreeGroupCtx, f: &[f64], g: &[f64]) -> Vec<f64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; f.len() + g.len() - 1];
    for (n, &a) in f.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (m, &b) in g.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            for l in ((n.abs_diff(m))..=(n + m)).step_by(2) {
                out[l] += a * b * structure_constant_f64(ctx, n, m, l);
            }
        }
    }
    out
}

pub(crate) fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    fn ints(f: &RadialFunction) -> Vec<i64> {
        f.coeffs().iter().map(|c| c.to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn small_products() {
        let ctx = f2();
        let chi = |n| RadialFunction::sphere(ctx, n);
        assert_eq!(ints(&chi(1).convolve(&chi(1)).unwrap()), vec![4, 0, 1]);
        assert_eq!(ints(&chi(2).convolve(&chi(2)).unwrap()), vec![12, 0, 2, 0, 1]);
        assert_eq!(ints(&chi(2).convolve(&chi(1)).unwrap()), vec![0, 3, 0, 1]);
        assert_eq!(structure_constant(&ctx, 3, 2, 1), BigUint::from(9u32));
        for n in 0..6 {
            for m in 0..6 {
                assert_eq!(structure_constant(&ctx, n, m, n + m), BigUint::one());
            }
        }
    }

    #[test]
    fn oracle_small_cases() {
        let ctx = f2();
        assert_eq!(ints(&oracle_convolve(&ctx, 1, 1).unwrap()), vec![4, 0, 1]);
        assert_eq!(ints(&oracle_convolve(&ctx, 0, 5).unwrap()), vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(
            oracle_convolve(&ctx, 2, 2).unwrap(),
            RadialFunction::sphere(ctx, 2)
                .convolve(&RadialFunction::sphere(ctx, 2))
                .unwrap()
        );
    }

    #[test]
    fn oracle_respects_budget() {
        let ctx = f2().with_cap(1000);
        assert!(matches!(oracle_convolve(&ctx, 4, 4), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn display_coefficient_examples() {
        let ctx = f2();
        assert_eq!(display_coefficient(&ctx, 2, 2, 2), BigUint::from(3u32));
        assert_eq!(display_coefficient(&ctx, 1, 1, 0), BigUint::from(4u32));
        assert_eq!(display_coefficient(&ctx, 2, 2, 3), BigUint::zero());
    }

    #[test]
    fn identity_element() {
        let ctx = f2();
        let f = RadialFunction::parse(ctx, "1,1/3,0,2").unwrap();
        assert_eq!(RadialFunction::sphere(ctx, 0).convolve(&f).unwrap(), f);
    }

    #[test]
    fn a_functional_examples() {
        let ctx = f2();
        assert_eq!(RadialFunction::sphere(ctx, 0).a_functional().to_f64(), 1.0);
        let a1 = RadialFunction::sphere(ctx, 1).a_functional();
        assert_eq!(
            a1.cmp_rational(&BigRational::from_integer(6.into())),
            std::cmp::Ordering::Equal
        );
        // direct four-term sum
        let f = RadialFunction::from_integers(ctx, &[0, 1, 1]);
        let expected = 6.0 + 2.0 * 3f64.powf(1.5) * 2.0 + 9.0 * 3.0;
        assert!((f.a_functional().to_f64() - expected).abs() < 1e-12);
        assert_eq!(*f.a_functional().rational_part(), BigRational::from_integer(33.into()));
        assert_eq!(*f.a_functional().root_coeff(), BigRational::from_integer(12.into()));
        let a2 = RadialFunction::sphere(ctx, 2).a_functional();
        assert_eq!(*a2.rational_part(), BigRational::from_integer(27.into()));
    }

    #[test]
    fn conjecture_functional_examples() {
        let ctx = f2();
        for s in [1.0, 1.3, 2.0] {
            assert_eq!(RadialFunction::sphere(ctx, 0).conjecture_functional(s).unwrap(), 1.0);
        }
        let chi2 = RadialFunction::sphere(ctx, 2);
        assert!((chi2.conjecture_functional(1.0).unwrap() - 18.0).abs() < 1e-12);
        let n = 3usize;
        let chin = RadialFunction::sphere(ctx, n);
        let qn = 27.0;
        assert!((chin.conjecture_functional(2.0).unwrap() - (1.0 + (n as f64).sqrt()) * qn).abs() < 1e-9);
        assert!((chin.a_functional().to_f64() - (1.0 + n as f64) * qn).abs() < 1e-9);
        assert!(chin.conjecture_functional(0.5).is_err());
        assert!(chin.conjecture_functional(2.5).is_err());
        let neg = RadialFunction::from_integers(ctx, &[1, -1]);
        assert!(neg.conjecture_functional(1.5).is_err());
    }

    #[test]
    fn parse_literals() {
        let ctx = f2();
        let f = RadialFunction::parse(ctx, "1, 1/3,0,2").unwrap();
        assert_eq!(f.to_string(), "1,1/3,0,2");
        let g = RadialFunction::parse(ctx, "0.25,-1.5,0").unwrap();
        assert_eq!(g.to_string(), "1/4,-3/2");
        assert!(RadialFunction::parse(ctx, "1,x").is_err());
        assert!(RadialFunction::parse(ctx, "1/0").is_err());
        assert!(RadialFunction::parse(ctx, "").unwrap().is_zero());
    }

    #[test]
    fn embed_examples() {
        let ctx = f2();
        let e = RadialFunction::sphere(ctx, 1).embed().unwrap();
        assert_eq!(e.support_len(), 4);
        assert_eq!(RadialFunction::zero(ctx).embed().unwrap().support_len(), 0);
        let f = RadialFunction::parse(ctx, "1,1/2,3").unwrap();
        let expected = BigRational::from_integer(1.into())
            + BigRational::new(1.into(), 4.into()) * BigRational::from_integer(4.into())
            + BigRational::from_integer(9.into()) * BigRational::from_integer(12.into());
        assert_eq!(f.embed().unwrap().l2_norm_sq(), expected);
    }

    #[test]
    fn real_path_agrees_with_exact() {
        let ctx = FreeGroupCtx::new(3).unwrap();
        let f = RadialFunction::parse(ctx, "1,2,0,1/2").unwrap();
        let g = RadialFunction::parse(ctx, "0,1,3").unwrap();
        let exact = f.convolve(&g).unwrap().to_f64();
        let real = convolve_real(&ctx, &f.to_f64(), &g.to_f64());
        assert_eq!(exact.len(), real.len());
        for (a, b) in exact.iter().zip(&real) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}

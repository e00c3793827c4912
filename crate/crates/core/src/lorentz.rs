//! Lorentz norms on counting measure.
//!
//! Functions are handled through their decreasing rearrangement, stored as
//! runs `(value, multiplicity)`. Multiplicities are sphere sizes and grow
//! exponentially, so runs are never expanded: every sum below is evaluated in
//! closed form per run.
//!
//! Norm convention: for `a_1 ≥ a_2 ≥ …`,
//! `‖f‖_{p,s} = (Σ_i a_i^s (i^{s/p} - (i-1)^{s/p}))^{1/s}` and
//! `‖f‖_{p,∞} = sup_i i^{1/p} a_i`. Indicators get `‖χ_E‖_{p,s} = |E|^{1/p}`
//! for every `s`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::operators::FunctionOnGroup;
use crate::radial::{big_to_f64, RadialFunction};
use crate::surd::ratio_to_f64;
use crate::words::FreeGroupCtx;

/// Lorentz index pair `(p, s)`; `s` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIndex {
    p: f64,
    s: f64,
}

impl LorentzIndex {
    pub fn new(p: f64, s: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::domain(format!("Lorentz exponent p = {p} must lie in (1, inf)")));
        }
        if s.is_nan() || s < 1.0 {
            return Err(Error::domain(format!("Lorentz second index s = {s} must be >= 1")));
        }
        Ok(LorentzIndex { p, s })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn conjugate_p(&self) -> f64 {
        conjugate(self.p)
    }
}

pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Decreasing rearrangement as runs of equal values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rearrangement {
    runs: Vec<(f64, BigUint)>,
}

impl Rearrangement {
    /// Takes absolute values, drops zeros, sorts decreasing and merges equal
    /// values.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, BigUint)>) -> Self {
        let mut runs: Vec<(f64, BigUint)> = pairs
            .into_iter()
            .map(|(v, m)| (v.abs(), m))
            .filter(|(v, m)| *v > 0.0 && !m.is_zero())
            .collect();
        runs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, BigUint)> = Vec::with_capacity(runs.len());
        for (v, m) in runs {
            match merged.last_mut() {
                Some((lv, lm)) if *lv == v => *lm += m,
                _ => merged.push((v, m)),
            }
        }
        Rearrangement { runs: merged }
    }

    fn from_exact(levels: BTreeMap<BigRational, BigUint>) -> Self {
        Rearrangement {
            runs: levels
                .into_iter()
                .rev()
                .filter(|(v, _)| !v.is_zero())
                .map(|(v, m)| (ratio_to_f64(&v), m))
                .collect(),
        }
    }

    pub fn runs(&self) -> &[(f64, BigUint)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Size of the support.
    pub fn total_mass(&self) -> BigUint {
        self.runs.iter().map(|(_, m)| m).sum()
    }
}

/// Rearrangement of a sparse function on the group.
pub fn rearrange(g: &FunctionOnGroup) -> Rearrangement {
    let mut levels: BTreeMap<BigRational, BigUint> = BTreeMap::new();
    for v in g.values() {
        *levels.entry(v.abs()).or_default() += 1u32;
    }
    Rearrangement::from_exact(levels)
}

/// Rearrangement of a radial function from sphere sizes alone.
pub fn rearrange_radial(f: &RadialFunction) -> Rearrangement {
    let mut levels: BTreeMap<BigRational, BigUint> = BTreeMap::new();
    for (n, c) in f.coeffs().iter().enumerate() {
        if !c.is_zero() {
            *levels.entry(c.abs()).or_default() += f.ctx().sphere_size(n);
        }
    }
    Rearrangement::from_exact(levels)
}

/// Rearrangement of a radial profile with floating coefficients.
pub fn rearrange_radial_real(ctx: &FreeGroupCtx, coeffs: &[f64]) -> Rearrangement {
    Rearrangement::from_pairs(coeffs.iter().enumerate().map(|(n, &c)| (c, ctx.sphere_size(n))))
}

/// `(start + len)^e - start^e` without cancellation for `len ≪ start`.
fn block_weight(start: f64, len: f64, e: f64) -> f64 {
    if start == 0.0 {
        len.powf(e)
    } else {
        start.powf(e) * (e * (len / start).ln_1p()).exp_m1()
    }
}

/// `‖f‖_{p,s}`; `s = ∞` gives [`weak_norm`].
pub fn lorentz_norm(r: &Rearrangement, idx: LorentzIndex) -> f64 {
    if idx.s.is_infinite() {
        return weak_norm_unchecked(r, idx.p);
    }
    let e = idx.s / idx.p;
    let mut start = 0.0f64;
    let mut acc = CompensatedSum::new();
    for (a, m) in &r.runs {
        let len = big_to_f64(m);
        acc.add(a.powf(idx.s) * block_weight(start, len, e));
        start += len;
    }
    acc.value().powf(1.0 / idx.s)
}

/// `‖f‖_{p,∞} = sup_i i^{1/p} a_i`, attained at the end of a run.
pub fn weak_norm(r: &Rearrangement, p: f64) -> Result<f64> {
    LorentzIndex::new(p, f64::INFINITY)?;
    Ok(weak_norm_unchecked(r, p))
}

fn weak_norm_unchecked(r: &Rearrangement, p: f64) -> f64 {
    let mut end = 0.0f64;
    let mut best = 0.0f64;
    for (a, m) in &r.runs {
        end += big_to_f64(m);
        best = best.max(a * end.powf(1.0 / p));
    }
    best
}

/// Weighted coefficient sums standing in for radial Lorentz norms:
/// `Σ f_n q^{n/2}` at `p = 2` and `(Σ f_n^{p'} q^{n p'/p})^{1/p'}` for
/// `1 < p < 2`.
pub fn radial_weighted_sum(f: &RadialFunction, p: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::domain(format!("weighted sum needs p in (1, 2], got {p}")));
    }
    if !f.is_nonnegative() {
        return Err(Error::domain("weighted sum needs nonnegative coefficients"));
    }
    let q = f64::from(f.ctx().q());
    let coeffs = f.to_f64();
    if p == 2.0 {
        return Ok(coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * q.powf(n as f64 / 2.0))
            .collect::<CompensatedSum>()
            .value());
    }
    let pc = conjugate(p);
    let s = coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c.powf(pc) * q.powf(n as f64 * pc / p))
        .collect::<CompensatedSum>()
        .value();
    Ok(s.powf(1.0 / pc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    fn run(v: f64, m: u64) -> (f64, BigUint) {
        (v, BigUint::from(m))
    }

    #[test]
    fn index_validation() {
        assert!(LorentzIndex::new(1.0, 2.0).is_err());
        assert!(LorentzIndex::new(2.0, 0.5).is_err());
        assert!(LorentzIndex::new(f64::INFINITY, 2.0).is_err());
        assert!(LorentzIndex::new(2.0, f64::INFINITY).is_ok());
        assert_eq!(LorentzIndex::new(1.5, 1.0).unwrap().conjugate_p(), 3.0);
        assert!(weak_norm(&Rearrangement::default(), 1.0).is_err());
    }

    #[test]
    fn indicator_norms() {
        let r = Rearrangement::from_pairs([run(1.0, 12)]);
        for s in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let v = lorentz_norm(&r, LorentzIndex::new(2.0, s).unwrap());
            assert!((v - 12f64.sqrt()).abs() < 1e-12, "s={s}: {v}");
        }
        assert!((weak_norm(&r, 2.0).unwrap() - 12f64.sqrt()).abs() < 1e-12);
        assert!((weak_norm(&r, 3.0).unwrap() - 12f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn weak_norm_example() {
        let r = Rearrangement::from_pairs([run(1.0, 5), run(2.0, 4)]);
        assert_eq!(weak_norm(&r, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn l21_of_small_radial() {
        let f = RadialFunction::from_integers(f2(), &[1, 1]);
        let v = lorentz_norm(&rearrange_radial(&f), LorentzIndex::new(2.0, 1.0).unwrap());
        // direct expansion of the five telescoping terms
        let direct: f64 = (1..=5).map(|i| (i as f64).sqrt() - ((i - 1) as f64).sqrt()).sum();
        assert!((v - direct).abs() < 1e-12);
        assert!((v - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l22_is_l2() {
        let f = RadialFunction::sphere(f2(), 1);
        let v = lorentz_norm(&rearrange_radial(&f), LorentzIndex::new(2.0, 2.0).unwrap());
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rearrangements() {
        let ctx = f2();
        let f = RadialFunction::from_integers(ctx, &[1, 2]);
        let r = rearrange(&f.embed().unwrap());
        assert_eq!(r.runs(), &[run(2.0, 4), run(1.0, 1)]);
        assert_eq!(r, rearrange_radial(&f));
        assert!(rearrange_radial(&RadialFunction::zero(ctx)).is_empty());
        let g = RadialFunction::from_f64_rounded(ctx, &[1.0, 0.5, 0.25, 0.5], 6);
        let rg = rearrange_radial(&g);
        assert_eq!(rg.runs(), &[run(1.0, 1), run(0.5, 4 + 36), run(0.25, 12)]);
        assert_eq!(rg.total_mass(), BigUint::from(53u32));
    }

    #[test]
    fn huge_runs_stay_finite() {
        let ctx = f2();
        let coeffs: Vec<f64> = (0..=120).map(|n| 3f64.powf(-(n as f64) / 2.0)).collect();
        let r = rearrange_radial_real(&ctx, &coeffs);
        for s in [1.0, 2.0, 3.0] {
            let v = lorentz_norm(&r, LorentzIndex::new(2.0, s).unwrap());
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(weak_norm(&r, 2.0).unwrap().is_finite());
    }

    #[test]
    fn weighted_sums() {
        let ctx = f2();
        let chi3 = RadialFunction::sphere(ctx, 3);
        assert!((radial_weighted_sum(&chi3, 2.0).unwrap() - 27f64.sqrt()).abs() < 1e-12);
        for p in [1.25, 1.5, 2.0] {
            assert!((radial_weighted_sum(&RadialFunction::sphere(ctx, 0), p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(radial_weighted_sum(&chi3, 1.0).is_err());
        assert!(radial_weighted_sum(&chi3, 2.5).is_err());
        let neg = RadialFunction::from_integers(ctx, &[-1]);
        assert!(radial_weighted_sum(&neg, 2.0).is_err());
    }
}

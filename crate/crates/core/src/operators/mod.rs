//! Convolution by radial functions acting on finitely supported functions,
//! exact pairings `⟨f * χ_E, χ_F⟩`, and set-search lower bounds for the
//! weak-type and restricted weak-type norms of `λ(f)`.

mod family;
mod image;
mod search;
mod truncation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lorentz::{conjugate, Rearrangement};
use crate::radial::{big_to_f64, RadialFunction};
use crate::words::{FreeGroupCtx, ReducedWord};

pub use family::{Candidate, FamilyKind, SetFamily};
pub use image::{sphere_count_levels, ImageEvaluator, Levels};
pub use search::{restricted_weak_estimate, search_family, weak_estimate_21_to_2, EstimateReport, SearchOutcome};
pub use truncation::{
    column_l1_sup, column_mass, full_cancellation_witness, length_profile, truncated_column, Alpha, BoundCheck,
    ColumnSup, Truncation,
};

/// Finitely supported function `F_k → ℚ`; zero values are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionOnGroup {
    ctx: FreeGroupCtx,
    entries: BTreeMap<ReducedWord, BigRational>,
}

impl FunctionOnGroup {
    pub fn from_map(ctx: FreeGroupCtx, mut entries: BTreeMap<ReducedWord, BigRational>) -> Self {
        entries.retain(|_, v| !v.is_zero());
        FunctionOnGroup { ctx, entries }
    }

    pub fn zero(ctx: FreeGroupCtx) -> Self {
        FunctionOnGroup::from_map(ctx, BTreeMap::new())
    }

    pub fn delta(ctx: FreeGroupCtx, x: ReducedWord) -> Self {
        FunctionOnGroup::from_map(ctx, BTreeMap::from([(x, BigRational::from_integer(1.into()))]))
    }

    pub fn indicator(set: &ElementSet) -> Self {
        let one = BigRational::from_integer(1.into());
        FunctionOnGroup::from_map(set.ctx, set.elements.iter().map(|w| (w.clone(), one.clone())).collect())
    }

    pub fn ctx(&self) -> &FreeGroupCtx {
        &self.ctx
    }

    pub fn get(&self, x: &ReducedWord) -> BigRational {
        self.entries.get(x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn entries(&self) -> &BTreeMap<ReducedWord, BigRational> {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = &BigRational> {
        self.entries.values()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// ℓ¹ mass, `Σ |g(x)|`.
    pub fn l1_norm(&self) -> BigRational {
        self.entries.values().map(num_traits::Signed::abs).sum()
    }

    pub fn l2_norm_sq(&self) -> BigRational {
        self.entries.values().map(|v| v * v).sum()
    }

    pub fn inner(&self, other: &FunctionOnGroup) -> BigRational {
        self.entries
            .iter()
            .filter_map(|(w, v)| other.entries.get(w).map(|u| v * u))
            .sum()
    }

    pub fn max_len(&self) -> usize {
        self.entries.keys().map(ReducedWord::len).max().unwrap_or(0)
    }
}

/// Finite subset of `F_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    ctx: FreeGroupCtx,
    elements: BTreeSet<ReducedWord>,
}

impl ElementSet {
    pub fn new(ctx: FreeGroupCtx, elements: impl IntoIterator<Item = ReducedWord>) -> Self {
        ElementSet {
            ctx,
            elements: elements.into_iter().collect(),
        }
    }

    pub fn sphere(ctx: FreeGroupCtx, n: usize) -> Result<Self> {
        Ok(ElementSet::new(ctx, ctx.sphere(n)?))
    }

    pub fn ball(ctx: FreeGroupCtx, radius: usize) -> Result<Self> {
        Ok(ElementSet::new(ctx, ctx.ball(radius)?))
    }

    /// Whitespace- or comma-separated word list.
    pub fn parse(ctx: FreeGroupCtx, s: &str) -> Result<Self> {
        let words = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| ctx.parse_word(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ElementSet::new(ctx, words))
    }

    pub fn ctx(&self) -> &FreeGroupCtx {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReducedWord> {
        self.elements.iter()
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.elements.contains(w)
    }

    pub fn insert(&mut self, w: ReducedWord) -> bool {
        self.elements.insert(w)
    }

    pub fn max_len(&self) -> usize {
        self.elements.iter().map(ReducedWord::len).max().unwrap_or(0)
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.elements.iter().map(|w| w.to_string()).collect();
        write!(f, "{{{}}}", words.join(" "))
    }
}

/// `f * g` for a radial `f` and a sparse `g`, by walking every reduced `w`
/// with `|w| ≤ deg f` from each point of the support of `g`.
pub fn left_convolve(f: &RadialFunction, g: &FunctionOnGroup) -> Result<FunctionOnGroup> {
    f.ctx().check_same(&g.ctx)?;
    let ctx = *f.ctx();
    let Some(deg) = f.degree() else {
        return Ok(FunctionOnGroup::zero(ctx));
    };
    let work = ctx.ball_size(deg) * BigUint::from(g.support_len());
    ctx.guard("left convolution walk", &work)?;
    let mut out: BTreeMap<ReducedWord, BigRational> = BTreeMap::new();
    for (x, gx) in &g.entries {
        image::walk_left_translates(&ctx, x, deg, |depth, z| {
            let c = &f.coeffs()[depth];
            if !c.is_zero() {
                *out.entry(z.clone()).or_insert_with(BigRational::zero) += c * gx;
            }
        });
    }
    Ok(FunctionOnGroup::from_map(ctx, out))
}

/// Histogram of `|y x⁻¹|` over `x ∈ E`, `y ∈ F`; entry `d` is `⟨χ_d * χ_E, χ_F⟩`.
pub fn distance_histogram(e: &ElementSet, f: &ElementSet) -> Vec<u64> {
    let mut hist = vec![0u64; e.max_len() + f.max_len() + 1];
    for x in &e.elements {
        for y in &f.elements {
            hist[y.quotient_len(x)] += 1;
        }
    }
    hist
}

/// `⟨f * χ_E, χ_F⟩ = Σ_{x∈E, y∈F} f_{|y x⁻¹|}`.
pub fn pairing(f: &RadialFunction, e: &ElementSet, fset: &ElementSet) -> Result<BigRational> {
    f.ctx().check_same(&e.ctx)?;
    f.ctx().check_same(&fset.ctx)?;
    let pairs = BigUint::from(e.len()) * BigUint::from(fset.len());
    f.ctx().guard("pairing", &pairs)?;
    let hist = distance_histogram(e, fset);
    Ok(hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| f.coeff(d) * BigRational::from_integer(BigInt::from(c)))
        .sum())
}

/// `max_F ⟨g, χ_F⟩ / |F|^{1/p'}` for `g ≥ 0` given by its rearrangement,
/// with the size of the optimal level-set prefix.
///
/// Inside a run of equal values the ratio is quasi-convex in the prefix
/// length, so only run starts and run ends are candidates.
pub fn best_f_ratio(r: &Rearrangement, p: f64) -> Result<(f64, BigUint)> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("best_f_ratio needs p in (1, inf), got {p}")));
    }
    let inv_pc = 1.0 / conjugate(p);
    let mut best = 0.0f64;
    let mut best_j = BigUint::zero();
    let mut sum = 0.0f64;
    let mut count = BigUint::zero();
    for (a, m) in r.runs() {
        let start = &count + 1u32;
        let v_start = (sum + a) / big_to_f64(&start).powf(inv_pc);
        if v_start > best {
            best = v_start;
            best_j = start;
        }
        sum += a * big_to_f64(m);
        count += m;
        let v_end = sum / big_to_f64(&count).powf(inv_pc);
        if v_end > best {
            best = v_end;
            best_j = count.clone();
        }
    }
    Ok((best, best_j))
}

/// `best_f_ratio` applied to the rearrangement of a sparse function.
pub fn best_f_ratio_of(g: &FunctionOnGroup, p: f64) -> Result<(f64, BigUint)> {
    if g.values().any(num_traits::Signed::is_negative) {
        return Err(Error::domain("best_f_ratio needs a nonnegative function"));
    }
    best_f_ratio(&crate::lorentz::rearrange(g), p)
}

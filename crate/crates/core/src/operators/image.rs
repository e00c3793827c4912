//! Images `f * χ_E` of candidate sets under a fixed radial `f`, as exact
//! level sets.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::family::Candidate;
use super::ElementSet;
use crate::error::{Error, Result};
use crate::lorentz::{conjugate, Rearrangement};
use crate::radial::{big_to_f64, structure_constant, RadialFunction};
use crate::surd::ratio_to_f64;
use crate::words::{digit_from_code, BallIndex, FreeGroupCtx, Letter, ReducedWord};

/// Visits every `w·x` with `w` reduced and `|w| ≤ max_depth`, reporting `|w|`.
/// Distinct `w` give distinct points.
pub(crate) fn walk_left_translates<F: FnMut(usize, &ReducedWord)>(
    ctx: &FreeGroupCtx,
    x: &ReducedWord,
    max_depth: usize,
    mut visit: F,
) {
    // reversed letters: the first letter of the current word sits at the end
    let mut stack: Vec<u8> = x.letters().iter().rev().map(|l| l.code()).collect();
    walk(ctx, &mut stack, None, 0, max_depth, &mut |depth, st: &[u8]| {
        let letters = st
            .iter()
            .rev()
            .map(|&c| ctx.letter(c.into()).expect("code in range"))
            .collect::<Vec<Letter>>();
        visit(depth, &ReducedWord::from_reduced(letters));
    });
}

fn walk<F: FnMut(usize, &[u8])>(
    ctx: &FreeGroupCtx,
    stack: &mut Vec<u8>,
    prev: Option<u8>,
    depth: usize,
    max_depth: usize,
    visit: &mut F,
) {
    visit(depth, stack);
    if depth == max_depth {
        return;
    }
    for c in 0..ctx.alphabet_size() as u8 {
        if prev == Some(c ^ 1) {
            continue;
        }
        if stack.last() == Some(&(c ^ 1)) {
            let popped = stack.pop().unwrap();
            walk(ctx, stack, Some(c), depth + 1, max_depth, visit);
            stack.push(popped);
        } else {
            stack.push(c);
            walk(ctx, stack, Some(c), depth + 1, max_depth, visit);
            stack.pop();
        }
    }
}

/// Left-translate walk reporting `(|w|, index of w·x in the ball)`. The
/// index is updated in constant time per step.
fn walk_indexed<F: FnMut(usize, usize)>(index: &BallIndex, x: &ReducedWord, max_depth: usize, visit: &mut F) {
    let ctx = index.ctx();
    let q = u64::from(ctx.q());
    let mut pows = vec![1u64; index.radius() + 1];
    for i in 1..pows.len() {
        pows[i] = pows[i - 1] * q;
    }
    let mut stack: Vec<u8> = x.letters().iter().rev().map(|l| l.code()).collect();
    let rank = index.index_of(x).expect("point inside the ball") as u64 - index.offset(x.len());
    let mut w = IndexedWalk {
        index,
        alphabet: ctx.alphabet_size() as u8,
        pows,
        max_depth,
        visit,
    };
    w.step(&mut stack, rank, None, 0);
}

struct IndexedWalk<'a, F> {
    index: &'a BallIndex,
    alphabet: u8,
    pows: Vec<u64>,
    max_depth: usize,
    visit: &'a mut F,
}

impl<F: FnMut(usize, usize)> IndexedWalk<'_, F> {
    /// `rank` is the position of the current word among words of its length.
    fn step(&mut self, stack: &mut Vec<u8>, rank: u64, prev: Option<u8>, depth: usize) {
        let len = stack.len();
        (self.visit)(depth, (self.index.offset(len) + rank) as usize);
        if depth == self.max_depth {
            return;
        }
        for c in 0..self.alphabet {
            if prev == Some(c ^ 1) {
                continue;
            }
            if stack.last() == Some(&(c ^ 1)) {
                let u0 = stack.pop().unwrap();
                let next = match stack.last() {
                    None => 0,
                    Some(&u1) => {
                        let p = self.pows[len - 2];
                        rank - u64::from(u0) * self.pows[len - 1] - digit_from_code(Some(u0), u1) * p
                            + u64::from(u1) * p
                    }
                };
                self.step(stack, next, Some(c), depth + 1);
                stack.push(u0);
            } else {
                let next = match stack.last() {
                    None => u64::from(c),
                    Some(&u0) => {
                        let p = self.pows[len - 1];
                        u64::from(c) * self.pows[len] + digit_from_code(Some(c), u0) * p + rank - u64::from(u0) * p
                    }
                };
                stack.push(c);
                self.step(stack, next, Some(c), depth + 1);
                stack.pop();
            }
        }
    }
}

#[derive(Default)]
struct CountScratch {
    counts: Vec<Vec<u32>>,
    touched: Vec<Vec<u32>>,
}

thread_local! {
    static SCRATCH: std::cell::RefCell<CountScratch> = std::cell::RefCell::new(CountScratch::default());
}

/// Level sets of `χ_n * χ_E` for every `n ≤ n_max`, from one walk per point
/// of `E`.
pub fn sphere_count_levels(set: &ElementSet, n_max: usize) -> Result<Vec<Levels>> {
    let index = BallIndex::new(*set.ctx(), set.max_len() + n_max)?;
    SCRATCH.with(|cell| {
        let mut scratch = cell.borrow_mut();
        let CountScratch { counts, touched } = &mut *scratch;
        if counts.len() < n_max + 1 {
            counts.resize(n_max + 1, Vec::new());
            touched.resize(n_max + 1, Vec::new());
        }
        for c in counts.iter_mut().take(n_max + 1) {
            if c.len() < index.len() {
                c.resize(index.len(), 0);
            }
        }
        for x in set.iter() {
            walk_indexed(&index, x, n_max, &mut |depth, i| {
                let slot = &mut counts[depth][i];
                if *slot == 0 {
                    touched[depth].push(i as u32);
                }
                *slot += 1;
            });
        }
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut hist: BTreeMap<BigUint, BigUint> = BTreeMap::new();
            for &i in &touched[n] {
                let v = std::mem::take(&mut counts[n][i as usize]);
                *hist.entry(BigUint::from(v)).or_default() += 1u32;
            }
            touched[n].clear();
            out.push(Levels::from_histogram(BigUint::one(), hist));
        }
        Ok(out)
    })
}

/// Level sets of `|g|` for a function with values in `(1/denom)·ℤ`:
/// decreasing runs `(numerator, multiplicity)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    denom: BigUint,
    runs: Vec<(BigUint, BigUint)>,
}

impl Levels {
    fn from_histogram(denom: BigUint, hist: BTreeMap<BigUint, BigUint>) -> Self {
        Levels {
            denom,
            runs: hist
                .into_iter()
                .rev()
                .filter(|(v, m)| !v.is_zero() && !m.is_zero())
                .collect(),
        }
    }

    pub fn runs(&self) -> &[(BigUint, BigUint)] {
        &self.runs
    }

    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    pub fn support_size(&self) -> BigUint {
        self.runs.iter().map(|(_, m)| m).sum()
    }

    pub fn rearrangement(&self) -> Rearrangement {
        let d = BigInt::from(self.denom.clone());
        Rearrangement::from_pairs(self.runs.iter().map(|(v, m)| {
            (
                ratio_to_f64(&BigRational::new(BigInt::from(v.clone()), d.clone())),
                m.clone(),
            )
        }))
    }

    pub fn l1_norm(&self) -> BigRational {
        let s: BigUint = self.runs.iter().map(|(v, m)| v * m).sum();
        BigRational::new(s.into(), self.denom.clone().into())
    }

    pub fn l2_norm_sq(&self) -> BigRational {
        let s: BigUint = self.runs.iter().map(|(v, m)| v * v * m).sum();
        BigRational::new(s.into(), (&self.denom * &self.denom).into())
    }

    /// `(S_j, j)` at every run start and run end, where `S_j` is the sum of
    /// the `j` largest values.
    pub fn prefix_points(&self) -> Vec<(BigRational, BigUint)> {
        let d: BigInt = self.denom.clone().into();
        let mut out = Vec::with_capacity(2 * self.runs.len());
        let mut sum = BigUint::zero();
        let mut count = BigUint::zero();
        for (v, m) in &self.runs {
            out.push((BigRational::new((&sum + v).into(), d.clone()), &count + 1u32));
            sum += v * m;
            count += m;
            if !m.is_one() {
                out.push((BigRational::new(sum.clone().into(), d.clone()), count.clone()));
            }
        }
        out
    }

    /// `max_F ⟨g, χ_F⟩ / |F|^{1/p'}` and the optimal prefix size.
    pub fn best_f_ratio(&self, p: f64) -> Result<(f64, BigUint)> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::domain(format!("best_f_ratio needs p in (1, inf), got {p}")));
        }
        let inv_pc = 1.0 / conjugate(p);
        let mut best = (0.0f64, BigUint::zero());
        for (s, j) in self.prefix_points() {
            let v = ratio_to_f64(&s) / big_to_f64(&j).powf(inv_pc);
            if v > best.0 {
                best = (v, j);
            }
        }
        Ok(best)
    }
}

/// `F * χ_a` for integer coefficients `F`.
fn convolve_with_sphere(ctx: &FreeGroupCtx, numer: &[BigInt], a: usize) -> Vec<BigInt> {
    if numer.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); numer.len() + a];
    for (n, c) in numer.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for l in (n.abs_diff(a)..=(n + a)).step_by(2) {
            out[l] += c * BigInt::from(structure_constant(ctx, n, a, l));
        }
    }
    out
}

/// Evaluates `f * χ_E` for candidate sets with `f` fixed.
///
/// `f` is rescaled to integer coefficients `F / D` once; sphere images
/// `F * χ_a` are cached up to a radius chosen at construction.
#[derive(Debug, Clone)]
pub struct ImageEvaluator {
    ctx: FreeGroupCtx,
    numer: Vec<BigInt>,
    numer_i64: Option<Vec<i64>>,
    denom: BigInt,
    sphere_images: Vec<Vec<BigInt>>,
}

impl ImageEvaluator {
    pub fn new(f: &RadialFunction, sphere_radius: usize) -> Self {
        let ctx = *f.ctx();
        let denom = f.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let numer: Vec<BigInt> = f.coeffs().iter().map(|c| c.numer() * (&denom / c.denom())).collect();
        let numer_i64 = numer.iter().map(|c| c.to_i64()).collect::<Option<Vec<_>>>();
        let sphere_images = (0..=sphere_radius)
            .map(|a| convolve_with_sphere(&ctx, &numer, a))
            .collect();
        ImageEvaluator {
            ctx,
            numer,
            numer_i64,
            denom,
            sphere_images,
        }
    }

    pub fn ctx(&self) -> &FreeGroupCtx {
        &self.ctx
    }

    pub fn degree(&self) -> Option<usize> {
        self.numer.len().checked_sub(1)
    }

    fn sphere_image(&self, a: usize) -> std::borrow::Cow<'_, [BigInt]> {
        match self.sphere_images.get(a) {
            Some(v) => std::borrow::Cow::Borrowed(v.as_slice()),
            None => std::borrow::Cow::Owned(convolve_with_sphere(&self.ctx, &self.numer, a)),
        }
    }

    /// Coefficients of `f * χ_E` for `E` a union of spheres.
    pub fn radial_image(&self, radii: &[usize]) -> RadialFunction {
        let mut acc: Vec<BigInt> = Vec::new();
        for &a in radii {
            let img = self.sphere_image(a);
            if acc.len() < img.len() {
                acc.resize(img.len(), BigInt::zero());
            }
            for (slot, v) in acc.iter_mut().zip(img.iter()) {
                *slot += v;
            }
        }
        RadialFunction::new(
            self.ctx,
            acc.into_iter()
                .map(|v| BigRational::new(v, self.denom.clone()))
                .collect(),
        )
    }

    /// `⟨f * χ_{S_a}, χ_{S_b}⟩`.
    pub fn sphere_pairing(&self, a: usize, b: usize) -> BigRational {
        let img = self.sphere_image(a);
        match img.get(b) {
            Some(v) => BigRational::new(v * BigInt::from(self.ctx.sphere_size(b)), self.denom.clone()),
            None => BigRational::zero(),
        }
    }

    pub fn levels(&self, cand: &Candidate) -> Result<Levels> {
        match cand {
            Candidate::SphereUnion(radii) => Ok(self.sphere_union_levels(radii)),
            Candidate::Explicit(set) => self.explicit_levels(set.iter(), set.max_len()),
        }
    }

    fn sphere_union_levels(&self, radii: &[usize]) -> Levels {
        let mut acc: Vec<BigInt> = Vec::new();
        for &a in radii {
            let img = self.sphere_image(a);
            if acc.len() < img.len() {
                acc.resize(img.len(), BigInt::zero());
            }
            for (slot, v) in acc.iter_mut().zip(img.iter()) {
                *slot += v;
            }
        }
        let mut hist: BTreeMap<BigUint, BigUint> = BTreeMap::new();
        for (l, v) in acc.iter().enumerate() {
            if !v.is_zero() {
                *hist.entry(v.abs().to_biguint().unwrap()).or_default() += self.ctx.sphere_size(l);
            }
        }
        Levels::from_histogram(self.denom.to_biguint().unwrap(), hist)
    }

    fn explicit_levels<'a>(&self, points: impl Iterator<Item = &'a ReducedWord>, max_len: usize) -> Result<Levels> {
        let denom = self.denom.to_biguint().unwrap();
        let Some(deg) = self.degree() else {
            return Ok(Levels::from_histogram(denom, BTreeMap::new()));
        };
        let coeffs = self
            .numer_i64
            .as_ref()
            .ok_or(Error::Overflow("scaled radial coefficients"))?;
        let index = BallIndex::new(self.ctx, max_len + deg)?;
        let mut values = vec![0i64; index.len()];
        let mut overflow = false;
        for x in points {
            walk_indexed(&index, x, deg, &mut |depth, i| {
                let c = coeffs[depth];
                if c != 0 {
                    match values[i].checked_add(c) {
                        Some(v) => values[i] = v,
                        None => overflow = true,
                    }
                }
            });
        }
        if overflow {
            return Err(Error::Overflow("image values"));
        }
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for v in values {
            if v != 0 {
                *hist.entry(v.unsigned_abs()).or_default() += 1;
            }
        }
        Ok(Levels::from_histogram(
            denom,
            hist.into_iter()
                .map(|(v, m)| (BigUint::from(v), BigUint::from(m)))
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::rearrange;
    use crate::operators::{left_convolve, ElementSet, FunctionOnGroup};

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    #[test]
    fn walk_covers_balls_once() {
        let ctx = f2();
        let x = ctx.parse_word("aB").unwrap();
        let mut seen = Vec::new();
        walk_left_translates(&ctx, &x, 3, |d, z| seen.push((d, z.clone())));
        assert_eq!(seen.len(), 53);
        for (d, z) in &seen {
            assert_eq!(z.quotient_len(&x), *d);
        }
        let distinct: std::collections::BTreeSet<_> = seen.iter().map(|(_, z)| z.clone()).collect();
        assert_eq!(distinct.len(), 53);
    }

    #[test]
    fn explicit_levels_match_slow_convolution() {
        let ctx = f2();
        let f = RadialFunction::parse(ctx, "1/2,1,0,1/3").unwrap();
        let e = ElementSet::parse(ctx, "1 a ab Ba bb").unwrap();
        let ev = ImageEvaluator::new(&f, 4);
        let levels = ev.levels(&Candidate::Explicit(e.clone())).unwrap();
        let slow = left_convolve(&f, &FunctionOnGroup::indicator(&e)).unwrap();
        assert_eq!(levels.l2_norm_sq(), slow.l2_norm_sq());
        assert_eq!(levels.rearrangement(), rearrange(&slow));
        assert_eq!(levels.support_size(), BigUint::from(slow.support_len()));
    }

    #[test]
    fn sphere_union_levels_match_explicit() {
        let ctx = f2();
        let f = RadialFunction::parse(ctx, "1,2,1/2").unwrap();
        let ev = ImageEvaluator::new(&f, 3);
        let radii = vec![0, 2, 3];
        let mut words = Vec::new();
        for &a in &radii {
            words.extend(ctx.sphere(a).unwrap());
        }
        let e = ElementSet::new(ctx, words);
        let a = ev.levels(&Candidate::SphereUnion(radii.clone())).unwrap();
        let b = ev.levels(&Candidate::Explicit(e)).unwrap();
        assert_eq!(a.runs(), b.runs());
        assert_eq!(a.denom(), b.denom());
        let image = ev.radial_image(&radii);
        let chi = RadialFunction::from_integers(ctx, &[1, 0, 1, 1]);
        assert_eq!(image, f.convolve(&chi).unwrap());
    }

    #[test]
    fn sphere_pairing_matches_sets() {
        let ctx = f2();
        let f = RadialFunction::parse(ctx, "0,1,1/2").unwrap();
        let ev = ImageEvaluator::new(&f, 3);
        for a in 0..3 {
            for b in 0..4 {
                let ea = ElementSet::sphere(ctx, a).unwrap();
                let eb = ElementSet::sphere(ctx, b).unwrap();
                assert_eq!(
                    ev.sphere_pairing(a, b),
                    crate::operators::pairing(&f, &ea, &eb).unwrap()
                );
            }
        }
    }

    #[test]
    fn sphere_count_levels_match_evaluator() {
        let ctx = f2();
        let e = ElementSet::parse(ctx, "1 a ab Ba bb abA BBB").unwrap();
        let all = sphere_count_levels(&e, 5).unwrap();
        for (n, lv) in all.iter().enumerate() {
            let ev = ImageEvaluator::new(&RadialFunction::sphere(ctx, n), 0);
            assert_eq!(*lv, ev.levels(&Candidate::Explicit(e.clone())).unwrap(), "n={n}");
        }
        // scratch buffers are reset between calls
        assert_eq!(sphere_count_levels(&e, 5).unwrap(), all);
    }

    #[test]
    fn prefix_points_cover_runs() {
        let ctx = f2();
        let ev = ImageEvaluator::new(&RadialFunction::sphere(ctx, 1), 2);
        let lv = ev.levels(&Candidate::SphereUnion(vec![1])).unwrap();
        // χ_1 * χ_1 = 4χ_0 + χ_2: one point of value 4, twelve of value 1
        let pts = lv.prefix_points();
        let as_pairs: Vec<(String, String)> = pts.iter().map(|(s, j)| (s.to_string(), j.to_string())).collect();
        assert_eq!(
            as_pairs,
            vec![
                ("4".into(), "1".into()),
                ("5".into(), "2".into()),
                ("16".into(), "13".into())
            ]
        );
        let (v, j) = lv.best_f_ratio(2.0).unwrap();
        assert_eq!(v, 16.0 / 13f64.sqrt());
        assert_eq!(j, BigUint::from(13u32));
    }

    #[test]
    fn explicit_budget_guard() {
        let ctx = f2().with_cap(1000);
        let ev = ImageEvaluator::new(&RadialFunction::sphere(ctx, 6), 0);
        let e = ElementSet::parse(ctx, "1").unwrap();
        assert!(matches!(
            ev.levels(&Candidate::Explicit(e)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}

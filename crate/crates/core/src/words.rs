//! Reduced-word arithmetic in the free group `F_k` and enumeration of
//! spheres and balls.
//!
//! Letters are coded `0..2k`: generator `g` is `2g`, its inverse `2g + 1`,
//! so inversion is `code ^ 1`. Words print as strings over `a..z`, with an
//! uppercase letter standing for the inverse (`"abA"` is `a b a⁻¹`); the
//! identity prints as `"1"`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Default enumeration cap (elements per sphere, ball, or pair product).
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Shape of the free group: generator count `k` and branching number `q = 2k - 1`.
#[derive(Debug, Clone, Copy)]
pub struct FreeGroupCtx {
    k: u32,
    cap: u64,
}

/// Contexts compare by group only; the enumeration cap is a local budget.
impl PartialEq for FreeGroupCtx {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
    }
}

impl Eq for FreeGroupCtx {}

impl FreeGroupCtx {
    pub fn new(k: u32) -> Result<Self> {
        if !(2..=26).contains(&k) {
            return Err(Error::InvalidGeneratorCount(k));
        }
        Ok(FreeGroupCtx { k, cap: DEFAULT_CAP })
    }

    /// Same group with a different enumeration cap.
    pub fn with_cap(self, cap: u64) -> Self {
        FreeGroupCtx { cap, ..self }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        2 * self.k - 1
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn alphabet_size(&self) -> u32 {
        2 * self.k
    }

    pub fn same_group(&self, other: &FreeGroupCtx) -> bool {
        self.k == other.k
    }

    pub(crate) fn check_same(&self, other: &FreeGroupCtx) -> Result<()> {
        if self.same_group(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.k,
                right: other.k,
            })
        }
    }

    pub fn letter(&self, code: u32) -> Result<Letter> {
        if code < self.alphabet_size() {
            Ok(Letter(code as u8))
        } else {
            Err(Error::InvalidLetter { code, k: self.k })
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.alphabet_size() as u8).map(Letter)
    }

    /// `|S_n|`: 1 for `n = 0`, otherwise `(q + 1) q^(n-1)`.
    pub fn sphere_size(&self, n: usize) -> BigUint {
        if n == 0 {
            BigUint::one()
        } else {
            BigUint::from(self.q() + 1) * BigUint::from(self.q()).pow((n - 1) as u32)
        }
    }

    pub fn ball_size(&self, radius: usize) -> BigUint {
        (0..=radius).map(|n| self.sphere_size(n)).sum()
    }

    pub fn sphere_size_f64(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            (self.q() + 1) as f64 * (self.q() as f64).powi(n as i32 - 1)
        }
    }

    /// Fails with `BudgetExceeded` when `count` is above the cap.
    pub(crate) fn guard(&self, what: &str, count: &BigUint) -> Result<u64> {
        match count.to_u64() {
            Some(c) if c <= self.cap => Ok(c),
            _ => Err(Error::budget(what, count, self.cap)),
        }
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn normalize(&self, seq: &[Letter]) -> Result<ReducedWord> {
        let mut out: Vec<Letter> = Vec::with_capacity(seq.len());
        for &l in seq {
            if u32::from(l.0) >= self.alphabet_size() {
                return Err(Error::InvalidLetter {
                    code: l.0.into(),
                    k: self.k,
                });
            }
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(ReducedWord { letters: out })
    }

    pub fn parse_word(&self, s: &str) -> Result<ReducedWord> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(ReducedWord::identity());
        }
        let mut seq = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let code = match ch {
                'a'..='z' => 2 * (ch as u32 - 'a' as u32),
                'A'..='Z' => 2 * (ch as u32 - 'A' as u32) + 1,
                _ => return Err(Error::ParseWord(s.to_string())),
            };
            seq.push(self.letter(code).map_err(|_| Error::ParseWord(s.to_string()))?);
        }
        self.normalize(&seq)
    }

    /// Words of length exactly `n` in lexicographic order of letter codes.
    pub fn sphere(&self, n: usize) -> Result<SphereIter> {
        self.guard(&format!("sphere S_{n}"), &self.sphere_size(n))?;
        Ok(SphereIter::new(*self, n))
    }

    /// Words of length at most `radius`, shortest first.
    pub fn ball(&self, radius: usize) -> Result<Vec<ReducedWord>> {
        self.guard(&format!("ball B_{radius}"), &self.ball_size(radius))?;
        let mut out = Vec::new();
        for n in 0..=radius {
            out.extend(SphereIter::new(*self, n));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn code(self) -> u8 {
        self.0
    }

    pub fn generator(self) -> u8 {
        self.0 >> 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator()) as char
    }
}

/// Element of `F_k` in its unique reduced form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord { letters: Vec::new() }
    }

    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1].inverse()));
        ReducedWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Same as [`ReducedWord::is_identity`].
    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Number of letter pairs that cancel in `self · other`.
    pub fn cancellation_depth(&self, other: &ReducedWord) -> usize {
        self.letters
            .iter()
            .rev()
            .zip(other.letters.iter())
            .take_while(|(a, b)| **a == b.inverse())
            .count()
    }

    /// `|self · other|` without building the product.
    pub fn product_len(&self, other: &ReducedWord) -> usize {
        self.len() + other.len() - 2 * self.cancellation_depth(other)
    }

    /// `|self · other⁻¹|`, i.e. the tree distance between the two words when
    /// the group acts by left multiplication.
    pub fn quotient_len(&self, other: &ReducedWord) -> usize {
        let common = self
            .letters
            .iter()
            .rev()
            .zip(other.letters.iter().rev())
            .take_while(|(a, b)| a == b)
            .count();
        self.len() + other.len() - 2 * common
    }

    pub fn mul(&self, other: &ReducedWord) -> ReducedWord {
        let c = self.cancellation_depth(other);
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * c);
        letters.extend_from_slice(&self.letters[..self.len() - c]);
        letters.extend_from_slice(&other.letters[c..]);
        ReducedWord { letters }
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Letter code at a position given the previous letter. Digit `d` ranges over
/// `0..q` after the first position; skipping the forbidden inverse keeps the
/// digit order equal to the code order.
#[inline]
fn code_from_digit(prev: Option<u8>, digit: u32) -> u8 {
    match prev {
        None => digit as u8,
        Some(p) => {
            let forbidden = u32::from(p ^ 1);
            if digit < forbidden {
                digit as u8
            } else {
                (digit + 1) as u8
            }
        }
    }
}

#[inline]
pub(crate) fn digit_from_code(prev: Option<u8>, code: u8) -> u64 {
    match prev {
        None => code as u64,
        Some(p) => {
            let forbidden = p ^ 1;
            if code < forbidden {
                code as u64
            } else {
                (code - 1) as u64
            }
        }
    }
}

/// Odometer over the words of one sphere.
#[derive(Debug, Clone)]
pub struct SphereIter {
    ctx: FreeGroupCtx,
    digits: Vec<u32>,
    done: bool,
}

impl SphereIter {
    fn new(ctx: FreeGroupCtx, n: usize) -> Self {
        SphereIter {
            ctx,
            digits: vec![0; n],
            done: false,
        }
    }

    fn current(&self) -> ReducedWord {
        let mut letters = Vec::with_capacity(self.digits.len());
        let mut prev = None;
        for &d in &self.digits {
            let c = code_from_digit(prev, d);
            letters.push(Letter(c));
            prev = Some(c);
        }
        ReducedWord { letters }
    }

    fn advance(&mut self) {
        let q = self.ctx.q();
        let a = self.ctx.alphabet_size();
        for pos in (0..self.digits.len()).rev() {
            let radix = if pos == 0 { a } else { q };
            if self.digits[pos] + 1 < radix {
                self.digits[pos] += 1;
                return;
            }
            self.digits[pos] = 0;
        }
        self.done = true;
    }
}

impl Iterator for SphereIter {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        if self.done {
            return None;
        }
        let w = self.current();
        self.advance();
        Some(w)
    }
}

/// Dense bijection between the ball `B_R` and `0..|B_R|`, compatible with the
/// enumeration order of [`FreeGroupCtx::ball`].
#[derive(Debug, Clone)]
pub struct BallIndex {
    ctx: FreeGroupCtx,
    radius: usize,
    offsets: Vec<u64>,
}

impl BallIndex {
    pub fn new(ctx: FreeGroupCtx, radius: usize) -> Result<Self> {
        let total = ctx.guard(&format!("ball B_{radius}"), &ctx.ball_size(radius))?;
        let mut offsets = Vec::with_capacity(radius + 2);
        let mut acc = 0u64;
        for n in 0..=radius {
            offsets.push(acc);
            acc += ctx.sphere_size(n).to_u64().expect("guarded above");
        }
        offsets.push(total);
        Ok(BallIndex { ctx, radius, offsets })
    }

    pub fn ctx(&self) -> &FreeGroupCtx {
        &self.ctx
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the first word of length `len`.
    pub(crate) fn offset(&self, len: usize) -> u64 {
        self.offsets[len]
    }

    /// Index of the word whose letter codes are produced by `codes`
    /// (first letter first). `None` when the word is outside the ball.
    pub fn index_of_codes<I: Iterator<Item = u8>>(&self, len: usize, codes: I) -> Option<usize> {
        if len > self.radius {
            return None;
        }
        let q = self.ctx.q() as u64;
        let mut idx = 0u64;
        let mut prev = None;
        for (pos, c) in codes.enumerate() {
            let d = digit_from_code(prev, c);
            idx = if pos == 0 { d } else { idx * q + d };
            prev = Some(c);
        }
        Some((self.offsets[len] + idx) as usize)
    }

    pub fn index_of(&self, w: &ReducedWord) -> Option<usize> {
        self.index_of_codes(w.len(), w.letters.iter().map(|l| l.0))
    }

    pub fn word_at(&self, index: usize) -> ReducedWord {
        let index = index as u64;
        let len = self
            .offsets
            .windows(2)
            .position(|w| index >= w[0] && index < w[1])
            .expect("index inside ball");
        let mut rem = index - self.offsets[len];
        let q = self.ctx.q() as u64;
        let mut digits = vec![0u32; len];
        for pos in (1..len).rev() {
            digits[pos] = (rem % q) as u32;
            rem /= q;
        }
        if len > 0 {
            digits[0] = rem as u32;
        }
        let mut letters = Vec::with_capacity(len);
        let mut prev = None;
        for d in digits {
            let c = code_from_digit(prev, d);
            letters.push(Letter(c));
            prev = Some(c);
        }
        ReducedWord { letters }
    }
}

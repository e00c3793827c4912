//! Truncated pieces of `λ(χ_n)`: the operators `P_k` and `Q_n^α` keep the
//! matrix entries `⟨χ_n * δ_x, δ_y⟩` only when `|x| ≥ |y|` (resp.
//! `|x| ≥ q^α |y|`). Their columns `P δ_x` are indicator functions, so the
//! column ℓ¹ mass is a count.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::FunctionOnGroup;
use crate::error::Result;
use crate::words::{FreeGroupCtx, ReducedWord};

/// Exponent `α`; half-integers are handled exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// `α = v / 2`.
    Half(i32),
    Real(f64),
}

impl Alpha {
    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Half(v) => f64::from(v) / 2.0,
            Alpha::Real(a) => a,
        }
    }

    /// `(log|E| - log|F|) / (2 log q)`, the choice balancing the two terms of
    /// `q^{-α}|E| + q^{α}|F|`.
    pub fn balancing(q: u32, e_size: f64, f_size: f64) -> Alpha {
        Alpha::Real((e_size.ln() - f_size.ln()) / (2.0 * f64::from(q).ln()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    P { k: usize },
    Q { n: usize, alpha: Alpha },
}

impl Truncation {
    /// Length of the words `w` in the column sum.
    pub fn length(&self) -> usize {
        match *self {
            Truncation::P { k } => k,
            Truncation::Q { n, .. } => n,
        }
    }

    /// Whether the entry `(x, y)` survives, from `|x|` and `|y|`.
    pub fn keeps(&self, q: u32, x_len: usize, y_len: usize) -> bool {
        match *self {
            Truncation::P { .. } => y_len <= x_len,
            Truncation::Q { alpha, .. } => match alpha {
                Alpha::Half(v) => {
                    // |x| ≥ q^{v/2} |y|  ⇔  |x|² q^{max(0,-v)} ≥ |y|² q^{max(0,v)}
                    let scaled = |len: usize, e: u32| {
                        u128::from(q)
                            .checked_pow(e)
                            .and_then(|p| p.checked_mul((len * len) as u128))
                    };
                    let (ex, ey) = (v.min(0).unsigned_abs(), v.max(0).unsigned_abs());
                    match (scaled(x_len, ex), scaled(y_len, ey)) {
                        (Some(a), Some(b)) => a >= b,
                        _ => {
                            let qb = BigUint::from(q);
                            BigUint::from(x_len * x_len) * qb.pow(ex) >= BigUint::from(y_len * y_len) * qb.pow(ey)
                        }
                    }
                }
                Alpha::Real(a) => x_len as f64 >= f64::from(q).powf(a) * y_len as f64,
            },
        }
    }

    /// Claimed column bound: `q^{[k/2]}` for `P_k`, `q^{3/2 - α + n/2}` for `Q_n^α`.
    pub fn bound(&self, q: u32) -> f64 {
        let qf = f64::from(q);
        match *self {
            Truncation::P { k } => qf.powi((k / 2) as i32),
            Truncation::Q { n, alpha } => qf.powf(1.5 - alpha.value() + n as f64 / 2.0),
        }
    }

    /// Compares a column mass with [`Truncation::bound`], exactly whenever the
    /// exponent is a half-integer.
    pub fn compare_mass(&self, q: u32, mass: u64) -> Ordering {
        let qb = BigUint::from(q);
        let m = BigUint::from(mass);
        match *self {
            Truncation::P { k } => m.cmp(&qb.pow((k / 2) as u32)),
            Truncation::Q {
                n,
                alpha: Alpha::Half(v),
            } => {
                // mass ≤ q^{(3 - v + n)/2}  ⇔  mass² ≤ q^{3 - v + n}
                let e = 3 - i64::from(v) + n as i64;
                let m2 = &m * &m;
                if e >= 0 {
                    m2.cmp(&qb.pow(e as u32))
                } else {
                    (m2 * qb.pow((-e) as u32)).cmp(&BigUint::one())
                }
            }
            Truncation::Q { .. } => {
                let b = self.bound(q);
                let mf = mass as f64;
                if mf > b * (1.0 + 1e-12) {
                    Ordering::Greater
                } else if mf < b * (1.0 - 1e-12) {
                    Ordering::Less
                } else {
                    Ordering::Equal
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Truncation::P { k } => format!("P_{k}"),
            Truncation::Q { n, alpha } => format!("Q_{n}^{}", alpha.value()),
        }
    }
}

/// Counts of `|w x|` over `|w| = n`, indexed by length.
pub fn length_profile(ctx: &FreeGroupCtx, n: usize, x: &ReducedWord) -> Result<Vec<u64>> {
    let sphere: Vec<ReducedWord> = ctx.sphere(n)?.collect();
    Ok(profile_with(&sphere, x))
}

fn profile_with(sphere: &[ReducedWord], x: &ReducedWord) -> Vec<u64> {
    let n = sphere.first().map_or(0, ReducedWord::len);
    let mut prof = vec![0u64; n + x.len() + 1];
    for w in sphere {
        prof[w.product_len(x)] += 1;
    }
    prof
}

fn mass_from_profile(t: &Truncation, q: u32, x_len: usize, prof: &[u64]) -> u64 {
    prof.iter()
        .enumerate()
        .filter(|(y_len, &c)| c > 0 && t.keeps(q, x_len, *y_len))
        .map(|(_, &c)| c)
        .sum()
}

/// `‖T δ_x‖_1`.
pub fn column_mass(ctx: &FreeGroupCtx, t: &Truncation, x: &ReducedWord) -> Result<u64> {
    let prof = length_profile(ctx, t.length(), x)?;
    Ok(mass_from_profile(t, ctx.q(), x.len(), &prof))
}

/// The column `T δ_x` itself.
pub fn truncated_column(ctx: &FreeGroupCtx, t: &Truncation, x: &ReducedWord) -> Result<FunctionOnGroup> {
    let one = num_rational::BigRational::one();
    let mut entries = std::collections::BTreeMap::new();
    for w in ctx.sphere(t.length())? {
        let y = w.mul(x);
        if t.keeps(ctx.q(), x.len(), y.len()) {
            entries.insert(y, one.clone());
        }
    }
    Ok(FunctionOnGroup::from_map(*ctx, entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundCheck {
    Below,
    Equal,
    Above,
}

impl From<Ordering> for BoundCheck {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => BoundCheck::Below,
            Ordering::Equal => BoundCheck::Equal,
            Ordering::Greater => BoundCheck::Above,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColumnSup {
    pub truncation: Truncation,
    pub radius: usize,
    pub sup: u64,
    /// First point of `B_R` (in enumeration order) attaining the sup.
    pub argmax: ReducedWord,
    pub bound: f64,
    pub check: BoundCheck,
    /// Points `x ∈ B_R` whose column mass exceeds the bound.
    pub violations: usize,
}

/// `sup_{x ∈ B_R} ‖T δ_x‖_1` for each truncation, compared with its bound.
pub fn column_l1_sup(ctx: &FreeGroupCtx, ts: &[Truncation], radius: usize) -> Result<Vec<ColumnSup>> {
    let ball = ctx.ball(radius)?;
    let q = ctx.q();
    let mut lengths: Vec<usize> = ts.iter().map(Truncation::length).collect();
    lengths.sort_unstable();
    lengths.dedup();
    let mut out: Vec<Option<ColumnSup>> = vec![None; ts.len()];
    for n in lengths {
        let sphere: Vec<ReducedWord> = ctx.sphere(n)?.collect();
        let idx: Vec<usize> = (0..ts.len()).filter(|&i| ts[i].length() == n).collect();
        let masses: Vec<Vec<u64>> = ball
            .par_iter()
            .map(|x| {
                let prof = profile_with(&sphere, x);
                idx.iter()
                    .map(|&i| mass_from_profile(&ts[i], q, x.len(), &prof))
                    .collect()
            })
            .collect();
        for (slot, &i) in idx.iter().enumerate() {
            let t = ts[i];
            let mut sup = 0u64;
            let mut arg = 0usize;
            let mut violations = 0usize;
            for (xi, row) in masses.iter().enumerate() {
                let m = row[slot];
                if xi == 0 || m > sup {
                    sup = m;
                    arg = xi;
                }
                if t.compare_mass(q, m) == Ordering::Greater {
                    violations += 1;
                }
            }
            out[i] = Some(ColumnSup {
                truncation: t,
                radius,
                sup,
                argmax: ball[arg].clone(),
                bound: t.bound(q),
                check: t.compare_mass(q, sup).into(),
                violations,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|c| c.expect("every truncation evaluated"))
        .collect())
}

/// The column of `Q_n^α` at `x` with `|x| = n` always holds `δ_e` (take
/// `w = x⁻¹`), so its mass is at least one whatever `α` is. Returns `x`, the
/// column mass and the comparison with the claimed bound.
pub fn full_cancellation_witness(ctx: &FreeGroupCtx, n: usize, alpha: Alpha) -> Result<(ReducedWord, u64, BoundCheck)> {
    let x = ctx.sphere(n)?.next().expect("spheres are nonempty");
    let t = Truncation::Q { n, alpha };
    let column = truncated_column(ctx, &t, &x)?;
    debug_assert!(!column.get(&ReducedWord::identity()).is_zero());
    let mass = column.support_len() as u64;
    Ok((x, mass, t.compare_mass(ctx.q(), mass).into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    #[test]
    fn p2_column_at_ab() {
        let ctx = f2();
        let x = ctx.parse_word("ab").unwrap();
        let col = truncated_column(&ctx, &Truncation::P { k: 2 }, &x).unwrap();
        let words: Vec<String> = col.entries().keys().map(|w| w.to_string()).collect();
        let mut expected = vec!["1".to_string(), "bb".into(), "Ab".into()];
        expected.sort();
        let mut got = words.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(column_mass(&ctx, &Truncation::P { k: 2 }, &x).unwrap(), 3);
    }

    #[test]
    fn p_column_at_identity_is_empty() {
        let ctx = f2();
        for k in 1..4 {
            let col = truncated_column(&ctx, &Truncation::P { k }, &ReducedWord::identity()).unwrap();
            assert_eq!(col.support_len(), 0);
        }
    }

    #[test]
    fn q_column_contains_identity() {
        let ctx = f2();
        let x = ctx.parse_word("abab").unwrap();
        for v in [-8, -3, 0, 5, 8] {
            let t = Truncation::Q {
                n: 4,
                alpha: Alpha::Half(v),
            };
            let col = truncated_column(&ctx, &t, &x).unwrap();
            assert!(!col.get(&ReducedWord::identity()).is_zero());
            assert!(column_mass(&ctx, &t, &x).unwrap() >= 1);
        }
    }

    #[test]
    fn half_integer_keep_rule_is_exact() {
        // |x| = 3, |y| = 1, α = 1: 3 ≥ 3·1 holds with equality
        let t = Truncation::Q {
            n: 2,
            alpha: Alpha::Half(2),
        };
        assert!(t.keeps(3, 3, 1));
        assert!(!t.keeps(3, 2, 1));
        let t = Truncation::Q {
            n: 2,
            alpha: Alpha::Half(-2),
        };
        assert!(t.keeps(3, 1, 3));
        assert!(!t.keeps(3, 1, 4));
        assert!(t.keeps(3, 0, 0));
    }

    #[test]
    fn compare_mass_exact() {
        let q = 3;
        let t = Truncation::Q {
            n: 4,
            alpha: Alpha::Half(0),
        };
        // bound q^{3/2 + 2} = 3^{3.5} ≈ 46.77
        assert_eq!(t.compare_mass(q, 46), Ordering::Less);
        assert_eq!(t.compare_mass(q, 47), Ordering::Greater);
        let t = Truncation::Q {
            n: 4,
            alpha: Alpha::Half(8),
        };
        // bound q^{-1/2} < 1
        assert_eq!(t.compare_mass(q, 1), Ordering::Greater);
        assert_eq!(t.compare_mass(q, 0), Ordering::Less);
        assert_eq!(Truncation::P { k: 4 }.compare_mass(q, 9), Ordering::Equal);
    }

    #[test]
    fn p_sup_small_radius() {
        let ctx = f2();
        let ts: Vec<Truncation> = (0..=4).map(|k| Truncation::P { k }).collect();
        let sups = column_l1_sup(&ctx, &ts, 5).unwrap();
        for s in &sups {
            let Truncation::P { k } = s.truncation else {
                unreachable!()
            };
            assert_eq!(s.sup, 3u64.pow((k / 2) as u32));
            assert_eq!(s.check, BoundCheck::Equal);
            assert_eq!(s.violations, 0);
        }
    }

    #[test]
    fn witness_violates_for_large_alpha() {
        let ctx = f2();
        let (x, mass, check) = full_cancellation_witness(&ctx, 4, Alpha::Half(8)).unwrap();
        assert_eq!(x.len(), 4);
        assert!(mass >= 1);
        assert_eq!(check, BoundCheck::Above);
        let (_, _, check) = full_cancellation_witness(&ctx, 2, Alpha::Half(4)).unwrap();
        assert_ne!(check, BoundCheck::Above);
    }

    #[test]
    fn balancing_alpha() {
        let a = Alpha::balancing(3, 9.0, 1.0);
        assert!((a.value() - 1.0).abs() < 1e-12);
    }
}

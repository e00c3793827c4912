use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use super::{verdict, CheckRow, Num, VerificationReport};
use crate::error::Result;
use crate::operators::{
    column_l1_sup, distance_histogram, full_cancellation_witness, restricted_weak_estimate, search_family,
    sphere_count_levels, Alpha, BoundCheck, Candidate, FamilyKind, ImageEvaluator, Levels, SetFamily, Truncation,
};
use crate::radial::{big_to_f64, structure_constant, RadialFunction};
use crate::words::FreeGroupCtx;

/// Outcome of one inequality for one candidate set.
#[derive(Clone)]
pub(crate) struct Cell {
    pub lhs: Num,
    pub rhs: Num,
    pub margin: Option<f64>,
    pub holds: bool,
    pub detail: Option<String>,
}

impl Cell {
    pub fn at_most(lhs: Num, rhs: Num, holds: bool) -> Cell {
        let margin = super::ratio_margin(&rhs, &lhs);
        Cell {
            lhs,
            rhs,
            margin,
            holds,
            detail: None,
        }
    }

    /// How close the candidate comes to violating: failures rank first.
    fn badness(&self) -> f64 {
        match (self.holds, self.margin) {
            (false, _) => f64::INFINITY,
            (true, Some(m)) if m > 0.0 => 1.0 / m,
            _ => 0.0,
        }
    }
}

/// Evaluates `eval` on every set of the family and condenses each labelled
/// inequality into one row: the number of violations, and the first
/// violating (else tightest) set as witness. Greedy families grow a set
/// towards a violation of each inequality separately.
pub(crate) fn family_sweep<F>(ctx: &FreeGroupCtx, fam: &SetFamily, labels: &[String], eval: F) -> Result<Vec<CheckRow>>
where
    F: Fn(&Candidate) -> Result<Vec<Cell>> + Sync,
{
    let mut rows = Vec::with_capacity(labels.len());
    if fam.kind == FamilyKind::Greedy {
        for (i, label) in labels.iter().enumerate() {
            let out = search_family(ctx, fam, |c| Ok((eval(c)?.swap_remove(i).badness(), BigUint::zero())))?;
            let best = out.best.expect("greedy search starts from a set");
            let cell = eval(&best)?.swap_remove(i);
            let violations = usize::from(!cell.holds);
            rows.push(cell_row(label, cell, &best, out.evaluated as u64, violations));
        }
        return Ok(rows);
    }
    let candidates: Vec<Candidate> = fam.candidates(ctx)?.into_iter().filter(|c| !c.is_empty()).collect();
    let results = candidates.par_iter().map(&eval).collect::<Result<Vec<_>>>()?;
    for (i, label) in labels.iter().enumerate() {
        let mut violations = 0usize;
        let mut worst: Option<usize> = None;
        for (ci, cells) in results.iter().enumerate() {
            let c = &cells[i];
            if !c.holds {
                violations += 1;
            }
            let replace = match worst {
                None => true,
                Some(w) => c.badness() > results[w][i].badness(),
            };
            if replace {
                worst = Some(ci);
            }
        }
        let w = worst.expect("families are nonempty");
        let cell = results[w][i].clone();
        rows.push(cell_row(
            label,
            cell,
            &candidates[w],
            candidates.len() as u64,
            violations,
        ));
    }
    Ok(rows)
}

fn cell_row(label: &str, cell: Cell, cand: &Candidate, cases: u64, violations: usize) -> CheckRow {
    let witness = match &cell.detail {
        Some(d) => format!("E={cand}; {d}"),
        None => format!("E={cand}"),
    };
    CheckRow::new(
        label.to_string(),
        cell.lhs,
        cell.rhs,
        cell.margin,
        verdict(cell.holds && violations == 0),
    )
    .with_param("violations", violations)
    .with_witness(witness)
    .with_cases(cases)
}

/// `⟨χ_k * χ_E, χ_E⟩ ≤ 2 q^{[k/2]} |E|` over the family for `k ≤ k_max`.
pub fn verify_lemma1(ctx: &FreeGroupCtx, fam: &SetFamily, k_max: usize) -> Result<VerificationReport> {
    let q = BigUint::from(ctx.q());
    let labels: Vec<String> = (0..=k_max).map(|k| format!("k={k}")).collect();
    let rows = family_sweep(ctx, fam, &labels, |cand| {
        let size = cand.size(ctx);
        let lhs: Vec<BigUint> = match cand {
            Candidate::SphereUnion(radii) => (0..=k_max)
                .map(|k| {
                    radii
                        .iter()
                        .flat_map(|&a| radii.iter().map(move |&b| (a, b)))
                        .map(|(a, b)| structure_constant(ctx, k, a, b) * ctx.sphere_size(b))
                        .sum()
                })
                .collect(),
            Candidate::Explicit(set) => {
                let hist = distance_histogram(set, set);
                (0..=k_max)
                    .map(|k| BigUint::from(hist.get(k).copied().unwrap_or(0)))
                    .collect()
            }
        };
        Ok(lhs
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                let rhs = q.pow((k / 2) as u32) * &size * 2u32;
                let holds = l <= rhs;
                Cell::at_most(Num::int(l), Num::int(rhs), holds)
            })
            .collect())
    })?;
    let mut rep = VerificationReport::new("lemma1", "<chi_k * chi_E, chi_E> <= 2 q^[k/2] |E|")
        .param("k", ctx.k())
        .param("k_max", k_max)
        .param("family", fam);
    rows.into_iter().for_each(|r| rep.push(r));
    Ok(rep.finish())
}

/// The worst prefix of a level-set list against `S_j² ≤ c·j`, exactly.
fn worst_prefix(levels: &Levels, c: &BigRational) -> Option<(BigRational, BigUint, bool)> {
    let mut worst: Option<(BigRational, BigUint, BigRational)> = None;
    let mut holds = true;
    for (s, j) in levels.prefix_points() {
        let jr = BigRational::from_integer(BigInt::from(j.clone()));
        let ratio = &s * &s / &jr;
        holds &= ratio <= *c;
        if worst.as_ref().is_none_or(|(_, _, r)| ratio > *r) {
            worst = Some((s, j, ratio));
        }
    }
    worst.map(|(s, j, _)| (s, j, holds))
}

/// `⟨χ_n * χ_E, χ_F⟩ ≤ 2 q^{3/2} q^{n/2} |E|^{1/2} |F|^{1/2}` for every `F`
/// and every `E` in the family, `n ≤ n_max`. For fixed `E` and `|F| = j` the
/// pairing is largest on the top `j` level sets of `χ_n * χ_E`, and
/// `S_j / √j` peaks at a run boundary, so the check runs over prefix points
/// and is exact: `S_j² ≤ 4 q^{3+n} |E| j`.
pub fn verify_r22(ctx: &FreeGroupCtx, fam: &SetFamily, n_max: usize) -> Result<VerificationReport> {
    let qf = f64::from(ctx.q());
    let evs: Vec<ImageEvaluator> = (0..=n_max)
        .map(|n| ImageEvaluator::new(&RadialFunction::sphere(*ctx, n), fam.radius))
        .collect();
    let labels: Vec<String> = (0..=n_max).map(|n| format!("n={n}")).collect();
    let rows = family_sweep(ctx, fam, &labels, |cand| {
        let size = cand.size(ctx);
        let levels: Vec<Levels> = match cand {
            Candidate::SphereUnion(_) => evs.iter().map(|ev| ev.levels(cand)).collect::<Result<_>>()?,
            Candidate::Explicit(set) => sphere_count_levels(set, n_max)?,
        };
        Ok(levels
            .iter()
            .enumerate()
            .map(|(n, lv)| {
                let c =
                    BigRational::from_integer(BigInt::from(BigUint::from(ctx.q()).pow(3 + n as u32) * &size * 4u32));
                match worst_prefix(lv, &c) {
                    None => Cell::at_most(Num::int(0), Num::Real(0.0), true),
                    Some((s, j, holds)) => {
                        let rhs = 2.0 * qf.powf(1.5 + n as f64 / 2.0) * (big_to_f64(&size) * big_to_f64(&j)).sqrt();
                        let mut cell = Cell::at_most(Num::Exact(s), Num::Real(rhs), holds);
                        cell.detail = Some(format!("|F|={j}"));
                        cell
                    }
                }
            })
            .collect())
    })?;
    let mut rep = VerificationReport::new("r22", "<chi_n * chi_E, chi_F> <= 2 q^(3/2) q^(n/2) |E|^(1/2) |F|^(1/2)")
        .param("k", ctx.k())
        .param("n_max", n_max)
        .param("family", fam);
    rows.into_iter().for_each(|r| rep.push(r));
    Ok(rep.finish())
}

/// `c ≤ restricted_weak_estimate(χ_n) / q^{n/2} ≤ 2 q^{3/2}` for `n` in the
/// range.
pub fn r22_sphere_band(
    ctx: &FreeGroupCtx,
    ns: std::ops::RangeInclusive<usize>,
    fam: &SetFamily,
    c_floor: f64,
) -> Result<VerificationReport> {
    let qf = f64::from(ctx.q());
    let upper = 2.0 * qf.powf(1.5);
    let mut rep = VerificationReport::new(
        "r22_band",
        "c <= restricted_weak_estimate(chi_n) / q^(n/2) <= 2 q^(3/2)",
    )
    .param("k", ctx.k())
    .param("family", fam)
    .param("c", c_floor);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for n in ns {
        let est = restricted_weak_estimate(&RadialFunction::sphere(*ctx, n), fam)?;
        let ratio = est.estimate / qf.powf(n as f64 / 2.0);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        let holds = ratio >= c_floor && ratio <= upper;
        rep.push(
            CheckRow::new(
                format!("n={n}"),
                Num::Real(ratio),
                Num::Real(upper),
                Some((upper / ratio).min(ratio / c_floor)),
                verdict(holds),
            )
            .with_param("estimate", crate::report::format_real(est.estimate))
            .with_witness(format!("E={}; |F|={}", est.argmax, est.j))
            .with_cases(est.evaluated as u64),
        );
    }
    rep.note("ratio_min", Num::Real(lo));
    rep.note("ratio_max", Num::Real(hi));
    Ok(rep.finish())
}

/// `sup_{x ∈ B_R} ‖P_k δ_x‖_1 ≤ q^{[k/2]}` for `k ≤ k_max`; even `k` must
/// attain the bound.
pub fn verify_pk(ctx: &FreeGroupCtx, k_max: usize, radius: usize) -> Result<VerificationReport> {
    let ts: Vec<Truncation> = (0..=k_max).map(|k| Truncation::P { k }).collect();
    let sups = column_l1_sup(ctx, &ts, radius)?;
    let mut rep = VerificationReport::new("pk", "sup_x ||P_k delta_x||_1 <= q^[k/2], with equality for even k")
        .param("k", ctx.k())
        .param("k_max", k_max)
        .param("radius", radius);
    for (k, s) in sups.into_iter().enumerate() {
        let bound = BigUint::from(ctx.q()).pow((k / 2) as u32);
        let below = s.check != BoundCheck::Above;
        let attained = s.check == BoundCheck::Equal;
        let holds = below && (k % 2 == 1 || attained);
        rep.push(
            CheckRow::at_most(format!("k={k}"), Num::int(s.sup), Num::int(bound), holds)
                .with_param("attained", attained)
                .with_param("violations", s.violations)
                .with_witness(format!("x={}", s.argmax))
                .with_cases(ctx.ball_size(radius).to_string().parse().unwrap_or(u64::MAX)),
        );
    }
    Ok(rep.finish())
}

/// `sup_{x ∈ B_R} ‖Q_n^α δ_x‖_1 ≤ q^{3/2 - α + n/2}` for `n ≤ n_max` and
/// `α ∈ {-n/2, …, n/2}` (step 1/2). Also reports, without a verdict, the
/// column at `|x| = n` for `α = n`, which always contains `δ_e`.
pub fn verify_qn(ctx: &FreeGroupCtx, n_max: usize, radius: usize) -> Result<VerificationReport> {
    let mut ts = Vec::new();
    for n in 0..=n_max {
        for v in -(n as i32)..=(n as i32) {
            ts.push(Truncation::Q {
                n,
                alpha: Alpha::Half(v),
            });
        }
    }
    let sups = column_l1_sup(ctx, &ts, radius)?;
    let mut rep = VerificationReport::new(
        "qn",
        "sup_x ||Q_n^alpha delta_x||_1 <= q^(3/2 - alpha + n/2) for |alpha| <= n/2",
    )
    .param("k", ctx.k())
    .param("n_max", n_max)
    .param("radius", radius)
    .param("alpha_step", 0.5);
    let cases: u64 = ctx.ball_size(radius).to_string().parse().unwrap_or(u64::MAX);
    let (mut bad_neg, mut bad_nonneg) = (0u64, 0u64);
    for s in sups {
        let Truncation::Q { n, alpha } = s.truncation else {
            unreachable!()
        };
        let holds = s.check != BoundCheck::Above;
        if !holds {
            if alpha.value() < 0.0 {
                bad_neg += 1;
            } else {
                bad_nonneg += 1;
            }
        }
        rep.push(
            CheckRow::at_most(
                format!("n={n},alpha={}", alpha.value()),
                Num::int(s.sup),
                Num::Real(s.bound),
                holds,
            )
            .with_param("violating_points", s.violations)
            .with_witness(format!("x={}", s.argmax))
            .with_cases(cases),
        );
    }
    for n in 1..=n_max {
        let alpha = Alpha::Half(2 * n as i32);
        let (x, mass, check) = full_cancellation_witness(ctx, n, alpha)?;
        let bound = Truncation::Q { n, alpha }.bound(ctx.q());
        rep.push(
            CheckRow::at_most(
                format!("witness n={n},alpha={n}"),
                Num::int(mass),
                Num::Real(bound),
                check != BoundCheck::Above,
            )
            .informational()
            .with_param("exceeds_bound", check == BoundCheck::Above)
            .with_witness(format!("x={x}, w=x^-1, wx=1")),
        );
    }
    rep.note("violations_alpha_negative", Num::int(bad_neg));
    rep.note("violations_alpha_nonnegative", Num::int(bad_nonneg));
    Ok(rep.finish())
}

/// Exact `⟨χ_n * χ_E, χ_F⟩` for `E = F`, summed straight from pair distances.
#[cfg(test)]
fn self_pairing(set: &crate::operators::ElementSet, k: usize) -> u64 {
    distance_histogram(set, set).get(k).copied().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ElementSet;
    use crate::verify::Status;

    fn f2() -> FreeGroupCtx {
        FreeGroupCtx::new(2).unwrap()
    }

    #[test]
    fn lemma1_on_b1_examples() {
        let ctx = f2();
        let b1 = ElementSet::ball(ctx, 1).unwrap();
        assert_eq!(self_pairing(&b1, 1), 8);
        let rep = verify_lemma1(&ctx, &SetFamily::new(FamilyKind::Exhaustive, 1), 4).unwrap();
        assert_eq!(rep.status, Status::Pass);
        assert_eq!(rep.rows.len(), 5);
        assert!(rep.rows.iter().all(|r| r.cases == 31));
    }

    #[test]
    fn lemma1_sphere_unions_agree_with_sets() {
        let ctx = f2();
        let fam = SetFamily::new(FamilyKind::SphereUnions, 3);
        let radial = verify_lemma1(&ctx, &fam, 6).unwrap();
        assert_eq!(radial.status, Status::Pass);
        // recompute S_1 ∪ S_3 by pair distances
        let set = Candidate::SphereUnion(vec![1, 3]).to_set(&ctx).unwrap();
        for k in 0..=6 {
            let direct = self_pairing(&set, k);
            let via: BigUint = [1usize, 3]
                .iter()
                .flat_map(|&a| [1usize, 3].into_iter().map(move |b| (a, b)))
                .map(|(a, b)| structure_constant(&ctx, k, a, b) * ctx.sphere_size(b))
                .sum();
            assert_eq!(BigUint::from(direct), via, "k={k}");
        }
    }

    #[test]
    fn r22_small_families() {
        let ctx = f2();
        for fam in [
            SetFamily::new(FamilyKind::Exhaustive, 1),
            SetFamily::new(FamilyKind::SphereUnions, 3),
            SetFamily::new(FamilyKind::RandomSubsets, 2)
                .with_budget(20)
                .with_seed(42),
            SetFamily::new(FamilyKind::Greedy, 1).with_budget(5),
        ] {
            let rep = verify_r22(&ctx, &fam, 4).unwrap();
            assert_eq!(rep.status, Status::Pass, "{fam}");
        }
    }

    #[test]
    fn pk_and_qn_small() {
        let ctx = f2();
        let pk = verify_pk(&ctx, 4, 5).unwrap();
        assert_eq!(pk.status, Status::Pass);
        let qn = verify_qn(&ctx, 2, 4).unwrap();
        assert_eq!(qn.rows.iter().filter(|r| r.id.starts_with("witness")).count(), 2);
    }

    #[test]
    fn qn_negative_alpha_counterexample() {
        // |x| = 6, α = -1/2: every w of length 4 is kept (|wx| ≤ 10 ≤ 6√3),
        // so the column holds all 108 words while the bound is 3^4 = 81
        let ctx = f2();
        let x = ctx.parse_word("ababab").unwrap();
        let t = Truncation::Q {
            n: 4,
            alpha: Alpha::Half(-1),
        };
        let mass = crate::operators::column_mass(&ctx, &t, &x).unwrap();
        assert_eq!(mass, 108);
        assert_eq!(t.compare_mass(3, mass), std::cmp::Ordering::Greater);
    }

    #[test]
    fn band_for_small_spheres() {
        let ctx = f2();
        let rep = r22_sphere_band(&ctx, 1..=3, &SetFamily::new(FamilyKind::SphereUnions, 4), 0.1).unwrap();
        assert_eq!(rep.status, Status::Pass);
    }

    #[test]
    fn worst_prefix_is_exact() {
        let ctx = f2();
        let ev = ImageEvaluator::new(&RadialFunction::sphere(ctx, 1), 1);
        let lv = ev.levels(&Candidate::SphereUnion(vec![1])).unwrap();
        // points (4,1), (5,2), (16,13): ratios 16, 12.5, 256/13
        let c = BigRational::from_integer(20.into());
        let (s, j, holds) = worst_prefix(&lv, &c).unwrap();
        assert_eq!(s, BigRational::from_integer(16.into()));
        assert_eq!(j, BigUint::from(13u32));
        assert!(holds);
        let (_, _, holds) = worst_prefix(&lv, &BigRational::from_integer(19.into())).unwrap();
        assert!(!holds);
    }
}

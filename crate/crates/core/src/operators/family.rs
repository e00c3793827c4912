use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ElementSet;
use crate::error::{Error, Result};
use crate::words::FreeGroupCtx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `S_0, …, S_R`.
    Spheres,
    /// `B_0, …, B_R`.
    Balls,
    /// Every nonempty union of spheres of radius at most `R`.
    SphereUnions,
    /// Seeded random subsets of `B_R`, `budget` of them.
    RandomSubsets,
    /// Every subset of `B_R`, the empty set included.
    Exhaustive,
    /// Greedy growth inside `B_R` starting from the identity.
    Greedy,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Spheres => "spheres",
            FamilyKind::Balls => "balls",
            FamilyKind::SphereUnions => "sphere-unions",
            FamilyKind::RandomSubsets => "random-subsets",
            FamilyKind::Exhaustive => "exhaustive",
            FamilyKind::Greedy => "greedy",
        }
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "spheres" => FamilyKind::Spheres,
            "balls" => FamilyKind::Balls,
            "sphere-unions" => FamilyKind::SphereUnions,
            "random-subsets" => FamilyKind::RandomSubsets,
            "exhaustive" => FamilyKind::Exhaustive,
            "greedy" => FamilyKind::Greedy,
            other => return Err(Error::domain(format!("unknown set family {other:?}"))),
        })
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Search-space descriptor: every produced set lies in `B_radius`, and at
/// most `budget` sets are produced (greedy: at most `budget` growth steps).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SetFamily {
    pub kind: FamilyKind,
    pub radius: usize,
    pub budget: usize,
    pub seed: u64,
}

/// Exhaustive enumeration is limited to balls with at most this many points.
pub const EXHAUSTIVE_MAX_POINTS: usize = 20;

impl SetFamily {
    pub fn new(kind: FamilyKind, radius: usize) -> Self {
        SetFamily {
            kind,
            radius,
            budget: 1000,
            seed: 0,
        }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        SetFamily { budget, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SetFamily { seed, ..self }
    }

    /// Materializes the candidate sets. Greedy families have no static list.
    pub fn candidates(&self, ctx: &FreeGroupCtx) -> Result<Vec<Candidate>> {
        let r = self.radius;
        let over = |count: u128| -> Result<()> {
            if count > self.budget as u128 {
                Err(Error::budget(
                    format!("{} family of radius {r}", self.kind),
                    count,
                    self.budget as u64,
                ))
            } else {
                Ok(())
            }
        };
        match self.kind {
            FamilyKind::Spheres => {
                over(r as u128 + 1)?;
                Ok((0..=r).map(|a| Candidate::SphereUnion(vec![a])).collect())
            }
            FamilyKind::Balls => {
                over(r as u128 + 1)?;
                Ok((0..=r).map(|a| Candidate::SphereUnion((0..=a).collect())).collect())
            }
            FamilyKind::SphereUnions => {
                if r >= 64 {
                    return Err(Error::budget(
                        "sphere unions",
                        format!("2^{}", r + 1),
                        self.budget as u64,
                    ));
                }
                let count = (1u128 << (r + 1)) - 1;
                over(count)?;
                Ok((1u64..=count as u64)
                    .map(|mask| Candidate::SphereUnion((0..=r).filter(|a| mask >> a & 1 == 1).collect()))
                    .collect())
            }
            FamilyKind::RandomSubsets => {
                let pool = ctx.ball(r)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut out = Vec::with_capacity(self.budget);
                while out.len() < self.budget {
                    let density: f64 = rng.gen_range(0.0..1.0);
                    let set = ElementSet::new(*ctx, pool.iter().filter(|_| rng.gen_bool(density)).cloned());
                    if !set.is_empty() {
                        out.push(Candidate::Explicit(set));
                    }
                }
                Ok(out)
            }
            FamilyKind::Exhaustive => {
                let pool = ctx.ball(r)?;
                if pool.len() > EXHAUSTIVE_MAX_POINTS {
                    return Err(Error::budget(
                        format!("exhaustive subsets of B_{r}"),
                        format!("2^{}", pool.len()),
                        self.budget as u64,
                    ));
                }
                over(1u128 << pool.len())?;
                Ok((0u64..(1u64 << pool.len()))
                    .map(|mask| {
                        Candidate::Explicit(ElementSet::new(
                            *ctx,
                            pool.iter()
                                .enumerate()
                                .filter(|(i, _)| mask >> i & 1 == 1)
                                .map(|(_, w)| w.clone()),
                        ))
                    })
                    .collect())
            }
            FamilyKind::Greedy => Err(Error::domain(
                "greedy families are built during a search and have no static candidate list",
            )),
        }
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(R={}, budget={}, seed={})",
            self.kind, self.radius, self.budget, self.seed
        )
    }
}

/// A candidate set `E`: either a union of spheres (handled on the radial
/// fast path) or an explicit word list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidate {
    SphereUnion(Vec<usize>),
    Explicit(ElementSet),
}

impl Candidate {
    pub fn size(&self, ctx: &FreeGroupCtx) -> BigUint {
        match self {
            Candidate::SphereUnion(radii) => radii.iter().map(|&a| ctx.sphere_size(a)).sum(),
            Candidate::Explicit(set) => BigUint::from(set.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Candidate::SphereUnion(radii) => radii.is_empty(),
            Candidate::Explicit(set) => set.is_empty(),
        }
    }

    /// Materializes a sphere union as an explicit set.
    pub fn to_set(&self, ctx: &FreeGroupCtx) -> Result<ElementSet> {
        match self {
            Candidate::Explicit(set) => Ok(set.clone()),
            Candidate::SphereUnion(radii) => {
                let mut words = Vec::new();
                for &a in radii {
                    words.extend(ctx.sphere(a)?);
                }
                Ok(ElementSet::new(*ctx, words))
            }
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::SphereUnion(radii) => {
                let r: Vec<String> = radii.iter().map(|a| a.to_string()).collect();
                write!(f, "spheres[{}]", r.join(","))
            }
            Candidate::Explicit(set) => write!(f, "{set}"),
        }
    }
}

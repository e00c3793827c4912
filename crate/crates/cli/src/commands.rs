use std::io::Write;

use fgw_core::operators::{restricted_weak_estimate, weak_estimate_21_to_2, FamilyKind, SetFamily};
use fgw_core::radial::oracle_convolve;
use fgw_core::verify::{self, Scale, Status, VerificationReport};
use fgw_core::{lorentz_norm, rearrange_radial, weak_norm, Error, FreeGroupCtx, LorentzIndex, RadialFunction, Result};

use crate::output::{render, ConvolveOut, NormsOut, SearchOut};
use crate::{
    Cli, Command, ConjectureArgs, ConvolveArgs, Estimator, FamilyArgs, NormsArgs, SearchArgs, Target, VerifyArgs,
};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Rendered output plus the exit code it implies.
struct Outcome {
    text: String,
    code: u8,
}

pub fn run(cli: &Cli) -> u8 {
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let outcome = FreeGroupCtx::new(cli.k)
        .map(|ctx| match cli.cap {
            Some(cap) => ctx.with_cap(cap),
            None => ctx,
        })
        .and_then(|ctx| match &cli.command {
            Command::Convolve(a) => convolve(cli, &ctx, a),
            Command::Norms(a) => norms(cli, &ctx, a),
            Command::Search(a) => search(cli, &ctx, a),
            Command::Verify(a) => verify_cmd(cli, &ctx, a),
            Command::Conjecture(a) => conjecture(cli, &ctx, a),
        });
    match outcome {
        Ok(out) => match emit(cli, &out.text) {
            Ok(()) => out.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn configure_threads(flag: Option<usize>) -> std::result::Result<(), String> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("FGW_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("FGW_THREADS={v:?} is not a thread count"))?,
            ),
            Err(_) => None,
        },
    };
    match threads {
        Some(0) => Err("thread count must be at least 1".into()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| e.to_string()),
        None => Ok(()),
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn family(cli: &Cli, args: &FamilyArgs, kind: FamilyKind, radius: usize) -> SetFamily {
    let mut fam = SetFamily::new(args.family.unwrap_or(kind), args.radius.unwrap_or(radius)).with_seed(cli.seed);
    if let Some(b) = args.budget {
        fam = fam.with_budget(b);
    }
    fam
}

fn convolve(cli: &Cli, ctx: &FreeGroupCtx, a: &ConvolveArgs) -> Result<Outcome> {
    let (f, g) = match (a.n, a.m, &a.f, &a.g) {
        (Some(n), Some(m), _, _) => (RadialFunction::sphere(*ctx, n), RadialFunction::sphere(*ctx, m)),
        (_, _, Some(f), Some(g)) => (RadialFunction::parse(*ctx, f)?, RadialFunction::parse(*ctx, g)?),
        _ => return Err(Error::Domain("convolve needs --n and --m, or --f and --g".into())),
    };
    let h = f.convolve(&g)?;
    let oracle_match = match (a.oracle, a.n, a.m) {
        (true, Some(n), Some(m)) => Some(oracle_convolve(ctx, n, m)? == h),
        _ => None,
    };
    let mass_conserved = h.mass() == f.mass() * g.mass();
    let out = ConvolveOut {
        k: ctx.k(),
        f: f.to_string(),
        g: g.to_string(),
        product: h.terms().map(|(l, c)| (l, c.to_string())).collect(),
        mass_conserved,
        oracle_match,
    };
    let ok = mass_conserved && oracle_match != Some(false);
    if !ok {
        eprintln!("violation: chi product {} * {} = {}", out.f, out.g, h);
    }
    Ok(Outcome {
        text: render(cli.format, &[out])?,
        code: if ok { EXIT_PASS } else { EXIT_VIOLATION },
    })
}

fn norms(cli: &Cli, ctx: &FreeGroupCtx, a: &NormsArgs) -> Result<Outcome> {
    let f = RadialFunction::parse(*ctx, &a.radial)?;
    let idx = LorentzIndex::new(a.p, a.s)?;
    let r = rearrange_radial(&f);
    let out = NormsOut {
        k: ctx.k(),
        f: f.to_string(),
        p: a.p,
        s: a.s,
        norm: lorentz_norm(&r, idx),
        weak_norm: weak_norm(&r, a.p)?,
        support: r.total_mass().to_string(),
    };
    Ok(Outcome {
        text: render(cli.format, &[out])?,
        code: EXIT_PASS,
    })
}

fn search(cli: &Cli, ctx: &FreeGroupCtx, a: &SearchArgs) -> Result<Outcome> {
    let f = RadialFunction::parse(*ctx, &a.radial)?;
    let fam = family(cli, &a.family, FamilyKind::SphereUnions, 6);
    let est = match a.estimator {
        Estimator::Restricted => restricted_weak_estimate(&f, &fam)?,
        Estimator::Weak => weak_estimate_21_to_2(&f, &fam)?,
    };
    Ok(Outcome {
        text: render(cli.format, &[SearchOut::new(ctx.k(), f.to_string(), est)])?,
        code: EXIT_PASS,
    })
}

fn functions(ctx: &FreeGroupCtx, literal: Option<&String>) -> Result<Vec<(String, RadialFunction)>> {
    match literal {
        Some(s) => Ok(vec![(s.clone(), RadialFunction::parse(*ctx, s)?)]),
        None => Ok(verify::function_suite(*ctx)),
    }
}

fn verify_cmd(cli: &Cli, ctx: &FreeGroupCtx, a: &VerifyArgs) -> Result<Outcome> {
    let reports: Vec<VerificationReport> = match a.target {
        Target::Oracle => vec![verify::verify_oracle(ctx, a.n_max.unwrap_or(6))?],
        Target::Majorization => vec![verify::verify_majorization(ctx, a.n_max.unwrap_or(12))?],
        Target::Lemma1 => {
            let fam = family(cli, &a.family, FamilyKind::SphereUnions, 8);
            vec![verify::verify_lemma1(ctx, &fam, a.k_max.unwrap_or(8))?]
        }
        Target::R22 => {
            let fam = family(cli, &a.family, FamilyKind::SphereUnions, 8);
            let n_max = a.n_max.unwrap_or(8);
            let mut out = vec![verify::verify_r22(ctx, &fam, n_max)?];
            if fam.kind == FamilyKind::SphereUnions {
                out.push(verify::r22_sphere_band(ctx, 1..=n_max, &fam, verify::R22_BAND_FLOOR)?);
            }
            out
        }
        Target::Pk => vec![verify::verify_pk(
            ctx,
            a.k_max.unwrap_or(6),
            a.family.radius.unwrap_or(8),
        )?],
        Target::Qn => vec![verify::verify_qn(
            ctx,
            a.n_max.unwrap_or(6),
            a.family.radius.unwrap_or(8),
        )?],
        Target::Thm1 => {
            let fams = match a.family.family {
                Some(_) => vec![family(cli, &a.family, FamilyKind::SphereUnions, 8)],
                None => verify::thm1_families(Scale::Full),
            };
            functions(ctx, a.radial.as_ref())?
                .iter()
                .map(|(name, f)| Ok(verify::verify_thm1(f, &fams)?.param("name", name)))
                .collect::<Result<_>>()?
        }
        Target::Thm3 => {
            let fam = family(cli, &a.family, FamilyKind::SphereUnions, 8);
            vec![verify::thm3_equivalence_report(
                ctx,
                a.samples.unwrap_or(100),
                cli.seed,
                6,
                &fam,
                verify::THM3_BAND_MAX_SPREAD,
            )?]
        }
        Target::Thm4 => {
            let ps = if a.p.is_empty() {
                vec![1.25, 1.5, 1.75]
            } else {
                a.p.clone()
            };
            let fs = functions(ctx, a.radial.as_ref())?;
            let mut out = Vec::new();
            for p in ps {
                for (name, f) in &fs {
                    out.push(verify::thm4_lower_chain(f, p)?.param("name", name));
                }
            }
            out
        }
        Target::Thm5 => {
            let pairs = match (a.s, a.t) {
                (Some(s), Some(t)) => vec![(s, t)],
                (None, None) => vec![
                    (1.0, f64::INFINITY),
                    (2.0, 2.0),
                    (2.0, f64::INFINITY),
                    (1.0, 2.0),
                    (1.5, 3.0),
                ],
                _ => return Err(Error::Domain("thm5 needs both --s and --t, or neither".into())),
            };
            let n_max = a.n_max.unwrap_or(40);
            pairs
                .into_iter()
                .map(|(s, t)| verify::thm5_exponent_fit(ctx, s, t, 4..=n_max))
                .collect::<Result<_>>()?
        }
        Target::All => {
            let scale = if a.quick { Scale::Quick } else { Scale::Full };
            let mut out = Vec::new();
            for id in 1..=verify::criterion_names().len() {
                out.extend(verify::criterion(id, scale)?);
            }
            out
        }
    };
    report_outcome(cli, &reports)
}

fn conjecture(cli: &Cli, ctx: &FreeGroupCtx, a: &ConjectureArgs) -> Result<Outcome> {
    let fs = if a.radial.is_empty() {
        verify::function_suite(*ctx)
    } else {
        a.radial
            .iter()
            .map(|s| Ok((s.clone(), RadialFunction::parse(*ctx, s)?)))
            .collect::<Result<_>>()?
    };
    let fam = family(cli, &a.family, FamilyKind::SphereUnions, 6);
    let rep = verify::conjecture_scan(&fs, &a.s_grid, &fam)?;
    report_outcome(cli, &[rep])
}

fn report_outcome(cli: &Cli, reports: &[VerificationReport]) -> Result<Outcome> {
    let text = match cli.format {
        crate::Format::Json => fgw_core::report::to_json(reports)?,
        crate::Format::Csv => fgw_core::report::to_csv(reports)?,
    };
    let mut code = EXIT_PASS;
    for rep in reports.iter().filter(|r| r.status == Status::Fail) {
        code = EXIT_VIOLATION;
        for row in rep.failures() {
            eprintln!(
                "violation: {} {}: lhs={} rhs={} witness={}",
                rep.theorem,
                row.id,
                row.lhs,
                row.rhs,
                row.witness.as_deref().unwrap_or("-")
            );
        }
    }
    Ok(Outcome { text, code })
}

use deltaprime::convergence::{self, ConvergenceEntry, Grid};
use deltaprime::resonance::{self, residual_threshold, Classification, ResonantValue};
use deltaprime::scattering::{self, ScatteringCoefficients};
use deltaprime::{load_profile, shoot, Error, PotentialProfile, Result};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{Command, ProfileArgs};
use crate::render::{fmt_g, Cell, Output, Table};

pub const TABLE6_PROFILE: &str = "seba-quadratic";
pub const TABLE6_WINDOW: (f64, f64) = (0.0, 200.0);

/// What a command produced: rendered output, or a file the command wrote
/// itself (`export --output`).
pub enum Outcome {
    Print(Output),
    Text(String),
    Silent,
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Moments { profile } => moments(&load(profile)?).map(Outcome::Print),
        Command::Shoot { profile, alpha, kappa_sq } => shoot_cmd(&load(profile)?, *alpha, *kappa_sq).map(Outcome::Print),
        Command::Resonances {
            profile,
            alpha_min,
            alpha_max,
            scan_step,
        } => {
            let roots = resonance::find_resonances(&load(profile)?, *alpha_min, *alpha_max, *scan_step)?;
            Ok(Outcome::Print(resonance_output(&roots)))
        }
        Command::Theta { profile, alpha, tol } => theta(&load(profile)?, *alpha, *tol).map(Outcome::Print),
        Command::ScatterLimit { profile, alpha, tol } => scatter_limit(&load(profile)?, *alpha, *tol).map(Outcome::Print),
        Command::ScatterEps { profile, alpha, k, eps } => {
            let c = scattering::finite_coeffs(&load(profile)?, *alpha, *k, *eps)?;
            Ok(Outcome::Print(scattering_output(&c)))
        }
        Command::ScatterAsymptotic { profile, alpha, kappa } => {
            let c = scattering::asymptotic_coeffs(&load(profile)?, *alpha, *kappa)?;
            Ok(Outcome::Print(scattering_output(&c)))
        }
        Command::Converge {
            profile,
            alpha,
            eps,
            nodes,
            half_width,
            k2_re,
            k2_im,
            tol,
        } => {
            let grid = Grid::new(*half_width, *nodes)?;
            let k_sq = Complex64::new(*k2_re, *k2_im);
            converge(&load(profile)?, *alpha, eps, &grid, k_sq, *tol).map(Outcome::Print)
        }
        Command::Table6 => table6().map(Outcome::Print),
        Command::Export { profile, output } => {
            let text = load(profile)?.to_json_string();
            match output {
                None => Ok(Outcome::Text(format!("{text}\n"))),
                Some(path) => {
                    std::fs::write(path, format!("{text}\n")).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    Ok(Outcome::Silent)
                }
            }
        }
    }
}

fn load(args: &ProfileArgs) -> Result<PotentialProfile> {
    let p = match (&args.source.builtin, &args.source.profile) {
        (Some(name), None) => PotentialProfile::builtin(name)?,
        (None, Some(path)) => load_profile(path)?,
        _ => return Err(Error::InvalidInput("give exactly one of --builtin and --profile".into())),
    };
    Ok(if args.mirror { p.mirrored() } else { p })
}

#[derive(Serialize)]
struct MomentsOut {
    m0: f64,
    m1: f64,
    delta_prime_like: bool,
}

fn moments(p: &PotentialProfile) -> Result<Output> {
    let m = p.moments();
    let out = MomentsOut {
        m0: m.m0,
        m1: m.m1,
        delta_prime_like: m.is_delta_prime_like(deltaprime::potential::DELTA_PRIME_TOL),
    };
    let mut t = Table::new(&["m0", "m1", "delta_prime_like"]);
    t.push(vec![m.m0.into(), m.m1.into(), out.delta_prime_like.to_string().into()]);
    let text = format!("m0={} m1={}", fmt_g(m.m0, 6), fmt_g(m.m1, 6));
    Ok(Output::new(t, &out).with_text(text))
}

#[derive(Serialize)]
struct ShootOut {
    alpha: f64,
    kappa_sq: f64,
    #[serde(flatten)]
    data: deltaprime::FundamentalData,
}

fn shoot_cmd(p: &PotentialProfile, alpha: f64, kappa_sq: f64) -> Result<Output> {
    let d = shoot(p, alpha, kappa_sq)?;
    let mut t = Table::new(&["alpha", "kappa_sq", "u1", "du1", "v1", "dv1", "wronskian_defect"]);
    t.push(vec![
        alpha.into(),
        kappa_sq.into(),
        d.u1.into(),
        d.du1.into(),
        d.v1.into(),
        d.dv1.into(),
        d.wronskian_defect.into(),
    ]);
    Ok(Output::new(t, &ShootOut { alpha, kappa_sq, data: d }))
}

fn resonance_output(roots: &[ResonantValue]) -> Output {
    let mut t = Table::new(&["alpha", "theta", "residual", "bracket_lo", "bracket_hi"]);
    for r in roots {
        t.push(vec![
            r.alpha.into(),
            r.theta.into(),
            r.residual.into(),
            r.bracket.0.into(),
            r.bracket.1.into(),
        ]);
    }
    Output::new(t, &roots)
}

#[derive(Serialize)]
struct ThetaOut {
    alpha: f64,
    resonant_alpha: f64,
    theta: f64,
}

fn theta(p: &PotentialProfile, alpha: f64, tol: f64) -> Result<Output> {
    match resonance::classify(p, alpha, tol)? {
        Classification::Resonant {
            alpha: resonant_alpha,
            theta,
        } => {
            let mut t = Table::new(&["alpha", "resonant_alpha", "theta"]);
            t.push(vec![alpha.into(), resonant_alpha.into(), theta.into()]);
            Ok(Output::new(
                t,
                &ThetaOut {
                    alpha,
                    resonant_alpha,
                    theta,
                },
            ))
        }
        Classification::NonResonant => {
            let d = shoot(p, alpha, 0.0)?;
            Err(Error::NotResonant {
                alpha,
                residual: d.du1.abs(),
                threshold: residual_threshold(d.u1, d.dv1),
            })
        }
    }
}

#[derive(Serialize)]
struct LimitOut {
    alpha: f64,
    classification: Classification,
    #[serde(flatten)]
    coefficients: ScatteringCoefficients,
}

fn scatter_limit(p: &PotentialProfile, alpha: f64, tol: f64) -> Result<Output> {
    let c = resonance::classify(p, alpha, tol)?;
    let s = scattering::limit_coeffs(&c);
    let (kind, theta): (&str, Cell) = match c {
        Classification::Resonant { theta, .. } => ("resonant", theta.into()),
        Classification::NonResonant => ("non-resonant", "-".into()),
    };
    let mut t = Table::new(&["alpha", "kind", "theta", "r_re", "r_im", "t_re", "t_im", "abs_t_sq"]);
    let mut row: Vec<Cell> = vec![alpha.into(), kind.into(), theta];
    row.extend(coefficient_cells(&s));
    t.push(row);
    Ok(Output::new(
        t,
        &LimitOut {
            alpha,
            classification: c,
            coefficients: s,
        },
    ))
}

fn coefficient_cells(s: &ScatteringCoefficients) -> Vec<Cell> {
    vec![
        s.r.re.into(),
        s.r.im.into(),
        s.t.re.into(),
        s.t.im.into(),
        s.transmission_probability().into(),
    ]
}

fn scattering_output(s: &ScatteringCoefficients) -> Output {
    let mut t = Table::new(&["r_re", "r_im", "t_re", "t_im", "abs_t_sq", "abs_r_sq"]);
    let mut row = coefficient_cells(s);
    row.push(s.reflection_probability().into());
    t.push(row);
    Output::new(t, s)
}

#[derive(Serialize)]
struct ConvergeOut {
    entries: Vec<ConvergenceEntry>,
    fitted_rate: f64,
    limit_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resonant_alpha: Option<f64>,
    nodes: usize,
    half_width: f64,
    h: f64,
    k_sq: Complex64,
}

fn converge(
    p: &PotentialProfile,
    alpha: f64,
    eps: &[f64],
    grid: &Grid,
    k_sq: Complex64,
    tol: f64,
) -> Result<Output> {
    let tf = convergence::default_test_functions(grid);
    let report = convergence::study(p, alpha, eps, grid, k_sq, &tf, tol)?;
    let (limit_kind, theta, resonant_alpha) = match report.limit_kind {
        Classification::Resonant { alpha, theta } => ("resonant", Some(theta), Some(alpha)),
        Classification::NonResonant => ("non-resonant", None, None),
    };
    let mut t = Table::new(&["eps", "error"]);
    for e in &report.entries {
        t.push(vec![e.eps.into(), e.error.into()]);
    }
    let out = ConvergeOut {
        entries: report.entries.clone(),
        fitted_rate: report.fitted_rate,
        limit_kind,
        theta,
        resonant_alpha,
        nodes: grid.interior_nodes(),
        half_width: grid.half_width(),
        h: grid.h(),
        k_sq,
    };
    let mut summary = format!("fitted_rate={} limit={limit_kind}", fmt_g(report.fitted_rate, 6));
    if let (Some(th), Some(a)) = (theta, resonant_alpha) {
        summary.push_str(&format!(" theta={} resonant_alpha={}", fmt_g(th, 6), fmt_g(a, 10)));
    }
    let output = Output::new(t, &out);
    let text = format!("{}{summary}", output.render(crate::args::Format::Table));
    Ok(output.with_text(text))
}

#[derive(Serialize)]
struct Table6Row {
    alpha: f64,
    theta: f64,
    transmission: f64,
}

pub fn table6() -> Result<Output> {
    let p = PotentialProfile::builtin(TABLE6_PROFILE)?;
    let roots = resonance::find_resonances(&p, TABLE6_WINDOW.0, TABLE6_WINDOW.1, resonance::DEFAULT_SCAN_STEP)?;
    let rows: Vec<Table6Row> = roots
        .iter()
        .map(|r| Table6Row {
            alpha: r.alpha,
            theta: r.theta,
            transmission: scattering::limit_coeffs(&Classification::Resonant {
                alpha: r.alpha,
                theta: r.theta,
            })
            .transmission_probability(),
        })
        .collect();
    let mut t = Table::new(&["alpha", "theta", "|T|^2"]);
    for r in &rows {
        t.push(vec![r.alpha.into(), r.theta.into(), r.transmission.into()]);
    }
    Ok(Output::new(t, &rows))
}

//! Resonant set Σ_Ψ and coupling function θ_Ψ.
//!
//! α is resonant when `-w'' + αΨw = 0` on (-1, 1) has a solution with
//! `w'(-1) = w'(1) = 0`, i.e. when `g(α) = u'(1; 0, α)` vanishes. The
//! coupling value is then `θ = u(1; 0, α)` (the eigenfunction is normalized
//! by `u(-1) = 1`).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::shooting::{shoot, FundamentalData};

pub const DEFAULT_ALPHA_MIN: f64 = -200.0;
pub const DEFAULT_ALPHA_MAX: f64 = 200.0;
pub const DEFAULT_SCAN_STEP: f64 = 0.5;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;

/// Guaranteed bracket width of refined roots; refinement continues past it
/// down to `f64` resolution.
pub const ROOT_XTOL: f64 = 1e-10;
pub const MAX_REFINE_ITERATIONS: usize = 200;

const MAX_SCAN_POINTS: usize = 10_000_000;

/// Largest `|u'(1)|` still accepted as a resonance. At a resonance
/// `u(1) v'(1) = 1`, so the scale is `max(|θ|, 1/|θ|)` whichever side of
/// the interval the eigenfunction is concentrated on.
pub fn residual_threshold(u1: f64, dv1: f64) -> f64 {
    1e-8 * u1.abs().max(dv1.abs()).max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResonantValue {
    pub alpha: f64,
    pub theta: f64,
    /// `|g(α)|` at the refined root.
    pub residual: f64,
    /// Final bracket of the refinement; `(0, 0)` for the analytic root.
    pub bracket: (f64, f64),
}

impl ResonantValue {
    fn origin() -> Self {
        Self {
            alpha: 0.0,
            theta: 1.0,
            residual: 0.0,
            bracket: (0.0, 0.0),
        }
    }
}

/// Which operator the ε → 0 limit selects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    /// Connected limit S(θ): `y(0+) = θ y(0-)`, `θ y'(0+) = y'(0-)`.
    /// `alpha` is the refined resonant coupling constant the input was
    /// matched to.
    Resonant { alpha: f64, theta: f64 },
    /// Decoupled Dirichlet half-lines S₋ ⊕ S₊.
    NonResonant,
}

impl Classification {
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Classification::Resonant { theta, .. } => Some(theta),
            Classification::NonResonant => None,
        }
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self, Classification::Resonant { .. })
    }
}

/// Result of a bracketed refinement.
#[derive(Clone, Copy, Debug)]
pub struct Refined {
    pub root: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Bisection with secant acceleration. The iterate never leaves the
/// bracket; a bisection step is forced whenever two consecutive steps fail
/// to halve the bracket. Stops once `b - a <= xtol` and the best `|f|` is
/// at most `ftol`, when the bracket can no longer be split in `f64`, or
/// after `max_iter` evaluations.
#[allow(clippy::too_many_arguments)]
pub fn refine_root<F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Refined>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::invalid(format!("bracket [{a}, {b}] is empty")));
    }
    if fa == 0.0 {
        return Ok(Refined { root: a, value: 0.0, bracket: (a, a), iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Refined { root: b, value: 0.0, bracket: (b, b), iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::invalid(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    // The two most recent iterates drive the secant.
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    let mut widths = [b - a, b - a];
    let mut iterations = 0;

    while iterations < max_iter {
        if b - a <= xtol && fa.abs().min(fb.abs()) <= ftol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let stalled = (b - a) > 0.5 * widths[0];
        let mut x = if !stalled && f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            mid
        };
        if !(x > a && x < b) {
            x = mid;
        }
        // Keep a minimal distance from the ends so the bracket always shrinks.
        let guard = 0.25 * xtol.min(b - a);
        x = x.clamp(a + guard, b - guard);

        let fx = f(x)?;
        iterations += 1;
        if !fx.is_finite() {
            return Err(Error::numerical(format!("f({x}) = {fx} during root refinement")));
        }
        if fx == 0.0 {
            return Ok(Refined { root: x, value: 0.0, bracket: (x, x), iterations });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        widths = [widths[1], b - a];
    }

    let (root, value) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    Ok(Refined { root, value, bracket: (a, b), iterations })
}

/// θ_Ψ(α) = u(1; 0, α), for a resonant α.
pub fn coupling(profile: &PotentialProfile, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let data = shoot(profile, alpha, 0.0)?;
    check_resonant(alpha, &data)?;
    Ok(theta_from(&data))
}

/// At a resonance `u(1) v'(1) = 1`. Of the two, the one with the larger
/// magnitude is insensitive to the last bits of α, while the smaller one
/// moves by `g'(α) v(1) δα` relative; θ is read off the larger one.
fn theta_from(data: &FundamentalData) -> f64 {
    if data.u1.abs() >= data.dv1.abs() {
        data.u1
    } else {
        1.0 / data.dv1
    }
}

fn check_resonant(alpha: f64, data: &FundamentalData) -> Result<()> {
    let threshold = residual_threshold(data.u1, data.dv1);
    if data.du1.abs() <= threshold {
        Ok(())
    } else {
        Err(Error::NotResonant {
            alpha,
            residual: data.du1.abs(),
            threshold,
        })
    }
}

fn mismatch(profile: &PotentialProfile) -> impl FnMut(f64) -> Result<f64> + '_ {
    move |alpha| Ok(shoot(profile, alpha, 0.0)?.du1)
}

fn resonant_value(profile: &PotentialProfile, r: &Refined) -> Result<ResonantValue> {
    let theta = coupling(profile, r.root).map_err(|e| match e {
        Error::NotResonant { alpha, residual, threshold } => Error::numerical(format!(
            "refinement near alpha = {alpha} stopped at |g| = {residual:e} above {threshold:e}"
        )),
        other => other,
    })?;
    Ok(ResonantValue {
        alpha: r.root,
        theta,
        residual: r.value.abs(),
        bracket: r.bracket,
    })
}

/// Scans `g(α)` on `[alpha_min, alpha_max]` with spacing `scan_step`,
/// brackets its sign changes and refines each to [`ROOT_XTOL`].
///
/// α = 0 is always resonant with θ = 1 (the free equation); it is inserted
/// analytically and the scan skips `|α| < scan_step / 2`. Roots closer
/// than `scan_step / 10` are merged. For the identically zero profile `g`
/// vanishes for every α and only the origin is reported.
pub fn find_resonances(
    profile: &PotentialProfile,
    alpha_min: f64,
    alpha_max: f64,
    scan_step: f64,
) -> Result<Vec<ResonantValue>> {
    if !(alpha_min.is_finite() && alpha_max.is_finite() && alpha_min < alpha_max) {
        return Err(Error::invalid(format!(
            "alpha range [{alpha_min}, {alpha_max}] must be finite and non-empty"
        )));
    }
    if !(scan_step.is_finite() && scan_step > 0.0) {
        return Err(Error::invalid(format!("scan step {scan_step} must be positive")));
    }
    let intervals = ((alpha_max - alpha_min) / scan_step).ceil();
    if intervals >= MAX_SCAN_POINTS as f64 {
        return Err(Error::invalid(format!(
            "scan of [{alpha_min}, {alpha_max}] with step {scan_step} needs more than {MAX_SCAN_POINTS} points"
        )));
    }
    let intervals = intervals as usize;
    let contains_origin = alpha_min <= 0.0 && 0.0 <= alpha_max;
    if profile.is_identically_zero() {
        return Ok(if contains_origin { vec![ResonantValue::origin()] } else { Vec::new() });
    }

    let grid: Vec<f64> = (0..=intervals)
        .map(|i| (alpha_min + i as f64 * scan_step).min(alpha_max))
        .collect();
    let excluded = |a: f64| a.abs() < 0.5 * scan_step;

    let data: Vec<Option<FundamentalData>> = grid
        .par_iter()
        .map(|&a| {
            if excluded(a) {
                Ok(None)
            } else {
                shoot(profile, a, 0.0).map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    for i in 0..grid.len() {
        let Some(di) = data[i] else { continue };
        if di.du1 == 0.0 {
            brackets.push((grid[i], grid[i], 0.0, 0.0));
            continue;
        }
        if let Some(Some(dn)) = data.get(i + 1) {
            if dn.du1 != 0.0 && di.du1.signum() != dn.du1.signum() {
                brackets.push((grid[i], grid[i + 1], di.du1, dn.du1));
                continue;
            }
        }
        // A small |g| at a grid point without a neighbouring sign change.
        if di.du1.abs() <= residual_threshold(di.u1, di.dv1) {
            let prev = i.checked_sub(1).and_then(|j| data[j]);
            let crosses = prev.is_some_and(|p| p.du1.signum() != di.du1.signum());
            if !crosses {
                log::warn!(
                    "g(alpha) is nearly tangent to zero at alpha = {} (|g| = {:e}); consider a smaller scan step",
                    grid[i],
                    di.du1.abs()
                );
            }
        }
    }

    let mut values: Vec<ResonantValue> = brackets
        .par_iter()
        .map(|&(a, b, fa, fb)| {
            let r = if a == b {
                Refined { root: a, value: 0.0, bracket: (a, b), iterations: 0 }
            } else {
                refine_root(mismatch(profile), a, b, fa, fb, ROOT_XTOL, 0.0, MAX_REFINE_ITERATIONS)?
            };
            resonant_value(profile, &r)
        })
        .collect::<Result<_>>()?;

    if contains_origin {
        values.push(ResonantValue::origin());
    }
    values.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));

    let mut merged: Vec<ResonantValue> = Vec::with_capacity(values.len());
    for v in values {
        match merged.last_mut() {
            Some(last) if v.alpha - last.alpha < 0.1 * scan_step => {
                if v.alpha == 0.0 || (last.alpha != 0.0 && v.residual < last.residual) {
                    *last = v;
                }
            }
            _ => merged.push(v),
        }
    }
    Ok(merged)
}

/// Resonant when a root of `g` lies within `tol` of `alpha`; the root is
/// re-refined locally and its θ attached.
pub fn classify(profile: &PotentialProfile, alpha: f64, tol: f64) -> Result<Classification> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("classification tolerance {tol} must be positive")));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha = {alpha} must be finite")));
    }
    if alpha.abs() <= tol {
        return Ok(Classification::Resonant { alpha: 0.0, theta: 1.0 });
    }

    let centre = shoot(profile, alpha, 0.0)?;
    if centre.du1.abs() <= residual_threshold(centre.u1, centre.dv1) {
        return Ok(Classification::Resonant { alpha, theta: theta_from(&centre) });
    }
    let lo = alpha - tol;
    let hi = alpha + tol;
    let g_lo = shoot(profile, lo, 0.0)?.du1;
    let g_hi = shoot(profile, hi, 0.0)?.du1;

    let mut candidates = Vec::new();
    if g_lo.signum() != centre.du1.signum() || g_lo == 0.0 {
        candidates.push(refine_root(mismatch(profile), lo, alpha, g_lo, centre.du1, ROOT_XTOL, 0.0, MAX_REFINE_ITERATIONS)?);
    }
    if g_hi.signum() != centre.du1.signum() || g_hi == 0.0 {
        candidates.push(refine_root(mismatch(profile), alpha, hi, centre.du1, g_hi, ROOT_XTOL, 0.0, MAX_REFINE_ITERATIONS)?);
    }
    let Some(best) = candidates
        .into_iter()
        .min_by(|x, y| (x.root - alpha).abs().total_cmp(&(y.root - alpha).abs()))
    else {
        return Ok(Classification::NonResonant);
    };
    let v = resonant_value(profile, &best)?;
    Ok(Classification::Resonant { alpha: v.alpha, theta: v.theta })
}

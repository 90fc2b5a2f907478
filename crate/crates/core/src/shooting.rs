//! Boundary data of the fundamental solutions of
//! `-w'' + αΨ(ξ) w = ϰ² w` on [-1, 1].
//!
//! `u` starts from `(u, u')(-1) = (1, 0)` and `v` from `(v, v')(-1) = (0, 1)`.
//! Both are propagated together as the 2×2 transfer matrix of the
//! first-order system `(w, w')' = (w', (αΨ - ϰ²) w)`.
//!
//! The integrator is a fourth-order Magnus scheme on Gauss–Legendre nodes.
//! Each step is the closed-form exponential of a traceless 2×2 matrix, so
//! every step matrix has unit determinant and the Wronskian `u v' - u' v`
//! is conserved up to rounding independently of the truncation error. Step
//! sizes are controlled by step doubling with an error-per-unit-length
//! criterion. The product of step matrices is
//! accumulated in double-double arithmetic because at large |α| the
//! solutions grow like `exp(∫√(αΨ))` inside the interval and the entries of
//! the transfer matrix cancel heavily at ξ = 1.

use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::potential::{Piece, PotentialProfile};

/// Boundary values at ξ = 1 of the two fundamental solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FundamentalData {
    pub u1: f64,
    pub du1: f64,
    pub v1: f64,
    pub dv1: f64,
    /// `|u1 dv1 - du1 v1 - 1|`, evaluated before rounding to `f64`.
    pub wronskian_defect: f64,
}

/// Step control for [`shoot_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
    pub direction: Direction,
}

/// Integration direction across [-1, 1].
///
/// Forward integration resolves `u` to a tolerance relative to `|u(1)|`,
/// backward integration relative to `|v'(1)|`. `Auto` integrates forward and
/// repeats backward when `|v'(1)| > |u(1)|`, which keeps the resonant
/// eigenfunction growing along the direction of integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Direction {
    #[default]
    Auto,
    Forward,
    Backward,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 2_000_000,
            direction: Direction::Auto,
        }
    }
}

type Mat2 = [[f64; 2]; 2];
type DdMat2 = [[TwoFloat; 2]; 2];

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3 / 6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_44; // √3 / 12

/// `cosh(s)` and `sinh(s)/s` as functions of `s²`, continued to the
/// oscillatory side (`s² < 0`).
fn cosh_sinhc(s2: f64) -> (f64, f64) {
    if s2.abs() < 1e-6 {
        let c = 1.0 + s2 / 2.0 * (1.0 + s2 / 12.0 * (1.0 + s2 / 30.0));
        let s = 1.0 + s2 / 6.0 * (1.0 + s2 / 20.0 * (1.0 + s2 / 42.0));
        (c, s)
    } else if s2 > 0.0 {
        let s = s2.sqrt();
        (s.cosh(), s.sinh() / s)
    } else {
        let s = (-s2).sqrt();
        (s.cos(), s.sin() / s)
    }
}

/// A profile piece, possibly seen through ξ → -ξ.
#[derive(Clone, Copy)]
struct Oriented<'a> {
    piece: Piece<'a>,
    reflect: bool,
}

impl Oriented<'_> {
    fn bounds(&self) -> (f64, f64) {
        let (a, b) = self.piece.bounds();
        if self.reflect {
            (-b, -a)
        } else {
            (a, b)
        }
    }

    fn eval(&self, x: f64) -> f64 {
        self.piece.eval(if self.reflect { -x } else { x })
    }
}

/// Fourth-order Magnus step over `[x, x + h]`.
fn magnus_step(piece: &Oriented<'_>, alpha: f64, kappa_sq: f64, x: f64, h: f64) -> Mat2 {
    let q1 = alpha * piece.eval(x + h * (0.5 - GAUSS_OFFSET)) - kappa_sq;
    let q2 = alpha * piece.eval(x + h * (0.5 + GAUSS_OFFSET)) - kappa_sq;
    // Ω = h/2 (A1 + A2) + √3/12 h² [A2, A1] with A = [[0, 1], [q, 0]]
    let diag = COMMUTATOR_WEIGHT * h * h * (q1 - q2);
    let lower = 0.5 * h * (q1 + q2);
    let (c, s) = cosh_sinhc(diag * diag + h * lower);
    [[c + s * diag, s * h], [s * lower, c - s * diag]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mul_dd(a: &Mat2, b: &DdMat2) -> DdMat2 {
    let mut out = [[TwoFloat::from(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = b[0][j] * a[i][0] + b[1][j] * a[i][1];
        }
    }
    out
}

/// Transfer matrix over the given pieces, in order.
fn propagate(pieces: &[Oriented<'_>], alpha: f64, kappa_sq: f64, opts: &ShootOptions) -> Result<DdMat2> {
    let one = TwoFloat::from(1.0);
    let zero = TwoFloat::from(0.0);
    let mut phi: DdMat2 = [[one, zero], [zero, one]];
    let mut steps = 0usize;
    let mut h_last = f64::INFINITY;

    for piece in pieces {
        let (a, b) = piece.bounds();
        let mut x = a;
        // The first trial step is bounded by the local oscillation/growth scale.
        let qmax = (alpha * piece.eval(a)).abs().max((alpha * piece.eval(b)).abs()) + kappa_sq.abs();
        let mut h = h_last.min(b - a).min(0.5 / (1.0 + qmax.sqrt()));

        while x < b {
            if steps >= opts.max_steps {
                return Err(Error::numerical(format!(
                    "shooting exceeded {} steps at xi = {x} (alpha = {alpha})",
                    opts.max_steps
                )));
            }
            steps += 1;

            let last = x + h >= b;
            let h_try = if last { b - x } else { h };
            let full = magnus_step(piece, alpha, kappa_sq, x, h_try);
            let first = magnus_step(piece, alpha, kappa_sq, x, 0.5 * h_try);
            let second = magnus_step(piece, alpha, kappa_sq, x + 0.5 * h_try, 0.5 * h_try);
            let fine = mul(&second, &first);

            let mut err: f64 = 0.0;
            for j in 0..2 {
                let c0 = f64::from(phi[0][j]);
                let c1 = f64::from(phi[1][j]);
                let w = fine[0][0] * c0 + fine[0][1] * c1;
                let dw = fine[1][0] * c0 + fine[1][1] * c1;
                let scale = opts.atol + opts.rtol * w.abs().max(dw.abs());
                let ew = (full[0][0] - fine[0][0]) * c0 + (full[0][1] - fine[0][1]) * c1;
                let edw = (full[1][0] - fine[1][0]) * c0 + (full[1][1] - fine[1][1]) * c1;
                // Differences at the rounding level of the step matrices carry
                // no truncation information.
                let noise = 8.0 * f64::EPSILON * (w.abs().max(dw.abs()) + c0.abs().max(c1.abs()));
                let e = (ew.abs().max(edw.abs()) - noise).max(0.0);
                err = err.max(e / scale);
            }
            // Error per unit length: the local budget is proportional to the
            // share of [-1, 1] the step covers, so the sum over all steps
            // stays near the requested tolerance.
            err /= 0.5 * h_try;
            {
            }
            if !err.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite state while shooting at xi = {x} (alpha = {alpha}, kappa^2 = {kappa_sq})"
                )));
            }

            if err <= 1.0 {
                phi = mul_dd(&fine, &phi);
                x = if last { b } else { x + h_try };
                if !last {
                    let grow = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 4.0) };
                    h = h_try * grow;
                }
            } else {
                h = h_try * (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                if h <= 1e-14 * (b - a).max(x.abs()).max(1e-300) {
                    return Err(Error::numerical(format!(
                        "step size underflow at xi = {x} (alpha = {alpha}, kappa^2 = {kappa_sq})"
                    )));
                }
            }
        }
        h_last = h;
    }

    Ok(phi)
}

/// Transfer matrix of the original profile from the one of its mirror
/// image: `M = J M̃⁻¹ J` with `J = diag(1, -1)` and `det M̃ = 1`.
fn from_reflected(m: DdMat2) -> DdMat2 {
    [[m[1][1], m[0][1]], [m[1][0], m[0][0]]]
}

/// Shoots with the default tolerances (relative 1e-12, absolute 1e-14).
pub fn shoot(profile: &PotentialProfile, alpha: f64, kappa_sq: f64) -> Result<FundamentalData> {
    shoot_with(profile, alpha, kappa_sq, &ShootOptions::default())
}

pub fn shoot_with(
    profile: &PotentialProfile,
    alpha: f64,
    kappa_sq: f64,
    opts: &ShootOptions,
) -> Result<FundamentalData> {
    if !alpha.is_finite() || !kappa_sq.is_finite() {
        return Err(Error::invalid(format!(
            "alpha = {alpha} and kappa^2 = {kappa_sq} must be finite"
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::invalid("integrator tolerances must be positive"));
    }

    let pieces = profile.pieces();
    let forward: Vec<Oriented<'_>> = pieces.iter().map(|&piece| Oriented { piece, reflect: false }).collect();
    let backward = || -> Vec<Oriented<'_>> {
        pieces.iter().rev().map(|&piece| Oriented { piece, reflect: true }).collect()
    };
    let phi = match opts.direction {
        Direction::Forward => propagate(&forward, alpha, kappa_sq, opts)?,
        Direction::Backward => from_reflected(propagate(&backward(), alpha, kappa_sq, opts)?),
        Direction::Auto => {
            let phi = propagate(&forward, alpha, kappa_sq, opts)?;
            if f64::from(phi[1][1]).abs() > f64::from(phi[0][0]).abs() {
                from_reflected(propagate(&backward(), alpha, kappa_sq, opts)?)
            } else {
                phi
            }
        }
    };

    let one = TwoFloat::from(1.0);
    let det = phi[0][0] * phi[1][1] - phi[1][0] * phi[0][1] - one;
    let data = FundamentalData {
        u1: f64::from(phi[0][0]),
        du1: f64::from(phi[1][0]),
        v1: f64::from(phi[0][1]),
        dv1: f64::from(phi[1][1]),
        wronskian_defect: f64::from(det).abs(),
    };
    if ![data.u1, data.du1, data.v1, data.dv1].iter().all(|v| v.is_finite()) {
        return Err(Error::numerical(format!(
            "non-finite boundary data (alpha = {alpha}, kappa^2 = {kappa_sq})"
        )));
    }
    Ok(data)
}

/// `g(α) = u'(1; 0, α)`. Its zeros are the resonant coupling constants.
pub fn neumann_mismatch(profile: &PotentialProfile, alpha: f64) -> Result<f64> {
    Ok(shoot(profile, alpha, 0.0)?.du1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(name: &str) -> PotentialProfile {
        PotentialProfile::builtin(name).unwrap()
    }

    #[test]
    fn free_equation_is_exact() {
        for name in ["seba-quadratic", "step", "zero"] {
            let d = shoot(&profile(name), 0.0, 0.0).unwrap();
            assert!((d.u1 - 1.0).abs() <= 1e-12, "{d:?}");
            assert!(d.du1.abs() <= 1e-12);
            assert!((d.v1 - 2.0).abs() <= 1e-12);
            assert!((d.dv1 - 1.0).abs() <= 1e-12);
        }
        assert_eq!(neumann_mismatch(&profile("step"), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_potential_matches_closed_form() {
        // Ψ ≡ 1 on [-1, 1]: u = cosh(m(ξ+1)), v = sinh(m(ξ+1))/m.
        let p = PotentialProfile::piecewise(vec![crate::potential::Segment {
            a: -1.0,
            b: 1.0,
            coeffs: vec![1.0],
        }])
        .unwrap();
        let alpha: f64 = 2.25;
        let m = alpha.sqrt();
        let d = shoot(&p, alpha, 0.0).unwrap();
        let rel = |x: f64, y: f64| ((x - y) / y).abs();
        assert!(rel(d.u1, (2.0 * m).cosh()) < 1e-11);
        assert!(rel(d.du1, m * (2.0 * m).sinh()) < 1e-11);
        assert!(rel(d.v1, (2.0 * m).sinh() / m) < 1e-11);
        assert!(rel(d.dv1, (2.0 * m).cosh()) < 1e-11);

        // Oscillatory side with ϰ² > αΨ.
        let d = shoot(&p, 1.0, 5.0).unwrap();
        let w: f64 = 2.0;
        assert!((d.u1 - (2.0 * w).cos()).abs() < 1e-11);
        assert!((d.du1 + w * (2.0 * w).sin()).abs() < 1e-11);
    }

    #[test]
    fn rejects_non_finite_parameters() {
        assert!(matches!(
            shoot(&profile("step"), f64::NAN, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn step_budget_exhaustion_is_numerical_failure() {
        let opts = ShootOptions {
            max_steps: 3,
            ..ShootOptions::default()
        };
        assert!(matches!(
            shoot_with(&profile("seba-quadratic"), 150.0, 0.0, &opts),
            Err(Error::NumericalFailure { .. })
        ));
    }
}

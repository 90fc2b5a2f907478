//! Reflection and transmission for a wave incident from the left.
//!
//! Outside `|x| ≤ ε` the solution is `e^{ikx} + R e^{-ikx}` on the left and
//! `T e^{ikx}` on the right. Inside, in the stretched variable ξ = x/ε, it is
//! `A u(ξ) + B v(ξ)` with `u`, `v` the fundamental solutions at ϰ = εk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::resonance::{residual_threshold, Classification};
use crate::shooting::{shoot, FundamentalData};

/// Soft upper bound on |ϰ| for [`asymptotic_coeffs`].
pub const ASYMPTOTIC_KAPPA_LIMIT: f64 = 0.1;

/// Relative pivot size below which the matching system counts as singular.
pub const PIVOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Limit,
    FiniteEps,
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub regime: Regime,
}

impl ScatteringCoefficients {
    pub fn transmission_probability(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection_probability(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// `|R|² + |T|² - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr() - 1.0
    }
}

/// ε → 0 coefficients. They do not depend on k.
pub fn limit_coeffs(c: &Classification) -> ScatteringCoefficients {
    let (r, t) = match *c {
        Classification::Resonant { theta, .. } => {
            let d = 1.0 + theta * theta;
            ((1.0 - theta * theta) / d, 2.0 * theta / d)
        }
        Classification::NonResonant => (-1.0, 0.0),
    };
    ScatteringCoefficients {
        r: Complex64::new(r, 0.0),
        t: Complex64::new(t, 0.0),
        regime: Regime::Limit,
    }
}

/// Coefficients at finite ε from the 4×4 matching system at x = ±ε.
pub fn finite_coeffs(profile: &PotentialProfile, alpha: f64, k: f64, eps: f64) -> Result<ScatteringCoefficients> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid(format!("k must be positive and finite, got {k}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive and finite, got {eps}")));
    }
    let kappa = eps * k;
    let d = shoot(profile, alpha, kappa * kappa)?;
    let (r, t) = solve_matching(&d, kappa)?;
    Ok(ScatteringCoefficients { r, t, regime: Regime::FiniteEps })
}

/// Solves for (R, A, B, T) and returns (R, T).
fn solve_matching(d: &FundamentalData, kappa: f64) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, kappa);
    let em = e.conj();
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut m = [
        [-e, re(1.0), z, z],
        [i * kappa * e, z, re(1.0), z],
        [z, re(d.u1), re(d.v1), -e],
        [z, re(d.du1), re(d.dv1), -i * kappa * e],
    ];
    let mut rhs = [em, i * kappa * em, z, z];
    let x = solve4(&mut m, &mut rhs)?;
    Ok((x[0], x[3]))
}

/// Gaussian elimination with partial pivoting on scaled rows.
fn solve4(m: &mut [[Complex64; 4]; 4], b: &mut [Complex64; 4]) -> Result<[Complex64; 4]> {
    let scale: Vec<f64> = m
        .iter()
        .map(|row| row.iter().map(|c| c.norm()).fold(0.0, f64::max))
        .collect();
    let mut scale: [f64; 4] = [scale[0], scale[1], scale[2], scale[3]];
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&a, &b| {
                let ra = m[a][col].norm() / scale[a];
                let rb = m[b][col].norm() / scale[b];
                ra.total_cmp(&rb)
            })
            .unwrap();
        if p != col {
            m.swap(p, col);
            b.swap(p, col);
            scale.swap(p, col);
            det = -det;
        }
        let piv = m[col][col];
        det *= piv;
        if !(piv.norm() >= PIVOT_TOL * scale[col]) {
            return Err(Error::NumericalFailure {
                message: format!("matching system is singular at column {col}"),
                determinant: Some(det.norm()),
            });
        }
        for r in col + 1..4 {
            let f = m[r][col] / piv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 4];
    for r in (0..4).rev() {
        let mut s = b[r];
        for c in r + 1..4 {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    if x.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NumericalFailure {
            message: "matching system produced a non-finite solution".into(),
            determinant: Some(det.norm()),
        });
    }
    Ok(x)
}

/// `q(α) = 2u'(1) - u(1) - v'(1)` at ϰ = 0.
pub fn q_factor(profile: &PotentialProfile, alpha: f64) -> Result<f64> {
    let d = shoot(profile, alpha, 0.0)?;
    Ok(q_from(&d))
}

fn q_from(d: &FundamentalData) -> f64 {
    2.0 * d.du1 - d.u1 - d.dv1
}

/// Leading-order small-ϰ coefficients
/// `R = (-u' + iϰ(u - v')) / (u' + iϰq)`, `T = -2iϰ / (u' + iϰq)`,
/// with all data taken at ϰ = 0. Meaningful for |ϰ| ≲ [`ASYMPTOTIC_KAPPA_LIMIT`].
pub fn asymptotic_coeffs(profile: &PotentialProfile, alpha: f64, kappa: f64) -> Result<ScatteringCoefficients> {
    if !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be finite, got {kappa}")));
    }
    if kappa.abs() > ASYMPTOTIC_KAPPA_LIMIT {
        log::warn!("kappa = {kappa} is outside the small-kappa range |kappa| <= {ASYMPTOTIC_KAPPA_LIMIT}");
    }
    let d = shoot(profile, alpha, 0.0)?;
    let q = q_from(&d);
    let i = Complex64::i();
    let den = d.du1 + i * kappa * q;
    if kappa == 0.0 && d.du1.abs() <= residual_threshold(d.u1, d.dv1) {
        // On a resonance the expressions are 0/0 at ϰ = 0; take their ϰ → 0 limit.
        return asymptotic_at_resonance(&d, q);
    }
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::NumericalFailure {
            message: "asymptotic denominator u'(1) + i kappa q vanishes".into(),
            determinant: Some(0.0),
        });
    }
    let r = (-d.du1 + i * kappa * (d.u1 - d.dv1)) / den;
    let t = -2.0 * i * kappa / den;
    Ok(ScatteringCoefficients { r, t, regime: Regime::Asymptotic })
}

fn asymptotic_at_resonance(d: &FundamentalData, q: f64) -> Result<ScatteringCoefficients> {
    if q == 0.0 {
        return Err(Error::NumericalFailure {
            message: "asymptotic denominator vanishes: u'(1) = 0 and q = 0".into(),
            determinant: Some(0.0),
        });
    }
    Ok(ScatteringCoefficients {
        r: Complex64::new((d.u1 - d.dv1) / q, 0.0),
        t: Complex64::new(-2.0 / q, 0.0),
        regime: Regime::Asymptotic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_at_theta_one_is_transparent() {
        let c = limit_coeffs(&Classification::Resonant { alpha: 0.0, theta: 1.0 });
        assert_eq!(c.r, Complex64::new(0.0, 0.0));
        assert_eq!(c.t, Complex64::new(1.0, 0.0));
        let n = limit_coeffs(&Classification::NonResonant);
        assert_eq!((n.r.re, n.t.re), (-1.0, 0.0));
    }

    #[test]
    fn free_line_transmits_fully() {
        let p = PotentialProfile::builtin("seba-quadratic").unwrap();
        let c = finite_coeffs(&p, 0.0, 1.0, 0.1).unwrap();
        assert!(c.r.norm() < 1e-12, "{c:?}");
        assert!((c.t - 1.0).norm() < 1e-12, "{c:?}");
    }

    #[test]
    fn singular_system_reports_determinant() {
        let d = FundamentalData { u1: 0.0, du1: 0.0, v1: 0.0, dv1: 0.0, wronskian_defect: 1.0 };
        let err = solve_matching(&d, 0.1).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { determinant: Some(_), .. }), "{err:?}");
    }

    #[test]
    fn q_at_zero() {
        let p = PotentialProfile::builtin("step").unwrap();
        assert_eq!(q_factor(&p, 0.0).unwrap(), -2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = PotentialProfile::builtin("step").unwrap();
        assert!(matches!(finite_coeffs(&p, 1.0, 0.0, 0.1), Err(Error::InvalidInput(_))));
        assert!(matches!(finite_coeffs(&p, 1.0, 1.0, -0.1), Err(Error::InvalidInput(_))));
        assert!(matches!(asymptotic_coeffs(&p, 1.0, f64::NAN), Err(Error::InvalidInput(_))));
    }
}

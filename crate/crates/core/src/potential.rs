//! Compactly supported potential profiles Ψ on [-1, 1].
//!
//! A profile is either piecewise polynomial (coefficients ordered
//! constant-first, in the global variable ξ) or sampled, in which case it is
//! the linear interpolant of its nodes. Outside its support a profile is 0.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names accepted by [`PotentialProfile::builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["seba-quadratic", "step", "zero"];

/// Default tolerance for the δ′-likeness report.
pub const DELTA_PRIME_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    PiecewisePolynomial,
    Sampled,
}

/// A polynomial piece `Σ coeffs[j] ξ^j` on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl Segment {
    pub fn eval(&self, xi: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    /// Exact ∫_a^b ξ^shift · p(ξ) dξ from monomial antiderivatives.
    fn weighted_integral(&self, shift: i32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let p = j as i32 + shift + 1;
                c * (self.b.powi(p) - self.a.powi(p)) / p as f64
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Piecewise(Vec<Segment>),
    Sampled { xi: Vec<f64>, psi: Vec<f64> },
}

/// A validated, immutable potential profile.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialProfile {
    repr: Repr,
}

/// The first two moments ∫Ψ and ∫ξΨ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub m0: f64,
    pub m1: f64,
}

impl Moments {
    /// ∫Ψ = 0 and ∫ξΨ = -1 within `tol`.
    pub fn is_delta_prime_like(&self, tol: f64) -> bool {
        self.m0.abs() <= tol && (self.m1 + 1.0).abs() <= tol
    }
}

/// One smooth piece of a profile over a sub-interval of [-1, 1], as seen by
/// the ODE integrator. Breakpoints of the profile never fall inside a piece.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Piece<'a> {
    Zero { a: f64, b: f64 },
    Poly { seg: &'a Segment },
    Linear { x0: f64, p0: f64, x1: f64, p1: f64 },
}

impl Piece<'_> {
    pub(crate) fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Zero { a, b } => (a, b),
            Piece::Poly { seg } => (seg.a, seg.b),
            Piece::Linear { x0, x1, .. } => (x0, x1),
        }
    }

    pub(crate) fn eval(&self, xi: f64) -> f64 {
        match *self {
            Piece::Zero { .. } => 0.0,
            Piece::Poly { seg } => seg.eval(xi),
            Piece::Linear { x0, p0, x1, p1 } => lerp(x0, p0, x1, p1, xi),
        }
    }
}

fn lerp(x0: f64, p0: f64, x1: f64, p1: f64, xi: f64) -> f64 {
    let t = (xi - x0) / (x1 - x0);
    p0 + (p1 - p0) * t
}

fn check_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{field}: value {v} is not finite")))
    }
}

fn check_in_unit(field: &str, v: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{field}: {v} lies outside [-1, 1]"
        )))
    }
}

impl PotentialProfile {
    /// Builds a piecewise-polynomial profile. Segments must be sorted,
    /// contiguous, non-degenerate and inside [-1, 1].
    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("segments: at least one segment is required"));
        }
        for (i, s) in segments.iter().enumerate() {
            check_finite(&format!("segments[{i}].a"), s.a)?;
            check_finite(&format!("segments[{i}].b"), s.b)?;
            check_in_unit(&format!("segments[{i}].a"), s.a)?;
            check_in_unit(&format!("segments[{i}].b"), s.b)?;
            if s.a >= s.b {
                return Err(Error::invalid(format!(
                    "segments[{i}]: a = {} must be less than b = {}",
                    s.a, s.b
                )));
            }
            if s.coeffs.is_empty() {
                return Err(Error::invalid(format!(
                    "segments[{i}].coeffs: at least one coefficient is required"
                )));
            }
            for (j, &c) in s.coeffs.iter().enumerate() {
                check_finite(&format!("segments[{i}].coeffs[{j}]"), c)?;
            }
            if i > 0 {
                let prev = segments[i - 1].b;
                if s.a < prev {
                    return Err(Error::invalid(format!(
                        "segments[{i}]: overlaps segments[{}] (a = {} < {})",
                        i - 1,
                        s.a,
                        prev
                    )));
                }
                if s.a > prev {
                    return Err(Error::invalid(format!(
                        "segments[{i}]: gap after segments[{}] (a = {} > {})",
                        i - 1,
                        s.a,
                        prev
                    )));
                }
            }
        }
        Ok(Self {
            repr: Repr::Piecewise(segments),
        })
    }

    /// Builds a sampled profile, linearly interpolated between nodes.
    pub fn sampled(xi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if xi.len() != psi.len() {
            return Err(Error::invalid(format!(
                "samples: xi has {} entries but psi has {}",
                xi.len(),
                psi.len()
            )));
        }
        if xi.len() < 2 {
            return Err(Error::invalid("samples.xi: at least 2 nodes are required"));
        }
        for (i, (&x, &p)) in xi.iter().zip(&psi).enumerate() {
            check_finite(&format!("samples.xi[{i}]"), x)?;
            check_finite(&format!("samples.psi[{i}]"), p)?;
            check_in_unit(&format!("samples.xi[{i}]"), x)?;
            if i > 0 && x <= xi[i - 1] {
                return Err(Error::invalid(format!(
                    "samples.xi[{i}]: nodes must be strictly increasing ({} after {})",
                    x,
                    xi[i - 1]
                )));
            }
        }
        Ok(Self {
            repr: Repr::Sampled { xi, psi },
        })
    }

    /// One of the built-in profiles, see [`BUILTIN_NAMES`].
    ///
    /// * `seba-quadratic`: -6ξ(ξ+1) on [-1,0], 6ξ(ξ-1) on [0,1]
    /// * `step`: +1 on (-1,0), -1 on (0,1)
    /// * `zero`: identically 0
    pub fn builtin(name: &str) -> Result<Self> {
        let seg = |a: f64, b: f64, coeffs: &[f64]| Segment {
            a,
            b,
            coeffs: coeffs.to_vec(),
        };
        let segments = match name {
            "seba-quadratic" => vec![
                seg(-1.0, 0.0, &[0.0, -6.0, -6.0]),
                seg(0.0, 1.0, &[0.0, -6.0, 6.0]),
            ],
            "step" => vec![seg(-1.0, 0.0, &[1.0]), seg(0.0, 1.0, &[-1.0])],
            "zero" => vec![seg(-1.0, 1.0, &[0.0])],
            other => {
                return Err(Error::invalid(format!(
                    "unknown builtin profile '{other}' (expected one of {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Self::piecewise(segments)
    }

    pub fn kind(&self) -> ProfileKind {
        match self.repr {
            Repr::Piecewise(_) => ProfileKind::PiecewisePolynomial,
            Repr::Sampled { .. } => ProfileKind::Sampled,
        }
    }

    pub fn segments(&self) -> Option<&[Segment]> {
        match &self.repr {
            Repr::Piecewise(s) => Some(s),
            Repr::Sampled { .. } => None,
        }
    }

    /// `(xi, psi)` node arrays of a sampled profile.
    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Repr::Sampled { xi, psi } => Some((xi, psi)),
            Repr::Piecewise(_) => None,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Piecewise(s) => (s[0].a, s[s.len() - 1].b),
            Repr::Sampled { xi, .. } => (xi[0], xi[xi.len() - 1]),
        }
    }

    /// Ψ(ξ); exactly 0 outside the support. At an interior breakpoint the
    /// segment to the right wins.
    pub fn eval(&self, xi: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&xi) {
            return 0.0;
        }
        match &self.repr {
            Repr::Piecewise(segs) => {
                let i = segs.partition_point(|s| s.b <= xi).min(segs.len() - 1);
                segs[i].eval(xi)
            }
            Repr::Sampled { xi: xs, psi } => {
                let i = xs.partition_point(|&x| x <= xi).clamp(1, xs.len() - 1);
                lerp(xs[i - 1], psi[i - 1], xs[i], psi[i], xi)
            }
        }
    }

    /// Exact moments: monomial antiderivatives per segment, or exact
    /// integration of the piecewise-linear interpolant.
    pub fn moments(&self) -> Moments {
        match &self.repr {
            Repr::Piecewise(segs) => Moments {
                m0: segs.iter().map(|s| s.weighted_integral(0)).sum(),
                m1: segs.iter().map(|s| s.weighted_integral(1)).sum(),
            },
            Repr::Sampled { xi, psi } => {
                let mut m0 = 0.0;
                let mut m1 = 0.0;
                for i in 1..xi.len() {
                    let (x0, x1, p0, p1) = (xi[i - 1], xi[i], psi[i - 1], psi[i]);
                    let d = x1 - x0;
                    m0 += 0.5 * d * (p0 + p1);
                    m1 += d / 6.0 * (x0 * (2.0 * p0 + p1) + x1 * (p0 + 2.0 * p1));
                }
                Moments { m0, m1 }
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match &self.repr {
            Repr::Piecewise(segs) => segs.iter().all(|s| s.coeffs.iter().all(|&c| c == 0.0)),
            Repr::Sampled { psi, .. } => psi.iter().all(|&p| p == 0.0),
        }
    }

    /// Reflection ξ → -ξ. Scattering of the mirrored profile with the wave
    /// incident from the left equals right incidence on the original.
    pub fn mirrored(&self) -> Self {
        let repr = match &self.repr {
            Repr::Piecewise(segs) => Repr::Piecewise(
                segs.iter()
                    .rev()
                    .map(|s| Segment {
                        a: neg(s.b),
                        b: neg(s.a),
                        coeffs: s
                            .coeffs
                            .iter()
                            .enumerate()
                            .map(|(j, &c)| if j % 2 == 1 { neg(c) } else { c })
                            .collect(),
                    })
                    .collect(),
            ),
            Repr::Sampled { xi, psi } => Repr::Sampled {
                xi: xi.iter().rev().map(|&x| neg(x)).collect(),
                psi: psi.iter().rev().copied().collect(),
            },
        };
        Self { repr }
    }

    /// Smooth pieces covering all of [-1, 1], zero-padded outside the
    /// support.
    pub(crate) fn pieces(&self) -> Vec<Piece<'_>> {
        let (lo, hi) = self.support();
        let mut out = Vec::new();
        if lo > -1.0 {
            out.push(Piece::Zero { a: -1.0, b: lo });
        }
        match &self.repr {
            Repr::Piecewise(segs) => out.extend(segs.iter().map(|seg| Piece::Poly { seg })),
            Repr::Sampled { xi, psi } => out.extend((1..xi.len()).map(|i| Piece::Linear {
                x0: xi[i - 1],
                p0: psi[i - 1],
                x1: xi[i],
                p1: psi[i],
            })),
        }
        if hi < 1.0 {
            out.push(Piece::Zero { a: hi, b: 1.0 });
        }
        out
    }

    /// Parses the JSON profile format.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("profile JSON: {e}")))?;
        match (file.segments, file.samples) {
            (Some(segments), None) => Self::piecewise(segments),
            (None, Some(s)) => Self::sampled(s.xi, s.psi),
            (Some(_), Some(_)) => Err(Error::invalid(
                "profile JSON: exactly one of 'segments' or 'samples' is allowed, found both",
            )),
            (None, None) => Err(Error::invalid(
                "profile JSON: one of 'segments' or 'samples' is required",
            )),
        }
    }

    /// Serializes to the JSON profile format; floats round-trip bit-exactly.
    pub fn to_json_string(&self) -> String {
        let file = match &self.repr {
            Repr::Piecewise(segs) => ProfileFile {
                segments: Some(segs.clone()),
                samples: None,
            },
            Repr::Sampled { xi, psi } => ProfileFile {
                segments: None,
                samples: Some(SamplesFile {
                    xi: xi.clone(),
                    psi: psi.clone(),
                }),
            },
        };
        serde_json::to_string_pretty(&file).expect("profile serialization cannot fail")
    }
}

/// Reads and validates a profile file.
pub fn load_profile(path: impl AsRef<Path>) -> Result<PotentialProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    PotentialProfile::from_json_str(&text)
        .map_err(|e| Error::invalid(format!("{}: {}", path.display(), strip_prefix(&e))))
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) => m.clone(),
        other => other.to_string(),
    }
}

impl fmt::Display for PotentialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.support();
        match &self.repr {
            Repr::Piecewise(s) => write!(f, "piecewise polynomial, {} segments on [{lo}, {hi}]", s.len()),
            Repr::Sampled { xi, .. } => write!(f, "sampled, {} nodes on [{lo}, {hi}]", xi.len()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<Segment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<SamplesFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplesFile {
    xi: Vec<f64>,
    psi: Vec<f64>,
}

/// Negation that maps 0 to +0, so mirrored profiles serialize without `-0.0`.
fn neg(x: f64) -> f64 {
    0.0 - x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_builtins() {
        let seba = PotentialProfile::builtin("seba-quadratic").unwrap();
        assert_eq!(seba.eval(-0.5), 1.5);
        assert_eq!(seba.eval(0.5), -1.5);
        assert_eq!(seba.eval(2.0), 0.0);
        assert_eq!(seba.eval(-1.0 - 1e-15), 0.0);

        let step = PotentialProfile::builtin("step").unwrap();
        assert_eq!(step.eval(-0.5), 1.0);
        assert_eq!(step.eval(0.5), -1.0);
        assert_eq!(step.eval(1.5), 0.0);
    }

    #[test]
    fn moments_builtins() {
        let m = PotentialProfile::builtin("seba-quadratic").unwrap().moments();
        assert!(m.m0.abs() <= 1e-12 && (m.m1 + 1.0).abs() <= 1e-12, "{m:?}");
        assert!(m.is_delta_prime_like(DELTA_PRIME_TOL));

        let m = PotentialProfile::builtin("step").unwrap().moments();
        assert_eq!((m.m0, m.m1), (0.0, -1.0));

        let m = PotentialProfile::builtin("zero").unwrap().moments();
        assert_eq!((m.m0, m.m1), (0.0, 0.0));
        assert!(!m.is_delta_prime_like(DELTA_PRIME_TOL));
    }

    #[test]
    fn sampled_moments_exact_for_linear_interpolant() {
        // Ψ(ξ) = -1.5 ξ on [-1, 1] sampled at three nodes is exactly linear.
        let p = PotentialProfile::sampled(vec![-1.0, 0.0, 1.0], vec![1.5, 0.0, -1.5]).unwrap();
        let m = p.moments();
        assert!(m.m0.abs() < 1e-15);
        assert!((m.m1 + 1.0).abs() < 1e-15);
        assert_eq!(p.eval(-0.5), 0.75);
    }

    #[test]
    fn unknown_builtin_rejected() {
        assert!(matches!(
            PotentialProfile::builtin("gaussian"),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn invariant_violations() {
        let seg = |a, b| Segment {
            a,
            b,
            coeffs: vec![1.0],
        };
        let err = PotentialProfile::piecewise(vec![seg(-1.0, 0.2), seg(0.0, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("segments[1]"), "{err}");
        assert!(PotentialProfile::piecewise(vec![seg(-1.0, 0.0), seg(0.1, 1.0)]).is_err());
        assert!(PotentialProfile::piecewise(vec![seg(-1.5, 0.0)]).is_err());
        assert!(PotentialProfile::piecewise(vec![seg(0.5, 0.5)]).is_err());
        assert!(PotentialProfile::piecewise(vec![]).is_err());
        assert!(PotentialProfile::sampled(vec![0.0], vec![1.0]).is_err());
        assert!(PotentialProfile::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PotentialProfile::sampled(vec![0.0, f64::NAN], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn mirror_reflects() {
        let seba = PotentialProfile::builtin("seba-quadratic").unwrap();
        let m = seba.mirrored();
        for &x in &[-0.9, -0.3, 0.0, 0.4, 0.77] {
            assert_eq!(m.eval(x), seba.eval(-x));
        }
        assert_eq!(m.mirrored(), seba);
    }

    #[test]
    fn pieces_cover_unit_interval() {
        let p = PotentialProfile::sampled(vec![-0.5, 0.0, 0.5], vec![1.0, 0.0, -1.0]).unwrap();
        let pieces = p.pieces();
        assert_eq!(pieces.first().unwrap().bounds().0, -1.0);
        assert_eq!(pieces.last().unwrap().bounds().1, 1.0);
        for w in pieces.windows(2) {
            assert_eq!(w[0].bounds().1, w[1].bounds().0);
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let seba = PotentialProfile::builtin("seba-quadratic").unwrap();
        let back = PotentialProfile::from_json_str(&seba.to_json_string()).unwrap();
        assert_eq!(back, seba);

        let bad = r#"{"segments":[{"a":-1.0,"b":0.0,"coeffs":[1.0]}],"extra":1}"#;
        assert!(PotentialProfile::from_json_str(bad).is_err());
        let both = r#"{"segments":[{"a":-1.0,"b":0.0,"coeffs":[1.0]}],"samples":{"xi":[0,1],"psi":[0,0]}}"#;
        assert!(PotentialProfile::from_json_str(both).is_err());
    }
}

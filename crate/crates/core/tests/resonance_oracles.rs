use deltaprime::resonance::{classify, coupling, find_resonances, Classification};
use deltaprime::shooting::{neumann_mismatch, shoot, shoot_with, ShootOptions};
use deltaprime::PotentialProfile;

fn profile(name: &str) -> PotentialProfile {
    PotentialProfile::builtin(name).unwrap()
}

/// First positive root of tan m = tanh m, by plain bisection on
/// sin m cosh m - cos m sinh m over (π, 3π/2).
fn step_root_oracle() -> f64 {
    let f = |m: f64| m.sin() * m.cosh() - m.cos() * m.sinh();
    let (mut a, mut b) = (std::f64::consts::PI, 1.5 * std::f64::consts::PI);
    assert!(f(a) > 0.0 && f(b) < 0.0);
    while b - a > 1e-13 {
        let c = 0.5 * (a + b);
        if f(c) > 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

fn step_theta_oracle(m: f64) -> f64 {
    m.cosh() * m.cos() + m.sinh() * m.sin()
}

#[test]
fn step_oracle_value() {
    let m = step_root_oracle();
    assert!((m - 3.9266).abs() < 1e-4, "{m}");
    assert!((m * m - 15.418).abs() < 1e-3);
    // Regression value of the closed form, confirmed numerically below.
    assert!((step_theta_oracle(m) + 35.9).abs() < 0.1, "{}", step_theta_oracle(m));
}

#[test]
fn step_resonances_match_closed_form() {
    let m = step_root_oracle();
    let alpha = m * m;
    let theta = step_theta_oracle(m);

    let roots = find_resonances(&profile("step"), -20.0, 20.0, 0.5).unwrap();
    assert_eq!(roots.len(), 3, "{roots:?}");
    assert_eq!(roots[1].alpha, 0.0);
    assert_eq!(roots[1].theta, 1.0);
    assert!((roots[2].alpha - alpha).abs() <= 1e-8, "{} vs {alpha}", roots[2].alpha);
    assert!((roots[0].alpha + alpha).abs() <= 1e-8);
    assert!(((roots[2].theta - theta) / theta).abs() <= 1e-8);
    assert!((roots[0].theta * roots[2].theta - 1.0).abs() <= 1e-6);

    let d = shoot(&profile("step"), alpha, 0.0).unwrap();
    assert!(d.du1.abs() <= 1e-8 * d.u1.abs());
    assert!(((coupling(&profile("step"), roots[2].alpha).unwrap() - theta) / theta).abs() <= 1e-8);
}

#[test]
fn step_mismatch_brackets_root() {
    let g10 = neumann_mismatch(&profile("step"), 10.0).unwrap();
    let g20 = neumann_mismatch(&profile("step"), 20.0).unwrap();
    assert!(g10.signum() != g20.signum(), "{g10} {g20}");
}

#[test]
fn seba_table_values() {
    let table = [
        (18.1747, -54.9385),
        (57.1490, 1352.8032),
        (117.4863, -32156.4597),
        (199.1756, 755821.4703),
    ];
    let roots = find_resonances(&profile("seba-quadratic"), 0.0, 200.0, 0.5).unwrap();
    assert_eq!(roots.len(), 5, "{roots:?}");
    assert_eq!((roots[0].alpha, roots[0].theta), (0.0, 1.0));
    for (r, (alpha, theta)) in roots[1..].iter().zip(table) {
        assert!((r.alpha - alpha).abs() <= 5e-4, "{r:?}");
        assert!(((r.theta - theta) / theta).abs() <= 5e-3, "{r:?}");
        assert!(r.residual <= 1e-8 * r.theta.abs().max(1.0 / r.theta.abs()));
        assert!(r.bracket.1 - r.bracket.0 <= 1e-10);
    }

    // The tabulated α is rounded to four decimals and sits ~9e-5 above the
    // root, where g' ≈ 23, so g is small but not below 1e-3.
    let d = shoot(&profile("seba-quadratic"), 18.1747, 0.0).unwrap();
    assert!(d.du1.abs() <= 2.5e-3, "{d:?}");
    assert!(((d.u1 + 54.9385) / 54.9385).abs() <= 5e-3);
}

#[test]
fn seba_scan_is_symmetric_and_step_independent() {
    let p = profile("seba-quadratic");
    let full = find_resonances(&p, -200.0, 200.0, 0.5).unwrap();
    assert_eq!(full.len(), 9);
    for i in 0..4 {
        let (neg, pos) = (full[i], full[8 - i]);
        assert!((neg.alpha + pos.alpha).abs() <= 1e-8 * pos.alpha.abs(), "{neg:?} {pos:?}");
        assert!((neg.theta * pos.theta - 1.0).abs() <= 1e-6, "{neg:?} {pos:?}");
    }
    let fine = find_resonances(&p, 0.0, 200.0, 0.25).unwrap();
    let coarse = find_resonances(&p, 0.0, 200.0, 0.5).unwrap();
    assert_eq!(fine.len(), coarse.len());
    for (a, b) in fine.iter().zip(&coarse) {
        assert!((a.alpha - b.alpha).abs() <= 1e-9, "{a:?} {b:?}");
    }
    for w in full.windows(2) {
        assert!(w[1].alpha - w[0].alpha >= 0.05);
    }
}

#[test]
fn wronskian_and_lagrange_identities() {
    for name in ["seba-quadratic", "step"] {
        let p = profile(name);
        for i in 0..=40 {
            let alpha = -200.0 + 10.0 * i as f64;
            for kappa_sq in [0.0, 0.01, 1.0] {
                let d = shoot(&p, alpha, kappa_sq).unwrap();
                assert!(d.wronskian_defect <= 1e-9, "{name} {alpha} {kappa_sq}: {d:?}");
            }
        }
        for r in find_resonances(&p, -60.0, 60.0, 0.5).unwrap() {
            let d = shoot(&p, r.alpha, 0.0).unwrap();
            assert!((d.u1 * d.dv1 - 1.0).abs() <= 1e-8, "{name} {r:?} {d:?}");
            assert!((r.theta * d.dv1 - 1.0).abs() <= 1e-8, "{name} {r:?} {d:?}");
        }
    }
}

#[test]
fn tolerance_refinement_is_self_consistent() {
    let p = profile("seba-quadratic");
    for alpha in [-57.0, 18.1747, 100.0] {
        let loose = ShootOptions { rtol: 1e-10, ..ShootOptions::default() };
        let tight = ShootOptions { rtol: 5e-11, ..ShootOptions::default() };
        let a = shoot_with(&p, alpha, 0.0, &loose).unwrap();
        let b = shoot_with(&p, alpha, 0.0, &tight).unwrap();
        assert!(
            (a.u1 - b.u1).abs() <= 10.0 * loose.rtol * a.u1.abs().max(1.0),
            "{alpha}: {} vs {}",
            a.u1,
            b.u1
        );
    }
}

#[test]
fn classification_of_table_entry() {
    let c = classify(&profile("seba-quadratic"), 18.1747, 1e-3).unwrap();
    let Classification::Resonant { alpha, theta } = c else { panic!("{c:?}") };
    assert!((alpha - 18.1747).abs() < 5e-4);
    assert!((theta / -54.9385 - 1.0).abs() < 5e-3);
}

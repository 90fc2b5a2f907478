use deltaprime::{load_profile, Error, PotentialProfile, Segment};
use proptest::prelude::*;

/// Sorted, strictly increasing breakpoints in [-1, 1].
fn breakpoints(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-1000i32..=1000, 2..=max)
        .prop_map(|s| s.into_iter().map(|k| k as f64 / 1000.0).collect())
}

fn piecewise() -> impl Strategy<Value = PotentialProfile> {
    breakpoints(6).prop_flat_map(|xs| {
        let n = xs.len() - 1;
        prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 1..4), n).prop_map(move |coeffs| {
            let segs = xs
                .windows(2)
                .zip(coeffs)
                .map(|(w, c)| Segment { a: w[0], b: w[1], coeffs: c })
                .collect();
            PotentialProfile::piecewise(segs).unwrap()
        })
    })
}

fn sampled() -> impl Strategy<Value = PotentialProfile> {
    breakpoints(8).prop_flat_map(|xs| {
        let n = xs.len();
        prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), n)
            .prop_map(move |psi| PotentialProfile::sampled(xs.clone(), psi).unwrap())
    })
}

fn any_profile() -> impl Strategy<Value = PotentialProfile> {
    prop_oneof![piecewise(), sampled()]
}

proptest! {
    #[test]
    fn zero_outside_support(p in any_profile(), t in 0.0f64..1.0) {
        let (lo, hi) = p.support();
        prop_assert_eq!(p.eval(lo - t - 1e-12), 0.0);
        prop_assert_eq!(p.eval(hi + t + 1e-12), 0.0);
        prop_assert_eq!(p.eval(2.0 + t), 0.0);
    }

    #[test]
    fn json_round_trip_is_exact(p in any_profile()) {
        let text = p.to_json_string();
        let back = PotentialProfile::from_json_str(&text).unwrap();
        prop_assert_eq!(back.to_json_string(), text);
        prop_assert_eq!(&back, &p);
    }

    #[test]
    fn mirror_is_an_involution(p in any_profile(), xi in -1.0f64..1.0) {
        let m = p.mirrored();
        prop_assert_eq!(m.mirrored(), p.clone());
        let (lo, hi) = p.support();
        prop_assert_eq!(m.support(), (-hi, -lo));
        // Away from breakpoints the reflection is pointwise.
        let a = p.eval(xi);
        let b = m.eval(-xi);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} {}", a, b);
    }

    #[test]
    fn mirror_flips_first_moment(p in piecewise()) {
        let (a, b) = (p.moments(), p.mirrored().moments());
        let scale = a.m0.abs().max(a.m1.abs()).max(1.0);
        prop_assert!((a.m0 - b.m0).abs() <= 1e-9 * scale);
        prop_assert!((a.m1 + b.m1).abs() <= 1e-9 * scale);
    }
}

#[test]
fn load_profile_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = PotentialProfile::builtin("seba-quadratic").unwrap();
    std::fs::write(&path, p.to_json_string()).unwrap();
    assert_eq!(load_profile(&path).unwrap(), p);

    let missing = dir.path().join("missing.json");
    assert!(matches!(load_profile(&missing), Err(Error::InvalidInput(_)) | Err(Error::Io { .. })));

    std::fs::write(&path, "{\"segments\":[{\"a\":-1,\"b\":0.5,\"coeffs\":[1]},{\"a\":0,\"b\":1,\"coeffs\":[1]}]}").unwrap();
    let err = load_profile(&path).unwrap_err().to_string();
    assert!(err.contains("segments[1]"), "{err}");
}

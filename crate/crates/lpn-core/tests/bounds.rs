//! Closed-form bound values, their error conditions, and the algebraic
//! relations between the two bounds.

use lpn_core::bounds::{
    no_postselect_bound, postselected_bound, typicality_probability, BoundParams, BoundsError,
};

fn params(n: usize, eta_a: f64, eta_d: f64, sigma: f64) -> BoundParams {
    BoundParams {
        n,
        eta_a,
        eta_d,
        sigma,
        delta: 0.01,
        delta_prime: 0.05,
        delta_dprime: 0.05,
    }
}

#[test]
fn postselected_bound_reference_values() {
    let b3 = postselected_bound(&params(3, 0.05, 0.3, 0.304)).unwrap();
    assert!((b3 - 78.68785156425638).abs() < 1e-10, "n=3: {b3}");
    let b2 = postselected_bound(&params(2, 0.05, 0.3, 0.304)).unwrap();
    assert!((b2 - 72.32035994520113).abs() < 1e-10, "n=2: {b2}");
}

#[test]
fn no_postselect_bound_reference_value() {
    let mut p = params(3, 0.05, 0.0, 0.304);
    p.delta_dprime = 0.0;
    let b = no_postselect_bound(&p).unwrap();
    assert!((b - 20.509359007410918).abs() < 1e-10, "{b}");
}

#[test]
fn no_postselect_is_twice_postselected_without_ancilla_terms() {
    // with eta_a = 0 (eta_bar = 1) and delta'' = 0 the two expressions
    // differ by exactly the factor 2 from keeping only half the records
    for sigma in [0.1, 0.304, 0.8] {
        for eta_d in [0.0, 0.2, 0.4] {
            let mut p = params(3, 0.0, eta_d, sigma);
            p.delta_dprime = 0.0;
            let post = postselected_bound(&p).unwrap();
            let nopost = no_postselect_bound(&p).unwrap();
            assert!(
                ((nopost / post) - 2.0).abs() < 1e-12,
                "ratio {} at sigma={sigma}, eta_d={eta_d}",
                nopost / post
            );
        }
    }
}

#[test]
fn bounds_scale_quadratically_in_sigma() {
    let p1 = params(2, 0.1, 0.25, 0.2);
    let mut p2 = p1;
    p2.sigma = 0.4;
    let r_post = postselected_bound(&p2).unwrap() / postselected_bound(&p1).unwrap();
    let r_nopost = no_postselect_bound(&p2).unwrap() / no_postselect_bound(&p1).unwrap();
    assert!((r_post - 4.0).abs() < 1e-12);
    assert!((r_nopost - 4.0).abs() < 1e-12);
}

#[test]
fn bounds_are_monotone_in_the_noise_knobs() {
    let base = params(3, 0.05, 0.2, 0.304);
    let post = postselected_bound(&base).unwrap();

    // more data-readout error: larger bound
    let mut worse = base;
    worse.eta_d = 0.3;
    assert!(postselected_bound(&worse).unwrap() > post);
    assert!(no_postselect_bound(&worse).unwrap() > no_postselect_bound(&base).unwrap());

    // looser target failure probability: smaller bound
    let mut loose = base;
    loose.delta = 0.05;
    assert!(postselected_bound(&loose).unwrap() < post);

    // more ancilla error below 1/2 shrinks the majority weight, so the
    // postselected bound grows; the no-postselection bound ignores it
    let mut anc = base;
    anc.eta_a = 0.3;
    assert!(postselected_bound(&anc).unwrap() > post);
    assert_eq!(
        no_postselect_bound(&anc).unwrap(),
        no_postselect_bound(&base).unwrap()
    );
}

#[test]
fn eta_bar_is_the_majority_weight() {
    assert_eq!(params(2, 0.05, 0.1, 0.3).eta_bar_a(), 0.95);
    assert_eq!(params(2, 0.95, 0.1, 0.3).eta_bar_a(), 0.95);
    assert_eq!(params(2, 0.5, 0.1, 0.3).eta_bar_a(), 0.5);
    // the bound only sees eta_bar, so eta_a and 1 - eta_a give equal values
    let lo = postselected_bound(&params(3, 0.05, 0.3, 0.304)).unwrap();
    let hi = postselected_bound(&params(3, 0.95, 0.3, 0.304)).unwrap();
    assert_eq!(lo, hi);
}

#[test]
fn divergence_and_validation_errors() {
    assert_eq!(
        postselected_bound(&params(3, 0.05, 0.5, 0.3)),
        Err(BoundsError::NoSignal)
    );
    assert_eq!(
        no_postselect_bound(&params(3, 0.05, 0.5, 0.3)),
        Err(BoundsError::NoSignal)
    );

    let mut p = params(3, 0.05, 0.3, 0.3);
    p.delta_prime = 1.0 / 3.0;
    assert_eq!(postselected_bound(&p), Err(BoundsError::SlackExhausted));

    let mut p = params(3, 0.05, 0.3, 0.3);
    p.delta_prime = 0.4;
    assert!(matches!(
        postselected_bound(&p),
        Err(BoundsError::OutOfRange { name: "delta_prime", .. })
    ));

    assert!(matches!(
        postselected_bound(&params(3, 0.05, 0.3, 0.0)),
        Err(BoundsError::OutOfRange { name: "sigma", .. })
    ));
    assert!(matches!(
        postselected_bound(&params(3, 0.05, 0.3, f64::NAN)),
        Err(BoundsError::OutOfRange { name: "sigma", .. })
    ));
    assert!(matches!(
        postselected_bound(&params(3, -0.1, 0.3, 0.3)),
        Err(BoundsError::OutOfRange { name: "eta_a", .. })
    ));
    assert_eq!(
        postselected_bound(&params(0, 0.05, 0.3, 0.3)),
        Err(BoundsError::BadRegisterSize(0))
    );
    assert_eq!(
        postselected_bound(&params(7, 0.05, 0.3, 0.3)),
        Err(BoundsError::BadRegisterSize(7))
    );
}

#[test]
fn typicality_reference_value_and_clamp() {
    let (p, clamped) = typicality_probability(0.95, 1000, 0.1);
    assert!((p - 0.9157123129814473).abs() < 1e-15, "{p}");
    assert!(!clamped);

    // small N': raw bound is negative and gets clamped
    let (p, clamped) = typicality_probability(0.95, 10, 0.1);
    assert_eq!(p, 0.0);
    assert!(clamped);

    // delta' = 0 gives raw value -1, also clamped
    let (p, clamped) = typicality_probability(0.95, 1000, 0.0);
    assert_eq!(p, 0.0);
    assert!(clamped);

    // monotone in N' once positive
    let mut last = 0.0;
    for np in [200u64, 500, 1000, 5000, 20000] {
        let (p, _) = typicality_probability(0.9, np, 0.1);
        assert!(p >= last);
        last = p;
    }
    assert!(last > 0.999);
}

//! Cross-module workflows through the public API.

use fractal_core::analysis::{coarse_spectrum, lq_spectrum, CoarseOptions, LevelMode, Window};
use fractal_core::geometry::{dyadic_cantor_set, upper_box_dim_estimate, DigitalSet};
use fractal_core::ifs::{ifs_digital_set, IFSystem};
use fractal_core::measures::{blend, prop41_measure, spray_measure, AtomicMeasure};
use fractal_core::metric::fortet_mourier;
use fractal_core::net_measure::{net_measure_of, optimal_cover, CoverCertificate, NetMeasureQuery};
use fractal_core::prescribed::{build_prescribed_family, verify_family};

#[test]
fn cover_certificate_survives_text_and_replays_its_value() {
    let cantor = dyadic_cantor_set(10).unwrap();
    let query = NetMeasureQuery::new(&cantor, 0.5, 1).unwrap();
    let cert = optimal_cover(&query);
    let back = CoverCertificate::from_text(&cert.to_text(1, 10)).unwrap();
    assert_eq!(back.cubes, cert.cubes);
    assert_eq!(back.value, cert.value);
    assert!((back.replay(0.5) - net_measure_of(&cantor, 0.5, 1).unwrap()).abs() < 1e-12);
    // every cover cube meets the set and the cover contains it
    let covered = DigitalSet::new(1, 10, cantor.cubes().filter(|c| cert.cubes.iter().any(|b| b.contains(c)))).unwrap();
    assert_eq!(covered, cantor);
}

#[test]
fn family_members_feed_the_cover_measure() {
    let k = DigitalSet::full(1, 14).unwrap();
    let fam = build_prescribed_family(&k, &[0.4, 0.7], 10).unwrap();
    assert!(verify_family(&fam, &k).all_pass());
    assert!(fam.limit(0).is_subset(fam.limit(1)));
    let (mu, diag) = prop41_measure(&k, fam.limit(0), 0.9, 3).unwrap();
    assert!(mu.is_probability());
    assert_eq!(diag.levels.len(), 3);
    // atoms sit on K cube centers inside the target
    for (x, _) in mu.atoms() {
        assert!(fam.limit(0).contains_point(x));
    }
}

#[test]
fn rasterised_attractor_supports_a_spray_close_to_its_source() {
    let text = "m=2 dim=1 osc=true\n0.25 0\n0.25 0.75\n";
    let ifs = IFSystem::from_text(text).unwrap();
    let k = ifs_digital_set(&ifs, 16).unwrap();
    let est = upper_box_dim_estimate(&k, 4, 16).unwrap();
    assert!((est.slope - 0.5).abs() < 0.05, "{}", est.slope);

    let mu = AtomicMeasure::uniform(1, vec![k.centers().next().unwrap(), k.centers().last().unwrap()]).unwrap();
    let nu = spray_measure(&mu, &k, 0.2, 0.05, &[32]).unwrap();
    assert_eq!(nu.len(), 64);
    assert!(nu.points().iter().all(|x| k.contains_point(x)));
    let d = fortet_mourier(&mu, &nu).unwrap();
    assert!(d <= 0.05 + 1e-12, "{d}");
    // blending back toward the source only shrinks the distance
    let mixed = blend(&nu, &mu, 0.5).unwrap();
    assert!(fortet_mourier(&mu, &mixed).unwrap() <= d + 1e-12);
}

#[test]
fn measure_text_roundtrip_preserves_spectra() {
    let k = DigitalSet::full(1, 10).unwrap();
    let weights: Vec<(Vec<f64>, f64)> = k.centers().enumerate().map(|(i, x)| (x, 1.0 + (i % 3) as f64)).collect();
    let mu = AtomicMeasure::normalized(1, weights).unwrap();
    let back = AtomicMeasure::from_text(&mu.to_text()).unwrap();
    let qs = [0.0, 0.5, 2.0];
    let window = Window::new(2, 8).unwrap();
    // loading renormalises, which may move the last bit of a weight
    let (a, b) = (lq_spectrum(&mu, &qs, window).unwrap(), lq_spectrum(&back, &qs, window).unwrap());
    for (x, y) in a.fit.values.iter().chain(&a.lower.values).zip(b.fit.values.iter().chain(&b.lower.values)) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
    let opts = CoarseOptions {
        eps: 0.2,
        radius_window: window,
        box_window: Window::new(0, 8).unwrap(),
        mode: LevelMode::Fit,
    };
    let curve = coarse_spectrum(&back, &k, &[1.0], &opts).unwrap();
    assert!((curve.values[0] - 1.0).abs() < 0.05, "{:?}", curve.values);
}

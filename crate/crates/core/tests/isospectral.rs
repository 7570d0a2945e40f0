use spectral_corners::classifier::isospectral_compare;
use spectral_corners::fem::{fem_spectrum, FemOptions};
use spectral_corners::geometry::{area, perimeter};
use spectral_corners::verify::corpus_domain;

// λ₁ of the drums with legs 2 is 2.53794399980 (method of particular solutions);
// unit legs scale it by 4.
const LAMBDA1_UNIT_LEGS: f64 = 4.0 * 2.537_943_999_80;

#[test]
fn gww_drums_sound_the_same_but_differ_in_shape() {
    let (a, b) = (corpus_domain("gww-drum-a").unwrap(), corpus_domain("gww-drum-b").unwrap());
    assert!((area(&a).unwrap() - 3.5).abs() < 1e-12 && (area(&b).unwrap() - 3.5).abs() < 1e-12);
    assert!((perimeter(&a).unwrap() - perimeter(&b).unwrap()).abs() < 1e-12);
    assert_ne!(a.loops(), b.loops());

    let opts = FemOptions::new(0.01, 20);
    let (sa, sb) = (fem_spectrum(&a, &opts).unwrap().spectrum, fem_spectrum(&b, &opts).unwrap().spectrum);
    let c = isospectral_compare(&sa, &sb, 20, 1e-2).unwrap();
    assert!(c.isospectral, "{c:?}");
    assert!(c.max_deviation < 1e-5, "{c:?}");
    for s in [&sa, &sb] {
        assert!((s.first() / LAMBDA1_UNIT_LEGS - 1.0).abs() < 1e-4, "{}", s.first());
    }
    // A square of the same area is not.
    let square = spectral_corners::analytic_spectra::rectangle_spectrum(3.5f64.sqrt(), 3.5f64.sqrt(), 200.0).unwrap();
    assert!(!isospectral_compare(&sa, &square, 20, 1e-2).unwrap().isospectral);
}

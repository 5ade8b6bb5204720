use unc_lab_core::analysis::{
    alpha_grid, check_dominance, find_alpha_star, find_bound_crossing, sweep, Evaluator, Scale,
    Verdict,
};
use unc_lab_core::{CoefficientFamily, Error};

#[test]
fn exponential_reaches_every_epsilon() {
    let fam = CoefficientFamily::exponential();
    let ev = Evaluator::default();
    for eps in [0.5, 0.1, 0.01, 0.001] {
        let s = find_alpha_star(&fam, eps, None, &ev).unwrap();
        assert!(s.product < eps, "{s:?}");
        assert_eq!(ev.product(&fam, s.alpha).unwrap(), s.product);
    }
    let half = find_alpha_star(&fam, 0.5, None, &ev).unwrap();
    assert!(half.alpha > 1.29639 && half.alpha < 1.2975, "{half:?}");
}

#[test]
fn polynomial_never_reaches_one() {
    let fam = CoefficientFamily::polynomial();
    match find_alpha_star(&fam, 1.0, None, &Evaluator::default()) {
        Err(Error::NotAttainable { best_product, .. }) => assert!(best_product > 1.0),
        other => panic!("expected NotAttainable, got {other:?}"),
    }
    let grid = alpha_grid(1.6, 50.0, 40, Scale::Log).unwrap();
    for row in sweep(&fam, &grid, &Evaluator::default()).unwrap() {
        let row = row.unwrap();
        assert!(row.product >= 1.0, "{row:?}");
    }
}

#[test]
fn crossing_is_consistent() {
    let fam = CoefficientFamily::exponential();
    let ev = Evaluator::default();
    let c = find_bound_crossing(&fam, 0.5, &ev).unwrap();
    assert!((c.alpha - 1.29639).abs() < 5e-4);
    assert!((ev.product(&fam, c.alpha).unwrap() - 0.5).abs() < 1e-5);
    assert!(matches!(
        find_bound_crossing(&fam, 10.0, &ev),
        Err(Error::NoBracket { .. })
    ));
    assert!(matches!(
        find_bound_crossing(&CoefficientFamily::polynomial(), 0.5, &ev),
        Err(Error::NoBracket { .. })
    ));
}

// Dominance and attainability agree on the built-in families.
#[test]
fn dominance_matches_attainability() {
    let grid = alpha_grid(0.5, 20.0, 16, Scale::Log).unwrap();
    let e = check_dominance(&CoefficientFamily::exponential(), &grid, 8).unwrap();
    assert_eq!(e.verdict, Verdict::Dominant);
    assert_eq!(e.dominant_index, Some(0));
    let grid = alpha_grid(2.0, 50.0, 16, Scale::Log).unwrap();
    let p = check_dominance(&CoefficientFamily::polynomial(), &grid, 8).unwrap();
    assert_eq!(p.verdict, Verdict::NoUniqueDominant);
}

use std::f64::consts::{LN_2, PI};

use unc_lab_core::analysis::{alpha_grid, asymptotic_check, fit_powers, Evaluator, Regime, Scale};
use unc_lab_core::closed_forms::g_function;
use unc_lab_core::special::dilog;
use unc_lab_core::CoefficientFamily;

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

#[test]
fn g_leading_coefficients() {
    let xs = alpha_grid(1e-3, 5e-2, 24, Scale::Log).unwrap();
    let ys: Vec<f64> = xs.iter().map(|&a| g_function(a).unwrap()).collect();
    let c = fit_powers(&xs, &ys, &[1, 2, 3]).unwrap();
    assert!(rel(c[0], -4.0 * LN_2) < 0.01, "{c:?}");
    assert!(rel(c[1], 2.0) < 0.01, "{c:?}");
}

#[test]
fn dilog_leading_coefficients() {
    let xs = alpha_grid(1e-3, 5e-2, 24, Scale::Log).unwrap();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&a| dilog(-(-a).exp()).unwrap().value)
        .collect();
    let c = fit_powers(&xs, &ys, &[0, 1, 2, 3]).unwrap();
    assert!(rel(c[0], -PI * PI / 12.0) < 0.01, "{c:?}");
    assert!(rel(c[1], LN_2) < 0.01, "{c:?}");
    assert!(rel(c[2], -0.25) < 0.01, "{c:?}");
}

#[test]
fn asymptotic_reports_pass_with_both_engines() {
    let fam = CoefficientFamily::exponential();
    for ev in [Evaluator::default(), Evaluator::series()] {
        for regime in [Regime::SmallAlpha, Regime::LargeAlpha] {
            let r = asymptotic_check(&fam, regime, &ev).unwrap();
            assert!(r.pass, "{regime:?}: {r:#?}");
        }
    }
}

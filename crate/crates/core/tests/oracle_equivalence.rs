use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unc_lab_core::closed_forms::exp_closed;
use unc_lab_core::moments::uncertainty_report;
use unc_lab_core::oracle::{compare_report, quad_norm, quad_phi_moment, QuadOptions, RowStatus};
use unc_lab_core::{build_spectrum, BuildOptions, CoefficientFamily, TruncatedSpectrum};

fn random_spectrum(rng: &mut ChaCha8Rng) -> TruncatedSpectrum {
    let n = rng.gen_range(1..=8usize);
    let coeffs = (0..2 * n + 1)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    TruncatedSpectrum::from_coefficients(1.0, coeffs).unwrap()
}

#[test]
fn random_complex_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..20 {
        let s = random_spectrum(&mut rng);
        let r = compare_report(&s, 1e-8);
        assert!(r.all_pass, "spectrum {i}: {r:#?}");
        assert!(r.rows.iter().all(|row| row.status == RowStatus::Pass));
    }
}

#[test]
fn exponential_spectra() {
    let fam = CoefficientFamily::exponential();
    for a in [0.5, 1.0, 2.0] {
        let s = build_spectrum(&fam, a, &BuildOptions::default()).unwrap();
        let r = compare_report(&s, 1e-8);
        assert!(r.all_pass, "alpha {a}: {r:#?}");
    }
}

#[test]
fn polynomial_divergent_lz_is_not_applicable() {
    let s = TruncatedSpectrum::with_cutoff(&CoefficientFamily::polynomial(), 1.4, 64).unwrap();
    let r = compare_report(&s, 1e-8);
    let lz: Vec<_> = r
        .rows
        .iter()
        .filter(|row| row.quantity.contains("lz"))
        .collect();
    assert!(!lz.is_empty());
    assert!(lz.iter().any(|row| row.status == RowStatus::NotApplicable));
    assert!(
        r.rows.iter().all(|row| row.status != RowStatus::Fail),
        "{r:#?}"
    );
}

#[test]
fn normalization_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = QuadOptions::default();
    for _ in 0..10 {
        let s = random_spectrum(&mut rng);
        let q = quad_norm(&s, &opts).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
    }
}

// Tightening the build tolerance moves both the series and the oracle
// towards the closed form.
#[test]
fn errors_shrink_with_build_tolerance() {
    let fam = CoefficientFamily::exponential();
    let a = 0.5;
    let exact = exp_closed(a).unwrap();
    let opts = QuadOptions {
        abs_tol: 1e-13,
        ..Default::default()
    };
    let mut last = (f64::INFINITY, f64::INFINITY);
    for tol in [1e-4, 1e-8, 1e-12] {
        let s = build_spectrum(
            &fam,
            a,
            &BuildOptions {
                rel_tol: tol,
                ..Default::default()
            },
        )
        .unwrap();
        let series = (uncertainty_report(&s).unwrap().var_phi - exact.var_phi).abs();
        let quad = quad_phi_moment(&s, 2, &opts).unwrap().value;
        let quad = (quad - exact.var_phi).abs();
        assert!(
            series <= last.0 + 1e-12,
            "series error grew at {tol}: {series} > {}",
            last.0
        );
        assert!(
            quad <= last.1 + 1e-12,
            "oracle error grew at {tol}: {quad} > {}",
            last.1
        );
        last = (series, quad);
    }
    assert!(last.0 < 1e-10 && last.1 < 1e-10, "{last:?}");
}

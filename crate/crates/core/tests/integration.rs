mod common;

use common::*;
use meanlab_core::{
    derivative_check, eval_gini_closed, eval_gini_discrete, eval_holder, fd_diag, homogeneity_scan, Expr32,
    GiniParams, GiniParams32, Interval32, Mean, MeanFamily32, Measure32, Verdict,
};
use proptest::prelude::*;

#[test]
fn f32_smoke() {
    let interval = Interval32::new(0.5, 8.0).unwrap();
    let pair = GiniParams32::real(2.0, 1.0).generator_pair(interval).unwrap();
    let fam = MeanFamily32::projection(2).unwrap();
    let mu = Measure32::counting(2).unwrap();
    let mean = Mean::new(&pair, &fam, &mu).unwrap();
    let v = mean.eval(&[4.0, 2.0]).unwrap();
    assert!((v - 10.0 / 3.0).abs() < 1e-5, "{v}");
    let q = meanlab_core::eval_quasi_arithmetic(&Expr32::pow(2.0), &fam, &mu, &[3.0, 4.0]).unwrap();
    assert!((q - 12.5f32.sqrt()).abs() < 1e-5, "{q}");
}

#[test]
fn catalog_means_match_oracle_solver() {
    for c in catalog() {
        for fam_d in FAMILIES {
            for mu_d in fam_d.measures() {
                let (fam, mu) = (fam_d.build(), mu_d.build());
                let i = c.interval();
                let x: Vec<f64> = (0..fam_d.dim())
                    .map(|k| i.lo() + i.width() * (0.15 + 0.3 * k as f64))
                    .collect();
                let got = Mean::new(&c.pair, &fam, &mu).unwrap().eval(&x).unwrap();
                let want = oracle_mean(&c, fam_d, &mu_d, &x);
                assert!(rel(got, want) < 1e-12, "{} {fam_d:?} {mu_d:?}: {got} vs {want}", c.name);
            }
        }
    }
}

#[test]
fn library_fd_agrees_with_closed_forms() {
    let c = &catalog()[4];
    let (fam, mu) = (FamilyDesc::Bernstein3.build(), MeasureDesc::Uniform(16).build());
    for row in derivative_check(&c.pair, &fam, &mu, 1.7, 3).unwrap() {
        let tol = [1e-8, 1e-6, 5e-6][row.indices.len() - 1];
        assert!(row.deviation <= tol, "{row:?}");
    }
    // The stencil must stay inside I.
    assert!(fd_diag(&c.pair, &fam, &mu, 0.5005, &[0, 1, 2], None).is_err());
}

#[test]
fn gini_closed_form_reduces_to_discrete_sum() {
    let fam = MeanFamily32::projection(3).unwrap();
    let mu = Measure32::labels(&[0.2, 0.3, 0.5]).unwrap();
    let x = [1.2f32, 0.7, 2.2];
    for params in [GiniParams32::real(2.0, -1.0), GiniParams32::real(0.5, 0.5), GiniParams32::conjugate(0.5, 1.0).unwrap()] {
        let a = eval_gini_closed(&params, &fam, &mu, &x).unwrap().value;
        let b = eval_gini_discrete(&params, &x, Some(&[0.2, 0.3, 0.5])).unwrap();
        assert!((a - b).abs() < 1e-5, "{params:?}: {a} vs {b}");
    }
}

#[test]
fn non_homogeneous_scan_sees_a_gap() {
    let c = catalog().into_iter().find(|c| c.name == "(exp, 1)").unwrap();
    let (fam, mu) = (FamilyDesc::TwoPoint.build(), MeasureDesc::Atoms(vec![(0.0, 0.7), (1.0, 0.3)]).build());
    let scan = homogeneity_scan(&c.pair, &fam, &mu, 9, 16).unwrap();
    assert!(scan.max_abs > 1e-3, "{scan:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn holder_is_monotone_in_p(p in -3.0f64..3.0, dp in 0.05f64..2.0, a in 0.5f64..4.0, b in 0.5f64..4.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let fam = FamilyDesc::TwoPoint.build();
        let mu = MeasureDesc::Atoms(vec![(0.0, 0.4), (1.0, 0.6)]).build();
        let lo = eval_holder(p, &fam, &mu, &[a, b]).unwrap();
        let hi = eval_holder(p + dp, &fam, &mu, &[a, b]).unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn gini_means_are_homogeneous(p in -2.0f64..2.0, q in -2.0f64..2.0, lam in 0.5f64..2.0,
                                  x0 in 0.5f64..2.0, x1 in 0.5f64..2.0) {
        let params = GiniParams::real(p, q);
        let fam = FamilyDesc::TwoPoint.build();
        let mu = MeasureDesc::Atoms(vec![(0.2, 0.5), (0.9, 0.5)]).build();
        let m = eval_gini_closed(&params, &fam, &mu, &[x0, x1]).unwrap().value;
        let ml = eval_gini_closed(&params, &fam, &mu, &[lam * x0, lam * x1]).unwrap().value;
        prop_assert!(rel(ml, lam * m) < 1e-12);
    }

    #[test]
    fn a_pair_equals_itself(s in 0.05f64..0.45) {
        let interval = iv(0.5, 4.0);
        let a = GiniParams::real(2.0, 1.0).generator_pair(interval).unwrap();
        let fam = FamilyDesc::TwoPoint.build();
        let mu = MeasureDesc::Atoms(vec![(0.0, 1.0 - s), (1.0, s)]).build();
        let r = meanlab_core::decide_equality(&a, &a, &fam, &mu, &grid33(&interval)).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Equal);
    }
}

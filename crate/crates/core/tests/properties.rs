use std::f64::consts::PI;

use num_complex::Complex64;
use osc_spectra::clifford::gamma;
use osc_spectra::group::*;
use osc_spectra::lattice::{self, LatticeParams, SpinStructure};
use osc_spectra::reps::{casimir_value, pullback_label, IrrepLabel};
use osc_spectra::surd::Scalar;
use proptest::prelude::*;

fn osc() -> impl Strategy<Value = OscElement> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -PI..PI).prop_map(|(a, b, z, t)| OscElement::new(Complex64::new(a, b), z, t))
}

fn oscm() -> impl Strategy<Value = OscMElement> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -PI..PI).prop_map(|(x, y, z, t)| OscMElement::new(x, y, z, t))
}

fn lie() -> impl Strategy<Value = LieAlgebraElement> {
    prop::array::uniform4(-5.0..5.0f64).prop_map(LieAlgebraElement::from_array)
}

fn automorphism() -> impl Strategy<Value = Automorphism> {
    (0.3..3.0f64, -PI..PI, any::<bool>(), -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, th, refl, u, e1, e2)| {
        let (s, c) = th.sin_cos();
        let m = if refl {
            [[a * c, a * s], [a * s, -a * c]]
        } else {
            [[a * c, -a * s], [a * s, a * c]]
        };
        Automorphism::new(u, Complex64::new(e1, e2), m).unwrap()
    })
}

fn max_abs(v: LieAlgebraElement) -> f64 {
    v.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #[test]
    fn osc_law_is_associative(a in osc(), b in osc(), c in osc()) {
        prop_assert!(((a * b) * c).dist(&(a * (b * c))) < 1e-11);
    }

    #[test]
    fn oscm_law_is_associative(a in oscm(), b in oscm(), c in oscm()) {
        prop_assert!(((a * b) * c).dist(&(a * (b * c))) < 1e-11);
    }

    #[test]
    fn inverses(a in osc(), m in oscm()) {
        prop_assert!((a * a.inverse()).dist(&OscElement::new(Complex64::new(0.0, 0.0), 0.0, 0.0)) < 1e-12);
        prop_assert!((m * m.inverse()).dist(&OscMElement::new(0.0, 0.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn phi_is_a_homomorphism(a in osc(), b in osc()) {
        prop_assert!(phi_iso(a * b).dist(&(phi_iso(a) * phi_iso(b))) < 1e-11);
        prop_assert!(phi_iso_inverse(phi_iso(a)).dist(&a) < 1e-12);
    }

    #[test]
    fn automorphisms_are_homomorphisms(f in automorphism(), a in osc(), b in osc()) {
        let lhs = f.apply(a * b).unwrap();
        let rhs = f.apply(a).unwrap() * f.apply(b).unwrap();
        prop_assert!(lhs.dist(&rhs) < 1e-10);
    }

    #[test]
    fn bracket_is_antisymmetric_and_metric_invariant(u in lie(), v in lie(), w in lie()) {
        prop_assert!(max_abs(bracket(u, v).add(bracket(v, u))) < 1e-12);
        let s = metric(bracket(u, v), w) + metric(v, bracket(u, w));
        prop_assert!(s.abs() < 1e-10);
        let j = bracket(u, bracket(v, w)).add(bracket(v, bracket(w, u))).add(bracket(w, bracket(u, v)));
        prop_assert!(max_abs(j) < 1e-9);
    }

    #[test]
    fn gamma_is_linear(u in lie(), v in lie(), s in -3.0..3.0f64) {
        let lhs = gamma(u.scale(s).add(v)).0;
        let rhs = gamma(u).0 * faer::Scale(Complex64::new(s, 0.0)) + gamma(v).0;
        prop_assert!((&lhs - &rhs).norm_l2() < 1e-12);
    }

    #[test]
    fn pullback_preserves_casimir_under_conjugation(c in 0.1..3.0f64, d in -1.0..1.0f64, e1 in -2.0..2.0f64, e2 in -2.0..2.0f64) {
        let label = IrrepLabel::f(c, d).unwrap();
        let f = Automorphism::conjugation(Complex64::new(e1, e2));
        let moved = pullback_label(&f, &label).unwrap();
        prop_assert!((casimir_value(&moved) - casimir_value(&label)).abs() < 1e-9 * casimir_value(&label).abs().max(1.0));
    }

    #[test]
    fn norm_form_matches_matrix_form(p in -5i64..5, q in 1i64..6, s in 1i64..6, t in 1i64..6, k in -50i64..50, l in -50i64..50) {
        let mu = Scalar::from_rational((p as i128, q as i128).into());
        let nu = Scalar::from_rational((s as i128, t as i128).into());
        let lp = LatticeParams::new(1, 1, mu, nu).unwrap();
        let a = lattice::norm_form(&lp, k, l);
        let b = lattice::norm_form_matrix(&lp, k, l);
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn even_class_count_is_halved_count(p in -3i64..4, q in 1i64..4, k in -12i64..12, l in -12i64..12) {
        prop_assume!((k, l) != (0, 0));
        let lp = LatticeParams::new(1, 1, Scalar::from_rational((p as i128, q as i128).into()), Scalar::from_int(1)).unwrap();
        let a = 2.0 * lattice::norm_form(&lp, k, l);
        let full = lattice::alpha_counts(&lp, a, 0.0).unwrap();
        let half = lattice::alpha_counts(&lp, a / 2.0, 0.0).unwrap();
        prop_assert_eq!(full.alpha0, half.alpha);
    }

    #[test]
    fn spin_structures_round_trip(bits in prop::array::uniform4(0u8..2)) {
        let e = SpinStructure::new(bits).unwrap();
        prop_assert_eq!(e.to_string().parse::<SpinStructure>().unwrap(), e);
        prop_assert_eq!(e.validate(2).is_ok(), true);
        prop_assert_eq!(e.validate(1).is_ok(), bits[2] == 0);
    }
}

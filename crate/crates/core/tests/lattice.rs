use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::Ratio;
use osc_spectra::lattice::*;
use osc_spectra::surd::Scalar;

type Q = Ratio<i128>;

fn params(r: u32, kappa: u32, mu: &str, nu: &str) -> LatticeParams {
    LatticeParams::new(r, kappa, mu.parse().unwrap(), nu.parse().unwrap()).unwrap()
}

/// a^2 -> counts per parity class, from rational arithmetic on the defining formula.
fn brute_force(mu: Q, nu: Q, a2_max: i128, radius: i64) -> BTreeMap<Q, [u64; 4]> {
    let mut out: BTreeMap<Q, [u64; 4]> = BTreeMap::new();
    for k in -radius..=radius {
        for l in -radius * 4..=radius * 4 {
            if (k, l) == (0, 0) {
                continue;
            }
            let kq = Q::from_integer(k as i128);
            let lq = Q::from_integer(l as i128);
            let v = nu * kq * kq + (lq - mu * kq) * (lq - mu * kq) / nu;
            if v > Q::from_integer(a2_max) {
                continue;
            }
            let cls = match (k.rem_euclid(2), l.rem_euclid(2)) {
                (0, 0) => 0,
                (0, _) => 1,
                (_, 1) => 2,
                _ => 3,
            };
            out.entry(v).or_default()[cls] += 1;
        }
    }
    out
}

#[test]
fn counts_match_exhaustive_rational_enumeration() {
    let a2_max = 10_000i128;
    for (mu, nu) in [("0", "1"), ("1/2", "1"), ("0", "2"), ("1/3", "3/2")] {
        let l = params(1, 1, mu, nu);
        let (muq, nuq) = (l.mu.rational().unwrap(), l.nu.rational().unwrap());
        // nu k^2 <= 1e4 and |l - mu k| <= sqrt(nu 1e4) bound the box used below
        let radius = ((a2_max as f64) / nuq.to_integer().max(1) as f64 * 2.0).sqrt() as i64 + 2;
        let oracle = brute_force(muq, nuq, a2_max, radius);
        let (groups, approx) = norm_groups(&l, a2_max as f64).unwrap();
        assert!(!approx);
        assert_eq!(groups.len(), oracle.len(), "({mu},{nu})");
        for (g, (v, counts)) in groups.iter().zip(&oracle) {
            assert!((g.a2 - *v.numer() as f64 / *v.denom() as f64).abs() < 1e-9);
            let c = g.counts;
            assert_eq!([c.alpha0, c.alpha1, c.alpha2, c.odd_even], *counts, "a^2 = {v}");
            assert_eq!(c.alpha, counts.iter().sum::<u64>());
        }
        // alpha_counts on a sample of norms, exact and tolerance paths
        for (v, counts) in oracle.iter().step_by(97) {
            let a = (*v.numer() as f64 / *v.denom() as f64).sqrt();
            for tol in [0.0, 1e-9] {
                let c = alpha_counts(&l, a, tol).unwrap();
                assert_eq!([c.alpha0, c.alpha1, c.alpha2, c.odd_even], *counts);
            }
        }
    }
}

fn two_squares(n: u64) -> bool {
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if p % 4 == 3 && e % 2 == 1 {
            return false;
        }
        p += 1;
    }
    m % 4 != 3
}

#[test]
fn two_square_law() {
    let sets = spectral_sets(&params(1, 1, "0", "1"), 1e4 * PI * PI).unwrap();
    let members: Vec<u64> = sets.all.iter().map(|e| (e.value / (PI * PI)).round() as u64).collect();
    let expected: Vec<u64> = (1..=10_000).filter(|&n| two_squares(n)).collect();
    assert_eq!(members, expected);
}

#[test]
fn parity_identity() {
    for (mu, nu) in [("0", "1"), ("1/2", "1"), ("0", "2")] {
        let l = params(1, 1, mu, nu);
        let (groups, _) = norm_groups(&l, 400.0).unwrap();
        for g in groups.iter().filter(|g| g.counts.alpha0 > 0) {
            let a = g.a2.sqrt();
            assert_eq!(alpha_counts(&l, a, 0.0).unwrap().alpha0, alpha_counts(&l, a / 2.0, 0.0).unwrap().alpha);
        }
    }
}

#[test]
fn routes_agree_on_grid() {
    for r in 1..=3 {
        for kappa in 1..=3 {
            for (mu, nu) in [("0", "1"), ("1/2", "1"), ("0", "2")] {
                let l = params(r, kappa, mu, nu);
                for e in SpinStructure::all_valid(r) {
                    let cutoff = 100.0 * l.beta();
                    let s = casimir_spectrum_detailed(&l, &e, cutoff)
                        .unwrap_or_else(|err| panic!("r={r} kappa={kappa} ({mu},{nu}) eps={e}: {err}"));
                    assert!(!s.lines.is_empty());
                }
            }
        }
    }
}

#[test]
fn irrational_parameters_use_tolerance_grouping() {
    let l = params(1, 1, "sqrt2", "sqrt3");
    let s = casimir_spectrum_detailed(&l, &"0100".parse().unwrap(), 60.0).unwrap();
    assert!(s.grouped_by_tolerance);
}

#[test]
fn isometry_invariance() {
    // the (1,0) row would use the (odd, even) class of the original lattice
    for (mu, nu) in [("0", "1"), ("1/2", "1"), ("1/3", "2")] {
        for tail in ["00", "01", "10", "11"] {
            let r = if tail.starts_with('1') { 2 } else { 1 };
            let l = params(r, 1, mu, nu);
            let e: SpinStructure = format!("10{tail}").parse().unwrap();
            let cutoff = 80.0 * l.beta();
            let got = casimir_spectrum(&l, &e, cutoff).unwrap();
            let beta = l.beta();
            let on_beta = |v: f64| ((v / beta) - (v / beta).round()).abs() < 1e-9;
            let a_part: Vec<(f64, Multiplicity)> = got
                .iter()
                .filter(|x| !on_beta(x.eigenvalue.re))
                .map(|x| (x.eigenvalue.re, x.multiplicity))
                .collect();
            let mut want: Vec<(f64, Multiplicity)> = Vec::new();
            if tail.starts_with('0') {
                let (groups, _) = norm_groups(&l, cutoff / (PI * PI)).unwrap();
                for g in groups.iter().filter(|g| g.counts.odd_even > 0) {
                    want.push((PI * PI * g.a2, Multiplicity::Finite(4 * l.kappa as u64 * g.counts.odd_even)));
                }
            }
            assert_eq!(a_part.len(), want.len(), "({mu},{nu}) eps=10{tail}");
            for (x, y) in a_part.iter().zip(&want) {
                assert!((x.0 - y.0).abs() < 1e-9 * x.0);
                assert_eq!(x.1, y.1);
            }
            // the beta part is independent of (eps1, eps2) off the C row
            let other = casimir_spectrum(&l, &format!("01{tail}").parse().unwrap(), cutoff).unwrap();
            let bp = |v: &[SpectralLine]| {
                v.iter()
                    .filter(|x| on_beta(x.eigenvalue.re))
                    .map(|x| ((x.eigenvalue.re / beta).round() as i64, x.multiplicity))
                    .collect::<Vec<_>>()
            };
            assert_eq!(bp(&got), bp(&other));
        }
    }
}

#[test]
fn point_spectrum_squares_back() {
    for (r, kappa, e) in [(1, 1, "0000"), (2, 1, "0010"), (2, 3, "1111"), (3, 2, "0101")] {
        let l = params(r, kappa, "1/2", "1");
        let e: SpinStructure = e.parse().unwrap();
        let cutoff = 50.0 * l.beta();
        let omega = casimir_spectrum(&l, &e, cutoff).unwrap();
        let dirac = dirac_point_spectrum(&l, &e, 1.0 / 3.0, cutoff).unwrap();
        let mut squares: Vec<f64> = dirac.iter().map(|z| (z.eigenvalue * z.eigenvalue).re).collect();
        for z in &dirac {
            assert!(z.eigenvalue.re == 0.0 || z.eigenvalue.im == 0.0);
        }
        squares.sort_by(f64::total_cmp);
        squares.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * a.abs().max(1.0));
        let lams: Vec<f64> = omega.iter().map(|x| x.eigenvalue.re).collect();
        assert_eq!(squares.len(), lams.len());
        for (s, l) in squares.iter().zip(&lams) {
            assert!((s - l).abs() < 1e-9 * l.abs().max(1.0));
        }
        assert_ne!(negation_closure(&dirac), SymmetryClass::Asymmetric);
    }
}

#[test]
fn general_t_spectrum_shapes() {
    let l = params(2, 1, "0", "1");
    let e: SpinStructure = "0010".parse().unwrap();
    let beta = l.beta();
    for t in [0.0, 0.5, 1.0] {
        let lines = dirac_point_spectrum(&l, &e, t, 30.0 * beta).unwrap();
        assert!(!lines.is_empty());
        for x in &lines {
            // z^2 = beta m (q +- kappa (3t - 1)) with m, q odd
            let z2 = x.eigenvalue * x.eigenvalue;
            assert!(z2.im.abs() < 1e-9 * z2.norm().max(1.0));
        }
    }
    // t = 0: kappa (3t - 1) = -1 is an integer, so 0 is an infinite line
    let lines = dirac_point_spectrum(&l, &e, 0.0, 10.0 * beta).unwrap();
    let zero = lines.iter().find(|x| x.eigenvalue.norm() < 1e-12).unwrap();
    assert_eq!(zero.multiplicity, Multiplicity::Infinite);
}

#[test]
fn shifted_eigenvalues_agree_with_pulled_back_labels() {
    use osc_spectra::group::Automorphism;
    use osc_spectra::reps::{casimir_value, pullback_label, IrrepLabel};
    // -beta m (n + kappa - u m) is the Casimir of F(rm/2, n/(4 pi kappa) - u rm/2)
    let (r, kappa) = (2u32, 1u32);
    let l = params(r, kappa, "0", "1");
    let u_tilde: Scalar = "sqrt2".parse().unwrap();
    let u = u_tilde.value() / (2.0 * PI * kappa as f64 * r as f64);
    let shift = Automorphism::shift(-u);
    for (mp, np) in [(1i64, 1i64), (2, 3), (5, 7), (12, 17)] {
        let (m, n) = (2 * mp, 2 * np - kappa as i64);
        let base = IrrepLabel::f(r as f64 * m as f64 / 2.0, n as f64 / (4.0 * PI * kappa as f64)).unwrap();
        let moved = pullback_label(&shift, &base).unwrap();
        let want = casimir_value(&moved);
        let got = -4.0 * l.beta() * mp as f64 * (np as f64 - u_tilde.value() * mp as f64);
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

//! Explicit functions on Osc_1^M spanning summands of L^2 of the quotient: the characters
//! phi_n, the plane waves phi^k_{l,n} and the theta series theta_{m,n,k}, together with a
//! numerical check of how the deck generators gamma_1..gamma_4 act on them.
//!
//! Parameters are the doubled ones r' = 2r, kappa' = 2kappa of the rescaled lattice.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::Error;
use crate::group::{oscm_multiply, OscMElement};
use crate::linalg::{c, condition_number, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaParams {
    pub r_prime: u32,
    pub kappa_prime: u32,
    pub mu: f64,
    pub nu: f64,
}

impl ThetaParams {
    pub fn new(r_prime: u32, kappa_prime: u32, mu: f64, nu: f64) -> Result<Self, Error> {
        if r_prime == 0 || kappa_prime == 0 || !(nu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need r', kappa' >= 1 and nu > 0 (r'={r_prime}, kappa'={kappa_prime}, nu={nu})"
            )));
        }
        Ok(ThetaParams {
            r_prime,
            kappa_prime,
            mu,
            nu,
        })
    }

    pub fn from_lattice(l: &crate::lattice::LatticeParams) -> Result<Self, Error> {
        Self::new(2 * l.r, 2 * l.kappa, l.mu_f64(), l.nu_f64())
    }
}

/// theta_{m,n,k} with the j-sum cut at |j| <= j_max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaSection {
    pub m: i64,
    pub n: i64,
    /// Residue mod r'|m|, stored in 0..r'|m|.
    pub k: i64,
    pub j_max: usize,
}

/// Cut-off for |x| <= 2: Gaussian tail below about e^{-16 pi} relative to the peak.
pub fn default_truncation(p: &ThetaParams, m: i64) -> usize {
    let w = (p.r_prime as f64 * m.unsigned_abs() as f64).sqrt();
    ((2.0 + 4.0 / w) / p.nu.sqrt()).ceil() as usize + 4
}

impl ThetaSection {
    pub fn new(p: &ThetaParams, m: i64, n: i64, k: i64) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::NonConvergent("theta series needs m != 0".into()));
        }
        let period = p.r_prime as i64 * m.abs();
        Ok(ThetaSection {
            m,
            n,
            k: k.rem_euclid(period),
            j_max: default_truncation(p, m),
        })
    }

    pub fn with_truncation(self, j_max: usize) -> Self {
        ThetaSection { j_max, ..self }
    }

    pub fn period(&self, p: &ThetaParams) -> i64 {
        p.r_prime as i64 * self.m.abs()
    }
}

pub fn eval_theta(s: &ThetaSection, g: OscMElement, p: &ThetaParams) -> Result<Complex64, Error> {
    if s.m == 0 {
        return Err(Error::NonConvergent("theta series needs m != 0".into()));
    }
    let rp = p.r_prime as f64;
    let mf = s.m as f64;
    let sn = p.nu.sqrt();
    let offset = s.k as f64 / (rp * mf);
    let jm = s.j_max as f64;
    let lo = (-jm - offset).ceil() as i64;
    let hi = (jm - offset).floor() as i64;
    let mut sum = c(0.0, 0.0);
    for i in lo..=hi {
        let j = offset + i as f64;
        let gauss = (-PI * rp * mf.abs() * (g.x + j * sn).powi(2)).exp();
        let phase = PI * rp * j * mf * (j * p.mu + 2.0 * sn * g.y);
        sum += Complex64::from_polar(gauss, phase);
    }
    let pre = 2.0 * PI * rp * mf * g.z + s.n as f64 * g.t / p.kappa_prime as f64;
    Ok(sum * Complex64::from_polar(1.0, pre))
}

/// phi_n(t) = e^{2 pi i d t} with d = n / (2 pi kappa').
pub fn eval_phi(n: i64, g: OscMElement, p: &ThetaParams) -> Complex64 {
    Complex64::from_polar(1.0, n as f64 * g.t / p.kappa_prime as f64)
}

/// phi^k_{l,n} = exp(2 pi i (x, y) T^{-1} (l, k)^T) phi_n(t).
pub fn eval_phi_kl(l: i64, k: i64, n: i64, g: OscMElement, p: &ThetaParams) -> Complex64 {
    let sn = p.nu.sqrt();
    let (lf, kf) = (l as f64, k as f64);
    let arg = 2.0 * PI * (g.x * (lf - p.mu * kf) / sn + g.y * sn * kf);
    Complex64::from_polar(1.0, arg) * eval_phi(n, g, p)
}

/// Images of the lattice generators l_1..l_4 in Osc_1^M.
pub fn deck_generators(p: &ThetaParams) -> [OscMElement; 4] {
    let sn = p.nu.sqrt();
    [
        OscMElement::heis(0.0, 1.0 / (2.0 * sn), 0.0),
        OscMElement::heis(-sn / 2.0, -p.mu / (2.0 * sn), p.mu / 8.0),
        OscMElement::heis(0.0, 0.0, 1.0 / (2.0 * p.r_prime as f64)),
        OscMElement::rot(PI * p.kappa_prime as f64),
    ]
}

/// (gamma^* f)(g) = f(gamma g).
pub fn pullback<F: Fn(OscMElement) -> Complex64>(f: F, gamma: OscMElement, g: OscMElement) -> Complex64 {
    f(oscm_multiply(gamma, g))
}

fn sign(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeckCheck {
    pub family: &'static str,
    pub generator: usize,
    pub max_residual: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeckReport {
    pub params: ThetaParams,
    pub checks: Vec<DeckCheck>,
    pub series_stability: f64,
    pub max_condition: f64,
    pub tol: f64,
    pub passed: bool,
}

impl DeckReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

/// Uniform points with |x|, |y| <= 2, |z| <= 1, |t| <= 2 pi.
pub fn sample_points(count: usize, seed: u64) -> Vec<OscMElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            OscMElement::new(
                rng.gen_range(-2.0..=2.0),
                rng.gen_range(-2.0..=2.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-2.0 * PI..=2.0 * PI),
            )
        })
        .collect()
}

pub const THETA_M: [i64; 4] = [-2, -1, 1, 2];
const PHI_N: [i64; 5] = [-3, -1, 0, 1, 2];
const PLANE_LK: [(i64, i64); 5] = [(0, 1), (1, 0), (1, 1), (2, -3), (-1, 2)];
const THETA_N: [i64; 2] = [0, 1];

fn max_over<F: Fn(OscMElement) -> f64 + Sync>(points: &[OscMElement], f: F) -> f64 {
    points.par_iter().map(|&g| f(g)).reduce(|| 0.0, f64::max)
}

/// Checks every deck identity on the sample points; residuals are absolute.
///
/// Expected factors: phi_n picks up (-1)^n under gamma_4 only; phi^k_{l,n} picks up
/// (-1)^k, (-1)^l, 1, (-1)^n; theta_{m,n,k} picks up (-1)^k under gamma_1, moves to
/// k + r'|m|/2 under gamma_2, and picks up (-1)^m, (-1)^n under gamma_3, gamma_4.
pub fn verify_deck_actions(p: &ThetaParams, points: &[OscMElement], tol: f64) -> Result<DeckReport, Error> {
    if p.kappa_prime % 2 != 0 {
        return Err(Error::InvalidArgument("deck identities need even kappa'".into()));
    }
    let gens = deck_generators(p);
    let mut checks = Vec::new();

    for (gi, &gamma) in gens.iter().enumerate() {
        let res = max_over(points, |g| {
            PHI_N
                .iter()
                .map(|&n| {
                    let f = if gi == 3 { sign(n) } else { 1.0 };
                    (pullback(|h| eval_phi(n, h, p), gamma, g) - f * eval_phi(n, g, p)).norm()
                })
                .fold(0.0, f64::max)
        });
        checks.push(DeckCheck {
            family: "phi",
            generator: gi + 1,
            max_residual: res,
            evaluations: points.len() * PHI_N.len(),
        });
    }

    for (gi, &gamma) in gens.iter().enumerate() {
        let res = max_over(points, |g| {
            let mut worst: f64 = 0.0;
            for &(l, k) in &PLANE_LK {
                for n in [0, 1, -2] {
                    let f = match gi {
                        0 => sign(k),
                        1 => sign(l),
                        2 => 1.0,
                        _ => sign(n),
                    };
                    let lhs = pullback(|h| eval_phi_kl(l, k, n, h, p), gamma, g);
                    worst = worst.max((lhs - f * eval_phi_kl(l, k, n, g, p)).norm());
                }
            }
            worst
        });
        checks.push(DeckCheck {
            family: "phi_kl",
            generator: gi + 1,
            max_residual: res,
            evaluations: points.len() * PLANE_LK.len() * 3,
        });
    }

    let mut sections = Vec::new();
    for &m in &THETA_M {
        for &n in &THETA_N {
            let period = p.r_prime as i64 * m.abs();
            for k in 0..period {
                sections.push(ThetaSection::new(p, m, n, k)?);
            }
        }
    }
    for (gi, &gamma) in gens.iter().enumerate() {
        let res = max_over(points, |g| {
            let mut worst: f64 = 0.0;
            for s in &sections {
                let lhs = pullback(|h| eval_theta(s, h, p).unwrap(), gamma, g);
                let rhs = match gi {
                    0 => sign(s.k) * eval_theta(s, g, p).unwrap(),
                    1 => {
                        let moved = ThetaSection::new(p, s.m, s.n, s.k + s.period(p) / 2).unwrap();
                        eval_theta(&moved, g, p).unwrap()
                    }
                    2 => sign(s.m) * eval_theta(s, g, p).unwrap(),
                    _ => sign(s.n) * eval_theta(s, g, p).unwrap(),
                };
                worst = worst.max((lhs - rhs).norm());
            }
            worst
        });
        checks.push(DeckCheck {
            family: "theta",
            generator: gi + 1,
            max_residual: res,
            evaluations: points.len() * sections.len(),
        });
    }

    let series_stability = max_over(points, |g| {
        sections
            .iter()
            .map(|s| {
                let a = eval_theta(s, g, p).unwrap();
                let b = eval_theta(&s.with_truncation(2 * s.j_max), g, p).unwrap();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    });

    let mut max_condition: f64 = 0.0;
    for &m in &THETA_M {
        for &n in &THETA_N {
            max_condition = max_condition.max(independence_condition(p, m, n, 0x5eed ^ (m as u64) ^ ((n as u64) << 8))?);
        }
    }

    let passed = checks.iter().all(|c| c.max_residual < tol) && series_stability < 1e-10 && max_condition < 1e10;
    Ok(DeckReport {
        params: *p,
        checks,
        series_stability,
        max_condition,
        tol,
        passed,
    })
}

/// Condition number of [theta_{m,n,k}(p_i)] over r'|m| sample points and all k.
pub fn independence_condition(p: &ThetaParams, m: i64, n: i64, seed: u64) -> Result<f64, Error> {
    let period = p.r_prime as i64 * m.abs();
    let pts = sample_points(period as usize, seed);
    let secs: Vec<ThetaSection> = (0..period).map(|k| ThetaSection::new(p, m, n, k)).collect::<Result<_, _>>()?;
    let mut a = CMat::zeros(pts.len(), secs.len());
    for (i, g) in pts.iter().enumerate() {
        for (k, s) in secs.iter().enumerate() {
            a[(i, k)] = eval_theta(s, *g, p)?;
        }
    }
    Ok(condition_number(a.as_ref()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ThetaParams {
        ThetaParams::new(2, 2, 0.0, 1.0).unwrap()
    }

    #[test]
    fn value_at_origin_is_positive_theta() {
        let p = unit();
        let s = ThetaSection::new(&p, 1, 0, 0).unwrap();
        let v = eval_theta(&s, OscMElement::IDENTITY, &p).unwrap();
        // sum over integers j of e^{-2 pi j^2}
        let want: f64 = (-20..=20i32).map(|j| (-2.0 * PI * (j * j) as f64).exp()).sum();
        assert!(v.im.abs() < 1e-15);
        assert!((v.re - want).abs() < 1e-14);
    }

    #[test]
    fn z_periodicity_and_gamma3() {
        let p = ThetaParams::new(4, 2, 0.5, 1.0).unwrap();
        let g = OscMElement::new(0.3, -0.7, 0.2, 1.1);
        for m in [-2, 1, 3] {
            let s = ThetaSection::new(&p, m, 1, 1).unwrap();
            let shift = |dz: f64| eval_theta(&s, OscMElement::new(g.x, g.y, g.z + dz, g.t), &p).unwrap();
            let base = shift(0.0);
            assert!((shift(1.0 / (4.0 * m as f64)) - base).norm() < 1e-12);
            assert!((shift(1.0 / 8.0) - sign(m) * base).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_m_is_rejected() {
        assert!(ThetaSection::new(&unit(), 0, 1, 0).is_err());
    }

    #[test]
    fn single_grid_point_passes() {
        let p = unit();
        let r = verify_deck_actions(&p, &sample_points(8, 1), 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn wrong_factor_is_detected() {
        // gamma_2 does not fix theta_{m,n,k}: the shift by r'|m|/2 is essential
        let p = unit();
        let s = ThetaSection::new(&p, 1, 0, 0).unwrap();
        let g = OscMElement::new(0.1, 0.2, 0.0, 0.0);
        let gam = deck_generators(&p)[1];
        let lhs = pullback(|h| eval_theta(&s, h, &p).unwrap(), gam, g);
        assert!((lhs - eval_theta(&s, g, &p).unwrap()).norm() > 1e-3);
    }
}

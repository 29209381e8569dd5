//! Oscillator group arithmetic.
//!
//! Two models of the same group: `Osc` as H x R with H = C x R (Heisenberg part
//! written as (xi, z)), and `OscM` as H(1) x| R with upper-triangular Heisenberg
//! coordinates M(x, y, z). [`phi_iso`] maps the first model onto the second.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use crate::error::Error;

/// Symplectic form on C = R^2.
#[inline]
pub fn omega(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

#[inline]
fn expi(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscElement {
    pub xi: Complex64,
    pub z: f64,
    pub t: f64,
}

impl OscElement {
    pub const IDENTITY: Self = Self {
        xi: Complex64::new(0.0, 0.0),
        z: 0.0,
        t: 0.0,
    };

    pub fn new(xi: Complex64, z: f64, t: f64) -> Self {
        Self { xi, z, t }
    }

    pub fn inverse(&self) -> Self {
        Self::new(-expi(-self.t) * self.xi, -self.z, -self.t)
    }

    /// Max componentwise distance, used by tolerance checks.
    pub fn dist(&self, o: &Self) -> f64 {
        (self.xi - o.xi)
            .norm()
            .max((self.z - o.z).abs())
            .max((self.t - o.t).abs())
    }
}

pub fn osc_multiply(a: OscElement, b: OscElement) -> OscElement {
    let rot = expi(a.t) * b.xi;
    OscElement {
        xi: a.xi + rot,
        z: a.z + b.z + 0.5 * omega(a.xi, rot),
        t: a.t + b.t,
    }
}

impl Mul for OscElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        osc_multiply(self, rhs)
    }
}

/// M(x, y, z)(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscMElement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl OscMElement {
    pub const IDENTITY: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        t: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { x, y, z, t }
    }

    /// Pure Heisenberg element M(x, y, z)(0).
    pub fn heis(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, 0.0)
    }

    /// Pure rotation (t).
    pub fn rot(t: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, t)
    }

    pub fn inverse(&self) -> Self {
        let (x, y, z) = rotate_heis(-self.t, -self.x, -self.y, -self.z + self.x * self.y);
        Self::new(x, y, z, -self.t)
    }

    pub fn dist(&self, o: &Self) -> f64 {
        (self.x - o.x)
            .abs()
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
            .max((self.t - o.t).abs())
    }
}

/// The action l(t) on H(1).
fn rotate_heis(t: f64, x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let (s, c) = t.sin_cos();
    let (s2, c2) = (2.0 * t).sin_cos();
    (
        x * c - y * s,
        x * s + y * c,
        z + 0.5 * x * y * (c2 - 1.0) + 0.25 * (x * x - y * y) * s2,
    )
}

pub fn oscm_multiply(a: OscMElement, b: OscMElement) -> OscMElement {
    let (x, y, z) = rotate_heis(a.t, b.x, b.y, b.z);
    OscMElement {
        x: a.x + x,
        y: a.y + y,
        z: a.z + z + a.x * y,
        t: a.t + b.t,
    }
}

impl Mul for OscMElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        oscm_multiply(self, rhs)
    }
}

pub fn phi_iso(a: OscElement) -> OscMElement {
    let (x, y) = (a.xi.re, a.xi.im);
    OscMElement::new(-y, x, a.z - 0.5 * x * y, a.t)
}

pub fn phi_iso_inverse(m: OscMElement) -> OscElement {
    let (x, y) = (m.y, -m.x);
    OscElement::new(Complex64::new(x, y), m.z + 0.5 * x * y, m.t)
}

/// F = T_u o C_eta o F_S. `s` is row-major and acts on xi = (re, im).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Automorphism {
    pub u: f64,
    pub eta: Complex64,
    pub s: [[f64; 2]; 2],
}

impl Automorphism {
    pub const IDENTITY_S: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

    pub fn new(u: f64, eta: Complex64, s: [[f64; 2]; 2]) -> Result<Self, Error> {
        let a = Self { u, eta, s };
        a.epsilon()?;
        Ok(a)
    }

    pub fn shift(u: f64) -> Self {
        Self {
            u,
            eta: Complex64::new(0.0, 0.0),
            s: Self::IDENTITY_S,
        }
    }

    pub fn conjugation(eta: Complex64) -> Self {
        Self {
            u: 0.0,
            eta,
            s: Self::IDENTITY_S,
        }
    }

    pub fn linear(s: [[f64; 2]; 2]) -> Result<Self, Error> {
        Self::new(0.0, Complex64::new(0.0, 0.0), s)
    }

    pub fn det_s(&self) -> f64 {
        self.s[0][0] * self.s[1][1] - self.s[0][1] * self.s[1][0]
    }

    /// +1 if S is complex linear, -1 if antilinear; error otherwise.
    pub fn epsilon(&self) -> Result<i32, Error> {
        let [[a, b], [c, d]] = self.s;
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        let tol = 1e-12 * scale.max(1.0);
        if self.det_s().abs() <= tol * scale {
            return Err(Error::MalformedAutomorphism("S is singular".into()));
        }
        // SJ = JS  <=>  S = [[a, -c], [c, a]];  SJ = -JS  <=>  S = [[a, c], [c, -a]]
        if (a - d).abs() <= tol && (b + c).abs() <= tol {
            Ok(1)
        } else if (a + d).abs() <= tol && (b - c).abs() <= tol {
            Ok(-1)
        } else {
            Err(Error::MalformedAutomorphism(
                "S is neither complex linear nor antilinear".into(),
            ))
        }
    }

    fn apply_s(&self, xi: Complex64) -> Complex64 {
        let [[a, b], [c, d]] = self.s;
        Complex64::new(a * xi.re + b * xi.im, c * xi.re + d * xi.im)
    }

    pub fn apply(&self, g: OscElement) -> Result<OscElement, Error> {
        let eps = self.epsilon()? as f64;
        let g = OscElement::new(self.apply_s(g.xi), self.det_s() * g.z, eps * g.t);
        let g = conjugate_by(self.eta, g);
        Ok(OscElement::new(g.xi, g.z + self.u * g.t, g.t))
    }
}

/// C_eta in closed form.
pub fn conjugate_by(eta: Complex64, g: OscElement) -> OscElement {
    let e = expi(g.t) * eta;
    OscElement::new(
        g.xi + eta - e,
        g.z + 0.5 * omega(eta + g.xi, g.xi - e),
        g.t,
    )
}

pub fn apply_automorphism(f: &Automorphism, a: OscElement) -> Result<OscElement, Error> {
    f.apply(a)
}

/// Coefficients in the basis Z, X, Y, T.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LieAlgebraElement {
    pub z: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl LieAlgebraElement {
    pub const Z: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const X: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const Y: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const T: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(z: f64, x: f64, y: f64, t: f64) -> Self {
        Self { z, x, y, t }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.z, self.x, self.y, self.t]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn scale(self, s: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * s))
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.z + o.z, self.x + o.x, self.y + o.y, self.t + o.t)
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.scale(-1.0))
    }

    /// Unit vector (Z - T)/sqrt 2, the timelike direction used for the definite spinor product.
    pub fn xi() -> Self {
        Self::new(FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2)
    }
}

/// e_1..e_4 = Z, X, Y, T.
pub const BASIS: [LieAlgebraElement; 4] = [
    LieAlgebraElement::Z,
    LieAlgebraElement::X,
    LieAlgebraElement::Y,
    LieAlgebraElement::T,
];

/// Metric duals e^1..e^4 = T, X, Y, Z.
pub const DUAL_BASIS: [LieAlgebraElement; 4] = [
    LieAlgebraElement::T,
    LieAlgebraElement::X,
    LieAlgebraElement::Y,
    LieAlgebraElement::Z,
];

/// Complex coefficients (z, x, y, t) of N+ = X + iY and N- = X - iY.
pub fn n_plus() -> [Complex64; 4] {
    let o = Complex64::new(0.0, 0.0);
    [o, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), o]
}

pub fn n_minus() -> [Complex64; 4] {
    let o = Complex64::new(0.0, 0.0);
    [o, Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), o]
}

pub fn bracket(v: LieAlgebraElement, w: LieAlgebraElement) -> LieAlgebraElement {
    LieAlgebraElement {
        z: v.x * w.y - v.y * w.x,
        x: -v.t * w.y + v.y * w.t,
        y: v.t * w.x - v.x * w.t,
        t: 0.0,
    }
}

pub fn metric(v: LieAlgebraElement, w: LieAlgebraElement) -> f64 {
    v.x * w.x + v.y * w.y + v.z * w.t + v.t * w.z
}

/// The central element X^2 + Y^2 + 2ZT written as sum_a e_a e^a.
pub fn casimir_terms() -> [(LieAlgebraElement, LieAlgebraElement); 4] {
    [0, 1, 2, 3].map(|a| (BASIS[a], DUAL_BASIS[a]))
}

//! Spinor module Delta = C^4 and Clifford multiplication.
//!
//! Convention: v.w + w.v = -2 <v, w> Id.

use faer::MatRef;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

use crate::group::{metric, LieAlgebraElement};
use crate::linalg::{c, from_rows, scale, CMat, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor(pub [Complex64; 4]);

impl Spinor {
    /// u_1 .. u_4 (zero-based index).
    pub fn basis(i: usize) -> Self {
        let mut v = [ZERO; 4];
        v[i] = ONE;
        Spinor(v)
    }

    pub fn apply(&self, g: &CliffordElement) -> Self {
        let m = &g.0;
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| m[(i, j)] * self.0[j]).sum();
        }
        Spinor(out)
    }
}

#[derive(Clone, Debug)]
pub struct CliffordElement(pub CMat);

impl CliffordElement {
    pub fn as_ref(&self) -> MatRef<'_, Complex64> {
        self.0.as_ref()
    }

    pub fn mul(&self, o: &Self) -> Self {
        CliffordElement(&self.0 * &o.0)
    }
}

fn blocks(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2], cc: [[Complex64; 2]; 2], d: [[Complex64; 2]; 2]) -> CMat {
    from_rows([
        [a[0][0], a[0][1], b[0][0], b[0][1]],
        [a[1][0], a[1][1], b[1][0], b[1][1]],
        [cc[0][0], cc[0][1], d[0][0], d[0][1]],
        [cc[1][0], cc[1][1], d[1][0], d[1][1]],
    ])
}

const O2: [[Complex64; 2]; 2] = [[ZERO, ZERO], [ZERO, ZERO]];

fn mat_a() -> [[Complex64; 2]; 2] {
    [[ZERO, ZERO], [c(SQRT_2, 0.0), ZERO]]
}

fn mat_b() -> [[Complex64; 2]; 2] {
    [[ZERO, c(-SQRT_2, 0.0)], [ZERO, ZERO]]
}

fn mat_c() -> [[Complex64; 2]; 2] {
    [[-I, ZERO], [ZERO, I]]
}

fn scale2(m: [[Complex64; 2]; 2], s: Complex64) -> [[Complex64; 2]; 2] {
    m.map(|r| r.map(|v| v * s))
}

pub fn gamma_z() -> CMat {
    blocks(mat_a(), O2, O2, mat_a())
}

pub fn gamma_t() -> CMat {
    blocks(mat_b(), O2, O2, mat_b())
}

pub fn gamma_x() -> CMat {
    blocks(O2, mat_c(), mat_c(), O2)
}

pub fn gamma_y() -> CMat {
    blocks(O2, scale2(mat_c(), I), scale2(mat_c(), -I), O2)
}

pub fn gamma(v: LieAlgebraElement) -> CliffordElement {
    let m = scale(gamma_z().as_ref(), c(v.z, 0.0))
        + scale(gamma_x().as_ref(), c(v.x, 0.0))
        + scale(gamma_y().as_ref(), c(v.y, 0.0))
        + scale(gamma_t().as_ref(), c(v.t, 0.0));
    CliffordElement(m)
}

/// X.Y.Z = i diag(A, -A).
pub fn cubic_element() -> CliffordElement {
    CliffordElement(blocks(
        scale2(mat_a(), I),
        O2,
        O2,
        scale2(mat_a(), -I),
    ))
}

/// diag(A, -A); the t-dependent correction of D^t is (i/2)(3t-1) Id (x) this.
pub fn cubic_direction() -> CMat {
    blocks(mat_a(), O2, O2, scale2(mat_a(), c(-1.0, 0.0)))
}

/// Gram matrix of the indefinite product: <u1,u2> = <u3,u4> = 1.
pub fn indefinite_gram() -> CMat {
    blocks(
        [[ZERO, ONE], [ONE, ZERO]],
        O2,
        O2,
        [[ZERO, ONE], [ONE, ZERO]],
    )
}

fn form(g: MatRef<'_, Complex64>, u: &Spinor, v: &Spinor) -> Complex64 {
    let mut s = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            s += u.0[i].conj() * g[(i, j)] * v.0[j];
        }
    }
    s
}

/// Conjugate-linear in the first slot.
pub fn indefinite_ip(u: &Spinor, v: &Spinor) -> Complex64 {
    form(indefinite_gram().as_ref(), u, v)
}

/// (u, v) = <u, xi.v> with xi = (Z - T)/sqrt 2.
pub fn definite_ip(u: &Spinor, v: &Spinor) -> Complex64 {
    indefinite_ip(u, &v.apply(&gamma(LieAlgebraElement::xi())))
}

/// Fundamental symmetry J = gamma(xi).
pub fn fundamental_symmetry() -> CliffordElement {
    gamma(LieAlgebraElement::xi())
}

/// Largest deviation from v.w + w.v = -2<v,w> over all basis pairs.
pub fn clifford_relation_residual() -> f64 {
    let mut worst: f64 = 0.0;
    for v in crate::group::BASIS {
        for w in crate::group::BASIS {
            let (gv, gw) = (gamma(v).0, gamma(w).0);
            let lhs = &gv * &gw + &gw * &gv;
            let g = -2.0 * metric(v, w);
            for i in 0..4 {
                for j in 0..4 {
                    let rhs = if i == j { c(g, 0.0) } else { ZERO };
                    worst = worst.max((lhs[(i, j)] - rhs).norm());
                }
            }
        }
    }
    worst
}

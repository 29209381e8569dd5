//! Truncated matrix models of the irreducible unitary representations.
//!
//! Basis conventions:
//! - `C(d)`: one vector.
//! - `S(a, tau)`: Fourier modes phi_n, n in -N..=N, stored at index n + N.
//! - `F(c, d)`: Fock levels psi_0..psi_N.
//!
//! Ladder operators are N+ = sigma(X + iY), N- = sigma(X - iY). For F with c > 0,
//! N+ raises the level; for c < 0 the roles are swapped.

use faer::MatRef;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::Error;
use crate::group::{Automorphism, LieAlgebraElement};
use crate::linalg::{c, commutator, diag, restrict, scale, zeros, CMat, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum IrrepLabel {
    C { d: f64 },
    S { a: f64, tau: f64 },
    F { c: f64, d: f64 },
}

fn reduce_mod1(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl IrrepLabel {
    pub fn c(d: f64) -> Self {
        IrrepLabel::C { d }
    }

    pub fn s(a: f64, tau: f64) -> Result<Self, Error> {
        if !(a > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidLabel(format!("S needs a > 0, got a = {a}")));
        }
        Ok(IrrepLabel::S {
            a,
            tau: reduce_mod1(tau),
        })
    }

    pub fn f(c: f64, d: f64) -> Result<Self, Error> {
        if c == 0.0 || !c.is_finite() || !d.is_finite() {
            return Err(Error::InvalidLabel(format!("F needs c != 0, got c = {c}")));
        }
        Ok(IrrepLabel::F { c, d })
    }

    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            IrrepLabel::C { d } if d.is_finite() => Ok(()),
            IrrepLabel::C { .. } => Err(Error::InvalidLabel("C needs finite d".into())),
            IrrepLabel::S { a, tau } => Self::s(a, tau).map(|_| ()),
            IrrepLabel::F { c, d } => Self::f(c, d).map(|_| ()),
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::C { d } => write!(f, "C(d={d:.6})"),
            IrrepLabel::S { a, tau } => write!(f, "S(a={a:.6},tau={tau:.6})"),
            IrrepLabel::F { c, d } => write!(f, "F(c={c:.6},d={d:.6})"),
        }
    }
}

/// Scalar by which the Casimir X^2 + Y^2 + 2ZT acts.
pub fn casimir_value(label: &IrrepLabel) -> f64 {
    match *label {
        IrrepLabel::C { .. } => 0.0,
        IrrepLabel::S { a, .. } => -4.0 * PI * PI * a * a,
        IrrepLabel::F { c, d } if c > 0.0 => -2.0 * PI * c * (4.0 * PI * d + 1.0),
        IrrepLabel::F { c, d } => -2.0 * PI * c * (4.0 * PI * d - 1.0),
    }
}

#[derive(Clone, Debug)]
pub struct RepTruncation {
    pub label: IrrepLabel,
    /// Truncation order N.
    pub order: usize,
    pub dim: usize,
    /// Index of mode 0 (N for S, 0 otherwise).
    pub basis_offset: usize,
    pub z: CMat,
    pub t: CMat,
    pub n_plus: CMat,
    pub n_minus: CMat,
}

pub fn build_truncation(label: IrrepLabel, order: usize) -> Result<RepTruncation, Error> {
    label.validate()?;
    if order < 2 {
        return Err(Error::TruncationTooSmall(order, 2));
    }
    Ok(match label {
        IrrepLabel::C { d } => {
            let mut t = zeros(1, 1);
            t[(0, 0)] = c(0.0, 2.0 * PI * d);
            RepTruncation {
                label,
                order,
                dim: 1,
                basis_offset: 0,
                z: zeros(1, 1),
                t,
                n_plus: zeros(1, 1),
                n_minus: zeros(1, 1),
            }
        }
        IrrepLabel::S { a, tau } => {
            let dim = 2 * order + 1;
            let hop = c(0.0, 2.0 * PI * a);
            let mut np = zeros(dim, dim);
            let mut nm = zeros(dim, dim);
            for i in 0..dim - 1 {
                // N+ phi_n = 2 pi i a phi_{n-1}, N- phi_n = 2 pi i a phi_{n+1}
                np[(i, i + 1)] = hop;
                nm[(i + 1, i)] = hop;
            }
            let tdiag: Vec<_> = (0..dim)
                .map(|i| c(0.0, i as f64 - order as f64 + tau))
                .collect();
            RepTruncation {
                label,
                order,
                dim,
                basis_offset: order,
                z: zeros(dim, dim),
                t: diag(&tdiag),
                n_plus: np,
                n_minus: nm,
            }
        }
        IrrepLabel::F { c: cc, d } => {
            let dim = order + 1;
            let ac = cc.abs();
            let mut raise = zeros(dim, dim);
            let mut lower = zeros(dim, dim);
            for n in 0..order {
                let w = 2.0 * (PI * ac * (n + 1) as f64).sqrt();
                raise[(n + 1, n)] = c(w, 0.0);
                lower[(n, n + 1)] = c(-w, 0.0);
            }
            let sign = if cc > 0.0 { -1.0 } else { 1.0 };
            let tdiag: Vec<_> = (0..dim)
                .map(|n| c(0.0, 2.0 * PI * d + sign * n as f64))
                .collect();
            let (np, nm) = if cc > 0.0 { (raise, lower) } else { (lower, raise) };
            RepTruncation {
                label,
                order,
                dim,
                basis_offset: 0,
                z: diag(&vec![c(0.0, 2.0 * PI * cc); dim]),
                t: diag(&tdiag),
                n_plus: np,
                n_minus: nm,
            }
        }
    })
}

impl RepTruncation {
    pub fn sigma_x(&self) -> CMat {
        scale((&self.n_plus + &self.n_minus).as_ref(), c(0.5, 0.0))
    }

    pub fn sigma_y(&self) -> CMat {
        scale((&self.n_plus - &self.n_minus).as_ref(), c(0.0, -0.5))
    }

    /// sigma_*(v) for a real Lie algebra element.
    pub fn sigma(&self, v: LieAlgebraElement) -> CMat {
        scale(self.z.as_ref(), c(v.z, 0.0))
            + scale(self.sigma_x().as_ref(), c(v.x, 0.0))
            + scale(self.sigma_y().as_ref(), c(v.y, 0.0))
            + scale(self.t.as_ref(), c(v.t, 0.0))
    }

    /// Basis indices at distance >= 2 from the truncation edge.
    pub fn interior(&self) -> Vec<usize> {
        match self.label {
            IrrepLabel::C { .. } => vec![0],
            IrrepLabel::S { .. } => (2..self.dim - 2).collect(),
            IrrepLabel::F { .. } => (0..self.dim - 2).collect(),
        }
    }

    /// Index of Fock level n (F) or Fourier mode n (S).
    pub fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.basis_offset as i64;
        (i >= 0 && (i as usize) < self.dim).then_some(i as usize)
    }

    /// Raising operator in the sense of the Fock model (N+ for c > 0, N- for c < 0).
    pub fn a_plus(&self) -> &CMat {
        match self.label {
            IrrepLabel::F { c, .. } if c < 0.0 => &self.n_minus,
            _ => &self.n_plus,
        }
    }

    pub fn a_minus(&self) -> &CMat {
        match self.label {
            IrrepLabel::F { c, .. } if c < 0.0 => &self.n_plus,
            _ => &self.n_minus,
        }
    }
}

pub fn casimir_matrix(rep: &RepTruncation) -> CMat {
    let x = rep.sigma_x();
    let y = rep.sigma_y();
    &x * &x + &y * &y + scale((&rep.z * &rep.t).as_ref(), c(2.0, 0.0))
}

/// Largest entry of `m` on interior rows and columns.
pub fn interior_max(rep: &RepTruncation, m: MatRef<'_, Complex64>) -> f64 {
    let idx = rep.interior();
    let r = restrict(m, &idx, &idx);
    let mut w: f64 = 0.0;
    for j in 0..r.ncols() {
        for i in 0..r.nrows() {
            w = w.max(r[(i, j)].norm());
        }
    }
    w
}

/// Residuals of the algebraic identities the truncation must satisfy on interior indices.
#[derive(Clone, Debug, Default)]
pub struct RepResiduals {
    pub t_ladder: f64,
    pub ladder_ladder: f64,
    pub skew: f64,
    pub adjoint: f64,
    pub casimir_scalar: f64,
    pub casimir_central: f64,
}

impl RepResiduals {
    pub fn max(&self) -> f64 {
        [
            self.t_ladder,
            self.ladder_ladder,
            self.skew,
            self.adjoint,
            self.casimir_scalar,
            self.casimir_central,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_relations(rep: &RepTruncation) -> RepResiduals {
    let (np, nm, t, z) = (&rep.n_plus, &rep.n_minus, &rep.t, &rep.z);
    let im = |m: &CMat, s: Complex64| scale(m.as_ref(), s);
    // [T, N+-] = -+ i N+-
    let r1 = commutator(t.as_ref(), np.as_ref()) + im(np, I);
    let r2 = commutator(t.as_ref(), nm.as_ref()) - im(nm, I);
    // [N+, N-] = -2i Z
    let r3 = commutator(np.as_ref(), nm.as_ref()) + im(z, c(0.0, 2.0));
    let skew_z = z + z.adjoint();
    let skew_t = t + t.adjoint();
    let adj = np.adjoint() + nm;
    let cas = casimir_matrix(rep);
    let n = rep.dim;
    let scalar = &cas - diag(&vec![c(casimir_value(&rep.label), 0.0); n]);
    let mut central: f64 = 0.0;
    for v in crate::group::BASIS {
        let s = rep.sigma(v);
        central = central.max(interior_max(rep, commutator(cas.as_ref(), s.as_ref()).as_ref()));
    }
    RepResiduals {
        t_ladder: interior_max(rep, r1.as_ref()).max(interior_max(rep, r2.as_ref())),
        ladder_ladder: interior_max(rep, r3.as_ref()),
        skew: interior_max(rep, skew_z.as_ref()).max(interior_max(rep, skew_t.as_ref())),
        adjoint: interior_max(rep, adj.as_ref()),
        casimir_scalar: interior_max(rep, scalar.as_ref()),
        casimir_central: central,
    }
}

/// Interior value of [A+, A-] (a multiple of the identity).
pub fn ladder_commutator_value(rep: &RepTruncation) -> Complex64 {
    let m = commutator(rep.n_plus.as_ref(), rep.n_minus.as_ref());
    let i = rep.interior()[rep.interior().len() / 2];
    if rep.dim == 1 {
        return ZERO;
    }
    m[(i, i)]
}

/// Label of the pulled-back representation F^*(sigma) for F = T_u o C_eta o F_S.
pub fn pullback_label(f: &Automorphism, label: &IrrepLabel) -> Result<IrrepLabel, Error> {
    let eps = f.epsilon()? as f64;
    let det = f.det_s();
    // T_u first, then F_S; C_eta is inner and does not change the class.
    let shifted = match *label {
        IrrepLabel::F { c, d } => IrrepLabel::F { c, d: d + f.u * c },
        other => other,
    };
    Ok(match shifted {
        IrrepLabel::C { d } => IrrepLabel::C { d: eps * d },
        IrrepLabel::S { a, tau } => IrrepLabel::S {
            a: det.abs().sqrt() * a,
            tau: reduce_mod1(eps * tau),
        },
        IrrepLabel::F { c, d } => IrrepLabel::F { c: det * c, d: eps * d },
    })
}

//! The Dirac family D^t on truncated models rep (x) Delta.
//!
//! Layout: basis vector (i, s) of rep (x) Delta sits at index 4 i + s, where i is the
//! representation basis index and s = 0..3 labels u_1..u_4.

use faer::MatRef;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::clifford::{cubic_direction, cubic_element, gamma};
use crate::error::Error;
use crate::group::{BASIS, DUAL_BASIS};
use crate::linalg::{
    self, c, columns, identity, kron, lstsq, matvec, op_norm, restrict, scale, sqrt_signed,
    vec_norm, CMat, I, ZERO,
};
use crate::reps::{casimir_value, IrrepLabel, RepTruncation};

#[derive(Clone, Debug)]
pub struct DiracMatrix {
    pub t: f64,
    pub rep: RepTruncation,
    pub matrix: CMat,
}

/// D^t = sum_a sigma(e_a) (x) gamma(e^a) + (3t/2) Id (x) XYZ.
pub fn build_dirac(rep: &RepTruncation, t: f64) -> DiracMatrix {
    let mut m = kron(identity(rep.dim).as_ref(), cubic_element().as_ref());
    m = scale(m.as_ref(), c(1.5 * t, 0.0));
    for a in 0..4 {
        let s = rep.sigma(BASIS[a]);
        m += kron(s.as_ref(), gamma(DUAL_BASIS[a]).as_ref());
    }
    DiracMatrix {
        t,
        rep: rep.clone(),
        matrix: m,
    }
}

/// D^{1/3} + (i/2)(3t - 1) Id (x) diag(A, -A).
pub fn build_dirac_via_correction(rep: &RepTruncation, t: f64) -> DiracMatrix {
    let base = build_dirac(rep, 1.0 / 3.0).matrix;
    let corr = kron(identity(rep.dim).as_ref(), cubic_direction().as_ref());
    DiracMatrix {
        t,
        rep: rep.clone(),
        matrix: base + scale(corr.as_ref(), c(0.0, 0.5 * (3.0 * t - 1.0))),
    }
}

fn spinor_indices(rep_idx: &[usize]) -> Vec<usize> {
    rep_idx
        .iter()
        .flat_map(|&i| (0..4).map(move |s| 4 * i + s))
        .collect()
}

/// Operator norm of (D^{1/3})^2 + Omega on interior rows and columns.
pub fn square_identity_residual(rep: &RepTruncation) -> f64 {
    let d = build_dirac(rep, 1.0 / 3.0).matrix;
    let d2 = &d * &d;
    let idx = spinor_indices(&rep.interior());
    let mut r = restrict(d2.as_ref(), &idx, &idx);
    let om = casimir_value(&rep.label);
    for i in 0..idx.len() {
        r[(i, i)] += c(om, 0.0);
    }
    op_norm(r.as_ref())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// F with c > 0, -Omega != 0.
    FPlusC,
    /// F with c < 0 and 4 pi d - 1 > 0.
    FMinusCDpos,
    /// F with c < 0 and 4 pi d - 1 < 0.
    FMinusCDneg,
    /// Kernel vectors of F with c > 0, 4 pi d + 1 = 0.
    FKernelCpos,
    /// Kernel vectors of F with c < 0, 4 pi d - 1 = 0.
    FKernelCneg,
    SFamily,
    CFamily,
}

/// Which of the two vectors anchored at a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    /// Contains psi_n (x) u_1 (or phi_n (x) u_1 for S).
    Eta,
    /// Contains psi_n (x) u_3 (or phi_n (x) u_2 (-+) phi_{n+1} (x) u_4 for S).
    EtaHat,
}

/// A closed-form vector: sum of coef * (basis mode `level`) (x) u_{spinor+1}.
#[derive(Clone, Debug, Serialize)]
pub struct EigenvectorFamily {
    pub kind: FamilyKind,
    pub part: Part,
    pub n: i64,
    pub sign: i8,
    pub terms: Vec<(i64, usize, Complex64)>,
}

impl EigenvectorFamily {
    pub fn materialize(&self, rep: &RepTruncation) -> Vec<Complex64> {
        let mut v = vec![ZERO; 4 * rep.dim];
        for &(lev, s, coef) in &self.terms {
            if coef == ZERO {
                continue;
            }
            let i = rep.index(lev).expect("closed-form vector leaves the truncation");
            v[4 * i + s] += coef;
        }
        v
    }

    pub fn max_level(&self) -> i64 {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }

    pub fn min_level(&self) -> i64 {
        self.terms.iter().map(|t| t.0).min().unwrap_or(0)
    }
}

fn sq(n: i64) -> Complex64 {
    c((n as f64).sqrt(), 0.0)
}

/// -Omega on the summand; values below rounding level of its two factors count as 0.
pub fn lambda(label: &IrrepLabel) -> f64 {
    let v = -casimir_value(label);
    if let IrrepLabel::F { c, d } = *label {
        if v.abs() <= 1e-13 * 2.0 * PI * c.abs() * (1.0 + 4.0 * PI * d.abs()) {
            return 0.0;
        }
    }
    v
}

/// The two vectors of the given sign anchored at level n, or the kernel pair when
/// lambda = 0 (sign is then ignored).
pub fn family_at(label: &IrrepLabel, n: i64, sign: i8) -> Result<[EigenvectorFamily; 2], Error> {
    let sg = c(sign as f64, 0.0);
    let mk = |kind, part, terms| EigenvectorFamily {
        kind,
        part,
        n,
        sign,
        terms,
    };
    match *label {
        IrrepLabel::C { .. } => Err(Error::CTypeLabel),
        IrrepLabel::S { a, tau } => {
            let k = c(0.0, 1.0 / (SQRT_2 * PI * a)) * (n as f64 + tau + 0.5);
            Ok([
                mk(
                    FamilyKind::SFamily,
                    Part::Eta,
                    vec![(n, 0, sg), (n, 1, k), (n + 1, 2, c(1.0, 0.0))],
                ),
                mk(
                    FamilyKind::SFamily,
                    Part::EtaHat,
                    vec![(n, 1, c(1.0, 0.0)), (n + 1, 3, -sg)],
                ),
            ])
        }
        IrrepLabel::F { c: cc, d } => {
            let a = c((2.0 * PI * cc.abs()).sqrt(), 0.0);
            let lam = lambda(label);
            if cc > 0.0 {
                if lam == 0.0 {
                    let k = FamilyKind::FKernelCpos;
                    return Ok([
                        mk(k, Part::Eta, vec![(n, 0, a), (n - 1, 3, sq(n))]),
                        mk(k, Part::EtaHat, vec![(n + 1, 1, sq(n + 1)), (n, 2, -a)]),
                    ]);
                }
                let b = sqrt_signed(2.0 * PI * d + 0.5) * I * sg;
                let k = FamilyKind::FPlusC;
                Ok([
                    mk(k, Part::Eta, vec![(n, 0, a), (n, 1, b), (n - 1, 3, sq(n))]),
                    mk(
                        k,
                        Part::EtaHat,
                        vec![(n + 1, 1, sq(n + 1)), (n, 2, -a), (n, 3, -b)],
                    ),
                ])
            } else {
                if lam == 0.0 {
                    let k = FamilyKind::FKernelCneg;
                    return Ok([
                        mk(k, Part::Eta, vec![(n, 0, a), (n + 1, 3, sq(n + 1))]),
                        mk(k, Part::EtaHat, vec![(n - 1, 1, sq(n)), (n, 2, -a)]),
                    ]);
                }
                let e = 4.0 * PI * d - 1.0;
                let (k, b) = if e > 0.0 {
                    (FamilyKind::FMinusCDpos, c((2.0 * PI * d - 0.5).sqrt(), 0.0) * sg)
                } else {
                    (FamilyKind::FMinusCDneg, -I * c((0.5 - 2.0 * PI * d).sqrt(), 0.0) * sg)
                };
                Ok([
                    mk(k, Part::Eta, vec![(n, 0, a), (n, 1, b), (n + 1, 3, sq(n + 1))]),
                    mk(k, Part::EtaHat, vec![(n - 1, 1, sq(n)), (n, 2, -a), (n, 3, -b)]),
                ])
            }
        }
    }
}

/// Eigenvalue attached to the sign-`sign` family of `label` at t = 1/3.
pub fn family_eigenvalue(label: &IrrepLabel, sign: i8) -> Complex64 {
    match *label {
        IrrepLabel::S { a, .. } => c(sign as f64 * 2.0 * PI * a, 0.0),
        IrrepLabel::C { .. } => ZERO,
        IrrepLabel::F { .. } => sqrt_signed(lambda(label)) * sign as f64,
    }
}

/// Anchor levels whose closed-form vectors stay inside the interior of `rep`.
pub fn interior_anchors(rep: &RepTruncation) -> Vec<i64> {
    let n = rep.order as i64;
    match rep.label {
        IrrepLabel::C { .. } => vec![],
        IrrepLabel::S { .. } => (-(n - 2)..=(n - 3)).collect(),
        IrrepLabel::F { .. } => (0..=(n - 3)).collect(),
    }
}

/// Every closed-form eigenvector with an interior anchor, with its D^{1/3}-eigenvalue.
pub fn closed_form_eigenvectors(
    rep: &RepTruncation,
) -> Result<Vec<(EigenvectorFamily, Complex64)>, Error> {
    if let IrrepLabel::C { .. } = rep.label {
        return Err(Error::CTypeLabel);
    }
    let kernel = matches!(rep.label, IrrepLabel::F { .. }) && lambda(&rep.label) == 0.0;
    let signs: &[i8] = if kernel { &[1] } else { &[1, -1] };
    let mut out = Vec::new();
    for n in interior_anchors(rep) {
        for &s in signs {
            let ev = if kernel { ZERO } else { family_eigenvalue(&rep.label, s) };
            for f in family_at(&rep.label, n, s)? {
                out.push((f, ev));
            }
        }
    }
    Ok(out)
}

/// Largest |D v - ev v| / |v| over all closed-form vectors.
pub fn eigen_residual(rep: &RepTruncation) -> Result<f64, Error> {
    let d = build_dirac(rep, 1.0 / 3.0).matrix;
    let mut worst: f64 = 0.0;
    for (f, ev) in closed_form_eigenvectors(rep)? {
        let v = f.materialize(rep);
        let dv = matvec(d.as_ref(), &v);
        let r: Vec<_> = dv.iter().zip(&v).map(|(x, y)| x - ev * y).collect();
        worst = worst.max(vec_norm(&r) / vec_norm(&v));
    }
    Ok(worst)
}

fn unit(rep: &RepTruncation, level: i64, s: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; 4 * rep.dim];
    v[4 * rep.index(level).unwrap() + s] = c(1.0, 0.0);
    v
}

/// The four vectors spanning the D-invariant blocks anchored at level n. For lambda = 0
/// the kernel vectors are completed by psi_n (x) u_2 and psi_n (x) u_4.
pub fn level_block(rep: &RepTruncation, n: i64) -> Result<Vec<Vec<Complex64>>, Error> {
    let kernel = matches!(rep.label, IrrepLabel::F { .. }) && lambda(&rep.label) == 0.0;
    if kernel {
        let [e, h] = family_at(&rep.label, n, 1)?;
        return Ok(vec![
            e.materialize(rep),
            unit(rep, n, 1),
            h.materialize(rep),
            unit(rep, n, 3),
        ]);
    }
    let [ep, hp] = family_at(&rep.label, n, 1)?;
    let [em, hm] = family_at(&rep.label, n, -1)?;
    Ok(vec![
        ep.materialize(rep),
        em.materialize(rep),
        hp.materialize(rep),
        hm.materialize(rep),
    ])
}

/// Minimum over interior anchors of the rank of the level block, and the rank of the
/// union of all blocks versus its size.
pub fn spanning_ranks(rep: &RepTruncation) -> Result<(usize, usize, usize), Error> {
    let mut min_rank = usize::MAX;
    let mut all = Vec::new();
    for n in interior_anchors(rep) {
        let b = level_block(rep, n)?;
        min_rank = min_rank.min(linalg::rank(columns(&b).as_ref(), 1e-10));
        all.extend(b);
    }
    let total = linalg::rank(columns(&all).as_ref(), 1e-10);
    Ok((min_rank, total, all.len()))
}

/// 2x2 matrix M with D^t V = V M on the pair V at level n:
/// - F, lambda != 0: V = (eta^+, eta^-) or the hatted pair;
/// - F, lambda = 0: V = (eta, psi_n u_2) or (eta-hat, psi_n u_4);
/// - S: V = (phi_n u_2 -+ phi_{n+1} u_4, mixed vector) for the sign `sign`.
pub fn dt_block_matrix(label: &IrrepLabel, t: f64, hat: bool, sign: i8) -> [[Complex64; 2]; 2] {
    let k = 3.0 * t - 1.0;
    match *label {
        IrrepLabel::C { .. } => [[ZERO; 2]; 2],
        IrrepLabel::S { a, .. } => {
            let s = c(0.0, SQRT_2 / 2.0 * k);
            let w = c(2.0 * PI * a, 0.0);
            let sg = sign as f64;
            [[w * sg, s * sg], [ZERO, w * sg]]
        }
        IrrepLabel::F { c: cc, .. } => {
            let lam = lambda(label);
            if lam == 0.0 {
                let pre = c(0.0, (PI * cc.abs()).sqrt());
                let off = if hat { 2.0 } else { -2.0 } * cc.signum();
                [[ZERO, pre * off], [pre * k, ZERO]]
            } else {
                let s = sqrt_signed(lam);
                let b = (if hat { -1.0 } else { 1.0 }) * k * PI * cc / s;
                [[s + b, b], [-b, -(s + b)]]
            }
        }
    }
}

/// Residual |D^t V - V M| over interior anchors for every 2x2 block.
pub fn dt_block_residual(rep: &RepTruncation, t: f64) -> Result<f64, Error> {
    let d = build_dirac(rep, t).matrix;
    let mut worst: f64 = 0.0;
    for n in interior_anchors(rep) {
        let blocks = level_block(rep, n)?;
        let pairs: Vec<(Vec<Vec<Complex64>>, bool, i8)> = match rep.label {
            IrrepLabel::S { .. } => [1i8, -1]
                .iter()
                .map(|&s| {
                    let [mixed, pair] = family_at(&rep.label, n, s).unwrap();
                    (vec![pair.materialize(rep), mixed.materialize(rep)], false, s)
                })
                .collect(),
            _ if lambda(&rep.label) == 0.0 => vec![
                (vec![blocks[0].clone(), blocks[1].clone()], false, 1),
                (vec![blocks[2].clone(), blocks[3].clone()], true, 1),
            ],
            _ => vec![
                (vec![blocks[0].clone(), blocks[1].clone()], false, 1),
                (vec![blocks[2].clone(), blocks[3].clone()], true, 1),
            ],
        };
        for (vs, hat, s) in pairs {
            let m = dt_block_matrix(&rep.label, t, hat, s);
            let v = columns(&vs);
            let dv = &d * &v;
            let vm = &v * linalg::from_rows(m);
            let scale_ = v.norm_l2().max(1.0);
            worst = worst.max((dv - vm).norm_l2() / scale_);
        }
    }
    Ok(worst)
}

/// Eigenvalues of D^t on one summand rep (x) Delta, with repetition removed.
pub fn dt_block_eigenvalues(label: &IrrepLabel, t: f64) -> Vec<Complex64> {
    let k = 3.0 * t - 1.0;
    let mut out: Vec<Complex64> = match *label {
        IrrepLabel::C { .. } => vec![ZERO],
        IrrepLabel::S { a, .. } => vec![c(2.0 * PI * a, 0.0), c(-2.0 * PI * a, 0.0)],
        IrrepLabel::F { c: cc, .. } => {
            let lam = lambda(label);
            let mut v = Vec::with_capacity(4);
            for s2 in [1.0, -1.0] {
                let r = sqrt_signed(lam + s2 * 2.0 * PI * cc * k);
                v.push(r);
                v.push(-r);
            }
            v
        }
    };
    let mut uniq: Vec<Complex64> = Vec::new();
    for z in out.drain(..) {
        if !uniq.iter().any(|u| (u - z).norm() <= 1e-12 * (1.0 + z.norm())) {
            uniq.push(z);
        }
    }
    uniq
}

/// Outcome of comparing a dense eigensolve of the truncated D^t with the block values.
#[derive(Clone, Debug, Serialize)]
pub struct DenseComparison {
    pub total: usize,
    pub accepted: usize,
    /// Max distance from an accepted cluster's centroid to the nearest expected value.
    pub max_cluster_error: f64,
    /// Max distance from a single accepted eigenvalue to the nearest expected value.
    pub max_raw_error: f64,
    /// Distance from the nearest boundary-only cluster to an expected value.
    pub nearest_spurious: f64,
    /// Expected values that no accepted cluster matched.
    pub unmatched_expected: usize,
}

/// Indices of the two outermost levels (both ends for S).
fn boundary_indices(rep: &RepTruncation) -> Vec<usize> {
    let lv: Vec<usize> = match rep.label {
        IrrepLabel::C { .. } => vec![],
        IrrepLabel::S { .. } => vec![0, 1, rep.dim - 2, rep.dim - 1],
        IrrepLabel::F { .. } => vec![rep.dim - 2, rep.dim - 1],
    };
    spinor_indices(&lv)
}

/// Single-linkage clusters of points closer than `radius`.
pub fn cluster(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() < radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Boundary-mass filter threshold.
pub const BOUNDARY_MASS: f64 = 1e-6;
/// Clustering radius for nearly defective eigenvalues.
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// Eigenvalues of the truncated D^t with their relative mass on the two outermost levels.
pub fn dense_spectrum(rep: &RepTruncation, t: f64) -> Result<Vec<(Complex64, f64)>, Error> {
    let d = build_dirac(rep, t).matrix;
    let (w, v) = linalg::eig(d.as_ref())?;
    let bidx = boundary_indices(rep);
    Ok((0..w.len())
        .map(|j| {
            let tot: f64 = (0..v.nrows()).map(|i| v[(i, j)].norm_sqr()).sum();
            let b: f64 = bidx.iter().map(|&i| v[(i, j)].norm_sqr()).sum();
            (w[j], b / tot)
        })
        .collect())
}

pub fn compare_dense(rep: &RepTruncation, t: f64) -> Result<DenseComparison, Error> {
    let spec = dense_spectrum(rep, t)?;
    let expected = dt_block_eigenvalues(&rep.label, t);
    let nearest = |z: Complex64| {
        expected
            .iter()
            .map(|e| (z - e).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let pts: Vec<Complex64> = spec.iter().map(|p| p.0).collect();
    let n_boundary = boundary_indices(rep).len();
    let groups = cluster(&pts, CLUSTER_RADIUS);
    let mut out = DenseComparison {
        total: pts.len(),
        accepted: 0,
        max_cluster_error: 0.0,
        max_raw_error: 0.0,
        nearest_spurious: f64::INFINITY,
        unmatched_expected: 0,
    };
    let mut matched = vec![false; expected.len()];
    for g in groups {
        // a degenerate cluster larger than the boundary block spans an interior vector even
        // when the solver hands back eigenvectors that each touch the boundary
        let acc: Vec<usize> = if g.len() > n_boundary {
            g.clone()
        } else {
            g.iter().cloned().filter(|&i| spec[i].1 < BOUNDARY_MASS).collect()
        };
        let centroid = g.iter().map(|&i| pts[i]).sum::<Complex64>() / g.len() as f64;
        let err = nearest(centroid);
        if acc.is_empty() {
            out.nearest_spurious = out.nearest_spurious.min(err);
            continue;
        }
        out.accepted += acc.len();
        out.max_cluster_error = out.max_cluster_error.max(err);
        for &i in &acc {
            out.max_raw_error = out.max_raw_error.max(nearest(pts[i]));
        }
        for (k, e) in expected.iter().enumerate() {
            if (centroid - e).norm() < 1e-6 {
                matched[k] = true;
            }
        }
    }
    out.unmatched_expected = matched.iter().filter(|m| !**m).count();
    Ok(out)
}

/// Ratios |P^+- zeta_n| / |zeta_n| for zeta_n = psi_n (x) u_2, computed from the truncated
/// operator through P^+- = (+-D + sqrt(lambda)) / (2 sqrt(lambda)).
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionGrowth {
    pub n: Vec<usize>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// max over n of |P^+ zeta + P^- zeta - zeta|.
    pub completeness: f64,
    /// max over n of |D P^+- zeta -+ sqrt(lambda) P^+- zeta| / |P^+- zeta|.
    pub eigen_residual: f64,
}

pub fn projection_norm_growth(rep: &RepTruncation, upto_n: usize) -> Result<ProjectionGrowth, Error> {
    let lam = match rep.label {
        IrrepLabel::F { .. } if lambda(&rep.label) != 0.0 => lambda(&rep.label),
        _ => {
            return Err(Error::InvalidLabel(
                "projection growth needs an F summand with nonzero Casimir".into(),
            ))
        }
    };
    if upto_n + 3 > rep.order {
        return Err(Error::TruncationTooSmall(rep.order, upto_n + 3));
    }
    let d = build_dirac(rep, 1.0 / 3.0).matrix;
    let s = sqrt_signed(lam);
    let mut out = ProjectionGrowth {
        n: vec![],
        plus: vec![],
        minus: vec![],
        completeness: 0.0,
        eigen_residual: 0.0,
    };
    for n in 0..=upto_n {
        let z = unit(rep, n as i64, 1);
        let dz = matvec(d.as_ref(), &z);
        let zn = vec_norm(&z);
        let proj = |sg: f64| -> Vec<Complex64> {
            dz.iter()
                .zip(&z)
                .map(|(a, b)| (a * sg + s * b) / (s * 2.0))
                .collect()
        };
        let (pp, pm) = (proj(1.0), proj(-1.0));
        let sum: Vec<_> = pp.iter().zip(&pm).zip(&z).map(|((a, b), z)| a + b - z).collect();
        out.completeness = out.completeness.max(vec_norm(&sum));
        for (p, sg) in [(&pp, 1.0), (&pm, -1.0)] {
            let dp = matvec(d.as_ref(), p);
            let r: Vec<_> = dp.iter().zip(p.iter()).map(|(a, b)| a - s * sg * b).collect();
            out.eigen_residual = out.eigen_residual.max(vec_norm(&r) / vec_norm(p));
        }
        out.n.push(n);
        out.plus.push(vec_norm(&pp) / zn);
        out.minus.push(vec_norm(&pm) / zn);
    }
    Ok(out)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Growth exponent of the projection ratios over n in [lo, hi].
pub fn growth_exponent(g: &ProjectionGrowth, lo: usize, hi: usize) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = g
        .n
        .iter()
        .zip(&g.plus)
        .filter(|(n, _)| **n >= lo && **n <= hi)
        .map(|(n, r)| (*n as f64, *r))
        .unzip();
    loglog_slope(&x, &y)
}

/// Interior operator norm of D assembled two ways.
pub fn assembly_mismatch(rep: &RepTruncation, t: f64) -> f64 {
    let a = build_dirac(rep, t).matrix;
    let b = build_dirac_via_correction(rep, t).matrix;
    op_norm((a - b).as_ref())
}

/// Coefficients of `v` in the span of `basis` and the residual of that fit.
pub fn coordinates(basis: &[Vec<Complex64>], v: &[Complex64]) -> (Vec<Complex64>, f64) {
    let b = columns(basis);
    let rhs = columns(&[v.to_vec()]);
    let x = lstsq(b.as_ref(), rhs.as_ref());
    let fit = &b * &x;
    let coef: Vec<_> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    let r: Vec<_> = (0..v.len()).map(|i| fit[(i, 0)] - v[i]).collect();
    (coef, vec_norm(&r))
}

pub fn mat_entries(m: MatRef<'_, Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::build_truncation;

    fn f(cc: f64, d: f64) -> IrrepLabel {
        IrrepLabel::f(cc, d).unwrap()
    }

    fn s(a: f64, tau: f64) -> IrrepLabel {
        IrrepLabel::s(a, tau).unwrap()
    }

    #[test]
    fn two_assembly_routes_agree() {
        for l in [f(1.0, 0.2), f(-3.0, 1.0), s(0.5, 0.3)] {
            let rep = build_truncation(l, 8).unwrap();
            for t in [0.0, 1.0 / 3.0, 0.5, 1.0] {
                assert!(assembly_mismatch(&rep, t) < 1e-12);
            }
        }
    }

    #[test]
    fn half_minus_third_is_quarter_i() {
        let rep = build_truncation(f(1.0, 0.2), 6).unwrap();
        let d = build_dirac(&rep, 0.5).matrix - build_dirac(&rep, 1.0 / 3.0).matrix;
        let e = kron(identity(rep.dim).as_ref(), cubic_direction().as_ref());
        let e = scale(e.as_ref(), c(0.0, 0.25));
        assert!((d - e).norm_l2() < 1e-13);
    }

    #[test]
    fn c_type_is_nilpotent_but_nonzero() {
        for d in [0.0, 0.3, 1.0 / (4.0 * PI), -1.0 / (4.0 * PI)] {
            let rep = build_truncation(IrrepLabel::c(d), 4).unwrap();
            for t in [0.0, 1.0 / 3.0, 1.0] {
                let m = build_dirac(&rep, t).matrix;
                if d != 0.0 || t != 0.0 {
                    assert!(m.norm_l2() > 0.1);
                }
                let m4 = &(&m * &m) * &(&m * &m);
                assert!(m4.norm_l2() < 1e-12);
            }
        }
    }

    #[test]
    fn square_identity_small() {
        for l in [f(1.0, 0.0), f(-1.0, 0.3), f(3.0, -1.0 / (4.0 * PI)), s(2.0f64.sqrt(), 1.0 / 3.0)] {
            let rep = build_truncation(l, 10).unwrap();
            assert!(square_identity_residual(&rep) < 1e-10, "{l}");
        }
    }

    #[test]
    fn ground_vector_and_kernel_examples() {
        let l = f(1.0, 0.1);
        let rep = build_truncation(l, 10).unwrap();
        let [eta, _] = family_at(&l, 0, 1).unwrap();
        let v = eta.materialize(&rep);
        let d = build_dirac(&rep, 1.0 / 3.0).matrix;
        let dv = matvec(d.as_ref(), &v);
        let ev = sqrt_signed(2.0 * PI * (4.0 * PI * 0.1 + 1.0));
        let r: Vec<_> = dv.iter().zip(&v).map(|(a, b)| a - ev * b).collect();
        assert!(vec_norm(&r) < 1e-12);

        let l = f(1.0, -1.0 / (4.0 * PI));
        let rep = build_truncation(l, 10).unwrap();
        let [eta, _] = family_at(&l, 0, 1).unwrap();
        assert_eq!(eta.terms.iter().filter(|t| t.2 != ZERO).count(), 1);
        let dv = matvec(build_dirac(&rep, 1.0 / 3.0).matrix.as_ref(), &eta.materialize(&rep));
        assert!(vec_norm(&dv) < 1e-12);
    }

    #[test]
    fn closed_forms_small() {
        let labels = [
            f(1.0, 0.1),
            f(2.0, -0.2),
            f(-1.0, 0.3),
            f(-1.0, -0.2),
            f(1.0, -1.0 / (4.0 * PI)),
            f(-2.0, 1.0 / (4.0 * PI)),
            s(0.5, 0.0),
            s(1.3, 0.7),
        ];
        for l in labels {
            let rep = build_truncation(l, 12).unwrap();
            assert!(eigen_residual(&rep).unwrap() < 1e-10, "{l}");
            let (min_rank, total, count) = spanning_ranks(&rep).unwrap();
            assert_eq!(min_rank, 4, "{l}");
            assert_eq!(total, count, "{l}");
        }
    }

    #[test]
    fn blocks_reproduce_dt() {
        let labels = [
            f(1.0, 0.1),
            f(1.0, -0.2),
            f(-1.0, 0.3),
            f(-1.0, -0.2),
            f(1.0, -1.0 / (4.0 * PI)),
            f(-2.0, 1.0 / (4.0 * PI)),
            s(0.5, 0.0),
            s(1.3, 0.7),
        ];
        for l in labels {
            let rep = build_truncation(l, 10).unwrap();
            for t in [0.0, 1.0 / 3.0, 0.5, 1.0, 2.3] {
                let r = dt_block_residual(&rep, t).unwrap();
                assert!(r < 1e-10, "{l} t={t}: {r}");
            }
        }
    }

    #[test]
    fn block_eigenvalues_match_matrices() {
        for l in [f(1.0, 0.1), f(-1.0, -0.2), f(1.0, -1.0 / (4.0 * PI)), f(-2.0, 1.0 / (4.0 * PI))] {
            for t in [0.0, 0.5, 1.0] {
                let ex = dt_block_eigenvalues(&l, t);
                for hat in [false, true] {
                    let m = dt_block_matrix(&l, t, hat, 1);
                    let tr = m[0][0] + m[1][1];
                    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                    let disc = (tr * tr - det * 4.0).sqrt();
                    for z in [(tr + disc) / 2.0, (tr - disc) / 2.0] {
                        let dmin = ex.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
                        assert!(dmin < 1e-10, "{l} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn third_reduces_to_sqrt_lambda() {
        let l = f(1.0, 0.2);
        let ex = dt_block_eigenvalues(&l, 1.0 / 3.0);
        assert_eq!(ex.len(), 2);
        let r = sqrt_signed(lambda(&l));
        assert!(ex.iter().any(|e| (e - r).norm() < 1e-12));
        assert!(ex.iter().any(|e| (e + r).norm() < 1e-12));
    }

    #[test]
    fn dense_small_matches_blocks() {
        for l in [f(1.0, 0.2), f(-1.0, 1.0 / (4.0 * PI)), s(1.0, 1.0 / 3.0)] {
            for n in [16, 32] {
                let rep = build_truncation(l, n).unwrap();
                for t in [0.0, 1.0 / 3.0, 0.5, 1.0] {
                    let cmp = compare_dense(&rep, t).unwrap();
                    assert!(cmp.max_cluster_error < 1e-8, "{l} N={n} t={t}: {cmp:?}");
                    assert_eq!(cmp.unmatched_expected, 0, "{l} N={n} t={t}: {cmp:?}");
                }
            }
        }
    }

    #[test]
    fn projection_growth_formula() {
        let l = f(1.0, 1.0 / (4.0 * PI));
        let rep = build_truncation(l, 20).unwrap();
        let g = projection_norm_growth(&rep, 15).unwrap();
        assert!(g.completeness < 1e-12);
        assert!(g.eigen_residual < 1e-10);
        // |P zeta_n|^2 / |zeta_n|^2 = (2 pi c + (2 pi d + 1/2) + n) / (4 (2 pi d + 1/2))
        for (i, &n) in g.n.iter().enumerate() {
            let want = ((2.0 * PI + 1.0 + n as f64) / 4.0).sqrt();
            assert!((g.plus[i] - want).abs() < 1e-12);
            assert!((g.minus[i] - want).abs() < 1e-12);
        }
        assert!(g.plus.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn loglog_slope_exact_power() {
        let x: Vec<f64> = (1..20).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(0.5)).collect();
        assert!((loglog_slope(&x, &y) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn c_type_rejected() {
        let rep = build_truncation(IrrepLabel::c(0.1), 4).unwrap();
        assert!(matches!(closed_form_eigenvectors(&rep), Err(Error::CTypeLabel)));
    }
}

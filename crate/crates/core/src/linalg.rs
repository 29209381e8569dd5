//! Dense complex matrix helpers on top of faer.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::Error;

pub type CMat = Mat<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// sqrt(x) for real x with the branch i*sqrt(|x|) on the negative axis.
pub fn sqrt_signed(x: f64) -> Complex64 {
    if x >= 0.0 {
        c(x.sqrt(), 0.0)
    } else {
        c(0.0, (-x).sqrt())
    }
}

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn diag(d: &[Complex64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { ZERO })
}

pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> CMat {
    Mat::from_fn(N, N, |i, j| rows[i][j])
}

pub fn scale(a: MatRef<'_, Complex64>, s: Complex64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn kron(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> CMat {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

pub fn commutator(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> CMat {
    a * b - b * a
}

/// Rows and columns restricted to `idx`.
pub fn restrict(a: MatRef<'_, Complex64>, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>, Error> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(vec![]);
    }
    a.singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Operator 2-norm.
pub fn op_norm(a: MatRef<'_, Complex64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    // Frobenius is an upper bound for the 2-norm; used if the SVD fails to converge.
    singular_values(a)
        .map(|s| s.into_iter().fold(0.0, f64::max))
        .unwrap_or_else(|_| a.norm_l2())
}

/// Numerical rank with relative threshold on singular values.
pub fn rank(a: MatRef<'_, Complex64>, rel_tol: f64) -> usize {
    let s = singular_values(a).unwrap_or_default();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// 2-norm condition number (infinite when singular).
pub fn condition_number(a: MatRef<'_, Complex64>) -> f64 {
    let s = singular_values(a).unwrap_or_default();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matvec(a: MatRef<'_, Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

/// Matrix with the given vectors as columns.
pub fn columns(vs: &[Vec<Complex64>]) -> CMat {
    let n = vs.first().map_or(0, |v| v.len());
    Mat::from_fn(n, vs.len(), |i, j| vs[j][i])
}

/// Eigenvalues and right eigenvectors (as columns) of a general complex matrix.
pub fn eig(a: MatRef<'_, Complex64>) -> Result<(Vec<Complex64>, CMat), Error> {
    let e = a
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let vals = (0..a.nrows()).map(|i| e.S()[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Least-squares coefficients x minimizing |V x - b|.
pub fn lstsq(v: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> CMat {
    use faer::linalg::solvers::SolveLstsq;
    let qr = v.qr();
    let mut rhs = b.to_owned();
    qr.solve_lstsq_in_place(rhs.as_mut());
    rhs.subrows(0, v.ncols()).to_owned()
}

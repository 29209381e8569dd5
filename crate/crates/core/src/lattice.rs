//! Basic lattices L_r(kappa, mu, nu), spin structures, lattice-point counts and the
//! resulting point spectra of -Omega, D^{1/3} and D^t on the compact quotient.
//!
//! Spectral values of -Omega are beta*L (L integer, beta = pi r / kappa) from F summands,
//! 0 from C summands and pi^2 a^2 from S summands, where a runs over norms of the
//! lattice Z^2 under ||(k,l)||^2 = nu k^2 + (l - mu k)^2 / nu.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dirac::dt_block_eigenvalues;
use crate::error::Error;
use crate::linalg::{c, sqrt_signed, ZERO};
use crate::reps::{casimir_value, IrrepLabel};
use crate::surd::{Rational, Scalar};

/// Relative tolerance used to merge numerically equal spectral values.
pub const GROUP_TOL: f64 = 1e-9;

/// Box half-widths beyond this are refused.
const MAX_RADIUS: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub r: u32,
    pub kappa: u32,
    pub mu: Scalar,
    pub nu: Scalar,
}

/// Integer form N(k,l) = s^2 q^2 k^2 + t^2 (q l - p k)^2 with ||(k,l)||^2 = N / den,
/// for mu = p/q and nu = s/t.
#[derive(Clone, Copy, Debug)]
struct ExactForm {
    p: i128,
    q: i128,
    s: i128,
    t: i128,
    den: i128,
}

impl ExactForm {
    fn eval(&self, k: i64, l: i64) -> i128 {
        let (k, l) = (k as i128, l as i128);
        let a = self.s * self.q * k;
        let b = self.t * (self.q * l - self.p * k);
        a * a + b * b
    }
}

impl LatticeParams {
    pub fn new(r: u32, kappa: u32, mu: Scalar, nu: Scalar) -> Result<Self, Error> {
        if r == 0 || kappa == 0 {
            return Err(Error::InvalidArgument("r and kappa must be positive".into()));
        }
        if !(nu.value() > 0.0) || !mu.value().is_finite() {
            return Err(Error::InvalidArgument(format!("need nu > 0, got {nu}")));
        }
        Ok(LatticeParams { r, kappa, mu, nu })
    }

    /// Shorthand for integer/float parameters.
    pub fn simple(r: u32, kappa: u32, mu: f64, nu: f64) -> Result<Self, Error> {
        let exact = |x: f64| -> Scalar {
            // halves and integers are the common grid values; keep them exact
            let h = (2.0 * x).round();
            if (2.0 * x - h).abs() == 0.0 && h.abs() < 1e12 {
                Scalar::from_rational(Rational::new(h as i128, 2))
            } else {
                Scalar::Float(x)
            }
        };
        Self::new(r, kappa, exact(mu), exact(nu))
    }

    pub fn beta(&self) -> f64 {
        PI * self.r as f64 / self.kappa as f64
    }

    pub fn mu_f64(&self) -> f64 {
        self.mu.value()
    }

    pub fn nu_f64(&self) -> f64 {
        self.nu.value()
    }

    fn exact_form(&self) -> Option<ExactForm> {
        let (mu, nu) = (self.mu.rational()?, self.nu.rational()?);
        let (p, q) = (*mu.numer(), *mu.denom());
        let (s, t) = (*nu.numer(), *nu.denom());
        Some(ExactForm {
            p,
            q,
            s,
            t,
            den: s * t * q * q,
        })
    }

    pub fn is_rational(&self) -> bool {
        self.exact_form().is_some()
    }
}

/// Values on the generators l_1..l_4 of a homomorphism L -> Z_2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinStructure(pub [u8; 4]);

impl SpinStructure {
    pub fn new(e: [u8; 4]) -> Result<Self, Error> {
        if e.iter().any(|&b| b > 1) {
            return Err(Error::InvalidSpin(format!("entries must be 0 or 1, got {e:?}")));
        }
        Ok(SpinStructure(e))
    }

    pub fn validate(&self, r: u32) -> Result<(), Error> {
        if (r as u64 * self.0[2] as u64) % 2 != 0 {
            return Err(Error::InvalidSpin(format!(
                "r * eps3 = {} is odd, not a homomorphism",
                r as u64 * self.0[2] as u64
            )));
        }
        Ok(())
    }

    /// All spin structures that are valid for r.
    pub fn all_valid(r: u32) -> Vec<SpinStructure> {
        (0..16u8)
            .map(|b| SpinStructure([(b >> 3) & 1, (b >> 2) & 1, (b >> 1) & 1, b & 1]))
            .filter(|e| e.validate(r).is_ok())
            .collect()
    }
}

impl fmt::Display for SpinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.0;
        write!(f, "{}{}{}{}", e[0], e[1], e[2], e[3])
    }
}

impl FromStr for SpinStructure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let b: Vec<u8> = s
            .trim()
            .chars()
            .filter(|ch| !matches!(ch, ',' | ' ' | '(' | ')'))
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidSpin(format!("bad bit `{ch}` in `{s}`"))),
            })
            .collect::<Result<_, _>>()?;
        let arr: [u8; 4] = b
            .try_into()
            .map_err(|_| Error::InvalidSpin(format!("need four bits, got `{s}`")))?;
        SpinStructure::new(arr)
    }
}

impl Serialize for SpinStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpinStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Summand count of a spectral line; the zero line can carry infinitely many.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Multiplicity {
    Finite(u64),
    Infinite,
}

impl Multiplicity {
    fn add(self, o: Multiplicity) -> Multiplicity {
        match (self, o) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => Multiplicity::Finite(a + b),
            _ => Multiplicity::Infinite,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(n) => s.serialize_u64(*n),
            Multiplicity::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Multiplicity::Finite(n)),
            Raw::S(s) if s == "inf" => Ok(Multiplicity::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad multiplicity `{s}`"))),
        }
    }
}

/// One eigenvalue with its summand multiplicity (times dim Delta = 4).
///
/// For infinite lines `sources` lists only the labels inside the base enumeration window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub eigenvalue: Complex64,
    pub multiplicity: Multiplicity,
    pub sources: Vec<IrrepLabel>,
}

pub fn norm_sq(l: &LatticeParams, k: i64, ll: i64) -> f64 {
    let (mu, nu) = (l.mu_f64(), l.nu_f64());
    let (k, ll) = (k as f64, ll as f64);
    nu * k * k + (ll - mu * k).powi(2) / nu
}

pub fn norm_form(l: &LatticeParams, k: i64, ll: i64) -> f64 {
    norm_sq(l, k, ll).sqrt()
}

/// T_{mu,nu} = [[sqrt nu, mu / sqrt nu], [0, 1 / sqrt nu]].
pub fn t_matrix(l: &LatticeParams) -> [[f64; 2]; 2] {
    let sn = l.nu_f64().sqrt();
    [[sn, l.mu_f64() / sn], [0.0, 1.0 / sn]]
}

/// |T^{-1} (l, k)^T| with T inverted numerically.
pub fn norm_form_matrix(l: &LatticeParams, k: i64, ll: i64) -> f64 {
    let t = t_matrix(l);
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
    let v = [ll as f64, k as f64];
    let w0 = inv[0][0] * v[0] + inv[0][1] * v[1];
    let w1 = inv[1][0] * v[0] + inv[1][1] * v[1];
    w0.hypot(w1)
}

/// Parity classes: 0 = (k even, l even), 1 = (even, odd), 2 = (odd, odd), 3 = (odd, even).
pub fn parity_class(k: i64, l: i64) -> usize {
    match (k.rem_euclid(2), l.rem_euclid(2)) {
        (0, 0) => 0,
        (0, _) => 1,
        (_, 1) => 2,
        _ => 3,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlphaCounts {
    pub alpha: u64,
    pub alpha0: u64,
    pub alpha1: u64,
    pub alpha2: u64,
    /// (k odd, l even): used by no alpha_j, only after swapping eps1 and eps2.
    pub odd_even: u64,
}

impl AlphaCounts {
    fn bump(&mut self, class: usize) {
        self.alpha += 1;
        match class {
            0 => self.alpha0 += 1,
            1 => self.alpha1 += 1,
            2 => self.alpha2 += 1,
            _ => self.odd_even += 1,
        }
    }

    /// Count for the spin row (eps1, eps2), with (1,0) mapped to the odd/even class.
    pub fn for_row(&self, e1: u8, e2: u8) -> u64 {
        match (e1, e2) {
            (0, 0) => self.alpha0,
            (0, 1) => self.alpha1,
            (1, 1) => self.alpha2,
            _ => self.odd_even,
        }
    }
}

/// Lattice points with ||(k,l)||^2 <= a2_max (plus a relative slack), origin excluded.
///
/// From nu k^2 <= a2 and (l - mu k)^2 <= nu a2; columns are scanned in parallel.
fn points_within(l: &LatticeParams, a2_max: f64) -> Result<Vec<(i64, i64)>, Error> {
    let (mu, nu) = (l.mu_f64(), l.nu_f64());
    let a2 = a2_max * (1.0 + 1e-9) + 1e-12;
    let kmax = (a2 / nu).sqrt().floor() + 1.0;
    let lw = (a2 * nu).sqrt() + 1.0;
    if kmax > MAX_RADIUS || lw + mu.abs() * kmax > MAX_RADIUS {
        return Err(Error::EnumerationOverflow(format!(
            "box |k| <= {kmax:.3e}, |l - mu k| <= {lw:.3e} for a^2 <= {a2_max:.3e}"
        )));
    }
    let kmax = kmax as i64;
    let pts = (-kmax..=kmax)
        .into_par_iter()
        .flat_map_iter(|k| {
            let centre = mu * k as f64;
            let lo = (centre - lw).floor() as i64;
            let hi = (centre + lw).ceil() as i64;
            (lo..=hi)
                .filter(move |&ll| (k, ll) != (0, 0) && norm_sq(l, k, ll) <= a2)
                .map(move |ll| (k, ll))
        })
        .collect();
    Ok(pts)
}

/// Counts of lattice points of norm a, split by parity class.
///
/// `tol = 0` uses the exact integer form when mu and nu are rational; otherwise points
/// with |norm - a| <= tol are counted (tol = 0 on irrational input means 1e-9 * a).
pub fn alpha_counts(l: &LatticeParams, a: f64, tol: f64) -> Result<AlphaCounts, Error> {
    if !(a > 0.0) || !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("need a > 0 and tol >= 0 (a = {a}, tol = {tol})")));
    }
    let mut out = AlphaCounts::default();
    if let (0.0, Some(form)) = (tol, l.exact_form()) {
        let target_f = a * a * form.den as f64;
        let target = target_f.round();
        if (target_f - target).abs() > 1e-9 * target_f.max(1.0) {
            return Ok(out);
        }
        let target = target as i128;
        for (k, ll) in points_within(l, a * a)? {
            if form.eval(k, ll) == target {
                out.bump(parity_class(k, ll));
            }
        }
        return Ok(out);
    }
    let tol = if tol == 0.0 { GROUP_TOL * a } else { tol };
    let hi = a + tol;
    for (k, ll) in points_within(l, hi * hi)? {
        if (norm_form(l, k, ll) - a).abs() <= tol {
            out.bump(parity_class(k, ll));
        }
    }
    Ok(out)
}

/// Distinct norms up to a bound with their counts.
#[derive(Clone, Debug)]
pub struct NormGroup {
    pub a2: f64,
    /// Numerator of a^2 over the integer form's denominator, when exact.
    pub exact: Option<i128>,
    pub counts: AlphaCounts,
}

/// Groups the lattice by norm. The flag reports float grouping (irrational input).
pub fn norm_groups(l: &LatticeParams, a2_max: f64) -> Result<(Vec<NormGroup>, bool), Error> {
    let pts = points_within(l, a2_max)?;
    if let Some(form) = l.exact_form() {
        let limit = (a2_max * form.den as f64 * (1.0 + 1e-12)).floor() as i128;
        let mut keyed: Vec<(i128, usize)> = pts
            .iter()
            .map(|&(k, ll)| (form.eval(k, ll), parity_class(k, ll)))
            .filter(|&(n, _)| n <= limit)
            .collect();
        keyed.sort_unstable();
        let mut groups: Vec<NormGroup> = Vec::new();
        for (n, cls) in keyed {
            if groups.last().map(|g| g.exact) != Some(Some(n)) {
                groups.push(NormGroup {
                    a2: n as f64 / form.den as f64,
                    exact: Some(n),
                    counts: AlphaCounts::default(),
                });
            }
            groups.last_mut().unwrap().counts.bump(cls);
        }
        return Ok((groups, false));
    }
    let mut keyed: Vec<(f64, usize)> = pts
        .iter()
        .map(|&(k, ll)| (norm_sq(l, k, ll), parity_class(k, ll)))
        .filter(|&(v, _)| v <= a2_max * (1.0 + 1e-12))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut groups: Vec<NormGroup> = Vec::new();
    let mut anchor = f64::NAN;
    for (v, cls) in keyed {
        if groups.is_empty() || (v - anchor).abs() > GROUP_TOL * anchor {
            anchor = v;
            groups.push(NormGroup {
                a2: v,
                exact: None,
                counts: AlphaCounts::default(),
            });
        }
        groups.last_mut().unwrap().counts.bump(cls);
    }
    Ok((groups, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SetEntry {
    /// pi^2 a^2
    pub value: f64,
    pub a: f64,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSets {
    pub all: Vec<SetEntry>,
    pub a0: Vec<SetEntry>,
    pub a1: Vec<SetEntry>,
    pub a2: Vec<SetEntry>,
    pub grouped_by_tolerance: bool,
}

impl SpectralSets {
    pub fn row(&self, j: usize) -> &[SetEntry] {
        match j {
            0 => &self.a0,
            1 => &self.a1,
            _ => &self.a2,
        }
    }
}

/// A(mu,nu) and A_j(mu,nu) as sets of values pi^2 a^2 <= cutoff, ascending.
pub fn spectral_sets(l: &LatticeParams, cutoff: f64) -> Result<SpectralSets, Error> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let (groups, approx) = norm_groups(l, cutoff / (PI * PI))?;
    let entry = |g: &NormGroup, n: u64| SetEntry {
        value: PI * PI * g.a2,
        a: g.a2.sqrt(),
        count: n,
    };
    let pick = |f: fn(&AlphaCounts) -> u64| -> Vec<SetEntry> {
        groups
            .iter()
            .filter(|g| f(&g.counts) > 0)
            .map(|g| entry(g, f(&g.counts)))
            .collect()
    };
    Ok(SpectralSets {
        all: pick(|c| c.alpha),
        a0: pick(|c| c.alpha0),
        a1: pick(|c| c.alpha1),
        a2: pick(|c| c.alpha2),
        grouped_by_tolerance: approx,
    })
}

/// Index of a summand in the decomposition of the spinor L^2 space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultQuery {
    /// C(n / (4 pi kappa))
    C { n: i64 },
    /// S(a/2, K/(2 kappa)), K in 0..2 kappa
    S { a: f64, k: u32 },
    /// F(r m / 2, n / (4 pi kappa)), m != 0
    F { m: i64, n: i64 },
}

impl MultQuery {
    pub fn label(&self, l: &LatticeParams) -> Result<IrrepLabel, Error> {
        let kf = l.kappa as f64;
        match *self {
            MultQuery::C { n } => Ok(IrrepLabel::c(n as f64 / (4.0 * PI * kf))),
            MultQuery::S { a, k } => IrrepLabel::s(a / 2.0, k as f64 / (2.0 * kf)),
            MultQuery::F { m, n } => IrrepLabel::f(l.r as f64 * m as f64 / 2.0, n as f64 / (4.0 * PI * kf)),
        }
    }
}

fn bit(n: i64) -> u8 {
    n.rem_euclid(2) as u8
}

/// Multiplicity of a summand, without the factor 4.
pub fn multiplicities(l: &LatticeParams, eps: &SpinStructure, q: MultQuery) -> Result<u64, Error> {
    eps.validate(l.r)?;
    let e = eps.0;
    match q {
        MultQuery::C { n } => Ok(u64::from(e[..3] == [0, 0, 0] && e[3] == bit(n))),
        MultQuery::S { a, k } => {
            if k >= 2 * l.kappa {
                return Err(Error::InvalidArgument(format!("K = {k} outside 0..{}", 2 * l.kappa)));
            }
            if e[2] != 0 || e[3] != (k % 2) as u8 || (e[0], e[1]) == (1, 0) {
                return Ok(0);
            }
            Ok(alpha_counts(l, a, 0.0)?.for_row(e[0], e[1]))
        }
        MultQuery::F { m, n } => {
            if m == 0 || (bit(m), bit(n)) != (e[2], e[3]) {
                return Ok(0);
            }
            Ok(l.r as u64 * m.unsigned_abs() / 2)
        }
    }
}

/// Support of the beta Z part in one column of the spectrum table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaSet {
    FourBetaZ,
    TwoBetaZ,
    TwoBetaZNonzero,
    BetaOdd,
}

impl BetaSet {
    pub fn contains(&self, n: i64) -> bool {
        match self {
            BetaSet::FourBetaZ => n % 4 == 0,
            BetaSet::TwoBetaZ => n % 2 == 0,
            BetaSet::TwoBetaZNonzero => n % 2 == 0 && n != 0,
            BetaSet::BetaOdd => n % 2 != 0,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            BetaSet::FourBetaZ => "4bZ",
            BetaSet::TwoBetaZ => "2bZ",
            BetaSet::TwoBetaZNonzero => "2bZ\\0",
            BetaSet::BetaOdd => "b(2Z+1)",
        }
    }
}

/// One cell of the table of spec(-Omega): rows (eps1, eps2), columns (eps3, eps4 + kappa).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCell {
    pub row: (u8, u8),
    pub col: (u8, u8),
    /// j of the A_j part, if any.
    pub a_part: Option<usize>,
    pub beta_part: BetaSet,
}

pub const TABLE_ROWS: [(u8, u8); 3] = [(0, 0), (0, 1), (1, 1)];
pub const TABLE_COLS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

pub fn table_entry(row: (u8, u8), col: (u8, u8)) -> TableCell {
    let j = TABLE_ROWS.iter().position(|&r| r == row);
    let (a_part, beta_part) = match col {
        (0, 0) => (j, BetaSet::FourBetaZ),
        (0, _) if row == (0, 0) => (j, BetaSet::TwoBetaZ),
        (0, _) => (j, BetaSet::TwoBetaZNonzero),
        (_, 0) => (None, BetaSet::TwoBetaZ),
        _ => (None, BetaSet::BetaOdd),
    };
    TableCell {
        row,
        col,
        a_part,
        beta_part,
    }
}

/// Table cell for a normalized spin structure.
pub fn table_cell(l: &LatticeParams, eps: &SpinStructure) -> TableCell {
    let e = eps.0;
    table_entry((e[0], e[1]), (e[2], ((e[3] as u32 + l.kappa) % 2) as u8))
}

/// Swaps eps1 and eps2 when (eps1, eps2) = (1, 0), using mu' + i nu' = -1/(mu + i nu).
pub fn normalize_spin(l: &LatticeParams, eps: &SpinStructure) -> (LatticeParams, SpinStructure) {
    if (eps.0[0], eps.0[1]) != (1, 0) {
        return (*l, *eps);
    }
    let (mu, nu) = match (l.mu.rational(), l.nu.rational()) {
        (Some(m), Some(n)) => {
            let d = m * m + n * n;
            (Scalar::from_rational(-m / d), Scalar::from_rational(n / d))
        }
        _ => {
            let (m, n) = (l.mu_f64(), l.nu_f64());
            let d = m * m + n * n;
            (Scalar::Float(-m / d), Scalar::Float(n / d))
        }
    };
    let l2 = LatticeParams { mu, nu, ..*l };
    (l2, SpinStructure([0, 1, eps.0[2], eps.0[3]]))
}

struct Contribution {
    value: f64,
    mult: u64,
    label: IrrepLabel,
}

fn group_real(mut cs: Vec<Contribution>) -> Vec<(f64, u64, Vec<IrrepLabel>)> {
    cs.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<(f64, u64, Vec<IrrepLabel>)> = Vec::new();
    for ct in cs {
        match out.last_mut() {
            Some(g) if (ct.value - g.0).abs() <= GROUP_TOL * g.0.abs().max(1.0) => {
                g.1 += ct.mult;
                g.2.push(ct.label);
            }
            _ => out.push((ct.value, ct.mult, vec![ct.label])),
        }
    }
    out
}

/// Bottom-up: all labels with nonzero multiplicity inside window w, valued by casimir_value.
fn route_b_contributions(
    l: &LatticeParams,
    eps: &SpinStructure,
    cutoff: f64,
    w: i64,
    s_groups: &[NormGroup],
) -> Result<Vec<Contribution>, Error> {
    let kap = l.kappa as i64;
    let lim = cutoff * (1.0 + GROUP_TOL);
    let mut out = Vec::new();
    for n in -w..=w {
        let q = MultQuery::C { n };
        let mult = multiplicities(l, eps, q)?;
        if mult > 0 {
            let label = q.label(l)?;
            out.push(Contribution {
                value: 0.0 - casimir_value(&label),
                mult,
                label,
            });
        }
    }
    for m in (-w..=w).filter(|&m| m != 0) {
        for n in (-w - kap)..=(w + kap) {
            let q = MultQuery::F { m, n };
            let mult = multiplicities(l, eps, q)?;
            if mult == 0 {
                continue;
            }
            let label = q.label(l)?;
            let value = 0.0 - casimir_value(&label);
            if value.abs() <= lim {
                out.push(Contribution { value, mult, label });
            }
        }
    }
    for g in s_groups {
        let a = g.a2.sqrt();
        for k in 0..2 * l.kappa {
            let q = MultQuery::S { a, k };
            let mult = multiplicities(l, eps, q)?;
            if mult > 0 {
                let label = q.label(l)?;
                let value = -casimir_value(&label);
                if value <= lim {
                    out.push(Contribution { value, mult, label });
                }
            }
        }
    }
    Ok(out)
}

fn route_b(l: &LatticeParams, eps: &SpinStructure, cutoff: f64) -> Result<Vec<SpectralLine>, Error> {
    let (s_groups, _) = norm_groups(l, cutoff / (PI * PI))?;
    let w = (cutoff / l.beta()).ceil() as i64 + 1;
    let base = group_real(route_b_contributions(l, eps, cutoff, w, &s_groups)?);
    let wide = group_real(route_b_contributions(l, eps, cutoff, 2 * w, &s_groups)?);
    let mut lines = Vec::with_capacity(base.len());
    for (v, m, src) in base {
        let grows = wide
            .iter()
            .find(|g| (g.0 - v).abs() <= GROUP_TOL * v.abs().max(1.0))
            .map_or(true, |g| g.1 != m);
        lines.push(SpectralLine {
            eigenvalue: c(v, 0.0),
            multiplicity: if grows {
                Multiplicity::Infinite
            } else {
                Multiplicity::Finite(4 * m)
            },
            sources: src,
        });
    }
    Ok(lines)
}

/// Sum over positive divisors d of |n| with d = eps3 and n/d = eps4 + kappa (mod 2), of r d.
fn beta_multiplicity(l: &LatticeParams, e3: u8, col1: u8, n: i64) -> u64 {
    let na = n.unsigned_abs();
    (1..=na)
        .filter(|d| na % d == 0)
        .filter(|&d| (d % 2) as u8 == e3 && (n / d as i64).rem_euclid(2) as u8 == col1)
        .map(|d| l.r as u64 * d)
        .sum()
}

/// Table-driven: support from the table cell, F weights from the divisor sum.
fn route_a(l: &LatticeParams, eps: &SpinStructure, cutoff: f64) -> Result<Vec<(f64, Multiplicity)>, Error> {
    let cell = table_cell(l, eps);
    let beta = l.beta();
    let nmax = (cutoff / beta * (1.0 + GROUP_TOL)).floor() as i64;
    let mut out: Vec<(f64, Multiplicity)> = Vec::new();
    for n in -nmax..=nmax {
        let listed = cell.beta_part.contains(n);
        let weight = beta_multiplicity(l, cell.col.0, cell.col.1, n);
        if n == 0 {
            // C summands put 0 into the (0,0) row as well
            let from_c = eps.0[..3] == [0, 0, 0];
            let from_f = cell.col.1 == 0;
            if listed != (from_c || from_f) {
                return Err(Error::RouteMismatch(format!("zero line of cell {cell:?}")));
            }
            if listed {
                out.push((0.0, Multiplicity::Infinite));
            }
            continue;
        }
        if listed != (weight > 0) {
            return Err(Error::RouteMismatch(format!(
                "table says {} for {n} beta but divisor weight is {weight}",
                listed
            )));
        }
        if listed {
            out.push((beta * n as f64, Multiplicity::Finite(4 * weight)));
        }
    }
    if let Some(j) = cell.a_part {
        let sets = spectral_sets(l, cutoff)?;
        for e in sets.row(j) {
            out.push((e.value, Multiplicity::Finite(4 * l.kappa as u64 * e.count)));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    // an A_j value never equals a multiple of beta, but merge defensively
    let mut merged: Vec<(f64, Multiplicity)> = Vec::new();
    for (v, m) in out {
        match merged.last_mut() {
            Some(g) if (v - g.0).abs() <= GROUP_TOL * v.abs().max(1.0) => g.1 = g.1.add(m),
            _ => merged.push((v, m)),
        }
    }
    Ok(merged)
}

#[derive(Clone, Debug, Serialize)]
pub struct CasimirSpectrum {
    pub lines: Vec<SpectralLine>,
    pub cell: TableCell,
    pub normalized: Option<(LatticeParams, SpinStructure)>,
    pub grouped_by_tolerance: bool,
}

/// spec(-Omega) up to |lambda| <= cutoff, from the table and from the multiplicities;
/// disagreement is an error.
pub fn casimir_spectrum_detailed(
    l: &LatticeParams,
    eps: &SpinStructure,
    cutoff: f64,
) -> Result<CasimirSpectrum, Error> {
    eps.validate(l.r)?;
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let (ln, en) = normalize_spin(l, eps);
    let lines = route_b(&ln, &en, cutoff)?;
    let table = route_a(&ln, &en, cutoff)?;
    if lines.len() != table.len() {
        return Err(Error::RouteMismatch(format!(
            "{} lines from multiplicities, {} from the table",
            lines.len(),
            table.len()
        )));
    }
    for (x, (v, m)) in lines.iter().zip(&table) {
        if (x.eigenvalue.re - v).abs() > GROUP_TOL * v.abs().max(1.0) || x.multiplicity != *m {
            return Err(Error::RouteMismatch(format!(
                "({}, {}) vs table ({v}, {m})",
                x.eigenvalue.re, x.multiplicity
            )));
        }
    }
    Ok(CasimirSpectrum {
        lines,
        cell: table_cell(&ln, &en),
        normalized: (en != *eps).then_some((ln, en)),
        grouped_by_tolerance: !ln.is_rational(),
    })
}

pub fn casimir_spectrum(l: &LatticeParams, eps: &SpinStructure, cutoff: f64) -> Result<Vec<SpectralLine>, Error> {
    Ok(casimir_spectrum_detailed(l, eps, cutoff)?.lines)
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn close_complex(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= GROUP_TOL * a.norm().max(1.0)
}

fn group_complex(mut cs: Vec<(Complex64, u64, IrrepLabel)>) -> Vec<(Complex64, u64, Vec<IrrepLabel>)> {
    cs.sort_by(|a, b| cmp_complex(&a.0, &b.0));
    let mut out: Vec<(Complex64, u64, Vec<IrrepLabel>)> = Vec::new();
    for (z, m, lab) in cs {
        match out.last_mut() {
            Some(g) if close_complex(g.0, z) => {
                g.1 += m;
                if !g.2.contains(&lab) {
                    g.2.push(lab);
                }
            }
            _ => out.push((z, m, vec![lab])),
        }
    }
    out
}

/// Point spectrum of D^t, |z|^2 <= cutoff.
///
/// t = 1/3 takes square roots of spec(-Omega) (branch i sqrt|lambda| for lambda < 0).
/// Other t aggregate the per-summand values of dt_block_eigenvalues; multiplicities count
/// summands carrying the value, times 4.
pub fn dirac_point_spectrum(
    l: &LatticeParams,
    eps: &SpinStructure,
    t: f64,
    cutoff: f64,
) -> Result<Vec<SpectralLine>, Error> {
    if (3.0 * t - 1.0).abs() <= 1e-15 {
        let mut out = Vec::new();
        for line in casimir_spectrum(l, eps, cutoff)? {
            let z = sqrt_signed(line.eigenvalue.re);
            if z == ZERO {
                out.push(SpectralLine { eigenvalue: ZERO, ..line });
            } else {
                out.push(SpectralLine { eigenvalue: z, ..line.clone() });
                out.push(SpectralLine { eigenvalue: -z, ..line });
            }
        }
        out.sort_by(|a, b| cmp_complex(&a.eigenvalue, &b.eigenvalue));
        return Ok(out);
    }
    dirac_by_labels(l, eps, t, cutoff)
}

/// Label-by-label aggregation of dt_block_eigenvalues, valid for every t.
pub fn dirac_by_labels(
    l: &LatticeParams,
    eps: &SpinStructure,
    t: f64,
    cutoff: f64,
) -> Result<Vec<SpectralLine>, Error> {
    eps.validate(l.r)?;
    let (l, eps) = normalize_spin(l, eps);
    let beta = l.beta();
    let s = l.kappa as f64 * (3.0 * t - 1.0);
    // smallest nonzero |q +- s| over integers q
    let frac = (s - s.round()).abs();
    let delta = if frac < 1e-12 { 1.0 } else { frac };
    if delta < 1e-6 {
        return Err(Error::EnumerationOverflow(format!(
            "kappa (3t - 1) = {s} is within {delta:.1e} of an integer; label window too large"
        )));
    }
    let mwin = (cutoff / (beta * delta)).ceil() as i64 + 1;
    let (s_groups, _) = norm_groups(&l, cutoff / (PI * PI))?;
    let collect = |mw: i64, cw: i64| -> Result<Vec<(Complex64, u64, IrrepLabel)>, Error> {
        let lim = cutoff * (1.0 + GROUP_TOL);
        let mut out = Vec::new();
        let mut push = |lab: IrrepLabel, mult: u64| {
            for z in dt_block_eigenvalues(&lab, t) {
                if z.norm_sqr() <= lim {
                    out.push((z, mult, lab));
                }
            }
        };
        for n in -cw..=cw {
            let q = MultQuery::C { n };
            let mult = multiplicities(&l, &eps, q)?;
            if mult > 0 {
                push(q.label(&l)?, mult);
            }
        }
        let kap = l.kappa as i64;
        for m in (-mw..=mw).filter(|&m| m != 0) {
            let qw = (cutoff / (beta * m.abs() as f64) + s.abs()).ceil() as i64 + 1;
            // q = n + kappa for m > 0, n - kappa for m < 0
            let shift = if m > 0 { -kap } else { kap };
            for q in -qw..=qw {
                let qq = MultQuery::F { m, n: q + shift };
                let mult = multiplicities(&l, &eps, qq)?;
                if mult > 0 {
                    push(qq.label(&l)?, mult);
                }
            }
        }
        for g in &s_groups {
            let a = g.a2.sqrt();
            for k in 0..2 * l.kappa {
                let qq = MultQuery::S { a, k };
                let mult = multiplicities(&l, &eps, qq)?;
                if mult > 0 {
                    push(qq.label(&l)?, mult);
                }
            }
        }
        Ok(out)
    };
    let cw = (cutoff / beta).ceil() as i64 + 1;
    let base = group_complex(collect(mwin, cw)?);
    let wide = group_complex(collect(2 * mwin, 2 * cw)?);
    let lines = base
        .into_iter()
        .map(|(z, m, src)| {
            let grows = wide.iter().find(|g| close_complex(g.0, z)).map_or(true, |g| g.1 != m);
            SpectralLine {
                eigenvalue: z,
                multiplicity: if grows {
                    Multiplicity::Infinite
                } else {
                    Multiplicity::Finite(4 * m)
                },
                sources: src,
            }
        })
        .collect();
    Ok(lines)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    SymmetricWithZero,
    SymmetricWithoutZero,
    Asymmetric,
}

/// Classification from the spin structure alone: symmetric iff eps3 = 1.
pub fn symmetry_check(l: &LatticeParams, eps: &SpinStructure) -> Result<SymmetryClass, Error> {
    eps.validate(l.r)?;
    let e = eps.0;
    Ok(match (e[2], (e[3] as u32 + l.kappa) % 2) {
        (0, _) => SymmetryClass::Asymmetric,
        (_, 0) => SymmetryClass::SymmetricWithZero,
        _ => SymmetryClass::SymmetricWithoutZero,
    })
}

/// Classification read off a computed spectrum: closed under negation (with equal
/// multiplicities), and whether 0 occurs.
pub fn negation_closure(lines: &[SpectralLine]) -> SymmetryClass {
    let closed = lines.iter().all(|x| {
        lines
            .iter()
            .any(|y| close_complex(y.eigenvalue, -x.eigenvalue) && y.multiplicity == x.multiplicity)
    });
    let zero = lines.iter().any(|x| x.eigenvalue.norm() <= GROUP_TOL);
    match (closed, zero) {
        (true, true) => SymmetryClass::SymmetricWithZero,
        (true, false) => SymmetryClass::SymmetricWithoutZero,
        _ => SymmetryClass::Asymmetric,
    }
}

/// v = m (n - u m) for the shift parameter u, without cancellation for exact input.
fn shifted_product(u: &Scalar, m: i128, n: i128) -> f64 {
    match u {
        Scalar::Exact(s) if s.is_rational() => {
            let (p, q) = (*s.coef.numer(), *s.coef.denom());
            (m * (q * n - p * m)) as f64 / q as f64
        }
        Scalar::Exact(s) => {
            let (p, q, rad) = (*s.coef.numer(), *s.coef.denom(), s.radicand as i128);
            let uf = s.value();
            if (n >= 0) == (uf >= 0.0) && n != 0 {
                // n - u m = (Q^2 n^2 - P^2 N m^2) / (Q (Q n + P sqrt(N) m))
                let num = q * q * n * n - p * p * rad * m * m;
                let den = q as f64 * (q as f64 * n as f64 + p as f64 * (rad as f64).sqrt() * m as f64);
                m as f64 * num as f64 / den
            } else {
                m as f64 * (n as f64 - uf * m as f64)
            }
        }
        Scalar::Float(x) => m as f64 * (n as f64 - x * m as f64),
    }
}

/// Pell-type value Q^2 n^2 - P^2 N m^2 of a pair, for surd u = (P/Q) sqrt N.
pub fn pell_value(u: &Scalar, m: i128, n: i128) -> Option<i128> {
    match u {
        Scalar::Exact(s) => {
            let (p, q) = (*s.coef.numer(), *s.coef.denom());
            Some(q * q * n * n - p * p * s.radicand as i128 * m * m)
        }
        Scalar::Float(_) => None,
    }
}

/// Limit of m (n - u m) along pairs with fixed Pell value I: I / (2 Q^2 u).
pub fn product_limit(u: &Scalar, pell: i128) -> Option<f64> {
    match u {
        Scalar::Exact(s) if !s.is_rational() => {
            let q = *s.coef.denom() as f64;
            Some(pell as f64 / (2.0 * q * q * s.value()))
        }
        _ => None,
    }
}

pub const DEFAULT_SHIFT_SEARCH: i128 = 200_000;

/// Eigenvalues -4 beta m'(n' - u m') of Omega on the shifted quotient, with |.| <= 8 beta.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftedSpectrum {
    /// Sorted by absolute value, then by value.
    pub values: Vec<f64>,
    pub pairs: Vec<(i128, i128)>,
    pub rational: bool,
    pub m_max: i128,
}

fn check_shift_spin(l: &LatticeParams, eps: &SpinStructure) -> Result<(), Error> {
    eps.validate(l.r)?;
    if eps.0[2] != 0 || (eps.0[3] as u32 % 2) != l.kappa % 2 {
        return Err(Error::InvalidSpin(format!(
            "shifted spectrum needs eps3 = 0 and eps4 = kappa mod 2, got {eps}"
        )));
    }
    Ok(())
}

fn is_rational_shift(u: &Scalar) -> Result<bool, Error> {
    Ok(match u {
        Scalar::Exact(s) => s.is_rational(),
        Scalar::Float(x) if *x == 0.0 => true,
        Scalar::Float(x) => crate::surd::convergents(&Scalar::Float(x.abs()), 64)?.terminated,
    })
}

/// All values in [-8 beta, 8 beta] with m' <= m_max.
pub fn shifted_values(l: &LatticeParams, u: &Scalar, m_max: i128) -> Vec<(f64, i128, i128)> {
    let beta = l.beta();
    let uf = u.value();
    let mut out = Vec::new();
    for m in 1..=m_max {
        let centre = uf * m as f64;
        let w = 2.0 / m as f64 + 1.0;
        let lo = (centre - w).floor() as i128;
        let hi = (centre + w).ceil() as i128;
        for n in lo..=hi {
            let v = shifted_product(u, m, n);
            if v.abs() <= 2.0 {
                out.push((-4.0 * beta * v, m, n));
            }
        }
    }
    out
}

/// The `count` eigenvalues of smallest absolute value; rational u is reported, not refused.
pub fn shifted_spectrum(
    l: &LatticeParams,
    eps: &SpinStructure,
    u: &Scalar,
    count: usize,
    m_max: i128,
) -> Result<ShiftedSpectrum, Error> {
    check_shift_spin(l, eps)?;
    let rational = is_rational_shift(u)?;
    let mut all = shifted_values(l, u, m_max);
    all.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)));
    let mut values: Vec<f64> = Vec::new();
    let mut pairs = Vec::new();
    for (v, m, n) in all {
        if values.iter().any(|w| (w - v).abs() <= 1e-12 * v.abs().max(1.0)) {
            continue;
        }
        values.push(v);
        pairs.push((m, n));
        if values.len() == count {
            break;
        }
    }
    Ok(ShiftedSpectrum {
        values,
        pairs,
        rational,
        m_max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentPoint {
    pub m: i128,
    pub n: i128,
    pub pell: Option<i128>,
    /// -4 beta m (n - u m), an eigenvalue of Omega.
    pub omega_eigenvalue: f64,
    /// Its negative, an eigenvalue of -Omega.
    pub neg_omega_eigenvalue: f64,
    /// Limit of omega_eigenvalue along pairs with the same Pell value.
    pub limit: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccumulationReport {
    pub utilde: Scalar,
    pub beta: f64,
    pub rational: bool,
    pub warning: Option<String>,
    pub convergents: Vec<ConvergentPoint>,
    pub cluster: Vec<f64>,
    /// Accumulation points of the Omega eigenvalues realized by the listed convergents.
    pub accumulation_points: Vec<f64>,
    /// Distinct Omega and -Omega eigenvalues in [-8 beta, 0).
    pub omega_in_window: usize,
    pub neg_omega_in_window: usize,
    pub m_max: i128,
}

pub fn accumulation_report(
    l: &LatticeParams,
    eps: &SpinStructure,
    u: &Scalar,
    count: usize,
    m_max: i128,
) -> Result<AccumulationReport, Error> {
    let spec = shifted_spectrum(l, eps, u, count, m_max)?;
    let beta = l.beta();
    let all = shifted_values(l, u, m_max);
    let distinct_in = |sign: f64| {
        let mut v: Vec<f64> = all
            .iter()
            .map(|x| sign * x.0)
            .filter(|&x| (-8.0 * beta..0.0).contains(&x))
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        v.len()
    };
    let mut convergents = Vec::new();
    let mut points: Vec<f64> = Vec::new();
    if !spec.rational && u.value() != 0.0 {
        let sign = u.value().signum() as i128;
        let absu = match u {
            Scalar::Exact(s) => Scalar::Exact(crate::surd::Surd { coef: if s.coef < Rational::from_integer(0) { -s.coef } else { s.coef }, ..*s }),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        };
        let cf = crate::surd::convergents(&absu, 64)?;
        for &(h, k) in &cf.convergents {
            if k > m_max {
                break;
            }
            // (m', n') = (k, h) for |u|, n' flips with the sign of u
            let (m, n) = (k, sign * h);
            let v = shifted_product(u, m, n);
            let pell = pell_value(u, m, n);
            let limit = pell.and_then(|p| product_limit(u, p)).map(|x| -4.0 * beta * x);
            let omega = -4.0 * beta * v;
            if let Some(x) = limit {
                if !points.iter().any(|p| (p - x).abs() <= 1e-12 * beta) {
                    points.push(x);
                }
            }
            convergents.push(ConvergentPoint {
                m,
                n,
                pell,
                omega_eigenvalue: omega,
                neg_omega_eigenvalue: -omega,
                limit,
                distance: limit.map(|x| (omega - x).abs()),
            });
        }
    }
    points.sort_by(f64::total_cmp);
    Ok(AccumulationReport {
        utilde: *u,
        beta,
        rational: spec.rational,
        warning: spec
            .rational
            .then(|| format!("u = {u} is rational to working precision; no accumulation expected")),
        convergents,
        cluster: spec.values,
        accumulation_points: points,
        omega_in_window: distinct_in(1.0),
        neg_omega_in_window: distinct_in(-1.0),
        m_max,
    })
}

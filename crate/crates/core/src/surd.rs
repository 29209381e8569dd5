//! Exact inputs: rationals and quadratic surds q * sqrt(N).
//!
//! Accepted tokens: `p`, `p/q`, decimal literals (read exactly), `sqrtN`, `p/q*sqrtN`,
//! with an optional leading minus. Anything else that parses as f64 becomes an opaque float.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub type Rational = Ratio<i128>;

/// coef * sqrt(radicand) with radicand squarefree (1 for rationals).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Surd {
    pub coef: Rational,
    pub radicand: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Exact(Surd),
    Float(f64),
}

fn squarefree_split(n: u64) -> (u64, u64) {
    // n = k^2 * m with m squarefree
    let (mut k, mut m, mut rest) = (1u64, 1u64, n);
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            m *= p;
        }
        p += 1;
    }
    (k, m * rest)
}

impl Surd {
    pub fn new(coef: Rational, radicand: u64) -> Self {
        if radicand == 0 || coef == Rational::from_integer(0) {
            return Surd {
                coef: Rational::from_integer(0),
                radicand: 1,
            };
        }
        let (k, m) = squarefree_split(radicand);
        Surd {
            coef: coef * Rational::from_integer(k as i128),
            radicand: m,
        }
    }

    pub fn rational(q: Rational) -> Self {
        Surd::new(q, 1)
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }

    pub fn value(&self) -> f64 {
        (*self.coef.numer() as f64 / *self.coef.denom() as f64) * (self.radicand as f64).sqrt()
    }
}

impl Scalar {
    pub fn value(&self) -> f64 {
        match self {
            Scalar::Exact(s) => s.value(),
            Scalar::Float(x) => *x,
        }
    }

    pub fn rational(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(s) if s.is_rational() => Some(s.coef),
            _ => None,
        }
    }

    pub fn from_rational(q: Rational) -> Self {
        Scalar::Exact(Surd::rational(q))
    }

    pub fn from_int(n: i128) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

fn parse_int(s: &str) -> Option<i128> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (parse_int(p)?, parse_int(q)?);
        return (q != 0).then(|| Rational::new(p, q));
    }
    if let Some((i, f)) = s.split_once('.') {
        if f.len() > 18 || (i.is_empty() && f.is_empty()) {
            return None;
        }
        let ip = if i.is_empty() { 0 } else { parse_int(i)? };
        let fp = if f.is_empty() { 0 } else { parse_int(f)? };
        let den = 10i128.checked_pow(f.len() as u32)?;
        return Some(Rational::new(ip.checked_mul(den)?.checked_add(fp)?, den));
    }
    parse_int(s).map(Rational::from_integer)
}

fn parse_sqrt(s: &str) -> Option<u64> {
    s.strip_prefix("sqrt")
        .map(|r| r.trim_start_matches('(').trim_end_matches(')'))
        .and_then(|r| r.parse().ok())
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(tok: &str) -> Result<Self, Error> {
        let t = tok.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let sign = Rational::from_integer(if neg { -1 } else { 1 });
        if let Some(n) = parse_sqrt(body) {
            return Ok(Scalar::Exact(Surd::new(sign, n)));
        }
        if let Some((q, r)) = body.split_once('*') {
            if let (Some(q), Some(n)) = (parse_rational(q), parse_sqrt(r)) {
                return Ok(Scalar::Exact(Surd::new(sign * q, n)));
            }
            return Err(Error::Surd(tok.into()));
        }
        if let Some(q) = parse_rational(body) {
            return Ok(Scalar::Exact(Surd::rational(sign * q)));
        }
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Scalar::Float)
            .ok_or_else(|| Error::Surd(tok.into()))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Exact(s) => {
                let q = s.coef;
                let qs = if *q.denom() == 1 {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                };
                if s.radicand == 1 {
                    write!(f, "{qs}")
                } else if q == Rational::from_integer(1) {
                    write!(f, "sqrt{}", s.radicand)
                } else if q == Rational::from_integer(-1) {
                    write!(f, "-sqrt{}", s.radicand)
                } else {
                    write!(f, "{qs}*sqrt{}", s.radicand)
                }
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Continued-fraction convergents (h, k) with h/k -> x, for x > 0.
///
/// Exact for surd inputs via the integer recurrence on (p + sqrt D)/q; for floats the
/// expansion stops once the remainder is below working precision, and `terminated`
/// reports that (x is then rational to working precision).
#[derive(Clone, Debug)]
pub struct Convergents {
    pub terms: Vec<i128>,
    pub convergents: Vec<(i128, i128)>,
    pub terminated: bool,
}

pub fn convergents(x: &Scalar, max_terms: usize) -> Result<Convergents, Error> {
    if x.value() <= 0.0 {
        return Err(Error::InvalidArgument("continued fraction needs x > 0".into()));
    }
    let mut terms = Vec::new();
    let mut terminated = false;
    match x {
        Scalar::Exact(s) if s.is_rational() => {
            let (mut a, mut b) = (*s.coef.numer(), *s.coef.denom());
            while b != 0 && terms.len() < max_terms {
                let (q, r) = a.div_mod_floor(&b);
                terms.push(q);
                a = b;
                b = r;
            }
            terminated = b == 0;
        }
        Scalar::Exact(s) => {
            // x = (P/Q) sqrt N = (0 + sqrt(P^2 N Q^2)) / Q^2
            let (p, q) = (*s.coef.numer(), *s.coef.denom());
            let d = p * p * s.radicand as i128 * q * q;
            let (mut pp, mut qq) = (0i128, q * q);
            let sd = isqrt(d);
            while terms.len() < max_terms {
                let a = Integer::div_floor(&(pp + sd), &qq);
                terms.push(a);
                pp = a * qq - pp;
                let next = d - pp * pp;
                if next % qq != 0 {
                    return Err(Error::Surd("continued fraction recurrence lost exactness".into()));
                }
                qq = next / qq;
                if terms.len() > 2 && (a > 1 << 40) {
                    break;
                }
            }
        }
        Scalar::Float(v) => {
            let mut y = *v;
            while terms.len() < max_terms {
                let a = y.floor();
                terms.push(a as i128);
                let fr = y - a;
                if fr < 1e-9 * y.max(1.0) {
                    terminated = true;
                    break;
                }
                y = 1.0 / fr;
                if y > 1e12 {
                    terminated = true;
                    break;
                }
            }
        }
    }
    let mut conv = Vec::with_capacity(terms.len());
    let (mut h0, mut h1) = (1i128, terms[0]);
    let (mut k0, mut k1) = (0i128, 1i128);
    conv.push((h1, k1));
    for &a in &terms[1..] {
        let (Some(h), Some(k)) = (
            a.checked_mul(h1).and_then(|v| v.checked_add(h0)),
            a.checked_mul(k1).and_then(|v| v.checked_add(k0)),
        ) else {
            break;
        };
        h0 = h1;
        h1 = h;
        k0 = k1;
        k1 = k;
        conv.push((h1, k1));
    }
    Ok(Convergents {
        terms,
        convergents: conv,
        terminated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i128, r: i128) -> Rational {
        Rational::new(p, r)
    }

    #[test]
    fn parse_tokens() {
        assert_eq!("1/2".parse::<Scalar>().unwrap(), Scalar::from_rational(q(1, 2)));
        assert_eq!("0.5".parse::<Scalar>().unwrap(), Scalar::from_rational(q(1, 2)));
        assert_eq!("-3".parse::<Scalar>().unwrap(), Scalar::from_int(-3));
        assert_eq!(
            "sqrt8".parse::<Scalar>().unwrap(),
            Scalar::Exact(Surd { coef: q(2, 1), radicand: 2 })
        );
        assert_eq!(
            "3/4*sqrt12".parse::<Scalar>().unwrap(),
            Scalar::Exact(Surd { coef: q(3, 2), radicand: 3 })
        );
        assert_eq!("sqrt9".parse::<Scalar>().unwrap(), Scalar::from_int(3));
        assert!(matches!("1e-3".parse::<Scalar>().unwrap(), Scalar::Float(_)));
        assert!("abc".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("2*x".parse::<Scalar>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        for t in ["1/2", "sqrt2", "-sqrt5", "3/2*sqrt3", "7"] {
            let s: Scalar = t.parse().unwrap();
            assert_eq!(s.to_string(), t);
            assert_eq!(s.to_string().parse::<Scalar>().unwrap(), s);
        }
    }

    #[test]
    fn sqrt2_convergents() {
        let c = convergents(&"sqrt2".parse().unwrap(), 8).unwrap();
        assert_eq!(c.terms, vec![1, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(&c.convergents[..6], &[(1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70)]);
        assert!(!c.terminated);
    }

    #[test]
    fn scaled_surd_convergents() {
        // sqrt5 = [2; 4, 4, ...]; (1/2) sqrt 5 = 1.118... = [1; 8, 2, 8, 2, ...]
        let c = convergents(&"sqrt5".parse().unwrap(), 5).unwrap();
        assert_eq!(c.terms, vec![2, 4, 4, 4, 4]);
        let c = convergents(&"1/2*sqrt5".parse().unwrap(), 5).unwrap();
        assert_eq!(c.terms, vec![1, 8, 2, 8, 2]);
    }

    #[test]
    fn rational_terminates() {
        let c = convergents(&"0.5".parse().unwrap(), 10).unwrap();
        assert!(c.terminated);
        assert_eq!(c.terms, vec![0, 2]);
        let c = convergents(&Scalar::Float(0.25), 10).unwrap();
        assert!(c.terminated);
    }
}

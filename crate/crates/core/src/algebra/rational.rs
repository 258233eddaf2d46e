//! Exact rationals and the precision bound used by every truncated object.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use num_rational::Ratio;

/// Exact rational number; exponents and valuations live here.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Ratio::from_integer(n)
}

/// Smallest integer `>= x`.
pub fn ceil_int(x: Q) -> i64 {
    x.ceil().to_integer()
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Upper end of the known part of a truncated object.
///
/// `Upto(n)` means "known modulo terms of exponent >= n"; `Exact` means no
/// truncation happened. `Upto(_) < Exact`, so `min` picks the binding bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prec {
    Upto(Q),
    Exact,
}

impl Prec {
    pub fn finite(self) -> Option<Q> {
        match self {
            Prec::Upto(x) => Some(x),
            Prec::Exact => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Prec::Exact)
    }

    /// True if an exponent `x` lies strictly inside the known range.
    pub fn covers(self, x: Q) -> bool {
        match self {
            Prec::Upto(n) => x < n,
            Prec::Exact => true,
        }
    }

    pub fn scale(self, k: Q) -> Prec {
        match self {
            Prec::Upto(n) => Prec::Upto(n * k),
            Prec::Exact => Prec::Exact,
        }
    }

    pub fn min(self, other: Prec) -> Prec {
        std::cmp::min(self, other)
    }
}

impl PartialOrd for Prec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Prec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Prec::Upto(a), Prec::Upto(b)) => a.cmp(b),
            (Prec::Upto(_), Prec::Exact) => Ordering::Less,
            (Prec::Exact, Prec::Upto(_)) => Ordering::Greater,
            (Prec::Exact, Prec::Exact) => Ordering::Equal,
        }
    }
}

impl Add<Q> for Prec {
    type Output = Prec;
    fn add(self, rhs: Q) -> Prec {
        match self {
            Prec::Upto(n) => Prec::Upto(n + rhs),
            Prec::Exact => Prec::Exact,
        }
    }
}

impl fmt::Display for Prec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prec::Upto(n) => write!(f, "O(u^{n})"),
            Prec::Exact => write!(f, "exact"),
        }
    }
}

/// Serialize a rational as a `[num, den]` pair.
pub fn q_to_json(x: Q) -> serde_json::Value {
    serde_json::json!([*x.numer(), *x.denom()])
}

/// Parse a rational from an integer, an `"a/b"` string or a `[a, b]` pair.
pub fn q_from_json(v: &serde_json::Value) -> Option<Q> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(qi),
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Array(a) if a.len() == 2 => {
            let n = a[0].as_i64()?;
            let d = a[1].as_i64()?;
            (d != 0).then(|| q(n, d))
        }
        _ => None,
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let n: i64 = a.trim().parse().ok()?;
            let d: i64 = b.trim().parse().ok()?;
            (d != 0).then(|| q(n, d))
        }
        None => s.parse().ok().map(qi),
    }
}

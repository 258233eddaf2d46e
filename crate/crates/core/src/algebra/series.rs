//! Truncated power series in `u` over a finite field, with small matrix helpers.

use std::fmt;

use crate::error::{Error, Result};

use super::field::{Embedding, FFElem, Field};
use super::rational::{qi, Prec};

/// Element of `k[[u]]` known modulo `u^prec` (or exactly).
///
/// Coefficients are stored densely from `u^0`; trailing zeros are trimmed
/// and every stored index is below the precision.
#[derive(Clone, PartialEq, Eq)]
pub struct USeries {
    field: Field,
    c: Vec<FFElem>,
    prec: Prec,
}

fn int_prec(p: Prec) -> Option<i64> {
    p.finite().map(|x| x.to_integer())
}

impl USeries {
    pub fn new(field: &Field, coeffs: Vec<FFElem>, prec: Prec) -> USeries {
        let mut s = USeries { field: field.clone(), c: coeffs, prec };
        s.normalize();
        s
    }

    /// Series from `(exponent, coefficient)` pairs; repeated exponents add.
    pub fn from_terms(field: &Field, terms: &[(usize, FFElem)], prec: Prec) -> USeries {
        let top = terms.iter().map(|t| t.0 + 1).max().unwrap_or(0);
        let mut c = vec![field.zero(); top];
        for (k, a) in terms {
            c[*k] = &c[*k] + a;
        }
        USeries::new(field, c, prec)
    }

    pub fn zero(field: &Field, prec: Prec) -> USeries {
        USeries { field: field.clone(), c: Vec::new(), prec }
    }

    pub fn constant(a: FFElem, prec: Prec) -> USeries {
        let field = a.field().clone();
        USeries::new(&field, vec![a], prec)
    }

    pub fn one(field: &Field, prec: Prec) -> USeries {
        USeries::constant(field.one(), prec)
    }

    /// `a·u^k`.
    pub fn monomial(a: FFElem, k: usize, prec: Prec) -> USeries {
        let field = a.field().clone();
        let mut c = vec![field.zero(); k];
        c.push(a);
        USeries::new(&field, c, prec)
    }

    fn normalize(&mut self) {
        if let Some(n) = int_prec(self.prec) {
            self.c.truncate(n.max(0) as usize);
        }
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    /// Integer precision, `None` when exact.
    pub fn prec_int(&self) -> Option<i64> {
        int_prec(self.prec)
    }

    pub fn with_prec(&self, prec: Prec) -> USeries {
        USeries::new(&self.field, self.c.clone(), self.prec.min(prec))
    }

    /// Truncate modulo `u^n`.
    pub fn truncate(&self, n: i64) -> USeries {
        self.with_prec(Prec::Upto(qi(n)))
    }

    pub fn coeffs(&self) -> &[FFElem] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> FFElem {
        self.c.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Nonzero `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &FFElem)> {
        self.c.iter().enumerate().filter(|(_, a)| !a.is_zero())
    }

    /// `None` when no nonzero term is known.
    pub fn valuation(&self) -> Option<i64> {
        self.c.iter().position(|a| !a.is_zero()).map(|k| k as i64)
    }

    /// Lower bound for the valuation; `None` means exactly zero.
    fn val_bound(&self) -> Option<i64> {
        self.valuation().or_else(|| self.prec_int())
    }

    /// True when no nonzero term is visible (exactly zero or below precision).
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_exact()
    }

    pub fn leading(&self) -> Option<FFElem> {
        self.valuation().map(|k| self.c[k as usize].clone())
    }

    pub fn add(&self, o: &USeries) -> USeries {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect();
        USeries::new(&self.field, c, self.prec.min(o.prec))
    }

    pub fn sub(&self, o: &USeries) -> USeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> USeries {
        USeries { field: self.field.clone(), c: self.c.iter().map(|a| -a).collect(), prec: self.prec }
    }

    pub fn scale(&self, a: &FFElem) -> USeries {
        USeries::new(&self.field, self.c.iter().map(|x| x * a).collect(), self.prec)
    }

    pub fn mul(&self, o: &USeries) -> USeries {
        let prec = match (self.val_bound(), o.val_bound()) {
            (None, _) | (_, None) => {
                // one factor is exactly zero
                return USeries::zero(&self.field, Prec::Exact);
            }
            (Some(vf), Some(vg)) => (self.prec + qi(vg)).min(o.prec + qi(vf)),
        };
        let cap = int_prec(prec).map(|n| n.max(0) as usize);
        let len = (self.c.len() + o.c.len()).saturating_sub(1);
        let len = cap.map_or(len, |n| len.min(n));
        let mut c = vec![self.field.zero(); len];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        USeries::new(&self.field, c, prec)
    }

    pub fn pow(&self, mut e: u64) -> USeries {
        let mut acc = USeries::one(&self.field, Prec::Exact);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// Multiplicative inverse of a unit, at the unit's precision.
    pub fn invert(&self) -> Result<USeries> {
        if self.valuation() != Some(0) {
            return Err(Error::NonUnit(format!("{self} has positive valuation")));
        }
        let Some(n) = self.prec_int() else {
            if self.c.len() == 1 {
                return Ok(USeries::constant(self.c[0].inv()?, Prec::Exact));
            }
            return Err(Error::PrecisionExhausted(format!(
                "inverse of the exact non-constant series {self} needs a truncation"
            )));
        };
        self.invert_to(n)
    }

    /// Inverse modulo `u^n` (requires `n <= prec`).
    pub fn invert_to(&self, n: i64) -> Result<USeries> {
        if self.valuation() != Some(0) {
            return Err(Error::NonUnit(format!("{self} has positive valuation")));
        }
        let n = match self.prec_int() {
            Some(m) => n.min(m),
            None => n,
        }
        .max(0) as usize;
        let inv0 = self.c[0].inv()?;
        let mut b: Vec<FFElem> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = if k == 0 { self.field.one() } else { self.field.zero() };
            for j in 1..=k.min(self.c.len().saturating_sub(1)) {
                acc = &acc - &(&self.c[j] * &b[k - j]);
            }
            b.push(&acc * &inv0);
        }
        Ok(USeries::new(&self.field, b, Prec::Upto(qi(n as i64))))
    }

    /// `f^p` computed termwise: `c u^k -> c^p u^{pk}`.
    pub fn frobenius(&self) -> USeries {
        let p = self.field.p() as usize;
        let terms: Vec<(usize, FFElem)> = self.terms().map(|(k, a)| (k * p, a.frobenius())).collect();
        USeries::from_terms(&self.field, &terms, self.prec.scale(qi(p as i64)))
    }

    /// Substitution `u -> u^n`.
    pub fn substitute(&self, n: usize) -> USeries {
        let terms: Vec<(usize, FFElem)> = self.terms().map(|(k, a)| (k * n, a.clone())).collect();
        USeries::from_terms(&self.field, &terms, self.prec.scale(qi(n as i64)))
    }

    /// Inverse of [`USeries::substitute`]: `u^n -> u`, requiring every
    /// exponent to be divisible by `n`. Precision rounds up to a multiple.
    pub fn contract(&self, n: usize) -> Option<USeries> {
        if self.terms().any(|(k, _)| k % n != 0) {
            return None;
        }
        let terms: Vec<(usize, FFElem)> = self.terms().map(|(k, a)| (k / n, a.clone())).collect();
        let prec = match self.prec_int() {
            Some(m) => Prec::Upto(qi((m + n as i64 - 1) / n as i64)),
            None => Prec::Exact,
        };
        Some(USeries::from_terms(&self.field, &terms, prec))
    }

    /// True if every visible exponent is divisible by `n`.
    pub fn in_stride(&self, n: usize) -> bool {
        self.terms().all(|(k, _)| k % n == 0)
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: usize) -> USeries {
        let mut c = vec![self.field.zero(); k];
        c.extend(self.c.iter().cloned());
        USeries::new(&self.field, c, self.prec + qi(k as i64))
    }

    /// Divide by `u^k`; the low `k` coefficients must vanish.
    pub fn unshift(&self, k: usize) -> Option<USeries> {
        if self.c.iter().take(k).any(|a| !a.is_zero()) {
            return None;
        }
        let c = self.c.iter().skip(k).cloned().collect();
        Some(USeries::new(&self.field, c, self.prec + qi(-(k as i64))))
    }

    pub fn embed(&self, emb: &Embedding) -> USeries {
        let c = self.c.iter().map(|a| emb.apply(a)).collect();
        USeries::new(emb.target(), c, self.prec)
    }

    /// Equality of the known parts up to the smaller precision.
    pub fn agrees_with(&self, o: &USeries) -> bool {
        self.sub(o).is_zero()
    }
}

impl fmt::Debug for USeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for USeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if a.field().degree() > 1 { format!("({a})") } else { a.to_string() };
            match k {
                0 => write!(f, "{coef}")?,
                1 => write!(f, "{coef}*u")?,
                _ => write!(f, "{coef}*u^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Prec::Upto(n) = self.prec {
            write!(f, " + O(u^{n})")?;
        }
        Ok(())
    }
}

/// Square matrix of series, row-major.
pub type Mat = Vec<Vec<USeries>>;

pub fn mat_identity(field: &Field, d: usize, prec: Prec) -> Mat {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { USeries::one(field, prec) } else { USeries::zero(field, prec) })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let field = a[0][0].field().clone();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = USeries::zero(&field, Prec::Exact);
                    for (k, bk) in b.iter().enumerate() {
                        acc = acc.add(&a[i][k].mul(&bk[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_transpose(a: &Mat) -> Mat {
    let n = a.len();
    (0..a[0].len()).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_map(a: &Mat, f: impl Fn(&USeries) -> USeries) -> Mat {
    a.iter().map(|row| row.iter().map(&f).collect()).collect()
}

pub fn mat_frobenius(a: &Mat) -> Mat {
    mat_map(a, USeries::frobenius)
}

fn minor(a: &Mat, row: usize, col: usize) -> Mat {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion (ranks here are small).
pub fn mat_det(a: &Mat) -> USeries {
    let n = a.len();
    let field = a[0][0].field().clone();
    match n {
        1 => a[0][0].clone(),
        2 => a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0])),
        _ => {
            let mut acc = USeries::zero(&field, Prec::Exact);
            for j in 0..n {
                if a[0][j].is_zero() && a[0][j].is_exact() {
                    continue;
                }
                let term = a[0][j].mul(&mat_det(&minor(a, 0, j)));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Adjugate: `adj(A)·A = A·adj(A) = det(A)·I`.
pub fn mat_adjugate(a: &Mat) -> Mat {
    let n = a.len();
    let field = a[0][0].field().clone();
    if n == 1 {
        return vec![vec![USeries::one(&field, Prec::Exact)]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = mat_det(&minor(a, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        c.neg()
                    }
                })
                .collect()
        })
        .collect()
}

/// Inverse of a matrix whose determinant is a unit, modulo `u^n`.
pub fn mat_inverse_to(a: &Mat, n: i64) -> Result<Mat> {
    let det = mat_det(a);
    if det.valuation() != Some(0) {
        return Err(Error::NonUnit("determinant is not a unit".into()));
    }
    let inv = if det.is_exact() && det.coeffs().len() == 1 {
        USeries::constant(det.coeffs()[0].inv()?, Prec::Exact)
    } else {
        det.invert_to(n)?
    };
    Ok(mat_map(&mat_adjugate(a), |x| {
        let y = x.mul(&inv);
        if y.is_exact() {
            y
        } else {
            y.truncate(n)
        }
    }))
}

pub fn mat_embed(a: &Mat, emb: &Embedding) -> Mat {
    mat_map(a, |x| x.embed(emb))
}

/// Minimum precision over all entries.
pub fn mat_prec(a: &Mat) -> Prec {
    a.iter().flatten().map(USeries::prec).min().unwrap_or(Prec::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::prime(3).unwrap()
    }

    fn poly(f: &Field, c: &[i64], prec: Prec) -> USeries {
        USeries::new(f, c.iter().map(|&x| f.from_int(x)).collect(), prec)
    }

    #[test]
    fn invert_geometric() {
        let f = f3();
        let s = poly(&f, &[1, -1], Prec::Upto(qi(4)));
        assert_eq!(s.invert().unwrap(), poly(&f, &[1, 1, 1, 1], Prec::Upto(qi(4))));
        let s = poly(&f, &[2, 1], Prec::Upto(qi(3)));
        assert_eq!(s.invert().unwrap(), poly(&f, &[2, 2, 2], Prec::Upto(qi(3))));
        let u = poly(&f, &[0, 1], Prec::Exact);
        assert!(matches!(u.invert(), Err(Error::NonUnit(_))));
    }

    #[test]
    fn frobenius_examples() {
        let f = f3();
        let s = poly(&f, &[1, 1], Prec::Exact);
        assert_eq!(s.frobenius(), poly(&f, &[1, 0, 0, 1], Prec::Exact));
        assert_eq!(s.frobenius(), s.pow(3));
        let s = poly(&f, &[0, 2], Prec::Upto(qi(5)));
        assert_eq!(s.frobenius().prec(), Prec::Upto(qi(15)));
    }

    #[test]
    fn product_precision() {
        let f = f3();
        // (u + O(u^4)) * (u^2 + O(u^3)) is known modulo u^4
        let a = poly(&f, &[0, 1], Prec::Upto(qi(4)));
        let b = poly(&f, &[0, 0, 1], Prec::Upto(qi(3)));
        assert_eq!(a.mul(&b).prec(), Prec::Upto(qi(4)));
        let z = USeries::zero(&f, Prec::Exact);
        assert!(a.mul(&z).is_exact());
    }

    #[test]
    fn adjugate_identity() {
        let f = f3();
        let x = |c: &[i64]| poly(&f, c, Prec::Exact);
        let a = vec![
            vec![x(&[0, 1]), x(&[1]), x(&[0, 0, 1])],
            vec![x(&[2]), x(&[0, 1]), x(&[1, 1])],
            vec![x(&[0]), x(&[1, 0, 1]), x(&[0, 2])],
        ];
        let det = mat_det(&a);
        let prod = mat_mul(&mat_adjugate(&a), &a);
        for (i, row) in prod.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { det.clone() } else { USeries::zero(&f, Prec::Exact) };
                assert_eq!(*e, want);
            }
        }
    }
}

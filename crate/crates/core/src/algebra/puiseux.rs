//! Truncated Puiseux series: finite sums `Σ c_γ u^γ` with non-negative
//! rational exponents, known modulo terms of exponent `>= prec`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

use super::field::{Embedding, FFElem, Field};
use super::rational::{lcm, qi, Prec, Q};
use super::series::USeries;

#[derive(Clone, PartialEq, Eq)]
pub struct PuiseuxSeries {
    field: Field,
    terms: BTreeMap<Q, FFElem>,
    prec: Prec,
}

impl PuiseuxSeries {
    pub fn zero(field: &Field, prec: Prec) -> PuiseuxSeries {
        PuiseuxSeries { field: field.clone(), terms: BTreeMap::new(), prec }
    }

    pub fn monomial(c: FFElem, exp: Q, prec: Prec) -> PuiseuxSeries {
        let field = c.field().clone();
        let mut s = PuiseuxSeries::zero(&field, prec);
        s.insert(exp, c);
        s
    }

    pub fn from_terms(field: &Field, terms: impl IntoIterator<Item = (Q, FFElem)>, prec: Prec) -> PuiseuxSeries {
        let mut s = PuiseuxSeries::zero(field, prec);
        for (e, c) in terms {
            s.insert(e, c);
        }
        s
    }

    pub fn from_useries(f: &USeries) -> PuiseuxSeries {
        let terms = f.terms().map(|(k, a)| (qi(k as i64), a.clone()));
        PuiseuxSeries::from_terms(f.field(), terms, f.prec())
    }

    /// Add `c·u^exp`, dropping it if outside precision.
    fn insert(&mut self, exp: Q, c: FFElem) {
        if c.is_zero() || !self.prec.covers(exp) {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(|| self.field.zero());
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &FFElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: Q) -> FFElem {
        self.terms.get(&exp).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Option<Q> {
        self.terms.keys().next().copied()
    }

    pub fn leading(&self) -> Option<(Q, FFElem)> {
        self.terms.iter().next().map(|(e, c)| (*e, c.clone()))
    }

    /// Lower bound for the valuation; `None` means exactly zero.
    fn val_bound(&self) -> Option<Q> {
        self.valuation().or(self.prec.finite())
    }

    /// Least common multiple of the exponent denominators.
    pub fn den(&self) -> i64 {
        self.terms.keys().fold(1, |acc, e| lcm(acc, *e.denom()))
    }

    pub fn with_prec(&self, prec: Prec) -> PuiseuxSeries {
        let prec = self.prec.min(prec);
        let terms = self.terms.iter().filter(|(e, _)| prec.covers(**e)).map(|(e, c)| (*e, c.clone()));
        PuiseuxSeries { field: self.field.clone(), terms: terms.collect(), prec }
    }

    pub fn add(&self, o: &PuiseuxSeries) -> PuiseuxSeries {
        let mut s = self.with_prec(o.prec);
        for (e, c) in &o.terms {
            s.insert(*e, c.clone());
        }
        s
    }

    pub fn neg(&self) -> PuiseuxSeries {
        let terms = self.terms.iter().map(|(e, c)| (*e, -c)).collect();
        PuiseuxSeries { field: self.field.clone(), terms, prec: self.prec }
    }

    pub fn sub(&self, o: &PuiseuxSeries) -> PuiseuxSeries {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &FFElem) -> PuiseuxSeries {
        let terms = self.terms.iter().map(|(e, c)| (*e, c * a));
        PuiseuxSeries::from_terms(&self.field, terms, self.prec)
    }

    pub fn mul(&self, o: &PuiseuxSeries) -> PuiseuxSeries {
        let prec = match (self.val_bound(), o.val_bound()) {
            (None, _) | (_, None) => return PuiseuxSeries::zero(&self.field, Prec::Exact),
            (Some(vf), Some(vg)) => (self.prec + vg).min(o.prec + vf),
        };
        let mut s = PuiseuxSeries::zero(&self.field, prec);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = *e1 + *e2;
                if !prec.covers(e) {
                    break;
                }
                s.insert(e, c1 * c2);
            }
        }
        s
    }

    pub fn mul_series(&self, f: &USeries) -> PuiseuxSeries {
        self.mul(&PuiseuxSeries::from_useries(f))
    }

    /// `f^p`: `c u^γ -> c^p u^{pγ}`.
    pub fn frobenius(&self) -> PuiseuxSeries {
        let p = qi(self.field.p() as i64);
        let terms = self.terms.iter().map(|(e, c)| (*e * p, c.frobenius()));
        PuiseuxSeries::from_terms(&self.field, terms, self.prec.scale(p))
    }

    /// Unique `p`-th root; fails when an exponent denominator exceeds `cap`.
    pub fn pth_root(&self, cap: i64) -> Result<PuiseuxSeries> {
        let p = qi(self.field.p() as i64);
        let terms: Vec<(Q, FFElem)> = self.terms.iter().map(|(e, c)| (*e / p, c.pth_root())).collect();
        let out = PuiseuxSeries::from_terms(&self.field, terms, self.prec.scale(qi(1) / p));
        let den = out.den();
        if den > cap {
            return Err(Error::DenominatorOverflow { den, cap });
        }
        Ok(out)
    }

    /// Multiply by `u^γ`.
    pub fn shift(&self, g: Q) -> PuiseuxSeries {
        let terms = self.terms.iter().map(|(e, c)| (*e + g, c.clone()));
        PuiseuxSeries::from_terms(&self.field, terms, self.prec + g)
    }

    pub fn embed(&self, emb: &Embedding) -> PuiseuxSeries {
        let terms = self.terms.iter().map(|(e, c)| (*e, emb.apply(c)));
        PuiseuxSeries::from_terms(emb.target(), terms, self.prec)
    }

    /// Drop terms with exponent `>= n` and cap the precision there.
    pub fn truncate(&self, n: Q) -> PuiseuxSeries {
        self.with_prec(Prec::Upto(n))
    }
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if c.field().degree() > 1 { format!("({c})") } else { c.to_string() };
            if *e == qi(0) {
                write!(f, "{coef}")?;
            } else {
                write!(f, "{coef}*u^{e}")?;
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

//! `O_K = (Z/p^N)[π]` with `E(π) = 0` for an Eisenstein polynomial `E`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::FFElem;
use crate::error::{Error, Result};

/// `E(u) = u^e + c_{e-1}u^{e-1} + … + c_0`, Eisenstein at `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisensteinPoly {
    p: u64,
    coeffs: Vec<i64>,
}

impl EisensteinPoly {
    /// Coefficients `c_0, …, c_e` from low to high.
    pub fn new(p: u64, coeffs: Vec<i64>) -> Result<EisensteinPoly> {
        let pi = p as i64;
        let e = coeffs.len().checked_sub(1).filter(|&e| e >= 1).ok_or_else(|| {
            Error::NotEisenstein("need at least two coefficients".into())
        })?;
        if coeffs[e] != 1 {
            return Err(Error::NotEisenstein("leading coefficient must be 1".into()));
        }
        if let Some(i) = (0..e).find(|&i| coeffs[i] % pi != 0) {
            return Err(Error::NotEisenstein(format!("c_{i} = {} is not divisible by {p}", coeffs[i])));
        }
        if coeffs[0] % (pi * pi) == 0 {
            return Err(Error::NotEisenstein(format!("c_0 = {} is divisible by {p}^2", coeffs[0])));
        }
        Ok(EisensteinPoly { p, coeffs })
    }

    /// `u^e + p·c` with `c` the representative of `c̄_0` in `(-p/2, p/2]`.
    pub fn standard(p: u64, e: usize, c0bar: &FFElem) -> Result<EisensteinPoly> {
        let c = c0bar.as_prime().ok_or(Error::RequiresPrimeField)? as i64;
        let c = if c > p as i64 / 2 { c - p as i64 } else { c };
        let mut coeffs = vec![0i64; e + 1];
        coeffs[0] = p as i64 * c;
        coeffs[e] = 1;
        EisensteinPoly::new(p, coeffs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `F(u) = (u^e − E(u))/p`, coefficients of `u^0 … u^{e-1}`.
    pub fn f_coeffs(&self) -> Vec<i64> {
        self.coeffs[..self.e()].iter().map(|c| -c / self.p as i64).collect()
    }

    /// `c̄_0 = (E(0)/p) mod p`.
    pub fn c0bar(&self) -> u64 {
        (self.coeffs[0] / self.p as i64).rem_euclid(self.p as i64) as u64
    }

    /// `E(u^n)`, again Eisenstein; the polynomial over the base change `u -> u^n`.
    pub fn substitute(&self, n: usize) -> EisensteinPoly {
        let mut coeffs = vec![0i64; self.e() * n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * n] = *c;
        }
        EisensteinPoly { p: self.p, coeffs }
    }
}

impl fmt::Display for EisensteinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.e();
        write!(f, "u^{e}")?;
        for k in (0..e).rev() {
            let c = self.coeffs[k];
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            match k {
                0 => write!(f, " {sign} {}", c.abs())?,
                1 => write!(f, " {sign} {}*u", c.abs())?,
                _ => write!(f, " {sign} {}*u^{k}", c.abs())?,
            }
        }
        Ok(())
    }
}

/// The ring `(Z/p^N)[u]/(E(u))`.
#[derive(Debug, PartialEq, Eq)]
pub struct OKRing {
    pub eis: EisensteinPoly,
    pub n: u32,
    pub modulus: i64,
    /// `π^e = Σ red_i π^i`.
    red: Vec<i64>,
}

pub(crate) fn modinv(a: i64, m: i64) -> Option<i64> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m))
}

impl OKRing {
    pub fn new(eis: EisensteinPoly, n: u32) -> Result<Arc<OKRing>> {
        if n == 0 {
            return Err(Error::Range("p-adic precision N must be positive".into()));
        }
        let modulus = (eis.p as i64)
            .checked_pow(n)
            .filter(|m| *m < (1 << 31))
            .ok_or_else(|| Error::Range(format!("p^N too large for N = {n}")))?;
        let red = eis.coeffs[..eis.e()].iter().map(|c| (-c).rem_euclid(modulus)).collect();
        Ok(Arc::new(OKRing { eis, n, modulus, red }))
    }

    pub fn e(&self) -> usize {
        self.eis.e()
    }

    pub fn p(&self) -> u64 {
        self.eis.p
    }
}

/// Element `Σ c_i π^i` of `O_K`, `0 <= i < e`, residues mod `p^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct OKElem {
    ring: Arc<OKRing>,
    c: Vec<i64>,
}

impl fmt::Debug for OKElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.c)
    }
}

impl OKElem {
    pub fn zero(ring: &Arc<OKRing>) -> OKElem {
        OKElem { ring: ring.clone(), c: vec![0; ring.e()] }
    }

    pub fn from_int(ring: &Arc<OKRing>, n: i64) -> OKElem {
        let mut x = OKElem::zero(ring);
        x.c[0] = n.rem_euclid(ring.modulus);
        x
    }

    pub fn pi(ring: &Arc<OKRing>) -> OKElem {
        if ring.e() == 1 {
            return OKElem::from_int(ring, ring.red[0]);
        }
        let mut x = OKElem::zero(ring);
        x.c[1] = 1;
        x
    }

    /// From a polynomial in `π` of any degree.
    pub fn from_poly(ring: &Arc<OKRing>, coeffs: &[i64]) -> OKElem {
        let pi = OKElem::pi(ring);
        let mut acc = OKElem::zero(ring);
        for &c in coeffs.iter().rev() {
            acc = acc.mul(&pi).add(&OKElem::from_int(ring, c));
        }
        acc
    }

    pub fn ring(&self) -> &Arc<OKRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &OKElem) -> OKElem {
        let m = self.ring.modulus;
        let c = self.c.iter().zip(&o.c).map(|(a, b)| (a + b) % m).collect();
        OKElem { ring: self.ring.clone(), c }
    }

    pub fn neg(&self) -> OKElem {
        let m = self.ring.modulus;
        OKElem { ring: self.ring.clone(), c: self.c.iter().map(|a| (m - a) % m).collect() }
    }

    pub fn sub(&self, o: &OKElem) -> OKElem {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &OKElem) -> OKElem {
        let m = self.ring.modulus as i128;
        let e = self.ring.e();
        let mut prod = vec![0i128; 2 * e - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as i128 * b as i128) % m;
            }
        }
        for k in (e..prod.len()).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &r) in self.ring.red.iter().enumerate() {
                prod[k - e + i] = (prod[k - e + i] + top * r as i128) % m;
            }
        }
        OKElem { ring: self.ring.clone(), c: prod[..e].iter().map(|&x| x as i64).collect() }
    }

    pub fn pow(&self, mut k: u64) -> OKElem {
        let mut acc = OKElem::from_int(&self.ring, 1);
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }

    /// `π`-adic valuation, `None` when the element is `0 mod p^N`.
    pub fn valuation(&self) -> Option<i64> {
        let p = self.ring.p() as i64;
        let e = self.ring.e() as i64;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| {
                let mut v = 0;
                let mut y = x;
                while y % p == 0 {
                    y /= p;
                    v += 1;
                }
                e * v + i as i64
            })
            .min()
    }

    pub fn is_unit(&self) -> bool {
        self.c[0] % self.ring.p() as i64 != 0
    }

    /// Inverse by Newton iteration `x <- x(2 − a·x)`.
    pub fn inv(&self) -> Result<OKElem> {
        if !self.is_unit() {
            return Err(Error::NonUnit(format!("{self:?} lies in the maximal ideal")));
        }
        let p = self.ring.p() as i64;
        let x0 = modinv(self.c[0] % p, p).unwrap();
        let mut x = OKElem::from_int(&self.ring, x0);
        let one = OKElem::from_int(&self.ring, 1);
        let two = OKElem::from_int(&self.ring, 2);
        // π-adic precision doubles each round; e·N digits suffice
        let rounds = 2 + (64 - ((self.ring.e() as u64) * self.ring.n as u64).leading_zeros());
        for _ in 0..rounds {
            x = x.mul(&two.sub(&self.mul(&x)));
        }
        if self.mul(&x) != one {
            return Err(Error::Inconsistent("unit inversion did not converge".into()));
        }
        Ok(x)
    }

    /// Image in `F_p[u]/(u^e)` under `π ↦ u`.
    pub fn reduce_mod_p(&self) -> Vec<u64> {
        let p = self.ring.p() as i64;
        self.c.iter().map(|x| x.rem_euclid(p) as u64).collect()
    }
}

//! Finite fields `F_{p^m} = F_p[t]/(modulus)` for odd primes `p`.
//!
//! Elements are coefficient vectors in the power basis of `t`. The modulus
//! for a given `(p, m)` is the smallest monic irreducible polynomial, where
//! polynomials and elements are both ordered by their base-`p` index
//! `sum c_i p^i` (so the top coefficient is the most significant digit).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

use super::fqpoly;

/// Description of `F_{p^m}`.
#[derive(Debug)]
pub struct FieldDesc {
    p: u64,
    m: usize,
    /// Monic, low-to-high, length `m + 1`.
    modulus: Vec<u64>,
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for FieldDesc {}

/// Shared handle to a field description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field(Arc<FieldDesc>);

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// --- dense polynomials over F_p (u64 residues, low-to-high, trimmed) ---

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    fp_pow(a, p - 2, p)
}

fn fp_pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let inv_lead = fp_inv(b[db], p);
    while r.len() > db {
        let k = r.len() - 1;
        let c = r[k] * inv_lead % p;
        for (i, &bi) in b.iter().enumerate() {
            let idx = k - db + i;
            r[idx] = (r[idx] + p - c * bi % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    fp_rem(&prod, f, p)
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or test: `f` of degree `m` is irreducible iff it shares no factor
/// with `x^{p^j} - x` for `1 <= j <= m/2`.
pub fn is_irreducible_fp(f: &[u64], p: u64) -> bool {
    let mut f = f.to_vec();
    fp_trim(&mut f);
    let m = match f.len() {
        0 | 1 => return false,
        n => n - 1,
    };
    if m == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut h = x.clone();
    for _ in 1..=m / 2 {
        // h <- h^p mod f
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = fp_mulmod(&acc, &h, &f, p);
        }
        h = acc;
        let mut diff = h.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        fp_trim(&mut diff);
        let g = fp_gcd(&f, &diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl Field {
    /// Field with an explicit modulus, validated.
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Field> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} must be an odd prime")));
        }
        let mut modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        fp_trim(&mut modulus);
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic of degree >= 1".into()));
        }
        if !is_irreducible_fp(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let m = modulus.len() - 1;
        Ok(Field(Arc::new(FieldDesc { p, m, modulus })))
    }

    /// `F_{p^m}` with the deterministic minimal modulus.
    pub fn canonical(p: u64, m: usize) -> Result<Field> {
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} must be an odd prime")));
        }
        Field::new(p, minimal_irreducible(p, m))
    }

    pub fn prime(p: u64) -> Result<Field> {
        Field::canonical(p, 1)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.m
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    /// Field size `p^m`.
    pub fn order(&self) -> u128 {
        (self.0.p as u128).pow(self.0.m as u32)
    }

    pub fn same(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }

    pub fn zero(&self) -> FFElem {
        FFElem { field: self.clone(), c: vec![0; self.0.m] }
    }

    pub fn one(&self) -> FFElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FFElem {
        let mut c = vec![0; self.0.m];
        c[0] = n.rem_euclid(self.0.p as i64) as u64;
        FFElem { field: self.clone(), c }
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FFElem> {
        if coeffs.len() > self.0.m {
            return Err(Error::Schema(format!(
                "element has {} coordinates, field degree is {}",
                coeffs.len(),
                self.0.m
            )));
        }
        let mut c = vec![0; self.0.m];
        for (slot, &x) in c.iter_mut().zip(coeffs) {
            *slot = x.rem_euclid(self.0.p as i64) as u64;
        }
        Ok(FFElem { field: self.clone(), c })
    }

    /// The power-basis generator `t`.
    pub fn generator(&self) -> FFElem {
        if self.0.m == 1 {
            // t is the root of the degree-one modulus x + c0
            return self.from_int(-(self.0.modulus[0] as i64));
        }
        let mut c = vec![0; self.0.m];
        c[1] = 1;
        FFElem { field: self.clone(), c }
    }

    /// Element with base-`p` index `idx`.
    pub fn element(&self, mut idx: u128) -> FFElem {
        let p = self.0.p as u128;
        let mut c = vec![0; self.0.m];
        for slot in c.iter_mut() {
            *slot = (idx % p) as u64;
            idx /= p;
        }
        FFElem { field: self.clone(), c }
    }

    pub fn elements(&self) -> impl Iterator<Item = FFElem> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    /// Canonical extension of degree `k` together with the embedding of `self`.
    pub fn extend(&self, k: usize) -> Result<(Field, Embedding)> {
        let big = Field::canonical(self.p(), self.degree() * k)?;
        let emb = Embedding::new(self, &big)?;
        Ok((big, emb))
    }

    fn reduce(&self, mut prod: Vec<u64>) -> Vec<u64> {
        let m = self.0.m;
        let p = self.0.p;
        let f = &self.0.modulus;
        for k in (m..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..m {
                let idx = k - m + i;
                prod[idx] = (prod[idx] + (p - c) * f[i]) % p;
            }
        }
        prod.truncate(m);
        prod.resize(m, 0);
        prod
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.m == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{}", self.0.p, self.0.m)
        }
    }
}

/// Smallest monic irreducible polynomial of degree `m` over `F_p`.
pub fn minimal_irreducible(p: u64, m: usize) -> Vec<u64> {
    let total = (p as u128).pow(m as u32);
    for idx in 0..total {
        let mut f = Vec::with_capacity(m + 1);
        let mut r = idx;
        for _ in 0..m {
            f.push((r % p as u128) as u64);
            r /= p as u128;
        }
        f.push(1);
        if is_irreducible_fp(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Element of a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct FFElem {
    field: Field,
    c: Vec<u64>,
}

impl fmt::Debug for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.degree() == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let mut first = true;
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == 1 => write!(f, "t")?,
                1 => write!(f, "{c}t")?,
                _ if c == 1 => write!(f, "t^{i}")?,
                _ => write!(f, "{c}t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FFElem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    /// Base-`p` index, the total order used for deterministic choices.
    pub fn index(&self) -> u128 {
        let p = self.field.p() as u128;
        self.c.iter().rev().fold(0u128, |acc, &x| acc * p + x as u128)
    }

    /// `Some(a)` when the element lies in the prime field.
    pub fn as_prime(&self) -> Option<u64> {
        self.c[1..].iter().all(|&x| x == 0).then_some(self.c[0])
    }

    pub fn pow(&self, mut e: u128) -> FFElem {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<FFElem> {
        if self.is_zero() {
            return Err(Error::NonUnit("0 in a finite field".into()));
        }
        Ok(self.pow(self.field.order() - 2))
    }

    /// Absolute Frobenius `x -> x^p`.
    pub fn frobenius(&self) -> FFElem {
        self.pow(self.field.p() as u128)
    }

    /// Unique `y` with `y^p = x`.
    pub fn pth_root(&self) -> FFElem {
        let m = self.field.degree() as u32;
        self.pow((self.field.p() as u128).pow(m - 1))
    }

    fn check(&self, other: &FFElem) {
        debug_assert!(self.field.same(&other.field), "mixed fields {} and {}", self.field, other.field);
    }
}

impl Add for &FFElem {
    type Output = FFElem;
    fn add(self, rhs: &FFElem) -> FFElem {
        self.check(rhs);
        let p = self.field.p();
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| (a + b) % p).collect();
        FFElem { field: self.field.clone(), c }
    }
}

impl Sub for &FFElem {
    type Output = FFElem;
    fn sub(self, rhs: &FFElem) -> FFElem {
        self.check(rhs);
        let p = self.field.p();
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| (a + p - b) % p).collect();
        FFElem { field: self.field.clone(), c }
    }
}

impl Neg for &FFElem {
    type Output = FFElem;
    fn neg(self) -> FFElem {
        let p = self.field.p();
        let c = self.c.iter().map(|a| (p - a) % p).collect();
        FFElem { field: self.field.clone(), c }
    }
}

impl Mul for &FFElem {
    type Output = FFElem;
    fn mul(self, rhs: &FFElem) -> FFElem {
        self.check(rhs);
        let p = self.field.p();
        let m = self.field.degree();
        if m == 1 {
            return FFElem { field: self.field.clone(), c: vec![self.c[0] * rhs.c[0] % p] };
        }
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.c.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % p;
            }
        }
        FFElem { field: self.field.clone(), c: self.field.reduce(prod) }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for FFElem {
            type Output = FFElem;
            fn $f(self, rhs: FFElem) -> FFElem {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FFElem {
    type Output = FFElem;
    fn neg(self) -> FFElem {
        -&self
    }
}

/// Field homomorphism `F_{p^a} -> F_{p^b}` fixed by the image of the generator.
#[derive(Clone, Debug)]
pub struct Embedding {
    from: Field,
    to: Field,
    powers: Vec<FFElem>,
}

impl Embedding {
    pub fn identity(field: &Field) -> Embedding {
        Embedding::with_image(field, field, field.generator())
    }

    /// Embedding sending the generator to the smallest root of the source
    /// modulus inside the target.
    pub fn new(from: &Field, to: &Field) -> Result<Embedding> {
        if from.p() != to.p() || to.degree() % from.degree() != 0 {
            return Err(Error::InvalidField(format!("{from} does not embed into {to}")));
        }
        if from.same(to) {
            return Ok(Embedding::identity(from));
        }
        let f: Vec<FFElem> = from.modulus().iter().map(|&c| to.from_int(c as i64)).collect();
        let roots = fqpoly::roots(&f);
        let root = roots
            .into_iter()
            .next()
            .ok_or_else(|| Error::Inconsistent(format!("modulus of {from} has no root in {to}")))?;
        Ok(Embedding::with_image(from, to, root))
    }

    fn with_image(from: &Field, to: &Field, image: FFElem) -> Embedding {
        let mut powers = Vec::with_capacity(from.degree());
        let mut acc = to.one();
        for _ in 0..from.degree() {
            powers.push(acc.clone());
            acc = &acc * &image;
        }
        Embedding { from: from.clone(), to: to.clone(), powers }
    }

    pub fn source(&self) -> &Field {
        &self.from
    }

    pub fn target(&self) -> &Field {
        &self.to
    }

    pub fn is_identity(&self) -> bool {
        self.from.same(&self.to)
    }

    pub fn apply(&self, x: &FFElem) -> FFElem {
        if self.is_identity() {
            return x.clone();
        }
        debug_assert!(x.field().same(&self.from));
        let mut acc = self.to.zero();
        for (&c, pw) in x.coeffs().iter().zip(&self.powers) {
            if c != 0 {
                acc = &acc + &(pw * &self.to.from_int(c as i64));
            }
        }
        acc
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Embedding) -> Embedding {
        let image = next.apply(&self.apply(&self.from.generator()));
        Embedding::with_image(&self.from, &next.to, image)
    }
}

/// Inverse of the absolute Frobenius.
pub fn ff_pth_root(x: &FFElem) -> FFElem {
    x.pth_root()
}

/// A root of `y^{p-1} = a`, possibly in an extension.
///
/// Returns the smallest root in the smallest extension of `a`'s field that
/// contains one, with the embedding from `a`'s field.
pub fn ff_solve_kummer(a: &FFElem) -> Result<(FFElem, Embedding)> {
    if a.is_zero() {
        return Err(Error::KummerZero);
    }
    let field = a.field().clone();
    let p = field.p() as usize;
    let mut poly = vec![-a];
    poly.extend((1..p - 1).map(|_| field.zero()));
    poly.push(field.one());
    smallest_root_extending(&poly)
}

/// A root of `c^p - a c = b`, possibly in an extension.
pub fn ff_solve_artin_schreier(a: &FFElem, b: &FFElem) -> Result<(FFElem, Embedding)> {
    let field = a.field().clone();
    if a.is_zero() {
        return Ok((b.pth_root(), Embedding::identity(&field)));
    }
    let p = field.p() as usize;
    let mut poly = vec![-b, -a];
    poly.extend((2..p).map(|_| field.zero()));
    poly.push(field.one());
    smallest_root_extending(&poly)
}

/// Smallest root of `poly` in the smallest extension where it has one.
pub fn smallest_root_extending(poly: &[FFElem]) -> Result<(FFElem, Embedding)> {
    let field = poly[0].field().clone();
    let k = fqpoly::min_root_degree(poly)
        .ok_or_else(|| Error::Inconsistent("polynomial without roots in any extension".into()))?;
    let (big, emb) = if k == 1 {
        (field.clone(), Embedding::identity(&field))
    } else {
        field.extend(k)?
    };
    let lifted: Vec<FFElem> = poly.iter().map(|c| emb.apply(c)).collect();
    let root = fqpoly::roots(&lifted)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Inconsistent(format!("no root found in {big}")))?;
    Ok((root, emb))
}

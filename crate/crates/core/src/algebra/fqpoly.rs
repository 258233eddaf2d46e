//! Dense univariate polynomials over a finite field, used for root finding.
//!
//! Coefficients are stored low-to-high; every function expects a non-empty
//! slice so the field can be read off the first coefficient.

use super::field::{FFElem, Field};

fn field_of(a: &[FFElem]) -> Field {
    a[0].field().clone()
}

pub fn trim(a: &mut Vec<FFElem>) {
    while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

pub fn degree(a: &[FFElem]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn monic(a: &[FFElem]) -> Vec<FFElem> {
    let mut a = a.to_vec();
    trim(&mut a);
    let lead = a.last().unwrap().clone();
    if lead.is_zero() {
        return a;
    }
    let inv = lead.inv().expect("nonzero leading coefficient");
    a.iter().map(|c| c * &inv).collect()
}

/// Remainder and quotient of `a` by nonzero `b`.
pub fn divrem(a: &[FFElem], b: &[FFElem]) -> (Vec<FFElem>, Vec<FFElem>) {
    let field = field_of(a);
    let db = degree(b).expect("division by the zero polynomial");
    let inv = b[db].inv().unwrap();
    let mut r = a.to_vec();
    trim(&mut r);
    let mut quo = vec![field.zero(); r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] * &inv;
        for i in 0..=db {
            let t = &c * &b[i];
            r[dr - db + i] = &r[dr - db + i] - &t;
        }
        quo[dr - db] = c;
        trim(&mut r);
    }
    trim(&mut quo);
    (quo, r)
}

pub fn rem(a: &[FFElem], b: &[FFElem]) -> Vec<FFElem> {
    divrem(a, b).1
}

pub fn mul(a: &[FFElem], b: &[FFElem]) -> Vec<FFElem> {
    let field = field_of(a);
    let mut out = vec![field.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(&mut out);
    out
}

pub fn sub(a: &[FFElem], b: &[FFElem]) -> Vec<FFElem> {
    let field = field_of(a);
    let n = a.len().max(b.len());
    let mut out: Vec<FFElem> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(|| field.zero());
            let y = b.get(i).cloned().unwrap_or_else(|| field.zero());
            &x - &y
        })
        .collect();
    trim(&mut out);
    out
}

pub fn gcd(a: &[FFElem], b: &[FFElem]) -> Vec<FFElem> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while degree(&b).is_some() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

/// `base^e mod f`.
pub fn powmod(base: &[FFElem], mut e: u128, f: &[FFElem]) -> Vec<FFElem> {
    let field = field_of(f);
    let mut acc = vec![field.one()];
    let mut b = rem(base, f);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b), f);
        }
        e >>= 1;
        if e > 0 {
            b = rem(&mul(&b, &b), f);
        }
    }
    acc
}

fn x_poly(field: &Field) -> Vec<FFElem> {
    vec![field.zero(), field.one()]
}

/// All distinct roots of `f` in its coefficient field, sorted by index.
pub fn roots(f: &[FFElem]) -> Vec<FFElem> {
    let field = field_of(f);
    let mut f = f.to_vec();
    trim(&mut f);
    let Some(df) = degree(&f) else {
        return Vec::new();
    };
    if df == 0 {
        return Vec::new();
    }
    let x = x_poly(&field);
    let xq = powmod(&x, field.order(), &f);
    let g = gcd(&f, &sub(&xq, &x));
    let mut out = Vec::new();
    split(&g, &field, &mut out);
    out.sort_by_key(|r| r.index());
    out.dedup();
    out
}

/// Split a squarefree product of distinct linear factors.
fn split(g: &[FFElem], field: &Field, out: &mut Vec<FFElem>) {
    match degree(g) {
        None | Some(0) => {}
        Some(1) => {
            let g = monic(g);
            out.push(-&g[0]);
        }
        Some(d) => {
            let half = (field.order() - 1) / 2;
            for idx in 0..field.order() {
                let delta = field.element(idx);
                let shifted = vec![delta, field.one()];
                let h = powmod(&shifted, half, g);
                let h = sub(&h, &[field.one()]);
                let c = gcd(g, &h);
                let dc = degree(&c).unwrap_or(0);
                if dc > 0 && dc < d {
                    let (other, _) = divrem(g, &c);
                    split(&c, field, out);
                    split(&other, field, out);
                    return;
                }
            }
            unreachable!("equal-degree splitting failed");
        }
    }
}

/// Smallest `k` such that `f` has a root in the degree-`k` extension.
pub fn min_root_degree(f: &[FFElem]) -> Option<usize> {
    let field = field_of(f);
    let mut f = f.to_vec();
    trim(&mut f);
    let df = degree(&f)?;
    if df == 0 {
        return None;
    }
    let x = x_poly(&field);
    let mut xk = x.clone();
    for k in 1..=df {
        xk = powmod(&xk, field.order(), &f);
        let g = gcd(&f, &sub(&xk, &x));
        if degree(&g).unwrap_or(0) > 0 {
            return Some(k);
        }
    }
    None
}

//! Kisin modules over `k[[u]]` killed by `p`.
//!
//! A module of rank `d` is stored through its Frobenius matrix `A`, with
//! `φ(m_1, …, m_d) = (m_1, …, m_d)·A`.

use serde_json::{json, Value};

use crate::algebra::rational::{ceil_int, q, q_to_json, qi};
use crate::algebra::series::{
    mat_adjugate, mat_det, mat_frobenius, mat_identity, mat_inverse_to, mat_map, mat_mul, mat_transpose,
};
use crate::algebra::{Embedding, FFElem, Field, Mat, Prec, PuiseuxSeries, USeries};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct KisinModule {
    field: Field,
    e: i64,
    r: i64,
    c0bar: FFElem,
    a: Mat,
    prec: i64,
}

/// Smith normal form `P·A·Q = diag(u^{s_1}, …, u^{s_d})`.
#[derive(Clone, Debug)]
pub struct SmithData {
    pub p: Mat,
    pub q: Mat,
    pub exps: Vec<i64>,
    pub stride: usize,
}

/// Working precision used when none is supplied.
pub fn default_prec(p: u64, e: i64, r: i64, d: usize) -> i64 {
    let er = e * r;
    let pm1 = p as i64 - 1;
    let base = 2 * d as i64 * er + ceil_int(q(er, pm1)) + e;
    // enough room for the layered solver targets
    let target = q(er, pm1) + qi(e);
    let layered = ceil_int(target * qi((p as i64).pow(d as u32))) + er;
    base.max(layered)
}

fn check_square(a: &Mat) -> Result<usize> {
    let d = a.len();
    if d == 0 || a.iter().any(|row| row.len() != d) {
        return Err(Error::Schema("Frobenius matrix must be square and non-empty".into()));
    }
    Ok(d)
}

/// Largest elementary-divisor exponent of `A`.
pub fn e_height(a: &Mat, prec: i64) -> Result<i64> {
    let snf = smith_normal_form(a, 1, prec)?;
    Ok(*snf.exps.last().unwrap())
}

/// Smith normal form over `k[[u^stride]]`, computed modulo `u^prec` when
/// the entries are exact.
pub fn smith_normal_form(a: &Mat, stride: usize, prec: i64) -> Result<SmithData> {
    let d = check_square(a)?;
    let field = a[0][0].field().clone();
    let work: Mat = if stride == 1 {
        mat_map(a, |x| x.truncate(prec))
    } else {
        let mut m = Vec::with_capacity(d);
        for row in a {
            let mut r = Vec::with_capacity(d);
            for x in row {
                r.push(x.truncate(prec).contract(stride).ok_or(Error::EntriesNotInUp)?);
            }
            m.push(r);
        }
        m
    };
    let (p, q, exps) = snf_core(work, &field)?;
    if stride == 1 {
        return Ok(SmithData { p, q, exps, stride });
    }
    let up = |m: &Mat| mat_map(m, |x| x.substitute(stride));
    Ok(SmithData { p: up(&p), q: up(&q), exps: exps.iter().map(|s| s * stride as i64).collect(), stride })
}

fn swap_cols(m: &mut Mat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

fn snf_core(mut w: Mat, field: &Field) -> Result<(Mat, Mat, Vec<i64>)> {
    let d = w.len();
    let prec = crate::algebra::series::mat_prec(&w);
    let mut p = mat_identity(field, d, prec);
    let mut q = mat_identity(field, d, prec);
    let mut exps = Vec::with_capacity(d);
    for k in 0..d {
        let mut best: Option<(i64, usize, usize)> = None;
        for (i, row) in w.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if let Some(v) = x.valuation() {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else {
            return Err(Error::SingularMatrix(format!("{prec}")));
        };
        w.swap(k, i);
        p.swap(k, i);
        swap_cols(&mut w, k, j);
        swap_cols(&mut q, k, j);
        let vu = v as usize;
        let unit = w[k][k].unshift(vu).unwrap();
        let inv = unit.invert()?;
        for x in w[k].iter_mut() {
            *x = x.mul(&inv);
        }
        for x in p[k].iter_mut() {
            *x = x.mul(&inv);
        }
        // clear column k below the pivot
        for i in k + 1..d {
            let f = w[i][k].unshift(vu).unwrap();
            if f.is_zero() {
                continue;
            }
            for j in 0..d {
                let t = f.mul(&w[k][j]);
                w[i][j] = w[i][j].sub(&t);
                let t = f.mul(&p[k][j]);
                p[i][j] = p[i][j].sub(&t);
            }
        }
        // clear row k right of the pivot
        for j in k + 1..d {
            let f = w[k][j].unshift(vu).unwrap();
            if f.is_zero() {
                continue;
            }
            for i in 0..d {
                let t = f.mul(&w[i][k]);
                w[i][j] = w[i][j].sub(&t);
                let t = f.mul(&q[i][k]);
                q[i][j] = q[i][j].sub(&t);
            }
        }
        exps.push(v);
    }
    Ok((p, q, exps))
}

impl KisinModule {
    /// Validating constructor; rejects modules of `E`-height above `e·r`.
    pub fn new(field: &Field, e: i64, r: i64, c0bar: FFElem, a: Mat, prec: Option<i64>) -> Result<KisinModule> {
        let d = check_square(&a)?;
        if e < 1 || r < 1 {
            return Err(Error::Range(format!("e = {e} and r = {r} must be positive")));
        }
        if c0bar.is_zero() {
            return Err(Error::Range("c0bar must be a unit".into()));
        }
        if !c0bar.field().same(field) || a.iter().flatten().any(|x| !x.field().same(field)) {
            return Err(Error::Schema("entries must live in the module's field".into()));
        }
        let prec = prec.unwrap_or_else(|| default_prec(field.p(), e, r, d));
        if prec < 1 {
            return Err(Error::Range(format!("precision {prec} must be positive")));
        }
        let h = e_height(&a, prec)?;
        if h > e * r {
            return Err(Error::HeightExceeded { height: h, bound: e * r });
        }
        Ok(KisinModule { field: field.clone(), e, r, c0bar, a, prec })
    }

    /// Rank-one module with `A = (u^s·a)`.
    pub fn rank_one(s: i64, a: FFElem, e: i64, r: i64, c0bar: FFElem) -> Result<KisinModule> {
        if s < 0 || s > e * r {
            return Err(Error::Range(format!("s = {s} must lie in [0, {}]", e * r)));
        }
        if a.is_zero() {
            return Err(Error::Range("a must be a unit".into()));
        }
        let field = a.field().clone();
        let m = vec![vec![USeries::monomial(a, s as usize, Prec::Exact)]];
        KisinModule::new(&field, e, r, c0bar, m, None)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn p(&self) -> u64 {
        self.field.p()
    }
    pub fn e(&self) -> i64 {
        self.e
    }
    pub fn r(&self) -> i64 {
        self.r
    }
    pub fn er(&self) -> i64 {
        self.e * self.r
    }
    pub fn c0bar(&self) -> &FFElem {
        &self.c0bar
    }
    pub fn matrix(&self) -> &Mat {
        &self.a
    }
    pub fn rank(&self) -> usize {
        self.a.len()
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn with_prec(&self, prec: i64) -> KisinModule {
        KisinModule { prec, ..self.clone() }
    }

    /// Same module with the coefficient field enlarged along `emb`.
    pub fn embed(&self, emb: &Embedding) -> KisinModule {
        KisinModule {
            field: emb.target().clone(),
            c0bar: emb.apply(&self.c0bar),
            a: crate::algebra::series::mat_embed(&self.a, emb),
            ..self.clone()
        }
    }

    pub fn snf(&self, stride: usize) -> Result<SmithData> {
        smith_normal_form(&self.a, stride, self.prec)
    }

    pub fn e_height(&self) -> Result<i64> {
        e_height(&self.a, self.prec)
    }

    /// `c̄_0^{-r}·u^{er}`, the Frobenius of the twist.
    pub fn twist_coefficient(&self) -> Result<USeries> {
        let c = self.c0bar.inv()?.pow(self.r as u128);
        Ok(USeries::monomial(c, self.er() as usize, Prec::Exact))
    }

    /// Dual module: `A^∨ = c̄_0^{-r}·u^{er}·(ᵗA)^{-1}`.
    pub fn dual(&self) -> Result<KisinModule> {
        let at = mat_transpose(&self.a);
        let det = mat_det(&at);
        let s = det
            .valuation()
            .ok_or_else(|| Error::SingularMatrix(format!("determinant vanishes modulo u^{}", self.prec)))?;
        let unit = det.unshift(s as usize).unwrap();
        let inv = if unit.is_exact() && unit.coeffs().len() == 1 {
            USeries::constant(unit.coeffs()[0].inv()?, Prec::Exact)
        } else {
            unit.invert_to(self.prec + s)?
        };
        let scale = self.twist_coefficient()?.mul(&inv);
        let adj = mat_adjugate(&at);
        let mut out = Vec::with_capacity(adj.len());
        for row in &adj {
            let mut r = Vec::with_capacity(row.len());
            for x in row {
                let y = x.mul(&scale).unshift(s as usize).ok_or_else(|| {
                    Error::PrecisionExhausted("dual matrix is not integral at this precision".into())
                })?;
                r.push(if y.is_exact() { y } else { y.truncate(self.prec) });
            }
            out.push(r);
        }
        let worst = crate::algebra::series::mat_prec(&out);
        if let Some(n) = worst.finite() {
            if n < qi(1) {
                return Err(Error::PrecisionExhausted(format!("dual known only modulo u^{n}")));
            }
        }
        Ok(KisinModule { a: out, ..self.clone() })
    }

    /// Base change along `u -> v^n`.
    pub fn base_change(&self, n: usize) -> Result<KisinModule> {
        if n == 0 {
            return Err(Error::Range("base change degree must be positive".into()));
        }
        Ok(KisinModule {
            e: self.e * n as i64,
            a: mat_map(&self.a, |x| x.substitute(n)),
            prec: self.prec * n as i64,
            ..self.clone()
        })
    }

    /// Module in the basis `m·C`: `A' = C^{-1}·A·φ(C)`.
    pub fn change_basis(&self, c: &Mat) -> Result<KisinModule> {
        if c.len() != self.rank() || check_square(c).is_err() {
            return Err(Error::Schema("basis change must be a square matrix of the module's rank".into()));
        }
        let det = mat_det(c);
        if det.valuation() != Some(0) {
            return Err(Error::NonUnitBasisChange);
        }
        let n = self.prec * self.field.p() as i64;
        let cinv = mat_inverse_to(c, n).map_err(|_| Error::NonUnitBasisChange)?;
        let a = mat_mul(&mat_mul(&cinv, &self.a), &mat_frobenius(c));
        let a = mat_map(&a, |x| if x.is_exact() { x.clone() } else { x.truncate(self.prec) });
        Ok(KisinModule { a, ..self.clone() })
    }

    /// Upper triangular within precision (`A_{i,j} = 0` for `i > j`).
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rank()).all(|i| (0..i).all(|j| self.a[i][j].is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rank()).all(|i| (i + 1..self.rank()).all(|j| self.a[i][j].is_zero()))
    }

    /// Equality of parameters and of the matrices up to the known precision.
    pub fn agrees_with(&self, o: &KisinModule) -> bool {
        self.field.same(&o.field)
            && self.e == o.e
            && self.r == o.r
            && self.c0bar == o.c0bar
            && self.rank() == o.rank()
            && self.a.iter().flatten().zip(o.a.iter().flatten()).all(|(x, y)| x.agrees_with(y))
    }

    pub fn to_json(&self) -> Value {
        let a: Vec<Value> = self.a.iter().map(|row| Value::Array(row.iter().map(series_to_json).collect())).collect();
        json!({
            "p": self.p(),
            "m": self.field.degree(),
            "modulus": self.field.modulus(),
            "e": self.e,
            "r": self.r,
            "c0bar": elem_to_json(&self.c0bar),
            "prec": self.prec,
            "A": a,
        })
    }

    /// Parse `{p, m, modulus?, e, r, c0bar?, prec?, A}`; unknown keys are rejected.
    pub fn from_json(v: &Value) -> Result<KisinModule> {
        let obj = v.as_object().ok_or_else(|| Error::Schema("module must be a JSON object".into()))?;
        const KEYS: [&str; 8] = ["p", "m", "modulus", "e", "r", "c0bar", "prec", "A"];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Schema(format!("unknown key {k:?} in module")));
        }
        let field = field_from_json(v)?;
        let int = |k: &str| -> Result<Option<i64>> {
            match obj.get(k) {
                None => Ok(None),
                Some(x) => x.as_i64().map(Some).ok_or_else(|| Error::Schema(format!("{k} must be an integer"))),
            }
        };
        let e = int("e")?.ok_or_else(|| Error::Schema("missing e".into()))?;
        let r = int("r")?.unwrap_or(1);
        let prec = int("prec")?;
        let c0bar = match obj.get("c0bar") {
            None => field.from_int(-1),
            Some(x) => elem_from_json(&field, x)?,
        };
        let rows = obj
            .get("A")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("A must be a matrix of series literals".into()))?;
        let mut a = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| Error::Schema("rows of A must be arrays".into()))?;
            a.push(row.iter().map(|x| series_from_json(&field, x)).collect::<Result<Vec<_>>>()?);
        }
        KisinModule::new(&field, e, r, c0bar, a, prec)
    }
}

/// Field from the `p`, `m`, `modulus` keys of a JSON object.
pub fn field_from_json(v: &Value) -> Result<Field> {
    let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| Error::Schema("missing integer p".into()))?;
    let m = match v.get("m") {
        None => 1,
        Some(x) => x.as_u64().ok_or_else(|| Error::Schema("m must be an integer".into()))? as usize,
    };
    match v.get("modulus") {
        None => Field::canonical(p, m),
        Some(x) => {
            let coeffs: Vec<u64> = serde_json::from_value::<Vec<i64>>(x.clone())
                .map_err(|_| Error::Schema("modulus must be a list of integers".into()))?
                .into_iter()
                .map(|c| c.rem_euclid(p as i64) as u64)
                .collect();
            let f = Field::new(p, coeffs)?;
            if f.degree() != m {
                return Err(Error::InvalidField(format!("modulus has degree {}, expected m = {m}", f.degree())));
            }
            Ok(f)
        }
    }
}

pub fn elem_to_json(a: &FFElem) -> Value {
    if a.field().degree() == 1 {
        json!(a.coeffs()[0])
    } else {
        json!(a.coeffs())
    }
}

pub fn elem_from_json(field: &Field, v: &Value) -> Result<FFElem> {
    match v {
        Value::Number(n) => {
            let n = n.as_i64().ok_or_else(|| Error::Schema(format!("bad coefficient {v}")))?;
            Ok(field.from_int(n))
        }
        Value::Array(xs) => {
            let cs = xs
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Schema(format!("bad coefficient {v}"))))
                .collect::<Result<Vec<_>>>()?;
            field.from_coeffs(&cs)
        }
        _ => Err(Error::Schema(format!("bad coefficient {v}"))),
    }
}

/// `[[exponent, coefficient], …]` with integer exponents.
pub fn series_to_json(f: &USeries) -> Value {
    Value::Array(f.terms().map(|(k, a)| json!([k, elem_to_json(a)])).collect())
}

pub fn field_to_json(f: &Field) -> Value {
    json!({"p": f.p(), "m": f.degree(), "modulus": f.modulus()})
}

/// `{"terms": [[[num, den], coeff], ...], "prec": [num, den] | "exact"}`.
pub fn puiseux_to_json(x: &PuiseuxSeries) -> Value {
    let terms: Vec<Value> = x.terms().map(|(k, a)| json!([q_to_json(*k), elem_to_json(a)])).collect();
    let prec = match x.prec() {
        Prec::Exact => json!("exact"),
        Prec::Upto(n) => q_to_json(n),
    };
    json!({"terms": terms, "prec": prec})
}

pub fn series_from_json(field: &Field, v: &Value) -> Result<USeries> {
    let terms = v.as_array().ok_or_else(|| Error::Schema(format!("series literal must be a list, got {v}")))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let pair = t.as_array().filter(|x| x.len() == 2).ok_or_else(|| Error::Schema(format!("bad term {t}")))?;
        let exp = crate::algebra::rational::q_from_json(&pair[0])
            .ok_or_else(|| Error::Schema(format!("bad exponent {}", pair[0])))?;
        if !exp.is_integer() || exp < qi(0) {
            return Err(Error::Schema(format!("exponent {exp} must be a non-negative integer")));
        }
        out.push((exp.to_integer() as usize, elem_from_json(field, &pair[1])?));
    }
    Ok(USeries::from_terms(field, &out, Prec::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::prime(3).unwrap()
    }

    fn x(f: &Field, c: &[i64]) -> USeries {
        USeries::new(f, c.iter().map(|&v| f.from_int(v)).collect(), Prec::Exact)
    }

    fn rank2() -> KisinModule {
        let f = f3();
        let a = vec![vec![x(&f, &[0, 1]), x(&f, &[1])], vec![x(&f, &[]), x(&f, &[0, 1])]];
        KisinModule::new(&f, 2, 1, f.from_int(-1), a, None).unwrap()
    }

    #[test]
    fn heights() {
        let f = f3();
        assert_eq!(e_height(&vec![vec![x(&f, &[1])]], 10).unwrap(), 0);
        assert_eq!(rank2().e_height().unwrap(), 2);
        let a = vec![vec![x(&f, &[0, 0, 0, 1])]];
        let err = KisinModule::new(&f, 2, 1, f.from_int(-1), a, None).unwrap_err();
        assert_eq!(err, Error::HeightExceeded { height: 3, bound: 2 });
    }

    #[test]
    fn snf_recomposes() {
        let m = rank2();
        let s = m.snf(1).unwrap();
        assert_eq!(s.exps, vec![0, 2]);
        let d = mat_mul(&mat_mul(&s.p, m.matrix()), &s.q);
        assert!(d[0][0].agrees_with(&x(m.field(), &[1])));
        assert!(d[1][1].agrees_with(&x(m.field(), &[0, 0, 1])));
        assert!(d[0][1].is_zero() && d[1][0].is_zero());
    }

    #[test]
    fn snf_stride() {
        let f = f3();
        let a = vec![vec![x(&f, &[0, 0, 0, 1]), x(&f, &[1])], vec![x(&f, &[]), x(&f, &[0, 0, 0, 1])]];
        let s = smith_normal_form(&a, 3, 30).unwrap();
        assert_eq!(s.exps, vec![0, 6]);
        assert!(s.p.iter().chain(&s.q).flatten().all(|e| e.in_stride(3)));
        let diag = vec![vec![x(&f, &[0, 0, 1]), x(&f, &[])], vec![x(&f, &[]), x(&f, &[1])]];
        assert_eq!(smith_normal_form(&diag, 1, 10).unwrap().exps, vec![0, 2]);
        let bad = vec![vec![x(&f, &[0, 1])]];
        assert_eq!(smith_normal_form(&bad, 3, 10).unwrap_err(), Error::EntriesNotInUp);
    }

    #[test]
    fn dual_example_and_involution() {
        let m = rank2();
        let d = m.dual().unwrap();
        let f = m.field().clone();
        let want = [[x(&f, &[0, -1]), x(&f, &[])], [x(&f, &[1]), x(&f, &[0, -1])]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(d.matrix()[i][j], want[i][j]);
            }
        }
        let dd = d.dual().unwrap();
        assert_eq!(dd.matrix(), m.matrix());
    }

    #[test]
    fn rank_one_dual() {
        let f = f3();
        for s in 0..=2 {
            let m = KisinModule::rank_one(s, f.from_int(2), 2, 1, f.from_int(-1)).unwrap();
            let d = m.dual().unwrap();
            // -u^{er-s}·a^{-1}, a = 2 = a^{-1}
            assert_eq!(d.matrix()[0][0], USeries::monomial(f.from_int(-2), (2 - s) as usize, Prec::Exact));
        }
        assert!(matches!(KisinModule::rank_one(3, f.one(), 2, 1, f.from_int(-1)), Err(Error::Range(_))));
    }

    #[test]
    fn base_and_basis_change() {
        let f = f3();
        let m = KisinModule::rank_one(1, f.one(), 2, 1, f.from_int(-1)).unwrap();
        let b = m.base_change(3).unwrap();
        assert_eq!(b.e(), 6);
        assert_eq!(b.matrix()[0][0], USeries::monomial(f.one(), 3, Prec::Exact));
        let c = vec![vec![x(&f, &[2])]];
        let m2 = KisinModule::rank_one(1, f.one(), 2, 1, f.from_int(-1)).unwrap();
        let m2 = m2.change_basis(&c).unwrap();
        // 2^{-1}·u·2^3 = u·2^2 = u
        assert_eq!(m2.matrix()[0][0], USeries::monomial(f.one(), 1, Prec::Exact));
        assert_eq!(m.change_basis(&vec![vec![x(&f, &[0, 1])]]).unwrap_err(), Error::NonUnitBasisChange);
    }

    #[test]
    fn json_round_trip() {
        let v: Value = serde_json::from_str(r#"{"p":3,"e":2,"r":1,"A":[[[[1,1]]]]}"#).unwrap();
        let m = KisinModule::from_json(&v).unwrap();
        assert_eq!(m.matrix()[0][0], USeries::monomial(m.field().one(), 1, Prec::Exact));
        let back = KisinModule::from_json(&m.to_json()).unwrap();
        assert!(back.agrees_with(&m));
        assert_eq!(back.prec(), m.prec());
        let bad: Value = serde_json::from_str(r#"{"p":3,"e":2,"A":[[[]]],"x":1}"#).unwrap();
        assert!(matches!(KisinModule::from_json(&bad), Err(Error::Schema(_))));
    }
}

//! The mixed-characteristic side for `k = F_p`, `r = 1`: Breuil data, the
//! explicit affine algebra of the group scheme over `O_K`, its reduction
//! modulo `p`, and lower breaks from valuations alone.

pub mod ok;

use std::sync::Arc;

use serde_json::{json, Value};

pub use ok::{EisensteinPoly, OKElem, OKRing};

use crate::algebra::rational::{q, qi};
use crate::algebra::series::{mat_frobenius, mat_inverse_to, mat_map, mat_mul, mat_prec};
use crate::algebra::{Field, Mat, Prec, USeries, Q};
use crate::error::{Error, Result};
use crate::kisin::{series_to_json, KisinModule, SmithData};
use crate::ramification::BreakData;

/// `(Z/p^N)[[u]]` truncated at a fixed length; `zero` marks entries that
/// vanish identically because they are built only from zero lifts.
#[derive(Clone, Debug)]
struct ZSer {
    c: Vec<i64>,
    zero: bool,
}

struct ZCtx {
    m: i64,
    len: usize,
}

impl ZCtx {
    fn lift(&self, f: &USeries) -> ZSer {
        let mut c = vec![0i64; self.len];
        for (k, a) in f.terms() {
            if k < self.len {
                c[k] = a.as_prime().expect("prime field coefficients") as i64;
            }
        }
        // the lift is a polynomial of our choosing, so a vanishing one is exactly zero
        let zero = c.iter().all(|&x| x == 0);
        ZSer { c, zero }
    }

    fn constant(&self, n: i64) -> ZSer {
        let mut c = vec![0i64; self.len];
        c[0] = n.rem_euclid(self.m);
        ZSer { c, zero: n == 0 }
    }

    fn add(&self, a: &ZSer, b: &ZSer) -> ZSer {
        ZSer { c: a.c.iter().zip(&b.c).map(|(x, y)| (x + y) % self.m).collect(), zero: a.zero && b.zero }
    }

    fn neg(&self, a: &ZSer) -> ZSer {
        ZSer { c: a.c.iter().map(|x| (self.m - x) % self.m).collect(), zero: a.zero }
    }

    fn mul(&self, a: &ZSer, b: &ZSer) -> ZSer {
        if a.zero || b.zero {
            return ZSer { c: vec![0; self.len], zero: true };
        }
        let m = self.m as i128;
        let mut c = vec![0i128; self.len];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate().take(self.len - i) {
                c[i + j] = (c[i + j] + x as i128 * y as i128) % m;
            }
        }
        ZSer { c: c.into_iter().map(|x| x as i64).collect(), zero: false }
    }

    fn inv(&self, a: &ZSer) -> Result<ZSer> {
        let a0inv = ok::modinv(a.c[0], self.m).ok_or_else(|| Error::NonUnit("series over Z/p^N".into()))?;
        let m = self.m as i128;
        let mut b = vec![0i64; self.len];
        b[0] = a0inv;
        for k in 1..self.len {
            let mut acc: i128 = 0;
            for j in 1..=k {
                acc = (acc + a.c[j] as i128 * b[k - j] as i128) % m;
            }
            b[k] = ((-acc).rem_euclid(m) * a0inv as i128 % m) as i64;
        }
        Ok(ZSer { c: b, zero: false })
    }

    fn det(&self, a: &[Vec<ZSer>]) -> ZSer {
        let n = a.len();
        if n == 1 {
            return a[0][0].clone();
        }
        let mut acc = self.constant(0);
        for j in 0..n {
            let t = self.mul(&a[0][j], &self.det(&minor(a, 0, j)));
            acc = if j % 2 == 0 { self.add(&acc, &t) } else { self.add(&acc, &self.neg(&t)) };
        }
        acc
    }

    fn mat_inv(&self, a: &[Vec<ZSer>]) -> Result<Vec<Vec<ZSer>>> {
        let n = a.len();
        let dinv = self.inv(&self.det(a))?;
        if n == 1 {
            return Ok(vec![vec![dinv]]);
        }
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = self.det(&minor(a, j, i));
                        let c = if (i + j) % 2 == 0 { c } else { self.neg(&c) };
                        self.mul(&c, &dinv)
                    })
                    .collect()
            })
            .collect())
    }

    fn mat_mul(&self, a: &[Vec<ZSer>], b: &[Vec<ZSer>]) -> Vec<Vec<ZSer>> {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..b[0].len())
                    .map(|j| (0..b.len()).fold(self.constant(0), |acc, k| self.add(&acc, &self.mul(&a[i][k], &b[k][j]))))
                    .collect()
            })
            .collect()
    }
}

fn minor(a: &[Vec<ZSer>], row: usize, col: usize) -> Vec<Vec<ZSer>> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

fn require_mixed(m: &KisinModule) -> Result<()> {
    if m.field().degree() != 1 {
        return Err(Error::RequiresPrimeField);
    }
    if m.r() != 1 {
        return Err(Error::RequiresHeightOne);
    }
    Ok(())
}

fn stride_ok(m: &KisinModule) -> bool {
    let p = m.p() as usize;
    m.e() % p as i64 == 0 && m.matrix().iter().flatten().all(|x| x.in_stride(p))
}

/// Check all preconditions of [`mixed_presentation`].
pub fn check_mixed(m: &KisinModule) -> Result<()> {
    require_mixed(m)?;
    if m.e() % m.p() as i64 != 0 {
        return Err(Error::RequiresPDividesE);
    }
    if !stride_ok(m) {
        return Err(Error::EntriesNotInUp);
    }
    Ok(())
}

/// The module itself when it meets the stride conditions, otherwise its
/// base change along `u -> u^p` (which always does). Returns the factor.
pub fn prepare_for_mixed(m: &KisinModule) -> Result<(KisinModule, usize)> {
    require_mixed(m)?;
    if stride_ok(m) {
        Ok((m.clone(), 1))
    } else {
        let p = m.p() as usize;
        Ok((m.base_change(p)?, p))
    }
}

/// Eisenstein polynomial matching the module's `c̄_0`, validated.
pub fn eisenstein_for(m: &KisinModule, e_poly: Option<&EisensteinPoly>) -> Result<EisensteinPoly> {
    let eis = match e_poly {
        Some(e) => e.clone(),
        None => EisensteinPoly::standard(m.p(), m.e() as usize, m.c0bar())?,
    };
    if eis.p() != m.p() || eis.e() as i64 != m.e() {
        return Err(Error::NotEisenstein(format!("{eis} does not have degree e = {} at p = {}", m.e(), m.p())));
    }
    if Some(eis.c0bar()) != m.c0bar().as_prime() {
        return Err(Error::NotEisenstein(format!("E(0)/p does not reduce to c0bar = {}", m.c0bar())));
    }
    Ok(eis)
}

/// Smith data with `Q = 1` when `A = T·diag(u^s)`, or `P = 1` when
/// `A = diag(u^s)·T`, for `T` triangular and invertible. These keep a
/// triangular module's equations triangular, which the generic form does not.
fn adapted_smith(m: &KisinModule, stride: usize, work: i64) -> Result<Option<SmithData>> {
    if !(m.is_upper_triangular() || m.is_lower_triangular()) {
        return Ok(None);
    }
    let a = m.matrix();
    let d = m.rank();
    let mut exps = Vec::with_capacity(d);
    for (i, row) in a.iter().enumerate() {
        match row[i].valuation() {
            Some(s) if s as usize % stride == 0 => exps.push(s),
            _ => return Ok(None),
        }
    }
    let id = crate::algebra::series::mat_identity(m.field(), d, Prec::Exact);
    let cols: Option<Mat> = (0..d)
        .map(|j| (0..d).map(|i| a[j][i].unshift(exps[i] as usize)).collect())
        .collect();
    if let Some(t) = cols {
        let p = mat_inverse_to(&t, work)?;
        return Ok(Some(SmithData { p, q: id, exps, stride }));
    }
    let rows: Option<Mat> = (0..d)
        .map(|i| (0..d).map(|j| a[i][j].unshift(exps[i] as usize)).collect())
        .collect();
    if let Some(t) = rows {
        let q = mat_inverse_to(&t, work)?;
        return Ok(Some(SmithData { p: id, q, exps, stride }));
    }
    Ok(None)
}

fn snf_for_mixed(m: &KisinModule, work: i64) -> Result<SmithData> {
    let stride = if stride_ok(m) { m.p() as usize } else { 1 };
    if let Some(snf) = adapted_smith(m, stride, work)? {
        return Ok(snf);
    }
    crate::kisin::smith_normal_form(m.matrix(), stride, work)
}

/// Breuil adapted-basis data: `r_i = e − s_i` and `G̃ ∈ GL_d(k[u]/(u^{ep}))`.
#[derive(Clone, Debug)]
pub struct BreuilData {
    pub r: Vec<i64>,
    pub g: Mat,
    pub stride: usize,
}

impl BreuilData {
    pub fn to_json(&self) -> Value {
        let g: Vec<Value> = self.g.iter().map(|row| Value::Array(row.iter().map(series_to_json).collect())).collect();
        json!({"r": self.r, "G": g, "stride": self.stride})
    }
}

fn fbar_of_up(eis: &EisensteinPoly, field: &Field, prec: i64) -> USeries {
    let p = eis.p() as usize;
    let terms: Vec<(usize, _)> = eis.f_coeffs().iter().enumerate().map(|(i, c)| (i * p, field.from_int(*c))).collect();
    USeries::from_terms(field, &terms, Prec::Exact).truncate(prec)
}

pub fn breuil_data(m: &KisinModule, e_poly: Option<&EisensteinPoly>) -> Result<BreuilData> {
    require_mixed(m)?;
    let eis = eisenstein_for(m, e_poly)?;
    let p = m.p() as i64;
    let e = m.e();
    let ep = e * p;
    let snf = snf_for_mixed(m, m.prec().max(2 * ep + e))?;
    let r: Vec<i64> = snf.exps.iter().map(|s| e - s).collect();
    let cbar = fbar_of_up(&eis, m.field(), ep).neg();
    let qinv = mat_inverse_to(&snf.q, ep)?;
    let fpinv = mat_inverse_to(&mat_frobenius(&snf.p), ep)?;
    let g = mat_map(&mat_mul(&qinv, &fpinv), |x| x.mul(&cbar).truncate(ep));
    if let Some(n) = mat_prec(&g).finite() {
        if n < qi(ep) {
            return Err(Error::PrecisionExhausted(format!("G known only modulo u^{n}")));
        }
    }
    Ok(BreuilData { r, g, stride: snf.stride })
}

/// Equations `X_i^p + (π^{s_i}/F(π))·Σ_j a_{j,i}X_j` over `O_K`.
#[derive(Clone, Debug)]
pub struct MixedPresentation {
    pub ring: Arc<OKRing>,
    /// `s_i = e − r_i`.
    pub exps: Vec<i64>,
    /// `a[j][i]`; `None` for entries that vanish identically.
    pub a: Vec<Vec<Option<OKElem>>>,
    pub f_pi: OKElem,
    /// The `u`-adic smith data the presentation was built from.
    pub snf: SmithData,
}

impl MixedPresentation {
    pub fn d(&self) -> usize {
        self.exps.len()
    }

    /// `(π^{s_i}/F(π))·a_{j,i}`, the coefficient of `X_j` in equation `i`.
    pub fn coefficient(&self, j: usize, i: usize) -> Result<Option<OKElem>> {
        let Some(a) = &self.a[j][i] else {
            return Ok(None);
        };
        let pi = OKElem::pi(&self.ring);
        Ok(Some(pi.pow(self.exps[i] as u64).mul(&self.f_pi.inv()?).mul(a)))
    }

    pub fn to_json(&self) -> Value {
        let eqs: Vec<Value> = (0..self.d())
            .map(|i| {
                let terms: Vec<Value> = (0..self.d())
                    .filter_map(|j| self.a[j][i].as_ref().map(|a| json!([j, a.coeffs()])))
                    .collect();
                json!({"exponent": self.exps[i], "a": terms})
            })
            .collect();
        json!({
            "E": self.ring.eis.coeffs(),
            "N": self.ring.n,
            "F_pi": self.f_pi.coeffs(),
            "equations": eqs,
        })
    }
}

/// Lift the Smith data to `W[[u]]` and evaluate
/// `a = −F(u)·φ^{-1}(Q̂)^{-1}·P̂^{-1}` at `π`.
pub fn mixed_presentation(m: &KisinModule, e_poly: Option<&EisensteinPoly>, n: u32) -> Result<MixedPresentation> {
    check_mixed(m)?;
    let eis = eisenstein_for(m, e_poly)?;
    let ring = OKRing::new(eis.clone(), n)?;
    let p = m.p() as usize;
    let e = m.e() as usize;
    // π^{eN} = 0 mod p^N, so series may be cut at u^{eN}
    let len = e * n as usize;
    let work = (p * len + 2 * e * m.rank()) as i64;
    let snf = snf_for_mixed(m, work)?;
    if let Some(pr) = mat_prec(&snf.p).min(mat_prec(&snf.q)).finite() {
        if pr < qi((p * len) as i64) {
            return Err(Error::PrecisionExhausted(format!("Smith transforms known only modulo u^{pr}")));
        }
    }
    let ctx = ZCtx { m: ring.modulus, len };
    let phat: Vec<Vec<ZSer>> = snf.p.iter().map(|row| row.iter().map(|x| ctx.lift(x)).collect()).collect();
    let qhat_inv_frob: Vec<Vec<ZSer>> = snf
        .q
        .iter()
        .map(|row| row.iter().map(|x| ctx.lift(&x.contract(p).expect("stride-p transform"))).collect())
        .collect();
    let f_series = {
        let mut c = vec![0i64; len];
        for (i, f) in eis.f_coeffs().iter().enumerate() {
            if i < len {
                c[i] = f.rem_euclid(ring.modulus);
            }
        }
        ZSer { c, zero: false }
    };
    let prod = ctx.mat_mul(&ctx.mat_inv(&qhat_inv_frob)?, &ctx.mat_inv(&phat)?);
    let minus_f = ctx.neg(&f_series);
    let a: Vec<Vec<Option<OKElem>>> = prod
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| (!x.zero).then(|| OKElem::from_poly(&ring, &ctx.mul(&minus_f, x).c)))
                .collect()
        })
        .collect();
    let f_pi = OKElem::from_poly(&ring, &eis.f_coeffs());
    Ok(MixedPresentation { ring, exps: snf.exps.clone(), a, f_pi, snf })
}

/// Entry-by-entry comparison of the mixed equations modulo `p` with the
/// equal-characteristic equations in the Smith basis modulo `u^e`.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub breuil: BreuilData,
    pub presentation: MixedPresentation,
    /// `mixed[j][i]` and `equal_char[j][i]`: coefficients of `u^0 … u^{e-1}`.
    pub mixed: Vec<Vec<Vec<u64>>>,
    pub equal_char: Vec<Vec<Vec<u64>>>,
    /// The Smith-basis matrix equals the module's matrix after the basis change.
    pub basis_change_ok: bool,
}

impl Comparison {
    pub fn entries_match(&self) -> bool {
        self.mixed == self.equal_char
    }

    pub fn mod_p_match(&self) -> bool {
        self.entries_match() && self.basis_change_ok
    }
}

pub fn compare_mod_p(m: &KisinModule, e_poly: Option<&EisensteinPoly>, n: u32) -> Result<Comparison> {
    let breuil = breuil_data(m, e_poly)?;
    let pres = mixed_presentation(m, e_poly, n)?;
    let d = m.rank();
    let e = m.e() as usize;
    let p = m.p() as usize;
    let mut mixed = vec![vec![vec![0u64; e]; d]; d];
    for (j, row) in mixed.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            if let Some(c) = pres.coefficient(j, i)? {
                *slot = c.reduce_mod_p();
            }
        }
    }
    // B = φ^{-1}(Q)^{-1}·P^{-1}·diag(u^s), computed over F_p
    let snf = &pres.snf;
    let work = e as i64 + 1;
    let qc: Mat = mat_map(&snf.q, |x| x.contract(p).expect("stride-p transform"));
    let pinv = mat_inverse_to(&snf.p, work)?;
    let qcinv = mat_inverse_to(&qc, work)?;
    let mut b = mat_mul(&qcinv, &pinv);
    for row in b.iter_mut() {
        for (i, x) in row.iter_mut().enumerate() {
            *x = x.shift(snf.exps[i] as usize).truncate(e as i64);
        }
    }
    let equal_char: Vec<Vec<Vec<u64>>> = b
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| (0..e).map(|k| (-&x.coeff(k)).as_prime().unwrap()).collect())
                .collect()
        })
        .collect();
    let changed = m.change_basis(&qc)?;
    let basis_change_ok = changed
        .matrix()
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| x.truncate(e as i64).agrees_with(y));
    Ok(Comparison { breuil, presentation: pres, mixed, equal_char, basis_change_ok })
}

/// Outcome of the valuation-only break computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedBreaks {
    Conclusive(BreakData),
    Inconclusive(String),
}

/// Root valuations of `X^p + C·X + H` with `v(C) = gamma` and `v(H) = eta`
/// (`None` for `H = 0`); `None` stands for the root `0`.
fn layer_roots(p: i64, gamma: Q, eta: Option<Q>) -> Vec<(Option<Q>, usize)> {
    let pq = qi(p);
    let slope = gamma / (pq - qi(1));
    let pu = p as usize;
    match eta {
        None => vec![(None, 1), (Some(slope), pu - 1)],
        Some(eta) if eta < pq * slope => vec![(Some(eta / pq), pu)],
        Some(eta) if eta > pq * slope => vec![(Some(eta - gamma), 1), (Some(slope), pu - 1)],
        Some(eta) => vec![(Some(eta / pq), pu)],
    }
}

/// Lower breaks of the points of the mixed presentation over `ō_K`, from
/// coefficient valuations only (`v(π) = 1`).
pub fn mixed_lower_breaks(pres: &MixedPresentation) -> MixedBreaks {
    let d = pres.d();
    let p = pres.ring.p() as i64;
    let bound = (pres.ring.e() as i64) * pres.ring.n as i64;
    // order the variables so each equation only involves earlier ones
    let deps: Vec<Vec<usize>> = (0..d).map(|i| (0..d).filter(|&j| j != i && pres.a[j][i].is_some()).collect()).collect();
    let mut order = Vec::with_capacity(d);
    let mut placed = vec![false; d];
    while order.len() < d {
        let Some(i) = (0..d).find(|&i| !placed[i] && deps[i].iter().all(|&j| placed[j])) else {
            if d == 2 {
                return eliminate_rank_two(pres);
            }
            return MixedBreaks::Inconclusive("equations are not triangular".into());
        };
        placed[i] = true;
        order.push(i);
    }
    let mut gammas = vec![qi(0); d];
    for i in 0..d {
        match pres.a[i][i].as_ref().and_then(OKElem::valuation) {
            Some(v) => gammas[i] = qi(pres.exps[i] + v),
            None => return MixedBreaks::Inconclusive(format!("diagonal coefficient {i} vanishes modulo p^N")),
        }
    }
    let mut out: Vec<(Vec<Option<Q>>, usize)> = vec![(vec![None; d], 1)];
    for &i in &order {
        let mut next = Vec::new();
        for (vals, w) in &out {
            let mut det_terms: Vec<Q> = Vec::new();
            let mut floor: Option<Q> = None;
            for &j in &deps[i] {
                let Some(vj) = vals[j] else { continue };
                match pres.a[j][i].as_ref().and_then(OKElem::valuation) {
                    Some(va) => det_terms.push(qi(pres.exps[i] + va) + vj),
                    None => {
                        let lb = qi(pres.exps[i] + bound) + vj;
                        floor = Some(floor.map_or(lb, |f: Q| f.min(lb)));
                    }
                }
            }
            det_terms.sort();
            let eta = match (det_terms.first(), floor) {
                (None, None) => None,
                (None, Some(_)) => {
                    return MixedBreaks::Inconclusive(format!("equation {i}: right-hand side vanishes modulo p^N"))
                }
                (Some(&eta), fl) => {
                    if det_terms.get(1) == Some(&eta) {
                        return MixedBreaks::Inconclusive(format!("equation {i}: leading terms may cancel"));
                    }
                    if fl.is_some_and(|f| f <= eta) {
                        return MixedBreaks::Inconclusive(format!("equation {i}: leading term not separated"));
                    }
                    Some(eta)
                }
            };
            for (root, mult) in layer_roots(p, gammas[i], eta) {
                let mut v = vals.clone();
                v[i] = root;
                next.push((v, w * mult));
            }
        }
        out = next;
    }
    let mut breaks = Vec::new();
    for (vals, w) in out {
        if let Some(b) = vals.iter().flatten().min() {
            breaks.extend(std::iter::repeat_n(*b, w));
        }
    }
    MixedBreaks::Conclusive(BreakData::from_multiset(pres.ring.p(), d, breaks))
}

type OKPoly = Vec<OKElem>;

fn poly_mul(a: &OKPoly, b: &OKPoly) -> OKPoly {
    let ring = a[0].ring();
    let mut out = vec![OKElem::zero(ring); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Rank two with a unit coupling: if equation `i` reads
/// `X_i^p + c_ii·X_i + c_ji·X_j` with `c_ji` a unit, then
/// `X_j = −(X_i^p + c_ii·X_i)/c_ji` and the points correspond to the roots of
/// `g = (X^p + c_ii·X)^p + c_jj·c_ji^{p−1}·(X^p + c_ii·X) − c_ij·c_ji^p·X`.
/// Since `v(X_j) >= v(X_i)`, each point's break is the valuation of its
/// `X_i`, read off the Newton polygon of `g`.
fn eliminate_rank_two(pres: &MixedPresentation) -> MixedBreaks {
    let coeff = |j: usize, i: usize| -> Option<OKElem> {
        match pres.coefficient(j, i) {
            Ok(Some(c)) => Some(c),
            Ok(None) => Some(OKElem::zero(&pres.ring)),
            Err(_) => None,
        }
    };
    let ring = &pres.ring;
    let p = ring.p() as usize;
    let bound = (ring.e() * ring.n as usize) as i64;
    for i in 0..2 {
        let j = 1 - i;
        let (Some(cii), Some(cji), Some(cjj), Some(cij)) = (coeff(i, i), coeff(j, i), coeff(j, j), coeff(i, j)) else {
            continue;
        };
        if cji.valuation() != Some(0) {
            continue;
        }
        let mut h = vec![OKElem::zero(ring); p + 1];
        h[1] = cii.clone();
        h[p] = OKElem::from_int(ring, 1);
        let mut g = h.clone();
        for _ in 1..p {
            g = poly_mul(&g, &h);
        }
        let lin = cjj.mul(&cji.pow(p as u64 - 1));
        for (k, hk) in h.iter().enumerate() {
            g[k] = g[k].add(&lin.mul(hk));
        }
        g[1] = g[1].sub(&cij.mul(&cji.pow(p as u64)));
        return newton_breaks(&g, bound, ring.p(), 2);
    }
    MixedBreaks::Inconclusive("equations are not triangular and no coupling coefficient is a unit".into())
}

/// Breaks from the Newton polygon of a monic `g` with `g(0) = 0`; vanishing
/// coefficients are only known to have valuation `>= bound`.
fn newton_breaks(g: &OKPoly, bound: i64, p: u64, d: usize) -> MixedBreaks {
    let top = g.len() - 1;
    let vals: Vec<Option<i64>> = g.iter().map(OKElem::valuation).collect();
    if vals[1].is_none() {
        return MixedBreaks::Inconclusive("linear coefficient vanishes modulo p^N".into());
    }
    // lower convex hull of the known points from k = 1 to the top
    let pts: Vec<(i64, i64)> = (1..=top).filter_map(|k| vals[k].map(|v| (k as i64, v))).collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the segment a → pt
            if (b.1 - a.1) * (pt.0 - a.0) >= (pt.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    for (k, v) in vals.iter().enumerate().skip(1) {
        if v.is_some() {
            continue;
        }
        let k = k as i64;
        let seg = hull.windows(2).find(|w| w[0].0 < k && k < w[1].0).expect("interior point");
        let (a, b) = (seg[0], seg[1]);
        // the unknown valuation is at least `bound`; it must not undercut the hull
        if bound * (b.0 - a.0) < a.1 * (b.0 - a.0) + (b.1 - a.1) * (k - a.0) {
            return MixedBreaks::Inconclusive("a coefficient below the Newton polygon vanishes modulo p^N".into());
        }
    }
    let mut breaks = Vec::new();
    for w in hull.windows(2) {
        let n = (w[1].0 - w[0].0) as usize;
        breaks.extend(std::iter::repeat_n(q(w[0].1 - w[1].1, n as i64), n));
    }
    MixedBreaks::Conclusive(BreakData::from_multiset(p, d, breaks))
}

/// Rank-one closed form on the mixed side: `s/(p−1)`.
pub fn rank_one_mixed_break(s: i64, p: u64) -> Q {
    q(s, p as i64 - 1)
}

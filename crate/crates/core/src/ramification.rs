//! Lower ramification breaks of the points, the pairing with the dual
//! module, and the upper filtration obtained from it by orthogonality.

use serde_json::{json, Value};

use crate::algebra::rational::{q, qi};
use crate::algebra::{Embedding, Prec, PuiseuxSeries, Q};
use crate::error::{Error, Result};
use crate::fp_linalg::{self, FpMat, Subspace};
use crate::kisin::KisinModule;
use crate::solver::{self, solve_homogeneous, solve_triangular_from, SolutionSet, SolveOptions};

/// Minimum coordinate valuation of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointBreak {
    Zero,
    Exact(Q),
    /// Every coordinate vanishes below the given precision.
    AtLeast(Q),
}

pub fn point_break(x: &[PuiseuxSeries]) -> PointBreak {
    let known = x.iter().filter_map(PuiseuxSeries::valuation).min();
    let floor = x.iter().filter(|s| s.is_zero()).filter_map(|s| s.prec().finite()).min();
    match (known, floor) {
        (None, None) => PointBreak::Zero,
        (None, Some(f)) => PointBreak::AtLeast(f),
        (Some(v), None) => PointBreak::Exact(v),
        (Some(v), Some(f)) if v <= f => PointBreak::Exact(v),
        (Some(_), Some(f)) => PointBreak::AtLeast(f),
    }
}

/// Lower breaks: each jump `i` with the number of nonzero points whose
/// minimum coordinate valuation is exactly `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakData {
    pub p: u64,
    pub d: usize,
    pub jumps: Vec<(Q, usize)>,
}

impl BreakData {
    /// `dim ℋ_i`: points with break `>= i`.
    pub fn dim_at(&self, i: Q) -> usize {
        let count = 1 + self.jumps.iter().filter(|(j, _)| *j >= i).map(|(_, m)| m).sum::<usize>();
        log_p(count, self.p)
    }

    /// Dimension on each interval ending at a jump.
    pub fn dims(&self) -> Vec<(Q, usize)> {
        self.jumps.iter().map(|(j, _)| (*j, self.dim_at(*j))).collect()
    }

    /// Multiset of breaks, one entry per nonzero point.
    pub fn multiset(&self) -> Vec<Q> {
        self.jumps.iter().flat_map(|(j, m)| std::iter::repeat_n(*j, *m)).collect()
    }

    pub fn scaled(&self, n: Q) -> BreakData {
        BreakData { jumps: self.jumps.iter().map(|(j, m)| (*j * n, *m)).collect(), ..self.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "jumps": self.jumps.iter().map(|(j, m)| json!([j.numer(), j.denom(), m])).collect::<Vec<_>>(),
            "dims": self.dims().iter().map(|(j, dd)| json!([j.numer(), j.denom(), dd])).collect::<Vec<_>>(),
        })
    }

    /// Parse the `jumps` list written by [`BreakData::to_json`]; `dims` is
    /// recomputed and must agree when present.
    pub fn from_json(p: u64, v: &Value) -> Result<BreakData> {
        let bad = || Error::Schema(format!("malformed break data {v}"));
        let list = v.get("jumps").and_then(Value::as_array).ok_or_else(bad)?;
        let mut jumps = Vec::with_capacity(list.len());
        for t in list {
            let t: Vec<i64> = serde_json::from_value(t.clone()).map_err(|_| bad())?;
            match t[..] {
                [n, den, m] if den > 0 && m > 0 => jumps.push((q(n, den), m as usize)),
                _ => return Err(bad()),
            }
        }
        let count = 1 + jumps.iter().map(|(_, m)| m).sum::<usize>();
        let d = log_p(count, p);
        if (p as usize).pow(d as u32) != count {
            return Err(Error::Schema(format!("{count} points is not a power of {p}")));
        }
        let bd = BreakData { p, d, jumps };
        if v.get("dims").is_some_and(|dims| *dims != bd.to_json()["dims"]) {
            return Err(Error::Schema("dims disagree with jumps".into()));
        }
        Ok(bd)
    }

    /// Aggregate a multiset of breaks.
    pub fn from_multiset(p: u64, d: usize, mut breaks: Vec<Q>) -> BreakData {
        breaks.sort();
        let mut jumps: Vec<(Q, usize)> = Vec::new();
        for b in breaks {
            match jumps.last_mut() {
                Some((j, m)) if *j == b => *m += 1,
                _ => jumps.push((b, 1)),
            }
        }
        BreakData { p, d, jumps }
    }
}

fn log_p(mut n: usize, p: u64) -> usize {
    let mut k = 0;
    while n > 1 {
        n /= p as usize;
        k += 1;
    }
    k
}

/// Lower breaks of the points of `sols`.
pub fn lower_breaks(sols: &SolutionSet) -> Result<BreakData> {
    let mut breaks = Vec::new();
    for (c, x) in sols.points() {
        match point_break(&x) {
            PointBreak::Zero => {}
            PointBreak::Exact(v) => breaks.push(v),
            PointBreak::AtLeast(f) => {
                return Err(Error::PrecisionExhausted(format!(
                    "break of point {c:?} is not resolved below u^{f}"
                )))
            }
        }
    }
    let bd = BreakData::from_multiset(sols.p(), sols.dim(), breaks);
    let total: usize = bd.jumps.iter().map(|j| j.1).sum();
    if total + 1 != (sols.p() as usize).pow(sols.dim() as u32) {
        return Err(Error::Inconsistent("a nonzero point has no visible coordinate".into()));
    }
    Ok(bd)
}

/// `ℋ_i` (or `ℋ_{i+}` when `strict`) as a subspace of coefficient vectors
/// over the basis of `sols`.
pub fn lower_subgroup(sols: &SolutionSet, i: Q, strict: bool) -> Result<Subspace> {
    let mut members = Vec::new();
    for (c, x) in sols.points() {
        let keep = match point_break(&x) {
            PointBreak::Zero => true,
            PointBreak::Exact(v) => {
                if strict {
                    v > i
                } else {
                    v >= i
                }
            }
            PointBreak::AtLeast(f) if (strict && f > i) || (!strict && f >= i) => true,
            PointBreak::AtLeast(f) => {
                return Err(Error::PrecisionExhausted(format!("cannot compare a break >= {f} with {i}")))
            }
        };
        if keep {
            members.push(c);
        }
    }
    let sub = Subspace::span(sols.dim(), sols.p(), &members);
    if (sols.p() as usize).pow(sub.dim() as u32) != members.len() {
        return Err(Error::Inconsistent(format!("points with break >= {i} do not form a subgroup")));
    }
    Ok(sub)
}

/// `er/(p−1)`, the valuation of the pairing values.
pub fn pairing_valuation(m: &KisinModule) -> Q {
    q(m.er(), m.p() as i64 - 1)
}

/// The fixed nonzero solution of `h^p = (u^{er}/c̄_0^r)·h`.
pub fn tbar(m: &KisinModule, cap: i64) -> Result<(PuiseuxSeries, Embedding)> {
    let g = m.twist_coefficient()?;
    solve_homogeneous(&g, pairing_valuation(m) + qi(m.e()), cap)
}

/// Gram matrix of the pairing on basis solutions; `None` marks an entry
/// whose value is hidden below the available precision.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub p: u64,
    pub entries: Vec<Vec<Option<u64>>>,
    pub tbar: PuiseuxSeries,
}

/// Completions are enumerated only up to this many.
const MAX_COMPLETIONS: usize = 1 << 16;

impl GramMatrix {
    pub fn unresolved(&self) -> usize {
        self.entries.iter().flatten().filter(|x| x.is_none()).count()
    }

    /// Every `F_p` matrix consistent with the known entries.
    pub fn completions(&self) -> Result<Vec<FpMat>> {
        let holes: Vec<(usize, usize)> = self
            .entries
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, x)| x.is_none()).map(move |(j, _)| (i, j)))
            .collect();
        let total = (self.p as usize).checked_pow(holes.len() as u32).filter(|&t| t <= MAX_COMPLETIONS);
        let Some(_) = total else {
            return Err(Error::PrecisionExhausted(format!("{} unresolved pairing values", holes.len())));
        };
        let base: FpMat = self.entries.iter().map(|row| row.iter().map(|x| x.unwrap_or(0)).collect()).collect();
        Ok(fp_linalg::all_vectors(holes.len(), self.p)
            .map(|fill| {
                let mut g = base.clone();
                for ((i, j), v) in holes.iter().zip(fill) {
                    g[*i][*j] = v;
                }
                g
            })
            .collect())
    }

    /// Value of `f` if it is the same for every completion.
    pub fn decide<T: PartialEq>(&self, what: &str, f: impl Fn(&FpMat) -> T) -> Result<T> {
        let mut out: Option<T> = None;
        for g in self.completions()? {
            let v = f(&g);
            match &out {
                None => out = Some(v),
                Some(prev) if *prev == v => {}
                Some(_) => {
                    return Err(Error::PrecisionExhausted(format!("{what} depends on unresolved pairing values")))
                }
            }
        }
        out.ok_or_else(|| Error::Inconsistent("empty completion set".into()))
    }

    pub fn is_invertible(&self) -> Result<bool> {
        let d = self.entries.len();
        self.decide("invertibility", |g| fp_linalg::rank(g, self.p) == d)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|row| Value::Array(row.iter().map(|x| x.map_or(Value::Null, |v| json!(v))).collect()))
                .collect(),
        )
    }
}

/// Gram matrix `G_{a,b} = h(f_a, g_b)/𝔱̄` with `h(f, g) = Σ_i f_i·g_i`.
///
/// `sols` and `dual_sols` must live in the field of `tbar`.
pub fn pairing_gram(m: &KisinModule, sols: &SolutionSet, dual_sols: &SolutionSet, tbar: &PuiseuxSeries) -> Result<GramMatrix> {
    if !sols.field().same(dual_sols.field()) || !sols.field().same(tbar.field()) {
        return Err(Error::Inconsistent("pairing inputs live in different fields".into()));
    }
    let tau = pairing_valuation(m);
    let (_, kappa) = tbar.leading().ok_or_else(|| Error::Inconsistent("zero tbar".into()))?;
    let kinv = kappa.inv()?;
    let mut entries = Vec::with_capacity(sols.dim());
    for f in &sols.basis {
        let mut row = Vec::with_capacity(dual_sols.dim());
        for g in &dual_sols.basis {
            let mut h = PuiseuxSeries::zero(sols.field(), Prec::Exact);
            for (fi, gi) in f.iter().zip(g) {
                h = h.add(&fi.mul(gi));
            }
            if let Some(v) = h.valuation().filter(|v| *v < tau) {
                return Err(Error::Inconsistent(format!("pairing value has a term u^{v} below u^{tau}")));
            }
            if !h.prec().covers(tau) {
                row.push(None);
                continue;
            }
            let scalar = &h.coeff(tau) * &kinv;
            let v = scalar
                .as_prime()
                .ok_or_else(|| Error::Inconsistent(format!("pairing value {scalar} is not in F_p·tbar")))?;
            row.push(Some(v));
        }
        entries.push(row);
    }
    Ok(GramMatrix { p: m.p(), entries, tbar: tbar.clone() })
}

/// Solutions of a module and of its dual, with `𝔱̄`, all over one field.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub module: KisinModule,
    pub dual: KisinModule,
    pub sols: SolutionSet,
    pub dual_sols: SolutionSet,
    pub tbar: PuiseuxSeries,
}

impl DualPair {
    pub fn new(m: &KisinModule, opts: &SolveOptions) -> Result<DualPair> {
        let dual = m.dual()?;
        DualPair::with_dual(m, &dual, opts)
    }

    /// Same as [`DualPair::new`] with an explicitly supplied dual matrix.
    pub fn with_dual(m: &KisinModule, dual: &KisinModule, opts: &SolveOptions) -> Result<DualPair> {
        let cap = opts.cap(m.p());
        let sols = solver::solve_triangular(m, opts)?;
        let dual_sols = solve_triangular_from(dual, &sols.embedding, opts)?;
        let sols = sols.embed(&dual_sols.extension);
        let (t, ext) = tbar(&sols.module, cap)?;
        let sols = sols.embed(&ext);
        let dual_sols = dual_sols.embed(&ext);
        Ok(DualPair { module: m.clone(), dual: dual.clone(), sols, dual_sols, tbar: t })
    }

    pub fn gram(&self) -> Result<GramMatrix> {
        pairing_gram(&self.sols.module, &self.sols, &self.dual_sols, &self.tbar)
    }
}

/// Upper filtration: `(j, ℋ^j)` with `ℋ^j` constant on `(previous j, j]`,
/// full up to the first jump and zero after the last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperFiltration {
    pub p: u64,
    pub d: usize,
    pub steps: Vec<(Q, Subspace)>,
}

impl UpperFiltration {
    pub fn at(&self, j: Q) -> Subspace {
        for (jump, sub) in &self.steps {
            if j <= *jump {
                return sub.clone();
            }
        }
        Subspace::zero(self.d, self.p)
    }

    pub fn jumps(&self) -> Vec<(Q, usize)> {
        let p = self.p as usize;
        self.steps
            .iter()
            .enumerate()
            .map(|(k, (j, sub))| {
                let after = self.steps.get(k + 1).map_or(0, |s| s.1.dim());
                (*j, p.pow(sub.dim() as u32) - p.pow(after as u32))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "jumps": self.jumps().iter().map(|(j, m)| json!([j.numer(), j.denom(), m])).collect::<Vec<_>>(),
            "dims": self.steps.iter().map(|(j, s)| json!([j.numer(), j.denom(), s.dim()])).collect::<Vec<_>>(),
        })
    }
}

/// Which side of the pairing a filtration lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Module,
    Dual,
}

impl DualPair {
    fn sols_of(&self, side: Side) -> &SolutionSet {
        match side {
            Side::Module => &self.sols,
            Side::Dual => &self.dual_sols,
        }
    }

    /// `ℋ^j` on `side`, i.e. the orthogonal of `ℋ_{l(j)+}` on the other side.
    pub fn upper_subspace(&self, gram: &GramMatrix, side: Side, j: Q) -> Result<Subspace> {
        let tau = pairing_valuation(&self.sols.module);
        let l = tau - j / qi(self.sols.p() as i64);
        let other = match side {
            Side::Module => Side::Dual,
            Side::Dual => Side::Module,
        };
        let w = lower_subgroup(self.sols_of(other), l, true)?;
        gram.decide("orthogonal complement", |g| match side {
            Side::Module => w.left_orthogonal(g),
            Side::Dual => w.right_orthogonal(g),
        })
    }

    pub fn upper_filtration(&self, gram: &GramMatrix, side: Side) -> Result<UpperFiltration> {
        let other = match side {
            Side::Module => Side::Dual,
            Side::Dual => Side::Module,
        };
        let tau = pairing_valuation(&self.sols.module);
        let p = qi(self.sols.p() as i64);
        let lower = lower_breaks(self.sols_of(other))?;
        let mut js: Vec<Q> = lower.jumps.iter().map(|(l, _)| p * (tau - *l)).collect();
        js.sort();
        let mut steps = Vec::with_capacity(js.len());
        for j in js {
            steps.push((j, self.upper_subspace(gram, side, j)?));
        }
        let d = self.sols.dim();
        Ok(UpperFiltration { p: self.sols.p(), d, steps })
    }
}

/// Upper filtration of a module through the pairing with its dual.
pub fn upper_filtration(m: &KisinModule, opts: &SolveOptions) -> Result<UpperFiltration> {
    let pair = DualPair::new(m, opts)?;
    let gram = pair.gram()?;
    pair.upper_filtration(&gram, Side::Module)
}

/// Named pass/fail checks of the duality between a module and its dual.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub lower: BreakData,
    pub dual_lower: BreakData,
    pub upper: UpperFiltration,
    pub dual_upper: UpperFiltration,
    pub gram: GramMatrix,
    pub checks: Vec<(String, bool)>,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn to_json(&self) -> Value {
        let checks: serde_json::Map<String, Value> = self
            .checks
            .iter()
            .map(|(k, v)| (k.clone(), json!(if *v { "pass" } else { "fail" })))
            .collect();
        json!({
            "lower": self.lower.to_json(),
            "dual_lower": self.dual_lower.to_json(),
            "upper": self.upper.to_json(),
            "dual_upper": self.dual_upper.to_json(),
            "gram": self.gram.to_json(),
            "checks": checks,
        })
    }
}

/// Rational grid of `n` points spread over `[0, top]`.
pub fn j_grid(top: Q, n: usize) -> Vec<Q> {
    (0..n).map(|k| top * q(k as i64, n as i64 - 1)).collect()
}

pub fn duality_report(m: &KisinModule, opts: &SolveOptions) -> Result<DualityReport> {
    let pair = DualPair::new(m, opts)?;
    duality_report_for(&pair)
}

pub fn duality_report_for(pair: &DualPair) -> Result<DualityReport> {
    let gram = pair.gram()?;
    let lower = lower_breaks(&pair.sols)?;
    let dual_lower = lower_breaks(&pair.dual_sols)?;
    let upper = pair.upper_filtration(&gram, Side::Module)?;
    let dual_upper = pair.upper_filtration(&gram, Side::Dual)?;
    let m = &pair.sols.module;
    let d = m.rank();
    let p = qi(m.p() as i64);
    let tau = pairing_valuation(m);
    let mut checks = Vec::new();

    checks.push(("gram_invertible".to_string(), gram.is_invertible()?));

    // (W^⊥)^⊥ = W for every lower-filtration step on both sides
    let mut recover = true;
    for (side, bd) in [(Side::Dual, &dual_lower), (Side::Module, &lower)] {
        let mut levels: Vec<(Q, bool)> = vec![(qi(0), false)];
        levels.extend(bd.jumps.iter().map(|(l, _)| (*l, true)));
        for (l, strict) in levels {
            let w = lower_subgroup(pair.sols_of(side), l, strict)?;
            let ok = gram.decide("double orthogonal", |g| match side {
                Side::Dual => w.left_orthogonal(g).right_orthogonal(g) == w,
                Side::Module => w.right_orthogonal(g).left_orthogonal(g) == w,
            })?;
            recover &= ok;
        }
    }
    checks.push(("double_orthogonal".to_string(), recover));

    // dim ℋ^j + dim ℋ^∨_{l(j)+} = d on a grid
    let mut dims_ok = true;
    for j in j_grid(p * tau + qi(1), 50) {
        let up = pair.upper_subspace(&gram, Side::Module, j)?;
        let w = lower_subgroup(&pair.dual_sols, tau - j / p, true)?;
        dims_ok &= up.dim() + w.dim() == d;
    }
    checks.push(("orthogonality_dims".to_string(), dims_ok));

    let lower_bound_ok = lower.jumps.iter().chain(&dual_lower.jumps).all(|(i, _)| *i <= tau);
    let upper_bound_ok = [&upper, &dual_upper].iter().all(|u| u.at(p * tau + q(1, 1000)).dim() == 0)
        && upper.steps.iter().chain(&dual_upper.steps).all(|(j, _)| *j <= p * tau);
    checks.push(("lower_bound".to_string(), lower_bound_ok));
    checks.push(("upper_bound".to_string(), upper_bound_ok));

    checks.push(("closed_forms".to_string(), closed_forms_hold(pair, &lower, &upper)?));

    Ok(DualityReport { lower, dual_lower, upper, dual_upper, gram, checks })
}

/// Rank one: the break is `s/(p−1)` and `ℋ^j` is full exactly for
/// `j <= p·s/(p−1)`. Higher rank: every diagonal layer's own line has
/// valuation `v(A_jj)/(p−1)`.
fn closed_forms_hold(pair: &DualPair, lower: &BreakData, upper: &UpperFiltration) -> Result<bool> {
    let m = &pair.sols.module;
    let p = qi(m.p() as i64);
    let pm1 = p - qi(1);
    if m.rank() == 1 {
        let s = qi(m.matrix()[0][0].valuation().unwrap_or(0));
        let lower_ok = lower.jumps == vec![(s / pm1, m.p() as usize - 1)];
        let edge = p * s / pm1;
        let upper_ok = upper.at(edge).dim() == 1 && upper.at(edge + q(1, 1000)).dim() == 0;
        return Ok(lower_ok && upper_ok);
    }
    let mut ok = true;
    for sols in [&pair.sols, &pair.dual_sols] {
        let a = sols.module.matrix();
        for (b, &j) in sols.basis.iter().zip(&sols.order) {
            let want = a[j][j].valuation().map(|v| qi(v) / pm1);
            ok &= b[j].valuation() == want;
        }
    }
    Ok(ok)
}

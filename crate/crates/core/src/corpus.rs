//! Module corpora and the per-instance verification driver.

use serde_json::{json, Value};

use crate::algebra::{Field, Prec, USeries};
use crate::error::{Error, Result};
use crate::kisin::KisinModule;
use crate::mixedchar::{self, EisensteinPoly, MixedBreaks};
use crate::ramification::{self, BreakData, DualPair, DualityReport};
use crate::solver::{self, SolveOptions};

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub module: KisinModule,
    /// Replaces the computed dual; used for negative controls.
    pub dual: Option<KisinModule>,
    pub eisenstein: Option<EisensteinPoly>,
    pub n: Option<u32>,
}

impl Instance {
    pub fn new(name: impl Into<String>, module: KisinModule) -> Instance {
        Instance { name: name.into(), module, dual: None, eisenstein: None, n: None }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"name": self.name, "module": self.module.to_json()});
        if let Some(d) = &self.dual {
            v["dual"] = d.to_json();
        }
        if let Some(e) = &self.eisenstein {
            v["E"] = json!(e.coeffs());
        }
        if let Some(n) = self.n {
            v["N"] = json!(n);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Instance> {
        let obj = v.as_object().ok_or_else(|| Error::Schema("instance must be an object".into()))?;
        if let Some(k) = obj.keys().find(|k| !["name", "module", "dual", "E", "N"].contains(&k.as_str())) {
            return Err(Error::Schema(format!("unknown key {k:?} in instance")));
        }
        let name = obj.get("name").and_then(Value::as_str).unwrap_or("unnamed").to_string();
        let module = KisinModule::from_json(obj.get("module").ok_or_else(|| Error::Schema("missing module".into()))?)?;
        let dual = obj.get("dual").map(KisinModule::from_json).transpose()?;
        let (eisenstein, n) = parse_mixed_keys(module.p(), v)?;
        Ok(Instance { name, module, dual, eisenstein, n })
    }
}

/// Optional `E` and `N` keys of an instance or `compare-mixed` input.
pub fn parse_mixed_keys(p: u64, v: &Value) -> Result<(Option<EisensteinPoly>, Option<u32>)> {
    let eis = match v.get("E") {
        None => None,
        Some(x) => {
            let c: Vec<i64> =
                serde_json::from_value(x.clone()).map_err(|_| Error::Schema("E must be a list of integers".into()))?;
            Some(EisensteinPoly::new(p, c)?)
        }
    };
    let n = match v.get("N") {
        None => None,
        Some(x) => Some(
            x.as_u64()
                .filter(|n| (1..=16).contains(n))
                .ok_or_else(|| Error::Schema("N must be an integer in 1..=16".into()))? as u32,
        ),
    };
    Ok((eis, n))
}

/// Parse `{"instances": [...]}`; an empty list is rejected.
pub fn parse_corpus(v: &Value) -> Result<Vec<Instance>> {
    let list = v
        .get("instances")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("corpus must be an object with an \"instances\" list".into()))?;
    list.iter().map(Instance::from_json).collect()
}

pub fn corpus_to_json(insts: &[Instance]) -> Value {
    json!({"instances": insts.iter().map(Instance::to_json).collect::<Vec<_>>()})
}

/// Every rank-one module `(u^s)` for `p ∈ {3,5}`, `e <= 6`, `r ∈ {1,2}`.
pub fn rank_one_grid() -> Vec<Instance> {
    let mut out = Vec::new();
    for p in [3u64, 5] {
        let f = Field::prime(p).expect("prime");
        for e in 1..=6 {
            for r in 1..=2 {
                for s in 0..=e * r {
                    let m = KisinModule::rank_one(s, f.one(), e, r, f.from_int(-1)).expect("admissible");
                    out.push(Instance::new(format!("rank1-p{p}-e{e}-r{r}-s{s}"), m));
                }
            }
        }
    }
    out
}

type Entry<'a> = &'a [(usize, i64)];

fn build(f: &Field, e: i64, r: i64, c0: i64, rows: &[&[Entry]]) -> KisinModule {
    let a = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    let terms: Vec<_> = t.iter().map(|(k, c)| (*k, f.from_int(*c))).collect();
                    USeries::from_terms(f, &terms, Prec::Exact)
                })
                .collect()
        })
        .collect();
    KisinModule::new(f, e, r, f.from_int(c0), a, None).expect("curated module is admissible")
}

/// Hand-picked triangular modules of rank two and three.
pub fn curated() -> Vec<Instance> {
    let f3 = Field::prime(3).unwrap();
    let f5 = Field::prime(5).unwrap();
    let o: Entry = &[];
    let one: Entry = &[(0, 1)];
    let u: Entry = &[(1, 1)];
    let u2: Entry = &[(2, 1)];
    let u3: Entry = &[(3, 1)];
    let mut out = vec![
        Instance::new("r2-p3-e2-jordan", build(&f3, 2, 1, -1, &[&[u, one], &[o, u]])),
        Instance::new("r2-p3-e2-lower", build(&f3, 2, 1, -1, &[&[u, o], &[one, u]])),
        Instance::new("r2-p3-e2-etale-mult", build(&f3, 2, 1, -1, &[&[one, o], &[o, u2]])),
        Instance::new("r2-p3-e2-mult-etale-glued", build(&f3, 2, 1, -1, &[&[u2, one], &[o, one]])),
        Instance::new("r2-p3-e2-c1", build(&f3, 2, 1, 1, &[&[u, one], &[o, u]])),
        Instance::new("r2-p3-e2-c1-glued", build(&f3, 2, 1, 1, &[&[u2, one], &[o, one]])),
        Instance::new("r2-p3-e3-diag", build(&f3, 3, 1, -1, &[&[u3, o], &[o, one]])),
        Instance::new("r2-p3-e3-glued", build(&f3, 3, 1, -1, &[&[u, u], &[o, u2]])),
        Instance::new("r2-p3-e3-lower", build(&f3, 3, 1, -1, &[&[u2, o], &[u, u]])),
        Instance::new("r2-p3-e3-unipotent", build(&f3, 3, 1, -1, &[&[u3, one], &[o, one]])),
        Instance::new("r2-p3-e6-jordan", build(&f3, 6, 1, -1, &[&[u3, one], &[o, u3]])),
        Instance::new("r2-p3-e2-r2", build(&f3, 2, 2, -1, &[&[u3, u], &[o, u]])),
        Instance::new("r2-p5-e2-jordan", build(&f5, 2, 1, -1, &[&[u, one], &[o, u]])),
        Instance::new("r2-p5-e1-lower", build(&f5, 1, 1, -1, &[&[u, o], &[one, one]])),
        Instance::new("r2-p5-e5-glued", build(&f5, 5, 1, -1, &[&[&[(5, 1)], &[(5, 2)]], &[o, one]])),
        Instance::new("r3-p3-e3-lower-adapted", build(&f3, 3, 1, -1, &[&[u, o, o], &[u, one, o], &[o, u, u2]])),
        Instance::new("r3-p3-e2-upper-adapted", build(&f3, 2, 1, -1, &[&[one, u, u2], &[o, u, u2], &[o, o, u2]])),
        Instance::new("r3-p3-e3-jordan", build(&f3, 3, 1, -1, &[&[u, one, o], &[o, u, one], &[o, o, u]])),
        Instance::new("r3-p3-e3-lower", build(&f3, 3, 1, -1, &[&[u2, o, o], &[one, u, o], &[o, one, one]])),
        Instance::new("r3-p3-e2-mixed-heights", build(&f3, 2, 1, -1, &[&[one, u, o], &[o, u, one], &[o, o, u]])),
    ];
    let f9 = Field::canonical(3, 2).unwrap();
    let t = f9.generator();
    let a = vec![
        vec![USeries::monomial(f9.one(), 1, Prec::Exact), USeries::constant(t, Prec::Exact)],
        vec![USeries::zero(&f9, Prec::Exact), USeries::monomial(f9.one(), 1, Prec::Exact)],
    ];
    let m = KisinModule::new(&f9, 2, 1, f9.from_int(-1), a, None).unwrap();
    out.push(Instance::new("r2-f9-e2-jordan", m));
    out
}

/// The shipped corpus: the rank-one grid followed by the curated set.
pub fn builtin() -> Vec<Instance> {
    let mut v = rank_one_grid();
    v.extend(curated());
    v
}

/// Mixed-characteristic part of an instance report.
#[derive(Clone, Debug)]
pub struct MixedOutcome {
    /// Base-change factor applied to meet the stride conditions.
    pub factor: usize,
    pub mod_p_match: bool,
    /// `None` when the valuation-only computation was inconclusive.
    pub breaks_equal: Option<bool>,
    pub mixed_breaks: MixedBreaks,
    pub equal_char_breaks: BreakData,
}

impl MixedOutcome {
    pub fn to_json(&self) -> Value {
        let breaks = match &self.mixed_breaks {
            MixedBreaks::Conclusive(b) => b.to_json(),
            MixedBreaks::Inconclusive(why) => json!({"inconclusive": why}),
        };
        json!({
            "base_change": self.factor,
            "mod_p_match": self.mod_p_match,
            "breaks_equal": breaks_value(self.breaks_equal),
            "mixed_breaks": breaks,
            "equal_char_breaks": self.equal_char_breaks.to_json(),
        })
    }
}

pub fn breaks_value(b: Option<bool>) -> Value {
    match b {
        Some(x) => json!(x),
        None => json!("inconclusive"),
    }
}

/// Compare the mixed presentation of `m` (after base change if needed)
/// with the equal-characteristic side.
pub fn mixed_outcome(
    m: &KisinModule,
    eis: Option<&EisensteinPoly>,
    n: Option<u32>,
    opts: &SolveOptions,
) -> Result<MixedOutcome> {
    let (pm, factor) = mixedchar::prepare_for_mixed(m)?;
    let eis = eis.map(|e| e.substitute(factor));
    let n = n.unwrap_or(2);
    let cmp = mixedchar::compare_mod_p(&pm, eis.as_ref(), n)?;
    let sols = solver::solve_triangular(&pm, opts)?;
    let equal_char_breaks = ramification::lower_breaks(&sols)?;
    let mixed_breaks = mixedchar::mixed_lower_breaks(&cmp.presentation);
    let breaks_equal = match &mixed_breaks {
        MixedBreaks::Conclusive(b) => Some(*b == equal_char_breaks),
        MixedBreaks::Inconclusive(_) => None,
    };
    Ok(MixedOutcome { factor, mod_p_match: cmp.mod_p_match(), breaks_equal, mixed_breaks, equal_char_breaks })
}

#[derive(Clone, Debug)]
pub struct InstanceReport {
    pub name: String,
    pub duality: Result<DualityReport>,
    /// `None` when the mixed side does not apply (`k != F_p` or `r != 1`).
    pub mixed: Option<Result<MixedOutcome>>,
}

impl InstanceReport {
    pub fn passed(&self) -> bool {
        let dual_ok = matches!(&self.duality, Ok(r) if r.passed());
        let mixed_ok = match &self.mixed {
            None => true,
            Some(Ok(o)) => o.mod_p_match && o.breaks_equal != Some(false),
            Some(Err(_)) => false,
        };
        dual_ok && mixed_ok
    }

    pub fn to_json(&self) -> Value {
        let err = |e: &Error| json!({"code": e.code(), "message": e.to_string()});
        let duality = match &self.duality {
            Ok(r) => r.to_json(),
            Err(e) => json!({"error": err(e)}),
        };
        let mixed = match &self.mixed {
            None => Value::Null,
            Some(Ok(o)) => o.to_json(),
            Some(Err(e)) => json!({"error": err(e)}),
        };
        json!({"name": self.name, "passed": self.passed(), "duality": duality, "mixed": mixed})
    }
}

pub fn verify_instance(inst: &Instance, opts: &SolveOptions) -> InstanceReport {
    let m = &inst.module;
    let duality = match &inst.dual {
        Some(d) => DualPair::with_dual(m, d, opts).and_then(|p| ramification::duality_report_for(&p)),
        None => ramification::duality_report(m, opts),
    };
    let mixed = (m.field().degree() == 1 && m.r() == 1)
        .then(|| mixed_outcome(m, inst.eisenstein.as_ref(), inst.n, opts));
    InstanceReport { name: inst.name.clone(), duality, mixed }
}

use kisinram::algebra::rational::q_to_json;
use kisinram::corpus::{self, Instance, InstanceReport};
use kisinram::kisin::{field_to_json, puiseux_to_json, series_to_json};
use kisinram::mixedchar::{self, MixedBreaks};
use kisinram::ramification::{self, DualPair};
use kisinram::solver::{self, SolveOptions};
use kisinram::algebra::Mat;
use kisinram::KisinModule;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::{read_input, Cli, Command, Failure};

fn mat_to_json(m: &Mat) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(series_to_json).collect())).collect())
}

fn input_name(cli: &Cli) -> Value {
    cli.global.input.as_ref().map_or(json!("-"), |p| json!(p.display().to_string()))
}

/// Apply the command-line overrides and split off the `E`/`N` keys.
fn parse_module(cli: &Cli, mut v: Value) -> Result<(KisinModule, Value), Failure> {
    let obj = v.as_object_mut().ok_or_else(|| Failure::schema("input must be a JSON object".into()))?;
    let mut extra = Map::new();
    if matches!(cli.command, Command::CompareMixed) {
        for k in ["E", "N"] {
            if let Some(x) = obj.remove(k) {
                extra.insert(k.into(), x);
            }
        }
    }
    if let Some(prec) = cli.global.prec {
        obj.insert("prec".into(), json!(prec));
    }
    if let Some(modulus) = &cli.global.modulus {
        obj.insert("m".into(), json!(modulus.len().saturating_sub(1)));
        obj.insert("modulus".into(), json!(modulus));
    }
    Ok((KisinModule::from_json(&v)?, Value::Object(extra)))
}

fn options(cli: &Cli) -> SolveOptions {
    SolveOptions { target_prec: None, denom_cap: cli.global.denom_cap }
}

fn module_config(cli: &Cli, m: &KisinModule, opts: &SolveOptions) -> Value {
    json!({
        "command": cli.command.name(),
        "input": input_name(cli),
        "field": field_to_json(m.field()),
        "prec": m.prec(),
        "denom_cap": opts.cap(m.p()),
        "target_prec": q_to_json(opts.target(m)),
    })
}

/// Run the parsed command; returns the document and the exit status.
pub fn run(cli: &Cli) -> Result<(Value, u8), Failure> {
    if let Command::VerifyMain { emit_corpus } = cli.command {
        return verify_main(cli, emit_corpus);
    }
    let (m, extra) = parse_module(cli, read_input(&cli.global)?)?;
    let opts = options(cli);
    let mut out = match &cli.command {
        Command::Snf { stride } => {
            let snf = m.snf(*stride)?;
            json!({"exps": snf.exps, "P": mat_to_json(&snf.p), "Q": mat_to_json(&snf.q), "stride": snf.stride})
        }
        Command::Eheight => json!({"height": m.e_height()?, "bound": m.er()}),
        Command::Dual => json!({"dual": m.dual()?.to_json()}),
        Command::Solve => {
            let sols = solver::solve_triangular(&m, &opts)?;
            let basis: Vec<Value> =
                sols.basis.iter().map(|b| Value::Array(b.iter().map(puiseux_to_json).collect())).collect();
            let prec = match sols.prec() {
                kisinram::algebra::Prec::Exact => json!("exact"),
                kisinram::algebra::Prec::Upto(n) => q_to_json(n),
            };
            json!({"field": field_to_json(sols.field()), "basis": basis, "prec": prec, "layer_order": sols.order})
        }
        Command::LowerBreaks => ramification::lower_breaks(&solver::solve_triangular(&m, &opts)?)?.to_json(),
        Command::UpperJumps => ramification::upper_filtration(&m, &opts)?.to_json(),
        Command::Pairing => {
            let pair = DualPair::new(&m, &opts)?;
            let gram = pair.gram()?;
            json!({"gram": gram.to_json(), "tbar": puiseux_to_json(&pair.tbar), "invertible": gram.is_invertible()?})
        }
        Command::DualityReport => {
            let r = ramification::duality_report(&m, &opts)?;
            let mut v = r.to_json();
            v["passed"] = json!(r.passed());
            v
        }
        Command::Basechange { factor } => json!({"module": m.base_change(*factor)?.to_json()}),
        Command::Breuil => mixedchar::breuil_data(&m, None)?.to_json(),
        Command::CompareMixed => compare_mixed(&m, &extra, &opts)?,
        Command::VerifyMain { .. } => unreachable!("handled above"),
    };
    out["effective_config"] = module_config(cli, &m, &opts);
    Ok((out, 0))
}

fn compare_mixed(m: &KisinModule, extra: &Value, opts: &SolveOptions) -> Result<Value, Failure> {
    let (eis, n) = corpus::parse_mixed_keys(m.p(), extra)?;
    let n = n.unwrap_or(2);
    let cmp = mixedchar::compare_mod_p(m, eis.as_ref(), n)?;
    let equal_char = ramification::lower_breaks(&solver::solve_triangular(m, opts)?)?;
    let mixed = mixedchar::mixed_lower_breaks(&cmp.presentation);
    let (breaks_equal, mixed_json) = match &mixed {
        MixedBreaks::Conclusive(b) => (Some(*b == equal_char), b.to_json()),
        MixedBreaks::Inconclusive(why) => (None, json!({"inconclusive": why})),
    };
    Ok(json!({
        "breuil": cmp.breuil.to_json(),
        "mixed_equations": cmp.presentation.to_json(),
        "mod_p": {"mixed": cmp.mixed, "equal_char": cmp.equal_char, "basis_change_ok": cmp.basis_change_ok},
        "mod_p_match": cmp.mod_p_match(),
        "mixed_breaks": mixed_json,
        "equal_char_breaks": equal_char.to_json(),
        "breaks_equal": corpus::breaks_value(breaks_equal),
        "N": n,
    }))
}

fn verify_main(cli: &Cli, emit_corpus: bool) -> Result<(Value, u8), Failure> {
    if emit_corpus {
        return Ok((corpus::corpus_to_json(&corpus::builtin()), 0));
    }
    let instances: Vec<Instance> = match &cli.global.input {
        Some(_) => corpus::parse_corpus(&read_input(&cli.global)?)?,
        None => corpus::builtin(),
    };
    if instances.is_empty() {
        return Err(Failure { exit: 1, code: "empty-corpus".into(), message: "the corpus has no instances".into(), context: json!({"input": input_name(cli)}) });
    }
    let opts = options(cli);
    let threads = cli.global.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::io(format!("cannot start worker threads: {e}"), Value::Null))?;
    let reports: Vec<InstanceReport> = pool.install(|| instances.par_iter().map(|i| corpus::verify_instance(i, &opts)).collect());
    let passed = reports.iter().filter(|r| r.passed()).count();
    let mixed: Vec<_> = reports.iter().filter_map(|r| r.mixed.as_ref()?.as_ref().ok()).collect();
    let conclusive = mixed.iter().filter(|o| o.breaks_equal.is_some()).count();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let summary = json!({
        "instances": reports.len(),
        "passed": passed,
        "failed": failed,
        "mixed_applicable": mixed.len(),
        "mixed_conclusive": conclusive,
    });
    let doc = json!({
        "summary": summary,
        "reports": reports.iter().map(InstanceReport::to_json).collect::<Vec<_>>(),
        "effective_config": {
            "command": "verify-main",
            "input": cli.global.input.as_ref().map_or(json!("shipped corpus"), |p| json!(p.display().to_string())),
            "denom_cap": cli.global.denom_cap.map_or(json!("default (p-1)p^4"), |c| json!(c)),
            "target_prec": "default er/(p-1) + e",
            "N": "per instance, default 2",
        },
    });
    let exit = if failed.is_empty() { 0 } else { 2 };
    Ok((doc, exit))
}

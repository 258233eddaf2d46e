//! Command-line front end for `kisinram`.
//!
//! Every command reads one JSON document (a module, or a corpus for
//! `verify-main`) and writes one JSON document. Exit status is 0 on
//! success, 1 for I/O or schema problems and 2 for inputs rejected on
//! mathematical grounds.

mod commands;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "kisinram", version, about = "Ramification of finite flat group schemes through Kisin modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Input JSON file; standard input when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Working `u`-adic precision, overriding the module's own.
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    /// Largest exponent denominator the solver may introduce.
    #[arg(long = "denom-cap", global = true)]
    pub denom_cap: Option<i64>,
    /// Field modulus override as comma-separated coefficients, constant term first.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub modulus: Option<Vec<i64>>,
    /// Compact single-line JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Worker threads for corpus runs.
    #[arg(long, global = true, env = "KISINRAM_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Smith normal form `P·A·Q = diag(u^{s_i})`.
    Snf {
        /// Work in `k[[u^stride]]`.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// E-height of the Frobenius matrix.
    Eheight,
    /// Dual module.
    Dual,
    /// Solve for the points over the perfect closure.
    Solve,
    /// Lower ramification breaks.
    LowerBreaks,
    /// Upper ramification jumps through the duality pairing.
    UpperJumps,
    /// Gram matrix of the pairing with the dual.
    Pairing,
    /// Named duality checks.
    DualityReport,
    /// Base change `u -> u^N`.
    Basechange {
        #[arg(long)]
        factor: usize,
    },
    /// Breuil adapted-basis data.
    Breuil,
    /// Mixed-characteristic equations compared with the module modulo `p`.
    CompareMixed,
    /// Run the full verification over a corpus (the shipped one by default).
    VerifyMain {
        /// Print the shipped corpus instead of verifying.
        #[arg(long)]
        emit_corpus: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Snf { .. } => "snf",
            Command::Eheight => "eheight",
            Command::Dual => "dual",
            Command::Solve => "solve",
            Command::LowerBreaks => "lower-breaks",
            Command::UpperJumps => "upper-jumps",
            Command::Pairing => "pairing",
            Command::DualityReport => "duality-report",
            Command::Basechange { .. } => "basechange",
            Command::Breuil => "breuil",
            Command::CompareMixed => "compare-mixed",
            Command::VerifyMain { .. } => "verify-main",
        }
    }
}

/// A failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub exit: u8,
    pub code: String,
    pub message: String,
    pub context: Value,
}

impl Failure {
    pub fn io(message: String, context: Value) -> Failure {
        Failure { exit: 1, code: "io".into(), message, context }
    }

    pub fn schema(message: String) -> Failure {
        Failure { exit: 1, code: "schema".into(), message, context: Value::Null }
    }

    fn to_json(&self) -> Value {
        json!({"code": self.code, "message": self.message, "context": self.context})
    }
}

impl From<kisinram::Error> for Failure {
    fn from(e: kisinram::Error) -> Failure {
        let exit = if e.is_mathematical() { 2 } else { 1 };
        Failure { exit, code: e.code().into(), message: e.to_string(), context: Value::Null }
    }
}

fn read_input(global: &Global) -> Result<Value, Failure> {
    let text = match &global.input {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display()), json!({"path": path})))?,
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::io(format!("cannot read standard input: {e}"), Value::Null))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::schema(format!("input is not valid JSON: {e}")))
}

fn render(v: &Value, pretty: bool) -> String {
    let mut s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) }.expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(global: &Global, text: &str) -> Result<(), Failure> {
    match &global.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()), json!({"path": path}))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(format!("cannot write standard output: {e}"), Value::Null)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::run(&cli).and_then(|(doc, exit)| {
        emit(&cli.global, &render(&doc, cli.global.pretty))?;
        Ok(exit)
    });
    match outcome {
        Ok(exit) => ExitCode::from(exit),
        Err(f) => {
            let text = render(&f.to_json(), cli.global.pretty);
            // fall back to stdout when the output file itself is the problem
            if emit(&cli.global, &text).is_err() {
                print!("{text}");
            }
            eprintln!("kisinram: {}: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}

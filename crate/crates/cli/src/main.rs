//! `leonard`: command-line front end for the exact parameter-array toolkit.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 when the input is malformed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use leonard::classify::classify;
use leonard::families::{generate, Family, FamilyError, FamilyParams};
use leonard::ortho::ortho_data;
use leonard::parray::{validate, Enumerator, ParameterArrayJson, DEFAULT_BUDGET};
use leonard::polys::corresponding_polys;
use leonard::recur::recurrence_coeffs;
use leonard::scoreboard::{scoreboard, CHECK_NAMES};
use leonard::splitmat::build;
use leonard::{Elem, Field, FieldSpec, ParameterArray};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "leonard", version, about = "Exact parameter arrays of Leonard systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check PA1-PA5 and report every violation.
    Validate { file: String },
    /// Build a family's parameter array from named parameters.
    Gen {
        family: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "rational")]
        field: String,
        /// name=value pairs: q, h, hstar, s, sstar, r, r1, r2, theta0, thetastar0
        #[arg(long, num_args = 1.., value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Run identity checks and print one line per check.
    Verify {
        file: String,
        /// Run the full scoreboard (the default when no --check is given).
        #[arg(long)]
        all: bool,
        /// Run only the named checks.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECK_NAMES))]
        check: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Find a family and parameters that regenerate the array.
    Classify { file: String },
    /// The evaluation table f_i(θ_j).
    PolyTable {
        file: String,
        /// Aligned text instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// The weights k_i, k*_i and ν.
    Weights { file: String },
    /// Recurrence coefficients a_i, b_i, c_i and their duals.
    Recurrence { file: String },
    /// The split-decomposition matrices and the transition matrix G.
    Matrices {
        file: String,
        /// Only these matrices (A, B, Astar, Bstar, T, Tstar, Tdown, D, Ddown, H, Hstar, Z, G).
        #[arg(long)]
        name: Vec<String>,
    },
    /// Every parameter array over a finite field, one JSON object per line.
    Enumerate {
        #[arg(long)]
        field: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// Print only the number of arrays.
        #[arg(long)]
        count: bool,
    },
}

/// Input that cannot be interpreted: bad JSON, unknown names, wrong lengths.
#[derive(Debug)]
struct Malformed(String);

impl fmt::Display for Malformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Malformed {}

fn malformed(e: impl fmt::Display) -> anyhow::Error {
    anyhow!(Malformed(e.to_string()))
}

fn read_input(path: &str) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| malformed(format!("{path}: {e}")))?;
    }
    Ok(s)
}

fn load_array(path: &str) -> Result<ParameterArray> {
    let text = read_input(path)?;
    let json: ParameterArrayJson = serde_json::from_str(&text).map_err(|e| malformed(format!("{path}: {e}")))?;
    ParameterArray::from_json(&json).map_err(|e| malformed(format!("{path}: {e}")))
}

fn parse_field(flag: &str) -> Result<Field> {
    let spec = FieldSpec::parse_flag(flag).map_err(malformed)?;
    Field::new(spec).map_err(malformed)
}

fn strings(xs: &[Elem]) -> Vec<String> {
    xs.iter().map(Elem::to_string).collect()
}

fn emit(line: impl fmt::Display) -> Result<()> {
    writeln!(io::stdout().lock(), "{line}")?;
    Ok(())
}

fn print_json(v: &Value) -> Result<()> {
    emit(serde_json::to_string_pretty(v)?)
}

fn gen(family: &str, d: usize, field: &str, params: &[String]) -> Result<bool> {
    let family: Family = family.parse().map_err(malformed)?;
    let field = parse_field(field)?;
    let mut named = BTreeMap::new();
    for kv in params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| malformed(format!("expected NAME=VALUE, got `{kv}`")))?;
        let x = field.parse(v).map_err(|e| malformed(format!("{k}: {e}")))?;
        named.insert(k.to_string(), x);
    }
    let fp = FamilyParams::from_named(family, d, &field, &named).map_err(malformed)?;
    match generate(&fp, &field) {
        Ok(p) => {
            print_json(&json!(p.to_json()))?;
            Ok(true)
        }
        Err(e @ (FamilyError::PreconditionViolated(_) | FamilyError::CharacteristicMismatch { .. })) => {
            eprintln!("{e}");
            Ok(false)
        }
        Err(e) => Err(malformed(e)),
    }
}

fn verify(file: &str, checks: &[String], as_json: bool) -> Result<bool> {
    let p = load_array(file)?;
    let board = scoreboard(&p);
    let lines: Vec<_> = board
        .lines
        .iter()
        .filter(|l| checks.is_empty() || checks.iter().any(|c| c == l.check))
        .collect();
    if as_json {
        print_json(&json!(lines))?;
    } else {
        for l in &lines {
            emit(l)?;
        }
    }
    Ok(!lines.iter().any(|l| l.failed()))
}

fn poly_table(file: &str, text: bool) -> Result<bool> {
    let p = load_array(file)?;
    let t = corresponding_polys(&p).context("polynomials undefined")?;
    let rows: Vec<Vec<String>> = t
        .f
        .iter()
        .map(|f| p.theta().iter().map(|x| f.eval(x).to_string()).collect())
        .collect();
    if text {
        let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            emit(cells.join("  "))?;
        }
    } else {
        let polys: Vec<String> = t.f.iter().map(ToString::to_string).collect();
        print_json(&json!({ "polynomials": polys, "rows": rows }))?;
    }
    Ok(true)
}

fn enumerate(field: &str, d: usize, budget: u128, count: bool) -> Result<bool> {
    let field = parse_field(field)?;
    let e = Enumerator::new(&field, d).map_err(malformed)?.with_budget(budget);
    if count {
        emit(e.collect().map_err(malformed)?.len())?;
        return Ok(true);
    }
    for p in e.iter().map_err(malformed)? {
        emit(serde_json::to_string(&p.to_json())?)?;
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { file } => {
            let p = load_array(&file)?;
            let r = validate(&p);
            print_json(&json!({ "ok": r.ok(), "violations": r.violations }))?;
            Ok(r.ok())
        }
        Command::Gen { family, d, field, param } => gen(&family, d, &field, &param),
        Command::Verify { file, all, check, json } => {
            if all && !check.is_empty() {
                bail!(Malformed("--all and --check are exclusive".into()));
            }
            verify(&file, &check, json)
        }
        Command::Classify { file } => {
            let p = load_array(&file)?;
            match classify(&p) {
                Ok(w) => {
                    print_json(&json!(w.to_json()))?;
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(false)
                }
            }
        }
        Command::PolyTable { file, text } => poly_table(&file, text),
        Command::Weights { file } => {
            let p = load_array(&file)?;
            let o = ortho_data(&p).context("weights undefined")?;
            print_json(&json!({ "k": strings(&o.k), "kstar": strings(&o.kstar), "nu": o.nu.to_string() }))?;
            Ok(true)
        }
        Command::Recurrence { file } => {
            let p = load_array(&file)?;
            let r = recurrence_coeffs(&p).context("recurrence coefficients undefined")?;
            let v: Value = json!({
                "a": strings(&r.a), "b": strings(&r.b), "c": strings(&r.c),
                "astar": strings(&r.astar), "bstar": strings(&r.bstar), "cstar": strings(&r.cstar),
            });
            print_json(&v)?;
            Ok(true)
        }
        Command::Matrices { file, name } => {
            let p = load_array(&file)?;
            let m = build(&p).context("matrices undefined")?;
            let all = m.named();
            for n in &name {
                if !all.iter().any(|(k, _)| k == n) {
                    bail!(Malformed(format!("unknown matrix `{n}`")));
                }
            }
            let out: BTreeMap<&str, _> = all
                .into_iter()
                .filter(|(k, _)| name.is_empty() || name.iter().any(|n| n == k))
                .map(|(k, v)| (k, v.to_json()))
                .collect();
            print_json(&json!(out))?;
            Ok(true)
        }
        Command::Enumerate { field, d, budget, count } => enumerate(&field, d, budget, count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // a closed pipe downstream (`| head`) is not an error
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Malformed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

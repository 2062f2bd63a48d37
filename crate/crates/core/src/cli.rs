//! Command-line driver. Reports go to standard output as JSON lines, a
//! summary goes to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::catalog::{ingest, resolve_entry, write_dir, builtin_catalog, CatalogEntry};
use crate::error::{Error, Result};
use crate::irred::experiments::{parse_checks, Check, Checker, Limits};
use crate::irred::{Engine, Lift};
use crate::report::{exit_code, timed, Record, Status};

#[derive(Parser, Debug)]
#[command(name = "algrep", version, about = "Representations of finite algebra groups 1+A")]
struct Cli {
    /// Report runtime_ms as 0, for byte-identical output.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Marks every record of the named check as failed.
    #[arg(long, global = true, hide = true)]
    inject_failure: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct LimitArgs {
    /// Largest group order that is enumerated.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    max_order: u64,
    /// Largest group order whose irreducibles are computed.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    max_irrep_order: u64,
    /// Largest extended group whose full character table is enumerated.
    #[arg(long, global = true, default_value_t = 1 << 14)]
    max_table_order: u64,
    /// Largest |G'|²·|k'| for the commutator balance check.
    #[arg(long, global = true, default_value_t = 1 << 25)]
    max_balance_work: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate a catalog entry (file path or builtin name).
    Validate { entry: String },
    /// Enumerate irreducible characters.
    Irreps {
        entry: String,
        /// Include full character tables.
        #[arg(long)]
        characters: bool,
    },
    /// The norm map N: (1+A')^ab → (1+A)^ab.
    Norm {
        entry: String,
        #[arg(long)]
        ext: u32,
        /// Print the full table as pairs of exponent tuples.
        #[arg(long)]
        tabulate: bool,
    },
    /// Base change of every irreducible.
    BaseChange {
        entry: String,
        #[arg(long)]
        ext: u32,
    },
    /// Run property checks.
    Verify {
        entry: String,
        /// Extension degree, or a tower N,N2 of absolute degrees.
        #[arg(long, value_delimiter = ',', required = true)]
        ext: Vec<u32>,
        /// Comma list of checks (default: all).
        #[arg(long)]
        checks: Option<String>,
    },
    /// Compare |(1+U)^ab| with |((1+U')^ab)^Gal| over a catalog.
    SearchSurjectivity {
        #[arg(long, default_value = "builtin")]
        catalog: String,
        #[arg(long, default_value_t = 2)]
        max_ext: u32,
        /// Also test surjectivity on irreducibles where sizes allow.
        #[arg(long)]
        full: bool,
    },
    /// Write the builtin catalog as entry files.
    Catalog {
        #[arg(long)]
        out: PathBuf,
    },
}

fn limits(a: &LimitArgs) -> Limits {
    Limits {
        max_order: a.max_order,
        max_irrep_order: a.max_irrep_order,
        max_table_order: a.max_table_order,
        max_balance_work: a.max_balance_work,
    }
}

fn checker(e: &CatalogEntry, exts: Vec<u32>, l: Limits) -> Result<Checker> {
    Ok(Checker::new(&e.name, e.group()?, exts, l))
}

fn validate(e: &CatalogEntry) -> Vec<Record> {
    let a = &e.algebra;
    let order = (a.field().size() as u128).pow(a.dim() as u32);
    vec![Record::new("validate", &e.name, json!({})).pass(Some(json!({
        "dim": a.dim(),
        "nclass": a.nclass(),
        "order": order.to_string(),
        "commutative": a.is_commutative(),
        "defined_over": a.defined_over(),
        "tags": e.tags,
    })))]
}

fn irreps(e: &CatalogEntry, l: Limits, characters: bool) -> Result<Vec<Record>> {
    let base = Record::new("irreps", &e.name, json!({}));
    let a = &e.algebra;
    let order = (a.field().size() as u128).pow(a.dim() as u32);
    if order > l.max_irrep_order as u128 {
        return Ok(vec![base.skipped("size", json!({"order": order.to_string(), "bound": l.max_irrep_order}))]);
    }
    let g = e.group()?;
    let engine = Engine::new();
    let irr = match engine.irreps(&g) {
        Ok(i) => i,
        Err(err) => return Ok(vec![base.error(&err)]),
    };
    Ok(irr
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut w = x.to_json();
            if !characters {
                w.as_object_mut().unwrap().remove("character");
            }
            Record::new("irrep", &e.name, json!({"index": i})).pass(Some(w))
        })
        .collect())
}

fn norm(e: &CatalogEntry, n: u32, tabulate: bool, l: Limits) -> Result<Vec<Record>> {
    let c = checker(e, vec![n], l)?;
    let base = Record::new("norm", &e.name, json!({"ext": n}));
    if c.ext_order(n) > l.max_order as u128 {
        return Ok(vec![base.skipped("size", json!({"order": c.ext_order(n).to_string()}))]);
    }
    Ok(vec![timed(base, |r| {
        let t = c.norm_table(n)?;
        let mut w = json!({
            "src_size": t.src.size(),
            "dst_size": t.dst.size(),
            "image_size": t.image_size(),
        });
        if tabulate {
            w["table"] = json!(t.pairs());
        }
        Ok(r.outcome(t.is_surjective(), w))
    })])
}

fn base_change(e: &CatalogEntry, n: u32, l: Limits) -> Result<Vec<Record>> {
    let c = checker(e, vec![n], l)?;
    if c.ext_order(n) > l.max_irrep_order as u128 {
        let r = Record::new("base-change", &e.name, json!({"ext": n}));
        return Ok(vec![r.skipped("size", json!({"order": c.ext_order(n).to_string()}))]);
    }
    let irr = match c.irreps() {
        Ok(i) => i,
        Err(err) => return Ok(vec![Record::new("base-change", &e.name, json!({"ext": n})).error(&err)]),
    };
    let lift: Arc<Lift> = c.lift(n)?;
    Ok(irr
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let r = Record::new("base-change", &e.name, json!({"ext": n, "index": i}));
            timed(r, |r| {
                let y = c.engine().base_change(&lift, x)?;
                Ok(r.pass(Some(json!({
                    "degree": x.degree(), "fdim": x.fdim, "sh": x.sh,
                    "image": {"degree": y.degree(), "fdim": y.fdim, "sh": y.sh},
                }))))
            })
        })
        .collect())
}

fn search(catalog: &str, max_ext: u32, full: bool, l: Limits) -> Result<Vec<Record>> {
    if max_ext < 2 {
        return Err(Error::BadParameter("--max-ext must be at least 2".into()));
    }
    let entries = ingest(catalog)?;
    let mut checks = vec![Check::Orders];
    if full {
        checks.extend([Check::Surjectivity, Check::Conditional]);
    }
    let per_entry: Vec<Vec<Record>> = entries
        .par_iter()
        .map(|e| match checker(e, (2..=max_ext).collect(), l) {
            Ok(c) => c.run(&checks),
            Err(err) => vec![Record::new("orders", &e.name, json!({})).error(&err)],
        })
        .collect();
    Ok(per_entry.into_iter().flatten().collect())
}

fn dispatch(cli: &Cli) -> Result<Vec<Record>> {
    let l = limits(&cli.limits);
    match &cli.command {
        Command::Validate { entry } => Ok(validate(&resolve_entry(entry)?)),
        Command::Irreps { entry, characters } => irreps(&resolve_entry(entry)?, l, *characters),
        Command::Norm { entry, ext, tabulate } => norm(&resolve_entry(entry)?, *ext, *tabulate, l),
        Command::BaseChange { entry, ext } => base_change(&resolve_entry(entry)?, *ext, l),
        Command::Verify { entry, ext, checks } => {
            let checks = match checks {
                Some(s) => parse_checks(s)?,
                None => Check::ALL.to_vec(),
            };
            if ext.contains(&0) {
                return Err(Error::BadParameter("extension degrees must be positive".into()));
            }
            Ok(checker(&resolve_entry(entry)?, ext.clone(), l)?.run(&checks))
        }
        Command::SearchSurjectivity { catalog, max_ext, full } => search(catalog, *max_ext, *full, l),
        Command::Catalog { out } => {
            let entries = builtin_catalog()?;
            write_dir(out, &entries)?;
            Ok(entries
                .iter()
                .map(|e| Record::new("catalog", &e.name, json!({"path": out.join(format!("{}.json", e.name))})).pass(None))
                .collect())
        }
    }
}

/// Runs the command line; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let mut records = match pool.install(|| dispatch(&cli)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    if let Some(name) = &cli.inject_failure {
        for r in records.iter_mut().filter(|r| &r.check == name) {
            r.status = Status::Violation;
            r.witness = Some(json!({"injected": true}));
        }
    }
    for r in &records {
        let line: Value = r.to_json(!cli.no_timing);
        if writeln!(out, "{line}").is_err() {
            return 1;
        }
    }
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        err,
        "{} records: {} passed, {} skipped, {} violations, {} internal failures",
        records.len(),
        count(Status::Pass),
        count(Status::Skipped),
        count(Status::Violation),
        count(Status::Internal),
    );
    for r in records.iter().filter(|r| !r.passed()) {
        let _ = writeln!(err, "FAILED {} on {}: {}", r.check, r.algebra, r.to_json(false)["witness"]);
    }
    exit_code(&records)
}

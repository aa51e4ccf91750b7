//! `advbound` command-line front end.
//!
//! Every subcommand prints one JSON [`Report`] on stdout and a short human
//! summary on stderr. Exit codes: 0 success, 1 failed verification, 2 usage or
//! input error.

mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use report::{InputDigest, Report, SCHEMA};

use crate::adversary::{adv_value, mm_value, validate, CostVector};
use crate::boolfn::{
    compose_functions, formula_to_function, iterate_function, make_family_named, parse_formula, BooleanFunction,
    CompositionSpec, FormulaAst, DEFAULT_MAX_ARITY,
};
use crate::error::{Error, Result};
use crate::io::{read_json, write_json, AdversaryJson, CertificateJson, MatrixJson, TruthTable, WitnessJson};
use crate::solver::{
    certify, gadget_cost_adv, readonce_bound, readonce_certificate, verify_composition, verify_iteration, Gate,
    SolverOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "advbound", version, about = "Cost-weighted spectral adversary bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the truth table of a function.
    Parse {
        #[command(flatten)]
        source: Source,
    },
    /// Bracket ADV_α(f) with a lower and an upper certificate.
    Bound {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        alpha: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write the certificate bundle to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form AND/OR gadget with input costs β.
    Gadget {
        #[arg(long)]
        gate: String,
        #[arg(long)]
        beta: String,
    },
    /// Read-once formula bound.
    Readonce {
        formula: Option<String>,
        #[arg(long = "formula")]
        formula_flag: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Build and evaluate the explicit matrix and distributions.
        #[arg(long)]
        explicit: bool,
    },
    /// Truth table of f∘(g_1,…,g_k); functions as NAME:N or @table.json.
    Compose {
        #[arg(long)]
        outer: String,
        #[arg(long, num_args = 1.., required = true)]
        inner: Vec<String>,
    },
    /// Check ADV_α(f∘g) against ADV_β(f) with β_i = ADV(g_i).
    VerifyComposition {
        #[arg(long)]
        outer: String,
        #[arg(long, num_args = 1.., required = true)]
        inner: Vec<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Check ADV(f^d) against ADV(f)^d.
    VerifyIteration {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Validate an adversary matrix file and evaluate it.
    CheckGamma {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        alpha: Option<String>,
    },
}

#[derive(Args, Debug, Default)]
struct Source {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    formula: Option<String>,
    /// JSON truth-table file.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolverFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl SolverFlags {
    fn options(&self) -> Result<SolverOptions> {
        let d = SolverOptions::default();
        let o = SolverOptions {
            seed: self.seed,
            restarts: self.restarts.unwrap_or(d.restarts),
            target_gap: self.gap.unwrap_or(d.target_gap),
            jobs: self.jobs.unwrap_or(d.jobs),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            ..d
        };
        o.validate()?;
        Ok(o)
    }
}

enum Failure {
    Usage(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

struct Outcome {
    ok: bool,
    seed: Option<u64>,
    results: Value,
    summary: String,
}

struct Ctx {
    digest: InputDigest,
}

impl Ctx {
    fn read_file(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.digest.add(&bytes);
        Ok(())
    }

    fn table(&mut self, path: &Path) -> Result<BooleanFunction> {
        self.read_file(path)?;
        read_json::<TruthTable>(path)?.to_function()
    }
}

/// Resolves exactly one of `--family/--n`, `--formula` and `--table`.
fn load_function(source: &Source, ctx: &mut Ctx) -> std::result::Result<BooleanFunction, Failure> {
    let given: Vec<&str> = [
        ("--family", source.family.is_some()),
        ("--formula", source.formula.is_some()),
        ("--table", source.table.is_some()),
    ]
    .iter()
    .filter(|(_, on)| *on)
    .map(|(name, _)| *name)
    .collect();
    match given.as_slice() {
        [] => Err(Failure::Usage("one of --family, --formula or --table is required".into())),
        [_] => {
            if let Some(name) = &source.family {
                let n = source
                    .n
                    .ok_or_else(|| Failure::Usage("--family needs --n".into()))?;
                Ok(make_family_named(name, n)?)
            } else if let Some(text) = &source.formula {
                let ast = parse_formula(text)?;
                Ok(formula_to_function(&ast, source.n.unwrap_or(ast.max_var()))?)
            } else {
                if source.n.is_some() {
                    return Err(Failure::Usage("--n conflicts with --table".into()));
                }
                Ok(ctx.table(source.table.as_deref().expect("checked"))?)
            }
        }
        many => Err(Failure::Usage(format!("conflicting function sources: {}", many.join(" and ")))),
    }
}

/// `NAME:N` or `@path`.
fn function_spec(spec: &str, ctx: &mut Ctx) -> std::result::Result<BooleanFunction, Failure> {
    if let Some(path) = spec.strip_prefix('@') {
        return Ok(ctx.table(Path::new(path))?);
    }
    let (name, n) = spec
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("function spec {spec:?} is not NAME:N or @FILE")))?;
    let n = n
        .parse()
        .map_err(|_| Failure::Usage(format!("function spec {spec:?}: arity {n:?} is not an integer")))?;
    Ok(make_family_named(name, n)?)
}

fn parse_reals(flag: &str, text: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{flag}: {t:?} is not a number")))
        })
        .collect()
}

fn costs(text: Option<&str>, n: usize) -> std::result::Result<CostVector, Failure> {
    match text {
        None => Ok(CostVector::ones(n)),
        Some(t) => {
            let v = parse_reals("--alpha", t)?;
            if v.len() != n {
                return Err(Failure::Usage(format!("--alpha has {} entries, expected {n}", v.len())));
            }
            Ok(CostVector::new(v)?)
        }
    }
}

fn composition(outer: &str, inner: &[String], ctx: &mut Ctx) -> std::result::Result<CompositionSpec, Failure> {
    let f = function_spec(outer, ctx)?;
    let gs = inner
        .iter()
        .map(|s| function_spec(s, ctx))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(CompositionSpec::new(f, gs)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn execute(command: &Command, ctx: &mut Ctx) -> std::result::Result<Outcome, Failure> {
    match command {
        Command::Parse { source } => {
            let f = load_function(source, ctx)?;
            let mut results = json!({
                "arity": f.arity(),
                "domain_size": f.len(),
                "total": f.is_total(),
                "constant": f.is_constant(),
                "function": TruthTable::from_function(&f),
            });
            if let Some(text) = &source.formula {
                let ast = parse_formula(text)?;
                results["formula"] = json!(ast.root.to_string());
                results["read_once"] = json!(ast.read_once);
            }
            Ok(Outcome {
                ok: true,
                seed: None,
                summary: format!("arity {}, {} inputs", f.arity(), f.len()),
                results,
            })
        }
        Command::Bound {
            source,
            alpha,
            solver,
            out,
        } => {
            let f = load_function(source, ctx)?;
            let alpha = costs(alpha.as_deref(), f.arity())?;
            let opts = solver.options()?;
            let cert = certify(&f, &alpha, &opts)?;
            let bundle = CertificateJson::from_certificate(&cert);
            if let Some(path) = out {
                write_json(path, &bundle)?;
            }
            Ok(Outcome {
                ok: true,
                seed: Some(opts.seed),
                summary: format!(
                    "ADV in [{:.12}, {:.12}], gap {:.3e}{}",
                    cert.lower_value,
                    cert.upper_value,
                    cert.gap,
                    if cert.tight { "" } else { " (above target)" }
                ),
                results: json!({
                    "bracket": to_value(&cert.bracket()),
                    "tight": cert.tight,
                    "certificate": to_value(&bundle),
                }),
            })
        }
        Command::Gadget { gate, beta } => {
            let gate: Gate = gate.parse().map_err(|_| Failure::Usage(format!("--gate: {gate:?} is not and/or")))?;
            let beta = parse_reals("--beta", beta)?;
            let [b1, b2] = beta[..] else {
                return Err(Failure::Usage(format!("--beta needs 2 entries, got {}", beta.len())));
            };
            let g = gadget_cost_adv(gate, (b1, b2))?;
            let costs = CostVector::new(vec![b1, b2])?;
            let masks = g.gamma.mask_norms()?;
            Ok(Outcome {
                ok: true,
                seed: None,
                summary: format!("{gate} gadget value {}", g.value),
                results: json!({
                    "gate": gate,
                    "beta": [b1, b2],
                    "value": g.value,
                    "matrix": MatrixJson::from_matrix(g.gamma.matrix()),
                    "norm": masks.norm,
                    "masked_norms": masks.masked,
                    "adv_value": adv_value(&g.gamma, &costs)?,
                    "mm_value": mm_value(&g.witness, &costs)?,
                    "witness": WitnessJson::from_witness(&g.witness),
                }),
            })
        }
        Command::Readonce {
            formula,
            formula_flag,
            alpha,
            explicit,
        } => {
            let text = match (formula, formula_flag) {
                (Some(t), None) | (None, Some(t)) => t,
                (None, None) => return Err(Failure::Usage("a formula is required".into())),
                (Some(_), Some(_)) => {
                    return Err(Failure::Usage("conflicting function sources: positional formula and --formula".into()))
                }
            };
            let ast: FormulaAst = parse_formula(text)?;
            let alpha = costs(alpha.as_deref(), ast.max_var())?;
            let bound = readonce_bound(&ast, &alpha)?;
            let mut results = json!({
                "formula": ast.root.to_string(),
                "alpha": alpha,
                "value": bound.value,
                "trace": bound.trace,
            });
            if *explicit {
                let cert = readonce_certificate(&ast, &alpha)?;
                results["explicit"] = json!({
                    "adv_value": adv_value(&cert.gamma, &alpha)?,
                    "mm_value": mm_value(&cert.witness, &alpha)?,
                    "gamma": AdversaryJson::from_adversary(&cert.gamma),
                    "witness": WitnessJson::from_witness(&cert.witness),
                });
            }
            Ok(Outcome {
                ok: true,
                seed: None,
                summary: format!("read-once bound {}", bound.value),
                results,
            })
        }
        Command::Compose { outer, inner } => {
            let spec = composition(outer, inner, ctx)?;
            let h = compose_functions(&spec)?;
            Ok(Outcome {
                ok: true,
                seed: None,
                summary: format!("composed arity {}, {} inputs", h.arity(), h.len()),
                results: json!({
                    "arity": h.arity(),
                    "domain_size": h.len(),
                    "offsets": spec.offsets(),
                    "function": TruthTable::from_function(&h),
                }),
            })
        }
        Command::VerifyComposition {
            outer,
            inner,
            alpha,
            solver,
        } => {
            let spec = composition(outer, inner, ctx)?;
            let alpha = costs(alpha.as_deref(), spec.total_arity())?;
            let opts = solver.options()?;
            let r = verify_composition(&spec, &alpha, &opts)?;
            Ok(Outcome {
                ok: r.pass,
                seed: Some(opts.seed),
                summary: format!(
                    "composed {:.9} vs outer {:.9} (tolerance {:.3e}): {}",
                    r.lhs.midpoint,
                    r.rhs.midpoint,
                    r.tolerance,
                    if r.pass { "pass" } else { "FAIL" }
                ),
                results: to_value(&r),
            })
        }
        Command::VerifyIteration { source, depth, solver } => {
            let f = load_function(source, ctx)?;
            // fail on size before spending time on optimisation
            iterate_function(&f, *depth, DEFAULT_MAX_ARITY)?;
            let opts = solver.options()?;
            let r = verify_iteration(&f, *depth, &opts)?;
            Ok(Outcome {
                ok: r.pass,
                seed: Some(opts.seed),
                summary: format!(
                    "ADV(f^{}) in [{:.9}, {:.9}], expected {:.9}: {}",
                    r.depth,
                    r.iterate.lower,
                    r.iterate.upper,
                    r.expected,
                    if r.pass { "pass" } else { "FAIL" }
                ),
                results: to_value(&r),
            })
        }
        Command::CheckGamma { gamma, alpha } => {
            ctx.read_file(gamma)?;
            let gamma = read_json::<AdversaryJson>(gamma)?.to_adversary()?;
            let alpha = costs(alpha.as_deref(), gamma.function().arity())?;
            let report = validate(&gamma);
            let ok = report.is_valid();
            let masks = gamma.mask_norms()?;
            let value = if ok { Some(adv_value(&gamma, &alpha)?) } else { None };
            Ok(Outcome {
                ok,
                seed: None,
                summary: match value {
                    Some(v) => format!("valid, value {v}"),
                    None => format!("invalid: {} violation(s)", report.violations.len()),
                },
                results: json!({
                    "validation": report,
                    "norm": masks.norm,
                    "masked_norms": masks.masked,
                    "value": value,
                }),
            })
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Bound { .. } => "bound",
        Command::Gadget { .. } => "gadget",
        Command::Readonce { .. } => "readonce",
        Command::Compose { .. } => "compose",
        Command::VerifyComposition { .. } => "verify-composition",
        Command::VerifyIteration { .. } => "verify-iteration",
        Command::CheckGamma { .. } => "check-gamma",
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run(argv: &[String]) -> i32 {
    let (code, report) = run_report(argv);
    if let Some(report) = report {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    code
}

/// Like [`run`] but hands the report back instead of printing it. Usage
/// errors caught by the argument parser produce no report.
pub fn run_report(argv: &[String]) -> (i32, Option<Report>) {
    let started = Instant::now();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return (code, None);
        }
    };
    let args = argv.get(1..).unwrap_or_default().to_vec();
    let mut ctx = Ctx {
        digest: InputDigest::new(&args),
    };
    let name = command_name(&cli.command);
    let (code, ok, seed, results) = match execute(&cli.command, &mut ctx) {
        Ok(out) => {
            eprintln!("{name}: {}", out.summary);
            let code = if out.ok { EXIT_OK } else { EXIT_FAILED };
            (code, out.ok, out.seed, out.results)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{name}: usage error: {msg}");
            (EXIT_USAGE, false, None, json!({ "error": msg, "kind": "usage" }))
        }
        Err(Failure::Input(e)) => {
            eprintln!("{name}: error: {e}");
            (EXIT_USAGE, false, None, json!({ "error": e.to_string(), "kind": "input" }))
        }
    };
    let report = Report {
        schema: SCHEMA.to_string(),
        command: name.to_string(),
        argv: args,
        inputs_digest: ctx.digest.hex(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        ok,
        results,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    (code, Some(report))
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 axiom failure,
//! 4 undefined bracket, 5 synthesis or verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dga::{
    build_test_dga_c, check_dga_axioms, format_element, parse_input, required_precision_for_c, serialize_dga,
    DegreeWindow, DgaError, DgaPresentation, Element,
};
use crate::homology::{compare_homology, FactorOrder, expected_homology_of_c, homology_group, HomologyClass, HomologyTable};
use crate::massey::{
    bracket_in_c, massey_of_cycles, max_index_for_window, p_unit, subgroup_log_size, verify_massey_relations_c,
    MasseyError, MasseyResult,
};
use crate::padic::{is_prime, Ring};
use crate::rigidity::{normalize_degree_zero, perturb_dga, synthesize_qiso, StepRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_AXIOM: i32 = 3;
pub const EXIT_UNDEFINED: i32 = 4;
pub const EXIT_FAILURE: i32 = 5;

pub const BUILTIN_C: &str = "builtin:C";

#[derive(Debug, Parser)]
#[command(name = "rigid-dga", version, about = "Homology, Massey products and rigidity for dgas over Z/p^N")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 3)]
    pub prime: u64,
    #[arg(long, default_value_t = 4)]
    pub precision: u32,
    /// Degree window as min:max.
    #[arg(long, default_value = "-40:40", allow_hyphen_values = true)]
    pub window: String,
    /// Write the report (or the dga, for perturb) here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the axioms, the homology table and the bracket relations of the test dga.
    VerifyPaper {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_index: Option<i64>,
    },
    /// Print the homology of a presentation in every inner degree.
    Homology {
        #[command(flatten)]
        common: Common,
        /// A TOML file, or builtin:C.
        #[arg(long, default_value = BUILTIN_C)]
        input: String,
    },
    /// Compute <gamma_i, p, gamma_j>.
    Massey {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = BUILTIN_C)]
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        i: i64,
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
    },
    /// Build and certify a quasi-isomorphism from the test dga to the input.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = BUILTIN_C)]
        input: String,
        /// Cell budget for the degree-0 normalization.
        #[arg(long, default_value_t = 400)]
        budget: usize,
    },
    /// Write a seeded disguised presentation of the test dga.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random moves.
        #[arg(long, default_value_t = 10)]
        budget: usize,
    },
}

/// What a command produced: the report body, a diagnostic, and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { code: EXIT_OK, report, message: None }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Outcome { code, report: String::new(), message: Some(message.into()) }
    }

    fn with_code(report: String, ok: bool, code: i32, message: &str) -> Self {
        if ok {
            Outcome::ok(report)
        } else {
            Outcome { code, report, message: Some(message.to_string()) }
        }
    }
}

type Step<T> = Result<T, Outcome>;

fn json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_window(s: &str) -> Result<DegreeWindow, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("window must be min:max, got {s:?}"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("window minimum {lo:?} is not an integer"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("window maximum {hi:?} is not an integer"))?;
    DegreeWindow::new(lo, hi).map_err(|e| e.to_string())
}

/// Ring and window for the test dga, enforcing the precision rule.
fn config(c: &Common) -> Step<(Ring, DegreeWindow)> {
    if !is_prime(c.prime) || c.prime == 2 {
        return Err(Outcome::fail(EXIT_CONFIG, "prime must be an odd prime"));
    }
    let window = parse_window(&c.window).map_err(|e| Outcome::fail(EXIT_CONFIG, e))?;
    let required = required_precision_for_c(c.prime, window);
    if c.precision < required {
        return Err(Outcome::fail(EXIT_CONFIG, format!("precision must be ≥ {required} for this window")));
    }
    let ring = Ring::new(c.prime, c.precision).map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
    Ok((ring, window))
}

fn dga_failure(e: DgaError) -> Outcome {
    let code = match e {
        DgaError::Axioms(_) | DgaError::DSquared(_) => EXIT_AXIOM,
        _ => EXIT_CONFIG,
    };
    Outcome::fail(code, e.to_string())
}

/// The builtin test dga (flags apply) or a file (its header applies).
fn load(input: &str, c: &Common) -> Step<(DgaPresentation, bool)> {
    if input == BUILTIN_C {
        let (ring, window) = config(c)?;
        let dga = build_test_dga_c(ring, window).map_err(dga_failure)?;
        return Ok((dga, true));
    }
    let text = fs::read_to_string(input).map_err(|e| Outcome::fail(EXIT_CONFIG, format!("cannot read {input}: {e}")))?;
    Ok((parse_input(&text).map_err(dga_failure)?, false))
}

#[derive(Serialize)]
struct VerifyMachine {
    passed: bool,
    axioms: String,
    homology: crate::homology::TableReport,
    massey: crate::massey::RelationReport,
}

fn cmd_verify_paper(c: &Common, max_index: Option<i64>) -> Step<Outcome> {
    let (ring, window) = config(c)?;
    let dga = build_test_dga_c(ring, window).map_err(dga_failure)?;
    let axioms = check_dga_axioms(&dga);
    let homology = compare_homology(&dga, |n| expected_homology_of_c(ring.prime(), n));
    let m = max_index.unwrap_or_else(|| max_index_for_window(ring.prime(), window));
    let massey = verify_massey_relations_c(ring.prime(), ring.precision(), window, m)
        .map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
    let passed = axioms.is_empty() && homology.all_ok() && massey.all_ok();
    let report = if c.machine {
        json(&VerifyMachine { passed, axioms: axioms.summary(&dga), homology, massey })
    } else {
        let status = |ok: bool| if ok { "PASS" } else { "FAIL" };
        format!(
            "test dga over Z/{}^{} on {window}\n\naxioms: {} ({})\n\nhomology: {}\n{homology}\nbrackets <gamma_i, p, gamma_j>, |i|, |j| <= {m}: {}\n{massey}\nRESULT: {}\n",
            ring.prime(),
            ring.precision(),
            status(axioms.is_empty()),
            axioms.summary(&dga),
            status(homology.all_ok()),
            status(massey.all_ok()),
            status(passed),
        )
    };
    let code = if axioms.is_empty() { EXIT_FAILURE } else { EXIT_AXIOM };
    Ok(Outcome::with_code(report, passed, code, "verification failed"))
}

#[derive(Serialize)]
struct HomologyRow {
    degree: i64,
    group: String,
    representatives: Vec<String>,
    expected: Option<String>,
    ok: bool,
}

fn cmd_homology(c: &Common, input: &str) -> Step<Outcome> {
    let (dga, builtin) = load(input, c)?;
    let p = dga.ring().prime();
    let mut rows = Vec::new();
    for n in dga.window().inner_degrees() {
        let (group, representatives, computed) = match homology_group(&dga, n) {
            Ok(g) => {
                let reps = g.factors().iter().map(|f| format_element(&dga, &f.representative)).collect();
                (g.describe(), reps, Some(g.orders()))
            }
            Err(e) => (format!("error: {e}"), Vec::new(), None),
        };
        let expected = builtin.then(|| expected_homology_of_c(p, n));
        let ok = computed.is_some() && expected.as_ref().map_or(true, |e| Some(e) == computed.as_ref());
        rows.push(HomologyRow {
            degree: n,
            group,
            representatives,
            expected: expected.map(|e| crate::homology::describe_orders(p, &e)),
            ok,
        });
    }
    let passed = rows.iter().all(|r| r.ok);
    let report = if c.machine {
        json(&rows)
    } else {
        let wg = rows.iter().map(|r| r.group.len()).max().unwrap_or(0).max(5);
        let mut out = format!("homology over Z/{}^{} on {}\n", p, dga.ring().precision(), dga.window());
        if builtin {
            out.push_str(&format!("{:>5} | {:<wg$} | {:<wg$} | status | generators\n", "deg", "H_n", "expected"));
        } else {
            out.push_str(&format!("{:>5} | {:<wg$} | generators\n", "deg", "H_n"));
        }
        for r in &rows {
            let gens = r.representatives.join(", ");
            match &r.expected {
                Some(e) => {
                    let status = if r.ok { "OK" } else { "FAIL" };
                    out.push_str(&format!("{:>5} | {:<wg$} | {:<wg$} | {status:<6} | {gens}\n", r.degree, r.group, e));
                }
                None => out.push_str(&format!("{:>5} | {:<wg$} | {gens}\n", r.degree, r.group)),
            }
        }
        out
    };
    Ok(Outcome::with_code(report, passed, EXIT_FAILURE, "homology table has failures"))
}

#[derive(Serialize)]
struct MasseyMachine {
    i: i64,
    j: i64,
    degree: i64,
    representative: String,
    coordinates: Vec<i64>,
    named: Option<String>,
    indeterminacy_order: u64,
    indeterminacy_generators: Vec<String>,
    witnesses: (String, String),
    expected: Option<String>,
    ok: Option<bool>,
}

fn massey_failure(e: MasseyError) -> Outcome {
    match e {
        MasseyError::Undefined { .. } => Outcome::fail(EXIT_UNDEFINED, e.to_string()),
        MasseyError::Window { .. } | MasseyError::ZeroIndexSum => Outcome::fail(EXIT_CONFIG, e.to_string()),
        _ => Outcome::fail(EXIT_FAILURE, e.to_string()),
    }
}

/// Cycle spanning the order-p part of the cyclic group in degree `q i - 1`.
fn class_generator(table: &HomologyTable, q: i64, i: i64) -> Step<Element> {
    let n = q * i - 1;
    let g = table.group(n).map_err(|e| Outcome::fail(EXIT_CONFIG, e.to_string()))?;
    g.factors()
        .first()
        .map(|f| match f.order {
            FactorOrder::Torsion(e) => f.representative.scale(g.ring().p_pow(e - 1)),
            FactorOrder::Free => f.representative.clone(),
        })
        .ok_or_else(|| Outcome::fail(EXIT_CONFIG, format!("H_{n} is trivial: no class gamma_{i}")))
}

fn cmd_massey(c: &Common, input: &str, i: i64, j: i64) -> Step<Outcome> {
    if i + j == 0 {
        return Err(Outcome::fail(EXIT_CONFIG, "i+j must be nonzero"));
    }
    if i == 0 || j == 0 {
        return Err(Outcome::fail(EXIT_CONFIG, "i and j must be nonzero"));
    }
    let (dga, builtin) = load(input, c)?;
    let table = HomologyTable::new(&dga);
    let q = 2 * dga.ring().prime() as i64 - 2;
    let (res, expected): (MasseyResult, Option<HomologyClass>) = if builtin {
        let (res, expected) = bracket_in_c(&table, i, j).map_err(massey_failure)?;
        (res, Some(expected))
    } else {
        let a = class_generator(&table, q, i)?;
        let cc = class_generator(&table, q, j)?;
        (massey_of_cycles(&table, &a, &p_unit(&dga), &cc).map_err(massey_failure)?, None)
    };
    let group = table.group(res.degree).map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
    let indet = subgroup_log_size(&group, &res.indeterminacy_generators);
    let section = table.section(&res.representative).map_err(|e| Outcome::fail(EXIT_FAILURE, e.to_string()))?;
    let ok = expected.as_ref().map(|e| *e == res.representative && indet == 0);
    let named = expected.as_ref().filter(|e| **e == res.representative).map(|_| format!("γ_{}", i + j));
    let fmt_e = |e: &Element| format_element(&dga, e);
    let m = MasseyMachine {
        i,
        j,
        degree: res.degree,
        representative: fmt_e(&section),
        coordinates: res.representative.coords.iter().map(|c| c.signed()).collect(),
        named,
        indeterminacy_order: dga.ring().prime().pow(indet),
        indeterminacy_generators: res
            .indeterminacy_generators
            .iter()
            .map(|g| table.section(g).map(|s| fmt_e(&s)).unwrap_or_default())
            .collect(),
        witnesses: (fmt_e(&res.witnesses.0), fmt_e(&res.witnesses.1)),
        expected: expected.as_ref().and_then(|e| table.section(e).ok()).map(|s| fmt_e(&s)),
        ok,
    };
    let report = if c.machine {
        json(&m)
    } else {
        let mut out = format!("<gamma_{i}, p, gamma_{j}> in degree {}\n", m.degree);
        out.push_str(&format!("witnesses: u = {}, v = {}\n", m.witnesses.0, m.witnesses.1));
        out.push_str(&format!("representative: {} (coordinates {:?} in H_{} = {})\n", m.representative, m.coordinates, m.degree, group.describe()));
        if indet == 0 {
            out.push_str("indeterminacy: 0\n");
        } else {
            out.push_str(&format!(
                "indeterminacy: order {} generated by {}\n",
                m.indeterminacy_order,
                m.indeterminacy_generators.join(", ")
            ));
        }
        if let Some(e) = &m.expected {
            let status = if m.ok == Some(true) { "OK" } else { "FAIL" };
            out.push_str(&format!("expected: γ_{} = {e}: {status}\n", i + j));
        }
        let shown = m.named.clone().unwrap_or_else(|| m.representative.clone());
        out.push_str(&format!("result: {shown}, indeterminacy {}\n", if indet == 0 { 0 } else { m.indeterminacy_order }));
        out
    };
    Ok(Outcome::with_code(report, ok != Some(false), EXIT_FAILURE, "bracket differs from the expected class"))
}

#[derive(Serialize)]
struct SynthesisMachine {
    normalize: Vec<StepRecord>,
    synthesis: Option<crate::rigidity::MachineReport>,
    status: String,
}

fn cmd_synthesize(c: &Common, input: &str, budget: usize) -> Step<Outcome> {
    let (dga, _) = load(input, c)?;
    let mut normalize = Vec::new();
    let normalized;
    let target = if dga.basis_size(0) == 1 {
        normalize.push(StepRecord {
            name: "normalize".into(),
            passed: true,
            detail: "D_0 already spanned by the unit".into(),
        });
        &dga
    } else {
        match normalize_degree_zero(&dga, budget) {
            Ok(r) => {
                for s in r.certificate.sweeps() {
                    normalize.push(StepRecord { name: format!("normalize {}", s.name), passed: s.passed(), detail: s.detail() });
                }
                normalized = r.normalized;
                &normalized
            }
            Err(e) => {
                normalize.push(StepRecord { name: "normalize".into(), passed: false, detail: e.to_string() });
                let report = if c.machine {
                    json(&SynthesisMachine { normalize, synthesis: None, status: "failure".into() })
                } else {
                    normalize.iter().map(|s| format!("{s}\n")).collect::<String>() + &format!("RESULT: failure — {e}\n")
                };
                return Ok(Outcome::with_code(report, false, EXIT_FAILURE, "normalization failed"));
            }
        }
    };
    let report = synthesize_qiso(target);
    let ok = report.success();
    let text = if c.machine {
        json(&SynthesisMachine {
            normalize,
            synthesis: Some(report.machine(target)),
            status: if ok { "success".into() } else { "failure".into() },
        })
    } else {
        normalize.iter().map(|s| format!("{s}\n")).collect::<String>() + &report.render(target)
    };
    let reason = report.failure.as_ref().map(|f| f.to_string()).unwrap_or_default();
    Ok(Outcome::with_code(text, ok, EXIT_FAILURE, &reason))
}

#[derive(Serialize)]
struct PerturbMachine {
    log: Vec<String>,
    dga: String,
}

/// The serialized dga, preceded by the move log as `#` comments when there were moves.
pub fn perturb_text(dga: &DgaPresentation, log: &[String]) -> String {
    let mut out: String = log.iter().map(|l| format!("# {l}\n")).collect();
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str(&serialize_dga(dga));
    out
}

fn cmd_perturb(c: &Common, seed: u64, budget: usize) -> Step<Outcome> {
    let (ring, window) = config(c)?;
    let pert = perturb_dga(ring.prime(), ring.precision(), window, seed, budget).map_err(dga_failure)?;
    let report = if c.machine {
        json(&PerturbMachine { log: pert.log.clone(), dga: serialize_dga(&pert.dga) })
    } else {
        perturb_text(&pert.dga, &pert.log)
    };
    Ok(Outcome::ok(report))
}

/// Run a parsed command without touching stdout.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::VerifyPaper { common, max_index } => cmd_verify_paper(common, *max_index),
        Command::Homology { common, input } => cmd_homology(common, input),
        Command::Massey { common, input, i, j } => cmd_massey(common, input, *i, *j),
        Command::Synthesize { common, input, budget } => cmd_synthesize(common, input, *budget),
        Command::Perturb { common, seed, budget } => cmd_perturb(common, *seed, *budget),
    };
    result.unwrap_or_else(|o| o)
}

fn common(cli: &Cli) -> &Common {
    match &cli.command {
        Command::VerifyPaper { common, .. }
        | Command::Homology { common, .. }
        | Command::Massey { common, .. }
        | Command::Synthesize { common, .. }
        | Command::Perturb { common, .. } => common,
    }
}

/// Run and emit: the report to `--output` or stdout, diagnostics to stderr.
pub fn execute(cli: &Cli) -> i32 {
    let outcome = run(cli);
    if !outcome.report.is_empty() {
        match &common(cli).output {
            Some(path) => {
                if let Err(e) = fs::write(path, &outcome.report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_CONFIG;
                }
            }
            // a closed pipe downstream is not our failure
            None => {
                let _ = std::io::stdout().write_all(outcome.report.as_bytes());
            }
        }
    }
    if let Some(m) = &outcome.message {
        eprintln!("error: {m}");
    }
    outcome.code
}

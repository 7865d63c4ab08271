//! Command-line front end. [`run`] does all the work and returns the exit
//! code with the text for stdout and stderr, so the binary is a thin shim.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cases::{betti_of_case, enumerate_cases, CaseProfile, LevelShape, Rank};
use crate::cyclotomic::{enumerate_charpolys, expand, CyclotomicMultiset, DegreeSet};
use crate::jsonint;
use crate::matrix::IntMatrix;
use crate::model::{Flag, LeNumber, LinkModel, Scenario, ScenarioFile};
use crate::modp::{
    check_prime, reduce_and_rank, reduce_traces, torsion_bounds, uct_dimension, TorsionProfile,
};
use crate::realization::{integral_cohomology, realize, verify, ComplexRealization};
use crate::traces::{
    alternating_trace_sum, check_lci_signs, check_telescoping, lambda_lower_bounds_with, lm_traces,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "le-monodromy",
    version,
    about = "Trace, Lê number and case analysis of Lê-Milnor monodromies"
)]
struct Cli {
    /// Emit the structured JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lê-Milnor traces and the telescoping identity.
    Traces { file: PathBuf },
    /// Lower bounds on the Lê numbers.
    Bounds {
        file: PathBuf,
        /// Fix λ^J = V (repeatable).
        #[arg(long = "lambda", value_name = "J=V", value_parser = parse_assignment)]
        lambda: Vec<(usize, u64)>,
    },
    /// Every admissible structure of the Lê module complex.
    Cases {
        file: PathBuf,
        /// Fix λ^J = V (repeatable).
        #[arg(long = "lambda", value_name = "J=V", value_parser = parse_assignment)]
        lambda: Vec<(usize, u64)>,
        /// Run once for each λ^J in A..B (inclusive).
        #[arg(long, value_name = "J=A..B", value_parser = parse_sweep)]
        sweep: Option<(usize, u64, u64)>,
    },
    /// Products of cyclotomic polynomials with given degree and trace.
    Charpoly {
        #[arg(long)]
        degree: u64,
        #[arg(long, allow_hyphen_values = true)]
        trace: i64,
    },
    /// Build an integral witness complex for one case and verify it.
    Realize {
        file: PathBuf,
        /// Case number as listed by `cases` (from 1).
        #[arg(long)]
        case: usize,
        /// Value of λ^0 when the scenario leaves it unknown (default: least admissible).
        #[arg(long)]
        lambda0: Option<u64>,
        /// Characteristic polynomial assignment within the case (from 1).
        #[arg(long)]
        assignment: Option<usize>,
        /// Fix λ^J = V (repeatable).
        #[arg(long = "lambda", value_name = "J=V", value_parser = parse_assignment)]
        lambda: Vec<(usize, u64)>,
        /// Also write the bare realization JSON here.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Check a realization file against a scenario.
    Verify {
        realization: PathBuf,
        /// Scenario file the realization should match.
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Mod-p reduction: torsion bounds for every case of a scenario, or the
    /// Universal Coefficient comparison for a realization file.
    Modp {
        file: PathBuf,
        /// A prime.
        #[arg(short = 'p', long = "prime")]
        p: u64,
        /// Fix λ^J = V (repeatable).
        #[arg(long = "lambda", value_name = "J=V", value_parser = parse_assignment)]
        lambda: Vec<(usize, u64)>,
    },
}

fn parse_assignment(text: &str) -> Result<(usize, u64), String> {
    let (j, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected J=V, got {text:?}"))?;
    let j = j.trim().parse().map_err(|_| format!("bad level {j:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad value {v:?}"))?;
    Ok((j, v))
}

fn parse_sweep(text: &str) -> Result<(usize, u64, u64), String> {
    let (j, range) = text
        .split_once('=')
        .ok_or_else(|| format!("expected J=A..B, got {text:?}"))?;
    let (a, b) = range
        .split_once("..")
        .ok_or_else(|| format!("expected a range A..B, got {range:?}"))?;
    let j = j.trim().parse().map_err(|_| format!("bad level {j:?}"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((j, a, b))
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: String) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(code, text)
            };
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => outcome,
        Err(message) => Outcome::input_error(message),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Traces { file } => {
            let (sf, sc) = load_scenario(file, &[])?;
            Ok(traces_command(&sf, &sc, cli.json))
        }
        Command::Bounds { file, lambda } => {
            let (sf, sc) = load_scenario(file, lambda)?;
            Ok(bounds_command(&sf, &sc, cli.json))
        }
        Command::Cases {
            file,
            lambda,
            sweep,
        } => {
            let (sf, sc) = load_scenario(file, lambda)?;
            cases_command(&sf, &sc, *sweep, cli.json)
        }
        Command::Charpoly { degree, trace } => Ok(charpoly_command(*degree, *trace, cli.json)),
        Command::Realize {
            file,
            case,
            lambda0,
            assignment,
            lambda,
            output,
        } => {
            let (sf, sc) = load_scenario(file, lambda)?;
            realize_command(
                &sf,
                &sc,
                *case,
                *lambda0,
                *assignment,
                output.as_deref(),
                cli.json,
            )
        }
        Command::Verify {
            realization,
            scenario,
        } => {
            let r = load_realization(realization)?;
            let (sf, sc) = load_scenario(scenario, &[])?;
            Ok(verify_command(&sf, &sc, &r, cli.json))
        }
        Command::Modp { file, p, lambda } => {
            check_prime(*p).map_err(|e| format!("-p: {e}"))?;
            let text = read(file)?;
            let value = parse_json(file, &text)?;
            if value.get("monodromy").is_some() {
                if !lambda.is_empty() {
                    return Err("--lambda does not apply to a realization file".into());
                }
                let r = ComplexRealization::from_json(&text)
                    .map_err(|e| format!("{}: {e}", file.display()))?;
                modp_realization_command(&r, *p, cli.json)
            } else {
                let (sf, sc) = scenario_from_value(file, &value, lambda)?;
                modp_scenario_command(&sf, &sc, *p, cli.json)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn parse_json(path: &Path, text: &str) -> Result<Value, String> {
    serde_json::from_str(text).map_err(|e| format!("{}: invalid JSON: {e}", path.display()))
}

const SCENARIO_KEYS: [&str; 5] = ["n", "s", "link_model", "le_numbers", "flags"];

fn field<T: DeserializeOwned>(
    path: &Path,
    obj: &Map<String, Value>,
    key: &str,
) -> Result<Option<T>, String> {
    obj.get(key)
        .map(|v| {
            serde_json::from_value(v.clone())
                .map_err(|e| format!("{}: key `{key}`: {e}", path.display()))
        })
        .transpose()
}

fn required<T: DeserializeOwned>(
    path: &Path,
    obj: &Map<String, Value>,
    key: &str,
) -> Result<T, String> {
    field(path, obj, key)?.ok_or_else(|| format!("{}: missing key `{key}`", path.display()))
}

fn load_scenario(
    path: &Path,
    overrides: &[(usize, u64)],
) -> Result<(ScenarioFile, Scenario), String> {
    let text = read(path)?;
    let value = parse_json(path, &text)?;
    scenario_from_value(path, &value, overrides)
}

/// Reads a scenario key by key so that every error names the key at fault,
/// then applies `--lambda` overrides.
fn scenario_from_value(
    path: &Path,
    value: &Value,
    overrides: &[(usize, u64)],
) -> Result<(ScenarioFile, Scenario), String> {
    let obj = value
        .as_object()
        .ok_or_else(|| format!("{}: a scenario must be a JSON object", path.display()))?;
    if let Some(key) = obj.keys().find(|k| !SCENARIO_KEYS.contains(&k.as_str())) {
        return Err(format!("{}: unknown key `{key}`", path.display()));
    }
    let mut sf = ScenarioFile {
        n: required(path, obj, "n")?,
        s: required(path, obj, "s")?,
        link_model: required::<LinkModel>(path, obj, "link_model")?,
        le_numbers: required(path, obj, "le_numbers")?,
        flags: field::<Vec<Flag>>(path, obj, "flags")?.unwrap_or_default(),
    };
    for &(j, v) in overrides {
        let slot = sf.le_numbers.get_mut(j).ok_or_else(|| {
            format!("--lambda {j}={v}: level {j} is outside 0..=s (key `le_numbers`)")
        })?;
        *slot = Some(v as i64);
    }
    let sc = sf
        .to_scenario()
        .map_err(|e| format!("{}: key `{}`: {e}", path.display(), e.key()))?;
    Ok((sf, sc))
}

fn load_realization(path: &Path) -> Result<ComplexRealization, String> {
    let text = read(path)?;
    ComplexRealization::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// The structured report. Sections that a subcommand does not compute are
/// `null`.
#[derive(Debug, Default, Serialize)]
struct Report {
    scenario: Option<Value>,
    traces: Option<Value>,
    telescoping: Option<Value>,
    bounds: Option<Value>,
    cases: Option<Value>,
    modp: Option<Value>,
    realization: Option<Value>,
}

impl Report {
    fn for_scenario(sf: &ScenarioFile, sc: &Scenario) -> Self {
        let traces = lm_traces(sc);
        Report {
            scenario: Some(to_value(sf)),
            telescoping: Some(json!({
                "alternating_sum": jsonint::i64_to_value(alternating_trace_sum(&traces, sc.n) as i64),
                "holds": check_telescoping(&traces, sc.n),
            })),
            traces: Some(to_value(&traces)),
            ..Report::default()
        }
    }

    fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn describe_scenario(sf: &ScenarioFile, sc: &Scenario) -> String {
    let chis: Vec<String> = sc.link_chis.iter().map(|c| c.to_string()).collect();
    let lambdas: Vec<String> = sc.le_numbers.iter().map(|l| l.to_string()).collect();
    let flags: Vec<&str> = sc.flags.iter().map(|f| f.as_str()).collect();
    let model = match &sf.link_model {
        LinkModel::Smooth => "smooth".to_string(),
        LinkModel::BranchCurve(r) => format!("branch_curve({r})"),
        LinkModel::ConeA1 => "cone_a1".to_string(),
        LinkModel::Explicit(_) => "explicit".to_string(),
    };
    format!(
        "scenario: n = {}, s = {}, link model {model}, χ(L^0..L^s) = [{}], λ^0..λ^s = [{}], flags: {}\n",
        sc.n,
        sc.s,
        chis.join(", "),
        lambdas.join(", "),
        if flags.is_empty() {
            "none".to_string()
        } else {
            flags.join(", ")
        }
    )
}

fn traces_text(sc: &Scenario) -> String {
    let traces = lm_traces(sc);
    let mut out = String::new();
    for j in 0..=sc.s {
        writeln!(out, "trace(α_{j}) = {}", traces.get(j)).unwrap();
    }
    let sum = alternating_trace_sum(&traces, sc.n);
    writeln!(
        out,
        "telescoping: Σ (-1)^(n-j) trace(α_j) = {sum} ({})",
        if sum == -1 { "holds" } else { "FAILS" }
    )
    .unwrap();
    out
}

fn traces_command(sf: &ScenarioFile, sc: &Scenario, json: bool) -> Outcome {
    let text = if json {
        Report::for_scenario(sf, sc).render()
    } else {
        describe_scenario(sf, sc) + &traces_text(sc)
    };
    Outcome::ok(EXIT_OK, text)
}

fn bounds_command(sf: &ScenarioFile, sc: &Scenario, json: bool) -> Outcome {
    let traces = lm_traces(sc);
    let report = lambda_lower_bounds_with(&traces, &sc.le_numbers);
    let lci = sc
        .has_flag(Flag::SigmaLci)
        .then(|| check_lci_signs(&traces, sc.n, sc.s));
    let violated = report.levels.iter().any(|l| l.satisfied == Some(false)) || lci == Some(false);
    let code = if violated { EXIT_INFEASIBLE } else { EXIT_OK };
    if json {
        let mut r = Report::for_scenario(sf, sc);
        r.bounds = Some(json!({ "levels": to_value(&report), "lci_signs": lci }));
        return Outcome::ok(code, r.render());
    }
    let mut out = describe_scenario(sf, sc);
    for l in &report.levels {
        let mut bound = format!("λ^{} ≥ {}", l.level, l.lower_bound);
        if l.excludes_one {
            write!(bound, ", λ^{} ≠ 1", l.level).unwrap();
        }
        write!(out, "level {}: trace {}, {bound}", l.level, l.trace).unwrap();
        match (l.lambda, l.satisfied) {
            (Some(v), Some(true)) if l.extremal => {
                write!(out, "; λ^{} = {v} attains the bound", l.level).unwrap()
            }
            (Some(v), Some(true)) => write!(out, "; λ^{} = {v} ok", l.level).unwrap(),
            (Some(v), _) => write!(out, "; λ^{} = {v} VIOLATES the bound", l.level).unwrap(),
            (None, _) => {}
        }
        out.push('\n');
    }
    if let Some(holds) = lci {
        writeln!(
            out,
            "LCI sign condition (-1)^(n-s-1) trace(α_j) ≥ 0: {}",
            if holds { "holds" } else { "FAILS" }
        )
        .unwrap();
    }
    Outcome::ok(code, out)
}

fn poly_text(cp: &CyclotomicMultiset) -> String {
    format!("{cp} : {}", expand(cp))
}

fn charpoly_command(degree: u64, trace: i64, json: bool) -> Outcome {
    let found = enumerate_charpolys(degree, trace);
    let code = if found.is_empty() {
        EXIT_INFEASIBLE
    } else {
        EXIT_OK
    };
    if json {
        let list: Vec<Value> = found
            .iter()
            .map(|cp| {
                let p = expand(cp);
                json!({
                    "multiset": cp,
                    "name": cp.to_string(),
                    "polynomial": p.to_string(),
                    "coefficients": p.coeffs().iter().map(jsonint::to_value).collect::<Vec<_>>(),
                })
            })
            .collect();
        let value = json!({ "degree": degree, "trace": trace, "charpolys": list });
        let mut text = serde_json::to_string_pretty(&value).unwrap();
        text.push('\n');
        return Outcome::ok(code, text);
    }
    let mut out = String::new();
    if found.is_empty() {
        writeln!(
            out,
            "no product of cyclotomic polynomials has degree {degree} and trace {trace}"
        )
        .unwrap();
    }
    for cp in &found {
        writeln!(out, "{}", poly_text(cp)).unwrap();
    }
    Outcome::ok(code, out)
}

fn shape_text(l: &LevelShape, lambda: LeNumber) -> String {
    let total = match lambda {
        LeNumber::Known(v) => v.to_string(),
        LeNumber::Unknown => "λ0".to_string(),
    };
    format!(
        "level {}: in {} + h {} + coim {} = {total}",
        l.level, l.rank_in, l.rank_h, l.rank_coim
    )
}

fn betti_text(case: &CaseProfile, n: usize) -> String {
    betti_of_case(case, n)
        .iter()
        .map(|(k, r)| format!("b_{k} = {r}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn pieces_text(case: &CaseProfile, index: usize) -> String {
    let a = &case.assignments[index];
    let levels: Vec<String> = a
        .levels
        .iter()
        .map(|l| {
            let mut parts = Vec::new();
            if l.rank_in > 0 {
                parts.push(format!("in {}", l.cp_in));
            }
            match &l.cp_h {
                Some(cp) if !cp.is_empty() => parts.push(format!("h {cp}")),
                Some(_) => {}
                None => parts.push("h ?".to_string()),
            }
            if l.rank_coim > 0 {
                parts.push(format!("coim {}", l.cp_coim));
            }
            if parts.is_empty() {
                parts.push("0".to_string());
            }
            format!("α_{}: {}", l.level, parts.join(", "))
        })
        .collect();
    let mut line = levels.join("; ");
    if let Some(set) = &a.lambda0_constraint {
        write!(line, " [{}]", set.describe("λ0")).unwrap();
    }
    line
}

fn case_text(out: &mut String, sc: &Scenario, case: &CaseProfile, number: usize, total: usize) {
    writeln!(out, "case {number} of {total}").unwrap();
    for l in &case.levels {
        writeln!(out, "  {}", shape_text(l, sc.lambda(l.level))).unwrap();
    }
    writeln!(out, "  betti: {}", betti_text(case, sc.n)).unwrap();
    if let (Some(c), Some(b)) = (&case.lambda0_constraint, &case.lambda0_level_bound) {
        writeln!(
            out,
            "  λ0: {} (level bound: {})",
            c.describe("λ0"),
            b.describe("λ0")
        )
        .unwrap();
    }
    for l in &case.levels {
        let polys = case.cohomology_charpolys(l.level);
        if polys.iter().any(|p| !p.is_empty()) {
            let rendered: Vec<String> = polys.iter().map(poly_text).collect();
            writeln!(
                out,
                "  char poly on H^{}: {}",
                sc.degree_of_level(l.level),
                rendered.join(" | ")
            )
            .unwrap();
        }
    }
    writeln!(out, "  assignments: {}", case.assignments.len()).unwrap();
    for i in 0..case.assignments.len() {
        writeln!(out, "    {}. {}", i + 1, pieces_text(case, i)).unwrap();
    }
}

fn case_value(sc: &Scenario, case: &CaseProfile, number: usize) -> Value {
    let betti: BTreeMap<String, Rank> = betti_of_case(case, sc.n)
        .into_iter()
        .map(|(k, r)| (k.to_string(), r))
        .collect();
    let charpolys: BTreeMap<String, Vec<String>> = case
        .levels
        .iter()
        .map(|l| {
            (
                sc.degree_of_level(l.level).to_string(),
                case.cohomology_charpolys(l.level)
                    .iter()
                    .map(|cp| expand(cp).to_string())
                    .collect(),
            )
        })
        .collect();
    json!({
        "case": number,
        "levels": case.levels,
        "betti": betti,
        "cohomology_charpolys": charpolys,
        "lambda0_constraint": case.lambda0_constraint,
        "lambda0_constraint_text": case.lambda0_constraint.as_ref().map(|c| c.describe("λ0")),
        "lambda0_level_bound": case.lambda0_level_bound,
        "lambda0_level_bound_text": case.lambda0_level_bound.as_ref().map(|c| c.describe("λ0")),
        "assignments": case.assignments,
    })
}

/// Swept level and value (if any) with the scenario it produces.
type SweepRun = (Option<(usize, u64)>, Scenario, ScenarioFile);

fn cases_command(
    sf: &ScenarioFile,
    sc: &Scenario,
    sweep: Option<(usize, u64, u64)>,
    json: bool,
) -> Result<Outcome, String> {
    let runs: Vec<SweepRun> = match sweep {
        None => vec![(None, sc.clone(), sf.clone())],
        Some((j, a, b)) => {
            if j > sc.s {
                return Err(format!(
                    "--sweep {j}={a}..{b}: level {j} is outside 0..=s (key `le_numbers`)"
                ));
            }
            (a..=b)
                .map(|v| {
                    let mut f = sf.clone();
                    f.le_numbers[j] = Some(v as i64);
                    (Some((j, v)), sc.with_lambda(j, LeNumber::Known(v)), f)
                })
                .collect()
        }
    };
    let mut any = false;
    let mut sections = Vec::new();
    let mut text = String::new();
    for (idx, (fixed, scenario, file)) in runs.iter().enumerate() {
        let cases = enumerate_cases(scenario).map_err(|e| format!("key `le_numbers`: {e}"))?;
        any |= !cases.is_empty();
        if json {
            let mut r = Report::for_scenario(file, scenario);
            r.cases = Some(Value::Array(
                cases
                    .iter()
                    .enumerate()
                    .map(|(i, c)| case_value(scenario, c, i + 1))
                    .collect(),
            ));
            sections.push(r);
            continue;
        }
        if idx > 0 {
            text.push('\n');
        }
        if let Some((j, v)) = fixed {
            writeln!(text, "== λ^{j} = {v} ==").unwrap();
        }
        text += &describe_scenario(file, scenario);
        text += &traces_text(scenario);
        if cases.is_empty() {
            text += "no admissible case: the scenario is infeasible\n";
        } else {
            writeln!(text, "{} case{}", cases.len(), plural(cases.len())).unwrap();
        }
        for (i, c) in cases.iter().enumerate() {
            text.push('\n');
            case_text(&mut text, scenario, c, i + 1, cases.len());
        }
    }
    if json {
        text = if sweep.is_none() {
            sections.pop().unwrap().render()
        } else {
            let mut t = serde_json::to_string_pretty(&sections).unwrap();
            t.push('\n');
            t
        };
    }
    Ok(Outcome::ok(
        if any { EXIT_OK } else { EXIT_INFEASIBLE },
        text,
    ))
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn pick_case(sc: &Scenario, number: usize) -> Result<Option<(Vec<CaseProfile>, usize)>, String> {
    let cases = enumerate_cases(sc).map_err(|e| format!("key `le_numbers`: {e}"))?;
    if cases.is_empty() {
        return Ok(None);
    }
    if number == 0 || number > cases.len() {
        return Err(format!(
            "--case {number}: there are {} cases, numbered from 1",
            cases.len()
        ));
    }
    Ok(Some((cases, number - 1)))
}

fn default_lambda0(case: &CaseProfile, assignment: Option<usize>) -> Option<u64> {
    let set: Option<&DegreeSet> = match assignment {
        Some(i) => case.assignments.get(i)?.lambda0_constraint.as_ref(),
        None => case.lambda0_constraint.as_ref(),
    };
    set.and_then(DegreeSet::least)
}

fn matrix_text(out: &mut String, name: &str, m: &IntMatrix) {
    if m.rows() == 0 || m.cols() == 0 {
        writeln!(out, "{name} ({}x{}) = 0", m.rows(), m.cols()).unwrap();
        return;
    }
    writeln!(out, "{name} ({}x{}) =", m.rows(), m.cols()).unwrap();
    for line in m.to_string().lines() {
        writeln!(out, "  {line}").unwrap();
    }
}

fn realization_text(out: &mut String, r: &ComplexRealization) {
    writeln!(
        out,
        "ranks M^0..M^s: [{}]",
        r.ranks
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
    .unwrap();
    for (j, a) in r.monodromy.iter().enumerate() {
        matrix_text(out, &format!("A_{j}"), a);
    }
    for (i, d) in r.differentials.iter().enumerate() {
        matrix_text(out, &format!("D_{}", i + 1), d);
    }
}

fn verification_text(out: &mut String, sc: &Scenario, r: &ComplexRealization) -> bool {
    let report = verify(r, sc);
    for c in &report.checks {
        writeln!(
            out,
            "check {}: {}",
            c.name,
            if c.passed {
                "pass".to_string()
            } else {
                format!("FAIL ({})", c.detail)
            }
        )
        .unwrap();
    }
    for h in &report.cohomology {
        let torsion = if h.torsion.is_empty() {
            String::new()
        } else {
            format!(
                " ⊕ {}",
                h.torsion
                    .iter()
                    .map(|t| format!("Z/{t}"))
                    .collect::<Vec<_>>()
                    .join(" ⊕ ")
            )
        };
        writeln!(out, "H^{} = Z^{}{torsion}", h.degree, h.betti).unwrap();
    }
    report.passed()
}

#[allow(clippy::too_many_arguments)]
fn realize_command(
    sf: &ScenarioFile,
    sc: &Scenario,
    number: usize,
    lambda0: Option<u64>,
    assignment: Option<usize>,
    output: Option<&Path>,
    json: bool,
) -> Result<Outcome, String> {
    let Some((cases, index)) = pick_case(sc, number)? else {
        return Ok(infeasible(sf, sc, json));
    };
    let case = &cases[index];
    let assignment = match assignment {
        Some(0) => return Err("--assignment is numbered from 1".into()),
        other => other.map(|a| a - 1),
    };
    if let Some(a) = assignment {
        if a >= case.assignments.len() {
            return Err(format!(
                "--assignment {}: case {number} has {} assignments",
                a + 1,
                case.assignments.len()
            ));
        }
    }
    let lambda0 = match (sc.lambda(0), lambda0) {
        (LeNumber::Known(v), Some(w)) if v != w => {
            return Err(format!(
                "--lambda0 {w} contradicts λ^0 = {v} (key `le_numbers`)"
            ))
        }
        (LeNumber::Known(_), _) => None,
        (LeNumber::Unknown, Some(w)) => Some(w),
        (LeNumber::Unknown, None) => default_lambda0(case, assignment),
    };
    let r = match realize(case, sc.n, assignment, lambda0) {
        Ok(r) => r,
        Err(e) => {
            let message = format!("case {number} cannot be realized: {e}\n");
            return Ok(if json {
                let mut report = Report::for_scenario(sf, sc);
                report.realization = Some(json!({ "error": e.to_string() }));
                Outcome::ok(EXIT_INFEASIBLE, report.render())
            } else {
                Outcome::ok(EXIT_INFEASIBLE, message)
            });
        }
    };
    if let Some(path) = output {
        std::fs::write(path, r.to_json() + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let mut text = String::new();
    let passed = if json {
        verify(&r, sc).passed()
    } else {
        text += &describe_scenario(sf, sc);
        write!(text, "case {number} of {}", cases.len()).unwrap();
        if let Some(v) = lambda0 {
            write!(text, ", λ0 = {v}").unwrap();
        }
        text.push('\n');
        realization_text(&mut text, &r);
        verification_text(&mut text, sc, &r)
    };
    let code = if passed { EXIT_OK } else { EXIT_INFEASIBLE };
    if json {
        let mut report = Report::for_scenario(sf, sc);
        report.cases = Some(Value::Array(vec![case_value(sc, case, number)]));
        report.realization = Some(json!({
            "lambda0": lambda0,
            "complex": to_value(&r),
            "verification": to_value(&verify(&r, sc)),
        }));
        text = report.render();
    }
    Ok(Outcome::ok(code, text))
}

fn infeasible(sf: &ScenarioFile, sc: &Scenario, json: bool) -> Outcome {
    if json {
        let mut r = Report::for_scenario(sf, sc);
        r.cases = Some(Value::Array(Vec::new()));
        Outcome::ok(EXIT_INFEASIBLE, r.render())
    } else {
        Outcome::ok(
            EXIT_INFEASIBLE,
            describe_scenario(sf, sc) + "no admissible case: the scenario is infeasible\n",
        )
    }
}

fn verify_command(sf: &ScenarioFile, sc: &Scenario, r: &ComplexRealization, json: bool) -> Outcome {
    let report = verify(r, sc);
    let code = if report.passed() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    };
    if json {
        let mut out = Report::for_scenario(sf, sc);
        out.realization = Some(json!({
            "complex": to_value(r),
            "verification": to_value(&report),
        }));
        return Outcome::ok(code, out.render());
    }
    let mut text = describe_scenario(sf, sc);
    verification_text(&mut text, sc, r);
    Outcome::ok(code, text)
}

fn torsion_profile(r: &ComplexRealization, p: u64) -> (BTreeMap<i64, u64>, TorsionProfile) {
    let cohomology = integral_cohomology(r);
    let betti = cohomology.iter().map(|h| (h.degree, h.betti)).collect();
    let pb = num_bigint::BigInt::from(p);
    let counts = cohomology
        .iter()
        .map(|h| {
            let count = h
                .torsion
                .iter()
                .filter(|t| {
                    t.parse::<num_bigint::BigInt>()
                        .is_ok_and(|v| (v % &pb) == num_bigint::BigInt::from(0))
                })
                .count() as u64;
            (h.degree, count)
        })
        .collect();
    (betti, TorsionProfile { p, counts })
}

fn well_formed(r: &ComplexRealization) -> Result<(), String> {
    if r.ranks.is_empty() {
        return Err("realization has no levels (key `ranks`)".into());
    }
    if r.monodromy.len() != r.ranks.len() || r.differentials.len() + 1 != r.ranks.len() {
        return Err("realization lists do not match `ranks`".into());
    }
    for (i, d) in r.differentials.iter().enumerate() {
        let j = i + 1;
        if d.rows() as u64 != r.ranks[j - 1] || d.cols() as u64 != r.ranks[j] {
            return Err(format!("key `differentials`: D_{j} has the wrong shape"));
        }
    }
    for (j, a) in r.monodromy.iter().enumerate() {
        if a.rows() as u64 != r.ranks[j] || a.cols() as u64 != r.ranks[j] {
            return Err(format!("key `monodromy`: A_{j} has the wrong shape"));
        }
    }
    Ok(())
}

fn modp_realization_command(r: &ComplexRealization, p: u64, json: bool) -> Result<Outcome, String> {
    well_formed(r)?;
    let m = reduce_and_rank(r, p).map_err(|e| format!("-p: {e}"))?;
    let (betti, torsion) = torsion_profile(r, p);
    let uct: BTreeMap<i64, u64> = m
        .dims
        .keys()
        .map(|&k| (k, uct_dimension(&betti, &torsion, k)))
        .collect();
    let consistent = uct == m.dims;
    let code = if consistent { EXIT_OK } else { EXIT_INFEASIBLE };
    if json {
        let report = Report {
            modp: Some(json!({
                "p": p,
                "reduction": to_value(&m),
                "betti": to_value(&betti),
                "torsion": to_value(&torsion),
                "uct_dims": to_value(&uct),
                "consistent": consistent,
            })),
            realization: Some(json!({ "complex": to_value(r) })),
            ..Report::default()
        };
        return Ok(Outcome::ok(code, report.render()));
    }
    let mut text = String::new();
    writeln!(text, "p = {p}").unwrap();
    for (&k, &dim) in &m.dims {
        writeln!(
            text,
            "H^{k}(Z/{p}): dim {dim}; b_{k} = {}, t_{k} = {}, t_{} = {} gives {}",
            betti.get(&k).copied().unwrap_or(0),
            torsion.get(k),
            k + 1,
            torsion.get(k + 1),
            uct[&k]
        )
        .unwrap();
    }
    writeln!(
        text,
        "traces mod {p}: [{}]",
        m.traces
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
    .unwrap();
    writeln!(
        text,
        "Universal Coefficient check: {}",
        if consistent {
            "consistent"
        } else {
            "INCONSISTENT"
        }
    )
    .unwrap();
    Ok(Outcome::ok(code, text))
}

fn modp_scenario_command(
    sf: &ScenarioFile,
    sc: &Scenario,
    p: u64,
    json: bool,
) -> Result<Outcome, String> {
    let cases = enumerate_cases(sc).map_err(|e| format!("key `le_numbers`: {e}"))?;
    let traces = lm_traces(sc);
    let traces_mod_p = reduce_traces(&traces.0, p);
    let mut text = describe_scenario(sf, sc);
    writeln!(
        text,
        "traces mod {p}: [{}]",
        traces_mod_p
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
    .unwrap();
    if cases.is_empty() {
        text += "no admissible case: the scenario is infeasible\n";
    }
    let mut entries = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let lambda0 = match sc.lambda(0) {
            LeNumber::Known(v) => v,
            LeNumber::Unknown => default_lambda0(case, None).expect("nonempty constraint"),
        };
        let le: Vec<u64> = (0..=sc.s)
            .map(|j| sc.lambda(j).known().unwrap_or(lambda0))
            .collect();
        let betti: BTreeMap<i64, u64> = betti_of_case(case, sc.n)
            .into_iter()
            .map(|(k, r)| (k, r.instantiate(lambda0).unwrap_or(0)))
            .collect();
        let bounds = torsion_bounds(&le, &betti, sc.n, p);
        let witness = realize(case, sc.n, None, Some(lambda0))
            .ok()
            .and_then(|r| reduce_and_rank(&r, p).ok());
        writeln!(text, "\ncase {} of {}", i + 1, cases.len()).unwrap();
        if sc.lambda(0).is_unknown() {
            writeln!(text, "  at λ0 = {lambda0}").unwrap();
        }
        for ineq in &bounds.inequalities {
            let vars: Vec<String> = ineq.vars.iter().map(|k| format!("t_{k}")).collect();
            writeln!(
                text,
                "  level {}: {} ≤ λ^{} - b_{} = {}",
                ineq.level,
                vars.join(" + "),
                ineq.level,
                ineq.degree,
                ineq.bound
            )
            .unwrap();
        }
        let maxima: Vec<String> = bounds
            .max_torsion
            .iter()
            .map(|(k, m)| format!("t_{k} ≤ {m}"))
            .collect();
        writeln!(text, "  {}-torsion counts: {}", p, maxima.join(", ")).unwrap();
        if let Some(w) = &witness {
            let dims: Vec<String> = w
                .dims
                .iter()
                .map(|(k, d)| format!("H^{k}(Z/{p}) = {d}"))
                .collect();
            writeln!(text, "  torsion-free witness: {}", dims.join(", ")).unwrap();
        }
        entries.push(json!({
            "case": i + 1,
            "lambda0": lambda0,
            "betti": to_value(&betti),
            "torsion_bounds": to_value(&bounds),
            "witness": witness.as_ref().map(to_value),
        }));
    }
    let code = if cases.is_empty() {
        EXIT_INFEASIBLE
    } else {
        EXIT_OK
    };
    if json {
        let mut report = Report::for_scenario(sf, sc);
        report.modp = Some(json!({
            "p": p,
            "traces_mod_p": traces_mod_p,
            "cases": entries,
        }));
        return Ok(Outcome::ok(code, report.render()));
    }
    Ok(Outcome::ok(code, text))
}

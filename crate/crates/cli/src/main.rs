//! `qdistill` command-line front end.

mod parse;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdistill::distill::{
    analyze, find_threshold, npt_check, parse_strategies, witness_search, DistillReport, SearchConfig, Strategy,
    ThresholdTarget, DEFAULT_BUDGET, DEFAULT_STARTS as WITNESS_STARTS, WITNESS_TOL,
};
use qdistill::format::{complex_pairs, ser_f64, sig17};
use qdistill::kernel::{kernel_product_vector, KernelMode, ProductVectorResult, SearchOptions, DEFAULT_STARTS};
use qdistill::linalg::eigvals_hermitian;
use qdistill::minors::{
    scan as minor_scan, verify_example, AxisRange, CGrid, MinorScanSpec, ScanQuantity, ValueSource, VerifyConfig,
    FIGURE_HALF_WIDTH, FIGURE_STEP,
};
use qdistill::states::{build_family, range_kernel, FamilyCase, QutritState};
use qdistill::{Error, C64};

use parse::{parse_complex_list, parse_positive, parse_real, parse_x};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 10;

#[derive(Parser, Debug)]
#[command(name = "qdistill", version, about = "Distillability analysis of symmetric rank-five two-qutrit states")]
struct Cli {
    /// Directory for CSV and JSON output files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Witness certification tolerance.
    #[arg(long, global = true, value_parser = parse_positive)]
    tol: Option<f64>,

    /// Print the JSON document on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep x for one family case: partial-transpose spectrum and witness verdict.
    Scan(ScanArgs),
    /// Bisect the x at which an eigenvalue of the partial transpose changes sign.
    Threshold(ThresholdArgs),
    /// Search for a rank-two distillability witness.
    Witness(WitnessArgs),
    /// Run the principal-minor battery for the case (v) state at x = 1/7.
    VerifyExample(VerifyArgs),
    /// Look for a product vector in the kernel of a state.
    Kernel(KernelArgs),
    /// Evaluate one of the minor quantities over a complex grid.
    Grid(GridArgs),
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    case: FamilyCase,
    #[arg(long, value_parser = parse_x, default_value = "0")]
    x_min: f64,
    #[arg(long, value_parser = parse_x, default_value = "1")]
    x_max: f64,
    /// Number of sample points, end points included.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Eigensolves per witness search.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Skip the witness search.
    #[arg(long)]
    no_witness: bool,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    case: FamilyCase,
    /// min-eig or second-eig.
    #[arg(long, default_value = "min-eig")]
    target: ThresholdTarget,
    #[arg(long, value_parser = parse_x)]
    lo: f64,
    #[arg(long, value_parser = parse_x)]
    hi: f64,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    #[arg(long)]
    case: FamilyCase,
    #[arg(long, value_parser = parse_x)]
    x: f64,
    /// Strategies tried in order, e.g. `a`, `a+b`, `a+b+c`.
    #[arg(long, default_value = "a")]
    strategy: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Random starts for the general search.
    #[arg(long, default_value_t = WITNESS_STARTS)]
    starts: usize,
    /// Also evaluate the necessary conditions for undistillability.
    #[arg(long)]
    preconditions: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_x, default_value = "1/7")]
    x: f64,
    #[arg(long, value_parser = parse_positive, default_value_t = FIGURE_STEP)]
    grid_step: f64,
    /// Grids cover Re b, Im b ∈ [−w, w].
    #[arg(long, value_parser = parse_positive, default_value_t = FIGURE_HALF_WIDTH)]
    half_width: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Search,
    Both,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, conflicts_with = "basis", requires = "x")]
    case: Option<FamilyCase>,
    #[arg(long, value_parser = parse_x)]
    x: Option<f64>,
    /// JSON array of 9-entry vectors of [re, im] pairs spanning the range.
    #[arg(long, value_name = "FILE")]
    basis: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    starts: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SourceArg {
    Direct,
    ClosedForm,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// alpha1_psd, alpha2_minor4, alpha2_minor5, alpha2_det, F or G.
    #[arg(long)]
    which: ScanQuantity,
    #[arg(long, value_enum, default_value = "direct")]
    source: SourceArg,
    #[arg(long, value_parser = parse_real, default_value = "-3", allow_hyphen_values = true)]
    re_min: f64,
    #[arg(long, value_parser = parse_real, default_value = "3", allow_hyphen_values = true)]
    re_max: f64,
    #[arg(long, value_parser = parse_real, default_value = "-3", allow_hyphen_values = true)]
    im_min: f64,
    #[arg(long, value_parser = parse_real, default_value = "3", allow_hyphen_values = true)]
    im_max: f64,
    #[arg(long, value_parser = parse_positive, default_value_t = FIGURE_STEP)]
    step: f64,
    /// Comma-separated values of c, e.g. `0,1+1i,-1-1i`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    c: String,
    /// Multiplier applied to every value; defaults to the quantity's own scale.
    #[arg(long, value_parser = parse_positive)]
    scale: Option<f64>,
    #[arg(long, value_parser = parse_x, default_value = "1/7")]
    x: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange { .. } => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

type CliResult = Result<u8, CliError>;

struct Ctx {
    out: Option<PathBuf>,
    seed: u64,
    tol: Option<f64>,
    json: bool,
}

impl Ctx {
    fn write_file(&self, name: &str, contents: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.out else { return Ok(None) };
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, contents)?;
        Ok(Some(path))
    }

    /// The JSON document goes to `<out>/<name>` and, with `--json`, stdout.
    fn emit_json<T: Serialize>(&self, name: &str, doc: &T, human: impl FnOnce() -> String) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(doc).expect("documents serialize") + "\n";
        self.write_file(name, &text)?;
        let mut stdout = std::io::stdout().lock();
        if self.json {
            stdout.write_all(text.as_bytes())?;
        } else {
            stdout.write_all(human().as_bytes())?;
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        out: cli.out,
        seed: cli.seed,
        tol: cli.tol,
        json: cli.json,
    };
    let result = match cli.command {
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::Threshold(a) => cmd_threshold(&ctx, a),
        Command::Witness(a) => cmd_witness(&ctx, a),
        Command::VerifyExample(a) => cmd_verify_example(&ctx, a),
        Command::Kernel(a) => cmd_kernel(&ctx, a),
        Command::Grid(a) => cmd_grid(&ctx, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn search_config(ctx: &Ctx, budget: usize, starts: usize) -> SearchConfig {
    SearchConfig {
        budget,
        seed: ctx.seed,
        tol: ctx.tol.unwrap_or(WITNESS_TOL),
        starts,
    }
}

#[derive(Serialize)]
struct Bracket {
    quantity: &'static str,
    #[serde(serialize_with = "ser_f64")]
    lo: f64,
    #[serde(serialize_with = "ser_f64")]
    hi: f64,
}

#[derive(Serialize)]
struct ScanDoc {
    command: &'static str,
    case: FamilyCase,
    #[serde(serialize_with = "ser_f64")]
    x_min: f64,
    #[serde(serialize_with = "ser_f64")]
    x_max: f64,
    steps: usize,
    seed: u64,
    budget: Option<usize>,
    ppt_rows: usize,
    witness_rows: usize,
    brackets: Vec<Bracket>,
}

struct ScanRow {
    x: f64,
    min_eig: f64,
    second_eig: f64,
    negative_count: usize,
    witness: &'static str,
    value: Option<f64>,
}

fn cmd_scan(ctx: &Ctx, a: ScanArgs) -> CliResult {
    if a.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    if a.x_min >= a.x_max {
        return Err(CliError::Usage(format!("--x-min {} must be below --x-max {}", a.x_min, a.x_max)));
    }
    let cfg = search_config(ctx, a.budget, WITNESS_STARTS);
    let mut rows = Vec::with_capacity(a.steps);
    for k in 0..a.steps {
        let x = a.x_min + (a.x_max - a.x_min) * k as f64 / (a.steps - 1) as f64;
        let state = build_family(a.case, x)?;
        let ev = eigvals_hermitian(&state.partial_transpose())?;
        let npt = npt_check(&state)?;
        let (witness, value) = if a.no_witness {
            ("skipped", None)
        } else if !npt.is_npt {
            ("ppt", None)
        } else {
            let r = match witness_search(&state, &[Strategy::Ay], &cfg) {
                Ok(r) => r,
                Err(Error::BudgetExhausted(r)) => *r,
                Err(e) => return Err(e.into()),
            };
            (if r.witness.is_some() { "found" } else { "none" }, r.best_value)
        };
        rows.push(ScanRow {
            x,
            min_eig: ev[0],
            second_eig: ev[1],
            negative_count: npt.negative_count,
            witness,
            value,
        });
    }

    let mut brackets = Vec::new();
    for (quantity, get) in [
        ("min_eig", (|r: &ScanRow| r.min_eig) as fn(&ScanRow) -> f64),
        ("second_eig", |r: &ScanRow| r.second_eig),
    ] {
        for w in rows.windows(2) {
            let (f0, f1) = (get(&w[0]), get(&w[1]));
            if (f0 < 0.0) != (f1 < 0.0) {
                brackets.push(Bracket {
                    quantity,
                    lo: w[0].x,
                    hi: w[1].x,
                });
            }
        }
    }

    let mut csv = String::from("x,min_eig,second_eig,negative_count,witness,witness_value\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig17(r.x),
            sig17(r.min_eig),
            sig17(r.second_eig),
            r.negative_count,
            r.witness,
            r.value.map_or(String::new(), sig17)
        ));
    }
    let name = format!("scan_{}", a.case);
    ctx.write_file(&format!("{name}.csv"), &csv)?;

    let doc = ScanDoc {
        command: "scan",
        case: a.case,
        x_min: a.x_min,
        x_max: a.x_max,
        steps: a.steps,
        seed: ctx.seed,
        budget: (!a.no_witness).then_some(a.budget),
        ppt_rows: rows.iter().filter(|r| r.negative_count == 0).count(),
        witness_rows: rows.iter().filter(|r| r.witness == "found").count(),
        brackets,
    };
    if ctx.out.is_none() && !ctx.json {
        print!("{csv}");
        return Ok(0);
    }
    ctx.emit_json(&format!("{name}.json"), &doc, || {
        let mut s = format!(
            "case {}: {} rows, {} PPT, {} with a witness\n",
            doc.case, doc.steps, doc.ppt_rows, doc.witness_rows
        );
        for b in &doc.brackets {
            s.push_str(&format!("sign change of {} in [{}, {}]\n", b.quantity, sig17(b.lo), sig17(b.hi)));
        }
        s
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct ThresholdDoc<'a> {
    command: &'static str,
    seed: u64,
    #[serde(flatten)]
    result: &'a qdistill::distill::ThresholdResult,
}

fn cmd_threshold(ctx: &Ctx, a: ThresholdArgs) -> CliResult {
    let result = find_threshold(a.case, a.target, (a.lo, a.hi))?;
    let doc = ThresholdDoc {
        command: "threshold",
        seed: ctx.seed,
        result: &result,
    };
    ctx.emit_json("threshold.json", &doc, || format!("x* = {}\n", sig17(result.x_star)))?;
    Ok(0)
}

#[derive(Serialize)]
struct WitnessDoc<'a> {
    command: &'static str,
    case: FamilyCase,
    #[serde(serialize_with = "ser_f64")]
    x: f64,
    strategies: Vec<String>,
    budget: usize,
    seed: u64,
    budget_exhausted: bool,
    #[serde(flatten)]
    report: &'a DistillReport,
}

fn cmd_witness(ctx: &Ctx, a: WitnessArgs) -> CliResult {
    let strategies = parse_strategies(&a.strategy).map_err(CliError::Usage)?;
    if strategies.is_empty() {
        return Err(CliError::Usage("no strategy given".into()));
    }
    let state = build_family(a.case, a.x)?;
    let cfg = search_config(ctx, a.budget, a.starts);
    let run = if a.preconditions { analyze } else { witness_search };
    let (report, exhausted) = match run(&state, &strategies, &cfg) {
        Ok(r) => (r, false),
        Err(Error::BudgetExhausted(r)) => (*r, true),
        Err(e) => return Err(e.into()),
    };
    let doc = WitnessDoc {
        command: "witness",
        case: a.case,
        x: a.x,
        strategies: strategies.iter().map(|s| s.to_string()).collect(),
        budget: a.budget,
        seed: ctx.seed,
        budget_exhausted: exhausted,
        report: &report,
    };
    ctx.emit_json("witness.json", &doc, || match &report.witness {
        Some(w) => format!("witness found: {} form, projected eigenvalue {}\n", w.form, sig17(w.value)),
        None => format!(
            "no witness found (best value {})\n",
            report.best_value.map_or("n/a".into(), sig17)
        ),
    })?;
    Ok(if report.witness.is_some() { 0 } else { EXIT_NOT_FOUND })
}

fn cmd_verify_example(ctx: &Ctx, a: VerifyArgs) -> CliResult {
    let report = verify_example(&VerifyConfig {
        x: a.x,
        step: a.grid_step,
        half_width: a.half_width,
        ..VerifyConfig::default()
    })?;
    let mut psd = String::from("re_a,im_a,min_eigenvalue,psd\n");
    for v in &report.psd_scan.verdicts {
        psd.push_str(&format!("{},{},{},{}\n", sig17(v.a.re), sig17(v.a.im), sig17(v.min_eigenvalue), v.psd));
    }
    ctx.write_file("alpha1_psd.csv", &psd)?;
    for s in &report.scans {
        ctx.write_file(&format!("{}.csv", s.spec.which.label()), &s.to_csv())?;
    }
    let text = report.to_json_string() + "\n";
    ctx.write_file("verify_example.json", &text)?;
    if ctx.json {
        print!("{text}");
    } else {
        println!("x = {}, grid step {}", sig17(report.x), report.resolution);
        for c in &report.checks {
            println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.detail);
        }
        for m in &report.closed_form_minima {
            println!(
                "closed-form {} minimum {} ({} of {} points non-real)",
                m.which,
                m.min_value.map_or("n/a".into(), sig17),
                m.non_real,
                m.evaluated
            );
        }
        println!("{}", if report.pass() { "PASS" } else { "FAIL" });
    }
    Ok(if report.pass() { 0 } else { EXIT_FAILED })
}

fn read_basis(path: &Path) -> Result<Vec<Vec<C64>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read basis file {}: {e}", path.display())))?;
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed basis file {}: {e}", path.display())))?;
    if raw.is_empty() {
        return Err(CliError::Usage("basis file holds no vectors".into()));
    }
    raw.iter()
        .enumerate()
        .map(|(k, v)| {
            if v.len() != 9 {
                return Err(CliError::Usage(format!("basis vector {k} has {} entries, expected 9", v.len())));
            }
            Ok(qdistill::format::pairs_to_complex(v))
        })
        .collect()
}

#[derive(Serialize)]
struct KernelDoc {
    command: &'static str,
    source: String,
    seed: u64,
    kernel_dim: usize,
    #[serde(serialize_with = "complex_pairs")]
    exact_vector: Vec<C64>,
    exact: Option<ProductVectorResult>,
    search: Option<ProductVectorResult>,
}

fn cmd_kernel(ctx: &Ctx, a: KernelArgs) -> CliResult {
    let (state, source) = match (&a.basis, a.case, a.x) {
        (Some(path), _, _) => {
            let basis = read_basis(path)?;
            let state = QutritState::from_range(&basis)?;
            let name = path.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
            (state, format!("basis:{name}"))
        }
        (None, Some(case), Some(x)) => (build_family(case, x)?, format!("case {case}, x = {}", sig17(x))),
        _ => return Err(CliError::Usage("give either --basis FILE or --case with --x".into())),
    };
    let (_, kernel) = range_kernel(&state)?;
    let opts = SearchOptions {
        starts: a.starts,
        seed: ctx.seed,
    };
    let exact = match a.mode {
        ModeArg::Exact | ModeArg::Both => Some(kernel_product_vector(&state, KernelMode::ExactCases, opts)?),
        ModeArg::Search => None,
    };
    let search = match a.mode {
        ModeArg::Search | ModeArg::Both => Some(kernel_product_vector(&state, KernelMode::Search, opts)?),
        ModeArg::Exact => None,
    };
    let found = exact.iter().chain(search.iter()).any(|r| r.found);
    let exact_vector = exact
        .as_ref()
        .filter(|r| r.found)
        .and_then(|r| r.vector.clone())
        .unwrap_or_default();
    let doc = KernelDoc {
        command: "kernel",
        source,
        seed: ctx.seed,
        kernel_dim: kernel.len(),
        exact_vector,
        exact,
        search,
    };
    ctx.emit_json("kernel.json", &doc, || {
        let line = |label: &str, r: &Option<ProductVectorResult>| {
            r.as_ref().map_or(String::new(), |r| {
                format!(
                    "{label}: {} (residual {}{})\n",
                    if r.found { "product vector found" } else { "not found" },
                    sig17(r.residual),
                    r.min_objective.map_or(String::new(), |m| format!(", min objective {}", sig17(m)))
                )
            })
        };
        format!(
            "kernel dimension {}\n{}{}",
            doc.kernel_dim,
            line("exact", &doc.exact),
            line("search", &doc.search)
        )
    })?;
    Ok(if found { 0 } else { EXIT_NOT_FOUND })
}

#[derive(Serialize)]
struct GridDoc<'a> {
    command: &'static str,
    seed: u64,
    #[serde(flatten)]
    summary: qdistill::minors::ScanSummary<'a>,
}

fn cmd_grid(ctx: &Ctx, a: GridArgs) -> CliResult {
    let spec = MinorScanSpec {
        which: a.which,
        source: match a.source {
            SourceArg::Direct => ValueSource::Direct,
            SourceArg::ClosedForm => ValueSource::ClosedForm,
        },
        re_b: AxisRange::new(a.re_min, a.re_max, a.step),
        im_b: AxisRange::new(a.im_min, a.im_max, a.step),
        c: CGrid::List(parse_complex_list(&a.c).map_err(CliError::Usage)?),
        scale: a.scale.unwrap_or(a.which.default_scale()),
        x: a.x,
    };
    spec.validate()?;
    let scan = minor_scan(&spec)?;
    let csv = scan.to_csv();
    let name = format!("grid_{}", a.which.label());
    ctx.write_file(&format!("{name}.csv"), &csv)?;
    if ctx.out.is_none() && !ctx.json {
        print!("{csv}");
        return Ok(0);
    }
    let doc = GridDoc {
        command: "grid",
        seed: ctx.seed,
        summary: scan.summary(),
    };
    ctx.emit_json(&format!("{name}.json"), &doc, || {
        format!(
            "{}: {} points, min {} at b = {}{:+}i, c = {}{:+}i\n",
            a.which.label(),
            scan.samples.len(),
            sig17(scan.min_value),
            scan.argmin.b.re,
            scan.argmin.b.im,
            scan.argmin.c.re,
            scan.argmin.c.im
        )
    })?;
    Ok(0)
}


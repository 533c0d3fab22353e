//! `ffec`: analyze elliptic curves over F_q(t) and verify regulator,
//! height, and rank bounds.
//!
//! Exit codes: 0 every checked inequality holds, 1 input or runtime error,
//! 2 at least one violation, 3 isotrivial curve rejected.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_rational::BigRational;

use ffec_core::bigfloat::{parse_decimal, sci_of_rational};
use ffec_core::bounds::{check_friedman, parse_number_fields};
use ffec_core::pipeline::{
    analyze, analyze_corpus, bundled_corpus, heights_report, lfunc_report, parse_corpus_json,
    parse_curve_json, report_json, AnalysisReport, AnalyzeOptions, BatchOptions, BatchReport,
    HeightsReport, LfuncReport,
};
use ffec_core::{bundled_number_fields, Error, DEFAULT_PRECISION_BITS};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_ISOTRIVIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ffec",
    about = "Bound verification for elliptic curves over rational function fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full single-curve report: invariants, points, lattice, L-function, bounds.
    Analyze(AnalyzeArgs),
    /// Run a whole curve corpus with per-curve isolation and aggregates.
    Batch(BatchArgs),
    /// Number-field regulator floors from a signature table.
    Friedman(FriedmanArgs),
    /// L-polynomial, analytic rank, and explicit-formula audit only.
    Lfunc(LfuncArgs),
    /// Canonical heights of searched points only.
    Heights(HeightsArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("curve_src").required(true).args(["curve", "curve_file"])))]
struct CurveInput {
    /// Inline curve JSON, e.g. '{"q":5,"A":"t","B":"1"}' or '{"q":5,"a":["0","-t-1","0","t","0"]}'.
    #[arg(long)]
    curve: Option<String>,
    /// Path to a file holding one curve JSON document.
    #[arg(long)]
    curve_file: Option<PathBuf>,
    /// Override the report label.
    #[arg(long)]
    label: Option<String>,
}

impl CurveInput {
    fn load(&self) -> Result<(String, ffec_core::WeierstrassModel), Error> {
        let text = match (&self.curve, &self.curve_file) {
            (Some(t), None) => t.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| Error::ingestion(format!("{}: {e}", path.display())))?,
            _ => unreachable!("clap group enforces exactly one source"),
        };
        let (label, model) = parse_curve_json(&text)?;
        Ok((self.label.clone().unwrap_or(label), model))
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Emit the full JSON report (the default).
    #[arg(long, conflicts_with = "markdown")]
    json: bool,
    /// Emit a compact markdown summary with one verdict line per inequality.
    #[arg(long)]
    markdown: bool,
}

#[derive(Args)]
struct TuningArgs {
    /// Naive-height cap for the point search.
    #[arg(long, default_value_t = 2)]
    search_bound: u64,
    /// Canonical-height tolerance, decimal text such as 1e-8.
    #[arg(long, default_value = "1e-8")]
    tol: String,
    /// Skip the L-function stage and the checks that need it.
    #[arg(long)]
    no_lfunc: bool,
    /// Interval working precision in bits (env FFEC_PRECISION_BITS overrides
    /// the built-in default; this flag overrides both).
    #[arg(long)]
    precision_bits: Option<u32>,
}

impl TuningArgs {
    fn to_options(&self) -> Result<AnalyzeOptions, Error> {
        Ok(AnalyzeOptions {
            search_bound: self.search_bound,
            tol: parse_tol(&self.tol)?,
            run_lfunction: !self.no_lfunc,
            precision_bits: resolve_precision(self.precision_bits)?,
            ..AnalyzeOptions::default()
        })
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    curve: CurveInput,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Corpus file (JSON array of curve specs); the bundled corpus when absent.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Worker threads for the batch (defaults to the rayon heuristic).
    #[arg(long)]
    jobs: Option<usize>,
    /// Positive-rank separable curves with regulator below this threshold
    /// are listed in the aggregates.
    #[arg(long, default_value = "1")]
    threshold: String,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FriedmanArgs {
    /// Number-field table (CSV: label,d,r1,r2,regulator,w); bundled table when absent.
    #[arg(long)]
    fields: Option<PathBuf>,
    /// Interval working precision in bits.
    #[arg(long)]
    precision_bits: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct LfuncArgs {
    #[command(flatten)]
    curve: CurveInput,
    /// Explicit-formula audit sweeps Y = 1..=this.
    #[arg(long, default_value_t = 10)]
    audit_y_max: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HeightsArgs {
    #[command(flatten)]
    curve: CurveInput,
    /// Naive-height cap for the point search.
    #[arg(long, default_value_t = 2)]
    search_bound: u64,
    /// Canonical-height tolerance, decimal text such as 1e-8.
    #[arg(long, default_value = "1e-8")]
    tol: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_tol(text: &str) -> Result<BigRational, Error> {
    let tol = parse_decimal(text)?;
    if tol <= BigRational::from_integer(0.into()) {
        return Err(Error::ingestion("tolerance must be positive"));
    }
    Ok(tol)
}

fn resolve_precision(flag: Option<u32>) -> Result<u32, Error> {
    if let Some(bits) = flag {
        return Ok(bits);
    }
    match std::env::var("FFEC_PRECISION_BITS") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::ingestion(format!("FFEC_PRECISION_BITS={text} is not a bit count"))),
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
    }
}

/// Render a rational string ("num/den" or integer) in scientific notation.
fn sci(text: &str, digits: usize) -> String {
    BigRational::from_str(text)
        .map(|r| sci_of_rational(&r, digits))
        .unwrap_or_else(|_| text.to_string())
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "HOLDS"
    } else {
        "VIOLATED"
    }
}

fn analysis_markdown(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("# {}", report.label));
    push(
        &mut out,
        format!(
            "- curve over F_{}(t): y^2 = x^3 + ({})x + ({})",
            report.curve.q, report.curve.a, report.curve.b
        ),
    );
    push(
        &mut out,
        format!(
            "- conductor degree {}, disc height {}, inseparability {}",
            report.invariants.conductor_degree,
            report.invariants.disc_height,
            report.invariants.inseparability
        ),
    );
    for place in &report.invariants.bad_places {
        push(
            &mut out,
            format!(
                "- bad place {} (deg {}): type {}, f_v = {}, ord(Delta) = {}",
                place.place, place.degree, place.kodaira, place.conductor_exponent, place.ord_delta
            ),
        );
    }
    push(
        &mut out,
        format!(
            "- points: {} found at bound {}, {} torsion, {} free; lattice rank {}",
            report.points.found,
            report.points.search_bound,
            report.points.torsion,
            report.points.non_torsion,
            report.lattice.rank
        ),
    );
    if report.lattice.rank > 0 {
        push(
            &mut out,
            format!(
                "- regulator {} ({})",
                report.lattice.regulator.value, report.lattice.regulator.decimal
            ),
        );
    }
    if let Some(l) = &report.l_function {
        push(
            &mut out,
            format!(
                "- L(T) coefficients [{}], analytic rank {}, rank consistent: {}",
                l.coeffs.join(", "),
                l.analytic_rank,
                l.rank_consistent
            ),
        );
        push(
            &mut out,
            format!(
                "- inverse-root deviation {:.3e} (tol {:.0e}), pairing deviation {:.3e} (tol {:.0e})",
                l.rh_max_dev,
                report.constants.rh_tol,
                l.fe_max_dev,
                report.constants.rh_tol
            ),
        );
        push(
            &mut out,
            format!(
                "- explicit-formula audit: worst gap {:.3e} over Y <= {}, gap {:.3e} at Y = {} (tol {:.0e})",
                l.audit_max_gap, l.audit_y_max, l.audit.gap, l.audit.y, report.constants.audit_tol
            ),
        );
    }
    let rb = &report.bounds.regulator_bound;
    push(
        &mut out,
        format!(
            "- regulator-lower-bound ({}): {} >= {} -> {} (margin {:.3e})",
            rb.branch,
            rb.lhs,
            rb.rhs,
            verdict(rb.holds),
            rb.margin
        ),
    );
    for floor in &report.bounds.height_floors {
        push(
            &mut out,
            format!(
                "- height-floor x = {}: {} >= {} -> {} (margin {:.3e})",
                floor.x,
                floor.canonical_height,
                floor.floor,
                verdict(floor.holds),
                floor.margin
            ),
        );
    }
    if let Some(ceiling) = &report.bounds.rank_ceiling {
        let cap = ceiling
            .conductor_form
            .clone()
            .or_else(|| ceiling.small_conductor_bound.map(|b| b.to_string()))
            .unwrap_or_default();
        push(
            &mut out,
            format!(
                "- analytic-rank-ceiling ({}): {} <= {} -> {}",
                ceiling.branch,
                ceiling.analytic_rank,
                cap,
                verdict(ceiling.holds)
            ),
        );
    }
    if let Some(mk) = &report.lattice.minkowski {
        push(
            &mut out,
            format!(
                "- minkowski-product: {} <= {} -> {}",
                sci(&mk.lhs_squared, 12),
                sci(&mk.rhs_squared, 12),
                verdict(mk.holds)
            ),
        );
    }
    push(&mut out, format!("- status: {}", report.status));
    out
}

fn batch_markdown(report: &BatchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# corpus report ({} curves)\n", report.curves));
    for entry in &report.entries {
        match (&entry.report, &entry.error) {
            (Some(rep), _) => {
                let r_an = rep
                    .l_function
                    .as_ref()
                    .map(|l| l.analytic_rank.to_string())
                    .unwrap_or_else(|| "-".to_string());
                out.push_str(&format!(
                    "- {}: {} (rank {}, analytic rank {}, conductor degree {})\n",
                    entry.label,
                    entry.outcome,
                    rep.lattice.rank,
                    r_an,
                    rep.invariants.conductor_degree
                ));
            }
            (None, Some(err)) => {
                out.push_str(&format!("- {}: ERROR ({err})\n", entry.label));
            }
            (None, None) => out.push_str(&format!("- {}: ERROR\n", entry.label)),
        }
    }
    out.push_str(&format!(
        "- status: {}; violations {}; errors {}\n",
        report.status, report.violations, report.errors
    ));
    let agg = &report.aggregates;
    if let Some(m) = &agg.max_rank {
        out.push_str(&format!("- max rank: {} ({})\n", m.value, m.label));
    }
    if let Some(m) = &agg.min_positive_rank_regulator {
        out.push_str(&format!(
            "- min positive-rank regulator: {} ({})\n",
            sci(&m.value, 12),
            m.label
        ));
    }
    if let Some(m) = &agg.min_regulator_bound_margin {
        out.push_str(&format!(
            "- min regulator-bound margin: {:.3e} ({})\n",
            m.margin, m.label
        ));
    }
    if let Some(m) = &agg.min_height_floor_margin {
        out.push_str(&format!(
            "- min height-floor margin: {:.3e} ({})\n",
            m.margin, m.label
        ));
    }
    if agg.low_regulator_curves.is_empty() {
        out.push_str(&format!(
            "- no positive-rank separable curve has regulator below {}\n",
            agg.regulator_threshold
        ));
    } else {
        let listed: Vec<String> = agg
            .low_regulator_curves
            .iter()
            .map(|c| format!("{} (rank {}, regulator {})", c.label, c.rank, c.regulator))
            .collect();
        out.push_str(&format!(
            "- regulator below {}: {}\n",
            agg.regulator_threshold,
            listed.join("; ")
        ));
    }
    out
}

fn lfunc_markdown(report: &LfuncReport) -> String {
    let l = &report.l_function;
    let mut out = format!("# {}\n", report.label);
    out.push_str(&format!(
        "- conductor degree {}, L-degree {}\n",
        report.invariants.conductor_degree, l.degree
    ));
    out.push_str(&format!(
        "- L(T) coefficients [{}], analytic rank {}\n",
        l.coeffs.join(", "),
        l.analytic_rank
    ));
    out.push_str(&format!(
        "- zero angles (radians): [{}]\n",
        l.zero_angles
            .iter()
            .map(|a| format!("{a:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.push_str(&format!(
        "- inverse-root deviation {:.3e}, pairing deviation {:.3e}\n",
        l.rh_max_dev, l.fe_max_dev
    ));
    out.push_str(&format!(
        "- audit gap {:.3e} at Y = {} (kernel length floor {}), worst {:.3e} over Y <= {}\n",
        l.audit.gap, l.audit.y, l.brumer_y, l.audit_max_gap, l.audit_y_max
    ));
    out
}

fn heights_markdown(report: &HeightsReport) -> String {
    let mut out = format!("# {}\n", report.label);
    out.push_str(&format!(
        "- search bound {}, duplication bound {}, grid denominator {}\n",
        report.search_bound, report.duplication_bound, report.grid_denominator
    ));
    for p in &report.points {
        match p.torsion_order {
            Some(order) => out.push_str(&format!(
                "- ({}, {}): torsion of order {}, canonical height 0\n",
                p.x, p.y, order
            )),
            None => out.push_str(&format!(
                "- ({}, {}): free, canonical height {} ({})\n",
                p.x, p.y, p.canonical_height, p.canonical_height_decimal
            )),
        }
    }
    out
}

fn friedman_markdown(reports: &[ffec_core::FriedmanReport]) -> String {
    let mut out = format!("# unit regulator floors ({} fields)\n", reports.len());
    let mut min_margin = f64::INFINITY;
    let mut min_label = String::new();
    for rep in reports {
        let quotient = &rep.quotient;
        let plain = &rep.plain;
        out.push_str(&format!(
            "- {}: R/w {} >= {} {} | R {} >= {} {}\n",
            rep.label,
            sci_of_rational(quotient.lhs.lo(), 6),
            sci_of_rational(quotient.rhs.hi(), 6),
            verdict(quotient.holds),
            sci_of_rational(plain.lhs.lo(), 6),
            sci_of_rational(plain.rhs.hi(), 6),
            verdict(plain.holds),
        ));
        for margin in [quotient.margin, plain.margin] {
            if margin < min_margin {
                min_margin = margin;
                min_label = rep.label.clone();
            }
        }
    }
    let all_hold = reports.iter().all(|r| r.holds());
    out.push_str(&format!(
        "- minimum margin: {min_margin:.4e} ({min_label})\n- all rows hold: {all_hold}\n"
    ));
    out
}

fn friedman_json(reports: &[ffec_core::FriedmanReport]) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = reports
        .iter()
        .map(|rep| {
            serde_json::json!({
                "label": rep.label,
                "unit_rank": rep.unit_rank,
                "dirichlet_ok": rep.dirichlet_ok,
                "quotient": {
                    "branch": rep.quotient.branch,
                    "lhs": sci_of_rational(rep.quotient.lhs.lo(), 12),
                    "rhs": sci_of_rational(rep.quotient.rhs.hi(), 12),
                    "holds": rep.quotient.holds,
                    "margin": rep.quotient.margin,
                },
                "plain": {
                    "branch": rep.plain.branch,
                    "lhs": sci_of_rational(rep.plain.lhs.lo(), 12),
                    "rhs": sci_of_rational(rep.plain.rhs.hi(), 12),
                    "holds": rep.plain.holds,
                    "margin": rep.plain.margin,
                },
                "holds": rep.holds(),
            })
        })
        .collect();
    let all_hold = reports.iter().all(|r| r.holds());
    serde_json::json!({
        "status": if all_hold { "OK" } else { "VIOLATION" },
        "fields": reports.len(),
        "rows": rows,
    })
}

fn run() -> Result<u8, Error> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(EXIT_OK);
            }
            eprint!("{e}");
            return Ok(EXIT_ERROR);
        }
    };
    match cli.command {
        Command::Analyze(args) => {
            let (label, model) = args.curve.load()?;
            let opts = args.tuning.to_options()?;
            let report = analyze(&label, &model, &opts)?;
            if args.output.markdown {
                print!("{}", analysis_markdown(&report));
            } else {
                println!("{}", report_json(&report)?);
            }
            Ok(if report.status == "OK" {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Batch(args) => {
            if let Some(jobs) = args.jobs {
                // ignore failure: the global pool can only be set once
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global();
            }
            let text = match &args.corpus {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| Error::ingestion(format!("{}: {e}", path.display())))?,
                None => bundled_corpus().to_string(),
            };
            let entries = parse_corpus_json(&text)?;
            let opts = BatchOptions {
                analyze: args.tuning.to_options()?,
                regulator_threshold: parse_tol(&args.threshold)?,
            };
            let report = analyze_corpus(entries, &opts);
            if args.output.markdown {
                print!("{}", batch_markdown(&report));
            } else {
                println!("{}", report_json(&report)?);
            }
            Ok(match report.status.as_str() {
                "OK" => EXIT_OK,
                "ERROR" => EXIT_ERROR,
                _ => EXIT_VIOLATION,
            })
        }
        Command::Friedman(args) => {
            let text = match &args.fields {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| Error::ingestion(format!("{}: {e}", path.display())))?,
                None => bundled_number_fields().to_string(),
            };
            let rows = parse_number_fields(&text)?;
            let prec = resolve_precision(args.precision_bits)?;
            let mut reports = Vec::with_capacity(rows.len());
            for row in &rows {
                reports.push(check_friedman(row, prec)?);
            }
            if args.output.markdown {
                print!("{}", friedman_markdown(&reports));
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&friedman_json(&reports))
                        .map_err(|e| Error::internal(e.to_string()))?
                );
            }
            Ok(if reports.iter().all(|r| r.holds()) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Lfunc(args) => {
            let (label, model) = args.curve.load()?;
            let report = lfunc_report(&label, &model, args.audit_y_max)?;
            if args.output.markdown {
                print!("{}", lfunc_markdown(&report));
            } else {
                println!("{}", report_json(&report)?);
            }
            let l = &report.l_function;
            let clean = l.rh_max_dev <= report_tols().0
                && l.fe_max_dev <= report_tols().0
                && l.audit_max_gap <= report_tols().1;
            Ok(if clean { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Heights(args) => {
            let (label, model) = args.curve.load()?;
            let report = heights_report(&label, &model, args.search_bound, &parse_tol(&args.tol)?)?;
            if args.output.markdown {
                print!("{}", heights_markdown(&report));
            } else {
                println!("{}", report_json(&report)?);
            }
            Ok(EXIT_OK)
        }
    }
}

fn report_tols() -> (f64, f64) {
    (ffec_core::RH_TOL, ffec_core::AUDIT_TOL)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(Error::Isotrivial(msg)) => {
            eprintln!("isotrivial curve rejected: {msg}");
            ExitCode::from(EXIT_ISOTRIVIAL)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

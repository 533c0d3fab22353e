//! One-call analysis: invariants, point search, lattice, L-function, and
//! bound verification assembled into serializable reports.
//!
//! Reports are deterministic: identical inputs and options produce identical
//! JSON except for the `meta` block (wall-clock timestamp and stage timings),
//! which callers comparing outputs should strip.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigfloat::{decimal_of_rational, sci_of_rational};
use crate::bounds::{
    check_height_floor, check_rank_ceiling, check_regulator_bound, regulator_constant,
    BoundContext, IneqReport, RankCeilingReport, DEFAULT_PRECISION_BITS,
};
use crate::curve::{CurveInvariants, WeierstrassModel};
use crate::error::{Error, Result};
use crate::funcfield::parse_ratfunc;
use crate::gf::FieldSpec;
use crate::lattice::{
    build_lattice, independent_subset, minkowski_check, successive_minima, MordellWeilLattice,
    RANK_CAP,
};
use crate::lfunction::{brumer_y, explicit_formula_audit, l_polynomial, AUDIT_TOL, RH_TOL};
use crate::points::{search_points, torsion_order, CurvePoint, HeightEngine};

/// Options for a single-curve analysis.
#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Naive-height cap for the point search.
    pub search_bound: u64,
    /// Canonical-height tolerance (the heights come out exact anyway; this
    /// caps the telescoping work).
    pub tol: BigRational,
    /// Skip the L-function stage (and the rank checks that need it) when false.
    pub run_lfunction: bool,
    /// Working precision for the interval bound evaluations.
    pub precision_bits: u32,
    /// The explicit-formula audit sweeps Y = 1..=audit_y_max.
    pub audit_y_max: u32,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            search_bound: 2,
            tol: BigRational::new(BigInt::one(), BigInt::from(100_000_000u64)),
            run_lfunction: true,
            precision_bits: DEFAULT_PRECISION_BITS,
            audit_y_max: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveEcho {
    pub q: u64,
    /// Short-form coefficients (a-invariant input is normalized first).
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceEcho {
    pub place: String,
    pub degree: i64,
    pub kodaira: String,
    pub conductor_exponent: u32,
    pub ord_delta: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantsEcho {
    pub deg_delta: i64,
    /// deg(minimal discriminant)/12 as an exact rational.
    pub disc_height: String,
    pub conductor_degree: i64,
    pub inseparability: u32,
    pub isotrivial: bool,
    pub bad_places: Vec<PlaceEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEcho {
    pub x: String,
    pub y: String,
    pub canonical_height: String,
    pub canonical_height_decimal: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointsEcho {
    pub search_bound: u64,
    /// Points found by the sweep (both signs counted once by x).
    pub found: usize,
    pub torsion: usize,
    pub non_torsion: usize,
    pub generators: Vec<GeneratorEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegulatorEcho {
    pub value: String,
    /// Always "0": the Gram entries are exact.
    pub err: String,
    pub decimal: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiEcho {
    pub lhs_squared: String,
    pub rhs_squared: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeEcho {
    pub rank: usize,
    pub gram: Vec<Vec<String>>,
    pub regulator: RegulatorEcho,
    pub lambda_squares: Vec<String>,
    pub minkowski: Option<MinkowskiEcho>,
    pub sublattice_caveat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEcho {
    pub y: u32,
    pub zero_side: f64,
    pub coeff_side: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LFunctionEcho {
    pub degree: usize,
    pub coeffs: Vec<String>,
    pub analytic_rank: usize,
    pub zero_angles: Vec<f64>,
    pub rh_max_dev: f64,
    pub fe_max_dev: f64,
    /// Certified lattice rank does not exceed the analytic rank.
    pub rank_consistent: bool,
    /// Audit at the conductor-driven kernel length.
    pub audit: AuditEcho,
    /// Worst audit gap over Y = 1..=audit_y_max.
    pub audit_max_gap: f64,
    pub audit_y_max: u32,
    pub brumer_y: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct IneqEcho {
    pub branch: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    pub margin: f64,
}

fn ineq_echo(rep: &IneqReport) -> IneqEcho {
    IneqEcho {
        branch: rep.branch.clone(),
        lhs: sci_of_rational(rep.lhs.lo(), 12),
        rhs: sci_of_rational(rep.rhs.hi(), 12),
        holds: rep.holds,
        margin: rep.margin,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightFloorEcho {
    pub x: String,
    pub canonical_height: String,
    pub floor: String,
    pub holds: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankCeilingEcho {
    pub branch: String,
    pub conductor_form: Option<String>,
    pub discriminant_form: Option<String>,
    pub small_conductor_bound: Option<i64>,
    pub analytic_rank: usize,
    pub holds: bool,
}

fn ceiling_echo(rep: &RankCeilingReport) -> RankCeilingEcho {
    RankCeilingEcho {
        branch: rep.branch.clone(),
        conductor_form: rep
            .conductor_form
            .as_ref()
            .map(|iv| sci_of_rational(iv.lo(), 12)),
        discriminant_form: rep
            .discriminant_form
            .as_ref()
            .map(|iv| sci_of_rational(iv.lo(), 12)),
        small_conductor_bound: rep.small_conductor_bound,
        analytic_rank: rep.analytic_rank,
        holds: rep.holds,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsEcho {
    pub regulator_bound: IneqEcho,
    pub height_floors: Vec<HeightFloorEcho>,
    pub rank_ceiling: Option<RankCeilingEcho>,
}

/// Exact formula constants embedded so third parties can recompute.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsEcho {
    pub regulator_constant: String,
    pub precision_bits: u32,
    pub tolerance: String,
    pub search_bound: u64,
    pub audit_tol: f64,
    pub rh_tol: f64,
}

/// Volatile fields, excluded from byte-stability comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct MetaEcho {
    pub timestamp_unix_ms: u128,
    pub stage_ms: BTreeMap<String, u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    /// "OK" when every checked inequality holds, else "VIOLATION".
    pub status: String,
    pub label: String,
    pub failed_checks: Vec<String>,
    pub curve: CurveEcho,
    pub invariants: InvariantsEcho,
    pub points: PointsEcho,
    pub lattice: LatticeEcho,
    pub l_function: Option<LFunctionEcho>,
    pub bounds: BoundsEcho,
    pub constants: ConstantsEcho,
    pub meta: MetaEcho,
}

fn rational_str(r: &BigRational) -> String {
    r.to_string()
}

fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn invariants_echo(inv: &CurveInvariants) -> InvariantsEcho {
    InvariantsEcho {
        deg_delta: inv.deg_delta,
        disc_height: rational_str(&inv.h_e),
        conductor_degree: inv.n_e,
        inseparability: inv.inseparability,
        isotrivial: inv.isotrivial,
        bad_places: inv
            .locals
            .iter()
            .map(|rd| PlaceEcho {
                place: rd.place.to_string(),
                degree: rd.place.degree() as i64,
                kodaira: rd.kodaira.to_string(),
                conductor_exponent: rd.f_v,
                ord_delta: rd.ord_delta,
            })
            .collect(),
    }
}

/// Representative points found by the sweep: one per x-coordinate (P and -P
/// carry the same height), split into torsion and free parts.
struct SearchSummary {
    found: usize,
    torsion: Vec<CurvePoint>,
    free: Vec<CurvePoint>,
}

fn classify_search(model: &WeierstrassModel, bound: u64) -> Result<SearchSummary> {
    let all = search_points(model, bound)?;
    let mut by_x: BTreeMap<String, CurvePoint> = BTreeMap::new();
    for p in all {
        if p.is_infinity() {
            continue;
        }
        let key = p
            .x()
            .map(|x| x.to_string())
            .unwrap_or_else(|| "infinity".to_string());
        by_x.entry(key).or_insert(p);
    }
    let mut torsion = vec![];
    let mut free = vec![];
    for p in by_x.into_values() {
        match torsion_order(&p)? {
            Some(_) => torsion.push(p),
            None => free.push(p),
        }
    }
    Ok(SearchSummary {
        found: torsion.len() + free.len(),
        torsion,
        free,
    })
}

fn lattice_echo(lattice: &MordellWeilLattice) -> Result<LatticeEcho> {
    let gram = lattice
        .gram()
        .iter()
        .map(|row| row.iter().map(rational_str).collect())
        .collect();
    let minima = successive_minima(lattice, RANK_CAP)?;
    let minkowski = if lattice.rank() >= 1 {
        let mk = minkowski_check(lattice)?;
        Some(MinkowskiEcho {
            lhs_squared: rational_str(&mk.lhs_squared),
            rhs_squared: rational_str(&mk.rhs_squared),
            holds: mk.holds,
        })
    } else {
        None
    };
    Ok(LatticeEcho {
        rank: lattice.rank(),
        gram,
        regulator: RegulatorEcho {
            value: rational_str(lattice.regulator()),
            err: "0".to_string(),
            decimal: decimal_of_rational(lattice.regulator(), 30),
        },
        lambda_squares: minima.lambda_squares.iter().map(rational_str).collect(),
        minkowski,
        sublattice_caveat: lattice.sublattice_caveat(),
    })
}

/// Full single-curve analysis. Isotrivial curves are rejected with a
/// dedicated error so callers can map them to their own exit path.
pub fn analyze(label: &str, model: &WeierstrassModel, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let mut stage_ms = BTreeMap::new();
    let started = now_ms();

    let t = Instant::now();
    let inv = model.global_invariants()?;
    if inv.isotrivial {
        return Err(Error::isotrivial(
            "constant j-invariant: the curve comes from the constant field and the bounds do not apply",
        ));
    }
    stage_ms.insert("invariants".to_string(), t.elapsed().as_millis());

    let q = u64::try_from(model.spec().q())
        .map_err(|_| Error::resource("field size exceeds the supported range"))?;
    let p = model.spec().p();

    let t = Instant::now();
    let summary = classify_search(model, opts.search_bound)?;
    let engine = HeightEngine::new(model)?;
    let generators = independent_subset(&engine, &summary.free, &opts.tol)?;
    stage_ms.insert("points".to_string(), t.elapsed().as_millis());

    let t = Instant::now();
    let lattice = build_lattice(&engine, generators, &opts.tol)?;
    let lattice_report = lattice_echo(&lattice)?;
    stage_ms.insert("lattice".to_string(), t.elapsed().as_millis());

    let mut failed: Vec<String> = vec![];

    let t = Instant::now();
    let l_report = if opts.run_lfunction {
        let lp = l_polynomial(model, &inv)?;
        let rank_consistent = lattice.rank() <= lp.r_an;
        let y_star = brumer_y(inv.n_e, q)?;
        let star = explicit_formula_audit(&lp, y_star)?;
        let mut max_gap: f64 = 0.0;
        for y in 1..=opts.audit_y_max {
            let audit = explicit_formula_audit(&lp, y)?;
            max_gap = max_gap.max(audit.gap);
        }
        if !rank_consistent {
            failed.push("lattice-rank-below-analytic-rank".to_string());
        }
        if lp.rh_max_dev > RH_TOL {
            failed.push("inverse-roots-on-circle".to_string());
        }
        if lp.fe_max_dev > RH_TOL {
            failed.push("functional-equation-pairing".to_string());
        }
        if max_gap > AUDIT_TOL || star.gap > AUDIT_TOL {
            failed.push("explicit-formula-audit".to_string());
        }
        Some(LFunctionEcho {
            degree: lp.n,
            coeffs: lp.coeffs.iter().map(|c| c.to_string()).collect(),
            analytic_rank: lp.r_an,
            zero_angles: lp.zero_angles.clone(),
            rh_max_dev: lp.rh_max_dev,
            fe_max_dev: lp.fe_max_dev,
            rank_consistent,
            audit: AuditEcho {
                y: star.y,
                zero_side: star.zero_side,
                coeff_side: star.coeff_side,
                gap: star.gap,
            },
            audit_max_gap: max_gap,
            audit_y_max: opts.audit_y_max,
            brumer_y: y_star,
        })
    } else {
        None
    };
    stage_ms.insert("l_function".to_string(), t.elapsed().as_millis());

    let t = Instant::now();
    // Without the L-stage the analytic rank is unknown; the certified rank
    // stands in (it only affects which ceiling checks run). If a bug ever
    // drove rank above r_an the max() keeps the context constructible and
    // the rank_consistent flag above still reports the violation.
    let r_an = l_report
        .as_ref()
        .map(|l| l.analytic_rank.max(lattice.rank()))
        .unwrap_or(lattice.rank());
    let ctx = BoundContext::new(
        q,
        p,
        0,
        inv.inseparability,
        inv.n_e,
        inv.h_e.clone(),
        lattice.rank(),
        r_an,
        lattice.regulator().clone(),
    )?;
    let reg_bound = check_regulator_bound(&ctx, opts.precision_bits)?;
    if !reg_bound.holds {
        failed.push("regulator-lower-bound".to_string());
    }
    let mut floors = vec![];
    for (i, point) in lattice.points().iter().enumerate() {
        let height = lattice.gram()[i][i].clone();
        let rep = check_height_floor(&height, &ctx, opts.precision_bits)?;
        if !rep.holds {
            failed.push(format!("height-floor-generator-{i}"));
        }
        floors.push(HeightFloorEcho {
            x: point.x().map(|x| x.to_string()).unwrap_or_default(),
            canonical_height: sci_of_rational(&height, 12),
            floor: sci_of_rational(rep.rhs.hi(), 12),
            holds: rep.holds,
            margin: rep.margin,
        });
    }
    // free non-generator points also get the floor check
    for point in summary
        .free
        .iter()
        .filter(|p| !lattice.points().iter().any(|g| g == *p))
    {
        let height = engine.canonical_height(point, &opts.tol)?.value;
        let rep = check_height_floor(&height, &ctx, opts.precision_bits)?;
        if !rep.holds {
            failed.push("height-floor-searched-point".to_string());
        }
        floors.push(HeightFloorEcho {
            x: point.x().map(|x| x.to_string()).unwrap_or_default(),
            canonical_height: sci_of_rational(&height, 12),
            floor: sci_of_rational(rep.rhs.hi(), 12),
            holds: rep.holds,
            margin: rep.margin,
        });
    }
    let ceiling = if l_report.is_some() {
        let rep = check_rank_ceiling(&ctx, opts.precision_bits)?;
        if !rep.holds {
            failed.push("analytic-rank-ceiling".to_string());
        }
        Some(ceiling_echo(&rep))
    } else {
        None
    };
    if let Some(mk) = &lattice_report.minkowski {
        if !mk.holds {
            failed.push("minkowski-product".to_string());
        }
    }
    let c0 = regulator_constant(q, 0, p, ctx.insep, opts.precision_bits)?;
    let c0_mid = (c0.lo() + c0.hi()) / BigRational::from_integer(BigInt::from(2));
    stage_ms.insert("bounds".to_string(), t.elapsed().as_millis());

    let gen_echo = lattice
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| GeneratorEcho {
            x: p.x().map(|x| x.to_string()).unwrap_or_default(),
            y: p.y().map(|y| y.to_string()).unwrap_or_default(),
            canonical_height: rational_str(&lattice.gram()[i][i]),
            canonical_height_decimal: decimal_of_rational(&lattice.gram()[i][i], 30),
        })
        .collect();

    let status = if failed.is_empty() { "OK" } else { "VIOLATION" };
    Ok(AnalysisReport {
        status: status.to_string(),
        label: label.to_string(),
        failed_checks: failed,
        curve: CurveEcho {
            q,
            a: model.a().to_string(),
            b: model.b().to_string(),
        },
        invariants: invariants_echo(&inv),
        points: PointsEcho {
            search_bound: opts.search_bound,
            found: summary.found,
            torsion: summary.torsion.len(),
            non_torsion: summary.free.len(),
            generators: gen_echo,
        },
        lattice: lattice_report,
        l_function: l_report,
        bounds: BoundsEcho {
            regulator_bound: ineq_echo(&reg_bound),
            height_floors: floors,
            rank_ceiling: ceiling,
        },
        constants: ConstantsEcho {
            regulator_constant: sci_of_rational(&c0_mid, 50),
            precision_bits: opts.precision_bits,
            tolerance: sci_of_rational(&opts.tol, 5),
            search_bound: opts.search_bound,
            audit_tol: AUDIT_TOL,
            rh_tol: RH_TOL,
        },
        meta: MetaEcho {
            timestamp_unix_ms: started,
            stage_ms,
        },
    })
}

/// Pretty JSON for a serializable report.
pub fn report_json<T: Serialize>(report: &T) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| Error::internal(format!("report serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// curve specs and corpora

/// JSON curve description: either short-form coefficients A and B, or the
/// five a-invariants [a1, a2, a3, a4, a6] as polynomial/rational-function
/// text over F_q(t).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpecJson {
    #[serde(default)]
    pub label: Option<String>,
    pub q: u64,
    #[serde(default, rename = "A")]
    pub a_coeff: Option<String>,
    #[serde(default, rename = "B")]
    pub b_coeff: Option<String>,
    #[serde(default)]
    pub a: Option<Vec<String>>,
}

/// Build the coefficient field for an order coming from external input,
/// reclassifying rejection as an ingestion problem.
pub fn field_from_order(q: u64) -> Result<FieldSpec> {
    FieldSpec::from_order(u128::from(q)).map_err(|e| Error::ingestion(e.to_string()))
}

pub fn model_from_spec(spec: &CurveSpecJson) -> Result<WeierstrassModel> {
    let field = field_from_order(spec.q)?;
    match (&spec.a_coeff, &spec.b_coeff, &spec.a) {
        (Some(a), Some(b), None) => {
            WeierstrassModel::from_short(parse_ratfunc(&field, a)?, parse_ratfunc(&field, b)?)
        }
        (None, None, Some(list)) => {
            if list.len() != 5 {
                return Err(Error::ingestion(format!(
                    "a-invariant list must have 5 entries [a1, a2, a3, a4, a6], found {}",
                    list.len()
                )));
            }
            let mut coeffs = Vec::with_capacity(5);
            for s in list {
                coeffs.push(parse_ratfunc(&field, s)?);
            }
            let arr: [crate::funcfield::RatFunc; 5] = coeffs
                .try_into()
                .map_err(|_| Error::internal("arity checked above"))?;
            WeierstrassModel::from_a_invariants(&arr)
        }
        _ => Err(Error::ingestion(
            "curve spec needs either A and B or a 5-entry a-invariant list, not both",
        )),
    }
}

/// Parse a single curve-spec JSON document.
pub fn parse_curve_json(text: &str) -> Result<(String, WeierstrassModel)> {
    let spec: CurveSpecJson = serde_json::from_str(text)
        .map_err(|e| Error::ingestion(format!("bad curve spec: {e}")))?;
    let model = model_from_spec(&spec)?;
    Ok((spec.label.unwrap_or_else(|| "curve".to_string()), model))
}

/// One corpus row: construction errors are carried, not thrown, so a batch
/// can isolate bad rows.
pub struct CorpusEntry {
    pub label: String,
    pub model: Result<WeierstrassModel>,
}

/// Parse a corpus document (JSON array of curve specs). The outer document
/// must parse; per-entry problems are isolated into the entry results.
pub fn parse_corpus_json(text: &str) -> Result<Vec<CorpusEntry>> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(text)
        .map_err(|e| Error::ingestion(format!("bad corpus file: {e}")))?;
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(i, value)| {
            let parsed: std::result::Result<CurveSpecJson, _> = serde_json::from_value(value);
            match parsed {
                Ok(spec) => CorpusEntry {
                    label: spec
                        .label
                        .clone()
                        .unwrap_or_else(|| format!("curve-{}", i + 1)),
                    model: model_from_spec(&spec),
                },
                Err(e) => CorpusEntry {
                    label: format!("curve-{}", i + 1),
                    model: Err(Error::ingestion(format!("entry {}: {e}", i + 1))),
                },
            }
        })
        .collect())
}

/// The curves bundled with the crate (F_5 and F_7, ranks 0 through 2).
pub fn bundled_corpus() -> &'static str {
    include_str!("../data/corpus.json")
}

/// Options for a corpus run.
#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub analyze: AnalyzeOptions,
    /// Positive-rank separable curves with regulator strictly below this
    /// threshold are listed in the aggregates (a finiteness illustration:
    /// within any fixed corpus the list is exact and finite).
    pub regulator_threshold: BigRational,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            analyze: AnalyzeOptions::default(),
            regulator_threshold: BigRational::one(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchEntry {
    pub label: String,
    /// "OK" | "VIOLATION" | "ERROR".
    pub outcome: String,
    pub error: Option<String>,
    pub report: Option<AnalysisReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledCount {
    pub label: String,
    pub value: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledMargin {
    pub label: String,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowRegulatorEntry {
    pub label: String,
    pub rank: usize,
    pub regulator: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchAggregates {
    pub max_rank: Option<LabeledCount>,
    pub min_positive_rank_regulator: Option<LabeledValue>,
    pub min_regulator_bound_margin: Option<LabeledMargin>,
    pub min_height_floor_margin: Option<LabeledMargin>,
    pub regulator_threshold: String,
    /// Positive-rank curves with separable j-map and regulator below the
    /// threshold; exact within the corpus.
    pub low_regulator_curves: Vec<LowRegulatorEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    /// "OK" | "VIOLATION" (some curve violated a bound) | "ERROR" (some
    /// curve failed to run, none violated).
    pub status: String,
    pub curves: usize,
    pub violations: usize,
    pub errors: usize,
    pub entries: Vec<BatchEntry>,
    pub aggregates: BatchAggregates,
    pub meta: MetaEcho,
}

/// Run a whole corpus. Entries are processed in parallel but reported in
/// input order; per-curve failures are isolated into their entries.
pub fn analyze_corpus(entries: Vec<CorpusEntry>, opts: &BatchOptions) -> BatchReport {
    let started = now_ms();
    let t = Instant::now();
    let results: Vec<BatchEntry> = entries
        .into_par_iter()
        .map(|entry| match entry.model {
            Err(e) => BatchEntry {
                label: entry.label,
                outcome: "ERROR".to_string(),
                error: Some(e.to_string()),
                report: None,
            },
            Ok(model) => match analyze(&entry.label, &model, &opts.analyze) {
                Ok(report) => BatchEntry {
                    outcome: report.status.clone(),
                    label: entry.label,
                    error: None,
                    report: Some(report),
                },
                Err(e) => BatchEntry {
                    label: entry.label,
                    outcome: "ERROR".to_string(),
                    error: Some(e.to_string()),
                    report: None,
                },
            },
        })
        .collect();

    let violations = results.iter().filter(|e| e.outcome == "VIOLATION").count();
    let errors = results.iter().filter(|e| e.outcome == "ERROR").count();

    let mut max_rank: Option<LabeledCount> = None;
    let mut min_reg: Option<(BigRational, String)> = None;
    let mut min_reg_margin: Option<LabeledMargin> = None;
    let mut min_floor_margin: Option<LabeledMargin> = None;
    let mut low_reg = vec![];
    for entry in &results {
        let Some(report) = &entry.report else {
            continue;
        };
        let rank = report.lattice.rank;
        if max_rank.as_ref().map_or(true, |m| rank > m.value) {
            max_rank = Some(LabeledCount {
                label: entry.label.clone(),
                value: rank,
            });
        }
        let margin = report.bounds.regulator_bound.margin;
        if margin.is_finite()
            && min_reg_margin.as_ref().map_or(true, |m| margin < m.margin)
        {
            min_reg_margin = Some(LabeledMargin {
                label: entry.label.clone(),
                margin,
            });
        }
        for floor in &report.bounds.height_floors {
            if floor.margin.is_finite()
                && min_floor_margin
                    .as_ref()
                    .map_or(true, |m| floor.margin < m.margin)
            {
                min_floor_margin = Some(LabeledMargin {
                    label: entry.label.clone(),
                    margin: floor.margin,
                });
            }
        }
        if rank >= 1 {
            // the regulator string in the echo is exact "num/den" text
            let reg: BigRational = report
                .lattice
                .regulator
                .value
                .parse()
                .unwrap_or_else(|_| BigRational::one());
            if min_reg.as_ref().map_or(true, |(best, _)| reg < *best) {
                min_reg = Some((reg.clone(), entry.label.clone()));
            }
            if report.invariants.inseparability == 0 && reg < opts.regulator_threshold {
                low_reg.push(LowRegulatorEntry {
                    label: entry.label.clone(),
                    rank,
                    regulator: rational_str(&reg),
                });
            }
        }
    }

    let mut stage_ms = BTreeMap::new();
    stage_ms.insert("batch".to_string(), t.elapsed().as_millis());
    let status = if violations > 0 {
        "VIOLATION"
    } else if errors > 0 {
        "ERROR"
    } else {
        "OK"
    };
    BatchReport {
        status: status.to_string(),
        curves: results.len(),
        violations,
        errors,
        entries: results,
        aggregates: BatchAggregates {
            max_rank,
            min_positive_rank_regulator: min_reg.map(|(reg, label)| LabeledValue {
                label,
                value: rational_str(&reg),
            }),
            min_regulator_bound_margin: min_reg_margin,
            min_height_floor_margin: min_floor_margin,
            regulator_threshold: rational_str(&opts.regulator_threshold),
            low_regulator_curves: low_reg,
        },
        meta: MetaEcho {
            timestamp_unix_ms: started,
            stage_ms,
        },
    }
}

// ---------------------------------------------------------------------------
// lighter single-purpose reports for the focused subcommands

#[derive(Debug, Clone, Serialize)]
pub struct LfuncReport {
    pub label: String,
    pub invariants: InvariantsEcho,
    pub l_function: LFunctionEcho,
    pub meta: MetaEcho,
}

/// Invariants plus L-data, without point search or bound checks.
pub fn lfunc_report(label: &str, model: &WeierstrassModel, audit_y_max: u32) -> Result<LfuncReport> {
    let started = now_ms();
    let t = Instant::now();
    let inv = model.global_invariants()?;
    if inv.isotrivial {
        return Err(Error::isotrivial(
            "constant j-invariant: the curve comes from the constant field",
        ));
    }
    let q = u64::try_from(model.spec().q())
        .map_err(|_| Error::resource("field size exceeds the supported range"))?;
    let lp = l_polynomial(model, &inv)?;
    let y_star = brumer_y(inv.n_e, q)?;
    let star = explicit_formula_audit(&lp, y_star)?;
    let mut max_gap: f64 = 0.0;
    for y in 1..=audit_y_max {
        max_gap = max_gap.max(explicit_formula_audit(&lp, y)?.gap);
    }
    let mut stage_ms = BTreeMap::new();
    stage_ms.insert("l_function".to_string(), t.elapsed().as_millis());
    Ok(LfuncReport {
        label: label.to_string(),
        invariants: invariants_echo(&inv),
        l_function: LFunctionEcho {
            degree: lp.n,
            coeffs: lp.coeffs.iter().map(|c| c.to_string()).collect(),
            analytic_rank: lp.r_an,
            zero_angles: lp.zero_angles.clone(),
            rh_max_dev: lp.rh_max_dev,
            fe_max_dev: lp.fe_max_dev,
            rank_consistent: true,
            audit: AuditEcho {
                y: star.y,
                zero_side: star.zero_side,
                coeff_side: star.coeff_side,
                gap: star.gap,
            },
            audit_max_gap: max_gap,
            audit_y_max,
            brumer_y: y_star,
        },
        meta: MetaEcho {
            timestamp_unix_ms: started,
            stage_ms,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointHeightEcho {
    pub x: String,
    pub y: String,
    pub naive_height: u64,
    pub torsion_order: Option<u64>,
    pub canonical_height: String,
    pub canonical_height_decimal: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightsReport {
    pub label: String,
    pub search_bound: u64,
    pub duplication_bound: i64,
    pub grid_denominator: String,
    pub points: Vec<PointHeightEcho>,
    pub meta: MetaEcho,
}

/// Heights of every representative searched point (one per x).
pub fn heights_report(
    label: &str,
    model: &WeierstrassModel,
    search_bound: u64,
    tol: &BigRational,
) -> Result<HeightsReport> {
    let started = now_ms();
    let t = Instant::now();
    let inv = model.global_invariants()?;
    if inv.isotrivial {
        return Err(Error::isotrivial(
            "constant j-invariant: the curve comes from the constant field",
        ));
    }
    let engine = HeightEngine::new(model)?;
    let summary = classify_search(model, search_bound)?;
    let mut points = vec![];
    for p in summary.torsion.iter().chain(summary.free.iter()) {
        let order = torsion_order(p)?;
        let height = if order.is_some() {
            BigRational::from_integer(BigInt::from(0))
        } else {
            engine.canonical_height(p, tol)?.value
        };
        points.push(PointHeightEcho {
            x: p.x().map(|x| x.to_string()).unwrap_or_default(),
            y: p.y().map(|y| y.to_string()).unwrap_or_default(),
            naive_height: p.naive_height(),
            torsion_order: order,
            canonical_height: rational_str(&height),
            canonical_height_decimal: decimal_of_rational(&height, 30),
        });
    }
    let mut stage_ms = BTreeMap::new();
    stage_ms.insert("heights".to_string(), t.elapsed().as_millis());
    Ok(HeightsReport {
        label: label.to_string(),
        search_bound,
        duplication_bound: engine.duplication_bound(),
        grid_denominator: engine.grid_denominator().to_string(),
        points,
        meta: MetaEcho {
            timestamp_unix_ms: started,
            stage_ms,
        },
    })
}

//! Elliptic curves over rational function fields F_q(t).
//!
//! Module map:
//! - [`gf`]: finite fields F_{p^k}, p >= 5, canonical moduli and element codes.
//! - [`funcfield`]: polynomials and rational functions in t, places of P^1,
//!   valuations, heights, divisors, factorization.
//! - [`residue`]: residue fields at places as quotient rings, with log/exp
//!   tables for small orders.
//! - [`curve`]: Weierstrass models, minimal models place by place, reduction
//!   types, conductor and discriminant bookkeeping.
//! - [`points`]: the Mordell-Weil group law, point search, naive and canonical
//!   heights, height pairings.
//! - [`lattice`]: height lattices, regulators, shortest vectors, successive
//!   minima.
//! - [`lfunction`]: point counts over residue fields, the L-polynomial, its
//!   zeros, and the explicit-formula audit.
//! - [`bounds`]: certified interval arithmetic for the regulator and height
//!   lower bounds, plus number-field regulator comparisons.
//! - [`pipeline`]: one-call analysis assembling everything above into reports.
//! - [`bigfloat`]: directed-rounding interval scalars on dyadic rationals.

pub mod bigfloat;
pub mod bounds;
pub mod curve;
pub mod error;
pub mod funcfield;
pub mod gf;
pub mod lattice;
pub mod lfunction;
pub mod pipeline;
pub mod points;
pub mod residue;

pub use bounds::{
    beta_constant,
    brumer_bound_long, brumer_bound_long_f64, brumer_bound_weakeasy, brumer_bound_weakeasy_f64,
    bundled_number_fields, check_friedman, check_height_floor, check_rank_ceiling,
    check_regulator_bound, height_floor, parse_number_fields, regulator_constant, BoundContext,
    FriedmanReport, IneqReport, NumberFieldRecord, RankCeilingReport, DEFAULT_PRECISION_BITS,
};
pub use curve::{CurveInvariants, KodairaType, MultKind, ReductionData, WeierstrassModel};
pub use error::{Error, Result};
pub use funcfield::{Divisor, Place, Poly, RatFunc};
pub use lfunction::{
    analytic_rank, brumer_y, count_points, explicit_formula_audit, fejer_eval, frobenius_trace,
    l_polynomial, local_factors, zero_angles, AuditReport, LPolynomial, LocalFactor,
    ReductionKind, AUDIT_TOL, COUNT_CAP, EXHAUSTIVE_LIMIT, RH_TOL,
};
pub use lattice::{
    build_lattice, independent_subset, minima_of_gram, minkowski_check, successive_minima,
    MinimaProfile, MinkowskiReport, MordellWeilLattice, RANK_CAP,
};
pub use pipeline::{
    analyze, analyze_corpus, bundled_corpus, field_from_order, heights_report, lfunc_report,
    model_from_spec, parse_corpus_json, parse_curve_json, report_json, AnalysisReport,
    AnalyzeOptions, BatchOptions, BatchReport, CorpusEntry, CurveSpecJson,
};
pub use points::{search_points, torsion_order, CanonicalHeightValue, CurvePoint, HeightEngine};
pub use gf::{FieldElement, FieldSpec};

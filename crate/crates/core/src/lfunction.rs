//! The L-function of a nonconstant elliptic curve over F_q(t): local factors
//! from point counts over residue fields, the global polynomial via truncated
//! Euler-product expansion, analytic rank, zero angles on the circle
//! |T| = 1/q, and the Fejer-kernel explicit-formula audit.
//!
//! The polynomial has degree N = n_E - 4 (genus-zero base), so the product
//! over places of degree <= N determines it; we expand over places of degree
//! <= N + 3 and assert the extra coefficients vanish, which catches wrong
//! local data loudly instead of truncating it away.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::curve::{CurveInvariants, KodairaType, MultKind, WeierstrassModel};
use crate::error::{Error, Result};
use crate::funcfield::{monic_irreducibles, Place};
use crate::residue::ResidueField;

/// Largest residue field the counting layer accepts (5^8).
pub const COUNT_CAP: u64 = 390_625;
/// Exhaustive character-sum counting up to this order; baby-step giant-step
/// above it.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;
/// Sample points tried for order determination before the exhaustive
/// fallback.
const BSGS_SAMPLES: usize = 64;
/// Explicit-formula audit gap requirement.
pub const AUDIT_TOL: f64 = 1e-6;
/// Inverse-root modulus and functional-equation pairing requirement,
/// relative to q.
pub const RH_TOL: f64 = 1e-9;

/// Reduction behaviour at one place, as it enters the Euler product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    Good,
    SplitMult,
    NonSplitMult,
    Additive,
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReductionKind::Good => "good",
            ReductionKind::SplitMult => "split-mult",
            ReductionKind::NonSplitMult => "nonsplit-mult",
            ReductionKind::Additive => "additive",
        };
        f.write_str(s)
    }
}

/// One Euler factor: (1 - a_v T^d + q^d T^{2d})^{-1} at good places,
/// (1 - a_v T^d)^{-1} with a_v = +/-1 at multiplicative places, 1 at
/// additive places.
#[derive(Clone, Debug)]
pub struct LocalFactor {
    pub place: Place,
    pub degree: usize,
    pub reduction: ReductionKind,
    pub a_v: i64,
}

// ---- point counting over a residue field --------------------------------

fn cst(rf: &ResidueField, c: u64) -> u64 {
    rf.from_base(&rf.base().from_u64(c))
}

fn eval_cubic(rf: &ResidueField, a: u64, b: u64, x: u64) -> u64 {
    let x3 = rf.mul(x, rf.mul(x, x));
    rf.add(x3, rf.add(rf.mul(a, x), b))
}

/// #E(k_v) for y^2 = x^3 + ax + b over the residue field, projective point
/// at infinity included.
pub fn count_points(rf: &ResidueField, a: u64, b: u64) -> Result<u64> {
    let q = rf.order();
    if q > COUNT_CAP {
        return Err(Error::resource(format!(
            "residue field of order {q} exceeds the counting cap {COUNT_CAP}"
        )));
    }
    let disc = rf.add(
        rf.mul(cst(rf, 4), rf.mul(a, rf.mul(a, a))),
        rf.mul(cst(rf, 27), rf.mul(b, b)),
    );
    if disc == 0 {
        return Err(Error::domain("singular cubic has no group of points"));
    }
    if q <= EXHAUSTIVE_LIMIT {
        Ok(count_exhaustive(rf, a, b))
    } else {
        count_bsgs(rf, a, b)
    }
}

fn count_exhaustive(rf: &ResidueField, a: u64, b: u64) -> u64 {
    let mut total = rf.order() as i64 + 1;
    for x in rf.elements() {
        total += rf.chi(eval_cubic(rf, a, b, x)) as i64;
    }
    total as u64
}

type Pt = Option<(u64, u64)>;

fn pt_add(rf: &ResidueField, a: u64, p: Pt, q: Pt) -> Result<Pt> {
    let ((x1, y1), (x2, y2)) = match (p, q) {
        (None, r) | (r, None) => return Ok(r),
        (Some(p), Some(q)) => (p, q),
    };
    let lambda = if x1 == x2 {
        if y1 == rf.neg(y2) {
            return Ok(None);
        }
        let num = rf.add(rf.mul(cst(rf, 3), rf.mul(x1, x1)), a);
        rf.mul(num, rf.inv(rf.mul(cst(rf, 2), y1))?)
    } else {
        rf.mul(rf.sub(y2, y1), rf.inv(rf.sub(x2, x1))?)
    };
    let x3 = rf.sub(rf.sub(rf.mul(lambda, lambda), x1), x2);
    let y3 = rf.sub(rf.mul(lambda, rf.sub(x1, x3)), y1);
    Ok(Some((x3, y3)))
}

fn pt_scalar(rf: &ResidueField, a: u64, k: u64, p: Pt) -> Result<Pt> {
    let mut acc: Pt = None;
    for i in (0..64 - k.leading_zeros()).rev() {
        acc = pt_add(rf, a, acc, acc)?;
        if (k >> i) & 1 == 1 {
            acc = pt_add(rf, a, acc, p)?;
        }
    }
    Ok(acc)
}

/// All m in [lo, hi] with m*P = O, by baby-step giant-step over the window.
fn order_multiples_in_window(
    rf: &ResidueField,
    a: u64,
    p: Pt,
    lo: u64,
    hi: u64,
) -> Result<BTreeSet<u64>> {
    let width = hi - lo + 1;
    let c = width.sqrt() + 1;
    let mut baby: HashMap<(u64, u64), Vec<u64>> = HashMap::new();
    let mut zero_idx: Vec<u64> = vec![];
    let mut cur: Pt = None;
    for i in 0..c {
        match cur {
            None => zero_idx.push(i),
            Some(pt) => baby.entry(pt).or_default().push(i),
        }
        cur = pt_add(rf, a, cur, p)?;
    }
    let giant = pt_scalar(rf, a, c, p)?;
    let mut s = pt_scalar(rf, a, lo, p)?;
    let mut out = BTreeSet::new();
    let mut base = lo;
    while base <= hi {
        // m = base + i matches iff i*P = -S
        let idxs: Option<&Vec<u64>> = match s {
            None => Some(&zero_idx),
            Some((x, y)) => baby.get(&(x, rf.neg(y))),
        };
        if let Some(idxs) = idxs {
            for &i in idxs {
                let m = base + i;
                if m >= lo && m <= hi {
                    out.insert(m);
                }
            }
        }
        s = pt_add(rf, a, s, giant)?;
        base += c;
    }
    Ok(out)
}

fn count_bsgs(rf: &ResidueField, a: u64, b: u64) -> Result<u64> {
    let q = rf.order();
    let w = (4 * q).sqrt(); // floor(2 sqrt q); Hasse keeps |a_v| within it
    let (lo, hi) = (q + 1 - w, q + 1 + w);
    let mut live: Option<BTreeSet<u64>> = None;
    let mut tried = 0usize;
    for x in rf.elements() {
        if tried >= BSGS_SAMPLES {
            break;
        }
        let Some(y) = rf.sqrt(eval_cubic(rf, a, b, x)) else {
            continue;
        };
        tried += 1;
        let hits = order_multiples_in_window(rf, a, Some((x, y)), lo, hi)?;
        debug_assert!(!hits.is_empty(), "group order must appear in its window");
        let next: BTreeSet<u64> = match &live {
            None => hits,
            Some(s) => s.intersection(&hits).cloned().collect(),
        };
        if next.len() == 1 {
            return Ok(next.into_iter().next().unwrap());
        }
        debug_assert!(!next.is_empty(), "true order survives every intersection");
        live = Some(next);
    }
    // ambiguous after the sample budget: the cap keeps exhaustion affordable
    Ok(count_exhaustive(rf, a, b))
}

// ---- local factors --------------------------------------------------------

/// Frobenius trace at a good place: q_v + 1 - #E(k_v) on the v-minimal model.
pub fn frobenius_trace(model: &WeierstrassModel, v: &Place) -> Result<i64> {
    let (rf, a, b) = model.reduced_short_model(v)?;
    let n = count_points(&rf, a, b)?;
    let a_v = rf.order() as i64 + 1 - n as i64;
    if a_v * a_v > 4 * rf.order() as i64 {
        return Err(Error::internal(format!(
            "trace {a_v} violates the Hasse bound at {v}"
        )));
    }
    Ok(a_v)
}

/// Euler factors for every place of degree <= max_degree (infinity included),
/// in a fixed deterministic order.
pub fn local_factors(
    model: &WeierstrassModel,
    inv: &CurveInvariants,
    max_degree: usize,
) -> Result<Vec<LocalFactor>> {
    let spec = model.spec();
    let mut bad: BTreeMap<Place, (KodairaType, MultKind)> = BTreeMap::new();
    for rd in &inv.locals {
        bad.insert(rd.place.clone(), (rd.kodaira, rd.mult_kind));
    }
    let mut places: Vec<Place> = vec![Place::infinity(spec)];
    for d in 1..=max_degree {
        for pi in monic_irreducibles(spec, d)? {
            places.push(Place::finite(pi)?);
        }
    }
    places
        .par_iter()
        .map(|v| {
            let degree = v.degree();
            match bad.get(v) {
                Some((KodairaType::In(_), mk)) => {
                    let (reduction, a_v) = match mk {
                        MultKind::Split => (ReductionKind::SplitMult, 1),
                        MultKind::NonSplit => (ReductionKind::NonSplitMult, -1),
                        MultKind::None => {
                            return Err(Error::internal(format!(
                                "multiplicative place {v} lacks a split classification"
                            )))
                        }
                    };
                    Ok(LocalFactor {
                        place: v.clone(),
                        degree,
                        reduction,
                        a_v,
                    })
                }
                Some(_) => Ok(LocalFactor {
                    place: v.clone(),
                    degree,
                    reduction: ReductionKind::Additive,
                    a_v: 0,
                }),
                None => Ok(LocalFactor {
                    place: v.clone(),
                    degree,
                    reduction: ReductionKind::Good,
                    a_v: frobenius_trace(model, v)?,
                }),
            }
        })
        .collect()
}

// ---- the global polynomial -----------------------------------------------

/// L as an exact integer polynomial together with its spectral data.
#[derive(Clone, Debug)]
pub struct LPolynomial {
    /// Coefficients c_0 = 1 .. c_N.
    pub coeffs: Vec<BigInt>,
    /// Base field size q.
    pub q: u64,
    /// Degree N = n_E - 4.
    pub n: usize,
    /// Multiplicity of the zero at T = 1/q (exact integer division).
    pub r_an: usize,
    /// The alpha_j = 1/T_j, each with |alpha| = q.
    pub inverse_roots: Vec<Complex64>,
    /// Angles theta_j in [0, 2pi) with T_j = q^{-1} e^{-i theta_j}, sorted,
    /// multiplicity included.
    pub zero_angles: Vec<f64>,
    /// max_j ||alpha_j| - q| / q.
    pub rh_max_dev: f64,
    /// Worst relative mismatch of the pairing alpha -> q^2 / alpha.
    pub fe_max_dev: f64,
}

/// In-place multiplication of the series by 1 / (1 + sum_j coef_j T^j).
fn divide_series(s: &mut [BigInt], terms: &[(usize, BigInt)]) {
    for k in 0..s.len() {
        for (j, c) in terms {
            if *j <= k {
                let sub = c * &s[k - *j];
                s[k] -= sub;
            }
        }
    }
}

pub fn l_polynomial(model: &WeierstrassModel, inv: &CurveInvariants) -> Result<LPolynomial> {
    if inv.isotrivial {
        return Err(Error::isotrivial(
            "the L-function degree formula needs a nonconstant j-invariant",
        ));
    }
    let q128 = model.spec().q();
    let q = u64::try_from(q128)
        .map_err(|_| Error::resource(format!("base field of order {q128} too large")))?;
    if inv.n_e < 4 {
        return Err(Error::internal(format!(
            "conductor degree {} below 4 on a nonconstant curve",
            inv.n_e
        )));
    }
    let n = (inv.n_e - 4) as usize;
    let guard = n + 3;
    let factors = local_factors(model, inv, guard)?;
    let mut series = vec![BigInt::zero(); guard + 1];
    series[0] = BigInt::one();
    for f in &factors {
        let d = f.degree;
        let terms: Vec<(usize, BigInt)> = match f.reduction {
            ReductionKind::Additive => continue,
            ReductionKind::SplitMult | ReductionKind::NonSplitMult => {
                vec![(d, BigInt::from(-f.a_v))]
            }
            ReductionKind::Good => vec![
                (d, BigInt::from(-f.a_v)),
                (2 * d, BigInt::from(q).pow(d as u32)),
            ],
        };
        divide_series(&mut series, &terms);
    }
    for (k, c) in series.iter().enumerate().skip(n + 1) {
        if !c.is_zero() {
            return Err(Error::internal(format!(
                "L-series coefficient {c} at order {k} beyond the degree bound {n}"
            )));
        }
    }
    let coeffs: Vec<BigInt> = series[..=n].to_vec();
    debug_assert!(coeffs[0].is_one());
    if n > 0 {
        let qn = BigInt::from(q).pow(n as u32);
        if coeffs[n].abs() != qn {
            return Err(Error::internal(format!(
                "leading coefficient {} has modulus != q^N = {qn}",
                coeffs[n]
            )));
        }
    }
    let r_an = analytic_rank(&coeffs, q);
    let (zero_angles, inverse_roots) = zero_data(&coeffs, q, r_an)?;
    let rh_max_dev = inverse_roots
        .iter()
        .map(|al| (al.norm() - q as f64).abs() / q as f64)
        .fold(0.0, f64::max);
    let fe_max_dev = fe_pairing_dev(&inverse_roots, q);
    Ok(LPolynomial {
        coeffs,
        q,
        n,
        r_an,
        inverse_roots,
        zero_angles,
        rh_max_dev,
        fe_max_dev,
    })
}

/// Multiplicity of T = 1/q as a root, by repeated exact division by 1 - qT.
pub fn analytic_rank(coeffs: &[BigInt], q: u64) -> usize {
    let mut cur = coeffs.to_vec();
    let mut r = 0;
    while cur.len() > 1 {
        match divide_one_minus_qt(&cur, q) {
            Some(next) => {
                cur = next;
                r += 1;
            }
            None => break,
        }
    }
    r
}

/// Exact quotient by (1 - qT), or None when it does not divide.
fn divide_one_minus_qt(c: &[BigInt], q: u64) -> Option<Vec<BigInt>> {
    let n = c.len() - 1;
    let mut d = Vec::with_capacity(n);
    d.push(c[0].clone());
    for k in 1..n {
        let next = &c[k] + BigInt::from(q) * &d[k - 1];
        d.push(next);
    }
    let rem = &c[n] + BigInt::from(q) * &d[n - 1];
    if rem.is_zero() {
        Some(d)
    } else {
        None
    }
}

// ---- zero locations --------------------------------------------------------

/// Angles and inverse roots of the polynomial, multiplicity included; the
/// r_an certified zeros at T = 1/q enter as exact theta = 0.
pub fn zero_angles(coeffs: &[BigInt], q: u64) -> Result<Vec<f64>> {
    let r_an = analytic_rank(coeffs, q);
    Ok(zero_data(coeffs, q, r_an)?.0)
}

fn zero_data(coeffs: &[BigInt], q: u64, r_an: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut pairs: Vec<(f64, Complex64)> = (0..r_an)
        .map(|_| (0.0, Complex64::new(q as f64, 0.0)))
        .collect();
    let mut cur = coeffs.to_vec();
    for _ in 0..r_an {
        cur = divide_one_minus_qt(&cur, q).expect("certified multiplicity divides");
    }
    let rat: Vec<BigRational> = cur
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    for (mult, part) in squarefree_parts(rat) {
        if rp_deg(&part) == 0 {
            continue;
        }
        for root in aberth_roots(&part)? {
            let t = polish_root(&part, root, 2);
            let theta = (-t.arg()).rem_euclid(2.0 * std::f64::consts::PI);
            let alpha = Complex64::new(1.0, 0.0) / t;
            for _ in 0..mult {
                pairs.push((theta, alpha));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    debug_assert_eq!(pairs.len(), coeffs.len() - 1);
    Ok(pairs.into_iter().unzip())
}

fn fe_pairing_dev(roots: &[Complex64], q: u64) -> f64 {
    let mut used = vec![false; roots.len()];
    let mut max_dev: f64 = 0.0;
    for alpha in roots {
        let target = Complex64::new((q * q) as f64, 0.0) / alpha;
        let mut best: Option<(usize, f64)> = None;
        for (j, cand) in roots.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (cand - target).norm();
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("as many candidates as targets");
        used[j] = true;
        max_dev = max_dev.max(d / target.norm());
    }
    max_dev
}

// ---- rational polynomial helpers for the root finder -----------------------

fn rp_trim(mut f: Vec<BigRational>) -> Vec<BigRational> {
    while f.len() > 1 && f.last().unwrap().is_zero() {
        f.pop();
    }
    f
}

fn rp_deg(f: &[BigRational]) -> usize {
    f.len() - 1
}

fn rp_derivative(f: &[BigRational]) -> Vec<BigRational> {
    if f.len() <= 1 {
        return vec![BigRational::zero()];
    }
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn rp_divrem(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let dd = rp_deg(den);
    let lead = den.last().unwrap();
    assert!(!lead.is_zero(), "division by the zero polynomial");
    let mut rem = num.to_vec();
    if rp_deg(&rem) < dd {
        return (vec![BigRational::zero()], rp_trim(rem));
    }
    let mut quot = vec![BigRational::zero(); rp_deg(&rem) - dd + 1];
    for k in (dd..rem.len()).rev() {
        let c = &rem[k] / lead;
        if c.is_zero() {
            continue;
        }
        quot[k - dd] = c.clone();
        for (j, dc) in den.iter().enumerate() {
            let sub = &c * dc;
            rem[k - dd + j] -= sub;
        }
    }
    (rp_trim(quot), rp_trim(rem))
}

fn rp_monic(f: &[BigRational]) -> Vec<BigRational> {
    let lead = f.last().unwrap();
    f.iter().map(|c| c / lead).collect()
}

fn rp_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = rp_trim(a.to_vec());
    let mut y = rp_trim(b.to_vec());
    while !(y.len() == 1 && y[0].is_zero()) {
        let (_, r) = rp_divrem(&x, &y);
        x = y;
        y = r;
    }
    if x.len() == 1 && x[0].is_zero() {
        x
    } else {
        rp_monic(&x)
    }
}

/// Yun's decomposition: pairs (multiplicity, squarefree factor), coprime
/// factors whose m-th powers multiply back to the input up to a constant.
fn squarefree_parts(f: Vec<BigRational>) -> Vec<(usize, Vec<BigRational>)> {
    let f = rp_trim(f);
    if rp_deg(&f) == 0 {
        return vec![];
    }
    let fp = rp_derivative(&f);
    let a0 = rp_gcd(&f, &fp);
    if rp_deg(&a0) == 0 {
        return vec![(1, f)];
    }
    let mut out = vec![];
    let (mut b, _) = rp_divrem(&f, &a0);
    let (c0, _) = rp_divrem(&fp, &a0);
    let mut d = rp_sub(&c0, &rp_derivative(&b));
    let mut i = 1;
    while rp_deg(&b) > 0 {
        let ai = rp_gcd(&b, &d);
        if rp_deg(&ai) > 0 {
            out.push((i, ai.clone()));
        }
        let (bn, _) = rp_divrem(&b, &ai);
        let (cn, _) = rp_divrem(&d, &ai);
        b = bn;
        d = rp_sub(&cn, &rp_derivative(&b));
        i += 1;
    }
    out
}

fn rp_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    rp_trim(out)
}

// ---- numeric root finding ---------------------------------------------------

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (0..c.len()).rev() {
        acc = acc * z + c[k];
    }
    acc
}

/// Aberth-Ehrlich simultaneous iteration for a squarefree polynomial.
fn aberth_roots(f: &[BigRational]) -> Result<Vec<Complex64>> {
    let deg = rp_deg(f);
    let c: Vec<Complex64> = f
        .iter()
        .map(|x| Complex64::new(x.to_f64().expect("coefficient fits f64"), 0.0))
        .collect();
    let cp: Vec<Complex64> = (1..=deg)
        .map(|i| c[i] * Complex64::new(i as f64, 0.0))
        .collect();
    // all roots of an L-divisor lie near |T| = radius; stagger the phases
    let radius = (c[0].norm() / c[deg].norm()).powf(1.0 / deg as f64);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.354) / deg as f64;
            Complex64::new(radius * phi.cos(), radius * phi.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut max_step = 0.0f64;
        for k in 0..deg {
            let fz = horner(&c, z[k]);
            let fpz = horner(&cp, z[k]);
            if fz.norm() == 0.0 {
                continue;
            }
            let w = fz / fpz;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != k {
                    s += Complex64::new(1.0, 0.0) / (z[k] - z[j]);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() > 1e-12 { w / denom } else { w };
            z[k] -= step;
            max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
        }
        if max_step < 1e-14 {
            return Ok(z);
        }
    }
    let residual: f64 = z.iter().map(|&zk| horner(&c, zk).norm()).fold(0.0, f64::max);
    Err(Error::numeric(format!(
        "simultaneous root iteration stalled on degree {deg}; max residual {residual:.3e}"
    )))
}

/// Newton steps with exact rational evaluation, rounding the iterate back to
/// f64 after each step. Removes any drift the float iteration accumulated.
fn polish_root(f: &[BigRational], z: Complex64, rounds: usize) -> Complex64 {
    let fp = rp_derivative(f);
    let mut re = z.re;
    let mut im = z.im;
    for _ in 0..rounds {
        let (zr, zi) = (
            BigRational::from_float(re).expect("finite float"),
            BigRational::from_float(im).expect("finite float"),
        );
        let (vr, vi) = eval_complex(f, &zr, &zi);
        if vr.is_zero() && vi.is_zero() {
            break;
        }
        let (dr, di) = eval_complex(&fp, &zr, &zi);
        let den = &dr * &dr + &di * &di;
        if den.is_zero() {
            break;
        }
        // (vr + i vi) / (dr + i di)
        let sr = (&vr * &dr + &vi * &di) / &den;
        let si = (&vi * &dr - &vr * &di) / &den;
        re = (zr - sr).to_f64().expect("fits f64");
        im = (zi - si).to_f64().expect("fits f64");
    }
    Complex64::new(re, im)
}

fn eval_complex(
    f: &[BigRational],
    zr: &BigRational,
    zi: &BigRational,
) -> (BigRational, BigRational) {
    let mut ar = BigRational::zero();
    let mut ai = BigRational::zero();
    for k in (0..f.len()).rev() {
        let nr = &ar * zr - &ai * zi + &f[k];
        let ni = &ar * zi + &ai * zr;
        ar = nr;
        ai = ni;
    }
    (ar, ai)
}

// ---- Fejer kernel and the explicit-formula audit ---------------------------

/// F_Y(theta) = sin(Y theta / 2)^2 / (Y sin(theta / 2)^2), with the removable
/// singularity at theta = 0 mod 2pi taking the value Y.
pub fn fejer_eval(y: u32, theta: f64) -> f64 {
    assert!(y >= 1, "kernel order must be positive");
    let s = (0.5 * theta).sin();
    if s.abs() < 1e-8 {
        // Fourier form is exact up to rounding and has no singularity
        let mut v = 1.0;
        for m in 1..y {
            v += 2.0 * (1.0 - m as f64 / y as f64) * (m as f64 * theta).cos();
        }
        v
    } else {
        let n = (0.5 * y as f64 * theta).sin();
        n * n / (y as f64 * s * s)
    }
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub y: u32,
    /// sum over zero angles of F_Y(theta).
    pub zero_side: f64,
    /// N + 2 sum_{m=1}^{Y-1} (1 - m/Y) P_m / q^m with exact integer power
    /// sums P_m from the coefficients.
    pub coeff_side: f64,
    pub gap: f64,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.gap <= AUDIT_TOL
    }
}

/// Evaluate both sides of the explicit formula for the Fejer kernel of order
/// Y: once through the located zeros, once through Newton power sums of the
/// integer coefficients.
pub fn explicit_formula_audit(lp: &LPolynomial, y: u32) -> Result<AuditReport> {
    if y < 1 {
        return Err(Error::domain("kernel order must be positive"));
    }
    let zero_side: f64 = lp.zero_angles.iter().map(|&t| fejer_eval(y, t)).sum();
    // same sum with the certified theta = 0 zeros booked as r_an * Y
    let split: f64 = lp.r_an as f64 * y as f64
        + lp
            .zero_angles
            .iter()
            .filter(|&&t| t != 0.0)
            .map(|&t| fejer_eval(y, t))
            .sum::<f64>();
    if (zero_side - split).abs() > 1e-9 * zero_side.abs().max(1.0) {
        return Err(Error::internal(format!(
            "zero-side bookkeeping mismatch: {zero_side} vs {split}"
        )));
    }
    let p = power_sums(&lp.coeffs, y.saturating_sub(1) as usize);
    let mut coeff = BigRational::from_integer(BigInt::from(lp.n as i64));
    let yq = BigRational::from_integer(BigInt::from(y));
    for m in 1..y as usize {
        let cm = BigRational::one()
            - BigRational::from_integer(BigInt::from(m)) / &yq;
        let qm = BigInt::from(lp.q).pow(m as u32);
        let sm = BigRational::new(p[m - 1].clone(), qm);
        coeff += BigRational::from_integer(BigInt::from(2)) * cm * sm;
    }
    let coeff_side = coeff.to_f64().expect("audit value fits f64");
    let gap = (zero_side - coeff_side).abs();
    Ok(AuditReport {
        y,
        zero_side,
        coeff_side,
        gap,
    })
}

/// P_1..P_k: power sums of the inverse roots, exact integers by Newton's
/// identities on c_i (e_i = (-1)^i c_i).
fn power_sums(coeffs: &[BigInt], k: usize) -> Vec<BigInt> {
    let n = coeffs.len() - 1;
    let mut p: Vec<BigInt> = Vec::with_capacity(k);
    for m in 1..=k {
        let mut s = BigInt::zero();
        for i in 1..m.min(n + 1) {
            s -= &coeffs[i] * &p[m - i - 1];
        }
        if m <= n {
            s -= BigInt::from(m as i64) * &coeffs[m];
        }
        p.push(s);
    }
    p
}

/// Smallest Y >= 1 with q^Y >= n_E^2, i.e. ceil(2 ln n_E / ln q) with ties
/// settled by exact integer comparison.
pub fn brumer_y(n_e: i64, q: u64) -> Result<u32> {
    if n_e <= 1 {
        return Err(Error::domain(format!(
            "kernel-order formula needs conductor degree above 1, got {n_e}"
        )));
    }
    let target = BigInt::from(n_e) * BigInt::from(n_e);
    let mut y = 1u32;
    let mut pw = BigInt::from(q);
    while pw < target {
        pw *= BigInt::from(q);
        y += 1;
    }
    Ok(y)
}

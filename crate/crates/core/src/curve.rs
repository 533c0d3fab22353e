//! Weierstrass models over F_q(t) and their local and global invariants.
//!
//! A model is stored in short form y^2 = x^3 + Ax + B (legitimate since the
//! characteristic is at least 5; general a1..a6 input is completed). Local
//! analysis at each place produces the minimal discriminant valuation, the
//! Kodaira type, and the conductor exponent; the sweep over all candidate bad
//! places aggregates the discriminant and conductor divisors, the height
//! h(E) = deg Delta / 12 (kept as an exact rational), and the conductor
//! degree n_E.
//!
//! Isotrivial curves (constant j) are flagged, and the screen that gates the
//! analysis pipeline rejects them: the bounds downstream assume a curve that
//! genuinely varies over the base.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::funcfield::{Place, Poly, RatFunc};
use crate::gf::FieldSpec;
use crate::residue::ResidueField;

/// Reduction type at a place, in Kodaira's notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KodairaType {
    Good,
    /// I_n, n >= 1: multiplicative reduction.
    In(u32),
    II,
    III,
    IV,
    /// I_n^*, n >= 0.
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaType::Good => write!(f, "good"),
            KodairaType::In(n) => write!(f, "I{n}"),
            KodairaType::II => write!(f, "II"),
            KodairaType::III => write!(f, "III"),
            KodairaType::IV => write!(f, "IV"),
            KodairaType::IStar(n) => write!(f, "I{n}*"),
            KodairaType::IVStar => write!(f, "IV*"),
            KodairaType::IIIStar => write!(f, "III*"),
            KodairaType::IIStar => write!(f, "II*"),
        }
    }
}

impl KodairaType {
    /// Denominator bound for local height-pairing corrections on this fiber:
    /// every local correction is an integer multiple of 1/d for this d. Used
    /// to round certified height approximations onto an exact grid.
    pub fn height_denominator(&self) -> u64 {
        match self {
            KodairaType::Good | KodairaType::II | KodairaType::IIStar => 1,
            KodairaType::In(n) => (*n).max(1) as u64,
            KodairaType::III | KodairaType::IIIStar => 2,
            KodairaType::IV | KodairaType::IVStar => 3,
            KodairaType::IStar(_) => 4,
        }
    }
}

/// Split/nonsplit tag for multiplicative places.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultKind {
    None,
    Split,
    NonSplit,
}

/// Outcome of the local algorithm at one place.
#[derive(Clone, Debug)]
pub struct ReductionData {
    pub place: Place,
    pub kodaira: KodairaType,
    /// ord_v of the minimal discriminant (>= 0).
    pub ord_delta: i64,
    /// Conductor exponent: 0 good, 1 multiplicative, 2 additive (tame).
    pub f_v: u32,
    pub mult_kind: MultKind,
}

/// Global invariants aggregated over all places.
#[derive(Clone, Debug)]
pub struct CurveInvariants {
    /// Minimal discriminant divisor (positive part only; entries > 0).
    pub delta_divisor: crate::funcfield::Divisor,
    pub deg_delta: i64,
    /// h(E) = deg Delta / 12, exact.
    pub h_e: BigRational,
    pub conductor_divisor: crate::funcfield::Divisor,
    pub n_e: i64,
    /// Inseparability exponent s of the j-map (so its degree is sep * p^s).
    pub inseparability: u32,
    pub isotrivial: bool,
    /// Reduction data at every bad place, in canonical place order.
    pub locals: Vec<ReductionData>,
}

/// A nonsingular Weierstrass model y^2 = x^3 + Ax + B over F_q(t).
#[derive(Clone)]
pub struct WeierstrassModel {
    spec: FieldSpec,
    a: RatFunc,
    b: RatFunc,
    delta: RatFunc,
    j: RatFunc,
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x + ({})", self.a, self.b)
    }
}

impl fmt::Debug for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl WeierstrassModel {
    pub fn from_short(a: RatFunc, b: RatFunc) -> Result<WeierstrassModel> {
        let spec = a.spec().clone();
        assert!(a.spec() == b.spec(), "coefficients over different fields");
        let c4 = RatFunc::constant(&spec, spec.from_i64(4));
        let c27 = RatFunc::constant(&spec, spec.from_i64(27));
        let cm16 = RatFunc::constant(&spec, spec.from_i64(-16));
        let delta = cm16.mul(&c4.mul(&a.pow(3)).add(&c27.mul(&b.pow(2))));
        if delta.is_zero() {
            return Err(Error::domain(
                "singular model: 4A^3 + 27B^2 = 0",
            ));
        }
        let cm1728 = RatFunc::constant(&spec, spec.from_i64(-1728));
        let j = cm1728
            .mul(&c4.mul(&a).pow(3))
            .div(&delta)
            .expect("nonzero discriminant");
        Ok(WeierstrassModel {
            spec,
            a,
            b,
            delta,
            j,
        })
    }

    /// Complete a general model [a1, a2, a3, a4, a6] to short form.
    pub fn from_a_invariants(ai: &[RatFunc; 5]) -> Result<WeierstrassModel> {
        let spec = ai[0].spec().clone();
        let [a1, a2, a3, a4, a6] = ai;
        let c = |n: i64| RatFunc::constant(&spec, spec.from_i64(n));
        let b2 = a1.mul(a1).add(&c(4).mul(a2));
        let b4 = c(2).mul(a4).add(&a1.mul(a3));
        let b6 = a3.mul(a3).add(&c(4).mul(a6));
        let c4 = b2.mul(&b2).sub(&c(24).mul(&b4));
        let c6 = b2
            .pow(3)
            .neg()
            .add(&c(36).mul(&b2).mul(&b4))
            .sub(&c(216).mul(&b6));
        let a_short = c4.mul(&c(-1)).div(&c(48)).expect("48 invertible");
        let b_short = c6.mul(&c(-1)).div(&c(864)).expect("864 invertible");
        WeierstrassModel::from_short(a_short, b_short)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn a(&self) -> &RatFunc {
        &self.a
    }
    pub fn b(&self) -> &RatFunc {
        &self.b
    }
    pub fn discriminant(&self) -> &RatFunc {
        &self.delta
    }
    pub fn j_invariant(&self) -> &RatFunc {
        &self.j
    }

    /// Admissible change of variables (x, y) -> (u^2 x, u^3 y): scales A by
    /// u^4 and B by u^6, leaving j and all global invariants unchanged.
    pub fn twist(&self, u: &RatFunc) -> Result<WeierstrassModel> {
        if u.is_zero() {
            return Err(Error::domain("twist by zero"));
        }
        WeierstrassModel::from_short(self.a.mul(&u.pow(4)), self.b.mul(&u.pow(6)))
    }

    /// True iff the curve genuinely varies over the base (non-constant j).
    /// This is the gate for every bound downstream.
    pub fn trace_zero_screen(&self) -> bool {
        self.j.height() > 0
    }

    /// Largest twist exponent m keeping A, B integral at v; the v-minimal
    /// model is (A pi^{-4m}, B pi^{-6m}).
    fn local_scale(&self, v: &Place) -> i64 {
        let va = self.a.valuation(v);
        let vb = self.b.valuation(v);
        match (va, vb) {
            (Some(a), Some(b)) => (a.div_euclid(4)).min(b.div_euclid(6)),
            (Some(a), None) => a.div_euclid(4),
            (None, Some(b)) => b.div_euclid(6),
            (None, None) => unreachable!("A = B = 0 contradicts nonzero discriminant"),
        }
    }

    /// Local reduction data at one place, on the minimal local model.
    pub fn tate_local(&self, v: &Place) -> Result<ReductionData> {
        let va = self.a.valuation(v);
        let vb = self.b.valuation(v);
        let vd = self
            .delta
            .valuation(v)
            .expect("nonzero discriminant has a valuation");
        let m = self.local_scale(v);
        let alpha = va.map(|x| x - 4 * m);
        let beta = vb.map(|x| x - 6 * m);
        let delta_min = vd - 12 * m;
        debug_assert!(delta_min >= 0, "negative minimal discriminant valuation");
        debug_assert!(alpha.map_or(true, |x| x >= 0) && beta.map_or(true, |x| x >= 0));

        let (kodaira, f_v, mult_kind) = if delta_min == 0 {
            (KodairaType::Good, 0, MultKind::None)
        } else if alpha == Some(0) {
            let split = self.is_split_at(v, m)?;
            (
                KodairaType::In(delta_min as u32),
                1,
                if split { MultKind::Split } else { MultKind::NonSplit },
            )
        } else {
            let alpha_ge3 = alpha.map_or(true, |x| x >= 3);
            let kt = match delta_min {
                2 => KodairaType::II,
                3 => KodairaType::III,
                4 => KodairaType::IV,
                6 => KodairaType::IStar(0),
                d if d >= 7 && alpha == Some(2) => KodairaType::IStar(d as u32 - 6),
                8 if alpha_ge3 => KodairaType::IVStar,
                9 if alpha_ge3 => KodairaType::IIIStar,
                10 if alpha_ge3 => KodairaType::IIStar,
                d => {
                    return Err(Error::internal(format!(
                        "valuation profile (alpha={alpha:?}, beta={beta:?}, delta={d}) \
                         matches no reduction type at {v}"
                    )))
                }
            };
            (kt, 2, MultKind::None)
        };
        debug_assert!(f_v as i64 <= delta_min);
        Ok(ReductionData {
            place: v.clone(),
            kodaira,
            ord_delta: delta_min,
            f_v,
            mult_kind,
        })
    }

    /// Residue field at v with the reductions of the v-minimal model's
    /// coefficients (abar, bbar). Valid at every place; the reduced cubic is
    /// singular exactly at the bad ones.
    pub fn reduced_short_model(&self, v: &Place) -> Result<(ResidueField, u64, u64)> {
        self.reduced_model_scaled(v, self.local_scale(v))
    }

    fn reduced_model_scaled(&self, v: &Place, m: i64) -> Result<(ResidueField, u64, u64)> {
        let (a_loc, b_loc, place_loc) = match v {
            Place::Finite(pi) => (
                shift_by(&self.a, pi, -4 * m),
                shift_by(&self.b, pi, -6 * m),
                v.clone(),
            ),
            Place::Infinity(_) => {
                let u = Poly::t(&self.spec);
                let a_inf = self.a.invert_variable();
                let b_inf = self.b.invert_variable();
                (
                    shift_by(&a_inf, &u, -4 * m),
                    shift_by(&b_inf, &u, -6 * m),
                    Place::finite(u).expect("t is irreducible"),
                )
            }
        };
        let rf = ResidueField::new(&place_loc)?;
        let abar = reduce_at(&rf, &a_loc)?;
        let bbar = reduce_at(&rf, &b_loc)?;
        Ok((rf, abar, bbar))
    }

    /// Split/nonsplit test for multiplicative reduction: the reduced cubic
    /// has a double root x0 and the reduction is split iff 3*x0 is a square
    /// in the residue field.
    fn is_split_at(&self, v: &Place, m: i64) -> Result<bool> {
        let (rf, abar, bbar) = self.reduced_model_scaled(v, m)?;
        debug_assert!(abar != 0, "multiplicative reduction needs nonzero A");
        // distinct-slope criterion at the node (x0, 0), x0 = -3B/(2A)
        let three = rf.from_base(&self.spec.from_u64(3));
        let two = rf.from_base(&self.spec.from_u64(2));
        let x0 = rf.mul(
            rf.neg(rf.mul(three, bbar)),
            rf.inv(rf.mul(two, abar))?,
        );
        Ok(rf.chi(rf.mul(three, x0)) == 1)
    }

    /// Sweep all candidate bad places and aggregate global invariants.
    pub fn global_invariants(&self) -> Result<CurveInvariants> {
        let isotrivial = self.j.height() == 0;
        let inseparability = if isotrivial {
            0
        } else {
            inseparability_degree(&self.j)?
        };
        let mut places: BTreeSet<Place> = BTreeSet::new();
        for f in [&self.a, &self.b, &self.delta] {
            if !f.is_zero() {
                for v in f.support() {
                    places.insert(v);
                }
            }
        }
        places.insert(Place::infinity(&self.spec));

        let mut delta_divisor = crate::funcfield::Divisor::new();
        let mut conductor_divisor = crate::funcfield::Divisor::new();
        let mut locals = vec![];
        for v in &places {
            let rd = self.tate_local(v)?;
            assert!(
                (rd.f_v as i64) <= rd.ord_delta,
                "conductor exponent exceeds discriminant valuation at {v}"
            );
            if rd.ord_delta > 0 {
                delta_divisor.add_to(v, rd.ord_delta);
            }
            if rd.f_v > 0 {
                conductor_divisor.add_to(v, rd.f_v as i64);
            }
            if rd.ord_delta > 0 {
                locals.push(rd);
            }
        }
        let deg_delta = delta_divisor.degree();
        let n_e = conductor_divisor.degree();
        assert!(n_e <= deg_delta, "conductor degree exceeds deg Delta");
        let h_e = BigRational::new(BigInt::from(deg_delta), BigInt::from(12));
        Ok(CurveInvariants {
            delta_divisor,
            deg_delta,
            h_e,
            conductor_divisor,
            n_e,
            inseparability,
            isotrivial,
            locals,
        })
    }
}

/// Multiply a function by pi^e (e of either sign).
fn shift_by(x: &RatFunc, pi: &Poly, e: i64) -> RatFunc {
    if e == 0 {
        return x.clone();
    }
    let power = pi.pow(e.unsigned_abs() as u32);
    if e > 0 {
        RatFunc::new(x.num().mul(&power), x.den().clone()).expect("nonzero denominator")
    } else {
        RatFunc::new(x.num().clone(), x.den().mul(&power)).expect("nonzero denominator")
    }
}

/// Reduce a function that is integral at the place into the residue field.
pub(crate) fn reduce_at(rf: &ResidueField, x: &RatFunc) -> Result<u64> {
    let den = rf.from_poly(x.den());
    if den == 0 {
        return Err(Error::domain(format!(
            "function {x} is not integral at ({})",
            rf.modulus()
        )));
    }
    let num = rf.from_poly(x.num());
    Ok(rf.mul(num, rf.inv(den)?))
}

/// Keep every p-th coefficient: inverse of t -> t^p on polynomials all of
/// whose exponents are multiples of p.
fn exponent_divide(f: &Poly, p: usize) -> Poly {
    let c: Vec<_> = f.coeffs().iter().step_by(p).cloned().collect();
    Poly::from_coeffs(f.spec(), c)
}

/// Largest s such that j is a function of t^{p^s}; the j-map then factors
/// through s iterates of Frobenius and deg j = p^s * (separable degree).
pub fn inseparability_degree(j: &RatFunc) -> Result<u32> {
    if j.height() == 0 {
        return Err(Error::isotrivial(
            "constant j-invariant has no separable degree data",
        ));
    }
    let p = j.spec().p() as usize;
    let mut num = j.num().clone();
    let mut den = j.den().clone();
    let mut s = 0u32;
    while num.derivative().is_zero() && den.derivative().is_zero() {
        num = exponent_divide(&num, p);
        den = exponent_divide(&den, p);
        s += 1;
    }
    debug_assert_eq!(
        num.deg_i64().max(den.deg_i64()) * (p as i64).pow(s),
        j.num().deg_i64().max(j.den().deg_i64()),
        "separable degree times p^s must recover deg j"
    );
    Ok(s)
}

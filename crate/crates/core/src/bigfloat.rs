//! Certified interval scalars over exact rationals.
//!
//! An [`Interval`] stores exact `BigRational` endpoints and every operation
//! rounds outward, so a computed interval always contains the exact value of
//! the expression it models. Transcendental functions (ln, exp, sqrt) take a
//! precision in bits and guarantee the returned width is consistent with it;
//! endpoints can be coarsened to a dyadic grid to keep denominators small
//! across long computations.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

impl Interval {
    pub fn point(r: BigRational) -> Interval {
        Interval {
            lo: r.clone(),
            hi: r,
        }
    }

    pub fn from_int(n: i64) -> Interval {
        Interval::point(big(n))
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Interval {
        assert!(lo <= hi, "inverted interval endpoints");
        Interval { lo, hi }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }
    pub fn hi(&self) -> &BigRational {
        &self.hi
    }
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lo <= r && r <= &self.hi
    }
    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / big(2);
        mid.to_f64().unwrap_or(f64::NAN)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, r: &BigRational) -> Interval {
        self.mul(&Interval::point(r.clone()))
    }

    /// Reciprocal; the interval must not contain zero.
    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::numeric("reciprocal of interval containing zero"));
        }
        Ok(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power, with the even-exponent pinch at zero handled.
    pub fn pow_u(&self, r: u32) -> Interval {
        if r == 0 {
            return Interval::from_int(1);
        }
        let pl = pow_rat(&self.lo, r);
        let ph = pow_rat(&self.hi, r);
        if r % 2 == 1 {
            Interval { lo: pl, hi: ph }
        } else if self.contains_zero() {
            Interval {
                lo: BigRational::zero(),
                hi: pl.max(ph),
            }
        } else {
            Interval {
                lo: pl.clone().min(ph.clone()),
                hi: pl.max(ph),
            }
        }
    }

    /// Outward-round both endpoints to the 2^-prec grid.
    pub fn coarsen(&self, prec: u32) -> Interval {
        Interval {
            lo: round_down(&self.lo, prec),
            hi: round_up(&self.hi, prec),
        }
    }

    /// Square root of a nonnegative interval, outward to 2^-prec.
    pub fn sqrt(&self, prec: u32) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::numeric("square root of negative interval"));
        }
        Ok(Interval {
            lo: sqrt_down(&self.lo, prec),
            hi: sqrt_up(&self.hi, prec),
        })
    }

    /// Natural log of a positive interval.
    pub fn ln(&self, prec: u32) -> Result<Interval> {
        if !self.lo.is_positive() {
            return Err(Error::numeric("logarithm of non-positive interval"));
        }
        let a = ln_rat(&self.lo, prec);
        let b = ln_rat(&self.hi, prec);
        Ok(Interval { lo: a.lo, hi: b.hi })
    }

    pub fn exp(&self, prec: u32) -> Interval {
        let a = exp_rat(&self.lo, prec);
        let b = exp_rat(&self.hi, prec);
        Interval { lo: a.lo, hi: b.hi }
    }

    /// Decimal rendering of the midpoint with the given digit count.
    pub fn decimal(&self, digits: usize) -> String {
        let mid = (&self.lo + &self.hi) / big(2);
        decimal_of_rational(&mid, digits)
    }
}

fn pow_rat(r: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

fn round_down(r: &BigRational, prec: u32) -> BigRational {
    let scaled = r * pow2(prec as i64);
    BigRational::new(scaled.floor().to_integer(), BigInt::one()) * pow2(-(prec as i64))
}

fn round_up(r: &BigRational, prec: u32) -> BigRational {
    let scaled = r * pow2(prec as i64);
    BigRational::new(scaled.ceil().to_integer(), BigInt::one()) * pow2(-(prec as i64))
}

/// Largest dyadic s/2^prec with (s/2^prec)^2 <= r.
fn sqrt_down(r: &BigRational, prec: u32) -> BigRational {
    if r.is_zero() {
        return BigRational::zero();
    }
    // floor(sqrt(r * 4^prec)) / 2^prec <= sqrt(r)
    let scaled = r * pow2(2 * prec as i64);
    let n = scaled.floor().to_integer();
    let root = n.to_biguint().expect("nonnegative radicand").sqrt();
    BigRational::new(BigInt::from_biguint(Sign::Plus, root), BigInt::one()) * pow2(-(prec as i64))
}

fn sqrt_up(r: &BigRational, prec: u32) -> BigRational {
    if r.is_zero() {
        return BigRational::zero();
    }
    let lo = sqrt_down(r, prec);
    let mut hi = &lo + pow2(-(prec as i64));
    // One grid step is enough unless floor(sqrt) was exact.
    if &lo * &lo == *r {
        hi = lo;
    }
    hi
}

/// ln of a positive rational as a certified interval. Strategy: write
/// r = 2^e * m with m in [1, 2), then ln r = e ln2 + 2 atanh((m-1)/(m+1)).
/// The atanh series has positive decreasing terms, so a partial sum is a
/// lower bound and a geometric tail bound gives the upper bound.
fn ln_rat(r: &BigRational, prec: u32) -> Interval {
    assert!(r.is_positive());
    let mut m = r.clone();
    let mut e = 0i64;
    let two = big(2);
    let one = BigRational::one();
    while m >= two {
        m /= &two;
        e += 1;
    }
    while m < one {
        m *= &two;
        e -= 1;
    }
    let z = (&m - &one) / (&m + &one);
    let atanh_m = atanh_interval(&z, prec + 8);
    let ln2 = ln2_interval(prec + 8);
    ln2.scale(&big(e)).add(&atanh_m.scale(&two)).coarsen(prec)
}

/// 2*atanh(1/3) = ln 2.
fn ln2_interval(prec: u32) -> Interval {
    atanh_interval(&BigRational::new(BigInt::one(), BigInt::from(3)), prec).scale(&big(2))
}

/// atanh(z) = sum z^{2k+1}/(2k+1) for 0 <= z < 1/2, certified.
fn atanh_interval(z: &BigRational, prec: u32) -> Interval {
    assert!(!z.is_negative() && z < &BigRational::new(BigInt::one(), BigInt::from(2)));
    if z.is_zero() {
        return Interval::point(BigRational::zero());
    }
    let z2 = z * z;
    let threshold = pow2(-(prec as i64 + 2));
    let mut term = z.clone(); // z^{2k+1}
    let mut k = 0u64;
    let mut sum = BigRational::zero();
    loop {
        let contrib = &term / big((2 * k + 1) as i64);
        sum += &contrib;
        term *= &z2;
        k += 1;
        // Tail <= term/(2k+1) * 1/(1-z^2) <= 2 * next contribution.
        let next = &term / big((2 * k + 1) as i64);
        if &next * big(2) < threshold {
            let tail = &next * big(2);
            return Interval {
                lo: sum.clone(),
                hi: sum + tail,
            }
            .coarsen(prec);
        }
    }
}

/// exp of a rational as a certified interval.
fn exp_rat(x: &BigRational, prec: u32) -> Interval {
    if x.is_zero() {
        return Interval::from_int(1);
    }
    if x.is_negative() {
        let pos = exp_rat(&-x.clone(), prec + 4);
        return pos.recip().expect("exp is positive").coarsen(prec);
    }
    // Halve until y <= 1/2, Taylor, then square back up.
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut j = 0u32;
    let mut y = x.clone();
    while y > half {
        y /= big(2);
        j += 1;
    }
    let guard = prec + 8 + 2 * j;
    let threshold = pow2(-(guard as i64));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut n = 1u64;
    loop {
        term = term * &y / big(n as i64);
        sum += &term;
        n += 1;
        if &term * big(2) < threshold {
            break;
        }
    }
    // Tail <= 2 * last term for y <= 1/2.
    let mut iv = Interval {
        lo: sum.clone(),
        hi: sum + &term * big(2),
    };
    for _ in 0..j {
        iv = iv.mul(&iv).coarsen(guard);
    }
    iv.coarsen(prec)
}

/// Fixed-point decimal rendering with `digits` places after the point.
pub fn decimal_of_rational(r: &BigRational, digits: usize) -> String {
    let neg = r.is_negative();
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (&abs * BigRational::from_integer(scale.clone())
        + BigRational::new(BigInt::one(), BigInt::from(2)))
    .floor()
    .to_integer();
    let (int_part, frac_part) = scaled.div_rem(&scale);
    let frac_str = format!("{:0>width$}", frac_part.to_string(), width = digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_str}")
    }
}

/// Parse a decimal literal (with optional exponent) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (mant, exp10) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::ingestion(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_str, frac_str) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_str.is_empty() && frac_str.is_empty() {
        return Err(Error::ingestion(format!("empty decimal literal {s:?}")));
    }
    let digits = format!("{int_str}{frac_str}");
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::ingestion(format!("bad decimal literal {s:?}")))?;
    let shift = exp10 - frac_str.len() as i64;
    let base = if shift >= 0 {
        BigRational::from_integer(BigInt::from(10u32).pow(shift as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(10u32).pow((-shift) as u32))
    };
    Ok(BigRational::from_integer(n * BigInt::from(sign)) * base)
}

/// Scientific-notation rendering with the given significant digit count,
/// e.g. "5.0553e-19". Deterministic (round half up) and re-parseable by
/// [`parse_decimal`].
pub fn sci_of_rational(r: &BigRational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let abs = r.abs();
    // first exponent guess from digit counts, then settle by comparison
    let mut e = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(BigInt::from(10u32).pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), BigInt::from(10u32).pow((-k) as u32))
        }
    };
    let mut m = &abs * pow(-e);
    while m >= BigRational::from_integer(BigInt::from(10)) {
        e += 1;
        m = &abs * pow(-e);
    }
    while m < BigRational::one() {
        e -= 1;
        m = &abs * pow(-e);
    }
    let mut digits = decimal_of_rational(&m, sig - 1);
    if digits.starts_with("10") {
        // rounding pushed the mantissa past ten
        e += 1;
        m = &abs * pow(-e);
        digits = decimal_of_rational(&m, sig - 1);
    }
    let sign = if neg { "-" } else { "" };
    format!("{sign}{digits}e{e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    /// The interval must sit inside `reference` plus or minus `tol`, i.e. it
    /// pins the constant to at least that many digits. (The references are
    /// rounded literals, so exact containment of them is not expected.)
    fn assert_pins(iv: &Interval, reference: &str, tol: &str) {
        let r = rat(reference);
        let t = rat(tol);
        assert!(
            *iv.lo() >= &r - &t && *iv.hi() <= &r + &t,
            "interval [{}, {}] strays more than {tol} from {reference}",
            iv.lo(),
            iv.hi()
        );
    }

    #[test]
    fn ln2_digits() {
        let iv = ln2_interval(160);
        assert_pins(&iv, "0.6931471805599453094172321214581765680755001343602552541", "1e-45");
        assert!(iv.width() < rat("1e-40"));
    }

    #[test]
    fn ln5_digits() {
        let iv = Interval::from_int(5).ln(160).unwrap();
        assert_pins(&iv, "1.609437912434100374600759333226187639525601354268517722", "1e-45");
        assert!(iv.width() < rat("1e-40"));
    }

    #[test]
    fn ln7_digits() {
        let iv = Interval::from_int(7).ln(160).unwrap();
        assert_pins(&iv, "1.945910149055313305105352743443179729637084729581861188", "1e-45");
        assert!(iv.width() < rat("1e-40"));
    }

    #[test]
    fn sqrt5_digits() {
        let iv = Interval::from_int(5).sqrt(160).unwrap();
        assert_pins(&iv, "2.236067977499789696409173668731276235440618359611525724", "1e-45");
        assert!(iv.width() < rat("1e-40"));
    }

    #[test]
    fn sqrt10_digits() {
        let iv = Interval::from_int(10).sqrt(160).unwrap();
        assert_pins(&iv, "3.162277660168379331998893544432718533719555139325216827", "1e-45");
    }

    #[test]
    fn exp_one_digits() {
        let iv = Interval::from_int(1).exp(160);
        assert_pins(&iv, "2.718281828459045235360287471352662497757247093699959575", "1e-45");
        assert!(iv.width() < rat("1e-40"));
    }

    #[test]
    fn exp_of_negative() {
        let iv = Interval::from_int(-1).exp(128);
        assert_pins(&iv, "0.3678794411714423215955237701614608674458111310317678345", "1e-35");
    }

    #[test]
    fn exp_friedman_style_argument() {
        // 0.241*4 + 0.497*2 with exact rational input
        let arg = Interval::point(rat("1.958"));
        let iv = arg.exp(128);
        let reference = rat("7.08514260021941129134214334147482499505626782");
        assert!(iv.contains(&reference));
    }

    #[test]
    fn exp_ln_composes_to_identity() {
        let five = rat("5");
        let iv = Interval::from_int(5).ln(128).unwrap().exp(128);
        assert!(iv.contains(&five));
        assert!(iv.width() < rat("1e-30"));
    }

    #[test]
    fn pow_even_pinches_zero() {
        let iv = Interval::new(rat("-2"), rat("3")).pow_u(2);
        assert_eq!(*iv.lo(), rat("0"));
        assert_eq!(*iv.hi(), rat("9"));
        let odd = Interval::new(rat("-2"), rat("3")).pow_u(3);
        assert_eq!(*odd.lo(), rat("-8"));
        assert_eq!(*odd.hi(), rat("27"));
    }

    #[test]
    fn recip_rejects_zero_spanning() {
        assert!(Interval::new(rat("-1"), rat("1")).recip().is_err());
        let iv = Interval::new(rat("2"), rat("4")).recip().unwrap();
        assert_eq!(*iv.lo(), rat("0.25"));
        assert_eq!(*iv.hi(), rat("0.5"));
    }

    #[test]
    fn parse_decimal_forms() {
        assert_eq!(parse_decimal("1.5e2").unwrap(), rat("150"));
        assert_eq!(parse_decimal("-0.25").unwrap(), BigRational::new(BigInt::from(-1), BigInt::from(4)));
        assert_eq!(parse_decimal("5e-1").unwrap(), BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert!(parse_decimal("abc").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_of_rational(&rat("1.25"), 3), "1.250");
        assert_eq!(decimal_of_rational(&rat("-0.5"), 1), "-0.5");
        assert_eq!(decimal_of_rational(&rat("2"), 0), "2");
    }

    #[test]
    fn scientific_rendering() {
        assert_eq!(sci_of_rational(&rat("0"), 4), "0");
        assert_eq!(sci_of_rational(&rat("0.5"), 5), "5.0000e-1");
        assert_eq!(sci_of_rational(&rat("12345"), 3), "1.23e4");
        assert_eq!(sci_of_rational(&rat("-12345"), 3), "-1.23e4");
        assert_eq!(sci_of_rational(&rat("9.995"), 3), "1.00e1");
        assert_eq!(sci_of_rational(&rat("1"), 1), "1e0");
        assert_eq!(
            sci_of_rational(&rat("5.0552517402699e-19"), 6),
            "5.05525e-19"
        );
        // rendering round-trips through the parser at full precision
        let v = rat("-3.25e7");
        assert_eq!(parse_decimal(&sci_of_rational(&v, 3)).unwrap(), v);
    }

    proptest! {
        #[test]
        fn coarsen_contains_original(n in -10_000i64..10_000, d in 1i64..999, prec in 4u32..64) {
            let r = BigRational::new(BigInt::from(n), BigInt::from(d));
            let iv = Interval::point(r.clone()).coarsen(prec);
            prop_assert!(iv.contains(&r));
            prop_assert!(iv.width() <= pow2(-(prec as i64) + 1));
        }

        #[test]
        fn mul_contains_products(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
            let x = Interval::new(big(a.min(b)), big(a.max(b)));
            let y = Interval::new(big(c.min(d)), big(c.max(d)));
            let prod = x.mul(&y);
            // products of arbitrary contained points stay inside
            for (u, v) in [(a, c), (a, d), (b, c), (b, d)] {
                prop_assert!(prod.contains(&big(u * v)));
            }
        }

        #[test]
        fn sqrt_bracket(n in 0i64..100_000) {
            let iv = Interval::point(big(n)).sqrt(48).unwrap();
            prop_assert!(iv.lo() * iv.lo() <= big(n));
            prop_assert!(iv.hi() * iv.hi() >= big(n));
        }

        #[test]
        fn ln_monotone(a in 2i64..500, b in 2i64..500) {
            prop_assume!(a < b);
            let la = Interval::from_int(a).ln(96).unwrap();
            let lb = Interval::from_int(b).ln(96).unwrap();
            prop_assert!(la.lo() < lb.hi());
            // strict separation once widths are tiny
            prop_assert!(la.hi() < lb.lo());
        }
    }
}

//! Finite fields F_{p^k} of odd characteristic p >= 5.
//!
//! A field is described by a [`FieldSpec`]: the prime p, the degree k, and a
//! monic degree-k modulus over F_p. Elements live in the polynomial basis
//! 1, u, ..., u^{k-1}. The modulus is always the *first* monic irreducible of
//! degree k in the canonical enumeration order, so two independently built
//! specs for the same (p, k) are identical. The enumeration order reads the
//! non-leading coefficient vector (c_0, ..., c_{k-1}) as the base-p integer
//! sum c_i p^i, smallest first; the same encoding orders field elements and
//! is exposed as [`FieldSpec::code`].
//!
//! Degrees are capped at k <= 24 so that field orders stay within u128 and
//! every supported field stays at desk scale.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the extension degree over the prime field.
pub const MAX_DEGREE: usize = 24;

/// Largest supported characteristic. Keeps products of coefficient pairs in u64.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// Raw element data: a residue for prime fields, a coefficient vector (length k,
/// zero-padded) for proper extensions. Equality is data equality; whether two
/// elements belong to the same field is the caller's responsibility and is
/// enforced by [`FieldElement`] and the container types.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Fe(pub(crate) FeRepr);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) enum FeRepr {
    P(u64),
    X(Box<[u64]>),
}

struct SpecInner {
    p: u64,
    k: usize,
    /// Coefficients of x^0..x^{k-1} of the monic modulus; leading 1 implicit.
    modulus: Vec<u64>,
    q: u128,
    /// floor(2^64 / p), for Barrett reduction of values below 2^63.
    barrett: u64,
}

/// Description of a finite field F_{p^k}. Cheap to clone; equality is
/// structural on (p, k, modulus).
#[derive(Clone)]
pub struct FieldSpec(Arc<SpecInner>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.k == other.0.k
                && self.0.modulus == other.0.modulus)
    }
}
impl Eq for FieldSpec {}

impl std::hash::Hash for FieldSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.k.hash(state);
        self.0.modulus.hash(state);
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

/// Serializable form of a [`FieldSpec`].
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FieldSpecData {
    pub p: u64,
    pub k: usize,
    /// Little-endian coefficients c_0..c_{k-1} of the monic modulus.
    pub modulus: Vec<u64>,
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for d in [2u64, 3, 5, 7] {
        if n == d {
            return true;
        }
        if n % d == 0 {
            return false;
        }
    }
    let mut d = 11u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    /// The prime field F_p, p >= 5 prime.
    pub fn prime(p: u64) -> Result<FieldSpec> {
        Self::with_degree(p, 1)
    }

    /// F_{p^k} with the canonical (first-in-enumeration) irreducible modulus.
    pub fn with_degree(p: u64, k: usize) -> Result<FieldSpec> {
        if p < 5 || p > MAX_PRIME || !is_prime_u64(p) {
            return Err(Error::domain(format!(
                "characteristic must be a prime in [5, {MAX_PRIME}], got {p}"
            )));
        }
        if k == 0 || k > MAX_DEGREE {
            return Err(Error::resource(format!(
                "extension degree {k} outside supported range 1..={MAX_DEGREE}"
            )));
        }
        let q = (p as u128)
            .checked_pow(k as u32)
            .ok_or_else(|| Error::resource(format!("field order {p}^{k} overflows u128")))?;
        let modulus = first_irreducible(p, k);
        Ok(FieldSpec(Arc::new(SpecInner {
            p,
            k,
            modulus,
            q,
            barrett: ((1u128 << 64) / p as u128) as u64,
        })))
    }

    /// Reconstruct a spec from an explicit modulus (used by deserialization).
    pub fn from_data(data: &FieldSpecData) -> Result<FieldSpec> {
        let spec = FieldSpec::with_degree(data.p, data.k)?;
        if spec.0.modulus != data.modulus {
            // Accept only the canonical modulus: one spec per (p, k).
            return Err(Error::ingestion(format!(
                "modulus {:?} is not the canonical degree-{} modulus over F_{}",
                data.modulus, data.k, data.p
            )));
        }
        Ok(spec)
    }

    /// Parse a prime-power order q = p^k.
    pub fn from_order(q: u128) -> Result<FieldSpec> {
        if q < 5 {
            return Err(Error::domain(format!("field order {q} too small")));
        }
        let mut p = q;
        let mut d = 2u128;
        while d * d <= q {
            if q % d == 0 {
                p = d;
                break;
            }
            d += 1;
            if d > MAX_PRIME as u128 {
                break;
            }
        }
        if p > MAX_PRIME as u128 {
            return Err(Error::resource(format!(
                "field order {q} has no prime factor below 2^31"
            )));
        }
        let mut k = 0usize;
        let mut rest = q;
        while rest > 1 {
            if rest % p != 0 {
                return Err(Error::domain(format!("{q} is not a prime power")));
            }
            rest /= p;
            k += 1;
        }
        FieldSpec::with_degree(p as u64, k)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn k(&self) -> usize {
        self.0.k
    }
    /// The field order q = p^k.
    pub fn q(&self) -> u128 {
        self.0.q
    }
    /// Non-leading coefficients of the modulus (empty meaning x for k = 1).
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn to_data(&self) -> FieldSpecData {
        FieldSpecData {
            p: self.0.p,
            k: self.0.k,
            modulus: self.0.modulus.clone(),
        }
    }

    /// F_{q^m} as an extension of the same prime field, degree k*m, canonical
    /// modulus. The result is a plain F_p-extension; it does not embed self.
    pub fn extension(&self, m: usize) -> Result<FieldSpec> {
        if m == 0 {
            return Err(Error::domain("extension degree must be positive"));
        }
        let total = self
            .0
            .k
            .checked_mul(m)
            .ok_or_else(|| Error::resource("extension degree overflow"))?;
        FieldSpec::with_degree(self.0.p, total)
    }

    // ---- prime field arithmetic -------------------------------------------------

    #[inline]
    fn red(&self, x: u64) -> u64 {
        // Barrett reduction; valid for x < 2^63.
        let q = ((x as u128 * self.0.barrett as u128) >> 64) as u64;
        let mut r = x - q * self.0.p;
        while r >= self.0.p {
            r -= self.0.p;
        }
        r
    }

    #[inline]
    pub(crate) fn padd(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0.p {
            s - self.0.p
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn psub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0.p - b
        }
    }

    #[inline]
    pub(crate) fn pmul(&self, a: u64, b: u64) -> u64 {
        self.red(a * b)
    }

    pub(crate) fn pinv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::domain("inverse of zero"));
        }
        // Extended Euclid in i128; p < 2^31 so everything fits comfortably.
        let (mut r0, mut r1) = (self.0.p as i128, a as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let qq = r0 / r1;
            (r0, r1) = (r1, r0 - qq * r1);
            (s0, s1) = (s1, s0 - qq * s1);
        }
        debug_assert_eq!(r0, 1);
        let mut s = s0 % self.0.p as i128;
        if s < 0 {
            s += self.0.p as i128;
        }
        Ok(s as u64)
    }

    // ---- element constructors ---------------------------------------------------

    pub fn zero(&self) -> Fe {
        if self.0.k == 1 {
            Fe(FeRepr::P(0))
        } else {
            Fe(FeRepr::X(vec![0; self.0.k].into_boxed_slice()))
        }
    }

    pub fn one(&self) -> Fe {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> Fe {
        let r = n % self.0.p;
        if self.0.k == 1 {
            Fe(FeRepr::P(r))
        } else {
            let mut c = vec![0; self.0.k];
            c[0] = r;
            Fe(FeRepr::X(c.into_boxed_slice()))
        }
    }

    pub fn from_i64(&self, n: i64) -> Fe {
        let r = n.rem_euclid(self.0.p as i64) as u64;
        self.from_u64(r)
    }

    /// Build an element from little-endian coefficients over F_p (length <= k).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<Fe> {
        if coeffs.len() > self.0.k {
            return Err(Error::domain(format!(
                "coefficient vector of length {} exceeds field degree {}",
                coeffs.len(),
                self.0.k
            )));
        }
        if self.0.k == 1 {
            return Ok(Fe(FeRepr::P(coeffs.first().map_or(0, |&c| c % self.0.p))));
        }
        let mut c = vec![0; self.0.k];
        for (i, &v) in coeffs.iter().enumerate() {
            c[i] = v % self.0.p;
        }
        Ok(Fe(FeRepr::X(c.into_boxed_slice())))
    }

    /// Little-endian coefficient view of an element (length k).
    pub fn coeffs(&self, a: &Fe) -> Vec<u64> {
        match &a.0 {
            FeRepr::P(v) => vec![*v],
            FeRepr::X(c) => c.to_vec(),
        }
    }

    /// Canonical integer encoding sum c_i p^i; a total order on the field.
    pub fn code(&self, a: &Fe) -> u128 {
        match &a.0 {
            FeRepr::P(v) => *v as u128,
            FeRepr::X(c) => {
                let mut acc = 0u128;
                for &ci in c.iter().rev() {
                    acc = acc * self.0.p as u128 + ci as u128;
                }
                acc
            }
        }
    }

    pub fn from_code(&self, code: u128) -> Result<Fe> {
        if code >= self.0.q {
            return Err(Error::domain(format!(
                "element code {code} outside field of order {}",
                self.0.q
            )));
        }
        if self.0.k == 1 {
            return Ok(Fe(FeRepr::P(code as u64)));
        }
        let mut c = vec![0u64; self.0.k];
        let mut rest = code;
        for ci in c.iter_mut() {
            *ci = (rest % self.0.p as u128) as u64;
            rest /= self.0.p as u128;
        }
        Ok(Fe(FeRepr::X(c.into_boxed_slice())))
    }

    /// All field elements in canonical code order. Intended for small fields.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.0.q).map(move |c| self.from_code(c).expect("code in range"))
    }

    // ---- element arithmetic -----------------------------------------------------

    pub fn is_zero(&self, a: &Fe) -> bool {
        match &a.0 {
            FeRepr::P(v) => *v == 0,
            FeRepr::X(c) => c.iter().all(|&x| x == 0),
        }
    }

    pub fn is_one(&self, a: &Fe) -> bool {
        match &a.0 {
            FeRepr::P(v) => *v == 1,
            FeRepr::X(c) => c[0] == 1 && c[1..].iter().all(|&x| x == 0),
        }
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        match (&a.0, &b.0) {
            (FeRepr::P(x), FeRepr::P(y)) => Fe(FeRepr::P(self.padd(*x, *y))),
            (FeRepr::X(x), FeRepr::X(y)) => {
                let c: Vec<u64> = x
                    .iter()
                    .zip(y.iter())
                    .map(|(&u, &v)| self.padd(u, v))
                    .collect();
                Fe(FeRepr::X(c.into_boxed_slice()))
            }
            _ => panic!("mixed element representations"),
        }
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        match (&a.0, &b.0) {
            (FeRepr::P(x), FeRepr::P(y)) => Fe(FeRepr::P(self.psub(*x, *y))),
            (FeRepr::X(x), FeRepr::X(y)) => {
                let c: Vec<u64> = x
                    .iter()
                    .zip(y.iter())
                    .map(|(&u, &v)| self.psub(u, v))
                    .collect();
                Fe(FeRepr::X(c.into_boxed_slice()))
            }
            _ => panic!("mixed element representations"),
        }
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        match (&a.0, &b.0) {
            (FeRepr::P(x), FeRepr::P(y)) => Fe(FeRepr::P(self.pmul(*x, *y))),
            (FeRepr::X(x), FeRepr::X(y)) => {
                let k = self.0.k;
                // Schoolbook product with u128 accumulators, then reduce by the
                // monic modulus from the top. Sums of k products of values < 2^31
                // stay far below u128 limits.
                let mut buf = vec![0u128; 2 * k - 1];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0 {
                        continue;
                    }
                    for (j, &yj) in y.iter().enumerate() {
                        buf[i + j] += (xi as u128) * (yj as u128);
                    }
                }
                let mut c: Vec<u64> = buf
                    .iter()
                    .map(|&v| (v % self.0.p as u128) as u64)
                    .collect();
                for i in (k..c.len()).rev() {
                    let lead = c[i];
                    if lead != 0 {
                        c[i] = 0;
                        for (j, &mj) in self.0.modulus.iter().enumerate() {
                            if mj != 0 {
                                let t = self.pmul(lead, mj);
                                c[i - k + j] = self.psub(c[i - k + j], t);
                            }
                        }
                    }
                }
                c.truncate(k);
                Fe(FeRepr::X(c.into_boxed_slice()))
            }
            _ => panic!("mixed element representations"),
        }
    }

    pub fn inv(&self, a: &Fe) -> Result<Fe> {
        match &a.0 {
            FeRepr::P(v) => Ok(Fe(FeRepr::P(self.pinv(*v)?))),
            FeRepr::X(c) => {
                if self.is_zero(a) {
                    return Err(Error::domain("inverse of zero"));
                }
                // Extended Euclid over F_p[x] against the modulus.
                let mut f: Vec<u64> = self.0.modulus.clone();
                f.push(1);
                let g: Vec<u64> = c.to_vec();
                let (gcd, _, t) = pp_ext_gcd(self, &f, &pp_trim(g));
                debug_assert_eq!(gcd.len(), 1);
                let scale = self.pinv(gcd[0])?;
                let mut out = vec![0u64; self.0.k];
                for (i, &ti) in t.iter().enumerate() {
                    out[i] = self.pmul(ti, scale);
                }
                Ok(Fe(FeRepr::X(out.into_boxed_slice())))
            }
        }
    }

    pub fn div(&self, a: &Fe, b: &Fe) -> Result<Fe> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Fe, mut e: u128) -> Fe {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Euler criterion. Zero counts as a square.
    pub fn is_square(&self, a: &Fe) -> bool {
        if self.is_zero(a) {
            return true;
        }
        let e = (self.0.q - 1) / 2;
        self.is_one(&self.pow(a, e))
    }

    /// Tonelli-Shanks square root; of the two roots, returns the one with
    /// the smaller canonical encoding. None for non-residues.
    pub fn sqrt(&self, a: &Fe) -> Option<Fe> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if !self.is_square(a) {
            return None;
        }
        let q1 = self.0.q - 1;
        let e = q1.trailing_zeros();
        let m = q1 >> e;
        let mut r;
        if e == 1 {
            r = self.pow(a, (self.0.q + 1) >> 2);
        } else {
            // Deterministic non-residue scan in code order.
            let mut z = self.from_u64(2);
            let mut codeiter = 2u128;
            while self.is_square(&z) {
                codeiter += 1;
                z = self.from_code(codeiter).expect("nonresidue exists");
            }
            let mut c = self.pow(&z, m);
            r = self.pow(a, (m + 1) >> 1);
            let mut t = self.pow(a, m);
            let mut mm = e;
            while !self.is_one(&t) {
                let mut i = 0u32;
                let mut t2 = t.clone();
                while !self.is_one(&t2) {
                    t2 = self.mul(&t2, &t2);
                    i += 1;
                }
                let mut b = c.clone();
                for _ in 0..(mm - i - 1) {
                    b = self.mul(&b, &b);
                }
                r = self.mul(&r, &b);
                c = self.mul(&b, &b);
                t = self.mul(&t, &c);
                mm = i;
            }
        }
        debug_assert_eq!(self.mul(&r, &r), *a);
        let nr = self.neg(&r);
        if self.code(&nr) < self.code(&r) {
            Some(nr)
        } else {
            Some(r)
        }
    }

    /// Wrap raw data as a provenance-carrying element.
    pub fn element(&self, v: Fe) -> FieldElement {
        FieldElement {
            spec: self.clone(),
            v,
        }
    }
}

// ---- polynomials over F_p (internal helpers for moduli and irreducibility) ----

pub(crate) fn pp_trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn pp_mul(f: &FieldSpec, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut buf = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            buf[i + j] += (x as u128) * (y as u128);
        }
    }
    pp_trim(buf.iter().map(|&v| (v % f.0.p as u128) as u64).collect())
}

fn pp_rem(f: &FieldSpec, a: &[u64], m: &[u64]) -> Vec<u64> {
    debug_assert!(!m.is_empty());
    let mut r: Vec<u64> = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = f.pinv(m[dm]).expect("nonzero leading coefficient");
    while r.len() > dm {
        let c = f.pmul(*r.last().unwrap(), lead_inv);
        let shift = r.len() - 1 - dm;
        if c != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let idx = shift + j;
                r[idx] = f.psub(r[idx], f.pmul(c, mj));
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

fn pp_gcd(f: &FieldSpec, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x: Vec<u64> = a.to_vec();
    let mut y: Vec<u64> = b.to_vec();
    while !y.is_empty() {
        let r = pp_rem(f, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// Extended Euclid over F_p[x]: returns (g, s, t) with s*a + t*b = g.
fn pp_ext_gcd(f: &FieldSpec, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![1u64], vec![]);
    let (mut t0, mut t1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        // r0 = q*r1 + r; track quotient explicitly.
        let dm = r1.len() - 1;
        let lead_inv = f.pinv(r1[dm]).expect("nonzero");
        let mut r = r0.clone();
        let mut q = vec![0u64; r.len().saturating_sub(dm)];
        while r.len() > dm {
            let c = f.pmul(*r.last().unwrap(), lead_inv);
            let shift = r.len() - 1 - dm;
            q[shift] = c;
            if c != 0 {
                for (j, &mj) in r1.iter().enumerate() {
                    let idx = shift + j;
                    r[idx] = f.psub(r[idx], f.pmul(c, mj));
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        let q = pp_trim(q);
        let snew = pp_sub(f, &s0, &pp_mul(f, &q, &s1));
        let tnew = pp_sub(f, &t0, &pp_mul(f, &q, &t1));
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, snew);
        (t0, t1) = (t1, tnew);
    }
    (r0, s0, t0)
}

fn pp_sub(f: &FieldSpec, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = f.psub(x, y);
    }
    pp_trim(out)
}

/// x^e mod m over F_p, e given as a big integer.
fn pp_modpow_x(f: &FieldSpec, e: &BigUint, m: &[u64]) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut base = pp_rem(f, &[0, 1], m);
    let mut bits = e.clone();
    while !bits.is_zero() {
        if (&bits & BigUint::one()) == BigUint::one() {
            result = pp_rem(f, &pp_mul(f, &result, &base), m);
        }
        base = pp_rem(f, &pp_mul(f, &base, &base), m);
        bits >>= 1;
    }
    result
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin irreducibility test for a monic polynomial over F_p.
pub(crate) fn is_irreducible_p(f: &FieldSpec, poly: &[u64]) -> bool {
    let d = poly.len() - 1;
    if d == 0 {
        return false;
    }
    let p = BigUint::from(f.0.p);
    // x^{p^d} == x mod poly
    let xpd = pp_modpow_x(f, &p.pow(d as u32), poly);
    let x_itself = pp_rem(f, &[0, 1], poly);
    if pp_trim(pp_sub(f, &xpd, &x_itself)) != Vec::<u64>::new() {
        return false;
    }
    for l in prime_factors(d) {
        let e = p.pow((d / l) as u32);
        let xe = pp_modpow_x(f, &e, poly);
        let diff = pp_sub(f, &xe, &x_itself);
        let g = pp_gcd(f, poly, &diff);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible of degree k over F_p in canonical code order.
fn first_irreducible(p: u64, k: usize) -> Vec<u64> {
    // Temporary prime spec for the scan; safe because with_degree(p, 1)
    // never recurses into this function with k > 1.
    let f = FieldSpec(Arc::new(SpecInner {
        p,
        k: 1,
        modulus: vec![0],
        q: p as u128,
        barrett: ((1u128 << 64) / p as u128) as u64,
    }));
    if k == 1 {
        return vec![0]; // the polynomial x
    }
    let total = (p as u128).pow(k as u32);
    let mut code = 0u128;
    while code < total {
        let mut poly = vec![0u64; k + 1];
        let mut rest = code;
        for c in poly.iter_mut().take(k) {
            *c = (rest % p as u128) as u64;
            rest /= p as u128;
        }
        poly[k] = 1;
        if is_irreducible_p(&f, &poly) {
            poly.pop();
            return poly;
        }
        code += 1;
    }
    unreachable!("irreducible polynomial of every degree exists")
}

/// An element together with its field, for API-level use. Arithmetic panics on
/// mixed fields; equality across fields is simply false.
#[derive(Clone, Debug)]
pub struct FieldElement {
    spec: FieldSpec,
    v: Fe,
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn raw(&self) -> &Fe {
        &self.v
    }
    pub fn into_raw(self) -> Fe {
        self.v
    }
    pub fn code(&self) -> u128 {
        self.spec.code(&self.v)
    }
    pub fn is_zero(&self) -> bool {
        self.spec.is_zero(&self.v)
    }
    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement {
            spec: self.spec.clone(),
            v: self.spec.inv(&self.v)?,
        })
    }
    pub fn pow(&self, e: u128) -> FieldElement {
        FieldElement {
            spec: self.spec.clone(),
            v: self.spec.pow(&self.v, e),
        }
    }
    /// Square root with the smaller canonical encoding, if one exists.
    pub fn sqrt_or_none(&self) -> Option<FieldElement> {
        self.spec.sqrt(&self.v).map(|v| FieldElement {
            spec: self.spec.clone(),
            v,
        })
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.v == other.v
    }
}
impl Eq for FieldElement {}

macro_rules! fe_binop {
    ($trait:ident, $method:ident, $op:ident) => {
        impl std::ops::$trait for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                assert!(
                    self.spec == rhs.spec,
                    "field element operands from different fields"
                );
                FieldElement {
                    spec: self.spec.clone(),
                    v: self.spec.$op(&self.v, &rhs.v),
                }
            }
        }
    };
}
fe_binop!(Add, add, add);
fe_binop!(Sub, sub, sub);
fe_binop!(Mul, mul, mul);

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> FieldSpec {
        FieldSpec::prime(5).unwrap()
    }
    fn f25() -> FieldSpec {
        f5().extension(2).unwrap()
    }

    #[test]
    fn f5_tables() {
        let f = f5();
        assert_eq!(f.q(), 5);
        // inverses
        let two = f.from_u64(2);
        assert_eq!(f.code(&f.inv(&two).unwrap()), 3);
        let three = f.from_u64(3);
        assert_eq!(f.code(&f.inv(&three).unwrap()), 2);
        // squares are {0, 1, 4}
        let squares: Vec<u128> = f
            .elements()
            .filter(|a| f.is_square(a))
            .map(|a| f.code(&a))
            .collect();
        assert_eq!(squares, vec![0, 1, 4]);
    }

    #[test]
    fn canonical_modulus_f25() {
        let f = f25();
        // First irreducible quadratic over F_5 in code order is u^2 + 2.
        assert_eq!(f.modulus(), &[2, 0]);
        // u * u = -2 = 3
        let u = f.from_code(5).unwrap();
        let u2 = f.mul(&u, &u);
        assert_eq!(f.code(&u2), 3);
    }

    #[test]
    fn canonical_modulus_f343() {
        let f = FieldSpec::prime(7).unwrap().extension(3).unwrap();
        // First irreducible cubic over F_7 is u^3 + 2.
        assert_eq!(f.modulus(), &[2, 0, 0]);
    }

    #[test]
    fn extension_degree_cap() {
        let f = f25();
        assert!(f.extension(12).is_ok()); // 2*12 = 24
        assert!(matches!(f.extension(13), Err(Error::Resource(_))));
    }

    #[test]
    fn from_order_roundtrip() {
        let f = FieldSpec::from_order(125).unwrap();
        assert_eq!(f.p(), 5);
        assert_eq!(f.k(), 3);
        assert!(FieldSpec::from_order(12).is_err()); // 12 = 2^2*3 not a prime power
        assert!(FieldSpec::from_order(9).is_err()); // characteristic 3 unsupported
    }

    #[test]
    fn sqrt_known_values() {
        let f = f5();
        let four = f.from_u64(4);
        // roots are 2 and 3; canonical pick is 2
        assert_eq!(f.code(&f.sqrt(&four).unwrap()), 2);
        assert!(f.sqrt(&f.from_u64(2)).is_none());
        assert!(f.sqrt(&f.from_u64(3)).is_none());
        assert_eq!(f.code(&f.sqrt(&f.zero()).unwrap()), 0);
    }

    #[test]
    fn provenance_equality() {
        let a = f5().element(f5().from_u64(1));
        let b = FieldSpec::prime(7).unwrap().element(FieldSpec::prime(7).unwrap().from_u64(1));
        assert_ne!(a, b);
        let c = f5().element(f5().from_u64(1));
        assert_eq!(a, c); // independently built specs of the same field agree
    }

    #[test]
    fn irreducible_counts_match_moebius() {
        // #irreducibles of degree d over F_q = (1/d) sum_{e|d} mu(e) q^{d/e}
        let f = f5();
        let count = |d: usize| -> usize {
            let total = 5u128.pow(d as u32);
            (0..total)
                .filter(|&code| {
                    let mut poly = vec![0u64; d + 1];
                    let mut rest = code;
                    for c in poly.iter_mut().take(d) {
                        *c = (rest % 5) as u64;
                        rest /= 5;
                    }
                    poly[d] = 1;
                    is_irreducible_p(&f, &poly)
                })
                .count()
        };
        assert_eq!(count(1), 5);
        assert_eq!(count(2), (25 - 5) / 2);
        assert_eq!(count(3), (125 - 5) / 3);
        assert_eq!(count(4), (625 - 25) / 4);
    }

    proptest! {
        #[test]
        fn frobenius_is_additive_f25(a in 0u128..25, b in 0u128..25) {
            let f = f25();
            let x = f.from_code(a).unwrap();
            let y = f.from_code(b).unwrap();
            let lhs = f.pow(&f.add(&x, &y), 5);
            let rhs = f.add(&f.pow(&x, 5), &f.pow(&y, 5));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mul_inverse_roundtrip_f125(a in 1u128..125) {
            let f = FieldSpec::prime(5).unwrap().extension(3).unwrap();
            let x = f.from_code(a).unwrap();
            let xi = f.inv(&x).unwrap();
            prop_assert!(f.is_one(&f.mul(&x, &xi)));
        }

        #[test]
        fn sqrt_squares_roundtrip_f49(a in 0u128..49) {
            let f = FieldSpec::prime(7).unwrap().extension(2).unwrap();
            let x = f.from_code(a).unwrap();
            let sq = f.mul(&x, &x);
            let r = f.sqrt(&sq).expect("squares have roots");
            prop_assert_eq!(f.mul(&r, &r), sq);
        }

        #[test]
        fn code_roundtrip(a in 0u128..2401) {
            let f = FieldSpec::prime(7).unwrap().extension(4).unwrap();
            let x = f.from_code(a).unwrap();
            prop_assert_eq!(f.code(&x), a);
        }
    }
}
